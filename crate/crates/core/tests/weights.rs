mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semnav_core::building::{node_weight, BuildingGraph, Hazard, NodeWeightBreakdown, WeightConfig};
use support::{now, oracle_node_weight, random_building, DAY};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn node_weight_matches_table(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let desc = random_building(&mut rng, 8);
        let graph = BuildingGraph::from_description(&desc).unwrap();
        let cfg = WeightConfig::default();
        for r in &desc.rooms {
            let room = graph.room(&r.id).unwrap();
            let got = node_weight(room, graph.materials(), &cfg, now());
            prop_assert_eq!(got, oracle_node_weight(r, &desc, &cfg, now()));
            let b = NodeWeightBreakdown::compute(room, graph.materials(), &cfg, now());
            prop_assert_eq!(b.material + b.area + b.scan + b.hazard, got);
            prop_assert!(got >= 0.0);
        }
    }

    #[test]
    fn older_scans_never_weigh_more(seed in any::<u64>(), a in 0.0f64..60.0, b in 0.0f64..60.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let desc = random_building(&mut rng, 1);
        let graph = BuildingGraph::from_description(&desc).unwrap();
        let cfg = WeightConfig::default();
        let (young, old) = if a <= b { (a, b) } else { (b, a) };
        let w = |age_days: f64| {
            let g = graph.touch_scan("R0", now().plus_secs(-age_days * DAY)).unwrap();
            node_weight(g.room("R0").unwrap(), g.materials(), &cfg, now())
        };
        prop_assert!(w(young) >= w(old));
    }

    #[test]
    fn hazard_adds_exactly_its_weight(seed in any::<u64>(), wh in 0.0f64..1000.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let desc = random_building(&mut rng, 1);
        let graph = BuildingGraph::from_description(&desc).unwrap();
        let cfg = WeightConfig { w_h_high: wh, ..WeightConfig::default() };
        let calm = graph.with_hazard("R0", Hazard::None).unwrap();
        let busy = graph.with_hazard("R0", Hazard::High).unwrap();
        let w = |g: &BuildingGraph| node_weight(g.room("R0").unwrap(), g.materials(), &cfg, now());
        prop_assert_eq!(w(&busy), w(&calm) + wh);
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        WeightConfig {
            w_h_high: -1.0,
            ..WeightConfig::default()
        },
        WeightConfig {
            w_d_pull: f64::NAN,
            ..WeightConfig::default()
        },
        WeightConfig {
            area_thresholds: [100.0, 50.0],
            ..WeightConfig::default()
        },
        WeightConfig {
            scan_thresholds: [5.0, 5.0],
            ..WeightConfig::default()
        },
    ];
    for cfg in bad {
        assert!(cfg.validate().is_err(), "{cfg:?}");
    }
    assert!(WeightConfig::default().validate().is_ok());
}
