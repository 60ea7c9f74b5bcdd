mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semnav_core::building::{edge_weight, node_weight, BuildingGraph, WeightConfig};
use semnav_core::planner::{path_weight, plan, PlanError, WarningReason};
use support::{brute_force_best, now, random_building};

fn setup(seed: u64, rooms: usize) -> (semnav_core::building::BuildingDescription, BuildingGraph) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let desc = random_building(&mut rng, rooms);
    let graph = BuildingGraph::from_description(&desc).expect("generated buildings are valid");
    (desc, graph)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn plan_matches_exhaustive_enumeration(seed in any::<u64>(), rooms in 2usize..=8, s in 0usize..8, g in 0usize..8) {
        let (desc, graph) = setup(seed, rooms);
        let start = format!("R{}", s % rooms);
        let goal = format!("R{}", g % rooms);
        let cfg = WeightConfig::default();
        let expected = brute_force_best(&desc, &start, &goal, &cfg, now());
        match plan(&graph, &start, &goal, &cfg, now()) {
            Ok(p) => prop_assert_eq!(Some(p.total_weight), expected),
            Err(PlanError::NoPath { .. }) => prop_assert_eq!(expected, None),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn path_weight_decomposes_and_path_is_well_formed(seed in any::<u64>(), rooms in 2usize..=8, g in 1usize..8) {
        let (_, graph) = setup(seed, rooms);
        let goal = format!("R{}", g % rooms);
        let cfg = WeightConfig::default();
        let Ok(p) = plan(&graph, "R0", &goal, &cfg, now()) else { return Ok(()) };
        let rooms_on: Vec<&str> = p.rooms().collect();
        let doors_on: Vec<&str> = p.doors().collect();
        prop_assert_eq!(rooms_on[0], "R0");
        prop_assert_eq!(*rooms_on.last().unwrap(), goal.as_str());
        prop_assert_eq!(p.x_y_path.len(), p.semantic_path.len());
        // simple path
        let mut sorted = rooms_on.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), rooms_on.len());
        // every door leads from the previous room to the next, and the total is the sum of parts
        let mut total = 0.0;
        for r in &rooms_on {
            total += node_weight(graph.room(r).unwrap(), graph.materials(), &cfg, now());
        }
        for (k, d) in doors_on.iter().enumerate() {
            let e = graph
                .outgoing(rooms_on[k])
                .find(|e| e.door_id == *d && e.head_room == rooms_on[k + 1]);
            prop_assert!(e.is_some());
            total += edge_weight(e.unwrap(), &cfg);
        }
        prop_assert!((total - p.total_weight).abs() < 1e-9);
        prop_assert_eq!(path_weight(&graph, &p.semantic_path, &cfg, now()).unwrap(), p.total_weight);
    }

    #[test]
    fn on_path_warnings_flag_exactly_the_heavy_rooms(seed in any::<u64>(), rooms in 2usize..=8, g in 1usize..8) {
        let (_, graph) = setup(seed, rooms);
        let goal = format!("R{}", g % rooms);
        let cfg = WeightConfig::default();
        let Ok(p) = plan(&graph, "R0", &goal, &cfg, now()) else { return Ok(()) };
        for r in p.rooms() {
            let w = node_weight(graph.room(r).unwrap(), graph.materials(), &cfg, now());
            let flagged = p
                .warnings
                .iter()
                .any(|x| x.room_id == r && x.reason == WarningReason::HighWeightOnPath);
            prop_assert_eq!(flagged, w >= cfg.warning_threshold);
        }
        for w in &p.warnings {
            let on_path = p.rooms().any(|r| r == w.room_id);
            prop_assert_eq!(on_path, w.reason == WarningReason::HighWeightOnPath);
        }
    }

    #[test]
    fn zeroing_a_weight_never_raises_the_optimum(seed in any::<u64>(), rooms in 2usize..=8, g in 1usize..8) {
        let (_, graph) = setup(seed, rooms);
        let goal = format!("R{}", g % rooms);
        let cfg = WeightConfig::default();
        let lighter = WeightConfig { w_h_high: 0.0, ..cfg };
        if let (Ok(a), Ok(b)) = (plan(&graph, "R0", &goal, &cfg, now()), plan(&graph, "R0", &goal, &lighter, now())) {
            prop_assert!(b.total_weight <= a.total_weight);
        }
    }
}

#[test]
fn start_equals_goal_is_a_single_room() {
    let (_, graph) = setup(3, 5);
    let cfg = WeightConfig::default();
    let p = plan(&graph, "R2", "R2", &cfg, now()).unwrap();
    assert_eq!(p.semantic_path, vec!["R2".to_string()]);
    let w = node_weight(graph.room("R2").unwrap(), graph.materials(), &cfg, now());
    assert_eq!(p.total_weight, w);
}

#[test]
fn planning_is_deterministic() {
    let (_, graph) = setup(99, 8);
    let cfg = WeightConfig::default();
    for g in 1..8 {
        let goal = format!("R{g}");
        assert_eq!(
            plan(&graph, "R0", &goal, &cfg, now()),
            plan(&graph, "R0", &goal, &cfg, now())
        );
    }
}
