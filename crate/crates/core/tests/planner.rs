mod common;

use std::collections::BTreeSet;

use common::*;
use frontier_core::anchor::{Frontier3D, FrontierStatus};
use frontier_core::eval::pick_starts;
use frontier_core::frontier_store::FrontierStore;
use frontier_core::planner::path::{dijkstra, grid_search, Traversability};
use frontier_core::planner::{find_entry_point, run_exploration, run_exploration_with, scale_to_camera, select_goal, PlannerConfig, PlannerMode};
use frontier_core::world::{generate_scene, CameraModel, PoseId, SceneParams, VoxelState};
use nalgebra::Vector3;
use proptest::prelude::*;
use rand::Rng;

fn random_store(seed: u64, n: usize) -> FrontierStore {
    let mut r = rng(seed);
    let mut s = FrontierStore::new();
    for _ in 0..n {
        let p = Vector3::new(r.gen_range(0.0..10.0), r.gen_range(0.0..10.0), r.gen_range(0.5..2.0));
        s.merge_or_insert(Frontier3D::new(p, Vector3::x(), r.gen_range(0.0..500.0), PoseId(0)), 0.0, 0.0);
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn search_costs_match_dijkstra(seed in any::<u64>(), nx in 3usize..14, ny in 3usize..14, nz in 1usize..4, p in 0.0f64..0.35, inf in 0usize..3) {
        let mut r = rng(seed);
        let map = random_maze(&mut r, [nx, ny, nz], p);
        let inflation = [0.0, 0.1, 0.15][inf];
        let tr = Traversability::new(&map, inflation);
        let free = brute_traversable(&map, inflation);
        for (i, &f) in free.iter().enumerate() {
            prop_assert_eq!(tr.is_free(i), f);
        }
        let cells: Vec<usize> = (0..map.len()).filter(|&i| free[i]).collect();
        prop_assume!(!cells.is_empty());
        let start = cells[r.gen_range(0..cells.len())];
        let want = brute_dijkstra(map.geometry(), &free, start);
        let got = dijkstra(&tr, start);
        for i in 0..map.len() {
            prop_assert!(got[i] == want[i] || (got[i] - want[i]).abs() <= 1e-9, "voxel {}: {} vs {}", i, got[i], want[i]);
        }
        let goal = cells[r.gen_range(0..cells.len())];
        let path = grid_search(&tr, start, &map.geometry().center_of_index(goal), 0.0);
        match path {
            Some(p) => prop_assert!((p.cost - want[goal]).abs() <= 1e-9),
            None => prop_assert!(want[goal].is_infinite()),
        }
    }

    #[test]
    fn goal_choice_is_scale_invariant(seed in any::<u64>(), n in 1usize..30, scale in 0.01f64..100.0, x in 0.0f64..10.0, y in 0.0f64..10.0) {
        let store = random_store(seed, n);
        let robot = Vector3::new(x, y, 1.0);
        let mut scaled = FrontierStore::new();
        for (_, f) in store.active() {
            scaled.merge_or_insert(Frontier3D::new(f.p_bar, f.q_bar, f.gain * scale, PoseId(0)), 0.0, 0.0);
        }
        prop_assert_eq!(select_goal(&scaled, &robot, 0.3, &BTreeSet::new()), select_goal(&store, &robot, 0.3, &BTreeSet::new()));
    }

    #[test]
    fn goal_is_active_and_not_skipped(seed in any::<u64>(), n in 1usize..30, kill in proptest::collection::vec(any::<bool>(), 30)) {
        let mut store = random_store(seed, n);
        let ids: Vec<u64> = store.active().map(|(id, _)| id).collect();
        let mut skip = BTreeSet::new();
        for (k, id) in ids.iter().enumerate() {
            if kill[k] {
                store.set_status(*id, if k % 2 == 0 { FrontierStatus::Invalid } else { FrontierStatus::Consumed });
            } else if k % 3 == 0 {
                skip.insert(*id);
            }
        }
        let robot = Vector3::new(5.0, 5.0, 1.0);
        match select_goal(&store, &robot, 0.3, &skip) {
            Some(id) => {
                prop_assert!(store.get(id).unwrap().is_active());
                prop_assert!(!skip.contains(&id));
            }
            None => prop_assert!(store.active().all(|(id, _)| skip.contains(&id))),
        }
    }
}

#[test]
fn entry_point_is_first_free_sample() {
    let mut r = rng(21);
    let scene = generate_scene(21, &SceneParams { extent: [6.0, 6.0, 2.5], ..Default::default() }).unwrap().grid;
    let n = 20;
    for _ in 0..200 {
        let parent = Vector3::new(r.gen_range(0.3..5.7), r.gen_range(0.3..5.7), r.gen_range(0.3..2.2));
        let p = Vector3::new(r.gen_range(0.3..5.7), r.gen_range(0.3..5.7), r.gen_range(0.3..2.2));
        let f = Frontier3D::new(p, Vector3::x(), 1.0, PoseId(0));
        let e = find_entry_point(&f, &parent, &scene, n);
        let free = |q: &Vector3<f64>| scene.state_at_point(q) == Some(VoxelState::Free);
        assert!(free(&e) || e == parent);
        // a dense walk from p̄ finds free space no later than the chosen sample
        let chosen = if e == parent && !free(&e) { 1.0 } else { (e - p).norm() / (parent - p).norm().max(1e-12) };
        let dense = (0..=2000).map(|k| k as f64 / 2000.0).find(|t| free(&(p + (parent - p) * *t)));
        if let Some(t) = dense {
            assert!(t <= chosen + 1e-9);
        }
        for k in 0..n {
            let t = k as f64 / n as f64;
            if t < chosen - 1e-9 {
                assert!(!free(&(p + (parent - p) * t)), "skipped free sample {k}");
            }
        }
    }
}

fn small_config(mode: PlannerMode, steps: usize) -> PlannerConfig {
    let mut c = PlannerConfig::for_mode(mode);
    c.max_steps = steps;
    scale_to_camera(&mut c.oracle, &mut c.anchor, 32);
    c.oracle.gain_width = 12;
    c.oracle.gain_height = 12;
    c.look_around_yaws = 4;
    c.look_around_pitches_deg = vec![0.0];
    c
}

#[test]
fn exploration_invariants_hold_in_every_mode() {
    let cam = CameraModel::default().with_resolution(32, 32);
    let sp = SceneParams { extent: [5.0, 5.0, 2.5], ..Default::default() };
    for mode in [PlannerMode::FrontierNet, PlannerMode::Classic, PlannerMode::MapFree] {
        let cfg = small_config(mode, 40);
        for seed in 0..3u64 {
            let scene = generate_scene(seed, &sp).unwrap().grid;
            let start = pick_starts(&scene, 1, 1.25, 0.4, seed)[0];
            let mut last = 0;
            let mut states = 0;
            let log = run_exploration_with(&scene, &start, &cam, &cfg, seed, |st| {
                states += 1;
                assert!(st.map.known_count() >= last);
                last = st.map.known_count();
                assert!(st.tree.is_chain());
                for (id, _) in st.store.active() {
                    assert!(st.tree.parent(id).is_some(), "frontier {id} has no parent pose");
                }
                for i in 0..st.map.len() {
                    let s = st.map.state(i);
                    assert!(s == VoxelState::Unknown || s == scene.state(i));
                }
            })
            .unwrap();
            assert!(states > 0);
            assert!(log.steps() <= 40);
            assert_eq!(log, run_exploration(&scene, &start, &cam, &cfg, seed).unwrap());
        }
    }
}
