mod common;

use std::collections::BTreeSet;

use common::*;
use frontier_core::anchor::{anchor_frame, cluster_frontier_pixels, recover_mask, AnchorParams, ClusterParams, FrontierPixelFeature};
use frontier_core::oracle::{distance_field, FrontierPredictor, OracleParams, OraclePredictor, PredictionInput};
use frontier_core::planner::scale_to_camera;
use frontier_core::world::{generate_doorway_scene, generate_scene, render_depth, CameraModel, PoseId};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn setup() -> (CameraModel, OraclePredictor, AnchorParams) {
    let (mut o, mut a) = (OracleParams::default(), AnchorParams::default());
    scale_to_camera(&mut o, &mut a, 64);
    o.gain_width = 16;
    o.gain_height = 16;
    (CameraModel::default().with_resolution(64, 64), OraclePredictor::new(o), a)
}

fn random_features(seed: u64) -> Vec<FrontierPixelFeature> {
    let mut r = rng(seed);
    let mut pixels = BTreeSet::new();
    while pixels.len() < 120 {
        pixels.insert((r.gen_range(0..40usize), r.gen_range(0..40usize)));
    }
    pixels
        .into_iter()
        .map(|(x, y)| {
            let fg = r.gen_range(0.5..3.0);
            FrontierPixelFeature {
                x,
                y,
                phi: r.gen_range(-3.1..3.1),
                gain: r.gen_range(0.0..400.0),
                depth_fg: fg,
                depth_bg: fg + r.gen_range(0.0..1.0),
                range: fg + 1.0,
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recover_inverts_distance_field(w in 1usize..48, h in 1usize..48, seed in any::<u64>()) {
        let m = random_mask(&mut rng(seed), w, h);
        prop_assert_eq!(recover_mask(&distance_field(&m, 20.0).0, 1.0), m);
    }

    #[test]
    fn clustering_ignores_input_order(seed in any::<u64>()) {
        let f = random_features(seed);
        let p = ClusterParams { sigma_px: 3.0, sigma_phi: 1.0, sigma_g: 300.0, eps: 1.0, min_cluster_size: 3 };
        let key = |v: &[FrontierPixelFeature]| -> Vec<((usize, usize), usize)> {
            cluster_frontier_pixels(v, &p).iter().map(|c| (c.centroid_px, c.size)).collect()
        };
        let base = key(&f);
        let mut shuffled = f.clone();
        shuffled.shuffle(&mut rng(seed ^ 1));
        prop_assert_eq!(key(&shuffled), base.clone());
        prop_assert_eq!(key(&f), base);
    }
}

#[test]
fn lifted_frontiers_are_consistent() {
    let (cam, pred, a) = setup();
    let mut lifted = 0;
    for seed in 0..30u64 {
        let (scene, pose) = if seed % 2 == 0 {
            let s = generate_doorway_scene(seed, 0.1).unwrap();
            (s.grid, s.pose)
        } else {
            let mut r = rng(seed);
            let scene = generate_scene(seed, &small_scene_params(&mut r)).unwrap().grid;
            match random_pose(&mut r, &scene) {
                Some(p) => (scene, p),
                None => continue,
            }
        };
        let depth = render_depth(&scene, &pose, &cam).unwrap();
        let input = PredictionInput { scene: &scene, pose: &pose, camera: &cam, depth: &depth, seed };
        let pr = pred.predict(&input).unwrap();
        let out = anchor_frame(&pr, &depth, &pose, &cam, PoseId(3), &a);
        assert_eq!(out, anchor_frame(&pr, &depth, &pose, &cam, PoseId(3), &a));
        let mask = out.mask.unwrap();
        assert_eq!(out.clusters.len(), out.frontiers.len());
        for (c, f) in out.clusters.iter().zip(&out.frontiers) {
            lifted += 1;
            assert!(c.depth_fg <= c.depth_bar + 1e-12 && c.depth_bar <= c.depth_bg + 1e-12, "{c:?}");
            assert_eq!(f.parent_pose_id, PoseId(3));
            assert!((f.q_bar.norm() - 1.0).abs() < 1e-9);
            let (u, v) = cam.project(&pose.to_camera(&f.p_bar)).unwrap();
            let near = mask
                .iter_pixels()
                .filter(|p| *p.2)
                .map(|(x, y, _)| (x as f64 + 0.5 - u).hypot(y as f64 + 0.5 - v))
                .fold(f64::INFINITY, f64::min);
            assert!(near <= a.l + a.sigma_px, "reprojection {near} px from the mask");
        }
    }
    assert!(lifted > 0);
}
