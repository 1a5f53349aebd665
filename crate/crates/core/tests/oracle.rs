mod common;

use common::*;
use frontier_core::oracle::{
    bin_gain, bin_width, classify_view_volume, distance_field, extract_frontier_voxels, oracle_predict, squared_edt, unbin,
    voxel_info_gain, OracleParams, ViewVolume,
};
use frontier_core::planner::scale_to_camera;
use frontier_core::anchor::AnchorParams;
use frontier_core::world::{
    integrate_observation, render_depth, sealed_room, CameraModel, GridGeometry, Pose, VoxelGrid, VoxelState,
};
use nalgebra::Vector3;
use proptest::prelude::*;

fn cam() -> CameraModel {
    CameraModel::default().with_resolution(48, 48)
}

fn params() -> OracleParams {
    let mut o = OracleParams::default();
    scale_to_camera(&mut o, &mut AnchorParams::default(), 48);
    o.gain_width = 12;
    o.gain_height = 12;
    o
}

fn scene_and_pose(seed: u64) -> (VoxelGrid, Pose) {
    let mut r = rng(seed);
    loop {
        let scene = frontier_core::world::generate_scene(seed, &small_scene_params(&mut r)).unwrap().grid;
        if let Some(p) = random_pose(&mut r, &scene) {
            return (scene, p);
        }
    }
}

#[test]
fn sealed_room_has_no_frontier_pixels() {
    let room = sealed_room([3.0, 3.0, 2.5], 0.1).unwrap();
    for yaw in [0.0, 45.0, 170.0] {
        let pose = Pose::from_yaw_pitch_deg(Vector3::new(1.5, 1.5, 1.25), yaw, 0.0);
        let out = oracle_predict(&room, &pose, &cam(), &params(), 1).unwrap();
        assert_eq!(out.f.count_on(), 0);
    }
}

#[test]
fn full_view_has_no_frontier_voxels() {
    let g = GridGeometry::new([4, 4, 4], 0.1, Vector3::zeros()).unwrap();
    let scene = VoxelGrid::new(g, VoxelState::Free);
    let vv = ViewVolume::from_mask(g, vec![true; g.len()]);
    assert!(extract_frontier_voxels(&vv, &scene).is_empty());
}

#[test]
fn view_volume_matches_integration() {
    for seed in 0..5 {
        let (scene, pose) = scene_and_pose(seed);
        let c = cam();
        let vv = classify_view_volume(&scene, &pose, &c).unwrap();
        let mut map = scene.unknown_like();
        integrate_observation(&mut map, &pose, &c, &render_depth(&scene, &pose, &c).unwrap()).unwrap();
        for i in 0..scene.len() {
            assert_eq!(vv.is_in(i), map.state(i).is_known(), "voxel {i}");
        }
    }
}

#[test]
fn boxed_in_camera_sees_only_nearby_voxels() {
    let g = GridGeometry::new([41, 41, 41], 0.1, Vector3::zeros()).unwrap();
    let mut scene = VoxelGrid::new(g, VoxelState::Occupied);
    scene.fill_box([17, 17, 17], [22, 22, 22], VoxelState::Free);
    let pose = Pose::from_yaw_pitch_deg(Vector3::new(2.0, 2.0, 2.0), 20.0, 10.0);
    let vv = classify_view_volume(&scene, &pose, &cam()).unwrap();
    for i in (0..g.len()).filter(|&i| vv.is_in(i)) {
        assert!((g.center_of_index(i) - pose.position).amax() <= 0.3 + 0.1);
    }
}

#[test]
fn sampled_gains_are_exact() {
    let (scene, pose) = scene_and_pose(11);
    let p = params();
    let c = cam();
    let vv = classify_view_volume(&scene, &pose, &c).unwrap();
    let ft = extract_frontier_voxels(&vv, &scene);
    let gc = p.gain_camera(&c);
    let full = voxel_info_gain(&scene, &vv, &ft, &pose.position, &gc, 1.0, 3);
    let part = voxel_info_gain(&scene, &vv, &ft, &pose.position, &gc, 0.1, 3);
    let n = part.sampled.iter().filter(|s| **s).count();
    assert_eq!(n, (0.1 * ft.len() as f64).ceil() as usize);
    for k in (0..ft.len()).filter(|&k| part.sampled[k]) {
        assert_eq!(part.gains[k], full.gains[k]);
    }
}

#[test]
fn bin_boundaries() {
    assert_eq!(bin_gain(0.0, 11, 500.0), 0);
    assert_eq!(unbin(0, 11, 500.0), 0.0);
    assert_eq!(bin_gain(500.0, 11, 500.0), 10);
    assert_eq!(bin_gain(1e-9, 11, 500.0), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edt_matches_brute_force(w in 1usize..40, h in 1usize..40, seed in any::<u64>()) {
        let m = random_mask(&mut rng(seed), w, h);
        let sq = squared_edt(&m);
        let (d, dn) = distance_field(&m, 20.0);
        for (k, b) in brute_sq_edt(&m).into_iter().enumerate() {
            match b {
                Some(s) => {
                    prop_assert_eq!(sq.data()[k], s as f64);
                    prop_assert_eq!(d.data()[k], (s as f64).sqrt().min(20.0));
                }
                None => prop_assert_eq!(d.data()[k], 20.0),
            }
            let v = d.data()[k];
            if v < 20.0 {
                prop_assert_eq!(dn.data()[k], -(v.max(1.0) / 20.0).ln());
            }
            prop_assert_eq!(v == 0.0, *m.get(k % w, k / w));
        }
    }

    #[test]
    fn bins_cover_zero_to_g_max(g_max in 1.0f64..1e5, frac in 0.0f64..=1.0, k in 2usize..40) {
        let g = g_max * frac;
        let c = bin_gain(g, k, g_max);
        let u = unbin(c, k, g_max);
        prop_assert!((c as usize) < k);
        prop_assert_eq!(c == 0, g == 0.0);
        if g > 0.0 {
            prop_assert!(u <= g && g < u + bin_width(k, g_max) * (1.0 + 1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn raster_invariants_hold(seed in 0u64..500) {
        let (scene, pose) = scene_and_pose(seed);
        let (c, p) = (cam(), params());
        let out = oracle_predict(&scene, &pose, &c, &p, seed).unwrap();
        prop_assert_eq!(&out, &oracle_predict(&scene, &pose, &c, &p, seed).unwrap());
        let g = scene.geometry();
        let centres: Vec<Vector3<f64>> = out.frontier.voxels.iter().map(|&i| g.center_of_index(i)).collect();
        for (x, y, &on) in out.f.iter_pixels() {
            prop_assert_eq!(on, *out.f_p.get(x, y) && *out.f_d.get(x, y));
            prop_assert_eq!(on, *out.d.get(x, y) == 0.0);
            prop_assert_eq!(*out.y.get(x, y), bin_gain(*out.g.get(x, y), p.classes, out.g_max));
            // prior: some frontier centre within r_ray of the truncated ray
            let d = pose.to_world_dir(&c.pixel_ray(x, y));
            let near = centres.iter().map(|q| {
                let t = (q - pose.position).dot(&d).clamp(0.0, c.max_range);
                (q - (pose.position + d * t)).norm()
            }).fold(f64::INFINITY, f64::min);
            if (near - p.r_ray).abs() > 1e-9 {
                prop_assert_eq!(*out.f_p.get(x, y), near < p.r_ray, "pixel {},{}", x, y);
            }
            if near > p.r_ray + 1e-9 {
                prop_assert_eq!(*out.g.get(x, y), 0.0);
            }
        }
    }
}
