mod common;

use polyexp::eigen4::{eig_homogeneous, frac_power, EigenOptions};
use polyexp::field::io::{decode, encode};
use polyexp::field::{edt_squared, warp, AnyField, Field, Grid3, Interp, ScalarField, VectorField};
use polyexp::linalg::{expm_pade_ss, logm_iss, ExpmConfig, Mat4};
use polyexp::polyrigid::{flow_many, normalize, weight, Component, FusionModel, WeightParams};
use polyexp::se3::{geodesic, trig_interp, RigidTransform};
use polyexp::synth::{joint_scene, random_rigid_non_screw};
use polyexp::Backend;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn eigen() -> Backend {
    Backend::Eigen(EigenOptions::default())
}

fn planar(seed: u64) -> Mat4 {
    random_planar_rigid(&mut ChaCha8Rng::seed_from_u64(seed), 2.9, 25.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_parameter_subgroup(seed in any::<u64>(), t1 in -1.0..1.0f64, t2 in -1.0..1.0f64) {
        let dec = eig_homogeneous(&planar(seed), &EigenOptions::default()).unwrap();
        let lhs = frac_power(&dec, t1 + t2).unwrap();
        let rhs = frac_power(&dec, t2).unwrap() * frac_power(&dec, t1).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-9);
    }

    #[test]
    fn inverse_consistency(seed in any::<u64>(), t in -1.0..1.0f64) {
        let dec = eig_homogeneous(&planar(seed), &EigenOptions::default()).unwrap();
        let prod = frac_power(&dec, -t).unwrap() * frac_power(&dec, t).unwrap();
        prop_assert!(max_diff(&prod, &Mat4::identity()) < 1e-9);
    }

    #[test]
    fn conjugate_pairs_and_reconstruction(seed in any::<u64>()) {
        let m = planar(seed);
        let dec = eig_homogeneous(&m, &EigenOptions::default()).unwrap();
        for l in dec.lambdas {
            prop_assert!(dec.lambdas.iter().any(|k| (k - l.conj()).norm() < 1e-9));
        }
        prop_assert!(max_diff(&dec.reconstruct().unwrap(), &m) < 1e-9);
    }

    #[test]
    fn exp_log_round_trip(seed in any::<u64>()) {
        let m = planar(seed);
        for b in [Backend::default(), eigen()] {
            let back = b.exp(&b.log(&m).unwrap()).unwrap();
            prop_assert!(max_diff(&back, &m) < 1e-9, "{}", b.name());
        }
    }

    #[test]
    fn geodesic_endpoints_and_backends(sa in any::<u64>(), sb in any::<u64>(), s in 0.0..1.0f64) {
        let ta = random_rigid_non_screw(sa, 60.0, 10.0);
        let tb = random_rigid_non_screw(sb, 60.0, 10.0);
        let a0 = geodesic(&ta, &tb, 0.0, &Backend::default()).unwrap();
        let a1 = geodesic(&ta, &tb, 1.0, &Backend::default()).unwrap();
        prop_assert!(max_diff(&a0.matrix(), &ta.matrix()) < 1e-10);
        prop_assert!(max_diff(&a1.matrix(), &tb.matrix()) < 1e-10);
        let rel = tb.matrix() * ta.inverse().matrix();
        if eig_homogeneous(&rel, &EigenOptions::default()).is_ok() {
            let x = geodesic(&ta, &tb, s, &Backend::default()).unwrap();
            let y = geodesic(&ta, &tb, s, &eigen()).unwrap();
            prop_assert!(max_diff(&x.matrix(), &y.matrix()) < 1e-9);
        }
    }

    #[test]
    fn trig_interp_single_axis(axis in 0usize..3, angle in -1.5..1.5f64, s in 0.0..1.0f64) {
        let mut e = [0.0; 3];
        e[axis] = 1.0;
        let t = RigidTransform::new(rigid(e, angle, [0.0; 3])).unwrap();
        let closed = trig_interp(&t, s).unwrap().matrix();
        let cfg = ExpmConfig::default();
        let exact = expm_pade_ss(&logm_iss(&t.matrix(), 1e-12).unwrap().scale(s), &cfg).unwrap();
        prop_assert!(max_diff(&closed, &exact) < 1e-10);
    }

    #[test]
    fn trig_interp_continuity(seed in any::<u64>(), s in 0.0..0.999f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let axis = random_axis(&mut rng);
        let d = [0; 3].map(|_| rng.gen_range(-10.0..10.0));
        let t = RigidTransform::new(rigid(axis, rng.gen_range(0.1..1.2), d)).unwrap();
        let alpha = polyexp::se3::to_euler(&t).unwrap().alpha;
        let dn = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let bound = 2.0 * alpha.iter().map(|a| a.abs()).sum::<f64>() + dn;
        let h = 1e-3;
        let jump = max_diff(&trig_interp(&t, s + h).unwrap().matrix(), &trig_interp(&t, s).unwrap().matrix());
        prop_assert!(jump <= bound * h + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn cross_backend_fractional_power(seed in any::<u64>(), k in 1usize..10) {
        let t = k as f64 / 10.0;
        let m = random_rigid_non_screw(seed, 170.0, 20.0).matrix();
        let dec = eig_homogeneous(&m, &EigenOptions::default()).unwrap();
        let sq = expm_pade_ss(&logm_iss(&m, 1e-12).unwrap().scale(t), &ExpmConfig::default()).unwrap();
        prop_assert!(max_diff(&frac_power(&dec, t).unwrap(), &sq) < 1e-8);
    }

    #[test]
    fn determinant_interpolation(scales in prop::array::uniform3(0.6..1.6f64), angle in 0.0..1.0f64, seed in any::<u64>(), t in 0.0..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = rotation(random_axis(&mut rng), angle);
        let a = [0, 1, 2].map(|i| [0, 1, 2].map(|j| r[i][j] * scales[j]));
        let m = Mat4::from_block(a, [1.0, -2.0, 0.5]);
        let dec = eig_homogeneous(&m, &EigenOptions::default()).unwrap();
        let p = frac_power(&dec, t).unwrap();
        prop_assert!((p.det() - m.det().powf(t)).abs() < 1e-8);
    }
}

fn two_blob_model(seed: u64, params: WeightParams) -> FusionModel {
    let grid = Grid3::new([9, 7, 6], [1.0, 1.5, 2.0], [0.0; 3]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let comps = (0..3)
        .map(|k| {
            let mask = random_mask(grid, seed.wrapping_add(k), 0.02);
            let t = random_planar_rigid(&mut rng, 1.0, 5.0);
            Component::from_mask(format!("c{k}"), t, &mask, params, &Backend::default()).unwrap()
        })
        .collect();
    normalize(FusionModel::new(comps).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn partition_of_unity(seed in any::<u64>(), decay in 0.01..50.0f64, alpha in 0.1..5.0f64, beta in 0.5..4.0f64) {
        for params in [WeightParams::Exponential { decay }, WeightParams::InverseDistance { alpha, beta }] {
            let model = two_blob_model(seed, params);
            for idx in 0..model.grid.len() {
                let s: f64 = model.weights.iter().map(|w| w[idx]).sum();
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flow_semigroup_and_inverse(seed in any::<u64>(), t1 in -0.5..0.5f64, t2 in -0.5..0.5f64) {
        let model = two_blob_model(seed, WeightParams::Exponential { decay: 0.5 });
        let f = flow_many(&model, &[t1, t2, t1 + t2, -t1], &eigen()).unwrap();
        for idx in 0..model.grid.len() {
            let [a, b, ab, inv] = [0, 1, 2, 3].map(|k| f.matrices[k].data[idx]);
            prop_assert!(max_diff(&ab, &(b * a)) < 1e-9);
            prop_assert!(max_diff(&(inv * a), &Mat4::identity()) < 1e-9);
        }
    }

    #[test]
    fn edt_matches_brute_force(seed in any::<u64>(), density in 0.001..0.5f64) {
        let mask = random_mask(Grid3::cube(16), seed, density);
        prop_assert_eq!(edt_squared(&mask).unwrap().data, brute_force_edt_squared(&mask).data);
    }

    #[test]
    fn warp_is_linear(seed in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let grid = Grid3::new([8, 7, 6], [1.0, 0.8, 1.3], [2.0, -1.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v1: ScalarField = Field::from_fn(grid, |_| rng.gen_range(-1.0..1.0));
        let v2: ScalarField = Field::from_fn(grid, |_| rng.gen_range(-1.0..1.0));
        let disp: VectorField = Field::from_fn(grid, |_| [0; 3].map(|_| rng.gen_range(-2.0..2.0)));
        let combo = Field::from_fn(grid, |i| a * v1.data[i] + b * v2.data[i]);
        let lhs = warp(&combo, &disp, Interp::Trilinear).unwrap();
        let w1 = warp(&v1, &disp, Interp::Trilinear).unwrap();
        let w2 = warp(&v2, &disp, Interp::Trilinear).unwrap();
        for i in 0..grid.len() {
            prop_assert!((lhs.data[i] - (a * w1.data[i] + b * w2.data[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn trilinear_reproduces_affine_functions(c in prop::array::uniform4(-2.0..2.0f64), u in prop::array::uniform3(-1.5..1.5f64)) {
        let grid = Grid3::cube(10);
        let f = |p: [f64; 3]| c[0] + c[1] * p[0] + c[2] * p[1] + c[3] * p[2];
        let v = Field::from_fn(grid, |i| f(grid.position(i)));
        let out = warp(&v, &Field::filled(grid, u), Interp::Trilinear).unwrap();
        for i in 0..grid.len() {
            let p = grid.position(i);
            let q = [p[0] + u[0], p[1] + u[1], p[2] + u[2]];
            if q.iter().all(|x| (0.0..=9.0).contains(x)) {
                prop_assert!((out.data[i] - f(q)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn field_encoding_round_trips(seed in any::<u64>(), dims in prop::array::uniform3(1usize..6)) {
        let grid = Grid3::new(dims, [0.5, 1.0, 2.5], [-1.0, 0.0, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fields: Vec<AnyField> = vec![
            Field::from_fn(grid, |_| rng.gen::<f64>()).into(),
            Field::from_fn(grid, |_| rng.gen_bool(0.5)).into(),
            Field::from_fn(grid, |_| [rng.gen::<f64>(), -1.0, 2.0]).into(),
            Field::from_fn(grid, |_| planar(rng.gen())).into(),
        ];
        for f in fields {
            prop_assert_eq!(decode(&encode(&f)).unwrap(), f);
        }
    }
}

#[test]
fn sharper_inverse_distance_weights_decay_faster() {
    for dist in [1.0, 1.5, 4.0, 30.0] {
        let w2 = weight(&WeightParams::InverseDistance { alpha: 0.5, beta: 2.0 }, dist).unwrap();
        let w1 = weight(&WeightParams::InverseDistance { alpha: 0.5, beta: 1.0 }, dist).unwrap();
        assert!(w2 <= w1);
    }
}

#[test]
fn flow_and_edt_are_thread_count_independent() {
    let scene = joint_scene(&Grid3::cube(12), 9);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let model = scene.model(&eigen()).unwrap();
            let f = flow_many(&model, &[0.5, -0.25], &eigen()).unwrap();
            let d = edt_squared(&scene.masks_at(0.0)[0]).unwrap();
            let w = polyexp::field::warp_matrices(&scene.render(0.0), &f.matrices[1], Interp::CubicBspline).unwrap();
            (f.matrices.into_iter().flat_map(|m| m.data).collect::<Vec<_>>(), d.data, w.data)
        })
    };
    let one = run(1);
    assert_eq!(run(4), one);
    assert_eq!(run(7), one);
}

#[test]
fn bones_move_rigidly_with_sharp_weights() {
    let grid = Grid3::cube(24);
    let scene = polyexp::synth::joint_scene_with(&grid, 5, WeightParams::Exponential { decay: 10.0 });
    let model = scene.model(&Backend::default()).unwrap();
    let f = flow_many(&model, &[1.0], &Backend::default()).unwrap();
    for (k, mask) in scene.masks_at(0.0).iter().enumerate() {
        let pose = scene.pose(k, 1.0);
        for idx in (0..grid.len()).filter(|&i| mask.data[i]) {
            let x = grid.position(idx);
            let a = f.matrices[0].data[idx].transform_point(x);
            let b = pose.transform_point(x);
            let dev = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
            assert!(dev < 0.5, "bone {k} voxel {idx}: {dev}");
        }
    }
}
