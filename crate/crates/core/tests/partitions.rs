use aclab::field::{Grid, VectorField};
use aclab::partitions::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn triangle() -> impl Strategy<Value = WeightedTriangle> {
    (prop::collection::vec(-1.0f64..1.0, 6), prop::collection::vec(0.3f64..1.5, 3))
        .prop_filter("noncollinear", |(v, _)| {
            ((v[2] - v[0]) * (v[5] - v[1]) - (v[3] - v[1]) * (v[4] - v[0])).abs() > 1e-2
        })
        .prop_map(|(v, w)| WeightedTriangle {
            a: [v[0], v[1]],
            b: [v[2], v[3]],
            c: [v[4], v[5]],
            e12: w[0],
            e13: w[1],
            e23: w[2],
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steiner_point_beats_random_probes(tri in triangle(), seed in any::<u64>()) {
        let s = steiner_point(&tri, 1e-10).unwrap();
        prop_assert!(s.converged);
        let best = tri.objective(s.point);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..1000 {
            let p = [rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2)];
            prop_assert!(best <= tri.objective(p) + 1e-12);
        }
    }

    #[test]
    fn young_angles_close_the_circle(w in prop::collection::vec(0.2f64..2.0, 3)) {
        let (e12, e13, e23) = (w[0], w[1], w[2]);
        let strict = e12 < e13 + e23 && e13 < e12 + e23 && e23 < e12 + e13;
        match young_angles(e12, e13, e23) {
            Ok(t) => {
                prop_assert!(strict);
                prop_assert!((t.iter().sum::<f64>() - 2.0 * PI).abs() <= 1e-12);
                // force balance: the unit normals weighted by tensions sum to zero
                let (n12, n13) = (0.0f64, t[0]);
                let n23 = t[0] + t[2];
                let fx = e12 * n12.cos() + e13 * n13.cos() + e23 * n23.cos();
                let fy = e12 * n12.sin() + e13 * n13.sin() + e23 * n23.sin();
                prop_assert!(fx.hypot(fy) <= 1e-12 * (e12 + e13 + e23));
            }
            Err(_) => prop_assert!(!strict),
        }
    }

    #[test]
    fn metric_reduce_is_dominated_and_idempotent(n in 2usize..6, w in prop::collection::vec(0.1f64..5.0, 15)) {
        let mut e = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                e[i * n + j] = w[k];
                e[j * n + i] = w[k];
                k += 1;
            }
        }
        let t = TensionMatrix::new(n, e).unwrap();
        let r = t.metric_reduce();
        prop_assert!(r.is_metric());
        prop_assert_eq!(r.metric_reduce(), r.clone());
        for i in 0..n {
            for j in 0..n {
                prop_assert!(r.get(i, j) <= t.get(i, j));
            }
        }
    }

    #[test]
    fn cone_density_is_scale_free(angles in prop::collection::vec(0.0f64..2.0 * PI, 3..6), r in 0.01f64..10.0) {
        let mut a = angles.clone();
        a.sort_by(f64::total_cmp);
        a.dedup_by(|x, y| (*x - *y).abs() < 1e-3);
        prop_assume!(a.len() >= 3 && 2.0 * PI - (a[a.len() - 1] - a[0]) > 1e-3);
        let labels: Vec<usize> = (0..a.len()).collect();
        let cone = cone_from_sectors([0.3, -0.2], &a, &labels).unwrap();
        let expected = a.len() as f64 / 2.0;
        prop_assert!((density(&cone, [0.3, -0.2], r).unwrap() - expected).abs() <= 1e-14 * expected);
    }
}

#[test]
fn chain_reduction_sums_the_chain() {
    let mut e = vec![0.0; 16];
    let set = |e: &mut Vec<f64>, i: usize, j: usize, v: f64| {
        e[i * 4 + j] = v;
        e[j * 4 + i] = v;
    };
    set(&mut e, 0, 1, 1.0);
    set(&mut e, 1, 2, 2.0);
    set(&mut e, 2, 3, 0.5);
    set(&mut e, 0, 2, 10.0);
    set(&mut e, 1, 3, 10.0);
    set(&mut e, 0, 3, 10.0);
    let r = TensionMatrix::new(4, e).unwrap().metric_reduce();
    assert_eq!(r.get(0, 3), 3.5);
    assert_eq!(r.get(0, 2), 3.0);
}

#[test]
fn double_junction_density_grows_from_its_junction() {
    let p = double_junction(1.0).unwrap();
    let radii: Vec<f64> = (1..=10).map(|k| 0.25 * k as f64).collect();
    let theta: Vec<f64> = radii.iter().map(|&r| density(&p, [0.5, 0.0], r).unwrap()).collect();
    assert!((theta[0] - 1.5).abs() < 1e-14);
    assert!(theta.windows(2).all(|w| w[1] >= w[0]));
    assert!(*theta.last().unwrap() <= 2.0);
}

#[test]
fn two_junction_blow_down_approaches_the_x_cone() {
    let s = 0.8;
    let p = double_junction(s).unwrap();
    let x = x_cone().unwrap();
    let scales = [1.0, 0.5, 0.25, 0.125, 0.0625];
    let seq = blow_down(&p, [0.0, 0.0], &scales).unwrap();
    let d: Vec<f64> = seq.iter().map(|q| hausdorff_distance(q, &x, [0.0, 0.0], 1.0, 1e-4)).collect();
    for (dk, mu) in d.iter().zip(scales) {
        assert!(*dk <= s * mu, "{dk} > {}", s * mu);
        // the parallel rays are offset by (s mu / 2) sin 60; clipping adds a little at mu = 1
        assert!((dk / (s * mu) - 0.5 * (PI / 3.0).sin()).abs() < 0.02);
    }
    assert!(d.windows(2).all(|w| w[1] < w[0]));
    let tri = triod([0.0, 0.0]).unwrap();
    for q in blow_down(&tri, [0.0, 0.0], &scales).unwrap() {
        assert!(hausdorff_distance(&q, &tri, [0.0, 0.0], 1.0, 1e-3) < 1e-12);
    }
    assert!(blow_down(&p, [0.0, 0.0], &[0.5, 1.0]).is_err());
}

#[test]
fn labelled_slab_field_has_line_mass() {
    let grid = Grid::new(2, 2.0, 81).unwrap();
    let u = VectorField::from_fn(grid, 1, |x| vec![((x[0] - 0.3 * x[1] - 0.01) / 2f64.sqrt()).tanh()]).unwrap();
    let part = from_labeled_field(&u, &[vec![-1.0], vec![1.0]]).unwrap();
    let r = 1.5;
    let exact = 2.0 * r;
    assert!((part.mass_in_disk([0.0, 0.0], r) - exact).abs() < 2.0 * grid.spacing());
}

#[test]
fn labelled_sector_field_has_triod_density() {
    let grid = Grid::new(2, 2.0, 81).unwrap();
    let wells: Vec<Vec<f64>> = (0..3).map(|k| {
        let t = 2.0 * PI * k as f64 / 3.0;
        vec![t.cos(), t.sin()]
    }).collect();
    let u = VectorField::from_fn(grid, 2, |x| {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt().max(1e-12);
        vec![x[0] / r, x[1] / r]
    })
    .unwrap();
    let part = from_labeled_field(&u, &wells).unwrap();
    let theta = density(&part, [0.0, 0.0], 1.5).unwrap();
    assert!((theta - 1.5).abs() < 0.05, "{theta}");
}

#[test]
fn partition_json_rejects_bad_labels() {
    let text = r#"{"phases": 2, "interfaces": [{"phase_i": 0, "phase_j": 2,
        "piece": {"kind": "segment", "endpoints": [[0, 0], [1, 0]]}}]}"#;
    assert!(PolygonalPartition::from_json(text).is_err());
    let ok = r#"{"phases": 2, "interfaces": [{"phase_i": 0, "phase_j": 1,
        "piece": {"kind": "ray", "origin": [0, 0], "direction": [1, 1]}}]}"#;
    let p = PolygonalPartition::from_json(ok).unwrap();
    assert!((p.mass_in_disk([0.0, 0.0], 2.0) - 2.0).abs() < 1e-15);
}
