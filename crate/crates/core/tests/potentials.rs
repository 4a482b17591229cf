use aclab::groups::{tetrahedron_vertices, ReflectionGroup};
use aclab::potentials::*;
use proptest::prelude::*;

fn catalog() -> Vec<(PotentialSpec, ReflectionGroup)> {
    vec![
        (
            PotentialSpec::scalar_double_well(),
            ReflectionGroup::single_reflection("sign", &[1.0]).unwrap(),
        ),
        (PotentialSpec::triple_well_triangle(), ReflectionGroup::dihedral(3).unwrap()),
        (PotentialSpec::tetra_quadruple_well(), ReflectionGroup::tetrahedral()),
    ]
}

#[test]
fn declared_wells_are_nondegenerate_zeros() {
    for (w, g) in catalog() {
        let r = verify_hypotheses(&w, &g, 200, 1e-12, 7).unwrap();
        assert!(r.max_well_value < 1e-12, "{}", w.name());
        assert!(r.min_well_eigenvalue.unwrap() > 0.0);
        assert!(r.invariance_residual < 1e-10);
        assert!(r.min_sampled_value >= -1e-12);
        assert_eq!(r.wells_in_closed_region, Some(1), "{}", w.name());
    }
}

#[test]
fn newton_recovers_every_tetra_well() {
    let w = PotentialSpec::tetra_quadruple_well();
    let seeds: Vec<Vec<f64>> = tetrahedron_vertices().iter().map(|v| v.iter().map(|x| 0.9 * x).collect()).collect();
    let found = find_wells(&w, &seeds);
    assert_eq!(found.wells.len(), 4);
    for (a, b) in found.wells.iter().zip(tetrahedron_vertices()) {
        assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9));
    }
}

fn fd_gradient(w: &PotentialSpec, u: &[f64]) -> Vec<f64> {
    let h = 1e-5;
    (0..u.len())
        .map(|k| {
            let mut p = u.to_vec();
            let mut q = u.to_vec();
            p[k] += h;
            q[k] -= h;
            (w.value(&p) - w.value(&q)) / (2.0 * h)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn invariant_and_nonnegative(u in prop::collection::vec(-1.8f64..1.8, 3)) {
        for (w, g) in catalog() {
            let v = &u[..w.dim()];
            let base = w.value(v);
            prop_assert!(base >= -1e-12);
            for i in 0..g.order() {
                let gv = g.apply(i, v);
                prop_assert!((w.value(&gv) - base).abs() <= 1e-10 * (1.0 + base.abs()));
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences(u in prop::collection::vec(-1.5f64..1.5, 3)) {
        for (w, _) in catalog() {
            let v = &u[..w.dim()];
            let mut g = vec![0.0; w.dim()];
            w.gradient(v, &mut g);
            for (a, b) in g.iter().zip(fd_gradient(&w, v)) {
                prop_assert!((a - b).abs() <= 1e-5 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }
}
