use aclab::field::{Grid, VectorField};
use aclab::groups::*;
use aclab::linalg::dist;
use proptest::prelude::*;

fn mul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut c = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            c[i * d + j] = (0..d).map(|k| a[i * d + k] * b[k * d + j]).sum();
        }
    }
    c
}

fn groups() -> Vec<ReflectionGroup> {
    vec![
        ReflectionGroup::dihedral(3).unwrap(),
        ReflectionGroup::dihedral(4).unwrap(),
        ReflectionGroup::dihedral(6).unwrap(),
        ReflectionGroup::tetrahedral(),
        ReflectionGroup::cubic(),
    ]
}

#[test]
fn elements_are_orthogonal_and_closed() {
    for g in groups() {
        let d = g.dimension();
        for a in g.elements() {
            let mut at = vec![0.0; d * d];
            for i in 0..d {
                for j in 0..d {
                    at[i * d + j] = a[j * d + i];
                }
            }
            let id = mul(a, &at, d);
            for i in 0..d {
                for j in 0..d {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((id[i * d + j] - e).abs() < 1e-12);
                }
            }
            for b in g.elements() {
                assert!(g.find(&mul(a, b, d)).is_some(), "{} is not closed", g.name());
            }
        }
    }
}

#[test]
fn by_name_matches_constructors() {
    assert_eq!(ReflectionGroup::by_name("dihedral-5").unwrap().order(), 10);
    assert_eq!(ReflectionGroup::by_name("cubic").unwrap().order(), 48);
    assert_eq!(ReflectionGroup::by_name("tetrahedral").unwrap().order(), 24);
    assert!(ReflectionGroup::by_name("icosahedral").is_err());
}

fn point3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn orbit_stabilizer(p in point3(), snap in 0usize..4) {
        // snapping coordinates onto mirrors exercises the nontrivial stabilizers
        let mut q = p.clone();
        if snap >= 1 { q[1] = q[0]; }
        if snap >= 2 { q[2] = 0.0; }
        if snap >= 3 { q[0] = 0.0; q[1] = 0.0; }
        for g in [ReflectionGroup::cubic(), ReflectionGroup::tetrahedral()] {
            let stab = g.stabilizer(&q, 1e-9);
            prop_assert_eq!(stab.order() * g.orbit_count(&q), g.order());
        }
    }

    #[test]
    fn region_label_is_nearest_orbit_point(x in point3()) {
        let g = ReflectionGroup::tetrahedral();
        let a1 = tetrahedron_vertices()[0];
        let map = RegionMap::new(&g, &a1).unwrap();
        let label = map.region_of(&x).label;
        let best = g.orbit(&a1).into_iter().map(|w| dist(&w, &x)).fold(f64::INFINITY, f64::min);
        prop_assert!((dist(&map.wells()[label], &x) - best).abs() < 1e-9);
    }

    #[test]
    fn dihedral_four_symmetrization_is_exact_projection(c in prop::collection::vec(-1.0f64..1.0, 6)) {
        // the square grid is invariant under dihedral-4 and nodes map to nodes
        let g = ReflectionGroup::dihedral(4).unwrap();
        let grid = Grid::new(2, 1.0, 11).unwrap();
        let u = VectorField::from_fn(grid, 2, |x| vec![
            c[0] + c[1] * x[0] + c[2] * x[1] * x[1],
            c[3] + c[4] * x[0] * x[1] + c[5] * x[1],
        ]).unwrap();
        let s = symmetrize(&u, &g).unwrap();
        prop_assert!(equivariance_residual(&s, &g).unwrap() < 1e-12);
        let t = symmetrize(&s, &g).unwrap();
        prop_assert!(s.max_distance(&t) < 1e-12);
    }
}
