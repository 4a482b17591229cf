//! Acceptance checks, one line per criterion. Runs as a plain binary so the
//! lines are printed on every run and the junction solve is shared.

use std::f64::consts::{PI, SQRT_2};
use std::time::{Duration, Instant};

use aclab::diagnostics::*;
use aclab::field::{Grid, VectorField};
use aclab::field_solver::*;
use aclab::groups::*;
use aclab::ode_connect::*;
use aclab::partitions::*;
use aclab::potentials::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Criterion {
    checks: Vec<(String, bool)>,
    start: Instant,
}

impl Criterion {
    fn new() -> Self {
        Self {
            checks: Vec::new(),
            start: Instant::now(),
        }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.checks.push((what.into(), ok));
    }

    fn finish(mut self, number: usize, title: &str, limit: Duration) -> bool {
        let elapsed = self.start.elapsed();
        self.check(format!("runtime {elapsed:.2?} <= {limit:?}"), elapsed <= limit);
        let pass = self.checks.iter().all(|c| c.1);
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
        let details: Vec<&str> = self.checks.iter().map(|c| c.0.as_str()).collect();
        println!(
            "criterion {number} {}: {title} | {}{}",
            if pass { "PASS" } else { "FAIL" },
            details.join("; "),
            if pass { String::new() } else { format!(" | failed: {}", failed.join("; ")) }
        );
        pass
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn double_well_profile(length: f64, intervals: usize) -> ConnectionProfile {
    solve_connection(&PotentialSpec::scalar_double_well(), &[-1.0], &[1.0], length, intervals, 1e-10)
        .expect("double-well connection")
}

fn lift(profile: &ConnectionProfile, grid: Grid) -> VectorField {
    VectorField::from_fn(grid, profile.value_dim(), |x| {
        let mut v = vec![0.0; profile.value_dim()];
        profile.sample(x[0], &mut v);
        v
    })
    .expect("finite profile")
}

fn criterion_1() -> bool {
    let mut c = Criterion::new();
    let w = PotentialSpec::scalar_double_well();
    let prof = double_well_profile(10.0, 2000);
    let sup = (0..=prof.intervals())
        .map(|j| (prof.at(j)[0] - (prof.eta(j) / SQRT_2).tanh()).abs())
        .fold(0.0, f64::max);
    c.check(format!("sup |U - tanh| = {sup:.2e} <= 1e-3"), sup <= 1e-3);
    let oracle = simpson(|u| (2.0 * w.value(&[u])).sqrt(), -1.0, 1.0, 20_000);
    let sigma = action(&prof);
    c.check(
        format!("sigma = {sigma:.6} vs quadrature {oracle:.6} (2 sqrt2/3 = {:.6})", 2.0 * SQRT_2 / 3.0),
        (sigma - oracle).abs() <= 1e-3 && (sigma - 2.0 * SQRT_2 / 3.0).abs() <= 1e-3,
    );
    let eq = equipartition_residual(&prof);
    let eq_fine = equipartition_residual(&double_well_profile(10.0, 4000));
    c.check(format!("equipartition {eq:.2e} <= 1e-4"), eq <= 1e-4);
    c.check(format!("equipartition ratio under h/2 = {:.2} >= 3", eq / eq_fine), eq / eq_fine >= 3.0);
    c.finish(1, "1D connection oracle", Duration::from_secs(10))
}

fn criterion_2() -> bool {
    let mut c = Criterion::new();
    let cube = ReflectionGroup::cubic();
    let placements: [(&[f64], usize); 6] = [
        (&[0.0, 0.0, 0.0], 1),
        (&[1.0, 0.0, 0.0], 6),
        (&[1.0, 1.0, 1.0], 8),
        (&[1.0, 1.0, 0.0], 12),
        (&[1.0, 1.0, 2.0], 24),
        (&[1.0, 2.0, 3.0], 48),
    ];
    let counts: Vec<usize> = placements.iter().map(|(p, _)| cube.orbit_count(p)).collect();
    c.check(
        format!("cubic |G| = {}, placements N = {counts:?}", cube.order()),
        cube.order() == 48 && placements.iter().zip(&counts).all(|((_, n), k)| n == k),
    );
    let tet = ReflectionGroup::tetrahedral();
    let a1 = tetrahedron_vertices()[0];
    let (order, stab, n) = (tet.order(), tet.stabilizer(&a1, 1e-9).order(), tet.orbit_count(&a1));
    c.check(
        format!("tetrahedral |G| = {order}, |G_a1| = {stab}, N = {n}"),
        order == 24 && stab == 6 && n == 4,
    );
    c.finish(2, "group and orbit exactness", Duration::from_secs(1))
}

fn criterion_3() -> bool {
    let mut c = Criterion::new();
    let w = PotentialSpec::tetra_quadruple_well();
    let a1 = [(2.0f64 / 3.0).sqrt(), 0.0, 1.0 / 3.0f64.sqrt()];
    let wa = w.value(&a1);
    c.check(format!("W(a1) = {wa:.1e}"), wa.abs() <= 1e-12);
    let r = verify_hypotheses(&w, &ReflectionGroup::tetrahedral(), 100, 1e-12, 20_240_101).unwrap();
    c.check(
        format!("invariance residual {:.1e} over 100 x 24", r.invariance_residual),
        r.invariance_residual <= 1e-10,
    );
    let lam = r.min_well_eigenvalue.unwrap_or(f64::NAN);
    c.check(format!("min well Hessian eigenvalue {lam:.4}"), lam > 0.0);
    c.finish(3, "tetrahedral potential", Duration::from_secs(1))
}

fn criterion_4(junction: &mut Option<VectorField>) -> bool {
    let mut c = Criterion::new();
    let w = PotentialSpec::triple_well_triangle();
    let g = ReflectionGroup::dihedral(3).unwrap();
    let wells = w.wells().to_vec();
    let map = RegionMap::new(&g, &wells[0]).unwrap();
    let prof = solve_connection(&w, &wells[0], &wells[1], 8.0, 1600, 1e-8).unwrap();
    let grid = Grid::new(2, 8.0, 161).unwrap();
    let u0 = initial_guess(&map, &prof, &grid).unwrap();
    let mut o = SolveOptions::for_grid(&grid);
    o.history_every = 0;
    let out = match minimize(&u0, &w, &g, &o) {
        Ok(out) => out,
        Err(e) => {
            c.check(format!("solver error: {e}"), false);
            return c.finish(4, "2D equivariant junction", Duration::from_secs(300));
        }
    };
    c.check(
        format!("residual {:.2e} <= 1e-3 after {} iterations", out.residual, out.iterations),
        out.residual <= 1e-3,
    );
    let u = out.field;
    // sector angles against Young's law with the computed surface tensions
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let sig: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| action(&solve_connection(&w, &wells[i], &wells[j], 6.0, 1200, 1e-8).unwrap()))
        .collect();
    let young = young_angles(sig[0], sig[1], sig[2]).unwrap();
    let ja = junction_angles(&u, &wells, 2.0).unwrap();
    let deg: Vec<f64> = ja.angles.iter().map(|a| a.1.to_degrees()).collect();
    let angles_ok = !ja.ambiguous
        && ja.angles.len() == 3
        && ja
            .angles
            .iter()
            .all(|&(i, a)| (a.to_degrees() - 120.0).abs() <= 3.0 && (a - young[i]).abs().to_degrees() <= 3.0);
    c.check(
        format!(
            "junction angles {:.2?} deg, Young {:.2?} deg",
            deg,
            young.iter().map(|t| t.to_degrees()).collect::<Vec<_>>()
        ),
        angles_ok,
    );
    let radii: Vec<f64> = (1..=10).map(|k| 0.7 * k as f64).collect();
    let mono = monotonicity_profile(&u, &w, &[0.0, 0.0], &radii, MonotonicityPower::Standard).unwrap();
    c.check(
        format!("monotonicity violation {:.1e} over 10 radii", mono.max_violation),
        mono.max_violation <= 1e-6,
    );
    let fit = decay_fit(&u, &map, map.region_of(&wells[0]).label, &wells[0], DECAY_WINDOW).unwrap();
    c.check(
        format!("decay along bisector k = {:.3} (K = {:.2}, {} samples)", fit.rate, fit.amplitude, fit.samples),
        !fit.degenerate && fit.rate > 0.0,
    );
    let ham = hamiltonian_variance(&u, &w, 0, -6.5, -3.0).unwrap();
    c.check(
        format!("Hamiltonian relative variance {:.1e} on x2 in [-6.5, -3]", ham.relative_variance),
        ham.decay_ok && ham.relative_variance <= 1e-3,
    );
    *junction = Some(u);
    c.finish(4, "2D equivariant junction", Duration::from_secs(300))
}

fn criterion_5(junction: Option<&VectorField>) -> bool {
    let mut c = Criterion::new();
    let w = PotentialSpec::scalar_double_well();
    let coarse = divergence_residual(&stress_energy(&lift(&double_well_profile(10.0, 200), Grid::new(2, 4.0, 81).unwrap()), &w).unwrap());
    let fine = divergence_residual(&stress_energy(&lift(&double_well_profile(10.0, 400), Grid::new(2, 4.0, 161).unwrap()), &w).unwrap());
    c.check(
        format!("slab divergence {coarse:.2e} -> {fine:.2e}, ratio {:.2} >= 3.5", coarse / fine),
        coarse / fine >= 3.5,
    );
    let slab = lift(&double_well_profile(10.0, 400), Grid::new(2, 4.0, 161).unwrap());
    let f1 = flux_balance(&slab, &w, &[0.0, 0.0], 1.5, 720).unwrap();
    let f2 = flux_balance(&slab, &w, &[0.0, 0.0], 3.0, 720).unwrap();
    let gap = f1.iter().zip(&f2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    c.check(format!("slab flux radii 1.5/3: gap {gap:.1e}"), gap <= 1e-3);
    if let Some(u) = junction {
        let t = PotentialSpec::triple_well_triangle();
        let j1 = flux_balance(u, &t, &[0.0, 0.0], 2.0, 720).unwrap();
        let j2 = flux_balance(u, &t, &[0.0, 0.0], 4.0, 720).unwrap();
        let gap = j1.iter().zip(&j2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        c.check(format!("junction flux radii 2/4: gap {gap:.1e}"), gap <= 1e-3);
    } else {
        c.check("junction field unavailable", false);
    }
    // scalar field solved by the Dirichlet solver at h = 0.005
    let grid = Grid::new(2, 2.0, 801).unwrap();
    let start = lift(&double_well_profile(10.0, 4000), grid);
    let mut o = SolveOptions::for_grid(&grid);
    o.residual_target = 1e-6;
    o.history_every = 0;
    match solve_dirichlet(&start, &w, &start, None, &o) {
        Ok(out) => {
            let m = modica_deficit(&out.field, &w).unwrap();
            c.check(
                format!("Modica deficit {m:.2e} <= 1e-6 (residual {:.1e})", out.residual),
                out.converged && m <= 1e-6,
            );
        }
        Err(e) => c.check(format!("Dirichlet solve failed: {e}"), false),
    }
    c.finish(5, "identity consistency", Duration::from_secs(300))
}

fn criterion_6() -> bool {
    let mut c = Criterion::new();
    let w = PotentialSpec::scalar_double_well();
    let prof = double_well_profile(8.0, 160);
    let grid = Grid::new(2, 8.0, 161).unwrap();
    let reference = lift(&prof, grid);
    let odd = GroupAction::odd_reflection(2, 0).unwrap();
    let mut o = SolveOptions::for_grid(&grid);
    o.history_every = 0;
    // (a) boundary U(x1), interior perturbed
    let r = grid.half_width();
    let start = VectorField::from_fn(grid, 1, |x| {
        let mut v = [0.0];
        prof.sample(x[0], &mut v);
        vec![v[0] + 0.3 * (PI * x[0] / r).sin() * (0.5 * PI * x[1] / r).cos()]
    })
    .unwrap();
    o.residual_target = 1e-7;
    match solve_dirichlet(&start, &w, &reference, Some(&odd), &o) {
        Ok(out) => {
            let err = out.field.max_distance(&reference);
            c.check(format!("boundary U(x1): sup |u - U| = {err:.1e} <= 1e-3"), err <= 1e-3);
        }
        Err(e) => c.check(format!("solve failed: {e}"), false),
    }
    // (b) sharp well data on the caps x2 = +-R
    let caps = VectorField::from_fn(grid, 1, |x| {
        let mut v = [0.0];
        prof.sample(x[0], &mut v);
        if (x[1].abs() - r).abs() < 1e-9 {
            vec![if x[0] > 0.0 { 1.0 } else if x[0] < 0.0 { -1.0 } else { 0.0 }]
        } else {
            vec![v[0]]
        }
    })
    .unwrap();
    o.residual_target = 1e-9;
    match solve_dirichlet(&reference, &w, &caps, Some(&odd), &o) {
        Ok(out) => {
            let h = grid.spacing();
            let levels = grid.points() / 2;
            let mut worst = vec![0.0f64; levels + 1];
            for idx in 0..grid.len() {
                let x = grid.coords(idx);
                let d = ((r - x[1].abs()) / h).round() as usize;
                worst[d.min(levels)] = worst[d.min(levels)].max((out.field.at(idx)[0] - reference.at(idx)[0]).abs());
            }
            let samples: Vec<(f64, f64)> = worst.iter().enumerate().skip(1).map(|(d, e)| (d as f64 * h, *e)).collect();
            let fit = fit_decay(&samples, DECAY_WINDOW);
            c.check(
                format!("perturbed caps: log-error slope {:.3} over {} levels", -fit.rate, fit.samples),
                !fit.degenerate && fit.rate > 0.0,
            );
        }
        Err(e) => c.check(format!("solve failed: {e}"), false),
    }
    c.finish(6, "Dirichlet hierarchy check", Duration::from_secs(60))
}

/// Exhaustive search over the nodes of a `cells x cells` grid on the
/// bounding box together with the three vertices.
fn brute_force(tri: &WeightedTriangle, cells: usize) -> ([f64; 2], [f64; 2]) {
    let v = [tri.a, tri.b, tri.c];
    let w = [tri.e12, tri.e13, tri.e23];
    let lo = [v.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min), v.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min)];
    let hi = [v.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max), v.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max)];
    let cell = [(hi[0] - lo[0]) / cells as f64, (hi[1] - lo[1]) / cells as f64];
    let objective = |x: f64, y: f64| -> f64 { (0..3).map(|k| w[k] * (x - v[k][0]).hypot(y - v[k][1])).sum() };
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for p in v {
        let f = objective(p[0], p[1]);
        if f < best.0 {
            best = (f, p);
        }
    }
    for i in 0..=cells {
        let x = lo[0] + i as f64 * cell[0];
        for j in 0..=cells {
            let y = lo[1] + j as f64 * cell[1];
            let f = objective(x, y);
            if f < best.0 {
                best = (f, [x, y]);
            }
        }
    }
    (best.1, cell)
}

fn criterion_7() -> bool {
    let mut c = Criterion::new();
    let h = 3f64.sqrt() / 2.0;
    let eq = WeightedTriangle { a: [0.0, 0.0], b: [1.0, 0.0], c: [0.5, h], e12: 1.0, e13: 1.0, e23: 1.0 };
    let s = steiner_point(&eq, 1e-12).unwrap();
    let centroid = [0.5, h / 3.0];
    let off = (s.point[0] - centroid[0]).hypot(s.point[1] - centroid[1]);
    c.check(
        format!("equilateral: |P - centroid| = {off:.1e}, residual {:.1e}", s.residual),
        off <= 1e-12 && s.residual <= 1e-12,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_cells = 0.0f64;
    let mut worst_gap = f64::NEG_INFINITY;
    let mut instances = 0;
    while instances < 20 {
        let p: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..1.0)).collect();
        let wts: Vec<f64> = (0..3).map(|_| rng.gen_range(0.5..1.5)).collect();
        let strict = wts[0] < wts[1] + wts[2] && wts[1] < wts[0] + wts[2] && wts[2] < wts[0] + wts[1];
        let tri = WeightedTriangle { a: [p[0], p[1]], b: [p[2], p[3]], c: [p[4], p[5]], e12: wts[0], e13: wts[1], e23: wts[2] };
        if !strict || tri.doubled_area().abs() < 0.05 {
            continue;
        }
        instances += 1;
        let got = steiner_point(&tri, 1e-10).unwrap();
        let (oracle, cell) = brute_force(&tri, 2000);
        let cells = ((got.point[0] - oracle[0]).abs() / cell[0]).max((got.point[1] - oracle[1]).abs() / cell[1]);
        worst_gap = worst_gap.max(tri.objective(got.point) - tri.objective(oracle));
        worst_cells = worst_cells.max(cells);
    }
    c.check(format!("20 random instances: worst offset {worst_cells:.2} cells <= 2"), worst_cells <= 2.0);
    c.check(format!("objective minus oracle objective {worst_gap:.1e} <= 1e-12"), worst_gap <= 1e-12);
    let t = 150f64.to_radians();
    let obtuse = WeightedTriangle { a: [0.0, 0.0], b: [1.0, 0.0], c: [t.cos(), t.sin()], e12: 1.0, e13: 1.0, e23: 1.0 };
    let s = steiner_point(&obtuse, 1e-12).unwrap();
    c.check(format!("150 deg instance captured at vertex {:?}", s.vertex), s.vertex == Some(0) && s.point == obtuse.a);
    let y = young_angles(1.0, 1.0, 1.0).unwrap();
    let dev = y.iter().map(|a| (a - 2.0 * PI / 3.0).abs()).fold(0.0, f64::max);
    c.check(format!("young_angles(1,1,1) deviation {dev:.1e}"), dev <= 1e-12);
    c.finish(7, "Steiner suite", Duration::from_secs(30))
}

fn criterion_8() -> bool {
    let mut c = Criterion::new();
    let tri = triod([0.0, 0.0]).unwrap();
    let ln = line([0.0, 0.0], 0.0).unwrap();
    let radii: Vec<f64> = (1..=10).map(|k| 0.3 * k as f64).collect();
    let dev_t = radii.iter().map(|&r| (density(&tri, [0.0, 0.0], r).unwrap() - 1.5).abs()).fold(0.0, f64::max);
    let dev_l = radii.iter().map(|&r| (density(&ln, [0.0, 0.0], r).unwrap() - 1.0).abs()).fold(0.0, f64::max);
    c.check(
        format!("densities at 10 radii: triod dev {dev_t:.1e}, line dev {dev_l:.1e}"),
        dev_t <= 4.0 * f64::EPSILON && dev_l <= 4.0 * f64::EPSILON,
    );
    let e = TensionMatrix::from_triple(1.0, 3.0, 1.0).unwrap();
    let r = e.metric_reduce();
    c.check(
        format!("metric_reduce e*_13 = {}", r.get(0, 2)),
        r.get(0, 2) == 2.0 && r.metric_reduce() == r,
    );
    let (s, radius) = (0.5, 1.0);
    let unit = TensionMatrix::uniform(3, 1.0).unwrap();
    let two = partition_energy(&double_junction(s).unwrap(), &unit, [0.0, 0.0], radius).unwrap();
    let comp = partition_energy(&reconnected_competitor(s, radius).unwrap(), &unit, [0.0, 0.0], radius).unwrap();
    let x = partition_energy(&x_cone().unwrap(), &unit, [0.0, 0.0], radius).unwrap();
    c.check(
        format!("windowed energy: two-junction {two:.4} > reconnected competitor {comp:.4} (X-cone {x:.4})"),
        two > comp,
    );
    let scales = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125];
    let seq = blow_down(&double_junction(s).unwrap(), [0.0, 0.0], &scales).unwrap();
    let xc = x_cone().unwrap();
    let d: Vec<f64> = seq.iter().map(|p| hausdorff_distance(p, &xc, [0.0, 0.0], 1.0, 1e-4)).collect();
    let rates: Vec<f64> = d.iter().zip(scales).map(|(d, mu)| d / (s * mu)).collect();
    c.check(
        format!("blow-down Hausdorff / (s mu) = {:.3?} <= 1", rates),
        rates.iter().all(|q| *q <= 1.0) && d.windows(2).all(|p| p[1] < p[0]),
    );
    c.finish(8, "partition calculus", Duration::from_secs(30))
}

fn main() {
    let mut junction = None;
    let results = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(&mut junction),
        criterion_5(junction.as_ref()),
        criterion_6(),
        criterion_7(),
        criterion_8(),
    ];
    let passed = results.iter().filter(|r| **r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
