//! Identities and estimates evaluated on sampled fields: stress-energy
//! divergence, monotonicity, Modica, Pohozaev, Gui's Hamiltonian, decay fits,
//! flux balance and junction angles.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid, VectorField};
use crate::groups::RegionMap;
use crate::linalg::{dist, linear_fit, norm};
use crate::potentials::PotentialSpec;

fn check_dims(field: &VectorField, potential: &PotentialSpec) -> Result<()> {
    if field.value_dim() != potential.dim() {
        return Err(Error::DimensionMismatch {
            expected: potential.dim(),
            found: field.value_dim(),
        });
    }
    Ok(())
}

/// Centred-difference Jacobian at an interior node, row `k` holding `d u / d x_k`.
fn jacobian(field: &VectorField, idx: usize, out: &mut [f64]) {
    let g = field.grid();
    let m = field.value_dim();
    let inv = 0.5 / g.spacing();
    for k in 0..g.dim() {
        let s = g.stride(k);
        let (p, q) = (field.at(idx + s), field.at(idx - s));
        for c in 0..m {
            out[k * m + c] = (p[c] - q[c]) * inv;
        }
    }
}

fn grad_sq(jac: &[f64]) -> f64 {
    jac.iter().map(|x| x * x).sum()
}

/// `T_ij = u_,i . u_,j - delta_ij (1/2 |grad u|^2 + W)` at interior nodes
/// (zero on the outer face), stored as an `n^2`-valued field.
#[derive(Clone, Debug, PartialEq)]
pub struct StressEnergy {
    tensor: VectorField,
}

impl StressEnergy {
    pub fn grid(&self) -> &Grid {
        self.tensor.grid()
    }

    pub fn dim(&self) -> usize {
        self.tensor.grid().dim()
    }

    /// Row-major `n x n` tensor at a node.
    pub fn at(&self, idx: usize) -> &[f64] {
        self.tensor.at(idx)
    }

    pub fn as_field(&self) -> &VectorField {
        &self.tensor
    }

    /// Largest `|T_ij - T_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for idx in 0..self.grid().len() {
            let t = self.at(idx);
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((t[i * n + j] - t[j * n + i]).abs());
                }
            }
        }
        worst
    }
}

pub fn stress_energy(field: &VectorField, potential: &PotentialSpec) -> Result<StressEnergy> {
    check_dims(field, potential)?;
    let grid = *field.grid();
    let (n, m) = (grid.dim(), field.value_dim());
    let mut values = vec![0.0; grid.len() * n * n];
    let mut jac = vec![0.0; n * m];
    for idx in 0..grid.len() {
        if grid.is_boundary(idx) {
            continue;
        }
        jacobian(field, idx, &mut jac);
        let e = 0.5 * grad_sq(&jac) + potential.value(field.at(idx));
        let t = &mut values[idx * n * n..(idx + 1) * n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s: f64 = (0..m).map(|c| jac[i * m + c] * jac[j * m + c]).sum();
                if i == j {
                    s -= e;
                }
                t[i * n + j] = s;
            }
        }
    }
    Ok(StressEnergy {
        tensor: VectorField::new(grid, n * n, values)?,
    })
}

/// `sup |sum_j d_j T_ij|` over nodes at depth >= 2, by centred differences.
pub fn divergence_residual(t: &StressEnergy) -> f64 {
    let grid = t.grid();
    let n = t.dim();
    let inv = 0.5 / grid.spacing();
    let mut worst = 0.0f64;
    let mut div = vec![0.0; n];
    for idx in 0..grid.len() {
        if grid.depth(idx) < 2 {
            continue;
        }
        div.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            let s = grid.stride(j);
            let (p, q) = (t.at(idx + s), t.at(idx - s));
            for (i, d) in div.iter_mut().enumerate() {
                *d += (p[i * n + j] - q[i * n + j]) * inv;
            }
        }
        worst = worst.max(norm(&div));
    }
    worst
}

/// `sup |div T - (grad u)^T (Delta_h u - W_u)|` over nodes at depth >= 2.
pub fn divergence_identity_defect(field: &VectorField, potential: &PotentialSpec) -> Result<f64> {
    let t = stress_energy(field, potential)?;
    let grid = *field.grid();
    let (n, m) = (grid.dim(), field.value_dim());
    let inv = 0.5 / grid.spacing();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let mut jac = vec![0.0; n * m];
    let mut wu = vec![0.0; m];
    let mut worst = 0.0f64;
    for idx in 0..grid.len() {
        if grid.depth(idx) < 2 {
            continue;
        }
        jacobian(field, idx, &mut jac);
        potential.gradient(field.at(idx), &mut wu);
        let mut res = vec![0.0; m];
        for (c, r) in res.iter_mut().enumerate() {
            let mut lap = 0.0;
            for k in 0..n {
                let s = grid.stride(k);
                lap += field.at(idx + s)[c] + field.at(idx - s)[c] - 2.0 * field.at(idx)[c];
            }
            *r = lap * inv_h2 - wu[c];
        }
        let mut defect = 0.0;
        for i in 0..n {
            let mut d = 0.0;
            for j in 0..n {
                let s = grid.stride(j);
                d += (t.at(idx + s)[i * n + j] - t.at(idx - s)[i * n + j]) * inv;
            }
            let rhs: f64 = (0..m).map(|c| jac[i * m + c] * res[c]).sum();
            defect += (d - rhs).powi(2);
        }
        worst = worst.max(defect.sqrt());
    }
    Ok(worst)
}

/// Energy density `1/2 |grad u|^2 + W(u)` with centred gradients (interior only).
fn energy_density(field: &VectorField, potential: &PotentialSpec, idx: usize, jac: &mut [f64]) -> f64 {
    jacobian(field, idx, jac);
    0.5 * grad_sq(jac) + potential.value(field.at(idx))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotonicityPower {
    /// `E(R) / R^{n-2}`.
    Standard,
    /// `E(R) / R^{n-1}`, the stronger form valid for scalar fields.
    Strong,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityProfile {
    pub power: i32,
    pub radii: Vec<f64>,
    pub energies: Vec<f64>,
    pub normalized: Vec<f64>,
    /// Largest relative decrease `(q_i - q_{i+1}) / |q_i|` between consecutive radii.
    pub max_violation: f64,
}

impl MonotonicityProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("radius,energy,normalized\n");
        for i in 0..self.radii.len() {
            writeln!(s, "{:.16e},{:.16e},{:.16e}", self.radii[i], self.energies[i], self.normalized[i])
                .expect("writing to a String cannot fail");
        }
        s
    }
}

/// Ball energies `E(R) = sum_{|x - x0| <= R} e(x) h^n` normalised by `R^p`.
pub fn monotonicity_profile(
    field: &VectorField,
    potential: &PotentialSpec,
    x0: &[f64],
    radii: &[f64],
    power: MonotonicityPower,
) -> Result<MonotonicityProfile> {
    check_dims(field, potential)?;
    let grid = *field.grid();
    let n = grid.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x0.len(),
        });
    }
    let reach = grid.half_width() - grid.spacing() - x0.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    for &r in radii {
        if !(r > 0.0) || r > reach + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "radius {r} does not fit inside the box around {x0:?} (limit {reach})"
            )));
        }
    }
    let p = match power {
        MonotonicityPower::Standard => n as i32 - 2,
        MonotonicityPower::Strong => n as i32 - 1,
    };
    let cell = grid.spacing().powi(n as i32);
    let mut jac = vec![0.0; n * field.value_dim()];
    let rmax = radii.iter().copied().fold(0.0, f64::max);
    // (distance, density) for nodes in the largest ball, sorted by distance
    let mut shells: Vec<(f64, f64)> = Vec::new();
    for idx in 0..grid.len() {
        if grid.is_boundary(idx) {
            continue;
        }
        let r = dist(&grid.coords(idx), x0);
        if r <= rmax + 1e-12 {
            shells.push((r, energy_density(field, potential, idx, &mut jac) * cell));
        }
    }
    shells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
    let mut energies = vec![0.0; radii.len()];
    let mut acc = 0.0;
    let mut cursor = 0;
    for &i in &order {
        while cursor < shells.len() && shells[cursor].0 <= radii[i] + 1e-12 {
            acc += shells[cursor].1;
            cursor += 1;
        }
        energies[i] = acc;
    }
    let normalized: Vec<f64> = radii.iter().zip(&energies).map(|(r, e)| e / r.powi(p)).collect();
    let mut max_violation = 0.0f64;
    for w in order.windows(2) {
        let (a, b) = (normalized[w[0]], normalized[w[1]]);
        if a > b {
            max_violation = max_violation.max((a - b) / a.abs().max(1e-300));
        }
    }
    Ok(MonotonicityProfile {
        power: p,
        radii: radii.to_vec(),
        energies,
        normalized,
        max_violation,
    })
}

/// `max (1/2 |grad u|^2 - W(u))` over interior nodes; positive values violate
/// the pointwise gradient bound.
pub fn modica_deficit(field: &VectorField, potential: &PotentialSpec) -> Result<f64> {
    check_dims(field, potential)?;
    let grid = field.grid();
    let mut jac = vec![0.0; grid.dim() * field.value_dim()];
    let mut worst = f64::NEG_INFINITY;
    for idx in 0..grid.len() {
        if grid.is_boundary(idx) {
            continue;
        }
        jacobian(field, idx, &mut jac);
        worst = worst.max(0.5 * grad_sq(&jac) - potential.value(field.at(idx)));
    }
    Ok(worst)
}

/// `|(n-2)/2 int |grad u|^2 + n int W + 1/2 oint (x - x0).nu |grad u|^2|` over
/// the box, for fields equal to a single well on the boundary.
pub fn pohozaev_residual(field: &VectorField, potential: &PotentialSpec, x0: &[f64]) -> Result<f64> {
    check_dims(field, potential)?;
    let grid = *field.grid();
    let (n, m) = (grid.dim(), field.value_dim());
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x0.len(),
        });
    }
    let well = field.at(0).to_vec();
    for idx in (0..grid.len()).filter(|&i| grid.is_boundary(i)) {
        if dist(field.at(idx), &well) > 1e-8 {
            return Err(Error::Precondition("boundary values are not a single constant".into()));
        }
    }
    if potential.value(&well).abs() > 1e-8 {
        return Err(Error::Precondition(format!("boundary value {well:?} is not a well")));
    }
    let h = grid.spacing();
    let p = grid.points();
    let cell = h.powi(n as i32);
    let mut grad2 = 0.0;
    let mut pot = 0.0;
    for idx in 0..grid.len() {
        let mi = grid.multi_index(idx);
        let face = |k: usize| mi[k] == 0 || mi[k] == p - 1;
        let node_w: f64 = (0..n).map(|k| if face(k) { 0.5 } else { 1.0 }).product();
        pot += node_w * potential.value(field.at(idx)) * cell;
        for k in 0..n {
            if mi[k] + 1 == p {
                continue;
            }
            let edge_w: f64 = (0..n).filter(|&l| l != k).map(|l| if face(l) { 0.5 } else { 1.0 }).product();
            let d2: f64 = (0..m)
                .map(|c| (field.at(idx + grid.stride(k))[c] - field.at(idx)[c]).powi(2))
                .sum();
            grad2 += edge_w * d2 / (h * h) * cell;
        }
    }
    // boundary term: on each face only the normal derivative survives
    let mut surface = 0.0;
    let face_cell = h.powi(n as i32 - 1);
    for k in 0..n {
        for side in [0usize, p - 1] {
            let inward: i64 = if side == 0 { 1 } else { -1 };
            let normal_sign = -(inward as f64);
            for idx in 0..grid.len() {
                let mi = grid.multi_index(idx);
                if mi[k] != side {
                    continue;
                }
                let w: f64 = (0..n)
                    .filter(|&l| l != k)
                    .map(|l| if mi[l] == 0 || mi[l] == p - 1 { 0.5 } else { 1.0 })
                    .product();
                let s = grid.stride(k) as i64 * inward;
                let i1 = (idx as i64 + s) as usize;
                let i2 = (idx as i64 + 2 * s) as usize;
                let dn2: f64 = (0..m)
                    .map(|c| {
                        let d = (-3.0 * field.at(idx)[c] + 4.0 * field.at(i1)[c] - field.at(i2)[c]) / (2.0 * h);
                        d * d
                    })
                    .sum();
                let x = grid.coords(idx);
                let lever = (x[k] - x0[k]) * normal_sign;
                surface += w * lever * dn2 * face_cell;
            }
        }
    }
    Ok(((n as f64 - 2.0) / 2.0 * grad2 + n as f64 * pot + 0.5 * surface).abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianReport {
    /// Coordinates of the slices (the transverse coordinate).
    pub slices: Vec<f64>,
    pub integrals: Vec<f64>,
    pub mean: f64,
    /// Standard deviation of the line integrals divided by `|mean|`.
    pub relative_variance: f64,
    /// Every line ends within 0.05 of a declared well.
    pub decay_ok: bool,
}

impl HamiltonianReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("slice,integral\n");
        for (x, v) in self.slices.iter().zip(&self.integrals) {
            writeln!(s, "{x:.16e},{v:.16e}").expect("writing to a String cannot fail");
        }
        s
    }
}

/// Line integrals `int (1/2 (|u_a|^2 - |u_b|^2) - W) da` along the axis `a =
/// line_axis` for every grid slice with transverse coordinate in `[lo, hi]`
/// (n = 2 only).
pub fn hamiltonian_variance(
    field: &VectorField,
    potential: &PotentialSpec,
    line_axis: usize,
    lo: f64,
    hi: f64,
) -> Result<HamiltonianReport> {
    check_dims(field, potential)?;
    let grid = *field.grid();
    if grid.dim() != 2 || line_axis > 1 {
        return Err(Error::InvalidArgument("the Hamiltonian identity is evaluated for n = 2".into()));
    }
    let m = field.value_dim();
    let other = 1 - line_axis;
    let p = grid.points();
    let h = grid.spacing();
    let mut jac = vec![0.0; 2 * m];
    let mut slices = Vec::new();
    let mut integrals = Vec::new();
    let mut decay_ok = true;
    for t in 1..p - 1 {
        let y = grid.axis_coord(t);
        if y < lo - 1e-12 || y > hi + 1e-12 {
            continue;
        }
        let mut total = 0.0;
        for s in 1..p - 1 {
            let mut mi = [0usize; 3];
            mi[line_axis] = s;
            mi[other] = t;
            let idx = grid.flat_index(&mi);
            jacobian(field, idx, &mut jac);
            let along: f64 = (0..m).map(|c| jac[line_axis * m + c].powi(2)).sum();
            let across: f64 = (0..m).map(|c| jac[other * m + c].powi(2)).sum();
            total += (0.5 * (along - across) - potential.value(field.at(idx))) * h;
        }
        for s in [1, p - 2] {
            let mut mi = [0usize; 3];
            mi[line_axis] = s;
            mi[other] = t;
            let u = field.at(grid.flat_index(&mi));
            if potential.nearest_well(u).map_or(true, |(_, d)| d > 0.05) {
                decay_ok = false;
            }
        }
        slices.push(y);
        integrals.push(total);
    }
    if integrals.is_empty() {
        return Err(Error::InvalidArgument(format!("no grid slices in [{lo}, {hi}]")));
    }
    let k = integrals.len() as f64;
    let mean = integrals.iter().sum::<f64>() / k;
    let var = integrals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
    Ok(HamiltonianReport {
        slices,
        integrals,
        mean,
        relative_variance: var.sqrt() / mean.abs().max(1e-300),
        decay_ok,
    })
}

/// Least-squares fit `log e = log K - k d` over samples with `e` in a window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub amplitude: f64,
    pub rate: f64,
    pub samples: usize,
    /// Fewer than three samples in the window, or no spread in `d`.
    pub degenerate: bool,
}

/// Default fitting window `1e-10 <= e <= 1e-1`.
pub const DECAY_WINDOW: (f64, f64) = (1e-10, 1e-1);

pub fn fit_decay(samples: &[(f64, f64)], window: (f64, f64)) -> DecayFit {
    let lo = window.0.max(1e-14);
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .filter(|(_, e)| *e >= lo && *e <= window.1)
        .map(|&(d, e)| (d, e.ln()))
        .unzip();
    match (xs.len() >= 3).then(|| linear_fit(&xs, &ys)).flatten() {
        Some((b, slope)) => DecayFit {
            amplitude: b.exp(),
            rate: -slope,
            samples: xs.len(),
            degenerate: false,
        },
        None => DecayFit {
            amplitude: 0.0,
            rate: 0.0,
            samples: xs.len(),
            degenerate: true,
        },
    }
}

/// Fit of `|u(x) - a| ~ K exp(-k dist(x, boundary of gD))` along the ray
/// `x = t dir`, `t >= 0`, inside region `label` of the map.
pub fn decay_fit(
    field: &VectorField,
    map: &RegionMap,
    label: usize,
    direction: &[f64],
    window: (f64, f64),
) -> Result<DecayFit> {
    let grid = field.grid();
    let n = grid.dim();
    if direction.len() != n || map.group().dimension() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: direction.len(),
        });
    }
    let dn = norm(direction);
    if dn == 0.0 {
        return Err(Error::InvalidArgument("zero ray direction".into()));
    }
    let well = &map.wells()[label];
    let h = grid.spacing();
    let tmax = grid.half_width() - h;
    let steps = (tmax / (0.5 * h)).floor() as usize;
    let mut samples = Vec::new();
    let mut u = vec![0.0; field.value_dim()];
    for s in 1..=steps {
        let t = s as f64 * 0.5 * h;
        let x: Vec<f64> = direction.iter().map(|v| v / dn * t).collect();
        if !grid.contains(&x) || x.iter().any(|c| c.abs() > tmax) || map.region_of(&x).label != label {
            continue;
        }
        if !field.interpolate(&x, &mut u) {
            continue;
        }
        samples.push((map.distance_to_boundary(&x, label), dist(&u, well)));
    }
    Ok(fit_decay(&samples, window))
}

/// Stress-energy flux `oint T nu dS` through the sphere `|x - c| = r`.
pub fn flux_balance(
    field: &VectorField,
    potential: &PotentialSpec,
    centre: &[f64],
    radius: f64,
    samples: usize,
) -> Result<Vec<f64>> {
    let t = stress_energy(field, potential)?;
    flux_of(&t, centre, radius, samples)
}

/// [`flux_balance`] from a precomputed tensor.
pub fn flux_of(t: &StressEnergy, centre: &[f64], radius: f64, samples: usize) -> Result<Vec<f64>> {
    let grid = t.grid();
    let n = grid.dim();
    if centre.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: centre.len(),
        });
    }
    let limit = grid.half_width() - 2.0 * grid.spacing();
    if centre.iter().any(|c| c.abs() + radius > limit) || !(radius > 0.0) || samples < 8 {
        return Err(Error::InvalidArgument(format!(
            "sphere of radius {radius} about {centre:?} does not fit inside the computed stress region"
        )));
    }
    let mut tv = vec![0.0; n * n];
    let mut flux = vec![0.0; n];
    let mut add = |x: &[f64], nu: &[f64], w: f64| {
        let ok = t.as_field().interpolate(x, &mut tv);
        debug_assert!(ok);
        for i in 0..n {
            flux[i] += w * (0..n).map(|j| tv[i * n + j] * nu[j]).sum::<f64>();
        }
    };
    match n {
        2 => {
            let dth = 2.0 * PI / samples as f64;
            for s in 0..samples {
                let th = s as f64 * dth;
                let nu = [th.cos(), th.sin()];
                let x = [centre[0] + radius * nu[0], centre[1] + radius * nu[1]];
                add(&x, &nu, radius * dth);
            }
        }
        3 => {
            let nth = samples / 2;
            let dth = PI / nth as f64;
            let dph = 2.0 * PI / samples as f64;
            for a in 0..nth {
                let th = (a as f64 + 0.5) * dth;
                for b in 0..samples {
                    let ph = b as f64 * dph;
                    let nu = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                    let x = [
                        centre[0] + radius * nu[0],
                        centre[1] + radius * nu[1],
                        centre[2] + radius * nu[2],
                    ];
                    add(&x, &nu, radius * radius * th.sin() * dth * dph);
                }
            }
        }
        _ => return Err(Error::InvalidArgument("flux balance needs n = 2 or 3".into())),
    }
    Ok(flux)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JunctionAngles {
    pub centre: Vec<f64>,
    /// `(well index, angle in radians)` for every well seen on the circle.
    pub angles: Vec<(usize, f64)>,
    /// Several well-separated nodes compete for the junction location.
    pub ambiguous: bool,
}

/// Angles of the phases around the junction on the circle of radius `r0`
/// (n = 2), from nearest-well labels at 3600 equally spaced points.
pub fn junction_angles(field: &VectorField, wells: &[Vec<f64>], r0: f64) -> Result<JunctionAngles> {
    let grid = *field.grid();
    if grid.dim() != 2 {
        return Err(Error::InvalidArgument("junction angles are measured for n = 2".into()));
    }
    if wells.len() < 2 || wells.iter().any(|w| w.len() != field.value_dim()) {
        return Err(Error::InvalidArgument("need at least two wells of the field's dimension".into()));
    }
    let spread = |u: &[f64]| {
        let d: Vec<f64> = wells.iter().map(|w| dist(u, w)).collect();
        d.iter().copied().fold(f64::NEG_INFINITY, f64::max) - d.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let scores: Vec<f64> = (0..grid.len()).map(|i| spread(field.at(i))).collect();
    let best = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let near_best: Vec<usize> = (0..grid.len()).filter(|&i| scores[i] <= best + 1e-12).collect();
    let centre_idx = *near_best
        .iter()
        .min_by(|&&a, &&b| norm(&grid.coords(a)).total_cmp(&norm(&grid.coords(b))))
        .expect("grid is nonempty");
    let centre = grid.coords(centre_idx);
    let h = grid.spacing();
    let contenders = (0..grid.len()).filter(|&i| scores[i] <= best + 1e-3 * (1.0 + best));
    let ambiguous = contenders
        .map(|i| dist(&grid.coords(i), &centre))
        .fold(0.0, f64::max)
        > 3.0 * h;
    if centre.iter().any(|c| c.abs() + r0 > grid.half_width()) {
        return Err(Error::InvalidArgument(format!("circle of radius {r0} leaves the box")));
    }
    const SAMPLES: usize = 3600;
    let mut counts = vec![0usize; wells.len()];
    let mut u = vec![0.0; field.value_dim()];
    for s in 0..SAMPLES {
        let th = (s as f64 + 0.5) * 2.0 * PI / SAMPLES as f64;
        let x = [centre[0] + r0 * th.cos(), centre[1] + r0 * th.sin()];
        field.interpolate(&x, &mut u);
        let label = (0..wells.len())
            .min_by(|&a, &b| dist(&u, &wells[a]).total_cmp(&dist(&u, &wells[b])))
            .expect("wells are nonempty");
        counts[label] += 1;
    }
    let angles = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (i, 2.0 * PI * c as f64 / SAMPLES as f64))
        .collect();
    Ok(JunctionAngles {
        centre,
        angles,
        ambiguous,
    })
}

/// One named diagnostic value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub name: String,
    pub value: Vec<f64>,
    pub tolerance: Option<f64>,
    pub passed: Option<bool>,
    pub flag: Option<String>,
}

/// Append-only list of diagnostic entries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    entries: Vec<ReportEntry>,
}

impl DiagnosticsReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[ReportEntry] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Records a residual-type value checked against `value <= tolerance`.
    pub fn record(&mut self, name: &str, value: f64, tolerance: Option<f64>) {
        self.entries.push(ReportEntry {
            name: name.to_string(),
            value: vec![value],
            tolerance,
            passed: tolerance.map(|t| value <= t),
            flag: None,
        });
    }

    pub fn record_vector(&mut self, name: &str, value: Vec<f64>, tolerance: Option<f64>, passed: Option<bool>) {
        self.entries.push(ReportEntry {
            name: name.to_string(),
            value,
            tolerance,
            passed,
            flag: None,
        });
    }

    /// Records an entry that could not be evaluated or whose precondition failed.
    pub fn flag(&mut self, name: &str, reason: &str) {
        self.entries.push(ReportEntry {
            name: name.to_string(),
            value: Vec::new(),
            tolerance: None,
            passed: None,
            flag: Some(reason.to_string()),
        });
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
