//! Gradient-flow minimisation of the discrete free energy on box grids.
//!
//! The discrete energy uses forward differences on grid edges and trapezoid
//! weights on nodes, so that its gradient at an interior node is exactly
//! `h^n (-Delta_h u + W_u(u))` with the standard `2n + 1` point Laplacian.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid, VectorField};
use crate::groups::{
    equivariance_residual_action, symmetrize_action, FundamentalRegion, GroupAction, ReflectionGroup, RegionMap,
};
use crate::linalg::{dist, mat_vec, norm};
use crate::ode_connect::ConnectionProfile;
use crate::potentials::PotentialSpec;

/// Compensated (Neumaier) summation.
#[derive(Default, Clone, Copy)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn total(self) -> f64 {
        self.s + self.c
    }
}

/// Walks the flat indices of a grid while tracking the multi-index.
struct Walker {
    points: usize,
    dim: usize,
    mi: [usize; 3],
}

impl Walker {
    fn new(grid: &Grid) -> Self {
        Self {
            points: grid.points(),
            dim: grid.dim(),
            mi: [0; 3],
        }
    }

    fn advance(&mut self) {
        for k in 0..self.dim {
            self.mi[k] += 1;
            if self.mi[k] < self.points {
                return;
            }
            self.mi[k] = 0;
        }
    }

    fn on_face(&self, k: usize) -> bool {
        self.mi[k] == 0 || self.mi[k] == self.points - 1
    }

    fn interior(&self) -> bool {
        (0..self.dim).all(|k| !self.on_face(k))
    }
}

fn check_dims(field: &VectorField, potential: &PotentialSpec) -> Result<()> {
    if field.value_dim() != potential.dim() {
        return Err(Error::DimensionMismatch {
            expected: potential.dim(),
            found: field.value_dim(),
        });
    }
    Ok(())
}

fn energy_of(grid: &Grid, m: usize, u: &[f64], potential: &PotentialSpec) -> f64 {
    let n = grid.dim();
    let h = grid.spacing();
    let cell = h.powi(n as i32);
    let mut w = Walker::new(grid);
    let mut total = Sum::default();
    for idx in 0..grid.len() {
        let mut node_weight = 1.0;
        for k in 0..n {
            if w.on_face(k) {
                node_weight *= 0.5;
            }
        }
        let x = &u[idx * m..(idx + 1) * m];
        let mut e = node_weight * potential.value(x);
        for k in 0..n {
            if w.mi[k] + 1 == w.points {
                continue;
            }
            let mut edge_weight = 1.0;
            for l in 0..n {
                if l != k && w.on_face(l) {
                    edge_weight *= 0.5;
                }
            }
            let nb = idx + grid.stride(k);
            let d2: f64 = (0..m).map(|c| (u[nb * m + c] - x[c]).powi(2)).sum();
            e += edge_weight * 0.5 * d2 / (h * h);
        }
        total.add(e * cell);
        w.advance();
    }
    total.total()
}

/// Discrete `J(u) = int 1/2 |grad u|^2 + W(u)` over the box.
pub fn energy(field: &VectorField, potential: &PotentialSpec) -> Result<f64> {
    check_dims(field, potential)?;
    Ok(energy_of(field.grid(), field.value_dim(), field.values(), potential))
}

/// Writes `Delta_h u - W_u(u)` at interior nodes (zero on the boundary) and
/// returns the largest Euclidean norm.
fn force(grid: &Grid, m: usize, u: &[f64], potential: &PotentialSpec, out: &mut [f64]) -> f64 {
    let n = grid.dim();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let strides: Vec<usize> = (0..n).map(|k| grid.stride(k)).collect();
    let mut wu = vec![0.0; m];
    let mut w = Walker::new(grid);
    let mut worst = 0.0f64;
    for idx in 0..grid.len() {
        let o = &mut out[idx * m..(idx + 1) * m];
        if !w.interior() {
            o.iter_mut().for_each(|v| *v = 0.0);
            w.advance();
            continue;
        }
        potential.gradient(&u[idx * m..(idx + 1) * m], &mut wu);
        let mut sq = 0.0;
        for c in 0..m {
            let centre = u[idx * m + c];
            let mut lap = 0.0;
            for &s in &strides {
                lap += u[(idx + s) * m + c] + u[(idx - s) * m + c] - 2.0 * centre;
            }
            let f = lap * inv_h2 - wu[c];
            o[c] = f;
            sq += f * f;
        }
        worst = worst.max(sq.sqrt());
        w.advance();
    }
    worst
}

/// `sup |Delta_h u - W_u(u)|` over interior nodes.
pub fn pde_residual(field: &VectorField, potential: &PotentialSpec) -> Result<f64> {
    check_dims(field, potential)?;
    let mut out = vec![0.0; field.values().len()];
    Ok(force(field.grid(), field.value_dim(), field.values(), potential, &mut out))
}

/// Interface-mollified well map: in region `gD` the value is `k U(s)`, where
/// `s` is the signed distance to the nearest competing region's wall and `k`
/// maps the profile's wells onto the two adjacent region wells.
pub fn initial_guess(map: &RegionMap, profile: &ConnectionProfile, grid: &Grid) -> Result<VectorField> {
    let group = map.group();
    let d = group.dimension();
    if grid.dim() != d || profile.value_dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if grid.dim() != d { grid.dim() } else { profile.value_dim() },
        });
    }
    let wells = map.wells();
    let count = wells.len();
    if count < 2 {
        return Ok(VectorField::constant(*grid, map.base()));
    }
    // transporter[g][b]: element k with k a- = well b and k a+ = well g
    let mut transporter: Vec<Vec<Option<usize>>> = vec![vec![None; count]; count];
    for (g, row) in transporter.iter_mut().enumerate() {
        for (b, slot) in row.iter_mut().enumerate() {
            if g == b {
                continue;
            }
            *slot = (0..group.order()).find(|&k| {
                dist(&group.apply(k, profile.a_minus()), &wells[b]) < 1e-9
                    && dist(&group.apply(k, profile.a_plus()), &wells[g]) < 1e-9
            });
        }
    }
    let mut values = Vec::with_capacity(grid.len() * d);
    let mut prof = vec![0.0; d];
    let mut out = vec![0.0; d];
    for idx in 0..grid.len() {
        let x = grid.coords(idx);
        let label = map.region_of(&x).label;
        let (b, s) = map.nearest_wall(&x, label).expect("at least two regions");
        let k = transporter[label][b].ok_or_else(|| {
            Error::Precondition(format!(
                "no group element maps the profile wells onto the wells of regions {b} and {label}"
            ))
        })?;
        profile.sample(s, &mut prof);
        mat_vec(group.element(k), &prof, &mut out);
        values.extend_from_slice(&out);
    }
    VectorField::new(*grid, d, values)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Fixed explicit step; an energy increase aborts the run.
    Fixed,
    /// The step is halved until the energy does not increase.
    Backtracking,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Boundary nodes keep the values of the starting field.
    FrozenOuterLayer,
    /// Boundary nodes are replaced by the declared well nearest to their value.
    DirichletNearestWell,
    /// Boundary nodes are supplied separately (see [`solve_dirichlet`]).
    DirichletCustom,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub step_rule: StepRule,
    pub dt: f64,
    pub max_iterations: usize,
    pub residual_target: f64,
    /// Project onto the equivariant class every `k_sym` accepted steps.
    pub k_sym: usize,
    /// Projection stops after this many accepted steps; later steps are plain
    /// gradient steps, which avoids reintroducing interpolation error into a
    /// nearly converged field.
    pub symmetrize_until: usize,
    pub boundary: BoundaryMode,
    /// Record the energy every this many accepted steps (0 disables).
    pub history_every: usize,
}

impl SolveOptions {
    /// Defaults for a grid: fixed step `0.9 h^2 / (2n)`.
    pub fn for_grid(grid: &Grid) -> Self {
        let h = grid.spacing();
        Self {
            step_rule: StepRule::Fixed,
            dt: 0.9 * h * h / (2.0 * grid.dim() as f64),
            max_iterations: 200_000,
            residual_target: 1e-3,
            k_sym: 10,
            symmetrize_until: 2_000,
            boundary: BoundaryMode::FrozenOuterLayer,
            history_every: 1_000,
        }
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        let h = grid.spacing();
        let limit = h * h / (2.0 * grid.dim() as f64);
        if !(self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt = {} must be positive", self.dt)));
        }
        if self.step_rule == StepRule::Fixed && self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "fixed dt = {} exceeds the explicit stability bound h^2/(2n) = {limit}",
                self.dt
            )));
        }
        if self.k_sym == 0 {
            return Err(Error::InvalidArgument("k_sym must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub field: VectorField,
    /// Accepted gradient steps.
    pub iterations: usize,
    /// Step-size halvings under the backtracking rule.
    pub rejected_steps: usize,
    pub initial_energy: f64,
    pub energy: f64,
    pub residual: f64,
    pub converged: bool,
    pub equivariance_before: Option<f64>,
    pub equivariance_after: Option<f64>,
    /// `(iteration, energy)` samples, always including the first and last state.
    pub energy_history: Vec<(usize, f64)>,
    /// Nodes of the closed chamber whose values leave it (monitor only).
    pub positivity_violations: Option<usize>,
    /// Whether `sup |u| <= max well norm + 1`.
    pub bounded: bool,
}

/// Equivariant minimisation under a reflection group acting on domain and values.
pub fn minimize(
    field: &VectorField,
    potential: &PotentialSpec,
    group: &ReflectionGroup,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    let action = GroupAction::from_group(group);
    let chamber = group.default_fundamental_region().ok();
    minimize_with(field, potential, Some(&action), chamber.as_ref(), opts)
}

/// Minimisation with an optional symmetry action and chamber to monitor.
pub fn minimize_with(
    field: &VectorField,
    potential: &PotentialSpec,
    action: Option<&GroupAction>,
    chamber: Option<&FundamentalRegion>,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    check_dims(field, potential)?;
    let grid = *field.grid();
    opts.validate(&grid)?;
    let m = field.value_dim();
    let mut u = field.clone();
    if opts.boundary == BoundaryMode::DirichletNearestWell {
        if potential.wells().is_empty() {
            return Err(Error::Precondition("nearest-well boundary needs declared wells".into()));
        }
        for idx in 0..grid.len() {
            if grid.is_boundary(idx) {
                let (i, _) = potential.nearest_well(u.at(idx)).expect("wells are declared");
                let well = potential.wells()[i].clone();
                u.at_mut(idx).copy_from_slice(&well);
            }
        }
    }
    let equivariance_before = match action {
        Some(a) => Some(equivariance_residual_action(&u, a)?),
        None => None,
    };
    let mut f = vec![0.0; u.values().len()];
    let mut trial = u.values().to_vec();
    let mut e = energy_of(&grid, m, u.values(), potential);
    let initial_energy = e;
    let mut history = vec![(0usize, e)];
    let mut residual = force(&grid, m, u.values(), potential, &mut f);
    let mut iterations = 0usize;
    let mut rejected = 0usize;
    let tol = |e: f64| 1e-12 * e.abs().max(1.0);
    while residual > opts.residual_target && iterations < opts.max_iterations {
        let mut dt = opts.dt;
        loop {
            for ((t, ui), fi) in trial.iter_mut().zip(u.values()).zip(&f) {
                *t = ui + dt * fi;
            }
            let et = energy_of(&grid, m, &trial, potential);
            if !et.is_finite() {
                return Err(Error::NonFinite { iteration: iterations + 1 });
            }
            if et <= e + tol(e) {
                e = et;
                break;
            }
            match opts.step_rule {
                StepRule::Fixed => {
                    return Err(Error::EnergyIncrease {
                        iteration: iterations + 1,
                        before: e,
                        after: et,
                    })
                }
                StepRule::Backtracking => {
                    rejected += 1;
                    dt *= 0.5;
                    if dt < opts.dt * 1e-12 {
                        return Err(Error::EnergyIncrease {
                            iteration: iterations + 1,
                            before: e,
                            after: et,
                        });
                    }
                }
            }
        }
        u.values_mut().copy_from_slice(&trial);
        iterations += 1;
        if let Some(a) = action {
            if iterations % opts.k_sym == 0 && iterations <= opts.symmetrize_until {
                let s = symmetrize_action(&u, a)?;
                for idx in 0..grid.len() {
                    if !grid.is_boundary(idx) {
                        u.at_mut(idx).copy_from_slice(s.at(idx));
                    }
                }
                // the projection is not a descent step; re-base the reference energy
                e = energy_of(&grid, m, u.values(), potential);
            }
        }
        residual = force(&grid, m, u.values(), potential, &mut f);
        if opts.history_every > 0 && iterations % opts.history_every == 0 {
            history.push((iterations, e));
        }
    }
    if history.last().map(|h| h.0) != Some(iterations) {
        history.push((iterations, e));
    }
    let equivariance_after = match action {
        Some(a) => Some(equivariance_residual_action(&u, a)?),
        None => None,
    };
    let positivity_violations = chamber.map(|c| positivity_violations(&u, c, 1e-9));
    let bound = potential.wells().iter().map(|a| norm(a)).fold(1.0f64, f64::max) + 1.0;
    Ok(SolveOutcome {
        bounded: u.sup_norm() <= bound,
        field: u,
        iterations,
        rejected_steps: rejected,
        initial_energy,
        energy: e,
        residual,
        converged: residual <= opts.residual_target,
        equivariance_before,
        equivariance_after,
        energy_history: history,
        positivity_violations,
    })
}

/// Number of nodes in the closed chamber whose value lies outside it.
pub fn positivity_violations(field: &VectorField, chamber: &FundamentalRegion, tol: f64) -> usize {
    let grid = field.grid();
    if grid.dim() != field.value_dim() {
        return 0;
    }
    (0..grid.len())
        .filter(|&idx| {
            let x = grid.coords(idx);
            chamber.contains_closed(&x, tol) && !chamber.contains_closed(field.at(idx), tol)
        })
        .count()
}

/// Dirichlet problem with boundary values taken from `boundary` and optional
/// symmetry enforced by projection. The boundary data must be equivariant.
pub fn solve_dirichlet(
    field0: &VectorField,
    potential: &PotentialSpec,
    boundary: &VectorField,
    symmetry: Option<&GroupAction>,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    if boundary.grid() != field0.grid() || boundary.value_dim() != field0.value_dim() {
        return Err(Error::InvalidArgument("boundary data must live on the solver grid".into()));
    }
    let grid = *field0.grid();
    if let Some(act) = symmetry {
        let m = boundary.value_dim();
        let mut y = vec![0.0; grid.dim()];
        let mut v = vec![0.0; m];
        let mut w = vec![0.0; m];
        for idx in (0..grid.len()).filter(|&i| grid.is_boundary(i)) {
            let x = grid.coords(idx);
            for g in 0..act.order() {
                mat_vec(act.space(g), &x, &mut y);
                if !boundary.interpolate(&y, &mut v) {
                    continue;
                }
                mat_vec(act.value(g), boundary.at(idx), &mut w);
                let gap = dist(&v, &w);
                if gap > 1e-9 {
                    return Err(Error::Precondition(format!(
                        "boundary data is not equivariant (defect {gap:e} at {x:?})"
                    )));
                }
            }
        }
    }
    let mut start = field0.clone();
    for idx in (0..grid.len()).filter(|&i| grid.is_boundary(i)) {
        start.at_mut(idx).copy_from_slice(boundary.at(idx));
    }
    let mut o = *opts;
    o.boundary = BoundaryMode::DirichletCustom;
    minimize_with(&start, potential, symmetry, None, &o)
}
