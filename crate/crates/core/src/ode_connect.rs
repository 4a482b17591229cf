//! Heteroclinic connections `U'' = W_u(U)` between two wells on a truncated line.
//!
//! The profile lives on nodes `eta_j = -L + j h`, `j = 0..=K`, with both ends
//! clamped to the wells. It is found by minimising the discrete action with a
//! preconditioned nonlinear conjugate gradient method and then polished with
//! Newton's method on the collocation equations
//! `U_{j+1} - 2 U_j + U_{j-1} = h^2 W_u(U_j)`.
//!
//! Translations are removed by pinning the component of the middle node along
//! `a+ - a-` to that of the midpoint `(a- + a+) / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::householder;
use crate::linalg::{dist, dot, linear_fit, mat_vec, norm, solve_tridiagonal, BandedMatrix};
use crate::potentials::PotentialSpec;

/// A sampled connection between two wells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionProfile {
    half_length: f64,
    intervals: usize,
    m: usize,
    values: Vec<f64>,
    a_minus: Vec<f64>,
    a_plus: Vec<f64>,
    potential: PotentialSpec,
}

impl ConnectionProfile {
    /// Samples `f` on the nodes and clamps the ends to `a-` and `a+`.
    pub fn from_fn(
        potential: &PotentialSpec,
        a_minus: &[f64],
        a_plus: &[f64],
        half_length: f64,
        intervals: usize,
        f: impl Fn(f64) -> Vec<f64>,
    ) -> Result<Self> {
        let m = potential.dim();
        check_layout(m, a_minus, a_plus, half_length, intervals)?;
        let h = 2.0 * half_length / intervals as f64;
        let mut values = Vec::with_capacity((intervals + 1) * m);
        for j in 0..=intervals {
            let v = if j == 0 {
                a_minus.to_vec()
            } else if j == intervals {
                a_plus.to_vec()
            } else {
                f((j as f64 - (intervals / 2) as f64) * h)
            };
            if v.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: v.len(),
                });
            }
            values.extend_from_slice(&v);
        }
        Ok(Self {
            half_length,
            intervals,
            m,
            values,
            a_minus: a_minus.to_vec(),
            a_plus: a_plus.to_vec(),
            potential: potential.clone(),
        })
    }

    /// The profile identically equal to `a`.
    pub fn constant(potential: &PotentialSpec, a: &[f64], half_length: f64, intervals: usize) -> Result<Self> {
        Self::from_fn(potential, a, a, half_length, intervals, |_| a.to_vec())
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.intervals as f64
    }

    pub fn value_dim(&self) -> usize {
        self.m
    }

    pub fn eta(&self, j: usize) -> f64 {
        (j as f64 - (self.intervals / 2) as f64) * self.spacing()
    }

    pub fn at(&self, j: usize) -> &[f64] {
        &self.values[j * self.m..(j + 1) * self.m]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn a_minus(&self) -> &[f64] {
        &self.a_minus
    }

    pub fn a_plus(&self) -> &[f64] {
        &self.a_plus
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    /// Linear interpolation, constant beyond the ends.
    pub fn sample(&self, eta: f64, out: &mut [f64]) {
        let h = self.spacing();
        let t = (eta + self.half_length) / h;
        if t <= 0.0 {
            out.copy_from_slice(&self.a_minus);
            return;
        }
        if t >= self.intervals as f64 {
            out.copy_from_slice(&self.a_plus);
            return;
        }
        let j = (t.floor() as usize).min(self.intervals - 1);
        let s = t - j as f64;
        let (lo, hi) = (self.at(j), self.at(j + 1));
        for c in 0..self.m {
            out[c] = (1.0 - s) * lo[c] + s * hi[c];
        }
    }

    /// CSV with columns `eta,U1..Um`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::from("eta");
        for c in 1..=self.m {
            write!(s, ",U{c}").expect("writing to a String cannot fail");
        }
        s.push('\n');
        for j in 0..=self.intervals {
            write!(s, "{:.16e}", self.eta(j)).expect("writing to a String cannot fail");
            for v in self.at(j) {
                write!(s, ",{v:.16e}").expect("writing to a String cannot fail");
            }
            s.push('\n');
        }
        s
    }
}

fn check_layout(m: usize, a_minus: &[f64], a_plus: &[f64], half_length: f64, intervals: usize) -> Result<()> {
    for a in [a_minus, a_plus] {
        if a.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: a.len(),
            });
        }
    }
    if !(half_length > 0.0 && half_length.is_finite()) {
        return Err(Error::InvalidArgument(format!("half-length {half_length} must be positive")));
    }
    if intervals < 4 || intervals % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "interval count must be even and >= 4, got {intervals}"
        )));
    }
    Ok(())
}

/// Iteration limits for [`solve_connection_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectOptions {
    pub max_descent_iterations: usize,
    /// Collocation residual at which the descent phase hands over to Newton.
    pub descent_target: f64,
    pub max_newton_iterations: usize,
}

impl Default for ConnectOptions {
    fn default() -> Self {
        Self {
            max_descent_iterations: 20_000,
            descent_target: 1e-2,
            max_newton_iterations: 60,
        }
    }
}

/// Solver statistics returned alongside a profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectStats {
    pub descent_iterations: usize,
    pub newton_iterations: usize,
    /// Final `sup_j |(U_{j+1} - 2U_j + U_{j-1})/h^2 - W_u(U_j)|`.
    pub residual: f64,
}

/// Connection from `a-` at `eta = -L` to `a+` at `eta = L` on `K` intervals,
/// with collocation residual at most `tol`.
pub fn solve_connection(
    potential: &PotentialSpec,
    a_minus: &[f64],
    a_plus: &[f64],
    half_length: f64,
    intervals: usize,
    tol: f64,
) -> Result<ConnectionProfile> {
    solve_connection_with(potential, a_minus, a_plus, half_length, intervals, tol, &ConnectOptions::default())
        .map(|(p, _)| p)
}

pub fn solve_connection_with(
    potential: &PotentialSpec,
    a_minus: &[f64],
    a_plus: &[f64],
    half_length: f64,
    intervals: usize,
    tol: f64,
    opts: &ConnectOptions,
) -> Result<(ConnectionProfile, ConnectStats)> {
    let m = potential.dim();
    check_layout(m, a_minus, a_plus, half_length, intervals)?;
    let span = dist(a_minus, a_plus);
    if span < 1e-12 {
        return Err(Error::InvalidArgument("endpoint wells coincide; there is no connection".into()));
    }
    for a in [a_minus, a_plus] {
        let w = potential.value(a);
        if w.abs() > 1e-10 {
            return Err(Error::Precondition(format!("endpoint {a:?} is not a well (W = {w:e})")));
        }
    }
    let dir: Vec<f64> = a_plus.iter().zip(a_minus).map(|(p, q)| (p - q) / span).collect();
    let mid: Vec<f64> = a_plus.iter().zip(a_minus).map(|(p, q)| 0.5 * (p + q)).collect();
    let rate = potential.c_squared().sqrt().max(0.1) / std::f64::consts::SQRT_2;
    let mut profile = ConnectionProfile::from_fn(potential, a_minus, a_plus, half_length, intervals, |eta| {
        let s = 0.5 * (1.0 + (rate * eta).tanh());
        a_minus.iter().zip(a_plus).map(|(p, q)| p + s * (q - p)).collect()
    })?;
    let mut problem = Problem {
        pot: potential,
        m,
        k: intervals,
        h: profile.spacing(),
        dir,
        gauge: 0.0,
        sigma: (2.0 * potential.c_squared()).max(1.0),
    };
    problem.gauge = dot(&mid, &problem.dir);

    let descent_iterations = problem.descend(&mut profile.values, opts);
    let (newton_iterations, residual) = problem.newton(&mut profile.values, tol, opts.max_newton_iterations)?;
    Ok((
        profile,
        ConnectStats {
            descent_iterations,
            newton_iterations,
            residual,
        },
    ))
}

struct Problem<'a> {
    pot: &'a PotentialSpec,
    m: usize,
    k: usize,
    h: f64,
    dir: Vec<f64>,
    gauge: f64,
    sigma: f64,
}

impl Problem<'_> {
    fn middle(&self) -> usize {
        self.k / 2
    }

    fn action(&self, u: &[f64]) -> f64 {
        action_values(self.pot, u, self.m, self.k, self.h)
    }

    /// Gradient of the action with the gauge direction removed at the middle node.
    fn gradient(&self, u: &[f64], g: &mut [f64]) {
        let (m, h) = (self.m, self.h);
        let mut wu = vec![0.0; m];
        g.iter_mut().for_each(|x| *x = 0.0);
        for j in 1..self.k {
            self.pot.gradient(&u[j * m..(j + 1) * m], &mut wu);
            for c in 0..m {
                let i = j * m + c;
                g[i] = (2.0 * u[i] - u[i - m] - u[i + m]) / h + h * wu[c];
            }
        }
        self.project(g);
    }

    fn project(&self, v: &mut [f64]) {
        let mm = self.middle() * self.m;
        let s = dot(&v[mm..mm + self.m], &self.dir);
        for c in 0..self.m {
            v[mm + c] -= s * self.dir[c];
        }
    }

    fn precondition(&self, g: &[f64], z: &mut [f64]) {
        let (m, h) = (self.m, self.h);
        let n = self.k - 1;
        let off = vec![-1.0 / h; n - 1];
        let diag = vec![(2.0 + self.sigma * h * h) / h; n];
        let mut rhs = vec![0.0; n];
        z.iter_mut().for_each(|x| *x = 0.0);
        for c in 0..m {
            for j in 0..n {
                rhs[j] = g[(j + 1) * m + c];
            }
            solve_tridiagonal(&off, &diag, &off, &mut rhs);
            for j in 0..n {
                z[(j + 1) * m + c] = rhs[j];
            }
        }
        self.project(z);
    }

    /// Preconditioned Polak–Ribière conjugate gradient with Armijo backtracking.
    fn descend(&self, u: &mut [f64], opts: &ConnectOptions) -> usize {
        let len = u.len();
        let mut g = vec![0.0; len];
        let mut z = vec![0.0; len];
        let mut p = vec![0.0; len];
        let mut trial = vec![0.0; len];
        self.gradient(u, &mut g);
        self.precondition(&g, &mut z);
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = -zi);
        let mut gz = dot(&g, &z);
        let mut a = self.action(u);
        let mut step: f64 = 1.0;
        for it in 0..opts.max_descent_iterations {
            let res = g.iter().fold(0.0f64, |acc, x| acc.max(x.abs())) / self.h;
            if res <= opts.descent_target {
                return it;
            }
            let mut slope = dot(&g, &p);
            if slope >= 0.0 {
                p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = -zi);
                slope = -gz;
            }
            let mut t = (2.0 * step).min(1.0);
            let mut accepted = false;
            while t > 1e-14 {
                trial.iter_mut().zip(u.iter()).zip(&p).for_each(|((x, ui), pi)| *x = ui + t * pi);
                let at = self.action(&trial);
                if at <= a + 1e-4 * t * slope {
                    u.copy_from_slice(&trial);
                    a = at;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                return it;
            }
            step = t;
            let g_old = g.clone();
            self.gradient(u, &mut g);
            self.precondition(&g, &mut z);
            let gz_new = dot(&g, &z);
            let beta = (dot(&z, &g) - dot(&z, &g_old)) / gz;
            let beta = beta.max(0.0);
            gz = gz_new;
            p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = -zi + beta * *pi);
        }
        opts.max_descent_iterations
    }

    /// Scaled collocation residual `h^2 F`; the middle node carries the gauge
    /// equation in place of its component along `dir`.
    fn system_residual(&self, u: &[f64], basis: &[Vec<f64>], r: &mut [f64]) {
        let (m, h) = (self.m, self.h);
        let mut wu = vec![0.0; m];
        let mut block = vec![0.0; m];
        for j in 1..self.k {
            self.pot.gradient(&u[j * m..(j + 1) * m], &mut wu);
            for c in 0..m {
                let i = j * m + c;
                block[c] = u[i + m] - 2.0 * u[i] + u[i - m] - h * h * wu[c];
            }
            let row = (j - 1) * m;
            if j == self.middle() {
                r[row] = dot(&u[j * m..(j + 1) * m], &self.dir) - self.gauge;
                for (q, b) in basis.iter().enumerate() {
                    r[row + 1 + q] = dot(b, &block);
                }
            } else {
                r[row..row + m].copy_from_slice(&block);
            }
        }
    }

    fn jacobian(&self, u: &[f64], basis: &[Vec<f64>]) -> BandedMatrix {
        let (m, h) = (self.m, self.h);
        let n = (self.k - 1) * m;
        let bw = 2 * m - 1;
        let mut jac = BandedMatrix::zeros(n, bw, bw);
        let mut hess = vec![0.0; m * m];
        for j in 1..self.k {
            self.pot.hessian(&u[j * m..(j + 1) * m], &mut hess);
            let row = (j - 1) * m;
            // d block_c / d U_{j+d, c'}
            let entry = |c: usize, dj: i64, cp: usize| -> f64 {
                match dj {
                    0 => (if c == cp { -2.0 } else { 0.0 }) - h * h * hess[c * m + cp],
                    _ => {
                        if c == cp {
                            1.0
                        } else {
                            0.0
                        }
                    }
                }
            };
            let neighbours: [(i64, bool); 3] = [(-1, j > 1), (0, true), (1, j + 1 < self.k)];
            if j == self.middle() {
                for cp in 0..m {
                    jac.set(row, row + cp, self.dir[cp]);
                }
                for (q, b) in basis.iter().enumerate() {
                    for &(dj, present) in &neighbours {
                        if !present {
                            continue;
                        }
                        let col0 = (row as i64 + dj * m as i64) as usize;
                        for cp in 0..m {
                            let v: f64 = (0..m).map(|c| b[c] * entry(c, dj, cp)).sum();
                            if v != 0.0 {
                                jac.set(row + 1 + q, col0 + cp, v);
                            }
                        }
                    }
                }
            } else {
                for &(dj, present) in &neighbours {
                    if !present {
                        continue;
                    }
                    let col0 = (row as i64 + dj * m as i64) as usize;
                    for c in 0..m {
                        for cp in 0..m {
                            let v = entry(c, dj, cp);
                            if v != 0.0 {
                                jac.set(row + c, col0 + cp, v);
                            }
                        }
                    }
                }
            }
        }
        jac
    }

    fn newton(&self, u: &mut [f64], tol: f64, max_iter: usize) -> Result<(usize, f64)> {
        let m = self.m;
        let basis = orthonormal_complement(&self.dir);
        let n = (self.k - 1) * m;
        let mut r = vec![0.0; n];
        let mut trial = u.to_vec();
        let mut rt = vec![0.0; n];
        let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let scale = 1.0 / (self.h * self.h);
        let mut residual = collocation_residual_values(self.pot, u, m, self.k, self.h);
        for it in 0..max_iter {
            if residual <= tol {
                return Ok((it, residual));
            }
            self.system_residual(u, &basis, &mut r);
            let lu = self.jacobian(u, &basis).factor()?;
            let mut delta: Vec<f64> = r.iter().map(|x| -x).collect();
            lu.solve(&mut delta);
            let r0 = sup(&r) * scale;
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-8 {
                trial.copy_from_slice(u);
                for (i, d) in delta.iter().enumerate() {
                    trial[m + i] += t * d;
                }
                self.system_residual(&trial, &basis, &mut rt);
                if sup(&rt) * scale < r0 || (t == 1.0 && sup(&rt) * scale <= tol) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                return Err(Error::NonConvergence {
                    iterations: it,
                    residual,
                });
            }
            u.copy_from_slice(&trial);
            residual = collocation_residual_values(self.pot, u, m, self.k, self.h);
            if trial.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite { iteration: it });
            }
        }
        if residual <= tol {
            Ok((max_iter, residual))
        } else {
            Err(Error::NonConvergence {
                iterations: max_iter,
                residual,
            })
        }
    }
}

/// Orthonormal basis of the complement of a unit vector.
fn orthonormal_complement(d: &[f64]) -> Vec<Vec<f64>> {
    let m = d.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for k in 0..m {
        if basis.len() == m - 1 {
            break;
        }
        let mut v = vec![0.0; m];
        v[k] = 1.0;
        let s = dot(&v, d);
        for c in 0..m {
            v[c] -= s * d[c];
        }
        for b in &basis {
            let s = dot(&v, b);
            for c in 0..m {
                v[c] -= s * b[c];
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            basis.push(v.iter().map(|x| x / nv).collect());
        }
    }
    basis
}

fn action_values(pot: &PotentialSpec, u: &[f64], m: usize, k: usize, h: f64) -> f64 {
    let mut kinetic = 0.0;
    for j in 0..k {
        let d2: f64 = (0..m).map(|c| (u[(j + 1) * m + c] - u[j * m + c]).powi(2)).sum();
        kinetic += 0.5 * d2 / h;
    }
    let mut potential = 0.0;
    for j in 0..=k {
        let w = if j == 0 || j == k { 0.5 } else { 1.0 };
        potential += w * h * pot.value(&u[j * m..(j + 1) * m]);
    }
    kinetic + potential
}

fn collocation_residual_values(pot: &PotentialSpec, u: &[f64], m: usize, k: usize, h: f64) -> f64 {
    let mut wu = vec![0.0; m];
    let mut worst = 0.0f64;
    for j in 1..k {
        pot.gradient(&u[j * m..(j + 1) * m], &mut wu);
        for c in 0..m {
            let i = j * m + c;
            let lap = (u[i + m] - 2.0 * u[i] + u[i - m]) / (h * h);
            worst = worst.max((lap - wu[c]).abs());
        }
    }
    worst
}

/// `sup_j |Delta_h U_j - W_u(U_j)|` over interior nodes.
pub fn collocation_residual(profile: &ConnectionProfile) -> f64 {
    collocation_residual_values(
        &profile.potential,
        &profile.values,
        profile.m,
        profile.intervals,
        profile.spacing(),
    )
}

/// `max_j |1/2 |U'(eta_j)|^2 - W(U_j)|` with centred differences.
pub fn equipartition_residual(profile: &ConnectionProfile) -> f64 {
    let (m, h) = (profile.m, profile.spacing());
    let mut worst = 0.0f64;
    for j in 1..profile.intervals {
        let d2: f64 = (0..m)
            .map(|c| ((profile.at(j + 1)[c] - profile.at(j - 1)[c]) / (2.0 * h)).powi(2))
            .sum();
        worst = worst.max((0.5 * d2 - profile.potential.value(profile.at(j))).abs());
    }
    worst
}

/// Discrete action: forward-difference kinetic term plus trapezoidal potential term.
pub fn action(profile: &ConnectionProfile) -> f64 {
    action_values(
        &profile.potential,
        &profile.values,
        profile.m,
        profile.intervals,
        profile.spacing(),
    )
}

/// Class of variations on which the linearised operator is examined.
#[derive(Clone, Debug, PartialEq)]
pub enum SymmetryClass {
    /// All variations vanishing at the ends.
    Unrestricted,
    /// Variations with `v(-eta) = T v(eta)`; `None` uses the reflection
    /// across the hyperplane orthogonal to `a+ - a-`.
    Symmetric(Option<Vec<f64>>),
}

/// Lowest eigenpair of `-L`, `L v = v'' - W_uu(U) v` with Dirichlet ends.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearizedMode {
    /// Eigenvalue of `L` closest to zero (so `gap = |eigenvalue|`).
    pub eigenvalue: f64,
    /// Interior-node eigenvector, node-major, unit Euclidean norm.
    pub eigenvector: Vec<f64>,
    pub iterations: usize,
}

/// Eigenvalue of the linearised operator with smallest modulus, found by
/// inverse iteration within the requested symmetry class.
pub fn lowest_linearized_mode(profile: &ConnectionProfile, class: &SymmetryClass) -> Result<LinearizedMode> {
    let (m, k, h) = (profile.m, profile.intervals, profile.spacing());
    let n = (k - 1) * m;
    let t_matrix = match class {
        SymmetryClass::Unrestricted => None,
        SymmetryClass::Symmetric(Some(t)) => {
            if t.len() != m * m {
                return Err(Error::DimensionMismatch {
                    expected: m * m,
                    found: t.len(),
                });
            }
            Some(t.clone())
        }
        SymmetryClass::Symmetric(None) => {
            let d: Vec<f64> = profile.a_plus.iter().zip(&profile.a_minus).map(|(p, q)| p - q).collect();
            if norm(&d) < 1e-12 {
                return Err(Error::InvalidArgument(
                    "the default symmetric class needs distinct endpoint wells".into(),
                ));
            }
            Some(householder(&d))
        }
    };
    // A = -L scaled by h^2: tridiagonal blocks (-1, 2 + h^2 W_uu, -1).
    let mut a = BandedMatrix::zeros(n, m, m);
    let mut hess = vec![0.0; m * m];
    for j in 1..k {
        profile.potential.hessian(profile.at(j), &mut hess);
        let row = (j - 1) * m;
        for c in 0..m {
            for cp in 0..m {
                let v = h * h * hess[c * m + cp] + if c == cp { 2.0 } else { 0.0 };
                a.set(row + c, row + cp, v);
            }
            if j > 1 {
                a.set(row + c, row + c - m, -1.0);
            }
            if j + 1 < k {
                a.set(row + c, row + c + m, -1.0);
            }
        }
    }
    let lu = a.clone().factor()?;
    let project = |v: &mut [f64]| {
        if let Some(t) = &t_matrix {
            let mut pv = vec![0.0; n];
            let mut tmp = vec![0.0; m];
            for j in 1..k {
                let mirror = k - j;
                let src = &v[(mirror - 1) * m..mirror * m];
                mat_vec(t, src, &mut tmp);
                pv[(j - 1) * m..j * m].copy_from_slice(&tmp);
            }
            for (x, p) in v.iter_mut().zip(&pv) {
                *x = 0.5 * (*x + p);
            }
        }
    };
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.37 * ((i as f64) * 0.71).sin() + 0.11 * (i % (m + 1)) as f64)
        .collect();
    project(&mut v);
    let nv = norm(&v);
    if nv == 0.0 {
        return Err(Error::InvalidArgument("symmetry class is trivial".into()));
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let mut av = vec![0.0; n];
    let mut lambda = f64::NAN;
    for it in 1..=2000 {
        let mut w = v.clone();
        lu.solve(&mut w);
        project(&mut w);
        let nw = norm(&w);
        if nw == 0.0 || !nw.is_finite() {
            return Err(Error::NonFinite { iteration: it });
        }
        w.iter_mut().for_each(|x| *x /= nw);
        a.mul_vec(&w, &mut av);
        let rq = dot(&w, &av) / (h * h);
        let converged = (rq - lambda).abs() <= 1e-12 * rq.abs().max(1.0);
        lambda = rq;
        v = w;
        if converged {
            return Ok(LinearizedMode {
                eigenvalue: -lambda,
                eigenvector: v,
                iterations: it,
            });
        }
    }
    Ok(LinearizedMode {
        eigenvalue: -lambda,
        eigenvector: v,
        iterations: 2000,
    })
}

/// `|eigenvalue|` of [`lowest_linearized_mode`].
pub fn hyperbolicity_gap(profile: &ConnectionProfile, class: &SymmetryClass) -> Result<f64> {
    lowest_linearized_mode(profile, class).map(|mode| mode.eigenvalue.abs())
}

/// Exponential fit `|U - a| ~ K exp(-k |eta|)` on one tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub amplitude: f64,
    pub rate: f64,
    pub samples: usize,
}

/// Fits both tails over `|eta| in [L/3, 2L/3]` where `1e-10 <= |U - a| <= 1e-1`.
/// Returns `(left, right)`; a tail with fewer than three usable nodes is `None`.
pub fn tail_decay(profile: &ConnectionProfile) -> (Option<TailFit>, Option<TailFit>) {
    let l = profile.half_length;
    let fit = |right: bool| {
        let well = if right { &profile.a_plus } else { &profile.a_minus };
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for j in 0..=profile.intervals {
            let eta = profile.eta(j);
            let s = if right { eta } else { -eta };
            if s < l / 3.0 || s > 2.0 * l / 3.0 {
                continue;
            }
            let e = dist(profile.at(j), well);
            if (1e-10..=1e-1).contains(&e) {
                xs.push(s);
                ys.push(e.ln());
            }
        }
        if xs.len() < 3 {
            return None;
        }
        linear_fit(&xs, &ys).map(|(b, slope)| TailFit {
            amplitude: b.exp(),
            rate: -slope,
            samples: xs.len(),
        })
    };
    (fit(false), fit(true))
}
