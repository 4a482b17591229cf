//! Multi-well potentials W: R^m -> [0, inf) with exact gradients and Hessians.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{tetrahedron_vertices, ReflectionGroup};
use crate::linalg::{dist, norm, sym_eigenvalues};

/// `coeff * prod_k u_k^exponents[k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

/// JSON form of a user-supplied polynomial potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialDefinition {
    #[serde(default)]
    pub name: Option<String>,
    pub monomials: Vec<Monomial>,
    #[serde(default)]
    pub wells: Vec<Vec<f64>>,
    #[serde(default)]
    pub radial_radius: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    DoubleWell,
    GinzburgLandau,
    TripleWellTriangle,
    TetraQuadrupleWell,
    Polynomial { monomials: Vec<Monomial> },
}

/// A potential together with its declared wells and verification constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    name: String,
    m: usize,
    kind: PotentialKind,
    wells: Vec<Vec<f64>>,
    nondegenerate: bool,
    /// Half the smallest Hessian eigenvalue over the wells.
    c_squared: f64,
    /// Radius of the sphere used for the radial monotonicity check.
    radial_radius: f64,
    /// Radius within which each well is the strict local minimum.
    q0: f64,
}

fn tetra_k() -> f64 {
    4.0 / 3.0f64.sqrt()
}

fn triangle_wells() -> Vec<Vec<f64>> {
    (0..3)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            vec![a.cos(), a.sin()]
        })
        .collect()
}

impl PotentialSpec {
    fn finish(name: &str, m: usize, kind: PotentialKind, wells: Vec<Vec<f64>>, radial_radius: f64) -> Self {
        let mut spec = Self {
            name: name.to_string(),
            m,
            kind,
            wells,
            nondegenerate: false,
            c_squared: 0.0,
            radial_radius,
            q0: 0.0,
        };
        if !spec.wells.is_empty() {
            let lmin = spec
                .wells
                .iter()
                .map(|a| spec.min_hessian_eigenvalue(a))
                .fold(f64::INFINITY, f64::min);
            spec.nondegenerate = lmin > 0.0;
            spec.c_squared = lmin.max(0.0) / 2.0;
            let mut sep = f64::INFINITY;
            for i in 0..spec.wells.len() {
                for j in i + 1..spec.wells.len() {
                    sep = sep.min(dist(&spec.wells[i], &spec.wells[j]));
                }
            }
            spec.q0 = if sep.is_finite() { sep / 2.0 } else { 1.0 };
        }
        spec
    }

    /// `W(u) = (u^2 - 1)^2 / 4` on R.
    pub fn scalar_double_well() -> Self {
        Self::finish("double-well", 1, PotentialKind::DoubleWell, vec![vec![-1.0], vec![1.0]], 1.0)
    }

    /// `W(u) = (|u|^2 - 1)^2 / 4` on R^m; its zero set is the unit sphere, so
    /// it is declared degenerate with no isolated wells.
    pub fn ginzburg_landau(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!("Ginzburg-Landau needs m >= 2, got {m}")));
        }
        let mut spec = Self::finish("ginzburg-landau", m, PotentialKind::GinzburgLandau, Vec::new(), 1.0);
        spec.q0 = 0.0;
        Ok(spec)
    }

    /// `W(u) = prod_i |u - a_i|^2` with the three cube roots of unity as wells.
    pub fn triple_well_triangle() -> Self {
        Self::finish("triple-well-triangle", 2, PotentialKind::TripleWellTriangle, triangle_wells(), 2.0)
    }

    /// `W(u) = |u|^4 - (4/sqrt 3)(u1^2 - u2^2) u3 - (2/3)|u|^2 + 5/9`, with the
    /// tetrahedron vertices as wells.
    pub fn tetra_quadruple_well() -> Self {
        let wells = tetrahedron_vertices().iter().map(|v| v.to_vec()).collect();
        Self::finish("tetra-quadruple-well", 3, PotentialKind::TetraQuadrupleWell, wells, 2.0)
    }

    pub fn polynomial(def: PolynomialDefinition) -> Result<Self> {
        let m = def
            .monomials
            .first()
            .map(|t| t.exponents.len())
            .ok_or_else(|| Error::InvalidArgument("polynomial has no monomials".into()))?;
        if m == 0 || def.monomials.iter().any(|t| t.exponents.len() != m) {
            return Err(Error::InvalidArgument(
                "all monomials must carry the same positive number of exponents".into(),
            ));
        }
        if def.wells.iter().any(|w| w.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: def.wells.iter().map(Vec::len).find(|&l| l != m).unwrap_or(0),
            });
        }
        let name = def.name.unwrap_or_else(|| "polynomial".to_string());
        Ok(Self::finish(
            &name,
            m,
            PotentialKind::Polynomial {
                monomials: def.monomials,
            },
            def.wells,
            def.radial_radius.unwrap_or(2.0),
        ))
    }

    pub fn polynomial_from_json(text: &str) -> Result<Self> {
        Self::polynomial(serde_json::from_str(text)?)
    }

    /// Catalog lookup: `double-well`, `ginzburg-landau-<m>`, `triple-well-triangle`,
    /// `tetra-quadruple-well`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "double-well" => Ok(Self::scalar_double_well()),
            "triple-well-triangle" => Ok(Self::triple_well_triangle()),
            "tetra-quadruple-well" => Ok(Self::tetra_quadruple_well()),
            other => match other.strip_prefix("ginzburg-landau-") {
                Some(m) => {
                    let m = m
                        .parse()
                        .map_err(|_| Error::InvalidArgument(format!("bad dimension in '{other}'")))?;
                    Self::ginzburg_landau(m)
                }
                None => Err(Error::InvalidArgument(format!("unknown potential '{other}'"))),
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn wells(&self) -> &[Vec<f64>] {
        &self.wells
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.nondegenerate
    }

    pub fn c_squared(&self) -> f64 {
        self.c_squared
    }

    pub fn radial_radius(&self) -> f64 {
        self.radial_radius
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    /// Declared well closest to `u`.
    pub fn nearest_well(&self, u: &[f64]) -> Option<(usize, f64)> {
        self.wells
            .iter()
            .enumerate()
            .map(|(i, a)| (i, dist(a, u)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        match &self.kind {
            PotentialKind::DoubleWell => {
                let s = u[0] * u[0] - 1.0;
                0.25 * s * s
            }
            PotentialKind::GinzburgLandau => {
                let s = u.iter().map(|x| x * x).sum::<f64>() - 1.0;
                0.25 * s * s
            }
            PotentialKind::TripleWellTriangle => self
                .wells
                .iter()
                .map(|a| (u[0] - a[0]).powi(2) + (u[1] - a[1]).powi(2))
                .product(),
            PotentialKind::TetraQuadrupleWell => {
                let r2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
                r2 * r2 - tetra_k() * (u[0] * u[0] - u[1] * u[1]) * u[2] - 2.0 / 3.0 * r2 + 5.0 / 9.0
            }
            PotentialKind::Polynomial { monomials } => monomials
                .iter()
                .map(|t| t.coeff * t.exponents.iter().zip(u).map(|(&e, x)| x.powi(e as i32)).product::<f64>())
                .sum(),
        }
    }

    pub fn gradient(&self, u: &[f64], g: &mut [f64]) {
        match &self.kind {
            PotentialKind::DoubleWell => g[0] = u[0] * u[0] * u[0] - u[0],
            PotentialKind::GinzburgLandau => {
                let s = u.iter().map(|x| x * x).sum::<f64>() - 1.0;
                for (gi, ui) in g.iter_mut().zip(u) {
                    *gi = s * ui;
                }
            }
            PotentialKind::TripleWellTriangle => {
                let q: Vec<[f64; 2]> = self.wells.iter().map(|a| [u[0] - a[0], u[1] - a[1]]).collect();
                let d: Vec<f64> = q.iter().map(|v| v[0] * v[0] + v[1] * v[1]).collect();
                g[0] = 0.0;
                g[1] = 0.0;
                for i in 0..3 {
                    let others = d[(i + 1) % 3] * d[(i + 2) % 3];
                    g[0] += 2.0 * q[i][0] * others;
                    g[1] += 2.0 * q[i][1] * others;
                }
            }
            PotentialKind::TetraQuadrupleWell => {
                let k = tetra_k();
                let r2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
                g[0] = 4.0 * r2 * u[0] - 2.0 * k * u[0] * u[2] - 4.0 / 3.0 * u[0];
                g[1] = 4.0 * r2 * u[1] + 2.0 * k * u[1] * u[2] - 4.0 / 3.0 * u[1];
                g[2] = 4.0 * r2 * u[2] - k * (u[0] * u[0] - u[1] * u[1]) - 4.0 / 3.0 * u[2];
            }
            PotentialKind::Polynomial { monomials } => {
                g.iter_mut().for_each(|x| *x = 0.0);
                for t in monomials {
                    for k in 0..self.m {
                        let ek = t.exponents[k];
                        if ek == 0 {
                            continue;
                        }
                        let mut p = t.coeff * ek as f64;
                        for (j, (&e, x)) in t.exponents.iter().zip(u).enumerate() {
                            p *= x.powi(if j == k { e as i32 - 1 } else { e as i32 });
                        }
                        g[k] += p;
                    }
                }
            }
        }
    }

    /// Row-major `m x m` Hessian.
    pub fn hessian(&self, u: &[f64], h: &mut [f64]) {
        let m = self.m;
        match &self.kind {
            PotentialKind::DoubleWell => h[0] = 3.0 * u[0] * u[0] - 1.0,
            PotentialKind::GinzburgLandau => {
                let s = u.iter().map(|x| x * x).sum::<f64>() - 1.0;
                for i in 0..m {
                    for j in 0..m {
                        h[i * m + j] = 2.0 * u[i] * u[j] + if i == j { s } else { 0.0 };
                    }
                }
            }
            PotentialKind::TripleWellTriangle => {
                let q: Vec<[f64; 2]> = self.wells.iter().map(|a| [u[0] - a[0], u[1] - a[1]]).collect();
                let d: Vec<f64> = q.iter().map(|v| v[0] * v[0] + v[1] * v[1]).collect();
                h[..4].iter_mut().for_each(|x| *x = 0.0);
                for i in 0..3 {
                    let (j, l) = ((i + 1) % 3, (i + 2) % 3);
                    let others = d[j] * d[l];
                    h[0] += 2.0 * others;
                    h[3] += 2.0 * others;
                    for (jj, ll) in [(j, l), (l, j)] {
                        for r in 0..2 {
                            for c in 0..2 {
                                h[r * 2 + c] += 4.0 * q[i][r] * q[jj][c] * d[ll];
                            }
                        }
                    }
                }
            }
            PotentialKind::TetraQuadrupleWell => {
                let k = tetra_k();
                let r2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
                let c = 4.0 * r2 - 4.0 / 3.0;
                h[0] = 8.0 * u[0] * u[0] + c - 2.0 * k * u[2];
                h[4] = 8.0 * u[1] * u[1] + c + 2.0 * k * u[2];
                h[8] = 8.0 * u[2] * u[2] + c;
                h[1] = 8.0 * u[0] * u[1];
                h[2] = 8.0 * u[0] * u[2] - 2.0 * k * u[0];
                h[5] = 8.0 * u[1] * u[2] + 2.0 * k * u[1];
                h[3] = h[1];
                h[6] = h[2];
                h[7] = h[5];
            }
            PotentialKind::Polynomial { monomials } => {
                h[..m * m].iter_mut().for_each(|x| *x = 0.0);
                for t in monomials {
                    for a in 0..m {
                        for b in 0..m {
                            let mut e: Vec<i32> = t.exponents.iter().map(|&x| x as i32).collect();
                            let mut p = t.coeff * e[a] as f64;
                            e[a] -= 1;
                            p *= e[b] as f64;
                            e[b] -= 1;
                            if p == 0.0 {
                                continue;
                            }
                            for (j, x) in u.iter().enumerate() {
                                p *= x.powi(e[j]);
                            }
                            h[a * m + b] += p;
                        }
                    }
                }
            }
        }
    }

    pub fn min_hessian_eigenvalue(&self, u: &[f64]) -> f64 {
        let mut h = vec![0.0; self.m * self.m];
        self.hessian(u, &mut h);
        sym_eigenvalues(self.m, &h)[0]
    }
}

/// Outcome of checking the structural hypotheses of a potential against a group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub samples: usize,
    /// `max |W(g u) - W(u)|` over samples and group elements.
    pub invariance_residual: f64,
    /// Smallest Hessian eigenvalue over the declared wells; `None` when degenerate.
    pub min_well_eigenvalue: Option<f64>,
    pub two_c_squared: f64,
    /// Largest well value `|W(a_i)|`.
    pub max_well_value: f64,
    /// Most negative `W(s u) - W(u)` for `|u| = M`, `s in [1, 3]` (0 if none).
    pub radial_violation: f64,
    pub radial_monotone: bool,
    /// Declared wells in the closed default chamber; `None` when degenerate.
    pub wells_in_closed_region: Option<usize>,
    pub min_sampled_value: f64,
    pub degenerate: bool,
}

/// Samples the hypotheses on the ball of radius 2 (seeded, deterministic).
pub fn verify_hypotheses(
    spec: &PotentialSpec,
    group: &ReflectionGroup,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<HypothesisReport> {
    let m = spec.dim();
    if group.dimension() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: group.dimension(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut invariance: f64 = 0.0;
    let mut min_value = f64::INFINITY;
    for _ in 0..samples {
        let u = sample_ball(&mut rng, m, 2.0);
        let w = spec.value(&u);
        min_value = min_value.min(w);
        for i in 0..group.order() {
            invariance = invariance.max((spec.value(&group.apply(i, &u)) - w).abs());
        }
    }
    let mut radial_violation: f64 = 0.0;
    let radius = spec.radial_radius();
    for _ in 0..samples {
        let mut u = sample_ball(&mut rng, m, 1.0);
        let nu = norm(&u).max(1e-300);
        u.iter_mut().for_each(|x| *x *= radius / nu);
        let base = spec.value(&u);
        for step in 1..=20 {
            let s = 1.0 + 0.1 * step as f64;
            let us: Vec<f64> = u.iter().map(|x| s * x).collect();
            radial_violation = radial_violation.min(spec.value(&us) - base);
        }
    }
    let degenerate = !spec.is_nondegenerate();
    let min_well_eigenvalue = if spec.wells().is_empty() {
        None
    } else {
        Some(
            spec.wells()
                .iter()
                .map(|a| spec.min_hessian_eigenvalue(a))
                .fold(f64::INFINITY, f64::min),
        )
    };
    let wells_in_closed_region = if spec.wells().is_empty() {
        None
    } else {
        let f = group.default_fundamental_region()?;
        Some(spec.wells().iter().filter(|a| f.contains_closed(a, 1e-9)).count())
    };
    Ok(HypothesisReport {
        samples,
        invariance_residual: invariance,
        min_well_eigenvalue,
        two_c_squared: 2.0 * spec.c_squared(),
        max_well_value: spec.wells().iter().map(|a| spec.value(a).abs()).fold(0.0, f64::max),
        radial_violation: -radial_violation,
        radial_monotone: radial_violation >= -tol,
        wells_in_closed_region,
        min_sampled_value: min_value,
        degenerate,
    })
}

fn sample_ball(rng: &mut ChaCha8Rng, m: usize, radius: f64) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..m).map(|_| rng.gen_range(-radius..radius)).collect();
        if norm(&u) <= radius {
            return u;
        }
    }
}

/// Why a Newton run from a seed did not produce a well.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed_index: usize,
    pub reason: String,
    pub gradient_norm: f64,
    pub point: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WellSearch {
    /// Refined minima, merged within 1e-8, in order of first discovery.
    pub wells: Vec<Vec<f64>>,
    pub failures: Vec<SeedFailure>,
}

const WELL_GRAD_TOL: f64 = 1e-10;
const WELL_MERGE_TOL: f64 = 1e-8;
const WELL_MAX_ITER: usize = 100;

/// Damped Newton on the gradient from each seed, keeping critical points with
/// positive-definite Hessian.
pub fn find_wells(spec: &PotentialSpec, seeds: &[Vec<f64>]) -> WellSearch {
    let m = spec.dim();
    let mut out = WellSearch {
        wells: Vec::new(),
        failures: Vec::new(),
    };
    let mut g = vec![0.0; m];
    let mut h = vec![0.0; m * m];
    for (si, seed) in seeds.iter().enumerate() {
        if seed.len() != m {
            out.failures.push(SeedFailure {
                seed_index: si,
                reason: format!("seed has dimension {}, expected {m}", seed.len()),
                gradient_norm: f64::NAN,
                point: seed.clone(),
            });
            continue;
        }
        let mut u = seed.clone();
        spec.gradient(&u, &mut g);
        let mut gn = norm(&g);
        let mut iterations = 0;
        let mut stalled = false;
        while gn > WELL_GRAD_TOL && iterations < WELL_MAX_ITER {
            iterations += 1;
            spec.hessian(&u, &mut h);
            let hm = nalgebra::DMatrix::from_row_slice(m, m, &h);
            let rhs = nalgebra::DVector::from_iterator(m, g.iter().map(|x| -x));
            let Some(step) = hm.lu().solve(&rhs) else {
                stalled = true;
                break;
            };
            let mut t = 1.0;
            let mut accepted = false;
            let mut trial = vec![0.0; m];
            let mut gt = vec![0.0; m];
            while t > 1e-12 {
                for k in 0..m {
                    trial[k] = u[k] + t * step[k];
                }
                spec.gradient(&trial, &mut gt);
                let gtn = norm(&gt);
                if gtn < gn {
                    u.copy_from_slice(&trial);
                    g.copy_from_slice(&gt);
                    gn = gtn;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                stalled = true;
                break;
            }
        }
        if gn > WELL_GRAD_TOL {
            out.failures.push(SeedFailure {
                seed_index: si,
                reason: if stalled {
                    "Newton step stalled".to_string()
                } else {
                    format!("no convergence after {WELL_MAX_ITER} iterations")
                },
                gradient_norm: gn,
                point: u,
            });
            continue;
        }
        let lmin = spec.min_hessian_eigenvalue(&u);
        if lmin <= 0.0 {
            out.failures.push(SeedFailure {
                seed_index: si,
                reason: format!("critical point is not a strict minimum (smallest Hessian eigenvalue {lmin:e})"),
                gradient_norm: gn,
                point: u,
            });
            continue;
        }
        if !out.wells.iter().any(|w| dist(w, &u) <= WELL_MERGE_TOL) {
            out.wells.push(u);
        }
    }
    out
}
