//! Sharp-interface side: weighted Steiner points, Young angles, surface-tension
//! metric reduction and exact polygonal partitions of the plane.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::linalg::dist;

pub type Point = [f64; 2];

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn len(a: Point) -> f64 {
    a[0].hypot(a[1])
}

fn dot2(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Symmetric surface-tension coefficients `e_ij` between `N` phases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensionMatrix {
    phases: usize,
    entries: Vec<f64>,
}

impl TensionMatrix {
    /// Row-major `N x N` coefficients: symmetric, zero diagonal, positive off it.
    pub fn new(phases: usize, entries: Vec<f64>) -> Result<Self> {
        if phases < 2 || entries.len() != phases * phases {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for {phases} phases, got {}",
                phases * phases,
                entries.len()
            )));
        }
        for i in 0..phases {
            if entries[i * phases + i] != 0.0 {
                return Err(Error::InvalidArgument(format!("e_{i}{i} must be zero")));
            }
            for j in 0..phases {
                let (a, b) = (entries[i * phases + j], entries[j * phases + i]);
                if a != b {
                    return Err(Error::InvalidArgument(format!("e_{i}{j} = {a} differs from e_{j}{i} = {b}")));
                }
                if i != j && !(a > 0.0 && a.is_finite()) {
                    return Err(Error::InvalidArgument(format!("e_{i}{j} = {a} must be positive")));
                }
            }
        }
        Ok(Self { phases, entries })
    }

    /// Three-phase matrix from `(e12, e13, e23)`.
    pub fn from_triple(e12: f64, e13: f64, e23: f64) -> Result<Self> {
        Self::new(3, vec![0.0, e12, e13, e12, 0.0, e23, e13, e23, 0.0])
    }

    /// All off-diagonal coefficients equal to `e`.
    pub fn uniform(phases: usize, e: f64) -> Result<Self> {
        let entries = (0..phases * phases)
            .map(|k| if k / phases == k % phases { 0.0 } else { e })
            .collect();
        Self::new(phases, entries)
    }

    pub fn phases(&self) -> usize {
        self.phases
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.phases + j]
    }

    /// `e_ik < e_ij + e_jk` for every triple of distinct phases.
    pub fn is_strict(&self) -> bool {
        self.triangle_violations(|lhs, rhs| lhs >= rhs)
    }

    /// `e_ik <= e_ij + e_jk` for every triple, up to rounding.
    pub fn is_metric(&self) -> bool {
        self.triangle_violations(|lhs, rhs| lhs > rhs * (1.0 + 4.0 * f64::EPSILON))
    }

    fn triangle_violations(&self, bad: impl Fn(f64, f64) -> bool) -> bool {
        let n = self.phases;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i != j && j != k && i != k && bad(self.get(i, k), self.get(i, j) + self.get(j, k)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Cheapest-path closure `e*` over the phase graph.
    pub fn metric_reduce(&self) -> TensionMatrix {
        let n = self.phases;
        let mut d = self.entries.clone();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    // ignore rounding-level gains so that the closure is idempotent
                    let via = d[i * n + k] + d[k * n + j];
                    if via < d[i * n + j] * (1.0 - 4.0 * f64::EPSILON) {
                        d[i * n + j] = via;
                    }
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let v = d[i * n + j].min(d[j * n + i]);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        TensionMatrix { phases: n, entries: d }
    }
}

/// Triangle `A, B, C` with the weights of `e12 |P - A| + e13 |P - B| + e23 |P - C|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedTriangle {
    pub a: Point,
    pub b: Point,
    pub c: Point,
    pub e12: f64,
    pub e13: f64,
    pub e23: f64,
}

impl WeightedTriangle {
    pub fn vertices(&self) -> [Point; 3] {
        [self.a, self.b, self.c]
    }

    /// Weights paired with `A, B, C`.
    pub fn weights(&self) -> [f64; 3] {
        [self.e12, self.e13, self.e23]
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights().iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!("weights {:?} must be positive", self.weights())));
        }
        if self.vertices().iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite vertex".into()));
        }
        Ok(())
    }

    /// Twice the signed area; zero for collinear vertices.
    pub fn doubled_area(&self) -> f64 {
        let (u, v) = (sub(self.b, self.a), sub(self.c, self.a));
        u[0] * v[1] - u[1] * v[0]
    }

    pub fn objective(&self, p: Point) -> f64 {
        let w = self.weights();
        self.vertices().iter().zip(w).map(|(v, w)| w * len(sub(p, *v))).sum()
    }

    /// Angle of the triangle at vertex `k` (0 = A, 1 = B, 2 = C).
    pub fn angle(&self, k: usize) -> f64 {
        let v = self.vertices();
        let (p, q, r) = (v[k], v[(k + 1) % 3], v[(k + 2) % 3]);
        let (u, w) = (sub(q, p), sub(r, p));
        (dot2(u, w) / (len(u) * len(w))).clamp(-1.0, 1.0).acos()
    }
}

/// Weighted pull `sum_{k != v} w_k (X_k - X_v)/|X_k - X_v|` at vertex `v`.
fn vertex_pull(tri: &WeightedTriangle, v: usize) -> Point {
    let verts = tri.vertices();
    let w = tri.weights();
    let mut r = [0.0; 2];
    for k in (0..3).filter(|&k| k != v) {
        let d = sub(verts[k], verts[v]);
        let l = len(d);
        if l > 0.0 {
            r[0] += w[k] * d[0] / l;
            r[1] += w[k] * d[1] / l;
        }
    }
    r
}

/// `|e12 nu_12 + e13 nu_13 + e23 nu_23|` with unit vectors from `P` toward the
/// paired vertices; at a vertex, the excess of the pull over the vertex weight.
pub fn first_order_residual(p: Point, tri: &WeightedTriangle) -> f64 {
    let verts = tri.vertices();
    let w = tri.weights();
    if let Some(v) = (0..3).find(|&k| verts[k] == p) {
        return (len(vertex_pull(tri, v)) - w[v]).max(0.0);
    }
    let mut s = [0.0; 2];
    for k in 0..3 {
        let d = sub(verts[k], p);
        let l = len(d);
        s[0] += w[k] * d[0] / l;
        s[1] += w[k] * d[1] / l;
    }
    len(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteinerPoint {
    pub point: Point,
    /// Vertex index (0 = A, 1 = B, 2 = C) when the minimum sits on a vertex.
    pub vertex: Option<usize>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Tolerance of the vertex subgradient test.
pub const VERTEX_CAPTURE_TOL: f64 = 1e-10;

const STEINER_MAX_ITERATIONS: usize = 10_000;

/// Minimiser of the weighted distance sum: vertex capture by the subgradient
/// test, otherwise Weiszfeld iteration from the weighted centroid with Newton
/// steps accepted whenever they decrease the objective.
pub fn steiner_point(tri: &WeightedTriangle, tol: f64) -> Result<SteinerPoint> {
    tri.validate()?;
    let verts = tri.vertices();
    let w = tri.weights();
    let scale = w.iter().sum::<f64>();
    for v in 0..3 {
        if len(vertex_pull(tri, v)) <= w[v] + VERTEX_CAPTURE_TOL * scale {
            return Ok(SteinerPoint {
                point: verts[v],
                vertex: Some(v),
                residual: first_order_residual(verts[v], tri),
                iterations: 0,
                converged: true,
            });
        }
    }
    let mut p = [
        (0..3).map(|k| w[k] * verts[k][0]).sum::<f64>() / scale,
        (0..3).map(|k| w[k] * verts[k][1]).sum::<f64>() / scale,
    ];
    let mut iterations = 0;
    let mut residual = first_order_residual(p, tri);
    while residual > tol && iterations < STEINER_MAX_ITERATIONS {
        iterations += 1;
        let mut g = [0.0; 2];
        let mut hess = [0.0; 3];
        let (mut num, mut den) = ([0.0; 2], 0.0);
        for k in 0..3 {
            let d = sub(p, verts[k]);
            let l = len(d);
            let u = [d[0] / l, d[1] / l];
            g[0] += w[k] * u[0];
            g[1] += w[k] * u[1];
            hess[0] += w[k] * (1.0 - u[0] * u[0]) / l;
            hess[1] += w[k] * (-u[0] * u[1]) / l;
            hess[2] += w[k] * (1.0 - u[1] * u[1]) / l;
            num[0] += w[k] * verts[k][0] / l;
            num[1] += w[k] * verts[k][1] / l;
            den += w[k] / l;
        }
        let weiszfeld = [num[0] / den, num[1] / den];
        let det = hess[0] * hess[2] - hess[1] * hess[1];
        let mut next = weiszfeld;
        if det > 0.0 {
            let newton = [
                p[0] - (hess[2] * g[0] - hess[1] * g[1]) / det,
                p[1] - (hess[0] * g[1] - hess[1] * g[0]) / det,
            ];
            if !verts.contains(&newton) && tri.objective(newton) <= tri.objective(weiszfeld) {
                next = newton;
            }
        }
        if verts.contains(&next) {
            break;
        }
        p = next;
        residual = first_order_residual(p, tri);
    }
    Ok(SteinerPoint {
        point: p,
        vertex: None,
        residual,
        iterations,
        converged: residual <= tol,
    })
}

/// Sector angles `theta_i = pi - hat theta_i` at a triple junction, where the
/// `hat theta` are the angles of the triangle with sides `e23, e13, e12`
/// opposite to vertices 1, 2, 3.
pub fn young_angles(e12: f64, e13: f64, e23: f64) -> Result<[f64; 3]> {
    let sides = [e23, e13, e12];
    if sides.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidArgument(format!("surface tensions {sides:?} must be positive")));
    }
    for k in 0..3 {
        if sides[k] >= sides[(k + 1) % 3] + sides[(k + 2) % 3] {
            return Err(Error::TriangleInequality(sides[k], sides[(k + 1) % 3], sides[(k + 2) % 3]));
        }
    }
    let mut out = [0.0; 3];
    for k in 0..3 {
        let (a, b, c) = (sides[k], sides[(k + 1) % 3], sides[(k + 2) % 3]);
        let hat = ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0).acos();
        out[k] = PI - hat;
    }
    Ok(out)
}

/// A straight interface piece in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Piece {
    Segment { endpoints: [Point; 2] },
    Ray { origin: Point, direction: Point },
}

impl Piece {
    /// Start point, unit direction and length (infinite for rays).
    fn arclength_form(&self) -> (Point, Point, f64) {
        match *self {
            Piece::Segment { endpoints: [a, b] } => {
                let d = sub(b, a);
                let l = len(d);
                (a, [d[0] / l, d[1] / l], l)
            }
            Piece::Ray { origin, direction } => {
                let l = len(direction);
                (origin, [direction[0] / l, direction[1] / l], f64::INFINITY)
            }
        }
    }

    /// Parameter interval `[s0, s1]` (arclength) of the part inside the closed disk.
    fn clip(&self, centre: Point, radius: f64) -> Option<(Point, Point, f64, f64)> {
        let (o, u, l) = self.arclength_form();
        let q = sub(o, centre);
        let b = dot2(u, q);
        let c = dot2(q, q) - radius * radius;
        let disc = b * b - c;
        if disc <= 0.0 {
            return None;
        }
        let root = disc.sqrt();
        let (s0, s1) = ((-b - root).max(0.0), (-b + root).min(l));
        (s1 > s0).then_some((o, u, s0, s1))
    }

    /// Length of the part inside the closed disk.
    pub fn length_in_disk(&self, centre: Point, radius: f64) -> f64 {
        self.clip(centre, radius).map_or(0.0, |(_, _, s0, s1)| s1 - s0)
    }

    /// The part inside the disk as a segment.
    pub fn clipped(&self, centre: Point, radius: f64) -> Option<[Point; 2]> {
        self.clip(centre, radius).map(|(o, u, s0, s1)| {
            [
                [o[0] + s0 * u[0], o[1] + s0 * u[1]],
                [o[0] + s1 * u[0], o[1] + s1 * u[1]],
            ]
        })
    }

    /// Image under `y -> x0 + mu (y - x0)`.
    pub fn dilate(&self, x0: Point, mu: f64) -> Piece {
        let map = |y: Point| [x0[0] + mu * (y[0] - x0[0]), x0[1] + mu * (y[1] - x0[1])];
        match *self {
            Piece::Segment { endpoints: [a, b] } => Piece::Segment {
                endpoints: [map(a), map(b)],
            },
            Piece::Ray { origin, direction } => Piece::Ray {
                origin: map(origin),
                direction,
            },
        }
    }

    pub fn translate(&self, by: Point) -> Piece {
        let map = |y: Point| [y[0] + by[0], y[1] + by[1]];
        match *self {
            Piece::Segment { endpoints: [a, b] } => Piece::Segment {
                endpoints: [map(a), map(b)],
            },
            Piece::Ray { origin, direction } => Piece::Ray {
                origin: map(origin),
                direction,
            },
        }
    }

    fn distance_to(&self, p: Point) -> f64 {
        let (o, u, l) = self.arclength_form();
        let s = dot2(sub(p, o), u).clamp(0.0, l);
        len(sub(p, [o[0] + s * u[0], o[1] + s * u[1]]))
    }

    /// Endpoints at which the piece starts (segments have two).
    fn ends(&self) -> Vec<(Point, Point)> {
        match *self {
            Piece::Segment { endpoints: [a, b] } => vec![(a, sub(b, a)), (b, sub(a, b))],
            Piece::Ray { origin, direction } => vec![(origin, direction)],
        }
    }
}

/// An interface piece separating `phase_i` from `phase_j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interface {
    pub phase_i: usize,
    pub phase_j: usize,
    pub piece: Piece,
}

/// Planar partition represented by its tagged interface pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonalPartition {
    pub phases: usize,
    pub interfaces: Vec<Interface>,
    #[serde(default)]
    pub junctions: Vec<Point>,
}

const POINT_TOL: f64 = 1e-12;

impl PolygonalPartition {
    /// Checks labels and pieces, and that the pieces meeting at each declared
    /// junction alternate consistently around it.
    pub fn new(phases: usize, interfaces: Vec<Interface>, junctions: Vec<Point>) -> Result<Self> {
        let part = Self {
            phases,
            interfaces,
            junctions,
        };
        part.validate()?;
        Ok(part)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let part: Self = serde_json::from_str(text)?;
        part.validate()?;
        Ok(part)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, f) in self.interfaces.iter().enumerate() {
            if f.phase_i == f.phase_j || f.phase_i >= self.phases || f.phase_j >= self.phases {
                return Err(Error::InvalidArgument(format!(
                    "interface {k} has labels ({}, {}) for {} phases",
                    f.phase_i, f.phase_j, self.phases
                )));
            }
            let degenerate = match f.piece {
                Piece::Segment { endpoints: [a, b] } => len(sub(a, b)) == 0.0,
                Piece::Ray { direction, .. } => len(direction) == 0.0,
            };
            let finite = match f.piece {
                Piece::Segment { endpoints } => endpoints.iter().flatten().all(|x| x.is_finite()),
                Piece::Ray { origin, direction } => origin.iter().chain(&direction).all(|x| x.is_finite()),
            };
            if degenerate || !finite {
                return Err(Error::InvalidArgument(format!("interface {k} is degenerate")));
            }
        }
        for &j in &self.junctions {
            self.check_junction(j)?;
        }
        Ok(())
    }

    fn check_junction(&self, j: Point) -> Result<()> {
        let mut spokes: Vec<(f64, usize, usize)> = Vec::new();
        for f in &self.interfaces {
            for (p, d) in f.piece.ends() {
                if len(sub(p, j)) <= POINT_TOL {
                    spokes.push((d[1].atan2(d[0]), f.phase_i, f.phase_j));
                }
            }
        }
        if spokes.len() < 2 {
            return Err(Error::InvalidArgument(format!("junction {j:?} has fewer than two interfaces")));
        }
        spokes.sort_by(|a, b| a.0.total_cmp(&b.0));
        // look for sector labels s_0.. with spoke i+1 separating s_i from s_{i+1}
        let k = spokes.len();
        let other = |spoke: (f64, usize, usize), label: usize| {
            if spoke.1 == label {
                Some(spoke.2)
            } else if spoke.2 == label {
                Some(spoke.1)
            } else {
                None
            }
        };
        let consistent = [spokes[0].1, spokes[0].2].iter().any(|&first| {
            let mut label = first;
            for s in 1..=k {
                match other(spokes[s % k], label) {
                    Some(next) => label = next,
                    None => return false,
                }
            }
            label == first
        });
        if !consistent {
            return Err(Error::InvalidArgument(format!("inconsistent labels around junction {j:?}")));
        }
        Ok(())
    }

    /// Total interface length inside the closed disk.
    pub fn mass_in_disk(&self, centre: Point, radius: f64) -> f64 {
        self.interfaces.iter().map(|f| f.piece.length_in_disk(centre, radius)).sum()
    }

    /// `y -> x0 + mu (y - x0)` applied to every piece and junction.
    pub fn dilate(&self, x0: Point, mu: f64) -> PolygonalPartition {
        PolygonalPartition {
            phases: self.phases,
            interfaces: self
                .interfaces
                .iter()
                .map(|f| Interface {
                    piece: f.piece.dilate(x0, mu),
                    ..*f
                })
                .collect(),
            junctions: self
                .junctions
                .iter()
                .map(|y| [x0[0] + mu * (y[0] - x0[0]), x0[1] + mu * (y[1] - x0[1])])
                .collect(),
        }
    }

    /// Distance from `p` to the union of the interfaces.
    pub fn distance_to(&self, p: Point) -> f64 {
        self.interfaces
            .iter()
            .map(|f| f.piece.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `sum e_ij length(I_ij within the disk)`.
pub fn partition_energy(part: &PolygonalPartition, e: &TensionMatrix, centre: Point, radius: f64) -> Result<f64> {
    let mut total = 0.0;
    for (k, f) in part.interfaces.iter().enumerate() {
        if f.phase_i >= e.phases() || f.phase_j >= e.phases() || f.phase_i == f.phase_j {
            return Err(Error::InvalidArgument(format!(
                "interface {k} labels ({}, {}) are not covered by the tension matrix",
                f.phase_i, f.phase_j
            )));
        }
        total += e.get(f.phase_i, f.phase_j) * f.piece.length_in_disk(centre, radius);
    }
    Ok(total)
}

/// Density `M(S within B_r(x)) / (2 r)`.
pub fn density(part: &PolygonalPartition, x: Point, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius {r} must be positive")));
    }
    Ok(part.mass_in_disk(x, r) / (2.0 * r))
}

/// A ray of a cone, separating the sectors on either side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeRay {
    pub direction: Point,
    pub phase_i: usize,
    pub phase_j: usize,
}

/// Cone of rays from `x0`.
pub fn make_cone(x0: Point, phases: usize, rays: &[ConeRay]) -> Result<PolygonalPartition> {
    if rays.len() < 2 {
        return Err(Error::InvalidArgument("a cone needs at least two rays".into()));
    }
    let angles: Vec<f64> = rays.iter().map(|r| r.direction[1].atan2(r.direction[0])).collect();
    for a in 0..rays.len() {
        for b in a + 1..rays.len() {
            let diff = (angles[a] - angles[b]).rem_euclid(2.0 * PI);
            if diff < 1e-12 || 2.0 * PI - diff < 1e-12 {
                return Err(Error::InvalidArgument("cone rays must be distinct".into()));
            }
        }
    }
    let interfaces = rays
        .iter()
        .map(|r| Interface {
            phase_i: r.phase_i,
            phase_j: r.phase_j,
            piece: Piece::Ray {
                origin: x0,
                direction: r.direction,
            },
        })
        .collect();
    PolygonalPartition::new(phases, interfaces, if rays.len() >= 3 { vec![x0] } else { Vec::new() })
}

/// Cone with rays at `angles` (counterclockwise) and `labels[k]` on the sector
/// from ray `k` to ray `k + 1`.
pub fn cone_from_sectors(x0: Point, angles: &[f64], labels: &[usize]) -> Result<PolygonalPartition> {
    if angles.len() != labels.len() {
        return Err(Error::InvalidArgument("one label per sector".into()));
    }
    let k = angles.len();
    let phases = labels.iter().max().map_or(0, |m| m + 1);
    let rays: Vec<ConeRay> = (0..k)
        .map(|s| ConeRay {
            direction: [angles[s].cos(), angles[s].sin()],
            phase_i: labels[(s + k - 1) % k],
            phase_j: labels[s],
        })
        .collect();
    make_cone(x0, phases, &rays)
}

/// Straight line through `x0` along `angle` between phases 0 and 1.
pub fn line(x0: Point, angle: f64) -> Result<PolygonalPartition> {
    cone_from_sectors(x0, &[angle, angle + PI], &[0, 1])
}

/// Symmetric triod centred at `x0` with phases 0, 1, 2.
pub fn triod(x0: Point) -> Result<PolygonalPartition> {
    cone_from_sectors(x0, &[PI / 2.0, PI / 2.0 + 2.0 * PI / 3.0, PI / 2.0 + 4.0 * PI / 3.0], &[0, 1, 2])
}

/// X-shaped cone at the origin with rays at 60, 120, 240 and 300 degrees and
/// sectors labelled 0 (top), 2 (left), 1 (bottom), 2 (right).
pub fn x_cone() -> Result<PolygonalPartition> {
    let deg = PI / 180.0;
    cone_from_sectors([0.0, 0.0], &[60.0 * deg, 120.0 * deg, 240.0 * deg, 300.0 * deg], &[0, 2, 1, 2])
}

/// Two triple junctions at `(-s/2, 0)` and `(s/2, 0)` joined by a 0|1
/// segment, each sending two rays at 120 degrees into phase 2, which therefore
/// appears on both sides.
pub fn double_junction(s: f64) -> Result<PolygonalPartition> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("junction separation {s} must be positive")));
    }
    let (l, r) = ([-0.5 * s, 0.0], [0.5 * s, 0.0]);
    let dir = |deg: f64| [(deg * PI / 180.0).cos(), (deg * PI / 180.0).sin()];
    let ray = |origin: Point, deg: f64, i: usize, j: usize| Interface {
        phase_i: i,
        phase_j: j,
        piece: Piece::Ray {
            origin,
            direction: dir(deg),
        },
    };
    let interfaces = vec![
        Interface {
            phase_i: 0,
            phase_j: 1,
            piece: Piece::Segment { endpoints: [l, r] },
        },
        ray(l, 120.0, 0, 2),
        ray(l, 240.0, 2, 1),
        ray(r, 60.0, 0, 2),
        ray(r, 300.0, 2, 1),
    ];
    PolygonalPartition::new(3, interfaces, vec![l, r])
}

/// Competitor for [`double_junction`] inside the disk of radius `radius`
/// about the origin: same phases on the circle, phase 2 reconnected, phases 0
/// and 1 cut off by the chords joining their boundary points.
pub fn reconnected_competitor(s: f64, radius: f64) -> Result<PolygonalPartition> {
    let two = double_junction(s)?;
    let exits: Vec<Point> = two.interfaces[1..]
        .iter()
        .map(|f| {
            f.piece
                .clipped([0.0, 0.0], radius)
                .map(|seg| seg[1])
                .ok_or_else(|| Error::InvalidArgument(format!("radius {radius} does not reach the rays")))
        })
        .collect::<Result<_>>()?;
    if radius <= 0.5 * s {
        return Err(Error::InvalidArgument(format!("radius {radius} must exceed half the separation")));
    }
    // exits: left 120, left 240, right 60, right 300
    let interfaces = vec![
        Interface {
            phase_i: 0,
            phase_j: 2,
            piece: Piece::Segment {
                endpoints: [exits[0], exits[2]],
            },
        },
        Interface {
            phase_i: 2,
            phase_j: 1,
            piece: Piece::Segment {
                endpoints: [exits[1], exits[3]],
            },
        },
    ];
    PolygonalPartition::new(3, interfaces, Vec::new())
}

/// Rescalings `D_mu(S - x0)` for each `mu` (decreasing positive scales).
pub fn blow_down(part: &PolygonalPartition, x0: Point, scales: &[f64]) -> Result<Vec<PolygonalPartition>> {
    if scales.iter().any(|m| !(*m > 0.0)) || scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("scales must be positive and decreasing".into()));
    }
    let shift = [-x0[0], -x0[1]];
    Ok(scales
        .iter()
        .map(|&mu| {
            let moved = PolygonalPartition {
                phases: part.phases,
                interfaces: part
                    .interfaces
                    .iter()
                    .map(|f| Interface {
                        piece: f.piece.translate(shift),
                        ..*f
                    })
                    .collect(),
                junctions: part.junctions.iter().map(|j| [j[0] + shift[0], j[1] + shift[1]]).collect(),
            };
            moved.dilate([0.0, 0.0], mu)
        })
        .collect())
}

/// Hausdorff distance between the interface sets of `a` and `b` intersected
/// with the closed disk, sampling each clipped piece at spacing `resolution`.
pub fn hausdorff_distance(
    a: &PolygonalPartition,
    b: &PolygonalPartition,
    centre: Point,
    radius: f64,
    resolution: f64,
) -> f64 {
    let clip = |p: &PolygonalPartition| -> Vec<Piece> {
        p.interfaces
            .iter()
            .filter_map(|f| f.piece.clipped(centre, radius))
            .map(|endpoints| Piece::Segment { endpoints })
            .collect()
    };
    let (ca, cb) = (clip(a), clip(b));
    let one_sided = |from: &[Piece], to: &[Piece]| -> f64 {
        let mut worst = 0.0f64;
        for piece in from {
            let Piece::Segment { endpoints: [p, q] } = *piece else {
                continue;
            };
            let steps = ((len(sub(q, p)) / resolution).ceil() as usize).max(1);
            for k in 0..=steps {
                let t = k as f64 / steps as f64;
                let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
                let d = to.iter().map(|s| s.distance_to(x)).fold(f64::INFINITY, f64::min);
                worst = worst.max(d);
            }
        }
        worst
    };
    match (ca.is_empty(), cb.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => one_sided(&ca, &cb).max(one_sided(&cb, &ca)),
    }
}

/// Polygonal interfaces of a 2D field labelled by nearest well: in every grid
/// cell, crossings on the cell edges (where the two nearest-well distances are
/// equal, by linear interpolation) are joined directly, or through the cell
/// centre when more than one pair of labels meets.
pub fn from_labeled_field(field: &VectorField, wells: &[Vec<f64>]) -> Result<PolygonalPartition> {
    let grid = *field.grid();
    if grid.dim() != 2 {
        return Err(Error::InvalidArgument("labelled fields must be two-dimensional".into()));
    }
    if wells.len() < 2 || wells.iter().any(|w| w.len() != field.value_dim()) {
        return Err(Error::InvalidArgument("need at least two wells of the field's dimension".into()));
    }
    let label_of = |idx: usize| {
        let u = field.at(idx);
        (0..wells.len())
            .min_by(|&a, &b| dist(u, &wells[a]).total_cmp(&dist(u, &wells[b])))
            .expect("wells are nonempty")
    };
    let labels: Vec<usize> = (0..grid.len()).map(label_of).collect();
    let p = grid.points();
    let mut interfaces = Vec::new();
    for j in 0..p - 1 {
        for i in 0..p - 1 {
            let corners = [
                grid.flat_index(&[i, j]),
                grid.flat_index(&[i + 1, j]),
                grid.flat_index(&[i + 1, j + 1]),
                grid.flat_index(&[i, j + 1]),
            ];
            let mut crossings: Vec<(Point, usize, usize)> = Vec::new();
            for e in 0..4 {
                let (n0, n1) = (corners[e], corners[(e + 1) % 4]);
                let (l0, l1) = (labels[n0], labels[n1]);
                if l0 == l1 {
                    continue;
                }
                let phi = |idx: usize| dist(field.at(idx), &wells[l0]) - dist(field.at(idx), &wells[l1]);
                let (f0, f1) = (phi(n0), phi(n1));
                let t = if f1 != f0 { (f0 / (f0 - f1)).clamp(0.0, 1.0) } else { 0.5 };
                let (x0, x1) = (grid.coords(n0), grid.coords(n1));
                crossings.push((
                    [x0[0] + t * (x1[0] - x0[0]), x0[1] + t * (x1[1] - x0[1])],
                    l0.min(l1),
                    l0.max(l1),
                ));
            }
            match crossings.len() {
                0 => {}
                2 if (crossings[0].1, crossings[0].2) == (crossings[1].1, crossings[1].2) => {
                    if crossings[0].0 == crossings[1].0 {
                        continue;
                    }
                    interfaces.push(Interface {
                        phase_i: crossings[0].1,
                        phase_j: crossings[0].2,
                        piece: Piece::Segment {
                            endpoints: [crossings[0].0, crossings[1].0],
                        },
                    });
                }
                k => {
                    let c = [
                        crossings.iter().map(|x| x.0[0]).sum::<f64>() / k as f64,
                        crossings.iter().map(|x| x.0[1]).sum::<f64>() / k as f64,
                    ];
                    for (x, a, b) in crossings {
                        if len(sub(x, c)) > 0.0 {
                            interfaces.push(Interface {
                                phase_i: a,
                                phase_j: b,
                                piece: Piece::Segment { endpoints: [x, c] },
                            });
                        }
                    }
                }
            }
        }
    }
    PolygonalPartition::new(wells.len(), interfaces, Vec::new())
}
