//! Finite reflection groups acting on R^d (d <= 3), their chambers, point
//! stabilizers and orbits, and the partition of space into copies of the
//! region attached to a base well.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::linalg::{dot, mat_vec, norm};

/// Entry tolerance used to identify two matrices during closure.
pub const MATRIX_TOL: f64 = 1e-9;
const MAX_ORDER: usize = 48;

/// A finite group of orthogonal matrices generated by reflections.
///
/// Matrices are stored row-major. The element list always starts with the
/// identity and is closed under products.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionGroup {
    name: String,
    dimension: usize,
    generators: Vec<Vec<f64>>,
    elements: Vec<Vec<f64>>,
}

fn matrix_key(m: &[f64]) -> Vec<i64> {
    m.iter().map(|x| (x / MATRIX_TOL).round() as i64).collect()
}

/// Lexicographic order on row-major entries rounded to [`MATRIX_TOL`].
pub fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    matrix_key(a).cmp(&matrix_key(b))
}

fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

fn mat_mul(d: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..d {
                c[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    c
}

fn transpose(d: usize, a: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            t[j * d + i] = a[i * d + j];
        }
    }
    t
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn determinant(d: usize, m: &[f64]) -> f64 {
    match d {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => nalgebra::DMatrix::from_row_slice(d, d, m).determinant(),
    }
}

/// Householder reflection `I - 2 n n^T / |n|^2` across the hyperplane normal to `n`.
pub fn householder(normal: &[f64]) -> Vec<f64> {
    let d = normal.len();
    let nn = dot(normal, normal);
    let mut m = identity(d);
    for i in 0..d {
        for j in 0..d {
            m[i * d + j] -= 2.0 * normal[i] * normal[j] / nn;
        }
    }
    m
}

impl ReflectionGroup {
    /// Generates the group by closing the generator set under multiplication.
    pub fn from_generators(name: &str, dimension: usize, generators: Vec<Vec<f64>>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        for g in &generators {
            if g.len() != dimension * dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension * dimension,
                    found: g.len(),
                });
            }
        }
        let mut elements = vec![identity(dimension)];
        let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
        index.insert(matrix_key(&elements[0]), 0);
        let mut cursor = 0;
        while cursor < elements.len() {
            for g in &generators {
                let p = mat_mul(dimension, g, &elements[cursor]);
                let key = matrix_key(&p);
                if !index.contains_key(&key) {
                    if elements.len() >= MAX_ORDER {
                        return Err(Error::InvalidArgument(format!(
                            "group '{name}' exceeds the supported order {MAX_ORDER}"
                        )));
                    }
                    index.insert(key, elements.len());
                    elements.push(p);
                }
            }
            cursor += 1;
        }
        let group = Self {
            name: name.to_string(),
            dimension,
            generators,
            elements,
        };
        group.validate()?;
        Ok(group)
    }

    /// Dihedral group of the regular k-gon: reflections across lines at angles 0 and pi/k.
    pub fn dihedral(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("dihedral order k = {k} must be >= 2")));
        }
        let line = |theta: f64| {
            let (s, c) = (2.0 * theta).sin_cos();
            vec![c, s, s, -c]
        };
        Self::from_generators(&format!("dihedral-{k}"), 2, vec![line(0.0), line(PI / k as f64)])
    }

    /// Full symmetry group of the regular tetrahedron with vertices
    /// `(+-sqrt(2/3), 0, 1/sqrt(3))`, `(0, +-sqrt(2/3), -1/sqrt(3))`.
    pub fn tetrahedral() -> Self {
        let v = tetrahedron_vertices();
        let diff = |i: usize, j: usize| -> Vec<f64> { (0..3).map(|k| v[i][k] - v[j][k]).collect() };
        let gens = vec![householder(&diff(0, 1)), householder(&diff(1, 2)), householder(&diff(2, 3))];
        Self::from_generators("tetrahedral", 3, gens).expect("tetrahedral generators are valid")
    }

    /// Hyperoctahedral group of the cube: all 48 signed permutation matrices.
    pub fn cubic() -> Self {
        let gens = vec![
            householder(&[1.0, 0.0, 0.0]),
            householder(&[1.0, -1.0, 0.0]),
            householder(&[0.0, 1.0, -1.0]),
        ];
        Self::from_generators("cubic", 3, gens).expect("cubic generators are valid")
    }

    /// Two-element group generated by a single reflection.
    pub fn single_reflection(name: &str, normal: &[f64]) -> Result<Self> {
        Self::from_generators(name, normal.len(), vec![householder(normal)])
    }

    /// Looks a catalog group up by name (`dihedral-<k>`, `tetrahedral`, `cubic`).
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "tetrahedral" => Ok(Self::tetrahedral()),
            "cubic" => Ok(Self::cubic()),
            other => {
                if let Some(k) = other.strip_prefix("dihedral-") {
                    let k: usize = k
                        .parse()
                        .map_err(|_| Error::InvalidArgument(format!("bad dihedral order in '{other}'")))?;
                    Self::dihedral(k)
                } else {
                    Err(Error::InvalidArgument(format!("unknown group '{other}'")))
                }
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, i: usize) -> &[f64] {
        &self.elements[i]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[f64]> {
        self.elements.iter().map(|e| e.as_slice())
    }

    pub fn generators(&self) -> impl Iterator<Item = &[f64]> {
        self.generators.iter().map(|e| e.as_slice())
    }

    /// Applies element `i` to `x`.
    pub fn apply(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dimension];
        mat_vec(&self.elements[i], x, &mut y);
        y
    }

    /// Index of the element equal to `m` (within [`MATRIX_TOL`]).
    pub fn find(&self, m: &[f64]) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| max_abs_diff(e, m) <= MATRIX_TOL)
    }

    /// Checks orthogonality, closure under products and inverses, and that
    /// generators are reflections.
    pub fn validate(&self) -> Result<()> {
        let d = self.dimension;
        let id = identity(d);
        for (i, g) in self.elements.iter().enumerate() {
            if g.len() != d * d {
                return Err(Error::DimensionMismatch {
                    expected: d * d,
                    found: g.len(),
                });
            }
            let gtg = mat_mul(d, &transpose(d, g), g);
            if max_abs_diff(&gtg, &id) > 1e-12 {
                return Err(Error::InvalidArgument(format!("element {i} is not orthogonal")));
            }
        }
        if self.find(&id).is_none() {
            return Err(Error::InvalidArgument("identity missing".into()));
        }
        for g in &self.elements {
            if self.find(&transpose(d, g)).is_none() {
                return Err(Error::InvalidArgument("not closed under inverses".into()));
            }
            for h in &self.elements {
                if self.find(&mat_mul(d, g, h)).is_none() {
                    return Err(Error::InvalidArgument("not closed under products".into()));
                }
            }
        }
        for (i, r) in self.generators.iter().enumerate() {
            if max_abs_diff(&mat_mul(d, r, r), &id) > 1e-12 || (determinant(d, r) + 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("generator {i} is not a reflection")));
            }
            if self.find(r).is_none() {
                return Err(Error::InvalidArgument(format!("generator {i} is not an element")));
            }
        }
        Ok(())
    }

    /// Indices of the elements that are reflections.
    pub fn reflections(&self) -> Vec<usize> {
        let d = self.dimension;
        let id = identity(d);
        (0..self.order())
            .filter(|&i| {
                let r = &self.elements[i];
                max_abs_diff(&mat_mul(d, r, r), &id) < 1e-9 && (determinant(d, r) + 1.0).abs() < 1e-9
            })
            .collect()
    }

    /// Unit normal of the mirror of reflection element `i`.
    pub fn mirror_normal(&self, i: usize) -> Vec<f64> {
        let d = self.dimension;
        let r = &self.elements[i];
        // (I - r) / 2 = n n^T
        let mut best = vec![0.0; d];
        let mut best_norm = -1.0;
        for j in 0..d {
            let col: Vec<f64> = (0..d)
                .map(|k| (if k == j { 1.0 } else { 0.0 } - r[k * d + j]) * 0.5)
                .collect();
            let nc = norm(&col);
            if nc > best_norm {
                best_norm = nc;
                best = col;
            }
        }
        best.iter().map(|x| x / best_norm).collect()
    }

    /// Subgroup of elements moving `p` by at most `tol`.
    pub fn stabilizer(&self, p: &[f64], tol: f64) -> ReflectionGroup {
        let d = self.dimension;
        let mut y = vec![0.0; d];
        let elements: Vec<Vec<f64>> = self
            .elements
            .iter()
            .filter(|g| {
                mat_vec(g, p, &mut y);
                crate::linalg::dist(&y, p) <= tol
            })
            .cloned()
            .collect();
        let id = identity(d);
        let generators = elements
            .iter()
            .filter(|r| {
                max_abs_diff(&mat_mul(d, r, r), &id) < 1e-9 && (determinant(d, r) + 1.0).abs() < 1e-9
            })
            .cloned()
            .collect();
        ReflectionGroup {
            name: format!("{}-stabilizer", self.name),
            dimension: d,
            generators,
            elements,
        }
    }

    /// Distinct images `g p`, in element order of first appearance.
    pub fn orbit(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let mut pts: Vec<Vec<f64>> = Vec::new();
        for i in 0..self.order() {
            let q = self.apply(i, p);
            if !pts.iter().any(|x| max_abs_diff(x, &q) <= MATRIX_TOL) {
                pts.push(q);
            }
        }
        pts
    }

    /// Number of distinct points in the orbit of `p`.
    pub fn orbit_count(&self, p: &[f64]) -> usize {
        self.orbit(p).len()
    }

    /// The chamber of the mirror arrangement containing `reference`.
    pub fn fundamental_region(&self, reference: &[f64]) -> Result<FundamentalRegion> {
        FundamentalRegion::chamber(self, reference)
    }

    /// Chamber containing a fixed generic point. For the dihedral groups this is
    /// the sector `0 < angle < pi/k`; for the cube it is `0 < x1 < x2 < x3`.
    pub fn default_fundamental_region(&self) -> Result<FundamentalRegion> {
        let reference: Vec<f64> = match self.dimension {
            1 => vec![1.0],
            2 => {
                let k = (self.order() / 2).max(1) as f64;
                let a = PI / (2.0 * k) * 0.977;
                vec![a.cos(), a.sin()]
            }
            _ => {
                let mut v = vec![0.0; self.dimension];
                for (i, x) in v.iter_mut().enumerate() {
                    *x = 0.1 + 0.2 * i as f64 + 0.0137 * (i * i) as f64;
                }
                v
            }
        };
        self.fundamental_region(&reference)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates a group written by [`ReflectionGroup::to_json`].
    pub fn from_json(s: &str) -> Result<Self> {
        let g: Self = serde_json::from_str(s)?;
        g.validate()?;
        Ok(g)
    }
}

/// Vertices of the regular tetrahedron used by the tetrahedral catalog entries.
pub fn tetrahedron_vertices() -> [[f64; 3]; 4] {
    let s = (2.0f64 / 3.0).sqrt();
    let t = 1.0 / 3.0f64.sqrt();
    [[s, 0.0, t], [-s, 0.0, t], [0.0, s, -t], [0.0, -s, -t]]
}

/// Open simplicial cone `{x : <x, n_w> > 0}` bounded by mirror hyperplanes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalRegion {
    walls: Vec<Vec<f64>>,
}

impl FundamentalRegion {
    fn chamber(group: &ReflectionGroup, reference: &[f64]) -> Result<Self> {
        let d = group.dimension();
        if reference.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: reference.len(),
            });
        }
        let scale = norm(reference).max(1e-300);
        let mut roots: Vec<Vec<f64>> = Vec::new();
        for r in group.reflections() {
            let mut n = group.mirror_normal(r);
            let s = dot(&n, reference) / scale;
            if s.abs() < 1e-9 {
                return Err(Error::InvalidArgument("reference point lies on a mirror".into()));
            }
            if s < 0.0 {
                n.iter_mut().for_each(|x| *x = -*x);
            }
            if !roots.iter().any(|m| max_abs_diff(m, &n) < 1e-9) {
                roots.push(n);
            }
        }
        let admissible = |t: &[f64]| roots.iter().all(|m| dot(t, m) >= -1e-9);
        let mut rays: Vec<Vec<f64>> = Vec::new();
        let mut push_ray = |t: Vec<f64>| {
            let nt = norm(&t);
            if nt < 1e-9 {
                return;
            }
            let t: Vec<f64> = t.iter().map(|x| x / nt).collect();
            if admissible(&t) && !rays.iter().any(|r| max_abs_diff(r, &t) < 1e-9) {
                rays.push(t);
            }
        };
        match d {
            1 => {}
            2 => {
                for n in &roots {
                    push_ray(vec![-n[1], n[0]]);
                    push_ray(vec![n[1], -n[0]]);
                }
            }
            3 => {
                for i in 0..roots.len() {
                    for j in i + 1..roots.len() {
                        let (a, b) = (&roots[i], &roots[j]);
                        let c = vec![
                            a[1] * b[2] - a[2] * b[1],
                            a[2] * b[0] - a[0] * b[2],
                            a[0] * b[1] - a[1] * b[0],
                        ];
                        push_ray(c.clone());
                        push_ray(c.iter().map(|x| -x).collect());
                    }
                }
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "chambers are only computed for d <= 3, got {d}"
                )))
            }
        }
        let mut walls: Vec<Vec<f64>> = if d == 1 {
            roots
        } else {
            roots
                .into_iter()
                .filter(|n| rays.iter().filter(|t| dot(t, n).abs() < 1e-9).count() >= d - 1)
                .collect()
        };
        walls.sort_by(|a, b| lex_cmp(a, b));
        Ok(Self { walls })
    }

    pub fn walls(&self) -> &[Vec<f64>] {
        &self.walls
    }

    /// Membership in the closed region, with slack `tol`.
    pub fn contains_closed(&self, x: &[f64], tol: f64) -> bool {
        self.walls.iter().all(|n| dot(x, n) >= -tol)
    }

    /// Membership in the open region, with margin `tol`.
    pub fn contains_open(&self, x: &[f64], tol: f64) -> bool {
        self.walls.iter().all(|n| dot(x, n) > tol)
    }
}

/// Coset label of a region `gD`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionLabel {
    /// Index into [`RegionMap::wells`].
    pub label: usize,
    /// Element index of the lexicographically smallest coset representative.
    pub representative: usize,
}

/// Translates `gD` of the region attached to the base well, one per coset of
/// the stabilizer.
///
/// `D` is the interior of the union of the stabilizer translates of the closed
/// chamber adjacent to the base well. Equivalently it is the Voronoi cell of
/// the base well among its orbit, which is how membership is evaluated.
#[derive(Clone, Debug)]
pub struct RegionMap {
    group: ReflectionGroup,
    base: Vec<f64>,
    stabilizer: ReflectionGroup,
    wells: Vec<Vec<f64>>,
    representatives: Vec<usize>,
    fundamental: FundamentalRegion,
}

impl RegionMap {
    pub fn new(group: &ReflectionGroup, base: &[f64]) -> Result<Self> {
        let d = group.dimension();
        if base.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: base.len(),
            });
        }
        let stabilizer = group.stabilizer(base, MATRIX_TOL);
        let mut cosets: Vec<(Vec<f64>, usize)> = Vec::new();
        for i in 0..group.order() {
            let w = group.apply(i, base);
            match cosets.iter_mut().find(|(p, _)| max_abs_diff(p, &w) <= MATRIX_TOL) {
                Some(entry) => {
                    if lex_cmp(group.element(i), group.element(entry.1)) == Ordering::Less {
                        entry.1 = i;
                    }
                }
                None => cosets.push((w, i)),
            }
        }
        cosets.sort_by(|a, b| lex_cmp(group.element(a.1), group.element(b.1)));
        let (wells, representatives): (Vec<_>, Vec<_>) = cosets.into_iter().unzip();

        let offsets = [
            [0.113, 0.271, 0.389],
            [0.307, -0.179, 0.241],
            [-0.221, 0.163, 0.347],
        ];
        let eps = 1e-3 * norm(base).max(1.0);
        let mut fundamental = None;
        for off in offsets {
            let reference: Vec<f64> = (0..d).map(|k| base[k] + eps * off[k]).collect();
            if let Ok(f) = group.fundamental_region(&reference) {
                if f.contains_closed(base, 1e-9) {
                    fundamental = Some(f);
                    break;
                }
            }
        }
        let fundamental = fundamental
            .ok_or_else(|| Error::InvalidArgument("could not find a chamber adjacent to the base point".into()))?;
        Ok(Self {
            group: group.clone(),
            base: base.to_vec(),
            stabilizer,
            wells,
            representatives,
            fundamental,
        })
    }

    pub fn group(&self) -> &ReflectionGroup {
        &self.group
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn stabilizer(&self) -> &ReflectionGroup {
        &self.stabilizer
    }

    /// Orbit of the base point; entry `k` is the well of region `k`.
    pub fn wells(&self) -> &[Vec<f64>] {
        &self.wells
    }

    pub fn region_count(&self) -> usize {
        self.wells.len()
    }

    pub fn representative(&self, label: usize) -> usize {
        self.representatives[label]
    }

    pub fn fundamental_region(&self) -> &FundamentalRegion {
        &self.fundamental
    }

    /// Label of the region containing the base well itself.
    pub fn base_label(&self) -> usize {
        self.wells
            .iter()
            .position(|w| max_abs_diff(w, &self.base) <= MATRIX_TOL)
            .expect("base point belongs to its own orbit")
    }

    /// Region containing `x`; points on walls go to the smallest representative.
    pub fn region_of(&self, x: &[f64]) -> RegionLabel {
        let scores: Vec<f64> = self.wells.iter().map(|w| dot(x, w)).collect();
        let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-12 * norm(x).max(1.0);
        // Labels are sorted by representative, so the first tie wins.
        let label = scores.iter().position(|s| *s >= best - tol).unwrap_or(0);
        RegionLabel {
            label,
            representative: self.representatives[label],
        }
    }

    /// Nearest competing region and the signed distance to the shared mirror,
    /// positive on the side of `label`.
    pub fn nearest_wall(&self, x: &[f64], label: usize) -> Option<(usize, f64)> {
        let w = &self.wells[label];
        let mut best: Option<(usize, f64)> = None;
        for (k, v) in self.wells.iter().enumerate() {
            if k == label {
                continue;
            }
            let n: Vec<f64> = w.iter().zip(v).map(|(a, b)| a - b).collect();
            let s = dot(x, &n) / norm(&n);
            if best.map_or(true, |(_, b)| s < b) {
                best = Some((k, s));
            }
        }
        best
    }

    /// Distance from `x` (inside region `label`) to the boundary of that region.
    pub fn distance_to_boundary(&self, x: &[f64], label: usize) -> f64 {
        self.nearest_wall(x, label).map_or(f64::INFINITY, |(_, s)| s)
    }
}

/// Paired representations of a finite group on the domain (R^n) and on the
/// values (R^m) of a field. For a reflection group acting on R^d both are the
/// group itself.
#[derive(Clone, Debug)]
pub struct GroupAction {
    n: usize,
    m: usize,
    space: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
}

impl GroupAction {
    pub fn new(n: usize, m: usize, space: Vec<Vec<f64>>, values: Vec<Vec<f64>>) -> Result<Self> {
        if space.len() != values.len() || space.is_empty() {
            return Err(Error::InvalidArgument(
                "space and value representations must list the same nonzero number of elements".into(),
            ));
        }
        for (s, v) in space.iter().zip(&values) {
            if s.len() != n * n {
                return Err(Error::DimensionMismatch {
                    expected: n * n,
                    found: s.len(),
                });
            }
            if v.len() != m * m {
                return Err(Error::DimensionMismatch {
                    expected: m * m,
                    found: v.len(),
                });
            }
        }
        Ok(Self { n, m, space, values })
    }

    pub fn from_group(group: &ReflectionGroup) -> Self {
        let elements: Vec<Vec<f64>> = group.elements().map(|e| e.to_vec()).collect();
        Self {
            n: group.dimension(),
            m: group.dimension(),
            space: elements.clone(),
            values: elements,
        }
    }

    /// `{id, T}` with `T x = x` reflected in coordinate `axis` and `T u = -u`,
    /// the odd symmetry of a scalar field across a hyperplane.
    pub fn odd_reflection(n: usize, axis: usize) -> Result<Self> {
        if axis >= n {
            return Err(Error::InvalidArgument(format!("axis {axis} out of range for n = {n}")));
        }
        let mut e = vec![0.0; n];
        e[axis] = 1.0;
        Self::new(n, 1, vec![identity(n), householder(&e)], vec![vec![1.0], vec![-1.0]])
    }

    pub fn order(&self) -> usize {
        self.space.len()
    }

    pub fn space_dim(&self) -> usize {
        self.n
    }

    pub fn value_dim(&self) -> usize {
        self.m
    }

    pub fn space(&self, i: usize) -> &[f64] {
        &self.space[i]
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    fn check(&self, field: &VectorField) -> Result<()> {
        if field.grid().dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: field.grid().dim(),
            });
        }
        if field.value_dim() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: field.value_dim(),
            });
        }
        Ok(())
    }
}

/// Averages `g^{-1} u(g x)` over the group. Interpolation is multilinear; for
/// nodes whose image `g x` leaves the box, only the in-box elements are
/// averaged.
pub fn symmetrize(field: &VectorField, group: &ReflectionGroup) -> Result<VectorField> {
    if group.dimension() != field.grid().dim() || field.value_dim() != field.grid().dim() {
        return Err(Error::InvalidArgument(format!(
            "symmetrization needs n = m = d, got n = {}, m = {}, d = {}",
            field.grid().dim(),
            field.value_dim(),
            group.dimension()
        )));
    }
    symmetrize_action(field, &GroupAction::from_group(group))
}

/// [`symmetrize`] for an arbitrary paired action.
pub fn symmetrize_action(field: &VectorField, action: &GroupAction) -> Result<VectorField> {
    action.check(field)?;
    let grid = *field.grid();
    let (n, m) = (action.n, action.m);
    let mut out = vec![0.0; field.values().len()];
    let mut y = vec![0.0; n];
    let mut v = vec![0.0; m];
    let mut w = vec![0.0; m];
    for idx in 0..grid.len() {
        let x = grid.coords(idx);
        let acc = &mut out[idx * m..(idx + 1) * m];
        let mut count = 0usize;
        for g in 0..action.order() {
            mat_vec(&action.space[g], &x, &mut y);
            if !field.interpolate(&y, &mut v) {
                continue;
            }
            // orthogonal value action: g^{-1} = g^T
            crate::linalg::mat_t_vec(&action.values[g], &v, &mut w);
            for (a, b) in acc.iter_mut().zip(&w) {
                *a += b;
            }
            count += 1;
        }
        let inv = 1.0 / count as f64;
        acc.iter_mut().for_each(|a| *a *= inv);
    }
    VectorField::new(grid, m, out)
}

/// Largest `|u(g x) - g u(x)|` over group elements and the nodes `x` in the
/// ball of radius `R - 2 h sqrt(n)`. Orbits of such nodes, and of the nodes
/// used to interpolate at their images, stay inside the box.
pub fn equivariance_residual(field: &VectorField, group: &ReflectionGroup) -> Result<f64> {
    equivariance_residual_action(field, &GroupAction::from_group(group))
}

pub fn equivariance_residual_action(field: &VectorField, action: &GroupAction) -> Result<f64> {
    action.check(field)?;
    let grid = field.grid();
    let (n, m) = (action.n, action.m);
    let mut y = vec![0.0; n];
    let mut v = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mut worst = 0.0f64;
    let radius = grid.half_width() - 2.0 * grid.spacing() * (n as f64).sqrt();
    for idx in 0..grid.len() {
        let x = grid.coords(idx);
        if norm(&x) > radius {
            continue;
        }
        for g in 0..action.order() {
            mat_vec(&action.space[g], &x, &mut y);
            if !field.interpolate(&y, &mut v) {
                continue;
            }
            mat_vec(&action.values[g], field.at(idx), &mut w);
            worst = worst.max(crate::linalg::dist(&v, &w));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn count_rotations(g: &ReflectionGroup) -> usize {
        g.elements()
            .filter(|m| (determinant(g.dimension(), m) - 1.0).abs() < 1e-9)
            .count()
    }

    #[test]
    fn dihedral_orders() {
        let d3 = ReflectionGroup::dihedral(3).unwrap();
        assert_eq!(d3.order(), 6);
        assert_eq!(d3.reflections().len(), 3);
        assert_eq!(count_rotations(&d3), 3);
        assert_eq!(ReflectionGroup::dihedral(2).unwrap().order(), 4);
        assert!(ReflectionGroup::dihedral(1).is_err());
        assert!(ReflectionGroup::dihedral(0).is_err());
    }

    #[test]
    fn dihedral_six_closure_table_by_brute_force() {
        let g = ReflectionGroup::dihedral(6).unwrap();
        assert_eq!(g.order(), 12);
        // every pairwise product lands in the set
        for a in g.elements() {
            for b in g.elements() {
                let p = mat_mul(2, a, b);
                assert_eq!(g.elements().filter(|e| max_abs_diff(e, &p) < 1e-9).count(), 1);
            }
        }
    }

    #[test]
    fn generators_are_reflections() {
        for g in [ReflectionGroup::tetrahedral(), ReflectionGroup::cubic()] {
            for r in g.generators() {
                assert!((determinant(3, r) + 1.0).abs() < 1e-12);
                assert!(max_abs_diff(&mat_mul(3, r, r), &identity(3)) < 1e-12);
            }
        }
    }

    #[test]
    fn tetrahedral_well_orbit_and_stabilizer() {
        let g = ReflectionGroup::tetrahedral();
        assert_eq!(g.order(), 24);
        let a1 = [(2.0f64 / 3.0).sqrt(), 0.0, 1.0 / 3.0f64.sqrt()];
        assert_eq!(g.orbit_count(&a1), 4);
        assert_eq!(g.stabilizer(&a1, 1e-9).order(), 6);
    }

    #[test]
    fn cubic_placements() {
        let g = ReflectionGroup::cubic();
        assert_eq!(g.order(), 48);
        let cases: [([f64; 3], usize); 6] = [
            ([0.0, 0.0, 0.0], 1),
            ([0.0, 0.0, 1.0], 6),
            ([1.0, 1.0, 1.0], 8),
            ([0.0, 1.0, 1.0], 12),
            ([0.0, 1.0, 2.0], 24),
            ([0.3, 0.7, 1.9], 48),
        ];
        for (p, n) in cases {
            assert_eq!(g.orbit_count(&p), n, "point {p:?}");
            assert_eq!(g.orbit_count(&p) * g.stabilizer(&p, 1e-9).order(), g.order());
        }
    }

    #[test]
    fn stabilizer_edge_cases() {
        let g = ReflectionGroup::cubic();
        assert_eq!(g.stabilizer(&[0.0; 3], 1e-12).order(), 48);
        let d3 = ReflectionGroup::dihedral(3).unwrap();
        let s = d3.stabilizer(&[0.37, 0.21], 1e-9);
        assert_eq!(s.order(), 1);
        assert!(s.generators().next().is_none());
        assert!(s.validate().is_ok());
    }

    #[test]
    fn cubic_default_chamber_is_the_sorted_simplex() {
        let f = ReflectionGroup::cubic().default_fundamental_region().unwrap();
        assert_eq!(f.walls().len(), 3);
        // vertices of the simplex 0 <= x1 <= x2 <= x3 lie in the closure
        for s in [[1.0, 1.0, 1.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]] {
            assert!(f.contains_closed(&s, 1e-12));
        }
        assert!(f.contains_open(&[0.1, 0.2, 0.3], 0.0));
        assert!(!f.contains_closed(&[0.2, 0.1, 0.3], 1e-12));
    }

    #[test]
    fn dihedral_chamber_is_sector() {
        let f = ReflectionGroup::dihedral(3).unwrap().default_fundamental_region().unwrap();
        assert_eq!(f.walls().len(), 2);
        let inside = PI / 6.0;
        assert!(f.contains_open(&[inside.cos(), inside.sin()], 0.0));
        let outside = PI / 3.0 + 0.01;
        assert!(!f.contains_closed(&[outside.cos(), outside.sin()], 0.0));
    }

    #[test]
    fn chamber_translates_tile_without_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for g in [
            ReflectionGroup::dihedral(3).unwrap(),
            ReflectionGroup::dihedral(4).unwrap(),
            ReflectionGroup::tetrahedral(),
            ReflectionGroup::cubic(),
        ] {
            let f = g.default_fundamental_region().unwrap();
            let d = g.dimension();
            for _ in 0..200 {
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let hits: Vec<usize> = (0..g.order())
                    .filter(|&i| f.contains_open(&g.apply(i, &x), 1e-12))
                    .collect();
                // generic points land in exactly one translate
                assert_eq!(hits.len(), 1, "group {}", g.name());
            }
        }
    }

    #[test]
    fn tetrahedral_region_map() {
        let g = ReflectionGroup::tetrahedral();
        let a1 = tetrahedron_vertices()[0];
        let map = RegionMap::new(&g, &a1).unwrap();
        assert_eq!(map.region_count(), 4);
        let base = map.base_label();
        assert_eq!(map.region_of(&a1).label, base);
        let s = (2.0f64 / 3.0).sqrt();
        let t = 1.0 / 3.0f64.sqrt();
        for v in [[0.0, s, t], [0.0, -s, t], [s, 0.0, -t]] {
            // generators of D; they sit on its boundary edges, so nudge toward a1
            let x: Vec<f64> = (0..3).map(|k| v[k] + 1e-6 * a1[k]).collect();
            assert_eq!(map.region_of(&x).label, base);
        }
        for k in 0..4 {
            let w = map.wells()[k].clone();
            let lab = map.region_of(&w);
            assert_eq!(lab.label, k);
            assert!(max_abs_diff(&g.apply(lab.representative, &a1), &w) < 1e-9);
        }
    }

    #[test]
    fn wall_points_resolve_to_smallest_representative() {
        let g = ReflectionGroup::dihedral(3).unwrap();
        let map = RegionMap::new(&g, &[1.0, 0.0]).unwrap();
        assert_eq!(map.region_count(), 3);
        let wall = [(PI / 3.0).cos(), (PI / 3.0).sin()];
        let lab = map.region_of(&wall);
        let tied: Vec<usize> = (0..3)
            .filter(|&k| {
                let s = dot(&wall, &map.wells()[k]);
                (s - 0.5).abs() < 1e-12
            })
            .collect();
        assert_eq!(tied.len(), 2);
        assert_eq!(lab.label, tied[0]);
        let rep = g.element(lab.representative);
        for &k in &tied[1..] {
            assert_eq!(lex_cmp(rep, g.element(map.representative(k))), Ordering::Less);
        }
    }

    #[test]
    fn json_roundtrip_validates() {
        let g = ReflectionGroup::tetrahedral();
        let s = g.to_json().unwrap();
        let back = ReflectionGroup::from_json(&s).unwrap();
        assert_eq!(back.order(), 24);
        let mut broken: serde_json::Value = serde_json::from_str(&s).unwrap();
        broken["elements"][1][0] = serde_json::json!(0.5);
        assert!(ReflectionGroup::from_json(&broken.to_string()).is_err());
    }

    use crate::field::Grid;

    #[test]
    fn linear_identity_field_is_fixed_by_symmetrization() {
        let g = ReflectionGroup::dihedral(3).unwrap();
        let grid = Grid::new(2, 2.0, 41).unwrap();
        let u = VectorField::from_fn(grid, 2, |x| x.to_vec()).unwrap();
        let s = symmetrize(&u, &g).unwrap();
        assert!(s.max_distance(&u) < 1e-12);
        assert!(equivariance_residual(&u, &g).unwrap() < 1e-12);
    }

    #[test]
    fn constant_field_averages_to_zero_under_full_groups() {
        for g in [ReflectionGroup::cubic(), ReflectionGroup::dihedral(4).unwrap()] {
            let d = g.dimension();
            let grid = Grid::new(d, 1.0, 7).unwrap();
            let c: Vec<f64> = (0..d).map(|k| 0.3 + k as f64).collect();
            let s = symmetrize(&VectorField::constant(grid, &c), &g).unwrap();
            assert!(s.sup_norm() < 1e-14);
        }
    }

    #[test]
    fn odd_scalar_field_is_equivariant_under_sign_flip() {
        let grid = Grid::new(2, 1.0, 11).unwrap();
        let act = GroupAction::odd_reflection(2, 0).unwrap();
        let u = VectorField::from_fn(grid, 1, |x| vec![x[0].sin() * (1.0 + x[1] * x[1])]).unwrap();
        assert_eq!(equivariance_residual_action(&u, &act).unwrap(), 0.0);
        let broken = VectorField::from_fn(grid, 1, |x| vec![x[0].sin() + 0.1]).unwrap();
        assert!(equivariance_residual_action(&broken, &act).unwrap() > 0.1);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let g = ReflectionGroup::dihedral(3).unwrap();
        let grid = Grid::new(2, 1.0, 5).unwrap();
        assert!(symmetrize(&VectorField::constant(grid, &[1.0]), &g).is_err());
    }

    #[test]
    fn symmetrization_error_is_second_order() {
        let g = ReflectionGroup::dihedral(3).unwrap();
        let f = |x: &[f64]| vec![(1.3 * x[0] + 0.4).sin() * x[1].cos(), (0.7 * x[1] - 0.2).cos() + x[0] * x[1]];
        let resid = |points: usize| {
            let grid = Grid::new(2, 1.0, points).unwrap();
            let s = symmetrize(&VectorField::from_fn(grid, 2, f).unwrap(), &g).unwrap();
            equivariance_residual(&s, &g).unwrap()
        };
        let (coarse, fine) = (resid(21), resid(41));
        assert!(coarse > 1e-6);
        assert!(coarse / fine > 3.0, "ratio {}", coarse / fine);
        let grid = Grid::new(2, 1.0, 41).unwrap();
        let s1 = symmetrize(&VectorField::from_fn(grid, 2, f).unwrap(), &g).unwrap();
        let s2 = symmetrize(&s1, &g).unwrap();
        let radius = 1.0 - 2.0 * grid.spacing() * 2f64.sqrt();
        let drift = (0..grid.len())
            .filter(|&i| norm(&grid.coords(i)) <= radius)
            .map(|i| crate::linalg::dist(s1.at(i), s2.at(i)))
            .fold(0.0, f64::max);
        assert!(drift < 1e-10 + 2.0 * fine, "drift {drift}, fine {fine}");
    }
}
