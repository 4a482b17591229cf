//! Uniform origin-centred box grids and vector fields sampled on them.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SNAP_TOL: f64 = 1e-9;

/// Box `[-R, R]^n` sampled with an odd number of points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    points: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!("grid dimension {dim} not in 1..=3")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!("half-width {half_width} must be positive")));
        }
        if points < 3 || points % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "points per axis must be odd and >= 3, got {points}"
            )));
        }
        Ok(Self {
            dim,
            half_width,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat-index stride of axis `k` (axis 0 varies fastest).
    pub fn stride(&self, k: usize) -> usize {
        self.points.pow(k as u32)
    }

    /// Coordinate of grid line `i` along any axis.
    pub fn axis_coord(&self, i: usize) -> f64 {
        // measured from the centre so that mirrored nodes get exactly negated coordinates
        (i as f64 - (self.points / 2) as f64) * self.spacing()
    }

    pub fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for o in out.iter_mut().take(self.dim) {
            *o = idx % self.points;
            idx /= self.points;
        }
        out
    }

    pub fn flat_index(&self, mi: &[usize]) -> usize {
        let mut idx = 0;
        for k in (0..self.dim).rev() {
            idx = idx * self.points + mi[k];
        }
        idx
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        let mi = self.multi_index(idx);
        (0..self.dim).map(|k| self.axis_coord(mi[k])).collect()
    }

    /// True if the node lies on the outer face of the box.
    pub fn is_boundary(&self, idx: usize) -> bool {
        let mi = self.multi_index(idx);
        (0..self.dim).any(|k| mi[k] == 0 || mi[k] == self.points - 1)
    }

    /// Number of grid lines between the node and the nearest outer face.
    pub fn depth(&self, idx: usize) -> usize {
        let mi = self.multi_index(idx);
        (0..self.dim)
            .map(|k| mi[k].min(self.points - 1 - mi[k]))
            .min()
            .unwrap_or(0)
    }

    /// Flat index of the node at the origin.
    pub fn origin(&self) -> usize {
        let c = self.points / 2;
        self.flat_index(&[c, c, c])
    }

    /// Flat index of the node exactly at `x`, if any.
    pub fn node_at(&self, x: &[f64]) -> Option<usize> {
        let h = self.spacing();
        let mut mi = [0usize; 3];
        for k in 0..self.dim {
            let t = (x[k] + self.half_width) / h;
            let r = t.round();
            if (t - r).abs() > SNAP_TOL || r < 0.0 || r > (self.points - 1) as f64 {
                return None;
            }
            mi[k] = r as usize;
        }
        Some(self.flat_index(&mi))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let lim = self.half_width * (1.0 + SNAP_TOL);
        x.iter().take(self.dim).all(|v| v.abs() <= lim)
    }
}

/// Node values of a map from the grid box into R^m, node-major.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    m: usize,
    values: Vec<f64>,
}

impl VectorField {
    pub fn new(grid: Grid, m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("value dimension must be positive".into()));
        }
        if values.len() != grid.len() * m {
            return Err(Error::DimensionMismatch {
                expected: grid.len() * m,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("field contains non-finite values".into()));
        }
        Ok(Self { grid, m, values })
    }

    pub fn from_fn(grid: Grid, m: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * m);
        for idx in 0..grid.len() {
            let v = f(&grid.coords(idx));
            if v.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: v.len(),
                });
            }
            values.extend_from_slice(&v);
        }
        Self::new(grid, m, values)
    }

    pub fn constant(grid: Grid, value: &[f64]) -> Self {
        let mut values = Vec::with_capacity(grid.len() * value.len());
        for _ in 0..grid.len() {
            values.extend_from_slice(value);
        }
        Self {
            grid,
            m: value.len(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn value_dim(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, idx: usize) -> &[f64] {
        &self.values[idx * self.m..(idx + 1) * self.m]
    }

    pub fn at_mut(&mut self, idx: usize) -> &mut [f64] {
        &mut self.values[idx * self.m..(idx + 1) * self.m]
    }

    /// Multilinear interpolation at `x`; returns false when `x` is outside the box.
    pub fn interpolate(&self, x: &[f64], out: &mut [f64]) -> bool {
        let g = &self.grid;
        let n = g.dim;
        let h = g.spacing();
        let last = g.points - 1;
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for k in 0..n {
            let mut t = (x[k] + g.half_width) / h;
            let r = t.round();
            if (t - r).abs() <= SNAP_TOL {
                t = r;
            }
            if t < 0.0 || t > last as f64 {
                return false;
            }
            let i0 = (t.floor() as usize).min(last - 1);
            base[k] = i0;
            frac[k] = t - i0 as f64;
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut idx = 0;
            for k in (0..n).rev() {
                let up = (corner >> k) & 1 == 1;
                w *= if up { frac[k] } else { 1.0 - frac[k] };
                idx = idx * g.points + base[k] + up as usize;
            }
            if w == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.at(idx)) {
                *o += w * v;
            }
        }
        true
    }

    pub fn sup_norm(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| crate::linalg::norm(self.at(i)))
            .fold(0.0, f64::max)
    }

    /// Largest pointwise Euclidean distance to another field on the same grid.
    pub fn max_distance(&self, other: &VectorField) -> f64 {
        (0..self.grid.len())
            .map(|i| crate::linalg::dist(self.at(i), other.at(i)))
            .fold(0.0, f64::max)
    }

    /// CSV with columns `x1..xn,u1..um`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.grid.dim;
        let mut s = String::new();
        let header: Vec<String> = (1..=n)
            .map(|k| format!("x{k}"))
            .chain((1..=self.m).map(|k| format!("u{k}")))
            .collect();
        s.push_str(&header.join(","));
        s.push('\n');
        for idx in 0..self.grid.len() {
            let x = self.grid.coords(idx);
            let mut first = true;
            for v in x.iter().chain(self.at(idx)) {
                if !first {
                    s.push(',');
                }
                first = false;
                write!(s, "{v:.16e}").expect("writing to a String cannot fail");
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    /// Parses a field written by [`VectorField::to_csv`], inferring the grid.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty field file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let n = cols.iter().take_while(|c| c.starts_with('x')).count();
        let m = cols.len() - n;
        for (k, c) in cols.iter().enumerate() {
            let expected = if k < n { format!("x{}", k + 1) } else { format!("u{}", k - n + 1) };
            if *c != expected {
                return Err(Error::Parse(format!("unexpected column '{c}', expected '{expected}'")));
            }
        }
        if n == 0 || m == 0 {
            return Err(Error::Parse("header must list coordinate and value columns".into()));
        }
        let mut coords = Vec::new();
        let mut values = Vec::new();
        for (row, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != n + m {
                return Err(Error::Parse(format!(
                    "row {} has {} columns, expected {}",
                    row + 2,
                    fields.len(),
                    n + m
                )));
            }
            for (k, f) in fields.iter().enumerate() {
                let v: f64 = f
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: bad number '{f}'", row + 2)))?;
                if k < n {
                    coords.push(v);
                } else {
                    values.push(v);
                }
            }
        }
        let nodes = coords.len() / n;
        let points = (nodes as f64).powf(1.0 / n as f64).round() as usize;
        if points.pow(n as u32) != nodes || nodes == 0 {
            return Err(Error::Parse(format!("{nodes} rows do not form a cubic grid in {n}D")));
        }
        let half_width = -coords[0];
        let grid = Grid::new(n, half_width, points).map_err(|e| Error::Parse(e.to_string()))?;
        let tol = 1e-12 * half_width.max(1.0);
        for idx in 0..nodes {
            let x = grid.coords(idx);
            for k in 0..n {
                if (x[k] - coords[idx * n + k]).abs() > tol {
                    return Err(Error::Parse(format!("row {} has unexpected coordinates", idx + 2)));
                }
            }
        }
        Self::new(grid, m, values).map_err(|e| Error::Parse(e.to_string()))
    }
}
