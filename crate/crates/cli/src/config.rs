//! Run configuration read from `--config <path>` (JSON).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use aclab::field::Grid;
use aclab::field_solver::{BoundaryMode, SolveOptions, StepRule};
use aclab::groups::ReflectionGroup;
use aclab::partitions::WeightedTriangle;
use aclab::potentials::PotentialSpec;

use crate::output::{usage, Failure};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional guard: when present it must match the subcommand.
    pub command: Option<String>,
    pub potential: Option<PotentialRef>,
    pub group: Option<String>,
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub connect: ConnectConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    pub field: Option<PathBuf>,
    #[serde(default)]
    pub steiner: SteinerConfig,
    pub partition: Option<PartitionConfig>,
    pub seed: Option<u64>,
}

/// A catalog name, or `{"path": "custom.json"}` pointing at a polynomial definition.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialRef {
    Name(String),
    Path { path: PathBuf },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "R")]
    pub half_width: f64,
    pub points: usize,
    pub dim: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub residual_target: Option<f64>,
    pub max_iterations: Option<usize>,
    pub k_sym: Option<usize>,
    pub symmetrize_until: Option<usize>,
    pub step_rule: Option<StepRule>,
    /// Step as a fraction of the explicit bound `h^2 / (2n)`.
    pub dt_fraction: Option<f64>,
    pub boundary: Option<BoundaryMode>,
    pub history_every: Option<usize>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConnectConfig {
    /// Indices into the potential's well list.
    pub minus: usize,
    pub plus: usize,
    pub half_length: Option<f64>,
    pub intervals: Option<usize>,
    pub tol: f64,
}

impl Default for ConnectConfig {
    fn default() -> Self {
        Self {
            minus: 0,
            plus: 1,
            half_length: None,
            intervals: None,
            tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub centre: Option<Vec<f64>>,
    pub monotonicity_radii: Option<Vec<f64>>,
    pub flux_radii: Option<Vec<f64>>,
    pub junction_radius: Option<f64>,
    /// Transverse range `[lo, hi]` of the Hamiltonian slices.
    pub hamiltonian_strip: Option<[f64; 2]>,
    /// Well whose region is used for the decay fit (index into the well list).
    pub decay_well: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteinerConfig {
    pub batch: Option<PathBuf>,
    /// Inline instances, used when no batch file is given.
    pub triangles: Vec<WeightedTriangle>,
    pub tol: f64,
}

impl Default for SteinerConfig {
    fn default() -> Self {
        Self {
            batch: None,
            triangles: Vec::new(),
            tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    /// Partition JSON file, or a builder: `line`, `triod`, `x_cone`, `double_junction`.
    pub input: Option<PathBuf>,
    pub builder: Option<String>,
    pub separation: Option<f64>,
    pub centre: Option<[f64; 2]>,
    pub radii: Option<Vec<f64>>,
    pub scales: Option<Vec<f64>>,
    /// Blow-down target builder (defaults to the X-cone for `double_junction`
    /// and to the input itself otherwise).
    pub target: Option<String>,
    /// Row-major tension matrix; uniform 1 when absent.
    pub tensions: Option<Vec<f64>>,
    pub window_radius: Option<f64>,
}

/// Parsed configuration together with its provenance.
pub struct Loaded {
    pub config: RunConfig,
    pub hash: String,
    pub base_dir: PathBuf,
}

pub fn load(path: Option<&Path>) -> Result<Loaded, Failure> {
    use sha2::{Digest, Sha256};
    let (bytes, base_dir) = match path {
        Some(p) => {
            let bytes = std::fs::read(p).map_err(|e| usage(format!("cannot read config {}: {e}", p.display())))?;
            let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (bytes, dir)
        }
        None => (b"{}".to_vec(), PathBuf::new()),
    };
    let config: RunConfig =
        serde_json::from_slice(&bytes).map_err(|e| usage(format!("invalid config: {e}")))?;
    Ok(Loaded {
        config,
        hash: hex::encode(Sha256::digest(&bytes)),
        base_dir,
    })
}

impl Loaded {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn potential(&self) -> Result<PotentialSpec, Failure> {
        match &self.config.potential {
            None => Err(usage("config must name a potential")),
            Some(PotentialRef::Name(n)) => PotentialSpec::by_name(n).map_err(|e| usage(format!("{e}"))),
            Some(PotentialRef::Path { path }) => {
                let p = self.resolve(path);
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| usage(format!("cannot read potential {}: {e}", p.display())))?;
                PotentialSpec::polynomial_from_json(&text).map_err(|e| usage(format!("{e}")))
            }
        }
    }

    pub fn group(&self) -> Result<Option<ReflectionGroup>, Failure> {
        self.config
            .group
            .as_deref()
            .map(|g| ReflectionGroup::by_name(g).map_err(|e| usage(format!("{e}"))))
            .transpose()
    }

    pub fn grid(&self, dim: usize) -> Result<Option<Grid>, Failure> {
        let Some(g) = self.config.grid else {
            return Ok(None);
        };
        let d = g.dim.unwrap_or(dim);
        if d != dim {
            return Err(usage(format!("grid dimension {d} does not match the potential dimension {dim}")));
        }
        Grid::new(d, g.half_width, g.points)
            .map(Some)
            .map_err(|e| usage(format!("{e}")))
    }

    pub fn solve_options(&self, grid: &Grid) -> SolveOptions {
        let s = &self.config.solver;
        let mut o = SolveOptions::for_grid(grid);
        if let Some(v) = s.residual_target {
            o.residual_target = v;
        }
        if let Some(v) = s.max_iterations {
            o.max_iterations = v;
        }
        if let Some(v) = s.k_sym {
            o.k_sym = v;
        }
        if let Some(v) = s.symmetrize_until {
            o.symmetrize_until = v;
        }
        if let Some(v) = s.step_rule {
            o.step_rule = v;
        }
        if let Some(v) = s.dt_fraction {
            let h = grid.spacing();
            o.dt = v * h * h / (2.0 * grid.dim() as f64);
        }
        if let Some(v) = s.boundary {
            o.boundary = v;
        }
        if let Some(v) = s.history_every {
            o.history_every = v;
        }
        o
    }
}
