use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data_driven::ReachOptions;
use crate::error::{Result, SetError};
use crate::exponents::ExponentMatrix;
use crate::harness::LtiSystem;
use crate::ids::FactorContext;
use crate::linalg;
use crate::sets::{ConstrainedPolyZonotope, Zonotope};

/// Matrices are written row by row.
pub type Rows = Vec<Vec<f64>>;

fn matrix(rows: &Rows, n_rows: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != n_rows {
        return Err(SetError::Config(format!("{what}: expected {n_rows} rows, got {}", rows.len())));
    }
    let n_cols = rows.first().map_or(0, |r| r.len());
    linalg::matrix_from_rows(rows, n_cols).map_err(|e| SetError::Config(format!("{what}: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub phi: Rows,
    pub gamma: Rows,
}

impl SystemSpec {
    pub fn build(&self) -> Result<LtiSystem> {
        let n = self.phi.len();
        LtiSystem::new(matrix(&self.phi, n, "system.phi")?, matrix(&self.gamma, n, "system.gamma")?)
    }
}

/// `<center, generators>`; `generators` is `n x gamma`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZonotopeSpec {
    pub center: Vec<f64>,
    pub generators: Rows,
}

impl ZonotopeSpec {
    pub fn build(&self, what: &str) -> Result<Zonotope> {
        let n = self.center.len();
        let g = if self.generators.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            matrix(&self.generators, n, what)?
        };
        Zonotope::new(DVector::from_vec(self.center.clone()), g)
    }
}

/// Constrained polynomial zonotope. Omitted exponents default to the
/// identity; omitted constraints mean none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyZonotopeSpec {
    pub center: Vec<f64>,
    pub generators: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint_exponents: Option<Vec<Vec<u32>>>,
}

impl PolyZonotopeSpec {
    /// Builds the set with fresh ids, one per row of the exponent matrix.
    pub fn build(&self, ctx: &FactorContext) -> Result<ConstrainedPolyZonotope> {
        let n = self.center.len();
        let g = if self.generators.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            matrix(&self.generators, n, "initial_set.generators")?
        };
        let h = g.ncols();
        let cfg = |e: SetError| SetError::Config(format!("initial_set: {e}"));
        let e = match &self.exponents {
            Some(rows) => ExponentMatrix::from_rows_with_shape(rows.len(), h, rows).map_err(cfg)?,
            None => ExponentMatrix::identity(h),
        };
        let p = e.rows();
        let offset = DVector::from_vec(self.offset.clone().unwrap_or_default());
        let a = match &self.constraints {
            Some(rows) if !rows.is_empty() => matrix(rows, offset.len(), "initial_set.constraints")?,
            _ => DMatrix::zeros(offset.len(), 0),
        };
        let r = match &self.constraint_exponents {
            Some(rows) => ExponentMatrix::from_rows_with_shape(p, a.ncols(), rows).map_err(cfg)?,
            None if a.ncols() == 0 => ExponentMatrix::zeros(p, 0),
            None if a.ncols() == p => ExponentMatrix::identity(p),
            None => {
                return Err(SetError::Config(
                    "initial_set.constraint_exponents is required when constraints are not linear in every factor".into(),
                ))
            }
        };
        ConstrainedPolyZonotope::new(DVector::from_vec(self.center.clone()), g, e, a, offset, r, ctx.allocate(p))
            .map_err(cfg)
    }
}

/// Which pair of reachable-set sequences an experiment produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Offline model only versus offline model refined online.
    #[default]
    Refinement,
    /// Refined model versus a single model from the pooled data.
    Comparison,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnlineSegment {
    /// Step before which the segment's data arrives.
    pub step: usize,
    /// Number of transitions in the segment.
    pub length: usize,
}

/// How the identification data is collected. Every transition of every
/// trajectory becomes one data column.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DataSpec {
    /// Transitions per trajectory; one trajectory covering all data when
    /// omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_length: Option<usize>,
    /// Where trajectories start; the experiment's initial set when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_set: Option<ZonotopeSpec>,
    /// Input set during collection; the experiment's input set when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_set: Option<ZonotopeSpec>,
}

fn default_samples() -> usize {
    5000
}

fn default_projections() -> Vec<[usize; 2]> {
    vec![[1, 2], [3, 4], [4, 5]]
}

fn default_trials() -> usize {
    1000
}

/// One experiment. The data trajectory has `offline_length` transitions
/// followed by each online segment in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub kind: ExperimentKind,
    pub system: SystemSpec,
    pub initial_set: PolyZonotopeSpec,
    pub input_set: ZonotopeSpec,
    pub noise_set: ZonotopeSpec,
    pub horizon: usize,
    pub offline_length: usize,
    #[serde(default)]
    pub online_segments: Vec<OnlineSegment>,
    #[serde(default)]
    pub data: DataSpec,
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples_per_set: usize,
    /// One-based coordinate pairs.
    #[serde(default = "default_projections")]
    pub projections: Vec<[usize; 2]>,
    /// Steps to dump; all steps when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_steps: Option<Vec<usize>>,
    #[serde(default)]
    pub reach: ReachOptions,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| SetError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn data_length(&self) -> usize {
        self.offline_length + self.online_segments.iter().map(|s| s.length).sum::<usize>()
    }

    pub fn plot_steps(&self) -> Vec<usize> {
        self.plot_steps.clone().unwrap_or_else(|| (0..=self.horizon).collect())
    }

    pub fn validate(&self) -> Result<()> {
        let sys = self.system.build()?;
        let nx = sys.state_dim();
        let x0 = self.initial_set.build(&FactorContext::new())?;
        let u = self.input_set.build("input_set.generators")?;
        let w = self.noise_set.build("noise_set.generators")?;
        if x0.dim() != nx || w.dim() != nx || u.dim() != sys.input_dim() {
            return Err(SetError::Config(format!(
                "dimensions disagree: system {nx}x{}, initial {}, input {}, noise {}",
                sys.input_dim(),
                x0.dim(),
                u.dim(),
                w.dim()
            )));
        }
        if !w.contains_origin_hint() {
            return Err(SetError::Config("noise_set must contain the origin".into()));
        }
        if let Some(bad) = self.projections.iter().find(|[i, j]| !(1 <= *i && i < j && *j <= nx)) {
            return Err(SetError::Config(format!("projection {bad:?} needs 1 <= i < j <= {nx}")));
        }
        if let Some(bad) = self.plot_steps().iter().find(|&&k| k > self.horizon) {
            return Err(SetError::Config(format!("plot step {bad} exceeds horizon {}", self.horizon)));
        }
        if self.data.trajectory_length == Some(0) {
            return Err(SetError::Config("data.trajectory_length must be positive".into()));
        }
        if let Some(z) = &self.data.initial_set {
            if z.build("data.initial_set.generators")?.dim() != nx {
                return Err(SetError::Config("data.initial_set has the wrong dimension".into()));
            }
        }
        if let Some(z) = &self.data.input_set {
            if z.build("data.input_set.generators")?.dim() != sys.input_dim() {
                return Err(SetError::Config("data.input_set has the wrong dimension".into()));
            }
        }
        if self.online_segments.windows(2).any(|w| w[0].step > w[1].step) {
            return Err(SetError::Config("online segments must be ordered by step".into()));
        }
        Ok(())
    }

    /// The five-state rotation/decay system with a scalar input, a
    /// non-convex initial set, `U = <10, 0.25>` and noise radius 0.005.
    pub fn experiment1() -> Self {
        let e0 = vec![
            vec![2, 1, 0, 0, 0],
            vec![1, 2, 0, 0, 0],
            vec![0, 0, 2, 1, 0],
            vec![0, 0, 1, 2, 1],
            vec![0, 0, 0, 1, 2],
        ];
        ExperimentConfig {
            name: "experiment1".into(),
            kind: ExperimentKind::Refinement,
            system: paper_system(),
            initial_set: PolyZonotopeSpec {
                center: vec![1.0; 5],
                generators: scaled_identity(5, 0.1),
                exponents: Some(e0),
                constraints: None,
                offset: None,
                constraint_exponents: None,
            },
            input_set: ZonotopeSpec {
                center: vec![10.0],
                generators: vec![vec![0.25]],
            },
            noise_set: ZonotopeSpec {
                center: vec![0.0; 5],
                generators: vec![vec![0.005]; 5],
            },
            horizon: 4,
            offline_length: 6,
            online_segments: vec![OnlineSegment { step: 0, length: 6 }],
            data: DataSpec {
                trajectory_length: Some(1),
                initial_set: Some(ZonotopeSpec {
                    center: vec![1.0; 5],
                    generators: scaled_identity(5, 5.0),
                }),
                input_set: None,
            },
            seed: 1,
            samples_per_set: default_samples(),
            projections: default_projections(),
            plot_steps: None,
            reach: ReachOptions {
                compact: true,
                ..ReachOptions::default()
            },
            trials: default_trials(),
        }
    }

    /// Same system with the convex initial set `<1, 0.1 I>`.
    pub fn experiment2() -> Self {
        let mut cfg = Self::experiment1();
        cfg.name = "experiment2".into();
        cfg.kind = ExperimentKind::Comparison;
        cfg.initial_set.exponents = None;
        cfg.horizon = 3;
        cfg
    }
}

fn scaled_identity(n: usize, s: f64) -> Rows {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { s } else { 0.0 }).collect())
        .collect()
}

fn paper_system() -> SystemSpec {
    SystemSpec {
        phi: vec![
            vec![0.9323, -0.1890, 0.0, 0.0, 0.0],
            vec![0.1890, 0.9323, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.8596, 0.0430, 0.0],
            vec![0.0, 0.0, -0.0430, 0.8596, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.9048],
        ],
        gamma: vec![vec![0.0436], vec![0.0533], vec![0.0475], vec![0.0453], vec![0.0476]],
    }
}
