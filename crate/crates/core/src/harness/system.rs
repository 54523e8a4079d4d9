use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::data_driven::DataBatch;
use crate::error::{Result, SetError};
use crate::linalg;
use crate::sets::Zonotope;

/// `x(k+1) = phi x(k) + gamma u(k) + w(k+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    phi: DMatrix<f64>,
    gamma: DMatrix<f64>,
}

impl LtiSystem {
    pub fn new(phi: DMatrix<f64>, gamma: DMatrix<f64>) -> Result<Self> {
        if !phi.is_square() || phi.nrows() == 0 {
            return Err(SetError::Config(format!("phi must be square and non-empty, got {:?}", phi.shape())));
        }
        if gamma.nrows() != phi.nrows() || gamma.ncols() == 0 {
            return Err(SetError::dims(
                "LtiSystem gamma",
                format!("{}xm with m >= 1", phi.nrows()),
                format!("{:?}", gamma.shape()),
            ));
        }
        Ok(LtiSystem { phi, gamma })
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn state_dim(&self) -> usize {
        self.phi.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.gamma.ncols()
    }

    /// `[phi gamma]`.
    pub fn stacked(&self) -> DMatrix<f64> {
        linalg::hcat(self.state_dim(), &[&self.phi, &self.gamma])
    }

    pub fn step(&self, x: &DVector<f64>, u: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        &self.phi * x + &self.gamma * u + w
    }
}

/// A point together with the factor values that produce it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPoint {
    pub point: DVector<f64>,
    pub factors: Vec<f64>,
}

impl SampledPoint {
    pub fn uniform<R: Rng + ?Sized>(z: &Zonotope, rng: &mut R) -> Self {
        let factors: Vec<f64> = (0..z.num_generators()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        SampledPoint {
            point: z.evaluate(&factors),
            factors,
        }
    }
}

/// Factor values of every sampled quantity in a simulation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryWitness {
    pub initial: Vec<f64>,
    pub inputs: Vec<Vec<f64>>,
    /// `noise[k]` generates the noise added on the transition `k -> k+1`.
    pub noise: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<DVector<f64>>,
    pub inputs: Vec<DVector<f64>>,
    pub noise: Vec<DVector<f64>>,
    pub witness: Option<TrajectoryWitness>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.inputs.len()
    }

    /// Transitions `range` as a data batch.
    pub fn batch(&self, range: std::ops::Range<usize>) -> Result<DataBatch> {
        if range.end > self.steps() {
            return Err(SetError::dims("Trajectory::batch", self.steps(), range.end));
        }
        DataBatch::from_trajectory(&self.states[range.start..=range.end], &self.inputs[range])
    }
}

/// Forward simulation for `steps` transitions with inputs and noise drawn
/// uniformly from the factor boxes of `input` and `noise`.
pub fn simulate<R: Rng + ?Sized>(
    sys: &LtiSystem,
    x0: &SampledPoint,
    steps: usize,
    input: &Zonotope,
    noise: &Zonotope,
    record_witness: bool,
    rng: &mut R,
) -> Result<Trajectory> {
    if x0.point.len() != sys.state_dim() || noise.dim() != sys.state_dim() {
        return Err(SetError::dims(
            "simulate state",
            sys.state_dim(),
            format!("x0 {} noise {}", x0.point.len(), noise.dim()),
        ));
    }
    if input.dim() != sys.input_dim() {
        return Err(SetError::dims("simulate input", sys.input_dim(), input.dim()));
    }
    let mut traj = Trajectory {
        states: Vec::with_capacity(steps + 1),
        inputs: Vec::with_capacity(steps),
        noise: Vec::with_capacity(steps),
        witness: record_witness.then(|| TrajectoryWitness {
            initial: x0.factors.clone(),
            ..Default::default()
        }),
    };
    traj.states.push(x0.point.clone());
    for _ in 0..steps {
        let u = SampledPoint::uniform(input, rng);
        let w = SampledPoint::uniform(noise, rng);
        let next = sys.step(traj.states.last().expect("non-empty"), &u.point, &w.point);
        traj.states.push(next);
        traj.inputs.push(u.point);
        traj.noise.push(w.point);
        if let Some(wit) = traj.witness.as_mut() {
            wit.inputs.push(u.factors);
            wit.noise.push(w.factors);
        }
    }
    Ok(traj)
}
