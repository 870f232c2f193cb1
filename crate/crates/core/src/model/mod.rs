//! Per-agent objective oracles, constraint sets, and Bregman prox geometry.

mod geometry;
mod objective;
mod pwq;
mod sets;

pub use geometry::{bregman_div, prox_step, BregmanGeometry, BregmanKind};
pub use objective::{composite_prox, AgentObjective, MatrixRows, NoiseKind};
pub use sets::{ConstraintSet, SetKind};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("entropy geometry requires strictly positive coordinates in the anchor")]
    EntropyAnchorNotInterior,
    #[error("point outside the domain of the entropy prox-function")]
    EntropyDomain,
    #[error("unsupported (geometry, set) combination: {0}")]
    UnsupportedProxCombination(String),
    #[error("objective does not support an exact composite prox for this geometry/set")]
    ExactProxUnsupported,
    #[error("step size eta must be positive, got {0}")]
    NonPositiveEta(f64),
    #[error("eta_beta must be nonnegative, got {0}")]
    NegativeEtaBeta(f64),
    #[error("invalid constraint set: {0}")]
    InvalidSet(String),
    #[error("invalid objective data: {0}")]
    InvalidObjective(String),
}

/// A stacked decision point `x = (x_1, ..., x_m)` with `m` blocks of
/// dimension `d`, stored flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedPoint {
    m: usize,
    d: usize,
    data: Vec<f64>,
}

impl StackedPoint {
    pub fn zeros(m: usize, d: usize) -> Self {
        StackedPoint { m, d, data: vec![0.0; m * d] }
    }

    pub fn from_blocks(blocks: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let m = blocks.len();
        if m == 0 {
            return Err(ModelError::ShapeMismatch("no blocks".into()));
        }
        let d = blocks[0].len();
        let mut data = Vec::with_capacity(m * d);
        for b in &blocks {
            if b.len() != d {
                return Err(ModelError::ShapeMismatch(format!(
                    "block length {} != {}",
                    b.len(),
                    d
                )));
            }
            data.extend_from_slice(b);
        }
        Ok(StackedPoint { m, d, data })
    }

    pub fn from_flat(m: usize, d: usize, data: Vec<f64>) -> Result<Self, ModelError> {
        if data.len() != m * d {
            return Err(ModelError::ShapeMismatch(format!(
                "flat length {} != m*d = {}",
                data.len(),
                m * d
            )));
        }
        Ok(StackedPoint { m, d, data })
    }

    /// The same block replicated `m` times (a consensual point).
    pub fn replicate(block: &[f64], m: usize) -> Self {
        let d = block.len();
        let mut data = Vec::with_capacity(m * d);
        for _ in 0..m {
            data.extend_from_slice(block);
        }
        StackedPoint { m, d, data }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn set_block(&mut self, i: usize, v: &[f64]) {
        self.block_mut(i).copy_from_slice(v);
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn as_flat_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn same_shape(&self, other: &StackedPoint) -> bool {
        self.m == other.m && self.d == other.d
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &StackedPoint) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// `self += scale * other`, shape-checked by the caller.
    pub fn add_scaled(&mut self, scale: f64, other: &StackedPoint) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub fn scaled(&self, scale: f64) -> StackedPoint {
        StackedPoint {
            m: self.m,
            d: self.d,
            data: self.data.iter().map(|v| v * scale).collect(),
        }
    }

    /// Largest pairwise block difference in the infinity norm.
    pub fn max_block_disagreement(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.m {
            for j in (i + 1)..self.m {
                for (a, b) in self.block(i).iter().zip(self.block(j)) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        worst
    }
}

/// One agent's private data: objective oracle, constraint set, and the
/// Bregman geometry its prox steps use.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentProblem {
    pub objective: AgentObjective,
    pub set: ConstraintSet,
    pub geometry: BregmanGeometry,
}

/// The full multi-agent problem instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemInstance {
    agents: Vec<AgentProblem>,
    d: usize,
}

impl ProblemInstance {
    pub fn new(agents: Vec<AgentProblem>) -> Result<Self, ModelError> {
        if agents.is_empty() {
            return Err(ModelError::ShapeMismatch("no agents".into()));
        }
        let d = agents[0].set.dim();
        for a in &agents {
            if a.set.dim() != d {
                return Err(ModelError::ShapeMismatch(
                    "agents disagree on decision dimension".into(),
                ));
            }
        }
        Ok(ProblemInstance { agents, d })
    }

    pub fn m(&self) -> usize {
        self.agents.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn agents(&self) -> &[AgentProblem] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &AgentProblem {
        &self.agents[i]
    }

    /// Uniform Lipschitz-type constant: the largest per-agent `M`.
    pub fn lipschitz_m(&self) -> f64 {
        self.agents.iter().map(|a| a.objective.lipschitz_m()).fold(0.0, f64::max)
    }

    /// Uniform strong-convexity modulus: the smallest per-agent `mu`.
    pub fn strong_convexity_mu(&self) -> f64 {
        self.agents
            .iter()
            .map(|a| a.objective.strong_convexity_mu())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest declared oracle noise bound.
    pub fn noise_sigma(&self) -> f64 {
        self.agents.iter().map(|a| a.objective.noise_sigma()).fold(0.0, f64::max)
    }

    /// Quadratic growth constant valid for every agent's geometry;
    /// `None` if any geometry has unbounded growth (entropy).
    pub fn growth_constant(&self) -> Option<f64> {
        self.agents
            .iter()
            .map(|a| a.geometry.growth_constant())
            .try_fold(1.0f64, |acc, c| c.map(|c| acc.max(c)))
    }

    /// Sum of per-agent prox-diameter bounds (the default `D_tilde`).
    pub fn diameter_sq_total(&self) -> f64 {
        self.agents.iter().map(|a| a.set.diameter_sq_bound()).sum()
    }

    /// Every agent at its set's Bregman center (the default start point).
    pub fn bregman_centers(&self) -> StackedPoint {
        StackedPoint::from_blocks(
            self.agents.iter().map(|a| a.set.bregman_center()).collect(),
        )
        .expect("uniform dimension enforced at construction")
    }

    pub fn supports_exact_prox(&self) -> bool {
        self.agents
            .iter()
            .all(|a| a.objective.supports_exact_prox(&a.geometry, &a.set))
    }

    pub fn membership_ok(&self, x: &StackedPoint, tol: f64) -> bool {
        x.m() == self.m()
            && x.d() == self.d
            && self
                .agents
                .iter()
                .enumerate()
                .all(|(i, a)| a.set.contains(x.block(i), tol))
    }
}

/// `F(x) = sum_i f_i(x_i)`.
pub fn evaluate_f(agents: &[AgentProblem], x: &StackedPoint) -> f64 {
    agents
        .iter()
        .enumerate()
        .map(|(i, a)| a.objective.eval(x.block(i)))
        .sum()
}

/// Stacked prox-function `V(x, u) = sum_i V_i(x_i, u_i)`.
pub fn stacked_v(
    agents: &[AgentProblem],
    x: &StackedPoint,
    u: &StackedPoint,
) -> Result<f64, ModelError> {
    if !x.same_shape(u) || x.m() != agents.len() {
        return Err(ModelError::ShapeMismatch(format!(
            "stacked_v: x {}x{}, u {}x{}, {} agents",
            x.m(),
            x.d(),
            u.m(),
            u.d(),
            agents.len()
        )));
    }
    let mut total = 0.0;
    for (i, a) in agents.iter().enumerate() {
        total += bregman_div(&a.geometry, x.block(i), u.block(i))?;
    }
    Ok(total)
}
