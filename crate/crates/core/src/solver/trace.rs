//! Run traces: per-iteration records, snapshots, ergodic state, accounting.

use serde::{Deserialize, Serialize};

use crate::model::StackedPoint;
use crate::netsim::RoundLedger;
use crate::schedule::{InnerSchedule, OuterSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmId {
    Dpd,
    Dcs,
    Sdcs,
}

impl AlgorithmId {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmId::Dpd => "dpd",
            AlgorithmId::Dcs => "dcs",
            AlgorithmId::Sdcs => "sdcs",
        }
    }
}

impl std::str::FromStr for AlgorithmId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dpd" => Ok(AlgorithmId::Dpd),
            "dcs" => Ok(AlgorithmId::Dcs),
            "sdcs" => Ok(AlgorithmId::Sdcs),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

/// Full-precision iterate snapshot at outer iteration `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub k: usize,
    pub theta: f64,
    /// `x^k` (the prox-anchor sequence).
    pub x: StackedPoint,
    /// `xhat^k` for the sliding solvers; `None` for the exact solver.
    pub x_hat: Option<StackedPoint>,
    pub y: StackedPoint,
}

impl Snapshot {
    /// The iterate the ergodic average (and the theorems) weigh:
    /// `xhat^k` when present, else `x^k`.
    pub fn ergodic_primal(&self) -> &StackedPoint {
        self.x_hat.as_ref().unwrap_or(&self.x)
    }
}

/// One CSV row: the running ergodic point after `k` outer iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// `F` evaluated at the running ergodic primal.
    pub ergodic_objective: f64,
    /// `||L x||` of the running ergodic primal.
    pub ergodic_feasibility: f64,
    pub comm_rounds: u64,
    /// Exact plus stochastic subgradient evaluations, all agents.
    pub cumulative_evals: u64,
}

/// Instance constants recorded alongside every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceConstants {
    pub m: usize,
    pub d: usize,
    pub lipschitz_m: f64,
    pub mu: f64,
    pub sigma: f64,
    pub growth_c: Option<f64>,
    pub diameter_sq_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub algorithm: AlgorithmId,
    pub seed: Option<u64>,
    pub l_norm: f64,
    pub sigma_min_nonzero: f64,
    pub constants: InstanceConstants,
    pub outer: OuterSchedule,
    pub inner: Option<InnerSchedule>,
    pub snapshot_stride: usize,
}

/// Everything a run produces: trajectory, ergodic output, exact accounting.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub algorithm: AlgorithmId,
    pub snapshots: Vec<Snapshot>,
    pub iterations: Vec<IterationRecord>,
    /// Theta-weighted ergodic average of the primal iterates
    /// (`xbar^N` for the exact solver, `xhat^N` for the sliding ones).
    pub ergodic_primal: StackedPoint,
    pub ergodic_dual: StackedPoint,
    pub final_x: StackedPoint,
    pub final_x_hat: Option<StackedPoint>,
    pub final_y: StackedPoint,
    pub theta_sum: f64,
    pub ledger: RoundLedger,
    pub manifest: RunManifest,
}
