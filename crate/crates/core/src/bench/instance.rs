//! Deterministic desk-scale instance generation.
//!
//! Every family is a least-absolute-deviation problem on the box `[-2,2]^d`
//! with three measurement rows per agent. Each row has a single
//! standard-normal nonzero entry in a seeded-random column, so objectives
//! are coordinate-separable and the exact primal-dual solver can run on the
//! same instances as the sliding ones. Kink positions are placed inside the
//! box. Identical `(family, m, d, data_seed)` inputs reproduce identical
//! instances.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::model::{
    AgentObjective, AgentProblem, BregmanGeometry, ConstraintSet, MatrixRows, NoiseKind,
    ProblemInstance,
};

use super::BenchError;

pub const DEFAULT_ROWS_PER_AGENT: usize = 3;
pub const DEFAULT_BOX_HALF_WIDTH: f64 = 2.0;
pub const DEFAULT_STRONG_CONVEXITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceFamily {
    LadConvex,
    LadStronglyConvex,
    LadStochastic,
    LadStochasticStronglyConvex,
    LadFiniteSum,
}

impl InstanceFamily {
    pub fn is_strongly_convex(&self) -> bool {
        matches!(
            self,
            InstanceFamily::LadStronglyConvex | InstanceFamily::LadStochasticStronglyConvex
        )
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            InstanceFamily::LadStochastic
                | InstanceFamily::LadStochasticStronglyConvex
                | InstanceFamily::LadFiniteSum
        )
    }
}

impl fmt::Display for InstanceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InstanceFamily::LadConvex => "lad_convex",
            InstanceFamily::LadStronglyConvex => "lad_strongly_convex",
            InstanceFamily::LadStochastic => "lad_stochastic",
            InstanceFamily::LadStochasticStronglyConvex => "lad_stochastic_strongly_convex",
            InstanceFamily::LadFiniteSum => "lad_finite_sum",
        };
        f.write_str(s)
    }
}

impl FromStr for InstanceFamily {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lad_convex" => Ok(InstanceFamily::LadConvex),
            "lad_strongly_convex" => Ok(InstanceFamily::LadStronglyConvex),
            "lad_stochastic" => Ok(InstanceFamily::LadStochastic),
            "lad_stochastic_strongly_convex" => Ok(InstanceFamily::LadStochasticStronglyConvex),
            "lad_finite_sum" => Ok(InstanceFamily::LadFiniteSum),
            other => Err(BenchError::InvalidFamily(other.to_string())),
        }
    }
}

/// Generate an instance. The stochastic families set the oracle noise bound
/// `sigma` equal to the instance's Lipschitz constant `M` (Gaussian case)
/// or to the value implied by component sampling (finite-sum case).
pub fn generate_instance(
    family: InstanceFamily,
    m: usize,
    d: usize,
    data_seed: u64,
) -> Result<ProblemInstance, BenchError> {
    if m < 2 {
        return Err(BenchError::Config(format!("need m >= 2 agents, got {m}")));
    }
    if d < 1 {
        return Err(BenchError::Config("need d >= 1".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(data_seed);
    let set = ConstraintSet::symmetric_box(d, DEFAULT_BOX_HALF_WIDTH);
    let mu = if family.is_strongly_convex() { DEFAULT_STRONG_CONVEXITY } else { 0.0 };

    struct RawAgent {
        a: MatrixRows,
        b: Vec<f64>,
        quad_center: Vec<f64>,
    }
    let mut raw = Vec::with_capacity(m);
    for _ in 0..m {
        let rows = DEFAULT_ROWS_PER_AGENT;
        let mut data = vec![0.0; rows * d];
        let mut b = Vec::with_capacity(rows);
        for r in 0..rows {
            let col = rng.gen_range(0..d);
            let coeff: f64 = rng.sample(StandardNormal);
            data[r * d + col] = coeff;
            let kink: f64 = rng.gen_range(-1.5..1.5);
            b.push(coeff * kink);
        }
        let quad_center = if mu > 0.0 {
            (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
        } else {
            Vec::new()
        };
        raw.push(RawAgent { a: MatrixRows::new(rows, d, data)?, b, quad_center });
    }

    // First pass without noise to learn the instance-level M.
    let plain: Vec<AgentObjective> = raw
        .iter()
        .map(|r| {
            AgentObjective::lad(
                r.a.clone(),
                r.b.clone(),
                mu,
                r.quad_center.clone(),
                NoiseKind::None,
                &set,
            )
        })
        .collect::<Result<_, _>>()?;
    let instance_m = plain.iter().map(|o| o.lipschitz_m()).fold(0.0, f64::max);

    let noise = match family {
        InstanceFamily::LadConvex | InstanceFamily::LadStronglyConvex => NoiseKind::None,
        InstanceFamily::LadStochastic | InstanceFamily::LadStochasticStronglyConvex => {
            NoiseKind::BoundedGaussian { sigma: instance_m }
        }
        InstanceFamily::LadFiniteSum => NoiseKind::ComponentSampling,
    };

    let agents = raw
        .into_iter()
        .map(|r| {
            Ok(AgentProblem {
                objective: AgentObjective::lad(r.a, r.b, mu, r.quad_center, noise, &set)?,
                set: set.clone(),
                geometry: BregmanGeometry::euclidean(),
            })
        })
        .collect::<Result<Vec<_>, BenchError>>()?;
    Ok(ProblemInstance::new(agents)?)
}
