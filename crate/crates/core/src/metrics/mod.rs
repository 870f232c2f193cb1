//! Gap functions, residuals, theorem right-hand sides, and solution
//! certification against a certified centralized reference.

mod reference;

pub use reference::{min_norm_optimal_dual, reference_solve, ReferenceSolution};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{evaluate_f, AgentProblem, ModelError, ProblemInstance, StackedPoint};
use crate::solver::RunTrace;
use crate::topology::{LaplacianOperator, TopologyError};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("probe set must be nonempty")]
    EmptyProbeSet,
    #[error("tolerance must be positive (eps = {eps}, delta = {delta})")]
    InvalidTolerance { eps: f64, delta: f64 },
    #[error("reference F* certified to {have:e}, need <= {need:e}")]
    UncertifiedReference { have: f64, need: f64 },
    #[error("theorem hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("reference solver: {0}")]
    ReferenceSolve(String),
}

/// Primal-dual gap `Q(z; zbar) = F(x) + <Lx, ybar> - F(xbar) - <Lxbar, y>`.
pub fn gap_q(
    z: (&StackedPoint, &StackedPoint),
    z_bar: (&StackedPoint, &StackedPoint),
    agents: &[AgentProblem],
    op: &LaplacianOperator,
) -> Result<f64, MetricsError> {
    let (x, y) = z;
    let (xb, yb) = z_bar;
    if !x.same_shape(xb) || !y.same_shape(yb) || !x.same_shape(y) {
        return Err(MetricsError::ShapeMismatch("gap_q arguments".into()));
    }
    let lx = op.apply_flat(x.as_flat())?;
    let lxb = op.apply_flat(xb.as_flat())?;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    // Grouped so the diagonal case cancels exactly.
    Ok((evaluate_f(agents, x) - evaluate_f(agents, xb))
        + (dot(&lx, yb.as_flat()) - dot(&lxb, y.as_flat())))
}

/// Perturbation-probe lower bound on the perturbed gap: the max over the
/// probe duals `ybar` of `Q(z; x*, ybar) - <v, ybar>`. A probe, not the
/// supremum over all of R^{md}; the probe set should contain 0.
pub fn perturbed_gap(
    v: &StackedPoint,
    z: (&StackedPoint, &StackedPoint),
    agents: &[AgentProblem],
    op: &LaplacianOperator,
    x_star: &StackedPoint,
    y_probes: &[StackedPoint],
) -> Result<f64, MetricsError> {
    if y_probes.is_empty() {
        return Err(MetricsError::EmptyProbeSet);
    }
    let mut best = f64::NEG_INFINITY;
    for probe in y_probes {
        let q = gap_q(z, (x_star, probe), agents, op)?;
        best = best.max(q - v.dot(probe));
    }
    Ok(best)
}

/// Consensus violation `||L x||_2`; zero exactly on the agreement subspace.
pub fn feasibility_residual(
    x: &StackedPoint,
    op: &LaplacianOperator,
) -> Result<f64, MetricsError> {
    let lx = op.apply_flat(x.as_flat())?;
    Ok(lx.iter().map(|v| v * v).sum::<f64>().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificationOutcome {
    pub certified: bool,
    /// `eps - (F(x) - F*)`; nonnegative when the primal residual passes.
    pub primal_margin: f64,
    /// `delta - ||Lx||`.
    pub feas_margin: f64,
}

/// Certify `x` as an (eps, delta)-solution: `F(x) - F* <= eps` and
/// `||Lx|| <= delta`. The reference value must be certified to `eps / 10`.
pub fn certify_eps_delta(
    x: &StackedPoint,
    reference: &ReferenceSolution,
    eps: f64,
    delta: f64,
    problem: &ProblemInstance,
    op: &LaplacianOperator,
) -> Result<CertificationOutcome, MetricsError> {
    if eps <= 0.0 || delta < 0.0 {
        return Err(MetricsError::InvalidTolerance { eps, delta });
    }
    if reference.tolerance > eps / 10.0 {
        return Err(MetricsError::UncertifiedReference {
            have: reference.tolerance,
            need: eps / 10.0,
        });
    }
    let primal = evaluate_f(problem.agents(), x) - reference.f_star;
    let feas = feasibility_residual(x, op)?;
    Ok(CertificationOutcome {
        certified: primal <= eps && feas <= delta,
        primal_margin: eps - primal,
        feas_margin: delta - feas,
    })
}

/// `||y*|| <= sqrt(m) M / sigma_min_nonzero(L)`.
pub fn dual_norm_bound(
    m: usize,
    lipschitz_m: f64,
    sigma_min_nonzero: f64,
) -> Result<f64, MetricsError> {
    if sigma_min_nonzero <= 0.0 {
        return Err(MetricsError::HypothesisViolation(format!(
            "sigma_min_nonzero must be positive, got {sigma_min_nonzero}"
        )));
    }
    Ok((m as f64).sqrt() * lipschitz_m / sigma_min_nonzero)
}

/// Convergence-bound identifiers, keyed by algorithm and regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremId {
    DpdConvexPrimal,
    DpdConvexFeasibility,
    DcsConvexPrimal,
    DcsConvexFeasibility,
    DcsStronglyConvexPrimal,
    DcsStronglyConvexFeasibility,
    SdcsConvexPrimal,
    SdcsConvexFeasibility,
    SdcsStronglyConvexPrimal,
    SdcsStronglyConvexFeasibility,
}

impl TheoremId {
    pub fn key(&self) -> &'static str {
        match self {
            TheoremId::DpdConvexPrimal => "dpd-convex-primal",
            TheoremId::DpdConvexFeasibility => "dpd-convex-feasibility",
            TheoremId::DcsConvexPrimal => "dcs-convex-primal",
            TheoremId::DcsConvexFeasibility => "dcs-convex-feasibility",
            TheoremId::DcsStronglyConvexPrimal => "dcs-strongly-convex-primal",
            TheoremId::DcsStronglyConvexFeasibility => "dcs-strongly-convex-feasibility",
            TheoremId::SdcsConvexPrimal => "sdcs-convex-primal",
            TheoremId::SdcsConvexFeasibility => "sdcs-convex-feasibility",
            TheoremId::SdcsStronglyConvexPrimal => "sdcs-strongly-convex-primal",
            TheoremId::SdcsStronglyConvexFeasibility => "sdcs-strongly-convex-feasibility",
        }
    }
}

/// Inputs to the bound right-hand sides, recorded alongside each report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub l_norm: f64,
    pub m: usize,
    pub lipschitz_m: f64,
    pub mu: f64,
    pub growth_c: f64,
    pub sigma: f64,
    pub n: usize,
    pub d_tilde: f64,
    /// `V(x^0, x^*)`, computed exactly from the reference solution.
    pub v0: f64,
    pub y0_norm: f64,
    /// `||y* - y^0||` or its conservative surrogate.
    pub ystar_dist: f64,
}

/// Evaluate the displayed right-hand side of one convergence bound;
/// no hidden constants.
pub fn theorem_bound(id: TheoremId, c: &BoundInputs) -> Result<f64, MetricsError> {
    let n = c.n as f64;
    if c.n < 1 {
        return Err(MetricsError::HypothesisViolation("N must be >= 1".into()));
    }
    let strongly_convex = matches!(
        id,
        TheoremId::DcsStronglyConvexPrimal
            | TheoremId::DcsStronglyConvexFeasibility
            | TheoremId::SdcsStronglyConvexPrimal
            | TheoremId::SdcsStronglyConvexFeasibility
    );
    if strongly_convex {
        if c.mu <= 0.0 {
            return Err(MetricsError::HypothesisViolation(
                "strongly convex bounds need mu > 0".into(),
            ));
        }
        if c.n < 2 {
            return Err(MetricsError::HypothesisViolation(
                "strongly convex bounds are stated for N >= 2".into(),
            ));
        }
    }
    let l = c.l_norm;
    let value = match id {
        TheoremId::DpdConvexPrimal => l / n * (2.0 * c.v0 + 0.5 * c.y0_norm * c.y0_norm),
        TheoremId::DpdConvexFeasibility => {
            2.0 * l / n * (3.0 * c.v0.sqrt() + 2.0 * c.ystar_dist)
        }
        TheoremId::DcsConvexPrimal => {
            l / n * (3.0 * c.v0 + 0.5 * c.y0_norm * c.y0_norm + 2.0 * c.d_tilde)
        }
        TheoremId::DcsConvexFeasibility => {
            l / n * (3.0 * (6.0 * c.v0 + 4.0 * c.d_tilde).sqrt() + 4.0 * c.ystar_dist)
        }
        TheoremId::SdcsConvexPrimal => {
            l / n * (3.0 * c.v0 + 0.5 * c.y0_norm * c.y0_norm + 4.0 * c.d_tilde)
        }
        TheoremId::SdcsConvexFeasibility => {
            l / n * (3.0 * (6.0 * c.v0 + 8.0 * c.d_tilde).sqrt() + 4.0 * c.ystar_dist)
        }
        TheoremId::DcsStronglyConvexPrimal | TheoremId::SdcsStronglyConvexPrimal => {
            2.0 / (n * (n + 3.0))
                * (c.mu / c.growth_c * c.v0
                    + 2.0 * l * l * c.growth_c / c.mu * c.y0_norm * c.y0_norm
                    + 2.0 * c.mu * c.d_tilde / c.growth_c)
        }
        TheoremId::DcsStronglyConvexFeasibility | TheoremId::SdcsStronglyConvexFeasibility => {
            8.0 * l / (n * (n + 3.0))
                * (3.0 * (2.0 * c.d_tilde + c.v0).sqrt()
                    + 7.0 * l * c.growth_c / c.mu * c.ystar_dist)
        }
    };
    Ok(value)
}

/// Theorem right-hand sides next to the measured residuals of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub primal_theorem: TheoremId,
    pub feas_theorem: TheoremId,
    pub primal_bound_rhs: f64,
    pub feas_bound_rhs: f64,
    pub measured_primal: f64,
    pub measured_feas: f64,
    pub inputs: BoundInputs,
    /// The feasibility RHS uses `||y*-y^0|| <= ||y^0|| + sqrt(m) M / sigma_min`
    /// when no optimal dual was computed.
    pub conservative_ystar: bool,
}

impl BoundReport {
    pub fn primal_holds(&self, slack: f64) -> bool {
        self.measured_primal <= self.primal_bound_rhs + slack
    }

    pub fn feas_holds(&self, slack: f64) -> bool {
        self.measured_feas <= self.feas_bound_rhs + slack
    }
}

/// Assemble the bound report for a finished run: picks the theorem pair from
/// the schedule mode, computes `V(x^0, x^*)` exactly, and falls back to the
/// conservative dual-distance surrogate.
pub fn report_for_run(
    trace: &RunTrace,
    problem: &ProblemInstance,
    op: &LaplacianOperator,
    reference: &ReferenceSolution,
    x0: &StackedPoint,
    y0: &StackedPoint,
    d_tilde: f64,
) -> Result<BoundReport, MetricsError> {
    use crate::schedule::ScheduleMode;
    let (primal_theorem, feas_theorem) = match trace.manifest.outer.mode {
        ScheduleMode::DpdConvex => (TheoremId::DpdConvexPrimal, TheoremId::DpdConvexFeasibility),
        ScheduleMode::DcsConvex => (TheoremId::DcsConvexPrimal, TheoremId::DcsConvexFeasibility),
        ScheduleMode::DcsStronglyConvex => (
            TheoremId::DcsStronglyConvexPrimal,
            TheoremId::DcsStronglyConvexFeasibility,
        ),
        ScheduleMode::SdcsConvex => {
            (TheoremId::SdcsConvexPrimal, TheoremId::SdcsConvexFeasibility)
        }
        ScheduleMode::SdcsStronglyConvex => (
            TheoremId::SdcsStronglyConvexPrimal,
            TheoremId::SdcsStronglyConvexFeasibility,
        ),
    };
    let x_star = reference.x_star_stacked(problem.m());
    let v0 = crate::model::stacked_v(problem.agents(), x0, &x_star)?;
    let y0_norm = y0.norm();
    let (ystar_dist, conservative) = match &reference.y_star {
        Some(y_star) => {
            let mut diff = y_star.clone();
            diff.add_scaled(-1.0, y0);
            (diff.norm(), false)
        }
        None => (
            y0_norm
                + dual_norm_bound(
                    problem.m(),
                    problem.lipschitz_m(),
                    trace.manifest.sigma_min_nonzero,
                )?,
            true,
        ),
    };
    let inputs = BoundInputs {
        l_norm: trace.manifest.l_norm,
        m: problem.m(),
        lipschitz_m: problem.lipschitz_m(),
        mu: problem.strong_convexity_mu(),
        growth_c: problem.growth_constant().unwrap_or(f64::INFINITY),
        sigma: problem.noise_sigma(),
        n: trace.manifest.outer.horizon(),
        d_tilde,
        v0,
        y0_norm,
        ystar_dist,
    };
    let measured_primal = evaluate_f(problem.agents(), &trace.ergodic_primal) - reference.f_star;
    let measured_feas = feasibility_residual(&trace.ergodic_primal, op)?;
    Ok(BoundReport {
        primal_theorem,
        feas_theorem,
        primal_bound_rhs: theorem_bound(primal_theorem, &inputs)?,
        feas_bound_rhs: theorem_bound(feas_theorem, &inputs)?,
        measured_primal,
        measured_feas,
        inputs,
        conservative_ystar: conservative,
    })
}
