//! Algorithm drivers: exact primal-dual (DPD), communication sliding (DCS),
//! and stochastic communication sliding (SDCS).
//!
//! All three share the outer structure: predict, broadcast the prediction,
//! ascend the dual from the neighborhood disagreement, broadcast the dual,
//! then solve (or slide over) the local proximal subproblem. Exactly two
//! communication rounds happen per outer iteration, independent of the inner
//! workload.

mod trace;

pub use trace::{
    AlgorithmId, InstanceConstants, IterationRecord, RunManifest, RunTrace, Snapshot,
};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::model::{
    composite_prox, evaluate_f, prox_step, AgentObjective, BregmanGeometry, ConstraintSet,
    ModelError, ProblemInstance, StackedPoint,
};
use crate::netsim::{broadcast_round, neighbor_weighted_sum, NetsimError, RoundLedger};
use crate::schedule::{
    validate_inner, validate_outer, InnerSchedule, OuterSchedule, ScheduleError, ScheduleMode,
};
use crate::topology::{laplacian, spectral_constants, Graph, LaplacianOperator, TopologyError};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Netsim(#[from] NetsimError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph has {graph_m} agents but the problem has {problem_m}")]
    AgentCountMismatch { graph_m: usize, problem_m: usize },
    #[error("schedule mode {got:?} not usable here (expected one of {expected:?})")]
    WrongMode { got: ScheduleMode, expected: Vec<ScheduleMode> },
    #[error("inner schedule does not match the outer mode")]
    InnerMismatch,
    #[error("schedule validation failed: {failed:?}")]
    ScheduleValidation { failed: Vec<String> },
    #[error("inner weight condition (beta_w) fails at outer iteration {k}")]
    InnerValidation { k: usize },
    #[error("every objective must support an exact composite prox for the exact solver")]
    ExactProxRequired,
    #[error("strongly convex schedules need a finite quadratic growth constant; an agent uses entropy geometry")]
    UnboundedGrowth,
    #[error("inner iteration count must be >= 1")]
    EmptyInnerLoop,
    #[error("start point is infeasible: {0}")]
    InfeasibleStart(String),
    #[error("init state shape does not match the problem")]
    InitShape,
    #[error("ergodic weights: got {got}, trace has {want} snapshots")]
    WeightMismatch { got: usize, want: usize },
    #[error("trace has no snapshots")]
    EmptyTrace,
}

/// Initial primal/dual state.
#[derive(Debug, Clone)]
pub struct InitState {
    pub x0: StackedPoint,
    pub y0: StackedPoint,
}

impl InitState {
    /// Default start: every agent at its set's Bregman center, zero duals.
    pub fn centered(problem: &ProblemInstance) -> Self {
        InitState {
            x0: problem.bregman_centers(),
            y0: StackedPoint::zeros(problem.m(), problem.d()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Keep every `snapshot_stride`-th snapshot (plus the last). Running
    /// ergodic sums stay exact regardless of thinning.
    pub snapshot_stride: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { snapshot_stride: 1 }
    }
}

/// The prediction step: `base + alpha * (lead - lag)`, element-wise.
/// The exact solver uses `lead = x^{k-1}`; the sliding solvers use
/// `lead = xhat^{k-1}` (the two primal sequences must not be conflated).
pub fn extrapolate(
    alpha: f64,
    base: &StackedPoint,
    lead: &StackedPoint,
    lag: &StackedPoint,
) -> StackedPoint {
    let mut out = base.clone();
    for ((o, l), g) in out
        .as_flat_mut()
        .iter_mut()
        .zip(lead.as_flat())
        .zip(lag.as_flat())
    {
        *o += alpha * (l - g);
    }
    out
}

/// Deterministic stream for the stochastic oracle call of `agent` at outer
/// iteration `k`, inner step `t`. Derivation from the tuple (not from call
/// order) keeps traces independent of execution order.
pub fn derive_rng(master_seed: u64, agent: usize, outer_k: usize, inner_t: u64) -> ChaCha12Rng {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut s = mix(master_seed);
    s = mix(s ^ agent as u64);
    s = mix(s ^ outer_k as u64);
    s = mix(s ^ inner_t);
    ChaCha12Rng::seed_from_u64(s)
}

/// Which oracle the inner loop draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsMode {
    Exact,
    Stochastic { master_seed: u64 },
}

/// The sliding inner loop: `T` linearized prox steps against a fixed
/// linear term `w`, with zero communication.
///
/// Starting from `u^0 = x`, each step takes a (stochastic) subgradient at
/// `u^{t-1}` and solves the prox subproblem with anchors `(x, u^{t-1})` and
/// weights `(eta, eta * beta_t)`. Returns `u^T` and the lambda-weighted
/// average `uhat^T`. Every oracle call is counted against `agent`.
#[allow(clippy::too_many_arguments)]
pub fn cs_procedure(
    objective: &AgentObjective,
    set: &ConstraintSet,
    geom: &BregmanGeometry,
    t_count: u64,
    eta: f64,
    w: &[f64],
    x: &[f64],
    inner: &InnerSchedule,
    outer_k: usize,
    mode: CsMode,
    agent: usize,
    ledger: &mut RoundLedger,
) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
    if t_count < 1 {
        return Err(SolverError::EmptyInnerLoop);
    }
    if !set.contains(x, 1e-9) {
        return Err(SolverError::InfeasibleStart(format!("agent {} inner anchor", agent + 1)));
    }
    let mut u = x.to_vec();
    let mut hat_acc = vec![0.0; x.len()];
    let mut lambda_sum = 0.0;
    for t in 1..=t_count {
        let h = match mode {
            CsMode::Exact => {
                ledger.count_subgrad(agent);
                objective.subgrad(&u)
            }
            CsMode::Stochastic { master_seed } => {
                ledger.count_stoch(agent);
                let mut rng = derive_rng(master_seed, agent, outer_k, t);
                objective.stoch_subgrad(&u, &mut rng)
            }
        };
        let g: Vec<f64> = w.iter().zip(&h).map(|(a, b)| a + b).collect();
        let beta_t = inner.beta(eta, t);
        u = prox_step(geom, set, &g, x, &u, eta, eta * beta_t)?;
        let lambda_t = inner.lambda(t);
        for (acc, v) in hat_acc.iter_mut().zip(&u) {
            *acc += lambda_t * v;
        }
        lambda_sum += lambda_t;
    }
    let u_hat: Vec<f64> = hat_acc.into_iter().map(|v| v / lambda_sum).collect();
    Ok((u, u_hat))
}

struct RunContext {
    op: LaplacianOperator,
    l_norm: f64,
    sigma_min: f64,
}

fn prepare(
    problem: &ProblemInstance,
    graph: &Graph,
    outer: &OuterSchedule,
    init: &InitState,
    expected: &[ScheduleMode],
) -> Result<RunContext, SolverError> {
    if graph.agent_count() != problem.m() {
        return Err(SolverError::AgentCountMismatch {
            graph_m: graph.agent_count(),
            problem_m: problem.m(),
        });
    }
    if !graph.is_connected() {
        return Err(SolverError::Disconnected);
    }
    if !expected.contains(&outer.mode) {
        return Err(SolverError::WrongMode { got: outer.mode, expected: expected.to_vec() });
    }
    let strongly_convex = matches!(
        outer.mode,
        ScheduleMode::DcsStronglyConvex | ScheduleMode::SdcsStronglyConvex
    );
    let growth_c = match problem.growth_constant() {
        Some(c) => c,
        None if strongly_convex => return Err(SolverError::UnboundedGrowth),
        None => 1.0, // unused by the convex-mode conditions
    };
    if init.x0.m() != problem.m()
        || init.x0.d() != problem.d()
        || init.y0.m() != problem.m()
        || init.y0.d() != problem.d()
    {
        return Err(SolverError::InitShape);
    }
    if !problem.membership_ok(&init.x0, 1e-9) {
        return Err(SolverError::InfeasibleStart("x0 outside a constraint set".into()));
    }
    let op = laplacian(graph, problem.d());
    let spectral = spectral_constants(&op)?;
    let mu = problem.strong_convexity_mu();
    let report = validate_outer(outer, spectral.op_norm, mu, growth_c);
    if !report.all_passed() {
        return Err(SolverError::ScheduleValidation {
            failed: report.failed().iter().map(|c| c.name().to_string()).collect(),
        });
    }
    Ok(RunContext { op, l_norm: spectral.op_norm, sigma_min: spectral.min_nonzero_singular })
}

fn constants_of(problem: &ProblemInstance) -> InstanceConstants {
    InstanceConstants {
        m: problem.m(),
        d: problem.d(),
        lipschitz_m: problem.lipschitz_m(),
        mu: problem.strong_convexity_mu(),
        sigma: problem.noise_sigma(),
        growth_c: problem.growth_constant(),
        diameter_sq_total: problem.diameter_sq_total(),
    }
}

/// Accumulates theta-weighted ergodic sums and assembles per-iteration
/// records and (optionally thinned) snapshots.
struct TraceBuilder<'p> {
    problem: &'p ProblemInstance,
    op: &'p LaplacianOperator,
    stride: usize,
    horizon: usize,
    theta_sum: f64,
    primal_sum: StackedPoint,
    dual_sum: StackedPoint,
    snapshots: Vec<Snapshot>,
    iterations: Vec<IterationRecord>,
}

impl<'p> TraceBuilder<'p> {
    fn new(
        problem: &'p ProblemInstance,
        op: &'p LaplacianOperator,
        stride: usize,
        horizon: usize,
    ) -> Self {
        TraceBuilder {
            problem,
            op,
            stride: stride.max(1),
            horizon,
            theta_sum: 0.0,
            primal_sum: StackedPoint::zeros(problem.m(), problem.d()),
            dual_sum: StackedPoint::zeros(problem.m(), problem.d()),
            snapshots: Vec::new(),
            iterations: Vec::new(),
        }
    }

    fn record(
        &mut self,
        k: usize,
        theta: f64,
        x: &StackedPoint,
        x_hat: Option<&StackedPoint>,
        y: &StackedPoint,
        ledger: &RoundLedger,
    ) -> Result<(), SolverError> {
        let ergodic_iterate = x_hat.unwrap_or(x);
        self.theta_sum += theta;
        self.primal_sum.add_scaled(theta, ergodic_iterate);
        self.dual_sum.add_scaled(theta, y);
        let running = self.primal_sum.scaled(1.0 / self.theta_sum);
        let objective = evaluate_f(self.problem.agents(), &running);
        let lx = self.op.apply_flat(running.as_flat())?;
        let feasibility = lx.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.iterations.push(IterationRecord {
            k,
            ergodic_objective: objective,
            ergodic_feasibility: feasibility,
            comm_rounds: ledger.comm_rounds,
            cumulative_evals: ledger.total_oracle_evals(),
        });
        if k.is_multiple_of(self.stride) || k == self.horizon {
            self.snapshots.push(Snapshot {
                k,
                theta,
                x: x.clone(),
                x_hat: x_hat.cloned(),
                y: y.clone(),
            });
        }
        Ok(())
    }

    fn ergodic(&self) -> (StackedPoint, StackedPoint) {
        (
            self.primal_sum.scaled(1.0 / self.theta_sum),
            self.dual_sum.scaled(1.0 / self.theta_sum),
        )
    }
}

/// Exact decentralized primal-dual. Needs every objective to support an
/// exact composite prox; refuses otherwise.
pub fn run_dpd(
    problem: &ProblemInstance,
    graph: &Graph,
    outer: &OuterSchedule,
    init: &InitState,
    opts: &RunOptions,
) -> Result<RunTrace, SolverError> {
    let ctx = prepare(problem, graph, outer, init, &[ScheduleMode::DpdConvex])?;
    if !problem.supports_exact_prox() {
        return Err(SolverError::ExactProxRequired);
    }
    let (m, d, n) = (problem.m(), problem.d(), outer.horizon());
    let mut ledger = RoundLedger::new(m);
    let mut builder = TraceBuilder::new(problem, &ctx.op, opts.snapshot_stride, n);

    // x^{-1} = x^0 per the initialization contract.
    let mut x_prev2 = init.x0.clone();
    let mut x_prev = init.x0.clone();
    let mut y = init.y0.clone();

    for k in 1..=n {
        let x_tilde = extrapolate(outer.alpha(k), &x_prev, &x_prev, &x_prev2);
        let boxes = broadcast_round(
            &mut ledger,
            graph,
            &(0..m).map(|i| x_tilde.block(i).to_vec()).collect::<Vec<_>>(),
        )?;
        let tau_k = outer.tau(k);
        let mut y_new = StackedPoint::zeros(m, d);
        #[allow(clippy::needless_range_loop)]
        for i in 0..m {
            let v = neighbor_weighted_sum(&boxes[i], ctx.op.row(i), d)?;
            let block = y_new.block_mut(i);
            for (out, (yprev, vi)) in block.iter_mut().zip(y.block(i).iter().zip(&v)) {
                *out = yprev + vi / tau_k;
            }
        }
        y = y_new;
        let boxes = broadcast_round(
            &mut ledger,
            graph,
            &(0..m).map(|i| y.block(i).to_vec()).collect::<Vec<_>>(),
        )?;
        let eta_k = outer.eta(k);
        let mut x_new = StackedPoint::zeros(m, d);
        #[allow(clippy::needless_range_loop)]
        for i in 0..m {
            let w = neighbor_weighted_sum(&boxes[i], ctx.op.row(i), d)?;
            let agent = problem.agent(i);
            let xi = composite_prox(
                &agent.objective,
                &agent.set,
                &agent.geometry,
                &w,
                x_prev.block(i),
                eta_k,
            )?;
            ledger.count_prox(i);
            debug_assert!(agent.set.contains(&xi, 1e-12));
            x_new.set_block(i, &xi);
        }
        x_prev2 = std::mem::replace(&mut x_prev, x_new);
        builder.record(k, outer.theta(k), &x_prev, None, &y, &ledger)?;
    }

    let (ergodic_primal, ergodic_dual) = builder.ergodic();
    Ok(RunTrace {
        algorithm: AlgorithmId::Dpd,
        snapshots: builder.snapshots,
        iterations: builder.iterations,
        ergodic_primal,
        ergodic_dual,
        final_x: x_prev,
        final_x_hat: None,
        final_y: y,
        theta_sum: builder.theta_sum,
        ledger,
        manifest: RunManifest {
            algorithm: AlgorithmId::Dpd,
            seed: None,
            l_norm: ctx.l_norm,
            sigma_min_nonzero: ctx.sigma_min,
            constants: constants_of(problem),
            outer: outer.clone(),
            inner: None,
            snapshot_stride: opts.snapshot_stride,
        },
    })
}

#[allow(clippy::too_many_arguments)]
fn run_sliding(
    problem: &ProblemInstance,
    graph: &Graph,
    outer: &OuterSchedule,
    inner: &InnerSchedule,
    init: &InitState,
    mode: CsMode,
    algorithm: AlgorithmId,
    expected: &[ScheduleMode],
    opts: &RunOptions,
) -> Result<RunTrace, SolverError> {
    let ctx = prepare(problem, graph, outer, init, expected)?;
    let convex_mode =
        matches!(outer.mode, ScheduleMode::DcsConvex | ScheduleMode::SdcsConvex);
    match (convex_mode, inner) {
        (true, InnerSchedule::Convex) | (false, InnerSchedule::StronglyConvex { .. }) => {}
        _ => return Err(SolverError::InnerMismatch),
    }
    let mu = problem.strong_convexity_mu();
    let growth_c = problem.growth_constant().unwrap_or(1.0);
    // The inner condition depends on k only through eta_k; check each
    // distinct (eta, T) pair once.
    let mut checked: Vec<(f64, u64)> = Vec::new();
    for k in 1..=outer.horizon() {
        let key = (outer.eta(k), outer.inner_t(k));
        if !checked.contains(&key) {
            if !validate_inner(inner, key.0, mu, growth_c, key.1) {
                return Err(SolverError::InnerValidation { k });
            }
            checked.push(key);
        }
    }

    let (m, d, n) = (problem.m(), problem.d(), outer.horizon());
    let mut ledger = RoundLedger::new(m);
    let mut builder = TraceBuilder::new(problem, &ctx.op, opts.snapshot_stride, n);

    // x^{-1} = x^0 = xhat^0.
    let mut x_prev2 = init.x0.clone();
    let mut x_prev = init.x0.clone();
    let mut x_hat_prev = init.x0.clone();
    let mut y = init.y0.clone();

    for k in 1..=n {
        // Prediction leads with the hatted sequence.
        let x_tilde = extrapolate(outer.alpha(k), &x_prev, &x_hat_prev, &x_prev2);
        let boxes = broadcast_round(
            &mut ledger,
            graph,
            &(0..m).map(|i| x_tilde.block(i).to_vec()).collect::<Vec<_>>(),
        )?;
        let tau_k = outer.tau(k);
        let mut y_new = StackedPoint::zeros(m, d);
        #[allow(clippy::needless_range_loop)]
        for i in 0..m {
            let v = neighbor_weighted_sum(&boxes[i], ctx.op.row(i), d)?;
            let block = y_new.block_mut(i);
            for (out, (yprev, vi)) in block.iter_mut().zip(y.block(i).iter().zip(&v)) {
                *out = yprev + vi / tau_k;
            }
        }
        y = y_new;
        let boxes = broadcast_round(
            &mut ledger,
            graph,
            &(0..m).map(|i| y.block(i).to_vec()).collect::<Vec<_>>(),
        )?;
        let eta_k = outer.eta(k);
        let t_k = outer.inner_t(k);
        let mut x_new = StackedPoint::zeros(m, d);
        let mut x_hat_new = StackedPoint::zeros(m, d);
        #[allow(clippy::needless_range_loop)]
        for i in 0..m {
            let w = neighbor_weighted_sum(&boxes[i], ctx.op.row(i), d)?;
            let agent = problem.agent(i);
            let (xi, xhat_i) = cs_procedure(
                &agent.objective,
                &agent.set,
                &agent.geometry,
                t_k,
                eta_k,
                &w,
                x_prev.block(i),
                inner,
                k,
                mode,
                i,
                &mut ledger,
            )?;
            debug_assert!(agent.set.contains(&xi, 1e-12));
            x_new.set_block(i, &xi);
            x_hat_new.set_block(i, &xhat_i);
        }
        x_prev2 = std::mem::replace(&mut x_prev, x_new);
        x_hat_prev = x_hat_new;
        builder.record(k, outer.theta(k), &x_prev, Some(&x_hat_prev), &y, &ledger)?;
    }

    let (ergodic_primal, ergodic_dual) = builder.ergodic();
    let seed = match mode {
        CsMode::Exact => None,
        CsMode::Stochastic { master_seed } => Some(master_seed),
    };
    Ok(RunTrace {
        algorithm,
        snapshots: builder.snapshots,
        iterations: builder.iterations,
        ergodic_primal,
        ergodic_dual,
        final_x: x_prev,
        final_x_hat: Some(x_hat_prev),
        final_y: y,
        theta_sum: builder.theta_sum,
        ledger,
        manifest: RunManifest {
            algorithm,
            seed,
            l_norm: ctx.l_norm,
            sigma_min_nonzero: ctx.sigma_min,
            constants: constants_of(problem),
            outer: outer.clone(),
            inner: Some(*inner),
            snapshot_stride: opts.snapshot_stride,
        },
    })
}

/// Deterministic communication sliding.
pub fn run_dcs(
    problem: &ProblemInstance,
    graph: &Graph,
    outer: &OuterSchedule,
    inner: &InnerSchedule,
    init: &InitState,
    opts: &RunOptions,
) -> Result<RunTrace, SolverError> {
    run_sliding(
        problem,
        graph,
        outer,
        inner,
        init,
        CsMode::Exact,
        AlgorithmId::Dcs,
        &[ScheduleMode::DcsConvex, ScheduleMode::DcsStronglyConvex],
        opts,
    )
}

/// Stochastic communication sliding. Fully reproducible: every oracle call
/// draws from a stream derived from `(seed, agent, k, t)`.
pub fn run_sdcs(
    problem: &ProblemInstance,
    graph: &Graph,
    outer: &OuterSchedule,
    inner: &InnerSchedule,
    init: &InitState,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunTrace, SolverError> {
    run_sliding(
        problem,
        graph,
        outer,
        inner,
        init,
        CsMode::Stochastic { master_seed: seed },
        AlgorithmId::Sdcs,
        &[ScheduleMode::SdcsConvex, ScheduleMode::SdcsStronglyConvex],
        opts,
    )
}

/// Recompute the theta-weighted ergodic pair from snapshots. With unit
/// weights this is the arithmetic mean; it must agree with the running sums
/// kept during the run.
pub fn ergodic_average(
    trace: &RunTrace,
    weights: &[f64],
) -> Result<(StackedPoint, StackedPoint), SolverError> {
    if trace.snapshots.is_empty() {
        return Err(SolverError::EmptyTrace);
    }
    if weights.len() != trace.snapshots.len() {
        return Err(SolverError::WeightMismatch {
            got: weights.len(),
            want: trace.snapshots.len(),
        });
    }
    let first = &trace.snapshots[0];
    let mut primal = StackedPoint::zeros(first.x.m(), first.x.d());
    let mut dual = primal.clone();
    let mut total = 0.0;
    for (snap, &w) in trace.snapshots.iter().zip(weights) {
        primal.add_scaled(w, snap.ergodic_primal());
        dual.add_scaled(w, &snap.y);
        total += w;
    }
    Ok((primal.scaled(1.0 / total), dual.scaled(1.0 / total)))
}
