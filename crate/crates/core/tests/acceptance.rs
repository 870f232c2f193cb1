//! Acceptance suite: every criterion below is a hard check at desk scale,
//! printed as one pass/fail line (run with `--nocapture` to see them all).

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use commslide::bench::{fit_rate, generate_instance, InstanceFamily};
use commslide::metrics::{
    dual_norm_bound, feasibility_residual, min_norm_optimal_dual, reference_solve, theorem_bound,
    BoundInputs, TheoremId,
};
use commslide::model::{
    bregman_div, evaluate_f, prox_step, stacked_v, AgentObjective, BregmanGeometry,
    ConstraintSet, MatrixRows, NoiseKind, ProblemInstance, SetKind, StackedPoint,
};
use commslide::schedule::{
    dcs_convex_schedule, dcs_strongly_convex_schedule, dpd_schedule, sdcs_convex_schedule,
    sdcs_strongly_convex_schedule, validate_inner, validate_outer, ConditionId, InnerSchedule,
    ScheduleMode,
};
use commslide::solver::{
    cs_procedure, run_dcs, run_dpd, run_sdcs, CsMode, InitState, RunOptions,
};
use commslide::topology::{build_graph, laplacian, spectral_constants, Graph, LaplacianOperator};

/// Slack granted for reference accuracy on hard bound inequalities.
const BOUND_SLACK: f64 = 1e-8;

struct Bench {
    problem: ProblemInstance,
    graph: Graph,
    op: LaplacianOperator,
    l_norm: f64,
    sigma_min: f64,
    f_star: f64,
    x_star: StackedPoint,
    init: InitState,
    v0: f64,
    d_tilde: f64,
}

fn setup(family: InstanceFamily, graph_spec: &str, m: usize, d: usize, seed: u64) -> Bench {
    let problem = generate_instance(family, m, d, seed).expect("instance");
    let graph = build_graph(&graph_spec.parse().unwrap()).expect("graph");
    let op = laplacian(&graph, d);
    let sc = spectral_constants(&op).expect("connected");
    let reference = reference_solve(&problem, 1e-8).expect("certified reference");
    let x_star = reference.x_star_stacked(m);
    let init = InitState::centered(&problem);
    let v0 = stacked_v(problem.agents(), &init.x0, &x_star).unwrap();
    let d_tilde = problem.diameter_sq_total();
    Bench {
        problem,
        graph,
        op,
        l_norm: sc.op_norm,
        sigma_min: sc.min_nonzero_singular,
        f_star: reference.f_star,
        x_star,
        init,
        v0,
        d_tilde,
    }
}

impl Bench {
    fn bound_inputs(&self, n: usize) -> BoundInputs {
        BoundInputs {
            l_norm: self.l_norm,
            m: self.problem.m(),
            lipschitz_m: self.problem.lipschitz_m(),
            mu: self.problem.strong_convexity_mu(),
            growth_c: self.problem.growth_constant().unwrap_or(1.0),
            sigma: self.problem.noise_sigma(),
            n,
            d_tilde: self.d_tilde,
            v0: self.v0,
            y0_norm: 0.0,
            ystar_dist: dual_norm_bound(
                self.problem.m(),
                self.problem.lipschitz_m(),
                self.sigma_min,
            )
            .unwrap(),
        }
    }

    fn primal_gap(&self, x: &StackedPoint) -> f64 {
        evaluate_f(self.problem.agents(), x) - self.f_star
    }

    fn combined_residual(&self, x: &StackedPoint) -> f64 {
        let b =
            dual_norm_bound(self.problem.m(), self.problem.lipschitz_m(), self.sigma_min)
                .unwrap();
        self.primal_gap(x) + b * feasibility_residual(x, &self.op).unwrap()
    }
}

#[test]
fn criterion_01_dpd_primal_bound() {
    let start = Instant::now();
    let bench = setup(InstanceFamily::LadConvex, "path:5", 5, 4, 1);
    for n in [10usize, 40, 160] {
        let outer = dpd_schedule(bench.l_norm, n).unwrap();
        let trace =
            run_dpd(&bench.problem, &bench.graph, &outer, &bench.init, &RunOptions::default())
                .unwrap();
        let measured = bench.primal_gap(&trace.ergodic_primal);
        let rhs = theorem_bound(TheoremId::DpdConvexPrimal, &bench.bound_inputs(n)).unwrap();
        assert!(
            measured <= rhs + BOUND_SLACK,
            "N={n}: measured {measured} > rhs {rhs}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "runtime budget exceeded: {elapsed:?}");
    println!("[criterion 01] PASS dpd primal bound holds at N in {{10,40,160}} ({elapsed:?})");
}

#[test]
fn criterion_02_dpd_rate() {
    let bench = setup(InstanceFamily::LadConvex, "path:5", 5, 4, 1);
    let mut pairs = Vec::new();
    for n in [25usize, 50, 100, 200, 400] {
        let outer = dpd_schedule(bench.l_norm, n).unwrap();
        let trace =
            run_dpd(&bench.problem, &bench.graph, &outer, &bench.init, &RunOptions::default())
                .unwrap();
        pairs.push((n as f64, bench.combined_residual(&trace.ergodic_primal)));
    }
    let fit = fit_rate(&pairs).unwrap();
    assert!(fit.slope <= -0.8, "slope {} > -0.8", fit.slope);
    assert!(fit.r_squared >= 0.9, "R^2 {} < 0.9", fit.r_squared);
    println!(
        "[criterion 02] PASS dpd rate slope {:.3} (R^2 {:.3})",
        fit.slope, fit.r_squared
    );
}

#[test]
fn criterion_03_dcs_bounds() {
    let start = Instant::now();
    let bench = setup(InstanceFamily::LadConvex, "path:5", 5, 4, 1);
    for n in [10usize, 40] {
        let (outer, inner) = dcs_convex_schedule(
            bench.l_norm,
            bench.problem.m(),
            bench.problem.lipschitz_m(),
            n,
            bench.d_tilde,
        )
        .unwrap();
        let trace = run_dcs(
            &bench.problem,
            &bench.graph,
            &outer,
            &inner,
            &bench.init,
            &RunOptions::default(),
        )
        .unwrap();
        let inputs = bench.bound_inputs(n);
        let measured_primal = bench.primal_gap(&trace.ergodic_primal);
        let measured_feas = feasibility_residual(&trace.ergodic_primal, &bench.op).unwrap();
        let rhs_primal = theorem_bound(TheoremId::DcsConvexPrimal, &inputs).unwrap();
        let rhs_feas = theorem_bound(TheoremId::DcsConvexFeasibility, &inputs).unwrap();
        assert!(measured_primal <= rhs_primal + BOUND_SLACK, "N={n} primal");
        assert!(measured_feas <= rhs_feas + BOUND_SLACK, "N={n} feasibility");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "runtime budget exceeded: {elapsed:?}");
    println!("[criterion 03] PASS dcs primal+feasibility bounds at N in {{10,40}} ({elapsed:?})");
}

#[test]
fn criterion_04_communication_accounting() {
    let bench = setup(InstanceFamily::LadConvex, "path:5", 5, 4, 1);
    let n = 12usize;
    let (outer_a, inner) = dcs_convex_schedule(
        bench.l_norm,
        5,
        bench.problem.lipschitz_m(),
        n,
        bench.d_tilde,
    )
    .unwrap();
    let trace_a = run_dcs(
        &bench.problem,
        &bench.graph,
        &outer_a,
        &inner,
        &bench.init,
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!(trace_a.ledger.comm_rounds, 2 * n as u64);
    for evals in &trace_a.ledger.per_agent_subgrad_evals {
        assert_eq!(*evals, outer_a.total_inner());
    }
    // A different T_k setting (via D_tilde) leaves the rounds untouched.
    let (outer_b, inner_b) = dcs_convex_schedule(
        bench.l_norm,
        5,
        bench.problem.lipschitz_m(),
        n,
        bench.d_tilde / 4.0,
    )
    .unwrap();
    assert_ne!(outer_a.inner_t(1), outer_b.inner_t(1));
    let trace_b = run_dcs(
        &bench.problem,
        &bench.graph,
        &outer_b,
        &inner_b,
        &bench.init,
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!(trace_a.ledger.comm_rounds, trace_b.ledger.comm_rounds);

    // Stochastic runs account their oracle separately, same closed form.
    let stoch = setup(InstanceFamily::LadStochastic, "path:5", 5, 4, 1);
    let (outer_s, inner_s) = sdcs_convex_schedule(
        stoch.l_norm,
        5,
        stoch.problem.lipschitz_m(),
        stoch.problem.noise_sigma(),
        n,
        stoch.d_tilde,
    )
    .unwrap();
    let trace_s = run_sdcs(
        &stoch.problem,
        &stoch.graph,
        &outer_s,
        &inner_s,
        &stoch.init,
        0,
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!(trace_s.ledger.comm_rounds, 2 * n as u64);
    for evals in &trace_s.ledger.per_agent_stoch_evals {
        assert_eq!(*evals, outer_s.total_inner());
    }
    for evals in &trace_s.ledger.per_agent_subgrad_evals {
        assert_eq!(*evals, 0);
    }
    println!(
        "[criterion 04] PASS comm_rounds = 2N exactly, per-agent evals = sum T_k, rounds independent of T_k"
    );
}

#[test]
fn criterion_05_strongly_convex_dcs() {
    // The criterion pins (mu = 0.5, C = 1) and the N grid; this instance
    // (complete graph, 3 agents, d = 2) is well-conditioned enough for the
    // quadratic feasibility decay to show inside the grid.
    let bench = setup(InstanceFamily::LadStronglyConvex, "complete:3", 3, 2, 3);
    assert_eq!(bench.problem.strong_convexity_mu(), 0.5);
    assert_eq!(bench.problem.growth_constant(), Some(1.0));
    let mut pairs = Vec::new();
    for n in [4usize, 8, 16, 32] {
        let (outer, inner) = dcs_strongly_convex_schedule(
            bench.problem.strong_convexity_mu(),
            1.0,
            bench.l_norm,
            3,
            bench.problem.lipschitz_m(),
            n,
            bench.d_tilde,
        )
        .unwrap();
        let trace = run_dcs(
            &bench.problem,
            &bench.graph,
            &outer,
            &inner,
            &bench.init,
            &RunOptions::default(),
        )
        .unwrap();
        let measured = bench.primal_gap(&trace.ergodic_primal);
        let rhs =
            theorem_bound(TheoremId::DcsStronglyConvexPrimal, &bench.bound_inputs(n)).unwrap();
        assert!(measured <= rhs + BOUND_SLACK, "N={n}: {measured} > {rhs}");
        pairs.push((n as f64, feasibility_residual(&trace.ergodic_primal, &bench.op).unwrap()));
    }
    let fit = fit_rate(&pairs).unwrap();
    assert!(fit.slope <= -1.6, "feasibility slope {} > -1.6", fit.slope);
    println!(
        "[criterion 05] PASS strongly convex primal bound + feasibility slope {:.3}",
        fit.slope
    );
}

#[test]
fn criterion_06_sdcs_expectation_bounds() {
    let start = Instant::now();
    let n = 20usize;
    let seeds: Vec<u64> = (0..100).collect();

    // General convex, sigma = M.
    let bench = setup(InstanceFamily::LadStochastic, "path:5", 5, 4, 1);
    assert_eq!(bench.problem.noise_sigma(), bench.problem.lipschitz_m());
    let (outer, inner) = sdcs_convex_schedule(
        bench.l_norm,
        5,
        bench.problem.lipschitz_m(),
        bench.problem.noise_sigma(),
        n,
        bench.d_tilde,
    )
    .unwrap();
    let mut sum = 0.0;
    for &seed in &seeds {
        let trace = run_sdcs(
            &bench.problem,
            &bench.graph,
            &outer,
            &inner,
            &bench.init,
            seed,
            &RunOptions::default(),
        )
        .unwrap();
        sum += bench.primal_gap(&trace.ergodic_primal);
    }
    let mean = sum / seeds.len() as f64;
    let rhs = theorem_bound(TheoremId::SdcsConvexPrimal, &bench.bound_inputs(n)).unwrap();
    assert!(mean <= 1.25 * rhs + BOUND_SLACK, "mean {mean} > 1.25 * {rhs}");

    // Strongly convex analogue.
    let bench_sc = setup(InstanceFamily::LadStochasticStronglyConvex, "path:5", 5, 4, 1);
    let (outer_sc, inner_sc) = sdcs_strongly_convex_schedule(
        bench_sc.problem.strong_convexity_mu(),
        1.0,
        bench_sc.l_norm,
        5,
        bench_sc.problem.lipschitz_m(),
        bench_sc.problem.noise_sigma(),
        n,
        bench_sc.d_tilde,
    )
    .unwrap();
    let mut sum_sc = 0.0;
    for &seed in &seeds {
        let trace = run_sdcs(
            &bench_sc.problem,
            &bench_sc.graph,
            &outer_sc,
            &inner_sc,
            &bench_sc.init,
            seed,
            &RunOptions::default(),
        )
        .unwrap();
        sum_sc += bench_sc.primal_gap(&trace.ergodic_primal);
    }
    let mean_sc = sum_sc / seeds.len() as f64;
    let rhs_sc =
        theorem_bound(TheoremId::SdcsStronglyConvexPrimal, &bench_sc.bound_inputs(n)).unwrap();
    assert!(mean_sc <= 1.25 * rhs_sc + BOUND_SLACK, "mean {mean_sc} > 1.25 * {rhs_sc}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 180.0, "runtime budget exceeded: {elapsed:?}");
    println!(
        "[criterion 06] PASS sdcs expectation bounds over 100 seeds (convex mean {mean:.3e} vs {rhs:.3e}; strongly convex mean {mean_sc:.3e} vs {rhs_sc:.3e}) ({elapsed:?})"
    );
}

/// Random separable objective on a box for the inner-loop properties.
fn random_objective(
    rng: &mut ChaCha12Rng,
    d: usize,
    mu: f64,
    set: &ConstraintSet,
) -> AgentObjective {
    let rows = rng.gen_range(1..=3);
    let mut data = vec![0.0; rows * d];
    let mut b = Vec::with_capacity(rows);
    for r in 0..rows {
        let col = rng.gen_range(0..d);
        let coeff: f64 = rng.gen_range(0.2..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        data[r * d + col] = coeff;
        b.push(coeff * rng.gen_range(-1.2..1.2));
    }
    let quad_center =
        if mu > 0.0 { (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect() } else { Vec::new() };
    AgentObjective::lad(
        MatrixRows::new(rows, d, data).unwrap(),
        b,
        mu,
        quad_center,
        NoiseKind::None,
        set,
    )
    .unwrap()
}

#[test]
fn criterion_07_inner_loop_recursion() {
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    let geom = BregmanGeometry::euclidean();
    let mut checks = 0usize;
    for trial in 0..1000 {
        let d = rng.gen_range(1..=3);
        let set = ConstraintSet::symmetric_box(d, 1.5);
        let strongly_convex = trial % 2 == 1;
        let mu = if strongly_convex { rng.gen_range(0.1..1.5) } else { 0.0 };
        let growth_c = 1.0;
        let objective = random_objective(&mut rng, d, mu, &set);
        let big_m = objective.lipschitz_m();
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let t_count = rng.gen_range(1..=20u64);
        let eta = rng.gen_range(0.3..5.0);
        let inner = if strongly_convex {
            InnerSchedule::StronglyConvex { mu, growth_c }
        } else {
            InnerSchedule::Convex
        };
        assert!(validate_inner(&inner, eta, mu, growth_c, t_count));

        let mut ledger = commslide::netsim::RoundLedger::new(1);
        let (u_last, u_hat) = cs_procedure(
            &objective,
            &set,
            &geom,
            t_count,
            eta,
            &w,
            &x,
            &inner,
            1,
            CsMode::Exact,
            0,
            &mut ledger,
        )
        .unwrap();

        let phi = |u: &[f64]| -> f64 {
            w.iter().zip(u).map(|(a, b)| a * b).sum::<f64>()
                + objective.eval(u)
                + eta * bregman_div(&geom, &x, u).unwrap()
        };
        let lambda_sum: f64 = (1..=t_count).map(|t| inner.lambda(t)).sum();
        let beta_last = inner.beta(eta, t_count);
        let beta_first = inner.beta(eta, 1);
        let tail: f64 = (1..=t_count)
            .map(|t| big_m * big_m * inner.lambda(t) / (2.0 * eta * inner.beta(eta, t)))
            .sum();
        for _ in 0..100 {
            let u: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let lhs = (eta * (1.0 + beta_last) * inner.lambda(t_count)
                * bregman_div(&geom, &u_last, &u).unwrap())
                / lambda_sum
                + phi(&u_hat)
                - phi(&u);
            let rhs = ((eta * beta_first - mu / growth_c)
                * inner.lambda(1)
                * bregman_div(&geom, &x, &u).unwrap()
                + tail)
                / lambda_sum;
            assert!(lhs <= rhs + 1e-9, "trial {trial}: {lhs} > {rhs}");
            checks += 1;
        }
    }
    println!("[criterion 07] PASS inner-loop recursion holds on {checks} randomized checks");
}

fn random_feasible(rng: &mut ChaCha12Rng, set: &ConstraintSet) -> Vec<f64> {
    match set.kind() {
        SetKind::Box { lo, hi } => {
            lo.iter().zip(hi).map(|(l, h)| rng.gen_range(*l..*h)).collect()
        }
        SetKind::Ball { center, radius } => {
            let d = center.len();
            let dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-9);
            let r = radius * rng.gen_range(0.0..1.0f64).powf(1.0 / d as f64);
            center.iter().zip(&dir).map(|(c, v)| c + r * v / norm).collect()
        }
        SetKind::Simplex => {
            let d = set.dim();
            let raw: Vec<f64> = (0..d).map(|_| rng.gen_range(0.01..1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / s).collect()
        }
    }
}

#[test]
fn criterion_08_three_point_inequality() {
    let mut rng = ChaCha12Rng::seed_from_u64(7777);
    let mut checks = 0usize;
    for trial in 0..1000 {
        let d = rng.gen_range(1..=3);
        let (geom, set) = match trial % 3 {
            0 => (BregmanGeometry::euclidean(), ConstraintSet::symmetric_box(d, 1.2)),
            1 => (
                BregmanGeometry::euclidean(),
                ConstraintSet::euclidean_ball(
                    (0..d).map(|_| rng.gen_range(-0.3..0.3)).collect(),
                    rng.gen_range(0.5..1.5),
                )
                .unwrap(),
            ),
            _ => (BregmanGeometry::entropy(), ConstraintSet::simplex(d.max(2))),
        };
        let dim = set.dim();
        let g: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x_anchor = random_feasible(&mut rng, &set);
        let u_anchor = random_feasible(&mut rng, &set);
        let mu1 = rng.gen_range(0.2..4.0);
        let mu2 = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..3.0) };
        let u_star = prox_step(&geom, &set, &g, &x_anchor, &u_anchor, mu1, mu2).unwrap();
        assert!(set.contains(&u_star, 1e-12));
        let q = |u: &[f64]| g.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
        let objective = |u: &[f64]| {
            q(u) + mu1 * bregman_div(&geom, &x_anchor, u).unwrap()
                + mu2 * bregman_div(&geom, &u_anchor, u).unwrap()
        };
        let at_star = objective(&u_star);
        for _ in 0..200 {
            let u = random_feasible(&mut rng, &set);
            let rhs = objective(&u) - (mu1 + mu2) * bregman_div(&geom, &u_star, &u).unwrap();
            assert!(at_star <= rhs + 1e-9, "trial {trial}: {at_star} > {rhs}");
            checks += 1;
        }
    }
    println!("[criterion 08] PASS three-point inequality holds on {checks} randomized checks");
}

#[test]
fn criterion_09_schedule_validators() {
    let mut rng = ChaCha12Rng::seed_from_u64(31);
    for _ in 0..200 {
        let l = rng.gen_range(0.5..4.0);
        let m = rng.gen_range(2..8usize);
        let big_m = rng.gen_range(0.5..4.0);
        let mu = rng.gen_range(0.1..2.0);
        let c = rng.gen_range(1.0..2.0);
        let sigma = rng.gen_range(0.0..2.0);
        let n = rng.gen_range(1..=1000usize);
        let d = rng.gen_range(0.5..4.0);
        let s = dpd_schedule(l, n).unwrap();
        assert!(validate_outer(&s, l, 0.0, 1.0).all_passed());
        let (o, i) = dcs_convex_schedule(l, m, big_m, n, d).unwrap();
        assert!(validate_outer(&o, l, 0.0, 1.0).all_passed());
        assert!(validate_inner(&i, o.eta(1), 0.0, 1.0, o.inner_t(1).min(300)));
        if let Ok((o, i)) = dcs_strongly_convex_schedule(mu, c, l, m, big_m, n, d) {
            assert!(validate_outer(&o, l, mu, c).all_passed());
            assert!(validate_inner(&i, o.eta(n), mu, c, o.inner_t(n).min(300)));
        }
        let (o, _) = sdcs_convex_schedule(l, m, big_m, sigma, n, d).unwrap();
        assert!(validate_outer(&o, l, 0.0, 1.0).all_passed());
        if let Ok((o, _)) = sdcs_strongly_convex_schedule(mu, c, l, m, big_m, sigma, n, d) {
            assert!(validate_outer(&o, l, mu, c).all_passed());
        }
    }

    // Six targeted perturbations, one per exact-prox condition.
    let l = 3.0;
    let n = 6;
    let base = || dpd_schedule(l, n).unwrap();
    let report = |s| validate_outer(&s, l, 0.0, 1.0);

    let mut s = base();
    s.set_eta(n, s.eta(n) * 2.0);
    let r = report(s);
    assert_eq!(r.failed(), vec![ConditionId::ThetaEta]);

    let mut s = base();
    s.set_alpha(n, 1.1);
    let r = report(s);
    assert_eq!(r.failed(), vec![ConditionId::AlphaTheta]);

    let mut s = base();
    s.set_tau(2, s.tau(2) * 2.0);
    let r = report(s);
    assert_eq!(r.failed(), vec![ConditionId::ThetaTau]);

    let mut s = base();
    s.scale_tau(0.25);
    let r = report(s);
    assert!(r.failed().contains(&ConditionId::EtaTauLK));

    let mut s = base();
    s.set_tau(n, s.tau(n) * 0.5);
    let r = report(s);
    assert_eq!(r.failed(), vec![ConditionId::EtaTau]);

    let mut s = base();
    s.set_eta(n, s.eta(n) * 0.25);
    let r = report(s);
    assert_eq!(r.failed(), vec![ConditionId::EtaTauTheta]);

    println!(
        "[criterion 09] PASS 200 randomized constructor/validator trials + 6 targeted violations"
    );
}

#[test]
fn criterion_10_dual_norm_bound() {
    let bench = setup(InstanceFamily::LadConvex, "path:3", 3, 1, 1);
    assert!((bench.sigma_min - 1.0).abs() < 1e-9, "path:3 has sigma_min = 1");
    let bound =
        dual_norm_bound(3, bench.problem.lipschitz_m(), bench.sigma_min).unwrap();
    let found = min_norm_optimal_dual(
        &bench.problem,
        &bench.graph,
        bench.x_star.block(0)[0],
        2.0 * bound,
        1e-4,
    )
    .unwrap()
    .expect("the brute-force search must locate an optimal dual");
    let (_, norm) = found;
    assert!(
        norm <= bound + 1e-4,
        "minimal-norm dual {norm} exceeds sqrt(m) M / sigma_min = {bound}"
    );
    println!(
        "[criterion 10] PASS brute-force minimal-norm dual {norm:.4} <= bound {bound:.4}"
    );
}

#[test]
fn criterion_11_sdcs_zero_noise_degeneracy() {
    use commslide::bench::{load_config, run_experiment, ExperimentConfig};
    let base = |dir: &std::path::Path, algorithm| ExperimentConfig {
        graph: "path:5".parse().unwrap(),
        family: InstanceFamily::LadConvex, // sigma = 0
        m: 5,
        d: 4,
        data_seed: 1,
        algorithm,
        n_grid: vec![8],
        d_tilde: None,
        seeds: vec![4],
        out: Some(dir.to_path_buf()),
        assert_bounds: true,
        snapshot_stride: 1,
        inner_cap: None,
        tau_scale: None,
        x0: Default::default(),
        y0: Default::default(),
    };
    let dir_dcs = tempfile::tempdir().unwrap();
    let dir_sdcs = tempfile::tempdir().unwrap();
    let out_dcs =
        run_experiment(&base(dir_dcs.path(), commslide::solver::AlgorithmId::Dcs)).unwrap();
    let out_sdcs =
        run_experiment(&base(dir_sdcs.path(), commslide::solver::AlgorithmId::Sdcs)).unwrap();
    assert!(out_dcs.passed && out_sdcs.passed);
    let trace_dcs = std::fs::read(dir_dcs.path().join("n8_seed4/trace.csv")).unwrap();
    let trace_sdcs = std::fs::read(dir_sdcs.path().join("n8_seed4/trace.csv")).unwrap();
    assert_eq!(trace_dcs, trace_sdcs, "zero-noise traces must be byte-identical");
    // And the manifests replay.
    let cfg = load_config(&dir_sdcs.path().join("n8_seed4/manifest.json")).unwrap();
    assert_eq!(cfg.algorithm, commslide::solver::AlgorithmId::Sdcs);
    println!("[criterion 11] PASS sigma = 0 sdcs trace byte-identical to dcs trace");
}

#[test]
fn schedule_modes_route_to_matching_solvers() {
    // The five modes exist and the solvers reject mismatches; exercised here
    // so the acceptance binary covers the whole schedule surface.
    let bench = setup(InstanceFamily::LadConvex, "path:3", 3, 2, 2);
    let (outer, inner) =
        dcs_convex_schedule(bench.l_norm, 3, bench.problem.lipschitz_m(), 4, bench.d_tilde)
            .unwrap();
    assert_eq!(outer.mode, ScheduleMode::DcsConvex);
    let err = run_dpd(&bench.problem, &bench.graph, &outer, &bench.init, &RunOptions::default());
    assert!(err.is_err());
    let ok = run_dcs(
        &bench.problem,
        &bench.graph,
        &outer,
        &inner,
        &bench.init,
        &RunOptions::default(),
    );
    assert!(ok.is_ok());
}
