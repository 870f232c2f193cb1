//! Outer/inner parameter sequences and their feasibility validators.
//!
//! Each solver regime has a closed-form schedule that the convergence
//! theory certifies; the validators re-check the underlying inequality
//! conditions numerically (`<=` with 1e-12 absolute slack, since several
//! hold with exact equality under the constructed parameters).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard cap on inner iteration counts; the closed-form `T_k` can explode
/// for tiny `D_tilde`, and silent truncation would invalidate the bounds.
pub const DEFAULT_INNER_CAP: u64 = 10_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("horizon N must be at least 1")]
    EmptyHorizon,
    #[error("growth constant C must be >= 1, got {0}")]
    GrowthTooSmall(f64),
    #[error("inner iteration count T_k = {t_k} exceeds the cap {cap}; pick a larger D_tilde")]
    InnerCapExceeded { t_k: f64, cap: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    DpdConvex,
    DcsConvex,
    DcsStronglyConvex,
    SdcsConvex,
    SdcsStronglyConvex,
}

/// Outer-loop parameters for `k = 1..=N`, stored as explicit arrays so run
/// manifests can serialize and replay them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterSchedule {
    pub mode: ScheduleMode,
    n: usize,
    alpha: Vec<f64>,
    theta: Vec<f64>,
    eta: Vec<f64>,
    tau: Vec<f64>,
    inner_t: Vec<u64>,
}

impl OuterSchedule {
    pub fn horizon(&self) -> usize {
        self.n
    }

    pub fn alpha(&self, k: usize) -> f64 {
        self.alpha[k - 1]
    }

    pub fn theta(&self, k: usize) -> f64 {
        self.theta[k - 1]
    }

    pub fn eta(&self, k: usize) -> f64 {
        self.eta[k - 1]
    }

    pub fn tau(&self, k: usize) -> f64 {
        self.tau[k - 1]
    }

    pub fn inner_t(&self, k: usize) -> u64 {
        self.inner_t[k - 1]
    }

    pub fn total_inner(&self) -> u64 {
        self.inner_t.iter().sum()
    }

    /// Scale every `tau_k` (test hook for targeted validator violations).
    pub fn scale_tau(&mut self, factor: f64) {
        for t in &mut self.tau {
            *t *= factor;
        }
    }

    pub fn set_alpha(&mut self, k: usize, v: f64) {
        self.alpha[k - 1] = v;
    }

    pub fn set_theta(&mut self, k: usize, v: f64) {
        self.theta[k - 1] = v;
    }

    pub fn set_eta(&mut self, k: usize, v: f64) {
        self.eta[k - 1] = v;
    }

    pub fn set_tau(&mut self, k: usize, v: f64) {
        self.tau[k - 1] = v;
    }

    pub fn set_inner_t(&mut self, k: usize, v: u64) {
        self.inner_t[k - 1] = v;
    }
}

/// Inner-loop weights. The strongly convex variant's `beta` depends on the
/// outer index through `eta_k`, which callers pass in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "inner")]
pub enum InnerSchedule {
    /// `lambda_t = t + 1`, `beta_t = t / 2`.
    Convex,
    /// `lambda_t = t`, `beta_t = (t+1) mu / (2 eta_k C) + (t-1)/2`.
    StronglyConvex { mu: f64, growth_c: f64 },
}

impl InnerSchedule {
    pub fn lambda(&self, t: u64) -> f64 {
        match self {
            InnerSchedule::Convex => (t + 1) as f64,
            InnerSchedule::StronglyConvex { .. } => t as f64,
        }
    }

    pub fn beta(&self, eta_k: f64, t: u64) -> f64 {
        match *self {
            InnerSchedule::Convex => t as f64 / 2.0,
            InnerSchedule::StronglyConvex { mu, growth_c } => {
                (t + 1) as f64 * mu / (2.0 * eta_k * growth_c) + (t - 1) as f64 / 2.0
            }
        }
    }
}

fn require_positive(name: &'static str, value: f64) -> Result<(), ScheduleError> {
    if !value.is_finite() || value <= 0.0 {
        return Err(ScheduleError::NonPositive { name, value });
    }
    Ok(())
}

fn ceil_capped(formula: f64, cap: u64) -> Result<u64, ScheduleError> {
    let t = formula.ceil().max(1.0);
    if !t.is_finite() || t > cap as f64 {
        return Err(ScheduleError::InnerCapExceeded { t_k: formula, cap });
    }
    Ok(t as u64)
}

/// Exact-prox primal-dual parameters: `alpha_k = theta_k = 1`,
/// `eta_k = 2||L||`, `tau_k = ||L||`.
pub fn dpd_schedule(l_norm: f64, n: usize) -> Result<OuterSchedule, ScheduleError> {
    require_positive("l_norm", l_norm)?;
    if n < 1 {
        return Err(ScheduleError::EmptyHorizon);
    }
    Ok(OuterSchedule {
        mode: ScheduleMode::DpdConvex,
        n,
        alpha: vec![1.0; n],
        theta: vec![1.0; n],
        eta: vec![2.0 * l_norm; n],
        tau: vec![l_norm; n],
        inner_t: vec![1; n], // sentinel; the exact solver runs no inner loop
    })
}

/// Sliding parameters for general convex objectives:
/// the exact-prox outer sequence plus `T_k = ceil(m M^2 N / (||L||^2 D))`.
pub fn dcs_convex_schedule(
    l_norm: f64,
    m: usize,
    big_m: f64,
    n: usize,
    d_tilde: f64,
) -> Result<(OuterSchedule, InnerSchedule), ScheduleError> {
    dcs_convex_schedule_with_cap(l_norm, m, big_m, n, d_tilde, DEFAULT_INNER_CAP)
}

pub fn dcs_convex_schedule_with_cap(
    l_norm: f64,
    m: usize,
    big_m: f64,
    n: usize,
    d_tilde: f64,
    cap: u64,
) -> Result<(OuterSchedule, InnerSchedule), ScheduleError> {
    require_positive("l_norm", l_norm)?;
    require_positive("m", m as f64)?;
    require_positive("M", big_m)?;
    require_positive("d_tilde", d_tilde)?;
    if n < 1 {
        return Err(ScheduleError::EmptyHorizon);
    }
    let t_formula = m as f64 * big_m * big_m * n as f64 / (l_norm * l_norm * d_tilde);
    let t_k = ceil_capped(t_formula, cap)?;
    let mut outer = dpd_schedule(l_norm, n)?;
    outer.mode = ScheduleMode::DcsConvex;
    outer.inner_t = vec![t_k; n];
    Ok((outer, InnerSchedule::Convex))
}

/// Sliding parameters for strongly convex objectives:
/// `alpha_k = k/(k+1)`, `theta_k = k+1`, `eta_k = k mu / (2C)`,
/// `tau_k = 4||L||^2 C / ((k+1) mu)`, constant
/// `T_k = ceil( sqrt(2m/D) (C M N / mu) max{ sqrt(2m/D) 4CM/mu, 1 } )`.
pub fn dcs_strongly_convex_schedule(
    mu: f64,
    growth_c: f64,
    l_norm: f64,
    m: usize,
    big_m: f64,
    n: usize,
    d_tilde: f64,
) -> Result<(OuterSchedule, InnerSchedule), ScheduleError> {
    dcs_strongly_convex_schedule_with_cap(
        mu,
        growth_c,
        l_norm,
        m,
        big_m,
        n,
        d_tilde,
        DEFAULT_INNER_CAP,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn dcs_strongly_convex_schedule_with_cap(
    mu: f64,
    growth_c: f64,
    l_norm: f64,
    m: usize,
    big_m: f64,
    n: usize,
    d_tilde: f64,
    cap: u64,
) -> Result<(OuterSchedule, InnerSchedule), ScheduleError> {
    require_positive("mu", mu)?;
    if growth_c < 1.0 {
        return Err(ScheduleError::GrowthTooSmall(growth_c));
    }
    require_positive("l_norm", l_norm)?;
    require_positive("M", big_m)?;
    require_positive("d_tilde", d_tilde)?;
    if n < 1 {
        return Err(ScheduleError::EmptyHorizon);
    }
    let root = (2.0 * m as f64 / d_tilde).sqrt();
    let t_formula = root * growth_c * big_m * n as f64 / mu
        * (root * 4.0 * growth_c * big_m / mu).max(1.0);
    let t_k = ceil_capped(t_formula, cap)?;
    let mut alpha = Vec::with_capacity(n);
    let mut theta = Vec::with_capacity(n);
    let mut eta = Vec::with_capacity(n);
    let mut tau = Vec::with_capacity(n);
    for k in 1..=n {
        let kf = k as f64;
        alpha.push(kf / (kf + 1.0));
        theta.push(kf + 1.0);
        eta.push(kf * mu / (2.0 * growth_c));
        tau.push(4.0 * l_norm * l_norm * growth_c / ((kf + 1.0) * mu));
    }
    Ok((
        OuterSchedule {
            mode: ScheduleMode::DcsStronglyConvex,
            n,
            alpha,
            theta,
            eta,
            tau,
            inner_t: vec![t_k; n],
        },
        InnerSchedule::StronglyConvex { mu, growth_c },
    ))
}

/// Stochastic sliding, general convex: as the deterministic schedule with
/// `M^2` replaced by `M^2 + sigma^2` in `T_k`.
pub fn sdcs_convex_schedule(
    l_norm: f64,
    m: usize,
    big_m: f64,
    sigma: f64,
    n: usize,
    d_tilde: f64,
) -> Result<(OuterSchedule, InnerSchedule), ScheduleError> {
    sdcs_convex_schedule_with_cap(l_norm, m, big_m, sigma, n, d_tilde, DEFAULT_INNER_CAP)
}

pub fn sdcs_convex_schedule_with_cap(
    l_norm: f64,
    m: usize,
    big_m: f64,
    sigma: f64,
    n: usize,
    d_tilde: f64,
    cap: u64,
) -> Result<(OuterSchedule, InnerSchedule), ScheduleError> {
    if sigma < 0.0 {
        return Err(ScheduleError::NonPositive { name: "sigma", value: sigma });
    }
    require_positive("l_norm", l_norm)?;
    require_positive("M", big_m)?;
    require_positive("d_tilde", d_tilde)?;
    if n < 1 {
        return Err(ScheduleError::EmptyHorizon);
    }
    let t_formula =
        m as f64 * (big_m * big_m + sigma * sigma) * n as f64 / (l_norm * l_norm * d_tilde);
    let t_k = ceil_capped(t_formula, cap)?;
    let mut outer = dpd_schedule(l_norm, n)?;
    outer.mode = ScheduleMode::SdcsConvex;
    outer.inner_t = vec![t_k; n];
    Ok((outer, InnerSchedule::Convex))
}

/// Stochastic sliding, strongly convex:
/// `T_k = ceil( sqrt(m(M^2+sigma^2)/D) (2NC/mu) max{ sqrt(m(M^2+sigma^2)/D) 8C/mu, 1 } )`.
#[allow(clippy::too_many_arguments)]
pub fn sdcs_strongly_convex_schedule(
    mu: f64,
    growth_c: f64,
    l_norm: f64,
    m: usize,
    big_m: f64,
    sigma: f64,
    n: usize,
    d_tilde: f64,
) -> Result<(OuterSchedule, InnerSchedule), ScheduleError> {
    sdcs_strongly_convex_schedule_with_cap(
        mu,
        growth_c,
        l_norm,
        m,
        big_m,
        sigma,
        n,
        d_tilde,
        DEFAULT_INNER_CAP,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn sdcs_strongly_convex_schedule_with_cap(
    mu: f64,
    growth_c: f64,
    l_norm: f64,
    m: usize,
    big_m: f64,
    sigma: f64,
    n: usize,
    d_tilde: f64,
    cap: u64,
) -> Result<(OuterSchedule, InnerSchedule), ScheduleError> {
    if sigma < 0.0 {
        return Err(ScheduleError::NonPositive { name: "sigma", value: sigma });
    }
    let (mut outer, inner) = dcs_strongly_convex_schedule_with_cap(
        mu, growth_c, l_norm, m, big_m, n, d_tilde, cap,
    )?;
    let root = (m as f64 * (big_m * big_m + sigma * sigma) / d_tilde).sqrt();
    let t_formula = root * 2.0 * n as f64 * growth_c / mu
        * (root * 8.0 * growth_c / mu).max(1.0);
    let t_k = ceil_capped(t_formula, cap)?;
    outer.mode = ScheduleMode::SdcsStronglyConvex;
    outer.inner_t = vec![t_k; outer.n];
    Ok((outer, inner))
}

/// Feasibility conditions checked by `validate_outer` / `validate_inner`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    /// `theta_k eta_k <= theta_{k-1} eta_{k-1}` (exact-prox outer loop).
    ThetaEta,
    /// `alpha_k theta_k = theta_{k-1}`.
    AlphaTheta,
    /// `theta_k tau_k <= theta_{k-1} tau_{k-1}`.
    ThetaTau,
    /// `alpha_k ||L||^2 <= eta_{k-1} tau_k`.
    EtaTauLK,
    /// `theta_1 tau_1 = theta_N tau_N`.
    EtaTau,
    /// `theta_N ||L||^2 <= theta_1 tau_1 eta_N`.
    EtaTauTheta,
    /// Sliding (convex): `theta_k (T_k+1)(T_k+2) eta_k / (T_k (T_k+3))`
    /// nonincreasing in `k`.
    ThetaEtaD,
    /// Sliding (strongly convex): `theta_k eta_k <= theta_{k-1} (mu/C + eta_{k-1})`.
    ThetaEtaDs,
    /// Inner weights: `lambda_{t+1} (eta beta_{t+1} - mu/C) <= lambda_t (1 + beta_t) eta`.
    BetaW,
}

impl ConditionId {
    pub fn name(&self) -> &'static str {
        match self {
            ConditionId::ThetaEta => "theta_eta",
            ConditionId::AlphaTheta => "alpha_theta",
            ConditionId::ThetaTau => "theta_tau",
            ConditionId::EtaTauLK => "eta_tau_L_k",
            ConditionId::EtaTau => "eta_tau",
            ConditionId::EtaTauTheta => "eta_tau_theta",
            ConditionId::ThetaEtaD => "theta_eta_d",
            ConditionId::ThetaEtaDs => "theta_eta_ds",
            ConditionId::BetaW => "beta_w",
        }
    }
}

/// Conditions are checked with slack `1e-12 * max(1, |lhs|, |rhs|)`:
/// several hold with exact equality under the theorem parameters, so the
/// slack must scale with the magnitude of the compared products.
pub const VALIDATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: ConditionId,
    pub passed: bool,
    /// Iterate with the smallest margin (0 when the condition is vacuous).
    pub worst_k: usize,
    /// `min_k (rhs - lhs)`; for equality conditions, `-max_k |lhs - rhs|`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub mode: ScheduleMode,
    pub checks: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<ConditionId> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.condition).collect()
    }

    pub fn check(&self, id: ConditionId) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.condition == id)
    }
}

fn scaled_slack(lhs: f64, rhs: f64) -> f64 {
    VALIDATION_SLACK * lhs.abs().max(rhs.abs()).max(1.0)
}

fn inequality_check<I>(condition: ConditionId, pairs: I) -> ConditionCheck
where
    I: IntoIterator<Item = (usize, f64, f64)>, // (k, lhs, rhs): require lhs <= rhs
{
    let mut worst_k = 0;
    let mut margin = f64::INFINITY;
    let mut passed = true;
    for (k, lhs, rhs) in pairs {
        let m = rhs - lhs;
        if m < margin {
            margin = m;
            worst_k = k;
        }
        if m < -scaled_slack(lhs, rhs) {
            passed = false;
        }
    }
    if margin == f64::INFINITY {
        // Vacuous (e.g. N = 1).
        return ConditionCheck { condition, passed: true, worst_k: 0, margin };
    }
    ConditionCheck { condition, passed, worst_k, margin }
}

fn equality_check<I>(condition: ConditionId, pairs: I) -> ConditionCheck
where
    I: IntoIterator<Item = (usize, f64, f64)>,
{
    let mut worst_k = 0;
    let mut margin = f64::INFINITY;
    let mut passed = true;
    for (k, lhs, rhs) in pairs {
        let m = -(lhs - rhs).abs();
        if m < margin {
            margin = m;
            worst_k = k;
        }
        if m < -scaled_slack(lhs, rhs) {
            passed = false;
        }
    }
    if margin == f64::INFINITY {
        return ConditionCheck { condition, passed: true, worst_k: 0, margin };
    }
    ConditionCheck { condition, passed, worst_k, margin }
}

/// Check every outer-loop condition applicable to the schedule's mode.
/// Failures are report content, not errors.
pub fn validate_outer(
    s: &OuterSchedule,
    l_norm: f64,
    mu: f64,
    growth_c: f64,
) -> ValidationReport {
    let n = s.n;
    let l2 = l_norm * l_norm;
    let ks = 2..=n;
    let mut checks = Vec::new();

    if s.mode == ScheduleMode::DpdConvex {
        checks.push(inequality_check(
            ConditionId::ThetaEta,
            ks.clone().map(|k| (k, s.theta(k) * s.eta(k), s.theta(k - 1) * s.eta(k - 1))),
        ));
    }
    checks.push(equality_check(
        ConditionId::AlphaTheta,
        ks.clone().map(|k| (k, s.alpha(k) * s.theta(k), s.theta(k - 1))),
    ));
    checks.push(inequality_check(
        ConditionId::ThetaTau,
        ks.clone().map(|k| (k, s.theta(k) * s.tau(k), s.theta(k - 1) * s.tau(k - 1))),
    ));
    checks.push(inequality_check(
        ConditionId::EtaTauLK,
        ks.clone().map(|k| (k, s.alpha(k) * l2, s.eta(k - 1) * s.tau(k))),
    ));
    checks.push(equality_check(
        ConditionId::EtaTau,
        std::iter::once((n, s.theta(1) * s.tau(1), s.theta(n) * s.tau(n))),
    ));
    checks.push(inequality_check(
        ConditionId::EtaTauTheta,
        std::iter::once((n, s.theta(n) * l2, s.theta(1) * s.tau(1) * s.eta(n))),
    ));

    match s.mode {
        ScheduleMode::DcsConvex | ScheduleMode::SdcsConvex => {
            let weight = |k: usize| {
                let t = s.inner_t(k) as f64;
                s.theta(k) * (t + 1.0) * (t + 2.0) * s.eta(k) / (t * (t + 3.0))
            };
            checks.push(inequality_check(
                ConditionId::ThetaEtaD,
                ks.map(|k| (k, weight(k), weight(k - 1))),
            ));
        }
        ScheduleMode::DcsStronglyConvex | ScheduleMode::SdcsStronglyConvex => {
            checks.push(inequality_check(
                ConditionId::ThetaEtaDs,
                ks.map(|k| {
                    (
                        k,
                        s.theta(k) * s.eta(k),
                        s.theta(k - 1) * (mu / growth_c + s.eta(k - 1)),
                    )
                }),
            ));
        }
        ScheduleMode::DpdConvex => {}
    }

    ValidationReport { mode: s.mode, checks }
}

/// Check the inner-weight condition for `t = 1..T-1` at a fixed `eta_k`.
pub fn validate_inner(
    inner: &InnerSchedule,
    eta_k: f64,
    mu: f64,
    growth_c: f64,
    t_count: u64,
) -> bool {
    for t in 1..t_count {
        let lhs = inner.lambda(t + 1) * (eta_k * inner.beta(eta_k, t + 1) - mu / growth_c);
        let rhs = inner.lambda(t) * (1.0 + inner.beta(eta_k, t)) * eta_k;
        if lhs > rhs + scaled_slack(lhs, rhs) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dpd_parameters() {
        let s = dpd_schedule(3.0, 5).unwrap();
        for k in 1..=5 {
            assert_eq!(s.alpha(k), 1.0);
            assert_eq!(s.theta(k), 1.0);
            assert_eq!(s.eta(k), 6.0);
            assert_eq!(s.tau(k), 3.0);
        }
        assert!(validate_outer(&s, 3.0, 0.0, 1.0).all_passed());
        assert!(dpd_schedule(0.0, 5).is_err());
        assert!(dpd_schedule(1.0, 0).is_err());
    }

    #[test]
    fn dcs_convex_parameters() {
        let (outer, inner) = dcs_convex_schedule(2.0, 2, 1.0, 8, 1.0).unwrap();
        assert_eq!(outer.inner_t(1), 4); // ceil(2*1*8 / (4*1))
        assert_eq!(inner.beta(outer.eta(1), 1), 0.5);
        assert_eq!(inner.lambda(4), 5.0);
        assert!(validate_outer(&outer, 2.0, 0.0, 1.0).all_passed());
        assert!(validate_inner(&inner, outer.eta(1), 0.0, 1.0, outer.inner_t(1)));
    }

    #[test]
    fn dcs_strongly_convex_parameters() {
        let (outer, inner) = dcs_strongly_convex_schedule(2.0, 1.0, 1.5, 3, 1.0, 6, 2.0).unwrap();
        assert_eq!(outer.alpha(1), 0.5);
        assert_eq!(outer.theta(1), 2.0);
        // eta_3 = 3*mu/(2C) = 3 for mu = 2, C = 1.
        assert_eq!(outer.eta(3), 3.0);
        // beta_1 = mu / (eta_k C): the (t-1)/2 term vanishes at t = 1.
        for k in 1..=6 {
            let eta_k = outer.eta(k);
            assert!((inner.beta(eta_k, 1) - 2.0 / eta_k).abs() < 1e-15);
        }
        let report = validate_outer(&outer, 1.5, 2.0, 1.0);
        assert!(report.all_passed());
        // The strongly convex telescoping condition holds with zero margin:
        // (k+1) k mu/(2C) equals k (mu/C + (k-1) mu/(2C)) identically.
        let ds = report.check(ConditionId::ThetaEtaDs).unwrap();
        assert!(ds.margin.abs() < 1e-12);
        assert!(validate_inner(&inner, outer.eta(4), 2.0, 1.0, outer.inner_t(4)));
        assert!(dcs_strongly_convex_schedule(0.0, 1.0, 1.0, 2, 1.0, 4, 1.0).is_err());
        assert!(dcs_strongly_convex_schedule(1.0, 0.5, 1.0, 2, 1.0, 4, 1.0).is_err());
    }

    #[test]
    fn sdcs_convex_parameters() {
        let (a, _) = sdcs_convex_schedule(2.0, 2, 1.0, 0.0, 8, 1.0).unwrap();
        let (b, _) = dcs_convex_schedule(2.0, 2, 1.0, 8, 1.0).unwrap();
        assert_eq!(a.inner_t(1), b.inner_t(1));
        assert_eq!(a.eta(1), b.eta(1));
        let (c, _) = sdcs_convex_schedule(2.0, 2, 1.0, 1.0, 8, 1.0).unwrap();
        assert_eq!(c.inner_t(1), 8); // ceil(2*(1+1)*8 / 4)
        assert_eq!(c.eta(3), 4.0); // eta untouched by sigma
    }

    #[test]
    fn sdcs_strongly_convex_parameters() {
        let (outer, _) =
            sdcs_strongly_convex_schedule(0.5, 1.0, 2.0, 3, 1.0, 0.7, 5, 2.0).unwrap();
        // tau_1 = 4 ||L||^2 C / (2 mu) = 2 ||L||^2 C / mu.
        assert!((outer.tau(1) - 2.0 * 4.0 * 1.0 / 0.5).abs() < 1e-12);
        assert!(validate_outer(&outer, 2.0, 0.5, 1.0).all_passed());

        // sigma = 0: T_k lands within a factor 2 of the deterministic
        // counterpart when both max-branches are active.
        let (mu, c, l, m, big_m, n, d) = (0.4, 1.0, 1.0, 4, 3.0, 10, 0.5);
        let (sto, _) = sdcs_strongly_convex_schedule(mu, c, l, m, big_m, 0.0, n, d).unwrap();
        let (det, _) = dcs_strongly_convex_schedule(mu, c, l, m, big_m, n, d).unwrap();
        let ratio = sto.inner_t(1) as f64 / det.inner_t(1) as f64;
        assert!((0.95..=2.05).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn targeted_violations_fail_their_condition() {
        let l = 3.0;
        // Quartering tau strictly violates alpha_k ||L||^2 <= eta_{k-1} tau_k
        // (halving it only reaches equality, which still passes).
        let mut s = dpd_schedule(l, 6).unwrap();
        s.scale_tau(0.25);
        let report = validate_outer(&s, l, 0.0, 1.0);
        assert!(report.failed().contains(&ConditionId::EtaTauLK));

        let mut s = dpd_schedule(l, 6).unwrap();
        s.scale_tau(0.5);
        assert!(validate_outer(&s, l, 0.0, 1.0).all_passed());
    }

    #[test]
    fn inner_condition_edges() {
        // Convex weights satisfy the condition with exact equality.
        let inner = InnerSchedule::Convex;
        assert!(validate_inner(&inner, 1.7, 0.0, 1.0, 50));
        // Doubling beta breaks it.
        #[derive(Clone, Copy)]
        struct Doubled;
        let eta = 1.7;
        let _ = Doubled;
        let lambda = |t: u64| (t + 1) as f64;
        let beta = |t: u64| t as f64; // doubled
        let mut ok = true;
        for t in 1..10 {
            let lhs = lambda(t + 1) * eta * beta(t + 1);
            let rhs = lambda(t) * (1.0 + beta(t)) * eta;
            if lhs > rhs + VALIDATION_SLACK {
                ok = false;
            }
        }
        assert!(!ok);
    }

    #[test]
    fn t_k_is_an_exact_ceiling() {
        for &(m, big_m, n, l, d) in
            &[(2usize, 1.0, 8usize, 2.0, 1.0), (5, 3.3, 17, 1.2, 0.7), (3, 0.9, 40, 2.6, 2.1)]
        {
            let (outer, _) = dcs_convex_schedule(l, m, big_m, n, d).unwrap();
            let formula = m as f64 * big_m * big_m * n as f64 / (l * l * d);
            let t = outer.inner_t(1) as f64;
            assert!(t - 1.0 < formula && formula <= t);
        }
    }

    #[test]
    fn cap_is_a_loud_error() {
        let err = dcs_convex_schedule_with_cap(1.0, 5, 10.0, 1000, 1e-9, 1000).unwrap_err();
        assert!(matches!(err, ScheduleError::InnerCapExceeded { .. }));
    }

    proptest! {
        #[test]
        fn constructors_pass_their_validators(
            l in 0.5f64..4.0,
            m in 2usize..8,
            big_m in 0.5f64..4.0,
            mu in 0.1f64..2.0,
            c in 1.0f64..2.0,
            sigma in 0.0f64..2.0,
            n in 1usize..1000,
            d in 0.5f64..4.0,
        ) {
            let s = dpd_schedule(l, n).unwrap();
            prop_assert!(validate_outer(&s, l, 0.0, 1.0).all_passed());

            let (o, i) = dcs_convex_schedule(l, m, big_m, n, d).unwrap();
            prop_assert!(validate_outer(&o, l, 0.0, 1.0).all_passed());
            prop_assert!(validate_inner(&i, o.eta(1), 0.0, 1.0, o.inner_t(1).min(500)));

            if let Ok((o, i)) = dcs_strongly_convex_schedule(mu, c, l, m, big_m, n, d) {
                prop_assert!(validate_outer(&o, l, mu, c).all_passed());
                for k in [1, n] {
                    prop_assert!(validate_inner(&i, o.eta(k), mu, c, o.inner_t(k).min(500)));
                }
            }

            let (o, i) = sdcs_convex_schedule(l, m, big_m, sigma, n, d).unwrap();
            prop_assert!(validate_outer(&o, l, 0.0, 1.0).all_passed());
            prop_assert!(validate_inner(&i, o.eta(1), 0.0, 1.0, o.inner_t(1).min(500)));

            if let Ok((o, i)) =
                sdcs_strongly_convex_schedule(mu, c, l, m, big_m, sigma, n, d)
            {
                prop_assert!(validate_outer(&o, l, mu, c).all_passed());
                prop_assert!(validate_inner(&i, o.eta(n), mu, c, o.inner_t(n).min(500)));
            }
        }

        #[test]
        fn schedules_are_pure(
            l in 0.5f64..4.0, m in 2usize..6, big_m in 0.5f64..3.0, n in 1usize..50, d in 0.5f64..2.0
        ) {
            let a = dcs_convex_schedule(l, m, big_m, n, d).unwrap();
            let b = dcs_convex_schedule(l, m, big_m, n, d).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
