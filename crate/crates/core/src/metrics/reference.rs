//! Centralized reference solving and brute-force dual search.
//!
//! `reference_solve` minimizes `sum_i f_i(x)` over the intersection of the
//! agents' boxes by per-coordinate adaptive grid refinement: the shipped
//! objectives are coordinate-separable, so each coordinate's restriction is
//! an independent convex 1-D function. Every round samples a uniform grid
//! plus all known kink positions inside the bracket, then shrinks the
//! bracket around the sampled minimizers (valid for convex functions). With
//! the kinks always sampled, the function between adjacent samples is a
//! parabola, so the certificate only pays the parabola's interior dip.
//!
//! This machinery is deliberately independent of the solvers' prox path
//! (no interval enumeration, no closed forms).

use serde::{Deserialize, Serialize};

use crate::model::{ProblemInstance, SetKind, StackedPoint};
use crate::topology::{laplacian, Graph};

use super::MetricsError;

/// A certified centralized optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSolution {
    /// The consensual optimum (one block; replicate for the stacked form).
    pub x_star: Vec<f64>,
    pub f_star: f64,
    /// Certified accuracy of `f_star`.
    pub tolerance: f64,
    /// An optimal dual multiplier, when one was computed.
    pub y_star: Option<StackedPoint>,
}

impl ReferenceSolution {
    pub fn x_star_stacked(&self, m: usize) -> StackedPoint {
        StackedPoint::replicate(&self.x_star, m)
    }
}

struct CoordinateBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn intersect_boxes(problem: &ProblemInstance) -> Result<CoordinateBox, MetricsError> {
    let d = problem.d();
    let mut lo = vec![f64::NEG_INFINITY; d];
    let mut hi = vec![f64::INFINITY; d];
    for agent in problem.agents() {
        match agent.set.kind() {
            SetKind::Box { lo: alo, hi: ahi } => {
                for j in 0..d {
                    lo[j] = lo[j].max(alo[j]);
                    hi[j] = hi[j].min(ahi[j]);
                }
            }
            other => {
                return Err(MetricsError::ReferenceSolve(format!(
                    "centralized solve supports box sets only, found {}",
                    other.describe()
                )))
            }
        }
    }
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return Err(MetricsError::ReferenceSolve("empty feasible intersection".into()));
    }
    Ok(CoordinateBox { lo, hi })
}

/// Centralized solve of `min_{x in cap X_i} sum_i f_i(x)` to certified
/// accuracy. Requires separable objectives on boxes.
pub fn reference_solve(
    problem: &ProblemInstance,
    accuracy: f64,
) -> Result<ReferenceSolution, MetricsError> {
    if accuracy <= 0.0 {
        return Err(MetricsError::ReferenceSolve("accuracy must be positive".into()));
    }
    for agent in problem.agents() {
        if !agent.objective.is_separable() {
            return Err(MetricsError::ReferenceSolve(
                "centralized solve needs coordinate-separable objectives".into(),
            ));
        }
    }
    let bounds = intersect_boxes(problem)?;
    let d = problem.d();
    let base = problem.bregman_centers().block(0).to_vec();
    // Per-coordinate kinks and constants from the instance data.
    let mut kinks_per_coord: Vec<Vec<f64>> = vec![Vec::new(); d];
    let mut mu_total = 0.0;
    for agent in problem.agents() {
        if let Some(kinks) = agent.objective.coordinate_kinks() {
            for (j, ks) in kinks.into_iter().enumerate() {
                kinks_per_coord[j].extend(ks);
            }
        }
        mu_total += agent.objective.strong_convexity_mu();
    }

    let mut x_star = base.clone();
    let mut tolerance = 0.0;
    for j in 0..d {
        let total_along = |v: f64| -> f64 {
            let mut point = base.clone();
            point[j] = v;
            problem.agents().iter().map(|a| a.objective.eval(&point)).sum()
        };
        let (v, tol) = refine_coordinate(
            &total_along,
            bounds.lo[j],
            bounds.hi[j],
            &kinks_per_coord[j],
            mu_total,
        );
        x_star[j] = v;
        tolerance += tol;
    }

    let f_star: f64 = problem.agents().iter().map(|a| a.objective.eval(&x_star)).sum();
    // Evaluation noise on the reported optimum.
    tolerance += 16.0 * f64::EPSILON * (1.0 + f_star.abs()) * d as f64;
    if tolerance > accuracy {
        return Err(MetricsError::ReferenceSolve(format!(
            "certified tolerance {tolerance:e} exceeds requested accuracy {accuracy:e}"
        )));
    }
    Ok(ReferenceSolution { x_star, f_star, tolerance, y_star: None })
}

/// One coordinate: adaptive grid refinement of a convex 1-D function.
/// Returns the minimizer and a certified value tolerance.
fn refine_coordinate(
    g: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    kinks: &[f64],
    mu_total: f64,
) -> (f64, f64) {
    const GRID: usize = 64;
    const ROUNDS: usize = 14;
    if hi - lo <= 0.0 {
        return (lo, 0.0);
    }
    let mut br_lo = lo;
    let mut br_hi = hi;
    let mut best_v = lo;
    let mut spacing = (hi - lo) / GRID as f64;
    for _ in 0..ROUNDS {
        let mut samples: Vec<f64> = (0..=GRID)
            .map(|s| br_lo + (br_hi - br_lo) * s as f64 / GRID as f64)
            .collect();
        for &k in kinks {
            if k > br_lo && k < br_hi {
                samples.push(k);
            }
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        samples.dedup();
        let values: Vec<f64> = samples.iter().map(|&v| g(v)).collect();
        let min_val = values.iter().copied().fold(f64::INFINITY, f64::min);
        let first = values.iter().position(|&v| v == min_val).unwrap();
        let last = values.iter().rposition(|&v| v == min_val).unwrap();
        best_v = samples[first];
        let new_lo = if first == 0 { samples[0] } else { samples[first - 1] };
        let new_hi = if last + 1 >= samples.len() { *samples.last().unwrap() } else { samples[last + 1] };
        spacing = (br_hi - br_lo) / GRID as f64;
        if new_hi - new_lo >= 0.9 * (br_hi - br_lo) {
            // Flat stretch (ties across the bracket): the sampled value is
            // the minimum of a piecewise linear/parabolic function whose
            // kinks are all sampled; only a parabola dip can hide below.
            break;
        }
        br_lo = new_lo;
        br_hi = new_hi;
        if br_hi - br_lo < 1e-12 {
            spacing = (br_hi - br_lo) / GRID as f64;
            break;
        }
    }
    // Between adjacent samples the function is linear plus a quadratic of
    // curvature mu_total; a parabola between equal endpoints dips by at
    // most mu * h^2 / 8.
    let dip = mu_total * spacing * spacing / 8.0;
    (best_v, dip + 4.0 * f64::EPSILON * (1.0 + g(best_v).abs()))
}

/// Interval of admissible values for `(L y)_i` at the optimum: the
/// stationarity condition `0 in subdiff f_i(x*) + (L y)_i + N_{X_i}(x*)`
/// solved for `(L y)_i` (one-dimensional decision variables only).
fn admissible_intervals(
    problem: &ProblemInstance,
    x_star: f64,
) -> Result<Vec<(f64, f64)>, MetricsError> {
    let mut out = Vec::with_capacity(problem.m());
    for agent in problem.agents() {
        let (glo, ghi) = agent.objective.subdifferential_1d(x_star, 1e-7)?;
        let (mut klo, mut khi) = (-ghi, -glo);
        if let SetKind::Box { lo, hi } = agent.set.kind() {
            if (x_star - lo[0]).abs() <= 1e-9 {
                khi = f64::INFINITY; // normal cone (-inf, 0] at the lower face
            }
            if (x_star - hi[0]).abs() <= 1e-9 {
                klo = f64::NEG_INFINITY;
            }
        }
        out.push((klo, khi));
    }
    Ok(out)
}

fn interval_violation(v: f64, (lo, hi): (f64, f64)) -> f64 {
    if v < lo {
        lo - v
    } else if v > hi {
        v - hi
    } else {
        0.0
    }
}

/// Brute-force minimal-norm optimal dual multiplier for one-dimensional
/// problems: grid search plus local refinement over the orthogonal
/// complement of the all-ones direction (the null space of `L` contributes
/// nothing to optimality, so the minimal-norm dual lies in that subspace).
///
/// Returns the dual and its norm, or `None` when no feasible point is found
/// within the search region.
pub fn min_norm_optimal_dual(
    problem: &ProblemInstance,
    graph: &Graph,
    x_star: f64,
    search_radius: f64,
    tol: f64,
) -> Result<Option<(StackedPoint, f64)>, MetricsError> {
    if problem.d() != 1 {
        return Err(MetricsError::ReferenceSolve(
            "dual search supports one-dimensional problems only".into(),
        ));
    }
    let m = problem.m();
    if m > 4 {
        return Err(MetricsError::ReferenceSolve(
            "dual search is exhaustive; keep m <= 4".into(),
        ));
    }
    let intervals = admissible_intervals(problem, x_star)?;
    let op = laplacian(graph, 1);

    // Orthonormal basis of span{1}^perp via Helmert rows.
    let dims = m - 1;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dims);
    for r in 1..m {
        let mut v = vec![0.0; m];
        for item in v.iter_mut().take(r) {
            *item = 1.0;
        }
        v[r] = -(r as f64);
        let norm = (r as f64 + r as f64 * r as f64).sqrt();
        for item in &mut v {
            *item /= norm;
        }
        basis.push(v);
    }

    let assemble = |z: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; m];
        for (zc, b) in z.iter().zip(&basis) {
            for (yi, bi) in y.iter_mut().zip(b) {
                *yi += zc * bi;
            }
        }
        y
    };
    let infeasibility = |y: &[f64]| -> f64 {
        let ly = op.apply_flat(y).unwrap();
        ly.iter().zip(&intervals).map(|(&v, &iv)| interval_violation(v, iv).powi(2)).sum()
    };
    let norm_sq = |y: &[f64]| -> f64 { y.iter().map(|v| v * v).sum() };

    // Penalty continuation: minimize ||y||^2 + P * dist^2 with grid + local
    // refinement, tightening P, then verify feasibility.
    let grid_min = |center: &[f64], half: f64, steps: usize, obj: &dyn Fn(&[f64]) -> f64| {
        let mut best = center.to_vec();
        let mut best_val = obj(center);
        let mut idx = vec![0usize; dims];
        loop {
            let z: Vec<f64> = (0..dims)
                .map(|c| center[c] - half + 2.0 * half * idx[c] as f64 / steps as f64)
                .collect();
            let val = obj(&z);
            if val < best_val {
                best_val = val;
                best = z;
            }
            let mut carry = 0;
            loop {
                if carry == dims {
                    return best;
                }
                idx[carry] += 1;
                if idx[carry] <= steps {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
            }
        }
    };

    let mut center = vec![0.0; dims];
    let mut half = search_radius;
    for p in [1e2, 1e4, 1e6, 1e8, 1e10, 1e12] {
        let obj = |z: &[f64]| {
            let y = assemble(z);
            norm_sq(&y) + p * infeasibility(&y)
        };
        for _ in 0..6 {
            center = grid_min(&center, half, 24, &obj);
            half *= 0.35;
        }
        half = (half * 40.0).min(search_radius * 0.1);
    }
    let y = assemble(&center);
    let residual = infeasibility(&y).sqrt();
    if residual > tol {
        return Ok(None);
    }
    let norm = norm_sq(&y).sqrt();
    let point = StackedPoint::from_flat(m, 1, y).unwrap();
    Ok(Some((point, norm)))
}
