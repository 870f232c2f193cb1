//! Agent objectives: least-absolute-deviation families with optional strong
//! convexity and stochastic first-order oracles.
//!
//! The shipped objective is `f(x) = ||A x - b||_1 + (mu/2)||x - c||^2` on a
//! compact set. When every row of `A` has at most one nonzero the ell-1 part
//! is coordinate-separable and the composite prox subproblem has an exact
//! per-coordinate solution; that capability is what gates the exact
//! primal-dual solver.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::pwq::PiecewiseQuad1d;
use super::sets::{ConstraintSet, SetKind};
use super::{BregmanGeometry, BregmanKind, ModelError};

/// Row-major matrix with explicit dimensions (the serialized form).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRows {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixRows {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, ModelError> {
        if data.len() != rows * cols {
            return Err(ModelError::InvalidObjective(format!(
                "matrix data length {} != {rows}x{cols}",
                data.len()
            )));
        }
        Ok(MatrixRows { rows, cols, data })
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_norms(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }
}

/// Stochastic oracle noise model. All variants are light-tail: the error
/// norm is almost surely bounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "noise")]
pub enum NoiseKind {
    /// Exact oracle; the stochastic subgradient equals the subgradient.
    None,
    /// Zero-mean Gaussian per coordinate with std `sigma/sqrt(d)`, truncated
    /// at four standard deviations (symmetric, so still unbiased).
    BoundedGaussian { sigma: f64 },
    /// Finite-sum oracle: one of the `l` ell-1 components sampled uniformly
    /// per call and scaled by `l`.
    ComponentSampling,
}

/// Per-coordinate separable description of the ell-1 part:
/// `terms[j]` lists `(weight, kink)` pairs contributing `weight*|v - kink|`.
type SeparableTerms = Vec<Vec<(f64, f64)>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentObjective {
    a: MatrixRows,
    b: Vec<f64>,
    mu: f64,
    quad_center: Vec<f64>,
    noise: NoiseKind,
    m_const: f64,
    sigma: f64,
    #[serde(skip)]
    separable: Option<SeparableTerms>,
}

impl PartialEq for AgentObjective {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a
            && self.b == other.b
            && self.mu == other.mu
            && self.quad_center == other.quad_center
            && self.noise == other.noise
    }
}

impl AgentObjective {
    /// Build `f(x) = ||A x - b||_1 + (mu/2)||x - quad_center||^2` with the
    /// declared constants certified against `set`:
    ///
    /// * `M` satisfies both the subgradient-style sandwich upper bound
    ///   (factor-2 on the ell-1 part plus the quadratic's contribution over
    ///   the set diameter) and `sup ||f'(x)||` over the set;
    /// * `sigma` is the oracle noise bound implied by `noise`.
    pub fn lad(
        a: MatrixRows,
        b: Vec<f64>,
        mu: f64,
        quad_center: Vec<f64>,
        noise: NoiseKind,
        set: &ConstraintSet,
    ) -> Result<Self, ModelError> {
        if b.len() != a.rows {
            return Err(ModelError::InvalidObjective(format!(
                "b length {} != row count {}",
                b.len(),
                a.rows
            )));
        }
        if a.cols != set.dim() {
            return Err(ModelError::InvalidObjective(format!(
                "matrix has {} columns, set dimension is {}",
                a.cols,
                set.dim()
            )));
        }
        if mu < 0.0 {
            return Err(ModelError::InvalidObjective("mu must be nonnegative".into()));
        }
        if mu > 0.0 && quad_center.len() != a.cols {
            return Err(ModelError::InvalidObjective(
                "strongly convex objective needs a quadratic center of dimension d".into(),
            ));
        }
        let row_norm_sum: f64 = a.row_norms().iter().sum();
        let sandwich = 2.0 * row_norm_sum
            + if mu > 0.0 { 0.5 * mu * set.diameter() } else { 0.0 };
        let grad_sup = row_norm_sum
            + if mu > 0.0 { mu * set.max_distance_from(&quad_center) } else { 0.0 };
        let m_const = sandwich.max(grad_sup);
        let sigma = match noise {
            NoiseKind::None => 0.0,
            NoiseKind::BoundedGaussian { sigma } => {
                if sigma < 0.0 {
                    return Err(ModelError::InvalidObjective("sigma must be >= 0".into()));
                }
                sigma
            }
            NoiseKind::ComponentSampling => {
                let l = a.rows as f64;
                (l * a.row_norms().iter().map(|n| n * n).sum::<f64>()).sqrt()
            }
        };
        let separable = Self::separable_terms(&a, &b);
        Ok(AgentObjective { a, b, mu, quad_center, noise, m_const, sigma, separable })
    }

    fn separable_terms(a: &MatrixRows, b: &[f64]) -> Option<SeparableTerms> {
        let mut terms: SeparableTerms = vec![Vec::new(); a.cols];
        for (r, b_r) in b.iter().enumerate().take(a.rows) {
            let row = a.row(r);
            let nz: Vec<usize> = (0..a.cols).filter(|&j| row[j] != 0.0).collect();
            match nz.len() {
                0 => {} // constant |b_r|, irrelevant to argmin
                1 => {
                    let j = nz[0];
                    let c = row[j];
                    terms[j].push((c.abs(), b_r / c));
                }
                _ => return None,
            }
        }
        Some(terms)
    }

    /// Restore the derived separable structure after deserialization.
    pub fn rebuild_cache(&mut self) {
        self.separable = Self::separable_terms(&self.a, &self.b);
    }

    pub fn matrix(&self) -> &MatrixRows {
        &self.a
    }

    pub fn offsets(&self) -> &[f64] {
        &self.b
    }

    pub fn lipschitz_m(&self) -> f64 {
        self.m_const
    }

    pub fn strong_convexity_mu(&self) -> f64 {
        self.mu
    }

    pub fn noise_sigma(&self) -> f64 {
        self.sigma
    }

    pub fn noise_kind(&self) -> NoiseKind {
        self.noise
    }

    pub fn component_count(&self) -> usize {
        self.a.rows
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for r in 0..self.a.rows {
            let res: f64 =
                self.a.row(r).iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - self.b[r];
            total += res.abs();
        }
        if self.mu > 0.0 {
            total += 0.5
                * self.mu
                * x.iter()
                    .zip(&self.quad_center)
                    .map(|(v, c)| (v - c) * (v - c))
                    .sum::<f64>();
        }
        total
    }

    /// A subgradient: `A^T sign(Ax - b) + mu (x - c)`, with `sign(0) = 0`.
    pub fn subgrad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.a.cols];
        for r in 0..self.a.rows {
            let row = self.a.row(r);
            let res: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - self.b[r];
            let s = if res > 0.0 {
                1.0
            } else if res < 0.0 {
                -1.0
            } else {
                0.0
            };
            if s != 0.0 {
                for (gj, aj) in g.iter_mut().zip(row) {
                    *gj += s * aj;
                }
            }
        }
        if self.mu > 0.0 {
            for (gj, (v, c)) in g.iter_mut().zip(x.iter().zip(&self.quad_center)) {
                *gj += self.mu * (v - c);
            }
        }
        g
    }

    /// Subgradient of the `j`-th finite-sum component, scaled by `l` so the
    /// uniform average over components equals `subgrad`.
    pub fn component_subgrad(&self, x: &[f64], j: usize) -> Vec<f64> {
        let l = self.a.rows as f64;
        let row = self.a.row(j);
        let res: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - self.b[j];
        let s = if res > 0.0 {
            1.0
        } else if res < 0.0 {
            -1.0
        } else {
            0.0
        };
        let mut g: Vec<f64> = row.iter().map(|a| l * s * a).collect();
        if self.mu > 0.0 {
            for (gj, (v, c)) in g.iter_mut().zip(x.iter().zip(&self.quad_center)) {
                *gj += self.mu * (v - c);
            }
        }
        g
    }

    /// Unbiased stochastic subgradient with `E||G - f'||^2 <= sigma^2`.
    pub fn stoch_subgrad(&self, x: &[f64], rng: &mut ChaCha12Rng) -> Vec<f64> {
        match self.noise {
            NoiseKind::None => self.subgrad(x),
            NoiseKind::BoundedGaussian { sigma } => {
                let mut g = self.subgrad(x);
                if sigma > 0.0 {
                    let per_coord = sigma / (self.a.cols as f64).sqrt();
                    for gj in &mut g {
                        let mut z: f64 = rng.sample(StandardNormal);
                        while z.abs() > 4.0 {
                            z = rng.sample(StandardNormal);
                        }
                        *gj += per_coord * z;
                    }
                }
                g
            }
            NoiseKind::ComponentSampling => {
                let j = rng.gen_range(0..self.a.rows);
                self.component_subgrad(x, j)
            }
        }
    }

    /// Whether the composite prox subproblem admits an exact solution:
    /// separable ell-1 structure, Euclidean geometry, box set.
    pub fn supports_exact_prox(&self, geom: &BregmanGeometry, set: &ConstraintSet) -> bool {
        self.separable.is_some()
            && geom.kind == BregmanKind::Euclidean
            && matches!(set.kind(), SetKind::Box { .. })
    }

    pub fn is_separable(&self) -> bool {
        self.separable.is_some()
    }

    /// Kink positions per coordinate, for separable objectives.
    pub fn coordinate_kinks(&self) -> Option<Vec<Vec<f64>>> {
        self.separable
            .as_ref()
            .map(|terms| terms.iter().map(|t| t.iter().map(|&(_, k)| k).collect()).collect())
    }

    /// Subdifferential interval of a one-dimensional objective at `x`.
    /// Points within `kink_tol` of a kink get the full interval there.
    pub fn subdifferential_1d(&self, x: f64, kink_tol: f64) -> Result<(f64, f64), ModelError> {
        if self.a.cols != 1 {
            return Err(ModelError::ShapeMismatch(
                "subdifferential_1d needs a one-dimensional objective".into(),
            ));
        }
        let (mut lo, mut hi) = (0.0, 0.0);
        for r in 0..self.a.rows {
            let c = self.a.row(r)[0];
            if c == 0.0 {
                continue;
            }
            let kink = self.b[r] / c;
            let w = c.abs();
            if (x - kink).abs() <= kink_tol {
                lo -= w;
                hi += w;
            } else if x > kink {
                lo += w;
                hi += w;
            } else {
                lo -= w;
                hi -= w;
            }
        }
        if self.mu > 0.0 {
            let q = self.mu * (x - self.quad_center[0]);
            lo += q;
            hi += q;
        }
        Ok((lo, hi))
    }
}

/// Exact minimizer of `<w, x> + f(x) + eta V(x_anchor, x)` over the set.
///
/// Only separable ell-1 objectives with Euclidean geometry on a box are
/// supported; everything else must go through the sliding inner loop.
pub fn composite_prox(
    objective: &AgentObjective,
    set: &ConstraintSet,
    geom: &BregmanGeometry,
    w: &[f64],
    x_anchor: &[f64],
    eta: f64,
) -> Result<Vec<f64>, ModelError> {
    if eta <= 0.0 {
        return Err(ModelError::NonPositiveEta(eta));
    }
    let d = set.dim();
    if w.len() != d || x_anchor.len() != d {
        return Err(ModelError::ShapeMismatch(format!(
            "composite_prox: w={} x_anchor={} set={d}",
            w.len(),
            x_anchor.len()
        )));
    }
    if !objective.supports_exact_prox(geom, set) {
        return Err(ModelError::ExactProxUnsupported);
    }
    let terms = objective.separable.as_ref().unwrap();
    let SetKind::Box { lo, hi } = set.kind() else { unreachable!() };
    let mut out = Vec::with_capacity(d);
    for j in 0..d {
        let mut q = PiecewiseQuad1d::default();
        q.add_linear(w[j]);
        q.add_quadratic(eta, x_anchor[j]);
        if objective.mu > 0.0 {
            q.add_quadratic(objective.mu, objective.quad_center[j]);
        }
        for &(c, kink) in &terms[j] {
            q.add_abs(c, kink);
        }
        out.push(q.minimize(lo[j], hi[j]));
    }
    Ok(out)
}
