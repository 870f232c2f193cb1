//! Per-agent closed convex constraint sets.

use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SetKind {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Simplex,
}

impl SetKind {
    pub fn describe(&self) -> &'static str {
        match self {
            SetKind::Box { .. } => "box",
            SetKind::Ball { .. } => "euclidean_ball",
            SetKind::Simplex => "simplex",
        }
    }
}

/// A constraint set together with the prox-diameter bound
/// `D = sup V(x, u)` under the Euclidean prox-function, the per-agent
/// contribution to the stacked diameter estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    dim: usize,
    kind: SetKind,
    diameter_sq_bound: f64,
}

impl ConstraintSet {
    pub fn axis_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, ModelError> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(ModelError::InvalidSet("box bounds length mismatch".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(ModelError::InvalidSet("box has lo > hi".into()));
        }
        let diameter_sq_bound =
            0.5 * lo.iter().zip(&hi).map(|(l, h)| (h - l) * (h - l)).sum::<f64>();
        Ok(ConstraintSet { dim: lo.len(), kind: SetKind::Box { lo, hi }, diameter_sq_bound })
    }

    pub fn symmetric_box(dim: usize, half_width: f64) -> Self {
        ConstraintSet::axis_box(vec![-half_width; dim], vec![half_width; dim])
            .expect("symmetric box is always valid")
    }

    pub fn euclidean_ball(center: Vec<f64>, radius: f64) -> Result<Self, ModelError> {
        if center.is_empty() || radius <= 0.0 {
            return Err(ModelError::InvalidSet("ball needs positive radius".into()));
        }
        Ok(ConstraintSet {
            dim: center.len(),
            kind: SetKind::Ball { center, radius },
            diameter_sq_bound: 2.0 * radius * radius,
        })
    }

    pub fn simplex(dim: usize) -> Self {
        // sup (1/2)||u - x||^2 over the simplex is 1 (between vertices).
        ConstraintSet { dim, kind: SetKind::Simplex, diameter_sq_bound: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn diameter_sq_bound(&self) -> f64 {
        self.diameter_sq_bound
    }

    /// Euclidean diameter `sup ||x - y||` of the set.
    pub fn diameter(&self) -> f64 {
        match &self.kind {
            SetKind::Box { lo, hi } => {
                lo.iter().zip(hi).map(|(l, h)| (h - l) * (h - l)).sum::<f64>().sqrt()
            }
            SetKind::Ball { radius, .. } => 2.0 * radius,
            SetKind::Simplex => 2.0f64.sqrt(),
        }
    }

    /// Largest distance from `p` to a point of the set (exact for all kinds;
    /// the simplex attains it at a vertex).
    pub fn max_distance_from(&self, p: &[f64]) -> f64 {
        match &self.kind {
            SetKind::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .zip(p)
                .map(|((l, h), c)| (h - c).abs().max((c - l).abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
            SetKind::Ball { center, radius } => {
                radius
                    + center
                        .iter()
                        .zip(p)
                        .map(|(c, q)| (c - q) * (c - q))
                        .sum::<f64>()
                        .sqrt()
            }
            SetKind::Simplex => (0..self.dim)
                .map(|j| {
                    let mut sq = 0.0;
                    for (idx, &c) in p.iter().enumerate() {
                        let v = if idx == j { 1.0 } else { 0.0 };
                        sq += (v - c) * (v - c);
                    }
                    sq.sqrt()
                })
                .fold(0.0, f64::max),
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim {
            return false;
        }
        match &self.kind {
            SetKind::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol),
            SetKind::Ball { center, radius } => {
                let dist =
                    x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
                dist <= radius + tol
            }
            SetKind::Simplex => {
                x.iter().all(|v| *v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol
            }
        }
    }

    /// The minimizer of the distance-generating function: box midpoint,
    /// ball center, simplex barycenter.
    pub fn bregman_center(&self) -> Vec<f64> {
        match &self.kind {
            SetKind::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect(),
            SetKind::Ball { center, .. } => center.clone(),
            SetKind::Simplex => vec![1.0 / self.dim as f64; self.dim],
        }
    }
}
