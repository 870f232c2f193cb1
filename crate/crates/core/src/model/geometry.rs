//! Distance-generating functions and the shared prox step.

use serde::{Deserialize, Serialize};

use super::sets::{ConstraintSet, SetKind};
use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BregmanKind {
    /// `omega(u) = (1/2)||u||^2`, so `V(x, u) = (1/2)||u - x||^2`.
    Euclidean,
    /// Negative entropy `omega(u) = sum u_j ln u_j` on the simplex.
    Entropy,
}

/// Bregman prox geometry with 1-strongly-convex distance-generating function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BregmanGeometry {
    pub kind: BregmanKind,
}

impl BregmanGeometry {
    pub fn euclidean() -> Self {
        BregmanGeometry { kind: BregmanKind::Euclidean }
    }

    pub fn entropy() -> Self {
        BregmanGeometry { kind: BregmanKind::Entropy }
    }

    /// Quadratic growth constant `C` with `V(x,u) <= (C/2)||x-u||^2`;
    /// `None` when no finite constant exists (entropy near the boundary).
    pub fn growth_constant(&self) -> Option<f64> {
        match self.kind {
            BregmanKind::Euclidean => Some(1.0),
            BregmanKind::Entropy => None,
        }
    }
}

/// Bregman divergence `V(x, u) = omega(u) - omega(x) - <grad omega(x), u - x>`.
///
/// Euclidean: `(1/2)||u - x||^2`. Entropy: `sum u ln(u/x) - sum u + sum x`
/// (the KL divergence on the simplex), requiring `x > 0` coordinate-wise.
pub fn bregman_div(geom: &BregmanGeometry, x: &[f64], u: &[f64]) -> Result<f64, ModelError> {
    if x.len() != u.len() {
        return Err(ModelError::ShapeMismatch(format!(
            "bregman_div: {} vs {}",
            x.len(),
            u.len()
        )));
    }
    match geom.kind {
        BregmanKind::Euclidean => {
            Ok(0.5 * x.iter().zip(u).map(|(a, b)| (b - a) * (b - a)).sum::<f64>())
        }
        BregmanKind::Entropy => {
            let mut total = 0.0;
            for (&xi, &ui) in x.iter().zip(u) {
                if xi <= 0.0 {
                    return Err(ModelError::EntropyAnchorNotInterior);
                }
                if ui < 0.0 {
                    return Err(ModelError::EntropyDomain);
                }
                if ui > 0.0 {
                    total += ui * (ui / xi).ln();
                }
                total += xi - ui;
            }
            Ok(total)
        }
    }
}

/// Exact minimizer of `<g, u> + eta V(x_anchor, u) + eta_beta V(u_anchor, u)`
/// over the set.
///
/// Supported combinations: euclidean geometry with box (coordinate-wise
/// weighted average then clamp) or ball (radial rescaling), and entropy with
/// the simplex (exponentiated-gradient closed form).
pub fn prox_step(
    geom: &BregmanGeometry,
    set: &ConstraintSet,
    g: &[f64],
    x_anchor: &[f64],
    u_anchor: &[f64],
    eta: f64,
    eta_beta: f64,
) -> Result<Vec<f64>, ModelError> {
    let d = set.dim();
    if g.len() != d || x_anchor.len() != d || u_anchor.len() != d {
        return Err(ModelError::ShapeMismatch(format!(
            "prox_step: dims g={} x={} u={} set={}",
            g.len(),
            x_anchor.len(),
            u_anchor.len(),
            d
        )));
    }
    if eta <= 0.0 {
        return Err(ModelError::NonPositiveEta(eta));
    }
    if eta_beta < 0.0 {
        return Err(ModelError::NegativeEtaBeta(eta_beta));
    }
    let total = eta + eta_beta;
    match (geom.kind, set.kind()) {
        (BregmanKind::Euclidean, SetKind::Box { lo, hi }) => Ok((0..d)
            .map(|j| {
                let v = (eta * x_anchor[j] + eta_beta * u_anchor[j] - g[j]) / total;
                v.clamp(lo[j], hi[j])
            })
            .collect()),
        (BregmanKind::Euclidean, SetKind::Ball { center, radius }) => {
            let p: Vec<f64> = (0..d)
                .map(|j| (eta * x_anchor[j] + eta_beta * u_anchor[j] - g[j]) / total)
                .collect();
            let dist = p
                .iter()
                .zip(center)
                .map(|(a, c)| (a - c) * (a - c))
                .sum::<f64>()
                .sqrt();
            if dist <= *radius {
                Ok(p)
            } else {
                let scale = radius / dist;
                Ok(p.iter().zip(center).map(|(a, c)| c + (a - c) * scale).collect())
            }
        }
        (BregmanKind::Entropy, SetKind::Simplex) => {
            // Stationarity in log space, then normalize.
            let mut logw = Vec::with_capacity(d);
            for j in 0..d {
                if x_anchor[j] <= 0.0 || (eta_beta > 0.0 && u_anchor[j] <= 0.0) {
                    return Err(ModelError::EntropyAnchorNotInterior);
                }
                let lb = if eta_beta > 0.0 { eta_beta * u_anchor[j].ln() } else { 0.0 };
                logw.push((eta * x_anchor[j].ln() + lb - g[j]) / total);
            }
            let shift = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = logw.iter().map(|l| (l - shift).exp()).collect();
            let z: f64 = w.iter().sum();
            Ok(w.into_iter().map(|v| v / z).collect())
        }
        (kind, other) => Err(ModelError::UnsupportedProxCombination(format!(
            "{kind:?} with {}",
            other.describe()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn euclidean_divergence() {
        let geom = BregmanGeometry::euclidean();
        assert_eq!(bregman_div(&geom, &[1.0, -2.0], &[1.0, -2.0]).unwrap(), 0.0);
        assert_eq!(bregman_div(&geom, &[0.0, 0.0], &[3.0, 4.0]).unwrap(), 12.5);
        assert!(bregman_div(&geom, &[0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn entropy_divergence_is_kl_on_simplex() {
        let geom = BregmanGeometry::entropy();
        // KL-divergence oracle: sum u_i ln(u_i / x_i) on the simplex.
        let kl = |x: &[f64], u: &[f64]| -> f64 {
            x.iter()
                .zip(u)
                .map(|(&xi, &ui)| if ui > 0.0 { ui * (ui / xi).ln() } else { 0.0 })
                .sum()
        };
        let x = [0.5, 0.5];
        let u = [1.0, 0.0];
        let v = bregman_div(&geom, &x, &u).unwrap();
        assert_relative_eq!(v, 2.0f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(v, kl(&x, &u), max_relative = 1e-14);
        let x2 = [0.2, 0.3, 0.5];
        let u2 = [0.4, 0.4, 0.2];
        assert_relative_eq!(
            bregman_div(&geom, &x2, &u2).unwrap(),
            kl(&x2, &u2),
            max_relative = 1e-13
        );
        assert_eq!(
            bregman_div(&geom, &[0.0, 1.0], &[0.5, 0.5]),
            Err(ModelError::EntropyAnchorNotInterior)
        );
    }

    #[test]
    fn divergence_lower_bound_and_growth() {
        // V(x,u) >= (1/2)||x-u||^2 for both geometries; euclidean matches
        // the quadratic growth constant C = 1 with equality.
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let eu = BregmanGeometry::euclidean();
        let en = BregmanGeometry::entropy();
        for _ in 0..200 {
            let raw: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
            let sx: f64 = raw.iter().sum();
            let x: Vec<f64> = raw.iter().map(|v| v / sx).collect();
            let raw: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
            let su: f64 = raw.iter().sum();
            let u: Vec<f64> = raw.iter().map(|v| v / su).collect();
            let sq = 0.5 * x.iter().zip(&u).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            let ve = bregman_div(&en, &x, &u).unwrap();
            assert!(ve >= sq - 1e-12);
            if x != u {
                assert!(ve > 0.0);
            }
            let vu = bregman_div(&eu, &x, &u).unwrap();
            assert_relative_eq!(vu, sq, max_relative = 1e-14);
        }
    }

    #[test]
    fn prox_step_box_examples() {
        let geom = BregmanGeometry::euclidean();
        let set = ConstraintSet::symmetric_box(1, 1.0);
        // Stationarity: 1 + u + (u - 1) = 0 at u = 0.
        let u = prox_step(&geom, &set, &[1.0], &[0.0], &[1.0], 1.0, 1.0).unwrap();
        assert_eq!(u, vec![0.0]);
        // Unconstrained argmin at 10, clamped to the box.
        let u = prox_step(&geom, &set, &[-10.0], &[0.0], &[0.0], 1.0, 0.0).unwrap();
        assert_eq!(u, vec![1.0]);
        // Zero linear term at an interior common anchor is stationary.
        let p = [0.3];
        let u = prox_step(&geom, &set, &[0.0], &p, &p, 2.0, 3.0).unwrap();
        assert_eq!(u, vec![0.3]);
        assert_eq!(
            prox_step(&geom, &set, &[0.0], &p, &p, 0.0, 1.0),
            Err(ModelError::NonPositiveEta(0.0))
        );
    }

    #[test]
    fn prox_step_ball_radial_rescaling() {
        let geom = BregmanGeometry::euclidean();
        let set = ConstraintSet::euclidean_ball(vec![0.0, 0.0], 1.0).unwrap();
        let u = prox_step(&geom, &set, &[-10.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], 1.0, 0.0).unwrap();
        assert_relative_eq!(u[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(u[1], 0.0, max_relative = 1e-14);
        // Interior solution untouched.
        let u = prox_step(&geom, &set, &[-0.2, 0.1], &[0.0, 0.0], &[0.0, 0.0], 1.0, 0.0).unwrap();
        assert_relative_eq!(u[0], 0.2, max_relative = 1e-14);
        assert_relative_eq!(u[1], -0.1, max_relative = 1e-14);
    }

    #[test]
    fn prox_step_entropy_matches_grid_oracle() {
        let geom = BregmanGeometry::entropy();
        let set = ConstraintSet::simplex(2);
        let g = [0.7, -0.3];
        let xa = [0.6, 0.4];
        let ua = [0.2, 0.8];
        let (eta, eta_beta) = (1.3, 0.9);
        let u = prox_step(&geom, &set, &g, &xa, &ua, eta, eta_beta).unwrap();
        // 1-D grid oracle over the 2-simplex.
        let objective = |t: f64| -> f64 {
            let cand = [t, 1.0 - t];
            g[0] * cand[0]
                + g[1] * cand[1]
                + eta * bregman_div(&geom, &xa, &cand).unwrap()
                + eta_beta * bregman_div(&geom, &ua, &cand).unwrap()
        };
        let mut best_t = 0.5;
        let mut best = f64::INFINITY;
        let mut lo = 1e-9;
        let mut hi = 1.0 - 1e-9;
        for _ in 0..8 {
            let steps = 200;
            for s in 0..=steps {
                let t = lo + (hi - lo) * s as f64 / steps as f64;
                let v = objective(t);
                if v < best {
                    best = v;
                    best_t = t;
                }
            }
            let w = (hi - lo) / steps as f64;
            lo = (best_t - 2.0 * w).max(1e-9);
            hi = (best_t + 2.0 * w).min(1.0 - 1e-9);
        }
        // Value-based localization of a smooth minimum caps out near
        // sqrt(machine eps).
        assert_relative_eq!(u[0], best_t, epsilon = 1e-7);
        assert_relative_eq!(u[0] + u[1], 1.0, max_relative = 1e-14);
        assert!(objective(u[0]) <= best + 1e-12);
    }

    #[test]
    fn prox_step_unsupported_combination() {
        let geom = BregmanGeometry::entropy();
        let set = ConstraintSet::symmetric_box(1, 1.0);
        assert!(matches!(
            prox_step(&geom, &set, &[0.0], &[0.5], &[0.5], 1.0, 0.0),
            Err(ModelError::UnsupportedProxCombination(_))
        ));
    }
}
