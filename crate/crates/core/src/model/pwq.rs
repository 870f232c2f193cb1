//! Exact minimization of 1-D convex piecewise-quadratic functions
//! `q(v) = lin*v + (quad/2)*v^2 + sum_t c_t |v - kappa_t|` over an interval.
//!
//! The minimizer is a stationary point of one linear piece of `q'` or an
//! interval endpoint; enumerating the pieces between sorted kinks finds it
//! in closed form.

#[derive(Debug, Clone, Default)]
pub(crate) struct PiecewiseQuad1d {
    lin: f64,
    quad: f64,
    kinks: Vec<(f64, f64)>, // (weight c > 0, position kappa)
}

impl PiecewiseQuad1d {
    pub fn add_linear(&mut self, c: f64) {
        self.lin += c;
    }

    /// Add `(s/2)(v - center)^2`.
    pub fn add_quadratic(&mut self, s: f64, center: f64) {
        self.quad += s;
        self.lin -= s * center;
    }

    /// Add `c |v - kappa|` with `c >= 0`.
    pub fn add_abs(&mut self, c: f64, kappa: f64) {
        if c > 0.0 {
            self.kinks.push((c, kappa));
        }
    }

    pub fn eval(&self, v: f64) -> f64 {
        let mut q = self.lin * v + 0.5 * self.quad * v * v;
        for &(c, kappa) in &self.kinks {
            q += c * (v - kappa).abs();
        }
        q
    }

    /// Exact minimizer over `[lo, hi]`. Requires a strictly convex quadratic
    /// part (`quad > 0`, always true for prox subproblems).
    pub fn minimize(&self, lo: f64, hi: f64) -> f64 {
        debug_assert!(self.quad > 0.0 && lo <= hi);
        let mut kinks = self.kinks.clone();
        kinks.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let total_c: f64 = kinks.iter().map(|&(c, _)| c).sum();

        let mut best_v = lo;
        let mut best_q = self.eval(lo);
        let mut consider = |v: f64, q: &Self| {
            let val = q.eval(v);
            if val < best_q {
                best_q = val;
                best_v = v;
            }
        };
        consider(hi, self);

        // Piece r has sign pattern +1 for kinks at index < r, -1 otherwise.
        let mut signed = -total_c;
        for r in 0..=kinks.len() {
            let piece_lo = if r == 0 { f64::NEG_INFINITY } else { kinks[r - 1].1 };
            let piece_hi = if r == kinks.len() { f64::INFINITY } else { kinks[r].1 };
            let seg_lo = piece_lo.max(lo);
            let seg_hi = piece_hi.min(hi);
            if seg_lo <= seg_hi {
                let stationary = -(self.lin + signed) / self.quad;
                consider(stationary.clamp(seg_lo, seg_hi), self);
            }
            if r < kinks.len() {
                signed += 2.0 * kinks[r].0;
            }
        }
        best_v
    }
}
