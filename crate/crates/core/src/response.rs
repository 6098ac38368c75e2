//! The two-exponential recession–recovery response function.
//!
//! A shocked economy is modeled as a growing fraction `f` recovering at rate
//! `lambda_plus` and a shrinking remainder `1 - f` decaying at rate
//! `lambda_minus`:
//!
//! ```text
//! W(t) = W(t0) * [ f * exp(lambda_plus * (t - t0)) + (1 - f) * exp(lambda_minus * (t - t0)) ]
//! ```
//!
//! Time is a dimensionless period index (year or quarter); the unit is
//! metadata carried by the series, not by the model.

use crate::scalar::Scalar;

/// Parameter vector of the response function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseParams<T> {
    /// Fraction of the economy that grows, in `[0, 1]`.
    pub f: T,
    /// Growth rate per period of the growing fraction.
    pub lambda_plus: T,
    /// Decay rate per period of the shrinking fraction (non-positive in fits).
    pub lambda_minus: T,
    /// Level at the shock time `t0`; strictly positive.
    pub w0: T,
    /// Period index of the shock / episode start.
    pub t0: T,
}

impl<T: Scalar> ResponseParams<T> {
    pub fn new(f: T, lambda_plus: T, lambda_minus: T, w0: T, t0: T) -> Self {
        Self { f, lambda_plus, lambda_minus, w0, t0 }
    }

    /// Evaluate `W(t)`.
    ///
    /// Written as `w0 * (b + f * (a - b))` with `a = exp(lambda_plus dt)`,
    /// `b = exp(lambda_minus dt)`; algebraically identical to the sum of the
    /// two components, and exactly `w0` at `t = t0` for every `f` (at
    /// `dt = 0` the bracket is `1 + f * 0`).
    #[inline]
    pub fn evaluate(&self, t: T) -> T {
        let dt = t - self.t0;
        let a = (self.lambda_plus * dt).exp();
        let b = (self.lambda_minus * dt).exp();
        self.w0 * (b + self.f * (a - b))
    }

    /// Partial derivatives of `evaluate` with respect to
    /// `(f, lambda_plus, lambda_minus, w0)`, in that order.
    #[inline]
    pub fn gradient(&self, t: T) -> [T; 4] {
        let dt = t - self.t0;
        let a = (self.lambda_plus * dt).exp();
        let b = (self.lambda_minus * dt).exp();
        let one = T::one();
        [
            self.w0 * (a - b),
            self.w0 * self.f * dt * a,
            self.w0 * (one - self.f) * dt * b,
            b + self.f * (a - b),
        ]
    }

    /// True iff the curve is J-shaped: the initial slope
    /// `W'(t0) = w0 * (f lambda_plus + (1 - f) lambda_minus)` is negative,
    /// i.e. a dip before the recovery. The boundary (zero slope) is not a J.
    #[inline]
    pub fn is_j_shaped(&self) -> bool {
        self.f * self.lambda_plus + (T::one() - self.f) * self.lambda_minus < T::zero()
    }

    /// Canonical ordering of the two components.
    ///
    /// `evaluate` is invariant under the swap `(f, lambda_plus) <->
    /// (1 - f, lambda_minus)`; this picks the representative with
    /// `lambda_plus >= lambda_minus` so fitted parameters are unique.
    #[inline]
    pub fn canonicalize(self) -> Self {
        if self.lambda_plus < self.lambda_minus {
            Self {
                f: T::one() - self.f,
                lambda_plus: self.lambda_minus,
                lambda_minus: self.lambda_plus,
                ..self
            }
        } else {
            self
        }
    }
}

#[cfg(test)]
mod tests {
    // Reference constants keep their full oracle digits; f64 rounds them.
    #![allow(clippy::excessive_precision, clippy::needless_range_loop)]

    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn p(f: f64, lp: f64, lm: f64, w0: f64, t0: f64) -> ResponseParams<f64> {
        ResponseParams::new(f, lp, lm, w0, t0)
    }

    #[test]
    fn zero_rates_hold_the_level() {
        assert_eq!(p(0.5, 0.0, 0.0, 100.0, 0.0).evaluate(10.0), 100.0);
    }

    #[test]
    fn at_t0_returns_w0_exactly() {
        assert_eq!(p(1.0, 0.02, -0.1, 100.0, 0.0).evaluate(0.0), 100.0);
        // exactness must hold for every f, not just Sterbenz-friendly ones
        for &f in &[0.1, 0.3, 0.49999, 0.7, 0.993] {
            assert_eq!(p(f, 0.31, -0.7, 87.3, 5.0).evaluate(5.0), 87.3);
        }
    }

    #[test]
    fn matches_bignum_evaluation_of_the_formula() {
        // W(20) for (f=0.75, lp=0.0125, lm=-0.169, w0=100, t0=0), evaluated
        // independently with 40-digit arithmetic.
        let w = p(0.75, 0.0125, -0.169, 100.0, 0.0).evaluate(20.0);
        assert_relative_eq!(w, 97.153092619945594856, max_relative = 1e-15);
    }

    #[test]
    fn gradient_trivial_cases() {
        // equal rates: the two exponentials cancel in the f-derivative
        assert_eq!(p(0.5, 0.0, 0.0, 1.0, 0.0).gradient(7.0)[0], 0.0);
        // at t0 the level scales linearly with w0
        assert_eq!(p(0.3, 0.2, -0.4, 55.0, 3.0).gradient(3.0)[3], 1.0);
    }

    #[test]
    fn gradient_lambda_plus_matches_bignum_value() {
        let g = p(0.75, 0.0125, -0.169, 1.0, 0.0).gradient(10.0);
        assert_relative_eq!(g[1], 8.4986133980011973762, max_relative = 1e-15);
    }

    #[test]
    fn j_shape_classification() {
        assert!(!p(0.5, 0.1, -0.1, 1.0, 0.0).is_j_shaped()); // slope exactly 0
        // 0.75 * 0.0125 + 0.25 * (-0.169) = -0.032875 < 0
        assert!(p(0.75, 0.0125, -0.169, 1.0, 0.0).is_j_shaped());
        assert!(!p(1.0, 0.02, -0.5, 1.0, 0.0).is_j_shaped()); // decaying part unweighted
    }

    #[test]
    fn canonicalize_swaps_exactly_when_misordered() {
        let c = p(0.3, -0.1, 0.05, 1.0, 0.0).canonicalize();
        assert_eq!((c.f, c.lambda_plus, c.lambda_minus), (0.7, 0.05, -0.1));
        let already = p(0.75, 0.0125, -0.169, 1.0, 0.0);
        assert_eq!(already.canonicalize(), already);
    }

    #[test]
    fn log_growth_ratio_rises_monotonically_to_lambda_plus() {
        let params = p(0.75, 0.0125, -0.169, 100.0, 0.0);
        let mut prev = f64::NEG_INFINITY;
        let mut last = 0.0;
        for t in 0..80 {
            let r = (params.evaluate(t as f64 + 1.0) / params.evaluate(t as f64)).ln();
            assert!(r >= prev - 1e-12, "log-ratio dipped at t={t}: {r} < {prev}");
            prev = r;
            last = r;
        }
        assert_abs_diff_eq!(last, 0.0125, epsilon = 1e-7);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn swap_symmetry_leaves_evaluate_unchanged(
            f in 0.0f64..=1.0,
            lp in -1.0f64..=1.0,
            lm in -1.0f64..=0.0,
            w0 in 1.0f64..1000.0,
            t0 in 0.0f64..20.0,
            dt in 0.0f64..40.0,
        ) {
            let a = p(f, lp, lm, w0, t0);
            let b = p(1.0 - f, lm, lp, w0, t0);
            let t = t0 + dt;
            prop_assert!((a.evaluate(t) - b.evaluate(t)).abs()
                <= 1e-12 * a.evaluate(t).abs().max(1.0));
            // and canonicalize itself preserves the curve
            let c = a.canonicalize();
            prop_assert!((a.evaluate(t) - c.evaluate(t)).abs()
                <= 1e-12 * a.evaluate(t).abs().max(1.0));
        }

        #[test]
        fn evaluate_at_t0_is_w0_bit_for_bit(
            f in 0.0f64..=1.0,
            lp in -1.0f64..=1.0,
            lm in -1.0f64..=0.0,
            w0 in 1.0f64..1000.0,
            t0 in -10.0f64..50.0,
        ) {
            prop_assert_eq!(p(f, lp, lm, w0, t0).evaluate(t0), w0);
        }

        #[test]
        fn gradient_matches_central_differences(
            f in 0.05f64..0.95,
            lp in 0.005f64..0.05,
            lm in -0.5f64..-0.02,
            w0 in 50.0f64..200.0,
            t0 in 0.0f64..20.0,
            dt in 1.0f64..60.0,
        ) {
            let params = p(f, lp, lm, w0, t0);
            let t = t0 + dt;
            let analytic = params.gradient(t);
            let fields = |q: &ResponseParams<f64>| [q.f, q.lambda_plus, q.lambda_minus, q.w0];
            for i in 0..4 {
                let x = fields(&params)[i];
                let h = if x == 0.0 { 1e-8 } else { 1e-6 * x.abs() };
                let mut up = params;
                let mut dn = params;
                match i {
                    0 => { up.f = x + h; dn.f = x - h; }
                    1 => { up.lambda_plus = x + h; dn.lambda_plus = x - h; }
                    2 => { up.lambda_minus = x + h; dn.lambda_minus = x - h; }
                    _ => { up.w0 = x + h; dn.w0 = x - h; }
                }
                let fd = (up.evaluate(t) - dn.evaluate(t)) / (2.0 * h);
                // relative 1e-6 with an absolute floor covering FD round-off
                let tol = 1e-6 * analytic[i].abs().max(fd.abs()) + 1e-6;
                prop_assert!((analytic[i] - fd).abs() <= tol,
                    "component {} analytic {} vs fd {}", i, analytic[i], fd);
            }
        }
    }
}
