//! The two-sector transfer model: coupled growth/decline with activity
//! transfer at rate `beta`, solved in closed form through its eigensystem
//! and numerically by Runge–Kutta, plus the inequality ratio and
//! relaxation-time diagnostics.
//!
//! The single source of truth is the symmetric system matrix
//! `[[alpha1 - beta/2, beta/2], [beta/2, alpha2 - beta/2]]`; every closed
//! form below is derived from (and tested against) it.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Model rates: two intrinsic growth rates and the transfer rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorParams<T> {
    /// Intrinsic rate of the (typically growing) first sector.
    pub alpha1: T,
    /// Intrinsic rate of the (typically declining) second sector.
    pub alpha2: T,
    /// Transfer rate, `>= 0`.
    pub beta: T,
}

impl<T: Scalar> SectorParams<T> {
    pub fn new(alpha1: T, alpha2: T, beta: T) -> Self {
        Self { alpha1, alpha2, beta }
    }

    /// Rate gap `delta = alpha1 - alpha2`.
    pub fn delta(&self) -> T {
        self.alpha1 - self.alpha2
    }

    /// Rate sum `sigma = alpha1 + alpha2`.
    pub fn sigma(&self) -> T {
        self.alpha1 + self.alpha2
    }
}

/// Instantaneous sector levels at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorState<T> {
    pub w1: T,
    pub w2: T,
    pub t: T,
}

impl<T: Scalar> SectorState<T> {
    pub fn new(w1: T, w2: T, t: T) -> Self {
        Self { w1, w2, t }
    }

    /// Total activity `W = w1 + w2`.
    pub fn total(&self) -> T {
        self.w1 + self.w2
    }
}

/// Eigendecomposition of the system matrix, optionally with the modal
/// amplitudes of an initial state (`omega` fields are zero from [`eigen`],
/// filled by [`decompose`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem<T> {
    pub lambda_plus: T,
    pub lambda_minus: T,
    /// Unit eigenvector of `lambda_plus`; strictly positive for `beta > 0`
    /// (Perron mode).
    pub v_plus: [T; 2],
    /// Unit eigenvector of `lambda_minus`, orthogonal to `v_plus`.
    pub v_minus: [T; 2],
    pub omega_plus: T,
    pub omega_minus: T,
}

/// Eigenvalues and orthonormal eigenvectors of the transfer matrix.
///
/// `lambda_pm = (sigma - beta)/2 +- sqrt(delta^2 + beta^2)/2`, always real
/// (the matrix is symmetric), with `lambda_plus >= lambda_minus`.
///
/// `beta = 0` is kept exact rather than routed through the square root:
/// the sectors decouple, the rates are `alpha1` and `alpha2` bit-for-bit,
/// and the eigenvectors are the coordinate axes. Equal rates (`delta = 0`)
/// are fine here — the generic matrix form never divides by `delta`.
pub fn eigen<T: Scalar>(params: &SectorParams<T>) -> EigenSystem<T> {
    let half = T::c(0.5);
    if params.beta == T::zero() {
        let (lp, lm, vp, vm) = if params.alpha1 >= params.alpha2 {
            (params.alpha1, params.alpha2, [T::one(), T::zero()], [T::zero(), T::one()])
        } else {
            (params.alpha2, params.alpha1, [T::zero(), T::one()], [T::one(), T::zero()])
        };
        return EigenSystem {
            lambda_plus: lp,
            lambda_minus: lm,
            v_plus: vp,
            v_minus: vm,
            omega_plus: T::zero(),
            omega_minus: T::zero(),
        };
    }

    let a = params.alpha1 - half * params.beta;
    let b = params.alpha2 - half * params.beta;
    let c = half * params.beta;
    let mid = half * (a + b);
    let disc = half * params.delta().hypot(params.beta);
    let lambda_plus = mid + disc;
    let lambda_minus = mid - disc;

    // two algebraically equivalent eigenvector candidates; take the better
    // conditioned one
    let cand1 = [lambda_plus - b, c];
    let cand2 = [c, lambda_plus - a];
    let n1 = cand1[0].hypot(cand1[1]);
    let n2 = cand2[0].hypot(cand2[1]);
    let (raw, norm) = if n1 >= n2 { (cand1, n1) } else { (cand2, n2) };
    let mut v_plus = [raw[0] / norm, raw[1] / norm];
    if v_plus[0] + v_plus[1] < T::zero() {
        v_plus = [-v_plus[0], -v_plus[1]];
    }
    // orthogonal complement (+ 0 clears any negative zero)
    let v_minus = [-v_plus[1] + T::zero(), v_plus[0] + T::zero()];

    EigenSystem {
        lambda_plus,
        lambda_minus,
        v_plus,
        v_minus,
        omega_plus: T::zero(),
        omega_minus: T::zero(),
    }
}

/// [`eigen`] plus the modal amplitudes `omega_pm = w(0) . v_pm` of `state0`.
pub fn decompose<T: Scalar>(params: &SectorParams<T>, state0: &SectorState<T>) -> EigenSystem<T> {
    let mut sys = eigen(params);
    sys.omega_plus = state0.w1 * sys.v_plus[0] + state0.w2 * sys.v_plus[1];
    sys.omega_minus = state0.w1 * sys.v_minus[0] + state0.w2 * sys.v_minus[1];
    sys
}

/// Modal solution `w(tau) = omega_plus v_plus e^{lambda_plus tau} +
/// omega_minus v_minus e^{lambda_minus tau}`, `tau` periods after `state0`.
///
/// Admissible states (non-negative components) stay non-negative along the
/// true solution; that is asserted in debug builds, never clamped.
pub fn closed_form<T: Scalar>(
    params: &SectorParams<T>,
    state0: &SectorState<T>,
    tau: T,
) -> SectorState<T> {
    let sys = decompose(params, state0);
    let ep = sys.omega_plus * (sys.lambda_plus * tau).exp();
    let em = sys.omega_minus * (sys.lambda_minus * tau).exp();
    let w1 = ep * sys.v_plus[0] + em * sys.v_minus[0];
    let w2 = ep * sys.v_plus[1] + em * sys.v_minus[1];
    debug_assert!(
        !(state0.w1 >= T::zero() && state0.w2 >= T::zero())
            || (w1 >= -T::c(1e-9) * state0.total() && w2 >= -T::c(1e-9) * state0.total()),
        "closed_form drove a sector negative"
    );
    SectorState { w1, w2, t: state0.t + tau }
}

/// Right-hand side of the coupled system at one state:
/// `dw1 = alpha1 w1 + beta (<w> - w1)`, `dw2 = alpha2 w2 + beta (<w> - w2)`.
/// The transfer terms cancel in the sum, so total growth is driven by the
/// alphas alone.
pub fn rhs<T: Scalar>(alpha1: T, alpha2: T, beta: T, w1: T, w2: T) -> (T, T) {
    let half = T::c(0.5);
    let flow = half * beta * (w2 - w1);
    (alpha1 * w1 + flow, alpha2 * w2 - flow)
}

/// Classic fourth-order Runge–Kutta under a time-dependent transfer rate.
///
/// `beta(t)` is sampled at the sub-step times, so piecewise-constant
/// schedules integrate exactly as written. The horizon is divided into
/// `round(t_end / dt)` equal steps (at least one); the trajectory includes
/// the initial state and lands on `t_end` exactly.
pub fn integrate<T: Scalar>(
    alpha1: T,
    alpha2: T,
    beta: impl Fn(T) -> T,
    state0: &SectorState<T>,
    t_end: T,
    dt: T,
) -> Result<Vec<SectorState<T>>> {
    assert!(dt > T::zero() && t_end >= dt, "integrate needs dt > 0 and t_end >= dt");
    let n_steps = (t_end / dt).round().to_usize().unwrap_or(1).max(1);
    let h = t_end / T::from_count(n_steps);
    let half = T::c(0.5);
    let sixth = T::one() / T::c(6.0);

    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(*state0);
    let (mut w1, mut w2) = (state0.w1, state0.w2);
    for step in 0..n_steps {
        let t = state0.t + h * T::from_count(step);
        let b0 = beta(t);
        let bh = beta(t + half * h);
        let b1 = beta(t + h);
        let (k1a, k1b) = rhs(alpha1, alpha2, b0, w1, w2);
        let (k2a, k2b) = rhs(alpha1, alpha2, bh, w1 + half * h * k1a, w2 + half * h * k1b);
        let (k3a, k3b) = rhs(alpha1, alpha2, bh, w1 + half * h * k2a, w2 + half * h * k2b);
        let (k4a, k4b) = rhs(alpha1, alpha2, b1, w1 + h * k3a, w2 + h * k3b);
        w1 = w1 + h * sixth * (k1a + T::c(2.0) * (k2a + k3a) + k4a);
        w2 = w2 + h * sixth * (k1b + T::c(2.0) * (k2b + k3b) + k4b);
        let t_next = if step + 1 == n_steps {
            state0.t + t_end
        } else {
            state0.t + h * T::from_count(step + 1)
        };
        if !(w1.is_finite() && w2.is_finite()) {
            return Err(Error::NonFiniteState { t: t_next.to_f64().unwrap_or(f64::NAN) });
        }
        out.push(SectorState { w1, w2, t: t_next });
    }
    Ok(out)
}

/// [`integrate`] under a constant transfer rate taken from `params`.
pub fn integrate_const<T: Scalar>(
    params: &SectorParams<T>,
    state0: &SectorState<T>,
    t_end: T,
    dt: T,
) -> Result<Vec<SectorState<T>>> {
    integrate(params.alpha1, params.alpha2, |_| params.beta, state0, t_end, dt)
}

/// Instantaneous inequality ratio `Delta = w1 / w2`.
pub fn inequality<T: Scalar>(state: &SectorState<T>) -> Result<T> {
    if state.w2 == T::zero() {
        return Err(Error::DivisionByZero("inequality ratio with w2 = 0".into()));
    }
    Ok(state.w1 / state.w2)
}

/// Asymptotic inequality `Delta_inf = v_plus[0] / v_plus[1]`, evaluated in
/// the cancellation-free form `(sqrt(1 + zeta^2) + 1) / zeta` with
/// `zeta = beta / delta`. Tends to `2/zeta` for small transfer and to 1 for
/// large transfer.
pub fn asymptotic_inequality<T: Scalar>(params: &SectorParams<T>) -> Result<T> {
    if params.beta == T::zero() {
        return Err(Error::DivisionByZero(
            "asymptotic inequality diverges without transfer (beta = 0)".into(),
        ));
    }
    let delta = params.delta();
    if delta <= T::zero() {
        return Err(Error::DegenerateRates(format!(
            "asymptotic inequality needs alpha1 > alpha2, got delta = {delta}"
        )));
    }
    let zeta = params.beta / delta;
    Ok(((T::one() + zeta * zeta).sqrt() + T::one()) / zeta)
}

/// Time scale `1 / (lambda_plus + |lambda_minus|)` for reaching the
/// asymptotic (single-mode) regime; infinite when both rates vanish.
pub fn relaxation_time<T: Scalar>(params: &SectorParams<T>) -> T {
    let sys = eigen(params);
    let denom = sys.lambda_plus + sys.lambda_minus.abs();
    if denom == T::zero() {
        T::infinity()
    } else {
        denom.recip()
    }
}

#[cfg(test)]
mod tests {
    // Reference constants keep their full oracle digits; f64 rounds them.
    #![allow(clippy::excessive_precision)]

    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const FIG5: SectorParams<f64> = SectorParams { alpha1: 0.02, alpha2: -0.05, beta: 0.01 };

    #[test]
    fn eigenvalues_at_reference_params() {
        let sys = eigen(&FIG5);
        // sqrt(0.07^2 + 0.01^2)/2 above/below (sigma - beta)/2
        assert_relative_eq!(sys.lambda_plus, 0.01535533905932737622, max_relative = 1e-15);
        assert_relative_eq!(sys.lambda_minus, -0.05535533905932737622, max_relative = 1e-15);
        // trace and determinant of the system matrix survive
        assert_relative_eq!(sys.lambda_plus + sys.lambda_minus, -0.04, max_relative = 1e-12);
        assert_relative_eq!(sys.lambda_plus * sys.lambda_minus, -0.00085, max_relative = 1e-12);
    }

    #[test]
    fn decoupled_sectors_are_exact() {
        let sys = eigen(&SectorParams::new(0.02, -0.05, 0.0));
        assert_eq!(sys.lambda_plus, 0.02);
        assert_eq!(sys.lambda_minus, -0.05);
        assert_eq!(sys.v_plus, [1.0, 0.0]);
        assert_eq!(sys.v_minus, [0.0, 1.0]);

        // swapped ordering when the second sector grows faster
        let sys = eigen(&SectorParams::new(-0.05, 0.02, 0.0));
        assert_eq!(sys.lambda_plus, 0.02);
        assert_eq!(sys.v_plus, [0.0, 1.0]);
    }

    #[test]
    fn equal_rates_with_transfer_need_no_special_handling() {
        let sys = eigen(&SectorParams::new(0.01, 0.01, 0.4));
        assert_relative_eq!(sys.lambda_plus, 0.01, max_relative = 1e-12);
        assert_relative_eq!(sys.lambda_minus, 0.01 - 0.4, max_relative = 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(sys.v_plus[0], s, max_relative = 1e-12);
        assert_relative_eq!(sys.v_plus[1], s, max_relative = 1e-12);
    }

    #[test]
    fn decompose_reconstructs_and_satisfies_parseval() {
        let state = SectorState::new(0.1, 0.9, 0.0);
        let sys = decompose(&FIG5, &state);
        let r1 = sys.omega_plus * sys.v_plus[0] + sys.omega_minus * sys.v_minus[0];
        let r2 = sys.omega_plus * sys.v_plus[1] + sys.omega_minus * sys.v_minus[1];
        assert_relative_eq!(r1, 0.1, max_relative = 1e-12);
        assert_relative_eq!(r2, 0.9, max_relative = 1e-12);
        assert_relative_eq!(
            sys.omega_plus.powi(2) + sys.omega_minus.powi(2),
            0.1f64.powi(2) + 0.9f64.powi(2),
            max_relative = 1e-12
        );
    }

    #[test]
    fn state_on_the_growing_mode_has_no_minus_amplitude() {
        let sys = eigen(&FIG5);
        let state = SectorState::new(3.0 * sys.v_plus[0], 3.0 * sys.v_plus[1], 0.0);
        let d = decompose(&FIG5, &state);
        assert_relative_eq!(d.omega_plus, 3.0, max_relative = 1e-12);
        assert!(d.omega_minus.abs() < 1e-15);
    }

    #[test]
    fn closed_form_at_zero_elapsed_time_returns_the_state() {
        let state = SectorState::new(0.1, 0.9, 5.0);
        let s = closed_form(&FIG5, &state, 0.0);
        assert_relative_eq!(s.w1, 0.1, max_relative = 1e-12);
        assert_relative_eq!(s.w2, 0.9, max_relative = 1e-12);
        assert_eq!(s.t, 5.0);
    }

    #[test]
    fn closed_form_decouples_without_transfer() {
        let params = SectorParams::new(0.02, -0.05, 0.0);
        let s = closed_form(&params, &SectorState::new(1.0, 1.0, 0.0), 10.0);
        assert_relative_eq!(s.w1, (0.2f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(s.w2, (-0.5f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn rk4_matches_the_closed_form() {
        let state = SectorState::new(0.1, 0.9, 0.0);
        let traj = integrate_const(&FIG5, &state, 50.0, 0.01).unwrap();
        for s in traj.iter().step_by(500) {
            let exact = closed_form(&FIG5, &state, s.t);
            assert_relative_eq!(s.w1, exact.w1, max_relative = 1e-6);
            assert_relative_eq!(s.w2, exact.w2, max_relative = 1e-6);
        }
        let last = traj.last().unwrap();
        assert_eq!(last.t, 50.0);
        let exact = closed_form(&FIG5, &state, 50.0);
        assert_relative_eq!(last.w1, exact.w1, max_relative = 1e-9);
        assert_relative_eq!(last.w2, exact.w2, max_relative = 1e-9);
    }

    #[test]
    fn trajectory_covers_zero_to_t_end_inclusive() {
        let traj =
            integrate_const(&FIG5, &SectorState::new(1.0, 1.0, 0.0), 1.0, 0.3).unwrap();
        // 1.0/0.3 rounds to 3 steps of h = 1/3
        assert_eq!(traj.len(), 4);
        assert_eq!(traj[0].t, 0.0);
        assert_eq!(traj.last().unwrap().t, 1.0);
    }

    #[test]
    fn pure_diffusion_conserves_total_and_equalizes() {
        let params = SectorParams::<f64>::new(0.0, 0.0, 0.5);
        let state = SectorState::new(1.5, 0.5, 0.0);
        let traj = integrate_const(&params, &state, 40.0, 0.01).unwrap();
        for s in &traj {
            assert_relative_eq!(s.total(), 2.0, max_relative = 1e-12);
        }
        let last = traj.last().unwrap();
        assert!((last.w1 - last.w2).abs() < 1e-8);
    }

    #[test]
    fn runaway_rates_report_a_non_finite_state() {
        let params = SectorParams::new(100.0, 100.0, 0.0);
        let r = integrate_const(&params, &SectorState::new(1.0, 1.0, 0.0), 20.0, 0.01);
        assert!(matches!(r, Err(Error::NonFiniteState { .. })));
    }

    #[test]
    fn inequality_ratio_and_its_guards() {
        assert_eq!(inequality(&SectorState::new(3.0, 1.5, 0.0)).unwrap(), 2.0);
        assert!(matches!(
            inequality(&SectorState::new(1.0, 0.0, 0.0)),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn asymptotic_inequality_reference_value() {
        // zeta = beta/delta = 0.007/0.07 = 0.1
        let params = SectorParams::new(0.02, -0.05, 0.007);
        let d = asymptotic_inequality(&params).unwrap();
        assert_relative_eq!(d, 20.04987562112089027, max_relative = 1e-14);
        // small-transfer approximation 2/zeta
        assert_relative_eq!(d, 20.0, max_relative = 0.01);
    }

    #[test]
    fn asymptotic_inequality_guards() {
        assert!(matches!(
            asymptotic_inequality(&SectorParams::new(0.02, -0.05, 0.0)),
            Err(Error::DivisionByZero(_))
        ));
        assert!(matches!(
            asymptotic_inequality(&SectorParams::new(0.02, 0.02, 0.01)),
            Err(Error::DegenerateRates(_))
        ));
    }

    #[test]
    fn long_run_ratio_approaches_the_asymptotic_inequality() {
        let params = SectorParams::new(0.02, -0.05, 0.007);
        let target = asymptotic_inequality(&params).unwrap();
        let rt = relaxation_time(&params);
        let s = closed_form(&params, &SectorState::new(0.1, 0.9, 0.0), 12.0 * rt);
        assert_relative_eq!(s.w1 / s.w2, target, max_relative = 0.01);
    }

    #[test]
    fn relaxation_time_reference_values() {
        assert_relative_eq!(
            relaxation_time(&FIG5),
            14.142135623730950488,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            relaxation_time(&SectorParams::new(0.02, -0.05, 0.0)),
            1.0 / 0.07,
            max_relative = 1e-15
        );
        assert_eq!(relaxation_time(&SectorParams::new(0.0, 0.0, 0.0)), f64::INFINITY);
    }

    #[test]
    fn both_eigenvalues_decrease_with_transfer() {
        let mut prev = eigen(&SectorParams::new(0.02, -0.05, 0.0));
        for i in 1..=100 {
            let beta = i as f64 * 0.01;
            let sys = eigen(&SectorParams::new(0.02, -0.05, beta));
            assert!(sys.lambda_plus <= prev.lambda_plus + 1e-15, "beta {beta}");
            assert!(sys.lambda_minus <= prev.lambda_minus + 1e-15, "beta {beta}");
            prev = sys;
        }
    }

    proptest! {
        #[test]
        fn eigenpairs_satisfy_the_matrix_equation(
            a1 in -0.2f64..0.2,
            a2 in -0.2f64..0.2,
            beta in 0.0f64..1.0,
        ) {
            let params = SectorParams::new(a1, a2, beta);
            let sys = eigen(&params);
            let m = [
                [a1 - beta / 2.0, beta / 2.0],
                [beta / 2.0, a2 - beta / 2.0],
            ];
            for (lambda, v) in [(sys.lambda_plus, sys.v_plus), (sys.lambda_minus, sys.v_minus)] {
                let mv = [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
                prop_assert!((mv[0] - lambda * v[0]).abs() <= 1e-12);
                prop_assert!((mv[1] - lambda * v[1]).abs() <= 1e-12);
            }
            prop_assert!((sys.v_plus[0].hypot(sys.v_plus[1]) - 1.0).abs() <= 1e-12);
            prop_assert!(
                (sys.v_plus[0] * sys.v_minus[0] + sys.v_plus[1] * sys.v_minus[1]).abs() <= 1e-12
            );
            prop_assert!(sys.lambda_plus >= sys.lambda_minus);
        }

        #[test]
        fn trace_and_determinant_identities_hold(
            a1 in -0.2f64..0.2,
            a2 in -0.2f64..0.2,
            beta in 0.0f64..1.0,
        ) {
            let params = SectorParams::new(a1, a2, beta);
            let sys = eigen(&params);
            let trace = params.sigma() - beta;
            let det = a1 * a2 - beta * params.sigma() / 2.0;
            prop_assert!((sys.lambda_plus + sys.lambda_minus - trace).abs() <= 1e-12);
            prop_assert!((sys.lambda_plus * sys.lambda_minus - det).abs() <= 1e-12);
        }

        #[test]
        fn transfer_conserves_the_alpha_driven_total(
            a1 in -0.1f64..0.1,
            a2 in -0.1f64..0.1,
            beta in 0.0f64..1.0,
            w1 in 0.0f64..2.0,
            w2 in 0.0f64..2.0,
        ) {
            let (d1, d2) = rhs(a1, a2, beta, w1, w2);
            prop_assert!((d1 + d2 - (a1 * w1 + a2 * w2)).abs() <= 1e-14);
        }
    }
}
