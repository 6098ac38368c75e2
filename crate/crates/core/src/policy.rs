//! Transfer-rate policies over the two-sector model: constant-rate sweeps
//! ("shock therapy" when the rate is small), the envelope-chasing schedule,
//! greedy finite-lookahead optimization, curvature-based classification of
//! inequality trajectories, and effective re-fits of simulated output with
//! the response function.

use crate::error::Result;
use crate::fit::{fit_episode, FitOptions, FitResult};
use crate::scalar::Scalar;
use crate::sector::{decompose, integrate, rhs, SectorParams, SectorState};
use crate::series::{PeriodUnit, SeriesSegment};

/// A piecewise-constant transfer-rate schedule: `betas[i]` applies from
/// `times[i]` until the next entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySchedule<T> {
    /// Strictly increasing switch times.
    pub times: Vec<T>,
    /// Rate in force from the matching time onward.
    pub betas: Vec<T>,
    pub beta_min: T,
    pub beta_max: T,
}

impl<T: Scalar> PolicySchedule<T> {
    pub fn new(times: Vec<T>, betas: Vec<T>, beta_min: T, beta_max: T) -> Self {
        assert_eq!(times.len(), betas.len(), "one beta per switch time");
        assert!(!times.is_empty(), "schedule cannot be empty");
        debug_assert!(times.windows(2).all(|w| w[0] < w[1]), "times must increase");
        debug_assert!(beta_min <= beta_max);
        Self { times, betas, beta_min, beta_max }
    }

    /// A single rate over the whole horizon.
    pub fn constant(beta: T, beta_min: T, beta_max: T) -> Self {
        Self::new(vec![T::zero()], vec![beta], beta_min, beta_max)
    }

    /// Rate in force at time `t`: the entry at the last switch time `<= t`
    /// (times before the first switch use the first entry).
    pub fn beta_at(&self, t: T) -> T {
        let idx = self.times.partition_point(|&s| s <= t);
        self.betas[idx.saturating_sub(1)]
    }
}

/// A simulated policy run: the schedule, the state trajectory on the `dt`
/// grid, and the derived total-activity and inequality sequences.
#[derive(Debug, Clone)]
pub struct PolicyOutcome<T> {
    pub schedule: PolicySchedule<T>,
    pub trajectory: Vec<SectorState<T>>,
    /// Total activity `w1 + w2` per trajectory sample.
    pub w: Vec<T>,
    /// Inequality ratio `w1 / w2` per trajectory sample.
    pub delta: Vec<T>,
    /// Sample spacing of the trajectory.
    pub dt: T,
    /// Response-function re-fit of `w`; filled by [`effective_fit`].
    pub effective_fit: Option<FitResult<T>>,
}

impl<T: Scalar> PolicyOutcome<T> {
    fn from_trajectory(schedule: PolicySchedule<T>, trajectory: Vec<SectorState<T>>, dt: T) -> Self {
        let w = trajectory.iter().map(|s| s.total()).collect();
        let delta = trajectory.iter().map(|s| s.w1 / s.w2).collect();
        Self { schedule, trajectory, w, delta, dt, effective_fit: None }
    }

    /// Index stride that lands on (approximately) unit-period samples.
    fn unit_stride(&self) -> usize {
        (self.dt.recip().round().to_usize().unwrap_or(1)).max(1)
    }

    /// The inequality sequence thinned to unit periods — the sampling
    /// [`classify_policy`] expects.
    pub fn delta_at_unit_periods(&self) -> Vec<T> {
        self.delta.iter().copied().step_by(self.unit_stride()).collect()
    }
}

/// Envelope construction result: the upper envelope of the constant-rate
/// scenarios, the schedule chasing it, and what that schedule actually
/// attains.
#[derive(Debug, Clone)]
pub struct Envelope<T> {
    /// `max_i W_i(t)` over the scenario grid, per `dt` sample.
    pub envelope_w: Vec<T>,
    /// Argmax scenario's rate per sample (ties to the smaller rate).
    pub schedule: PolicySchedule<T>,
    /// The trajectory actually reached by following `schedule`; never above
    /// the envelope.
    pub attained: PolicyOutcome<T>,
}

/// Modal form of one constant-beta scenario: each sector is a sum of two
/// exponentials, so a whole scenario is six numbers — the key to sweeping
/// thousand-point grids without materializing a trajectory per point.
struct Modal<T> {
    lp: T,
    lm: T,
    /// `omega_plus * v_plus` and `omega_minus * v_minus`.
    ap: [T; 2],
    am: [T; 2],
}

impl<T: Scalar> Modal<T> {
    fn of(alpha1: T, alpha2: T, beta: T, state0: &SectorState<T>) -> Self {
        let sys = decompose(&SectorParams::new(alpha1, alpha2, beta), state0);
        Modal {
            lp: sys.lambda_plus,
            lm: sys.lambda_minus,
            ap: [sys.omega_plus * sys.v_plus[0], sys.omega_plus * sys.v_plus[1]],
            am: [sys.omega_minus * sys.v_minus[0], sys.omega_minus * sys.v_minus[1]],
        }
    }

    fn state_at(&self, tau: T, t: T) -> SectorState<T> {
        let ep = (self.lp * tau).exp();
        let em = (self.lm * tau).exp();
        SectorState {
            w1: self.ap[0] * ep + self.am[0] * em,
            w2: self.ap[1] * ep + self.am[1] * em,
            t,
        }
    }

    fn total_at(&self, tau: T) -> T {
        let s = self.state_at(tau, tau);
        s.w1 + s.w2
    }
}

fn grid_steps<T: Scalar>(t_end: T, dt: T) -> (usize, T) {
    assert!(dt > T::zero() && t_end >= dt, "need dt > 0 and t_end >= dt");
    let n = (t_end / dt).round().to_usize().unwrap_or(1).max(1);
    (n, t_end / T::from_count(n))
}

/// `n` logarithmically spaced rates from `beta_min` to `beta_max` inclusive.
pub fn log_beta_grid<T: Scalar>(beta_min: T, beta_max: T, n: usize) -> Vec<T> {
    assert!(n >= 1 && beta_min > T::zero() && beta_max >= beta_min);
    if n == 1 {
        return vec![beta_min];
    }
    let (la, lb) = (beta_min.ln(), beta_max.ln());
    let denom = T::from_count(n - 1);
    (0..n)
        .map(|i| {
            if i == 0 {
                beta_min
            } else if i == n - 1 {
                beta_max
            } else {
                (la + (lb - la) * T::from_count(i) / denom).exp()
            }
        })
        .collect()
}

/// One closed-form trajectory per grid rate, all from `state0` over `[0,
/// t_end]` sampled every `dt`.
pub fn static_sweep<T: Scalar>(
    alpha1: T,
    alpha2: T,
    beta_grid: &[T],
    state0: &SectorState<T>,
    t_end: T,
    dt: T,
) -> Vec<PolicyOutcome<T>> {
    assert!(!beta_grid.is_empty(), "empty beta grid");
    let (n_steps, h) = grid_steps(t_end, dt);
    let beta_lo = beta_grid.iter().copied().fold(T::infinity(), T::min);
    let beta_hi = beta_grid.iter().copied().fold(-T::infinity(), T::max);
    beta_grid
        .iter()
        .map(|&beta| {
            let modal = Modal::of(alpha1, alpha2, beta, state0);
            let trajectory = (0..=n_steps)
                .map(|k| {
                    let tau = if k == n_steps { t_end } else { h * T::from_count(k) };
                    modal.state_at(tau, state0.t + tau)
                })
                .collect();
            PolicyOutcome::from_trajectory(
                PolicySchedule::constant(beta, beta_lo, beta_hi),
                trajectory,
                h,
            )
        })
        .collect()
}

/// Upper envelope of the constant-rate scenarios and the schedule that
/// chases it.
///
/// At each sample the schedule adopts the rate of whichever scenario is
/// currently highest (ties to the smaller rate); the attained trajectory
/// integrates the system under that schedule. Chasing the envelope cannot
/// reach it — each scenario's height presumes its rate was held from t=0 —
/// so `attained.w` tracks below `envelope_w`.
pub fn envelope_policy<T: Scalar>(
    alpha1: T,
    alpha2: T,
    beta_grid: &[T],
    state0: &SectorState<T>,
    t_end: T,
    dt: T,
) -> Result<Envelope<T>> {
    assert!(!beta_grid.is_empty(), "empty beta grid");
    let (n_steps, h) = grid_steps(t_end, dt);
    let modals: Vec<(T, Modal<T>)> = beta_grid
        .iter()
        .map(|&beta| (beta, Modal::of(alpha1, alpha2, beta, state0)))
        .collect();
    let beta_lo = beta_grid.iter().copied().fold(T::infinity(), T::min);
    let beta_hi = beta_grid.iter().copied().fold(-T::infinity(), T::max);

    let pick = |tau: T| {
        let mut best_w = -T::infinity();
        let mut best_beta = T::infinity();
        for (beta, modal) in &modals {
            let w = modal.total_at(tau);
            if w > best_w || (w == best_w && *beta < best_beta) {
                best_w = w;
                best_beta = *beta;
            }
        }
        (best_w, best_beta)
    };

    let mut envelope_w = Vec::with_capacity(n_steps + 1);
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut betas = Vec::with_capacity(n_steps + 1);
    for k in 0..=n_steps {
        let tau = if k == n_steps { t_end } else { h * T::from_count(k) };
        let (best_w, best_beta) = pick(tau);
        // every scenario shares the same start state, so the argmax at the
        // very first sample is a rounding-noise tie; break it by who leads
        // over the first interval instead
        let chosen = if k == 0 { pick(T::c(0.5) * h).1 } else { best_beta };
        envelope_w.push(best_w);
        times.push(state0.t + tau);
        betas.push(chosen);
    }

    let schedule = PolicySchedule::new(times, betas, beta_lo, beta_hi);
    let traj = integrate(alpha1, alpha2, |t| schedule.beta_at(t), state0, t_end, dt)?;
    let attained = PolicyOutcome::from_trajectory(schedule.clone(), traj, h);
    Ok(Envelope { envelope_w, schedule, attained })
}

/// Golden-section maximizer of a unimodal `f` on `[a, b]` to a relative
/// interval tolerance.
fn golden_max<T: Scalar>(f: impl Fn(T) -> T, mut a: T, mut b: T, rel_tol: T) -> T {
    let invphi = T::c(0.5) * (T::c(5.0).sqrt() - T::one());
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if b - a <= rel_tol * T::c(0.5) * (a.abs() + b.abs()) + T::c(1e-300) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    T::c(0.5) * (a + b)
}

/// Greedy finite-lookahead policy: at each step choose the rate whose
/// constant continuation maximizes total activity `H` periods ahead, then
/// advance one step under it.
///
/// The per-step objective `W(t+H)` is a two-exponential in the lookahead —
/// a transcendental maximization solved by golden-section search. When the
/// objective is rate-independent (equal alphas) the tie breaks to
/// `beta_min`. The instantaneous growth itself is rate-independent (the
/// transfer conserves the total), which is why a strictly positive
/// lookahead is required.
pub fn optimal_policy<T: Scalar>(
    alpha1: T,
    alpha2: T,
    beta_bounds: (T, T),
    state0: &SectorState<T>,
    t_end: T,
    dt: T,
    lookahead: T,
) -> Result<PolicyOutcome<T>> {
    let (beta_min, beta_max) = beta_bounds;
    assert!(lookahead > T::zero(), "lookahead must be positive");
    assert!(beta_min > T::zero() && beta_min <= beta_max, "invalid beta bounds");
    let (n_steps, h) = grid_steps(t_end, dt);
    let half = T::c(0.5);
    let sixth = T::one() / T::c(6.0);

    let mut state = *state0;
    let mut trajectory = Vec::with_capacity(n_steps + 1);
    trajectory.push(state);
    let mut times = Vec::with_capacity(n_steps);
    let mut betas = Vec::with_capacity(n_steps);
    for step in 0..n_steps {
        let ahead =
            |beta: T| Modal::of(alpha1, alpha2, beta, &state).total_at(lookahead);
        let mut beta = golden_max(ahead, beta_min, beta_max, T::c(1e-8));
        if ahead(beta) <= ahead(beta_min) * (T::one() + T::c(1e-12)) {
            beta = beta_min;
        }
        times.push(state.t);
        betas.push(beta);

        let (k1a, k1b) = rhs(alpha1, alpha2, beta, state.w1, state.w2);
        let (k2a, k2b) =
            rhs(alpha1, alpha2, beta, state.w1 + half * h * k1a, state.w2 + half * h * k1b);
        let (k3a, k3b) =
            rhs(alpha1, alpha2, beta, state.w1 + half * h * k2a, state.w2 + half * h * k2b);
        let (k4a, k4b) = rhs(alpha1, alpha2, beta, state.w1 + h * k3a, state.w2 + h * k3b);
        let w1 = state.w1 + h * sixth * (k1a + T::c(2.0) * (k2a + k3a) + k4a);
        let w2 = state.w2 + h * sixth * (k1b + T::c(2.0) * (k2b + k3b) + k4b);
        let t = if step + 1 == n_steps {
            state0.t + t_end
        } else {
            state0.t + h * T::from_count(step + 1)
        };
        if !(w1.is_finite() && w2.is_finite()) {
            return Err(crate::error::Error::NonFiniteState {
                t: t.to_f64().unwrap_or(f64::NAN),
            });
        }
        state = SectorState { w1, w2, t };
        trajectory.push(state);
    }

    let schedule = PolicySchedule::new(times, betas, beta_min, beta_max);
    Ok(PolicyOutcome::from_trajectory(schedule, trajectory, h))
}

/// Classification of an inequality trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyClass {
    Static,
    Dynamic,
    Indeterminate,
}

impl std::fmt::Display for PolicyClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PolicyClass::Static => "static",
            PolicyClass::Dynamic => "dynamic",
            PolicyClass::Indeterminate => "indeterminate",
        })
    }
}

fn median<T: Scalar>(values: &mut [T]) -> T {
    values.sort_by(|a, b| a.partial_cmp(b).expect("non-finite in median"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        T::c(0.5) * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Classify a policy from its inequality trajectory sampled at *unit*
/// periods (see [`PolicyOutcome::delta_at_unit_periods`]).
///
/// Works in log space, where a static run's `Delta` relaxes with strictly
/// negative curvature while a dynamic schedule's early rate motion leaves a
/// curvature transient far above the trajectory's typical slope. The
/// saturated tail (within 5% of the final value) is trimmed first so the
/// long asymptotic plateau cannot drown the pre-asymptotic window that
/// actually distinguishes the two shapes. Needs at least five samples, all
/// positive, with genuine variation; anything else is `Indeterminate`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // `!(d > 0)` must catch NaN
pub fn classify_policy<T: Scalar>(delta_trajectory: &[T]) -> PolicyClass {
    let n = delta_trajectory.len();
    if n < 5 || delta_trajectory.iter().any(|&d| !(d > T::zero()) || !d.is_finite()) {
        return PolicyClass::Indeterminate;
    }
    let y: Vec<T> = delta_trajectory.iter().map(|&d| d.ln()).collect();
    let range = |s: &[T]| {
        let mut lo = T::infinity();
        let mut hi = -T::infinity();
        for &v in s {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        hi - lo
    };
    let full = range(&y);
    if full < T::c(1e-9) {
        return PolicyClass::Indeterminate;
    }

    // trim the saturated tail
    let last = y[n - 1];
    let mut w = n;
    while w > 5 && (y[w - 2] - last).abs() < T::c(0.05) * full {
        w -= 1;
    }

    let d1: Vec<T> = y[..w].windows(2).map(|p| p[1] - p[0]).collect();
    let d2: Vec<T> = d1.windows(2).map(|p| p[1] - p[0]).collect();
    let scale = range(&y[..w]);
    if scale < T::c(1e-9) {
        return PolicyClass::Indeterminate;
    }

    let mut abs_d1: Vec<T> = d1.iter().map(|v| v.abs()).collect();
    let slope = median(&mut abs_d1);
    let head = (d2.len() / 10).max(3).min(d2.len());
    let transient =
        d2[..head].iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));

    if transient > T::c(3.0) * slope.max(T::c(1e-12)) {
        return PolicyClass::Dynamic;
    }
    let eps = T::c(1e-3) * scale;
    let pos = d2.iter().filter(|&&v| v > eps).count();
    let neg = d2.iter().filter(|&&v| v < -eps).count();
    if pos == 0 || neg >= 9 * pos {
        PolicyClass::Static
    } else {
        PolicyClass::Indeterminate
    }
}

/// Re-fit a policy outcome's total activity with the response function at
/// unit periods, attaching and returning the result.
pub fn effective_fit<T: Scalar>(outcome: &mut PolicyOutcome<T>) -> Result<FitResult<T>> {
    let values: Vec<T> =
        outcome.w.iter().copied().step_by(outcome.unit_stride()).collect();
    let segment = SeriesSegment::new(values, 0, PeriodUnit::Year, "policy");
    let fit = fit_episode(&segment, &FitOptions::default())?;
    outcome.effective_fit = Some(fit.clone());
    Ok(fit)
}
