//! Bounded nonlinear least squares for the response function, plus the
//! residual statistics used in fit tables (SRS, SRM, RSRS, RSRM).
//!
//! The optimizer is a small damped (Levenberg–Marquardt style) Gauss–Newton
//! loop with the analytic Jacobian from [`ResponseParams::gradient`], box
//! constraints handled by projection, and a MINPACK-style scaled-gradient
//! certificate. Three free parameters by default — `w0` is pinned to the
//! first observation, since the level at the shock time is observed, not
//! inferred — with an opt-in fourth when the first observation is noisy.

use crate::error::{Error, Result};
use crate::response::ResponseParams;
use crate::rng::Gaussian;
use crate::scalar::Scalar;
use crate::series::SeriesSegment;

/// Lower positivity floor for a freed `w0`; far below any sanely scaled
/// series, it only keeps the parameter out of zero.
const W0_MIN: f64 = 1e-12;

/// Knobs for [`fit_episode`] / [`fit_with_restarts`].
#[derive(Debug, Clone)]
pub struct FitOptions<T> {
    /// Fit `w0` as a fourth parameter instead of pinning it to the first
    /// observation. Off by default.
    pub free_w0: bool,
    /// Iteration cap; exceeding it raises [`Error::NonConvergence`].
    pub max_iter: usize,
    /// Gradient tolerance of the convergence certificate: a free parameter
    /// passes when `|g_i| <= grad_tol` or `|g_i| <= grad_tol * ||J_i|| * ||r||`.
    pub grad_tol: T,
    /// Seed for the perturbed initializations of [`fit_with_restarts`].
    pub restart_seed: u64,
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        Self { free_w0: false, max_iter: 500, grad_tol: T::c(1e-10), restart_seed: 99 }
    }
}

/// The four residual statistics over one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStats<T> {
    /// Sum of squared residuals, `sum (d_t - m_t)^2`.
    pub srs: T,
    /// `srs / n`.
    pub srm: T,
    /// Sum of squared relative residuals in percent, `sum (100 (d_t - m_t) / m_t)^2`.
    pub rsrs: T,
    /// `rsrs / n`.
    pub rsrm: T,
}

/// Compute the residual statistics of `params` against a segment.
///
/// Model values are evaluated at the segment's global period indices, so
/// `params.t0` must be expressed on the same axis (fits produced by this
/// module always are). Relative residuals are percentages of the *model*
/// value; on series normalized to 100 at the segment start this matches the
/// usual fit-table convention.
pub fn residual_stats<T: Scalar>(
    segment: &SeriesSegment<T>,
    params: &ResponseParams<T>,
) -> ResidualStats<T> {
    let hundred = T::c(100.0);
    let mut srs = T::zero();
    let mut rsrs = T::zero();
    for (i, &d) in segment.values.iter().enumerate() {
        let m = params.evaluate(T::from_count(segment.period(i)));
        let r = d - m;
        srs = srs + r * r;
        let rel = hundred * r / m;
        rsrs = rsrs + rel * rel;
    }
    let n = T::from_count(segment.len());
    ResidualStats { srs, srm: srs / n, rsrs, rsrm: rsrs / n }
}

/// Outcome of one least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    /// Canonicalized minimizer (`lambda_plus >= lambda_minus`).
    pub params: ResponseParams<T>,
    /// Gauss–Newton standard errors for `(f, lambda_plus, lambda_minus, w0)`;
    /// a pinned `w0` reports zero, an unidentifiable direction infinity.
    pub std_errors: [T; 4],
    pub srs: T,
    pub srm: T,
    pub rsrs: T,
    pub rsrm: T,
    /// Observation count.
    pub n: usize,
    /// True when the gradient certificate was met or the step/objective
    /// reached the numerical floor; false when the optimizer stalled without
    /// either (result still usable, treat with care).
    pub converged: bool,
    /// Names of parameters within 1e-9 of a box bound.
    pub boundary_hit: Vec<&'static str>,
}

/// Fit one episode from the built-in initialization heuristic.
///
/// Minimizes `sum_t (value_t - W(t))^2` subject to `f in [0, 1]`,
/// `lambda_minus in [-1, 0]`, `lambda_plus in [-1, 1]`, `w0 > 0`.
/// The lower rate bound of -1/period mirrors the saturation visible in
/// published fit tables (`e^{lambda_minus} = 0.367`); hits are reported via
/// `boundary_hit`, never silently absorbed.
pub fn fit_episode<T: Scalar>(
    segment: &SeriesSegment<T>,
    options: &FitOptions<T>,
) -> Result<FitResult<T>> {
    segment.validate_for_fit()?;
    fit_from_init(segment, options, heuristic_init(segment))
}

/// Best-of-`k` fits from perturbed initializations (multistart).
///
/// Start 0 is the plain heuristic; the remaining `k - 1` jitter it through a
/// ChaCha8 stream seeded by `options.restart_seed`, so results are
/// deterministic. The lowest-srs successful fit wins; errors propagate only
/// when every start fails.
pub fn fit_with_restarts<T: Scalar>(
    segment: &SeriesSegment<T>,
    k: usize,
    options: &FitOptions<T>,
) -> Result<FitResult<T>> {
    segment.validate_for_fit()?;
    let base = heuristic_init(segment);
    let mut rng = Gaussian::seeded(options.restart_seed);
    let mut best: Option<FitResult<T>> = None;
    let mut last_err = None;
    for start in 0..k.max(1) {
        let init = if start == 0 {
            base
        } else {
            let zf = rng.normal();
            let zp = rng.normal();
            let zm = rng.normal();
            [
                clamp(base[0] + T::c(0.3 * zf), T::c(0.01), T::c(0.99)),
                clamp(base[1] * T::c((0.5 * zp).exp()), T::c(1e-6), T::one()),
                clamp(base[2] * T::c((0.5 * zm).exp()), -T::one(), T::c(-1e-6)),
            ]
        };
        match fit_from_init(segment, options, init) {
            Ok(fit) => {
                if best.as_ref().is_none_or(|b| fit.srs < b.srs) {
                    best = Some(fit);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.expect("no fit attempted"))
}

/// Heuristic starting point: decay rate from the log-slope of the first two
/// points, growth rate from the last two, `f` from requiring the curve to
/// pass near the final point. Rates are nudged off zero so no Jacobian
/// column starts degenerate.
fn heuristic_init<T: Scalar>(segment: &SeriesSegment<T>) -> [T; 3] {
    let v = &segment.values;
    let n = v.len();
    let lm0 = clamp((v[1] / v[0]).ln(), -T::one(), T::c(-1e-6));
    let lp0 = clamp((v[n - 1] / v[n - 2]).ln(), T::c(1e-6), T::one());
    let span = T::from_count(n - 1);
    let em = (lm0 * span).exp();
    let ep = (lp0 * span).exp();
    let denom = ep - em;
    let f0 = if denom.abs() > T::c(1e-12) {
        clamp((v[n - 1] / v[0] - em) / denom, T::c(0.01), T::c(0.99))
    } else {
        T::c(0.5)
    };
    [f0, lp0, lm0]
}

fn clamp<T: Scalar>(x: T, lo: T, hi: T) -> T {
    x.max(lo).min(hi)
}

/// Least-squares problem over one segment: parameter vector
/// `[f, lambda_plus, lambda_minus(, w0)]`, model time on the global period
/// axis with `t0` at the segment start.
struct Lsq<'a, T> {
    segment: &'a SeriesSegment<T>,
    t0: T,
    w0_fixed: Option<T>,
    p: usize,
}

impl<'a, T: Scalar> Lsq<'a, T> {
    fn params_of(&self, th: &[T; 4]) -> ResponseParams<T> {
        ResponseParams::new(th[0], th[1], th[2], self.w0_fixed.unwrap_or(th[3]), self.t0)
    }

    /// srs, gradient `J^T r`, and normal matrix `J^T J` at `th`.
    #[allow(clippy::needless_range_loop)] // triangular index ranges
    fn normal_eqs(&self, th: &[T; 4]) -> (T, [T; 4], [[T; 4]; 4]) {
        let params = self.params_of(th);
        let mut srs = T::zero();
        let mut g = [T::zero(); 4];
        let mut h = [[T::zero(); 4]; 4];
        for (i, &d) in self.segment.values.iter().enumerate() {
            let t = T::from_count(self.segment.period(i));
            let r = params.evaluate(t) - d;
            let row = params.gradient(t);
            srs = srs + r * r;
            for j in 0..self.p {
                g[j] = g[j] + row[j] * r;
                for k in j..self.p {
                    h[j][k] = h[j][k] + row[j] * row[k];
                }
            }
        }
        for j in 0..self.p {
            for k in 0..j {
                h[j][k] = h[k][j];
            }
        }
        (srs, g, h)
    }
}

/// Solve the p×p system `a x = b` by Gaussian elimination with partial
/// pivoting; `None` when a pivot collapses (singular normal equations).
#[allow(clippy::needless_range_loop)] // row/column elimination wants indices
fn solve<T: Scalar>(mut a: [[T; 4]; 4], mut b: [T; 4], p: usize) -> Option<[T; 4]> {
    let tiny = T::min_positive_value().sqrt();
    for col in 0..p {
        let mut piv = col;
        for row in col + 1..p {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col].abs() < tiny {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..p {
            let m = a[row][col] / a[col][col];
            for k in col..p {
                a[row][k] = a[row][k] - m * a[col][k];
            }
            b[row] = b[row] - m * b[col];
        }
    }
    let mut x = [T::zero(); 4];
    for col in (0..p).rev() {
        let mut s = b[col];
        for k in col + 1..p {
            s = s - a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    if x[..p].iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

fn bounds<T: Scalar>() -> ([T; 4], [T; 4]) {
    (
        [T::zero(), -T::one(), -T::one(), T::c(W0_MIN)],
        [T::one(), T::one(), T::zero(), T::infinity()],
    )
}

fn project<T: Scalar>(th: &mut [T; 4], p: usize) {
    let (lo, hi) = bounds::<T>();
    for i in 0..p {
        th[i] = clamp(th[i], lo[i], hi[i]);
    }
}

/// Per-component convergence certificate: a free component passes when its
/// gradient is below `grad_tol` absolutely, or below `grad_tol` relative to
/// `||J_col|| * ||r||` (the MINPACK cosine measure). Components pinned at a
/// bound with an outward-pushing gradient are excluded.
fn certified<T: Scalar>(th: &[T; 4], g: &[T; 4], h: &[[T; 4]; 4], srs: T, p: usize, tol: T) -> bool {
    let (lo, hi) = bounds::<T>();
    let rnorm = srs.max(T::zero()).sqrt();
    for i in 0..p {
        let pinned = (th[i] <= lo[i] && g[i] > T::zero()) || (th[i] >= hi[i] && g[i] < T::zero());
        if pinned {
            continue;
        }
        let gi = g[i].abs();
        if gi > tol && gi > tol * h[i][i].max(T::zero()).sqrt() * rnorm {
            return false;
        }
    }
    true
}

fn projected_grad_inf<T: Scalar>(th: &[T; 4], g: &[T; 4], p: usize) -> T {
    let (lo, hi) = bounds::<T>();
    let mut m = T::zero();
    for i in 0..p {
        let pinned = (th[i] <= lo[i] && g[i] > T::zero()) || (th[i] >= hi[i] && g[i] < T::zero());
        if !pinned {
            m = m.max(g[i].abs());
        }
    }
    m
}

#[allow(clippy::needless_range_loop)] // diagonal scans want indices
fn fit_from_init<T: Scalar>(
    segment: &SeriesSegment<T>,
    options: &FitOptions<T>,
    init: [T; 3],
) -> Result<FitResult<T>> {
    let p = if options.free_w0 { 4 } else { 3 };
    let lsq = Lsq {
        segment,
        t0: T::from_count(segment.start_index),
        w0_fixed: (!options.free_w0).then(|| segment.values[0]),
        p,
    };

    let mut th = [init[0], init[1], init[2], segment.values[0]];
    project(&mut th, p);
    let (mut srs, mut g, mut h) = lsq.normal_eqs(&th);
    if !srs.is_finite() {
        return Err(Error::DegenerateSegment("non-finite objective at start".into()));
    }

    let max_diag = {
        let mut m = T::zero();
        for i in 0..p {
            m = m.max(h[i][i]);
        }
        m.max(T::min_positive_value())
    };
    // damping is relative to the normal-matrix diagonal (Marquardt scaling),
    // so mu is dimensionless: 1e-3 starts one step shy of pure Gauss-Newton
    let mut mu = T::c(1e-3);
    let diag_floor = T::c(1e-12) * max_diag;

    let mut iterations = 0usize;
    let converged;
    let mut ever_accepted = false;
    loop {
        if certified(&th, &g, &h, srs, p, options.grad_tol) {
            converged = true;
            break;
        }
        if iterations >= options.max_iter {
            return Err(Error::NonConvergence {
                iterations,
                grad_norm: projected_grad_inf(&th, &g, p).to_f64().unwrap_or(f64::NAN),
            });
        }
        // components pinned at a bound with an outward gradient sit out this
        // iteration; stepping only the free subspace keeps the iterate from
        // grinding along a face it should leave alone
        let (lo, hi) = bounds::<T>();
        let free: Vec<usize> = (0..p)
            .filter(|&i| {
                !((th[i] <= lo[i] && g[i] > T::zero())
                    || (th[i] >= hi[i] && g[i] < T::zero()))
            })
            .collect();
        let nf = free.len();

        let mut accepted = false;
        let mut at_floor = false;
        for _ in 0..70 {
            let mut a = [[T::zero(); 4]; 4];
            let mut rhs = [T::zero(); 4];
            for (r, &i) in free.iter().enumerate() {
                for (c, &j) in free.iter().enumerate() {
                    a[r][c] = h[i][j];
                }
                a[r][r] = a[r][r] + mu * h[i][i].max(diag_floor);
                rhs[r] = -g[i];
            }
            if let Some(step) = solve(a, rhs, nf) {
                let mut delta = [T::zero(); 4];
                for (r, &i) in free.iter().enumerate() {
                    delta[i] = step[r];
                }
                // crude trust region: overlong steps keep their direction
                // but not their length (caps are relative so a freed w0 at
                // its natural O(100) scale is not strangled)
                let mut shrink = T::one();
                for i in 0..p {
                    let cap = T::c(0.25) * (T::one() + th[i].abs());
                    if delta[i].abs() > cap {
                        shrink = shrink.min(cap / delta[i].abs());
                    }
                }
                if shrink < T::one() {
                    for d in &mut delta {
                        *d = *d * shrink;
                    }
                }
                let mut cand = th;
                for i in 0..p {
                    cand[i] = th[i] + delta[i];
                }
                project(&mut cand, p);
                let moved = (0..p).any(|i| cand[i] != th[i]);
                if moved {
                    let (srs_c, g_c, h_c) = lsq.normal_eqs(&cand);
                    if srs_c.is_finite() && srs_c < srs {
                        let improvement = (srs - srs_c) / srs.max(T::min_positive_value());
                        let mut step_inf = T::zero();
                        let mut th_inf = T::zero();
                        for i in 0..p {
                            step_inf = step_inf.max((cand[i] - th[i]).abs());
                            th_inf = th_inf.max(th[i].abs());
                        }
                        th = cand;
                        srs = srs_c;
                        g = g_c;
                        h = h_c;
                        mu = mu / T::c(3.0);
                        accepted = true;
                        ever_accepted = true;
                        if improvement <= T::c(1e-15)
                            && step_inf <= T::c(1e-12) * (T::one() + th_inf)
                        {
                            at_floor = true;
                        }
                        break;
                    }
                }
            }
            mu = mu * T::c(4.0);
            if mu > T::c(1e120) {
                break;
            }
        }
        if at_floor {
            converged = true;
            break;
        }
        if !accepted {
            // no damping level yields an improving feasible step: the
            // objective is at its numerical floor (converged if we ever
            // moved; a stall straight from the start is flagged instead)
            converged = ever_accepted;
            break;
        }
        iterations += 1;
    }

    Ok(assemble(&lsq, segment, options, th, srs, &h, converged))
}

fn assemble<T: Scalar>(
    lsq: &Lsq<'_, T>,
    segment: &SeriesSegment<T>,
    options: &FitOptions<T>,
    th: [T; 4],
    srs: T,
    h: &[[T; 4]; 4],
    converged: bool,
) -> FitResult<T> {
    let p = lsq.p;
    let n = segment.len();

    // Gauss-Newton covariance: srs / (n - p) * (J^T J)^-1
    let sigma2 = if n > p {
        srs / T::from_count(n - p)
    } else {
        T::infinity()
    };
    let mut sig = [T::infinity(); 4];
    for i in 0..p {
        let mut e = [T::zero(); 4];
        e[i] = T::one();
        sig[i] = match solve(*h, e, p) {
            Some(col) => (sigma2 * col[i].max(T::zero())).sqrt(),
            None => T::infinity(),
        };
    }
    let mut std_errors = if options.free_w0 {
        [sig[0], sig[1], sig[2], sig[3]]
    } else {
        [sig[0], sig[1], sig[2], T::zero()]
    };

    let mut params = lsq.params_of(&th);
    if params.lambda_plus < params.lambda_minus {
        params = params.canonicalize();
        std_errors.swap(1, 2);
    }

    let tol = T::c(1e-9);
    let mut boundary_hit = Vec::new();
    let near = |x: T, b: T| (x - b).abs() <= tol;
    if near(params.f, T::zero()) || near(params.f, T::one()) {
        boundary_hit.push("f");
    }
    if near(params.lambda_plus, -T::one()) || near(params.lambda_plus, T::one()) {
        boundary_hit.push("lambda_plus");
    }
    if near(params.lambda_minus, -T::one()) || near(params.lambda_minus, T::zero()) {
        boundary_hit.push("lambda_minus");
    }
    if options.free_w0 && near(params.w0, T::c(W0_MIN)) {
        boundary_hit.push("w0");
    }

    let stats = residual_stats(segment, &params);
    FitResult {
        params,
        std_errors,
        srs: stats.srs,
        srm: stats.srm,
        rsrs: stats.rsrs,
        rsrm: stats.rsrm,
        n,
        converged,
        boundary_hit,
    }
}
