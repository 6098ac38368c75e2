//! Shock detection through prediction-horizon saturation.
//!
//! Fit the curve on the first `t0` points only, then ask how far ahead the
//! fit keeps predicting the series within a relative tolerance `p`. As `t0`
//! sweeps forward, that horizon `t_pred(t0)` plateaus just below a structural
//! break: fits from many different `t0` all fail at the same future period.
//! A sufficiently long plateau is called a shock, and the series is split
//! into episodes at the accepted shock times.

use crate::error::{Error, Result};
use crate::fit::{fit_episode, fit_with_restarts, FitOptions, FitResult};
use crate::scalar::Scalar;
use crate::series::SeriesSegment;

/// In-sample fits behind horizons use a small multistart: prefixes can be
/// short and ambiguous, and a rogue local minimum here would poison the
/// plateau statistics.
const HORIZON_RESTARTS: usize = 5;

/// The map `t0 -> t_pred(t0)` over a range of fit cutoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonCurve<T> {
    /// Relative prediction tolerance used throughout.
    pub tolerance_p: T,
    /// `(t0, t_pred)` pairs for every cutoff whose prefix fit succeeded.
    pub points: Vec<(usize, usize)>,
    /// Cutoffs whose prefix fit failed (too degenerate to converge); these
    /// simply contribute no plateau evidence.
    pub failed_t0: Vec<usize>,
    /// Length of the underlying series; `t_pred` equal to this means the fit
    /// predicted acceptably to the end.
    pub series_length: usize,
}

/// Accepted shocks plus the episode partition they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockReport<T> {
    /// `(time, support)` per accepted shock, ascending in time. Support is
    /// the length of the longest consecutive run of cutoffs whose horizons
    /// pin this time.
    pub shocks: Vec<(usize, usize)>,
    pub tolerance_p: T,
    /// Half-open `[start, end)` index ranges tiling the whole series, split
    /// at the shock times.
    pub episodes: Vec<(usize, usize)>,
}

/// One episode's fit from [`segment_and_fit`]. The fit is kept as a `Result`
/// so a single degenerate episode (too short after splitting, say) does not
/// hide the successful ones.
#[derive(Debug)]
pub struct EpisodeFit<T> {
    pub start: usize,
    pub end: usize,
    pub fit: Result<FitResult<T>>,
}

/// Prediction horizon of the fit on `series[..t0]`: the smallest index
/// `t >= t0` where the out-of-sample relative error `|value_t - W(t)| /
/// value_t` exceeds `p`, or the series length when no such index exists.
///
/// Needs `4 <= t0 <= len` (four points is the smallest fittable prefix).
pub fn prediction_horizon<T: Scalar>(
    series: &SeriesSegment<T>,
    t0: usize,
    p: T,
) -> Result<usize> {
    if t0 < 4 || t0 > series.len() {
        return Err(Error::DegenerateSegment(format!(
            "prediction horizon needs 4 <= t0 <= {}, got {}",
            series.len(),
            t0
        )));
    }
    let prefix = series.sub_segment(0, t0);
    let fit = fit_with_restarts(&prefix, HORIZON_RESTARTS, &FitOptions::default())?;
    for t in t0..series.len() {
        let observed = series.values[t];
        let predicted = fit.params.evaluate(T::from_count(series.period(t)));
        if ((observed - predicted) / observed).abs() > p {
            return Ok(t);
        }
    }
    Ok(series.len())
}

/// Sweep [`prediction_horizon`] over a range of cutoffs. Cutoffs whose
/// prefix fit fails are recorded in `failed_t0` rather than aborting the
/// sweep.
pub fn horizon_curve<T: Scalar>(
    series: &SeriesSegment<T>,
    p: T,
    t0_range: std::ops::Range<usize>,
) -> HorizonCurve<T> {
    let mut points = Vec::new();
    let mut failed_t0 = Vec::new();
    for t0 in t0_range {
        match prediction_horizon(series, t0, p) {
            Ok(tp) => points.push((t0, tp)),
            Err(_) => failed_t0.push(t0),
        }
    }
    HorizonCurve { tolerance_p: p, points, failed_t0, series_length: series.len() }
}

/// Detect shocks from horizon plateaus.
///
/// A candidate time `v` is every horizon value below the series length. Its
/// support is the longest consecutive run of successful cutoffs `t0 <= v`
/// whose horizon lands within one period of `v` and at least three periods
/// past `t0` (shallow horizons say "the fit is bad", not "there is a break
/// at v"). Candidates with support below `min_support` are dropped; the
/// rest are accepted greedily by decreasing support, skipping times within
/// two periods of an already-accepted shock. A candidate whose supporting
/// run straddles an earlier accepted shock is re-scored using only cutoffs
/// after that shock, since fits spanning a break carry no evidence about
/// later ones.
///
/// Sensible defaults are `p = 0.02` and `min_support = 3`; raise
/// `min_support` on long, noisy series to suppress coincidental plateaus.
pub fn detect_shocks<T: Scalar>(
    series: &SeriesSegment<T>,
    p: T,
    min_support: usize,
) -> ShockReport<T> {
    let n = series.len();
    let curve = horizon_curve(series, p, 6.min(n)..n);
    let tps = &curve.points;

    // longest consecutive run of supporting cutoffs in (lo, v]
    let run_support = |v: usize, lo: usize| -> usize {
        let mut best = 0usize;
        let mut cur = 0usize;
        for &(t0, tp) in tps {
            if t0 > lo && t0 <= v && tp.abs_diff(v) <= 1 && tp >= t0 + 3 {
                cur += 1;
                best = best.max(cur);
            } else {
                cur = 0;
            }
        }
        best
    };

    let mut candidate_times: Vec<usize> =
        tps.iter().map(|&(_, tp)| tp).filter(|&tp| tp < n).collect();
    candidate_times.sort_unstable();
    candidate_times.dedup();

    let mut candidates: Vec<(usize, usize)> = candidate_times
        .into_iter()
        .filter_map(|v| {
            let s = run_support(v, 0);
            (s >= min_support).then_some((v, s))
        })
        .collect();
    candidates.sort_by_key(|&(v, s)| (std::cmp::Reverse(s), v));

    let mut accepted: Vec<(usize, usize)> = Vec::new();
    for (v, mut s) in candidates {
        if accepted.iter().any(|&(a, _)| a.abs_diff(v) <= 2) {
            continue;
        }
        if let Some(lo) = accepted.iter().map(|&(a, _)| a).filter(|&a| a < v).max() {
            s = run_support(v, lo);
            if s < min_support {
                continue;
            }
        }
        accepted.push((v, s));
    }
    accepted.sort_unstable();

    let mut episodes = Vec::with_capacity(accepted.len() + 1);
    let mut start = 0usize;
    for &(v, _) in &accepted {
        episodes.push((start, v));
        start = v;
    }
    episodes.push((start, n));

    ShockReport { shocks: accepted, tolerance_p: p, episodes }
}

/// Detect shocks, then fit each episode separately (rebasing each fit's
/// origin to the episode start).
pub fn segment_and_fit<T: Scalar>(
    series: &SeriesSegment<T>,
    p: T,
    min_support: usize,
) -> (ShockReport<T>, Vec<EpisodeFit<T>>) {
    let report = detect_shocks(series, p, min_support);
    let fits = report
        .episodes
        .iter()
        .map(|&(start, end)| EpisodeFit {
            start,
            end,
            fit: fit_episode(&series.sub_segment(start, end), &FitOptions::default()),
        })
        .collect();
    (report, fits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::ResponseParams;
    use crate::series::PeriodUnit;
    use crate::synth::{generate_piecewise, NoiseSpec};

    fn one_recession(n: usize) -> SeriesSegment<f64> {
        let p = ResponseParams::new(0.6, 0.02, -0.2, 100.0, 0.0);
        SeriesSegment::new(
            (0..n).map(|t| p.evaluate(t as f64)).collect(),
            0,
            PeriodUnit::Year,
            "clean",
        )
    }

    fn two_episode_series(seed: u64) -> SeriesSegment<f64> {
        let ep1 = ResponseParams::new(0.6, 0.02, -0.20, 100.0, 0.0);
        let ep2 = ResponseParams::new(0.6, 0.015, -0.22, 100.0, 0.0);
        generate_piecewise(&[(ep1, 40), (ep2, 40)], &NoiseSpec::new(0.005, seed))
    }

    #[test]
    fn horizons_saturate_on_a_clean_single_curve() {
        let series = one_recession(60);
        let curve = horizon_curve(&series, 0.02, 6..60);
        assert!(curve.failed_t0.is_empty());
        for &(t0, tp) in &curve.points {
            assert_eq!(tp, 60, "t0 {t0} gave horizon {tp}");
        }
    }

    #[test]
    fn no_shocks_on_a_clean_single_curve() {
        let series = one_recession(60);
        let report = detect_shocks(&series, 0.02, 3);
        assert!(report.shocks.is_empty());
        assert_eq!(report.episodes, vec![(0, 60)]);
    }

    #[test]
    fn finds_the_injected_shock_within_one_period() {
        let series = two_episode_series(0);
        let report = detect_shocks(&series, 0.02, 6);
        assert_eq!(report.shocks.len(), 1, "shocks {:?}", report.shocks);
        let (time, support) = report.shocks[0];
        assert!(time.abs_diff(40) <= 1, "time {time}");
        assert!(support >= 6);
        assert_eq!(report.episodes, vec![(0, time), (time, 80)]);
    }

    #[test]
    fn horizon_is_monotone_in_the_tolerance() {
        let series = two_episode_series(5);
        for t0 in [10, 20, 30] {
            let tight = prediction_horizon(&series, t0, 0.01).unwrap();
            let loose = prediction_horizon(&series, t0, 0.05).unwrap();
            assert!(loose >= tight, "t0 {t0}: {loose} < {tight}");
        }
    }

    #[test]
    fn horizon_rejects_too_small_cutoffs() {
        let series = one_recession(20);
        assert!(prediction_horizon(&series, 3, 0.02).is_err());
        assert!(prediction_horizon(&series, 21, 0.02).is_err());
        assert!(prediction_horizon(&series, 20, 0.02).is_ok());
    }

    #[test]
    fn episodes_tile_the_series() {
        let series = two_episode_series(1);
        let report = detect_shocks(&series, 0.02, 3);
        assert_eq!(report.episodes.first().unwrap().0, 0);
        assert_eq!(report.episodes.last().unwrap().1, series.len());
        for pair in report.episodes.windows(2) {
            assert_eq!(pair[0].1, pair[1].0);
        }
    }

    #[test]
    fn segment_and_fit_on_one_episode_matches_a_direct_fit() {
        let series = one_recession(50);
        let (report, fits) = segment_and_fit(&series, 0.02, 3);
        assert!(report.shocks.is_empty());
        assert_eq!(fits.len(), 1);
        let direct = fit_episode(&series, &FitOptions::default()).unwrap();
        let episode = fits[0].fit.as_ref().unwrap();
        assert_eq!(episode.params, direct.params);
        assert_eq!(episode.srs, direct.srs);
    }

    #[test]
    fn segment_and_fit_rebases_each_episode() {
        let series = two_episode_series(2);
        let (report, fits) = segment_and_fit(&series, 0.02, 6);
        assert_eq!(report.shocks.len(), 1);
        assert_eq!(fits.len(), 2);
        let second = fits[1].fit.as_ref().unwrap();
        // the second episode's fit is anchored at its own start period
        assert_eq!(second.params.t0, fits[1].start as f64);
        // and recovers a recession shape, not a continuation of the first
        assert!(second.params.lambda_minus < -0.05);
    }
}
