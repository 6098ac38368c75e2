//! Report assembly and rendering: one structure, two faces — tab-separated
//! tables behind a commented metadata preamble, or a single JSON object
//! mirroring the same fields.
//!
//! Numbers are printed with the shortest round-trip formatting, so emitted
//! values re-parse to identical bits and identical invocations emit
//! identical bytes.

use std::fmt::Write as _;

use serde::Serialize;

use jcurve::{FitResult, ShockReport};

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub input: String,
    /// The invocation's arguments, verbatim.
    pub options: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
    /// Raw first observation before normalization to 100, for inputs that
    /// came from a file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_first_value: Option<f64>,
}

/// One fitted episode in the fit-table column convention: period range,
/// growing fraction, per-period growth factors, residual statistics, count.
/// Rates, standard errors, and diagnostics ride along for JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct FitRow {
    pub first_period: usize,
    pub last_period: usize,
    pub f: f64,
    /// `e^{lambda_plus}`, the per-period growth factor.
    pub growth_factor_plus: f64,
    /// `e^{lambda_minus}`, the per-period decay factor.
    pub growth_factor_minus: f64,
    pub srs: f64,
    pub srm: f64,
    pub rsrs: f64,
    pub rsrm: f64,
    pub n: usize,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub w0: f64,
    /// Gauss-Newton standard errors for `(f, lambda_plus, lambda_minus, w0)`.
    pub std_errors: [f64; 4],
    pub converged: bool,
    pub boundary_hit: Vec<String>,
}

impl FitRow {
    pub fn from_fit(fit: &FitResult, first_period: usize, last_period: usize) -> Self {
        FitRow {
            first_period,
            last_period,
            f: fit.params.f,
            growth_factor_plus: fit.params.lambda_plus.exp(),
            growth_factor_minus: fit.params.lambda_minus.exp(),
            srs: fit.srs,
            srm: fit.srm,
            rsrs: fit.rsrs,
            rsrm: fit.rsrm,
            n: fit.n,
            lambda_plus: fit.params.lambda_plus,
            lambda_minus: fit.params.lambda_minus,
            w0: fit.params.w0,
            std_errors: fit.std_errors,
            converged: fit.converged,
            boundary_hit: fit.boundary_hit.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HorizonRow {
    pub t0: usize,
    pub t_pred: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct HorizonSummary {
    pub tolerance_p: f64,
    pub points: Vec<HorizonRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failed_t0: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShockRow {
    pub time: usize,
    pub support: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpisodeRow {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShockSummary {
    pub tolerance_p: f64,
    pub shocks: Vec<ShockRow>,
    /// Half-open `[start, end)` period ranges tiling the series.
    pub episodes: Vec<EpisodeRow>,
}

impl ShockSummary {
    /// Convert a shock report, shifting episode/shock indices by the
    /// series' first period so the summary speaks in period labels.
    pub fn from_report(report: &ShockReport, first_period: usize) -> Self {
        ShockSummary {
            tolerance_p: report.tolerance_p,
            shocks: report
                .shocks
                .iter()
                .map(|&(t, s)| ShockRow { time: first_period + t, support: s })
                .collect(),
            episodes: report
                .episodes
                .iter()
                .map(|&(a, b)| EpisodeRow { start: first_period + a, end: first_period + b })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub shocks: Vec<ShockRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesRow {
    pub period: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimRow {
    pub t: f64,
    pub w1: f64,
    pub w2: f64,
    pub w: f64,
    /// `w1 / w2`; absent where `w2 = 0`.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolicyRow {
    pub t: f64,
    pub beta: f64,
    pub w1: f64,
    pub w2: f64,
    pub w: f64,
    pub delta: f64,
    /// Upper envelope of the scenario grid (envelope policy only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope_w: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolicySummary {
    pub kind: String,
    pub beta_min: f64,
    pub beta_max: f64,
    pub classification: String,
    pub final_w: f64,
    /// Unit-period samples of the run.
    pub rows: Vec<PolicyRow>,
}

/// Everything one invocation reports. Sections that a subcommand does not
/// produce stay empty and are omitted from output.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub metadata: Metadata,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fits: Vec<FitRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<HorizonSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shocks: Option<ShockSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_sweep: Option<Vec<SweepRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<SeriesRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<Vec<SimRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicySummary>,
}

impl Report {
    pub fn new(metadata: Metadata) -> Self {
        Report {
            metadata,
            fits: Vec::new(),
            horizon: None,
            shocks: None,
            p_sweep: None,
            series: None,
            simulation: None,
            policy: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Tab tables with a commented preamble; `#` lines are metadata and
    /// section markers, so the payload stays plot-tool friendly.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let m = &self.metadata;
        let _ = writeln!(s, "# input: {}", m.input);
        let _ = writeln!(s, "# options: {}", m.options);
        if let Some(seed) = m.seed {
            let _ = writeln!(s, "# seed: {seed}");
        }
        if let Some(raw) = m.raw_first_value {
            let _ = writeln!(s, "# scale: first raw value {raw}");
        }
        let _ = writeln!(s, "# version: {}", m.version);

        if let Some(h) = &self.horizon {
            let _ = writeln!(s, "\n# horizon (p = {})", h.tolerance_p);
            if !h.failed_t0.is_empty() {
                let list: Vec<String> =
                    h.failed_t0.iter().map(|t| t.to_string()).collect();
                let _ = writeln!(s, "# failed t0: {}", list.join(", "));
            }
            let _ = writeln!(s, "t0\tt_pred");
            for r in &h.points {
                let _ = writeln!(s, "{}\t{}", r.t0, r.t_pred);
            }
        }
        if let Some(sh) = &self.shocks {
            let _ = writeln!(s, "\n# shocks (p = {})", sh.tolerance_p);
            let _ = writeln!(s, "time\tsupport");
            for r in &sh.shocks {
                let _ = writeln!(s, "{}\t{}", r.time, r.support);
            }
            let _ = writeln!(s, "\n# episodes");
            let _ = writeln!(s, "start\tend");
            for r in &sh.episodes {
                let _ = writeln!(s, "{}\t{}", r.start, r.end);
            }
        }
        if let Some(sweep) = &self.p_sweep {
            let _ = writeln!(s, "\n# p-sweep");
            let _ = writeln!(s, "p\tshocks");
            for r in sweep {
                let times: Vec<String> =
                    r.shocks.iter().map(|x| x.time.to_string()).collect();
                let _ = writeln!(s, "{}\t{}", r.p, times.join(","));
            }
        }
        if let Some(series) = &self.series {
            let _ = writeln!(s, "\n# series");
            let _ = writeln!(s, "period\tvalue");
            for r in series {
                let _ = writeln!(s, "{}\t{}", r.period, r.value);
            }
        }
        if let Some(sim) = &self.simulation {
            let _ = writeln!(s, "\n# trajectory");
            let _ = writeln!(s, "t\tw1\tw2\tW\tdelta");
            for r in sim {
                let delta =
                    r.delta.map_or_else(|| "nan".to_string(), |d| d.to_string());
                let _ = writeln!(s, "{}\t{}\t{}\t{}\t{delta}", r.t, r.w1, r.w2, r.w);
            }
        }
        if let Some(p) = &self.policy {
            let _ = writeln!(s, "\n# policy: {}", p.kind);
            let _ = writeln!(s, "# beta range: [{}, {}]", p.beta_min, p.beta_max);
            let _ = writeln!(s, "# classification: {}", p.classification);
            let _ = writeln!(s, "# final W: {}", p.final_w);
            let with_envelope = p.rows.iter().any(|r| r.envelope_w.is_some());
            let _ = writeln!(s, "\n# trajectory (unit periods)");
            if with_envelope {
                let _ = writeln!(s, "t\tbeta\tw1\tw2\tW\tdelta\tenvelope_W");
            } else {
                let _ = writeln!(s, "t\tbeta\tw1\tw2\tW\tdelta");
            }
            for r in &p.rows {
                let _ = write!(
                    s,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    r.t, r.beta, r.w1, r.w2, r.w, r.delta
                );
                if let Some(e) = r.envelope_w {
                    let _ = write!(s, "\t{e}");
                }
                let _ = writeln!(s);
            }
        }
        if !self.fits.is_empty() {
            let _ = writeln!(s, "\n# fit");
            let _ = writeln!(
                s,
                "first_period\tlast_period\tf\texp_lambda_plus\texp_lambda_minus\tsrs\tsrm\trsrs\trsrm\tn"
            );
            for r in &self.fits {
                let _ = writeln!(
                    s,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.first_period,
                    r.last_period,
                    r.f,
                    r.growth_factor_plus,
                    r.growth_factor_minus,
                    r.srs,
                    r.srm,
                    r.rsrs,
                    r.rsrm,
                    r.n
                );
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> Metadata {
        Metadata {
            input: "x.csv".into(),
            options: "fit x.csv".into(),
            seed: None,
            version: "0.0.0".into(),
            raw_first_value: None,
        }
    }

    #[test]
    fn fit_table_has_the_appendix_column_order() {
        let mut report = Report::new(meta());
        report.fits.push(FitRow {
            first_period: 1990,
            last_period: 2006,
            f: 0.75,
            growth_factor_plus: 1.0126,
            growth_factor_minus: 0.845,
            srs: 1.5,
            srm: 0.125,
            rsrs: 2.0,
            rsrm: 0.5,
            n: 17,
            lambda_plus: 0.0125,
            lambda_minus: -0.169,
            w0: 100.0,
            std_errors: [0.0; 4],
            converged: true,
            boundary_hit: vec![],
        });
        let table = report.to_table();
        assert!(table.contains(
            "first_period\tlast_period\tf\texp_lambda_plus\texp_lambda_minus\tsrs\tsrm\trsrs\trsrm\tn"
        ));
        assert!(table.contains("1990\t2006\t0.75\t1.0126\t0.845\t1.5\t0.125\t2\t0.5\t17"));
    }

    #[test]
    fn json_omits_empty_sections() {
        let report = Report::new(meta());
        let json = report.to_json();
        assert!(json.contains("\"metadata\""));
        assert!(!json.contains("\"fits\""));
        assert!(!json.contains("\"policy\""));
    }

    #[test]
    fn table_rendering_is_deterministic() {
        let mut report = Report::new(meta());
        report.simulation = Some(vec![SimRow {
            t: 0.5,
            w1: 0.1,
            w2: 0.9,
            w: 1.0,
            delta: Some(0.1 / 0.9),
        }]);
        assert_eq!(report.to_table(), report.to_table());
        assert_eq!(report.to_json(), report.to_json());
    }
}
