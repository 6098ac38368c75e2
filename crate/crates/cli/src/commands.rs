//! Argument definitions and the command dispatcher.
//!
//! Every subcommand assembles a [`Report`] and hands back the rendered
//! payload; `main` decides where the bytes go. Validation that would
//! otherwise trip a library `assert!` happens here and surfaces as a usage
//! error instead of a panic.

// Guards are written `!(x > 0.0)` rather than `x <= 0.0` so NaN arguments
// fail validation instead of slipping through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use jcurve::fit::fit_with_restarts;
use jcurve::policy::{
    classify_policy, effective_fit, envelope_policy, log_beta_grid, optimal_policy,
    static_sweep,
};
use jcurve::sector::integrate_const;
use jcurve::shock::{detect_shocks, horizon_curve, segment_and_fit};
use jcurve::synth::{generate, generate_piecewise};
use jcurve::{
    FitOptions, NoiseSpec, PeriodUnit, PolicyOutcome, ResponseParams, SectorParams,
    SectorState, SeriesSegment,
};

use crate::error::CliError;
use crate::ingest::{ingest, RawScale, SeriesFile};
use crate::report::{
    FitRow, HorizonRow, HorizonSummary, Metadata, PolicyRow, PolicySummary, Report,
    SeriesRow, ShockRow, ShockSummary, SimRow, SweepRow,
};

#[derive(Debug, Parser)]
#[command(
    name = "jcurve",
    version,
    about = "Recession-recovery response curves: fit GDP episodes, detect shocks, \
             and explore two-sector transfer policies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the payload to a file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Emit one JSON object instead of tab-separated tables.
    #[arg(long, global = true)]
    pub json: bool,

    /// Seed for the command's stochastic part (noise for `synth`, restart
    /// jitter for `fit`). Commands are deterministic either way.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the two-exponential response function to a series.
    Fit(FitCmd),
    /// Map prediction horizons and report detected shocks.
    Detect(DetectCmd),
    /// Split a series at detected shocks and fit each episode.
    Segment(SegmentCmd),
    /// Generate a synthetic series, optionally with an injected shock.
    Synth(SynthCmd),
    /// Integrate the two-sector transfer model.
    Simulate(SimulateCmd),
    /// Run a transfer-rate policy and re-fit its effective response.
    #[command(subcommand)]
    Policy(PolicyCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Unit {
    Year,
    Quarter,
}

impl From<Unit> for PeriodUnit {
    fn from(u: Unit) -> PeriodUnit {
        match u {
            Unit::Year => PeriodUnit::Year,
            Unit::Quarter => PeriodUnit::Quarter,
        }
    }
}

/// CSV input arguments shared by the file-reading subcommands.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file with a header and one period column plus one value column.
    pub file: PathBuf,

    /// Name of the period column.
    #[arg(long, default_value = "period")]
    pub period_column: String,

    /// Name of the value column.
    #[arg(long, default_value = "value")]
    pub value_column: String,

    /// Period unit (metadata only; the math is per period either way).
    #[arg(long, value_enum, default_value_t = Unit::Year)]
    pub unit: Unit,
}

impl InputArgs {
    fn series_file(&self) -> SeriesFile {
        SeriesFile {
            path: self.file.clone(),
            period_column: self.period_column.clone(),
            value_column: self.value_column.clone(),
            period_unit: self.unit.into(),
        }
    }
}

#[derive(Debug, Args)]
pub struct FitCmd {
    #[command(flatten)]
    pub input: InputArgs,

    /// First period of the fit window (defaults to the start of the data).
    #[arg(long)]
    pub from: Option<usize>,

    /// Last period of the fit window, inclusive (defaults to the end).
    #[arg(long)]
    pub to: Option<usize>,

    /// Fit w0 as a fourth parameter instead of pinning it to the first
    /// observation.
    #[arg(long)]
    pub free_w0: bool,

    /// Number of optimizer starts (1 = heuristic start only).
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
}

#[derive(Debug, Args)]
pub struct DetectCmd {
    #[command(flatten)]
    pub input: InputArgs,

    /// Relative prediction tolerance (0 < p < 1).
    #[arg(long)]
    pub p: f64,

    /// Minimum plateau support for an accepted shock.
    #[arg(long, default_value_t = 3)]
    pub min_support: usize,

    /// Also report shocks across a tolerance sweep, as LO:HI:STEP.
    #[arg(long, value_name = "LO:HI:STEP")]
    pub p_sweep: Option<String>,
}

#[derive(Debug, Args)]
pub struct SegmentCmd {
    #[command(flatten)]
    pub input: InputArgs,

    /// Relative prediction tolerance (0 < p < 1).
    #[arg(long)]
    pub p: f64,

    /// Minimum plateau support for an accepted shock.
    #[arg(long, default_value_t = 3)]
    pub min_support: usize,
}

#[derive(Debug, Args)]
pub struct SynthCmd {
    /// Growing fraction f of the response.
    #[arg(long)]
    pub f: f64,

    /// Growth rate lambda_plus.
    #[arg(long, allow_negative_numbers = true)]
    pub lp: f64,

    /// Decay rate lambda_minus.
    #[arg(long, allow_negative_numbers = true)]
    pub lm: f64,

    /// Multiplicative noise amplitude.
    #[arg(long)]
    pub nu: f64,

    /// Series length.
    #[arg(long)]
    pub n: usize,

    /// Initial level.
    #[arg(long, default_value_t = 100.0)]
    pub w0: f64,

    /// Inject a second episode starting at this period.
    #[arg(long)]
    pub shock_at: Option<usize>,

    /// Second episode's f (defaults to --f).
    #[arg(long, requires = "shock_at")]
    pub f2: Option<f64>,

    /// Second episode's lambda_plus (defaults to --lp).
    #[arg(long, requires = "shock_at", allow_negative_numbers = true)]
    pub lp2: Option<f64>,

    /// Second episode's lambda_minus (defaults to --lm).
    #[arg(long, requires = "shock_at", allow_negative_numbers = true)]
    pub lm2: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateCmd {
    /// Growth rate of the modern sector.
    #[arg(long, allow_negative_numbers = true)]
    pub a1: f64,

    /// Growth rate of the legacy sector.
    #[arg(long, allow_negative_numbers = true)]
    pub a2: f64,

    /// Constant transfer rate.
    #[arg(long)]
    pub beta: f64,

    /// Initial modern-sector activity.
    #[arg(long)]
    pub w1: f64,

    /// Initial legacy-sector activity.
    #[arg(long)]
    pub w2: f64,

    /// Horizon length.
    #[arg(long = "T")]
    pub t_end: f64,

    /// Integration step.
    #[arg(long)]
    pub dt: f64,
}

/// Sector setup shared by the policy subcommands.
#[derive(Debug, Args)]
pub struct SectorArgs {
    /// Growth rate of the modern sector.
    #[arg(long, allow_negative_numbers = true)]
    pub a1: f64,

    /// Growth rate of the legacy sector.
    #[arg(long, allow_negative_numbers = true)]
    pub a2: f64,

    /// Initial modern-sector activity.
    #[arg(long)]
    pub w1: f64,

    /// Initial legacy-sector activity.
    #[arg(long)]
    pub w2: f64,

    /// Horizon length.
    #[arg(long = "T")]
    pub t_end: f64,

    /// Integration step.
    #[arg(long)]
    pub dt: f64,
}

#[derive(Debug, Subcommand)]
pub enum PolicyCmd {
    /// Hold one constant transfer rate.
    Static {
        #[command(flatten)]
        sector: SectorArgs,

        /// The constant rate.
        #[arg(long)]
        beta: f64,
    },
    /// Chase the upper envelope of a constant-rate scenario grid.
    Envelope {
        #[command(flatten)]
        sector: SectorArgs,

        #[arg(long, default_value_t = 1e-5)]
        beta_min: f64,

        #[arg(long, default_value_t = 1.0)]
        beta_max: f64,

        /// Scenario grid size (log-spaced in beta).
        #[arg(long, default_value_t = 1000)]
        grid: usize,
    },
    /// Greedy lookahead maximization of total activity.
    Optimal {
        #[command(flatten)]
        sector: SectorArgs,

        #[arg(long, default_value_t = 1e-5)]
        beta_min: f64,

        #[arg(long, default_value_t = 1.0)]
        beta_max: f64,

        /// Lookahead horizon H of the per-step objective W(t + H).
        #[arg(long, default_value_t = 1.0)]
        lookahead: f64,
    },
}

/// What a subcommand hands back to `main`: the bytes to emit and any
/// warnings for stderr. Warnings mean partial numerical failure, so their
/// presence maps to exit code 3 even though a payload exists.
#[derive(Debug)]
pub struct Output {
    pub payload: String,
    pub warnings: Vec<String>,
}

pub fn execute(cli: &Cli, options_line: &str) -> Result<Output, CliError> {
    match &cli.command {
        Command::Fit(cmd) => cmd_fit(cli, options_line, cmd),
        Command::Detect(cmd) => cmd_detect(cli, options_line, cmd),
        Command::Segment(cmd) => cmd_segment(cli, options_line, cmd),
        Command::Synth(cmd) => cmd_synth(cli, options_line, cmd),
        Command::Simulate(cmd) => cmd_simulate(cli, options_line, cmd),
        Command::Policy(cmd) => cmd_policy(cli, options_line, cmd),
    }
}

fn metadata(cli: &Cli, options_line: &str, input: String, raw: Option<&RawScale>) -> Metadata {
    Metadata {
        input,
        options: options_line.to_string(),
        seed: cli.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        raw_first_value: raw.map(|r| r.first_value),
    }
}

fn render(cli: &Cli, report: &Report, warnings: Vec<String>) -> Output {
    let payload = if cli.json { report.to_json() } else { report.to_table() };
    Output { payload, warnings }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Clamp a segment to an inclusive global-period window and renormalize so
/// the window's first value is exactly 100, like a fresh ingest of just
/// that window.
fn window(
    series: &SeriesSegment,
    from: Option<usize>,
    to: Option<usize>,
) -> Result<SeriesSegment, CliError> {
    let first = series.period(0);
    let last = series.period(series.len() - 1);
    let lo = from.unwrap_or(first);
    let hi = to.unwrap_or(last);
    if lo > hi {
        return Err(usage(format!("--from {lo} exceeds --to {hi}")));
    }
    if lo < first || hi > last {
        return Err(CliError::Data(format!(
            "window [{lo}, {hi}] lies outside the data [{first}, {last}]"
        )));
    }
    let mut sub = series.sub_segment(lo - first, hi - first + 1);
    let scale = 100.0 / sub.values[0];
    for v in &mut sub.values {
        *v *= scale;
    }
    sub.values[0] = 100.0; // exact by definition; see ingest
    Ok(sub)
}

fn cmd_fit(cli: &Cli, options_line: &str, cmd: &FitCmd) -> Result<Output, CliError> {
    if cmd.restarts == 0 {
        return Err(usage("--restarts must be at least 1"));
    }
    let (series, raw) = ingest(&cmd.input.series_file())?;
    let sub = window(&series, cmd.from, cmd.to)?;

    let mut options = FitOptions { free_w0: cmd.free_w0, ..FitOptions::default() };
    if let Some(seed) = cli.seed {
        options.restart_seed = seed;
    }
    let fit = fit_with_restarts(&sub, cmd.restarts, &options)?;

    let mut report = Report::new(metadata(
        cli,
        options_line,
        cmd.input.file.display().to_string(),
        Some(&raw),
    ));
    report.fits.push(FitRow::from_fit(&fit, sub.period(0), sub.period(sub.len() - 1)));
    Ok(render(cli, &report, Vec::new()))
}

fn check_tolerance(p: f64) -> Result<(), CliError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(usage(format!("--p must lie strictly between 0 and 1, got {p}")));
    }
    Ok(())
}

/// Parse a `LO:HI:STEP` tolerance sweep into its sample points.
fn sweep_points(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, step] = parts[..] else {
        return Err(usage(format!("--p-sweep wants LO:HI:STEP, got `{spec}`")));
    };
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| usage(format!("--p-sweep: `{s}` is not a number")))
    };
    let (lo, hi, step) = (parse(lo)?, parse(hi)?, parse(step)?);
    if !(step > 0.0) {
        return Err(usage("--p-sweep step must be positive"));
    }
    if !(lo > 0.0 && lo <= hi && hi < 1.0) {
        return Err(usage(format!(
            "--p-sweep needs 0 < LO <= HI < 1, got {lo}:{hi}:{step}"
        )));
    }
    let mut points = Vec::new();
    for k in 0.. {
        let p = lo + step * k as f64;
        // Tolerate float accumulation at the top end.
        if p > hi + step * 1e-9 {
            break;
        }
        points.push(p);
    }
    Ok(points)
}

fn shock_rows(shocks: &[(usize, usize)], first_period: usize) -> Vec<ShockRow> {
    shocks
        .iter()
        .map(|&(t, s)| ShockRow { time: first_period + t, support: s })
        .collect()
}

fn cmd_detect(cli: &Cli, options_line: &str, cmd: &DetectCmd) -> Result<Output, CliError> {
    check_tolerance(cmd.p)?;
    let sweep = cmd.p_sweep.as_deref().map(sweep_points).transpose()?;
    let (series, raw) = ingest(&cmd.input.series_file())?;
    let n = series.len();
    let start = series.start_index;

    let curve = horizon_curve(&series, cmd.p, 6.min(n)..n);
    let shocks = detect_shocks(&series, cmd.p, cmd.min_support);

    let mut report = Report::new(metadata(
        cli,
        options_line,
        cmd.input.file.display().to_string(),
        Some(&raw),
    ));
    report.horizon = Some(HorizonSummary {
        tolerance_p: curve.tolerance_p,
        points: curve
            .points
            .iter()
            .map(|&(t0, tp)| HorizonRow { t0: start + t0, t_pred: start + tp })
            .collect(),
        failed_t0: curve.failed_t0.iter().map(|&t0| start + t0).collect(),
    });
    report.shocks = Some(ShockSummary::from_report(&shocks, start));
    if let Some(points) = sweep {
        report.p_sweep = Some(
            points
                .into_iter()
                .map(|p| {
                    let r = detect_shocks(&series, p, cmd.min_support);
                    SweepRow { p, shocks: shock_rows(&r.shocks, start) }
                })
                .collect(),
        );
    }
    Ok(render(cli, &report, Vec::new()))
}

fn cmd_segment(cli: &Cli, options_line: &str, cmd: &SegmentCmd) -> Result<Output, CliError> {
    check_tolerance(cmd.p)?;
    let (series, raw) = ingest(&cmd.input.series_file())?;
    let start = series.start_index;

    let (shocks, episodes) = segment_and_fit(&series, cmd.p, cmd.min_support);

    let mut report = Report::new(metadata(
        cli,
        options_line,
        cmd.input.file.display().to_string(),
        Some(&raw),
    ));
    report.shocks = Some(ShockSummary::from_report(&shocks, start));
    let mut warnings = Vec::new();
    for ep in &episodes {
        let (a, b) = (start + ep.start, start + ep.end);
        match &ep.fit {
            Ok(fit) => report.fits.push(FitRow::from_fit(fit, a, b - 1)),
            Err(e) => warnings.push(format!("episode [{a}, {b}) failed: {e}")),
        }
    }
    Ok(render(cli, &report, warnings))
}

fn cmd_synth(cli: &Cli, options_line: &str, cmd: &SynthCmd) -> Result<Output, CliError> {
    if cmd.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    if !(cmd.nu >= 0.0) {
        return Err(usage(format!("--nu must be non-negative, got {}", cmd.nu)));
    }
    if !(cmd.w0 > 0.0) {
        return Err(usage(format!("--w0 must be positive, got {}", cmd.w0)));
    }
    if let Some(t) = cmd.shock_at {
        if t == 0 || t >= cmd.n {
            return Err(usage(format!(
                "--shock-at must lie strictly inside the series (1..{}), got {t}",
                cmd.n
            )));
        }
    }

    let seed = cli.seed.unwrap_or(0);
    let noise = NoiseSpec::new(cmd.nu, seed);
    let head = ResponseParams::new(cmd.f, cmd.lp, cmd.lm, cmd.w0, 0.0);
    let series = match cmd.shock_at {
        None => generate(&head, &noise, cmd.n),
        Some(t) => {
            let tail = ResponseParams::new(
                cmd.f2.unwrap_or(cmd.f),
                cmd.lp2.unwrap_or(cmd.lp),
                cmd.lm2.unwrap_or(cmd.lm),
                cmd.w0, // continuation overrides this beyond episode one
                0.0,
            );
            generate_piecewise(&[(head, t), (tail, cmd.n - t)], &noise)
        }
    };

    if cli.json {
        let mut report = Report::new(metadata(cli, options_line, "synthetic".into(), None));
        report.metadata.seed = Some(seed);
        report.series = Some(
            series
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| SeriesRow { period: series.period(i), value: v })
                .collect(),
        );
        Ok(render(cli, &report, Vec::new()))
    } else {
        // A series file, not a report: the payload re-ingests as-is.
        let mut payload = String::from("period,value\n");
        for (i, &v) in series.values.iter().enumerate() {
            payload.push_str(&format!("{},{}\n", series.period(i), v));
        }
        Ok(Output { payload, warnings: Vec::new() })
    }
}

/// Shared validation for commands that integrate the two-sector system,
/// mirroring the library's panics/errors as usage errors.
fn check_sector(w1: f64, w2: f64, t_end: f64, dt: f64) -> Result<(), CliError> {
    if !(w1 >= 0.0 && w2 >= 0.0) {
        return Err(usage(format!("sector levels must be non-negative, got w1 = {w1}, w2 = {w2}")));
    }
    if !(dt > 0.0) {
        return Err(usage(format!("--dt must be positive, got {dt}")));
    }
    if !(t_end >= dt) {
        return Err(usage(format!("--T must be at least --dt, got T = {t_end}, dt = {dt}")));
    }
    Ok(())
}

fn cmd_simulate(cli: &Cli, options_line: &str, cmd: &SimulateCmd) -> Result<Output, CliError> {
    check_sector(cmd.w1, cmd.w2, cmd.t_end, cmd.dt)?;
    if !(cmd.beta >= 0.0) {
        return Err(usage(format!("--beta must be non-negative, got {}", cmd.beta)));
    }

    let params = SectorParams::new(cmd.a1, cmd.a2, cmd.beta);
    let state0 = SectorState::new(cmd.w1, cmd.w2, 0.0);
    let trajectory = integrate_const(&params, &state0, cmd.t_end, cmd.dt)?;

    let mut report = Report::new(metadata(cli, options_line, "model".into(), None));
    report.simulation = Some(
        trajectory
            .iter()
            .map(|s| SimRow {
                t: s.t,
                w1: s.w1,
                w2: s.w2,
                w: s.total(),
                delta: (s.w2 != 0.0).then(|| s.w1 / s.w2),
            })
            .collect(),
    );
    Ok(render(cli, &report, Vec::new()))
}

fn check_beta_range(beta_min: f64, beta_max: f64) -> Result<(), CliError> {
    if !(beta_min > 0.0 && beta_min <= beta_max) {
        return Err(usage(format!(
            "need 0 < --beta-min <= --beta-max, got [{beta_min}, {beta_max}]"
        )));
    }
    Ok(())
}

fn cmd_policy(cli: &Cli, options_line: &str, cmd: &PolicyCmd) -> Result<Output, CliError> {
    let sector = match cmd {
        PolicyCmd::Static { sector, .. }
        | PolicyCmd::Envelope { sector, .. }
        | PolicyCmd::Optimal { sector, .. } => sector,
    };
    check_sector(sector.w1, sector.w2, sector.t_end, sector.dt)?;
    if !(sector.w2 > 0.0) {
        // The inequality ratio w1/w2 anchors classification.
        return Err(usage(format!("--w2 must be positive, got {}", sector.w2)));
    }
    let state0 = SectorState::new(sector.w1, sector.w2, 0.0);

    let (kind, mut outcome, envelope_w): (&str, PolicyOutcome, Option<Vec<f64>>) = match cmd {
        PolicyCmd::Static { sector, beta } => {
            if !(*beta >= 0.0) {
                return Err(usage(format!("--beta must be non-negative, got {beta}")));
            }
            let outcome = static_sweep(sector.a1, sector.a2, &[*beta], &state0, sector.t_end, sector.dt)
                .pop()
                .expect("one grid point, one outcome");
            ("static", outcome, None)
        }
        PolicyCmd::Envelope { sector, beta_min, beta_max, grid } => {
            check_beta_range(*beta_min, *beta_max)?;
            if *grid == 0 {
                return Err(usage("--grid must be at least 1"));
            }
            let grid = log_beta_grid(*beta_min, *beta_max, *grid);
            let env =
                envelope_policy(sector.a1, sector.a2, &grid, &state0, sector.t_end, sector.dt)?;
            ("envelope", env.attained, Some(env.envelope_w))
        }
        PolicyCmd::Optimal { sector, beta_min, beta_max, lookahead } => {
            check_beta_range(*beta_min, *beta_max)?;
            if !(*lookahead > 0.0) {
                return Err(usage(format!("--lookahead must be positive, got {lookahead}")));
            }
            let outcome = optimal_policy(
                sector.a1,
                sector.a2,
                (*beta_min, *beta_max),
                &state0,
                sector.t_end,
                sector.dt,
                *lookahead,
            )?;
            ("optimal", outcome, None)
        }
    };

    let fit = effective_fit(&mut outcome)?;
    let classification = classify_policy(&outcome.delta_at_unit_periods()).to_string();

    let stride = ((1.0 / outcome.dt).round().max(1.0)) as usize;
    let rows = (0..outcome.trajectory.len())
        .step_by(stride)
        .map(|i| {
            let s = &outcome.trajectory[i];
            PolicyRow {
                t: s.t,
                beta: outcome.schedule.beta_at(s.t),
                w1: s.w1,
                w2: s.w2,
                w: outcome.w[i],
                delta: outcome.delta[i],
                envelope_w: envelope_w.as_ref().map(|e| e[i]),
            }
        })
        .collect();

    let mut report = Report::new(metadata(cli, options_line, "model".into(), None));
    report.policy = Some(PolicySummary {
        kind: kind.to_string(),
        beta_min: outcome.schedule.beta_min,
        beta_max: outcome.schedule.beta_max,
        classification,
        final_w: *outcome.w.last().expect("trajectory is never empty"),
        rows,
    });
    report.fits.push(FitRow::from_fit(&fit, 0, fit.n - 1));
    Ok(render(cli, &report, Vec::new()))
}
