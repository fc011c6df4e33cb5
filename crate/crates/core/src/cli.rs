//! Command-line front end.
//!
//! Values come from flags first, then the environment (oracle cap only), then
//! an optional `key=value` config file, then built-in defaults. Exit status
//! is 0 on success, 1 when a verification fails, 2 on usage or validation
//! errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{self, OutputCounts, SweepSpec};
use crate::closedform::{self, ThetaChoice};
use crate::error::QetError;
use crate::model::{DEFAULT_ORACLE_CAP, ModelParams, Partition};
use crate::output::{self, float};
use crate::protocol::{Protocol, SampledEstimate};
use crate::verify::{self, VerifyConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qet",
    version,
    about = "Quantum energy teleportation in the fully connected N-qubit model"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Largest qubit count for the statevector oracle.
    #[arg(long, global = true, env = "QET_ORACLE_CAP")]
    pub oracle_cap: Option<u64>,

    /// File of `key=value` lines supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energies and efficiency at one parameter point.
    Efficiency(EfficiencyArgs),
    /// Closed-form grid over N, m and k/h.
    Sweep(SweepArgs),
    /// Dataset behind one of the figures.
    Figure(FigureArgs),
    /// Oracle against closed-form verification suite.
    Verify(VerifyArgs),
    /// Optimal qubit count for a single output.
    Nopt(NoptArgs),
    /// Bell value of the ground state or of a GHZ angle.
    Bell(BellArgs),
    /// Printed three- and four-qubit special cases against the general forms.
    Fixtures,
}

#[derive(Debug, Args)]
pub struct EfficiencyArgs {
    /// Number of qubits.
    #[arg(long)]
    pub n: Option<u64>,
    /// Number of output qubits; the last m qubits are used.
    #[arg(long)]
    pub m: Option<u64>,
    /// Coupling ratio k/h.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Energy unit; energies scale linearly with it.
    #[arg(long)]
    pub h: Option<f64>,
    /// Output qubits as 1-based indices, e.g. `1,3`; overrides --m.
    #[arg(long)]
    pub outputs: Option<String>,
    /// Rotation angle; defaults to the optimum.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Also run the statevector protocol.
    #[arg(long)]
    pub oracle: bool,
    /// Sampled measurement records for a Monte Carlo estimate.
    #[arg(long)]
    pub shots: Option<u64>,
    /// RNG seed for --shots.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Qubit counts: `3,5,8` or `3..10` (inclusive), or a mix.
    #[arg(long)]
    pub n: Option<String>,
    /// Output counts, same syntax, or `all` for 1..N-1.
    #[arg(long)]
    pub m: Option<String>,
    /// Explicit k/h values, comma separated.
    #[arg(long)]
    pub ratio: Option<String>,
    /// Log-spaced k/h as `lo:hi` decade exponents, 50 points per decade.
    #[arg(long, conflicts_with = "ratio")]
    pub ratio_log: Option<String>,
    #[arg(long)]
    pub h: Option<f64>,
    /// Add the ground-state Bell value column.
    #[arg(long)]
    pub bell: bool,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// One of fig2a, fig2b, fig3a, fig3b, fig4a, fig4b, fig7.
    pub name: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Largest N in the protocol grid.
    #[arg(long)]
    pub n_max: Option<u64>,
}

#[derive(Debug, Args)]
pub struct NoptArgs {
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Upper end of the integer scan.
    #[arg(long)]
    pub scan_max: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BellArgs {
    /// Number of qubits, at least 3.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub ratio: Option<f64>,
    /// GHZ angle in [0, pi/4]; replaces the ground state.
    #[arg(long, conflicts_with = "ratio")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] QetError),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("verification failed")]
    Verification,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification => 1,
            _ => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parsed `key=value` config file. Keys match flag names; `_` and `-` are
/// interchangeable.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key=value", i + 1))
            })?;
            values.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::File {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config key {key}: cannot parse '{v}'"))),
        }
    }

    fn flag(&self, key: &str, set: bool) -> CliResult<bool> {
        Ok(set || self.get::<bool>(key)?.unwrap_or(false))
    }
}

fn pick<T: FromStr>(flag: Option<T>, cfg: &ConfigFile, key: &str) -> CliResult<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => cfg.get(key),
    }
}

fn required<T: FromStr>(flag: Option<T>, cfg: &ConfigFile, key: &str) -> CliResult<T> {
    pick(flag, cfg, key)?.ok_or_else(|| CliError::Usage(format!("--{key} is required")))
}

/// `3,5..7` style integer list; ranges are inclusive.
pub fn parse_int_list(s: &str) -> CliResult<Vec<u64>> {
    let bad = || CliError::Usage(format!("cannot parse integer list '{s}'"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b
                .trim_start_matches('=')
                .trim()
                .parse()
                .map_err(|_| bad())?;
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

pub fn parse_float_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse()
                .map_err(|_| CliError::Usage(format!("cannot parse number '{p}'")))
        })
        .collect()
}

fn parse_log_range(s: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Usage(format!("expected lo:hi decade exponents, got '{s}'"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: i32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i32 = hi.trim().parse().map_err(|_| bad())?;
    if hi < lo {
        return Err(QetError::InvalidRange(format!("decades {lo}:{hi}")).into());
    }
    Ok(analysis::log_grid(lo, hi, analysis::POINTS_PER_DECADE))
}

struct Context {
    format: Format,
    oracle_cap: u64,
    cfg: ConfigFile,
}

#[derive(Serialize)]
struct OracleOutput {
    e_in: f64,
    per_qubit_e_in: Vec<f64>,
    e_out: f64,
    e_out_via_trace: f64,
    eta: f64,
    theta_numeric: ThetaChoice,
}

#[derive(Serialize)]
struct EfficiencyOutput {
    n: u64,
    m: u64,
    outputs: Vec<usize>,
    ratio: f64,
    h: f64,
    k: f64,
    e_in: f64,
    e_out_max: f64,
    theta_opt: ThetaChoice,
    eta: f64,
    eta_limit: f64,
    theta: Option<f64>,
    e_out_at_theta: Option<f64>,
    oracle: Option<OracleOutput>,
    oracle_e_out_at_theta: Option<f64>,
    sample: Option<SampledEstimate>,
}

fn efficiency(ctx: &Context, a: &EfficiencyArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = &ctx.cfg;
    let n: u64 = required(a.n, cfg, "n")?;
    let ratio: f64 = pick(a.ratio, cfg, "ratio")?.unwrap_or(1.0);
    let h: f64 = pick(a.h, cfg, "h")?.unwrap_or(1.0);
    let params = ModelParams::new(n, h, ratio * h)?;
    let part = match pick(a.outputs.clone(), cfg, "outputs")? {
        Some(list) => {
            let one_based = parse_int_list(&list)?;
            if one_based.contains(&0) {
                return Err(CliError::Usage("output qubits are numbered from 1".into()));
            }
            let zero_based: Vec<usize> = one_based.iter().map(|&q| q as usize - 1).collect();
            Partition::with_outputs(n, &zero_based)?
        }
        None => Partition::trailing(n, required(a.m, cfg, "m")?)?,
    };
    let theta: Option<f64> = pick(a.theta, cfg, "theta")?;
    let shots: Option<u64> = pick(a.shots, cfg, "shots")?;
    let seed: u64 = pick(a.seed, cfg, "seed")?.unwrap_or(0);
    let run_oracle = cfg.flag("oracle", a.oracle)? || shots.is_some();

    let report = closedform::report(&params, &part);
    let mut result = EfficiencyOutput {
        n,
        m: part.m(),
        outputs: part.outputs().iter().map(|q| q + 1).collect(),
        ratio,
        h,
        k: params.k(),
        e_in: report.e_in,
        e_out_max: report.e_out_max,
        theta_opt: report.theta_opt,
        eta: report.eta,
        eta_limit: closedform::asymptotic_efficiency(&params, &part),
        theta,
        e_out_at_theta: theta.map(|t| closedform::output_energy_at_theta(&params, &part, t)),
        oracle: None,
        oracle_e_out_at_theta: None,
        sample: None,
    };
    if run_oracle {
        let protocol = Protocol::prepare(&params, &part, ctx.oracle_cap)?;
        let at_opt = protocol.report(report.theta_opt.theta)?;
        result.oracle = Some(OracleOutput {
            e_in: at_opt.e_in,
            per_qubit_e_in: at_opt.per_qubit_e_in,
            e_out: at_opt.e_out,
            e_out_via_trace: at_opt.e_out_via_trace,
            eta: at_opt.eta,
            theta_numeric: protocol.optimize_theta()?,
        });
        if let Some(t) = theta {
            result.oracle_e_out_at_theta = Some(protocol.extracted_energy(t)?);
        }
        if let Some(shots) = shots {
            let t = theta.unwrap_or(report.theta_opt.theta);
            result.sample = Some(protocol.sample(t, shots, seed)?);
        }
    }

    if ctx.format == Format::Json {
        return Ok(output::write_json(out, &result)?);
    }
    let outputs: Vec<String> = result.outputs.iter().map(|q| q.to_string()).collect();
    let mut pairs = vec![
        ("n", n.to_string()),
        ("m", result.m.to_string()),
        ("outputs", outputs.join(" ")),
        ("ratio", float(ratio)),
        ("h", float(h)),
        ("k", float(result.k)),
        ("e_in", float(result.e_in)),
        ("e_out_max", float(result.e_out_max)),
        ("theta_opt", float(result.theta_opt.theta)),
        ("cos_2theta", float(result.theta_opt.cos_2theta)),
        ("sin_2theta", float(result.theta_opt.sin_2theta)),
        ("eta", float(result.eta)),
        ("eta_limit", float(result.eta_limit)),
    ];
    if let (Some(t), Some(e)) = (theta, result.e_out_at_theta) {
        pairs.push(("theta", float(t)));
        pairs.push(("e_out_at_theta", float(e)));
    }
    if let Some(o) = &result.oracle {
        pairs.push(("oracle_e_in", float(o.e_in)));
        pairs.push(("oracle_e_out", float(o.e_out)));
        pairs.push(("oracle_e_out_via_trace", float(o.e_out_via_trace)));
        pairs.push(("oracle_eta", float(o.eta)));
        pairs.push(("oracle_theta_numeric", float(o.theta_numeric.theta)));
    }
    if let Some(e) = result.oracle_e_out_at_theta {
        pairs.push(("oracle_e_out_at_theta", float(e)));
    }
    if let Some(s) = &result.sample {
        pairs.push(("sample_shots", s.shots.to_string()));
        pairs.push(("sample_seed", s.seed.to_string()));
        pairs.push(("sample_e_in_mean", float(s.e_in_mean)));
        pairs.push(("sample_e_out_mean", float(s.e_out_mean)));
        pairs.push(("sample_e_out_stderr", float(s.e_out_stderr)));
    }
    Ok(output::write_pairs(out, &pairs)?)
}

fn emit_rows(
    ctx: &Context,
    comments: &[String],
    rows: &[analysis::SweepRow],
    out: &mut dyn Write,
) -> CliResult<()> {
    match ctx.format {
        Format::Csv => output::write_csv(out, comments, rows)?,
        Format::Json => output::write_json(out, rows)?,
    }
    Ok(())
}

fn sweep(ctx: &Context, a: &SweepArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = &ctx.cfg;
    let n_values = parse_int_list(&required(a.n.clone(), cfg, "n")?)?;
    let m_text = pick(a.m.clone(), cfg, "m")?.unwrap_or_else(|| "all".into());
    let m = if m_text.trim() == "all" {
        OutputCounts::All
    } else {
        OutputCounts::List(parse_int_list(&m_text)?)
    };
    let explicit = pick(a.ratio.clone(), cfg, "ratio")?;
    let log = pick(a.ratio_log.clone(), cfg, "ratio-log")?;
    let (ratios, ratio_note) = match (explicit, log) {
        (Some(r), _) => (parse_float_list(&r)?, format!("ratio: {r}")),
        (None, Some(l)) => (
            parse_log_range(&l)?,
            format!(
                "ratio: log-spaced decades {l}, {} per decade",
                analysis::POINTS_PER_DECADE
            ),
        ),
        (None, None) => return Err(CliError::Usage("--ratio or --ratio-log is required".into())),
    };
    let h: f64 = pick(a.h, cfg, "h")?.unwrap_or(1.0);
    let spec = SweepSpec::new(n_values, m, ratios)
        .with_h(h)
        .with_bell(cfg.flag("bell", a.bell)?);
    let rows = analysis::efficiency_sweep(&spec)?;
    let comments = vec![
        format!("n: {}", required::<String>(a.n.clone(), cfg, "n")?),
        format!("m: {m_text}"),
        ratio_note,
        format!("h: {}", float(h)),
    ];
    emit_rows(ctx, &comments, &rows, out)
}

fn figure(ctx: &Context, a: &FigureArgs, out: &mut dyn Write) -> CliResult<()> {
    let data = analysis::figure_dataset(&a.name)?;
    let mut comments = vec![format!("figure: {}", data.name)];
    comments.extend(data.grid.iter().cloned());
    emit_rows(ctx, &comments, &data.rows, out)
}

fn verify_cmd(ctx: &Context, a: &VerifyArgs, out: &mut dyn Write) -> CliResult<()> {
    let n_max: u64 = pick(a.n_max, &ctx.cfg, "n-max")?.unwrap_or(10);
    if n_max < 3 {
        return Err(QetError::InvalidRange(format!("n-max = {n_max}, need at least 3")).into());
    }
    if n_max > ctx.oracle_cap {
        return Err(QetError::OracleCapExceeded {
            n: n_max,
            cap: ctx.oracle_cap,
        }
        .into());
    }
    let checks = verify::run_all(&VerifyConfig {
        n_max,
        oracle_cap: ctx.oracle_cap,
    })?;
    match ctx.format {
        Format::Json => output::write_json(out, &checks)?,
        Format::Csv => {
            for c in &checks {
                writeln!(out, "{c}")?;
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            writeln!(out, "{} checks, {failed} failed", checks.len())?;
        }
    }
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(CliError::Verification)
    }
}

fn nopt(ctx: &Context, a: &NoptArgs, out: &mut dyn Write) -> CliResult<()> {
    let x: f64 = required(a.ratio, &ctx.cfg, "ratio")?;
    let scan: u64 = pick(a.scan_max, &ctx.cfg, "scan-max")?.unwrap_or(analysis::SCAN_N_MAX);
    let r = analysis::n_opt_with_scan(x, scan)?;
    match ctx.format {
        Format::Json => output::write_json(out, &r)?,
        Format::Csv => output::write_pairs(
            out,
            &[
                ("ratio", float(r.x)),
                ("c_aux", float(r.c_aux)),
                ("n_opt_real", float(r.n_opt_real)),
                ("n_opt_int", r.n_opt_int.to_string()),
                ("eta_at_opt", float(r.eta_at_opt)),
                ("scan_argmax", r.scan_argmax.to_string()),
                ("scan_eta", float(r.scan_eta)),
                ("scan_n_max", r.scan_n_max.to_string()),
            ],
        )?,
    }
    Ok(())
}

fn bell(ctx: &Context, a: &BellArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = &ctx.cfg;
    let n: u64 = required(a.n, cfg, "n")?;
    let report = match pick(a.alpha, cfg, "alpha")? {
        Some(alpha) => {
            let b_value = analysis::bell_value_ghz_angle(n, alpha)?;
            analysis::BellReport {
                n_qubits: n,
                b_value,
                violates: b_value > 1.0,
                saturation_value: analysis::bell_value_ghz_angle(n, std::f64::consts::FRAC_PI_4)?,
            }
        }
        None => {
            let ratio: f64 = required(a.ratio, cfg, "ratio")?;
            let params = if ratio == 0.0 {
                ModelParams::uncoupled(n, 1.0)?
            } else {
                ModelParams::from_ratio(n, ratio)?
            };
            analysis::bell_value_ground_state(&params)?
        }
    };
    match ctx.format {
        Format::Json => output::write_json(out, &report)?,
        Format::Csv => output::write_pairs(
            out,
            &[
                ("n", n.to_string()),
                ("b_value", float(report.b_value)),
                ("violates", report.violates.to_string()),
                ("saturation_value", float(report.saturation_value)),
            ],
        )?,
    }
    Ok(())
}

fn fixtures(ctx: &Context, out: &mut dyn Write) -> CliResult<()> {
    let report = analysis::special_case_check(ctx.oracle_cap)?;
    match ctx.format {
        Format::Json => output::write_json(out, &report)?,
        Format::Csv => {
            for a in &report.adjudications {
                writeln!(
                    out,
                    "# N={} m={} {} at h=k=1: printed {} general {} oracle {} (printed off by {})",
                    a.n,
                    a.m,
                    a.quantity,
                    float(a.printed),
                    float(a.general),
                    float(a.oracle),
                    float(a.printed_deviation)
                )?;
            }
            writeln!(
                out,
                "n,m,quantity,max_abs_deviation,consistent,expected_mismatch"
            )?;
            for r in &report.rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.n,
                    r.m,
                    r.quantity,
                    float(r.max_abs_deviation),
                    r.consistent,
                    r.expected_mismatch
                )?;
            }
        }
    }
    if report.as_expected() {
        Ok(())
    } else {
        Err(CliError::Verification)
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let ctx = Context {
        format: pick(cli.format, &cfg, "format")?.unwrap_or(Format::Csv),
        oracle_cap: pick(cli.oracle_cap, &cfg, "oracle-cap")?.unwrap_or(DEFAULT_ORACLE_CAP),
        cfg,
    };
    let threads: usize = pick(cli.threads, &ctx.cfg, "threads")?.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;

    let out_path: Option<PathBuf> = pick(cli.out.clone(), &ctx.cfg, "out")?;
    let mut buffer = Vec::new();
    let result = pool.install(|| match &cli.command {
        Command::Efficiency(a) => efficiency(&ctx, a, &mut buffer),
        Command::Sweep(a) => sweep(&ctx, a, &mut buffer),
        Command::Figure(a) => figure(&ctx, a, &mut buffer),
        Command::Verify(a) => verify_cmd(&ctx, a, &mut buffer),
        Command::Nopt(a) => nopt(&ctx, a, &mut buffer),
        Command::Bell(a) => bell(&ctx, a, &mut buffer),
        Command::Fixtures => fixtures(&ctx, &mut buffer),
    });
    // a failed verification still reports its table
    if let Err(e) = &result
        && !matches!(e, CliError::Verification)
    {
        return result;
    }
    match out_path {
        Some(path) => {
            let file = File::create(&path).map_err(|source| CliError::File {
                path: path.clone(),
                source,
            })?;
            let mut w = BufWriter::new(file);
            w.write_all(&buffer)?;
            w.flush()?;
        }
        None => stdout.write_all(&buffer)?,
    }
    result
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = if e.use_stderr() {
                e.render().to_string()
            } else {
                e.to_string()
            };
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("qet").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn lists() {
        assert_eq!(parse_int_list("3,5..7").unwrap(), vec![3, 5, 6, 7]);
        assert_eq!(parse_int_list("2..=4").unwrap(), vec![2, 3, 4]);
        assert!(parse_int_list("a").is_err());
        assert_eq!(parse_float_list("0.5, 1e3").unwrap(), vec![0.5, 1000.0]);
        assert_eq!(parse_log_range("-1:1").unwrap().len(), 101);
        assert!(parse_log_range("2:1").is_err());
    }

    #[test]
    fn config_parsing() {
        let cfg = ConfigFile::parse("# comment\nn = 4\nratio_log=-1:2\n\noracle=true\n").unwrap();
        assert_eq!(cfg.get::<u64>("n").unwrap(), Some(4));
        assert_eq!(
            cfg.get::<String>("ratio-log").unwrap().as_deref(),
            Some("-1:2")
        );
        assert!(cfg.flag("oracle", false).unwrap());
        assert!(cfg.get::<u64>("ratio-log").is_err());
        assert!(ConfigFile::parse("novalue").is_err());
    }

    #[test]
    fn efficiency_point() {
        let (code, out, _) = run_str(&["efficiency", "--n", "3", "--m", "1", "--ratio", "1"]);
        assert_eq!(code, 0);
        let get = |key: &str| -> f64 {
            out.lines()
                .find_map(|l| l.strip_prefix(&format!("{key},")))
                .unwrap()
                .parse()
                .unwrap()
        };
        assert!((get("e_in") - 1.664_10).abs() < 1e-5);
        assert!((get("eta") - 0.177_04).abs() < 1e-5);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_str(&["efficiency", "--n", "1", "--m", "1"]).0, 2);
        assert_eq!(run_str(&["efficiency", "--n", "3"]).0, 2);
        assert_eq!(run_str(&["bogus"]).0, 2);
        assert_eq!(run_str(&["figure", "fig9"]).0, 2);
        assert_eq!(
            run_str(&["efficiency", "--n", "13", "--m", "1", "--oracle"]).0,
            2
        );
        assert_eq!(run_str(&["--help"]).0, 0);
    }
}
