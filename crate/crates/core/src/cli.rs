//! Command-line front end. Every report is a JSON object
//! `{"config", "results", "diagnostics"}` (numbers as decimal strings,
//! rationals as `p/q`) or a CSV table with one row per `n`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde_json::{json, Map, Value};

use crate::criteria::{
    evaluate_all, exact_exponent_sequence, CriterionReport, DEFAULT_HORIZON, MIN_HORIZON,
};
use crate::error::Error;
use crate::moments::{moment_direct, ramanujan_check, MomentSequence, WeightSpec};
use crate::orthopoly::{gram_matrix, max_identity_deviation, recurrence_from_moments};
use crate::qbessel::{calibrate, injectivity_diagnostic, involution_residual, QBesselTransform};
use crate::qcore::{decay_window, q_exp, GridFunction, QContext, DEFAULT_K_MAX, DEFAULT_K_MIN};
use crate::scalar::Real;
use crate::MpReal;

/// Highest degree used by the orthonormality check.
const GRAM_DEGREE: usize = 12;
/// Window used by `fourier-check` when none is given.
const FOURIER_WINDOW: (i64, i64) = (-8, 8);
/// Bits of grid-weight decay required of the involution probe window.
const PROBE_DECAY_BITS: f64 = 80.0;
/// Probes reach out to `x = 2^PROBE_REACH_BITS`.
const PROBE_REACH_BITS: f64 = 8.0;

#[derive(Debug, Parser)]
#[command(name = "qmoment", version, about = "Moments and determinacy diagnostics for q-deformed measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Direct and closed-form moments side by side.
    Moments(RunArgs),
    /// Perron, Riesz, Carleman and q-criterion diagnostics.
    Criteria {
        #[command(flatten)]
        run: RunArgs,
        /// Replace the family weight by a reference moment sequence.
        #[arg(long, value_enum)]
        toy: Option<Toy>,
    },
    /// Full pipeline for the p = 3 weight.
    ReproduceP3(RunArgs),
    /// Injectivity and involution checks for the q-Bessel transform.
    FourierCheck(RunArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Toy {
    /// s_2n = 1
    Constant,
    /// s_2n = (2n)!
    Factorial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, default_value = "0.5")]
    q: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    v: String,
    /// Weight exponent, integer or `a/b`.
    #[arg(long, default_value = "3")]
    p: String,
    #[arg(long, default_value_t = crate::qcore::DEFAULT_PRECISION)]
    precision: u32,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    horizon: usize,
    #[arg(long, allow_hyphen_values = true)]
    kmin: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    kmax: Option<i64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure of a command: a stable category and a one-line message.
#[derive(Debug)]
pub struct CliError {
    pub category: &'static str,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self { category: e.category(), message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self { category: "io", message: e.to_string() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "error[{}]: {}", self.category, self.message.replace('\n', " "))
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            return 2;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            1
        }
    }
}

/// Validated run configuration.
struct RunConfig {
    command: &'static str,
    q: String,
    v: String,
    p: Ratio<i64>,
    horizon: usize,
    format: Format,
    out: Option<PathBuf>,
    ctx: QContext<MpReal>,
}

impl RunConfig {
    fn from_args(command: &'static str, a: RunArgs, default_window: (i64, i64)) -> Result<Self, CliError> {
        let p = parse_ratio(&a.p)?;
        WeightSpec::<MpReal>::family(p)?;
        if a.horizon < MIN_HORIZON {
            return Err(Error::InvalidParameter(format!("horizon must be at least {MIN_HORIZON}, got {}", a.horizon)).into());
        }
        let ctx = QContext::<MpReal>::from_decimal(&a.q, &a.v, a.precision)?
            .with_window(a.kmin.unwrap_or(default_window.0), a.kmax.unwrap_or(default_window.1))?;
        Ok(Self { command, q: a.q, v: a.v, p, horizon: a.horizon, format: a.format, out: a.out, ctx })
    }

    fn config_json(&self) -> Value {
        json!({
            "command": self.command,
            "q": self.q,
            "v": self.v,
            "p": self.p.to_string(),
            "precision": self.ctx.precision().to_string(),
            "horizon": self.horizon.to_string(),
            "k_min": self.ctx.k_min().to_string(),
            "k_max": self.ctx.k_max().to_string(),
            "format": self.format.name(),
        })
    }

    fn emit(&self, results: Value, diagnostics: Vec<String>, csv: Csv) -> Result<(), CliError> {
        let text = match self.format {
            Format::Json => {
                let mut doc = Map::new();
                doc.insert("config".into(), self.config_json());
                doc.insert("results".into(), results);
                doc.insert("diagnostics".into(), Value::from(diagnostics));
                let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("string-only JSON");
                s.push('\n');
                s
            }
            Format::Csv => csv.render(),
        };
        match &self.out {
            Some(path) => fs::write(path, text)?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn parse_ratio(s: &str) -> Result<Ratio<i64>, CliError> {
    let bad = || CliError::from(Error::InvalidParameter(format!("cannot parse rational {s:?}")));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: i64 = n.parse().map_err(|_| bad())?;
    let d: i64 = d.parse().map_err(|_| bad())?;
    if d == 0 {
        return Err(bad());
    }
    Ok(Ratio::new(n, d))
}

struct Csv {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

fn num<T: Real>(x: &T) -> Value {
    Value::String(x.to_decimal())
}

fn nums<T: Real>(xs: &[T]) -> Value {
    Value::Array(xs.iter().map(num).collect())
}

fn run(command: Command) -> Result<(), CliError> {
    let default = (DEFAULT_K_MIN, DEFAULT_K_MAX);
    match command {
        Command::Moments(a) => cmd_moments(&RunConfig::from_args("moments", a, default)?),
        Command::Criteria { run, toy } => cmd_criteria(&RunConfig::from_args("criteria", run, default)?, toy),
        Command::ReproduceP3(mut a) => {
            a.p = "3".into();
            cmd_reproduce_p3(&RunConfig::from_args("reproduce-p3", a, default)?)
        }
        Command::FourierCheck(a) => cmd_fourier_check(&RunConfig::from_args("fourier-check", a, FOURIER_WINDOW)?),
    }
}

fn cmd_moments(cfg: &RunConfig) -> Result<(), CliError> {
    let ctx = &cfg.ctx;
    let weight = WeightSpec::family(cfg.p)?;
    let closed = MomentSequence::closed_form(ctx, cfg.p, cfg.horizon)?;
    let mut rows = Vec::new();
    let mut table = Vec::new();
    let mut diagnostics = Vec::new();
    for entry in closed.entries() {
        let n = entry.n;
        let direct = moment_direct(n, &weight, ctx)?;
        if direct.tail_warning {
            diagnostics.push(format!("n={n}: direct sum boundary term exceeds tail_tol"));
        }
        let gap = ((direct.value.clone() - &entry.value) / &entry.value).abs();
        let exponent = closed.exponent(n).expect("family exponents").to_string();
        rows.push(vec![
            n.to_string(),
            direct.value.to_decimal(),
            entry.value.to_decimal(),
            gap.to_decimal(),
            exponent.clone(),
        ]);
        table.push(json!({
            "n": n.to_string(),
            "s2n_direct": num(&direct.value),
            "s2n_closed_form": num(&entry.value),
            "relative_gap": num(&gap),
            "exponent": exponent,
        }));
    }
    let csv = Csv {
        header: vec!["n", "s2n_direct", "s2n_closed_form", "relative_gap", "exponent"],
        rows,
    };
    cfg.emit(json!({ "moments": table }), diagnostics, csv)
}

fn report_json<T: Real>(r: &CriterionReport<T>) -> Value {
    let mut m = Map::new();
    m.insert("criterion".into(), Value::String(r.criterion.to_string()));
    m.insert("horizon".into(), Value::String(r.horizon.to_string()));
    m.insert("verdict".into(), Value::String(r.verdict.to_string()));
    m.insert("rule".into(), Value::String(r.rule.clone()));
    m.insert("conclusion".into(), Value::String(r.conclusion.clone()));
    m.insert("trend".into(), num(&r.trend));
    m.insert("test_values".into(), nums(&r.test_values));
    if !r.ratios.is_empty() {
        m.insert("ratios".into(), nums(&r.ratios));
        m.insert("partial_sums".into(), nums(&r.partial_sums));
    }
    Value::Object(m)
}

fn toy_sequence(ctx: &QContext<MpReal>, toy: Toy, n_max: usize) -> Result<MomentSequence<MpReal>, Error> {
    let mut values = Vec::with_capacity(n_max + 1);
    let mut fact = ctx.one();
    for n in 0..=n_max {
        if n > 0 {
            fact *= ctx.int((2 * n - 1) as i64) * ctx.int(2 * n as i64);
        }
        values.push(match toy {
            Toy::Constant => ctx.one(),
            Toy::Factorial => fact.clone(),
        });
    }
    MomentSequence::supplied(ctx, values)
}

fn cmd_criteria(cfg: &RunConfig, toy: Option<Toy>) -> Result<(), CliError> {
    let ctx = &cfg.ctx;
    let m = match toy {
        Some(t) => toy_sequence(ctx, t, cfg.horizon)?,
        None => MomentSequence::closed_form(ctx, cfg.p, cfg.horizon)?,
    };
    let all = evaluate_all(&m, cfg.horizon)?;
    let exps = toy.is_none().then(|| exact_exponent_sequence(&cfg.p, cfg.horizon));
    let mut diagnostics = Vec::new();
    for v in &all.chain.violations {
        diagnostics.push(format!("implication chain violated: {v}"));
    }
    let results = json!({
        "moments": match toy {
            Some(Toy::Constant) => "constant",
            Some(Toy::Factorial) => "factorial",
            None => "family",
        },
        "perron": report_json(&all.perron),
        "riesz": report_json(&all.riesz),
        "carleman": report_json(&all.carleman),
        "q_criterion": report_json(&all.q_criterion),
        "exact_exponents": exps.as_ref().map(|e| e.iter().map(|r| r.to_string()).collect::<Vec<_>>()),
        "implication_chain": {
            "perron": all.chain.perron.to_string(),
            "riesz": all.chain.riesz.to_string(),
            "carleman": all.chain.carleman.to_string(),
            "consistent": all.chain.consistent.to_string(),
        },
    });
    let rows = (0..cfg.horizon)
        .map(|i| {
            vec![
                (i + 1).to_string(),
                all.perron.test_values[i].to_decimal(),
                all.carleman.test_values[i].to_decimal(),
                all.carleman.ratios.get(i.wrapping_sub(1)).map(|r| r.to_decimal()).unwrap_or_default(),
                all.q_criterion.test_values[i].to_decimal(),
                exps.as_ref().map(|e| e[i].to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    let csv = Csv {
        header: vec!["n", "perron_riesz", "carleman", "carleman_ratio", "q_criterion", "exact_exponent"],
        rows,
    };
    cfg.emit(results, diagnostics, csv)
}

fn cmd_reproduce_p3(cfg: &RunConfig) -> Result<(), CliError> {
    let ctx = &cfg.ctx;
    let p = cfg.p;
    let mut diagnostics = Vec::new();

    // Ramanujan at b = -1, z = q^{2v+2}, base q^{2p}; the window is widened
    // until z^k is negligible.
    let two = ctx.int(2);
    let z = ctx.q().powf(&(two.clone() * ctx.v() + &two));
    let base = ctx.q().powi(2 * 3);
    let reach = ((f64::from(ctx.precision()) + 32.0) / -z.log2_abs()).ceil() as i64;
    let rctx = ctx.clone().with_window(ctx.k_min(), ctx.k_max().max(reach))?;
    let ram = ramanujan_check(&-ctx.one(), &z, &base, &rctx)?;
    if !ram.converged {
        diagnostics.push("ramanujan: bilateral sum did not meet its stopping rule inside the window".into());
    }

    let m = MomentSequence::closed_form(ctx, p, cfg.horizon)?;
    let all = evaluate_all(&m, cfg.horizon)?;
    let exps = exact_exponent_sequence(&p, cfg.horizon);
    let subsequence_holds = (1..=cfg.horizon / 3).all(|k| exps[3 * k - 1] == Ratio::new(k as i64, 4) - Ratio::new(1, 2));
    let lookup = |n: usize| exps.get(n - 1).map(|e| e.to_string());

    let degree = GRAM_DEGREE.min(cfg.horizon);
    let basis = recurrence_from_moments(&m, degree)?;
    let gram = gram_matrix(&basis, &m, ctx)?;
    let deviation = max_identity_deviation(&gram);

    let target_ratio = ctx.q().powf(&(ctx.one() / ctx.int(6)));
    let last_ratio = all.carleman.ratios.last().expect("horizon >= 8").clone();

    let results = json!({
        "ramanujan": {
            "b": "-1",
            "z": num(&z),
            "base": num(&base),
            "lhs": num(&ram.lhs),
            "rhs": num(&ram.rhs),
            "relative_error": num(&ram.rel_err),
            "converged": ram.converged.to_string(),
        },
        "moments": m.entries().iter().map(|e| json!({
            "n": e.n.to_string(),
            "s2n": num(&e.value),
            "exponent": m.exponent(e.n).expect("family").to_string(),
        })).collect::<Vec<_>>(),
        "exact_exponents": {
            "e_n": exps.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "subsequence_formula": "e_3m = m/4 - 1/2",
            "subsequence_holds": subsequence_holds.to_string(),
            "e_6": lookup(6),
            "e_12": lookup(12),
        },
        "q_criterion": report_json(&all.q_criterion),
        "carleman": report_json(&all.carleman),
        "carleman_ratio": {
            "last": num(&last_ratio),
            "target_q_pow_1_6": num(&target_ratio),
        },
        "gram": {
            "degree": degree.to_string(),
            "max_identity_deviation": num(&deviation),
        },
        "verdicts": {
            "q_criterion": all.q_criterion.conclusion.clone(),
            "carleman": all.carleman.verdict.to_string(),
        },
    });

    let rows = m
        .entries()
        .iter()
        .map(|e| {
            let n = e.n;
            let idx = n.checked_sub(1);
            let pick = |v: &[MpReal]| idx.and_then(|i| v.get(i)).map(|x| x.to_decimal()).unwrap_or_default();
            vec![
                n.to_string(),
                e.value.to_decimal(),
                m.exponent(n).expect("family").to_string(),
                idx.map(|i| exps[i].to_string()).unwrap_or_default(),
                pick(&all.carleman.test_values),
                n.checked_sub(2).and_then(|i| all.carleman.ratios.get(i)).map(|r| r.to_decimal()).unwrap_or_default(),
                pick(&all.q_criterion.test_values),
            ]
        })
        .collect();
    let csv = Csv {
        header: vec!["n", "s2n", "exponent", "e_n", "carleman_term", "carleman_ratio", "q_criterion"],
        rows,
    };
    cfg.emit(results, diagnostics, csv)
}

fn cmd_fourier_check(cfg: &RunConfig) -> Result<(), CliError> {
    let ctx = &cfg.ctx;
    let t = QBesselTransform::new(ctx)?;
    let smallest = injectivity_diagnostic(&t);

    // Probes need room for the transform to decay at both ends.
    let (_, hi) = decay_window(ctx, PROBE_DECAY_BITS);
    let lo = ctx.k_min().min(-(PROBE_REACH_BITS / -ctx.q().log2_abs()).ceil() as i64);
    let pctx = ctx.clone().with_window(lo, hi)?;
    let pt = QBesselTransform::new(&pctx)?;
    let q2 = pctx.q().clone() * pctx.q();
    let gauss = GridFunction::try_from_fn(&pctx, |_, x| q_exp(&-(x.clone() * x), &q2, &pctx))?;
    let atom = GridFunction::indicator(&pctx, 0)?;
    let residual_default = involution_residual(&gauss, &pt)?;
    let cal = calibrate(&pt, &[gauss, atom], &pctx.real(1e-10))?;

    let mut diagnostics = Vec::new();
    if !cal.within_tolerance {
        diagnostics.push("calibrated scale factor differs from 1 by more than 1e-10".into());
    }
    let results = json!({
        "kernel_dim": t.dim().to_string(),
        "smallest_singular_value": num(&smallest),
        "c_qv": num(t.c_qv()),
        "c_qv_calibrated": num(&cal.c_calibrated),
        "scale_factor": num(&cal.scale_factor),
        "probe_window": [pctx.k_min().to_string(), pctx.k_max().to_string()],
        "involution_residual": num(&residual_default),
        "involution_residual_calibrated": num(&cal.residual_calibrated),
    });
    let csv = Csv {
        header: vec!["kernel_dim", "smallest_singular_value", "c_qv", "c_qv_calibrated", "involution_residual_calibrated"],
        rows: vec![vec![
            t.dim().to_string(),
            smallest.to_decimal(),
            t.c_qv().to_decimal(),
            cal.c_calibrated.to_decimal(),
            cal.residual_calibrated.to_decimal(),
        ]],
    };
    cfg.emit(results, diagnostics, csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_parse() {
        assert_eq!(parse_ratio("3").unwrap(), Ratio::from_integer(3));
        assert_eq!(parse_ratio("3/2").unwrap(), Ratio::new(3, 2));
        assert_eq!(parse_ratio("1/0").unwrap_err().category, "invalid-parameter");
        assert!(parse_ratio("x").is_err());
    }

    #[test]
    fn bad_q_is_a_parameter_error() {
        let a = Cli::try_parse_from(["qmoment", "moments", "--q", "1.2"]).unwrap();
        let Command::Moments(args) = a.command else { panic!() };
        let err = RunConfig::from_args("moments", args, (DEFAULT_K_MIN, DEFAULT_K_MAX)).err().unwrap();
        assert_eq!(err.category, "invalid-parameter");
        assert!(err.to_string().starts_with("error[invalid-parameter]: "));
    }

    #[test]
    fn short_horizon_rejected() {
        let a = Cli::try_parse_from(["qmoment", "criteria", "--horizon", "4"]).unwrap();
        let Command::Criteria { run, .. } = a.command else { panic!() };
        assert!(RunConfig::from_args("criteria", run, (DEFAULT_K_MIN, DEFAULT_K_MAX)).is_err());
    }

    #[test]
    fn negative_values_parse_as_flags() {
        let a = Cli::try_parse_from(["qmoment", "fourier-check", "--v", "-1/2", "--kmin", "-3", "--kmax", "3"]).unwrap();
        let Command::FourierCheck(args) = a.command else { panic!() };
        assert_eq!(args.v, "-1/2");
        assert_eq!(args.kmin, Some(-3));
    }

    #[test]
    fn unknown_flag_exits_nonzero() {
        assert_eq!(main_with(["qmoment", "moments", "--bogus"]), 2);
    }
}
