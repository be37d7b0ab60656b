use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rcbound::io::{parse_input_distribution, parse_preset, ChannelDocument, LawDocument};
use rcbound::*;

mod output;

use output::{fmt_f64, Table};

/// Refined random-coding error bounds for discrete memoryless channels.
#[derive(Parser, Debug)]
#[command(name = "rcbound", version)]
struct Cli {
    /// Read and print rates and exponents in bits instead of nats.
    #[arg(long, global = true)]
    bits: bool,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Capacity, critical rate, R_inf estimate and singularity verdicts.
    Analyze(ChannelArgs),
    /// CSV of E_r, rho*, E_sp over a rate grid.
    Exponents {
        #[command(flatten)]
        channel: ChannelArgs,
        /// lo:hi:steps (steps points, both ends included).
        #[arg(long)]
        rates: String,
    },
    /// Residual table of the tilting identities; exit 2 if any exceeds 1e-8.
    Verify {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Input distribution: uniform or comma-separated probabilities (default: the document's Q, else uniform)
        #[arg(long)]
        q: Option<String>,
        /// Rate in nats (bits with --bits)
        #[arg(long)]
        rate: f64,
    },
    /// Pre-factor bound on the ensemble error as a function of N.
    Bound {
        #[command(flatten)]
        channel: ChannelArgs,
        /// auto, uniform, or comma-separated probabilities.
        #[arg(long)]
        q: Option<String>,
        /// Rate in nats (bits with --bits)
        #[arg(long)]
        rate: f64,
        /// Constant in the Esseen concentration-function term
        #[arg(long, default_value_t = 1.0)]
        esseen_c: f64,
        /// Berry-Esseen constant
        #[arg(long, default_value_t = concentration::DEFAULT_BERRY_ESSEEN_C)]
        berry_esseen_c: f64,
        /// Slack in the power when the nonsingular supremum is not attained.
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        /// Block lengths: n, lo:hi or lo:hi:step.
        #[arg(long)]
        n: String,
        /// Maximal-error version of the bound.
        #[arg(long)]
        maximal: bool,
        /// JSON sidecar for the bound constants (default: <out>.constants.json when --out is set).
        #[arg(long)]
        constants: Option<PathBuf>,
    },
    /// Exact tail of an i.i.d. sum against its tilted Berry-Esseen bound.
    Concentration {
        /// JSON law {"atoms": [...], "probs": [...], "neg_inf": p}.
        #[arg(long)]
        law: PathBuf,
        /// Threshold on the empirical mean.
        #[arg(long)]
        q: f64,
        /// Block lengths: n, lo:hi or lo:hi:step.
        #[arg(long)]
        n: String,
        /// Berry-Esseen constant
        #[arg(long, default_value_t = concentration::DEFAULT_BERRY_ESSEEN_C)]
        berry_esseen_c: f64,
    },
    /// Ensemble-average error probability by exact enumeration, brute force or Monte Carlo.
    Ensemble {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Input distribution: uniform or comma-separated probabilities
        #[arg(long)]
        q: Option<String>,
        /// Rate in nats (bits with --bits)
        #[arg(long)]
        rate: f64,
        /// Block lengths: n, lo:hi or lo:hi:step.
        #[arg(long)]
        n: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
        method: MethodArg,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Slope of log(P_e e^{N E}) against log N from an ensemble CSV.
    Regress {
        /// Ensemble CSV with columns n and p_e
        #[arg(long)]
        input: PathBuf,
        /// Error exponent E in nats (bits with --bits) used in the scaling e^{N E}
        #[arg(long)]
        exponent: f64,
    },
}

#[derive(Args, Debug)]
struct ChannelArgs {
    /// JSON file {"W": [[...]], "Q": [...]} or a preset: bsc:p, bec:e, identity:k, typewriter:k.
    #[arg(long)]
    channel: String,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    Exact,
    Mc,
    Brute,
}

struct Units {
    bits: bool,
}

impl Units {
    fn rate_in(&self, r: f64) -> f64 {
        if self.bits { r * LN_2 } else { r }
    }

    fn rate_out(&self, r: f64) -> f64 {
        if self.bits { r / LN_2 } else { r }
    }
}

fn load_channel(args: &ChannelArgs) -> Result<(Channel, Option<InputDistribution>)> {
    if let Some(w) = parse_preset(&args.channel)? {
        return Ok((w, None));
    }
    let text = fs::read_to_string(&args.channel).with_context(|| format!("reading channel `{}`", args.channel))?;
    let doc = ChannelDocument::from_json(&text)?;
    Ok((doc.w, doc.q))
}

fn resolve_q(arg: Option<&str>, w: &Channel, doc_q: Option<InputDistribution>) -> Result<InputDistribution> {
    match arg {
        Some(s) => Ok(parse_input_distribution(s, w.num_inputs())?),
        None => Ok(doc_q.unwrap_or_else(|| InputDistribution::uniform(w.num_inputs()))),
    }
}

fn parse_n_range(s: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| anyhow!("bad N range `{s}`"));
    let (lo, hi, step) = match parts.as_slice() {
        [n] => (num(n)?, num(n)?, 1),
        [lo, hi] => (num(lo)?, num(hi)?, 1),
        [lo, hi, step] => (num(lo)?, num(hi)?, num(step)?),
        _ => bail!("N range must be n, lo:hi or lo:hi:step, got `{s}`"),
    };
    if lo == 0 || step == 0 || lo > hi {
        bail!("N range `{s}` is empty or starts at 0");
    }
    Ok((lo..=hi).step_by(step).collect())
}

fn parse_rate_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, steps] = parts.as_slice() else { bail!("rates must be lo:hi:steps, got `{s}`") };
    let lo: f64 = lo.trim().parse().map_err(|_| anyhow!("bad rate `{lo}`"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| anyhow!("bad rate `{hi}`"))?;
    let steps: usize = steps.trim().parse().map_err(|_| anyhow!("bad step count `{steps}`"))?;
    if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo > hi || steps == 0 {
        bail!("rate grid `{s}` is empty");
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect())
}

fn check_rate(r: f64) -> Result<()> {
    if !(r.is_finite() && r >= 0.0) {
        bail!("rate must be a finite non-negative number, got {r}");
    }
    Ok(())
}

fn verdict_text(v: &SingularityVerdict) -> String {
    match v.witness {
        Some((x, y, z)) => format!("Nonsingular (witness x={x} y={y} z={z})"),
        None => "Singular".to_string(),
    }
}

fn fmt_q(q: &InputDistribution) -> String {
    let parts: Vec<String> = q.as_slice().iter().map(|v| fmt_f64(*v)).collect();
    format!("[{}]", parts.join(", "))
}

fn analyze(args: &ChannelArgs, units: &Units) -> Result<String> {
    let (w, doc_q) = load_channel(args)?;
    let cfg = OptConfig::default();
    let uniform = InputDistribution::uniform(w.num_inputs());
    let rates = channel_rates(&w, &uniform, &cfg)?;
    let mut out = String::new();
    let mut line = |k: &str, v: String| out.push_str(&format!("{k}: {v}\n"));
    line("inputs", w.num_inputs().to_string());
    line("outputs", w.num_outputs().to_string());
    line("capacity", fmt_f64(units.rate_out(rates.capacity)));
    line("r_infinity_estimate", fmt_f64(units.rate_out(rates.r_infinity_estimate)));
    let mut report = |name: &str, q: &InputDistribution| -> Result<()> {
        let r = channel_rates(&w, q, &cfg)?;
        let v = classify_pair(&w, q)?;
        line(&format!("{name}.q"), fmt_q(q));
        line(&format!("{name}.r_cr"), fmt_f64(units.rate_out(r.r_cr_q)));
        line(&format!("{name}.mutual_information"), fmt_f64(units.rate_out(r.i_q_w)));
        line(&format!("{name}.degenerate"), r.degenerate.to_string());
        line(&format!("{name}.verdict"), verdict_text(&v));
        Ok(())
    };
    report("uniform", &uniform)?;
    if let Some(q) = &doc_q {
        report("document", q)?;
    }
    report("capacity_achieving", &rates.capacity_q)?;
    for (i, (q, _)) in exponents::maximize_eo(&w, 1.0, &cfg)?.iter().enumerate() {
        report(&format!("eo1_maximizer_{i}"), q)?;
    }
    Ok(out)
}

fn exponents_csv(args: &ChannelArgs, grid: &str, units: &Units) -> Result<String> {
    let (w, _) = load_channel(args)?;
    let rates = parse_rate_grid(grid)?;
    let cfg = OptConfig::default();
    let mut t = Table::new(&["rate", "e_r", "rho_star_r", "rho_bar_star_r", "e_sp", "singular_at_rate"]);
    for r_in in rates {
        let r = units.rate_in(r_in);
        let sub = subdifferential_report(&w, r, &cfg)?;
        let sp = esp(&w, r, &cfg)?;
        t.row(vec![
            fmt_f64(r_in),
            fmt_f64(units.rate_out(sub.value)),
            fmt_f64(sub.rho_star_r),
            sub.rho_bar_star_r.map(fmt_f64).unwrap_or_default(),
            fmt_f64(units.rate_out(sp.value)),
            sub.rho_bar_star_r.is_none().to_string(),
        ]);
    }
    t.finish()
}

fn verify(args: &ChannelArgs, q: Option<&str>, rate: f64, units: &Units) -> Result<(String, bool)> {
    let (w, doc_q) = load_channel(args)?;
    let q = resolve_q(q, &w, doc_q)?;
    check_rate(rate)?;
    let report = verify_identities(&w, &q, units.rate_in(rate))?;
    let width = report.rows.iter().map(|r| r.name.len()).max().unwrap_or(8).max(8);
    let mut out = format!("rho_star {}\nsingular {}\n", fmt_f64(report.rho_star), report.singular);
    out.push_str(&format!("{:<width$}  {:>24}  {:>24}  {:>24}\n", "identity", "lhs", "rhs", "|diff|"));
    for r in &report.rows {
        out.push_str(&format!(
            "{:<width$}  {:>24}  {:>24}  {:>24}\n",
            r.name,
            fmt_f64(r.lhs),
            fmt_f64(r.rhs),
            fmt_f64(r.residual())
        ));
    }
    let pass = report.max_residual() <= 1e-8;
    out.push_str(&format!("max residual {} ({})\n", fmt_f64(report.max_residual()), if pass { "ok" } else { "FAIL" }));
    Ok((out, pass))
}

struct BoundRequest<'a> {
    q: Option<&'a str>,
    rate: f64,
    eps: f64,
    criterion: ErrorCriterion,
}

fn compute_bound(w: &Channel, doc_q: Option<InputDistribution>, req: &BoundRequest, cfg: &BoundConfig) -> Result<BoundReport> {
    if req.q == Some("auto") {
        let rep = corollary_report(w, req.rate, req.eps, req.criterion, cfg)?;
        let mut b = rep.bound;
        b.notes.push(format!("regime {:?}, q = {}", rep.regime, fmt_q(&rep.q)));
        return Ok(b);
    }
    let q = resolve_q(req.q, w, doc_q)?;
    let singular = classify_pair(w, &q)?.is_singular();
    let r_cr = eo_rho_derivative(w, &q, 1.0)?;
    if req.rate <= r_cr {
        if !singular {
            bail!("rate {} is at or below the critical rate {r_cr} and the pair is nonsingular", req.rate);
        }
        return Ok(below_critical_singular_bound(w, &q, req.rate, cfg)?);
    }
    if singular {
        Ok(singular_bound(w, &q, req.rate, req.criterion, cfg)?)
    } else {
        Ok(nonsingular_bound(w, &q, req.rate, req.criterion, cfg)?)
    }
}

fn bound_outputs(b: &BoundReport, ns: &[usize], units: &Units) -> Result<(String, String)> {
    let mut t = Table::new(&["n", "bound", "exponent", "prefactor_power"]);
    for &n in ns {
        t.row(vec![
            n.to_string(),
            fmt_f64(b.evaluate(n)),
            fmt_f64(units.rate_out(b.exponent)),
            fmt_f64(b.prefactor_power),
        ]);
    }
    let mut constants: BTreeMap<String, f64> = b.constants.clone();
    constants.insert("leading_constant".into(), b.leading_constant);
    constants.insert("rate_correction".into(), b.rate_correction);
    constants.insert("valid_from_n".into(), b.valid_from_n as f64);
    let finite: BTreeMap<String, serde_json::Value> = constants
        .into_iter()
        .map(|(k, v)| (k, serde_json::Number::from_f64(v).map_or(serde_json::Value::Null, serde_json::Value::Number)))
        .collect();
    Ok((t.finish()?, serde_json::to_string_pretty(&finite)? + "\n"))
}

fn concentration_csv(law: &Path, q: f64, n: &str, berry_esseen_c: f64) -> Result<String> {
    let text = fs::read_to_string(law).with_context(|| format!("reading law `{}`", law.display()))?;
    let law = LawDocument::from_json(&text)?.into_law()?;
    let ns = parse_n_range(n)?;
    let b = scalar_tail_bound(&law, q, berry_esseen_c)?;
    let n_max = *ns.last().expect("non-empty range");
    let tails = exact_tails(&law, n_max, q)?;
    let mut t = Table::new(&["n", "exact_tail", "bound", "ratio"]);
    for n in ns {
        let exact = tails[n - 1];
        let bound = b.bound(n);
        t.row(vec![n.to_string(), fmt_f64(exact), fmt_f64(bound), fmt_f64(exact / bound)]);
    }
    t.finish()
}

fn ensemble_csv(
    args: &ChannelArgs,
    q: Option<&str>,
    rate: f64,
    n: &str,
    method: MethodArg,
    trials: usize,
    seed: u64,
) -> Result<String> {
    let (w, doc_q) = load_channel(args)?;
    let q = resolve_q(q, &w, doc_q)?;
    check_rate(rate)?;
    let ns = parse_n_range(n)?;
    let cfg = EnsembleConfig::default();
    let mut t = Table::new(&["n", "m", "p_e", "ci", "method"]);
    for n in ns {
        let res = match method {
            MethodArg::Exact => exact_ensemble_error(&w, &q, n, rate, &cfg)?,
            MethodArg::Mc => monte_carlo(&w, &q, n, rate, trials, seed, &cfg)?,
            MethodArg::Brute => brute_force(&w, &q, n, message_count(n, rate)?, &cfg)?,
        };
        t.row(vec![
            res.n.to_string(),
            res.m.to_string(),
            fmt_f64(res.p_e_avg),
            fmt_f64(res.ci_halfwidth),
            res.method.as_str().to_string(),
        ]);
    }
    t.finish()
}

fn regress(input: &Path, exponent: f64) -> Result<String> {
    let mut rd = csv::Reader::from_path(input).with_context(|| format!("reading `{}`", input.display()))?;
    let headers = rd.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name)).ok_or_else(|| anyhow!("missing column `{name}`"))
    };
    let (ni, pi) = (col("n")?, col("p_e")?);
    let (mut ns, mut ps) = (Vec::new(), Vec::new());
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let get = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| anyhow!("row {}: bad number in column {i}", line + 2))
        };
        ns.push(get(ni)?);
        ps.push(get(pi)?);
    }
    let fit = slope_fit_points(&ns, &ps, exponent)?;
    let mut t = Table::new(&["slope", "stderr", "intercept", "points"]);
    t.row(vec![fmt_f64(fit.slope), fmt_f64(fit.stderr), fmt_f64(fit.intercept), fit.points.len().to_string()]);
    t.finish()
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("RCBOUND_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow!("RCBOUND_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            bail!("RCBOUND_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

/// Exit status: 0 success, 1 invalid input or failed computation, 2 failed verification.
fn run(cli: Cli) -> Result<u8> {
    configure_threads()?;
    let units = Units { bits: cli.bits };
    let mut status = 0;
    let mut sidecar = None;
    let text = match &cli.command {
        Command::Analyze(ch) => analyze(ch, &units)?,
        Command::Exponents { channel, rates } => exponents_csv(channel, rates, &units)?,
        Command::Verify { channel, q, rate } => {
            let (text, pass) = verify(channel, q.as_deref(), *rate, &units)?;
            if !pass {
                status = 2;
            }
            text
        }
        Command::Bound { channel, q, rate, esseen_c, berry_esseen_c, eps, n, maximal, constants } => {
            let (w, doc_q) = load_channel(channel)?;
            check_rate(*rate)?;
            let ns = parse_n_range(n)?;
            if !(*eps > 0.0) {
                bail!("--eps must be positive");
            }
            let cfg = BoundConfig { esseen_c: *esseen_c, berry_esseen_c: *berry_esseen_c, ..BoundConfig::default() };
            let criterion = if *maximal { ErrorCriterion::Maximal } else { ErrorCriterion::Average };
            let req = BoundRequest { q: q.as_deref(), rate: units.rate_in(*rate), eps: *eps, criterion };
            let b = compute_bound(&w, doc_q, &req, &cfg)?;
            for note in &b.notes {
                eprintln!("note: {note}");
            }
            eprintln!("branch: {:?}, valid from N = {}", b.branch, b.valid_from_n);
            let (csv, json) = bound_outputs(&b, &ns, &units)?;
            let path = constants.clone().or_else(|| cli.out.as_ref().map(|p| p.with_extension("constants.json")));
            if let Some(p) = path {
                sidecar = Some((p, json));
            }
            csv
        }
        Command::Concentration { law, q, n, berry_esseen_c } => concentration_csv(law, *q, n, *berry_esseen_c)?,
        Command::Ensemble { channel, q, rate, n, method, trials, seed } => {
            ensemble_csv(channel, q.as_deref(), units.rate_in(*rate), n, *method, *trials, *seed)?
        }
        Command::Regress { input, exponent } => regress(input, units.rate_in(*exponent))?,
    };
    // Everything is computed before anything is written.
    match &cli.out {
        Some(p) => output::write_atomic(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    if let Some((p, json)) = sidecar {
        output::write_atomic(&p, json.as_bytes())?;
    }
    Ok(status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
