//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 domain or regime error, 4 I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::blocks::{block, kappa, n_k, XiClass};
use crate::bounds::sharp_lower_bound;
use crate::dist::{interval_prob, tomaszewski_count, xi_prob, ProbabilityValue};
use crate::error::Error;
use crate::exact::ExactRational;
use crate::verify::{self, VerificationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_IO: i32 = 4;

const DECIMAL_DIGITS: usize = 12;
const FIGURE_MAX_N: u64 = 200;

#[derive(Debug, Parser)]
#[command(name = "rademacher", version, about = "Exact probabilities and sharp lower bounds for Rademacher sums")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// P{|S_n| <= k} or P{|S_n| <= xi*sqrt(n)} with q = xi^2.
    Prob {
        #[arg(long)]
        n: u64,
        #[arg(long, conflicts_with = "q", required_unless_present = "q", allow_negative_numbers = true)]
        k: Option<i64>,
        #[arg(long, allow_negative_numbers = true)]
        q: Option<ExactRational>,
        #[arg(long)]
        json: bool,
    },
    /// Sharp lower bound for q = xi^2 in (0, 1].
    Bound {
        #[arg(long, allow_negative_numbers = true)]
        q: ExactRational,
        #[arg(long)]
        json: bool,
    },
    /// Block table n_k, C_k and block minima.
    Blocks {
        #[arg(long, allow_negative_numbers = true)]
        q: ExactRational,
        #[arg(long, default_value_t = 6)]
        k_max: u64,
        #[arg(long)]
        json: bool,
    },
    /// CSV of P{|S_n| <= l} for n + l even, 0 <= l <= n <= N.
    Figure {
        #[arg(short = 'N', long = "n-max", default_value_t = 20)]
        n_max: u64,
        #[arg(long, default_value = "1")]
        q: ExactRational,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run verification suites and print JSON reports.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value = "1")]
        q: ExactRational,
        #[arg(long, default_value_t = verify::DEFAULT_K_MAX)]
        k_max: u64,
        #[arg(long, default_value_t = verify::DEFAULT_N_CAP)]
        n_cap: u64,
        /// Range of the identity sweep.
        #[arg(long, default_value_t = verify::DEFAULT_REMARK_N_MAX)]
        n_max: u64,
        /// Include the q = 10201/10000 counterexample.
        #[arg(long)]
        slow: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate P{|sum a_i e_i| <= t} for explicit rational weights.
    Conjecture {
        #[arg(long = "w", value_delimiter = ',', required = true, allow_negative_numbers = true)]
        weights: Vec<ExactRational>,
        #[arg(long, default_value = "1")]
        t: ExactRational,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Remark,
    Mainthm,
    Lemma,
    Theorem1,
    Counterexamples,
    All,
}

enum Failure {
    Domain(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing normal output to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_DOMAIN
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(err, "i/o error: {msg}");
            EXIT_IO
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Prob { n, k, q, json } => cmd_prob(n, k, q, json, out),
        Command::Bound { q, json } => cmd_bound(q, json, out),
        Command::Blocks { q, k_max, json } => cmd_blocks(q, k_max, json, out),
        Command::Figure { n_max, q, out: path } => cmd_figure(n_max, q, &path, out),
        Command::Verify {
            suite,
            q,
            k_max,
            n_cap,
            n_max,
            slow,
            out: path,
        } => cmd_verify(suite, q, k_max, n_cap, n_max, slow, path.as_deref(), out),
        Command::Conjecture { weights, t, json } => cmd_conjecture(&weights, &t, json, out),
    }
}

fn exact_and_decimal(p: &ProbabilityValue) -> serde_json::Value {
    json!({ "exact": p.to_string(), "decimal": p.to_decimal(DECIMAL_DIGITS) })
}

fn print_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn cmd_prob(
    n: u64,
    k: Option<i64>,
    q: Option<ExactRational>,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let p = match (k, &q) {
        (Some(k), _) => interval_prob(n, k),
        (None, Some(q)) => xi_prob(n, q)?,
        (None, None) => unreachable!("clap requires one of --k and --q"),
    };
    if json {
        print_json(out, &json!({ "n": n, "k": k, "q": q.map(|q| q.to_string()), "probability": exact_and_decimal(&p) }))?;
    } else {
        writeln!(out, "{p}\t{}", p.to_decimal(DECIMAL_DIGITS))?;
    }
    Ok(EXIT_OK)
}

fn cmd_bound(q: ExactRational, json: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    let xi = XiClass::new(q)?;
    let report = sharp_lower_bound(&xi)?;
    if json {
        print_json(out, &report)?;
    } else {
        writeln!(out, "q               {}", report.q)?;
        writeln!(out, "n1              {}", report.n1)?;
        writeln!(out, "n2              {}", report.n2)?;
        writeln!(out, "sharp_bound     {}\t{}", report.sharp_bound, report.sharp_bound_decimal)?;
        writeln!(out, "valid_for       n >= {}", report.n1)?;
        writeln!(
            out,
            "chebyshev       {}\t{}",
            report.chebyshev_bound,
            report.chebyshev_bound.to_decimal(DECIMAL_DIGITS)
        )?;
        writeln!(out, "normal_limit    {:.12}", report.normal_limit)?;
        writeln!(out, "note            {}", report.limit_note)?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct BlockRow {
    k: u64,
    n_k: Option<u64>,
    first: u64,
    last: u64,
    q_minus: serde_json::Value,
}

fn cmd_blocks(q: ExactRational, k_max: u64, json: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    let xi = XiClass::new(q)?;
    let mut rows = Vec::new();
    for k in 0..=k_max {
        let b = match block(k, &xi) {
            Ok(b) => b,
            Err(_) if k == 0 => continue,
            Err(e) => return Err(e.into()),
        };
        rows.push(BlockRow {
            k,
            n_k: (k >= 1).then(|| n_k(k, &xi)),
            first: b.n_lo,
            last: b.n_last(),
            q_minus: exact_and_decimal(&b.q_minus),
        });
    }
    if json {
        print_json(
            out,
            &json!({ "q": xi.q().to_string(), "guaranteed_regime": xi.guaranteed_regime(), "blocks": rows }),
        )?;
    } else {
        if !xi.guaranteed_regime() {
            writeln!(out, "# q > 1: block minima are not guaranteed to increase")?;
        }
        writeln!(out, "{:>4} {:>8} {:>18}  {}", "k", "n_k", "C_k", "Q_k-")?;
        for r in rows {
            let nk = r.n_k.map_or("-".to_string(), |v| v.to_string());
            writeln!(
                out,
                "{:>4} {:>8} {:>18}  {}\t{}",
                r.k,
                nk,
                format!("[{},{}]", r.first, r.last),
                r.q_minus["exact"].as_str().unwrap_or_default(),
                r.q_minus["decimal"].as_str().unwrap_or_default(),
            )?;
        }
    }
    Ok(EXIT_OK)
}

/// One CSV row: `P{|S_n| ≤ ell}` and whether `ell = κ(n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FigureRow {
    pub n: u64,
    pub ell: u64,
    pub prob: ProbabilityValue,
    pub is_xi_point: bool,
}

pub fn figure_rows(n_max: u64, xi: &XiClass) -> Vec<FigureRow> {
    let mut rows = Vec::new();
    for n in 0..=n_max {
        let kap = kappa(n, xi);
        for ell in (n % 2..=n).step_by(2) {
            rows.push(FigureRow {
                n,
                ell,
                prob: interval_prob(n, ell as i64),
                is_xi_point: kap == ell as i64,
            });
        }
    }
    rows
}

pub fn figure_csv(rows: &[FigureRow]) -> String {
    let mut csv = String::from("n,ell,prob_exact,prob_decimal,is_xi_point\n");
    for r in rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            r.ell,
            r.prob,
            r.prob.to_decimal(DECIMAL_DIGITS),
            r.is_xi_point
        ));
    }
    csv
}

/// `n_k ≤ n_max`, the left edges of the blocks inside the plotted range.
pub fn block_boundaries(n_max: u64, xi: &XiClass) -> Vec<(u64, u64)> {
    (1..)
        .map(|k| (k, n_k(k, xi)))
        .take_while(|&(_, n)| n <= n_max)
        .collect()
}

/// `figure.csv` → `figure.boundaries.csv`
pub fn boundaries_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.boundaries.csv"))
}

fn cmd_figure(n_max: u64, q: ExactRational, path: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    if n_max > FIGURE_MAX_N {
        return Err(Failure::Domain(format!("N must be at most {FIGURE_MAX_N}, got {n_max}")));
    }
    let xi = XiClass::new(q)?;
    fs::write(path, figure_csv(&figure_rows(n_max, &xi)))?;
    let bounds = block_boundaries(n_max, &xi);
    let mut csv = String::from("k,n_k\n");
    for (k, n) in &bounds {
        csv.push_str(&format!("{k},{n}\n"));
    }
    let companion = boundaries_path(path);
    fs::write(&companion, csv)?;
    let listed: Vec<String> = bounds.iter().map(|(k, n)| format!("n_{k}={n}")).collect();
    writeln!(out, "wrote {}", path.display())?;
    writeln!(out, "wrote {}", companion.display())?;
    writeln!(out, "block boundaries: {}", listed.join(", "))?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    suite: Suite,
    q: ExactRational,
    k_max: u64,
    n_cap: u64,
    n_max: u64,
    slow: bool,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let xi = XiClass::new(q)?;
    let wants = |s: Suite| suite == s || suite == Suite::All;
    let mut reports: Vec<VerificationReport> = Vec::new();
    let mut records = Vec::new();
    if wants(Suite::Remark) {
        reports.push(verify::verify_remark(n_max)?);
    }
    if wants(Suite::Mainthm) {
        reports.push(verify::verify_mainthm(k_max, n_cap));
    }
    if wants(Suite::Lemma) {
        reports.push(verify::verify_lemma(k_max, n_cap));
    }
    if wants(Suite::Theorem1) {
        reports.push(verify::verify_theorem1(&xi, k_max));
        reports.push(verify::verify_chain(&xi, k_max));
    }
    if wants(Suite::Counterexamples) {
        records = verify::check_counterexamples(slow);
        reports.push(verify::counterexamples_report(&records));
    }
    let ok = reports.iter().all(VerificationReport::acceptable);
    let doc = json!({
        "suite": format!("{suite:?}").to_lowercase(),
        "passed": ok,
        "reports": reports,
        "counterexamples": records,
    });
    match path {
        Some(p) => {
            let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Io(e.to_string()))?;
            fs::write(p, text + "\n")?;
            for r in &reports {
                writeln!(out, "{:<22} {:<12} checks={}", r.claim_id, format!("{:?}", r.status).to_lowercase(), r.checks_run)?;
            }
        }
        None => print_json(out, &doc)?,
    }
    Ok(if ok { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn cmd_conjecture(
    weights: &[ExactRational],
    t: &ExactRational,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let outcome = tomaszewski_count(weights, t)?;
    let half = ExactRational::new(1, 2).expect("literal");
    let at_least_half = *outcome.probability.value() >= half;
    if json {
        print_json(
            out,
            &json!({
                "probability": exact_and_decimal(&outcome.probability),
                "sum_of_squares": outcome.sum_of_squares.to_string(),
                "hits": outcome.hits,
                "total": outcome.total,
                "at_least_half": at_least_half,
            }),
        )?;
    } else {
        writeln!(out, "probability     {}\t{}", outcome.probability, outcome.probability.to_decimal(DECIMAL_DIGITS))?;
        writeln!(out, "sum_of_squares  {}", outcome.sum_of_squares)?;
        writeln!(out, "at_least_half   {at_least_half}")?;
    }
    Ok(EXIT_OK)
}
