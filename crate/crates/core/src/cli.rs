//! Command-line front end.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::bound::{sweep_range, BoundOptions, BoundResult, Pencil};
use crate::certificate::{self, CertificateReport};
use crate::error::{Error, Result};
use crate::moments::{Domain, MomentTable};
use crate::poly::{parse_polynomial, Polynomial};
use crate::sampler;
use crate::testfns::{self, GoldenRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CONDITIONING: i32 = 3;
pub const EXIT_GOLDEN: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "lasserre-bounds", version, about = "Measure-based upper bounds for polynomial minimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Upper bounds for one or more orders r.
    Bound(BoundArgs),
    /// Draw points from the optimal density at order r.
    Sample(SampleArgs),
    /// Rate certificate built from a truncated Gaussian density.
    Certificate(CertificateArgs),
    /// Recompute the shipped reference values and compare.
    Bench(BenchArgs),
    /// Print the test-function catalog as JSON.
    Catalog(CatalogArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Catalog function name.
    #[arg(long = "fn", value_name = "NAME", conflicts_with = "poly")]
    pub function: Option<String>,
    /// Inline polynomial in x1..xn; requires --domain.
    #[arg(long, requires = "domain")]
    pub poly: Option<String>,
    /// Domain as JSON, e.g. '{"kind":"box","bounds":[["0","1"]]}'.
    #[arg(long, conflicts_with = "function")]
    pub domain: Option<String>,
    /// Dimension of parametric catalog families.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug)]
pub struct Output {
    /// Emit JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[command(flatten)]
    pub source: Source,
    /// Order, either `r` or an inclusive range `a..b`.
    #[arg(long, value_parser = parse_order_range)]
    pub r: (u32, u32),
    /// Map boxes to [-1,1]^n before assembly.
    #[arg(long)]
    pub rescale: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_parser = parse_single_order)]
    pub r: u32,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Markov check parameter; the check runs when f_min is known.
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    /// Known minimum, overriding the catalog value.
    #[arg(long = "f-min", allow_hyphen_values = true)]
    pub f_min: Option<f64>,
    #[arg(long)]
    pub rescale: bool,
    /// Points go to this CSV file, with a JSON sidecar next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct CertificateArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_parser = parse_order_range)]
    pub r: (u32, u32),
    /// Minimizer as a comma list; defaults to the catalog minimizer.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Option<Vec<f64>>,
    #[arg(long = "f-min", allow_hyphen_values = true)]
    pub f_min: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Restrict to one group of the reference file: box, highdim or simplex-ball.
    #[arg(long)]
    pub group: Option<String>,
    /// Also recompute the report-only rows (large orders and dimensions).
    #[arg(long)]
    pub stretch: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct CatalogArgs {
    /// Dimension used for parametric families.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_order_range(s: &str) -> std::result::Result<(u32, u32), String> {
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), s.trim()),
    };
    let lo: u32 = lo.parse().map_err(|_| format!("invalid order {lo:?}"))?;
    let hi: u32 = hi.parse().map_err(|_| format!("invalid order {hi:?}"))?;
    if lo < 1 || hi < lo {
        return Err(format!("order range {s:?} must satisfy 1 <= a <= b"));
    }
    Ok((lo, hi))
}

fn parse_single_order(s: &str) -> std::result::Result<u32, String> {
    match parse_order_range(s)? {
        (lo, hi) if lo == hi => Ok(lo),
        _ => Err("a single order is required here".into()),
    }
}

/// A resolved function source.
pub struct Problem {
    pub label: String,
    pub f: Polynomial,
    pub domain: Domain,
    pub f_min: Option<f64>,
    pub minimizer: Option<Vec<f64>>,
}

pub fn resolve(src: &Source) -> Result<Problem> {
    match (&src.function, &src.poly) {
        (Some(name), None) => {
            let tc = testfns::get(name, src.n)?;
            Ok(Problem {
                label: tc.name.to_string(),
                minimizer: tc.minimizers.first().cloned(),
                f_min: Some(tc.f_min),
                f: tc.polynomial,
                domain: tc.domain,
            })
        }
        (None, Some(text)) => {
            let raw = src.domain.as_deref().ok_or_else(|| Error::InvalidArgument("--poly requires --domain".into()))?;
            let domain: Domain = serde_json::from_str(raw).map_err(|e| Error::InvalidDomain(e.to_string()))?;
            let f = parse_polynomial(text, domain.dim())?;
            Ok(Problem { label: text.clone(), f, domain, f_min: None, minimizer: None })
        }
        _ => Err(Error::InvalidArgument("give exactly one of --fn or --poly".into())),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Conditioning { .. } => EXIT_CONDITIONING,
        Error::DegeneratePrefix { .. } | Error::NotNormalized { .. } => EXIT_RUNTIME,
        _ => EXIT_CONFIG,
    }
}

fn sink<'a>(path: &Option<PathBuf>, stdout: &'a mut dyn Write) -> io::Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Bound(a) => cmd_bound(&a, stdout, stderr),
        Command::Sample(a) => cmd_sample(&a, stdout, stderr),
        Command::Certificate(a) => cmd_certificate(&a, stdout),
        Command::Bench(a) => cmd_bench(&a, stdout, stderr),
        Command::Catalog(a) => cmd_catalog(&a, stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(CliError::Lib(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(CliError::Io(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

#[derive(Debug)]
enum CliError {
    Lib(Error),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult = std::result::Result<i32, CliError>;

#[derive(Serialize)]
struct BoundRow {
    r: u32,
    value: Option<f64>,
    cond_b: Option<f64>,
    cond_b_raw: Option<f64>,
    residual: Option<f64>,
    seconds: Option<f64>,
    status: String,
}

impl BoundRow {
    fn ok(res: &BoundResult) -> Self {
        BoundRow {
            r: res.r,
            value: Some(res.value),
            cond_b: Some(res.cond_b),
            cond_b_raw: Some(res.cond_b_raw),
            residual: Some(res.residual),
            seconds: Some(res.seconds),
            status: "ok".into(),
        }
    }

    fn failed(r: u32, status: &str) -> Self {
        BoundRow { r, value: None, cond_b: None, cond_b_raw: None, residual: None, seconds: None, status: status.into() }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn cmd_bound(args: &BoundArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let p = resolve(&args.source)?;
    let (lo, hi) = args.r;
    let outcome = sweep_range(&p.f, &p.domain, lo, hi, BoundOptions { rescale: args.rescale })?;
    let mut rows: Vec<BoundRow> = outcome.results.iter().map(BoundRow::ok).collect();
    let mut code = EXIT_OK;
    if let Some(w) = &outcome.warning {
        let _ = writeln!(stderr, "warning: r={}: {}", w.r, w.error);
        code = EXIT_CONDITIONING;
        for r in w.r..=hi {
            rows.push(BoundRow::failed(r, "conditioning"));
        }
    }
    let mut out = sink(&args.output.out, stdout)?;
    if args.output.json {
        let doc = json!({ "function": p.label, "domain": p.domain, "rescale": args.rescale, "rows": rows });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializable"))?;
    } else {
        writeln!(out, "r,value,cond_b,cond_b_raw,residual,seconds,status")?;
        for row in &rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.r,
                opt(row.value),
                opt(row.cond_b),
                opt(row.cond_b_raw),
                opt(row.residual),
                opt(row.seconds),
                row.status
            )?;
        }
    }
    out.flush()?;
    Ok(code)
}

fn cmd_sample(args: &SampleArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let p = resolve(&args.source)?;
    if let Domain::Ball { .. } = p.domain {
        return Err(Error::UnsupportedDomain("ball").into());
    }
    let res = crate::bound::compute_bound_with(&p.f, &p.domain, args.r, BoundOptions { rescale: args.rescale })?;
    let chain = sampler::build_chain(&res.density, &p.domain)?;
    let batch = sampler::sample(&chain, &p.f, args.count, args.seed)?;
    let summary = sampler::summarize(&batch.values);
    let f_min = args.f_min.or(p.f_min);
    let markov = match f_min {
        Some(m) if res.value >= m => {
            let freq = sampler::markov_check(&p.f, &batch, res.value, m, args.eps)?;
            Some((freq, 1.0 / (1.0 + args.eps)))
        }
        Some(m) => {
            let _ = writeln!(stderr, "warning: bound {} is below f_min {m}; Markov check skipped", res.value);
            None
        }
        None => None,
    };
    if let Some(path) = &args.out {
        sampler::write_csv(&batch, BufWriter::new(File::create(path)?))?;
        let side = sidecar_path(path);
        let doc = sampler::sidecar_json(&batch, res.value, &p.domain);
        std::fs::write(side, serde_json::to_string_pretty(&doc).expect("serializable"))?;
    }
    if args.json {
        let doc = json!({
            "function": p.label,
            "r": args.r,
            "seed": args.seed,
            "bound": res.value,
            "summary": summary,
            "markov": markov.map(|(freq, cap)| json!({ "eps": args.eps, "frequency": freq, "cap": cap })),
        });
        writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).expect("serializable"))?;
    } else {
        writeln!(stdout, "count,mean,variance,min,std_error,bound,eps,markov_frequency,markov_cap")?;
        writeln!(
            stdout,
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{},{}",
            summary.count,
            summary.mean,
            summary.variance,
            summary.min,
            summary.std_error,
            res.value,
            args.eps,
            opt(markov.map(|m| m.0)),
            opt(markov.map(|m| m.1)),
        )?;
    }
    Ok(EXIT_OK)
}

/// `points.csv` → `points.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn cmd_certificate(args: &CertificateArgs, stdout: &mut dyn Write) -> CliResult {
    let p = resolve(&args.source)?;
    let a = args
        .a
        .clone()
        .or_else(|| p.minimizer.clone())
        .ok_or_else(|| Error::InvalidArgument("--a is required for inline polynomials".into()))?;
    let f_min = match args.f_min.or(p.f_min) {
        Some(m) => m,
        None => p.f.evaluate(&a)?,
    };
    let (lo, hi) = args.r;
    let table = MomentTable::new(&p.domain, 4 * hi + p.f.degree());
    let reports: Vec<CertificateReport> = (lo..=hi)
        .map(|r| certificate::certificate_with_table(&p.f, &table, &a, r, f_min))
        .collect::<Result<_>>()?;
    let mut out = sink(&args.output.out, stdout)?;
    if args.output.json || lo == hi {
        let doc = if lo == hi { serde_json::to_value(&reports[0]) } else { serde_json::to_value(&reports) };
        writeln!(out, "{}", serde_json::to_string_pretty(&doc.expect("serializable")).expect("serializable"))?;
    } else {
        writeln!(out, "r,sigma,eps,C_Ka,c_rKa,f_rKa,f_min,M_f,zeta,rhs,holds")?;
        for rep in &reports {
            writeln!(
                out,
                "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{}",
                rep.r,
                rep.sigma,
                rep.eps,
                rep.c_ka,
                rep.c_rka,
                rep.f_rka,
                rep.f_min,
                rep.m_f,
                rep.zeta,
                rep.rhs,
                serde_json::to_value(rep.holds).expect("serializable").to_string().trim_matches('"'),
            )?;
        }
    }
    out.flush()?;
    Ok(EXIT_OK)
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub group: String,
    pub function: String,
    pub n: usize,
    pub r: u32,
    pub golden: f64,
    pub value: Option<f64>,
    pub delta: Option<f64>,
    pub tolerance: Option<f64>,
    pub relative: bool,
    pub seconds: Option<f64>,
    /// `pass`, `fail`, `report` or `conditioning`.
    pub status: String,
}

/// Recomputes the selected reference rows, grouping by function so each pencil is built once.
pub fn run_bench(rows: &[GoldenRow]) -> Result<Vec<BenchRow>> {
    let mut groups: BTreeMap<(String, usize), Vec<&GoldenRow>> = BTreeMap::new();
    for row in rows {
        groups.entry((row.function.clone(), row.n)).or_default().push(row);
    }
    let mut values: BTreeMap<(String, usize, u32), std::result::Result<(f64, f64), Error>> = BTreeMap::new();
    for ((name, n), group) in &groups {
        let tc = testfns::get(name, Some(*n))?;
        let r_max = group.iter().map(|g| g.r).max().expect("non-empty group");
        let table = MomentTable::new(&tc.domain, 2 * r_max + tc.polynomial.degree());
        let pencil = Pencil::new(&tc.polynomial, &table, r_max)?;
        let mut failed: Option<Error> = None;
        let mut orders: Vec<u32> = group.iter().map(|g| g.r).collect();
        orders.sort_unstable();
        orders.dedup();
        for r in orders {
            let entry = match &failed {
                Some(e) => Err(e.clone()),
                None => match pencil.solve(r) {
                    Ok(res) => Ok((res.value, res.seconds)),
                    Err(e @ Error::Conditioning { .. }) => {
                        failed = Some(e.clone());
                        Err(e)
                    }
                    Err(e) => return Err(e),
                },
            };
            values.insert((name.clone(), *n, r), entry);
        }
    }
    Ok(rows
        .iter()
        .map(|g| {
            let (value, seconds) = match &values[&(g.function.clone(), g.n, g.r)] {
                Ok((v, s)) => (Some(*v), Some(*s)),
                Err(_) => (None, None),
            };
            let delta = value.map(|v| if g.relative { (v - g.value) / g.value.abs() } else { v - g.value });
            let status = match (value, g.tolerance, delta) {
                (None, _, _) => "conditioning",
                (Some(_), None, _) => "report",
                (Some(_), Some(tol), Some(d)) if d.abs() <= tol => "pass",
                _ => "fail",
            };
            BenchRow {
                group: g.group.clone(),
                function: g.function.clone(),
                n: g.n,
                r: g.r,
                golden: g.value,
                value,
                delta,
                tolerance: g.tolerance,
                relative: g.relative,
                seconds,
                status: status.into(),
            }
        })
        .collect())
}

fn cmd_bench(args: &BenchArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let rows: Vec<GoldenRow> = testfns::golden()
        .into_iter()
        .filter(|g| args.group.as_deref().is_none_or(|t| t == g.group))
        .filter(|g| args.stretch || g.tolerance.is_some())
        .collect();
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no reference rows selected".into()).into());
    }
    let bench = run_bench(&rows)?;
    let mut out = sink(&args.output.out, stdout)?;
    if args.output.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&bench).expect("serializable"))?;
    } else {
        writeln!(out, "group,function,n,r,golden,value,delta,tolerance,kind,seconds,status")?;
        for b in &bench {
            writeln!(
                out,
                "{},{},{},{},{:?},{},{},{},{},{},{}",
                b.group,
                b.function,
                b.n,
                b.r,
                b.golden,
                opt(b.value),
                opt(b.delta),
                opt(b.tolerance),
                if b.tolerance.is_none() { "report" } else if b.relative { "rel" } else { "abs" },
                opt(b.seconds),
                b.status
            )?;
        }
    }
    out.flush()?;
    let failures: Vec<&BenchRow> = bench.iter().filter(|b| b.status == "fail").collect();
    let asserted_conditioning = bench.iter().any(|b| b.status == "conditioning" && b.tolerance.is_some());
    for b in &failures {
        let _ = writeln!(
            stderr,
            "mismatch: {} {} n={} r={}: {} vs {} (delta {:.3e}, tolerance {:e})",
            b.group,
            b.function,
            b.n,
            b.r,
            b.value.unwrap_or(f64::NAN),
            b.golden,
            b.delta.unwrap_or(f64::NAN),
            b.tolerance.unwrap_or(f64::NAN)
        );
    }
    Ok(if !failures.is_empty() || asserted_conditioning { EXIT_GOLDEN } else { EXIT_OK })
}

fn cmd_catalog(args: &CatalogArgs, stdout: &mut dyn Write) -> CliResult {
    let doc = testfns::catalog_json(args.n)?;
    let mut out = sink(&args.out, stdout)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializable"))?;
    out.flush()?;
    Ok(EXIT_OK)
}
