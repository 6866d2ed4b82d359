//! Command-line front door: model files in, CSV or JSON out.
//!
//! Every numeric value is printed with 17 significant digits so that doubles
//! survive a round trip through the text output. CSV uses a comma separator,
//! `.` decimal point, LF line endings, and always starts with a header row.
//! JSON output never contains NaN or infinities; quantities that do not
//! exist for a model are emitted as null.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 parse error (flags or model
//! JSON), 3 domain or size-cap error, 4 unsupported regime, 5 validation
//! suite failure.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use permcycles::asymptotics;
use permcycles::exact_stats;
use permcycles::limitlaws;
use permcycles::sampler::McConfig;
use permcycles::series::SeriesTable;
use permcycles::spatial_bridge::{self, Family, SpatialConfig};
use permcycles::validation::{self, StudyQuantity, Suite};
use permcycles::{Error, WeightModel};

/// Largest N the exact subcommands accept. The table behind them costs
/// O(N^2) time, so this keeps any single invocation comfortably interactive.
const EXACT_N_CAP: usize = 20_000;

#[derive(Parser)]
#[command(
    name = "permcycles",
    version,
    about = "Exact statistics, sampling, and asymptotics of random permutations with size-coupled cycle weights",
    after_help = "Exit codes: 1 I/O, 2 parse, 3 domain, 4 unsupported regime, 5 validation failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for sampling (falls back to PERMCYCLES_THREADS, then
    /// all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the primary output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Table output format. Reports that are JSON by nature ignore this.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Exact finite-N quantities from the weight recurrence.
    Exact(ExactArgs),
    /// Draw exact samples of cycle types and summarize them.
    Sample(SampleArgs),
    /// Regime classification and closed-form growth and fluctuation laws.
    Asymp(AsympArgs),
    /// Draw from the limiting laws themselves.
    Limitlaws(LimitArgs),
    /// Lattice sums, thermodynamic integrals, and the gap between them.
    Spatial(SpatialArgs),
    /// Run the cross-check suite and emit a JSON report.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ExactArgs {
    /// JSON model file (see `--dump-model` for the canonical shape).
    #[arg(long)]
    model: PathBuf,
    /// Number of points N.
    #[arg(long)]
    n: Option<usize>,
    /// Inclusive grid a:b:step of N values (partition only).
    #[arg(long, value_name = "A:B:STEP")]
    n_grid: Option<String>,
    /// Quantity to compute.
    #[arg(long, value_enum)]
    what: ExactWhat,
    /// Cutoff K for long-fraction, or j cap for cycle-counts.
    #[arg(long)]
    k: Option<usize>,
    /// Echo the parsed model as canonical JSON and exit.
    #[arg(long)]
    dump_model: bool,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ExactWhat {
    /// log H_N.
    Partition,
    /// E[C_j] for j = 1..cap.
    CycleCounts,
    /// P(L_1 = l), the length of the cycle containing a marked point.
    L1,
    /// The full pmf of the number of cycles T_N.
    TnDist,
    /// Expected fraction of points in cycles longer than K.
    LongFraction,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    n: usize,
    /// Number of permutations to draw.
    #[arg(long)]
    samples: usize,
    /// RNG seed; identical seeds give byte-identical output.
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    dump_model: bool,
}

#[derive(Args)]
struct AsympArgs {
    #[arg(long)]
    model: PathBuf,
    /// Also evaluate the growth law (and the exact value when affordable).
    #[arg(long)]
    n: Option<usize>,
    /// Convergence study over an inclusive grid a:b:step; emits a table.
    #[arg(long, value_name = "A:B:STEP")]
    n_grid: Option<String>,
    /// Quantity for the grid study.
    #[arg(long, value_enum, default_value_t = StudyWhat::Partition)]
    what: StudyWhat,
    /// Index j (cycle-fraction) or cutoff K (long-fraction) for the study.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    dump_model: bool,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum StudyWhat {
    Partition,
    CycleFraction,
    LongFraction,
}

#[derive(Args)]
struct LimitArgs {
    /// Which limiting object to draw from.
    #[arg(long, value_enum)]
    what: LimitWhat,
    /// Survival parameter nu-tilde in (0, 1].
    #[arg(long)]
    nu: Option<f64>,
    /// Boundary exponent theta-star (the GEM/PD parameter).
    #[arg(long)]
    theta_star: Option<f64>,
    /// Model file; required for tn-limit, which reads its fluctuation law.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    /// Coordinates per row for the vector-valued laws.
    #[arg(long, default_value_t = 8)]
    k: usize,
    /// Truncation length of each stick-breaking path.
    #[arg(long, default_value_t = 256)]
    n_terms: usize,
    #[arg(long)]
    dump_model: bool,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum LimitWhat {
    /// GEM(theta-star) stick fractions, in break order.
    Gem,
    /// Poisson-Dirichlet: GEM ranked descending.
    Pd,
    /// Delayed stick-breaking with survival parameter nu.
    Stick,
    /// Degenerate theta-star = 0 path: one giant bite.
    StickDegenerate,
    /// Standardized limit of the total cycle count for --model.
    TnLimit,
}

#[derive(Args)]
struct SpatialArgs {
    /// Interaction family of the underlying lattice allocation.
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Stable index in (0, 2); required for --family stable.
    #[arg(long)]
    gamma: Option<f64>,
    /// Spatial dimension.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Comma-separated box side lengths.
    #[arg(long, value_name = "L1,L2,..")]
    l_list: String,
    /// Comma-separated cycle lengths j.
    #[arg(long, value_name = "J1,J2,..")]
    j_list: String,
    /// Point density of the allocation.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, value_enum)]
    what: SpatialWhat,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FamilyArg {
    Gaussian,
    Stable,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SpatialWhat {
    /// d-dimensional lattice sum (Riemann sum of the interaction kernel).
    Lattice,
    /// Thermodynamic integral the lattice sum converges to.
    Integral,
    /// Finite-volume correction: lattice sum minus integral.
    Delta,
    /// Dual-sum evaluation of the lattice sum where a closed form exists.
    Dual,
    /// Order parameter eta = L j^(-1/tail exponent).
    Eta,
    /// Shape heuristic for the correction in the eta = O(1) window.
    Heuristic,
    /// Kappa sequence the family induces in the continuum limit (JSON).
    Kappa,
    /// Check that the universal tail deviation decays along l-list (JSON).
    TailCheck,
}

#[derive(Args)]
struct ValidateArgs {
    /// quick: brute-force agreement; full: adds convergence studies.
    #[arg(long, value_enum, default_value_t = SuiteArg::Quick)]
    suite: SuiteArg,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SuiteArg {
    Quick,
    Full,
}

// ---------------------------------------------------------------------------
// Error plumbing

enum CliError {
    Io(std::io::Error),
    Parse(String),
    Lib(Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Lib(Error::Config(_) | Error::Domain(_) | Error::SizeLimit(_)) => 3,
            CliError::Lib(Error::UnsupportedRegime(_)) => 4,
            CliError::Lib(Error::Validation(_)) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

// ---------------------------------------------------------------------------
// Output helpers

/// 17 significant digits: enough for a lossless f64 round trip.
fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

enum Cell {
    Int(u64),
    Float(f64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_f(*v),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => serde_json::json!(v),
            Cell::Float(v) if v.is_finite() => serde_json::json!(v),
            Cell::Float(_) => serde_json::Value::Null,
        }
    }
}

struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = self.columns.join(",");
                s.push('\n');
                for row in &self.rows {
                    let line: Vec<String> = row.iter().map(Cell::csv).collect();
                    s.push_str(&line.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: serde_json::Map<String, serde_json::Value> = self
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(c, cell)| (c.to_string(), cell.json()))
                            .collect();
                        serde_json::Value::Object(obj)
                    })
                    .collect();
                let mut s = serde_json::to_string_pretty(&rows).expect("table is plain data");
                s.push('\n');
                s
            }
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Shared parsing

fn load_model(path: &Path) -> CliResult<WeightModel> {
    let raw = fs::read_to_string(path)
        .map_err(|e| CliError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let model: WeightModel = serde_json::from_str(&raw)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    model.validate()?;
    Ok(model)
}

fn dump_model(out: &Option<PathBuf>, model: &WeightModel) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(model).expect("model is plain data");
    s.push('\n');
    emit(out, &s)
}

fn parse_grid(spec: &str) -> CliResult<Vec<usize>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Parse(format!("grid must be A:B:STEP, got {spec:?}")));
    }
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| p.parse::<usize>().map_err(|e| CliError::Parse(format!("grid part {p:?}: {e}"))))
        .collect::<CliResult<_>>()?;
    let (a, b, step) = (nums[0], nums[1], nums[2]);
    if step == 0 || a == 0 || b < a {
        return Err(CliError::Parse(format!("grid needs 0 < A <= B and STEP >= 1, got {spec:?}")));
    }
    Ok((a..=b).step_by(step).collect())
}

fn parse_list<T: std::str::FromStr>(spec: &str, name: &str) -> CliResult<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    spec.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|e| CliError::Parse(format!("{name} entry {p:?}: {e}"))))
        .collect()
}

fn check_exact_cap(n: usize) -> CliResult<()> {
    if n == 0 {
        return Err(CliError::Lib(Error::config("need at least one point")));
    }
    if n > EXACT_N_CAP {
        return Err(CliError::Lib(Error::size_limit(format!(
            "exact table costs O(N^2); this binary caps N at {EXACT_N_CAP}, got {n}"
        ))));
    }
    Ok(())
}

fn require<T>(value: Option<T>, msg: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Parse(msg.to_string()))
}

// ---------------------------------------------------------------------------
// Subcommands

fn cmd_exact(args: &ExactArgs, out: &Option<PathBuf>, format: Format) -> CliResult<()> {
    let model = load_model(&args.model)?;
    if args.dump_model {
        return dump_model(out, &model);
    }

    let table = match (args.what, &args.n_grid) {
        (ExactWhat::Partition, Some(grid)) => {
            let grid = parse_grid(grid)?;
            check_exact_cap(*grid.last().expect("grid nonempty"))?;
            let mut rows = Vec::with_capacity(grid.len());
            for n in grid {
                let v = permcycles::log_partition(&model, n)?;
                rows.push(vec![Cell::Int(n as u64), Cell::Float(v)]);
            }
            Table { columns: vec!["N", "log_HN"], rows }
        }
        (_, Some(_)) => {
            return Err(CliError::Parse("--n-grid only applies to --what partition".into()));
        }
        (what, None) => {
            let n = require(args.n, "--n is required")?;
            check_exact_cap(n)?;
            match what {
                ExactWhat::Partition => {
                    let v = permcycles::log_partition(&model, n)?;
                    // One labeled row; the label mirrors the quantity name.
                    return emit(out, &render_scalar("log_HN", v, format));
                }
                ExactWhat::CycleCounts => {
                    let st = SeriesTable::build(&model, n, n)?;
                    let j_max = args.k.unwrap_or(n).min(n);
                    let counts = exact_stats::expected_cycle_counts(&st, j_max)?;
                    let rows = counts
                        .iter()
                        .enumerate()
                        .map(|(i, &c)| vec![Cell::Int(i as u64 + 1), Cell::Float(c)])
                        .collect();
                    Table { columns: vec!["j", "expected_count"], rows }
                }
                ExactWhat::L1 => {
                    let st = SeriesTable::build(&model, n, n)?;
                    let pmf = exact_stats::l1_pmf(&st)?;
                    let rows = pmf
                        .iter()
                        .enumerate()
                        .map(|(i, &p)| vec![Cell::Int(i as u64 + 1), Cell::Float(p)])
                        .collect();
                    Table { columns: vec!["l", "probability"], rows }
                }
                ExactWhat::TnDist => {
                    let st = SeriesTable::build(&model, n, n)?;
                    let dist = permcycles::tn_distribution(&st)?;
                    let rows = dist
                        .pmf()
                        .iter()
                        .enumerate()
                        .map(|(i, &p)| vec![Cell::Int(i as u64 + 1), Cell::Float(p)])
                        .collect();
                    Table { columns: vec!["k", "probability"], rows }
                }
                ExactWhat::LongFraction => {
                    let k = require(args.k, "--k is required for long-fraction")?;
                    let st = SeriesTable::build(&model, n, n)?;
                    let v = exact_stats::expected_long_fraction(&st, k)?;
                    Table {
                        columns: vec!["K", "long_fraction"],
                        rows: vec![vec![Cell::Int(k as u64), Cell::Float(v)]],
                    }
                }
            }
        }
    };
    emit(out, &table.render(format))
}

fn render_scalar(name: &str, v: f64, format: Format) -> String {
    match format {
        Format::Csv => format!("quantity,value\n{name},{}\n", fmt_f(v)),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&serde_json::json!({ name: v }))
                .expect("scalar is plain data");
            s.push('\n');
            s
        }
    }
}

fn cmd_sample(args: &SampleArgs, out: &Option<PathBuf>, format: Format) -> CliResult<()> {
    let model = load_model(&args.model)?;
    if args.dump_model {
        return dump_model(out, &model);
    }
    check_exact_cap(args.n)?;

    let table = SeriesTable::build(&model, args.n, args.n)?;
    let mut cfg = McConfig::new(args.samples, args.seed);
    cfg.keep_lengths = true;
    let summary = permcycles::run_monte_carlo(&table, &cfg)?;
    let lengths = summary.lengths.as_ref().expect("keep_lengths was set");

    let body = match format {
        Format::Csv => {
            // Ragged CSV: one sampled cycle type per row, lengths in removal
            // order, so a fixed-point sample at N=1 is the bare row `1`.
            let mut s = String::from("cycle_lengths\n");
            for row in lengths {
                let cells: Vec<String> = row.iter().map(|l| l.to_string()).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&serde_json::json!({ "samples": lengths }))
                .expect("lengths are plain data");
            s.push('\n');
            s
        }
    };

    let sum_lengths_ok = lengths.iter().all(|row| row.iter().sum::<usize>() == args.n);
    let nf = args.n as f64;
    let scaled = |v: &[usize]| {
        let m = v.iter().map(|&x| x as f64 / nf).sum::<f64>() / v.len() as f64;
        let var = v
            .iter()
            .map(|&x| {
                let d = x as f64 / nf - m;
                d * d
            })
            .sum::<f64>()
            / (v.len() as f64 - 1.0).max(1.0);
        (m, var)
    };
    let (l1_mean, l1_var) = scaled(&summary.l1_ordered);
    let (l2_mean, l2_var) = scaled(&summary.l2_ordered);
    let report = serde_json::json!({
        "n_points": summary.n_points,
        "n_samples": summary.n_samples,
        "seed": summary.seed,
        "sum_lengths_ok": sum_lengths_ok,
        "t_mean": summary.t_mean(),
        "t_variance": summary.t_variance(),
        "mean_counts": summary.mean_counts,
        "scaled_l1_mean": l1_mean,
        "scaled_l1_var": l1_var,
        "scaled_l2_mean": l2_mean,
        "scaled_l2_var": l2_var,
    });
    let mut report_s = serde_json::to_string_pretty(&report).expect("summary is plain data");
    report_s.push('\n');

    // The cycle-type table goes to --out (or stdout); the summary JSON goes
    // to stdout when the table went to a file, otherwise to stderr so the
    // two streams stay separable.
    match out {
        Some(path) => {
            fs::write(path, body)?;
            std::io::stdout().write_all(report_s.as_bytes())?;
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            std::io::stderr().write_all(report_s.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_asymp(args: &AsympArgs, out: &Option<PathBuf>, format: Format) -> CliResult<()> {
    let model = load_model(&args.model)?;
    if args.dump_model {
        return dump_model(out, &model);
    }

    if let Some(grid) = &args.n_grid {
        let grid = parse_grid(grid)?;
        check_exact_cap(*grid.last().expect("grid nonempty"))?;
        let quantity = match args.what {
            StudyWhat::Partition => StudyQuantity::LogPartition,
            StudyWhat::CycleFraction => {
                StudyQuantity::CycleFraction { j: require(args.k, "--k picks j for cycle-fraction")? }
            }
            StudyWhat::LongFraction => {
                StudyQuantity::LongFraction { k: require(args.k, "--k is required for long-fraction")? }
            }
        };
        let points = validation::convergence_study(&model, quantity, &grid)?;
        let rows = points
            .iter()
            .map(|p| {
                vec![
                    Cell::Int(p.n as u64),
                    Cell::Float(p.exact),
                    Cell::Float(p.asymptotic),
                    Cell::Float(p.ratio),
                ]
            })
            .collect();
        let table = Table { columns: vec!["N", "exact", "asymptotic", "ratio"], rows };
        return emit(out, &table.render(format));
    }

    let report = asymptotics::classify(&model)?;
    let mut value = serde_json::to_value(&report).expect("report is plain data");
    if let Some(n) = args.n {
        let obj = value.as_object_mut().expect("report serializes to an object");
        obj.insert("n".into(), serde_json::json!(n));
        let asym = report.hn_law.evaluate(n).ok().filter(|v| v.is_finite());
        obj.insert("asymptotic_log_hn".into(), serde_json::json!(asym));
        let exact = if n <= EXACT_N_CAP {
            Some(permcycles::log_partition(&model, n)?)
        } else {
            None
        };
        obj.insert("exact_log_hn".into(), serde_json::json!(exact));
    }
    let mut s = serde_json::to_string_pretty(&value).expect("report is plain data");
    s.push('\n');
    emit(out, &s)
}

fn cmd_limitlaws(args: &LimitArgs, out: &Option<PathBuf>, format: Format) -> CliResult<()> {
    if args.samples == 0 {
        return Err(CliError::Lib(Error::config("need at least one sample")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);

    let table = match args.what {
        LimitWhat::Gem | LimitWhat::Pd => {
            let theta = require(args.theta_star, "--theta-star is required")?;
            let k = args.k.min(args.n_terms);
            let mut rows = Vec::with_capacity(args.samples);
            for i in 0..args.samples {
                let sticks = if args.what == LimitWhat::Gem {
                    limitlaws::sample_gem(theta, args.n_terms, &mut rng)?
                } else {
                    limitlaws::sample_pd(theta, args.n_terms, &mut rng)?
                };
                let mut row = vec![Cell::Int(i as u64)];
                row.extend(sticks.iter().take(k).map(|&x| Cell::Float(x)));
                rows.push(row);
            }
            Table { columns: coord_columns(k), rows }
        }
        LimitWhat::Stick | LimitWhat::StickDegenerate => {
            let nu = require(args.nu, "--nu is required")?;
            let k = args.k.min(args.n_terms);
            let mut rows = Vec::with_capacity(args.samples);
            for i in 0..args.samples {
                let path = if args.what == LimitWhat::Stick {
                    let ts = require(args.theta_star, "--theta-star is required")?;
                    limitlaws::sample_stick(nu, ts, args.n_terms, &mut rng)?
                } else {
                    limitlaws::sample_stick_degenerate(nu, args.n_terms, &mut rng)?
                };
                let ranked = path.ranked();
                let mut row = vec![Cell::Int(i as u64)];
                row.extend(ranked.iter().take(k).map(|&x| Cell::Float(x)));
                row.push(Cell::Float(path.tail_mass));
                row.push(Cell::Float(path.identity_defect()));
                rows.push(row);
            }
            let mut columns = coord_columns(k);
            columns.push("tail_mass");
            columns.push("identity_defect");
            Table { columns, rows }
        }
        LimitWhat::TnLimit => {
            let path = require(args.model.as_ref(), "--model is required for tn-limit")?;
            let model = load_model(path)?;
            if args.dump_model {
                return dump_model(out, &model);
            }
            let law = asymptotics::tn_limit_params(&model)?;
            let mut rows = Vec::with_capacity(args.samples);
            for i in 0..args.samples {
                let v = draw_tn_limit(&law, &mut rng)?;
                rows.push(vec![Cell::Int(i as u64), Cell::Float(v)]);
            }
            Table { columns: vec!["sample", "value"], rows }
        }
    };
    emit(out, &table.render(format))
}

/// Column labels sample,x1..xK. Leaked once per invocation, bounded by K.
fn coord_columns(k: usize) -> Vec<&'static str> {
    let mut columns: Vec<&'static str> = vec!["sample"];
    for i in 1..=k {
        columns.push(Box::leak(format!("x{i}").into_boxed_str()));
    }
    columns
}

fn draw_tn_limit(law: &permcycles::TnLaw, rng: &mut ChaCha8Rng) -> CliResult<f64> {
    match law {
        permcycles::TnLaw::NormalSubcritical { .. }
        | permcycles::TnLaw::NormalSupercritical { .. }
        | permcycles::TnLaw::NormalCriticalRegular { .. } => Ok(limitlaws::sample_normal(rng)),
        permcycles::TnLaw::GammaShiftedCritical { gamma_shape, shift_coeff, .. } => {
            Ok(limitlaws::sample_shifted_gamma_limit(*gamma_shape, *shift_coeff, rng)?)
        }
        permcycles::TnLaw::NormalCriticalStable { .. } => Err(CliError::Lib(Error::unsupported(
            "drawing from the skewed stable limit is not implemented; its parameters are in `asymp`",
        ))),
        permcycles::TnLaw::Unsupported { reason } => {
            Err(CliError::Lib(Error::unsupported(reason.clone())))
        }
    }
}

fn cmd_spatial(args: &SpatialArgs, out: &Option<PathBuf>, format: Format) -> CliResult<()> {
    let family = match args.family {
        FamilyArg::Gaussian => Family::Gaussian,
        FamilyArg::Stable => {
            Family::Stable { gamma: require(args.gamma, "--gamma is required for stable")? }
        }
    };
    let l_list: Vec<f64> = parse_list(&args.l_list, "--l-list")?;
    let j_list: Vec<usize> = parse_list(&args.j_list, "--j-list")?;
    if l_list.is_empty() || j_list.is_empty() {
        return Err(CliError::Parse("--l-list and --j-list must be nonempty".into()));
    }

    let cfg_at = |l: f64| SpatialConfig::new(family, args.d, l, args.rho);

    match args.what {
        SpatialWhat::Kappa => {
            let spec = spatial_bridge::base_kappa(&cfg_at(l_list[0]))?;
            let mut s = serde_json::to_string_pretty(&spec).expect("spec is plain data");
            s.push('\n');
            return emit(out, &s);
        }
        SpatialWhat::TailCheck => {
            let ok = spatial_bridge::check_universal_tail(&cfg_at(l_list[0]), &l_list)?;
            let mut s = serde_json::to_string_pretty(&serde_json::json!({
                "deviation_decreasing": ok,
                "l_grid": l_list,
            }))
            .expect("plain data");
            s.push('\n');
            return emit(out, &s);
        }
        _ => {}
    }

    let mut rows = Vec::with_capacity(l_list.len() * j_list.len());
    for &l in &l_list {
        let cfg = cfg_at(l);
        cfg.validate()?;
        for &j in &j_list {
            let v = match args.what {
                SpatialWhat::Lattice => spatial_bridge::riemann_sum(&cfg, j)?,
                SpatialWhat::Integral => spatial_bridge::integral_weight(&cfg, j)?,
                SpatialWhat::Delta => spatial_bridge::delta_correction(&cfg, j)?,
                SpatialWhat::Dual => spatial_bridge::poisson_dual_sum(&cfg, j)?,
                SpatialWhat::Eta => spatial_bridge::order_parameter(&cfg, j)?,
                SpatialWhat::Heuristic => spatial_bridge::heuristic_theta(&cfg, j)?,
                SpatialWhat::Kappa | SpatialWhat::TailCheck => unreachable!("handled above"),
            };
            rows.push(vec![Cell::Float(l), Cell::Int(j as u64), Cell::Float(v)]);
        }
    }
    let table = Table { columns: vec!["L", "j", "value"], rows };
    emit(out, &table.render(format))
}

fn cmd_validate(args: &ValidateArgs, out: &Option<PathBuf>) -> CliResult<ExitCode> {
    let suite = match args.suite {
        SuiteArg::Quick => Suite::Quick,
        SuiteArg::Full => Suite::Full,
    };
    let report = validation::run_suite(suite)?;
    let mut s = serde_json::to_string_pretty(&report).expect("report is plain data");
    s.push('\n');
    emit(out, &s)?;
    if report.all_pass {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(5))
    }
}

// ---------------------------------------------------------------------------

fn configure_threads(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("PERMCYCLES_THREADS").ok().and_then(|s| s.parse::<usize>().ok())
    });
    if let Some(n) = n.filter(|&n| n > 0) {
        // Ignore the error: the pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run(cli: &Cli) -> CliResult<ExitCode> {
    configure_threads(cli.threads);
    match &cli.command {
        Command::Exact(args) => cmd_exact(args, &cli.out, cli.format)?,
        Command::Sample(args) => cmd_sample(args, &cli.out, cli.format)?,
        Command::Asymp(args) => cmd_asymp(args, &cli.out, cli.format)?,
        Command::Limitlaws(args) => cmd_limitlaws(args, &cli.out, cli.format)?,
        Command::Spatial(args) => cmd_spatial(args, &cli.out, cli.format)?,
        Command::Validate(args) => return cmd_validate(args, &cli.out),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
