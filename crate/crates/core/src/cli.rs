//! Command-line driver behind the `cosetlab` binary.
//!
//! Data goes to `--out` or standard output, diagnostics to standard error.
//! Exit codes: 0 success, 1 configuration error, 2 runtime error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::blockmat::{BlockMatrix, BlockSpec, MatrixFile, PermutationWord};
use crate::cosets::{circ_colligation, circ_infinite, circ_n, CosetTarget, FamilyKind, GroupFamily, KElement, Measure};
use crate::error::CosetError;
use crate::experiments::{
    run_block_decay, run_concentration, DistanceMethod, ExperimentConfig, MatrixSource, ReportFormat,
};
use crate::geometry::sym_membership;
use crate::haar::{haar_unitary, uniform_permutation, RandomStream};
use crate::hypergroup_exact::{exact_convolution, DEFAULT_BUDGET};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "COSETLAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "cosetlab",
    version,
    about = "Double-coset products, Haar sampling and concentration sweeps for block-matrix groups",
    after_help = "Permutations are written in cycle notation \"(1 2)(3 4)\" or as one-based image lists \"2 1 4 3\".\n\
                  Set COSETLAB_THREADS to cap the number of worker threads."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit a Haar (or uniform) element of G_N or K_N as matrix JSON.
    #[command(after_help = "Example:\n  cosetlab sample --family unitary_orthogonal --alpha 1 --k 1 --N 2 --seed 7")]
    Sample(SampleArgs),
    /// Emit the representative of g ∘_N h, or of the infinite/colligation product.
    #[command(after_help = "Example:\n  cosetlab product --family symmetric --alpha 1 --k 1 --N 3 --g \"(1 2)\" --h \"(1 2)\"")]
    Product(ProductArgs),
    /// Decide exactly whether permutation x lies in the double coset of target.
    #[command(after_help = "Example:\n  cosetlab membership --alpha 1 --k 1 --N 1 --x identity --target \"(1 2)\"")]
    Membership(MembershipArgs),
    /// Exact distribution of double cosets of g·D(u)·h over uniform u.
    #[command(after_help = "Example:\n  cosetlab exact-sym --alpha 1 --k 1 --N 3 --g \"(1 2)\" --h \"(1 2)\"")]
    ExactSym(ExactArgs),
    /// Median and mean norm of the top k×k block of Haar O(k+N).
    #[command(after_help = "Example:\n  cosetlab block-decay --k 2 --N 20 --N 200 --samples 200 --seed 1")]
    BlockDecay(DecayArgs),
    /// Monte Carlo hit fractions of the ε-neighborhood of g ∘_N h.
    #[command(after_help = "Example:\n  cosetlab concentration --family symmetric --alpha 1 --k 1 --N 3 --epsilon 0.5 \\\n      --samples 400 --g \"(1 2)\" --h \"(1 2)\" --seed 1")]
    Concentration(ConcentrationArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Family {
    Symmetric,
    #[value(alias = "unitary-orthogonal")]
    UnitaryOrthogonal,
    #[value(alias = "unitary-conjugation")]
    UnitaryConjugation,
}

impl From<Family> for FamilyKind {
    fn from(f: Family) -> Self {
        match f {
            Family::Symmetric => FamilyKind::Symmetric,
            Family::UnitaryOrthogonal => FamilyKind::UnitaryOrthogonal,
            Family::UnitaryConjugation => FamilyKind::UnitaryConjugation,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum MeasureArg {
    #[value(alias = "tau-tilde")]
    TauTilde,
    #[value(alias = "tau-full")]
    TauFull,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Reduced,
    Direct,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
enum SampleGroup {
    /// The whole group G_N.
    Group,
    /// The subgroup K_N.
    K,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
enum ProductKind {
    /// g J_N h (or g J h J⁻¹); needs --N.
    N,
    /// The infinite-dimensional ∘-product.
    Infinite,
    /// The colligation product.
    Colligation,
}

#[derive(Debug, Args)]
struct Shape {
    #[arg(long)]
    alpha: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
}

#[derive(Debug, Args)]
struct Output {
    /// Write data here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[command(flatten)]
    shape: Shape,
    #[arg(long = "N", default_value_t = 0)]
    n: usize,
    #[arg(long, value_enum, default_value_t = SampleGroup::Group)]
    of: SampleGroup,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ProductArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[command(flatten)]
    shape: Shape,
    #[arg(long = "N")]
    n: Option<usize>,
    /// Matrix source: identity, random_unitary, random_permutation, a permutation, or a JSON file.
    #[arg(long)]
    g: String,
    #[arg(long)]
    h: String,
    /// Defaults to `n` when --N is given and `infinite` otherwise.
    #[arg(long, value_enum)]
    product: Option<ProductKind>,
    /// Needed only for random sources.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct MembershipArgs {
    #[command(flatten)]
    shape: Shape,
    #[arg(long = "N")]
    n: usize,
    /// Permutation of degree α + m(k+N), or `identity`.
    #[arg(long)]
    x: String,
    /// Representative of the double coset, same notation as --x.
    #[arg(long)]
    target: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ExactArgs {
    #[command(flatten)]
    shape: Shape,
    #[arg(long = "N")]
    n: usize,
    #[arg(long)]
    g: String,
    #[arg(long)]
    h: String,
    /// Largest (k+N)! that may be enumerated.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct DecayArgs {
    #[arg(long)]
    k: usize,
    #[arg(long = "N", required = true)]
    n: Vec<usize>,
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ConcentrationArgs {
    /// JSON config; inline flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long)]
    alpha: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long = "N")]
    n: Vec<usize>,
    #[arg(long)]
    epsilon: Vec<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    g: Option<String>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long, value_enum)]
    measure: Option<MeasureArg>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    distance_method: Option<MethodArg>,
    /// Fill the runtime_s column with wall-clock seconds.
    #[arg(long)]
    record_runtime: bool,
    /// Re-check every hit's witness at full size.
    #[arg(long)]
    verify_witnesses: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

/// A failure with its exit code.
#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<CosetError> for Failure {
    fn from(e: CosetError) -> Self {
        match e {
            CosetError::Verification(_) | CosetError::Overflow | CosetError::SingularPoint { .. } => {
                Failure::Runtime(e.to_string())
            }
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

/// Applies `COSETLAB_THREADS` to the global worker pool, once.
pub fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| format!("{THREADS_ENV}={value} is not a positive integer"))?;
    // A second call finds the pool already built; that is fine.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    configure_threads().map_err(Failure::Config)?;
    let (text, out) = match command {
        Command::Sample(a) => (sample(&a)?, a.output.out),
        Command::Product(a) => (product(&a)?, a.output.out),
        Command::Membership(a) => (membership(&a)?, a.output.out),
        Command::ExactSym(a) => (exact_sym(&a)?, a.output.out),
        Command::BlockDecay(a) => {
            let report = run_block_decay(a.k, &a.n, a.samples, a.seed)?;
            (report.render(a.format.into())?, a.output.out)
        }
        Command::Concentration(a) => {
            let cfg = concentration_config(&a)?;
            let report = run_concentration(&cfg)?;
            (report.render(a.format.into())?, a.output.out)
        }
    };
    emit(&text, out, stdout)
}

fn emit(text: &str, out: Option<PathBuf>, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Runtime(format!("standard output: {e}"))),
    }
}

fn spec_of(shape: &Shape, n: usize) -> Result<BlockSpec, Failure> {
    Ok(BlockSpec::new(shape.alpha, shape.k, n, shape.m)?)
}

fn matrix_json(m: &BlockMatrix<f64>) -> String {
    let mut s = MatrixFile::from_matrix(m).to_json();
    s.push('\n');
    s
}

fn sample(a: &SampleArgs) -> Result<String, Failure> {
    let family = GroupFamily::new(a.family.into(), spec_of(&a.shape, a.n)?)?;
    let spec = family.spec;
    let mut rng = RandomStream::new(a.seed, 0).rng();
    let m = match (a.of, family.kind) {
        (SampleGroup::K, _) => KElement::<f64>::draw(&family, &mut rng).embed(spec)?,
        (SampleGroup::Group, FamilyKind::Symmetric) => {
            BlockMatrix::from_permutation(uniform_permutation(spec.dim(), &mut rng), Some(spec))?
        }
        (SampleGroup::Group, _) => {
            BlockMatrix::from_entries(haar_unitary::<f64, _>(spec.dim(), &mut rng), Some(spec))?
        }
    };
    Ok(matrix_json(&m))
}

fn product(a: &ProductArgs) -> Result<String, Failure> {
    let kind: FamilyKind = a.family.into();
    let which = a
        .product
        .unwrap_or(if a.n.is_some() { ProductKind::N } else { ProductKind::Infinite });
    let (g_src, h_src) = (MatrixSource::parse(&a.g), MatrixSource::parse(&a.h));
    let seed = match (a.seed, g_src.is_random() || h_src.is_random()) {
        (Some(s), _) => s,
        (None, false) => 0,
        (None, true) => return Err(config_err("random g or h needs an explicit --seed")),
    };
    let small = spec_of(&a.shape, 0)?;
    let g = g_src.resolve(kind, small, RandomStream::new(seed, crate::experiments::G_STREAM))?;
    let h = h_src.resolve(kind, small, RandomStream::new(seed, crate::experiments::H_STREAM))?;
    let rep = match which {
        ProductKind::N => {
            let n = a.n.ok_or_else(|| config_err("--product n needs --N"))?;
            circ_n(&g, &h, small.with_tail(n), kind)?.representative
        }
        ProductKind::Infinite | ProductKind::Colligation => {
            if a.n.is_some() {
                return Err(config_err("--N applies only to --product n"));
            }
            let g = g.with_spec(Some(small))?;
            let h = h.with_spec(Some(small))?;
            if which == ProductKind::Infinite {
                circ_infinite(&g, &h)?
            } else {
                circ_colligation(&g, &h)?
            }
        }
    };
    Ok(matrix_json(&rep))
}

fn parse_perm(text: &str, degree: usize) -> Result<PermutationWord, Failure> {
    let t = text.trim();
    if t == "identity" || t == "id" {
        return Ok(PermutationWord::identity(degree));
    }
    let p = match MatrixSource::parse(t) {
        MatrixSource::File(path) => MatrixFile::read(&path)?
            .to_matrix::<f64>(None)?
            .exact_permutation()
            .cloned()
            .ok_or_else(|| config_err(format!("{}: not a permutation matrix", path.display())))?,
        _ => PermutationWord::parse(t, degree)?,
    };
    if p.degree() != degree {
        return Err(config_err(format!(
            "permutation `{t}` has degree {}, expected {degree}",
            p.degree()
        )));
    }
    Ok(p)
}

fn membership(a: &MembershipArgs) -> Result<String, Failure> {
    let family = GroupFamily::new(FamilyKind::Symmetric, spec_of(&a.shape, a.n)?)?;
    let dim = family.spec.dim();
    let x = parse_perm(&a.x, dim)?;
    let rep = BlockMatrix::<f64>::from_permutation(parse_perm(&a.target, dim)?, None)?;
    let target = CosetTarget::new(rep, family)?;
    let member = sym_membership(&x, &target)?;
    Ok(format!("{}\n", serde_json::json!({ "member": member })))
}

fn exact_sym(a: &ExactArgs) -> Result<String, Failure> {
    let family = GroupFamily::new(FamilyKind::Symmetric, spec_of(&a.shape, a.n)?)?;
    let small = family.spec.small_dim();
    let g = parse_perm(&a.g, small)?;
    let h = parse_perm(&a.h, small)?;
    let mut text = exact_convolution(&g, &h, &family, a.budget)?.to_json();
    text.push('\n');
    Ok(text)
}

fn concentration_config(a: &ConcentrationArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => {
            let missing = |flag: &str| config_err(format!("{flag} is required without --config"));
            let mut cfg = ExperimentConfig::new(
                a.family.ok_or_else(|| missing("--family"))?.into(),
                a.alpha.ok_or_else(|| missing("--alpha"))?,
                a.k.ok_or_else(|| missing("--k"))?,
                a.m.unwrap_or(1),
            );
            cfg.samples = a.samples.ok_or_else(|| missing("--samples"))?;
            cfg.seed = a.seed.ok_or_else(|| missing("--seed"))?;
            cfg
        }
    };
    if let Some(f) = a.family {
        cfg.family = f.into();
    }
    if let Some(v) = a.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = a.k {
        cfg.k = v;
    }
    if let Some(v) = a.m {
        cfg.m = v;
    }
    if !a.n.is_empty() {
        cfg.n_list = a.n.clone();
    }
    if !a.epsilon.is_empty() {
        cfg.epsilon_list = a.epsilon.clone();
    }
    if let Some(v) = a.samples {
        cfg.samples = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = &a.g {
        cfg.g_spec = MatrixSource::parse(v);
    }
    if let Some(v) = &a.h {
        cfg.h_spec = MatrixSource::parse(v);
    }
    if let Some(v) = a.measure {
        cfg.measure = match v {
            MeasureArg::TauTilde => Measure::TauTilde,
            MeasureArg::TauFull => Measure::TauFull,
        };
    }
    if let Some(v) = a.restarts {
        cfg.restarts = v;
    }
    if let Some(v) = a.max_iters {
        cfg.max_iters = v;
    }
    if let Some(v) = a.tol {
        cfg.tol = v;
    }
    if let Some(v) = a.distance_method {
        cfg.distance_method = match v {
            MethodArg::Reduced => DistanceMethod::Reduced,
            MethodArg::Direct => DistanceMethod::Direct,
        };
    }
    cfg.record_runtime |= a.record_runtime;
    cfg.verify_witnesses |= a.verify_witnesses;
    cfg.validate()?;
    Ok(cfg)
}
