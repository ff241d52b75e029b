//! Command-line surface: entropy evaluation, mixture bounds, dimension
//! estimation, IFS generation, and the equivalence verifier. All output
//! is deterministic JSON (sorted keys, 12 significant digits); exit codes
//! are 0 = success, 2 = bad input, 3 = budget exceeded, 4 = failed
//! verification.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;

use renyi::dimension::{
    estimate_dimension, generate_ifs_measure, mixture_dimension_check, DeltaLadder, DimRule,
    DimensionEstimate, FamilyKind,
};
use renyi::division::weighted_entropy;
use renyi::entropy::{AlphaOrder, EntropyValue};
use renyi::error::{Error, Result};
use renyi::family::{ball_family, grid_family, CellFamily};
use renyi::io::{
    load_family, load_ifs, load_measure, load_mixture, read_json, round_sig, save_measure,
    to_stable_string, write_json_file, RunManifest,
};
use renyi::measure::DiscreteMeasure;
use renyi::search::{
    classical_entropy_exact_with_budget, classical_entropy_greedy, sample_random_divisions,
    SearchMethod,
};
use renyi::tol::ENUM_BUDGET;
use renyi::verify::verify_equivalence;

#[derive(Parser)]
#[command(
    name = "renyi",
    version,
    about = "Rényi entropy of discrete measures under error-control families"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute H_α(μ;Q) for a measure under a family.
    Entropy(EntropyArgs),
    /// Evaluate the mixture sandwich bounds and the actual mixture entropy.
    Bounds(BoundsArgs),
    /// Estimate Rényi dimension over a ladder of scales.
    Dimension(DimensionArgs),
    /// Generate test measures.
    Generate {
        #[command(subcommand)]
        target: GenerateTarget,
    },
    /// Check weighted = classical on seeded random instances.
    VerifyEquivalence(VerifyArgs),
}

#[derive(Subcommand)]
enum GenerateTarget {
    /// Generate the cylinder measure of an iterated function system.
    Ifs(GenerateIfsArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("family_source").required(true)))]
struct EntropyArgs {
    /// Measure document (atoms + weights).
    #[arg(long)]
    measure: PathBuf,
    /// Family document (cells as id lists).
    #[arg(long, group = "family_source")]
    family: Option<PathBuf>,
    /// Use the grid family at this scale instead of a family file.
    #[arg(long, group = "family_source")]
    grid_delta: Option<f64>,
    /// Use closed balls of this radius instead of a family file.
    #[arg(long, group = "family_source")]
    ball_delta: Option<f64>,
    /// Ball centers (JSON array of coordinate arrays); defaults to all atoms.
    #[arg(long, requires = "ball_delta")]
    centers: Option<PathBuf>,
    /// Entropy order α (positive, α ≠ 1).
    #[arg(long)]
    alpha: f64,
    /// Force exhaustive search; a blown budget is then an error.
    #[arg(long, conflicts_with = "greedy")]
    exact: bool,
    /// Force the greedy upper-bound search.
    #[arg(long)]
    greedy: bool,
    /// Override the exhaustive assignment budget.
    #[arg(long)]
    budget: Option<u64>,
    /// Also sample this many random divisions and report their minimum.
    #[arg(long, requires = "seed")]
    samples: Option<u64>,
    /// Seed for division sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a run manifest (inputs, digests, seed, timings) here.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Mixture document (shared atoms + coefficient-weighted components).
    #[arg(long)]
    mixture: PathBuf,
    /// Family document.
    #[arg(long)]
    family: PathBuf,
    /// Entropy order α (positive, α ≠ 1).
    #[arg(long)]
    alpha: f64,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a run manifest here.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("subject").required(true)))]
struct DimensionArgs {
    /// Measure document to estimate.
    #[arg(long, group = "subject")]
    measure: Option<PathBuf>,
    /// Mixture document: estimates components and mixture, then checks
    /// the max rule (α<1) or min rule (α>1).
    #[arg(long, group = "subject")]
    mixture: Option<PathBuf>,
    /// Entropy order α (positive, α ≠ 1).
    #[arg(long)]
    alpha: f64,
    /// Scale ladder: dyadic:4..12, triadic:4..12, or list:0.5,0.25,0.125.
    #[arg(long)]
    ladder: String,
    /// Realize scales as balls around the atoms instead of grid cells.
    #[arg(long)]
    balls: bool,
    /// Tolerance for the mixture rule check (default 0.02).
    #[arg(long)]
    tolerance: Option<f64>,
    /// Write the (delta, bits) table here as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a run manifest here.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateIfsArgs {
    /// IFS document (maps, probs, depth).
    #[arg(long)]
    spec: PathBuf,
    /// Where to write the generated measure document.
    #[arg(long, short = 'o')]
    out: PathBuf,
    /// Write a run manifest here.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Maximum atoms per instance.
    #[arg(long, default_value_t = 6)]
    atoms: u32,
    /// Maximum cells per instance.
    #[arg(long, default_value_t = 4)]
    cells: usize,
    /// Number of seeded instances.
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Random divisions sampled per instance.
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    /// Master seed (required: all randomness must be reproducible).
    #[arg(long)]
    seed: u64,
    /// Entropy orders to check (repeatable).
    #[arg(long = "alpha", default_values_t = vec![0.5, 2.0])]
    alpha: Vec<f64>,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a run manifest here.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

/// An extended-real entropy in output form.
#[derive(Serialize)]
struct Ev {
    bits: Option<f64>,
    infinite: bool,
}

impl From<&EntropyValue> for Ev {
    fn from(v: &EntropyValue) -> Ev {
        Ev { bits: v.bits(), infinite: v.is_infinite() }
    }
}

#[derive(Serialize)]
struct SamplesOut {
    count: u64,
    seed: u64,
    rng: &'static str,
    min_weighted_bits: Option<f64>,
}

#[derive(Serialize)]
struct EntropyOut {
    alpha: f64,
    value: Ev,
    method: SearchMethod,
    witness: Option<Vec<Vec<u32>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<SamplesOut>,
}

#[derive(Serialize)]
struct BoundsOut {
    alpha: f64,
    coefficients: Vec<f64>,
    component_entropies: Vec<Ev>,
    lower: Ev,
    upper: Ev,
    actual: Ev,
    certified: bool,
}

#[derive(Serialize)]
struct ScaleOut {
    delta: f64,
    bits: Option<f64>,
}

#[derive(Serialize)]
struct EstimateOut {
    slope: f64,
    intercept: f64,
    residual: f64,
    upper_proxy: f64,
    lower_proxy: f64,
    per_scale: Vec<ScaleOut>,
}

impl From<&DimensionEstimate> for EstimateOut {
    fn from(e: &DimensionEstimate) -> EstimateOut {
        EstimateOut {
            slope: e.slope,
            intercept: e.intercept,
            residual: e.residual,
            upper_proxy: e.upper_proxy,
            lower_proxy: e.lower_proxy,
            per_scale: e
                .per_scale
                .iter()
                .map(|(d, h)| ScaleOut { delta: *d, bits: h.bits() })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct DimensionOut {
    alpha: f64,
    estimate: EstimateOut,
}

#[derive(Serialize)]
struct MixtureDimensionOut {
    alpha: f64,
    rule: DimRule,
    expected: f64,
    gap: f64,
    tolerance: f64,
    holds: bool,
    sandwich_at_scales: bool,
    components: Vec<EstimateOut>,
    mixture: EstimateOut,
}

#[derive(Serialize)]
struct GenerateOut {
    atoms: usize,
    depth: u32,
    overlapping_maps: bool,
    out: String,
}

fn main() {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget { .. } => 3,
        Error::Verification(_) => 4,
        _ => 2,
    }
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Entropy(a) => cmd_entropy(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Dimension(a) => cmd_dimension(a),
        Command::Generate { target: GenerateTarget::Ifs(a) } => cmd_generate_ifs(a),
        Command::VerifyEquivalence(a) => cmd_verify_equivalence(a),
    }
}

fn argv() -> Vec<String> {
    std::env::args().skip(1).collect()
}

/// Prints the stable JSON report, optionally copies it to `--out`, and
/// finishes the manifest.
fn emit<T: Serialize>(
    out: &T,
    out_path: Option<&Path>,
    manifest_path: Option<&Path>,
    mut manifest: RunManifest,
    start: Instant,
) -> Result<()> {
    let s = to_stable_string(out)?;
    println!("{s}");
    if let Some(p) = out_path {
        write_json_file(p, out)?;
    }
    manifest.record_timing("total", start.elapsed());
    if let Some(p) = manifest_path {
        write_json_file(p, &manifest)?;
    }
    Ok(())
}

fn atom_centers(mu: &DiscreteMeasure) -> Result<Vec<Vec<f64>>> {
    mu.space()
        .atoms()
        .iter()
        .map(|a| {
            a.coords
                .clone()
                .ok_or_else(|| Error::Input(format!("atom {} has no coordinates", a.id)))
        })
        .collect()
}

fn cmd_entropy(a: EntropyArgs) -> Result<i32> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("entropy", argv());
    manifest.record_input(&a.measure)?;
    let mu = load_measure(&a.measure)?;
    let q: CellFamily = if let Some(path) = &a.family {
        manifest.record_input(path)?;
        load_family(path)?
    } else if let Some(delta) = a.grid_delta {
        grid_family(mu.space(), delta)?
    } else {
        let delta = a.ball_delta.expect("clap guarantees one family source");
        let centers = match &a.centers {
            Some(path) => {
                manifest.record_input(path)?;
                read_json::<Vec<Vec<f64>>>(path)?
            }
            None => atom_centers(&mu)?,
        };
        ball_family(mu.space(), delta, &centers)?
    };
    let alpha = AlphaOrder::new(a.alpha)?;
    let budget = a.budget.unwrap_or(ENUM_BUDGET);

    let result = if a.greedy {
        classical_entropy_greedy(&mu, &q, alpha)?
    } else if a.exact {
        classical_entropy_exact_with_budget(&mu, &q, alpha, budget)?
    } else {
        // default: exact when affordable, otherwise fall back to greedy
        match classical_entropy_exact_with_budget(&mu, &q, alpha, budget) {
            Ok(r) => r,
            Err(Error::Budget { .. }) => classical_entropy_greedy(&mu, &q, alpha)?,
            Err(e) => return Err(e),
        }
    };

    let samples = match a.samples {
        Some(count) => {
            let seed = a.seed.expect("clap requires --seed with --samples");
            manifest.record_seed(seed);
            let divisions = sample_random_divisions(&mu, &q, count, seed)?;
            let min = divisions
                .iter()
                .map(|m| weighted_entropy(m, alpha))
                .min_by(|x, y| x.total_cmp(y));
            Some(SamplesOut {
                count,
                seed,
                rng: "chacha8",
                min_weighted_bits: min.and_then(|v| v.bits()),
            })
        }
        None => None,
    };

    let out = EntropyOut {
        alpha: alpha.value(),
        value: Ev::from(&result.value),
        method: result.method,
        witness: result.witness.as_ref().map(|p| {
            p.cells()
                .iter()
                .map(|c| c.iter().copied().collect())
                .collect()
        }),
        samples,
    };
    emit(&out, a.out.as_deref(), a.manifest.as_deref(), manifest, start)?;
    Ok(0)
}

fn cmd_bounds(a: BoundsArgs) -> Result<i32> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("bounds", argv());
    manifest.record_input(&a.mixture)?;
    manifest.record_input(&a.family)?;
    let spec = load_mixture(&a.mixture)?;
    let q = load_family(&a.family)?;
    let alpha = AlphaOrder::new(a.alpha)?;
    let report = renyi::bounds::verify_mixture_bounds(&spec, &q, alpha)?;
    let actual = report.actual.expect("verification always computes the mixture entropy");
    let out = BoundsOut {
        alpha: alpha.value(),
        coefficients: report.coefficients.clone(),
        component_entropies: report.component_entropies.iter().map(Ev::from).collect(),
        lower: Ev::from(&report.lower),
        upper: Ev::from(&report.upper),
        actual: Ev::from(&actual),
        certified: report.certified,
    };
    emit(&out, a.out.as_deref(), a.manifest.as_deref(), manifest, start)?;
    Ok(0)
}

fn parse_ladder(s: &str, kind: FamilyKind) -> Result<DeltaLadder> {
    let bad = |msg: &str| Error::Input(format!("{msg}; expected dyadic:4..12, triadic:4..12 or list:0.5,0.25,0.125, got {s}"));
    let (name, rest) = s.split_once(':').ok_or_else(|| bad("missing ladder kind"))?;
    match name {
        "dyadic" | "triadic" => {
            let base = if name == "dyadic" { 2.0 } else { 3.0 };
            let (lo, hi) = rest.split_once("..").ok_or_else(|| bad("missing exponent range"))?;
            let lo: u32 = lo.trim().parse().map_err(|_| bad("bad lower exponent"))?;
            let hi: u32 = hi.trim().parse().map_err(|_| bad("bad upper exponent"))?;
            DeltaLadder::geometric(base, lo, hi, kind)
        }
        "list" => DeltaLadder::new(
            rest.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad("bad scale value")))
                .collect::<Result<Vec<_>>>()?,
            kind,
        ),
        _ => Err(bad("unknown ladder kind")),
    }
}

fn write_csv(path: &Path, per_scale: &[(f64, EntropyValue)]) -> Result<()> {
    let mut s = String::from("delta,bits\n");
    for (d, h) in per_scale {
        match h.bits() {
            Some(b) => s.push_str(&format!("{},{}\n", round_sig(*d), round_sig(b))),
            None => s.push_str(&format!("{},inf\n", round_sig(*d))),
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}

fn cmd_dimension(a: DimensionArgs) -> Result<i32> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("dimension", argv());
    let alpha = AlphaOrder::new(a.alpha)?;
    let kind = if a.balls { FamilyKind::Balls } else { FamilyKind::Grid };
    let ladder = parse_ladder(&a.ladder, kind)?;

    if let Some(path) = &a.measure {
        manifest.record_input(path)?;
        let mu = load_measure(path)?;
        let estimate = estimate_dimension(&mu, &ladder, alpha)?;
        if let Some(csv) = &a.csv {
            write_csv(csv, &estimate.per_scale)?;
        }
        let out = DimensionOut {
            alpha: alpha.value(),
            estimate: EstimateOut::from(&estimate),
        };
        emit(&out, a.out.as_deref(), a.manifest.as_deref(), manifest, start)?;
        Ok(0)
    } else {
        let path = a.mixture.as_ref().expect("clap guarantees one subject");
        manifest.record_input(path)?;
        let spec = load_mixture(path)?;
        let report = mixture_dimension_check(&spec, &ladder, alpha, a.tolerance)?;
        if let Some(csv) = &a.csv {
            write_csv(csv, &report.mixture.per_scale)?;
        }
        let ok = report.holds && report.sandwich_at_scales;
        let out = MixtureDimensionOut {
            alpha: alpha.value(),
            rule: report.rule,
            expected: report.expected,
            gap: report.gap,
            tolerance: report.tolerance,
            holds: report.holds,
            sandwich_at_scales: report.sandwich_at_scales,
            components: report.components.iter().map(EstimateOut::from).collect(),
            mixture: EstimateOut::from(&report.mixture),
        };
        emit(&out, a.out.as_deref(), a.manifest.as_deref(), manifest, start)?;
        Ok(if ok { 0 } else { 4 })
    }
}

fn cmd_generate_ifs(a: GenerateIfsArgs) -> Result<i32> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("generate ifs", argv());
    manifest.record_input(&a.spec)?;
    let spec = load_ifs(&a.spec)?;
    let mu = generate_ifs_measure(&spec)?;
    save_measure(&a.out, &mu)?;
    let out = GenerateOut {
        atoms: mu.space().len(),
        depth: spec.depth(),
        overlapping_maps: spec.has_overlapping_maps(),
        out: a.out.display().to_string(),
    };
    emit(&out, None, a.manifest.as_deref(), manifest, start)?;
    Ok(0)
}

fn cmd_verify_equivalence(a: VerifyArgs) -> Result<i32> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("verify-equivalence", argv());
    manifest.record_seed(a.seed);
    let alphas: Vec<AlphaOrder> = a
        .alpha
        .iter()
        .map(|&v| AlphaOrder::new(v))
        .collect::<Result<_>>()?;
    let report = verify_equivalence(a.atoms, a.cells, a.trials, a.samples, &alphas, a.seed)?;
    let holds = report.holds;
    emit(&report, a.out.as_deref(), a.manifest.as_deref(), manifest, start)?;
    Ok(if holds { 0 } else { 4 })
}
