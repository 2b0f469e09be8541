use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vortnet::analysis::{
    eigenvector_centrality, kmeans_cluster, matched_accuracy, read_labels_csv, scores, sign_partition,
    write_scores_csv, KMeansOptions,
};
use vortnet::bench::{run_sweep, summarize, write_records_csv, write_summary_csv, SweepConfig};
use vortnet::eigen::{
    nystrom, power_dominant, read_vectors_csv, sketch_svd, DenseSymmetric, EigenApproximation,
    EigenMetadata, PowerOptions, DEFAULT_PINV_RTOL,
};
use vortnet::field::{self, load_field_auto, save_field, synth_vortex_field};
use vortnet::graph::{bytes_to_gib, memory_estimate, GIB};
use vortnet::render::{write_pgm, Normalization};
use vortnet::sampling::{draw_sample, sample_count};
use vortnet::{par, AdjacencyOperator, Error, FieldFormat, GridSpec, Method, SamplerKind, VorticityField};

type Result<T> = std::result::Result<T, Error>;

/// Randomized eigenanalysis of vortical interaction networks.
///
/// The worker-pool size is read from VORTNET_THREADS (default: all cores).
#[derive(Parser)]
#[command(name = "vortnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic vorticity field
    Gen(GenArgs),
    /// Approximate the dominant eigenpairs of a field's adjacency matrix
    Eig(EigArgs),
    /// Cluster nodes in eigenvector coordinates
    Cluster(ClusterArgs),
    /// Sweep error and time over sampling fractions, samplers and methods
    Bench(BenchArgs),
    /// Render a field, eigenvector, centrality or label map as a PGM image
    Render(RenderArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Gaussian vortices with random strength, size and position
    Random,
    /// 100 random vortices in a 2π × 2π box
    Turbulence,
    /// Three shed vortex pairs behind a body
    Wake,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Binary,
    Text,
}

impl From<FormatArg> for FieldFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Binary => FieldFormat::Binary,
            FormatArg::Text => FieldFormat::Text,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "random")]
    preset: Preset,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(2..))]
    nx: u64,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(2..))]
    ny: u64,
    /// Number of vortices (random preset)
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    vortices: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Domain length in x (random preset; default 2π)
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    lx: f64,
    /// Domain length in y (random preset; default 2π)
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    ly: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    strength_min: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    strength_max: f64,
    #[arg(long, default_value_t = 0.1)]
    core_min: f64,
    #[arg(long, default_value_t = 0.3)]
    core_max: f64,
    /// Output format; defaults to text for .txt files and binary otherwise
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EigArgs {
    /// Field file (text or binary, detected from content)
    #[arg(long)]
    field: PathBuf,
    /// power, sketch or nystrom
    #[arg(long, default_value = "nystrom")]
    method: Method,
    /// uniform or halton
    #[arg(long, default_value = "halton")]
    sampler: SamplerKind,
    /// Share of columns sampled, in (0, 1]
    #[arg(long, default_value_t = 0.1)]
    fraction: f64,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sketched SVD through the eigendecomposition of CᵀC
    #[arg(long)]
    gram: bool,
    /// Relative cutoff of the Nyström pseudo-inverse
    #[arg(long, default_value_t = DEFAULT_PINV_RTOL)]
    pinv_rtol: f64,
    /// Power iteration step tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// Power iteration stores A when it needs at most this many GiB
    #[arg(long, default_value_t = 1.0)]
    dense_cap_gib: f64,
    /// Eigenvector CSV to report angle errors against
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Also write the sampled column indices, one per line
    #[arg(long)]
    save_sample: Option<PathBuf>,
    /// Eigenvector CSV; metadata goes to the same path with a .json extension
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClusterMode {
    Kmeans,
    Sign,
}

#[derive(Args)]
struct ClusterArgs {
    /// Eigenvector CSV written by `eig`
    #[arg(long)]
    vectors: PathBuf,
    #[arg(long, value_enum, default_value = "kmeans")]
    mode: ClusterMode,
    /// Leading eigenvectors used as coordinates (k-means)
    #[arg(long, default_value_t = 3)]
    use_k: usize,
    #[arg(long, default_value_t = 7)]
    clusters: usize,
    /// Eigenvectors whose signs form the code (sign mode)
    #[arg(long, default_value_t = 1)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 300)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Independent k-means++ starts; the lowest inertia wins
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Label CSV to report matched agreement against
    #[arg(long)]
    compare: Option<PathBuf>,
    /// Score coordinates CSV; defaults to <out stem>.scores.csv
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Field file; when absent a preset field is generated
    #[arg(long)]
    field: Option<PathBuf>,
    /// Preset used when no field file is given
    #[arg(long, value_enum, default_value = "turbulence")]
    preset: Preset,
    #[arg(long, default_value_t = 64)]
    nx: usize,
    #[arg(long, default_value_t = 64)]
    ny: usize,
    /// Seed of the generated field
    #[arg(long, default_value_t = 0)]
    field_seed: u64,
    /// Identifier written to every record
    #[arg(long)]
    field_id: Option<String>,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.02,0.05,0.1,0.2")]
    fractions: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "uniform,halton")]
    samplers: Vec<SamplerKind>,
    /// Methods; include `power` to add a record for the baseline solve
    #[arg(long, value_delimiter = ',', default_value = "sketch,nystrom")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Trial t uses seed base + t
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    gram: bool,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1.0)]
    dense_cap_gib: f64,
    /// Per-trial records CSV
    #[arg(long)]
    out: PathBuf,
    /// Summary CSV; defaults to <out stem>.summary.csv
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Field,
    Vector,
    Centrality,
    Labels,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Minmax,
    Symmetric,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, value_enum)]
    source: Source,
    /// Field file, eigenvector CSV or label CSV depending on the source
    #[arg(long)]
    input: PathBuf,
    /// Eigenvector column (vector source)
    #[arg(long, default_value_t = 0)]
    column: usize,
    /// Field whose grid gives the image size; otherwise --nx/--ny or the
    /// eigenvector metadata are used
    #[arg(long)]
    field: Option<PathBuf>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long, value_enum)]
    norm: Option<NormArg>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = par::init_global_pool() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Eig(a) => cmd_eig(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Render(a) => cmd_render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
}

fn write_with(path: &Path, f: impl FnOnce(&mut dyn std::io::Write) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w)
        .and_then(|_| std::io::Write::flush(&mut w))
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
}

fn preset_field(preset: Preset, nx: usize, ny: usize, seed: u64) -> Result<VorticityField> {
    match preset {
        Preset::Random | Preset::Turbulence => field::turbulence_field(nx, ny, seed),
        Preset::Wake => field::wake_field(nx, ny, seed),
    }
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let (nx, ny) = (a.nx as usize, a.ny as usize);
    let f = match a.preset {
        Preset::Random => synth_vortex_field(
            GridSpec::covering(nx, ny, a.lx, a.ly)?,
            a.vortices as usize,
            a.seed,
            (a.strength_min, a.strength_max),
            (a.core_min, a.core_max),
        )?,
        p => preset_field(p, nx, ny, a.seed)?,
    };
    let format = a.format.map(FieldFormat::from).unwrap_or_else(|| {
        match a.out.extension().and_then(|e| e.to_str()) {
            Some("txt") => FieldFormat::Text,
            _ => FieldFormat::Binary,
        }
    });
    save_field(&f, &a.out, format)?;
    println!("{} {}", a.out.display(), f.checksum());
    Ok(())
}

fn eigen_solve(a: &EigArgs, op: &AdjacencyOperator) -> Result<EigenApproximation> {
    if !(a.fraction > 0.0 && a.fraction <= 1.0) {
        return Err(Error::InvalidRange(format!("fraction {} is outside (0, 1]", a.fraction)));
    }
    if a.method == Method::Power {
        let opts = PowerOptions {
            tol: a.tol,
            max_iters: a.max_iters,
            seed: a.seed,
        };
        let cap = (a.dense_cap_gib.max(0.0) * GIB) as u128;
        return if memory_estimate(op.n()) <= cap {
            power_dominant(&DenseSymmetric::new(op.materialize(cap)?)?, a.k, opts)
        } else {
            power_dominant(op, a.k, opts)
        };
    }
    let n = op.n();
    let l = sample_count(a.fraction, n, a.k)?;
    if a.k > l {
        return Err(Error::RankTooLarge { k: a.k, l });
    }
    let sample = draw_sample(a.sampler, op.field().grid(), l, a.seed)?;
    if let Some(p) = &a.save_sample {
        sample.save(p)?;
    }
    match a.method {
        Method::Nystrom => nystrom(op, &sample, a.k, a.pinv_rtol),
        _ => sketch_svd(op, &sample, a.k, a.gram),
    }
}

fn cmd_eig(a: EigArgs) -> Result<()> {
    let f = load_field_auto(&a.field)?;
    let g = *f.grid();
    let op = AdjacencyOperator::new(f);
    let approx = eigen_solve(&a, &op)?;

    write_with(&a.out, |w| approx.write_csv(w))?;
    let mut meta: EigenMetadata = approx.metadata();
    meta.grid = Some((g.nx, g.ny, g.dx, g.dy));
    let sidecar = a.out.with_extension("json");
    let json = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::MalformedData(format!("metadata: {e}")))?;
    std::fs::write(&sidecar, json + "\n").map_err(|e| Error::Io {
        path: sidecar.clone(),
        source: e,
    })?;

    println!(
        "method {} n {} l {} dense storage {:.2} GiB",
        approx.method(),
        approx.n(),
        meta.l.unwrap_or(approx.n()),
        bytes_to_gib(memory_estimate(approx.n()))
    );
    for (i, v) in approx.values().iter().enumerate() {
        println!("lambda{i} {v:.16e}");
    }
    if approx.rank_deficient() {
        println!("warning: sample rank below k; only {} pairs returned", approx.k());
    }
    if let Some(base) = &a.baseline {
        let reference = read_vectors_csv(base)?;
        if reference.nrows() != approx.n() {
            return Err(Error::DimensionMismatch {
                expected: approx.n(),
                found: reference.nrows(),
            });
        }
        for j in 0..approx.k().min(reference.ncols()) {
            let r: Vec<f64> = reference.col(j).iter().copied().collect();
            let err = vortnet::analysis::angle_error(&r, &approx.vector(j))?;
            println!("angle_error_deg{j} {err:.6e}");
        }
    }
    println!("wrote {} {}", a.out.display(), sidecar.display());
    Ok(())
}

fn load_approx(path: &Path) -> Result<EigenApproximation> {
    let vectors = read_vectors_csv(path)?;
    let k = vectors.ncols();
    // Values are not needed for clustering; keep them from the sidecar when present.
    let values = std::fs::read_to_string(path.with_extension("json"))
        .ok()
        .and_then(|s| serde_json::from_str::<EigenMetadata>(&s).ok())
        .map(|m| m.eigenvalues)
        .filter(|v| v.len() == k)
        .unwrap_or_else(|| vec![f64::NAN; k]);
    EigenApproximation::from_parts(vectors, values, Method::Power)
}

fn cmd_cluster(a: ClusterArgs) -> Result<()> {
    let approx = load_approx(&a.vectors)?;
    let (assignment, dims) = match a.mode {
        ClusterMode::Kmeans => (
            kmeans_cluster(
                &approx,
                KMeansOptions {
                    use_k: a.use_k,
                    clusters: a.clusters,
                    seed: a.seed,
                    max_iters: a.max_iters,
                    tol: a.tol,
                    restarts: a.restarts,
                },
            )?,
            a.use_k,
        ),
        ClusterMode::Sign => (sign_partition(&approx, a.depth)?, a.depth),
    };
    write_with(&a.out, |w| assignment.write_csv(w))?;
    let scores_path = a.scores.clone().unwrap_or_else(|| with_suffix(&a.out, ".scores.csv"));
    let pts = scores(&approx, dims)?;
    write_with(&scores_path, |w| write_scores_csv(&pts, w))?;

    println!("clusters {} inertia {:.6e}", assignment.c, assignment.inertia);
    println!(
        "sizes {}",
        assignment.sizes().iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
    );
    if assignment.repairs > 0 {
        println!("empty clusters reseeded {}", assignment.repairs);
    }
    if let Some(other) = &a.compare {
        let theirs = read_labels_csv(other)?;
        println!("agreement {:.6}", matched_accuracy(&assignment.labels, &theirs)?);
    }
    println!("wrote {} {}", a.out.display(), scores_path.display());
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let (f, default_id) = match &a.field {
        Some(p) => (
            load_field_auto(p)?,
            p.file_stem().unwrap_or_default().to_string_lossy().into_owned(),
        ),
        None => {
            let name = match a.preset {
                Preset::Wake => "wake",
                _ => "turbulence",
            };
            (
                preset_field(a.preset, a.nx, a.ny, a.field_seed)?,
                format!("{name}-{}x{}-s{}", a.nx, a.ny, a.field_seed),
            )
        }
    };
    let cfg = SweepConfig {
        field_id: a.field_id.clone().unwrap_or(default_id),
        k: a.k,
        fractions: a.fractions.clone(),
        samplers: a.samplers.clone(),
        methods: a.methods.clone(),
        trials: a.trials as usize,
        base_seed: a.seed,
        power: PowerOptions {
            tol: a.tol,
            max_iters: a.max_iters,
            seed: 0,
        },
        gram: a.gram,
        pinv_rtol: DEFAULT_PINV_RTOL,
        dense_cap: (a.dense_cap_gib.max(0.0) * GIB) as u128,
    };
    let records = run_sweep(f, &cfg)?;
    let summary = summarize(&records)?;
    write_with(&a.out, |w| write_records_csv(&records, w))?;
    let summary_path = a.summary.clone().unwrap_or_else(|| with_suffix(&a.out, ".summary.csv"));
    write_with(&summary_path, |w| write_summary_csv(&summary, w))?;

    println!("{:<10} {:<8} {:>8} {:>6} {:>12} {:>12}", "method", "sampler", "fraction", "l", "median_deg", "median_s");
    for r in &summary {
        println!(
            "{:<10} {:<8} {:>8.4} {:>6} {:>12} {:>12.4e}",
            r.method.as_str(),
            r.sampler.map_or("none", |s| s.as_str()),
            r.fraction,
            r.l,
            r.error.map_or("-".into(), |e| format!("{:.4}", e.median)),
            r.time.median
        );
    }
    println!("wrote {} {}", a.out.display(), summary_path.display());
    Ok(())
}

fn grid_for(a: &RenderArgs, n: usize) -> Result<GridSpec> {
    let grid = if let Some(p) = &a.field {
        *load_field_auto(p)?.grid()
    } else if let (Some(nx), Some(ny)) = (a.nx, a.ny) {
        GridSpec::new(nx, ny, 1.0, 1.0)?
    } else {
        let meta = std::fs::read_to_string(a.input.with_extension("json"))
            .ok()
            .and_then(|s| serde_json::from_str::<EigenMetadata>(&s).ok())
            .and_then(|m| m.grid)
            .ok_or_else(|| Error::InvalidArgument("grid size unknown: pass --field or --nx/--ny".into()))?;
        GridSpec::new(meta.0, meta.1, meta.2, meta.3)?
    };
    if grid.len() != n {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: n,
        });
    }
    Ok(grid)
}

fn cmd_render(a: RenderArgs) -> Result<()> {
    let (grid, values, default_norm) = match a.source {
        Source::Field => {
            let f = load_field_auto(&a.input)?;
            (*f.grid(), f.omega().to_vec(), Normalization::Symmetric)
        }
        Source::Vector | Source::Centrality => {
            let approx = load_approx(&a.input)?;
            let values = if matches!(a.source, Source::Centrality) {
                eigenvector_centrality(&approx)
            } else {
                if a.column >= approx.k() {
                    return Err(Error::InvalidArgument(format!(
                        "column {} requested but the file has {} eigenvectors",
                        a.column,
                        approx.k()
                    )));
                }
                approx.vector(a.column)
            };
            let norm = if matches!(a.source, Source::Centrality) {
                Normalization::MinMax
            } else {
                Normalization::Symmetric
            };
            (grid_for(&a, approx.n())?, values, norm)
        }
        Source::Labels => {
            let labels = read_labels_csv(&a.input)?;
            (grid_for(&a, labels.len())?, vortnet::render::labels_to_values(&labels), Normalization::MinMax)
        }
    };
    let norm = match a.norm {
        Some(NormArg::Minmax) => Normalization::MinMax,
        Some(NormArg::Symmetric) => Normalization::Symmetric,
        None => default_norm,
    };
    write_pgm(&a.out, &grid, &values, norm)?;
    println!("wrote {} ({}x{})", a.out.display(), grid.nx, grid.ny);
    Ok(())
}
