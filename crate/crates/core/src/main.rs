use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use critrom::autoencoder::{train, Autoencoder, NetworkSpec, TrainConfig};
use critrom::core_model::{Case, CaseDefinition, RodConfig};
use critrom::harness::{
    generate_split, load_report, run_recipe, ArtifactWriter, MetricSummary, Recipe, RecipeOptions, Split,
};
use critrom::hfm::{assemble_case, solve_case};
use critrom::numerics::{io, method_of_snapshots, Truncation};
use critrom::pod_rom::{solve_pod_rom_default, PodBasis};
use critrom::rom_nonlinear::{compose_svd_ae, solve_ae_rom_default, AeRomSettings, ReductionKind, ReductionMap};
use critrom::{Error, Result};

#[derive(Parser)]
#[command(name = "critrom", version, about = "Diffusion criticality solver with POD and autoencoder ROMs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the high-fidelity model on random rod configurations.
    Generate(GenerateArgs),
    /// Build a POD basis or train an autoencoder from generated snapshots.
    Train(TrainArgs),
    /// Solve one rod configuration with the HFM and optionally a trained ROM.
    Solve(SolveArgs),
    /// Run a complete experiment recipe.
    Recipe(RecipeArgs),
    /// Print the tables of a `report.json`.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Pod,
    Ae,
    SvdAe,
}

impl From<Method> for ReductionKind {
    fn from(m: Method) -> Self {
        match m {
            Method::Pod => ReductionKind::Pod,
            Method::Ae => ReductionKind::Ae,
            Method::SvdAe => ReductionKind::SvdAe,
        }
    }
}

#[derive(Args)]
struct CaseArgs {
    /// Built-in case: `slab1d` or `core2d`.
    #[arg(long, default_value = "slab1d")]
    case: String,
    /// TOML case file; overrides `--case`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid cells per side for the built-in 2D case.
    #[arg(long)]
    grid: Option<usize>,
}

impl CaseArgs {
    fn resolve(&self) -> Result<Case> {
        let def = match (&self.config, self.grid) {
            (Some(path), _) => CaseDefinition::load(path)?,
            (None, Some(n)) if self.case == "core2d" => CaseDefinition::core2d(n),
            (None, _) => CaseDefinition::preset(&self.case)?,
        };
        def.resolve()
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    case: CaseArgs,
    #[arg(long, default_value_t = 100)]
    seen: usize,
    #[arg(long, default_value_t = 100)]
    unseen: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// Directory holding `snapshots_seen.bin`.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "pod")]
    method: Method,
    #[arg(long, default_value_t = 10)]
    latent_dim: usize,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long, default_value_t = 100)]
    svd_modes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// Insertion fractions, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "r")]
    z: Vec<f64>,
    /// Mixing coefficients, comma separated; converted to insertion fractions.
    #[arg(long, value_delimiter = ',')]
    r: Vec<f64>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Directory written by `train` (required with `--method`).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RecipeArgs {
    #[arg(long)]
    recipe: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Samples per split.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    latent_dim: Option<usize>,
    /// Restrict to these methods (repeatable).
    #[arg(long, value_enum)]
    method: Vec<Method>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directory or path to `report.json`.
    #[arg(long)]
    out: PathBuf,
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let case = args.case.resolve()?;
    let set = generate_split(&case, args.seen, args.unseen, args.seed)?;
    ArtifactWriter::new(&args.out)?.write_samples(&set)?;
    println!(
        "{}: {} seen, {} unseen, {} excluded -> {}",
        case.name,
        set.count(Split::Seen),
        set.count(Split::Unseen),
        set.excluded.len(),
        args.out.display()
    );
    Ok(())
}

fn train_cmd(args: &TrainArgs) -> Result<()> {
    let case = args.case.resolve()?;
    let snapshots = io::load_matrix(args.data.join("snapshots_seen.bin"))?;
    let svd = method_of_snapshots(&snapshots)?;
    std::fs::create_dir_all(&args.out)?;
    let family = |input: usize| {
        if case.geometry.dims == 1 {
            NetworkSpec::slab1d(input, args.latent_dim)
        } else {
            NetworkSpec::core2d(input, args.latent_dim)
        }
    };
    let mut config = if case.geometry.dims == 1 {
        TrainConfig::slab1d(args.seed)
    } else {
        TrainConfig::core2d(args.seed)
    };
    if let Some(e) = args.epochs {
        config.epochs = e;
    }
    config.batch_size = config.batch_size.min(snapshots.cols());
    match args.method {
        Method::Pod => {
            let basis = PodBasis::from_svd(&svd, Truncation::Count(args.latent_dim))?;
            basis.save(&args.out, "pod_basis")?;
            println!("POD basis P={} captures {:.6}%", basis.dim(), 100.0 * basis.capture_fraction);
        }
        Method::Ae => {
            let ae = train(&family(snapshots.rows())?, &snapshots, &config)?;
            ae.save(args.out.join("model_ae.bin"))?;
            ae.save_loss_history(args.out.join("loss_ae.csv"))?;
            println!("autoencoder trained, final loss {:e}", ae.loss_history.last().copied().unwrap_or(f64::NAN));
        }
        Method::SvdAe => {
            let modes = args.svd_modes.min(svd.rank());
            let basis = PodBasis::from_svd(&svd, Truncation::Count(modes))?;
            let coefficients = basis.r.tr_matmul(&snapshots)?;
            let ae = train(&family(modes)?, &coefficients, &config)?;
            basis.save(&args.out, "svd_ae_basis")?;
            ae.save(args.out.join("model_svd_ae.bin"))?;
            ae.save_loss_history(args.out.join("loss_svd_ae.csv"))?;
            println!(
                "SVD-autoencoder trained on {modes} modes, final loss {:e}",
                ae.loss_history.last().copied().unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}

fn load_map(method: Method, dir: &Path) -> Result<ReductionMap> {
    Ok(match method {
        Method::Pod => ReductionMap::Pod(PodBasis::load(dir, "pod_basis")?),
        Method::Ae => ReductionMap::Ae(Autoencoder::load(dir.join("model_ae.bin"))?),
        Method::SvdAe => compose_svd_ae(
            PodBasis::load(dir, "svd_ae_basis")?,
            Autoencoder::load(dir.join("model_svd_ae.bin"))?,
        )?,
    })
}

fn solve_cmd(args: &SolveArgs) -> Result<()> {
    let case = args.case.resolve()?;
    let config = if !args.r.is_empty() {
        case.insertion_from_mixing(&args.r)?
    } else if !args.z.is_empty() {
        RodConfig::new(args.z.clone())?
    } else {
        RodConfig::new(vec![0.0; case.n_rods()])?
    };
    let hfm = solve_case(&case, &config)?;
    println!("HFM  k_eff = {:.10}  ({} outer iterations)", hfm.k_eff, hfm.outer_iters);
    let mut columns = vec![("hfm".to_string(), hfm.flux.clone())];
    if let Some(method) = args.method {
        let dir = args
            .model
            .as_ref()
            .ok_or_else(|| Error::Config("--method needs --model <dir>".into()))?;
        let map = load_map(method, dir)?;
        let sys = assemble_case(&case, &config)?;
        let rom = match &map {
            ReductionMap::Pod(b) => solve_pod_rom_default(&sys, b)?,
            m => solve_ae_rom_default(&sys, m, AeRomSettings::default())?,
        };
        let label = ReductionKind::from(method).label();
        println!(
            "{label:<4} k_eff = {:.10}  ({} outer iterations), e_keff = {:+.3e}, e_max flux = {:+.3e}",
            rom.k_eff,
            rom.outer_iters,
            critrom::harness::e_keff(hfm.k_eff, rom.k_eff),
            critrom::harness::e_max_flux(&hfm.flux, &rom.flux)?
        );
        columns.push((label.to_string(), rom.flux));
    }
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)?;
        let mut w = csv::Writer::from_path(out.join("flux.csv"))?;
        let mut header = vec!["cell".to_string(), "x".into(), "y".into()];
        header.extend(columns.iter().map(|(n, _)| n.clone()));
        w.write_record(&header)?;
        for c in 0..case.n_dof() {
            let (x, y) = case.geometry.cell_center(c);
            let mut row = vec![c.to_string(), format!("{x:e}"), format!("{y:e}")];
            row.extend(columns.iter().map(|(_, f)| format!("{:e}", f[c])));
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn recipe_cmd(args: &RecipeArgs) -> Result<()> {
    let opts = RecipeOptions {
        seed: args.seed,
        scale: args.scale,
        n_seen: args.samples,
        n_unseen: args.samples,
        epochs: args.epochs,
        latent_dim: args.latent_dim,
        methods: (!args.method.is_empty()).then(|| args.method.iter().map(|&m| m.into()).collect()),
    };
    let outcome = run_recipe(Recipe::new(&args.recipe, &opts)?, Some(&args.out))?;
    print_report(&outcome.report);
    println!("artifacts written to {}", args.out.display());
    Ok(())
}

fn cell(s: &MetricSummary) -> String {
    format!("{:>11.4e}", s.mean_abs)
}

fn print_report(report: &critrom::harness::ErrorReport) {
    let name = report.recipe.get("name").and_then(|v| v.as_str()).unwrap_or("?");
    println!("recipe {name}, {} unknowns, POD rank {}", report.n_dof, report.pod_rank);
    println!(
        "{:<7} {:<7} {:>11} {:>11} {:>11}",
        "method", "split", "ē_max DR", "ē_max flux", "ē k_eff"
    );
    for m in &report.methods {
        for (split, r) in [("seen", &m.seen), ("unseen", &m.unseen)] {
            println!(
                "{:<7} {:<7} {} {} {}",
                m.method.label(),
                split,
                cell(&r.compression),
                cell(&r.flux),
                cell(&r.k_eff)
            );
        }
        if let Some(c) = m.capture_fraction {
            println!("{:<7} capture fraction {:.6}%", "", 100.0 * c);
        }
        if m.rom_failures + m.rom_unconverged + m.inner_cap_hits > 0 {
            println!(
                "{:<7} ROM failures {}, unconverged {}, inner cap hits {}",
                "", m.rom_failures, m.rom_unconverged, m.inner_cap_hits
            );
        }
    }
    for s in &report.showcase {
        let rows: Vec<String> = s
            .methods
            .iter()
            .map(|m| format!("{} {:.7} ({:+.2e})", m.method.label(), m.k_eff, m.e_keff))
            .collect();
        println!("showcase {:<6} k_hfm {:.7}; {}", s.label.label(), s.k_hfm, rows.join("; "));
    }
}

fn report_cmd(args: &ReportArgs) -> Result<()> {
    let path = if args.out.is_dir() {
        args.out.join("report.json")
    } else {
        args.out.clone()
    };
    print_report(&load_report(path)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Train(a) => train_cmd(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Recipe(a) => recipe_cmd(a),
        Command::Report(a) => report_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
