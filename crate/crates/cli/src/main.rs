use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use aqc_linsolve::evolve::oracle_solve;
use aqc_linsolve::experiment::{
    build_instance, build_schedule, emit_report, execute, load_config, preset, preset_names,
    spectrum_sweep, uniform_points, write_schedule_csv, write_spectrum_csv, ExperimentConfig,
    RunMode, SeedSpec, SpectrumKind,
};
use aqc_linsolve::schedule::Algorithm;

/// Simulate randomized adiabatic-inspired linear-system solvers.
#[derive(Parser)]
#[command(name = "aqcls", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run trajectories and/or the averaged channel and write artifacts.
    Solve(SolveArgs),
    /// Dump eigenvalues of H(s) or H'(s) on a uniform s grid as CSV.
    Spectrum(SpectrumArgs),
    /// Dump the annealing grid as CSV.
    Schedule(ScheduleArgs),
    /// Print the directly computed solution.
    Oracle(Source),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceChoice {
    /// JSON experiment config.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Shipped preset (alg1_paper, alg2_paper).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

#[derive(Args)]
struct Source {
    #[command(flatten)]
    choice: SourceChoice,
    /// Override the algorithm.
    #[arg(long, value_parser = ["1", "2"])]
    algorithm: Option<String>,
}

impl Source {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.choice.config, &self.choice.preset) {
            (Some(path), _) => load_config(path)?,
            (None, Some(name)) => preset(name).with_context(|| {
                format!(
                    "available presets: {}",
                    preset_names().collect::<Vec<_>>().join(", ")
                )
            })?,
            (None, None) => unreachable!("clap enforces one source"),
        };
        if let Some(a) = &self.algorithm {
            cfg.algorithm = if a == "1" {
                Algorithm::One
            } else {
                Algorithm::Two
            };
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Trajectory,
    Channel,
    Both,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: Source,
    /// Number of schedule steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Seed count N (seeds base..base+N) or a comma-separated list such as `42,` or `1,5,9`.
    #[arg(long)]
    seeds: Option<String>,
    /// First seed when `--seeds` is a count.
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Worker threads for independent seeds.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory (overrides the config's `output_dir`).
    #[arg(long, env = "AQCLS_OUT_DIR")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum HamiltonianArg {
    H,
    Hprime,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value = "h")]
    hamiltonian: HamiltonianArg,
    /// Number of uniformly spaced s values in [0, 1].
    #[arg(long, default_value_t = 51)]
    points: usize,
    /// Levels per row (default 4 for h, 10 for hprime).
    #[arg(long)]
    levels: Option<usize>,
    /// Write `spectrum.csv` into this directory instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScheduleArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    steps: Option<usize>,
    /// Write `schedule.csv` into this directory instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_seeds(text: &str, base: u64) -> Result<SeedSpec> {
    let text = text.trim();
    if text.contains(',') {
        let seeds = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<u64>().with_context(|| format!("bad seed `{s}`")))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeedSpec::List(seeds))
    } else {
        let count = text.parse::<usize>().with_context(|| {
            format!("`--seeds` expects a count or a comma-separated list, got `{text}`")
        })?;
        Ok(SeedSpec::Range { count, base })
    }
}

fn csv_sink(out: &Option<PathBuf>, name: &str) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            Box::new(
                fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?,
            )
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn solve(args: &SolveArgs) -> Result<bool> {
    let mut cfg = args.source.load()?;
    if let Some(steps) = args.steps {
        cfg.steps = steps;
    }
    if let Some(seeds) = &args.seeds {
        cfg.seeds = parse_seeds(seeds, args.seed_base)?;
    }
    if let Some(mode) = args.mode {
        cfg.mode = match mode {
            ModeArg::Trajectory => RunMode::Trajectory,
            ModeArg::Channel => RunMode::Channel,
            ModeArg::Both => RunMode::Both,
        };
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;

    let results = execute(&cfg, args.jobs)?;
    let artifacts = emit_report(&results, &cfg.output_dir)?;

    let inst = &results.instance;
    println!(
        "{}  N={}  algorithm={}  kappa={:.6}  scale={:.6}  steps={}",
        cfg.matrix_label(),
        inst.dim(),
        u8::from(cfg.algorithm),
        inst.kappa(),
        inst.scale(),
        cfg.steps
    );
    for o in results.trajectories.iter().chain(results.channel.iter()) {
        let label = o
            .seed
            .map_or("channel".to_string(), |s| format!("seed {s}"));
        match &o.result {
            Ok(r) => match r.solution_fidelity {
                Some(f) => println!(
                    "{label:>12}: solution fidelity {f:.6}, success probability {:.4}",
                    r.success_probability
                ),
                None => println!("{label:>12}: post-selection failed"),
            },
            Err(e) => println!("{label:>12}: error: {e}"),
        }
    }
    println!("report: {}", artifacts.report.display());
    Ok(artifacts.errors == 0)
}

fn spectrum(args: &SpectrumArgs) -> Result<()> {
    let cfg = args.source.load()?;
    let inst = build_instance(&cfg)?;
    let kind = match args.hamiltonian {
        HamiltonianArg::H => SpectrumKind::H,
        HamiltonianArg::Hprime => SpectrumKind::HPrime,
    };
    let levels = args.levels.unwrap_or(kind.default_levels());
    let rows = spectrum_sweep(&inst, &uniform_points(args.points), kind, levels)?;
    write_spectrum_csv(csv_sink(&args.out, "spectrum.csv")?, &rows)?;
    Ok(())
}

fn schedule(args: &ScheduleArgs) -> Result<()> {
    let mut cfg = args.source.load()?;
    if let Some(steps) = args.steps {
        cfg.steps = steps;
    }
    if cfg.steps == 0 {
        bail!("--steps must be at least 1");
    }
    let inst = build_instance(&cfg)?;
    let sched = build_schedule(&cfg, &inst)?;
    write_schedule_csv(csv_sink(&args.out, "schedule.csv")?, &sched)?;
    Ok(())
}

fn oracle(source: &Source) -> Result<()> {
    let cfg = source.load()?;
    let inst = build_instance(&cfg)?;
    let x = oracle_solve(&inst)?;
    let out = serde_json::json!({
        "expression": cfg.matrix_label(),
        "kappa": inst.kappa(),
        "scale": inst.scale(),
        "x": x.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Spectrum(a) => spectrum(a).map(|_| true),
        Command::Schedule(a) => schedule(a).map(|_| true),
        Command::Oracle(a) => oracle(a).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
