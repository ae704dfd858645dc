use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use roa_core::dynamics::{check_learnability, DataGenerator, SamplingStrategy};
use roa_core::refine::{check_theorem, initial_mesh, run, DataSource, RunConfig, RunRecord, Verdict};

mod plot;

use plot::{PlotSpec, Selector};

#[derive(Parser, Debug)]
#[command(name = "roa", version, about = "Data-driven region-of-attraction certification")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for sampling and meshing.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Log progress (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Vector field: pendulum, vanderpol, linear or csv:<path>.
    #[arg(long, global = true)]
    field: Option<String>,
    #[arg(long, global = true)]
    mu: Option<f64>,
    /// Lipschitz bound M of the field.
    #[arg(long, global = true)]
    lipschitz: Option<f64>,
    #[arg(long, global = true)]
    k_nearest: Option<usize>,
    #[arg(long, global = true)]
    solver_tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the certification loop and write the run record as JSON.
    Run {
        /// TOML run configuration; the pendulum preset when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Re-check the chain of inclusions stored in a run record.
    Check { record: PathBuf },
    /// Draw the iterations of a run record as SVG, with CSV polylines.
    Plot {
        record: PathBuf,
        /// `all`, `progression`, or an iteration number.
        #[arg(long, default_value = "all")]
        iteration: String,
        /// Image width and height in pixels.
        #[arg(long, default_value_t = 800)]
        size: u32,
    },
    /// Sample the field over the initial mesh and write a CSV dataset.
    GenData {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "augmented")]
        strategy: Strategy,
        #[arg(long, default_value_t = 300)]
        count: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Strategy {
    Uniform,
    Vertices,
    Augmented,
}

/// Exit status: 0 success, 1 negative result, 2 bad input.
enum Status {
    Ok,
    Negative,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<Status> {
    let g = &cli.global;
    match &cli.command {
        Command::Run { config } => {
            let cfg = load_config(config.as_deref(), g)?;
            let source = DataSource::from_name(&cfg.field, cfg.lipschitz)?;
            let record = run(&cfg, &source)?;
            let out = g.out.clone().unwrap_or_else(|| PathBuf::from("record.json"));
            record.save(&out).with_context(|| format!("writing {}", out.display()))?;
            println!("verdict: {}", record.verdict);
            if let Some(f) = &record.failure {
                println!("failure: {f}");
            }
            for l in &record.certified_level_sets {
                println!("k={} alpha={}", l.k, l.alpha);
            }
            println!("record: {}", out.display());
            Ok(if record.verdict == Verdict::Certified { Status::Ok } else { Status::Negative })
        }
        Command::Check { record } => {
            let rec = load_record(record)?;
            let check = match check_theorem(&rec) {
                Ok(c) => c,
                Err(e) => {
                    println!("FAIL: {e}");
                    return Ok(Status::Negative);
                }
            };
            if check.passed {
                println!("PASS: all inclusions hold ({} iterations)", rec.certified_level_sets.len());
                Ok(Status::Ok)
            } else {
                for v in &check.violations {
                    println!("FAIL: {v}");
                }
                Ok(Status::Negative)
            }
        }
        Command::Plot { record, iteration, size } => {
            let rec = load_record(record)?;
            let selector = match iteration.as_str() {
                "all" => Selector::All,
                "progression" => Selector::Progression,
                k => Selector::Single(k.parse().with_context(|| format!("invalid iteration `{k}`"))?),
            };
            let spec = PlotSpec {
                selector,
                out_dir: g.out.clone().unwrap_or_else(|| PathBuf::from("plots")),
                size: *size,
            };
            for file in plot::plot(&rec, &spec)? {
                println!("{}", file.display());
            }
            Ok(Status::Ok)
        }
        Command::GenData { config, strategy, count } => {
            let cfg = load_config(config.as_deref(), g)?;
            let source = DataSource::from_name(&cfg.field, cfg.lipschitz)?;
            let DataSource::Field(field) = source else {
                bail!("gen-data needs a model field, not a CSV dataset");
            };
            let tess = initial_mesh(&cfg)?;
            let strategy = match strategy {
                Strategy::Uniform => SamplingStrategy::Uniform,
                Strategy::Vertices => SamplingStrategy::OnVertices,
                Strategy::Augmented => SamplingStrategy::Augmented {
                    dilation: cfg.dilation,
                    cap_factor: cfg.cap_factor,
                },
            };
            let generated = DataGenerator::new(strategy, *count, cfg.seed)
                .lipschitz(cfg.lipschitz)
                .generate(field.as_ref(), &tess)?;
            let out = g.out.clone().unwrap_or_else(|| PathBuf::from("data.csv"));
            generated.data.save(&out).with_context(|| format!("writing {}", out.display()))?;
            let coverage = check_learnability(&tess, &generated.data);
            println!(
                "{} samples, {} of {} mesh vertices uncovered",
                generated.data.len(),
                coverage.uncovered_vertices.len(),
                tess.vertices().len()
            );
            Ok(if coverage.covered { Status::Ok } else { Status::Negative })
        }
    }
}

fn load_config(path: Option<&Path>, g: &Global) -> anyhow::Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            RunConfig::from_toml(&text).with_context(|| format!("in {}", p.display()))?
        }
        None => RunConfig::pendulum(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(f) = &g.field {
        cfg.field = f.clone();
    }
    if let Some(mu) = g.mu {
        cfg.mu = mu;
    }
    if let Some(m) = g.lipschitz {
        cfg.lipschitz = m;
    }
    if let Some(k) = g.k_nearest {
        cfg.k_nearest = k;
    }
    if let Some(t) = g.solver_tol {
        cfg.solver_tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_record(path: &Path) -> anyhow::Result<RunRecord> {
    RunRecord::load(path).with_context(|| format!("reading record {}", path.display()))
}
