//! Command-line driver: one experiment per invocation, results as CSV plus a
//! JSON manifest.

mod config;
mod experiments;

use clap::{Args, Parser, Subcommand};
use config::{Experiment, RunConfig, VariationalSection};
use experiments::Failure;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "oscikam", version, about = "KAM reducibility and NLS normal-form experiments")]
struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; falls back to the config, then `$OSCIKAM_OUT`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment named in the config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Reduce(Common),
    Oracle(Common),
    Spectrum(Common),
    Nls(Common),
    Variational {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
    },
    Measure(Common),
}

fn load(path: Option<&Path>) -> Result<RunConfig, Failure> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    RunConfig::parse(&text).map_err(Failure::Config)
}

fn out_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    flag.or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os("OSCIKAM_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("oscikam-out"))
}

fn prepare(cli: Cli) -> Result<(Experiment, RunConfig, PathBuf), Failure> {
    let (exp, cfg, out) = match cli.cmd {
        Cmd::Run { config, out } => {
            let cfg = load(Some(&config))?;
            let exp = cfg.experiment.ok_or_else(|| Failure::Config("missing required key `experiment`".into()))?;
            (exp, cfg, out)
        }
        Cmd::Reduce(c) => with(Experiment::Reduce, c)?,
        Cmd::Oracle(c) => with(Experiment::Oracle, c)?,
        Cmd::Spectrum(c) => with(Experiment::Spectrum, c)?,
        Cmd::Nls(c) => with(Experiment::Nls, c)?,
        Cmd::Measure(c) => with(Experiment::Measure, c)?,
        Cmd::Variational { common, mu, p, count } => {
            let (exp, mut cfg, out) = with(Experiment::Variational, common)?;
            if mu.is_some() || p.is_some() || count.is_some() {
                let base = cfg.variational.clone();
                let pick = |flag: Option<f64>, cur: Option<f64>, key: &str| {
                    flag.or(cur).ok_or_else(|| Failure::Config(format!("missing required key `{key}`")))
                };
                let mu = pick(mu, base.as_ref().map(|b| b.mu), "mu")?;
                let p = pick(p, base.as_ref().map(|b| b.p), "p")?;
                let count = count
                    .or(base.as_ref().map(|b| b.count))
                    .ok_or_else(|| Failure::Config("missing required key `count`".into()))?;
                let mut sec = match base {
                    Some(b) => b,
                    None => RunConfig::parse(&format!("[variational]\nmu = {mu:?}\np = {p:?}\ncount = {count}"))
                        .map_err(Failure::Config)?
                        .variational
                        .expect("section just parsed"),
                };
                sec.mu = mu;
                sec.p = p;
                sec.count = count;
                cfg.variational = Some::<VariationalSection>(sec);
            }
            (exp, cfg, out)
        }
    };
    if let Some(e) = cfg.experiment {
        if e != exp {
            return Err(Failure::Config(format!("config is for `{}`, not `{}`", e.name(), exp.name())));
        }
    }
    let mut cfg = cfg;
    if exp == Experiment::Oracle && cfg.oracle.is_none() {
        cfg.oracle = Some(Default::default());
    }
    let dir = out_dir(out, &cfg);
    Ok((exp, cfg, dir))
}

fn with(exp: Experiment, c: Common) -> Result<(Experiment, RunConfig, Option<PathBuf>), Failure> {
    Ok((exp, load(c.config.as_deref())?, c.out))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| Failure::General(format!("thread pool: {e}")))?;
    }
    let threads = cli.threads;
    let (exp, cfg, dir) = prepare(cli)?;
    std::fs::create_dir_all(&dir)?;
    let start = Instant::now();
    let result = experiments::run(exp, &cfg, &dir);
    let (status, details) = match &result {
        Ok(v) => ("ok", v.clone()),
        Err(f) => ("error", serde_json::json!({ "exit_code": f.code(), "message": f.message() })),
    };
    let manifest = serde_json::json!({
        "experiment": exp.name(),
        "library": "oscikam",
        "version": oscikam::VERSION,
        "config": cfg,
        "threads": threads,
        "status": status,
        "results": details,
        "wall_seconds": start.elapsed().as_secs_f64(),
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::General(e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), text)?;
    result.map(|_| ())
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(f) = execute(cli) {
        eprintln!("error: {}", f.message());
        std::process::exit(f.code());
    }
}
