use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use morawetz_lab::convergence::convergence_study;
use morawetz_lab::run::{RunManifest, MANIFEST_FILE};
use morawetz_lab::sweep::{load_sweep, sweep};
use morawetz_lab::{parse_override, preset, run_experiment, LabError, Result, RunConfig};

#[derive(Parser)]
#[command(name = "morawetz-lab", version, about = "Radial semilinear wave experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat TOML config file (a sweep file for `sweep`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// KEY=VALUE, applied after the config file; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run {
        #[arg(long)]
        preset: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run several experiments in parallel and tabulate them.
    Sweep {
        /// Repeatable; each preset becomes one run.
        #[arg(long)]
        preset: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Repeat an experiment under grid refinement.
    Convergence {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Summarize a finished run directory.
    Report {
        dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn overrides(common: &Common) -> Result<Vec<(String, toml::Value)>> {
    common.overrides.iter().map(|s| parse_override(s)).collect()
}

fn resolve(preset_name: Option<&str>, common: &Common) -> Result<RunConfig> {
    let mut cfg = match preset_name {
        Some(name) => preset(name)?,
        None => RunConfig::default(),
    };
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Io {
            path: path.clone(),
            source: e,
        })?;
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| LabError::Parse {
            path: path.clone(),
            message: e.to_string(),
        })?;
        cfg = cfg.merged(&table)?;
    }
    cfg = cfg.with_overrides(&overrides(common)?)?;
    if let Some(out) = &common.out {
        cfg.out_dir = out.display().to_string();
    }
    Ok(cfg)
}

fn print_summary(m: &RunManifest) {
    let r = &m.report;
    println!("preset            {}", m.config.preset);
    println!("p, kappa          {} {}", r.model.p, r.model.kappa);
    println!(
        "kappa(p), s_p     {} ({}), {} ({})",
        r.model.kappa_critical,
        r.model.kappa_critical_exact.as_deref().unwrap_or("-"),
        r.model.critical_regularity,
        r.model.critical_regularity_exact.as_deref().unwrap_or("-")
    );
    println!("energy            {} (drift {:e})", r.energy.initial, r.energy.max_relative_drift);
    println!(
        "I(0)              {} (max step rise {:e}, max I/I0 {})",
        r.escaping.initial, r.escaping.max_step_rise, r.escaping.max_over_initial
    );
    println!("decay ratio       {} (bound {})", r.decay_lemma.sup_ratio, r.decay_lemma.bound);
    for row in &r.morawetz {
        println!(
            "R = {:<6} sum {:<12.6e} residual {:<12.6e} key margin {:<12.6e} {}",
            row.radius,
            row.sum,
            row.residual,
            row.key_margin,
            if row.inequality_holds && row.key_estimate_holds { "ok" } else { "VIOLATED" }
        );
    }
    match (&r.decay, &r.decay_error) {
        (Some(d), _) => println!("decay fit         slope {} max scaled {}", d.slope, d.max_scaled),
        (None, Some(e)) => println!("decay fit         {e}"),
        _ => {}
    }
    println!(
        "L^(2(p-1))        {} (last window {:e})",
        r.l2p2.total, r.l2p2.last_window_fraction
    );
    if let Some(c) = &r.conformal {
        println!(
            "conformal         residual {:e} over {:?}, max increase {:e}",
            c.max_relative_residual, c.window, c.max_increase
        );
    }
    if let Some(s) = &r.scatter {
        println!("scatter           {:?} decreasing: {}", s.consecutive, s.strictly_decreasing);
    }
    if let Some(o) = &r.oracle {
        println!("oracle            max node error {:e} at dr = {}", o.max_node_error, o.dr);
    }
}

fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| LabError::Io {
        path: path.clone(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| LabError::Parse {
        path,
        message: e.to_string(),
    })
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { preset, common } => {
            let cfg = resolve(preset.as_deref(), &common)?;
            let manifest = run_experiment(&cfg)?;
            print_summary(&manifest);
            println!("wrote {}", cfg.out_dir);
        }
        Command::Sweep { preset: names, common } => {
            let extra = overrides(&common)?;
            let mut configs = Vec::new();
            if let Some(path) = &common.config {
                configs.extend(load_sweep(path, &RunConfig::default())?);
            }
            for name in &names {
                configs.push(preset(name)?);
            }
            if configs.is_empty() {
                return Err(LabError::Config("sweep needs --config or at least one --preset".into()));
            }
            let configs = configs
                .iter()
                .map(|c| c.with_overrides(&extra))
                .collect::<Result<Vec<_>>>()?;
            let result = sweep(&configs);
            let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("out/sweep"));
            let path = result.write(&dir)?;
            println!("wrote {} ({} runs, {} failed)", path.display(), configs.len(), result.failures());
            for row in result.rows.iter().filter(|r| !r.error.is_empty()) {
                eprintln!("run {}: {}", row.index, row.error);
            }
        }
        Command::Convergence { preset, levels, common } => {
            let cfg = resolve(preset.as_deref(), &common)?;
            let table = convergence_study(&cfg, levels)?;
            table.write(Path::new(&cfg.out_dir))?;
            for s in &table.slopes {
                println!(
                    "{:<36} {:?}{}",
                    s.quantity,
                    s.orders,
                    if s.monotone { "" } else { "  (non-monotone)" }
                );
            }
        }
        Command::Report { dir, out } => {
            let dir = dir.or(out).unwrap_or_else(|| PathBuf::from("out"));
            print_summary(&read_manifest(&dir)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
