//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, ScalabilityMode};
use crate::error::{Error, Result};
use crate::harness::{
    preset_beamformer_comparison, preset_mode_comparison, preset_rx_sweep, run_experiment, write_results, ResultSet,
};
use crate::rng::{stream, Purpose};
use crate::sensing::{calibrate_threshold, calibrate_threshold_mc};

/// Environment variable holding the default output root.
pub const OUT_ENV: &str = "CELLFREE_ISAC_OUT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cellfree-isac", version, about = "Cell-free massive MIMO ISAC Monte Carlo simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a single experiment arm.
    Run {
        #[command(flatten)]
        common: Common,
        /// Receive APs per region.
        #[arg(long)]
        rx: Option<usize>,
        /// UEs annulled by ZF sensing beams.
        #[arg(long)]
        kzf: Option<usize>,
    },
    /// Compare the UTC, UC, TC and CF modes.
    PresetModes {
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the number of receive APs at fixed cluster size.
    PresetRxSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        rx: Vec<usize>,
    },
    /// Compare MF against ZF sensing beams.
    PresetBeamformers {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        kzf: Vec<usize>,
    },
    /// Print the analytic detection threshold and a Monte Carlo cross-check.
    CalibratePfa {
        /// Total dictionary rank of the cluster.
        #[arg(long, default_value_t = 12)]
        rank: usize,
        #[arg(long, default_value_t = 0.01)]
        pfa: f64,
        #[arg(long, default_value_t = 1.0)]
        noise_var: f64,
        #[arg(long, default_value_t = 1_000_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Parse, validate and print the resolved configuration.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
        /// Extra `key=value` overrides.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to `$CELLFREE_ISAC_OUT/<command>` or `results/<command>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mode: Option<ScalabilityMode>,
    #[arg(long)]
    pub drops: Option<usize>,
    #[arg(long)]
    pub fading: Option<usize>,
    #[arg(long)]
    pub pfa: Option<f64>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = self.drops {
            cfg.drops = v;
        }
        if let Some(v) = self.fading {
            cfg.fading = v;
        }
        if let Some(v) = self.pfa {
            cfg.pfa = v;
        }
        apply_sets(&mut cfg, &self.set)?;
        Ok(cfg)
    }

    fn out_dir(&self, command: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            let root = std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("results"), PathBuf::from);
            root.join(command)
        })
    }
}

fn apply_sets(cfg: &mut ExperimentConfig, sets: &[String]) -> Result<()> {
    for s in sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{s}` is not KEY=VALUE")))?;
        cfg.set(k, v)?;
    }
    Ok(())
}

/// Parse arguments and run; returns the process exit code.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_FAILURE
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Run { common, rx, kzf } => {
            let mut cfg = common.resolve()?;
            if let Some(rx) = rx {
                cfg.rx_per_region = rx;
            }
            if let Some(k) = kzf {
                cfg.k_zf = k;
            }
            cfg.validate()?;
            let dir = prepare_dir(&common.out_dir("run"))?;
            let set = run_experiment(&cfg)?;
            finish(out, &dir, &cfg, &[set])
        }
        Command::PresetModes { common } => {
            let cfg = common.resolve()?;
            cfg.validate()?;
            let dir = prepare_dir(&common.out_dir("preset-modes"))?;
            let sets = preset_mode_comparison(&cfg)?;
            finish(out, &dir, &cfg, &sets)
        }
        Command::PresetRxSweep { common, rx } => {
            let cfg = common.resolve()?;
            cfg.validate()?;
            let dir = prepare_dir(&common.out_dir("preset-rx-sweep"))?;
            let sets = preset_rx_sweep(&cfg, &rx)?;
            finish(out, &dir, &cfg, &sets)
        }
        Command::PresetBeamformers { common, kzf } => {
            let cfg = common.resolve()?;
            cfg.validate()?;
            let dir = prepare_dir(&common.out_dir("preset-beamformers"))?;
            let sets = preset_beamformer_comparison(&cfg, &kzf)?;
            finish(out, &dir, &cfg, &sets)
        }
        Command::CalibratePfa {
            rank,
            pfa,
            noise_var,
            trials,
            seed,
        } => {
            let analytic = calibrate_threshold(rank, noise_var, pfa)?;
            let mc = calibrate_threshold_mc(rank, noise_var, pfa, trials, &mut stream(seed, 0, Purpose::Calibration, 0))?;
            writeln!(out, "rank = {rank}")?;
            writeln!(out, "pfa = {pfa}")?;
            writeln!(out, "noise_var = {noise_var}")?;
            writeln!(out, "analytic_threshold = {analytic:.6}")?;
            writeln!(out, "monte_carlo_threshold = {mc:.6}")?;
            writeln!(out, "relative_difference = {:.6}", (mc - analytic).abs() / analytic)?;
            Ok(())
        }
        Command::ValidateConfig { config, set } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            apply_sets(&mut cfg, &set)?;
            cfg.validate()?;
            write!(out, "{}", cfg.to_kv())?;
            Ok(())
        }
    }
}

fn prepare_dir(dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    // fail before the run if the directory cannot take files
    let probe = dir.join(".write-probe");
    std::fs::write(&probe, b"")?;
    std::fs::remove_file(&probe)?;
    Ok(dir.to_path_buf())
}

fn finish(out: &mut dyn Write, dir: &Path, cfg: &ExperimentConfig, sets: &[ResultSet]) -> Result<()> {
    write_results(dir, cfg, sets)?;
    write!(out, "{}", crate::harness::summary(sets))?;
    writeln!(out, "results written to {}", dir.display())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("cellfree-isac").chain(args.iter().copied()))
    }

    #[test]
    fn run_with_seed() {
        let cli = parse(&["run", "--config", "base.cfg", "--seed", "7"]).unwrap();
        match cli.command {
            Command::Run { common, .. } => {
                assert_eq!(common.seed, Some(7));
                assert_eq!(common.config, PathBuf::from("base.cfg"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rx_list_parses() {
        let cli = parse(&["preset-rx-sweep", "--config", "c.cfg", "--rx", "1,2,3,4"]).unwrap();
        match cli.command {
            Command::PresetRxSweep { rx, .. } => assert_eq!(rx, vec![1, 2, 3, 4]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn usage_errors_exit_two() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run_from(["cellfree-isac", "run"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(run_from(["cellfree-isac", "run", "--config", "x", "--bogus"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(run_from(["cellfree-isac"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(run_from(["cellfree-isac", "--help"], &mut o, &mut e), EXIT_OK);
    }

    #[test]
    fn mode_flag_parses() {
        let cli = parse(&["preset-modes", "--config", "c.cfg", "--mode", "cf"]).unwrap();
        match cli.command {
            Command::PresetModes { common } => assert_eq!(common.mode, Some(ScalabilityMode::Cf)),
            other => panic!("{other:?}"),
        }
    }
}
