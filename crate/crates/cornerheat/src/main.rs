use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cornerheat::{all_passed, run_study, FileConfig, GammaChoice, HarnessError, Result, StudyConfig, StudyKind};

/// Convergence studies for energy-corrected finite elements on domains
/// with re-entrant corners.
#[derive(Debug, Parser)]
#[command(name = "cornerheat", version)]
struct Cli {
    #[arg(value_enum)]
    study: StudyKind,
    /// TOML file with a `[study]` table; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    levels: Option<u32>,
    #[arg(long)]
    dt0: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Weight exponent of the weighted L2 norm.
    #[arg(long)]
    alpha: Option<f64>,
    /// `auto` or a value in [0, 0.5).
    #[arg(long)]
    gamma: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the per-step error series of the finest corrected run.
    #[arg(long)]
    series: bool,
    /// Exit with status 2 when an acceptance band is violated.
    #[arg(long)]
    check: bool,
}

impl Cli {
    fn resolve(&self) -> Result<StudyConfig> {
        let mut cfg = StudyConfig::new(self.study);
        if let Some(path) = &self.config {
            let file = FileConfig::load(path)?;
            if let Some(kind) = file.study.study.filter(|k| *k != self.study) {
                return Err(HarnessError::Config(format!(
                    "{} names study {kind}, not {}",
                    path.display(),
                    self.study
                )));
            }
            cfg = cfg.merge(&file);
        }
        if let Some(v) = self.levels {
            cfg.levels = v;
        }
        if let Some(v) = self.dt0 {
            cfg.dt0 = v;
        }
        if let Some(v) = self.t_end {
            cfg.t_end = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = &self.gamma {
            cfg.gamma = v.parse::<GammaChoice>()?;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.series |= self.series;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    // Status 2 is reserved for band violations, so usage errors exit with 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = cli.resolve().and_then(|cfg| {
        let report = run_study(&cfg)?;
        for path in report.write(&cfg.out)? {
            println!("wrote {}", path.display());
        }
        Ok(report.checks())
    });
    match outcome {
        Ok(checks) => {
            for c in &checks {
                println!("{c}");
            }
            if cli.check && !all_passed(&checks) {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
