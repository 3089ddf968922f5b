use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use swe_lab::{workers_from_env, Experiment, LabError, RunConfig};

/// Run one experiment and write its tables and manifest.
///
/// Worker threads: SWE_LAB_WORKERS (default: all cores). Exit codes: 0 success,
/// 2 invalid configuration, 3 runtime failure, 4 a --check threshold failed.
#[derive(Parser, Debug)]
#[command(name = "swe-lab", version)]
struct Cli {
    /// simulate, converge, covariance, renorm, nullform, counting or smoothing
    experiment: Experiment,
    /// TOML file with [run], [grid], [time], ... sections
    #[arg(long)]
    config: Option<PathBuf>,
    /// `section.key=value`, applied after the file; repeatable
    #[arg(long = "override", value_name = "K=V")]
    overrides: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    /// evaluate the acceptance thresholds of the experiment
    #[arg(long)]
    check: bool,
}

fn fail(e: &LabError, out: Option<&PathBuf>) -> ExitCode {
    let body = e.to_json();
    eprintln!("{body}");
    if let Some(dir) = out {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(dir.join("error.json"), format!("{body:#}\n"));
        }
    }
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            let err = LabError::Validation(vec![e.to_string().lines().next().unwrap_or_default().to_string()]);
            return fail(&err, None);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let text = match &cli.config {
        None => None,
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => Some(t),
            Err(e) => return fail(&LabError::Validation(vec![format!("config {}: {e}", p.display())]), Some(&cli.out)),
        },
    };
    let result = workers_from_env()
        .and_then(|w| RunConfig::load(cli.experiment, text.as_deref(), &cli.overrides).map(|c| (c, w)))
        .and_then(|(cfg, w)| swe_lab::run(&cfg, &cli.out, w));
    let report = match result {
        Ok(r) => r,
        Err(e) => return fail(&e, Some(&cli.out)),
    };
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("wrote {} ({:.1} s)", cli.out.join(swe_lab::output::MANIFEST_FILE).display(), report.manifest.wall_time_s);
    if cli.check && !report.passed() {
        return ExitCode::from(4);
    }
    ExitCode::SUCCESS
}
