use std::path::PathBuf;
use std::process::ExitCode;

use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};

use msalab::harness::{emit_results, run_experiment, write_results, ExperimentConfig, OutputFormat, EXPERIMENTS};
use msalab::stats::Status;
use msalab::MsaError;

fn cli() -> Command {
    let mut cmd = Command::new("msalab")
        .about("Random two-particle lattice operators: spectra, multiscale classifiers and Monte Carlo bound checks")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg(
            Arg::new("config")
                .long("config")
                .short('c')
                .global(true)
                .value_parser(value_parser!(PathBuf))
                .help("TOML experiment configuration"),
        )
        .arg(Arg::new("seed").long("seed").global(true).value_parser(value_parser!(u64)).help("Override the master seed"))
        .arg(
            Arg::new("samples")
                .long("samples")
                .short('n')
                .global(true)
                .value_parser(value_parser!(u64))
                .help("Override the number of disorder samples (and of paths for molchanov)"),
        )
        .arg(
            Arg::new("out")
                .long("out")
                .short('o')
                .global(true)
                .value_parser(value_parser!(PathBuf))
                .help("Output file; standard output when absent"),
        )
        .arg(
            Arg::new("format")
                .long("format")
                .global(true)
                .value_parser(["csv", "jsonl"])
                .help("Output format"),
        )
        .arg(
            Arg::new("strict")
                .long("strict")
                .global(true)
                .action(ArgAction::SetTrue)
                .help("Exit with status 2 when some record reports bound_violated"),
        )
        .subcommand(Command::new("run").about("Run the experiment named in the configuration file"))
        .subcommand(Command::new("list").about("List experiment names"));
    for (name, about) in EXPERIMENTS {
        cmd = cmd.subcommand(Command::new(name).about(about));
    }
    cmd
}

fn load(sub: &str, m: &ArgMatches) -> Result<ExperimentConfig, MsaError> {
    let mut cfg = match m.get_one::<PathBuf>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| MsaError::Io { path: path.display().to_string(), message: e.to_string() })?;
            toml::from_str::<ExperimentConfig>(&text).map_err(|e| MsaError::Config(e.to_string()))?
        }
        None => return Err(MsaError::Config("--config is required".into())),
    };
    if sub != "run" {
        cfg.experiment = sub.to_string();
    }
    if let Some(seed) = m.get_one::<u64>("seed") {
        cfg.seed = *seed;
    }
    if let Some(n) = m.get_one::<u64>("samples") {
        cfg.sampling.n = *n;
        cfg.sampling.n_paths = *n;
    }
    if let Some(out) = m.get_one::<PathBuf>("out") {
        cfg.output.path = Some(out.display().to_string());
    }
    if let Some(f) = m.get_one::<String>("format") {
        cfg.output.format = if f == "csv" { OutputFormat::Csv } else { OutputFormat::JsonLines };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (sub, m) = matches.subcommand().expect("subcommand required");
    if sub == "list" {
        for (name, about) in EXPERIMENTS {
            println!("{name:<12} {about}");
        }
        return ExitCode::SUCCESS;
    }
    let strict = m.get_flag("strict");
    let outcome = load(sub, m).and_then(|cfg| {
        let records = run_experiment(&cfg)?;
        match &cfg.output.path {
            Some(p) => emit_results(&records, cfg.output.format, p.as_ref())?,
            None => write_results(&records, cfg.output.format, std::io::stdout().lock())?,
        }
        Ok(records)
    });
    match outcome {
        Ok(records) if strict && records.iter().any(|r| r.status == Status::BoundViolated) => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("msalab: {e}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_subcommand_has_help() {
        cli().debug_assert();
        for sub in cli().get_subcommands() {
            assert!(sub.get_about().is_some(), "{}", sub.get_name());
        }
    }
}
