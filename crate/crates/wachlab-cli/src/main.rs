use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wachlab::commands;
use wachlab::config::RunConfig;
use wachlab::report::Report;
use wachlab::WachError;

#[derive(Parser)]
#[command(name = "wach-lab", version, about = "Relative Wach modules at finite precision")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that t/pi is a unit and print its inverse.
    VerifyUnit(Flags),
    /// Descend a fixture or module file to an invariant basis.
    Descend(Flags),
    /// Run the acceptance matrix.
    Suite(Flags),
    /// Write a builtin fixture as a module file.
    Fixture(Flags),
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// Key-value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    d: Option<usize>,
    /// Absolute p-adic precision N.
    #[arg(long)]
    prec: Option<u32>,
    /// Series truncation degree M.
    #[arg(long)]
    series_deg: Option<usize>,
    /// PD truncation degree M_PD.
    #[arg(long)]
    pd_deg: Option<usize>,
    /// Laurent exponent box B.
    #[arg(long = "box")]
    box_bound: Option<i32>,
    /// PD index bound I.
    #[arg(long)]
    pd_index: Option<usize>,
    /// default, exp, or an integer.
    #[arg(long)]
    chi0: Option<String>,
    /// trivial, twist:r, sum:a,b, tensor:a,b, gauge:r, corrupt-commutation.
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long)]
    module_file: Option<PathBuf>,
    /// Write the JSON report (or the module file, for `fixture`) here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Criterion number or module name.
    #[arg(long)]
    filter: Option<String>,
    /// Push the invariant basis into the OA flavor.
    #[arg(long)]
    push_oa: bool,
    /// Print the JSON report instead of text.
    #[arg(long)]
    json: bool,
}

fn read(path: &PathBuf) -> Result<String, WachError> {
    std::fs::read_to_string(path).map_err(|e| WachError::Config(format!("{}: {e}", path.display())))
}

fn build_config(f: &Flags) -> Result<RunConfig, WachError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &f.config {
        cfg.apply_kv_text(&read(path)?)?;
    }
    let mut set = |k: &str, v: Option<String>| -> Result<(), WachError> {
        match v {
            Some(v) => cfg.set(k, &v),
            None => Ok(()),
        }
    };
    set("p", f.p.map(|v| v.to_string()))?;
    set("m", f.m.map(|v| v.to_string()))?;
    set("d", f.d.map(|v| v.to_string()))?;
    set("prec", f.prec.map(|v| v.to_string()))?;
    set("series-deg", f.series_deg.map(|v| v.to_string()))?;
    set("pd-deg", f.pd_deg.map(|v| v.to_string()))?;
    set("box", f.box_bound.map(|v| v.to_string()))?;
    set("pd-index", f.pd_index.map(|v| v.to_string()))?;
    set("chi0", f.chi0.clone())?;
    set("fixture", f.fixture.clone())?;
    set("module-file", f.module_file.as_ref().map(|p| p.display().to_string()))?;
    set("out", f.out.as_ref().map(|p| p.display().to_string()))?;
    set("filter", f.filter.clone())?;
    if f.push_oa {
        cfg.push_oa = true;
    }
    Ok(cfg)
}

fn emit(report: &Report, json: bool) -> ExitCode {
    if json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.text);
    }
    if let Some(path) = &report.config.out {
        if let Err(e) = std::fs::write(path, report.to_json() + "\n") {
            eprintln!("wach-lab: cannot write {path}: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(report.exit_code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (name, flags) = match &cli.command {
        Command::VerifyUnit(f) => ("verify-unit", f),
        Command::Descend(f) => ("descend", f),
        Command::Suite(f) => ("suite", f),
        Command::Fixture(f) => ("fixture", f),
    };
    let cfg = match build_config(flags).and_then(|c| c.validate().map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            let report = Report::from_error(name, &RunConfig::default(), &e);
            eprint!("{}", report.text);
            return ExitCode::from(report.exit_code as u8);
        }
    };
    let report = match &cli.command {
        Command::VerifyUnit(_) => commands::verify_unit(&cfg),
        Command::Suite(_) => commands::suite_cmd(&cfg),
        Command::Descend(_) => {
            let text = match cfg.module_file.as_ref().map(|p| read(&PathBuf::from(p))).transpose() {
                Ok(t) => t,
                Err(e) => {
                    let r = Report::from_error(name, &cfg, &e);
                    eprint!("{}", r.text);
                    return ExitCode::from(r.exit_code as u8);
                }
            };
            commands::descend_cmd(&cfg, text.as_deref())
        }
        Command::Fixture(_) => {
            return match commands::fixture_file(&cfg) {
                Ok(text) => match &cfg.out {
                    Some(path) => match std::fs::write(path, &text) {
                        Ok(()) => ExitCode::SUCCESS,
                        Err(e) => {
                            eprintln!("wach-lab: cannot write {path}: {e}");
                            ExitCode::from(2)
                        }
                    },
                    None => {
                        print!("{text}");
                        ExitCode::SUCCESS
                    }
                },
                Err(e) => {
                    let r = Report::from_error(name, &cfg, &e);
                    eprint!("{}", r.text);
                    ExitCode::from(r.exit_code as u8)
                }
            };
        }
    };
    emit(&report, flags.json)
}
