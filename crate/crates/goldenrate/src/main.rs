use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use goldenrate::commands::{self, BalanceRun, ScanRow, SimulationSummary, StateChoice, StochasticSummary};
use goldenrate::config::{self, OutputFormat, RunConfig, Sources};
use goldenrate::error::{CliError, ConfigError};
use goldenrate::output::{write_csv, write_json, Table};
use goldenrate::presets;
use goldenrate_core::balance::Verdict;
use goldenrate_core::params::ModelKind;

#[derive(Parser)]
#[command(name = "goldenrate", version, about = "Golden-rule rate equations for two-level systems and radiation reservoirs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration file
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Built-in scenario, merged over the config file
    #[arg(short, long)]
    preset: Option<String>,
    /// Override one key, e.g. --set rates.gamma_0="20 kHz" (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Data file to write instead of output.path
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Print summaries as JSON
    #[arg(long)]
    json: bool,
}

impl Common {
    fn load(&self, extra: &[String]) -> Result<RunConfig, CliError> {
        let overrides: Vec<String> = self.set.iter().chain(extra).cloned().collect();
        let mut cfg = config::load(Sources {
            file: self.config.as_deref(),
            preset: self.preset.as_deref(),
            overrides: &overrides,
        })?;
        if let Some(path) = &self.output {
            cfg.output.path = Some(path.clone());
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the rate equations and write the trajectory with its thermodynamics
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Add T/T(0) = x0/x columns
        #[arg(long = "emit-relative-T")]
        emit_relative_t: bool,
    },
    /// Compare a jump-process ensemble with the rate equations
    Stochastic {
        #[command(flatten)]
        common: Common,
    },
    /// Check detailed balance at the steady or thermal state
    Balance {
        #[command(flatten)]
        common: Common,
        /// Model to check; picks its default scenario when no config or preset is given
        #[arg(long)]
        model: Option<String>,
        #[arg(long, value_enum, default_value = "steady")]
        state: StateChoice,
    },
    /// Zero crossing of the entropy production for a list of TLS counts
    ScanM {
        #[command(flatten)]
        common: Common,
        /// Comma-separated TLS counts, e.g. 1,5,10,50,100
        #[arg(long)]
        m_list: String,
    },
    /// List built-in scenarios
    Presets,
}

fn write_table(path: &Path, format: OutputFormat, table: &Table) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    match format {
        OutputFormat::Csv => write_csv(&mut w, table).map_err(|e| CliError::io(path, e.into()))?,
        OutputFormat::Json => write_json(&mut w, table).map_err(|e| CliError::io(path, e.into()))?,
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_stdout_table(format: OutputFormat, table: &Table) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut w = stdout.lock();
    let res = match format {
        OutputFormat::Csv => write_csv(&mut w, table).map_err(io::Error::from),
        OutputFormat::Json => write_json(&mut w, table).map_err(io::Error::from).and_then(|_| writeln!(w)),
    };
    res.map_err(|e| CliError::io("<stdout>", e))
}

/// Writes the data table, then returns where the summary should go.
fn emit_table(cfg: &RunConfig, table: &Table) -> Result<Box<dyn Write>, CliError> {
    match &cfg.output.path {
        Some(path) => {
            write_table(path, cfg.output.format, table)?;
            Ok(Box::new(io::stdout()))
        }
        None => {
            write_stdout_table(cfg.output.format, table)?;
            Ok(Box::new(io::stderr()))
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6e}"))
}

fn print_simulation(w: &mut dyn Write, s: &SimulationSummary) -> io::Result<()> {
    writeln!(w, "model:               {}", s.model)?;
    writeln!(w, "t_end:               {:e} s ({} us)", s.t_end_s, s.t_end_us)?;
    writeln!(w, "samples:             {}", s.samples)?;
    writeln!(w, "steps:               {} accepted, {} rejected", s.accepted_steps, s.rejected_steps)?;
    let f = &s.final_state;
    writeln!(
        w,
        "final state:         n_A={:.6e} n_B={:.6e} n_1={:.6e} n_2={:.6e} n_C={:.6e} m={:.6e}",
        f.n_a, f.n_b, f.n_1, f.n_2, f.n_c, f.m
    )?;
    writeln!(w, "steady residual:     {:.3e} /s ({:.3e} relative)", s.steady_residual, s.steady_residual_relative)?;
    writeln!(w, "excitation drift:    {}", opt(s.excitation_drift))?;
    if !s.sigma_crossings_us.is_empty() {
        let list: Vec<String> = s.sigma_crossings_us.iter().map(|t| format!("{t:.4}")).collect();
        writeln!(w, "sigma zero crossings: {} us", list.join(", "))?;
    }
    for warning in &s.warnings {
        writeln!(w, "warning: {warning}")?;
    }
    Ok(())
}

fn print_stochastic(w: &mut dyn Write, s: &StochasticSummary) -> io::Result<()> {
    writeln!(w, "model:        {}", s.model)?;
    writeln!(w, "trajectories: {} (seed {})", s.n_traj, s.seed)?;
    writeln!(w, "max |z|:      {}", s.max_abs_z.map_or("undefined (one trajectory)".into(), |z| format!("{z:.3}")))?;
    if let Some(ok) = s.excitation_conserved {
        writeln!(w, "excitation:   {}", if ok { "conserved" } else { "NOT conserved" })?;
    }
    Ok(())
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::DetailedBalanced => "detailed-balanced",
        Verdict::Broken => "broken",
        Verdict::NotApplicable => "not-applicable",
    }
}

fn print_balance(w: &mut dyn Write, b: &BalanceRun) -> io::Result<()> {
    let s = &b.state;
    writeln!(w, "model: {}   state: {}", b.model, b.state_kind)?;
    writeln!(
        w,
        "  n_A={:.6e} n_B={:.6e} n_1={:.6e} n_2={:.6e} n_C={:.6e} m={:.6e}",
        s.n_a, s.n_b, s.n_1, s.n_2, s.n_c, s.m
    )?;
    writeln!(w, "{:<24} {:<24} {:>14} {:>14} {:>11}", "forward", "reverse", "forward flux", "reverse flux", "residual")?;
    for p in &b.report.pairs {
        writeln!(
            w,
            "{:<24} {:<24} {:>14.6e} {:>14.6e} {:>11.3e}",
            p.forward, p.reverse, p.forward_flux, p.reverse_flux, p.residual
        )?;
    }
    for u in &b.report.unpaired {
        let tag = if u.active { "unpaired" } else { "unpaired, zero rate" };
        writeln!(w, "{:<24} {:<24} {:>14.6e}", u.channel, tag, u.flux)?;
    }
    if let Some(pb) = &b.report.probability {
        writeln!(
            w,
            "probability balance: P_e*A = {:.6e}, P_g*B = {:.6e}",
            pb.downward, pb.upward
        )?;
    }
    writeln!(w, "steady residual: {:.3e} /s", b.report.steady_residual)?;
    match b.not_steady {
        Some(ns) => writeln!(
            w,
            "verdict: none (state is not steady: residual {:.3e} above {:.3e})",
            ns.residual, ns.threshold
        ),
        None => writeln!(w, "verdict: {}", verdict_name(b.report.verdict)),
    }
}

fn print_scan(w: &mut dyn Write, rows: &[ScanRow]) -> io::Result<()> {
    writeln!(w, "{:>6} {:>14} {:>13} {:>12}", "M", "sigma(0)/scale", "sign changes", "t' [us]")?;
    for r in rows {
        let t = r.t_prime_s.map_or("none".to_string(), |t| format!("{:.4}", t * 1e6));
        writeln!(w, "{:>6} {:>14.3e} {:>13} {:>12}", r.m, r.sigma0_scaled, r.sign_changes, t)?;
    }
    Ok(())
}

fn json_line<T: serde::Serialize>(w: &mut dyn Write, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out_err = |e: io::Error| CliError::io("<stdout>", e);
    match cli.command {
        Command::Simulate { common, emit_relative_t } => {
            let cfg = common.load(&[])?;
            let run = commands::simulate(&cfg, emit_relative_t)?;
            let mut w = emit_table(&cfg, &run.table)?;
            if common.json { json_line(&mut *w, &run.summary) } else { print_simulation(&mut *w, &run.summary) }
                .map_err(out_err)?;
        }
        Command::Stochastic { common } => {
            let cfg = common.load(&[])?;
            let run = commands::stochastic(&cfg)?;
            let mut w = emit_table(&cfg, &run.table)?;
            if common.json { json_line(&mut *w, &run.summary) } else { print_stochastic(&mut *w, &run.summary) }
                .map_err(out_err)?;
            if run.disagrees() {
                return Err(CliError::Disagreement { max_z: run.summary.max_abs_z.unwrap_or(f64::NAN) });
            }
        }
        Command::Balance { mut common, model, state } => {
            let mut extra = Vec::new();
            if let Some(name) = model {
                let kind = ModelKind::from_name(&name).ok_or(ConfigError::UnknownModel(name))?;
                if common.config.is_none() && common.preset.is_none() {
                    common.preset = Some(presets::default_for(kind).to_string());
                }
                extra.push(format!("model=\"{}\"", kind.name()));
            }
            let cfg = common.load(&extra)?;
            let run = commands::balance(&cfg, state)?;
            if let Some(path) = &cfg.output.path {
                let file = File::create(path).map_err(|e| CliError::io(path, e))?;
                serde_json::to_writer_pretty(BufWriter::new(file), &run).map_err(|e| CliError::io(path, e.into()))?;
            }
            let stdout = io::stdout();
            let mut w = stdout.lock();
            if common.json { json_line(&mut w, &run) } else { print_balance(&mut w, &run) }.map_err(out_err)?;
        }
        Command::ScanM { common, m_list } => {
            let list = commands::parse_m_list(&m_list)?;
            let cfg = common.load(&[])?;
            let rows = commands::scan_m(&cfg, &list)?;
            let stdout = io::stdout();
            let mut w = stdout.lock();
            if common.json { json_line(&mut w, &rows) } else { print_scan(&mut w, &rows) }.map_err(out_err)?;
        }
        Command::Presets => {
            for p in presets::PRESETS {
                println!("{:<26} {}", p.name, p.summary);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
