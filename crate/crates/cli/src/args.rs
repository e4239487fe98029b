//! Command-line parsing and dispatch.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::spec::{Protocol, Range, SweepSpec};
use crate::table::{Format, Table};
use crate::{run_oracle_check, run_remote_prep_sweep, run_teleport_sweep, CliError, EXIT_FAILURE, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "twinbeam", version, about = "Twin-beam remote preparation and teleportation sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Conditional states prepared by homodyning one arm of a twin beam.
    RemotePrep(SweepArgs),
    /// Coherent-state teleportation fidelity and efficiency thresholds.
    Teleport(SweepArgs),
    /// Cross-check remote preparation against a truncated Fock-basis computation.
    OracleCheck(SweepArgs),
}

/// Ranges take `start:stop:count`, a comma-separated list, or a single value.
#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Output format.
    #[arg(long, value_name = "csv|json")]
    pub format: Option<Format>,
    /// Output file; `-` or omitted writes to stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// JSON spec file; flags given on the command line take precedence.
    #[arg(long, value_name = "PATH")]
    pub spec: Option<PathBuf>,
    /// Base seed for Monte Carlo columns.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Twin-beam squeezing parameter.
    #[arg(long, allow_hyphen_values = true, value_name = "RANGE")]
    pub r: Option<Range>,
    /// Twin-beam mean photon number (alternative to --r).
    #[arg(long = "N", allow_hyphen_values = true, value_name = "RANGE")]
    pub n: Option<Range>,
    /// Detector quantum efficiency.
    #[arg(long, allow_hyphen_values = true, value_name = "RANGE")]
    pub eta: Option<Range>,
    /// Homodyne outcome.
    #[arg(long, allow_hyphen_values = true, value_name = "RANGE")]
    pub x: Option<Range>,
    /// Dimensionless channel damping.
    #[arg(long = "gamma-t", allow_hyphen_values = true, value_name = "RANGE")]
    pub gamma_t: Option<Range>,
    /// Thermal photons of the channel background.
    #[arg(long = "M", allow_hyphen_values = true, value_name = "RANGE")]
    pub m: Option<Range>,
    /// Twin-beam amplitude tanh(r) for the oracle check.
    #[arg(long, allow_hyphen_values = true, value_name = "RANGE")]
    pub lambda: Option<Range>,
    /// Photon-number cutoff for the oracle check.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Gauss-Hermite nodes for the oracle's detector blur.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Monte Carlo samples per teleport row (adds mc_fidelity, mc_std_error).
    #[arg(long = "mc-samples")]
    pub mc_samples: Option<usize>,
    /// Real part of the coherent input for Monte Carlo teleport.
    #[arg(long = "z-re", allow_hyphen_values = true)]
    pub z_re: Option<f64>,
    /// Imaginary part of the coherent input for Monte Carlo teleport.
    #[arg(long = "z-im", allow_hyphen_values = true)]
    pub z_im: Option<f64>,
}

impl SweepArgs {
    pub fn to_spec(&self) -> Result<SweepSpec, CliError> {
        let file = match &self.spec {
            Some(path) => SweepSpec::from_path(path)?,
            None => SweepSpec::default(),
        };
        let flags = SweepSpec {
            protocol: None,
            r: self.r.clone(),
            n: self.n.clone(),
            eta: self.eta.clone(),
            x: self.x.clone(),
            gamma_t: self.gamma_t.clone(),
            m: self.m.clone(),
            lambda: self.lambda.clone(),
            cutoff: self.cutoff,
            nodes: self.nodes,
            format: self.format,
            seed: self.seed,
            mc_samples: self.mc_samples,
            z_re: self.z_re,
            z_im: self.z_im,
        };
        if flags.r.is_some() && flags.n.is_some() {
            return Err(CliError::Usage("give exactly one of --r or --N".into()));
        }
        Ok(file.overridden_by(flags))
    }
}

fn emit(table: &Table, format: Format, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) if path.as_os_str() != "-" => {
            let file = File::create(path)
                .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?;
            table.write_to(format, BufWriter::new(file))?;
        }
        _ => table.write_to(format, io::stdout().lock())?,
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let (protocol, args) = match &cli.command {
        Command::RemotePrep(a) => (Protocol::RemotePrep, a),
        Command::Teleport(a) => (Protocol::Teleport, a),
        Command::OracleCheck(a) => (Protocol::OracleCheck, a),
    };
    let spec = args.to_spec()?;
    let format = spec.format.unwrap_or_default();
    match protocol {
        Protocol::RemotePrep => emit(&run_remote_prep_sweep(&spec)?, format, args.out.as_ref())?,
        Protocol::Teleport => emit(&run_teleport_sweep(&spec)?, format, args.out.as_ref())?,
        Protocol::OracleCheck => {
            let report = run_oracle_check(&spec)?;
            emit(&report.table, format, args.out.as_ref())?;
            if !report.all_passed {
                let failed = report.table.rows.len()
                    - report
                        .table
                        .column("passed")
                        .unwrap()
                        .iter()
                        .filter(|c| ***c == true.into())
                        .count();
                eprintln!("oracle check: {failed} of {} points failed", report.table.rows.len());
                return Ok(EXIT_FAILURE);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e}");
            e.exit_code()
        }
    }
}
