//! Command-line front end. Every simulation subcommand is deterministic for a
//! fixed seed and writes CSV.

mod bench;
mod keys;
mod sim;

pub use sim::stability_run;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::auth::AuthMode;
use crate::crypto::ParamsId;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QKDAUTH_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "qkdauth", version, about = "QKD network authentication simulator")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Output {
    /// Output file; defaults to $QKDAUTH_OUT_DIR/<command>.csv, or stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Key rate and QBER against fiber length.
    Sweep {
        #[arg(long, default_value = "paper-cal")]
        params: String,
        /// Comma list (`10,20,50`) or range (`10:100:10`); empty for none.
        #[arg(long, default_value = "10:100:10", allow_hyphen_values = true)]
        lengths: String,
        #[arg(long)]
        seed: u64,
        /// Five-minute windows simulated per length.
        #[arg(long, default_value_t = 3)]
        windows: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Runs a session plan over a topology.
    Scenario {
        #[arg(long)]
        plan: String,
        /// Overrides the topology named in the plan.
        #[arg(long)]
        topology: Option<String>,
        /// Required unless the plan carries one.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mode: Option<AuthMode>,
        #[command(flatten)]
        output: Output,
    },
    /// Intercept-resend on the quantum channel and/or a man in the middle on
    /// the classical one.
    Attack {
        #[arg(long, default_value = "allpass4")]
        topology: String,
        /// Pair as `U1-U2`.
        #[arg(long)]
        pair: String,
        #[arg(long, default_value_t = 0.0)]
        attack_fraction: f64,
        #[arg(long)]
        mitm: bool,
        #[arg(long, default_value = "pqc")]
        mode: AuthMode,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 60)]
        duration: u64,
        #[arg(long, default_value = "paper-cal")]
        params: String,
        /// Exit with status 4 when authentication fails.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Long unattended run with drift and feedback.
    Stability {
        #[arg(long, default_value = "paper-cal")]
        params: String,
        #[arg(long, default_value_t = 30.0)]
        hours: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        length: Option<f64>,
        #[arg(long, default_value = "pqc")]
        mode: AuthMode,
        /// Full two-way authentication every this many cycles.
        #[arg(long, default_value_t = 60)]
        auth_every: u64,
        /// Per-second trace; defaults to `<out>-trace.csv` next to `--out`.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Wall-clock timing of signing, verification and MAC tagging.
    Authbench {
        #[arg(long, default_value = "pqc")]
        mode: AuthMode,
        #[arg(long, default_value_t = 100)]
        iterations: u32,
        #[arg(long = "sig-params", default_value = "reference")]
        sig_params: ParamsId,
        #[command(flatten)]
        output: Output,
    },
    /// Writes `<prefix>.pub` and `<prefix>.sec`.
    Keygen {
        #[arg(long = "sig-params", default_value = "reference")]
        sig_params: ParamsId,
        /// Deterministic key from a seed; OS randomness otherwise.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        prefix: PathBuf,
    },
    /// Issues a certificate for a public key file.
    Issue {
        #[arg(long)]
        ca_key: PathBuf,
        #[arg(long, default_value = "CA")]
        ca_name: String,
        #[arg(long)]
        subject: String,
        #[arg(long)]
        subject_key: PathBuf,
        #[arg(long, default_value_t = 0)]
        not_before: u64,
        #[arg(long, default_value_t = u32::MAX as u64)]
        not_after: u64,
        /// Serial of the CA's previous certificate.
        #[arg(long, default_value_t = 0)]
        last_serial: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Checks a certificate against a CA public key.
    VerifyCert {
        #[arg(long)]
        ca_pub: PathBuf,
        #[arg(long, default_value = "CA")]
        ca_name: String,
        #[arg(long)]
        cert: PathBuf,
        #[arg(long, default_value_t = 0)]
        now: u64,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("simulation error: {0}")]
    Simulation(String),
    #[error("authentication failed: {0}")]
    AuthFailure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Simulation(_) => 3,
            CliError::AuthFailure(_) => 4,
        }
    }
}

impl From<crate::netsim::NetsimError> for CliError {
    fn from(e: crate::netsim::NetsimError) -> Self {
        use crate::netsim::NetsimError as N;
        match e {
            N::Config(_) | N::UnknownNode(_) | N::SameEndpoint(_) => CliError::Config(e.to_string()),
            N::Qkd(crate::qkd::QkdError::Config(_) | crate::qkd::QkdError::InvalidParams(_)) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Simulation(e.to_string()),
        }
    }
}

impl From<crate::qkd::QkdError> for CliError {
    fn from(e: crate::qkd::QkdError) -> Self {
        use crate::qkd::QkdError as Q;
        match e {
            Q::Io(_) => CliError::Simulation(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Where a subcommand's main CSV goes.
pub(crate) fn resolve_out(out: &Output, default_name: &str) -> Option<PathBuf> {
    out.out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(default_name)))
}

pub(crate) fn write_output(path: Option<&PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(p, text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Config(e.to_string())),
    }
}

/// Runs one parsed invocation. Human-readable notes go to `stderr`.
pub fn run(cfg: RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match cfg.command {
        Command::Sweep { params, lengths, seed, windows, output } => {
            sim::sweep(&params, &lengths, seed, windows, &output, stdout)
        }
        Command::Scenario { plan, topology, seed, mode, output } => {
            sim::scenario(&plan, topology.as_deref(), seed, mode, &output, stdout, stderr)
        }
        Command::Attack { topology, pair, attack_fraction, mitm, mode, seed, duration, params, check, output } => {
            let a = sim::AttackArgs { topology, pair, attack_fraction, mitm, mode, seed, duration, params, check };
            sim::attack(&a, &output, stdout, stderr)
        }
        Command::Stability { params, hours, seed, length, mode, auth_every, trace, output } => {
            let a = sim::StabilityArgs { params, hours, seed, length, mode, auth_every, trace };
            sim::stability(&a, &output, stdout, stderr)
        }
        Command::Authbench { mode, iterations, sig_params, output } => {
            bench::authbench(mode, iterations, sig_params, &output, stdout)
        }
        Command::Keygen { sig_params, seed, prefix } => keys::keygen(sig_params, seed, &prefix, stderr),
        Command::Issue { ca_key, ca_name, subject, subject_key, not_before, not_after, last_serial, seed, out } => {
            let a = keys::IssueArgs { ca_key, ca_name, subject, subject_key, not_before, not_after, last_serial, seed, out };
            keys::issue(&a, stderr)
        }
        Command::VerifyCert { ca_pub, ca_name, cert, now } => keys::verify_cert(&ca_pub, &ca_name, &cert, now, stdout),
    }
}

/// Parses `args`, runs, prints any error, and returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    match run(cfg, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "qkdauth: {e}");
            e.exit_code()
        }
    }
}
