//! `pingpong` command-line front end: argument parsing, merging of config
//! file and flags, and artifact output.

pub mod commands;
pub mod error;
pub mod output;
pub mod resolved;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pingpong_core::attack::AttackParams;
use pingpong_core::channel::{forward_error, message_qber, ChannelParams};
use pingpong_core::config::ConfigDocument;
use pingpong_core::protocol::{ForwardRealization, PsiOutcomePolicy};
use pingpong_core::Execution;

use crate::commands::{execute, Artifacts};
use crate::error::{CliError, CliResult, EXIT_DEGENERATE, EXIT_OK};
use crate::output::{read_json, OutputDir, RunManifest};
use crate::resolved::{AttackRunParams, KeyrateParams, Resolved, SimulateParams, SweepParams};

pub const CONFIG_ENV: &str = "PINGPONG_CONFIG";

#[derive(Debug, Parser)]
#[command(
    name = "pingpong",
    version,
    about = "Key-rate analysis and simulation of the modified Ping-Pong QKD protocol"
)]
pub struct Cli {
    /// JSON config with optional "attack", "backward", "channel", "session" sections.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,

    /// Run without the thread pool (outputs are identical either way).
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the key-rate bound at one operating point.
    Keyrate(KeyrateArgs),
    /// Rate versus distance for the fiber/detector model.
    Sweep(SweepArgs),
    /// Monte Carlo session with estimated statistics and rate.
    Simulate(SimulateArgs),
    /// Eve's conditional entropies for a forward attack, matrix vs closed form.
    Attack(AttackArgs),
    /// Re-run the command recorded in a manifest and verify its checksums.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct KeyrateArgs {
    #[arg(long)]
    pub p01_prime: Option<f64>,
    #[arg(long)]
    pub p10_prime: Option<f64>,
    #[arg(long)]
    pub eta_bwd: Option<f64>,
    #[arg(long)]
    pub qber: Option<f64>,
    /// Detection prefactor for per-trial rates (1 = per detected pair).
    #[arg(long)]
    pub prefactor: Option<f64>,
    /// Also write report.json and manifest.json here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChannelOverrides {
    #[arg(long)]
    pub attenuation: Option<f64>,
    #[arg(long)]
    pub detector_efficiency: Option<f64>,
    #[arg(long)]
    pub dark_count_prob: Option<f64>,
    #[arg(long)]
    pub misalignment: Option<f64>,
}

impl ChannelOverrides {
    fn apply(&self, mut c: ChannelParams) -> ChannelParams {
        if let Some(v) = self.attenuation {
            c.attenuation_db_per_km = v;
        }
        if let Some(v) = self.detector_efficiency {
            c.detector_efficiency = v;
        }
        if let Some(v) = self.dark_count_prob {
            c.dark_count_prob = v;
        }
        if let Some(v) = self.misalignment {
            c.misalignment = v;
        }
        c
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0.0)]
    pub from_km: f64,
    #[arg(long, default_value_t = 60.0)]
    pub to_km: f64,
    #[arg(long, default_value_t = 1.0)]
    pub step_km: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub channel: ChannelOverrides,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PsiPolicyArg {
    CountAsError,
    Discard,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RealizationArg {
    Coherent,
    OrthonormalAncilla,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Message-mode probability c for each party.
    #[arg(long)]
    pub message_prob: Option<f64>,
    #[arg(long, value_enum)]
    pub psi_policy: Option<PsiPolicyArg>,
    #[arg(long, value_enum)]
    pub realization: Option<RealizationArg>,
    /// Derive both channels from the fiber model at this distance.
    #[arg(long)]
    pub distance_km: Option<f64>,
    /// Also write the per-trial transcript.csv.
    #[arg(long)]
    pub transcript: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    /// Forward attack as p0v,p00,p01,p1v,p10,p11 (overrides the config).
    #[arg(long, value_delimiter = ',')]
    pub attack: Option<Vec<f64>>,
    /// Backward efficiency for the bound; defaults to the config's backward
    /// channel, else 1.
    #[arg(long)]
    pub eta_bwd: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn load_config(path: Option<&Path>) -> CliResult<ConfigDocument> {
    match path {
        Some(p) => read_json(p, "config"),
        None => Ok(ConfigDocument::default()),
    }
}

fn require(flag: &str, value: Option<f64>) -> CliResult<f64> {
    value.ok_or_else(|| {
        CliError::Validation(format!(
            "missing --{flag} (give the flag or a \"channel\" config section)"
        ))
    })
}

pub fn resolve_keyrate(args: &KeyrateArgs, config: &ConfigDocument) -> CliResult<KeyrateParams> {
    let derived = config
        .channel
        .map(|c| -> CliResult<_> {
            let p = forward_error(&c)?;
            Ok((p, c.eta(), message_qber(&c)?, c.eta().powi(4)))
        })
        .transpose()?;
    Ok(KeyrateParams {
        p01_prime: require("p01-prime", args.p01_prime.or(derived.map(|d| d.0)))?,
        p10_prime: require("p10-prime", args.p10_prime.or(derived.map(|d| d.0)))?,
        eta_bwd: require("eta-bwd", args.eta_bwd.or(derived.map(|d| d.1)))?,
        qber: require("qber", args.qber.or(derived.map(|d| d.2)))?,
        prefactor: args.prefactor.or(derived.map(|d| d.3)).unwrap_or(1.0),
    })
}

pub fn resolve_sweep(args: &SweepArgs, config: &ConfigDocument) -> CliResult<SweepParams> {
    let channel = args.channel.apply(config.channel.unwrap_or_default());
    channel.validate()?;
    Ok(SweepParams {
        channel,
        from_km: args.from_km,
        to_km: args.to_km,
        step_km: args.step_km,
    })
}

pub fn resolve_simulate(args: &SimulateArgs, config: &ConfigDocument) -> CliResult<SimulateParams> {
    let mut session = config.session.unwrap_or_default();
    if let Some(n) = args.trials {
        session.n_trials = n;
    }
    if let Some(s) = args.seed {
        session.rng_seed = s;
    }
    if let Some(c) = args.message_prob {
        session.message_mode_prob = c;
    }
    if let Some(p) = args.psi_policy {
        session.psi_outcome_policy = match p {
            PsiPolicyArg::CountAsError => PsiOutcomePolicy::CountAsError,
            PsiPolicyArg::Discard => PsiOutcomePolicy::Discard,
        };
    }
    if let Some(r) = args.realization {
        session.forward_realization = match r {
            RealizationArg::Coherent => ForwardRealization::Coherent,
            RealizationArg::OrthonormalAncilla => ForwardRealization::OrthonormalAncilla,
        };
    }
    session.validate()?;
    let (attack, backward) = match args.distance_km {
        Some(d) => config
            .channel
            .unwrap_or_default()
            .at_distance(d)
            .to_session_channels()?,
        None => config
            .session_channels()
            .map_err(|e| CliError::Validation(format!("{e} (or pass --distance-km)")))?,
    };
    Ok(SimulateParams {
        session,
        attack,
        backward,
        transcript: args.transcript,
    })
}

pub fn resolve_attack(args: &AttackArgs, config: &ConfigDocument) -> CliResult<AttackRunParams> {
    let attack = match &args.attack {
        Some(v) if v.len() == 6 => AttackParams::new(v[0], v[1], v[2], v[3], v[4], v[5])?,
        Some(v) => {
            return Err(CliError::Validation(format!(
                "--attack needs 6 comma-separated values (p0v,p00,p01,p1v,p10,p11), got {}",
                v.len()
            )))
        }
        None => config.attack.ok_or_else(|| {
            CliError::Validation("missing --attack (or an \"attack\" config section)".into())
        })?,
    };
    let eta_bwd = args
        .eta_bwd
        .or(config.backward.map(|b| b.efficiency()))
        .unwrap_or(1.0);
    Ok(AttackRunParams { attack, eta_bwd })
}

/// Writes artifacts and the manifest, or prints only, when no directory is
/// given.
fn emit(
    artifacts: &Artifacts,
    run: Resolved,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> CliResult<Option<RunManifest>> {
    let manifest = match out {
        Some(dir) => {
            let mut od = OutputDir::create(dir)?;
            for (name, bytes) in &artifacts.files {
                od.write(name, bytes)?;
            }
            Some(od.finish(run)?)
        }
        None => None,
    };
    stdout
        .write_all(artifacts.stdout.as_bytes())
        .map_err(|e| CliError::io("<stdout>", e))?;
    Ok(manifest)
}

fn replay(args: &ReplayArgs, exec: Execution, stdout: &mut dyn Write) -> CliResult<bool> {
    let recorded: RunManifest = read_json(&args.manifest, "manifest")?;
    let artifacts = execute(&recorded.run, exec)?;
    let fresh = emit(&artifacts, recorded.run.clone(), Some(&args.out), stdout)?
        .expect("output directory given");
    if fresh.outputs != recorded.outputs {
        return Err(CliError::Validation(format!(
            "replayed outputs differ from {}",
            args.manifest.display()
        )));
    }
    writeln!(
        stdout,
        "replay of {} matches {} recorded checksums",
        recorded.run.name(),
        recorded.outputs.len()
    )
    .map_err(|e| CliError::io("<stdout>", e))?;
    Ok(artifacts.degenerate)
}

/// Runs a parsed command line; returns the exit status.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let result = (|| -> CliResult<bool> {
        let config = load_config(cli.config.as_deref())?;
        let (run, out) = match &cli.command {
            Command::Keyrate(a) => (
                Resolved::Keyrate(resolve_keyrate(a, &config)?),
                a.out.clone(),
            ),
            Command::Sweep(a) => (
                Resolved::Sweep(resolve_sweep(a, &config)?),
                Some(a.out.clone()),
            ),
            Command::Simulate(a) => (
                Resolved::Simulate(resolve_simulate(a, &config)?),
                Some(a.out.clone()),
            ),
            Command::Attack(a) => (Resolved::Attack(resolve_attack(a, &config)?), a.out.clone()),
            Command::Replay(a) => return replay(a, exec, stdout),
        };
        let artifacts = execute(&run, exec)?;
        for w in &artifacts.warnings {
            let _ = writeln!(stderr, "warning: {w}");
        }
        emit(&artifacts, run, out.as_deref(), stdout)?;
        Ok(artifacts.degenerate)
    })();
    match result {
        Ok(false) => EXIT_OK,
        Ok(true) => EXIT_DEGENERATE,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
