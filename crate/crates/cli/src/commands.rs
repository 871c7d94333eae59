//! Command execution: a resolved parameter set in, named artifacts out.

use pingpong_core::attack::{eve_entropy_oracle, AttackParams, Branch, EffectiveForwardStats};
use pingpong_core::bounds::{
    forward_entropy_bound, key_rate, received_entropy_bound, KeyRateReport,
};
use pingpong_core::channel::{distance_grid, sweep_with, Sweep};
use pingpong_core::protocol::{
    estimate_statistics, rate_from_statistics, ObservedStatistics, SessionEngine, TrialOutcome,
};
use pingpong_core::qmath::binary_entropy;
use pingpong_core::{Error, Execution};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::to_json;
use crate::resolved::{AttackRunParams, KeyrateParams, Resolved, SimulateParams, SweepParams};

pub const REPORT_FILE: &str = "report.json";
pub const STATISTICS_FILE: &str = "statistics.json";
pub const TRANSCRIPT_FILE: &str = "transcript.csv";
pub const SWEEP_CSV_FILE: &str = "sweep.csv";
pub const SWEEP_JSON_FILE: &str = "sweep.json";
pub const ATTACK_FILE: &str = "attack.json";

/// What a command produced, before anything touches the filesystem.
#[derive(Debug)]
pub struct Artifacts {
    pub files: Vec<(&'static str, Vec<u8>)>,
    /// Human- or machine-readable text for standard output.
    pub stdout: String,
    /// The result is well-formed but the channel admits no key.
    pub degenerate: bool,
    pub warnings: Vec<String>,
}

pub fn execute(run: &Resolved, exec: Execution) -> CliResult<Artifacts> {
    match run {
        Resolved::Keyrate(p) => keyrate(p),
        Resolved::Sweep(p) => sweep(p, exec),
        Resolved::Simulate(p) => simulate(p, exec),
        Resolved::Attack(p) => attack(p),
    }
}

fn keyrate(p: &KeyrateParams) -> CliResult<Artifacts> {
    if !(p.prefactor.is_finite() && (0.0..=1.0).contains(&p.prefactor)) {
        return Err(CliError::Validation(format!(
            "--prefactor = {} must lie in [0, 1]",
            p.prefactor
        )));
    }
    let report = key_rate(p.p01_prime, p.p10_prime, p.eta_bwd, p.qber)?.with_prefactor(p.prefactor);
    let json = to_json(&report);
    Ok(Artifacts {
        stdout: String::from_utf8(json.clone()).expect("utf-8"),
        degenerate: report.degenerate,
        warnings: report.diagnostics.clone(),
        files: vec![(REPORT_FILE, json)],
    })
}

#[derive(Debug, Serialize)]
struct SweepRow {
    distance_km: f64,
    eta: f64,
    p01_prime: f64,
    qber: f64,
    rate_raw: Option<f64>,
    rate: f64,
    lg_rate: Option<f64>,
}

pub fn sweep_csv(sweep: &Sweep) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for pt in &sweep.points {
        w.serialize(SweepRow {
            distance_km: pt.distance_km,
            eta: pt.eta,
            p01_prime: pt.report.p01_prime,
            qber: pt.report.qber,
            rate_raw: pt.report.rate_raw,
            rate: pt.report.rate,
            lg_rate: pt.lg_rate(),
        })
        .expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

fn sweep(p: &SweepParams, exec: Execution) -> CliResult<Artifacts> {
    let grid = distance_grid(p.from_km, p.to_km, p.step_km)?;
    let result = sweep_with(exec, &p.channel, &grid)?;
    let cutoff = match result.cutoff_km {
        Some(d) => format!("cutoff_km: {d:.2}"),
        None => "cutoff_km: none".to_string(),
    };
    let warnings = result
        .points
        .iter()
        .filter(|pt| pt.report.degenerate)
        .map(|pt| format!("rate undefined at {} km", pt.distance_km))
        .collect();
    Ok(Artifacts {
        stdout: format!("rows: {}\n{cutoff}\n", result.points.len()),
        degenerate: false,
        warnings,
        files: vec![
            (SWEEP_CSV_FILE, sweep_csv(&result)),
            (SWEEP_JSON_FILE, to_json(&result)),
        ],
    })
}

pub fn transcript_csv(outcomes: &[TrialOutcome]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "trial",
        "mode_a",
        "mode_b",
        "op",
        "bob_result",
        "alice_ctrl",
    ])
    .expect("in-memory csv");
    for (i, t) in outcomes.iter().enumerate() {
        w.write_record([
            i.to_string().as_str(),
            t.mode_alice.label(),
            t.mode_bob.label(),
            t.alice_op.map_or("", |o| o.label()),
            t.bob_result.label(),
            t.alice_control_result.map_or("", |o| o.label()),
        ])
        .expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

fn summary(stats: &ObservedStatistics, report: &KeyRateReport) -> String {
    let qber = stats
        .qber_hat
        .map_or("undefined".to_string(), |q| format!("{q:.6}"));
    format!(
        "trials: {}\nmessage rounds: {} (detected {})\ncontrol rounds: {}\nqber_hat: {qber}\nrate: {:.6}\n",
        stats.n_trials, stats.n_message, stats.n_detected, stats.n_control, report.rate
    )
}

fn simulate(p: &SimulateParams, exec: Execution) -> CliResult<Artifacts> {
    let engine = SessionEngine::new(p.session, &p.attack, &p.backward)?;
    let outcomes = engine.simulate(exec);
    let stats = estimate_statistics(&outcomes, p.session.psi_outcome_policy)?;
    let report = rate_from_statistics(&stats)?;
    let mut files = vec![
        (STATISTICS_FILE, to_json(&stats)),
        (REPORT_FILE, to_json(&report)),
    ];
    if p.transcript {
        files.push((TRANSCRIPT_FILE, transcript_csv(&outcomes)));
    }
    Ok(Artifacts {
        stdout: summary(&stats, &report),
        degenerate: report.degenerate,
        warnings: report.diagnostics.clone(),
        files,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchAnalysis {
    pub branch: u8,
    pub efficiency: f64,
    pub flip_prime: f64,
    /// `S(A'|AE)` from explicit density matrices; `None` if the branch is lost.
    pub oracle_entropy: Option<f64>,
    /// `1 − H(p')`.
    pub analytic_entropy: Option<f64>,
    pub difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackAnalysis {
    pub params: AttackParams,
    pub eta_fwd: f64,
    pub p01_prime: f64,
    pub p10_prime: f64,
    pub branches: Vec<BranchAnalysis>,
    pub max_difference: Option<f64>,
    pub h_fwd: f64,
    pub eta_bwd: f64,
    pub eve_bound: Option<f64>,
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

pub fn analyze_attack(params: &AttackParams, eta_bwd: f64) -> CliResult<AttackAnalysis> {
    params.validate()?;
    let stats = EffectiveForwardStats::from_params(params);
    let mut diagnostics = Vec::new();
    let mut branches = Vec::new();
    for b in Branch::BOTH {
        let efficiency = stats.efficiency(b);
        let flip_prime = stats.flip(b);
        let (oracle, analytic) = if efficiency > 0.0 {
            (
                Some(eve_entropy_oracle(params, b)?),
                Some(1.0 - binary_entropy(flip_prime)?),
            )
        } else {
            diagnostics.push(format!("branch {} never arrives as a qubit", b.index()));
            (None, None)
        };
        branches.push(BranchAnalysis {
            branch: b.index() as u8,
            efficiency,
            flip_prime,
            oracle_entropy: oracle,
            analytic_entropy: analytic,
            difference: oracle.zip(analytic).map(|(o, a)| (o - a).abs()),
        });
    }
    let max_difference = branches
        .iter()
        .filter_map(|b| b.difference)
        .reduce(f64::max);
    let h_fwd = forward_entropy_bound(stats.p01_prime, stats.p10_prime)?;
    let mut degenerate = branches.iter().all(|b| b.efficiency == 0.0);
    if degenerate {
        diagnostics.push("both branches are vacuum-only".into());
    }
    let eve_bound = match received_entropy_bound(h_fwd, eta_bwd) {
        Ok(v) => Some(v),
        Err(Error::DegenerateChannel(m)) => {
            degenerate = true;
            diagnostics.push(m);
            None
        }
        Err(e) => return Err(e.into()),
    };
    Ok(AttackAnalysis {
        params: *params,
        eta_fwd: 0.5 * (stats.eta_fwd + stats.eta_fwd_1),
        p01_prime: stats.p01_prime,
        p10_prime: stats.p10_prime,
        branches,
        max_difference,
        h_fwd,
        eta_bwd,
        eve_bound,
        degenerate,
        diagnostics,
    })
}

fn attack(p: &AttackRunParams) -> CliResult<Artifacts> {
    let analysis = analyze_attack(&p.attack, p.eta_bwd)?;
    let json = to_json(&analysis);
    Ok(Artifacts {
        stdout: String::from_utf8(json.clone()).expect("utf-8"),
        degenerate: analysis.degenerate,
        warnings: analysis.diagnostics.clone(),
        files: vec![(ATTACK_FILE, json)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_attack_has_unit_entropies() {
        let a = analyze_attack(&AttackParams::identity(), 1.0).unwrap();
        for b in &a.branches {
            assert!((b.oracle_entropy.unwrap() - 1.0).abs() < 1e-12);
            assert!(b.difference.unwrap() < 1e-12);
        }
        assert_eq!(a.eve_bound, Some(1.0));
        assert!(!a.degenerate);
    }

    #[test]
    fn half_flip_attack_has_zero_entropy() {
        let p = AttackParams::new(0.0, 0.5, 0.5, 0.0, 0.5, 0.5).unwrap();
        let a = analyze_attack(&p, 1.0).unwrap();
        for b in &a.branches {
            assert!(b.oracle_entropy.unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn vacuum_only_attack_is_degenerate() {
        let a = analyze_attack(&AttackParams::pure_loss(), 1.0).unwrap();
        assert!(a.degenerate);
        assert!(a.branches.iter().all(|b| b.oracle_entropy.is_none()));
    }

    #[test]
    fn transcript_header_and_rows() {
        let t = TrialOutcome {
            mode_alice: pingpong_core::protocol::Mode::Control,
            mode_bob: pingpong_core::protocol::Mode::Control,
            alice_bit: None,
            alice_op: None,
            bob_result: pingpong_core::protocol::BobResult::Z1,
            alice_control_result: Some(pingpong_core::protocol::TravelOutcome::Vacuum),
        };
        let text = String::from_utf8(transcript_csv(&[t])).unwrap();
        assert_eq!(
            text,
            "trial,mode_a,mode_b,op,bob_result,alice_ctrl\n0,control,control,,z1,v\n"
        );
    }
}
