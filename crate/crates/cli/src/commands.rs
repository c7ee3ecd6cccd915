use std::time::Instant;

use qpoly::measures::{self, Cut};
use qpoly::optimizer::MeasurementSearch;
use qpoly::polygamy::{self, ChainOptions};
use qpoly::{generate, OptimizerConfig, SystemLayout, Verdict};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::report::{CheckRecord, FuzzReport, FuzzSummary, ReportRecord, Timing};
use crate::spec::{LoadedState, StateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Measure {
    Entropy,
    MutualInformation,
    Eof,
    Eoa,
    ClassicalCorrelation,
    UnlocalizableEntanglement,
    Discord,
    UnlocalizableDiscord,
    Concurrence,
    WoottersEof,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Entropy => "entropy",
            Measure::MutualInformation => "mutual-information",
            Measure::Eof => "eof",
            Measure::Eoa => "eoa",
            Measure::ClassicalCorrelation => "classical-correlation",
            Measure::UnlocalizableEntanglement => "unlocalizable-entanglement",
            Measure::Discord => "discord",
            Measure::UnlocalizableDiscord => "unlocalizable-discord",
            Measure::Concurrence => "concurrence",
            Measure::WoottersEof => "wootters-eof",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub optimizer: OptimizerConfig,
    pub chain: ChainOptions,
    /// Measurement route for classical correlation, UE and the discords.
    pub route: MeasurementSearch,
    pub identities: bool,
    pub allow_mixed: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            chain: ChainOptions::default(),
            route: MeasurementSearch::Dual,
            identities: true,
            allow_mixed: false,
        }
    }
}

/// `A,B` or, when every label is one character, `AB`.
pub fn split_labels(s: &str, layout: &SystemLayout) -> CliResult<Vec<String>> {
    let labels: Vec<String> = if s.contains(',') {
        s.split(',').map(|l| l.trim().to_string()).collect()
    } else if layout.contains(s) {
        vec![s.to_string()]
    } else {
        s.chars().map(|c| c.to_string()).collect()
    };
    for l in &labels {
        if !layout.contains(l) {
            return Err(CliError::Invalid(format!("unknown label `{l}`")));
        }
    }
    Ok(labels)
}

fn record(
    command: &str,
    state: &str,
    focus: Option<&str>,
    cfg: &RunConfig,
    checks: Vec<CheckRecord>,
    verdict: Option<Verdict>,
    start: Instant,
) -> ReportRecord {
    ReportRecord {
        command: command.into(),
        state: state.into(),
        seed: cfg.optimizer.seed,
        focus: focus.map(str::to_string),
        optimizer: cfg.optimizer.clone(),
        escalate: cfg.chain.escalate,
        checks,
        verdict,
        timing: Timing {
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    }
}

/// One measure on the marginal `keep` (default: everything), across the cut
/// `side | keep \ side` (default side: the first kept party).
pub fn cmd_compute(
    state: &LoadedState,
    echo: &str,
    measure: Measure,
    keep: Option<&[String]>,
    side: Option<&[String]>,
    cfg: &RunConfig,
) -> CliResult<ReportRecord> {
    let start = Instant::now();
    cfg.optimizer.validate()?;
    let full = state.density();
    let rho = match keep {
        Some(k) => full.partial_trace(k)?,
        None => full,
    };
    let kept: Vec<String> = rho
        .layout()
        .labels()
        .iter()
        .map(|s| s.to_string())
        .collect();
    let side: Vec<String> = match side {
        Some(s) => s.to_vec(),
        None => vec![kept[0].clone()],
    };
    let measured: Vec<String> = kept.iter().filter(|l| !side.contains(l)).cloned().collect();
    if measure != Measure::Entropy && measured.is_empty() {
        return Err(CliError::Invalid(
            "the cut leaves nothing on the other side".into(),
        ));
    }
    let cut = Cut::new(&side, &measured);
    let opt = &cfg.optimizer;
    let value = match measure {
        Measure::Entropy => measures::entropy(&rho),
        Measure::MutualInformation => measures::mutual_information(&rho, &cut)?,
        Measure::Eof => measures::eof(&rho, &cut, opt)?,
        Measure::Eoa => measures::eoa(&rho, &cut, opt)?,
        Measure::ClassicalCorrelation => {
            measures::classical_correlation(&rho, &cut, opt, cfg.route)?
        }
        Measure::UnlocalizableEntanglement => {
            measures::unlocalizable_entanglement(&rho, &cut, opt, cfg.route)?
        }
        Measure::Discord => measures::quantum_discord_with(&rho, &cut, opt, cfg.route)?,
        Measure::UnlocalizableDiscord => {
            measures::unlocalizable_discord_with(&rho, &cut, opt, cfg.route)?
        }
        Measure::WoottersEof => measures::wootters_eof_two_qubit(&rho)?,
        Measure::Concurrence => {
            let c = measures::concurrence_two_qubit(&rho)?;
            let check = CheckRecord::scalar(measure.name(), c);
            return Ok(record("compute", echo, None, cfg, vec![check], None, start));
        }
    };
    let check = CheckRecord::measure(measure.name(), &value);
    Ok(record("compute", echo, None, cfg, vec![check], None, start))
}

/// Both strong polygamy chains and the identity suite. Mixed input runs
/// only the best-effort entanglement chain, and only with `allow_mixed`.
pub fn cmd_verify(
    state: &LoadedState,
    echo: &str,
    focus: &str,
    cfg: &RunConfig,
) -> CliResult<ReportRecord> {
    let start = Instant::now();
    cfg.optimizer.validate()?;
    let mut checks = Vec::new();
    match state {
        LoadedState::Pure(psi) => {
            let ent =
                polygamy::strong_polygamy_entanglement(psi, focus, &cfg.optimizer, &cfg.chain)?;
            checks.push(CheckRecord::chain("entanglement-chain", &ent));
            checks.extend(CheckRecord::single_party("entanglement-single", &ent));
            let dis = polygamy::strong_polygamy_discord(psi, focus, &cfg.optimizer, &cfg.chain)?;
            checks.push(CheckRecord::chain("discord-chain", &dis));
            if cfg.identities {
                for c in polygamy::identity_suite(psi, focus, &cfg.optimizer)? {
                    checks.push(CheckRecord::identity(&c));
                }
            }
        }
        LoadedState::Mixed(rho) => {
            if !cfg.allow_mixed {
                return Err(CliError::Invalid(
                    "verify needs a pure state; --allow-mixed runs a best-effort entanglement chain".into(),
                ));
            }
            let ent = polygamy::strong_polygamy_entanglement_mixed(
                rho,
                focus,
                &cfg.optimizer,
                &cfg.chain,
            )?;
            checks.push(CheckRecord::chain("entanglement-chain", &ent));
            checks.extend(CheckRecord::single_party("entanglement-single", &ent));
        }
    }
    let verdict = ReportRecord::overall(&checks);
    Ok(record(
        "verify",
        echo,
        Some(focus),
        cfg,
        checks,
        Some(verdict),
        start,
    ))
}

/// `trials` Haar-random pure states; trial `k` uses state seed `seed + k`
/// and the run's optimizer config. Records come back in trial order.
pub fn cmd_fuzz(
    dims: &[usize],
    trials: usize,
    seed: u64,
    focus: &str,
    cfg: &RunConfig,
) -> CliResult<FuzzReport> {
    let start = Instant::now();
    if trials == 0 {
        return Err(CliError::Invalid("trials must be at least 1".into()));
    }
    let layout = SystemLayout::with_dims(dims)?;
    let records: Vec<ReportRecord> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let state_seed = seed.wrapping_add(k as u64);
            let kind = StateKind::RandomPure {
                dims: dims.to_vec(),
                seed: Some(state_seed),
            };
            let psi = generate::haar_random_pure(layout.clone(), state_seed);
            let r = cmd_verify(&LoadedState::Pure(psi), &kind.to_string(), focus, cfg);
            if let Ok(rec) = &r {
                log::info!("trial {k}: {:?}", rec.verdict);
            }
            r
        })
        .collect::<CliResult<_>>()?;
    let count = |v: Verdict| records.iter().filter(|r| r.verdict == Some(v)).count();
    let slacks: Vec<f64> = records
        .iter()
        .map(|r| {
            r.checks
                .iter()
                .filter_map(CheckRecord::min_slack)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let summary = FuzzSummary {
        trials,
        pass: count(Verdict::Pass),
        fail: count(Verdict::Fail),
        inconclusive: count(Verdict::Inconclusive),
        escalations: records
            .iter()
            .filter(|r| r.checks.iter().any(|c| c.escalated == Some(true)))
            .count(),
        min_slack: slacks.iter().copied().fold(f64::INFINITY, f64::min),
        nonnegative_slack_trials: slacks.iter().filter(|&&s| s >= 0.0).count(),
    };
    let verdict = records
        .iter()
        .filter_map(|r| r.verdict)
        .fold(Verdict::Pass, Verdict::and);
    Ok(FuzzReport {
        dims: dims.to_vec(),
        seed,
        records,
        summary,
        verdict,
        timing: Timing {
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    })
}
