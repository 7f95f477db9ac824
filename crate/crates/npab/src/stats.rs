//! Estimator studies: campaign summaries, Hoeffding bounds on the check
//! error rate, and the three-arm deviation comparison that pits basis
//! reuse with correlated attacks against a fresh-basis baseline.
//!
//! "Deviation" is operationalized as the standard deviation of the
//! per-session check-bit error rate. Each arm's empirical deviation is
//! reported next to an analytic prediction that accounts for the two
//! effects a naive block-variance count misses: the random check/code
//! partition splits every same-position block hypergeometrically, and
//! slots sharing a basis-sequence position have correlated errors even
//! under a per-slot-independent channel, because the basis itself is
//! shared.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{AttackStrategy, PauliProbs};
use crate::error::{Error, Result};
use crate::gf2codes::{steane_pair, NestedCodePair};
use crate::protocol::{run_session, BasisSequence, SessionParams, SessionTranscript};
use crate::qcore::{Basis, Pauli};
use crate::rng;
use crate::sources::SourceModel;

/// Configuration for a batch of identical sessions with per-session
/// derived seeds and a fresh random basis sequence per session.
#[derive(Debug, Clone)]
pub struct CampaignSpec {
    pub n: usize,
    pub r: usize,
    pub abort_threshold: f64,
    pub code_pair: Arc<NestedCodePair>,
    pub source: SourceModel,
    pub attack: AttackStrategy,
    /// Large campaigns can drop per-slot eavesdropper records to keep
    /// transcripts small; leakage experiments keep them.
    pub keep_eve_records: bool,
}

/// Runs `sessions` sessions in parallel. Session `i` derives its own seed
/// from `(master_seed, i)`, so results are independent of thread count and
/// arrive in session-index order.
pub fn run_campaign(
    spec: &CampaignSpec,
    sessions: usize,
    master_seed: u64,
) -> Result<Vec<SessionTranscript>> {
    if sessions == 0 {
        return Err(Error::EmptyInput(
            "campaign needs at least one session".into(),
        ));
    }
    (0..sessions)
        .into_par_iter()
        .map(|index| {
            let seed = rng::derive_indexed_seed(master_seed, "session", index as u64);
            let params = SessionParams {
                n: spec.n,
                r: spec.r,
                abort_threshold: spec.abort_threshold,
                seed,
                code_pair: Arc::clone(&spec.code_pair),
            };
            let b = BasisSequence::random(params.positions(), &mut rng::stream(seed, "basis"));
            let mut transcript = run_session(&params, &b, &spec.source, &spec.attack)?;
            if !spec.keep_eve_records {
                transcript.eve_record = None;
            }
            Ok(transcript)
        })
        .collect()
}

/// Descriptive statistics over a batch of transcripts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub sessions: usize,
    pub qber_mean: f64,
    pub qber_std: f64,
    pub abort_rate: f64,
    /// Fraction of non-aborted sessions whose keys agree; absent when
    /// every session aborted.
    pub key_agreement_rate: Option<f64>,
    pub qbers: Vec<f64>,
}

pub fn summarize(transcripts: &[SessionTranscript]) -> Result<CampaignSummary> {
    if transcripts.is_empty() {
        return Err(Error::EmptyInput(
            "cannot summarize zero transcripts".into(),
        ));
    }
    let qbers: Vec<f64> = transcripts.iter().map(|t| t.qber).collect();
    let aborted = transcripts.iter().filter(|t| t.aborted).count();
    let completed = transcripts.len() - aborted;
    let key_agreement_rate = if completed == 0 {
        None
    } else {
        let agreeing = transcripts
            .iter()
            .filter(|t| t.keys_agree() == Some(true))
            .count();
        Some(agreeing as f64 / completed as f64)
    };
    Ok(CampaignSummary {
        sessions: transcripts.len(),
        qber_mean: mean(&qbers),
        qber_std: sample_std(&qbers),
        abort_rate: aborted as f64 / transcripts.len() as f64,
        key_agreement_rate,
        qbers,
    })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two
/// samples.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    var.sqrt()
}

/// Two-sided Hoeffding interval for the true per-slot error probability
/// from an observed rate over `samples` independent slots. Not valid for
/// correlated attacks; callers label those arms inapplicable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingInterval {
    pub low: f64,
    pub high: f64,
    pub confidence: f64,
}

pub fn hoeffding_bound(
    observed: f64,
    samples: usize,
    confidence: f64,
) -> Result<HoeffdingInterval> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidProbability(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    if samples == 0 {
        return Err(Error::EmptyInput("Hoeffding bound needs samples".into()));
    }
    let epsilon = ((2.0 / (1.0 - confidence)).ln() / (2.0 * samples as f64)).sqrt();
    Ok(HoeffdingInterval {
        low: (observed - epsilon).max(0.0),
        high: (observed + epsilon).min(1.0),
        confidence,
    })
}

/// Which deviation-study arm a prediction refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviationArm {
    /// Fresh basis per slot (r = 1) with n/r check bits: the baseline.
    Bb84,
    /// Basis reuse with a per-slot-independent Pauli channel.
    NpabIndependent,
    /// Basis reuse with the per-position correlated Pauli channel.
    NpabCorrelated,
}

/// Analytic standard deviation of the per-session check error rate.
///
/// Let q_z and q_x be the channel's flip probabilities on Z- and X-basis
/// slots and p their mean. With N = 2n slots, P = 2n/r positions and K the
/// hypergeometric number of check slots falling in one position block
/// (E[K] = r/2), the variance of the check error rate is:
///
/// - baseline (iid slots, n/r checked): p(1-p) r / n
/// - independent channel, shared bases:
///   P * (E[K] * (q_z(1-q_z) + q_x(1-q_x))/2 + E[K^2] * ((q_z-q_x)/2)^2) / n^2
/// - correlated channel (whole blocks err together):
///   p(1-p) * P * E[K^2] / n^2
pub fn predicted_qber_std(arm: DeviationArm, n: usize, r: usize, marginal: &PauliProbs) -> f64 {
    let qz: f64 = Pauli::ALL
        .iter()
        .filter(|p| p.flips_bit_in(Basis::Z))
        .map(|&p| marginal.get(p))
        .sum();
    let qx: f64 = Pauli::ALL
        .iter()
        .filter(|p| p.flips_bit_in(Basis::X))
        .map(|&p| marginal.get(p))
        .sum();
    let p = 0.5 * (qz + qx);
    let n_f = n as f64;
    let r_f = r as f64;
    let variance = match arm {
        DeviationArm::Bb84 => p * (1.0 - p) * r_f / n_f,
        DeviationArm::NpabIndependent | DeviationArm::NpabCorrelated => {
            let positions = 2.0 * n_f / r_f;
            let mean_k = r_f / 2.0;
            let var_k = mean_k * (1.0 - r_f / (2.0 * n_f)) * (n_f / (2.0 * n_f - 1.0));
            let mean_k_sq = var_k + mean_k * mean_k;
            let total_var = if arm == DeviationArm::NpabCorrelated {
                p * (1.0 - p) * positions * mean_k_sq
            } else {
                let within = 0.5 * (qz * (1.0 - qz) + qx * (1.0 - qx));
                let between = 0.25 * (qz - qx) * (qz - qx);
                positions * (mean_k * within + mean_k_sq * between)
            };
            total_var / (n_f * n_f)
        }
    };
    variance.sqrt()
}

/// One arm of the deviation study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArmSummary {
    pub label: String,
    pub sessions: usize,
    pub check_bits: usize,
    pub qber_mean: f64,
    pub qber_std: f64,
    pub predicted_std: f64,
    /// 95% Hoeffding interval on the marginal error rate; absent for the
    /// correlated arm, where the independence assumption fails.
    pub hoeffding_95: Option<HoeffdingInterval>,
    pub qbers: Vec<f64>,
}

/// A ratio of two arms' standard deviations with a bootstrap confidence
/// interval. The percentile interval is widened, if necessary, to contain
/// the point estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub label: String,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bootstrap_se: f64,
    pub resamples: usize,
}

/// Full deviation report: three arms and their std ratios.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviationReport {
    pub n: usize,
    pub r: usize,
    pub sessions: usize,
    pub resamples: usize,
    pub marginal: PauliProbs,
    pub arms: Vec<ArmSummary>,
    pub ratios: Vec<RatioEstimate>,
}

/// Inputs of the deviation study.
#[derive(Debug, Clone)]
pub struct DeviationSpec {
    pub n: usize,
    pub r: usize,
    pub marginal: PauliProbs,
    pub sessions: usize,
    pub seed: u64,
}

pub const BOOTSTRAP_RESAMPLES: usize = 2000;

/// Abort threshold used inside study arms: statistics want every session's
/// error rate, so the threshold is pushed to the top of the open interval.
const STUDY_THRESHOLD: f64 = 0.999_999;

/// Runs the three-arm deviation study with a matched marginal channel:
///
/// - arm `bb84`: fresh basis per slot (r = 1) with n/r check bits, the
///   baseline random-sampling estimator;
/// - arm `npab-independent`: basis reuse over r rounds, per-slot Pauli;
/// - arm `npab-correlated`: basis reuse, one Pauli per position repeated
///   across all rounds.
pub fn deviation_study(spec: &DeviationSpec) -> Result<DeviationReport> {
    if spec.sessions < 200 {
        return Err(Error::InvalidParams(format!(
            "deviation study needs at least 200 sessions, got {}",
            spec.sessions
        )));
    }
    if spec.r == 0 || !(2 * spec.n).is_multiple_of(spec.r) || !spec.n.is_multiple_of(spec.r) {
        return Err(Error::InvalidParams(format!(
            "r must divide both n and 2n: n = {}, r = {}",
            spec.n, spec.r
        )));
    }
    let pair = Arc::new(steane_pair());
    if spec.n / spec.r < pair.block_len() {
        return Err(Error::InvalidParams(format!(
            "baseline arm needs n/r >= {}, got {}",
            pair.block_len(),
            spec.n / spec.r
        )));
    }

    let run_arm = |label: &str,
                   arm: DeviationArm,
                   n: usize,
                   r: usize,
                   attack: AttackStrategy|
     -> Result<ArmSummary> {
        let campaign = CampaignSpec {
            n,
            r,
            abort_threshold: STUDY_THRESHOLD,
            code_pair: Arc::clone(&pair),
            source: SourceModel::Ideal,
            attack,
            keep_eve_records: false,
        };
        let seed = rng::derive_seed(spec.seed, label);
        let transcripts = run_campaign(&campaign, spec.sessions, seed)?;
        let qbers: Vec<f64> = transcripts.iter().map(|t| t.qber).collect();
        let qber_mean = mean(&qbers);
        let hoeffding_95 = match arm {
            DeviationArm::NpabCorrelated => None,
            _ => Some(hoeffding_bound(qber_mean, spec.sessions * n, 0.95)?),
        };
        Ok(ArmSummary {
            label: label.to_string(),
            sessions: spec.sessions,
            check_bits: n,
            qber_mean,
            qber_std: sample_std(&qbers),
            predicted_std: predicted_qber_std(arm, n, r, &spec.marginal),
            hoeffding_95,
            qbers,
        })
    };

    let arms = vec![
        run_arm(
            "bb84",
            DeviationArm::Bb84,
            spec.n / spec.r,
            1,
            AttackStrategy::PauliChannel(spec.marginal),
        )?,
        run_arm(
            "npab-independent",
            DeviationArm::NpabIndependent,
            spec.n,
            spec.r,
            AttackStrategy::PauliChannel(spec.marginal),
        )?,
        run_arm(
            "npab-correlated",
            DeviationArm::NpabCorrelated,
            spec.n,
            spec.r,
            AttackStrategy::CorrelatedPauli(spec.marginal),
        )?,
    ];

    let mut boot_rng = rng::stream(spec.seed, "bootstrap");
    let ratios = vec![
        bootstrap_std_ratio(
            "correlated/independent",
            &arms[2].qbers,
            &arms[1].qbers,
            BOOTSTRAP_RESAMPLES,
            &mut boot_rng,
        ),
        bootstrap_std_ratio(
            "correlated/bb84",
            &arms[2].qbers,
            &arms[0].qbers,
            BOOTSTRAP_RESAMPLES,
            &mut boot_rng,
        ),
        bootstrap_std_ratio(
            "independent/bb84",
            &arms[1].qbers,
            &arms[0].qbers,
            BOOTSTRAP_RESAMPLES,
            &mut boot_rng,
        ),
    ];

    Ok(DeviationReport {
        n: spec.n,
        r: spec.r,
        sessions: spec.sessions,
        resamples: BOOTSTRAP_RESAMPLES,
        marginal: spec.marginal,
        arms,
        ratios,
    })
}

/// Analytic and sampled distinguishability of a source's Z- and
/// X-conditioned ensembles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceAuditReport {
    pub source: SourceModel,
    pub analytic_trace_distance: f64,
    pub empirical_trace_distance: f64,
    pub samples: usize,
}

/// Audits a source: the analytic trace distance between the two ensemble
/// densities, next to an estimate from `samples` sampled emissions per
/// basis.
pub fn source_audit(source: &SourceModel, samples: usize, seed: u64) -> Result<SourceAuditReport> {
    source.validate()?;
    if samples == 0 {
        return Err(Error::EmptyInput("source audit needs samples".into()));
    }
    let analytic = crate::qcore::trace_distance(
        &source.ensemble_density(Basis::Z),
        &source.ensemble_density(Basis::X),
    );
    let mut audit_rng = rng::stream(seed, "audit");
    let weight = 1.0 / samples as f64;
    let mut empirical = Vec::with_capacity(2);
    for basis in [Basis::Z, Basis::X] {
        let members: Vec<(f64, crate::qcore::QubitState)> = (0..samples)
            .map(|_| {
                let bit: bool = audit_rng.gen();
                (weight, source.emit(bit, basis, &mut audit_rng).1)
            })
            .collect();
        empirical.push(crate::qcore::density_of_ensemble(&members)?);
    }
    Ok(SourceAuditReport {
        source: *source,
        analytic_trace_distance: analytic,
        empirical_trace_distance: crate::qcore::trace_distance(&empirical[0], &empirical[1]),
        samples,
    })
}

/// Runs sessions with a measuring eavesdropper and estimates how much she
/// learns about the basis sequence. Eve records are kept regardless of the
/// spec's flag; the basis sequence of each session is recovered from its
/// transcript.
pub fn basis_info_experiment(
    spec: &CampaignSpec,
    sessions: usize,
    master_seed: u64,
) -> Result<crate::adversary::BasisInfoEstimate> {
    let mut spec = spec.clone();
    spec.keep_eve_records = true;
    let positions = 2 * spec.n / spec.r;
    let transcripts = run_campaign(&spec, sessions, master_seed)?;
    let data: Vec<(crate::adversary::EveRecord, crate::gf2codes::BitVector)> = transcripts
        .into_iter()
        .map(|t| {
            let record = t.eve_record.clone().ok_or_else(|| {
                Error::EmptyInput("basis-info needs an eavesdropping strategy".into())
            })?;
            Ok((record, t.slot_bases.slice(0, positions)))
        })
        .collect::<Result<_>>()?;
    crate::adversary::eve_basis_information(&data)
}

fn resample<R: Rng + ?Sized>(xs: &[f64], rng: &mut R) -> Vec<f64> {
    (0..xs.len())
        .map(|_| xs[rng.gen_range(0..xs.len())])
        .collect()
}

/// Bootstrap standard error of the sample standard deviation.
pub fn bootstrap_std_se<R: Rng + ?Sized>(xs: &[f64], resamples: usize, rng: &mut R) -> f64 {
    let stds: Vec<f64> = (0..resamples)
        .map(|_| sample_std(&resample(xs, rng)))
        .collect();
    sample_std(&stds)
}

/// Bootstrap percentile CI (2.5%, 97.5%) for std(numer)/std(denom),
/// resampling both arms independently.
pub fn bootstrap_std_ratio<R: Rng + ?Sized>(
    label: &str,
    numer: &[f64],
    denom: &[f64],
    resamples: usize,
    rng: &mut R,
) -> RatioEstimate {
    let point = sample_std(numer) / sample_std(denom);
    let mut ratios: Vec<f64> = (0..resamples)
        .map(|_| {
            let rn = sample_std(&resample(numer, rng));
            let rd = sample_std(&resample(denom, rng));
            rn / rd
        })
        .collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).expect("no NaN ratios"));
    let lo_idx = ((resamples as f64) * 0.025).floor() as usize;
    let hi_idx = (((resamples as f64) * 0.975).ceil() as usize).min(resamples - 1);
    RatioEstimate {
        label: label.to_string(),
        point,
        ci_low: ratios[lo_idx].min(point),
        ci_high: ratios[hi_idx].max(point),
        bootstrap_se: sample_std(&ratios),
        resamples,
    }
}
