//! Experiment configuration: a flat, diff-friendly text format of
//! `section.key = value` lines.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys,
//! duplicate keys, keys that do not apply to the configured models, and
//! any cross-field constraint violation are all rejected before any
//! computation starts, with a diagnostic naming the offending key.
//!
//! ```text
//! experiment.kind = campaign
//! session.n = 14336
//! session.r = 4
//! session.seed = 42
//! attack.model = intercept-resend
//! attack.basis_policy = uniform-random
//! campaign.sessions = 200
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use crate::adversary::{AttackStrategy, BasisPolicy, PauliProbs};
use crate::error::{Error, Result};
use crate::gf2codes::{parity_over_repetition, parse_code_pair, steane_pair, NestedCodePair};
use crate::protocol::SessionParams;
use crate::qcore::Basis;
use crate::sources::SourceModel;
use crate::stats::{CampaignSpec, DeviationSpec};

/// What the run should do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Single,
    Campaign,
    DeviationStudy,
    SourceAudit,
    BasisInfo,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Single => "single",
            ExperimentKind::Campaign => "campaign",
            ExperimentKind::DeviationStudy => "deviation-study",
            ExperimentKind::SourceAudit => "source-audit",
            ExperimentKind::BasisInfo => "basis-info",
        }
    }
}

/// Which nested code pair to use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeSpec {
    Steane,
    ParityRepetition(usize),
    File(String),
}

impl CodeSpec {
    /// Block length, when it is known without touching the filesystem.
    fn known_block_len(&self) -> Option<usize> {
        match self {
            CodeSpec::Steane => Some(7),
            CodeSpec::ParityRepetition(n) => Some(*n),
            CodeSpec::File(_) => None,
        }
    }

    /// Loads and validates the pair. Relative file paths resolve against
    /// `base_dir` (the config file's directory).
    pub fn resolve(&self, base_dir: &Path) -> Result<NestedCodePair> {
        match self {
            CodeSpec::Steane => Ok(steane_pair()),
            CodeSpec::ParityRepetition(n) => parity_over_repetition(*n),
            CodeSpec::File(path) => {
                let full = base_dir.join(path);
                let text = std::fs::read_to_string(&full).map_err(|e| {
                    Error::InvalidConfig(format!("cannot read code pair {}: {e}", full.display()))
                })?;
                parse_code_pair(&text)
            }
        }
    }
}

/// A fully validated experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: Option<usize>,
    pub r: Option<usize>,
    pub abort_threshold: f64,
    pub seed: u64,
    pub code: CodeSpec,
    pub source: SourceModel,
    pub attack: AttackStrategy,
    pub sessions: Option<usize>,
    pub audit_samples: usize,
    pub output_dir: Option<String>,
}

const KNOWN_KEYS: &[&str] = &[
    "experiment.kind",
    "session.n",
    "session.r",
    "session.abort_threshold",
    "session.seed",
    "code.pair",
    "source.model",
    "source.delta",
    "source.fidelity",
    "attack.model",
    "attack.basis_policy",
    "attack.p_i",
    "attack.p_x",
    "attack.p_y",
    "attack.p_z",
    "attack.measure_basis",
    "campaign.sessions",
    "audit.samples",
    "output.dir",
];

struct RawConfig {
    entries: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(_, value)| value)
    }

    fn parse_as<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(value) => value
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse value {value:?}"))),
        }
    }

    fn require<T>(&self, key: &str, value: Option<T>) -> Result<T> {
        value.ok_or_else(|| Error::InvalidConfig(format!("{key} is required here")))
    }

    fn forbid(&self, key: &str, reason: &str) -> Result<()> {
        if self.entries.contains_key(key) {
            return Err(Error::InvalidConfig(format!(
                "{key} is only valid {reason}"
            )));
        }
        Ok(())
    }
}

fn tokenize(text: &str) -> Result<RawConfig> {
    let mut entries = BTreeMap::new();
    for (line_no, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidConfig(format!(
                "line {}: expected `key = value`, got {line:?}",
                line_no + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::InvalidConfig(format!(
                "line {}: unknown key {key:?}",
                line_no + 1
            )));
        }
        if entries.insert(key.clone(), (line_no + 1, value)).is_some() {
            return Err(Error::InvalidConfig(format!(
                "line {}: duplicate key {key:?}",
                line_no + 1
            )));
        }
    }
    Ok(RawConfig { entries })
}

/// Parses and fully validates a config. Pure: file-backed code pairs are
/// resolved later via [`CodeSpec::resolve`].
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut raw = tokenize(text)?;

    let kind = match raw.take("experiment.kind").as_deref() {
        Some("single") => ExperimentKind::Single,
        Some("campaign") => ExperimentKind::Campaign,
        Some("deviation-study") => ExperimentKind::DeviationStudy,
        Some("source-audit") => ExperimentKind::SourceAudit,
        Some("basis-info") => ExperimentKind::BasisInfo,
        Some(other) => {
            return Err(Error::InvalidConfig(format!(
                "experiment.kind: unknown kind {other:?}"
            )))
        }
        None => {
            return Err(Error::InvalidConfig("experiment.kind is required".into()));
        }
    };

    let n: Option<usize> = raw.parse_as("session.n")?;
    let r: Option<usize> = raw.parse_as("session.r")?;
    let abort_threshold: f64 = raw.parse_as("session.abort_threshold")?.unwrap_or(0.11);
    let seed: u64 = {
        let parsed = raw.parse_as("session.seed")?;
        raw.require("session.seed", parsed)?
    };

    let code = match raw.take("code.pair") {
        None => CodeSpec::Steane,
        Some(value) => parse_code_spec(&value)?,
    };

    let source = parse_source(&mut raw)?;
    let attack = parse_attack(&mut raw)?;

    let sessions: Option<usize> = raw.parse_as("campaign.sessions")?;
    let audit_samples: usize = raw.parse_as("audit.samples")?.unwrap_or(100_000);
    let output_dir = raw.take("output.dir");

    if !raw.entries.is_empty() {
        // tokenize() already rejected unknown keys; anything left is a
        // known key that was not consumed, which cannot happen.
        let leftover: Vec<&String> = raw.entries.keys().collect();
        return Err(Error::InvalidConfig(format!("unused keys: {leftover:?}")));
    }

    let config = ExperimentConfig {
        kind,
        n,
        r,
        abort_threshold,
        seed,
        code,
        source,
        attack,
        sessions,
        audit_samples,
        output_dir,
    };
    validate_cross_fields(&config)?;
    Ok(config)
}

fn parse_code_spec(value: &str) -> Result<CodeSpec> {
    if value == "steane" {
        return Ok(CodeSpec::Steane);
    }
    if let Some(n) = value.strip_prefix("parity-repetition-") {
        let n: usize = n.parse().map_err(|_| {
            Error::InvalidConfig(format!("code.pair: bad parity-repetition length {n:?}"))
        })?;
        return Ok(CodeSpec::ParityRepetition(n));
    }
    if let Some(path) = value.strip_prefix("file:") {
        if path.is_empty() {
            return Err(Error::InvalidConfig("code.pair: empty file path".into()));
        }
        return Ok(CodeSpec::File(path.to_string()));
    }
    Err(Error::InvalidConfig(format!(
        "code.pair: expected steane, parity-repetition-N or file:PATH, got {value:?}"
    )))
}

fn parse_source(raw: &mut RawConfig) -> Result<SourceModel> {
    let model = raw.take("source.model");
    match model.as_deref() {
        None | Some("ideal") => {
            raw.forbid("source.delta", "with source.model = imperfect-direct")?;
            raw.forbid("source.fidelity", "with source.model = entangled")?;
            Ok(SourceModel::Ideal)
        }
        Some("imperfect-direct") => {
            raw.forbid("source.fidelity", "with source.model = entangled")?;
            let delta: Option<f64> = raw.parse_as("source.delta")?;
            let delta = raw.require("source.delta", delta)?;
            SourceModel::imperfect_direct(delta)
                .map_err(|e| Error::InvalidConfig(format!("source.delta: {e}")))
        }
        Some("entangled") => {
            raw.forbid("source.delta", "with source.model = imperfect-direct")?;
            let fidelity: Option<f64> = raw.parse_as("source.fidelity")?;
            let fidelity = raw.require("source.fidelity", fidelity)?;
            SourceModel::entangled(fidelity)
                .map_err(|e| Error::InvalidConfig(format!("source.fidelity: {e}")))
        }
        Some(other) => Err(Error::InvalidConfig(format!(
            "source.model: unknown model {other:?}"
        ))),
    }
}

fn parse_attack(raw: &mut RawConfig) -> Result<AttackStrategy> {
    let model = raw.take("attack.model");
    let forbid_paulis = |raw: &RawConfig| -> Result<()> {
        for key in ["attack.p_i", "attack.p_x", "attack.p_y", "attack.p_z"] {
            raw.forbid(key, "with a Pauli-channel attack.model")?;
        }
        Ok(())
    };
    match model.as_deref() {
        None | Some("none") => {
            raw.forbid(
                "attack.basis_policy",
                "with attack.model = intercept-resend",
            )?;
            raw.forbid("attack.measure_basis", "with attack.model = basis-learner")?;
            forbid_paulis(raw)?;
            Ok(AttackStrategy::NoAttack)
        }
        Some("intercept-resend") => {
            raw.forbid("attack.measure_basis", "with attack.model = basis-learner")?;
            forbid_paulis(raw)?;
            let policy = match raw.take("attack.basis_policy").as_deref() {
                None | Some("uniform-random") => BasisPolicy::UniformRandom,
                Some("always-z") => BasisPolicy::AlwaysZ,
                Some("always-x") => BasisPolicy::AlwaysX,
                Some(other) => {
                    return Err(Error::InvalidConfig(format!(
                        "attack.basis_policy: unknown policy {other:?}"
                    )))
                }
            };
            Ok(AttackStrategy::InterceptResend(policy))
        }
        Some(channel @ ("pauli-channel" | "correlated-pauli")) => {
            raw.forbid(
                "attack.basis_policy",
                "with attack.model = intercept-resend",
            )?;
            raw.forbid("attack.measure_basis", "with attack.model = basis-learner")?;
            let p_i: f64 = raw.parse_as("attack.p_i")?.unwrap_or(0.0);
            let p_x: f64 = raw.parse_as("attack.p_x")?.unwrap_or(0.0);
            let p_y: f64 = raw.parse_as("attack.p_y")?.unwrap_or(0.0);
            let p_z: f64 = raw.parse_as("attack.p_z")?.unwrap_or(0.0);
            let probs = PauliProbs::new(p_i, p_x, p_y, p_z)
                .map_err(|e| Error::InvalidConfig(format!("attack.p_*: {e}")))?;
            Ok(if channel == "pauli-channel" {
                AttackStrategy::PauliChannel(probs)
            } else {
                AttackStrategy::CorrelatedPauli(probs)
            })
        }
        Some("basis-learner") => {
            raw.forbid(
                "attack.basis_policy",
                "with attack.model = intercept-resend",
            )?;
            forbid_paulis(raw)?;
            let basis = match raw.take("attack.measure_basis").as_deref() {
                None | Some("z") => Basis::Z,
                Some("x") => Basis::X,
                Some(other) => {
                    return Err(Error::InvalidConfig(format!(
                        "attack.measure_basis: expected z or x, got {other:?}"
                    )))
                }
            };
            Ok(AttackStrategy::BasisLearner(basis))
        }
        Some(other) => Err(Error::InvalidConfig(format!(
            "attack.model: unknown model {other:?}"
        ))),
    }
}

fn validate_cross_fields(config: &ExperimentConfig) -> Result<()> {
    if !(config.abort_threshold > 0.0 && config.abort_threshold < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "session.abort_threshold must lie in (0, 1), got {}",
            config.abort_threshold
        )));
    }

    let needs_session_dims = !matches!(config.kind, ExperimentKind::SourceAudit);
    if needs_session_dims {
        let n = config
            .n
            .ok_or_else(|| Error::InvalidConfig("session.n is required here".into()))?;
        let r = config
            .r
            .ok_or_else(|| Error::InvalidConfig("session.r is required here".into()))?;
        if n == 0 || r == 0 {
            return Err(Error::InvalidConfig(
                "session.n and session.r must be positive".into(),
            ));
        }
        if (2 * n) % r != 0 {
            return Err(Error::InvalidConfig(format!(
                "session.r must divide 2n: r = {r}, 2n = {}",
                2 * n
            )));
        }
        if let Some(block) = config.code.known_block_len() {
            if block > n {
                return Err(Error::InvalidConfig(format!(
                    "code.pair block length {block} exceeds session.n = {n}"
                )));
            }
        }
    }

    match config.kind {
        ExperimentKind::Single => {}
        ExperimentKind::Campaign => {
            let sessions = config.sessions.ok_or_else(|| {
                Error::InvalidConfig("campaign.sessions is required for campaigns".into())
            })?;
            if sessions == 0 {
                return Err(Error::InvalidConfig(
                    "campaign.sessions must be >= 1".into(),
                ));
            }
        }
        ExperimentKind::DeviationStudy => {
            let sessions = config.sessions.ok_or_else(|| {
                Error::InvalidConfig("campaign.sessions is required for deviation studies".into())
            })?;
            if sessions < 200 {
                return Err(Error::InvalidConfig(format!(
                    "deviation studies need campaign.sessions >= 200, got {sessions}"
                )));
            }
            let (n, r) = (config.n.unwrap(), config.r.unwrap());
            if n % r != 0 {
                return Err(Error::InvalidConfig(format!(
                    "deviation studies need session.r to divide session.n: n = {n}, r = {r}"
                )));
            }
            if n / r < 7 {
                return Err(Error::InvalidConfig(format!(
                    "deviation studies need n/r >= 7 for the baseline arm, got {}",
                    n / r
                )));
            }
            if !matches!(
                config.attack,
                AttackStrategy::PauliChannel(_) | AttackStrategy::CorrelatedPauli(_)
            ) {
                return Err(Error::InvalidConfig(
                    "deviation studies need attack.model = pauli-channel or correlated-pauli \
                     (the attack.p_* values set the matched marginal)"
                        .into(),
                ));
            }
        }
        ExperimentKind::SourceAudit => {
            if config.audit_samples == 0 {
                return Err(Error::InvalidConfig("audit.samples must be >= 1".into()));
            }
        }
        ExperimentKind::BasisInfo => {
            let sessions = config.sessions.ok_or_else(|| {
                Error::InvalidConfig("campaign.sessions is required for basis-info runs".into())
            })?;
            if sessions < 100 {
                return Err(Error::InvalidConfig(format!(
                    "basis-info needs campaign.sessions >= 100, got {sessions}"
                )));
            }
            if !matches!(
                config.attack,
                AttackStrategy::BasisLearner(_) | AttackStrategy::InterceptResend(_)
            ) {
                return Err(Error::InvalidConfig(
                    "basis-info needs a measuring attack.model: basis-learner or \
                     intercept-resend"
                        .into(),
                ));
            }
        }
    }
    Ok(())
}

impl ExperimentConfig {
    /// The seed actually used: a CLI override wins over the config value.
    pub fn effective_seed(&self, seed_override: Option<u64>) -> u64 {
        seed_override.unwrap_or(self.seed)
    }

    /// Session parameters for a single run. The pair must match the
    /// config's code spec (resolved by the caller, since file-backed pairs
    /// need IO).
    pub fn session_params(
        &self,
        pair: Arc<NestedCodePair>,
        seed_override: Option<u64>,
    ) -> Result<SessionParams> {
        let params = SessionParams {
            n: self
                .n
                .ok_or_else(|| Error::InvalidConfig("session.n is required here".into()))?,
            r: self
                .r
                .ok_or_else(|| Error::InvalidConfig("session.r is required here".into()))?,
            abort_threshold: self.abort_threshold,
            seed: self.effective_seed(seed_override),
            code_pair: pair,
        };
        params
            .validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(params)
    }

    /// Campaign spec sharing the session fields.
    pub fn campaign_spec(
        &self,
        pair: Arc<NestedCodePair>,
        keep_eve_records: bool,
    ) -> Result<CampaignSpec> {
        let params = self.session_params(pair, None)?;
        Ok(CampaignSpec {
            n: params.n,
            r: params.r,
            abort_threshold: params.abort_threshold,
            code_pair: params.code_pair,
            source: self.source,
            attack: self.attack,
            keep_eve_records,
        })
    }

    /// Deviation-study spec; only meaningful for that experiment kind.
    pub fn deviation_spec(&self, seed_override: Option<u64>) -> Result<DeviationSpec> {
        let marginal = match self.attack {
            AttackStrategy::PauliChannel(p) | AttackStrategy::CorrelatedPauli(p) => p,
            _ => {
                return Err(Error::InvalidConfig(
                    "deviation studies need a Pauli-channel attack.model".into(),
                ))
            }
        };
        Ok(DeviationSpec {
            n: self
                .n
                .ok_or_else(|| Error::InvalidConfig("session.n is required here".into()))?,
            r: self
                .r
                .ok_or_else(|| Error::InvalidConfig("session.r is required here".into()))?,
            marginal,
            sessions: self
                .sessions
                .ok_or_else(|| Error::InvalidConfig("campaign.sessions is required".into()))?,
            seed: self.effective_seed(seed_override),
        })
    }
}
