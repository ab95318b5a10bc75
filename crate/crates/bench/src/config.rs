//! Run configuration (TOML).
//!
//! ```toml
//! seed = 7
//! dt = 0.01
//! modes = ["qaa", "aev"]
//! observables = ["reflection", "magnetization", "0.5*Z1Z2 - X3"]
//! sweep_times = { start = 1.0, stop = 800.0, per_octave = 8 }   # or a list
//! slope_window = [200.0, 800.0]                                   # on T, optional
//! dephasing_mode = "exact"                                        # or "sampled"
//! samples = 100000
//!
//! [model]
//! name = "ising-lz"
//! n = 5
//!
//! [[dephasing]]
//! kind = "bump"
//! t_d = 10.0
//! ```

use std::path::Path;

use aev_core::dephasing::{DistributionKind, RandomTimeDistribution};
use aev_core::linalg::{DenseOperator, Pauli, PauliOperator, PauliTerm, Spectrum, DEFAULT_MAX_QUBITS};
use aev_core::models::{magnetization, reflection_observable, IsingSpec, ModelSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{BenchError, Result};

/// Environment variable capping the register size.
pub const MAX_QUBITS_ENV: &str = "AEV_MAX_QUBITS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Qaa,
    Aev,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Qaa => "qaa",
            Mode::Aev => "aev",
        }
    }

    /// Total sweep time charged to one estimate: the echo runs the sweep twice.
    pub fn total_time(self, t_ad: f64) -> f64 {
        match self {
            Mode::Qaa => t_ad,
            Mode::Aev => 2.0 * t_ad,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "qaa" => Ok(Mode::Qaa),
            "aev" => Ok(Mode::Aev),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DephasingMode {
    /// Fourier entries by quadrature.
    #[default]
    Exact,
    /// Fourier entries by Monte-Carlo over `samples` random times.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingSpec {
    pub kind: DistributionKind,
    #[serde(default)]
    pub t_d: f64,
}

impl DephasingSpec {
    pub fn distribution(&self) -> Result<RandomTimeDistribution> {
        RandomTimeDistribution::from_kind(self.kind, self.t_d)
            .map_err(|e| BenchError::Config(format!("dephasing {self:?}: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepTimes {
    List(Vec<f64>),
    /// `start · 2^{k / per_octave}` up to `stop`.
    Geometric { start: f64, stop: f64, per_octave: u32 },
}

impl SweepTimes {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            SweepTimes::List(v) => v.clone(),
            SweepTimes::Geometric {
                start,
                stop,
                per_octave,
            } => {
                if !(*start > 0.0 && stop >= start && *per_octave > 0) {
                    return Err(BenchError::Config(format!(
                        "geometric grid needs 0 < start <= stop and per_octave > 0 (got {start}, {stop}, {per_octave})"
                    )));
                }
                let mut out = Vec::new();
                let mut k = 0u32;
                loop {
                    let t = start * 2f64.powf(k as f64 / *per_octave as f64);
                    if t > stop * (1.0 + 1e-12) {
                        break;
                    }
                    out.push(t);
                    k += 1;
                }
                out
            }
        };
        if v.is_empty() {
            return Err(BenchError::Config("sweep_times is empty".into()));
        }
        if let Some(t) = v.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(BenchError::Config(format!("sweep time {t} must be positive")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// `ising-lz` or `custom`.
    pub name: String,
    pub n: usize,
    #[serde(default = "default_hz")]
    pub hz: f64,
    #[serde(default = "default_coupling")]
    pub coupling: f64,
    #[serde(default)]
    pub periodic: bool,
    /// Custom models: Pauli-sum text for each endpoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ht: Option<String>,
}

fn default_hz() -> f64 {
    0.2
}

fn default_coupling() -> f64 {
    1.0
}

fn default_dt() -> f64 {
    aev_core::adiabatic::DEFAULT_DT
}

fn default_samples() -> usize {
    100_000
}

fn default_modes() -> Vec<Mode> {
    vec![Mode::Qaa, Mode::Aev]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub sweep_times: SweepTimes,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    #[serde(default)]
    pub dephasing: Vec<DephasingSpec>,
    pub observables: Vec<String>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub dephasing_mode: DephasingMode,
    /// When set, echo estimates are drawn from this many simulated shots
    /// per circuit setting (unitary observables only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    /// `[T_min, T_max]` for the summary slope fits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub overwrite: bool,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let cfg: RunConfig = toml::from_str(&text).map_err(|e| BenchError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(BenchError::Config("modes is empty".into()));
        }
        if self.observables.is_empty() {
            return Err(BenchError::Config("observables is empty".into()));
        }
        if self.modes.contains(&Mode::Aev) && self.dephasing.is_empty() {
            return Err(BenchError::Config("aev mode needs at least one dephasing entry".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(BenchError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.samples == 0 {
            return Err(BenchError::Config("samples must be >= 1".into()));
        }
        if self.shots == Some(0) {
            return Err(BenchError::Config("shots must be >= 1".into()));
        }
        if self.workers == Some(0) {
            return Err(BenchError::Config("workers must be >= 1".into()));
        }
        if let Some([lo, hi]) = self.slope_window {
            if !(lo > 0.0 && hi > lo) {
                return Err(BenchError::Config(format!("slope_window [{lo}, {hi}] is not a range")));
            }
        }
        self.sweep_times.values()?;
        for d in &self.dephasing {
            d.distribution()?;
        }
        let cap = max_qubits()?;
        if self.model.n > cap {
            return Err(BenchError::Config(format!(
                "model has {} qubits; {MAX_QUBITS_ENV} allows at most {cap}",
                self.model.n
            )));
        }
        let model = self.model_spec()?;
        for o in &self.observables {
            if !matches!(o.as_str(), "reflection" | "magnetization") {
                parse_pauli_sum(o, model.qubits())?;
            }
        }
        Ok(())
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let m = &self.model;
        match m.name.as_str() {
            "ising-lz" | "ising" => Ok(ModelSpec::IsingLz(IsingSpec {
                n: m.n,
                hz: m.hz,
                coupling: m.coupling,
                periodic: m.periodic,
            })),
            "custom" => {
                let (Some(h0), Some(ht)) = (&m.h0, &m.ht) else {
                    return Err(BenchError::Config("custom model needs `h0` and `ht`".into()));
                };
                Ok(ModelSpec::Custom {
                    h0: parse_pauli_sum(h0, m.n)?,
                    ht: parse_pauli_sum(ht, m.n)?,
                })
            }
            other => Err(BenchError::Config(format!("unknown model `{other}`"))),
        }
    }

    /// SHA-256 over the settings that determine record contents; worker
    /// count, output location and the overwrite flag are excluded.
    pub fn config_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.workers = None;
        canonical.output = None;
        canonical.overwrite = false;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Register cap from `AEV_MAX_QUBITS` (default 12).
pub fn max_qubits() -> Result<usize> {
    match std::env::var(MAX_QUBITS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| BenchError::Config(format!("{MAX_QUBITS_ENV}=`{v}` is not an integer"))),
        Err(_) => Ok(DEFAULT_MAX_QUBITS),
    }
}

/// Observable by config name: `reflection`, `magnetization` or Pauli text.
pub fn build_observable(name: &str, n: usize, spectrum: &Spectrum) -> Result<DenseOperator> {
    let op = match name {
        "reflection" => reflection_observable(spectrum),
        "magnetization" => magnetization(n).map(|m| m.matrix().clone()),
        text => return parse_pauli_sum(text, n).map(|p| p.matrix().clone()),
    };
    op.map_err(|e| BenchError::Config(format!("observable `{name}`: {e}")))
}

/// Parses `0.2*Z3 - 1.0*Z1Z2 + X1` (1-based sites) or full labels such as
/// `0.5*ZZIII`.
pub fn parse_pauli_sum(text: &str, n: usize) -> Result<PauliOperator> {
    let err = |msg: String| BenchError::Config(format!("Pauli sum `{text}`: {msg}"));
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(err("empty".into()));
    }
    let mut terms = Vec::new();
    let mut rest = compact.as_str();
    while !rest.is_empty() {
        let (sign, body) = match rest.as_bytes()[0] {
            b'+' => (1.0, &rest[1..]),
            b'-' => (-1.0, &rest[1..]),
            _ if terms.is_empty() => (1.0, rest),
            _ => return Err(err(format!("expected + or - before `{rest}`"))),
        };
        // A term ends at the next +/- that does not belong to an exponent.
        let bytes = body.as_bytes();
        let mut end = body.len();
        for i in 1..bytes.len() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
                end = i;
                break;
            }
        }
        let term = &body[..end];
        rest = &body[end..];
        let (coef, word) = match term.split_once('*') {
            Some((c, w)) => (
                c.parse::<f64>().map_err(|_| err(format!("bad coefficient `{c}`")))?,
                w,
            ),
            None => (1.0, term),
        };
        terms.push(parse_word(sign * coef, word, n).map_err(err)?);
    }
    PauliOperator::with_max_qubits(terms, n, max_qubits()?).map_err(|e| err(e.to_string()))
}

fn parse_word(coef: f64, word: &str, n: usize) -> std::result::Result<PauliTerm, String> {
    if word.is_empty() {
        return Err("missing operator".into());
    }
    if word.len() == n && word.chars().all(|c| "IXYZ".contains(c)) {
        return PauliTerm::new(coef, word).map_err(|e| e.to_string());
    }
    let mut sites = Vec::new();
    let chars: Vec<char> = word.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let p = Pauli::from_char(chars[i]).map_err(|e| e.to_string())?;
        i += 1;
        let start = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        if start == i {
            return Err(format!("`{word}`: operator without site index"));
        }
        let site: usize = chars[start..i].iter().collect::<String>().parse().map_err(|_| "bad site".to_string())?;
        if site == 0 || site > n {
            return Err(format!("site {site} outside 1..={n}"));
        }
        if sites.iter().any(|&(s, _)| s == site - 1) {
            return Err(format!("site {site} repeated in `{word}`"));
        }
        sites.push((site - 1, p));
    }
    PauliTerm::on_sites(coef, n, &sites).map_err(|e| e.to_string())
}
