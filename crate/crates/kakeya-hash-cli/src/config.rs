//! Experiment configuration: a single JSON document, unknown keys
//! rejected, every rational parsed exactly from its `"num/den"` form.

use kakeya_hash::hashcore::PointSet;
use kakeya_hash::linalg::{FieldCtx, Flat, Subspace};
use kakeya_hash::rng::SplitMix64;
use kakeya_hash::util::rational_from_string;
use num_bigint::BigUint;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

/// Salt for deriving the set-generation stream from the master seed, so
/// trial streams (seed ^ trial_index) never collide with it.
const SET_STREAM_SALT: u64 = 0x5e7_5eed_0000_0001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    HashBalance,
    BalanceAudit,
    FurstenbergAudit,
    PolymethodSelfcheck,
    BaselineCompare,
}

/// How to build the point set being hashed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    /// Explicit list of points (raw field-element encodings).
    Explicit(Vec<Vec<u64>>),
    /// `size` distinct points drawn from the seeded set stream.
    Random { size: u64 },
    /// Union of flats, each given by basis rows and a shift.
    Flats(Vec<FlatSpec>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatSpec {
    pub basis: Vec<Vec<u64>>,
    pub shift: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Field characteristic; default 2.
    pub p: Option<u64>,
    /// Extension degree; default 1.
    pub ell: Option<u32>,
    /// Ambient dimension.
    pub n: Option<usize>,
    /// Output dimension for hashing kinds.
    pub t: Option<usize>,
    /// Subspace/flat dimension for audit kinds.
    pub k: Option<usize>,
    pub set: Option<SetSpec>,
    /// Exact rational, e.g. "1/2".
    pub tau: Option<String>,
    pub delta: Option<String>,
    /// Concentration-audit threshold.
    pub sigma: Option<String>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    /// Incidence-check cap; default from `KAKEYA_HASH_BUDGET` or 10^8.
    pub budget: Option<u64>,
    /// Density grid for the Furstenberg audit; default {1/4,1/2,3/4,1}.
    pub gamma_grid: Option<Vec<String>>,
    /// Direction-fraction grid; same default.
    pub beta_grid: Option<Vec<String>>,
    /// Cross-check the sampled pass fraction against exhaustive
    /// enumeration of every surjective map (tiny instances only).
    pub exhaustive_check: Option<bool>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(format!("{e}")))
    }

    pub fn field(&self) -> Result<FieldCtx, ConfigError> {
        let p = self.p.unwrap_or(2);
        let ell = self.ell.unwrap_or(1);
        FieldCtx::new(p, ell).map_err(|e| ConfigError(format!("field: {e}")))
    }

    pub fn require_n(&self) -> Result<usize, ConfigError> {
        self.n.ok_or_else(|| ConfigError("missing key \"n\"".into()))
    }

    pub fn require_t(&self) -> Result<usize, ConfigError> {
        self.t.ok_or_else(|| ConfigError("missing key \"t\"".into()))
    }

    pub fn require_k(&self) -> Result<usize, ConfigError> {
        self.k.ok_or_else(|| ConfigError("missing key \"k\"".into()))
    }

    pub fn require_seed(&self) -> Result<u64, ConfigError> {
        self.seed
            .ok_or_else(|| ConfigError("missing key \"seed\" (mandatory for randomized kinds)".into()))
    }

    pub fn require_trials(&self) -> Result<u64, ConfigError> {
        match self.trials {
            Some(0) => Err(ConfigError("\"trials\" must be at least 1".into())),
            Some(t) => Ok(t),
            None => Err(ConfigError("missing key \"trials\"".into())),
        }
    }

    pub fn rational(&self, key: &str, value: &Option<String>) -> Result<BigRational, ConfigError> {
        let text = value
            .as_ref()
            .ok_or_else(|| ConfigError(format!("missing key \"{key}\"")))?;
        rational_from_string(text).map_err(|e| ConfigError(format!("key \"{key}\": {e}")))
    }

    pub fn rational_grid(
        &self,
        key: &str,
        value: &Option<Vec<String>>,
    ) -> Result<Vec<BigRational>, ConfigError> {
        let default = ["1/4", "1/2", "3/4", "1/1"];
        match value {
            None => Ok(default
                .iter()
                .map(|s| rational_from_string(s).expect("static"))
                .collect()),
            Some(items) => items
                .iter()
                .map(|s| {
                    rational_from_string(s).map_err(|e| ConfigError(format!("key \"{key}\": {e}")))
                })
                .collect(),
        }
    }

    pub fn budget_limit(&self) -> u64 {
        self.budget
            .or_else(|| {
                std::env::var("KAKEYA_HASH_BUDGET")
                    .ok()
                    .and_then(|v| v.parse().ok())
            })
            .unwrap_or(kakeya_hash::budget::DEFAULT_BUDGET)
    }

    /// Materialize the configured point set. The random stream is derived
    /// from the master seed with a fixed salt so it is independent of the
    /// per-trial streams.
    pub fn build_set(&self, ctx: &FieldCtx, n: usize, seed: u64) -> Result<PointSet, ConfigError> {
        let spec = self
            .set
            .as_ref()
            .ok_or_else(|| ConfigError("missing key \"set\"".into()))?;
        match spec {
            SetSpec::Explicit(points) => PointSet::new(ctx, n, points.clone())
                .map_err(|e| ConfigError(format!("set.explicit: {e}"))),
            SetSpec::Random { size } => {
                let mut rng = SplitMix64::new(seed ^ SET_STREAM_SALT);
                PointSet::random(&mut rng, ctx, n, *size)
                    .map_err(|e| ConfigError(format!("set.random: {e}")))
            }
            SetSpec::Flats(flats) => {
                let mut points = Vec::new();
                for (i, fs) in flats.iter().enumerate() {
                    if fs.shift.len() != n {
                        return Err(ConfigError(format!(
                            "set.flats[{i}]: shift length {} != n = {n}",
                            fs.shift.len()
                        )));
                    }
                    for row in &fs.basis {
                        if row.len() != n {
                            return Err(ConfigError(format!(
                                "set.flats[{i}]: basis row length {} != n = {n}",
                                row.len()
                            )));
                        }
                    }
                    let sub = Subspace::from_spanning(ctx, n, &fs.basis);
                    let flat = Flat::canonicalize(&fs.shift, sub);
                    points.extend(flat.points());
                }
                PointSet::new(ctx, n, points).map_err(|e| ConfigError(format!("set.flats: {e}")))
            }
        }
    }
}

/// Parse a set size that may be decimal (`"123456"`) or a power
/// (`"2^40"`).
pub fn parse_set_size(text: &str) -> Result<BigUint, ConfigError> {
    if let Some((base, exp)) = text.split_once('^') {
        let base: u64 = base
            .trim()
            .parse()
            .map_err(|e| ConfigError(format!("set size base: {e}")))?;
        let exp: u32 = exp
            .trim()
            .parse()
            .map_err(|e| ConfigError(format!("set size exponent: {e}")))?;
        return Ok(BigUint::from(base).pow(exp));
    }
    text.trim()
        .parse()
        .map_err(|e| ConfigError(format!("set size: {e}")))
}
