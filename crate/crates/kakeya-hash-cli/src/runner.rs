//! Experiment execution: seeded trials, exact statistics, JSONL output.
//!
//! Determinism contract: identical config (plus CLI overrides) produces
//! byte-identical output. Per-trial streams are `seed ^ trial_index`, so
//! parallel execution with any `--jobs` value yields the same records as
//! serial execution once sorted by trial index.

use kakeya_hash::balance::{
    audit_claim_concentration, shift_balanced_fraction, BalanceError,
};
use kakeya_hash::budget::Budget;
use kakeya_hash::furstenberg::{audit_lower_bound_exhaustive, FurstenbergError};
use kakeya_hash::hashcore::{histogram, l1_distance, linf_distance, HashError, PointSet};
use kakeya_hash::linalg::{
    enumerate_surjective_maps, sample_surjective_map, FieldCtx, LinearMap,
};
use kakeya_hash::polymethod::{
    chain_rule_pair, enumerate_v, monomials_up_to, mult_composition_audit, rank_lemma_audit,
    sz_audit, LinearFormVector, MultiPoly, PolyError, RankRows,
};
use kakeya_hash::rng::SplitMix64;
use kakeya_hash::util::{ratio_big, rational_to_string};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig, ExperimentKind};

#[derive(Debug)]
pub enum RunError {
    /// Usage or configuration problem: exit code 2.
    Config(String),
    /// Enumeration budget exhausted: exit code 3.
    Budget(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(msg) => write!(f, "{msg}"),
            Self::Budget(msg) => write!(f, "budget exceeded: {msg}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e.to_string())
    }
}

fn balance_err(e: BalanceError) -> RunError {
    match e {
        BalanceError::Budget(b) => RunError::Budget(b.to_string()),
        other => RunError::Config(other.to_string()),
    }
}

fn furstenberg_err(e: FurstenbergError) -> RunError {
    match e {
        FurstenbergError::Budget(b) => RunError::Budget(b.to_string()),
        other => RunError::Config(other.to_string()),
    }
}

fn poly_err(e: PolyError) -> RunError {
    match e {
        PolyError::Budget(b) => RunError::Budget(b.to_string()),
        other => RunError::Config(other.to_string()),
    }
}

fn hash_err(e: HashError) -> RunError {
    RunError::Config(e.to_string())
}

/// Rendered result of a run: output lines plus the violation count that
/// decides between exit codes 0 and 1.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub lines: Vec<String>,
    pub violations: u64,
}

impl RunOutput {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out.into_bytes()
    }
}

/// Output format for trial-based kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Jsonl,
    /// Aggregated max-bucket histogram, for external plotting.
    Csv,
}

#[derive(Serialize)]
struct TrialRecord {
    trial_index: u64,
    /// Matrix rows; each entry is the packed base-p field element.
    map: Vec<Vec<u64>>,
    linf: String,
    l1: String,
    max_bucket: u64,
    pass: bool,
}

#[derive(Serialize)]
struct HashBalanceSummary {
    kind: &'static str,
    q: u64,
    n: usize,
    t: usize,
    set_size: u64,
    tau: String,
    delta: Option<String>,
    trials: u64,
    seed: u64,
    pass_count: u64,
    pass_fraction: String,
    /// Advisory interval; the exact counts above are the contract.
    clopper_pearson_95: String,
    /// `pass_fraction >= 1 - delta`, when delta was supplied.
    meets_target: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exhaustive: Option<ExhaustiveCheck>,
}

#[derive(Serialize)]
struct ExhaustiveCheck {
    surjective_maps: u64,
    pass_maps: u64,
    pass_fraction: String,
}

#[derive(Serialize)]
struct SummaryLine<T: Serialize> {
    summary: T,
}

fn run_pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool")
}

/// Exact 95% Clopper-Pearson interval, rendered with f64 for display only.
fn clopper_pearson_95(successes: u64, trials: u64) -> String {
    let (k, n) = (successes as f64, trials as f64);
    let log_binom: Vec<f64> = {
        // cumulative log factorials up to n
        let mut lf = vec![0f64; trials as usize + 1];
        for i in 1..=trials as usize {
            lf[i] = lf[i - 1] + (i as f64).ln();
        }
        (0..=trials as usize)
            .map(|i| lf[trials as usize] - lf[i] - lf[trials as usize - i])
            .collect()
    };
    let cdf = |p: f64, upto: u64| -> f64 {
        if p <= 0.0 {
            return 1.0;
        }
        if p >= 1.0 {
            return if upto >= trials { 1.0 } else { 0.0 };
        }
        let (lp, lq) = (p.ln(), (1.0 - p).ln());
        (0..=upto)
            .map(|i| (log_binom[i as usize] + i as f64 * lp + (n - i as f64) * lq).exp())
            .sum()
    };
    let bisect = |target: f64, upto: u64, want_upper: bool| -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let v = cdf(mid, upto);
            // cdf is decreasing in p
            if v > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if want_upper {
            hi
        } else {
            lo
        }
    };
    let lower = if successes == 0 {
        0.0
    } else {
        // largest p with P(X >= k) = P(X <= k-1) complement: use
        // P(X <= k-1 | p) = 1 - alpha/2 boundary
        bisect(1.0 - 0.025, successes - 1, false)
    };
    let upper = if successes == trials {
        1.0
    } else {
        bisect(0.025, successes, true)
    };
    let _ = k;
    format!("[{lower:.4}, {upper:.4}] (advisory)")
}

#[allow(clippy::too_many_arguments)]
fn trial_records(
    ctx: &FieldCtx,
    set: &PointSet,
    n: usize,
    t: usize,
    tau: &BigRational,
    trials: u64,
    seed: u64,
    jobs: usize,
) -> Result<Vec<(TrialRecord, LinearMap)>, RunError> {
    let pool = run_pool(jobs);
    let threshold = tau
        / BigRational::from_integer(BigInt::from(BigUint::from(ctx.q()).pow(t as u32)));
    let results: Vec<Result<(TrialRecord, LinearMap), RunError>> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = SplitMix64::for_trial(seed, trial);
                let map = sample_surjective_map(&mut rng, ctx, n, t)
                    .map_err(|e| RunError::Config(e.to_string()))?;
                let h = histogram(&map, set).map_err(hash_err)?;
                let linf = linf_distance(&h);
                let l1 = l1_distance(&h);
                let record = TrialRecord {
                    trial_index: trial,
                    map: (0..t).map(|r| map.matrix().row(r).to_vec()).collect(),
                    linf: rational_to_string(&linf),
                    l1: rational_to_string(&l1),
                    max_bucket: h.max_bucket(),
                    pass: linf <= threshold,
                };
                Ok((record, map))
            })
            .collect()
    });
    let mut records: Vec<(TrialRecord, LinearMap)> =
        results.into_iter().collect::<Result<_, _>>()?;
    records.sort_by_key(|(r, _)| r.trial_index);
    Ok(records)
}

/// Sample `trials` surjective maps and report the exact per-trial bucket
/// statistics plus the pass fraction at threshold `τ·q^{-t}`.
pub fn run_hash_balance(
    config: &ExperimentConfig,
    jobs: usize,
    format: OutputFormat,
) -> Result<RunOutput, RunError> {
    let ctx = config.field()?;
    let n = config.require_n()?;
    let t = config.require_t()?;
    if t == 0 || t > n {
        return Err(RunError::Config(format!(
            "need 1 <= t <= n, got t = {t}, n = {n}"
        )));
    }
    let tau = config.rational("tau", &config.tau)?;
    let delta = match &config.delta {
        Some(_) => Some(config.rational("delta", &config.delta)?),
        None => None,
    };
    let seed = config.require_seed()?;
    let trials = config.require_trials()?;
    let set = config.build_set(&ctx, n, seed)?;
    if set.is_empty() {
        return Err(RunError::Config("point set is empty".into()));
    }

    let records = trial_records(&ctx, &set, n, t, &tau, trials, seed, jobs)?;
    let pass_count = records.iter().filter(|(r, _)| r.pass).count() as u64;

    let exhaustive = if config.exhaustive_check.unwrap_or(false) {
        let cells = (t * n) as u32;
        let total = ctx
            .q()
            .checked_pow(cells)
            .filter(|&c| c <= 1 << 22)
            .ok_or_else(|| {
                RunError::Config("exhaustive_check needs q^(t*n) <= 2^22".into())
            })?;
        let _ = total;
        let threshold = &tau
            / BigRational::from_integer(BigInt::from(BigUint::from(ctx.q()).pow(t as u32)));
        let mut maps = 0u64;
        let mut pass_maps = 0u64;
        for map in enumerate_surjective_maps(&ctx, n, t) {
            maps += 1;
            let h = histogram(&map, &set).map_err(hash_err)?;
            if linf_distance(&h) <= threshold {
                pass_maps += 1;
            }
        }
        Some(ExhaustiveCheck {
            surjective_maps: maps,
            pass_maps,
            pass_fraction: rational_to_string(&ratio_big(
                BigUint::from(pass_maps),
                BigUint::from(maps),
            )),
        })
    } else {
        None
    };

    let pass_fraction = ratio_big(BigUint::from(pass_count), BigUint::from(trials));
    let meets_target = delta
        .as_ref()
        .map(|d| pass_fraction >= BigRational::one() - d);
    let summary = HashBalanceSummary {
        kind: "hash_balance",
        q: ctx.q(),
        n,
        t,
        set_size: set.size(),
        tau: rational_to_string(&tau),
        delta: delta.as_ref().map(rational_to_string),
        trials,
        seed,
        pass_count,
        pass_fraction: rational_to_string(&pass_fraction),
        clopper_pearson_95: clopper_pearson_95(pass_count, trials),
        meets_target,
        exhaustive,
    };

    let lines = match format {
        OutputFormat::Jsonl => {
            let mut lines: Vec<String> = records
                .iter()
                .map(|(r, _)| serde_json::to_string(r).expect("serialize"))
                .collect();
            lines.push(serde_json::to_string(&SummaryLine { summary }).expect("serialize"));
            lines
        }
        OutputFormat::Csv => {
            let mut histo = std::collections::BTreeMap::new();
            for (r, _) in &records {
                *histo.entry(r.max_bucket).or_insert(0u64) += 1;
            }
            let mut lines = vec!["max_bucket,count".to_string()];
            lines.extend(histo.iter().map(|(k, v)| format!("{k},{v}")));
            lines
        }
    };
    Ok(RunOutput {
        lines,
        violations: 0,
    })
}

#[derive(Serialize)]
struct BaselineRecord {
    trial_index: u64,
    linear_max_bucket: u64,
    random_max_bucket: u64,
}

#[derive(Serialize)]
struct LoadStats {
    mean: String,
    p50: u64,
    p90: u64,
    p99: u64,
}

#[derive(Serialize)]
struct BaselineSummary {
    kind: &'static str,
    q: u64,
    n: usize,
    t: usize,
    set_size: u64,
    trials: u64,
    seed: u64,
    linear: LoadStats,
    random_function: LoadStats,
}

fn load_stats(values: &[u64], trials: u64) -> LoadStats {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let quantile = |p_num: u64, p_den: u64| -> u64 {
        // 1-based rank ceil(p * n), clamped
        let rank = (p_num * trials).div_ceil(p_den).max(1) as usize;
        sorted[rank.min(sorted.len()) - 1]
    };
    let sum: u64 = sorted.iter().sum();
    LoadStats {
        mean: rational_to_string(&ratio_big(BigUint::from(sum), BigUint::from(trials))),
        p50: quantile(1, 2),
        p90: quantile(9, 10),
        p99: quantile(99, 100),
    }
}

/// Compare max bucket loads: uniformly random surjective linear maps
/// versus a truly random function from `S` into the buckets.
pub fn run_baseline_compare(
    config: &ExperimentConfig,
    jobs: usize,
    format: OutputFormat,
) -> Result<RunOutput, RunError> {
    let ctx = config.field()?;
    let n = config.require_n()?;
    let t = config.require_t()?;
    if t == 0 || t > n {
        return Err(RunError::Config(format!(
            "need 1 <= t <= n, got t = {t}, n = {n}"
        )));
    }
    let seed = config.require_seed()?;
    let trials = config.require_trials()?;
    let set = config.build_set(&ctx, n, seed)?;
    if set.is_empty() {
        return Err(RunError::Config("point set is empty".into()));
    }
    let buckets = ctx
        .q()
        .checked_pow(t as u32)
        .filter(|&b| b <= 1 << 32)
        .ok_or_else(|| RunError::Config("bucket space q^t too large".into()))?;

    let pool = run_pool(jobs);
    let results: Vec<Result<BaselineRecord, RunError>> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = SplitMix64::for_trial(seed, trial);
                let map = sample_surjective_map(&mut rng, &ctx, n, t)
                    .map_err(|e| RunError::Config(e.to_string()))?;
                let h = histogram(&map, &set).map_err(hash_err)?;
                // truly random function: an independent bucket per point,
                // drawn from the same per-trial stream after the map
                let mut counts = std::collections::HashMap::new();
                for _ in 0..set.size() {
                    *counts.entry(rng.below(buckets)).or_insert(0u64) += 1;
                }
                Ok(BaselineRecord {
                    trial_index: trial,
                    linear_max_bucket: h.max_bucket(),
                    random_max_bucket: counts.values().copied().max().unwrap_or(0),
                })
            })
            .collect()
    });
    let mut records: Vec<BaselineRecord> = results.into_iter().collect::<Result<_, _>>()?;
    records.sort_by_key(|r| r.trial_index);

    let linear: Vec<u64> = records.iter().map(|r| r.linear_max_bucket).collect();
    let random: Vec<u64> = records.iter().map(|r| r.random_max_bucket).collect();
    let summary = BaselineSummary {
        kind: "baseline_compare",
        q: ctx.q(),
        n,
        t,
        set_size: set.size(),
        trials,
        seed,
        linear: load_stats(&linear, trials),
        random_function: load_stats(&random, trials),
    };

    let lines = match format {
        OutputFormat::Jsonl => {
            let mut lines: Vec<String> = records
                .iter()
                .map(|r| serde_json::to_string(r).expect("serialize"))
                .collect();
            lines.push(serde_json::to_string(&SummaryLine { summary }).expect("serialize"));
            lines
        }
        OutputFormat::Csv => {
            let mut histo = std::collections::BTreeMap::new();
            for r in &records {
                *histo.entry(("linear", r.linear_max_bucket)).or_insert(0u64) += 1;
                *histo.entry(("random", r.random_max_bucket)).or_insert(0u64) += 1;
            }
            let mut lines = vec!["mode,max_bucket,count".to_string()];
            lines.extend(histo.iter().map(|((m, k), v)| format!("{m},{k},{v}")));
            lines
        }
    };
    Ok(RunOutput {
        lines,
        violations: 0,
    })
}

#[derive(Serialize)]
struct BalanceAuditReport {
    kind: &'static str,
    q: u64,
    n: usize,
    k: usize,
    tau: String,
    set_size: u64,
    total_subspaces: String,
    shift_balanced: String,
    fraction: String,
    unbalanced_witnesses: Vec<WitnessOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    concentration: Option<ConcentrationOut>,
    violations: u64,
}

#[derive(Serialize)]
struct WitnessOut {
    subspace_basis: Vec<Vec<u64>>,
    flat_shift: Vec<u64>,
    intersection: u64,
}

#[derive(Serialize)]
struct ConcentrationOut {
    sigma: String,
    fraction_unbalanced: String,
    bound: Option<String>,
    pass: bool,
    hypothesis_met: bool,
}

/// Shift-balance fraction plus, when `sigma` is configured, the
/// concentration-claim audit whose failure counts as a violation.
pub fn run_balance_audit(config: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let ctx = config.field()?;
    let n = config.require_n()?;
    let k = config.require_k()?;
    let tau = config.rational("tau", &config.tau)?;
    let seed = config.seed.unwrap_or(0);
    let set = config.build_set(&ctx, n, seed)?;
    let mut budget = Budget::new(config.budget_limit());

    let report = shift_balanced_fraction(&set, k, &tau, &mut budget).map_err(balance_err)?;
    let mut violations = 0u64;
    let concentration = match &config.sigma {
        None => None,
        Some(_) => {
            let sigma = config.rational("sigma", &config.sigma)?;
            let audit =
                audit_claim_concentration(&set, k, &sigma, &mut budget).map_err(balance_err)?;
            if !audit.pass {
                violations += 1;
            }
            Some(ConcentrationOut {
                sigma: rational_to_string(&sigma),
                fraction_unbalanced: rational_to_string(&audit.fraction_unbalanced),
                bound: audit.bound.as_ref().map(rational_to_string),
                pass: audit.pass,
                hypothesis_met: audit.hypothesis_met,
            })
        }
    };
    let out = BalanceAuditReport {
        kind: "balance_audit",
        q: ctx.q(),
        n,
        k,
        tau: rational_to_string(&tau),
        set_size: set.size(),
        total_subspaces: report.total_subspaces.to_string(),
        shift_balanced: report.shift_balanced_count.to_string(),
        fraction: rational_to_string(&report.fraction),
        unbalanced_witnesses: report
            .witnesses
            .iter()
            .map(|w| WitnessOut {
                subspace_basis: (0..w.subspace.dim())
                    .map(|i| w.subspace.basis().row(i).to_vec())
                    .collect(),
                flat_shift: w.violating_flat.shift().to_vec(),
                intersection: w.intersection,
            })
            .collect(),
        concentration,
        violations,
    };
    Ok(RunOutput {
        lines: vec![serde_json::to_string(&out).expect("serialize")],
        violations,
    })
}

#[derive(Serialize)]
struct FurstenbergAuditReport {
    kind: &'static str,
    q: u64,
    n: usize,
    k: usize,
    gamma_grid: Vec<String>,
    beta_grid: Vec<String>,
    subsets_checked: u64,
    furstenberg_instances: u64,
    violations: u64,
    violation_examples: Vec<String>,
}

/// Exhaustive lower-bound audit over every subset of the configured space.
pub fn run_furstenberg_audit(config: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let ctx = config.field()?;
    let n = config.require_n()?;
    let k = config.require_k()?;
    let gamma_grid = config.rational_grid("gamma_grid", &config.gamma_grid)?;
    let beta_grid = config.rational_grid("beta_grid", &config.beta_grid)?;
    let mut budget = Budget::new(config.budget_limit());
    let audit = audit_lower_bound_exhaustive(&ctx, n, k, &gamma_grid, &beta_grid, &mut budget)
        .map_err(furstenberg_err)?;
    let violations = audit.violations.len() as u64;
    let out = FurstenbergAuditReport {
        kind: "furstenberg_audit",
        q: ctx.q(),
        n,
        k,
        gamma_grid: gamma_grid.iter().map(rational_to_string).collect(),
        beta_grid: beta_grid.iter().map(rational_to_string).collect(),
        subsets_checked: audit.subsets_checked,
        furstenberg_instances: audit.furstenberg_instances,
        violations,
        violation_examples: audit
            .violations
            .iter()
            .take(8)
            .map(|v| {
                format!(
                    "K={:?} gamma={} beta={} size={} bound={}",
                    v.subset,
                    rational_to_string(&v.gamma),
                    rational_to_string(&v.beta),
                    v.size,
                    rational_to_string(&v.bound)
                )
            })
            .collect(),
    };
    Ok(RunOutput {
        lines: vec![serde_json::to_string(&out).expect("serialize")],
        violations,
    })
}

#[derive(Serialize)]
struct PolymethodReport {
    kind: &'static str,
    rank_checks: u64,
    rank_failures: u64,
    subset_rank_checks: u64,
    subset_rank_failures: u64,
    sz_checks: u64,
    sz_failures: u64,
    sz_tight_instances: u64,
    chain_rule_checks: u64,
    chain_rule_failures: u64,
    composition_checks: u64,
    composition_failures: u64,
    violations: u64,
}

fn random_poly(rng: &mut SplitMix64, ctx: &FieldCtx, nvars: usize, d: u32) -> MultiPoly {
    let monos = monomials_up_to(nvars, d);
    let mut p = MultiPoly::zero(ctx, nvars);
    let terms = 1 + rng.below(6);
    for _ in 0..terms {
        let e = &monos[rng.below(monos.len() as u64) as usize];
        let c = rng.below(ctx.q());
        p = p
            .add(&MultiPoly::monomial(ctx, nvars, e, c))
            .expect("same ring");
    }
    p
}

/// The polynomial-method self-check suite: rank predictions over V and
/// V_full, the subset rank floor, randomized multiplicity bound checks,
/// chain-rule equality, and composition inequality.
pub fn run_polymethod_selfcheck(config: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let seed = config.seed.unwrap_or(0);
    let trials = config.trials.unwrap_or(1000);
    let mut budget = Budget::new(config.budget_limit());

    let f2 = FieldCtx::new(2, 1).expect("F_2");
    let mut rank_checks = 0u64;
    let mut rank_failures = 0u64;
    for m in 1..=2u32 {
        for d in 0..(m * 4) {
            for rows in [RankRows::V, RankRows::VFull] {
                let audit =
                    rank_lemma_audit(&f2, 2, m, d, rows, &mut budget).map_err(poly_err)?;
                rank_checks += 1;
                if !audit.pass {
                    rank_failures += 1;
                }
            }
        }
    }

    let forms: Vec<LinearFormVector> = enumerate_v(&f2, 2, true).collect();
    let mut subset_rank_checks = 0u64;
    let mut subset_rank_failures = 0u64;
    for mask in 0u64..(1 << forms.len()) {
        let subset: Vec<LinearFormVector> = forms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, f)| f.clone())
            .collect();
        let audit = rank_lemma_audit(&f2, 2, 1, 1, RankRows::Subset(subset), &mut budget)
            .map_err(poly_err)?;
        subset_rank_checks += 1;
        if !audit.pass {
            subset_rank_failures += 1;
        }
    }

    let fields = [
        FieldCtx::new(2, 1).expect("F_2"),
        FieldCtx::new(3, 1).expect("F_3"),
        FieldCtx::new(5, 1).expect("F_5"),
    ];
    let mut sz_checks = 0u64;
    let mut sz_failures = 0u64;
    let mut sz_tight = 0u64;
    let mut rng = SplitMix64::new(seed);
    while sz_checks < trials {
        let ctx = &fields[rng.below(3) as usize];
        let nvars = 1 + rng.below(2) as usize;
        let f = random_poly(&mut rng, ctx, nvars, 6);
        if f.is_zero() {
            continue;
        }
        let u: Vec<u64> = (0..ctx.q()).collect();
        let audit = sz_audit(&f, &u).map_err(poly_err)?;
        sz_checks += 1;
        if !audit.pass {
            sz_failures += 1;
        }
        if audit.tight {
            sz_tight += 1;
        }
    }

    let mut chain_checks = 0u64;
    let mut chain_failures = 0u64;
    for _ in 0..500 {
        let ctx = &fields[rng.below(3) as usize];
        let nvars = 1 + rng.below(2) as usize;
        let f = random_poly(&mut rng, ctx, nvars, 4);
        let i: Vec<u32> = (0..nvars).map(|_| rng.below(3) as u32).collect();
        let j: Vec<u32> = (0..nvars).map(|_| rng.below(3) as u32).collect();
        let (lhs, rhs) = chain_rule_pair(&f, &i, &j).map_err(poly_err)?;
        chain_checks += 1;
        if lhs != rhs {
            chain_failures += 1;
        }
    }

    let mut comp_checks = 0u64;
    let mut comp_failures = 0u64;
    for _ in 0..200 {
        let ctx = &fields[rng.below(2) as usize];
        let f = random_poly(&mut rng, ctx, 2, 3);
        if f.is_zero() {
            continue;
        }
        let h = [
            random_poly(&mut rng, ctx, 2, 2),
            random_poly(&mut rng, ctx, 2, 2),
        ];
        let a = [rng.below(ctx.q()), rng.below(ctx.q())];
        let audit = mult_composition_audit(&f, &h, &a).map_err(poly_err)?;
        comp_checks += 1;
        if !audit.pass {
            comp_failures += 1;
        }
    }

    let violations =
        rank_failures + subset_rank_failures + sz_failures + chain_failures + comp_failures;
    let out = PolymethodReport {
        kind: "polymethod_selfcheck",
        rank_checks,
        rank_failures,
        subset_rank_checks,
        subset_rank_failures,
        sz_checks,
        sz_failures,
        sz_tight_instances: sz_tight,
        chain_rule_checks: chain_checks,
        chain_rule_failures: chain_failures,
        composition_checks: comp_checks,
        composition_failures: comp_failures,
        violations,
    };
    Ok(RunOutput {
        lines: vec![serde_json::to_string(&out).expect("serialize")],
        violations,
    })
}

/// Dispatch on the configured kind.
pub fn run(
    config: &ExperimentConfig,
    jobs: usize,
    format: OutputFormat,
) -> Result<RunOutput, RunError> {
    match config.kind {
        ExperimentKind::HashBalance => run_hash_balance(config, jobs, format),
        ExperimentKind::BaselineCompare => run_baseline_compare(config, jobs, format),
        ExperimentKind::BalanceAudit => run_balance_audit(config),
        ExperimentKind::FurstenbergAudit => run_furstenberg_audit(config),
        ExperimentKind::PolymethodSelfcheck => run_polymethod_selfcheck(config),
    }
}
