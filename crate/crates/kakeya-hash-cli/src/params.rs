//! The `params` subcommand: evaluate a parameter rule on given inputs and
//! print the outcome as one JSON object.

use kakeya_hash::hashcore::{
    choose_t_binary, choose_t_large_field, hypothesis_check_large_field, injective_t,
    BinaryVariant, HashError, HypothesisReport, LargeFieldVariant,
};
use kakeya_hash::linalg::FieldCtx;
use kakeya_hash::util::rational_to_string;
use num_bigint::BigUint;
use num_rational::BigRational;
use serde::Serialize;

use crate::runner::RunError;

/// Which formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamRule {
    LargeField,
    Injective,
    BinaryDirect,
    BinaryTwoStage,
    BinaryDirectLargeTau,
    BinaryTwoStageLargeTau,
    HypothesisMain,
    HypothesisImproved,
}

impl ParamRule {
    pub fn parse(text: &str) -> Result<Self, RunError> {
        Ok(match text {
            "large-field" => Self::LargeField,
            "injective" => Self::Injective,
            "binary-direct" => Self::BinaryDirect,
            "binary-two-stage" => Self::BinaryTwoStage,
            "binary-direct-large-tau" => Self::BinaryDirectLargeTau,
            "binary-two-stage-large-tau" => Self::BinaryTwoStageLargeTau,
            "hypothesis-main" => Self::HypothesisMain,
            "hypothesis-improved" => Self::HypothesisImproved,
            other => {
                return Err(RunError::Config(format!(
                    "unknown rule {other:?}; expected one of large-field, injective, \
                     binary-direct, binary-two-stage, binary-direct-large-tau, \
                     binary-two-stage-large-tau, hypothesis-main, hypothesis-improved"
                )))
            }
        })
    }
}

pub struct ParamInputs {
    pub rule: ParamRule,
    pub p: u64,
    pub ell: u32,
    pub n: Option<u64>,
    pub set_size: Option<BigUint>,
    pub tau: Option<BigRational>,
    pub delta: Option<BigRational>,
}

#[derive(Serialize)]
struct ClauseOut {
    description: String,
    satisfied: bool,
}

#[derive(Serialize)]
struct HypothesisOut {
    pass: bool,
    clauses: Vec<ClauseOut>,
}

fn hypothesis_out(report: &HypothesisReport) -> HypothesisOut {
    HypothesisOut {
        pass: report.pass,
        clauses: report
            .clauses
            .iter()
            .map(|c| ClauseOut {
                description: c.description.clone(),
                satisfied: c.satisfied,
            })
            .collect(),
    }
}

#[derive(Serialize)]
struct LargeFieldOut {
    rule: &'static str,
    q: u64,
    n: u64,
    set_size: String,
    r: u64,
    t: u64,
    entropy_loss_field_digits: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    hypotheses_main: Option<HypothesisOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hypotheses_improved: Option<HypothesisOut>,
}

#[derive(Serialize)]
struct InjectiveOut {
    rule: &'static str,
    set_size: String,
    delta: String,
    t: u64,
}

#[derive(Serialize)]
struct BinaryOut {
    rule: String,
    n: u64,
    set_size: String,
    tau: String,
    delta: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<u64>,
    ell: u64,
    n_prime: u64,
    r: u64,
    t: u64,
    entropy_loss_bits: u64,
    stated_bound: String,
    stated_bound_met: bool,
    conditions: HypothesisOut,
}

fn hash_error(e: HashError) -> RunError {
    RunError::Config(e.to_string())
}

fn require<T>(value: Option<T>, key: &str) -> Result<T, RunError> {
    value.ok_or_else(|| RunError::Config(format!("missing --{key}")))
}

/// Evaluate the rule; returns one JSON line.
pub fn run_params(inputs: &ParamInputs) -> Result<String, RunError> {
    let out = match inputs.rule {
        ParamRule::LargeField => {
            let ctx = FieldCtx::new(inputs.p, inputs.ell)
                .map_err(|e| RunError::Config(e.to_string()))?;
            let n = require(inputs.n, "n")?;
            let size = require(inputs.set_size.clone(), "set-size")?;
            let choice = choose_t_large_field(&ctx, &size, n).map_err(hash_error)?;
            let (main, improved) = match (&inputs.tau, &inputs.delta) {
                (Some(tau), Some(delta)) => (
                    Some(hypothesis_out(&hypothesis_check_large_field(
                        &ctx,
                        n,
                        tau,
                        delta,
                        LargeFieldVariant::Main,
                    ))),
                    Some(hypothesis_out(&hypothesis_check_large_field(
                        &ctx,
                        n,
                        tau,
                        delta,
                        LargeFieldVariant::Improved,
                    ))),
                ),
                _ => (None, None),
            };
            serde_json::to_string(&LargeFieldOut {
                rule: "large-field",
                q: ctx.q(),
                n,
                set_size: size.to_string(),
                r: choice.r,
                t: choice.t,
                entropy_loss_field_digits: choice.entropy_loss_qdigits,
                hypotheses_main: main,
                hypotheses_improved: improved,
            })
        }
        ParamRule::Injective => {
            let size = require(inputs.set_size.clone(), "set-size")?;
            let delta = require(inputs.delta.clone(), "delta")?;
            let t = injective_t(&size, &delta).map_err(hash_error)?;
            serde_json::to_string(&InjectiveOut {
                rule: "injective",
                set_size: size.to_string(),
                delta: rational_to_string(&delta),
                t,
            })
        }
        ParamRule::HypothesisMain | ParamRule::HypothesisImproved => {
            let ctx = FieldCtx::new(inputs.p, inputs.ell)
                .map_err(|e| RunError::Config(e.to_string()))?;
            let n = require(inputs.n, "n")?;
            let tau = require(inputs.tau.clone(), "tau")?;
            let delta = require(inputs.delta.clone(), "delta")?;
            let variant = if inputs.rule == ParamRule::HypothesisMain {
                LargeFieldVariant::Main
            } else {
                LargeFieldVariant::Improved
            };
            let report = hypothesis_check_large_field(&ctx, n, &tau, &delta, variant);
            serde_json::to_string(&hypothesis_out(&report))
        }
        ParamRule::BinaryDirect
        | ParamRule::BinaryTwoStage
        | ParamRule::BinaryDirectLargeTau
        | ParamRule::BinaryTwoStageLargeTau => {
            let n = require(inputs.n, "n")?;
            let size = require(inputs.set_size.clone(), "set-size")?;
            let tau = require(inputs.tau.clone(), "tau")?;
            let delta = require(inputs.delta.clone(), "delta")?;
            let variant = match inputs.rule {
                ParamRule::BinaryDirect => BinaryVariant::Direct,
                ParamRule::BinaryTwoStage => BinaryVariant::TwoStage,
                ParamRule::BinaryDirectLargeTau => BinaryVariant::DirectLargeTau,
                _ => BinaryVariant::TwoStageLargeTau,
            };
            let params = choose_t_binary(n, &size, &tau, &delta, variant).map_err(hash_error)?;
            serde_json::to_string(&BinaryOut {
                rule: params.variant.label().to_string(),
                n: params.n,
                set_size: params.set_size.to_string(),
                tau: rational_to_string(&params.tau),
                delta: rational_to_string(&params.delta),
                m: params.m,
                ell: params.ell,
                n_prime: params.n_prime,
                r: params.r,
                t: params.t,
                entropy_loss_bits: params.entropy_loss_bound_bits,
                stated_bound: params.stated_bound.clone(),
                stated_bound_met: params.stated_bound_met,
                conditions: hypothesis_out(&params.conditions),
            })
        }
    };
    Ok(out.expect("serialize"))
}
