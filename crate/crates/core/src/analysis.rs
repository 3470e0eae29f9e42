//! Ratio-test estimates of the critical field and resummation checks.

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fermion::solve_chain;
use crate::observables::wilson_loop;
use crate::pcut::{Channel, Regime, SeriesPolynomial};

/// Ratio estimator for a series Σ c_k x^k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Estimator {
    /// √|a_k / a_{k+1}| for a series in λ².
    SmallField,
    /// √|b_{k+1} / b_k| for a series in λ⁻².
    LargeField,
}

impl Estimator {
    pub fn for_regime(regime: Regime) -> Self {
        match regime {
            Regime::SmallField => Estimator::SmallField,
            Regime::LargeField => Estimator::LargeField,
        }
    }

    pub fn label(self, k: usize) -> String {
        match self {
            Estimator::SmallField => format!("sqrt(a{k}/a{})", k + 1),
            Estimator::LargeField => format!("sqrt(b{}/b{k})", k + 1),
        }
    }

    /// The estimate from c_k and c_{k+1}; `None` when either vanishes.
    pub fn apply(self, ck: &BigRational, next: &BigRational) -> Option<f64> {
        if ck.is_zero() || next.is_zero() {
            return None;
        }
        let r = match self {
            Estimator::SmallField => ck / next,
            Estimator::LargeField => next / ck,
        };
        r.abs().to_f64().map(f64::sqrt)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalEstimate {
    pub source: String,
    pub channel: Channel,
    pub estimator: Estimator,
    pub k: usize,
    /// Absent where the table shows "-".
    pub value: Option<f64>,
}

/// Short label for a series, e.g. `renyi/small/isotropic2d`.
pub fn source_label(series: &SeriesPolynomial) -> String {
    format!(
        "{}/{}/{}",
        series.target.name(),
        series.regime,
        series.variant
    )
}

/// One estimate per consecutive coefficient pair of every channel that is
/// not identically zero.
pub fn ratio_estimates(series: &SeriesPolynomial) -> Vec<CriticalEstimate> {
    let estimator = Estimator::for_regime(series.regime);
    let source = source_label(series);
    let mut out = Vec::new();
    for (&channel, coeffs) in &series.channels {
        if coeffs.len() < 2 || coeffs.iter().all(Zero::is_zero) {
            continue;
        }
        for k in 1..coeffs.len() {
            out.push(CriticalEstimate {
                source: source.clone(),
                channel,
                estimator,
                k,
                value: estimator.apply(&coeffs[k - 1], &coeffs[k]),
            });
        }
    }
    out
}

/// Rounds half to even at the given number of decimals.
pub fn round_half_even(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale).round_ties_even() / scale
}

/// Table value as printed: three decimals or "-".
pub fn format_estimate(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.3}", round_half_even(v, 3)),
        None => "-".to_string(),
    }
}

/// CSV with columns source,channel,estimator,value.
pub fn estimates_csv(estimates: &[CriticalEstimate]) -> String {
    let mut out = String::from("source,channel,estimator,value\n");
    for e in estimates {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            e.source,
            e.channel,
            e.estimator.label(e.k),
            format_estimate(e.value)
        );
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bracket {
    pub min: f64,
    pub max: f64,
    pub reference: f64,
    pub contains_reference: bool,
}

/// Critical field of the isotropic model from numerical studies.
pub const LAMBDA_C_2D: f64 = 0.33;
/// Critical field of the quasi-1D model.
pub const LAMBDA_C_QUASI1D: f64 = 1.0;

/// Range spanned by the present estimates, compared with a reference λ_C.
pub fn bracket_report(estimates: &[CriticalEstimate], reference: f64) -> Result<Bracket> {
    let values: Vec<f64> = estimates.iter().filter_map(|e| e.value).collect();
    if values.is_empty() {
        return Err(Error::InsufficientData("no defined estimates".into()));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Bracket {
        min,
        max,
        reference,
        contains_reference: min <= reference && reference <= max,
    })
}

/// Worst absolute deviations over a λ grid between the truncated exponent
/// series, the closed form (1 − λ²)^(1/4) and the exact chain value of W₀.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResummationCheck {
    pub truncated_vs_closed: f64,
    pub exact_vs_closed: Option<f64>,
    pub exact_vs_truncated: Option<f64>,
}

/// exp(−Σ_{k≤K} λ^{2k}/(4k)).
pub fn wilson_truncated(lambda: f64, max_order: usize) -> f64 {
    let x = lambda * lambda;
    let s: f64 = (1..=max_order)
        .map(|k| x.powi(k as i32) / (4.0 * k as f64))
        .sum();
    (-s).exp()
}

pub fn wilson_closed_form(lambda: f64) -> f64 {
    (1.0 - lambda * lambda).powf(0.25)
}

/// `exact` selects the chain length N and loop extent D for the exact engine.
pub fn wilson_resummation_check(
    max_order: usize,
    lambdas: &[f64],
    exact: Option<(usize, usize)>,
) -> Result<ResummationCheck> {
    if let Some(&bad) = lambdas.iter().find(|l| !(0.0..1.0).contains(*l)) {
        return Err(Error::InvalidConfig(format!("λ = {bad} outside [0, 1)")));
    }
    let mut check = ResummationCheck {
        truncated_vs_closed: 0.0,
        exact_vs_closed: exact.map(|_| 0.0),
        exact_vs_truncated: exact.map(|_| 0.0),
    };
    for &l in lambdas {
        let t = wilson_truncated(l, max_order);
        let c = wilson_closed_form(l);
        check.truncated_vs_closed = check.truncated_vs_closed.max((t - c).abs());
        if let Some((n, d)) = exact {
            let w0 = if l == 0.0 {
                1.0
            } else {
                wilson_loop(&solve_chain(n, l)?, d)?.w0
            };
            let upd = |slot: &mut Option<f64>, v: f64| *slot = slot.map(|m| m.max(v));
            upd(&mut check.exact_vs_closed, (w0 - c).abs());
            upd(&mut check.exact_vs_truncated, (w0 - t).abs());
        }
    }
    Ok(check)
}
