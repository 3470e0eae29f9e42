use anyhow::{bail, Result};
use serde_json::{json, Value};
use toric_renyi::analysis::{estimates_csv, ratio_estimates, CriticalEstimate};
use toric_renyi::lattice::Variant;
use toric_renyi::pcut::{
    renyi_family, series_renyi, series_wilson, wilson_family, Regime, SeriesPolynomial,
};

use crate::config::{RunConfig, SeriesTarget};

/// Orders from which the isotropic expansion needs `stretch` (about ten
/// minutes on one core at order 6).
pub const STRETCH_ORDER_2D: usize = 6;

pub fn compute(cfg: &RunConfig) -> Result<Vec<SeriesPolynomial>> {
    if cfg.variant == Variant::Isotropic2d && cfg.order >= STRETCH_ORDER_2D && !cfg.stretch {
        bail!(
            "isotropic order {} is the expensive configuration; pass --stretch to run it",
            cfg.order
        );
    }
    let regimes: Vec<Regime> = match cfg.regime {
        Some(r) => vec![r],
        None => vec![Regime::SmallField, Regime::LargeField],
    };
    let mut out = Vec::new();
    if cfg.target != SeriesTarget::Wilson {
        let fam = renyi_family(cfg.order)?;
        for &r in &regimes {
            out.push(series_renyi(r, cfg.variant, &fam, cfg.order)?);
        }
    }
    if cfg.target != SeriesTarget::Renyi && regimes.contains(&Regime::SmallField) {
        out.push(series_wilson(
            cfg.variant,
            &wilson_family(cfg.variant, cfg.order)?,
            cfg.order,
        )?);
    }
    Ok(out)
}

fn estimate_json(e: &CriticalEstimate) -> Value {
    json!({
        "source": e.source,
        "channel": e.channel.name(),
        "estimator": e.estimator.label(e.k),
        "k": e.k,
        "value": e.value,
    })
}

pub struct SeriesOutput {
    pub json: String,
    pub csv: String,
}

pub fn run(cfg: &RunConfig) -> Result<SeriesOutput> {
    let series = compute(cfg)?;
    let estimates: Vec<CriticalEstimate> = series.iter().flat_map(ratio_estimates).collect();
    let doc = json!({
        "series": series.iter().map(SeriesPolynomial::to_json).collect::<Vec<_>>(),
        "estimates": estimates.iter().map(estimate_json).collect::<Vec<_>>(),
    });
    Ok(SeriesOutput {
        json: serde_json::to_string_pretty(&doc)? + "\n",
        csv: estimates_csv(&estimates),
    })
}
