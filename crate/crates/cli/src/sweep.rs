use std::fmt::Write as _;

use anyhow::{bail, Result};
use rayon::prelude::*;
use toric_renyi::analysis::wilson_closed_form;
use toric_renyi::fermion::solve_chain;
use toric_renyi::lattice::{LatticeSpec, ProductMode, Variant};
use toric_renyi::observables::{topological_renyi, wilson_loop, RenyiOptions};
use toric_renyi::Error;

use crate::config::{Observable, RunConfig, Size};

pub const RENYI_HEADER: &str = "lambda,N,D,d,S2_1,S2_2,S2_3,S2_4,S2_T,W0,status";
pub const WILSON_HEADER: &str = "lambda,N,D,W0,W_R,closed_form,status";

fn status_of(e: &Error) -> String {
    match e {
        Error::BudgetExceeded { .. } => "budget-exceeded".to_string(),
        other => format!("error: {}", other.to_string().replace([',', '\n'], ";")),
    }
}

fn renyi_row(lambda: f64, size: Size, budget: u128) -> String {
    let mut row = format!("{lambda:.6},{},{},{},", size.n, size.extent, size.thickness);
    let result = LatticeSpec::new(size.n, Variant::Quasi1d, lambda).and_then(|spec| {
        topological_renyi(
            &spec,
            size.extent,
            size.thickness,
            RenyiOptions {
                budget,
                mode: ProductMode::ChainEven,
            },
        )
    });
    match result {
        Ok(r) => {
            for s in r.entropies {
                let _ = write!(row, "{s:.12},");
            }
            let _ = write!(
                row,
                "{:.12},{:.12},ok",
                r.topological,
                r.w0.unwrap_or(f64::NAN)
            );
        }
        Err(e) => row += &format!(",,,,,,{}", status_of(&e)),
    }
    row
}

fn wilson_row(lambda: f64, size: Size) -> String {
    let mut row = format!("{lambda:.6},{},{},", size.n, size.extent);
    let closed = if lambda < 1.0 {
        format!("{:.12}", wilson_closed_form(lambda))
    } else {
        String::new()
    };
    match solve_chain(size.n, lambda).and_then(|c| wilson_loop(&c, size.extent)) {
        Ok(w) => {
            let _ = write!(row, "{:.12},{:.12e},{closed},ok", w.w0, w.w_r);
        }
        Err(e) => row += &format!(",,{closed},{}", status_of(&e)),
    }
    row
}

/// CSV text of a sweep; rows in (size, λ) input order.
pub fn run(cfg: &RunConfig) -> Result<String> {
    if cfg.variant != Variant::Quasi1d {
        bail!("sweep uses the exact engine, which covers the quasi-1D variant only");
    }
    if cfg.lambdas.is_empty() {
        bail!("empty field grid: set lambda or grid");
    }
    if cfg.sizes.is_empty() {
        bail!("no system size: set N and D");
    }
    let points: Vec<(Size, f64)> = cfg
        .sizes
        .iter()
        .flat_map(|&s| cfg.lambdas.iter().map(move |&l| (s, l)))
        .collect();
    let compute = || -> Vec<String> {
        points
            .par_iter()
            .map(|&(size, l)| match cfg.observable {
                Observable::Renyi => renyi_row(l, size, cfg.budget),
                Observable::Wilson => wilson_row(l, size),
            })
            .collect()
    };
    let rows = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()?
            .install(compute),
        None => compute(),
    };
    let header = match cfg.observable {
        Observable::Renyi => RENYI_HEADER,
        Observable::Wilson => WILSON_HEADER,
    };
    let mut out = String::with_capacity(rows.len() * 96);
    out.push_str(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(out)
}
