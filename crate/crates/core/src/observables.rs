//! Exact boundary Rényi entropy, topological Rényi entropy and Wilson loop of
//! the quasi-1D model.
//!
//! With the boundary probabilities diagonal, Tr ρ²_∂A = 2^−(L−n) Σ_q ⟨X_q⟩²,
//! where q runs over star subsets with an even number of members on every
//! loop and X_q = ∏_{s∈q} A_s^x. The ground state is a product over
//! horizontal chains, so ⟨X_q⟩ vanishes unless q is even on every chain and
//! otherwise factorizes into per-chain strings.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fermion::{solve_chain, x_string, z_string, ChainGroundState};
use crate::lattice::{
    build_partition, enumerate_boundary_products, BoundaryGeometry, LatticeSpec, PartitionCase,
    ProductMode, Variant,
};

/// Default cap on the number of per-chain string evaluations.
pub const DEFAULT_BUDGET: u128 = 1 << 30;
/// Slack allowed on the bounds 0 ≤ S ≤ L − n.
pub const ENTROPY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RenyiOptions {
    pub budget: u128,
    pub mode: ProductMode,
}

impl Default for RenyiOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            mode: ProductMode::ChainEven,
        }
    }
}

/// S₂ of ∂A together with the quantities it was derived from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RenyiValue {
    /// S₂^∂A in bits.
    pub entropy: f64,
    /// Σ_q ⟨X_q⟩² − 1, kept separately for accuracy near λ = 0.
    pub excess: f64,
    /// L − n.
    pub free_spins: usize,
    /// Number of string expectations evaluated.
    pub evaluations: u128,
}

impl RenyiValue {
    fn from_excess(excess: f64, free_spins: usize, evaluations: u128) -> Result<Self> {
        let log2_sum = if excess >= 1.0 {
            (1.0 + excess).log2()
        } else {
            excess.ln_1p() / std::f64::consts::LN_2
        };
        let entropy = free_spins as f64 - log2_sum;
        if !(-ENTROPY_TOLERANCE..=free_spins as f64 + ENTROPY_TOLERANCE).contains(&entropy) {
            return Err(Error::Numerical(format!(
                "S2 = {entropy} outside [0, {free_spins}] (sum excess {excess})"
            )));
        }
        Ok(Self {
            entropy,
            excess,
            free_spins,
            evaluations,
        })
    }

    /// ln Σ_q ⟨X_q⟩².
    pub fn log_sum(&self) -> f64 {
        self.excess.ln_1p()
    }
}

/// The two exactly known states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedPoint {
    /// Unperturbed toric code |0⟩: ⟨X_q⟩ = 0 unless q is empty.
    Reference,
    /// Field-polarized |⇑⟩: ⟨X_q⟩ = 1 for every loop-even q.
    Polarized,
}

/// S₂^∂A at a fixed point, from the loop-parity kernel of the geometry.
pub fn renyi_fixed_point(geom: &BoundaryGeometry, point: FixedPoint) -> Result<RenyiValue> {
    let free = geom.free_spins();
    let excess = match point {
        FixedPoint::Reference => 0.0,
        FixedPoint::Polarized => {
            let dim = enumerate_boundary_products(geom, ProductMode::Unpruned)?.dimension();
            (2.0f64).powi(dim as i32) - 1.0
        }
    };
    RenyiValue::from_excess(excess, free, 0)
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

struct RowTable {
    /// Loop index of each boundary star in the row, by column order.
    loops: Vec<usize>,
    cols: Vec<usize>,
}

fn row_tables(geom: &BoundaryGeometry) -> Vec<RowTable> {
    geom.chain_segments
        .values()
        .map(|members| RowTable {
            loops: members.iter().map(|m| m.loop_index).collect(),
            cols: members.iter().map(|m| m.col).collect(),
        })
        .collect()
}

/// Number of even subsets over all chains, the cost of the pruned evaluation.
pub fn pruned_cost(geom: &BoundaryGeometry) -> u128 {
    geom.chain_segments
        .values()
        .map(|m| {
            if m.len() >= 128 {
                u128::MAX
            } else {
                1u128 << (m.len().max(1) - 1)
            }
        })
        .fold(0u128, |a, b| a.saturating_add(b))
}

/// Squared string expectations for every even subset of the given columns,
/// indexed by subset mask (odd masks hold 0).
fn squared_strings(state: &ChainGroundState, cols: &[usize]) -> Vec<f64> {
    let c = cols.len();
    (0..1usize << c)
        .into_par_iter()
        .with_min_len(64)
        .map(|mask| {
            if mask == 0 || mask.count_ones() % 2 == 1 {
                return 0.0;
            }
            let sites: Vec<usize> = (0..c)
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| cols[i])
                .collect();
            x_string(state, &sites).powi(2)
        })
        .collect()
}

/// S₂^∂A for the quasi-1D ground state built from identical chains.
pub fn renyi_boundary(
    state: &ChainGroundState,
    geom: &BoundaryGeometry,
    opts: RenyiOptions,
) -> Result<RenyiValue> {
    if state.n() != geom.lattice_n {
        return Err(Error::InvalidConfig(format!(
            "chain length {} does not match lattice size {}",
            state.n(),
            geom.lattice_n
        )));
    }
    match opts.mode {
        ProductMode::ChainEven => renyi_pruned(state, geom, opts.budget),
        ProductMode::Unpruned => renyi_unpruned(state, geom, opts.budget),
    }
}

fn renyi_pruned(
    state: &ChainGroundState,
    geom: &BoundaryGeometry,
    budget: u128,
) -> Result<RenyiValue> {
    let cost = pruned_cost(geom);
    if cost > budget {
        return Err(Error::BudgetExceeded {
            count: cost,
            cap: budget,
        });
    }
    let n_loops = geom.loop_count;
    if n_loops > 20 {
        return Err(Error::InvalidPartition(format!("{n_loops} loops")));
    }
    let patterns = 1usize << n_loops;
    // Rows with the same column offsets share their string values.
    let mut memo: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
    let mut total = vec![0.0; patterns];
    for row in row_tables(geom) {
        let offsets: Vec<usize> = row.cols.iter().map(|c| c - row.cols[0]).collect();
        let values = memo
            .entry(offsets.clone())
            .or_insert_with(|| squared_strings(state, &offsets));
        let mut h = vec![CompensatedSum::default(); patterns];
        for (mask, &v) in values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let mut p = 0usize;
            for (i, &l) in row.loops.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    p ^= 1 << l;
                }
            }
            h[p].add(v);
        }
        let h: Vec<f64> = h.iter().map(CompensatedSum::value).collect();
        // (δ + T)(δ + h) = δ + T + h + T∗h with ∗ the XOR convolution.
        let mut next: Vec<f64> = total.iter().zip(&h).map(|(t, x)| t + x).collect();
        for (a, &ta) in total.iter().enumerate() {
            if ta == 0.0 {
                continue;
            }
            for (b, &hb) in h.iter().enumerate() {
                next[a ^ b] += ta * hb;
            }
        }
        total = next;
    }
    RenyiValue::from_excess(total[0], geom.free_spins(), cost)
}

fn renyi_unpruned(
    state: &ChainGroundState,
    geom: &BoundaryGeometry,
    budget: u128,
) -> Result<RenyiValue> {
    let count = 1u128 << geom.free_spins().min(127);
    if count > budget {
        return Err(Error::BudgetExceeded { count, cap: budget });
    }
    let stars = geom.boundary_stars();
    let mut rows: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, s) in stars.iter().enumerate() {
        rows.entry(s.row).or_default().push((i, s.col));
    }
    let masks: Vec<u64> = enumerate_boundary_products(geom, ProductMode::Unpruned)?.collect();
    let values: Vec<f64> = masks
        .par_iter()
        .with_min_len(256)
        .map(|&m| {
            let mut prod = 1.0;
            for members in rows.values() {
                let sites: Vec<usize> = members
                    .iter()
                    .filter(|(i, _)| m >> i & 1 == 1)
                    .map(|&(_, c)| c)
                    .collect();
                if sites.is_empty() {
                    continue;
                }
                prod *= x_string(state, &sites);
                if prod == 0.0 {
                    break;
                }
            }
            prod * prod
        })
        .collect();
    let mut sum = CompensatedSum::default();
    for (&m, &v) in masks.iter().zip(&values) {
        if m != 0 {
            sum.add(v);
        }
    }
    RenyiValue::from_excess(sum.value(), geom.free_spins(), count)
}

/// One point of a parameter sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub lambda: f64,
    pub n: usize,
    pub extent: usize,
    pub thickness: usize,
    pub variant: Variant,
    /// S₂ of the four cases.
    pub entropies: [f64; 4],
    /// −S⁽¹⁾ + S⁽²⁾ + S⁽³⁾ − S⁽⁴⁾.
    pub topological: f64,
    pub w0: Option<f64>,
    pub evaluations: u128,
    pub elapsed_ms: u128,
}

/// Combines the four case entropies into S₂ᵀ.
pub fn combine_cases(entropies: [f64; 4]) -> f64 {
    -entropies[0] + entropies[1] + entropies[2] - entropies[3]
}

/// S₂ᵀ and W₀ for the quasi-1D model at one field value.
pub fn topological_renyi(
    spec: &LatticeSpec,
    extent: usize,
    thickness: usize,
    opts: RenyiOptions,
) -> Result<SweepResult> {
    if spec.variant() != Variant::Quasi1d {
        return Err(Error::InvalidConfig(
            "the exact engine covers the quasi-1D model only".into(),
        ));
    }
    let start = Instant::now();
    let geoms = PartitionCase::all(extent, thickness)?
        .iter()
        .map(|&c| build_partition(c, spec))
        .collect::<Result<Vec<_>>>()?;
    let total_cost: u128 = geoms.iter().map(pruned_cost).fold(0, u128::saturating_add);
    if opts.mode == ProductMode::ChainEven && total_cost > opts.budget {
        return Err(Error::BudgetExceeded {
            count: total_cost,
            cap: opts.budget,
        });
    }
    let state = solve_chain(spec.n(), spec.lambda())?;
    let mut entropies = [0.0; 4];
    let mut evaluations = 0;
    for (slot, g) in entropies.iter_mut().zip(&geoms) {
        let v = renyi_boundary(&state, g, opts)?;
        *slot = v.entropy;
        evaluations += v.evaluations;
    }
    Ok(SweepResult {
        lambda: spec.lambda(),
        n: spec.n(),
        extent,
        thickness,
        variant: spec.variant(),
        entropies,
        topological: combine_cases(entropies),
        w0: Some(z_string(&state, extent)),
        evaluations,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

/// Four-case entropies at a fixed point.
pub fn topological_fixed_point(
    extent: usize,
    thickness: usize,
    n: usize,
    point: FixedPoint,
) -> Result<f64> {
    let spec = LatticeSpec::new(n, Variant::Quasi1d, 0.0)?;
    let mut entropies = [0.0; 4];
    for (slot, c) in entropies
        .iter_mut()
        .zip(PartitionCase::all(extent, thickness)?)
    {
        *slot = renyi_fixed_point(&build_partition(c, &spec)?, point)?.entropy;
    }
    Ok(combine_cases(entropies))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WilsonValue {
    pub w0: f64,
    pub w_r: f64,
}

/// W₀ = ⟨∏_{l<D} A_l^z⟩ on one chain and W_R = W₀^D for the D×D region.
pub fn wilson_loop(state: &ChainGroundState, extent: usize) -> Result<WilsonValue> {
    if extent > state.n() {
        return Err(Error::ShapeDoesNotFit(format!(
            "D={extent} on a chain of {}",
            state.n()
        )));
    }
    let w0 = z_string(state, extent);
    Ok(WilsonValue {
        w0,
        w_r: w0.powi(extent as i32),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingLaw {
    Perimeter,
    Area,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub law: ScalingLaw,
    /// Rate β of W_R ∝ exp(−βD) (perimeter) or exp(−βD²) (area).
    pub beta: f64,
    /// R² of the linear fit of ln W₀ against D.
    pub r_squared: f64,
    /// Relative change of W₀ between the last two points.
    pub last_gap: f64,
}

/// Relative change of W₀ between the last two sizes below which W₀ counts as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-3;
pub const AREA_R_SQUARED: f64 = 0.999;

/// Classifies W₀(D) data as perimeter law (W₀ converges) or area law (ln W₀
/// linear in D with negative slope).
pub fn classify_scaling(points: &[(usize, f64)]) -> Result<ScalingFit> {
    if points.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} points, need 5",
            points.len()
        )));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InsufficientData("D values must increase".into()));
    }
    let (d_prev, w_prev) = points[points.len() - 2];
    let (d_last, w_last) = points[points.len() - 1];
    let last_gap = if w_last == w_prev {
        0.0
    } else {
        (w_last - w_prev).abs() / w_last.abs().max(f64::MIN_POSITIVE) / (d_last - d_prev) as f64
    };
    let (slope, r_squared) = if points.iter().all(|p| p.1 > 0.0) {
        linear_fit(points.iter().map(|&(d, w)| (d as f64, w.ln())))
    } else {
        (f64::NAN, f64::NAN)
    };
    let fit = |law, beta| ScalingFit {
        law,
        beta,
        r_squared,
        last_gap,
    };
    if last_gap < CONVERGENCE_TOLERANCE && w_last > 0.0 {
        return Ok(fit(ScalingLaw::Perimeter, -w_last.ln()));
    }
    if slope < 0.0 && r_squared >= AREA_R_SQUARED {
        return Ok(fit(ScalingLaw::Area, -slope));
    }
    Ok(fit(ScalingLaw::Undetermined, f64::NAN))
}

/// Least-squares slope and R² of y against x.
fn linear_fit(data: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = data.collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_partition_at;
    use crate::lattice::Star;

    #[test]
    fn zero_field_gives_l_minus_n() {
        let spec = LatticeSpec::new(12, Variant::Quasi1d, 0.0).unwrap();
        let state = solve_chain(12, 0.0).unwrap();
        for c in PartitionCase::all(7, 2).unwrap() {
            let g = build_partition(c, &spec).unwrap();
            let v = renyi_boundary(&state, &g, RenyiOptions::default()).unwrap();
            assert_eq!(v.entropy, (g.length - g.loop_count) as f64);
        }
    }

    #[test]
    fn fixed_points() {
        assert_eq!(
            topological_fixed_point(6, 2, 10, FixedPoint::Reference).unwrap(),
            2.0
        );
        assert_eq!(
            topological_fixed_point(6, 2, 10, FixedPoint::Polarized).unwrap(),
            0.0
        );
    }

    #[test]
    fn pruned_equals_unpruned() {
        let g =
            build_partition_at(PartitionCase::new(2, 3, 1).unwrap(), 8, Star::new(1, 2)).unwrap();
        assert!(g.free_spins() <= 20);
        let state = solve_chain(8, 0.9).unwrap();
        let a = renyi_boundary(&state, &g, RenyiOptions::default()).unwrap();
        let b = renyi_boundary(
            &state,
            &g,
            RenyiOptions {
                mode: ProductMode::Unpruned,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            (a.entropy - b.entropy).abs() < 1e-12,
            "{} vs {}",
            a.entropy,
            b.entropy
        );
    }

    #[test]
    fn budget_is_enforced() {
        let spec = LatticeSpec::new(40, Variant::Quasi1d, 0.5).unwrap();
        let err = topological_renyi(
            &spec,
            30,
            10,
            RenyiOptions {
                budget: 1 << 12,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn classify_constant_and_short() {
        let ones: Vec<_> = (1..=6).map(|d| (d * 10, 1.0)).collect();
        let fit = classify_scaling(&ones).unwrap();
        assert_eq!(fit.law, ScalingLaw::Perimeter);
        assert_eq!(fit.beta, 0.0);
        assert!(matches!(
            classify_scaling(&ones[..4]),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn classify_exponential_decay_as_area() {
        let pts: Vec<_> = (1..=6)
            .map(|d| (d * 10, (-0.05 * (d * 10) as f64).exp()))
            .collect();
        let fit = classify_scaling(&pts).unwrap();
        assert_eq!(fit.law, ScalingLaw::Area);
        assert!((fit.beta - 0.05).abs() < 1e-12);
    }
}
