//! Perturbed ground states on finite sets of terms.
//!
//! A term is −(parameter)·Πσˣ over a set of sites and is stored as the bitmask
//! of those sites. Acting on a basis state x it flips every bit of the mask;
//! the grading of that action is the change in excitation number,
//! |mask| − 2·|x ∧ mask|. The ground state is
//!
//! |Ω⟩ = U|0⟩ = Σ_w G(∞; w) T(w)|0⟩,
//!
//! evaluated word by word, right to left, with exact integer state vectors.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::flow::FlowExpansion;
use super::operator::Generators;
use super::power::PowerSeries;
use crate::error::{Error, Result};

/// Ground-state amplitudes as power series in the expansion parameter.
#[derive(Clone, Debug)]
pub struct GroundState {
    pub order: usize,
    pub amplitudes: BTreeMap<u64, PowerSeries>,
}

impl GroundState {
    pub fn amplitude(&self, state: u64) -> Option<&PowerSeries> {
        self.amplitudes.get(&state)
    }

    /// ⟨Ω|Ω⟩ truncated at the order.
    pub fn norm(&self) -> PowerSeries {
        let mut out = PowerSeries::zero(self.order);
        for a in self.amplitudes.values() {
            out.add_product(a, a);
        }
        out
    }
}

fn apply_graded(terms: &[u64], grading: i32, v: &HashMap<u64, i64>) -> HashMap<u64, i64> {
    let mut out: HashMap<u64, i64> = HashMap::new();
    for (&x, &c) in v {
        for &t in terms {
            let g = t.count_ones() as i32 - 2 * (x & t).count_ones() as i32;
            if g == grading {
                *out.entry(x ^ t).or_insert(0) -= c;
            }
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// |Ω⟩ for the Hamiltonian 2Q − Σ_t Πσˣ(t), to the given order.
pub fn cluster_ground_state(terms: &[u64], flow: &FlowExpansion, order: usize) -> GroundState {
    assert!(
        flow.order() >= order,
        "flow expanded to {} < {order}",
        flow.order()
    );
    let mut amps: BTreeMap<u64, PowerSeries> = BTreeMap::new();
    amps.insert(0, PowerSeries::one(order));
    let start: HashMap<u64, i64> = [(0u64, 1i64)].into_iter().collect();
    let mut word = Vec::with_capacity(order);
    descend(terms, flow, order, &start, &mut word, &mut amps);
    amps.retain(|_, a| !a.is_zero());
    GroundState {
        order,
        amplitudes: amps,
    }
}

/// `word` holds the letters applied so far, most recent first.
fn descend(
    terms: &[u64],
    flow: &FlowExpansion,
    order: usize,
    v: &HashMap<u64, i64>,
    word: &mut Vec<i8>,
    amps: &mut BTreeMap<u64, PowerSeries>,
) {
    for &m in flow.letters() {
        let next = apply_graded(terms, m as i32, v);
        if next.is_empty() {
            continue;
        }
        word.insert(0, m);
        if let Some(g) = flow.unitary_limit(word) {
            let k = word.len();
            for (&x, &c) in &next {
                let amp = amps.entry(x).or_insert_with(|| PowerSeries::zero(order));
                amp.add_at(k, &(g * BigRational::from_integer(BigInt::from(c))));
            }
        }
        if word.len() < order {
            descend(terms, flow, order, &next, word, amps);
        }
        word.remove(0);
    }
}

/// Ground state on the whole torus described by `gens` (at most 64 sites).
pub fn perturbed_ground_state(
    gens: &Generators,
    flow: &FlowExpansion,
    order: usize,
) -> Result<GroundState> {
    if gens.sites.len() > 64 {
        return Err(Error::InvalidConfig(format!(
            "{} sites exceed the 64-bit state encoding",
            gens.sites.len()
        )));
    }
    let masks: Vec<u64> = gens
        .terms
        .iter()
        .map(|t| t.iter().fold(0u64, |m, &s| m | 1 << s))
        .collect();
    Ok(cluster_ground_state(&masks, flow, order))
}

/// What to evaluate on a cluster ground state. Site labels are small
/// integers; 0 marks an inert site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClusterObservable {
    /// ln Σ_w ⟨Ω|Xʷ|Ω⟩² over star subsets w with an even number of members on
    /// each labelled loop.
    SmallRenyi,
    /// ln Σ_σ P(σ)², P the distribution of the labelled spins.
    LargeRenyi,
    /// −ln ⟨Ω|Π_{labelled} A^z|Ω⟩.
    WilsonLog,
}

impl ClusterObservable {
    /// Clusters whose F is identically zero for a given label vector.
    pub fn admits(&self, labels: &[u8]) -> bool {
        match self {
            ClusterObservable::SmallRenyi => {
                let mut counts = [0usize; 256];
                labels
                    .iter()
                    .filter(|&&l| l > 0)
                    .for_each(|&l| counts[l as usize] += 1);
                counts.iter().any(|&c| c >= 2)
            }
            ClusterObservable::LargeRenyi => labels.iter().any(|&l| l > 0),
            ClusterObservable::WilsonLog => labels.iter().any(|&l| l > 0) && labels.contains(&0),
        }
    }

    /// F on a ground state whose bit i carries `labels[i]`.
    pub fn evaluate(&self, gs: &GroundState, labels: &[u8]) -> PowerSeries {
        let order = gs.order;
        let mask_of = |pred: &dyn Fn(u8) -> bool| {
            labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| pred(l))
                .fold(0u64, |m, (i, _)| m | 1 << i)
        };
        match self {
            ClusterObservable::SmallRenyi => {
                let labelled = mask_of(&|l| l > 0);
                let mut loops: Vec<u64> = Vec::new();
                for l in 1..=labels.iter().copied().max().unwrap_or(0) {
                    let m = mask_of(&|x| x == l);
                    if m != 0 {
                        loops.push(m);
                    }
                }
                let admissible = |w: u64| {
                    w & !labelled == 0
                        && loops.iter().all(|m| (w & m).count_ones().is_multiple_of(2))
                };
                let support: Vec<(&u64, &PowerSeries)> = gs.amplitudes.iter().collect();
                let mut expect: HashMap<u64, PowerSeries> = HashMap::new();
                let two = BigRational::from_integer(2.into());
                for (i, (&x, ax)) in support.iter().enumerate() {
                    for (&y, ay) in &support[i..] {
                        let w = x ^ y;
                        if !admissible(w) {
                            continue;
                        }
                        let mut p = ax.mul(ay);
                        if x != y {
                            p = p.scaled(&two);
                        }
                        expect
                            .entry(w)
                            .or_insert_with(|| PowerSeries::zero(order))
                            .add_assign(&p);
                    }
                }
                let mut sum = PowerSeries::zero(order);
                for e in expect.values() {
                    sum.add_product(e, e);
                }
                sum.ln()
            }
            ClusterObservable::LargeRenyi => {
                let labelled = mask_of(&|l| l > 0);
                let mut dist: HashMap<u64, PowerSeries> = HashMap::new();
                for (&x, a) in &gs.amplitudes {
                    dist.entry(x & labelled)
                        .or_insert_with(|| PowerSeries::zero(order))
                        .add_product(a, a);
                }
                let mut sum = PowerSeries::zero(order);
                for p in dist.values() {
                    sum.add_product(p, p);
                }
                sum.ln()
            }
            ClusterObservable::WilsonLog => {
                let inside = mask_of(&|l| l > 0);
                let mut w = PowerSeries::zero(order);
                for (&x, a) in &gs.amplitudes {
                    let sq = a.mul(a);
                    if (x & inside).count_ones() % 2 == 0 {
                        w.add_assign(&sq);
                    } else {
                        w.sub_assign(&sq);
                    }
                }
                w.ln().scaled(&-BigRational::one())
            }
        }
    }
}

/// Rational helper used by tests and series assembly.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// True if every amplitude is zero at order 0 except the reference state.
pub fn is_reference_at_zero(gs: &GroundState) -> bool {
    gs.amplitudes.iter().all(|(&x, a)| {
        if x == 0 {
            a.coeff(0).is_one()
        } else {
            a.coeff(0).is_zero()
        }
    })
}
