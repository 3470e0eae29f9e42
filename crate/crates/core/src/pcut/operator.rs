//! Symbolic spin-½ operator algebra for the PCUT generators.
//!
//! Each site carries one of four local symbols relative to the excitation
//! convention: an excitation is A^z = −1 (small field) or σ^z = −1 (large
//! field), `Raise` creates one, `Lower` removes one, and the projectors select
//! the ground or excited local state. σˣ = Raise + Lower on every site.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Edge, EdgeDir, Star, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LocalOp {
    Raise,
    Lower,
    ProjGround,
    ProjExcited,
}

impl LocalOp {
    /// Product `self · rhs` on one site, `None` if it vanishes.
    pub fn times(self, rhs: LocalOp) -> Option<LocalOp> {
        use LocalOp::*;
        match (self, rhs) {
            (Raise, Lower) => Some(ProjExcited),
            (Lower, Raise) => Some(ProjGround),
            (Raise, ProjGround) | (ProjExcited, Raise) => Some(Raise),
            (Lower, ProjExcited) | (ProjGround, Lower) => Some(Lower),
            (ProjGround, ProjGround) => Some(ProjGround),
            (ProjExcited, ProjExcited) => Some(ProjExcited),
            _ => None,
        }
    }

    pub fn dagger(self) -> LocalOp {
        match self {
            LocalOp::Raise => LocalOp::Lower,
            LocalOp::Lower => LocalOp::Raise,
            p => p,
        }
    }

    fn grading(self) -> i32 {
        match self {
            LocalOp::Raise => 1,
            LocalOp::Lower => -1,
            _ => 0,
        }
    }

    /// Action on a local basis state (`true` = excited).
    pub fn apply(self, excited: bool) -> Option<bool> {
        match (self, excited) {
            (LocalOp::Raise, false) => Some(true),
            (LocalOp::Lower, true) => Some(false),
            (LocalOp::ProjGround, false) => Some(false),
            (LocalOp::ProjExcited, true) => Some(true),
            _ => None,
        }
    }
}

/// Ordered site → symbol map; the key of an operator sum.
pub type SiteMap = BTreeMap<usize, LocalOp>;

/// A product of local symbols with an exact coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coefficient: BigRational,
    pub sites: SiteMap,
}

impl Monomial {
    pub fn new(coefficient: BigRational, sites: SiteMap) -> Self {
        Self { coefficient, sites }
    }

    /// Change in excitation number.
    pub fn grading(&self) -> i32 {
        self.sites.values().map(|o| o.grading()).sum()
    }

    /// `self · rhs`, or `None` if some site product vanishes.
    pub fn times(&self, rhs: &Monomial) -> Option<Monomial> {
        let mut sites = self.sites.clone();
        for (&s, &op) in &rhs.sites {
            match sites.get(&s) {
                Some(&left) => {
                    sites.insert(s, left.times(op)?);
                }
                None => {
                    sites.insert(s, op);
                }
            }
        }
        let out = Monomial::new(&self.coefficient * &rhs.coefficient, sites);
        debug_assert_eq!(out.grading(), self.grading() + rhs.grading());
        Some(out)
    }

    pub fn dagger(&self) -> Monomial {
        Monomial::new(
            self.coefficient.clone(),
            self.sites.iter().map(|(&s, o)| (s, o.dagger())).collect(),
        )
    }

    /// Action on a basis state given as an excitation bitmask.
    pub fn apply(&self, state: u64) -> Option<u64> {
        let mut out = state;
        for (&s, op) in &self.sites {
            let bit = 1u64 << s;
            let now = op.apply(state & bit != 0)?;
            if now {
                out |= bit;
            } else {
                out &= !bit;
            }
        }
        Some(out)
    }
}

/// A linear combination of monomials in canonical form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OperatorSum {
    terms: BTreeMap<SiteMap, BigRational>,
}

impl OperatorSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&mut self, m: Monomial) {
        if m.coefficient.is_zero() {
            return;
        }
        let slot = self
            .terms
            .entry(m.sites.clone())
            .or_insert_with(BigRational::zero);
        *slot += m.coefficient;
        if slot.is_zero() {
            self.terms.remove(&m.sites);
        }
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.terms
            .iter()
            .map(|(s, c)| Monomial::new(c.clone(), s.clone()))
    }

    pub fn scaled(&self, s: &BigRational) -> Self {
        let mut out = Self::zero();
        for m in self.monomials() {
            out.add(Monomial::new(m.coefficient * s, m.sites));
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for m in other.monomials() {
            out.add(m);
        }
        out
    }

    pub fn times(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for a in self.monomials() {
            for b in other.monomials() {
                if let Some(p) = a.times(&b) {
                    out.add(p);
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.times(other)
            .plus(&other.times(self).scaled(&-BigRational::one()))
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zero();
        for m in self.monomials() {
            out.add(m.dagger());
        }
        out
    }

    /// Gradings present among the monomials.
    pub fn gradings(&self) -> Vec<i32> {
        let mut g: Vec<i32> = self.monomials().map(|m| m.grading()).collect();
        g.sort_unstable();
        g.dedup();
        g
    }
}

/// Field regime of the expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// λ ≪ 1: excitations are flipped stars, perturbation is −λ Σ AˣAˣ.
    SmallField,
    /// λ ≫ 1: excitations are flipped spins, perturbation is −μ Σ A_s, μ = 1/λ.
    LargeField,
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small" | "small_field" => Ok(Regime::SmallField),
            "large" | "large_field" => Ok(Regime::LargeField),
            other => Err(Error::InvalidConfig(format!("unknown regime '{other}'"))),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::SmallField => "small",
            Regime::LargeField => "large",
        })
    }
}

/// What a generator site stands for on the lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SiteLabel {
    Star(Star),
    Spin(Edge),
}

impl SiteLabel {
    /// (row, col, kind) used for translation normalization.
    pub fn coords(&self) -> (usize, usize, u8) {
        match *self {
            SiteLabel::Star(s) => (s.row, s.col, 0),
            SiteLabel::Spin(e) => (
                e.row,
                e.col,
                if e.dir == EdgeDir::Horizontal { 1 } else { 2 },
            ),
        }
    }
}

/// Q and the graded perturbation T_n on a concrete N×N torus.
///
/// Every physical term is −(parameter)·Π σˣ over its sites; the parameter is
/// kept symbolic, so the monomial coefficients here are the integer −1.
#[derive(Clone, Debug)]
pub struct Generators {
    pub regime: Regime,
    pub variant: Variant,
    pub n: usize,
    pub sites: Vec<SiteLabel>,
    /// Site indices of each physical term (bond or star).
    pub terms: Vec<Vec<usize>>,
}

/// Builds the generators; requires N ≥ 4·order so no term set of the
/// requested order wraps around the torus.
pub fn build_generators(
    regime: Regime,
    variant: Variant,
    n: usize,
    order: usize,
) -> Result<Generators> {
    let need = (4 * order).max(4);
    if n < need {
        return Err(Error::LatticeTooSmall { n, order, need });
    }
    let star_index = |r: usize, c: usize| (r % n) * n + (c % n);
    let mut sites = Vec::new();
    let mut terms = Vec::new();
    match regime {
        Regime::SmallField => {
            for r in 0..n {
                for c in 0..n {
                    sites.push(SiteLabel::Star(Star::new(r, c)));
                }
            }
            for r in 0..n {
                for c in 0..n {
                    terms.push(vec![star_index(r, c), star_index(r, c + 1)]);
                    if variant == Variant::Isotropic2d {
                        terms.push(vec![star_index(r, c), star_index(r + 1, c)]);
                    }
                }
            }
        }
        Regime::LargeField => {
            // Horizontal spins first, then vertical ones (2D only). In the
            // quasi-1D model the vertical spins carry no field and are frozen.
            for r in 0..n {
                for c in 0..n {
                    sites.push(SiteLabel::Spin(Edge::horizontal(r, c)));
                }
            }
            if variant == Variant::Isotropic2d {
                for r in 0..n {
                    for c in 0..n {
                        sites.push(SiteLabel::Spin(Edge::vertical(r, c)));
                    }
                }
            }
            let h = |r: usize, c: usize| (r % n) * n + (c % n);
            let v = |r: usize, c: usize| n * n + (r % n) * n + (c % n);
            for r in 0..n {
                for c in 0..n {
                    let mut t = vec![h(r, c + n - 1), h(r, c)];
                    if variant == Variant::Isotropic2d {
                        t.push(v(r + n - 1, c));
                        t.push(v(r, c));
                    }
                    t.sort_unstable();
                    terms.push(t);
                }
            }
        }
    }
    Ok(Generators {
        regime,
        variant,
        n,
        sites,
        terms,
    })
}

impl Generators {
    /// Index of a lattice site in `sites`, if the regime has it.
    pub fn site_of(&self, label: SiteLabel) -> Option<usize> {
        let n = self.n;
        match (self.regime, label) {
            (Regime::SmallField, SiteLabel::Star(s)) => Some((s.row % n) * n + s.col % n),
            (Regime::LargeField, SiteLabel::Spin(e)) => match e.dir {
                EdgeDir::Horizontal => Some((e.row % n) * n + e.col % n),
                EdgeDir::Vertical if self.variant == Variant::Isotropic2d => {
                    Some(n * n + (e.row % n) * n + e.col % n)
                }
                EdgeDir::Vertical => None,
            },
            _ => None,
        }
    }

    /// Letters (gradings) that occur in the perturbation.
    pub fn letters(&self) -> Vec<i8> {
        let k = self.terms.first().map_or(0, |t| t.len()) as i8;
        (0..=k).map(|j| k - 2 * j).collect()
    }

    /// Expansion of one physical term −Π σˣ into graded monomials.
    pub fn term_monomials(&self, t: usize) -> Vec<Monomial> {
        let sites = &self.terms[t];
        (0..1u32 << sites.len())
            .map(|mask| {
                let map = sites
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| {
                        (
                            s,
                            if mask >> i & 1 == 1 {
                                LocalOp::Lower
                            } else {
                                LocalOp::Raise
                            },
                        )
                    })
                    .collect();
                Monomial::new(-BigRational::one(), map)
            })
            .collect()
    }

    /// T_n as an operator sum (unit parameter).
    pub fn component(&self, grading: i32) -> OperatorSum {
        let mut out = OperatorSum::zero();
        for t in 0..self.terms.len() {
            for m in self.term_monomials(t) {
                if m.grading() == grading {
                    out.add(m);
                }
            }
        }
        out
    }

    /// Q = Σ_sites P_excited.
    pub fn q(&self) -> OperatorSum {
        let mut out = OperatorSum::zero();
        for s in 0..self.sites.len() {
            out.add(Monomial::new(
                BigRational::one(),
                [(s, LocalOp::ProjExcited)].into_iter().collect(),
            ));
        }
        out
    }

    /// Verifies [Q, T_n] = n·T_n and T_n† = T_{−n} symbolically for every letter.
    pub fn check_gradings(&self) -> Result<()> {
        let q = self.q();
        for n in self.letters() {
            let t = self.component(n as i32);
            if t.is_zero() {
                return Err(Error::InvalidConfig(format!("T_{n} is empty")));
            }
            let lhs = q.commutator(&t);
            let rhs = t.scaled(&BigRational::from_integer((n as i64).into()));
            if lhs != rhs {
                return Err(Error::Numerical(format!("[Q, T_{n}] != {n} T_{n}")));
            }
            if t.dagger() != self.component(-(n as i32)) {
                return Err(Error::Numerical(format!("T_{n}† != T_{}", -n)));
            }
        }
        Ok(())
    }
}
