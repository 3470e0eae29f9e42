//! Exact solution of one periodic transverse-field Ising chain
//! H = −Σ_l (A_l^z + λ A_l^x A_{l−1}^x) by free fermions.
//!
//! Strings of quasi-spin operators are rewritten as products of the Majorana
//! operators a_l = c_l† + c_l and b_l = c_l† − c_l (a² = 1, b² = −1), using
//! A_l^z = a_l b_l and A_l^x = (∏_{j<l} a_j b_j) a_l. Expectation values in the
//! quasi-particle vacuum then follow from Wick's theorem as Pfaffians.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::pfaffian::pfaffian_unchecked;

/// Smallest quasi-particle energy accepted at a finite antiperiodic momentum.
pub const MIN_GAP: f64 = 1e-12;

/// Bogoliubov data and two-point correlators of the chain ground state in
/// the even-parity (antiperiodic fermion) sector.
#[derive(Clone, Debug)]
pub struct ChainGroundState {
    n: usize,
    lambda: f64,
    pub momenta: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub big_lambda: Vec<f64>,
    pub theta: Vec<f64>,
    /// Kernels indexed by separation r = l − l′ + (N − 1).
    cdag_c: Vec<f64>,
    c_cdag: Vec<f64>,
    c_c: Vec<f64>,
    cdag_cdag: Vec<f64>,
}

/// Solves the chain of length `n` at field `lambda`.
pub fn solve_chain(n: usize, lambda: f64) -> Result<ChainGroundState> {
    ChainGroundState::new(n, lambda)
}

impl ChainGroundState {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidLattice(format!(
                "chain needs N >= 2, got {n}"
            )));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidLattice(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        let momenta: Vec<f64> = (1..=n)
            .map(|m| PI * (2 * m - 1) as f64 / n as f64)
            .collect();
        let epsilon: Vec<f64> = momenta.iter().map(|k| 1.0 - lambda * k.cos()).collect();
        let big_lambda: Vec<f64> = momenta
            .iter()
            .zip(&epsilon)
            .map(|(k, e)| e.hypot(lambda * k.sin()))
            .collect();
        if let Some(min) = big_lambda.iter().copied().reduce(f64::min) {
            if min < MIN_GAP {
                return Err(Error::InvalidLattice(format!(
                    "gapless momentum at N={n}, lambda={lambda}"
                )));
            }
        }
        let theta: Vec<f64> = momenta
            .iter()
            .zip(&epsilon)
            .zip(&big_lambda)
            .map(|((k, e), big)| (lambda * k.sin()).atan2(e + big))
            .collect();

        let span = 2 * n - 1;
        let (mut cdag_c, mut c_cdag, mut c_c) = (vec![0.0; span], vec![0.0; span], vec![0.0; span]);
        for idx in 0..span {
            let r = idx as f64 - (n - 1) as f64;
            let (mut s2, mut c2, mut sc) = (0.0, 0.0, 0.0);
            for (k, t) in momenta.iter().zip(&theta) {
                let (cos_kr, sin_kr) = ((k * r).cos(), (k * r).sin());
                s2 += cos_kr * t.sin().powi(2);
                c2 += cos_kr * t.cos().powi(2);
                sc += sin_kr * t.sin() * t.cos();
            }
            cdag_c[idx] = s2 / n as f64;
            c_cdag[idx] = c2 / n as f64;
            c_c[idx] = sc / n as f64;
        }
        let cdag_cdag = c_c.iter().map(|v| -v).collect();
        Ok(Self {
            n,
            lambda,
            momenta,
            epsilon,
            big_lambda,
            theta,
            cdag_c,
            c_cdag,
            c_c,
            cdag_cdag,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Ground-state energy −Σ_k Λ_k.
    pub fn energy(&self) -> f64 {
        -self.big_lambda.iter().sum::<f64>()
    }

    fn index(&self, l: usize, lp: usize) -> usize {
        l + self.n - 1 - lp
    }

    /// ⟨c_l† c_l′⟩
    pub fn cdag_c(&self, l: usize, lp: usize) -> f64 {
        self.cdag_c[self.index(l, lp)]
    }

    /// ⟨c_l c_l′†⟩
    pub fn c_cdag(&self, l: usize, lp: usize) -> f64 {
        self.c_cdag[self.index(l, lp)]
    }

    /// ⟨c_l c_l′⟩
    pub fn c_c(&self, l: usize, lp: usize) -> f64 {
        self.c_c[self.index(l, lp)]
    }

    /// ⟨c_l† c_l′†⟩
    pub fn cdag_cdag(&self, l: usize, lp: usize) -> f64 {
        self.cdag_cdag[self.index(l, lp)]
    }

    /// ⟨γ γ′⟩ for two Majorana operators, assembled from the fermion kernels.
    pub fn majorana_pair(&self, x: Majorana, y: Majorana) -> f64 {
        let (sx, sy) = (x.kind.sign(), y.kind.sign());
        let (l, lp) = (x.site, y.site);
        self.cdag_cdag(l, lp)
            + sy * self.cdag_c(l, lp)
            + sx * self.c_cdag(l, lp)
            + sx * sy * self.c_c(l, lp)
    }

    /// ⟨A_l^z⟩ = (1/N) Σ_k cos 2θ_k.
    pub fn magnetization(&self) -> f64 {
        self.theta.iter().map(|t| (2.0 * t).cos()).sum::<f64>() / self.n as f64
    }

    /// Correlator table as CSV: separation and the four kernels.
    pub fn correlator_csv(&self) -> String {
        let mut out = String::from("separation,cdag_c,c_cdag,c_c,cdag_cdag\n");
        for idx in 0..2 * self.n - 1 {
            let r = idx as i64 - (self.n as i64 - 1);
            let _ = writeln!(
                out,
                "{r},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.cdag_c[idx], self.c_cdag[idx], self.c_c[idx], self.cdag_cdag[idx]
            );
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MajoranaKind {
    /// a = c† + c
    A,
    /// b = c† − c
    B,
}

impl MajoranaKind {
    fn sign(self) -> f64 {
        match self {
            MajoranaKind::A => 1.0,
            MajoranaKind::B => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Majorana {
    pub site: usize,
    pub kind: MajoranaKind,
}

impl Majorana {
    pub fn a(site: usize) -> Self {
        Self {
            site,
            kind: MajoranaKind::A,
        }
    }

    pub fn b(site: usize) -> Self {
        Self {
            site,
            kind: MajoranaKind::B,
        }
    }
}

/// Quasi-spin factor of a string on one chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StringFactor {
    Z(usize),
    X(usize),
    /// A_l^x A_l′^x.
    XPair(usize, usize),
}

/// A signed, ordered product of distinct Majorana operators.
#[derive(Clone, Debug, PartialEq)]
pub struct MajoranaWord {
    pub sign: f64,
    pub ops: Vec<Majorana>,
}

impl MajoranaWord {
    /// Rewrites a product of quasi-spin factors, sorting the Majoranas by
    /// (site, kind) and cancelling squares.
    pub fn from_factors(factors: &[StringFactor]) -> Self {
        let mut raw = Vec::new();
        let push_x = |raw: &mut Vec<Majorana>, l: usize| {
            for j in 0..l {
                raw.push(Majorana::a(j));
                raw.push(Majorana::b(j));
            }
            raw.push(Majorana::a(l));
        };
        for &f in factors {
            match f {
                StringFactor::Z(l) => {
                    raw.push(Majorana::a(l));
                    raw.push(Majorana::b(l));
                }
                StringFactor::X(l) => push_x(&mut raw, l),
                StringFactor::XPair(l, lp) => {
                    push_x(&mut raw, l);
                    push_x(&mut raw, lp);
                }
            }
        }
        Self::canonical(raw)
    }

    /// Sorts an arbitrary Majorana product into canonical order.
    pub fn canonical(mut raw: Vec<Majorana>) -> Self {
        let mut sign = 1.0;
        // Insertion sort; every transposition of distinct operators flips the sign.
        for i in 1..raw.len() {
            let mut j = i;
            while j > 0 && raw[j - 1] > raw[j] {
                raw.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
        }
        let mut ops = Vec::with_capacity(raw.len());
        let mut i = 0;
        while i < raw.len() {
            if i + 1 < raw.len() && raw[i] == raw[i + 1] {
                if raw[i].kind == MajoranaKind::B {
                    sign = -sign;
                }
                i += 2;
            } else {
                ops.push(raw[i]);
                i += 1;
            }
        }
        Self { sign, ops }
    }
}

/// Antisymmetric matrix of pairwise contractions M_ij = ⟨γ_i γ_j⟩, i < j.
#[derive(Clone, Debug)]
pub struct MajoranaCovariance {
    pub matrix: DMatrix<f64>,
}

impl MajoranaCovariance {
    pub fn new(state: &ChainGroundState, ops: &[Majorana]) -> Self {
        let m = ops.len();
        let mut matrix = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i + 1..m {
                let v = state.majorana_pair(ops[i], ops[j]);
                matrix[(i, j)] = v;
                matrix[(j, i)] = -v;
            }
        }
        Self { matrix }
    }

    pub fn pfaffian(&self) -> f64 {
        let pf = pfaffian_unchecked(self.matrix.clone());
        #[cfg(debug_assertions)]
        if self.matrix.nrows() <= 24 {
            let det = self.matrix.clone().determinant();
            debug_assert!(
                (pf * pf - det).abs() <= 1e-9 * det.abs().max(1e-12),
                "Pf² = {} but det = {det}",
                pf * pf
            );
        }
        pf
    }
}

/// Result of a string expectation; odd strings vanish by fermion parity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StringValue {
    Value(f64),
    ParityZero,
}

impl StringValue {
    pub fn value(self) -> f64 {
        match self {
            StringValue::Value(v) => v,
            StringValue::ParityZero => 0.0,
        }
    }
}

/// ⟨∏ factors⟩ in the chain ground state. Sites must be below N.
pub fn string_expectation(
    state: &ChainGroundState,
    factors: &[StringFactor],
) -> Result<StringValue> {
    let mut x_count = 0;
    for &f in factors {
        match f {
            StringFactor::Z(l) | StringFactor::X(l) if l >= state.n() => {
                return Err(Error::InvalidConfig(format!(
                    "site {l} outside chain of {}",
                    state.n()
                )));
            }
            StringFactor::XPair(l, lp) if l.max(lp) >= state.n() => {
                return Err(Error::InvalidConfig(format!(
                    "site {} outside chain of {}",
                    l.max(lp),
                    state.n()
                )));
            }
            StringFactor::X(_) => x_count += 1,
            _ => {}
        }
    }
    if x_count % 2 == 1 {
        return Ok(StringValue::ParityZero);
    }
    Ok(StringValue::Value(word_expectation(
        state,
        &MajoranaWord::from_factors(factors),
    )))
}

/// Expectation of a canonical Majorana word.
pub fn word_expectation(state: &ChainGroundState, word: &MajoranaWord) -> f64 {
    if word.ops.is_empty() {
        return word.sign;
    }
    if word.ops.len() % 2 == 1 {
        return 0.0;
    }
    word.sign * MajoranaCovariance::new(state, &word.ops).pfaffian()
}

/// ⟨∏_{l ∈ sites} A_l^x⟩ for an even set of distinct sites.
pub fn x_string(state: &ChainGroundState, sites: &[usize]) -> f64 {
    if sites.len() % 2 == 1 {
        return 0.0;
    }
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    let mut ops = Vec::new();
    for pair in sorted.chunks(2) {
        let (l, lp) = (pair[0], pair[1]);
        // A_l^x A_l′^x = b_l (∏_{l<j<l′} a_j b_j) a_l′ for l < l′.
        ops.push(Majorana::b(l));
        for j in l + 1..lp {
            ops.push(Majorana::a(j));
            ops.push(Majorana::b(j));
        }
        ops.push(Majorana::a(lp));
    }
    word_expectation(state, &MajoranaWord { sign: 1.0, ops })
}

/// ⟨∏_{l=0}^{D−1} A_l^z⟩, the single-chain factor of the Wilson loop.
pub fn z_string(state: &ChainGroundState, length: usize) -> f64 {
    let ops = (0..length.min(state.n()))
        .flat_map(|l| [Majorana::a(l), Majorana::b(l)])
        .collect();
    word_expectation(state, &MajoranaWord { sign: 1.0, ops })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_is_polarized() {
        let s = solve_chain(8, 0.0).unwrap();
        assert!(s.big_lambda.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!(s.theta.iter().all(|&t| t == 0.0));
        assert!((s.magnetization() - 1.0).abs() < 1e-15);
        assert!((z_string(&s, 5) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn critical_point_at_pi() {
        let s = solve_chain(3, 1.0).unwrap();
        let idx = s
            .momenta
            .iter()
            .position(|k| (k - PI).abs() < 1e-12)
            .unwrap();
        assert!((s.epsilon[idx] - 2.0).abs() < 1e-12);
        assert!((s.big_lambda[idx] - 2.0).abs() < 1e-12);
        assert!(s.theta[idx].abs() < 1e-12);
    }

    #[test]
    fn anticommutator_at_zero_separation() {
        let s = solve_chain(10, 0.7).unwrap();
        for l in 0..10 {
            assert!((s.cdag_c(l, l) + s.c_cdag(l, l) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn canonical_word_cancels_squares() {
        let w = MajoranaWord::canonical(vec![Majorana::b(1), Majorana::a(0), Majorana::b(1)]);
        // b1 a0 b1 = −a0 b1 b1 = a0
        assert_eq!(w.ops, vec![Majorana::a(0)]);
        assert_eq!(w.sign, 1.0);
        let w = MajoranaWord::from_factors(&[StringFactor::XPair(2, 5), StringFactor::XPair(2, 5)]);
        assert!(w.ops.is_empty());
        assert_eq!(w.sign, 1.0);
    }

    #[test]
    fn odd_string_is_parity_zero() {
        let s = solve_chain(6, 0.4).unwrap();
        let v = string_expectation(&s, &[StringFactor::X(1), StringFactor::Z(3)]).unwrap();
        assert_eq!(v, StringValue::ParityZero);
    }

    #[test]
    fn x_string_matches_generic_path() {
        let s = solve_chain(10, 0.8).unwrap();
        let a = x_string(&s, &[1, 4, 6, 9]);
        let b = string_expectation(&s, &[StringFactor::XPair(1, 4), StringFactor::XPair(6, 9)])
            .unwrap()
            .value();
        assert!((a - b).abs() < 1e-13);
    }
}
