//! Model-independent PCUT flow over words of graded operators.
//!
//! For H = 2Q + Σ_n T_n with [Q, T_n] = n·T_n, the flowed Hamiltonian and the
//! unitary are sums over words w = (n₁, …, n_k) of products
//! T(w) = T_{n₁}⋯T_{n_k}:
//!
//! H(l) = 2Q + Σ F(l; w) T(w),   U(l) = Σ G(l; w) T(w),
//!
//! with ∂U = −U·η and η = Σ sgn(M(w)) F(w) T(w), M(w) = Σ nᵢ. The coefficient
//! functions depend only on the letter set, never on the lattice.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::coeff::CoefficientFunction;
use crate::error::{Error, Result};

/// A word of gradings, applied right to left.
pub type Word = Vec<i8>;

/// Total grading M(w).
pub fn grading(w: &[i8]) -> i32 {
    w.iter().map(|&n| n as i32).sum()
}

/// Hermitian conjugate word: T(w)† = T(rev(−w)).
pub fn conjugate(w: &[i8]) -> Word {
    w.iter().rev().map(|&n| -n).collect()
}

fn sign(m: i32) -> i64 {
    m.signum() as i64
}

/// Every word of length `len` over `letters`, in lexicographic order of indices.
pub fn words(letters: &[i8], len: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                letters.iter().map(move |&n| {
                    let mut v = w.clone();
                    v.push(n);
                    v
                })
            })
            .collect();
    }
    out
}

/// Coefficient functions F and G up to a given word length, with their l → ∞ limits.
#[derive(Clone, Debug)]
pub struct FlowExpansion {
    letters: Vec<i8>,
    order: usize,
    f: HashMap<Word, CoefficientFunction>,
    g: HashMap<Word, CoefficientFunction>,
    f_limit: HashMap<Word, BigRational>,
    g_limit: HashMap<Word, BigRational>,
}

/// Integrates the flow for all words up to length `order`.
///
/// Fails with [`Error::NonVanishingLimit`] if any F(w) with M(w) ≠ 0 survives at
/// l → ∞, or if a coefficient grows without bound.
pub fn flow_expand(letters: &[i8], order: usize) -> Result<FlowExpansion> {
    let mut letters = letters.to_vec();
    letters.sort_unstable();
    letters.dedup();
    let mut f: HashMap<Word, CoefficientFunction> = HashMap::new();
    let mut g: HashMap<Word, CoefficientFunction> = HashMap::new();
    g.insert(
        Vec::new(),
        CoefficientFunction::constant(BigRational::one()),
    );

    for len in 1..=order {
        for w in words(&letters, len) {
            let m = grading(&w);
            let fw = if len == 1 {
                CoefficientFunction::term(BigRational::one(), 0, 2 * m.unsigned_abs())
            } else {
                let mut src = CoefficientFunction::zero();
                for i in 1..len {
                    let s = sign(grading(&w[..i])) - sign(grading(&w[i..]));
                    if s == 0 {
                        continue;
                    }
                    if let (Some(a), Some(b)) = (f.get(&w[..i]), f.get(&w[i..])) {
                        src.add_assign_scaled(&a.mul(b), &BigRational::from_integer(s.into()));
                    }
                }
                CoefficientFunction::integrate_decay(2 * m.unsigned_abs(), &src)
            };
            if !fw.is_zero() {
                f.insert(w, fw);
            }
        }
        for w in words(&letters, len) {
            let mut src = CoefficientFunction::zero();
            for i in 0..len {
                let s = sign(grading(&w[i..]));
                if s == 0 {
                    continue;
                }
                if let (Some(a), Some(b)) = (g.get(&w[..i]), f.get(&w[i..])) {
                    src.add_assign_scaled(&a.mul(b), &BigRational::from_integer((-s).into()));
                }
            }
            let gw = CoefficientFunction::integrate_decay(0, &src);
            if !gw.is_zero() {
                g.insert(w, gw);
            }
        }
    }

    let word_name = |w: &Word| format!("{w:?}");
    let mut f_limit = HashMap::new();
    for (w, fw) in &f {
        let lim = fw.limit().ok_or_else(|| Error::NonVanishingLimit {
            word: word_name(w),
            order: w.len(),
        })?;
        if grading(w) != 0 && !lim.is_zero() {
            return Err(Error::NonVanishingLimit {
                word: word_name(w),
                order: w.len(),
            });
        }
        if !lim.is_zero() {
            f_limit.insert(w.clone(), lim);
        }
    }
    let mut g_limit = HashMap::new();
    for (w, gw) in &g {
        let lim = gw.limit().ok_or_else(|| Error::NonVanishingLimit {
            word: word_name(w),
            order: w.len(),
        })?;
        if !lim.is_zero() {
            g_limit.insert(w.clone(), lim);
        }
    }
    Ok(FlowExpansion {
        letters,
        order,
        f,
        g,
        f_limit,
        g_limit,
    })
}

impl FlowExpansion {
    pub fn letters(&self) -> &[i8] {
        &self.letters
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// F(l; w) in the flowed Hamiltonian.
    pub fn effective(&self, w: &[i8]) -> Option<&CoefficientFunction> {
        self.f.get(w)
    }

    /// G(l; w) in the unitary.
    pub fn unitary(&self, w: &[i8]) -> Option<&CoefficientFunction> {
        self.g.get(w)
    }

    /// F(∞; w), the coefficient of T(w) in H′.
    pub fn effective_limit(&self, w: &[i8]) -> Option<&BigRational> {
        self.f_limit.get(w)
    }

    /// G(∞; w), the coefficient of T(w) in U.
    pub fn unitary_limit(&self, w: &[i8]) -> Option<&BigRational> {
        self.g_limit.get(w)
    }

    /// Words of length `k` with non-zero G(∞), sorted.
    pub fn unitary_component(&self, k: usize) -> Vec<(Word, BigRational)> {
        let mut v: Vec<_> = self
            .g_limit
            .iter()
            .filter(|(w, _)| w.len() == k)
            .map(|(w, c)| (w.clone(), c.clone()))
            .collect();
        v.sort();
        v
    }

    /// Words of length `k` with non-zero F(∞), sorted.
    pub fn effective_component(&self, k: usize) -> Vec<(Word, BigRational)> {
        let mut v: Vec<_> = self
            .f_limit
            .iter()
            .filter(|(w, _)| w.len() == k)
            .map(|(w, c)| (w.clone(), c.clone()))
            .collect();
        v.sort();
        v
    }

    /// Checks U†U = 1 in the free algebra of the T_n: for every word u with
    /// 1 ≤ |u| ≤ order, Σ_{u = ab} G(rev(−a)) G(b) = 0. Returns the number of
    /// identities checked.
    pub fn check_unitarity(&self) -> Result<usize> {
        let zero = BigRational::zero();
        let mut checked = 0;
        for len in 1..=self.order {
            for u in words(&self.letters, len) {
                let mut acc = BigRational::zero();
                for i in 0..=len {
                    let a = self.g_limit.get(&conjugate(&u[..i])).unwrap_or(&zero);
                    let b = self.g_limit.get(&u[i..]).unwrap_or(&zero);
                    acc += a * b;
                }
                if !acc.is_zero() {
                    return Err(Error::Numerical(format!(
                        "unitarity violated on word {u:?}: {acc}"
                    )));
                }
                checked += 1;
            }
        }
        Ok(checked)
    }

    /// Checks [Q, H′] = 0: only grading-zero words survive in H′.
    pub fn check_block_diagonal(&self) -> Result<usize> {
        for (w, c) in &self.f_limit {
            if grading(w) != 0 {
                return Err(Error::NonVanishingLimit {
                    word: format!("{w:?} -> {c}"),
                    order: w.len(),
                });
            }
        }
        Ok(self.f_limit.len())
    }
}
