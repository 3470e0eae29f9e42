//! Flow-parameter dependence of PCUT coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Σ c · l^p · e^(−q·l) with exact rational c, keyed by (p, q).
///
/// The canonical form never stores zero coefficients, so two functions are
/// equal iff their maps are equal.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoefficientFunction {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl CoefficientFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The constant function c.
    pub fn constant(c: BigRational) -> Self {
        Self::term(c, 0, 0)
    }

    /// c · l^p · e^(−q·l).
    pub fn term(c: BigRational, p: u32, q: u32) -> Self {
        let mut f = Self::zero();
        f.add_term(c, p, q);
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &BigRational)> {
        self.terms.iter().map(|(&(p, q), c)| (p, q, c))
    }

    fn add_term(&mut self, c: BigRational, p: u32, q: u32) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((p, q)).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(p, q));
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Self, s: &BigRational) {
        for (&(p, q), c) in &other.terms {
            self.add_term(c * s, p, q);
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(p1, q1), c1) in &self.terms {
            for (&(p2, q2), c2) in &other.terms {
                out.add_term(c1 * c2, p1 + p2, q1 + q2);
            }
        }
        out
    }

    pub fn value_at_zero(&self) -> BigRational {
        self.terms
            .iter()
            .filter(|(&(p, _), _)| p == 0)
            .fold(BigRational::zero(), |acc, (_, c)| acc + c)
    }

    /// lim_{l→∞}; `None` when a non-decaying term grows polynomially.
    pub fn limit(&self) -> Option<BigRational> {
        let mut out = BigRational::zero();
        for (&(p, q), c) in &self.terms {
            if q == 0 {
                if p > 0 {
                    return None;
                }
                out += c;
            }
        }
        Some(out)
    }

    /// Solves f′ = −a·f + source with f(0) = 0 in closed form.
    ///
    /// Each source term c·t^p·e^(−q t) contributes e^(−a l)·∫₀ˡ t^p e^((a−q)t) dt.
    pub fn integrate_decay(a: u32, source: &Self) -> Self {
        let mut out = Self::zero();
        for (&(p, q), c) in &source.terms {
            let b = a as i64 - q as i64;
            if b == 0 {
                let k = BigRational::from_integer(BigInt::from(p + 1));
                out.add_term(c / k, p + 1, a);
                continue;
            }
            // ∫₀ˡ t^p e^(bt) dt = e^(bl) Σ_j (−1)^(p−j) p!/(j! b^(p−j+1)) l^j − (−1)^p p!/b^(p+1)
            let bq = BigRational::from_integer(BigInt::from(b));
            let pf = factorial(p);
            for j in 0..=p {
                let sign = if (p - j) % 2 == 0 { 1 } else { -1 };
                let coef = BigRational::from_integer(BigInt::from(sign) * &pf / factorial(j))
                    / pow(&bq, p - j + 1);
                out.add_term(c * coef, j, q);
            }
            let sign = if p % 2 == 0 { -1 } else { 1 };
            let tail = BigRational::from_integer(BigInt::from(sign) * &pf) / pow(&bq, p + 1);
            out.add_term(c * tail, 0, a);
        }
        out
    }

    /// Derivative with respect to l, used to check integrated solutions.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (&(p, q), c) in &self.terms {
            if p > 0 {
                out.add_term(c * BigRational::from_integer(BigInt::from(p)), p - 1, q);
            }
            if q > 0 {
                out.add_term(-c * BigRational::from_integer(BigInt::from(q)), p, q);
            }
        }
        out
    }

    /// Numerical value, for diagnostics only.
    pub fn eval(&self, l: f64) -> f64 {
        use num_traits::ToPrimitive;
        self.terms
            .iter()
            .map(|(&(p, q), c)| {
                c.to_f64().unwrap_or(f64::NAN) * l.powi(p as i32) * (-(q as f64) * l).exp()
            })
            .sum()
    }
}

impl fmt::Display for CoefficientFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (&(p, q), c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            write!(f, "{}", c.abs())?;
            if p > 0 {
                write!(f, "·l^{p}")?;
            }
            if q > 0 {
                write!(f, "·e^(-{q}l)")?;
            }
        }
        Ok(())
    }
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn pow(x: &BigRational, e: u32) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn check_solution(a: u32, source: &CoefficientFunction) {
        let f = CoefficientFunction::integrate_decay(a, source);
        assert!(f.value_at_zero().is_zero(), "f(0) = {}", f.value_at_zero());
        let mut residual = f.derivative();
        residual.add_assign_scaled(&f, &r(a as i64, 1));
        residual.add_assign_scaled(source, &r(-1, 1));
        assert!(
            residual.is_zero(),
            "residual {residual} for a={a}, source {source}"
        );
    }

    #[test]
    fn integration_satisfies_ode() {
        let mut s = CoefficientFunction::term(r(3, 2), 0, 4);
        s.add_assign_scaled(&CoefficientFunction::term(r(-1, 1), 2, 8), &r(1, 1));
        s.add_assign_scaled(&CoefficientFunction::term(r(5, 7), 1, 0), &r(1, 1));
        for a in [0, 2, 4, 8] {
            check_solution(a, &s);
        }
    }

    #[test]
    fn first_order_unitary_profile() {
        // G′ = −e^(−4l) gives −(1 − e^(−4l))/4.
        let g = CoefficientFunction::integrate_decay(0, &CoefficientFunction::term(r(-1, 1), 0, 4));
        assert_eq!(g.limit(), Some(r(-1, 4)));
        assert_eq!(g.to_string(), "-1/4 + 1/4·e^(-4l)");
    }

    #[test]
    fn polynomial_growth_has_no_limit() {
        assert_eq!(CoefficientFunction::term(r(1, 1), 1, 0).limit(), None);
        assert_eq!(
            CoefficientFunction::term(r(1, 1), 3, 2).limit(),
            Some(r(0, 1))
        );
    }
}
