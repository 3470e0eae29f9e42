//! Truncated power series with exact rational coefficients.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

/// Σ_{k ≤ order} c_k x^k; products drop every power above `order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<BigRational>,
}

impl PowerSeries {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![BigRational::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::monomial(order, 0, BigRational::one())
    }

    /// c·x^k (zero if k exceeds the order).
    pub fn monomial(order: usize, k: usize, c: BigRational) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &BigRational {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Lowest power with a non-zero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn add_assign(&mut self, rhs: &Self) {
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            if !b.is_zero() {
                *a += b;
            }
        }
    }

    pub fn sub_assign(&mut self, rhs: &Self) {
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            if !b.is_zero() {
                *a -= b;
            }
        }
    }

    pub fn add_at(&mut self, k: usize, c: &BigRational) {
        if k < self.coeffs.len() {
            self.coeffs[k] += c;
        }
    }

    pub fn scaled(&self, s: &BigRational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// self += a·b, truncated.
    pub fn add_product(&mut self, a: &Self, b: &Self) {
        let order = self.order();
        let (Some(va), Some(vb)) = (a.valuation(), b.valuation()) else {
            return;
        };
        for i in va..=order.saturating_sub(vb) {
            if a.coeffs[i].is_zero() {
                continue;
            }
            for j in vb..=order - i {
                if !b.coeffs[j].is_zero() {
                    self.coeffs[i + j] += &a.coeffs[i] * &b.coeffs[j];
                }
            }
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zero(self.order());
        out.add_product(self, rhs);
        out
    }

    /// ln(s) for s = 1 + u with u(0) = 0.
    pub fn ln(&self) -> Self {
        assert!(self.coeffs[0].is_one(), "ln needs constant term 1");
        let order = self.order();
        let mut u = self.clone();
        u.coeffs[0] = BigRational::zero();
        let mut out = Self::zero(order);
        let mut pow = u.clone();
        for j in 1..=order {
            if pow.is_zero() {
                break;
            }
            let c = BigRational::new(if j % 2 == 1 { 1 } else { -1 }.into(), (j as i64).into());
            out.add_assign(&pow.scaled(&c));
            pow = pow.mul(&u);
        }
        out
    }

    /// True if every odd coefficient vanishes.
    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(Zero::is_zero)
    }
}

impl fmt::Display for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})x^{k}")?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn log_of_geometric_series() {
        // ln(1/(1−x)) = Σ x^k / k
        let s = PowerSeries {
            coeffs: vec![r(1, 1); 7],
        };
        let l = s.ln();
        for k in 1..=6 {
            assert_eq!(l.coeff(k), &r(1, k as i64));
        }
    }

    #[test]
    fn truncated_product() {
        let a = PowerSeries {
            coeffs: vec![r(1, 1), r(2, 1), r(0, 1)],
        };
        let p = a.mul(&a);
        assert_eq!(p.coeffs(), &[r(1, 1), r(4, 1), r(4, 1)]);
    }
}
