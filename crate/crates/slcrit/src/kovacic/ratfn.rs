//! Rational functions over the exact rationals, reduced and den-monic.

use super::poly::RatPoly;
use crate::exact::ExactRatio;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RatFnError {
    #[error("division by the zero rational function")]
    DivisionByZero,
    #[error("poles are not all rational: irreducible denominator factor {0}")]
    IrrationalPoles(String),
    #[error("denominator constants too large to factor over the rationals")]
    FactoringOverflow,
}

/// Quotient of two coprime polynomials with monic denominator; the unique
/// canonical form, so `PartialEq` is semantic equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFn {
    num: RatPoly,
    den: RatPoly,
}

impl RatFn {
    pub fn new(num: RatPoly, den: RatPoly) -> Result<Self, RatFnError> {
        if den.is_zero() {
            return Err(RatFnError::DivisionByZero);
        }
        let g = num.gcd(&den);
        let (num, r1) = num.div_rem(&g);
        let (den, r2) = den.div_rem(&g);
        debug_assert!(r1.is_zero() && r2.is_zero());
        let lc = den.leading().unwrap().clone();
        Ok(RatFn {
            num: num.scale(&lc.recip()),
            den: den.monic(),
        })
    }

    pub fn from_poly(p: RatPoly) -> Self {
        RatFn { num: p, den: RatPoly::one() }
    }

    pub fn constant(c: ExactRatio) -> Self {
        Self::from_poly(RatPoly::constant(c))
    }

    pub fn zero() -> Self {
        Self::from_poly(RatPoly::zero())
    }

    pub fn num(&self) -> &RatPoly {
        &self.num
    }

    pub fn den(&self) -> &RatPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }

    pub fn recip(&self) -> Result<Self, RatFnError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, RatFnError> {
        Ok(self * &rhs.recip()?)
    }

    /// Integer power; negative exponents invert first (error on zero base).
    pub fn powi(&self, e: i32) -> Result<Self, RatFnError> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = Self::from_poly(RatPoly::one());
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    pub fn derivative(&self) -> Self {
        let num = &(&self.num.derivative() * &self.den)
            - &(&self.num * &self.den.derivative());
        Self::new(num, &self.den * &self.den).expect("nonzero denominator")
    }

    /// Value at a point, `None` on a pole.
    pub fn eval(&self, z: &ExactRatio) -> Option<ExactRatio> {
        let d = self.den.eval(z);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(z) / d)
        }
    }

    /// Order of vanishing at infinity: `deg(den) - deg(num)`; `None` for the
    /// zero function (infinite order).
    pub fn infinity_order(&self) -> Option<i64> {
        Some(self.den.degree()? as i64 - self.num.degree()? as i64)
    }

    /// Finite poles with multiplicities, ascending by location.
    pub fn poles(&self) -> Result<Vec<(ExactRatio, usize)>, RatFnError> {
        let (roots, rest) = self
            .den
            .rational_roots()
            .ok_or(RatFnError::FactoringOverflow)?;
        if rest.degree().is_some_and(|d| d >= 1) {
            return Err(RatFnError::IrrationalPoles(rest.to_string()));
        }
        Ok(roots)
    }

    /// Laurent coefficient of `(z-c)^{-j}` at a pole `c` of order `ord`,
    /// for `1 <= j <= ord`: differentiates the regularized function
    /// `(z-c)^ord * r` `ord-j` times and evaluates at `c`.
    pub fn laurent_coeff(&self, c: &ExactRatio, ord: usize, j: usize) -> ExactRatio {
        debug_assert!(1 <= j && j <= ord);
        let lin = RatPoly::new(vec![-c.clone(), ExactRatio::one()]);
        let mut g = self * &Self::from_poly(lin.pow(ord as u32));
        let derivs = ord - j;
        for _ in 0..derivs {
            g = g.derivative();
        }
        let mut fact = ExactRatio::one();
        for i in 1..=derivs {
            fact *= ExactRatio::from_integer(BigInt::from(i));
        }
        g.eval(c).expect("regularized function has no pole at c") / fact
    }

    /// Coefficient of `z^{-2}` in the expansion at infinity, for functions
    /// of infinity order exactly 2 (then it is `lc(num)/lc(den)`).
    pub fn infinity_z2_coeff(&self) -> ExactRatio {
        debug_assert_eq!(self.infinity_order(), Some(2));
        self.num.leading().unwrap() / self.den.leading().unwrap()
    }
}

impl Add for &RatFn {
    type Output = RatFn;
    fn add(self, rhs: &RatFn) -> RatFn {
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RatFn::new(num, &self.den * &rhs.den).expect("nonzero denominator")
    }
}

impl Sub for &RatFn {
    type Output = RatFn;
    fn sub(self, rhs: &RatFn) -> RatFn {
        self + &-rhs
    }
}

impl Neg for &RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn { num: -&self.num, den: self.den.clone() }
    }
}

impl Mul for &RatFn {
    type Output = RatFn;
    fn mul(self, rhs: &RatFn) -> RatFn {
        RatFn::new(&self.num * &rhs.num, &self.den * &rhs.den)
            .expect("nonzero denominator")
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) {
            debug_assert!(self.den.leading().is_some_and(|c| c.is_one()));
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    fn rf(num: &[i64], den: &[i64]) -> RatFn {
        RatFn::new(RatPoly::from_ints(num), RatPoly::from_ints(den)).unwrap()
    }

    #[test]
    fn normalization_reduces_and_makes_den_monic() {
        // (2z^2-2)/(4z-4) = (z+1)/2
        let r = rf(&[-2, 0, 2], &[-4, 4]);
        assert_eq!(r, rf(&[1, 1], &[2]));
        assert!(r.is_polynomial());
        assert_eq!(r.den(), &RatPoly::one());
    }

    #[test]
    fn zero_denominator_rejected() {
        assert_eq!(
            RatFn::new(RatPoly::one(), RatPoly::zero()),
            Err(RatFnError::DivisionByZero)
        );
        assert!(rf(&[1], &[0, 1]).recip().is_ok());
        assert!(RatFn::zero().recip().is_err());
    }

    #[test]
    fn field_identities() {
        let a = rf(&[1, 2], &[0, 0, 1]);
        let b = rf(&[-3, 0, 1], &[5, 1]);
        assert_eq!(&(&a + &b) - &b, a);
        assert_eq!((&a * &b).checked_div(&b).unwrap(), a);
        assert_eq!(&a - &a, RatFn::zero());
    }

    #[test]
    fn derivative_quotient_rule() {
        // d/dz 1/z = -1/z^2
        assert_eq!(rf(&[1], &[0, 1]).derivative(), rf(&[-1], &[0, 0, 1]));
        // d/dz z^2 = 2z
        assert_eq!(
            RatFn::from_poly(RatPoly::from_ints(&[0, 0, 1])).derivative(),
            RatFn::from_poly(RatPoly::from_ints(&[0, 2]))
        );
    }

    #[test]
    fn infinity_order_convention() {
        assert_eq!(rf(&[1], &[0, 0, 0, 1]).infinity_order(), Some(3));
        assert_eq!(rf(&[0, 1], &[1]).infinity_order(), Some(-1));
        assert_eq!(rf(&[7], &[1]).infinity_order(), Some(0));
        assert_eq!(RatFn::zero().infinity_order(), None);
    }

    #[test]
    fn poles_and_laurent_coefficients() {
        // r = (z+3)/(z^2 (z-1)) = 1/(z-1) ... partial fractions:
        // r = -3/z^2 - 4/z + 4/(z-1)
        let r = RatFn::new(
            RatPoly::from_ints(&[3, 1]),
            &RatPoly::from_ints(&[0, 0, 1]) * &RatPoly::from_ints(&[-1, 1]),
        )
        .unwrap();
        let poles = r.poles().unwrap();
        assert_eq!(poles, vec![(int(0), 2), (int(1), 1)]);
        assert_eq!(r.laurent_coeff(&int(0), 2, 2), int(-3));
        assert_eq!(r.laurent_coeff(&int(0), 2, 1), int(-4));
        assert_eq!(r.laurent_coeff(&int(1), 1, 1), int(4));
    }

    #[test]
    fn infinity_z2_coefficient() {
        // r = (3z+1)/z^3 has infinity order 2 with z^-2 coefficient 3
        let r = rf(&[1, 3], &[0, 0, 0, 1]);
        assert_eq!(r.infinity_z2_coeff(), int(3));
        let r = rf(&[-3], &[0, 0, 16]);
        assert_eq!(r.infinity_z2_coeff(), ratio(-3, 16));
    }

    #[test]
    fn irrational_poles_detected() {
        let r = rf(&[1], &[-2, 0, 1]); // 1/(z^2-2)
        assert!(matches!(r.poles(), Err(RatFnError::IrrationalPoles(_))));
    }
}
