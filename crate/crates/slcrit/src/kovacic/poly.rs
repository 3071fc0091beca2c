//! Dense polynomials over the exact rationals.

use crate::exact::{format_ratio, int, ExactRatio};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Polynomial in one variable `z`; dense coefficients low-to-high with no
/// trailing zero, so the zero polynomial stores an empty vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<ExactRatio>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<ExactRatio>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> Self {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(ExactRatio::one())
    }

    pub fn constant(c: ExactRatio) -> Self {
        Self::new(vec![c])
    }

    /// The variable `z` itself.
    pub fn x() -> Self {
        Self::monomial(ExactRatio::one(), 1)
    }

    pub fn monomial(c: ExactRatio, deg: usize) -> Self {
        let mut coeffs = vec![ExactRatio::zero(); deg + 1];
        coeffs[deg] = c;
        Self::new(coeffs)
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> ExactRatio {
        self.coeffs.get(i).cloned().unwrap_or_else(ExactRatio::zero)
    }

    pub fn coeffs(&self) -> &[ExactRatio] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&ExactRatio> {
        self.coeffs.last()
    }

    pub fn eval(&self, z: &ExactRatio) -> ExactRatio {
        let mut acc = ExactRatio::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * ExactRatio::from_integer(BigInt::from(i)))
            .collect();
        Self::new(coeffs)
    }

    pub fn scale(&self, s: &ExactRatio) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Scales so the leading coefficient is 1; zero stays zero.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some(lc) => self.scale(&lc.recip()),
        }
    }

    /// Euclidean division; panics if `div` is zero (internal contract).
    pub fn div_rem(&self, div: &Self) -> (Self, Self) {
        let d_deg = div.degree().expect("division by zero polynomial");
        let d_lc = div.leading().unwrap().clone();
        let mut rem = self.clone();
        let mut quot = vec![
            ExactRatio::zero();
            self.coeffs.len().saturating_sub(d_deg)
        ];
        while let Some(r_deg) = rem.degree() {
            if r_deg < d_deg {
                break;
            }
            let factor = rem.leading().unwrap() / &d_lc;
            let shift = r_deg - d_deg;
            quot[shift] = factor.clone();
            let sub = div.scale(&factor);
            let mut coeffs = rem.coeffs;
            for (i, c) in sub.coeffs.iter().enumerate() {
                coeffs[i + shift] -= c;
            }
            // force exact cancellation of the leading term
            coeffs.truncate(r_deg);
            rem = Self::new(coeffs);
        }
        (Self::new(quot), rem)
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.monic();
        let mut b = other.monic();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a
    }

    /// Least common multiple, monic.
    pub fn lcm(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let g = self.gcd(other);
        let (q, r) = (self * other).div_rem(&g);
        debug_assert!(r.is_zero());
        q.monic()
    }

    /// All rational roots with multiplicities, plus the rootless remaining
    /// factor (constant when the polynomial splits over the rationals).
    ///
    /// Root candidates come from divisor enumeration on the primitive integer
    /// form, so constants must fit comfortably in machine words; oversized
    /// instances return `None` rather than stalling.
    pub fn rational_roots(&self) -> Option<(Vec<(ExactRatio, usize)>, RatPoly)> {
        let mut roots: Vec<(ExactRatio, usize)> = Vec::new();
        let mut rest = self.clone();
        if rest.is_zero() {
            return Some((roots, rest));
        }
        // factor out z^t first
        let t = rest.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0);
        if t > 0 {
            roots.push((ExactRatio::zero(), t));
            rest = Self::new(rest.coeffs[t..].to_vec());
        }
        while rest.degree().is_some_and(|d| d >= 1) {
            let root = rest.find_one_rational_root()?;
            match root {
                None => break,
                Some(c) => {
                    let lin = Self::new(vec![-c.clone(), ExactRatio::one()]);
                    let mut mult = 0usize;
                    loop {
                        let (q, r) = rest.div_rem(&lin);
                        if r.is_zero() {
                            mult += 1;
                            rest = q;
                        } else {
                            break;
                        }
                    }
                    debug_assert!(mult > 0);
                    roots.push((c, mult));
                }
            }
        }
        roots.sort_by(|a, b| a.0.cmp(&b.0));
        Some((roots, rest))
    }

    /// One rational root of a polynomial with nonzero constant term, if any.
    /// `None` outer layer means the search itself is infeasible (oversized).
    fn find_one_rational_root(&self) -> Option<Option<ExactRatio>> {
        // clear denominators to a primitive integer polynomial
        let mut den_lcm = BigInt::one();
        for c in &self.coeffs {
            let d = c.denom();
            den_lcm = &den_lcm / num_integer::Integer::gcd(&den_lcm, d) * d;
        }
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&den_lcm / c.denom()))
            .collect();
        let a0 = ints.first()?.clone();
        let an = ints.last()?.clone();
        debug_assert!(!a0.is_zero() && !an.is_zero());
        let a0 = a0.abs().to_i128()?;
        let an = an.abs().to_i128()?;
        if a0 > 1_000_000_000_000 || an > 1_000_000_000_000 {
            return None;
        }
        let ps = divisors(a0);
        let qs = divisors(an);
        if ps.len().checked_mul(qs.len())? > 100_000 {
            return None;
        }
        for p in &ps {
            for q in &qs {
                for cand in [
                    ExactRatio::new(BigInt::from(*p), BigInt::from(*q)),
                    ExactRatio::new(BigInt::from(-*p), BigInt::from(*q)),
                ] {
                    if self.eval(&cand).is_zero() {
                        return Some(Some(cand));
                    }
                }
            }
        }
        Some(None)
    }
}

fn divisors(n: i128) -> Vec<i128> {
    debug_assert!(n > 0);
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1i128;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

impl Add for &RatPoly {
    type Output = RatPoly;
    fn add(self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect();
        RatPoly::new(coeffs)
    }
}

impl Sub for &RatPoly {
    type Output = RatPoly;
    fn sub(self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect();
        RatPoly::new(coeffs)
    }
}

impl Neg for &RatPoly {
    type Output = RatPoly;
    fn neg(self) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &RatPoly {
    type Output = RatPoly;
    fn mul(self, rhs: &RatPoly) -> RatPoly {
        if self.is_zero() || rhs.is_zero() {
            return RatPoly::zero();
        }
        let mut coeffs =
            vec![ExactRatio::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        RatPoly::new(coeffs)
    }
}

impl fmt::Display for RatPoly {
    /// Prints high power first, e.g. `z^3 - 3/32*z + 1`; parseable back.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let coeff_part = if mag.is_one() && i > 0 {
                None
            } else {
                Some(format_ratio(&mag))
            };
            match (coeff_part, i) {
                (None, 1) => write!(f, "z")?,
                (None, _) => write!(f, "z^{i}")?,
                (Some(s), 0) => write!(f, "{s}")?,
                (Some(s), 1) => write!(f, "{s}*z")?,
                (Some(s), _) => write!(f, "{s}*z^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn p(coeffs: &[i64]) -> RatPoly {
        RatPoly::from_ints(coeffs)
    }

    #[test]
    fn construction_trims_trailing_zeros() {
        assert_eq!(p(&[1, 2, 0, 0]), p(&[1, 2]));
        assert!(p(&[0, 0]).is_zero());
        assert_eq!(p(&[0, 0]).degree(), None);
        assert_eq!(p(&[5]).degree(), Some(0));
    }

    #[test]
    fn ring_operations() {
        let a = p(&[1, 2, 3]);
        let b = p(&[0, -1]);
        assert_eq!(&a + &b, p(&[1, 1, 3]));
        assert_eq!(&(&a * &b) + &(&b * &a), (&a * &b).scale(&int(2)));
        assert_eq!(&a - &a, RatPoly::zero());
        // (z+1)(z-1) = z^2 - 1
        assert_eq!(&p(&[1, 1]) * &p(&[-1, 1]), p(&[-1, 0, 1]));
    }

    #[test]
    fn evaluation_and_derivative() {
        let a = p(&[1, 0, 3]); // 3z^2 + 1
        assert_eq!(a.eval(&int(2)), int(13));
        assert_eq!(a.derivative(), p(&[0, 6]));
        assert_eq!(RatPoly::zero().derivative(), RatPoly::zero());
    }

    #[test]
    fn division_and_gcd() {
        let a = p(&[-1, 0, 1]); // z^2 - 1
        let b = p(&[-1, 1]); // z - 1
        let (q, r) = a.div_rem(&b);
        assert_eq!(q, p(&[1, 1]));
        assert!(r.is_zero());
        assert_eq!(a.gcd(&b), b.monic());
        assert_eq!(p(&[2]).gcd(&p(&[0, 3])), RatPoly::one());
        // lcm(z(z-1), (z-1)) = z(z-1)
        assert_eq!(p(&[0, -1, 1]).lcm(&b), p(&[0, -1, 1]));
    }

    #[test]
    fn rational_roots_with_multiplicity() {
        // z^3(z - 1/2)^2 (z^2+1)
        let fac = RatPoly::new(vec![ratio(-1, 2), int(1)]);
        let poly = &(&RatPoly::monomial(int(1), 3) * &fac.pow(2)) * &p(&[1, 0, 1]);
        let (roots, rest) = poly.rational_roots().unwrap();
        assert_eq!(
            roots,
            vec![(int(0), 3), (ratio(1, 2), 2)]
        );
        assert_eq!(rest.monic(), p(&[1, 0, 1]));
    }

    #[test]
    fn display_round_trip_shapes() {
        assert_eq!(p(&[0]).to_string(), "0");
        assert_eq!(p(&[-1, 0, 1]).to_string(), "z^2 - 1");
        assert_eq!(
            RatPoly::new(vec![int(1), ratio(-3, 32)]).to_string(),
            "-3/32*z + 1"
        );
        assert_eq!(RatPoly::monomial(int(-1), 1).to_string(), "-z");
    }
}
