//! Polynomial representations: coefficient form, root form and exact integer form.
//!
//! Coefficients are stored ascending by power throughout. Floating-point
//! expansion from root form is capped at [`EXPANSION_DEGREE_CAP`]; beyond it
//! polynomials stay in root form or in exact integer form.

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{precondition, Error, Result};

/// Highest degree expanded from root form into double-precision coefficients.
pub const EXPANSION_DEGREE_CAP: usize = 60;

/// Complex polynomial in coefficient form, ascending by power.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    /// Builds a polynomial, dropping vanishing leading coefficients.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::zero());
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `x^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![Complex64::zero(); n + 1];
        coeffs[n] = Complex64::one();
        Self { coeffs }
    }

    /// Expands `leading * prod (z - r)^m`. Refuses degrees above the cap.
    pub fn from_roots(roots: &RootSet, leading: Complex64) -> Result<Self> {
        let degree = roots.cardinality();
        if degree > EXPANSION_DEGREE_CAP {
            return Err(Error::ExpansionTooLarge {
                degree,
                cap: EXPANSION_DEGREE_CAP,
            });
        }
        let mut coeffs = vec![leading];
        for z in roots.expanded() {
            let mut next = vec![Complex64::zero(); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * z;
            }
            coeffs = next;
        }
        Ok(Self::new(coeffs))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.degree()]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    /// Splits into a monic polynomial and the stored scale, `self = scale * monic`.
    pub fn monic(&self) -> (Polynomial, Complex64) {
        let lead = self.leading();
        if lead.is_zero() {
            return (self.clone(), Complex64::one());
        }
        (
            Polynomial {
                coeffs: self.coeffs.iter().map(|c| c / lead).collect(),
            },
            lead,
        )
    }

    pub fn scale(&self, factor: Complex64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// Horner evaluation.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, &c| acc * z + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn evaluate_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `sum |c_j| |z|^j`, the a-priori bound on Horner's rounding error scale.
    pub fn evaluation_bound(&self, modulus: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * modulus + c.norm())
    }

    pub fn differentiate(&self) -> Result<Polynomial> {
        if self.degree() == 0 {
            return Err(Error::ConstantDerivative);
        }
        Ok(Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, &c)| c * j as f64)
                .collect(),
        ))
    }

    /// k-th derivative; `k = 0` returns a copy.
    pub fn derivative_n(&self, k: usize) -> Result<Polynomial> {
        let mut p = self.clone();
        for _ in 0..k {
            p = p.differentiate()?;
        }
        Ok(p)
    }

    /// Taylor coefficients `P^(j)(z) / j!` for `j = 0..=degree`, i.e. the
    /// coefficients of `s -> P(z + s)`.
    pub fn taylor_at(&self, z: Complex64) -> Vec<Complex64> {
        let mut work = self.coeffs.clone();
        let n = work.len();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            // synthetic division of work[j..] by (x - z)
            for i in (j..n - 1).rev() {
                let carry = work[i + 1] * z;
                work[i] += carry;
            }
            out.push(work[j]);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut coeffs = vec![Complex64::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial::new(coeffs)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| {
                self.coeffs.get(i).copied().unwrap_or_default()
                    + other.coeffs.get(i).copied().unwrap_or_default()
            })
            .collect();
        Polynomial::new(coeffs)
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.coeffs.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        if pairs.is_empty() {
            return Err(serde::de::Error::custom("empty coefficient list"));
        }
        Ok(Polynomial::new(
            pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        ))
    }
}

/// `((n-k)!/n!) d^k p / dx^k` for monic `p` of degree `n`; the result is monic
/// of degree `n - k`. Non-monic input is normalized first.
pub fn normalized_derivative_table(p: &Polynomial, k: usize) -> Result<Polynomial> {
    let n = p.degree();
    if k >= n {
        return Err(Error::DerivativeOrderExhausted { k, degree: n });
    }
    let (monic, _) = p.monic();
    let coeffs = (0..=n - k)
        .map(|j| {
            let ratio: f64 = (1..=k)
                .map(|i| (j + i) as f64 / (n - k + i) as f64)
                .product();
            monic.coeffs[j + k] * ratio
        })
        .collect();
    Ok(Polynomial::new(coeffs))
}

/// `P'(z)/P(z) = sum 1/(z - r_i)` straight from root form.
pub fn log_derivative(roots: &[Complex64], z: Complex64) -> Result<Complex64> {
    roots.iter().try_fold(Complex64::zero(), |acc, &r| {
        let d = z - r;
        if d.is_zero() {
            Err(Error::Pole { z })
        } else {
            Ok(acc + d.inv())
        }
    })
}

/// One distinct zero with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub z: Complex64,
    pub multiplicity: usize,
}

impl Root {
    pub fn simple(z: Complex64) -> Self {
        Root { z, multiplicity: 1 }
    }
}

/// Multiset of complex zeros, stored as distinct points with multiplicities
/// and kept sorted by (re, im).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    roots: Vec<Root>,
}

impl RootSet {
    /// Sorts and merges bit-identical locations; drops zero multiplicities.
    pub fn new(mut roots: Vec<Root>) -> Self {
        roots.retain(|r| r.multiplicity > 0);
        roots.sort_by(|a, b| {
            a.z.re
                .total_cmp(&b.z.re)
                .then_with(|| a.z.im.total_cmp(&b.z.im))
        });
        let mut merged: Vec<Root> = Vec::with_capacity(roots.len());
        for r in roots {
            match merged.last_mut() {
                Some(last) if last.z == r.z => last.multiplicity += r.multiplicity,
                _ => merged.push(r),
            }
        }
        RootSet { roots: merged }
    }

    pub fn from_points(points: impl IntoIterator<Item = Complex64>) -> Self {
        Self::new(points.into_iter().map(Root::simple).collect())
    }

    pub fn from_real(points: impl IntoIterator<Item = f64>) -> Self {
        Self::from_points(points.into_iter().map(|x| Complex64::new(x, 0.0)))
    }

    /// Single point of multiplicity `m`.
    pub fn point(z: Complex64, multiplicity: usize) -> Self {
        Self::new(vec![Root { z, multiplicity }])
    }

    pub fn distinct(&self) -> &[Root] {
        &self.roots
    }

    /// Degree of the polynomial these are the zeros of.
    pub fn cardinality(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Points repeated according to multiplicity.
    pub fn expanded(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.z, r.multiplicity))
            .collect()
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots.iter().map(|r| r.z.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.roots.iter().all(|r| r.z.im == 0.0)
    }

    /// Sorted real parts with multiplicity, if every root is real.
    pub fn real_values(&self) -> Option<Vec<f64>> {
        if !self.is_real() {
            return None;
        }
        Some(self.expanded().into_iter().map(|z| z.re).collect())
    }

    /// `sum m / (z - r)`.
    pub fn log_derivative(&self, z: Complex64) -> Result<Complex64> {
        self.roots.iter().try_fold(Complex64::zero(), |acc, r| {
            let d = z - r.z;
            if d.is_zero() {
                Err(Error::Pole { z })
            } else {
                Ok(acc + d.inv() * r.multiplicity as f64)
            }
        })
    }

    /// Derivative of [`RootSet::log_derivative`]: `-sum m / (z - r)^2`.
    pub fn log_derivative_prime(&self, z: Complex64) -> Result<Complex64> {
        self.roots.iter().try_fold(Complex64::zero(), |acc, r| {
            let d = z - r.z;
            if d.is_zero() {
                Err(Error::Pole { z })
            } else {
                let inv = d.inv();
                Ok(acc - inv * inv * r.multiplicity as f64)
            }
        })
    }
}

/// Root-form polynomial `leading * prod (z - r)^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactoredPolynomial {
    pub roots: RootSet,
    pub leading: Complex64,
}

impl FactoredPolynomial {
    pub fn new(roots: RootSet, leading: Complex64) -> Self {
        FactoredPolynomial { roots, leading }
    }

    pub fn degree(&self) -> usize {
        self.roots.cardinality()
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.roots.distinct().iter().fold(self.leading, |acc, r| {
            acc * (z - r.z).powu(r.multiplicity as u32)
        })
    }

    pub fn expand(&self) -> Result<Polynomial> {
        Polynomial::from_roots(&self.roots, self.leading)
    }
}

/// Polynomial with arbitrary-precision integer coefficients, ascending by power.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactPolynomial {
    coeffs: Vec<BigInt>,
}

impl ExactPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigInt::zero());
        }
        ExactPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    pub fn add(&self, other: &ExactPolynomial) -> ExactPolynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = BigInt::zero();
        ExactPolynomial::new(
            (0..len)
                .map(|i| {
                    self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero)
                })
                .collect(),
        )
    }

    pub fn scale(&self, factor: &BigInt) -> ExactPolynomial {
        ExactPolynomial::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn mul(&self, other: &ExactPolynomial) -> ExactPolynomial {
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        ExactPolynomial::new(coeffs)
    }

    /// Binary powering.
    pub fn pow(&self, mut n: u32) -> ExactPolynomial {
        let mut result = ExactPolynomial::from_i64(&[1]);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn differentiate(&self) -> Result<ExactPolynomial> {
        self.derivative_n(1)
    }

    /// k-th derivative: `c_j <- c_{j+k} (j+k)!/j!`.
    pub fn derivative_n(&self, k: usize) -> Result<ExactPolynomial> {
        if k == 0 {
            return Ok(self.clone());
        }
        if self.degree() == 0 {
            return Err(Error::ConstantDerivative);
        }
        if k > self.degree() {
            return Ok(ExactPolynomial::from_i64(&[0]));
        }
        let coeffs = (0..=self.degree() - k)
            .map(|j| {
                let falling: BigInt = (j + 1..=j + k).map(BigInt::from).product();
                &self.coeffs[j + k] * falling
            })
            .collect();
        Ok(ExactPolynomial::new(coeffs))
    }

    /// Exact quotient; fails if `divisor` does not divide `self`.
    pub fn exact_div(&self, divisor: &ExactPolynomial) -> Result<ExactPolynomial> {
        if divisor.is_zero() {
            return precondition("division by the zero polynomial");
        }
        let dd = divisor.degree();
        if self.degree() < dd {
            return if self.is_zero() {
                Ok(self.clone())
            } else {
                precondition("divisor does not divide")
            };
        }
        let lead = &divisor.coeffs[dd];
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); self.degree() - dd + 1];
        for i in (0..quot.len()).rev() {
            let top = &rem[i + dd];
            if top.is_zero() {
                continue;
            }
            if !(top % lead).is_zero() {
                return precondition("divisor does not divide");
            }
            let q = top / lead;
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= &q * d;
            }
            quot[i] = q;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return precondition("divisor does not divide");
        }
        Ok(ExactPolynomial::new(quot))
    }

    /// Rounded conversion to a floating-point polynomial.
    pub fn to_polynomial(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .map(|c| Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0))
                .collect(),
        )
    }

    /// Monic floating-point form, each coefficient rounded once from its exact ratio.
    pub fn to_monic_polynomial(&self) -> Polynomial {
        let lead = &self.coeffs[self.degree()];
        Polynomial::new(
            self.coeffs
                .iter()
                .map(|c| Complex64::new(ratio_to_f64(c, lead), 0.0))
                .collect(),
        )
    }

    /// Exact Newton correction `p(z)/p'(z)` at the dyadic rational equal to `z`,
    /// rounded once. `None` when `p'(z) = 0`.
    pub fn newton_correction(&self, z: Complex64) -> Option<Complex64> {
        if self.degree() == 0 {
            return None;
        }
        let (mre, mim, e) = common_dyadic(z)?;
        let d = self.degree();
        let shift = |i: usize| -> usize { e * (d - i) };
        // Horner on z 2^e over Gaussian integers keeps every quantity integral
        let mut a = (self.coeffs[d].clone(), BigInt::zero());
        let mut b = (self.coeffs[d].clone(), BigInt::zero());
        for i in (0..d).rev() {
            if i < d - 1 {
                let next_b = gauss_mul(&b, &mre, &mim);
                b = (next_b.0 + &a.0, next_b.1 + &a.1);
            }
            let next_a = gauss_mul(&a, &mre, &mim);
            a = (next_a.0 + (&self.coeffs[i] << shift(i)), next_a.1);
        }
        // p/p' = A / (B 2^e)
        let den_scale = BigInt::one() << e;
        let b = (&b.0 * &den_scale, &b.1 * &den_scale);
        let norm = &b.0 * &b.0 + &b.1 * &b.1;
        if norm.is_zero() {
            return None;
        }
        let num_re = &a.0 * &b.0 + &a.1 * &b.1;
        let num_im = &a.1 * &b.0 - &a.0 * &b.1;
        Some(Complex64::new(
            ratio_to_f64(&num_re, &norm),
            ratio_to_f64(&num_im, &norm),
        ))
    }
}

impl fmt::Display for ExactPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", strs.join(", "))
    }
}

impl Serialize for ExactPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        strs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExactPolynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let strs = Vec::<String>::deserialize(deserializer)?;
        let coeffs = strs
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(serde::de::Error::custom))
            .collect::<Result<Vec<_>, _>>()?;
        if coeffs.is_empty() {
            return Err(serde::de::Error::custom("empty coefficient list"));
        }
        Ok(ExactPolynomial::new(coeffs))
    }
}

/// Exact k-th derivative of `base^n`.
pub fn rodrigues(base: &ExactPolynomial, n: u32, k: usize) -> Result<ExactPolynomial> {
    if n < 1 {
        return precondition("rodrigues power must be at least 1");
    }
    let full = base.degree() * n as usize;
    if full == 0 || k > full - 1 {
        return Err(Error::DerivativeOrderExhausted { k, degree: full });
    }
    base.pow(n).derivative_n(k)
}

fn gauss_mul(a: &(BigInt, BigInt), re: &BigInt, im: &BigInt) -> (BigInt, BigInt) {
    (&a.0 * re - &a.1 * im, &a.0 * im + &a.1 * re)
}

/// `z = (mre + i mim) / 2^e` with integer mantissas and `e >= 0`.
fn common_dyadic(z: Complex64) -> Option<(BigInt, BigInt, usize)> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return None;
    }
    let (mr, er) = dyadic(z.re);
    let (mi, ei) = dyadic(z.im);
    let e = (-er.min(ei).min(0)) as usize;
    let lift = |m: BigInt, ex: i32| -> BigInt {
        let total = ex + e as i32;
        m << total as usize
    };
    Some((lift(mr, er), lift(mi, ei), e))
}

/// `x = m 2^k` exactly.
fn dyadic(x: f64) -> (BigInt, i32) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, exp) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    let tz = mant.trailing_zeros() as i32;
    (BigInt::from(sign * (mant >> tz) as i64), exp + tz)
}

/// `num / den` correctly scaled into f64 for arbitrarily large operands.
pub(crate) fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let negative = (num.sign() == Sign::Minus) != (den.sign() == Sign::Minus);
    let n = num.abs();
    let d = den.abs();
    let shift = 64 - (n.bits() as i64 - d.bits() as i64);
    let q = if shift >= 0 {
        (n << shift as usize) / d
    } else {
        n / (d << (-shift) as usize)
    };
    let mag = q.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-(shift.clamp(-1000, 1000) as i32));
    let mag = if shift.abs() > 1000 {
        mag * 2f64.powi(-(shift - shift.clamp(-1000, 1000)) as i32)
    } else {
        mag
    };
    if negative {
        -mag
    } else {
        mag
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn differentiate_power_rule() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        assert_eq!(p.differentiate().unwrap(), Polynomial::from_real(&[0.0, 2.0]));
        let p = Polynomial::from_real(&[0.0, -1.0, 0.0, 1.0]);
        assert_eq!(
            p.differentiate().unwrap(),
            Polynomial::from_real(&[-1.0, 0.0, 3.0])
        );
        let d = Polynomial::monomial(7).differentiate().unwrap();
        assert_eq!(d.degree(), 6);
        assert_eq!(d.leading(), c(7.0));
    }

    #[test]
    fn differentiate_constant_fails() {
        let err = Polynomial::from_real(&[3.0]).differentiate().unwrap_err();
        assert_eq!(err.to_string(), "cannot differentiate constant to a nonconstant");
    }

    #[test]
    fn derivative_table_examples() {
        let q = normalized_derivative_table(&Polynomial::monomial(9), 4).unwrap();
        assert_eq!(q, Polynomial::monomial(5));
        let q = normalized_derivative_table(&Polynomial::from_real(&[-1.0, 0.0, 1.0]), 1).unwrap();
        assert_eq!(q, Polynomial::from_real(&[0.0, 1.0]));
        // (x^2-1)^2 = x^4 - 2x^2 + 1; d^2 = 12x^2 - 4; scaled by 2!/4! -> x^2 - 1/3
        let p = Polynomial::from_real(&[1.0, 0.0, -2.0, 0.0, 1.0]);
        let q = normalized_derivative_table(&p, 2).unwrap();
        assert!((q.coeffs()[0] - c(-1.0 / 3.0)).norm() < 1e-15);
        assert!(q.coeffs()[1].norm() < 1e-15);
        assert_eq!(q.coeffs()[2], c(1.0));
    }

    #[test]
    fn derivative_table_exhausted() {
        let p = Polynomial::monomial(3);
        assert!(matches!(
            normalized_derivative_table(&p, 3),
            Err(Error::DerivativeOrderExhausted { k: 3, degree: 3 })
        ));
    }

    #[test]
    fn rodrigues_examples() {
        let base = ExactPolynomial::from_i64(&[-1, 0, 1]);
        assert_eq!(rodrigues(&base, 1, 1).unwrap(), ExactPolynomial::from_i64(&[0, 2]));
        assert_eq!(
            rodrigues(&base, 2, 2).unwrap(),
            ExactPolynomial::from_i64(&[-4, 0, 12])
        );
        let kal = ExactPolynomial::from_i64(&[0, -1, 0, 1]);
        assert_eq!(
            rodrigues(&kal, 1, 1).unwrap(),
            ExactPolynomial::from_i64(&[-1, 0, 3])
        );
        assert!(rodrigues(&base, 2, 4).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        assert_eq!(p.evaluate(c(2.0)), c(3.0));
        let i = Complex64::i();
        assert!((Polynomial::monomial(5).evaluate(i) - i).norm() < 1e-15);
        let p = Polynomial::from_real(&[0.0, -1.0, 0.0, 1.0]);
        assert_eq!(p.evaluate(c(1.0)), c(0.0));
    }

    #[test]
    fn log_derivative_examples() {
        let v = log_derivative(&[c(-1.0), c(1.0)], c(2.0)).unwrap();
        assert!((v - c(4.0 / 3.0)).norm() < 1e-15);
        let z = Complex64::new(0.3, -1.2);
        let v = RootSet::point(c(0.0), 6).log_derivative(z).unwrap();
        assert!((v - 6.0 / z).norm() < 1e-14);
        assert!(matches!(
            log_derivative(&[c(1.0)], c(1.0)),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn log_derivative_chebyshev_t3() {
        // T3 = 4x^3 - 3x, zeros 0, +-sqrt(3)/2
        let h = 3f64.sqrt() / 2.0;
        let direct = log_derivative(&[c(-h), c(0.0), c(h)], c(2.0)).unwrap();
        let t3 = Polynomial::from_real(&[0.0, -3.0, 0.0, 4.0]);
        let (p, dp) = t3.evaluate_with_derivative(c(2.0));
        // P'/P at 2 = 45/26
        assert!((direct - c(45.0 / 26.0)).norm() < 1e-14);
        assert!((direct - dp / p).norm() < 1e-14);
    }

    #[test]
    fn taylor_coefficients_match_derivatives() {
        let p = Polynomial::from_real(&[2.0, -1.0, 0.5, 3.0, -0.25]);
        let z = Complex64::new(0.7, -0.4);
        let taylor = p.taylor_at(z);
        let mut fact = 1.0;
        for (j, tj) in taylor.iter().enumerate() {
            if j > 0 {
                fact *= j as f64;
            }
            let dj = p.derivative_n(j).unwrap().evaluate(z) / fact;
            assert!((tj - dj).norm() < 1e-13, "j = {j}");
        }
    }

    #[test]
    fn from_roots_cap() {
        let roots = RootSet::point(c(0.5), 61);
        assert!(matches!(
            Polynomial::from_roots(&roots, c(1.0)),
            Err(Error::ExpansionTooLarge { .. })
        ));
    }

    #[test]
    fn exact_division_and_newton() {
        let base = ExactPolynomial::from_i64(&[-1, 0, 1]);
        let q = base.pow(5);
        assert_eq!(q.exact_div(&base.pow(3)).unwrap(), base.pow(2));
        assert!(q.exact_div(&ExactPolynomial::from_i64(&[-2, 1])).is_err());
        // p = 3x^2 - 1 at x = 0.5: p/p' = (-0.25)/3
        let p = ExactPolynomial::from_i64(&[-1, 0, 3]);
        let corr = p.newton_correction(c(0.5)).unwrap();
        assert!((corr - c(-0.25 / 3.0)).norm() < 1e-17);
        // complex point: p = x^2 + 1 at 1 + i
        let p = ExactPolynomial::from_i64(&[1, 0, 1]);
        let z = Complex64::new(1.0, 1.0);
        let expect = (z * z + 1.0) / (2.0 * z);
        assert!((p.newton_correction(z).unwrap() - expect).norm() < 1e-16);
    }

    #[test]
    fn ratio_handles_huge_operands() {
        let big = BigInt::from(3) << 2000usize;
        let den = BigInt::from(2) << 2000usize;
        assert_eq!(ratio_to_f64(&big, &den), 1.5);
        assert_eq!(ratio_to_f64(&-big, &den), -1.5);
        let exact = ExactPolynomial::from_i64(&[-4, 0, 12]);
        assert_eq!(
            exact.to_monic_polynomial(),
            Polynomial::from_real(&[-1.0 / 3.0, 0.0, 1.0])
        );
    }

    #[test]
    fn json_shapes() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[-1.0,0.0],[0.0,0.0],[1.0,0.0]]");
        let back: Polynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let e = ExactPolynomial::from_i64(&[-4, 0, 12]);
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"["-4","0","12"]"#);
        assert_eq!(serde_json::from_str::<ExactPolynomial>(&s).unwrap(), e);
    }

    #[test]
    fn rootset_merges_duplicates() {
        let set = RootSet::from_real([1.0, -1.0, 1.0, 0.5]);
        assert_eq!(set.cardinality(), 4);
        assert_eq!(set.distinct().len(), 3);
        assert_eq!(set.distinct()[2].multiplicity, 2);
        assert_eq!(set.real_values().unwrap(), vec![-1.0, 0.5, 1.0, 1.0]);
    }
}
