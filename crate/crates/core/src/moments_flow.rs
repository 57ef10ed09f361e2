//! Moments of the flowing measure as polynomials in `t`.
//!
//! Writing `u = sum m_k / z^(k+1)` in the Hopf equation gives
//! `sum_{j<=k} m_{k-j} m_j' = -(k+1) m_k`. With `m_0 = 1 - t` this is a linear
//! first-order equation for each `m_k` whose forcing is
//! `f_k' = (1/2) d/dt sum_{j=1}^{k-1} m_{k-j} m_j`. In `tau = 1 - t` the
//! integrating factor is `tau^k`, and since the forcing is a polynomial of
//! degree below `k` the solution is found coefficient by coefficient:
//! `(k - j) c_j = [tau^j] (sum_{a=1}^{k-1} m_a d/dtau m_{k-a})` for `j < k`, with
//! `c_k` fixed by the initial value.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{precondition, Error, Result};
use crate::measure::{circle_points, Atom, MeasureSpec};
use crate::polycore::ratio_to_f64;

/// Above this order exact arithmetic is abandoned for floating point.
pub const EXACT_KMAX: usize = 64;

/// One coefficient or value, exact when the data allows.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficient {
    Exact(BigRational),
    Float(Complex64),
}

impl Coefficient {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            Coefficient::Exact(q) => Complex64::new(rational_to_f64(q), 0.0),
            Coefficient::Float(z) => *z,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Exact(q) => q.is_zero(),
            Coefficient::Float(z) => z.is_zero(),
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Exact(q) => write!(f, "{q}"),
            Coefficient::Float(z) if z.im == 0.0 => write!(f, "{:e}", z.re),
            Coefficient::Float(z) => write!(f, "{:e}{:+e}i", z.re, z.im),
        }
    }
}

impl Serialize for Coefficient {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Coefficient::Exact(q) => s.serialize_str(&q.to_string()),
            Coefficient::Float(z) if z.im == 0.0 => s.serialize_f64(z.re),
            Coefficient::Float(z) => [z.re, z.im].serialize(s),
        }
    }
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    ratio_to_f64(q.numer(), q.denom())
}

/// Parses `"3"`, `"-1/4"`, `"0.125"` or `"2.5e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if text.contains('/') {
        let q = BigRational::from_str(text).map_err(|_| bad())?;
        return Ok(q);
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(bad());
    }
    let value = BigInt::from_str(&digits).map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(value * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(value, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Initial moment data.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialMoments {
    Exact(Vec<BigRational>),
    Float(Vec<Complex64>),
}

impl InitialMoments {
    pub fn len(&self) -> usize {
        match self {
            InitialMoments::Exact(v) => v.len(),
            InitialMoments::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exact when every entry parses as a rational, else an error.
    pub fn parse(entries: &[&str]) -> Result<Self> {
        entries
            .iter()
            .map(|e| parse_rational(e))
            .collect::<Result<Vec<_>>>()
            .map(InitialMoments::Exact)
    }

    fn float(&self) -> Vec<Complex64> {
        match self {
            InitialMoments::Exact(v) => v.iter().map(|q| Complex64::new(rational_to_f64(q), 0.0)).collect(),
            InitialMoments::Float(v) => v.clone(),
        }
    }
}

/// Exact moments of the named laws and of real atoms (every double is a
/// dyadic rational); `None` otherwise.
pub fn exact_moments(spec: &MeasureSpec, kmax: usize) -> Option<Vec<BigRational>> {
    let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let even_only = |f: &dyn Fn(usize) -> BigRational| -> Vec<BigRational> {
        (0..=kmax)
            .map(|k| if k % 2 == 0 { f(k / 2) } else { BigRational::zero() })
            .collect()
    };
    match spec {
        // C(2j, j) / 4^j
        MeasureSpec::Arcsine => Some(even_only(&|j| {
            let mut v = BigRational::one();
            for i in 1..=j as i64 {
                v *= q((2 * i - 1) * 2 * i, i * i * 4);
            }
            v
        })),
        // Catalan(j) / 4^j
        MeasureSpec::Semicircle => Some(even_only(&|j| catalan(j) / BigRational::from_integer(BigInt::from(4).pow(j as u32)))),
        MeasureSpec::MarchenkoPastur => Some((0..=kmax).map(catalan).collect()),
        MeasureSpec::Uniform => Some(even_only(&|j| q(1, 2 * j as i64 + 1))),
        MeasureSpec::Atoms { atoms } if atoms.iter().all(|a| a.z.im == 0.0) => Some(atom_moments(atoms, kmax)),
        _ => None,
    }
}

fn catalan(j: usize) -> BigRational {
    let mut v = BigInt::one();
    for i in 0..j {
        v = v * BigInt::from(2 * (2 * i + 1)) / BigInt::from(i + 2);
    }
    BigRational::from_integer(v)
}

fn atom_moments(atoms: &[Atom], kmax: usize) -> Vec<BigRational> {
    let exact: Vec<(BigRational, BigRational)> = atoms
        .iter()
        .map(|a| (dyadic(a.z.re), dyadic(a.weight)))
        .collect();
    let mut powers: Vec<BigRational> = exact.iter().map(|(_, w)| w.clone()).collect();
    let mut out = Vec::with_capacity(kmax + 1);
    for _ in 0..=kmax {
        out.push(powers.iter().fold(BigRational::zero(), |acc, p| acc + p));
        for (p, (x, _)) in powers.iter_mut().zip(&exact) {
            *p = &*p * x;
        }
    }
    out
}

fn dyadic(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

trait Field:
    Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> + Send + Sync
{
    fn from_usize(n: usize) -> Self;
    fn div_usize(&self, n: usize) -> Self;
    fn wrap(self) -> Coefficient;
}

impl Field for BigRational {
    fn from_usize(n: usize) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn div_usize(&self, n: usize) -> Self {
        self / BigRational::from_integer(BigInt::from(n))
    }
    fn wrap(self) -> Coefficient {
        Coefficient::Exact(self)
    }
}

impl Field for Complex64 {
    fn from_usize(n: usize) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn div_usize(&self, n: usize) -> Self {
        self / n as f64
    }
    fn wrap(self) -> Coefficient {
        Coefficient::Float(self)
    }
}

fn poly_mul<F: Field>(a: &[F], b: &[F]) -> Vec<F> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![F::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

fn poly_derivative<F: Field>(a: &[F]) -> Vec<F> {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| c.clone() * F::from_usize(j))
        .collect()
}

fn poly_eval<F: Field>(a: &[F], x: &F) -> F {
    a.iter().rev().fold(F::zero(), |acc, c| acc * x.clone() + c.clone())
}

/// `p(tau)` re-expanded in `t = 1 - tau`.
fn tau_to_t<F: Field>(a: &[F]) -> Vec<F> {
    // Horner with the linear factor (1 - t)
    let mut out: Vec<F> = Vec::new();
    for c in a.iter().rev() {
        let mut next = vec![F::zero(); out.len() + 1];
        for (i, v) in out.iter().enumerate() {
            next[i] = next[i].clone() + v.clone();
            next[i + 1] = next[i + 1].clone() - v.clone();
        }
        next[0] = next[0].clone() + c.clone();
        out = next;
    }
    out
}

fn evolve_generic<F: Field>(m0: &[F], kmax: usize) -> Vec<Vec<F>> {
    // tau-coefficients; m_0 = tau
    let mut polys: Vec<Vec<F>> = vec![vec![F::zero(), F::one()]];
    let mut dpolys: Vec<Vec<F>> = vec![vec![F::one()]];
    for k in 1..=kmax {
        let products: Vec<Vec<F>> = (1..k)
            .into_par_iter()
            .map(|a| poly_mul(&polys[a], &dpolys[k - a]))
            .collect();
        // sequential sum keeps floating results independent of the thread count
        let forcing = products.into_iter().fold(Vec::new(), |x: Vec<F>, y| {
            let (long, short) = if x.len() >= y.len() { (x, y) } else { (y, x) };
            let mut out = long;
            for (o, s) in out.iter_mut().zip(short) {
                *o = o.clone() + s;
            }
            out
        });
        let mut c = vec![F::zero(); k + 1];
        let mut partial = F::zero();
        for (j, cj) in c.iter_mut().enumerate().take(k) {
            if let Some(r) = forcing.get(j) {
                *cj = r.div_usize(k - j);
            }
            partial = partial + cj.clone();
        }
        c[k] = m0[k].clone() - partial;
        dpolys.push(poly_derivative(&c));
        polys.push(c);
    }
    polys
}

#[derive(Clone, Debug, PartialEq)]
enum Store {
    Exact(Vec<Vec<BigRational>>),
    Float(Vec<Vec<Complex64>>),
}

/// `m_0(t), ..., m_kmax(t)`, held internally in powers of `1 - t`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentPolynomials {
    kmax: usize,
    store: Store,
}

/// Builds `m_k(t)` for `k <= kmax` from `m_k(0)`; exact for rational data
/// with `kmax <= EXACT_KMAX`.
pub fn evolve_moments(m0: &InitialMoments, kmax: usize) -> Result<MomentPolynomials> {
    if m0.len() < kmax + 1 {
        return precondition(format!("need {} initial moments, got {}", kmax + 1, m0.len()));
    }
    let store = match m0 {
        InitialMoments::Exact(v) if kmax <= EXACT_KMAX => {
            if !v[0].is_one() {
                return precondition("initial mass m_0(0) must be 1");
            }
            Store::Exact(evolve_generic(v, kmax))
        }
        _ => {
            let v = m0.float();
            if v[0] != Complex64::new(1.0, 0.0) {
                return precondition("initial mass m_0(0) must be 1");
            }
            Store::Float(evolve_generic(&v, kmax))
        }
    };
    Ok(MomentPolynomials { kmax, store })
}

impl MomentPolynomials {
    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.store, Store::Exact(_))
    }

    fn check(&self, k: usize) -> Result<()> {
        if k > self.kmax {
            return precondition(format!("order {k} beyond kmax {}", self.kmax));
        }
        Ok(())
    }

    /// Coefficients of `m_k` in ascending powers of `t`.
    pub fn t_coefficients(&self, k: usize) -> Result<Vec<Coefficient>> {
        self.check(k)?;
        Ok(match &self.store {
            Store::Exact(p) => trim(tau_to_t(&p[k])).into_iter().map(Field::wrap).collect(),
            Store::Float(p) => trim(tau_to_t(&p[k])).into_iter().map(Field::wrap).collect(),
        })
    }

    /// Degree of `m_k` in `t` (zero polynomial has degree 0).
    pub fn degree(&self, k: usize) -> Result<usize> {
        Ok(self.t_coefficients(k)?.len().saturating_sub(1))
    }

    pub fn evaluate(&self, k: usize, t: f64) -> Result<Complex64> {
        self.check(k)?;
        let tau = 1.0 - t;
        Ok(match &self.store {
            Store::Exact(p) => p[k]
                .iter()
                .rev()
                .fold(0.0, |acc, c| acc * tau + rational_to_f64(c))
                .into(),
            Store::Float(p) => poly_eval(&p[k], &Complex64::new(tau, 0.0)),
        })
    }

    /// `m_k(t)`, exactly when possible.
    pub fn evaluate_exact(&self, k: usize, t: &BigRational) -> Result<Coefficient> {
        self.check(k)?;
        let tau = BigRational::one() - t;
        Ok(match &self.store {
            Store::Exact(p) => Coefficient::Exact(poly_eval(&p[k], &tau)),
            Store::Float(p) => Coefficient::Float(poly_eval(&p[k], &Complex64::new(rational_to_f64(&tau), 0.0))),
        })
    }

    /// `m_k(1)`.
    pub fn value_at_one(&self, k: usize) -> Result<Coefficient> {
        self.tau_coefficient(k, 0, false)
    }

    /// `m_k'(1)`.
    pub fn slope_at_one(&self, k: usize) -> Result<Coefficient> {
        self.tau_coefficient(k, 1, true)
    }

    fn tau_coefficient(&self, k: usize, j: usize, negate: bool) -> Result<Coefficient> {
        self.check(k)?;
        Ok(match &self.store {
            Store::Exact(p) => {
                let c = p[k].get(j).cloned().unwrap_or_else(BigRational::zero);
                Coefficient::Exact(if negate { -c } else { c })
            }
            Store::Float(p) => {
                let c = p[k].get(j).copied().unwrap_or_default();
                Coefficient::Float(if negate { -c } else { c })
            }
        })
    }

    /// Largest coefficient of `sum_j m_{k-j} m_j' + (k+1) m_k` for each `k`;
    /// exactly zero in exact mode.
    pub fn recursion_residual(&self) -> Vec<f64> {
        fn residuals<F: Field>(p: &[Vec<F>], norm: impl Fn(&F) -> f64) -> Vec<f64> {
            // d/dt = -d/dtau
            let d: Vec<Vec<F>> = p.iter().map(|q| poly_derivative(q)).collect();
            (0..p.len())
                .map(|k| {
                    let mut acc: Vec<F> = p[k].iter().map(|c| c.clone() * F::from_usize(k + 1)).collect();
                    for j in 0..=k {
                        let prod = poly_mul(&p[k - j], &d[j]);
                        if acc.len() < prod.len() {
                            acc.resize(prod.len(), F::zero());
                        }
                        for (a, b) in acc.iter_mut().zip(prod) {
                            *a = a.clone() - b;
                        }
                    }
                    acc.iter().map(&norm).fold(0.0, f64::max)
                })
                .collect()
        }
        match &self.store {
            Store::Exact(p) => residuals(p, |q| rational_to_f64(q).abs()),
            Store::Float(p) => residuals(p, |z| z.norm()),
        }
    }

    /// `f_k(1)`, `f_k'(1)` and `f_k''(1)` for
    /// `f_k = (1/2) sum_{j=1}^{k-1} m_{k-j} m_j`, with the expected
    /// `(k-1) m_1(0)^k` for the last.
    pub fn forcing_terminal(&self, k: usize) -> Result<[Coefficient; 4]> {
        self.check(k)?;
        fn at_one<F: Field>(p: &[Vec<F>], k: usize) -> [F; 4] {
            let mut f: Vec<F> = Vec::new();
            for j in 1..k {
                let prod = poly_mul(&p[k - j], &p[j]);
                if f.len() < prod.len() {
                    f.resize(prod.len(), F::zero());
                }
                for (a, b) in f.iter_mut().zip(prod) {
                    *a = a.clone() + b.div_usize(2);
                }
            }
            let get = |i: usize| f.get(i).cloned().unwrap_or_else(F::zero);
            // in tau: f(1) = c0, f'(1) = -c1, f''(1) = 2 c2
            let m1 = p.get(1).and_then(|q| q.get(1)).cloned().unwrap_or_else(F::zero);
            let mut power = F::one();
            for _ in 0..k {
                power = power * m1.clone();
            }
            let expected = power * F::from_usize(k.saturating_sub(1));
            [get(0), -get(1), get(2) * F::from_usize(2), expected]
        }
        Ok(match &self.store {
            Store::Exact(p) => at_one(p, k).map(Coefficient::Exact),
            Store::Float(p) => at_one(p, k).map(Coefficient::Float),
        })
    }
}

fn trim<F: Field>(mut v: Vec<F>) -> Vec<F> {
    while v.len() > 1 && v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

impl Serialize for MomentPolynomials {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let polys: Vec<Vec<Coefficient>> = (0..=self.kmax)
            .map(|k| self.t_coefficients(k).unwrap_or_default())
            .collect();
        let mut st = s.serialize_struct("MomentPolynomials", 3)?;
        st.serialize_field("kmax", &self.kmax)?;
        st.serialize_field("exact", &self.is_exact())?;
        st.serialize_field("polys", &polys)?;
        st.end()
    }
}

/// `lim_{t -> 1} m_k(t) / (1 - t) = -m_k'(1)` against `m_1(0)^k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TerminalLimit {
    pub k: usize,
    pub value: Coefficient,
    pub expected: Coefficient,
}

impl TerminalLimit {
    /// Exact equality in exact mode, relative `1e-9` otherwise.
    pub fn holds(&self) -> bool {
        match (&self.value, &self.expected) {
            (Coefficient::Exact(a), Coefficient::Exact(b)) => a == b,
            (a, b) => {
                let (a, b) = (a.to_complex(), b.to_complex());
                (a - b).norm() <= 1e-9 * b.norm().max(1.0)
            }
        }
    }
}

pub fn terminal_limits(mp: &MomentPolynomials) -> Result<Vec<TerminalLimit>> {
    if mp.kmax < 1 {
        return precondition("terminal limits need kmax >= 1");
    }
    let m1 = mp.tau_coefficient(1, 1, false)?;
    (1..=mp.kmax)
        .map(|k| {
            let value = match mp.slope_at_one(k)? {
                Coefficient::Exact(q) => Coefficient::Exact(-q),
                Coefficient::Float(z) => Coefficient::Float(-z),
            };
            let expected = match &m1 {
                Coefficient::Exact(q) => Coefficient::Exact(num_traits::pow(q.clone(), k)),
                Coefficient::Float(z) => Coefficient::Float(z.powu(k as u32)),
            };
            Ok(TerminalLimit { k, value, expected })
        })
        .collect()
}

/// `m_k(t) = (1/2 pi i) \oint z^k u(z, t) dz` on `|z| = radius` by the
/// trapezoid rule, doubling the node count until successive estimates agree
/// to `1e-10` relative.
pub fn moments_from_contour(
    u_eval: &(dyn Fn(Complex64, f64) -> Result<Complex64> + Sync),
    t: f64,
    radius: f64,
    kmax: usize,
) -> Result<Vec<Complex64>> {
    if !(radius > 0.0) {
        return precondition("contour radius must be positive");
    }
    const MAX_NODES: usize = 1 << 16;
    let mut nodes = 32usize.max((2 * kmax + 2).next_power_of_two());
    let mut values: Vec<Complex64> = circle_points(radius, nodes)
        .par_iter()
        .map(|&z| u_eval(z, t).map(|u| u * z))
        .collect::<Result<_>>()?;
    let mut previous = contour_estimate(&values, radius, kmax);
    loop {
        if nodes >= MAX_NODES {
            let diff = previous.iter().map(|m| m.norm()).fold(0.0, f64::max);
            return Err(Error::NonConvergence {
                iterations: nodes,
                best: previous,
                residual: diff,
            });
        }
        let doubled = 2 * nodes;
        // odd-indexed nodes of the refined circle
        let fresh: Vec<Complex64> = (0..nodes)
            .into_par_iter()
            .map(|j| {
                let z = Complex64::from_polar(radius, std::f64::consts::TAU * (2 * j + 1) as f64 / doubled as f64);
                u_eval(z, t).map(|u| u * z)
            })
            .collect::<Result<_>>()?;
        values = values.into_iter().zip(fresh).flat_map(|(a, b)| [a, b]).collect();
        nodes = doubled;
        let current = contour_estimate(&values, radius, kmax);
        let settled = current
            .iter()
            .zip(&previous)
            .all(|(a, b)| (a - b).norm() < 1e-10 * a.norm().max(1.0));
        if settled {
            return Ok(current);
        }
        previous = current;
    }
}

/// `m_k = (1/N) sum_j z_j^k (z_j u(z_j))` with `values[j] = z_j u(z_j)`.
fn contour_estimate(values: &[Complex64], radius: f64, kmax: usize) -> Vec<Complex64> {
    let n = values.len();
    (0..=kmax)
        .map(|k| {
            let sum: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, std::f64::consts::TAU * ((j * k) % n) as f64 / n as f64))
                .sum();
            sum * radius.powi(k as i32) / n as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Measure;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn exact(v: &[(i64, i64)]) -> InitialMoments {
        InitialMoments::Exact(v.iter().map(|&(n, d)| q(n, d)).collect())
    }

    fn coeffs(mp: &MomentPolynomials, k: usize) -> Vec<BigRational> {
        mp.t_coefficients(k)
            .unwrap()
            .into_iter()
            .map(|c| match c {
                Coefficient::Exact(q) => q,
                Coefficient::Float(_) => panic!("expected exact"),
            })
            .collect()
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3").unwrap(), q(3, 1));
        assert_eq!(parse_rational("-1/4").unwrap(), q(-1, 4));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("2.5e-3").unwrap(), q(1, 400));
        assert_eq!(parse_rational("1.5E2").unwrap(), q(150, 1));
        assert_eq!(parse_rational("-.5").unwrap(), q(-1, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn low_order_closed_forms() {
        let (a, b) = ((2, 3), (5, 7));
        let mp = evolve_moments(&exact(&[(1, 1), a, b]), 2).unwrap();
        assert_eq!(coeffs(&mp, 0), vec![q(1, 1), q(-1, 1)]);
        assert_eq!(coeffs(&mp, 1), vec![q(2, 3), q(-2, 3)]);
        // (m2 - m1^2)(1-t)^2 + m1^2 (1-t)
        let m1 = q(2, 3);
        let m2 = q(5, 7);
        let d = &m2 - &m1 * &m1;
        let want = vec![&d + &m1 * &m1, -(&d * q(2, 1)) - &m1 * &m1, d.clone()];
        assert_eq!(coeffs(&mp, 2), want);
    }

    #[test]
    fn semicircle_moments() {
        let m0 = InitialMoments::Exact(exact_moments(&MeasureSpec::Semicircle, 6).unwrap());
        let mp = evolve_moments(&m0, 6).unwrap();
        assert_eq!(coeffs(&mp, 2), vec![q(1, 4), q(-1, 2), q(1, 4)]);
        assert_eq!(coeffs(&mp, 4), vec![q(1, 8), q(-3, 8), q(3, 8), q(-1, 8)]);
        assert_eq!(coeffs(&mp, 3), vec![q(0, 1)]);
        assert_eq!(mp.degree(3).unwrap(), 0);
    }

    #[test]
    fn exact_moments_match_measures() {
        for spec in [
            MeasureSpec::Arcsine,
            MeasureSpec::Semicircle,
            MeasureSpec::MarchenkoPastur,
            MeasureSpec::Uniform,
            MeasureSpec::atoms(vec![Atom::real(-0.5, 0.25), Atom::real(1.5, 0.75)]),
        ] {
            let ex = exact_moments(&spec, 8).unwrap();
            let fl = spec.moments(8);
            for (a, b) in ex.iter().zip(fl) {
                assert!((rational_to_f64(a) - b.re).abs() < 1e-12 * b.norm().max(1.0), "{spec:?}");
            }
        }
        assert!(exact_moments(&MeasureSpec::atoms(vec![Atom::new(Complex64::i(), 1.0)]), 2).is_none());
    }

    #[test]
    fn terminal_limits_for_point_masses() {
        let ones = InitialMoments::Exact(vec![q(1, 1); 9]);
        let mp = evolve_moments(&ones, 8).unwrap();
        for lim in terminal_limits(&mp).unwrap() {
            assert!(lim.holds());
            assert_eq!(lim.value, Coefficient::Exact(q(1, 1)));
        }
        let even = InitialMoments::Exact(exact_moments(&MeasureSpec::Uniform, 8).unwrap());
        let mp = evolve_moments(&even, 8).unwrap();
        for lim in terminal_limits(&mp).unwrap() {
            assert!(lim.value.is_zero() && lim.holds());
        }
    }

    #[test]
    fn residual_and_forcing_conditions() {
        let m0 = exact(&[(1, 1), (1, 3), (-2, 5), (7, 2), (1, 9), (-3, 1)]);
        let mp = evolve_moments(&m0, 5).unwrap();
        assert!(mp.recursion_residual().iter().all(|&r| r == 0.0));
        for k in 2..=5 {
            let [f, df, ddf, want] = mp.forcing_terminal(k).unwrap();
            assert!(f.is_zero() && df.is_zero());
            assert_eq!(ddf, want);
        }
    }

    #[test]
    fn float_mode_and_degradation() {
        let m0 = InitialMoments::Float(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.2, 0.1),
            Complex64::new(0.3, -0.4),
            Complex64::new(-0.1, 0.2),
        ]);
        let mp = evolve_moments(&m0, 3).unwrap();
        assert!(!mp.is_exact());
        assert!(mp.recursion_residual().iter().all(|&r| r < 1e-14));
        for lim in terminal_limits(&mp).unwrap() {
            assert!(lim.holds());
        }
        let big = InitialMoments::Exact(vec![q(1, 1); EXACT_KMAX + 2]);
        assert!(!evolve_moments(&big, EXACT_KMAX + 1).unwrap().is_exact());
        assert!(evolve_moments(&big, EXACT_KMAX).unwrap().is_exact());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(evolve_moments(&exact(&[(1, 2), (0, 1)]), 1).is_err());
        assert!(evolve_moments(&exact(&[(1, 1)]), 3).is_err());
        let mp = evolve_moments(&exact(&[(1, 1)]), 0).unwrap();
        assert!(terminal_limits(&mp).is_err());
        assert!(mp.evaluate(1, 0.5).is_err());
    }

    #[test]
    fn contour_point_mass() {
        let u = |z: Complex64, t: f64| Ok((1.0 - t) / z);
        let m = moments_from_contour(&u, 0.3, 2.0, 5).unwrap();
        assert!((m[0] - 0.7).norm() < 1e-14);
        assert!(m[1..].iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn contour_matches_exact_semicircle_flow() {
        let u = |z: Complex64, t: f64| {
            let c = (1.0f64 - t).sqrt();
            Ok(2.0 * (1.0 - t) / (z + crate::measure::sqrt_segment(z, -c, c)))
        };
        let mp = evolve_moments(
            &InitialMoments::Exact(exact_moments(&MeasureSpec::Semicircle, 8).unwrap()),
            8,
        )
        .unwrap();
        for t in [0.1, 0.5, 0.9] {
            let m = moments_from_contour(&u, t, 3.0, 8).unwrap();
            for (k, mk) in m.iter().enumerate() {
                assert!((mk - mp.evaluate(k, t).unwrap()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn serializes_exact_coefficients_as_strings() {
        let mp = evolve_moments(&exact(&[(1, 1), (1, 2)]), 1).unwrap();
        let json = serde_json::to_value(&mp).unwrap();
        assert_eq!(json["polys"][1], serde_json::json!(["1/2", "-1/2"]));
        assert_eq!(json["exact"], serde_json::json!(true));
    }

    #[test]
    fn exact_evaluation() {
        let mp = evolve_moments(&exact(&[(1, 1), (1, 2), (1, 3)]), 2).unwrap();
        let v = mp.evaluate_exact(2, &q(1, 2)).unwrap();
        // (1/3 - 1/4)/4 + (1/4)/2
        assert_eq!(v, Coefficient::Exact(q(1, 48) + q(1, 8)));
        assert!((mp.evaluate(2, 0.5).unwrap().re - (1.0 / 48.0 + 0.125)).abs() < 1e-15);
    }
}
