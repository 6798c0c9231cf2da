//! Exact arithmetic in multiquadratic fields ℚ(√d₁, …, √d_m).
//!
//! An element is stored as a finite sum `Σ q_k √k` over squarefree positive
//! integers `k`, with `k = 1` carrying the rational part. Products of
//! radicals are normalised on the fly (`√2·√5 = √10`, `√6·√10 = 2√15`), so
//! two elements are equal exactly when their coefficient maps are equal.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Rem, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{EacError, Result};

/// Exact element of a multiquadratic number field.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiQuad {
    // radicand (squarefree, 1 = rational part) -> nonzero coefficient
    terms: BTreeMap<u64, BigRational>,
}

/// Complex numbers with exact multiquadratic real and imaginary parts.
pub type ComplexMQ = Complex<MultiQuad>;

fn squarefree_decompose(n: u64) -> (u64, u64) {
    // n = s² · k with k squarefree; returns (s, k)
    let mut s = 1u64;
    let mut k = 1u64;
    let mut rest = n;
    let mut p = 2u64;
    while p * p <= rest {
        let mut e = 0;
        while rest.is_multiple_of(p) {
            rest /= p;
            e += 1;
        }
        for _ in 0..e / 2 {
            s *= p;
        }
        if e % 2 == 1 {
            k *= p;
        }
        p += 1;
    }
    k *= rest;
    (s, k)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `√a · √b = coef · √key` for squarefree `a`, `b`.
fn mul_radicands(a: u64, b: u64) -> (u64, u64) {
    let g = a.gcd(&b);
    let key = (a / g)
        .checked_mul(b / g)
        .expect("radicand overflow in multiquadratic product");
    (g, key)
}

impl MultiQuad {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn from_rational(q: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(1, q);
        }
        Self { terms }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `√n` for any `n ≥ 0`, with square factors pulled out.
    pub fn sqrt(n: u64) -> Self {
        if n == 0 {
            return Self::zero();
        }
        let (s, k) = squarefree_decompose(n);
        let mut terms = BTreeMap::new();
        terms.insert(k, BigRational::from_integer(BigInt::from(s)));
        Self { terms }
    }

    /// `q · √n`.
    pub fn term(q: BigRational, n: u64) -> Self {
        Self::sqrt(n).scale(&q)
    }

    pub fn is_rational(&self) -> bool {
        self.terms.keys().all(|&k| k == 1)
    }

    /// Rational part if the element is rational.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.is_rational() {
            Some(self.coefficient(1))
        } else {
            None
        }
    }

    /// Coefficient of `√key` (zero if absent).
    pub fn coefficient(&self, key: u64) -> BigRational {
        self.terms.get(&key).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Radicands present, ascending.
    pub fn keys(&self) -> impl Iterator<Item = u64> + '_ {
        self.terms.keys().copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &BigRational)> + '_ {
        self.terms.iter().map(|(k, q)| (*k, q))
    }

    /// Prime generators of the smallest multiquadratic field containing the element.
    pub fn field_generators(&self) -> Vec<u64> {
        let mut ps: Vec<u64> = self.terms.keys().flat_map(|&k| prime_factors(k)).collect();
        ps.sort_unstable();
        ps.dedup();
        ps
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, c)| (*k, c * q)).collect(),
        }
    }

    fn add_term(&mut self, key: u64, q: BigRational) {
        if q.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(BigRational::zero);
        *entry += q;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Image under the field automorphism `√p ↦ −√p`.
    pub fn conjugate_at(&self, p: u64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| if k % p == 0 { (*k, -c) } else { (*k, c.clone()) })
                .collect(),
        }
    }

    /// Splits `x = a + b·√p` with `a`, `b` free of `√p`.
    fn split_at(&self, p: u64) -> (Self, Self) {
        let mut a = Self::zero();
        let mut b = Self::zero();
        for (k, c) in &self.terms {
            if k % p == 0 {
                b.terms.insert(k / p, c.clone());
            } else {
                a.terms.insert(*k, c.clone());
            }
        }
        (a, b)
    }

    fn largest_prime(&self) -> Option<u64> {
        self.field_generators().last().copied()
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let mut num = Self::one();
        let mut den = self.clone();
        while let Some(p) = den.largest_prime() {
            let c = den.conjugate_at(p);
            num = &num * &c;
            den = &den * &c;
        }
        let r = den.coefficient(1);
        Some(num.scale(&r.recip()))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        let inv = rhs.inv().ok_or(EacError::DivisionByZero)?;
        Ok(self * &inv)
    }

    /// Exact sign: −1, 0 or 1.
    pub fn signum_exact(&self) -> i8 {
        if self.is_zero() {
            return 0;
        }
        let Some(p) = self.largest_prime() else {
            let c = self.coefficient(1);
            return if c.is_positive() { 1 } else { -1 };
        };
        let (a, b) = self.split_at(p);
        let sa = a.signum_exact();
        let sb = b.signum_exact();
        if sa == 0 {
            return sb;
        }
        if sb == 0 || sa == sb {
            return sa;
        }
        // opposite signs: compare a² with p·b²
        let pb = BigRational::from_integer(BigInt::from(p));
        let d = &(&a * &a) - &(&b * &b).scale(&pb);
        sa * d.signum_exact()
    }

    pub fn abs(&self) -> Self {
        if self.signum_exact() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| c.to_f64().unwrap_or(f64::NAN) * (*k as f64).sqrt())
            .sum()
    }
}

impl Zero for MultiQuad {
    fn zero() -> Self {
        MultiQuad::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for MultiQuad {
    fn one() -> Self {
        MultiQuad::one()
    }
}

impl<'a> Add<&'a MultiQuad> for &'a MultiQuad {
    type Output = MultiQuad;
    fn add(self, rhs: &MultiQuad) -> MultiQuad {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a MultiQuad> for &'a MultiQuad {
    type Output = MultiQuad;
    fn sub(self, rhs: &MultiQuad) -> MultiQuad {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a MultiQuad> for &'a MultiQuad {
    type Output = MultiQuad;
    fn mul(self, rhs: &MultiQuad) -> MultiQuad {
        let mut out = MultiQuad::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                let (g, key) = mul_radicands(*ka, *kb);
                out.add_term(key, ca * cb * BigInt::from(g));
            }
        }
        out
    }
}

impl<'a> Div<&'a MultiQuad> for &'a MultiQuad {
    type Output = MultiQuad;
    fn div(self, rhs: &MultiQuad) -> MultiQuad {
        self.checked_div(rhs).expect("MultiQuad division by zero")
    }
}

macro_rules! forward_by_value {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr for MultiQuad {
            type Output = MultiQuad;
            fn $m(self, rhs: MultiQuad) -> MultiQuad {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a MultiQuad> for MultiQuad {
            type Output = MultiQuad;
            fn $m(self, rhs: &MultiQuad) -> MultiQuad {
                (&self).$m(rhs)
            }
        }
    )*};
}
forward_by_value!(Add::add, Sub::sub, Mul::mul, Div::div);

/// Euclidean remainder in a field: always zero.
impl Rem for MultiQuad {
    type Output = MultiQuad;
    fn rem(self, rhs: MultiQuad) -> MultiQuad {
        assert!(!rhs.is_zero(), "MultiQuad remainder by zero");
        MultiQuad::zero()
    }
}

impl Neg for MultiQuad {
    type Output = MultiQuad;
    fn neg(self) -> MultiQuad {
        MultiQuad {
            terms: self.terms.into_iter().map(|(k, c)| (k, -c)).collect(),
        }
    }
}

impl Neg for &MultiQuad {
    type Output = MultiQuad;
    fn neg(self) -> MultiQuad {
        -self.clone()
    }
}

impl AddAssign<&MultiQuad> for MultiQuad {
    fn add_assign(&mut self, rhs: &MultiQuad) {
        for (k, c) in &rhs.terms {
            self.add_term(*k, c.clone());
        }
    }
}

impl SubAssign<&MultiQuad> for MultiQuad {
    fn sub_assign(&mut self, rhs: &MultiQuad) {
        for (k, c) in &rhs.terms {
            self.add_term(*k, -c.clone());
        }
    }
}

impl MulAssign<&MultiQuad> for MultiQuad {
    fn mul_assign(&mut self, rhs: &MultiQuad) {
        *self = &*self * rhs;
    }
}

impl PartialOrd for MultiQuad {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiQuad {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self - other).signum_exact() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }
}

impl ToPrimitive for MultiQuad {
    fn to_i64(&self) -> Option<i64> {
        self.as_rational().and_then(|q| q.to_integer().to_i64())
    }
    fn to_u64(&self) -> Option<u64> {
        self.as_rational().and_then(|q| q.to_integer().to_u64())
    }
    fn to_f64(&self) -> Option<f64> {
        Some(MultiQuad::to_f64(self))
    }
}

impl Num for MultiQuad {
    type FromStrRadixErr = EacError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self> {
        if radix != 10 {
            return Err(EacError::Parse {
                literal: s.to_string(),
                reason: "only radix 10 is supported".into(),
            });
        }
        s.parse()
    }
}

impl From<i64> for MultiQuad {
    fn from(n: i64) -> Self {
        MultiQuad::from_int(n)
    }
}

impl From<BigRational> for MultiQuad {
    fn from(q: BigRational) -> Self {
        MultiQuad::from_rational(q)
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for MultiQuad {
    /// Canonical rendering: terms by descending radicand, rational part last,
    /// e.g. `2*sqrt(5)+2*sqrt(2)` or `-1/2*sqrt(3)+1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (i, (k, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if neg {
                out.push('-');
            } else if i > 0 {
                out.push('+');
            }
            if *k == 1 {
                out.push_str(&fmt_rational(&mag));
            } else if mag.is_one() {
                out.push_str(&format!("sqrt({k})"));
            } else {
                out.push_str(&format!("{}*sqrt({k})", fmt_rational(&mag)));
            }
        }
        write!(f, "{out}")
    }
}

impl fmt::Debug for MultiQuad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiQuad({self})")
    }
}

// ---------------------------------------------------------------------------
// literal parsing

struct Lexer<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            chars: src.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        }
    }

    fn err(&self, reason: impl Into<String>) -> EacError {
        EacError::Parse {
            literal: self.src.to_string(),
            reason: reason.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Option<BigInt> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().ok()
    }

    /// factor := int ['/' int] | 'sqrt(' int ')' | 'i'
    fn factor(&mut self) -> Result<(ComplexMQ, bool)> {
        if self.eat('i') {
            return Ok((Complex::new(MultiQuad::zero(), MultiQuad::one()), true));
        }
        if self.chars[self.pos..].starts_with(&['s', 'q', 'r', 't', '(']) {
            self.pos += 5;
            let n = self.digits().ok_or_else(|| self.err("expected integer in sqrt(..)"))?;
            if !self.eat(')') {
                return Err(self.err("missing `)`"));
            }
            let n = n.to_u64().ok_or_else(|| self.err("radicand out of range"))?;
            return Ok((Complex::new(MultiQuad::sqrt(n), MultiQuad::zero()), false));
        }
        let num = self.digits().ok_or_else(|| self.err(format!("unexpected token at {}", self.pos)))?;
        let den = if self.eat('/') {
            self.digits().ok_or_else(|| self.err("expected denominator"))?
        } else {
            BigInt::one()
        };
        if den.is_zero() {
            return Err(self.err("zero denominator"));
        }
        let q = MultiQuad::from_rational(BigRational::new(num, den));
        Ok((Complex::new(q, MultiQuad::zero()), false))
    }

    fn term(&mut self) -> Result<(ComplexMQ, bool)> {
        let (mut acc, mut imag) = self.factor()?;
        while self.eat('*') {
            let (f, i) = self.factor()?;
            imag |= i;
            acc = acc * f;
        }
        Ok((acc, imag))
    }

    fn expr(&mut self) -> Result<(ComplexMQ, bool)> {
        let mut acc = Complex::new(MultiQuad::zero(), MultiQuad::zero());
        let mut imag = false;
        let mut first = true;
        loop {
            let neg = if self.eat('-') {
                true
            } else {
                if !self.eat('+') && !first {
                    break;
                }
                false
            };
            let (t, i) = self.term()?;
            imag |= i;
            acc = if neg { acc - t } else { acc + t };
            first = false;
            if self.peek().is_none() {
                break;
            }
        }
        if self.peek().is_some() {
            return Err(self.err(format!("trailing input at {}", self.pos)));
        }
        Ok((acc, imag))
    }
}

/// Parses a complex literal such as `1/2*sqrt(2) - 3*i` or `sqrt(5)*i`.
pub fn parse_complex(s: &str) -> Result<ComplexMQ> {
    let mut lx = Lexer::new(s);
    if lx.chars.is_empty() {
        return Err(lx.err("empty literal"));
    }
    lx.expr().map(|(z, _)| z)
}

impl FromStr for MultiQuad {
    type Err = EacError;
    fn from_str(s: &str) -> Result<Self> {
        let mut lx = Lexer::new(s);
        if lx.chars.is_empty() {
            return Err(lx.err("empty literal"));
        }
        let (z, imag) = lx.expr()?;
        if imag {
            return Err(lx.err("imaginary unit not allowed in a real literal"));
        }
        Ok(z.re)
    }
}

/// Canonical rendering of a complex multiquadratic number.
pub fn format_complex(z: &ComplexMQ) -> String {
    let re = (!z.re.is_zero()).then(|| z.re.to_string());
    let im = (!z.im.is_zero()).then(|| {
        if z.im.is_one() {
            "i".to_string()
        } else if (-z.im.clone()).is_one() {
            "-i".to_string()
        } else if z.im.terms.len() == 1 {
            format!("{}*i", z.im)
        } else {
            format!("({})*i", z.im)
        }
    });
    match (re, im) {
        (None, None) => "0".into(),
        (Some(r), None) => r,
        (None, Some(i)) => i,
        (Some(r), Some(i)) if i.starts_with('-') => format!("{r}{i}"),
        (Some(r), Some(i)) => format!("{r}+{i}"),
    }
}

pub fn complex_to_f64(z: &ComplexMQ) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mq(s: &str) -> MultiQuad {
        s.parse().unwrap()
    }

    #[test]
    fn sqrt2_squared_is_two() {
        let r2 = MultiQuad::sqrt(2);
        assert_eq!(&r2 * &r2, MultiQuad::from_int(2));
    }

    #[test]
    fn conjugate_product() {
        let a = mq("1+sqrt(2)");
        let b = mq("1-sqrt(2)");
        assert_eq!(a * b, MultiQuad::from_int(-1));
    }

    #[test]
    fn radicand_normalisation() {
        let p = MultiQuad::sqrt(2) * MultiQuad::sqrt(5);
        assert_eq!(p, MultiQuad::sqrt(10));
        assert_eq!(p.keys().collect::<Vec<_>>(), vec![10]);
        // (√2·√5)² computed on squares: 2·5
        assert_eq!(&p * &p, MultiQuad::from_int(10));
        assert_eq!(MultiQuad::sqrt(6) * MultiQuad::sqrt(10), mq("2*sqrt(15)"));
        assert_eq!(MultiQuad::sqrt(8), mq("2*sqrt(2)"));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(
            MultiQuad::one().checked_div(&MultiQuad::zero()),
            Err(EacError::DivisionByZero)
        );
    }

    #[test]
    fn inverse_in_biquadratic_field() {
        let x = mq("1+sqrt(2)+sqrt(3)+sqrt(6)");
        let y = x.inv().unwrap();
        assert_eq!(&x * &y, MultiQuad::one());
    }

    #[test]
    fn exact_sign() {
        assert_eq!(mq("sqrt(2)-1").signum_exact(), 1);
        assert_eq!(mq("3/2-sqrt(2)").signum_exact(), 1);
        assert_eq!(mq("1414/1000-sqrt(2)").signum_exact(), -1);
        assert_eq!(mq("sqrt(5)-sqrt(2)-1/2*sqrt(3)").signum_exact(), -1);
        // √2 + √3 − √10 ≈ −0.0160
        assert_eq!(mq("sqrt(2)+sqrt(3)-sqrt(10)").signum_exact(), -1);
        assert_eq!(mq("sqrt(2)+sqrt(3)-sqrt(10)+1/100").signum_exact(), -1);
        assert_eq!(mq("sqrt(2)+sqrt(3)-sqrt(10)+1/50").signum_exact(), 1);
        assert!(mq("sqrt(2)") < mq("3/2"));
    }

    #[test]
    fn canonical_display() {
        let x = mq("2*sqrt(2)+2*sqrt(5)");
        assert_eq!(x.to_string(), "2*sqrt(5)+2*sqrt(2)");
        assert_eq!(mq("1 - 1/2*sqrt(3)").to_string(), "-1/2*sqrt(3)+1");
        assert_eq!(mq("-sqrt(7)").to_string(), "-sqrt(7)");
        assert_eq!(MultiQuad::zero().to_string(), "0");
        assert_eq!(x.to_string().parse::<MultiQuad>().unwrap(), x);
    }

    #[test]
    fn complex_literals() {
        let z = parse_complex("1/2 + sqrt(2)*i").unwrap();
        assert_eq!(z.re, MultiQuad::from_ratio(1, 2));
        assert_eq!(z.im, MultiQuad::sqrt(2));
        assert_eq!(format_complex(&z), "1/2+sqrt(2)*i");
        assert!("i".parse::<MultiQuad>().is_err());
        assert!("2**3".parse::<MultiQuad>().is_err());
        assert!("1/0".parse::<MultiQuad>().is_err());
        assert!("".parse::<MultiQuad>().is_err());
    }
}
