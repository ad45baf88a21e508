//! Scalar fields used throughout the crate.
//!
//! Two backends implement [`Scalar`]: [`GaussianRational`] (exact arithmetic
//! in Q(i) on arbitrary-precision rationals) and [`Complex64`] (IEEE double
//! complex). Algorithms are generic over the trait, so a single computation
//! can never mix backends.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default zero tolerance for the floating backend.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Exact,
    Float,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Exact => f.write_str("exact"),
            Backend::Float => f.write_str("float"),
        }
    }
}

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const BACKEND: Backend;

    fn zero() -> Self;
    fn one() -> Self;
    fn imag_unit() -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_gaussian(value: &GaussianRational) -> Self;

    fn conj(&self) -> Self;
    /// Multiplicative inverse; `None` only for an exact zero.
    fn inv(&self) -> Option<Self>;
    /// Principal square root. The exact backend only succeeds on perfect squares of Q(i).
    fn sqrt(&self) -> Option<Self>;
    fn magnitude(&self) -> f64;
    fn to_complex(&self) -> Complex64;

    /// Exact backend: `self == 0`, `tol` ignored. Float backend: `|self| <= tol`.
    fn is_zero_within(&self, tol: f64) -> bool;

    fn from_i64(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    fn is_exact() -> bool {
        Self::BACKEND == Backend::Exact
    }

    /// `|self|^2` as a scalar of the same backend.
    fn norm_sqr(&self) -> Self {
        self.clone() * self.conj()
    }

    fn real_part(&self) -> Self {
        (self.clone() + self.conj()) * Self::from_ratio(1, 2)
    }

    fn imag_part(&self) -> Self {
        (self.clone() - self.conj()) * (Self::imag_unit() * Self::from_ratio(-1, 2))
    }

    /// Orders by modulus, ties broken lexicographically on (re, im).
    fn canonical_cmp(&self, other: &Self, tol: f64) -> Ordering;
}

/// Exact backend zero test, tolerance test on the float backend.
pub fn is_zero<S: Scalar>(s: &S, tol: f64) -> bool {
    s.is_zero_within(tol)
}

/// Gaussian rational `re + im*i` with arbitrary-precision components.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(
            BigRational::from_integer(re.into()),
            BigRational::from_integer(im.into()),
        )
    }

    pub fn from_parts(re: (i64, i64), im: (i64, i64)) -> Self {
        Self::new(
            BigRational::new(re.0.into(), re.1.into()),
            BigRational::new(im.0.into(), im.1.into()),
        )
    }

    pub fn modulus_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    fn to_f64_parts(&self) -> (f64, f64) {
        (rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // to_f64 gives up on huge numerators/denominators; rescale by bit length
        let shift = q.numer().bits() as i64 - q.denom().bits() as i64;
        let scaled = if shift > 0 {
            q / BigRational::from_integer(BigInt::one() << shift as usize)
        } else {
            q * BigRational::from_integer(BigInt::one() << (-shift) as usize)
        };
        scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
    })
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

impl Add for GaussianRational {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for GaussianRational {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Mul for GaussianRational {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        match (self.im.is_zero(), rhs.im.is_zero()) {
            (true, true) => return Self::new(self.re * rhs.re, self.im),
            (true, false) => return Self::new(&self.re * &rhs.re, self.re * rhs.im),
            (false, true) => return Self::new(&self.re * &rhs.re, self.im * rhs.re),
            (false, false) => {}
        }
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        Self::new(re, im)
    }
}

impl Div for GaussianRational {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = rhs.inv().expect("division by zero Gaussian rational");
        #[allow(clippy::suspicious_arithmetic_impl)]
        let q = self * inv;
        q
    }
}

impl Neg for GaussianRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl fmt::Display for GaussianRational {
    /// Canonical lowest-terms form: `p/q`, `r/s*i` or `p/q+r/s*i`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let imag = |im: &BigRational| -> String {
            if im.is_one() {
                "i".to_string()
            } else {
                format!("{im}*i")
            }
        };
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            if self.im.is_negative() {
                return write!(f, "-{}", imag(&-self.im.clone()));
            }
            return write!(f, "{}", imag(&self.im));
        }
        if self.im.is_negative() {
            write!(f, "{}-{}", self.re, imag(&-self.im.clone()))
        } else {
            write!(f, "{}+{}", self.re, imag(&self.im))
        }
    }
}

impl Scalar for GaussianRational {
    const BACKEND: Backend = Backend::Exact;

    fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    fn one() -> Self {
        Self::new(BigRational::one(), BigRational::zero())
    }

    fn imag_unit() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::new(
            BigRational::new(num.into(), den.into()),
            BigRational::zero(),
        )
    }

    fn from_gaussian(value: &GaussianRational) -> Self {
        value.clone()
    }

    fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    fn inv(&self) -> Option<Self> {
        let m = self.modulus_sqr();
        if m.is_zero() {
            return None;
        }
        Some(Self::new(&self.re / &m, -&self.im / &m))
    }

    fn sqrt(&self) -> Option<Self> {
        if self.im.is_zero() {
            return if self.re.is_negative() {
                rational_sqrt(&-self.re.clone()).map(|y| Self::new(BigRational::zero(), y))
            } else {
                rational_sqrt(&self.re).map(|x| Self::new(x, BigRational::zero()))
            };
        }
        let r = rational_sqrt(&self.modulus_sqr())?;
        let two = BigRational::from_integer(2.into());
        let x = rational_sqrt(&((&self.re + &r) / &two))?;
        let y = &self.im / (&two * &x);
        Some(Self::new(x, y))
    }

    fn magnitude(&self) -> f64 {
        let (re, im) = self.to_f64_parts();
        re.hypot(im)
    }

    fn to_complex(&self) -> Complex64 {
        let (re, im) = self.to_f64_parts();
        Complex64::new(re, im)
    }

    fn is_zero_within(&self, _tol: f64) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn canonical_cmp(&self, other: &Self, _tol: f64) -> Ordering {
        self.modulus_sqr()
            .cmp(&other.modulus_sqr())
            .then_with(|| self.re.cmp(&other.re))
            .then_with(|| self.im.cmp(&other.im))
    }
}

impl Scalar for Complex64 {
    const BACKEND: Backend = Backend::Float;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn from_gaussian(value: &GaussianRational) -> Self {
        value.to_complex()
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn inv(&self) -> Option<Self> {
        if self.re == 0.0 && self.im == 0.0 {
            None
        } else {
            Some(Complex64::inv(self))
        }
    }

    fn sqrt(&self) -> Option<Self> {
        Some(Complex64::sqrt(*self))
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }

    fn is_zero_within(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    fn canonical_cmp(&self, other: &Self, tol: f64) -> Ordering {
        let cmp_tol = |a: f64, b: f64| {
            if (a - b).abs() <= tol {
                Ordering::Equal
            } else {
                a.total_cmp(&b)
            }
        };
        cmp_tol(self.norm(), other.norm())
            .then_with(|| cmp_tol(self.re, other.re))
            .then_with(|| cmp_tol(self.im, other.im))
    }
}

/// The deformation parameter, kept nonzero, with its unit-circle flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Theta<S> {
    value: S,
    on_unit_circle: bool,
}

impl<S: Scalar> Theta<S> {
    pub fn new(value: S, tol: f64) -> Result<Self> {
        if value.is_zero_within(tol) || value.inv().is_none() {
            return Err(Error::ThetaZero);
        }
        let on_unit_circle = (value.norm_sqr() - S::one()).is_zero_within(tol);
        Ok(Self {
            value,
            on_unit_circle,
        })
    }

    pub fn value(&self) -> &S {
        &self.value
    }

    pub fn on_unit_circle(&self) -> bool {
        self.on_unit_circle
    }

    pub fn inverse(&self) -> S {
        self.value.inv().expect("theta is nonzero")
    }

    /// `theta + 1/theta`.
    pub fn lambda(&self) -> S {
        self.value.clone() + self.inverse()
    }

    /// True at the Klein points theta = +1 or -1.
    pub fn is_klein_point(&self, tol: f64) -> bool {
        (self.value.clone() - S::one()).is_zero_within(tol)
            || (self.value.clone() + S::one()).is_zero_within(tol)
    }
}

impl<S: Scalar> fmt::Display for Theta<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.value, f)
    }
}

/// A parsed theta under whichever backend was requested.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyTheta {
    Exact(Theta<GaussianRational>),
    Float(Theta<Complex64>),
}

impl AnyTheta {
    pub fn backend(&self) -> Backend {
        match self {
            AnyTheta::Exact(_) => Backend::Exact,
            AnyTheta::Float(_) => Backend::Float,
        }
    }

    pub fn on_unit_circle(&self) -> bool {
        match self {
            AnyTheta::Exact(t) => t.on_unit_circle(),
            AnyTheta::Float(t) => t.on_unit_circle(),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            AnyTheta::Exact(t) => t.value().to_complex(),
            AnyTheta::Float(t) => *t.value(),
        }
    }
}

impl fmt::Display for AnyTheta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyTheta::Exact(t) => t.fmt(f),
            AnyTheta::Float(t) => t.fmt(f),
        }
    }
}

/// Parses theta in one of the forms `a/b+c/d*i`, `x+yi` (decimals allowed) or
/// `exp(i*pi*p/q)`; the last one only under the float backend.
pub fn parse_theta(text: &str, backend: Backend) -> Result<AnyTheta> {
    parse_theta_with_tol(text, backend, DEFAULT_TOL)
}

pub fn parse_theta_with_tol(text: &str, backend: Backend, tol: f64) -> Result<AnyTheta> {
    match (parse_complex_literal(text)?, backend) {
        (Literal::Gaussian(g), Backend::Exact) => Ok(AnyTheta::Exact(Theta::new(g, tol)?)),
        (Literal::Gaussian(g), Backend::Float) => {
            Ok(AnyTheta::Float(Theta::new(g.to_complex(), tol)?))
        }
        (Literal::Polar(_), Backend::Exact) => Err(Error::ExactNeedsGaussian),
        (Literal::Polar(angle), Backend::Float) => Ok(AnyTheta::Float(Theta::new(
            Complex64::from_polar(1.0, angle),
            tol,
        )?)),
    }
}

/// Parses a Gaussian-rational literal (no `exp` form).
pub fn parse_gaussian(text: &str) -> Result<GaussianRational> {
    match parse_complex_literal(text)? {
        Literal::Gaussian(g) => Ok(g),
        Literal::Polar(_) => Err(Error::ExactNeedsGaussian),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Gaussian(GaussianRational),
    /// `exp(i*angle)`
    Polar(f64),
}

pub fn parse_complex_literal(text: &str) -> Result<Literal> {
    let mut cur = Cursor::new(text);
    if cur.is_empty() {
        return Err(cur.error("empty value"));
    }
    if cur.eat_str("exp(") {
        let angle = cur.polar_angle()?;
        if !cur.eat(')') {
            return Err(cur.error("expected ')'"));
        }
        cur.expect_end()?;
        return Ok(Literal::Polar(angle));
    }
    let value = cur.gaussian_sum()?;
    cur.expect_end()?;
    Ok(Literal::Gaussian(value))
}

/// Character cursor over the non-whitespace characters of the input,
/// remembering 1-based original columns for diagnostics.
struct Cursor {
    chars: Vec<(usize, char)>,
    pos: usize,
    end_column: usize,
}

impl Cursor {
    fn new(text: &str) -> Self {
        let chars: Vec<(usize, char)> = text
            .chars()
            .enumerate()
            .filter(|(_, c)| !c.is_whitespace())
            .map(|(i, c)| (i + 1, c))
            .collect();
        Self {
            chars,
            pos: 0,
            end_column: text.chars().count() + 1,
        }
    }

    fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    fn column(&self) -> usize {
        self.chars
            .get(self.pos)
            .map(|(c, _)| *c)
            .unwrap_or(self.end_column)
    }

    fn error(&self, message: &str) -> Error {
        Error::Parse {
            column: self.column(),
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|(_, c)| *c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        let n = s.chars().count();
        let matches = self.chars.len() >= self.pos + n
            && self.chars[self.pos..self.pos + n]
                .iter()
                .map(|(_, c)| *c)
                .eq(s.chars());
        if matches {
            self.pos += n;
        }
        matches
    }

    fn expect_end(&self) -> Result<()> {
        if self.pos == self.chars.len() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    fn decimal(&mut self) -> Result<BigRational> {
        let start = self.pos;
        let mut digits = String::new();
        let mut frac_len = 0usize;
        let mut seen_dot = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                digits.push(c);
                if seen_dot {
                    frac_len += 1;
                }
                self.pos += 1;
            } else if c == '.' && !seen_dot {
                seen_dot = true;
                self.pos += 1;
            } else {
                break;
            }
        }
        if digits.is_empty() {
            self.pos = start;
            return Err(self.error("expected a number"));
        }
        let numer: BigInt = digits.parse().expect("ascii digits");
        let denom = num_traits::pow(BigInt::from(10), frac_len);
        Ok(BigRational::new(numer, denom))
    }

    /// `number ['/' number]`
    fn rational(&mut self) -> Result<BigRational> {
        let numer = self.decimal()?;
        if self.eat('/') {
            let denom = self.decimal()?;
            if denom.is_zero() {
                return Err(self.error("zero denominator"));
            }
            return Ok(numer / denom);
        }
        Ok(numer)
    }

    fn gaussian_sum(&mut self) -> Result<GaussianRational> {
        let mut total = GaussianRational::zero();
        let mut first = true;
        loop {
            let negative = if self.eat('-') {
                true
            } else if self.eat('+') || first {
                false
            } else if self.pos == self.chars.len() {
                break;
            } else {
                return Err(self.error("expected '+' or '-'"));
            };
            first = false;
            let mut term = self.gaussian_term()?;
            if negative {
                term = -term;
            }
            total = total + term;
            if self.pos == self.chars.len() || self.peek() == Some(')') {
                break;
            }
        }
        Ok(total)
    }

    /// `'i' | rational [['*'] 'i']`
    fn gaussian_term(&mut self) -> Result<GaussianRational> {
        if self.eat('i') {
            return Ok(GaussianRational::imag_unit());
        }
        let q = self.rational()?;
        let imaginary = if self.eat('*') {
            if !self.eat('i') {
                return Err(self.error("expected 'i' after '*'"));
            }
            true
        } else {
            self.eat('i')
        };
        Ok(if imaginary {
            GaussianRational::new(BigRational::zero(), q)
        } else {
            GaussianRational::new(q, BigRational::zero())
        })
    }

    /// `['-'] 'i*pi' ['*' rational] ['/' rational]`
    fn polar_angle(&mut self) -> Result<f64> {
        let sign = if self.eat('-') { -1.0 } else { 1.0 };
        if !self.eat_str("i*pi") {
            return Err(self.error("expected 'i*pi'"));
        }
        let mut factor = BigRational::one();
        if self.eat('*') {
            factor = self.decimal()?;
        }
        if self.eat('/') {
            let denom = self.decimal()?;
            if denom.is_zero() {
                return Err(self.error("zero denominator"));
            }
            factor /= denom;
        }
        Ok(sign * std::f64::consts::PI * rational_to_f64(&factor))
    }
}
