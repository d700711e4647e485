//! Exact complex rational functions over named real parameters.
//!
//! A [`Scalar`] is kept as `(re + i·im) / den` with `re`, `im`, `den` in
//! `Q[params]`, `den` real with grlex-leading coefficient 1, and
//! `gcd(re, im, den) = 1`. Every complex rational function of real
//! parameters has exactly one such representation, so structural equality
//! is mathematical equality.

mod poly;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub use poly::{Monomial, Param, Poly};
pub(crate) use poly::{format_term, int, join_terms, rational_to_string};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("no value assigned to parameter `{0}`")]
    MissingParameter(String),
    #[error("pole: denominator vanishes at the given assignment")]
    Pole,
}

/// Exact complex rational value.
pub type ComplexRational = Complex<BigRational>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    re: Poly,
    im: Poly,
    den: Poly,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar {
            re: Poly::zero(),
            im: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        Scalar::from_rational(BigRational::one())
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Scalar {
            re: Poly::zero(),
            im: Poly::one(),
            den: Poly::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_rational(int(n))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar {
            re: Poly::constant(r),
            im: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Scalar::from_rational(BigRational::new(n.into(), d.into()))
    }

    pub fn complex(re: BigRational, im: BigRational) -> Self {
        Scalar {
            re: Poly::constant(re),
            im: Poly::constant(im),
            den: Poly::one(),
        }
    }

    pub fn param(name: &str) -> Self {
        Scalar::from_poly(Poly::var(Param::new(name)))
    }

    pub fn from_poly(p: Poly) -> Self {
        Scalar {
            re: p,
            im: Poly::zero(),
            den: Poly::one(),
        }
    }

    /// Build `(re + i·im) / den` and bring it to canonical form.
    pub fn from_parts(re: Poly, im: Poly, den: Poly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Scalar::canonical(re, im, den))
    }

    fn canonical(re: Poly, im: Poly, den: Poly) -> Self {
        if re.is_zero() && im.is_zero() {
            return Scalar::zero();
        }
        if let Some(c) = den.as_constant() {
            if c.is_one() {
                return Scalar { re, im, den };
            }
            let inv = c.recip();
            return Scalar {
                re: re.scale(&inv),
                im: im.scale(&inv),
                den: Poly::one(),
            };
        }
        let g = re.gcd(&im).gcd(&den);
        let (re, im, den) = if g.is_one() {
            (re, im, den)
        } else {
            (
                re.div_exact(&g).expect("gcd divides"),
                im.div_exact(&g).expect("gcd divides"),
                den.div_exact(&g).expect("gcd divides"),
            )
        };
        let lc = den.leading().map(|(_, c)| c.clone()).expect("nonzero");
        if lc.is_one() {
            Scalar { re, im, den }
        } else {
            let inv = lc.recip();
            Scalar {
                re: re.scale(&inv),
                im: im.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    /// Re-run canonicalization; the identity on any constructed value.
    pub fn canonicalized(&self) -> Self {
        Scalar::canonical(self.re.clone(), self.im.clone(), self.den.clone())
    }

    pub fn real_numerator(&self) -> &Poly {
        &self.re
    }

    pub fn imag_numerator(&self) -> &Poly {
        &self.im
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.im.is_zero() && self.den.is_one() && self.re.is_one()
    }

    /// True when the value has no imaginary part for all real parameter values.
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// The value as a complex rational constant, if it has no parameters.
    pub fn as_constant(&self) -> Option<ComplexRational> {
        if !self.den.is_one() {
            return None;
        }
        Some(Complex::new(self.re.as_constant()?, self.im.as_constant()?))
    }

    pub fn params(&self) -> BTreeSet<Param> {
        let mut s = self.re.params();
        s.extend(self.im.params());
        s.extend(self.den.params());
        s
    }

    pub fn conj(&self) -> Scalar {
        Scalar {
            re: self.re.clone(),
            im: self.im.neg(),
            den: self.den.clone(),
        }
    }

    pub fn inv(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        // den / (re + i im) = den (re - i im) / (re^2 + im^2)
        let norm = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        Ok(Scalar::canonical(
            self.den.mul(&self.re),
            self.den.mul(&self.im).neg(),
            norm,
        ))
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut out = Scalar::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Substitute rational values for every parameter.
    pub fn evaluate(
        &self,
        assignment: &BTreeMap<Param, BigRational>,
    ) -> Result<ComplexRational, ScalarError> {
        let lookup = |p: &Param| assignment.get(p).cloned();
        let missing = || {
            self.params()
                .into_iter()
                .find(|p| !assignment.contains_key(p))
                .map(|p| ScalarError::MissingParameter(p.name().to_string()))
                .unwrap_or(ScalarError::Pole)
        };
        let den = self.den.evaluate(lookup).ok_or_else(missing)?;
        if den.is_zero() {
            return Err(ScalarError::Pole);
        }
        let re = self.re.evaluate(lookup).ok_or_else(missing)?;
        let im = self.im.evaluate(lookup).ok_or_else(missing)?;
        Ok(Complex::new(re / &den, im / &den))
    }

    /// Printed numerator, combining real and imaginary parts per monomial.
    fn numerator_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut monos: Vec<&Monomial> = self
            .re
            .terms()
            .map(|(m, _)| m)
            .chain(self.im.terms().map(|(m, _)| m))
            .collect();
        monos.sort();
        monos.dedup();
        let coeff = |p: &Poly, m: &Monomial| {
            p.terms()
                .find(|(n, _)| *n == m)
                .map(|(_, c)| c.clone())
                .unwrap_or_else(BigRational::zero)
        };
        let terms: Vec<String> = monos
            .into_iter()
            .rev()
            .map(|m| {
                let r = coeff(&self.re, m);
                let s = coeff(&self.im, m);
                format_term(&complex_text(&r, &s), m)
            })
            .collect();
        join_terms(&terms)
    }
}

fn complex_text(r: &BigRational, s: &BigRational) -> String {
    if s.is_zero() {
        return rational_to_string(r);
    }
    let imag = if s.is_one() {
        "i".to_string()
    } else if (-s).is_one() {
        "-i".to_string()
    } else {
        format!("{}*i", rational_to_string(s))
    };
    if r.is_zero() {
        imag
    } else if let Some(rest) = imag.strip_prefix('-') {
        format!("({} - {rest})", rational_to_string(r))
    } else {
        format!("({} + {imag})", rational_to_string(r))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            f.write_str(&self.numerator_text())
        } else {
            let den = self.den.to_string();
            let den = if self.den.len() == 1 && !den.contains('*') && !den.contains('/') {
                den
            } else {
                format!("({den})")
            };
            write!(f, "({})/{den}", self.numerator_text())
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &'a Scalar) -> Scalar {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        if self.den == rhs.den {
            return Scalar::canonical(
                self.re.add(&rhs.re),
                self.im.add(&rhs.im),
                self.den.clone(),
            );
        }
        Scalar::canonical(
            self.re.mul(&rhs.den).add(&rhs.re.mul(&self.den)),
            self.im.mul(&rhs.den).add(&rhs.im.mul(&self.den)),
            self.den.mul(&rhs.den),
        )
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &'a Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &'a Scalar) -> Scalar {
        if self.is_zero() || rhs.is_zero() {
            return Scalar::zero();
        }
        if self.is_one() {
            return rhs.clone();
        }
        if rhs.is_one() {
            return self.clone();
        }
        let re = self.re.mul(&rhs.re).sub(&self.im.mul(&rhs.im));
        let im = self.re.mul(&rhs.im).add(&self.im.mul(&rhs.re));
        Scalar::canonical(re, im, self.den.mul(&rhs.den))
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            re: self.re.neg(),
            im: self.im.neg(),
            den: self.den.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &'a Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |a, b| a + b)
    }
}
