//! Scalar contract shared by every numeric kernel in the crate.
//!
//! All algorithms are written against [`Real`], which is implemented for the
//! native floats (`f32`, `f64`) and for [`rug::Float`], an MPFR-backed float
//! whose precision is chosen at run time. Constants are always created at an
//! explicit precision so that mixed-precision arithmetic never happens by
//! accident.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{NumAssignOps, NumOps, ToPrimitive};
use rug::ops::Pow;

/// Real scalar with an explicit binary precision.
pub trait Real:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialOrd
    + Send
    + Sync
    + 'static
    + NumOps
    + for<'a> NumOps<&'a Self>
    + NumAssignOps
    + for<'a> NumAssignOps<&'a Self>
    + Neg<Output = Self>
{
    /// Smallest precision a context over this scalar may request.
    const MIN_PRECISION: u32;
    /// Largest precision the representation can deliver.
    const MAX_PRECISION: u32;

    fn from_f64(x: f64, prec: u32) -> Self;
    fn from_i64(x: i64, prec: u32) -> Self;
    fn from_ratio<I>(r: &Ratio<I>, prec: u32) -> Self
    where
        I: Integer + Clone + fmt::Display + ToPrimitive;
    /// Parses a decimal literal, rounding once to `prec` bits.
    fn parse_decimal(s: &str, prec: u32) -> Option<Self>;

    fn precision(&self) -> u32;
    /// Copy rounded (or extended) to `prec` bits. No-op for native floats.
    fn with_precision(&self, prec: u32) -> Self;

    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn powf(&self, e: &Self) -> Self;
    fn powi(&self, n: i64) -> Self;

    fn is_zero(&self) -> bool;
    fn is_finite(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// `log2 |x|` as a double; `-inf` at zero. Stays finite far outside the
    /// `f64` exponent range.
    fn log2_abs(&self) -> f64;
    /// Decimal rendering that round-trips at the value's precision.
    fn to_decimal(&self) -> String;

    /// `2^k` at the given precision.
    fn exp2i(k: i64, prec: u32) -> Self;

    fn lift(&self, x: f64) -> Self {
        Self::from_f64(x, self.precision())
    }
    fn lift_i64(&self, x: i64) -> Self {
        Self::from_i64(x, self.precision())
    }
    fn zero_like(&self) -> Self {
        Self::from_i64(0, self.precision())
    }
    fn one_like(&self) -> Self {
        Self::from_i64(1, self.precision())
    }
    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

macro_rules! native_real {
    ($t:ty, $mant:expr) => {
        impl Real for $t {
            const MIN_PRECISION: u32 = $mant;
            const MAX_PRECISION: u32 = $mant;

            fn from_f64(x: f64, _prec: u32) -> Self {
                x as $t
            }
            fn from_i64(x: i64, _prec: u32) -> Self {
                x as $t
            }
            fn from_ratio<I>(r: &Ratio<I>, _prec: u32) -> Self
            where
                I: Integer + Clone + fmt::Display + ToPrimitive,
            {
                let n = r.numer().to_f64().unwrap_or(f64::NAN);
                let d = r.denom().to_f64().unwrap_or(f64::NAN);
                (n / d) as $t
            }
            fn parse_decimal(s: &str, _prec: u32) -> Option<Self> {
                s.trim().parse::<$t>().ok()
            }
            fn precision(&self) -> u32 {
                $mant
            }
            fn with_precision(&self, _prec: u32) -> Self {
                *self
            }
            fn abs(&self) -> Self {
                num_traits::Float::abs(*self)
            }
            fn sqrt(&self) -> Self {
                num_traits::Float::sqrt(*self)
            }
            fn ln(&self) -> Self {
                num_traits::Float::ln(*self)
            }
            fn exp(&self) -> Self {
                num_traits::Float::exp(*self)
            }
            fn powf(&self, e: &Self) -> Self {
                num_traits::Float::powf(*self, *e)
            }
            fn powi(&self, n: i64) -> Self {
                match i32::try_from(n) {
                    Ok(n) => num_traits::Float::powi(*self, n),
                    Err(_) => num_traits::Float::powf(*self, n as $t),
                }
            }
            fn is_zero(&self) -> bool {
                *self == 0.0
            }
            fn is_finite(&self) -> bool {
                num_traits::Float::is_finite(*self)
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn log2_abs(&self) -> f64 {
                (num_traits::Float::abs(*self) as f64).log2()
            }
            fn to_decimal(&self) -> String {
                format!("{:e}", self)
            }
            fn exp2i(k: i64, _prec: u32) -> Self {
                (2.0 as $t).powi(k.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
            }
        }
    };
}

native_real!(f64, 53);
native_real!(f32, 24);

impl Real for rug::Float {
    const MIN_PRECISION: u32 = 64;
    const MAX_PRECISION: u32 = 1 << 24;

    fn from_f64(x: f64, prec: u32) -> Self {
        rug::Float::with_val(prec, x)
    }
    fn from_i64(x: i64, prec: u32) -> Self {
        rug::Float::with_val(prec, x)
    }
    fn from_ratio<I>(r: &Ratio<I>, prec: u32) -> Self
    where
        I: Integer + Clone + fmt::Display + ToPrimitive,
    {
        let numer: rug::Integer = r.numer().to_string().parse().expect("integer literal");
        let denom: rug::Integer = r.denom().to_string().parse().expect("integer literal");
        rug::Float::with_val(prec, rug::Rational::from((numer, denom)))
    }
    fn parse_decimal(s: &str, prec: u32) -> Option<Self> {
        rug::Float::parse(s.trim())
            .ok()
            .map(|p| rug::Float::with_val(prec, p))
    }
    fn precision(&self) -> u32 {
        self.prec()
    }
    fn with_precision(&self, prec: u32) -> Self {
        rug::Float::with_val(prec, self)
    }
    fn abs(&self) -> Self {
        self.clone().abs()
    }
    fn sqrt(&self) -> Self {
        self.clone().sqrt()
    }
    fn ln(&self) -> Self {
        self.clone().ln()
    }
    fn exp(&self) -> Self {
        self.clone().exp()
    }
    fn powf(&self, e: &Self) -> Self {
        self.clone().pow(e)
    }
    fn powi(&self, n: i64) -> Self {
        self.clone().pow(n)
    }
    fn is_zero(&self) -> bool {
        rug::Float::is_zero(self)
    }
    fn is_finite(&self) -> bool {
        rug::Float::is_finite(self)
    }
    fn to_f64(&self) -> f64 {
        rug::Float::to_f64(self)
    }
    fn log2_abs(&self) -> f64 {
        if rug::Float::is_zero(self) {
            return f64::NEG_INFINITY;
        }
        // mantissa in [0.5, 1) times 2^exp
        let exp = self.get_exp().unwrap_or(0) as f64;
        let mant = rug::Float::with_val(64, self) >> self.get_exp().unwrap_or(0);
        exp + mant.to_f64().abs().log2()
    }
    fn to_decimal(&self) -> String {
        self.to_string_radix(10, None)
    }
    fn exp2i(k: i64, prec: u32) -> Self {
        let one = rug::Float::with_val(prec, 1);
        match i32::try_from(k) {
            Ok(k) => one << k,
            Err(_) => rug::Float::with_val(prec, 2).pow(k),
        }
    }
}

/// Minimal complex number over a [`Real`], enough for polynomial evaluation
/// off the real axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Cplx<T> {
    pub re: T,
    pub im: T,
}

impl<T: Real> Cplx<T> {
    pub fn new(re: T, im: T) -> Self {
        Self { re, im }
    }

    pub fn from_real(re: T) -> Self {
        let im = re.zero_like();
        Self { re, im }
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> T {
        self.re.clone() * &self.re + self.im.clone() * &self.im
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(self.re.clone() * s, self.im.clone() * s)
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

impl<T: Real> Add for Cplx<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl<T: Real> Sub for Cplx<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl<T: Real> Mul for Cplx<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let re = self.re.clone() * &rhs.re - self.im.clone() * &rhs.im;
        let im = self.re * &rhs.im + self.im * &rhs.re;
        Self::new(re, im)
    }
}

impl<T: Real> Neg for Cplx<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}
