//! Extended-precision moments of q-deformed measures on the geometric grid
//! `{q^k}` and finite-horizon determinacy diagnostics for the symmetric
//! moment problem.
//!
//! Kernels are generic over [`scalar::Real`]; the aliases below fix the
//! multiprecision instantiation used by the command line.

// NaN must fail positivity checks, so `!(x > 0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod criteria;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod orthopoly;
pub mod qbessel;
pub mod qcore;
pub mod scalar;

pub use error::{Error, Result};

/// MPFR-backed real with run-time precision.
pub type MpReal = rug::Float;
/// Exact rational used for exponent bookkeeping.
pub type Rational = num_rational::Ratio<i64>;
pub type MpContext = qcore::QContext<MpReal>;
pub type MpGridFunction = qcore::GridFunction<MpReal>;
pub type MpMoments = moments::MomentSequence<MpReal>;
pub type MpBasis = orthopoly::OrthoBasis<MpReal>;
pub type MpTransform = qbessel::QBesselTransform<MpReal>;
pub type MpComplex = scalar::Cplx<MpReal>;
/// Double-precision context.
pub type F64Context = qcore::QContext<f64>;
