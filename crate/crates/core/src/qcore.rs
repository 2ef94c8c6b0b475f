//! q-Pochhammer symbols, the q-exponential, the truncated geometric grid and
//! Jackson integration against `x^{2v+1} d_qx`.

use std::sync::Arc;

use crate::error::{Error, Result, WindowEnd};
use crate::scalar::Real;

pub const DEFAULT_PRECISION: u32 = 256;
pub const DEFAULT_K_MIN: i64 = -64;
pub const DEFAULT_K_MAX: i64 = 64;

/// Consecutive confirming factors after an infinite product has converged.
const PRODUCT_GUARD: usize = 3;
/// Consecutive growing boundary terms that count as a divergent integral.
const DIVERGENCE_RUN: usize = 5;
/// Extra bits carried inside long products and sums.
const INTERNAL_GUARD_BITS: u32 = 32;

/// Global parameters shared by every evaluation: the base `q`, the Bessel
/// order `v`, the working precision, and the grid window `{q^k : k_min <= k <= k_max}`.
///
/// Immutable once built. Grid points and Jackson weights are precomputed.
#[derive(Clone, Debug)]
pub struct QContext<T> {
    q: T,
    v: T,
    precision: u32,
    k_min: i64,
    k_max: i64,
    tail_tol: T,
    precision_ceiling: u32,
    points: Arc<[T]>,
    weights: Arc<[T]>,
}

impl<T: Real> QContext<T> {
    /// Context with the default window and `tail_tol = 2^-precision`.
    ///
    /// Native floats clamp `precision` to their mantissa width.
    pub fn new(q: T, v: T, precision: u32) -> Result<Self> {
        let precision = precision.min(T::MAX_PRECISION);
        if precision < T::MIN_PRECISION {
            return Err(Error::InvalidParameter(format!(
                "precision {precision} is below the minimum of {} bits",
                T::MIN_PRECISION
            )));
        }
        let q = q.with_precision(precision);
        let v = v.with_precision(precision);
        let zero = T::from_i64(0, precision);
        let one = T::from_i64(1, precision);
        if !(q > zero && q < one) {
            return Err(Error::InvalidParameter(format!("q must lie in (0,1), got {q}")));
        }
        if !(v > -one.clone()) {
            return Err(Error::InvalidParameter(format!("v must exceed -1, got {v}")));
        }
        let tail_tol = T::exp2i(-(precision as i64), precision);
        let ceiling = precision.saturating_mul(16).min(T::MAX_PRECISION);
        Self::assemble(q, v, precision, DEFAULT_K_MIN, DEFAULT_K_MAX, tail_tol, ceiling)
    }

    /// Parses `q` and `v` as decimal (or `a/b`) literals at the target precision.
    pub fn from_decimal(q: &str, v: &str, precision: u32) -> Result<Self> {
        let prec = precision.min(T::MAX_PRECISION).max(T::MIN_PRECISION);
        let q = parse_real::<T>(q, prec)?;
        let v = parse_real::<T>(v, prec)?;
        Self::new(q, v, precision)
    }

    pub fn with_window(self, k_min: i64, k_max: i64) -> Result<Self> {
        if !(k_min <= 0 && 0 <= k_max) {
            return Err(Error::InvalidParameter(format!(
                "grid window must satisfy k_min <= 0 <= k_max, got [{k_min}, {k_max}]"
            )));
        }
        Self::assemble(
            self.q,
            self.v,
            self.precision,
            k_min,
            k_max,
            self.tail_tol,
            self.precision_ceiling,
        )
    }

    pub fn with_tail_tol(mut self, tail_tol: T) -> Result<Self> {
        if !(tail_tol > self.zero()) {
            return Err(Error::InvalidParameter("tail_tol must be positive".into()));
        }
        self.tail_tol = tail_tol.with_precision(self.precision);
        Ok(self)
    }

    /// Upper bound on the precision adaptive evaluations may escalate to.
    pub fn with_precision_ceiling(mut self, bits: u32) -> Result<Self> {
        if bits < self.precision {
            return Err(Error::InvalidParameter(format!(
                "precision ceiling {bits} is below the working precision {}",
                self.precision
            )));
        }
        self.precision_ceiling = bits;
        Ok(self)
    }

    /// Same parameters at a different precision; the tolerance is rescaled
    /// and the ceiling keeps its ratio to the working precision.
    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        let ratio = (self.precision_ceiling / self.precision).max(1);
        let ctx = Self::new(self.q.clone(), self.v.clone(), precision)?;
        let ceiling = ctx.precision.saturating_mul(ratio).min(T::MAX_PRECISION);
        ctx.with_window(self.k_min, self.k_max)?
            .with_precision_ceiling(ceiling)
    }

    fn assemble(
        q: T,
        v: T,
        precision: u32,
        k_min: i64,
        k_max: i64,
        tail_tol: T,
        precision_ceiling: u32,
    ) -> Result<Self> {
        let one = T::from_i64(1, precision);
        let two = T::from_i64(2, precision);
        let weight_exp = two.clone() * &v + &two;
        let mut points = Vec::with_capacity((k_max - k_min + 1) as usize);
        let mut weights = Vec::with_capacity(points.capacity());
        for k in k_min..=k_max {
            points.push(q.powi(k));
            let e = T::from_i64(k, precision) * &weight_exp;
            weights.push((one.clone() - &q) * q.powf(&e));
        }
        Ok(Self {
            q,
            v,
            precision,
            k_min,
            k_max,
            tail_tol,
            precision_ceiling,
            points: points.into(),
            weights: weights.into(),
        })
    }

    pub fn q(&self) -> &T {
        &self.q
    }
    pub fn v(&self) -> &T {
        &self.v
    }
    pub fn precision(&self) -> u32 {
        self.precision
    }
    pub fn precision_ceiling(&self) -> u32 {
        self.precision_ceiling
    }
    pub fn k_min(&self) -> i64 {
        self.k_min
    }
    pub fn k_max(&self) -> i64 {
        self.k_max
    }
    pub fn tail_tol(&self) -> &T {
        &self.tail_tol
    }
    /// Number of grid points in the window.
    pub fn len(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn exponents(&self) -> std::ops::RangeInclusive<i64> {
        self.k_min..=self.k_max
    }
    pub fn contains(&self, k: i64) -> bool {
        self.k_min <= k && k <= self.k_max
    }
    /// Grid point `q^k`. Panics outside the window.
    pub fn point(&self, k: i64) -> &T {
        &self.points[self.index(k)]
    }
    /// Jackson weight `(1-q) q^{k(2v+2)}`. Panics outside the window.
    pub fn weight(&self, k: i64) -> &T {
        &self.weights[self.index(k)]
    }
    pub fn points(&self) -> &[T] {
        &self.points
    }
    pub fn weights(&self) -> &[T] {
        &self.weights
    }
    fn index(&self, k: i64) -> usize {
        assert!(self.contains(k), "grid exponent {k} outside window");
        (k - self.k_min) as usize
    }

    pub fn real(&self, x: f64) -> T {
        T::from_f64(x, self.precision)
    }
    pub fn int(&self, x: i64) -> T {
        T::from_i64(x, self.precision)
    }
    pub fn zero(&self) -> T {
        self.int(0)
    }
    pub fn one(&self) -> T {
        self.int(1)
    }
    /// Machine epsilon at working precision, `2^(1-precision)`.
    pub fn epsilon(&self) -> T {
        T::exp2i(1 - self.precision as i64, self.precision)
    }
}

/// Parses `"0.5"`, `"-1/2"` or `"3"` into a scalar at `prec` bits.
pub fn parse_real<T: Real>(s: &str, prec: u32) -> Result<T> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = T::parse_decimal(n, prec);
        let d = T::parse_decimal(d, prec);
        return match (n, d) {
            (Some(n), Some(d)) if !d.is_zero() => Ok(n / d),
            _ => Err(Error::InvalidParameter(format!("cannot parse '{s}' as a number"))),
        };
    }
    T::parse_decimal(s, prec)
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::InvalidParameter(format!("cannot parse '{s}' as a number")))
}

/// Values of a function on the grid window of some context.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T> {
    k_min: i64,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn from_fn(ctx: &QContext<T>, mut f: impl FnMut(i64, &T) -> T) -> Self {
        let values = ctx.exponents().map(|k| f(k, ctx.point(k))).collect();
        Self { k_min: ctx.k_min(), values }
    }

    pub fn try_from_fn(
        ctx: &QContext<T>,
        mut f: impl FnMut(i64, &T) -> Result<T>,
    ) -> Result<Self> {
        let values = ctx
            .exponents()
            .map(|k| f(k, ctx.point(k)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { k_min: ctx.k_min(), values })
    }

    pub fn from_values(ctx: &QContext<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != ctx.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} grid values, got {}",
                ctx.len(),
                values.len()
            )));
        }
        Ok(Self { k_min: ctx.k_min(), values })
    }

    pub fn zeros(ctx: &QContext<T>) -> Self {
        Self::from_fn(ctx, |_, _| ctx.zero())
    }

    /// Indicator of the single grid point `q^k`.
    pub fn indicator(ctx: &QContext<T>, k: i64) -> Result<Self> {
        if !ctx.contains(k) {
            return Err(Error::InvalidParameter(format!("atom q^{k} is outside the window")));
        }
        Ok(Self::from_fn(ctx, |j, _| if j == k { ctx.one() } else { ctx.zero() }))
    }

    pub fn k_min(&self) -> i64 {
        self.k_min
    }
    pub fn k_max(&self) -> i64 {
        self.k_min + self.values.len() as i64 - 1
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }
    pub fn get(&self, k: i64) -> Option<&T> {
        if k < self.k_min {
            return None;
        }
        self.values.get((k - self.k_min) as usize)
    }
    pub fn iter(&self) -> impl Iterator<Item = (i64, &T)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.k_min + i as i64, v))
    }

    /// Fails unless the domain is exactly the context window.
    pub fn check_window(&self, ctx: &QContext<T>) -> Result<()> {
        if self.k_min != ctx.k_min() || self.k_max() != ctx.k_max() {
            return Err(Error::WindowMismatch {
                found_min: self.k_min,
                found_max: self.k_max(),
                k_min: ctx.k_min(),
                k_max: ctx.k_max(),
            });
        }
        Ok(())
    }

    pub fn map(&self, mut f: impl FnMut(i64, &T) -> T) -> Self {
        let values = self.iter().map(|(k, v)| f(k, v)).collect();
        Self { k_min: self.k_min, values }
    }

    /// Pointwise product; both functions must share a window.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!((self.k_min, self.values.len()), (other.k_min, other.values.len()));
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.clone() * b)
            .collect();
        Self { k_min: self.k_min, values }
    }

    /// `alpha * f + beta * g`.
    pub fn axpby(alpha: &T, f: &Self, beta: &T, g: &Self) -> Self {
        assert_eq!((f.k_min, f.values.len()), (g.k_min, g.values.len()));
        let values = f
            .values
            .iter()
            .zip(&g.values)
            .map(|(a, b)| alpha.clone() * a + beta.clone() * b)
            .collect();
        Self { k_min: f.k_min, values }
    }

    /// Euclidean norm of the value vector.
    pub fn l2_norm(&self) -> T {
        let mut acc = self.values[0].zero_like();
        for v in &self.values {
            acc += v.clone() * v;
        }
        acc.sqrt()
    }
}

/// `(x; q)_n = prod_{i<n} (1 - q^i x)`.
pub fn qpochhammer_finite<T: Real>(x: &T, q: &T, n: usize) -> T {
    let mut acc = x.one_like();
    let mut qi_x = x.clone();
    for _ in 0..n {
        acc *= x.one_like() - &qi_x;
        qi_x *= q;
    }
    acc
}

/// Infinite product together with the smallest factor magnitude seen, which
/// callers use to detect vanishing products.
pub(crate) fn qpochhammer_inf_tracked<T: Real>(x: &T, q: &T, ctx: &QContext<T>) -> (T, T) {
    let prec = ctx.precision();
    if x.is_zero() {
        return (ctx.one(), ctx.one());
    }
    let inner = prec.saturating_add(INTERNAL_GUARD_BITS).min(T::MAX_PRECISION);
    let one = T::from_i64(1, inner);
    let q = q.with_precision(inner);
    let tol = ctx.tail_tol().with_precision(inner);
    let mut term = x.with_precision(inner);
    let mut acc = one.clone();
    let mut min_factor: Option<T> = None;
    let mut confirmed = 0usize;
    loop {
        let factor = one.clone() - &term;
        let mag = factor.abs();
        if min_factor.as_ref().is_none_or(|m| &mag < m) {
            min_factor = Some(mag);
        }
        acc *= factor;
        if term.abs() < tol {
            confirmed += 1;
            if confirmed > PRODUCT_GUARD {
                break;
            }
        } else {
            confirmed = 0;
        }
        term *= &q;
        if term.is_zero() {
            break;
        }
    }
    (
        acc.with_precision(prec),
        min_factor.unwrap_or_else(|| ctx.one()).with_precision(prec),
    )
}

/// `(x; q)_inf`, truncated once `|q^i x|` drops below `tail_tol`, confirmed by
/// three further factors.
pub fn qpochhammer_inf<T: Real>(x: &T, q: &T, ctx: &QContext<T>) -> T {
    qpochhammer_inf_tracked(x, q, ctx).0
}

/// True when a factor is zero at working precision.
pub(crate) fn vanishes<T: Real>(factor_mag: &T, ctx: &QContext<T>) -> bool {
    factor_mag.clone() <= T::exp2i(4 - ctx.precision() as i64, ctx.precision())
}

/// q-exponential `e(x, q) = 1 / (x; q)_inf`.
pub fn q_exp<T: Real>(x: &T, q: &T, ctx: &QContext<T>) -> Result<T> {
    let (prod, min_factor) = qpochhammer_inf_tracked(x, q, ctx);
    if prod.is_zero() || vanishes(&min_factor, ctx) {
        return Err(Error::Pole(format!(
            "(x; q)_inf vanishes at x = {}",
            x.to_decimal()
        )));
    }
    Ok(ctx.one() / prod)
}

/// Result of a Jackson sum over the window with boundary diagnostics.
#[derive(Clone, Debug)]
pub struct JacksonSum<T> {
    pub value: T,
    /// `|first term| / |sum|` at `k_min`.
    pub lower_tail: T,
    /// `|last term| / |sum|` at `k_max`.
    pub upper_tail: T,
    /// Set when either boundary ratio exceeds `tail_tol`.
    pub tail_warning: bool,
}

/// `int_0^inf f(x) x^{2v+1} d_qx = (1-q) sum_k q^{k(2v+2)} f(q^k)` over the window.
pub fn jackson_integral<T: Real>(f: &GridFunction<T>, ctx: &QContext<T>) -> Result<JacksonSum<T>> {
    f.check_window(ctx)?;
    let terms: Vec<T> = f
        .values()
        .iter()
        .zip(ctx.weights())
        .map(|(v, w)| v.clone() * w)
        .collect();
    jackson_terms(&terms, ctx)
}

/// Shared by [`jackson_integral`] and callers that already hold weighted terms.
pub(crate) fn jackson_terms<T: Real>(terms: &[T], ctx: &QContext<T>) -> Result<JacksonSum<T>> {
    check_divergence(terms, ctx)?;
    let inner = ctx
        .precision()
        .saturating_add(16)
        .min(T::MAX_PRECISION);
    let mut acc = T::from_i64(0, inner);
    for t in terms {
        acc += t;
    }
    let value = acc.with_precision(ctx.precision());
    let mag = value.abs();
    let ratio = |t: &T| {
        let t = t.abs();
        if t.is_zero() {
            ctx.zero()
        } else if mag.is_zero() {
            T::exp2i(i64::from(ctx.precision()), ctx.precision())
        } else {
            t / &mag
        }
    };
    let lower_tail = ratio(&terms[0]);
    let upper_tail = ratio(&terms[terms.len() - 1]);
    let tail_warning = &lower_tail > ctx.tail_tol() || &upper_tail > ctx.tail_tol();
    Ok(JacksonSum {
        value,
        lower_tail,
        upper_tail,
        tail_warning,
    })
}

fn check_divergence<T: Real>(terms: &[T], ctx: &QContext<T>) -> Result<()> {
    if terms.len() <= DIVERGENCE_RUN {
        return Ok(());
    }
    let grows_outward = |seq: &mut dyn Iterator<Item = &T>| {
        let mags: Vec<T> = seq.take(DIVERGENCE_RUN + 1).map(|t| t.abs()).collect();
        mags.windows(2).all(|w| w[0] > w[1])
    };
    if grows_outward(&mut terms.iter()) {
        return Err(Error::TailDivergence {
            end: WindowEnd::Lower,
            k_min: ctx.k_min(),
            k_max: ctx.k_max(),
        });
    }
    if grows_outward(&mut terms.iter().rev()) {
        return Err(Error::TailDivergence {
            end: WindowEnd::Upper,
            k_min: ctx.k_min(),
            k_max: ctx.k_max(),
        });
    }
    Ok(())
}

/// `[k_min, k_hi]` with `k_hi` large enough that the Jackson weight
/// `q^{k(2v+2)}` falls below `2^-bits`.
pub fn decay_window<T: Real>(ctx: &QContext<T>, bits: f64) -> (i64, i64) {
    let decay = (2.0 * ctx.v().to_f64() + 2.0) * -ctx.q().log2_abs();
    let hi = (bits / decay).ceil() as i64;
    (ctx.k_min(), ctx.k_max().max(hi))
}
