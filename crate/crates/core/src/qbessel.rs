//! Normalized third-kind (Hahn–Exton) q-Bessel function and the q-Bessel
//! Fourier transform on the truncated grid.
//!
//! ```text
//! j_v(x, q²) = Σ_{n≥0} (-1)^n q^{n(n+1)} x^{2n} / ((q², q²)_n (q^{2v+2}, q²)_n)
//! F f(λ)     = c_{q,v} ∫_0^∞ f(x) j_v(λx, q²) x^{2v+1} d_qx
//! ```

use crate::error::{Error, Result};
use crate::linalg::smallest_singular_value;
use crate::qcore::{jackson_terms, qpochhammer_inf, GridFunction, QContext};
use crate::scalar::Real;

/// Bits carried beyond what the cancellation estimate asks for.
const GUARD_BITS: f64 = 32.0;
/// Bits a fixed-precision scalar may lose before evaluation is refused.
const LOSS_SLACK_BITS: f64 = 8.0;
/// Negligible terms required after the peak before the series stops.
const SERIES_RUN: usize = 3;

/// Default normalisation `(1/(1-q)) (q^{2v+2}; q²)_∞ / (q²; q²)_∞`, which makes
/// the transform its own inverse.
pub fn c_qv_default<T: Real>(ctx: &QContext<T>) -> T {
    let q = ctx.q();
    let q2 = q.clone() * q;
    let two = ctx.int(2);
    let a = q.powf(&(two.clone() * ctx.v() + &two));
    let num = qpochhammer_inf(&a, &q2, ctx);
    let den = qpochhammer_inf(&q2, &q2, ctx);
    num / den / (ctx.one() - q)
}

/// `log2 |term_n|` for every term up to well past the peak, in doubles.
fn term_profile(x_log2: f64, q_log2: f64, v: f64, horizon_bits: f64) -> Vec<f64> {
    let a_log2 = (2.0 * v + 2.0) * q_log2;
    let mut logs = vec![0.0f64];
    let mut cur = 0.0f64;
    let mut peak = 0.0f64;
    let mut n = 0usize;
    loop {
        let q2n2 = ((2 * n + 2) as f64 * q_log2).exp2();
        let aq2n = (a_log2 + (2 * n) as f64 * q_log2).exp2();
        cur += (2 * n + 2) as f64 * q_log2 + 2.0 * x_log2 - (1.0 - q2n2).abs().log2() - (1.0 - aq2n).abs().log2();
        n += 1;
        logs.push(cur);
        peak = peak.max(cur);
        let falling = cur < logs[n - 1];
        if falling && cur < peak - horizon_bits {
            return logs;
        }
    }
}

/// Plain summation at `prec` bits; returns the sum.
fn sum_series<T: Real>(x: &T, ctx: &QContext<T>, prec: u32, peak_index: usize) -> T {
    let one = T::from_i64(1, prec);
    let q = ctx.q().with_precision(prec);
    let v = ctx.v().with_precision(prec);
    let two = T::from_i64(2, prec);
    let a = q.powf(&(two.clone() * &v + &two));
    let q2 = q.clone() * &q;
    let x2 = {
        let x = x.with_precision(prec);
        x.clone() * &x
    };
    let tol = T::exp2i(-i64::from(prec), prec);
    let mut term = one.clone();
    let mut sum = one.clone();
    // q^{2n+2} and a q^{2n}
    let mut q_pow = q2.clone();
    let mut a_pow = a;
    let mut quiet = 0usize;
    let mut n = 0usize;
    loop {
        let denom = (one.clone() - &q_pow) * (one.clone() - &a_pow);
        term = -(term * &q_pow * &x2) / denom;
        sum += &term;
        n += 1;
        q_pow *= &q2;
        a_pow *= &q2;
        if n > peak_index && term.abs() <= tol.clone() * sum.abs() {
            quiet += 1;
            if quiet >= SERIES_RUN {
                return sum;
            }
        } else {
            quiet = 0;
        }
        if term.is_zero() {
            return sum;
        }
    }
}

/// `j_v(x, q²)` with precision raised by the cancellation the series incurs
/// (bit-length of largest term over the sum), then rounded back.
pub fn qbessel_j<T: Real>(x: &T, ctx: &QContext<T>) -> Result<T> {
    if x.is_zero() {
        return Ok(ctx.one());
    }
    let base = ctx.precision();
    let cap = ctx.precision_ceiling().min(T::MAX_PRECISION);
    let q_log2 = ctx.q().log2_abs();
    let profile = term_profile(x.log2_abs(), q_log2, ctx.v().to_f64(), f64::from(cap) + 64.0);
    let (peak_index, peak) = profile
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, l)| if l > acc.1 { (i, l) } else { acc });
    let peak = peak.max(0.0);

    let fit = |bits: f64| -> u32 { bits.ceil().clamp(f64::from(base), f64::from(cap)) as u32 };
    let mut prec = fit(f64::from(base) + peak + GUARD_BITS);
    loop {
        let sum = sum_series(x, ctx, prec, peak_index);
        let lost = if sum.is_zero() {
            f64::from(prec)
        } else {
            (peak - sum.log2_abs()).max(0.0)
        };
        let needed = f64::from(base) + lost;
        if needed + GUARD_BITS <= f64::from(prec) || (prec == cap && needed <= f64::from(cap) + LOSS_SLACK_BITS) {
            return Ok(sum.with_precision(base));
        }
        if needed > f64::from(cap) + LOSS_SLACK_BITS {
            return Err(Error::PrecisionOverflow {
                required: (needed + GUARD_BITS).ceil() as u64,
                ceiling: u64::from(cap),
            });
        }
        let next = fit(needed + GUARD_BITS);
        if next <= prec {
            return Ok(sum.with_precision(base));
        }
        prec = next;
    }
}

/// Truncated q-Bessel Fourier transform on the context window.
///
/// `kernel[i][k] = c_qv (1-q) q^{k(2v+2)} j_v(q^{i+k}, q²)`, with `i`, `k`
/// running over the window.
#[derive(Clone, Debug)]
pub struct QBesselTransform<T> {
    ctx: QContext<T>,
    c_qv: T,
    /// `j_v(q^s)` for `s = 2 k_min ..= 2 k_max`.
    j_table: Vec<T>,
    kernel: Vec<Vec<T>>,
}

impl<T: Real> QBesselTransform<T> {
    pub fn new(ctx: &QContext<T>) -> Result<Self> {
        Self::with_constant(ctx, c_qv_default(ctx))
    }

    pub fn with_constant(ctx: &QContext<T>, c_qv: T) -> Result<Self> {
        if !(c_qv > ctx.zero()) {
            return Err(Error::InvalidParameter("c_qv must be positive".into()));
        }
        let lo = 2 * ctx.k_min();
        let hi = 2 * ctx.k_max();
        let j_table = (lo..=hi)
            .map(|s| qbessel_j(&ctx.q().powi(s), ctx))
            .collect::<Result<Vec<_>>>()?;
        let mut t = Self { ctx: ctx.clone(), c_qv, j_table, kernel: Vec::new() };
        t.kernel = t.build_kernel();
        Ok(t)
    }

    fn build_kernel(&self) -> Vec<Vec<T>> {
        let ctx = &self.ctx;
        ctx.exponents()
            .map(|i| {
                ctx.exponents()
                    .map(|k| self.c_qv.clone() * ctx.weight(k) * self.j(i + k))
                    .collect()
            })
            .collect()
    }

    pub fn ctx(&self) -> &QContext<T> {
        &self.ctx
    }
    pub fn c_qv(&self) -> &T {
        &self.c_qv
    }
    pub fn kernel(&self) -> &[Vec<T>] {
        &self.kernel
    }
    pub fn dim(&self) -> usize {
        self.kernel.len()
    }

    /// `j_v(q^s, q²)` for `s` in `[2 k_min, 2 k_max]`.
    pub fn j(&self, s: i64) -> &T {
        &self.j_table[(s - 2 * self.ctx.k_min()) as usize]
    }

    /// Same transform with the constant (and kernel) multiplied by `factor`.
    pub fn scaled(&self, factor: &T) -> Self {
        let mut t = self.clone();
        t.c_qv = self.c_qv.clone() * factor;
        t.kernel = self
            .kernel
            .iter()
            .map(|row| row.iter().map(|x| x.clone() * factor).collect())
            .collect();
        t
    }

    /// Kernel matrix times the value vector of `f`.
    pub fn apply(&self, f: &GridFunction<T>) -> Result<GridFunction<T>> {
        f.check_window(&self.ctx)?;
        let values = self
            .kernel
            .iter()
            .map(|row| {
                let mut acc = self.ctx.zero();
                for (kv, fv) in row.iter().zip(f.values()) {
                    acc += kv.clone() * fv;
                }
                acc
            })
            .collect();
        GridFunction::from_values(&self.ctx, values)
    }
}

/// `λ ↦ c_qv ∫ f(x) j_v(λx, q²) x^{2v+1} d_qx` at every grid `λ`, each a
/// Jackson sum with the usual tail checks.
pub fn qfourier<T: Real>(f: &GridFunction<T>, t: &QBesselTransform<T>) -> Result<GridFunction<T>> {
    let ctx = t.ctx();
    f.check_window(ctx)?;
    GridFunction::try_from_fn(ctx, |i, _| {
        let terms: Vec<T> = f
            .iter()
            .map(|(k, fv)| fv.clone() * t.j(i + k) * ctx.weight(k))
            .collect();
        Ok(t.c_qv().clone() * jackson_terms(&terms, ctx)?.value)
    })
}

/// Smallest singular value of the truncated kernel; positive means the
/// truncated transform is injective.
pub fn injectivity_diagnostic<T: Real>(t: &QBesselTransform<T>) -> T {
    smallest_singular_value(t.kernel())
}

/// `‖F(F f) - f‖₂ / ‖f‖₂` over the window values.
pub fn involution_residual<T: Real>(f: &GridFunction<T>, t: &QBesselTransform<T>) -> Result<T> {
    let ff = qfourier(&qfourier(f, t)?, t)?;
    let ctx = t.ctx();
    let diff = GridFunction::axpby(&ctx.one(), &ff, &-ctx.one(), f);
    Ok(diff.l2_norm() / f.l2_norm())
}

/// Outcome of checking `F∘F = id` numerically.
#[derive(Clone, Debug)]
pub struct Calibration<T> {
    pub c_default: T,
    /// `c_default / sqrt(scale_factor)`.
    pub c_calibrated: T,
    /// Least-squares `s` in `F(F f) ≈ s f` over the probes.
    pub scale_factor: T,
    pub residual_default: T,
    pub residual_calibrated: T,
    /// `|scale_factor - 1|` is within the requested tolerance.
    pub within_tolerance: bool,
}

/// Measures the involution scale over `probes` using the transform's constant.
pub fn calibrate<T: Real>(t: &QBesselTransform<T>, probes: &[GridFunction<T>], tol: &T) -> Result<Calibration<T>> {
    let ctx = t.ctx();
    if probes.is_empty() {
        return Err(Error::InsufficientData { required: 1, available: 0 });
    }
    let mut images = Vec::with_capacity(probes.len());
    let mut num = ctx.zero();
    let mut den = ctx.zero();
    for f in probes {
        let ff = qfourier(&qfourier(f, t)?, t)?;
        for (a, b) in ff.values().iter().zip(f.values()) {
            num += a.clone() * b;
            den += b.clone() * b;
        }
        images.push(ff);
    }
    let scale = num / den;
    let worst = |s: &T| -> T {
        let mut worst = ctx.zero();
        for (ff, f) in images.iter().zip(probes) {
            let diff = GridFunction::axpby(&(ctx.one() / s), ff, &-ctx.one(), f);
            worst = T::max_of(worst, diff.l2_norm() / f.l2_norm());
        }
        worst
    };
    let residual_default = worst(&ctx.one());
    let residual_calibrated = worst(&scale);
    let c_calibrated = t.c_qv().clone() / scale.sqrt();
    let within_tolerance = (scale.clone() - ctx.one()).abs() <= tol.clone();
    Ok(Calibration {
        c_default: t.c_qv().clone(),
        c_calibrated,
        scale_factor: scale,
        residual_default,
        residual_calibrated,
        within_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::q_exp;
    use rug::Float;

    fn ctx(q: &str, v: &str, lo: i64, hi: i64) -> QContext<Float> {
        QContext::from_decimal(q, v, 256).unwrap().with_window(lo, hi).unwrap()
    }

    // Term-by-term summation at twice the precision with twice the terms the
    // working evaluation needs, independent of the adaptive path.
    fn j_oracle(x: f64, q: &str, v: &str, prec: u32, terms: usize) -> Float {
        let q = Float::with_val(prec, Float::parse(q).unwrap());
        let v: Float = crate::qcore::parse_real(v, prec).unwrap();
        let x = Float::with_val(prec, x);
        let a = Float::with_val(prec, q.clone().pow_ref_f(&(v * 2u32 + 2u32)));
        let mut sum = Float::with_val(prec, 0);
        for n in 0..terms {
            let mut num = Float::with_val(prec, &q).pow_i((n * (n + 1)) as i64) * Float::with_val(prec, &x).pow_i(2 * n as i64);
            let q2 = Float::with_val(prec, &q * &q);
            num /= crate::qcore::qpochhammer_finite(&q2, &q2, n) * crate::qcore::qpochhammer_finite(&a, &q2, n);
            if n % 2 == 1 {
                num = -num;
            }
            sum += num;
        }
        sum
    }

    trait PowHelpers {
        fn pow_i(self, n: i64) -> Float;
        fn pow_ref_f(self, e: &Float) -> Float;
    }
    impl PowHelpers for Float {
        fn pow_i(self, n: i64) -> Float {
            <Float as Real>::powi(&self, n)
        }
        fn pow_ref_f(self, e: &Float) -> Float {
            <Float as Real>::powf(&self, e)
        }
    }

    #[test]
    fn j_at_zero_and_even() {
        let c = ctx("0.5", "0", -8, 8);
        assert_eq!(qbessel_j(&c.zero(), &c).unwrap(), 1.0);
        for x in [0.3, 1.0, 7.5] {
            let a = qbessel_j(&c.real(x), &c).unwrap();
            let b = qbessel_j(&c.real(-x), &c).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn j_matches_double_precision_oracle() {
        let c = ctx("0.5", "0", -8, 8);
        for x in [1.0, 0.25, 4.0, 64.0] {
            let got = qbessel_j(&c.real(x), &c).unwrap();
            let want = j_oracle(x, "0.5", "0", 1024, 200);
            let err = Float::with_val(1024, &got - &want).abs();
            // 10 ulps of the working result
            let ulp = Float::with_val(1024, got.clone().abs()) >> 255i32;
            assert!(err <= ulp * 10u32, "x={x}: got {got}, want {want}");
        }
    }

    #[test]
    fn j_noninteger_order() {
        let c = ctx("0.7", "-1/2", -8, 8);
        let got = qbessel_j(&c.real(3.0), &c).unwrap();
        let want = j_oracle(3.0, "0.7", "-1/2", 1024, 400);
        let rel = (Float::with_val(1024, &got - &want) / &want).abs();
        assert!(rel.to_f64() < 1e-70);
    }

    #[test]
    fn j_precision_ceiling() {
        let c = ctx("0.5", "0", -8, 8).with_precision_ceiling(300).unwrap();
        // x = 2^40 forces roughly 800 bits of cancellation.
        let x = c.real(2f64.powi(40));
        assert!(matches!(qbessel_j(&x, &c), Err(Error::PrecisionOverflow { .. })));
        let c64 = QContext::<f64>::new(0.5, 0.0, 53).unwrap();
        assert!(qbessel_j(&1.0, &c64).is_ok());
        assert!(matches!(qbessel_j(&2f64.powi(20), &c64), Err(Error::PrecisionOverflow { .. })));
    }

    #[test]
    fn kernel_symmetry_under_weight_swap() {
        let c = ctx("0.5", "0", -4, 4);
        let t = QBesselTransform::new(&c).unwrap();
        let n = t.dim();
        for i in 0..n {
            for k in 0..n {
                let ki = (i as i64) + c.k_min();
                let kk = (k as i64) + c.k_min();
                let a = t.kernel()[i][k].clone() / c.weight(kk);
                let b = t.kernel()[k][i].clone() / c.weight(ki);
                let rel = ((a - &b) / b).abs().to_f64();
                assert!(rel < 1e-70);
            }
        }
    }

    #[test]
    fn transform_of_zero_and_atom() {
        let c = ctx("0.5", "0", -6, 10);
        let t = QBesselTransform::new(&c).unwrap();
        let zero = GridFunction::zeros(&c);
        assert!(qfourier(&zero, &t).unwrap().values().iter().all(|v| v.is_zero()));
        let atom = GridFunction::indicator(&c, 0).unwrap();
        let img = qfourier(&atom, &t).unwrap();
        for (i, v) in img.iter() {
            let want = t.c_qv().clone() * (c.one() - c.q()) * qbessel_j(c.point(i), &c).unwrap();
            assert!(((v.clone() - &want).abs()).to_f64() <= 1e-70 * want.abs().to_f64().max(1e-300));
        }
    }

    #[test]
    fn jackson_route_equals_kernel_product() {
        let c = ctx("0.5", "0", -8, 30);
        let t = QBesselTransform::new(&c).unwrap();
        let f = GridFunction::try_from_fn(&c, |_, x| q_exp(&-(x.clone() * x), &(c.q().clone() * c.q()), &c)).unwrap();
        let a = qfourier(&f, &t).unwrap();
        let b = t.apply(&f).unwrap();
        let diff = GridFunction::axpby(&c.one(), &a, &-c.one(), &b);
        assert!((diff.l2_norm() / b.l2_norm()).to_f64() < 1e-70);
    }

    #[test]
    fn involution_on_probes() {
        let c = ctx("0.5", "0", -12, 40);
        let t = QBesselTransform::new(&c).unwrap();
        let gauss = GridFunction::try_from_fn(&c, |_, x| q_exp(&-(x.clone() * x), &(c.q().clone() * c.q()), &c)).unwrap();
        assert!(involution_residual(&gauss, &t).unwrap().to_f64() < 1e-10);
        for m in [-4, 0, 5] {
            let atom = GridFunction::indicator(&c, m).unwrap();
            assert!(involution_residual(&atom, &t).unwrap().to_f64() < 1e-10);
        }
        let cal = calibrate(&t, &[gauss], &c.real(1e-10)).unwrap();
        assert!(cal.within_tolerance);
        assert!(cal.residual_calibrated.to_f64() < 1e-10);
    }

    #[test]
    fn injectivity_examples() {
        let c = ctx("0.5", "0", 0, 0);
        let t = QBesselTransform::new(&c).unwrap();
        let want = t.c_qv().clone() * (c.one() - c.q()) * qbessel_j(&c.one(), &c).unwrap();
        assert_eq!(injectivity_diagnostic(&t), want.abs());

        let c = ctx("0.5", "0", -8, 8);
        let t = QBesselTransform::new(&c).unwrap();
        let s = injectivity_diagnostic(&t);
        assert!(s > 0.0);
        let s2 = injectivity_diagnostic(&t.scaled(&c.int(2)));
        assert_eq!(s2, s * 2u32);
    }

    #[test]
    fn decay_window_reaches_tail() {
        let c = ctx("0.5", "0", -8, 8);
        assert_eq!(crate::qcore::decay_window(&c, 60.0), (-8, 30));
    }
}
