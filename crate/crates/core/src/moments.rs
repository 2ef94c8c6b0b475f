//! Even moments of the weighted measure `ω²(x) x^{2v+1} d_qx`, computed by
//! direct Jackson summation and by the closed form obtained from Ramanujan's
//! bilateral summation with `b = -1`.
//!
//! For the family weight `ω²(x) = e(-x^{2p}, q^{2p})` write `Q = q^{2p}`,
//! `z = q^{2v+2}` and `α = n/p`. Then
//!
//! ```text
//! s_{2n} = (1-q) C(α, Q, z) Q^{σ(α)},        σ(α) = ([α]/2 - α)([α] + 1)
//!
//! C(α, Q, z) = (-Q^α z, Q)_∞ / (-1, Q^α z, -Q)_∞
//!            · ∏_{i=0}^{[α]} (1 + Q^{i+α-[α]} z/Q)
//!            · (-Q^{2+[α]-α}/z, Q)_∞
//!            · (Q/z)^{[α]+1}
//! ```
//!
//! The last two factors come from splitting `(-Q^{1-α}/z; Q)_∞` at `i = [α]`:
//! the leading `[α]+1` factors are inverted (producing `Q^{σ(α)}` and the
//! finite product) while the remaining tail keeps its `Q/z` argument.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::qcore::{
    jackson_integral, q_exp, qpochhammer_inf, qpochhammer_inf_tracked, vanishes, GridFunction,
    JacksonSum, QContext,
};
use crate::scalar::Real;

/// Consecutive negligible terms that end one direction of a bilateral sum.
const BILATERAL_RUN: usize = 5;

/// Weight `ω²` of the measure.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSpec<T> {
    /// `ω²(x) = e(-x^{2p}, q^{2p})`.
    Family { p: Ratio<i64> },
    /// Sampled even weight on the context grid.
    Custom(GridFunction<T>),
}

impl<T: Real> WeightSpec<T> {
    pub fn family(p: Ratio<i64>) -> Result<Self> {
        if !p.is_positive() {
            return Err(Error::InvalidParameter(format!("weight exponent p must be positive, got {p}")));
        }
        Ok(WeightSpec::Family { p })
    }

    /// Custom weights must be non-negative with at least one positive sample.
    pub fn custom(ctx: &QContext<T>, values: GridFunction<T>) -> Result<Self> {
        values.check_window(ctx)?;
        let zero = ctx.zero();
        if values.values().iter().any(|v| v < &zero || !v.is_finite()) {
            return Err(Error::InvalidParameter("custom weight must be non-negative".into()));
        }
        if values.values().iter().all(|v| v.is_zero()) {
            return Err(Error::InvalidParameter("custom weight vanishes identically".into()));
        }
        Ok(WeightSpec::Custom(values))
    }

    pub fn p(&self) -> Option<&Ratio<i64>> {
        match self {
            WeightSpec::Family { p } => Some(p),
            WeightSpec::Custom(_) => None,
        }
    }

    /// True when `ω(q^k) != 0` at every grid point.
    pub fn is_strictly_positive(&self, ctx: &QContext<T>) -> Result<bool> {
        let grid = weight_grid(self, ctx)?;
        Ok(grid.values().iter().all(|v| !v.is_zero()))
    }
}

/// `ω²` sampled on the context grid.
pub fn weight_grid<T: Real>(w: &WeightSpec<T>, ctx: &QContext<T>) -> Result<GridFunction<T>> {
    match w {
        WeightSpec::Custom(g) => {
            g.check_window(ctx)?;
            Ok(g.clone())
        }
        WeightSpec::Family { p } => {
            let base = family_base(p, ctx);
            // x^{2p} at x = q^k is base^k
            GridFunction::try_from_fn(ctx, |k, _| q_exp(&-base.powi(k), &base, ctx))
        }
    }
}

fn ratio_to_real<T: Real>(r: &Ratio<i64>, ctx: &QContext<T>) -> T {
    T::from_ratio(r, ctx.precision())
}

/// `q^{2p}`.
fn family_base<T: Real>(p: &Ratio<i64>, ctx: &QContext<T>) -> T {
    ctx.q().powf(&ratio_to_real(&(p * 2), ctx))
}

/// `s_{2n}` by Jackson summation of `x^{2n} ω²(x)`.
pub fn moment_direct<T: Real>(n: usize, w: &WeightSpec<T>, ctx: &QContext<T>) -> Result<JacksonSum<T>> {
    let grid = weight_grid(w, ctx)?;
    moment_on_grid(n, &grid, ctx)
}

fn moment_on_grid<T: Real>(n: usize, weight: &GridFunction<T>, ctx: &QContext<T>) -> Result<JacksonSum<T>> {
    let integrand = weight.map(|k, w| {
        if w.is_zero() {
            w.clone()
        } else {
            ctx.point(k).powi(2 * n as i64) * w
        }
    });
    jackson_integral(&integrand, ctx)
}

/// `σ(α) = ([α]/2 - α)([α] + 1)`, exact.
pub fn sigma_exponent<I>(alpha: &Ratio<I>) -> Ratio<I>
where
    I: Integer + Clone,
{
    let floor = alpha.floor();
    let two = Ratio::from_integer(I::one() + I::one());
    (floor.clone() / two - alpha.clone()) * (floor + Ratio::from_integer(I::one()))
}

/// `C(α, q_base, z)`; see the module docs for the product.
pub fn c_prefactor<T: Real>(alpha: &Ratio<i64>, q_base: &T, z: &T, ctx: &QContext<T>) -> Result<T> {
    if alpha.is_negative() {
        return Err(Error::InvalidParameter(format!("alpha must be non-negative, got {alpha}")));
    }
    let one = ctx.one();
    if !(q_base > &ctx.zero() && q_base < &one) {
        return Err(Error::InvalidParameter("base must lie in (0,1)".into()));
    }
    if z.is_zero() {
        return Err(Error::Pole("z = 0".into()));
    }
    let floor = alpha.floor();
    let frac = alpha - floor;
    let floor_i = floor.to_integer();
    let pow = |e: &Ratio<i64>| q_base.powf(&ratio_to_real(e, ctx));

    let q_alpha_z = pow(alpha) * z;
    let (den_a, min_a) = qpochhammer_inf_tracked(&-one.clone(), q_base, ctx);
    let (den_b, min_b) = qpochhammer_inf_tracked(&q_alpha_z, q_base, ctx);
    let (den_c, min_c) = qpochhammer_inf_tracked(&-q_base.clone(), q_base, ctx);
    if [&min_a, &min_b, &min_c].into_iter().any(|m| vanishes(m, ctx)) {
        return Err(Error::Pole(format!("denominator of C vanishes at alpha = {alpha}")));
    }
    let numer = qpochhammer_inf(&-q_alpha_z.clone(), q_base, ctx) * qpochhammer_inf(q_base, q_base, ctx);
    let ratio = numer / (den_a * den_b * den_c);

    let z_over_base = z.clone() / q_base;
    let mut finite = one.clone();
    let mut factor_base = pow(&frac);
    for _ in 0..=floor_i {
        finite *= one.clone() + factor_base.clone() * &z_over_base;
        factor_base *= q_base;
    }

    let tail_arg = -(pow(&(Ratio::from_integer(2) - frac)) / z);
    let tail = qpochhammer_inf(&tail_arg, q_base, ctx);
    let power = (q_base.clone() / z).powi(floor_i + 1);

    Ok(ratio * finite * tail * power)
}

/// Closed-form moment together with its exact `q`-exponent `2pσ(n/p)`.
#[derive(Clone, Debug)]
pub struct ClosedFormMoment<T> {
    pub value: T,
    pub exponent: Ratio<i64>,
}

/// `s_{2n} = (1-q) C(n/p, q^{2p}, q^{2v+2}) q^{2pσ(n/p)}`.
pub fn moment_closed_form<T: Real>(n: usize, p: &Ratio<i64>, ctx: &QContext<T>) -> Result<ClosedFormMoment<T>> {
    if !p.is_positive() {
        return Err(Error::InvalidParameter(format!("weight exponent p must be positive, got {p}")));
    }
    let alpha = Ratio::from_integer(n as i64) / p;
    let base = family_base(p, ctx);
    let two = ctx.int(2);
    let z = ctx.q().powf(&(two.clone() * ctx.v() + &two));
    let c = c_prefactor(&alpha, &base, &z, ctx)?;
    let exponent = p * 2 * sigma_exponent(&alpha);
    let value = (ctx.one() - ctx.q()) * c * ctx.q().powf(&ratio_to_real(&exponent, ctx));
    Ok(ClosedFormMoment { value, exponent })
}

/// Both sides of Ramanujan's bilateral summation
/// `Σ_k z^k / (b q^k; q)_∞ = (bz, q/bz, q, q)_∞ / (b, z, q/b, q)_∞`.
#[derive(Clone, Debug)]
pub struct RamanujanCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub rel_err: T,
    /// Terms summed for `k >= 0` and `k < 0`.
    pub terms_up: usize,
    pub terms_down: usize,
    /// Both directions met the stopping rule inside the window.
    pub converged: bool,
}

/// Sums outward from `k = 0` in both directions inside the context window,
/// stopping each side after five consecutive negligible terms.
pub fn ramanujan_check<T: Real>(b: &T, z: &T, q: &T, ctx: &QContext<T>) -> Result<RamanujanCheck<T>> {
    let one = ctx.one();
    if !(q > &ctx.zero() && q < &one) {
        return Err(Error::InvalidParameter("q must lie in (0,1)".into()));
    }
    if z.is_zero() || z.abs() >= one {
        return Err(Error::Domain(format!("need 0 < |z| < 1, got z = {}", z.to_decimal())));
    }
    if b.is_zero() {
        return Err(Error::Pole("b = 0".into()));
    }

    let term = |k: i64| -> Result<T> {
        let arg = b.clone() * q.powi(k);
        let (den, min) = qpochhammer_inf_tracked(&arg, q, ctx);
        if vanishes(&min, ctx) || den.is_zero() {
            return Err(Error::Pole(format!("(b q^{k}; q)_inf vanishes")));
        }
        Ok(z.powi(k) / den)
    };

    let tol = ctx.tail_tol().clone();
    let mut up = ctx.zero();
    let mut terms_up = 0;
    let mut quiet = 0;
    let mut up_done = false;
    for k in 0..=ctx.k_max() {
        let t = term(k)?;
        up += &t;
        terms_up += 1;
        quiet = if t.abs() <= tol.clone() * up.abs() { quiet + 1 } else { 0 };
        if quiet >= BILATERAL_RUN {
            up_done = true;
            break;
        }
    }
    let mut down = ctx.zero();
    let mut terms_down = 0;
    let mut down_done = ctx.k_min() == 0;
    quiet = 0;
    for k in (ctx.k_min()..0).rev() {
        let t = term(k)?;
        down += &t;
        terms_down += 1;
        let total = up.clone() + &down;
        quiet = if t.abs() <= tol.clone() * total.abs() { quiet + 1 } else { 0 };
        if quiet >= BILATERAL_RUN {
            down_done = true;
            break;
        }
    }
    let lhs = up + down;

    let poch = |x: &T| qpochhammer_inf_tracked(x, q, ctx);
    let bz = b.clone() * z;
    let numer = poch(&bz).0 * poch(&(q.clone() / &bz)).0 * poch(q).0 * poch(q).0;
    let mut denom = one.clone();
    for x in [b.clone(), z.clone(), q.clone() / b, q.clone()] {
        let (val, min) = poch(&x);
        if vanishes(&min, ctx) {
            return Err(Error::Pole(format!("({}; q)_inf vanishes", x.to_decimal())));
        }
        denom *= val;
    }
    let rhs = numer / denom;
    let rel_err = (lhs.clone() - &rhs).abs() / rhs.abs();
    Ok(RamanujanCheck {
        lhs,
        rhs,
        rel_err,
        terms_up,
        terms_down,
        converged: up_done && down_done,
    })
}

/// How an entry of a [`MomentSequence`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    Direct,
    ClosedForm,
    /// Given by the caller, not tied to a weight.
    Supplied,
}

#[derive(Clone, Debug)]
pub struct MomentEntry<T> {
    pub n: usize,
    /// `s_{2n}`.
    pub value: T,
    pub method: MomentMethod,
}

/// Even moments `s_0, s_2, ..., s_{2 n_max}` of a symmetric measure.
///
/// Odd moments are zero by construction and never summed.
#[derive(Clone, Debug)]
pub struct MomentSequence<T> {
    ctx: QContext<T>,
    weight: Option<WeightSpec<T>>,
    entries: Vec<MomentEntry<T>>,
    exponents: Option<Vec<Ratio<i64>>>,
    tail_warnings: Vec<usize>,
}

impl<T: Real> MomentSequence<T> {
    /// Closed-form moments of the family weight, with exact exponents.
    pub fn closed_form(ctx: &QContext<T>, p: Ratio<i64>, n_max: usize) -> Result<Self> {
        let weight = WeightSpec::family(p)?;
        let mut entries = Vec::with_capacity(n_max + 1);
        let mut exponents = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let m = moment_closed_form(n, &p, ctx)?;
            entries.push(MomentEntry { n, value: m.value, method: MomentMethod::ClosedForm });
            exponents.push(m.exponent);
        }
        Self::checked(ctx, Some(weight), entries, Some(exponents), Vec::new())
    }

    /// Direct Jackson sums; the weight grid is built once.
    pub fn direct(ctx: &QContext<T>, weight: WeightSpec<T>, n_max: usize) -> Result<Self> {
        let grid = weight_grid(&weight, ctx)?;
        let mut entries = Vec::with_capacity(n_max + 1);
        let mut tail_warnings = Vec::new();
        for n in 0..=n_max {
            let sum = moment_on_grid(n, &grid, ctx)?;
            if sum.tail_warning {
                tail_warnings.push(n);
            }
            entries.push(MomentEntry { n, value: sum.value, method: MomentMethod::Direct });
        }
        let exponents = weight.p().map(|p| {
            (0..=n_max)
                .map(|n| p * 2 * sigma_exponent(&(Ratio::from_integer(n as i64) / p)))
                .collect()
        });
        Self::checked(ctx, Some(weight), entries, exponents, tail_warnings)
    }

    /// Caller-provided `s_{2n}` for `n = 0..values.len()`.
    pub fn supplied(ctx: &QContext<T>, values: Vec<T>) -> Result<Self> {
        let entries = values
            .into_iter()
            .enumerate()
            .map(|(n, value)| MomentEntry { n, value: value.with_precision(ctx.precision()), method: MomentMethod::Supplied })
            .collect();
        Self::checked(ctx, None, entries, None, Vec::new())
    }

    fn checked(
        ctx: &QContext<T>,
        weight: Option<WeightSpec<T>>,
        entries: Vec<MomentEntry<T>>,
        exponents: Option<Vec<Ratio<i64>>>,
        tail_warnings: Vec<usize>,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InsufficientData { required: 1, available: 0 });
        }
        let zero = ctx.zero();
        if let Some(bad) = entries.iter().find(|e| !(e.value > zero) || !e.value.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "moment s_{} = {} is not positive",
                2 * bad.n,
                bad.value
            )));
        }
        Ok(Self { ctx: ctx.clone(), weight, entries, exponents, tail_warnings })
    }

    pub fn ctx(&self) -> &QContext<T> {
        &self.ctx
    }
    pub fn weight(&self) -> Option<&WeightSpec<T>> {
        self.weight.as_ref()
    }
    pub fn entries(&self) -> &[MomentEntry<T>] {
        &self.entries
    }
    /// Largest `n` with `s_{2n}` available.
    pub fn n_max(&self) -> usize {
        self.entries.len() - 1
    }
    /// `s_{2n}`.
    pub fn s2n(&self, n: usize) -> Option<&T> {
        self.entries.get(n).map(|e| &e.value)
    }
    /// `s_m` for any order; odd orders vanish.
    pub fn moment(&self, m: usize) -> Option<T> {
        if m % 2 == 1 {
            return (m / 2 <= self.n_max()).then(|| self.ctx.zero());
        }
        self.s2n(m / 2).cloned()
    }
    /// Exact `q`-exponent `2pσ(n/p)` of `s_{2n}` for family weights.
    pub fn exponent(&self, n: usize) -> Option<&Ratio<i64>> {
        self.exponents.as_ref().and_then(|e| e.get(n))
    }
    /// Indices whose direct sum flagged a boundary term above `tail_tol`.
    pub fn tail_warnings(&self) -> &[usize] {
        &self.tail_warnings
    }
}

/// Exponent `e_n = (p/n) σ(n/p) + n/4` for `n = 1..=n_max`.
pub fn exact_exponent_sequence<I>(p: &Ratio<I>, n_max: usize) -> Vec<Ratio<I>>
where
    I: Integer + Clone + From<i32> + ToPrimitive,
{
    (1..=n_max)
        .map(|n| {
            let n = Ratio::from_integer(I::from(n as i32));
            let alpha = n.clone() / p.clone();
            p.clone() / n.clone() * sigma_exponent(&alpha) + n / Ratio::from_integer(I::from(4))
        })
        .collect()
}
