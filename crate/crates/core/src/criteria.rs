//! Finite-horizon determinacy diagnostics for symmetric moment sequences.
//!
//! Each criterion turns `s_2, ..., s_{2H}` into a test sequence indexed by
//! `n = 1..=H` and applies a fixed rule:
//!
//! | criterion   | test value                     | satisfied when                 |
//! |-------------|--------------------------------|--------------------------------|
//! | perron      | `(s_{2n}/(2n)!)^{1/2n}`        | values stay bounded, no growth |
//! | riesz       | same, via `min_{j≥n}`          | the running minimum is bounded |
//! | carleman    | `s_{2n}^{-1/2n}`               | `n·t_n` bounded below          |
//! | q_criterion | `q^{n/4} s_{2n}^{1/2n}`        | `log_q t_n` grows linearly     |
//!
//! Trends are least-squares slopes over the last half of the horizon. For
//! Perron and Riesz a growing trend decides before the boundedness test.

use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::MomentSequence;
use crate::qcore::{qpochhammer_finite, QContext};
use crate::scalar::Real;

pub use crate::moments::exact_exponent_sequence;

/// Smallest horizon any diagnostic accepts.
pub const MIN_HORIZON: usize = 8;
pub const DEFAULT_HORIZON: usize = 60;
/// Boundedness factor comparing last and first quarters.
pub const BOUND_FACTOR: f64 = 2.0;
/// Carleman ratios must sit below `1 - RATIO_DELTA`.
pub const RATIO_DELTA: f64 = 0.01;
/// Slopes at or below this are treated as flat.
pub const SLOPE_EPS: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Perron,
    Riesz,
    Carleman,
    QCriterion,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Perron => "perron",
            Criterion::Riesz => "riesz",
            Criterion::Carleman => "carleman",
            Criterion::QCriterion => "q_criterion",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    NotSatisfied,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Satisfied => "satisfied",
            Verdict::NotSatisfied => "not_satisfied",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CriterionReport<T> {
    pub criterion: Criterion,
    pub horizon: usize,
    /// `test_values[i]` belongs to `n = i + 1`.
    pub test_values: Vec<T>,
    /// Least-squares slope against `n` over the last half of the horizon:
    /// `log_q` for the q-criterion, natural log otherwise.
    pub trend: T,
    pub verdict: Verdict,
    /// The rule that fired.
    pub rule: String,
    pub conclusion: String,
    /// Carleman only: partial sums of the test values.
    pub partial_sums: Vec<T>,
    /// Carleman only: `t_{n+1}/t_n`.
    pub ratios: Vec<T>,
}

impl<T> CriterionReport<T> {
    fn new(criterion: Criterion, test_values: Vec<T>, trend: T, verdict: Verdict, rule: String) -> Self {
        let conclusion = match verdict {
            Verdict::Satisfied => format!("determinate ({criterion})"),
            Verdict::NotSatisfied => "not_satisfied (criterion inconclusive about determinacy)".to_string(),
            Verdict::Inconclusive => "inconclusive".to_string(),
        };
        Self {
            criterion,
            horizon: test_values.len(),
            test_values,
            trend,
            verdict,
            rule,
            conclusion,
            partial_sums: Vec::new(),
            ratios: Vec::new(),
        }
    }
}

fn check_horizon<T: Real>(m: &MomentSequence<T>, horizon: usize, needed_index: usize) -> Result<()> {
    if horizon < MIN_HORIZON {
        return Err(Error::InsufficientData { required: MIN_HORIZON, available: horizon });
    }
    if m.n_max() < needed_index {
        return Err(Error::InsufficientData { required: needed_index + 1, available: m.n_max() + 1 });
    }
    Ok(())
}

fn quarter(h: usize) -> usize {
    (h / 4).max(1)
}

fn max_of<T: Real>(xs: &[T]) -> T {
    xs.iter().skip(1).fold(xs[0].clone(), |a, b| T::max_of(a, b.clone()))
}

fn min_of<T: Real>(xs: &[T]) -> T {
    xs.iter()
        .skip(1)
        .fold(xs[0].clone(), |a, b| if b < &a { b.clone() } else { a })
}

/// OLS slope of `ys[i]` against `n = i + 1` over the last half.
pub fn tail_slope<T: Real>(ys: &[T]) -> T {
    ols_slope(&ys[(ys.len() / 2).saturating_sub(1)..])
}

/// OLS slope of `ys` against their position.
fn ols_slope<T: Real>(ys: &[T]) -> T {
    let proto = &ys[0];
    let cnt = proto.lift_i64(ys.len() as i64);
    let mx = proto.lift_i64(ys.len() as i64 - 1) / proto.lift_i64(2);
    let mut my = proto.zero_like();
    for y in ys {
        my += y;
    }
    my /= &cnt;
    let mut sxy = proto.zero_like();
    let mut sxx = proto.zero_like();
    for (i, y) in ys.iter().enumerate() {
        let dx = proto.lift_i64(i as i64) - &mx;
        sxy += dx.clone() * (y.clone() - &my);
        sxx += dx.clone() * &dx;
    }
    sxy / sxx
}

/// `ln((2n)!)` for `n = 1..=h`.
fn ln_double_factorials<T: Real>(h: usize, proto: &T) -> Vec<T> {
    let mut acc = proto.zero_like();
    let mut out = Vec::with_capacity(h);
    for n in 1..=h {
        acc += proto.lift_i64((2 * n - 1) as i64).ln();
        acc += proto.lift_i64((2 * n) as i64).ln();
        out.push(acc.clone());
    }
    out
}

/// `ln s_{2n}` for `n = 1..=h`.
fn ln_moments<T: Real>(m: &MomentSequence<T>, h: usize) -> Vec<T> {
    (1..=h).map(|n| m.s2n(n).expect("checked horizon").ln()).collect()
}

/// `ln (s_{2n}/(2n)!)^{1/2n}`.
fn ln_perron_values<T: Real>(m: &MomentSequence<T>, h: usize) -> Vec<T> {
    let proto = m.ctx().one();
    ln_moments(m, h)
        .into_iter()
        .zip(ln_double_factorials(h, &proto))
        .enumerate()
        .map(|(i, (ls, lf))| (ls - lf) / proto.lift_i64(2 * (i as i64 + 1)))
        .collect()
}

fn exp_all<T: Real>(xs: &[T]) -> Vec<T> {
    xs.iter().map(|x| x.exp()).collect()
}

/// Perron: `limsup (s_{2n}/(2n)!)^{1/2n} < ∞`.
pub fn perron_diag<T: Real>(m: &MomentSequence<T>, horizon: usize) -> Result<CriterionReport<T>> {
    check_horizon(m, horizon, horizon)?;
    let logs = ln_perron_values(m, horizon);
    let values = exp_all(&logs);
    let trend = tail_slope(&logs);
    let q4 = quarter(horizon);
    let first = max_of(&values[..q4]);
    let last = max_of(&values[horizon - q4..]);
    let bound = first.clone() * first.lift(BOUND_FACTOR);
    // growth in the last half outranks the quarter comparison
    let (verdict, rule) = if trend > trend.lift(SLOPE_EPS) {
        (Verdict::NotSatisfied, format!("log test values grow with slope > {SLOPE_EPS}"))
    } else if last <= bound {
        (Verdict::Satisfied, format!("last-quarter max <= {BOUND_FACTOR} x first-quarter max"))
    } else {
        (Verdict::Inconclusive, "neither bounded nor growing".to_string())
    };
    Ok(CriterionReport::new(Criterion::Perron, values, trend, verdict, rule))
}

/// Riesz: `liminf (s_{2n}/(2n)!)^{1/2n} < ∞`, judged on the suffix minimum
/// `min_{n≤j≤H} t_j`.
pub fn riesz_diag<T: Real>(m: &MomentSequence<T>, horizon: usize) -> Result<CriterionReport<T>> {
    check_horizon(m, horizon, horizon)?;
    let logs = ln_perron_values(m, horizon);
    let values = exp_all(&logs);
    let mut suffix_min = logs.clone();
    for i in (0..horizon - 1).rev() {
        if suffix_min[i + 1] < suffix_min[i] {
            suffix_min[i] = suffix_min[i + 1].clone();
        }
    }
    let trend = tail_slope(&suffix_min);
    let q4 = quarter(horizon);
    let first = max_of(&values[..q4]);
    let last = max_of(&exp_all(&suffix_min[horizon - q4..]));
    let bound = first.clone() * first.lift(BOUND_FACTOR);
    let (verdict, rule) = if trend > trend.lift(SLOPE_EPS) {
        (Verdict::NotSatisfied, format!("log running minimum grows with slope > {SLOPE_EPS}"))
    } else if last <= bound {
        (Verdict::Satisfied, format!("running minimum <= {BOUND_FACTOR} x first-quarter max"))
    } else {
        (Verdict::Inconclusive, "running minimum neither bounded nor growing".to_string())
    };
    Ok(CriterionReport::new(Criterion::Riesz, values, trend, verdict, rule))
}

/// Carleman: `Σ s_{2n}^{-1/2n} = ∞`.
pub fn carleman_diag<T: Real>(m: &MomentSequence<T>, horizon: usize) -> Result<CriterionReport<T>> {
    check_horizon(m, horizon, horizon)?;
    let logs: Vec<T> = ln_moments(m, horizon)
        .into_iter()
        .enumerate()
        .map(|(i, l)| -l / m.ctx().int(2 * (i as i64 + 1)))
        .collect();
    let values = exp_all(&logs);
    let trend = tail_slope(&logs);
    let ratios: Vec<T> = values.windows(2).map(|w| w[1].clone() / &w[0]).collect();
    let mut partial_sums = Vec::with_capacity(horizon);
    let mut acc = m.ctx().zero();
    for v in &values {
        acc += v;
        partial_sums.push(acc.clone());
    }
    let weighted: Vec<T> = values
        .iter()
        .enumerate()
        .map(|(i, v)| v.clone() * v.lift_i64(i as i64 + 1))
        .collect();
    let q4 = quarter(horizon);
    let limit = m.ctx().real(1.0 - RATIO_DELTA);
    // Ratios must sit below the limit now and after extrapolating their
    // last-quarter trend over another horizon; 1 - c/n ratios fail this.
    let tail = &ratios[ratios.len() - q4..];
    let drift = T::max_of(m.ctx().zero(), if tail.len() > 1 { ols_slope(tail) } else { m.ctx().zero() });
    let projected = tail[tail.len() - 1].clone() + drift * m.ctx().int(horizon as i64);
    let contracting = tail.iter().all(|r| r < &limit) && projected < limit;
    let floor = min_of(&weighted[..q4]) / m.ctx().real(BOUND_FACTOR);
    let (verdict, rule) = if contracting {
        (Verdict::NotSatisfied, format!("last-quarter term ratios stable below 1 - {RATIO_DELTA}: series converges"))
    } else if min_of(&weighted[horizon - q4..]) >= floor {
        (Verdict::Satisfied, format!("n t_n bounded below by 1/{BOUND_FACTOR} of its first-quarter min"))
    } else {
        (Verdict::Inconclusive, "terms neither contracting nor bounded below".to_string())
    };
    let mut report = CriterionReport::new(Criterion::Carleman, values, trend, verdict, rule);
    report.partial_sums = partial_sums;
    report.ratios = ratios;
    Ok(report)
}

/// q-criterion: `lim q^{n/4} s_{2n}^{1/2n} = 0` implies determinacy.
pub fn q_criterion_diag<T: Real>(m: &MomentSequence<T>, q: &T, horizon: usize) -> Result<CriterionReport<T>> {
    check_horizon(m, horizon, horizon)?;
    let ln_q = q.ln();
    // log_q t_n = n/4 + ln s_{2n} / (2n ln q)
    let logq: Vec<T> = ln_moments(m, horizon)
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            let n = q.lift_i64(i as i64 + 1);
            n.clone() / q.lift_i64(4) + l / (n * q.lift_i64(2) * &ln_q)
        })
        .collect();
    let values: Vec<T> = logq.iter().map(|e| (e.clone() * &ln_q).exp()).collect();
    let trend = tail_slope(&logq);
    let q4 = quarter(horizon);
    let first = min_of(&values[..q4]);
    let last = min_of(&values[horizon - q4..]);
    let (verdict, rule) = if trend > trend.lift(SLOPE_EPS) {
        (Verdict::Satisfied, format!("log_q test values grow with slope > {SLOPE_EPS}: values tend to 0"))
    } else if last.clone() * last.lift(BOUND_FACTOR) >= first {
        (Verdict::NotSatisfied, format!("last-quarter min >= 1/{BOUND_FACTOR} of first-quarter min"))
    } else {
        (Verdict::Inconclusive, "neither decaying linearly nor bounded away from 0".to_string())
    };
    Ok(CriterionReport::new(Criterion::QCriterion, values, trend, verdict, rule))
}

/// Consistency of Perron ⇒ Riesz ⇒ Carleman among decided verdicts.
#[derive(Clone, Debug, Serialize)]
pub struct ChainCheck {
    pub perron: Verdict,
    pub riesz: Verdict,
    pub carleman: Verdict,
    pub consistent: bool,
    pub violations: Vec<String>,
}

pub fn implication_chain(perron: Verdict, riesz: Verdict, carleman: Verdict) -> ChainCheck {
    let mut violations = Vec::new();
    let decided = |v: Verdict| v != Verdict::Inconclusive;
    let broken = |a: Verdict, b: Verdict| decided(a) && decided(b) && a == Verdict::Satisfied && b == Verdict::NotSatisfied;
    if broken(perron, riesz) {
        violations.push("perron satisfied but riesz not_satisfied".to_string());
    }
    if broken(riesz, carleman) {
        violations.push("riesz satisfied but carleman not_satisfied".to_string());
    }
    if broken(perron, carleman) {
        violations.push("perron satisfied but carleman not_satisfied".to_string());
    }
    ChainCheck { perron, riesz, carleman, consistent: violations.is_empty(), violations }
}

/// All four diagnostics plus the chain check.
#[derive(Clone, Debug)]
pub struct CriteriaSummary<T> {
    pub perron: CriterionReport<T>,
    pub riesz: CriterionReport<T>,
    pub carleman: CriterionReport<T>,
    pub q_criterion: CriterionReport<T>,
    pub chain: ChainCheck,
}

pub fn evaluate_all<T: Real>(m: &MomentSequence<T>, horizon: usize) -> Result<CriteriaSummary<T>> {
    let perron = perron_diag(m, horizon)?;
    let riesz = riesz_diag(m, horizon)?;
    let carleman = carleman_diag(m, horizon)?;
    let q_criterion = q_criterion_diag(m, m.ctx().q(), horizon)?;
    let chain = implication_chain(perron.verdict, riesz.verdict, carleman.verdict);
    Ok(CriteriaSummary { perron, riesz, carleman, q_criterion, chain })
}

/// `e_n` as `f64`, for comparison with measured `log_q` test values.
pub fn exponent_to_f64(e: &Ratio<i64>) -> f64 {
    *e.numer() as f64 / *e.denom() as f64
}

/// One majorant series of the interchange argument.
#[derive(Clone, Debug)]
pub struct SeriesReport<T> {
    pub terms: Vec<T>,
    pub partial_sums: Vec<T>,
    /// `|a_{n+1}/a_n|`; zero where `a_n` vanishes.
    pub ratios: Vec<T>,
    /// Last-quarter ratios all below 1.
    pub convergent: bool,
    /// `|a_{H-1}| / |S_{H-1}|`, the last relative increment.
    pub cauchy_gap: T,
}

#[derive(Clone, Debug)]
pub struct ProofBoundReport<T> {
    pub lambda: T,
    pub horizon: usize,
    /// Terms with `√s_{4n}`.
    pub even: SeriesReport<T>,
    /// Terms with `√s_{2(2n+1)}`.
    pub odd: SeriesReport<T>,
}

/// Partial sums of
/// `Σ_n q^{n(n+1)} λ^{2n} √s_{4n} / ((q²,q²)_n (q^{2v+2},q²)_n)` and of the
/// companion with `√s_{2(2n+1)}`, for `n < horizon`.
pub fn proof_bound_check<T: Real>(
    m: &MomentSequence<T>,
    lambda: &T,
    ctx: &QContext<T>,
    horizon: usize,
) -> Result<ProofBoundReport<T>> {
    check_horizon(m, horizon, 2 * horizon - 1)?;
    let q = ctx.q();
    let q2 = q.clone() * q;
    let two = ctx.int(2);
    let a = q.powf(&(two.clone() * ctx.v() + &two));
    let lam2 = lambda.clone() * lambda;
    let mut even = Vec::with_capacity(horizon);
    let mut odd = Vec::with_capacity(horizon);
    for n in 0..horizon {
        let den = qpochhammer_finite(&q2, &q2, n) * qpochhammer_finite(&a, &q2, n);
        if den.is_zero() {
            return Err(Error::Pole(format!("(q^(2v+2); q^2)_{n} vanishes")));
        }
        let lam_pow = if n == 0 { ctx.one() } else { lam2.powi(n as i64) };
        let base = q.powi((n * (n + 1)) as i64) * lam_pow / den;
        even.push(base.clone() * m.s2n(2 * n).expect("checked").sqrt());
        odd.push(base * m.s2n(2 * n + 1).expect("checked").sqrt());
    }
    Ok(ProofBoundReport {
        lambda: lambda.clone(),
        horizon,
        even: series_report(even, ctx),
        odd: series_report(odd, ctx),
    })
}

fn series_report<T: Real>(terms: Vec<T>, ctx: &QContext<T>) -> SeriesReport<T> {
    let mut partial_sums = Vec::with_capacity(terms.len());
    let mut acc = ctx.zero();
    for t in &terms {
        acc += t;
        partial_sums.push(acc.clone());
    }
    let ratios: Vec<T> = terms
        .windows(2)
        .map(|w| if w[0].is_zero() { ctx.zero() } else { (w[1].clone() / &w[0]).abs() })
        .collect();
    let q4 = quarter(terms.len());
    let one = ctx.one();
    let convergent = ratios[ratios.len().saturating_sub(q4)..].iter().all(|r| r < &one);
    let last = partial_sums.last().expect("non-empty").clone();
    let cauchy_gap = if last.is_zero() {
        ctx.zero()
    } else {
        (terms.last().expect("non-empty").clone() / last).abs()
    };
    SeriesReport { terms, partial_sums, ratios, convergent, cauchy_gap }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Float;

    fn ctx(q: &str, v: &str) -> QContext<Float> {
        QContext::from_decimal(q, v, 256).unwrap()
    }

    fn family(q: &str, v: &str, p: i64, n_max: usize) -> MomentSequence<Float> {
        MomentSequence::closed_form(&ctx(q, v), Ratio::from_integer(p), n_max).unwrap()
    }

    fn toy(f: impl Fn(usize) -> Float, n_max: usize) -> MomentSequence<Float> {
        MomentSequence::supplied(&ctx("0.5", "0"), (0..=n_max).map(f).collect()).unwrap()
    }

    trait PowI {
        fn pow_i(self, n: i64) -> Float;
    }
    impl PowI for Float {
        fn pow_i(self, n: i64) -> Float {
            <Float as Real>::powi(&self, n)
        }
    }

    fn factorial(n: usize) -> Float {
        (1..=n).fold(Float::with_val(256, 1), |a, k| a * k as u32)
    }

    #[test]
    fn slope_of_a_line_is_exact() {
        let ys: Vec<f64> = (1..=20).map(|n| 0.25 * n as f64 - 3.0).collect();
        assert!((tail_slope(&ys) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn short_horizon_is_rejected() {
        let m = toy(|_| Float::with_val(256, 1), 20);
        assert!(matches!(perron_diag(&m, 4), Err(Error::InsufficientData { .. })));
        assert!(matches!(riesz_diag(&m, 4), Err(Error::InsufficientData { .. })));
        assert!(matches!(carleman_diag(&m, 4), Err(Error::InsufficientData { .. })));
        assert!(matches!(perron_diag(&m, 40), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn constant_moments() {
        let m = toy(|_| Float::with_val(256, 1), 60);
        assert_eq!(perron_diag(&m, 40).unwrap().verdict, Verdict::Satisfied);
        let c = carleman_diag(&m, 60).unwrap();
        assert_eq!(c.verdict, Verdict::Satisfied);
        assert!(c.test_values.iter().all(|t| *t == 1.0));
        assert_eq!(c.test_values.len(), 60);
        assert_eq!(c.partial_sums[59], 60.0);
        let qc = q_criterion_diag(&m, m.ctx().q(), 60).unwrap();
        assert_eq!(qc.verdict, Verdict::Satisfied);
        assert!((qc.trend.to_f64() - 0.25).abs() < 1e-40);
    }

    #[test]
    fn factorial_moments_satisfy_riesz() {
        let m = toy(|n| factorial(2 * n), 40);
        let r = riesz_diag(&m, 40).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied);
        assert!(r.test_values.iter().all(|t| (t.to_f64() - 1.0).abs() < 1e-60));
        // terms ~ e/2n: ratios 1 - 1/n are below 0.99 yet the series diverges
        let c = carleman_diag(&m, 40).unwrap();
        assert_eq!(c.verdict, Verdict::Satisfied);
        assert!(c.ratios.last().unwrap() < &0.99);
    }

    #[test]
    fn geometric_terms_converge() {
        // s_2n = 1.02^{2n²}: t_n = 1.02^{-n}, constant ratio just below 1 - δ
        let m = toy(|n| Float::with_val(256, 1.02).pow_i(2 * (n * n) as i64), 60);
        assert_eq!(carleman_diag(&m, 60).unwrap().verdict, Verdict::NotSatisfied);
    }

    #[test]
    fn p3_verdicts() {
        let m = family("0.5", "0", 3, 60);
        let p = perron_diag(&m, 40).unwrap();
        assert_eq!(p.verdict, Verdict::NotSatisfied);
        let last = &p.test_values[30..];
        assert!(last.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(riesz_diag(&m, 40).unwrap().verdict, Verdict::NotSatisfied);

        let c = carleman_diag(&m, 60).unwrap();
        assert_eq!(c.verdict, Verdict::NotSatisfied);
        let target = 0.5f64.powf(1.0 / 6.0);
        let r = c.ratios.last().unwrap().to_f64();
        assert!((r / target - 1.0).abs() < 0.01, "ratio {r}");

        let qc = q_criterion_diag(&m, m.ctx().q(), 60).unwrap();
        assert_eq!(qc.verdict, Verdict::Satisfied);
        assert!((qc.trend.to_f64() * 12.0 - 1.0).abs() < 0.05);
        assert_eq!(qc.conclusion, "determinate (q_criterion)");
    }

    #[test]
    fn p1_carleman_ratio() {
        let m = family("0.5", "0", 1, 60);
        let c = carleman_diag(&m, 60).unwrap();
        assert_eq!(c.verdict, Verdict::NotSatisfied);
        let r = c.ratios.last().unwrap().to_f64();
        assert!((r / 0.5f64.sqrt() - 1.0).abs() < 0.01);
    }

    #[test]
    fn p2_q_criterion_fails() {
        let m = family("0.5", "0", 2, 60);
        let qc = q_criterion_diag(&m, m.ctx().q(), 60).unwrap();
        assert_eq!(qc.verdict, Verdict::NotSatisfied);
        assert!(qc.conclusion.contains("inconclusive about determinacy"));
        // limit q^{-v/2} = 1 at v = 0
        let last = qc.test_values.last().unwrap().to_f64();
        assert!((last - 1.0).abs() < 0.02, "last {last}");
    }

    #[test]
    fn measured_exponents_approach_exact_plus_prefactor_limit() {
        // log_q t_n - e_n tends to 1 - (v+1)/p.
        let m = family("0.5", "0", 3, 40);
        let qc = q_criterion_diag(&m, m.ctx().q(), 40).unwrap();
        let e = exact_exponent_sequence(&Ratio::from_integer(3i64), 40);
        let ln_q = 0.5f64.ln();
        let gap = qc.test_values[39].to_f64().ln() / ln_q - exponent_to_f64(&e[39]);
        assert!((gap - 2.0 / 3.0).abs() < 0.05, "gap {gap}");
    }

    #[test]
    fn chain_rules() {
        use Verdict::*;
        assert!(implication_chain(Satisfied, Satisfied, Satisfied).consistent);
        assert!(implication_chain(NotSatisfied, NotSatisfied, NotSatisfied).consistent);
        assert!(!implication_chain(Satisfied, Inconclusive, NotSatisfied).consistent);
        assert!(implication_chain(Inconclusive, Satisfied, Inconclusive).consistent);
        assert!(!implication_chain(Satisfied, NotSatisfied, Satisfied).consistent);
    }

    #[test]
    fn proof_bound_p3() {
        let c = ctx("0.5", "0");
        let m = family("0.5", "0", 3, 119);
        let r = proof_bound_check(&m, &c.one(), &c, 60).unwrap();
        for s in [&r.even, &r.odd] {
            assert!(s.convergent);
            assert!(s.cauchy_gap.to_f64() < 1e-20);
            assert_eq!(s.terms.len(), 60);
        }
    }

    #[test]
    fn proof_bound_lambda_zero() {
        let c = ctx("0.5", "0");
        let m = family("0.5", "0", 3, 19);
        let r = proof_bound_check(&m, &c.zero(), &c, 10).unwrap();
        assert_eq!(r.even.partial_sums[9], m.s2n(0).unwrap().clone().sqrt());
        assert_eq!(r.odd.partial_sums[9], m.s2n(1).unwrap().clone().sqrt());
        assert!(matches!(proof_bound_check(&m, &c.one(), &c, 20), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn proof_bound_p1_runs() {
        let c = ctx("0.5", "0");
        let m = family("0.5", "0", 1, 59);
        let r = proof_bound_check(&m, &c.one(), &c, 30).unwrap();
        assert_eq!(r.even.ratios.len(), 29);
    }
}
