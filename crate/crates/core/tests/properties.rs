use num_bigint::BigInt;
use num_rational::Ratio;
use proptest::prelude::*;
use rug::Float;

use qmoment::criteria::{evaluate_all, exact_exponent_sequence};
use qmoment::moments::{sigma_exponent, MomentSequence};
use qmoment::orthopoly::{determinacy_diag, recurrence_from_moments};
use qmoment::qbessel::{qbessel_j, QBesselTransform};
use qmoment::qcore::{GridFunction, QContext};
use qmoment::scalar::{Cplx, Real};
use qmoment::MpContext;

const PREC: u32 = 256;

fn ctx(q: f64, v: f64) -> MpContext {
    QContext::new(Float::with_val(PREC, q), Float::with_val(PREC, v), PREC).unwrap()
}

fn ratio() -> impl Strategy<Value = Ratio<i64>> {
    (1i64..=8, 1i64..=4).prop_map(|(a, b)| Ratio::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn family_moments_are_positive_and_hankel_definite(
        p in ratio(),
        q in 0.3f64..0.8,
        v in -0.5f64..1.0,
    ) {
        let c = ctx(q, v);
        let m = MomentSequence::closed_form(&c, p, 8).unwrap();
        prop_assert!(m.entries().iter().all(|e| e.value > 0.0));
        prop_assert!((0..8).all(|k| m.moment(2 * k + 1).unwrap().is_zero()));
        let basis = recurrence_from_moments(&m, 8).unwrap();
        for n in 0..8 {
            prop_assert!(basis.b()[n] > 0.0);
            let back = basis.b()[n].clone() * basis.k(n + 1);
            let rel = ((back - basis.k(n)) / basis.k(n)).abs().to_f64();
            prop_assert!(rel < 1e-70);
        }
        for (n, row) in basis.coeffs().iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if (n - j) % 2 == 1 {
                    prop_assert!(c.is_zero());
                }
            }
        }
    }

    #[test]
    fn polynomials_have_parity_and_real_coefficients(x in -3.0f64..3.0, y in 0.1f64..3.0) {
        let c = ctx(0.5, 0.0);
        let m = MomentSequence::closed_form(&c, Ratio::from_integer(3), 10).unwrap();
        let basis = recurrence_from_moments(&m, 10).unwrap();
        let xf = Float::with_val(PREC, x);
        let pos = basis.eval_all(10, &xf);
        let neg = basis.eval_all(10, &-xf);
        for n in 0..=10 {
            let want = if n % 2 == 0 { pos[n].clone() } else { -pos[n].clone() };
            prop_assert_eq!(&neg[n], &want);
        }
        let z = Cplx::new(Float::with_val(PREC, x), Float::with_val(PREC, y));
        let a = determinacy_diag(&basis, &z, 10);
        let b = determinacy_diag(&basis, &z.conj(), 10);
        prop_assert_eq!(a.partial_sums, b.partial_sums);
    }

    #[test]
    fn exponent_subsequence_is_exact(p in 1i64..=8, m in 1i64..=200) {
        let r = |a: i64, b: i64| Ratio::new(BigInt::from(a), BigInt::from(b));
        let n = (p * m) as usize;
        let e = exact_exponent_sequence(&r(p, 1), n);
        // e_{pm} = pm/4 - (m+1)/2, so e_n/n -> 1/4 - 1/(2p)
        prop_assert_eq!(&e[n - 1], &(r(p * m, 4) - r(m + 1, 2)));
        if p <= 2 {
            prop_assert!(e[n - 1] < r(0, 1));
        }
        let sigma = sigma_exponent(&r(m, 1));
        prop_assert_eq!(sigma, r(-m * (m + 1), 2));
    }

    #[test]
    fn positive_exponent_tail_iff_p_above_two(p in 1i64..=8) {
        let r = |a: i64, b: i64| Ratio::new(BigInt::from(a), BigInt::from(b));
        let e = exact_exponent_sequence(&r(p, 1), (p * 400) as usize);
        let last = e.last().unwrap().clone();
        prop_assert_eq!(last > r(0, 1), p > 2);
    }

    #[test]
    fn verdict_chain_holds_on_synthetic_sequences(
        beta in 0.0f64..2.0,
        c in 0.5f64..2.0,
        gamma in 1u32..=2,
    ) {
        // s_2n = ((2n)!)^beta c^{n^gamma}
        let ctx = ctx(0.5, 0.0);
        let beta = Float::with_val(PREC, beta);
        let c = Float::with_val(PREC, c);
        let mut fact = Float::with_val(PREC, 1);
        let mut values = Vec::new();
        for n in 0..=60u32 {
            if n > 0 {
                fact *= (2 * n - 1) * (2 * n);
            }
            let growth = <Float as Real>::powi(&c, i64::from(n.pow(gamma)));
            values.push(<Float as Real>::powf(&fact, &beta) * growth);
        }
        let m = MomentSequence::supplied(&ctx, values).unwrap();
        let all = evaluate_all(&m, 60).unwrap();
        prop_assert!(all.chain.consistent, "{:?}", all.chain.violations);
    }

    #[test]
    fn bessel_kernel_is_even(x in 0.01f64..20.0) {
        let c = ctx(0.5, 0.0);
        let a = qbessel_j(&Float::with_val(PREC, x), &c).unwrap();
        let b = qbessel_j(&Float::with_val(PREC, -x), &c).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn transform_is_linear(alpha in -2.0f64..2.0, beta in -2.0f64..2.0, k in -4i64..=4) {
        let c = ctx(0.5, 0.0).with_window(-6, 6).unwrap();
        let t = QBesselTransform::new(&c).unwrap();
        let f = GridFunction::indicator(&c, k).unwrap();
        let g = GridFunction::from_fn(&c, |_, x| Float::with_val(PREC, 1) / (Float::with_val(PREC, 1) + x.clone() * x));
        let a = Float::with_val(PREC, alpha);
        let b = Float::with_val(PREC, beta);
        let lhs = t.apply(&GridFunction::axpby(&a, &f, &b, &g)).unwrap();
        let rhs = GridFunction::axpby(&a, &t.apply(&f).unwrap(), &b, &t.apply(&g).unwrap());
        let diff = GridFunction::axpby(&Float::with_val(PREC, 1), &lhs, &Float::with_val(PREC, -1), &rhs);
        prop_assert!(diff.l2_norm().to_f64() <= 1e-70 * (1.0 + rhs.l2_norm().to_f64()));
    }
}

#[test]
fn prefactor_log_grows_at_the_corrected_rate() {
    // (log_q s_2n - 2p sigma(n/p)) / 2n -> 1 - (v+1)/p
    for (p, v) in [(1i64, 0.0), (2, 0.0), (3, 0.0), (3, 1.0)] {
        let c = ctx(0.5, v);
        let m = MomentSequence::closed_form(&c, Ratio::from_integer(p), 60).unwrap();
        let n = 60usize;
        let exponent = *m.exponent(n).unwrap();
        let logq = m.s2n(n).unwrap().log2_abs() / 0.5f64.log2();
        let e = *exponent.numer() as f64 / *exponent.denom() as f64;
        let per_n = (logq - e) / (2.0 * n as f64);
        let want = 1.0 - (v + 1.0) / p as f64;
        assert!((per_n - want).abs() < 0.05, "p={p} v={v}: {per_n} vs {want}");
    }
}
