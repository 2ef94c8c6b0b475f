//! Orthonormal polynomials of a symmetric measure, built from its moments.
//!
//! The Hankel matrix `[s_{i+j}]` is factored as `L Lᵀ`; the rows of `L⁻¹`
//! are the coefficients of `P_0, ..., P_N`. For a symmetric measure the
//! recurrence is `x P_n = b_n P_{n+1} + b_{n-1} P_{n-1}` with `b_n = k_n/k_{n+1}`.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, invert_lower};
use crate::moments::{weight_grid, MomentSequence};
use crate::qcore::{decay_window, jackson_integral, GridFunction, QContext};
use crate::scalar::{Cplx, Real};

/// Default cap on the polynomial degree.
pub const DEFAULT_MAX_DEGREE: usize = 24;
/// Relative increment below which a partial sum counts as flat.
pub const PLATEAU_TOL: f64 = 1e-10;
/// Consecutive flat increments that make a plateau.
pub const PLATEAU_RUN: usize = 5;

#[derive(Clone, Debug)]
pub struct OrthoBasis<T> {
    b: Vec<T>,
    coeffs: Vec<Vec<T>>,
}

impl<T: Real> OrthoBasis<T> {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
    /// `b_0, ..., b_{N-1}`.
    pub fn b(&self) -> &[T] {
        &self.b
    }
    /// `coeffs[n][j]` is the coefficient of `x^j` in `P_n`, `j ≤ n`.
    pub fn coeffs(&self) -> &[Vec<T>] {
        &self.coeffs
    }
    /// Leading coefficient `k_n`.
    pub fn k(&self, n: usize) -> &T {
        &self.coeffs[n][n]
    }

    /// `P_n(x)` by the three-term recurrence.
    pub fn eval(&self, n: usize, x: &T) -> T {
        self.eval_all(n, x).pop().expect("n + 1 values")
    }

    /// `P_0(x), ..., P_n(x)`.
    pub fn eval_all(&self, n: usize, x: &T) -> Vec<T> {
        assert!(n <= self.degree(), "degree {n} exceeds basis degree {}", self.degree());
        let mut out = Vec::with_capacity(n + 1);
        out.push(self.k(0).clone());
        if n >= 1 {
            out.push(x.clone() * &out[0] / &self.b[0]);
        }
        for m in 1..n {
            let next = (x.clone() * &out[m] - self.b[m - 1].clone() * &out[m - 1]) / &self.b[m];
            out.push(next);
        }
        out
    }

    /// `P_0(z), ..., P_n(z)` for complex `z`.
    pub fn eval_all_complex(&self, n: usize, z: &Cplx<T>) -> Vec<Cplx<T>> {
        assert!(n <= self.degree(), "degree {n} exceeds basis degree {}", self.degree());
        let one = self.k(0).one_like();
        let mut out = Vec::with_capacity(n + 1);
        out.push(Cplx::from_real(self.k(0).clone()));
        if n >= 1 {
            out.push((z.clone() * out[0].clone()).scale(&(one.clone() / &self.b[0])));
        }
        for m in 1..n {
            let t = z.clone() * out[m].clone() - out[m - 1].scale(&self.b[m - 1]);
            out.push(t.scale(&(one.clone() / &self.b[m])));
        }
        out
    }

    pub fn eval_complex(&self, n: usize, z: &Cplx<T>) -> Cplx<T> {
        self.eval_all_complex(n, z).pop().expect("n + 1 values")
    }

    /// `P_n(x)` from the coefficient table.
    pub fn eval_coeffs(&self, n: usize, x: &T) -> T {
        horner(&self.coeffs[n], x)
    }
}

fn horner<T: Real>(c: &[T], x: &T) -> T {
    let mut acc = x.zero_like();
    for a in c.iter().rev() {
        acc = acc * x + a;
    }
    acc
}

fn horner_complex<T: Real>(c: &[T], z: &Cplx<T>) -> Cplx<T> {
    let mut acc = Cplx::from_real(z.re.zero_like());
    for a in c.iter().rev() {
        acc = acc * z.clone() + Cplx::from_real(a.clone());
    }
    acc
}

/// Orthonormal basis of degree `n` from `s_0, ..., s_{2n}`.
pub fn recurrence_from_moments<T: Real>(m: &MomentSequence<T>, n: usize) -> Result<OrthoBasis<T>> {
    if m.n_max() < n {
        return Err(Error::InsufficientData { required: n + 1, available: m.n_max() + 1 });
    }
    let hankel: Vec<Vec<T>> = (0..=n)
        .map(|i| (0..=n).map(|j| m.moment(i + j).expect("checked")).collect())
        .collect();
    let l = cholesky(&hankel)?;
    let mut coeffs = invert_lower(&l);
    let zero = m.ctx().zero();
    for (i, row) in coeffs.iter_mut().enumerate() {
        row.truncate(i + 1);
        for (j, c) in row.iter_mut().enumerate() {
            if (i - j) % 2 == 1 {
                *c = zero.clone();
            }
        }
    }
    let b = (0..n).map(|i| coeffs[i][i].clone() / &coeffs[i + 1][i + 1]).collect();
    Ok(OrthoBasis { b, coeffs })
}

/// Coefficients of `Q_n(x) = ∫ (P_n(x) - P_n(y))/(x - y) dμ(y)`, degree `n - 1`
/// (`Q_0` is the empty polynomial).
pub fn second_kind<T: Real>(basis: &OrthoBasis<T>, m: &MomentSequence<T>) -> Result<Vec<Vec<T>>> {
    let n = basis.degree();
    if m.n_max() * 2 + 1 < n {
        return Err(Error::InsufficientData { required: n / 2 + 1, available: m.n_max() + 1 });
    }
    let zero = m.ctx().zero();
    Ok((0..=n)
        .map(|deg| {
            let c = &basis.coeffs()[deg];
            // (x^j - y^j)/(x - y) = Σ_{a<j} x^a y^{j-1-a}
            (0..deg)
                .map(|a| {
                    let mut acc = zero.clone();
                    for j in a + 1..=deg {
                        if !c[j].is_zero() {
                            acc += c[j].clone() * m.moment(j - 1 - a).expect("checked");
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect())
}

pub fn eval_q<T: Real>(q_table: &[Vec<T>], n: usize, x: &T) -> T {
    horner(&q_table[n], x)
}

pub fn eval_q_complex<T: Real>(q_table: &[Vec<T>], n: usize, z: &Cplx<T>) -> Cplx<T> {
    horner_complex(&q_table[n], z)
}

/// Partial sums over `n < N` of the four Nevanlinna series at `z`.
#[derive(Clone, Debug)]
pub struct NevanlinnaPartials<T> {
    pub z: Cplx<T>,
    pub n: usize,
    pub a: Cplx<T>,
    pub b: Cplx<T>,
    pub c: Cplx<T>,
    pub d: Cplx<T>,
    /// `|increment|` of A, B, C, D at `n = N - 1`; zero when `N = 0`.
    pub last_increments: [T; 4],
}

/// `A = zΣQ_n(0)Q_n(z)`, `B = -1 + zΣQ_n(0)P_n(z)`, `C = 1 + zΣP_n(0)Q_n(z)`,
/// `D = zΣP_n(0)P_n(z)`, summed over `n < N`.
pub fn nevanlinna_partials<T: Real>(
    basis: &OrthoBasis<T>,
    q_table: &[Vec<T>],
    z: &Cplx<T>,
    n: usize,
) -> Result<NevanlinnaPartials<T>> {
    if n > basis.degree() + 1 || n > q_table.len() {
        return Err(Error::InsufficientData { required: n, available: basis.degree() + 1 });
    }
    let zero = basis.k(0).zero_like();
    let one = basis.k(0).one_like();
    let czero = Cplx::from_real(zero.clone());
    let mut a = czero.clone();
    let mut b = Cplx::from_real(-one.clone());
    let mut c = Cplx::from_real(one);
    let mut d = czero;
    let mut last = [zero.clone(), zero.clone(), zero.clone(), zero.clone()];
    if n > 0 {
        let p_z = basis.eval_all_complex(n - 1, z);
        let p_0 = basis.eval_all(n - 1, &zero);
        for k in 0..n {
            let q_z = eval_q_complex(q_table, k, z);
            let q_0 = eval_q(q_table, k, &zero);
            let inc = [
                (z.clone() * q_z.clone()).scale(&q_0),
                (z.clone() * p_z[k].clone()).scale(&q_0),
                (z.clone() * q_z).scale(&p_0[k]),
                (z.clone() * p_z[k].clone()).scale(&p_0[k]),
            ];
            for (slot, i) in last.iter_mut().zip(&inc) {
                *slot = i.norm();
            }
            let [ia, ib, ic, id] = inc;
            a = a + ia;
            b = b + ib;
            c = c + ic;
            d = d + id;
        }
    }
    Ok(NevanlinnaPartials { z: z.clone(), n, a, b, c, d, last_increments: last })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evidence {
    ConsistentWithDeterminacy,
    SuggestiveOfIndeterminacy,
}

impl std::fmt::Display for Evidence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Evidence::ConsistentWithDeterminacy => "consistent with determinacy",
            Evidence::SuggestiveOfIndeterminacy => "suggestive of indeterminacy at this truncation",
        })
    }
}

#[derive(Clone, Debug)]
pub struct DeterminacyDiag<T> {
    /// `Σ_{n≤M} |P_n(z)|²` for `M = 0..=N`.
    pub partial_sums: Vec<T>,
    pub plateau: bool,
    pub evidence: Evidence,
}

pub fn determinacy_diag<T: Real>(basis: &OrthoBasis<T>, z: &Cplx<T>, n: usize) -> DeterminacyDiag<T> {
    let p = basis.eval_all_complex(n, z);
    let mut partial_sums = Vec::with_capacity(n + 1);
    let mut acc = basis.k(0).zero_like();
    for v in &p {
        acc += v.norm_sqr();
        partial_sums.push(acc.clone());
    }
    let tol = acc.lift(PLATEAU_TOL);
    let mut run = 0usize;
    let mut plateau = false;
    for w in partial_sums.windows(2) {
        if (w[1].clone() - &w[0]) < tol.clone() * &w[1] {
            run += 1;
            if run >= PLATEAU_RUN {
                plateau = true;
                break;
            }
        } else {
            run = 0;
        }
    }
    let evidence = if plateau {
        Evidence::SuggestiveOfIndeterminacy
    } else {
        Evidence::ConsistentWithDeterminacy
    };
    DeterminacyDiag { partial_sums, plateau, evidence }
}

/// `∫ P_i P_j dμ` for `i, j ≤ N` by Jackson integration against the weight of
/// `m`, on `ctx` extended toward zero until the grid weight drops below the
/// working precision.
pub fn gram_matrix<T: Real>(basis: &OrthoBasis<T>, m: &MomentSequence<T>, ctx: &QContext<T>) -> Result<Vec<Vec<T>>> {
    let weight = m
        .weight()
        .ok_or_else(|| Error::InvalidParameter("moment sequence carries no weight to integrate against".into()))?;
    let (lo, hi) = decay_window(ctx, f64::from(ctx.precision()) + 16.0);
    let ctx = ctx.clone().with_window(lo, hi)?;
    let w = weight_grid(weight, &ctx)?;
    let n = basis.degree();
    // values[k][i] = P_i(q^k); P_i(-x) = (-1)^i P_i(x) is used for the even part
    let values: Vec<Vec<T>> = ctx.exponents().map(|k| basis.eval_all(n, ctx.point(k))).collect();
    let mut gram = vec![vec![ctx.zero(); n + 1]; n + 1];
    for i in 0..=n {
        for j in i..=n {
            let entry = if (i + j) % 2 == 1 {
                ctx.zero()
            } else {
                let f = GridFunction::from_fn(&ctx, |k, _| {
                    let row = &values[(k - lo) as usize];
                    row[i].clone() * &row[j] * w.get(k).expect("same window")
                });
                jackson_integral(&f, &ctx)?.value
            };
            gram[j][i] = entry.clone();
            gram[i][j] = entry;
        }
    }
    Ok(gram)
}

/// `max |G_ij - δ_ij|`.
pub fn max_identity_deviation<T: Real>(g: &[Vec<T>]) -> T {
    let mut worst = g[0][0].zero_like();
    for (i, row) in g.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let d = if i == j { x.clone() - x.one_like() } else { x.clone() };
            worst = T::max_of(worst, d.abs());
        }
    }
    worst
}
