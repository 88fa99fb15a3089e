//! Frobenius action on the E2 basis: series terms, precision and truncation bounds,
//! and the reduction driver.
//!
//! With φ = f(x^p) and p·g = f^p − φ, the k-th series term expands as
//! p^n α_k Σ_{j≤k} C(k,j)(−1)^j [h f^j](x^p) X^{p−1} Ω / f^{p(s+j)}, X = x_0⋯x_n,
//! so only the b·M reductions B_j of these sparse numerators are needed.

pub mod bounds;
mod context;
mod crt;
mod engine;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::linalg::Matrix;
use crate::arith::{padic_embed, PrimeField, Rational, Rationals, WidePadicRing};
use crate::error::{Error, Result};
use crate::poly::{Monomial, Poly};

pub use bounds::{precision_bound, truncation_bound, PrecisionBound};
pub use context::{permute_monomial, permute_poly, HighSlice, KappaForm, LowSlice, ReductionContext};
pub use crt::{primes_below_2_31, rational_reconstruction, CrtAccumulator};
pub use engine::{Engine, GrevlexIndex, Lane};

/// One term of the Frobenius series: numerator · Ω / f^{pole_order}.
#[derive(Clone, Debug, PartialEq)]
pub struct FrobeniusTerm {
    pub k: usize,
    pub numerator: Poly,
    pub pole_order: usize,
}

fn big_binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// α_k = C(s+k−1, k), the k-th coefficient of (1−t)^{−s}.
pub fn series_coefficient(s: usize, k: usize) -> BigInt {
    if s == 0 {
        return if k == 0 { BigInt::one() } else { BigInt::zero() };
    }
    big_binomial((s + k - 1) as u64, k as u64)
}

fn cross_power(nvars: usize, e: u32) -> Monomial {
    Monomial::new(&vec![e; nvars])
}

/// g = (f^p − f(x^p)) / p.
pub fn frobenius_correction(f: &Poly, p: u64) -> Poly {
    let diff = f.pow(p as u32).sub(&f.frobenius_substitute(p as u32));
    diff.scale(&Rational::new(BigInt::one(), BigInt::from(p)))
}

/// The k-th term p^n α_k p^k h(x^p) X^{p−1} g^k Ω / f^{p(s+k)} of the Frobenius image of
/// hΩ/f^s.
pub fn frobenius_term(h: &Poly, s: usize, k: usize, p: u64, f: &Poly) -> FrobeniusTerm {
    let nvars = f.nvars();
    let n = nvars as u32 - 1;
    let scale = Rational::from_integer(
        BigInt::from(p).pow(n + k as u32) * series_coefficient(s, k),
    );
    let mut num = h
        .frobenius_substitute(p as u32)
        .mul_monomial(&cross_power(nvars, p as u32 - 1), &scale);
    if k > 0 {
        num = num.mul(&frobenius_correction(f, p).pow(k as u32));
    }
    FrobeniusTerm {
        k,
        numerator: num,
        pole_order: p as usize * (s + k),
    }
}

#[derive(Clone, Debug)]
pub struct FrobeniusOptions {
    /// p-adic precision of the final coefficients; defaults to the Weil-bound estimate.
    pub precision: Option<u32>,
    /// Number of series terms; defaults to the truncation bound at precision + 1.
    pub terms: Option<usize>,
    /// Stop once the matrix is stable modulo p^(precision+1) for two consecutive terms.
    pub early_stop: bool,
    /// Keep the contribution of every series term.
    pub per_term: bool,
    pub mode: ReductionMode,
    pub jobs: usize,
}

/// Arithmetic used for the reductions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReductionMode {
    /// In Z/p^K with K as large as a machine word allows; entries known modulo a power of p.
    #[default]
    Padic,
    /// Exact rationals recovered from word-size primes.
    Multimodular,
    /// Exact rationals throughout.
    Rational,
}

impl Default for FrobeniusOptions {
    fn default() -> Self {
        FrobeniusOptions {
            precision: None,
            terms: None,
            early_stop: false,
            per_term: false,
            mode: ReductionMode::Padic,
            jobs: 1,
        }
    }
}

/// Matrix of Frobenius on the E2 basis; column j is the image of basis element j.
#[derive(Clone, Debug)]
pub struct FrobeniusMatrix {
    pub p: u64,
    pub matrix: Matrix<Rational>,
    pub basis: Vec<(Monomial, usize)>,
    pub precision: u32,
    pub terms: usize,
    /// contributions[j][k] = coordinates contributed by series term k to column j.
    pub contributions: Option<Vec<Vec<Vec<Rational>>>>,
    /// Primes used by the modular reduction (0 otherwise).
    pub primes_used: usize,
    /// Entries are known modulo p^padic_precision; `None` when they are exact.
    pub padic_precision: Option<u32>,
}

/// Reduced coordinates of a batch of lanes.
#[derive(Clone, Debug)]
pub struct LaneResult {
    pub values: Vec<Vec<Rational>>,
    pub padic_precision: Option<u32>,
    pub primes_used: usize,
}

/// Reduces all lanes to E2 coordinates in the requested arithmetic.
pub fn reduce_lanes(ctx: &ReductionContext, lanes: &[Lane], p: u64, mode: ReductionMode, jobs: usize) -> Result<LaneResult> {
    let max_pole = lanes
        .iter()
        .flat_map(|l| l.terms.iter().map(|t| t.0))
        .max()
        .unwrap_or(0);
    match mode {
        ReductionMode::Rational => {
            let eng = Engine::new(Rationals, ctx, max_pole)
                .ok_or_else(|| Error::Internal("context not representable over Q".into()))?;
            Ok(LaneResult {
                values: eng.run(lanes, |_| {})?.0,
                padic_precision: None,
                primes_used: 0,
            })
        }
        ReductionMode::Padic => {
            let Some(ring) = WidePadicRing::new(p) else {
                return reduce_lanes(ctx, lanes, p, ReductionMode::Multimodular, jobs);
            };
            let Some(eng) = Engine::new(ring, ctx, max_pole) else {
                return reduce_lanes(ctx, lanes, p, ReductionMode::Multimodular, jobs);
            };
            let (vals, e) = eng.run(lanes, |_| {})?;
            let k = ring.precision();
            if e >= k {
                return Err(Error::AmbiguousLift(format!(
                    "p-adic working precision {k} exhausted by {e} divisions by p"
                )));
            }
            let denom = BigInt::from(p).pow(e);
            let values = vals
                .into_iter()
                .map(|v| v.iter().map(|x| Rational::new(ring.signed(x), denom.clone())).collect())
                .collect();
            Ok(LaneResult {
                values,
                padic_precision: Some(k - e),
                primes_used: 0,
            })
        }
        ReductionMode::Multimodular => multimodular(ctx, lanes, max_pole, jobs),
    }
}

fn multimodular(ctx: &ReductionContext, lanes: &[Lane], max_pole: usize, jobs: usize) -> Result<LaneResult> {
    let b = ctx.basis_len();
    let mut acc = CrtAccumulator::new(lanes.len() * b);
    let mut previous: Option<Vec<Rational>> = None;
    let mut used = 0;
    let mut primes = primes_below_2_31();
    let jobs = jobs.max(1);
    loop {
        let batch: Vec<u64> = primes.by_ref().take(jobs).collect();
        if batch.is_empty() || used > 4000 {
            return Err(Error::Internal("multimodular reconstruction did not stabilize".into()));
        }
        let results: Vec<Result<Option<Vec<u64>>>> = if jobs == 1 {
            batch.iter().map(|&l| run_mod(ctx, lanes, l, max_pole)).collect()
        } else {
            use rayon::prelude::*;
            batch.par_iter().map(|&l| run_mod(ctx, lanes, l, max_pole)).collect()
        };
        for (l, r) in batch.iter().zip(results) {
            let Some(values) = r? else { continue };
            acc.add(*l, &values);
            used += 1;
            let rec = acc.reconstruct();
            if let (Some(now), Some(prev)) = (&rec, &previous) {
                if now == prev {
                    let values = if b == 0 {
                        vec![Vec::new(); lanes.len()]
                    } else {
                        now.chunks(b).map(<[Rational]>::to_vec).collect()
                    };
                    return Ok(LaneResult {
                        values,
                        padic_precision: None,
                        primes_used: used,
                    });
                }
            }
            previous = rec;
        }
    }
}

fn run_mod(ctx: &ReductionContext, lanes: &[Lane], l: u64, max_pole: usize) -> Result<Option<Vec<u64>>> {
    let Some(eng) = Engine::new(PrimeField::new(l), ctx, max_pole) else {
        return Ok(None);
    };
    match eng.run(lanes, |_| {}) {
        Ok((v, _)) => Ok(Some(v.into_iter().flatten().collect())),
        Err(Error::Internal(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

struct Series {
    p: u64,
    n: usize,
    /// numerators[i][j] = [h_i f^j](x^p) X^{p−1}
    numerators: Vec<Vec<Poly>>,
    poles: Vec<usize>,
}

impl Series {
    fn new(ctx: &ReductionContext, p: u64, terms: usize) -> Self {
        let f = ctx.polynomial();
        let nvars = ctx.nvars();
        let x = cross_power(nvars, p as u32 - 1);
        let one = Rational::one();
        let mut fpow = vec![Poly::constant(nvars, one.clone())];
        for j in 1..terms {
            fpow.push(fpow[j - 1].mul(f));
        }
        let numerators = ctx
            .e2()
            .entries
            .iter()
            .map(|(h, _)| {
                let hp = Poly::monomial(h.clone(), one.clone());
                fpow.iter()
                    .map(|fj| hp.mul(fj).frobenius_substitute(p as u32).mul_monomial(&x, &one))
                    .collect()
            })
            .collect();
        Series {
            p,
            n: ctx.n(),
            numerators,
            poles: ctx.e2().entries.iter().map(|e| e.1).collect(),
        }
    }

    fn pole(&self, i: usize, j: usize) -> usize {
        self.p as usize * (self.poles[i] + j)
    }

    /// Coefficient of B_j in term k: p^n α_k C(k,j)(−1)^j.
    fn weight(&self, i: usize, k: usize, j: usize) -> BigInt {
        let w = BigInt::from(self.p).pow(self.n as u32)
            * series_coefficient(self.poles[i], k)
            * big_binomial(k as u64, j as u64);
        if j % 2 == 1 {
            -w
        } else {
            w
        }
    }
}

fn scaled(p: &Poly, c: &BigInt) -> Poly {
    p.scale(&Rational::from_integer(c.clone()))
}

fn add_into(acc: &mut [Rational], v: &[Rational], c: &BigInt) {
    let c = Rational::from_integer(c.clone());
    for (a, x) in acc.iter_mut().zip(v) {
        if !x.is_zero() {
            *a += x * &c;
        }
    }
}

/// Per-term contributions r_k from the reductions B_j of one basis element.
fn contributions_from(series: &Series, i: usize, b_j: &[Vec<Rational>], dim: usize) -> Vec<Vec<Rational>> {
    (0..b_j.len())
        .map(|k| {
            let mut r = vec![Rational::zero(); dim];
            for (j, bj) in b_j.iter().enumerate().take(k + 1) {
                add_into(&mut r, bj, &series.weight(i, k, j));
            }
            r
        })
        .collect()
}

fn stable_mod(a: &Matrix<Rational>, b: &Matrix<Rational>, p: u64, digits: u32) -> bool {
    a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| {
        match (padic_embed(x, p, digits), padic_embed(y, p, digits)) {
            (Ok(u), Ok(v)) => u == v,
            _ => false,
        }
    })
}

/// Computes the Frobenius matrix on the E2 basis of `ctx`.
pub fn frobenius_matrix(ctx: &mut ReductionContext, p: u64, opts: &FrobeniusOptions) -> Result<FrobeniusMatrix> {
    let b = ctx.basis_len();
    let n = ctx.n();
    let precision = opts
        .precision
        .unwrap_or_else(|| precision_bound(b, p, n).digits);
    if opts.early_stop {
        let mut history: Vec<Matrix<Rational>> = Vec::new();
        return frobenius_matrix_until(ctx, p, opts, |fm| {
            history.push(fm.matrix.clone());
            let h = history.len();
            h >= 3
                && stable_mod(&history[h - 1], &history[h - 2], p, precision + 1)
                && stable_mod(&history[h - 2], &history[h - 3], p, precision + 1)
        });
    }
    if opts.per_term {
        return frobenius_matrix_until(ctx, p, opts, |_| false);
    }
    let terms = opts
        .terms
        .unwrap_or_else(|| truncation_bound(precision + 1, p, n))
        .max(1);
    let basis = ctx.input_basis();
    if b == 0 {
        return Ok(empty_matrix(p, basis, precision, terms, opts.per_term));
    }
    let series = Series::new(ctx, p, terms);
    let max_pole = (0..b).map(|i| series.pole(i, terms - 1)).max().unwrap();
    ctx.prepare(max_pole)?;
    let lanes: Vec<Lane> = (0..b)
        .map(|i| Lane {
            terms: (0..terms)
                .map(|j| {
                    let beta: BigInt = (j..terms).map(|k| series.weight(i, k, j)).sum();
                    (series.pole(i, j), scaled(&series.numerators[i][j], &beta))
                })
                .collect(),
        })
        .collect();
    let res = reduce_lanes(ctx, &lanes, p, opts.mode, opts.jobs)?;
    Ok(FrobeniusMatrix {
        p,
        matrix: to_matrix(b, &res.values),
        basis,
        precision,
        terms,
        contributions: None,
        primes_used: res.primes_used,
        padic_precision: res.padic_precision,
    })
}

fn empty_matrix(p: u64, basis: Vec<(Monomial, usize)>, precision: u32, terms: usize, per_term: bool) -> FrobeniusMatrix {
    FrobeniusMatrix {
        p,
        matrix: Vec::new(),
        basis,
        precision,
        terms,
        contributions: per_term.then(Vec::new),
        primes_used: 0,
        padic_precision: None,
    }
}

fn to_matrix(b: usize, cols: &[Vec<Rational>]) -> Matrix<Rational> {
    (0..b).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect()
}

/// Reduces the series one term at a time (k = 0, 1, …, up to the configured truncation)
/// and hands the partial matrix after each term to `stop`; returns the first partial
/// matrix accepted by `stop`, or the full truncation. Per-term contributions are kept
/// when `opts.per_term` is set.
pub fn frobenius_matrix_until(
    ctx: &mut ReductionContext,
    p: u64,
    opts: &FrobeniusOptions,
    mut stop: impl FnMut(&FrobeniusMatrix) -> bool,
) -> Result<FrobeniusMatrix> {
    let b = ctx.basis_len();
    let n = ctx.n();
    let precision = opts
        .precision
        .unwrap_or_else(|| precision_bound(b, p, n).digits);
    let terms = opts
        .terms
        .unwrap_or_else(|| truncation_bound(precision + 1, p, n))
        .max(1);
    let basis = ctx.input_basis();
    if b == 0 {
        return Ok(empty_matrix(p, basis, precision, terms, opts.per_term));
    }
    let series = Series::new(ctx, p, terms);
    // b_all[i][j] = B_j for basis element i
    let mut b_all: Vec<Vec<Vec<Rational>>> = vec![Vec::new(); b];
    let mut primes_used = 0;
    let mut known: Option<u32> = None;
    let mut current = None;
    for j in 0..terms {
        let max_pole = (0..b).map(|i| series.pole(i, j)).max().unwrap();
        ctx.prepare(max_pole)?;
        let lanes: Vec<Lane> = (0..b)
            .map(|i| Lane {
                terms: vec![(series.pole(i, j), series.numerators[i][j].clone())],
            })
            .collect();
        let res = reduce_lanes(ctx, &lanes, p, opts.mode, opts.jobs)?;
        primes_used = primes_used.max(res.primes_used);
        if let Some(d) = res.padic_precision {
            known = Some(known.map_or(d, |k: u32| k.min(d)));
        }
        for (i, v) in res.values.into_iter().enumerate() {
            b_all[i].push(v);
        }
        let contributions: Vec<Vec<Vec<Rational>>> = (0..b)
            .map(|i| contributions_from(&series, i, &b_all[i], b))
            .collect();
        let cols: Vec<Vec<Rational>> = contributions
            .iter()
            .map(|rs| {
                let mut c = vec![Rational::zero(); b];
                for r in rs {
                    add_into(&mut c, r, &BigInt::one());
                }
                c
            })
            .collect();
        let fm = FrobeniusMatrix {
            p,
            matrix: to_matrix(b, &cols),
            basis: basis.clone(),
            precision,
            terms: j + 1,
            contributions: opts.per_term.then_some(contributions),
            primes_used,
            padic_precision: known,
        };
        let done = stop(&fm);
        current = Some(fm);
        if done {
            break;
        }
    }
    Ok(current.expect("at least one term"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, NumberField, NumberFieldElement};
    use crate::poly::parse_expression;

    fn p(s: &str) -> Poly {
        parse_expression(s, 4).unwrap().homogeneous().unwrap()
    }

    fn cayley_ctx() -> ReductionContext {
        let f = p("x0*x1*x2 + x0*x1*x3 + x0*x2*x3 + x1*x2*x3");
        let q = NumberField::rationals();
        let nodes: Vec<Vec<NumberFieldElement>> = (0..4)
            .map(|i| (0..4).map(|j| q.from_rational(rat((i == j) as i64, 1))).collect())
            .collect();
        ReductionContext::new(&f, &nodes, &q).unwrap()
    }

    #[test]
    fn cayley_first_term() {
        let f = p("x0*x1*x2 + x0*x1*x3 + x0*x2*x3 + x1*x2*x3");
        let t = frobenius_term(&p("x0*x1"), 2, 0, 5, &f);
        assert_eq!(t.pole_order, 10);
        assert_eq!(t.numerator, p("125*x0^9*x1^9*x2^4*x3^4"));
        assert_eq!(series_coefficient(2, 5), BigInt::from(6));
    }

    #[test]
    fn cayley_contributions() {
        let mut ctx = cayley_ctx();
        let opts = FrobeniusOptions {
            terms: Some(7),
            per_term: true,
            mode: ReductionMode::Rational,
            ..Default::default()
        };
        let fm = frobenius_matrix(&mut ctx, 5, &opts).unwrap();
        let r: Vec<Rational> = fm.contributions.as_ref().unwrap()[0]
            .iter()
            .map(|v| v[0].clone())
            .collect();
        let p5 = |e: u32| 5i64.pow(e);
        let expected = vec![
            rat(p5(2), 126),
            rat(p5(5), 9009),
            rat(p5(6), 34034),
            rat(1013 * p5(5), 5819814),
            rat(1487 * p5(6), 38244492),
            rat(2084 * p5(6), 49766871),
            rat(2087 * p5(8), 1185579252),
        ];
        assert_eq!(r, expected);
    }

    #[test]
    fn cayley_matrix_modular_matches_exact() {
        let mut ctx = cayley_ctx();
        let exact = frobenius_matrix(
            &mut ctx,
            5,
            &FrobeniusOptions {
                terms: Some(4),
                mode: ReductionMode::Rational,
                ..Default::default()
            },
        )
        .unwrap();
        let modular = frobenius_matrix(
            &mut ctx,
            5,
            &FrobeniusOptions {
                terms: Some(4),
                mode: ReductionMode::Multimodular,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(exact.matrix, modular.matrix);
        assert!(modular.primes_used >= 2);
        let padic = frobenius_matrix(
            &mut ctx,
            5,
            &FrobeniusOptions {
                terms: Some(4),
                ..Default::default()
            },
        )
        .unwrap();
        let d = padic.padic_precision.unwrap();
        assert!(d >= 10, "precision {d}");
        for (x, y) in exact.matrix.iter().flatten().zip(padic.matrix.iter().flatten()) {
            assert_eq!(padic_embed(x, 5, d).unwrap(), padic_embed(y, 5, d).unwrap());
        }
    }
}
