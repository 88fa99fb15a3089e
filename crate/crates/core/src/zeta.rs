//! From the Frobenius matrix to the zeta function: characteristic polynomial, recovery of
//! the interesting factor Q(T) with Weil bounds, root checks and assembly.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::linalg::Matrix;
use crate::arith::{padic_embed, padic_to_integer, NumberField, Rational};
use crate::error::{Error, Result};
use crate::frobenius::{
    frobenius_matrix, frobenius_matrix_until, precision_bound, truncation_bound, FrobeniusMatrix,
    FrobeniusOptions, ReductionContext, ReductionMode,
};
use crate::poly::Poly;
use crate::singular::{equisingularity_check, is_odp, EquisingularityReport, SingularPointSet};
use crate::spectral::b_formula;

/// det(I − T·M), coefficients in ascending order (Faddeev–LeVerrier over Q).
pub fn charpoly(m: &Matrix<Rational>) -> Vec<Rational> {
    let b = m.len();
    let mut coeffs = vec![Rational::one()];
    if b == 0 {
        return coeffs;
    }
    let mul = |a: &Matrix<Rational>, c: &Matrix<Rational>| -> Matrix<Rational> {
        (0..b)
            .map(|i| {
                (0..b)
                    .map(|j| {
                        let mut s = Rational::zero();
                        for k in 0..b {
                            if !a[i][k].is_zero() && !c[k][j].is_zero() {
                                s += &a[i][k] * &c[k][j];
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    };
    let mut mk = m.clone();
    for k in 1..=b {
        let tr: Rational = (0..b).map(|i| mk[i][i].clone()).sum();
        let a = -tr / Rational::from_integer(BigInt::from(k));
        coeffs.push(a.clone());
        if k < b {
            for (i, row) in mk.iter_mut().enumerate() {
                row[i] += &a;
            }
            mk = mul(m, &mk);
        }
    }
    coeffs
}

fn p_valuation(x: &BigInt, p: &BigInt) -> i64 {
    let mut x = x.abs();
    let mut v = 0;
    while !x.is_zero() && x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v
}

fn rational_valuation(x: &Rational, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    Some(p_valuation(x.numer(), &pb) - p_valuation(x.denom(), &pb))
}

/// Q(T) recovered as an integer polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterestingFactor {
    /// Ascending coefficients, c_0 = 1.
    pub coefficients: Vec<BigInt>,
    /// ε in c_{b−i} = ε·q^{b−2i}·c_i.
    pub sign: i32,
    /// Whether c_i was lifted directly (otherwise it came from the functional equation).
    pub direct: Vec<bool>,
    /// p-adic digits known for each coefficient of det(I − T·F/q).
    pub coefficient_precision: Vec<i64>,
}

/// Recovers Q(T) = det(I − T·F/q) from F known modulo p^precision (n odd, q = p).
pub fn interesting_factor(f: &Matrix<Rational>, p: u64, n: usize, precision: u32) -> Result<InterestingFactor> {
    let b = f.len();
    let q = Rational::from_integer(BigInt::from(p));
    let g: Matrix<Rational> = f.iter().map(|r| r.iter().map(|x| x / &q).collect()).collect();
    let vmin = g
        .iter()
        .flatten()
        .filter_map(|x| rational_valuation(x, p))
        .min()
        .unwrap_or(0)
        .min(0);
    let c = charpoly(&g);
    let bounds = precision_bound(b, p, n).coefficient_bounds;
    let qb = BigInt::from(p);
    let mut coefficients: Vec<Option<BigInt>> = vec![None; b + 1];
    coefficients[0] = Some(BigInt::one());
    let mut coefficient_precision = vec![i64::MAX; b + 1];
    for i in 1..=b {
        let prec = precision as i64 - 1 + (i as i64 - 1) * vmin;
        coefficient_precision[i] = prec;
        if prec <= 0 {
            continue;
        }
        if let Some(v) = rational_valuation(&c[i], p) {
            if v < 0 {
                return Err(Error::AmbiguousLift(format!(
                    "coefficient {i} has p-adic valuation {v} and cannot be an integer"
                )));
            }
        }
        let bound = &bounds[i];
        // lift with the fewest digits that determine c_i
        let width = bound * 2u32 + 1u32;
        let mut needed = 0i64;
        let mut modulus = BigUint::one();
        while modulus <= width {
            modulus *= p;
            needed += 1;
        }
        if needed > prec {
            continue;
        }
        let x = padic_embed(&c[i], p, needed as u32)?;
        let lifted = padic_to_integer(&x, bound).map_err(|_| {
            Error::WeilViolation(format!(
                "coefficient of T^{i} has no lift within the Weil bound {bound} modulo {p}^{needed}"
            ))
        })?;
        coefficients[i] = Some(lifted);
    }
    let direct: Vec<bool> = coefficients.iter().map(|x| x.is_some()).collect();
    for (i, c) in coefficients.iter().enumerate().take(b / 2 + 1) {
        if c.is_none() {
            return Err(Error::AmbiguousLift(format!(
                "coefficient of T^{i} known only modulo {p}^{}, not enough for the Weil bound {}",
                coefficient_precision[i], bounds[i]
            )));
        }
    }
    let fill = |eps: i32, cs: &[Option<BigInt>]| -> Option<Vec<BigInt>> {
        let mut out: Vec<BigInt> = Vec::with_capacity(b + 1);
        for i in 0..=b {
            let mirror = b - i;
            let from_mirror = if mirror <= i {
                cs[mirror].as_ref().map(|c| {
                    // c_i = ε q^{i−(b−i)} c_{b−i} = ε q^{2i−b} c_mirror
                    let e = (2 * i - b) as u32;
                    c * qb.pow(e) * eps
                })
            } else {
                None
            };
            match (&cs[i], from_mirror) {
                (Some(a), Some(m)) if *a != m => return None,
                (Some(a), _) => out.push(a.clone()),
                (None, Some(m)) => out.push(m),
                (None, None) => return None,
            }
        }
        Some(out)
    };
    let mut candidates: Vec<(i32, Vec<BigInt>)> = [1, -1]
        .into_iter()
        .filter_map(|eps| fill(eps, &coefficients).map(|v| (eps, v)))
        .collect();
    if candidates.len() > 1 {
        candidates.retain(|(_, v)| weil_root_deviation(v, p, n).is_ok_and(|d| d <= WEIL_TOLERANCE));
    }
    match candidates.len() {
        1 => {
            let (sign, coefficients) = candidates.pop().unwrap();
            Ok(InterestingFactor {
                coefficients,
                sign,
                direct,
                coefficient_precision,
            })
        }
        0 => Err(Error::WeilViolation(
            "recovered coefficients do not satisfy the functional equation".into(),
        )),
        _ => Err(Error::AmbiguousLift(
            "the sign of the functional equation is undetermined at this precision".into(),
        )),
    }
}

/// The representative of x modulo p^digits in (−p^digits/2, p^digits/2], keeping any
/// power of p in the denominator.
pub fn reduce_mod_power(x: &Rational, p: u64, digits: u32) -> Rational {
    let pb = BigInt::from(p);
    let mut d = x.denom().clone();
    let mut e = 0u32;
    while d.is_multiple_of(&pb) {
        d /= &pb;
        e += 1;
    }
    let m = pb.pow(digits + e);
    let inv = d.modinv(&m).expect("unit denominator");
    let mut r = (x.numer() * inv).mod_floor(&m);
    if &r * 2 > m {
        r -= &m;
    }
    Rational::new(r, pb.pow(e))
}

/// Relative tolerance for |root| = q^{−(n−1)/2}.
pub const WEIL_TOLERANCE: f64 = 1e-6;

fn poly_trim(mut v: Vec<Rational>) -> Vec<Rational> {
    while v.last().is_some_and(|x| x.is_zero()) {
        v.pop();
    }
    v
}

fn poly_rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lb = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let lead = r.last().unwrap().clone() / &lb;
        let shift = r.len() - 1 - db;
        for (j, x) in b.iter().enumerate() {
            r[shift + j] -= &lead * x;
        }
        r.pop();
        r = poly_trim(r);
    }
    r
}

fn poly_div_exact(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let db = b.len() - 1;
    let mut r = a.to_vec();
    let mut q = vec![Rational::zero(); a.len() - db];
    for shift in (0..q.len()).rev() {
        let lead = r[shift + db].clone() / &b[db];
        for (j, x) in b.iter().enumerate() {
            r[shift + j] -= &lead * x;
        }
        q[shift] = lead;
    }
    q
}

/// Square-free part over Q.
fn squarefree(a: &[Rational]) -> Vec<Rational> {
    let a = poly_trim(a.to_vec());
    if a.len() <= 2 {
        return a;
    }
    let da: Vec<Rational> = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
        .collect();
    let (mut x, mut y) = (a.clone(), poly_trim(da));
    while !y.is_empty() {
        let r = poly_rem(&x, &y);
        x = y;
        y = r;
    }
    if x.len() <= 1 {
        return a;
    }
    poly_div_exact(&a, &x)
}

/// Complex roots by Aberth–Ehrlich iteration.
pub fn complex_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let c: Vec<f64> = coeffs.iter().map(|x| x / lead).collect();
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(c[deg], 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for i in (0..deg).rev() {
            dp = dp * z + p;
            p = p * z + c[i];
        }
        (p, dp)
    };
    let radius = c.iter().take(deg).map(|x| x.abs()).fold(0.0f64, f64::max).powf(1.0 / deg as f64).max(0.5);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / deg as f64))
        .collect();
    for _ in 0..2000 {
        let mut worst: f64 = 0.0;
        for k in 0..deg {
            let (p, dp) = eval(z[k]);
            if p == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..deg).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            z[k] -= w;
            worst = worst.max(w.norm() / z[k].norm().max(1.0));
        }
        if worst < 1e-15 {
            break;
        }
    }
    z
}

/// Largest | |u| − 1 | over the roots u of Q(u·q^{−(n−1)/2}), after removing repeated factors.
pub fn weil_root_deviation(coeffs: &[BigInt], q: u64, n: usize) -> Result<f64> {
    let half = (n as i32 - 1) as f64 / 2.0;
    let scale = (q as f64).powf(half);
    let rat: Vec<Rational> = coeffs.iter().map(|c| Rational::from_integer(c.clone())).collect();
    let sf = squarefree(&rat);
    if sf.len() <= 1 {
        return Ok(0.0);
    }
    let fl: Vec<f64> = sf
        .iter()
        .enumerate()
        .map(|(i, c)| c.to_f64().unwrap_or(f64::NAN) / scale.powi(i as i32))
        .collect();
    if fl.iter().any(|x| !x.is_finite()) {
        return Err(Error::WeilViolation("coefficients overflow double precision".into()));
    }
    Ok(complex_roots(&fl)
        .iter()
        .map(|r| (r.norm() - 1.0).abs())
        .fold(0.0, f64::max))
}

/// Integer polynomial in T, ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly(pub Vec<BigInt>);

impl IntPoly {
    fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn mul(&self, o: &IntPoly) -> IntPoly {
        let mut r = vec![BigInt::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                r[i + j] += a * b;
            }
        }
        IntPoly(r)
    }

    /// Exact division by a polynomial with constant term ±1, if it divides.
    fn div_exact(&self, d: &IntPoly) -> Option<IntPoly> {
        if d.0.len() > self.0.len() || !d.0[0].abs().is_one() {
            return None;
        }
        let mut r = self.0.clone();
        let mut q = vec![BigInt::zero(); self.0.len() - d.0.len() + 1];
        for i in 0..q.len() {
            let c = &r[i] * &d.0[0];
            for (j, x) in d.0.iter().enumerate() {
                r[i + j] -= &c * x;
            }
            q[i] = c;
        }
        r.iter().all(|x| x.is_zero()).then_some(IntPoly(q))
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let a = c.abs();
            let coef = if i > 0 && a.is_one() { String::new() } else { a.to_string() };
            let var = match i {
                0 => String::new(),
                1 => "T".into(),
                _ => format!("T^{i}"),
            };
            write!(f, "{sign}{coef}{var}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn cyclotomic(m: usize) -> Vec<BigInt> {
    // x^m − 1 divided by Φ_d for every proper divisor d
    let mut num = vec![BigInt::zero(); m + 1];
    num[0] = -BigInt::one();
    num[m] = BigInt::one();
    for d in 1..m {
        if m % d == 0 {
            let phi = cyclotomic(d);
            // monic division
            let mut r = num.clone();
            let mut q = vec![BigInt::zero(); r.len() - phi.len() + 1];
            for i in (0..q.len()).rev() {
                let c = r[i + phi.len() - 1].clone();
                for (j, x) in phi.iter().enumerate() {
                    r[i + j] -= &c * x;
                }
                q[i] = c;
            }
            num = q;
        }
    }
    num
}

fn totient(m: usize) -> usize {
    (1..=m).filter(|k| k.gcd(&m) == 1).count()
}

/// Factors of Q(T): Φ_m(q^w T) for cyclotomic m, then 1 + aT + q^{2w}T², then the rest.
pub fn factor_interesting(q_poly: &[BigInt], q: u64, n: usize) -> Vec<(IntPoly, u32)> {
    let w = ((n - 1) / 2) as u32;
    let qw = BigInt::from(q).pow(w);
    let mut rest = IntPoly(q_poly.to_vec());
    let mut out: Vec<(IntPoly, u32)> = Vec::new();
    let mut try_factor = |cand: IntPoly, rest: &mut IntPoly| {
        let mut e = 0;
        while rest.degree() >= cand.degree() && cand.degree() > 0 {
            match rest.div_exact(&cand) {
                Some(r) => {
                    *rest = r;
                    e += 1;
                }
                None => break,
            }
        }
        if e > 0 {
            out.push((cand, e));
        }
    };
    let mut m = 1;
    while m <= 4 * q_poly.len() + 4 {
        let phi = totient(m);
        if phi <= rest.degree() {
            // Φ_m(q^w T), normalized to constant term 1
            let c = cyclotomic(m);
            let mut v: Vec<BigInt> = c.iter().enumerate().map(|(i, x)| x * qw.pow(i as u32)).collect();
            if v[0].is_negative() {
                v.iter_mut().for_each(|x| *x = -x.clone());
            }
            try_factor(IntPoly(v), &mut rest);
        }
        m += 1;
    }
    let q2 = &qw * &qw;
    let limit = (&qw * 2u32).to_i64().unwrap_or(i64::MAX);
    for a in -limit..=limit {
        if rest.degree() < 2 {
            break;
        }
        try_factor(IntPoly(vec![BigInt::one(), BigInt::from(a), q2.clone()]), &mut rest);
    }
    if rest.degree() > 0 {
        out.push((rest, 1));
    }
    out.sort_by_key(|(p, _)| p.degree());
    out
}

/// ζ(T) = 1 / (Q(T)·Π_{i<n}(1 − q^i T)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZetaFunction {
    pub q: u64,
    pub n: usize,
    pub interesting: Vec<BigInt>,
}

impl ZetaFunction {
    pub fn new(q_poly: Vec<BigInt>, q: u64, n: usize) -> Self {
        ZetaFunction {
            q,
            n,
            interesting: q_poly,
        }
    }

    /// i for each factor (1 − q^i T) of the denominator besides Q.
    pub fn denominator_exponents(&self) -> Vec<u32> {
        (0..self.n as u32).collect()
    }

    /// #X(F_{q^r}) for r = 1..=count, from the log-derivative of ζ.
    pub fn point_counts(&self, count: usize) -> Vec<BigInt> {
        let c = &self.interesting;
        let coef = |i: usize| c.get(i).cloned().unwrap_or_default();
        // power sums of the reciprocal roots of Q: Q·Σ s_r T^r = −T·Q'
        let mut s: Vec<BigInt> = vec![BigInt::zero(); count + 1];
        for r in 1..=count {
            let mut v = -coef(r) * BigInt::from(r);
            for i in 1..r {
                v -= coef(i) * &s[r - i];
            }
            s[r] = v;
        }
        let qb = BigInt::from(self.q);
        (1..=count)
            .map(|r| {
                let base: BigInt = (0..self.n as u32).map(|i| qb.pow(i * r as u32)).sum();
                base + &s[r]
            })
            .collect()
    }

    pub fn factors(&self) -> Vec<(IntPoly, u32)> {
        factor_interesting(&self.interesting, self.q, self.n)
    }
}

impl fmt::Display for ZetaFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qb = BigInt::from(self.q);
        let mut factors: Vec<(IntPoly, u32)> = (0..self.n as u32)
            .map(|i| (IntPoly(vec![BigInt::one(), -qb.pow(i)]), 1))
            .collect();
        for (p, e) in self.factors() {
            match factors.iter_mut().find(|(x, _)| *x == p) {
                Some(slot) => slot.1 += e,
                None => factors.push((p, e)),
            }
        }
        factors.sort_by(|(a, _), (b, _)| {
            a.degree().cmp(&b.degree()).then_with(|| {
                let ka = a.0.get(1).map(|x| (x.abs(), x.is_positive()));
                let kb = b.0.get(1).map(|x| (x.abs(), x.is_positive()));
                ka.cmp(&kb)
            })
        });
        write!(f, "1/(")?;
        for (p, e) in factors {
            write!(f, "({p})")?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        write!(f, ")")
    }
}

/// Renders a factor list such as (1-5T)^3(1+25T^2).
pub fn format_factors(factors: &[(IntPoly, u32)]) -> String {
    if factors.is_empty() {
        return "1".into();
    }
    factors
        .iter()
        .map(|(p, e)| if *e > 1 { format!("({p})^{e}") } else { format!("({p})") })
        .collect()
}

/// deg Q must equal b(n, N) − τ.
pub fn degree_check(q_poly: &[BigInt], n: usize, big_n: u32, tau: usize) -> Result<()> {
    let expected = b_formula(n, big_n).checked_sub(tau).ok_or(Error::DegreeMismatch {
        expected: 0,
        found: q_poly.len().saturating_sub(1),
    })?;
    let found = q_poly.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
    if found != expected {
        return Err(Error::DegreeMismatch { expected, found });
    }
    Ok(())
}

/// Options for [`compute_zeta`].
#[derive(Clone, Debug, Default)]
pub struct ZetaOptions {
    /// Override of the recovery precision D.
    pub precision: Option<u32>,
    /// Fixed number of series terms; the result is then heuristic unless it reaches the
    /// formal truncation bound.
    pub terms: Option<usize>,
    /// Add terms one at a time until the recovered Q(T) repeats (heuristic).
    pub early_stop: bool,
    pub mode: ReductionMode,
    pub jobs: usize,
    /// Keep the per-term coordinates of every column.
    pub per_term: bool,
}

#[derive(Clone, Debug)]
pub struct ZetaDiagnostics {
    pub precision_bound: u32,
    pub formal_terms: usize,
    pub terms_used: usize,
    /// Digits of F trusted during recovery.
    pub working_precision: u32,
    pub certified: bool,
    pub mode: ReductionMode,
    pub padic_precision: Option<u32>,
    pub primes_used: usize,
    pub sign: i32,
    pub weil_deviation: f64,
    pub permutation: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ZetaResult {
    pub zeta: ZetaFunction,
    pub factor: InterestingFactor,
    pub frobenius: FrobeniusMatrix,
    pub equisingularity: EquisingularityReport,
    pub tau: usize,
    pub diagnostics: ZetaDiagnostics,
}

fn recover(fm: &FrobeniusMatrix, p: u64, n: usize, working: u32) -> Result<(InterestingFactor, f64)> {
    let factor = interesting_factor(&fm.matrix, p, n, working)?;
    let dev = weil_root_deviation(&factor.coefficients, p, n)?;
    if dev > WEIL_TOLERANCE {
        return Err(Error::WeilViolation(format!(
            "a root of Q has absolute value off q^(-(n-1)/2) by relative {dev:.3e}"
        )));
    }
    Ok((factor, dev))
}

/// The full pipeline for a nodal surface with known nodes.
pub fn compute_zeta(
    f: &Poly,
    nodes: &SingularPointSet,
    p: u64,
    opts: &ZetaOptions,
) -> Result<ZetaResult> {
    let n = f.nvars() - 1;
    if n % 2 == 0 {
        return Err(Error::Invalid("only odd n is supported".into()));
    }
    if p <= 2 || p as usize <= n.saturating_sub(1) {
        return Err(Error::Invalid(format!("p = {p} is too small")));
    }
    for (index, pt) in nodes.points.iter().enumerate() {
        if !is_odp(f, pt) {
            return Err(Error::NotOdp { index });
        }
    }
    let report = equisingularity_check(f, Some(nodes), p);
    if let Ok(t) = report.tau_rational {
        if t != nodes.tau {
            return Err(Error::Invalid(format!(
                "{} nodes given but the singular scheme has length {t}",
                nodes.tau
            )));
        }
    }
    if !report.passed {
        return Err(Error::Equisingularity {
            p,
            reasons: report.reasons.join("; "),
        });
    }
    let field: &NumberField = &nodes.field;
    let mut ctx = ReductionContext::for_prime(f, &nodes.points, field, p)?;
    let b = ctx.basis_len();
    let big_n = f.degree() as u32;
    let expected = b_formula(n, big_n) - nodes.tau;
    if b != expected {
        return Err(Error::DimensionMismatch { expected, found: b });
    }
    let d = opts.precision.unwrap_or_else(|| precision_bound(b, p, n).digits);
    let formal_terms = truncation_bound(d + 1, p, n);
    let fopts = FrobeniusOptions {
        precision: Some(d),
        terms: opts.terms,
        early_stop: false,
        per_term: opts.per_term,
        mode: opts.mode,
        jobs: opts.jobs.max(1),
    };
    let heuristic = opts.early_stop || opts.terms.is_some_and(|m| m < formal_terms);
    // digits beyond D+1 are not needed for the lift and a short series does not provide them
    let working_of = |fm: &FrobeniusMatrix| -> u32 { fm.padic_precision.map_or(d + 1, |k| k.min(d + 1)) };
    let (fm, factor, dev) = if opts.early_stop {
        let mut last: Option<Vec<BigInt>> = None;
        let mut accepted: Option<(InterestingFactor, f64)> = None;
        let fm = frobenius_matrix_until(&mut ctx, p, &fopts, |fm| {
            match recover(fm, p, n, working_of(fm)) {
                Ok((fac, dev)) => {
                    let same = last.as_ref() == Some(&fac.coefficients);
                    last = Some(fac.coefficients.clone());
                    if same {
                        accepted = Some((fac, dev));
                    }
                    same
                }
                Err(_) => {
                    last = None;
                    false
                }
            }
        })?;
        let (fac, dev) = match accepted {
            Some(x) => x,
            None => recover(&fm, p, n, working_of(&fm))?,
        };
        (fm, fac, dev)
    } else {
        let fm = frobenius_matrix(&mut ctx, p, &fopts)?;
        let (fac, dev) = recover(&fm, p, n, working_of(&fm))?;
        (fm, fac, dev)
    };
    degree_check(&factor.coefficients, n, big_n, nodes.tau)?;
    let diagnostics = ZetaDiagnostics {
        precision_bound: d,
        formal_terms,
        terms_used: fm.terms,
        working_precision: working_of(&fm),
        certified: !heuristic,
        mode: opts.mode,
        padic_precision: fm.padic_precision,
        primes_used: fm.primes_used,
        sign: factor.sign,
        weil_deviation: dev,
        permutation: ctx.permutation().to_vec(),
    };
    Ok(ZetaResult {
        zeta: ZetaFunction::new(factor.coefficients.clone(), p, n),
        factor,
        frobenius: fm,
        equisingularity: report,
        tau: nodes.tau,
        diagnostics,
    })
}
