//! Dense pole-order reduction over an arbitrary field. Each graded piece S_d is stored
//! as a flat array indexed by grevlex position, so one forward sweep performs a full
//! division by the Gröbner basis; several independent inputs ("lanes") share the sweep.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::linalg::{self, Matrix};
use crate::arith::{Field, Rational};
use crate::error::{Error, Result};
use crate::poly::{binomial, Monomial, Poly};

use super::context::ReductionContext;

pub(crate) const MAX_VARS: usize = 8;
type Exps = [u32; MAX_VARS];

fn to_exps(m: &Monomial) -> Exps {
    let mut e = [0; MAX_VARS];
    e[..m.nvars()].copy_from_slice(m.exps());
    e
}

/// Position of a monomial among all monomials of its degree in decreasing grevlex order.
#[derive(Clone, Debug)]
pub struct GrevlexIndex {
    nvars: usize,
    /// binom[i][a] = C(a, i)
    binom: Vec<Vec<usize>>,
}

impl GrevlexIndex {
    pub fn new(nvars: usize, max_degree: u32) -> Self {
        assert!(nvars >= 1 && nvars <= MAX_VARS);
        let rows = max_degree as usize + nvars + 1;
        let binom = (0..nvars)
            .map(|i| (0..rows).map(|a| binomial(a as u64, i as u64) as usize).collect())
            .collect();
        GrevlexIndex { nvars, binom }
    }

    pub fn max_degree(&self) -> u32 {
        (self.binom[0].len() - self.nvars - 1) as u32
    }

    pub fn dim(&self, d: u32) -> usize {
        self.binom[self.nvars - 1][d as usize + self.nvars - 1]
    }

    #[inline]
    pub fn pos(&self, e: &[u32]) -> usize {
        let mut rem: u32 = e[..self.nvars].iter().sum();
        let mut pos = 0;
        for i in (1..self.nvars).rev() {
            let b = &self.binom[i];
            pos += b[rem as usize + i] - b[(rem - e[i]) as usize + i];
            rem -= e[i];
        }
        pos
    }

    /// Visits the monomials of degree d in position order.
    pub fn for_each(&self, d: u32, mut visit: impl FnMut(usize, &[u32])) {
        let k = self.nvars;
        let mut e = [0u32; MAX_VARS];
        e[0] = d;
        let mut pos = 0;
        loop {
            visit(pos, &e[..k]);
            pos += 1;
            // odometer over e[1..k] with e[0] = d − rest
            let mut i = 1;
            loop {
                if i == k {
                    return;
                }
                if e[0] > 0 {
                    e[i] += 1;
                    e[0] -= 1;
                    break;
                }
                e[0] += e[i];
                e[i] = 0;
                i += 1;
            }
        }
    }
}

#[derive(Clone, Debug)]
struct LiftTerm<E> {
    var: Option<usize>,
    exps: Exps,
    coef: E,
}

/// Gröbner data mapped into a field.
#[derive(Clone, Debug)]
struct GbData<E> {
    leads: Vec<Exps>,
    tails: Vec<Vec<(Exps, E)>>,
    /// Divergence of x^u·(cofactor row j): Σ_i u_i x^{u−e_i} M_ji + x^u Σ_i ∂_i M_ji.
    lifts: Vec<Vec<LiftTerm<E>>>,
}

#[derive(Clone, Debug)]
struct LowData<E> {
    s: usize,
    degree: i32,
    standard: Vec<usize>,
    reps: usize,
    offset: usize,
    projection: Matrix<E>,
    /// projection = p^shift · (true projection)
    shift: u32,
    /// W of each h_i then each exact polynomial, dense in degree − N.
    lifted: Vec<Vec<E>>,
}

#[derive(Clone, Debug)]
struct HighData<E> {
    degree: u32,
    standard: Vec<usize>,
    columns: Vec<(Exps, usize)>,
    solve: Matrix<E>,
    shift: u32,
}

/// One input to reduce: numerators entering at given pole orders, each scaled.
#[derive(Clone, Debug)]
pub struct Lane {
    pub terms: Vec<(usize, Poly)>,
}

/// The reduction context mapped into a field `K`.
pub struct Engine<'a, K: Field> {
    k: K,
    ctx: &'a ReductionContext,
    index: GrevlexIndex,
    gb: GbData<K::Elem>,
    kappa_u: Vec<Vec<(Exps, K::Elem)>>,
    kappa_hat: Vec<Vec<Vec<(Exps, K::Elem)>>>,
    low: Vec<LowData<K::Elem>>,
    high: Vec<Option<HighData<K::Elem>>>,
}

fn map_poly<K: Field>(k: &K, p: &Poly) -> Option<Vec<(Exps, K::Elem)>> {
    p.terms()
        .iter()
        .map(|(m, c)| k.from_rational(c).map(|x| (to_exps(m), x)))
        .collect()
}

fn p_valuation(x: &BigInt, p: u64) -> u32 {
    let p = BigInt::from(p);
    let mut v = 0;
    let mut y = x.clone();
    while !y.is_zero() && (&y % &p).is_zero() {
        y /= &p;
        v += 1;
    }
    v
}

/// Maps p^shift·m into `k`, with the least shift making every entry p-integral when
/// `k` is a p-adic residue ring.
fn map_scaled<K: Field>(k: &K, m: &Matrix<Rational>) -> Option<(Matrix<K::Elem>, u32)> {
    let shift = match k.uniformizer() {
        Some(p) => m.iter().flatten().map(|x| p_valuation(x.denom(), p)).max().unwrap_or(0),
        None => 0,
    };
    let scale = match k.uniformizer() {
        Some(p) if shift > 0 => Rational::from_integer(BigInt::from(p).pow(shift)),
        _ => Rational::one(),
    };
    let mapped = m
        .iter()
        .map(|row| row.iter().map(|x| k.from_rational(&(x * &scale))).collect())
        .collect::<Option<Matrix<K::Elem>>>()?;
    Some((mapped, shift))
}

impl<'a, K: Field> Engine<'a, K> {
    /// Maps all precomputed data into `k`; `None` if some denominator is not invertible.
    pub fn new(k: K, ctx: &'a ReductionContext, max_pole: usize) -> Option<Self> {
        let nv = ctx.nvars();
        let big_n = ctx.degree() as u32;
        let top = (max_pole as u32 * big_n).max(1);
        let index = GrevlexIndex::new(nv, top);
        let g = ctx.gb_data();
        let mut leads = Vec::new();
        let mut tails = Vec::new();
        let mut lifts = Vec::new();
        for (j, terms) in g.terms.iter().enumerate() {
            leads.push(to_exps(&terms[0].0));
            let mut t = Vec::new();
            for (m, c) in &terms[1..] {
                t.push((to_exps(m), k.from_rational(c)?));
            }
            tails.push(t);
            let mut l = Vec::new();
            for (i, mji) in g.cofactors[j].iter().enumerate() {
                for (e, c) in map_poly(&k, mji)? {
                    l.push(LiftTerm { var: Some(i), exps: e, coef: c });
                }
            }
            for (e, c) in map_poly(&k, &g.divergence[j])? {
                l.push(LiftTerm { var: None, exps: e, coef: c });
            }
            lifts.push(l);
        }
        let gb = GbData { leads, tails, lifts };
        let mut kappa_u = Vec::new();
        let mut kappa_hat = Vec::new();
        for kd in ctx.kappa() {
            kappa_u.push(map_poly(&k, &kd.divergence)?);
            let mut hs = Vec::new();
            for c in &kd.hat {
                hs.push(map_poly(&k, c)?);
            }
            kappa_hat.push(hs);
        }
        let mut eng = Engine {
            k,
            ctx,
            index,
            gb,
            kappa_u,
            kappa_hat,
            low: Vec::new(),
            high: Vec::new(),
        };
        let mut low = Vec::new();
        for sl in ctx.low_slices() {
            let (projection, shift) = map_scaled(&eng.k, &sl.projection)?;
            let standard = sl.standard.iter().map(|m| eng.index.pos(&to_exps(m))).collect();
            let mut lifted = Vec::new();
            if sl.s >= 2 {
                for p in sl.representatives.iter().chain(&sl.exact) {
                    let mut buf = vec![eng.k.zero(); eng.index.dim(sl.degree as u32)];
                    for (e, c) in map_poly(&eng.k, p)? {
                        buf[eng.index.pos(&e)] = c;
                    }
                    let wdeg = sl.degree - big_n as i32;
                    let mut w = if wdeg >= 0 {
                        vec![eng.k.zero(); eng.index.dim(wdeg as u32)]
                    } else {
                        Vec::new()
                    };
                    eng.divide(&mut buf, sl.degree as u32, &mut w, 1);
                    lifted.push(w);
                }
            }
            low.push(LowData {
                s: sl.s,
                degree: sl.degree,
                standard,
                reps: sl.representatives.len(),
                offset: sl.offset,
                projection,
                shift,
                lifted,
            });
        }
        eng.low = low;
        let mut high = vec![None; max_pole + 1];
        for (s, slot) in high.iter_mut().enumerate() {
            let Some(hs) = ctx.high_slice(s) else { continue };
            let (solve, shift) = map_scaled(&eng.k, &hs.solve)?;
            *slot = Some(HighData {
                degree: hs.degree,
                standard: hs.standard.iter().map(|m| eng.index.pos(&to_exps(m))).collect(),
                columns: hs.columns.iter().map(|(a, i)| (to_exps(a), *i)).collect(),
                solve,
                shift,
            });
        }
        eng.high = high;
        Some(eng)
    }

    pub fn field(&self) -> &K {
        &self.k
    }

    /// Divides the `lanes` interleaved inputs in `buf` (degree d) by the Gröbner basis,
    /// leaving the remainders in place and adding the divergence of the cofactors to `w`.
    fn divide(&self, buf: &mut [K::Elem], d: u32, w: &mut [K::Elem], lanes: usize) {
        let k = &self.k;
        let nv = self.index.nvars;
        let mut cs: Vec<K::Elem> = vec![k.zero(); lanes];
        let mut u = [0u32; MAX_VARS];
        let mut t = [0u32; MAX_VARS];
        let index = &self.index;
        index.for_each(d, |pos, e| {
            let base = pos * lanes;
            if buf[base..base + lanes].iter().all(|x| k.is_zero(x)) {
                return;
            }
            let Some(j) = self
                .gb
                .leads
                .iter()
                .position(|l| (0..nv).all(|i| l[i] <= e[i]))
            else {
                return;
            };
            for i in 0..nv {
                u[i] = e[i] - self.gb.leads[j][i];
            }
            for l in 0..lanes {
                cs[l] = std::mem::replace(&mut buf[base + l], k.zero());
            }
            for (te, tc) in &self.gb.tails[j] {
                for i in 0..nv {
                    t[i] = u[i] + te[i];
                }
                let q = index.pos(&t) * lanes;
                for l in 0..lanes {
                    if !k.is_zero(&cs[l]) {
                        k.sub_mul_assign(&mut buf[q + l], &cs[l], tc);
                    }
                }
            }
            for lt in &self.gb.lifts[j] {
                let coef = match lt.var {
                    Some(v) => {
                        if u[v] == 0 {
                            continue;
                        }
                        for i in 0..nv {
                            t[i] = u[i] + lt.exps[i];
                        }
                        t[v] -= 1;
                        k.mul(&lt.coef, &k.from_i64(u[v] as i64))
                    }
                    None => {
                        for i in 0..nv {
                            t[i] = u[i] + lt.exps[i];
                        }
                        lt.coef.clone()
                    }
                };
                let q = index.pos(&t) * lanes;
                for l in 0..lanes {
                    if !k.is_zero(&cs[l]) {
                        k.add_mul_assign(&mut w[q + l], &cs[l], &coef);
                    }
                }
            }
        });
    }

    fn scale_by_p(&self, v: u32, bufs: &mut [&mut [K::Elem]]) {
        let k = &self.k;
        let p = k.uniformizer().expect("p-adic ring");
        let f = k.from_rational(&Rational::from_integer(BigInt::from(p).pow(v))).unwrap();
        for buf in bufs.iter_mut() {
            for x in buf.iter_mut() {
                if !k.is_zero(x) {
                    *x = k.mul(x, &f);
                }
            }
        }
    }

    /// Reduces every lane to E2 coordinates. Returns the coordinates and an exponent e:
    /// the true values are p^(−e) times the returned ones (e = 0 over a field).
    pub fn run(&self, lanes: &[Lane], mut observe: impl FnMut(usize)) -> Result<(Vec<Vec<K::Elem>>, u32)> {
        let k = &self.k;
        let nl = lanes.len();
        let n = self.ctx.n();
        let nv = self.index.nvars;
        let big_n = self.ctx.degree() as u32;
        let b = self.ctx.basis_len();
        let p = k.uniformizer();
        let mut scale = 0u32;
        let mut captured = vec![k.zero(); b * nl];
        let Some(top) = lanes.iter().flat_map(|l| l.terms.iter().map(|t| t.0)).max() else {
            return Ok((vec![Vec::new(); nl], 0));
        };
        let numerator_degree = |s: usize| s as i64 * big_n as i64 - nv as i64;
        let mut cur: Vec<K::Elem> = Vec::new();
        let mut cur_deg = numerator_degree(top);
        if cur_deg >= 0 {
            cur = vec![k.zero(); self.index.dim(cur_deg as u32) * nl];
        }
        for s in (1..=top).rev() {
            let d = numerator_degree(s);
            debug_assert_eq!(d, cur_deg);
            let lift = match p {
                Some(p) if scale > 0 => {
                    Rational::from_integer(BigInt::from(p).pow(scale))
                }
                _ => Rational::one(),
            };
            for (li, lane) in lanes.iter().enumerate() {
                for (ps, poly) in &lane.terms {
                    if *ps != s {
                        continue;
                    }
                    for (m, c) in poly.terms() {
                        let x = k.from_rational(&(c * &lift)).ok_or_else(|| {
                            Error::Internal("input coefficient not invertible".into())
                        })?;
                        let q = self.index.pos(&to_exps(m)) * nl + li;
                        k.add_assign(&mut cur[q], &x);
                    }
                }
            }
            if d < 0 {
                cur_deg = numerator_degree(s - 1);
                continue;
            }
            let d = d as u32;
            let next_deg = d as i64 - big_n as i64;
            let mut w: Vec<K::Elem> = if s >= 2 && next_deg >= 0 {
                vec![k.zero(); self.index.dim(next_deg as u32) * nl]
            } else {
                Vec::new()
            };
            let shift = if s > n {
                self.high.get(s).and_then(Option::as_ref).map_or(0, |h| h.shift)
            } else {
                self.low.iter().find(|l| l.s == s).map_or(0, |l| l.shift)
            };
            if shift > 0 {
                self.scale_by_p(shift, &mut [&mut captured]);
                scale += shift;
            }
            if s > n {
                self.high_step(s, d, &mut cur, &mut w, nl, shift)?;
            } else {
                if s >= 2 {
                    self.divide(&mut cur, d, &mut w, nl);
                    if shift > 0 {
                        self.scale_by_p(shift, &mut [&mut w]);
                    }
                }
                self.low_step(s, &cur, &mut w, nl, &mut captured)?;
            }
            if s >= 2 {
                let mut denom = s as u64 - 1;
                if let Some(p) = p {
                    let mut v = 0;
                    while denom % p == 0 {
                        denom /= p;
                        v += 1;
                    }
                    if v > 0 {
                        self.scale_by_p(v, &mut [&mut captured]);
                        scale += v;
                    }
                }
                let inv = k.inv(&k.from_i64(denom as i64)).ok_or_else(|| {
                    Error::Internal("pole order not invertible in the working ring".into())
                })?;
                for x in w.iter_mut() {
                    if !k.is_zero(x) {
                        *x = k.mul(x, &inv);
                    }
                }
            }
            cur = w;
            cur_deg = next_deg;
            observe(s);
        }
        let out = captured.chunks(b.max(1)).map(<[K::Elem]>::to_vec).collect();
        Ok((if b == 0 { vec![Vec::new(); nl] } else { out }, scale))
    }

    fn high_step(
        &self,
        s: usize,
        d: u32,
        cur: &mut [K::Elem],
        w: &mut [K::Elem],
        nl: usize,
        shift: u32,
    ) -> Result<()> {
        let k = &self.k;
        let nv = self.index.nvars;
        let hd = self.high.get(s).and_then(Option::as_ref).ok_or_else(|| {
            Error::Internal(format!("no reduction data for pole order {s}"))
        })?;
        debug_assert_eq!(hd.degree, d);
        self.divide(cur, d, w, nl);
        let tau = hd.standard.len();
        let mut residues = vec![vec![k.zero(); tau]; nl];
        for (l, r) in residues.iter_mut().enumerate() {
            for (t, &pos) in hd.standard.iter().enumerate() {
                r[t] = std::mem::replace(&mut cur[pos * nl + l], k.zero());
            }
        }
        if shift > 0 {
            self.scale_by_p(shift, &mut [w]);
        }
        // subtract the exact combination Σ c_i · top coefficient of d(x^a κ_i)
        let mut t = [0u32; MAX_VARS];
        for (l, r) in residues.iter().enumerate() {
            if r.iter().all(|x| k.is_zero(x)) {
                continue;
            }
            let c = linalg::mat_vec(k, &hd.solve, r);
            for ((a, i), ci) in hd.columns.iter().zip(&c) {
                if k.is_zero(ci) {
                    continue;
                }
                for (e, x) in &self.kappa_u[*i] {
                    for v in 0..nv {
                        t[v] = a[v] + e[v];
                    }
                    k.sub_mul_assign(&mut cur[self.index.pos(&t) * nl + l], ci, x);
                }
                for v in 0..nv {
                    if a[v] == 0 {
                        continue;
                    }
                    let av = k.mul(ci, &k.from_i64(a[v] as i64));
                    for (e, x) in &self.kappa_hat[*i][v] {
                        for z in 0..nv {
                            t[z] = a[z] + e[z];
                        }
                        t[v] -= 1;
                        k.sub_mul_assign(&mut cur[self.index.pos(&t) * nl + l], &av, x);
                    }
                }
            }
        }
        self.divide(cur, d, w, nl);
        if shift > 0 {
            let mut flat: Vec<K::Elem> = residues.concat();
            self.scale_by_p(shift, &mut [&mut flat]);
            for (l, r) in residues.iter_mut().enumerate() {
                r.clone_from_slice(&flat[l * tau..(l + 1) * tau]);
            }
        }
        for (l, r) in residues.iter().enumerate() {
            for (t, &pos) in hd.standard.iter().enumerate() {
                let left = std::mem::replace(&mut cur[pos * nl + l], k.zero());
                if k.add(&left, &r[t]) != k.zero() {
                    return Err(Error::ResidueNotInIdeal { pole_order: s });
                }
            }
        }
        Ok(())
    }

    fn low_step(
        &self,
        s: usize,
        cur: &[K::Elem],
        w: &mut [K::Elem],
        nl: usize,
        captured: &mut [K::Elem],
    ) -> Result<()> {
        let k = &self.k;
        let Some(ld) = self.low.iter().find(|l| l.s == s) else {
            if cur.iter().any(|x| !k.is_zero(x)) {
                return Err(Error::Internal(format!(
                    "nonzero remainder at pole order {s} with an empty quotient"
                )));
            }
            return Ok(());
        };
        let b = self.ctx.basis_len();
        for (l, cap) in captured.chunks_mut(b).enumerate() {
            let r: Vec<K::Elem> = ld.standard.iter().map(|&p| cur[p * nl + l].clone()).collect();
            if r.iter().all(|x| k.is_zero(x)) {
                continue;
            }
            let coords = linalg::mat_vec(k, &ld.projection, &r);
            for (i, x) in coords[..ld.reps].iter().enumerate() {
                k.add_assign(&mut cap[ld.offset + i], x);
            }
            if s >= 2 {
                for (x, lifted) in coords.iter().zip(&ld.lifted) {
                    if k.is_zero(x) {
                        continue;
                    }
                    for (q, y) in lifted.iter().enumerate() {
                        if !k.is_zero(y) {
                            k.sub_mul_assign(&mut w[q * nl + l], x, y);
                        }
                    }
                }
            }
        }
        let _ = ld.degree;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grevlex_positions_follow_iteration() {
        let idx = GrevlexIndex::new(4, 9);
        for d in 0..=9 {
            let mut count = 0;
            let mut prev: Option<Monomial> = None;
            idx.for_each(d, |pos, e| {
                assert_eq!(pos, count);
                assert_eq!(idx.pos(e), pos);
                let m = Monomial::new(e);
                if let Some(p) = &prev {
                    assert_eq!(crate::poly::grevlex_cmp(p, &m), std::cmp::Ordering::Greater);
                }
                prev = Some(m);
                count += 1;
            });
            assert_eq!(count, idx.dim(d));
        }
    }
}
