use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

/// Exponent vector of a monomial in x_0..x_n.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(SmallVec<[u32; 4]>);

impl Monomial {
    pub fn new(exps: &[u32]) -> Self {
        Monomial(SmallVec::from_slice(exps))
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut m = Self::one(nvars);
        m.0[i] = 1;
        m
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, o: &Monomial) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a <= b)
    }

    /// self / o, assuming o divides self.
    pub fn div(&self, o: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn lcm(&self, o: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&o.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn is_coprime(&self, o: &Monomial) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Multiplies every exponent by `p`.
    pub fn scale(&self, p: u32) -> Monomial {
        Monomial(self.0.iter().map(|a| a * p).collect())
    }

    /// Decrements exponent i, or `None` when it is zero.
    pub fn lower(&self, i: usize) -> Option<Monomial> {
        (self.0[i] > 0).then(|| {
            let mut m = self.clone();
            m.0[i] -= 1;
            m
        })
    }

    pub fn raise(&self, i: usize) -> Monomial {
        let mut m = self.clone();
        m.0[i] += 1;
        m
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, e)| **e > 0)
            .map(|(i, &e)| if e == 1 { format!("x{i}") } else { format!("x{i}^{e}") })
            .collect();
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

/// Degree-reverse-lexicographic comparison.
pub fn grevlex_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    a.degree().cmp(&b.degree()).then_with(|| {
        for (x, y) in a.0.iter().zip(&b.0).rev() {
            if x != y {
                return y.cmp(x);
            }
        }
        Ordering::Equal
    })
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as u64
}

/// All monomials of the given degree, x_0-heaviest first (descending lex).
pub fn monomial_basis(nvars: usize, degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; nvars];
    fn rec(i: usize, rem: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i + 1 == cur.len() {
            cur[i] = rem;
            out.push(Monomial::new(cur));
            return;
        }
        for e in (0..=rem).rev() {
            cur[i] = e;
            rec(i + 1, rem - e, cur, out);
        }
    }
    if nvars == 0 {
        if degree == 0 {
            out.push(Monomial::new(&[]));
        }
        return out;
    }
    rec(0, degree, &mut cur, &mut out);
    out
}

/// Position of a monomial inside [`monomial_basis`] of its degree, without building the list.
#[derive(Clone, Debug)]
pub struct MonomialIndexer {
    nvars: usize,
    /// binom[a][b] = C(a, b) for b < nvars
    binom: Vec<Vec<usize>>,
}

impl MonomialIndexer {
    pub fn new(nvars: usize, max_degree: u32) -> Self {
        let rows = max_degree as usize + nvars + 1;
        let binom = (0..rows)
            .map(|a| (0..nvars.max(1)).map(|b| binomial(a as u64, b as u64) as usize).collect())
            .collect();
        MonomialIndexer { nvars, binom }
    }

    pub fn max_degree(&self) -> u32 {
        (self.binom.len() - self.nvars - 1) as u32
    }

    /// Number of monomials of degree d.
    pub fn dim(&self, d: u32) -> usize {
        if self.nvars == 0 {
            return (d == 0) as usize;
        }
        self.binom[d as usize + self.nvars - 1][self.nvars - 1]
    }

    #[inline]
    pub fn index(&self, exps: &[u32]) -> usize {
        let k = self.nvars;
        let mut rem: u32 = exps.iter().sum();
        let mut idx = 0;
        for i in 0..k.saturating_sub(1) {
            let a = exps[i];
            // monomials sharing the prefix but with a larger exponent at position i
            let free = k - 1 - i;
            if rem > a {
                idx += self.binom[(rem - a - 1) as usize + free][free];
            }
            rem -= a;
        }
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_sizes() {
        assert_eq!(monomial_basis(4, 0), vec![Monomial::one(4)]);
        assert_eq!(monomial_basis(4, 2).len(), 10);
        let idx = MonomialIndexer::new(4, 108);
        assert_eq!(idx.dim(108), 221815);
    }

    #[test]
    fn index_agrees_with_enumeration() {
        for nvars in 1..=5 {
            let idx = MonomialIndexer::new(nvars, 7);
            for d in 0..=7 {
                for (i, m) in monomial_basis(nvars, d).iter().enumerate() {
                    assert_eq!(idx.index(m.exps()), i, "{m} in degree {d}");
                }
                assert_eq!(idx.dim(d), monomial_basis(nvars, d).len());
            }
        }
    }

    #[test]
    fn grevlex_order() {
        let m = |e: &[u32]| Monomial::new(e);
        // x1^2 > x0*x2 in grevlex (smaller power of the last variable wins)
        assert_eq!(grevlex_cmp(&m(&[0, 2, 0]), &m(&[1, 0, 1])), Ordering::Greater);
        assert_eq!(grevlex_cmp(&m(&[2, 0, 0]), &m(&[0, 2, 0])), Ordering::Greater);
        assert_eq!(grevlex_cmp(&m(&[0, 0, 3]), &m(&[1, 0, 0])), Ordering::Greater);
    }
}
