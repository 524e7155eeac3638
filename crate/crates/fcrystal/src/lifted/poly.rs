use crate::padic::{WittElem, WittRing};

/// A Laurent polynomial Σ c_k T^k over Z/p^N, stored densely from `lo`.
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct Laurent {
    lo: i32,
    c: Vec<WittElem>,
}

impl Laurent {
    pub fn zero() -> Self {
        Laurent::default()
    }

    pub fn constant(a: WittElem) -> Self {
        Laurent { lo: 0, c: vec![a] }.trimmed()
    }

    pub fn monomial(a: WittElem, k: i32) -> Self {
        Laurent { lo: k, c: vec![a] }.trimmed()
    }

    pub fn from_dense(lo: i32, c: Vec<WittElem>) -> Self {
        Laurent { lo, c }.trimmed()
    }

    pub fn one(ring: &WittRing) -> Self {
        Laurent::constant(ring.one())
    }

    /// From (exponent, integer coefficient) pairs.
    pub fn from_terms(ring: &WittRing, terms: &[(i32, i64)]) -> Self {
        let mut out = Laurent::zero();
        for &(k, a) in terms {
            out = out.add(ring, &Laurent::monomial(ring.from_i64(a), k));
        }
        out
    }

    fn trimmed(mut self) -> Self {
        let zero = WittElem::default();
        while self.c.last() == Some(&zero) {
            self.c.pop();
        }
        let lead = self.c.iter().take_while(|x| **x == zero).count();
        if lead > 0 {
            self.c.drain(..lead);
            self.lo += lead as i32;
        }
        if self.c.is_empty() {
            self.lo = 0;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Lowest exponent with a non-zero coefficient (0 for the zero polynomial).
    pub fn lo(&self) -> i32 {
        self.lo
    }

    /// Highest exponent with a non-zero coefficient.
    pub fn hi(&self) -> i32 {
        self.lo + self.c.len() as i32 - 1
    }

    pub fn coeff(&self, k: i32) -> WittElem {
        let i = k - self.lo;
        if i < 0 || i as usize >= self.c.len() {
            WittElem::default()
        } else {
            self.c[i as usize]
        }
    }

    /// Non-zero terms (exponent, coefficient).
    pub fn terms(&self) -> impl Iterator<Item = (i32, WittElem)> + '_ {
        let zero = WittElem::default();
        self.c.iter().enumerate().filter(move |(_, x)| **x != zero).map(move |(i, x)| (self.lo + i as i32, *x))
    }

    pub fn add(&self, ring: &WittRing, o: &Laurent) -> Laurent {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let lo = self.lo.min(o.lo);
        let hi = self.hi().max(o.hi());
        let c = (lo..=hi).map(|k| ring.add(&self.coeff(k), &o.coeff(k))).collect();
        Laurent { lo, c }.trimmed()
    }

    pub fn sub(&self, ring: &WittRing, o: &Laurent) -> Laurent {
        self.add(ring, &o.neg(ring))
    }

    pub fn neg(&self, ring: &WittRing) -> Laurent {
        Laurent { lo: self.lo, c: self.c.iter().map(|x| ring.neg(x)).collect() }
    }

    pub fn scale(&self, ring: &WittRing, a: &WittElem) -> Laurent {
        Laurent { lo: self.lo, c: self.c.iter().map(|x| ring.mul(x, a)).collect() }.trimmed()
    }

    pub fn mul_pk(&self, ring: &WittRing, k: u32) -> Laurent {
        Laurent { lo: self.lo, c: self.c.iter().map(|x| ring.mul_pk(x, k)).collect() }.trimmed()
    }

    /// Multiplication by T^k.
    pub fn shift(&self, k: i32) -> Laurent {
        if self.is_zero() {
            return Laurent::zero();
        }
        Laurent { lo: self.lo + k, c: self.c.clone() }
    }

    pub fn mul(&self, ring: &WittRing, o: &Laurent) -> Laurent {
        if self.is_zero() || o.is_zero() {
            return Laurent::zero();
        }
        let mut c = vec![WittElem::default(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if ring.is_zero(a) {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = ring.add(&c[i + j], &ring.mul(a, b));
            }
        }
        Laurent { lo: self.lo + o.lo, c }.trimmed()
    }

    pub fn pow(&self, ring: &WittRing, e: u32) -> Laurent {
        let mut acc = Laurent::one(ring);
        for _ in 0..e {
            acc = acc.mul(ring, self);
        }
        acc
    }

    /// d/dT.
    pub fn derivative(&self, ring: &WittRing) -> Laurent {
        self.theta(ring).shift(-1)
    }

    /// T·d/dT.
    pub fn theta(&self, ring: &WittRing) -> Laurent {
        let c = (0..self.c.len()).map(|i| ring.mul(&self.c[i], &ring.from_i64((self.lo + i as i32) as i64))).collect();
        Laurent { lo: self.lo, c }.trimmed()
    }

    /// x(T^p).
    pub fn frob_tp(&self, p: u64) -> Laurent {
        let mut out = Laurent { lo: self.lo * p as i32, c: vec![WittElem::default(); (self.c.len().max(1) - 1) * p as usize + 1] };
        if self.is_zero() {
            return Laurent::zero();
        }
        for (i, a) in self.c.iter().enumerate() {
            out.c[i * p as usize] = *a;
        }
        out.trimmed()
    }

    /// Minimum valuation of the coefficients (N for zero).
    pub fn min_val(&self, ring: &WittRing) -> u32 {
        self.c.iter().map(|x| ring.val(x)).min().unwrap_or(ring.prec())
    }

    /// Divides every coefficient by p^k, assuming divisibility.
    pub fn div_pk(&self, ring: &WittRing, k: u32) -> Laurent {
        Laurent { lo: self.lo, c: self.c.iter().map(|x| ring.div_pk(x, k)).collect() }.trimmed()
    }

    /// Reduction modulo p^k.
    pub fn mod_pk(&self, ring: &WittRing, k: u32) -> Laurent {
        Laurent { lo: self.lo, c: self.c.iter().map(|x| ring.mod_pk(x, k)).collect() }.trimmed()
    }

    pub fn to_string(&self, ring: &WittRing) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(k, a)| {
                let c = ring.centered(&a)[0];
                match k {
                    0 => format!("{c}"),
                    1 => format!("{c}*T"),
                    _ => format!("{c}*T^{k}"),
                }
            })
            .collect();
        parts.join(" + ")
    }
}

/// Square matrices of Laurent polynomials, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LMat {
    pub n: usize,
    pub e: Vec<Laurent>,
}

impl LMat {
    pub fn zeros(n: usize) -> Self {
        LMat { n, e: vec![Laurent::zero(); n * n] }
    }

    pub fn identity(ring: &WittRing, n: usize) -> Self {
        let mut m = LMat::zeros(n);
        for i in 0..n {
            m.e[i * n + i] = Laurent::one(ring);
        }
        m
    }

    pub fn from_ints(ring: &WittRing, rows: &[&[i64]]) -> Self {
        let n = rows.len();
        LMat { n, e: rows.iter().flat_map(|r| r.iter().map(|&a| Laurent::constant(ring.from_i64(a)))).collect() }
    }

    pub fn at(&self, i: usize, j: usize) -> &Laurent {
        &self.e[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Laurent) {
        self.e[i * self.n + j] = x;
    }

    pub fn map(&self, f: impl Fn(&Laurent) -> Laurent) -> LMat {
        LMat { n: self.n, e: self.e.iter().map(f).collect() }
    }

    pub fn add(&self, ring: &WittRing, o: &LMat) -> LMat {
        LMat { n: self.n, e: self.e.iter().zip(&o.e).map(|(a, b)| a.add(ring, b)).collect() }
    }

    pub fn sub(&self, ring: &WittRing, o: &LMat) -> LMat {
        LMat { n: self.n, e: self.e.iter().zip(&o.e).map(|(a, b)| a.sub(ring, b)).collect() }
    }

    pub fn mul(&self, ring: &WittRing, o: &LMat) -> LMat {
        let n = self.n;
        let mut out = LMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Laurent::zero();
                for k in 0..n {
                    if !self.at(i, k).is_zero() && !o.at(k, j).is_zero() {
                        acc = acc.add(ring, &self.at(i, k).mul(ring, o.at(k, j)));
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn apply(&self, ring: &WittRing, v: &[Laurent]) -> Vec<Laurent> {
        (0..self.n)
            .map(|i| {
                let mut acc = Laurent::zero();
                for (k, x) in v.iter().enumerate() {
                    if !x.is_zero() && !self.at(i, k).is_zero() {
                        acc = acc.add(ring, &self.at(i, k).mul(ring, x));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn min_val(&self, ring: &WittRing) -> u32 {
        self.e.iter().map(|x| x.min_val(ring)).min().unwrap_or(ring.prec())
    }

    /// Determinant by cofactor expansion (ranks here are at most 5).
    pub fn det(&self, ring: &WittRing) -> Laurent {
        fn rec(ring: &WittRing, m: &LMat, rows: &[usize], cols: &mut Vec<usize>) -> Laurent {
            if rows.is_empty() {
                return Laurent::one(ring);
            }
            let i = rows[0];
            let mut acc = Laurent::zero();
            for idx in 0..cols.len() {
                let j = cols[idx];
                if m.at(i, j).is_zero() {
                    continue;
                }
                let c = cols.remove(idx);
                let minor = rec(ring, m, &rows[1..], cols);
                cols.insert(idx, c);
                let t = m.at(i, j).mul(ring, &minor);
                acc = if idx % 2 == 0 { acc.add(ring, &t) } else { acc.sub(ring, &t) };
            }
            acc
        }
        let rows: Vec<usize> = (0..self.n).collect();
        let mut cols = rows.clone();
        rec(ring, self, &rows, &mut cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let r = WittRing::new(3, 1, 6).unwrap();
        let x = Laurent::from_terms(&r, &[(-1, 1), (2, 2)]);
        let y = x.mul(&r, &x);
        assert_eq!(y, Laurent::from_terms(&r, &[(-2, 1), (1, 4), (4, 4)]));
        assert_eq!(x.derivative(&r), Laurent::from_terms(&r, &[(-2, -1), (1, 4)]));
        assert_eq!(x.theta(&r), Laurent::from_terms(&r, &[(-1, -1), (2, 4)]));
        assert_eq!(x.frob_tp(3), Laurent::from_terms(&r, &[(-3, 1), (6, 2)]));
        assert!(x.sub(&r, &x).is_zero());
    }
}
