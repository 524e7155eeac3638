//! Smith and Hermite normal forms over W_N, kernels and characteristic
//! polynomials. Exponent N stands for "zero at precision".

use super::mat::Mat;
use crate::padic::{WittElem, WittRing};

#[derive(Clone, Debug)]
pub struct Snf {
    /// Row transform, present when requested.
    pub u: Option<Mat>,
    /// Column transform, present when requested.
    pub v: Option<Mat>,
    /// Diagonal exponents, non-decreasing, length min(rows, cols).
    pub exps: Vec<u32>,
}

impl Snf {
    /// Number of exponents below precision.
    pub fn rank(&self, ring: &WittRing) -> usize {
        self.exps.iter().filter(|&&e| e < ring.prec()).count()
    }
}

/// U·A·V = diag(p^{e_i}) with valuation-greedy pivoting.
pub fn snf(ring: &WittRing, a: &Mat, want_u: bool, want_v: bool) -> Snf {
    let (n, m) = (a.rows, a.cols);
    let big = ring.prec();
    let mut w = a.clone();
    let mut u = want_u.then(|| Mat::identity(ring, n));
    let mut v = want_v.then(|| Mat::identity(ring, m));
    let r = n.min(m);
    let mut exps = vec![big; r];
    let mut floor = 0;
    for k in 0..r {
        let mut best = (big, k, k);
        'search: for i in k..n {
            for j in k..m {
                let e = ring.val(w.at(i, j));
                if e < best.0 {
                    best = (e, i, j);
                    if e == floor {
                        break 'search;
                    }
                }
            }
        }
        let (e, bi, bj) = best;
        if e >= big {
            break;
        }
        floor = e;
        w.swap_rows(k, bi);
        if let Some(u) = u.as_mut() {
            u.swap_rows(k, bi);
        }
        w.swap_cols(k, bj);
        if let Some(v) = v.as_mut() {
            v.swap_cols(k, bj);
        }
        let unit = ring.div_pk(w.at(k, k), e);
        let uinv = ring.inv_unit(&unit).expect("pivot unit");
        if uinv != ring.one() {
            for x in w.row_mut(k)[k..].iter_mut() {
                *x = ring.mul(x, &uinv);
            }
            if let Some(u) = u.as_mut() {
                for x in u.row_mut(k).iter_mut() {
                    *x = ring.mul(x, &uinv);
                }
            }
        }
        let pivot_row: Vec<WittElem> = w.row(k)[k..].to_vec();
        let urow: Option<Vec<WittElem>> = u.as_ref().map(|u| u.row(k).to_vec());
        for i in k + 1..n {
            let x = w.get(i, k);
            if ring.is_zero(&x) {
                continue;
            }
            let q = ring.div_pk(&x, e);
            let row = &mut w.row_mut(i)[k..];
            for (t, y) in row.iter_mut().zip(pivot_row.iter()) {
                if !ring.is_zero(y) {
                    *t = ring.sub(t, &ring.mul(&q, y));
                }
            }
            if let (Some(u), Some(ur)) = (u.as_mut(), urow.as_ref()) {
                for (t, y) in u.row_mut(i).iter_mut().zip(ur.iter()) {
                    if !ring.is_zero(y) {
                        *t = ring.sub(t, &ring.mul(&q, y));
                    }
                }
            }
        }
        for j in k + 1..m {
            let x = w.get(k, j);
            if ring.is_zero(&x) {
                continue;
            }
            let q = ring.div_pk(&x, e);
            w.set(k, j, ring.zero());
            if let Some(v) = v.as_mut() {
                for i in 0..m {
                    let y = v.get(i, k);
                    if !ring.is_zero(&y) {
                        let t = ring.sub(v.at(i, j), &ring.mul(&q, &y));
                        v.set(i, j, t);
                    }
                }
            }
        }
        exps[k] = e;
    }
    Snf { u, v, exps }
}

/// Elementary divisor exponents only.
pub fn elementary_divisors(ring: &WittRing, a: &Mat) -> Vec<u32> {
    snf(ring, a, false, false).exps
}

/// Generators of {z : A z ≡ 0 mod p^N}.
pub fn kernel(ring: &WittRing, a: &Mat) -> Mat {
    let s = snf(ring, a, false, true);
    let v = s.v.expect("requested");
    let big = ring.prec();
    let mut cols = Vec::new();
    for i in 0..a.cols {
        let e = s.exps.get(i).copied().unwrap_or(big);
        if e == 0 {
            continue;
        }
        let c = v.col(i);
        if e >= big {
            cols.push(c);
        } else {
            cols.push(c.iter().map(|x| ring.mul_pk(x, big - e)).collect());
        }
    }
    Mat::from_cols(a.cols, &cols)
}

/// Canonical lower-triangular column Hermite form of the span of `gens`
/// (plus p^floor·e_i when a floor is given). Column i has p^{k_i} at row i,
/// entries below reduced coordinatewise modulo p^{k_j} of their row.
/// Returns None when the span is not of full rank at precision.
pub fn hnf(ring: &WittRing, n: usize, gens: &[Vec<WittElem>], floor: Option<u32>) -> Option<(Mat, Vec<u32>)> {
    let big = ring.prec();
    let mut cols: Vec<Vec<WittElem>> = gens.iter().filter(|c| c.iter().any(|x| !ring.is_zero(x))).cloned().collect();
    if let Some(t) = floor {
        if t < big {
            for i in 0..n {
                let mut c = vec![ring.zero(); n];
                c[i] = ring.from_u64(ring.pk(t));
                cols.push(c);
            }
        }
    }
    let mut piv: Vec<Vec<WittElem>> = Vec::with_capacity(n);
    let mut ks = Vec::with_capacity(n);
    for i in 0..n {
        let mut best = (big, usize::MAX);
        for (j, c) in cols.iter().enumerate() {
            let e = ring.val(&c[i]);
            if e < best.0 {
                best = (e, j);
                if e == 0 {
                    break;
                }
            }
        }
        let (e, j) = best;
        if e >= big {
            return None;
        }
        let mut pc = cols.swap_remove(j);
        let unit = ring.div_pk(&pc[i], e);
        let uinv = ring.inv_unit(&unit).expect("unit");
        for x in pc.iter_mut().skip(i) {
            *x = ring.mul(x, &uinv);
        }
        for c in cols.iter_mut() {
            if ring.is_zero(&c[i]) {
                continue;
            }
            let q = ring.div_pk(&c[i], e);
            for r in i..n {
                if !ring.is_zero(&pc[r]) {
                    c[r] = ring.sub(&c[r], &ring.mul(&q, &pc[r]));
                }
            }
        }
        cols.retain(|c| c.iter().skip(i + 1).any(|x| !ring.is_zero(x)));
        piv.push(pc);
        ks.push(e);
    }
    // Reduce the strictly lower part, row by row from the top.
    for j in 0..n {
        for i in j + 1..n {
            let k = ks[i];
            let x = piv[j][i];
            let r = ring.mod_pk(&x, k);
            if r == x {
                continue;
            }
            let q = ring.div_pk(&ring.sub(&x, &r), k);
            let (left, right) = piv.split_at_mut(i);
            let src = &right[0];
            let dst = &mut left[j];
            for row in i..n {
                if !ring.is_zero(&src[row]) {
                    dst[row] = ring.sub(&dst[row], &ring.mul(&q, &src[row]));
                }
            }
        }
    }
    Some((Mat::from_cols(n, &piv), ks))
}

/// Solves H c = y for a Hermite basis H with pivot exponents `ks`.
pub fn hnf_solve(ring: &WittRing, h: &Mat, ks: &[u32], y: &[WittElem]) -> Option<Vec<WittElem>> {
    let n = h.rows;
    let mut y = y.to_vec();
    let mut c = vec![ring.zero(); n];
    for i in 0..n {
        if ring.is_zero(&y[i]) {
            continue;
        }
        if ring.val(&y[i]) < ks[i] {
            return None;
        }
        let q = ring.div_pk(&y[i], ks[i]);
        c[i] = q;
        for r in i..n {
            let hv = h.get(r, i);
            if !ring.is_zero(&hv) {
                y[r] = ring.sub(&y[r], &ring.mul(&q, &hv));
            }
        }
    }
    Some(c)
}

/// Coefficients of det(u·I − A), highest degree first (division free).
pub fn berkowitz(ring: &WittRing, a: &Mat) -> Vec<WittElem> {
    let n = a.rows;
    assert_eq!(n, a.cols);
    if n == 0 {
        return vec![ring.one()];
    }
    let mut v = vec![ring.one(), ring.neg(a.at(0, 0))];
    for r in 1..n {
        let sub = a.submatrix(0, r, 0, r);
        let row: Vec<WittElem> = (0..r).map(|j| a.get(r, j)).collect();
        let mut col: Vec<WittElem> = (0..r).map(|i| a.get(i, r)).collect();
        let mut t = Vec::with_capacity(r + 2);
        t.push(ring.one());
        t.push(ring.neg(a.at(r, r)));
        for _ in 0..r {
            let mut s = ring.zero();
            for (x, y) in row.iter().zip(col.iter()) {
                s = ring.add(&s, &ring.mul(x, y));
            }
            t.push(ring.neg(&s));
            col = sub.mul_vec(ring, &col);
        }
        let mut nv = vec![ring.zero(); r + 2];
        for (i, slot) in nv.iter_mut().enumerate() {
            let mut acc = ring.zero();
            for (j, vj) in v.iter().enumerate() {
                if i >= j {
                    acc = ring.add(&acc, &ring.mul(&t[i - j], vj));
                }
            }
            *slot = acc;
        }
        v = nv;
    }
    v
}

/// Determinant via the constant coefficient of the characteristic polynomial.
pub fn det(ring: &WittRing, a: &Mat) -> WittElem {
    let c = berkowitz(ring, a);
    let last = *c.last().unwrap();
    if a.rows % 2 == 1 {
        ring.neg(&last)
    } else {
        last
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_snf(ring: &WittRing, a: &Mat) {
        let s = snf(ring, a, true, true);
        let d = s.u.as_ref().unwrap().mul(ring, a).mul(ring, s.v.as_ref().unwrap());
        for i in 0..d.rows {
            for j in 0..d.cols {
                let expect = if i == j { ring.from_u64(ring.pk(s.exps[i])) } else { ring.zero() };
                assert_eq!(d.get(i, j), expect, "entry ({i},{j})");
            }
        }
        assert!(s.exps.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn snf_small() {
        let r = WittRing::new(2, 1, 8).unwrap();
        let a = Mat::from_ints(&r, &[&[2, 2], &[2, 6]]);
        check_snf(&r, &a);
        // minors oracle: gcd of entries has valuation 1, det = 8 has valuation 3
        assert_eq!(elementary_divisors(&r, &a), vec![1, 2]);
        let id = Mat::identity(&r, 3);
        assert_eq!(elementary_divisors(&r, &id), vec![0, 0, 0]);
    }

    #[test]
    fn snf_over_extension() {
        let r = WittRing::new(3, 2, 6).unwrap();
        let x = r.gen();
        let a = Mat::from_fn(3, 4, |i, j| {
            let base = r.pow(&x, (i + 2 * j) as u64);
            r.add(&r.scale(&base, (3 * i + j) as u64), &r.from_u64((i * j) as u64 * 9))
        });
        check_snf(&r, &a);
    }

    #[test]
    fn berkowitz_companion() {
        let r = WittRing::new(5, 1, 10).unwrap();
        let a = Mat::from_ints(&r, &[&[0, -5], &[1, 7]]);
        let c = berkowitz(&r, &a);
        assert_eq!(c, vec![r.one(), r.from_i64(-7), r.from_i64(5)]);
    }

    #[test]
    fn hnf_is_canonical() {
        let r = WittRing::new(2, 1, 10).unwrap();
        let g1 = Mat::from_ints(&r, &[&[1, 0], &[1, 4]]);
        let g2 = Mat::from_ints(&r, &[&[3, 1], &[7, 1]]);
        let (h1, k1) = hnf(&r, 2, &g1.columns(), None).unwrap();
        let (h2, k2) = hnf(&r, 2, &g2.columns(), None).unwrap();
        assert_eq!(k1, vec![0, 2]);
        assert_eq!((h1, k1), (h2, k2));
    }
}
