//! Dense polynomials over F_p, lowest degree first. Used for residue-field
//! moduli and for the principal-ideal computations over F_p[T].

pub type FPoly = Vec<u64>;

pub fn trim(a: &mut FPoly) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub fn deg(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub fn is_zero(a: &[u64]) -> bool {
    a.iter().all(|&c| c == 0)
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (p as i128, (a % p) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    assert_eq!(r0, 1, "{a} not invertible mod {p}");
    t0.rem_euclid(p as i128) as u64
}

pub fn add(a: &[u64], b: &[u64], p: u64) -> FPoly {
    let n = a.len().max(b.len());
    let mut c: FPoly = (0..n).map(|i| (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)) % p).collect();
    trim(&mut c);
    c
}

pub fn sub(a: &[u64], b: &[u64], p: u64) -> FPoly {
    let n = a.len().max(b.len());
    let mut c: FPoly = (0..n).map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p).collect();
    trim(&mut c);
    c
}

pub fn scale(a: &[u64], s: u64, p: u64) -> FPoly {
    let mut c: FPoly = a.iter().map(|&x| x * (s % p) % p).collect();
    trim(&mut c);
    c
}

pub fn mul(a: &[u64], b: &[u64], p: u64) -> FPoly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut c = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            c[i + j] = (c[i + j] + x * y) % p;
        }
    }
    trim(&mut c);
    c
}

/// Quotient and remainder; `b` must be nonzero.
pub fn divrem(a: &[u64], b: &[u64], p: u64) -> (FPoly, FPoly) {
    let db = deg(b).expect("division by zero polynomial");
    let lc_inv = inv_mod(b[db], p);
    let mut r: FPoly = a.to_vec();
    trim(&mut r);
    if r.len() <= db {
        return (vec![], r);
    }
    let mut q = vec![0u64; r.len() - db];
    while let Some(dr) = deg(&r) {
        if dr < db {
            break;
        }
        let c = r[dr] * lc_inv % p;
        q[dr - db] = c;
        for i in 0..=db {
            r[dr - db + i] = (r[dr - db + i] + p - c * b[i] % p) % p;
        }
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

pub fn monic(a: &[u64], p: u64) -> FPoly {
    match deg(a) {
        None => vec![],
        Some(d) => scale(a, inv_mod(a[d], p), p),
    }
}

pub fn gcd(a: &[u64], b: &[u64], p: u64) -> FPoly {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let (_, r) = divrem(&x, &y, p);
        x = y;
        y = r;
    }
    monic(&x, p)
}

/// Extended gcd: returns (g, s, t) with s·a + t·b = g, g monic.
pub fn xgcd(a: &[u64], b: &[u64], p: u64) -> (FPoly, FPoly, FPoly) {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    trim(&mut r0);
    trim(&mut r1);
    let (mut s0, mut s1): (FPoly, FPoly) = (vec![1], vec![]);
    let (mut t0, mut t1): (FPoly, FPoly) = (vec![], vec![1]);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        let s2 = sub(&s0, &mul(&q, &s1, p), p);
        let t2 = sub(&t0, &mul(&q, &t1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    match deg(&r0) {
        None => (vec![], s0, t0),
        Some(d) => {
            let inv = inv_mod(r0[d], p);
            (scale(&r0, inv, p), scale(&s0, inv, p), scale(&t0, inv, p))
        }
    }
}

/// Irreducibility by trial division with all monic polynomials of degree at most deg/2.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let Some(n) = deg(f) else { return false };
    if n == 0 {
        return false;
    }
    for k in 1..=n / 2 {
        let count = p.pow(k as u32);
        for idx in 0..count {
            let mut g = vec![0u64; k + 1];
            let mut t = idx;
            for c in g.iter_mut().take(k) {
                *c = t % p;
                t /= p;
            }
            g[k] = 1;
            if divrem(f, &g, p).1.is_empty() {
                return false;
            }
        }
    }
    true
}

/// The first monic irreducible polynomial of degree `d`, enumerating the
/// non-leading coefficients as base-p digits (constant term least significant).
pub fn first_irreducible(d: usize, p: u64) -> FPoly {
    let count = p.pow(d as u32);
    for idx in 0..count {
        let mut f = vec![0u64; d + 1];
        let mut t = idx;
        for c in f.iter_mut().take(d) {
            *c = t % p;
            t /= p;
        }
        f[d] = 1;
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_irreducibles() {
        assert_eq!(first_irreducible(1, 5), vec![0, 1]);
        assert_eq!(first_irreducible(2, 3), vec![1, 0, 1]);
        assert_eq!(first_irreducible(2, 2), vec![1, 1, 1]);
        assert_eq!(first_irreducible(3, 2), vec![1, 1, 0, 1]);
    }

    #[test]
    fn xgcd_identity() {
        let p = 7;
        let a = vec![1, 2, 3, 1];
        let b = vec![5, 0, 1];
        let (g, s, t) = xgcd(&a, &b, p);
        let lhs = add(&mul(&s, &a, p), &mul(&t, &b, p), p);
        assert_eq!(lhs, g);
        assert_eq!(g, gcd(&a, &b, p));
    }
}
