//! The Cartier operator on forms of degree 0 and 1 over F_p[T] or
//! F_p[T, T^{-1}], and its inverse p^{-q}·F^* for F = T^p.

use std::collections::BTreeMap;

use super::BaseKind;
use crate::error::{Error, Result};

/// f (degree 0) or f·ω (degree 1) with ω = dT/T on the torus and dT on the
/// affine line; coefficients in F_p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    pub kind: BaseKind,
    pub p: u64,
    pub degree: u8,
    coeffs: BTreeMap<i32, u64>,
}

impl Form {
    pub fn new(kind: BaseKind, p: u64, degree: u8, terms: &[(i32, i64)]) -> Result<Self> {
        if degree > 1 {
            return Err(Error::invalid("forms of degree 0 or 1 only"));
        }
        let mut f = Form { kind, p, degree, coeffs: BTreeMap::new() };
        for &(k, a) in terms {
            if kind == BaseKind::AffineLine && k < 0 {
                return Err(Error::invalid("negative exponent on the affine line"));
            }
            f.add_term(k, a.rem_euclid(p as i64) as u64);
        }
        Ok(f)
    }

    fn empty(&self, degree: u8) -> Self {
        Form { kind: self.kind, p: self.p, degree, coeffs: BTreeMap::new() }
    }

    fn add_term(&mut self, k: i32, a: u64) {
        let e = self.coeffs.entry(k).or_insert(0);
        *e = (*e + a) % self.p;
        if *e == 0 {
            self.coeffs.remove(&k);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, u64)> + '_ {
        self.coeffs.iter().map(|(&k, &a)| (k, a))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &Form) -> Form {
        let mut out = self.clone();
        for (k, a) in o.terms() {
            out.add_term(k, a);
        }
        out
    }

    pub fn sub(&self, o: &Form) -> Form {
        let mut out = self.clone();
        for (k, a) in o.terms() {
            out.add_term(k, self.p - a);
        }
        out
    }

    /// Exterior derivative of a 0-form.
    pub fn d(&self) -> Form {
        let mut out = self.empty(1);
        if self.degree == 1 {
            return out;
        }
        for (k, a) in self.terms() {
            let c = (a as i64 * k as i64).rem_euclid(self.p as i64) as u64;
            match self.kind {
                BaseKind::Torus => out.add_term(k, c),
                BaseKind::AffineLine if k > 0 => out.add_term(k - 1, c),
                BaseKind::AffineLine => {}
            }
        }
        out
    }

    pub fn is_closed(&self) -> bool {
        self.degree == 1 || self.d().is_zero()
    }

    /// Whether a 1-form is d of a 0-form.
    pub fn is_exact(&self) -> bool {
        self.degree == 1 && self.terms().all(|(k, _)| self.exact_exponent(k))
    }

    fn exact_exponent(&self, k: i32) -> bool {
        let p = self.p as i64;
        match self.kind {
            BaseKind::Torus => (k as i64).rem_euclid(p) != 0,
            BaseKind::AffineLine => (k as i64 + 1).rem_euclid(p) != 0,
        }
    }
}

/// C(T^{pk}) = T^k on closed 0-forms; on 1-forms C(T^{pk}·dT/T) = T^k·dT/T
/// (torus) and C(T^{pj+p−1}·dT) = T^j·dT (affine line), other monomials
/// going to 0.
pub fn cartier(f: &Form) -> Result<Form> {
    let p = f.p as i32;
    let mut out = f.empty(f.degree);
    if f.degree == 0 && !f.is_closed() {
        return Err(Error::invalid("the Cartier operator is defined on closed forms"));
    }
    for (k, a) in f.terms() {
        let src = if f.degree == 1 && f.kind == BaseKind::AffineLine { k + 1 } else { k };
        if src.rem_euclid(p) != 0 {
            continue;
        }
        let j = src / p - if f.degree == 1 && f.kind == BaseKind::AffineLine { 1 } else { 0 };
        out.add_term(j, a);
    }
    Ok(out)
}

/// p^{-q}·F^* for F = T^p: T^j ↦ T^{pj}, T^j·dT/T ↦ T^{pj}·dT/T and
/// T^j·dT ↦ T^{pj+p−1}·dT.
pub fn inverse_cartier(f: &Form) -> Form {
    let p = f.p as i32;
    let mut out = f.empty(f.degree);
    for (k, a) in f.terms() {
        let j = if f.degree == 1 && f.kind == BaseKind::AffineLine { p * k + p - 1 } else { p * k };
        out.add_term(j, a);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn characterizing_values() {
        let f = Form::new(BaseKind::Torus, 3, 1, &[(3, 1)]).unwrap();
        assert_eq!(cartier(&f).unwrap(), Form::new(BaseKind::Torus, 3, 1, &[(1, 1)]).unwrap());
        let g = Form::new(BaseKind::AffineLine, 3, 0, &[(1, 1), (4, 2)]).unwrap();
        assert!(cartier(&g.d()).unwrap().is_zero());
        let h = Form::new(BaseKind::AffineLine, 3, 1, &[(5, 2), (3, 1)]).unwrap();
        assert_eq!(cartier(&h).unwrap(), Form::new(BaseKind::AffineLine, 3, 1, &[(1, 2)]).unwrap());
        assert!(cartier(&g).is_err());
        assert_eq!(cartier(&inverse_cartier(&h)).unwrap(), h);
        assert!(inverse_cartier(&cartier(&h).unwrap()).sub(&h).is_exact());
    }
}
