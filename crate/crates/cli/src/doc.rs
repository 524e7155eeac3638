//! The crystal description format.
//!
//! Every number is a decimal string. A Φ entry is `p^val` times either a
//! Witt vector given by its coefficients in the standard basis of W(F_q)
//! (`unit`, over a point) or a polynomial given by `[exponent, coefficient]`
//! terms (`terms`, over a curve; `[a, b, coefficient]` on the plane).
//! Connection entries are coefficient polynomials of dT (affine line),
//! dT/T (torus) or `[variable, a, b, coefficient]` terms on the plane.

use std::path::Path;

use fcrystal::fcrystal_point::FCrystalPoint;
use fcrystal::lifted::{AffineBase, BaseKind, BiPoly, LMat, Laurent, LiftedCrystal, TwoVarCrystal};
use fcrystal::padic::WittRing;
use fcrystal::semilinear::{Mat, PMatrix};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA: &str = "fcrystal-document/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Base {
    Point,
    AffineLine,
    Torus,
    AffinePlane,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub val: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalDocument {
    pub schema: String,
    pub name: String,
    pub p: String,
    pub d: String,
    pub precision: String,
    pub base: Base,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_window: Option<String>,
    pub rank: String,
    pub phi: Vec<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nabla: Option<Vec<Vec<Vec<Vec<String>>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frobenius_lift: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
}

/// Precision and window overrides from the command line.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub precision: Option<u32>,
    pub window: Option<i32>,
}

fn num<T: std::str::FromStr>(field: &str, s: &str) -> Result<T, CliError> {
    s.trim().parse().map_err(|_| CliError::input(format!("{field}: expected a decimal integer, found {s:?}")))
}

impl CrystalDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: CrystalDocument =
            serde_json::from_str(text).map_err(|e| CliError::input(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn p(&self) -> Result<u64, CliError> {
        num("p", &self.p)
    }

    pub fn rank(&self) -> Result<usize, CliError> {
        num("rank", &self.rank)
    }

    pub fn precision(&self, o: &Overrides) -> Result<u32, CliError> {
        match o.precision {
            Some(n) => Ok(n),
            None => num("precision", &self.precision),
        }
    }

    pub fn window(&self, o: &Overrides) -> Result<i32, CliError> {
        match (o.window, &self.degree_window) {
            (Some(w), _) => Ok(w),
            (None, Some(w)) => num("degree_window", w),
            (None, None) => Err(CliError::input("degree_window: required for a curve base")),
        }
    }

    /// Schema version, shapes and cross-field consistency.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA {
            return Err(CliError::input(format!("schema: expected {SCHEMA:?}, found {:?}", self.schema)));
        }
        let p: u64 = num("p", &self.p)?;
        if p < 2 || !(2..p).take_while(|k| k * k <= p).all(|k| p % k != 0) {
            return Err(CliError::input(format!("p: {p} is not a prime")));
        }
        let d: usize = num("d", &self.d)?;
        let _: u32 = num("precision", &self.precision)?;
        let n = self.rank()?;
        if self.phi.len() != n || self.phi.iter().any(|row| row.len() != n) {
            return Err(CliError::input(format!("phi: expected a {n}×{n} matrix")));
        }
        let point = self.base == Base::Point;
        if point == self.nabla.is_some() {
            return Err(CliError::input("nabla: required exactly when the base is not a point"));
        }
        if !point && d != 1 {
            return Err(CliError::input("d: crystals over curves are implemented over Z_p (d = 1)"));
        }
        if !point && self.degree_window.is_none() {
            return Err(CliError::input("degree_window: required for a curve base"));
        }
        let term_len = if self.base == Base::AffinePlane { 3 } else { 2 };
        for (i, row) in self.phi.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let at = format!("phi[{i}][{j}]");
                let _: i32 = num(&format!("{at}.val"), &e.val)?;
                match (point, &e.unit, &e.terms) {
                    (true, Some(u), None) if u.len() == d => {
                        for c in u {
                            let _: i64 = num(&format!("{at}.unit"), c)?;
                        }
                    }
                    (true, _, _) => return Err(CliError::input(format!("{at}: expected `unit` with {d} coefficients"))),
                    (false, None, Some(t)) => check_terms(&format!("{at}.terms"), t, term_len)?,
                    (false, _, _) => return Err(CliError::input(format!("{at}: expected `terms`"))),
                }
            }
        }
        if let Some(nb) = &self.nabla {
            if nb.len() != n || nb.iter().any(|row| row.len() != n) {
                return Err(CliError::input(format!("nabla: expected a {n}×{n} matrix")));
            }
            let len = if self.base == Base::AffinePlane { 4 } else { 2 };
            for (i, row) in nb.iter().enumerate() {
                for (j, t) in row.iter().enumerate() {
                    check_terms(&format!("nabla[{i}][{j}]"), t, len)?;
                }
            }
        }
        if let Some(g) = &self.frobenius_lift {
            if point || self.base == Base::AffinePlane {
                return Err(CliError::input("frobenius_lift: only meaningful on the affine line or the torus"));
            }
            check_terms("frobenius_lift", g, 2)?;
        }
        if let Some(w) = &self.weights {
            if w.len() != n {
                return Err(CliError::input(format!("weights: expected {n} entries")));
            }
            for x in w {
                let _: i32 = num("weights", x)?;
            }
        }
        Ok(())
    }

    fn entries(&self) -> Result<Vec<Vec<(i32, &Entry)>>, CliError> {
        self.phi.iter().map(|row| row.iter().map(|e| Ok((num::<i32>("val", &e.val)?, e))).collect()).collect()
    }

    fn min_val(&self) -> Result<i32, CliError> {
        Ok(self.entries()?.iter().flatten().map(|(v, _)| *v).min().unwrap_or(0))
    }

    pub fn to_point(&self, o: &Overrides) -> Result<FCrystalPoint, CliError> {
        if self.base != Base::Point {
            return Err(CliError::input("base: expected `point`"));
        }
        let d: usize = num("d", &self.d)?;
        let ring = WittRing::new(self.p()?, d, self.precision(o)?)?;
        let n = self.rank()?;
        let vmin = self.min_val()?;
        let entries = self.entries()?;
        let modulus = ring.modulus() as i64;
        let mut m = Mat::zeros(n, n);
        for (i, row) in entries.iter().enumerate() {
            for (j, (v, e)) in row.iter().enumerate() {
                let cs: Vec<u64> = e
                    .unit
                    .as_ref()
                    .expect("validated")
                    .iter()
                    .map(|c| num::<i64>("unit", c).map(|x| x.rem_euclid(modulus) as u64))
                    .collect::<Result<_, _>>()?;
                m.set(i, j, ring.mul_pk(&ring.from_coeffs(&cs), (v - vmin) as u32));
            }
        }
        Ok(FCrystalPoint::new(&ring, PMatrix::new(vmin, m, ring.prec()))?)
    }

    pub fn base_kind(&self) -> Result<BaseKind, CliError> {
        match self.base {
            Base::AffineLine => Ok(BaseKind::AffineLine),
            Base::Torus => Ok(BaseKind::Torus),
            _ => Err(CliError::input("base: expected `affine_line` or `torus`")),
        }
    }

    pub fn to_lifted(&self, o: &Overrides) -> Result<LiftedCrystal, CliError> {
        let kind = self.base_kind()?;
        let prec = self.precision(o)?;
        let ring = WittRing::new(self.p()?, 1, prec)?;
        let g = match &self.frobenius_lift {
            Some(t) => laurent(&ring, t)?,
            None => Laurent::zero(),
        };
        let base = AffineBase::new(kind, self.p()?, prec, self.window(o)?, g)?;
        let n = self.rank()?;
        let vmin = self.min_val()?;
        let mut phi = LMat::zeros(n);
        for (i, row) in self.entries()?.iter().enumerate() {
            for (j, (v, e)) in row.iter().enumerate() {
                let x = laurent(&ring, e.terms.as_ref().expect("validated"))?;
                phi.set(i, j, x.mul_pk(&ring, (v - vmin) as u32));
            }
        }
        let mut nabla = LMat::zeros(n);
        for (i, row) in self.nabla.as_ref().expect("validated").iter().enumerate() {
            for (j, t) in row.iter().enumerate() {
                nabla.set(i, j, laurent(&ring, t)?);
            }
        }
        let weights = match &self.weights {
            Some(w) => Some(w.iter().map(|x| num("weights", x)).collect::<Result<Vec<i32>, _>>()?),
            None => None,
        };
        Ok(LiftedCrystal::new(&base, vmin, phi, nabla, weights)?)
    }

    /// Frobenius data over W[T1, T2]; the connection is validated but not
    /// used by the plane computations.
    pub fn to_plane(&self, o: &Overrides) -> Result<TwoVarCrystal, CliError> {
        if self.base != Base::AffinePlane {
            return Err(CliError::input("base: expected `affine_plane`"));
        }
        let ring = WittRing::new(self.p()?, 1, self.precision(o)?)?;
        let vmin = self.min_val()?;
        let mut phi = Vec::new();
        for row in self.entries()? {
            let mut out = Vec::new();
            for (v, e) in row {
                let scale = (self.p()? as i64).pow((v - vmin) as u32);
                let terms: Vec<((u32, u32), i64)> = e
                    .terms
                    .as_ref()
                    .expect("validated")
                    .iter()
                    .map(|t| Ok(((num("terms", &t[0])?, num("terms", &t[1])?), scale * num::<i64>("terms", &t[2])?)))
                    .collect::<Result<_, CliError>>()?;
                out.push(BiPoly::from_terms(&ring, &terms));
            }
            phi.push(out);
        }
        Ok(TwoVarCrystal { ring, val: vmin, phi })
    }
}

fn check_terms(at: &str, terms: &[Vec<String>], len: usize) -> Result<(), CliError> {
    for t in terms {
        if t.len() != len {
            return Err(CliError::input(format!("{at}: every term has {len} fields")));
        }
        for x in t {
            let _: i64 = num(at, x)?;
        }
    }
    Ok(())
}

fn laurent(ring: &WittRing, terms: &[Vec<String>]) -> Result<Laurent, CliError> {
    let t: Vec<(i32, i64)> = terms.iter().map(|t| Ok((num("terms", &t[0])?, num("terms", &t[1])?))).collect::<Result<_, CliError>>()?;
    Ok(Laurent::from_terms(ring, &t))
}

/// Builders for documents assembled in code.
pub mod build {
    use super::*;

    pub fn s(x: impl ToString) -> String {
        x.to_string()
    }

    pub fn unit_entry(val: i32, c: i64) -> Entry {
        Entry { val: s(val), unit: Some(vec![s(c)]), terms: None }
    }

    pub fn poly_entry(val: i32, terms: &[(i64, i64)]) -> Entry {
        Entry { val: s(val), unit: None, terms: Some(terms.iter().map(|&(k, c)| vec![s(k), s(c)]).collect()) }
    }

    pub fn point(name: &str, p: u64, precision: u32, rows: &[&[(i32, i64)]]) -> CrystalDocument {
        CrystalDocument {
            schema: SCHEMA.into(),
            name: name.into(),
            p: s(p),
            d: s(1),
            precision: s(precision),
            base: Base::Point,
            degree_window: None,
            rank: s(rows.len()),
            phi: rows.iter().map(|r| r.iter().map(|&(v, c)| unit_entry(v, c)).collect()).collect(),
            nabla: None,
            frobenius_lift: None,
            weights: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_field_errors() {
        let mut d = build::point("x", 3, 8, &[&[(0, 1)]]);
        assert!(d.validate().is_ok());
        d.base = Base::Torus;
        assert!(d.validate().is_err());
        let mut d = build::point("x", 4, 8, &[&[(0, 1)]]);
        assert!(d.validate().is_err());
        d.p = "3".into();
        d.rank = "2".into();
        assert!(d.validate().is_err());
    }

    #[test]
    fn json_errors_carry_position() {
        let e = CrystalDocument::parse("{\n  \"schema\": 3\n}").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }
}
