//! Argument definitions and command handlers.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fcrystal::fcrystal_point::{ExactnessVerdict, FCrystalPoint};
use fcrystal::lifted::{
    eta_quasi_iso_check, lie_rank_check, lifting_example, syntomic_lifted, two_variable_rank_jump, uniformity_at, Selection, Uniformity,
};
use fcrystal::padic::WittRing;
use fcrystal::semilinear::{FiniteModule, Lattice, Mat, PMatrix};
use fcrystal::zeta::verify_class_number_point;
use serde_json::{json, Value};

use crate::bundled;
use crate::doc::{Base, CrystalDocument, Overrides};
use crate::report::Report;
use crate::suite::{self, Outcome, SuiteConfig};
use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "fcrystal", version, about = "Filtrations, syntomic cohomology and zeta checks for F-crystals")]
pub struct Cli {
    /// p-adic precision N, overriding the document.
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Degree window for Laurent truncation, overriding the document.
    #[arg(long, global = true)]
    pub window: Option<i32>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 2024)]
    pub seed: u64,
    /// Iteration depth for quasi-nilpotence.
    #[arg(long, global = true, default_value_t = 16)]
    pub depth: usize,
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Computations for a crystal over a point.
    Point {
        /// Bundled name or path to a document.
        doc: String,
        #[command(subcommand)]
        op: PointOp,
    },
    /// Computations for a crystal over a curve or the plane.
    Lifted {
        doc: String,
        #[command(subcommand)]
        op: LiftedOp,
    },
    /// The change-of-lifting example over the torus.
    Lifting {
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 3)]
        rank: usize,
    },
    /// List the bundled documents.
    List,
    /// Print a bundled document after a parse/serialize round trip.
    Show { name: String },
    /// Round-trip every document and run the acceptance suite.
    VerifyAll(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Read documents from this directory instead of the bundled set.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Run only these criteria.
    #[arg(long = "criterion")]
    pub criteria: Vec<u32>,
}

#[derive(Subcommand, Debug)]
pub enum PointOp {
    /// N_r and M^r, at one level or across the effective range.
    Filtration {
        #[arg(long, allow_hyphen_values = true)]
        r: Option<i32>,
    },
    /// Newton and Hodge slopes.
    Newton,
    /// Syntomic cohomology H⁰, H¹ and 𝒯⁰.
    Syntomic,
    /// Hom and Ext from the unit crystal.
    Ext,
    /// The Frobenius gauge ladder.
    Gauge,
    /// The class-number identity for v_p det(1 − φ).
    Lvalue,
    /// Stabilization, isomorphism and graded-sequence checks.
    Axioms,
    /// Exactness of 0 → D' → D → D'' → 0 for D' spanned by the first k basis vectors.
    Exactness {
        #[arg(long)]
        sub: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum LiftedOp {
    /// Horizontality of Φ and quasi-nilpotence of ∇.
    Compatibility,
    /// Colength and generators of A^r on the window.
    AFiltration {
        #[arg(long, allow_hyphen_values = true)]
        r: i32,
    },
    /// Griffiths transversality ∇A^r ⊆ A^{r−1}⊗ω¹.
    Griffiths {
        #[arg(long, allow_hyphen_values = true)]
        r: i32,
    },
    /// F^*A^r = M^r.
    Fstar {
        #[arg(long, allow_hyphen_values = true)]
        r: i32,
    },
    /// η: A^r DR → M^r DR is a quasi-isomorphism.
    Eta {
        #[arg(long, allow_hyphen_values = true)]
        r: i32,
        /// Use the minus-log variant.
        #[arg(long)]
        minus: bool,
    },
    /// Local freeness of M^r.
    Uniformity {
        #[arg(long, allow_hyphen_values = true)]
        r: i32,
    },
    /// Generic rank against fibre rank at the origin (plane documents).
    RankJump {
        #[arg(long, allow_hyphen_values = true)]
        r: i32,
    },
    /// H⁰ of the lifted syntomic complex on the window.
    Syntomic,
    /// Rank of D_X/fil⁰.
    Lie,
}

/// Output of a command and its exit code; `error` output goes to stderr.
pub struct Finished {
    pub text: String,
    pub code: i32,
    pub error: bool,
}

pub fn execute(cli: &Cli) -> Finished {
    let (text, code) = run(cli);
    let error = code == 2 || (code == 3 && !matches!(cli.command, Command::VerifyAll(_)));
    Finished { text, code, error }
}

fn run(cli: &Cli) -> (String, i32) {
    let out = match &cli.command {
        Command::VerifyAll(v) => return verify_all(cli, v),
        Command::List => Ok(list()),
        Command::Show { name } => show(name),
        Command::Point { doc, op } => point(cli, doc, op),
        Command::Lifted { doc, op } => lifted(cli, doc, op),
        Command::Lifting { p, rank } => lifting(cli, *p, *rank),
    };
    match out {
        Ok(Rendered::Report(r)) => {
            let code = if r.passed() { 0 } else { 1 };
            (if cli.json { r.to_json() } else { r.to_text() }, code)
        }
        Ok(Rendered::Text(t)) => (t, 0),
        Err(e) => {
            let code = e.exit_code();
            let text = if cli.json { json!({ "error": e.to_string(), "exit_code": code }).to_string() } else { format!("error: {e}") };
            (text, code)
        }
    }
}

enum Rendered {
    Report(Report),
    Text(String),
}

fn overrides(cli: &Cli) -> Overrides {
    Overrides { precision: cli.precision, window: cli.window }
}

fn list() -> Rendered {
    let mut s = String::new();
    for (name, _) in bundled::DOCUMENTS {
        let d = bundled::load(name).expect("bundled documents parse");
        s.push_str(&format!("{name:<18} {:<13} p = {}, rank {}\n", format!("{:?}", d.base), d.p, d.rank));
    }
    Rendered::Text(s)
}

fn show(name: &str) -> Result<Rendered, CliError> {
    Ok(Rendered::Text(bundled::load(name)?.to_json()))
}

fn module_json(m: &FiniteModule) -> Value {
    json!({ "torsion_exponents": m.exps, "free_rank": m.free_rank, "order_val": m.order_val() })
}

fn module_text(m: &FiniteModule) -> String {
    let mut parts: Vec<String> = m.exps.iter().map(|e| format!("Z/p^{e}")).collect();
    if m.free_rank > 0 {
        parts.push(format!("Z_p^{}", m.free_rank));
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" ⊕ ")
    }
}

fn lattice_json(ring: &WittRing, l: &Lattice) -> Value {
    let b = l.basis();
    let rows: Vec<Vec<Value>> = (0..b.rows)
        .map(|i| {
            (0..b.cols)
                .map(|j| {
                    let c = ring.centered(b.at(i, j));
                    if c.len() == 1 {
                        json!(c[0])
                    } else {
                        json!(c)
                    }
                })
                .collect()
        })
        .collect();
    json!({ "offset": l.offset(), "basis": rows, "volume": l.volume() })
}

fn start(cli: &Cli, command: &str, doc: &CrystalDocument, window: Option<i32>) -> Result<Report, CliError> {
    let mut r = Report::new(command, cli.seed);
    r.document = Some(doc.name.clone());
    r.precision = Some(doc.precision(&overrides(cli))?);
    r.window = window;
    Ok(r)
}

fn point(cli: &Cli, arg: &str, op: &PointOp) -> Result<Rendered, CliError> {
    let doc = bundled::resolve(arg)?;
    let d = doc.to_point(&overrides(cli))?;
    let ring = d.ring().clone();
    let (lo, hi) = d.effective_range();
    let name = match op {
        PointOp::Filtration { .. } => "point filtration",
        PointOp::Newton => "point newton",
        PointOp::Syntomic => "point syntomic",
        PointOp::Ext => "point ext",
        PointOp::Gauge => "point gauge",
        PointOp::Lvalue => "point lvalue",
        PointOp::Axioms => "point axioms",
        PointOp::Exactness { .. } => "point exactness",
    };
    let mut rep = start(cli, name, &doc, None)?;
    match op {
        PointOp::Filtration { r } => {
            let levels: Vec<i32> = match r {
                Some(r) => vec![*r],
                None => (lo - 1..=hi + 1).collect(),
            };
            let mut n = BTreeMap::new();
            let mut m = BTreeMap::new();
            for r in levels {
                let (nr, mr) = (d.filtration_n(r)?, d.filtration_m(r)?);
                rep.info("filtrations/levels", format!("r = {r}"), format!("[D : N_r] = p^{}, [D : M^r] = p^{}", nr.volume(), mr.volume()));
                rep.check("filtrations/isomorphism", format!("r = {r}"), d.filtration_isomorphism_check(r)?, None);
                n.insert(r.to_string(), lattice_json(&ring, &nr));
                m.insert(r.to_string(), lattice_json(&ring, &mr));
            }
            rep.put("N", n);
            rep.put("M", m);
        }
        PointOp::Newton => {
            let newton: Vec<String> = d.newton_slopes()?.iter().map(|s| s.to_string()).collect();
            let hodge = d.hodge_slopes();
            rep.info("slopes/newton", "Newton slopes", newton.join(", "));
            rep.info("slopes/hodge", "Hodge slopes", format!("{hodge:?}"));
            rep.check("slopes/newton-above-hodge", "polygons", d.newton_above_hodge()?, None);
            rep.put("newton", newton);
            rep.put("hodge", hodge);
        }
        PointOp::Syntomic => {
            let s = d.syntomic()?;
            for (k, m) in [("H0", &s.h0), ("H1", &s.h1), ("T0", &s.t0)] {
                rep.info("syntomic/cohomology", k, module_text(m));
                rep.put(k, module_json(m));
            }
            rep.put("certified_digits", s.precision);
        }
        PointOp::Ext => {
            let (hom, ext) = (d.hom_unit()?, d.ext_unit()?);
            rep.info("extensions/hom", "Hom(1, D)", module_text(&hom));
            rep.info("extensions/ext", "Ext¹(1, D)", module_text(&ext));
            rep.put("hom", module_json(&hom));
            rep.put("ext", module_json(&ext));
        }
        PointOp::Gauge => {
            let g = d.gauge()?;
            let ok = g.lattices.len() as i32 == g.r_max - g.r_min + 3;
            rep.check("gauge/axioms", format!("levels {}..={}", g.r_min, g.r_max), ok, None);
            let ladder: Vec<Value> = g.lattices.iter().map(|l| lattice_json(&ring, l)).collect();
            rep.put("r_min", g.r_min);
            rep.put("r_max", g.r_max);
            rep.put("ladder", ladder);
        }
        PointOp::Lvalue => {
            let c = verify_class_number_point(&d)?;
            rep.check(
                "zeta/class-number",
                "v_p det(1 − φ)",
                c.verdict,
                Some(format!("lhs {}, rhs {} ({})", c.lhs_valuation, c.rhs, c.sign_convention)),
            );
            rep.put("lhs_valuation", c.lhs_valuation);
            rep.put("rhs", c.rhs);
            rep.put("T0", module_json(&c.syntomic.t0));
            rep.put("H0", module_json(&c.syntomic.h0));
            rep.put("H1", module_json(&c.syntomic.h1));
        }
        PointOp::Axioms => {
            rep.check("filtrations/stabilization", "all levels", d.stabilization_check()?, None);
            for r in lo - 1..=hi + 1 {
                rep.check("filtrations/isomorphism", format!("r = {r}"), d.filtration_isomorphism_check(r)?, None);
                rep.check("filtrations/graded-sequences", format!("r = {r}"), d.filtration_sequences_check(r)?, None);
            }
        }
        PointOp::Exactness { sub } => {
            let (dp, dpp, f, g) = split(&d, *sub)?;
            match FCrystalPoint::exactness_check(&dp, &d, &dpp, &f, &g)? {
                ExactnessVerdict::Exact => rep.info("filtrations/exactness", "N_r sequences", "exact at every level"),
                ExactnessVerdict::NotExact { r, witness } => {
                    rep.info("filtrations/exactness", format!("first failure r = {r}"), witness);
                    rep.put("first_failure", r);
                }
            }
            for r in lo - 1..=hi + 1 {
                if let Some(w) = FCrystalPoint::exactness_at(&dp, &d, &dpp, &f, &g, r)? {
                    rep.info("filtrations/exactness", format!("r = {r}"), w);
                }
            }
        }
    }
    Ok(Rendered::Report(rep))
}

/// D' = span(e_1, …, e_k), which must be Φ-stable, and D'' = D/D'.
fn split(d: &FCrystalPoint, k: usize) -> Result<(FCrystalPoint, FCrystalPoint, Mat, Mat), CliError> {
    let ring = d.ring();
    let n = d.rank();
    if k == 0 || k >= n {
        return Err(CliError::input(format!("--sub must lie in 1..{n}")));
    }
    let phi = d.phi();
    if !phi.m.submatrix(k, n, 0, k).is_zero(ring) {
        return Err(CliError::input(format!("the span of the first {k} basis vectors is not Φ-stable")));
    }
    let block = |r0, r1| PMatrix::new(phi.val, phi.m.submatrix(r0, r1, r0, r1), phi.prec).normalized(ring);
    let dp = FCrystalPoint::new(ring, block(0, k))?;
    let dpp = FCrystalPoint::new(ring, block(k, n))?;
    let f = Mat::identity(ring, n).submatrix(0, n, 0, k);
    let g = Mat::identity(ring, n).submatrix(k, n, 0, n);
    Ok((dp, dpp, f, g))
}

fn lifted(cli: &Cli, arg: &str, op: &LiftedOp) -> Result<Rendered, CliError> {
    let doc = bundled::resolve(arg)?;
    let o = overrides(cli);
    if let LiftedOp::RankJump { r } = op {
        let c = doc.to_plane(&o)?;
        let mut rep = start(cli, "lifted rank-jump", &doc, None)?;
        let j = two_variable_rank_jump(&c, *r)?;
        rep.info("uniformity/rank-jump", format!("r = {r}"), format!("generic rank {}, fibre rank {}", j.generic_rank, j.fiber_rank));
        rep.put("generic_rank", j.generic_rank);
        rep.put("fiber_rank", j.fiber_rank);
        rep.put("jump", j.jump);
        return Ok(Rendered::Report(rep));
    }
    if doc.base == Base::AffinePlane {
        return Err(CliError::input("plane documents support only `rank-jump`"));
    }
    let d = doc.to_lifted(&o)?;
    let w = doc.window(&o)?;
    let mut rep = start(cli, &format!("lifted {}", op_name(op)), &doc, Some(w))?;
    match op {
        LiftedOp::Compatibility => {
            let c = d.check_compatibility();
            rep.check("lifted/horizontality", "Φ∘F^*∇ = ∇∘Φ", c.ok, None);
            let q = d.quasi_nilpotence(cli.depth)?;
            rep.info("lifted/quasi-nilpotence", format!("depth {}", cli.depth), format!("nilpotent after {q} steps mod p"));
            rep.put("quasi_nilpotence_steps", q);
        }
        LiftedOp::AFiltration { r } => {
            let a = d.filtration_a(*r, &d.window_sel())?;
            rep.info("lifted/a-filtration", format!("r = {r}"), format!("colength p^{} on the window", a.colength()));
            rep.put("colength", a.colength());
            let ring = d.ring();
            let gens: Vec<Vec<String>> = a.gens(ring).iter().map(|v| v.iter().map(|x| x.to_string(ring)).collect()).collect();
            rep.put("generators", gens);
        }
        LiftedOp::Griffiths { r } => {
            rep.check("lifted/griffiths", format!("r = {r}"), d.griffiths_check_graded(*r, w)?, None);
        }
        LiftedOp::Fstar { r } => {
            rep.check("lifted/fstar-a-equals-m", format!("r = {r}"), d.fstar_a_vs_m_graded(*r, w)?, None);
        }
        LiftedOp::Eta { r, minus } => {
            let e = eta_quasi_iso_check(&d, *r, w, *minus)?;
            let detail = e.failing_weight.map(|m| format!("fails at weight {m}"));
            rep.check("lifted/eta-quasi-iso", format!("r = {r}{}", if *minus { ", minus-log" } else { "" }), e.ok, detail);
            rep.put("weights_checked", e.weights_checked);
            rep.put("acyclic_checked", e.acyclic_checked);
        }
        LiftedOp::Uniformity { r } => match uniformity_at(&d, *r)? {
            Uniformity::ProbablyUniform => rep.info("uniformity/local-freeness", format!("r = {r}"), "no non-unit invariant factor found"),
            Uniformity::CertifiedNonuniform { divisor, witness, .. } => {
                rep.info("uniformity/local-freeness", format!("r = {r}"), format!("not locally free: {divisor} on {witness}"));
                rep.put("witness", witness);
                rep.put("divisor", divisor);
            }
        },
        LiftedOp::Syntomic => {
            let (lo, hi) = d.base().window_range();
            let s = syntomic_lifted(&d, &Selection::window(d.rank(), lo, hi))?;
            rep.info("syntomic/lifted-h0", "H⁰ on the window", module_text(&s.h0));
            rep.put("H0", module_json(&s.h0));
        }
        LiftedOp::Lie => {
            let l = lie_rank_check(&d, 0, w)?;
            let detail = match l.rank {
                Some(k) => format!("rank {k} (length {} over {} monomials)", l.length, l.monomials_per_component),
                None => format!("length {} not uniform over {} monomials", l.length, l.monomials_per_component),
            };
            rep.info("lie/rank", "D_X / fil⁰", detail);
            rep.put("rank", l.rank);
            rep.put("length", l.length);
        }
        LiftedOp::RankJump { .. } => unreachable!("handled above"),
    }
    Ok(Rendered::Report(rep))
}

fn op_name(op: &LiftedOp) -> &'static str {
    match op {
        LiftedOp::Compatibility => "compatibility",
        LiftedOp::AFiltration { .. } => "a-filtration",
        LiftedOp::Griffiths { .. } => "griffiths",
        LiftedOp::Fstar { .. } => "fstar",
        LiftedOp::Eta { .. } => "eta",
        LiftedOp::Uniformity { .. } => "uniformity",
        LiftedOp::RankJump { .. } => "rank-jump",
        LiftedOp::Syntomic => "syntomic",
        LiftedOp::Lie => "lie",
    }
}

fn lifting(cli: &Cli, p: u64, rank: usize) -> Result<Rendered, CliError> {
    let prec = cli.precision.unwrap_or(8);
    let window = cli.window.unwrap_or(3);
    let a = lifting_example(p, rank, prec, window, None)?;
    let mut rep = Report::new("lifting", cli.seed);
    rep.precision = Some(prec);
    rep.window = Some(window);
    let inst = format!("p = {p}, rank {rank}, g = {}", a.g);
    rep.check("lifting/horizontal", &inst, a.horizontal, None);
    rep.check("lifting/epsilon-invertible", &inst, a.eps_invertible, None);
    rep.check("lifting/phi-formula", &inst, a.a, None);
    rep.check("lifting/small-levels", &inst, a.small_i, None);
    rep.check("lifting/bracket-invariance", &inst, a.c, None);
    match a.b {
        Some(b) => rep.check("lifting/a-filtration-changes", &inst, b, None),
        None => rep.info("lifting/a-filtration-changes", &inst, "needs p = 2 and rank ≥ 3"),
    }
    if let Some(d) = a.d {
        rep.check("lifting/corrected-vector", &inst, d, None);
    }
    let ring = WittRing::new(p, 1, prec)?;
    rep.put("delta", a.delta.to_string(&ring));
    Ok(Rendered::Report(rep))
}

/// Loads every `*.json` document in `dir`, keyed by file stem.
pub fn load_dir(dir: &Path) -> Result<BTreeMap<String, CrystalDocument>, CliError> {
    let rd = std::fs::read_dir(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    let mut out = BTreeMap::new();
    for entry in rd {
        let path = entry.map_err(|e| CliError::input(e.to_string()))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        out.insert(stem, CrystalDocument::load(&path)?);
    }
    Ok(out)
}

pub fn bundled_documents() -> Result<BTreeMap<String, CrystalDocument>, CliError> {
    bundled::DOCUMENTS.iter().map(|(n, _)| Ok((n.to_string(), bundled::load(n)?))).collect()
}

/// Every document must survive serialize → parse unchanged.
fn round_trip(docs: &BTreeMap<String, CrystalDocument>) -> Result<(), CliError> {
    for (name, d) in docs {
        let back = CrystalDocument::parse(&d.to_json()).map_err(|e| CliError::input(format!("{name}: {e}")))?;
        if &back != d {
            return Err(CliError::input(format!("{name}: round trip changed the document")));
        }
    }
    Ok(())
}

fn verify_all(cli: &Cli, v: &VerifyArgs) -> (String, i32) {
    let docs = match v.data_dir.as_deref().map_or_else(bundled_documents, load_dir).and_then(|d| round_trip(&d).map(|_| d)) {
        Ok(d) => d,
        Err(e) => return (format!("error: {e}"), e.exit_code()),
    };
    let mut cfg = SuiteConfig::new(cli.seed, docs);
    cfg.precision = cli.precision;
    cfg.window = cli.window;
    let ids: Vec<u32> = if v.criteria.is_empty() { suite::CRITERIA.iter().map(|c| c.0).collect() } else { v.criteria.clone() };
    let results: Vec<_> = ids.iter().map(|&id| suite::run(&cfg, id)).collect();
    let code = if results.iter().any(|r| r.outcome == Outcome::Fail) {
        1
    } else if results.iter().any(|r| r.outcome == Outcome::Insufficient) {
        3
    } else {
        0
    };
    let text = if cli.json {
        serde_json::to_string_pretty(&json!({ "seed": cli.seed, "documents": cfg.documents.len(), "criteria": results }))
            .expect("results serialize")
    } else {
        let mut s = format!("round trip: {} documents unchanged\n", cfg.documents.len());
        for r in &results {
            s.push_str(&r.line());
            s.push('\n');
        }
        let passed = results.iter().filter(|r| r.outcome == Outcome::Pass).count();
        s.push_str(&format!("{passed}/{} criteria passed", results.len()));
        s
    };
    (text, code)
}
