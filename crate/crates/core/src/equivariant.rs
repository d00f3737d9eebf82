//! Equivariant extensions of closed 3-forms: checkers and an exact solver.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::cartan::{lie, one_form, three_form, ThreeTensor, VectorField};
use crate::error::{Error, Result};
use crate::gengeo::{check_closed, DiracFrame};
use crate::graded::{Derivation, GenMono, GradedElement};
use crate::linalg::{LinearSystem, SparseRow};
use crate::poly::{monomials_up_to, Poly, Q};
use crate::qmanifold::{
    build_q, lift_qtilde, solve_gamma, solve_symmetries, theta_residual, AlgebroidData, ExtendedSymmetry,
    SymmetrySection,
};
use crate::gengeo::GeneralizedSection;
use crate::status::Status;

/// One checked condition with its nonzero residuals, rendered.
#[derive(Debug, Clone, Serialize)]
pub struct Condition {
    pub name: String,
    pub status: Status,
    pub residuals: Vec<String>,
}

impl Condition {
    fn new(name: impl Into<String>, residuals: Vec<String>) -> Self {
        Condition {
            name: name.into(),
            status: Status::from_bool(residuals.is_empty()),
            residuals,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub status: Status,
    pub conditions: Vec<Condition>,
}

impl ConditionReport {
    fn from_conditions(conditions: Vec<Condition>) -> Self {
        let ok = conditions.iter().all(|c| c.status.is_pass());
        ConditionReport {
            status: Status::from_bool(ok),
            conditions,
        }
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Kills every ghost and ghost differential.
pub fn restrict_to_base(e: &AlgebroidData, x: &GradedElement) -> GradedElement {
    let kill: Vec<bool> = (0..e.ctx().ngens()).map(|k| k >= e.dim()).collect();
    x.restrict(&kill)
}

/// `H + α_a ψ^a` on `T[1]E[1]`.
pub fn standard_extension(e: &AlgebroidData, h: &ThreeTensor, alphas: &[Vec<Poly>]) -> Result<GradedElement> {
    let ctx = e.ctx();
    let mut out = three_form(ctx, h)?;
    for (a, al) in alphas.iter().enumerate() {
        let f = one_form(ctx, al)?;
        out = out.add(&f.mul(&GradedElement::gen(ctx, e.psi(a))));
    }
    Ok(out)
}

/// Conditions (i)-(iv) for `H̃ = H + α_a ψ^a` over an action algebroid.
pub fn check_standard_extension(h: &ThreeTensor, alphas: &[Vec<Poly>], e: &AlgebroidData) -> Result<ConditionReport> {
    check_closed(h)?;
    if !e.has_constant_structure() {
        return Err(Error::InvalidInput("standard extension needs constant structure constants".into()));
    }
    let r = e.rank();
    if alphas.len() != r {
        return Err(Error::InvalidInput(format!("need {r} one-forms, got {}", alphas.len())));
    }
    let names = e.base_names().to_vec();
    let ctx = e.ctx();
    let ht = standard_extension(e, h, alphas)?;
    let mut res1 = Vec::new();
    let diff = restrict_to_base(e, &ht).sub(&three_form(ctx, h)?);
    if !diff.is_zero() {
        res1.push(diff.render());
    }
    let mut res2 = Vec::new();
    let mut res3 = Vec::new();
    let mut res4 = Vec::new();
    for a in 0..r {
        let v = e.anchor(a);
        let s = GeneralizedSection::new(v.clone(), alphas[a].clone());
        for ((j, k), p) in theta_residual(&s, h) {
            res2.push(format!("a={}, ({},{}): {}", a + 1, j + 1, k + 1, p.render(&names)));
        }
        for b in 0..r {
            let lhs = lie(&v, &one_form(ctx, &alphas[b])?)?;
            let mut rhs = GradedElement::zero(ctx);
            for c in 0..r {
                rhs = rhs.add(&one_form(ctx, &alphas[c])?.scale_poly(e.c(c, a, b)));
            }
            let d = lhs.sub(&rhs);
            if !d.is_zero() {
                res3.push(format!("a={}, b={}: {}", a + 1, b + 1, d.render()));
            }
            if b >= a {
                let vb = e.anchor(b);
                let p = &contract(&v, &alphas[b]) + &contract(&vb, &alphas[a]);
                if !p.is_zero() {
                    res4.push(format!("a={}, b={}: {}", a + 1, b + 1, p.render(&names)));
                }
            }
        }
    }
    Ok(ConditionReport::from_conditions(vec![
        Condition::new("restriction", res1),
        Condition::new("horizontal", res2),
        Condition::new("equivariance", res3),
        Condition::new("isotropy", res4),
    ]))
}

fn contract(v: &VectorField, alpha: &[Poly]) -> Poly {
    let mut acc = Poly::zero(v.dim());
    for (c, a) in v.components().iter().zip(alpha) {
        acc.add_assign_ref(&(c * a));
    }
    acc
}

/// Conditions (i) restriction, (ii) `Q̃H̃ = 0`, (iii) `ε̃H̃ = 0` for all `ε̃ ∈ S`.
pub fn check_e_extension(
    ht: &GradedElement,
    h: &ThreeTensor,
    e: &AlgebroidData,
    symmetries: &[ExtendedSymmetry],
) -> Result<ConditionReport> {
    check_closed(h)?;
    if ht.degree().is_some_and(|d| d != 3) {
        return Err(Error::DegreeMismatch("extension must have total degree 3".into()));
    }
    let qt = lift_qtilde(&build_q(e))?;
    let mut conds = Vec::new();
    let diff = restrict_to_base(e, ht).sub(&three_form(e.ctx(), h)?);
    conds.push(Condition::new(
        "restriction",
        if diff.is_zero() { vec![] } else { vec![diff.render()] },
    ));
    let qh = qt.apply(ht)?;
    conds.push(Condition::new(
        "q-closed",
        if qh.is_zero() { vec![] } else { vec![qh.render()] },
    ));
    let mut sym = Vec::new();
    for (k, s) in symmetries.iter().enumerate() {
        let r = s.to_derivation(e)?.apply(ht)?;
        if !r.is_zero() {
            sym.push(format!("symmetry {}: {}", k + 1, r.render()));
        }
    }
    conds.push(Condition::new("invariant", sym));
    Ok(ConditionReport::from_conditions(conds))
}

/// The six kinds of degree-3 terms on `T[1]E[1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermFamily {
    Eta3,
    Eta2Theta,
    EtaTheta2,
    Theta3,
    EtaPsi,
    ThetaPsi,
}

impl TermFamily {
    pub const ALL: [TermFamily; 6] = [
        TermFamily::Eta3,
        TermFamily::Eta2Theta,
        TermFamily::EtaTheta2,
        TermFamily::Theta3,
        TermFamily::EtaPsi,
        TermFamily::ThetaPsi,
    ];

    pub fn classify(e: &AlgebroidData, m: &[u32]) -> Option<TermFamily> {
        let n = e.dim();
        let r = e.rank();
        let th: u32 = m[..n].iter().sum();
        let et: u32 = m[n..n + r].iter().sum();
        let ps: u32 = m[n + r..].iter().sum();
        match (et, th, ps) {
            (3, 0, 0) => Some(TermFamily::Eta3),
            (2, 1, 0) => Some(TermFamily::Eta2Theta),
            (1, 2, 0) => Some(TermFamily::EtaTheta2),
            (0, 3, 0) => Some(TermFamily::Theta3),
            (1, 0, 1) => Some(TermFamily::EtaPsi),
            (0, 1, 1) => Some(TermFamily::ThetaPsi),
            _ => None,
        }
    }
}

/// Degree-3 superfunction with unknown coefficients of bounded degree in the
/// chosen families; the `θ³` part is fixed to `H`.
#[derive(Debug, Clone)]
pub struct ExtensionAnsatz {
    pub coefficient_degree: u32,
    pub families: Vec<TermFamily>,
}

impl ExtensionAnsatz {
    pub fn general(coefficient_degree: u32) -> Self {
        ExtensionAnsatz {
            coefficient_degree,
            families: TermFamily::ALL
                .iter()
                .copied()
                .filter(|f| *f != TermFamily::Theta3)
                .collect(),
        }
    }

    /// `H + α_a ψ^a`.
    pub fn standard(coefficient_degree: u32) -> Self {
        ExtensionAnsatz {
            coefficient_degree,
            families: vec![TermFamily::ThetaPsi],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtensionStatus {
    Unique,
    Family,
    None,
    Inconclusive,
}

impl ExtensionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtensionStatus::Unique => "unique",
            ExtensionStatus::Family => "family",
            ExtensionStatus::None => "none",
            ExtensionStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExtensionReport {
    pub status: ExtensionStatus,
    /// Dimension of the homogeneous solution space.
    pub dimension: usize,
    pub particular: Option<GradedElement>,
    pub basis: Vec<GradedElement>,
    pub coefficient_degree: u32,
    pub unknowns: usize,
    pub symmetries: usize,
}

struct Assembly {
    monos: Vec<GenMono>,
    coeff_monos: Vec<Vec<u32>>,
}

impl Assembly {
    fn element(&self, e: &AlgebroidData, x: &[Q]) -> GradedElement {
        let n = e.dim();
        let nc = self.coeff_monos.len();
        let mut out = GradedElement::zero(e.ctx());
        for (gi, m) in self.monos.iter().enumerate() {
            let p = Poly::from_terms(
                n,
                self.coeff_monos
                    .iter()
                    .enumerate()
                    .map(|(ci, c)| (c.clone(), x[gi * nc + ci].clone())),
            );
            out.add_term(m.clone(), p);
        }
        out
    }
}

fn add_condition_rows(
    rows: &mut BTreeMap<(usize, GenMono, Vec<u32>), SparseRow>,
    rhs: &mut BTreeMap<(usize, GenMono, Vec<u32>), Q>,
    cond: usize,
    d: &Derivation,
    fixed: &GradedElement,
    asm: &Assembly,
    e: &AlgebroidData,
) -> Result<()> {
    let n = e.dim();
    let nc = asm.coeff_monos.len();
    let ctx = e.ctx();
    for (gi, m) in asm.monos.iter().enumerate() {
        let dm = d.apply(&GradedElement::term(ctx, Poly::one(n), m.clone()))?;
        for (ci, c) in asm.coeff_monos.iter().enumerate() {
            let col = gi * nc + ci;
            let xm = Poly::monomial(n, c.clone(), Q::one());
            // D(x^c m) = Σ_i ∂_i(x^c) D(x^i) m + x^c D(m)
            let mut img = dm.scale_poly(&xm);
            for i in 0..n {
                let dx = xm.derivative(i);
                if dx.is_zero() || d.base_image(i).is_zero() {
                    continue;
                }
                let t = d
                    .base_image(i)
                    .scale_poly(&dx)
                    .mul(&GradedElement::term(ctx, Poly::one(n), m.clone()));
                img = img.add(&t);
            }
            for (om, p) in img.terms() {
                for (ex, v) in p.terms() {
                    rows.entry((cond, om.clone(), ex.clone()))
                        .or_default()
                        .insert(col, v.clone());
                }
            }
        }
    }
    let df = d.apply(fixed)?;
    for (om, p) in df.terms() {
        for (ex, v) in p.terms() {
            let key = (cond, om.clone(), ex.clone());
            rows.entry(key.clone()).or_default();
            rhs.insert(key, -v.clone());
        }
    }
    Ok(())
}

fn solve_at(
    h: &ThreeTensor,
    e: &AlgebroidData,
    symmetries: &[ExtendedSymmetry],
    ansatz: &ExtensionAnsatz,
) -> Result<(Option<GradedElement>, Vec<GradedElement>, usize)> {
    let ctx = e.ctx();
    let monos: Vec<GenMono> = ctx
        .monomials_of_degree(3)
        .into_iter()
        .filter(|m| TermFamily::classify(e, m).is_some_and(|f| ansatz.families.contains(&f)))
        .collect();
    let asm = Assembly {
        monos,
        coeff_monos: monomials_up_to(e.dim(), ansatz.coefficient_degree),
    };
    let fixed = three_form(ctx, h)?;
    let mut derivs = vec![lift_qtilde(&build_q(e))?];
    for s in symmetries {
        derivs.push(s.to_derivation(e)?);
    }
    let mut rows = BTreeMap::new();
    let mut rhs = BTreeMap::new();
    for (k, d) in derivs.iter().enumerate() {
        add_condition_rows(&mut rows, &mut rhs, k, d, &fixed, &asm, e)?;
    }
    let ncols = asm.monos.len() * asm.coeff_monos.len();
    let mut sys = LinearSystem::new(ncols);
    for (key, row) in rows {
        let b = rhs.get(&key).cloned().unwrap_or_else(Q::zero);
        sys.push(row, b);
    }
    let sol = sys.solve();
    let particular = sol.particular.map(|x| asm.element(e, &x).add(&fixed));
    let basis = sol.nullspace.iter().map(|v| asm.element(e, v)).collect();
    Ok((particular, basis, ncols))
}

/// Scales so that the leading coefficient of the leading term is 1.
fn normalize(x: &GradedElement) -> GradedElement {
    match x.terms().next() {
        Some((_, p)) => {
            let lead = p.terms().next().map(|(_, c)| c.clone()).unwrap_or_else(Q::one);
            x.scale(&lead.recip())
        }
        None => x.clone(),
    }
}

/// Solves for all extensions of `H` within the ansatz.
///
/// For `H = 0` the problem is homogeneous and a one dimensional solution
/// space counts as unique up to normalization.
pub fn solve_extension(
    h: &ThreeTensor,
    e: &AlgebroidData,
    symmetries: &[ExtendedSymmetry],
    ansatz: &ExtensionAnsatz,
) -> Result<ExtensionReport> {
    check_closed(h)?;
    let (particular, basis, unknowns) = solve_at(h, e, symmetries, ansatz)?;
    let dimension = basis.len();
    let mk = |status, particular, basis| ExtensionReport {
        status,
        dimension,
        particular,
        basis,
        coefficient_degree: ansatz.coefficient_degree,
        unknowns,
        symmetries: symmetries.len(),
    };
    if h.is_zero() {
        return Ok(match dimension {
            0 => mk(ExtensionStatus::None, None, basis),
            1 => {
                let sol = normalize(&basis[0]);
                mk(ExtensionStatus::Unique, Some(sol.clone()), vec![sol])
            }
            _ => mk(ExtensionStatus::Family, Some(GradedElement::zero(e.ctx())), basis),
        });
    }
    match particular {
        None => {
            let wider = ExtensionAnsatz {
                coefficient_degree: ansatz.coefficient_degree + 1,
                families: ansatz.families.clone(),
            };
            let (p2, _, _) = solve_at(h, e, symmetries, &wider)?;
            let status = if p2.is_some() {
                ExtensionStatus::Inconclusive
            } else {
                ExtensionStatus::None
            };
            Ok(mk(status, None, basis))
        }
        Some(p) => {
            let status = if dimension == 0 {
                ExtensionStatus::Unique
            } else {
                ExtensionStatus::Family
            };
            Ok(mk(status, Some(p), basis))
        }
    }
}

/// Which symmetry algebra feeds the extension conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryAlgebra {
    /// Sections `(v, α)` with `ι_v H = dα`, acting by `ℒ_ε`.
    G,
    /// The above together with the `γ` directions with symmetric `γ̃`.
    GTilde,
}

/// Finite symmetry set from the degree-bounded solution spaces.
///
/// `γ` acts linearly over functions, so when the frame's form parts are
/// constant the constant `γ` basis imposes the same conditions as all `γ`
/// of degree `<= N`.
pub fn symmetry_set(
    frame: &DiracFrame,
    h: &ThreeTensor,
    degree_bound: u32,
    algebra: SymmetryAlgebra,
) -> Result<Vec<ExtendedSymmetry>> {
    let n = frame.dim();
    let sol = solve_symmetries(frame, h, degree_bound)?;
    let mut out: Vec<ExtendedSymmetry> = sol
        .coefficients
        .iter()
        .map(|f| ExtendedSymmetry::from_section(SymmetrySection::new(f.clone()), n))
        .collect();
    if algebra == SymmetryAlgebra::GTilde {
        let constant_forms = frame
            .sections()
            .iter()
            .all(|s| s.alpha.iter().all(|p| p.is_constant()));
        let gdeg = if constant_forms { 0 } else { degree_bound };
        for g in solve_gamma(frame, gdeg) {
            out.push(ExtendedSymmetry::from_gamma(g, n));
        }
    }
    Ok(out)
}

/// Largest coefficient degree among the anchor, structure functions and `H`.
pub fn input_degree(e: &AlgebroidData, h: &ThreeTensor) -> u32 {
    let hd = h.entries().iter().filter_map(|p| p.degree()).max().unwrap_or(0);
    let ad = (0..e.rank())
        .flat_map(|a| (0..e.dim()).map(move |i| (a, i)))
        .filter_map(|(a, i)| e.rho(a, i).degree())
        .max()
        .unwrap_or(0);
    hd.max(ad)
}
