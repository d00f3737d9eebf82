//! Lie algebroids as Q-manifolds, derived brackets and the extended symmetry
//! algebra acting on `T[1]E[1]`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::cartan::{de_rham_d, lie_derivation, ThreeTensor, VectorField};
use crate::error::{Error, Result};
use crate::gengeo::{
    check_closed, decompose, is_dirac, Bivector, Decomposition, DiracFrame, GeneralizedSection,
};
use crate::graded::{Derivation, GradedContext, GradedElement};
use crate::linalg::{LinearSystem, SparseRow};
use crate::poly::{monomials_up_to, q, Poly, Q};
use crate::status::Status;

/// Anchor `ρ^i_a` and structure functions `C^a_{bc}` of a rank `r` bundle.
#[derive(Debug, Clone)]
pub struct AlgebroidData {
    ctx: Arc<GradedContext>,
    anchor: Vec<Vec<Poly>>,
    structure: Vec<Vec<Vec<Poly>>>,
}

impl AlgebroidData {
    /// `anchor[a][i] = ρ^i_a`, `structure[a][b][c] = C^a_{bc}`.
    pub fn new(base: &[String], anchor: Vec<Vec<Poly>>, structure: Vec<Vec<Vec<Poly>>>) -> Result<Self> {
        let n = base.len();
        let r = anchor.len();
        if anchor.iter().any(|v| v.len() != n || v.iter().any(|p| p.nvars() != n)) {
            return Err(Error::InvalidInput("anchor components must be vectors on the base".into()));
        }
        if structure.len() != r || structure.iter().any(|m| m.len() != r || m.iter().any(|row| row.len() != r)) {
            return Err(Error::InvalidInput("structure functions must be rank^3".into()));
        }
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    if structure[a][b][c] != -&structure[a][c][b] {
                        return Err(Error::InvalidInput(format!(
                            "C^{}_{{{}{}}} is not antisymmetric",
                            a + 1,
                            b + 1,
                            c + 1
                        )));
                    }
                }
            }
        }
        Ok(AlgebroidData {
            ctx: GradedContext::shifted_tangent(base, r),
            anchor,
            structure,
        })
    }

    /// Action algebroid of vector fields closing with constant structure constants.
    pub fn action(base: &[String], fields: &[VectorField]) -> Result<Self> {
        let n = base.len();
        let r = fields.len();
        let mut structure = vec![vec![vec![Poly::zero(n); r]; r]; r];
        for b in 0..r {
            for c in b + 1..r {
                let br = fields[b].bracket(&fields[c]);
                let consts = constant_combination(fields, &br).ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "bracket of fields {} and {} is not a constant combination",
                        b + 1,
                        c + 1
                    ))
                })?;
                for (a, k) in consts.into_iter().enumerate() {
                    structure[a][b][c] = Poly::constant(n, k.clone());
                    structure[a][c][b] = Poly::constant(n, -k);
                }
            }
        }
        let anchor = fields.iter().map(|v| v.components().to_vec()).collect();
        Self::new(base, anchor, structure)
    }

    /// Algebroid on `T*M` of a (twisted) Poisson bivector, in the basis `dx^a`:
    /// `ρ(dx^a) = Π♯dx^a`, `C^c_{ab} = ∂_cΠ^{ab} + Π^{al}Π^{bm}H_{lmc}`.
    pub fn cotangent(base: &[String], pi: &Bivector, h: &ThreeTensor) -> Result<Self> {
        let n = base.len();
        let anchor = (0..n)
            .map(|a| (0..n).map(|j| pi.get(a, j).clone()).collect())
            .collect();
        let mut structure = vec![vec![vec![Poly::zero(n); n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut v = pi.get(a, b).derivative(c);
                    for l in 0..n {
                        for m in 0..n {
                            let hc = h.get(l, m, c);
                            if hc.is_zero() {
                                continue;
                            }
                            v.add_assign_ref(&(&(pi.get(a, l) * pi.get(b, m)) * hc));
                        }
                    }
                    structure[c][a][b] = v;
                }
            }
        }
        Self::new(base, anchor, structure)
    }

    /// Algebroid of a Dirac frame with structure functions `f^c_{ab}`.
    pub fn from_frame(base: &[String], frame: &DiracFrame, f: &[Vec<Vec<Poly>>]) -> Result<Self> {
        let n = frame.dim();
        let anchor = frame
            .sections()
            .iter()
            .map(|s| s.v.components().to_vec())
            .collect();
        let mut structure = vec![vec![vec![Poly::zero(n); n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    structure[c][a][b] = f[a][b][c].clone();
                }
            }
        }
        Self::new(base, anchor, structure)
    }

    /// Runs [`is_dirac`] and builds the frame algebroid when closure holds.
    pub fn from_dirac(base: &[String], frame: &DiracFrame, h: &ThreeTensor) -> Result<Self> {
        let rep = is_dirac(frame, h)?;
        match rep.structure {
            Some(f) => Self::from_frame(base, frame, &f),
            None => Err(Error::InvalidInput(format!(
                "frame is not a Dirac structure: {}",
                rep.witness.unwrap_or_default()
            ))),
        }
    }

    pub fn ctx(&self) -> &Arc<GradedContext> {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.ctx.nbase()
    }

    pub fn rank(&self) -> usize {
        self.anchor.len()
    }

    pub fn base_names(&self) -> &[String] {
        self.ctx.base()
    }

    pub fn anchor(&self, a: usize) -> VectorField {
        VectorField::new(self.anchor[a].clone())
    }

    pub fn rho(&self, a: usize, i: usize) -> &Poly {
        &self.anchor[a][i]
    }

    pub fn c(&self, a: usize, b: usize, c: usize) -> &Poly {
        &self.structure[a][b][c]
    }

    pub fn has_constant_structure(&self) -> bool {
        self.structure.iter().flatten().flatten().all(|p| p.is_constant())
    }

    /// Degree of the anchor and structure functions.
    pub fn degree(&self) -> u32 {
        self.anchor
            .iter()
            .flatten()
            .chain(self.structure.iter().flatten().flatten())
            .filter_map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn theta(&self, i: usize) -> usize {
        i
    }

    pub fn eta(&self, a: usize) -> usize {
        self.dim() + a
    }

    pub fn psi(&self, a: usize) -> usize {
        self.dim() + self.rank() + a
    }

    /// `Q^i = η^a ρ^i_a`.
    pub fn q_base(&self, i: usize) -> GradedElement {
        let mut out = GradedElement::zero(&self.ctx);
        for a in 0..self.rank() {
            out = out.add(&GradedElement::gen(&self.ctx, self.eta(a)).scale_poly(&self.anchor[a][i]));
        }
        out
    }

    /// `Q^a = −½ C^a_{bc} η^b η^c`.
    pub fn q_ghost(&self, a: usize) -> GradedElement {
        let r = self.rank();
        let mut words = Vec::new();
        for b in 0..r {
            for c in 0..r {
                let k = &self.structure[a][b][c];
                if !k.is_zero() {
                    words.push((k.scale(&q(-1, 2)), vec![self.eta(b), self.eta(c)]));
                }
            }
        }
        GradedElement::from_words(&self.ctx, &words)
    }
}

/// Constant `k^a` with `target = k^a fields[a]`, if any.
fn constant_combination(fields: &[VectorField], target: &VectorField) -> Option<Vec<Q>> {
    let r = fields.len();
    let mut eqs: BTreeMap<(usize, Vec<u32>), SparseRow> = BTreeMap::new();
    for (a, f) in fields.iter().enumerate() {
        for (i, p) in f.components().iter().enumerate() {
            for (e, c) in p.terms() {
                eqs.entry((i, e.clone())).or_default().insert(a, c.clone());
            }
        }
    }
    let mut rhs = BTreeMap::new();
    for (i, p) in target.components().iter().enumerate() {
        for (e, c) in p.terms() {
            rhs.insert((i, e.clone()), c.clone());
            eqs.entry((i, e.clone())).or_default();
        }
    }
    let mut sys = LinearSystem::new(r);
    for (k, row) in eqs {
        let b = rhs.get(&k).cloned().unwrap_or_else(Q::zero);
        sys.push(row, b);
    }
    sys.solve().particular
}

/// `Q = η^a ρ^i_a ∂/∂x^i − ½ C^a_{bc} η^b η^c ∂/∂η^a` on `T[1]E[1]` (zero on
/// `θ`, `ψ`).
pub fn build_q(e: &AlgebroidData) -> Derivation {
    let ctx = e.ctx();
    let base = (0..e.dim()).map(|i| e.q_base(i)).collect();
    let mut gens = vec![GradedElement::zero(ctx); ctx.ngens()];
    for a in 0..e.rank() {
        gens[e.eta(a)] = e.q_ghost(a);
    }
    Derivation::new(ctx, 1, base, gens).expect("Q has degree one")
}

/// `½[Q,Q] = Q²`.
pub fn q_square(q: &Derivation) -> Result<Derivation> {
    q.square()
}

/// `Q̃ = d + ℒ_Q`.
pub fn lift_qtilde(q: &Derivation) -> Result<Derivation> {
    de_rham_d(q.ctx()).add(&lie_derivation(q)?)
}

/// A degree −1 vector field `ε^a ∂/∂η^a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetrySection {
    pub comps: Vec<Poly>,
}

impl SymmetrySection {
    pub fn new(comps: Vec<Poly>) -> Self {
        SymmetrySection { comps }
    }

    pub fn zero(n: usize, rank: usize) -> Self {
        SymmetrySection {
            comps: vec![Poly::zero(n); rank],
        }
    }

    /// The constant section `e_a`.
    pub fn basis(n: usize, rank: usize, a: usize) -> Self {
        let mut s = Self::zero(n, rank);
        s.comps[a] = Poly::one(n);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|p| p.is_zero())
    }

    pub fn to_derivation(&self, e: &AlgebroidData) -> Derivation {
        let ctx = e.ctx();
        let mut gens = vec![GradedElement::zero(ctx); ctx.ngens()];
        for (a, c) in self.comps.iter().enumerate() {
            gens[e.eta(a)] = GradedElement::scalar(ctx, c.clone());
        }
        Derivation::new(ctx, -1, vec![GradedElement::zero(ctx); e.dim()], gens)
            .expect("degree -1 section")
    }

    /// Anchor image `ρ(ε)`.
    pub fn anchor(&self, e: &AlgebroidData) -> VectorField {
        let n = e.dim();
        let mut v = VectorField::zero(n);
        for (a, c) in self.comps.iter().enumerate() {
            v = v.add(&e.anchor(a).scale_poly(c));
        }
        v
    }
}

fn scalar_part(x: &GradedElement) -> Option<Poly> {
    let n = x.ctx().nbase();
    let zero = vec![0u32; x.ctx().ngens()];
    let mut out = Poly::zero(n);
    for (m, c) in x.terms() {
        if *m != zero {
            return None;
        }
        out = c.clone();
    }
    Some(out)
}

fn read_section(e: &AlgebroidData, d: &Derivation) -> Result<SymmetrySection> {
    for i in 0..e.dim() {
        if !d.base_image(i).is_zero() || !d.gen_image(e.theta(i)).is_zero() {
            return Err(Error::Inconsistent("bracket acts on the base".into()));
        }
    }
    let mut comps = Vec::with_capacity(e.rank());
    for a in 0..e.rank() {
        if !d.gen_image(e.psi(a)).is_zero() {
            return Err(Error::Inconsistent("bracket acts on ghost differentials".into()));
        }
        let c = scalar_part(d.gen_image(e.eta(a)))
            .ok_or_else(|| Error::Inconsistent("bracket is not of the form ε^a ∂/∂η^a".into()))?;
        comps.push(c);
    }
    Ok(SymmetrySection { comps })
}

/// `[[ε, Q], ε']`.
pub fn derived_bracket(e: &AlgebroidData, s1: &SymmetrySection, s2: &SymmetrySection) -> Result<SymmetrySection> {
    let q = build_q(e);
    let d1 = s1.to_derivation(e);
    let d2 = s2.to_derivation(e);
    read_section(e, &d1.commutator(&q)?.commutator(&d2)?)
}

/// Element `(ε, γ)` of the extended symmetry algebra, `gamma[a][i] = γ^a_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedSymmetry {
    pub eps: SymmetrySection,
    pub gamma: Vec<Vec<Poly>>,
}

/// Sign of the `θ^i γ^a_i ∂/∂ψ^a` term in `ε̃`.
pub const GAMMA_SIGN: i64 = -1;

impl ExtendedSymmetry {
    pub fn new(eps: SymmetrySection, gamma: Vec<Vec<Poly>>) -> Self {
        ExtendedSymmetry { eps, gamma }
    }

    pub fn from_section(eps: SymmetrySection, n: usize) -> Self {
        let r = eps.comps.len();
        ExtendedSymmetry {
            eps,
            gamma: vec![vec![Poly::zero(n); n]; r],
        }
    }

    pub fn from_gamma(gamma: Vec<Vec<Poly>>, n: usize) -> Self {
        let r = gamma.len();
        ExtendedSymmetry {
            eps: SymmetrySection::zero(n, r),
            gamma,
        }
    }

    /// `ε̃ = ℒ_ε − θ^i γ^a_i ∂/∂ψ^a`.
    pub fn to_derivation(&self, e: &AlgebroidData) -> Result<Derivation> {
        let ctx = e.ctx();
        let lie = lie_derivation(&self.eps.to_derivation(e))?;
        let mut gens = vec![GradedElement::zero(ctx); ctx.ngens()];
        for a in 0..e.rank() {
            let mut img = GradedElement::zero(ctx);
            for i in 0..e.dim() {
                let c = self.gamma[a][i].scale(&Q::from_integer(GAMMA_SIGN.into()));
                img = img.add(&GradedElement::gen(ctx, e.theta(i)).scale_poly(&c));
            }
            gens[e.psi(a)] = img;
        }
        let gpart = Derivation::new(ctx, -1, vec![GradedElement::zero(ctx); e.dim()], gens)?;
        lie.add(&gpart)
    }

    /// Reads `(ε, γ)` back from a degree −1 derivation of the form above.
    pub fn from_derivation(e: &AlgebroidData, d: &Derivation) -> Result<Self> {
        let n = e.dim();
        for i in 0..n {
            if !d.base_image(i).is_zero() || !d.gen_image(e.theta(i)).is_zero() {
                return Err(Error::Inconsistent("extended symmetry acts on the base".into()));
            }
        }
        let mut comps = Vec::with_capacity(e.rank());
        for a in 0..e.rank() {
            let c = scalar_part(d.gen_image(e.eta(a)))
                .ok_or_else(|| Error::Inconsistent("ghost image is not a function".into()))?;
            comps.push(c);
        }
        let eps = SymmetrySection { comps };
        let lie = lie_derivation(&eps.to_derivation(e))?;
        let rest = d.add(&lie.scale(&-Q::one()))?;
        let mut gamma = vec![vec![Poly::zero(n); n]; e.rank()];
        for a in 0..e.rank() {
            let img = rest.gen_image(e.psi(a));
            for (m, c) in img.terms() {
                let k = m.iter().position(|&x| x > 0);
                match k {
                    Some(k) if k < n && m.iter().sum::<u32>() == 1 => {
                        gamma[a][k] = c.scale(&Q::from_integer(GAMMA_SIGN.into()));
                    }
                    _ => {
                        return Err(Error::Inconsistent(format!(
                            "ψ image has a term outside θ^i: {}",
                            img.render()
                        )))
                    }
                }
            }
            if !rest.gen_image(e.eta(a)).is_zero() {
                return Err(Error::Inconsistent("residual ghost image".into()));
            }
        }
        Ok(ExtendedSymmetry { eps, gamma })
    }
}

/// `[[ε̃, Q̃], ε̃']` reduced back to `(ε, γ)` data.
pub fn extended_bracket(e: &AlgebroidData, a: &ExtendedSymmetry, b: &ExtendedSymmetry) -> Result<ExtendedSymmetry> {
    let qt = lift_qtilde(&build_q(e))?;
    let da = a.to_derivation(e)?;
    let db = b.to_derivation(e)?;
    let br = da.commutator(&qt)?.commutator(&db)?;
    ExtendedSymmetry::from_derivation(e, &br)
}

/// `[γ, γ']_ρ = −γ∘ρ∘γ' + γ'∘ρ∘γ`.
pub fn gamma_bracket(e: &AlgebroidData, g1: &[Vec<Poly>], g2: &[Vec<Poly>]) -> Vec<Vec<Poly>> {
    let n = e.dim();
    let r = e.rank();
    let compose = |x: &[Vec<Poly>], y: &[Vec<Poly>]| {
        // (x ρ y)^a_i = x^a_j ρ^j_b y^b_i
        let mut out = vec![vec![Poly::zero(n); n]; r];
        for a in 0..r {
            for i in 0..n {
                let mut acc = Poly::zero(n);
                for j in 0..n {
                    if x[a][j].is_zero() {
                        continue;
                    }
                    for b in 0..r {
                        let t = &(&x[a][j] * e.rho(b, j)) * &y[b][i];
                        acc.add_assign_ref(&t);
                    }
                }
                out[a][i] = acc;
            }
        }
        out
    };
    let p = compose(g1, g2);
    let m = compose(g2, g1);
    (0..r)
        .map(|a| (0..n).map(|i| &m[a][i] - &p[a][i]).collect())
        .collect()
}

/// `ε·γ = (ℒ_{ρ(ε)} γ^a) ⊗ e_a + γ^a ⊗ [ε, e_a]_E`.
pub fn semidirect_action(e: &AlgebroidData, eps: &SymmetrySection, gamma: &[Vec<Poly>]) -> Result<Vec<Vec<Poly>>> {
    let n = e.dim();
    let r = e.rank();
    let v = eps.anchor(e);
    let mut out = vec![vec![Poly::zero(n); n]; r];
    for a in 0..r {
        for i in 0..n {
            // Lie derivative of the 1-form γ^a
            let mut acc = v.apply(&gamma[a][i]);
            for j in 0..n {
                acc.add_assign_ref(&(&gamma[a][j] * &v.component(j).derivative(i)));
            }
            out[a][i].add_assign_ref(&acc);
        }
        let br = derived_bracket(e, eps, &SymmetrySection::basis(n, r, a))?;
        for c in 0..r {
            for i in 0..n {
                out[c][i].add_assign_ref(&(&gamma[a][i] * &br.comps[c]));
            }
        }
    }
    Ok(out)
}

/// Result of a membership test.
#[derive(Debug, Clone)]
pub struct MembershipReport {
    pub status: Status,
    pub frame_coefficients: Option<Vec<Poly>>,
    /// Components `(ι_v H − dα)_{jk}`, `j<k`, that do not vanish.
    pub residual: Vec<((usize, usize), Poly)>,
    /// Nonzero antisymmetric components `γ̃_{[ij]}`, for the extended test.
    pub gamma_residual: Vec<((usize, usize), Poly)>,
}

/// Components `(ι_v H − dα)_{jk}` for `j<k`.
pub fn theta_residual(s: &GeneralizedSection, h: &ThreeTensor) -> Vec<((usize, usize), Poly)> {
    let n = s.dim();
    let mut out = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            let mut acc = &s.alpha[j].derivative(k) - &s.alpha[k].derivative(j);
            for i in 0..n {
                let hc = h.get(i, j, k);
                if !hc.is_zero() && !s.v.component(i).is_zero() {
                    acc.add_assign_ref(&(s.v.component(i) * hc));
                }
            }
            if !acc.is_zero() {
                out.push(((j, k), acc));
            }
        }
    }
    out
}

pub fn membership_g(s: &GeneralizedSection, frame: &DiracFrame, h: &ThreeTensor, max_deg: u32) -> Result<MembershipReport> {
    check_closed(h)?;
    let residual = theta_residual(s, h);
    let (coeffs, status) = match decompose(frame, s, max_deg) {
        Decomposition::Found(f) => (Some(f), Status::from_bool(residual.is_empty())),
        Decomposition::NotInSpan(_) => (None, Status::Fail),
        Decomposition::Inconclusive => (None, if residual.is_empty() { Status::Inconclusive } else { Status::Fail }),
    };
    Ok(MembershipReport {
        status,
        frame_coefficients: coeffs,
        residual,
        gamma_residual: Vec::new(),
    })
}

/// `γ̃_{ji} = α_{a,j} γ^a_i` with `α_a` the form part of frame section `a`.
pub fn gamma_tilde(frame: &DiracFrame, gamma: &[Vec<Poly>]) -> Vec<Vec<Poly>> {
    let n = frame.dim();
    (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let mut acc = Poly::zero(n);
                    for (a, s) in frame.sections().iter().enumerate() {
                        if !s.alpha[j].is_zero() && !gamma[a][i].is_zero() {
                            acc.add_assign_ref(&(&s.alpha[j] * &gamma[a][i]));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn membership_gtilde(
    s: &GeneralizedSection,
    gamma: &[Vec<Poly>],
    frame: &DiracFrame,
    h: &ThreeTensor,
    max_deg: u32,
) -> Result<MembershipReport> {
    let mut rep = membership_g(s, frame, h, max_deg)?;
    let gt = gamma_tilde(frame, gamma);
    let n = frame.dim();
    for i in 0..n {
        for j in i + 1..n {
            let d = &gt[i][j] - &gt[j][i];
            if !d.is_zero() {
                rep.gamma_residual.push(((i, j), d));
            }
        }
    }
    if !rep.gamma_residual.is_empty() && rep.status != Status::Fail {
        rep.status = Status::Fail;
    }
    Ok(rep)
}

/// Basis of the degree-bounded symmetry space.
#[derive(Debug, Clone)]
pub struct SymmetrySolution {
    pub degree_bound: u32,
    /// Frame coefficients `f^a` of each basis element.
    pub coefficients: Vec<Vec<Poly>>,
    pub sections: Vec<GeneralizedSection>,
}

impl SymmetrySolution {
    pub fn dimension(&self) -> usize {
        self.sections.len()
    }
}

fn section_from_coeffs(frame: &DiracFrame, f: &[Poly]) -> GeneralizedSection {
    let n = frame.dim();
    let mut s = GeneralizedSection::zero(n);
    for (a, c) in f.iter().enumerate() {
        if !c.is_zero() {
            s = s.add(&frame.section(a).scale_poly(c));
        }
    }
    s
}

fn coeffs_from_vector(n: usize, monos: &[Vec<u32>], x: &[Q], blocks: usize) -> Vec<Poly> {
    let nm = monos.len();
    (0..blocks)
        .map(|a| Poly::from_terms(n, monos.iter().enumerate().map(|(mi, m)| (m.clone(), x[a * nm + mi].clone()))))
        .collect()
}

/// All sections `f^a e_a` with `deg f^a <= N` satisfying `ι_v H = dα`.
pub fn solve_symmetries(frame: &DiracFrame, h: &ThreeTensor, degree_bound: u32) -> Result<SymmetrySolution> {
    check_closed(h)?;
    let n = frame.dim();
    let monos = monomials_up_to(n, degree_bound);
    let nm = monos.len();
    let mut eqs: BTreeMap<((usize, usize), Vec<u32>), SparseRow> = BTreeMap::new();
    for a in 0..n {
        for (mi, m) in monos.iter().enumerate() {
            let f = Poly::monomial(n, m.clone(), Q::one());
            let s = frame.section(a).scale_poly(&f);
            for (jk, p) in theta_residual(&s, h) {
                for (e, c) in p.terms() {
                    eqs.entry((jk, e.clone())).or_default().insert(a * nm + mi, c.clone());
                }
            }
        }
    }
    let mut sys = LinearSystem::new(n * nm);
    for (_, row) in eqs {
        sys.push(row, Q::zero());
    }
    let sol = sys.solve();
    let coefficients: Vec<Vec<Poly>> = sol
        .nullspace
        .iter()
        .map(|v| coeffs_from_vector(n, &monos, v, n))
        .collect();
    let sections = coefficients.iter().map(|f| section_from_coeffs(frame, f)).collect();
    Ok(SymmetrySolution {
        degree_bound,
        coefficients,
        sections,
    })
}

/// Basis of `γ` of degree `<= N` with symmetric `γ̃`.
pub fn solve_gamma(frame: &DiracFrame, degree_bound: u32) -> Vec<Vec<Vec<Poly>>> {
    let n = frame.dim();
    let monos = monomials_up_to(n, degree_bound);
    let nm = monos.len();
    // unknown index: (a*n + i)*nm + mono
    let col = |a: usize, i: usize, mi: usize| (a * n + i) * nm + mi;
    let mut eqs: BTreeMap<((usize, usize), Vec<u32>), SparseRow> = BTreeMap::new();
    for (a, s) in frame.sections().iter().enumerate() {
        for j in 0..n {
            for (e, c) in s.alpha[j].terms() {
                for i in 0..n {
                    if i == j {
                        continue;
                    }
                    let (lo, hi, sign) = if j < i { (j, i, Q::one()) } else { (i, j, -Q::one()) };
                    for (mi, m) in monos.iter().enumerate() {
                        let ex: Vec<u32> = e.iter().zip(m).map(|(x, y)| x + y).collect();
                        let row = eqs.entry(((lo, hi), ex)).or_default();
                        let ent = row.entry(col(a, i, mi)).or_insert_with(Q::zero);
                        *ent += &sign * c;
                    }
                }
            }
        }
    }
    let mut sys = LinearSystem::new(n * n * nm);
    for (_, row) in eqs {
        sys.push(row, Q::zero());
    }
    sys.solve()
        .nullspace
        .iter()
        .map(|v| {
            (0..n)
                .map(|a| {
                    (0..n)
                        .map(|i| {
                            Poly::from_terms(
                                n,
                                monos.iter().enumerate().map(|(mi, m)| (m.clone(), v[col(a, i, mi)].clone())),
                            )
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}
