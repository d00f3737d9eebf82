//! Cartan calculus: exterior derivative, interior products, Lie derivatives
//! and the contracting homotopy of a free differential algebra.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graded::{Derivation, GradedContext, GradedElement, Primitive};
use crate::poly::{qi, Poly, Q};

/// An ordinary vector field `v^i ∂_i` with polynomial components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    comps: Vec<Poly>,
}

impl VectorField {
    pub fn new(comps: Vec<Poly>) -> Self {
        let n = comps.len();
        assert!(comps.iter().all(|p| p.nvars() == n), "component arity");
        VectorField { comps }
    }

    pub fn zero(n: usize) -> Self {
        VectorField {
            comps: vec![Poly::zero(n); n],
        }
    }

    /// The coordinate field `∂_i`.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut v = Self::zero(n);
        v.comps[i] = Poly::one(n);
        v
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &Poly {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|p| p.is_zero())
    }

    /// Directional derivative `v(f)`.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero(self.dim());
        for (i, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let df = f.derivative(i);
            if !df.is_zero() {
                out.add_assign_ref(&(c * &df));
            }
        }
        out
    }

    pub fn bracket(&self, other: &Self) -> Self {
        VectorField {
            comps: (0..self.dim())
                .map(|i| &self.apply(&other.comps[i]) - &other.apply(&self.comps[i]))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        VectorField {
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        VectorField {
            comps: self.comps.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn scale_poly(&self, f: &Poly) -> Self {
        VectorField {
            comps: self.comps.iter().map(|p| p * f).collect(),
        }
    }

    /// The derivation `v^i ∂/∂x^i` on `ctx`, acting on base coordinates only.
    pub fn to_derivation(&self, ctx: &Arc<GradedContext>) -> Derivation {
        assert_eq!(ctx.nbase(), self.dim());
        let base = self
            .comps
            .iter()
            .map(|c| GradedElement::scalar(ctx, c.clone()))
            .collect();
        Derivation::new(ctx, 0, base, vec![GradedElement::zero(ctx); ctx.ngens()])
            .expect("ordinary vector field is degree zero")
    }

    pub fn render(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .comps
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("({})*d/d{}", c.render(names), names[i]))
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// A symmetric 2-tensor `g_{ij}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymTensor2 {
    rows: Vec<Vec<Poly>>,
}

impl SymTensor2 {
    pub fn new(rows: Vec<Vec<Poly>>) -> Result<Self> {
        let n = rows.len();
        for i in 0..n {
            if rows[i].len() != n {
                return Err(Error::InvalidInput("metric must be square".into()));
            }
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "metric is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(SymTensor2 { rows })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Poly::one(n) } else { Poly::zero(n) })
                    .collect()
            })
            .collect();
        SymTensor2 { rows }
    }

    pub fn from_q(rows: &[Vec<Q>]) -> Result<Self> {
        let n = rows.len();
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|v| Poly::constant(n, v.clone())).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<Poly>] {
        &self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(|p| p.is_zero())
    }

    pub fn is_constant(&self) -> bool {
        self.rows.iter().flatten().all(|p| p.is_constant())
    }

    /// Constant entries, if every entry is constant.
    pub fn constant_matrix(&self) -> Option<Vec<Vec<Q>>> {
        self.is_constant().then(|| {
            self.rows
                .iter()
                .map(|r| r.iter().map(|p| p.constant_term()).collect())
                .collect()
        })
    }
}

fn check_closed_under_d(e: &GradedElement) -> Result<()> {
    let ctx = e.ctx();
    for (m, c) in e.terms() {
        for i in 0..ctx.nbase() {
            if ctx.base_differential(i).is_none() && !c.derivative(i).is_zero() {
                return Err(Error::MissingDifferential(ctx.base()[i].clone()));
            }
        }
        for (k, &ek) in m.iter().enumerate() {
            if ek > 0 && ctx.gen(k).differential_of.is_none() && ctx.gen_differential(k).is_none() {
                return Err(Error::MissingDifferential(ctx.gen(k).name.clone()));
            }
        }
    }
    Ok(())
}

/// The de Rham differential of a context: `q ↦ dq`, `dq ↦ 0`.
pub fn de_rham_d(ctx: &Arc<GradedContext>) -> Derivation {
    let base = (0..ctx.nbase())
        .map(|i| match ctx.base_differential(i) {
            Some(k) => GradedElement::gen(ctx, k),
            None => GradedElement::zero(ctx),
        })
        .collect();
    let gens = (0..ctx.ngens())
        .map(|k| match ctx.gen_differential(k) {
            Some(j) => GradedElement::gen(ctx, j),
            None => GradedElement::zero(ctx),
        })
        .collect();
    Derivation::new(ctx, 1, base, gens).expect("differentials raise degree by one")
}

pub fn exterior_d(e: &GradedElement) -> Result<GradedElement> {
    check_closed_under_d(e)?;
    de_rham_d(e.ctx()).apply(e)
}

/// Interior product with a graded vector field `X`: `ι_X(dq) = X(q)`, zero on
/// every primitive; a derivation of degree `|X| - 1`.
pub fn interior_derivation(x: &Derivation) -> Result<Derivation> {
    let ctx = x.ctx();
    let base = vec![GradedElement::zero(ctx); ctx.nbase()];
    let mut gens = vec![GradedElement::zero(ctx); ctx.ngens()];
    for (k, g) in ctx.gens().iter().enumerate() {
        match g.differential_of {
            Some(Primitive::Base(i)) => gens[k] = x.base_image(i).clone(),
            Some(Primitive::Gen(j)) => gens[k] = x.gen_image(j).clone(),
            None => {}
        }
    }
    Derivation::new(ctx, x.degree() - 1, base, gens)
}

pub fn interior(v: &VectorField, e: &GradedElement) -> Result<GradedElement> {
    interior_derivation(&v.to_derivation(e.ctx()))?.apply(e)
}

/// `ℒ_X = [ι_X, d]`.
pub fn lie_derivation(x: &Derivation) -> Result<Derivation> {
    let i = interior_derivation(x)?;
    i.commutator(&de_rham_d(x.ctx()))
}

pub fn lie(v: &VectorField, e: &GradedElement) -> Result<GradedElement> {
    lie_derivation(&v.to_derivation(e.ctx()))?.apply(e)
}

pub fn lie_sym2(v: &VectorField, g: &SymTensor2) -> SymTensor2 {
    let n = g.dim();
    let mut rows = vec![vec![Poly::zero(n); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = v.apply(&g.rows[i][j]);
            for k in 0..n {
                acc.add_assign_ref(&(&g.rows[k][j] * &v.comps[k].derivative(i)));
                acc.add_assign_ref(&(&g.rows[i][k] * &v.comps[k].derivative(j)));
            }
            rows[i][j] = acc;
        }
    }
    SymTensor2 { rows }
}

pub fn graded_commutator(x: &Derivation, y: &Derivation) -> Result<Derivation> {
    x.commutator(y)
}

/// Contraction with the Euler field of the free differential algebra:
/// every differential generator is sent to its primitive.
pub fn euler_contraction(ctx: &Arc<GradedContext>) -> Result<Derivation> {
    for i in 0..ctx.nbase() {
        if ctx.base_differential(i).is_none() {
            return Err(Error::MissingDifferential(ctx.base()[i].clone()));
        }
    }
    let mut gens = vec![GradedElement::zero(ctx); ctx.ngens()];
    for (k, g) in ctx.gens().iter().enumerate() {
        match g.differential_of {
            Some(Primitive::Base(i)) => gens[k] = GradedElement::base_var(ctx, i),
            Some(Primitive::Gen(j)) => gens[k] = GradedElement::gen(ctx, j),
            None => {
                if ctx.gen_differential(k).is_none() {
                    return Err(Error::MissingDifferential(g.name.clone()));
                }
            }
        }
    }
    Derivation::new(ctx, -1, vec![GradedElement::zero(ctx); ctx.nbase()], gens)
}

/// Contracting homotopy `K = ι_E ∘ N^{-1}`, where `N` counts primitives and
/// differentials. Satisfies `dK + Kd = id` away from constants.
pub fn homotopy(e: &GradedElement) -> Result<GradedElement> {
    let ctx = e.ctx();
    let contraction = euler_contraction(ctx)?;
    let mut scaled = GradedElement::zero(ctx);
    for (m, c) in e.terms() {
        let gen_weight: u32 = m.iter().sum();
        let mut by_weight: BTreeMap<u32, Poly> = BTreeMap::new();
        for (exps, v) in c.terms() {
            let w = gen_weight + exps.iter().sum::<u32>();
            by_weight
                .entry(w)
                .or_insert_with(|| Poly::zero(ctx.nbase()))
                .add_term(exps.clone(), v.clone());
        }
        for (w, p) in by_weight {
            if w == 0 {
                continue;
            }
            scaled.add_term(m.clone(), p.scale(&qi(w as i64).recip()));
        }
    }
    contraction.apply(&scaled)
}

/// The Poincaré-lemma homotopy on polynomial `p`-forms, `p >= 1`.
pub fn homotopy_k(e: &GradedElement, p: u32) -> Result<GradedElement> {
    if p == 0 {
        return Err(Error::InvalidInput("homotopy operator needs form degree >= 1".into()));
    }
    for (m, _) in e.terms() {
        let (_, form) = e.ctx().mono_bidegree(m);
        if form != p {
            return Err(Error::DegreeMismatch(format!("expected a {p}-form")));
        }
    }
    homotopy(e)
}

/// `α_i dx^i` in a context containing the base differentials.
pub fn one_form(ctx: &Arc<GradedContext>, comps: &[Poly]) -> Result<GradedElement> {
    let mut out = GradedElement::zero(ctx);
    for (i, c) in comps.iter().enumerate() {
        let k = ctx
            .base_differential(i)
            .ok_or_else(|| Error::MissingDifferential(ctx.base()[i].clone()))?;
        out = out.add(&GradedElement::gen(ctx, k).scale_poly(c));
    }
    Ok(out)
}

/// Components `α_i` of a 1-form in the base differentials.
pub fn one_form_components(e: &GradedElement) -> Result<Vec<Poly>> {
    let ctx = e.ctx();
    let n = ctx.nbase();
    let mut comps = vec![Poly::zero(n); n];
    for (m, c) in e.terms() {
        let k = m
            .iter()
            .position(|&x| x > 0)
            .filter(|_| m.iter().sum::<u32>() == 1)
            .ok_or_else(|| Error::DegreeMismatch(format!("not a 1-form: {}", e.render())))?;
        match ctx.gen(k).differential_of {
            Some(Primitive::Base(i)) => comps[i] = c.clone(),
            _ => return Err(Error::DegreeMismatch(format!("not a 1-form: {}", e.render()))),
        }
    }
    Ok(comps)
}

/// `Σ_{i<j<k} H_{ijk} dx^i dx^j dx^k` from totally antisymmetric components
/// (only the ordered components `i<j<k` are read).
pub fn three_form(ctx: &Arc<GradedContext>, comps: &ThreeTensor) -> Result<GradedElement> {
    let n = ctx.nbase();
    let mut out = GradedElement::zero(ctx);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let c = comps.get(i, j, k);
                if c.is_zero() {
                    continue;
                }
                let w = [i, j, k]
                    .iter()
                    .map(|&a| {
                        ctx.base_differential(a)
                            .ok_or_else(|| Error::MissingDifferential(ctx.base()[a].clone()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                out = out.add(&GradedElement::from_words(ctx, &[(c.clone(), w)]));
            }
        }
    }
    Ok(out)
}

/// Totally antisymmetric components of a 3-form read off an element of the
/// de Rham algebra.
pub fn three_form_components(e: &GradedElement) -> Result<ThreeTensor> {
    let ctx = e.ctx();
    let n = ctx.nbase();
    let mut t = ThreeTensor::zero(n);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let w: Vec<usize> = [i, j, k]
                    .iter()
                    .map(|&a| ctx.base_differential(a).ok_or_else(|| Error::MissingDifferential(ctx.base()[a].clone())))
                    .collect::<Result<_>>()?;
                if let Some((neg, m)) = crate::graded::normalize_word(ctx, &w) {
                    let c = e.coefficient(&m);
                    t.set_antisymmetric(i, j, k, if neg { -c } else { c });
                }
            }
        }
    }
    Ok(t)
}

/// Dense `n×n×n` array of polynomials, used for 3-forms and trivectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreeTensor {
    n: usize,
    data: Vec<Poly>,
}

impl ThreeTensor {
    pub fn zero(n: usize) -> Self {
        ThreeTensor {
            n,
            data: vec![Poly::zero(n); n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Poly {
        &self.data[(i * self.n + j) * self.n + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, p: Poly) {
        let n = self.n;
        self.data[(i * n + j) * n + k] = p;
    }

    /// Sets `(i,j,k)` and all its permutations with the permutation sign.
    pub fn set_antisymmetric(&mut self, i: usize, j: usize, k: usize, p: Poly) {
        let neg = -p.clone();
        self.set(i, j, k, p.clone());
        self.set(j, k, i, p.clone());
        self.set(k, i, j, p);
        self.set(j, i, k, neg.clone());
        self.set(i, k, j, neg.clone());
        self.set(k, j, i, neg);
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|p| p.is_zero())
    }

    pub fn sub(&self, o: &Self) -> Self {
        ThreeTensor {
            n: self.n,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn is_totally_antisymmetric(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.get(i, j, k);
                    if *self.get(j, i, k) != -v || *self.get(i, k, j) != -v {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Nonzero components with `i<j<k`, 0-based indices.
    pub fn ordered_entries(&self) -> Vec<((usize, usize, usize), Poly)> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let p = self.get(i, j, k);
                    if !p.is_zero() {
                        out.push(((i, j, k), p.clone()));
                    }
                }
            }
        }
        out
    }

    /// Every scalar entry, in storage order (used by numeric cross-checks).
    pub fn entries(&self) -> &[Poly] {
        &self.data
    }
}
