//! Graded-commutative algebra over polynomial coefficients.
//!
//! A [`GradedContext`] fixes the base coordinates (bidegree `(0,0)`) and an
//! ordered list of generators with a ghost and a form degree. Signs are always
//! governed by the total degree. Monomials are stored sorted in the context's
//! generator order, so two elements are equal iff their stored terms agree.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{qi, Poly, Q};

/// What a generator is the differential of, if anything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Primitive {
    Base(usize),
    Gen(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub ghost: u8,
    pub form: u8,
    pub differential_of: Option<Primitive>,
}

impl Generator {
    pub fn new(name: impl Into<String>, ghost: u8, form: u8) -> Self {
        Generator {
            name: name.into(),
            ghost,
            form,
            differential_of: None,
        }
    }

    pub fn differential(name: impl Into<String>, ghost: u8, form: u8, of: Primitive) -> Self {
        Generator {
            name: name.into(),
            ghost,
            form,
            differential_of: Some(of),
        }
    }

    pub fn degree(&self) -> u32 {
        (self.ghost + self.form) as u32
    }

    pub fn is_odd(&self) -> bool {
        self.degree() % 2 == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedContext {
    base: Vec<String>,
    gens: Vec<Generator>,
    base_differential: Vec<Option<usize>>,
    gen_differential: Vec<Option<usize>>,
}

/// Exponent vector over the generators of a context.
pub type GenMono = Vec<u32>;

impl GradedContext {
    pub fn new(base: Vec<String>, gens: Vec<Generator>) -> Result<Arc<Self>> {
        let mut seen = std::collections::HashSet::new();
        for name in base.iter().chain(gens.iter().map(|g| &g.name)) {
            if !seen.insert(name.clone()) {
                return Err(Error::InvalidInput(format!("duplicate name `{name}`")));
            }
        }
        let mut base_differential = vec![None; base.len()];
        let mut gen_differential = vec![None; gens.len()];
        for (k, g) in gens.iter().enumerate() {
            match g.differential_of {
                Some(Primitive::Base(i)) => {
                    if i >= base.len() || g.degree() != 1 {
                        return Err(Error::InvalidInput(format!("bad differential `{}`", g.name)));
                    }
                    base_differential[i] = Some(k);
                }
                Some(Primitive::Gen(j)) => {
                    if j >= gens.len() || gens[j].degree() + 1 != g.degree() {
                        return Err(Error::InvalidInput(format!("bad differential `{}`", g.name)));
                    }
                    gen_differential[j] = Some(k);
                }
                None => {}
            }
        }
        Ok(Arc::new(GradedContext {
            base,
            gens,
            base_differential,
            gen_differential,
        }))
    }

    /// Differential forms on R^n: generators `dx_i` of form degree one.
    pub fn de_rham(base: &[String]) -> Arc<Self> {
        let gens = base
            .iter()
            .enumerate()
            .map(|(i, x)| Generator::differential(format!("d{x}"), 0, 1, Primitive::Base(i)))
            .collect();
        Self::new(base.to_vec(), gens).expect("de Rham context is well formed")
    }

    /// Functions on `T[1]E[1]` for a rank `rank` bundle over `base`.
    ///
    /// Generator order: base differentials `theta`, ghosts `eta`, ghost
    /// differentials `psi`; every sign in the crate is relative to this order.
    pub fn shifted_tangent(base: &[String], rank: usize) -> Arc<Self> {
        let n = base.len();
        let mut gens = Vec::with_capacity(n + 2 * rank);
        for (i, x) in base.iter().enumerate() {
            gens.push(Generator::differential(format!("d{x}"), 0, 1, Primitive::Base(i)));
        }
        for a in 0..rank {
            gens.push(Generator::new(format!("eta{}", a + 1), 1, 0));
        }
        for a in 0..rank {
            gens.push(Generator::differential(
                format!("psi{}", a + 1),
                1,
                1,
                Primitive::Gen(n + a),
            ));
        }
        Self::new(base.to_vec(), gens).expect("shifted tangent context is well formed")
    }

    /// Free field algebra of a two dimensional sigma model: scalars `X^i`,
    /// gauge 1-forms `A_a` and their differentials, ordered `A, dX, dA`.
    pub fn worldsheet(n: usize, rank: usize) -> Arc<Self> {
        let base: Vec<String> = (1..=n).map(|i| format!("X{i}")).collect();
        let mut gens = Vec::with_capacity(n + 2 * rank);
        for a in 0..rank {
            gens.push(Generator::new(format!("A{}", a + 1), 0, 1));
        }
        for i in 0..n {
            gens.push(Generator::differential(
                format!("dX{}", i + 1),
                0,
                1,
                Primitive::Base(i),
            ));
        }
        for a in 0..rank {
            gens.push(Generator::differential(
                format!("dA{}", a + 1),
                0,
                2,
                Primitive::Gen(a),
            ));
        }
        Self::new(base, gens).expect("worldsheet context is well formed")
    }

    pub fn base(&self) -> &[String] {
        &self.base
    }

    pub fn nbase(&self) -> usize {
        self.base.len()
    }

    pub fn gens(&self) -> &[Generator] {
        &self.gens
    }

    pub fn ngens(&self) -> usize {
        self.gens.len()
    }

    pub fn gen(&self, k: usize) -> &Generator {
        &self.gens[k]
    }

    pub fn gen_index(&self, name: &str) -> Result<usize> {
        self.gens
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn base_index(&self, name: &str) -> Result<usize> {
        self.base
            .iter()
            .position(|g| g == name)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn base_differential(&self, i: usize) -> Option<usize> {
        self.base_differential[i]
    }

    pub fn gen_differential(&self, k: usize) -> Option<usize> {
        self.gen_differential[k]
    }

    pub fn mono_degree(&self, m: &[u32]) -> u32 {
        m.iter()
            .zip(&self.gens)
            .map(|(&e, g)| e * g.degree())
            .sum()
    }

    pub fn mono_bidegree(&self, m: &[u32]) -> (u32, u32) {
        m.iter().zip(&self.gens).fold((0, 0), |(gh, fo), (&e, g)| {
            (gh + e * g.ghost as u32, fo + e * g.form as u32)
        })
    }

    pub fn render_mono(&self, m: &[u32]) -> String {
        let names: Vec<String> = self.gens.iter().map(|g| g.name.clone()).collect();
        crate::poly::render_exponents(m, &names, " ")
    }

    /// All generator monomials of total degree `deg` (even generators may repeat).
    pub fn monomials_of_degree(&self, deg: u32) -> Vec<GenMono> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; self.gens.len()];
        self.fill_monos(&mut out, &mut cur, 0, deg);
        out
    }

    fn fill_monos(&self, out: &mut Vec<GenMono>, cur: &mut GenMono, k: usize, left: u32) {
        if k == self.gens.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let g = &self.gens[k];
        let d = g.degree();
        let max_e = if d == 0 {
            0
        } else if g.is_odd() {
            1.min(left / d)
        } else {
            left / d
        };
        for e in 0..=max_e {
            cur[k] = e;
            self.fill_monos(out, cur, k + 1, left - e * d);
        }
        cur[k] = 0;
    }
}

/// Sign and monomial of the product `a * b`, or `None` when an odd generator repeats.
pub fn mono_mul(ctx: &GradedContext, a: &[u32], b: &[u32]) -> Option<(bool, GenMono)> {
    let mut swaps = 0u32;
    let mut out = Vec::with_capacity(a.len());
    for k in 0..a.len() {
        let g = &ctx.gens[k];
        if g.is_odd() && a[k] + b[k] > 1 {
            return None;
        }
        out.push(a[k] + b[k]);
    }
    // moving each odd factor of b left past the odd factors of a with larger index
    for (j, &eb) in b.iter().enumerate() {
        if eb == 0 || !ctx.gens[j].is_odd() {
            continue;
        }
        for (i, &ea) in a.iter().enumerate().skip(j + 1) {
            if ea > 0 && ctx.gens[i].is_odd() {
                swaps += ea * eb;
            }
        }
    }
    Some((swaps % 2 == 1, out))
}

/// Normal form of an ordered word of generator indices: `(negative, monomial)`,
/// or `None` if the word vanishes.
pub fn normalize_word(ctx: &GradedContext, word: &[usize]) -> Option<(bool, GenMono)> {
    let mut neg = false;
    let mut acc = vec![0u32; ctx.ngens()];
    for &g in word {
        let mut single = vec![0u32; ctx.ngens()];
        single[g] = 1;
        let (s, m) = mono_mul(ctx, &acc, &single)?;
        neg ^= s;
        acc = m;
    }
    Some((neg, acc))
}

/// A finite sum of polynomial coefficients times normalized generator monomials.
#[derive(Clone)]
pub struct GradedElement {
    ctx: Arc<GradedContext>,
    terms: BTreeMap<GenMono, Poly>,
}

impl PartialEq for GradedElement {
    fn eq(&self, other: &Self) -> bool {
        same_ctx(&self.ctx, &other.ctx) && self.terms == other.terms
    }
}

impl Eq for GradedElement {}

pub(crate) fn same_ctx(a: &Arc<GradedContext>, b: &Arc<GradedContext>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl GradedElement {
    pub fn zero(ctx: &Arc<GradedContext>) -> Self {
        GradedElement {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(ctx: &Arc<GradedContext>, p: Poly) -> Self {
        assert_eq!(p.nvars(), ctx.nbase());
        let mut e = Self::zero(ctx);
        e.add_term(vec![0; ctx.ngens()], p);
        e
    }

    pub fn one(ctx: &Arc<GradedContext>) -> Self {
        Self::scalar(ctx, Poly::one(ctx.nbase()))
    }

    pub fn base_var(ctx: &Arc<GradedContext>, i: usize) -> Self {
        Self::scalar(ctx, Poly::var(ctx.nbase(), i))
    }

    pub fn gen(ctx: &Arc<GradedContext>, k: usize) -> Self {
        let mut m = vec![0; ctx.ngens()];
        m[k] = 1;
        Self::term(ctx, Poly::one(ctx.nbase()), m)
    }

    pub fn named(ctx: &Arc<GradedContext>, name: &str) -> Result<Self> {
        Ok(Self::gen(ctx, ctx.gen_index(name)?))
    }

    pub fn term(ctx: &Arc<GradedContext>, coeff: Poly, mono: GenMono) -> Self {
        let mut e = Self::zero(ctx);
        e.add_term(mono, coeff);
        e
    }

    /// Normalizes a list of `(coefficient, ordered word)` terms.
    pub fn from_words(ctx: &Arc<GradedContext>, words: &[(Poly, Vec<usize>)]) -> Self {
        let mut e = Self::zero(ctx);
        for (c, w) in words {
            if let Some((neg, m)) = normalize_word(ctx, w) {
                e.add_term(m, if neg { -c } else { c.clone() });
            }
        }
        e
    }

    /// Same as [`from_words`](Self::from_words) with generator names.
    pub fn from_named_words(ctx: &Arc<GradedContext>, words: &[(Poly, Vec<&str>)]) -> Result<Self> {
        let mut idx = Vec::with_capacity(words.len());
        for (c, w) in words {
            let ks = w.iter().map(|n| ctx.gen_index(n)).collect::<Result<Vec<_>>>()?;
            idx.push((c.clone(), ks));
        }
        Ok(Self::from_words(ctx, &idx))
    }

    pub fn ctx(&self) -> &Arc<GradedContext> {
        &self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GenMono, &Poly)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, mono: &[u32]) -> Poly {
        self.terms
            .get(mono)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.ctx.nbase()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, mono: GenMono, coeff: Poly) {
        if coeff.is_zero() {
            return;
        }
        debug_assert_eq!(mono.len(), self.ctx.ngens());
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign_ref(&coeff);
                if o.get().is_zero() {
                    o.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_ctx(&self.ctx, &other.ctx) {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(&self.ctx);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((neg, m)) = mono_mul(&self.ctx, ma, mb) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// Product; panics on a context mismatch (use [`try_mul`](Self::try_mul) otherwise).
    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("graded product across contexts")
    }

    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("graded sum across contexts")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = Self::zero(&self.ctx);
        if c.is_zero() {
            return out;
        }
        for (m, p) in &self.terms {
            out.add_term(m.clone(), p.scale(c));
        }
        out
    }

    pub fn scale_poly(&self, f: &Poly) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (m, p) in &self.terms {
            out.add_term(m.clone(), p * f);
        }
        out
    }

    /// `self += factor * other` without cloning `self`.
    pub fn add_scaled(&mut self, other: &Self, factor: &Q) {
        assert!(same_ctx(&self.ctx, &other.ctx));
        for (m, p) in &other.terms {
            self.add_term(m.clone(), p.scale(factor));
        }
    }

    /// Total degree when homogeneous; `None` for zero or mixed elements.
    pub fn degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|m| self.ctx.mono_degree(m));
        let d = it.next()?;
        it.all(|k| k == d).then_some(d)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.degree().is_some()
    }

    /// Keeps the terms of the given `(ghost, form)` bidegree.
    pub fn bidegree_part(&self, ghost: u32, form: u32) -> Self {
        self.filter(|m| self.ctx.mono_bidegree(m) == (ghost, form))
    }

    pub fn filter(&self, keep: impl Fn(&GenMono) -> bool) -> Self {
        GradedElement {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Sets every generator with `kill[k] == true` to zero.
    pub fn restrict(&self, kill: &[bool]) -> Self {
        self.filter(|m| m.iter().zip(kill).all(|(&e, &k)| e == 0 || !k))
    }

    /// Evaluates the coefficients at a base point, returning the nonzero
    /// rational coefficients per monomial.
    pub fn eval_coefficients(&self, point: &[Q]) -> BTreeMap<GenMono, Q> {
        self.terms
            .iter()
            .map(|(m, p)| (m.clone(), p.eval(point)))
            .filter(|(_, v)| !v.is_zero())
            .collect()
    }

    /// Largest coefficient degree, `None` for zero.
    pub fn coefficient_degree(&self) -> Option<u32> {
        self.terms.values().filter_map(|p| p.degree()).max()
    }

    /// Algebra homomorphism into `target` fixed by images of the base
    /// coordinates and of the generators (degree preservation is the caller's duty).
    pub fn substitute(
        &self,
        target: &Arc<GradedContext>,
        base_images: &[Poly],
        gen_images: &[GradedElement],
    ) -> GradedElement {
        assert_eq!(base_images.len(), self.ctx.nbase());
        assert_eq!(gen_images.len(), self.ctx.ngens());
        let mut out = GradedElement::zero(target);
        for (m, c) in &self.terms {
            let mut t = GradedElement::scalar(target, c.compose(base_images));
            for (k, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    t = t.mul(&gen_images[k]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Reinterprets the element in a context that extends this one, sending
    /// generator `k` to `gen_map[k]` (same base coordinates).
    pub fn transport(&self, target: &Arc<GradedContext>, gen_map: &[usize]) -> GradedElement {
        assert_eq!(target.nbase(), self.ctx.nbase());
        let mut out = GradedElement::zero(target);
        for (m, c) in &self.terms {
            let word: Vec<usize> = m
                .iter()
                .enumerate()
                .flat_map(|(k, &e)| std::iter::repeat(gen_map[k]).take(e as usize))
                .collect();
            if let Some((neg, mm)) = normalize_word(target, &word) {
                out.add_term(mm, if neg { -c } else { c.clone() });
            }
        }
        out
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let mono = self.ctx.render_mono(m);
            let coeff = c.render(self.ctx.base());
            let s = if mono.is_empty() {
                coeff
            } else if c.num_terms() == 1 && coeff == "1" {
                mono
            } else if c.num_terms() == 1 && coeff == "-1" {
                format!("-{mono}")
            } else {
                format!("({coeff}) {mono}")
            };
            parts.push(s);
        }
        parts.join(" + ")
    }
}

impl fmt::Debug for GradedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl fmt::Display for GradedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// A graded derivation, determined by its values on the base coordinates and
/// on every generator, with intrinsic total degree `degree`.
#[derive(Clone, PartialEq)]
pub struct Derivation {
    ctx: Arc<GradedContext>,
    degree: i32,
    base: Vec<GradedElement>,
    gens: Vec<GradedElement>,
}

impl fmt::Debug for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Derivation(deg {}) {{", self.degree)?;
        for (i, b) in self.base.iter().enumerate() {
            if !b.is_zero() {
                write!(f, " {} -> {};", self.ctx.base()[i], b)?;
            }
        }
        for (k, g) in self.gens.iter().enumerate() {
            if !g.is_zero() {
                write!(f, " {} -> {};", self.ctx.gen(k).name, g)?;
            }
        }
        write!(f, " }}")
    }
}

impl Derivation {
    pub fn new(
        ctx: &Arc<GradedContext>,
        degree: i32,
        base: Vec<GradedElement>,
        gens: Vec<GradedElement>,
    ) -> Result<Self> {
        if base.len() != ctx.nbase() || gens.len() != ctx.ngens() {
            return Err(Error::InvalidInput("derivation image count".into()));
        }
        for (i, img) in base.iter().enumerate() {
            Self::check_image(ctx, img, degree, &ctx.base()[i])?;
        }
        for (k, img) in gens.iter().enumerate() {
            Self::check_image(ctx, img, ctx.gen(k).degree() as i32 + degree, &ctx.gen(k).name)?;
        }
        Ok(Derivation {
            ctx: ctx.clone(),
            degree,
            base,
            gens,
        })
    }

    fn check_image(ctx: &Arc<GradedContext>, img: &GradedElement, want: i32, name: &str) -> Result<()> {
        if !same_ctx(ctx, img.ctx()) {
            return Err(Error::ContextMismatch);
        }
        if img.is_zero() {
            return Ok(());
        }
        match img.degree() {
            Some(d) if d as i32 == want => Ok(()),
            _ => Err(Error::DegreeMismatch(format!(
                "image of `{name}` must have degree {want}, got {}",
                img.render()
            ))),
        }
    }

    pub fn zero(ctx: &Arc<GradedContext>, degree: i32) -> Self {
        Derivation {
            ctx: ctx.clone(),
            degree,
            base: vec![GradedElement::zero(ctx); ctx.nbase()],
            gens: vec![GradedElement::zero(ctx); ctx.ngens()],
        }
    }

    /// Left partial derivative with respect to generator `k`.
    pub fn partial_gen(ctx: &Arc<GradedContext>, k: usize) -> Self {
        let mut d = Self::zero(ctx, -(ctx.gen(k).degree() as i32));
        d.gens[k] = GradedElement::one(ctx);
        d
    }

    /// Partial derivative with respect to base coordinate `i`.
    pub fn partial_base(ctx: &Arc<GradedContext>, i: usize) -> Self {
        let mut d = Self::zero(ctx, 0);
        d.base[i] = GradedElement::one(ctx);
        d
    }

    pub fn ctx(&self) -> &Arc<GradedContext> {
        &self.ctx
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn is_odd(&self) -> bool {
        self.degree.rem_euclid(2) == 1
    }

    pub fn base_image(&self, i: usize) -> &GradedElement {
        &self.base[i]
    }

    pub fn gen_image(&self, k: usize) -> &GradedElement {
        &self.gens[k]
    }

    pub fn is_zero(&self) -> bool {
        self.base.iter().chain(&self.gens).all(|e| e.is_zero())
    }

    pub fn scale(&self, c: &Q) -> Self {
        Derivation {
            ctx: self.ctx.clone(),
            degree: self.degree,
            base: self.base.iter().map(|e| e.scale(c)).collect(),
            gens: self.gens.iter().map(|e| e.scale(c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !same_ctx(&self.ctx, &other.ctx) {
            return Err(Error::ContextMismatch);
        }
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(Error::DegreeMismatch(format!(
                "adding derivations of degree {} and {}",
                self.degree, other.degree
            )));
        }
        let degree = if self.is_zero() { other.degree } else { self.degree };
        Ok(Derivation {
            ctx: self.ctx.clone(),
            degree,
            base: self.base.iter().zip(&other.base).map(|(a, b)| a.add(b)).collect(),
            gens: self.gens.iter().zip(&other.gens).map(|(a, b)| a.add(b)).collect(),
        })
    }

    /// Applies the derivation using the graded Leibniz rule.
    pub fn apply(&self, e: &GradedElement) -> Result<GradedElement> {
        if !same_ctx(&self.ctx, e.ctx()) {
            return Err(Error::ContextMismatch);
        }
        let ctx = &self.ctx;
        let n = ctx.ngens();
        let mut out = GradedElement::zero(ctx);
        for (m, f) in e.terms() {
            let mono_elem = GradedElement::term(ctx, Poly::one(ctx.nbase()), m.clone());
            // coefficient part: sum_i d_i f * D(x^i) * m
            for (i, img) in self.base.iter().enumerate() {
                if img.is_zero() {
                    continue;
                }
                let df = f.derivative(i);
                if df.is_zero() {
                    continue;
                }
                out = out.add(&img.scale_poly(&df).mul(&mono_elem));
            }
            // generator part
            let mut prefix_deg = 0u32;
            for j in 0..n {
                let ej = m[j];
                if ej == 0 {
                    continue;
                }
                let img = &self.gens[j];
                if !img.is_zero() {
                    let mut pre = vec![0u32; n];
                    pre[..j].copy_from_slice(&m[..j]);
                    let mut post = vec![0u32; n];
                    post[j + 1..].copy_from_slice(&m[j + 1..]);
                    let mut mid = vec![0u32; n];
                    mid[j] = ej - 1;
                    let sign_neg = self.is_odd() && prefix_deg % 2 == 1;
                    let mut c = f.scale(&qi(ej as i64));
                    if sign_neg {
                        c = -c;
                    }
                    let t = GradedElement::term(ctx, c, pre)
                        .mul(&GradedElement::term(ctx, Poly::one(ctx.nbase()), mid))
                        .mul(img)
                        .mul(&GradedElement::term(ctx, Poly::one(ctx.nbase()), post));
                    out = out.add(&t);
                }
                prefix_deg += ej * ctx.gen(j).degree();
            }
        }
        Ok(out)
    }

    /// Graded commutator `[X, Y] = XY - (-1)^{|X||Y|} YX`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        if !same_ctx(&self.ctx, &other.ctx) {
            return Err(Error::ContextMismatch);
        }
        let both_odd = self.is_odd() && other.is_odd();
        let bracket = |a: &GradedElement, b: &GradedElement| -> Result<GradedElement> {
            let xy = self.apply(a)?;
            let yx = other.apply(b)?;
            Ok(if both_odd { xy.add(&yx) } else { xy.sub(&yx) })
        };
        let mut base = Vec::with_capacity(self.base.len());
        for i in 0..self.base.len() {
            base.push(bracket(&other.base[i], &self.base[i])?);
        }
        let mut gens = Vec::with_capacity(self.gens.len());
        for k in 0..self.gens.len() {
            gens.push(bracket(&other.gens[k], &self.gens[k])?);
        }
        Derivation::new(&self.ctx, self.degree + other.degree, base, gens)
    }

    /// The square `X∘X`, a derivation when `X` is odd (it equals `½[X,X]`).
    pub fn square(&self) -> Result<Self> {
        if !self.is_odd() {
            return Err(Error::InvalidInput("square of an even derivation is not a derivation".into()));
        }
        let half = crate::poly::q(1, 2);
        Ok(self.commutator(self)?.scale(&half))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn odd_generators_anticommute() {
        let ctx = GradedContext::de_rham(&names(&["x", "y"]));
        let dx = GradedElement::gen(&ctx, 0);
        let dy = GradedElement::gen(&ctx, 1);
        assert_eq!(dx.mul(&dy), dy.mul(&dx).neg());
        assert!(dx.mul(&dx).is_zero());
    }

    #[test]
    fn words_normalize() {
        let ctx = GradedContext::shifted_tangent(&names(&["x"]), 1);
        let one = Poly::one(1);
        // psi is even, so psi eta = eta psi; dx eta = -eta dx
        let a = GradedElement::from_named_words(&ctx, &[(one.clone(), vec!["psi1", "eta1"])]).unwrap();
        let b = GradedElement::from_named_words(&ctx, &[(one.clone(), vec!["eta1", "psi1"])]).unwrap();
        assert_eq!(a, b);
        let c = GradedElement::from_named_words(&ctx, &[(one.clone(), vec!["eta1", "dx"])]).unwrap();
        let d = GradedElement::from_named_words(&ctx, &[(one, vec!["dx", "eta1"])]).unwrap();
        assert_eq!(c, d.neg());
    }

    #[test]
    fn partial_of_odd_pair() {
        let ctx = GradedContext::de_rham(&names(&["x", "y"]));
        let dx = GradedElement::gen(&ctx, 0);
        let dy = GradedElement::gen(&ctx, 1);
        let w = dx.mul(&dy);
        let p_dy = Derivation::partial_gen(&ctx, 1);
        assert_eq!(p_dy.apply(&w).unwrap(), dx.neg());
        let p_dx = Derivation::partial_gen(&ctx, 0);
        assert_eq!(p_dx.apply(&w).unwrap(), dy);
    }

    #[test]
    fn commutator_of_partials_vanishes() {
        let ctx = GradedContext::de_rham(&names(&["x", "y"]));
        let a = Derivation::partial_gen(&ctx, 0);
        let b = Derivation::partial_gen(&ctx, 1);
        assert!(a.commutator(&b).unwrap().is_zero());
    }

    #[test]
    fn monomial_enumeration() {
        let ctx = GradedContext::shifted_tangent(&names(&["x", "y"]), 1);
        // degree 2: dx dy, dx eta, dy eta, psi
        assert_eq!(ctx.monomials_of_degree(2).len(), 4);
    }
}
