//! Worldsheet side: twisted pullback, boundary localization and action assembly.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cartan::{de_rham_d, homotopy, three_form, ThreeTensor};
use crate::error::{Error, Result};
use crate::gengeo::OOperator;
use crate::graded::{GenMono, GradedContext, GradedElement};
use crate::linalg::PolyMatrix;
use crate::poly::{monomials_up_to, parse_q, q, q_to_string, Poly, Q};
use crate::qmanifold::{build_q, lift_qtilde, AlgebroidData};
use crate::status::Status;

/// Field algebra matching an algebroid: `X^i`, `A^a`, `dX^i`, `dA^a`.
pub fn worldsheet_of(e: &AlgebroidData) -> Arc<GradedContext> {
    GradedContext::worldsheet(e.dim(), e.rank())
}

fn ws_a(a: usize) -> usize {
    a
}

fn ws_dx(rank: usize, i: usize) -> usize {
    rank + i
}

fn ws_da(n: usize, rank: usize, a: usize) -> usize {
    rank + n + a
}

/// Images of the generators of `T[1]E[1]` under the twisted pullback.
fn pullback_images(e: &AlgebroidData, ws: &Arc<GradedContext>) -> (Vec<Poly>, Vec<GradedElement>) {
    let (n, r) = (e.dim(), e.rank());
    let xs: Vec<Poly> = (0..n).map(|i| Poly::var(n, i)).collect();
    // Q^α only involves x and η, so the untwisted map suffices for them
    let mut plain = vec![GradedElement::zero(ws); e.ctx().ngens()];
    for a in 0..r {
        plain[e.eta(a)] = GradedElement::gen(ws, ws_a(a));
    }
    let mut gens = plain.clone();
    for i in 0..n {
        let qi = e.q_base(i).substitute(ws, &xs, &plain);
        gens[e.theta(i)] = GradedElement::gen(ws, ws_dx(r, i)).sub(&qi);
    }
    for a in 0..r {
        let qa = e.q_ghost(a).substitute(ws, &xs, &plain);
        gens[e.psi(a)] = GradedElement::gen(ws, ws_da(n, r, a)).sub(&qa);
    }
    (xs, gens)
}

/// `f*`: `x ↦ X`, `η ↦ A`, `θ ↦ dX − f*(Q^i)`, `ψ ↦ dA − f*(Q^a)`.
pub fn pullback_f(f: &GradedElement, e: &AlgebroidData) -> Result<GradedElement> {
    if !crate::graded::same_ctx(f.ctx(), e.ctx()) {
        return Err(Error::ContextMismatch);
    }
    let ws = worldsheet_of(e);
    let (xs, gens) = pullback_images(e, &ws);
    Ok(f.substitute(&ws, &xs, &gens))
}

/// `d(f*F) − f*(Q̃F)`.
pub fn chain_map_residual(f: &GradedElement, e: &AlgebroidData) -> Result<GradedElement> {
    let qt = lift_qtilde(&build_q(e))?;
    let lhs = de_rham_d(&worldsheet_of(e)).apply(&pullback_f(f, e)?)?;
    let rhs = pullback_f(&qt.apply(f)?, e)?;
    Ok(lhs.sub(&rhs))
}

/// A superfunction of total degree `deg` with a few random terms whose
/// coefficients have degree ≤ 2 and small integer entries.
pub fn random_superfunction(e: &AlgebroidData, deg: u32, rng: &mut impl Rng) -> GradedElement {
    let ctx = e.ctx();
    let n = e.dim();
    let monos = ctx.monomials_of_degree(deg);
    let coeff_monos = monomials_up_to(n, 2);
    let mut out = GradedElement::zero(ctx);
    if monos.is_empty() {
        return out;
    }
    for _ in 0..rng.gen_range(1..=4) {
        let m = monos[rng.gen_range(0..monos.len())].clone();
        let mut c = Poly::zero(n);
        for _ in 0..rng.gen_range(1..=3) {
            let ex = coeff_monos[rng.gen_range(0..coeff_monos.len())].clone();
            c.add_term(ex, Q::from_integer(rng.gen_range(-3i64..=3).into()));
        }
        out.add_term(m, c);
    }
    out
}

#[derive(Debug, Clone)]
pub struct ChainMapReport {
    pub status: Status,
    pub checked: usize,
    /// Rendered inputs on which the identity failed.
    pub failures: Vec<String>,
}

/// Chain-map identity on every generator and on `samples` random
/// superfunctions of degree ≤ 3.
pub fn chain_map_check(e: &AlgebroidData, samples: usize, seed: u64) -> Result<ChainMapReport> {
    let ctx = e.ctx();
    let mut inputs: Vec<GradedElement> = (0..e.dim()).map(|i| GradedElement::base_var(ctx, i)).collect();
    inputs.extend((0..ctx.ngens()).map(|k| GradedElement::gen(ctx, k)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..samples {
        inputs.push(random_superfunction(e, (s % 4) as u32, &mut rng));
    }
    let mut failures = Vec::new();
    for f in &inputs {
        if !chain_map_residual(f, e)?.is_zero() {
            failures.push(f.render());
        }
    }
    Ok(ChainMapReport { status: Status::from_bool(failures.is_empty()), checked: inputs.len(), failures })
}

/// A worldsheet action: boundary 2-form integrand and bulk 3-form (`X̃*H`).
#[derive(Debug, Clone, PartialEq)]
pub struct ActionExpression {
    pub boundary: GradedElement,
    pub bulk: GradedElement,
}

impl ActionExpression {
    pub fn ctx(&self) -> &Arc<GradedContext> {
        self.boundary.ctx()
    }

    /// `dB + bulk`, the 3-form this action integrates.
    pub fn total(&self) -> Result<GradedElement> {
        Ok(de_rham_d(self.ctx()).apply(&self.boundary)?.add(&self.bulk))
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_zero() && self.bulk.is_zero()
    }
}

/// `X*H` in the field algebra.
pub fn image_of_h(ws: &Arc<GradedContext>, h: &ThreeTensor) -> Result<GradedElement> {
    if h.dim() != ws.nbase() {
        return Err(Error::DegreeMismatch("3-form dimension differs from the target".into()));
    }
    three_form(ws, h)
}

/// Splits `ω3` into `dB + X*H`; `B` comes from the contracting homotopy,
/// with pure `c(X) dA_a` terms traded for `−dc ∧ A_a`.
pub fn localize_boundary(omega3: &GradedElement, h: &ThreeTensor) -> Result<ActionExpression> {
    let ws = omega3.ctx().clone();
    let bulk = image_of_h(&ws, h)?;
    let rem = omega3.sub(&bulk);
    let d = de_rham_d(&ws);
    let mut b = homotopy(&rem)?;
    if d.apply(&b)? != rem {
        return Err(Error::NotExact("boundary remainder is not d-exact".into()));
    }
    let mut exact = GradedElement::zero(&ws);
    for (m, c) in b.terms() {
        if m.iter().sum::<u32>() != 1 {
            continue;
        }
        let k = m.iter().position(|&x| x == 1).expect("one generator");
        if let Some(crate::graded::Primitive::Gen(a)) = ws.gen(k).differential_of {
            exact = exact.add(&GradedElement::gen(&ws, a).scale_poly(c));
        }
    }
    if !exact.is_zero() {
        b = b.sub(&d.apply(&exact)?);
    }
    Ok(ActionExpression { boundary: b, bulk })
}

/// Choice of `(A_i, V^i)` in terms of the field `𝒜` along the Dirac structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsmConvention {
    /// `A = g(𝒜 + O𝒜)`, `V = 𝒜 − O𝒜`.
    Parametrization,
    /// `A = g(𝒜 − O𝒜)`, `V = 𝒜 − O𝒜`.
    Inline,
    /// `A = −g(𝒜 + O𝒜)`, `V = −(𝒜 − O𝒜)`.
    Reversed,
}

impl DsmConvention {
    pub const ALL: [DsmConvention; 3] = [Self::Parametrization, Self::Inline, Self::Reversed];
}

/// The convention under which both forms agree identically.
pub const DSM_CONVENTION: DsmConvention = DsmConvention::Reversed;

#[derive(Debug, Clone)]
pub struct DsmForms {
    pub convention: DsmConvention,
    /// `g(dX∧,(1+O)𝒜) + g(𝒜∧,O𝒜)`.
    pub metric_form: ActionExpression,
    /// `A_i∧dX^i − ½A_i∧V^i`.
    pub topological_form: ActionExpression,
    pub residual: GradedElement,
    pub status: Status,
}

/// Column vector of 1-forms `M^i_j 𝒜^j`.
fn apply_to_fields(ws: &Arc<GradedContext>, m: &PolyMatrix) -> Vec<GradedElement> {
    let n = m.n();
    (0..n)
        .map(|i| {
            let mut acc = GradedElement::zero(ws);
            for j in 0..n {
                acc = acc.add(&GradedElement::gen(ws, ws_a(j)).scale_poly(m.get(i, j)));
            }
            acc
        })
        .collect()
}

/// `g_{ij} u^i ∧ w^j`.
fn metric_wedge(ws: &Arc<GradedContext>, g: &PolyMatrix, u: &[GradedElement], w: &[GradedElement]) -> GradedElement {
    let mut out = GradedElement::zero(ws);
    for (i, ui) in u.iter().enumerate() {
        for (j, wj) in w.iter().enumerate() {
            let gij = g.get(i, j);
            if !gij.is_zero() {
                out = out.add(&ui.mul(wj).scale_poly(gij));
            }
        }
    }
    out
}

/// Both renderings of the topological DSM integrand and their difference.
pub fn dsm_assemble_with(o: &OOperator, h: &ThreeTensor, convention: DsmConvention) -> Result<DsmForms> {
    let n = o.dim();
    let ws = GradedContext::worldsheet(n, n);
    let bulk = image_of_h(&ws, h)?;
    let id = PolyMatrix::identity(n, n);
    let g = PolyMatrix::from_rows(n, o.metric().rows().to_vec());
    let plus = apply_to_fields(&ws, &id.add(o.matrix()));
    let minus = apply_to_fields(&ws, &id.sub(o.matrix()));
    let oa = apply_to_fields(&ws, o.matrix());
    let fields: Vec<GradedElement> = (0..n).map(|j| GradedElement::gen(&ws, ws_a(j))).collect();
    let dx: Vec<GradedElement> = (0..n).map(|i| GradedElement::gen(&ws, ws_dx(n, i))).collect();

    let first = metric_wedge(&ws, &g, &dx, &plus).add(&metric_wedge(&ws, &g, &fields, &oa));

    let (a_src, sign_a, sign_v) = match convention {
        DsmConvention::Parametrization => (&plus, 1, 1),
        DsmConvention::Inline => (&minus, 1, 1),
        DsmConvention::Reversed => (&plus, -1, -1),
    };
    let lower = |v: &[GradedElement]| -> Vec<GradedElement> {
        (0..n)
            .map(|i| {
                let mut acc = GradedElement::zero(&ws);
                for (j, vj) in v.iter().enumerate() {
                    acc = acc.add(&vj.scale_poly(g.get(i, j)));
                }
                acc
            })
            .collect()
    };
    let a_low: Vec<GradedElement> = lower(a_src).iter().map(|x| x.scale(&Q::from_integer(sign_a.into()))).collect();
    let v_up: Vec<GradedElement> = minus.iter().map(|x| x.scale(&Q::from_integer(sign_v.into()))).collect();
    let mut second = GradedElement::zero(&ws);
    for i in 0..n {
        second = second.add(&a_low[i].mul(&dx[i]));
        second = second.sub(&a_low[i].mul(&v_up[i]).scale(&q(1, 2)));
    }
    let residual = first.sub(&second);
    Ok(DsmForms {
        convention,
        status: Status::from_bool(residual.is_zero()),
        metric_form: ActionExpression { boundary: first, bulk: bulk.clone() },
        topological_form: ActionExpression { boundary: second, bulk },
        residual,
    })
}

pub fn dsm_assemble(o: &OOperator, h: &ThreeTensor) -> Result<DsmForms> {
    dsm_assemble_with(o, h, DSM_CONVENTION)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Latex,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "latex" => Ok(Format::Latex),
            "json" => Ok(Format::Json),
            other => Err(Error::UnknownFormat(other.into())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Latex => "latex",
            Format::Json => "json",
        })
    }
}

/// Splits an element into `(rational, X-monomial, generator monomial)` terms.
fn flat_terms(e: &GradedElement) -> Vec<(Q, Vec<u32>, GenMono)> {
    let mut out = Vec::new();
    for (m, c) in e.terms() {
        for (ex, v) in c.terms() {
            out.push((v.clone(), ex.clone(), m.clone()));
        }
    }
    out
}

fn mono_text(ctx: &GradedContext, ex: &[u32], m: &[u32]) -> String {
    let mut parts = Vec::new();
    for (i, &k) in ex.iter().enumerate() {
        match k {
            0 => {}
            1 => parts.push(ctx.base()[i].clone()),
            _ => parts.push(format!("{}^{}", ctx.base()[i], k)),
        }
    }
    for (j, &k) in m.iter().enumerate() {
        match k {
            0 => {}
            1 => parts.push(ctx.gen(j).name.clone()),
            _ => parts.push(format!("{}^{}", ctx.gen(j).name, k)),
        }
    }
    parts.join(" ")
}

fn terms_json(e: &GradedElement) -> Value {
    Value::Array(
        flat_terms(e)
            .into_iter()
            .map(|(c, ex, m)| json!([q_to_string(&c), mono_text(e.ctx(), &ex, &m)]))
            .collect(),
    )
}

fn latex_index(name: &str, letter: &str, upper: bool) -> Option<String> {
    let idx = name.strip_prefix(letter)?;
    let idx = if idx.len() == 1 { idx.to_string() } else { format!("{{{idx}}}") };
    Some(if upper { format!("{letter}^{idx}") } else { format!("{letter}_{idx}") })
}

fn latex_gen(name: &str) -> String {
    if let Some(rest) = name.strip_prefix("dX") {
        return format!("d {}", latex_index(&format!("X{rest}"), "X", true).unwrap_or_default());
    }
    if let Some(rest) = name.strip_prefix("dA") {
        return format!("d {}", latex_index(&format!("A{rest}"), "A", false).unwrap_or_default());
    }
    latex_index(name, "A", false).unwrap_or_else(|| name.to_string())
}

fn latex_q(v: &Q) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", v.numer(), v.denom())
    }
}

fn latex_element(e: &GradedElement) -> String {
    let ctx = e.ctx();
    let terms = flat_terms(e);
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (c, ex, m)) in terms.iter().enumerate() {
        let neg = c.is_negative();
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut factors = Vec::new();
        let a = c.abs();
        if !a.is_one() {
            factors.push(latex_q(&a));
        }
        for (i, &p) in ex.iter().enumerate() {
            let x = latex_index(&ctx.base()[i], "X", true).unwrap_or_else(|| ctx.base()[i].clone());
            match p {
                0 => {}
                1 => factors.push(x),
                _ => factors.push(format!("({x})^{{{p}}}")),
            }
        }
        let mut forms = Vec::new();
        for (j, &p) in m.iter().enumerate() {
            for _ in 0..p {
                forms.push(latex_gen(&ctx.gen(j).name));
            }
        }
        if !forms.is_empty() {
            factors.push(forms.join(" \\wedge "));
        }
        if factors.is_empty() {
            factors.push("1".into());
        }
        out.push_str(&factors.join(" "));
    }
    out
}

/// Deterministic LaTeX or JSON rendering.
pub fn emit(action: &ActionExpression, format: Format) -> String {
    match format {
        Format::Latex => format!(
            "S = \\int_{{\\Sigma}} \\left( {} \\right) + \\int_{{\\tilde\\Sigma}} \\left( {} \\right)",
            latex_element(&action.boundary),
            latex_element(&action.bulk)
        ),
        Format::Json => {
            let ctx = action.ctx();
            let rank = ctx.ngens() - ctx.nbase();
            let v = json!({
                "boundary": terms_json(&action.boundary),
                "bulk": terms_json(&action.bulk),
                "fields": { "X": ctx.nbase(), "A": rank / 2 },
            });
            serde_json::to_string_pretty(&v).expect("json values serialize")
        }
    }
}

fn parse_terms(ctx: &Arc<GradedContext>, v: &Value) -> Result<GradedElement> {
    let bad = |m: &str| Error::InvalidInput(format!("action json: {m}"));
    let arr = v.as_array().ok_or_else(|| bad("term list expected"))?;
    let n = ctx.nbase();
    let mut out = GradedElement::zero(ctx);
    for t in arr {
        let pair = t.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("term must be [coefficient, monomial]"))?;
        let c = pair[0].as_str().and_then(parse_q).ok_or_else(|| bad("coefficient must be a p/q string"))?;
        let text = pair[1].as_str().ok_or_else(|| bad("monomial must be a string"))?;
        let mut ex = vec![0u32; n];
        let mut m: GenMono = vec![0; ctx.ngens()];
        for tok in text.split_whitespace() {
            let (name, pow) = match tok.split_once('^') {
                Some((a, b)) => (a, b.parse::<u32>().map_err(|_| bad("bad exponent"))?),
                None => (tok, 1),
            };
            if let Ok(i) = ctx.base_index(name) {
                ex[i] += pow;
            } else {
                m[ctx.gen_index(name)?] += pow;
            }
        }
        out = out.add(&GradedElement::term(ctx, Poly::monomial(n, ex, c), m));
    }
    Ok(out)
}

/// Reads the JSON produced by [`emit`].
pub fn read_action_json(text: &str) -> Result<ActionExpression> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let field = |k: &str| v["fields"][k].as_u64().map(|x| x as usize);
    let (n, r) = match (field("X"), field("A")) {
        (Some(n), Some(r)) => (n, r),
        _ => return Err(Error::InvalidInput("action json: missing field counts".into())),
    };
    let ws = GradedContext::worldsheet(n, r);
    Ok(ActionExpression { boundary: parse_terms(&ws, &v["boundary"])?, bulk: parse_terms(&ws, &v["bulk"])? })
}

/// Components `Π^{ij}A_iA_j`-style: the `A`-bilinear part of a boundary
/// integrand as an antisymmetric matrix with polynomial entries.
pub fn a_bilinear_part(b: &GradedElement) -> BTreeMap<(usize, usize), Poly> {
    let ctx = b.ctx();
    let n = ctx.nbase();
    let rank = (ctx.ngens() - n) / 2;
    let mut out = BTreeMap::new();
    for (m, c) in b.terms() {
        let idx: Vec<usize> = (0..rank).filter(|&a| m[ws_a(a)] == 1).collect();
        if idx.len() == 2 && m.iter().sum::<u32>() == 2 {
            out.insert((idx[0], idx[1]), c.clone());
        }
    }
    out
}
