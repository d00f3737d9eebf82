//! Generalized geometry on `TM ⊕ T*M` with polynomial coefficients.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::cartan::{exterior_d, three_form, SymTensor2, ThreeTensor, VectorField};
use crate::error::{Error, Result};
use crate::graded::GradedContext;
use crate::linalg::{invert_dense, rank, LinearSystem, PolyMatrix, SparseRow};
use crate::poly::{monomials_up_to, q, Poly, Q};
use crate::status::Status;

/// Section `(v, α)` of `TM ⊕ T*M`; `alpha[i]` is the `dx^i` component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedSection {
    pub v: VectorField,
    pub alpha: Vec<Poly>,
}

impl GeneralizedSection {
    pub fn new(v: VectorField, alpha: Vec<Poly>) -> Self {
        assert_eq!(v.dim(), alpha.len());
        GeneralizedSection { v, alpha }
    }

    pub fn zero(n: usize) -> Self {
        GeneralizedSection {
            v: VectorField::zero(n),
            alpha: vec![Poly::zero(n); n],
        }
    }

    pub fn vector(v: VectorField) -> Self {
        let n = v.dim();
        GeneralizedSection {
            v,
            alpha: vec![Poly::zero(n); n],
        }
    }

    pub fn form(alpha: Vec<Poly>) -> Self {
        let n = alpha.len();
        GeneralizedSection {
            v: VectorField::zero(n),
            alpha,
        }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero() && self.alpha.iter().all(|p| p.is_zero())
    }

    /// The `2n` scalar components: vector part first, then form part.
    pub fn components(&self) -> Vec<Poly> {
        self.v
            .components()
            .iter()
            .chain(&self.alpha)
            .cloned()
            .collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        GeneralizedSection {
            v: self.v.add(&o.v),
            alpha: self.alpha.iter().zip(&o.alpha).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        GeneralizedSection {
            v: self.v.scale(c),
            alpha: self.alpha.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn scale_poly(&self, f: &Poly) -> Self {
        GeneralizedSection {
            v: self.v.scale_poly(f),
            alpha: self.alpha.iter().map(|p| p * f).collect(),
        }
    }

    pub fn degree(&self) -> u32 {
        self.components().iter().filter_map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn eval(&self, point: &[Q]) -> Vec<Q> {
        self.components().iter().map(|p| p.eval(point)).collect()
    }

    pub fn render(&self, names: &[String]) -> String {
        let form: Vec<String> = self
            .alpha
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("({})*d{}", c.render(names), names[i]))
            .collect();
        let form = if form.is_empty() { "0".to_string() } else { form.join(" + ") };
        format!("({}, {})", self.v.render(names), form)
    }
}

/// `α(w) + β(v)`.
pub fn pairing(s1: &GeneralizedSection, s2: &GeneralizedSection) -> Poly {
    let n = s1.dim();
    let mut acc = Poly::zero(n);
    for i in 0..n {
        acc.add_assign_ref(&(&s1.alpha[i] * s2.v.component(i)));
        acc.add_assign_ref(&(&s2.alpha[i] * s1.v.component(i)));
    }
    acc
}

/// Bivector `Π = ½ Π^{ij} ∂_i ∧ ∂_j` with antisymmetric `Π^{ij}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bivector {
    rows: Vec<Vec<Poly>>,
}

impl Bivector {
    pub fn new(rows: Vec<Vec<Poly>>) -> Result<Self> {
        let n = rows.len();
        for i in 0..n {
            if rows[i].len() != n {
                return Err(Error::InvalidInput("bivector matrix must be square".into()));
            }
            for j in 0..=i {
                if rows[i][j] != -&rows[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "bivector is not antisymmetric at ({}, {})",
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(Bivector { rows })
    }

    pub fn zero(n: usize) -> Self {
        Bivector {
            rows: vec![vec![Poly::zero(n); n]; n],
        }
    }

    /// Builds `Π` from upper entries `Π^{ij}` (0-based, `i != j`).
    pub fn from_entries(n: usize, entries: &[((usize, usize), Poly)]) -> Result<Self> {
        let mut b = Self::zero(n);
        for ((i, j), p) in entries {
            if i == j || *i >= n || *j >= n {
                return Err(Error::InvalidInput(format!("bad bivector index ({}, {})", i + 1, j + 1)));
            }
            b.rows[*i][*j] = p.clone();
            b.rows[*j][*i] = -p;
        }
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.rows[i][j]
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(|p| p.is_zero())
    }

    pub fn degree(&self) -> u32 {
        self.rows.iter().flatten().filter_map(|p| p.degree()).max().unwrap_or(0)
    }

    /// `(Π♯α)^j = α_i Π^{ij}`.
    pub fn sharp(&self, alpha: &[Poly]) -> VectorField {
        let n = self.dim();
        let comps = (0..n)
            .map(|j| {
                let mut acc = Poly::zero(n);
                for (i, a) in alpha.iter().enumerate() {
                    if !a.is_zero() && !self.rows[i][j].is_zero() {
                        acc.add_assign_ref(&(a * &self.rows[i][j]));
                    }
                }
                acc
            })
            .collect();
        VectorField::new(comps)
    }

    /// Matrix of the map `Π♯` acting on component columns: entry `(j,i)` is `Π^{ij}`.
    pub fn sharp_matrix(&self) -> PolyMatrix {
        PolyMatrix::from_rows(self.dim(), self.rows.clone()).transpose()
    }

    pub fn ordered_entries(&self) -> Vec<((usize, usize), Poly)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if !self.rows[i][j].is_zero() {
                    out.push(((i, j), self.rows[i][j].clone()));
                }
            }
        }
        out
    }
}

/// Errors unless `dH = 0`.
pub fn check_closed(h: &ThreeTensor) -> Result<()> {
    let n = h.dim();
    if n < 4 || h.is_zero() {
        return Ok(());
    }
    let ctx = de_rham_ctx(n);
    let dh = exterior_d(&three_form(&ctx, h)?)?;
    if dh.is_zero() {
        Ok(())
    } else {
        Err(Error::NotClosed(dh.render()))
    }
}

pub(crate) fn de_rham_ctx(n: usize) -> Arc<GradedContext> {
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    GradedContext::de_rham(&names)
}

/// Form part of the Dorfman bracket, in components.
fn dorfman_form(s1: &GeneralizedSection, s2: &GeneralizedSection, h: &ThreeTensor) -> Vec<Poly> {
    let n = s1.dim();
    let (v, a) = (&s1.v, &s1.alpha);
    let (w, b) = (&s2.v, &s2.alpha);
    (0..n)
        .map(|i| {
            // ℒ_v β
            let mut acc = v.apply(&b[i]);
            for j in 0..n {
                if !b[j].is_zero() {
                    let dv = v.component(j).derivative(i);
                    if !dv.is_zero() {
                        acc.add_assign_ref(&(&b[j] * &dv));
                    }
                }
            }
            // - ι_w dα
            for j in 0..n {
                if w.component(j).is_zero() {
                    continue;
                }
                let da = &a[i].derivative(j) - &a[j].derivative(i);
                if !da.is_zero() {
                    acc.add_assign_ref(&-(w.component(j) * &da));
                }
            }
            // ι_w ι_v H
            for l in 0..n {
                if v.component(l).is_zero() {
                    continue;
                }
                for m in 0..n {
                    let hc = h.get(l, m, i);
                    if hc.is_zero() || w.component(m).is_zero() {
                        continue;
                    }
                    acc.add_assign_ref(&(&(v.component(l) * w.component(m)) * hc));
                }
            }
            acc
        })
        .collect()
}

pub(crate) fn dorfman_unchecked(
    s1: &GeneralizedSection,
    s2: &GeneralizedSection,
    h: &ThreeTensor,
) -> GeneralizedSection {
    GeneralizedSection {
        v: s1.v.bracket(&s2.v),
        alpha: dorfman_form(s1, s2, h),
    }
}

/// `([v,w], ℒ_v β − ι_w dα + ι_w ι_v H)`.
pub fn dorfman(s1: &GeneralizedSection, s2: &GeneralizedSection, h: &ThreeTensor) -> Result<GeneralizedSection> {
    check_closed(h)?;
    Ok(dorfman_unchecked(s1, s2, h))
}

/// Components of `½[Π,Π]`.
pub fn schouten_half_bracket(pi: &Bivector) -> ThreeTensor {
    let n = pi.dim();
    let mut t = ThreeTensor::zero(n);
    let term = |i: usize, j: usize, k: usize| {
        let mut acc = Poly::zero(n);
        for l in 0..n {
            let a = pi.get(i, l);
            if a.is_zero() {
                continue;
            }
            let d = pi.get(j, k).derivative(l);
            if !d.is_zero() {
                acc.add_assign_ref(&(a * &d));
            }
        }
        acc
    };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = &(&term(i, j, k) + &term(j, k, i)) + &term(k, i, j);
                t.set(i, j, k, v);
            }
        }
    }
    t
}

/// `H` contracted with three copies of the anchor of the graph of `Π`:
/// `Π^{li} Π^{mj} Π^{nk} H_{lmn}`.
pub fn h_pi_cubed(pi: &Bivector, h: &ThreeTensor) -> ThreeTensor {
    let n = pi.dim();
    let mut t = ThreeTensor::zero(n);
    if h.is_zero() {
        return t;
    }
    // first contract one index at a time
    let mut a = ThreeTensor::zero(n); // a[i][m][nn] = Π^{li} H_{l m nn}
    for i in 0..n {
        for m in 0..n {
            for nn in 0..n {
                let mut acc = Poly::zero(n);
                for l in 0..n {
                    let p = pi.get(l, i);
                    let hv = h.get(l, m, nn);
                    if !p.is_zero() && !hv.is_zero() {
                        acc.add_assign_ref(&(p * hv));
                    }
                }
                a.set(i, m, nn, acc);
            }
        }
    }
    let mut b = ThreeTensor::zero(n); // b[i][j][nn] = Π^{mj} a[i][m][nn]
    for i in 0..n {
        for j in 0..n {
            for nn in 0..n {
                let mut acc = Poly::zero(n);
                for m in 0..n {
                    let p = pi.get(m, j);
                    let av = a.get(i, m, nn);
                    if !p.is_zero() && !av.is_zero() {
                        acc.add_assign_ref(&(p * av));
                    }
                }
                b.set(i, j, nn, acc);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = Poly::zero(n);
                for nn in 0..n {
                    let p = pi.get(nn, k);
                    let bv = b.get(i, j, nn);
                    if !p.is_zero() && !bv.is_zero() {
                        acc.add_assign_ref(&(p * bv));
                    }
                }
                t.set(i, j, k, acc);
            }
        }
    }
    t
}

#[derive(Debug, Clone)]
pub struct TwistedPoissonReport {
    pub status: Status,
    /// `½[Π,Π] − Π^{li}Π^{mj}Π^{nk}H_{lmn}`.
    pub residual: ThreeTensor,
}

pub fn twisted_poisson_check(pi: &Bivector, h: &ThreeTensor) -> Result<TwistedPoissonReport> {
    check_closed(h)?;
    let residual = schouten_half_bracket(pi).sub(&h_pi_cubed(pi, h));
    Ok(TwistedPoissonReport {
        status: Status::from_bool(residual.is_zero()),
        residual,
    })
}

/// `n` sections spanning a candidate Dirac structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiracFrame {
    sections: Vec<GeneralizedSection>,
}

impl DiracFrame {
    pub fn new(sections: Vec<GeneralizedSection>) -> Result<Self> {
        let n = sections.len();
        if sections.iter().any(|s| s.dim() != n) {
            return Err(Error::InvalidInput(format!(
                "a frame on an {n}-dimensional base needs {n} sections"
            )));
        }
        Ok(DiracFrame { sections })
    }

    pub fn dim(&self) -> usize {
        self.sections.len()
    }

    pub fn sections(&self) -> &[GeneralizedSection] {
        &self.sections
    }

    pub fn section(&self, a: usize) -> &GeneralizedSection {
        &self.sections[a]
    }

    pub fn degree(&self) -> u32 {
        self.sections.iter().map(|s| s.degree()).max().unwrap_or(0)
    }

    /// Rank of the frame at a point.
    pub fn rank_at(&self, point: &[Q]) -> usize {
        let rows: Vec<Vec<Q>> = self.sections.iter().map(|s| s.eval(point)).collect();
        rank(&rows)
    }

    /// The anchor `ρ^i_a`, i.e. the vector parts.
    pub fn anchor(&self) -> Vec<VectorField> {
        self.sections.iter().map(|s| s.v.clone()).collect()
    }
}

pub fn graph_of_bivector(pi: &Bivector) -> DiracFrame {
    let n = pi.dim();
    let sections = (0..n)
        .map(|a| {
            let mut alpha = vec![Poly::zero(n); n];
            alpha[a] = Poly::one(n);
            GeneralizedSection::new(pi.sharp(&alpha), alpha)
        })
        .collect();
    DiracFrame { sections }
}

/// Deterministic sample points with small rational coordinates.
pub(crate) fn probe_points(n: usize, count: usize) -> Vec<Vec<Q>> {
    (0..count)
        .map(|k| {
            (0..n)
                .map(|i| {
                    let num = ((k as i64 + 2) * (i as i64 + 3) * 7 + 3 * i as i64) % 23 - 11;
                    q(num, (k as i64 % 5) + 2 + i as i64 % 3)
                })
                .collect()
        })
        .collect()
}

/// Solves `s = f^a e_a` for polynomials `f^a` of degree at most `deg`.
pub fn decompose_at_degree(frame: &DiracFrame, s: &GeneralizedSection, deg: u32) -> Option<Vec<Poly>> {
    let n = frame.dim();
    let monos = monomials_up_to(n, deg);
    let nm = monos.len();
    let frame_comps: Vec<Vec<Poly>> = frame.sections.iter().map(|e| e.components()).collect();
    let target = s.components();
    let mut eqs: BTreeMap<(usize, Vec<u32>), SparseRow> = BTreeMap::new();
    for (a, comps) in frame_comps.iter().enumerate() {
        for (r, p) in comps.iter().enumerate() {
            for (exps, c) in p.terms() {
                for (mi, m) in monos.iter().enumerate() {
                    let e: Vec<u32> = exps.iter().zip(m).map(|(x, y)| x + y).collect();
                    let row = eqs.entry((r, e)).or_default();
                    let col = a * nm + mi;
                    let entry = row.entry(col).or_insert_with(Q::zero);
                    *entry += c;
                }
            }
        }
    }
    let mut rhs: BTreeMap<(usize, Vec<u32>), Q> = BTreeMap::new();
    for (r, p) in target.iter().enumerate() {
        for (exps, c) in p.terms() {
            rhs.insert((r, exps.clone()), c.clone());
            eqs.entry((r, exps.clone())).or_default();
        }
    }
    let mut sys = LinearSystem::new(n * nm);
    for (key, row) in eqs {
        let b = rhs.get(&key).cloned().unwrap_or_else(Q::zero);
        sys.push(row, b);
    }
    let sol = sys.solve();
    let x = sol.particular?;
    Some(
        (0..n)
            .map(|a| {
                Poly::from_terms(
                    n,
                    monos.iter().enumerate().map(|(mi, m)| (m.clone(), x[a * nm + mi].clone())),
                )
            })
            .collect(),
    )
}

/// Outcome of decomposing a section in a frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decomposition {
    Found(Vec<Poly>),
    /// The section leaves the span at the given point.
    NotInSpan(Vec<Q>),
    /// No polynomial coefficients up to the bound, yet pointwise in the span.
    Inconclusive,
}

pub fn decompose(frame: &DiracFrame, s: &GeneralizedSection, max_deg: u32) -> Decomposition {
    if s.is_zero() {
        return Decomposition::Found(vec![Poly::zero(frame.dim()); frame.dim()]);
    }
    if let Some(p) = pointwise_escape(frame, s) {
        return Decomposition::NotInSpan(p);
    }
    for d in 0..=max_deg {
        if let Some(f) = decompose_at_degree(frame, s, d) {
            return Decomposition::Found(f);
        }
    }
    Decomposition::Inconclusive
}

fn pointwise_escape(frame: &DiracFrame, s: &GeneralizedSection) -> Option<Vec<Q>> {
    for p in probe_points(frame.dim(), 6) {
        let mut rows: Vec<Vec<Q>> = frame.sections.iter().map(|e| e.eval(&p)).collect();
        let r0 = rank(&rows);
        rows.push(s.eval(&p));
        if rank(&rows) > r0 {
            return Some(p);
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct DiracReport {
    pub status: Status,
    /// Nonzero pairings `⟨e_a, e_b⟩`, `a <= b`.
    pub isotropy_residuals: Vec<((usize, usize), Poly)>,
    /// `structure[a][b][c] = f^c_{ab}` with `[e_a, e_b] = f^c_{ab} e_c`, when closure holds.
    pub structure: Option<Vec<Vec<Vec<Poly>>>>,
    pub witness: Option<String>,
}

/// Extra coefficient degree allowed when solving for structure functions.
pub const CLOSURE_DEGREE_SLACK: u32 = 4;

pub fn is_dirac(frame: &DiracFrame, h: &ThreeTensor) -> Result<DiracReport> {
    check_closed(h)?;
    let n = frame.dim();
    let origin = vec![Q::zero(); n];
    let r = frame.rank_at(&origin);
    if r < n {
        return Err(Error::RankDeficient(format!("rank {r} < {n} at the origin")));
    }
    let mut iso = Vec::new();
    for a in 0..n {
        for b in a..n {
            let p = pairing(&frame.sections[a], &frame.sections[b]);
            if !p.is_zero() {
                iso.push(((a, b), p));
            }
        }
    }
    if !iso.is_empty() {
        let ((a, b), _) = &iso[0];
        return Ok(DiracReport {
            status: Status::Fail,
            witness: Some(format!("pairing of e{} and e{} is nonzero", a + 1, b + 1)),
            isotropy_residuals: iso,
            structure: None,
        });
    }
    let h_deg = h.entries().iter().filter_map(|p| p.degree()).max().unwrap_or(0);
    let bound = frame.degree().max(h_deg) + CLOSURE_DEGREE_SLACK;
    let zero = vec![Poly::zero(n); n];
    let mut structure = vec![vec![zero; n]; n];
    let mut inconclusive = None;
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let br = dorfman_unchecked(&frame.sections[a], &frame.sections[b], h);
            match decompose(frame, &br, bound) {
                Decomposition::Found(f) => structure[a][b] = f,
                Decomposition::NotInSpan(p) => {
                    let pt: Vec<String> = p.iter().map(crate::poly::q_to_string).collect();
                    return Ok(DiracReport {
                        status: Status::Fail,
                        isotropy_residuals: iso,
                        structure: None,
                        witness: Some(format!(
                            "bracket of e{} and e{} leaves the frame at ({})",
                            a + 1,
                            b + 1,
                            pt.join(", ")
                        )),
                    });
                }
                Decomposition::Inconclusive => {
                    inconclusive.get_or_insert((a, b));
                }
            }
        }
    }
    if let Some((a, b)) = inconclusive {
        return Ok(DiracReport {
            status: Status::Inconclusive,
            isotropy_residuals: iso,
            structure: None,
            witness: Some(format!(
                "no polynomial structure functions of degree <= {bound} for e{}, e{}",
                a + 1,
                b + 1
            )),
        });
    }
    Ok(DiracReport {
        status: Status::Pass,
        isotropy_residuals: iso,
        structure: Some(structure),
        witness: None,
    })
}

/// Orthogonal operator `O` with respect to a constant metric `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OOperator {
    o: PolyMatrix,
    g: SymTensor2,
}

fn constant_metric(g: &SymTensor2) -> Result<(Vec<Vec<Q>>, Vec<Vec<Q>>)> {
    let gm = g
        .constant_matrix()
        .ok_or_else(|| Error::InvalidInput("the auxiliary metric must be constant".into()))?;
    let gi = invert_dense(&gm).ok_or_else(|| Error::InvalidInput("metric is degenerate".into()))?;
    Ok((gm, gi))
}

impl OOperator {
    pub fn new(o: PolyMatrix, g: SymTensor2) -> Result<Self> {
        let (gm, _) = constant_metric(&g)?;
        if o.n() != g.dim() {
            return Err(Error::InvalidInput("operator and metric sizes differ".into()));
        }
        let gp = PolyMatrix::from_q(o.nvars(), &gm);
        if o.transpose().mul(&gp).mul(&o) != gp {
            return Err(Error::InvalidInput("operator is not orthogonal for the metric".into()));
        }
        Ok(OOperator { o, g })
    }

    pub fn matrix(&self) -> &PolyMatrix {
        &self.o
    }

    pub fn metric(&self) -> &SymTensor2 {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.o.n()
    }

    /// `O^{-1} = g^{-1} Oᵀ g`.
    pub fn inverse(&self) -> PolyMatrix {
        let (gm, gi) = constant_metric(&self.g).expect("validated metric");
        let nv = self.o.nvars();
        PolyMatrix::from_q(nv, &gi)
            .mul(&self.o.transpose())
            .mul(&PolyMatrix::from_q(nv, &gm))
    }
}

/// Frame `e_j = ((1 − O)∂_j, g(1 + O)∂_j)`.
pub fn dirac_from_o(o: &OOperator) -> DiracFrame {
    let n = o.dim();
    let id = PolyMatrix::identity(n, n);
    let minus = id.sub(o.matrix());
    let plus = id.add(o.matrix());
    let g = PolyMatrix::from_rows(n, o.metric().rows().to_vec());
    let gplus = g.mul(&plus);
    let sections = (0..n)
        .map(|j| {
            let v = VectorField::new((0..n).map(|i| minus.get(i, j).clone()).collect());
            let alpha = (0..n).map(|i| gplus.get(i, j).clone()).collect();
            GeneralizedSection::new(v, alpha)
        })
        .collect();
    DiracFrame { sections }
}

/// Inverse of [`dirac_from_o`]: solves `v = (1−O)w`, `g^{-1}α = (1+O)w`
/// for each section. Needs the `w` matrix to have a constant determinant.
pub fn o_from_dirac(frame: &DiracFrame, g: &SymTensor2) -> Result<OOperator> {
    let n = frame.dim();
    let (_, gi) = constant_metric(g)?;
    let gi = PolyMatrix::from_q(n, &gi);
    let half = q(1, 2);
    let mut w = PolyMatrix::zero(n, n);
    let mut u = PolyMatrix::zero(n, n);
    for (a, s) in frame.sections.iter().enumerate() {
        let ga = gi.apply(&s.alpha);
        for i in 0..n {
            w.set(i, a, (s.v.component(i) + &ga[i]).scale(&half));
            u.set(i, a, (&ga[i] - s.v.component(i)).scale(&half));
        }
    }
    let winv = w.inverse_polynomial().ok_or_else(|| {
        Error::NonPolynomial("the frame's projection to E+ has no polynomial inverse".into())
    })?;
    OOperator::new(u.mul(&winv), g.clone())
}

/// Whether every section of `b` lies in the polynomial span of `a`.
pub fn same_span(a: &DiracFrame, b: &DiracFrame, max_deg: u32) -> bool {
    b.sections
        .iter()
        .all(|s| matches!(decompose(a, s, max_deg), Decomposition::Found(_)))
        && a.sections
            .iter()
            .all(|s| matches!(decompose(b, s, max_deg), Decomposition::Found(_)))
}

#[derive(Debug, Clone)]
pub struct GjacReport {
    pub status: Status,
    /// Residual tensor multiplied through by the fourth power of the common
    /// denominator of `O` (the denominator is 1 for polynomial `O`).
    pub residual: ThreeTensor,
    pub denominator: Poly,
}

/// Sign in front of `½H` on the right-hand side of the integrability condition.
pub const GJAC_H_SIGN: i64 = 1;

/// `O = Ō/δ` with polynomial `Ō` and scalar `δ`.
fn gjac_residual(obar: &PolyMatrix, delta: &Poly, g: &[Vec<Q>], h: &ThreeTensor) -> ThreeTensor {
    let n = obar.n();
    let nv = obar.nvars();
    let gp = PolyMatrix::from_q(nv, g);
    // ū_a = δ e_a − Ō e_a, column a of (δ − Ō)
    let mut ubar = PolyMatrix::zero(nv, n);
    for i in 0..n {
        for j in 0..n {
            let d = if i == j { delta.clone() } else { Poly::zero(nv) };
            ubar.set(i, j, &d - obar.get(i, j));
        }
    }
    let dob: Vec<PolyMatrix> = (0..n).map(|k| obar.derivative(k)).collect();
    let ddelta: Vec<Poly> = (0..n).map(|k| delta.derivative(k)).collect();
    // δ∂_kŌ − Ō∂_kδ
    let jet: Vec<PolyMatrix> = (0..n)
        .map(|k| {
            let mut m = PolyMatrix::zero(nv, n);
            for i in 0..n {
                for j in 0..n {
                    m.set(i, j, &(delta * dob[k].get(i, j)) - &(obar.get(i, j) * &ddelta[k]));
                }
            }
            m
        })
        .collect();
    let otg = obar.transpose().mul(&gp);
    let terms: Vec<PolyMatrix> = (0..n)
        .map(|a| {
            let mut da = PolyMatrix::zero(nv, n);
            for k in 0..n {
                let c = ubar.get(k, a);
                if c.is_zero() {
                    continue;
                }
                for i in 0..n {
                    for j in 0..n {
                        let t = c * jet[k].get(i, j);
                        let cur = da.get(i, j) + &t;
                        da.set(i, j, cur);
                    }
                }
            }
            otg.mul(&da)
        })
        .collect();
    let half = q(GJAC_H_SIGN, 2);
    let mut out = ThreeTensor::zero(nv);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let lhs = &(terms[a].get(c, b) + terms[b].get(a, c)) + terms[c].get(b, a);
                let mut hv = Poly::zero(nv);
                if !h.is_zero() {
                    for l in 0..n {
                        for m in 0..n {
                            for p in 0..n {
                                let hc = h.get(l, m, p);
                                if hc.is_zero() {
                                    continue;
                                }
                                let f = &(ubar.get(l, a) * ubar.get(m, b)) * ubar.get(p, c);
                                hv.add_assign_ref(&(&f * hc));
                            }
                        }
                    }
                    hv = (&hv * delta).scale(&half);
                }
                out.set(a, b, c, &lhs - &hv);
            }
        }
    }
    out
}

/// Twisted Jacobi-type integrability condition for a polynomial orthogonal `O`.
pub fn gjac_check(o: &OOperator, h: &ThreeTensor) -> Result<GjacReport> {
    check_closed(h)?;
    let (gm, _) = constant_metric(o.metric())?;
    let nv = o.matrix().nvars();
    let delta = Poly::one(nv);
    let residual = gjac_residual(o.matrix(), &delta, &gm, h);
    Ok(GjacReport {
        status: Status::from_bool(residual.is_zero()),
        residual,
        denominator: delta,
    })
}

/// The same condition for the (rational) operator of the graph of `Π`,
/// `O = (g^{-1} − Π♯)(g^{-1} + Π♯)^{-1}`, with denominators cleared.
pub fn gjac_check_graph(pi: &Bivector, g: &SymTensor2, h: &ThreeTensor) -> Result<GjacReport> {
    check_closed(h)?;
    let (gm, gi) = constant_metric(g)?;
    let n = pi.dim();
    let p = pi.sharp_matrix();
    let gi = PolyMatrix::from_q(n, &gi);
    let m = gi.add(&p);
    let delta = m.det();
    if delta.is_zero() {
        return Err(Error::RankDeficient("g^{-1} + Π is singular".into()));
    }
    let obar = gi.sub(&p).mul(&m.adjugate());
    let residual = gjac_residual(&obar, &delta, &gm, h);
    Ok(GjacReport {
        status: Status::from_bool(residual.is_zero()),
        residual,
        denominator: delta,
    })
}
