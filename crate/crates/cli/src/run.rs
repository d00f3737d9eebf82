//! Command dispatch over the pipeline.

use std::time::Instant;

use serde_json::{json, Value};

use gradgauge::cartan::{one_form, three_form, ThreeTensor};
use gradgauge::equivariant::{
    check_e_extension, check_standard_extension, input_degree, restrict_to_base, solve_extension,
    standard_extension, symmetry_set, ExtensionAnsatz, ExtensionReport, ExtensionStatus, SymmetryAlgebra,
};
use gradgauge::gauge::{chain_map_residual, dsm_assemble, emit, localize_boundary, pullback_f, Format};
use gradgauge::gengeo::{
    dorfman, gjac_check, gjac_check_graph, h_pi_cubed, is_dirac, pairing, schouten_half_bracket,
    twisted_poisson_check, DiracFrame, GeneralizedSection,
};
use gradgauge::qmanifold::{build_q, lift_qtilde, AlgebroidData, ExtendedSymmetry};
use gradgauge::status::Status;
use gradgauge::{GradedElement, Poly};

use crate::model::ModelSpec;
use crate::oracle::{oracle_pair, oracle_polys, oracle_sample, CONFIRM_SAMPLES, CONFIRM_SEED};
use crate::report::{self, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algebra {
    G,
    GTilde,
}

impl Algebra {
    fn core(self) -> SymmetryAlgebra {
        match self {
            Algebra::G => SymmetryAlgebra::G,
            Algebra::GTilde => SymmetryAlgebra::GTilde,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Algebra::G => "g",
            Algebra::GTilde => "gtilde",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    CheckPoisson,
    CheckDirac,
    CheckGjac,
    Symmetries { degree: Option<u32>, algebra: Algebra },
    Extend { degree: Option<u32>, algebra: Algebra, assert_orbit_nondegenerate: bool },
    Gauge { degree: Option<u32>, emit: Option<Format> },
    StandardExtend,
    Oracle { samples: usize, seed: u64 },
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::CheckPoisson => "check poisson".into(),
            Command::CheckDirac => "check dirac".into(),
            Command::CheckGjac => "check gjac".into(),
            Command::Symmetries { .. } => "symmetries".into(),
            Command::Extend { .. } => "extend".into(),
            Command::Gauge { .. } => "gauge".into(),
            Command::StandardExtend => "standard-extend".into(),
            Command::Oracle { .. } => "oracle".into(),
        }
    }
}

/// A report plus the emitted action text, for `gauge --emit`.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub emitted: Option<String>,
}

pub fn run(cmd: &Command, spec: &ModelSpec) -> Outcome {
    run_timed(cmd, spec, false)
}

pub fn run_timed(cmd: &Command, spec: &ModelSpec, timing: bool) -> Outcome {
    let start = Instant::now();
    let mut rep = Report::new(cmd.name(), spec.name.clone());
    let mut emitted = None;
    let res = match cmd {
        Command::CheckPoisson => check_poisson(spec, &mut rep),
        Command::CheckDirac => check_dirac(spec, &mut rep),
        Command::CheckGjac => check_gjac(spec, &mut rep),
        Command::Symmetries { degree, algebra } => symmetries(spec, degree.unwrap_or(spec.degree_or_default()), *algebra, &mut rep),
        Command::Extend { degree, algebra, assert_orbit_nondegenerate } => extend(
            spec,
            degree.unwrap_or(spec.degree_or_default()),
            *algebra,
            *assert_orbit_nondegenerate || spec.assert_orbit_nondegenerate,
            &mut rep,
        )
        .map(|_| ()),
        Command::Gauge { degree, emit } => {
            gauge(spec, degree.unwrap_or(spec.degree_or_default()), *emit, &mut rep).map(|t| emitted = t)
        }
        Command::StandardExtend => standard(spec, &mut rep),
        Command::Oracle { samples, seed } => oracle(spec, *samples, *seed, &mut rep),
    };
    if let Err(msg) = res {
        rep.status = "error".into();
        rep.set("error", msg);
        emitted = None;
    }
    if timing {
        rep.timing_ms = Some(start.elapsed().as_millis());
    }
    Outcome { report: rep, emitted }
}

type Res<T> = std::result::Result<T, String>;

fn core<T>(r: gradgauge::Result<T>) -> Res<T> {
    r.map_err(|e| e.to_string())
}

fn need_frame(spec: &ModelSpec) -> Res<DiracFrame> {
    core(spec.dirac_frame())?.ok_or_else(|| "the model declares no Dirac structure".to_string())
}

fn render_tensor(h: &ThreeTensor, names: &[String]) -> Vec<String> {
    h.ordered_entries()
        .iter()
        .map(|((i, j, k), p)| format!("({},{},{}): {}", i + 1, j + 1, k + 1, p.render(names)))
        .collect()
}

fn algebroid(spec: &ModelSpec, frame: &DiracFrame, h: &ThreeTensor) -> Res<AlgebroidData> {
    match &spec.bivector {
        Some((_, pi)) => core(AlgebroidData::cotangent(&spec.coords, pi, h)),
        None => core(AlgebroidData::from_dirac(&spec.coords, frame, h)),
    }
}

/// `(ι_v H)_{jk}` and `(dα)_{jk}` for `j<k`, evaluated separately.
fn theta_sides(s: &GeneralizedSection, h: &ThreeTensor) -> (Vec<Poly>, Vec<Poly>) {
    let n = s.dim();
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for j in 0..n {
        for k in j + 1..n {
            let mut l = Poly::zero(n);
            for i in 0..n {
                l = &l + &(s.v.component(i) * h.get(i, j, k));
            }
            lhs.push(l);
            rhs.push(&s.alpha[k].derivative(j) - &s.alpha[j].derivative(k));
        }
    }
    (lhs, rhs)
}

fn section_json(s: &GeneralizedSection, names: &[String]) -> Value {
    json!({
        "vector": s.v.components().iter().map(|p| p.render(names)).collect::<Vec<_>>(),
        "form": s.alpha.iter().map(|p| p.render(names)).collect::<Vec<_>>(),
    })
}

fn check_poisson(spec: &ModelSpec, rep: &mut Report) -> Res<()> {
    let (_, pi) = spec.bivector.as_ref().ok_or("check poisson needs a bivector")?;
    let h = spec.h();
    let r = core(twisted_poisson_check(pi, &h))?;
    rep.status = r.status.as_str().into();
    rep.residuals = render_tensor(&r.residual, &spec.coords);
    rep.set("twisted", !h.is_zero());
    if r.status.is_pass() {
        let lhs = schouten_half_bracket(pi);
        let rhs = h_pi_cubed(pi, &h);
        rep.confirm(
            CONFIRM_SAMPLES,
            CONFIRM_SEED,
            oracle_pair(spec.dim(), lhs.entries(), rhs.entries(), CONFIRM_SAMPLES, CONFIRM_SEED),
        );
    }
    Ok(())
}

fn check_dirac(spec: &ModelSpec, rep: &mut Report) -> Res<()> {
    let frame = need_frame(spec)?;
    let h = spec.h();
    let r = core(is_dirac(&frame, &h))?;
    rep.status = r.status.as_str().into();
    rep.residuals = r
        .isotropy_residuals
        .iter()
        .map(|((a, b), p)| format!("<e{}, e{}>: {}", a + 1, b + 1, p.render(&spec.coords)))
        .collect();
    if let Some(w) = &r.witness {
        rep.residuals.push(w.clone());
    }
    if let (Status::Pass, Some(f)) = (r.status, &r.structure) {
        let n = frame.dim();
        let mut polys = Vec::new();
        for a in 0..n {
            for b in 0..n {
                polys.push(pairing(frame.section(a), frame.section(b)));
                let mut diff = core(dorfman(frame.section(a), frame.section(b), &h))?;
                for (c, fc) in f[a][b].iter().enumerate() {
                    diff = diff.sub(&frame.section(c).scale_poly(fc));
                }
                polys.extend(diff.components());
            }
        }
        rep.set(
            "structure_functions",
            f.iter()
                .enumerate()
                .flat_map(|(a, fa)| {
                    fa.iter().enumerate().flat_map(move |(b, fab)| {
                        fab.iter().enumerate().filter(|(_, p)| !p.is_zero()).map(move |(c, p)| (a, b, c, p))
                    })
                })
                .map(|(a, b, c, p)| format!("f^{}_{{{}{}}} = {}", c + 1, a + 1, b + 1, p.render(&spec.coords)))
                .collect::<Vec<_>>(),
        );
        rep.confirm(CONFIRM_SAMPLES, CONFIRM_SEED, oracle_polys(n, &polys, CONFIRM_SAMPLES, CONFIRM_SEED));
    }
    Ok(())
}

fn check_gjac(spec: &ModelSpec, rep: &mut Report) -> Res<()> {
    let h = spec.h();
    let r = if let Some(o) = core(spec.o_operator())? {
        core(gjac_check(&o, &h))?
    } else if let Some((_, pi)) = &spec.bivector {
        core(gjac_check_graph(pi, &core(spec.metric_tensor())?, &h))?
    } else {
        return Err("check gjac needs an ooperator or a bivector".into());
    };
    rep.status = r.status.as_str().into();
    rep.residuals = render_tensor(&r.residual, &spec.coords);
    rep.set("denominator", r.denominator.render(&spec.coords));
    if r.status.is_pass() {
        rep.confirm(
            CONFIRM_SAMPLES,
            CONFIRM_SEED,
            oracle_polys(spec.dim(), r.residual.entries(), CONFIRM_SAMPLES, CONFIRM_SEED),
        );
    }
    Ok(())
}

fn symmetries(spec: &ModelSpec, degree: u32, algebra: Algebra, rep: &mut Report) -> Res<()> {
    let frame = need_frame(spec)?;
    let h = spec.h();
    let n = frame.dim();
    let set = core(symmetry_set(&frame, &h, degree, algebra.core()))?;
    let mut basis = Vec::new();
    let mut gammas = Vec::new();
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for m in &set {
        if m.eps.is_zero() {
            gammas.push(json!(m
                .gamma
                .iter()
                .map(|row| row.iter().map(|p| p.render(&spec.coords)).collect::<Vec<_>>())
                .collect::<Vec<_>>()));
            continue;
        }
        let mut s = GeneralizedSection::zero(n);
        for (a, c) in m.eps.comps.iter().enumerate() {
            s = s.add(&frame.section(a).scale_poly(c));
        }
        let (l, r) = theta_sides(&s, &h);
        lhs.extend(l);
        rhs.extend(r);
        let mut v = section_json(&s, &spec.coords);
        v["frame_coefficients"] = json!(m.eps.comps.iter().map(|p| p.render(&spec.coords)).collect::<Vec<_>>());
        basis.push(v);
    }
    rep.set("algebra", algebra.name());
    rep.set("degree", degree);
    rep.set("dimension", basis.len());
    rep.set("basis", basis);
    if algebra == Algebra::GTilde {
        rep.set("gamma_dimension", gammas.len());
        rep.set("gamma_basis", gammas);
    }
    rep.caveats.push(report::caveat_degree(degree));
    rep.confirm(CONFIRM_SAMPLES, CONFIRM_SEED, oracle_pair(n, &lhs, &rhs, CONFIRM_SAMPLES, CONFIRM_SEED));
    Ok(())
}

/// Oracle over the three extension conditions, recomputed from scratch.
fn confirm_extension(
    ht: &GradedElement,
    h: &ThreeTensor,
    e: &AlgebroidData,
    set: &[ExtendedSymmetry],
) -> Res<Status> {
    let mut ids = vec![restrict_to_base(e, ht).sub(&core(three_form(e.ctx(), h))?)];
    ids.push(core(core(lift_qtilde(&build_q(e)))?.apply(ht))?);
    for s in set {
        ids.push(core(core(s.to_derivation(e))?.apply(ht))?);
    }
    let ok = ids
        .iter()
        .enumerate()
        .all(|(k, id)| oracle_sample(id, CONFIRM_SAMPLES, CONFIRM_SEED + k as u64).is_pass());
    Ok(Status::from_bool(ok))
}

struct Extension {
    e: AlgebroidData,
    report: ExtensionReport,
}

fn extend(spec: &ModelSpec, degree: u32, algebra: Algebra, asserted: bool, rep: &mut Report) -> Res<Extension> {
    let frame = need_frame(spec)?;
    let h = spec.h();
    let e = algebroid(spec, &frame, &h)?;
    let set = core(symmetry_set(&frame, &h, degree, algebra.core()))?;
    let ansatz = ExtensionAnsatz::general(degree + input_degree(&e, &h));
    let r = core(solve_extension(&h, &e, &set, &ansatz))?;
    rep.status = r.status.as_str().into();
    rep.set("algebra", algebra.name());
    rep.set("degree", degree);
    rep.set("coefficient_degree", r.coefficient_degree);
    rep.set("dimension", r.dimension);
    rep.set("unknowns", r.unknowns);
    rep.set("symmetries", r.symmetries);
    rep.set("particular", r.particular.as_ref().map(|p| p.render()));
    rep.set("basis", r.basis.iter().map(|b| b.render()).collect::<Vec<_>>());
    rep.caveats.push(report::caveat_degree(degree));
    rep.caveats.push(report::caveat_symmetry_set(degree));
    rep.caveats.push(if asserted { report::CAVEAT_ORBIT_ASSERTED } else { report::CAVEAT_ORBIT_UNCHECKED }.into());
    rep.set("orbit_nondegenerate_asserted", asserted);
    if matches!(r.status, ExtensionStatus::Unique | ExtensionStatus::Family) {
        let p = r.particular.clone().expect("solved extension has a particular solution");
        let mut sym_ok = core(check_e_extension(&p, &h, &e, &set))?.status.is_pass();
        let mut st = confirm_extension(&p, &h, &e, &set)?;
        for b in &r.basis {
            // homogeneous directions satisfy the conditions with H = 0
            let zero = ThreeTensor::zero(spec.dim());
            sym_ok &= core(check_e_extension(b, &zero, &e, &set))?.status.is_pass();
            if st.is_pass() {
                st = confirm_extension(b, &zero, &e, &set)?;
            }
        }
        if !sym_ok {
            rep.status = "fail".into();
            rep.residuals.push("solver output does not satisfy the extension conditions".into());
        }
        rep.confirm(CONFIRM_SAMPLES, CONFIRM_SEED, st);
    }
    Ok(Extension { e, report: r })
}

fn gauge(spec: &ModelSpec, degree: u32, fmt: Option<Format>, rep: &mut Report) -> Res<Option<String>> {
    let h = spec.h();
    let format = fmt.unwrap_or(Format::Latex);
    if let Some(o) = core(spec.o_operator())? {
        let forms = core(dsm_assemble(&o, &h))?;
        rep.status = forms.status.as_str().into();
        rep.set("kind", "dirac sigma model");
        rep.set("convention", format!("{:?}", forms.convention).to_lowercase());
        rep.set("action", emit(&forms.metric_form, format));
        rep.set("topological_action", emit(&forms.topological_form, format));
        if !forms.residual.is_zero() {
            rep.residuals.push(forms.residual.render());
        } else {
            rep.confirm(CONFIRM_SAMPLES, CONFIRM_SEED, oracle_sample(&forms.residual, CONFIRM_SAMPLES, CONFIRM_SEED));
        }
        return Ok(fmt.filter(|_| forms.status.is_pass()).map(|f| emit(&forms.metric_form, f)));
    }
    let asserted = spec.assert_orbit_nondegenerate;
    let ext = extend(spec, degree, Algebra::GTilde, asserted, rep)?;
    if ext.report.status != ExtensionStatus::Unique || rep.status != "unique" {
        return Ok(None);
    }
    let ht = ext.report.particular.expect("unique extension");
    let pulled = core(pullback_f(&ht, &ext.e))?;
    let action = core(localize_boundary(&pulled, &h))?;
    rep.set("kind", "sigma model");
    rep.set("action", emit(&action, format));
    let id1 = core(action.total())?.sub(&pulled);
    let id2 = core(chain_map_residual(&ht, &ext.e))?;
    let ok = oracle_sample(&id1, CONFIRM_SAMPLES, CONFIRM_SEED).is_pass()
        && oracle_sample(&id2, CONFIRM_SAMPLES, CONFIRM_SEED + 1).is_pass()
        && id1.is_zero()
        && id2.is_zero();
    rep.confirm(CONFIRM_SAMPLES, CONFIRM_SEED, Status::from_bool(ok));
    Ok(fmt.map(|f| emit(&action, f)))
}

fn standard(spec: &ModelSpec, rep: &mut Report) -> Res<()> {
    if spec.actions.is_empty() {
        return Err("standard-extend needs at least one action declaration".into());
    }
    let h = spec.h();
    let e = core(AlgebroidData::action(&spec.coords, &spec.action_fields()))?;
    let alphas = spec.action_forms();
    let r = core(check_standard_extension(&h, &alphas, &e))?;
    rep.status = r.status.as_str().into();
    let mut conds = serde_json::Map::new();
    for c in &r.conditions {
        conds.insert(c.name.clone(), json!(c.status.as_str()));
        rep.residuals.extend(c.residuals.iter().map(|x| format!("{}: {x}", c.name)));
    }
    rep.set("conditions", Value::Object(conds));
    rep.set("extension", core(standard_extension(&e, &h, &alphas))?.render());
    if r.status.is_pass() {
        let n = spec.dim();
        let ctx = e.ctx();
        let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
        let mut ids = Vec::new();
        for (a, v) in spec.action_fields().iter().enumerate() {
            let (l, r) = theta_sides(&GeneralizedSection::new(v.clone(), alphas[a].clone()), &h);
            lhs.extend(l);
            rhs.extend(r);
            for (b, w) in spec.action_fields().iter().enumerate() {
                let mut iso = Poly::zero(n);
                for i in 0..n {
                    iso = &iso + &(&(v.component(i) * &alphas[b][i]) + &(w.component(i) * &alphas[a][i]));
                }
                lhs.push(iso);
                rhs.push(Poly::zero(n));
                let mut eq = core(gradgauge::cartan::lie(v, &core(one_form(ctx, &alphas[b]))?))?;
                for (c, al) in alphas.iter().enumerate() {
                    eq = eq.sub(&core(one_form(ctx, al))?.scale_poly(e.c(c, a, b)));
                }
                ids.push(eq);
            }
        }
        let ok = oracle_pair(n, &lhs, &rhs, CONFIRM_SAMPLES, CONFIRM_SEED).is_pass()
            && ids.iter().all(|id| oracle_sample(id, CONFIRM_SAMPLES, CONFIRM_SEED).is_pass());
        rep.confirm(CONFIRM_SAMPLES, CONFIRM_SEED, Status::from_bool(ok));
    }
    Ok(())
}

/// Samples the defining identity of the model's structure.
fn oracle(spec: &ModelSpec, k: usize, seed: u64, rep: &mut Report) -> Res<()> {
    let n = spec.dim();
    let h = spec.h();
    let mut ids = serde_json::Map::new();
    if let Some((_, pi)) = &spec.bivector {
        let st = oracle_pair(n, schouten_half_bracket(pi).entries(), h_pi_cubed(pi, &h).entries(), k, seed);
        ids.insert("twisted_poisson".into(), json!(st.as_str()));
    }
    if let Some(o) = core(spec.o_operator())? {
        let r = core(gjac_check(&o, &h))?;
        ids.insert("gjac".into(), json!(oracle_polys(n, r.residual.entries(), k, seed).as_str()));
    }
    if let Some(frame) = core(spec.dirac_frame())? {
        let mut polys = Vec::new();
        for a in 0..n {
            for b in a..n {
                polys.push(pairing(frame.section(a), frame.section(b)));
            }
        }
        ids.insert("isotropy".into(), json!(oracle_polys(n, &polys, k, seed).as_str()));
    }
    if ids.is_empty() {
        return Err("the model declares nothing to sample".into());
    }
    let ok = ids.values().all(|v| v == "pass");
    rep.status = Status::from_bool(ok).as_str().into();
    rep.set("identities", Value::Object(ids));
    rep.set("samples", k);
    rep.set("seed", seed);
    Ok(())
}
