#![allow(dead_code)]

use std::sync::Arc;

use gradgauge::graded::{Derivation, GradedContext, GradedElement};
use gradgauge::poly::{monomials_up_to, q, Poly, Q};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

pub fn small_q(rng: &mut ChaCha8Rng) -> Q {
    q(rng.gen_range(-5..=5), rng.gen_range(1..=4))
}

pub fn random_poly(n: usize, max_deg: u32, terms: usize, rng: &mut ChaCha8Rng) -> Poly {
    let monos = monomials_up_to(n, max_deg);
    let mut p = Poly::zero(n);
    for _ in 0..terms {
        p.add_term(monos[rng.gen_range(0..monos.len())].clone(), small_q(rng));
    }
    p
}

/// Random element of total degree `deg` (zero when nothing has that degree).
pub fn random_homogeneous(ctx: &Arc<GradedContext>, deg: i32, rng: &mut ChaCha8Rng) -> GradedElement {
    let mut out = GradedElement::zero(ctx);
    if deg < 0 {
        return out;
    }
    let monos = ctx.monomials_of_degree(deg as u32);
    if monos.is_empty() {
        return out;
    }
    for _ in 0..rng.gen_range(1..=3) {
        let m = monos[rng.gen_range(0..monos.len())].clone();
        out.add_term(m, random_poly(ctx.nbase(), 2, 2, rng));
    }
    out
}

/// Random element mixing total degrees 0..=3.
pub fn random_mixed(ctx: &Arc<GradedContext>, rng: &mut ChaCha8Rng) -> GradedElement {
    let mut out = GradedElement::zero(ctx);
    for d in 0..=3 {
        if rng.gen_bool(0.6) {
            out = out.add(&random_homogeneous(ctx, d, rng));
        }
    }
    out
}

pub fn random_derivation(ctx: &Arc<GradedContext>, degree: i32, rng: &mut ChaCha8Rng) -> Derivation {
    let base = (0..ctx.nbase()).map(|_| random_homogeneous(ctx, degree, rng)).collect();
    let gens = (0..ctx.ngens())
        .map(|k| random_homogeneous(ctx, degree + ctx.gen(k).degree() as i32, rng))
        .collect();
    Derivation::new(ctx, degree, base, gens).unwrap()
}

/// Numeric cross-check: every scalar coefficient vanishes at 20 random
/// rational points with denominators ≤ 97.
pub fn oracle_zero(e: &GradedElement, rng: &mut ChaCha8Rng) -> bool {
    let n = e.ctx().nbase();
    (0..20).all(|_| {
        let pt: Vec<Q> = (0..n).map(|_| q(rng.gen_range(-97..=97), rng.gen_range(1..=97))).collect();
        e.eval_coefficients(&pt).values().all(|v| *v == Q::from_integer(0.into()))
    })
}

pub fn shifted(n: usize, r: usize) -> Arc<GradedContext> {
    GradedContext::shifted_tangent(&names(n), r)
}

/// `g`-orthogonal constant operator: Cayley transform of a `g`-skew matrix,
/// times random sign flips, for a random positive diagonal `g`.
pub fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> gradgauge::gengeo::OOperator {
    use gradgauge::cartan::SymTensor2;
    use gradgauge::linalg::{invert_dense, mat_mul_q, PolyMatrix};
    use gradgauge::poly::qi;
    let zero = || Q::from_integer(0.into());
    let diag: Vec<Q> = (0..n).map(|_| q(rng.gen_range(1..=5), rng.gen_range(1..=3))).collect();
    let g: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| if i == j { diag[i].clone() } else { zero() }).collect()).collect();
    let ginv: Vec<Vec<Q>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { diag[i].recip() } else { zero() }).collect())
        .collect();
    let mut k = vec![vec![zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = q(rng.gen_range(-4..=4), rng.gen_range(1..=4));
            k[i][j] = v.clone();
            k[j][i] = -v;
        }
    }
    let a = mat_mul_q(&ginv, &k);
    let delta = |i: usize, j: usize| if i == j { qi(1) } else { zero() };
    let minus: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| delta(i, j) - &a[i][j]).collect()).collect();
    let plus: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| delta(i, j) + &a[i][j]).collect()).collect();
    let mut o = mat_mul_q(&minus, &invert_dense(&plus).unwrap());
    for i in 0..n {
        if rng.gen_bool(0.3) {
            for row in o.iter_mut() {
                row[i] = -row[i].clone();
            }
        }
    }
    gradgauge::gengeo::OOperator::new(PolyMatrix::from_q(n, &o), SymTensor2::from_q(&g).unwrap()).unwrap()
}
