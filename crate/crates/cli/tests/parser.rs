use gradgauge::cartan::ThreeTensor;
use gradgauge::gengeo::Bivector;
use gradgauge::poly::{monomials_up_to, q};
use gradgauge::Poly;
use gradgauge_cli::{parse, ModelSpec, ParseError};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const R4: &str = include_str!("../../../models/r4_twisted.gg");

fn err(text: &str) -> ParseError {
    parse(text).expect_err("should not parse")
}

fn x(i: usize) -> Poly {
    Poly::var(4, i)
}

#[test]
fn r4_file() {
    let spec = parse(R4).unwrap();
    assert_eq!(spec.name, "R4");
    assert_eq!(spec.coords, ["x1", "x2", "x3", "x4"]);
    let (name, pi) = spec.bivector.clone().unwrap();
    assert_eq!(name, "P");
    let expect = Bivector::from_entries(4, &[((0, 1), Poly::one(4)), ((2, 3), Poly::one(4)), ((1, 2), &x(0) * &x(1))]).unwrap();
    assert_eq!(pi, expect);
    let mut h = ThreeTensor::zero(4);
    h.set_antisymmetric(0, 1, 3, -x(0));
    assert_eq!(spec.h(), h);
    assert_eq!(spec.degree, Some(2));
}

#[test]
fn diagonal_bivector_entry() {
    let e = err("manifold M dim 2 coords x1 x2;\nbivector P { (1,1): 1 };");
    assert_eq!(e.message, "diagonal entry violates antisymmetry");
    assert_eq!((e.line, e.col), (2, 14));
}

#[test]
fn empty_file() {
    assert_eq!(err("").message, "missing manifold declaration");
    assert_eq!(err("  # only a comment\n\n").message, "missing manifold declaration");
}

#[test]
fn syntax_error_position() {
    let e = err("manifold M dim 2 coords x1 x2;\nbivector P { (1,2) 1 };");
    assert_eq!((e.line, e.col), (2, 20));
    assert!(e.message.contains("expected ':'"), "{}", e.message);
}

#[test]
fn floats_rejected() {
    let e = err("manifold M dim 2 coords x1 x2;\nbivector P { (1,2): 0.5*x1 };");
    assert!(e.message.contains("floating point"), "{}", e.message);
    assert_eq!((e.line, e.col), (2, 21));
}

#[test]
fn non_polynomial_expressions() {
    let e = err("manifold M dim 2 coords x1 x2;\nbivector P { (1,2): 1/x1 };");
    assert!(e.message.contains("non-polynomial"), "{}", e.message);
    let e = err("manifold M dim 2 coords x1 x2;\nbivector P { (1,2): x1^-1 };");
    assert!(e.message.contains("non-polynomial"), "{}", e.message);
    let e = err("manifold M dim 2 coords x1 x2;\nbivector P { (1,2): 1/(x1 - x1 + 0) };");
    assert!(e.message.contains("division by zero"), "{}", e.message);
}

#[test]
fn rational_literals_and_constant_division() {
    let spec = parse("manifold M dim 2 coords x1 x2;\nbivector P { (1,2): -3/4*x1^2 + (x2 + 1)/2 };").unwrap();
    let (_, pi) = spec.bivector.unwrap();
    let x1 = Poly::var(2, 0);
    let x2 = Poly::var(2, 1);
    let expect = &(&x1 * &x1).scale(&q(-3, 4)) + &(&x2 + &Poly::one(2)).scale(&q(1, 2));
    assert_eq!(*pi.get(0, 1), expect);
}

#[test]
fn unknown_identifier() {
    let e = err("manifold M dim 2 coords x1 x2;\nbivector P { (1,2): y };");
    assert_eq!(e.message, "unknown coordinate 'y'");
    assert_eq!((e.line, e.col), (2, 21));
}

#[test]
fn index_out_of_range() {
    let e = err("manifold M dim 2 coords x1 x2;\nbivector P { (1,3): 1 };");
    assert!(e.message.contains("out of range"), "{}", e.message);
    let e = err("manifold M dim 3 coords x1 x2 x3;\nthreeform H { (0,1,2): 1 };");
    assert!(e.message.contains("out of range"), "{}", e.message);
}

#[test]
fn duplicate_components() {
    let e = err("manifold M dim 2 coords x1 x2;\nbivector P { (1,2): 1, (2,1): -1 };");
    assert!(e.message.contains("duplicate"), "{}", e.message);
    let e = err("manifold M dim 3 coords x1 x2 x3;\nthreeform H { (1,2,3): 1, (3,1,2): 1 };");
    assert!(e.message.contains("duplicate"), "{}", e.message);
    let e = err("manifold M dim 2 coords x1 x2;\nmetric { (1,2): 1, (2,1): 1 };");
    assert!(e.message.contains("duplicate"), "{}", e.message);
}

#[test]
fn lower_triangle_entry_flips_sign() {
    let a = parse("manifold M dim 2 coords x1 x2;\nbivector P { (2,1): x1 };").unwrap();
    let b = parse("manifold M dim 2 coords x1 x2;\nbivector P { (1,2): -x1 };").unwrap();
    assert_eq!(a, b);
    let a = parse("manifold M dim 3 coords x y z;\nthreeform H { (2,1,3): 1 };").unwrap();
    let b = parse("manifold M dim 3 coords x y z;\nthreeform H { (1,2,3): -1 };").unwrap();
    assert_eq!(a, b);
}

#[test]
fn one_dirac_structure_only() {
    let e = err("manifold M dim 2 coords x1 x2;\nbivector P { (1,2): 1 };\nooperator { (1,1): 1, (2,2): 1 };");
    assert_eq!(e.line, 3);
    assert!(e.message.contains("already defined"), "{}", e.message);
}

#[test]
fn dim_must_match_coordinates() {
    let e = err("manifold M dim 3 coords x1 x2;");
    assert!(e.message.contains("dim 3"), "{}", e.message);
}

#[test]
fn metric_identity_and_actions() {
    let spec = parse(
        "manifold M dim 2 coords a b;\nmetric identity;\naction r (-b, a | 0, 1/2);\nassert orbit_nondegenerate;",
    )
    .unwrap();
    assert_eq!(spec.metric.as_ref().unwrap()[1][1], Poly::one(2));
    assert!(spec.metric.as_ref().unwrap()[0][1].is_zero());
    assert_eq!(spec.actions.len(), 1);
    assert!(spec.assert_orbit_nondegenerate);
    assert!(err("manifold M dim 2 coords a b;\naction r (a | b);").message.contains("components"));
}

#[test]
fn models_directory_parses_and_round_trips() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let spec = parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(parse(&spec.render()).unwrap(), spec, "{}", path.display());
        count += 1;
    }
    assert!(count >= 5);
}

fn random_poly(n: usize, rng: &mut ChaCha8Rng) -> Poly {
    let monos = monomials_up_to(n, 3);
    let mut p = Poly::zero(n);
    for _ in 0..rng.gen_range(0..4) {
        p.add_term(monos[rng.gen_range(0..monos.len())].clone(), q(rng.gen_range(-9..=9), rng.gen_range(1..=7)));
    }
    p
}

fn random_spec(seed: u64) -> ModelSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=4);
    let coords: Vec<String> = (0..n).map(|i| format!("{}{}", ["x", "y", "u_"][i % 3], i)).collect();
    let mut spec = ModelSpec {
        name: format!("M{seed}"),
        coords,
        bivector: None,
        threeform: None,
        metric: None,
        ooperator: None,
        frame: None,
        actions: Vec::new(),
        degree: rng.gen_bool(0.5).then(|| rng.gen_range(0..5)),
        assert_orbit_nondegenerate: rng.gen_bool(0.5),
    };
    match rng.gen_range(0..4) {
        0 => {
            let mut ents = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    ents.push(((i, j), random_poly(n, &mut rng)));
                }
            }
            spec.bivector = Some(("P".into(), Bivector::from_entries(n, &ents).unwrap()));
        }
        1 => spec.ooperator = Some((0..n).map(|_| (0..n).map(|_| random_poly(n, &mut rng)).collect()).collect()),
        2 => {
            spec.frame = Some(
                (0..n)
                    .map(|_| {
                        (
                            (0..n).map(|_| random_poly(n, &mut rng)).collect(),
                            (0..n).map(|_| random_poly(n, &mut rng)).collect(),
                        )
                    })
                    .collect(),
            )
        }
        _ => {}
    }
    if n >= 3 && rng.gen_bool(0.5) {
        let mut h = ThreeTensor::zero(n);
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    h.set_antisymmetric(i, j, k, random_poly(n, &mut rng));
                }
            }
        }
        spec.threeform = Some(("H".into(), h));
    }
    if rng.gen_bool(0.5) {
        let mut rows = vec![vec![Poly::zero(n); n]; n];
        for i in 0..n {
            for j in i..n {
                let p = random_poly(n, &mut rng);
                rows[i][j] = p.clone();
                rows[j][i] = p;
            }
        }
        spec.metric = Some(rows);
    }
    for a in 0..rng.gen_range(0..3) {
        spec.actions.push((
            format!("act{a}"),
            (0..n).map(|_| random_poly(n, &mut rng)).collect(),
            (0..n).map(|_| random_poly(n, &mut rng)).collect(),
        ));
    }
    spec
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn render_then_parse_is_identity(seed in any::<u64>()) {
        let spec = random_spec(seed);
        let text = spec.render();
        let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, spec);
    }
}
