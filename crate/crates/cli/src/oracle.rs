//! Numeric point-sampling cross-check for symbolic zero claims.

use gradgauge::status::Status;
use gradgauge::{GradedElement, Poly, Q};
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Samples used to re-confirm every pass result.
pub const CONFIRM_SAMPLES: usize = 20;
pub const CONFIRM_SEED: u64 = 0x6772_6164;

/// `k` rational points in `n` variables, denominators at most 97.
pub fn sample_points(n: usize, k: usize, seed: u64) -> Vec<Vec<Q>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| {
            (0..n)
                .map(|_| BigRational::new(rng.gen_range(-97i64..=97).into(), rng.gen_range(1i64..=97).into()))
                .collect()
        })
        .collect()
}

/// Pass iff every scalar coefficient of `identity` vanishes at `k` points.
pub fn oracle_sample(identity: &GradedElement, k: usize, seed: u64) -> Status {
    let n = identity.ctx().nbase();
    let ok = sample_points(n, k, seed)
        .iter()
        .all(|pt| identity.eval_coefficients(pt).values().all(|v| v.is_zero()));
    Status::from_bool(ok)
}

/// Pass iff every polynomial vanishes at `k` points.
pub fn oracle_polys(n: usize, polys: &[Poly], k: usize, seed: u64) -> Status {
    oracle_pair(n, polys, &vec![Poly::zero(n); polys.len()], k, seed)
}

/// Pass iff `lhs[i]` and `rhs[i]` agree at `k` points, for every `i`.
pub fn oracle_pair(n: usize, lhs: &[Poly], rhs: &[Poly], k: usize, seed: u64) -> Status {
    assert_eq!(lhs.len(), rhs.len());
    let ok = sample_points(n, k, seed)
        .iter()
        .all(|pt| lhs.iter().zip(rhs).all(|(a, b)| a.eval(pt) == b.eval(pt)));
    Status::from_bool(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gradgauge::GradedContext;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn zero_passes() {
        let ctx = GradedContext::de_rham(&names(2));
        for seed in 0..5 {
            assert_eq!(oracle_sample(&GradedElement::zero(&ctx), 7, seed), Status::Pass);
        }
    }

    #[test]
    fn cancelled_difference_passes() {
        let x = Poly::var(1, 0);
        assert_eq!(oracle_polys(1, &[&x - &x], 20, 3), Status::Pass);
    }

    #[test]
    fn nonzero_fails() {
        let x = Poly::var(2, 0);
        assert_eq!(oracle_polys(2, &[&x * &x], 20, 3), Status::Fail);
    }

    #[test]
    fn points_are_deterministic() {
        assert_eq!(sample_points(3, 4, 9), sample_points(3, 4, 9));
        assert!(sample_points(3, 4, 9)
            .iter()
            .flatten()
            .all(|v| *v.denom() <= 97.into() && *v.denom() >= 1.into()));
    }
}
