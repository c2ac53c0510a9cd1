//! Seeded random operators, transformations, jet points and test functions.

use rand::Rng;

use super::{JetPoint, OperatorSpec, Transformation};
use crate::expr::{q, Atom, Expr, Monomial};

/// Rational in `[-bound, bound]` with denominator up to 4.
fn small_rational(rng: &mut impl Rng, bound: i64) -> Expr {
    let d = rng.gen_range(1..=4);
    let n = rng.gen_range(-bound * d..=bound * d);
    Expr::frac(n, d)
}

/// Polynomial in `x` of degree at most `degree` with small rational coefficients.
pub fn polynomial(rng: &mut impl Rng, degree: u32) -> Expr {
    (0..=degree)
        .map(|k| small_rational(rng, 3) * Expr::atom_pow(Atom::X, 4 * k as i32))
        .sum()
}

/// Operator with polynomial coefficients of degree at most 3, `f4 > 0` on `interval`.
pub fn operator(rng: &mut impl Rng, interval: (f64, f64)) -> OperatorSpec {
    loop {
        let mut coeffs: [Expr; 5] = Default::default();
        for c in coeffs.iter_mut() {
            let degree = rng.gen_range(0..=3);
            *c = polynomial(rng, degree);
        }
        if coeffs[4].is_zero() {
            continue;
        }
        if let Ok(op) = OperatorSpec::new(coeffs) {
            if op.check_domain(interval).is_ok() {
                return op;
            }
        }
    }
}

/// `xi = c1 x + c2 + c3 x^2` with `xi' > 0` on `interval`, and
/// `phi = d0 + d1 x >= 1/2` on `interval`.
pub fn transformation(rng: &mut impl Rng, interval: (f64, f64), affine: bool) -> Transformation {
    loop {
        let c1 = Expr::frac(rng.gen_range(2..=12), 4);
        let c2 = Expr::frac(rng.gen_range(-8..=8), 4);
        let c3 = if affine {
            Expr::zero()
        } else {
            Expr::frac(rng.gen_range(-2..=2), 8)
        };
        let x = Expr::atom(Atom::X);
        let xi = c1 * &x + c2 + c3 * &x * &x;
        let d0 = Expr::frac(rng.gen_range(2..=12), 4);
        let d1 = Expr::frac(rng.gen_range(-4..=4), 8);
        let phi = d0 + d1 * &x;
        let Ok(t) = Transformation::new(xi, phi) else {
            continue;
        };
        let ok = super::grid(interval).all(|x0| {
            let at = |e: &Expr| e.eval(&|a| (a == Atom::X).then_some(x0)).unwrap_or(f64::NAN);
            at(t.xi_derivative(1)) > 0.0 && at(t.phi()) >= 0.5
        });
        if ok {
            return t;
        }
    }
}

/// Jet point with `x` in `interval`, `u` in `[0.5, 2]` and the rest in `[-2, 2]`.
pub fn jet_point(rng: &mut impl Rng, interval: (f64, f64)) -> JetPoint {
    JetPoint::new(
        rng.gen_range(interval.0..=interval.1),
        rng.gen_range(0.5..=2.0),
        rng.gen_range(-2.0..=2.0),
        rng.gen_range(-2.0..=2.0),
        rng.gen_range(-2.0..=2.0),
        rng.gen_range(-2.0..=2.0),
    )
}

/// Polynomial test function of degree at most 6 in `x`.
pub fn test_function(rng: &mut impl Rng) -> Expr {
    let deg = rng.gen_range(0..=6u32);
    let mut e = Expr::zero();
    for k in 0..=deg {
        let c = q(rng.gen_range(-6..=6), rng.gen_range(1..=3));
        e = e + Expr::monomial(c, Monomial::power(Atom::X, 4 * k as i32));
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_respect_domains() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let op = operator(&mut rng, (1.0, 2.0));
            assert!(op.check_domain((1.0, 2.0)).is_ok());
            let t = transformation(&mut rng, (1.0, 2.0), false);
            assert!(t.check_domain((1.0, 2.0)).is_ok());
            let jp = jet_point(&mut rng, (1.0, 2.0));
            assert!((0.5..=2.0).contains(&jp.u));
        }
    }

    #[test]
    fn seeded_output_is_reproducible() {
        let a = operator(&mut ChaCha8Rng::seed_from_u64(3), (1.0, 2.0));
        let b = operator(&mut ChaCha8Rng::seed_from_u64(3), (1.0, 2.0));
        assert_eq!(a, b);
    }
}
