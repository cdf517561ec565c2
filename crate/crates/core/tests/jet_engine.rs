mod common;

use proptest::prelude::*;
use spacecurve::expr::parse_expression;
use spacecurve::jet::{factorial, Jet, JetError, DEFAULT_DEGREE};

const DEG: usize = 10;

fn jet_strategy() -> impl Strategy<Value = Jet> {
    (prop::collection::vec(-2.0..2.0f64, DEG + 1), -1.0..1.0f64)
        .prop_map(|(c, base)| Jet::new(c, base).unwrap())
}

fn unit_jet_strategy() -> impl Strategy<Value = Jet> {
    (prop::collection::vec(-1.0..1.0f64, DEG + 1), 0.5..2.0f64, -1.0..1.0f64).prop_map(|(mut c, c0, base)| {
        c[0] = c0;
        Jet::new(c, base).unwrap()
    })
}

fn displacement_strategy() -> impl Strategy<Value = Jet> {
    (prop::collection::vec(-1.0..1.0f64, DEG + 1), 0.3..2.0f64).prop_map(|(mut c, a1)| {
        c[0] = 0.0;
        c[1] = a1;
        Jet::new(c, 0.0).unwrap()
    })
}

fn rebase(j: &Jet, base: f64) -> Jet {
    Jet::new(j.coeffs().to_vec(), base).unwrap()
}

proptest! {
    #[test]
    fn ring_identities(a in jet_strategy(), b in jet_strategy(), c in jet_strategy()) {
        let (b, c) = (rebase(&b, a.base()), rebase(&c, a.base()));
        let lhs = &a * &(&b + &c);
        let rhs = &(&a * &b) + &(&a * &c);
        prop_assert!(lhs.rel_distance(&rhs) < 1e-13);
        prop_assert!((&a * &b).rel_distance(&(&b * &a)) < 1e-15);
        prop_assert!((&(&a - &b) + &b).rel_distance(&a) < 1e-15);
    }

    #[test]
    fn division_inverts_multiplication(a in jet_strategy(), u in unit_jet_strategy()) {
        let u = rebase(&u, a.base());
        let q = (&a * &u).try_div(&u).unwrap();
        prop_assert!(q.rel_distance(&a) < 1e-9);
    }

    #[test]
    fn exp_is_a_homomorphism(a in jet_strategy(), b in jet_strategy()) {
        let b = rebase(&b, a.base());
        let (a, b) = (a.scale(0.3), b.scale(0.3));
        let lhs = (&a + &b).exp();
        let rhs = &a.exp() * &b.exp();
        prop_assert!(lhs.rel_distance(&rhs) < 1e-12);
    }

    #[test]
    fn pythagorean_identity(a in jet_strategy()) {
        let (s, c) = a.sin_cos();
        let one = &(&s * &s) + &(&c * &c);
        prop_assert!(one.rel_distance(&a.constant_like(1.0)) < 1e-12);
    }

    #[test]
    fn sqrt_squares_back(u in unit_jet_strategy()) {
        let r = u.try_sqrt().unwrap();
        prop_assert!((&r * &r).rel_distance(&u) < 1e-11);
    }

    #[test]
    fn integer_powers_match_products(u in unit_jet_strategy(), n in 0i32..5) {
        let mut prod = u.constant_like(1.0);
        for _ in 0..n {
            prod = &prod * &u;
        }
        prop_assert!(u.try_powi(n).unwrap().rel_distance(&prod) < 1e-12);
        let inv = u.try_powi(-n).unwrap();
        prop_assert!((&inv * &prod).rel_distance(&u.constant_like(1.0)) < 1e-9);
    }

    #[test]
    fn reversion_is_a_compositional_inverse(f in displacement_strategy()) {
        let g = f.try_revert().unwrap();
        let id = Jet::displacement(DEG, 0.0);
        // Order-k terms of g∘f sum products of size |g|·|f|ᵏ.
        let tol = 1e-14 * g.magnitude().max(1.0) * f.magnitude().max(1.0).powi(DEG as i32);
        prop_assert!(g.try_compose(&f).unwrap().rel_distance(&id) < tol);
        prop_assert!(f.try_compose(&g).unwrap().rel_distance(&id) < tol);
    }

    #[test]
    fn derivative_shifts_coefficients(a in jet_strategy()) {
        let d = a.derivative();
        prop_assert_eq!(d.degree(), DEG - 1);
        for j in 0..DEG {
            prop_assert!((d.coeff(j) - (j + 1) as f64 * a.coeff(j + 1)).abs() < 1e-12);
        }
        for j in 0..=DEG {
            prop_assert!((a.derivative_value(j) - factorial(j) * a.coeff(j)).abs() <= 1e-12 * factorial(j));
        }
    }

    #[test]
    fn expression_jets_are_polynomial_exact(coeffs in prop::collection::vec(-3.0..3.0f64, 1..8), t0 in -1.0..1.0f64) {
        let text = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| format!("({c})*t^{i}"))
            .collect::<Vec<_>>()
            .join(" + ");
        let j = parse_expression(&text).unwrap().eval_jet(t0, [0.0; 2], DEFAULT_DEGREE).unwrap();
        // Taylor coefficients at t0 of Σ cᵢ tⁱ are Σᵢ cᵢ C(i, k) t0^{i−k}.
        for k in 0..=DEFAULT_DEGREE {
            let mut expect = 0.0;
            for (i, c) in coeffs.iter().enumerate().filter(|(i, _)| *i >= k) {
                let binom = factorial(i) / (factorial(k) * factorial(i - k));
                expect += c * binom * t0.powi((i - k) as i32);
            }
            prop_assert!((j.coeff(k) - expect).abs() < 1e-11 * (1.0 + expect.abs()));
        }
    }
}

#[test]
fn division_by_vanishing_series_is_an_error() {
    let a = Jet::variable(4, 0.0);
    let b = Jet::displacement(4, 0.0);
    assert!(matches!(a.try_div(&b), Err(JetError::DivisionByZeroSeries { .. })));
}

#[test]
fn sqrt_of_nonpositive_constant_is_a_domain_error() {
    let z = Jet::displacement(4, 0.0);
    assert!(matches!(z.try_sqrt(), Err(JetError::Domain { .. })));
    let n = Jet::constant(-1.0, 4, 0.0);
    assert!(matches!(n.try_sqrt(), Err(JetError::Domain { .. })));
}

#[test]
fn composition_needs_a_displacement() {
    let outer = Jet::variable(4, 0.0);
    let inner = Jet::constant(1.0, 4, 0.0);
    assert!(matches!(outer.try_compose(&inner), Err(JetError::CompositionBasepoint { .. })));
}

#[test]
fn jets_agree_with_richardson_differences() {
    let mut r = common::rng(17);
    for _ in 0..20 {
        let text = common::random_expression(&mut r, 3);
        let e = parse_expression(&text).unwrap();
        let x0 = common::uniform(&mut r, -0.5, 0.5);
        let j = e.eval_jet(x0, [0.0; 2], 4).unwrap();
        let f = |t: f64| e.eval(t, [0.0; 2]);
        for k in 0..=4 {
            let fd = common::best_richardson_derivative(&f, x0, k);
            let d = j.derivative_value(k);
            assert!((d - fd).abs() <= 1e-6 * d.abs().max(1.0), "{text} at {x0}, order {k}: {d} vs {fd}");
        }
    }
}
