mod common;

use common::{phi, random_motion, rel, rng, NormalForm, Reparametrized};
use proptest::prelude::*;
use spacecurve::evolute::focal_data;
use spacecurve::frenet::{
    classify_ak_auto, distance_squared_jet, frenet_apparatus, height_jet, helix_defect, sphere_contact_order,
    versality_test, AkClass,
};
use spacecurve::jet::Jet;
use spacecurve::model::Moved;
use spacecurve::{Error, ParametricCurve, SpaceCurve, Vec3};

fn helix(r: f64, h: f64) -> SpaceCurve {
    SpaceCurve::parse(&format!("{r}*cos(t)"), &format!("{r}*sin(t)"), &format!("{h}*t"), (-4.0, 4.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn helix_closed_forms(r in 0.2..3.0f64, h in -2.0..2.0f64, t in -3.0..3.0f64) {
        let f = frenet_apparatus(&helix(r, h), t).unwrap();
        let d = r * r + h * h;
        prop_assert!(rel(f.kappa(), r / d) < 1e-12);
        prop_assert!(rel(f.tau(), h / d) < 1e-12);
        prop_assert!(rel(f.speed(), d.sqrt()) < 1e-12);
        for j in 1..4 {
            prop_assert!(f.kappa_ds(j).abs() < 1e-10);
            prop_assert!(f.tau_ds(j).abs() < 1e-10);
        }
        prop_assert!(helix_defect(&helix(r, h), t).unwrap().defect.abs() < 1e-10);
    }

    #[test]
    fn normal_form_invariants(seed in any::<u64>()) {
        let nf = NormalForm::random(&mut rng(seed));
        let f = frenet_apparatus(&nf.curve(), 0.0).unwrap();
        prop_assert!(rel(f.kappa(), 2.0 * nf.b2) < 1e-13);
        prop_assert!(rel(f.tau(), 3.0 * nf.c3 / nf.b2) < 1e-13);
        prop_assert!((f.t() - Vec3::x()).norm() < 1e-15);
        prop_assert!((f.n() - Vec3::y()).norm() < 1e-15);
        prop_assert!((f.b() - Vec3::z()).norm() < 1e-15);
    }

    #[test]
    fn invariants_under_rigid_motion(seed in any::<u64>(), t in -0.3..0.3f64) {
        let mut r = rng(seed);
        let nf = NormalForm::random(&mut r);
        let curve = nf.curve();
        let moved = Moved { curve: &curve, motion: random_motion(&mut r) };
        let (a, b) = (frenet_apparatus(&curve, t).unwrap(), frenet_apparatus(&moved, t).unwrap());
        prop_assert!(rel(b.kappa(), a.kappa()) < 1e-12);
        prop_assert!(rel(b.tau(), a.tau()) < 1e-11);
        for j in 1..4 {
            prop_assert!(rel(b.kappa_ds(j), a.kappa_ds(j)) < 1e-10);
            prop_assert!(rel(b.tau_ds(j), a.tau_ds(j)) < 1e-9);
        }
    }

    #[test]
    fn invariants_under_reparametrization(seed in any::<u64>(), u in -0.3..0.3f64) {
        let nf = NormalForm::random(&mut rng(seed));
        let curve = nf.curve();
        let re = Reparametrized(&curve);
        let (a, b) = (frenet_apparatus(&curve, phi(u)).unwrap(), frenet_apparatus(&re, u).unwrap());
        prop_assert!(rel(b.kappa(), a.kappa()) < 1e-12);
        prop_assert!(rel(b.tau(), a.tau()) < 1e-11);
        for j in 1..4 {
            prop_assert!(rel(b.kappa_ds(j), a.kappa_ds(j)) < 1e-9);
            prop_assert!(rel(b.tau_ds(j), a.tau_ds(j)) < 1e-9);
        }
        prop_assert!((b.t() - a.t()).norm() < 1e-12);
        prop_assert!((b.b() - a.b()).norm() < 1e-12);
    }

    #[test]
    fn osculating_sphere_has_contact_three(seed in any::<u64>()) {
        let nf = NormalForm::non_vertex(&mut rng(seed));
        let curve = nf.curve();
        let fd = focal_data(&curve, 0.0).unwrap();
        let center = Vec3::from(fd.center);
        prop_assert_eq!(sphere_contact_order(&curve, 0.0, &center, fd.radius).unwrap(), 3);
        let d = distance_squared_jet(&curve, 0.0, &center, 12).unwrap();
        prop_assert_eq!(classify_ak_auto(&d), AkClass::A(3));
    }
}

#[test]
fn vertex_sphere_has_contact_four() {
    let mut r = rng(4);
    for _ in 0..10 {
        let nf = NormalForm::vertex(&mut r);
        let curve = nf.curve();
        let fd = focal_data(&curve, 0.0).unwrap();
        assert_eq!(sphere_contact_order(&curve, 0.0, &Vec3::from(fd.center), fd.radius).unwrap(), 4);
    }
}

#[test]
fn sphere_missing_the_point_has_no_contact() {
    let nf = NormalForm::random(&mut rng(5));
    let order = sphere_contact_order(&nf.curve(), 0.0, &Vec3::new(0.0, 10.0, 0.0), 1.0).unwrap();
    assert_eq!(order, 0);
}

#[test]
fn height_needs_a_unit_direction() {
    let c = helix(1.0, 1.0);
    let err = height_jet(&c, 0.0, &Vec3::new(1.0, 1.0, 0.0), 6).unwrap_err();
    assert!(matches!(err, Error::NonUnitDirection { .. }));
    // Height along the binormal of (t, t², t³) vanishes to third order.
    let cubic = SpaceCurve::from_polynomials([&[0., 1.], &[0., 0., 1.], &[0., 0., 0., 1.]], (-1., 1.)).unwrap();
    let h = height_jet(&cubic, 0.0, &Vec3::z(), 6).unwrap();
    assert_eq!(classify_ak_auto(&h), AkClass::A(2));
}

#[test]
fn classify_ak_on_monomials() {
    for k in 1..8 {
        let mut c = vec![0.0; 12];
        c[k + 1] = 1.0;
        assert_eq!(classify_ak_auto(&Jet::new(c, 0.0).unwrap()), AkClass::A(k));
    }
    let mut c = vec![0.0; 12];
    c[1] = 1.0;
    assert_eq!(classify_ak_auto(&Jet::new(c, 0.0).unwrap()), AkClass::NonSingular);
}

#[test]
fn miniversal_unfolding_of_ak() {
    // t^{k+1} unfolded by t, t², …, t^{k−1} is versal; dropping any speed is not.
    for k in 2..6 {
        let deg = k + 2;
        let mono = |j: usize| {
            let mut c = vec![0.0; deg + 1];
            c[j] = 1.0;
            Jet::new(c, 0.0).unwrap()
        };
        let speeds: Vec<Jet> = (1..k).map(mono).collect();
        let cert = versality_test(&mono(k + 1), k, &speeds).unwrap();
        assert!(cert.versal, "k = {k}");
        assert_eq!(cert.rank, k);
        for drop in 0..speeds.len() {
            let fewer: Vec<Jet> = speeds.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, s)| s.clone()).collect();
            let cert = versality_test(&mono(k + 1), k, &fewer).unwrap();
            assert!(!cert.versal);
            assert_eq!(cert.deficit, 1);
        }
    }
}

#[test]
fn versality_rejects_mismatched_degrees() {
    let f = Jet::new(vec![0.0, 0.0, 0.0, 1.0, 0.0], 0.0).unwrap();
    let sp = Jet::new(vec![0.0, 1.0, 0.0], 0.0).unwrap();
    assert!(matches!(versality_test(&f, 2, &[sp]), Err(Error::InconsistentDegrees(_))));
    assert!(matches!(versality_test(&f, 3, &[]), Err(Error::InconsistentDegrees(_))));
}

#[test]
fn singular_points_are_rejected() {
    let cusp = SpaceCurve::parse("t^2", "t^3", "t^4", (-1.0, 1.0)).unwrap();
    assert!(matches!(frenet_apparatus(&cusp, 0.0), Err(Error::Regularity { .. })));
    let line = SpaceCurve::parse("t", "2*t", "0", (-1.0, 1.0)).unwrap();
    assert!(matches!(frenet_apparatus(&line, 0.3), Err(Error::Inflection { .. })));
}

#[test]
fn helix_defect_detects_non_helices() {
    let nf = NormalForm::random_twisted(&mut rng(9));
    let defect = helix_defect(&nf.curve(), 0.0).unwrap();
    assert!(!defect.planar);
    assert!(defect.defect.abs() > 1e-6);
    let planar = SpaceCurve::parse("cos(t)", "2*sin(t)", "0", (-3.0, 3.0)).unwrap();
    assert!(helix_defect(&planar, 0.5).unwrap().planar);
}

#[test]
fn positions_follow_the_motion() {
    let mut r = rng(12);
    let c = helix(1.0, 0.5);
    let m = random_motion(&mut r);
    let moved = Moved { curve: &c, motion: m.clone() };
    for t in [-1.0, 0.0, 2.0] {
        let p = moved.position(t).unwrap();
        assert!((p - m.apply(&c.position(t).unwrap())).norm() < 1e-14);
    }
}
