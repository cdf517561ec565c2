mod common;

use common::{rel, rng, NormalForm};
use spacecurve::evolute::{evolute_jet, focal_data, EvoluteCurve};
use spacecurve::features::{detect_cusp, feature_certificates, scan_features, vertex_kappa_identity, FeatureKind};
use spacecurve::frenet::frenet_apparatus;
use spacecurve::model::{load_spec, Model};
use spacecurve::{Error, ParametricCurve, SpaceCurve};

fn near(scan: &spacecurve::features::FeatureScan, kind: FeatureKind, t: f64, tol: f64) -> bool {
    scan.of_kind(kind).any(|f| (f.t - t).abs() <= tol)
}

#[test]
fn flattening_model_reports_one_flattening() {
    let c = SpaceCurve::parse("t", "t^2", "t^4", (-1.0, 1.0)).unwrap();
    let scan = scan_features(&c, (-1.0, 1.0), 512).unwrap();
    let flats: Vec<_> = scan.of_kind(FeatureKind::Flattening).collect();
    assert_eq!(flats.len(), 1);
    assert!(flats[0].t.abs() < 1e-10);
    assert!(scan.irregular.is_empty());
}

#[test]
fn helix_is_degenerate_for_twistings() {
    let c = SpaceCurve::parse("cos(t)", "sin(t)", "0.5*t", (0.0, 6.0)).unwrap();
    let scan = scan_features(&c, (0.0, 6.0), 600).unwrap();
    assert_eq!(scan.of_kind(FeatureKind::Degenerate).count(), 1);
    assert_eq!(scan.of_kind(FeatureKind::Twisting).count(), 0);
    assert_eq!(scan.of_kind(FeatureKind::Flattening).count(), 0);
    assert_eq!(scan.of_kind(FeatureKind::Vertex).count(), 0);
}

#[test]
fn vertex_instances_are_found_by_the_scan() {
    let mut r = rng(21);
    for _ in 0..10 {
        let nf = NormalForm::vertex(&mut r);
        let c = nf.curve();
        let scan = scan_features(&c, (-0.1, 0.1), 400).unwrap();
        assert!(near(&scan, FeatureKind::Vertex, 0.0, 1e-8), "{nf:?}: {:?}", scan.features);
        let id = vertex_kappa_identity(&c, 0.0).unwrap();
        let fc = feature_certificates(&c, 0.0).unwrap();
        assert!(fc.vertex_reg.abs() <= 1e-9 * id.scale.max(1.0));
    }
}

#[test]
fn twisting_instances_are_found_by_the_scan() {
    let mut r = rng(22);
    for _ in 0..10 {
        let nf = NormalForm::twisting(&mut r);
        let scan = scan_features(&nf.curve(), (-0.1, 0.1), 400).unwrap();
        assert!(near(&scan, FeatureKind::Twisting, 0.0, 1e-8), "{nf:?}: {:?}", scan.features);
    }
}

#[test]
fn flattening_instances_are_found_by_the_scan() {
    let mut r = rng(23);
    for _ in 0..10 {
        let nf = NormalForm::flattening(&mut r);
        let scan = scan_features(&nf.curve(), (-0.1, 0.1), 400).unwrap();
        assert!(near(&scan, FeatureKind::Flattening, 0.0, 1e-10));
    }
}

#[test]
fn space_cusps() {
    let yes = SpaceCurve::parse("t^2", "t^3", "0", (-1.0, 1.0)).unwrap();
    assert!(detect_cusp(&yes, 0.0).unwrap().is_space_cusp);
    let no = SpaceCurve::parse("t^2", "t^4", "0", (-1.0, 1.0)).unwrap();
    assert!(!detect_cusp(&no, 0.0).unwrap().is_space_cusp);
    let regular = SpaceCurve::parse("t", "t^2", "t^3", (-1.0, 1.0)).unwrap();
    assert!(!detect_cusp(&regular, 0.0).unwrap().is_space_cusp);
}

#[test]
fn scan_reports_the_cusp_of_a_singular_curve() {
    let c = SpaceCurve::parse("t^2 + t^3", "t^3", "t^4 + t", (-0.5, 0.5)).unwrap();
    // Regular curve: nothing irregular and no cusp.
    let scan = scan_features(&c, (-0.5, 0.5), 256).unwrap();
    assert_eq!(scan.of_kind(FeatureKind::Cusp).count(), 0);
    let cusp = SpaceCurve::parse("t^2 + t^4", "t^3", "t^4", (-0.5, 0.5)).unwrap();
    let scan = scan_features(&cusp, (-0.5, 0.5), 256).unwrap();
    assert!(near(&scan, FeatureKind::Cusp, 0.0, 1e-8), "{:?}", scan.features);
}

#[test]
fn scan_rejects_bad_arguments() {
    let c = SpaceCurve::parse("t", "t^2", "t^3", (-1.0, 1.0)).unwrap();
    assert!(matches!(scan_features(&c, (1.0, -1.0), 100), Err(Error::Schema(_))));
    assert!(matches!(scan_features(&c, (-1.0, 1.0), 3), Err(Error::Schema(_))));
}

#[test]
fn scan_is_deterministic() {
    let nf = NormalForm::random_twisted(&mut rng(24));
    let c = nf.curve();
    let a = scan_features(&c, (-0.4, 0.4), 300).unwrap();
    let b = scan_features(&c, (-0.4, 0.4), 300).unwrap();
    assert_eq!(a.features.len(), b.features.len());
    for (x, y) in a.features.iter().zip(&b.features) {
        assert_eq!(x.kind, y.kind);
        assert_eq!(x.t.to_bits(), y.t.to_bits());
    }
}

#[test]
fn evolute_of_a_helix_is_a_helix() {
    let (r, h) = (1.5, 0.8);
    let c = SpaceCurve::parse(&format!("{r}*cos(t)"), &format!("{r}*sin(t)"), &format!("{h}*t"), (-3.0, 3.0)).unwrap();
    let r_ev = h * h / r;
    let ev = EvoluteCurve(&c);
    for t in [-2.0, -0.5, 0.0, 1.3] {
        let p = ev.position(t).unwrap();
        assert!(rel(p.x.hypot(p.y), r_ev) < 1e-12);
        assert!(rel(p.z, h * t) < 1e-12);
        let f = frenet_apparatus(&ev, t).unwrap();
        let d = r_ev * r_ev + h * h;
        assert!(rel(f.kappa(), r_ev / d) < 1e-10);
        assert!(rel(f.tau().abs(), h / d) < 1e-10);
        let fd = focal_data(&c, t).unwrap();
        assert!(rel(fd.radius, (r * r + h * h) / r) < 1e-12);
    }
}

#[test]
fn planar_curves_have_no_evolute() {
    let c = SpaceCurve::parse("cos(t)", "2*sin(t)", "0", (-3.0, 3.0)).unwrap();
    assert!(matches!(evolute_jet(&c, 0.3, 4), Err(Error::ZeroTorsion { .. })));
}

#[test]
fn evolute_jet_matches_focal_centers() {
    let nf = NormalForm::random_twisted(&mut rng(25));
    let c = nf.curve();
    for t in [-0.05, 0.0, 0.04] {
        let e = evolute_jet(&c, t, 3).unwrap();
        let fd = focal_data(&c, t).unwrap();
        for i in 0..3 {
            assert!(rel(e.value()[i], fd.center[i]) < 1e-12);
        }
        // The evolute point is equidistant from γ(t) by the osculating radius.
        assert!(rel((e.value() - c.position(t).unwrap()).norm(), fd.radius) < 1e-12);
    }
}

#[test]
fn spec_documents() {
    let poly = r#"{"kind":"curve","poly":[[0,1],[0,0,1],[0,0,0,1]],"t_range":[-1,1]}"#;
    let xyz = r#"{"kind":"curve","x":"t","y":"t^2","z":"t^3","t_range":[-1,1]}"#;
    let (Model::Curve(a), Model::Curve(b)) = (load_spec(poly).unwrap(), load_spec(xyz).unwrap()) else {
        panic!("expected curves");
    };
    for t in [-0.7, 0.2, 0.9] {
        let (ja, jb) = (a.jets(t, 5).unwrap(), b.jets(t, 5).unwrap());
        for k in 0..=5 {
            assert!((ja.coeff(k) - jb.coeff(k)).norm() < 1e-14);
        }
    }
    let family = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/family_g.json")).unwrap();
    assert!(matches!(load_spec(&family).unwrap(), Model::Family(_)));

    let bad = [
        r#"{"kind":"curve","x":"t","y":"t^2","t_range":[-1,1]}"#,
        r#"{"kind":"curve","x":"t","y":"t^2","z":"t^3","t_range":[1,-1]}"#,
        r#"{"kind":"curve","x":"t","y":"s1","z":"t","t_range":[-1,1]}"#,
        r#"{"kind":"curve","poly":[[0,1],[0,0,1]],"t_range":[-1,1]}"#,
        r#"{"kind":"curve","poly":[[0,1],[0,0,1],[1]],"x":"t","t_range":[-1,1]}"#,
        r#"{"kind":"family","x":"t","y":"t","z":"t","t_range":[-1,1]}"#,
        r#"{"kind":"surface","x":"t","y":"t","z":"t","t_range":[-1,1]}"#,
        r#"{"kind":"curve","x":"t","y":"t","z":"t","t_range":[-1,1],"extra":1}"#,
        "",
    ];
    for doc in bad {
        assert!(matches!(load_spec(doc), Err(Error::Schema(_))), "{doc}");
    }
    let parse = r#"{"kind":"curve","x":"t +","y":"t","z":"t","t_range":[-1,1]}"#;
    assert!(matches!(load_spec(parse), Err(Error::Parse { .. })));
    let unknown = r#"{"kind":"curve","x":"tan(t)","y":"t","z":"t","t_range":[-1,1]}"#;
    assert!(matches!(load_spec(unknown), Err(Error::UnknownIdentifier { .. })));
}
