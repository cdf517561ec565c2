//! Focal curvatures, the focal curve (generalized evolute), and its local
//! models at flattenings, vertices and twistings.
//!
//! Local-model comparisons first move the curve rigidly so that `γ(t₀) = 0`
//! with Frenet frame `(e₁, e₂, e₃)`, and rescale the parameter to unit speed
//! at `t₀`. The Taylor coefficients `aⱼ, bⱼ, cⱼ` of the three components in
//! that position feed the closed forms.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{refine_certificate_root, Certificate, CertificateJets, FeatureKind};
use crate::frenet::{
    arc_derivative, frenet_apparatus, frenet_apparatus_with_degree, frenet_from_derivatives,
    DerivativeJets, TangentIndicatrix,
};
use crate::geometry::{JetVec3, RigidMotion, Vec3};
use crate::jet::{sqrt_unchecked, Jet};
use crate::model::ParametricCurve;

/// `|τ| ≤ 1e-10·κ` counts as vanishing torsion.
pub const TORSION_TOL: f64 = 1e-10;
/// Feature preconditions: a certificate vanishes when below this times its scale.
pub const FEATURE_TOL: f64 = 1e-8;
/// Geometric step ladder for one-sided extraction near a pole.
pub const LADDER_START: f64 = 1e-2;
pub const LADDER_STEPS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocalData {
    pub mu1: f64,
    pub mu2: f64,
    pub radius: f64,
    pub center: [f64; 3],
}

pub fn focal_data<C: ParametricCurve + ?Sized>(curve: &C, t: f64) -> Result<FocalData> {
    let f = frenet_apparatus(curve, t)?;
    let (k, tau) = (f.kappa(), f.tau());
    if !(tau.abs() > TORSION_TOL * k) {
        return Err(Error::ZeroTorsion { t, tau });
    }
    let mu1 = 1.0 / k;
    let mu2 = -f.kappa_ds(1) / (k * k * tau);
    let center = curve.position(t)? + f.n() * mu1 + f.b() * mu2;
    Ok(FocalData {
        mu1,
        mu2,
        radius: (mu1 * mu1 + mu2 * mu2).sqrt(),
        center: center.into(),
    })
}

/// Component jets of `c = γ + (1/κ)N − κ′/(κ²τ)B` at `t₀`.
pub fn evolute_jet<C: ParametricCurve + ?Sized>(curve: &C, t0: f64, degree: usize) -> Result<JetVec3> {
    let d = DerivativeJets::new(curve, t0, degree + 1)?;
    let f = frenet_from_derivatives(&d, t0)?;
    let (k0, tau0) = (f.kappa(), f.tau());
    if !(tau0.abs() > TORSION_TOL * k0) {
        return Err(Error::ZeroTorsion { t: t0, tau: tau0 });
    }
    let v = &f.speed_jet;
    let k1 = arc_derivative(&f.kappa_t, v);
    let k = f.kappa_t.truncate(degree);
    let tau = f.tau_t.truncate(degree);

    let vel = d.velocity.truncate(degree);
    let w = d.cross().truncate(degree);
    let tangent = vel.div_jet(&v.truncate(degree));
    let binormal = w.div_jet(&sqrt_unchecked(&w.dot(&w)));
    let normal = binormal.cross(&tangent);

    let mu1 = k.recip()?;
    let mu2 = -&(&k1 / &(&(&k * &k) * &tau));
    let g = curve.jets(t0, degree)?;
    Ok(g.add(&normal.scale_jet(&mu1)).add(&binormal.scale_jet(&mu2)))
}

/// The focal curve as a curve in its own right.
#[derive(Debug, Clone)]
pub struct EvoluteCurve<C>(pub C);

impl<C: ParametricCurve> ParametricCurve for EvoluteCurve<C> {
    fn jets(&self, t0: f64, degree: usize) -> Result<JetVec3> {
        evolute_jet(&self.0, t0, degree)
    }
    fn domain(&self) -> (f64, f64) {
        self.0.domain()
    }
}

/// `curve` moved to Frenet position at `t₀` and reparametrized by
/// `u = |γ′(t₀)|·(t − t₀)`.
#[derive(Debug, Clone)]
pub struct NormalizedCurve<C> {
    pub curve: C,
    pub t0: f64,
    pub speed: f64,
    pub motion: RigidMotion,
}

impl<C: ParametricCurve> NormalizedCurve<C> {
    pub fn new(curve: C, t0: f64) -> Result<Self> {
        let f = frenet_apparatus(&curve, t0)?;
        let motion = RigidMotion::to_frame(curve.position(t0)?, f.t(), f.n(), f.b());
        Ok(Self {
            speed: f.speed(),
            curve,
            t0,
            motion,
        })
    }

    pub fn parameter_of(&self, u: f64) -> f64 {
        self.t0 + u / self.speed
    }

    pub fn coefficients(&self, degree: usize) -> Result<NormalFormCoefficients> {
        let j = self.jets(0.0, degree)?;
        Ok(NormalFormCoefficients {
            a: j.0[0].coeffs().to_vec(),
            b: j.0[1].coeffs().to_vec(),
            c: j.0[2].coeffs().to_vec(),
        })
    }
}

impl<C: ParametricCurve> ParametricCurve for NormalizedCurve<C> {
    fn jets(&self, u0: f64, degree: usize) -> Result<JetVec3> {
        let j = self.curve.jets(self.parameter_of(u0), degree)?;
        Ok(j.rescale(1.0 / self.speed).transform(&self.motion))
    }
    fn domain(&self) -> (f64, f64) {
        let (lo, hi) = self.curve.domain();
        ((lo - self.t0) * self.speed, (hi - self.t0) * self.speed)
    }
}

/// Taylor coefficients of `(x, y, z)` in normal position; index = order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalFormCoefficients {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl NormalFormCoefficients {
    fn get(v: &[f64], i: usize) -> f64 {
        v.get(i).copied().unwrap_or(0.0)
    }
    pub fn a(&self, i: usize) -> f64 {
        Self::get(&self.a, i)
    }
    pub fn b(&self, i: usize) -> f64 {
        Self::get(&self.b, i)
    }
    pub fn c(&self, i: usize) -> f64 {
        Self::get(&self.c, i)
    }
    /// `3a₃ + 2b₂²`, zero when the parameter is arc length to third order.
    pub fn arc_length_defect(&self) -> f64 {
        3.0 * self.a(3) + 2.0 * self.b(2).powi(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub name: String,
    pub computed: f64,
    pub closed_form: f64,
    /// Relative deviation; absolute when the closed form is zero.
    pub rel_dev: f64,
}

impl CoefficientEntry {
    pub fn new(name: &str, computed: f64, closed_form: f64) -> Self {
        let diff = (computed - closed_form).abs();
        let rel_dev = if closed_form == 0.0 { diff } else { diff / closed_form.abs() };
        Self {
            name: name.to_string(),
            computed,
            closed_form,
            rel_dev,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientReport {
    pub feature: FeatureKind,
    pub t0: f64,
    pub entries: Vec<CoefficientEntry>,
    /// Entries whose closed form vanishes identically for this instance.
    pub degenerate: Vec<String>,
    pub notes: BTreeMap<String, f64>,
}

impl CoefficientReport {
    pub fn entry(&self, name: &str) -> Option<&CoefficientEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn max_rel_dev(&self, names: &[&str]) -> f64 {
        names
            .iter()
            .filter_map(|n| self.entry(n))
            .fold(0.0_f64, |m, e| m.max(e.rel_dev))
    }
}

/// Fits `Σ eᵢ (h/h₀)^{2i}` to the samples and returns `(e₀, e₁/h₀²)`.
fn extrapolate_even(hs: &[f64], values: &[f64]) -> (f64, f64) {
    let order = 4.min(hs.len());
    let h0 = hs[0];
    let m = DMatrix::from_fn(hs.len(), order, |r, c| ((hs[r] / h0).powi(2)).powi(c as i32));
    let rhs = DVector::from_column_slice(values);
    let sol = m
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .expect("least-squares solve with full SVD");
    (sol[0], sol[1] / (h0 * h0))
}

fn ladder() -> Vec<f64> {
    (0..LADDER_STEPS).map(|k| LADDER_START * 0.5_f64.powi(k as i32)).collect()
}

pub fn evolute_flattening_asymptotics<C: ParametricCurve>(curve: &C, t0: f64) -> Result<CoefficientReport> {
    let j = CertificateJets::new(curve, t0, 0)?;
    let (k, tau, tau1) = (j.kappa.value(), j.tau.value(), j.tau_prime.value());
    if !(tau.abs() <= FEATURE_TOL * k && tau1.abs() > FEATURE_TOL * k * k) {
        return Err(Error::NotAFlattening {
            t: t0,
            tau,
            tau_prime: tau1,
        });
    }
    let nc = NormalizedCurve::new(curve, t0)?;
    let nf = nc.coefficients(6)?;
    let (b2, b3, c4) = (nf.b(2), nf.b(3), nf.c(4));

    let hs = ladder();
    let mut x_even = Vec::new();
    let mut y_even = Vec::new();
    let mut y_odd = Vec::new();
    let mut z_pole = Vec::new();
    for &h in &hs {
        let p = evolute_jet(&nc, h, 0)?.value();
        let m = evolute_jet(&nc, -h, 0)?.value();
        x_even.push(0.5 * (p.x + m.x));
        y_even.push(0.5 * (p.y + m.y));
        y_odd.push((p.y - m.y) / (2.0 * h));
        z_pole.push(0.5 * h * (p.z - m.z));
    }
    let (x0, x2) = extrapolate_even(&hs, &x_even);
    let (y0, _) = extrapolate_even(&hs, &y_even);
    let (y1, _) = extrapolate_even(&hs, &y_odd);
    let (zp, _) = extrapolate_even(&hs, &z_pole);

    let entries = vec![
        CoefficientEntry::new("x_quadratic", x2, b3 / (2.0 * b2)),
        CoefficientEntry::new("y_constant", y0, 1.0 / (2.0 * b2)),
        CoefficientEntry::new("y_linear", y1, -3.0 * b3 / (4.0 * b2 * b2)),
        CoefficientEntry::new("z_pole", zp, b3 / (-8.0 * c4 * b2)),
    ];
    let mut degenerate = Vec::new();
    if b3.abs() <= 1e-12 * b2.abs().max(1.0) {
        degenerate.extend(["x_quadratic", "y_linear", "z_pole"].map(String::from));
    }
    let notes = BTreeMap::from([
        ("b2".to_string(), b2),
        ("b3".to_string(), b3),
        ("c4".to_string(), c4),
        ("x_constant".to_string(), x0),
        ("arc_length_defect".to_string(), nf.arc_length_defect()),
    ]);
    Ok(CoefficientReport {
        feature: FeatureKind::Flattening,
        t0,
        entries,
        degenerate,
        notes,
    })
}

/// Closed forms of the evolute series at a vertex, evaluated on normal-form
/// coefficients: `(ā₄, b̄₀, b̄₃, c̄₀, c̄₂)`.
pub fn vertex_series_closed_forms(nf: &NormalFormCoefficients) -> [f64; 5] {
    let (a3, a4) = (nf.a(3), nf.a(4));
    let (b2, b3, b5) = (nf.b(2), nf.b(3), nf.b(5));
    let (c3, c5) = (nf.c(3), nf.c(5));
    let a4bar = 3.0 * (8.0 * b2 * b2 * b3 * c3 - 3.0 * a3 * b3 * c3 + 10.0 * a4 * b2 * c3 + 5.0 * b3 * c5
        - 5.0 * b5 * c3)
        / (2.0 * c3 * b2);
    let b0bar = 1.0 / (2.0 * b2);
    let b3bar = (-34.0 * b2 * b2 * b3 * c3 + 9.0 * a3 * b3 * c3 - 40.0 * a4 * b2 * c3 - 20.0 * b3 * c5
        + 20.0 * b5 * c3)
        / (2.0 * c3 * b2 * b2);
    let c0bar = -b3 / (2.0 * b2 * c3);
    let c2bar = (18.0 * b2 * b2 * b3 * c3 - 3.0 * a3 * b3 * c3 + 20.0 * a4 * b2 * c3 + 10.0 * b3 * c5
        - 10.0 * b5 * c3)
        / (2.0 * c3 * c3 * b2);
    [a4bar, b0bar, b3bar, c0bar, c2bar]
}

pub fn evolute_vertex_series<C: ParametricCurve>(curve: &C, t0: f64) -> Result<CoefficientReport> {
    let j = CertificateJets::new(curve, t0, 0)?;
    let (k, tau) = (j.kappa.value(), j.tau.value());
    let vreg = j.vertex_reg.value();
    let scale = j.scale(Certificate::Vertex);
    let certificate = if tau != 0.0 { -vreg / (k * k * tau * tau) } else { f64::INFINITY };
    if !(tau.abs() > TORSION_TOL * k && vreg.abs() <= FEATURE_TOL * scale) {
        return Err(Error::NotAVertex { t: t0, certificate });
    }
    let nc = NormalizedCurve::new(curve, t0)?;
    let nf = nc.coefficients(8)?;
    let e = evolute_jet(&nc, 0.0, 4)?;
    let [a4bar, b0bar, b3bar, c0bar, c2bar] = vertex_series_closed_forms(&nf);
    let entries = vec![
        CoefficientEntry::new("a4_bar", e.0[0].coeff(4), a4bar),
        CoefficientEntry::new("b0_bar", e.0[1].coeff(0), b0bar),
        CoefficientEntry::new("b3_bar", e.0[1].coeff(3), b3bar),
        CoefficientEntry::new("c0_bar", e.0[2].coeff(0), c0bar),
        CoefficientEntry::new("c2_bar", e.0[2].coeff(2), c2bar),
    ];
    let lower = [
        ("x_0", e.0[0].coeff(0)),
        ("x_1", e.0[0].coeff(1)),
        ("x_2", e.0[0].coeff(2)),
        ("x_3", e.0[0].coeff(3)),
        ("y_1", e.0[1].coeff(1)),
        ("y_2", e.0[1].coeff(2)),
        ("z_1", e.0[2].coeff(1)),
    ];
    let mut notes: BTreeMap<String, f64> = lower.iter().map(|(n, v)| (n.to_string(), *v)).collect();
    notes.insert("arc_length_defect".into(), nf.arc_length_defect());
    notes.insert("vertex_cert".into(), certificate);
    Ok(CoefficientReport {
        feature: FeatureKind::Vertex,
        t0,
        entries,
        degenerate: Vec::new(),
        notes,
    })
}

/// `(δ, δ̃)` at a twisting in normal position.
pub fn twisting_deltas(nf: &NormalFormCoefficients) -> (f64, f64) {
    let (b2, b3, b4) = (nf.b(2), nf.b(3), nf.b(4));
    let (c3, c5) = (nf.c(3), nf.c(5));
    let delta = 4.0 * b2.powi(4) + 12.0 * b2 * b4 - 27.0 * b3 * b3;
    let delta_tilde = 12.0 * b2.powi(4) * c3 - 20.0 * b2 * b2 * c5
        + 48.0 * b2 * b4 * c3
        + 27.0 * b3 * b3 * c3
        + 27.0 * c3.powi(3);
    (delta, delta_tilde)
}

pub fn evolute_twisting_series<C: ParametricCurve>(curve: &C, t0: f64) -> Result<CoefficientReport> {
    let j = CertificateJets::new(curve, t0, 0)?;
    let (k, tau) = (j.kappa.value(), j.tau.value());
    let twist = j.twist.value();
    if !(tau.abs() > TORSION_TOL * k && twist.abs() <= FEATURE_TOL * j.scale(Certificate::Twist)) {
        return Err(Error::NotATwisting {
            t: t0,
            certificate: twist,
        });
    }
    let nc = NormalizedCurve::new(curve, t0)?;
    let nf = nc.coefficients(8)?;
    let (b2, b3, b4, c3) = (nf.b(2), nf.b(3), nf.b(4), nf.c(3));
    let (delta, delta_tilde) = twisting_deltas(&nf);
    let delta_scale = 4.0 * b2.powi(4) + (12.0 * b2 * b4).abs() + 27.0 * b3 * b3;
    if !(delta.abs() > FEATURE_TOL * delta_scale) {
        return Err(Error::DegenerateDelta { delta });
    }

    let e = evolute_jet(&nc, 0.0, 4)?;
    let ev = EvoluteCurve(&nc);
    let fe = frenet_apparatus_with_degree(&ev, 0.0, 4)?;
    let kc = &fe.kappa_t;
    let tc = &fe.tau_t;
    let lead = &(&kc.derivative() * &tc.truncate(3)) - &(&tc.derivative() * &kc.truncate(3));
    let lead1 = lead.coeff(1);
    let closed_lead = 216.0 * b2 * b2 * c3 * c3 * delta_tilde / (delta * delta);

    let entries = vec![
        CoefficientEntry::new("x_cubic", e.0[0].coeff(3), -delta / (6.0 * b2 * b2)),
        CoefficientEntry::new("y_constant", e.0[1].coeff(0), 1.0 / (2.0 * b2)),
        CoefficientEntry::new("y_quadratic", e.0[1].coeff(2), delta / (4.0 * b2.powi(3))),
        CoefficientEntry::new("z_constant", e.0[2].coeff(0), -b3 / (2.0 * b2 * c3)),
        CoefficientEntry::new("z_linear", e.0[2].coeff(1), -delta / (b2 * b2 * c3)),
        CoefficientEntry::new("kappa_c", fe.kappa(), 18.0 * b2 * c3 * c3 / delta.abs()),
        CoefficientEntry::new("tau_c", fe.tau(), -12.0 * c3 * b2.powi(3) / delta),
        CoefficientEntry::new("twist_c_leading_abs", lead1.abs(), closed_lead.abs()),
    ];
    let dt_scale = 12.0 * (b2.powi(4) * c3).abs()
        + 20.0 * (b2 * b2 * nf.c(5)).abs()
        + 48.0 * (b2 * b4 * c3).abs()
        + 27.0 * (b3 * b3 * c3).abs()
        + 27.0 * c3.abs().powi(3);
    let mut degenerate = Vec::new();
    if delta_tilde.abs() <= FEATURE_TOL * dt_scale {
        degenerate.push("twist_c_leading_abs".to_string());
    }
    let root = refine_certificate_root(&ev, Certificate::Twist, -1e-3, 1e-3)?.map(|p| p.t);
    let mut notes = BTreeMap::from([
        ("delta".to_string(), delta),
        ("delta_tilde".to_string(), delta_tilde),
        ("twist_c_leading".to_string(), lead1),
        ("twist_c_sign".to_string(), (lead1 * closed_lead).signum()),
        ("arc_length_defect".to_string(), nf.arc_length_defect()),
    ]);
    if let Some(t) = root {
        notes.insert("evolute_twist_root".into(), t);
    }
    Ok(CoefficientReport {
        feature: FeatureKind::Twisting,
        t0,
        entries,
        degenerate,
        notes,
    })
}

/// Height function of the tangent indicatrix along `direction`.
pub fn tangent_height_jet<C: ParametricCurve>(curve: &C, t0: f64, direction: &Vec3, degree: usize) -> Result<Jet> {
    crate::frenet::height_jet(&TangentIndicatrix(curve), t0, direction, degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SpaceCurve;

    fn eq2(a: [f64; 5], b: [f64; 6], c: [f64; 6]) -> SpaceCurve {
        SpaceCurve::from_polynomials(
            [&[0.0, 1.0, 0.0, a[0], a[1], a[2]], &b, &c],
            (-1.0, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn evolute_constant_terms() {
        let c = eq2([0.1, 0.0, 0.0, 0.0, 0.0], [0., 0., 0.8, 0.3, -0.2, 0.1], [0., 0., 0., 0.7, 0.4, 0.0]);
        let e = evolute_jet(&c, 0.0, 3).unwrap();
        let v = e.value();
        assert!(v.x.abs() < 1e-14);
        assert!((v.y - 1.0 / 1.6).abs() < 1e-14);
        assert!((v.z - (-0.3 / (2.0 * 0.8 * 0.7))).abs() < 1e-14);
        let fd = focal_data(&c, 0.0).unwrap();
        assert!((Vec3::from(fd.center) - v).norm() < 1e-14);
        let r2 = fd.mu1 * fd.mu1 + fd.mu2 * fd.mu2;
        assert!((fd.radius * fd.radius - r2).abs() <= 4.0 * f64::EPSILON * r2);
    }

    #[test]
    fn helix_evolute_is_a_helix() {
        // (a cos t, a sin t, bt) with a = 1, b = 1 has κ = τ = 1/2 and evolute
        // (−cos t, −sin t, t).
        let h = SpaceCurve::parse("cos(t)", "sin(t)", "t", (-5., 5.)).unwrap();
        for &t in &[0.0, 0.9, -2.0] {
            let e = evolute_jet(&h, t, 2).unwrap().value();
            assert!((e - Vec3::new(-t.cos(), -t.sin(), t)).norm() < 1e-13);
            assert!(focal_data(&h, t).unwrap().mu2.abs() < 1e-13);
        }
    }

    #[test]
    fn planar_point_has_no_evolute() {
        let p = SpaceCurve::parse("cos(t)", "sin(t)", "0", (-3., 3.)).unwrap();
        assert!(matches!(evolute_jet(&p, 0.5, 3), Err(Error::ZeroTorsion { .. })));
    }

    #[test]
    fn flattening_pole_coefficient() {
        let c = eq2([0.0; 5], [0., 0., 1., 2., 0., 0.], [0., 0., 0., 0., 1., 0.]);
        let r = evolute_flattening_asymptotics(&c, 0.0).unwrap();
        let z = r.entry("z_pole").unwrap();
        assert_eq!(z.closed_form, -0.25);
        assert!(z.rel_dev < 1e-4, "{z:?}");
        let b3_zero = eq2([0.0; 5], [0., 0., 1., 0., 0., 0.], [0., 0., 0., 0., 1., 0.]);
        let r = evolute_flattening_asymptotics(&b3_zero, 0.0).unwrap();
        assert!(r.degenerate.contains(&"z_pole".to_string()));
        let twisted = eq2([0.0; 5], [0., 0., 1., 0., 0., 0.], [0., 0., 0., 1., 0., 0.]);
        assert!(matches!(
            evolute_flattening_asymptotics(&twisted, 0.0),
            Err(Error::NotAFlattening { .. })
        ));
    }

    #[test]
    fn twisting_z_linear_differs_from_print_by_six() {
        // b₂ = 1, b₃ = 0, b₄ = 0 ⇒ δ = 4; twisting needs c₄ = 9b₃c₃/(4b₂) = 0.
        let c = eq2([-2.0 / 3.0, 0.0, 0.0, 0.0, 0.0], [0., 0., 1., 0., 0., 0.], [0., 0., 0., 0.5, 0., 0.]);
        let r = evolute_twisting_series(&c, 0.0).unwrap();
        assert_eq!(r.notes["delta"], 4.0);
        let kc = r.entry("kappa_c").unwrap();
        assert!((kc.closed_form - 18.0 * 0.25 / 4.0).abs() < 1e-15);
        assert!(kc.rel_dev < 1e-6);
        let zl = r.entry("z_linear").unwrap();
        assert!((zl.computed * 6.0 - zl.closed_form).abs() < 1e-9 * zl.closed_form.abs());
    }
}
