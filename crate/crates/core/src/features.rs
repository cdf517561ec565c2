//! Flattenings, bi-flattenings, vertices, twistings and cusps.
//!
//! Each feature is the zero set of a certificate function of `t`. The
//! certificates are evaluated as jets, so the grid scan brackets sign changes
//! and Newton steps use the exact slope from the jet.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frenet::{
    arc_derivative, check_noninflectional, check_regular, frenet_from_derivatives, DerivativeJets,
    INFLECTION_TOL, REGULARITY_TOL,
};
use crate::jet::Jet;
use crate::model::ParametricCurve;

/// Fraction of near-zero samples that makes a certificate degenerate.
pub const DEGENERATE_FRACTION: f64 = 0.9;
/// Relative size below which a normalized certificate sample counts as zero.
pub const DEGENERATE_TOL: f64 = 1e-9;
/// Accepted root residual relative to the certificate's scale.
pub const ROOT_TOL: f64 = 1e-12;
/// Largest residual still reported as a root once the bracket has collapsed.
pub const ROOT_ACCEPT_TOL: f64 = 1e-10;
/// Residuals above this at a collapsed bracket mark a pole, not a root.
const POLE_TOL: f64 = 1e-6;
/// Samples per unit of parameter length when none are requested.
pub const DEFAULT_SAMPLES_PER_UNIT: f64 = 2048.0;
pub const MIN_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureKind {
    Flattening,
    BiFlattening,
    Vertex,
    Twisting,
    Cusp,
    Degenerate,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Flattening => "Flattening",
            FeatureKind::BiFlattening => "BiFlattening",
            FeatureKind::Vertex => "Vertex",
            FeatureKind::Twisting => "Twisting",
            FeatureKind::Cusp => "Cusp",
            FeatureKind::Degenerate => "Degenerate",
        }
    }
}

/// Scalar functions of `t` whose zeros define features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Certificate {
    /// `τ`.
    Tau,
    /// `dτ/ds`.
    TauPrime,
    /// `τκ″ − 2τκ′²/κ − κ′τ′ − κτ³ = −κ²τ²(μ₂′ + μ₁τ)`, free of the pole at `τ = 0`.
    Vertex,
    /// `κτ′ − κ′τ`.
    Twist,
    /// `⟨γ′, γ″⟩`, critical points of the speed.
    SpeedCritical,
}

impl Certificate {
    pub fn name(self) -> &'static str {
        match self {
            Certificate::Tau => "tau",
            Certificate::TauPrime => "tau_prime",
            Certificate::Vertex => "vertex_reg",
            Certificate::Twist => "twist_cert",
            Certificate::SpeedCritical => "speed_critical",
        }
    }
}

/// Certificate functions as jets in `t`, all of one degree.
#[derive(Debug, Clone)]
pub struct CertificateJets {
    pub speed: Jet,
    pub kappa: Jet,
    pub kappa_prime: Jet,
    pub kappa_second: Jet,
    pub tau: Jet,
    pub tau_prime: Jet,
    pub det: Jet,
    pub twist: Jet,
    pub vertex_reg: Jet,
}

impl CertificateJets {
    pub fn new<C: ParametricCurve + ?Sized>(curve: &C, t: f64, degree: usize) -> Result<Self> {
        let d = DerivativeJets::new(curve, t, degree + 2)?;
        let f = frenet_from_derivatives(&d, t)?;
        let v = &f.speed_jet;
        let k1 = arc_derivative(&f.kappa_t, v);
        let k2 = arc_derivative(&k1, v).truncate(degree);
        let t1 = arc_derivative(&f.tau_t, v).truncate(degree);
        let k1 = k1.truncate(degree);
        let k = f.kappa_t.truncate(degree);
        let tau = f.tau_t.truncate(degree);
        let twist = &(&k * &t1) - &(&k1 * &tau);
        let tau3 = &(&tau * &tau) * &tau;
        let vertex_reg = &(&(&(&tau * &k2) - &(&(&tau * &(&k1 * &k1)) / &k).scale(2.0)) - &(&k1 * &t1))
            - &(&k * &tau3);
        Ok(Self {
            speed: v.truncate(degree),
            det: d.det().truncate(degree),
            kappa: k,
            kappa_prime: k1,
            kappa_second: k2,
            tau,
            tau_prime: t1,
            twist,
            vertex_reg,
        })
    }

    pub fn jet(&self, c: Certificate) -> &Jet {
        match c {
            Certificate::Tau => &self.tau,
            Certificate::TauPrime => &self.tau_prime,
            Certificate::Vertex => &self.vertex_reg,
            Certificate::Twist => &self.twist,
            Certificate::SpeedCritical => unreachable!("speed critical points are not Frenet quantities"),
        }
    }

    /// Dilation-covariant magnitude against which `c` is compared with zero.
    pub fn scale(&self, c: Certificate) -> f64 {
        let k = self.kappa.value();
        let k1 = self.kappa_prime.value();
        let k2 = self.kappa_second.value();
        let t = self.tau.value();
        let t1 = self.tau_prime.value();
        match c {
            Certificate::Tau => k,
            Certificate::TauPrime => k * k,
            Certificate::Twist => k.powi(3) + (k * t1).abs() + (k1 * t).abs(),
            Certificate::Vertex => {
                k.powi(4) + (t * k2).abs() + (2.0 * t * k1 * k1 / k).abs() + (k1 * t1).abs() + (k * t.powi(3)).abs()
            }
            Certificate::SpeedCritical => unreachable!(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCertificates {
    pub t: f64,
    pub kappa: f64,
    pub kappa_prime: f64,
    pub tau: f64,
    pub tau_prime: f64,
    pub det: f64,
    /// `μ₂′ + μ₁τ`; absent where `τ = 0`.
    pub vertex_cert: Option<f64>,
    pub vertex_reg: f64,
    pub twist_cert: f64,
}

impl FeatureCertificates {
    fn from_jets(t: f64, j: &CertificateJets) -> Self {
        let k = j.kappa.value();
        let tau = j.tau.value();
        let vreg = j.vertex_reg.value();
        Self {
            t,
            kappa: k,
            kappa_prime: j.kappa_prime.value(),
            tau,
            tau_prime: j.tau_prime.value(),
            det: j.det.value(),
            vertex_cert: (tau != 0.0).then(|| -vreg / (k * k * tau * tau)),
            vertex_reg: vreg,
            twist_cert: j.twist.value(),
        }
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        m.insert("kappa".into(), self.kappa);
        m.insert("kappa_prime".into(), self.kappa_prime);
        m.insert("tau".into(), self.tau);
        m.insert("tau_prime".into(), self.tau_prime);
        m.insert("det".into(), self.det);
        if let Some(v) = self.vertex_cert {
            m.insert("vertex_cert".into(), v);
        }
        m.insert("vertex_reg".into(), self.vertex_reg);
        m.insert("twist_cert".into(), self.twist_cert);
        m
    }
}

pub fn feature_certificates<C: ParametricCurve + ?Sized>(curve: &C, t: f64) -> Result<FeatureCertificates> {
    Ok(FeatureCertificates::from_jets(t, &CertificateJets::new(curve, t, 0)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePoint {
    pub kind: FeatureKind,
    pub t: f64,
    pub certificates: BTreeMap<String, f64>,
    /// `|certificate(t)|` at the refined root.
    pub residual: f64,
    /// Name of the certificate whose zero defines the feature.
    pub source: String,
}

/// A maximal run of samples where the Frenet frame does not exist.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrregularInterval {
    pub lo: f64,
    pub hi: f64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureScan {
    pub features: Vec<FeaturePoint>,
    pub irregular: Vec<IrregularInterval>,
}

impl FeatureScan {
    pub fn of_kind(&self, kind: FeatureKind) -> impl Iterator<Item = &FeaturePoint> {
        self.features.iter().filter(move |f| f.kind == kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CuspCertificate {
    pub is_space_cusp: bool,
    pub speed: f64,
    pub acceleration: f64,
    /// `|γ″ × γ‴|`.
    pub cross23: f64,
}

/// Space-cusp test `γ′ = 0`, `γ″ ≠ 0`, `γ″ × γ‴ ≠ 0` on the 3-jet.
pub fn detect_cusp<C: ParametricCurve + ?Sized>(curve: &C, t: f64) -> Result<CuspCertificate> {
    let g = curve.jets(t, 3)?;
    let d1 = g.derivative_value(1);
    let d2 = g.derivative_value(2);
    let d3 = g.derivative_value(3);
    let speed = d1.norm();
    let acceleration = d2.norm();
    let cross23 = d2.cross(&d3).norm();
    let is_space_cusp = speed <= REGULARITY_TOL * acceleration.max(1.0)
        && acceleration > REGULARITY_TOL
        && cross23 > INFLECTION_TOL * (acceleration * d3.norm()).max(acceleration * acceleration);
    Ok(CuspCertificate {
        is_space_cusp,
        speed,
        acceleration,
        cross23,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VertexIdentity {
    /// `κ″ − (2κ′²/κ + κ′τ′/τ + κτ²)`.
    pub residual: f64,
    /// Sum of the magnitudes of the terms.
    pub scale: f64,
}

pub fn vertex_kappa_identity<C: ParametricCurve + ?Sized>(curve: &C, t: f64) -> Result<VertexIdentity> {
    let j = CertificateJets::new(curve, t, 0)?;
    let k = j.kappa.value();
    let k1 = j.kappa_prime.value();
    let k2 = j.kappa_second.value();
    let tau = j.tau.value();
    let t1 = j.tau_prime.value();
    if !(tau.abs() > 1e-10 * k) {
        return Err(Error::ZeroTorsion { t, tau });
    }
    let terms = [2.0 * k1 * k1 / k, k1 * t1 / tau, k * tau * tau];
    Ok(VertexIdentity {
        residual: k2 - terms.iter().sum::<f64>(),
        scale: k2.abs() + terms.iter().map(|x| x.abs()).sum::<f64>(),
    })
}

pub fn default_samples(interval: (f64, f64)) -> usize {
    ((interval.1 - interval.0) * DEFAULT_SAMPLES_PER_UNIT).ceil().max(MIN_SAMPLES as f64) as usize
}

struct Sample {
    t: f64,
    frenet: std::result::Result<CertificateJets, Error>,
    speed_critical: f64,
    speed_scale: f64,
}

fn sample<C: ParametricCurve + ?Sized>(curve: &C, t: f64) -> Result<Sample> {
    let g = curve.jets(t, 2)?;
    let d1 = g.derivative_value(1);
    let d2 = g.derivative_value(2);
    let frenet = CertificateJets::new(curve, t, 0);
    if let Err(e) = &frenet {
        if !matches!(e, Error::Regularity { .. } | Error::Inflection { .. } | Error::Jet(_)) {
            return Err(e.clone());
        }
    }
    Ok(Sample {
        t,
        frenet,
        speed_critical: d1.dot(&d2),
        speed_scale: d1.norm() * d2.norm(),
    })
}

/// Value, slope and scale of a certificate at `t`.
fn certificate_at<C: ParametricCurve + ?Sized>(curve: &C, c: Certificate, t: f64) -> Result<(f64, f64, f64)> {
    if c == Certificate::SpeedCritical {
        let g = curve.jets(t, 3)?;
        let v = g.derivative();
        let a = v.derivative();
        let f = v.truncate(1).dot(&a);
        let scale = v.value().norm() * a.value().norm() + a.value().norm_squared();
        return Ok((f.value(), f.coeff(1), scale));
    }
    let j = CertificateJets::new(curve, t, 1)?;
    let f = j.jet(c);
    Ok((f.value(), f.coeff(1), j.scale(c)))
}

/// Safeguarded Newton iteration inside a sign-change bracket. `Ok(None)`
/// means the sign change is a pole or crosses a singular point.
fn refine_bracket<C: ParametricCurve + ?Sized>(
    curve: &C,
    c: Certificate,
    mut lo: f64,
    mut hi: f64,
    flo: f64,
) -> Result<Option<(f64, f64, f64)>> {
    let (blo, bhi) = (lo, hi);
    let neg_lo = flo < 0.0;
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, slope, scale) = match certificate_at(curve, c, t) {
            Ok(x) => x,
            Err(_) => return Ok(None),
        };
        if v.abs() <= ROOT_TOL * scale {
            return Ok(Some((t, v.abs(), scale)));
        }
        if (v < 0.0) == neg_lo {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= 4.0 * f64::EPSILON * t.abs().max(1e-300) {
            let r = v.abs();
            if r <= ROOT_ACCEPT_TOL * scale {
                return Ok(Some((t, r, scale)));
            }
            if r > POLE_TOL * scale {
                return Ok(None);
            }
            return Err(Error::NonConvergence { lo: blo, hi: bhi });
        }
        let newton = t - v / slope;
        t = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::NonConvergence { lo: blo, hi: bhi })
}

/// Refines a zero of `c` in `[lo, hi]` where the endpoint values differ in sign.
pub fn refine_certificate_root<C: ParametricCurve + ?Sized>(
    curve: &C,
    c: Certificate,
    lo: f64,
    hi: f64,
) -> Result<Option<FeaturePoint>> {
    let (flo, _, slo) = certificate_at(curve, c, lo)?;
    if flo.abs() <= ROOT_TOL * slo {
        return point_for(curve, c, lo, flo.abs()).map(Some);
    }
    let (fhi, _, shi) = certificate_at(curve, c, hi)?;
    if fhi.abs() <= ROOT_TOL * shi {
        return point_for(curve, c, hi, fhi.abs()).map(Some);
    }
    if (flo < 0.0) == (fhi < 0.0) {
        return Ok(None);
    }
    match refine_bracket(curve, c, lo, hi, flo)? {
        Some((t, r, _)) => point_for(curve, c, t, r).map(Some),
        None => Ok(None),
    }
}

fn point_for<C: ParametricCurve + ?Sized>(curve: &C, c: Certificate, t: f64, residual: f64) -> Result<FeaturePoint> {
    let kind = match c {
        Certificate::Tau => FeatureKind::Flattening,
        Certificate::TauPrime => FeatureKind::BiFlattening,
        Certificate::Vertex => FeatureKind::Vertex,
        Certificate::Twist => FeatureKind::Twisting,
        Certificate::SpeedCritical => FeatureKind::Cusp,
    };
    let certificates = if c == Certificate::SpeedCritical {
        let cc = detect_cusp(curve, t)?;
        BTreeMap::from([
            ("speed".to_string(), cc.speed),
            ("acceleration".to_string(), cc.acceleration),
            ("cross23".to_string(), cc.cross23),
            ("space_cusp".to_string(), f64::from(u8::from(cc.is_space_cusp))),
        ])
    } else {
        feature_certificates(curve, t)?.to_map()
    };
    Ok(FeaturePoint {
        kind,
        t,
        certificates,
        residual,
        source: c.name().to_string(),
    })
}

/// Grid values of one certificate: `None` where the frame does not exist.
fn grid_values(samples: &[Sample], c: Certificate) -> Vec<Option<(f64, f64)>> {
    samples
        .iter()
        .map(|s| match c {
            Certificate::SpeedCritical => Some((s.speed_critical, s.speed_scale)),
            _ => s.frenet.as_ref().ok().map(|j| (j.jet(c).value(), j.scale(c))),
        })
        .collect()
}

fn is_degenerate(values: &[Option<(f64, f64)>]) -> Option<f64> {
    let defined: Vec<_> = values.iter().flatten().collect();
    if defined.is_empty() {
        return None;
    }
    let zeros = defined.iter().filter(|(v, s)| v.abs() <= DEGENERATE_TOL * s).count();
    let frac = zeros as f64 / defined.len() as f64;
    (frac >= DEGENERATE_FRACTION).then_some(frac)
}

/// Brackets `(lo, hi, f(lo))` and exact grid zeros of a certificate.
fn brackets(samples: &[Sample], values: &[Option<(f64, f64)>]) -> (Vec<f64>, Vec<(f64, f64, f64)>) {
    let mut exact = Vec::new();
    let mut br = Vec::new();
    for i in 0..values.len() {
        if let Some((v, _)) = values[i] {
            if v == 0.0 {
                exact.push(samples[i].t);
                continue;
            }
            if let Some(Some((w, _))) = values.get(i + 1) {
                if *w != 0.0 && (v < 0.0) != (*w < 0.0) {
                    br.push((samples[i].t, samples[i + 1].t, v));
                }
            }
        }
    }
    (exact, br)
}

fn find_roots<C: ParametricCurve + Sync + ?Sized>(
    curve: &C,
    c: Certificate,
    samples: &[Sample],
    values: &[Option<(f64, f64)>],
) -> Result<Vec<(f64, f64)>> {
    let (exact, br) = brackets(samples, values);
    let refined: Vec<Option<(f64, f64, f64)>> = br
        .par_iter()
        .map(|&(lo, hi, flo)| refine_bracket(curve, c, lo, hi, flo))
        .collect::<Result<_>>()?;
    let mut roots: Vec<(f64, f64)> = exact.into_iter().map(|t| (t, 0.0)).collect();
    roots.extend(refined.into_iter().flatten().map(|(t, r, _)| (t, r)));
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(roots)
}

fn merge(roots: Vec<(f64, f64)>, tol: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for r in roots {
        match out.last_mut() {
            Some(last) if (r.0 - last.0).abs() < tol => {
                if r.1 < last.1 {
                    *last = r;
                }
            }
            _ => out.push(r),
        }
    }
    out
}

pub fn scan_features<C: ParametricCurve + Sync + ?Sized>(
    curve: &C,
    interval: (f64, f64),
    samples: usize,
) -> Result<FeatureScan> {
    let (lo, hi) = interval;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Schema("scan interval must satisfy lo < hi".into()));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::Schema(format!("samples must be at least {MIN_SAMPLES}, got {samples}")));
    }
    let grid: Vec<Sample> = (0..=samples)
        .into_par_iter()
        .map(|i| sample(curve, lo + (hi - lo) * i as f64 / samples as f64))
        .collect::<Result<_>>()?;
    let merge_tol = (hi - lo) / samples as f64 / 10.0;

    let mut features = Vec::new();
    let mut push_roots = |c: Certificate, kind_filter: &dyn Fn(&FeaturePoint) -> bool| -> Result<Vec<(f64, f64)>> {
        let values = grid_values(&grid, c);
        if let Some(frac) = is_degenerate(&values) {
            if c != Certificate::SpeedCritical {
                features.push(FeaturePoint {
                    kind: FeatureKind::Degenerate,
                    t: lo,
                    certificates: BTreeMap::from([
                        ("interval_lo".to_string(), lo),
                        ("interval_hi".to_string(), hi),
                        ("zero_fraction".to_string(), frac),
                    ]),
                    residual: 0.0,
                    source: c.name().to_string(),
                });
            }
            return Ok(Vec::new());
        }
        let roots = merge(find_roots(curve, c, &grid, &values)?, merge_tol);
        let mut kept = Vec::new();
        for (t, r) in roots {
            let p = point_for(curve, c, t, r)?;
            if kind_filter(&p) {
                kept.push((t, r));
                features.push(p);
            }
        }
        Ok(kept)
    };

    let tau_prime_roots = {
        let values = grid_values(&grid, Certificate::TauPrime);
        if is_degenerate(&values).is_some() {
            Vec::new()
        } else {
            merge(find_roots(curve, Certificate::TauPrime, &grid, &values)?, merge_tol)
        }
    };
    push_roots(Certificate::Tau, &|_| true)?;
    push_roots(Certificate::Vertex, &|p| {
        p.certificates["tau"].abs() > 1e-8 * p.certificates["kappa"]
    })?;
    push_roots(Certificate::Twist, &|_| true)?;
    push_roots(Certificate::SpeedCritical, &|p| {
        p.certificates["speed"] <= REGULARITY_TOL * p.certificates["acceleration"].max(1.0)
    })?;

    for f in features.iter_mut().filter(|f| f.kind == FeatureKind::Flattening) {
        if tau_prime_roots.iter().any(|&(t, _)| (t - f.t).abs() < merge_tol) {
            f.kind = FeatureKind::BiFlattening;
        }
    }
    features.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.kind.cmp(&b.kind)));

    Ok(FeatureScan {
        features,
        irregular: irregular_runs(&grid),
    })
}

fn irregular_runs(grid: &[Sample]) -> Vec<IrregularInterval> {
    let mut out: Vec<IrregularInterval> = Vec::new();
    let mut open = false;
    for s in grid {
        match &s.frenet {
            Err(e) => {
                if open {
                    let last = out.last_mut().expect("open run");
                    last.hi = s.t;
                } else {
                    out.push(IrregularInterval {
                        lo: s.t,
                        hi: s.t,
                        error: e.clone(),
                    });
                    open = true;
                }
            }
            Ok(_) => open = false,
        }
    }
    out
}

/// Regular and non-inflectional at `t`.
pub fn is_frenet_point<C: ParametricCurve + ?Sized>(curve: &C, t: f64) -> Result<bool> {
    let g = curve.jets(t, 2)?;
    let d1 = g.derivative_value(1);
    let d2 = g.derivative_value(2);
    Ok(check_regular(t, d1).is_ok() && check_noninflectional(t, d1, d2).is_ok())
}
