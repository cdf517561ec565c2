//! Frenet apparatus, height and distance-squared jets, `A_k` classification,
//! finite-jet versality, and sphere contact.
//!
//! Arc-length derivatives are never obtained by reparametrizing: a quantity
//! known as a jet in `t` is differentiated with `d/ds = (1/|γ′|) d/dt`
//! applied through the speed jet.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{det3, JetVec3, Vec3};
use crate::jet::{factorial, sqrt_unchecked, Jet, DEFAULT_DEGREE};
use crate::model::ParametricCurve;

/// `|γ′(t₀)|` at or below this is a singular point.
pub const REGULARITY_TOL: f64 = 1e-9;
/// Relative bound on `|γ′×γ″|` against `max(|γ′|², |γ′||γ″|)`.
pub const INFLECTION_TOL: f64 = 1e-10;
/// Relative threshold below which a Taylor coefficient counts as zero.
pub const SINGULARITY_TOL: f64 = 1e-8;

/// Jets of the first three derivatives of a curve, all truncated to one degree.
#[derive(Debug, Clone)]
pub struct DerivativeJets {
    pub velocity: JetVec3,
    pub acceleration: JetVec3,
    pub jerk: JetVec3,
}

impl DerivativeJets {
    pub fn new<C: ParametricCurve + ?Sized>(curve: &C, t0: f64, degree: usize) -> Result<Self> {
        let g = curve.jets(t0, degree + 3)?;
        let v = g.derivative();
        let a = v.derivative();
        let j = a.derivative();
        Ok(Self {
            velocity: v.truncate(degree),
            acceleration: a.truncate(degree),
            jerk: j,
        })
    }

    pub fn degree(&self) -> usize {
        self.jerk.degree()
    }

    pub fn speed_squared(&self) -> Jet {
        self.velocity.dot(&self.velocity)
    }

    pub fn cross(&self) -> JetVec3 {
        self.velocity.cross(&self.acceleration)
    }

    /// `det(γ′, γ″, γ‴)` as a jet.
    pub fn det(&self) -> Jet {
        self.cross().dot(&self.jerk)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FrenetData {
    pub t0: f64,
    pub tangent: [f64; 3],
    pub normal: [f64; 3],
    pub binormal: [f64; 3],
    /// Taylor coefficients of `κ` in arc length from `t₀`.
    #[serde(skip)]
    pub kappa_jet: Jet,
    /// Taylor coefficients of `τ` in arc length from `t₀`.
    #[serde(skip)]
    pub tau_jet: Jet,
    /// `|γ′|` as a jet in `t`.
    #[serde(skip)]
    pub speed_jet: Jet,
    /// `κ` as a jet in `t`.
    #[serde(skip)]
    pub kappa_t: Jet,
    /// `τ` as a jet in `t`.
    #[serde(skip)]
    pub tau_t: Jet,
}

impl FrenetData {
    pub fn t(&self) -> Vec3 {
        Vec3::from(self.tangent)
    }
    pub fn n(&self) -> Vec3 {
        Vec3::from(self.normal)
    }
    pub fn b(&self) -> Vec3 {
        Vec3::from(self.binormal)
    }
    pub fn kappa(&self) -> f64 {
        self.kappa_jet.value()
    }
    pub fn tau(&self) -> f64 {
        self.tau_jet.value()
    }
    pub fn speed(&self) -> f64 {
        self.speed_jet.value()
    }
    /// `j`-th arc-length derivative of `κ` at `t₀`.
    pub fn kappa_ds(&self, j: usize) -> f64 {
        self.kappa_jet.derivative_value(j)
    }
    /// `j`-th arc-length derivative of `τ` at `t₀`.
    pub fn tau_ds(&self, j: usize) -> f64 {
        self.tau_jet.derivative_value(j)
    }
}

pub(crate) fn check_regular(t0: f64, velocity: Vec3) -> Result<()> {
    let speed = velocity.norm();
    if !(speed > REGULARITY_TOL) {
        return Err(Error::Regularity { t: t0, speed });
    }
    Ok(())
}

pub(crate) fn check_noninflectional(t0: f64, velocity: Vec3, acceleration: Vec3) -> Result<()> {
    let cross = velocity.cross(&acceleration).norm();
    let speed = velocity.norm();
    let scale = (speed * speed).max(speed * acceleration.norm());
    if !(cross > INFLECTION_TOL * scale) {
        return Err(Error::Inflection { t: t0, cross });
    }
    Ok(())
}

pub fn frenet_apparatus<C: ParametricCurve + ?Sized>(curve: &C, t0: f64) -> Result<FrenetData> {
    frenet_apparatus_with_degree(curve, t0, DEFAULT_DEGREE)
}

pub fn frenet_apparatus_with_degree<C: ParametricCurve + ?Sized>(
    curve: &C,
    t0: f64,
    degree: usize,
) -> Result<FrenetData> {
    let d = DerivativeJets::new(curve, t0, degree)?;
    frenet_from_derivatives(&d, t0)
}

pub fn frenet_from_derivatives(d: &DerivativeJets, t0: f64) -> Result<FrenetData> {
    let v0 = d.velocity.value();
    let a0 = d.acceleration.value();
    check_regular(t0, v0)?;
    check_noninflectional(t0, v0, a0)?;

    let speed = sqrt_unchecked(&d.speed_squared());
    let w = d.cross();
    let w2 = w.dot(&w);
    let kappa_t = &sqrt_unchecked(&w2) / &(&(&speed * &speed) * &speed);
    let tau_t = &d.det() / &w2;

    let t_vec = v0.normalize();
    let b_vec = v0.cross(&a0).normalize();
    let n_vec = b_vec.cross(&t_vec);
    Ok(FrenetData {
        t0,
        tangent: t_vec.into(),
        normal: n_vec.into(),
        binormal: b_vec.into(),
        kappa_jet: arc_length_jet(&kappa_t, &speed),
        tau_jet: arc_length_jet(&tau_t, &speed),
        speed_jet: speed,
        kappa_t,
        tau_t,
    })
}

/// `df/ds` as a jet in `t`, one degree lower than `f`.
pub fn arc_derivative(f: &Jet, speed: &Jet) -> Jet {
    let df = f.derivative();
    &df / &speed.truncate(df.degree())
}

pub fn arc_derivative_vec(f: &JetVec3, speed: &Jet) -> JetVec3 {
    let df = f.derivative();
    df.div_jet(&speed.truncate(df.degree()))
}

/// Taylor coefficients in arc length of a quantity given as a jet in `t`,
/// built from `(Dʲf)(t₀)/j!` with `D = (1/|γ′|) d/dt`.
pub fn arc_length_jet(f: &Jet, speed: &Jet) -> Jet {
    let k = f.degree();
    let mut coeffs = Vec::with_capacity(k + 1);
    coeffs.push(f.value());
    let mut d = f.clone();
    for j in 1..=k {
        d = arc_derivative(&d, speed);
        coeffs.push(d.value() / factorial(j));
    }
    Jet::from_raw(coeffs, f.base())
}

/// Same coefficients as [`arc_length_jet`] by reverting the arc-length
/// function and composing.
pub fn arc_length_jet_by_reversion(f: &Jet, speed: &Jet) -> Result<Jet> {
    let k = f.degree();
    let mut s = vec![0.0; k + 1];
    for j in 1..=k {
        s[j] = speed.coeff(j - 1) / j as f64;
    }
    let s = Jet::new(s, f.base())?;
    let h = s.try_revert()?;
    Ok(f.try_compose(&h)?)
}

/// `d/ds` applied `n` times to a vector jet, as a jet in `t`.
fn arc_derivatives_vec(g: &JetVec3, speed: &Jet, n: usize) -> Vec<JetVec3> {
    let mut out = Vec::with_capacity(n);
    let mut cur = g.clone();
    for _ in 0..n {
        cur = arc_derivative_vec(&cur, speed);
        out.push(cur.clone());
    }
    out
}

/// Unit tangent `γ′/|γ′|` viewed as a curve.
#[derive(Debug, Clone)]
pub struct TangentIndicatrix<C>(pub C);

impl<C: ParametricCurve> ParametricCurve for TangentIndicatrix<C> {
    fn jets(&self, t0: f64, degree: usize) -> Result<JetVec3> {
        let v = self.0.jets(t0, degree + 1)?.derivative();
        check_regular(t0, v.value())?;
        let speed = sqrt_unchecked(&v.dot(&v));
        Ok(v.div_jet(&speed))
    }
    fn domain(&self) -> (f64, f64) {
        self.0.domain()
    }
}

/// `½⟨γ − a, γ − a⟩` as a jet at `t₀`.
pub fn distance_squared_jet<C: ParametricCurve + ?Sized>(
    curve: &C,
    t0: f64,
    center: &Vec3,
    degree: usize,
) -> Result<Jet> {
    let r = curve.jets(t0, degree)?.sub_point(center);
    Ok(r.dot(&r).scale(0.5))
}

/// `⟨γ, u⟩` as a jet at `t₀`.
pub fn height_jet<C: ParametricCurve + ?Sized>(
    curve: &C,
    t0: f64,
    direction: &Vec3,
    degree: usize,
) -> Result<Jet> {
    let norm = direction.norm();
    if !((norm - 1.0).abs() <= 1e-10) {
        return Err(Error::NonUnitDirection { norm });
    }
    let g = curve.jets(t0, degree)?;
    let [x, y, z] = &g.0;
    Ok(&(&x.scale(direction.x) + &y.scale(direction.y)) + &z.scale(direction.z))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AkClass {
    NonSingular,
    A(usize),
    DegenerateBeyondK,
}

/// `A_k` type of the germ at the basepoint. A Taylor coefficient `cⱼ`, `j ≥ 1`,
/// vanishes when `|cⱼ| ≤ 1e-8·scale`.
pub fn classify_ak(f: &Jet, scale: f64) -> AkClass {
    let thr = SINGULARITY_TOL * scale;
    if f.coeff(1).abs() > thr {
        return AkClass::NonSingular;
    }
    (2..=f.degree())
        .find(|&j| f.coeff(j).abs() > thr)
        .map_or(AkClass::DegenerateBeyondK, |j| AkClass::A(j - 1))
}

/// [`classify_ak`] with `scale = max_{j≥1} |cⱼ|`.
pub fn classify_ak_auto(f: &Jet) -> AkClass {
    let scale = f.coeffs()[1..].iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    classify_ak(f, scale)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VersalityCertificate {
    pub versal: bool,
    /// Rank of `{1, Ḟ₁, …, Ḟ_m}` in `E/⟨f′⟩ ≅ ℝ{1, t, …, t^{k−1}}`.
    pub rank: usize,
    pub target_dimension: usize,
    pub deficit: usize,
}

/// Finite-jet `R⁺`-versality of an unfolding of an `A_k` germ `f`.
///
/// For `f` of type `A_k` the ideal `⟨f′⟩` is `m^k`, so the quotient is spanned
/// by `1, t, …, t^{k−1}` and the speeds need only be read to degree `k − 1`.
pub fn versality_test(f: &Jet, k: usize, speeds: &[Jet]) -> Result<VersalityCertificate> {
    if k == 0 || k + 1 > f.degree() {
        return Err(Error::InconsistentDegrees(format!(
            "A_{k} needs a jet of degree at least {}, got {}",
            k + 1,
            f.degree()
        )));
    }
    for (i, sp) in speeds.iter().enumerate() {
        if sp.degree() != f.degree() || sp.base() != f.base() {
            return Err(Error::InconsistentDegrees(format!(
                "speed {i} has degree {} at {}, germ has degree {} at {}",
                sp.degree(),
                sp.base(),
                f.degree(),
                f.base()
            )));
        }
    }
    match classify_ak_auto(f) {
        AkClass::A(j) if j == k => {}
        other => {
            return Err(Error::InconsistentDegrees(format!(
                "germ is {other:?}, not A_{k}"
            )))
        }
    }
    let mut m = DMatrix::<f64>::zeros(k, speeds.len() + 1);
    m[(0, 0)] = 1.0;
    for (col, sp) in speeds.iter().enumerate() {
        for row in 0..k {
            m[(row, col + 1)] = sp.coeff(row);
        }
    }
    let sv = m.singular_values();
    let smax = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
    let rank = sv.iter().filter(|&&s| s > 1e-10 * smax.max(1.0)).count();
    Ok(VersalityCertificate {
        versal: rank == k,
        rank,
        target_dimension: k,
        deficit: k - rank,
    })
}

/// Order of contact of the sphere `(center, radius)` with the curve at `t₀`,
/// using the membership convention `d_γ(t₀) = ½r²`. Zero when the sphere
/// misses `γ(t₀)`.
pub fn sphere_contact_order<C: ParametricCurve + ?Sized>(
    curve: &C,
    t0: f64,
    center: &Vec3,
    radius: f64,
) -> Result<usize> {
    if !(radius > 0.0) {
        return Ok(0);
    }
    let d = distance_squared_jet(curve, t0, center, DEFAULT_DEGREE)?;
    let target = 0.5 * radius * radius;
    if (d.value() - target).abs() > 1e-8 * target.max(1e-300) {
        return Ok(0);
    }
    Ok(match classify_ak_auto(&d) {
        AkClass::NonSingular => 0,
        AkClass::A(k) => k,
        AkClass::DegenerateBeyondK => d.degree(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HelixDefect {
    /// `det(α″, α‴, α⁗)` in arc-length derivatives.
    pub defect: f64,
    /// Torsion vanishes to every computed order; the helix test says nothing.
    pub planar: bool,
}

pub fn helix_defect<C: ParametricCurve + ?Sized>(curve: &C, t0: f64) -> Result<HelixDefect> {
    let degree = 8;
    let g = curve.jets(t0, degree)?;
    let v = g.derivative();
    check_regular(t0, v.value())?;
    let speed = sqrt_unchecked(&v.dot(&v));
    let ds = arc_derivatives_vec(&g, &speed, 4);
    let defect = det3(&ds[1].value(), &ds[2].value(), &ds[3].value());

    let d = DerivativeJets::new(curve, t0, degree - 3)?;
    let det = d.det();
    let scale = d.velocity.value().norm().powi(3).max(d.cross().value().norm()).max(1.0);
    let planar = det.coeffs().iter().all(|c| c.abs() <= 1e-12 * scale);
    Ok(HelixDefect {
        defect: if planar { 0.0 } else { defect },
        planar,
    })
}
