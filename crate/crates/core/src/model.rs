//! Curves, two-parameter deformation families, and the JSON input format.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse_expression, Expr, Var};
use crate::geometry::{JetVec3, RigidMotion, Vec3};
use crate::jet::{Jet, MAX_DEGREE};

/// Anything that can be expanded as a Taylor jet in its parameter.
pub trait ParametricCurve: Sync {
    fn jets(&self, t0: f64, degree: usize) -> Result<JetVec3>;

    fn domain(&self) -> (f64, f64);

    fn position(&self, t: f64) -> Result<Vec3> {
        Ok(self.jets(t, 0)?.value())
    }
}

impl<C: ParametricCurve + ?Sized> ParametricCurve for &C {
    fn jets(&self, t0: f64, degree: usize) -> Result<JetVec3> {
        (**self).jets(t0, degree)
    }
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    X,
    Y,
    Z,
}

impl Component {
    pub fn index(self) -> usize {
        match self {
            Component::X => 0,
            Component::Y => 1,
            Component::Z => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceCurve {
    pub components: [Expr; 3],
    pub domain: (f64, f64),
    pub label: String,
}

impl SpaceCurve {
    pub fn new(components: [Expr; 3], domain: (f64, f64), label: impl Into<String>) -> Result<Self> {
        check_interval(domain, "t_range")?;
        if components.iter().any(|e| e.uses(Var::S1) || e.uses(Var::S2)) {
            return Err(Error::Schema(
                "curve components may not reference s1 or s2; use kind \"family\"".into(),
            ));
        }
        Ok(Self {
            components,
            domain,
            label: label.into(),
        })
    }

    pub fn parse(x: &str, y: &str, z: &str, domain: (f64, f64)) -> Result<Self> {
        Self::new(
            [parse_expression(x)?, parse_expression(y)?, parse_expression(z)?],
            domain,
            "",
        )
    }

    /// Componentwise polynomials `Σ cⱼ tʲ`.
    pub fn from_polynomials(coeffs: [&[f64]; 3], domain: (f64, f64)) -> Result<Self> {
        Self::new(coeffs.map(Expr::polynomial), domain, "")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

impl ParametricCurve for SpaceCurve {
    fn jets(&self, t0: f64, degree: usize) -> Result<JetVec3> {
        component_jets(&self.components, t0, [0.0; 2], degree)
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeformationFamily {
    pub components: [Expr; 3],
    pub t_range: (f64, f64),
    pub s_box: [(f64, f64); 2],
    pub label: String,
}

impl DeformationFamily {
    pub fn new(
        components: [Expr; 3],
        t_range: (f64, f64),
        s_box: [(f64, f64); 2],
        label: impl Into<String>,
    ) -> Result<Self> {
        check_interval(t_range, "t_range")?;
        check_interval(s_box[0], "s_box[0]")?;
        check_interval(s_box[1], "s_box[1]")?;
        Ok(Self {
            components,
            t_range,
            s_box,
            label: label.into(),
        })
    }

    pub fn parse(x: &str, y: &str, z: &str, t_range: (f64, f64), s_box: [(f64, f64); 2]) -> Result<Self> {
        Self::new(
            [parse_expression(x)?, parse_expression(y)?, parse_expression(z)?],
            t_range,
            s_box,
            "",
        )
    }

    /// The curve `t ↦ γ_s(t)` at fixed parameters.
    pub fn at(&self, s: [f64; 2]) -> FamilySlice<'_> {
        FamilySlice { family: self, s }
    }

    pub fn jets_at(&self, t0: f64, s: [f64; 2], degree: usize) -> Result<JetVec3> {
        component_jets(&self.components, t0, s, degree)
    }

    /// A family is also a curve by freezing `s = (0, 0)`.
    pub fn central_curve(&self) -> Result<SpaceCurve> {
        let zero = |e: &Expr| substitute_params(e, [0.0; 2]);
        SpaceCurve::new(
            [zero(&self.components[0]), zero(&self.components[1]), zero(&self.components[2])],
            self.t_range,
            self.label.clone(),
        )
    }
}

fn substitute_params(e: &Expr, s: [f64; 2]) -> Expr {
    match e {
        Expr::Var(Var::S1) => Expr::Const(s[0]),
        Expr::Var(Var::S2) => Expr::Const(s[1]),
        Expr::Const(_) | Expr::Var(Var::T) => e.clone(),
        Expr::Unary(op, a) => Expr::unary(*op, substitute_params(a, s)),
        Expr::Binary(op, a, b) => Expr::binary(*op, substitute_params(a, s), substitute_params(b, s)),
        Expr::Pow(a, n) => Expr::Pow(Box::new(substitute_params(a, s)), *n),
    }
}

/// A two-parameter family of curves `(t, s) ↦ γ_s(t)`.
pub trait ParametricFamily: Sync {
    fn jets_at(&self, t0: f64, s: [f64; 2], degree: usize) -> Result<JetVec3>;

    fn t_range(&self) -> (f64, f64);

    fn s_box(&self) -> [(f64, f64); 2];

    /// The curve `t ↦ γ_s(t)` at fixed parameters.
    fn slice(&self, s: [f64; 2]) -> FamilySlice<'_, Self>
    where
        Self: Sized,
    {
        FamilySlice { family: self, s }
    }
}

impl ParametricFamily for DeformationFamily {
    fn jets_at(&self, t0: f64, s: [f64; 2], degree: usize) -> Result<JetVec3> {
        DeformationFamily::jets_at(self, t0, s, degree)
    }
    fn t_range(&self) -> (f64, f64) {
        self.t_range
    }
    fn s_box(&self) -> [(f64, f64); 2] {
        self.s_box
    }
}

impl<F: ParametricFamily + ?Sized> ParametricFamily for &F {
    fn jets_at(&self, t0: f64, s: [f64; 2], degree: usize) -> Result<JetVec3> {
        (**self).jets_at(t0, s, degree)
    }
    fn t_range(&self) -> (f64, f64) {
        (**self).t_range()
    }
    fn s_box(&self) -> [(f64, f64); 2] {
        (**self).s_box()
    }
}

#[derive(Debug)]
pub struct FamilySlice<'a, F: ?Sized = DeformationFamily> {
    pub family: &'a F,
    pub s: [f64; 2],
}

impl<F: ?Sized> Clone for FamilySlice<'_, F> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<F: ?Sized> Copy for FamilySlice<'_, F> {}

impl<F: ParametricFamily + ?Sized> ParametricCurve for FamilySlice<'_, F> {
    fn jets(&self, t0: f64, degree: usize) -> Result<JetVec3> {
        self.family.jets_at(t0, self.s, degree)
    }
    fn domain(&self) -> (f64, f64) {
        self.family.t_range()
    }
}

/// A family composed with a rigid motion of space.
#[derive(Debug, Clone)]
pub struct MovedFamily<F> {
    pub family: F,
    pub motion: RigidMotion,
}

impl<F: ParametricFamily> ParametricFamily for MovedFamily<F> {
    fn jets_at(&self, t0: f64, s: [f64; 2], degree: usize) -> Result<JetVec3> {
        Ok(self.family.jets_at(t0, s, degree)?.transform(&self.motion))
    }
    fn t_range(&self) -> (f64, f64) {
        self.family.t_range()
    }
    fn s_box(&self) -> [(f64, f64); 2] {
        self.family.s_box()
    }
}

/// A curve composed with a rigid motion of space.
#[derive(Debug, Clone)]
pub struct Moved<C> {
    pub curve: C,
    pub motion: RigidMotion,
}

impl<C: ParametricCurve> ParametricCurve for Moved<C> {
    fn jets(&self, t0: f64, degree: usize) -> Result<JetVec3> {
        Ok(self.curve.jets(t0, degree)?.transform(&self.motion))
    }
    fn domain(&self) -> (f64, f64) {
        self.curve.domain()
    }
}

fn component_jets(components: &[Expr; 3], t0: f64, s: [f64; 2], degree: usize) -> Result<JetVec3> {
    if degree > MAX_DEGREE {
        return Err(Error::Schema(format!("jet degree {degree} exceeds maximum {MAX_DEGREE}")));
    }
    let x = components[0].eval_jet(t0, s, degree)?;
    let y = components[1].eval_jet(t0, s, degree)?;
    let z = components[2].eval_jet(t0, s, degree)?;
    Ok(JetVec3::new(x, y, z))
}

/// Jet of one component of a family at `(t0, s)`.
pub fn eval_component_jet(
    family: &DeformationFamily,
    component: Component,
    t0: f64,
    s: [f64; 2],
    degree: usize,
) -> Result<Jet> {
    if degree > MAX_DEGREE {
        return Err(Error::Schema(format!("jet degree {degree} exceeds maximum {MAX_DEGREE}")));
    }
    Ok(family.components[component.index()].eval_jet(t0, s, degree)?)
}

fn check_interval(iv: (f64, f64), name: &str) -> Result<()> {
    if !(iv.0.is_finite() && iv.1.is_finite() && iv.0 < iv.1) {
        return Err(Error::Schema(format!("{name} must be a finite interval with lo < hi")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Curve(SpaceCurve),
    Family(DeformationFamily),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDocument {
    kind: String,
    x: Option<String>,
    y: Option<String>,
    z: Option<String>,
    poly: Option<Vec<Vec<f64>>>,
    t_range: [f64; 2],
    s_box: Option<Vec<[f64; 2]>>,
    label: Option<String>,
}

/// Parses and validates a curve or family document.
pub fn load_spec(document: &str) -> Result<Model> {
    let doc: SpecDocument =
        serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))?;
    let components = match (&doc.poly, &doc.x, &doc.y, &doc.z) {
        (Some(_), Some(_), _, _) | (Some(_), _, Some(_), _) | (Some(_), _, _, Some(_)) => {
            return Err(Error::Schema("give either \"poly\" or \"x\",\"y\",\"z\", not both".into()))
        }
        (Some(p), None, None, None) => {
            if p.len() != 3 {
                return Err(Error::Schema(format!(
                    "\"poly\" needs exactly 3 coefficient arrays, got {}",
                    p.len()
                )));
            }
            [Expr::polynomial(&p[0]), Expr::polynomial(&p[1]), Expr::polynomial(&p[2])]
        }
        (None, x, y, z) => {
            let get = |v: &Option<String>, name: &str| {
                v.as_deref()
                    .ok_or_else(|| Error::Schema(format!("missing field `{name}`")))
                    .and_then(parse_expression)
            };
            [get(x, "x")?, get(y, "y")?, get(z, "z")?]
        }
    };
    let t_range = (doc.t_range[0], doc.t_range[1]);
    let label = doc.label.unwrap_or_default();
    match doc.kind.as_str() {
        "curve" => {
            if doc.s_box.is_some() {
                return Err(Error::Schema("\"s_box\" is only valid for kind \"family\"".into()));
            }
            Ok(Model::Curve(SpaceCurve::new(components, t_range, label)?))
        }
        "family" => {
            let s_box = doc
                .s_box
                .ok_or_else(|| Error::Schema("missing field `s_box`".into()))?;
            if s_box.len() != 2 {
                return Err(Error::Schema(format!(
                    "families have exactly two parameters; s_box has {} intervals",
                    s_box.len()
                )));
            }
            let s_box = [(s_box[0][0], s_box[0][1]), (s_box[1][0], s_box[1][1])];
            Ok(Model::Family(DeformationFamily::new(components, t_range, s_box, label)?))
        }
        other => Err(Error::Schema(format!(
            "unknown kind `{other}`, expected \"curve\" or \"family\""
        ))),
    }
}

/// The cusp family `(t²+t³+t⁴, s₁t+t³+t⁴, s₂t+t³−t⁴)` over `|s| ≤ 0.2`.
pub fn model_family_g() -> DeformationFamily {
    DeformationFamily::parse(
        "t^2 + t^3 + t^4",
        "s1*t + t^3 + t^4",
        "s2*t + t^3 - t^4",
        (-0.5, 0.5),
        [(-0.2, 0.2), (-0.2, 0.2)],
    )
    .expect("model family parses")
}
