//! Jet-space strata of space cusps and the bifurcation sets of two-parameter
//! cusp families.
//!
//! Along a family `γ_s` the singular point is followed by the root `t*(s)` of
//! `⟨γ_s′, γ_s″⟩` continued from the cusp of `γ₀`. Each stratum has a
//! certificate evaluated at `t*(s)`:
//!
//! * `F`: `det(γ′, γ″, γ‴)`;
//! * `V`: the `A₄` condition of the distance-squared function, i.e. solvability
//!   of `d′ = d″ = d‴ = d⁗ = 0` for the center, a `4×4` determinant;
//! * `T`: the numerator of `(τ/κ)′` with its positive factor cleared;
//! * `C`: `|γ′|`, located by solving `γ_s′(t) = 0` in `(t, s)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix4, Rotation3, SymmetricEigen, Vector3, DMatrix, DVector, Matrix2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::detect_cusp;
use crate::geometry::{det3, JetVec3, RigidMotion, Vec3};
use crate::model::{model_family_g, ParametricCurve, ParametricFamily};

pub const DEFAULT_GRID: usize = 256;
/// Points used for the tangent fit at the origin.
pub const TANGENT_FIT_POINTS: usize = 5;
/// Polyline residual bound relative to the certificate scale.
pub const LOCUS_TOL: f64 = 1e-9;
/// Half-width of the window for the separation polynomial fit.
pub const CONTACT_WINDOW: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stratum {
    C,
    F,
    V,
    T,
}

impl Stratum {
    pub const ALL: [Stratum; 4] = [Stratum::C, Stratum::F, Stratum::V, Stratum::T];

    pub fn name(self) -> &'static str {
        match self {
            Stratum::C => "C",
            Stratum::F => "F",
            Stratum::V => "V",
            Stratum::T => "T",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "C" | "c" => Some(Stratum::C),
            "F" | "f" => Some(Stratum::F),
            "V" | "v" => Some(Stratum::V),
            "T" | "t" => Some(Stratum::T),
            _ => None,
        }
    }
}

/// Taylor coefficients `(aᵢ, bᵢ, cᵢ)`, `i = 1..k`, of a map germ `ℝ → ℝ³`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetCoefficients {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl JetCoefficients {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || b.len() != c.len() || a.len() < 4 {
            return Err(Error::Schema(format!(
                "jet coefficient lists need equal lengths k ≥ 4, got {}, {}, {}",
                a.len(),
                b.len(),
                c.len()
            )));
        }
        Ok(Self { a, b, c })
    }

    /// Orders `1..=degree` of a vector jet.
    pub fn from_jets(j: &JetVec3) -> Result<Self> {
        let k = j.degree();
        let take = |i: usize| j.0[i].coeffs()[1..].to_vec();
        if k < 4 {
            return Err(Error::Schema(format!("jet degree {k} below 4")));
        }
        Self::new(take(0), take(1), take(2))
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// `(aᵢ, bᵢ, cᵢ)`.
    pub fn q(&self, i: usize) -> Vec3 {
        let g = |v: &[f64]| v.get(i.wrapping_sub(1)).copied().unwrap_or(0.0);
        Vec3::new(g(&self.a), g(&self.b), g(&self.c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StratumValues {
    /// `(a₁, b₁, c₁)`.
    pub c_residual: [f64; 3],
    /// `a₁(b₂c₃−b₃c₂) + b₁(a₃c₂−a₂c₃) + c₁(a₂b₃−a₃b₂)`.
    pub f_value: f64,
    /// `ξ = 24 (q₂ × q₃) |q₂|²`.
    pub xi: [f64; 3],
    /// `a₁ξ₁ + b₁ξ₂ + c₁ξ₃`.
    pub v_linear_part: f64,
    /// `(a₁a₂+b₁b₂+c₁c₂, F, |q₁×q₂|⁴)`: the factors of the leading product.
    pub t_components: [f64; 3],
    /// `36 |q₁×q₂|⁴ (q₁·q₂) F`.
    pub t_leading: f64,
}

pub fn stratum_values(j: &JetCoefficients) -> StratumValues {
    let (q1, q2, q3) = (j.q(1), j.q(2), j.q(3));
    let f = det3(&q1, &q2, &q3);
    let xi = q2.cross(&q3) * (24.0 * q2.norm_squared());
    let quad = q1.cross(&q2).norm_squared();
    let dot = q1.dot(&q2);
    StratumValues {
        c_residual: q1.into(),
        f_value: f,
        xi: xi.into(),
        v_linear_part: q1.dot(&xi),
        t_components: [dot, f, quad * quad],
        t_leading: 36.0 * quad * quad * dot * f,
    }
}

/// Derivatives `γ′, …, γ⁗` at a point.
#[derive(Debug, Clone, Copy)]
struct Derivs {
    d: [Vec3; 4],
}

impl Derivs {
    fn of(j: &JetVec3) -> Self {
        Self {
            d: [1, 2, 3, 4].map(|k| j.derivative_value(k)),
        }
    }
}

/// `(value, scale)` of the certificate of `stratum` from the 4-jet at a point.
fn certificate_from(stratum: Stratum, g: &Derivs) -> (f64, f64) {
    let [v, a, j, q] = g.d;
    match stratum {
        Stratum::C => (v.norm(), a.norm()),
        Stratum::F => (det3(&v, &a, &j), v.norm() * a.norm() * j.norm()),
        Stratum::V => {
            let rows = [
                [v.x, v.y, v.z, 0.0],
                [a.x, a.y, a.z, v.norm_squared()],
                [j.x, j.y, j.z, 3.0 * v.dot(&a)],
                [q.x, q.y, q.z, 4.0 * j.dot(&v) + 3.0 * a.norm_squared()],
            ];
            let m = Matrix4::from_fn(|r, c| rows[r][c]);
            let scale = rows
                .iter()
                .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt())
                .product::<f64>();
            (m.determinant(), scale)
        }
        Stratum::T => {
            let w = v.cross(&a);
            let w1 = v.cross(&j);
            let det = w.dot(&j);
            let det1 = w.dot(&q);
            let (nv, na, nj, nq) = (v.norm(), a.norm(), j.norm(), q.norm());
            let p = v.norm_squared() * (det1 * w.norm_squared() - 3.0 * det * w.dot(&w1))
                + 3.0 * det * v.dot(&a) * w.norm_squared();
            let (hw, hw1, hd, hd1) = (nv * na, nv * nj, nv * na * nj, nv * na * nq);
            let scale = nv * nv * (hd1 * hw * hw + 3.0 * hd * hw * hw1) + 3.0 * hd * nv * na * hw * hw;
            (p, scale)
        }
    }
}

/// Certificate of `stratum` on the curve `curve` at `t`.
pub fn curve_stratum_certificate<C: ParametricCurve + ?Sized>(
    curve: &C,
    stratum: Stratum,
    t: f64,
) -> Result<(f64, f64)> {
    let j = curve.jets(t, 4)?;
    Ok(certificate_from(stratum, &Derivs::of(&j)))
}

/// Cusp parameter of `γ₀`: the space cusp with smallest speed in the t-range.
pub fn find_cusp<F: ParametricFamily + ?Sized>(family: &F) -> Result<f64> {
    let curve = SliceRef { family, s: [0.0; 2] };
    let (lo, hi) = family.t_range();
    let n = 2048;
    let speeds: Vec<(f64, f64)> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / n as f64;
            curve.jets(t, 1).map(|j| (t, j.derivative_value(1).norm()))
        })
        .collect::<Result<_>>()?;
    let mid = 0.5 * (lo + hi);
    let mut candidates: Vec<f64> = Vec::new();
    for i in 0..=n {
        let left = if i > 0 { speeds[i - 1].1 } else { f64::INFINITY };
        let right = if i < n { speeds[i + 1].1 } else { f64::INFINITY };
        if speeds[i].1 <= left && speeds[i].1 <= right {
            candidates.push(speeds[i].0);
        }
    }
    let h = (hi - lo) / n as f64;
    let mut best: Option<(f64, f64)> = None;
    for c in candidates {
        let Ok(t) = newton_speed_critical(&curve, c, (c - h).max(lo), (c + h).min(hi)) else {
            continue;
        };
        let cert = detect_cusp(&curve, t)?;
        if cert.is_space_cusp {
            let key = (cert.speed, (t - mid).abs());
            if best.is_none_or(|(bt, bs)| key < (bs, (bt - mid).abs())) {
                best = Some((t, cert.speed));
            }
        }
    }
    best.map(|(t, _)| t).ok_or_else(|| {
        Error::NoCuspAtOrigin(format!(
            "no point of the s = 0 slice in [{lo}, {hi}] passes the space-cusp test"
        ))
    })
}

/// `⟨γ′, γ″⟩` and its `t`-derivative.
fn speed_critical<C: ParametricCurve + ?Sized>(curve: &C, t: f64) -> Result<(f64, f64, f64)> {
    let j = curve.jets(t, 3)?;
    let v = j.derivative_value(1);
    let a = j.derivative_value(2);
    let b = j.derivative_value(3);
    let g = v.dot(&a);
    let dg = a.norm_squared() + v.dot(&b);
    Ok((g, dg, v.norm() * a.norm() + a.norm_squared() + v.norm() * b.norm()))
}

fn newton_speed_critical<C: ParametricCurve + ?Sized>(curve: &C, start: f64, lo: f64, hi: f64) -> Result<f64> {
    let mut t = start;
    for _ in 0..60 {
        let (g, dg, scale) = speed_critical(curve, t)?;
        if g.abs() <= 1e-15 * scale {
            return Ok(t);
        }
        let step = g / dg;
        let next = t - step;
        if !next.is_finite() || next < lo || next > hi {
            return Err(Error::NonConvergence { lo, hi });
        }
        if (next - t).abs() <= 4.0 * f64::EPSILON * t.abs().max(1e-300) {
            return Ok(next);
        }
        t = next;
    }
    Err(Error::NonConvergence { lo, hi })
}

struct SliceRef<'a, F: ?Sized> {
    family: &'a F,
    s: [f64; 2],
}

impl<F: ParametricFamily + ?Sized> ParametricCurve for SliceRef<'_, F> {
    fn jets(&self, t0: f64, degree: usize) -> Result<JetVec3> {
        self.family.jets_at(t0, self.s, degree)
    }
    fn domain(&self) -> (f64, f64) {
        self.family.t_range()
    }
}

/// Follows `t*(s)` from the cusp parameter along the segment `0 → s`.
pub struct RootTracker<'a, F: ?Sized> {
    family: &'a F,
    t0: f64,
}

impl<'a, F: ParametricFamily + ?Sized> RootTracker<'a, F> {
    pub fn new(family: &'a F) -> Result<Self> {
        Ok(Self {
            t0: find_cusp(family)?,
            family,
        })
    }

    pub fn cusp_parameter(&self) -> f64 {
        self.t0
    }

    pub fn track(&self, s: [f64; 2]) -> Result<f64> {
        let (lo, hi) = self.family.t_range();
        let max_jump = 0.1 * (hi - lo);
        let mut t = self.t0;
        let mut done = 0.0_f64;
        let mut step = 1.0_f64;
        while done < 1.0 {
            let target = (done + step).min(1.0);
            let slice = SliceRef {
                family: self.family,
                s: [s[0] * target, s[1] * target],
            };
            match newton_speed_critical(&slice, t, lo, hi) {
                Ok(next) if (next - t).abs() <= max_jump => {
                    t = next;
                    done = target;
                    step *= 2.0;
                }
                _ => {
                    step *= 0.5;
                    if step < 1.0 / 4096.0 {
                        return Err(Error::LostTrack {
                            last_good: [s[0] * done, s[1] * done],
                        });
                    }
                }
            }
        }
        Ok(t)
    }

    /// `(value, scale, t*)` of the certificate of `stratum` at `s`.
    pub fn certificate(&self, stratum: Stratum, s: [f64; 2]) -> Result<(f64, f64, f64)> {
        let t = self.track(s)?;
        let j = self.family.jets_at(t, s, 4)?;
        let (v, sc) = certificate_from(stratum, &Derivs::of(&j));
        Ok((v, sc, t))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumLocus {
    pub stratum: Stratum,
    pub polyline: Vec<[f64; 2]>,
    pub tangent_direction: Option<[f64; 2]>,
    /// Certificate values at the polyline points.
    pub residuals: Vec<f64>,
    /// Certificate scales at the polyline points.
    pub scales: Vec<f64>,
    /// Tracked singular parameter `t*(s)` at the polyline points.
    pub t_star: Vec<f64>,
}

impl StratumLocus {
    pub fn max_relative_residual(&self) -> f64 {
        self.residuals
            .iter()
            .zip(&self.scales)
            .map(|(r, s)| if *s > 0.0 { r.abs() / s } else { r.abs() })
            .fold(0.0, f64::max)
    }

    pub fn nearest_to_origin(&self) -> Option<f64> {
        self.polyline.iter().map(|p| p[0].hypot(p[1])).min_by(f64::total_cmp)
    }
}

#[derive(Debug, Clone, Copy)]
struct LocusPoint {
    s: [f64; 2],
    value: f64,
    scale: f64,
    t: f64,
}

/// Bisection on the segment `p → q` where the certificate changes sign.
fn bisect_segment<F: ParametricFamily + ?Sized>(
    tracker: &RootTracker<'_, F>,
    stratum: Stratum,
    p: [f64; 2],
    q: [f64; 2],
    fp: f64,
) -> Result<LocusPoint> {
    let at = |u: f64| [p[0] + u * (q[0] - p[0]), p[1] + u * (q[1] - p[1])];
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let neg = fp < 0.0;
    let mut best: Option<LocusPoint> = None;
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        let s = at(mid);
        let (v, sc, t) = tracker.certificate(stratum, s)?;
        let pt = LocusPoint { s, value: v, scale: sc, t };
        if best.is_none_or(|b| v.abs() * b.scale.max(f64::MIN_POSITIVE) < b.value.abs() * sc.max(f64::MIN_POSITIVE)) {
            best = Some(pt);
        }
        if v == 0.0 || hi - lo <= 2.0 * f64::EPSILON {
            break;
        }
        if (v < 0.0) == neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.expect("at least one bisection step"))
}

fn grid_axis(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..=n).map(|i| range.0 + (range.1 - range.0) * i as f64 / n as f64).collect()
}

/// Zero crossings of the certificate on a circle of radius `r` about the origin.
fn circle_crossings<F: ParametricFamily + ?Sized>(
    tracker: &RootTracker<'_, F>,
    stratum: Stratum,
    r: f64,
    samples: usize,
) -> Result<Vec<(f64, LocusPoint)>> {
    let pt = |theta: f64| [r * theta.cos(), r * theta.sin()];
    let vals: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let th = 2.0 * PI * i as f64 / samples as f64;
            tracker.certificate(stratum, pt(th)).map(|(v, _, _)| (th, v))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 0..samples {
        let (a, fa) = vals[i];
        let (b, fb) = if i + 1 < samples { vals[i + 1] } else { (2.0 * PI, vals[0].1) };
        if fa == 0.0 {
            let (v, sc, t) = tracker.certificate(stratum, pt(a))?;
            out.push((a, LocusPoint { s: pt(a), value: v, scale: sc, t }));
        } else if fb != 0.0 && (fa < 0.0) != (fb < 0.0) {
            let (mut lo, mut hi) = (a, b);
            let neg = fa < 0.0;
            let mut last = None;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let (v, sc, t) = tracker.certificate(stratum, pt(mid))?;
                last = Some((mid, LocusPoint { s: pt(mid), value: v, scale: sc, t }));
                if v == 0.0 || hi - lo <= 4.0 * f64::EPSILON {
                    break;
                }
                if (v < 0.0) == neg {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(last.expect("bisection ran"));
        }
    }
    Ok(out)
}

/// Principal direction of a point cloud about the origin.
fn principal_direction(points: &[[f64; 2]]) -> [f64; 2] {
    let mut m = Matrix2::zeros();
    for p in points {
        m[(0, 0)] += p[0] * p[0];
        m[(0, 1)] += p[0] * p[1];
        m[(1, 1)] += p[1] * p[1];
    }
    m[(1, 0)] = m[(0, 1)];
    let e = SymmetricEigen::new(m);
    let i = if e.eigenvalues[0] >= e.eigenvalues[1] { 0 } else { 1 };
    let mut d = [e.eigenvectors[(0, i)], e.eigenvectors[(1, i)]];
    canonical_direction(&mut d);
    d
}

/// Sign convention: first nonzero component positive.
fn canonical_direction(d: &mut [f64; 2]) {
    let n = d[0].hypot(d[1]);
    d[0] /= n;
    d[1] /= n;
    if d[0] < 0.0 || (d[0] == 0.0 && d[1] < 0.0) {
        d[0] = -d[0];
        d[1] = -d[1];
    }
}

pub fn trace_bifurcation<F: ParametricFamily + ?Sized>(
    family: &F,
    stratum: Stratum,
    s_box: [(f64, f64); 2],
    grid: usize,
) -> Result<StratumLocus> {
    let tracker = RootTracker::new(family)?;
    trace_with(&tracker, stratum, s_box, grid)
}

fn trace_with<F: ParametricFamily + ?Sized>(
    tracker: &RootTracker<'_, F>,
    stratum: Stratum,
    s_box: [(f64, f64); 2],
    grid: usize,
) -> Result<StratumLocus> {
    if grid < 4 {
        return Err(Error::Schema(format!("grid must be at least 4, got {grid}")));
    }
    if stratum == Stratum::C {
        return trace_cusp_stratum(tracker);
    }
    let xs = grid_axis(s_box[0], grid);
    let ys = grid_axis(s_box[1], grid);
    let n = grid + 1;
    let nodes: Vec<Vec<(f64, f64, f64)>> = ys
        .par_iter()
        .map(|&y| xs.iter().map(|&x| tracker.certificate(stratum, [x, y])).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    // Segments with a sign change, plus nodes where the certificate is exactly zero.
    let mut exact = Vec::new();
    let mut segments = Vec::new();
    for (iy, row) in nodes.iter().enumerate() {
        for ix in 0..n {
            let (v, sc, t) = row[ix];
            let here = [xs[ix], ys[iy]];
            if v == 0.0 {
                exact.push(LocusPoint { s: here, value: v, scale: sc, t });
                continue;
            }
            if ix + 1 < n {
                let w = row[ix + 1].0;
                if w != 0.0 && (v < 0.0) != (w < 0.0) {
                    segments.push((here, [xs[ix + 1], ys[iy]], v));
                }
            }
            if iy + 1 < n {
                let w = nodes[iy + 1][ix].0;
                if w != 0.0 && (v < 0.0) != (w < 0.0) {
                    segments.push((here, [xs[ix], ys[iy + 1]], v));
                }
            }
        }
    }
    let mut points: Vec<LocusPoint> = segments
        .par_iter()
        .map(|&(p, q, fp)| bisect_segment(tracker, stratum, p, q, fp))
        .collect::<Result<_>>()?;
    points.extend(exact);

    // Probe circles inside the first grid cell feed the tangent fit.
    let spacing = ((s_box[0].1 - s_box[0].0) / grid as f64).min((s_box[1].1 - s_box[1].0) / grid as f64);
    let contains_origin = s_box[0].0 < 0.0 && s_box[0].1 > 0.0 && s_box[1].0 < 0.0 && s_box[1].1 > 0.0;
    if contains_origin {
        for k in 0..4 {
            let r = spacing * 0.5_f64.powi(k);
            for (_, p) in circle_crossings(tracker, stratum, r, 256)? {
                points.push(p);
            }
        }
    }
    points.retain(|p| p.s[0].is_finite() && p.s[1].is_finite());
    points.sort_by(|a, b| a.s[0].total_cmp(&b.s[0]).then(a.s[1].total_cmp(&b.s[1])));
    points.dedup_by(|a, b| (a.s[0] - b.s[0]).abs() <= 1e-15 && (a.s[1] - b.s[1]).abs() <= 1e-15);

    let locus_points: Vec<[f64; 2]> = points.iter().map(|p| p.s).collect();
    let tangent_direction = if contains_origin && locus_points.len() >= TANGENT_FIT_POINTS {
        Some(fit_tangent(&locus_points))
    } else {
        None
    };
    let axis = tangent_direction.unwrap_or_else(|| {
        if locus_points.is_empty() {
            [1.0, 0.0]
        } else {
            principal_direction(&locus_points)
        }
    });
    points.sort_by(|a, b| {
        let pa = a.s[0] * axis[0] + a.s[1] * axis[1];
        let pb = b.s[0] * axis[0] + b.s[1] * axis[1];
        pa.total_cmp(&pb)
    });
    Ok(StratumLocus {
        stratum,
        polyline: points.iter().map(|p| p.s).collect(),
        tangent_direction,
        residuals: points.iter().map(|p| p.value).collect(),
        scales: points.iter().map(|p| p.scale).collect(),
        t_star: points.iter().map(|p| p.t).collect(),
    })
}

/// Solves `γ_s′(t) = 0` for `(t, s)` by Newton's method from `(t₀, 0)`.
fn trace_cusp_stratum<F: ParametricFamily + ?Sized>(tracker: &RootTracker<'_, F>) -> Result<StratumLocus> {
    let family = tracker.family;
    let velocity = |t: f64, s: [f64; 2]| -> Result<Vec3> { Ok(family.jets_at(t, s, 1)?.derivative_value(1)) };
    let mut x = Vector3::new(tracker.t0, 0.0, 0.0);
    let h = 1e-6;
    for _ in 0..50 {
        let s = [x[1], x[2]];
        let j = family.jets_at(x[0], s, 2)?;
        let f = j.derivative_value(1);
        if f.norm() <= 1e-15 * j.derivative_value(2).norm().max(1.0) {
            break;
        }
        let ds1 = (velocity(x[0], [s[0] + h, s[1]])? - velocity(x[0], [s[0] - h, s[1]])?) / (2.0 * h);
        let ds2 = (velocity(x[0], [s[0], s[1] + h])? - velocity(x[0], [s[0], s[1] - h])?) / (2.0 * h);
        let jac = Matrix3::from_columns(&[j.derivative_value(2), ds1, ds2]);
        let Some(step) = jac.lu().solve(&f) else {
            return Err(Error::NonConvergence { lo: x[0], hi: x[0] });
        };
        x -= step;
        if step.norm() <= 1e-16 * x.norm().max(1e-300) {
            break;
        }
    }
    let s = [x[1], x[2]];
    let j = family.jets_at(x[0], s, 2)?;
    let speed = j.derivative_value(1).norm();
    let scale = j.derivative_value(2).norm();
    if !(speed <= 1e-10 * scale.max(1.0)) {
        return Err(Error::NonConvergence { lo: x[0], hi: x[0] });
    }
    Ok(StratumLocus {
        stratum: Stratum::C,
        polyline: vec![s],
        tangent_direction: None,
        residuals: vec![speed],
        scales: vec![scale],
        t_star: vec![x[0]],
    })
}

/// Direction at the origin from the points nearest to it, re-fitted twice
/// on the points inside shrinking radii.
fn fit_tangent(points: &[[f64; 2]]) -> [f64; 2] {
    let mut by_r: Vec<[f64; 2]> = points.to_vec();
    by_r.sort_by(|a, b| a[0].hypot(a[1]).total_cmp(&b[0].hypot(b[1])));
    let nearest = &by_r[..TANGENT_FIT_POINTS.min(by_r.len())];
    let mut d = principal_direction(nearest);
    let mut radius = nearest.last().map_or(0.0, |p| p[0].hypot(p[1]));
    for _ in 0..2 {
        radius *= 0.5;
        let inside: Vec<[f64; 2]> = by_r.iter().copied().filter(|p| p[0].hypot(p[1]) <= radius).collect();
        if inside.len() < 2 {
            break;
        }
        let e = principal_direction(&inside);
        if e[0] * d[0] + e[1] * d[1] != 0.0 {
            d = e;
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactData {
    /// Direction of the reference line.
    pub reference: [f64; 2],
    /// Fitted `y ≈ c₂x² + c₃x³ + c₄x⁴ + c₅x⁵` of the separation in graph coordinates.
    pub coefficients: [f64; 4],
    /// Log-log slope of `|y|` against `|x|`.
    pub exponent: f64,
    /// `exponent` rounded; the fit order when the locus lies on the line.
    pub order: usize,
    /// Exponent at least 2.
    pub tangent: bool,
    pub coincident: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentCone {
    pub direction: [f64; 2],
    pub contact: ContactData,
}

pub fn tangent_cone(locus: &StratumLocus) -> Result<TangentCone> {
    let direction = locus_direction(locus)?;
    let contact = contact_data(locus, direction)?;
    Ok(TangentCone { direction, contact })
}

/// Tangent direction of the locus with contact data against `reference`.
pub fn tangent_cone_against(locus: &StratumLocus, reference: [f64; 2]) -> Result<TangentCone> {
    let direction = locus_direction(locus)?;
    let contact = contact_data(locus, reference)?;
    Ok(TangentCone { direction, contact })
}

fn locus_direction(locus: &StratumLocus) -> Result<[f64; 2]> {
    if locus.polyline.len() < TANGENT_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            found: locus.polyline.len(),
        });
    }
    Ok(match locus.tangent_direction {
        Some(d) => d,
        None => fit_tangent(&locus.polyline),
    })
}

fn contact_data(locus: &StratumLocus, reference: [f64; 2]) -> Result<ContactData> {
    let mut reference = reference;
    canonical_direction(&mut reference);
    let [d1, d2] = reference;
    // Graph coordinates over s₁, switching to s₂ only for references steeper
    // than slope 2, so near-diagonal lines have a fixed convention.
    let over_s1 = d1.abs() >= 0.5 * d2.abs();
    let graph: Vec<(f64, f64)> = locus
        .polyline
        .iter()
        .map(|p| {
            if over_s1 {
                (p[0], p[1] - d2 / d1 * p[0])
            } else {
                (p[1], p[0] - d1 / d2 * p[1])
            }
        })
        .filter(|(x, _)| x.abs() <= CONTACT_WINDOW && x.abs() > 0.0)
        .collect();
    if graph.len() < 8 {
        return Err(Error::InsufficientPoints { found: graph.len() });
    }
    let xmax = graph.iter().fold(0.0_f64, |m, (x, _)| m.max(x.abs()));
    let m = DMatrix::from_fn(graph.len(), 4, |r, c| (graph[r].0 / xmax).powi(c as i32 + 2));
    let rhs = DVector::from_iterator(graph.len(), graph.iter().map(|g| g.1));
    let sol = m
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .expect("least-squares solve with full SVD");
    let coefficients = [0, 1, 2, 3].map(|i| sol[i] / xmax.powi(i as i32 + 2));

    let ymax = graph.iter().fold(0.0_f64, |m, (_, y)| m.max(y.abs()));
    let coincident = ymax <= 1e-12 * xmax;
    let (exponent, order) = if coincident {
        (6.0, 6)
    } else {
        let pts: Vec<(f64, f64)> = graph
            .iter()
            .filter(|(x, y)| x.abs() >= 0.1 * xmax && y.abs() > 1e-14 * xmax)
            .map(|(x, y)| (x.abs().ln(), y.abs().ln()))
            .collect();
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / n, sy / n);
        let (sxy, sxx) = pts
            .iter()
            .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx) * (p.0 - mx)));
        let e = sxy / sxx;
        (e, e.round().max(0.0) as usize)
    };
    Ok(ContactData {
        reference,
        coefficients,
        exponent,
        order,
        tangent: order >= 2,
        coincident,
    })
}

/// Coefficients of the family in the cusp-adapted frame at `s = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptedCoefficients {
    pub t0: f64,
    /// Taylor coefficients of `(x, y, z)` at `t₀`, index = order.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(skip)]
    pub motion: RigidMotion,
}

/// Rigid motion taking the cusp to the origin, `γ″(t₀)` to `+x` and the
/// normal part of the cubic term to `+y`.
pub fn adapted_coefficients<F: ParametricFamily + ?Sized>(family: &F, t0: f64, degree: usize) -> Result<AdaptedCoefficients> {
    let (m, motion) = tangent_aligned(family, t0, degree)?;
    let q3 = m.coeff(3);
    let turn = RigidMotion::new(rotation_about_x(-q3.z.atan2(q3.y)), Vec3::zeros());
    let m = m.transform(&turn);
    Ok(AdaptedCoefficients {
        t0,
        a: m.0[0].coeffs().to_vec(),
        b: m.0[1].coeffs().to_vec(),
        c: m.0[2].coeffs().to_vec(),
        motion: turn.compose(&motion),
    })
}

/// Jets at `s = 0` after the first stage of the adaptation: `γ″(t₀)` along `+x`.
fn tangent_aligned<F: ParametricFamily + ?Sized>(family: &F, t0: f64, degree: usize) -> Result<(JetVec3, RigidMotion)> {
    let j = family.jets_at(t0, [0.0; 2], degree)?;
    let a2 = j.coeff(2);
    let rot = RigidMotion::align_to_x(a2)
        .ok_or_else(|| Error::FrameAdaptation("γ″ vanishes at the cusp".into()))?;
    let motion = RigidMotion::new(rot, -(rot * j.value()));
    let m = j.transform(&motion);
    let q3 = m.coeff(3);
    if !(q3.y.hypot(q3.z) > 1e-12 * q3.norm().max(a2.norm())) {
        return Err(Error::FrameAdaptation("cubic term has no normal component".into()));
    }
    Ok((m, motion))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericityReport {
    pub generic: bool,
    pub t0: f64,
    /// `a₂·|(b₃, c₃)|`: the cubic normal part measured after turning it onto `+y`.
    pub a2b3: f64,
    /// `b₄c₃ − b₃c₄`, invariant under rotations about the cusp tangent.
    pub b4c3_minus_b3c4: f64,
    /// `det ∂(b₁, c₁)/∂(s₁, s₂)` at `s = 0`.
    pub parameter_jacobian: f64,
    pub failures: Vec<String>,
}

/// Central-difference step for the parameter Jacobian.
const JACOBIAN_STEP: f64 = 1e-5;
const GENERICITY_TOL: f64 = 1e-8;

pub fn frs_genericity<F: ParametricFamily + ?Sized>(family: &F) -> Result<GenericityReport> {
    let t0 = find_cusp(family)?;
    // Both products are invariant under the turn about `+x`, so they are read
    // in the tangent-aligned frame where no rounding from that turn enters.
    let (m, motion) = tangent_aligned(family, t0, 4)?;
    let a2 = m.0[0].coeff(2);
    let (b3, c3, b4, c4) = (m.0[1].coeff(3), m.0[2].coeff(3), m.0[1].coeff(4), m.0[2].coeff(4));
    let a2b3 = a2 * b3.hypot(c3);
    let cross = b4 * c3 - b3 * c4;

    let linear = |s: [f64; 2]| -> Result<[f64; 2]> {
        let j = family.jets_at(t0, s, 1)?.transform(&motion);
        Ok([j.0[1].coeff(1), j.0[2].coeff(1)])
    };
    let h = JACOBIAN_STEP;
    let (p1, m1) = (linear([h, 0.0])?, linear([-h, 0.0])?);
    let (p2, m2) = (linear([0.0, h])?, linear([0.0, -h])?);
    let col1 = [(p1[0] - m1[0]) / (2.0 * h), (p1[1] - m1[1]) / (2.0 * h)];
    let col2 = [(p2[0] - m2[0]) / (2.0 * h), (p2[1] - m2[1]) / (2.0 * h)];
    let jac = col1[0] * col2[1] - col1[1] * col2[0];

    let scale3 = a2.abs().max(b3.hypot(c3)).max(b4.hypot(c4)).max(1.0);
    let mut failures = Vec::new();
    if !(a2b3.abs() > GENERICITY_TOL * scale3 * scale3) {
        failures.push(format!("a2*b3 = {a2b3:e} vanishes"));
    }
    if !(cross.abs() > GENERICITY_TOL * scale3 * scale3) {
        failures.push(format!("b4*c3 - b3*c4 = {cross:e} vanishes"));
    }
    let jscale = (col1[0].hypot(col1[1]) * col2[0].hypot(col2[1])).max(1e-300);
    if !(jac.abs() > 1e-6 * jscale.max(1.0)) {
        failures.push(format!("parameter map has singular derivative (det = {jac:e})"));
    }
    Ok(GenericityReport {
        generic: failures.is_empty(),
        t0,
        a2b3,
        b4c3_minus_b3c4: cross,
        parameter_jacobian: jac,
        failures,
    })
}

/// Closed-form leading parts of the loci for families in normal form
/// `(a₂t²+a₃t³+a₄t⁴, s₁t+b₃t³+b₄t⁴, s₂t+c₃t³+c₄t⁴)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalFormLaws {
    pub a2: f64,
    pub a3: f64,
    pub b3: f64,
    pub b4: f64,
    pub c3: f64,
    pub c4: f64,
}

impl NormalFormLaws {
    /// Coefficients of `γ₀` at the cusp, read without any change of frame.
    pub fn of_family<F: ParametricFamily + ?Sized>(family: &F) -> Result<Self> {
        let t0 = find_cusp(family)?;
        let j = family.jets_at(t0, [0.0; 2], 4)?;
        let [x, y, z] = &j.0;
        Ok(Self {
            a2: x.coeff(2),
            a3: x.coeff(3),
            b3: y.coeff(3),
            b4: y.coeff(4),
            c3: z.coeff(3),
            c4: z.coeff(4),
        })
    }

    /// Slope `c₃/b₃` of the `F` line.
    pub fn f_slope(&self) -> f64 {
        self.c3 / self.b3
    }

    /// `24a₂³(b₃s₂ − c₃s₁) + 48a₂(b₃s₁ + c₃s₂)(b₃s₂ − c₃s₁)`.
    pub fn v_implicit(&self, s: [f64; 2]) -> f64 {
        let l = self.b3 * s[1] - self.c3 * s[0];
        24.0 * self.a2.powi(3) * l + 48.0 * self.a2 * (self.b3 * s[0] + self.c3 * s[1]) * l
    }

    /// Cubic coefficient of the `V` parametrization over `s₁`.
    pub fn v_cubic(&self) -> f64 {
        self.a3 * (self.b3 * self.b3 + self.c3 * self.c3) * (self.b3 * self.c4 - self.b4 * self.c3)
            / (self.a2.powi(3) * self.b3.powi(4))
    }

    /// `(4a₂b₄ − 9a₃b₃)s₂ + (9a₃c₃ − 4a₂c₄)s₁`.
    pub fn t_numerator(&self, s: [f64; 2]) -> f64 {
        (4.0 * self.a2 * self.b4 - 9.0 * self.a3 * self.b3) * s[1]
            + (9.0 * self.a3 * self.c3 - 4.0 * self.a2 * self.c4) * s[0]
    }

    /// Unit direction of the zero line of [`Self::t_numerator`].
    pub fn t_direction(&self) -> [f64; 2] {
        let p = 4.0 * self.a2 * self.b4 - 9.0 * self.a3 * self.b3;
        let q = 9.0 * self.a3 * self.c3 - 4.0 * self.a2 * self.c4;
        let mut d = [p, -q];
        canonical_direction(&mut d);
        d
    }
}

/// Unsigned angle between two lines through the origin.
pub fn line_angle(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dot = (a[0] * b[0] + a[1] * b[1]).abs() / (a[0].hypot(a[1]) * b[0].hypot(b[1]));
    dot.min(1.0).acos()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stratification {
    /// Strata whose locus reaches the origin.
    pub strata_through_origin: Vec<Stratum>,
    pub fv_separation_exponent: f64,
    pub fv_separation_order: usize,
    pub fv_tangent: bool,
    pub t_transverse: bool,
    /// Half-branch labels in counterclockwise order on a small circle.
    pub cyclic_order: Vec<Stratum>,
    pub tangents: BTreeMap<String, [f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelComparison {
    pub family: Stratification,
    pub model: Stratification,
    pub genericity: GenericityReport,
    pub matches: bool,
    pub mismatches: Vec<String>,
}

/// Angle below which two tangent lines count as equal.
const TANGENT_ANGLE_TOL: f64 = 1e-3;

pub fn stratification<F: ParametricFamily + ?Sized>(family: &F, grid: usize) -> Result<Stratification> {
    let tracker = RootTracker::new(family)?;
    let s_box = family.s_box();
    let spacing = ((s_box[0].1 - s_box[0].0) / grid as f64).min((s_box[1].1 - s_box[1].0) / grid as f64);
    let mut through = Vec::new();
    let c = trace_with(&tracker, Stratum::C, s_box, grid)?;
    if c.nearest_to_origin().is_some_and(|r| r <= spacing) {
        through.push(Stratum::C);
    }
    let mut loci = BTreeMap::new();
    for st in [Stratum::F, Stratum::V, Stratum::T] {
        let l = trace_with(&tracker, st, s_box, grid)?;
        if l.nearest_to_origin().is_some_and(|r| r <= 2.0 * spacing) {
            through.push(st);
        }
        loci.insert(st, l);
    }
    let mut tangents = BTreeMap::new();
    for (st, l) in &loci {
        tangents.insert(st.name().to_string(), locus_direction(l)?);
    }
    let fdir = tangents["F"];
    let vcone = tangent_cone_against(&loci[&Stratum::V], fdir)?;
    let t_transverse = line_angle(tangents["T"], fdir) > TANGENT_ANGLE_TOL;

    let half = 0.5 * (s_box[0].1 - s_box[0].0).min(s_box[1].1 - s_box[1].0);
    let rho = 0.05 * half;
    let mut crossings: Vec<(f64, Stratum)> = Vec::new();
    for st in [Stratum::F, Stratum::V, Stratum::T] {
        for (theta, _) in circle_crossings(&tracker, st, rho, 2048)? {
            crossings.push((theta, st));
        }
    }
    crossings.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(Stratification {
        strata_through_origin: through,
        fv_separation_exponent: vcone.contact.exponent,
        fv_separation_order: vcone.contact.order,
        fv_tangent: vcone.contact.tangent && line_angle(vcone.direction, fdir) <= TANGENT_ANGLE_TOL,
        t_transverse,
        cyclic_order: crossings.into_iter().map(|c| c.1).collect(),
        tangents,
    })
}

/// Smallest representative of a cyclic sequence under rotation and reflection.
pub fn canonical_cycle(seq: &[Stratum]) -> Vec<Stratum> {
    let n = seq.len();
    let mut best: Option<Vec<Stratum>> = None;
    let mut rev = seq.to_vec();
    rev.reverse();
    for base in [seq.to_vec(), rev] {
        for k in 0..n.max(1) {
            let rot: Vec<Stratum> = (0..n).map(|i| base[(i + k) % n]).collect();
            if best.as_ref().is_none_or(|b| rot < *b) {
                best = Some(rot);
            }
        }
    }
    best.unwrap_or_default()
}

pub fn compare_to_model<F: ParametricFamily + ?Sized>(family: &F, grid: usize) -> Result<ModelComparison> {
    let genericity = frs_genericity(family)?;
    if !genericity.generic {
        return Err(Error::NotGeneric(genericity.failures.join("; ")));
    }
    let fam = stratification(family, grid)?;
    let model = stratification(&model_family_g(), grid)?;
    let mut mismatches = Vec::new();
    if fam.strata_through_origin.len() != model.strata_through_origin.len() {
        mismatches.push(format!(
            "strata through the origin: {} vs {}",
            fam.strata_through_origin.len(),
            model.strata_through_origin.len()
        ));
    }
    if fam.fv_tangent != model.fv_tangent || fam.fv_separation_order != model.fv_separation_order {
        mismatches.push(format!(
            "F/V contact: order {} (tangent {}) vs {} (tangent {})",
            fam.fv_separation_order, fam.fv_tangent, model.fv_separation_order, model.fv_tangent
        ));
    }
    if fam.t_transverse != model.t_transverse {
        mismatches.push("T transversality differs".into());
    }
    if canonical_cycle(&fam.cyclic_order) != canonical_cycle(&model.cyclic_order) {
        mismatches.push(format!(
            "cyclic order {:?} vs {:?}",
            fam.cyclic_order, model.cyclic_order
        ));
    }
    Ok(ModelComparison {
        matches: mismatches.is_empty(),
        family: fam,
        model,
        genericity,
        mismatches,
    })
}

/// Rotation about `+x` by `angle`, for building test frames.
pub fn rotation_about_x(angle: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vec3::x_axis(), angle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DeformationFamily;

    fn jc(a: &[f64], b: &[f64], c: &[f64]) -> JetCoefficients {
        JetCoefficients::new(a.to_vec(), b.to_vec(), c.to_vec()).unwrap()
    }

    #[test]
    fn strata_of_model_jets() {
        let fr = jc(&[1., 0., 0., 0.], &[0., 1., 0., 0.], &[0., 0., 0., 1.]);
        assert_eq!(stratum_values(&fr).f_value, 0.0);
        let cusp = jc(&[0., 1., 0., 0.], &[0., 0., 1., 0.], &[0., 0., 0., 0.]);
        assert_eq!(stratum_values(&cusp).c_residual, [0.0; 3]);
        let generic = jc(&[1., 0.3, -0.2, 0.1], &[0., 0.7, 0.4, 0.], &[0., 0.2, 0.9, 0.]);
        assert!(stratum_values(&generic).f_value.abs() > 1e-3);
        assert!(JetCoefficients::new(vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]).is_err());
    }

    #[test]
    fn v_linear_part_is_a_multiple_of_f() {
        let j = jc(&[0.3, 1.2, -0.4, 0.2], &[0.1, 0.5, 0.8, -0.3], &[-0.2, 0.4, 0.6, 0.7]);
        let v = stratum_values(&j);
        let q2 = j.q(2);
        assert!((v.v_linear_part - 24.0 * q2.norm_squared() * v.f_value).abs() < 1e-13);
    }

    #[test]
    fn g_is_in_normal_form() {
        let g = model_family_g();
        assert_eq!(find_cusp(&g).unwrap(), 0.0);
        let r = frs_genericity(&g).unwrap();
        assert!(r.generic, "{:?}", r.failures);
        assert_eq!(r.b4c3_minus_b3c4, 2.0);
        assert!((r.parameter_jacobian - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_generic_families() {
        let same = DeformationFamily::parse(
            "t^2",
            "s1*t + t^3 + t^4",
            "s2*t + t^3 + t^4",
            (-0.5, 0.5),
            [(-0.2, 0.2); 2],
        )
        .unwrap();
        let r = frs_genericity(&same).unwrap();
        assert!(!r.generic);
        assert_eq!(r.b4c3_minus_b3c4, 0.0);
        let flat = DeformationFamily::parse("t^2", "s1*t + t^3", "0*s2*t", (-0.5, 0.5), [(-0.2, 0.2); 2]).unwrap();
        let r = frs_genericity(&flat).unwrap();
        assert!(r.a2b3.abs() > 0.0);
        assert!(r.parameter_jacobian.abs() < 1e-9);
        assert!(!r.generic);
    }

    #[test]
    fn no_cusp_is_reported() {
        let regular = DeformationFamily::parse("t", "t^2 + s1", "t^3 + s2", (-0.5, 0.5), [(-0.1, 0.1); 2]).unwrap();
        assert!(matches!(find_cusp(&regular), Err(Error::NoCuspAtOrigin(_))));
    }

    #[test]
    fn g_f_locus_is_the_diagonal() {
        let g = model_family_g();
        let f = trace_bifurcation(&g, Stratum::F, g.s_box, 32).unwrap();
        let d = f.tangent_direction.unwrap();
        assert!((d[1] / d[0] - 1.0).abs() < 1e-9);
        assert!(f.max_relative_residual() <= LOCUS_TOL);
        let c = trace_bifurcation(&g, Stratum::C, g.s_box, 32).unwrap();
        assert_eq!(c.polyline.len(), 1);
        assert!(c.polyline[0][0].abs() < 1e-12 && c.polyline[0][1].abs() < 1e-12);
    }

    #[test]
    fn cyclic_canonical_form() {
        use Stratum::*;
        let a = [F, V, T, V, F, T];
        let mut b = a;
        b.rotate_left(2);
        b.reverse();
        assert_eq!(canonical_cycle(&a), canonical_cycle(&b));
        assert_ne!(canonical_cycle(&[F, V, T, F, V, T]), canonical_cycle(&a));
    }
}
