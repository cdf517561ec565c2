#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spacecurve::evolute::NormalizedCurve;
use spacecurve::geometry::{JetVec3, RigidMotion, Vec3};
use spacecurve::jet::Jet;
use spacecurve::{ParametricCurve, Result, SpaceCurve};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(r: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    r.gen_range(lo..hi)
}

/// Uniform in `[lo, hi]` with `|x| ≥ min_abs`.
pub fn nonzero(r: &mut impl Rng, lo: f64, hi: f64, min_abs: f64) -> f64 {
    loop {
        let x = uniform(r, lo, hi);
        if x.abs() >= min_abs {
            return x;
        }
    }
}

/// `(t + a₃t³ + a₄t⁴ + a₅t⁵, b₂t² + … + b₅t⁵, c₃t³ + c₄t⁴ + c₅t⁵)` with
/// `a₃ = −2b₂²/3`, `a₄ = −3b₂b₃/2`, so `|γ′(t)| = 1 + O(t³)` and the Frenet
/// frame at 0 is the coordinate frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalForm {
    pub a5: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub b5: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
}

impl NormalForm {
    pub fn a3(&self) -> f64 {
        -2.0 * self.b2 * self.b2 / 3.0
    }

    pub fn a4(&self) -> f64 {
        -1.5 * self.b2 * self.b3
    }

    pub fn random(r: &mut impl Rng) -> Self {
        let mut c = || uniform(r, -2.0, 2.0);
        let (a5, b3, b4, b5, c3, c4, c5) = (c(), c(), c(), c(), c(), c(), c());
        Self {
            a5,
            b2: uniform(r, 0.5, 2.0),
            b3,
            b4,
            b5,
            c3,
            c4,
            c5,
        }
    }

    /// Random instance with `|c₃| ≥ 0.2`.
    pub fn random_twisted(r: &mut impl Rng) -> Self {
        let mut nf = Self::random(r);
        nf.c3 = nonzero(r, -2.0, 2.0, 0.2);
        nf
    }

    /// `b₂³c₃ + 2a₃b₂c₃ + b₃c₄ − b₄c₃`.
    pub fn vertex_condition(&self) -> f64 {
        self.b2.powi(3) * self.c3 + 2.0 * self.a3() * self.b2 * self.c3 + self.b3 * self.c4 - self.b4 * self.c3
    }

    /// `b₄` solved from the vertex condition.
    pub fn vertex(r: &mut impl Rng) -> Self {
        let mut nf = Self::random_twisted(r);
        nf.b4 = (nf.b2.powi(3) * nf.c3 + 2.0 * nf.a3() * nf.b2 * nf.c3 + nf.b3 * nf.c4) / nf.c3;
        nf
    }

    /// A non-vertex instance: the vertex condition is at least `0.2` away from zero.
    pub fn non_vertex(r: &mut impl Rng) -> Self {
        loop {
            let nf = Self::random_twisted(r);
            if nf.vertex_condition().abs() >= 0.2 {
                return nf;
            }
        }
    }

    /// Flattening at 0: `c₃ = 0`, `|c₄| ≥ 0.2`.
    pub fn flattening(r: &mut impl Rng) -> Self {
        let mut nf = Self::random(r);
        nf.c3 = 0.0;
        nf.c4 = nonzero(r, -2.0, 2.0, 0.2);
        nf
    }

    /// `δ = 4b₂⁴ + 12b₂b₄ − 27b₃²`.
    pub fn delta(&self) -> f64 {
        4.0 * self.b2.powi(4) + 12.0 * self.b2 * self.b4 - 27.0 * self.b3 * self.b3
    }

    /// `δ̃ = 12b₂⁴c₃ − 20b₂²c₅ + 48b₂b₄c₃ + 27b₃²c₃ + 27c₃³`.
    pub fn delta_tilde(&self) -> f64 {
        let (b2, b3, b4, c3, c5) = (self.b2, self.b3, self.b4, self.c3, self.c5);
        12.0 * b2.powi(4) * c3 - 20.0 * b2 * b2 * c5 + 48.0 * b2 * b4 * c3 + 27.0 * b3 * b3 * c3 + 27.0 * c3.powi(3)
    }

    /// Twisting at 0 with `c₄ = 9b₃c₃/(4b₂)` and `|δ| > 0.1`.
    pub fn twisting(r: &mut impl Rng) -> Self {
        loop {
            let mut nf = Self::random_twisted(r);
            nf.c4 = 9.0 * nf.b3 * nf.c3 / (4.0 * nf.b2);
            if nf.delta().abs() > 0.1 {
                return nf;
            }
        }
    }

    pub fn coefficients(&self) -> [Vec<f64>; 3] {
        [
            vec![0.0, 1.0, 0.0, self.a3(), self.a4(), self.a5],
            vec![0.0, 0.0, self.b2, self.b3, self.b4, self.b5],
            vec![0.0, 0.0, 0.0, self.c3, self.c4, self.c5],
        ]
    }

    pub fn curve(&self) -> SpaceCurve {
        let [x, y, z] = self.coefficients();
        SpaceCurve::from_polynomials([&x, &y, &z], (-0.5, 0.5)).expect("polynomial curve")
    }
}

pub fn random_unit(r: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(uniform(r, -1.0, 1.0), uniform(r, -1.0, 1.0), uniform(r, -1.0, 1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn random_motion(r: &mut impl Rng) -> RigidMotion {
    let axis = random_unit(r);
    let angle = uniform(r, -std::f64::consts::PI, std::f64::consts::PI);
    let shift = Vec3::new(uniform(r, -3.0, 3.0), uniform(r, -3.0, 3.0), uniform(r, -3.0, 3.0));
    RigidMotion::from_axis_angle(axis, angle, shift)
}

/// `curve ∘ φ` with `φ(u) = u + 0.3u²`, an orientation-preserving change of
/// parameter on `|u| < 5/3`.
pub struct Reparametrized<C>(pub C);

pub fn phi(u: f64) -> f64 {
    u + 0.3 * u * u
}

impl<C: ParametricCurve> ParametricCurve for Reparametrized<C> {
    fn jets(&self, u0: f64, degree: usize) -> Result<JetVec3> {
        let outer = self.0.jets(phi(u0), degree)?;
        let mut c = vec![0.0; degree + 1];
        if degree >= 1 {
            c[1] = 1.0 + 0.6 * u0;
        }
        if degree >= 2 {
            c[2] = 0.3;
        }
        let inner = Jet::new(c, u0)?;
        let comp = |j: &Jet| -> Result<Jet> {
            let rebased = Jet::new(j.coeffs().to_vec(), u0)?;
            Ok(rebased.try_compose(&inner)?)
        };
        Ok(JetVec3::new(comp(&outer.0[0])?, comp(&outer.0[1])?, comp(&outer.0[2])?))
    }

    fn domain(&self) -> (f64, f64) {
        let (lo, hi) = self.0.domain();
        (phi_inverse(lo), phi_inverse(hi))
    }
}

/// Branch of `φ⁻¹` through 0, defined for `t > −5/6`.
pub fn phi_inverse(t: f64) -> f64 {
    (-1.0 + (1.0 + 1.2 * t).sqrt()) / 0.6
}

/// Central difference of order `k` with step `h`.
fn central_difference(f: &dyn Fn(f64) -> f64, x: f64, k: usize, h: f64) -> f64 {
    let mut sum = 0.0;
    let mut binom = 1.0;
    for i in 0..=k {
        let offset = (k as f64 / 2.0 - i as f64) * h;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * f(x + offset);
        binom = binom * (k - i) as f64 / (i + 1) as f64;
    }
    sum / h.powi(k as i32)
}

/// `f⁽ᵏ⁾(x)` by central differences with Richardson extrapolation
/// (Ridders' tableau): steps shrink by 1.4 from `h`, each new row is
/// extrapolated in `h²`, and the entry with the smallest estimated error is
/// returned together with that estimate.
pub fn richardson_derivative(f: &dyn Fn(f64) -> f64, x: f64, k: usize, h: f64) -> (f64, f64) {
    if k == 0 {
        return (f(x), 0.0);
    }
    const CON: f64 = 1.4;
    const ROWS: usize = 12;
    let con2 = CON * CON;
    let mut a = vec![vec![0.0; ROWS]; ROWS];
    let mut hh = h;
    a[0][0] = central_difference(f, x, k, hh);
    let (mut best, mut err) = (a[0][0], f64::INFINITY);
    for i in 1..ROWS {
        hh /= CON;
        a[0][i] = central_difference(f, x, k, hh);
        let mut fac = con2;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= con2;
            let e = (a[j][i] - a[j - 1][i]).abs().max((a[j][i] - a[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    (best, err)
}

/// [`richardson_derivative`] from several initial steps, keeping the result
/// with the smallest error estimate.
pub fn best_richardson_derivative(f: &dyn Fn(f64) -> f64, x: f64, k: usize) -> f64 {
    [0.05, 0.07, 0.1, 0.15, 0.2, 0.3]
        .iter()
        .map(|&h| richardson_derivative(f, x, k, h))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(d, _)| d)
        .unwrap_or(f64::NAN)
}

/// Coefficients of a normalized curve at the base point, by order.
pub fn normal_form_coefficients<C: ParametricCurve>(curve: C, t0: f64) -> [Vec<f64>; 3] {
    let nc = NormalizedCurve::new(curve, t0).expect("normalizable");
    let c = nc.coefficients(8).expect("coefficients");
    [c.a, c.b, c.c]
}

/// Relative deviation with an absolute floor of 1.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Relative deviation without a floor, falling back to absolute at zero.
pub fn rel_strict(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Random expression in `t` from `sin`, `cos`, `exp`, powers and the field
/// operations. Leaf slopes stay below 1 and denominators are `3 + cos(·)`, so
/// the expressions are analytic in a strip of half-width above 1 around the
/// real axis and seventh derivatives stay moderate.
pub fn random_expression(r: &mut dyn rand::RngCore, depth: usize) -> String {
    let leaf = |r: &mut dyn rand::RngCore| -> String {
        match r.gen_range(0..3) {
            0 => "t".to_string(),
            1 => format!("{:.3}", r.gen_range(-2.0..2.0)),
            _ => format!("({:.3}*t + {:.3})", r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)),
        }
    };
    if depth == 0 {
        return leaf(r);
    }
    let sub = |r: &mut dyn rand::RngCore| random_expression(r, depth - 1);
    match r.gen_range(0..8) {
        0 => format!("sin({})", sub(r)),
        1 => format!("cos({})", sub(r)),
        2 => format!("exp(0.5*sin({}))", sub(r)),
        3 => format!("({} + {})", sub(r), sub(r)),
        4 => format!("({} - {})", sub(r), sub(r)),
        5 => format!("0.5*({} * {})", sub(r), sub(r)),
        6 => format!("({}) / (3 + cos({}))", sub(r), sub(r)),
        _ => format!("(0.5*{})^{}", sub(r), r.gen_range(2..4)),
    }
}
