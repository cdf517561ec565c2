//! Vector-valued jets and rigid motions.

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};

use crate::jet::Jet;

pub type Vec3 = Vector3<f64>;

/// Three component jets sharing degree and basepoint.
#[derive(Debug, Clone, PartialEq)]
pub struct JetVec3(pub [Jet; 3]);

impl JetVec3 {
    pub fn new(x: Jet, y: Jet, z: Jet) -> Self {
        Self([x, y, z])
    }

    pub fn degree(&self) -> usize {
        self.0[0].degree()
    }

    pub fn base(&self) -> f64 {
        self.0[0].base()
    }

    pub fn value(&self) -> Vec3 {
        Vec3::new(self.0[0].value(), self.0[1].value(), self.0[2].value())
    }

    /// Vector of Taylor coefficients of order `j`.
    pub fn coeff(&self, j: usize) -> Vec3 {
        Vec3::new(self.0[0].coeff(j), self.0[1].coeff(j), self.0[2].coeff(j))
    }

    /// Vector of `j`-th derivatives at the basepoint.
    pub fn derivative_value(&self, j: usize) -> Vec3 {
        self.coeff(j) * crate::jet::factorial(j)
    }

    pub fn derivative(&self) -> Self {
        Self(self.0.clone().map(|c| c.derivative()))
    }

    pub fn truncate(&self, degree: usize) -> Self {
        Self(self.0.clone().map(|c| c.truncate(degree)))
    }

    pub fn rescale(&self, lambda: f64) -> Self {
        Self(self.0.clone().map(|c| c.rescale(lambda)))
    }

    pub fn dot(&self, o: &Self) -> Jet {
        &(&self.0[0] * &o.0[0]) + &(&(&self.0[1] * &o.0[1]) + &(&self.0[2] * &o.0[2]))
    }

    pub fn cross(&self, o: &Self) -> Self {
        let [a0, a1, a2] = &self.0;
        let [b0, b1, b2] = &o.0;
        Self([
            &(a1 * b2) - &(a2 * b1),
            &(a2 * b0) - &(a0 * b2),
            &(a0 * b1) - &(a1 * b0),
        ])
    }

    pub fn scale_jet(&self, k: &Jet) -> Self {
        Self(self.0.clone().map(|c| &c * k))
    }

    pub fn div_jet(&self, k: &Jet) -> Self {
        Self(self.0.clone().map(|c| &c / k))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self([
            &self.0[0] + &o.0[0],
            &self.0[1] + &o.0[1],
            &self.0[2] + &o.0[2],
        ])
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self([
            &self.0[0] - &o.0[0],
            &self.0[1] - &o.0[1],
            &self.0[2] - &o.0[2],
        ])
    }

    pub fn sub_point(&self, p: &Vec3) -> Self {
        Self([
            self.0[0].add_constant(-p.x),
            self.0[1].add_constant(-p.y),
            self.0[2].add_constant(-p.z),
        ])
    }

    /// `R·v + b` applied to the jet coefficients.
    pub fn transform(&self, m: &RigidMotion) -> Self {
        let r = m.rotation.matrix();
        let comps: [Jet; 3] = std::array::from_fn(|i| {
            let row = &(&self.0[0].scale(r[(i, 0)]) + &self.0[1].scale(r[(i, 1)]))
                + &self.0[2].scale(r[(i, 2)]);
            row.add_constant(m.translation[i])
        });
        Self(comps)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(Jet::is_finite)
    }
}

/// `x ↦ R·x + b` with `R` a proper rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidMotion {
    pub rotation: Rotation3<f64>,
    pub translation: Vec3,
}

impl RigidMotion {
    pub fn identity() -> Self {
        Self {
            rotation: Rotation3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn new(rotation: Rotation3<f64>, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn from_axis_angle(axis: Vec3, angle: f64, translation: Vec3) -> Self {
        Self::new(
            Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle),
            translation,
        )
    }

    /// Motion sending `origin` to 0 and the orthonormal frame `(e1, e2, e3)`
    /// to the coordinate axes.
    pub fn to_frame(origin: Vec3, e1: Vec3, e2: Vec3, e3: Vec3) -> Self {
        let m = Matrix3::from_rows(&[e1.transpose(), e2.transpose(), e3.transpose()]);
        let rotation = Rotation3::from_matrix_unchecked(m);
        let translation = -(rotation * origin);
        Self {
            rotation,
            translation,
        }
    }

    /// Rotation taking the direction `from` to `+x`, identity when already aligned.
    pub fn align_to_x(from: Vec3) -> Option<Rotation3<f64>> {
        let n = from.norm();
        if !(n > 0.0) {
            return None;
        }
        let u = from / n;
        if u == Vec3::x() {
            return Some(Rotation3::identity());
        }
        Rotation3::rotation_between(&u, &Vec3::x()).or_else(|| {
            // antiparallel
            Some(Rotation3::from_axis_angle(&Vec3::z_axis(), std::f64::consts::PI))
        })
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }
}

pub fn det3(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    a.dot(&b.cross(c))
}
