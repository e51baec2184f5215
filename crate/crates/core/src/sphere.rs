//! Points on S², rotations of R³ and spherical caps.

use std::f64::consts::PI;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{check_angle, Result};

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitVec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitVec3 {
    pub const NORTH: UnitVec3 = UnitVec3 {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };
    pub const SOUTH: UnitVec3 = UnitVec3 {
        x: 0.0,
        y: 0.0,
        z: -1.0,
    };
    pub const X: UnitVec3 = UnitVec3 {
        x: 1.0,
        y: 0.0,
        z: 0.0,
    };

    /// Normalizes `(x, y, z)`. Returns `None` for the zero vector or
    /// non-finite input.
    pub fn new(x: f64, y: f64, z: f64) -> Option<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        Some(UnitVec3 {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    /// Point with polar angle `polar` (distance from the north pole) and
    /// azimuth `azimuth` measured from the x-axis.
    pub fn from_spherical(polar: f64, azimuth: f64) -> Self {
        let (sp, cp) = polar.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        UnitVec3 {
            x: sp * ca,
            y: sp * sa,
            z: cp,
        }
    }

    pub fn dot(&self, other: &UnitVec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn neg(&self) -> Self {
        UnitVec3 {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Polar angle in `[0, pi]`.
    pub fn polar(&self) -> f64 {
        self.z.clamp(-1.0, 1.0).acos()
    }

    /// Azimuth in `(-pi, pi]`.
    pub fn azimuth(&self) -> f64 {
        self.y.atan2(self.x)
    }

    /// An orthonormal basis of the tangent plane at `self`.
    ///
    /// Gram-Schmidt against the coordinate axis least aligned with `self`,
    /// so the construction is well conditioned everywhere including the poles.
    pub fn tangent_basis(&self) -> (UnitVec3, UnitVec3) {
        let v = self.to_array();
        let mut axis = 0;
        for i in 1..3 {
            if v[i].abs() < v[axis].abs() {
                axis = i;
            }
        }
        let mut e = [0.0; 3];
        e[axis] = 1.0;
        let d = v[axis];
        let e1 = UnitVec3::new(e[0] - d * v[0], e[1] - d * v[1], e[2] - d * v[2])
            .expect("least-aligned axis is never parallel to a unit vector");
        let e2 = cross(self, &e1);
        (e1, e2)
    }
}

fn cross(a: &UnitVec3, b: &UnitVec3) -> UnitVec3 {
    UnitVec3 {
        x: a.y * b.z - a.z * b.y,
        y: a.z * b.x - a.x * b.z,
        z: a.x * b.y - a.y * b.x,
    }
}

/// Geodesic (great-circle) distance in `[0, pi]`.
pub fn geodesic_distance(u: &UnitVec3, v: &UnitVec3) -> f64 {
    u.dot(v).clamp(-1.0, 1.0).acos()
}

/// A rotation of R³ stored as a row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3 {
    m: [[f64; 3]; 3],
}

impl Rotation3 {
    pub const IDENTITY: Rotation3 = Rotation3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Rodrigues rotation by `angle` radians about `axis` (right-hand rule).
    pub fn axis_angle(axis: &UnitVec3, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        let (x, y, z) = (axis.x, axis.y, axis.z);
        Rotation3 {
            m: [
                [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
            ],
        }
    }

    /// Rotation about the north-south axis; these fix the north pole.
    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation3 {
            m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn transpose(&self) -> Self {
        let mut t = [[0.0; 3]; 3];
        for (i, row) in self.m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                t[j][i] = *v;
            }
        }
        Rotation3 { m: t }
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest entrywise deviation of `R Rᵀ` from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        let p = *self * self.transpose();
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p.m[i][j] - target).abs());
            }
        }
        worst
    }

    pub fn apply(&self, v: &UnitVec3) -> UnitVec3 {
        rotate(self, v)
    }
}

impl Mul for Rotation3 {
    type Output = Rotation3;

    fn mul(self, rhs: Rotation3) -> Rotation3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|l| self.m[i][l] * rhs.m[l][j]).sum();
            }
        }
        Rotation3 { m: out }
    }
}

/// Apply `rot` to `v`, renormalizing so the unit invariant does not drift.
pub fn rotate(rot: &Rotation3, v: &UnitVec3) -> UnitVec3 {
    let m = &rot.m;
    let x = m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z;
    let y = m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z;
    let z = m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z;
    UnitVec3::new(x, y, z).unwrap_or(*v)
}

/// Closed spherical cap `{ v : d(center, v) <= radius }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub center: UnitVec3,
    pub radius: f64,
}

impl Cap {
    pub fn new(center: UnitVec3, radius: f64) -> Result<Self> {
        check_angle("radius", radius)?;
        Ok(Cap { center, radius })
    }

    /// Cap whose center sits at polar angle `gamma` on the x-z meridian.
    pub fn at_polar(gamma: f64, radius: f64) -> Result<Self> {
        check_angle("gamma", gamma)?;
        Cap::new(UnitVec3::from_spherical(gamma, 0.0), radius)
    }

    pub fn contains(&self, v: &UnitVec3) -> bool {
        cap_contains(self, v)
    }

    /// Image of the cap under a rotation.
    pub fn rotated(&self, rot: &Rotation3) -> Cap {
        Cap {
            center: rotate(rot, &self.center),
            radius: self.radius,
        }
    }
}

pub fn cap_contains(cap: &Cap, v: &UnitVec3) -> bool {
    cap.radius >= PI || geodesic_distance(&cap.center, v) <= cap.radius
}

/// Normalized area of a cap of geodesic radius `r`: `(1 - cos r) / 2`.
pub fn uniform_cap_measure(r: f64) -> Result<f64> {
    check_angle("r", r)?;
    Ok(0.5 * (1.0 - r.cos()))
}
