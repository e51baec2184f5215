//! Monte Carlo simulators for four formulations of the walk that share the
//! same k-step law.
//!
//! * `drunkard`: step a geodesic distance θ in a uniform direction.
//! * `potted_plant`: rotate the whole sphere by θ about a uniform equatorial
//!   axis; the walker moves at most θ.
//! * `rotate_spin`: a fixed rotation moving the pole by θ, then a uniform spin
//!   about the north-south axis.
//! * `bi_invariant`: a uniform spin about the north-south axis followed by a
//!   `potted_plant` rotation.
//!
//! Trajectory `i` draws from ChaCha8 stream `i` keyed by the configured seed,
//! so output does not depend on how trajectories are scheduled.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_theta, Error, Result};
use crate::legendre::LegendreRecurrence;
use crate::output::fmt_f64;
use crate::sphere::{rotate, Rotation3, UnitVec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    Drunkard,
    PottedPlant,
    RotateSpin,
    BiInvariant,
}

impl Formulation {
    pub const ALL: [Formulation; 4] = [
        Formulation::Drunkard,
        Formulation::PottedPlant,
        Formulation::RotateSpin,
        Formulation::BiInvariant,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Formulation::Drunkard => "drunkard",
            Formulation::PottedPlant => "potted_plant",
            Formulation::RotateSpin => "rotate_spin",
            Formulation::BiInvariant => "bi_invariant",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Formulation::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                Error::Precondition(format!(
                    "unknown formulation '{s}' (expected drunkard, potted_plant, rotate_spin or bi_invariant)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub theta: f64,
    pub k: u32,
    pub formulation: Formulation,
    pub seed: u64,
    /// Number of trajectories.
    pub m: usize,
}

impl WalkConfig {
    pub fn new(theta: f64, k: u32, formulation: Formulation, seed: u64, m: usize) -> Result<Self> {
        let cfg = WalkConfig {
            theta,
            k,
            formulation,
            seed,
            m,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_theta(self.theta)?;
        if self.m == 0 {
            return Err(Error::InsufficientSamples { got: 0, required: 1 });
        }
        Ok(())
    }
}

/// End points of `m` independent trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub config: WalkConfig,
    /// Cosine of each end point's polar angle (its z-coordinate).
    pub cos_polar: Vec<f64>,
    pub points: Vec<UnitVec3>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV with header `trajectory,cos_polar` (plus `,x,y,z` when
    /// `with_points`), floats at 17 significant digits.
    pub fn to_csv(&self, with_points: bool) -> String {
        let mut out = String::with_capacity(self.len() * if with_points { 100 } else { 32 });
        out.push_str(if with_points {
            "trajectory,cos_polar,x,y,z\n"
        } else {
            "trajectory,cos_polar\n"
        });
        for (i, (c, p)) in self.cos_polar.iter().zip(&self.points).enumerate() {
            out.push_str(&i.to_string());
            out.push(',');
            out.push_str(&fmt_f64(*c));
            if with_points {
                for v in p.to_array() {
                    out.push(',');
                    out.push_str(&fmt_f64(v));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Random stream for trajectory `index` under `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen::<f64>() * TAU
}

/// Move `y` a geodesic distance `theta` in a uniformly random direction.
pub fn step_drunkard<R: Rng + ?Sized>(y: &UnitVec3, theta: f64, rng: &mut R) -> UnitVec3 {
    let (e1, e2) = y.tangent_basis();
    let (sp, cp) = uniform_angle(rng).sin_cos();
    let (st, ct) = theta.sin_cos();
    let dx = cp * e1.x + sp * e2.x;
    let dy = cp * e1.y + sp * e2.y;
    let dz = cp * e1.z + sp * e2.z;
    UnitVec3::new(ct * y.x + st * dx, ct * y.y + st * dy, ct * y.z + st * dz).unwrap_or(*y)
}

/// Rotation by `theta` about the equatorial axis at longitude `psi`.
pub fn equatorial_rotation(psi: f64, theta: f64) -> Rotation3 {
    let (s, c) = psi.sin_cos();
    let axis = UnitVec3 { x: c, y: s, z: 0.0 };
    Rotation3::axis_angle(&axis, theta)
}

/// Rotate the sphere by `theta` about a uniformly random equatorial axis.
pub fn step_potted<R: Rng + ?Sized>(y: &UnitVec3, theta: f64, rng: &mut R) -> UnitVec3 {
    let psi = uniform_angle(rng);
    rotate(&equatorial_rotation(psi, theta), y)
}

/// Fixed rotation about the x-axis by `theta`, then a uniform spin about z.
pub fn step_rotate_spin<R: Rng + ?Sized>(y: &UnitVec3, theta: f64, rng: &mut R) -> UnitVec3 {
    let tilted = rotate(&Rotation3::axis_angle(&UnitVec3::X, theta), y);
    rotate(&Rotation3::about_z(uniform_angle(rng)), &tilted)
}

/// Uniform spin about z, then a [`step_potted`] rotation.
pub fn step_biinvariant<R: Rng + ?Sized>(y: &UnitVec3, theta: f64, rng: &mut R) -> UnitVec3 {
    let spun = rotate(&Rotation3::about_z(uniform_angle(rng)), y);
    step_potted(&spun, theta, rng)
}

pub fn step<R: Rng + ?Sized>(formulation: Formulation, y: &UnitVec3, theta: f64, rng: &mut R) -> UnitVec3 {
    match formulation {
        Formulation::Drunkard => step_drunkard(y, theta, rng),
        Formulation::PottedPlant => step_potted(y, theta, rng),
        Formulation::RotateSpin => step_rotate_spin(y, theta, rng),
        Formulation::BiInvariant => step_biinvariant(y, theta, rng),
    }
}

/// End point of trajectory `index`.
pub fn trajectory_endpoint(config: &WalkConfig, index: u64) -> UnitVec3 {
    let mut rng = trajectory_rng(config.seed, index);
    let mut y = UnitVec3::NORTH;
    for _ in 0..config.k {
        y = step(config.formulation, &y, config.theta, &mut rng);
    }
    y
}

/// Simulate `config.m` independent trajectories of `config.k` steps from
/// the north pole.
pub fn run_walk(config: &WalkConfig) -> Result<SampleSet> {
    config.validate()?;
    let indices: Vec<u64> = (0..config.m as u64).collect();
    let points = crate::par_map(&indices, |&i| trajectory_endpoint(config, i));
    let cos_polar = points.iter().map(|p| p.z.clamp(-1.0, 1.0)).collect();
    Ok(SampleSet {
        config: *config,
        cos_polar,
        points,
    })
}

/// Mean of `P_n(cos_polar[i])` over the sample.
pub fn empirical_moment(samples: &SampleSet, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let total: f64 = samples
        .cos_polar
        .iter()
        .map(|&c| LegendreRecurrence::new(c).nth(n).unwrap())
        .sum();
    total / samples.cos_polar.len() as f64
}

/// `m` points drawn uniformly on the sphere (Archimedes: z uniform).
pub fn uniform_points(m: usize, seed: u64) -> Vec<UnitVec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..=1.0);
            UnitVec3::from_spherical(z.acos(), uniform_angle(&mut rng))
        })
        .collect()
}
