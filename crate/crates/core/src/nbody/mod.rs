//! Newtonian point-mass gravity: the law fits in one line, the prediction
//! needs every digit of the initial data.

mod integrate;
mod probe;
mod vec3;

pub use integrate::{integrate, IntegrateOptions, Method, Sample, Trajectory};
pub use probe::{divergence_probe, DivergenceReport, ProbeOptions};
pub use vec3::Vec3;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_NEAR_COLLISION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NbodyError {
    #[error("bodies {i} and {j} are {separation:e} apart (near collision)")]
    NearCollision { i: usize, j: usize, separation: f64 },
    #[error("invalid system: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Body {
    pub mass: f64,
    pub q: Vec3,
    pub v: Vec3,
}

/// Positions, velocities and masses of `n` bodies: a point of the
/// `6n`-dimensional phase space at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub t: f64,
    pub g: f64,
    pub masses: Vec<f64>,
    pub q: Vec<Vec3>,
    pub v: Vec<Vec3>,
}

/// How close encounters are treated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gravity {
    /// Plummer softening length; 0 disables softening.
    #[serde(default)]
    pub softening: f64,
    /// Minimum separation tolerated without softening.
    #[serde(default = "default_near_collision")]
    pub near_collision: f64,
}

fn default_near_collision() -> f64 {
    DEFAULT_NEAR_COLLISION
}

impl Default for Gravity {
    fn default() -> Gravity {
        Gravity {
            softening: 0.0,
            near_collision: DEFAULT_NEAR_COLLISION,
        }
    }
}

impl PhaseState {
    pub fn new(g: f64, bodies: &[Body]) -> Result<PhaseState, NbodyError> {
        let invalid = |m: String| Err(NbodyError::Invalid(m));
        if !(g > 0.0 && g.is_finite()) {
            return invalid(format!("G must be positive, got {g}"));
        }
        for (i, b) in bodies.iter().enumerate() {
            if !(b.mass > 0.0 && b.mass.is_finite()) {
                return invalid(format!("body {i}: mass must be positive"));
            }
            if !b.q.is_finite() || !b.v.is_finite() {
                return invalid(format!("body {i}: non-finite coordinates"));
            }
            for (j, c) in bodies[..i].iter().enumerate() {
                if c.q == b.q {
                    return invalid(format!("bodies {j} and {i} coincide"));
                }
            }
        }
        Ok(PhaseState {
            t: 0.0,
            g,
            masses: bodies.iter().map(|b| b.mass).collect(),
            q: bodies.iter().map(|b| b.q).collect(),
            v: bodies.iter().map(|b| b.v).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn dimension(&self) -> usize {
        6 * self.len()
    }

    pub fn bodies(&self) -> Vec<Body> {
        (0..self.len())
            .map(|i| Body {
                mass: self.masses[i],
                q: self.q[i],
                v: self.v[i],
            })
            .collect()
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.masses
            .iter()
            .zip(&self.v)
            .map(|(m, v)| 0.5 * m * v.norm_sq())
            .sum()
    }

    pub fn potential_energy(&self, gravity: &Gravity) -> f64 {
        let eps2 = gravity.softening * gravity.softening;
        let mut u = 0.0;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let r2 = (self.q[j] - self.q[i]).norm_sq() + eps2;
                u -= self.g * self.masses[i] * self.masses[j] / r2.sqrt();
            }
        }
        u
    }

    pub fn energy(&self, gravity: &Gravity) -> f64 {
        self.kinetic_energy() + self.potential_energy(gravity)
    }

    pub fn momentum(&self) -> Vec3 {
        self.masses
            .iter()
            .zip(&self.v)
            .fold(Vec3::ZERO, |p, (&m, &v)| p + v * m)
    }

    /// `Σ m|v|`, the scale against which momentum drift is measured.
    pub fn momentum_scale(&self) -> f64 {
        self.masses
            .iter()
            .zip(&self.v)
            .map(|(m, v)| m * v.norm())
            .sum()
    }

    pub fn angular_momentum(&self) -> Vec3 {
        (0..self.len()).fold(Vec3::ZERO, |l, i| {
            l + self.q[i].cross(self.v[i]) * self.masses[i]
        })
    }

    /// Euclidean distance between two states in phase space.
    pub fn phase_distance(&self, other: &PhaseState) -> f64 {
        self.q
            .iter()
            .zip(&other.q)
            .chain(self.v.iter().zip(&other.v))
            .map(|(a, b)| (*a - *b).norm_sq())
            .sum::<f64>()
            .sqrt()
    }
}

/// `a_i = Σ_{j≠i} G m_j (q_j − q_i) / |q_j − q_i|³`, Plummer-softened when
/// `gravity.softening > 0`.
pub fn accelerations(s: &PhaseState, gravity: &Gravity) -> Result<Vec<Vec3>, NbodyError> {
    let n = s.len();
    let eps2 = gravity.softening * gravity.softening;
    let mut a = vec![Vec3::ZERO; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = s.q[j] - s.q[i];
            let r2 = d.norm_sq();
            if gravity.softening == 0.0 && r2 < gravity.near_collision * gravity.near_collision {
                return Err(NbodyError::NearCollision {
                    i,
                    j,
                    separation: r2.sqrt(),
                });
            }
            let r2 = r2 + eps2;
            let inv_r3 = s.g / (r2 * r2.sqrt());
            a[i] += d * (s.masses[j] * inv_r3);
            a[j] -= d * (s.masses[i] * inv_r3);
        }
    }
    Ok(a)
}

/// Input file: `{"G": 1, "bodies": [{"mass", "q", "v"}], ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(rename = "G", default = "default_g")]
    pub g: f64,
    pub bodies: Vec<Body>,
    #[serde(default)]
    pub softening: f64,
    #[serde(default = "default_near_collision")]
    pub near_collision: f64,
}

fn default_g() -> f64 {
    1.0
}

impl SystemConfig {
    pub fn state(&self) -> Result<PhaseState, NbodyError> {
        PhaseState::new(self.g, &self.bodies)
    }

    pub fn gravity(&self) -> Result<Gravity, NbodyError> {
        if !(self.softening >= 0.0 && self.softening.is_finite()) {
            return Err(NbodyError::Invalid("softening must be >= 0".into()));
        }
        if !(self.near_collision >= 0.0 && self.near_collision.is_finite()) {
            return Err(NbodyError::Invalid("near_collision must be >= 0".into()));
        }
        Ok(Gravity {
            softening: self.softening,
            near_collision: self.near_collision,
        })
    }
}

/// Two unit masses a unit distance apart on a circular orbit about their
/// barycentre (`G = 1`, speed `√0.5` each, period `π√2`).
pub fn circular_binary() -> PhaseState {
    let s = 0.5f64.sqrt();
    PhaseState::new(
        1.0,
        &[
            Body {
                mass: 1.0,
                q: Vec3::new(0.5, 0.0, 0.0),
                v: Vec3::new(0.0, s, 0.0),
            },
            Body {
                mass: 1.0,
                q: Vec3::new(-0.5, 0.0, 0.0),
                v: Vec3::new(0.0, -s, 0.0),
            },
        ],
    )
    .expect("valid")
}

pub const CIRCULAR_BINARY_PERIOD: f64 = std::f64::consts::PI * std::f64::consts::SQRT_2;

/// Burrau's problem: masses 3, 4, 5 at rest on the vertices of a 3-4-5 right
/// triangle, each opposite the side of its own length.
pub fn pythagorean() -> PhaseState {
    let at_rest = |mass: f64, x: f64, y: f64| Body {
        mass,
        q: Vec3::new(x, y, 0.0),
        v: Vec3::ZERO,
    };
    PhaseState::new(
        1.0,
        &[
            at_rest(3.0, 1.0, 3.0),
            at_rest(4.0, -2.0, -1.0),
            at_rest(5.0, 1.0, -1.0),
        ],
    )
    .expect("valid")
}
