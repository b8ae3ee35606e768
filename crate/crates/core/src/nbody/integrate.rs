use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use super::{accelerations, Gravity, NbodyError, PhaseState, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Kick-drift-kick; symplectic and time-reversible.
    Leapfrog,
    /// Classical fourth-order Runge-Kutta.
    Rk4,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Leapfrog => "leapfrog",
            Method::Rk4 => "rk4",
        })
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Method, String> {
        match s {
            "leapfrog" => Ok(Method::Leapfrog),
            "rk4" => Ok(Method::Rk4),
            _ => Err(format!("unknown method {s:?} (leapfrog, rk4)")),
        }
    }
}

/// Advances one state step by step, caching the acceleration for leapfrog.
pub(crate) struct Stepper {
    pub state: PhaseState,
    method: Method,
    gravity: Gravity,
    acc: Vec<Vec3>,
    t0: f64,
    taken: i64,
}

impl Stepper {
    pub fn new(state: PhaseState, method: Method, gravity: Gravity) -> Result<Stepper, NbodyError> {
        let acc = accelerations(&state, &gravity)?;
        Ok(Stepper {
            t0: state.t,
            state,
            method,
            gravity,
            acc,
            taken: 0,
        })
    }

    /// One step of signed size `dt`. On error the state is left at the
    /// start of the failed step.
    pub fn step(&mut self, dt: f64) -> Result<(), NbodyError> {
        match self.method {
            Method::Leapfrog => self.leapfrog(dt)?,
            Method::Rk4 => self.rk4(dt)?,
        }
        self.taken += dt.signum() as i64;
        self.state.t = self.t0 + self.taken as f64 * dt.abs();
        Ok(())
    }

    fn leapfrog(&mut self, dt: f64) -> Result<(), NbodyError> {
        let s = &self.state;
        let v_half: Vec<Vec3> =
            s.v.iter()
                .zip(&self.acc)
                .map(|(v, a)| *v + *a * (0.5 * dt))
                .collect();
        let mut next = s.clone();
        for (q, v) in next.q.iter_mut().zip(&v_half) {
            *q += *v * dt;
        }
        let acc = accelerations(&next, &self.gravity)?;
        for ((v, vh), a) in next.v.iter_mut().zip(&v_half).zip(&acc) {
            *v = *vh + *a * (0.5 * dt);
        }
        self.state = next;
        self.acc = acc;
        Ok(())
    }

    fn rk4(&mut self, dt: f64) -> Result<(), NbodyError> {
        let s = &self.state;
        let shifted = |dq: &[Vec3], dv: &[Vec3], h: f64| {
            let mut t = s.clone();
            for i in 0..t.len() {
                t.q[i] += dq[i] * h;
                t.v[i] += dv[i] * h;
            }
            t
        };
        let k1q = s.v.clone();
        let k1v = self.acc.clone();
        let s2 = shifted(&k1q, &k1v, 0.5 * dt);
        let k2v = accelerations(&s2, &self.gravity)?;
        let k2q = s2.v;
        let s3 = shifted(&k2q, &k2v, 0.5 * dt);
        let k3v = accelerations(&s3, &self.gravity)?;
        let k3q = s3.v;
        let s4 = shifted(&k3q, &k3v, dt);
        let k4v = accelerations(&s4, &self.gravity)?;
        let k4q = s4.v;
        let mut next = s.clone();
        for i in 0..next.len() {
            next.q[i] += (k1q[i] + (k2q[i] + k3q[i]) * 2.0 + k4q[i]) * (dt / 6.0);
            next.v[i] += (k1v[i] + (k2v[i] + k3v[i]) * 2.0 + k4v[i]) * (dt / 6.0);
        }
        let acc = accelerations(&next, &self.gravity)?;
        self.state = next;
        self.acc = acc;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub dt: f64,
    pub steps: u64,
    pub method: Method,
    /// Record a sample every `stride` steps (and after the last step).
    pub stride: u64,
    pub gravity: Gravity,
}

impl IntegrateOptions {
    pub fn new(dt: f64, steps: u64, method: Method) -> IntegrateOptions {
        IntegrateOptions {
            dt,
            steps,
            method,
            stride: 1,
            gravity: Gravity::default(),
        }
    }

    pub fn validate(&self) -> Result<(), NbodyError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(NbodyError::Invalid(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.stride == 0 {
            return Err(NbodyError::Invalid("stride must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub q: Vec<Vec3>,
    pub v: Vec<Vec3>,
    pub energy: f64,
    pub momentum: Vec3,
    pub angular_momentum: Vec3,
}

impl Sample {
    fn of(s: &PhaseState, gravity: &Gravity) -> Sample {
        Sample {
            t: s.t,
            q: s.q.clone(),
            v: s.v.clone(),
            energy: s.energy(gravity),
            momentum: s.momentum(),
            angular_momentum: s.angular_momentum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub method: Method,
    pub dt: f64,
    pub stride: u64,
    pub masses: Vec<f64>,
    pub samples: Vec<Sample>,
    /// Why integration stopped early, if it did.
    pub aborted: Option<String>,
}

impl Trajectory {
    pub fn relative_energy_drift(&self) -> f64 {
        let e0 = self.samples[0].energy;
        self.samples
            .iter()
            .map(|s| ((s.energy - e0) / e0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|P(t) − P(0)|`, relative to `Σ m|v|` at the start.
    pub fn relative_momentum_drift(&self) -> f64 {
        let first = &self.samples[0];
        let scale: f64 = self
            .masses
            .iter()
            .zip(&first.v)
            .map(|(m, v)| m * v.norm())
            .sum::<f64>()
            .max(f64::MIN_POSITIVE);
        self.samples
            .iter()
            .map(|s| (s.momentum - first.momentum).norm() / scale)
            .fold(0.0, f64::max)
    }

    pub fn relative_angular_momentum_drift(&self) -> f64 {
        let l0 = self.samples[0].angular_momentum;
        let scale = l0.norm().max(f64::MIN_POSITIVE);
        self.samples
            .iter()
            .map(|s| (s.angular_momentum - l0).norm() / scale)
            .fold(0.0, f64::max)
    }

    /// Header `t, q{i}_{x,y,z}, v{i}_{x,y,z}, E, P_{x,y,z}, L_{x,y,z}`.
    pub fn to_csv(&self) -> String {
        let n = self.masses.len();
        let mut cols = vec!["t".to_string()];
        for i in 0..n {
            for kind in ["q", "v"] {
                for axis in ["x", "y", "z"] {
                    cols.push(format!("{kind}{i}_{axis}"));
                }
            }
        }
        cols.push("E".into());
        for name in ["P", "L"] {
            for axis in ["x", "y", "z"] {
                cols.push(format!("{name}_{axis}"));
            }
        }
        let mut out = cols.join(",");
        out.push('\n');
        for s in &self.samples {
            let mut row = vec![s.t];
            for i in 0..n {
                row.extend(s.q[i].0);
                row.extend(s.v[i].0);
            }
            row.push(s.energy);
            row.extend(s.momentum.0);
            row.extend(s.angular_momentum.0);
            let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Integrates `steps` steps of size `dt`. A near collision or a raised
/// `abort` flag ends the run early; the samples taken so far are returned
/// and the trajectory is flagged.
pub fn integrate(
    s: &PhaseState,
    opts: &IntegrateOptions,
    abort: Option<&AtomicBool>,
) -> Result<Trajectory, NbodyError> {
    opts.validate()?;
    let mut traj = Trajectory {
        method: opts.method,
        dt: opts.dt,
        stride: opts.stride,
        masses: s.masses.clone(),
        samples: vec![Sample::of(s, &opts.gravity)],
        aborted: None,
    };
    let mut stepper = match Stepper::new(s.clone(), opts.method, opts.gravity) {
        Ok(st) => st,
        Err(e) => {
            traj.aborted = Some(e.to_string());
            return Ok(traj);
        }
    };
    for k in 1..=opts.steps {
        if abort.is_some_and(|f| f.load(Ordering::Relaxed)) {
            traj.aborted = Some(format!("interrupted after {} steps", k - 1));
            break;
        }
        if let Err(e) = stepper.step(opts.dt) {
            traj.aborted = Some(format!("{e} at t = {}", stepper.state.t));
            break;
        }
        if k % opts.stride == 0 || k == opts.steps {
            traj.samples.push(Sample::of(&stepper.state, &opts.gravity));
        }
    }
    if traj.aborted.is_some() && traj.samples.last().map(|x| x.t) != Some(stepper.state.t) {
        traj.samples.push(Sample::of(&stepper.state, &opts.gravity));
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nbody::{circular_binary, pythagorean, Body, CIRCULAR_BINARY_PERIOD};

    #[test]
    fn circular_orbit_conserves_energy() {
        let s = circular_binary();
        let steps = (CIRCULAR_BINARY_PERIOD / 1e-3).ceil() as u64;
        let traj = integrate(
            &s,
            &IntegrateOptions::new(1e-3, steps, Method::Leapfrog),
            None,
        )
        .unwrap();
        assert!(traj.aborted.is_none());
        assert!(
            traj.relative_energy_drift() < 1e-8,
            "{}",
            traj.relative_energy_drift()
        );
        assert!(traj.relative_momentum_drift() < 1e-12);
        assert!(traj.relative_angular_momentum_drift() < 1e-10);
        // back where it started after one period
        let end = traj.samples.last().unwrap();
        assert!((end.q[0] - s.q[0]).norm() < 1e-2);
    }

    #[test]
    fn rk4_drifts_leapfrog_does_not() {
        let s = circular_binary();
        let mut opts = IntegrateOptions::new(0.05, 20_000, Method::Leapfrog);
        opts.stride = 100;
        let lf = integrate(&s, &opts, None).unwrap();
        opts.method = Method::Rk4;
        let rk = integrate(&s, &opts, None).unwrap();
        assert!(rk.relative_energy_drift() > 10.0 * lf.relative_energy_drift());
    }

    #[test]
    fn leapfrog_is_reversible() {
        let start = pythagorean();
        let mut st = Stepper::new(start.clone(), Method::Leapfrog, Gravity::default()).unwrap();
        for _ in 0..1_000 {
            st.step(1e-3).unwrap();
        }
        for _ in 0..1_000 {
            st.step(-1e-3).unwrap();
        }
        let err = st
            .state
            .q
            .iter()
            .zip(&start.q)
            .map(|(a, b)| (*a - *b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
        assert_eq!(st.state.t, 0.0);
    }

    #[test]
    fn sampling_and_times() {
        let s = circular_binary();
        let mut opts = IntegrateOptions::new(0.01, 25, Method::Rk4);
        opts.stride = 10;
        let traj = integrate(&s, &opts, None).unwrap();
        let ts: Vec<f64> = traj.samples.iter().map(|x| x.t).collect();
        assert_eq!(ts.len(), 4);
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
        assert!((ts[3] - 0.25).abs() < 1e-15);
        let csv = traj.to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert_eq!(
            csv.lines().next().unwrap().split(',').count(),
            1 + 12 + 1 + 6
        );
    }

    #[test]
    fn head_on_collision_aborts_with_partial_trajectory() {
        let s = PhaseState::new(
            1.0,
            &[
                Body {
                    mass: 1.0,
                    q: Vec3::new(0.5, 0.0, 0.0),
                    v: Vec3::ZERO,
                },
                Body {
                    mass: 1.0,
                    q: Vec3::new(-0.5, 0.0, 0.0),
                    v: Vec3::ZERO,
                },
            ],
        )
        .unwrap();
        let mut opts = IntegrateOptions::new(1e-4, 20_000, Method::Leapfrog);
        opts.gravity.near_collision = 5e-2;
        let traj = integrate(&s, &opts, None).unwrap();
        assert!(traj.aborted.as_deref().unwrap().contains("near collision"));
        assert!(traj.samples.len() > 100);
    }

    #[test]
    fn interrupt_flag() {
        let flag = AtomicBool::new(true);
        let traj = integrate(
            &circular_binary(),
            &IntegrateOptions::new(1e-3, 10, Method::Leapfrog),
            Some(&flag),
        )
        .unwrap();
        assert_eq!(traj.samples.len(), 1);
        assert!(traj.aborted.is_some());
    }

    #[test]
    fn rejects_bad_step() {
        let s = circular_binary();
        assert!(integrate(&s, &IntegrateOptions::new(0.0, 10, Method::Rk4), None).is_err());
        assert!(integrate(&s, &IntegrateOptions::new(-1e-3, 10, Method::Rk4), None).is_err());
        assert!("euler".parse::<Method>().is_err());
    }

    #[test]
    fn deterministic() {
        let opts = IntegrateOptions::new(1e-3, 2_000, Method::Rk4);
        let a = integrate(&pythagorean(), &opts, None).unwrap();
        let b = integrate(&pythagorean(), &opts, None).unwrap();
        assert_eq!(a, b);
    }
}
