use serde::{Deserialize, Serialize};

use super::integrate::Stepper;
use super::{Gravity, Method, NbodyError, PhaseState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    /// Displacement of the first body's x coordinate.
    pub delta: f64,
    pub horizon: f64,
    pub dt: f64,
    pub method: Method,
    /// Steps between distance samples.
    pub stride: u64,
    pub gravity: Gravity,
}

impl ProbeOptions {
    pub fn new(delta: f64, horizon: f64, dt: f64) -> ProbeOptions {
        ProbeOptions {
            delta,
            horizon,
            dt,
            method: Method::Leapfrog,
            stride: 100,
            gravity: Gravity::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub delta: f64,
    pub dt: f64,
    pub method: Method,
    /// `(t, phase-space distance)`
    pub samples: Vec<(f64, f64)>,
    pub max_ratio: f64,
    /// `(k, t)`: first sample time at which the distance exceeds `10^k · delta`.
    pub decade_crossings: Vec<(u32, f64)>,
    /// Least-squares slope of `ln distance` against `t`, up to the first
    /// crossing of `10^6 · delta` (or the whole run).
    pub lyapunov: Option<f64>,
    pub doubling_time: Option<f64>,
    pub aborted: Option<String>,
}

impl DivergenceReport {
    pub fn first_time_above(&self, ratio_decade: u32) -> Option<f64> {
        self.decade_crossings
            .iter()
            .find(|(k, _)| *k == ratio_decade)
            .map(|&(_, t)| t)
    }
}

/// Integrates `s` and a copy displaced by `delta` side by side and tracks
/// their phase-space distance.
pub fn divergence_probe(
    s: &PhaseState,
    opts: &ProbeOptions,
) -> Result<DivergenceReport, NbodyError> {
    if !(opts.delta >= 0.0 && opts.delta.is_finite()) {
        return Err(NbodyError::Invalid("delta must be >= 0".into()));
    }
    if !(opts.dt > 0.0 && opts.horizon >= 0.0) || opts.stride == 0 {
        return Err(NbodyError::Invalid(
            "need dt > 0, horizon >= 0, stride > 0".into(),
        ));
    }
    if s.is_empty() {
        return Err(NbodyError::Invalid("no bodies".into()));
    }
    let mut shifted = s.clone();
    shifted.q[0].0[0] += opts.delta;
    let mut report = DivergenceReport {
        delta: opts.delta,
        dt: opts.dt,
        method: opts.method,
        samples: vec![(s.t, s.phase_distance(&shifted))],
        max_ratio: 0.0,
        decade_crossings: Vec::new(),
        lyapunov: None,
        doubling_time: None,
        aborted: None,
    };
    let steppers = Stepper::new(s.clone(), opts.method, opts.gravity)
        .and_then(|a| Ok((a, Stepper::new(shifted, opts.method, opts.gravity)?)));
    let (mut a, mut b) = match steppers {
        Ok(pair) => pair,
        Err(e) => {
            report.aborted = Some(e.to_string());
            return Ok(report);
        }
    };
    let total = (opts.horizon / opts.dt).round() as u64;
    let mut done = 0u64;
    while done < total {
        let chunk = opts.stride.min(total - done);
        let advance = |st: &mut Stepper| -> Result<(), NbodyError> {
            for _ in 0..chunk {
                st.step(opts.dt)?;
            }
            Ok(())
        };
        let (ra, rb) = rayon::join(|| advance(&mut a), || advance(&mut b));
        if let Err(e) = ra.and(rb) {
            report.aborted = Some(format!("{e} near t = {}", a.state.t.min(b.state.t)));
            break;
        }
        done += chunk;
        report
            .samples
            .push((a.state.t, a.state.phase_distance(&b.state)));
    }
    summarize(&mut report);
    Ok(report)
}

fn summarize(r: &mut DivergenceReport) {
    if r.delta == 0.0 {
        return;
    }
    for &(t, d) in &r.samples {
        let ratio = d / r.delta;
        r.max_ratio = r.max_ratio.max(ratio);
        loop {
            let k = r.decade_crossings.len() as u32 + 1;
            if k > 15 || ratio <= 10f64.powi(k as i32) {
                break;
            }
            r.decade_crossings.push((k, t));
        }
    }
    let end = r.first_time_above(6).unwrap_or(f64::INFINITY);
    let pts: Vec<(f64, f64)> = r
        .samples
        .iter()
        .filter(|&&(t, d)| d > 0.0 && t <= end)
        .map(|&(t, d)| (t, d.ln()))
        .collect();
    if pts.len() >= 3 {
        let n = pts.len() as f64;
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
        let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
        if stt > 0.0 {
            let slope = sty / stt;
            r.lyapunov = Some(slope);
            r.doubling_time = (slope > 0.0).then(|| std::f64::consts::LN_2 / slope);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nbody::{circular_binary, pythagorean, CIRCULAR_BINARY_PERIOD};

    #[test]
    fn zero_perturbation_never_separates() {
        let r = divergence_probe(&pythagorean(), &ProbeOptions::new(0.0, 5.0, 1e-3)).unwrap();
        assert!(r.samples.iter().all(|&(_, d)| d == 0.0));
        assert!(r.decade_crossings.is_empty());
        assert_eq!(r.lyapunov, None);
    }

    #[test]
    fn circular_orbit_is_not_chaotic() {
        let mut opts = ProbeOptions::new(1e-9, 10.0 * CIRCULAR_BINARY_PERIOD, 1e-3);
        opts.stride = 50;
        let r = divergence_probe(&circular_binary(), &opts).unwrap();
        assert!(r.aborted.is_none());
        assert!(r.max_ratio < 1e3, "{}", r.max_ratio);
        let last = r.samples.last().unwrap().0;
        assert!((last - 10.0 * CIRCULAR_BINARY_PERIOD).abs() < 1e-3);
    }

    #[test]
    fn decade_bookkeeping() {
        let mut r = DivergenceReport {
            delta: 1.0,
            dt: 1.0,
            method: Method::Leapfrog,
            samples: vec![(0.0, 1.0), (1.0, 50.0), (2.0, 20.0), (3.0, 5e3)],
            max_ratio: 0.0,
            decade_crossings: vec![],
            lyapunov: None,
            doubling_time: None,
            aborted: None,
        };
        summarize(&mut r);
        assert_eq!(r.decade_crossings, vec![(1, 1.0), (2, 3.0), (3, 3.0)]);
        assert_eq!(r.max_ratio, 5e3);
        assert!(r.lyapunov.unwrap() > 0.0);
    }
}
