use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::Dyadic;
use crate::complexity::tower_reference;
use crate::Nat;

/// Integers compared against a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// `[x(1-r), x(1+r)]`
    Relative(f64),
    /// `[x-h, x+h]`
    Absolute(u64),
}

impl Window {
    pub const DEFAULT: Window = Window::Relative(0.05);

    /// Inclusive bounds, candidate included.
    pub fn bounds(&self, x: u64) -> (u64, u64) {
        match *self {
            Window::Relative(r) => {
                let xf = x as f64;
                (
                    (xf * (1.0 - r)).ceil().max(0.0) as u64,
                    (xf * (1.0 + r)).floor() as u64,
                )
            }
            Window::Absolute(h) => (x.saturating_sub(h), x.saturating_add(h)),
        }
    }
}

/// `10^3, 10^6, 2^10, 2^20, 3^^3`.
pub fn default_candidates() -> Vec<Nat> {
    vec![
        Nat::from(1_000u64),
        Nat::from(1_000_000u64),
        Nat::from(1u64 << 10),
        Nat::from(1u64 << 20),
        tower_reference(3),
    ]
}

/// Order statistics of the masses of a window of integers, zeros included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    pub lo: u64,
    pub hi: u64,
    /// Integers in the window other than the candidate.
    pub size: u64,
    /// Of those, how many have nonzero mass.
    pub nonzero: u64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub p90: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub x: Nat,
    pub mass: Dyadic,
    pub mass_f64: f64,
    pub window: Option<WindowStats>,
    /// `mass / median`; `+inf` when the median is 0 and the mass is not,
    /// `1` when both are 0, absent for an empty window.
    #[serde(serialize_with = "ser_ratio", deserialize_with = "de_ratio")]
    pub ratio: Option<f64>,
    pub window_empty: bool,
}

fn ser_ratio<S: Serializer>(r: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(v) if v.is_infinite() => s.serialize_str("+inf"),
        Some(v) => s.serialize_f64(*v),
        None => s.serialize_none(),
    }
}

fn de_ratio<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Option::<Raw>::deserialize(d)? {
        None => Ok(None),
        Some(Raw::Num(v)) => Ok(Some(v)),
        Some(Raw::Text(t)) if t == "+inf" => Ok(Some(f64::INFINITY)),
        Some(Raw::Text(t)) => Err(serde::de::Error::custom(format!("bad ratio {t:?}"))),
    }
}

/// Nearest-rank quantile of `size` values: `size - nonzero` zeros followed by
/// the ascending `sorted_nonzero`.
fn quantile(sorted_nonzero: &[f64], size: u64, q: f64) -> f64 {
    let zeros = size - sorted_nonzero.len() as u64;
    let rank = ((q * size as f64).ceil() as u64).clamp(1, size) - 1;
    if rank < zeros {
        0.0
    } else {
        sorted_nonzero[(rank - zeros) as usize]
    }
}

fn median(sorted_nonzero: &[f64], size: u64) -> f64 {
    let at = |i: u64| {
        let zeros = size - sorted_nonzero.len() as u64;
        if i < zeros {
            0.0
        } else {
            sorted_nonzero[(i - zeros) as usize]
        }
    };
    if size % 2 == 1 {
        at(size / 2)
    } else {
        (at(size / 2 - 1) + at(size / 2)) / 2.0
    }
}

/// A non-negative quantity attached to each integer (mass or count).
pub trait Weight: Copy {
    fn weight(&self) -> f64;
}

impl Weight for Dyadic {
    fn weight(&self) -> f64 {
        self.to_f64()
    }
}

impl Weight for u64 {
    fn weight(&self) -> f64 {
        *self as f64
    }
}

/// Statistics over the window around `x`, excluding `x`. `None` if empty.
pub fn window_stats<T: Weight>(
    mass: &BTreeMap<Nat, T>,
    x: u64,
    window: Window,
) -> Option<WindowStats> {
    let (lo, hi) = window.bounds(x);
    let size = if (lo..=hi).contains(&x) {
        hi - lo
    } else {
        hi - lo + 1
    };
    if size == 0 {
        return None;
    }
    let mut nz: Vec<f64> = mass
        .range(Nat::from(lo)..=Nat::from(hi))
        .map(|(k, m)| (k, m.weight()))
        .filter(|&(k, m)| k.to_u64() != Some(x) && m > 0.0)
        .map(|(_, m)| m)
        .collect();
    nz.sort_by(f64::total_cmp);
    Some(WindowStats {
        lo,
        hi,
        size,
        nonzero: nz.len() as u64,
        median: median(&nz, size),
        q25: quantile(&nz, size, 0.25),
        q75: quantile(&nz, size, 0.75),
        p90: quantile(&nz, size, 0.90),
    })
}

pub fn peak_ratio(mass: f64, median: f64) -> f64 {
    match (mass > 0.0, median > 0.0) {
        (_, true) => mass / median,
        (true, false) => f64::INFINITY,
        (false, false) => 1.0,
    }
}

/// Peak ratios of `candidates`, sorted by ratio descending, flagged entries last.
pub fn peak_report(
    mass: &BTreeMap<Nat, Dyadic>,
    candidates: &[Nat],
    window: Window,
) -> Vec<PeakReport> {
    let mut out: Vec<PeakReport> = candidates
        .iter()
        .map(|x| {
            let m = mass.get(x).copied().unwrap_or(Dyadic::ZERO);
            let w = x.to_u64().and_then(|v| window_stats(mass, v, window));
            PeakReport {
                x: x.clone(),
                mass: m,
                mass_f64: m.to_f64(),
                ratio: w.map(|w| peak_ratio(m.to_f64(), w.median)),
                window_empty: w.is_none(),
                window: w,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        let key = |r: &PeakReport| r.ratio.unwrap_or(f64::NEG_INFINITY);
        key(b).total_cmp(&key(a)).then_with(|| a.x.cmp(&b.x))
    });
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FitError {
    #[error("range [{a}, {b}] must satisfy 2 <= a and b >= 100a")]
    Range { a: u64, b: u64 },
    #[error("only {0} usable points (need 30)")]
    TooFewPoints(usize),
}

pub const MIN_FIT_POINTS: usize = 30;

/// Least-squares fit of `ln m = c - ln n - (1+ε) ln ln n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundFit {
    pub epsilon: f64,
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
    pub excluded_peaks: usize,
    pub rms_residual: f64,
    /// `(n, observed - fitted ln m)`
    pub residuals: Vec<(u64, f64)>,
}

/// Fits the planted model to `(n, mass)` pairs with `n ≥ 2`, `mass > 0`.
pub fn fit_points(points: &[(u64, f64)]) -> Result<BackgroundFit, FitError> {
    let pts: Vec<(u64, f64, f64)> = points
        .iter()
        .filter(|&&(n, m)| n >= 2 && m > 0.0)
        .map(|&(n, m)| {
            let nf = n as f64;
            (n, nf.ln().ln(), m.ln() + nf.ln())
        })
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(FitError::TooFewPoints(pts.len()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.2).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.1 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.1 - mx) * (p.2 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residuals: Vec<(u64, f64)> = pts
        .iter()
        .map(|&(n, lx, y)| (n, y - (intercept + slope * lx)))
        .collect();
    let rms_residual = (residuals.iter().map(|r| r.1 * r.1).sum::<f64>() / k).sqrt();
    Ok(BackgroundFit {
        epsilon: -slope - 1.0,
        slope,
        intercept,
        points: pts.len(),
        excluded_peaks: 0,
        rms_residual,
        residuals,
    })
}

/// Background fit over the table entries in `[a, b]`, leaving out peaks
/// (entries above ten times their ±5% window median).
pub fn background_fit(
    mass: &BTreeMap<Nat, Dyadic>,
    a: u64,
    b: u64,
) -> Result<BackgroundFit, FitError> {
    if a < 2 || b / a < 100 {
        return Err(FitError::Range { a, b });
    }
    let mut excluded = 0;
    let pts: Vec<(u64, f64)> = mass
        .range(Nat::from(a)..=Nat::from(b))
        .filter_map(|(x, m)| {
            let n = x.to_u64()?;
            let mf = m.to_f64();
            let peak = window_stats(mass, n, Window::DEFAULT)
                .is_some_and(|w| peak_ratio(mf, w.median) > 10.0);
            if peak {
                excluded += 1;
                None
            } else {
                Some((n, mf))
            }
        })
        .collect();
    let mut fit = fit_points(&pts)?;
    fit.excluded_peaks = excluded;
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_of(pairs: &[(u64, Dyadic)]) -> BTreeMap<Nat, Dyadic> {
        pairs.iter().map(|&(x, m)| (Nat::from(x), m)).collect()
    }

    #[test]
    fn window_bounds() {
        assert_eq!(Window::Relative(0.05).bounds(1024), (973, 1075));
        assert_eq!(Window::Absolute(50).bounds(1024), (974, 1074));
        assert_eq!(Window::Relative(0.05).bounds(1), (1, 1));
    }

    #[test]
    fn quantiles_with_implicit_zeros() {
        let nz = [1.0, 2.0, 3.0];
        assert_eq!(median(&nz, 3), 2.0);
        assert_eq!(median(&nz, 4), 1.5);
        assert_eq!(median(&nz, 10), 0.0);
        assert_eq!(quantile(&nz, 10, 0.9), 2.0);
        assert_eq!(quantile(&nz, 3, 0.25), 1.0);
    }

    #[test]
    fn sharp_peak_and_conventions() {
        let mut pairs: Vec<(u64, Dyadic)> = (90..=110).map(|x| (x, Dyadic::pow2_neg(20))).collect();
        pairs.retain(|p| p.0 != 100);
        pairs.push((100, Dyadic::pow2_neg(10)));
        pairs.push((1000, Dyadic::pow2_neg(12)));
        let t = table_of(&pairs);
        let r = peak_report(
            &t,
            &[
                Nat::from(100u64),
                Nat::from(1000u64),
                Nat::from(1u64),
                Nat::from(5000u64),
            ],
            Window::Absolute(10),
        );
        assert_eq!(r[0].x, Nat::from(1000u64));
        assert_eq!(r[0].ratio, Some(f64::INFINITY));
        assert_eq!(r[1].x, Nat::from(100u64));
        assert_eq!(r[1].ratio, Some(1024.0));
        let w = r[1].window.unwrap();
        assert_eq!((w.size, w.nonzero), (20, 20));
        // both zero: no peak
        assert_eq!(
            r.iter().find(|p| p.x == Nat::from(5000u64)).unwrap().ratio,
            Some(1.0)
        );
        let json = serde_json::to_string(&r[0]).unwrap();
        assert!(json.contains(r#""ratio":"+inf""#));
        let back: PeakReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.ratio, Some(f64::INFINITY));
    }

    #[test]
    fn empty_window_is_flagged() {
        let t = table_of(&[(1, Dyadic::pow2_neg(4))]);
        let r = peak_report(&t, &[Nat::from(1u64), Nat::from(40u64)], Window::DEFAULT);
        let one = r.iter().find(|p| p.x == Nat::from(1u64)).unwrap();
        assert!(one.window_empty);
        assert_eq!(one.ratio, None);
        assert_eq!(r.last().unwrap().x, Nat::from(1u64));
    }

    fn planted(f: impl Fn(f64) -> f64) -> Vec<(u64, f64)> {
        (1..=400)
            .map(|i| {
                let n = (10f64.powf(1.0 + 5.0 * i as f64 / 400.0)) as u64;
                (n, f(n as f64))
            })
            .collect()
    }

    #[test]
    fn recovers_inverse_size() {
        let fit = fit_points(&planted(|n| 0.3 / n)).unwrap();
        assert!((fit.epsilon + 1.0).abs() < 0.05, "{}", fit.epsilon);
        assert!(fit.rms_residual < 1e-9);
    }

    #[test]
    fn recovers_log_squared_correction() {
        let fit = fit_points(&planted(|n| 0.3 / (n * n.ln().powi(2)))).unwrap();
        assert!((fit.epsilon - 1.0).abs() < 0.1, "{}", fit.epsilon);
    }

    #[test]
    fn fit_errors() {
        assert_eq!(
            fit_points(&planted(|n| 1.0 / n)[..10]),
            Err(FitError::TooFewPoints(10))
        );
        let t = table_of(&[(5, Dyadic::ONE)]);
        assert_eq!(
            background_fit(&t, 10, 500),
            Err(FitError::Range { a: 10, b: 500 })
        );
        assert_eq!(background_fit(&t, 10, 1000), Err(FitError::TooFewPoints(0)));
    }

    #[test]
    fn table_fit_skips_peaks() {
        let mut pairs: Vec<(u64, Dyadic)> = (10..=10_000u64)
            .map(|n| (n, Dyadic::new((1u128 << 40) / n as u128, 40).unwrap()))
            .collect();
        pairs[990].1 = Dyadic::pow2_neg(2); // n = 1000
        let fit = background_fit(&table_of(&pairs), 10, 10_000).unwrap();
        assert_eq!(fit.excluded_peaks, 1);
        assert!((fit.epsilon + 1.0).abs() < 0.05, "{}", fit.epsilon);
    }
}
