use statrs::distribution::{ContinuousCDF, Normal};
use statrs::statistics::{Data, OrderStatistics, RankTieBreaker, Statistics};

/// Spearman's rho: Pearson correlation of average ranks. `None` when either
/// side is constant or fewer than two pairs are given.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return None;
    }
    let rx = Data::new(x.to_vec()).ranks(RankTieBreaker::Average);
    let ry = Data::new(y.to_vec()).ranks(RankTieBreaker::Average);
    let sx = rx.iter().std_dev();
    let sy = ry.iter().std_dev();
    if sx == 0.0 || sy == 0.0 {
        return None;
    }
    Some((rx.iter().covariance(ry.iter()) / (sx * sy)).clamp(-1.0, 1.0))
}

/// Two-sided p-value of the standard normal at `|z|`.
pub fn normal_two_sided(z: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * n.sf(z.abs())).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoProportion {
    pub z: f64,
    pub p_value: f64,
    /// Sign of `p1 - p2`.
    pub direction: i8,
}

/// Pooled two-proportion z-test of `x1/n1` against `x2/n2`, optionally with
/// Yates' continuity correction. Returns `p = 1` when no events occurred.
pub fn two_proportion(x1: u64, n1: u64, x2: u64, n2: u64, continuity: bool) -> TwoProportion {
    assert!(n1 > 0 && n2 > 0);
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let p1 = x1 as f64 / n1f;
    let p2 = x2 as f64 / n2f;
    let pooled = (x1 + x2) as f64 / (n1f + n2f);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    let diff = p1 - p2;
    let direction = if diff > 0.0 {
        1
    } else if diff < 0.0 {
        -1
    } else {
        0
    };
    if se == 0.0 {
        return TwoProportion {
            z: 0.0,
            p_value: 1.0,
            direction,
        };
    }
    let cc = if continuity {
        0.5 * (1.0 / n1f + 1.0 / n2f)
    } else {
        0.0
    };
    let z = (diff.abs() - cc).max(0.0) / se;
    TwoProportion {
        z: z * f64::from(direction),
        p_value: normal_two_sided(z),
        direction,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample Kolmogorov-Smirnov test against Uniform(0, 1), with the
/// asymptotic Kolmogorov distribution (Stephens' small-sample correction).
pub fn ks_uniform(values: &[f64]) -> KsResult {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let nf = n as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i + 1) as f64 / nf - x).max(x - i as f64 / nf)
        })
        .fold(0.0, f64::max);
    let sn = nf.sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    KsResult {
        statistic: d,
        p_value: kolmogorov_q(lambda),
        n,
    }
}

/// `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2 k² λ²)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
