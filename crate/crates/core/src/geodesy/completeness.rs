use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::distance::segment_length;
use crate::mtriple::MTriple;
use crate::Error;

/// Where a completeness probe heads.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeTarget {
    /// A puncture or a boundary point; the path stops at distance `ε`.
    Point { at: Complex64 },
    /// The point at infinity along the ray of angle `angle`; the path stops
    /// at radius `1/ε`.
    Infinity { angle: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitModel {
    /// `L ≈ a·log(1/ε) + b`
    Log { a: f64, b: f64 },
    /// `L ≈ a·ε^{−p} + b`
    Power { a: f64, p: f64, b: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceVerdict {
    DivergenceEvidence,
    NoDivergenceEvidence,
}

/// Truncated lengths of a path toward the ideal boundary and a fitted
/// growth model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub target: ProbeTarget,
    pub start: Complex64,
    pub eps_levels: Vec<f64>,
    pub lengths: Vec<f64>,
    pub model: FitModel,
    /// Slope of `L` against `log(1/ε)` over all levels.
    pub log_slope: f64,
    /// Slopes over the last two three-level windows.
    pub window_slopes: [f64; 2],
    pub fit_residual: f64,
    pub stable: bool,
    pub verdict: DivergenceVerdict,
}

fn lsq(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a * x - b).powi(2)).sum();
    (a, b, (rss / n).sqrt())
}

fn default_start(t: &MTriple, target: &ProbeTarget) -> Complex64 {
    let d = t.domain();
    let center = d.region.center();
    match *target {
        ProbeTarget::Infinity { angle } => {
            if d.punctures.iter().all(|&p| (p - center).norm() >= 1e-12) {
                return center;
            }
            let others = d
                .punctures
                .iter()
                .map(|&p| (p - center).norm())
                .filter(|&r| r >= 1e-12)
                .fold(1.0, f64::min);
            center + Complex64::from_polar(0.5 * others, angle)
        }
        ProbeTarget::Point { at } => {
            let on_boundary = d.region.boundary_distance(at).abs() < 1e-9 * (1.0 + d.region.diameter());
            let avoid_center = d.punctures.iter().any(|&p| (p - center).norm() < 1e-12);
            if on_boundary && !avoid_center {
                return center;
            }
            let others = d
                .punctures
                .iter()
                .filter(|&&p| p != at)
                .map(|&p| (p - at).norm())
                .fold(f64::INFINITY, f64::min);
            let mut r0 = 0.5 * others.min(d.region.boundary_distance(at).abs().max(0.0));
            if on_boundary || !r0.is_finite() || r0 <= 0.0 {
                r0 = 0.5 * others.min(d.region.diameter() * 0.25);
            }
            let dir = if (center - at).norm() > 1e-12 {
                (center - at) / (center - at).norm()
            } else {
                Complex64::new(0.0, 1.0)
            };
            at + dir * r0
        }
    }
}

/// Integrates `λ` along the straight path toward `target`, truncated at each
/// level `ε`, and fits the growth of `L(ε)`. The verdict is evidence of
/// divergence iff the fitted slope is positive and the last two window
/// slopes agree within 10%.
pub fn completeness_probe(
    t: &MTriple,
    target: ProbeTarget,
    eps_levels: &[f64],
    start: Option<Complex64>,
) -> crate::Result<CompletenessReport> {
    if eps_levels.len() < 4 {
        return Err(Error::InvalidLevels("need at least 4 levels".into()));
    }
    if eps_levels.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidLevels("levels must be strictly decreasing".into()));
    }
    let smallest = *eps_levels.last().unwrap();
    if !(smallest >= 1e-8) || !eps_levels[0].is_finite() {
        return Err(Error::InvalidLevels("levels must lie in [1e-8, ∞)".into()));
    }
    let start = start.unwrap_or_else(|| default_start(t, &target));
    let point_at = |eps: f64| -> crate::Result<Complex64> {
        match target {
            ProbeTarget::Point { at } => {
                let r = (start - at).norm();
                if eps >= r {
                    return Err(Error::InvalidLevels(format!("level {eps} exceeds the path length {r}")));
                }
                Ok(at + (start - at) * (eps / r))
            }
            ProbeTarget::Infinity { angle } => {
                let r = 1.0 / eps;
                if r <= start.norm() {
                    return Err(Error::InvalidLevels(format!("radius 1/{eps} does not leave the start point")));
                }
                Ok(Complex64::from_polar(r, angle))
            }
        }
    };
    let density = |z: Complex64| t.density(z);
    let mut lengths = Vec::with_capacity(eps_levels.len());
    let mut prev = start;
    let mut acc = 0.0;
    for &eps in eps_levels {
        let p = point_at(eps)?;
        let seg = segment_length(&density, prev, p, 1e-10).map_err(|_| Error::IntegrandOverflow { eps })?;
        if !seg.is_finite() {
            return Err(Error::IntegrandOverflow { eps });
        }
        acc += seg;
        lengths.push(acc);
        prev = p;
    }

    let xs: Vec<f64> = eps_levels.iter().map(|e| (1.0 / e).ln()).collect();
    let (a, b, res_log) = lsq(&xs, &lengths);
    let n = xs.len();
    let w1 = lsq(&xs[n - 4..n - 1], &lengths[n - 4..n - 1]).0;
    let w2 = lsq(&xs[n - 3..], &lengths[n - 3..]).0;

    // Growth exponent from consecutive increments per unit log(1/ε).
    let incr: Vec<f64> = (1..n)
        .map(|k| (lengths[k] - lengths[k - 1]) / (xs[k] - xs[k - 1]))
        .collect();
    let p_est = {
        let m = incr.len();
        let (i0, i1) = (incr[m - 2], incr[m - 1]);
        if i0 > 0.0 && i1 > 0.0 {
            (i1 / i0).ln() / (xs[n - 1] - xs[n - 2])
        } else {
            0.0
        }
    };
    let (model, residual, slope_pair) = if p_est > 0.1 {
        let zs: Vec<f64> = eps_levels.iter().map(|e| e.powf(-p_est)).collect();
        let (pa, pb, res) = lsq(&zs, &lengths);
        let s1 = lsq(&zs[n - 4..n - 1], &lengths[n - 4..n - 1]).0;
        let s2 = lsq(&zs[n - 3..], &lengths[n - 3..]).0;
        (FitModel::Power { a: pa, p: p_est, b: pb }, res, [s1, s2])
    } else {
        (FitModel::Log { a, b }, res_log, [w1, w2])
    };
    let scale = slope_pair[0].abs().max(slope_pair[1].abs());
    let stable = scale > 0.0 && (slope_pair[0] - slope_pair[1]).abs() <= 0.1 * scale;
    let positive = match model {
        FitModel::Log { a, .. } => a > 0.0,
        FitModel::Power { a, .. } => a > 0.0,
    } && slope_pair[1] > 0.0;
    let verdict = if positive && stable {
        DivergenceVerdict::DivergenceEvidence
    } else {
        DivergenceVerdict::NoDivergenceEvidence
    };
    Ok(CompletenessReport {
        target,
        start,
        eps_levels: eps_levels.to_vec(),
        lengths,
        model,
        log_slope: a,
        window_slopes: slope_pair,
        fit_residual: residual,
        stable,
        verdict,
    })
}

/// `10^{-1}, …, 10^{-k}`.
pub fn decade_levels(k: u32) -> Vec<f64> {
    (1..=k as i32).map(|e| 10f64.powi(-e)).collect()
}
