use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::MeroExpr;
use crate::Error;

/// Sampling radii and integer-snap tolerance for [`local_order`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrderConfig {
    pub radii: Vec<f64>,
    pub snap_tol: f64,
    pub angles: usize,
}

impl Default for OrderConfig {
    fn default() -> Self {
        OrderConfig {
            radii: vec![1e-3, 1e-4, 1e-5],
            snap_tol: 0.2,
            angles: 8,
        }
    }
}

/// Order of vanishing (positive), pole order (negative) or 0, from the
/// least-squares slope of `log|e|` against `log r` on small circles around
/// `z0`.
pub fn local_order(e: &MeroExpr, z0: Complex64) -> crate::Result<i32> {
    local_order_with(e, z0, &OrderConfig::default())
}

pub fn local_order_with(e: &MeroExpr, z0: Complex64, cfg: &OrderConfig) -> crate::Result<i32> {
    if !e.is_rational() {
        return Err(Error::NotRational);
    }
    if cfg.radii.len() < 2 || cfg.angles == 0 || cfg.radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidLevels("local_order needs ≥ 2 positive radii".into()));
    }
    let mut xs = Vec::with_capacity(cfg.radii.len());
    let mut ys = Vec::with_capacity(cfg.radii.len());
    for &r in &cfg.radii {
        let mut acc = 0.0;
        for k in 0..cfg.angles {
            // Offset the angles so no sample lands on a real-axis zero by symmetry.
            let th = (k as f64 + 0.5) * std::f64::consts::TAU / cfg.angles as f64;
            let z = z0 + Complex64::from_polar(r, th);
            let v = e.eval(z).norm();
            if v == 0.0 {
                return Err(Error::IdenticallyZero { z: z0 });
            }
            if !v.is_finite() {
                return Err(Error::OrderUndetermined { z: z0, slope: f64::NAN });
            }
            acc += v.ln();
        }
        xs.push(r.ln());
        ys.push(acc / cfg.angles as f64);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let k = slope.round();
    if !slope.is_finite() || (slope - k).abs() > cfg.snap_tol {
        return Err(Error::OrderUndetermined { z: z0, slope });
    }
    Ok(k as i32)
}
