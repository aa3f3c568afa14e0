use num_complex::Complex64;

use super::{ExtComplex, MeroExpr};

/// `2√2 |f′| / (1 + |f|²)`, the length of the Euclidean gradient of
/// `stereographic ∘ f`.
pub fn spherical_gradient(e: &MeroExpr, z: Complex64) -> crate::Result<f64> {
    SphericalMap::new(e.clone()).gradient(z)
}

/// A meromorphic function together with the derivatives needed for its
/// spherical gradient, built once for repeated evaluation.
#[derive(Clone, Debug)]
pub struct SphericalMap {
    f: MeroExpr,
    df: MeroExpr,
    inv: MeroExpr,
    dinv: MeroExpr,
}

impl SphericalMap {
    pub fn new(f: MeroExpr) -> Self {
        let df = f.derivative();
        let inv = MeroExpr::one() / f.clone();
        let dinv = inv.derivative();
        SphericalMap { f, df, inv, dinv }
    }

    pub fn expr(&self) -> &MeroExpr {
        &self.f
    }

    pub fn value(&self, z: Complex64) -> crate::Result<ExtComplex> {
        self.f.eval_ext(z)
    }

    pub fn gradient(&self, z: Complex64) -> crate::Result<f64> {
        const K: f64 = 2.0 * std::f64::consts::SQRT_2;
        // Fast path: clean finite evaluation with |f| ≤ 1.
        if let (Some(v), Some(d)) = (self.f.try_eval(z), self.df.try_eval(z)) {
            if v.norm_sqr() <= 1.0 {
                return Ok(K * d.norm() / (1.0 + v.norm_sqr()));
            }
            if let (Some(h), Some(dh)) = (self.inv.try_eval(z), self.dinv.try_eval(z)) {
                return Ok(K * dh.norm() / (1.0 + h.norm_sqr()));
            }
        }
        match self.f.eval_ext(z)? {
            ExtComplex::Finite(v) if v.norm_sqr() <= 1.0 => {
                let d = self.df.eval_ext(z)?;
                Ok(K * d.finite().map_or(f64::INFINITY, |d| d.norm()) / (1.0 + v.norm_sqr()))
            }
            _ => {
                let h = self.inv.eval_ext(z)?;
                let dh = self.dinv.eval_ext(z)?;
                let h2 = h.norm_sqr();
                Ok(K * dh.finite().map_or(f64::INFINITY, |d| d.norm()) / (1.0 + h2))
            }
        }
    }
}
