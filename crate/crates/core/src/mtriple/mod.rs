//! Weierstrass m-triples `(Σ, f dz, g)` with metric
//! `ds² = (1+|g|²)^m |f|² |dz|²`.

mod domain;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use domain::{point_segment_distance, DomainSpec, Region};

use crate::expr::{local_order, ExtComplex, MeroExpr};
use crate::poly::{cluster, Rational};
use crate::Error;

/// Above this modulus of `g` the metric is evaluated through `1/g`.
pub const POLE_ROUTE_THRESHOLD: f64 = 1e6;

/// Default finite-difference step of [`MTriple::curvature_fd`].
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// One candidate point of the divisor check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityPoint {
    pub point: Complex64,
    pub order_f: i32,
    pub order_g: i32,
    pub verdict: bool,
}

/// Result of comparing `(f dz)_0` with `m (g)_∞` at every zero or pole of
/// `f` and pole of `g` inside the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub points: Vec<RegularityPoint>,
    pub overall: bool,
}

/// Serialized form of a triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleConfig {
    pub domain: DomainSpec,
    pub f: MeroExpr,
    pub g: MeroExpr,
    pub m: u32,
}

impl TripleConfig {
    pub fn build(&self) -> crate::Result<MTriple> {
        make_triple(self.domain.clone(), self.f.clone(), self.g.clone(), self.m)
    }
}

/// A Weierstrass m-triple on a planar domain.
#[derive(Clone, Debug)]
pub struct MTriple {
    domain: DomainSpec,
    f: MeroExpr,
    g: MeroExpr,
    m: u32,
    regularity: Option<RegularityReport>,
    dg: MeroExpr,
    ghat: MeroExpr,
    dghat: MeroExpr,
    fhat: MeroExpr,
}

/// Runs the divisor check for rational `f`, `g` and returns the report
/// without failing on violations.
pub fn check_regularity(
    domain: &DomainSpec,
    f: &MeroExpr,
    g: &MeroExpr,
    m: u32,
) -> crate::Result<RegularityReport> {
    let rf = Rational::from_expr(f)?;
    let rg = Rational::from_expr(g)?;
    if rf.num.is_zero() {
        return Err(Error::IdenticallyZero { z: Complex64::new(0.0, 0.0) });
    }
    let mut cands = Vec::new();
    for p in [&rf.num, &rf.den, &rg.den] {
        cands.extend(cluster(&p.roots(), 1e-3));
    }
    let cands = cluster(&cands, 1e-6);
    let mut points = Vec::new();
    for p in cands {
        if !domain.region.contains(p) {
            continue;
        }
        if domain.nearest_puncture(p).is_some_and(|(_, d)| d < 1e-6) {
            continue;
        }
        let order_f = local_order(f, p)?;
        if order_f < 0 {
            return Err(Error::NonHolomorphic { z: p });
        }
        let order_g = match local_order(g, p) {
            Ok(k) => k,
            // A zero of g of unresolved order is irrelevant to the divisor
            // condition; only poles matter.
            Err(Error::IdenticallyZero { .. }) => 0,
            Err(e) => return Err(e),
        };
        let expected = m as i32 * (-order_g).max(0);
        points.push(RegularityPoint {
            point: p,
            order_f,
            order_g,
            verdict: order_f == expected,
        });
    }
    points.sort_by(|a, b| {
        a.point
            .re
            .total_cmp(&b.point.re)
            .then(a.point.im.total_cmp(&b.point.im))
    });
    let overall = points.iter().all(|p| p.verdict);
    Ok(RegularityReport { points, overall })
}

/// Builds a triple, checking regularity when `f` and `g` are rational.
/// Triples with `exp` nodes are accepted with the check marked as not run.
pub fn make_triple(domain: DomainSpec, f: MeroExpr, g: MeroExpr, m: u32) -> crate::Result<MTriple> {
    if m == 0 {
        return Err(Error::InvalidM);
    }
    domain.validate()?;
    let regularity = if f.is_rational() && g.is_rational() {
        let report = check_regularity(&domain, &f, &g, m)?;
        if let Some(bad) = report.points.iter().find(|p| !p.verdict) {
            return Err(Error::RegularityViolation {
                z: bad.point,
                order_f: bad.order_f,
                order_g: bad.order_g,
            });
        }
        Some(report)
    } else {
        None
    };
    let mut t = MTriple::unchecked(domain, f, g, m)?;
    t.regularity = regularity;
    Ok(t)
}

fn lambda_from(f: Complex64, g2: f64, m: u32) -> f64 {
    (1.0 + g2).powf(0.5 * m as f64) * f.norm()
}

fn curvature_from(f: Complex64, g2: f64, dg: Complex64, m: u32) -> f64 {
    -2.0 * m as f64 * dg.norm_sqr() / ((1.0 + g2).powi(m as i32 + 2) * f.norm_sqr())
}

impl MTriple {
    /// Builds a triple without the divisor check (used for associated
    /// triples of surface data whose regularity is implied by construction).
    pub fn unchecked(domain: DomainSpec, f: MeroExpr, g: MeroExpr, m: u32) -> crate::Result<MTriple> {
        if m == 0 {
            return Err(Error::InvalidM);
        }
        let dg = g.derivative();
        let ghat = MeroExpr::one() / g.clone();
        let dghat = ghat.derivative();
        let fhat = MeroExpr::powi(g.clone(), m as i32) * f.clone();
        Ok(MTriple { domain, f, g, m, regularity: None, dg, ghat, dghat, fhat })
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn f(&self) -> &MeroExpr {
        &self.f
    }

    pub fn g(&self) -> &MeroExpr {
        &self.g
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `None` when the check was not run (non-rational data).
    pub fn regularity(&self) -> Option<&RegularityReport> {
        self.regularity.as_ref()
    }

    pub fn config(&self) -> TripleConfig {
        TripleConfig {
            domain: self.domain.clone(),
            f: self.f.clone(),
            g: self.g.clone(),
            m: self.m,
        }
    }

    /// The same triple with `f` replaced by `c·f`.
    pub fn scaled(&self, c: Complex64) -> crate::Result<MTriple> {
        let mut t = MTriple::unchecked(
            self.domain.clone(),
            MeroExpr::constant(c) * self.f.clone(),
            self.g.clone(),
            self.m,
        )?;
        t.regularity = self.regularity.clone();
        Ok(t)
    }

    /// `(f, |g|², g′)` on the direct route, or the hatted quantities on the
    /// `1/g` route.
    fn local_data(&self, z: Complex64) -> crate::Result<(Complex64, f64, Complex64)> {
        if let (Some(g), Some(dg)) = (self.g.try_eval(z), self.dg.try_eval(z)) {
            if g.norm() <= POLE_ROUTE_THRESHOLD {
                let f = match self.f.try_eval(z) {
                    Some(f) => f,
                    None => match self.f.eval_ext(z)? {
                        ExtComplex::Finite(f) => f,
                        ExtComplex::Infinity => return Err(Error::NonHolomorphic { z }),
                    },
                };
                return Ok((f, g.norm_sqr(), dg));
            }
        }
        let fin = |v: ExtComplex| match v {
            ExtComplex::Finite(x) => Ok(x),
            ExtComplex::Infinity => Err(Error::DegenerateMetric { z }),
        };
        let fh = fin(self.fhat.eval_ext(z)?)?;
        let gh = fin(self.ghat.eval_ext(z)?)?;
        let dgh = fin(self.dghat.eval_ext(z)?)?;
        Ok((fh, gh.norm_sqr(), dgh))
    }

    /// Density `λ = (1+|g|²)^{m/2} |f|` of `ds = λ |dz|`.
    pub fn metric_density(&self, z: Complex64) -> crate::Result<f64> {
        self.domain.check_point(z)?;
        self.density_at(z)
    }

    /// Density without the domain check.
    pub fn density_at(&self, z: Complex64) -> crate::Result<f64> {
        let (f, g2, _) = self.local_data(z)?;
        let l = lambda_from(f, g2, self.m);
        if l.is_finite() {
            Ok(l)
        } else {
            Err(Error::DegenerateMetric { z })
        }
    }

    /// Density as a plain number (`NaN` where evaluation fails), for hot
    /// loops that check finiteness themselves.
    pub fn density(&self, z: Complex64) -> f64 {
        self.density_at(z).unwrap_or(f64::NAN)
    }

    /// Closed-form Gaussian curvature
    /// `K = −2m|g′|² / ((1+|g|²)^{m+2} |f|²)`.
    pub fn curvature(&self, z: Complex64) -> crate::Result<f64> {
        self.domain.check_point(z)?;
        self.curvature_at(z)
    }

    /// Curvature without the domain check.
    pub fn curvature_at(&self, z: Complex64) -> crate::Result<f64> {
        let (f, g2, dg) = self.local_data(z)?;
        if f == Complex64::new(0.0, 0.0) {
            return Err(Error::DegenerateMetric { z });
        }
        let k = curvature_from(f, g2, dg, self.m);
        if k.is_finite() {
            Ok(k)
        } else {
            Err(Error::DegenerateMetric { z })
        }
    }

    /// `−Δ log λ / λ²` with the 5-point Laplacian of step `h`.
    pub fn curvature_fd(&self, z: Complex64, h: f64) -> crate::Result<f64> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidLevels(format!("finite-difference step {h}")));
        }
        let log_l = |w: Complex64| -> crate::Result<f64> {
            if !self.domain.region.contains(w)
                || self.domain.nearest_puncture(w).is_some_and(|(_, d)| d <= h)
            {
                return Err(Error::OutsideDomain { z: w });
            }
            let l = self.density_at(w)?;
            if !(l > 1e-300) {
                return Err(Error::DegenerateMetric { z: w });
            }
            Ok(l.ln())
        };
        let c = log_l(z)?;
        let mut s = -4.0 * c;
        for d in [
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
            Complex64::new(0.0, h),
            Complex64::new(0.0, -h),
        ] {
            s += log_l(z + d)?;
        }
        let lap = s / (h * h);
        Ok(-lap / (2.0 * c).exp())
    }

    /// Richardson combination `(4 K(h/2) − K(h))/3` of [`MTriple::curvature_fd`].
    pub fn curvature_fd_richardson(&self, z: Complex64, h: f64) -> crate::Result<f64> {
        let k1 = self.curvature_fd(z, h)?;
        let k2 = self.curvature_fd(z, 0.5 * h)?;
        Ok((4.0 * k2 - k1) / 3.0)
    }
}
