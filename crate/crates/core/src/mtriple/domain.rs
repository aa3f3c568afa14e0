use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::Error;

fn origin() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Planar region carrying an m-triple. Complex numbers serialize as
/// `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Region {
    Disk {
        #[serde(default = "origin")]
        center: Complex64,
        radius: f64,
    },
    Annulus {
        #[serde(default = "origin")]
        center: Complex64,
        r_in: f64,
        r_out: f64,
    },
    Rectangle {
        min: Complex64,
        max: Complex64,
    },
    /// The plane truncated to `|z| < radius`.
    TruncatedPlane { radius: f64 },
}

/// A region minus finitely many punctures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub region: Region,
    #[serde(default)]
    pub punctures: Vec<Complex64>,
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl Region {
    pub fn unit_disk() -> Self {
        Region::Disk { center: origin(), radius: 1.0 }
    }

    pub fn disk(center: Complex64, radius: f64) -> Self {
        Region::Disk { center, radius }
    }

    fn validate(&self) -> crate::Result<()> {
        let bad = |m: &str| Err(Error::InvalidDomain(m.to_string()));
        match *self {
            Region::Disk { center, radius } => {
                if !finite(center) || !(radius > 0.0 && radius.is_finite()) {
                    return bad("disk needs a finite center and radius > 0");
                }
            }
            Region::Annulus { center, r_in, r_out } => {
                if !finite(center) || !(r_in > 0.0 && r_in < r_out && r_out.is_finite()) {
                    return bad("annulus needs 0 < r_in < r_out");
                }
            }
            Region::Rectangle { min, max } => {
                if !finite(min) || !finite(max) || !(min.re < max.re && min.im < max.im) {
                    return bad("rectangle needs min < max in both coordinates");
                }
            }
            Region::TruncatedPlane { radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return bad("truncated plane needs radius > 0");
                }
            }
        }
        Ok(())
    }

    /// Open-region membership.
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Region::Disk { center, radius } => (z - center).norm() < radius,
            Region::Annulus { center, r_in, r_out } => {
                let r = (z - center).norm();
                r > r_in && r < r_out
            }
            Region::Rectangle { min, max } => {
                z.re > min.re && z.re < max.re && z.im > min.im && z.im < max.im
            }
            Region::TruncatedPlane { radius } => z.norm() < radius,
        }
    }

    /// Euclidean distance from an interior point to the boundary.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        match *self {
            Region::Disk { center, radius } => radius - (z - center).norm(),
            Region::Annulus { center, r_in, r_out } => {
                let r = (z - center).norm();
                (r - r_in).min(r_out - r)
            }
            Region::Rectangle { min, max } => (z.re - min.re)
                .min(max.re - z.re)
                .min(z.im - min.im)
                .min(max.im - z.im),
            Region::TruncatedPlane { radius } => radius - z.norm(),
        }
    }

    /// Membership in the region shrunk by the relative `inset` (the same
    /// shrinking as [`Region::inset_boundary`]).
    pub fn inset_contains(&self, z: Complex64, inset: f64) -> bool {
        match *self {
            Region::Disk { center, radius } => (z - center).norm() < radius * (1.0 - inset),
            Region::TruncatedPlane { radius } => z.norm() < radius * (1.0 - inset),
            Region::Annulus { center, r_in, r_out } => {
                let r = (z - center).norm();
                r > r_in * (1.0 + inset) && r < r_out * (1.0 - inset)
            }
            Region::Rectangle { min, max } => {
                let d = inset * 0.5 * (max.re - min.re).min(max.im - min.im);
                z.re > min.re + d && z.re < max.re - d && z.im > min.im + d && z.im < max.im - d
            }
        }
    }

    /// A representative interior point (center for round regions; for an
    /// annulus, the midpoint of the positive real radius).
    pub fn center(&self) -> Complex64 {
        match *self {
            Region::Disk { center, .. } => center,
            Region::Annulus { center, r_in, r_out } => center + Complex64::new(0.5 * (r_in + r_out), 0.0),
            Region::Rectangle { min, max } => 0.5 * (min + max),
            Region::TruncatedPlane { .. } => origin(),
        }
    }

    /// `(min corner, max corner)` of the bounding box.
    pub fn bbox(&self) -> (Complex64, Complex64) {
        let sq = |c: Complex64, r: f64| (c - Complex64::new(r, r), c + Complex64::new(r, r));
        match *self {
            Region::Disk { center, radius } => sq(center, radius),
            Region::Annulus { center, r_out, .. } => sq(center, r_out),
            Region::Rectangle { min, max } => (min, max),
            Region::TruncatedPlane { radius } => sq(origin(), radius),
        }
    }

    /// Whether the straight segment `a → b` stays inside the region, given
    /// that both endpoints do.
    pub fn segment_inside(&self, a: Complex64, b: Complex64) -> bool {
        match *self {
            Region::Annulus { center, r_in, .. } => point_segment_distance(center, a, b) > r_in,
            _ => true,
        }
    }

    /// Points on the boundary pulled inward by the relative `inset`
    /// (`radius·(1 − inset)` for circles), with spacing about `spacing`.
    pub fn inset_boundary(&self, inset: f64, spacing: f64) -> Vec<Complex64> {
        let circle = |c: Complex64, r: f64| {
            let n = ((std::f64::consts::TAU * r / spacing).ceil() as usize).max(16);
            (0..n)
                .map(|k| c + Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / n as f64))
                .collect::<Vec<_>>()
        };
        match *self {
            Region::Disk { center, radius } => circle(center, radius * (1.0 - inset)),
            Region::TruncatedPlane { radius } => circle(origin(), radius * (1.0 - inset)),
            Region::Annulus { center, r_in, r_out } => {
                let mut v = circle(center, r_out * (1.0 - inset));
                v.extend(circle(center, r_in * (1.0 + inset)));
                v
            }
            Region::Rectangle { min, max } => {
                let half = 0.5 * (max.re - min.re).min(max.im - min.im);
                let d = inset * half;
                let (lo, hi) = (min + Complex64::new(d, d), max - Complex64::new(d, d));
                let mut v = Vec::new();
                let edge = |p: Complex64, q: Complex64, v: &mut Vec<Complex64>| {
                    let n = (((q - p).norm() / spacing).ceil() as usize).max(1);
                    for k in 0..n {
                        v.push(p + (q - p) * (k as f64 / n as f64));
                    }
                };
                let c2 = Complex64::new(hi.re, lo.im);
                let c4 = Complex64::new(lo.re, hi.im);
                edge(lo, c2, &mut v);
                edge(c2, hi, &mut v);
                edge(hi, c4, &mut v);
                edge(c4, lo, &mut v);
                v
            }
        }
    }

    /// Euclidean diameter of the bounding box.
    pub fn diameter(&self) -> f64 {
        let (a, b) = self.bbox();
        (b - a).norm()
    }
}

/// Distance from `p` to the segment `a → b`.
pub fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

impl DomainSpec {
    pub fn new(region: Region, punctures: Vec<Complex64>) -> crate::Result<Self> {
        let d = DomainSpec { region, punctures };
        d.validate()?;
        Ok(d)
    }

    pub fn unit_disk() -> Self {
        DomainSpec { region: Region::unit_disk(), punctures: Vec::new() }
    }

    pub fn validate(&self) -> crate::Result<()> {
        self.region.validate()?;
        for (k, &p) in self.punctures.iter().enumerate() {
            if !finite(p) || !self.region.contains(p) {
                return Err(Error::InvalidDomain(format!("puncture {p} is not strictly inside the region")));
            }
            if self.punctures[..k].contains(&p) {
                return Err(Error::InvalidDomain(format!("puncture {p} listed twice")));
            }
        }
        Ok(())
    }

    /// Nearest puncture and its distance.
    pub fn nearest_puncture(&self, z: Complex64) -> Option<(Complex64, f64)> {
        self.punctures
            .iter()
            .map(|&p| (p, (z - p).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Region membership minus punctures.
    pub fn contains(&self, z: Complex64) -> bool {
        self.region.contains(z) && self.punctures.iter().all(|&p| p != z)
    }

    /// Membership check used by pointwise evaluators: errors at punctures
    /// (within 1e-12) and outside the closed region.
    pub fn check_point(&self, z: Complex64) -> crate::Result<()> {
        if !finite(z) {
            return Err(Error::NonFinite(format!("{z}")));
        }
        if let Some((_, d)) = self.nearest_puncture(z) {
            if d < 1e-12 {
                return Err(Error::AtPuncture { z });
            }
        }
        let slack = 1e-12 * (1.0 + self.region.diameter());
        if self.region.boundary_distance(z) < -slack {
            return Err(Error::OutsideDomain { z });
        }
        Ok(())
    }

    /// Whether the domain has holes (annulus or punctures).
    pub fn multiply_connected(&self) -> bool {
        matches!(self.region, Region::Annulus { .. }) || !self.punctures.is_empty()
    }
}
