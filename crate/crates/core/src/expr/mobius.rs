use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ExtComplex, MeroExpr};
use crate::Error;

/// Linear fractional map `v ↦ (a v + b)/(c v + d)` with `ad − bc ≠ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl MobiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> crate::Result<Self> {
        let coeffs = [a, b, c, d];
        if coeffs.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("Möbius coefficient".into()));
        }
        if a * d - b * c == Complex64::new(0.0, 0.0) {
            return Err(Error::SingularMobius);
        }
        Ok(MobiusMap { a, b, c, d })
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        MobiusMap { a: one, b: zero, c: zero, d: one }
    }

    pub fn coefficients(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// The map sending `p → 0`, `q → 1`, `r → ∞` (cross-ratio normal form).
    pub fn through_points(p: ExtComplex, q: ExtComplex, r: ExtComplex) -> crate::Result<Self> {
        use ExtComplex::{Finite, Infinity};
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        if p == q || q == r || p == r {
            return Err(Error::SingularMobius);
        }
        match (p, q, r) {
            (Infinity, Finite(q), Finite(r)) => Self::new(zero, q - r, one, -r),
            (Finite(p), Infinity, Finite(r)) => Self::new(one, -p, one, -r),
            (Finite(p), Finite(q), Infinity) => Self::new(one, -p, zero, q - p),
            (Finite(p), Finite(q), Finite(r)) => Self::new(q - r, -p * (q - r), q - p, -r * (q - p)),
            _ => Err(Error::SingularMobius),
        }
    }

    /// Disk automorphism `w ↦ (w − z0)/(w·conj(z0) − 1)`, sending `0 ↦ z0`.
    /// It is an involution.
    pub fn disk_automorphism(z0: Complex64) -> crate::Result<Self> {
        if z0.norm() >= 1.0 {
            return Err(Error::OutsideUnitDisk { z: z0 });
        }
        Self::new(Complex64::new(1.0, 0.0), -z0, z0.conj(), Complex64::new(-1.0, 0.0))
    }

    pub fn apply(&self, v: ExtComplex) -> ExtComplex {
        let zero = Complex64::new(0.0, 0.0);
        match v {
            ExtComplex::Infinity => {
                if self.c == zero {
                    ExtComplex::Infinity
                } else {
                    ExtComplex::from_complex(self.a / self.c)
                }
            }
            ExtComplex::Finite(z) => {
                let den = self.c * z + self.d;
                if den == zero {
                    ExtComplex::Infinity
                } else {
                    ExtComplex::from_complex((self.a * z + self.b) / den)
                }
            }
        }
    }

    pub fn inverse(&self) -> Self {
        MobiusMap { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> Self {
        MobiusMap {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// The map applied to an expression, `(a e + b)/(c e + d)`.
    pub fn to_expr(&self, inner: &MeroExpr) -> MeroExpr {
        let num = MeroExpr::constant(self.a) * inner.clone() + MeroExpr::constant(self.b);
        let den = MeroExpr::constant(self.c) * inner.clone() + MeroExpr::constant(self.d);
        num / den
    }
}

/// Applies `t` to `v`.
pub fn mobius_apply(t: &MobiusMap, v: ExtComplex) -> ExtComplex {
    t.apply(v)
}
