//! The extended complex plane and its spherical geometry.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

/// A point of the Riemann sphere: a finite complex number or `∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtComplex {
    Finite(Complex64),
    Infinity,
}

impl ExtComplex {
    pub const ZERO: ExtComplex = ExtComplex::Finite(Complex64::new(0.0, 0.0));

    /// Checked constructor; NaN components are rejected and infinite
    /// components map to `∞`.
    pub fn new(z: Complex64) -> crate::Result<Self> {
        if z.re.is_nan() || z.im.is_nan() {
            return Err(Error::NonFinite(format!("{z}")));
        }
        Ok(Self::from_complex(z))
    }

    /// Maps any non-finite value to `∞`.
    pub fn from_complex(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            ExtComplex::Finite(z)
        } else {
            ExtComplex::Infinity
        }
    }

    pub fn real(x: f64) -> Self {
        ExtComplex::Finite(Complex64::new(x, 0.0))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtComplex::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            ExtComplex::Finite(z) => Some(z),
            ExtComplex::Infinity => None,
        }
    }

    /// `1/v` on the sphere (`0 ↔ ∞`).
    pub fn recip(&self) -> Self {
        match *self {
            ExtComplex::Infinity => ExtComplex::ZERO,
            ExtComplex::Finite(z) if z == Complex64::new(0.0, 0.0) => ExtComplex::Infinity,
            ExtComplex::Finite(z) => ExtComplex::from_complex(z.inv()),
        }
    }

    /// Squared modulus, `+∞` at infinity.
    pub fn norm_sqr(&self) -> f64 {
        match self {
            ExtComplex::Finite(z) => z.norm_sqr(),
            ExtComplex::Infinity => f64::INFINITY,
        }
    }
}

impl From<Complex64> for ExtComplex {
    fn from(z: Complex64) -> Self {
        ExtComplex::from_complex(z)
    }
}

impl fmt::Display for ExtComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtComplex::Infinity => write!(f, "inf"),
            ExtComplex::Finite(z) => {
                if z.im == 0.0 {
                    write!(f, "{}", z.re)
                } else if z.re == 0.0 {
                    write!(f, "{}*i", z.im)
                } else if z.im < 0.0 {
                    write!(f, "{}-{}*i", z.re, -z.im)
                } else {
                    write!(f, "{}+{}*i", z.re, z.im)
                }
            }
        }
    }
}

impl FromStr for ExtComplex {
    type Err = Error;

    /// Accepts `inf`, `infinity`, `∞`, or any constant expression in the
    /// expression grammar (`-1`, `0.5+2*i`, ...).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "∞" | "Infinity") {
            return Ok(ExtComplex::Infinity);
        }
        let e = super::parse_mero(t)?;
        if e.contains_var() {
            return Err(Error::NonFinite(format!("`{t}` is not a constant")));
        }
        e.eval_ext(Complex64::new(0.0, 0.0))
    }
}

impl Serialize for ExtComplex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = ExtComplex;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a number, \"inf\", or a constant expression string")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                ExtComplex::new(Complex64::new(v, 0.0)).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                Ok(ExtComplex::real(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Ok(ExtComplex::real(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// Half the chordal distance: the Euclidean distance of the stereographic
/// images divided by two. Bounded by 1.
pub fn chordal(a: ExtComplex, b: ExtComplex) -> f64 {
    match (a, b) {
        (ExtComplex::Infinity, ExtComplex::Infinity) => 0.0,
        (ExtComplex::Finite(z), ExtComplex::Infinity) | (ExtComplex::Infinity, ExtComplex::Finite(z)) => {
            1.0 / (1.0 + z.norm_sqr()).sqrt()
        }
        (ExtComplex::Finite(z), ExtComplex::Finite(w)) => {
            (z - w).norm() / ((1.0 + z.norm_sqr()).sqrt() * (1.0 + w.norm_sqr()).sqrt())
        }
    }
}

/// Inverse stereographic projection from the north pole `(0,0,1) ↔ ∞`.
pub fn stereographic(v: ExtComplex) -> [f64; 3] {
    match v {
        ExtComplex::Infinity => [0.0, 0.0, 1.0],
        ExtComplex::Finite(w) => {
            let n = w.norm_sqr();
            if n > 1.0 {
                // Rewrite in terms of 1/w so huge |w| keeps full precision.
                let u = w.inv();
                let m = u.norm_sqr();
                let d = 1.0 + m;
                // 2w/(|w|²+1) = 2 conj(u)/(1+|u|²)
                [2.0 * u.re / d, -2.0 * u.im / d, (1.0 - m) / d]
            } else {
                let d = n + 1.0;
                [2.0 * w.re / d, 2.0 * w.im / d, (n - 1.0) / d]
            }
        }
    }
}

/// Inverse of [`stereographic`] for unit vectors.
pub fn from_sphere(p: [f64; 3]) -> ExtComplex {
    let d = 1.0 - p[2];
    if d <= 0.0 {
        return ExtComplex::Infinity;
    }
    ExtComplex::from_complex(Complex64::new(p[0] / d, p[1] / d))
}
