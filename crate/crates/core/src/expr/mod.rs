//! Meromorphic expressions and Riemann-sphere geometry.

mod ast;
mod ext;
mod mobius;
mod order;
mod parse;
mod series;
mod sphere;

use num_complex::Complex64;

pub use ast::MeroExpr;
pub use ext::{chordal, from_sphere, stereographic, ExtComplex};
pub use mobius::{mobius_apply, MobiusMap};
pub use order::{local_order, local_order_with, OrderConfig};
pub use parse::parse_mero;
pub use sphere::{spherical_gradient, SphericalMap};

impl MeroExpr {
    /// Value on the Riemann sphere: `∞` at poles; removable `0/0`, `0·∞` and
    /// `∞−∞` sites are resolved from the local Laurent expansion.
    pub fn eval_ext(&self, z: Complex64) -> crate::Result<ExtComplex> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(crate::Error::NonFinite(format!("{z}")));
        }
        match self.try_eval(z) {
            Some(v) => Ok(ExtComplex::Finite(v)),
            None => series::eval_by_series(self, z),
        }
    }

    /// Local order read off the Laurent expansion (works for `exp`-bearing
    /// trees as long as they are analytic at `z0`). `None` if unresolved.
    pub fn laurent_order(&self, z0: Complex64) -> crate::Result<Option<i32>> {
        series::series_order(self, z0)
    }
}

/// Checked evaluation on the Riemann sphere.
pub fn eval_ext(e: &MeroExpr, z: Complex64) -> crate::Result<ExtComplex> {
    e.eval_ext(z)
}

/// Exact symbolic derivative.
pub fn derivative(e: &MeroExpr) -> MeroExpr {
    e.derivative()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_ext_reference_values() {
        let e = parse_mero("1/z").unwrap();
        assert_eq!(e.eval_ext(c(0.0, 0.0)).unwrap(), ExtComplex::Infinity);
        let e = parse_mero("z").unwrap();
        assert_eq!(e.eval_ext(c(1.0, 1.0)).unwrap(), ExtComplex::Finite(c(1.0, 1.0)));
        let e = parse_mero("(z^2-1)/(z-1)").unwrap();
        assert_eq!(e.eval_ext(c(1.0, 0.0)).unwrap(), ExtComplex::real(2.0));
    }

    #[test]
    fn derivative_reference_values() {
        assert_eq!(parse_mero("z^2").unwrap().derivative().to_string(), "2*z");
        assert_eq!(parse_mero("exp(z)").unwrap().derivative().to_string(), "exp(z)");
        let d = parse_mero("1/(z-1)").unwrap().derivative();
        assert_eq!(d.eval_ext(c(0.0, 0.0)).unwrap(), ExtComplex::real(-1.0));
    }

    #[test]
    fn printer_round_trip() {
        for src in [
            "1/(z^2-1)",
            "exp(z)/(1+exp(z))",
            "-z^2",
            "-(z^2)",
            "z-(1-z)",
            "z/(2*z)",
            "(z+i)^-3*exp(-z)",
            "0.125*z - 3e-7",
            "--z",
            "1/z/2",
        ] {
            let e = parse_mero(src).unwrap();
            let printed = e.to_string();
            assert_eq!(parse_mero(&printed).unwrap(), e, "{src} -> {printed}");
        }
    }

    #[test]
    fn folded_constants_reparse_to_equal_values() {
        let e = MeroExpr::constant(c(-2.5, 0.75)) * MeroExpr::var() + MeroExpr::real(-1.0);
        let back = parse_mero(&e.to_string()).unwrap();
        let z = c(0.3, -0.8);
        assert!((back.eval(z) - e.eval(z)).norm() < 1e-15);
    }
}
