//! Truncated Laurent expansions used to resolve `0/0`, `0·∞` and `∞−∞` at a
//! point.

use num_complex::Complex64;

use super::{ExtComplex, MeroExpr};
use crate::Error;

const TERMS: usize = 14;
const SNAP: f64 = 1e-11;
// Valuation used for the exact zero.
const ZERO_VAL: i32 = 1 << 20;

/// `Σ c[k] t^(val+k)` with `t = z − z0`, known exactly up to order
/// `val + c.len()`. An empty `c` means "`O(t^val)`, nothing more is known".
#[derive(Clone, Debug)]
struct Series {
    val: i32,
    c: Vec<Complex64>,
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl Series {
    fn exact_zero() -> Self {
        Series { val: ZERO_VAL, c: Vec::new() }
    }

    fn constant(x: Complex64) -> Self {
        if x == czero() {
            return Self::exact_zero();
        }
        let mut c = vec![czero(); TERMS];
        c[0] = x;
        Series { val: 0, c }
    }

    fn end(&self) -> i32 {
        self.val.saturating_add(self.c.len() as i32).min(ZERO_VAL)
    }

    fn is_exact_zero(&self) -> bool {
        self.val >= ZERO_VAL
    }

    fn coeff(&self, order: i32) -> Complex64 {
        let k = order - self.val;
        if k >= 0 && (k as usize) < self.c.len() {
            self.c[k as usize]
        } else {
            czero()
        }
    }

    /// Drops leading coefficients that are zero up to rounding, relative to
    /// `scale[k]` (the size of the terms that produced them).
    fn normalize(mut self, scale: &[f64]) -> Self {
        let mut lead = 0;
        while lead < self.c.len() {
            let s = scale.get(lead).copied().unwrap_or(0.0);
            let v = self.c[lead].norm();
            if v == 0.0 || v <= SNAP * s {
                lead += 1;
            } else {
                break;
            }
        }
        if lead > 0 {
            self.c.drain(..lead);
            self.val = self.val.saturating_add(lead as i32).min(ZERO_VAL);
        }
        self
    }

    fn add_signed(a: &Series, b: &Series, sign: f64) -> Series {
        if b.is_exact_zero() {
            return a.clone();
        }
        if a.is_exact_zero() {
            return Series {
                val: b.val,
                c: b.c.iter().map(|x| x * sign).collect(),
            };
        }
        let lo = a.val.min(b.val);
        let hi = a.end().min(b.end());
        let n = (hi - lo).max(0) as usize;
        let mut c = Vec::with_capacity(n);
        let mut scale = Vec::with_capacity(n);
        for k in 0..n {
            let o = lo + k as i32;
            let (x, y) = (a.coeff(o), b.coeff(o));
            c.push(x + y * sign);
            scale.push(x.norm().max(y.norm()));
        }
        Series { val: lo, c }.normalize(&scale)
    }

    fn mul(a: &Series, b: &Series) -> Series {
        if a.is_exact_zero() || b.is_exact_zero() {
            return Self::exact_zero();
        }
        let val = a.val.saturating_add(b.val).min(ZERO_VAL);
        let n = a.c.len().min(b.c.len());
        let mut c = vec![czero(); n];
        let mut scale = vec![0.0; n];
        for k in 0..n {
            for j in 0..=k {
                let t = a.c[j] * b.c[k - j];
                c[k] += t;
                scale[k] += t.norm();
            }
        }
        Series { val, c }.normalize(&scale)
    }

    fn div(a: &Series, b: &Series, z: Complex64) -> crate::Result<Series> {
        if b.is_exact_zero() || b.c.is_empty() {
            return Err(Error::Indeterminate {
                z,
                reason: "division by a quantity that vanishes to unresolved order".into(),
            });
        }
        if a.is_exact_zero() {
            return Ok(Self::exact_zero());
        }
        let val = a.val - b.val;
        let n = a.c.len().min(b.c.len());
        let mut c = vec![czero(); n];
        for k in 0..n {
            let mut s = a.c[k];
            for j in 1..=k {
                s -= b.c[j] * c[k - j];
            }
            c[k] = s / b.c[0];
        }
        Ok(Series { val, c })
    }

    fn powi(a: &Series, n: i32, z: Complex64) -> crate::Result<Series> {
        if n == 0 {
            return Ok(Self::constant(Complex64::new(1.0, 0.0)));
        }
        let mut base = a.clone();
        let mut acc = Self::constant(Complex64::new(1.0, 0.0));
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = Self::mul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = Self::mul(&base, &base);
            }
        }
        if n < 0 {
            Self::div(&Self::constant(Complex64::new(1.0, 0.0)), &acc, z)
        } else {
            Ok(acc)
        }
    }

    fn exp(a: &Series, z: Complex64) -> crate::Result<Series> {
        if a.is_exact_zero() {
            return Ok(Self::constant(Complex64::new(1.0, 0.0)));
        }
        if a.c.is_empty() {
            if a.val > 0 {
                // 1 + O(t^val)
                let mut c = vec![czero(); a.val as usize];
                c[0] = Complex64::new(1.0, 0.0);
                return Ok(Series { val: 0, c });
            }
            return Err(Error::Indeterminate {
                z,
                reason: "exponent of unresolved order".into(),
            });
        }
        if a.val < 0 {
            return Err(Error::EssentialSingularity { z });
        }
        // Coefficients by absolute order 0..end.
        let end = a.end() as usize;
        let b: Vec<Complex64> = (0..end).map(|o| a.coeff(o as i32)).collect();
        let e0 = b[0].exp();
        let mut e = vec![czero(); end];
        e[0] = Complex64::new(1.0, 0.0);
        for k in 1..end {
            let mut s = czero();
            for j in 1..=k {
                s += b[j] * e[k - j] * j as f64;
            }
            e[k] = s / k as f64;
        }
        for x in &mut e {
            *x *= e0;
        }
        if !(e0.re.is_finite() && e0.im.is_finite()) {
            return Err(Error::NonFinite(format!("exp overflow at {z}")));
        }
        Ok(Series { val: 0, c: e })
    }
}

fn expand(e: &MeroExpr, z0: Complex64) -> crate::Result<Series> {
    use MeroExpr::*;
    Ok(match e {
        Const(c) => Series::constant(*c),
        Var => {
            let mut s = Series::constant(z0);
            if s.is_exact_zero() {
                let mut c = vec![czero(); TERMS];
                c[0] = Complex64::new(1.0, 0.0);
                s = Series { val: 1, c };
            } else {
                s.c[1] = Complex64::new(1.0, 0.0);
            }
            s
        }
        Add(a, b) => Series::add_signed(&expand(a, z0)?, &expand(b, z0)?, 1.0),
        Sub(a, b) => Series::add_signed(&expand(a, z0)?, &expand(b, z0)?, -1.0),
        Mul(a, b) => Series::mul(&expand(a, z0)?, &expand(b, z0)?),
        Div(a, b) => Series::div(&expand(a, z0)?, &expand(b, z0)?, z0)?,
        Neg(a) => {
            let s = expand(a, z0)?;
            Series {
                val: s.val,
                c: s.c.into_iter().map(|x| -x).collect(),
            }
        }
        Pow(a, n) => Series::powi(&expand(a, z0)?, *n, z0)?,
        Exp(a) => Series::exp(&expand(a, z0)?, z0)?,
    })
}

/// Value at `z0` read off the Laurent expansion.
pub(crate) fn eval_by_series(e: &MeroExpr, z0: Complex64) -> crate::Result<ExtComplex> {
    let s = expand(e, z0)?;
    if s.c.is_empty() {
        if s.val > 0 {
            return Ok(ExtComplex::ZERO);
        }
        return Err(Error::Indeterminate {
            z: z0,
            reason: "local orders of numerator and denominator tie beyond resolution".into(),
        });
    }
    if s.val < 0 {
        return Ok(ExtComplex::Infinity);
    }
    if s.val > 0 {
        return Ok(ExtComplex::ZERO);
    }
    let v = s.c[0];
    if v.re.is_nan() || v.im.is_nan() {
        return Err(Error::Indeterminate {
            z: z0,
            reason: "non-finite expansion coefficient".into(),
        });
    }
    Ok(ExtComplex::from_complex(v))
}

/// Order of vanishing (positive) or pole order (negative) read off the
/// Laurent expansion; `None` when the leading term is not resolved.
pub(crate) fn series_order(e: &MeroExpr, z0: Complex64) -> crate::Result<Option<i32>> {
    let s = expand(e, z0)?;
    if s.is_exact_zero() || s.c.is_empty() {
        return Ok(None);
    }
    Ok(Some(s.val))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_mero;

    fn ev(src: &str, z: Complex64) -> crate::Result<ExtComplex> {
        eval_by_series(&parse_mero(src).unwrap(), z)
    }

    #[test]
    fn removable_singularities() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(ev("(z^2-1)/(z-1)", one).unwrap(), ExtComplex::real(2.0));
        let v = ev("(exp(z)-1)/z", Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(v, ExtComplex::real(1.0));
        let v = ev("(z-1)*(1/(z-1))", one).unwrap();
        assert_eq!(v, ExtComplex::real(1.0));
    }

    #[test]
    fn cancelling_poles() {
        let v = ev("1/z - 1/z + 3", Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(v, ExtComplex::real(3.0));
        let v = ev("(1/z)^2 * z^3", Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(v, ExtComplex::ZERO);
    }

    #[test]
    fn essential_singularity_reported() {
        let r = ev("exp(1/z)", Complex64::new(0.0, 0.0));
        assert!(matches!(r, Err(Error::EssentialSingularity { .. })));
    }

    #[test]
    fn orders() {
        let e = parse_mero("z^3/(z-1)^2").unwrap();
        assert_eq!(series_order(&e, Complex64::new(0.0, 0.0)).unwrap(), Some(3));
        assert_eq!(series_order(&e, Complex64::new(1.0, 0.0)).unwrap(), Some(-2));
    }
}
