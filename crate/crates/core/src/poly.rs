//! Dense complex polynomials, rational-function normal forms and root
//! finding, used to locate zeros and poles of rational expressions.

use num_complex::Complex64;

use crate::expr::MeroExpr;
use crate::Error;

/// Coefficients in ascending order of degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(pub Vec<Complex64>);

fn cz() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl Poly {
    pub fn constant(c: Complex64) -> Self {
        Poly(vec![c]).trimmed()
    }

    pub fn z() -> Self {
        Poly(vec![cz(), Complex64::new(1.0, 0.0)])
    }

    /// Drops trailing coefficients that are zero relative to the largest one.
    pub fn trimmed(mut self) -> Self {
        let scale = self.0.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while let Some(last) = self.0.last() {
            if last.norm() <= 1e-13 * scale || *last == cz() {
                self.0.pop();
            } else {
                break;
            }
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i32 {
        self.0.len() as i32 - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(cz(), |acc, c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let c = (0..n)
            .map(|k| self.0.get(k).copied().unwrap_or(cz()) + o.0.get(k).copied().unwrap_or(cz()))
            .collect();
        Poly(c).trimmed()
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect()).trimmed()
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly(Vec::new());
        }
        let mut c = vec![cz(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly(c).trimmed()
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::constant(Complex64::new(1.0, 0.0));
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// All complex roots with multiplicity (Aberth–Ehrlich iteration).
    pub fn roots(&self) -> Vec<Complex64> {
        let mut c = self.0.clone();
        let mut out = Vec::new();
        // Exact roots at the origin.
        while c.len() > 1 && c[0] == cz() {
            c.remove(0);
            out.push(cz());
        }
        let n = c.len().saturating_sub(1);
        if n == 0 {
            return out;
        }
        let p = Poly(c);
        let dp = p.derivative();
        let lead = p.0[n];
        // Cauchy bound on root moduli.
        let bound = 1.0 + p.0[..n].iter().map(|a| (a / lead).norm()).fold(0.0, f64::max);
        let r0 = bound.min(1e6) * 0.5;
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(r0, std::f64::consts::TAU * (k as f64 + 0.25) / n as f64 + 0.4))
            .collect();
        for _ in 0..800 {
            let mut moved = 0.0f64;
            for k in 0..n {
                let pv = p.eval(z[k]);
                if pv == cz() {
                    continue;
                }
                let ratio = pv / dp.eval(z[k]);
                let s: Complex64 = (0..n)
                    .filter(|&j| j != k)
                    .map(|j| {
                        let d = z[k] - z[j];
                        if d == cz() {
                            Complex64::new(1e12, 0.0)
                        } else {
                            d.inv()
                        }
                    })
                    .sum();
                let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
                if w.re.is_finite() && w.im.is_finite() {
                    z[k] -= w;
                    moved = moved.max(w.norm() / (1.0 + z[k].norm()));
                }
            }
            if moved < 1e-15 {
                break;
            }
        }
        out.extend(z);
        out
    }
}

/// Numerator/denominator normal form of a rational expression.
#[derive(Clone, Debug)]
pub struct Rational {
    pub num: Poly,
    pub den: Poly,
}

impl Rational {
    pub fn from_expr(e: &MeroExpr) -> crate::Result<Rational> {
        use MeroExpr::*;
        let one = || Poly::constant(Complex64::new(1.0, 0.0));
        Ok(match e {
            Const(c) => Rational { num: Poly::constant(*c), den: one() },
            Var => Rational { num: Poly::z(), den: one() },
            Add(a, b) | Sub(a, b) => {
                let (a, b) = (Self::from_expr(a)?, Self::from_expr(b)?);
                let sign = if matches!(e, Sub(..)) { -1.0 } else { 1.0 };
                Rational {
                    num: a.num.mul(&b.den).add(&b.num.mul(&a.den).scale(Complex64::new(sign, 0.0))),
                    den: a.den.mul(&b.den),
                }
            }
            Mul(a, b) => {
                let (a, b) = (Self::from_expr(a)?, Self::from_expr(b)?);
                Rational { num: a.num.mul(&b.num), den: a.den.mul(&b.den) }
            }
            Div(a, b) => {
                let (a, b) = (Self::from_expr(a)?, Self::from_expr(b)?);
                Rational { num: a.num.mul(&b.den), den: a.den.mul(&b.num) }
            }
            Neg(a) => {
                let a = Self::from_expr(a)?;
                Rational { num: a.num.scale(Complex64::new(-1.0, 0.0)), den: a.den }
            }
            Pow(a, n) => {
                let a = Self::from_expr(a)?;
                let k = n.unsigned_abs();
                if *n >= 0 {
                    Rational { num: a.num.pow(k), den: a.den.pow(k) }
                } else {
                    Rational { num: a.den.pow(k), den: a.num.pow(k) }
                }
            }
            Exp(_) => return Err(Error::NotRational),
        })
    }
}

/// Merges points closer than `rel·(1+|z|)` into their mean.
pub fn cluster(points: &[Complex64], rel: f64) -> Vec<Complex64> {
    let mut groups: Vec<(Complex64, usize)> = Vec::new();
    for &p in points {
        if let Some(g) = groups
            .iter_mut()
            .find(|(c, n)| (c / *n as f64 - p).norm() <= rel * (1.0 + p.norm()))
        {
            g.0 += p;
            g.1 += 1;
        } else {
            groups.push((p, 1));
        }
    }
    groups.into_iter().map(|(s, n)| s / n as f64).collect()
}
