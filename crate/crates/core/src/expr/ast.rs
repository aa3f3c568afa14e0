use std::fmt;
use std::ops;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Expression tree for a meromorphic function of `z`.
///
/// Trees built by the parser keep the literal shape of the source; trees
/// built through the arithmetic operators and [`MeroExpr::derivative`] fold
/// constants and drop neutral elements.
#[derive(Clone, Debug, PartialEq)]
pub enum MeroExpr {
    Const(Complex64),
    Var,
    Add(Box<MeroExpr>, Box<MeroExpr>),
    Sub(Box<MeroExpr>, Box<MeroExpr>),
    Mul(Box<MeroExpr>, Box<MeroExpr>),
    Div(Box<MeroExpr>, Box<MeroExpr>),
    Neg(Box<MeroExpr>),
    Pow(Box<MeroExpr>, i32),
    Exp(Box<MeroExpr>),
}

use MeroExpr::*;

fn is_zero(e: &MeroExpr) -> bool {
    matches!(e, Const(c) if *c == Complex64::new(0.0, 0.0))
}

fn is_one(e: &MeroExpr) -> bool {
    matches!(e, Const(c) if *c == Complex64::new(1.0, 0.0))
}

fn finite(c: Complex64) -> bool {
    c.re.is_finite() && c.im.is_finite()
}

impl MeroExpr {
    pub fn var() -> Self {
        Var
    }

    pub fn constant(c: Complex64) -> Self {
        Const(c)
    }

    pub fn real(x: f64) -> Self {
        Const(Complex64::new(x, 0.0))
    }

    pub fn zero() -> Self {
        Self::real(0.0)
    }

    pub fn one() -> Self {
        Self::real(1.0)
    }

    pub fn add(a: MeroExpr, b: MeroExpr) -> Self {
        match (a, b) {
            (Const(x), Const(y)) => Const(x + y),
            (a, b) if is_zero(&a) => b,
            (a, b) if is_zero(&b) => a,
            (a, Neg(b)) => Self::sub(a, *b),
            (a, b) => Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: MeroExpr, b: MeroExpr) -> Self {
        match (a, b) {
            (Const(x), Const(y)) => Const(x - y),
            (a, b) if is_zero(&b) => a,
            (a, b) if is_zero(&a) => Self::neg(b),
            (a, Neg(b)) => Self::add(a, *b),
            (a, b) => Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: MeroExpr, b: MeroExpr) -> Self {
        match (a, b) {
            (Const(x), Const(y)) => Const(x * y),
            (a, _) if is_zero(&a) => Self::zero(),
            (_, b) if is_zero(&b) => Self::zero(),
            (a, b) if is_one(&a) => b,
            (a, b) if is_one(&b) => a,
            (Neg(a), b) => Self::neg(Self::mul(*a, b)),
            (a, Neg(b)) => Self::neg(Self::mul(a, *b)),
            (Const(x), Mul(y, b)) => match *y {
                Const(y) => Self::mul(Const(x * y), *b),
                y => Mul(Box::new(Const(x)), Box::new(Mul(Box::new(y), b))),
            },
            (a, Const(y)) => Mul(Box::new(Const(y)), Box::new(a)),
            (a, b) => Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: MeroExpr, b: MeroExpr) -> Self {
        match (a, b) {
            (Const(x), Const(y)) if y != Complex64::new(0.0, 0.0) && finite(x / y) => Const(x / y),
            (a, _) if is_zero(&a) => Self::zero(),
            (a, b) if is_one(&b) => a,
            (Neg(a), b) => Self::neg(Self::div(*a, b)),
            (a, b) => Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: MeroExpr) -> Self {
        match a {
            Const(x) => Const(-x),
            Neg(b) => *b,
            a => Neg(Box::new(a)),
        }
    }

    pub fn powi(a: MeroExpr, n: i32) -> Self {
        match (a, n) {
            (_, 0) => Self::one(),
            (a, 1) => a,
            (Const(x), n) if x != Complex64::new(0.0, 0.0) && finite(x.powi(n)) => Const(x.powi(n)),
            (Pow(b, k), n) if k.checked_mul(n).is_some() => Self::powi(*b, k * n),
            (a, n) => Pow(Box::new(a), n),
        }
    }

    pub fn exp(a: MeroExpr) -> Self {
        match a {
            Const(x) if finite(x.exp()) => Const(x.exp()),
            a => Exp(Box::new(a)),
        }
    }

    /// `true` when the tree has no `exp` node.
    pub fn is_rational(&self) -> bool {
        match self {
            Const(_) | Var => true,
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => a.is_rational() && b.is_rational(),
            Neg(a) | Pow(a, _) => a.is_rational(),
            Exp(_) => false,
        }
    }

    pub fn contains_var(&self) -> bool {
        match self {
            Const(_) => false,
            Var => true,
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => a.contains_var() || b.contains_var(),
            Neg(a) | Pow(a, _) | Exp(a) => a.contains_var(),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Const(_) | Var => 1,
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => 1 + a.size() + b.size(),
            Neg(a) | Pow(a, _) | Exp(a) => 1 + a.size(),
        }
    }

    /// Exact symbolic derivative with respect to `z`.
    pub fn derivative(&self) -> MeroExpr {
        match self {
            Const(_) => Self::zero(),
            Var => Self::one(),
            Add(a, b) => Self::add(a.derivative(), b.derivative()),
            Sub(a, b) => Self::sub(a.derivative(), b.derivative()),
            Neg(a) => Self::neg(a.derivative()),
            Mul(a, b) => Self::add(
                Self::mul(a.derivative(), (**b).clone()),
                Self::mul((**a).clone(), b.derivative()),
            ),
            Div(a, b) => {
                let da = a.derivative();
                let db = b.derivative();
                if is_zero(&db) {
                    return Self::div(da, (**b).clone());
                }
                let num = Self::sub(
                    Self::mul(da, (**b).clone()),
                    Self::mul((**a).clone(), db),
                );
                Self::div(num, Self::powi((**b).clone(), 2))
            }
            Pow(a, n) => Self::mul(
                Self::mul(Self::real(*n as f64), Self::powi((**a).clone(), n - 1)),
                a.derivative(),
            ),
            Exp(a) => Self::mul(self.clone(), a.derivative()),
        }
    }

    /// Replaces every occurrence of `z` by `r`.
    pub fn substitute(&self, r: &MeroExpr) -> MeroExpr {
        match self {
            Const(c) => Const(*c),
            Var => r.clone(),
            Add(a, b) => Self::add(a.substitute(r), b.substitute(r)),
            Sub(a, b) => Self::sub(a.substitute(r), b.substitute(r)),
            Mul(a, b) => Self::mul(a.substitute(r), b.substitute(r)),
            Div(a, b) => Self::div(a.substitute(r), b.substitute(r)),
            Neg(a) => Self::neg(a.substitute(r)),
            Pow(a, n) => Self::powi(a.substitute(r), *n),
            Exp(a) => Self::exp(a.substitute(r)),
        }
    }

    /// Plain complex evaluation. Poles and `0/0` show up as non-finite
    /// values; use [`MeroExpr::eval_ext`] for a checked result.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Const(c) => *c,
            Var => z,
            Add(a, b) => a.eval(z) + b.eval(z),
            Sub(a, b) => a.eval(z) - b.eval(z),
            Mul(a, b) => a.eval(z) * b.eval(z),
            Div(a, b) => a.eval(z) / b.eval(z),
            Neg(a) => -a.eval(z),
            Pow(a, n) => a.eval(z).powi(*n),
            Exp(a) => a.eval(z).exp(),
        }
    }

    /// Evaluation that gives up (`None`) on a zero divisor or any non-finite
    /// intermediate value.
    pub fn try_eval(&self, z: Complex64) -> Option<Complex64> {
        let v = match self {
            Const(c) => *c,
            Var => z,
            Add(a, b) => a.try_eval(z)? + b.try_eval(z)?,
            Sub(a, b) => a.try_eval(z)? - b.try_eval(z)?,
            Mul(a, b) => a.try_eval(z)? * b.try_eval(z)?,
            Div(a, b) => {
                let d = b.try_eval(z)?;
                if d == Complex64::new(0.0, 0.0) {
                    return None;
                }
                a.try_eval(z)? / d
            }
            Neg(a) => -a.try_eval(z)?,
            Pow(a, n) => {
                let b = a.try_eval(z)?;
                if *n < 0 && b == Complex64::new(0.0, 0.0) {
                    return None;
                }
                b.powi(*n)
            }
            Exp(a) => a.try_eval(z)?.exp(),
        };
        finite(v).then_some(v)
    }
}

impl ops::Add for MeroExpr {
    type Output = MeroExpr;
    fn add(self, rhs: MeroExpr) -> MeroExpr {
        MeroExpr::add(self, rhs)
    }
}

impl ops::Sub for MeroExpr {
    type Output = MeroExpr;
    fn sub(self, rhs: MeroExpr) -> MeroExpr {
        MeroExpr::sub(self, rhs)
    }
}

impl ops::Mul for MeroExpr {
    type Output = MeroExpr;
    fn mul(self, rhs: MeroExpr) -> MeroExpr {
        MeroExpr::mul(self, rhs)
    }
}

impl ops::Div for MeroExpr {
    type Output = MeroExpr;
    fn div(self, rhs: MeroExpr) -> MeroExpr {
        MeroExpr::div(self, rhs)
    }
}

impl ops::Neg for MeroExpr {
    type Output = MeroExpr;
    fn neg(self) -> MeroExpr {
        MeroExpr::neg(self)
    }
}

// Precedence levels: 0 sum, 1 product, 2 power, 3 atom.
fn level(e: &MeroExpr) -> u8 {
    match e {
        Add(..) | Sub(..) => 0,
        Mul(..) | Div(..) => 1,
        Pow(..) => 2,
        Const(c) if c.im == 0.0 && c.re >= 0.0 && !c.re.is_sign_negative() => 3,
        Const(c) if c.re == 0.0 && c.im == 1.0 => 3,
        Const(_) => 4,
        Var | Neg(_) | Exp(_) => 3,
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        if c.re < 0.0 || c.re.is_sign_negative() {
            write!(f, "(-{})", -c.re)
        } else {
            write!(f, "{}", c.re)
        }
    } else if c.re == 0.0 && c.im == 1.0 {
        write!(f, "i")
    } else if c.re == 0.0 {
        if c.im < 0.0 {
            write!(f, "(-{}*i)", -c.im)
        } else {
            write!(f, "({}*i)", c.im)
        }
    } else {
        let sign = if c.re < 0.0 { "-" } else { "" };
        if c.im < 0.0 {
            write!(f, "({sign}{}-{}*i)", c.re.abs(), -c.im)
        } else {
            write!(f, "({sign}{}+{}*i)", c.re.abs(), c.im)
        }
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &MeroExpr, min: u8) -> fmt::Result {
    let l = level(e);
    if l == 4 {
        // Non-literal constants print with their own parentheses.
        if let Const(c) = e {
            return write_const(f, *c);
        }
    }
    if l < min {
        write!(f, "(")?;
        write_bare(f, e)?;
        write!(f, ")")
    } else {
        write_bare(f, e)
    }
}

fn write_bare(f: &mut fmt::Formatter<'_>, e: &MeroExpr) -> fmt::Result {
    match e {
        Const(c) => write_const(f, *c),
        Var => write!(f, "z"),
        Add(a, b) => {
            write_at(f, a, 0)?;
            write!(f, " + ")?;
            write_at(f, b, 1)
        }
        Sub(a, b) => {
            write_at(f, a, 0)?;
            write!(f, " - ")?;
            write_at(f, b, 1)
        }
        Mul(a, b) => {
            write_at(f, a, 1)?;
            write!(f, "*")?;
            write_at(f, b, 2)
        }
        Div(a, b) => {
            write_at(f, a, 1)?;
            write!(f, "/")?;
            write_at(f, b, 2)
        }
        Pow(a, n) => {
            write_at(f, a, 3)?;
            write!(f, "^{n}")
        }
        Neg(a) => {
            write!(f, "-")?;
            write_at(f, a, 3)
        }
        Exp(a) => {
            write!(f, "exp(")?;
            write_at(f, a, 0)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for MeroExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(f, self, 0)
    }
}

impl Serialize for MeroExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MeroExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_mero(&s).map_err(serde::de::Error::custom)
    }
}

impl std::str::FromStr for MeroExpr {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        super::parse_mero(s)
    }
}
