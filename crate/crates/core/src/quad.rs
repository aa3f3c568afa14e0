//! Quadrature on segments: fixed 4-point Gauss–Legendre and adaptive
//! Simpson for scalar, complex and complex-vector integrands.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Values an integrand may take.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Fixed-size vector of complex numbers, e.g. a Weierstrass integrand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CVec<const N: usize>(pub [Complex64; N]);

impl<const N: usize> Add for CVec<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for k in 0..N {
            self.0[k] += o.0[k];
        }
        self
    }
}

impl<const N: usize> Sub for CVec<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for k in 0..N {
            self.0[k] -= o.0[k];
        }
        self
    }
}

impl<const N: usize> Mul<f64> for CVec<N> {
    type Output = Self;
    fn mul(mut self, s: f64) -> Self {
        for k in 0..N {
            self.0[k] *= s;
        }
        self
    }
}

impl<const N: usize> QuadValue for CVec<N> {
    fn zero() -> Self {
        CVec([Complex64::new(0.0, 0.0); N])
    }
    fn magnitude(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

const GL4_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_W: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// 4-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre4<T: QuadValue, E>(
    mut f: impl FnMut(f64) -> Result<T, E>,
    a: f64,
    b: f64,
) -> Result<T, E> {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = T::zero();
    for k in 0..4 {
        acc = acc + f(m + r * GL4_X[k])? * GL4_W[k];
    }
    Ok(acc * r)
}

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Integral<T> {
    pub value: T,
    pub evaluations: usize,
    pub converged: bool,
}

struct Simpson<'a, T, E> {
    f: &'a mut dyn FnMut(f64) -> Result<T, E>,
    evals: usize,
    converged: bool,
}

impl<T: QuadValue, E> Simpson<'_, T, E> {
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &mut self,
        a: f64,
        b: f64,
        fa: T,
        fm: T,
        fb: T,
        whole: T,
        tol: f64,
        depth: u32,
    ) -> Result<T, E> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let flm = (self.f)(lm)?;
        let frm = (self.f)(rm)?;
        self.evals += 2;
        let h = (b - a) / 12.0;
        let left = (fa + flm * 4.0 + fm) * h;
        let right = (fm + frm * 4.0 + fb) * h;
        let both = left + right;
        let err = (both - whole).magnitude();
        if err <= 15.0 * tol || depth == 0 || (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            if depth == 0 && err > 15.0 * tol {
                self.converged = false;
            }
            return Ok(both + (both - whole) * (1.0 / 15.0));
        }
        let l = self.recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
        let r = self.recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
        Ok(l + r)
    }
}

/// Adaptive Simpson on `[a, b]` to relative tolerance `rel` (relative to an
/// estimate of `∫|f|`, so oscillating integrands with small net value still
/// terminate).
pub fn adaptive_simpson<T: QuadValue, E>(
    mut f: impl FnMut(f64) -> Result<T, E>,
    a: f64,
    b: f64,
    rel: f64,
) -> Result<Integral<T>, E> {
    if a == b {
        return Ok(Integral { value: T::zero(), evaluations: 0, converged: true });
    }
    // Coarse panels give the scale for the tolerance and a better start.
    const PANELS: usize = 8;
    let mut xs = [0.0; 2 * PANELS + 1];
    let mut fs = Vec::with_capacity(2 * PANELS + 1);
    for (k, x) in xs.iter_mut().enumerate() {
        *x = a + (b - a) * k as f64 / (2 * PANELS) as f64;
        fs.push(f(*x)?);
    }
    let scale: f64 = fs.iter().map(|v| v.magnitude()).sum::<f64>() / fs.len() as f64 * (b - a).abs();
    let tol = (rel * scale).max(1e-300);
    let mut s = Simpson { f: &mut f, evals: fs.len(), converged: true };
    let mut total = T::zero();
    for p in 0..PANELS {
        let (i, j, k) = (2 * p, 2 * p + 1, 2 * p + 2);
        let whole = (fs[i] + fs[j] * 4.0 + fs[k]) * ((xs[k] - xs[i]) / 6.0);
        total = total + s.recurse(xs[i], xs[k], fs[i], fs[j], fs[k], whole, tol / PANELS as f64, 40)?;
    }
    Ok(Integral { value: total, evaluations: s.evals, converged: s.converged })
}
