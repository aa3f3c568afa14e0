use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::synth::{eval_finite, Prepared, DEFAULT_STEP};
use super::{SurfaceClass, SurfaceMesh, WeierstrassData};
use crate::expr::{stereographic, MeroExpr};
use crate::{par, Error};

/// Half-width of the band `||g| − 1| <` excluded from maxface metric checks.
pub const MAXFACE_EXCLUSION: f64 = 0.05;

/// Largest `|Σ Φ_k²| / Σ |Φ_k|²` over `points`, with the Lorentzian sum
/// `−Φ₁² + Φ₂² + Φ₃²` for maxfaces.
pub fn nullity(d: &WeierstrassData, points: &[Complex64]) -> crate::Result<f64> {
    let p = Prepared::new(d);
    let sign = match p.class {
        SurfaceClass::Minimal => 1.0,
        SurfaceClass::Maxface => -1.0,
        c => return Err(Error::NotApplicable(format!("nullity of {} data", c.as_str()))),
    };
    let vals = par::try_map(points, |&z| -> crate::Result<f64> {
        let v = p.phi_at(z)?.0;
        let q = v[0] * v[0] * sign + v[1] * v[1] + v[2] * v[2];
        let n: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        Ok(if n > 0.0 { q.norm() / n } else { 0.0 })
    })?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Real parts of the cycle integral of the representation form. For flat
/// fronts the components are the entries of `M − I` for the monodromy `M`
/// of the lift along the cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodResidual {
    pub cycle: Vec<Complex64>,
    pub components: Vec<f64>,
    pub norm: f64,
    pub monodromy: Option<[Complex64; 4]>,
}

pub fn period_residuals(d: &WeierstrassData, cycle: &[Complex64]) -> crate::Result<PeriodResidual> {
    if cycle.len() < 3 {
        return Err(Error::InvalidDomain("a cycle needs at least 3 vertices".into()));
    }
    let mut pts = cycle.to_vec();
    if pts.first() != pts.last() {
        pts.push(pts[0]);
    }
    let p = Prepared::new(d);
    let (components, monodromy) = if p.class == SurfaceClass::FlatFront {
        let mut m = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        for w in pts.windows(2) {
            let t = p.transport(w[0], w[1], DEFAULT_STEP)?;
            m = [
                m[0] * t[0] + m[1] * t[2],
                m[0] * t[1] + m[1] * t[3],
                m[2] * t[0] + m[3] * t[2],
                m[2] * t[1] + m[3] * t[3],
            ];
        }
        let id = [1.0, 0.0, 0.0, 1.0];
        let comps = (0..4).flat_map(|k| [m[k].re - id[k], m[k].im]).collect();
        (comps, Some(m))
    } else {
        let segs = par::try_map(&pts.windows(2).collect::<Vec<_>>(), |w| p.segment_integral(w[0], w[1]))?;
        let total = segs.into_iter().fold(crate::quad::CVec([Complex64::new(0.0, 0.0); 3]), |a, b| a + b);
        let k = if p.class == SurfaceClass::ImproperAffine { 1 } else { 3 };
        (total.0[..k].iter().map(|c| c.re).collect::<Vec<_>>(), None)
    };
    let norm = components.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(PeriodResidual { cycle: cycle.to_vec(), components, norm, monodromy })
}

struct Stencil {
    v: usize,
    u: [usize; 4],
    w: [usize; 4],
}

/// Vertices with both fourth-order axis stencils `±1, ±2` available.
fn stencils(s: &SurfaceMesh) -> Vec<Stencil> {
    let index: HashMap<(i32, i32), usize> = s.lattice.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let at = |i: i32, j: i32| index.get(&(i, j)).copied();
    let mut out = Vec::new();
    for (v, &(i, j)) in s.lattice.iter().enumerate() {
        let u = [at(i - 2, j), at(i - 1, j), at(i + 1, j), at(i + 2, j)];
        let w = [at(i, j - 2), at(i, j - 1), at(i, j + 1), at(i, j + 2)];
        if let (Some(u), Some(w)) = (collect4(u), collect4(w)) {
            out.push(Stencil { v, u, w });
        }
    }
    out
}

fn collect4(a: [Option<usize>; 4]) -> Option<[usize; 4]> {
    Some([a[0]?, a[1]?, a[2]?, a[3]?])
}

fn d1(c: &[Vec<f64>], s: &[usize; 4], h: f64) -> Vec<f64> {
    (0..c[s[0]].len())
        .map(|k| (-c[s[3]][k] + 8.0 * c[s[2]][k] - 8.0 * c[s[1]][k] + c[s[0]][k]) / (12.0 * h))
        .collect()
}

fn d2(c: &[Vec<f64>], s: &[usize; 4], mid: usize, h: f64) -> Vec<f64> {
    (0..c[mid].len())
        .map(|k| {
            (-c[s[3]][k] + 16.0 * c[s[2]][k] - 30.0 * c[mid][k] + 16.0 * c[s[1]][k] - c[s[0]][k]) / (12.0 * h * h)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lorentz(a: &[f64], b: &[f64]) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `𝓛⁻¹·X` for `det 𝓛 = 1`, with complex 2×2 matrices flattened to 8 reals.
fn left_translate(l: &[Complex64; 4], x: &[f64]) -> Vec<f64> {
    let c = |k: usize| Complex64::new(x[2 * k], x[2 * k + 1]);
    let inv = [l[3], -l[1], -l[2], l[0]];
    let m = [
        inv[0] * c(0) + inv[1] * c(2),
        inv[0] * c(1) + inv[1] * c(3),
        inv[2] * c(0) + inv[3] * c(2),
        inv[2] * c(1) + inv[3] * c(3),
    ];
    m.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Worst conformality defects of the synthesized immersion over vertices
/// with full stencils, normalized by `λ²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImmersionReport {
    pub class: SurfaceClass,
    pub vertices_checked: usize,
    pub excluded: usize,
    /// `|‖ψ_u‖² − ‖ψ_v‖²| / λ²`
    pub conformality: f64,
    /// `|⟨ψ_u, ψ_v⟩| / λ²`
    pub orthogonality: f64,
    /// `|‖ψ_u‖² − λ²| / λ²`
    pub metric: f64,
    /// `‖Δψ‖ / λ²`, minimal surfaces only.
    pub laplacian: Option<f64>,
    pub inner_product: String,
}

impl ImmersionReport {
    pub fn max_defect(&self) -> f64 {
        [self.conformality, self.orthogonality, self.metric, self.laplacian.unwrap_or(0.0)]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Fourth-order finite-difference check of the isothermal and metric
/// identities. Minimal surfaces use R³, maxfaces L³ with signature
/// `(−,+,+)` away from the singular band, improper affine fronts the
/// special Lagrangian immersion `G+F̄ + i(F̄−G)` in C², flat fronts the
/// left-invariant form `𝓛⁻¹d𝓛` of the lift.
pub fn immersion_check(s: &SurfaceMesh, d: &WeierstrassData) -> crate::Result<ImmersionReport> {
    if s.class != d.class() {
        return Err(Error::NotApplicable("mesh and data classes differ".into()));
    }
    let coords: Vec<Vec<f64>> = match s.class {
        SurfaceClass::Minimal | SurfaceClass::Maxface => s.positions.iter().map(|p| p.to_vec()).collect(),
        SurfaceClass::ImproperAffine => {
            let crate::surfaces::SurfaceData::ImproperAffine { big_f, big_g } = &d.data else { unreachable!() };
            par::try_map(&s.params, |&z| -> crate::Result<Vec<f64>> {
                let (f, g) = (eval_finite(big_f, z)?, eval_finite(big_g, z)?);
                let (x, n) = (g + f.conj(), f.conj() - g);
                Ok(vec![x.re, x.im, n.re, n.im])
            })?
        }
        SurfaceClass::FlatFront => {
            let lifts = s.lifts.as_ref().ok_or(Error::NotApplicable("flat-front mesh without lifts".into()))?;
            lifts.iter().map(|l| l.iter().flat_map(|z| [z.re, z.im]).collect()).collect()
        }
    };
    let st = stencils(s);
    if st.is_empty() {
        return Err(Error::NoStencil);
    }
    let h = s.spacing;
    let class = s.class;
    let rows: Vec<Option<[f64; 4]>> = par::map(&st, |k| {
        let diag = &s.diagnostics[k.v];
        let lambda2 = match class {
            SurfaceClass::Maxface => {
                if (diag.gauss.norm_sqr().sqrt() - 1.0).abs() < MAXFACE_EXCLUSION {
                    return None;
                }
                diag.induced?
            }
            _ => diag.density * diag.density,
        };
        let (mut pu, mut pv) = (d1(&coords, &k.u, h), d1(&coords, &k.w, h));
        if class == SurfaceClass::FlatFront {
            let l = &s.lifts.as_ref().expect("checked")[k.v];
            pu = left_translate(l, &pu);
            pv = left_translate(l, &pv);
        }
        let ip = |a: &[f64], b: &[f64]| if class == SurfaceClass::Maxface { lorentz(a, b) } else { dot(a, b) };
        let (uu, vv, uv) = (ip(&pu, &pu), ip(&pv, &pv), ip(&pu, &pv));
        let lap = if class == SurfaceClass::Minimal {
            let (a, b) = (d2(&coords, &k.u, k.v, h), d2(&coords, &k.w, k.v, h));
            let l: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            dot(&l, &l).sqrt() / lambda2
        } else {
            0.0
        };
        Some([(uu - vv).abs() / lambda2, uv.abs() / lambda2, (uu - lambda2).abs() / lambda2, lap])
    });
    let mut out = [0.0f64; 4];
    let mut checked = 0;
    for r in rows.iter().flatten() {
        checked += 1;
        for q in 0..4 {
            out[q] = out[q].max(r[q]);
        }
    }
    Ok(ImmersionReport {
        class,
        vertices_checked: checked,
        excluded: st.len() - checked,
        conformality: out[0],
        orthogonality: out[1],
        metric: out[2],
        laplacian: (class == SurfaceClass::Minimal).then_some(out[3]),
        inner_product: match class {
            SurfaceClass::Minimal => "euclidean R3",
            SurfaceClass::Maxface => "lorentzian (-,+,+)",
            SurfaceClass::ImproperAffine => "euclidean C2 (special Lagrangian lift)",
            SurfaceClass::FlatFront => "left-invariant on SL(2,C)",
        }
        .into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussNormalReport {
    pub max_angle: f64,
    pub argmax: Complex64,
    pub vertices_checked: usize,
}

/// Compares the unit normal `ψ_u × ψ_v / |ψ_u × ψ_v|` with the inverse
/// stereographic image of `g`.
pub fn gauss_normal_check(s: &SurfaceMesh, g: &MeroExpr) -> crate::Result<GaussNormalReport> {
    if s.class != SurfaceClass::Minimal {
        return Err(Error::NotApplicable("Gauss normal check needs a minimal surface".into()));
    }
    let coords: Vec<Vec<f64>> = s.positions.iter().map(|p| p.to_vec()).collect();
    let st = stencils(s);
    if st.is_empty() {
        return Err(Error::NoStencil);
    }
    let h = s.spacing;
    let angles = par::try_map(&st, |k| -> crate::Result<f64> {
        let (a, b) = (d1(&coords, &k.u, h), d1(&coords, &k.w, h));
        let n = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        let len = dot(&n, &n).sqrt();
        if !(len > 1e-14 * dot(&a, &a).max(f64::MIN_POSITIVE)) {
            return Err(Error::DegenerateData { z: s.params[k.v], reason: "degenerate normal".into() });
        }
        let e = stereographic(g.eval_ext(s.params[k.v])?);
        let c = [n[1] * e[2] - n[2] * e[1], n[2] * e[0] - n[0] * e[2], n[0] * e[1] - n[1] * e[0]];
        Ok(dot(&c, &c).sqrt().atan2(dot(&n, &e)))
    })?;
    let (mut best, mut arg) = (0.0f64, st[0].v);
    for (k, &a) in angles.iter().enumerate() {
        if a > best {
            best = a;
            arg = st[k].v;
        }
    }
    Ok(GaussNormalReport { max_angle: best, argmax: s.params[arg], vertices_checked: st.len() })
}
