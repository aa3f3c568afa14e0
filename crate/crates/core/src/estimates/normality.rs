use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::expr::{chordal, parse_mero, ExtComplex, MeroExpr, MobiusMap, SphericalMap};
use crate::geodesy::{MeshedDomain, NodeKind};
use crate::{par, Error};

/// Closest approach to an excluded value that still counts as omitted.
pub const EXCLUSION_DELTA: f64 = 1e-12;
/// Log-log slope above which a family is reported as growing without bound.
pub const GROWTH_SLOPE: f64 = 0.5;
/// Default side of the Zalcman search grid.
pub const ZALCMAN_GRID: usize = 300;
/// Slack of the Zalcman envelope check.
pub const ENVELOPE_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FujimotoReport {
    pub eta: f64,
    pub radius: f64,
    pub q: usize,
    /// `sup ratio·(R²−|z|²)/R` over the mesh nodes inside `D(0;R)`.
    pub sup: f64,
    pub argmax: Complex64,
    /// The same sup over every other lattice node.
    pub sup_coarse: f64,
    /// `|sup − sup_coarse| / sup`, zero when both vanish.
    pub refinement_change: f64,
    pub nodes_checked: usize,
}

fn fujimoto_term(
    f: &MeroExpr,
    df: &MeroExpr,
    xs: &[ExtComplex],
    eta: f64,
    radius: f64,
    z: Complex64,
) -> crate::Result<f64> {
    let v = f.eval_ext(z)?;
    for a in xs {
        if chordal(v, *a) <= EXCLUSION_DELTA {
            return Err(Error::AttainsExcluded { z, value: a.to_string() });
        }
    }
    let fv = v.finite().expect("∞ is excluded");
    let d = df.try_eval(z).map_or_else(|| df.eval_ext(z).map(|e| e.finite()), |d| Ok(Some(d)))?;
    let d = d.ok_or(Error::NonFinite(format!("f′ at {z}")))?;
    let prod: f64 = xs.iter().map(|a| chordal(v, *a).powf(1.0 - eta)).product();
    let ratio = d.norm() / ((1.0 + fv.norm_sqr()) * prod);
    Ok(ratio * (radius * radius - z.norm_sqr()) / radius)
}

/// Samples `|f′|/((1+|f|²)∏χ(f,α_j)^{1−η})·(R²−|z|²)/R` on the mesh nodes
/// inside `D(0;R)`. The product runs over every `α_j ∈ X`, `∞` included.
pub fn fujimoto_ratio(
    f: &MeroExpr,
    xs: &[ExtComplex],
    eta: f64,
    radius: f64,
    mesh: &MeshedDomain,
) -> crate::Result<FujimotoReport> {
    let q = xs.len();
    if q < 3 {
        return Err(Error::InvalidProperty(format!("need at least 3 excluded values, got {q}")));
    }
    if !xs.contains(&ExtComplex::Infinity) {
        return Err(Error::InvalidProperty("excluded set must contain ∞".into()));
    }
    for (k, a) in xs.iter().enumerate() {
        if xs[..k].iter().any(|b| chordal(*a, *b) == 0.0) {
            return Err(Error::Duplicate(a.to_string()));
        }
    }
    let max = (q as f64 - 2.0) / q as f64;
    if !(eta > 0.0 && eta < max) {
        return Err(Error::EtaOutOfRange { eta, max });
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidDomain(format!("radius {radius} must be positive")));
    }
    let nodes: Vec<usize> = (0..mesh.len())
        .filter(|&k| !mesh.is_graded(k) && mesh.position(k).norm() < radius)
        .collect();
    if nodes.is_empty() {
        return Err(Error::MeshTooCoarse("no nodes inside D(0;R)".into()));
    }
    let df = f.derivative();
    let vals = par::try_map(&nodes, |&k| fujimoto_term(f, &df, xs, eta, radius, mesh.position(k)))?;
    let (mut sup, mut arg, mut sup_coarse) = (0.0f64, nodes[0], 0.0f64);
    for (idx, &k) in nodes.iter().enumerate() {
        if vals[idx] > sup {
            sup = vals[idx];
            arg = k;
        }
        if let NodeKind::Lattice(i, j) = mesh.kind(k) {
            if i % 2 == 0 && j % 2 == 0 {
                sup_coarse = sup_coarse.max(vals[idx]);
            }
        }
    }
    let refinement_change = if sup > 0.0 { (sup - sup_coarse).abs() / sup } else { 0.0 };
    Ok(FujimotoReport {
        eta,
        radius,
        q,
        sup,
        argmax: mesh.position(arg),
        sup_coarse,
        refinement_change,
        nodes_checked: nodes.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthVerdict {
    Bounded,
    UnboundedGrowth,
}

/// Per-member sups of the spherical gradient on a compact disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub family: String,
    pub center: Complex64,
    pub radius: f64,
    pub grid: usize,
    pub indices: Vec<i64>,
    pub sups: Vec<f64>,
    pub argmax: Vec<Complex64>,
    /// Slope of `log sup` against `log n` over the members with a positive sup.
    pub slope: f64,
    pub verdict: GrowthVerdict,
}

/// A family `n ↦ f_n` given by an expression template in which `{n}` stands
/// for the index.
pub fn family_from_template(template: &str) -> impl Fn(i64) -> crate::Result<MeroExpr> + Sync + '_ {
    move |n| {
        let lit = if n < 0 { format!("({n})") } else { n.to_string() };
        parse_mero(&template.replace("{n}", &lit))
    }
}

/// Evaluates `sup_K |∇f_n|_e` for each index on an `(N+1)²` grid over the
/// bounding square of `K = D(center; radius)`, keeping the points in `K`.
pub fn marty_sup<F>(
    label: &str,
    family: F,
    indices: &[i64],
    center: Complex64,
    radius: f64,
    grid: usize,
) -> crate::Result<NormalityReport>
where
    F: Fn(i64) -> crate::Result<MeroExpr> + Sync,
{
    if indices.is_empty() {
        return Err(Error::InvalidProperty("no family indices".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) || grid < 2 {
        return Err(Error::InvalidDomain(format!("compact disk radius {radius}, grid {grid}")));
    }
    let step = 2.0 * radius / grid as f64;
    let mut points = Vec::with_capacity((grid + 1) * (grid + 1));
    for i in 0..=grid {
        for j in 0..=grid {
            let d = Complex64::new(-radius + i as f64 * step, -radius + j as f64 * step);
            if d.norm() <= radius * (1.0 + 1e-12) {
                points.push(center + d);
            }
        }
    }
    let mut sups = Vec::with_capacity(indices.len());
    let mut argmax = Vec::with_capacity(indices.len());
    for &n in indices {
        let map = SphericalMap::new(family(n)?);
        let g = par::try_map(&points, |&z| map.gradient(z))?;
        let (mut s, mut a) = (0.0f64, points[0]);
        for (k, &v) in g.iter().enumerate() {
            if v > s {
                s = v;
                a = points[k];
            }
        }
        sups.push(s);
        argmax.push(a);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = indices
        .iter()
        .zip(&sups)
        .filter(|(&n, &s)| n > 0 && s > 0.0)
        .map(|(&n, &s)| ((n as f64).ln(), s.ln()))
        .unzip();
    let slope = if xs.len() >= 2 {
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        if sxx > 0.0 { sxy / sxx } else { 0.0 }
    } else {
        0.0
    };
    let verdict = if slope > GROWTH_SLOPE { GrowthVerdict::UnboundedGrowth } else { GrowthVerdict::Bounded };
    Ok(NormalityReport {
        family: label.to_string(),
        center,
        radius,
        grid,
        indices: indices.to_vec(),
        sups,
        argmax,
        slope,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZalcmanDiagnostics {
    /// Point of `𝔻` where `|∇h|_c` is largest.
    pub z0: Complex64,
    pub max_c_gradient: f64,
    /// `|∇h̃|_e(0)` for the recentered function `h̃`.
    pub r: f64,
    pub gradient_at_zero: f64,
    /// Largest `|∇f|_e(z)·(1−(|z|/R)²) − 1` over the pulled-back grid.
    pub envelope_excess: f64,
    pub envelope_ok: bool,
    pub grid: usize,
    pub recentered: bool,
}

fn c_gradient(map: &SphericalMap, z: Complex64) -> crate::Result<f64> {
    Ok(0.5 * (1.0 - z.norm_sqr()) * map.gradient(z)?)
}

fn disk_grid(n: usize) -> Vec<Complex64> {
    let step = 2.0 / n as f64;
    let mut pts = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            let z = Complex64::new(-1.0 + i as f64 * step, -1.0 + j as f64 * step);
            if z.norm() < 1.0 {
                pts.push(z);
            }
        }
    }
    pts
}

/// Moves the maximum of `|∇h|_c` to the origin with the disk automorphism
/// `φ(w) = (w−z0)/(w·conj(z0)−1)` and rescales by `R = |∇h̃|_e(0)`, returning
/// `f(z) = h̃(z/R)` with `|∇f|_e(0) = 1`.
pub fn zalcman_rescale(h: &MeroExpr, grid: usize) -> crate::Result<(MeroExpr, ZalcmanDiagnostics)> {
    let grid = grid.max(4);
    let map = SphericalMap::new(h.clone());
    let pts = disk_grid(grid);
    let vals = par::try_map(&pts, |&z| c_gradient(&map, z))?;
    let (mut best, mut z0) = (0.0f64, Complex64::new(0.0, 0.0));
    for (k, &v) in vals.iter().enumerate() {
        if v > best || (v == best && pts[k].norm() < z0.norm()) {
            best = v;
            z0 = pts[k];
        }
    }
    if best == 0.0 {
        return Err(Error::ConstantFunction);
    }
    let step = 2.0 / grid as f64;
    if z0.norm() > 1.0 - 2.0 * step {
        return Err(Error::MaxOnRim { z: z0 });
    }
    // Local pattern search; only accepts strict improvements.
    let mut s = 0.5 * step;
    while s > 1e-12 {
        let mut moved = false;
        for d in [Complex64::new(s, 0.0), Complex64::new(-s, 0.0), Complex64::new(0.0, s), Complex64::new(0.0, -s)] {
            let z = z0 + d;
            if z.norm() < 1.0 {
                if let Ok(v) = c_gradient(&map, z) {
                    if v > best {
                        best = v;
                        z0 = z;
                        moved = true;
                    }
                }
            }
        }
        if !moved {
            s *= 0.5;
        }
    }
    let recentered = z0 != Complex64::new(0.0, 0.0);
    let phi = MobiusMap::disk_automorphism(z0)?;
    let ht = if recentered { h.substitute(&phi.to_expr(&MeroExpr::var())) } else { h.clone() };
    let r = SphericalMap::new(ht.clone()).gradient(Complex64::new(0.0, 0.0))?;
    let f = ht.substitute(&(MeroExpr::var() / MeroExpr::real(r)));
    let fmap = SphericalMap::new(f.clone());
    let gradient_at_zero = fmap.gradient(Complex64::new(0.0, 0.0))?;

    // φ is an involution, so grid point w sits at z = R·φ(w) after rescaling.
    let pulled: Vec<Complex64> = pts
        .iter()
        .map(|&w| if recentered { phi.apply(ExtComplex::Finite(w)).finite().unwrap_or(w) } else { w } * r)
        .collect();
    let excess = par::try_map(&pulled, |&z| -> crate::Result<f64> {
        let t = z.norm() / r;
        if t >= 1.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(fmap.gradient(z)? * (1.0 - t * t) - 1.0)
    })?;
    let envelope_excess = excess.into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok((
        f,
        ZalcmanDiagnostics {
            z0,
            max_c_gradient: best,
            r,
            gradient_at_zero,
            envelope_excess,
            envelope_ok: envelope_excess <= ENVELOPE_SLACK,
            grid,
            recentered,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesy::build_mesh;
    use crate::mtriple::{DomainSpec, Region};

    #[test]
    fn fujimoto_logistic() {
        let f = parse_mero("exp(z)/(1+exp(z))").unwrap();
        let xs = [ExtComplex::ZERO, ExtComplex::real(1.0), ExtComplex::Infinity];
        let mesh = build_mesh(&DomainSpec::new(Region::disk(Complex64::new(0.0, 0.0), 3.0), vec![]).unwrap(), |_| 1.0, 80).unwrap();
        let r = fujimoto_ratio(&f, &xs, 0.25, 3.0, &mesh).unwrap();
        assert!(r.sup.is_finite() && r.sup > 0.0);
        assert!(r.refinement_change < 0.1, "{r:?}");
        let c = fujimoto_ratio(&parse_mero("2+i").unwrap(), &xs, 0.25, 3.0, &mesh).unwrap();
        assert_eq!(c.sup, 0.0);
        assert!(matches!(fujimoto_ratio(&f, &xs, 0.4, 3.0, &mesh), Err(Error::EtaOutOfRange { .. })));
        let z = parse_mero("z").unwrap();
        assert!(matches!(fujimoto_ratio(&z, &xs, 0.25, 3.0, &mesh), Err(Error::AttainsExcluded { .. })));
    }

    #[test]
    fn marty_families() {
        let r = marty_sup("n*z", family_from_template("{n}*z"), &[1, 10, 100, 1000], Complex64::new(0.0, 0.0), 0.5, 40).unwrap();
        assert_eq!(r.verdict, GrowthVerdict::UnboundedGrowth);
        assert!((r.slope - 1.0).abs() < 0.05);
        let s = 2.0 * std::f64::consts::SQRT_2;
        assert!((r.sups[2] - 100.0 * s).abs() < 1e-9);
        let r = marty_sup("z+1/n", family_from_template("z+1/{n}"), &[1, 10, 100, 1000], Complex64::new(0.0, 0.0), 0.5, 40).unwrap();
        assert_eq!(r.verdict, GrowthVerdict::Bounded);
        assert!(r.sups.iter().all(|&x| x <= s + 1e-12));
        let r = marty_sup("3", family_from_template("3"), &[1, 2, 3], Complex64::new(0.0, 0.0), 0.5, 10).unwrap();
        assert!(r.sups.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn zalcman_linear() {
        for n in [10.0, 100.0, 1000.0] {
            let h = MeroExpr::real(n) * MeroExpr::var();
            let (f, d) = zalcman_rescale(&h, 100).unwrap();
            assert!((d.r - 2.0 * std::f64::consts::SQRT_2 * n).abs() < 1e-9 * n);
            assert!((d.gradient_at_zero - 1.0).abs() < 1e-9);
            assert!(d.envelope_ok, "{d:?}");
            let z = Complex64::new(0.3, -0.2);
            assert!((f.eval(z) - z / (2.0 * std::f64::consts::SQRT_2)).norm() < 1e-12);
        }
        assert!(matches!(zalcman_rescale(&parse_mero("4").unwrap(), 50), Err(Error::ConstantFunction)));
        assert!(matches!(zalcman_rescale(&parse_mero("z^200").unwrap(), 60), Err(Error::MaxOnRim { .. })));
    }

    #[test]
    fn zalcman_off_center() {
        let h = parse_mero("3*(z-0.4)/(1-0.4*z)").unwrap();
        let (_, d) = zalcman_rescale(&h, 120).unwrap();
        assert!(d.recentered);
        assert!((d.gradient_at_zero - 1.0).abs() < 1e-9);
        assert!(d.envelope_ok, "{d:?}");
    }
}
