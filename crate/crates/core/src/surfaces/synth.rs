use std::collections::{HashMap, VecDeque};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    DetDrift, Hermitian, SeamReport, SurfaceClass, SurfaceData, SurfaceMesh, VertexDiagnostics,
    WeierstrassData, SINGULAR_BAND,
};
use crate::expr::{ExtComplex, MeroExpr};
use crate::geodesy::{MeshedDomain, NodeKind};
use crate::quad::{adaptive_simpson, CVec};
use crate::{par, Error};

/// Relative tolerance of the per-edge quadrature.
pub const EDGE_TOLERANCE: f64 = 1e-10;
/// Largest accepted `|det 𝓛 − 1|`.
pub const DET_TOLERANCE: f64 = 1e-6;
/// Default Runge–Kutta step for flat fronts.
pub const DEFAULT_STEP: f64 = 1e-3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn eval_finite(e: &MeroExpr, z: Complex64) -> crate::Result<Complex64> {
    if let Some(v) = e.try_eval(z) {
        return Ok(v);
    }
    match e.eval_ext(z)? {
        ExtComplex::Finite(v) => Ok(v),
        ExtComplex::Infinity => Err(Error::PoleOnPath { z }),
    }
}

/// The class data in evaluation-ready form.
pub(crate) struct Prepared {
    pub class: SurfaceClass,
    /// Vector 1-form `Φ dz` with `ψ = Re ∫ Φ dz` (minimal, maxface), or
    /// `F dG` in the first slot (improper affine).
    pub phi: [MeroExpr; 3],
    pub f: MeroExpr,
    pub g: MeroExpr,
    pub gauss: MeroExpr,
    pub df: MeroExpr,
    pub dg: MeroExpr,
}

impl Prepared {
    pub fn new(d: &WeierstrassData) -> Self {
        let one = MeroExpr::one;
        let i = || MeroExpr::constant(I);
        let gauss = d.gauss_map();
        match &d.data {
            SurfaceData::Minimal { f, g } => {
                let g2 = g.clone() * g.clone();
                Prepared {
                    class: SurfaceClass::Minimal,
                    phi: [
                        (one() - g2.clone()) * f.clone(),
                        i() * (one() + g2) * f.clone(),
                        MeroExpr::real(2.0) * g.clone() * f.clone(),
                    ],
                    f: f.clone(),
                    g: g.clone(),
                    gauss,
                    df: f.derivative(),
                    dg: g.derivative(),
                }
            }
            SurfaceData::Maxface { f, g } => {
                let g2 = g.clone() * g.clone();
                Prepared {
                    class: SurfaceClass::Maxface,
                    phi: [
                        MeroExpr::real(-2.0) * g.clone() * f.clone(),
                        (one() + g2.clone()) * f.clone(),
                        i() * (one() - g2) * f.clone(),
                    ],
                    f: f.clone(),
                    g: g.clone(),
                    gauss,
                    df: f.derivative(),
                    dg: g.derivative(),
                }
            }
            SurfaceData::ImproperAffine { big_f, big_g } => {
                let dbg = big_g.derivative();
                Prepared {
                    class: SurfaceClass::ImproperAffine,
                    phi: [big_f.clone() * dbg.clone(), MeroExpr::zero(), MeroExpr::zero()],
                    f: big_f.clone(),
                    g: big_g.clone(),
                    gauss,
                    df: big_f.derivative(),
                    dg: dbg,
                }
            }
            SurfaceData::FlatFront { omega, theta } => Prepared {
                class: SurfaceClass::FlatFront,
                phi: [MeroExpr::zero(), MeroExpr::zero(), MeroExpr::zero()],
                f: omega.clone(),
                g: theta.clone(),
                gauss,
                df: omega.derivative(),
                dg: theta.derivative(),
            },
        }
    }

    pub fn phi_at(&self, z: Complex64) -> crate::Result<CVec<3>> {
        Ok(CVec([
            eval_finite(&self.phi[0], z)?,
            eval_finite(&self.phi[1], z)?,
            eval_finite(&self.phi[2], z)?,
        ]))
    }

    /// `∫_a^b Φ dz` along the straight segment.
    pub fn segment_integral(&self, a: Complex64, b: Complex64) -> crate::Result<CVec<3>> {
        let d = b - a;
        let r = adaptive_simpson(
            |t| {
                let mut v = self.phi_at(a + d * t)?;
                for c in v.0.iter_mut() {
                    *c *= d;
                }
                Ok::<_, Error>(v)
            },
            0.0,
            1.0,
            EDGE_TOLERANCE,
        )?;
        Ok(r.value)
    }

    fn coefficient(&self, z: Complex64) -> crate::Result<[Complex64; 2]> {
        Ok([eval_finite(&self.g, z)?, eval_finite(&self.f, z)?])
    }

    /// Transport of `𝓛′ = 𝓛·[[0, θ], [ω, 0]]` from `a` to `b`, starting at
    /// the identity, with classical fourth-order Runge–Kutta steps.
    pub fn transport(&self, a: Complex64, b: Complex64, step: f64) -> crate::Result<[Complex64; 4]> {
        let d = b - a;
        let n = ((d.norm() / step).ceil() as usize).max(1);
        let dt = 1.0 / n as f64;
        let rhs = |y: &[Complex64; 4], t: f64| -> crate::Result<[Complex64; 4]> {
            let [theta, omega] = self.coefficient(a + d * t)?;
            let (th, om) = (theta * d, omega * d);
            Ok([y[1] * om, y[0] * th, y[3] * om, y[2] * th])
        };
        let axpy = |y: &[Complex64; 4], k: &[Complex64; 4], s: f64| -> [Complex64; 4] {
            [y[0] + k[0] * s, y[1] + k[1] * s, y[2] + k[2] * s, y[3] + k[3] * s]
        };
        let mut y = [ONE, ZERO, ZERO, ONE];
        for s in 0..n {
            let t = s as f64 * dt;
            let k1 = rhs(&y, t)?;
            let k2 = rhs(&axpy(&y, &k1, 0.5 * dt), t + 0.5 * dt)?;
            let k3 = rhs(&axpy(&y, &k2, 0.5 * dt), t + 0.5 * dt)?;
            let k4 = rhs(&axpy(&y, &k3, dt), t + dt)?;
            for q in 0..4 {
                y[q] += (k1[q] + k2[q] * 2.0 + k3[q] * 2.0 + k4[q]) * (dt / 6.0);
            }
        }
        Ok(y)
    }

    fn diagnostics(&self, t: &crate::mtriple::MTriple, z: Complex64) -> crate::Result<VertexDiagnostics> {
        let density = t.density_at(z)?;
        let curvature = t.curvature_at(z).ok();
        let gauss = self.gauss.eval_ext(z)?;
        let (singular, induced) = match self.class {
            SurfaceClass::Minimal => (false, None),
            SurfaceClass::Maxface => {
                let induced = match (gauss.finite(), eval_finite(&self.f, z)) {
                    (Some(g), Ok(f)) => Some((1.0 - g.norm_sqr()).powi(2) * f.norm_sqr()),
                    _ => None,
                };
                ((gauss.norm_sqr().sqrt() - 1.0).abs() < SINGULAR_BAND, induced)
            }
            SurfaceClass::ImproperAffine => {
                let (a, b) = (eval_finite(&self.df, z)?.norm(), eval_finite(&self.dg, z)?.norm());
                if a == 0.0 && b == 0.0 {
                    return Err(Error::DegenerateData { z, reason: "dF and dG both vanish".into() });
                }
                ((a - b).abs() < SINGULAR_BAND * (a + b), Some(b * b - a * a))
            }
            SurfaceClass::FlatFront => ((gauss.norm_sqr().sqrt() - 1.0).abs() < SINGULAR_BAND, None),
        };
        Ok(VertexDiagnostics { density, curvature, induced, gauss, singular })
    }

    fn position(&self, z: Complex64, acc: &CVec<3>) -> crate::Result<[f64; 3]> {
        Ok(match self.class {
            SurfaceClass::ImproperAffine => {
                let (big_f, big_g) = (eval_finite(&self.f, z)?, eval_finite(&self.g, z)?);
                let x = big_g + big_f.conj();
                let h = 0.5 * (big_g.norm_sqr() - big_f.norm_sqr()) + (big_g * big_f - acc.0[0] * 2.0).re;
                [x.re, x.im, h]
            }
            _ => [acc.0[0].re, acc.0[1].re, acc.0[2].re],
        })
    }
}

fn mat_mul(a: &[Complex64; 4], b: &[Complex64; 4]) -> [Complex64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn det(a: &[Complex64; 4]) -> Complex64 {
    a[0] * a[3] - a[1] * a[2]
}

/// Transport matrix of the flat-front lift along a segment.
pub fn transport(d: &WeierstrassData, a: Complex64, b: Complex64, step: f64) -> crate::Result<[Complex64; 4]> {
    if d.class() != SurfaceClass::FlatFront {
        return Err(Error::NotApplicable("transport needs flat-front data".into()));
    }
    Prepared::new(d).transport(a, b, step)
}

/// Surface value at `z` by direct integration along the segment from the
/// base point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub position: [f64; 3],
    pub hermitian: Option<Hermitian>,
    pub lift: Option<[Complex64; 4]>,
}

pub fn point_value(d: &WeierstrassData, z: Complex64, step: f64) -> crate::Result<SurfacePoint> {
    d.domain.check_point(z)?;
    if !d.domain.region.segment_inside(d.base_point, z) {
        return Err(Error::OutsideDomain { z });
    }
    let p = Prepared::new(d);
    if p.class == SurfaceClass::FlatFront {
        let l = p.transport(d.base_point, z, step)?;
        let h = Hermitian::from_lift(&l);
        return Ok(SurfacePoint { position: h.ball(), hermitian: Some(h), lift: Some(l) });
    }
    let acc = p.segment_integral(d.base_point, z)?;
    Ok(SurfacePoint { position: p.position(z, &acc)?, hermitian: None, lift: None })
}

struct Tree {
    ij: Vec<(i32, i32)>,
    z: Vec<Complex64>,
    order: Vec<usize>,
    parent: Vec<Option<usize>>,
    adjacency: Vec<Vec<usize>>,
    root: usize,
}

/// Breadth-first spanning tree over the axis edges of the lattice part of
/// the mesh, rooted at the lattice node nearest the base point.
fn spanning_tree(mesh: &MeshedDomain, base: Complex64) -> crate::Result<Tree> {
    let mut index = HashMap::new();
    let mut all = Vec::new();
    for k in 0..mesh.len() {
        if let NodeKind::Lattice(i, j) = mesh.kind(k) {
            index.insert((i, j), all.len());
            all.push(k);
        }
    }
    if all.is_empty() {
        return Err(Error::MeshTooCoarse("no lattice nodes".into()));
    }
    let adjacency: Vec<Vec<usize>> = all
        .iter()
        .map(|&k| {
            let (i, j) = mesh.lattice_index(k).expect("lattice node");
            let mut out: Vec<usize> = mesh
                .neighbors(k)
                .iter()
                .filter_map(|&(n, _)| {
                    let (a, b) = mesh.lattice_index(n as usize)?;
                    ((a - i).abs() + (b - j).abs() == 1).then(|| index[&(a, b)])
                })
                .collect();
            out.sort_unstable();
            out
        })
        .collect();
    let root = (0..all.len())
        .min_by(|&a, &b| {
            (mesh.position(all[a]) - base)
                .norm()
                .total_cmp(&(mesh.position(all[b]) - base).norm())
        })
        .expect("nonempty");
    let mut parent = vec![None; all.len()];
    let mut seen = vec![false; all.len()];
    let mut order = vec![root];
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                order.push(v);
                queue.push_back(v);
            }
        }
    }
    // Keep the component of the root and renumber in BFS order.
    let mut renum = vec![usize::MAX; all.len()];
    for (new, &old) in order.iter().enumerate() {
        renum[old] = new;
    }
    let mesh_nodes: Vec<usize> = order.iter().map(|&o| all[o]).collect();
    Ok(Tree {
        ij: mesh_nodes.iter().map(|&k| mesh.lattice_index(k).expect("lattice node")).collect(),
        z: mesh_nodes.iter().map(|&k| mesh.position(k)).collect(),
        parent: order.iter().map(|&o| parent[o].map(|p| renum[p])).collect(),
        adjacency: order
            .iter()
            .map(|&o| adjacency[o].iter().map(|&v| renum[v]).filter(|&v| v != usize::MAX).collect())
            .collect(),
        order: (0..order.len()).collect(),
        root: 0,
    })
}

fn faces(tree: &Tree) -> Vec<[u32; 3]> {
    let index: HashMap<(i32, i32), usize> = tree.ij.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let linked = |a: usize, b: usize| tree.adjacency[a].binary_search(&b).is_ok() || tree.adjacency[a].contains(&b);
    let mut out = Vec::new();
    let mut cells: Vec<(i32, i32)> = tree.ij.clone();
    cells.sort_unstable();
    for (i, j) in cells {
        let (Some(&v00), Some(&v10), Some(&v11), Some(&v01)) = (
            index.get(&(i, j)),
            index.get(&(i + 1, j)),
            index.get(&(i + 1, j + 1)),
            index.get(&(i, j + 1)),
        ) else {
            continue;
        };
        if linked(v00, v10) && linked(v10, v11) && linked(v11, v01) && linked(v01, v00) {
            out.push([v00 as u32, v10 as u32, v11 as u32]);
            out.push([v00 as u32, v11 as u32, v01 as u32]);
        }
    }
    out
}

fn non_tree_edges(tree: &Tree) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for u in 0..tree.z.len() {
        for &v in &tree.adjacency[u] {
            if u < v && tree.parent[v] != Some(u) && tree.parent[u] != Some(v) {
                out.push((u, v));
            }
        }
    }
    out
}

fn seam_report(edges: &[(usize, usize)], mismatch: Vec<Vec<f64>>) -> SeamReport {
    let mut report = SeamReport { edges_checked: edges.len(), max_mismatch: 0.0, worst_edge: None, worst_components: vec![] };
    for (k, m) in mismatch.into_iter().enumerate() {
        let n = m.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > report.max_mismatch || report.worst_edge.is_none() {
            report.max_mismatch = n;
            report.worst_edge = Some(edges[k]);
            report.worst_components = m;
        }
    }
    report
}

/// Synthesizes the surface on the lattice part of `mesh` by integrating
/// along a spanning tree from the base point. `step` is the Runge–Kutta
/// step for flat fronts and is ignored for the other classes.
pub fn synthesize(d: &WeierstrassData, mesh: &MeshedDomain, step: Option<f64>) -> crate::Result<SurfaceMesh> {
    let p = Prepared::new(d);
    let t = d.associated_triple()?;
    let tree = spanning_tree(mesh, d.base_point)?;
    let n = tree.z.len();
    let from = |v: usize| tree.parent[v].map_or(d.base_point, |u| tree.z[u]);
    let edges = non_tree_edges(&tree);

    let (positions, hermitian, lifts, seam, det_drift) = if p.class == SurfaceClass::FlatFront {
        let max_step = 1e-2 * d.domain.region.diameter();
        let step = step.unwrap_or(DEFAULT_STEP.min(max_step));
        if !(step > 0.0 && step <= max_step) {
            return Err(Error::StepTooLarge { step, max: max_step });
        }
        let hops = par::try_map_range(n, |v| p.transport(from(v), tree.z[v], step))?;
        let mut lifts = vec![[ONE, ZERO, ZERO, ONE]; n];
        let mut length = vec![0.0; n];
        for &v in &tree.order {
            let drift = (det(&hops[v]) - ONE).norm();
            if drift > DET_TOLERANCE {
                return Err(Error::DetDrift { z: tree.z[v], drift });
            }
            let (start, len0) = match tree.parent[v] {
                Some(u) => (lifts[u], length[u]),
                None => ([ONE, ZERO, ZERO, ONE], 0.0),
            };
            lifts[v] = mat_mul(&start, &hops[v]);
            length[v] = len0 + (tree.z[v] - from(v)).norm();
        }
        let mut drift = DetDrift { max: 0.0, per_length: 0.0 };
        for v in 0..n {
            let e = (det(&lifts[v]) - ONE).norm();
            if e > DET_TOLERANCE {
                return Err(Error::DetDrift { z: tree.z[v], drift: e });
            }
            drift.max = drift.max.max(e);
            if length[v] > 0.0 {
                drift.per_length = drift.per_length.max(e / length[v]);
            }
        }
        let mismatch = par::try_map(&edges, |&(u, v)| -> crate::Result<Vec<f64>> {
            let hop = p.transport(tree.z[u], tree.z[v], step)?;
            let m = mat_mul(&lifts[u], &hop);
            Ok((0..4).flat_map(|q| [(lifts[v][q] - m[q]).re, (lifts[v][q] - m[q]).im]).collect())
        })?;
        let herm: Vec<Hermitian> = lifts.iter().map(Hermitian::from_lift).collect();
        let pos = herm.iter().map(Hermitian::ball).collect();
        (pos, Some(herm), Some(lifts), seam_report(&edges, mismatch), Some(drift))
    } else {
        let hops = par::try_map_range(n, |v| p.segment_integral(from(v), tree.z[v]))?;
        let mut acc = vec![CVec([ZERO; 3]); n];
        for &v in &tree.order {
            acc[v] = match tree.parent[v] {
                Some(u) => acc[u] + hops[v],
                None => hops[v],
            };
        }
        let mismatch = par::try_map(&edges, |&(u, v)| -> crate::Result<Vec<f64>> {
            let m = acc[v] - acc[u] - p.segment_integral(tree.z[u], tree.z[v])?;
            let k = if p.class == SurfaceClass::ImproperAffine { 1 } else { 3 };
            Ok(m.0[..k].iter().map(|c| c.re).collect())
        })?;
        let pos = par::try_map_range(n, |v| p.position(tree.z[v], &acc[v]))?;
        (pos, None, None, seam_report(&edges, mismatch), None)
    };
    let diagnostics = par::try_map(&tree.z, |&z| p.diagnostics(&t, z))?;
    Ok(SurfaceMesh {
        class: p.class,
        spacing: mesh.spacing(),
        params: tree.z.clone(),
        lattice: tree.ij.clone(),
        faces: faces(&tree),
        positions,
        diagnostics,
        hermitian,
        lifts,
        root: tree.root,
        seam,
        det_drift,
        lorentzian: p.class == SurfaceClass::Maxface,
    })
}

fn expect_class(d: &WeierstrassData, class: SurfaceClass) -> crate::Result<()> {
    if d.class() == class {
        Ok(())
    } else {
        Err(Error::NotApplicable(format!("expected {} data, got {}", class.as_str(), d.class().as_str())))
    }
}

pub fn synth_minimal(d: &WeierstrassData, mesh: &MeshedDomain) -> crate::Result<SurfaceMesh> {
    expect_class(d, SurfaceClass::Minimal)?;
    synthesize(d, mesh, None)
}

pub fn synth_maxface(d: &WeierstrassData, mesh: &MeshedDomain) -> crate::Result<SurfaceMesh> {
    expect_class(d, SurfaceClass::Maxface)?;
    synthesize(d, mesh, None)
}

pub fn synth_improper_affine(d: &WeierstrassData, mesh: &MeshedDomain) -> crate::Result<SurfaceMesh> {
    expect_class(d, SurfaceClass::ImproperAffine)?;
    synthesize(d, mesh, None)
}

pub fn synth_flatfront(d: &WeierstrassData, mesh: &MeshedDomain, step: f64) -> crate::Result<SurfaceMesh> {
    expect_class(d, SurfaceClass::FlatFront)?;
    synthesize(d, mesh, Some(step))
}
