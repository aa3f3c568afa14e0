use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::mtriple::{point_segment_distance, DomainSpec};
use crate::quad::gauss_legendre4;
use crate::{par, Error};

/// Relative inset of the ghost boundary ring.
pub const BOUNDARY_INSET: f64 = 1e-3;
/// Radius of the innermost refinement ring around a puncture.
pub const PUNCTURE_EXCLUSION: f64 = 1e-4;
/// Angular samples per refinement ring.
pub const RING_ANGLES: usize = 32;

/// Offsets of the 16-neighbor stencil, one per undirected pair.
const STENCIL: [(i32, i32); 8] = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeFlag {
    Interior,
    BoundaryAdjacent,
    PunctureAdjacent,
}

impl NodeFlag {
    pub fn is_source(self) -> bool {
        !matches!(self, NodeFlag::Interior)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeFlag::Interior => "interior",
            NodeFlag::BoundaryAdjacent => "boundary_adjacent",
            NodeFlag::PunctureAdjacent => "puncture_adjacent",
        }
    }
}

/// How a node was generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Lattice(i32, i32),
    /// Refinement ring `ring` (0 = innermost) around puncture `puncture`.
    Ring { puncture: usize, ring: usize },
    Ghost,
}

/// Lattice geometry: node `(i, j)` sits at `origin + h·(i + j·i)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeInfo {
    pub resolution: usize,
    pub spacing: f64,
    pub origin: Complex64,
    pub rings_per_puncture: usize,
}

/// Weighted graph over sample points of a planar domain; edge weights are
/// conformal lengths of the straight segments.
#[derive(Clone, Debug)]
pub struct MeshedDomain {
    domain: DomainSpec,
    positions: Vec<Complex64>,
    flags: Vec<NodeFlag>,
    kinds: Vec<NodeKind>,
    edges: Vec<(u32, u32)>,
    weights: Vec<f64>,
    offsets: Vec<usize>,
    adjacency: Vec<(u32, u32)>,
    lattice: HashMap<(i32, i32), usize>,
    info: LatticeInfo,
}

struct Builder {
    positions: Vec<Complex64>,
    flags: Vec<NodeFlag>,
    kinds: Vec<NodeKind>,
    edges: Vec<(u32, u32)>,
}

impl Builder {
    fn push(&mut self, z: Complex64, flag: NodeFlag, kind: NodeKind) -> usize {
        self.positions.push(z);
        self.flags.push(flag);
        self.kinds.push(kind);
        self.positions.len() - 1
    }

    fn edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.edges.push((a.min(b) as u32, a.max(b) as u32));
        }
    }
}

/// Meshes `domain` with a square lattice of spacing `max(bbox side)/resolution`,
/// graded rings down to radius 1e-4 around each puncture and a ghost
/// boundary ring at relative inset 1e-3; edge weights are 4-point
/// Gauss–Legendre integrals of `density`.
pub fn build_mesh<D>(domain: &DomainSpec, density: D, resolution: usize) -> crate::Result<MeshedDomain>
where
    D: Fn(Complex64) -> f64 + Sync + Send,
{
    domain.validate()?;
    if resolution < 2 {
        return Err(Error::MeshTooCoarse(format!("resolution {resolution} < 2")));
    }
    let region = &domain.region;
    let (lo, hi) = region.bbox();
    let side = (hi.re - lo.re).max(hi.im - lo.im);
    let h = side / resolution as f64;
    let origin = 0.5 * (lo + hi);
    let core = 2.0 * h;
    let half_i = ((hi.re - lo.re) / (2.0 * h)).ceil() as i32 + 1;
    let half_j = ((hi.im - lo.im) / (2.0 * h)).ceil() as i32 + 1;

    let mut b = Builder {
        positions: Vec::new(),
        flags: Vec::new(),
        kinds: Vec::new(),
        edges: Vec::new(),
    };
    let in_core = |z: Complex64| domain.punctures.iter().any(|&p| (z - p).norm() < core);

    let mut lattice = HashMap::new();
    for j in -half_j..=half_j {
        for i in -half_i..=half_i {
            let z = origin + Complex64::new(i as f64, j as f64) * h;
            if region.inset_contains(z, BOUNDARY_INSET) && !in_core(z) {
                let id = b.push(z, NodeFlag::Interior, NodeKind::Lattice(i, j));
                lattice.insert((i, j), id);
            }
        }
    }
    let lattice_ids: Vec<(i32, i32, usize)> = {
        let mut v: Vec<_> = lattice.iter().map(|(&(i, j), &id)| (i, j, id)).collect();
        v.sort_by_key(|&(_, _, id)| id);
        v
    };
    for &(i, j, a) in &lattice_ids {
        for (di, dj) in STENCIL {
            if let Some(&c) = lattice.get(&(i + di, j + dj)) {
                let (za, zc) = (b.positions[a], b.positions[c]);
                if region.segment_inside(za, zc) {
                    b.edge(a, c);
                }
            }
        }
    }

    // Lattice nodes within `radius` of `z`.
    let near = |z: Complex64, radius: f64| {
        let w = (z - origin) / h;
        let r = (radius / h).ceil() as i32;
        let (ci, cj) = (w.re.round() as i32, w.im.round() as i32);
        let mut out = Vec::new();
        for j in cj - r..=cj + r {
            for i in ci - r..=ci + r {
                if let Some(&id) = lattice.get(&(i, j)) {
                    out.push(id);
                }
            }
        }
        out
    };

    // Graded rings around punctures.
    let q = 1.0 + std::f64::consts::TAU / RING_ANGLES as f64;
    let n_rings = ((core / PUNCTURE_EXCLUSION).ln() / q.ln()).floor().max(0.0) as usize + 1;
    for (pi, &p) in domain.punctures.iter().enumerate() {
        let mut prev: Option<Vec<Option<usize>>> = None;
        for k in 0..n_rings {
            let r = PUNCTURE_EXCLUSION * q.powi(k as i32);
            let flag = if k == 0 { NodeFlag::PunctureAdjacent } else { NodeFlag::Interior };
            let phase = if k % 2 == 0 { 0.0 } else { 0.5 };
            let ring: Vec<Option<usize>> = (0..RING_ANGLES)
                .map(|a| {
                    let th = std::f64::consts::TAU * (a as f64 + phase) / RING_ANGLES as f64;
                    let z = p + Complex64::from_polar(r, th);
                    let foreign = domain
                        .punctures
                        .iter()
                        .enumerate()
                        .any(|(o, &pp)| o != pi && (z - pp).norm() < core);
                    (region.inset_contains(z, BOUNDARY_INSET) && !foreign)
                        .then(|| b.push(z, flag, NodeKind::Ring { puncture: pi, ring: k }))
                })
                .collect();
            for a in 0..RING_ANGLES {
                if let (Some(x), Some(y)) = (ring[a], ring[(a + 1) % RING_ANGLES]) {
                    b.edge(x, y);
                }
            }
            if let Some(prev) = &prev {
                // Odd rings are rotated by half a step: ring a sits between
                // previous a and a+1 (or a−1 and a).
                for a in 0..RING_ANGLES {
                    let Some(x) = ring[a] else { continue };
                    let (lo_a, hi_a) = if k % 2 == 1 {
                        (a, (a + 1) % RING_ANGLES)
                    } else {
                        ((a + RING_ANGLES - 1) % RING_ANGLES, a)
                    };
                    for o in [lo_a, hi_a] {
                        if let Some(y) = prev[o] {
                            b.edge(x, y);
                        }
                    }
                    let far = if k % 2 == 1 { (a + 2) % RING_ANGLES } else { (a + RING_ANGLES - 2) % RING_ANGLES };
                    if let Some(y) = prev[far] {
                        b.edge(x, y);
                    }
                }
            }
            if r > 0.6 * h {
                for x in ring.iter().flatten() {
                    let z = b.positions[*x];
                    for y in near(z, 1.6 * h) {
                        if (b.positions[y] - z).norm() <= 1.6 * h {
                            b.edge(*x, y);
                        }
                    }
                }
            }
            prev = Some(ring);
        }
    }

    // Ghost boundary ring.
    for z in region.inset_boundary(BOUNDARY_INSET, 0.5 * h) {
        if in_core(z) {
            continue;
        }
        let id = b.push(z, NodeFlag::BoundaryAdjacent, NodeKind::Ghost);
        for y in near(z, 2.3 * h) {
            let zy = b.positions[y];
            if (zy - z).norm() <= 2.3 * h && region.segment_inside(z, zy) {
                b.edge(id, y);
            }
        }
    }

    b.edges.sort_unstable();
    b.edges.dedup();

    // Density must be usable at every node before any quadrature runs.
    let node_density = par::map(&b.positions, |&z| density(z));
    for (k, d) in node_density.iter().enumerate() {
        if !(d.is_finite() && *d > 0.0) {
            return Err(Error::DensityNonFinite { z: b.positions[k] });
        }
    }
    let positions = &b.positions;
    let weights = par::try_map(&b.edges, |&(i, j)| {
        let (a, c) = (positions[i as usize], positions[j as usize]);
        segment_weight(&density, a, c)
    })?;

    let n = b.positions.len();
    let mut degree = vec![0usize; n];
    for &(i, j) in &b.edges {
        degree[i as usize] += 1;
        degree[j as usize] += 1;
    }
    let mut offsets = vec![0usize; n + 1];
    for k in 0..n {
        offsets[k + 1] = offsets[k] + degree[k];
    }
    let mut fill = offsets.clone();
    let mut adjacency = vec![(0u32, 0u32); offsets[n]];
    for (e, &(i, j)) in b.edges.iter().enumerate() {
        adjacency[fill[i as usize]] = (j, e as u32);
        fill[i as usize] += 1;
        adjacency[fill[j as usize]] = (i, e as u32);
        fill[j as usize] += 1;
    }

    Ok(MeshedDomain {
        domain: domain.clone(),
        positions: b.positions,
        flags: b.flags,
        kinds: b.kinds,
        edges: b.edges,
        weights,
        offsets,
        adjacency,
        lattice,
        info: LatticeInfo {
            resolution,
            spacing: h,
            origin,
            rings_per_puncture: if domain.punctures.is_empty() { 0 } else { n_rings },
        },
    })
}

/// Conformal length of the straight segment `a → b` by 4-point
/// Gauss–Legendre quadrature.
pub fn segment_weight<D>(density: &D, a: Complex64, b: Complex64) -> crate::Result<f64>
where
    D: Fn(Complex64) -> f64,
{
    let d = b - a;
    let len = d.norm();
    let integral = gauss_legendre4(
        |t| {
            let z = a + d * t;
            let v = density(z);
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(Error::DensityNonFinite { z })
            }
        },
        0.0,
        1.0,
    )?;
    let w = integral * len;
    if w.is_finite() && w > 0.0 {
        Ok(w)
    } else {
        Err(Error::DensityNonFinite { z: 0.5 * (a + b) })
    }
}

impl MeshedDomain {
    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Complex64] {
        &self.positions
    }

    pub fn position(&self, node: usize) -> Complex64 {
        self.positions[node]
    }

    pub fn flags(&self) -> &[NodeFlag] {
        &self.flags
    }

    pub fn flag(&self, node: usize) -> NodeFlag {
        self.flags[node]
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        self.kinds[node]
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn info(&self) -> LatticeInfo {
        self.info
    }

    pub fn resolution(&self) -> usize {
        self.info.resolution
    }

    pub fn spacing(&self) -> f64 {
        self.info.spacing
    }

    /// `(neighbor, edge index)` pairs of `node`.
    pub fn neighbors(&self, node: usize) -> &[(u32, u32)] {
        &self.adjacency[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    /// Node id of lattice site `(i, j)`, if present.
    pub fn lattice_node(&self, i: i32, j: i32) -> Option<usize> {
        self.lattice.get(&(i, j)).copied()
    }

    pub fn lattice_index(&self, node: usize) -> Option<(i32, i32)> {
        match self.kinds[node] {
            NodeKind::Lattice(i, j) => Some((i, j)),
            _ => None,
        }
    }

    /// Position of lattice site `(i, j)` whether or not it is a node.
    pub fn lattice_point(&self, i: i32, j: i32) -> Complex64 {
        self.info.origin + Complex64::new(i as f64, j as f64) * self.info.spacing
    }

    /// Nodes that are not part of a puncture refinement ring.
    pub fn is_graded(&self, node: usize) -> bool {
        matches!(self.kinds[node], NodeKind::Ring { .. })
    }

    /// Node closest to `z` (linear scan).
    pub fn nearest_node(&self, z: Complex64) -> usize {
        let mut best = (0, f64::INFINITY);
        for (k, p) in self.positions.iter().enumerate() {
            let d = (p - z).norm_sqr();
            if d < best.1 {
                best = (k, d);
            }
        }
        best.0
    }

    /// Same graph, weights recomputed for another density.
    pub fn reweighted<D>(&self, density: D) -> crate::Result<MeshedDomain>
    where
        D: Fn(Complex64) -> f64 + Sync + Send,
    {
        let positions = &self.positions;
        let weights = par::try_map(&self.edges, |&(i, j)| {
            segment_weight(&density, positions[i as usize], positions[j as usize])
        })?;
        Ok(MeshedDomain { weights, ..self.clone() })
    }

    /// Minimum Euclidean distance from the segment of edge `e` to any puncture.
    pub fn edge_puncture_clearance(&self, e: usize) -> f64 {
        let (i, j) = self.edges[e];
        let (a, b) = (self.positions[i as usize], self.positions[j as usize]);
        self.domain
            .punctures
            .iter()
            .map(|&p| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }
}
