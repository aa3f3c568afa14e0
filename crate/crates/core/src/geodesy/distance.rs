use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::MeshedDomain;
use crate::quad::adaptive_simpson;
use crate::Error;

#[derive(Clone, Copy, PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Multi-source Dijkstra distances from `sources`.
pub fn shortest_paths(mesh: &MeshedDomain, sources: &[usize]) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; mesh.len()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(Item(0.0, s));
    }
    let w = mesh.weights();
    while let Some(Item(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, e) in mesh.neighbors(u) {
            let nd = d + w[e as usize];
            let v = v as usize;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Item(nd, v));
            }
        }
    }
    dist
}

/// Graph distance from every node to the nearest boundary-adjacent or
/// puncture-adjacent node. Overestimates the conformal distance to the
/// (truncated) boundary.
pub fn boundary_distance_field(mesh: &MeshedDomain) -> crate::Result<Vec<f64>> {
    let sources: Vec<usize> = (0..mesh.len()).filter(|&k| mesh.flag(k).is_source()).collect();
    if sources.is_empty() {
        return Err(Error::Disconnected { node: 0 });
    }
    let d = shortest_paths(mesh, &sources);
    if let Some(node) = d.iter().position(|x| !x.is_finite()) {
        return Err(Error::Disconnected { node });
    }
    Ok(d)
}

/// Conformal length `∫ density |dz|` of a polyline, adaptive Simpson per
/// segment at relative tolerance 1e-10.
pub fn path_length<D>(density: D, polyline: &[Complex64]) -> crate::Result<f64>
where
    D: Fn(Complex64) -> f64,
{
    let mut total = 0.0;
    for w in polyline.windows(2) {
        total += segment_length(&density, w[0], w[1], 1e-10)?;
    }
    Ok(total)
}

pub(crate) fn segment_length<D>(density: &D, a: Complex64, b: Complex64, rel: f64) -> crate::Result<f64>
where
    D: Fn(Complex64) -> f64,
{
    let d = b - a;
    let len = d.norm();
    if len == 0.0 {
        return Ok(0.0);
    }
    let r = adaptive_simpson(
        |t| {
            let z = a + d * t;
            let v = density(z);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::DensityNonFinite { z })
            }
        },
        0.0,
        1.0,
        rel,
    )?;
    Ok(r.value * len)
}

/// Poincaré distance in the unit disk for the curvature −1 metric
/// `2|dz|/(1−|z|²)`.
pub fn hyperbolic_distance(z1: Complex64, z2: Complex64) -> crate::Result<f64> {
    for z in [z1, z2] {
        if !(z.norm() < 1.0) {
            return Err(Error::OutsideUnitDisk { z });
        }
    }
    let num = (z1 - z2).norm();
    let den = (Complex64::new(1.0, 0.0) - z1.conj() * z2).norm();
    Ok(2.0 * (num / den).atanh())
}

/// The Poincaré density `2/(1−|z|²)`.
pub fn poincare_density(z: Complex64) -> f64 {
    2.0 / (1.0 - z.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::MobiusMap;
    use crate::geodesy::build_mesh;
    use crate::mtriple::{DomainSpec, Region};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn path_length_examples() {
        assert!((path_length(|_| 1.0, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap() - 1.0).abs() < 1e-14);
        let l = path_length(poincare_density, &[c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!((l - 3f64.ln()).abs() < 1e-9);
        let l = path_length(|z| 1.0 + z.norm_sqr(), &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((l - 4.0 / 3.0).abs() < 1e-12);
        assert!(path_length(|_| f64::NAN, &[c(0.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn hyperbolic_reference_values() {
        assert_eq!(hyperbolic_distance(c(0.0, 0.0), c(0.0, 0.0)).unwrap(), 0.0);
        let d = hyperbolic_distance(c(0.0, 0.0), c(0.5, 0.0)).unwrap();
        assert!((d - 3f64.ln()).abs() < 1e-14);
        let (z, w) = (c(0.3, -0.2), c(-0.5, 0.4));
        let d = hyperbolic_distance(z, w).unwrap();
        assert!((d - hyperbolic_distance(w, z).unwrap()).abs() < 1e-14);
        let phi = MobiusMap::disk_automorphism(c(0.1, 0.6)).unwrap();
        let im = |v: Complex64| phi.apply(v.into()).finite().unwrap();
        assert!((hyperbolic_distance(im(z), im(w)).unwrap() - d).abs() < 1e-10);
        assert!(hyperbolic_distance(c(1.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn euclidean_disk_center_distance() {
        let m = build_mesh(&DomainSpec::unit_disk(), |_| 1.0, 200).unwrap();
        let d = boundary_distance_field(&m).unwrap();
        let center = m.lattice_node(0, 0).unwrap();
        assert!((d[center] - 1.0).abs() < 0.05);
    }

    #[test]
    fn rectangle_center_distance() {
        let d = DomainSpec::new(Region::Rectangle { min: c(-1.0, -0.5), max: c(1.0, 0.5) }, vec![]).unwrap();
        let m = build_mesh(&d, |_| 1.0, 100).unwrap();
        let f = boundary_distance_field(&m).unwrap();
        let center = m.lattice_node(0, 0).unwrap();
        assert!((f[center] - 0.5).abs() < 0.05 * 0.5, "{}", f[center]);
    }

    #[test]
    fn poincare_rim_distance() {
        let m = build_mesh(&DomainSpec::unit_disk(), poincare_density, 200).unwrap();
        let f = boundary_distance_field(&m).unwrap();
        let node = m.lattice_node(90, 0).unwrap();
        let r = m.position(node).re;
        let exact = path_length(poincare_density, &[c(r, 0.0), c(0.999, 0.0)]).unwrap();
        assert!(((f[node] - exact) / exact).abs() < 0.05, "{} vs {exact}", f[node]);
    }
}
