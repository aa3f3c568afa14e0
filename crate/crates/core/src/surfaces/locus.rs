use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use super::synth::eval_finite;
use super::{SurfaceData, WeierstrassData};
use crate::geodesy::{MeshedDomain, NodeKind};
use crate::{par, Error};

pub type Polyline = Vec<Complex64>;

type Corner = (i32, i32);
type EdgeKey = (Corner, Corner);

fn key(a: Corner, b: Corner) -> EdgeKey {
    if a <= b { (a, b) } else { (b, a) }
}

/// Zero contour of the singular-set indicator `|g|−1`, `|F′|−|G′|` or
/// `|ρ|−1` on the mesh lattice, by marching squares with linear
/// interpolation along cell edges.
pub fn singular_locus(d: &WeierstrassData, mesh: &MeshedDomain) -> crate::Result<Vec<Polyline>> {
    let indicator: Box<dyn Fn(Complex64) -> crate::Result<f64> + Sync> = match &d.data {
        SurfaceData::Minimal { .. } => {
            return Err(Error::NotApplicable("minimal surfaces have no singular points".into()))
        }
        SurfaceData::Maxface { g, .. } => {
            let g = g.clone();
            Box::new(move |z| Ok(g.eval_ext(z)?.norm_sqr().sqrt() - 1.0))
        }
        SurfaceData::ImproperAffine { big_f, big_g } => {
            let (df, dg) = (big_f.derivative(), big_g.derivative());
            Box::new(move |z| Ok(eval_finite(&df, z)?.norm() - eval_finite(&dg, z)?.norm()))
        }
        SurfaceData::FlatFront { .. } => {
            let rho = d.gauss_map();
            Box::new(move |z| Ok(rho.eval_ext(z)?.norm_sqr().sqrt() - 1.0))
        }
    };
    let nodes: Vec<(Corner, Complex64)> = (0..mesh.len())
        .filter_map(|k| match mesh.kind(k) {
            NodeKind::Lattice(i, j) => Some(((i, j), mesh.position(k))),
            _ => None,
        })
        .collect();
    let vals = par::try_map(&nodes, |&(_, z)| -> crate::Result<f64> {
        let s = indicator(z)?;
        if s.is_finite() {
            Ok(s)
        } else {
            Err(Error::NonFinite(format!("singular indicator at {z}")))
        }
    })?;
    let field: HashMap<Corner, (f64, Complex64)> =
        nodes.iter().zip(&vals).map(|(&(c, z), &s)| (c, (s, z))).collect();

    let mut points: BTreeMap<EdgeKey, Complex64> = BTreeMap::new();
    let mut links: BTreeMap<EdgeKey, Vec<EdgeKey>> = BTreeMap::new();
    let mut cells: Vec<Corner> = field.keys().copied().collect();
    cells.sort_unstable();
    for (i, j) in cells {
        let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
        let Some(v) = corners.iter().map(|c| field.get(c).copied()).collect::<Option<Vec<_>>>() else {
            continue;
        };
        let pos: Vec<bool> = v.iter().map(|(s, _)| *s >= 0.0).collect();
        let mut crossing = [None; 4];
        for e in 0..4 {
            let (a, b) = (e, (e + 1) % 4);
            if pos[a] != pos[b] {
                let t = v[a].0 / (v[a].0 - v[b].0);
                let k = key(corners[a], corners[b]);
                points.entry(k).or_insert(v[a].1 + (v[b].1 - v[a].1) * t);
                crossing[e] = Some(k);
            }
        }
        let found: Vec<usize> = (0..4).filter(|&e| crossing[e].is_some()).collect();
        let pairs: Vec<(usize, usize)> = match found.len() {
            2 => vec![(found[0], found[1])],
            4 => {
                let center = v.iter().map(|(s, _)| s).sum::<f64>() / 4.0;
                if (center >= 0.0) == pos[0] {
                    vec![(0, 1), (2, 3)]
                } else {
                    vec![(3, 0), (1, 2)]
                }
            }
            _ => vec![],
        };
        for (a, b) in pairs {
            let (ka, kb) = (crossing[a].expect("crossing"), crossing[b].expect("crossing"));
            links.entry(ka).or_default().push(kb);
            links.entry(kb).or_default().push(ka);
        }
    }
    Ok(chain(&points, &mut links))
}

/// Joins segments sharing an endpoint into polylines; open chains first,
/// then closed loops (which repeat their first point at the end).
fn chain(points: &BTreeMap<EdgeKey, Complex64>, links: &mut BTreeMap<EdgeKey, Vec<EdgeKey>>) -> Vec<Polyline> {
    let mut out = Vec::new();
    let take = |start: EdgeKey, links: &mut BTreeMap<EdgeKey, Vec<EdgeKey>>| {
        let mut line = vec![points[&start]];
        let mut cur = start;
        while let Some(next) = links.get_mut(&cur).and_then(|l| l.pop()) {
            if let Some(back) = links.get_mut(&next) {
                if let Some(p) = back.iter().position(|&k| k == cur) {
                    back.swap_remove(p);
                }
            }
            line.push(points[&next]);
            cur = next;
        }
        line
    };
    let ends: Vec<EdgeKey> = links.iter().filter(|(_, l)| l.len() == 1).map(|(k, _)| *k).collect();
    for k in ends {
        if links.get(&k).is_some_and(|l| l.len() == 1) {
            out.push(take(k, links));
        }
    }
    while let Some(start) = links.iter().find(|(_, l)| !l.is_empty()).map(|(k, _)| *k) {
        out.push(take(start, links));
    }
    out
}
