//! Surfaces from representation data: minimal surfaces in R³, maxfaces in
//! L³, improper affine fronts in R³ and flat fronts in H³.

mod checks;
mod export;
mod locus;
mod synth;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use checks::{
    gauss_normal_check, immersion_check, nullity, period_residuals, GaussNormalReport, ImmersionReport,
    PeriodResidual, MAXFACE_EXCLUSION,
};
pub use export::{export_mesh, ExportFormat};
pub use locus::{singular_locus, Polyline};
pub use synth::{
    point_value, synth_flatfront, synth_improper_affine, synth_maxface, synth_minimal, synthesize,
    transport, SurfacePoint, DEFAULT_STEP, DET_TOLERANCE, EDGE_TOLERANCE,
};

use crate::expr::{ExtComplex, MeroExpr};
use crate::mtriple::{make_triple, DomainSpec, MTriple};
use crate::poly::Rational;
use crate::Error;

/// Relative band around the exact singular locus used for vertex flags.
pub const SINGULAR_BAND: f64 = 1e-3;

/// Holomorphic data of one of the four surface classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum SurfaceData {
    Minimal { f: MeroExpr, g: MeroExpr },
    Maxface { f: MeroExpr, g: MeroExpr },
    ImproperAffine {
        #[serde(rename = "F")]
        big_f: MeroExpr,
        #[serde(rename = "G")]
        big_g: MeroExpr,
    },
    FlatFront { omega: MeroExpr, theta: MeroExpr },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceClass {
    Minimal,
    Maxface,
    ImproperAffine,
    FlatFront,
}

impl SurfaceClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SurfaceClass::Minimal => "minimal",
            SurfaceClass::Maxface => "maxface",
            SurfaceClass::ImproperAffine => "improper_affine",
            SurfaceClass::FlatFront => "flat_front",
        }
    }
}

/// Surface data on a planar domain with a base point for the integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassData {
    #[serde(flatten)]
    pub data: SurfaceData,
    pub domain: DomainSpec,
    #[serde(default)]
    pub base_point: Complex64,
}

fn check_pole_free(domain: &DomainSpec, e: &MeroExpr) -> crate::Result<()> {
    if !e.is_rational() {
        return Ok(());
    }
    let r = Rational::from_expr(e)?;
    for p in r.den.roots() {
        if !domain.region.contains(p) || domain.nearest_puncture(p).is_some_and(|(_, d)| d < 1e-6) {
            continue;
        }
        if crate::expr::local_order(e, p)? < 0 {
            return Err(Error::NonHolomorphic { z: p });
        }
    }
    Ok(())
}

impl WeierstrassData {
    /// Validates the data: regularity of the `m = 2` triple for minimal
    /// surfaces and maxfaces, `|g| ≢ 1` for maxfaces, holomorphy of the
    /// canonical forms for flat fronts.
    pub fn new(data: SurfaceData, domain: DomainSpec, base_point: Complex64) -> crate::Result<Self> {
        let d = WeierstrassData { data, domain, base_point };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> crate::Result<()> {
        self.domain.validate()?;
        self.domain.check_point(self.base_point)?;
        match &self.data {
            SurfaceData::Minimal { f, g } => {
                make_triple(self.domain.clone(), f.clone(), g.clone(), 2)?;
            }
            SurfaceData::Maxface { f, g } => {
                make_triple(self.domain.clone(), f.clone(), g.clone(), 2)?;
                let c = self.domain.region.center();
                let probes = [0.0, 0.13, 0.29, 0.41].map(|t| c + Complex64::from_polar(t * self.domain.region.diameter() * 0.25, 7.0 * t));
                let unimodular = probes.iter().all(|&z| {
                    !self.domain.contains(z)
                        || g.eval_ext(z).is_ok_and(|v| (v.norm_sqr() - 1.0).abs() < 1e-12)
                });
                if unimodular {
                    return Err(Error::DegenerateData { z: c, reason: "|g| ≡ 1".into() });
                }
            }
            SurfaceData::ImproperAffine { big_f, big_g } => {
                check_pole_free(&self.domain, big_f)?;
                check_pole_free(&self.domain, big_g)?;
            }
            SurfaceData::FlatFront { omega, theta } => {
                check_pole_free(&self.domain, omega)?;
                check_pole_free(&self.domain, theta)?;
            }
        }
        Ok(())
    }

    pub fn class(&self) -> SurfaceClass {
        match self.data {
            SurfaceData::Minimal { .. } => SurfaceClass::Minimal,
            SurfaceData::Maxface { .. } => SurfaceClass::Maxface,
            SurfaceData::ImproperAffine { .. } => SurfaceClass::ImproperAffine,
            SurfaceData::FlatFront { .. } => SurfaceClass::FlatFront,
        }
    }

    /// The Gauss-type map: `g`, the Lorentzian Gauss map `g`, the Lagrangian
    /// Gauss map `ν = dF/dG` or the ratio `ρ = θ/ω`.
    pub fn gauss_map(&self) -> MeroExpr {
        match &self.data {
            SurfaceData::Minimal { g, .. } | SurfaceData::Maxface { g, .. } => g.clone(),
            SurfaceData::ImproperAffine { big_f, big_g } => big_f.derivative() / big_g.derivative(),
            SurfaceData::FlatFront { omega, theta } => theta.clone() / omega.clone(),
        }
    }

    /// The m-triple carried by the data: `(f, g, 2)` with metric `ds²`
    /// (minimal) or `dσ²` (maxface), `(√2·G′, ν, 1)` with metric `dτ²`, and
    /// `(ω, ρ, 1)` with metric `ds²_𝓛`.
    pub fn associated_triple(&self) -> crate::Result<MTriple> {
        let (f, g, m) = match &self.data {
            SurfaceData::Minimal { f, g } | SurfaceData::Maxface { f, g } => (f.clone(), g.clone(), 2),
            SurfaceData::ImproperAffine { big_g, .. } => {
                (MeroExpr::real(std::f64::consts::SQRT_2) * big_g.derivative(), self.gauss_map(), 1)
            }
            SurfaceData::FlatFront { omega, .. } => (omega.clone(), self.gauss_map(), 1),
        };
        MTriple::unchecked(self.domain.clone(), f, g, m)
    }
}

/// `[[a, b], [b̄, c]]` with `a, c` real.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hermitian {
    pub a: f64,
    pub b: Complex64,
    pub c: f64,
}

impl Hermitian {
    /// `𝓛𝓛*` for `𝓛 = [[p, q], [r, s]]` stored row-major.
    pub fn from_lift(l: &[Complex64; 4]) -> Self {
        let [p, q, r, s] = *l;
        Hermitian {
            a: p.norm_sqr() + q.norm_sqr(),
            b: p * r.conj() + q * s.conj(),
            c: r.norm_sqr() + s.norm_sqr(),
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.c - self.b.norm_sqr()
    }

    pub fn trace(&self) -> f64 {
        self.a + self.c
    }

    /// `(x⁰, x¹, x², x³) = ((a+c)/2, Re b, Im b, (a−c)/2)`.
    pub fn minkowski(&self) -> [f64; 4] {
        [0.5 * (self.a + self.c), self.b.re, self.b.im, 0.5 * (self.a - self.c)]
    }

    /// Poincaré-ball point `x_i/(1+x⁰)`.
    pub fn ball(&self) -> [f64; 3] {
        let [x0, x1, x2, x3] = self.minkowski();
        let d = 1.0 + x0;
        [x1 / d, x2 / d, x3 / d]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexDiagnostics {
    /// `λ` of the associated m-triple.
    pub density: f64,
    /// Gaussian curvature of the associated metric; absent where it degenerates.
    pub curvature: Option<f64>,
    /// Second metric coefficient: `(1−|g|²)²|f|²` for maxfaces, the affine
    /// metric `|G′|²−|F′|²` for improper affine fronts.
    pub induced: Option<f64>,
    pub gauss: ExtComplex,
    pub singular: bool,
}

/// Consistency of the spanning-tree integration across the edges left out
/// of the tree. Nonzero values mean a nonvanishing period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeamReport {
    pub edges_checked: usize,
    pub max_mismatch: f64,
    pub worst_edge: Option<(usize, usize)>,
    /// Mismatch components on the worst edge.
    pub worst_components: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetDrift {
    pub max: f64,
    /// Largest `|det 𝓛 − 1|` divided by the tree path length to the vertex.
    pub per_length: f64,
}

/// A triangulated surface with per-vertex diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub class: SurfaceClass,
    pub spacing: f64,
    /// Parameter-plane point of each vertex.
    pub params: Vec<Complex64>,
    pub lattice: Vec<(i32, i32)>,
    /// R³ or L³ coordinates; Poincaré-ball coordinates for flat fronts.
    pub positions: Vec<[f64; 3]>,
    pub faces: Vec<[u32; 3]>,
    pub diagnostics: Vec<VertexDiagnostics>,
    pub hermitian: Option<Vec<Hermitian>>,
    pub lifts: Option<Vec<[Complex64; 4]>>,
    pub root: usize,
    pub seam: SeamReport,
    pub det_drift: Option<DetDrift>,
    pub lorentzian: bool,
}

impl SurfaceMesh {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn vertex_at(&self, i: i32, j: i32) -> Option<usize> {
        self.lattice.iter().position(|&p| p == (i, j))
    }

    pub fn nearest_vertex(&self, z: Complex64) -> Option<usize> {
        (0..self.len()).min_by(|&a, &b| (self.params[a] - z).norm().total_cmp(&(self.params[b] - z).norm()))
    }

    pub fn singular_count(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.singular).count()
    }
}
