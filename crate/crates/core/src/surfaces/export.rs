use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{SurfaceClass, SurfaceMesh};
use crate::expr::ExtComplex;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Obj,
    Ply,
    Csv,
    Json,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Obj => "obj",
            ExportFormat::Ply => "ply",
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
        }
    }
}

fn metadata(s: &SurfaceMesh) -> serde_json::Value {
    let mut m = json!({
        "class": s.class.as_str(),
        "vertices": s.len(),
        "faces": s.faces.len(),
        "lorentzian": s.lorentzian,
    });
    match s.class {
        SurfaceClass::Maxface => {
            m["signature"] = json!("-(dx1)^2 + (dx2)^2 + (dx3)^2");
            m["metric_note"] = json!(
                "density is that of d_sigma^2 = (1+|g|^2)^2 |f|^2 |dz|^2 as displayed; half of it is the pull-back of the standard metric"
            );
        }
        SurfaceClass::FlatFront => {
            m["model"] = json!("poincare_ball");
            m["minkowski"] = json!("(x0, x1, x2, x3) = ((a+c)/2, Re b, Im b, (a-c)/2) for psi = [[a, b], [conj b, c]]");
        }
        _ => {}
    }
    m
}

/// `mesh.obj` → `mesh.hermitian.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("hermitian.json")
}

fn write_sidecar(s: &SurfaceMesh, path: &Path) -> crate::Result<()> {
    let Some(h) = &s.hermitian else { return Ok(()) };
    let doc = json!({ "metadata": metadata(s), "hermitian": h });
    let mut w = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer_pretty(&mut w, &doc)?;
    w.flush()?;
    Ok(())
}

fn gauss_parts(g: ExtComplex) -> (String, String) {
    match g {
        ExtComplex::Finite(z) => (z.re.to_string(), z.im.to_string()),
        ExtComplex::Infinity => ("inf".into(), "inf".into()),
    }
}

/// Writes the mesh. Triangles are counter-clockwise in the parameter
/// plane, so OBJ/PLY normals agree with `ψ_u × ψ_v`. Flat fronts are
/// written in the Poincaré-ball model with the Hermitian matrices in a
/// JSON sidecar next to OBJ/PLY files.
pub fn export_mesh(s: &SurfaceMesh, format: ExportFormat, path: &Path) -> crate::Result<()> {
    if s.is_empty() {
        return Err(Error::NotApplicable("cannot export an empty mesh".into()));
    }
    match format {
        ExportFormat::Obj => {
            let mut w = BufWriter::new(File::create(path)?);
            writeln!(w, "# class {}", s.class.as_str())?;
            writeln!(w, "# lorentzian: {}", s.lorentzian)?;
            for p in &s.positions {
                writeln!(w, "v {} {} {}", p[0], p[1], p[2])?;
            }
            for f in &s.faces {
                writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
            }
            w.flush()?;
            write_sidecar(s, path)?;
        }
        ExportFormat::Ply => {
            let mut w = BufWriter::new(File::create(path)?);
            writeln!(w, "ply\nformat ascii 1.0")?;
            writeln!(w, "comment class {}", s.class.as_str())?;
            writeln!(w, "comment lorentzian: {}", s.lorentzian)?;
            writeln!(w, "element vertex {}", s.len())?;
            writeln!(w, "property double x\nproperty double y\nproperty double z\nproperty uchar singular")?;
            writeln!(w, "element face {}", s.faces.len())?;
            writeln!(w, "property list uchar int vertex_indices\nend_header")?;
            for (p, d) in s.positions.iter().zip(&s.diagnostics) {
                writeln!(w, "{} {} {} {}", p[0], p[1], p[2], d.singular as u8)?;
            }
            for f in &s.faces {
                writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
            }
            w.flush()?;
            write_sidecar(s, path)?;
        }
        ExportFormat::Csv => {
            let mut w = csv::Writer::from_path(path)?;
            w.write_record([
                "id", "u", "v", "x", "y", "z", "density", "curvature", "induced", "gauss_re", "gauss_im", "singular",
            ])?;
            for (k, (p, d)) in s.positions.iter().zip(&s.diagnostics).enumerate() {
                let (gr, gi) = gauss_parts(d.gauss);
                let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
                w.write_record([
                    k.to_string(),
                    s.params[k].re.to_string(),
                    s.params[k].im.to_string(),
                    p[0].to_string(),
                    p[1].to_string(),
                    p[2].to_string(),
                    d.density.to_string(),
                    opt(d.curvature),
                    opt(d.induced),
                    gr,
                    gi,
                    d.singular.to_string(),
                ])?;
            }
            w.flush()?;
        }
        ExportFormat::Json => {
            let doc = json!({ "metadata": metadata(s), "mesh": s });
            let mut w = BufWriter::new(File::create(path)?);
            serde_json::to_writer_pretty(&mut w, &doc)?;
            w.flush()?;
        }
    }
    Ok(())
}
