use std::io::Write;
use std::path::Path;

use super::MeshedDomain;

/// Writes `id,x,y,flag` rows.
pub fn write_nodes_csv<W: Write>(mesh: &MeshedDomain, out: W) -> crate::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "x", "y", "flag"])?;
    for k in 0..mesh.len() {
        let z = mesh.position(k);
        w.write_record([
            k.to_string(),
            format!("{:.17e}", z.re),
            format!("{:.17e}", z.im),
            mesh.flag(k).as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `i,j,weight` rows.
pub fn write_edges_csv<W: Write>(mesh: &MeshedDomain, out: W) -> crate::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "weight"])?;
    for (e, &(i, j)) in mesh.edges().iter().enumerate() {
        w.write_record([i.to_string(), j.to_string(), format!("{:.17e}", mesh.weights()[e])])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `nodes.csv` and `edges.csv` into `dir`.
pub fn export_csv(mesh: &MeshedDomain, dir: &Path) -> crate::Result<()> {
    std::fs::create_dir_all(dir)?;
    write_nodes_csv(mesh, std::fs::File::create(dir.join("nodes.csv"))?)?;
    write_edges_csv(mesh, std::fs::File::create(dir.join("edges.csv"))?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesy::build_mesh;
    use crate::mtriple::DomainSpec;

    #[test]
    fn csv_row_counts() {
        let m = build_mesh(&DomainSpec::unit_disk(), |_| 1.0, 10).unwrap();
        let dir = tempfile::tempdir().unwrap();
        export_csv(&m, dir.path()).unwrap();
        let nodes = std::fs::read_to_string(dir.path().join("nodes.csv")).unwrap();
        let edges = std::fs::read_to_string(dir.path().join("edges.csv")).unwrap();
        assert_eq!(nodes.lines().count(), m.len() + 1);
        assert_eq!(edges.lines().count(), m.edges().len() + 1);
        assert!(nodes.starts_with("id,x,y,flag\n"));
    }
}
