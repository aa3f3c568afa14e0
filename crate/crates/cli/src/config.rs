//! Config records, one per subcommand, read from TOML.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_path_to_error::Segment;

use weierstrass_lab::estimates::{PropertySpec, DEFAULT_DELTA, ZALCMAN_GRID};
use weierstrass_lab::geodesy::ProbeTarget;
use weierstrass_lab::surfaces::{ExportFormat, WeierstrassData};
use weierstrass_lab::{Complex64, DomainSpec, ExtComplex, MeroExpr};

use crate::error::CliError;

fn default_resolution() -> usize {
    100
}

fn default_fd_step() -> f64 {
    1e-3
}

fn default_tolerance() -> f64 {
    1e-3
}

fn default_formats() -> Vec<ExportFormat> {
    vec![ExportFormat::Obj, ExportFormat::Ply]
}

fn default_marty_grid() -> usize {
    200
}

fn default_zalcman_grid() -> usize {
    ZALCMAN_GRID
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_levels() -> Vec<f64> {
    weierstrass_lab::geodesy::decade_levels(6)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleInput {
    pub domain: DomainSpec,
    pub f: MeroExpr,
    pub g: MeroExpr,
    pub m: u32,
    /// Evaluation points; the region center when empty.
    #[serde(default)]
    pub points: Vec<Complex64>,
    /// Extra seeded random points inside the domain.
    #[serde(default)]
    pub samples: usize,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateInput {
    pub domain: DomainSpec,
    pub f: MeroExpr,
    pub g: MeroExpr,
    pub m: u32,
    pub property: PropertySpec,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceInput {
    pub surface: WeierstrassData,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub step: Option<f64>,
    /// Closed polygons for period residuals.
    #[serde(default)]
    pub cycles: Vec<Vec<Complex64>>,
    /// Bound on the immersion and Gauss-normal defects.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_formats")]
    pub formats: Vec<ExportFormat>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartyInput {
    /// Expression template with `{n}` standing for the family index.
    pub family: String,
    pub indices: Vec<i64>,
    #[serde(default)]
    pub center: Complex64,
    pub radius: f64,
    #[serde(default = "default_marty_grid")]
    pub grid: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZalcmanInput {
    pub h: MeroExpr,
    #[serde(default = "default_zalcman_grid")]
    pub grid: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FujimotoInput {
    pub f: MeroExpr,
    pub values: Vec<ExtComplex>,
    pub eta: f64,
    pub radius: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompletenessInput {
    pub domain: DomainSpec,
    pub f: MeroExpr,
    pub g: MeroExpr,
    pub m: u32,
    pub target: ProbeTarget,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default)]
    pub start: Option<Complex64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimalInput {
    pub m: u32,
    pub alphas: Vec<Complex64>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

/// Command-line values written into the config table before it is typed.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub resolution: Option<usize>,
    pub bounded: Option<f64>,
    pub class: Option<String>,
}

pub fn read_table(path: &Path) -> Result<toml::Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.parse::<toml::Table>()
        .map_err(|e| CliError::new("config_syntax", e.to_string().trim_end().to_string()))
}

impl Overrides {
    pub fn apply(&self, table: &mut toml::Table) -> Result<(), CliError> {
        let int = |n: u64, flag: &str| {
            i64::try_from(n).map(toml::Value::Integer).map_err(|_| CliError::usage(format!("{flag} {n} is too large")))
        };
        if let Some(s) = self.seed {
            table.insert("seed".into(), int(s, "--seed")?);
        }
        if let Some(r) = self.resolution {
            table.insert("resolution".into(), int(r as u64, "--resolution")?);
        }
        if let Some(l) = self.bounded {
            let mut p = toml::Table::new();
            p.insert("bounded".into(), toml::Value::Float(l));
            table.insert("property".into(), toml::Value::Table(p));
        }
        if let Some(c) = &self.class {
            match table.entry("surface").or_insert_with(|| toml::Value::Table(toml::Table::new())) {
                toml::Value::Table(s) => {
                    s.insert("class".into(), toml::Value::String(c.clone()));
                }
                _ => return Err(CliError::new("config_schema", "expected a table").at("/surface")),
            }
        }
        Ok(())
    }
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    out
}

/// Types the table, reporting schema violations with a JSON pointer.
pub fn typed<T: DeserializeOwned>(table: &toml::Table) -> Result<T, CliError> {
    serde_path_to_error::deserialize(toml::Value::Table(table.clone())).map_err(|e| {
        let ptr = pointer(e.path());
        CliError::new("config_schema", e.into_inner().to_string().trim_end()).at(ptr)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(s: &str) -> toml::Table {
        s.parse().unwrap()
    }

    #[test]
    fn schema_errors_carry_pointers() {
        let t = table("f = \"1\"\ng = \"z\"\nm = \"two\"\n[domain.region]\nkind = \"disk\"\nradius = 1.0\n");
        let err = typed::<TripleInput>(&t).unwrap_err();
        assert_eq!(err.pointer.as_deref(), Some("/m"));
        let t = table("f = \"1 +\"\ng = \"z\"\nm = 2\n[domain.region]\nkind = \"disk\"\nradius = 1.0\n");
        assert_eq!(typed::<TripleInput>(&t).unwrap_err().pointer.as_deref(), Some("/f"));
        let t = table("f = \"1\"\ng = \"z\"\nm = 2\nbogus = 1\n[domain.region]\nkind = \"disk\"\nradius = 1.0\n");
        assert!(typed::<TripleInput>(&t).unwrap_err().message.contains("bogus"));
    }

    #[test]
    fn overrides_land_in_the_table() {
        let mut t = table("m = 2\n");
        let o = Overrides { seed: Some(7), resolution: Some(50), bounded: Some(1.0), class: Some("minimal".into()) };
        o.apply(&mut t).unwrap();
        assert_eq!(t["seed"].as_integer(), Some(7));
        assert_eq!(t["resolution"].as_integer(), Some(50));
        assert_eq!(t["property"]["bounded"].as_float(), Some(1.0));
        assert_eq!(t["surface"]["class"].as_str(), Some("minimal"));
    }
}
