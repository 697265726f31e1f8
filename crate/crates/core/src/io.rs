//! File formats: density configs, depth fields, point and graph tables.
//!
//! Every writer goes through a temporary file in the destination directory
//! and renames on success, so a failed run leaves no partial output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::density::{DensityModel, GaussianMixture, GridDensity, TruncatedPowerLaw, CYLINDER_PAD};
use crate::error::{Error, Result};
use crate::graph::{GraphDepth, WeightedGraph};
use crate::grid::{DepthField, GridSpec, Polyline};
use crate::points::PointCloud;

/// Writes `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Formats a depth with 12 significant digits.
pub fn format_depth(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        "inf".to_string()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Spacing {
    Uniform(f64),
    PerAxis(Vec<f64>),
}

/// JSON density description, discriminated by `kind`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum DensityConfig {
    GaussianMixture {
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        covs: Vec<Vec<Vec<f64>>>,
    },
    StandardGaussian {
        dim: usize,
    },
    UniformBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    UniformBall {
        center: Vec<f64>,
        radius: f64,
    },
    TruncatedPowerLaw {
        epsilon: f64,
        dim: usize,
    },
    CylinderSurface {
        #[serde(default)]
        pad: Option<f64>,
    },
    Grid {
        dims: Vec<usize>,
        origin: Vec<f64>,
        spacing: Spacing,
        /// Payload file relative to the header; `.csv` is read as a 2-D
        /// table, anything else as little-endian f64. Defaults to the
        /// sibling `.f64` file.
        #[serde(default)]
        payload: Option<String>,
        #[serde(default)]
        probability: bool,
    },
}

/// Parses a density JSON document. Grid payloads are resolved against `base`.
pub fn parse_density(json: &str, base: &Path, stem: &str) -> Result<DensityModel> {
    let cfg: DensityConfig = serde_json::from_str(json)?;
    match cfg {
        DensityConfig::GaussianMixture { weights, means, covs } => {
            Ok(DensityModel::GaussianMixture(GaussianMixture::new(weights, means, covs)?))
        }
        DensityConfig::StandardGaussian { dim } => {
            if dim == 0 {
                return Err(Error::InvalidModel("dimension must be positive".into()));
            }
            Ok(DensityModel::standard_gaussian(dim))
        }
        DensityConfig::UniformBox { lo, hi } => DensityModel::uniform_box(lo, hi),
        DensityConfig::UniformBall { center, radius } => DensityModel::uniform_ball(center, radius),
        DensityConfig::TruncatedPowerLaw { epsilon, dim } => {
            Ok(DensityModel::TruncatedPowerLaw(TruncatedPowerLaw::new(epsilon, dim)?))
        }
        DensityConfig::CylinderSurface { pad } => {
            let pad = pad.unwrap_or(CYLINDER_PAD);
            if !(pad >= 0.0) {
                return Err(Error::InvalidModel("cylinder pad must be nonnegative".into()));
            }
            Ok(DensityModel::CylinderSurface { pad })
        }
        DensityConfig::Grid { dims, origin, spacing, payload, probability } => {
            let spacing = match spacing {
                Spacing::Uniform(h) => vec![h; dims.len()],
                Spacing::PerAxis(v) => v,
            };
            let file = base.join(payload.unwrap_or_else(|| format!("{stem}.f64")));
            let values = if file.extension().is_some_and(|e| e == "csv") {
                read_csv_table(&file, &dims)?
            } else {
                read_f64_payload(&file)?
            };
            let g = GridDensity::new(dims, origin, spacing, values)?;
            Ok(DensityModel::Grid(if probability { g.into_probability()? } else { g }))
        }
    }
}

/// Reads a density JSON file.
pub fn read_density(path: &Path) -> Result<DensityModel> {
    let text = fs::read_to_string(path)?;
    let (base, stem) = split_path(path);
    parse_density(&text, &base, &stem)
}

fn split_path(path: &Path) -> (PathBuf, String) {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    (base, stem)
}

/// Writes a grid density as a JSON header plus a sibling `.f64` payload.
pub fn write_grid_density(path: &Path, density: &GridDensity) -> Result<()> {
    let (_, stem) = split_path(path);
    let payload = format!("{stem}.f64");
    write_atomic(&path.with_file_name(&payload), &f64_bytes(density.values()))?;
    let cfg = DensityConfig::Grid {
        dims: density.dims().to_vec(),
        origin: density.origin().to_vec(),
        spacing: Spacing::PerAxis(density.spacing().to_vec()),
        payload: Some(payload),
        probability: density.is_probability(),
    };
    write_atomic(path, serde_json::to_string_pretty(&cfg)?.as_bytes())
}

fn f64_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn read_f64_payload(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Format(format!("{}: length {} is not a multiple of 8", path.display(), bytes.len())));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect())
}

/// Header-less numeric CSV; row r holds the nodes with first index r.
fn read_csv_table(path: &Path, dims: &[usize]) -> Result<Vec<f64>> {
    if dims.len() != 2 {
        return Err(Error::Format("CSV grid payloads are 2-D only".into()));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    let mut values = Vec::with_capacity(dims[0] * dims[1]);
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != dims[1] {
            return Err(Error::Format(format!("row {r} has {} columns, expected {}", rec.len(), dims[1])));
        }
        for f in rec.iter() {
            values.push(parse_f64(f)?);
        }
    }
    Ok(values)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Format(format!("not a number: {s:?}")))
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldHeader {
    dims: Vec<usize>,
    origin: Vec<f64>,
    spacing: f64,
    payload: String,
}

/// Writes a depth field as a JSON header plus a sibling `.f64` payload.
pub fn write_depth_field(path: &Path, field: &DepthField) -> Result<()> {
    let (_, stem) = split_path(path);
    let payload = format!("{stem}.f64");
    write_atomic(&path.with_file_name(&payload), &f64_bytes(field.values()))?;
    let g = field.grid();
    let header = FieldHeader { dims: g.dims().to_vec(), origin: g.origin().to_vec(), spacing: g.spacing(), payload };
    write_atomic(path, serde_json::to_string_pretty(&header)?.as_bytes())
}

pub fn read_depth_field(path: &Path) -> Result<DepthField> {
    let header: FieldHeader = serde_json::from_str(&fs::read_to_string(path)?)?;
    let (base, _) = split_path(path);
    let values = read_f64_payload(&base.join(&header.payload))?;
    DepthField::new(GridSpec::new(header.dims, header.origin, header.spacing)?, values)
}

/// Points with optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTable {
    pub points: PointCloud,
    pub labels: Option<Vec<String>>,
}

/// Reads a points CSV with header `x0,x1,...` and an optional trailing
/// `label` column.
pub fn read_points(path: &Path) -> Result<PointTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header = rdr.headers()?.clone();
    let has_label = header.iter().next_back() == Some("label");
    let d = header.len() - usize::from(has_label);
    for (k, name) in header.iter().take(d).enumerate() {
        if name != format!("x{k}") {
            return Err(Error::Format(format!("column {k} is {name:?}, expected \"x{k}\"")));
        }
    }
    if d == 0 {
        return Err(Error::Format("points file has no coordinate columns".into()));
    }
    let mut points = PointCloud::new(d);
    let mut labels = Vec::new();
    let mut row = vec![0.0; d];
    for rec in rdr.records() {
        let rec = rec?;
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = parse_f64(&rec[k])?;
        }
        points.push(&row);
        if has_label {
            labels.push(rec[d].to_string());
        }
    }
    Ok(PointTable { points, labels: has_label.then_some(labels) })
}

pub fn write_points(path: &Path, points: &PointCloud, labels: Option<&[String]>) -> Result<()> {
    if labels.is_some_and(|l| l.len() != points.len()) {
        return Err(Error::InvalidParameter("one label per point required".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (0..points.dim()).map(|k| format!("x{k}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for (i, p) in points.iter().enumerate() {
        let mut rec: Vec<String> = p.iter().map(|v| format!("{v:.17e}")).collect();
        if let Some(l) = labels {
            rec.push(l[i].clone());
        }
        w.write_record(&rec)?;
    }
    write_atomic(path, &finish(w)?)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Reads the `i,j,w` edge list and the `i,rho,is_boundary` node table.
pub fn read_graph(edges: &Path, nodes: &Path) -> Result<WeightedGraph> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(nodes)?;
    let mut rho = Vec::new();
    let mut boundary = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(Error::Format(format!("node row {r}: expected i,rho,is_boundary")));
        }
        let i: usize = rec[0].parse().map_err(|_| Error::Format(format!("bad node index {:?}", &rec[0])))?;
        if i != r {
            return Err(Error::Format(format!("node rows must be listed in order; found {i} at row {r}")));
        }
        rho.push(parse_f64(&rec[1])?);
        boundary.push(match &rec[2] {
            "1" | "true" => true,
            "0" | "false" => false,
            other => return Err(Error::Format(format!("bad boundary flag {other:?}"))),
        });
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(edges)?;
    let mut list = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(Error::Format("edge rows must be i,j,w".into()));
        }
        let idx = |s: &str| s.parse::<usize>().map_err(|_| Error::Format(format!("bad node index {s:?}")));
        list.push((idx(&rec[0])?, idx(&rec[1])?, parse_f64(&rec[2])?));
    }
    let mut g = WeightedGraph::from_edges(rho.len(), &list)?;
    g.set_density(rho)?;
    g.set_boundary_mask(boundary)?;
    Ok(g)
}

pub fn write_graph(edges: &Path, nodes: &Path, graph: &WeightedGraph) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["i", "j", "w"])?;
    for (i, j, wt) in graph.edges() {
        w.write_record([i.to_string(), j.to_string(), format!("{wt:.17e}")])?;
    }
    let edge_bytes = finish(w)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["i", "rho", "is_boundary"])?;
    for (i, (r, b)) in graph.density().iter().zip(graph.boundary()).enumerate() {
        w.write_record([i.to_string(), format!("{r:.17e}"), u8::from(*b).to_string()])?;
    }
    write_atomic(edges, &edge_bytes)?;
    write_atomic(nodes, &finish(w)?)
}

/// Writes `i,depth,reached` for the given node order (all nodes if `None`).
pub fn write_graph_depth(path: &Path, depth: &GraphDepth, order: Option<&[usize]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["i", "depth", "reached"])?;
    let all: Vec<usize>;
    let order = match order {
        Some(o) => o,
        None => {
            all = (0..depth.len()).collect();
            &all
        }
    };
    for &i in order {
        w.write_record([i.to_string(), format_depth(depth.values[i]), u8::from(depth.reached[i]).to_string()])?;
    }
    write_atomic(path, &finish(w)?)
}

pub fn read_graph_depth(path: &Path) -> Result<Vec<(usize, f64, bool)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let i = rec[0].parse().map_err(|_| Error::Format(format!("bad node index {:?}", &rec[0])))?;
        let v = if &rec[1] == "inf" { f64::INFINITY } else { parse_f64(&rec[1])? };
        out.push((i, v, &rec[2] == "1"));
    }
    Ok(out)
}

/// Newline-separated or comma-separated node indices.
pub fn read_node_list(path: &Path) -> Result<Vec<usize>> {
    fs::read_to_string(path)?
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Format(format!("bad node index {s:?}"))))
        .collect()
}

/// Writes `level,polyline_id,x,y` rows; polyline ids are global across
/// levels.
pub fn write_contours(path: &Path, families: &[(f64, Vec<Polyline>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["level", "polyline_id", "x", "y"])?;
    let mut id = 0usize;
    for (level, lines) in families {
        for line in lines {
            for p in &line.points {
                w.write_record([level.to_string(), id.to_string(), format_depth(p[0]), format_depth(p[1])])?;
            }
            id += 1;
        }
    }
    write_atomic(path, &finish(w)?)
}
