//! File formats: point CSVs (optional leading `w` weight column), assignment
//! CSVs and instance metadata JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::points::{CenterSet, Dataset, Objective};

/// Rows and optional weights read from a points CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct PointsTable {
    pub rows: Vec<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
}

fn parse_float(field: &str, location: impl FnOnce() -> String) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::parse(location(), format!("`{field}`: {e}")))
}

/// Parses a points CSV. A header row is optional when there is no weight
/// column; a first header field named `w` marks the weight column.
pub fn parse_points(text: &str, source: &str) -> Result<PointsTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut weights = Vec::new();
    let mut weighted = false;
    let mut first = true;
    for (line_idx, rec) in reader.records().enumerate() {
        let line = line_idx + 1;
        let rec = rec.map_err(|e| Error::parse(format!("{source}:{line}"), e.to_string()))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if first {
            first = false;
            let numeric = rec.iter().all(|f| f.parse::<f64>().is_ok());
            if !numeric {
                weighted = rec.get(0) == Some("w");
                continue;
            }
        }
        let mut values = Vec::with_capacity(rec.len());
        for (col, f) in rec.iter().enumerate() {
            values.push(parse_float(f, || format!("{source}:{line}:{}", col + 1))?);
        }
        if weighted {
            if values.len() < 2 {
                return Err(Error::parse(format!("{source}:{line}"), "weight column without coordinates"));
            }
            weights.push(values.remove(0));
        }
        rows.push(values);
    }
    Ok(PointsTable {
        rows,
        weights: weighted.then_some(weights),
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let table = parse_points(&read_text(path)?, &path.display().to_string())?;
    Dataset::new(table.rows, table.weights)
}

/// Reads centers; a weight column, if present, is ignored.
pub fn read_centers(path: &Path) -> Result<CenterSet> {
    let table = parse_points(&read_text(path)?, &path.display().to_string())?;
    CenterSet::new(table.rows)
}

fn header(dim: usize, weighted: bool) -> String {
    let mut cols: Vec<String> = Vec::with_capacity(dim + 1);
    if weighted {
        cols.push("w".into());
    }
    cols.extend((0..dim).map(|j| format!("x{j}")));
    cols.join(",")
}

fn push_row(out: &mut String, values: impl Iterator<Item = f64>) {
    let mut sep = "";
    for v in values {
        out.push_str(sep);
        out.push_str(&v.to_string());
        sep = ",";
    }
    out.push('\n');
}

/// Dataset CSV with a `w` column.
pub fn format_dataset(data: &Dataset) -> String {
    let mut out = header(data.dim(), true);
    out.push('\n');
    for (x, w) in data.iter() {
        push_row(&mut out, std::iter::once(w).chain(x.iter().copied()));
    }
    out
}

pub fn format_centers(centers: &CenterSet) -> String {
    let mut out = header(centers.dim(), false);
    out.push('\n');
    for c in centers.iter() {
        push_row(&mut out, c.iter().copied());
    }
    out
}

pub fn format_assignment(assignment: &[usize]) -> String {
    let mut out = String::from("center\n");
    for a in assignment {
        out.push_str(&a.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_assignment(text: &str, source: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (idx == 0 && line.parse::<usize>().is_err() && !line.starts_with('-')) {
            continue;
        }
        out.push(
            line.parse::<usize>()
                .map_err(|e| Error::parse(format!("{source}:{}", idx + 1), format!("`{line}`: {e}")))?,
        );
    }
    Ok(out)
}

/// Instance metadata written next to the CSV files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub kind: String,
    pub k: usize,
    pub d: usize,
    pub n: usize,
    pub eps: Option<f64>,
    pub known_opt: Option<f64>,
    pub objective: Objective,
    pub seed: Option<u64>,
}

impl InstanceMeta {
    pub fn of(inst: &Instance, kind: &str, seed: Option<u64>) -> Self {
        InstanceMeta {
            kind: kind.to_string(),
            k: inst.k(),
            d: inst.dim(),
            n: inst.data.len(),
            eps: inst.eps,
            known_opt: inst.known_opt,
            objective: inst.objective,
            seed,
        }
    }
}

/// Paths of the four files making up an instance directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstancePaths {
    pub data: PathBuf,
    pub centers: PathBuf,
    pub assignment: PathBuf,
    pub meta: PathBuf,
}

impl InstancePaths {
    pub fn in_dir(dir: &Path) -> Self {
        InstancePaths {
            data: dir.join("data.csv"),
            centers: dir.join("centers.csv"),
            assignment: dir.join("assignment.csv"),
            meta: dir.join("meta.json"),
        }
    }
}

pub fn write_instance(dir: &Path, inst: &Instance, meta: &InstanceMeta) -> Result<InstancePaths> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let paths = InstancePaths::in_dir(dir);
    let write = |p: &Path, s: String| fs::write(p, s).map_err(|e| Error::Io(format!("{}: {e}", p.display())));
    write(&paths.data, format_dataset(&inst.data))?;
    write(&paths.centers, format_centers(&inst.centers))?;
    write(&paths.assignment, format_assignment(&inst.assignment))?;
    write(&paths.meta, serde_json::to_string_pretty(meta).expect("metadata serializes") + "\n")?;
    Ok(paths)
}

pub fn read_meta(path: &Path) -> Result<InstanceMeta> {
    serde_json::from_str(&read_text(path)?).map_err(|e| {
        Error::parse(
            format!("{}:{}:{}", path.display(), e.line(), e.column()),
            e.to_string(),
        )
    })
}

pub fn read_instance(dir: &Path) -> Result<(Instance, InstanceMeta)> {
    let paths = InstancePaths::in_dir(dir);
    let meta = read_meta(&paths.meta)?;
    let data = read_dataset(&paths.data)?;
    let centers = read_centers(&paths.centers)?;
    let assignment = parse_assignment(&read_text(&paths.assignment)?, &paths.assignment.display().to_string())?;
    Ok((
        Instance {
            data,
            centers,
            assignment,
            known_opt: meta.known_opt,
            objective: meta.objective,
            eps: meta.eps,
        },
        meta,
    ))
}
