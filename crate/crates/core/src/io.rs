//! File formats: Matrix Market for matrices, CSV for nodal fields, and a
//! `key=value` sidecar describing sample runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::linalg::{SparseSymMatrix, TripletAccumulator};
use crate::mesh::{Mesh, Point};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse { line, msg: msg.into() }
}

pub const MATRIX_MARKET_HEADER: &str = "%%MatrixMarket matrix coordinate real symmetric";

/// Matrix Market coordinate text, lower triangle, 1-based indices, 17
/// significant digits.
pub fn write_matrix_market(a: &SparseSymMatrix) -> String {
    let mut out = String::new();
    writeln!(out, "{MATRIX_MARKET_HEADER}").unwrap();
    writeln!(out, "{} {} {}", a.dim(), a.dim(), a.nnz()).unwrap();
    // Upper (r, c) is lower (c, r); emit column-major over the lower part.
    let mut entries: Vec<_> = a.iter().collect();
    entries.sort_by_key(|&(r, c, _)| (r, c));
    for (r, c, v) in entries {
        writeln!(out, "{} {} {:.16e}", c + 1, r + 1, v).unwrap();
    }
    out
}

/// Parses a `real symmetric` Matrix Market coordinate file. Entries in
/// either triangle are accepted; duplicates are summed.
pub fn read_matrix_market(text: &str) -> Result<SparseSymMatrix, IoError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields != ["%%matrixmarket", "matrix", "coordinate", "real", "symmetric"] {
        return Err(parse_err(1, format!("unsupported header `{header}`")));
    }
    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (line, size) = body.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| parse_err(line, format!("bad size line `{size}`"))))
        .collect::<Result<_, _>>()?;
    let [rows, cols, nnz] = dims[..] else {
        return Err(parse_err(line, "size line needs three integers"));
    };
    if rows != cols {
        return Err(parse_err(line, format!("symmetric matrix must be square, got {rows}x{cols}")));
    }
    let mut acc = TripletAccumulator::with_capacity(rows, nnz);
    let mut seen = 0;
    for (line, l) in body {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(line, format!("expected `row col value`, found `{l}`")));
        }
        let idx = |s: &str| -> Result<usize, IoError> {
            match s.parse::<usize>() {
                Ok(i) if (1..=rows).contains(&i) => Ok(i - 1),
                _ => Err(parse_err(line, format!("index `{s}` outside 1..={rows}"))),
            }
        };
        let v: f64 = f[2].parse().map_err(|_| parse_err(line, format!("bad value `{}`", f[2])))?;
        acc.add(idx(f[0])?, idx(f[1])?, v);
        seen += 1;
    }
    if seen != nnz {
        return Err(parse_err(0, format!("header declares {nnz} entries, found {seen}")));
    }
    Ok(acc.finalize())
}

/// Nodal values as read from a field CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalValues {
    pub coords: Vec<Point>,
    pub values: Vec<f64>,
}

/// `node,x,y,value` CSV, one row per mesh node, 17 significant digits.
pub fn write_field_csv(mesh: &Mesh, values: &[f64]) -> Result<String, IoError> {
    assert_eq!(values.len(), mesh.node_count(), "one value per node");
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["node", "x", "y", "value"])?;
    for (i, (p, v)) in mesh.nodes().iter().zip(values).enumerate() {
        w.write_record([
            i.to_string(),
            format!("{:.16e}", p[0]),
            format!("{:.16e}", p[1]),
            format!("{v:.16e}"),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| IoError::Io { path: "<memory>".into(), source: e.into_error() })?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

pub fn read_field_csv(text: &str) -> Result<NodalValues, IoError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != ["node", "x", "y", "value"] {
        return Err(parse_err(1, format!("expected header `node,x,y,value`, found `{}`", header.join(","))));
    }
    let mut out = NodalValues { coords: Vec::new(), values: Vec::new() };
    for (row, record) in r.records().enumerate() {
        let record = record?;
        let line = row + 2;
        let num = |k: usize| -> Result<f64, IoError> {
            record
                .get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(line, format!("bad number in column {}", k + 1)))
        };
        let node: usize = record
            .get(0)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(line, "bad node index"))?;
        if node != row {
            return Err(parse_err(line, format!("expected node {row}, found {node}")));
        }
        out.coords.push([num(1)?, num(2)?]);
        out.values.push(num(3)?);
    }
    Ok(out)
}

/// Hex SHA-256 of the mesh's canonical text form.
pub fn mesh_hash(mesh: &Mesh) -> String {
    hex::encode(Sha256::digest(mesh.emit().as_bytes()))
}

/// Ordered `key=value` pairs, one per line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata(pub BTreeMap<String, String>);

impl Metadata {
    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_owned(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        let mut map = BTreeMap::new();
        for (i, l) in text.lines().enumerate() {
            if l.trim().is_empty() {
                continue;
            }
            let (k, v) = l.split_once('=').ok_or_else(|| parse_err(i + 1, format!("expected key=value, found `{l}`")))?;
            map.insert(k.trim().to_owned(), v.trim().to_owned());
        }
        Ok(Self(map))
    }
}

pub fn read_to_string(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Io { path: path.display().to_string(), source })
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), IoError> {
    let wrap = |source: std::io::Error| IoError::Io { path: path.display().to_string(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(wrap)?;
    tmp.write_all(contents.as_bytes()).map_err(wrap)?;
    tmp.as_file().sync_all().map_err(wrap)?;
    tmp.persist(path).map_err(|e| wrap(e.error))?;
    Ok(())
}
