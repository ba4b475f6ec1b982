//! Text formats: Matrix Market (complex, general), vector CSV, and the
//! deterministic number formatting shared by every CSV and JSON writer.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexVec, DenseMatrix, SpectralForm, C64};

/// Largest matrix dimension the Matrix Market reader accepts.
pub const MAX_MATRIX_DIM: usize = 2048;

/// Scientific notation with 17 significant digits; round-trips every finite `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // normalize -0.0 so identical runs print identically
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

/// [`fmt_f64`] for finite values, `null` otherwise.
pub fn json_number(x: f64) -> String {
    if x.is_finite() {
        fmt_f64(x)
    } else {
        "null".to_string()
    }
}

pub fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

pub fn json_complex(z: C64) -> String {
    format!(
        "{{\"re\":{},\"im\":{}}}",
        json_number(z.re),
        json_number(z.im)
    )
}

/// Builds a JSON object with fields in insertion order.
#[derive(Default)]
pub struct JsonObject {
    fields: Vec<(String, String)>,
}

impl JsonObject {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn raw(mut self, key: &str, value: impl Into<String>) -> Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    pub fn number(self, key: &str, x: f64) -> Self {
        self.raw(key, json_number(x))
    }

    pub fn opt_number(self, key: &str, x: Option<f64>) -> Self {
        self.raw(key, x.map_or_else(|| "null".to_string(), json_number))
    }

    pub fn integer(self, key: &str, n: i64) -> Self {
        self.raw(key, n.to_string())
    }

    pub fn string(self, key: &str, s: &str) -> Self {
        self.raw(key, json_string(s))
    }

    pub fn complex(self, key: &str, z: C64) -> Self {
        self.raw(key, json_complex(z))
    }

    pub fn boolean(self, key: &str, b: bool) -> Self {
        self.raw(key, if b { "true" } else { "false" })
    }

    pub fn finish(self) -> String {
        let mut out = String::from("{");
        for (i, (k, v)) in self.fields.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&json_string(k));
            out.push(':');
            out.push_str(v);
        }
        out.push('}');
        out
    }
}

pub fn json_array(items: impl IntoIterator<Item = String>) -> String {
    let items: Vec<String> = items.into_iter().collect();
    format!("[{}]", items.join(","))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixMarketLayout {
    Coordinate,
    Array,
}

fn format_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Format {
        line,
        msg: msg.into(),
    }
}

/// Reads a square complex matrix from Matrix Market text.
///
/// Accepts `%%MatrixMarket matrix coordinate complex general` (1-based
/// `i j re im` entries, unlisted entries zero) and
/// `%%MatrixMarket matrix array complex general` (column-major `re im`).
pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| format_err(1, "empty input: missing %%MatrixMarket header"))?;
    let layout = parse_header(header)?;

    let mut content = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size_text) = content
        .next()
        .ok_or_else(|| format_err(1, "missing size line"))?;
    let sizes: Vec<&str> = size_text.split_whitespace().collect();
    let expected_fields = if layout == MatrixMarketLayout::Coordinate {
        3
    } else {
        2
    };
    if sizes.len() != expected_fields {
        return Err(format_err(
            size_line,
            format!("size line must have {expected_fields} integers"),
        ));
    }
    let parse_usize = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| format_err(size_line, format!("invalid integer `{s}` in size line")))
    };
    let rows = parse_usize(sizes[0])?;
    let cols = parse_usize(sizes[1])?;
    if rows != cols {
        return Err(format_err(
            size_line,
            format!("matrix must be square, got {rows}x{cols}"),
        ));
    }
    if rows == 0 {
        return Err(format_err(size_line, "matrix dimension must be positive"));
    }
    if rows > MAX_MATRIX_DIM {
        return Err(format_err(
            size_line,
            format!("dimension {rows} exceeds the supported maximum {MAX_MATRIX_DIM}"),
        ));
    }
    let n = rows;
    let mut m = DenseMatrix::zeros(n);

    match layout {
        MatrixMarketLayout::Coordinate => {
            let nnz = parse_usize(sizes[2])?;
            if nnz > n * n {
                return Err(format_err(
                    size_line,
                    format!("{nnz} entries exceed the {n}x{n} matrix size"),
                ));
            }
            let mut seen = vec![false; n * n];
            let mut count = 0usize;
            for (line_no, line) in content {
                if count == nnz {
                    return Err(format_err(line_no, "more entries than declared"));
                }
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() != 4 {
                    return Err(format_err(line_no, "coordinate entry must be `i j re im`"));
                }
                let idx = |s: &str| -> Result<usize> {
                    let v: usize = s
                        .parse()
                        .map_err(|_| format_err(line_no, format!("invalid index `{s}`")))?;
                    if v == 0 || v > n {
                        return Err(format_err(
                            line_no,
                            format!("index {v} out of range 1..={n}"),
                        ));
                    }
                    Ok(v - 1)
                };
                let (i, j) = (idx(f[0])?, idx(f[1])?);
                let z = parse_complex(f[2], f[3], line_no)?;
                if std::mem::replace(&mut seen[i * n + j], true) {
                    return Err(format_err(
                        line_no,
                        format!("duplicate entry ({}, {})", i + 1, j + 1),
                    ));
                }
                m.set(i, j, z);
                count += 1;
            }
            if count != nnz {
                return Err(format_err(
                    text.lines().count(),
                    format!("expected {nnz} entries, found {count}"),
                ));
            }
        }
        MatrixMarketLayout::Array => {
            let mut count = 0usize;
            for (line_no, line) in content {
                if count == n * n {
                    return Err(format_err(line_no, "more entries than declared"));
                }
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() != 2 {
                    return Err(format_err(line_no, "array entry must be `re im`"));
                }
                let z = parse_complex(f[0], f[1], line_no)?;
                // column-major
                m.set(count % n, count / n, z);
                count += 1;
            }
            if count != n * n {
                return Err(format_err(
                    text.lines().count(),
                    format!("expected {} entries, found {count}", n * n),
                ));
            }
        }
    }
    Ok(m)
}

fn parse_header(header: &str) -> Result<MatrixMarketLayout> {
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(format_err(1, "header must start with %%MatrixMarket"));
    }
    if tokens.len() != 5 {
        return Err(format_err(
            1,
            "header must be `%%MatrixMarket matrix <coordinate|array> complex general`",
        ));
    }
    if tokens[1] != "matrix" {
        return Err(format_err(1, format!("unsupported object `{}`", tokens[1])));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => MatrixMarketLayout::Coordinate,
        "array" => MatrixMarketLayout::Array,
        other => return Err(format_err(1, format!("unsupported format `{other}`"))),
    };
    if tokens[3] != "complex" {
        return Err(format_err(
            1,
            format!(
                "unsupported field `{}`: only complex matrices are accepted",
                tokens[3]
            ),
        ));
    }
    if tokens[4] != "general" {
        return Err(format_err(
            1,
            format!(
                "unsupported symmetry `{}`: only general is accepted",
                tokens[4]
            ),
        ));
    }
    Ok(layout)
}

fn parse_complex(re: &str, im: &str, line: usize) -> Result<C64> {
    let p = |s: &str| -> Result<f64> {
        let v: f64 = s
            .parse()
            .map_err(|_| format_err(line, format!("invalid number `{s}`")))?;
        if !v.is_finite() {
            return Err(format_err(line, format!("non-finite value `{s}`")));
        }
        Ok(v)
    };
    Ok(C64::new(p(re)?, p(im)?))
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_matrix_market(&std::fs::read_to_string(path)?)
}

pub fn write_matrix_market(m: &DenseMatrix, layout: MatrixMarketLayout) -> String {
    let n = m.dim();
    let mut out = String::new();
    match layout {
        MatrixMarketLayout::Coordinate => {
            let entries: Vec<(usize, usize, C64)> = (0..n)
                .flat_map(|j| (0..n).map(move |i| (i, j)))
                .map(|(i, j)| (i, j, m.get(i, j)))
                .filter(|(_, _, z)| *z != C64::new(0.0, 0.0))
                .collect();
            out.push_str("%%MatrixMarket matrix coordinate complex general\n");
            let _ = writeln!(out, "{n} {n} {}", entries.len());
            for (i, j, z) in entries {
                let _ = writeln!(
                    out,
                    "{} {} {} {}",
                    i + 1,
                    j + 1,
                    fmt_f64(z.re),
                    fmt_f64(z.im)
                );
            }
        }
        MatrixMarketLayout::Array => {
            out.push_str("%%MatrixMarket matrix array complex general\n");
            let _ = writeln!(out, "{n} {n}");
            for j in 0..n {
                for i in 0..n {
                    let z = m.get(i, j);
                    let _ = writeln!(out, "{} {}", fmt_f64(z.re), fmt_f64(z.im));
                }
            }
        }
    }
    out
}

/// One `re,im` pair per line; blank lines and `#` comments are skipped.
pub fn parse_vector_csv(text: &str) -> Result<ComplexVec> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut parts = t.split(',');
        let (Some(re), Some(im), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(format_err(line_no, format!("expected `re,im`, got `{t}`")));
        };
        entries.push(parse_complex(re.trim(), im.trim(), line_no)?);
    }
    if entries.is_empty() {
        return Err(format_err(0, "vector file has no entries"));
    }
    ComplexVec::new(entries)
}

pub fn read_vector_csv(path: impl AsRef<Path>) -> Result<ComplexVec> {
    parse_vector_csv(&std::fs::read_to_string(path)?)
}

pub fn write_vector_csv(v: &ComplexVec) -> String {
    let mut out = String::new();
    for z in v.entries() {
        let _ = writeln!(out, "{},{}", fmt_f64(z.re), fmt_f64(z.im));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct SpectralFormJson {
    dim: usize,
    phases: Vec<f64>,
    /// Column-major `[re, im]` pairs.
    vectors: Vec<[f64; 2]>,
}

/// `{"dim":d,"phases":[...],"vectors":[[re,im],...]}` with `V` column-major.
pub fn spectral_form_to_json(s: &SpectralForm) -> String {
    let n = s.dim();
    let v = s.vectors();
    JsonObject::new()
        .integer("dim", n as i64)
        .raw(
            "phases",
            json_array(s.phases().iter().map(|&t| json_number(t))),
        )
        .raw(
            "vectors",
            json_array(
                (0..n)
                    .flat_map(|j| (0..n).map(move |i| (i, j)))
                    .map(|(i, j)| {
                        let z = v.get(i, j);
                        format!("[{},{}]", json_number(z.re), json_number(z.im))
                    }),
            ),
        )
        .finish()
}

pub fn spectral_form_from_json(text: &str) -> Result<SpectralForm> {
    let raw: SpectralFormJson = serde_json::from_str(text)
        .map_err(|e| format_err(e.line(), format!("invalid spectral form JSON: {e}")))?;
    let n = raw.dim;
    if n == 0 || n > MAX_MATRIX_DIM || raw.phases.len() != n || raw.vectors.len() != n * n {
        return Err(format_err(0, "spectral form sizes are inconsistent"));
    }
    let mut v = DenseMatrix::zeros(n);
    for (idx, [re, im]) in raw.vectors.into_iter().enumerate() {
        v.set(idx % n, idx / n, C64::new(re, im));
    }
    if !v.is_finite() {
        return Err(Error::NonFinite("spectral form vectors"));
    }
    SpectralForm::new(raw.phases, v)
}
