//! Topic model parameters Θ (documents × topics) and Φ (topics × terms).

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Tolerance on row sums of a stochastic matrix.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_vec(n, cols, rows.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    /// Checks that entries are finite, non-negative and that every row sums to one.
    pub fn check_row_stochastic(&self, name: &str) -> Result<()> {
        for (r, row) in self.iter_rows().enumerate() {
            if let Some(x) = row.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(Error::InvalidConfig(format!("{name} row {r} has invalid entry {x}")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidConfig(format!("{name} row {r} sums to {s}, not 1")));
            }
        }
        Ok(())
    }

    /// Returns a copy with columns reordered so new column `j` is old column `order[j]`.
    pub fn permute_cols(&self, order: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, order.len());
        for r in 0..self.rows {
            let src = self.row(r);
            for (dst, &c) in out.row_mut(r).iter_mut().zip(order) {
                *dst = src[c];
            }
        }
        out
    }

    /// Returns a copy with rows reordered so new row `i` is old row `order[i]`.
    pub fn permute_rows(&self, order: &[usize]) -> Matrix {
        let data = order.iter().flat_map(|&r| self.row(r).iter().copied()).collect();
        Matrix {
            rows: order.len(),
            cols: self.cols,
            data,
        }
    }
}

/// A fitted or ground-truth topic model.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub theta: Matrix,
    pub phi: Matrix,
}

impl TopicModel {
    /// Builds a model, checking shapes and row-stochasticity of both matrices.
    pub fn new(theta: Matrix, phi: Matrix) -> Result<Self> {
        if theta.cols() != phi.rows() {
            return Err(Error::DimensionMismatch(format!(
                "theta has {} topics but phi has {}",
                theta.cols(),
                phi.rows()
            )));
        }
        if theta.cols() == 0 || phi.cols() == 0 || theta.rows() == 0 {
            return Err(Error::DimensionMismatch("empty model".into()));
        }
        theta.check_row_stochastic("theta")?;
        phi.check_row_stochastic("phi")?;
        Ok(Self { theta, phi })
    }

    pub fn num_topics(&self) -> usize {
        self.phi.rows()
    }

    pub fn num_docs(&self) -> usize {
        self.theta.rows()
    }

    pub fn num_terms(&self) -> usize {
        self.phi.cols()
    }
}

/// Default topic labels `topic_1..topic_K`.
pub fn topic_labels(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("topic_{i}")).collect()
}

/// A labelled dense CSV table: header is `first_header,col...`, each row `label,values...`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub matrix: Matrix,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn split_csv_line(line: &str) -> std::result::Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars().peekable();
    let mut quoted = false;
    while let Some(c) = chars.next() {
        match (quoted, c) {
            (true, '"') if chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            (true, '"') => quoted = false,
            (true, c) => cur.push(c),
            (false, '"') if cur.is_empty() => quoted = true,
            (false, ',') => out.push(std::mem::take(&mut cur)),
            (false, c) => cur.push(c),
        }
    }
    if quoted {
        return Err("unterminated quote".into());
    }
    out.push(cur);
    Ok(out)
}

/// Writes a labelled matrix as CSV. Values use Rust's shortest round-trip formatting.
pub fn write_matrix_csv<W: Write>(m: &LabeledMatrix, corner: &str, mut out: W) -> std::io::Result<()> {
    write!(out, "{}", csv_field(corner))?;
    for c in &m.col_labels {
        write!(out, ",{}", csv_field(c))?;
    }
    writeln!(out)?;
    for (label, row) in m.row_labels.iter().zip(m.matrix.iter_rows()) {
        write!(out, "{}", csv_field(label))?;
        for x in row {
            write!(out, ",{x}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn parse_matrix_csv(text: &str, origin: impl AsRef<Path>) -> Result<LabeledMatrix> {
    let origin = origin.as_ref();
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::parse(origin, 1, "missing header row"))?;
    let header = split_csv_line(header).map_err(|e| Error::parse(origin, 1, e))?;
    let col_labels: Vec<String> = header[1..].to_vec();
    if col_labels.is_empty() {
        return Err(Error::parse(origin, 1, "header has no value columns"));
    }
    let mut row_labels = Vec::new();
    let mut data = Vec::new();
    for (i, line) in lines {
        let fields = split_csv_line(line).map_err(|e| Error::parse(origin, i + 1, e))?;
        if fields.len() != col_labels.len() + 1 {
            return Err(Error::parse(
                origin,
                i + 1,
                format!("expected {} fields, found {}", col_labels.len() + 1, fields.len()),
            ));
        }
        row_labels.push(fields[0].clone());
        for f in &fields[1..] {
            let x: f64 = f
                .trim()
                .parse()
                .map_err(|_| Error::parse(origin, i + 1, format!("malformed number {f:?}")))?;
            data.push(x);
        }
    }
    let matrix = Matrix::from_vec(row_labels.len(), col_labels.len(), data)?;
    Ok(LabeledMatrix {
        row_labels,
        col_labels,
        matrix,
    })
}

pub fn load_matrix_csv(path: impl AsRef<Path>) -> Result<LabeledMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_csv(&text, path)
}

pub fn save_matrix_csv(m: &LabeledMatrix, corner: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_matrix_csv(m, corner, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// Θ as CSV: one row per document id, one column per topic.
pub fn save_theta(model: &TopicModel, doc_ids: &[String], path: impl AsRef<Path>) -> Result<()> {
    let m = LabeledMatrix {
        row_labels: doc_ids.to_vec(),
        col_labels: topic_labels(model.num_topics()),
        matrix: model.theta.clone(),
    };
    save_matrix_csv(&m, "doc_id", path)
}

/// Φ as CSV: one row per topic, one column per term.
pub fn save_phi(model: &TopicModel, vocabulary: &[String], path: impl AsRef<Path>) -> Result<()> {
    let m = LabeledMatrix {
        row_labels: topic_labels(model.num_topics()),
        col_labels: vocabulary.to_vec(),
        matrix: model.phi.clone(),
    };
    save_matrix_csv(&m, "topic", path)
}

/// Loads Θ and Φ CSVs and aligns them to a corpus: Θ rows are matched to
/// document ids and Φ columns to vocabulary terms, by label.
pub fn load_model_for(
    doc_ids: &[String],
    vocabulary: &[String],
    theta_path: impl AsRef<Path>,
    phi_path: impl AsRef<Path>,
) -> Result<TopicModel> {
    let theta_path = theta_path.as_ref();
    let phi_path = phi_path.as_ref();
    let theta = load_matrix_csv(theta_path)?;
    let phi = load_matrix_csv(phi_path)?;
    let theta_order = align(&theta.row_labels, doc_ids, "document", theta_path)?;
    let phi_order = align(&phi.col_labels, vocabulary, "term", phi_path)?;
    if theta.matrix.cols() != phi.matrix.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} has {} topic columns but {} has {} topic rows",
            theta_path.display(),
            theta.matrix.cols(),
            phi_path.display(),
            phi.matrix.rows()
        )));
    }
    TopicModel::new(theta.matrix.permute_rows(&theta_order), phi.matrix.permute_cols(&phi_order))
}

/// For each wanted label, its position among `have`.
fn align(have: &[String], wanted: &[String], what: &str, origin: &Path) -> Result<Vec<usize>> {
    if have.len() != wanted.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} has {} {what} labels but the corpus has {}",
            origin.display(),
            have.len(),
            wanted.len()
        )));
    }
    let index: std::collections::HashMap<&str, usize> =
        have.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    if index.len() != have.len() {
        return Err(Error::InvalidCorpus(format!("{}: duplicate {what} labels", origin.display())));
    }
    wanted
        .iter()
        .map(|w| {
            index.get(w.as_str()).copied().ok_or_else(|| {
                Error::DimensionMismatch(format!("{}: no {what} labelled {w:?}", origin.display()))
            })
        })
        .collect()
}
