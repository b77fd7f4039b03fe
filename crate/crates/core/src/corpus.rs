//! Sparse document-term matrix, text ingestion and the triplet file format.
//!
//! Rows are documents, columns are vocabulary terms. Storage is compressed
//! sparse rows with column indices sorted within each row; structural zeros
//! are never stored.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Snowball English stopword list, one token per line.
pub const DEFAULT_STOPWORDS: &str = include_str!("../data/snowball_english.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentTermMatrix {
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<u32>,
    doc_ids: Vec<String>,
    vocabulary: Vec<String>,
    doc_lengths: Vec<u64>,
}

impl DocumentTermMatrix {
    /// Builds a matrix from per-document `(term index, count)` lists.
    ///
    /// Zero counts are dropped. Duplicate term indices within a row, empty
    /// rows, out-of-range terms and duplicate or empty vocabulary entries are
    /// rejected.
    pub fn from_rows(
        doc_ids: Vec<String>,
        vocabulary: Vec<String>,
        rows: Vec<Vec<(u32, u32)>>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::NoDocuments);
        }
        if doc_ids.len() != rows.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} document ids for {} rows",
                doc_ids.len(),
                rows.len()
            )));
        }
        if vocabulary.is_empty() {
            return Err(Error::InvalidCorpus("empty vocabulary".into()));
        }
        let mut seen = HashSet::with_capacity(vocabulary.len());
        for term in &vocabulary {
            if term.is_empty() {
                return Err(Error::InvalidCorpus("empty vocabulary entry".into()));
            }
            if !seen.insert(term.as_str()) {
                return Err(Error::InvalidCorpus(format!("duplicate vocabulary entry {term:?}")));
            }
        }

        let v = vocabulary.len();
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut doc_lengths = Vec::with_capacity(rows.len());
        row_ptr.push(0);
        for (d, mut row) in rows.into_iter().enumerate() {
            row.retain(|&(_, c)| c > 0);
            row.sort_unstable_by_key(|&(t, _)| t);
            let mut len = 0u64;
            for (i, &(t, c)) in row.iter().enumerate() {
                if t as usize >= v {
                    return Err(Error::InvalidCorpus(format!(
                        "document {:?}: term index {t} out of range for vocabulary of {v}",
                        doc_ids[d]
                    )));
                }
                if i > 0 && row[i - 1].0 == t {
                    return Err(Error::InvalidCorpus(format!(
                        "document {:?}: duplicate term {:?}",
                        doc_ids[d], vocabulary[t as usize]
                    )));
                }
                col_idx.push(t);
                values.push(c);
                len += u64::from(c);
            }
            if len == 0 {
                return Err(Error::InvalidCorpus(format!("document {:?} is empty", doc_ids[d])));
            }
            doc_lengths.push(len);
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            row_ptr,
            col_idx,
            values,
            doc_ids,
            vocabulary,
            doc_lengths,
        })
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn num_terms(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    /// Document lengths n_d.
    pub fn doc_lengths(&self) -> &[u64] {
        &self.doc_lengths
    }

    pub fn total_tokens(&self) -> u64 {
        self.doc_lengths.iter().sum()
    }

    /// Sparse row `d` as parallel slices of term indices and counts.
    pub fn row(&self, d: usize) -> (&[u32], &[u32]) {
        let (lo, hi) = (self.row_ptr[d], self.row_ptr[d + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn row_iter(&self, d: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let (terms, counts) = self.row(d);
        terms.iter().zip(counts).map(|(&t, &c)| (t as usize, c))
    }

    pub fn get(&self, d: usize, v: usize) -> u32 {
        let (terms, counts) = self.row(d);
        match terms.binary_search(&(v as u32)) {
            Ok(i) => counts[i],
            Err(_) => 0,
        }
    }

    /// Number of stored (non-zero) entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Dense copy of row `d`.
    pub fn dense_row(&self, d: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.num_terms()];
        for (v, c) in self.row_iter(d) {
            out[v] = f64::from(c);
        }
        out
    }

    /// Aggregate count of each term over all documents.
    pub fn term_totals(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.num_terms()];
        for (&t, &c) in self.col_idx.iter().zip(&self.values) {
            totals[t as usize] += u64::from(c);
        }
        totals
    }

    /// Returns a copy with rows reordered so that new row `i` is old row `order[i]`.
    pub fn permute_docs(&self, order: &[usize]) -> Result<Self> {
        check_permutation(order, self.num_docs())?;
        let ids = order.iter().map(|&d| self.doc_ids[d].clone()).collect();
        let rows = order
            .iter()
            .map(|&d| {
                let (t, c) = self.row(d);
                t.iter().copied().zip(c.iter().copied()).collect()
            })
            .collect();
        Self::from_rows(ids, self.vocabulary.clone(), rows)
    }

    /// Returns a copy with columns reordered so that new column `j` is old
    /// column `order[j]`.
    pub fn permute_terms(&self, order: &[usize]) -> Result<Self> {
        check_permutation(order, self.num_terms())?;
        let mut inverse = vec![0u32; order.len()];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new as u32;
        }
        let vocab = order.iter().map(|&v| self.vocabulary[v].clone()).collect();
        let rows = (0..self.num_docs())
            .map(|d| self.row_iter(d).map(|(v, c)| (inverse[v], c)).collect())
            .collect();
        Self::from_rows(self.doc_ids.clone(), vocab, rows)
    }
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    let mut hit = vec![false; n];
    if order.len() != n {
        return Err(Error::DimensionMismatch(format!("permutation of length {} for {n} items", order.len())));
    }
    for &i in order {
        if i >= n || std::mem::replace(&mut hit[i], true) {
            return Err(Error::InvalidConfig("not a permutation".into()));
        }
    }
    Ok(())
}

/// Mean document vector ȳ, with ȳ_v = (1/D) Σ_d counts[d, v].
pub fn mean_document(dtm: &DocumentTermMatrix) -> Vec<f64> {
    let d = dtm.num_docs() as f64;
    dtm.term_totals().into_iter().map(|c| c as f64 / d).collect()
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub stopwords: HashSet<String>,
    pub min_doc_frequency: usize,
    pub lowercase: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            stopwords: parse_stopwords(DEFAULT_STOPWORDS),
            min_doc_frequency: 2,
            lowercase: true,
        }
    }
}

impl IngestOptions {
    pub fn validate(&self) -> Result<()> {
        if self.min_doc_frequency < 1 {
            return Err(Error::InvalidConfig("min_doc_frequency must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parses a stopword list: one token per line, blank lines and `#` comments ignored.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

pub fn load_stopwords(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&text))
}

/// Splits on maximal runs of non-alphanumeric characters.
pub fn tokenize(text: &str, lowercase: bool) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| if lowercase { t.to_lowercase() } else { t.to_owned() })
        .collect()
}

/// Result of [`build_dtm`].
#[derive(Debug, Clone)]
pub struct Ingested {
    pub dtm: DocumentTermMatrix,
    /// Ids of documents dropped because nothing survived filtering.
    pub dropped_docs: Vec<String>,
}

/// Builds a DTM from raw texts: tokenize, drop stopwords, count unigrams,
/// drop terms seen in fewer than `min_doc_frequency` documents, then drop
/// documents left empty.
pub fn build_dtm<S, T>(documents: &[(S, T)], options: &IngestOptions) -> Result<Ingested>
where
    S: AsRef<str>,
    T: AsRef<str>,
{
    options.validate()?;
    if documents.is_empty() {
        return Err(Error::NoDocuments);
    }

    let mut term_index: HashMap<String, u32> = HashMap::new();
    let mut vocab: Vec<String> = Vec::new();
    let mut doc_freq: Vec<usize> = Vec::new();
    let mut counted: Vec<Vec<(u32, u32)>> = Vec::with_capacity(documents.len());

    for (_, text) in documents {
        let mut counts: Vec<(u32, u32)> = Vec::new();
        let mut slot: HashMap<u32, usize> = HashMap::new();
        for token in tokenize(text.as_ref(), options.lowercase) {
            if options.stopwords.contains(&token) {
                continue;
            }
            let t = match term_index.get(&token) {
                Some(&t) => t,
                None => {
                    let t = vocab.len() as u32;
                    term_index.insert(token.clone(), t);
                    vocab.push(token);
                    doc_freq.push(0);
                    t
                }
            };
            match slot.get(&t) {
                Some(&i) => counts[i].1 += 1,
                None => {
                    slot.insert(t, counts.len());
                    counts.push((t, 1));
                    doc_freq[t as usize] += 1;
                }
            }
        }
        counted.push(counts);
    }

    // Surviving terms keep first-appearance order.
    let mut remap = vec![u32::MAX; vocab.len()];
    let mut kept_vocab = Vec::new();
    for (t, term) in vocab.into_iter().enumerate() {
        if doc_freq[t] >= options.min_doc_frequency {
            remap[t] = kept_vocab.len() as u32;
            kept_vocab.push(term);
        }
    }

    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut dropped_docs = Vec::new();
    for ((id, _), counts) in documents.iter().zip(counted) {
        let row: Vec<(u32, u32)> = counts
            .into_iter()
            .filter_map(|(t, c)| {
                let t = remap[t as usize];
                (t != u32::MAX).then_some((t, c))
            })
            .collect();
        if row.is_empty() {
            dropped_docs.push(id.as_ref().to_owned());
        } else {
            ids.push(id.as_ref().to_owned());
            rows.push(row);
        }
    }
    if rows.is_empty() {
        return Err(Error::AllDocumentsEmpty);
    }
    if !dropped_docs.is_empty() {
        log::warn!("dropped {} documents left empty after filtering", dropped_docs.len());
    }
    let dtm = DocumentTermMatrix::from_rows(ids, kept_vocab, rows)?;
    Ok(Ingested { dtm, dropped_docs })
}

/// Reads `(id, text)` pairs, one per line as `id<TAB>text`.
pub fn load_documents(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, body) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, i + 1, "expected id<TAB>text"))?;
        if id.is_empty() {
            return Err(Error::parse(path, i + 1, "empty document id"));
        }
        docs.push((id.to_owned(), body.to_owned()));
    }
    Ok(docs)
}

/// Parses the sparse triplet format `doc_id<TAB>term<TAB>count`.
///
/// `origin` labels error messages.
pub fn parse_dtm(text: &str, origin: impl AsRef<Path>) -> Result<DocumentTermMatrix> {
    let origin = origin.as_ref();
    let mut doc_index: HashMap<&str, usize> = HashMap::new();
    let mut term_index: HashMap<&str, u32> = HashMap::new();
    let mut ids: Vec<String> = Vec::new();
    let mut vocab: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<(u32, u32)>> = Vec::new();
    let mut seen: HashSet<(usize, u32)> = HashSet::new();

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(doc), Some(term), Some(count), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(Error::parse(origin, lineno, "expected doc_id<TAB>term<TAB>count"));
        };
        if doc.is_empty() || term.is_empty() {
            return Err(Error::parse(origin, lineno, "empty doc id or term"));
        }
        let count: i64 = count
            .trim()
            .parse()
            .map_err(|_| Error::parse(origin, lineno, format!("malformed count {count:?}")))?;
        if count < 0 {
            return Err(Error::parse(origin, lineno, "negative count"));
        }
        let count = u32::try_from(count).map_err(|_| Error::parse(origin, lineno, "count overflows 32 bits"))?;

        let d = *doc_index.entry(doc).or_insert_with(|| {
            ids.push(doc.to_owned());
            rows.push(Vec::new());
            ids.len() - 1
        });
        let t = *term_index.entry(term).or_insert_with(|| {
            vocab.push(term.to_owned());
            (vocab.len() - 1) as u32
        });
        if !seen.insert((d, t)) {
            return Err(Error::parse(origin, lineno, format!("duplicate pair ({doc}, {term})")));
        }
        if count > 0 {
            rows[d].push((t, count));
        }
    }

    if rows.is_empty() {
        return Err(Error::NoDocuments);
    }
    if let Some(d) = rows.iter().position(Vec::is_empty) {
        return Err(Error::InvalidCorpus(format!("{}: document {:?} is empty", origin.display(), ids[d])));
    }
    // Terms that only ever carried zero counts are still part of the vocabulary.
    DocumentTermMatrix::from_rows(ids, vocab, rows)
}

pub fn load_dtm(path: impl AsRef<Path>) -> Result<DocumentTermMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dtm(&text, path)
}

/// Writes the triplet format.
///
/// Reloading assigns term indices by first appearance, so every term is
/// introduced in vocabulary order; a zero-count record stands in for a term
/// whose first real occurrence comes later in the file.
pub fn write_dtm<W: Write>(dtm: &DocumentTermMatrix, mut out: W) -> std::io::Result<()> {
    let vocab = dtm.vocabulary();
    let mut introduced = 0usize;
    for d in 0..dtm.num_docs() {
        let id = &dtm.doc_ids()[d];
        let (terms, counts) = dtm.row(d);
        let split = terms.partition_point(|&t| (t as usize) < introduced);
        for (&t, &c) in terms[..split].iter().zip(&counts[..split]) {
            writeln!(out, "{id}\t{}\t{c}", vocab[t as usize])?;
        }
        // Terms at or beyond `introduced` are new; fill the gap up to the largest.
        if let Some(&newest) = terms[split..].last() {
            let mut next = split;
            for v in introduced..=newest as usize {
                let c = if terms[next] as usize == v {
                    next += 1;
                    counts[next - 1]
                } else {
                    0
                };
                writeln!(out, "{id}\t{}\t{c}", vocab[v])?;
            }
            introduced = newest as usize + 1;
        }
    }
    let last_id = &dtm.doc_ids()[dtm.num_docs() - 1];
    for term in &vocab[introduced..] {
        writeln!(out, "{last_id}\t{term}\t0")?;
    }
    Ok(())
}

pub fn save_dtm(dtm: &DocumentTermMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_dtm(dtm, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}
