use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::FeatureError;

/// Pretrained word vectors loaded from the plain text format
/// (`word v1 v2 ... vd`, one entry per line).
///
/// Lookup is case-sensitive first, then falls back to the lowercased word
/// when `lowercase_lookup` is set. Unknown words map to the zero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    index: HashMap<String, usize>,
    vectors: Vec<f32>,
    pub lowercase_lookup: bool,
    zero: Vec<f32>,
    /// Lines skipped while loading (unparsable numbers, duplicate words).
    pub skipped_lines: usize,
}

impl EmbeddingTable {
    /// A table without entries; every lookup yields zeros.
    pub fn empty(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            index: HashMap::new(),
            vectors: Vec::new(),
            lowercase_lookup: true,
            zero: vec![0.0; dim],
            skipped_lines: 0,
        }
    }

    pub fn from_entries(
        dim: usize,
        entries: impl IntoIterator<Item = (String, Vec<f32>)>,
    ) -> Result<Self, FeatureError> {
        if dim == 0 {
            return Err(FeatureError::ZeroDimension);
        }
        let mut table = EmbeddingTable::empty(dim);
        for (i, (word, v)) in entries.into_iter().enumerate() {
            if v.len() != dim {
                return Err(FeatureError::EmbeddingDimension {
                    line: i + 1,
                    expected: dim,
                    found: v.len(),
                });
            }
            table.insert(word, &v);
        }
        Ok(table)
    }

    fn insert(&mut self, word: String, v: &[f32]) -> bool {
        if self.index.contains_key(&word) {
            return false;
        }
        self.index.insert(word, self.index.len());
        self.vectors.extend_from_slice(v);
        true
    }

    pub fn read_text(reader: impl BufRead, dim: usize) -> Result<Self, FeatureError> {
        if dim == 0 {
            return Err(FeatureError::ZeroDimension);
        }
        let mut table = EmbeddingTable::empty(dim);
        let mut buf = vec![0f32; dim];
        let mut lines = 0;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            lines += 1;
            // Components are the last `dim` fields; the word is everything before them.
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < dim + 1 {
                return Err(FeatureError::EmbeddingDimension {
                    line: i + 1,
                    expected: dim,
                    found: fields.len().saturating_sub(1),
                });
            }
            let split = fields.len() - dim;
            let mut ok = true;
            for (slot, f) in buf.iter_mut().zip(&fields[split..]) {
                match f.parse::<f32>() {
                    Ok(x) => *slot = x,
                    Err(_) => ok = false,
                }
            }
            if !ok || !table.insert(fields[..split].join(" "), &buf) {
                table.skipped_lines += 1;
            }
        }
        if lines == 0 {
            return Err(FeatureError::EmptyEmbeddings);
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>, dim: usize) -> Result<Self, FeatureError> {
        Self::read_text(BufReader::new(File::open(path)?), dim)
    }

    /// Number of components on the first non-empty line.
    pub fn infer_dim(path: impl AsRef<Path>) -> Result<usize, FeatureError> {
        let reader = BufReader::new(File::open(path)?);
        for line in reader.lines() {
            let line = line?;
            let n = line.trim_end().split(' ').count();
            if n > 1 {
                return Ok(n - 1);
            }
        }
        Err(FeatureError::EmptyEmbeddings)
    }

    pub fn write_text(&self, mut w: impl Write) -> std::io::Result<()> {
        let mut words: Vec<(&String, &usize)> = self.index.iter().collect();
        words.sort_by_key(|(_, &i)| i);
        for (word, &i) in words {
            write!(w, "{word}")?;
            for x in &self.vectors[i * self.dim..(i + 1) * self.dim] {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        w.flush()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        self.write_text(BufWriter::new(File::create(path)?))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.get(word).is_some()
    }

    /// Vector for `word`, or `None` if it is out of vocabulary.
    pub fn get(&self, word: &str) -> Option<&[f32]> {
        let i = match self.index.get(word) {
            Some(&i) => i,
            None if self.lowercase_lookup => *self.index.get(&word.to_lowercase())?,
            None => return None,
        };
        Some(&self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    /// Vector for `word`, zeros when unknown.
    pub fn lookup(&self, word: &str) -> &[f32] {
        self.get(word).unwrap_or(&self.zero)
    }
}
