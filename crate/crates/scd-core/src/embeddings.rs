//! Fixed pretrained word embeddings. The table is never updated during
//! training: row 0 (PAD) is all zeros, UNK gets a seeded random vector,
//! and corpus words missing from the embedding file fall back to the UNK
//! row at lookup time.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::vocab::{Vocabulary, PAD_INDEX, UNK_INDEX};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    /// One row per vocabulary index, shape (vocab, d_emb).
    pub matrix: Array2<f64>,
    /// Whether the word's vector came from the file (PAD and UNK count
    /// as covered by construction).
    pub covered: Vec<bool>,
    /// Fraction of real vocabulary words (index >= 2) found in the file.
    pub coverage: f64,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn vocab_size(&self) -> usize {
        self.matrix.nrows()
    }

    /// Embedding row for a vocabulary index. Uncovered words resolve to
    /// the UNK row here rather than at batch construction, so batches
    /// keep token identity.
    pub fn row(&self, index: usize) -> Result<ndarray::ArrayView1<'_, f64>> {
        if index >= self.vocab_size() {
            return Err(Error::IndexOutOfRange {
                index,
                size: self.vocab_size(),
            });
        }
        let effective = if self.covered[index] { index } else { UNK_INDEX };
        Ok(self.matrix.row(effective))
    }
}

/// Reads a textual word-vector file: an optional `count dim` header line,
/// then one `word v1 .. v_d` line per word. Vectors must match `d_emb`.
pub fn load_embeddings(
    path: impl AsRef<Path>,
    vocab: &Vocabulary,
    d_emb: usize,
    unk_seed: u64,
) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text, vocab, d_emb, unk_seed).map_err(|e| match e {
        Error::Dimension(msg) => Error::Dimension(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Same as [`load_embeddings`] but over in-memory text.
pub fn from_text(
    text: &str,
    vocab: &Vocabulary,
    d_emb: usize,
    unk_seed: u64,
) -> Result<EmbeddingTable> {
    let mut matrix = Array2::<f64>::zeros((vocab.len(), d_emb));
    let mut covered = vec![false; vocab.len()];
    covered[PAD_INDEX] = true;
    covered[UNK_INDEX] = true;

    let mut rng = ChaCha8Rng::seed_from_u64(unk_seed);
    let unk_row: Array1<f64> = Array1::from_iter((0..d_emb).map(|_| rng.gen_range(-0.1..0.1)));
    matrix.row_mut(UNK_INDEX).assign(&unk_row);

    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().unwrap();
        let values: Vec<&str> = fields.collect();
        // Optional "count dim" header.
        if lineno == 0 && values.len() == 1 && word.parse::<usize>().is_ok() {
            continue;
        }
        if values.len() != d_emb {
            return Err(Error::Dimension(format!(
                "line {}: vector for `{word}` has {} entries, expected {d_emb}",
                lineno + 1,
                values.len()
            )));
        }
        let idx = vocab.lookup(word);
        if idx == UNK_INDEX {
            continue; // word not in the training vocabulary
        }
        if covered[idx] {
            continue; // first occurrence wins
        }
        for (j, v) in values.iter().enumerate() {
            matrix[[idx, j]] = v.parse::<f64>().map_err(|_| {
                Error::Dimension(format!("line {}: bad float `{v}`", lineno + 1))
            })?;
        }
        covered[idx] = true;
    }

    let real = vocab.len().saturating_sub(2);
    let hit = covered.iter().skip(2).filter(|&&c| c).count();
    let coverage = if real == 0 { 1.0 } else { hit as f64 / real as f64 };
    log::info!(
        "embeddings: {hit}/{real} vocabulary words covered ({:.1}%)",
        coverage * 100.0
    );
    Ok(EmbeddingTable {
        matrix,
        covered,
        coverage,
    })
}

/// Writes a table in the same format `load_embeddings` reads, with a
/// `count dim` header.
pub fn write_embeddings(
    path: impl AsRef<Path>,
    words: &[(String, Vec<f64>)],
    d_emb: usize,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("{} {}\n", words.len(), d_emb);
    for (word, vec) in words {
        out.push_str(word);
        for v in vec {
            out.push(' ');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
