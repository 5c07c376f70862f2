//! Padded, masked, mixed-domain batches.
//!
//! Mixed batches hold half labeled source and half unlabeled target
//! sentences per batch; self-training batches pair every pseudo-labeled
//! target sentence with one source sentence drawn with replacement.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Tag, TaggedSentence};
use crate::error::{Error, Result};
use crate::vocab::{Vocabulary, PAD_INDEX};

/// Which loss population a batch row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetTag {
    /// Labeled source sentence.
    Source,
    /// Unlabeled target sentence (mixed batches).
    Target,
    /// Pseudo-labeled target sentence whose teacher/student labels differ.
    Disagree,
    /// Pseudo-labeled target sentence whose teacher/student labels agree.
    Agree,
}

/// Label value marking padded or unlabeled positions.
pub const IGNORE_LABEL: i32 = -1;

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    /// Token indices, (b, n_max); PAD at padded positions.
    pub tokens: Array2<usize>,
    /// Gold or pseudo labels, (b, n_max); IGNORE_LABEL where absent.
    pub labels: Array2<i32>,
    /// 1.0 at real tokens, 0.0 at padding.
    pub mask: Array2<f64>,
    /// 1 = source, 0 = target, one entry per row.
    pub domains: Vec<u8>,
    /// Loss population of each row.
    pub tags: Vec<SetTag>,
    /// Unpadded sentence lengths.
    pub lens: Vec<usize>,
}

impl Batch {
    pub fn size(&self) -> usize {
        self.tokens.nrows()
    }

    pub fn n_max(&self) -> usize {
        self.tokens.ncols()
    }

    /// Builds a padded batch. Labels come from the sentence when present,
    /// otherwise from `overrides` (used for pseudo-labels); absent both,
    /// every position gets IGNORE_LABEL.
    pub fn from_sentences(
        rows: &[(&TaggedSentence, SetTag, Option<&[Tag]>)],
        vocab: &Vocabulary,
        n_max: usize,
    ) -> Result<Batch> {
        let b = rows.len();
        if b == 0 {
            return Err(Error::Config("cannot build an empty batch".into()));
        }
        let mut tokens = Array2::<usize>::from_elem((b, n_max), PAD_INDEX);
        let mut labels = Array2::<i32>::from_elem((b, n_max), IGNORE_LABEL);
        let mut mask = Array2::<f64>::zeros((b, n_max));
        let mut domains = Vec::with_capacity(b);
        let mut tags = Vec::with_capacity(b);
        let mut lens = Vec::with_capacity(b);

        for (i, (sent, tag, overrides)) in rows.iter().enumerate() {
            if sent.len() > n_max {
                return Err(Error::Dimension(format!(
                    "sentence of length {} exceeds pad length {n_max}",
                    sent.len()
                )));
            }
            let labs: Option<&[Tag]> = sent.labels.as_deref().or(*overrides);
            if let Some(l) = labs {
                if l.len() != sent.len() {
                    return Err(Error::Alignment(format!(
                        "label sequence of length {} for sentence of length {}",
                        l.len(),
                        sent.len()
                    )));
                }
            }
            for (j, tok) in sent.tokens.iter().enumerate() {
                tokens[[i, j]] = vocab.lookup(tok);
                mask[[i, j]] = 1.0;
                if let Some(l) = labs {
                    labels[[i, j]] = l[j].index() as i32;
                }
            }
            domains.push(sent.domain.flag());
            tags.push(*tag);
            lens.push(sent.len());
        }
        Ok(Batch {
            tokens,
            labels,
            mask,
            domains,
            tags,
            lens,
        })
    }
}

/// Draws `count` indices with replacement from `0..n`.
fn draws_with_replacement(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<usize> {
    (0..count).map(|_| rng.gen_range(0..n)).collect()
}

/// One epoch of mixed-domain batches: each batch holds exactly
/// `batch_size/2` source and `batch_size/2` target sentences. The larger
/// side is shuffled and consumed once; the smaller side is resampled with
/// replacement so both sides run out together. A ragged final chunk of
/// the larger side is topped up by extra draws so every batch is full.
pub fn make_mixed_batches(
    corpus: &Corpus,
    vocab: &Vocabulary,
    batch_size: usize,
    seed: u64,
) -> Result<Vec<Batch>> {
    if batch_size == 0 || batch_size % 2 != 0 {
        return Err(Error::Config(format!(
            "batch size must be even and positive, got {batch_size}"
        )));
    }
    corpus.validate()?;
    let n_max = corpus.max_len();
    let half = batch_size / 2;
    let n_s = corpus.source_train.len();
    let n_t = corpus.target_train.len();
    let bigger = n_s.max(n_t);
    let n_batches = bigger.div_ceil(half);
    let total = n_batches * half;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order_big: Vec<usize> = (0..bigger).collect();
    order_big.shuffle(&mut rng);
    let smaller = n_s.min(n_t);
    // Top up the big side to a whole number of batches, then resample the
    // small side once for the whole epoch.
    order_big.extend(draws_with_replacement(&mut rng, bigger, total - bigger));
    let order_small = draws_with_replacement(&mut rng, smaller, total);

    let (src_order, tgt_order) = if n_s >= n_t {
        (order_big, order_small)
    } else {
        (order_small, order_big)
    };

    let mut batches = Vec::with_capacity(n_batches);
    for b in 0..n_batches {
        let mut rows: Vec<(&TaggedSentence, SetTag, Option<&[Tag]>)> =
            Vec::with_capacity(batch_size);
        for k in 0..half {
            let s = &corpus.source_train[src_order[b * half + k]];
            rows.push((s, SetTag::Source, None));
        }
        for k in 0..half {
            let t = &corpus.target_train[tgt_order[b * half + k]];
            rows.push((t, SetTag::Target, None));
        }
        batches.push(Batch::from_sentences(&rows, vocab, n_max)?);
    }
    Ok(batches)
}

/// A target sentence with the student's pseudo-labels attached.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSentence {
    /// Position in the target training corpus.
    pub index: usize,
    pub tokens: Vec<String>,
    pub labels: Vec<Tag>,
    /// Disagree or Agree.
    pub tag: SetTag,
}

/// One epoch of self-training batches: every pseudo sentence appears
/// exactly once, paired with an equal number of source draws (with
/// replacement). Returns None when the pseudo set is empty, signalling
/// the caller to skip the round.
pub fn make_selftrain_batches(
    source: &[TaggedSentence],
    pseudo: &[PseudoSentence],
    vocab: &Vocabulary,
    n_max: usize,
    batch_size: usize,
    seed: u64,
) -> Result<Option<Vec<Batch>>> {
    if batch_size == 0 || batch_size % 2 != 0 {
        return Err(Error::Config(format!(
            "batch size must be even and positive, got {batch_size}"
        )));
    }
    if pseudo.is_empty() {
        return Ok(None);
    }
    if source.is_empty() {
        return Err(Error::Config("self-training needs source sentences".into()));
    }
    let half = batch_size / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pseudo_order: Vec<usize> = (0..pseudo.len()).collect();
    pseudo_order.shuffle(&mut rng);
    let src_order = draws_with_replacement(&mut rng, source.len(), pseudo.len());

    let mut batches = Vec::new();
    let mut offset = 0;
    while offset < pseudo.len() {
        let chunk = half.min(pseudo.len() - offset);
        let mut rows: Vec<(&TaggedSentence, SetTag, Option<&[Tag]>)> =
            Vec::with_capacity(2 * chunk);
        let mut pseudo_sents: Vec<TaggedSentence> = Vec::with_capacity(chunk);
        for k in 0..chunk {
            let p = &pseudo[pseudo_order[offset + k]];
            pseudo_sents.push(TaggedSentence {
                tokens: p.tokens.clone(),
                labels: None,
                domain: crate::corpus::Domain::Target,
            });
        }
        for k in 0..chunk {
            let s = &source[src_order[offset + k]];
            rows.push((s, SetTag::Source, None));
        }
        for (k, sent) in pseudo_sents.iter().enumerate() {
            let p = &pseudo[pseudo_order[offset + k]];
            rows.push((sent, p.tag, Some(p.labels.as_slice())));
        }
        batches.push(Batch::from_sentences(&rows, vocab, n_max)?);
        offset += chunk;
    }
    Ok(Some(batches))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Domain;

    fn sent(tokens: &[&str], labels: Option<&[Tag]>, domain: Domain) -> TaggedSentence {
        TaggedSentence {
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            labels: labels.map(|l| l.to_vec()),
            domain,
        }
    }

    fn toy_corpus(n_s: usize, n_t: usize) -> (Corpus, Vocabulary) {
        let src: Vec<_> = (0..n_s)
            .map(|i| {
                sent(
                    &[&format!("s{i}"), "x"],
                    Some(&[Tag::B, Tag::O]),
                    Domain::Source,
                )
            })
            .collect();
        let tgt: Vec<_> = (0..n_t)
            .map(|i| sent(&[&format!("t{i}")], None, Domain::Target))
            .collect();
        let corpus = Corpus {
            source_train: src,
            target_train: tgt,
            source_test: vec![],
            target_test: vec![],
        };
        let vocab = Vocabulary::build(corpus.source_train.iter().chain(&corpus.target_train));
        (corpus, vocab)
    }

    #[test]
    fn balanced_batches_when_sides_match() {
        let (corpus, vocab) = toy_corpus(4, 4);
        let batches = make_mixed_batches(&corpus, &vocab, 4, 0).unwrap();
        assert_eq!(batches.len(), 2);
        for b in &batches {
            assert_eq!(b.domains.iter().filter(|&&d| d == 1).count(), 2);
            assert_eq!(b.domains.iter().filter(|&&d| d == 0).count(), 2);
        }
    }

    #[test]
    fn smaller_side_resamples_with_replacement() {
        let (corpus, vocab) = toy_corpus(2, 8);
        let batches = make_mixed_batches(&corpus, &vocab, 4, 1).unwrap();
        assert_eq!(batches.len(), 4);
        // 8 source rows drawn from only 2 sentences: repeats are certain.
        let mut seen = Vec::new();
        for b in &batches {
            for (i, &d) in b.domains.iter().enumerate() {
                if d == 1 {
                    seen.push(b.tokens[[i, 0]]);
                }
            }
        }
        assert_eq!(seen.len(), 8);
        assert!(seen.iter().collect::<std::collections::HashSet<_>>().len() <= 2);
    }

    #[test]
    fn odd_batch_size_is_a_config_error() {
        let (corpus, vocab) = toy_corpus(2, 2);
        assert!(matches!(
            make_mixed_batches(&corpus, &vocab, 3, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn mixed_batches_are_deterministic_per_seed() {
        let (corpus, vocab) = toy_corpus(5, 7);
        let a = make_mixed_batches(&corpus, &vocab, 4, 42).unwrap();
        let b = make_mixed_batches(&corpus, &vocab, 4, 42).unwrap();
        let c = make_mixed_batches(&corpus, &vocab, 4, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    fn pseudo(n: usize) -> Vec<PseudoSentence> {
        (0..n)
            .map(|i| PseudoSentence {
                index: i,
                tokens: vec![format!("t{i}")],
                labels: vec![Tag::O],
                tag: if i % 2 == 0 {
                    SetTag::Disagree
                } else {
                    SetTag::Agree
                },
            })
            .collect()
    }

    #[test]
    fn selftrain_uses_one_source_draw_per_pseudo_sentence() {
        let (corpus, _) = toy_corpus(3, 10);
        let vocab = Vocabulary::build(corpus.source_train.iter().chain(&corpus.target_train));
        let batches = make_selftrain_batches(&corpus.source_train, &pseudo(10), &vocab, 2, 4, 0)
            .unwrap()
            .unwrap();
        let n_src: usize = batches
            .iter()
            .map(|b| b.tags.iter().filter(|t| **t == SetTag::Source).count())
            .sum();
        let n_pseudo: usize = batches
            .iter()
            .map(|b| b.tags.iter().filter(|t| **t != SetTag::Source).count())
            .sum();
        assert_eq!(n_src, 10);
        assert_eq!(n_pseudo, 10);
    }

    #[test]
    fn empty_pseudo_set_signals_skip() {
        let (corpus, vocab) = toy_corpus(3, 3);
        let out = make_selftrain_batches(&corpus.source_train, &[], &vocab, 2, 4, 0).unwrap();
        assert!(out.is_none());
    }

    #[test]
    fn selftrain_batches_are_deterministic_per_seed() {
        let (corpus, vocab) = toy_corpus(3, 6);
        let a = make_selftrain_batches(&corpus.source_train, &pseudo(6), &vocab, 2, 4, 5).unwrap();
        let b = make_selftrain_batches(&corpus.source_train, &pseudo(6), &vocab, 2, 4, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pseudo_labels_and_set_tags_survive_batching() {
        let (corpus, vocab) = toy_corpus(2, 4);
        let ps = pseudo(4);
        let batches = make_selftrain_batches(&corpus.source_train, &ps, &vocab, 2, 4, 3)
            .unwrap()
            .unwrap();
        for b in &batches {
            for (i, tag) in b.tags.iter().enumerate() {
                match tag {
                    SetTag::Source => assert_eq!(b.domains[i], 1),
                    SetTag::Disagree | SetTag::Agree => {
                        assert_eq!(b.domains[i], 0);
                        // Pseudo rows carry the student labels.
                        assert_eq!(b.labels[[i, 0]], Tag::O.index() as i32);
                    }
                    SetTag::Target => panic!("mixed-tag row in self-train batch"),
                }
            }
        }
    }
}
