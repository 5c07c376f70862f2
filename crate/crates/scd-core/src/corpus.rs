//! Corpus ingestion: BIO-tagged sentences in CoNLL-style files, one
//! `token<TAB>tag` pair per line, blank line between sentences. Unlabeled
//! files carry the token column only.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// BIO tag. The numeric order (B=0, I=1, O=2) is the classifier output
/// order and the tie-breaking order at argmax time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    B = 0,
    I = 1,
    O = 2,
}

impl Tag {
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(idx: usize) -> Option<Tag> {
        match idx {
            0 => Some(Tag::B),
            1 => Some(Tag::I),
            2 => Some(Tag::O),
            _ => None,
        }
    }

    pub fn parse(s: &str) -> Option<Tag> {
        match s {
            "B" => Some(Tag::B),
            "I" => Some(Tag::I),
            "O" => Some(Tag::O),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::B => "B",
            Tag::I => "I",
            Tag::O => "O",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which side of the adaptation problem a sentence belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Source,
    Target,
}

impl Domain {
    /// 1 for source, 0 for target (the domain-classifier target value).
    pub fn flag(self) -> u8 {
        match self {
            Domain::Source => 1,
            Domain::Target => 0,
        }
    }
}

/// A token sequence with optional BIO labels and a domain flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub tokens: Vec<String>,
    pub labels: Option<Vec<Tag>>,
    pub domain: Domain,
}

impl TaggedSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// The four splits of one adaptation run. Source test doubles as the
/// development set; target test is reserved for final evaluation.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub source_train: Vec<TaggedSentence>,
    pub target_train: Vec<TaggedSentence>,
    pub source_test: Vec<TaggedSentence>,
    pub target_test: Vec<TaggedSentence>,
}

impl Corpus {
    /// Longest sentence over every split; the global pad length.
    pub fn max_len(&self) -> usize {
        self.source_train
            .iter()
            .chain(&self.target_train)
            .chain(&self.source_test)
            .chain(&self.target_test)
            .map(|s| s.len())
            .max()
            .unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.source_train.is_empty() || self.target_train.is_empty() {
            return Err(Error::Config(
                "an adaptation run needs at least one source and one target training sentence"
                    .into(),
            ));
        }
        for s in &self.source_train {
            if s.labels.is_none() {
                return Err(Error::Config(
                    "source training sentences must carry labels".into(),
                ));
            }
        }
        for s in &self.target_train {
            if s.labels.is_some() {
                return Err(Error::Config(
                    "target training sentences must not carry labels".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Reads a CoNLL-style file. Lines are `token<TAB>tag` (labeled file) or a
/// bare token (unlabeled file); a file must be one or the other throughout.
pub fn load_conll(path: impl AsRef<Path>, domain: Domain) -> Result<Vec<TaggedSentence>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;

    let mut sentences = Vec::new();
    let mut tokens: Vec<String> = Vec::new();
    let mut labels: Vec<Tag> = Vec::new();
    let mut labeled: Option<bool> = None;

    let mut flush = |tokens: &mut Vec<String>, labels: &mut Vec<Tag>| {
        if tokens.is_empty() {
            return;
        }
        let labs = if labels.is_empty() {
            None
        } else {
            Some(std::mem::take(labels))
        };
        sentences.push(TaggedSentence {
            tokens: std::mem::take(tokens),
            labels: labs,
            domain,
        });
    };

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            flush(&mut tokens, &mut labels);
            continue;
        }
        let mut parts = line.split('\t');
        let token = parts.next().unwrap_or("");
        if token.is_empty() {
            return Err(Error::Parse {
                path: path.into(),
                line: lineno,
                msg: "empty token column".into(),
            });
        }
        let tag_col = parts.next();
        if parts.next().is_some() {
            return Err(Error::Parse {
                path: path.into(),
                line: lineno,
                msg: "more than two tab-separated columns".into(),
            });
        }
        let has_tag = tag_col.is_some();
        match labeled {
            None => labeled = Some(has_tag),
            Some(l) if l != has_tag => {
                return Err(Error::Parse {
                    path: path.into(),
                    line: lineno,
                    msg: "mixed labeled and unlabeled lines".into(),
                })
            }
            _ => {}
        }
        tokens.push(token.to_string());
        if let Some(tag_str) = tag_col {
            let tag = Tag::parse(tag_str).ok_or_else(|| Error::UnknownTag {
                path: path.into(),
                line: lineno,
                tag: tag_str.to_string(),
            })?;
            labels.push(tag);
        }
    }
    flush(&mut tokens, &mut labels);
    Ok(sentences)
}

/// Writes sentences in the same format `load_conll` reads. Labels are
/// emitted when present; round-trips losslessly.
pub fn write_conll(path: impl AsRef<Path>, sentences: &[TaggedSentence]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for (i, sent) in sentences.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for (j, tok) in sent.tokens.iter().enumerate() {
            out.push_str(tok);
            if let Some(labels) = &sent.labels {
                out.push('\t');
                out.push_str(labels[j].as_str());
            }
            out.push('\n');
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn tmp_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_labeled_sentences() {
        let f = tmp_file("the\tO\nspace\tB\n\n");
        let sents = load_conll(f.path(), Domain::Source).unwrap();
        assert_eq!(sents.len(), 1);
        assert_eq!(sents[0].tokens, vec!["the", "space"]);
        assert_eq!(sents[0].labels, Some(vec![Tag::O, Tag::B]));
    }

    #[test]
    fn empty_file_is_empty_list() {
        let f = tmp_file("");
        assert!(load_conll(f.path(), Domain::Source).unwrap().is_empty());
    }

    #[test]
    fn unknown_tag_names_line() {
        let f = tmp_file("the\tO\nspace\tX\n");
        let err = load_conll(f.path(), Domain::Source).unwrap_err();
        match err {
            Error::UnknownTag { line, tag, .. } => {
                assert_eq!(line, 2);
                assert_eq!(tag, "X");
            }
            other => panic!("expected UnknownTag, got {other:?}"),
        }
    }

    #[test]
    fn unlabeled_file_has_no_labels() {
        let f = tmp_file("nice\nfood\n\nok\n");
        let sents = load_conll(f.path(), Domain::Target).unwrap();
        assert_eq!(sents.len(), 2);
        assert!(sents[0].labels.is_none());
        assert_eq!(sents[1].tokens, vec!["ok"]);
    }

    #[test]
    fn mixed_labeling_is_a_parse_error() {
        let f = tmp_file("a\tO\nb\n");
        assert!(matches!(
            load_conll(f.path(), Domain::Source),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn missing_final_blank_line_still_flushes() {
        let f = tmp_file("a\tO\nb\tB");
        let sents = load_conll(f.path(), Domain::Source).unwrap();
        assert_eq!(sents.len(), 1);
        assert_eq!(sents[0].len(), 2);
    }
}
