//! Token vocabulary with reserved PAD (0) and UNK (1) slots. Tokens are
//! lowercased before lookup; the same normalization is applied at build
//! and at prediction time.

use std::collections::HashMap;

use crate::corpus::TaggedSentence;

pub const PAD_INDEX: usize = 0;
pub const UNK_INDEX: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    index: HashMap<String, usize>,
    tokens: Vec<String>,
}

impl Vocabulary {
    /// Builds the vocabulary from training sentences (source and target
    /// alike; unlabeled text is available in this setting). Insertion
    /// order is first occurrence, which keeps builds deterministic.
    pub fn build<'a>(sentences: impl IntoIterator<Item = &'a TaggedSentence>) -> Vocabulary {
        let mut vocab = Vocabulary::empty();
        for sent in sentences {
            for tok in &sent.tokens {
                vocab.intern(&tok.to_lowercase());
            }
        }
        vocab
    }

    pub fn empty() -> Vocabulary {
        let mut vocab = Vocabulary {
            index: HashMap::new(),
            tokens: Vec::new(),
        };
        vocab.intern(PAD_TOKEN);
        vocab.intern(UNK_TOKEN);
        vocab
    }

    fn intern(&mut self, token: &str) -> usize {
        if let Some(&i) = self.index.get(token) {
            return i;
        }
        let i = self.tokens.len();
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), i);
        i
    }

    /// Index for a surface token, after lowercasing; unknown tokens map
    /// to UNK.
    pub fn lookup(&self, token: &str) -> usize {
        let lowered = token.to_lowercase();
        self.index.get(lowered.as_str()).copied().unwrap_or(UNK_INDEX)
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false // PAD and UNK are always present
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Rebuilds from a stored token list (checkpoint loading).
    pub fn from_tokens(tokens: Vec<String>) -> Vocabulary {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary { index, tokens }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Domain, TaggedSentence};

    fn sent(tokens: &[&str]) -> TaggedSentence {
        TaggedSentence {
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            labels: None,
            domain: Domain::Source,
        }
    }

    #[test]
    fn reserved_slots_never_collide() {
        let sents = vec![sent(&["<pad>", "Food", "food", "FOOD"])];
        let v = Vocabulary::build(&sents);
        // The literal corpus token "<pad>" interns as itself but the
        // reserved index 0 was claimed first, so lookups agree with build
        // order and indices >= 2 are a bijection.
        assert_eq!(v.lookup("food"), v.lookup("FOOD"));
        assert!(v.lookup("food") >= 2);
        assert_eq!(v.lookup("never-seen"), UNK_INDEX);
        assert_eq!(v.token(PAD_INDEX), Some(PAD_TOKEN));
    }

    #[test]
    fn bijection_on_real_tokens() {
        let sents = vec![sent(&["a", "b", "c"]), sent(&["b", "d"])];
        let v = Vocabulary::build(&sents);
        assert_eq!(v.len(), 6);
        for (i, tok) in v.tokens().iter().enumerate().skip(2) {
            assert_eq!(v.lookup(tok), i);
        }
    }

    #[test]
    fn round_trips_through_token_list() {
        let sents = vec![sent(&["x", "y"])];
        let v = Vocabulary::build(&sents);
        let rebuilt = Vocabulary::from_tokens(v.tokens().to_vec());
        assert_eq!(v, rebuilt);
    }
}
