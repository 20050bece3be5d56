use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

/// Bijection between token strings and dense indices `0..len`, with counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    freqs: Vec<u64>,
    index: BTreeMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary ordered by descending frequency, ties broken by token.
    pub fn from_counts(counts: BTreeMap<String, u64>) -> Self {
        let mut entries: Vec<(String, u64)> = counts.into_iter().filter(|(_, f)| *f > 0).collect();
        // BTreeMap iteration is already token-ordered, so a stable sort keeps ties lexicographic.
        entries.sort_by_key(|e| core::cmp::Reverse(e.1));
        Self::from_entries(entries)
    }

    /// Builds a vocabulary keeping the given order. Later duplicates are ignored.
    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut vocab = Self::default();
        for (token, freq) in entries {
            if vocab.index.contains_key(&token) {
                continue;
            }
            vocab.index.insert(token.clone(), vocab.tokens.len());
            vocab.tokens.push(token);
            vocab.freqs.push(freq);
        }
        vocab
    }

    /// Counts every token of `sentences`.
    pub fn count<'a, S, T>(sentences: S) -> Self
    where
        S: IntoIterator<Item = T>,
        T: IntoIterator<Item = &'a String>,
    {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for sentence in sentences {
            for token in sentence {
                match counts.get_mut(token) {
                    Some(c) => *c += 1,
                    None => {
                        counts.insert(token.clone(), 1);
                    }
                }
            }
        }
        Self::from_counts(counts)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn frequency(&self, index: usize) -> u64 {
        self.freqs[index]
    }

    /// Frequency of `token`, zero when absent.
    pub fn frequency_of(&self, token: &str) -> u64 {
        self.index_of(token).map_or(0, |i| self.freqs[i])
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.freqs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.tokens.iter().map(String::as_str).zip(self.freqs.iter().copied())
    }

    pub fn total(&self) -> u64 {
        self.freqs.iter().sum()
    }

    /// Row-index pairs `(i, j)` for every token present in both vocabularies, in `self` order.
    pub fn shared_with(&self, other: &Vocabulary) -> Vec<(usize, usize)> {
        self.tokens
            .iter()
            .enumerate()
            .filter_map(|(i, t)| other.index_of(t).map(|j| (i, j)))
            .collect()
    }
}
