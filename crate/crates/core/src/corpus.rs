//! In-memory corpora: frequency filtering, concatenation and word injection.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::vocab::Vocabulary;

/// Suffixes marking the period a target occurrence came from.
pub const PERIOD_TAGS: [&str; 2] = ["_CORPUS1", "_CORPUS2"];

/// Ordered sentences of tokens plus their vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    name: String,
    sentences: Vec<Vec<String>>,
    token_count: u64,
    vocab: Vocabulary,
}

impl Corpus {
    /// Builds a corpus from raw sentences without frequency filtering. Empty sentences are dropped.
    pub fn new(name: impl Into<String>, sentences: Vec<Vec<String>>) -> Self {
        let sentences: Vec<Vec<String>> = sentences.into_iter().filter(|s| !s.is_empty()).collect();
        let vocab = Vocabulary::count(sentences.iter());
        let token_count = sentences.iter().map(|s| s.len() as u64).sum();
        Self {
            name: name.into(),
            sentences,
            token_count,
            vocab,
        }
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self::new(name, Vec::new())
    }

    /// Removes every token whose corpus frequency is below `min_freq`.
    ///
    /// Sentences keep their order and the order of their surviving tokens;
    /// sentences left empty are dropped. Fails with [`Error::EmptyCorpus`]
    /// when nothing survives.
    pub fn filtered(name: impl Into<String>, sentences: Vec<Vec<String>>, min_freq: u64) -> Result<Self> {
        let counts = Vocabulary::count(sentences.iter());
        let keep = |t: &String| counts.frequency_of(t) >= min_freq;
        let sentences = sentences
            .into_iter()
            .map(|s| s.into_iter().filter(keep).collect::<Vec<_>>())
            .collect();
        let corpus = Self::new(name, sentences);
        if corpus.token_count == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(corpus)
    }

    pub fn filter(&self, min_freq: u64) -> Result<Self> {
        Self::filtered(self.name.clone(), self.sentences.clone(), min_freq)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sentences(&self) -> &[Vec<String>] {
        &self.sentences
    }

    pub fn token_count(&self) -> u64 {
        self.token_count
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn is_empty(&self) -> bool {
        self.token_count == 0
    }

    pub fn into_sentences(self) -> Vec<Vec<String>> {
        self.sentences
    }
}

/// Concatenates two corpora: sentences of `first` then `second`, frequencies summed.
pub fn concat_corpora(first: &Corpus, second: &Corpus) -> Corpus {
    let name = match (first.is_empty(), second.is_empty()) {
        (false, true) => first.name.clone(),
        (true, false) => second.name.clone(),
        _ => format!("{}+{}", first.name, second.name),
    };
    let sentences = first.sentences.iter().chain(&second.sentences).cloned().collect();
    Corpus::new(name, sentences)
}

/// Non-empty, duplicate-free list of target words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetWordList(Vec<String>);

impl TargetWordList {
    pub fn new(words: Vec<String>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::EmptyTargets);
        }
        let mut seen = BTreeMap::new();
        for w in &words {
            if seen.insert(w.as_str(), ()).is_some() {
                return Err(Error::Duplicate(w.clone()));
            }
        }
        Ok(Self(words))
    }

    pub fn words(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

/// Tagged form of `target` for period 0 or 1.
pub fn tagged_form(target: &str, period: usize) -> String {
    let mut s = String::with_capacity(target.len() + PERIOD_TAGS[period].len());
    s.push_str(target);
    s.push_str(PERIOD_TAGS[period]);
    s
}

/// Where a target lives inside an injected corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InjectedTarget {
    pub target: String,
    pub tagged: [String; 2],
    /// Occurrences in the first and second source corpus.
    pub frequency: [u64; 2],
}

impl InjectedTarget {
    /// True when the target occurs in neither corpus.
    pub fn absent(&self) -> bool {
        self.frequency == [0, 0]
    }
}

/// Joint corpus produced by [`word_inject`].
#[derive(Debug, Clone, PartialEq)]
pub struct InjectedCorpus {
    pub corpus: Corpus,
    pub targets: Vec<InjectedTarget>,
    /// Human-readable warnings, e.g. targets missing from both corpora.
    pub warnings: Vec<String>,
}

/// Shuffles the sentences of both corpora into one corpus, replacing every
/// occurrence of a target by its period-tagged form.
///
/// Only exact token matches are substituted. An empty target list yields a
/// plain shuffled concatenation.
pub fn word_inject<S: AsRef<str>>(first: &Corpus, second: &Corpus, targets: &[S], seed: u64) -> InjectedCorpus {
    let lookup: BTreeMap<&str, usize> = targets.iter().enumerate().map(|(i, t)| (t.as_ref(), i)).collect();
    let injected: Vec<InjectedTarget> = targets
        .iter()
        .map(|t| {
            let t = t.as_ref();
            InjectedTarget {
                target: t.to_string(),
                tagged: [tagged_form(t, 0), tagged_form(t, 1)],
                frequency: [first.vocab.frequency_of(t), second.vocab.frequency_of(t)],
            }
        })
        .collect();

    let mut sentences: Vec<Vec<String>> = Vec::with_capacity(first.sentences.len() + second.sentences.len());
    for (period, corpus) in [first, second].into_iter().enumerate() {
        for sentence in &corpus.sentences {
            sentences.push(
                sentence
                    .iter()
                    .map(|tok| match lookup.get(tok.as_str()) {
                        Some(&i) => injected[i].tagged[period].clone(),
                        None => tok.clone(),
                    })
                    .collect(),
            );
        }
    }
    let mut rng = stream_rng(seed, 0x5755);
    sentences.shuffle(&mut rng);

    let warnings = injected
        .iter()
        .filter(|t| t.absent())
        .map(|t| format!("target `{}` occurs in neither corpus", t.target))
        .collect();
    InjectedCorpus {
        corpus: Corpus::new(format!("wi({},{})", first.name, second.name), sentences),
        targets: injected,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sent(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn corpus(lines: &[&str]) -> Corpus {
        Corpus::new("c", lines.iter().map(|l| sent(l)).collect())
    }

    #[test]
    fn threshold_filter() {
        let c = Corpus::filtered("c", vec![sent("a a b")], 2).unwrap();
        assert_eq!(c.sentences(), &[sent("a a")]);
        assert_eq!(c.vocab().len(), 1);
        assert_eq!(c.vocab().frequency_of("a"), 2);
        assert_eq!(c.token_count(), 2);
    }

    #[test]
    fn hand_counted_tallies() {
        let lines = ["the cat sat", "the dog", "a cat and the dog"];
        let c = Corpus::filtered("c", lines.iter().map(|l| sent(l)).collect(), 1).unwrap();
        // brute-force tally
        let mut tally: BTreeMap<String, u64> = BTreeMap::new();
        for l in lines {
            for t in l.split(' ') {
                *tally.entry(t.to_string()).or_default() += 1;
            }
        }
        assert_eq!(c.vocab().len(), tally.len());
        for (t, n) in tally {
            assert_eq!(c.vocab().frequency_of(&t), n, "{t}");
        }
        assert_eq!(c.token_count(), 10);
    }

    #[test]
    fn empty_after_filtering() {
        assert_eq!(Corpus::filtered("c", vec![sent("a b")], 2), Err(Error::EmptyCorpus));
        assert_eq!(Corpus::filtered("c", vec![], 1), Err(Error::EmptyCorpus));
    }

    #[test]
    fn empty_sentences_dropped() {
        let c = Corpus::filtered("c", vec![sent("a a"), sent("b"), sent("a")], 2).unwrap();
        assert_eq!(c.sentences().len(), 2);
    }

    #[test]
    fn filtering_is_idempotent() {
        let c = corpus(&["a b c a", "b b d", "e a"]);
        let once = c.filter(2).unwrap();
        assert_eq!(once.filter(2).unwrap(), once);
    }

    #[test]
    fn concat_identity_and_sum() {
        let c = corpus(&["x y", "y"]);
        assert_eq!(concat_corpora(&c, &Corpus::empty("e")), c);
        let d = corpus(&["y z"]);
        let j = concat_corpora(&c, &d);
        assert_eq!(j.sentences().len(), 3);
        assert_eq!(j.token_count(), c.token_count() + d.token_count());
        assert_eq!(j.vocab().frequency_of("y"), 3);
        assert_eq!(j.vocab().frequency_of("z"), 1);
    }

    #[test]
    fn target_list_invariants() {
        assert_eq!(TargetWordList::new(vec![]), Err(Error::EmptyTargets));
        assert_eq!(
            TargetWordList::new(vec!["a".into(), "a".into()]),
            Err(Error::Duplicate("a".into()))
        );
    }

    #[test]
    fn inject_substitutes_per_period() {
        let inj = word_inject(&corpus(&["x y"]), &corpus(&["x z"]), &["x"], 7);
        let mut got: Vec<Vec<String>> = inj.corpus.sentences().to_vec();
        got.sort();
        assert_eq!(got, vec![sent("x_CORPUS1 y"), sent("x_CORPUS2 z")]);
        assert_eq!(inj.targets[0].frequency, [1, 1]);
        assert!(inj.warnings.is_empty());
    }

    #[test]
    fn inject_without_targets_is_shuffled_concat() {
        let a = corpus(&["a b", "c"]);
        let b = corpus(&["d", "e f g"]);
        let inj = word_inject::<&str>(&a, &b, &[], 3);
        let mut got = inj.corpus.sentences().to_vec();
        let mut want = concat_corpora(&a, &b).into_sentences();
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn inject_recount_matches_source_frequency() {
        let a = corpus(&["x y x", "y x", "q"]);
        let b = corpus(&["x", "z z"]);
        let inj = word_inject(&a, &b, &["x", "z", "nowhere"], 11);
        let count = |tok: &str| {
            inj.corpus
                .sentences()
                .iter()
                .flatten()
                .filter(|t| t.as_str() == tok)
                .count() as u64
        };
        assert_eq!(count("x_CORPUS1"), a.vocab().frequency_of("x"));
        assert_eq!(count("x_CORPUS2"), b.vocab().frequency_of("x"));
        assert_eq!(count("z_CORPUS2"), 2);
        assert_eq!(count("x"), 0);
        assert_eq!(inj.corpus.token_count(), a.token_count() + b.token_count());
        assert!(inj.targets[2].absent());
        assert_eq!(inj.warnings.len(), 1);
    }

    #[test]
    fn shuffle_seed_behaviour() {
        let a = corpus(&["a", "b", "c", "d", "e", "f"]);
        let b = corpus(&["g", "h", "i", "j", "k", "l"]);
        let one = word_inject::<&str>(&a, &b, &[], 1);
        let again = word_inject::<&str>(&a, &b, &[], 1);
        let other = word_inject::<&str>(&a, &b, &[], 2);
        assert_eq!(one.corpus, again.corpus);
        assert_ne!(one.corpus.sentences(), other.corpus.sentences());
        let mut x = one.corpus.into_sentences();
        let mut y = other.corpus.into_sentences();
        x.sort();
        y.sort();
        assert_eq!(x, y);
    }
}
