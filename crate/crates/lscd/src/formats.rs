//! Plain-text corpus, target, gold and score files.
//!
//! * corpus: one sentence per line, tokens separated by spaces
//! * targets: one word per line
//! * gold: `word<TAB>score`, or `word1<TAB>word2<TAB>score` for similarity pairs
//! * scores: `word<TAB>score`, with `NA` for a word that could not be scored

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use lscd_core::corpus::{Corpus, TargetWordList};
use lscd_core::evaluation::{GoldRanking, PairGold};
use lscd_core::measures::ChangeRanking;

use crate::error::{Error, Result};

pub const MISSING: &str = "NA";

pub(crate) fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(file)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

fn parse_score(path: &Path, line: usize, field: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("`{field}` is not a number")))
}

/// Reads a corpus and removes every token rarer than `min_freq`.
pub fn load_corpus(path: &Path, min_freq: u64) -> Result<Corpus> {
    let sentences = read_lines(path)?
        .iter()
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect();
    let name = path
        .file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    Ok(Corpus::filtered(name, sentences, min_freq)?)
}

pub fn write_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    let mut text = String::new();
    for s in corpus.sentences() {
        text.push_str(&s.join(" "));
        text.push('\n');
    }
    write_text(path, &text)
}

pub fn read_targets(path: &Path) -> Result<TargetWordList> {
    let words = read_lines(path)?
        .into_iter()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect();
    Ok(TargetWordList::new(words)?)
}

pub fn write_targets(path: &Path, targets: &TargetWordList) -> Result<()> {
    let text: String = targets.iter().map(|w| format!("{w}\n")).collect();
    write_text(path, &text)
}

fn records(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    Ok(read_lines(path)?
        .into_iter()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.trim_end().split('\t').map(String::from).collect()))
        .collect())
}

pub fn read_gold(path: &Path) -> Result<GoldRanking> {
    let mut items = Vec::new();
    for (line, fields) in records(path)? {
        if fields.len() != 2 {
            return Err(Error::parse(path, line, "expected `word<TAB>score`"));
        }
        items.push((fields[0].clone(), parse_score(path, line, &fields[1])?));
    }
    Ok(GoldRanking::new(items)?)
}

pub fn read_pair_gold(path: &Path) -> Result<PairGold> {
    let mut items = Vec::new();
    for (line, fields) in records(path)? {
        if fields.len() != 3 {
            return Err(Error::parse(path, line, "expected `word1<TAB>word2<TAB>score`"));
        }
        items.push((
            (fields[0].clone(), fields[1].clone()),
            parse_score(path, line, &fields[2])?,
        ));
    }
    Ok(GoldRanking::new(items)?)
}

pub fn write_gold(path: &Path, gold: &GoldRanking) -> Result<()> {
    let text: String = gold.items().iter().map(|(w, s)| format!("{w}\t{s}\n")).collect();
    write_text(path, &text)
}

pub fn format_scores(ranking: &ChangeRanking) -> String {
    ranking
        .entries()
        .iter()
        .map(|(w, s)| match s {
            Some(s) => format!("{w}\t{s}\n"),
            None => format!("{w}\t{MISSING}\n"),
        })
        .collect()
}

pub fn write_scores(path: &Path, ranking: &ChangeRanking) -> Result<()> {
    write_text(path, &format_scores(ranking))
}

pub fn read_scores(path: &Path) -> Result<ChangeRanking> {
    let mut entries = Vec::new();
    for (line, fields) in records(path)? {
        if fields.len() != 2 {
            return Err(Error::parse(path, line, "expected `word<TAB>score`"));
        }
        let score = match fields[1].trim() {
            MISSING => None,
            s => Some(parse_score(path, line, s)?),
        };
        entries.push((fields[0].clone(), score));
    }
    Ok(ChangeRanking::new(entries))
}
