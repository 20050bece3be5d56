//! Flat `key = value` text used by configs, sidecars and provenance files.
//!
//! Blank lines and lines starting with `#` are ignored. A key may repeat;
//! list values are comma-separated.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::formats::{read_lines, write_text};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvDoc {
    entries: Vec<(String, String)>,
    /// Source line of each entry, for error messages.
    lines: Vec<usize>,
    origin: Option<std::path::PathBuf>,
}

impl KvDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str, origin: Option<&Path>) -> Result<Self> {
        let mut doc = Self {
            origin: origin.map(Path::to_path_buf),
            ..Self::default()
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(doc.error_at(i + 1, format!("expected `key = value`, got `{line}`")));
            };
            doc.entries.push((key.trim().to_string(), value.trim().to_string()));
            doc.lines.push(i + 1);
        }
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_lines(path)?.join("\n"), Some(path))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_string())
    }

    pub fn push(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self.lines.push(0);
        self
    }

    pub fn push_list<T: Display>(&mut self, key: &str, values: &[T]) -> &mut Self {
        let joined: Vec<String> = values.iter().map(ToString::to_string).collect();
        self.push(key, joined.join(","))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Last value of `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// All values of a repeated key, in order.
    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries
            .iter()
            .filter(move |(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn error_at(&self, line: usize, message: String) -> Error {
        match &self.origin {
            Some(path) => Error::parse(path, line, message),
            None => Error::Config(message),
        }
    }

    fn error_for(&self, key: &str, message: String) -> Error {
        let line = self
            .entries
            .iter()
            .rposition(|(k, _)| k == key)
            .map_or(0, |i| self.lines[i]);
        self.error_at(line, message)
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| self.error_for(key, format!("invalid value `{v}` for `{key}`")))
            })
            .transpose()
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parsed(key)?
            .ok_or_else(|| self.error_for(key, format!("missing key `{key}`")))
    }

    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse()
                            .map_err(|_| self.error_for(key, format!("invalid list item `{s}` for `{key}`")))
                    })
                    .collect()
            })
            .transpose()
    }

    /// First key not in `known`, if any.
    pub fn unknown_key(&self, known: &[&str]) -> Option<&str> {
        self.entries
            .iter()
            .map(|(k, _)| k.as_str())
            .find(|k| !known.contains(k))
    }
}

impl std::fmt::Display for KvDoc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// Parses `true/false/yes/no/1/0`.
pub fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Some(true),
        "false" | "no" | "0" | "off" => Some(false),
        _ => None,
    }
}

impl KvDoc {
    pub fn flag(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => {
                parse_bool(v).ok_or_else(|| self.error_for(key, format!("`{key}` expects true or false, got `{v}`")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let doc = KvDoc::parse("# comment\na = 1\n\nlist = 5, 10\na = 2\nflag = yes\n", None).unwrap();
        assert_eq!(doc.get("a"), Some("2"));
        assert_eq!(doc.get_all("a").collect::<Vec<_>>(), ["1", "2"]);
        assert_eq!(doc.list::<usize>("list").unwrap(), Some(vec![5, 10]));
        assert!(doc.flag("flag", false).unwrap());
        assert!(!doc.flag("other", false).unwrap());
        let printed = doc.to_string();
        assert_eq!(KvDoc::parse(&printed, None).unwrap().entries().count(), 4);
    }

    #[test]
    fn errors_point_at_the_line() {
        let path = Path::new("exp.conf");
        let doc = KvDoc::parse("a = 1\nb = x\n", Some(path)).unwrap();
        match doc.required::<u32>("b") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            KvDoc::parse("no equals sign", Some(path)),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(doc.required::<u32>("c").is_err());
    }

    #[test]
    fn values_may_contain_equals() {
        let doc = KvDoc::parse("note = x = y\n", None).unwrap();
        assert_eq!(doc.get("note"), Some("x = y"));
    }
}
