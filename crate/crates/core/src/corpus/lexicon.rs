use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Value returned for any word missing from a lexicon. Featlets treat it as
/// an ordinary string.
pub const UNK: &str = "UNK";

const DEFAULT_CLOSED_CLASS: &[&str] = &[
    "CC", "DT", "EX", "IN", "MD", "PDT", "POS", "PRP", "PRP$", "RP", "TO", "WDT", "WP", "WP$",
    "WRB",
];

pub const BROWN256_FILE: &str = "brown256.tsv";
pub const BROWN1000_FILE: &str = "brown1000.tsv";
pub const SYNSETS_FILE: &str = "synsets.tsv";
pub const CLOSED_CLASS_FILE: &str = "closed_class.tsv";

/// Word clusters, first-sense synsets and the closed-class tag set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lexicons {
    pub brown256: HashMap<String, String>,
    pub brown1000: HashMap<String, String>,
    /// Keyed by `lemma/POS`.
    pub synsets: HashMap<String, String>,
    pub closed_class: HashSet<String>,
}

impl Default for Lexicons {
    fn default() -> Self {
        Lexicons {
            brown256: HashMap::new(),
            brown1000: HashMap::new(),
            synsets: HashMap::new(),
            closed_class: DEFAULT_CLOSED_CLASS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl Lexicons {
    pub fn brown256(&self, word: &str) -> &str {
        self.brown256.get(word).map_or(UNK, String::as_str)
    }

    pub fn brown1000(&self, word: &str) -> &str {
        self.brown1000.get(word).map_or(UNK, String::as_str)
    }

    pub fn synset(&self, lemma: &str, pos: &str) -> &str {
        self.synsets
            .get(&synset_key(lemma, pos))
            .map_or(UNK, String::as_str)
    }

    pub fn is_closed_class(&self, pos: &str) -> bool {
        self.closed_class.contains(pos)
    }

    /// Loads whichever of the four lexicon files exist in `dir`. A missing
    /// closed-class file keeps the built-in Penn tag set.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut lex = Lexicons::default();
        let read = |name: &str| -> Result<Option<Vec<(String, String)>>> {
            let path = dir.join(name);
            if !path.exists() {
                return Ok(None);
            }
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            parse_pairs(&text, &path.display().to_string()).map(Some)
        };
        if let Some(p) = read(BROWN256_FILE)? {
            lex.brown256 = p.into_iter().collect();
        }
        if let Some(p) = read(BROWN1000_FILE)? {
            lex.brown1000 = p.into_iter().collect();
        }
        if let Some(p) = read(SYNSETS_FILE)? {
            lex.synsets = p.into_iter().collect();
        }
        if let Some(p) = read(CLOSED_CLASS_FILE)? {
            lex.closed_class = p.into_iter().map(|(k, _)| k).collect();
        }
        Ok(lex)
    }

    /// File name and contents of each lexicon file, as `write_dir` lays
    /// them out.
    pub fn files(&self) -> Vec<(&'static str, String)> {
        fn dump<'a>(pairs: impl Iterator<Item = (&'a String, &'a String)>) -> String {
            let mut rows: Vec<_> = pairs.collect();
            rows.sort();
            let mut text = String::new();
            for (k, v) in rows {
                text.push_str(k);
                text.push('\t');
                text.push_str(v);
                text.push('\n');
            }
            text
        }
        let closed = String::from("closed");
        vec![
            (BROWN256_FILE, dump(self.brown256.iter())),
            (BROWN1000_FILE, dump(self.brown1000.iter())),
            (SYNSETS_FILE, dump(self.synsets.iter())),
            (
                CLOSED_CLASS_FILE,
                dump(self.closed_class.iter().map(|t| (t, &closed))),
            ),
        ]
    }

    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        for (name, text) in self.files() {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

pub fn synset_key(lemma: &str, pos: &str) -> String {
    format!("{lemma}/{pos}")
}

fn parse_pairs(text: &str, path: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let key = cols.next().unwrap_or_default();
        if key.is_empty() {
            return Err(Error::parse(path, i + 1, "empty lexicon key"));
        }
        let value = cols.next().unwrap_or_default();
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}
