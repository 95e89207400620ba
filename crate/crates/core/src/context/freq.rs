use std::collections::HashMap;
use std::fmt::Write as _;

use super::Featlet;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FreqTransform {
    Top(u16),
    Cnt(u8),
}

impl FreqTransform {
    pub const ALL: [FreqTransform; 5] = [
        FreqTransform::Top(10),
        FreqTransform::Top(100),
        FreqTransform::Top(1000),
        FreqTransform::Cnt(8),
        FreqTransform::Cnt(16),
    ];

    pub fn featlet(self) -> Featlet {
        match self {
            FreqTransform::Top(n) => Featlet::Top(n),
            FreqTransform::Cnt(c) => Featlet::Cnt(c),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct TemplateCounts {
    counts: HashMap<String, u64>,
    /// All counts, largest first.
    ranked: Vec<u64>,
}

/// Training-data value counts per template, backing the TopN and CntC
/// featlets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreqStats {
    templates: HashMap<String, TemplateCounts>,
}

impl FreqStats {
    pub fn insert(&mut self, template_id: &str, counts: HashMap<String, u64>) {
        let mut ranked: Vec<u64> = counts.values().copied().collect();
        ranked.sort_unstable_by(|a, b| b.cmp(a));
        self.templates
            .insert(template_id.to_string(), TemplateCounts { counts, ranked });
    }

    pub fn contains(&self, template_id: &str) -> bool {
        self.templates.contains_key(template_id)
    }

    pub fn count(&self, template_id: &str, value: &str) -> u64 {
        self.templates
            .get(template_id)
            .and_then(|t| t.counts.get(value))
            .copied()
            .unwrap_or(0)
    }

    /// TopN admits values counted at least as often as the N-th most frequent
    /// one, so ties at the boundary all pass. CntC admits counts of at least
    /// C. Unseen values never pass.
    pub fn admits(&self, template_id: &str, t: FreqTransform, value: &str) -> bool {
        let Some(tc) = self.templates.get(template_id) else {
            return false;
        };
        let c = tc.counts.get(value).copied().unwrap_or(0);
        if c == 0 {
            return false;
        }
        match t {
            FreqTransform::Top(n) => match tc.ranked.get(n as usize - 1) {
                Some(&threshold) => c >= threshold,
                None => true,
            },
            FreqTransform::Cnt(min) => c >= min as u64,
        }
    }

    /// `templateId<TAB>value<TAB>count`, sorted.
    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<(&str, &str, u64)> = self
            .templates
            .iter()
            .flat_map(|(t, tc)| {
                tc.counts
                    .iter()
                    .map(move |(v, &c)| (t.as_str(), v.as_str(), c))
            })
            .collect();
        rows.sort_unstable();
        let mut out = String::new();
        for (t, v, c) in rows {
            let _ = writeln!(out, "{t}\t{v}\t{c}");
        }
        out
    }

    pub fn from_tsv(text: &str, path: &str) -> Result<Self> {
        let mut raw: HashMap<String, HashMap<String, u64>> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(
                    path,
                    i + 1,
                    "expected `template\\tvalue\\tcount`",
                ));
            }
            let c: u64 = cols[2]
                .parse()
                .map_err(|_| Error::parse(path, i + 1, format!("bad count `{}`", cols[2])))?;
            raw.entry(cols[0].to_string())
                .or_default()
                .insert(cols[1].to_string(), c);
        }
        let mut stats = FreqStats::default();
        for (t, counts) in raw {
            stats.insert(&t, counts);
        }
        Ok(stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(pairs: &[(&str, u64)]) -> FreqStats {
        let mut s = FreqStats::default();
        s.insert(
            "T",
            pairs.iter().map(|(v, c)| (v.to_string(), *c)).collect(),
        );
        s
    }

    #[test]
    fn cnt_is_a_threshold() {
        let s = stats(&[("a", 100), ("b", 5), ("c", 1)]);
        let t = FreqTransform::Cnt(8);
        assert!(s.admits("T", t, "a"));
        assert!(!s.admits("T", t, "b"));
        assert!(!s.admits("T", t, "c"));
    }

    #[test]
    fn top_admits_everything_below_support() {
        let s = stats(&[("a", 3), ("b", 2), ("c", 1)]);
        for v in ["a", "b", "c"] {
            assert!(s.admits("T", FreqTransform::Top(10), v));
        }
        assert!(!s.admits("T", FreqTransform::Top(10), "zzz"));
    }

    #[test]
    fn top_admits_ties_at_the_boundary() {
        let mut pairs: Vec<(String, u64)> = (0..9).map(|i| (format!("v{i}"), 10 + i)).collect();
        pairs.push(("x".into(), 4));
        pairs.push(("y".into(), 4));
        pairs.push(("z".into(), 3));
        let mut s = FreqStats::default();
        s.insert("T", pairs.into_iter().collect());
        assert!(s.admits("T", FreqTransform::Top(10), "x"));
        assert!(s.admits("T", FreqTransform::Top(10), "y"));
        assert!(!s.admits("T", FreqTransform::Top(10), "z"));
    }

    #[test]
    fn tsv_round_trip() {
        let s = stats(&[("a", 3), ("b", 2)]);
        assert_eq!(FreqStats::from_tsv(&s.to_tsv(), "f").unwrap(), s);
    }
}
