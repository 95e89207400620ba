use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::context::{run_template, Env, FreqStats, FreqTransform, Instance, Template};
use crate::corpus::{Corpus, Lexicons};
use crate::error::{Error, Result};

/// Counts every value each template emits over `instances`. Workers keep
/// their own tables, merged by summation.
pub fn count_values(
    templates: &[Template],
    corpus: &Corpus,
    lex: &Lexicons,
    instances: &[Instance],
) -> FreqStats {
    let empty = || vec![HashMap::<String, u64>::new(); templates.len()];
    let tables = instances
        .par_iter()
        .fold(empty, |mut acc, inst| {
            let env = Env {
                sent: &corpus.sentences[inst.sentence],
                lex,
                inst,
                freq: None,
            };
            for (t, table) in templates.iter().zip(acc.iter_mut()) {
                for v in run_template(t, &env) {
                    *table.entry(v).or_insert(0) += 1;
                }
            }
            acc
        })
        .reduce(empty, |mut a, b| {
            for (ta, tb) in a.iter_mut().zip(b) {
                for (v, c) in tb {
                    *ta.entry(v).or_insert(0) += c;
                }
            }
            a
        });
    let mut stats = FreqStats::default();
    for (t, table) in templates.iter().zip(tables) {
        stats.insert(t.id(), table);
    }
    stats
}

/// Each template followed by its five transformed variants.
pub fn apply_freq_transforms(templates: &[Template]) -> Vec<Template> {
    let mut out = Vec::with_capacity(templates.len() * (1 + FreqTransform::ALL.len()));
    for t in templates {
        out.push(t.clone());
        for x in FreqTransform::ALL {
            out.push(t.with(x.featlet()));
        }
    }
    out
}

/// One template id per line.
pub fn write_inventory(header: &[String], templates: &[Template]) -> String {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    for t in templates {
        let _ = writeln!(out, "{t}");
    }
    out
}

pub fn parse_inventory(text: &str, path: &str) -> Result<Vec<Template>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            l.trim()
                .parse()
                .map_err(|e: Error| Error::parse(path, i + 1, e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::toy::{generate, ToyConfig};
    use crate::discovery::gold_instances;

    fn t(s: &str) -> Template {
        s.parse().unwrap()
    }

    #[test]
    fn six_per_template() {
        let out = apply_freq_transforms(&[t("ArgHead+Word"), t("Role")]);
        assert_eq!(out.len(), 12);
        assert_eq!(out[1].id(), "ArgHead+Word+Top10");
        assert_eq!(out[11].id(), "Role+Cnt16");
    }

    #[test]
    fn transformed_values_are_admitted_subsets() {
        let toy = generate(&ToyConfig::default());
        let insts = gold_instances(&toy.train);
        let base = vec![t("ArgHead+Word"), t("ArgHead+ParentD+SeqMapDepRel+Bag")];
        let stats = count_values(&base, &toy.train, &toy.lexicons, &insts);
        for tt in apply_freq_transforms(&base)
            .into_iter()
            .filter(|t| t.len() > 1)
        {
            if base.contains(&tt) {
                continue;
            }
            let prefix = Template::new(tt.featlets()[..tt.len() - 1].to_vec()).unwrap();
            for inst in &insts {
                let mut env = Env {
                    sent: &toy.train.sentences[inst.sentence],
                    lex: &toy.lexicons,
                    inst,
                    freq: Some(&stats),
                };
                let got = run_template(&tt, &env);
                env.freq = None;
                let all = run_template(&prefix, &env);
                assert!(got.iter().all(|v| all.contains(v)), "{tt}");
            }
        }
    }

    #[test]
    fn top10_matches_sorting_by_frequency() {
        let toy = generate(&ToyConfig::default());
        let insts = gold_instances(&toy.train);
        let base = t("ArgHead+Lemma");
        let stats = count_values(
            std::slice::from_ref(&base),
            &toy.train,
            &toy.lexicons,
            &insts,
        );

        let mut counts: HashMap<String, u64> = HashMap::new();
        for inst in &insts {
            let env = Env {
                sent: &toy.train.sentences[inst.sentence],
                lex: &toy.lexicons,
                inst,
                freq: None,
            };
            for v in run_template(&base, &env) {
                *counts.entry(v).or_default() += 1;
            }
        }
        let mut sorted: Vec<u64> = counts.values().copied().collect();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let cutoff = sorted.get(9).copied().unwrap_or(0);
        for (v, c) in &counts {
            assert_eq!(
                stats.admits(base.id(), FreqTransform::Top(10), v),
                *c >= cutoff,
                "{v}"
            );
        }
    }

    #[test]
    fn inventory_round_trip() {
        let ts = vec![t("ArgHead+Word"), t("Role+Cnt8")];
        let text = write_inventory(&["x".into()], &ts);
        assert_eq!(parse_inventory(&text, "f").unwrap(), ts);
        let err = parse_inventory("Role\nNope\n", "inv").unwrap_err();
        assert!(err.to_string().starts_with("inv:2:"));
    }
}
