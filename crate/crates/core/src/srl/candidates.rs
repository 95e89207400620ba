use std::collections::BTreeSet;

use crate::context::Instance;
use crate::corpus::{Corpus, Sentence, Span, SrlAnnotation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Constituent,
    GoldUnion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Candidate {
    pub span: Span,
    pub source: Source,
}

/// Every constituent span, plus the gold argument spans when `gold` is
/// given. Sorted by span, deduplicated (a constituent wins over a gold
/// span).
pub fn generate_candidates(sent: &Sentence, gold: Option<&SrlAnnotation>) -> Vec<Candidate> {
    let mut spans: BTreeSet<Span> = BTreeSet::new();
    let mut out: Vec<Candidate> = Vec::new();
    for node in sent.cons.nodes() {
        if spans.insert(node.span) {
            out.push(Candidate {
                span: node.span,
                source: Source::Constituent,
            });
        }
    }
    if let Some(ann) = gold {
        for a in &ann.args {
            if a.span.end <= sent.len() && !a.span.is_empty() && spans.insert(a.span) {
                out.push(Candidate {
                    span: a.span,
                    source: Source::GoldUnion,
                });
            }
        }
    }
    out.sort();
    out
}

/// Sorted distinct roles of a corpus.
pub fn role_inventory(corpus: &Corpus) -> Vec<String> {
    let set: BTreeSet<&str> = corpus
        .annotations
        .iter()
        .flat_map(|a| a.args.iter().map(|x| x.role.as_str()))
        .collect();
    set.into_iter().map(str::to_string).collect()
}

/// Argument identification instances: one per candidate of each target,
/// labeled by whether the span is a gold argument.
pub fn argid_instances(
    corpus: &Corpus,
    anns: &[&SrlAnnotation],
    gold_union: bool,
) -> Vec<Instance> {
    let mut out = Vec::new();
    for ann in anns {
        let Some(si) = corpus.sentence_index(&ann.sentence_id) else {
            continue;
        };
        let sent = &corpus.sentences[si];
        for c in generate_candidates(sent, gold_union.then_some(*ann)) {
            let mut inst = Instance::new(si, sent, ann.target, &ann.frame).with_arg(sent, c.span);
            inst.gold = ann.args.iter().any(|a| a.span == c.span);
            out.push(inst);
        }
    }
    out
}

/// Role classification instances: every gold argument paired with every
/// role, positive when the role is the gold one.
pub fn roleclass_instances(
    corpus: &Corpus,
    anns: &[&SrlAnnotation],
    roles: &[String],
) -> Vec<Instance> {
    let mut out = Vec::new();
    for ann in anns {
        let Some(si) = corpus.sentence_index(&ann.sentence_id) else {
            continue;
        };
        let sent = &corpus.sentences[si];
        for arg in &ann.args {
            let base = Instance::new(si, sent, ann.target, &ann.frame).with_arg(sent, arg.span);
            for r in roles {
                let mut inst = base.clone().with_role(r);
                inst.gold = *r == arg.role;
                out.push(inst);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::toy::{generate, ToyConfig};
    use crate::corpus::Argument;

    #[test]
    fn constituents_and_gold_union() {
        let toy = generate(&ToyConfig::default());
        let sent = &toy.train.sentences[0];
        let plain = generate_candidates(sent, None);
        let distinct: BTreeSet<Span> = sent.cons.nodes().iter().map(|n| n.span).collect();
        assert_eq!(plain.len(), distinct.len());
        assert!(plain.iter().all(|c| c.source == Source::Constituent));

        let mut ann = toy.train.annotations[0].clone();
        let odd = Span::new(0, sent.len() - 1);
        assert!(sent.cons.node_at(odd).is_none());
        ann.args.push(Argument {
            span: odd,
            role: "Agent".into(),
        });
        let with = generate_candidates(sent, Some(&ann));
        assert_eq!(with.len(), plain.len() + 1);
        assert!(with
            .iter()
            .any(|c| c.span == odd && c.source == Source::GoldUnion));
    }

    #[test]
    fn toy_gold_spans_are_constituents() {
        let toy = generate(&ToyConfig::default());
        for ann in &toy.train.annotations {
            let sent = toy.train.sentence(&ann.sentence_id).unwrap();
            let cands = generate_candidates(sent, None);
            for a in &ann.args {
                assert!(cands.iter().any(|c| c.span == a.span));
            }
        }
    }

    #[test]
    fn stage_instances() {
        let toy = generate(&ToyConfig::default());
        let anns: Vec<&SrlAnnotation> = toy.train.annotations.iter().take(5).collect();
        let roles = role_inventory(&toy.train);
        let arg = argid_instances(&toy.train, &anns, false);
        let gold: usize = anns.iter().map(|a| a.args.len()).sum();
        assert_eq!(arg.iter().filter(|i| i.gold).count(), gold);
        let rc = roleclass_instances(&toy.train, &anns, &roles);
        assert_eq!(rc.len(), gold * roles.len());
        assert_eq!(rc.iter().filter(|i| i.gold).count(), gold);
    }
}
