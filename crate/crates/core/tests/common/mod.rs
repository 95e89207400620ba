#![allow(dead_code)]

use std::sync::OnceLock;

use featlets::context::{Env, Instance};
use featlets::corpus::toy::{generate, ToyConfig, ToyCorpus};
use featlets::corpus::{ConsTree, DepTree, Lexicons, Sentence, Span, Token};

/// John(0) McDonalds(1) chased(2) the(3) red(4) dog(5) in(6) Paris(7)
pub fn sentence() -> Sentence {
    let words = [
        ("John", "NNP", Some(1), "compound"),
        ("McDonalds", "NNP", Some(2), "nsubj"),
        ("chased", "VBD", None, "root"),
        ("the", "DT", Some(5), "det"),
        ("red", "JJ", Some(5), "amod"),
        ("dog", "NN", Some(2), "dobj"),
        ("in", "IN", Some(2), "prep:loc"),
        ("Paris", "NNP", Some(6), "pobj"),
    ];
    let tokens = words
        .iter()
        .enumerate()
        .map(|(i, (w, p, _, _))| Token {
            index: i,
            word: w.to_string(),
            lemma: w.to_lowercase(),
            pos: p.to_string(),
        })
        .collect();
    Sentence {
        id: "t".into(),
        tokens,
        dep: DepTree::new(
            words.iter().map(|w| w.2).collect(),
            words.iter().map(|w| w.3.to_string()).collect(),
        )
        .unwrap(),
        cons: ConsTree::parse(
            "(S (NP 0 1) (VP (VP (V 2) (NP 3 (NOM 4 5))) (PP 6 (NP 7))))",
            8,
        )
        .unwrap(),
    }
}

/// Target "chased", argument "the red dog" as Theme.
pub fn instance(sent: &Sentence) -> Instance {
    Instance::new(0, sent, Span::new(2, 3), "Pursuit")
        .with_arg(sent, Span::new(3, 6))
        .with_role("Theme")
}

pub fn env<'a>(sent: &'a Sentence, lex: &'a Lexicons, inst: &'a Instance) -> Env<'a> {
    Env {
        sent,
        lex,
        inst,
        freq: None,
    }
}

pub fn toy() -> &'static ToyCorpus {
    static TOY: OnceLock<ToyCorpus> = OnceLock::new();
    TOY.get_or_init(|| generate(&ToyConfig::default()))
}

/// Every (target, argument, role) instance of the toy training split.
pub fn toy_instances() -> &'static [Instance] {
    static INSTS: OnceLock<Vec<Instance>> = OnceLock::new();
    INSTS.get_or_init(|| featlets::discovery::gold_instances(&toy().train))
}
