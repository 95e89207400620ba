//! Annotated sentences, syntactic trees and lexicons.
//!
//! Everything here is immutable once loaded and can be shared freely between
//! worker threads.

mod cons;
mod dep;
mod io;
mod lexicon;
pub mod toy;

use std::collections::HashMap;
use std::fmt;

pub use cons::{ConsChild, ConsNode, ConsTree, NodeId};
pub use dep::DepTree;
pub use io::{
    load_corpus, parse_annotations, parse_sentences, write_annotations, write_sentences,
    ParsedSentences,
};
pub use lexicon::{Lexicons, BROWN1000_FILE, BROWN256_FILE, CLOSED_CLASS_FILE, SYNSETS_FILE, UNK};

/// Half-open token range `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, token: usize) -> bool {
        self.start <= token && token < self.end
    }
}

/// `start-end`, nonempty.
impl std::str::FromStr for Span {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        let bad = || crate::Error::Invalid(format!("bad span `{s}`, expected `start-end`"));
        let (a, b) = s.split_once('-').ok_or_else(bad)?;
        let span = Span::new(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        if span.is_empty() {
            return Err(bad());
        }
        Ok(span)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub word: String,
    pub lemma: String,
    pub pos: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub id: String,
    pub tokens: Vec<Token>,
    pub dep: DepTree,
    pub cons: ConsTree,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Head of a span under the external-head rule, see [`DepTree::head_of_span`].
    pub fn head_token(&self, span: Span) -> usize {
        self.dep.head_of_span(span)
    }

    /// Grammar rule of a constituent, e.g. `S->NP_VP`. Token leaves are
    /// written with their POS tag.
    pub fn rule(&self, node: NodeId) -> String {
        let n = self.cons.node(node);
        let mut out = String::with_capacity(16);
        out.push_str(&n.label);
        out.push_str("->");
        for (i, child) in n.children.iter().enumerate() {
            if i > 0 {
                out.push('_');
            }
            match *child {
                ConsChild::Node(c) => out.push_str(&self.cons.node(c).label),
                ConsChild::Leaf(t) => out.push_str(&self.tokens[t].pos),
            }
        }
        out
    }

    /// The same sentence read right to left. Token `i` becomes `len - 1 - i`
    /// and every child list is reversed.
    pub fn mirrored(&self) -> Sentence {
        let n = self.len();
        let flip = |i: usize| n - 1 - i;
        let tokens = self
            .tokens
            .iter()
            .rev()
            .enumerate()
            .map(|(i, t)| Token {
                index: i,
                ..t.clone()
            })
            .collect();
        let mut head = vec![None; n];
        let mut deprel = vec![String::new(); n];
        for t in 0..n {
            head[flip(t)] = self.dep.head(t).map(flip);
            deprel[flip(t)] = self.dep.deprel(t).to_string();
        }
        let dep = DepTree::new(head, deprel).expect("mirroring preserves tree shape");
        Sentence {
            id: format!("{}~mirror", self.id),
            tokens,
            dep,
            cons: self.cons.mirrored(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Argument {
    pub span: Span,
    pub role: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SrlAnnotation {
    pub sentence_id: String,
    pub target: Span,
    pub frame: String,
    pub args: Vec<Argument>,
}

/// A sentence dropped during loading because it violated a tree invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    pub sentence_id: String,
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub annotations: Vec<SrlAnnotation>,
    pub rejected: Vec<Rejection>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(
        sentences: Vec<Sentence>,
        annotations: Vec<SrlAnnotation>,
        rejected: Vec<Rejection>,
    ) -> Self {
        let index = sentences
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.clone(), i))
            .collect();
        Corpus {
            sentences,
            annotations,
            rejected,
            index,
        }
    }

    pub fn sentence_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn sentence(&self, id: &str) -> Option<&Sentence> {
        self.sentence_index(id).map(|i| &self.sentences[i])
    }
}
