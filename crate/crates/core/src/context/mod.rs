//! The featlet machine: a small mutable [`Context`] that featlets read and
//! write, and templates (featlet strings) and products built on top of it.

mod apply;
mod featlet;
mod freq;
mod template;

use std::fmt;
use std::hash::{Hash, Hasher};

use crate::corpus::{Lexicons, NodeId, Sentence, Span};

pub use apply::apply;
pub use featlet::{Attr, Dir, EdgeRepr, Featlet, Field, FieldSet, Kind, REGISTRY_LEN};
pub use freq::{FreqStats, FreqTransform};
pub use template::{
    parse_feature_set, run_product, run_template, write_feature_set, FeatureProduct, Template,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Str(String),
    Int(i64),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => f.write_str(s),
            Value::Int(i) => write!(f, "{i}"),
        }
    }
}

/// One element of the `sequence` field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SeqItem {
    Str(String),
    /// A dependency step between two tokens.
    Dep {
        from: usize,
        to: usize,
    },
    /// A constituency step; the rule read by representers is the one of `to`.
    Cons {
        from: NodeId,
        to: NodeId,
    },
    Token(usize),
}

/// Per-extraction scratchpad. `None` is Nil.
#[derive(Clone, Debug, Default)]
pub struct Context {
    pub token1: Option<usize>,
    pub token2: Option<usize>,
    pub span1: Option<Span>,
    pub span2: Option<Span>,
    pub value: Option<Value>,
    pub sequence: Option<Vec<SeqItem>>,
    pub applied: Vec<Featlet>,
    pub outputs: Vec<String>,
}

impl Context {
    /// Field-wise equality ignoring the applied list.
    pub fn same_state(&self, other: &Context) -> bool {
        self.token1 == other.token1
            && self.token2 == other.token2
            && self.span1 == other.span1
            && self.span2 == other.span2
            && self.value == other.value
            && self.sequence == other.sequence
            && self.outputs == other.outputs
    }

    pub fn hash_state<H: Hasher>(&self, h: &mut H) {
        self.token1.hash(h);
        self.token2.hash(h);
        self.span1.hash(h);
        self.span2.hash(h);
        self.value.hash(h);
        self.sequence.hash(h);
        self.outputs.hash(h);
    }
}

/// One extraction site: a target, optionally a candidate argument, and
/// optionally a (hypothesized or gold) role.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    /// Position of the sentence in its corpus.
    pub sentence: usize,
    pub target: Span,
    pub target_head: usize,
    pub frame: String,
    pub arg: Option<Span>,
    pub arg_head: Option<usize>,
    pub role: Option<String>,
    pub gold: bool,
}

impl Instance {
    pub fn new(sentence: usize, sent: &Sentence, target: Span, frame: &str) -> Self {
        Instance {
            sentence,
            target,
            target_head: sent.head_token(target),
            frame: frame.to_string(),
            arg: None,
            arg_head: None,
            role: None,
            gold: false,
        }
    }

    pub fn with_arg(mut self, sent: &Sentence, arg: Span) -> Self {
        self.arg = Some(arg);
        self.arg_head = Some(sent.head_token(arg));
        self
    }

    pub fn with_role(mut self, role: &str) -> Self {
        self.role = Some(role.to_string());
        self
    }

    /// The same instance on [`Sentence::mirrored`].
    pub fn mirrored(&self, n: usize) -> Instance {
        let flip = |s: Span| Span::new(n - s.end, n - s.start);
        Instance {
            target: flip(self.target),
            target_head: n - 1 - self.target_head,
            arg: self.arg.map(flip),
            arg_head: self.arg_head.map(|h| n - 1 - h),
            ..self.clone()
        }
    }
}

/// Everything a featlet may read besides the context.
#[derive(Clone, Copy)]
pub struct Env<'a> {
    pub sent: &'a Sentence,
    pub lex: &'a Lexicons,
    pub inst: &'a Instance,
    pub freq: Option<&'a FreqStats>,
}
