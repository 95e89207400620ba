//! Synthetic SRL corpus with a planted rule: the role of an argument is a
//! function of the dependency relation of its head, flipped with a small
//! probability.

use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lexicon::synset_key;
use super::{
    write_annotations, write_sentences, Argument, ConsTree, Corpus, DepTree, Lexicons, Sentence,
    Span, SrlAnnotation, Token,
};
use crate::error::{Error, Result};

pub const TRAIN_CORPUS: &str = "train.conll";
pub const TRAIN_ANN: &str = "train.ann";
pub const TEST_CORPUS: &str = "test.conll";
pub const TEST_ANN: &str = "test.ann";

#[derive(Clone, Debug)]
pub struct ToyConfig {
    pub seed: u64,
    pub sentences: usize,
    pub test: usize,
    pub noise: f64,
    /// Keep the flipped labels in the test split too. Off by default, so
    /// the test split scores recovery of the planted rule.
    pub noisy_test: bool,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            seed: 7,
            sentences: 60,
            test: 12,
            noise: 0.05,
            noisy_test: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ToyCorpus {
    pub train: Corpus,
    pub test: Corpus,
    pub lexicons: Lexicons,
}

/// The planted deprel to role mapping.
pub const ROLE_RULE: &[(&str, &str)] = &[
    ("nsubj", "Agent"),
    ("dobj", "Theme"),
    ("iobj", "Recipient"),
    ("prep:loc", "Location"),
    ("prep:tmp", "Time"),
    ("advmod", "Manner"),
];

pub fn role_for(deprel: &str) -> Option<&'static str> {
    ROLE_RULE
        .iter()
        .find(|(d, _)| *d == deprel)
        .map(|(_, r)| *r)
}

struct Verb {
    word: &'static str,
    lemma: &'static str,
    frame: &'static str,
}

const VERBS: &[Verb] = &[
    Verb {
        word: "chased",
        lemma: "chase",
        frame: "Pursuit",
    },
    Verb {
        word: "followed",
        lemma: "follow",
        frame: "Pursuit",
    },
    Verb {
        word: "gave",
        lemma: "give",
        frame: "Giving",
    },
    Verb {
        word: "handed",
        lemma: "hand",
        frame: "Giving",
    },
    Verb {
        word: "ate",
        lemma: "eat",
        frame: "Ingestion",
    },
    Verb {
        word: "drank",
        lemma: "drink",
        frame: "Ingestion",
    },
    Verb {
        word: "saw",
        lemma: "see",
        frame: "Perception",
    },
    Verb {
        word: "heard",
        lemma: "hear",
        frame: "Perception",
    },
];

const DETS: &[&str] = &["the", "a"];
const ADJS: &[&str] = &["red", "big", "small", "old"];
const AGENTS: &[&str] = &["dog", "cat", "boy", "girl", "man", "woman", "bird"];
const THINGS: &[&str] = &["ball", "book", "apple", "water", "song", "cake"];
const PRONOUNS: &[&str] = &["he", "she", "they"];
const LOC_PREPS: &[&str] = &["in", "near"];
const LOC_NOUNS: &[&str] = &["park", "river", "garden", "kitchen"];
const TMP_PREPS: &[&str] = &["after", "during"];
const TMP_NOUNS: &[&str] = &["game", "storm", "morning"];
const ADVERBS: &[&str] = &["quickly", "slowly", "quietly"];

#[derive(Default)]
struct Builder {
    tokens: Vec<Token>,
    head: Vec<Option<usize>>,
    deprel: Vec<String>,
}

impl Builder {
    fn push(&mut self, word: &str, lemma: &str, pos: &str) -> usize {
        let index = self.tokens.len();
        self.tokens.push(Token {
            index,
            word: word.to_string(),
            lemma: lemma.to_string(),
            pos: pos.to_string(),
        });
        self.head.push(None);
        self.deprel.push(String::new());
        index
    }

    fn attach(&mut self, t: usize, head: Option<usize>, rel: &str) {
        self.head[t] = head;
        self.deprel[t] = rel.to_string();
    }

    /// Builds an NP; returns its bracketing, head token and span.
    fn noun_phrase(
        &mut self,
        rng: &mut ChaCha8Rng,
        nouns: &[&str],
        pronoun: bool,
    ) -> (String, usize, Span) {
        let start = self.tokens.len();
        if pronoun {
            let p = *PRONOUNS.choose(rng).unwrap();
            let t = self.push(p, p, "PRP");
            return (format!("(NP {t})"), t, Span::new(start, start + 1));
        }
        let d = *DETS.choose(rng).unwrap();
        let det = self.push(d, d, "DT");
        let adj = if rng.random_bool(0.4) {
            let a = *ADJS.choose(rng).unwrap();
            Some(self.push(a, a, "JJ"))
        } else {
            None
        };
        let n = *nouns.choose(rng).unwrap();
        let noun = self.push(n, n, "NN");
        self.attach(det, Some(noun), "det");
        let text = match adj {
            Some(a) => {
                self.attach(a, Some(noun), "amod");
                format!("(NP {det} (NOM {a} {noun}))")
            }
            None => format!("(NP {det} {noun})"),
        };
        (text, noun, Span::new(start, noun + 1))
    }

    fn prep_phrase(
        &mut self,
        rng: &mut ChaCha8Rng,
        preps: &[&str],
        nouns: &[&str],
    ) -> (String, usize, Span) {
        let start = self.tokens.len();
        let p = *preps.choose(rng).unwrap();
        let prep = self.push(p, p, "IN");
        let (np, noun, span) = self.noun_phrase(rng, nouns, false);
        self.attach(noun, Some(prep), "pobj");
        (
            format!("(PP {prep} {np})"),
            prep,
            Span::new(start, span.end),
        )
    }
}

fn sentence(rng: &mut ChaCha8Rng, id: String, noise: f64) -> (Sentence, SrlAnnotation) {
    let mut b = Builder::default();
    let verb = VERBS.choose(rng).unwrap();
    // (head token, deprel, span)
    let mut args: Vec<(usize, &str, Span)> = Vec::new();

    let pronoun = rng.random_bool(0.25);
    let (subj, subj_head, subj_span) = b.noun_phrase(rng, AGENTS, pronoun);
    args.push((subj_head, "nsubj", subj_span));

    let v = b.push(verb.word, verb.lemma, "VBD");
    let mut vp = format!("(V {v})");
    let mut bare = true;
    if verb.frame == "Giving" && rng.random_bool(0.6) {
        let pronoun = rng.random_bool(0.2);
        let (np, h, s) = b.noun_phrase(rng, AGENTS, pronoun);
        args.push((h, "iobj", s));
        vp = format!("(VP {vp} {np})");
        bare = false;
    }
    if verb.frame == "Giving" || rng.random_bool(0.8) {
        let (np, h, s) = b.noun_phrase(rng, THINGS, false);
        args.push((h, "dobj", s));
        vp = format!("(VP {vp} {np})");
        bare = false;
    }
    if rng.random_bool(0.4) {
        let (pp, h, s) = b.prep_phrase(rng, LOC_PREPS, LOC_NOUNS);
        args.push((h, "prep:loc", s));
        vp = format!("(VP {vp} {pp})");
        bare = false;
    }
    if rng.random_bool(0.3) {
        let (pp, h, s) = b.prep_phrase(rng, TMP_PREPS, TMP_NOUNS);
        args.push((h, "prep:tmp", s));
        vp = format!("(VP {vp} {pp})");
        bare = false;
    }
    if rng.random_bool(0.3) {
        let start = b.tokens.len();
        let a = *ADVERBS.choose(rng).unwrap();
        let adv = b.push(a, a, "RB");
        args.push((adv, "advmod", Span::new(start, start + 1)));
        vp = format!("(VP {vp} (ADVP {adv}))");
        bare = false;
    }
    if bare {
        vp = format!("(VP {vp})");
    }

    b.attach(v, None, "root");
    let roles: Vec<&str> = ROLE_RULE.iter().map(|(_, r)| *r).collect();
    let mut ann_args = Vec::new();
    for (h, rel, span) in args {
        b.attach(h, Some(v), rel);
        let gold = role_for(rel).unwrap();
        let role = if rng.random_bool(noise) {
            let others: Vec<&str> = roles.iter().copied().filter(|r| *r != gold).collect();
            *others.choose(rng).unwrap()
        } else {
            gold
        };
        ann_args.push(Argument {
            span,
            role: role.to_string(),
        });
    }
    ann_args.sort_by_key(|a| a.span);

    let n = b.tokens.len();
    let cons =
        ConsTree::parse(&format!("(S {subj} {vp})"), n).expect("generated tree is well formed");
    let dep = DepTree::new(b.head, b.deprel).expect("generated dependencies form a tree");
    let ann = SrlAnnotation {
        sentence_id: id.clone(),
        target: Span::new(v, v + 1),
        frame: verb.frame.to_string(),
        args: ann_args,
    };
    (
        Sentence {
            id,
            tokens: b.tokens,
            dep,
            cons,
        },
        ann,
    )
}

fn lexicons() -> Lexicons {
    let mut lex = Lexicons::default();
    let groups: [(&[&str], &str, &str); 9] = [
        (DETS, "DT", "00"),
        (ADJS, "JJ", "010"),
        (AGENTS, "NN", "0110"),
        (THINGS, "NN", "0111"),
        (PRONOUNS, "PRP", "10"),
        (LOC_PREPS, "IN", "1100"),
        (TMP_PREPS, "IN", "1101"),
        (LOC_NOUNS, "NN", "1110"),
        (TMP_NOUNS, "NN", "1111"),
    ];
    for (words, pos, cluster) in groups {
        for (i, w) in words.iter().enumerate() {
            lex.brown256.insert(w.to_string(), cluster.to_string());
            lex.brown1000
                .insert(w.to_string(), format!("{cluster}{}", i % 2));
            if pos == "NN" || pos == "JJ" {
                let tag = if pos == "NN" { "n" } else { "a" };
                lex.synsets
                    .insert(synset_key(w, pos), format!("{w}.{tag}.01"));
            }
        }
    }
    for a in ADVERBS {
        lex.brown256.insert(a.to_string(), "001".into());
        lex.brown1000.insert(a.to_string(), "0010".into());
    }
    for v in VERBS {
        let cluster = match v.frame {
            "Pursuit" => "1000",
            "Giving" => "1001",
            "Ingestion" => "1010",
            _ => "1011",
        };
        lex.brown256.insert(v.word.to_string(), cluster.into());
        lex.brown1000
            .insert(v.word.to_string(), format!("{cluster}0"));
        lex.synsets
            .insert(synset_key(v.lemma, "VBD"), format!("{}.v.01", v.lemma));
    }
    lex
}

pub fn generate(cfg: &ToyConfig) -> ToyCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut sents, mut anns) = (Vec::new(), Vec::new());
    for i in 0..cfg.sentences {
        let (s, a) = sentence(&mut rng, format!("s{i:03}"), cfg.noise);
        sents.push(s);
        anns.push(a);
    }
    let split = cfg.sentences - cfg.test.min(cfg.sentences);
    let test_s = sents.split_off(split);
    let mut test_a = anns.split_off(split);
    if !cfg.noisy_test {
        for (s, a) in test_s.iter().zip(&mut test_a) {
            for x in &mut a.args {
                let rel = s.dep.deprel(s.head_token(x.span));
                x.role = role_for(rel)
                    .expect("generated deprels have a role")
                    .to_string();
            }
        }
    }
    ToyCorpus {
        train: Corpus::new(sents, anns, Vec::new()),
        test: Corpus::new(test_s, test_a, Vec::new()),
        lexicons: lexicons(),
    }
}

impl ToyCorpus {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, text: String| {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| Error::io(&p, e))
        };
        put(TRAIN_CORPUS, write_sentences(&self.train.sentences))?;
        put(TRAIN_ANN, write_annotations(&self.train.annotations))?;
        put(TEST_CORPUS, write_sentences(&self.test.sentences))?;
        put(TEST_ANN, write_annotations(&self.test.annotations))?;
        self.lexicons.write_dir(dir)
    }
}
