use std::collections::HashSet;
use std::hash::{Hash, Hasher};
use std::sync::RwLock;

use log::{debug, info};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use xxhash_rust::xxh3::Xxh3;

use crate::context::{apply, Context, Env, Featlet, Field, FieldSet, Instance, Kind, Template};
use crate::corpus::{Corpus, Lexicons};
use crate::error::{Error, Result};

/// Sibling groups expanded per parallel batch. Bounds the memory held by
/// candidates waiting for the sequential merge.
const BATCH: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_len: usize,
    pub probes: usize,
    pub min_fire: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_len: 6,
            probes: 50,
            min_fire: 2,
            seed: 1,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_len == 0 || self.max_len > 8 {
            return Err(Error::Invalid(format!(
                "max_len must be in 1..=8, got {}",
                self.max_len
            )));
        }
        if self.min_fire > self.probes {
            return Err(Error::Invalid(format!(
                "min_fire {} exceeds probe count {}",
                self.min_fire, self.probes
            )));
        }
        Ok(())
    }
}

/// One instance per annotated argument, carrying its gold role.
pub fn gold_instances(corpus: &Corpus) -> Vec<Instance> {
    let mut out = Vec::new();
    for ann in &corpus.annotations {
        let Some(si) = corpus.sentence_index(&ann.sentence_id) else {
            continue;
        };
        let sent = &corpus.sentences[si];
        for arg in &ann.args {
            let mut inst = Instance::new(si, sent, ann.target, &ann.frame)
                .with_arg(sent, arg.span)
                .with_role(&arg.role);
            inst.gold = true;
            out.push(inst);
        }
    }
    out
}

/// Samples `cfg.probes` gold instances without replacement, kept in corpus
/// order. Smaller pools are used whole.
pub fn sample_probes(corpus: &Corpus, cfg: &SearchConfig) -> Result<Vec<Instance>> {
    let pool = gold_instances(corpus);
    if pool.is_empty() || cfg.probes == 0 {
        return Err(Error::EmptyProbeSet);
    }
    if pool.len() <= cfg.probes {
        return Ok(pool);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut idx = rand::seq::index::sample(&mut rng, pool.len(), cfg.probes).into_vec();
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| pool[i].clone()).collect())
}

/// Featlets the search may place. Output is implicit and the frequency
/// transforms are appended afterwards.
pub fn search_alphabet() -> Vec<Featlet> {
    Featlet::registry()
        .iter()
        .copied()
        .filter(|f| *f != Featlet::Output && f.kind() != Kind::FreqTransform)
        .collect()
}

/// Static record of which positions in a featlet string have had their
/// effect consumed, and which fields still hold each position's effect.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub(crate) struct Usage {
    len: u8,
    used: u8,
    holders: [u8; 6],
}

impl Usage {
    #[cfg(test)]
    fn of(featlets: &[Featlet]) -> Usage {
        featlets.iter().fold(Usage::default(), |u, &f| u.push(f))
    }

    pub(crate) fn push(mut self, f: Featlet) -> Usage {
        let bit = 1u8 << self.len;
        // ClosedClass only checks token1 to filter a value taken earlier; that
        // check alone does not make a walk to token1 worthwhile.
        let reads = match f {
            Featlet::ClosedClass => f.reads() & !FieldSet::of(Field::Token1),
            _ => f.reads(),
        };
        let (r, c, w, a) = (
            reads.bits(),
            f.clears().bits(),
            f.writes().bits(),
            f.appends().bits(),
        );
        for k in 0..6 {
            let m = 1u8 << k;
            if r & m != 0 {
                self.used |= self.holders[k];
            }
            if c & m != 0 {
                self.holders[k] = 0;
            }
            if w & m != 0 {
                self.holders[k] = bit;
            }
            if a & m != 0 {
                self.holders[k] |= bit;
            }
        }
        if f.produces_output() {
            self.used |= bit;
        }
        self.len += 1;
        self
    }

    fn all(&self) -> u8 {
        ((1u16 << self.len) - 1) as u8
    }

    fn live(&self) -> u8 {
        self.holders.iter().fold(0, |a, h| a | h)
    }

    /// Some position was neither consumed nor can be any more.
    pub(crate) fn has_dead(&self) -> bool {
        self.all() & !self.used & !self.live() != 0
    }

    pub(crate) fn all_used(&self) -> bool {
        self.used == self.all()
    }

    /// The usage after the implicit Output of [`crate::context::run_template`].
    pub(crate) fn finished(self, last: Featlet) -> Usage {
        if last.produces_output() {
            self
        } else {
            self.push(Featlet::Output)
        }
    }

    /// Position-free summary of the pending (unused) positions: the field set
    /// each one still lives in, sorted.
    fn signature(&self) -> [u8; 6] {
        let mut sig = [0u8; 6];
        for (j, slot) in sig.iter_mut().enumerate().take(self.len as usize) {
            if self.used & (1 << j) != 0 {
                continue;
            }
            *slot = (0..6)
                .filter(|&k| self.holders[k] & (1 << j) != 0)
                .fold(0, |a, k| a | (1 << k));
        }
        sig.sort_unstable();
        sig
    }
}

struct Node {
    featlets: Vec<Featlet>,
    usage: Usage,
}

struct Candidate {
    featlets: Vec<Featlet>,
    usage: Usage,
    key: u128,
    /// Hash of the per-probe output lists, when emittable.
    out_key: u128,
    emit: bool,
    extend: bool,
}

struct Search<'a> {
    corpus: &'a Corpus,
    lex: &'a Lexicons,
    probes: &'a [Instance],
    alphabet: Vec<Featlet>,
    cfg: &'a SearchConfig,
    viable: RwLock<FxHashMap<(Usage, usize), bool>>,
}

impl Search<'_> {
    fn env<'b>(&'b self, inst: &'b Instance) -> Env<'b> {
        Env {
            sent: &self.corpus.sentences[inst.sentence],
            lex: self.lex,
            inst,
            freq: None,
        }
    }

    /// Whether at most `remaining` more featlets can get every position of
    /// `usage` read. Static, and ignores ordering rules, so it only
    /// over-approximates.
    fn can_finish(&self, usage: Usage, remaining: usize) -> bool {
        if remaining == 0 {
            return false;
        }
        if let Some(&v) = self
            .viable
            .read()
            .expect("not poisoned")
            .get(&(usage, remaining))
        {
            return v;
        }
        let v = self.alphabet.iter().any(|&f| {
            if f.is_label_extractor() {
                return false;
            }
            let u = usage.push(f);
            !u.has_dead()
                && (u.finished(f).all_used()
                    || (!f.produces_output() && self.can_finish(u, remaining - 1)))
        });
        self.viable
            .write()
            .expect("not poisoned")
            .insert((usage, remaining), v);
        v
    }

    fn run(&self, featlets: &[Featlet]) -> Vec<Option<Context>> {
        self.probes
            .iter()
            .map(|inst| {
                let env = self.env(inst);
                let mut ctx = Context::default();
                featlets
                    .iter()
                    .all(|&f| apply(f, &mut ctx, &env))
                    .then_some(ctx)
            })
            .collect()
    }

    /// Expands siblings that share everything but their last featlet,
    /// replaying the shared prefix once.
    fn expand_group(&self, group: &[Node], last_level: bool) -> Vec<Candidate> {
        let n = group[0].featlets.len();
        let base = self.run(&group[0].featlets[..n - 1]);
        let mut out = Vec::new();
        for node in group {
            let f = node.featlets[n - 1];
            let states: Vec<Option<Context>> = self
                .probes
                .iter()
                .zip(&base)
                .map(|(inst, st)| {
                    let mut ctx = st.clone()?;
                    apply(f, &mut ctx, &self.env(inst)).then_some(ctx)
                })
                .collect();
            out.extend(self.expand(node, &states, last_level));
        }
        out
    }

    fn expand(&self, node: &Node, states: &[Option<Context>], last_level: bool) -> Vec<Candidate> {
        let prev = *node.featlets.last().expect("nodes are nonempty");
        let mut out = Vec::new();
        for &f in &self.alphabet {
            if f.is_label_extractor() && !(prev.is_label_extractor() && f.index() > prev.index()) {
                continue;
            }
            let usage = node.usage.push(f);
            if usage.has_dead() {
                continue;
            }
            let emittable = usage.finished(f).all_used();
            let extend = !last_level
                && !f.produces_output()
                && self.can_finish(usage, self.cfg.max_len - node.featlets.len() - 1);
            if !emittable && !extend {
                continue;
            }
            if let Some(c) = self.evaluate(states, f, usage, emittable, extend, &node.featlets) {
                out.push(c);
            }
        }
        out
    }

    fn evaluate(
        &self,
        states: &[Option<Context>],
        f: Featlet,
        usage: Usage,
        emittable: bool,
        extend: bool,
        prefix: &[Featlet],
    ) -> Option<Candidate> {
        let mut h = Xxh3::new();
        // Per probe, 0 for no output and otherwise the first probe index
        // with the same output set, so only the partition is compared.
        let mut classes: FxHashMap<Vec<String>, u32> = FxHashMap::default();
        let mut partition = Vec::with_capacity(if emittable { states.len() } else { 0 });
        let (mut alive, mut changed, mut fires) = (0usize, false, 0usize);
        for (inst, st) in self.probes.iter().zip(states) {
            let Some(st) = st else {
                h.write_u8(0);
                partition.push(0);
                continue;
            };
            let env = self.env(inst);
            let mut ctx = st.clone();
            if !apply(f, &mut ctx, &env) {
                h.write_u8(0);
                partition.push(0);
                continue;
            }
            alive += 1;
            changed |= !ctx.same_state(st);
            h.write_u8(1);
            ctx.hash_state(&mut h);
            if !emittable {
                continue;
            }
            let fired = if f.produces_output() {
                !ctx.outputs.is_empty()
            } else {
                apply(Featlet::Output, &mut ctx, &env) && !ctx.outputs.is_empty()
            };
            if fired {
                fires += 1;
                let mut v = std::mem::take(&mut ctx.outputs);
                v.sort_unstable();
                v.dedup();
                let next = classes.len() as u32 + 1;
                partition.push(*classes.entry(v).or_insert(next));
            } else {
                partition.push(0);
            }
        }
        if !changed || alive < self.cfg.min_fire {
            return None;
        }
        usage.signature().hash(&mut h);
        let key = h.digest128();
        let mut o = Xxh3::new();
        partition.iter().for_each(|&c| o.write_u32(c));
        let out_key = o.digest128();
        let mut featlets = prefix.to_vec();
        featlets.push(f);
        Some(Candidate {
            featlets,
            usage,
            key,
            out_key,
            emit: emittable && fires >= self.cfg.min_fire,
            extend,
        })
    }
}

/// Breadth-first search over featlet strings up to `cfg.max_len`.
///
/// A string is kept when it opens with a block of label extractors in
/// registry order, every featlet succeeds and changes the context on some
/// probe, every featlet's effect is eventually read, and the implicit Output
/// fires on at least `cfg.min_fire` probes. Strings whose probe states and
/// pending reads repeat an earlier string's are dropped. The result is in
/// discovery order and depends only on the corpus and `cfg`.
pub fn enumerate_templates(
    corpus: &Corpus,
    lex: &Lexicons,
    cfg: &SearchConfig,
) -> Result<Vec<Template>> {
    cfg.validate()?;
    let probes = sample_probes(corpus, cfg)?;
    let search = Search {
        corpus,
        lex,
        probes: &probes,
        alphabet: search_alphabet(),
        cfg,
        viable: RwLock::new(FxHashMap::default()),
    };

    let mut seen = Seen::default();
    let mut templates = Vec::new();
    let roots: Vec<Node> = search
        .alphabet
        .iter()
        .filter(|f| f.is_label_extractor())
        .map(|&f| Node {
            featlets: vec![f],
            usage: Usage::default().push(f),
        })
        .collect();

    // Level one is evaluated like any other candidate, against an empty
    // context.
    let mut frontier = Vec::new();
    for node in roots {
        let states = vec![Some(Context::default()); probes.len()];
        let f = node.featlets[0];
        let emittable = node.usage.finished(f).all_used();
        let extend = search.can_finish(node.usage, cfg.max_len - 1);
        if let Some(c) = search.evaluate(&states, f, node.usage, emittable, extend, &[]) {
            merge(c, &mut seen, &mut templates, &mut frontier);
        }
    }

    for len in 2..=cfg.max_len {
        let last_level = len == cfg.max_len;
        let mut next = Vec::new();
        let mut candidates = 0usize;
        let groups: Vec<&[Node]> = frontier
            .chunk_by(|a, b| a.featlets[..len - 2] == b.featlets[..len - 2])
            .collect();
        for batch in groups.chunks(BATCH) {
            let expanded: Vec<Vec<Candidate>> = batch
                .par_iter()
                .map(|g| search.expand_group(g, last_level))
                .collect();
            for c in expanded.into_iter().flatten() {
                candidates += 1;
                merge(c, &mut seen, &mut templates, &mut next);
            }
        }
        info!(
            "length {len}: {} nodes expanded, {candidates} candidates, {} templates so far",
            frontier.len(),
            templates.len()
        );
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    debug!("{} distinct probe states", seen.states.len());
    Ok(templates)
}

#[derive(Default)]
struct Seen {
    states: HashSet<u128>,
    outputs: HashSet<u128>,
}

fn merge(c: Candidate, seen: &mut Seen, templates: &mut Vec<Template>, next: &mut Vec<Node>) {
    if !seen.states.insert(c.key) {
        return;
    }
    if c.emit && seen.outputs.insert(c.out_key) {
        templates.push(Template::new(c.featlets.clone()).expect("nonempty"));
    }
    if c.extend {
        next.push(Node {
            featlets: c.featlets,
            usage: c.usage,
        });
    }
}

/// The per-prefix conditions a returned template must satisfy: each featlet
/// succeeds and changes the context on some probe.
pub fn prefixes_change(t: &Template, corpus: &Corpus, lex: &Lexicons, probes: &[Instance]) -> bool {
    (1..=t.len()).all(|k| {
        let (prefix, f) = (&t.featlets()[..k - 1], t.featlets()[k - 1]);
        probes.iter().any(|inst| {
            let env = Env {
                sent: &corpus.sentences[inst.sentence],
                lex,
                inst,
                freq: None,
            };
            let mut ctx = Context::default();
            if !prefix.iter().all(|&g| apply(g, &mut ctx, &env)) {
                return false;
            }
            let before = ctx.clone();
            apply(f, &mut ctx, &env) && !ctx.same_state(&before)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::toy::{generate, ToyConfig};

    fn f(s: &str) -> Featlet {
        s.parse().unwrap()
    }

    fn usage(s: &str) -> Usage {
        Usage::of(&s.split('+').map(f).collect::<Vec<_>>())
    }

    #[test]
    fn usage_tracks_reads() {
        assert!(usage("ArgHead+Word").finished(f("Word")).all_used());
        assert!(!usage("ArgHead").finished(f("ArgHead")).all_used());
        assert!(usage("ArgHead+Role+ParentD+SeqMapDepRel+Bag").all_used());
        // the arg head is overwritten before anything reads it
        assert!(usage("ArgHead+TargetHead+Token2ToToken1").has_dead());
        assert!(!usage("ArgHead+TargetHead").has_dead());
        assert!(usage("ArgHead+ParentD+Word").finished(f("Word")).all_used());
        // the walk is appended but never represented
        assert!(!usage("ArgHead+Word+ParentD")
            .finished(f("ParentD"))
            .all_used());
    }

    #[test]
    fn signature_ignores_positions() {
        let a = usage("ArgHead+Role");
        let b = usage("Role+ArgHead");
        assert_eq!(a.signature(), b.signature());
        assert_ne!(a.signature(), usage("ArgHead").signature());
    }

    #[test]
    fn probes_are_seeded_and_sorted() {
        let toy = generate(&ToyConfig::default());
        let cfg = SearchConfig::default();
        let a = sample_probes(&toy.train, &cfg).unwrap();
        let b = sample_probes(&toy.train, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        assert!(a.iter().all(|i| i.gold && i.role.is_some()));
        let other = sample_probes(&toy.train, &SearchConfig { seed: 9, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn empty_corpus_has_no_probes() {
        let err = sample_probes(&Corpus::default(), &SearchConfig::default());
        assert!(matches!(err, Err(Error::EmptyProbeSet)));
    }

    #[test]
    fn config_is_validated() {
        let bad = SearchConfig {
            min_fire: 60,
            ..SearchConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(SearchConfig {
            max_len: 0,
            ..SearchConfig::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn short_search_finds_the_basics() {
        let toy = generate(&ToyConfig::default());
        let cfg = SearchConfig {
            max_len: 3,
            ..SearchConfig::default()
        };
        let ts = enumerate_templates(&toy.train, &toy.lexicons, &cfg).unwrap();
        let ids: Vec<&str> = ts.iter().map(Template::id).collect();
        assert!(ids.contains(&"ArgHead+Word"));
        assert!(ids.contains(&"Role"));
        assert!(!ids.contains(&"ArgSpan+Shape"));
        assert!(ts
            .iter()
            .all(|t| t.len() <= 3 && t.featlets()[0].is_label_extractor()));
        let probes = sample_probes(&toy.train, &cfg).unwrap();
        for t in &ts {
            assert!(
                prefixes_change(t, &toy.train, &toy.lexicons, &probes),
                "{t}"
            );
        }
    }
}
