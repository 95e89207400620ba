use super::featlet::{Attr, Dir, EdgeRepr, Featlet};
use super::{Context, Env, FreqTransform, SeqItem, Value};
use crate::corpus::{NodeId, Sentence, Span};

/// Applies one featlet. Returns `false` on FAIL, in which case the context
/// is left in an unspecified state and must be discarded.
pub fn apply(f: Featlet, ctx: &mut Context, env: &Env) -> bool {
    let ok = step(f, ctx, env).is_some();
    if ok {
        ctx.applied.push(f);
    }
    ok
}

fn step(f: Featlet, ctx: &mut Context, env: &Env) -> Option<()> {
    use Featlet::*;
    let sent = env.sent;
    let inst = env.inst;
    match f {
        TargetSpan => ctx.span2 = Some(inst.target),
        TargetHead => ctx.token2 = Some(inst.target_head),
        ArgSpan => ctx.span1 = Some(inst.arg?),
        ArgHead => ctx.token1 = Some(inst.arg_head?),
        Role => ctx.value = Some(Value::Str(inst.role.clone()?)),
        FrameRole => {
            let role = inst.role.as_ref()?;
            ctx.value = Some(Value::Str(format!("{}.{}", inst.frame, role)));
        }
        Frame => ctx.value = Some(Value::Str(inst.frame.clone())),

        Token(a) => {
            let t = ctx.token1?;
            ctx.value = Some(Value::Str(attr(env, a, t).to_string()));
        }
        DepRel => {
            let t = ctx.token1?;
            ctx.value = Some(Value::Str(sent.dep.deprel(t).to_string()));
        }
        DepthD => {
            let t = ctx.token1?;
            ctx.value = Some(Value::Int(sent.dep.depth(t) as i64));
        }

        Lc => {
            let s = str_value(ctx)?;
            ctx.value = Some(Value::Str(s.to_lowercase()));
        }
        Shape => {
            let s = str_value(ctx)?;
            ctx.value = Some(Value::Str(shape(s)));
        }
        Prefix(n) => {
            let s = str_value(ctx)?;
            ctx.value = Some(Value::Str(s.chars().take(n as usize).collect()));
        }
        ClosedClass => {
            let t = ctx.token1?;
            ctx.value.as_ref()?;
            if !env.lex.is_closed_class(&sent.tokens[t].pos) {
                ctx.value = None;
            }
        }

        ParentD => {
            let t = ctx.token1?;
            let h = sent.dep.head(t)?;
            dep_move(ctx, t, h);
        }
        ChildD(d) => {
            let t = ctx.token1?;
            let kids = sent.dep.children(t);
            let c = match d {
                Dir::Left => kids.first(),
                Dir::Right => kids.last(),
            };
            dep_move(ctx, t, *c?);
        }
        SibD(d) => {
            let t = ctx.token1?;
            let sibs = sent.dep.siblings(t);
            let s = match d {
                Dir::Left => sibs.iter().rev().find(|&&s| s < t),
                Dir::Right => sibs.iter().find(|&&s| s > t),
            };
            dep_move(ctx, t, *s?);
        }
        MostSibD(d) => {
            let t = ctx.token1?;
            let sibs = sent.dep.siblings(t);
            let s = match d {
                Dir::Left => *sibs.first()?,
                Dir::Right => *sibs.last()?,
            };
            if s == t {
                return None;
            }
            dep_move(ctx, t, s);
        }

        Ngrams(n) => reduce(ctx, |items| {
            items.windows(n as usize).map(|w| w.join("_")).collect()
        })?,
        Bag => reduce(ctx, |items| items.to_vec())?,
        SeqN(n) => reduce(ctx, |items| {
            if !items.is_empty() && items.len() <= n as usize {
                vec![items.join("_")]
            } else {
                Vec::new()
            }
        })?,
        CompressRuns => {
            let seq = ctx.sequence.as_mut()?;
            let strs = strings(seq)?;
            *seq = compress_runs(&strs).into_iter().map(SeqItem::Str).collect();
        }

        SeqMapEdge(parent, e) => map_seq(ctx, |item| match *item {
            SeqItem::Dep { from, to } => Some(edge_string(env, from, to, parent, e)),
            _ => None,
        })?,
        SeqMapToken(a) => map_seq(ctx, |item| match *item {
            SeqItem::Token(t) => Some(attr(env, a, t).to_string()),
            _ => None,
        })?,

        ParentC => {
            let node = node_at(sent, ctx.span1?)?;
            let p = sent.cons.wider_parent(node)?;
            cons_move(ctx, sent, node, p);
        }
        ChildC(d) => {
            let node = node_at(sent, ctx.span1?)?;
            let mut kids = sent.cons.node(node).node_children();
            let c = match d {
                Dir::Left => kids.next(),
                Dir::Right => kids.last(),
            }?;
            cons_move(ctx, sent, node, c);
        }
        SibC(d) => {
            let node = node_at(sent, ctx.span1?)?;
            let top = top_of_chain(sent, node);
            let sibs = sent.cons.siblings(top);
            let i = sibs.iter().position(|&s| s == top)?;
            let s = match d {
                Dir::Left => i.checked_sub(1).map(|j| sibs[j]),
                Dir::Right => sibs.get(i + 1).copied(),
            }?;
            cons_move(ctx, sent, node, s);
        }
        MostSibC(d) => {
            let node = node_at(sent, ctx.span1?)?;
            let top = top_of_chain(sent, node);
            let sibs = sent.cons.siblings(top);
            let s = match d {
                Dir::Left => *sibs.first()?,
                Dir::Right => *sibs.last()?,
            };
            if s == top {
                return None;
            }
            cons_move(ctx, sent, node, s);
        }

        CategoryC => map_seq(ctx, |item| match *item {
            SeqItem::Cons { to, .. } => Some(sent.cons.node(to).label.clone()),
            _ => None,
        })?,
        SubCategoryC => map_seq(ctx, |item| match *item {
            SeqItem::Cons { to, .. } => Some(sent.rule(to)),
            _ => None,
        })?,

        ToRootD => {
            let t = ctx.token1?;
            let path = sent.dep.path_to_root(t);
            let seq = ctx.sequence.get_or_insert_with(Vec::new);
            seq.extend(path.windows(2).map(|w| SeqItem::Dep {
                from: w[0],
                to: w[1],
            }));
        }
        CommonParentD => {
            let (a, b) = (ctx.token1?, ctx.token2?);
            let lca = sent.dep.lowest_common_ancestor(a, b);
            let up = sent.dep.path_to_root(a);
            let down = sent.dep.path_to_root(b);
            let seq = ctx.sequence.get_or_insert_with(Vec::new);
            for w in up.windows(2).take_while(|w| w[0] != lca) {
                seq.push(SeqItem::Dep {
                    from: w[0],
                    to: w[1],
                });
            }
            let mut tail: Vec<SeqItem> = down
                .windows(2)
                .take_while(|w| w[0] != lca)
                .map(|w| SeqItem::Dep {
                    from: w[1],
                    to: w[0],
                })
                .collect();
            tail.reverse();
            seq.extend(tail);
        }
        ToRootC => {
            let mut cur = node_at(sent, ctx.span1?)?;
            let seq = ctx.sequence.get_or_insert_with(Vec::new);
            while let Some(p) = sent.cons.node(cur).parent {
                seq.push(SeqItem::Cons { from: cur, to: p });
                cur = p;
            }
        }
        CommonParentC => {
            let a = node_at(sent, ctx.span1?)?;
            let b = node_at(sent, ctx.span2?)?;
            let lca = sent.cons.lowest_common_ancestor(a, b);
            let seq = ctx.sequence.get_or_insert_with(Vec::new);
            let mut cur = a;
            while cur != lca {
                let p = sent.cons.node(cur).parent?;
                seq.push(SeqItem::Cons { from: cur, to: p });
                cur = p;
            }
            let mut tail = Vec::new();
            let mut cur = b;
            while cur != lca {
                let p = sent.cons.node(cur).parent?;
                tail.push(SeqItem::Cons { from: p, to: cur });
                cur = p;
            }
            tail.reverse();
            seq.extend(tail);
        }
        ChildrenD => {
            let t = ctx.token1?;
            let seq = ctx.sequence.get_or_insert_with(Vec::new);
            seq.extend(
                sent.dep
                    .children(t)
                    .iter()
                    .map(|&c| SeqItem::Dep { from: t, to: c }),
            );
        }
        ChildrenC => {
            let node = node_at(sent, ctx.span1?)?;
            let seq = ctx.sequence.get_or_insert_with(Vec::new);
            seq.extend(
                sent.cons
                    .node(node)
                    .node_children()
                    .map(|c| SeqItem::Cons { from: node, to: c }),
            );
        }

        StepL(d) => {
            let t = ctx.token1?;
            ctx.token1 = Some(match d {
                Dir::Left => t.checked_sub(1)?,
                Dir::Right if t + 1 < sent.len() => t + 1,
                Dir::Right => return None,
            });
        }
        Span1StartToEndL => {
            let s = ctx.span1?;
            push_tokens(ctx, s.start..s.end);
        }
        Span1LeftToRightL => {
            let s = ctx.span1?;
            push_tokens(ctx, s.start.saturating_sub(2)..(s.end + 2).min(sent.len()));
        }
        Head1ToSpan1StartL => {
            let (t, s) = (ctx.token1?, ctx.span1?);
            walk_tokens(ctx, t, s.start);
        }
        Head1ToSpan1EndL => {
            let (t, s) = (ctx.token1?, ctx.span1?);
            walk_tokens(ctx, t, s.end - 1);
        }
        Span1ToSpan2L => {
            let (a, b) = (ctx.span1?, ctx.span2?);
            if a.end <= b.start {
                push_tokens(ctx, a.end..b.start);
            } else if b.end <= a.start {
                let seq = ctx.sequence.get_or_insert_with(Vec::new);
                seq.extend((b.end..a.start).rev().map(SeqItem::Token));
            } else {
                ctx.sequence.get_or_insert_with(Vec::new);
            }
        }

        SeqLength => {
            let n = ctx.sequence.as_ref()?.len();
            ctx.value = Some(Value::Int(n as i64));
        }
        DeltaDepthD => {
            let seq = ctx.sequence.as_ref()?;
            let depth = |t: usize| sent.dep.depth(t) as i64;
            let first = match seq.first()? {
                SeqItem::Dep { from, .. } => depth(*from),
                SeqItem::Token(t) => depth(*t),
                _ => return None,
            };
            let last = match seq.last()? {
                SeqItem::Dep { to, .. } => depth(*to),
                SeqItem::Token(t) => depth(*t),
                _ => return None,
            };
            ctx.value = Some(Value::Int(first - last));
        }
        DeltaDepthC => {
            let seq = ctx.sequence.as_ref()?;
            let depth = |n: NodeId| sent.cons.node(n).depth as i64;
            let first = match seq.first()? {
                SeqItem::Cons { from, .. } => depth(*from),
                _ => return None,
            };
            let last = match seq.last()? {
                SeqItem::Cons { to, .. } => depth(*to),
                _ => return None,
            };
            ctx.value = Some(Value::Int(first - last));
        }

        DasBuckets => {
            let v = int_value(ctx)?;
            ctx.value = Some(Value::Str(das_bucket(v)));
        }
        Direction => {
            let v = int_value(ctx)?;
            let s = match v.signum() {
                1 => "+1",
                -1 => "-1",
                _ => "0",
            };
            ctx.value = Some(Value::Str(s.to_string()));
        }

        Output => {
            let v = ctx.value.take()?;
            ctx.outputs.push(v.to_string());
        }
        Span1Start => ctx.token1 = Some(ctx.span1?.start),
        Span1End => ctx.token1 = Some(ctx.span1?.end - 1),
        Span2ToSpan1 => ctx.span1 = Some(ctx.span2?),
        Token2ToToken1 => ctx.token1 = Some(ctx.token2?),

        Top(n) => freq_filter(ctx, env, FreqTransform::Top(n))?,
        Cnt(c) => freq_filter(ctx, env, FreqTransform::Cnt(c))?,
    }
    Some(())
}

pub(crate) fn attr<'a>(env: &Env<'a>, a: Attr, t: usize) -> &'a str {
    let tok = &env.sent.tokens[t];
    match a {
        Attr::Word => &tok.word,
        Attr::Pos => &tok.pos,
        Attr::Lemma => &tok.lemma,
        Attr::WnSynset => env.lex.synset(&tok.lemma, &tok.pos),
        Attr::BrownClust256 => env.lex.brown256(&tok.word),
        Attr::BrownClust1000 => env.lex.brown1000(&tok.word),
    }
}

fn str_value(ctx: &Context) -> Option<&str> {
    match ctx.value.as_ref()? {
        Value::Str(s) => Some(s),
        Value::Int(_) => None,
    }
}

fn int_value(ctx: &Context) -> Option<i64> {
    match ctx.value.as_ref()? {
        Value::Int(i) => Some(*i),
        Value::Str(_) => None,
    }
}

pub fn shape(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_uppercase() {
                'C'
            } else if c.is_lowercase() {
                'c'
            } else if c.is_ascii_digit() {
                'd'
            } else {
                's'
            }
        })
        .collect()
}

/// Bucket edges applied to the magnitude; the sign is kept as a prefix.
const DAS_EDGES: [i64; 8] = [0, 1, 2, 3, 4, 5, 10, 20];

pub fn das_bucket(v: i64) -> String {
    let m = v.abs();
    let sign = match v.signum() {
        1 => "+",
        -1 => "-",
        _ => "",
    };
    let mut lo = 0;
    for &e in &DAS_EDGES {
        if m <= e {
            return if lo == e {
                format!("{sign}{e}")
            } else {
                format!("{sign}{lo}-{e}")
            };
        }
        lo = e + 1;
    }
    format!("{sign}{lo}+")
}

fn dep_move(ctx: &mut Context, from: usize, to: usize) {
    ctx.sequence
        .get_or_insert_with(Vec::new)
        .push(SeqItem::Dep { from, to });
    ctx.token1 = Some(to);
}

fn node_at(sent: &Sentence, span: Span) -> Option<NodeId> {
    sent.cons.node_at(span)
}

/// Highest node of the unary chain containing `node`.
fn top_of_chain(sent: &Sentence, node: NodeId) -> NodeId {
    let span = sent.cons.node(node).span;
    let mut cur = node;
    while let Some(p) = sent.cons.node(cur).parent {
        if sent.cons.node(p).span != span {
            break;
        }
        cur = p;
    }
    cur
}

fn cons_move(ctx: &mut Context, sent: &Sentence, from: NodeId, to: NodeId) {
    ctx.sequence
        .get_or_insert_with(Vec::new)
        .push(SeqItem::Cons { from, to });
    ctx.span1 = Some(sent.cons.node(to).span);
}

fn push_tokens(ctx: &mut Context, range: std::ops::Range<usize>) {
    ctx.sequence
        .get_or_insert_with(Vec::new)
        .extend(range.map(SeqItem::Token));
}

/// Tokens from `from` to `to`, both included, in walking order.
fn walk_tokens(ctx: &mut Context, from: usize, to: usize) {
    let seq = ctx.sequence.get_or_insert_with(Vec::new);
    if from <= to {
        seq.extend((from..=to).map(SeqItem::Token));
    } else {
        seq.extend((to..=from).rev().map(SeqItem::Token));
    }
}

fn strings(seq: &[SeqItem]) -> Option<Vec<String>> {
    seq.iter()
        .map(|i| match i {
            SeqItem::Str(s) => Some(s.clone()),
            _ => None,
        })
        .collect()
}

/// Shared body of Ngrams, Bag and SeqN: consume the sequence and any pending
/// value, emit the produced strings prefixed by the value.
fn reduce(ctx: &mut Context, grams: impl Fn(&[String]) -> Vec<String>) -> Option<()> {
    let seq = ctx.sequence.take()?;
    let items = strings(&seq)?;
    let prefix = ctx.value.take().map(|v| format!("{v}|"));
    for g in grams(&items) {
        match &prefix {
            Some(p) => ctx.outputs.push(format!("{p}{g}")),
            None => ctx.outputs.push(g),
        }
    }
    Some(())
}

fn map_seq(ctx: &mut Context, f: impl Fn(&SeqItem) -> Option<String>) -> Option<()> {
    let seq = ctx.sequence.as_mut()?;
    let mapped: Option<Vec<SeqItem>> = seq.iter().map(|i| f(i).map(SeqItem::Str)).collect();
    *seq = mapped?;
    Some(())
}

/// `X Y Y Z Z Z` becomes `X Y+ Z+`. Items already ending in `+` join runs of
/// their base form, which makes the operation idempotent.
pub fn compress_runs(items: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let key = items[i].trim_end_matches('+');
        let mut j = i + 1;
        while j < items.len() && items[j].trim_end_matches('+') == key {
            j += 1;
        }
        if j - i > 1 || items[i].ends_with('+') {
            out.push(format!("{key}+"));
        } else {
            out.push(items[i].clone());
        }
        i = j;
    }
    out
}

fn edge_string(env: &Env, from: usize, to: usize, parent: Option<Attr>, e: EdgeRepr) -> String {
    let dep = &env.sent.dep;
    let (p, c) = if dep.head(to) == Some(from) {
        (from, to)
    } else if dep.head(from) == Some(to) {
        (to, from)
    } else {
        // sibling step: describe the edge into the destination
        (dep.head(to).unwrap_or(from), to)
    };
    let edge = match e {
        EdgeRepr::DepRel => dep.deprel(c),
        EdgeRepr::Dir if c < p => "L",
        EdgeRepr::Dir => "R",
        EdgeRepr::Star => "*",
    };
    match parent {
        Some(a) => format!("{}/{edge}", attr(env, a, p)),
        None => edge.to_string(),
    }
}

fn freq_filter(ctx: &mut Context, env: &Env, t: FreqTransform) -> Option<()> {
    let stats = env.freq?;
    if let Some(v) = ctx.value.take() {
        ctx.outputs.push(v.to_string());
    }
    let prefix = ctx
        .applied
        .iter()
        .map(|f| f.id())
        .collect::<Vec<_>>()
        .join("+");
    ctx.outputs.retain(|v| stats.admits(&prefix, t, v));
    Some(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::context::Instance;
    use crate::corpus::{ConsTree, DepTree, Lexicons, Token};

    /// John(0) McDonalds(1) chased(2) the(3) red(4) dog(5) in(6) Paris(7)
    pub(crate) fn sentence() -> Sentence {
        let words = [
            ("John", "NNP", 1, "compound"),
            ("McDonalds", "NNP", 2, "nsubj"),
            ("chased", "VBD", -1, "root"),
            ("the", "DT", 5, "det"),
            ("red", "JJ", 5, "amod"),
            ("dog", "NN", 2, "dobj"),
            ("in", "IN", 2, "prep:loc"),
            ("Paris", "NNP", 6, "pobj"),
        ];
        let mut heads: Vec<Option<usize>> = Vec::new();
        let mut rels = Vec::new();
        let tokens = words
            .iter()
            .enumerate()
            .map(|(i, (w, p, h, r))| {
                heads.push(if *h < 0 { None } else { Some(*h as usize) });
                rels.push(r.to_string());
                Token {
                    index: i,
                    word: w.to_string(),
                    lemma: w.to_lowercase(),
                    pos: p.to_string(),
                }
            })
            .collect();
        Sentence {
            id: "t".into(),
            tokens,
            dep: DepTree::new(heads, rels).unwrap(),
            cons: ConsTree::parse(
                "(S (NP 0 1) (VP (VP (V 2) (NP 3 (NOM 4 5))) (PP 6 (NP 7))))",
                8,
            )
            .unwrap(),
        }
    }

    pub(crate) fn instance(sent: &Sentence) -> Instance {
        Instance::new(0, sent, Span::new(2, 3), "Pursuit")
            .with_arg(sent, Span::new(3, 6))
            .with_role("Theme")
    }

    fn run(fs: &[Featlet], ctx: &mut Context) -> bool {
        let sent = sentence();
        let inst = instance(&sent);
        let lex = Lexicons::default();
        let env = Env {
            sent: &sent,
            lex: &lex,
            inst: &inst,
            freq: None,
        };
        fs.iter().all(|&f| apply(f, ctx, &env))
    }

    #[test]
    fn shape_of_mcdonalds() {
        let mut ctx = Context {
            value: Some(Value::Str("McDonalds".into())),
            ..Context::default()
        };
        assert!(run(&[Featlet::Shape], &mut ctx));
        assert_eq!(ctx.value, Some(Value::Str("CcCcccccc".into())));
    }

    #[test]
    fn reading_nil_fails() {
        let mut ctx = Context::default();
        assert!(!run(&[Featlet::Token(Attr::Word)], &mut ctx));
        let mut ctx = Context::default();
        assert!(!run(&[Featlet::Output], &mut ctx));
    }

    #[test]
    fn grandparent_walk() {
        let mut ctx = Context {
            token1: Some(3),
            ..Context::default()
        };
        assert!(run(&[Featlet::ParentD, Featlet::ParentD], &mut ctx));
        assert_eq!(ctx.token1, Some(2));
        assert_eq!(
            ctx.sequence,
            Some(vec![
                SeqItem::Dep { from: 3, to: 5 },
                SeqItem::Dep { from: 5, to: 2 }
            ])
        );
        // and no further: the root has no parent
        assert!(!run(&[Featlet::ParentD], &mut ctx));
    }

    fn strs(items: &[&str]) -> Vec<SeqItem> {
        items.iter().map(|s| SeqItem::Str(s.to_string())).collect()
    }

    #[test]
    fn compress_runs_example() {
        let mut ctx = Context {
            sequence: Some(strs(&["X", "Y", "Y", "Z", "Z", "Z"])),
            ..Context::default()
        };
        assert!(run(&[Featlet::CompressRuns], &mut ctx));
        assert_eq!(ctx.sequence, Some(strs(&["X", "Y+", "Z+"])));
        assert!(ctx.outputs.is_empty());
    }

    #[test]
    fn reducers_clear_the_sequence() {
        for f in [Featlet::Ngrams(2), Featlet::Bag, Featlet::SeqN(3)] {
            let mut ctx = Context {
                sequence: Some(strs(&["a", "b", "c", "d"])),
                value: Some(Value::Str("v".into())),
                ..Context::default()
            };
            assert!(run(&[f], &mut ctx));
            assert_eq!(ctx.sequence, None, "{f}");
            assert_eq!(ctx.value, None, "{f}");
        }
        let mut ctx = Context {
            sequence: Some(strs(&["a", "b", "c"])),
            value: Some(Value::Str("v".into())),
            ..Context::default()
        };
        assert!(run(&[Featlet::Ngrams(2)], &mut ctx));
        assert_eq!(ctx.outputs, ["v|a_b", "v|b_c"]);
    }

    #[test]
    fn seqn_respects_its_length_limit() {
        let mut ctx = Context {
            sequence: Some(strs(&["a", "b", "c", "d"])),
            ..Context::default()
        };
        assert!(run(&[Featlet::SeqN(3)], &mut ctx));
        assert!(ctx.outputs.is_empty());
        let mut ctx = Context {
            sequence: Some(strs(&["a", "b", "c"])),
            ..Context::default()
        };
        assert!(run(&[Featlet::SeqN(3)], &mut ctx));
        assert_eq!(ctx.outputs, ["a_b_c"]);
    }

    #[test]
    fn reducers_reject_unrepresented_items() {
        let mut ctx = Context {
            token1: Some(5),
            ..Context::default()
        };
        assert!(!run(&[Featlet::ParentD, Featlet::Bag], &mut ctx));
        let mut ctx = Context {
            token1: Some(5),
            ..Context::default()
        };
        assert!(run(
            &[
                Featlet::ParentD,
                Featlet::SeqMapEdge(None, EdgeRepr::DepRel),
                Featlet::Bag
            ],
            &mut ctx
        ));
        assert_eq!(ctx.outputs, ["dobj"]);
    }

    #[test]
    fn closed_class_filters_open_class_words() {
        let mut ctx = Context {
            token1: Some(3),
            ..Context::default()
        };
        assert!(run(
            &[
                Featlet::Token(Attr::Word),
                Featlet::ClosedClass,
                Featlet::Output
            ],
            &mut ctx
        ));
        assert_eq!(ctx.outputs, ["the"]);
        let mut ctx = Context {
            token1: Some(5),
            ..Context::default()
        };
        assert!(!run(
            &[
                Featlet::Token(Attr::Word),
                Featlet::ClosedClass,
                Featlet::Output
            ],
            &mut ctx
        ));
    }

    #[test]
    fn constituent_walkers_need_constituents() {
        let mut ctx = Context {
            span1: Some(Span::new(3, 6)),
            ..Context::default()
        };
        assert!(run(&[Featlet::ParentC, Featlet::SubCategoryC], &mut ctx));
        assert_eq!(ctx.span1, Some(Span::new(2, 6)));
        assert_eq!(ctx.sequence, Some(strs(&["VP->V_NP"])));
        let mut ctx = Context {
            span1: Some(Span::new(4, 7)),
            ..Context::default()
        };
        assert!(!run(&[Featlet::ParentC], &mut ctx));
    }

    #[test]
    fn sibling_step_climbs_unary_chains() {
        let mut ctx = Context {
            span1: Some(Span::new(2, 3)),
            ..Context::default()
        };
        assert!(run(
            &[Featlet::SibC(Dir::Right), Featlet::CategoryC],
            &mut ctx
        ));
        assert_eq!(ctx.span1, Some(Span::new(3, 6)));
        assert_eq!(ctx.sequence, Some(strs(&["NP"])));
    }

    #[test]
    fn common_parent_paths() {
        let mut ctx = Context {
            token1: Some(3),
            token2: Some(7),
            ..Context::default()
        };
        assert!(run(
            &[
                Featlet::CommonParentD,
                Featlet::SeqMapEdge(None, EdgeRepr::DepRel),
                Featlet::SeqN(5)
            ],
            &mut ctx
        ));
        assert_eq!(ctx.outputs, ["det_dobj_prep:loc_pobj"]);

        let mut ctx = Context {
            span1: Some(Span::new(3, 6)),
            span2: Some(Span::new(0, 2)),
            ..Context::default()
        };
        assert!(run(
            &[Featlet::CommonParentC, Featlet::CategoryC, Featlet::SeqN(5)],
            &mut ctx
        ));
        assert_eq!(ctx.outputs, ["VP_VP_S_NP"]);
    }

    #[test]
    fn linear_walkers() {
        let mut ctx = Context {
            span1: Some(Span::new(3, 6)),
            span2: Some(Span::new(0, 2)),
            ..Context::default()
        };
        assert!(run(
            &[
                Featlet::Span1ToSpan2L,
                Featlet::SeqMapToken(Attr::Pos),
                Featlet::Bag
            ],
            &mut ctx
        ));
        assert_eq!(ctx.outputs, ["VBD"]);

        let mut ctx = Context {
            span1: Some(Span::new(3, 6)),
            ..Context::default()
        };
        assert!(run(
            &[
                Featlet::Span1LeftToRightL,
                Featlet::SeqLength,
                Featlet::Output
            ],
            &mut ctx
        ));
        assert_eq!(ctx.outputs, ["7"]);

        let mut ctx = Context {
            token1: Some(0),
            ..Context::default()
        };
        assert!(!run(&[Featlet::StepL(Dir::Left)], &mut ctx));
    }

    #[test]
    fn distances() {
        let mut ctx = Context {
            token1: Some(3),
            ..Context::default()
        };
        assert!(run(
            &[Featlet::ToRootD, Featlet::DeltaDepthD, Featlet::DasBuckets],
            &mut ctx
        ));
        assert_eq!(ctx.value, Some(Value::Str("+2".into())));
        assert_eq!(das_bucket(0), "0");
        assert_eq!(das_bucket(-7), "-6-10");
        assert_eq!(das_bucket(25), "+21+");
    }

    #[test]
    fn frame_role_concatenates() {
        let mut ctx = Context::default();
        assert!(run(&[Featlet::FrameRole], &mut ctx));
        assert_eq!(ctx.value, Some(Value::Str("Pursuit.Theme".into())));
    }
}
