use std::collections::HashMap;
use std::fmt::Write as _;

use super::Span;

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConsChild {
    Node(NodeId),
    Leaf(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsNode {
    pub label: String,
    pub children: Vec<ConsChild>,
    pub span: Span,
    pub parent: Option<NodeId>,
    pub depth: usize,
}

impl ConsNode {
    /// Phrase children only, token leaves skipped.
    pub fn node_children(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.children.iter().filter_map(|c| match *c {
            ConsChild::Node(n) => Some(n),
            ConsChild::Leaf(_) => None,
        })
    }
}

/// Constituency tree whose leaves are token indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsTree {
    nodes: Vec<ConsNode>,
    root: NodeId,
    by_span: HashMap<Span, NodeId>,
}

impl ConsTree {
    /// Parses `(S (NP 0 1) (VP 2 (NP 3 4)))` and checks that the leaves are
    /// exactly `0..n_tokens` in order.
    pub fn parse(text: &str, n_tokens: usize) -> Result<Self, String> {
        let toks = lex(text);
        let mut nodes = Vec::new();
        let mut pos = 0;
        let mut next_leaf = 0;
        let root = parse_node(&toks, &mut pos, &mut nodes, None, 0, &mut next_leaf)?;
        if pos != toks.len() {
            return Err(format!(
                "trailing input after tree: `{}`",
                toks[pos..].join(" ")
            ));
        }
        if next_leaf != n_tokens {
            return Err(format!(
                "tree covers {next_leaf} tokens, sentence has {n_tokens}"
            ));
        }
        Ok(Self::from_nodes(nodes, root))
    }

    fn from_nodes(nodes: Vec<ConsNode>, root: NodeId) -> Self {
        // Narrowest = deepest node for a span; unary chains share spans.
        let mut by_span: HashMap<Span, NodeId> = HashMap::new();
        for (id, n) in nodes.iter().enumerate() {
            by_span
                .entry(n.span)
                .and_modify(|cur| {
                    if nodes[*cur].depth < n.depth {
                        *cur = id;
                    }
                })
                .or_insert(id);
        }
        ConsTree {
            nodes,
            root,
            by_span,
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &ConsNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[ConsNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The narrowest node covering exactly `span`, if any.
    pub fn node_at(&self, span: Span) -> Option<NodeId> {
        self.by_span.get(&span).copied()
    }

    /// Closest ancestor with a strictly wider span.
    pub fn wider_parent(&self, id: NodeId) -> Option<NodeId> {
        let span = self.nodes[id].span;
        let mut cur = self.nodes[id].parent;
        while let Some(p) = cur {
            if self.nodes[p].span != span {
                return Some(p);
            }
            cur = self.nodes[p].parent;
        }
        None
    }

    /// Phrase siblings of `id` (itself included) in order; empty at the root.
    pub fn siblings(&self, id: NodeId) -> Vec<NodeId> {
        match self.nodes[id].parent {
            Some(p) => self.nodes[p].node_children().collect(),
            None => Vec::new(),
        }
    }

    pub fn lowest_common_ancestor(&self, a: NodeId, b: NodeId) -> NodeId {
        let (mut a, mut b) = (a, b);
        while self.nodes[a].depth > self.nodes[b].depth {
            a = self.nodes[a].parent.expect("deeper node has a parent");
        }
        while self.nodes[b].depth > self.nodes[a].depth {
            b = self.nodes[b].parent.expect("deeper node has a parent");
        }
        while a != b {
            a = self.nodes[a].parent.expect("non-root has a parent");
            b = self.nodes[b].parent.expect("non-root has a parent");
        }
        a
    }

    pub fn to_bracketed(&self) -> String {
        let mut out = String::new();
        self.write_node(self.root, &mut out);
        out
    }

    fn write_node(&self, id: NodeId, out: &mut String) {
        let n = &self.nodes[id];
        out.push('(');
        out.push_str(&n.label);
        for c in &n.children {
            out.push(' ');
            match *c {
                ConsChild::Node(c) => self.write_node(c, out),
                ConsChild::Leaf(t) => {
                    let _ = write!(out, "{t}");
                }
            }
        }
        out.push(')');
    }

    /// Right-to-left reading of the tree for a sentence of `n` tokens.
    pub fn mirrored(&self, n: usize) -> ConsTree {
        let nodes = self
            .nodes
            .iter()
            .map(|node| ConsNode {
                label: node.label.clone(),
                children: node
                    .children
                    .iter()
                    .rev()
                    .map(|c| match *c {
                        ConsChild::Node(id) => ConsChild::Node(id),
                        ConsChild::Leaf(t) => ConsChild::Leaf(n - 1 - t),
                    })
                    .collect(),
                span: Span::new(n - node.span.end, n - node.span.start),
                parent: node.parent,
                depth: node.depth,
            })
            .collect();
        Self::from_nodes(nodes, self.root)
    }
}

fn lex(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_node(
    toks: &[String],
    pos: &mut usize,
    nodes: &mut Vec<ConsNode>,
    parent: Option<NodeId>,
    depth: usize,
    next_leaf: &mut usize,
) -> Result<NodeId, String> {
    if toks.get(*pos).map(String::as_str) != Some("(") {
        return Err(format!("expected `(` at item {}", *pos));
    }
    *pos += 1;
    let label = match toks.get(*pos) {
        Some(l) if l != "(" && l != ")" => l.clone(),
        _ => return Err("node without a label".into()),
    };
    *pos += 1;
    let id = nodes.len();
    let start = *next_leaf;
    nodes.push(ConsNode {
        label,
        children: Vec::new(),
        span: Span::new(start, start),
        parent,
        depth,
    });
    let mut children = Vec::new();
    loop {
        match toks.get(*pos).map(String::as_str) {
            None => return Err("unbalanced brackets".into()),
            Some(")") => {
                *pos += 1;
                break;
            }
            Some("(") => {
                let c = parse_node(toks, pos, nodes, Some(id), depth + 1, next_leaf)?;
                children.push(ConsChild::Node(c));
            }
            Some(leaf) => {
                let t: usize = leaf
                    .parse()
                    .map_err(|_| format!("leaf `{leaf}` is not a token index"))?;
                if t != *next_leaf {
                    return Err(format!("leaf {t} out of order, expected {}", *next_leaf));
                }
                *next_leaf += 1;
                children.push(ConsChild::Leaf(t));
                *pos += 1;
            }
        }
    }
    if children.is_empty() {
        return Err(format!("node `{}` has no children", nodes[id].label));
    }
    nodes[id].children = children;
    nodes[id].span = Span::new(start, *next_leaf);
    Ok(id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_indexes_spans() {
        let t = ConsTree::parse("(S (NP 0 1) (VP (V 2) (NP 3 4)))", 5).unwrap();
        assert_eq!(t.node(t.root()).span, Span::new(0, 5));
        let vp = t.node_at(Span::new(2, 5)).unwrap();
        assert_eq!(t.node(vp).label, "VP");
        assert_eq!(t.node_at(Span::new(1, 3)), None);
        assert_eq!(t.to_bracketed(), "(S (NP 0 1) (VP (V 2) (NP 3 4)))");
    }

    #[test]
    fn children_partition_parent() {
        let t = ConsTree::parse("(S (NP 0 (NOM 1 2)) (VP (V 3) (PP 4 (NP 5 6))))", 7).unwrap();
        for n in t.nodes() {
            let mut at = n.span.start;
            for c in &n.children {
                let s = match *c {
                    ConsChild::Node(c) => t.node(c).span,
                    ConsChild::Leaf(l) => Span::new(l, l + 1),
                };
                assert_eq!(s.start, at);
                at = s.end;
            }
            assert_eq!(at, n.span.end);
        }
    }

    #[test]
    fn unary_chain_lookup_is_narrowest() {
        let t = ConsTree::parse("(S (VP (V 0)))", 1).unwrap();
        let id = t.node_at(Span::new(0, 1)).unwrap();
        assert_eq!(t.node(id).label, "V");
        assert_eq!(t.wider_parent(id), None);
    }

    #[test]
    fn rejects_bad_trees() {
        assert!(ConsTree::parse("(S 0 2)", 3).is_err());
        assert!(ConsTree::parse("(S 0 1", 2).is_err());
        assert!(ConsTree::parse("(S 0 1)", 3).is_err());
        assert!(ConsTree::parse("(S x)", 1).is_err());
    }
}
