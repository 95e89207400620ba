use super::Span;

/// Dependency tree over the tokens of one sentence.
///
/// Exactly one token attaches to the artificial root. Depth counts edges from
/// that root, so the root token has depth 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepTree {
    head: Vec<Option<usize>>,
    deprel: Vec<String>,
    depth: Vec<usize>,
    children: Vec<Vec<usize>>,
    root: usize,
}

impl DepTree {
    pub fn new(head: Vec<Option<usize>>, deprel: Vec<String>) -> Result<Self, String> {
        let n = head.len();
        if n == 0 {
            return Err("empty dependency tree".into());
        }
        if deprel.len() != n {
            return Err("head and deprel lengths differ".into());
        }
        let mut root = None;
        let mut children = vec![Vec::new(); n];
        for (t, h) in head.iter().enumerate() {
            match *h {
                None => {
                    if let Some(r) = root {
                        return Err(format!("tokens {r} and {t} both attach to the root"));
                    }
                    root = Some(t);
                }
                Some(h) if h >= n => return Err(format!("head {h} of token {t} out of range")),
                Some(h) if h == t => return Err(format!("token {t} heads itself")),
                Some(h) => children[h].push(t),
            }
        }
        let root = root.ok_or_else(|| "no token attaches to the root".to_string())?;

        // Depth by walking up; a walk longer than n means a cycle.
        let mut depth = vec![0usize; n];
        for t in 0..n {
            let mut d = 1;
            let mut cur = t;
            while let Some(h) = head[cur] {
                d += 1;
                cur = h;
                if d > n {
                    return Err(format!("head cycle through token {t}"));
                }
            }
            depth[t] = d;
        }
        Ok(DepTree {
            head,
            deprel,
            depth,
            children,
            root,
        })
    }

    pub fn len(&self) -> usize {
        self.head.len()
    }

    pub fn is_empty(&self) -> bool {
        self.head.is_empty()
    }

    pub fn head(&self, t: usize) -> Option<usize> {
        self.head[t]
    }

    pub fn deprel(&self, t: usize) -> &str {
        &self.deprel[t]
    }

    pub fn depth(&self, t: usize) -> usize {
        self.depth[t]
    }

    /// Dependents of `t` in token order.
    pub fn children(&self, t: usize) -> &[usize] {
        &self.children[t]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Children of `t`'s head, `t` included, in token order. Empty for the root.
    pub fn siblings(&self, t: usize) -> &[usize] {
        match self.head[t] {
            Some(h) => &self.children[h],
            None => &[],
        }
    }

    /// Tokens from `t` (inclusive) up to the root (inclusive).
    pub fn path_to_root(&self, t: usize) -> Vec<usize> {
        let mut path = vec![t];
        let mut cur = t;
        while let Some(h) = self.head[cur] {
            path.push(h);
            cur = h;
        }
        path
    }

    pub fn lowest_common_ancestor(&self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (a, b);
        while self.depth[a] > self.depth[b] {
            a = self.head[a].expect("deeper token has a head");
        }
        while self.depth[b] > self.depth[a] {
            b = self.head[b].expect("deeper token has a head");
        }
        while a != b {
            a = self.head[a].expect("non-root has a head");
            b = self.head[b].expect("non-root has a head");
        }
        a
    }

    /// The token of `span` whose head lies outside the span (or is the root).
    /// Several such tokens are ranked by depth, then position.
    pub fn head_of_span(&self, span: Span) -> usize {
        debug_assert!(!span.is_empty() && span.end <= self.len());
        (span.start..span.end)
            .filter(|&t| self.head[t].is_none_or(|h| !span.contains(h)))
            .min_by_key(|&t| (self.depth[t], t))
            .expect("a nonempty span of a tree has an externally headed token")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // the(0) red(1) dog(2) barked(3)
    fn toy() -> DepTree {
        DepTree::new(
            vec![Some(2), Some(2), Some(3), None],
            ["det", "amod", "nsubj", "root"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        )
        .unwrap()
    }

    /// Brute force: every token of the span whose head is outside it.
    fn external(tree: &DepTree, span: Span) -> Vec<usize> {
        (span.start..span.end)
            .filter(|&t| match tree.head(t) {
                None => true,
                Some(h) => h < span.start || h >= span.end,
            })
            .collect()
    }

    #[test]
    fn depth_counts_from_root() {
        let t = toy();
        assert_eq!(t.depth(3), 1);
        assert_eq!(t.depth(2), 2);
        assert_eq!(t.depth(0), 3);
    }

    #[test]
    fn head_of_single_token_span_is_that_token() {
        let t = toy();
        for i in 0..4 {
            assert_eq!(t.head_of_span(Span::new(i, i + 1)), i);
        }
    }

    #[test]
    fn head_of_whole_sentence_is_root() {
        let t = toy();
        assert_eq!(t.head_of_span(Span::new(0, 4)), t.root());
    }

    #[test]
    fn head_of_noun_phrase() {
        let t = toy();
        let span = Span::new(0, 3);
        assert_eq!(external(&t, span), vec![2]);
        assert_eq!(t.head_of_span(span), 2);
    }

    #[test]
    fn tie_break_prefers_shallow_then_left() {
        // a(0) b(1) c(2) with 0 -> 2, 1 -> 2, 2 root ; span [0,2) has two
        // external-headed tokens at equal depth.
        let t = DepTree::new(
            vec![Some(2), Some(2), None],
            vec!["x".into(), "x".into(), "root".into()],
        )
        .unwrap();
        assert_eq!(external(&t, Span::new(0, 2)), vec![0, 1]);
        assert_eq!(t.head_of_span(Span::new(0, 2)), 0);
    }

    #[test]
    fn rejects_cycles_and_double_roots() {
        let cyc = DepTree::new(
            vec![Some(1), Some(0), None],
            vec!["a".into(), "b".into(), "root".into()],
        );
        assert!(cyc.unwrap_err().contains("cycle"));
        let two = DepTree::new(vec![None, None], vec!["a".into(), "b".into()]);
        assert!(two.is_err());
    }

    #[test]
    fn lca() {
        let t = toy();
        assert_eq!(t.lowest_common_ancestor(0, 1), 2);
        assert_eq!(t.lowest_common_ancestor(0, 3), 3);
        assert_eq!(t.path_to_root(0), vec![0, 2, 3]);
    }
}
