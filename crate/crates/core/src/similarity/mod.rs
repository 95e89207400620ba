//! Similarity between featlets, templates and feature products, and greedy
//! removal of near duplicates from a ranked list.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::context::{Featlet, FeatureProduct, Template, REGISTRY_LEN};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityParams {
    /// Turns a distance into a similarity: `k / (k + dist)`.
    pub k: f64,
    /// Features more similar than this to a kept one are dropped.
    pub dup_threshold: f64,
}

impl Default for SimilarityParams {
    fn default() -> Self {
        SimilarityParams {
            k: 2.0,
            dup_threshold: 0.75,
        }
    }
}

/// Unit-cost edit distance over chars.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let next = (diag + (ca != cb) as usize)
                .min(row[j] + 1)
                .min(row[j + 1] + 1);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}

/// One minus the edit distance between two featlet names over the length of
/// the longer one.
pub fn featlet_sim(a: &str, b: &str) -> f64 {
    let longer = a.chars().count().max(b.chars().count());
    if longer == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longer as f64
}

fn featlet_pair_sim(a: Featlet, b: Featlet) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let reg = Featlet::registry();
        let ids: Vec<String> = reg.iter().map(|f| f.id()).collect();
        let mut t = vec![0.0; REGISTRY_LEN * REGISTRY_LEN];
        for i in 0..REGISTRY_LEN {
            for j in 0..REGISTRY_LEN {
                t[i * REGISTRY_LEN + j] = featlet_sim(&ids[i], &ids[j]);
            }
        }
        t
    });
    table[a.index() * REGISTRY_LEN + b.index()]
}

/// Edit distance over featlets: insertions and deletions cost 1, a
/// substitution costs one minus the featlets' name similarity.
pub fn template_distance(s: &Template, t: &Template) -> f64 {
    let (s, t) = (s.featlets(), t.featlets());
    let mut row: Vec<f64> = (0..=t.len()).map(|j| j as f64).collect();
    for (i, &a) in s.iter().enumerate() {
        let mut diag = row[0];
        row[0] = (i + 1) as f64;
        for (j, &b) in t.iter().enumerate() {
            let sub = diag + 1.0 - featlet_pair_sim(a, b);
            let next = sub.min(row[j] + 1.0).min(row[j + 1] + 1.0);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[t.len()]
}

pub fn template_sim(s: &Template, t: &Template, k: f64) -> f64 {
    k / (k + template_distance(s, t))
}

/// Maximum-weight matching of the two products' templates under
/// [`template_sim`], divided by the smaller order.
pub fn feature_sim(p: &FeatureProduct, q: &FeatureProduct, k: f64) -> f64 {
    let (small, large) = if p.order() <= q.order() {
        (p.templates(), q.templates())
    } else {
        (q.templates(), p.templates())
    };
    let w: Vec<Vec<f64>> = small
        .iter()
        .map(|a| large.iter().map(|b| template_sim(a, b, k)).collect())
        .collect();
    // best[mask]: best total weight matching the first popcount(mask) small
    // templates into the large ones in `mask`.
    let m = large.len();
    let mut best = vec![f64::NEG_INFINITY; 1 << m];
    best[0] = 0.0;
    for mask in 0..1usize << m {
        let i = mask.count_ones() as usize;
        if i >= small.len() || best[mask] == f64::NEG_INFINITY {
            continue;
        }
        for (j, wj) in w[i].iter().enumerate() {
            if mask & (1 << j) == 0 {
                let next = mask | 1 << j;
                best[next] = best[next].max(best[mask] + wj);
            }
        }
    }
    let total = best
        .iter()
        .enumerate()
        .filter(|(mask, _)| mask.count_ones() as usize == small.len())
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    total / small.len() as f64
}

/// Walks `ranked` in order and keeps an item unless it is more similar than
/// the threshold to an item already kept. Stops once `limit` items are kept.
pub fn greedy_prune<T: Sync>(
    ranked: Vec<T>,
    product: impl Fn(&T) -> &FeatureProduct + Sync,
    params: &SimilarityParams,
    limit: Option<usize>,
) -> Vec<T> {
    let mut kept: Vec<T> = Vec::new();
    for item in ranked {
        if limit.is_some_and(|l| kept.len() >= l) {
            break;
        }
        let p = product(&item);
        let dup = |other: &T| feature_sim(p, product(other), params.k) > params.dup_threshold;
        let redundant = if kept.len() > 256 {
            kept.par_iter().any(dup)
        } else {
            kept.iter().any(dup)
        };
        if !redundant {
            kept.push(item);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Template {
        s.parse().unwrap()
    }

    fn p(s: &str) -> FeatureProduct {
        s.parse().unwrap()
    }

    #[test]
    fn featlet_names() {
        assert_eq!(featlet_sim("ParentD", "ParentD"), 1.0);
        let close = featlet_sim("LeftSibD", "LeftMostSibD");
        assert!((close - (1.0 - 4.0 / 12.0)).abs() < 1e-12);
        assert!(close > featlet_sim("LeftSibD", "ParentC"));
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
    }

    #[test]
    fn template_substitution() {
        let a = t("ArgHead+LeftSibD+Word");
        let b = t("ArgHead+LeftMostSibD+Word");
        assert!((template_sim(&a, &b, 2.0) - 2.0 / (2.0 + 1.0 / 3.0)).abs() < 1e-9);
        assert_eq!(template_sim(&a, &a, 2.0), 1.0);
        // one deletion
        let c = t("ArgHead+Word");
        assert!((template_distance(&a, &c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn feature_similarity_basics() {
        let a = p("ArgHead+Word;Role");
        assert!((feature_sim(&a, &a, 2.0) - 1.0).abs() < 1e-12);
        let x = p("ArgHead+Word");
        let y = p("ArgHead+Lemma");
        assert_eq!(
            feature_sim(&x, &y, 2.0),
            template_sim(&x.templates()[0], &y.templates()[0], 2.0)
        );
        // the single template matches its best partner
        assert!((feature_sim(&x, &a, 2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pruning_identical_and_threshold() {
        let same = vec![p("Role"), p("Role"), p("Role")];
        assert_eq!(
            greedy_prune(same, |x| x, &SimilarityParams::default(), None).len(),
            1
        );

        let a = p("ArgHead+Word");
        let b = p("ArgHead+Lemma");
        let s = feature_sim(&a, &b, 2.0);
        let keep_both = SimilarityParams {
            dup_threshold: s,
            ..SimilarityParams::default()
        };
        assert_eq!(
            greedy_prune(vec![a.clone(), b.clone()], |x| x, &keep_both, None).len(),
            2
        );
        let drop_one = SimilarityParams {
            dup_threshold: s - 1e-9,
            ..SimilarityParams::default()
        };
        assert_eq!(greedy_prune(vec![a, b], |x| x, &drop_one, None).len(), 1);
    }

    #[test]
    fn pruning_stops_at_limit() {
        let ps = vec![
            p("Role"),
            p("ArgHead+Word"),
            p("TargetSpan+Span2ToSpan1+ParentC+CategoryC+Bag"),
        ];
        let kept = greedy_prune(ps, |x| x, &SimilarityParams::default(), Some(2));
        assert_eq!(kept.len(), 2);
    }
}
