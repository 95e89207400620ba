use std::cmp::Ordering;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::context::FeatureProduct;
use crate::discovery::combinations;
use crate::error::{Error, Result};
use crate::similarity::{greedy_prune, SimilarityParams};

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredFeature {
    pub product: FeatureProduct,
    /// I(Y;X), nats.
    pub mi: f64,
    /// H(X), nats.
    pub hx: f64,
    /// Max over members of template MI plus noise. Not persisted.
    pub heuristic: Option<f64>,
}

impl ScoredFeature {
    pub fn final_score(&self, beta: f64) -> f64 {
        self.mi / (1.0 + beta * self.hx)
    }
}

/// One `Normal(0, sigma)` draw per template, in order. `sigma = 0` gives
/// zeros.
pub fn heuristic_noise(n: usize, sigma: f64, seed: u64) -> Result<Vec<f64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Invalid(format!(
            "noise sigma must be non-negative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let dist =
        Normal::new(0.0, sigma).map_err(|e| Error::Invalid(format!("noise sigma {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| dist.sample(&mut rng)).collect())
}

/// Positions `0..scores.len()` sorted by score descending, ties by position.
pub fn rank_desc(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

/// The first `quota` accepted `k`-subsets of a heuristic ranking, best
/// first. A product scores the max of its members, so walking subsets of
/// rank positions in lexicographic order visits products by their best
/// member, then their second best, and so on. Returned subsets hold the
/// original indices, in rank order.
pub fn heuristic_products(
    ranking: &[usize],
    k: usize,
    quota: usize,
    mut accept: impl FnMut(&[usize]) -> bool,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if quota == 0 || k == 0 {
        return out;
    }
    for c in combinations(ranking.len(), k) {
        let members: Vec<usize> = c.iter().map(|&i| ranking[i]).collect();
        if accept(&members) {
            out.push(members);
            if out.len() == quota {
                break;
            }
        }
    }
    out
}

/// Descending `mi / (1 + beta * hx)`, then ascending `hx`, then product id.
pub fn final_order(a: &ScoredFeature, b: &ScoredFeature, beta: f64) -> Ordering {
    b.final_score(beta)
        .total_cmp(&a.final_score(beta))
        .then(a.hx.total_cmp(&b.hx))
        .then_with(|| a.product.id().cmp(b.product.id()))
}

/// Sorts by [`final_order`] and drops near duplicates, keeping at most
/// `limit` features.
pub fn final_rank(
    mut scored: Vec<ScoredFeature>,
    beta: f64,
    params: &SimilarityParams,
    limit: Option<usize>,
) -> Vec<ScoredFeature> {
    scored.sort_by(|a, b| final_order(a, b, beta));
    greedy_prune(scored, |s| &s.product, params, limit)
}

/// `productId<TAB>mi<TAB>hx<TAB>final`, sorted by product id.
pub fn write_scores(header: &[String], scored: &[ScoredFeature], beta: f64) -> String {
    let mut rows: Vec<&ScoredFeature> = scored.iter().collect();
    rows.sort_by(|a, b| a.product.id().cmp(b.product.id()));
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    for s in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            s.product.id(),
            s.mi,
            s.hx,
            s.final_score(beta)
        );
    }
    out
}

pub fn parse_scores(text: &str, path: &str) -> Result<Vec<ScoredFeature>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(Error::parse(
                path,
                i + 1,
                "expected `product\\tmi\\thx\\tfinal`",
            ));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::parse(path, i + 1, format!("bad number `{s}`")))
        };
        out.push(ScoredFeature {
            product: cols[0]
                .parse()
                .map_err(|e| Error::parse(path, i + 1, format!("{e}")))?,
            mi: num(cols[1])?,
            hx: num(cols[2])?,
            heuristic: None,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sf(id: &str, mi: f64, hx: f64) -> ScoredFeature {
        ScoredFeature {
            product: id.parse().unwrap(),
            mi,
            hx,
            heuristic: None,
        }
    }

    fn ids(v: &[ScoredFeature]) -> Vec<&str> {
        v.iter().map(|s| s.product.id()).collect()
    }

    // far apart so that pruning keeps everything
    const A: &str = "Role";
    const B: &str = "ArgHead+Word";
    const C: &str = "TargetSpan+Span2ToSpan1+ParentC+CategoryC+Bag";
    const D: &str = "Frame";
    const E: &str = "ArgSpan+Span1Start+Lemma+Shape";

    #[test]
    fn beta_zero_is_mi_order() {
        let rows = vec![sf(A, 0.1, 0.0), sf(B, 0.5, 9.0), sf(C, 0.3, 1.0)];
        let r = final_rank(rows, 0.0, &SimilarityParams::default(), None);
        assert_eq!(ids(&r), [B, C, A]);
    }

    #[test]
    fn lower_entropy_wins_at_equal_mi() {
        for beta in [0.01, 0.1, 1.0, 10.0] {
            let r = final_rank(
                vec![sf(B, 0.5, 9.0), sf(C, 0.5, 1.0)],
                beta,
                &SimilarityParams::default(),
                None,
            );
            assert_eq!(ids(&r), [C, B]);
        }
        // at beta 0 the hx tie-break decides
        let r = final_rank(
            vec![sf(B, 0.5, 9.0), sf(C, 0.5, 1.0)],
            0.0,
            &SimilarityParams::default(),
            None,
        );
        assert_eq!(ids(&r), [C, B]);
    }

    #[test]
    fn beta_ten_matches_hand_sort() {
        // mi / (1 + 10 hx): A .5, B 1.75/3.5 = .5, C .9/10 = .09,
        // D .05/1.5 = .033, E 1.125/2.25 = .5
        let rows = vec![
            sf(A, 0.5, 0.0),
            sf(B, 1.75, 0.25),
            sf(C, 0.9, 0.9),
            sf(D, 0.05, 0.05),
            sf(E, 1.125, 0.125),
        ];
        let r = final_rank(rows.clone(), 10.0, &SimilarityParams::default(), None);
        // three-way tie at .5 broken by hx
        assert_eq!(ids(&r), [A, E, B, C, D]);
        let r = final_rank(rows, 0.0, &SimilarityParams::default(), None);
        assert_eq!(ids(&r), [B, E, C, A, D]);
    }

    #[test]
    fn scores_round_trip() {
        let rows = vec![sf(B, 0.5, 1.25), sf(A, 0.1 + 0.2, 0.0)];
        let text = write_scores(&["seed=1".into()], &rows, 1.0);
        assert!(text.starts_with("# seed=1\nArgHead+Word\t0.5\t1.25\t0.2222"));
        let back = parse_scores(&text, "s").unwrap();
        assert_eq!(back[1].mi, 0.1 + 0.2);
        assert_eq!(back[0].product.id(), B);
        assert!(parse_scores("x\t1\t2\n", "s").is_err());
    }

    #[test]
    fn noise_is_seeded() {
        let a = heuristic_noise(50, 2.0, 9).unwrap();
        assert_eq!(a, heuristic_noise(50, 2.0, 9).unwrap());
        assert_ne!(a, heuristic_noise(50, 2.0, 10).unwrap());
        assert!(heuristic_noise(3, 0.0, 1)
            .unwrap()
            .iter()
            .all(|&x| x == 0.0));
        assert!(heuristic_noise(3, -1.0, 1).is_err());
    }

    #[test]
    fn zero_noise_ranks_by_best_member() {
        let mi = [0.1, 0.9, 0.5, 0.3];
        let ranking = rank_desc(&mi);
        assert_eq!(ranking, [1, 2, 3, 0]);
        let pairs = heuristic_products(&ranking, 2, 4, |_| true);
        assert_eq!(pairs, [vec![1, 2], vec![1, 3], vec![1, 0], vec![2, 3]]);
        let best: Vec<f64> = pairs
            .iter()
            .map(|p| p.iter().map(|&i| mi[i]).fold(f64::MIN, f64::max))
            .collect();
        assert!(best.windows(2).all(|w| w[0] >= w[1]));
        let filtered = heuristic_products(&ranking, 2, 10, |m| m.contains(&0));
        assert_eq!(filtered.len(), 3);
    }
}
