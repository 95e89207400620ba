use featlets::context::{Featlet, FeatureProduct, Template};
use featlets::similarity::{
    featlet_sim, feature_sim, greedy_prune, template_sim, SimilarityParams,
};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_template(rng: &mut impl Rng) -> Template {
    let len = rng.random_range(1..=5);
    let fs: Vec<Featlet> = (0..len)
        .map(|_| *Featlet::registry().choose(rng).unwrap())
        .collect();
    Template::new(fs).unwrap()
}

fn random_product(rng: &mut impl Rng, max_order: usize) -> FeatureProduct {
    loop {
        let order = rng.random_range(1..=max_order);
        let ts = (0..order).map(|_| random_template(rng)).collect();
        if let Ok(p) = FeatureProduct::new(ts) {
            return p;
        }
    }
}

/// Tries every injective assignment of the smaller product's templates.
fn exhaustive(p: &FeatureProduct, q: &FeatureProduct, k: f64) -> f64 {
    let (small, large) = if p.order() <= q.order() {
        (p.templates(), q.templates())
    } else {
        (q.templates(), p.templates())
    };
    fn go(i: usize, used: &mut Vec<bool>, acc: f64, w: &[Vec<f64>], best: &mut f64) {
        if i == w.len() {
            *best = best.max(acc);
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                go(i + 1, used, acc + w[i][j], w, best);
                used[j] = false;
            }
        }
    }
    let w: Vec<Vec<f64>> = small
        .iter()
        .map(|a| large.iter().map(|b| template_sim(a, b, k)).collect())
        .collect();
    let mut best = f64::NEG_INFINITY;
    go(0, &mut vec![false; large.len()], 0.0, &w, &mut best);
    best / small.len() as f64
}

fn quadratic_prune(items: &[FeatureProduct], params: &SimilarityParams) -> Vec<FeatureProduct> {
    let n = items.len();
    let sim: Vec<Vec<f64>> = items
        .iter()
        .map(|a| items.iter().map(|b| feature_sim(a, b, params.k)).collect())
        .collect();
    let mut keep = vec![false; n];
    for i in 0..n {
        keep[i] = (0..i).all(|j| !keep[j] || sim[i][j] <= params.dup_threshold);
    }
    (0..n)
        .filter(|&i| keep[i])
        .map(|i| items[i].clone())
        .collect()
}

#[test]
fn qualitative_featlet_similarity() {
    assert!(featlet_sim("LeftSibD", "LeftMostSibD") > featlet_sim("LeftSibD", "ParentC"));
}

#[test]
fn matching_equals_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let p = random_product(&mut rng, 3);
        let q = random_product(&mut rng, 3);
        let k = rng.random_range(0.5..4.0);
        assert_eq!(feature_sim(&p, &q, k), exhaustive(&p, &q, k), "{p} vs {q}");
    }
}

#[test]
fn greedy_prune_equals_quadratic_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..40 {
        // short templates collide often enough to make pruning bite
        let items: Vec<FeatureProduct> = (0..50).map(|_| random_product(&mut rng, 2)).collect();
        let params = SimilarityParams {
            k: 2.0,
            dup_threshold: [0.5, 0.6, 0.75, 0.9][trial % 4],
        };
        let fast = greedy_prune(items.clone(), |x| x, &params, None);
        assert_eq!(fast, quadratic_prune(&items, &params));
    }
}

#[test]
fn parallel_path_agrees_on_long_lists() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let items: Vec<FeatureProduct> = (0..400).map(|_| random_product(&mut rng, 3)).collect();
    let params = SimilarityParams {
        k: 2.0,
        dup_threshold: 0.95,
    };
    let fast = greedy_prune(items.clone(), |x| x, &params, None);
    assert!(fast.len() > 256, "{} kept", fast.len());
    assert_eq!(fast, quadratic_prune(&items, &params));
    let limited = greedy_prune(items, |x| x, &params, Some(100));
    assert_eq!(limited[..], fast[..100]);
}

proptest! {
    #[test]
    fn symmetric_and_bounded(a in any::<u64>(), k in 0.5f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(a);
        let p = random_product(&mut rng, 3);
        let q = random_product(&mut rng, 3);
        let pq = feature_sim(&p, &q, k);
        prop_assert!((pq - feature_sim(&q, &p, k)).abs() < 1e-12);
        prop_assert!(pq > 0.0 && pq <= 1.0 + 1e-12);
        prop_assert!((feature_sim(&p, &p, k) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn featlet_similarity_is_symmetric(i in 0usize..1000, j in 0usize..1000) {
        let reg = Featlet::registry();
        let (a, b) = (reg[i % reg.len()].id(), reg[j % reg.len()].id());
        let s = featlet_sim(&a, &b);
        prop_assert_eq!(s, featlet_sim(&b, &a));
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s == 1.0, a == b);
    }
}
