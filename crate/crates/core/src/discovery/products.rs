use std::collections::HashSet;

use crate::context::{FeatureProduct, Template};

/// k-subsets of `0..n` in lexicographic order.
#[derive(Clone, Debug)]
pub struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

pub fn combinations(n: usize, k: usize) -> Combinations {
    Combinations {
        n,
        idx: (0..k).collect(),
        done: k > n,
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        // Find the rightmost index that can still move right.
        match (0..k).rev().find(|&i| self.idx[i] < self.n - k + i) {
            Some(i) => {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
            }
            None => self.done = true,
        }
        Some(out)
    }
}

/// Products of distinct templates, order 1 first, each order in
/// lexicographic order of input positions. Repeated template ids in the
/// input are ignored after their first occurrence.
pub fn generate_products(
    templates: &[Template],
    max_order: usize,
) -> impl Iterator<Item = FeatureProduct> + '_ {
    let mut seen = HashSet::new();
    let distinct: Vec<&Template> = templates
        .iter()
        .filter(|t| seen.insert(t.id().to_string()))
        .collect();
    let n = distinct.len();
    (1..=max_order).flat_map(move |k| {
        let distinct = distinct.clone();
        combinations(n, k).map(move |c| {
            FeatureProduct::new(c.iter().map(|&i| distinct[i].clone()).collect()).expect("k >= 1")
        })
    })
}

/// Number of products [`generate_products`] yields for `n` distinct templates.
pub fn product_count(n: usize, max_order: usize) -> u128 {
    (1..=max_order)
        .map(|k| binomial(n as u128, k as u128))
        .sum()
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn templates(n: usize) -> Vec<Template> {
        let reg = crate::context::Featlet::registry();
        (0..n)
            .map(|i| Template::new(vec![reg[i]]).unwrap())
            .collect()
    }

    #[test]
    fn three_templates_order_two() {
        assert_eq!(generate_products(&templates(3), 2).count(), 6);
    }

    #[test]
    fn ten_templates_order_three() {
        let ps: Vec<_> = generate_products(&templates(10), 3).collect();
        assert_eq!(ps.len(), 175);
        assert_eq!(product_count(10, 3), 175);
        let ids: HashSet<&str> = ps.iter().map(|p| p.id()).collect();
        assert_eq!(ids.len(), 175);
    }

    #[test]
    fn products_are_canonical() {
        let t = templates(2);
        let a = FeatureProduct::new(vec![t[0].clone(), t[1].clone()]).unwrap();
        let b = FeatureProduct::new(vec![t[1].clone(), t[0].clone()]).unwrap();
        assert_eq!(a, b);
        let mut dup = t.clone();
        dup.push(t[0].clone());
        assert_eq!(generate_products(&dup, 2).count(), 3);
    }

    #[test]
    fn combinations_are_lexicographic() {
        let c: Vec<Vec<usize>> = combinations(4, 2).collect();
        assert_eq!(c, [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]);
        assert_eq!(combinations(2, 3).count(), 0);
        assert_eq!(combinations(3, 0).count(), 1);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3000, 3), 4_495_501_000);
        assert_eq!(binomial(2, 5), 0);
    }
}
