use std::hash::Hash;

use rustc_hash::FxHashMap;

use super::entropy::{entropy, EntropyEstimate, Estimator};

/// Distinct feature values a table keeps before folding new ones into RARE.
pub const SUPPORT_CAP: usize = 1_000_000;

/// A value type usable as the X side of a [`CountTable`].
pub trait CountKey: Clone + Eq + Hash + Send {
    /// The reserved value for instances on which nothing fired.
    fn empty() -> Self;
    /// The reserved value overflow is folded into.
    fn rare() -> Self;
}

impl CountKey for String {
    fn empty() -> Self {
        "∅".to_string()
    }
    fn rare() -> Self {
        "RARE".to_string()
    }
}

impl CountKey for u64 {
    fn empty() -> Self {
        0
    }
    fn rare() -> Self {
        u64::MAX
    }
}

impl CountKey for u128 {
    fn empty() -> Self {
        0
    }
    fn rare() -> Self {
        u128::MAX
    }
}

/// Joint counts of a binary label and one product's value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable<K: CountKey = String> {
    pub n: u64,
    pub count_y: [u64; 2],
    pub count_xy: FxHashMap<(K, bool), u64>,
    /// Observations folded into RARE because the support cap was hit.
    pub folded: u64,
    distinct_x: usize,
}

impl<K: CountKey> Default for CountTable<K> {
    fn default() -> Self {
        CountTable {
            n: 0,
            count_y: [0; 2],
            count_xy: FxHashMap::default(),
            folded: 0,
            distinct_x: 0,
        }
    }
}

impl<K: CountKey> CountTable<K> {
    pub fn add(&mut self, x: K, y: bool) {
        self.add_n(x, y, 1);
    }

    fn add_n(&mut self, x: K, y: bool, c: u64) {
        self.n += c;
        self.count_y[y as usize] += c;
        if let Some(v) = self.count_xy.get_mut(&(x.clone(), y)) {
            *v += c;
            return;
        }
        let seen = self.count_xy.contains_key(&(x.clone(), !y));
        let x = if !seen && self.distinct_x >= SUPPORT_CAP && x != K::rare() {
            self.folded += c;
            K::rare()
        } else {
            x
        };
        if !seen && !self.count_xy.contains_key(&(x.clone(), !y)) {
            self.distinct_x += 1;
        }
        *self.count_xy.entry((x, y)).or_insert(0) += c;
    }

    /// Sums two tables. Below the support cap the order of merging does not
    /// matter.
    pub fn merge(self, other: CountTable<K>) -> CountTable<K> {
        let (mut big, small) = if self.count_xy.len() >= other.count_xy.len() {
            (self, other)
        } else {
            (other, self)
        };
        big.folded += small.folded;
        for ((x, y), c) in small.count_xy {
            big.add_n(x, y, c);
        }
        big
    }

    pub fn count_x(&self) -> FxHashMap<K, u64> {
        let mut out = FxHashMap::default();
        for ((x, _), c) in &self.count_xy {
            *out.entry(x.clone()).or_insert(0) += c;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MiScore {
    /// I(Y;X) in nats.
    pub mi: f64,
    /// H(X) in nats, with the same estimator.
    pub hx: f64,
    pub fell_back: bool,
}

/// `H(Y) + H(X) - H(X,Y)`, each term with `estimator`, clamped to
/// `[0, min(H(X), H(Y))]`.
/// BUB supports are the observed ones for the marginals and their product
/// for the joint.
pub fn mutual_information<K: CountKey>(t: &CountTable<K>, estimator: Estimator) -> MiScore {
    if t.n == 0 {
        return MiScore {
            mi: 0.0,
            hx: 0.0,
            fell_back: false,
        };
    }
    let y: Vec<u64> = t.count_y.iter().copied().filter(|&c| c > 0).collect();
    let x: Vec<u64> = t.count_x().into_values().collect();
    let xy: Vec<u64> = t.count_xy.values().copied().collect();
    score_from_counts(&y, &x, &xy, t.n, estimator)
}

pub(crate) fn score_from_counts(
    y: &[u64],
    x: &[u64],
    xy: &[u64],
    n: u64,
    estimator: Estimator,
) -> MiScore {
    let hy: EntropyEstimate = entropy(y, n, y.len(), estimator);
    let hx = entropy(x, n, x.len(), estimator);
    let hxy = entropy(xy, n, x.len() * y.len(), estimator);
    // With a single observed X or Y value the variables are independent on
    // this sample; don't let estimator noise say otherwise.
    let mi = if x.len() <= 1 || y.len() <= 1 {
        0.0
    } else {
        (hy.value + hx.value - hxy.value).clamp(0.0, hx.value.min(hy.value))
    };
    MiScore {
        mi,
        hx: hx.value,
        fell_back: hy.fell_back || hx.fell_back || hxy.fell_back,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(rows: &[(&str, bool)]) -> CountTable {
        let mut t = CountTable::default();
        for (x, y) in rows {
            t.add(x.to_string(), *y);
        }
        t
    }

    #[test]
    fn constant_feature() {
        let t = table(&[("c", true), ("c", false), ("c", true)]);
        assert_eq!(t.count_x().get("c"), Some(&3));
        for est in [Estimator::Mle, Estimator::MillerMadow, Estimator::Bub] {
            assert_eq!(mutual_information(&t, est).mi, 0.0);
        }
    }

    #[test]
    fn identical_variables() {
        let mut t = CountTable::<u64>::default();
        for i in 0..1000u64 {
            t.add(1 + i % 2, i % 2 == 0);
        }
        let s = mutual_information(&t, Estimator::Mle);
        assert!((s.mi - 2f64.ln()).abs() < 1e-12);
        let b = mutual_information(&t, Estimator::Bub);
        assert!((b.mi - 2f64.ln()).abs() < 0.05);
    }

    #[test]
    fn unique_values_carry_no_information() {
        let n = 500u64;
        let mut t = CountTable::<u64>::default();
        for i in 0..n {
            t.add(i + 1, i % 2 == 0);
        }
        assert!((mutual_information(&t, Estimator::Mle).mi - 2f64.ln()).abs() < 1e-12);
        assert!(mutual_information(&t, Estimator::Bub).mi < 0.05);
    }

    #[test]
    fn independent_coins() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut t = CountTable::<u64>::default();
            for _ in 0..1000 {
                t.add(rng.random_range(0..2), rng.random_bool(0.5));
            }
            assert!(mutual_information(&t, Estimator::Bub).mi < 0.05);
        }
    }

    #[test]
    fn rare_overflow() {
        let mut t = CountTable::<u64>::default();
        for i in 0..(SUPPORT_CAP as u64 + 3) {
            t.add(i + 1, false);
        }
        assert_eq!(t.folded, 3);
        assert_eq!(t.count_x().get(&u64::rare()), Some(&3));
        assert_eq!(t.n, SUPPORT_CAP as u64 + 3);
    }

    #[test]
    fn merge_is_order_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let parts: Vec<CountTable<u64>> = (0..4)
            .map(|_| {
                let mut t = CountTable::default();
                for _ in 0..50 {
                    t.add(rng.random_range(0..7), rng.random_bool(0.3));
                }
                t
            })
            .collect();
        let a = parts
            .iter()
            .cloned()
            .fold(CountTable::default(), CountTable::merge);
        let b = parts
            .iter()
            .rev()
            .cloned()
            .fold(CountTable::default(), CountTable::merge);
        assert_eq!(a.count_xy, b.count_xy);
        assert_eq!((a.n, a.count_y), (b.n, b.count_y));
        assert_eq!(a.n, 200);
    }
}
