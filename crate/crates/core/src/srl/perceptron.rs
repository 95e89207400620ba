/// A linear model over sparse binary features with weight averaging.
///
/// Uses the usual trick of keeping, next to `w`, the sum of each update
/// scaled by the step it happened at, so that the average of `w` over all
/// steps is available in O(dim) at any time.
#[derive(Clone, Debug, PartialEq)]
pub struct Averaged {
    pub w: Vec<f64>,
    u: Vec<f64>,
    steps: u64,
}

/// Feature indices; repeats count as larger values.
pub type FeatVec = [u32];

pub fn dot(w: &[f64], x: &FeatVec) -> f64 {
    x.iter()
        .map(|&i| w.get(i as usize).copied().unwrap_or(0.0))
        .sum()
}

impl Averaged {
    pub fn new(dim: usize) -> Self {
        Averaged {
            w: vec![0.0; dim],
            u: vec![0.0; dim],
            steps: 0,
        }
    }

    pub fn score(&self, x: &FeatVec) -> f64 {
        dot(&self.w, x)
    }

    /// `w += scale * x` during the current step.
    pub fn update(&mut self, x: &FeatVec, scale: f64) {
        let at = self.steps as f64;
        for &i in x {
            self.w[i as usize] += scale;
            self.u[i as usize] += at * scale;
        }
    }

    /// Ends a step, whether or not it updated.
    pub fn tick(&mut self) {
        self.steps += 1;
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Mean of `w` over the steps taken so far (the weights after each
    /// step, summed, divided by the step count).
    pub fn averaged(&self) -> Vec<f64> {
        if self.steps == 0 {
            return self.w.clone();
        }
        let t = self.steps as f64;
        self.w.iter().zip(&self.u).map(|(w, u)| w - u / t).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Straight from the definition: sum the weights after every step.
    struct Naive {
        w: Vec<f64>,
        sum: Vec<f64>,
        steps: u64,
    }

    impl Naive {
        fn step(&mut self, updates: &[(Vec<u32>, f64)]) {
            for (x, s) in updates {
                for &i in x {
                    self.w[i as usize] += s;
                }
            }
            for (a, b) in self.sum.iter_mut().zip(&self.w) {
                *a += b;
            }
            self.steps += 1;
        }
    }

    #[test]
    fn averaging_trick_matches_definition() {
        let dim = 20;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut fast = Averaged::new(dim);
        let mut slow = Naive {
            w: vec![0.0; dim],
            sum: vec![0.0; dim],
            steps: 0,
        };
        for _ in 0..500 {
            let updates: Vec<(Vec<u32>, f64)> = (0..rng.random_range(0..3))
                .map(|_| {
                    let x = (0..rng.random_range(1..5))
                        .map(|_| rng.random_range(0..dim as u32))
                        .collect();
                    (x, if rng.random_bool(0.5) { 1.0 } else { -1.0 })
                })
                .collect();
            for (x, s) in &updates {
                fast.update(x, *s);
            }
            fast.tick();
            slow.step(&updates);
        }
        let avg = fast.averaged();
        for i in 0..dim {
            let want = slow.sum[i] / slow.steps as f64;
            assert!((avg[i] - want).abs() < 1e-9, "{i}: {} vs {want}", avg[i]);
        }
    }

    #[test]
    fn constant_weights_average_to_themselves() {
        let mut p = Averaged::new(3);
        p.update(&[0, 2, 2], 1.0);
        for _ in 0..10 {
            p.tick();
        }
        assert_eq!(p.averaged(), p.w);
        assert_eq!(p.w, vec![1.0, 0.0, 2.0]);
        assert_eq!(p.score(&[2, 0]), 3.0);
    }
}
