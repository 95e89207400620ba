use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BudgetPlan {
    /// Total number of products to score.
    pub b: u64,
    pub gamma: f64,
    pub max_order: usize,
}

impl Default for BudgetPlan {
    fn default() -> Self {
        BudgetPlan {
            b: 3_000_000,
            gamma: 1.5,
            max_order: 3,
        }
    }
}

impl BudgetPlan {
    /// Same plan with `b` multiplied by `scale`, rounded.
    pub fn scaled(&self, scale: f64) -> BudgetPlan {
        BudgetPlan {
            b: (self.b as f64 * scale).round() as u64,
            ..*self
        }
    }

    /// Normalized `gamma^i` for orders `1..=max_order`.
    pub fn proportions(&self) -> Vec<f64> {
        let w: Vec<f64> = (1..=self.max_order)
            .map(|i| self.gamma.powi(i as i32))
            .collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.b == 0 {
            return Err(Error::Invalid("budget must be positive".into()));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Invalid(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if self.max_order == 0 {
            return Err(Error::Invalid("max order must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-order quotas. Each order's share is proportional to `gamma^i`;
/// orders that cannot use their share keep what is available and the
/// remainder is spread over the others in proportion to their weights,
/// repeating until nothing more can be placed. Fractions are rounded by
/// largest remainder (lower order first on ties), so the quotas sum to
/// `min(b, sum(available))`.
///
/// `available[i]` is the number of candidate products of order `i + 1`;
/// missing entries count as zero.
pub fn allocate_budget(plan: &BudgetPlan, available: &[u64]) -> Vec<u64> {
    let k = plan.max_order;
    let avail: Vec<u64> = (0..k)
        .map(|i| available.get(i).copied().unwrap_or(0))
        .collect();
    let weights: Vec<f64> = (1..=k).map(|i| plan.gamma.powi(i as i32)).collect();

    let mut quota = vec![0f64; k];
    let mut capped = vec![false; k];
    loop {
        let placed: f64 = (0..k).filter(|&i| capped[i]).map(|i| quota[i]).sum();
        let left = plan.b as f64 - placed;
        let open: Vec<usize> = (0..k).filter(|&i| !capped[i]).collect();
        let wsum: f64 = open.iter().map(|&i| weights[i]).sum();
        if open.is_empty() || wsum == 0.0 {
            break;
        }
        let mut changed = false;
        for &i in &open {
            quota[i] = left * weights[i] / wsum;
        }
        // cap the lowest order that overflows first, then redistribute
        for &i in &open {
            if quota[i] >= avail[i] as f64 {
                quota[i] = avail[i] as f64;
                capped[i] = true;
                changed = true;
                break;
            }
        }
        if !changed {
            break;
        }
    }

    let mut out: Vec<u64> = quota.iter().map(|q| q.floor() as u64).collect();
    let target = plan
        .b
        .min(avail.iter().fold(0u64, |a, &x| a.saturating_add(x)));
    let mut short = target.saturating_sub(out.iter().sum());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let fa = quota[a] - quota[a].floor();
        let fb = quota[b] - quota[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    while short > 0 {
        let before = short;
        for &i in &order {
            if short > 0 && out[i] < avail[i] {
                out[i] += 1;
                short -= 1;
            }
        }
        if short == before {
            break;
        }
    }
    out
}
