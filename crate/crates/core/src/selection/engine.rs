use std::collections::HashMap;

use log::info;
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::budget::{allocate_budget, BudgetPlan};
use super::counts::{score_from_counts, CountKey, CountTable, MiScore};
use super::entropy::Estimator;
use super::rank::{heuristic_noise, heuristic_products, rank_desc, ScoredFeature};
use crate::context::{
    apply, run_product, Context, Env, Featlet, FeatureProduct, FreqStats, FreqTransform, Instance,
    Template,
};
use crate::corpus::{Corpus, Lexicons};
use crate::discovery::binomial;
use crate::error::{Error, Result};
use crate::srl::Stage;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoringConfig {
    /// This stage's share of the budget.
    pub plan: BudgetPlan,
    pub estimator: Estimator,
    /// Standard deviation of the per-template heuristic noise.
    pub sigma: f64,
    pub seed: u64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            plan: BudgetPlan::default(),
            estimator: Estimator::Bub,
            sigma: 2.0,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageScores {
    /// Every scored product: the order-1 candidates, then each higher order,
    /// each in heuristic order.
    pub scored: Vec<ScoredFeature>,
    /// Products of each order the stage could have scored.
    pub available: Vec<u128>,
    pub quotas: Vec<u64>,
    /// Templates that can fire on this stage's instances.
    pub pool: usize,
}

/// The value set of one template on one instance, as a small integer. Class
/// 0 is the empty set.
struct Classes {
    per_instance: Vec<u32>,
    values: Vec<Vec<String>>,
}

#[derive(Default)]
struct Interner {
    ids: FxHashMap<Vec<String>, u32>,
    values: Vec<Vec<String>>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            ids: FxHashMap::default(),
            values: vec![Vec::new()],
        }
    }

    fn intern(&mut self, mut v: Vec<String>) -> u32 {
        if v.is_empty() {
            return 0;
        }
        v.sort_unstable();
        v.dedup();
        if let Some(&c) = self.ids.get(&v) {
            return c;
        }
        let c = self.values.len() as u32;
        self.values.push(v.clone());
        self.ids.insert(v, c);
        c
    }
}

/// Runs templates sorted by featlet sequence on one instance, reusing the
/// context of the shared prefix with the previous template.
struct PrefixRunner {
    stack: Vec<Context>,
    path: Vec<Featlet>,
    /// Depth at which the featlet after `path[..d]` failed.
    failed: Option<usize>,
}

impl PrefixRunner {
    fn new() -> Self {
        PrefixRunner {
            stack: vec![Context::default()],
            path: Vec::new(),
            failed: None,
        }
    }

    fn run(&mut self, t: &Template, env: &Env) -> Vec<String> {
        let fs = t.featlets();
        let lcp = self.path.iter().zip(fs).take_while(|(a, b)| a == b).count();
        if let Some(d) = self.failed {
            if lcp > d {
                return Vec::new();
            }
        }
        self.failed = None;
        self.stack.truncate(lcp + 1);
        self.path.truncate(lcp);
        for &f in &fs[lcp..] {
            let mut next = self.stack.last().expect("root context").clone();
            if !apply(f, &mut next, env) {
                self.failed = Some(self.path.len());
                self.path.push(f);
                return Vec::new();
            }
            self.stack.push(next);
            self.path.push(f);
        }
        let top = self.stack.last().expect("root context");
        if fs.last().is_some_and(|f| f.produces_output()) {
            return top.outputs.clone();
        }
        let mut out = top.clone();
        if apply(Featlet::Output, &mut out, env) {
            out.outputs
        } else {
            Vec::new()
        }
    }
}

/// Classes of `bases` (sorted by featlet sequence) on `instances`.
fn evaluate(
    bases: &[&Template],
    corpus: &Corpus,
    lex: &Lexicons,
    instances: &[&Instance],
) -> Vec<Classes> {
    const CHUNK: usize = 64;
    let chunks: Vec<&[&Template]> = bases.chunks(CHUNK).collect();
    chunks
        .par_iter()
        .flat_map_iter(|chunk| {
            let mut interners: Vec<Interner> = chunk.iter().map(|_| Interner::new()).collect();
            let mut classes: Vec<Vec<u32>> = chunk
                .iter()
                .map(|_| Vec::with_capacity(instances.len()))
                .collect();
            for inst in instances {
                let env = Env {
                    sent: &corpus.sentences[inst.sentence],
                    lex,
                    inst,
                    freq: None,
                };
                let mut runner = PrefixRunner::new();
                for (j, t) in chunk.iter().enumerate() {
                    let out = runner.run(t, &env);
                    classes[j].push(interners[j].intern(out));
                }
            }
            classes
                .into_iter()
                .zip(interners)
                .map(|(per_instance, i)| Classes {
                    per_instance,
                    values: i.values,
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn split_transform(t: &Template) -> Result<(Template, Option<FreqTransform>)> {
    let fs = t.featlets();
    let tf = match fs.last() {
        Some(Featlet::Top(n)) => FreqTransform::Top(*n),
        Some(Featlet::Cnt(c)) => FreqTransform::Cnt(*c),
        _ => return Ok((t.clone(), None)),
    };
    if fs.len() < 2 {
        return Err(Error::InvalidTemplate(t.id().to_string()));
    }
    Ok((Template::new(fs[..fs.len() - 1].to_vec())?, Some(tf)))
}

fn has_role(t: &Template) -> bool {
    t.contains(Featlet::Role) || t.contains(Featlet::FrameRole)
}

/// Per-template class lookup: `map[base.per_instance[i]]`.
struct TemplateClasses {
    base: usize,
    map: Option<Vec<u32>>,
    classes: usize,
}

impl TemplateClasses {
    fn class(&self, bases: &[Classes], i: usize) -> u32 {
        let c = bases[self.base].per_instance[i];
        match &self.map {
            Some(m) => m[c as usize],
            None => c,
        }
    }
}

fn mi_of_counts(table: &[[u64; 2]], n: u64, estimator: Estimator) -> MiScore {
    let mut cy = [0u64; 2];
    let mut x = Vec::with_capacity(table.len());
    let mut xy = Vec::with_capacity(2 * table.len());
    for c in table {
        if c[0] + c[1] == 0 {
            continue;
        }
        x.push(c[0] + c[1]);
        for y in 0..2 {
            cy[y] += c[y];
            if c[y] > 0 {
                xy.push(c[y]);
            }
        }
    }
    let y: Vec<u64> = cy.into_iter().filter(|&c| c > 0).collect();
    score_from_counts(&y, &x, &xy, n, estimator)
}

/// Scores the stage's candidate products on `instances` (labels in
/// `Instance::gold`): every template once, then products of higher orders
/// chosen by the noisy heuristic within the budget.
///
/// `templates` is the full inventory, transformed variants included; noise
/// is drawn per inventory position, so the same seed gives the same noise
/// to a template in both stages.
pub fn score_stage(
    stage: Stage,
    templates: &[Template],
    corpus: &Corpus,
    lex: &Lexicons,
    freq: &FreqStats,
    instances: &[Instance],
    cfg: &ScoringConfig,
) -> Result<StageScores> {
    cfg.plan.validate()?;
    if instances.is_empty() {
        return Err(Error::Invalid(format!("no {stage} instances to score")));
    }
    let noise = heuristic_noise(templates.len(), cfg.sigma, cfg.seed)?;
    let n = instances.len();

    // distinct templates that can fire here, in inventory order
    let mut seen = std::collections::HashSet::new();
    let pool: Vec<usize> = (0..templates.len())
        .filter(|&i| stage.can_fire(&templates[i]) && seen.insert(templates[i].id()))
        .collect();

    let mut base_ids: HashMap<String, usize> = HashMap::new();
    let mut bases: Vec<Template> = Vec::new();
    let mut split = Vec::with_capacity(pool.len());
    for &i in &pool {
        let (b, tf) = split_transform(&templates[i])?;
        let bi = *base_ids.entry(b.id().to_string()).or_insert_with(|| {
            bases.push(b.clone());
            bases.len() - 1
        });
        split.push((bi, tf));
    }

    // Role-free templates give the same values for every hypothesized role
    // of an argument: evaluate those once per distinct row.
    let mut rows: FxHashMap<
        (
            usize,
            crate::corpus::Span,
            Option<crate::corpus::Span>,
            &str,
        ),
        usize,
    > = FxHashMap::default();
    let mut row_of = Vec::with_capacity(n);
    let mut reps: Vec<&Instance> = Vec::new();
    for inst in instances {
        let key = (inst.sentence, inst.target, inst.arg, inst.frame.as_str());
        let r = *rows.entry(key).or_insert_with(|| {
            reps.push(inst);
            reps.len() - 1
        });
        row_of.push(r);
    }
    let all: Vec<&Instance> = instances.iter().collect();
    let mut order: Vec<usize> = (0..bases.len()).collect();
    order.sort_by(|&a, &b| {
        let key = |t: &Template| t.featlets().iter().map(|f| f.index()).collect::<Vec<_>>();
        key(&bases[a]).cmp(&key(&bases[b]))
    });
    let (with_role, role_free): (Vec<usize>, Vec<usize>) =
        order.into_iter().partition(|&b| has_role(&bases[b]));
    let refs = |ix: &[usize]| ix.iter().map(|&b| &bases[b]).collect::<Vec<_>>();
    let mut evaluated: Vec<Option<Classes>> = (0..bases.len()).map(|_| None).collect();
    for (b, c) in role_free
        .iter()
        .zip(evaluate(&refs(&role_free), corpus, lex, &reps))
    {
        let per_instance = row_of.iter().map(|&r| c.per_instance[r]).collect();
        evaluated[*b] = Some(Classes {
            per_instance,
            values: c.values,
        });
    }
    for (b, c) in with_role
        .iter()
        .zip(evaluate(&refs(&with_role), corpus, lex, &all))
    {
        evaluated[*b] = Some(c);
    }
    let base_classes: Vec<Classes> = evaluated
        .into_iter()
        .map(|c| c.expect("every base evaluated"))
        .collect();
    info!(
        "{stage}: {} templates ({} bases) over {n} instances",
        pool.len(),
        bases.len()
    );

    // transformed variants keep the admitted subset of their base's values
    let tclasses: Vec<TemplateClasses> = split
        .par_iter()
        .map(|&(b, tf)| {
            let values = &base_classes[b].values;
            match tf {
                None => TemplateClasses {
                    base: b,
                    map: None,
                    classes: values.len(),
                },
                Some(tf) => {
                    let id = bases[b].id();
                    let mut interner = Interner::new();
                    let map: Vec<u32> = values
                        .iter()
                        .map(|vs| {
                            interner.intern(
                                vs.iter()
                                    .filter(|v| freq.admits(id, tf, v))
                                    .cloned()
                                    .collect(),
                            )
                        })
                        .collect();
                    TemplateClasses {
                        base: b,
                        map: Some(map),
                        classes: interner.values.len(),
                    }
                }
            }
        })
        .collect();

    let labels: Vec<usize> = instances.iter().map(|i| i.gold as usize).collect();
    let single: Vec<MiScore> = tclasses
        .par_iter()
        .map(|tc| {
            let mut table = vec![[0u64; 2]; tc.classes];
            for (i, &y) in labels.iter().enumerate() {
                table[tc.class(&base_classes, i) as usize][y] += 1;
            }
            mi_of_counts(&table, n as u64, cfg.estimator)
        })
        .collect();
    let heuristic: Vec<f64> = pool
        .iter()
        .zip(&single)
        .map(|(&i, s)| s.mi + noise[i])
        .collect();
    let ranking = rank_desc(&heuristic);

    // products of each order that satisfy the stage, by inclusion-exclusion
    // over which of the two featlet groups a template has
    let pool_t: Vec<&Template> = pool.iter().map(|&i| &templates[i]).collect();
    let has_arg = |t: &Template| t.contains(Featlet::ArgHead) || t.contains(Featlet::ArgSpan);
    let p = pool_t.len() as u128;
    let no_arg = pool_t.iter().filter(|t| !has_arg(t)).count() as u128;
    let no_role = pool_t.iter().filter(|t| !has_role(t)).count() as u128;
    let neither = pool_t
        .iter()
        .filter(|t| !has_arg(t) && !has_role(t))
        .count() as u128;
    let available: Vec<u128> = (1..=cfg.plan.max_order as u128)
        .map(|k| match stage {
            Stage::ArgId => binomial(p, k) - binomial(no_arg, k),
            Stage::RoleClass => {
                binomial(p, k) + binomial(neither, k) - binomial(no_arg, k) - binomial(no_role, k)
            }
        })
        .collect();
    let quotas = allocate_budget(
        &cfg.plan,
        &available
            .iter()
            .map(|&a| a.min(u64::MAX as u128) as u64)
            .collect::<Vec<_>>(),
    );
    info!("{stage}: available {available:?}, quotas {quotas:?}");

    let mut scored = Vec::new();
    for (k, &quota) in (1..=cfg.plan.max_order).zip(&quotas) {
        let members = heuristic_products(&ranking, k, quota as usize, |m| {
            stage.admits_templates(m.iter().map(|&j| pool_t[j]))
        });
        let results: Vec<ScoredFeature> = members
            .par_iter()
            .map(|m| {
                let score = if k == 1 {
                    single[m[0]]
                } else {
                    let mut table: FxHashMap<u128, [u64; 2]> = FxHashMap::default();
                    for (i, &y) in labels.iter().enumerate() {
                        let mut key = 0u128;
                        for (slot, &j) in m.iter().enumerate() {
                            let c = tclasses[j].class(&base_classes, i);
                            if c == 0 {
                                key = 0;
                                break;
                            }
                            key |= (c as u128) << (32 * slot);
                        }
                        table.entry(key).or_insert([0, 0])[y] += 1;
                    }
                    let mut rows: Vec<(u128, [u64; 2])> = table.into_iter().collect();
                    rows.sort_unstable_by_key(|r| r.0);
                    let dense: Vec<[u64; 2]> = rows.into_iter().map(|r| r.1).collect();
                    mi_of_counts(&dense, n as u64, cfg.estimator)
                };
                let product = FeatureProduct::new(m.iter().map(|&j| pool_t[j].clone()).collect())
                    .expect("nonempty");
                ScoredFeature {
                    product,
                    mi: score.mi,
                    hx: score.hx,
                    heuristic: Some(heuristic[m[0]]),
                }
            })
            .collect();
        scored.extend(results);
    }
    info!("{stage}: scored {} products", scored.len());
    Ok(StageScores {
        scored,
        available,
        quotas,
        pool: pool.len(),
    })
}

/// The value a product takes on one instance, for exact counting: its
/// distinct features joined, or the empty marker.
pub fn product_value(p: &FeatureProduct, env: &Env) -> String {
    let mut v = run_product(p, env);
    if v.is_empty() {
        return String::empty();
    }
    v.sort_unstable();
    v.dedup();
    v.join("\u{1f}")
}

/// One exact table per product, straight from running the products.
/// Instances are counted on worker-local tables merged by summation.
pub fn count_products(
    products: &[FeatureProduct],
    corpus: &Corpus,
    lex: &Lexicons,
    freq: Option<&FreqStats>,
    instances: &[Instance],
) -> Vec<CountTable> {
    products
        .par_iter()
        .map(|p| {
            instances
                .iter()
                .map(|inst| {
                    let env = Env {
                        sent: &corpus.sentences[inst.sentence],
                        lex,
                        inst,
                        freq,
                    };
                    (product_value(p, &env), inst.gold)
                })
                .fold(CountTable::default(), |mut t, (x, y)| {
                    t.add(x, y);
                    t
                })
        })
        .collect()
}
