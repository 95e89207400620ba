use std::collections::{BTreeMap, HashSet};

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::candidates::{argid_instances, generate_candidates, role_inventory};
use super::decode::{decode_all, evaluate, gold_predictions, ArgSource, Prf};
use super::model::{extract, FeatureDict, Model, StageModel, BIAS};
use super::perceptron::Averaged;
use super::Stage;
use crate::context::{Env, FeatureProduct, FreqStats, Instance};
use crate::corpus::{Corpus, Lexicons, Span, SrlAnnotation};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub passes: usize,
    pub seed: u64,
    pub dev_fraction: f64,
    /// Add gold spans missing from the parse to the training candidates.
    pub gold_union: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            passes: 10,
            seed: 1,
            dev_fraction: 0.1,
            gold_union: true,
        }
    }
}

/// Training material: a corpus with its targets split into train and dev.
pub struct TrainData<'a> {
    pub corpus: &'a Corpus,
    pub lex: &'a Lexicons,
    pub freq: Option<&'a FreqStats>,
    pub train: Vec<&'a SrlAnnotation>,
    pub dev: Vec<&'a SrlAnnotation>,
    pub roles: Vec<String>,
}

impl<'a> TrainData<'a> {
    /// Holds out a seeded `dev_fraction` of the targets, at least one when
    /// there are two or more.
    pub fn split(
        corpus: &'a Corpus,
        lex: &'a Lexicons,
        freq: Option<&'a FreqStats>,
        cfg: &TrainConfig,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&cfg.dev_fraction) {
            return Err(Error::Invalid(format!(
                "dev fraction must be in [0, 1), got {}",
                cfg.dev_fraction
            )));
        }
        let n = corpus.annotations.len();
        let mut k = (n as f64 * cfg.dev_fraction).round() as usize;
        if cfg.dev_fraction > 0.0 && n >= 2 {
            k = k.clamp(1, n - 1);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let dev_idx: HashSet<usize> = index::sample(&mut rng, n, k).into_iter().collect();
        let (mut train, mut dev) = (Vec::new(), Vec::new());
        for (i, a) in corpus.annotations.iter().enumerate() {
            if dev_idx.contains(&i) {
                dev.push(a);
            } else {
                train.push(a);
            }
        }
        Ok(TrainData {
            corpus,
            lex,
            freq,
            train,
            dev,
            roles: role_inventory(corpus),
        })
    }

    fn features(&self, stage: Stage, products: &[FeatureProduct], inst: &Instance) -> Vec<String> {
        let env = Env {
            sent: &self.corpus.sentences[inst.sentence],
            lex: self.lex,
            inst,
            freq: self.freq,
        };
        extract(stage, products, &env)
    }
}

fn check_products(stage: Stage, products: &[FeatureProduct]) -> Result<()> {
    if products.is_empty() {
        return Err(Error::Invalid(format!("{stage}: empty feature set")));
    }
    stage.check(products)
}

/// Runs the passes, keeping the averaged weights of the pass with the best
/// dev score (the earliest on ties).
fn run_passes(
    dim: usize,
    n: usize,
    cfg: &TrainConfig,
    mut step: impl FnMut(&mut Averaged, usize),
    dev_score: impl Fn(&[f64]) -> f64,
) -> (Vec<f64>, f64, usize) {
    let mut p = Averaged::new(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut best = (Vec::new(), f64::NEG_INFINITY, 0);
    for pass in 1..=cfg.passes {
        order.shuffle(&mut rng);
        for &i in &order {
            step(&mut p, i);
            p.tick();
        }
        let w = p.averaged();
        let f = dev_score(&w);
        log::debug!("pass {pass}: dev {f:.4}");
        if f > best.1 {
            best = (w, f, pass);
        }
    }
    if best.2 == 0 {
        best = (p.averaged(), 0.0, 0);
    }
    best
}

/// Binary argument identification: a candidate is an argument when its
/// score is positive.
pub fn train_argid(
    data: &TrainData,
    products: &[FeatureProduct],
    cfg: &TrainConfig,
) -> Result<StageModel> {
    check_products(Stage::ArgId, products)?;
    let insts = argid_instances(data.corpus, &data.train, cfg.gold_union);
    let feats: Vec<Vec<String>> = insts
        .par_iter()
        .map(|i| data.features(Stage::ArgId, products, i))
        .collect();
    let mut dict = FeatureDict::default();
    let xs: Vec<Vec<u32>> = feats.into_iter().map(|f| dict.encode_grow(f)).collect();
    let ys: Vec<f64> = insts
        .iter()
        .map(|i| if i.gold { 1.0 } else { -1.0 })
        .collect();

    // dev: parse candidates only, as at test time
    let dev_insts = argid_instances(data.corpus, &data.dev, false);
    let dev_x: Vec<Vec<u32>> = dev_insts
        .par_iter()
        .map(|i| dict.encode(&data.features(Stage::ArgId, products, i)))
        .collect();
    let dev_gold: usize = data
        .dev
        .iter()
        .map(|a| {
            a.args
                .iter()
                .map(|x| x.span)
                .collect::<HashSet<Span>>()
                .len()
        })
        .sum();

    let (weights, best_dev_f1, best_pass) = run_passes(
        dict.len(),
        xs.len(),
        cfg,
        |p, i| {
            if ys[i] * p.score(&xs[i]) <= 0.0 {
                p.update(&xs[i], ys[i]);
            }
        },
        |w| {
            let (mut tp, mut fp) = (0, 0);
            for (x, inst) in dev_x.iter().zip(&dev_insts) {
                if super::perceptron::dot(w, x) > 0.0 {
                    if inst.gold {
                        tp += 1;
                    } else {
                        fp += 1;
                    }
                }
            }
            Prf::from_counts(tp, fp, dev_gold - tp).f1
        },
    );
    Ok(StageModel {
        stage: Stage::ArgId,
        products: products.to_vec(),
        dict,
        weights,
        best_dev_f1,
        best_pass,
    })
}

/// Gold arguments with one feature vector per role of `roles`, and the
/// index of the gold role (`None` when it is not in the inventory).
fn role_examples(
    data: &TrainData,
    anns: &[&SrlAnnotation],
    products: &[FeatureProduct],
) -> Vec<(Vec<Vec<String>>, Option<usize>)> {
    let mut bases = Vec::new();
    for ann in anns {
        let Some(si) = data.corpus.sentence_index(&ann.sentence_id) else {
            continue;
        };
        let sent = &data.corpus.sentences[si];
        for arg in &ann.args {
            let inst = Instance::new(si, sent, ann.target, &ann.frame).with_arg(sent, arg.span);
            bases.push((inst, data.roles.iter().position(|r| *r == arg.role)));
        }
    }
    bases
        .par_iter()
        .map(|(inst, gold)| {
            let per_role = data
                .roles
                .iter()
                .map(|r| data.features(Stage::RoleClass, products, &inst.clone().with_role(r)))
                .collect();
            (per_role, *gold)
        })
        .collect()
}

fn argmax(scores: impl Iterator<Item = f64>) -> usize {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, s) in scores.enumerate() {
        if s > best.0 {
            best = (s, i);
        }
    }
    best.1
}

/// Multiclass role classification with one weight vector over features
/// conjoined with the hypothesized role. Dev score is accuracy on gold
/// arguments.
pub fn train_roleclass(
    data: &TrainData,
    products: &[FeatureProduct],
    cfg: &TrainConfig,
) -> Result<StageModel> {
    check_products(Stage::RoleClass, products)?;
    if data.roles.is_empty() {
        return Err(Error::Invalid("no roles in the training data".into()));
    }
    let mut dict = FeatureDict::default();
    let train: Vec<(Vec<Vec<u32>>, usize)> = role_examples(data, &data.train, products)
        .into_iter()
        .filter_map(|(per_role, gold)| {
            let xs = per_role.into_iter().map(|f| dict.encode_grow(f)).collect();
            gold.map(|g| (xs, g))
        })
        .collect();
    let dev: Vec<(Vec<Vec<u32>>, Option<usize>)> = role_examples(data, &data.dev, products)
        .into_iter()
        .map(|(per_role, gold)| (per_role.iter().map(|f| dict.encode(f)).collect(), gold))
        .collect();

    let (weights, best_dev_f1, best_pass) = run_passes(
        dict.len(),
        train.len(),
        cfg,
        |p, i| {
            let (xs, g) = &train[i];
            let pred = argmax(xs.iter().map(|x| p.score(x)));
            if pred != *g {
                p.update(&xs[*g], 1.0);
                p.update(&xs[pred], -1.0);
            }
        },
        |w| {
            if dev.is_empty() {
                return 0.0;
            }
            let right = dev
                .iter()
                .filter(|(xs, g)| {
                    Some(argmax(xs.iter().map(|x| super::perceptron::dot(w, x)))) == *g
                })
                .count();
            right as f64 / dev.len() as f64
        },
    );
    Ok(StageModel {
        stage: Stage::RoleClass,
        products: products.to_vec(),
        dict,
        weights,
        best_dev_f1,
        best_pass,
    })
}

/// A role classifier with no features that always answers the most frequent
/// training role (the first in inventory order on ties).
pub fn majority_roleclass(data: &TrainData) -> Result<StageModel> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for a in data.train.iter().flat_map(|a| &a.args) {
        *counts.entry(a.role.as_str()).or_default() += 1;
    }
    let top = data
        .roles
        .iter()
        .enumerate()
        .max_by_key(|(i, r)| {
            (
                counts.get(r.as_str()).copied().unwrap_or(0),
                std::cmp::Reverse(*i),
            )
        })
        .map(|(_, r)| r.clone())
        .ok_or_else(|| Error::Invalid("no roles in the training data".into()))?;
    let dev_args: Vec<&str> = data
        .dev
        .iter()
        .flat_map(|a| &a.args)
        .map(|a| a.role.as_str())
        .collect();
    let acc = if dev_args.is_empty() {
        0.0
    } else {
        dev_args.iter().filter(|r| **r == top).count() as f64 / dev_args.len() as f64
    };
    let mut dict = FeatureDict::default();
    dict.insert(format!("{BIAS}={top}"));
    Ok(StageModel {
        stage: Stage::RoleClass,
        products: Vec::new(),
        dict,
        weights: vec![1.0],
        best_dev_f1: acc,
        best_pass: 0,
    })
}

/// End-to-end F1 of a model on the dev targets.
pub fn dev_f1(data: &TrainData, model: &Model, source: ArgSource) -> Result<f64> {
    let (pred, _) = decode_all(model, data.corpus, data.lex, data.freq, &data.dev, source)?;
    Ok(evaluate(&pred, &gold_predictions(&data.dev)).f1)
}

pub fn assemble(data: &TrainData, argid: StageModel, roleclass: StageModel) -> Result<Model> {
    let mut m = Model {
        argid,
        roleclass,
        roles: data.roles.clone(),
        dev_f1: 0.0,
    };
    m.dev_f1 = dev_f1(data, &m, ArgSource::Model)?;
    Ok(m)
}

/// Trains both stages on the train part of `data`.
pub fn train(
    data: &TrainData,
    argid: &[FeatureProduct],
    roleclass: &[FeatureProduct],
    cfg: &TrainConfig,
) -> Result<Model> {
    let a = train_argid(data, argid, cfg)?;
    let r = train_roleclass(data, roleclass, cfg)?;
    log::info!(
        "argid: best pass {} dev F1 {:.4}; roleclass: best pass {} dev acc {:.4}",
        a.best_pass,
        a.best_dev_f1,
        r.best_pass,
        r.best_dev_f1
    );
    assemble(data, a, r)
}

/// Index of the model with the best end-to-end dev F1; ties go to the
/// smaller feature dictionary, then to the earlier model.
pub fn best_model(models: &[Model]) -> Option<usize> {
    let size = |m: &Model| m.argid.dict.len() + m.roleclass.dict.len();
    (0..models.len()).min_by(|&a, &b| {
        let (x, y) = (&models[a], &models[b]);
        y.dev_f1
            .total_cmp(&x.dev_f1)
            .then(size(x).cmp(&size(y)))
            .then(a.cmp(&b))
    })
}

/// Number of candidate spans the decoder sees for `anns`.
pub fn candidate_count(corpus: &Corpus, anns: &[&SrlAnnotation]) -> usize {
    anns.iter()
        .filter_map(|a| corpus.sentence(&a.sentence_id))
        .map(|s| generate_candidates(s, None).len())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::toy::{generate, ToyConfig};

    fn products(list: &[&str]) -> Vec<FeatureProduct> {
        list.iter().map(|p| p.parse().unwrap()).collect()
    }

    #[test]
    fn split_is_seeded_and_disjoint() {
        let toy = generate(&ToyConfig::default());
        let lex = Lexicons::default();
        let cfg = TrainConfig::default();
        let a = TrainData::split(&toy.train, &lex, None, &cfg).unwrap();
        let b = TrainData::split(&toy.train, &lex, None, &cfg).unwrap();
        assert_eq!(a.dev, b.dev);
        assert_eq!(a.dev.len(), 5);
        assert_eq!(a.train.len() + a.dev.len(), toy.train.annotations.len());
        assert!(a
            .dev
            .iter()
            .all(|d| !a.train.iter().any(|t| std::ptr::eq(*t, *d))));
    }

    #[test]
    fn empty_and_misplaced_feature_sets_are_rejected() {
        let toy = generate(&ToyConfig::default());
        let lex = Lexicons::default();
        let cfg = TrainConfig::default();
        let data = TrainData::split(&toy.train, &lex, None, &cfg).unwrap();
        assert!(train_argid(&data, &[], &cfg).is_err());
        assert!(train_roleclass(&data, &products(&["ArgHead+Word"]), &cfg).is_err());
    }

    #[test]
    fn best_model_prefers_dev_then_size() {
        let stage = |n: usize| {
            let mut s = StageModel::unused(Stage::ArgId);
            for i in 0..n {
                s.dict.insert(format!("f{i}"));
            }
            s
        };
        let m = |f1: f64, n: usize| Model {
            argid: stage(n),
            roleclass: StageModel::unused(Stage::RoleClass),
            roles: Vec::new(),
            dev_f1: f1,
        };
        assert_eq!(
            best_model(&[m(0.9, 1), m(1.0, 50), m(1.0, 10), m(1.0, 10)]),
            Some(2)
        );
        assert_eq!(best_model(&[]), None);
    }

    #[test]
    fn majority_baseline_answers_one_role() {
        let toy = generate(&ToyConfig::default());
        let lex = Lexicons::default();
        let data = TrainData::split(&toy.train, &lex, None, &TrainConfig::default()).unwrap();
        let m = majority_roleclass(&data).unwrap();
        assert_eq!(m.weights, vec![1.0]);
        assert!(m.dict.names()[0].starts_with("<bias>="));
    }
}
