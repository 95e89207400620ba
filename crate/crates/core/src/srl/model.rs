use std::collections::HashMap;
use std::fmt::Write as _;

use super::perceptron::dot;
use super::Stage;
use crate::context::{run_product, Env, FeatureProduct};
use crate::error::{Error, Result};

pub(crate) const BIAS: &str = "<bias>";

/// Feature strings of one stage: the bias, then every product's values.
/// Role classification instances carry their hypothesized role, so the
/// bias there is per role.
pub fn extract(stage: Stage, products: &[FeatureProduct], env: &Env) -> Vec<String> {
    let mut out = Vec::new();
    match (stage, &env.inst.role) {
        (Stage::RoleClass, Some(r)) => out.push(format!("{BIAS}={r}")),
        _ => out.push(BIAS.to_string()),
    }
    for p in products {
        out.extend(run_product(p, env));
    }
    out
}

/// Feature string to index.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureDict {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl FeatureDict {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, f: &str) -> Option<u32> {
        self.index.get(f).copied()
    }

    pub fn insert(&mut self, f: String) -> u32 {
        if let Some(&i) = self.index.get(&f) {
            return i;
        }
        let i = self.names.len() as u32;
        self.index.insert(f.clone(), i);
        self.names.push(f);
        i
    }

    pub fn encode_grow(&mut self, feats: Vec<String>) -> Vec<u32> {
        feats.into_iter().map(|f| self.insert(f)).collect()
    }

    /// Unknown features are dropped.
    pub fn encode(&self, feats: &[String]) -> Vec<u32> {
        feats.iter().filter_map(|f| self.get(f)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageModel {
    pub stage: Stage,
    pub products: Vec<FeatureProduct>,
    pub dict: FeatureDict,
    /// Averaged weights of the best pass, one per dictionary entry.
    pub weights: Vec<f64>,
    pub best_dev_f1: f64,
    /// 1-based; 0 when no pass was run.
    pub best_pass: usize,
}

impl StageModel {
    /// A featureless stage, for decodes that bypass it.
    pub fn unused(stage: Stage) -> Self {
        StageModel {
            stage,
            products: Vec::new(),
            dict: FeatureDict::default(),
            weights: Vec::new(),
            best_dev_f1: 0.0,
            best_pass: 0,
        }
    }

    pub fn score(&self, feats: &[String]) -> f64 {
        dot(&self.weights, &self.dict.encode(feats))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub argid: StageModel,
    pub roleclass: StageModel,
    pub roles: Vec<String>,
    /// End-to-end F1 of both stages on the dev targets.
    pub dev_f1: f64,
}

/// Manifest lines first, then for each stage a `stage` line, its products,
/// its dictionary (`index<TAB>feature`) and its averaged weights
/// (`index<TAB>value`).
pub fn write_model(header: &[String], m: &Model) -> String {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    let _ = writeln!(out, "roles\t{}", m.roles.join("\t"));
    let _ = writeln!(out, "dev_f1\t{}", m.dev_f1);
    for s in [&m.argid, &m.roleclass] {
        let _ = writeln!(
            out,
            "stage\t{}\t{}\t{}\t{}",
            s.stage,
            s.best_dev_f1,
            s.best_pass,
            s.dict.len()
        );
        for p in &s.products {
            let _ = writeln!(out, "product\t{p}");
        }
        for (i, f) in s.dict.names().iter().enumerate() {
            let _ = writeln!(out, "feature\t{i}\t{f}");
        }
        for (i, w) in s.weights.iter().enumerate() {
            let _ = writeln!(out, "weight\t{i}\t{w}");
        }
    }
    out
}

pub fn parse_model(text: &str, path: &str) -> Result<Model> {
    let mut roles = None;
    let mut dev_f1 = None;
    let mut stages: Vec<StageModel> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::parse(path, i + 1, msg);
        let cols: Vec<&str> = line.split('\t').collect();
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| err(format!("bad number `{s}`")))
        };
        let idx = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(format!("bad index `{s}`")))
        };
        match cols[0] {
            "roles" => roles = Some(cols[1..].iter().map(|s| s.to_string()).collect::<Vec<_>>()),
            "dev_f1" if cols.len() == 2 => dev_f1 = Some(num(cols[1])?),
            "stage" if cols.len() == 5 => stages.push(StageModel {
                stage: cols[1].parse().map_err(|e| err(format!("{e}")))?,
                products: Vec::new(),
                dict: FeatureDict::default(),
                weights: Vec::with_capacity(idx(cols[4])?),
                best_dev_f1: num(cols[2])?,
                best_pass: idx(cols[3])?,
            }),
            tag @ ("product" | "feature" | "weight") => {
                let s = stages
                    .last_mut()
                    .ok_or_else(|| err(format!("`{tag}` before any stage")))?;
                match (tag, cols.len()) {
                    ("product", 2) => s
                        .products
                        .push(cols[1].parse().map_err(|e| err(format!("{e}")))?),
                    ("feature", 3) => {
                        if idx(cols[1])? != s.dict.len() {
                            return Err(err("feature indices must be consecutive".into()));
                        }
                        s.dict.insert(cols[2].to_string());
                    }
                    ("weight", 3) => {
                        if idx(cols[1])? != s.weights.len() {
                            return Err(err("weight indices must be consecutive".into()));
                        }
                        s.weights.push(num(cols[2])?);
                    }
                    _ => return Err(err(format!("malformed `{tag}` line"))),
                }
            }
            other => return Err(err(format!("unexpected line `{other}`"))),
        }
    }
    let bad = |msg: &str| Error::parse(path, 0, msg);
    if stages.len() != 2 || stages[0].stage != Stage::ArgId || stages[1].stage != Stage::RoleClass {
        return Err(bad("expected an argid and a roleclass stage"));
    }
    for s in &stages {
        if s.weights.len() != s.dict.len() {
            return Err(bad("weight and feature counts differ"));
        }
    }
    let roleclass = stages.pop().expect("two stages");
    let argid = stages.pop().expect("two stages");
    Ok(Model {
        argid,
        roleclass,
        roles: roles.ok_or_else(|| bad("missing roles line"))?,
        dev_f1: dev_f1.ok_or_else(|| bad("missing dev_f1 line"))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stage(stage: Stage, products: &[&str], feats: &[&str], w: &[f64]) -> StageModel {
        let mut dict = FeatureDict::default();
        for f in feats {
            dict.insert(f.to_string());
        }
        StageModel {
            stage,
            products: products.iter().map(|p| p.parse().unwrap()).collect(),
            dict,
            weights: w.to_vec(),
            best_dev_f1: 0.75,
            best_pass: 3,
        }
    }

    #[test]
    fn model_round_trip() {
        let m = Model {
            argid: stage(
                Stage::ArgId,
                &["ArgHead+Word"],
                &[BIAS, "ArgHead+Word=dog"],
                &[-0.5, 1.0 / 3.0],
            ),
            roleclass: stage(
                Stage::RoleClass,
                &["ArgHead+DepRel;Role"],
                &["<bias>=Agent"],
                &[0.1],
            ),
            roles: vec!["Agent".into(), "Theme".into()],
            dev_f1: 0.9,
        };
        let text = write_model(&["seed=1".into()], &m);
        assert_eq!(parse_model(&text, "m").unwrap(), m);
        let broken = text.replace("weight\t1\t", "weight\t7\t");
        assert!(parse_model(&broken, "m").is_err());
    }

    #[test]
    fn dictionary() {
        let mut d = FeatureDict::default();
        assert_eq!(
            d.encode_grow(vec!["a".into(), "b".into(), "a".into()]),
            vec![0, 1, 0]
        );
        assert_eq!(d.encode(&["b".into(), "zzz".into()]), vec![1]);
    }
}
