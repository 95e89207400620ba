use std::collections::HashSet;
use std::fmt::Write as _;

use super::candidates::generate_candidates;
use super::model::{extract, Model, StageModel};
use super::Stage;
use crate::context::{Env, FreqStats, Instance};
use crate::corpus::{Corpus, Lexicons, Span, SrlAnnotation};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prediction {
    pub sentence_id: String,
    pub target: Span,
    pub span: Span,
    pub role: String,
}

/// How much work a decode did, in product evaluations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DecodeStats {
    pub candidates: usize,
    pub arguments: usize,
    pub argid_evals: usize,
    pub roleclass_evals: usize,
}

/// Where stage one's argument spans come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArgSource {
    Model,
    /// Gold argument spans, for grids without argument features.
    Gold,
}

/// Decodes targets of one corpus.
pub struct Decoder<'a> {
    pub corpus: &'a Corpus,
    pub lex: &'a Lexicons,
    pub freq: Option<&'a FreqStats>,
}

impl Decoder<'_> {
    fn env<'b>(&'b self, inst: &'b Instance) -> Env<'b> {
        Env {
            sent: &self.corpus.sentences[inst.sentence],
            lex: self.lex,
            inst,
            freq: self.freq,
        }
    }

    pub fn argid_score(&self, m: &StageModel, inst: &Instance, stats: &mut DecodeStats) -> f64 {
        stats.argid_evals += m.products.len();
        m.score(&extract(Stage::ArgId, &m.products, &self.env(inst)))
    }

    /// Best role for an argument; ties go to the earlier role.
    pub fn best_role(
        &self,
        m: &StageModel,
        roles: &[String],
        inst: &Instance,
        stats: &mut DecodeStats,
    ) -> usize {
        let mut best = (f64::NEG_INFINITY, 0);
        for (r, role) in roles.iter().enumerate() {
            let hyp = inst.clone().with_role(role);
            stats.roleclass_evals += m.products.len();
            let s = m.score(&extract(Stage::RoleClass, &m.products, &self.env(&hyp)));
            if s > best.0 {
                best = (s, r);
            }
        }
        best.1
    }

    /// Stage one keeps every candidate scoring above zero; stage two labels
    /// each kept span on its own. Output is sorted by span whatever the
    /// candidate order.
    pub fn decode_spans(
        &self,
        model: &Model,
        ann: &SrlAnnotation,
        candidates: &[Span],
        stats: &mut DecodeStats,
    ) -> Result<Vec<Prediction>> {
        let si = self
            .corpus
            .sentence_index(&ann.sentence_id)
            .ok_or_else(|| Error::Invalid(format!("unknown sentence `{}`", ann.sentence_id)))?;
        let sent = &self.corpus.sentences[si];
        let mut spans: Vec<Span> = Vec::new();
        for &c in candidates {
            stats.candidates += 1;
            let inst = Instance::new(si, sent, ann.target, &ann.frame).with_arg(sent, c);
            if self.argid_score(&model.argid, &inst, stats) > 0.0 {
                spans.push(c);
            }
        }
        spans.sort();
        spans.dedup();
        stats.arguments += spans.len();
        let mut out = Vec::with_capacity(spans.len());
        for span in spans {
            let inst = Instance::new(si, sent, ann.target, &ann.frame).with_arg(sent, span);
            let r = self.best_role(&model.roleclass, &model.roles, &inst, stats);
            out.push(Prediction {
                sentence_id: ann.sentence_id.clone(),
                target: ann.target,
                span,
                role: model.roles[r].clone(),
            });
        }
        Ok(out)
    }

    pub fn decode(
        &self,
        model: &Model,
        ann: &SrlAnnotation,
        source: ArgSource,
        stats: &mut DecodeStats,
    ) -> Result<Vec<Prediction>> {
        let sent = self
            .corpus
            .sentence(&ann.sentence_id)
            .ok_or_else(|| Error::Invalid(format!("unknown sentence `{}`", ann.sentence_id)))?;
        match source {
            ArgSource::Model => {
                let cands: Vec<Span> = generate_candidates(sent, None)
                    .iter()
                    .map(|c| c.span)
                    .collect();
                self.decode_spans(model, ann, &cands, stats)
            }
            ArgSource::Gold => {
                let si = self
                    .corpus
                    .sentence_index(&ann.sentence_id)
                    .expect("found above");
                let mut spans: Vec<Span> = ann.args.iter().map(|a| a.span).collect();
                spans.sort();
                spans.dedup();
                stats.arguments += spans.len();
                Ok(spans
                    .into_iter()
                    .map(|span| {
                        let inst =
                            Instance::new(si, sent, ann.target, &ann.frame).with_arg(sent, span);
                        let r = self.best_role(&model.roleclass, &model.roles, &inst, stats);
                        Prediction {
                            sentence_id: ann.sentence_id.clone(),
                            target: ann.target,
                            span,
                            role: model.roles[r].clone(),
                        }
                    })
                    .collect())
            }
        }
    }
}

/// Decodes every target of `anns`.
pub fn decode_all(
    model: &Model,
    corpus: &Corpus,
    lex: &Lexicons,
    freq: Option<&FreqStats>,
    anns: &[&SrlAnnotation],
    source: ArgSource,
) -> Result<(Vec<Prediction>, DecodeStats)> {
    let d = Decoder { corpus, lex, freq };
    let mut stats = DecodeStats::default();
    let mut out = Vec::new();
    for ann in anns {
        out.extend(d.decode(model, ann, source, &mut stats)?);
    }
    Ok((out, stats))
}

pub fn gold_predictions(anns: &[&SrlAnnotation]) -> Vec<Prediction> {
    anns.iter()
        .flat_map(|a| {
            a.args.iter().map(|x| Prediction {
                sentence_id: a.sentence_id.clone(),
                target: a.target,
                span: x.span,
                role: x.role.clone(),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Prf {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Prf {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            precision,
            recall,
            f1,
            tp,
            fp,
            fn_,
        }
    }
}

/// Exact span and role matches.
pub fn evaluate(pred: &[Prediction], gold: &[Prediction]) -> Prf {
    let p: HashSet<&Prediction> = pred.iter().collect();
    let g: HashSet<&Prediction> = gold.iter().collect();
    let tp = p.intersection(&g).count();
    Prf::from_counts(tp, p.len() - tp, g.len() - tp)
}

/// `sentenceId<TAB>target<TAB>span<TAB>role`, sorted.
pub fn write_predictions(header: &[String], pred: &[Prediction]) -> String {
    let mut rows: Vec<&Prediction> = pred.iter().collect();
    rows.sort();
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    for p in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            p.sentence_id, p.target, p.span, p.role
        );
    }
    out
}
