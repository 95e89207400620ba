use std::fmt::Write as _;

use rayon::prelude::*;

use super::decode::{decode_all, evaluate, gold_predictions, ArgSource};
use super::model::{Model, StageModel};
use super::train::{majority_roleclass, train_argid, train_roleclass, TrainConfig, TrainData};
use super::Stage;
use crate::context::FeatureProduct;
use crate::corpus::{Corpus, SrlAnnotation};
use crate::error::Result;

pub const GRID_SIZES: [usize; 4] = [0, 8, 16, 32];

/// Test F1 by feature set size. Rows are role classification sizes,
/// columns argument identification sizes. A zero argument size decodes
/// from gold argument spans; a zero role size answers the majority role.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub sizes: Vec<usize>,
    pub f1: Vec<Vec<f64>>,
}

impl Grid {
    /// Adjacent cells where F1 strictly drops as a size grows, along rows
    /// and along columns.
    pub fn inversions(&self) -> Vec<((usize, usize), (usize, usize))> {
        let n = self.sizes.len();
        let mut out = Vec::new();
        for r in 0..n {
            for c in 0..n {
                if c + 1 < n && self.f1[r][c + 1] < self.f1[r][c] {
                    out.push(((r, c), (r, c + 1)));
                }
                if r + 1 < n && self.f1[r + 1][c] < self.f1[r][c] {
                    out.push(((r, c), (r + 1, c)));
                }
            }
        }
        out
    }

    pub fn to_tsv(&self, header: &[String]) -> String {
        let mut out = String::new();
        for h in header {
            let _ = writeln!(out, "# {h}");
        }
        let _ = writeln!(out, "# rows: roleclass size; columns: argid size");
        let _ = writeln!(
            out,
            "# argid 0 = gold argument spans; roleclass 0 = majority role"
        );
        out.push_str("role\\argid");
        for s in &self.sizes {
            let _ = write!(out, "\t{s}");
        }
        out.push('\n');
        for (s, row) in self.sizes.iter().zip(&self.f1) {
            let _ = write!(out, "{s}");
            for v in row {
                let _ = write!(out, "\t{v:.4}");
            }
            out.push('\n');
        }
        out
    }
}

/// Trains one model per stage and size (top-`size` of each ranked list)
/// and scores every combination on `test`.
pub fn sensitivity_grid(
    data: &TrainData,
    test: &Corpus,
    argid_ranked: &[FeatureProduct],
    role_ranked: &[FeatureProduct],
    sizes: &[usize],
    cfg: &TrainConfig,
) -> Result<Grid> {
    let argid: Vec<Option<StageModel>> = sizes
        .par_iter()
        .map(|&k| match k {
            0 => Ok(None),
            _ => train_argid(data, &argid_ranked[..k.min(argid_ranked.len())], cfg).map(Some),
        })
        .collect::<Result<_>>()?;
    let roleclass: Vec<StageModel> = sizes
        .par_iter()
        .map(|&k| match k {
            0 => majority_roleclass(data),
            _ => train_roleclass(data, &role_ranked[..k.min(role_ranked.len())], cfg),
        })
        .collect::<Result<_>>()?;

    let anns: Vec<&SrlAnnotation> = test.annotations.iter().collect();
    let gold = gold_predictions(&anns);
    let cells: Vec<(usize, usize)> = (0..sizes.len())
        .flat_map(|r| (0..sizes.len()).map(move |c| (r, c)))
        .collect();
    let scores: Vec<f64> = cells
        .par_iter()
        .map(|&(r, c)| {
            let (argid, source) = match &argid[c] {
                Some(m) => (m.clone(), ArgSource::Model),
                None => (StageModel::unused(Stage::ArgId), ArgSource::Gold),
            };
            let model = Model {
                argid,
                roleclass: roleclass[r].clone(),
                roles: data.roles.clone(),
                dev_f1: 0.0,
            };
            let (pred, _) = decode_all(&model, test, data.lex, data.freq, &anns, source)?;
            Ok(evaluate(&pred, &gold).f1)
        })
        .collect::<Result<_>>()?;
    let n = sizes.len();
    Ok(Grid {
        sizes: sizes.to_vec(),
        f1: scores.chunks(n).map(<[f64]>::to_vec).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_adjacent_drops() {
        let g = Grid {
            sizes: vec![0, 8],
            f1: vec![vec![0.5, 0.4], vec![0.6, 0.3]],
        };
        // 0.5 -> 0.4 along row 0, 0.6 -> 0.3 along row 1, 0.4 -> 0.3 down column 1
        assert_eq!(g.inversions().len(), 3);
        let flat = Grid {
            sizes: vec![0, 8],
            f1: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        };
        assert!(flat.inversions().is_empty());
    }
}
