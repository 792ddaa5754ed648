use std::fmt;

use super::EvalReport;
use crate::error::{Error, Result};
use crate::ids::TagId;
use crate::recommend::RankedTags;

/// F1 of the first `k` recommended tags against `truth`.
///
/// Precision divides by `min(k, |recommended|)`, so a short list is not
/// penalised for slots it could not fill. Zero hits give 0.
pub fn f1_at_k(recommended: &RankedTags, truth: &[TagId], k: usize) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let top = recommended.top(k);
    let hits = top.iter().filter(|e| truth.contains(&e.tag)).count();
    if hits == 0 {
        return Ok(0.0);
    }
    let precision = hits as f64 / top.len() as f64;
    let recall = hits as f64 / truth.len() as f64;
    Ok(2.0 * precision * recall / (precision + recall))
}

/// Relative improvement in percent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gain {
    Percent(f64),
    /// The base scored 0 and the improved run did not.
    Undefined,
}

impl Gain {
    pub fn between(base: f64, improved: f64) -> Gain {
        if base == 0.0 {
            if improved == 0.0 {
                Gain::Percent(0.0)
            } else {
                Gain::Undefined
            }
        } else {
            Gain::Percent(100.0 * (improved - base) / base)
        }
    }

    pub fn percent(self) -> Option<f64> {
        match self {
            Gain::Percent(p) => Some(p),
            Gain::Undefined => None,
        }
    }
}

impl fmt::Display for Gain {
    /// Honours the formatter's precision; undefined gains print as `n/a`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self, f.precision()) {
            (Gain::Percent(p), Some(prec)) => write!(f, "{p:.prec$}"),
            (Gain::Percent(p), None) => write!(f, "{p}"),
            (Gain::Undefined, _) => f.write_str("n/a"),
        }
    }
}

/// Gain of `improved` over `base` at cutoff `k`. Both reports must cover the
/// same posts and cutoffs.
pub fn gain(base: &EvalReport, improved: &EvalReport, k: usize) -> Result<Gain> {
    if base.ks != improved.ks || base.posts != improved.posts {
        return Err(Error::Incomparable(format!(
            "'{}' and '{}' cover different posts or cutoffs",
            base.label, improved.label
        )));
    }
    let (b, i) = (base.f1_at(k), improved.f1_at(k));
    match (b, i) {
        (Some(b), Some(i)) => Ok(Gain::between(b, i)),
        _ => Err(Error::Incomparable(format!("cutoff {k} was not evaluated"))),
    }
}
