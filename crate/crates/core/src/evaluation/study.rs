use std::fmt;
use std::str::FromStr;

use super::{
    evaluate_variants, gain, EvalConfig, EvalReport, Gain, Recommender, RerankMode, RerankSpec,
};
use crate::corpus::Split;
use crate::error::{Error, Result};
use crate::foldcons::PcmDimensions;
use crate::recommend::TagScorer;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyKind {
    /// Single reference at positions 1..4.
    Reference,
    /// Mean over the first m candidates, m in 1..4.
    MultiReference,
    /// Item, user and both PCM dimensions.
    Dimension,
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reference" => Ok(StudyKind::Reference),
            "multi" | "multi-reference" => Ok(StudyKind::MultiReference),
            "dimension" | "dimensions" => Ok(StudyKind::Dimension),
            _ => Err(Error::Config(format!(
                "unknown study '{s}' (reference|multi|dimension)"
            ))),
        }
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyKind::Reference => "reference",
            StudyKind::MultiReference => "multi",
            StudyKind::Dimension => "dimension",
        })
    }
}

/// Gains of each study variant over the un-reranked base at one cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyTable {
    pub kind: StudyKind,
    pub k: usize,
    pub columns: Vec<String>,
    pub base: EvalReport,
    pub variants: Vec<EvalReport>,
    pub gains: Vec<Gain>,
}

fn variants(kind: StudyKind, template: RerankSpec) -> (Vec<String>, Vec<RerankSpec>) {
    let template = RerankSpec {
        mode: match template.mode {
            RerankMode::None => RerankMode::FoldCons,
            m => m,
        },
        ..template
    };
    match kind {
        StudyKind::Reference => (1..=4)
            .map(|p| {
                (
                    format!("ref {p}"),
                    RerankSpec {
                        reference_position: Some(p),
                        ..template
                    },
                )
            })
            .unzip(),
        StudyKind::MultiReference => (1..=4)
            .map(|m| {
                let mut spec = RerankSpec {
                    reference_position: None,
                    ..template
                };
                spec.pcm.references = m;
                (format!("m={m}"), spec)
            })
            .unzip(),
        StudyKind::Dimension => [
            PcmDimensions::Item,
            PcmDimensions::User,
            PcmDimensions::Both,
        ]
        .into_iter()
        .map(|d| {
            let mut spec = template;
            spec.pcm.dimensions = d;
            (d.to_string(), spec)
        })
        .unzip(),
    }
}

/// Runs one study with an already fitted scorer. The cutoff is `cfg.k_min`
/// and the variants inherit the rest of `cfg.rerank`; a re-ranker of
/// `none` is treated as `foldcons`.
pub fn run_study<S: TagScorer + ?Sized>(
    split: &Split,
    scorer: &S,
    cfg: &EvalConfig,
    kind: StudyKind,
) -> Result<StudyTable> {
    let k = cfg.k_min;
    let at_k = EvalConfig {
        k_max: k,
        ..cfg.clone()
    };
    let (columns, specs) = variants(kind, cfg.rerank);
    let mut all = vec![RerankSpec::none()];
    all.extend(specs);
    let mut reports = evaluate_variants(split, scorer, &at_k, &all)?;
    let base = reports.remove(0);
    let gains = reports
        .iter()
        .map(|r| gain(&base, r, k))
        .collect::<Result<_>>()?;
    Ok(StudyTable {
        kind,
        k,
        columns,
        base,
        variants: reports,
        gains,
    })
}

fn fit_and_run(split: &Split, cfg: &EvalConfig, kind: StudyKind) -> Result<StudyTable> {
    cfg.validate()?;
    let rec = Recommender::fit(&split.train, &cfg.recommender)?;
    run_study(split, &rec, cfg, kind)
}

pub fn run_reference_tag_study(split: &Split, cfg: &EvalConfig) -> Result<StudyTable> {
    fit_and_run(split, cfg, StudyKind::Reference)
}

pub fn run_multi_reference_study(split: &Split, cfg: &EvalConfig) -> Result<StudyTable> {
    fit_and_run(split, cfg, StudyKind::MultiReference)
}

pub fn run_dimension_study(split: &Split, cfg: &EvalConfig) -> Result<StudyTable> {
    fit_and_run(split, cfg, StudyKind::Dimension)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{leave_post_out, Folksonomy, Triple};
    use crate::evaluation::{evaluate, ConfidenceSource, RecommenderKind};
    use crate::foldcons::PcmConfig;

    fn small_split() -> Split {
        let mut triples = Vec::new();
        for u in 0..6u32 {
            for i in 0..5u32 {
                let i = (u + i) % 8;
                triples.push(Triple::new(u, i, i % 3));
                triples.push(Triple::new(u, i, 3 + (u + i) % 4));
                triples.push(Triple::new(u, i, 7 + u % 2));
            }
        }
        leave_post_out(&Folksonomy::build(&triples), 3).unwrap()
    }

    fn cfg() -> EvalConfig {
        let mut cfg = EvalConfig::default();
        cfg.recommender.kind = RecommenderKind::Baseline;
        cfg
    }

    #[test]
    fn zero_confidence_gives_zero_gains() {
        let split = small_split();
        let mut cfg = cfg();
        cfg.rerank.confidence = ConfidenceSource::Constant(0.0);
        for kind in [
            StudyKind::Reference,
            StudyKind::MultiReference,
            StudyKind::Dimension,
        ] {
            let t = fit_and_run(&split, &cfg, kind).unwrap();
            assert!(
                t.gains.iter().all(|g| *g == Gain::Percent(0.0)),
                "{kind}: {:?}",
                t.gains
            );
        }
    }

    #[test]
    fn first_row_matches_plain_rerank() {
        let split = small_split();
        let t = run_multi_reference_study(&split, &cfg()).unwrap();
        let mut plain = cfg();
        plain.k_max = 5;
        plain.rerank = RerankSpec::foldcons(PcmConfig::default());
        let direct = evaluate(&split, &plain).unwrap();
        assert_eq!(t.variants[0].f1, direct.f1);
        let r = run_reference_tag_study(&split, &cfg()).unwrap();
        assert_eq!(r.variants[0].f1, direct.f1);
        assert_eq!(r.columns, ["ref 1", "ref 2", "ref 3", "ref 4"]);
        let d = run_dimension_study(&split, &cfg()).unwrap();
        assert_eq!(d.variants[2].f1, direct.f1);
    }

    #[test]
    fn empty_test_set() {
        let mut split = small_split();
        split.test.clear();
        let t = run_dimension_study(&split, &cfg()).unwrap();
        assert!(t.gains.iter().all(|g| *g == Gain::Percent(0.0)));
    }
}
