//! Scoring a test set with every method through the uniform scorer
//! interface. Scoring is read-only and parallelizes over samples.

use baselines::{
    ClassifierScorer, DcaeErrorScorer, OcSvmScorer, OfwScorer, StackScorer, SvddScorer,
};
use flowdata::FlowStack;

use crate::auc::{auc, ScoredSample};
use crate::error::{Error, Result};
use crate::pipeline::TrainedSplit;

#[derive(Debug, Clone)]
pub struct MethodScores {
    pub method: String,
    /// E.g. the chosen nu for the grid-searched SVM.
    pub detail: Option<String>,
    pub samples: Vec<ScoredSample>,
}

/// Scores every test stack with one scorer, preserving sample order.
pub fn score_test_set(
    scorer: &dyn StackScorer,
    test: &[FlowStack],
    split_id: usize,
    jobs: usize,
) -> Result<Vec<ScoredSample>> {
    let jobs = jobs.max(1);
    if jobs == 1 || test.len() < 2 * jobs {
        return test
            .iter()
            .map(|stack| score_one(scorer, stack, split_id))
            .collect();
    }
    let chunk = test.len().div_ceil(jobs);
    let mut results: Vec<Result<Vec<ScoredSample>>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for part in test.chunks(chunk) {
            handles.push(scope.spawn(move || {
                part.iter()
                    .map(|stack| score_one(scorer, stack, split_id))
                    .collect::<Result<Vec<_>>>()
            }));
        }
        for h in handles {
            results.push(h.join().expect("scoring thread panicked"));
        }
    });
    let mut out = Vec::with_capacity(test.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

fn score_one(scorer: &dyn StackScorer, stack: &FlowStack, split_id: usize) -> Result<ScoredSample> {
    let score = scorer
        .score(stack)
        .map_err(|e| Error::Evaluation(format!("{} scoring failed: {e}", scorer.name())))?;
    Ok(ScoredSample::new(
        score,
        stack.class_label.as_u8(),
        stack.day_label,
        split_id,
    ))
}

/// The canonical method order of the comparison table.
pub const METHOD_ORDER: [&str; 7] = ["ofw", "dcae", "ocsvm", "dsvdd", "gen", "ngen", "iogen"];

/// Scores the test set with all seven methods. The SVM is scored once per
/// nu in the trained grid and the best test AUC is kept, matching the
/// best-parameter reporting protocol.
pub fn score_split(
    trained: &TrainedSplit,
    test: &[FlowStack],
    split_id: usize,
    jobs: usize,
) -> Result<Vec<MethodScores>> {
    let mut out = Vec::new();

    out.push(MethodScores {
        method: "ofw".into(),
        detail: None,
        samples: score_test_set(&OfwScorer, test, split_id, jobs)?,
    });

    let dcae_scorer = DcaeErrorScorer { model: trained.chain.dcae.clone() };
    out.push(MethodScores {
        method: "dcae".into(),
        detail: None,
        samples: score_test_set(&dcae_scorer, test, split_id, jobs)?,
    });

    let mut best: Option<(f64, MethodScores)> = None;
    for model in &trained.ocsvm {
        let scorer = OcSvmScorer {
            encoder: trained.chain.dcae.encoder.clone(),
            model: model.clone(),
        };
        let samples = score_test_set(&scorer, test, split_id, jobs)?;
        let this_auc = auc(&samples)?;
        let candidate = MethodScores {
            method: "ocsvm".into(),
            detail: Some(format!("nu={}", model.nu)),
            samples,
        };
        if best.as_ref().map(|(a, _)| this_auc > *a).unwrap_or(true) {
            best = Some((this_auc, candidate));
        }
    }
    out.push(best.expect("nu grid is never empty").1);

    let svdd_scorer = SvddScorer {
        encoder: trained.chain.dsvdd.encoder.clone(),
        center: trained.chain.dsvdd.sphere.center.clone(),
    };
    out.push(MethodScores {
        method: "dsvdd".into(),
        detail: None,
        samples: score_test_set(&svdd_scorer, test, split_id, jobs)?,
    });

    let gen_scorer = ClassifierScorer {
        method: "gen".into(),
        encoder: trained.chain.dcae.encoder.clone(),
        classifier: trained.gen.classifier.clone(),
    };
    out.push(MethodScores {
        method: "gen".into(),
        detail: None,
        samples: score_test_set(&gen_scorer, test, split_id, jobs)?,
    });

    let ngen_scorer = ClassifierScorer {
        method: "ngen".into(),
        encoder: trained.chain.dsvdd.encoder.clone(),
        classifier: trained.ngen.clone(),
    };
    out.push(MethodScores {
        method: "ngen".into(),
        detail: Some(format!("alpha={:.6}", trained.ngen_alpha)),
        samples: score_test_set(&ngen_scorer, test, split_id, jobs)?,
    });

    let iogen_scorer = ClassifierScorer {
        method: "iogen".into(),
        encoder: trained.chain.dsvdd.encoder.clone(),
        classifier: trained.chain.classifier.clone(),
    };
    out.push(MethodScores {
        method: "iogen".into(),
        detail: None,
        samples: score_test_set(&iogen_scorer, test, split_id, jobs)?,
    });

    Ok(out)
}
