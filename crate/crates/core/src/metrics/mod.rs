//! Reliability of human judgments and fairness statistics of labeled data.

mod agreement;
mod fairness;

pub use agreement::{
    decompose_multilabel, gwet_ac1, iar_report, krippendorff_alpha, percent_agreement, IarReport,
    JudgmentMatrix,
};
pub use fairness::{
    auc, compute_deficit, subgroup_aucs, toxicity_rates, FairnessReport, SubgroupStats,
    TOXIC_THRESHOLD,
};
