//! Experiments that test the inequalities and uniqueness statements on discrete solutions.

mod experiments;
mod inequalities;
mod report;
mod suite;

pub use experiments::{
    intersection_check, symmetry_experiment, symmetry_from, threshold_sweep, toda_collapse_experiment,
    toda_collapse_from, uniqueness_experiment, uniqueness_from, SweepPoint, SweepReport,
};
pub use inequalities::{
    bol_check, bol_check_radial, calibrate_slack, ordered_components, sci_check, sci_check_bubbles, Region, SciRegion,
};
pub use report::{digest_of, summary_csv, Evidence, EvidenceSnapshot, ExperimentReport, TheoremTag, Verdict};
pub use suite::{radial_defect, run_suite, Bound, Check, CriterionOutcome, Suite, SuiteConfig, CRITERIA};
