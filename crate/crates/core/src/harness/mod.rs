//! Run configuration, the six compared baselines, pipeline stages and
//! evaluation metrics.

mod config;
mod eval;
mod pipeline;

pub use config::{Baseline, Decentralization, RunConfig};
pub use eval::{event_metrics, log_overhead, run_baseline, BaselineNets, EvalLogs, EvalSummary, EventCounts};
pub use pipeline::{
    alt_train_stage, distill_stage, eval_file, evaluate_baseline, evaluate_stage, overhead_report,
    teacher_file, train_division_stage, train_formation, AltTrainOutcome, DIVISION, STUDENT, STUDENT_AT,
    STUDENT_IA,
};
