//! Evaluation metrics: overlap counting, marginal and pairwise forecasting errors.

pub mod forecast;
pub mod overlap;

pub use overlap::{boxes_overlap, trajectories_overlap, Footprint, OrientedBox};
pub use forecast::{
    average_precision, marginal_metrics, overlap_metric, pairwise_joint_metrics, AgentMarginal, MetricAccumulator, MetricConfig,
    MetricReport, PairMetric,
};
