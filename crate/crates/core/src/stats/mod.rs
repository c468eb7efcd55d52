//! Statistical primitives consumed by the validity cards.

mod auc;
mod cv;
pub mod describe;
mod ecdf;
mod effect;
mod icc;
mod krippendorff;
mod regression;

pub use auc::auc;
pub use cv::{cv_metric, CvMetric, CvResult};
pub(crate) use cv::select_rows;
pub use ecdf::ecdf;
pub use effect::{cohens_d, d_band, CohensD};
pub use icc::{icc_two_way, IccResult, RatingsMatrix};
pub use krippendorff::{krippendorff_alpha, AlphaResult, MeasurementLevel};
pub(crate) use regression::sigmoid;
pub use regression::{
    collinear_columns, fit, logistic_fit, ols_fit, FitOptions, ModelKind, RegressionResult,
};
