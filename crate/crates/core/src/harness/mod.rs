//! Training loop, evaluation metrics, checkpoints and run logs.

pub mod checkpoint;
pub mod config;
pub mod logs;
pub mod metrics;
pub mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_FORMAT_VERSION};
pub use config::{parse_key_values, TrainConfig};
pub use logs::{emit_logs, read_epoch_log, read_report, write_epoch_log, write_report, EpochRecord};
pub use metrics::{evaluate, metrics_from_cm, ConfusionMatrix, Metrics, MetricsReport};
pub use train::{train, train_with, TrainHooks, TrainOutcome};
