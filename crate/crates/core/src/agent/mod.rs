pub mod a2c;
pub mod checkpoint;
pub mod nn;

pub use a2c::{
    compute_returns_and_advantages, discounted_returns, rollout, train, train_with_progress,
    update, A2CModel, CurveRow, Gradients, HeadDistributions, Hyperparams, LossBatch, LossStats,
    NetworkSizes, TrainOutput, Trajectory, Transition, UpdateStats,
};
