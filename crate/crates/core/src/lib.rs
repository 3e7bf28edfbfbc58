//! Population training on two-player games where an interaction graph decides
//! which agents train against which, plus the empirical game-theory tools used
//! to measure the resulting populations.

pub mod error;
pub mod game;
pub mod graph;
pub mod learner;
pub mod matrix;
pub mod metagame;
pub mod metrics;
pub mod par;
pub mod rng;
pub mod runner;

pub use error::{Error, Result};
pub use game::{GameSpec, PolicyParams, TwoPlayerGame};
pub use graph::{GraphKind, InteractionGraph};
pub use learner::{Agent, Estimator, LearnerConfig};
pub use matrix::Matrix;
pub use metagame::{MixedStrategy, NashSolution, PayoffMatrix};
pub use par::Execution;
