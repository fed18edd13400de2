//! Interval analysis and mixed-monotone reachability.

pub mod config;
pub mod dual;
pub mod embedding;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod inclusion;
pub mod integrate;
pub mod interval;
pub mod montecarlo;
pub mod neural;
pub mod partition;
pub mod real;
pub mod synth;
pub mod systems;

pub use dual::Dual;
pub use embedding::{ifemb, make_embedding, ControlInput, EmbeddingSystem, Method, System};
pub use error::{Error, Result};
pub use graph::{ExprGraph, GraphBuilder, SlotSpec, Var};
pub use inclusion::{jacif, mjacif, mjacm, natif, Center, InclusionFn, Ordering, Side};
pub use integrate::{Integrator, RolloutSettings, Trajectory};
pub use interval::{BinaryOp, Interval, IntervalTensor, Perturbation, UnaryOp};
pub use neural::{clnn_inclusion, crown, fastlin, nn_ibp, CrownBounds, FastlinBounds, NeuralNetwork};
pub use partition::{grid_partition, run_partitions, PartitionGrid};
pub use real::Real;
