pub mod data;
pub mod duhamel;
pub mod probe;
pub mod propagator;
pub mod solver;
pub mod zfield;

pub use data::{random_data, DataSpec};
pub use duhamel::{duhamel, Rule};
pub use probe::{smoothing_probe, ProbeResult, SmoothingProbe};
pub use propagator::{wave_propagator, Rotation};
pub use solver::{
    solve, support_radius, write_snapshots_csv, CoupledSolver, Diagnostics, FreeField, PotentialSupplier, SampledPotential, ScalarState,
    SnapshotSummary, SolveSpec, Trajectory,
};
pub use zfield::sample_z;
