//! Maximally entangled two-qubit states as points of SO(3).
//!
//! - [`qstate`]: states, complex concurrence, spinor pairs, hypercube vertices
//! - [`evolution`]: single-qubit rotation segments, sampled traces, phases,
//!   orthogonal-space crossings
//! - [`topology`]: reference circuits, SU(2) lifting, Z₂ classification
//! - [`optics`]: the photon-pair Mach-Zehnder experiment and wave-plate compiler

pub mod angle;
pub mod error;
pub mod evolution;
pub mod optics;
pub mod qstate;
pub mod topology;

pub use error::{Error, Result};
pub use evolution::{
    apply_segment, crossing_events, dynamical_phase, evolve_path, pancharatnam_phase,
    precession_demo, segment_unitary, Axis, CrossingReport, EvolutionTrace, OneQubitUnitary,
    PhaseBreakdown, Qubit, Segment, Trajectory,
};
pub use optics::{
    compile_plates, fold_circuit_to_arm, run_experiment, source_state, visibility,
    waveplate_unitary, ExperimentConfig, FringeRecord, Placement, WavePlateTriple,
};
pub use qstate::{hypercube_vertex, HypercubeVertex, SpinorPair, TwoQubitState, VertexLabel};
pub use topology::{classify, is_closed_so3, lift_endpoint, standard_circuit, CircuitKind, PathClass};
