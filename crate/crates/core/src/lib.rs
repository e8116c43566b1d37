//! Correlation analysis for multi-qubit states.
//!
//! States are held either as dense density matrices (up to
//! [`state::DENSE_LIMIT`] qubits) or as mixtures of sparse pure states, which
//! scale to hundreds of qubits for the W-type families used here.
//!
//! Party 0 is the leftmost character of a bitstring and the most significant
//! bit of a dense index.

pub mod bits;
pub mod covariance;
pub mod cuts;
pub mod distill;
pub mod error;
pub mod instrument;
pub mod io;
pub mod linalg;
pub mod named;
pub mod observable;
pub mod postulates;
pub mod state;
pub mod work;

pub use bits::BitString;
pub use covariance::{
    covariance, pauli_covariance_scan, wmix_closed_form, CovarianceScanResult, ScanMode,
};
pub use cuts::{
    degree_of_correlations, factorize, has_genuine_correlations, is_product_across_cut,
    split_party_with_cnot, Bipartition, Factorization,
};
pub use distill::{
    closed_forms, distill, q_of_fidelity, success_lower_bound, DistillationResult, FilterInstrument,
};
pub use error::{Error, Result};
pub use instrument::{apply_instrument, KrausInstrument};
pub use io::parse_state_spec;
pub use named::{make_named_state, NamedState};
pub use observable::{LocalObservableList, Pauli, SingleQubitBasis, SingleQubitObservable};
pub use postulates::{
    check_measure_monotonicity, run_postulate_scenario, Indicator, PostulateReport, Scenario,
};
pub use state::{QuantumState, SparsePureState};
pub use work::{
    delta_w_estimate, optimize_basis, run_protocol, work_from_classical_state,
    CommunicationConstraint, ProtocolFamily, WorkProtocol, WorkResult,
};
