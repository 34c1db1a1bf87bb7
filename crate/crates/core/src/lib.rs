pub mod arith;
pub mod config;
pub mod error;
pub mod indexset;
pub mod opalgebra;
pub mod instruments;
pub mod certify;
pub mod simulate;
pub mod wold;
pub mod format;

pub use error::{Error, Result};
pub use indexset::IndexSet;
pub use opalgebra::{BasisIndex, Coefficient, Deviation, DyadTerm, ShiftFamilyTerm, StateVector, StructuredOperator, Term};
pub use instruments::{
    build_binary_example, build_example_family, build_from_parts, build_nonrepeatable_sibling, build_orthogonal,
    make_instrument, povm, Instrument, Outcome, Povm,
};
pub use certify::{certify_repeatable, check_orthogonal, check_repeatability_numerical, classify_povm, CertificationReport, PovmClassification};
pub use simulate::{dense_oracle, measure_once, run_trajectory, empirical_conditionals, TrajectoryRecord, TruncationWindow};
pub use wold::{read_memory, split, wold_decompose, MemoryReading, SplitParts, WoldDecomposition};
