//! Local cohomology invariant tables.
//!
//! Computes Čech–de Rham tables `ρ_{p,q}` and Lyubeznik tables `λ_{p,q}` for
//! complex subspace arrangements, ideals of dimension at most two and
//! projective toric 3-folds, and checks arbitrary tables against the
//! spectral sequences that produce them.
//!
//! Module map:
//!
//! * [`qlinalg`]: exact rational matrices (rank, RREF, nullspace).
//! * [`fourier_motzkin`]: exact feasibility of small linear inequality systems.
//! * [`poset`]: order complexes and reduced rational homology.
//! * [`arrangement`]: intersection lattices and the arrangement invariants.
//! * [`toric`]: complete fans in `Z^3`, Picard rank, projectivity.
//! * [`table`]: the table type and its structural validators.
//! * [`sstables`]: differential bookkeeping, convergence and deduction.
//! * [`io`] and [`cli`]: file formats and the command-line front end.

pub mod arrangement;
pub mod cli;
pub mod fourier_motzkin;
pub mod io;
pub mod poset;
pub mod qlinalg;
pub mod sstables;
pub mod table;
pub mod toric;

pub use arrangement::{
    build_lattice, cdr_table, complement_betti, lyubeznik_dim2, moebius_betti_oracle,
    AffineSubspace, ArrangementError, IntersectionLattice,
};
pub use qlinalg::{QMatrix, Rational};
pub use sstables::{
    check_cdr, check_convergence_lambda, deduce_lambda, DeduceConfig, Deduction, SpectralState,
};
pub use table::{canonical_small_tables, euler_sum, validate_lambda, InvariantTable, TableKind};
pub use toric::{class_rank, is_projective, picard_rank, toric_lyubeznik, validate_fan, Fan3};
