pub mod bigint_serde;
pub mod classifier;
pub mod groupring;
pub mod hermitian;
pub mod intlattice;
pub mod matrix;
