//! Acceptance checks of the solver against its oracles. The checks live in
//! `tests/acceptance.rs`; this crate has no library code.
