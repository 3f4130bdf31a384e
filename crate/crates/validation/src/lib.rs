//! Holds the workspace acceptance suite (`tests/acceptance.rs`); no library
//! code.
