//! Experiment configuration, task dispatch, result files and the oracle
//! self-test behind the `fibertherm` command.

pub mod config;
pub mod output;
pub mod run;
pub mod selftest;
