//! Experiment harness for pressure estimates of nonautonomous iterated
//! function systems: configuration, task execution, caching and reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod app;
pub mod cache;
pub mod checks;
pub mod config;
pub mod exec;
pub mod oracle;
pub mod report;
pub mod setup;
pub mod tables;
pub mod tasks;
