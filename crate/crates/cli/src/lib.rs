//! Batch front end: scene configs, pipelines, reproduction studies and CSV output.

pub mod app;
pub mod config;
pub mod output;
pub mod scene;
pub mod study;
