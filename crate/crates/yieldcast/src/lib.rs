//! File formats, reports, plots and the command-line front end for
//! `yieldcast-core`.

pub mod cli;
pub mod ingest;
pub mod plots;
pub mod report;
pub mod runner;
