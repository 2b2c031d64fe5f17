//! Harness around `bhgof-core`: data ingestion, parallel execution,
//! reports, and the type-I-error and power experiments behind the
//! `bhgof` command-line tool.

pub mod experiment;
pub mod io;
pub mod parallel;
pub mod report;
