//! Command-line front end: the presentation DSL, graph-of-groups files and
//! JSON reports.

pub mod app;
pub mod dsl;
pub mod gogfile;

pub use app::{execute, run, Cli};
pub use dsl::{parse_presentation, parse_word, render_presentation, render_word, DslError, NamedPresentation};
