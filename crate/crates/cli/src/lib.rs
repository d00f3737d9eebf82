//! Model files, command dispatch and reports for `gradgauge`.

pub mod args;
pub mod model;
pub mod oracle;
pub mod parser;
pub mod report;
pub mod run;

pub use args::{invoke, Invocation};
pub use model::ModelSpec;
pub use parser::{parse, ParseError};
pub use report::Report;
pub use run::{run, Algebra, Command, Outcome};
