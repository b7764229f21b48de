pub mod estimators;
pub mod experiments;
pub mod cli_io;
