//! Front end of the `fracflow` binary: configuration, output layout and
//! the `verify` dispatch table.

pub mod checks;
pub mod config;
pub mod output;
