//! Verification campaigns and record checks behind the `anticyc` binary.
//!
//! Every command returns a [`Report`]; its exit code is 0 on success, 1 when
//! a contradiction, violation or undecided case was found, and 2 when the
//! input was rejected.

pub mod commands;
pub mod model;
pub mod records;
pub mod report;

pub use commands::{
    cmd_audit_parity, cmd_audit_parity_file, cmd_check_records, cmd_growth, cmd_lemma2_campaign, cmd_verify_lemma1,
    metacyclic_grid, Settings,
};
pub use model::{ModelFile, ZetaSpec};
pub use records::{ClassGroupRecord, Flags};
pub use report::{Check, Format, Report, Verdict, EXIT_CONTRADICTION, EXIT_INPUT, EXIT_OK};
