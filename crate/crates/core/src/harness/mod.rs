//! Grid scans, file emission and the verification suite behind the CLI.

pub mod csvio;
pub mod scan;
pub mod verify;
