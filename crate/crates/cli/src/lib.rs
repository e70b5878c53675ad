//! Scenario runner behind the `eqstab` command.

pub mod perturb;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod suite;

use std::path::PathBuf;

/// Output directory: the flag, then `EQSTAB_OUT_DIR`, then `./eqstab-out`.
pub fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("EQSTAB_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("eqstab-out"))
}
