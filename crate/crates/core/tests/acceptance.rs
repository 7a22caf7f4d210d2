//! Full acceptance run: one line per criterion, non-zero exit on any FAIL.
//! Outputs land under cargo's per-target temporary directory.

use std::path::PathBuf;
use std::process::ExitCode;

use contact_defects::harness::{accept, report, AcceptOptions};

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let out_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let opts = AcceptOptions { out_dir, ..AcceptOptions::default() };
    let summary = match accept(&opts, |r| println!("{r}")) {
        Ok(s) => s,
        Err(e) => {
            println!("acceptance aborted: {e}");
            return ExitCode::FAILURE;
        }
    };
    print!("{}", report(&summary).lines().last().map(|l| format!("{l}\n")).unwrap_or_default());
    if summary.exit_code() == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
