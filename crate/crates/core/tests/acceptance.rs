//! Runs the acceptance suite and prints one line per criterion.

use std::process::ExitCode;

use affine_kms::acceptance::{run_all, SuiteConfig};

fn main() -> ExitCode {
    let reports = run_all(&SuiteConfig::default());
    for report in &reports {
        println!("{}", report.line());
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} passed, {failed} failed", reports.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
