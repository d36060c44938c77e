//! One line per acceptance criterion; exits non-zero if any fails.

use std::path::PathBuf;
use std::process::Command;

use padic_lab::cli::determinism;
use padic_lab::suite::{run_criterion, CRITERIA};

fn main() {
    let mut failed = Vec::new();
    for k in 1..=CRITERIA {
        let res = if k == 9 {
            binary().and_then(|b| determinism(&b))
        } else {
            run_criterion(k)
        };
        match res {
            Ok(o) => {
                println!("{}", o.line());
                if !o.pass {
                    failed.push(k);
                }
            }
            Err(e) => {
                println!("criterion {k} [FAIL] error: {e}");
                failed.push(k);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {CRITERIA} criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}

/// The CLI binary from the same target directory, built on demand.
fn binary() -> padic_lab::Result<PathBuf> {
    let exe = std::env::current_exe().map_err(|e| padic_lab::Error::Domain(e.to_string()))?;
    let profile_dir = exe
        .parent()
        .and_then(|d| d.parent())
        .expect("test binary lives in <target>/<profile>/deps");
    let bin = profile_dir.join(format!("padic-lab{}", std::env::consts::EXE_SUFFIX));
    let stale = match (
        bin.metadata().and_then(|m| m.modified()),
        exe.metadata().and_then(|m| m.modified()),
    ) {
        (Ok(b), Ok(t)) => b < t,
        _ => true,
    };
    if stale {
        let mut cmd = Command::new(env!("CARGO"));
        cmd.args(["build", "--quiet", "-p", "padic-lab", "--bin", "padic-lab"]);
        if profile_dir.ends_with("release") {
            cmd.arg("--release");
        }
        let status = cmd
            .status()
            .map_err(|e| padic_lab::Error::Domain(e.to_string()))?;
        if !status.success() {
            return Err(padic_lab::Error::Domain(
                "building the padic-lab binary failed".into(),
            ));
        }
    }
    Ok(bin)
}
