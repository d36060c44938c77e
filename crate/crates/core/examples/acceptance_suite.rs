//! Runs the in-process acceptance criteria, or the ones named on the command line.

use padic_lab::suite::run_criterion;

fn main() -> padic_lab::Result<()> {
    let ids: Vec<u8> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let ids = if ids.is_empty() {
        (1..=8).collect()
    } else {
        ids
    };
    for k in ids {
        println!("{}", run_criterion(k)?.line());
    }
    Ok(())
}
