//! Machine-readable reports: every check serializes to stable JSON.

use padic_lab::digamma::verify_gauss;
use padic_lab::independence::unit_system_criterion;
use padic_lab::independence::Clause3Reading;
use padic_lab::linear_form::verify_reduction;

fn main() -> padic_lab::Result<()> {
    let gauss = verify_gauss(5, 2, 25, 5)?;
    println!("{}", serde_json::to_string_pretty(&gauss).unwrap());

    let crit = unit_system_criterion(60, Clause3Reading::Verbatim)?;
    println!("{}", serde_json::to_string_pretty(&crit).unwrap());

    let red = verify_reduction(7, (1, 5), (2, 5), 5)?;
    println!("{}", serde_json::to_string(&red.form).unwrap());
    Ok(())
}
