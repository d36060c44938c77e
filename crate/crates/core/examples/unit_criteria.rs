//! Number-theoretic criteria for independence of cyclotomic units, checked against the rank oracle.

use padic_lab::independence::{
    check_property_i, check_property_ii, concordance, unit_system_criterion, Clause3Reading,
};

fn main() -> padic_lab::Result<()> {
    for m in [15, 21, 35, 45] {
        println!("{}", check_property_i(m).line());
    }
    println!("{}", check_property_ii(&[15, 35]).line());

    for q in [40, 60, 84, 231, 399] {
        println!(
            "{}",
            unit_system_criterion(q, Clause3Reading::Verbatim)?.line()
        );
    }

    for reading in [Clause3Reading::Verbatim, Clause3Reading::Mixed] {
        let rows = concordance(40, 40, reading)?;
        let bad: Vec<u64> = rows.iter().filter(|r| !r.agree).map(|r| r.q).collect();
        println!(
            "{reading:?}: {} conductors, disagreements at {bad:?}",
            rows.len()
        );
    }
    Ok(())
}
