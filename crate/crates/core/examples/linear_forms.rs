//! Differences of digamma values as linear forms in logarithms of cyclotomic units.

use padic_lab::linear_form::{
    evaluate_form_local, nonvanishing_check, reduce_difference, value_form, verify_reduction,
};

fn main() -> padic_lab::Result<()> {
    let form = value_form(3, 1, 9)?;
    println!("value(1/9) at p=3: {form}");

    for (p, a, b) in [
        (3, (1, 9), (2, 9)),
        (3, (1, 15), (4, 15)),
        (7, (1, 5), (2, 5)),
        (3, (1, 9), (1, 25)),
    ] {
        let rep = verify_reduction(p, a, b, 5)?;
        println!("{}", rep.line());
        let nv = nonvanishing_check(&rep.form);
        println!("  unit-ratio part nonzero: {}", nv.unit_ratio_not_all_zero);
    }

    // a mirror pair: every unit-ratio coefficient cancels
    let mirror = reduce_difference(7, (1, 5), (4, 5))?;
    println!(
        "mirror 1/5 - 4/5 at p=7: {mirror}, all zero: {}",
        nonvanishing_check(&mirror).all_zero
    );

    // a single unit-ratio term is a tower element, not a p-adic number
    let single = reduce_difference(3, (1, 5), (2, 5))?;
    println!(
        "local value valuation: {}",
        evaluate_form_local(&single, 3, 6)?.valuation()
    );
    Ok(())
}
