//! Iwasawa logarithm of 1 - ζ^a, the two computations of it, and the symmetry log(1 - ζ^-t) = log(1 - ζ^t).

use padic_lab::digamma::verify_logsym;
use padic_lab::local::build_field;
use padic_lab::local::LocalElement;
use padic_lab::log::{log_one_minus_zeta, log_via_decomposition};

fn main() -> padic_lab::Result<()> {
    let (p, f) = (3, 15);
    let field = build_field(p, f, 10)?;
    for a in [1, 2, 4, 7] {
        let direct = log_one_minus_zeta(&field, a)?;
        let x = LocalElement::one(&field).sub(&LocalElement::zeta(&field, a));
        let other = log_via_decomposition(&x)?;
        println!(
            "log(1 - z^{a}): valuation {}, routes differ by valuation {}",
            direct.valuation(),
            direct.sub(&other).valuation()
        );
    }
    // log p = 0 for the Iwasawa branch
    let p_elt = LocalElement::from_int(&field, p as i64);
    println!(
        "log({p}) is zero: {}",
        padic_lab::log::log(&p_elt)?.is_zero()
    );

    for f in [5, 9, 15] {
        println!("{}", verify_logsym(p, f, 8)?.line());
    }
    Ok(())
}
