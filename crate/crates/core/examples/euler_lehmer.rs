//! Generalized Euler constants γ_p(r, q) and their cyclotomic expression.

use padic_lab::digamma::{euler_gamma_p, gamma_p_rq, verify_diamond};

fn main() -> padic_lab::Result<()> {
    let n = 5;
    println!("gamma_3       = {}", euler_gamma_p(3, n)?);
    println!("gamma_3(0, 1) = {}", gamma_p_rq(3, 0, 1, n)?);
    for (p, q) in [(3, 5), (3, 3), (7, 6)] {
        for r in 0..q {
            let rep = verify_diamond(p, r, q, n)?;
            println!("{}", rep.line());
        }
    }
    Ok(())
}
