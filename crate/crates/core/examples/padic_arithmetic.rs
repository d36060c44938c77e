//! Rationals as truncated p-adic expansions, and how precision travels through arithmetic.

use num_bigint::BigInt;
use padic_lab::PadicApprox;

fn main() -> padic_lab::Result<()> {
    let p = 5;
    let third = PadicApprox::from_rational(&BigInt::from(1), &BigInt::from(3), p, 10)?;
    let tenth = PadicApprox::from_rational(&BigInt::from(1), &BigInt::from(10), p, 10)?;
    println!("1/3  = {third}");
    println!("1/10 = {tenth}  (valuation {})", tenth.valuation());

    let sum = &third + &tenth;
    let prod = &third * &tenth;
    println!("1/3 + 1/10 = {sum}");
    println!("1/3 * 1/10 = {prod}");

    // cancellation eats relative precision
    let close = PadicApprox::from_i64(1 + 5i64.pow(6), p, 10)?;
    let one = PadicApprox::from_i64(1, p, 10)?;
    let diff = &close - &one;
    println!(
        "(1 + 5^6) - 1 = {diff}, relative precision {:?}",
        diff.relative_precision()
    );

    println!(
        "distance(1/3, 1/3 + 5^4) = {}",
        third.distance(&(&third + &PadicApprox::from_i64(625, p, 10)?))?
    );
    Ok(())
}
