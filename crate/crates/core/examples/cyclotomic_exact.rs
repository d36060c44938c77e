//! Exact arithmetic in Q(ζ_m): norms, inverses, roots of unity, complex embeddings.

use padic_lab::cyclo::CycloNum;

fn main() -> padic_lab::Result<()> {
    let m = 15;
    let u = CycloNum::unit_ratio(m, 2);
    println!("u = (1 - z^2)/(1 - z) = {u}");
    println!("N(u) = {}", u.norm());
    println!("N(1 - z15) = {}", CycloNum::one_minus_zeta(m, 1).norm());
    println!("N(1 - z9) = {}", CycloNum::one_minus_zeta(9, 1).norm());

    let inv = u.inverse()?;
    println!("u * u^-1 = {}", u.mul(&inv));

    let root = CycloNum::zeta(m, 4).mul(&CycloNum::zeta(m, 8));
    println!(
        "z^4 * z^8 is a root of unity of order {:?}",
        root.root_of_unity_order()
    );

    for e in u.complex_embeddings(30)?.iter().take(3) {
        println!(
            "sigma_{}(u) = {} + {} i",
            e.index,
            e.re.to_decimal(20),
            e.im.to_decimal(20)
        );
    }
    Ok(())
}
