//! Arithmetic in the tower Q_p(ζ_f*)(ζ_{p^k}) built for Q_p(ζ_f).

use padic_lab::local::{build_field, LocalElement};
use padic_lab::log::decompose;

fn main() -> padic_lab::Result<()> {
    for (p, f) in [(3, 5), (3, 9), (5, 15), (2, 12)] {
        let field = build_field(p, f, 8)?;
        let desc = field.descriptor();
        println!("Q_{p}(zeta_{f}): {desc}");

        let z = LocalElement::zeta(&field, 1);
        let zf = z.pow(f as u128);
        println!(
            "  zeta^f == 1: {}",
            zf.sub(&LocalElement::one(&field)).is_zero()
        );

        let pi = LocalElement::one(&field).sub(&z);
        println!("  v(1 - zeta) = {}", pi.valuation());
        println!("  N(1 - zeta) = {}", pi.norm());

        let dec = decompose(&pi)?;
        println!(
            "  1 - zeta = p^{} * pi^{} * omega * u, reassembles: {}",
            dec.p_power,
            dec.pi_power,
            dec.reassemble().sub(&pi).is_zero()
        );
    }
    Ok(())
}
