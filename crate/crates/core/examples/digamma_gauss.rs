//! ψ_p(r/f) against −log f − γ_p + Σ ζ^{−ar} log(1 − ζ^a), on both routes.

use padic_lab::digamma::{euler_gamma_p, gauss_lhs, gauss_rhs, psi_p, verify_gauss};

fn main() -> padic_lab::Result<()> {
    let n = 6;
    for p in [3, 5] {
        println!("gamma_{p} = {}", euler_gamma_p(p, n)?);
    }

    // ν_p(r/f) < 0: the direct Riemann-sum limit
    let psi = psi_p(3, 1, 9, n)?;
    println!("psi_3(1/9) = {} (stable from 3^{})", psi.value, psi.k_used);

    for (p, r, f) in [(3, 1, 9), (3, 2, 5), (5, 3, 25), (7, 1, 5)] {
        let (lhs, route) = gauss_lhs(p, r, f, n)?;
        println!("p={p} {r}/{f} [{route}]");
        println!("  digamma side    = {}", lhs.value);
        println!("  cyclotomic side = {}", gauss_rhs(p, r, f, n)?);
        println!("  {}", verify_gauss(p, r, f, n)?.line());
    }
    Ok(())
}
