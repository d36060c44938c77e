//! Multiplicative independence by exact bounded search and by a high-precision log-embedding rank.

use padic_lab::cyclo::CycloNum;
use padic_lab::independence::{
    oracle_bounded, oracle_rank, relation_order, unit_system, verify_p4_instance,
};

fn main() -> padic_lab::Result<()> {
    // 2, 3 and 6: the obvious relation
    let nums: Vec<CycloNum> = [2, 3, 6]
        .iter()
        .map(|&n| CycloNum::from_int(1, n))
        .collect();
    println!("{}", oracle_bounded(&nums, 2)?.line());
    println!("{}", oracle_rank(&nums, 30)?.line());

    for q in [21, 39] {
        let sys: Vec<CycloNum> = unit_system(q).into_iter().map(|(_, x)| x).collect();
        let rep = oracle_rank(&sys, 40)?;
        println!("q={q}: {}", rep.line());
        if let Some(w) = &rep.witness {
            println!(
                "  exact recheck: order {:?}",
                relation_order(&sys, &w.exponents)?
            );
        }
    }

    let rep = verify_p4_instance(&[15], 3, 40)?;
    println!("{}", rep.line());
    if let Some(c) = &rep.cross_check {
        println!("{}", c.line());
    }
    Ok(())
}
