//! Quasi-equivalence verdicts for three thermal families.

use qfsp::classifier::{self, ModeFamily, Thresholds};

fn main() -> qfsp::Result<()> {
    let th = Thresholds::default();
    for (tau, tau_prime) in [("0.5 + 1/k", "0.5"), ("0.5 + 1/sqrt(k)", "0.5"), ("0", "0.3")] {
        let fam = ModeFamily::thermal(tau, tau_prime, 10_000)?;
        let v = classifier::classify_family(&fam, &th)?;
        println!("τ = {tau:<16} τ' = {tau_prime:<4} → {:?}", v.outcome);
        println!("    {} (Σ t_k = {:.4e}, α_inf {:.3}, β_sup {:.3})", v.reason, v.total, v.alpha_inf, v.beta_sup);
    }

    let (a, b) = ModeFamily::thermal("0.5 + 1/k", "0.5", 4)?.block(1)?;
    println!("state distance bound for block 1: {:.6}", classifier::state_distance_lower_bound(&a, &b)?);
    Ok(())
}
