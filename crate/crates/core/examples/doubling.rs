//! Purify a mixed state by doubling and compare pairing-formula moments with
//! vacuum expectations on the doubled Fock space.

use qfsp::linalg::{c, CVec};
use qfsp::{PhaseSpace, Presentation, QuasifreeForm, TruncatedFock};
use rand::{Rng, SeedableRng};

fn main() -> qfsp::Result<()> {
    let ps = PhaseSpace::build_standard(1, Presentation::Diagonal)?;
    let form = QuasifreeForm::thermal(&ps, &[0.4])?;
    let dbl = form.double()?;
    println!("doubled form valid: {}", dbl.validate(1e-10).is_valid());
    println!("P̂ is a projection: {}", dbl.hat_form.is_projection(1e-10));

    let fk = TruncatedFock::new(&dbl.hat_form, 8)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for n in [2, 4, 6] {
        let vs: Vec<CVec> = (0..n)
            .map(|_| CVec::from_fn(2, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
            .collect();
        let (formula, pairings) = form.moment_with_count(&vs);
        let mut v = fk.vacuum();
        for g in vs.iter().rev() {
            v = fk.field(&dbl.embed(g)).apply(&v);
        }
        let brute = fk.vacuum().dotc(&v);
        println!("{n}-point: {pairings:>3} pairings, formula {formula:.6}, Fock {brute:.6}, |Δ| {:.1e}", (formula - brute).norm());
    }
    Ok(())
}
