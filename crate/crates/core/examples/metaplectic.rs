//! Polar decomposition of a Bogoliubov map, its metaplectic implementer and
//! the cocycle of a product.

use qfsp::implementers::{self, SymplecticMap};
use qfsp::linalg::ONE;
use qfsp::{PhaseSpace, Presentation, QuasifreeForm, TruncatedFock};

fn main() -> qfsp::Result<()> {
    let ps = PhaseSpace::build_standard(2, Presentation::Diagonal)?;
    let p = QuasifreeForm::fock(&ps)?;
    let u = implementers::diagonal_squeeze(4, 0, 0.3)
        .compose(&implementers::diagonal_rotation(4, 0, 1, 0.7))
        .compose(&implementers::diagonal_squeeze(4, 1, -0.2));

    let parts = implementers::polar(&u, &p)?;
    for c in &parts.checks(&u, &p, 1e-10).checks {
        println!("{:<22} {:.2e}", c.name, c.residual);
    }
    println!("corner HS norm {:.6}", implementers::corner_hs(&u, &p));
    println!("d_P(U, 1) = {:.6}", implementers::dp_distance(&u, &SymplecticMap::identity(4), &p));

    let fk = TruncatedFock::new(&p, 24)?;
    let q = implementers::metaplectic(&fk, &u, ONE)?;
    let psi = fk.vacuum();
    let moved = (q.apply(&psi) - &psi).norm_squared();
    println!("∥QΨ - Ψ∥² = {moved:.6} ≤ {:.6}", implementers::continuity_bound(&u, &p));

    let v = implementers::diagonal_rotation(4, 0, 1, -0.4).compose(&implementers::diagonal_squeeze(4, 0, 0.25));
    let est = implementers::cocycle(&fk, &u, &v, 18, 1e-6)?;
    println!("cocycle λ = {:.8} + {:.1e}i, sign {:?}", est.raw[0], est.raw[1], est.sign);
    Ok(())
}
