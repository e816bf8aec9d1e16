//! Weyl operators on a truncated Fock space and where the Weyl relation
//! stops holding as the sector approaches the cutoff.

use qfsp::linalg::{c, CVec};
use qfsp::{PhaseSpace, Presentation, QuasifreeForm, TruncatedFock};

fn main() -> qfsp::Result<()> {
    let ps = PhaseSpace::build_standard(1, Presentation::Diagonal)?;
    let form = QuasifreeForm::fock(&ps)?;
    let fk = TruncatedFock::new(&form, 30)?;
    println!("Fock dimension: {}", fk.dim());

    let f = CVec::from_vec(vec![c(0.6, 0.3), c(0.6, -0.3)]);
    let g = CVec::from_vec(vec![c(-0.2, 0.5), c(-0.2, -0.5)]);
    let wf = fk.weyl(&f)?;
    let vac = fk.expectation(&wf, &fk.vacuum());
    println!("⟨Ψ, W(f) Ψ⟩ = {vac:.10}, exp(-S(f,f)/2) = {:.10}", (-0.5 * form.value(&f, &f).re).exp());

    let lhs = wf.matrix.clone() * fk.weyl(&g)?.matrix;
    let rhs = fk.weyl(&(&f + &g))?.matrix * (ps.gamma(&f, &g) * c(-0.5, 0.0)).exp();
    for sector in [5, 10, 15, 20, 25, 30] {
        println!("sector ≤ {sector:>2}: residual {:.2e}", fk.sector_residual(&lhs, &rhs, sector));
    }
    Ok(())
}
