//! A squeeze Hamiltonian, its second quantization and the vacuum overlap of
//! the squeezed Fock state.

use qfsp::implementers;
use qfsp::sp_algebra::{self, basis_hamiltonian};
use qfsp::{PhaseSpace, Presentation, QuasifreeForm, TruncatedFock};

fn main() -> qfsp::Result<()> {
    let ps = PhaseSpace::build_standard(1, Presentation::Diagonal)?;
    let fock = QuasifreeForm::fock(&ps)?;
    let fk = TruncatedFock::new(&fock, 60)?;

    let h = basis_hamiltonian(&ps, fk.modes(), 2, 0, 0)?;
    println!("H valid: {}", h.validate(&ps, 1e-12).is_valid());
    let q = sp_algebra::quantize(&fk, &h)?;
    println!("⟨3|q(H)|1⟩ = {:.6}, √6 = {:.6}", q.matrix[(3, 1)].re, 6f64.sqrt());

    for r in [0.3, 0.8, 1.5] {
        let u = implementers::diagonal_squeeze(2, 0, r);
        let moved = fock.transform(&u.u)?;
        let theta = implementers::theta_spectrum(&fock, &moved)?;
        let det = implementers::vacuum_overlap(&fock, &moved)?;
        let t = implementers::implement_t(&fk, &moved)?;
        let brute = fk.expectation(&t, &fk.vacuum()).norm();
        let tail = implementers::truncation_tail(&fock, &moved, fk.cutoff())?;
        println!("r={r}: θ={:.4} det={det:.10} Fock={brute:.10} tail={tail:.1e}", theta[0]);
    }
    Ok(())
}
