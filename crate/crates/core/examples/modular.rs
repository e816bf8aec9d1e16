//! Modular operator and conjugation of a one-mode thermal state, checked
//! through the Tomita relation and the KMS condition.

use qfsp::linalg::CVec;
use qfsp::modular::{self, ModularData};
use qfsp::{PhaseSpace, Presentation, QuasifreeForm};

fn main() -> qfsp::Result<()> {
    let ps = PhaseSpace::build_standard(1, Presentation::Diagonal)?;
    let nu = 0.5;
    let form = QuasifreeForm::thermal(&ps, &[nu])?;
    let h = modular::one_particle_modular(&form)?;
    println!("spectrum of H_S = {:.6?}, ±ln((1+ν)/ν) = {:.6}", form.frame().spectrum(&h).0, ((1.0 + nu) / nu).ln());

    let md = ModularData::new(&form, 16)?;
    let e = |k: usize| {
        let mut v = CVec::zeros(2);
        v[k] = qfsp::linalg::ONE;
        v
    };
    let b0 = md.field(&e(0));
    let b1 = md.field(&e(1));
    println!("Tomita B(e0): {:.2e}", md.tomita_residual(&b0, &b0.adjoint()));
    println!("Tomita B(e0)B(e1): {:.2e}", md.tomita_residual(&b0.compose(&b1), &b1.adjoint().compose(&b0.adjoint())));
    println!("KMS (e0, e1): {:.2e}", md.kms_residual(&b0, &b1));
    for t in [0.5, 1.0, 2.0] {
        println!("flow t={t}: {:.2e}", md.flow_residual(&e(0), t));
    }
    Ok(())
}
