//! Build a phase space, a thermal quasifree form and inspect its operator `S`.

use qfsp::{PhaseSpace, Presentation, QuasifreeForm};

fn main() -> qfsp::Result<()> {
    let ps = PhaseSpace::build_standard(2, Presentation::Position)?;
    let report = ps.validate(1e-12);
    println!("phase space valid: {}", report.is_valid());

    let form = QuasifreeForm::thermal(&ps, &[0.25, 1.5])?;
    let fr = form.validate(1e-12);
    println!("form kind: {:?}, valid: {}", fr.kind, fr.is_valid());
    for c in &fr.report.checks {
        println!("  {:<24} {:.2e}", c.name, c.residual);
    }

    let (vals, _) = form.spectrum();
    println!("spectrum of S: {vals:.6?}");
    for nu in [0.25, 1.5] {
        println!("  expected pair for ν={nu}: {:.6} / {:.6}", nu / (1.0 + 2.0 * nu), (1.0 + nu) / (1.0 + 2.0 * nu));
    }

    let fock = QuasifreeForm::fock(&ps)?;
    println!("Fock form is a projection: {}", fock.is_projection(1e-12));
    Ok(())
}
