//! Stationary density matrix of the driven four-level system, checked
//! against direct time integration.

use spinpump::quantum::{solve, solve_by_evolution, DensityMatrix, SystemParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = SystemParams::from_ghz(23.8, 21.0, 0.3, 1.0, 0.25);
    let rho = solve(&p)?;
    println!("steady state (δ_e/2π = 23.8 GHz, δ_h/2π = 21.0 GHz, Δ/2π = 0.3 GHz):");
    println!("{}", rho.to_text());
    println!("populations {:?}", rho.populations());

    let evolved = solve_by_evolution(&p, &DensityMatrix::pure(1)?)?;
    println!("max |Δρ| against time evolution: {:.2e}", rho.max_abs_diff(&evolved));

    // Without a drive nothing connects the two ground states.
    match solve(&p.with_rabi_ghz(0.0)) {
        Ok(_) => println!("unexpected unique steady state"),
        Err(e) => println!("Ω = 0: {e}"),
    }
    Ok(())
}
