//! Compile one circuit through all three constructions and compare what
//! comes out: locality, particle count, Hilbert dimension, and the penalty
//! scale the 3-local and grid flavors pay for their smaller supports.
//!
//! Run with: cargo run --example compile_programs

use adiaforge::circuit::{Circuit, Gate};
use adiaforge::five_local::build_5local;
use adiaforge::grid::build_grid_program;
use adiaforge::three_local::build_3local;

fn main() -> adiaforge::Result<()> {
    let bell = Circuit::new(2, vec![Gate::h(0), Gate::cnot(0, 1)])?;
    let epsilon = 0.5;

    let p5 = build_5local(&bell)?;
    let p3 = build_3local(&bell, epsilon, None)?;
    let layout = bell.to_grid_layout()?;
    let pg = build_grid_program(&layout, epsilon, None)?;

    println!("{:<10} {:>9} {:>10} {:>10} {:>12} {:>10}", "flavor", "locality", "particles", "dim", "terms(final)", "J");
    for (name, p) in [("5local", &p5), ("3local", &p3), ("grid", &pg.program)] {
        println!(
            "{:<10} {:>9} {:>10} {:>10} {:>12} {:>10}",
            name,
            p.locality(),
            p.particle_count(),
            p.dim(),
            p.h_final.terms.len(),
            p.j.map(|j| format!("{j}")).unwrap_or_else(|| "-".into()),
        );
    }

    // the grid trades qubits for six-state particles arranged n x (R+1);
    // its clock length counts grid steps, not gates
    println!(
        "\ngrid geometry: {} rows x {} cols, clock L = {} (2nR)",
        bell.n,
        pg.r + 1,
        pg.program.l
    );

    // programs serialize to JSON and round-trip
    let json = p5.to_json();
    let back = adiaforge::hamiltonian::AdiabaticProgram::from_json(&json)?;
    println!("\n5-local program JSON is {} bytes; round-trips to dim {}", json.len(), back.dim());
    Ok(())
}
