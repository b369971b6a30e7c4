//! A full adiabatic run, first by hand and then through the pipeline. The
//! hand-run part evolves the padded Bell program at a few total times T and
//! watches the ground-space fidelity climb; the pipeline does the same thing
//! automatically (gap profile, T estimate, doubling search, measurement) and
//! emits one JSON report.
//!
//! Run with: cargo run --release --example adiabatic_run

use adiaforge::circuit::{Circuit, Gate};
use adiaforge::evolution::{
    evolve_history_chain, measure_history_chain, run_pipeline_with_targets, EvolutionConfig,
    PipelineTargets,
};
use adiaforge::hamiltonian::Flavor;

fn main() -> adiaforge::Result<()> {
    let bell = Circuit::new(2, vec![Gate::h(0), Gate::cnot(0, 1)])?;
    let epsilon = 0.2;
    let padded = bell.pad_identities(epsilon)?;
    let l = padded.len();
    println!(
        "Bell padded for epsilon = {}: L = {} -> L' = {}, ideal P(clock >= {}) = {}/{}",
        epsilon, bell.len(), l, bell.len(), l - bell.len() + 1, l + 1
    );

    // the 5-local evolution never leaves the input-0 history line, so the
    // whole run happens on the (L+1)-dimensional chain
    println!("\n{:>8} {:>12} {:>12} {:>12}", "T", "fidelity", "P(>=L)", "drift");
    let trace = padded.simulate();
    for t in [10.0, 40.0, 160.0, 640.0] {
        let res = evolve_history_chain(l, &EvolutionConfig::new(t, 512))?;
        let m = measure_history_chain(&res.state, &trace, bell.len(), None)?;
        println!(
            "{:>8} {:>12.6} {:>12.6} {:>12.2e}",
            t, res.fidelity, m.p_success, res.norm_drift
        );
    }

    // the same search, packaged: stop once the measured run clears the targets
    let targets = PipelineTargets { p_success: 0.9, trace_distance: 0.1, fidelity: 0.95 };
    let report = run_pipeline_with_targets(
        &bell,
        Flavor::FiveLocal,
        epsilon,
        &EvolutionConfig::new(10.0, 256),
        targets,
    )?;
    assert!(report.converged);
    println!("\npipeline report:\n{}", report.to_json());
    Ok(())
}
