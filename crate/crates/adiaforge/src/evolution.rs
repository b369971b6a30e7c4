//! Schrödinger integration along H(s) = (1-s)·H_init + s·H_final, the
//! adiabatic-theorem time estimate, clock measurement, and the end-to-end
//! pad → compile → profile → evolve → measure pipeline.
//!
//! The integrator is piecewise-constant midpoint propagation,
//! ψ_{k+1} = exp(-i·H((k+½)/N)·T/N)·ψ_k, with the convention i·dψ/dt = Hψ.
//! Every step applies the exact propagator of its frozen Hamiltonian
//! (eigendecomposition up to [`crate::spectral::DENSE_EIGEN_CAP`], a Lanczos
//! exponential action above it), so the only integration error is the
//! s-dependence across a step and the scheme is second order; a stiff
//! penalty term J costs nothing in step count. Evolving with the opposite
//! sign conjugates the state of a real program and leaves every fidelity
//! unchanged, so the acceptance checks do not depend on the convention.

use nalgebra::linalg::SymmetricEigen;
use serde::Serialize;

use crate::circuit::{unary_clock_index, Circuit, CircuitStateTrace};
use crate::five_local::build_5local;
use crate::grid::{build_grid_program, gamma_index, initial_state_index};
use crate::hamiltonian::{AdiabaticProgram, Flavor, HamiltonianSum, ASSEMBLY_CAP};
use crate::linalg::{cr, spectral_norm};
use crate::spectral::{
    complexify, dense_eigen_full, eigen_low, gap_profile, s0_closed_form, sample_grid, GapMode,
    Operator, DEGENERACY_TOL, DENSE_EIGEN_CAP,
};
use crate::three_local::build_3local;
use crate::{ensure, C64, CMatrix, CVector, Error, RMatrix, Result};

/// Largest full-space dimension [`evolve`] accepts.
pub const EVOLUTION_CAP: usize = 1 << 22;

/// Per-step tolerance of the Krylov exponential action.
const EXPV_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    /// Total evolution time T.
    pub t: f64,
    /// Number of midpoint steps N.
    pub steps: usize,
    /// Adiabatic-theorem exponent δ used by the T estimate.
    pub delta: f64,
    /// Norm drift above this is a numerical failure, not a result.
    pub drift_tol: f64,
}

impl EvolutionConfig {
    pub fn new(t: f64, steps: usize) -> EvolutionConfig {
        EvolutionConfig {
            t,
            steps,
            delta: 0.1,
            drift_tol: 1e-9,
        }
    }

    fn validate(&self) -> Result<()> {
        ensure!(
            self.t.is_finite() && self.t > 0.0,
            "evolution time must be positive, got {}",
            self.t
        );
        ensure!(self.steps >= 1, "need at least one time step");
        ensure!(
            self.delta.is_finite() && self.delta >= 0.0,
            "delta must be nonnegative, got {}",
            self.delta
        );
        ensure!(
            self.drift_tol.is_finite() && self.drift_tol >= 0.0,
            "drift tolerance must be nonnegative"
        );
        Ok(())
    }
}

impl Default for EvolutionConfig {
    fn default() -> EvolutionConfig {
        EvolutionConfig::new(10.0, 256)
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    /// ψ(T) in the coordinates the run used (full register, or chain vertices).
    pub state: CVector,
    /// Overlap of ψ(T) with the ground level of H_final: the norm of its
    /// projection onto the eigenvalue cluster within [`DEGENERACY_TOL`] of λ0.
    pub fidelity: f64,
    /// |‖ψ(T)‖ - 1|, already checked against the configured tolerance.
    pub norm_drift: f64,
    /// T·max_s ‖H(s)‖. The norm is convex along the segment, so the max sits
    /// at an endpoint; endpoint norms are exact for small dimensions and
    /// triangle-inequality bounds otherwise.
    pub runtime_metric: f64,
}

// ---------------------------------------------------------------------------
// Midpoint engine
// ---------------------------------------------------------------------------

/// exp(-i·theta·H)·ψ through the full eigendecomposition of H.
fn dense_step(h: CMatrix, psi: &CVector, theta: f64) -> CVector {
    let eig = SymmetricEigen::new(h);
    let mut w = eig.eigenvectors.adjoint() * psi;
    for t in 0..w.len() {
        w[t] *= C64::new(0.0, -theta * eig.eigenvalues[t]).exp();
    }
    &eig.eigenvectors * w
}

/// Same step for a real symmetric H acting on a complex state; the chain
/// evolutions run here, where the real eigensolve is noticeably cheaper.
fn real_step(h: RMatrix, psi: &CVector, theta: f64) -> CVector {
    let d = psi.len();
    let eig = SymmetricEigen::new(h);
    let q = &eig.eigenvectors;
    let mut w = vec![C64::new(0.0, 0.0); d];
    for t in 0..d {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            acc += psi[i] * q[(i, t)];
        }
        w[t] = acc * C64::new(0.0, -theta * eig.eigenvalues[t]).exp();
    }
    CVector::from_fn(d, |i, _| {
        let mut acc = C64::new(0.0, 0.0);
        for t in 0..d {
            acc += w[t] * q[(i, t)];
        }
        acc
    })
}

/// y = exp(-i·sign·dt·T_m)·e₁ for the Lanczos tridiagonal (α, β).
fn tridiag_exp(alphas: &[f64], betas: &[f64], dt: f64, sign: f64) -> Vec<C64> {
    let m = alphas.len();
    let mut t = RMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let q = &eig.eigenvectors;
    (0..m)
        .map(|row| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..m {
                acc += C64::new(0.0, -sign * dt * eig.eigenvalues[k]).exp()
                    * (q[(row, k)] * q[(0, k)]);
            }
            acc
        })
        .collect()
}

/// Lanczos approximation of exp(-i·sign·dt·H)·v with full reorthogonalization.
/// If the basis budget is exhausted before the residual indicator drops under
/// tol, the step is split in half recursively.
fn krylov_expv<F: Fn(&CVector) -> CVector>(
    apply: &F,
    v: &CVector,
    dt: f64,
    sign: f64,
    tol: f64,
    depth: usize,
) -> Result<CVector> {
    if depth > 24 {
        return Err(Error::numerical(
            "step exponential did not converge even after repeated splitting",
        ));
    }
    let beta0 = v.norm();
    if beta0 < 1e-300 {
        return Ok(v.clone());
    }
    let dim = v.len();
    // basis memory budget ~2 GiB
    let m_max = ((1usize << 31) / (16 * dim)).clamp(8, 80).min(dim);

    let mut basis: Vec<CVector> = vec![v * cr(1.0 / beta0)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut y_prev: Vec<C64> = Vec::new();
    for j in 0..m_max {
        let mut w = apply(&basis[j]);
        alphas.push(basis[j].dotc(&w).re);
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&w);
                w.axpy(-c, b, C64::new(1.0, 0.0));
            }
        }
        let beta = w.norm();
        let scale = alphas
            .iter()
            .map(|a| a.abs())
            .chain(betas.iter().copied())
            .fold(1.0f64, f64::max);
        let happy = beta <= 1e-12 * scale;
        let m = j + 1;
        if happy || m == m_max || m % 4 == 0 {
            let y = tridiag_exp(&alphas, &betas, dt, sign);
            let resid = if happy { 0.0 } else { beta * y[m - 1].norm() };
            let drifted: f64 = y
                .iter()
                .enumerate()
                .map(|(i, yi)| {
                    let prev = y_prev.get(i).copied().unwrap_or(C64::new(0.0, 0.0));
                    (yi - prev).norm_sqr()
                })
                .sum::<f64>()
                .sqrt();
            if happy || resid <= tol || (!y_prev.is_empty() && drifted <= tol) {
                let mut out = CVector::zeros(dim);
                for (t, b) in basis.iter().enumerate() {
                    out.axpy(y[t] * cr(beta0), b, C64::new(1.0, 0.0));
                }
                return Ok(out);
            }
            y_prev = y;
        }
        if happy {
            break;
        }
        betas.push(beta);
        basis.push(w * cr(1.0 / beta));
    }
    let half = krylov_expv(apply, v, dt / 2.0, sign, tol / 2.0, depth + 1)?;
    krylov_expv(apply, &half, dt / 2.0, sign, tol / 2.0, depth + 1)
}

/// Run the midpoint scheme between two endpoint Hamiltonians. `dense_cap`
/// decides the eigendecomposition/Krylov switchover (tests lower it to force
/// the Krylov path onto small operators).
fn propagate_capped(
    h_init: &HamiltonianSum,
    h_final: &HamiltonianSum,
    psi0: &CVector,
    cfg: &EvolutionConfig,
    sign: f64,
    dense_cap: usize,
) -> Result<(CVector, f64)> {
    cfg.validate()?;
    let dim = h_init.dim();
    ensure!(
        h_final.dim() == dim && psi0.len() == dim,
        "endpoint and state dimensions disagree"
    );
    ensure!(
        dim <= EVOLUTION_CAP,
        "dimension {} exceeds the evolution cap {}",
        dim,
        EVOLUTION_CAP
    );
    ensure!(
        (psi0.norm() - 1.0).abs() <= 1e-8,
        "initial state is not normalized"
    );
    let n = cfg.steps;
    let dt = cfg.t / n as f64;
    let mut psi = psi0.clone();
    if dim <= dense_cap {
        let a = h_init.to_dense()?;
        let b = h_final.to_dense()?;
        for k in 0..n {
            let s = (k as f64 + 0.5) / n as f64;
            psi = dense_step(&a * cr(1.0 - s) + &b * cr(s), &psi, sign * dt);
        }
    } else {
        for k in 0..n {
            let s = (k as f64 + 0.5) / n as f64;
            let apply = |v: &CVector| {
                let mut w = h_init.apply(v) * cr(1.0 - s);
                w.axpy(cr(s), &h_final.apply(v), C64::new(1.0, 0.0));
                w
            };
            psi = krylov_expv(&apply, &psi, dt, sign, EXPV_TOL, 0)?;
        }
    }
    let drift = (psi.norm() - 1.0).abs();
    if drift > cfg.drift_tol {
        return Err(Error::numerical(format!(
            "norm drift {:.3e} exceeds the tolerance {:.3e}",
            drift, cfg.drift_tol
        )));
    }
    Ok((psi, drift))
}

/// Midpoint scheme on the closed-form (L+1)-vertex chain, starting at
/// vertex 0 (the chain coordinates of γ₀).
fn propagate_chain(l: usize, cfg: &EvolutionConfig, sign: f64) -> Result<(CVector, f64)> {
    cfg.validate()?;
    ensure!(l >= 1, "chain needs L >= 1");
    let mut psi = CVector::zeros(l + 1);
    psi[0] = cr(1.0);
    let n = cfg.steps;
    let dt = cfg.t / n as f64;
    for k in 0..n {
        let s = (k as f64 + 0.5) / n as f64;
        psi = real_step(s0_closed_form(s, l), &psi, sign * dt);
    }
    let drift = (psi.norm() - 1.0).abs();
    if drift > cfg.drift_tol {
        return Err(Error::numerical(format!(
            "norm drift {:.3e} exceeds the tolerance {:.3e}",
            drift, cfg.drift_tol
        )));
    }
    Ok((psi, drift))
}

// ---------------------------------------------------------------------------
// Norms, initial state, fidelity
// ---------------------------------------------------------------------------

fn endpoint_norm(h: &HamiltonianSum) -> f64 {
    if h.dim() <= 512 {
        match h.to_dense() {
            Ok(d) => spectral_norm(&d),
            Err(_) => h.norm_bound(),
        }
    } else {
        h.norm_bound()
    }
}

/// max_s ‖H(s)‖ over the interpolation (attained at an endpoint).
pub fn max_interpolation_norm(program: &AdiabaticProgram) -> f64 {
    endpoint_norm(&program.h_init).max(endpoint_norm(&program.h_final))
}

/// ‖H_final - H_init‖, exact for small dimensions, bounded otherwise.
pub fn interpolation_norm_diff(program: &AdiabaticProgram) -> f64 {
    let mut d = program.h_final.scaled(1.0);
    d.extend(&program.h_init.scaled(-1.0));
    endpoint_norm(&d)
}

/// The tensor-product ground state of H_init, written down rather than
/// solved for: |0…0⟩ for the qubit flavors, the all-first-phase column-0
/// pattern for the grid.
pub fn analytic_initial_state(program: &AdiabaticProgram) -> Result<CVector> {
    let dim = program.dim();
    ensure!(
        dim <= EVOLUTION_CAP,
        "dimension {} exceeds the evolution cap {}",
        dim,
        EVOLUTION_CAP
    );
    let idx = match program.flavor {
        Flavor::FiveLocal | Flavor::ThreeLocal => 0usize,
        Flavor::Grid => {
            let n = program.n;
            ensure!(
                n >= 1 && program.l % (2 * n) == 0,
                "grid clock length {} does not fit n = {}",
                program.l,
                n
            );
            initial_state_index(n, program.l / (2 * n))
        }
    };
    let mut psi = CVector::zeros(dim);
    psi[idx] = cr(1.0);
    Ok(psi)
}

/// ‖P·ψ‖ for P the projector onto the ground cluster of h.
fn ground_cluster_overlap(h: &HamiltonianSum, psi: &CVector) -> Result<f64> {
    let dim = h.dim();
    let spectrum = if dim <= DENSE_EIGEN_CAP {
        dense_eigen_full(&h.to_dense()?)?
    } else {
        let mut k = 8.min(dim);
        loop {
            let spec = eigen_low(&Operator::Sum(h), k)?;
            let spread = spec.eigenvalues[k - 1] - spec.eigenvalues[0];
            if spread > DEGENERACY_TOL || k == dim {
                break spec;
            }
            ensure!(
                k < 64,
                "ground level degeneracy exceeds 64; refusing to project"
            );
            k = (k * 2).min(dim).min(64);
        }
    };
    let lo = spectrum.eigenvalues[0];
    let mut p = 0.0;
    for (t, lam) in spectrum.eigenvalues.iter().enumerate() {
        if lam - lo <= DEGENERACY_TOL {
            p += spectrum.eigenvectors[t].dotc(psi).norm_sqr();
        }
    }
    Ok(p.sqrt().min(1.0))
}

// ---------------------------------------------------------------------------
// Public evolution entry points
// ---------------------------------------------------------------------------

/// Integrate from the analytic ground state of H_init and score the result
/// against the ground level of H_final.
pub fn evolve(program: &AdiabaticProgram, config: &EvolutionConfig) -> Result<EvolutionResult> {
    let psi0 = analytic_initial_state(program)?;
    let (state, norm_drift) = propagate_capped(
        &program.h_init,
        &program.h_final,
        &psi0,
        config,
        1.0,
        DENSE_EIGEN_CAP,
    )?;
    let fidelity = ground_cluster_overlap(&program.h_final, &state)?;
    Ok(EvolutionResult {
        fidelity,
        norm_drift,
        runtime_metric: config.t * max_interpolation_norm(program),
        state,
    })
}

/// The same integration carried out inside the invariant history line: the
/// closed-form chain on L+1 vertices, started at vertex 0 and scored against
/// the uniform chain vector (the history state in these coordinates). For
/// the 5-local flavor this is the full evolution exactly, because the line
/// is invariant for every s.
pub fn evolve_history_chain(l: usize, config: &EvolutionConfig) -> Result<EvolutionResult> {
    let (state, norm_drift) = propagate_chain(l, config, 1.0)?;
    let u = 1.0 / ((l + 1) as f64).sqrt();
    let mut overlap = C64::new(0.0, 0.0);
    for i in 0..=l {
        overlap += state[i] * u;
    }
    let h0 = complexify(&s0_closed_form(0.0, l));
    let h1 = complexify(&s0_closed_form(1.0, l));
    Ok(EvolutionResult {
        fidelity: overlap.norm(),
        norm_drift,
        runtime_metric: config.t * spectral_norm(&h0).max(spectral_norm(&h1)),
        state,
    })
}

/// The adiabatic-theorem scaling ‖ΔH‖^{1+δ} / (ε^δ · Δ^{2+δ}) with unit
/// constant. The theorem's constant is unknown (and blows up as δ → 0), so
/// this is a scaling estimate; the doubling search decides the actual T.
pub fn required_t_estimate(
    norm_diff: f64,
    gap_min: f64,
    epsilon: f64,
    delta: f64,
) -> Result<f64> {
    ensure!(
        norm_diff.is_finite() && norm_diff >= 0.0,
        "norm difference must be nonnegative"
    );
    ensure!(
        gap_min.is_finite() && gap_min > 0.0,
        "gap must be positive, got {}",
        gap_min
    );
    ensure!(
        epsilon.is_finite() && epsilon > 0.0,
        "epsilon must be positive"
    );
    ensure!(delta.is_finite() && delta >= 0.0, "delta must be nonnegative");
    Ok(norm_diff.powf(1.0 + delta) / (epsilon.powf(delta) * gap_min.powf(2.0 + delta)))
}

// ---------------------------------------------------------------------------
// Clock measurement
// ---------------------------------------------------------------------------

/// Clock measurement statistics of a state on a program's register.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    /// P(clock = ℓ) for ℓ = 0..=L (unary patterns, or legal shapes).
    pub histogram: Vec<f64>,
    /// Weight outside every legal clock sector.
    pub illegal: f64,
    /// Clock threshold the success probability refers to.
    pub threshold: usize,
    /// P(clock ≥ threshold).
    pub p_success: f64,
    /// Normalized conditional computational state per clock value; None where
    /// the clock value carries no weight.
    pub conditional: Vec<Option<CVector>>,
    /// Trace distance of the clock ≥ threshold conditional mixture to the
    /// supplied target; None without a target or without any weight there.
    pub trace_distance: Option<f64>,
}

/// Unnormalized computational-register slices ⟨clock ℓ| state⟩ for every ℓ.
fn clock_slices(state: &CVector, program: &AdiabaticProgram) -> Result<Vec<CVector>> {
    ensure!(
        state.len() == program.dim(),
        "state has dimension {} but the program register has {}",
        state.len(),
        program.dim()
    );
    let (n, l) = (program.n, program.l);
    let mut slices = Vec::with_capacity(l + 1);
    match program.flavor {
        Flavor::FiveLocal | Flavor::ThreeLocal => {
            let clock_dim = 1usize << l;
            for ell in 0..=l {
                let c = unary_clock_index(ell, l);
                slices.push(CVector::from_fn(1 << n, |z, _| state[z * clock_dim + c]));
            }
        }
        Flavor::Grid => {
            ensure!(
                program.l % (2 * n) == 0,
                "grid clock length {} does not fit n = {}",
                l,
                n
            );
            let r = l / (2 * n);
            for ell in 0..=l {
                let mut phi = CVector::zeros(1 << n);
                for z in 0..(1usize << n) {
                    phi[z] = state[gamma_index(ell, n, r, z)?];
                }
                slices.push(phi);
            }
        }
    }
    Ok(slices)
}

/// Trace distance ½‖ρ - |τ⟩⟨τ|‖₁ of the mixture over the given slices.
fn conditioned_distance(slices: &[CVector], tau: &CVector) -> Option<f64> {
    let d = tau.len();
    if d > DENSE_EIGEN_CAP {
        return None;
    }
    let mut rho = CMatrix::zeros(d, d);
    let mut p = 0.0;
    for phi in slices {
        rho += phi * phi.adjoint();
        p += phi.norm_squared();
    }
    if p < 1e-150 {
        return None;
    }
    let diff = rho * cr(1.0 / p) - tau * tau.adjoint();
    let eig = SymmetricEigen::new(diff);
    Some(0.5 * eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
}

fn outcome_from_slices(
    slices: Vec<CVector>,
    threshold: usize,
    target: Option<&CVector>,
) -> MeasurementOutcome {
    let histogram: Vec<f64> = slices.iter().map(|phi| phi.norm_squared()).collect();
    let total: f64 = histogram.iter().sum();
    let p_success: f64 = histogram[threshold..].iter().sum();
    let conditional = slices
        .iter()
        .map(|phi| {
            let p = phi.norm();
            if p > 1e-150 {
                Some(phi * cr(1.0 / p))
            } else {
                None
            }
        })
        .collect();
    let trace_distance = target.and_then(|tau| conditioned_distance(&slices[threshold..], tau));
    MeasurementOutcome {
        histogram,
        illegal: (1.0 - total).max(0.0),
        threshold,
        p_success,
        conditional,
        trace_distance,
    }
}

/// Project onto the legal clock sectors. The success threshold is the
/// program's own L and no output target is scored; see
/// [`measure_clock_against`] for both knobs.
pub fn measure_clock(state: &CVector, program: &AdiabaticProgram) -> Result<MeasurementOutcome> {
    measure_clock_against(state, program, program.l, None)
}

/// Clock measurement with an explicit success threshold and an optional
/// target for the conditioned trace distance. The target lives on the
/// computational register in the coordinates the program uses (wire order
/// for grid programs, where row i of the grid carries bit i of the index).
pub fn measure_clock_against(
    state: &CVector,
    program: &AdiabaticProgram,
    threshold: usize,
    target: Option<&CVector>,
) -> Result<MeasurementOutcome> {
    ensure!(
        threshold <= program.l,
        "threshold {} exceeds L = {}",
        threshold,
        program.l
    );
    if let Some(tau) = target {
        ensure!(
            tau.len() == 1usize << program.n,
            "target has dimension {} but the computational register has {}",
            tau.len(),
            1usize << program.n
        );
    }
    let slices = clock_slices(state, program)?;
    Ok(outcome_from_slices(slices, threshold, target))
}

/// Measurement of a chain-coordinate state: vertex ℓ of the chain is the
/// snapshot α(ℓ), so the computational slice at clock ℓ is ψ_ℓ·α(ℓ) and
/// there is no illegal bucket.
pub fn measure_history_chain(
    state: &CVector,
    trace: &CircuitStateTrace,
    threshold: usize,
    target: Option<&CVector>,
) -> Result<MeasurementOutcome> {
    let l = trace.states.len() - 1;
    ensure!(
        state.len() == l + 1,
        "chain state has {} entries but the trace has {} snapshots",
        state.len(),
        l + 1
    );
    ensure!(
        threshold <= l,
        "threshold {} exceeds L = {}",
        threshold,
        l
    );
    let slices: Vec<CVector> = (0..=l).map(|ell| &trace.states[ell] * state[ell]).collect();
    Ok(outcome_from_slices(slices, threshold, target))
}

// ---------------------------------------------------------------------------
// JSON reports and the end-to-end pipeline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct MeasurementJson {
    pub p_success: f64,
    pub trace_distance: Option<f64>,
    /// P(clock = ℓ) for ℓ = 0..=L; weight missing from the sum sits on
    /// illegal clock configurations.
    pub clock_histogram: Vec<f64>,
}

impl From<&MeasurementOutcome> for MeasurementJson {
    fn from(m: &MeasurementOutcome) -> MeasurementJson {
        MeasurementJson {
            p_success: m.p_success,
            trace_distance: m.trace_distance,
            clock_histogram: m.histogram.clone(),
        }
    }
}

/// The flat report a single evolve run serializes to.
#[derive(Debug, Clone, Serialize)]
pub struct EvolveReport {
    #[serde(rename = "T")]
    pub t: f64,
    pub steps: usize,
    pub fidelity: f64,
    pub norm_drift: f64,
    pub runtime_metric: f64,
    pub measurement: MeasurementJson,
}

impl EvolveReport {
    pub fn new(
        config: &EvolutionConfig,
        result: &EvolutionResult,
        measurement: &MeasurementOutcome,
    ) -> EvolveReport {
        EvolveReport {
            t: config.t,
            steps: config.steps,
            fidelity: result.fidelity,
            norm_drift: result.norm_drift,
            runtime_metric: result.runtime_metric,
            measurement: MeasurementJson::from(measurement),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

/// What the doubling search must reach before it stops.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineTargets {
    pub p_success: f64,
    pub trace_distance: f64,
    pub fidelity: f64,
}

impl Default for PipelineTargets {
    fn default() -> PipelineTargets {
        PipelineTargets {
            p_success: 0.9,
            trace_distance: 0.1,
            fidelity: 0.95,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    #[serde(rename = "T")]
    pub t: f64,
    pub fidelity: f64,
    pub p_success: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub flavor: Flavor,
    pub n: usize,
    pub l_original: usize,
    pub l_padded: usize,
    /// Clock value the success probability is conditioned on. Gate count for
    /// the qubit flavors; for the grid, the step at which the original
    /// circuit's rounds are complete.
    pub threshold: usize,
    pub epsilon: f64,
    pub gap_mode: GapMode,
    pub min_gap: f64,
    pub norm_diff: f64,
    pub t_estimate: f64,
    /// P(clock ≥ threshold) of the exact history state, the ceiling the
    /// evolved state is compared against.
    pub p_ideal: f64,
    pub targets: PipelineTargets,
    pub sweep: Vec<SweepPoint>,
    pub converged: bool,
    #[serde(rename = "T")]
    pub t: f64,
    pub steps: usize,
    pub fidelity: f64,
    pub norm_drift: f64,
    pub runtime_metric: f64,
    /// |fidelity(2N) - fidelity(N)| at the operating point after refinement.
    pub step_doubling_delta: f64,
    pub measurement: MeasurementJson,
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

const T_START: f64 = 10.0;
const T_BUDGET_FACTOR: f64 = 16384.0;

type Runner = Box<dyn Fn(f64, usize) -> Result<(EvolutionResult, MeasurementOutcome)>>;

/// pad → build → gap profile → T estimate → doubling search → measurement,
/// with the default (acceptance) success targets.
pub fn run_pipeline(
    circuit: &Circuit,
    flavor: Flavor,
    epsilon: f64,
    config: &EvolutionConfig,
) -> Result<PipelineReport> {
    run_pipeline_with_targets(circuit, flavor, epsilon, config, PipelineTargets::default())
}

/// [`run_pipeline`] with explicit success targets. Note the padding sets a
/// ceiling P(clock ≥ L) = (L'-L+1)/(L'+1) ≈ 1 - ε/2 on what any evolution
/// can reach, so the success target must sit below the ceiling the chosen ε
/// implies.
pub fn run_pipeline_with_targets(
    circuit: &Circuit,
    flavor: Flavor,
    epsilon: f64,
    config: &EvolutionConfig,
    targets: PipelineTargets,
) -> Result<PipelineReport> {
    config.validate()?;
    let l_original = circuit.len();
    let padded = circuit.pad_identities(epsilon)?;

    let (program, threshold, gap_mode, run_at): (AdiabaticProgram, usize, GapMode, Runner) =
        match flavor {
            Flavor::FiveLocal => {
                let program = build_5local(&padded)?;
                let l = program.l;
                let trace = padded.simulate();
                let target = trace.states.last().unwrap().clone();
                let thr = l_original.min(l);
                let base = config.clone();
                let runner = move |t: f64, steps: usize| {
                    let mut c = base.clone();
                    c.t = t;
                    c.steps = steps;
                    let res = evolve_history_chain(l, &c)?;
                    let meas = measure_history_chain(&res.state, &trace, thr, Some(&target))?;
                    Ok((res, meas))
                };
                (program, thr, GapMode::HistoryChain, Box::new(runner))
            }
            Flavor::ThreeLocal | Flavor::Grid => {
                let (program, thr, target) = if flavor == Flavor::ThreeLocal {
                    let program = build_3local(&padded, epsilon, None)?;
                    let target = padded.simulate().states.last().unwrap().clone();
                    (program, l_original.min(padded.len()), target)
                } else {
                    let layout = padded.to_grid_layout()?;
                    let rounds_needed = circuit.to_grid_layout()?.rounds;
                    let program = build_grid_program(&layout, epsilon, None)?.program;
                    let target = layout.circuit.simulate().states.last().unwrap().clone();
                    let thr = (2 * circuit.n * rounds_needed).min(program.l);
                    (program, thr, target)
                };
                ensure!(
                    program.dim() <= EVOLUTION_CAP,
                    "program dimension {} exceeds the evolution cap; raise epsilon",
                    program.dim()
                );
                let mode = if program.dim() <= ASSEMBLY_CAP {
                    GapMode::LegalProducts
                } else {
                    GapMode::HistoryChain
                };
                let prog = program.clone();
                let base = config.clone();
                let runner = move |t: f64, steps: usize| {
                    let mut c = base.clone();
                    c.t = t;
                    c.steps = steps;
                    let res = evolve(&prog, &c)?;
                    let meas = measure_clock_against(&res.state, &prog, thr, Some(&target))?;
                    Ok((res, meas))
                };
                (program, thr, mode, Box::new(runner))
            }
        };

    let profile = gap_profile(&program, gap_mode, &sample_grid(101))?;
    let min_gap = profile.min_gap();
    if !(min_gap > 0.0) {
        return Err(Error::numerical(format!(
            "gap profile shows no gap (min {:.3e})",
            min_gap
        )));
    }
    let norm_diff = interpolation_norm_diff(&program);
    let t_estimate = required_t_estimate(norm_diff, min_gap, epsilon, config.delta)?;
    let l_padded = program.l;
    let p_ideal = (l_padded - threshold + 1) as f64 / (l_padded + 1) as f64;

    let search_steps = |t: f64| config.steps.max(t.ceil() as usize);
    let mut sweep = Vec::new();
    let mut t = T_START;
    let mut converged = false;
    let mut current = run_at(t, search_steps(t))?;
    loop {
        sweep.push(SweepPoint {
            t,
            fidelity: current.0.fidelity,
            p_success: current.1.p_success,
        });
        let ok = current.1.p_success >= targets.p_success
            && current
                .1
                .trace_distance
                .map_or(false, |d| d <= targets.trace_distance)
            && current.0.fidelity >= targets.fidelity;
        if ok {
            converged = true;
            break;
        }
        if t >= T_START * T_BUDGET_FACTOR {
            break;
        }
        t *= 2.0;
        current = run_at(t, search_steps(t))?;
    }

    // refine the step count at the operating point until doubling stops
    // moving the fidelity
    let mut steps = search_steps(t);
    let mut delta_fid = f64::INFINITY;
    for _ in 0..8 {
        steps *= 2;
        let refined = run_at(t, steps)?;
        delta_fid = (refined.0.fidelity - current.0.fidelity).abs();
        current = refined;
        if delta_fid < 1e-6 {
            break;
        }
    }

    let (result, measurement) = current;
    Ok(PipelineReport {
        flavor,
        n: program.n,
        l_original,
        l_padded,
        threshold,
        epsilon,
        gap_mode,
        min_gap,
        norm_diff,
        t_estimate,
        p_ideal,
        targets,
        sweep,
        converged,
        t,
        steps,
        fidelity: result.fidelity,
        norm_drift: result.norm_drift,
        runtime_metric: t * max_interpolation_norm(&program),
        step_doubling_delta: delta_fid,
        measurement: MeasurementJson::from(&measurement),
    })
}
