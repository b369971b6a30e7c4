//! The 5-local clock construction. A circuit U_L···U_1 on n qubits becomes a
//! pair of Hamiltonians on n computation qubits plus an L-qubit unary clock:
//!
//! * `H_init = H_clockinit + H_input + H_clock` has the all-zero state γ₀ as
//!   its ground state;
//! * `H_final = ½·Σ_ℓ H_ℓ + H_input + H_clock` has the uniform history state
//!   as its ground state.
//!
//! `H_clock` penalizes clock configurations containing "01" (anything that is
//! not unary), `H_input` penalizes nonzero computation qubits at clock 0,
//! `H_clockinit` penalizes clock values above 0, and each propagation term
//! `H_ℓ` checks that the amplitude at clock ℓ is the amplitude at clock ℓ-1
//! advanced by U_ℓ. Interactions touch at most 2 computation qubits and 3
//! adjacent clock qubits.

use crate::circuit::{Circuit, Gate};
use crate::hamiltonian::{AdiabaticProgram, Flavor, HamiltonianSum, LocalTerm};
use crate::linalg::cr;
use crate::{ensure, CMatrix, Result};

/// Σ_{ℓ=1}^{L-1} |01⟩⟨01| on adjacent clock qubit pairs. Zero exactly on
/// unary-counter states, ≥ 1 on every other clock basis state.
pub fn clock_term(n: usize, l: usize) -> HamiltonianSum {
    let mut h = HamiltonianSum::new(n + l, 2);
    let mut p01 = CMatrix::zeros(4, 4);
    p01[(1, 1)] = cr(1.0);
    for ell in 1..l {
        h.push(LocalTerm::new(vec![n + ell - 1, n + ell], 1.0, p01.clone()))
            .expect("clock term");
    }
    h
}

/// Σ_i |1⟩⟨1|_i ⊗ |0⟩⟨0| on the first clock qubit: counts computation qubits
/// that are nonzero while the clock still reads 0.
pub fn input_term(n: usize, l: usize) -> HamiltonianSum {
    let mut h = HamiltonianSum::new(n + l, 2);
    let mut p = CMatrix::zeros(4, 4);
    p[(2, 2)] = cr(1.0); // |1⟩⟨1| ⊗ |0⟩⟨0|
    for i in 0..n {
        h.push(LocalTerm::new(vec![i, n], 1.0, p.clone()))
            .expect("input term");
    }
    h
}

/// |1⟩⟨1| on the first clock qubit: penalizes any clock value above 0.
pub fn clockinit_term(n: usize, l: usize) -> HamiltonianSum {
    let mut h = HamiltonianSum::new(n + l, 2);
    let mut p = CMatrix::zeros(2, 2);
    p[(1, 1)] = cr(1.0);
    h.push(LocalTerm::new(vec![n], 1.0, p)).expect("clockinit term");
    h
}

fn unit(dim: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(i, j)] = cr(1.0);
    m
}

/// The propagation term H_ℓ (1-based ℓ ≤ L) for the gate U_ℓ: two diagonal
/// clock-pattern identifiers plus a Hermitian hopping block
/// -(U_ℓ ⊗ |after⟩⟨before| + U_ℓ† ⊗ |before⟩⟨after|). Interior terms watch
/// clock qubits (ℓ-1, ℓ, ℓ+1) with patterns 100 → 110; the ends use
/// two-qubit patterns 00 → 10 and 10 → 11.
pub fn propagation_term(gate: &Gate, ell: usize, n: usize, l: usize) -> Result<HamiltonianSum> {
    ensure!(l >= 2, "propagation terms need L >= 2, got {}", l);
    ensure!(
        ell >= 1 && ell <= l,
        "gate index {} outside 1..={}",
        ell,
        l
    );
    let mut h = HamiltonianSum::new(n + l, 2);
    let u = &gate.matrix;
    let ud = gate.matrix.adjoint();

    // clock support and the before/after patterns, as indices into that support's space
    let (clock_support, before, after, patt_dim): (Vec<usize>, usize, usize, usize) = if ell == 1 {
        (vec![n, n + 1], 0b00, 0b10, 4)
    } else if ell == l {
        (vec![n + l - 2, n + l - 1], 0b10, 0b11, 4)
    } else {
        (vec![n + ell - 2, n + ell - 1, n + ell], 0b100, 0b110, 8)
    };

    h.push(LocalTerm::new(
        clock_support.clone(),
        1.0,
        unit(patt_dim, before, before),
    ))?;
    h.push(LocalTerm::new(
        clock_support.clone(),
        1.0,
        unit(patt_dim, after, after),
    ))?;

    let hop = -(u.kronecker(&unit(patt_dim, after, before))
        + ud.kronecker(&unit(patt_dim, before, after)));
    let mut support = gate.targets.clone();
    support.extend_from_slice(&clock_support);
    h.push(LocalTerm::new(support, 1.0, hop))?;
    Ok(h)
}

/// Circuits shorter than 2 gates are padded with identities so the clock
/// patterns above always have room.
pub(crate) fn ensure_min_len(circuit: &Circuit) -> Result<Circuit> {
    if circuit.len() >= 2 {
        Ok(circuit.clone())
    } else {
        let mut gates = circuit.gates.clone();
        while gates.len() < 2 {
            gates.push(Gate::identity(0));
        }
        Circuit::new(circuit.n, gates)
    }
}

/// Compile a circuit into the 5-local adiabatic program.
pub fn build_5local(circuit: &Circuit) -> Result<AdiabaticProgram> {
    let circuit = ensure_min_len(circuit)?;
    let (n, l) = (circuit.n, circuit.len());

    let clock = clock_term(n, l);
    let input = input_term(n, l);

    let mut h_init = clockinit_term(n, l);
    h_init.extend(&input);
    h_init.extend(&clock);

    let mut h_final = HamiltonianSum::new(n + l, 2);
    for (idx, gate) in circuit.gates.iter().enumerate() {
        h_final.extend(&propagation_term(gate, idx + 1, n, l)?.scaled(0.5));
    }
    h_final.extend(&input);
    h_final.extend(&clock);

    Ok(AdiabaticProgram {
        flavor: Flavor::FiveLocal,
        n,
        l,
        epsilon: None,
        j: None,
        h_init,
        h_final,
    })
}
