//! The 3-local variant. Same unary clock as the 5-local construction, but
//! each hopping term touches a single clock qubit: advancing the clock from
//! ℓ-1 to ℓ is just flipping clock qubit ℓ from 0 to 1, so
//! H'_ℓ = identifiers − (U_ℓ ⊗ |1⟩⟨0|_ℓ + h.c.) is (2+1)-local. The price
//! is that hops applied to far-away clock values leave the legal clock
//! space, so H_clock is scaled by a penalty J (default ε⁻²L⁶) to confine
//! the dynamics; the restriction to the history lines is unchanged.

use crate::circuit::{Circuit, Gate};
use crate::five_local::{clock_term, clockinit_term, ensure_min_len, input_term};
use crate::hamiltonian::{validated_penalty, AdiabaticProgram, Flavor, HamiltonianSum, LocalTerm};
use crate::linalg::cr;
use crate::{ensure, CMatrix, Result};

fn unit(dim: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(i, j)] = cr(1.0);
    m
}

/// The 3-local propagation term H'_ℓ: the same two diagonal clock-pattern
/// identifiers as the 5-local H_ℓ, but a hop on clock qubit ℓ alone.
pub fn propagation_term_3(gate: &Gate, ell: usize, n: usize, l: usize) -> Result<HamiltonianSum> {
    ensure!(l >= 2, "propagation terms need L >= 2, got {}", l);
    ensure!(ell >= 1 && ell <= l, "gate index {} outside 1..={}", ell, l);
    let mut h = HamiltonianSum::new(n + l, 2);
    let u = &gate.matrix;
    let ud = gate.matrix.adjoint();

    let (id_support, before, after, patt_dim): (Vec<usize>, usize, usize, usize) = if ell == 1 {
        (vec![n, n + 1], 0b00, 0b10, 4)
    } else if ell == l {
        (vec![n + l - 2, n + l - 1], 0b10, 0b11, 4)
    } else {
        (vec![n + ell - 2, n + ell - 1, n + ell], 0b100, 0b110, 8)
    };
    h.push(LocalTerm::new(
        id_support.clone(),
        1.0,
        unit(patt_dim, before, before),
    ))?;
    h.push(LocalTerm::new(id_support, 1.0, unit(patt_dim, after, after)))?;

    // hop: flip clock qubit ℓ from 0 to 1 while applying U_ℓ
    let flip = -(u.kronecker(&unit(2, 1, 0)) + ud.kronecker(&unit(2, 0, 1)));
    let mut support = gate.targets.clone();
    support.push(n + ell - 1);
    h.push(LocalTerm::new(support, 1.0, flip))?;
    Ok(h)
}

/// Compile a circuit into the 3-local adiabatic program with penalty J on
/// the clock term (default ε⁻²L⁶). An explicit J must exceed twice the
/// spectral bound of the remaining terms.
pub fn build_3local(
    circuit: &Circuit,
    epsilon: f64,
    j_override: Option<f64>,
) -> Result<AdiabaticProgram> {
    let circuit = ensure_min_len(circuit)?;
    let (n, l) = (circuit.n, circuit.len());

    let input = input_term(n, l);
    let clock = clock_term(n, l);

    let mut init_rest = clockinit_term(n, l);
    init_rest.extend(&input);

    let mut final_rest = HamiltonianSum::new(n + l, 2);
    for (idx, gate) in circuit.gates.iter().enumerate() {
        final_rest.extend(&propagation_term_3(gate, idx + 1, n, l)?.scaled(0.5));
    }
    final_rest.extend(&input);

    let k_bound = init_rest.norm_bound().max(final_rest.norm_bound());
    let j = validated_penalty(epsilon, l, j_override, k_bound)?;

    let mut h_init = init_rest;
    h_init.extend(&clock.scaled(j));
    let mut h_final = final_rest;
    h_final.extend(&clock.scaled(j));

    Ok(AdiabaticProgram {
        flavor: Flavor::ThreeLocal,
        n,
        l,
        epsilon: Some(epsilon),
        j: Some(j),
        h_init,
        h_final,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{
        complexify, dense_eigen_full, history_basis, invariance_residual, restrict,
        s0_closed_form, Operator,
    };
    use crate::CVector;

    fn bell() -> Circuit {
        Circuit::new(2, vec![Gate::h(0), Gate::cnot(0, 1)]).unwrap()
    }

    #[test]
    fn locality_audit() {
        let prog = build_3local(&bell().pad_identities(1.0).unwrap(), 0.5, None).unwrap();
        assert_eq!(prog.locality(), 3);
    }

    #[test]
    fn default_penalty_value() {
        // ε = 0.5, L = 4: J = 4 · 4⁶ = 16384
        let prog = build_3local(&bell().pad_identities(1.0).unwrap(), 0.5, None).unwrap();
        assert_eq!(prog.j, Some(16384.0));
    }

    #[test]
    fn penalty_override_guard() {
        let c = bell();
        assert!(build_3local(&c, 0.5, Some(3.0)).is_err());
        assert!(build_3local(&c, 0.5, Some(500.0)).is_ok());
        assert!(build_3local(&c, 0.0, None).is_err());
        assert!(build_3local(&c, 1.5, None).is_err());
    }

    #[test]
    fn restriction_matches_closed_form_but_space_leaks() {
        let c = bell();
        let prog = build_3local(&c, 0.5, None).unwrap();
        let basis = history_basis(&c, 0).unwrap();
        for &s in &[0.0, 0.5, 1.0] {
            let h = prog.at(s).unwrap();
            let op = Operator::Sum(&h);
            let r = restrict(&op, &basis).unwrap();
            let closed = complexify(&s0_closed_form(s, prog.l));
            let defect = (r.matrix.clone() - closed)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(defect < 1e-10, "restriction defect {} at s = {}", defect, s);
            // unlike the 5-local flavor, the hops leave the history line
            if s > 0.0 {
                assert!(invariance_residual(&op, &basis) > 1e-3);
            }
        }
    }

    #[test]
    fn hop_leaves_legal_clock_space() {
        // H'_2's hop on γ₀ = |0⟩⊗|00⟩ flips clock qubit 2 alone, producing
        // the non-unary clock pattern 01
        let h2 = propagation_term_3(&Gate::x(0), 2, 1, 2).unwrap();
        let mut gamma0 = CVector::zeros(8);
        gamma0[0] = cr(1.0);
        let out = h2.apply(&gamma0);
        // component on |1⟩⊗|01⟩ = index 0b101
        assert!(out[0b101].norm() > 0.9);
    }

    #[test]
    fn ground_state_approaches_history_state() {
        let c = bell();
        let prog = build_3local(&c, 0.5, None).unwrap();
        let h1 = prog.at(1.0).unwrap().to_dense().unwrap();
        let spec = dense_eigen_full(&h1).unwrap();
        let eta = c.history_state().unwrap();
        let overlap = eta.dotc(spec.ground()).norm();
        assert!(overlap > 0.9, "overlap {}", overlap);
    }
}
