//! Spectral certification tools: low eigenpairs of program Hamiltonians,
//! the closed-form history chain, restrictions to invariant subspaces, the
//! ground-state Markov chain with its conductance bound, Gerschgorin disc
//! splitting, and the leak / angle certificates used to control penalty
//! constructions.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{unary_clock_index, Circuit};
use crate::hamiltonian::{AdiabaticProgram, Flavor, HamiltonianSum, SparseHermitian};
use crate::linalg::{cr, fix_phase, gaussian, hermiticity_defect, orthonormality_defect, spectral_norm};
use crate::{ensure, CMatrix, CVector, Error, RMatrix, RVector, Result, C64};

/// Eigenvalues closer than this are treated as one degenerate level.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Dimension up to which eigenproblems are solved densely.
pub const DENSE_EIGEN_CAP: usize = 4096;
const RESIDUAL_TOL: f64 = 1e-9;

/// A Hermitian operator in whichever representation the caller has on hand.
pub enum Operator<'a> {
    Dense(&'a CMatrix),
    Sparse(&'a SparseHermitian),
    Sum(&'a HamiltonianSum),
}

impl Operator<'_> {
    pub fn dim(&self) -> usize {
        match self {
            Operator::Dense(m) => m.nrows(),
            Operator::Sparse(s) => s.dim,
            Operator::Sum(h) => h.dim(),
        }
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        match self {
            Operator::Dense(m) => *m * v,
            Operator::Sparse(s) => s.matvec(v),
            Operator::Sum(h) => h.apply(v),
        }
    }

    fn to_dense(&self) -> Result<CMatrix> {
        match self {
            Operator::Dense(m) => Ok((*m).clone()),
            Operator::Sparse(s) => Ok(s.to_dense()),
            Operator::Sum(h) => h.to_dense(),
        }
    }
}

/// The lowest eigenpairs of a Hermitian operator, eigenvalues ascending,
/// eigenvector phases fixed.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<CVector>,
}

impl Spectrum {
    /// λ1 - λ0. With a degenerate ground level this is ~0 by construction.
    pub fn gap(&self) -> f64 {
        self.eigenvalues[1] - self.eigenvalues[0]
    }

    pub fn ground(&self) -> &CVector {
        &self.eigenvectors[0]
    }
}

/// Full dense Hermitian eigendecomposition, sorted ascending.
pub fn dense_eigen_full(m: &CMatrix) -> Result<Spectrum> {
    let scale = m.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
    ensure!(
        hermiticity_defect(m) <= 1e-9 * scale,
        "matrix is not Hermitian (defect {:.3e})",
        hermiticity_defect(m)
    );
    let sym = (m + m.adjoint()).scale(0.5);
    let se = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let mut eigenvalues = Vec::with_capacity(order.len());
    let mut eigenvectors = Vec::with_capacity(order.len());
    for &i in &order {
        eigenvalues.push(se.eigenvalues[i]);
        let mut v: CVector = se.eigenvectors.column(i).into_owned();
        fix_phase(&mut v);
        eigenvectors.push(v);
    }
    Ok(Spectrum { eigenvalues, eigenvectors })
}

fn check_residuals(op: &Operator, spec: &Spectrum, k: usize) -> Result<()> {
    let scale = spec
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
        .max(1.0);
    for i in 0..k {
        let v = &spec.eigenvectors[i];
        let r = (op.apply(v) - v.scale(spec.eigenvalues[i])).norm();
        if r > RESIDUAL_TOL * scale {
            return Err(Error::numerical(format!(
                "eigenpair {} residual {:.3e} exceeds {:.3e}",
                i,
                r,
                RESIDUAL_TOL * scale
            )));
        }
    }
    Ok(())
}

/// The k lowest eigenpairs. Dense decomposition up to dimension 4096, a
/// restarted Krylov iteration (block size 2, full reorthogonalization)
/// beyond. Every returned pair is verified to residual 1e-9 relative to the
/// spectral scale.
pub fn eigen_low(op: &Operator, k: usize) -> Result<Spectrum> {
    let dim = op.dim();
    ensure!(k >= 1 && k <= dim, "need 1 <= k <= {}, got {}", dim, k);
    if dim <= DENSE_EIGEN_CAP {
        let full = dense_eigen_full(&op.to_dense()?)?;
        let spec = Spectrum {
            eigenvalues: full.eigenvalues[..k].to_vec(),
            eigenvectors: full.eigenvectors[..k].to_vec(),
        };
        check_residuals(op, &spec, k)?;
        return Ok(spec);
    }
    let spec = krylov_lowest(op, k)?;
    check_residuals(op, &spec, k)?;
    Ok(spec)
}

/// Restarted Rayleigh-Ritz over a Krylov basis grown from two deterministic
/// start vectors (so doubly degenerate ground levels are still resolved).
fn krylov_lowest(op: &Operator, k: usize) -> Result<Spectrum> {
    let dim = op.dim();
    let by_mem = ((2usize << 30) / (16 * dim)).max(2 * k + 8);
    let m_max = (4 * k + 60).min(200).min(by_mem).min(dim);
    let kept = (k + 6).min(m_max / 2);
    let max_matvecs = (10 * dim).min(60_000);
    let mut matvecs = 0usize;

    let mut rng = ChaCha12Rng::seed_from_u64(0xAD1A_F04E);
    let mut basis: Vec<CVector> = Vec::new();
    let mut images: Vec<CVector> = Vec::new();
    let mut next_expand = 0usize;
    let mut queue: Vec<CVector> = (0..2.min(dim))
        .map(|_| {
            let mut v = CVector::zeros(dim);
            for x in v.iter_mut() {
                *x = C64::new(gaussian(&mut rng), gaussian(&mut rng));
            }
            v
        })
        .collect();

    let orthogonalize = |v: &mut CVector, basis: &[CVector]| {
        for _ in 0..2 {
            for b in basis {
                let c = b.dotc(v);
                *v -= b.scale_complex(c);
            }
        }
    };

    loop {
        // grow the basis
        while basis.len() < m_max && matvecs < max_matvecs {
            // block-Krylov expansion: consume start vectors first, then the
            // images H·v_i in the order the v_i were added
            let mut v = if let Some(q) = queue.pop() {
                q
            } else {
                let v = images[next_expand].clone();
                next_expand += 1;
                v
            };
            orthogonalize(&mut v, &basis);
            let nrm = v.norm();
            if nrm < 1e-10 {
                // invariant subspace hit; perturb deterministically
                let mut w = CVector::zeros(dim);
                for x in w.iter_mut() {
                    *x = C64::new(gaussian(&mut rng), gaussian(&mut rng));
                }
                orthogonalize(&mut w, &basis);
                let wn = w.norm();
                ensure!(wn > 1e-12, "cannot extend Krylov basis");
                v = w.unscale(wn);
            } else {
                v = v.unscale(nrm);
            }
            let hv = op.apply(&v);
            matvecs += 1;
            basis.push(v);
            images.push(hv);

            if basis.len() % 8 == 0 || basis.len() == m_max {
                if let Some(spec) = ritz_converged(op, &basis, &images, k, &mut matvecs)? {
                    return Ok(spec);
                }
            }
        }
        if matvecs >= max_matvecs {
            return Err(Error::numerical(format!(
                "Krylov iteration did not converge within {} matvecs",
                max_matvecs
            )));
        }
        // thick restart: keep the lowest Ritz vectors, continue from the rest
        let (_, vecs) = ritz_pairs(&basis, &images, kept);
        queue = vec![images[basis.len() - 1].clone()];
        basis = vecs;
        images = basis.iter().map(|v| op.apply(v)).collect();
        matvecs += basis.len();
        next_expand = 0;
    }
}

fn small_projection(basis: &[CVector], images: &[CVector]) -> CMatrix {
    let m = basis.len();
    let mut a = CMatrix::zeros(m, m);
    for j in 0..m {
        for i in 0..m {
            a[(i, j)] = basis[i].dotc(&images[j]);
        }
    }
    (&a + a.adjoint()).scale(0.5)
}

fn ritz_pairs(basis: &[CVector], images: &[CVector], take: usize) -> (Vec<f64>, Vec<CVector>) {
    let a = small_projection(basis, images);
    let spec = dense_eigen_full(&a).expect("projected matrix is Hermitian");
    let take = take.min(basis.len());
    let mut vecs = Vec::with_capacity(take);
    for i in 0..take {
        let y = &spec.eigenvectors[i];
        let mut x = CVector::zeros(basis[0].len());
        for (j, b) in basis.iter().enumerate() {
            x += b.scale_complex(y[j]);
        }
        let nrm = x.norm();
        x = x.unscale(nrm);
        fix_phase(&mut x);
        vecs.push(x);
    }
    (spec.eigenvalues[..take].to_vec(), vecs)
}

fn ritz_converged(
    op: &Operator,
    basis: &[CVector],
    images: &[CVector],
    k: usize,
    matvecs: &mut usize,
) -> Result<Option<Spectrum>> {
    if basis.len() < k {
        return Ok(None);
    }
    let (vals, vecs) = ritz_pairs(basis, images, k);
    let scale = vals.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1.0);
    for i in 0..k {
        let r = (op.apply(&vecs[i]) - vecs[i].scale(vals[i])).norm();
        *matvecs += 1;
        if r > RESIDUAL_TOL * scale {
            return Ok(None);
        }
    }
    Ok(Some(Spectrum { eigenvalues: vals, eigenvectors: vecs }))
}

trait ScaleComplex {
    fn scale_complex(&self, c: C64) -> CVector;
}
impl ScaleComplex for CVector {
    fn scale_complex(&self, c: C64) -> CVector {
        self.map(|x| x * c)
    }
}

/// The (L+1)x(L+1) matrix of the interpolated program restricted to the
/// history line of any single computational input: (1-s)·diag(0,1,…,1) plus
/// s times the tridiagonal second-difference form with ½ corners and -½
/// off-diagonals.
pub fn s0_closed_form(s: f64, l: usize) -> RMatrix {
    let dim = l + 1;
    let mut m = RMatrix::zeros(dim, dim);
    for i in 0..dim {
        let init = if i == 0 { 0.0 } else { 1.0 };
        let fin = if i == 0 || i == l { 0.5 } else { 1.0 };
        m[(i, i)] = (1.0 - s) * init + s * fin;
        if i + 1 < dim {
            m[(i, i + 1)] = -0.5 * s;
            m[(i + 1, i)] = -0.5 * s;
        }
    }
    m
}

/// Promote a real symmetric matrix to a complex one.
pub fn complexify(m: &RMatrix) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| cr(m[(i, j)]))
}

/// Columns γ_ℓ^j = (U_ℓ…U_1|j⟩) ⊗ |1^ℓ 0^(L-ℓ)⟩ for ℓ = 0..L: the history
/// line of computational input j, an orthonormal (L+1)-frame.
pub fn history_basis(circuit: &Circuit, j: usize) -> Result<CMatrix> {
    let (n, l) = (circuit.n, circuit.len());
    ensure!(n + l <= 20, "history basis dense only up to 20 qubits");
    let trace = circuit.simulate_from(j);
    let dim = 1usize << (n + l);
    let mut basis = CMatrix::zeros(dim, l + 1);
    for ell in 0..=l {
        let clock = unary_clock_index(ell, l);
        let alpha = &trace.states[ell];
        for z in 0..(1usize << n) {
            basis[(z * (1 << l) + clock, ell)] = alpha[z];
        }
    }
    Ok(basis)
}

/// A Hermitian operator compressed to an orthonormal frame B: the pair
/// (B, B†HB).
#[derive(Debug, Clone)]
pub struct RestrictedOperator {
    pub basis: CMatrix,
    pub matrix: CMatrix,
}

/// B†HB, after checking B is an orthonormal frame and the compression stays
/// Hermitian.
pub fn restrict(op: &Operator, basis: &CMatrix) -> Result<RestrictedOperator> {
    ensure!(
        op.dim() == basis.nrows(),
        "operator dim {} != basis rows {}",
        op.dim(),
        basis.nrows()
    );
    let defect = orthonormality_defect(basis);
    ensure!(defect <= 1e-10, "basis not orthonormal (defect {:.3e})", defect);
    let hb = apply_columns(op, basis);
    let small = basis.adjoint() * &hb;
    let scale = small.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let hd = hermiticity_defect(&small);
    if hd > 1e-9 * scale {
        return Err(Error::numerical(format!(
            "restriction lost hermiticity (defect {:.3e})",
            hd
        )));
    }
    Ok(RestrictedOperator {
        basis: basis.clone(),
        matrix: (&small + small.adjoint()).scale(0.5),
    })
}

fn apply_columns(op: &Operator, basis: &CMatrix) -> CMatrix {
    let mut hb = CMatrix::zeros(basis.nrows(), basis.ncols());
    for c in 0..basis.ncols() {
        let col: CVector = basis.column(c).into_owned();
        hb.set_column(c, &op.apply(&col));
    }
    hb
}

/// Spectral norm of HB - B(B†HB): zero exactly when span(B) is H-invariant.
pub fn invariance_residual(op: &Operator, basis: &CMatrix) -> f64 {
    let hb = apply_columns(op, basis);
    let small = basis.adjoint() * &hb;
    spectral_norm(&(&hb - basis * &small))
}

/// The interpolated Hamiltonian at s, split over the history lines of every
/// computational input, with the largest cross-line matrix element recorded.
pub struct BlockDecomposition {
    pub blocks: Vec<RestrictedOperator>,
    pub cross_defect: f64,
}

pub fn block_decompose(
    program: &AdiabaticProgram,
    circuit: &Circuit,
    s: f64,
) -> Result<BlockDecomposition> {
    ensure!(
        matches!(program.flavor, Flavor::FiveLocal | Flavor::ThreeLocal),
        "block decomposition over history lines applies to the qubit flavors"
    );
    ensure!(circuit.n == program.n, "circuit/program qubit count mismatch");
    let h = program.at(s)?;
    let op = Operator::Sum(&h);
    let mut blocks = Vec::new();
    let mut col_images: Vec<CMatrix> = Vec::new();
    let mut bases: Vec<CMatrix> = Vec::new();
    for j in 0..(1usize << program.n) {
        let basis = history_basis(circuit, j)?;
        blocks.push(restrict(&op, &basis)?);
        col_images.push(apply_columns(&op, &basis));
        bases.push(basis);
    }
    let mut cross = 0.0f64;
    for j in 0..bases.len() {
        for jp in 0..bases.len() {
            if j == jp {
                continue;
            }
            let off = bases[j].adjoint() * &col_images[jp];
            cross = cross.max(off.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    Ok(BlockDecomposition { blocks, cross_defect: cross })
}

// ---------------------------------------------------------------------------
// Markov chain from a nonnegative ground state
// ---------------------------------------------------------------------------

/// The reversible chain P_ij = α_j G_ij / (μ α_i) built from G = I - H and
/// the Perron ground pair (λ0, α) of H, with stationary law π_i = α_i²/Σα².
#[derive(Debug, Clone)]
pub struct MarkovChain {
    pub p: RMatrix,
    pub pi: RVector,
    pub alpha: RVector,
    pub mu: f64,
    pub lambda0: f64,
    /// λ1 - λ0 of the Hamiltonian the chain came from.
    pub gap_h: f64,
}

impl MarkovChain {
    pub fn dim(&self) -> usize {
        self.pi.len()
    }

    /// Spectral gap of P; equals gap_h / μ by the similarity transform.
    pub fn gap(&self) -> f64 {
        self.gap_h / self.mu
    }
}

fn primitive(adj: &[Vec<bool>]) -> bool {
    let d = adj.len();
    let wielandt = (d - 1) * (d - 1) + 1;
    let mut m = adj.to_vec();
    for _ in 0..wielandt {
        if m.iter().all(|row| row.iter().all(|&x| x)) {
            return true;
        }
        let mut next = vec![vec![false; d]; d];
        for i in 0..d {
            for l in 0..d {
                if m[i][l] {
                    for (j, nx) in next[i].iter_mut().enumerate() {
                        *nx = *nx || adj[l][j];
                    }
                }
            }
        }
        m = next;
    }
    m.iter().all(|row| row.iter().all(|&x| x))
}

/// Build the ground-state chain of a real symmetric H with G = I - H
/// entrywise nonnegative and primitive. Rejects reducible or imprimitive
/// G (e.g. the s = 0 endpoint, whose G is diagonal).
pub fn perron_chain(h: &RMatrix) -> Result<MarkovChain> {
    ensure!(h.nrows() == h.ncols(), "matrix must be square");
    let d = h.nrows();
    ensure!(d >= 2, "chain needs dimension >= 2");
    let sym_defect = (h - h.transpose()).iter().map(|x| x.abs()).fold(0.0, f64::max);
    ensure!(sym_defect <= 1e-12, "matrix must be symmetric");

    let mut g = RMatrix::identity(d, d) - h;
    let mut adj = vec![vec![false; d]; d];
    for i in 0..d {
        for j in 0..d {
            let e = g[(i, j)];
            ensure!(
                e >= -1e-12,
                "G = I - H has a negative entry {:.3e} at ({}, {})",
                e,
                i,
                j
            );
            if e < 0.0 {
                g[(i, j)] = 0.0;
            }
            adj[i][j] = g[(i, j)] > 0.0;
        }
    }
    ensure!(
        primitive(&adj),
        "G = I - H is not primitive; the chain is not ergodic"
    );

    let se = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let lambda0 = se.eigenvalues[order[0]];
    let lambda1 = se.eigenvalues[order[1]];
    let mut alpha: RVector = se.eigenvectors.column(order[0]).into_owned();
    let lead = alpha.iter().cloned().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
    if lead < 0.0 {
        alpha = -alpha;
    }
    let min_entry = alpha.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_entry <= 0.0 {
        return Err(Error::numerical(format!(
            "Perron vector not strictly positive (min entry {:.3e})",
            min_entry
        )));
    }
    // The eigensolver only delivers absolute accuracy, which ruins the
    // relative accuracy of a fast-decaying tail (and the row sums of P
    // measure exactly that componentwise residual). Power iteration on the
    // nonnegative G involves no cancellation, so polish alpha with it.
    for _ in 0..40 * d + 400 {
        let next = (&g * &alpha).normalize();
        let rel = alpha
            .iter()
            .zip(next.iter())
            .map(|(a, b)| ((b - a) / b).abs())
            .fold(0.0f64, f64::max);
        alpha = next;
        if rel < 5e-16 {
            break;
        }
    }
    let mu = 1.0 - lambda0;
    ensure!(mu > 1e-12, "1 - λ0 = {:.3e} is not positive", mu);

    let mut p = RMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            p[(i, j)] = alpha[j] * g[(i, j)] / (mu * alpha[i]);
        }
    }
    let z: f64 = alpha.iter().map(|a| a * a).sum();
    let pi = RVector::from_fn(d, |i, _| alpha[i] * alpha[i] / z);

    for i in 0..d {
        let row: f64 = p.row(i).iter().sum();
        if (row - 1.0).abs() > 1e-10 {
            return Err(Error::numerical(format!(
                "row {} of P sums to {} instead of 1",
                i, row
            )));
        }
    }
    let balance = (p.transpose() * &pi - &pi).abs().max();
    if balance > 1e-10 {
        return Err(Error::numerical(format!(
            "πP = π fails by {:.3e}",
            balance
        )));
    }

    Ok(MarkovChain { p, pi, alpha, mu, lambda0, gap_h: lambda1 - lambda0 })
}

/// Conductance of a chain: the minimum over subsets B with π(B) ≤ ½ of the
/// escaping flow F(B)/π(B). Serializes to exactly the keys
/// {phi, witness_B, flow, bound}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConductanceReport {
    pub phi: f64,
    #[serde(rename = "witness_B")]
    pub witness: Vec<usize>,
    pub flow: f64,
    /// Cheeger lower bound φ²/2 on the chain gap.
    pub bound: f64,
    #[serde(skip)]
    pub exhaustive: bool,
}

fn subset_ratio(chain: &MarkovChain, members: &[usize]) -> Option<(f64, f64)> {
    let pi_b: f64 = members.iter().map(|&i| chain.pi[i]).sum();
    if pi_b <= 0.0 || pi_b > 0.5 + 1e-15 {
        return None;
    }
    let d = chain.dim();
    let in_b = {
        let mut v = vec![false; d];
        for &i in members {
            v[i] = true;
        }
        v
    };
    let mut flow = 0.0;
    for &i in members {
        for j in 0..d {
            if !in_b[j] {
                flow += chain.pi[i] * chain.p[(i, j)];
            }
        }
    }
    Some((flow, pi_b))
}

/// Exhaustive conductance over all 2^d - 2 cuts; feasible up to d = 22.
pub fn conductance(chain: &MarkovChain) -> Result<ConductanceReport> {
    let d = chain.dim();
    ensure!(d <= 22, "exhaustive conductance is capped at dimension 22");
    let best = (1u64..((1u64 << d) - 1))
        .into_par_iter()
        .filter_map(|mask| {
            let members: Vec<usize> = (0..d).filter(|&i| mask >> i & 1 == 1).collect();
            subset_ratio(chain, &members).map(|(flow, pi_b)| (flow / pi_b, mask, flow))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (phi, mask, flow) =
        best.ok_or_else(|| Error::numerical("no admissible cut found".to_string()))?;
    Ok(ConductanceReport {
        phi,
        witness: (0..d).filter(|&i| mask >> i & 1 == 1).collect(),
        flow,
        bound: 0.5 * phi * phi,
        exhaustive: true,
    })
}

/// Conductance restricted to prefix cuts {0..m}; an upper bound on φ that is
/// exact for the monotone history chain's minimizing family.
pub fn conductance_prefix(chain: &MarkovChain) -> Result<ConductanceReport> {
    let d = chain.dim();
    let mut best: Option<(f64, usize, f64)> = None;
    for m in 0..d - 1 {
        let members: Vec<usize> = (0..=m).collect();
        if let Some((flow, pi_b)) = subset_ratio(chain, &members) {
            let ratio = flow / pi_b;
            if best.map(|(r, _, _)| ratio < r).unwrap_or(true) {
                best = Some((ratio, m, flow));
            }
        }
    }
    let (phi, m, flow) =
        best.ok_or_else(|| Error::numerical("no admissible prefix cut".to_string()))?;
    Ok(ConductanceReport {
        phi,
        witness: (0..=m).collect(),
        flow,
        bound: 0.5 * phi * phi,
        exhaustive: false,
    })
}

/// True when v is entrywise non-increasing up to tol.
pub fn check_monotone(v: &RVector, tol: f64) -> bool {
    v.iter().zip(v.iter().skip(1)).all(|(a, b)| *b <= *a + tol)
}

// ---------------------------------------------------------------------------
// Gerschgorin discs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct GerschgorinDisc {
    pub center: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GerschgorinComponent {
    pub lo: f64,
    pub hi: f64,
    /// Number of discs merged into this component; equals the number of
    /// eigenvalues it contains.
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GerschgorinReport {
    pub discs: Vec<GerschgorinDisc>,
    pub components: Vec<GerschgorinComponent>,
}

/// Gerschgorin discs of a real matrix and their merged connected components.
pub fn gerschgorin(m: &RMatrix) -> Result<GerschgorinReport> {
    ensure!(m.nrows() == m.ncols(), "matrix must be square");
    let d = m.nrows();
    let mut discs = Vec::with_capacity(d);
    for i in 0..d {
        let radius: f64 = (0..d).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
        discs.push(GerschgorinDisc { center: m[(i, i)], radius });
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        (discs[a].center - discs[a].radius).total_cmp(&(discs[b].center - discs[b].radius))
    });
    let mut components: Vec<GerschgorinComponent> = Vec::new();
    for &i in &order {
        let (lo, hi) = (discs[i].center - discs[i].radius, discs[i].center + discs[i].radius);
        match components.last_mut() {
            Some(c) if lo <= c.hi + 1e-15 => {
                c.hi = c.hi.max(hi);
                c.count += 1;
            }
            _ => components.push(GerschgorinComponent { lo, hi, count: 1 }),
        }
    }
    Ok(GerschgorinReport { discs, components })
}

// ---------------------------------------------------------------------------
// Leak certificate for penalty constructions
// ---------------------------------------------------------------------------

/// Numerical witness for the penalty lemma: with H = H1 + H2, where H2 has
/// kernel spanned by B and acts as ≥ J on the complement, the low spectrum
/// of H tracks the spectrum of B†H1B within shift = K²/(J-2K), and the two
/// ground states overlap accordingly.
#[derive(Debug, Clone, Serialize)]
pub struct LeakReport {
    pub a: f64,
    pub b: f64,
    pub a_prime: f64,
    pub b_prime: f64,
    pub k_norm: f64,
    pub j: f64,
    pub shift: f64,
    pub overlap_sq: f64,
    pub overlap_bound: f64,
}

impl LeakReport {
    /// Do the four certified inequalities hold, up to slack?
    pub fn holds(&self, slack: f64) -> bool {
        self.a_prime >= self.a - self.shift - slack
            && self.a_prime <= self.a + slack
            && self.b_prime >= self.b - self.shift - slack
            && self.overlap_sq >= self.overlap_bound - slack
    }
}

pub fn leak_certify(h1: &CMatrix, basis: &CMatrix, h2: &CMatrix, j: f64) -> Result<LeakReport> {
    let dim = h1.nrows();
    ensure!(h2.nrows() == dim && basis.nrows() == dim, "dimension mismatch");
    let m = basis.ncols();
    ensure!(m >= 2 && m < dim, "kernel frame must have 2 <= columns < dim");
    let od = orthonormality_defect(basis);
    ensure!(od <= 1e-10, "kernel frame not orthonormal (defect {:.3e})", od);
    let kernel_defect = spectral_norm(&(h2 * basis));
    ensure!(
        kernel_defect <= 1e-9 * j.max(1.0),
        "B does not span ker(H2): ‖H2·B‖ = {:.3e}",
        kernel_defect
    );
    let h2_spec = dense_eigen_full(h2)?;
    let zeros = h2_spec
        .eigenvalues
        .iter()
        .filter(|&&x| x.abs() <= 1e-6 * j.max(1.0))
        .count();
    ensure!(
        zeros == m,
        "ker(H2) has dimension {} but the frame has {} columns",
        zeros,
        m
    );
    let floor = h2_spec.eigenvalues[m];
    ensure!(
        floor >= j * (1.0 - 1e-9),
        "H2 acts as {:.6e} < J = {:.6e} on the complement",
        floor,
        j
    );

    let k_norm = spectral_norm(h1);
    ensure!(
        j > 2.0 * k_norm,
        "penalty J = {:.3e} must exceed 2‖H1‖ = {:.3e}",
        j,
        2.0 * k_norm
    );
    let shift = k_norm * k_norm / (j - 2.0 * k_norm);

    let restricted = restrict(&Operator::Dense(h1), basis)?;
    let small = dense_eigen_full(&restricted.matrix)?;
    let (a, b) = (small.eigenvalues[0], small.eigenvalues[1]);
    let xi_embedded = &restricted.basis * small.ground();

    let full = dense_eigen_full(&(h1 + h2))?;
    let (a_prime, b_prime) = (full.eigenvalues[0], full.eigenvalues[1]);
    let overlap_sq = xi_embedded.dotc(full.ground()).norm_sqr();
    let overlap_bound = 1.0 - k_norm * k_norm / ((b - a) * (j - 2.0 * k_norm));

    Ok(LeakReport {
        a,
        b,
        a_prime,
        b_prime,
        k_norm,
        j,
        shift,
        overlap_sq,
        overlap_bound,
    })
}

/// Leak certificate with H2 = J·(I - BB†), the pure projector penalty.
pub fn leak_certify_projector(h1: &CMatrix, basis: &CMatrix, j: f64) -> Result<LeakReport> {
    let dim = h1.nrows();
    let proj = CMatrix::identity(dim, dim) - basis * basis.adjoint();
    leak_certify(h1, basis, &proj.scale(j), j)
}

// ---------------------------------------------------------------------------
// Angle certificate
// ---------------------------------------------------------------------------

/// Numerical witness for the geometric bound
/// λ0(H1 + H2) ≥ a1 + a2 + Λ·(1 - cos θ), where θ is the principal angle
/// between the two ground spaces and Λ lower-bounds both spectral splittings.
#[derive(Debug, Clone, Serialize)]
pub struct AngleReport {
    pub a1: f64,
    pub a2: f64,
    pub lambda: f64,
    pub cos_theta: f64,
    pub bound: f64,
    pub actual: f64,
}

impl AngleReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.actual >= self.bound - slack
    }
}

fn ground_frame(spec: &Spectrum) -> Result<(f64, f64, CMatrix)> {
    let a = spec.eigenvalues[0];
    let cluster = spec
        .eigenvalues
        .iter()
        .take_while(|&&x| x <= a + DEGENERACY_TOL)
        .count();
    ensure!(
        cluster < spec.eigenvalues.len(),
        "operator has no spectral splitting above its ground space"
    );
    let split = spec.eigenvalues[cluster] - a;
    let dim = spec.eigenvectors[0].len();
    let mut frame = CMatrix::zeros(dim, cluster);
    for c in 0..cluster {
        frame.set_column(c, &spec.eigenvectors[c]);
    }
    Ok((a, split, frame))
}

pub fn angle_certify(h1: &CMatrix, h2: &CMatrix, lambda: Option<f64>) -> Result<AngleReport> {
    ensure!(h1.nrows() == h2.nrows(), "dimension mismatch");
    let s1 = dense_eigen_full(h1)?;
    let s2 = dense_eigen_full(h2)?;
    let (a1, split1, b1) = ground_frame(&s1)?;
    let (a2, split2, b2) = ground_frame(&s2)?;
    let lambda = match lambda {
        Some(v) => {
            ensure!(v > 0.0, "Λ must be positive");
            ensure!(
                v <= split1 + 1e-12 && v <= split2 + 1e-12,
                "Λ = {:.6e} exceeds a splitting ({:.6e}, {:.6e})",
                v,
                split1,
                split2
            );
            v
        }
        None => split1.min(split2),
    };
    let overlap = b1.adjoint() * b2;
    let cos_theta = spectral_norm(&overlap).min(1.0);
    let bound = a1 + a2 + lambda * (1.0 - cos_theta);
    let actual = dense_eigen_full(&(h1 + h2))?.eigenvalues[0];
    Ok(AngleReport { a1, a2, lambda, cos_theta, bound, actual })
}

// ---------------------------------------------------------------------------
// Gap profiles
// ---------------------------------------------------------------------------

/// Which operator the (λ0, λ1) profile is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GapMode {
    /// The full interpolated Hamiltonian.
    Full,
    /// Its principal submatrix on the legal product basis
    /// (computational state ⊗ legal clock configuration).
    LegalProducts,
    /// The closed-form (L+1)-dimensional history chain.
    HistoryChain,
}

impl GapMode {
    pub fn parse(s: &str) -> Result<GapMode> {
        match s {
            "full" => Ok(GapMode::Full),
            "S" => Ok(GapMode::LegalProducts),
            "S0" => Ok(GapMode::HistoryChain),
            other => Err(Error::validation(format!(
                "unknown gap mode '{}'; expected full, S, or S0",
                other
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapSample {
    pub s: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapProfile {
    pub mode: GapMode,
    pub samples: Vec<GapSample>,
}

impl GapProfile {
    pub fn min_gap(&self) -> f64 {
        self.samples.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min)
    }

    /// CSV with 17 significant digits per field.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,lambda0,lambda1,gap\n");
        for r in &self.samples {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.s, r.lambda0, r.lambda1, r.gap
            ));
        }
        out
    }
}

/// Uniform grid of m points on [0, 1].
pub fn sample_grid(m: usize) -> Vec<f64> {
    assert!(m >= 2);
    (0..m).map(|i| i as f64 / (m - 1) as f64).collect()
}

fn legal_product_indices(program: &AdiabaticProgram) -> Result<Vec<usize>> {
    match program.flavor {
        Flavor::FiveLocal | Flavor::ThreeLocal => {
            let (n, l) = (program.n, program.l);
            let mut idx = Vec::with_capacity((l + 1) << n);
            for z in 0..(1usize << n) {
                for ell in 0..=l {
                    idx.push(z * (1 << l) + unary_clock_index(ell, l));
                }
            }
            idx.sort_unstable();
            Ok(idx)
        }
        Flavor::Grid => crate::grid::legal_product_indices_for(program),
    }
}

fn principal_submatrix(sp: &SparseHermitian, indices: &[usize]) -> CMatrix {
    let mut pos = vec![usize::MAX; sp.dim];
    for (p, &i) in indices.iter().enumerate() {
        pos[i] = p;
    }
    let mut m = CMatrix::zeros(indices.len(), indices.len());
    for (p, &i) in indices.iter().enumerate() {
        for (col, val) in sp.row_entries(i) {
            let q = pos[col];
            if q != usize::MAX {
                m[(p, q)] = val;
            }
        }
    }
    m
}

/// λ0, λ1 of the chosen operator across the interpolation samples.
pub fn gap_profile(
    program: &AdiabaticProgram,
    mode: GapMode,
    svals: &[f64],
) -> Result<GapProfile> {
    ensure!(!svals.is_empty(), "need at least one sample point");
    for &s in svals {
        ensure!((0.0..=1.0).contains(&s), "sample {} outside [0, 1]", s);
    }
    let samples: Result<Vec<GapSample>> = svals
        .par_iter()
        .map(|&s| -> Result<GapSample> {
            let (lambda0, lambda1) = match mode {
                GapMode::HistoryChain => {
                    let spec = dense_eigen_full(&complexify(&s0_closed_form(s, program.l)))?;
                    (spec.eigenvalues[0], spec.eigenvalues[1])
                }
                GapMode::LegalProducts => {
                    let idx = legal_product_indices(program)?;
                    let sp = program.at(s)?.assemble()?;
                    let spec = dense_eigen_full(&principal_submatrix(&sp, &idx))?;
                    (spec.eigenvalues[0], spec.eigenvalues[1])
                }
                GapMode::Full => {
                    let h = program.at(s)?;
                    let spec = if h.dim() <= DENSE_EIGEN_CAP {
                        eigen_low(&Operator::Sum(&h), 2)?
                    } else {
                        let sp = h.assemble()?;
                        eigen_low(&Operator::Sparse(&sp), 2)?
                    };
                    (spec.eigenvalues[0], spec.eigenvalues[1])
                }
            };
            Ok(GapSample { s, lambda0, lambda1, gap: lambda1 - lambda0 })
        })
        .collect();
    Ok(GapProfile { mode, samples: samples? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::five_local::build_5local;
    use crate::linalg::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn bell() -> Circuit {
        Circuit::new(2, vec![Gate::h(0), Gate::cnot(0, 1)]).unwrap()
    }

    #[test]
    fn dense_eigen_matches_known_spectrum() {
        // closed form at s = 1, L = 2: eigenvalues {0, 1/2, 3/2}
        let spec = dense_eigen_full(&complexify(&s0_closed_form(1.0, 2))).unwrap();
        assert!((spec.eigenvalues[0]).abs() < 1e-12);
        assert!((spec.eigenvalues[1] - 0.5).abs() < 1e-12);
        assert!((spec.eigenvalues[2] - 1.5).abs() < 1e-12);
        // ground state is uniform
        let g = spec.ground();
        for i in 0..3 {
            assert!((g[i] - cr(1.0 / 3f64.sqrt())).norm() < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_history_restriction() {
        // B† H(s) B over the j = 0 history line equals the closed form
        let c = bell();
        let prog = build_5local(&c).unwrap();
        let basis = history_basis(&c, 0).unwrap();
        for &s in &[0.0, 0.3, 0.7, 1.0] {
            let h = prog.at(s).unwrap();
            let r = restrict(&Operator::Sum(&h), &basis).unwrap();
            let closed = complexify(&s0_closed_form(s, prog.l));
            assert!(
                (r.matrix.clone() - closed).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12,
                "restriction mismatch at s = {}",
                s
            );
            // and the line is invariant
            assert!(invariance_residual(&Operator::Sum(&h), &basis) < 1e-12);
        }
    }

    #[test]
    fn history_restriction_with_nonzero_input_adds_hamming_weight() {
        // j = 0b01 on the Bell circuit: the input penalty fires only at
        // clock 0 and sits in both endpoint Hamiltonians, so the j = 1 line
        // sees a constant diag(popcount(j), 0, 0) on top of the closed form
        let c = bell();
        let prog = build_5local(&c).unwrap();
        let basis = history_basis(&c, 1).unwrap();
        let h = prog.at(0.4).unwrap();
        let r = restrict(&Operator::Sum(&h), &basis).unwrap();
        let mut expected = complexify(&s0_closed_form(0.4, 2));
        expected[(0, 0)] += cr(1.0);
        let diff = (r.matrix.clone() - expected)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12, "defect {}", diff);
    }

    #[test]
    fn cross_blocks_vanish_and_full_spectrum_is_block_union() {
        let c = bell();
        let prog = build_5local(&c).unwrap();
        let dec = block_decompose(&prog, &c, 0.5).unwrap();
        assert_eq!(dec.blocks.len(), 4);
        assert!(dec.cross_defect < 1e-12);
    }

    #[test]
    fn krylov_agrees_with_dense() {
        // force the Krylov path on a mid-size sparse operator
        let c = bell().pad_identities(1.0).unwrap(); // n + L = 6, dim 64
        let prog = build_5local(&c).unwrap();
        let h = prog.at(0.5).unwrap();
        let sp = h.assemble().unwrap();
        let dense = eigen_low(&Operator::Sparse(&sp), 3).unwrap();
        let kry = krylov_lowest(&Operator::Sparse(&sp), 3).unwrap();
        for i in 0..3 {
            assert!(
                (dense.eigenvalues[i] - kry.eigenvalues[i]).abs() < 1e-8,
                "eigenvalue {} dense {} krylov {}",
                i,
                dense.eigenvalues[i],
                kry.eigenvalues[i]
            );
        }
    }

    #[test]
    fn krylov_resolves_double_degeneracy() {
        // diag(0, 0, 1, 2, ...) embedded at dim 48: λ0 = λ1 = 0
        let d = 48;
        let m = CMatrix::from_fn(d, d, |i, j| {
            if i == j && i >= 2 {
                cr((i - 1) as f64)
            } else {
                cr(0.0)
            }
        });
        let spec = krylov_lowest(&Operator::Dense(&m), 2).unwrap();
        assert!(spec.eigenvalues[0].abs() < 1e-9);
        assert!(spec.eigenvalues[1].abs() < 1e-9);
    }

    #[test]
    fn perron_chain_identities() {
        let h = s0_closed_form(0.5, 6);
        let chain = perron_chain(&h).unwrap();
        // rows sum to one, stationary law is reproduced, similarity gap identity
        for i in 0..chain.dim() {
            let row: f64 = chain.p.row(i).iter().sum();
            assert!((row - 1.0).abs() < 1e-12);
        }
        let drift = (chain.p.transpose() * &chain.pi - &chain.pi).abs().max();
        assert!(drift < 1e-12);
        assert!((chain.gap() * chain.mu - chain.gap_h).abs() < 1e-12);
    }

    #[test]
    fn perron_chain_rejects_s_zero() {
        let h = s0_closed_form(0.0, 4);
        assert!(perron_chain(&h).is_err());
    }

    #[test]
    fn conductance_exact_small_chain() {
        // L = 2, s = 1: α uniform, π uniform; the cut {0} has flow
        // π_0 P_01 = (1/3)·(1/2)/(1/2)·... worked out: P_01 = 1/2, φ({0}) = 1/2
        let chain = perron_chain(&s0_closed_form(1.0, 2)).unwrap();
        let report = conductance(&chain).unwrap();
        assert!((report.phi - 0.5).abs() < 1e-9);
        assert_eq!(report.witness, vec![0]);
        assert!((report.flow - 1.0 / 6.0).abs() < 1e-9);
        assert!((report.bound - 0.125).abs() < 1e-9);
        // prefix scan agrees here
        let prefix = conductance_prefix(&chain).unwrap();
        assert!((prefix.phi - report.phi).abs() < 1e-12);
    }

    #[test]
    fn conductance_cheeger_is_sound() {
        for l in [3usize, 5, 8] {
            for &s in &[0.4, 0.8, 1.0] {
                let chain = perron_chain(&s0_closed_form(s, l)).unwrap();
                let report = conductance(&chain).unwrap();
                assert!(
                    chain.gap() >= report.bound - 1e-12,
                    "Cheeger violated at L = {}, s = {}",
                    l,
                    s
                );
                assert!(report.phi <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn monotone_ground_state() {
        for &s in &[0.2, 0.5, 0.9, 1.0] {
            let spec = dense_eigen_full(&complexify(&s0_closed_form(s, 10))).unwrap();
            let alpha = RVector::from_fn(11, |i, _| spec.ground()[i].re);
            let alpha = if alpha[0] < 0.0 { -alpha } else { alpha };
            assert!(check_monotone(&alpha, 1e-9), "not monotone at s = {}", s);
        }
    }

    #[test]
    fn gerschgorin_splits_early_interpolation() {
        // s < 1/3: one zero-centred disc of radius s, the rest inside [1-s, 1+s]
        let rep = gerschgorin(&s0_closed_form(0.25, 8)).unwrap();
        assert_eq!(rep.components.len(), 2);
        assert_eq!(rep.components[0].count, 1);
        assert_eq!(rep.components[1].count, 8);
        assert!(rep.components[0].hi < rep.components[1].lo);
        // the separation implies gap ≥ (1-s) - s = 1/2 here
        assert!(rep.components[1].lo - rep.components[0].hi >= 0.5 - 1e-12);
    }

    #[test]
    fn gerschgorin_merges_at_large_s() {
        let rep = gerschgorin(&s0_closed_form(0.8, 8)).unwrap();
        assert_eq!(rep.components.len(), 1);
        assert_eq!(rep.components[0].count, 9);
    }

    #[test]
    fn leak_certificate_random_instances() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for trial in 0..10 {
            let dim = 12 + 2 * (trial % 4);
            let m = 3 + trial % 3;
            let h1 = random_hermitian(dim, &mut rng);
            // random orthonormal frame from a unitary
            let u = crate::linalg::random_unitary(dim, &mut rng);
            let basis = u.columns(0, m).into_owned();
            let j = 40.0 + 10.0 * trial as f64;
            let rep = leak_certify_projector(&h1, &basis, j).unwrap();
            assert!(rep.holds(1e-9), "trial {trial}: {rep:?}");
        }
    }

    #[test]
    fn leak_rejects_weak_penalty() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let h1 = random_hermitian(8, &mut rng).scale(5.0);
        let u = crate::linalg::random_unitary(8, &mut rng);
        let basis = u.columns(0, 3).into_owned();
        // J below 2‖H1‖ must be refused
        assert!(leak_certify_projector(&h1, &basis, 1.0).is_err());
    }

    #[test]
    fn angle_certificate_worked_instance() {
        // H1 = diag(0, 1), H2 = |-⟩⟨-|, Λ = 1: bound = actual = 1 - √2/2
        let h1 = CMatrix::from_diagonal(&CVector::from_vec(vec![cr(0.0), cr(1.0)]));
        let mut h2 = CMatrix::zeros(2, 2);
        h2[(0, 0)] = cr(0.5);
        h2[(0, 1)] = cr(-0.5);
        h2[(1, 0)] = cr(-0.5);
        h2[(1, 1)] = cr(0.5);
        let rep = angle_certify(&h1, &h2, Some(1.0)).unwrap();
        let expected = 1.0 - 0.5 * 2f64.sqrt();
        assert!((rep.bound - expected).abs() < 1e-12);
        assert!((rep.actual - expected).abs() < 1e-12);
        assert!((rep.cos_theta - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(rep.holds(1e-12));
    }

    #[test]
    fn angle_certificate_random_instances() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for trial in 0..10 {
            let dim = 6 + trial % 5;
            let h1 = random_hermitian(dim, &mut rng);
            let h2 = random_hermitian(dim, &mut rng);
            let rep = angle_certify(&h1, &h2, None).unwrap();
            assert!(rep.holds(1e-9), "trial {trial}: {rep:?}");
        }
    }

    #[test]
    fn gap_profile_modes_agree_for_five_local_ground() {
        let prog = build_5local(&bell()).unwrap();
        let svals = vec![0.0, 0.5, 1.0];
        let s0 = gap_profile(&prog, GapMode::HistoryChain, &svals).unwrap();
        let s_products = gap_profile(&prog, GapMode::LegalProducts, &svals).unwrap();
        let full = gap_profile(&prog, GapMode::Full, &svals).unwrap();
        for i in 0..svals.len() {
            // λ0 agrees across all three (ground state lives in S0 ⊂ S ⊂ full)
            assert!((s0.samples[i].lambda0 - full.samples[i].lambda0).abs() < 1e-9);
            assert!((s_products.samples[i].lambda0 - full.samples[i].lambda0).abs() < 1e-9);
            // gaps can only shrink as the space grows
            assert!(full.samples[i].gap <= s_products.samples[i].gap + 1e-9);
            assert!(s_products.samples[i].gap <= s0.samples[i].gap + 1e-9);
        }
    }

    #[test]
    fn gap_csv_shape() {
        let prog = build_5local(&bell()).unwrap();
        let profile = gap_profile(&prog, GapMode::HistoryChain, &sample_grid(3)).unwrap();
        let csv = profile.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "s,lambda0,lambda1,gap");
        assert_eq!(csv.lines().count(), 4);
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 4);
        assert!(first.starts_with("0.0000000000000000e0"));
    }

    #[test]
    fn gap_mode_parsing() {
        assert_eq!(GapMode::parse("full").unwrap(), GapMode::Full);
        assert_eq!(GapMode::parse("S").unwrap(), GapMode::LegalProducts);
        assert_eq!(GapMode::parse("S0").unwrap(), GapMode::HistoryChain);
        assert!(GapMode::parse("s0").is_err());
    }
}
