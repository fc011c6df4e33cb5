//! Small statevector kernel for the brute-force checks.
//!
//! Pauli strings act on a basis index with one XOR and one parity count, so
//! no operator matrix is ever needed to apply them. Dense matrices exist only
//! for exact diagonalization and structural checks on small systems.

use std::fmt;

use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{QetError, Result};
use crate::model::{BLOCK_CAP, ModelParams};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const IM: C64 = C64 { re: 0.0, im: 1.0 };

/// Imaginary residue tolerated in the expectation value of a Hermitian operator.
const IMAG_TOL: f64 = 1e-10;

/// Bit of qubit `q` in a basis index; qubit 0 is the most significant bit.
#[inline]
pub fn qubit_bit(n_qubits: usize, q: usize) -> usize {
    1 << (n_qubits - 1 - q)
}

fn check_size(n_qubits: u64, cap: u64) -> Result<usize> {
    if n_qubits > cap {
        return Err(QetError::OracleCapExceeded { n: n_qubits, cap });
    }
    Ok(n_qubits as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|b>` for basis index `b`.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = ONE;
        Self { n_qubits, amps }
    }

    pub fn zeros(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            amps: vec![ZERO; 1 << n_qubits],
        }
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        let expected = 1usize << n_qubits;
        if amps.len() != expected {
            return Err(QetError::DimensionMismatch {
                expected,
                found: amps.len(),
            });
        }
        Ok(Self { n_qubits, amps })
    }

    /// The analytic ground state `a0 |0...0> + a1 |1...1>`.
    pub fn ground_state(params: &ModelParams, cap: u64) -> Result<Self> {
        let n = check_size(params.n_qubits(), cap)?;
        let g = params.ground_state_amplitudes();
        let mut s = Self::zeros(n);
        let last = s.dim() - 1;
        s.amps[0] = C64::new(g.a_all_zero, 0.0);
        s.amps[last] = C64::new(g.a_all_one, 0.0);
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm and returns the squared norm it had. A zero
    /// vector is left untouched.
    pub fn normalize(&mut self) -> f64 {
        let n2 = self.norm_sqr();
        if n2 > 0.0 {
            let inv = 1.0 / n2.sqrt();
            self.amps.iter_mut().for_each(|a| *a *= inv);
        }
        n2
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn scale(&mut self, factor: C64) {
        self.amps.iter_mut().for_each(|a| *a *= factor);
    }

    /// `self += factor * other`.
    pub fn axpy(&mut self, factor: C64, other: &StateVector) -> Result<()> {
        self.check_same(other)?;
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += factor * b;
        }
        Ok(())
    }

    /// Largest componentwise distance.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn check_same(&self, other: &StateVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(QetError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    fn has_phase(self) -> bool {
        matches!(self, Pauli::Y | Pauli::Z)
    }
}

/// A coefficient times a tensor product of single-qubit Paulis.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    letters: Vec<Pauli>,
    coeff: C64,
}

/// Precomputed action `P|i> = phase * (-1)^{|i & z_mask|} |i ^ x_mask>`.
#[derive(Debug, Clone, Copy)]
struct Action {
    x_mask: usize,
    z_mask: usize,
    phase: C64,
}

impl Action {
    #[inline]
    fn amplitude(&self, i: usize) -> C64 {
        if (i & self.z_mask).count_ones() & 1 == 1 {
            -self.phase
        } else {
            self.phase
        }
    }
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, coeff: C64) -> Self {
        Self { letters, coeff }
    }

    pub fn identity(n_qubits: usize, coeff: f64) -> Self {
        Self::new(vec![Pauli::I; n_qubits], C64::new(coeff, 0.0))
    }

    /// One Pauli on qubit `q`, identity elsewhere.
    pub fn single(n_qubits: usize, q: usize, p: Pauli, coeff: f64) -> Self {
        let mut letters = vec![Pauli::I; n_qubits];
        letters[q] = p;
        Self::new(letters, C64::new(coeff, 0.0))
    }

    /// Parses a word like `"XIZY"`, qubit 0 first.
    pub fn parse(word: &str, coeff: C64) -> Option<Self> {
        let letters = word
            .chars()
            .map(|c| match c {
                'I' => Some(Pauli::I),
                'X' => Some(Pauli::X),
                'Y' => Some(Pauli::Y),
                'Z' => Some(Pauli::Z),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Self::new(letters, coeff))
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn coeff(&self) -> C64 {
        self.coeff
    }

    pub fn with_coeff(mut self, coeff: C64) -> Self {
        self.coeff = coeff;
        self
    }

    fn action(&self) -> Action {
        let n = self.n_qubits();
        let mut x_mask = 0;
        let mut z_mask = 0;
        let mut n_y = 0;
        for (q, &p) in self.letters.iter().enumerate() {
            let bit = qubit_bit(n, q);
            if p.flips() {
                x_mask |= bit;
            }
            if p.has_phase() {
                z_mask |= bit;
            }
            if p == Pauli::Y {
                n_y += 1;
            }
        }
        // Y = i X Z, so every Y contributes a factor i
        let phase = self.coeff * IM.powu(n_y % 4);
        Action {
            x_mask,
            z_mask,
            phase,
        }
    }

    fn check_len(&self, state: &StateVector) -> Result<()> {
        if self.n_qubits() != state.n_qubits() {
            return Err(QetError::DimensionMismatch {
                expected: 1 << self.n_qubits(),
                found: state.dim(),
            });
        }
        Ok(())
    }

    /// `out += scale * P input`.
    fn accumulate(&self, input: &[C64], out: &mut [C64], scale: C64) {
        let act = self.action();
        for (i, &a) in input.iter().enumerate() {
            out[i ^ act.x_mask] += scale * act.amplitude(i) * a;
        }
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.check_len(state)?;
        let mut out = StateVector::zeros(state.n_qubits());
        self.accumulate(&state.amps, &mut out.amps, ONE);
        Ok(out)
    }

    /// `<psi|P|psi>` without forming `P|psi>`.
    pub fn expectation_complex(&self, state: &StateVector) -> Result<C64> {
        self.check_len(state)?;
        let act = self.action();
        let amps = &state.amps;
        Ok(amps
            .iter()
            .enumerate()
            .map(|(i, &a)| amps[i ^ act.x_mask].conj() * act.amplitude(i) * a)
            .sum())
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        let mut coeff = self.coeff * other.coeff;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (p, phase) = single_product(a, b);
                coeff *= phase;
                p
            })
            .collect();
        PauliString { letters, coeff }
    }
}

fn single_product(a: Pauli, b: Pauli) -> (Pauli, C64) {
    use Pauli::*;
    match (a, b) {
        (I, p) | (p, I) => (p, ONE),
        (X, X) | (Y, Y) | (Z, Z) => (I, ONE),
        (X, Y) => (Z, IM),
        (Y, X) => (Z, -IM),
        (Y, Z) => (X, IM),
        (Z, Y) => (X, -IM),
        (Z, X) => (Y, IM),
        (X, Z) => (Y, -IM),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) ", self.coeff)?;
        for p in &self.letters {
            write!(f, "{p:?}")?;
        }
        Ok(())
    }
}

/// Anything that can act on a statevector.
pub trait Observable {
    fn n_qubits(&self) -> usize;

    fn apply(&self, state: &StateVector) -> Result<StateVector>;

    /// `<psi|O|psi>` as a complex number.
    fn expectation_complex(&self, state: &StateVector) -> Result<C64> {
        state.inner(&self.apply(state)?)
    }

    /// Real part of `<psi|O|psi>`; a non-negligible imaginary part means the
    /// operator was not Hermitian.
    fn expectation(&self, state: &StateVector) -> Result<f64> {
        let z = self.expectation_complex(state)?;
        if z.im.abs() > IMAG_TOL * z.re.abs().max(1.0) {
            return Err(QetError::NonHermitian(z.im.abs()));
        }
        Ok(z.re)
    }
}

impl Observable for PauliString {
    fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    fn apply(&self, state: &StateVector) -> Result<StateVector> {
        PauliString::apply(self, state)
    }

    fn expectation_complex(&self, state: &StateVector) -> Result<C64> {
        PauliString::expectation_complex(self, state)
    }
}

/// Sum of Pauli strings on a common register.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(n_qubits: usize, terms: Vec<PauliString>) -> Self {
        assert!(terms.iter().all(|t| t.n_qubits() == n_qubits));
        Self { n_qubits, terms }
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn push(&mut self, term: PauliString) {
        assert_eq!(term.n_qubits(), self.n_qubits);
        self.terms.push(term);
    }

    pub fn extend(&mut self, other: &PauliSum) {
        self.terms.extend(other.terms.iter().cloned());
    }

    pub fn scaled(&self, factor: C64) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| t.clone().with_coeff(t.coeff * factor))
                .collect(),
        }
    }

    /// `out += scale * (sum) input`.
    fn accumulate(&self, input: &[C64], out: &mut [C64], scale: C64) {
        for t in &self.terms {
            t.accumulate(input, out, scale);
        }
    }
}

impl Observable for PauliSum {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.n_qubits() != self.n_qubits {
            return Err(QetError::DimensionMismatch {
                expected: 1 << self.n_qubits,
                found: state.dim(),
            });
        }
        let mut out = StateVector::zeros(self.n_qubits);
        self.accumulate(&state.amps, &mut out.amps, ONE);
        Ok(out)
    }

    fn expectation_complex(&self, state: &StateVector) -> Result<C64> {
        self.terms
            .iter()
            .map(|t| t.expectation_complex(state))
            .sum()
    }
}

/// Largest matrix element of `[A, B]`, found column by column from the action
/// on each basis state. Costs `O(4^N)` time but only `O(2^N)` memory.
pub fn commutator_max_abs(a: &PauliSum, b: &PauliSum) -> Result<f64> {
    let n = a.n_qubits;
    if b.n_qubits != n {
        return Err(QetError::DimensionMismatch {
            expected: 1 << n,
            found: 1 << b.n_qubits,
        });
    }
    let dim = 1usize << n;
    let mut max = 0.0f64;
    for j in 0..dim {
        let e = StateVector::basis(n, j);
        let ab = a.apply(&b.apply(&e)?)?;
        let ba = b.apply(&a.apply(&e)?)?;
        max = max.max(ab.max_abs_diff(&ba)?);
    }
    Ok(max)
}

/// Row-major `2^N x 2^N` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n_qubits: usize,
    data: Vec<C64>,
}

impl DenseOperator {
    pub fn zeros(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn from_pauli_sum(sum: &PauliSum) -> Self {
        let mut op = Self::zeros(sum.n_qubits);
        let dim = op.dim();
        for t in &sum.terms {
            let act = t.action();
            for col in 0..dim {
                op.data[(col ^ act.x_mask) * dim + col] += act.amplitude(col);
            }
        }
        op
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim() + col]
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut dev = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &DenseOperator) -> Result<DenseOperator> {
        if self.n_qubits != other.n_qubits {
            return Err(QetError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let dim = self.dim();
        let mut out = Self::zeros(self.n_qubits);
        for i in 0..dim {
            for l in 0..dim {
                let a = self.data[i * dim + l];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[l * dim..(l + 1) * dim];
                for (o, b) in out.data[i * dim..(i + 1) * dim].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_hermitian()?;
        let dim = self.dim();
        let map = |e: faer::linalg::evd::EvdError| QetError::Eigensolver(format!("{e:?}"));
        if self.is_real() {
            let m = Mat::from_fn(dim, dim, |i, j| self.data[i * dim + j].re);
            m.self_adjoint_eigenvalues(Side::Lower).map_err(map)
        } else {
            let m = Mat::from_fn(dim, dim, |i, j| self.data[i * dim + j]);
            m.self_adjoint_eigenvalues(Side::Lower).map_err(map)
        }
    }

    /// Smallest eigenvalue and a unit eigenvector, defined up to a global phase.
    pub fn lowest_eigenpair(&self) -> Result<(f64, StateVector)> {
        self.require_hermitian()?;
        let dim = self.dim();
        let map = |e: faer::linalg::evd::EvdError| QetError::Eigensolver(format!("{e:?}"));
        let (value, amps) = if self.is_real() {
            let m = Mat::from_fn(dim, dim, |i, j| self.data[i * dim + j].re);
            let evd = m.self_adjoint_eigen(Side::Lower).map_err(map)?;
            let u = evd.U();
            let amps = (0..dim).map(|i| C64::new(u[(i, 0)], 0.0)).collect();
            (evd.S()[0], amps)
        } else {
            let m = Mat::from_fn(dim, dim, |i, j| self.data[i * dim + j]);
            let evd = m.self_adjoint_eigen(Side::Lower).map_err(map)?;
            let u = evd.U();
            let amps = (0..dim).map(|i| u[(i, 0)]).collect();
            (evd.S()[0].re, amps)
        };
        let mut state = StateVector::from_amplitudes(self.n_qubits, amps)?;
        state.normalize();
        Ok((value, state))
    }

    fn require_hermitian(&self) -> Result<()> {
        let dev = self.hermitian_deviation();
        if dev > 1e-12 * self.max_abs().max(1.0) {
            return Err(QetError::NonHermitian(dev));
        }
        Ok(())
    }
}

impl Observable for DenseOperator {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim() {
            return Err(QetError::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        let dim = self.dim();
        let amps = (0..dim)
            .map(|i| {
                self.data[i * dim..(i + 1) * dim]
                    .iter()
                    .zip(&state.amps)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        StateVector::from_amplitudes(self.n_qubits, amps)
    }
}

/// The terms `H_1 .. H_N` and `V` as Pauli sums, constants included.
#[derive(Debug, Clone)]
pub struct HamiltonianTerms {
    pub locals: Vec<PauliSum>,
    pub interaction: PauliSum,
}

impl HamiltonianTerms {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let n = check_size(params.n_qubits(), BLOCK_CAP)?;
        let local_const = params.local_constant();
        let locals = (0..n)
            .map(|q| {
                PauliSum::new(
                    n,
                    vec![
                        PauliString::single(n, q, Pauli::Z, params.h()),
                        PauliString::identity(n, local_const),
                    ],
                )
            })
            .collect();
        let interaction = PauliSum::new(
            n,
            vec![
                PauliString::new(vec![Pauli::X; n], C64::new(2.0 * params.k(), 0.0)),
                PauliString::identity(n, params.interaction_constant()),
            ],
        );
        Ok(Self {
            locals,
            interaction,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.interaction.n_qubits
    }

    pub fn total(&self) -> PauliSum {
        let mut sum = PauliSum::new(self.n_qubits(), Vec::new());
        for h in &self.locals {
            sum.extend(h);
        }
        sum.extend(&self.interaction);
        sum
    }

    /// `sum_{q in qubits} H_q`, plus `V` when `with_interaction` is set.
    pub fn partial(&self, qubits: &[usize], with_interaction: bool) -> PauliSum {
        let mut sum = PauliSum::new(self.n_qubits(), Vec::new());
        for &q in qubits {
            sum.extend(&self.locals[q]);
        }
        if with_interaction {
            sum.extend(&self.interaction);
        }
        sum
    }
}

/// Dense matrix of the full Hamiltonian.
pub fn build_hamiltonian(params: &ModelParams, cap: u64) -> Result<DenseOperator> {
    check_size(params.n_qubits(), cap)?;
    Ok(DenseOperator::from_pauli_sum(
        &HamiltonianTerms::new(params)?.total(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundStateMethod {
    /// Full diagonalization of the dense matrix.
    Dense,
    /// Scan of the 2x2 blocks `{|b>, |~b>}` coupled by the interaction.
    Block,
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
}

/// Lowest eigenpair of one `{|b>, |~b>}` block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEigenpair {
    pub energy: f64,
    /// Basis index with the leading qubit equal to 0.
    pub index: usize,
    /// Bitwise complement of `index`.
    pub partner: usize,
    pub amp_index: f64,
    pub amp_partner: f64,
}

/// Finds the global ground state by diagonalizing every 2x2 block.
///
/// `prod X` maps `|b>` to its complement and the field term is diagonal, so
/// each block reads `[[c + d, 2k], [2k, c - d]]` with `d = h (N - 2 popcount(b))`.
pub fn block_ground_pair(params: &ModelParams) -> Result<BlockEigenpair> {
    let n = check_size(params.n_qubits(), BLOCK_CAP)?;
    let c = params.scale();
    let two_k = 2.0 * params.k();
    let full = (1usize << n) - 1;
    let mut best: Option<BlockEigenpair> = None;
    for index in 0..(1usize << (n - 1)) {
        let d = params.h() * (n as f64 - 2.0 * index.count_ones() as f64);
        let s = d.hypot(two_k);
        let energy = c - s;
        if best.is_some_and(|b| b.energy <= energy) {
            continue;
        }
        // (c + d) u + 2k v = (c - s) u, rearranged without cancellation
        let (amp_index, amp_partner) = if s == 0.0 {
            (1.0, 0.0)
        } else if d >= 0.0 {
            (
                two_k / (2.0 * s * (s + d)).sqrt(),
                -((s + d) / (2.0 * s)).sqrt(),
            )
        } else {
            (
                ((s - d) / (2.0 * s)).sqrt(),
                -two_k / (2.0 * s * (s - d)).sqrt(),
            )
        };
        best = Some(BlockEigenpair {
            energy,
            index,
            partner: index ^ full,
            amp_index,
            amp_partner,
        });
    }
    Ok(best.expect("at least one block"))
}

pub fn exact_ground_state(
    params: &ModelParams,
    method: GroundStateMethod,
    cap: u64,
) -> Result<GroundState> {
    match method {
        GroundStateMethod::Dense => {
            let h = build_hamiltonian(params, cap)?;
            let (energy, state) = h.lowest_eigenpair()?;
            Ok(GroundState { energy, state })
        }
        GroundStateMethod::Block => {
            let pair = block_ground_pair(params)?;
            let mut state = StateVector::zeros(params.n_qubits() as usize);
            state.amps[pair.index] = C64::new(pair.amp_index, 0.0);
            state.amps[pair.partner] = C64::new(pair.amp_partner, 0.0);
            Ok(GroundState {
                energy: pair.energy,
                state,
            })
        }
    }
}
