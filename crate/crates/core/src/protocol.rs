//! Brute-force execution of the teleportation protocol on statevectors.
//!
//! 1. Every measured qubit `j` is projected with `P_j(a_j) = (1 + a_j X_j) / 2`;
//!    all `2^(N-m)` outcome strings are enumerated exactly.
//! 2. The outcomes reach the output side for free.
//! 3. The outputs are rotated by `U(a) = cos t - i a sin t Y X .. X` where
//!    `a = prod_j a_j`, with `Y` on one output qubit and `X` on the rest.
//!
//! The averaged post-protocol state is kept as a weighted ensemble of branch
//! statevectors; no density matrix is formed. Weighted sums over branches use
//! pairwise summation in enumeration order, so results do not depend on how
//! branches are scheduled across threads.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::closedform::ThetaChoice;
use crate::error::{QetError, Result};
use crate::golden;
use crate::model::{ModelParams, Partition};
use crate::simkernel::{HamiltonianTerms, Observable, Pauli, PauliString, PauliSum, StateVector};

/// Bracket tolerance of the numeric angle search.
pub const THETA_TOL: f64 = 1e-9;

/// One measurement record.
#[derive(Debug, Clone)]
pub struct OutcomeBranch {
    /// Outcome `+1` / `-1` for each measured qubit, in ascending qubit order.
    pub alpha: Vec<i8>,
    pub probability: f64,
    /// Normalized post-measurement state; the zero vector when
    /// `zero_probability` is set.
    pub post_state: StateVector,
    pub alpha_product: i8,
    pub zero_probability: bool,
}

/// Energy injected by the measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectedEnergy {
    pub total: f64,
    /// One entry per measured qubit, ascending.
    pub per_qubit: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchDetail {
    pub alpha: Vec<i8>,
    pub alpha_product: i8,
    pub probability: f64,
    pub zero_probability: bool,
    /// `-p <psi'|sum_out H_j + V|psi'>` for this branch.
    pub e_out_contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolReport {
    pub e_in: f64,
    pub per_qubit_e_in: Vec<f64>,
    pub theta_used: f64,
    /// Energy drawn from the outputs, `-Tr[rho (sum_out H_j + V)]`.
    pub e_out: f64,
    /// The same quantity as `E_in - Tr[rho H]`.
    pub e_out_via_trace: f64,
    pub eta: f64,
    pub branches: Vec<BranchDetail>,
}

/// Ensemble averages right after the measurement, before any rotation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeutralityReport {
    /// `sum_a p <H_j>` for each output qubit, ascending.
    pub outputs: Vec<f64>,
    pub interaction: f64,
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// `P_q(alpha) = (1 + alpha X_q) / 2`.
pub fn projector(n: usize, q: usize, alpha: i8) -> PauliSum {
    PauliSum::new(
        n,
        vec![
            PauliString::identity(n, 0.5),
            PauliString::single(n, q, Pauli::X, 0.5 * f64::from(alpha)),
        ],
    )
}

/// Enumerates all outcome strings of the input measurements on the ground
/// state. Outcomes are ordered with `+1` before `-1`, first measured qubit
/// varying slowest.
pub fn measure_branches(
    params: &ModelParams,
    part: &Partition,
    cap: u64,
) -> Result<Vec<OutcomeBranch>> {
    part.check_matches(params)?;
    let ground = StateVector::ground_state(params, cap)?;
    let n = ground.n_qubits();
    let inputs = part.inputs();
    let n_in = inputs.len();
    (0..1usize << n_in)
        .into_par_iter()
        .map(|record| {
            let alpha: Vec<i8> = (0..n_in)
                .map(|j| {
                    if record >> (n_in - 1 - j) & 1 == 0 {
                        1
                    } else {
                        -1
                    }
                })
                .collect();
            let mut state = ground.clone();
            for (&q, &a) in inputs.iter().zip(&alpha) {
                state = projector(n, q, a).apply(&state)?;
            }
            let probability = state.normalize();
            Ok(OutcomeBranch {
                alpha_product: alpha.iter().product(),
                alpha,
                probability,
                post_state: state,
                zero_probability: probability == 0.0,
            })
        })
        .collect()
}

/// `sum_a p(a) <psi_a|O|psi_a>` in enumeration order.
fn ensemble_average(branches: &[OutcomeBranch], op: &PauliSum) -> Result<f64> {
    let terms = branches
        .par_iter()
        .map(|b| {
            if b.zero_probability {
                Ok(0.0)
            } else {
                Ok(b.probability * op.expectation(&b.post_state)?)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

pub fn injected_energy(
    branches: &[OutcomeBranch],
    params: &ModelParams,
    part: &Partition,
) -> Result<InjectedEnergy> {
    part.check_matches(params)?;
    let terms = HamiltonianTerms::new(params)?;
    injected_with_terms(branches, &terms, part)
}

fn injected_with_terms(
    branches: &[OutcomeBranch],
    terms: &HamiltonianTerms,
    part: &Partition,
) -> Result<InjectedEnergy> {
    let per_qubit = part
        .inputs()
        .into_iter()
        .map(|q| ensemble_average(branches, &terms.locals[q]))
        .collect::<Result<Vec<f64>>>()?;
    Ok(InjectedEnergy {
        total: per_qubit.iter().sum(),
        per_qubit,
    })
}

/// The string `Y` on `y_qubit` times `X` on every other output.
fn rotation_generator(part: &Partition, y_qubit: usize) -> Result<PauliString> {
    if !part.is_output(y_qubit) {
        return Err(QetError::InvalidPartition(format!(
            "qubit {y_qubit} is not an output"
        )));
    }
    let n = part.n_qubits() as usize;
    let mut letters = vec![Pauli::I; n];
    for &q in part.outputs() {
        letters[q] = if q == y_qubit { Pauli::Y } else { Pauli::X };
    }
    Ok(PauliString::new(letters, C64::new(1.0, 0.0)))
}

fn unitary(generator: &PauliString, alpha_product: i8, theta: f64) -> PauliSum {
    let n = generator.n_qubits();
    let (s, c) = theta.sin_cos();
    let coeff = C64::new(0.0, -f64::from(alpha_product) * s);
    PauliSum::new(
        n,
        vec![
            PauliString::identity(n, c),
            generator.clone().with_coeff(coeff),
        ],
    )
}

/// Applies `U(a)` with `Y` on the lowest-indexed output qubit.
pub fn apply_conditional_unitary(
    branch: &OutcomeBranch,
    part: &Partition,
    theta: f64,
) -> Result<StateVector> {
    apply_conditional_unitary_on(branch, part, theta, part.outputs()[0])
}

/// Applies `U(a)` with the `Y` factor on `y_qubit`.
pub fn apply_conditional_unitary_on(
    branch: &OutcomeBranch,
    part: &Partition,
    theta: f64,
    y_qubit: usize,
) -> Result<StateVector> {
    let generator = rotation_generator(part, y_qubit)?;
    unitary(&generator, branch.alpha_product, theta).apply(&branch.post_state)
}

/// A prepared protocol instance: ground state measured, branches cached.
#[derive(Debug, Clone)]
pub struct Protocol {
    params: ModelParams,
    part: Partition,
    terms: HamiltonianTerms,
    branches: Vec<OutcomeBranch>,
    injected: InjectedEnergy,
    output_energy: PauliSum,
    total_energy: PauliSum,
}

impl Protocol {
    pub fn prepare(params: &ModelParams, part: &Partition, cap: u64) -> Result<Self> {
        let branches = measure_branches(params, part, cap)?;
        let terms = HamiltonianTerms::new(params)?;
        let injected = injected_with_terms(&branches, &terms, part)?;
        let output_energy = terms.partial(part.outputs(), true);
        let total_energy = terms.total();
        Ok(Self {
            params: *params,
            part: part.clone(),
            terms,
            branches,
            injected,
            output_energy,
            total_energy,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn partition(&self) -> &Partition {
        &self.part
    }

    pub fn branches(&self) -> &[OutcomeBranch] {
        &self.branches
    }

    pub fn injected(&self) -> &InjectedEnergy {
        &self.injected
    }

    pub fn terms(&self) -> &HamiltonianTerms {
        &self.terms
    }

    /// Per-branch `(p <H_out + V>, p <H>)` after rotating with `Y` on `y_qubit`.
    fn rotated_energies(&self, theta: f64, y_qubit: usize) -> Result<Vec<(f64, f64)>> {
        let generator = rotation_generator(&self.part, y_qubit)?;
        self.branches
            .par_iter()
            .map(|b| {
                if b.zero_probability {
                    return Ok((0.0, 0.0));
                }
                let rotated = unitary(&generator, b.alpha_product, theta).apply(&b.post_state)?;
                Ok((
                    b.probability * self.output_energy.expectation(&rotated)?,
                    b.probability * self.total_energy.expectation(&rotated)?,
                ))
            })
            .collect()
    }

    /// Extracted energy only, for use inside optimizers.
    pub fn extracted_energy(&self, theta: f64) -> Result<f64> {
        let per = self.rotated_energies(theta, self.part.outputs()[0])?;
        let out: Vec<f64> = per.iter().map(|e| e.0).collect();
        Ok(-pairwise_sum(&out))
    }

    pub fn report(&self, theta: f64) -> Result<ProtocolReport> {
        self.report_with_y_on(theta, self.part.outputs()[0])
    }

    pub fn report_with_y_on(&self, theta: f64, y_qubit: usize) -> Result<ProtocolReport> {
        let per = self.rotated_energies(theta, y_qubit)?;
        let out: Vec<f64> = per.iter().map(|e| e.0).collect();
        let total: Vec<f64> = per.iter().map(|e| e.1).collect();
        let e_in = self.injected.total;
        let e_out = -pairwise_sum(&out);
        let branches = self
            .branches
            .iter()
            .zip(&out)
            .map(|(b, &o)| BranchDetail {
                alpha: b.alpha.clone(),
                alpha_product: b.alpha_product,
                probability: b.probability,
                zero_probability: b.zero_probability,
                e_out_contribution: -o,
            })
            .collect();
        Ok(ProtocolReport {
            e_in,
            per_qubit_e_in: self.injected.per_qubit.clone(),
            theta_used: theta,
            e_out,
            e_out_via_trace: e_in - pairwise_sum(&total),
            eta: e_out / e_in,
            branches,
        })
    }

    /// `Tr[rho H]` for the averaged state after rotation by `theta`.
    pub fn final_energy(&self, theta: f64) -> Result<f64> {
        let per = self.rotated_energies(theta, self.part.outputs()[0])?;
        let total: Vec<f64> = per.iter().map(|e| e.1).collect();
        Ok(pairwise_sum(&total))
    }

    pub fn post_measurement_averages(&self) -> Result<NeutralityReport> {
        let outputs = self
            .part
            .outputs()
            .iter()
            .map(|&q| ensemble_average(&self.branches, &self.terms.locals[q]))
            .collect::<Result<Vec<f64>>>()?;
        Ok(NeutralityReport {
            outputs,
            interaction: ensemble_average(&self.branches, &self.terms.interaction)?,
        })
    }

    /// Golden-section maximization of the simulated extracted energy over
    /// `[0, pi/2]`.
    pub fn optimize_theta(&self) -> Result<ThetaChoice> {
        let mut failure = None;
        let result = golden::maximize(
            |theta| match self.extracted_energy(theta) {
                Ok(e) => e,
                Err(err) => {
                    failure.get_or_insert(err);
                    f64::NEG_INFINITY
                }
            },
            0.0,
            std::f64::consts::FRAC_PI_2,
            THETA_TOL,
        );
        match failure {
            Some(err) => Err(err),
            None => Ok(ThetaChoice::from_theta(result.x)),
        }
    }

    /// Monte Carlo estimate from `shots` sampled measurement records.
    pub fn sample(&self, theta: f64, shots: u64, seed: u64) -> Result<SampledEstimate> {
        let per = self.rotated_energies(theta, self.part.outputs()[0])?;
        let inputs = self.part.inputs();
        // per-branch energies, without the probability weight
        let mut e_in_branch = Vec::with_capacity(self.branches.len());
        let mut e_out_branch = Vec::with_capacity(self.branches.len());
        for (b, &(out, _)) in self.branches.iter().zip(&per) {
            if b.zero_probability {
                e_in_branch.push(0.0);
                e_out_branch.push(0.0);
                continue;
            }
            let mut e = 0.0;
            for &q in &inputs {
                e += self.terms.locals[q].expectation(&b.post_state)?;
            }
            e_in_branch.push(e);
            e_out_branch.push(-out / b.probability);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sum_in = 0.0;
        let mut sum_out = 0.0;
        let mut sum_out_sq = 0.0;
        for _ in 0..shots {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = self.branches.len() - 1;
            for (i, b) in self.branches.iter().enumerate() {
                acc += b.probability;
                if u < acc {
                    pick = i;
                    break;
                }
            }
            sum_in += e_in_branch[pick];
            sum_out += e_out_branch[pick];
            sum_out_sq += e_out_branch[pick] * e_out_branch[pick];
        }
        let n = shots.max(1) as f64;
        let mean_out = sum_out / n;
        let var = (sum_out_sq / n - mean_out * mean_out).max(0.0);
        Ok(SampledEstimate {
            shots,
            seed,
            e_in_mean: sum_in / n,
            e_out_mean: mean_out,
            e_out_stderr: (var / n).sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledEstimate {
    pub shots: u64,
    pub seed: u64,
    pub e_in_mean: f64,
    pub e_out_mean: f64,
    pub e_out_stderr: f64,
}

/// Runs the whole protocol at `theta` with the default output set.
pub fn extracted_energy(
    params: &ModelParams,
    part: &Partition,
    theta: f64,
    cap: u64,
) -> Result<ProtocolReport> {
    Protocol::prepare(params, part, cap)?.report(theta)
}

pub fn optimize_theta_numeric(
    params: &ModelParams,
    part: &Partition,
    cap: u64,
) -> Result<ThetaChoice> {
    Protocol::prepare(params, part, cap)?.optimize_theta()
}

/// Runs the protocol with an arbitrary set of output qubits (0-based).
pub fn simulate_with_outputs(
    params: &ModelParams,
    outputs: &[usize],
    theta: f64,
    cap: u64,
) -> Result<ProtocolReport> {
    let part = Partition::with_outputs(params.n_qubits(), outputs)?;
    extracted_energy(params, &part, theta, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform;

    const CAP: u64 = 12;

    fn setup(n: u64, m: u64, k: f64) -> (ModelParams, Partition) {
        (
            ModelParams::new(n, 1.0, k).unwrap(),
            Partition::trailing(n, m).unwrap(),
        )
    }

    #[test]
    fn minimal_model_branches() {
        let (p, q) = setup(2, 1, 1.0);
        let branches = measure_branches(&p, &q, CAP).unwrap();
        assert_eq!(branches.len(), 2);
        for b in &branches {
            assert!((b.probability - 0.5).abs() < 1e-15);
            assert!((b.post_state.norm_sqr() - 1.0).abs() < 1e-14);
        }
        assert_eq!(branches[0].alpha, vec![1]);
        assert_eq!(branches[1].alpha, vec![-1]);
    }

    #[test]
    fn branch_probabilities_sum_to_one() {
        for n in 2..=7u64 {
            for m in 1..n {
                let (p, q) = setup(n, m, 0.6);
                let branches = measure_branches(&p, &q, CAP).unwrap();
                assert_eq!(branches.len(), 1 << (n - m));
                let total: f64 = branches.iter().map(|b| b.probability).sum();
                assert!((total - 1.0).abs() < 1e-12);
                for b in &branches {
                    assert_eq!(b.alpha_product, b.alpha.iter().product::<i8>());
                }
            }
        }
    }

    #[test]
    fn injected_energy_values() {
        let s13 = 13f64.sqrt();
        let (p, q) = setup(3, 2, 1.0);
        let e = injected_energy(&measure_branches(&p, &q, CAP).unwrap(), &p, &q).unwrap();
        assert!((e.total - 3.0 / s13).abs() < 1e-14);

        let (p, q) = setup(3, 1, 1.0);
        let e = injected_energy(&measure_branches(&p, &q, CAP).unwrap(), &p, &q).unwrap();
        assert!((e.total - 6.0 / s13).abs() < 1e-14);
        for ej in &e.per_qubit {
            assert!((ej - 3.0 / s13).abs() < 1e-14);
        }
        assert_eq!(e.total, e.per_qubit.iter().sum::<f64>());

        let (p, q) = setup(4, 1, 1.0);
        let e = injected_energy(&measure_branches(&p, &q, CAP).unwrap(), &p, &q).unwrap();
        assert!((e.total - 6.0 / 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn zero_angle_extracts_nothing() {
        let (p, q) = setup(4, 2, 0.9);
        let r = extracted_energy(&p, &q, 0.0, CAP).unwrap();
        assert!(r.e_out.abs() < 1e-15);
        let proto = Protocol::prepare(&p, &q, CAP).unwrap();
        for b in proto.branches() {
            let rotated = apply_conditional_unitary(b, &q, 0.0).unwrap();
            assert_eq!(rotated, b.post_state);
        }
    }

    #[test]
    fn unitary_preserves_norm() {
        let (p, q) = setup(2, 1, 1.0);
        let proto = Protocol::prepare(&p, &q, CAP).unwrap();
        let b = &proto.branches()[0];
        let rotated = apply_conditional_unitary(b, &q, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((rotated.norm_sqr() - 1.0).abs() < 1e-14);
        // at t = pi/2 and a = +1 the rotation is -i Y on the output
        let expect = PauliString::single(2, 1, Pauli::Y, 1.0)
            .with_coeff(C64::new(0.0, -1.0))
            .apply(&b.post_state)
            .unwrap();
        assert!(rotated.max_abs_diff(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn four_qubit_unitary_form() {
        // U = cos t - i a1 a2 sin t Y_3 X_4 (qubits 2 and 3 zero-based)
        let (p, q) = setup(4, 2, 1.0);
        let proto = Protocol::prepare(&p, &q, CAP).unwrap();
        let theta = 0.37_f64;
        for b in proto.branches() {
            let yx = PauliString::parse("IIYX", C64::new(1.0, 0.0)).unwrap();
            let mut expect = b.post_state.clone();
            expect.scale(C64::new(theta.cos(), 0.0));
            let a = f64::from(b.alpha[0] * b.alpha[1]);
            expect
                .axpy(
                    C64::new(0.0, -a * theta.sin()),
                    &yx.apply(&b.post_state).unwrap(),
                )
                .unwrap();
            let got = apply_conditional_unitary(b, &q, theta).unwrap();
            assert!(got.max_abs_diff(&expect).unwrap() < 1e-15);
        }
    }

    #[test]
    fn three_qubit_two_outputs() {
        let (p, q) = setup(3, 2, 1.0);
        let theta = closedform::optimal_theta(&p, &q).theta;
        let r = extracted_energy(&p, &q, theta, CAP).unwrap();
        let expect = (10.0 / 13f64.sqrt()) * (26f64.sqrt() / 5.0 - 1.0);
        assert!((r.e_out - expect).abs() < 1e-13);
        assert!((r.e_out - r.e_out_via_trace).abs() < 1e-12);
        let e = closedform::output_energy_at_theta(&p, &q, std::f64::consts::FRAC_PI_4);
        let r = extracted_energy(&p, &q, std::f64::consts::FRAC_PI_4, CAP).unwrap();
        assert!((r.e_out - e).abs() < 1e-13);
        assert!((e + 8.0 / 13f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn four_qubit_two_outputs_follows_general_formula() {
        let (p, q) = setup(4, 2, 1.0);
        let theta = closedform::optimal_theta(&p, &q).theta;
        let r = extracted_energy(&p, &q, theta, CAP).unwrap();
        let (h, k) = (1.0f64, 1.0f64);
        let d = (4.0 * h * h + k * k).sqrt();
        let b = 2.0 * h * h + k * k;
        let consistent =
            ((4.0 * h * h + 2.0 * k * k) / d) * ((1.0 + (h * k / b).powi(2)).sqrt() - 1.0);
        assert!((r.e_out - consistent).abs() < 1e-13);
        let printed = ((4.0 * h * h + 4.0 * k * k) / d)
            * ((1.0 + (h * k / (2.0 * h * h + 2.0 * k * k)).powi(2)).sqrt() - 1.0);
        assert!((r.e_out - printed).abs() > 1e-3);
    }

    #[test]
    fn numeric_theta_matches_formula() {
        for &(n, m, k) in &[(2u64, 1u64, 1.0), (3, 1, 1.0), (4, 2, 0.3), (5, 1, 4.0)] {
            let (p, q) = setup(n, m, k);
            let numeric = optimize_theta_numeric(&p, &q, CAP).unwrap();
            let formula = closedform::optimal_theta(&p, &q);
            assert!((numeric.theta - formula.theta).abs() < 1e-7, "{n} {m} {k}");
        }
        let (p, q) = setup(3, 1, 1.0);
        let numeric = optimize_theta_numeric(&p, &q, CAP).unwrap();
        assert!((2.0 * numeric.theta - 4f64.atan2(7.0)).abs() < 2e-7);

        let (p, q) = setup(3, 1, 1e-9);
        assert!(optimize_theta_numeric(&p, &q, CAP).unwrap().theta.abs() < 1e-7);
    }

    #[test]
    fn measurement_leaves_outputs_neutral() {
        for n in 2..=6u64 {
            for m in 1..n {
                let (p, q) = setup(n, m, 1.7);
                let neutral = Protocol::prepare(&p, &q, CAP)
                    .unwrap()
                    .post_measurement_averages()
                    .unwrap();
                assert_eq!(neutral.outputs.len() as u64, m);
                for e in neutral.outputs {
                    assert!(e.abs() <= 1e-12);
                }
                assert!(neutral.interaction.abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn output_set_does_not_matter() {
        let p = ModelParams::new(4, 1.0, 0.8).unwrap();
        let theta = 0.21;
        let a = simulate_with_outputs(&p, &[2, 3], theta, CAP).unwrap();
        let b = simulate_with_outputs(&p, &[0, 1], theta, CAP).unwrap();
        let c = simulate_with_outputs(&p, &[0, 3], theta, CAP).unwrap();
        for r in [&b, &c] {
            assert!((a.e_in - r.e_in).abs() < 1e-12);
            assert!((a.e_out - r.e_out).abs() < 1e-12);
        }
        let p3 = ModelParams::new(3, 1.0, 1.0).unwrap();
        let a = simulate_with_outputs(&p3, &[1], theta, CAP).unwrap();
        let b = simulate_with_outputs(&p3, &[2], theta, CAP).unwrap();
        assert!((a.e_out - b.e_out).abs() < 1e-12);
        assert!(matches!(
            simulate_with_outputs(&p3, &[0, 1, 2], theta, CAP),
            Err(QetError::InvalidPartition(_))
        ));
    }

    #[test]
    fn y_placement_does_not_matter() {
        let (p, q) = setup(5, 3, 1.3);
        let proto = Protocol::prepare(&p, &q, CAP).unwrap();
        let base = proto.report(0.4).unwrap();
        for &y in q.outputs() {
            let r = proto.report_with_y_on(0.4, y).unwrap();
            assert!((r.e_out - base.e_out).abs() < 1e-12);
        }
        assert!(proto.report_with_y_on(0.4, 0).is_err());
    }

    #[test]
    fn cap_enforced() {
        let (p, q) = setup(13, 1, 1.0);
        assert!(matches!(
            measure_branches(&p, &q, CAP),
            Err(QetError::OracleCapExceeded { .. })
        ));
    }

    #[test]
    fn sampling_is_seeded() {
        let (p, q) = setup(4, 1, 1.0);
        let proto = Protocol::prepare(&p, &q, CAP).unwrap();
        let theta = closedform::optimal_theta(&p, &q).theta;
        let a = proto.sample(theta, 20_000, 7).unwrap();
        let b = proto.sample(theta, 20_000, 7).unwrap();
        assert_eq!(a, b);
        let exact = proto.report(theta).unwrap();
        assert!((a.e_out_mean - exact.e_out).abs() < 5.0 * a.e_out_stderr + 1e-12);
        assert!((a.e_in_mean - exact.e_in).abs() < 1e-9);
    }

    #[test]
    fn pairwise_sum_small() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0, 4.0, 5.0]), 15.0);
    }
}
