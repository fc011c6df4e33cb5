//! Analytic energies of the bi-partitioned teleportation protocol.
//!
//! With `N - m` measured qubits and `m` output qubits, writing
//! `A = 2 (N-m) h k` and `B = N m h^2 + 4 k^2`:
//!
//! ```text
//! E_in          = (N-m) N h^2 / c
//! E_out(theta)  = [A sin 2theta - B (1 - cos 2theta)] / c
//! cos 2theta*   = B / sqrt(A^2 + B^2),  sin 2theta* = A / sqrt(A^2 + B^2)
//! E_out_max     = (B / c) [sqrt(1 + (A/B)^2) - 1]
//! eta           = E_out_max / E_in
//! ```
//!
//! All functions are cheap and valid for very large `N`.

use serde::Serialize;

use crate::model::{ModelParams, Partition};

/// Rotation angle of the extraction unitary, with both `cos 2theta` and
/// `sin 2theta` non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaChoice {
    pub theta: f64,
    pub cos_2theta: f64,
    pub sin_2theta: f64,
}

impl ThetaChoice {
    pub fn from_theta(theta: f64) -> Self {
        let (sin_2theta, cos_2theta) = (2.0 * theta).sin_cos();
        Self {
            theta,
            cos_2theta,
            sin_2theta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormReport {
    pub e_in: f64,
    pub e_out_max: f64,
    pub theta_opt: ThetaChoice,
    pub eta: f64,
}

/// `sqrt(1 + x) - 1` without cancellation for small `x`.
pub fn sqrt1pm1(x: f64) -> f64 {
    x / ((1.0 + x).sqrt() + 1.0)
}

/// `(A, B)`: the `sin 2theta` coefficient and the `1 - cos 2theta` penalty.
fn coefficients(params: &ModelParams, part: &Partition) -> (f64, f64) {
    let n = params.n_qubits() as f64;
    let m = part.m() as f64;
    let (h, k) = (params.h(), params.k());
    let drive = 2.0 * (n - m) * h * k;
    let penalty = n * m * h * h + 4.0 * k * k;
    (drive, penalty)
}

pub fn input_energy(params: &ModelParams, part: &Partition) -> f64 {
    part.n_inputs() as f64 * params.local_constant()
}

/// Extracted energy for an arbitrary rotation angle. Negative when the
/// rotation overshoots.
pub fn output_energy_at_theta(params: &ModelParams, part: &Partition, theta: f64) -> f64 {
    let (drive, penalty) = coefficients(params, part);
    let s = theta.sin();
    // 1 - cos 2theta = 2 sin^2 theta
    (drive * (2.0 * theta).sin() - penalty * 2.0 * s * s) / params.scale()
}

pub fn optimal_theta(params: &ModelParams, part: &Partition) -> ThetaChoice {
    let (drive, penalty) = coefficients(params, part);
    let d = penalty.hypot(drive);
    ThetaChoice {
        theta: 0.5 * drive.atan2(penalty),
        cos_2theta: penalty / d,
        sin_2theta: drive / d,
    }
}

pub fn max_output_energy(params: &ModelParams, part: &Partition) -> f64 {
    let (drive, penalty) = coefficients(params, part);
    let r = drive / penalty;
    (penalty / params.scale()) * sqrt1pm1(r * r)
}

pub fn efficiency(params: &ModelParams, part: &Partition) -> f64 {
    max_output_energy(params, part) / input_energy(params, part)
}

/// Efficiency with a single output qubit.
pub fn single_output_efficiency(params: &ModelParams) -> f64 {
    let part = Partition::trailing(params.n_qubits(), 1).expect("N >= 2 always admits one output");
    efficiency(params, &part)
}

/// Strong-coupling limit of the efficiency, `(N - m) / (2N)`.
pub fn asymptotic_efficiency(params: &ModelParams, part: &Partition) -> f64 {
    part.n_inputs() as f64 / (2.0 * params.n_qubits() as f64)
}

pub fn report(params: &ModelParams, part: &Partition) -> ClosedFormReport {
    let e_in = input_energy(params, part);
    let e_out_max = max_output_energy(params, part);
    ClosedFormReport {
        e_in,
        e_out_max,
        theta_opt: optimal_theta(params, part),
        eta: e_out_max / e_in,
    }
}
