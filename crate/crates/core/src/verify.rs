//! Oracle-against-closed-form verification suite behind the `verify` command.
//!
//! Every check records the worst observed deviation and its tolerance, so a
//! failing run says by how much it failed.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{self, OutputCounts, SweepSpec};
use crate::closedform;
use crate::error::Result;
use crate::model::{ModelParams, Partition};
use crate::protocol::{Protocol, pairwise_sum, projector};
use crate::simkernel::{
    GroundStateMethod, HamiltonianTerms, StateVector, commutator_max_abs, exact_ground_state,
};

pub const RATIOS: [f64; 3] = [0.1, 1.0, 10.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    /// Passes when `worst <= tolerance`; NaN never passes.
    fn bound(name: &str, worst: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: worst <= tolerance,
            worst,
            tolerance,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4}  {:<28} worst {:>10.3e}  tol {:>8.1e}  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Largest `N` for the protocol grid.
    pub n_max: u64,
    /// Largest `N` handed to the dense diagonalization.
    pub oracle_cap: u64,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    // NaN propagates so that it fails the bound
    xs.into_iter().fold(0.0, |acc: f64, x| {
        if x.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(x)
        }
    })
}

#[derive(Default)]
struct GridStats {
    e_in: f64,
    e_out: f64,
    accounting: f64,
    passivity: f64,
    probability: f64,
    neutrality: f64,
}

fn grid_point(n: u64, m: u64, ratio: f64, cap: u64) -> Result<GridStats> {
    let params = ModelParams::from_ratio(n, ratio)?;
    let part = Partition::trailing(n, m)?;
    let protocol = Protocol::prepare(&params, &part, cap)?;
    let report = protocol.report(closedform::optimal_theta(&params, &part).theta)?;
    let neutral = protocol.post_measurement_averages()?;
    let probs: Vec<f64> = protocol.branches().iter().map(|b| b.probability).collect();

    Ok(GridStats {
        e_in: rel(report.e_in, closedform::input_energy(&params, &part)),
        e_out: (report.e_out - closedform::max_output_energy(&params, &part)).abs()
            / closedform::max_output_energy(&params, &part).max(1.0),
        accounting: (report.e_out - report.e_out_via_trace).abs(),
        passivity: (report.e_out_via_trace - report.e_in).max(0.0),
        probability: (pairwise_sum(&probs) - 1.0).abs(),
        neutrality: max_of(
            neutral
                .outputs
                .iter()
                .map(|x| x.abs())
                .chain([neutral.interaction.abs()]),
        ),
    })
}

/// Largest entry of `[P_q(a), V]` over every qubit and outcome.
fn projector_commutator(n: u64) -> Result<f64> {
    let terms = HamiltonianTerms::new(&ModelParams::from_ratio(n, 1.0)?)?;
    let nq = n as usize;
    let mut worst = 0.0f64;
    for q in 0..nq {
        for alpha in [1, -1] {
            worst = worst.max(commutator_max_abs(
                &projector(nq, q, alpha),
                &terms.interaction,
            )?);
        }
    }
    Ok(worst)
}

fn protocol_grid(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut points = Vec::new();
    for n in 3..=cfg.n_max {
        for m in 1..n {
            for &r in &RATIOS {
                points.push((n, m, r));
            }
        }
    }
    let stats: Vec<GridStats> = points
        .par_iter()
        .map(|&(n, m, r)| grid_point(n, m, r, cfg.oracle_cap))
        .collect::<Result<_>>()?;
    let commutator = (3..=cfg.n_max)
        .into_par_iter()
        .map(projector_commutator)
        .collect::<Result<Vec<f64>>>()?;
    let worst = |f: fn(&GridStats) -> f64| max_of(stats.iter().map(f));
    let scope = format!("N = 3..{}, all m, k/h in {{0.1, 1, 10}}", cfg.n_max);
    Ok(vec![
        Check::bound("injected energy", worst(|s| s.e_in), 1e-10, &scope),
        Check::bound("extracted energy", worst(|s| s.e_out), 1e-10, &scope),
        Check::bound(
            "double accounting",
            worst(|s| s.accounting),
            1e-10,
            "E_out vs E_in - Tr[rho H]",
        ),
        Check::bound("passivity", worst(|s| s.passivity), 1e-10, "Tr[rho H] >= 0"),
        Check::bound(
            "branch probabilities",
            worst(|s| s.probability),
            1e-12,
            "sum p = 1",
        ),
        Check::bound(
            "measurement neutrality",
            worst(|s| s.neutrality),
            1e-12,
            "outputs and V after measurement",
        ),
        Check::bound(
            "projector commutator",
            max_of(commutator),
            0.0,
            "[P_j(a), V] = 0",
        ),
    ])
}

fn ground_states(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let n_hi = cfg.oracle_cap.min(12);
    let mut energy = 0.0f64;
    let mut overlap = 0.0f64;
    let mut block = 0.0f64;
    for n in 2..=n_hi {
        for &r in &RATIOS {
            let p = ModelParams::from_ratio(n, r)?;
            let dense = exact_ground_state(&p, GroundStateMethod::Dense, cfg.oracle_cap)?;
            let analytic = StateVector::ground_state(&p, cfg.oracle_cap)?;
            energy = energy.max(dense.energy.abs());
            overlap = overlap.max(1.0 - dense.state.fidelity(&analytic)?);
            if n <= 10 {
                let b = exact_ground_state(&p, GroundStateMethod::Block, cfg.oracle_cap)?;
                block = block
                    .max((b.energy - dense.energy).abs())
                    .max(1.0 - b.state.fidelity(&dense.state)?);
            }
        }
    }
    let scope = format!("N = 2..{n_hi}");
    Ok(vec![
        Check::bound("ground energy", energy, 1e-10, &scope),
        Check::bound("ground state overlap", overlap, 1e-10, &scope),
        Check::bound(
            "block vs dense",
            block,
            1e-10,
            format!("N = 2..{}", n_hi.min(10)),
        ),
    ])
}

fn invariances(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let n_hi = cfg.n_max.min(6);
    let mut partition = 0.0f64;
    let mut placement = 0.0f64;
    let mut theta_numeric = 0.0f64;
    for n in 3..=n_hi {
        for m in 1..n {
            let p = ModelParams::from_ratio(n, 1.0)?;
            let trailing = Partition::trailing(n, m)?;
            let theta = closedform::optimal_theta(&p, &trailing).theta;
            let base = Protocol::prepare(&p, &trailing, cfg.oracle_cap)?;
            let reference = base.report(theta)?;

            // leading, trailing and interleaved output sets
            let nq = n as usize;
            let leading: Vec<usize> = (0..m as usize).collect();
            let spread: Vec<usize> = (0..m as usize).map(|i| (2 * i + 1) % nq).collect();
            for outs in [leading, spread] {
                if let Ok(part) = Partition::with_outputs(n, &outs) {
                    let r = Protocol::prepare(&p, &part, cfg.oracle_cap)?.report(theta)?;
                    partition = partition
                        .max((r.e_in - reference.e_in).abs())
                        .max((r.e_out - reference.e_out).abs());
                }
            }
            for &q in trailing.outputs() {
                let r = base.report_with_y_on(theta, q)?;
                placement = placement.max((r.e_out - reference.e_out).abs());
            }
            let numeric = base.optimize_theta()?;
            theta_numeric = theta_numeric.max((numeric.theta - theta).abs());
        }
    }
    let scope = format!("N = 3..{n_hi}, k/h = 1");
    Ok(vec![
        Check::bound("partition invariance", partition, 1e-12, &scope),
        Check::bound("sigma-y placement", placement, 1e-12, &scope),
        Check::bound(
            "numeric theta",
            theta_numeric,
            1e-7,
            "golden search vs closed form",
        ),
    ])
}

fn theta_optimality() -> Check {
    let mut worst = 0.0f64;
    for n in [2u64, 3, 4, 10, 100] {
        for m in [1, n / 2, n - 1] {
            if m == 0 {
                continue;
            }
            for &r in &[0.1, 1.0, 10.0, 1000.0] {
                let p = ModelParams::from_ratio(n, r).unwrap();
                let part = Partition::trailing(n, m).unwrap();
                let best = closedform::output_energy_at_theta(
                    &p,
                    &part,
                    closedform::optimal_theta(&p, &part).theta,
                );
                for i in 0..10_000 {
                    let theta = PI * (i as f64 + 0.5) / 10_000.0;
                    let e = closedform::output_energy_at_theta(&p, &part, theta);
                    worst = worst.max((e - best) / best.abs().max(1.0));
                }
            }
        }
    }
    Check::bound("theta optimality", worst, 1e-14, "10^4 angles in [0, pi)")
}

fn limits() -> Result<Vec<Check>> {
    let mut worst = 0.0f64;
    for (n, m, x, target) in [
        (10, 1, 1e6, 0.45),
        (100, 1, 1e6, 0.495),
        (1000, 1, 1e6, 0.4995),
        (2, 1, 1e6, 0.25),
        (3, 2, 1e4, 1.0 / 6.0),
        (3, 1, 1e4, 1.0 / 3.0),
    ] {
        let eta =
            closedform::efficiency(&ModelParams::from_ratio(n, x)?, &Partition::trailing(n, m)?);
        worst = worst.max((eta - target).abs());
    }
    let mut n_opt_gap = 0.0f64;
    let mut n_opt_eta = 0.0f64;
    for (x, target) in [(10.0, 0.42), (100.0, 0.48), (1000.0, 0.496)] {
        let r = analysis::n_opt(x)?;
        n_opt_gap = n_opt_gap.max((r.scan_argmax as f64 - r.n_opt_real).abs());
        n_opt_eta = n_opt_eta.max((r.eta_at_opt - target).abs());
    }
    Ok(vec![
        Check::bound(
            "strong-coupling limits",
            worst,
            1e-3,
            "eta at k/h = 1e6 and 1e4",
        ),
        Check::bound(
            "optimal N location",
            n_opt_gap,
            1.0,
            "integer scan vs continuous optimum",
        ),
        Check::bound(
            "optimal N efficiency",
            n_opt_eta,
            0.005,
            "k/h = 10, 100, 1000",
        ),
    ])
}

fn bell() -> Result<Check> {
    let mut worst =
        (analysis::bell_value_ground_state(&ModelParams::uncoupled(3, 1.0)?)?.b_value - 1.0).abs();
    let mut drops = 0.0f64;
    for n in [3u64, 8, 10] {
        let mut prev = 1.0;
        for x in analysis::log_grid(-2, 8, analysis::POINTS_PER_DECADE) {
            let b = analysis::bell_value_ground_state(&ModelParams::from_ratio(n, x)?)?;
            drops = drops.max(prev - b.b_value);
            prev = b.b_value;
        }
        worst = worst.max((prev - 2f64.powf((n as f64 - 2.0) / 2.0)).abs());
    }
    let mut c = Check::bound(
        "Bell value",
        worst.max(drops * 1e6),
        1e-6,
        "k = 0, monotone, saturation at k/h = 1e8",
    );
    c.passed &= drops <= 0.0;
    Ok(c)
}

fn fixtures(cfg: &VerifyConfig) -> Result<Check> {
    let report = analysis::special_case_check(cfg.oracle_cap)?;
    let worst = max_of(
        report
            .rows
            .iter()
            .filter(|r| !r.expected_mismatch)
            .map(|r| r.max_abs_deviation),
    );
    let mut c = Check::bound(
        "printed special cases",
        worst,
        report.tolerance,
        format!(
            "{} cases, {} known mismatches",
            report.rows.len(),
            report.adjudications.len()
        ),
    );
    c.passed &= report.as_expected();
    Ok(c)
}

fn determinism() -> Result<Check> {
    let spec = SweepSpec::new(
        analysis::integer_log_grid(2, 10_000, analysis::POINTS_PER_DECADE),
        OutputCounts::List(vec![1]),
        vec![10.0, 100.0, 1000.0],
    );
    let run = |threads: usize| -> Result<Vec<analysis::SweepRow>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        pool.install(|| analysis::efficiency_sweep(&spec))
    };
    let one = run(1)?;
    let many = run(4)?;
    let same = one.len() == many.len()
        && one.iter().zip(&many).all(|(a, b)| {
            a.n == b.n
                && a.m == b.m
                && a.ratio.to_bits() == b.ratio.to_bits()
                && a.e_in.to_bits() == b.e_in.to_bits()
                && a.e_out.to_bits() == b.e_out.to_bits()
                && a.eta.to_bits() == b.eta.to_bits()
        });
    Ok(Check::bound(
        "thread determinism",
        if same { 0.0 } else { 1.0 },
        0.0,
        "sweep, 1 vs 4 threads",
    ))
}

/// Runs every check. Errors are configuration problems, not failures.
pub fn run_all(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut checks = protocol_grid(cfg)?;
    checks.extend(ground_states(cfg)?);
    checks.extend(invariances(cfg)?);
    checks.push(theta_optimality());
    checks.extend(limits()?);
    checks.push(bell()?);
    checks.push(fixtures(cfg)?);
    checks.push(determinism()?);
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let checks = run_all(&VerifyConfig {
            n_max: 5,
            oracle_cap: 6,
        })
        .unwrap();
        for c in &checks {
            assert!(c.passed, "{c}");
        }
        assert!(checks.iter().any(|c| c.name == "projector commutator"));
    }

    #[test]
    fn nan_fails() {
        assert!(!Check::bound("x", f64::NAN, 1.0, "").passed);
        assert!(max_of([1.0, f64::NAN, 0.5]).is_nan());
    }
}
