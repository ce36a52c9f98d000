//! The `validate` subcommand: invariant suites spanning precoding,
//! distribution fidelity, special-function identities, series-vs-Monte-Carlo
//! agreement, and bound ordering. Each suite prints one PASS/FAIL line;
//! any failure makes the command exit non-zero.

use fdadm_core::analytics::{self, psi_integral, s_closed, SecrecyOptions};
use fdadm_core::ftr_channel::{FtrDistribution, FtrSampler};
use fdadm_core::link_model::eve_gains;
use fdadm_core::montecarlo::{
    run_secrecy_sweep, ModScheme, Modulation, Scenario, SweepMetric, SweepSpec,
};
use fdadm_core::precoder::{self, AnMethod, PowerSplit};
use fdadm_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct SuiteOutcome {
    pub name: &'static str,
    pub result: Result<String, String>,
}

fn precoder_suite(scenario: &Scenario) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x56A1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let pos = fdadm_core::array_geometry::Position::new(
            rng.random_range(200.0..5000.0),
            rng.random_range(-1.3..1.3),
            rng.random_range(-1.3..1.3),
        )
        .map_err(|e| e.to_string())?;
        let h = scenario.array.steering_vector(&pos, 0.0);
        for method in [AnMethod::Sp, AnMethod::Zf, AnMethod::Svd] {
            let pre =
                precoder::design(method, &h, scenario.array.n_half).map_err(|e| e.to_string())?;
            worst = worst.max(pre.max_leakage(&h));
            worst = worst.max((h.inner(&pre.p1) - num_complex::Complex64::ONE).norm());
        }
    }
    if worst <= 1e-10 {
        Ok(format!("worst orthogonality defect {worst:.2e}"))
    } else {
        Err(format!("orthogonality defect {worst:.2e} above 1e-10"))
    }
}

fn ftr_ks_suite(scenario: &Scenario, trials: usize) -> Result<String, String> {
    let mut msgs = Vec::new();
    for (name, spec, seed) in [
        ("bob", scenario.fading_bob, 0x56A2u64),
        ("eve", scenario.fading_eve, 0x56A3u64),
    ] {
        let p = spec.with_sigma2(1.0).map_err(|e| e.to_string())?;
        let dist =
            FtrDistribution::new(&p, &scenario.series).map_err(|e| e.to_string())?;
        let norm = dist.normalization();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(format!("{name}: weight normalization off by {:e}", norm - 1.0));
        }
        let sampler = FtrSampler::new(&p).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = trials.max(10_000);
        let mut xs: Vec<f64> = (0..n).map(|_| sampler.sample_power(&mut rng)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks = 0.0f64;
        for (i, &x) in xs.iter().enumerate() {
            let f = dist.cdf(x);
            ks = ks
                .max((f - i as f64 / n as f64).abs())
                .max((f - (i + 1) as f64 / n as f64).abs());
        }
        // 0.01 is the budget at 1e5 samples; shorter runs get the
        // equal-significance threshold scaled by sqrt(1e5 / n)
        let threshold = 0.01 * (1e5 / n as f64).sqrt().max(1.0);
        if ks > threshold {
            return Err(format!("{name}: KS distance {ks:.4} above {threshold:.4}"));
        }
        msgs.push(format!("{name} KS {ks:.4} (n = {n})"));
    }
    Ok(msgs.join(", "))
}

fn psi_identity_suite(scenario: &Scenario) -> Result<String, String> {
    let mut worst = 0.0f64;
    for u in 1..=5u32 {
        for &v in &[0.25, 0.5, 1.0, 2.0, 5.0] {
            let psi = psi_integral(1, u as f64 - 1.0, 0.0, v, 0.0, f64::INFINITY, &scenario.quad)
                .map_err(|e| e.to_string())?;
            let s = s_closed(u, v).map_err(|e| e.to_string())?;
            worst = worst.max(((psi - s) / s).abs());
        }
    }
    if worst <= 1e-6 {
        Ok(format!("worst relative error {worst:.2e}"))
    } else {
        Err(format!("identity violated at {worst:.2e} relative"))
    }
}

fn secrecy_vs_mc(
    scenario: &Scenario,
    trials: usize,
    metric: SweepMetric,
) -> Result<String, String> {
    let spec = SweepSpec {
        metric,
        grid: vec![10.0, 15.0],
        methods: vec![AnMethod::Sp],
        trials,
        seed: 0x56A4,
        modulation: Modulation::new(ModScheme::Psk, 4).unwrap(),
    };
    let res = run_secrecy_sweep(scenario, &spec).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for p in &res.points {
        let mc = p.mc_value.unwrap();
        let an = p.analytic_value.unwrap();
        let floor = if matches!(metric, SweepMetric::SrVsLambdaB) {
            0.05
        } else {
            0.01
        };
        let tol = (3.0 * p.mc_stderr.unwrap()).max(floor);
        let diff = (mc - an).abs();
        worst = worst.max(diff);
        if diff > tol {
            return Err(format!(
                "at {} dB: |mc {mc:.4} - analytic {an:.4}| = {diff:.4} > {tol:.4}",
                p.sweep_value
            ));
        }
    }
    Ok(format!("max |analytic - MC| = {worst:.4}"))
}

fn bound_ordering_suite(scenario: &Scenario) -> Result<String, String> {
    let h_b = scenario.array.steering_vector(&scenario.bob, scenario.time);
    let h_e = scenario.array.steering_vector(&scenario.eve, scenario.time);
    let split = PowerSplit::from_beta1(scenario.beta1).map_err(|e| e.to_string())?;
    let pre = precoder::design_sp(&h_b).map_err(|e| e.to_string())?;
    let gains = eve_gains(&h_e, &pre, &split);
    let opts = SecrecyOptions {
        series: scenario.series,
        quad: scenario.quad,
    };
    let lb_lin = 10f64.powf(scenario.lambda_b_db / 10.0);
    let ftr_b = scenario
        .fading_bob
        .at_avg_snr(lb_lin, scenario.ps, scenario.noise_var_b)
        .map_err(|e| e.to_string())?
        .scaled(scenario.ps / scenario.noise_var_b);
    for le_db in [0.0, 20.0, 40.0] {
        let le_lin = 10f64.powf(le_db / 10.0);
        let ftr_e = scenario
            .fading_eve
            .at_avg_snr(le_lin, scenario.ps, scenario.noise_var_e)
            .map_err(|e| e.to_string())?
            .scaled(scenario.ps / scenario.noise_var_e);
        let sr = analytics::avg_secrecy_rate(&ftr_b, &ftr_e, split.beta1, &gains, &opts)
            .map_err(|e| e.to_string())?;
        let lb = analytics::sr_lower_bound(&ftr_b, split.beta1, gains.tau, &opts)
            .map_err(|e| e.to_string())?;
        if sr.value < lb - 1e-3 {
            return Err(format!(
                "lambda_E={le_db} dB: SR {:.4} below its lower bound {lb:.4}",
                sr.value
            ));
        }
        for r0 in [0.0, 0.5] {
            let sop = analytics::sop(&ftr_b, &ftr_e, split.beta1, &gains, r0, &opts)
                .map_err(|e| e.to_string())?;
            let ub = analytics::sop_upper_bound(&ftr_b, split.beta1, gains.tau, r0, &opts)
                .map_err(|e| e.to_string())?;
            if sop.value > ub + 1e-3 {
                return Err(format!(
                    "lambda_E={le_db} dB r0={r0}: SOP {:.4} above its upper bound {ub:.4}",
                    sop.value
                ));
            }
        }
    }
    Ok("SR >= lower bound and SOP <= upper bound across the sweep".into())
}

/// Run every suite; returns the outcomes (caller prints and sets the exit
/// code). `trials` scales the Monte Carlo legs.
pub fn run_all(scenario: &Scenario, trials: usize) -> Vec<SuiteOutcome> {
    vec![
        SuiteOutcome {
            name: "precoder-orthogonality",
            result: precoder_suite(scenario),
        },
        SuiteOutcome {
            name: "ftr-distribution-ks",
            result: ftr_ks_suite(scenario, trials),
        },
        SuiteOutcome {
            name: "psi-identity",
            result: psi_identity_suite(scenario),
        },
        SuiteOutcome {
            name: "secrecy-rate-vs-mc",
            result: secrecy_vs_mc(scenario, trials, SweepMetric::SrVsLambdaB),
        },
        SuiteOutcome {
            name: "sop-vs-mc",
            result: secrecy_vs_mc(scenario, trials, SweepMetric::SopVsLambdaB),
        },
        SuiteOutcome {
            name: "bound-ordering",
            result: bound_ordering_suite(scenario),
        },
    ]
}

/// Classify a core error for the process exit code (2 = numerical).
pub fn is_numerical(err: &Error) -> bool {
    matches!(
        err,
        Error::SeriesNotConverged { .. }
            | Error::QuadratureNotConverged { .. }
            | Error::NumericalFailure(_)
            | Error::Domain(_)
    )
}
