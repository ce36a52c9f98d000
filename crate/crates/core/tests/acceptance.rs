//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured numbers (run with `--nocapture` to see them).
//!
//! Every tolerance is pinned in code; Monte Carlo legs use fixed seeds so
//! the suite is deterministic.

use fdadm_core::analytics::{
    self, psi_integral, s_closed, QuadratureOptions, SecrecyOptions,
};
use fdadm_core::array_geometry::Position;
use fdadm_core::ftr_channel::{FtrDistribution, FtrSampler, SeriesOptions};
use fdadm_core::link_model::{
    eve_gains, gamma_b_pdf_with, gamma_e_cdf_with, gamma_e_pdf_with,
};
use fdadm_core::montecarlo::{
    run_ber_sweep, run_secrecy_sweep, ModScheme, Modulation, RxTag, Scenario, SweepMetric,
    SweepSpec,
};
use fdadm_core::precoder::{self, AnMethod, PowerSplit};
use fdadm_core::special::quad::{integrate, integrate_to_inf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

#[test]
fn acceptance_01_memory_ratios() {
    let sp = precoder::memory_footprint(AnMethod::Sp, 10, 7);
    let zf = precoder::memory_footprint(AnMethod::Zf, 10, 7);
    let svd = precoder::memory_footprint(AnMethod::Svd, 10, 7);
    assert_eq!(sp.total, 148);
    assert_eq!(zf.total, 21_756);
    assert_eq!(svd.total, 2_960);
    // exact rational identities behind the quoted 0.68% and 5%
    assert_eq!(sp.total * 20, svd.total);
    assert_eq!(148 * 21_756, sp.total * zf.total); // self-consistency
    let r_zf = sp.total as f64 / zf.total as f64;
    let r_svd = sp.total as f64 / svd.total as f64;
    assert!((r_zf - 0.0068).abs() < 1e-4);
    assert_eq!(r_svd, 0.05);
    println!(
        "ACCEPTANCE 1 PASS: memory totals SP={} ZF={} SVD={}, ratios {:.4}% and {:.1}%",
        sp.total,
        zf.total,
        svd.total,
        100.0 * r_zf,
        100.0 * r_svd
    );
}

#[test]
fn acceptance_02_precoder_orthogonality() {
    let scenario = Scenario::reference();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0002);
    let mut worst_leak = 0.0f64;
    let mut worst_p1 = 0.0f64;
    for _ in 0..100 {
        let pos = Position::new(
            rng.random_range(200.0..5000.0),
            rng.random_range(-1.3..1.3),
            rng.random_range(-1.3..1.3),
        )
        .unwrap();
        let h = scenario.array.steering_vector(&pos, 0.0);
        for method in [AnMethod::Sp, AnMethod::Zf, AnMethod::Svd] {
            let pre = precoder::design(method, &h, scenario.array.n_half).unwrap();
            worst_leak = worst_leak.max(pre.max_leakage(&h));
            let ip = h.inner(&pre.p1);
            worst_p1 = worst_p1.max((ip - num_complex::Complex64::ONE).norm());
        }
    }
    assert!(worst_leak <= 1e-10, "max |h_B^H w| = {worst_leak:e}");
    assert!(worst_p1 <= 1e-10, "max |h_B^H p1 - 1| = {worst_p1:e}");
    println!(
        "ACCEPTANCE 2 PASS: 100 random positions, max AN leakage {worst_leak:.2e}, max |h^H p1 - 1| {worst_p1:.2e}"
    );
}

#[test]
fn acceptance_03_ftr_distribution_fidelity() {
    let opts = SeriesOptions::default();
    let sets = [
        ("bob", 2.3, 10.0, 0.5, 1.0, 0xACCE_0003u64),
        ("eve", 5.3, 15.0, 0.35, 0.7, 0xACCE_0004u64),
    ];
    let mut report = Vec::new();
    for (name, m, k, delta, sigma2, seed) in sets {
        let p = fdadm_core::ftr_channel::FtrParams::new(m, k, delta, sigma2).unwrap();
        let dist = FtrDistribution::new(&p, &opts).unwrap();
        let norm = dist.normalization();
        assert!(
            (norm - 1.0).abs() <= 1e-6,
            "{name}: weight normalization {norm}"
        );
        let sampler = FtrSampler::new(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n).map(|_| sampler.sample_power(&mut rng)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks = 0.0f64;
        for (i, &x) in xs.iter().enumerate() {
            let f = dist.cdf(x);
            ks = ks
                .max((f - i as f64 / n as f64).abs())
                .max((f - (i + 1) as f64 / n as f64).abs());
        }
        assert!(ks <= 0.01, "{name}: KS distance {ks}");
        report.push(format!("{name}: KS={ks:.4}, norm err={:.1e}", (norm - 1.0).abs()));
    }
    println!("ACCEPTANCE 3 PASS: {}", report.join("; "));
}

#[test]
fn acceptance_04_psi_identity() {
    let opts = QuadratureOptions::default();
    let mut worst = 0.0f64;
    for u in 1..=5u32 {
        for &v in &[0.25, 0.5, 1.0, 2.0, 5.0] {
            let psi = psi_integral(1, u as f64 - 1.0, 0.0, v, 0.0, f64::INFINITY, &opts).unwrap();
            let s = s_closed(u, v).unwrap();
            let rel = ((psi - s) / s).abs();
            worst = worst.max(rel);
            assert!(rel <= 1e-6, "u={u} v={v}: psi {psi} vs S {s} (rel {rel:e})");
        }
    }
    println!("ACCEPTANCE 4 PASS: Psi(1,u-1,0,v,0,inf) vs closed form, worst rel err {worst:.2e}");
}

#[test]
fn acceptance_05_ber_theory_vs_mc() {
    let grid: Vec<f64> = (0..8).map(|i| 2.0 * i as f64).collect();
    let mut worst_sigma = 0.0f64;
    let mut eve_lo = 1.0f64;
    let mut eve_hi = 0.0f64;
    for (bi, beta1) in [0.9, 0.7].into_iter().enumerate() {
        let mut scenario = Scenario::reference();
        scenario.beta1 = beta1;
        let spec = SweepSpec {
            metric: SweepMetric::BerVsSnr,
            grid: grid.clone(),
            methods: vec![AnMethod::Sp],
            trials: 100_000,
            seed: 0xACCE_0005 + bi as u64,
            modulation: Modulation::new(ModScheme::Psk, 4).unwrap(),
        };
        let res = run_ber_sweep(&scenario, &spec).unwrap();
        for p in &res.points {
            let mc = p.mc_value.unwrap();
            match p.receiver {
                RxTag::Bob => {
                    let theory = analytics::ber_mpsk(beta1 * beta1 * db(p.sweep_value), 4).unwrap();
                    // binomial standard error at the theoretical rate
                    let se = (theory * (1.0 - theory) / (2.0 * spec.trials as f64)).sqrt();
                    let sigmas = (mc - theory).abs() / se;
                    worst_sigma = worst_sigma.max(sigmas);
                    assert!(
                        sigmas <= 3.0,
                        "beta1={beta1} snr={} dB: mc {mc:.3e} vs theory {theory:.3e} ({sigmas:.2} sigma)",
                        p.sweep_value
                    );
                }
                RxTag::Eve => {
                    eve_lo = eve_lo.min(mc);
                    eve_hi = eve_hi.max(mc);
                    assert!(
                        (0.4..=0.6).contains(&mc),
                        "beta1={beta1} snr={} dB: Eve BER {mc}",
                        p.sweep_value
                    );
                }
                RxTag::Swept => unreachable!(),
            }
        }
    }
    println!(
        "ACCEPTANCE 5 PASS: QPSK MC within 3 sigma of theory at all 16 points (worst {worst_sigma:.2} sigma); Eve BER in [{eve_lo:.3}, {eve_hi:.3}]"
    );
}

#[test]
fn acceptance_06_positional_security() {
    let scenario = Scenario::reference();
    let h_b = scenario.array.steering_vector(&scenario.bob, 0.0);
    // the beam is several km deep in range and decorrelates in elevation
    // only above Bob (the response depends on cos psi), so the grids span
    // the full resolvable region and "off target" is defined by the
    // beampattern itself: |h_B^H h(pos)|^2 below 0.03
    let axes: [(SweepMetric, Vec<f64>, f64); 3] = [
        (
            SweepMetric::BerVsRange,
            (1..=60).map(|i| 200.0 * i as f64).collect(),
            1000.0,
        ),
        (
            SweepMetric::BerVsAzimuth,
            (0..=40)
                .map(|i| (-40.0f64 + 2.5 * i as f64).to_radians())
                .collect(),
            20f64.to_radians(),
        ),
        (
            SweepMetric::BerVsElevation,
            (0..=24).map(|i| (3.75 * i as f64).to_radians()).collect(),
            30f64.to_radians(),
        ),
    ];
    let mut report = Vec::new();
    for (axis_idx, (metric, grid, bob_coord)) in axes.into_iter().enumerate() {
        let spec = SweepSpec {
            metric,
            grid: grid.clone(),
            methods: vec![AnMethod::Sp],
            trials: 100_000,
            seed: 0xACCE_0006 + axis_idx as u64,
            modulation: Modulation::new(ModScheme::Psk, 4).unwrap(),
        };
        let res = run_ber_sweep(&scenario, &spec).unwrap();
        let min_point = res
            .points
            .iter()
            .min_by(|a, b| a.mc_value.partial_cmp(&b.mc_value).unwrap())
            .unwrap();
        assert!(
            (min_point.sweep_value - bob_coord).abs() < 1e-9,
            "{metric:?}: BER minimum at {} not at Bob's coordinate {bob_coord}",
            min_point.sweep_value
        );
        let bob_ber = min_point.mc_value.unwrap();
        // plateau: grid points whose steering response has decorrelated
        let decorrelated = |v: f64| {
            let pos = match metric {
                SweepMetric::BerVsRange => {
                    Position::new(v, scenario.bob.theta, scenario.bob.psi)
                }
                SweepMetric::BerVsAzimuth => Position::new(scenario.bob.r, v, scenario.bob.psi),
                _ => Position::new(scenario.bob.r, scenario.bob.theta, v),
            }
            .unwrap();
            let h = scenario.array.steering_vector(&pos, 0.0);
            h_b.inner(h.as_slice()).norm_sqr() < 0.03
        };
        let mut off: Vec<f64> = res
            .points
            .iter()
            .filter(|p| decorrelated(p.sweep_value))
            .map(|p| p.mc_value.unwrap())
            .collect();
        assert!(off.len() >= 6, "{metric:?}: only {} plateau points", off.len());
        off.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let plateau = off[off.len() / 2];
        assert!(
            (0.3..=0.6).contains(&plateau),
            "{metric:?}: plateau {plateau}"
        );
        assert!(
            bob_ber <= plateau / 100.0,
            "{metric:?}: Bob BER {bob_ber} not two orders below plateau {plateau}"
        );
        report.push(format!(
            "{metric:?}: Bob {bob_ber:.2e} vs plateau {plateau:.3} ({} pts)",
            off.len()
        ));
    }
    println!("ACCEPTANCE 6 PASS: {}", report.join("; "));
}

/// Shared grid runner for criteria 7 and 9.
fn secrecy_grid(
    metric: SweepMetric,
    r0: f64,
    trials: usize,
    seed: u64,
) -> Vec<(f64, f64, fdadm_core::montecarlo::SweepPoint)> {
    // lambda_B in {5,10,15,20} dB crossed with lambda_E in {0,10,20} dB
    let mut out = Vec::new();
    for &le in &[0.0, 10.0, 20.0] {
        let mut scenario = Scenario::reference();
        scenario.lambda_e_db = le;
        scenario.r0 = r0;
        let spec = SweepSpec {
            metric,
            grid: vec![5.0, 10.0, 15.0, 20.0],
            methods: vec![AnMethod::Sp],
            trials,
            seed: seed ^ (le as u64).wrapping_mul(0x9E37),
            modulation: Modulation::new(ModScheme::Psk, 4).unwrap(),
        };
        let res = run_secrecy_sweep(&scenario, &spec).unwrap();
        for p in res.points {
            out.push((p.sweep_value, le, p));
        }
    }
    out
}

#[test]
fn acceptance_07_secrecy_rate_series_vs_mc() {
    let rows = secrecy_grid(SweepMetric::SrVsLambdaB, 0.5, 100_000, 0xACCE_0007);
    let mut worst = 0.0f64;
    for (lb, le, p) in &rows {
        let mc = p.mc_value.unwrap();
        let an = p.analytic_value.unwrap();
        let tol = (3.0 * p.mc_stderr.unwrap()).max(0.05);
        let diff = (mc - an).abs();
        worst = worst.max(diff);
        assert!(
            diff <= tol,
            "lambda_B={lb} dB lambda_E={le} dB: |mc {mc:.4} - analytic {an:.4}| = {diff:.4} > {tol:.4}"
        );
    }
    // monotone in both averages (checked on the analytic surface)
    for &le in &[0.0, 10.0, 20.0] {
        let mut prev = f64::NEG_INFINITY;
        for (_, _, p) in rows.iter().filter(|(_, l, _)| *l == le) {
            let a = p.analytic_value.unwrap();
            assert!(a > prev, "SR not increasing in lambda_B at lambda_E={le}");
            prev = a;
        }
    }
    for &lb in &[5.0, 10.0, 15.0, 20.0] {
        let mut prev = f64::INFINITY;
        for &le in &[0.0, 10.0, 20.0] {
            let p = rows
                .iter()
                .find(|(b, l, _)| *b == lb && *l == le)
                .map(|(_, _, p)| p)
                .unwrap();
            let a = p.analytic_value.unwrap();
            assert!(a < prev, "SR not decreasing in lambda_E at lambda_B={lb}");
            prev = a;
        }
    }
    println!(
        "ACCEPTANCE 7 PASS: 12-point grid, max |analytic - MC| = {worst:.4} bits/s/Hz; monotone in both averages"
    );
}

#[test]
fn acceptance_08_secrecy_rate_lower_bound() {
    let mut scenario = Scenario::reference();
    scenario.lambda_e_db = 40.0;
    let spec = SweepSpec {
        metric: SweepMetric::SrVsLambdaE,
        grid: vec![40.0],
        methods: vec![AnMethod::Sp, AnMethod::NoAn],
        trials: 100_000,
        seed: 0xACCE_0008,
        modulation: Modulation::new(ModScheme::Psk, 4).unwrap(),
    };
    let res = run_secrecy_sweep(&scenario, &spec).unwrap();
    let sp = res
        .points
        .iter()
        .find(|p| p.method == AnMethod::Sp)
        .unwrap();
    let noan = res
        .points
        .iter()
        .find(|p| p.method == AnMethod::NoAn)
        .unwrap();
    let value = sp.analytic_value.unwrap();
    let bound = sp.bound_value.unwrap();
    let mc = sp.mc_value.unwrap();
    let noan_sr = noan.mc_value.unwrap();
    println!(
        "ACCEPTANCE 8 data: lambda_B=15 dB, lambda_E=40 dB: SR analytic {value:.4} (MC {mc:.4}), \
         lower bound {bound:.4}, gap {:.4}; NoAN SR {noan_sr:.4}",
        value - bound
    );
    assert!(value > bound, "SR {value} does not exceed its bound {bound}");
    assert!(noan_sr <= 0.1, "NoAN SR {noan_sr} at lambda_E = 40 dB");
    // The 0.05 ceiling is not reachable at this geometry: eve_gains gives
    // mu ~ 1.2e-3 for the pinned p2 (and ~1.3e-3 for the basis-averaged
    // ZF/null-space AN), so mu lambda_E ~ 12 at 40 dB and the saturation
    // gap stays near 0.09 for every lambda_B >= 5 dB (it would need
    // lambda_E ~ 46 dB, or twice the geometric mu, to shrink below 0.05).
    // The assertion is kept as stated; see the project notes.
    assert!(
        value - bound <= 0.05,
        "gap {:.4} exceeds 0.05 bits/s/Hz (geometry-limited: mu ~ 1.2e-3 makes \
         the 40 dB saturation gap ~0.09 regardless of lambda_B)",
        value - bound
    );
    println!(
        "ACCEPTANCE 8 PASS: at lambda_E=40 dB, SR {value:.4} vs lower bound {bound:.4} (gap {:.4}); NoAN SR {noan_sr:.4}",
        value - bound
    );
}

#[test]
fn acceptance_09_sop_series_bound_and_order() {
    let mut worst = 0.0f64;
    let mut rows0 = Vec::new();
    for (ri, r0) in [0.0, 0.5].into_iter().enumerate() {
        let rows = secrecy_grid(SweepMetric::SopVsLambdaB, r0, 100_000, 0xACCE_0009 + ri as u64);
        for (lb, le, p) in &rows {
            let mc = p.mc_value.unwrap();
            let an = p.analytic_value.unwrap();
            let ub = p.bound_value.unwrap();
            let tol = (3.0 * p.mc_stderr.unwrap()).max(0.01);
            let diff = (mc - an).abs();
            worst = worst.max(diff);
            assert!(
                diff <= tol,
                "r0={r0} lambda_B={lb} lambda_E={le}: |mc {mc:.4} - analytic {an:.4}| > {tol:.4}"
            );
            assert!(
                an <= ub + 1e-3,
                "r0={r0} lambda_B={lb} lambda_E={le}: SOP {an} above bound {ub}"
            );
        }
        if r0 == 0.0 {
            rows0 = rows;
        } else {
            // pointwise ordering in the target rate
            for ((_, _, p0), (_, _, p5)) in rows0.iter().zip(&rows) {
                assert!(
                    p0.analytic_value.unwrap() <= p5.analytic_value.unwrap() + 1e-12,
                    "SOP(r0=0) above SOP(r0=0.5)"
                );
            }
        }
    }
    // saturation toward the bound as Eve's average SNR grows
    let mut scenario = Scenario::reference();
    scenario.lambda_e_db = 40.0;
    scenario.r0 = 0.5;
    let spec = SweepSpec {
        metric: SweepMetric::SopVsLambdaE,
        grid: vec![40.0],
        methods: vec![AnMethod::Sp],
        trials: 100_000,
        seed: 0xACCE_0011,
        modulation: Modulation::new(ModScheme::Psk, 4).unwrap(),
    };
    let res = run_secrecy_sweep(&scenario, &spec).unwrap();
    let p = &res.points[0];
    let gap = (p.analytic_value.unwrap() - p.bound_value.unwrap()).abs();
    assert!(gap <= 0.01, "SOP vs upper bound gap {gap} at lambda_E = 40 dB");
    println!(
        "ACCEPTANCE 9 PASS: SOP grids r0 in {{0, 0.5}}, max |analytic - MC| = {worst:.4}; bound respected; saturation gap {gap:.4}"
    );
}

#[test]
fn acceptance_10_appendix_consistency() {
    // series terms vs direct quadrature of the defining integrals
    let scenario = Scenario::reference();
    let h_b = scenario.array.steering_vector(&scenario.bob, 0.0);
    let h_e = scenario.array.steering_vector(&scenario.eve, 0.0);
    let split = PowerSplit::from_beta1(0.9).unwrap();
    let pre = precoder::design_sp(&h_b).unwrap();
    let gains = eve_gains(&h_e, &pre, &split);

    let lb = db(15.0);
    let le = db(10.0);
    let ftr_b = scenario.fading_bob.at_avg_snr(lb, 1.0, 1.0).unwrap();
    let ftr_e = scenario.fading_eve.at_avg_snr(le, 1.0, 1.0).unwrap();
    let opts = SecrecyOptions::default();

    let sr = analytics::avg_secrecy_rate(&ftr_b, &ftr_e, split.beta1, &gains, &opts).unwrap();

    let dist_b = FtrDistribution::new(&ftr_b, &opts.series).unwrap();
    let dist_e = FtrDistribution::new(&ftr_e, &opts.series).unwrap();
    let quad = QuadratureOptions::new(1e-10, 4000).unwrap();
    let ln2 = std::f64::consts::LN_2;

    // I1 = 1/ln2 int ln(1+x) f_gammaB(x) F_gammaE(x) dx over [0, inf)
    let f_i1 = |x: f64| {
        x.ln_1p()
            * gamma_b_pdf_with(&dist_b, x, split.beta1).unwrap()
            * gamma_e_cdf_with(&dist_e, x, &gains).unwrap()
    };
    let i1 = integrate_to_inf(&f_i1, 0.0, &quad).unwrap() / ln2;
    assert!(
        (i1 - sr.i1).abs() <= 1e-4,
        "I1 series {} vs quadrature {i1}",
        sr.i1
    );

    // I2 = 1/ln2 int ln(1+x) f_gammaE(x) F_gammaB(x) dx over [0, tau)
    let f_i2 = |x: f64| {
        x.ln_1p()
            * gamma_e_pdf_with(&dist_e, x, &gains).unwrap()
            * dist_b.cdf(x / (split.beta1 * split.beta1))
    };
    let i2 = integrate(&f_i2, 0.0, gains.tau, &quad).unwrap() / ln2;
    assert!(
        (i2 - sr.i2).abs() <= 1e-4,
        "I2 series {} vs quadrature {i2}",
        sr.i2
    );

    // I3 = 1/ln2 int ln(1+x) f_gammaE(x) dx over [0, tau)
    let f_i3 = |x: f64| x.ln_1p() * gamma_e_pdf_with(&dist_e, x, &gains).unwrap();
    let i3 = integrate(&f_i3, 0.0, gains.tau, &quad).unwrap() / ln2;
    assert!(
        (i3 - sr.i3).abs() <= 1e-4,
        "I3 series {} vs quadrature {i3}",
        sr.i3
    );

    // SOP = int F_gammaB(2^{r0}(1+y) - 1) f_gammaE(y) dy over [0, tau)
    let r0 = 0.5;
    let sop = analytics::sop(&ftr_b, &ftr_e, split.beta1, &gains, r0, &opts).unwrap();
    let f_sop = |y: f64| {
        let thr = 2f64.powf(r0) * (1.0 + y) - 1.0;
        dist_b.cdf(thr / (split.beta1 * split.beta1))
            * gamma_e_pdf_with(&dist_e, y, &gains).unwrap()
    };
    let sop_quad = integrate(&f_sop, 0.0, gains.tau, &quad).unwrap();
    assert!(
        (sop_quad - sop.value).abs() <= 1e-4,
        "SOP series {} vs quadrature {sop_quad}",
        sop.value
    );

    println!(
        "ACCEPTANCE 10 PASS: I1 {:.6}/{:.6}, I2 {:.6}/{:.6}, I3 {:.6}/{:.6}, SOP {:.6}/{:.6} (series/quadrature)",
        sr.i1, i1, sr.i2, i2, sr.i3, i3, sop.value, sop_quad
    );
}
