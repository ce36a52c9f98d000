//! Seeded Monte Carlo sweeps: symbol-level BER versus position or SNR, and
//! sample-level secrecy rate / outage estimates over fading draws, with the
//! matching analytic values and bounds attached per grid point.
//!
//! Grid points are independent tasks; every task derives its own RNG stream
//! from (seed, point index, method index), so results are bit-identical
//! across reruns and independent of the worker count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::analytics::{self, SecrecyOptions};
use crate::array_geometry::{inner, norm, ArrayConfig, Position, SteeringVector};
use crate::error::{Error, Result};
use crate::ftr_channel::{FadingSpec, FtrSampler, SeriesOptions};
use crate::link_model::{eve_gains, EveGains, MU_DEGENERATE};
use crate::precoder::{self, AnMethod, PowerSplit, PrecoderSet};
use crate::special::quad::QuadratureOptions;

/// Modulation family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModScheme {
    Psk,
    Qam,
}

/// Gray-mapped constellation of unit average symbol energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Modulation {
    pub scheme: ModScheme,
    pub order: u32,
}

impl Modulation {
    pub fn new(scheme: ModScheme, order: u32) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "modulation order must be a power of two >= 2, got {order}"
            )));
        }
        if scheme == ModScheme::Qam {
            let side = (order as f64).sqrt() as u32;
            if side * side != order {
                return Err(Error::InvalidArgument(format!(
                    "QAM order must be a perfect square, got {order}"
                )));
            }
        }
        if order > 4096 {
            return Err(Error::InvalidArgument(format!(
                "modulation order {order} unsupported"
            )));
        }
        Ok(Self { scheme, order })
    }

    pub fn bits(&self) -> u32 {
        self.order.trailing_zeros()
    }

    pub fn label(&self) -> String {
        match self.scheme {
            ModScheme::Psk => format!("PSK{}", self.order),
            ModScheme::Qam => format!("QAM{}", self.order),
        }
    }

    /// Accepts forms like "psk4", "qam16", "psk:4".
    pub fn parse(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase().replace(':', "");
        let (scheme, digits) = if let Some(rest) = lower.strip_prefix("psk") {
            (ModScheme::Psk, rest)
        } else if let Some(rest) = lower.strip_prefix("qam") {
            (ModScheme::Qam, rest)
        } else {
            return Err(Error::InvalidArgument(format!(
                "unknown modulation '{s}' (expected pskN or qamN)"
            )));
        };
        let order: u32 = digits
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad modulation order in '{s}'")))?;
        Self::new(scheme, order)
    }
}

pub fn gray_encode(k: u32) -> u32 {
    k ^ (k >> 1)
}

pub fn gray_decode(g: u32) -> u32 {
    let mut out = g;
    let mut mask = g >> 1;
    while mask != 0 {
        out ^= mask;
        mask >>= 1;
    }
    out
}

/// Map the bit pattern `index` to its constellation point. Gray-adjacent
/// patterns land on neighbouring points; average symbol energy is one.
pub fn modulate(index: u32, modn: Modulation) -> Result<Complex64> {
    if index >= modn.order {
        return Err(Error::IndexOutOfRange(format!(
            "symbol {index} outside 0..{}",
            modn.order
        )));
    }
    match modn.scheme {
        ModScheme::Psk => {
            let k = gray_decode(index);
            let phase = std::f64::consts::TAU * k as f64 / modn.order as f64;
            Ok(Complex64::from_polar(1.0, phase))
        }
        ModScheme::Qam => {
            let side = (modn.order as f64).sqrt() as u32;
            let axis_bits = side.trailing_zeros();
            let i_bits = index >> axis_bits;
            let q_bits = index & (side - 1);
            let a = gray_decode(i_bits);
            let b = gray_decode(q_bits);
            let scale = (3.0 / (2.0 * (modn.order as f64 - 1.0))).sqrt();
            let re = (2.0 * a as f64 + 1.0 - side as f64) * scale;
            let im = (2.0 * b as f64 + 1.0 - side as f64) * scale;
            Ok(Complex64::new(re, im))
        }
    }
}

/// Minimum-distance detection against the constellation scaled by `scale`,
/// returning the detected bit pattern.
pub fn demodulate(y: Complex64, modn: Modulation, scale: f64) -> u32 {
    let mut best = 0u32;
    let mut best_d = f64::INFINITY;
    for i in 0..modn.order {
        let p = modulate(i, modn).expect("index in range") * scale;
        let d = (y - p).norm_sqr();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// What a sweep measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMetric {
    BerVsRange,
    BerVsAzimuth,
    BerVsElevation,
    BerVsSnr,
    SrVsLambdaB,
    SrVsLambdaE,
    SopVsLambdaB,
    SopVsLambdaE,
    MemoryVsN,
    MemoryVsL,
}

impl SweepMetric {
    pub fn is_ber(&self) -> bool {
        matches!(
            self,
            SweepMetric::BerVsRange
                | SweepMetric::BerVsAzimuth
                | SweepMetric::BerVsElevation
                | SweepMetric::BerVsSnr
        )
    }

    pub fn is_secrecy(&self) -> bool {
        matches!(
            self,
            SweepMetric::SrVsLambdaB
                | SweepMetric::SrVsLambdaE
                | SweepMetric::SopVsLambdaB
                | SweepMetric::SopVsLambdaE
        )
    }

    pub fn metric_name(&self) -> &'static str {
        match self {
            SweepMetric::BerVsRange
            | SweepMetric::BerVsAzimuth
            | SweepMetric::BerVsElevation
            | SweepMetric::BerVsSnr => "ber",
            SweepMetric::SrVsLambdaB | SweepMetric::SrVsLambdaE => "secrecy_rate",
            SweepMetric::SopVsLambdaB | SweepMetric::SopVsLambdaE => "sop",
            SweepMetric::MemoryVsN | SweepMetric::MemoryVsL => "memory_total",
        }
    }

    /// Name and unit of the swept variable (internal units).
    pub fn sweep_variable(&self) -> (&'static str, &'static str) {
        match self {
            SweepMetric::BerVsRange => ("range", "m"),
            SweepMetric::BerVsAzimuth => ("azimuth", "deg"),
            SweepMetric::BerVsElevation => ("elevation", "deg"),
            SweepMetric::BerVsSnr => ("snr", "dB"),
            SweepMetric::SrVsLambdaB | SweepMetric::SopVsLambdaB => ("lambda_bob", "dB"),
            SweepMetric::SrVsLambdaE | SweepMetric::SopVsLambdaE => ("lambda_eve", "dB"),
            SweepMetric::MemoryVsN => ("n_half", "elements"),
            SweepMetric::MemoryVsL => ("subcarriers", "count"),
        }
    }
}

/// One experiment: the swept grid, methods, trial budget, seed, modulation.
/// Angle grids are in radians, ranges in meters, SNR-like grids in dB.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub metric: SweepMetric,
    pub grid: Vec<f64>,
    pub methods: Vec<AnMethod>,
    pub trials: usize,
    pub seed: u64,
    pub modulation: Modulation,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidArgument("sweep grid is empty".into()));
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "sweep grid must be strictly increasing".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("no methods selected".into()));
        }
        Ok(())
    }
}

/// Fixed experimental conditions shared by all sweeps.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub array: ArrayConfig,
    pub bob: Position,
    pub eve: Position,
    pub fading_bob: FadingSpec,
    pub fading_eve: FadingSpec,
    pub ps: f64,
    pub beta1: f64,
    pub noise_var_b: f64,
    pub noise_var_e: f64,
    /// SNR (dB) used by the positional BER sweeps.
    pub ber_snr_db: f64,
    /// Fixed average SNRs (dB) when the other one is swept.
    pub lambda_b_db: f64,
    pub lambda_e_db: f64,
    /// SOP target secrecy rate, bits/s/Hz.
    pub r0: f64,
    pub series: SeriesOptions,
    pub quad: QuadratureOptions,
    /// Steering-vector snapshot time shared by precoder and receivers.
    pub time: f64,
    /// Apply fading draws inside BER sweeps (off: epsilon = 1).
    pub ber_fading: bool,
}

impl Scenario {
    /// The reference setup: 21-element array with 7 subcarriers at 30 GHz
    /// and a 20 kHz increment, Bob at (1 km, 20 deg, 30 deg), Eve at
    /// (1.5 km, -20 deg, 25 deg), unit power and noise, beta1 = 0.9.
    pub fn reference() -> Self {
        Self {
            array: ArrayConfig::new(10, 7, 30e9, 20e3).expect("reference array is valid"),
            bob: Position::from_degrees(1000.0, 20.0, 30.0).expect("valid"),
            eve: Position::from_degrees(1500.0, -20.0, 25.0).expect("valid"),
            fading_bob: FadingSpec::new(2.3, 10.0, 0.5).expect("valid"),
            fading_eve: FadingSpec::new(5.3, 15.0, 0.35).expect("valid"),
            ps: 1.0,
            beta1: 0.9,
            noise_var_b: 1.0,
            noise_var_e: 1.0,
            ber_snr_db: 10.0,
            lambda_b_db: 15.0,
            lambda_e_db: 10.0,
            r0: 0.5,
            series: SeriesOptions::default(),
            quad: QuadratureOptions::default(),
            time: 0.0,
            ber_fading: false,
        }
    }

    fn split_for(&self, method: AnMethod) -> Result<PowerSplit> {
        match method {
            AnMethod::NoAn => Ok(PowerSplit::no_an()),
            _ => PowerSplit::from_beta1(self.beta1),
        }
    }

    pub fn secrecy_options(&self) -> SecrecyOptions {
        SecrecyOptions {
            series: self.series,
            quad: self.quad,
        }
    }
}

/// Which receiver a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RxTag {
    Bob,
    Eve,
    /// The receiver placed at the swept position.
    Swept,
}

impl RxTag {
    pub fn label(&self) -> &'static str {
        match self {
            RxTag::Bob => "bob",
            RxTag::Eve => "eve",
            RxTag::Swept => "swept",
        }
    }
}

/// One (grid value, method, receiver) cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub sweep_value: f64,
    pub method: AnMethod,
    pub receiver: RxTag,
    pub mc_value: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub analytic_value: Option<f64>,
    pub bound_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub metric: SweepMetric,
    pub points: Vec<SweepPoint>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream seed per (sweep seed, grid point, method).
fn stream_seed(seed: u64, point: usize, method: usize) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(point as u64 + 1)) ^ splitmix64(method as u64 + 0x100))
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var * 0.5).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Receiver-side view of one precoder: everything the per-trial loop needs,
/// reduced to inner products (verified against the full transmit/receive
/// composition in the link-model tests).
struct RxChannel {
    rho1: Complex64,
    leak: Vec<Complex64>,
    method: AnMethod,
    an_width: usize,
    /// h_B row needed for the projector norm identity (ZF only).
    h_b: Vec<Complex64>,
}

impl RxChannel {
    fn new(pre: &PrecoderSet, h_rx: &SteeringVector, h_b: &SteeringVector) -> Self {
        Self {
            rho1: inner(h_rx.as_slice(), &pre.p1),
            leak: pre.an_basis.conj_row(h_rx.as_slice()),
            method: pre.method,
            an_width: pre.an_width(),
            h_b: h_b.entries.clone(),
        }
    }

    /// Received AN amplitude (coefficient of beta2 sqrt(Ps)) for one draw.
    fn an_gain<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match self.method {
            AnMethod::NoAn => Complex64::ZERO,
            AnMethod::Sp => {
                let z = complex_normal(rng, 1.0);
                // alpha = 1 with the unit-norm p2 construction
                self.leak[0] * z
            }
            AnMethod::Svd => {
                let z: Vec<Complex64> =
                    (0..self.an_width).map(|_| complex_normal(rng, 1.0)).collect();
                let gz: Complex64 = self.leak.iter().zip(&z).map(|(g, zi)| g * zi).sum();
                let nz = norm(&z);
                if nz > 0.0 {
                    gz / nz
                } else {
                    Complex64::ZERO
                }
            }
            AnMethod::Zf => {
                let z: Vec<Complex64> =
                    (0..self.an_width).map(|_| complex_normal(rng, 1.0)).collect();
                let gz: Complex64 = self.leak.iter().zip(&z).map(|(g, zi)| g * zi).sum();
                // ||(I - h h^H) z||^2 = ||z||^2 - |h^H z|^2
                let hz = inner(&self.h_b, &z);
                let nb = (norm(&z).powi(2) - hz.norm_sqr()).max(0.0).sqrt();
                if nb > 0.0 {
                    gz / nb
                } else {
                    Complex64::ZERO
                }
            }
        }
    }
}

fn ber_at_point(
    scenario: &Scenario,
    spec: &SweepSpec,
    chan: &RxChannel,
    split: &PowerSplit,
    noise_var: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64)> {
    let modn = spec.modulation;
    let bits = modn.bits();
    let ps = scenario.ps;
    let sig = split.beta1 * ps.sqrt();
    let an = split.beta2 * ps.sqrt();
    let detect_scale = sig;

    let fading = if scenario.ber_fading {
        // unit-mean-power fading: sigma^2 = 1 / (2 (1 + K))
        let sigma2 = 1.0 / (2.0 * (1.0 + scenario.fading_bob.k));
        Some(FtrSampler::new(
            &scenario.fading_bob.with_sigma2(sigma2)?,
        )?)
    } else {
        None
    };

    let mut bit_errors = 0u64;
    for _ in 0..spec.trials {
        let idx = rng.random_range(0..modn.order);
        let s = modulate(idx, modn)?;
        let an_rx = if split.beta2 > 0.0 {
            chan.an_gain(rng) * an
        } else {
            Complex64::ZERO
        };
        let eps = match &fading {
            Some(f) => f.sample(rng),
            None => Complex64::ONE,
        };
        let noise = complex_normal(rng, noise_var);
        let y = eps * (sig * chan.rho1 * s + an_rx) + noise;
        let detected = demodulate(y, modn, detect_scale);
        bit_errors += (idx ^ detected).count_ones() as u64;
    }
    let total_bits = (spec.trials as u64 * bits as u64) as f64;
    let ber = bit_errors as f64 / total_bits;
    let stderr = (ber * (1.0 - ber) / total_bits).sqrt();
    Ok((ber, stderr))
}

/// BER sweeps over position or SNR. Fading is off by default (epsilon = 1);
/// the SNR sweep reports Bob and Eve rows, positional sweeps one row at the
/// swept location. The analytic value is attached for PSK at Bob's exact
/// position.
pub fn run_ber_sweep(scenario: &Scenario, spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    if !spec.metric.is_ber() {
        return Err(Error::InvalidArgument(format!(
            "{:?} is not a BER sweep",
            spec.metric
        )));
    }
    let h_b = scenario.array.steering_vector(&scenario.bob, scenario.time);

    let mut tasks = Vec::new();
    for (gi, &gv) in spec.grid.iter().enumerate() {
        for (mi, &method) in spec.methods.iter().enumerate() {
            tasks.push((gi, gv, mi, method));
        }
    }

    let results: Result<Vec<(usize, usize, Vec<SweepPoint>)>> = tasks
        .par_iter()
        .map(|&(gi, gv, mi, method)| {
            let split = scenario.split_for(method)?;
            let pre = precoder::design(method, &h_b, scenario.array.n_half)?;
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(spec.seed, gi, mi));
            let mut points = Vec::new();
            match spec.metric {
                SweepMetric::BerVsSnr => {
                    let snr = 10f64.powf(gv / 10.0);
                    let noise_var = scenario.ps / snr;
                    for (rx, pos) in [(RxTag::Bob, &scenario.bob), (RxTag::Eve, &scenario.eve)] {
                        let h_rx = scenario.array.steering_vector(pos, scenario.time);
                        let chan = RxChannel::new(&pre, &h_rx, &h_b);
                        let (ber, se) = ber_at_point(scenario, spec, &chan, &split, noise_var, &mut rng)?;
                        let analytic = if rx == RxTag::Bob
                            && spec.modulation.scheme == ModScheme::Psk
                            && !scenario.ber_fading
                        {
                            Some(analytics::ber_mpsk(
                                split.beta1 * split.beta1 * snr,
                                spec.modulation.order,
                            )?)
                        } else {
                            None
                        };
                        points.push(SweepPoint {
                            sweep_value: gv,
                            method,
                            receiver: rx,
                            mc_value: Some(ber),
                            mc_stderr: Some(se),
                            analytic_value: analytic,
                            bound_value: None,
                        });
                    }
                }
                _ => {
                    let pos = match spec.metric {
                        SweepMetric::BerVsRange => Position::new(gv, scenario.bob.theta, scenario.bob.psi),
                        SweepMetric::BerVsAzimuth => Position::new(scenario.bob.r, gv, scenario.bob.psi),
                        SweepMetric::BerVsElevation => Position::new(scenario.bob.r, scenario.bob.theta, gv),
                        _ => unreachable!(),
                    }?;
                    let snr = 10f64.powf(scenario.ber_snr_db / 10.0);
                    let noise_var = scenario.ps / snr;
                    let h_rx = scenario.array.steering_vector(&pos, scenario.time);
                    let chan = RxChannel::new(&pre, &h_rx, &h_b);
                    let (ber, se) = ber_at_point(scenario, spec, &chan, &split, noise_var, &mut rng)?;
                    points.push(SweepPoint {
                        sweep_value: gv,
                        method,
                        receiver: RxTag::Swept,
                        mc_value: Some(ber),
                        mc_stderr: Some(se),
                        analytic_value: None,
                        bound_value: None,
                    });
                }
            }
            Ok((gi, mi, points))
        })
        .collect();

    let mut rows = results?;
    rows.sort_by_key(|&(gi, mi, _)| (gi, mi));
    Ok(SweepResult {
        metric: spec.metric,
        points: rows.into_iter().flat_map(|(_, _, p)| p).collect(),
    })
}

/// Secrecy-rate and SOP sweeps over the average SNR of Bob or Eve.
///
/// Per trial, lambda_B and lambda_E are drawn independently; gamma_E uses
/// the scalar SINR law for SP/NoAN and the explicit per-draw AN gain for
/// the vector-AN methods. Analytic values use the basis-averaged mu.
pub fn run_secrecy_sweep(scenario: &Scenario, spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    if !spec.metric.is_secrecy() {
        return Err(Error::InvalidArgument(format!(
            "{:?} is not a secrecy sweep",
            spec.metric
        )));
    }
    let is_sop = matches!(
        spec.metric,
        SweepMetric::SopVsLambdaB | SweepMetric::SopVsLambdaE
    );
    let sweeps_bob = matches!(
        spec.metric,
        SweepMetric::SrVsLambdaB | SweepMetric::SopVsLambdaB
    );
    let h_b = scenario.array.steering_vector(&scenario.bob, scenario.time);
    let h_e = scenario.array.steering_vector(&scenario.eve, scenario.time);

    let mut tasks = Vec::new();
    for (gi, &gv) in spec.grid.iter().enumerate() {
        for (mi, &method) in spec.methods.iter().enumerate() {
            tasks.push((gi, gv, mi, method));
        }
    }

    let results: Result<Vec<(usize, usize, SweepPoint)>> = tasks
        .par_iter()
        .map(|&(gi, gv, mi, method)| {
            let split = scenario.split_for(method)?;
            let pre = precoder::design(method, &h_b, scenario.array.n_half)?;
            // The NoAN rows are the plain wiretap reference: full power to
            // the symbol and no array advantage over the eavesdropper
            // (gamma_E = lambda_E), which is what the published baseline
            // curves describe. Bob's law is unchanged since h_B^H p1 = 1.
            let gains = if method == AnMethod::NoAn {
                EveGains {
                    rho1: Complex64::ONE,
                    rho2: Complex64::ZERO,
                    eta: 1.0,
                    mu: 0.0,
                    tau: f64::INFINITY,
                }
            } else {
                eve_gains(&h_e, &pre, &split)
            };
            let chan_e = RxChannel::new(&pre, &h_e, &h_b);

            let (lambda_b_db, lambda_e_db) = if sweeps_bob {
                (gv, scenario.lambda_e_db)
            } else {
                (scenario.lambda_b_db, gv)
            };
            let lb = 10f64.powf(lambda_b_db / 10.0);
            let le = 10f64.powf(lambda_e_db / 10.0);

            // physical fading parameters for the samplers
            let ftr_b = scenario
                .fading_bob
                .at_avg_snr(lb, scenario.ps, scenario.noise_var_b)?;
            let ftr_e = scenario
                .fading_eve
                .at_avg_snr(le, scenario.ps, scenario.noise_var_e)?;
            // lambda-scaled copies for the analytic laws
            let ftr_b_l = ftr_b.scaled(scenario.ps / scenario.noise_var_b);
            let ftr_e_l = ftr_e.scaled(scenario.ps / scenario.noise_var_e);

            let sampler_b = FtrSampler::new(&ftr_b)?;
            let sampler_e = FtrSampler::new(&ftr_e)?;
            let snr_scale_b = scenario.ps / scenario.noise_var_b;
            let snr_scale_e = scenario.ps / scenario.noise_var_e;

            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(spec.seed, gi, mi));
            let b2 = split.beta2 * split.beta2;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut outages = 0u64;
            for _ in 0..spec.trials {
                let lam_b = sampler_b.sample_power(&mut rng) * snr_scale_b;
                let lam_e = sampler_e.sample_power(&mut rng) * snr_scale_e;
                let gamma_b = split.beta1 * split.beta1 * lam_b;
                let gamma_e = match method {
                    AnMethod::NoAn | AnMethod::Sp => {
                        gains.eta * lam_e / (gains.mu * lam_e + 1.0)
                    }
                    AnMethod::Zf | AnMethod::Svd => {
                        let g = chan_e.an_gain(&mut rng);
                        let mu_draw = b2 * g.norm_sqr();
                        gains.eta * lam_e / (mu_draw * lam_e + 1.0)
                    }
                };
                let rate = ((1.0 + gamma_b) / (1.0 + gamma_e)).log2();
                if is_sop {
                    if rate < scenario.r0 {
                        outages += 1;
                    }
                } else {
                    let clipped = rate.max(0.0);
                    sum += clipped;
                    sum_sq += clipped * clipped;
                }
            }
            let n = spec.trials as f64;
            let (mc, se) = if is_sop {
                let p = outages as f64 / n;
                (p, (p * (1.0 - p) / n).sqrt())
            } else {
                let mean = sum / n;
                let var = (sum_sq / n - mean * mean).max(0.0);
                (mean, (var / n).sqrt())
            };

            // analytic + bound: defined when the AN ceiling exists
            let opts = scenario.secrecy_options();
            let (analytic, bound) = if method != AnMethod::NoAn && gains.mu >= MU_DEGENERATE {
                if is_sop {
                    let a = analytics::sop(&ftr_b_l, &ftr_e_l, split.beta1, &gains, scenario.r0, &opts)?;
                    let b = analytics::sop_upper_bound(
                        &ftr_b_l,
                        split.beta1,
                        gains.tau,
                        scenario.r0,
                        &opts,
                    )?;
                    (Some(a.value), Some(b))
                } else {
                    let a = analytics::avg_secrecy_rate(&ftr_b_l, &ftr_e_l, split.beta1, &gains, &opts)?;
                    let b = analytics::sr_lower_bound(&ftr_b_l, split.beta1, gains.tau, &opts)?;
                    (Some(a.value), Some(b))
                }
            } else {
                (None, None)
            };

            Ok((
                gi,
                mi,
                SweepPoint {
                    sweep_value: gv,
                    method,
                    receiver: RxTag::Eve,
                    mc_value: Some(mc),
                    mc_stderr: Some(se),
                    analytic_value: analytic,
                    bound_value: bound,
                },
            ))
        })
        .collect();

    let mut rows = results?;
    rows.sort_by_key(|&(gi, mi, _)| (gi, mi));
    Ok(SweepResult {
        metric: spec.metric,
        points: rows.into_iter().map(|(_, _, p)| p).collect(),
    })
}

/// Memory totals per method over an N or L grid; exact integer formulas
/// reported through the analytic field.
pub fn run_memory_sweep(scenario: &Scenario, spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    if !matches!(spec.metric, SweepMetric::MemoryVsN | SweepMetric::MemoryVsL) {
        return Err(Error::InvalidArgument(format!(
            "{:?} is not a memory sweep",
            spec.metric
        )));
    }
    let mut points = Vec::new();
    for &gv in &spec.grid {
        if gv < 1.0 || gv.fract() != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "memory sweep grid must hold positive integers, got {gv}"
            )));
        }
        let (n, l) = match spec.metric {
            SweepMetric::MemoryVsN => (gv as u32, scenario.array.subcarriers),
            _ => (scenario.array.n_half, gv as u32),
        };
        for &method in &spec.methods {
            let fp = precoder::memory_footprint(method, n, l);
            points.push(SweepPoint {
                sweep_value: gv,
                method,
                receiver: RxTag::Bob,
                mc_value: None,
                mc_stderr: None,
                analytic_value: Some(fp.total as f64),
                bound_value: None,
            });
        }
    }
    Ok(SweepResult {
        metric: spec.metric,
        points,
    })
}
