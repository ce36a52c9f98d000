//! Flat key-value experiment configuration.
//!
//! The format is line-oriented `section.key = value` pairs with `#`
//! comments. Loading starts from the built-in defaults, applies the file,
//! then any `--set` overrides. `dump()` emits the canonical form: fixed key
//! order, shortest round-trip float formatting, one pair per line — so
//! dump -> load -> dump is byte-identical and the canonical text is what
//! gets hashed into output records.

use fdadm_core::array_geometry::{ArrayConfig, Position, SPEED_OF_LIGHT};
use fdadm_core::ftr_channel::{FadingSpec, SeriesOptions};
use fdadm_core::montecarlo::{ModScheme, Modulation, Scenario};
use fdadm_core::special::quad::QuadratureOptions;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_half: u32,
    pub subcarriers: u32,
    pub f0_hz: f64,
    pub delta_f_hz: f64,
    /// Element spacing; NaN selects the half-wavelength default.
    pub spacing_m: f64,
    pub c: f64,
    pub bob_range_m: f64,
    pub bob_azimuth_deg: f64,
    pub bob_elevation_deg: f64,
    pub eve_range_m: f64,
    pub eve_azimuth_deg: f64,
    pub eve_elevation_deg: f64,
    pub ftr_bob_m: f64,
    pub ftr_bob_k: f64,
    pub ftr_bob_delta: f64,
    pub ftr_eve_m: f64,
    pub ftr_eve_k: f64,
    pub ftr_eve_delta: f64,
    pub ps: f64,
    pub beta1: f64,
    pub noise_var_b: f64,
    pub noise_var_e: f64,
    pub ber_snr_db: f64,
    pub lambda_bob_db: f64,
    pub lambda_eve_db: f64,
    pub r0: f64,
    pub series_max_terms: usize,
    pub series_rel_tol: f64,
    pub quad_rel_tol: f64,
    pub quad_max_subdivisions: usize,
    pub trials: usize,
    pub seed: u64,
    pub mod_scheme: String,
    pub mod_order: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_half: 10,
            subcarriers: 7,
            f0_hz: 30e9,
            delta_f_hz: 20e3,
            spacing_m: SPEED_OF_LIGHT / (2.0 * 30e9),
            c: SPEED_OF_LIGHT,
            bob_range_m: 1000.0,
            bob_azimuth_deg: 20.0,
            bob_elevation_deg: 30.0,
            eve_range_m: 1500.0,
            eve_azimuth_deg: -20.0,
            eve_elevation_deg: 25.0,
            ftr_bob_m: 2.3,
            ftr_bob_k: 10.0,
            ftr_bob_delta: 0.5,
            ftr_eve_m: 5.3,
            ftr_eve_k: 15.0,
            ftr_eve_delta: 0.35,
            ps: 1.0,
            beta1: 0.9,
            noise_var_b: 1.0,
            noise_var_e: 1.0,
            ber_snr_db: 10.0,
            lambda_bob_db: 15.0,
            lambda_eve_db: 10.0,
            r0: 0.5,
            series_max_terms: SeriesOptions::default().max_terms,
            series_rel_tol: SeriesOptions::default().rel_tol,
            quad_rel_tol: QuadratureOptions::default().rel_tol,
            quad_max_subdivisions: QuadratureOptions::default().max_subdivisions,
            trials: 100_000,
            seed: 42,
            mod_scheme: "psk".into(),
            mod_order: 4,
        }
    }
}

macro_rules! config_keys {
    ($cfg:ident, $f:ident) => {
        $f!("array.n_half", n_half, u32);
        $f!("array.subcarriers", subcarriers, u32);
        $f!("array.f0_hz", f0_hz, f64);
        $f!("array.delta_f_hz", delta_f_hz, f64);
        $f!("array.spacing_m", spacing_m, f64);
        $f!("array.c", c, f64);
        $f!("bob.range_m", bob_range_m, f64);
        $f!("bob.azimuth_deg", bob_azimuth_deg, f64);
        $f!("bob.elevation_deg", bob_elevation_deg, f64);
        $f!("eve.range_m", eve_range_m, f64);
        $f!("eve.azimuth_deg", eve_azimuth_deg, f64);
        $f!("eve.elevation_deg", eve_elevation_deg, f64);
        $f!("ftr_bob.m", ftr_bob_m, f64);
        $f!("ftr_bob.k", ftr_bob_k, f64);
        $f!("ftr_bob.delta", ftr_bob_delta, f64);
        $f!("ftr_eve.m", ftr_eve_m, f64);
        $f!("ftr_eve.k", ftr_eve_k, f64);
        $f!("ftr_eve.delta", ftr_eve_delta, f64);
        $f!("power.ps", ps, f64);
        $f!("power.beta1", beta1, f64);
        $f!("power.noise_var_b", noise_var_b, f64);
        $f!("power.noise_var_e", noise_var_e, f64);
        $f!("snr.ber_snr_db", ber_snr_db, f64);
        $f!("snr.lambda_bob_db", lambda_bob_db, f64);
        $f!("snr.lambda_eve_db", lambda_eve_db, f64);
        $f!("sop.r0", r0, f64);
        $f!("series.max_terms", series_max_terms, usize);
        $f!("series.rel_tol", series_rel_tol, f64);
        $f!("quadrature.rel_tol", quad_rel_tol, f64);
        $f!("quadrature.max_subdivisions", quad_max_subdivisions, usize);
        $f!("mc.trials", trials, usize);
        $f!("mc.seed", seed, u64);
        $f!("modulation.scheme", mod_scheme, String);
        $f!("modulation.order", mod_order, u32);
    };
}

impl ExperimentConfig {
    /// Canonical text form; stable key order, round-trip float formatting.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        macro_rules! emit {
            ($key:expr, $field:ident, $ty:ty) => {
                out.push_str($key);
                out.push_str(" = ");
                out.push_str(&self.$field.to_string());
                out.push('\n');
            };
        }
        config_keys!(self, emit);
        out
    }

    /// Apply one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        macro_rules! apply {
            ($key:expr, $field:ident, $ty:ty) => {
                if key == $key {
                    self.$field = value
                        .parse::<$ty>()
                        .map_err(|e| format!("{key}: cannot parse '{value}': {e}"))?;
                    return Ok(());
                }
            };
        }
        config_keys!(self, apply);
        Err(format!("unknown configuration key '{key}'"))
    }

    /// Parse config text over the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected 'key = value'", lineno + 1))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(())
    }

    /// FNV-1a 64 over the canonical dump, as 16 hex digits.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.dump().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    pub fn modulation(&self) -> Result<Modulation, String> {
        let scheme = match self.mod_scheme.to_ascii_lowercase().as_str() {
            "psk" => ModScheme::Psk,
            "qam" => ModScheme::Qam,
            other => return Err(format!("modulation.scheme must be psk or qam, got '{other}'")),
        };
        Modulation::new(scheme, self.mod_order).map_err(|e| e.to_string())
    }

    /// Build the runtime scenario (validates every component).
    pub fn scenario(&self) -> Result<Scenario, String> {
        let array = ArrayConfig::with_spacing(
            self.n_half,
            self.subcarriers,
            self.f0_hz,
            self.delta_f_hz,
            self.spacing_m,
            self.c,
        )
        .map_err(|e| format!("array: {e}"))?;
        if array.increment_ratio() > 1e-4 {
            eprintln!(
                "warning: max frequency increment is {:.2e} of f0; the far-field \
                 approximation is degrading",
                array.increment_ratio()
            );
        }
        let bob = Position::from_degrees(
            self.bob_range_m,
            self.bob_azimuth_deg,
            self.bob_elevation_deg,
        )
        .map_err(|e| format!("bob: {e}"))?;
        let eve = Position::from_degrees(
            self.eve_range_m,
            self.eve_azimuth_deg,
            self.eve_elevation_deg,
        )
        .map_err(|e| format!("eve: {e}"))?;
        let fading_bob = FadingSpec::new(self.ftr_bob_m, self.ftr_bob_k, self.ftr_bob_delta)
            .map_err(|e| format!("ftr_bob: {e}"))?;
        let fading_eve = FadingSpec::new(self.ftr_eve_m, self.ftr_eve_k, self.ftr_eve_delta)
            .map_err(|e| format!("ftr_eve: {e}"))?;
        if fading_bob.delta >= 1.0 - 1e-9 || fading_eve.delta >= 1.0 - 1e-9 {
            eprintln!(
                "warning: Delta at the balanced-ray limit is evaluated at 1 - 1e-9"
            );
        }
        if !(self.ps > 0.0) || !(self.noise_var_b > 0.0) || !(self.noise_var_e > 0.0) {
            return Err("power: ps and noise variances must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.beta1) {
            return Err(format!("power.beta1 must be in [0, 1], got {}", self.beta1));
        }
        let series = SeriesOptions::new(self.series_max_terms, self.series_rel_tol)
            .map_err(|e| format!("series: {e}"))?;
        let quad = QuadratureOptions::new(self.quad_rel_tol, self.quad_max_subdivisions)
            .map_err(|e| format!("quadrature: {e}"))?;
        if !(self.r0 >= 0.0) {
            return Err(format!("sop.r0 must be >= 0, got {}", self.r0));
        }
        Ok(Scenario {
            array,
            bob,
            eve,
            fading_bob,
            fading_eve,
            ps: self.ps,
            beta1: self.beta1,
            noise_var_b: self.noise_var_b,
            noise_var_e: self.noise_var_e,
            ber_snr_db: self.ber_snr_db,
            lambda_b_db: self.lambda_bob_db,
            lambda_e_db: self.lambda_eve_db,
            r0: self.r0,
            series,
            quad,
            time: 0.0,
            ber_fading: false,
        })
    }
}
