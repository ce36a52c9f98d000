//! Useful-signal and artificial-noise precoding.
//!
//! All methods share p1 = h_B (so h_B^H p1 = 1) and differ in the orthogonal
//! structure carrying the AN:
//!
//! * SP  - a single unit vector orthogonal to h_B, scalar AN
//! * ZF  - the projector I - h_B h_B^H, vector AN of full width
//! * SVD - 2N orthonormal null-space columns of h_B^H, vector AN of width 2N
//! * NoAN - no AN at all (beta1 = 1 baseline)
//!
//! Memory accounting counts stored complex scalars for the orthogonal
//! structure plus the AN sample, per method.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::array_geometry::{inner, norm, SteeringVector};
use crate::error::{Error, Result};

pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// AN construction method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnMethod {
    Sp,
    Zf,
    Svd,
    NoAn,
}

impl AnMethod {
    pub fn label(&self) -> &'static str {
        match self {
            AnMethod::Sp => "SP",
            AnMethod::Zf => "ZF",
            AnMethod::Svd => "SVD",
            AnMethod::NoAn => "NoAN",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sp" => Ok(AnMethod::Sp),
            "zf" => Ok(AnMethod::Zf),
            "svd" => Ok(AnMethod::Svd),
            "noan" | "no-an" | "none" => Ok(AnMethod::NoAn),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }

    pub const ALL: [AnMethod; 4] = [AnMethod::Sp, AnMethod::Zf, AnMethod::Svd, AnMethod::NoAn];
}

/// Power split between useful signal (beta1) and AN (beta2),
/// beta1^2 + beta2^2 = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    pub beta1: f64,
    pub beta2: f64,
}

impl PowerSplit {
    /// Derive beta2 from beta1.
    pub fn from_beta1(beta1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta1) {
            return Err(Error::InvalidArgument(format!(
                "beta1 must be in [0, 1], got {beta1}"
            )));
        }
        Ok(Self {
            beta1,
            beta2: (1.0 - beta1 * beta1).max(0.0).sqrt(),
        })
    }

    pub fn new(beta1: f64, beta2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta1) || !(0.0..=1.0).contains(&beta2) {
            return Err(Error::InvalidArgument(format!(
                "split factors must be in [0, 1], got ({beta1}, {beta2})"
            )));
        }
        if (beta1 * beta1 + beta2 * beta2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "beta1^2 + beta2^2 must equal 1, got {}",
                beta1 * beta1 + beta2 * beta2
            )));
        }
        Ok(Self { beta1, beta2 })
    }

    /// beta1 = 1, beta2 = 0: the NoAN split.
    pub fn no_an() -> Self {
        Self { beta1: 1.0, beta2: 0.0 }
    }
}

/// Column-major complex matrix used for AN bases.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ColumnMatrix {
    pub fn from_columns(dim: usize, cols: Vec<Vec<Complex64>>) -> Self {
        let mut data = Vec::with_capacity(dim * cols.len());
        for c in &cols {
            debug_assert_eq!(c.len(), dim);
            data.extend_from_slice(c);
        }
        Self { dim, data }
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, data: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn width(&self) -> usize {
        if self.dim == 0 { 0 } else { self.data.len() / self.dim }
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    /// B z for z of length width().
    pub fn matvec(&self, z: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(z.len(), self.width());
        let mut out = vec![Complex64::ZERO; self.dim];
        for (j, zj) in z.iter().enumerate() {
            for (o, bij) in out.iter_mut().zip(self.col(j)) {
                *o += bij * zj;
            }
        }
        out
    }

    /// Row vector v^H B (one entry per column).
    pub fn conj_row(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.width()).map(|j| inner(v, self.col(j))).collect()
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|e| e.norm_sqr()).sum()
    }
}

/// A full precoder: normalization vector, AN basis, and the SP power factor.
#[derive(Debug, Clone)]
pub struct PrecoderSet {
    pub method: AnMethod,
    /// Useful-signal vector, h_B for every method.
    pub p1: Vec<Complex64>,
    /// AN basis columns; width 1 (SP), (2N+1)L (ZF), 2N (SVD), 0 (NoAN).
    pub an_basis: ColumnMatrix,
    /// SP normalization 1/||p2||; carried as 1 for the other methods, whose
    /// AN is normalized per draw at transmit time.
    pub alpha: f64,
}

impl PrecoderSet {
    pub fn an_width(&self) -> usize {
        self.an_basis.width()
    }

    /// Largest |h^H column| over the AN basis.
    pub fn max_leakage(&self, h: &SteeringVector) -> f64 {
        (0..self.an_basis.width())
            .map(|j| inner(h.as_slice(), self.an_basis.col(j)).norm())
            .fold(0.0, f64::max)
    }
}

/// p1 = h_B; every method uses the steering vector itself, which satisfies
/// h_B^H p1 = ||h_B||^2 = 1.
pub fn design_p1(h_b: &SteeringVector) -> Vec<Complex64> {
    h_b.entries.clone()
}

fn project_out(v: &mut [Complex64], basis: &[Complex64]) {
    let coef = inner(basis, v);
    for (vi, bi) in v.iter_mut().zip(basis) {
        *vi -= coef * bi;
    }
}

/// Canonical SP precoder: Gram-Schmidt of the first standard basis vector
/// against h_B, normalized to unit norm so alpha = 1.
pub fn design_sp(h_b: &SteeringVector) -> Result<PrecoderSet> {
    let dim = h_b.dim();
    if dim < 2 {
        return Err(Error::Degenerate(
            "dimension 1 leaves no orthogonal complement for the AN".into(),
        ));
    }
    let mut v = vec![Complex64::ZERO; dim];
    v[0] = Complex64::ONE;
    project_out(&mut v, h_b.as_slice());
    let n = norm(&v);
    // |h_B^H e_0| = 1/sqrt(dim) < 1, so the residual cannot vanish
    for e in &mut v {
        *e /= n;
    }
    Ok(PrecoderSet {
        method: AnMethod::Sp,
        p1: design_p1(h_b),
        an_basis: ColumnMatrix::from_columns(dim, vec![v]),
        alpha: 1.0,
    })
}

/// Seeded SP variant: a random complex Gaussian direction orthogonalized
/// against h_B. Bit-identical across reruns for a fixed seed.
pub fn design_sp_seeded(h_b: &SteeringVector, seed: u64) -> Result<PrecoderSet> {
    let dim = h_b.dim();
    if dim < 2 {
        return Err(Error::Degenerate(
            "dimension 1 leaves no orthogonal complement for the AN".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..8 {
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        project_out(&mut v, h_b.as_slice());
        let n = norm(&v);
        if n > 1e-9 {
            for e in &mut v {
                *e /= n;
            }
            return Ok(PrecoderSet {
                method: AnMethod::Sp,
                p1: design_p1(h_b),
                an_basis: ColumnMatrix::from_columns(dim, vec![v]),
                alpha: 1.0,
            });
        }
    }
    Err(Error::NumericalFailure(
        "random draw kept collapsing onto h_B".into(),
    ))
}

/// ZF precoder: the projector I - h_B h_B^H stored column by column.
pub fn design_zf(h_b: &SteeringVector) -> PrecoderSet {
    let dim = h_b.dim();
    let h = h_b.as_slice();
    let mut cols = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut col: Vec<Complex64> = (0..dim)
            .map(|i| -h[i] * h[j].conj())
            .collect();
        col[j] += Complex64::ONE;
        cols.push(col);
    }
    PrecoderSet {
        method: AnMethod::Zf,
        p1: design_p1(h_b),
        an_basis: ColumnMatrix::from_columns(dim, cols),
        alpha: 1.0,
    }
}

/// Null-space precoder: the first 2N orthonormal vectors orthogonal to h_B,
/// produced by Gram-Schmidt over the standard basis in index order. This is
/// the deterministic stand-in for the null-space factor an SVD of h_B^H
/// would produce, truncated to the 2N columns the method stores.
pub fn design_svd(h_b: &SteeringVector, n_half: u32) -> Result<PrecoderSet> {
    let dim = h_b.dim();
    let want = 2 * n_half as usize;
    if dim < want + 1 {
        return Err(Error::Degenerate(format!(
            "null space of h_B^H has dimension {} < 2N = {want}",
            dim - 1
        )));
    }
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(want);
    for j in 0..dim {
        if cols.len() == want {
            break;
        }
        let mut v = vec![Complex64::ZERO; dim];
        v[j] = Complex64::ONE;
        project_out(&mut v, h_b.as_slice());
        for c in &cols {
            project_out(&mut v, c);
        }
        let n = norm(&v);
        if n > 1e-6 {
            for e in &mut v {
                *e /= n;
            }
            cols.push(v);
        }
    }
    if cols.len() < want {
        return Err(Error::NumericalFailure(format!(
            "Gram-Schmidt produced only {} of {want} null-space columns",
            cols.len()
        )));
    }
    Ok(PrecoderSet {
        method: AnMethod::Svd,
        p1: design_p1(h_b),
        an_basis: ColumnMatrix::from_columns(dim, cols),
        alpha: 1.0,
    })
}

/// Empty precoder for the NoAN baseline.
pub fn design_noan(h_b: &SteeringVector) -> PrecoderSet {
    PrecoderSet {
        method: AnMethod::NoAn,
        p1: design_p1(h_b),
        an_basis: ColumnMatrix::empty(h_b.dim()),
        alpha: 1.0,
    }
}

/// Build the precoder for `method`.
pub fn design(method: AnMethod, h_b: &SteeringVector, n_half: u32) -> Result<PrecoderSet> {
    match method {
        AnMethod::Sp => design_sp(h_b),
        AnMethod::Zf => Ok(design_zf(h_b)),
        AnMethod::Svd => design_svd(h_b, n_half),
        AnMethod::NoAn => Ok(design_noan(h_b)),
    }
}

/// Stored complex scalars per method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryFootprint {
    /// Orthogonal matrix/vector size.
    pub orthogonal_size: u64,
    /// AN sample size.
    pub an_size: u64,
    pub total: u64,
}

/// Memory accounting: ZF stores a (2N+1)L x (2N+1)L matrix plus a full-width
/// AN vector, the null-space method a (2N+1)L x 2N matrix plus a 2N vector,
/// SP one vector plus one scalar.
pub fn memory_footprint(method: AnMethod, n_half: u32, subcarriers: u32) -> MemoryFootprint {
    let nl = (2 * n_half as u64 + 1) * subcarriers as u64;
    let (orthogonal_size, an_size) = match method {
        AnMethod::Zf => (nl * nl, nl),
        AnMethod::Svd => (2 * n_half as u64 * nl, 2 * n_half as u64),
        AnMethod::Sp => (nl, 1),
        AnMethod::NoAn => (0, 0),
    };
    MemoryFootprint {
        orthogonal_size,
        an_size,
        total: orthogonal_size + an_size,
    }
}
