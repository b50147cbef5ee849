//! Fixed-point character of the rotation flow and its q-expansion.
//!
//! The real-time series `Σ e^{-i(m + n/2)t}` does not converge, so the
//! comparisons are made at `q = e^{-ε-it}` inside the unit disk.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::phase_space::PhaseSpaceConfig;
use crate::polarization::{evolve_complex, PolarizedState};

/// Distance from the pole set below which the character is refused.
pub const POLE_TOL: f64 = 1e-12;

/// Dimensions up to which degeneracies are counted by enumeration.
pub const ENUMERATION_MAX_DIM: usize = 4;

/// `e^{-int/2} / (1 − e^{-it})^n`: the half-form weight at the origin over
/// `det_C(I − dR_t)` with `dR_t = e^{-it}·I`.
pub fn fixed_point_character(t: Complex64, n: usize) -> Result<Complex64> {
    let minus_i = Complex64::new(0.0, -1.0);
    let denom = Complex64::new(1.0, 0.0) - (minus_i * t).exp();
    if denom.norm().is_nan() || denom.norm() <= POLE_TOL {
        return Err(Error::PoleAtFixedTime { t: t.to_string() });
    }
    Ok((minus_i * t * (n as f64 / 2.0)).exp() / denom.powu(n as u32))
}

/// Degeneracies `g_m` of the levels `m + n/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterSeries {
    n: usize,
    cutoff: usize,
    coeffs: Vec<u64>,
}

impl CharacterSeries {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// The exponent offset `n/2` as `(numerator, denominator)`.
    pub fn offset(&self) -> (usize, usize) {
        (self.n, 2)
    }

    /// `(m + n/2, g_m)` for every retained level.
    pub fn terms(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        let half = self.n as f64 / 2.0;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(m, &g)| (m as f64 + half, g))
    }

    /// `Σ_{m ≤ M} g_m q^{m + n/2}`.
    pub fn evaluate(&self, q: Complex64) -> Complex64 {
        let lead = principal_half_power(q, self.n);
        let mut power = Complex64::new(1.0, 0.0);
        let mut sum = CompensatedSum::default();
        for &g in &self.coeffs {
            sum.add(power * g as f64);
            power *= q;
        }
        sum.value() * lead
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SeriesFile::from(self)).expect("series serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: SeriesFile =
            serde_json::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if file.offset_den != 2 || file.offset_num != file.n || file.coeffs.len() != file.cutoff + 1
        {
            return Err(Error::InvalidConfig(
                "inconsistent character series header".into(),
            ));
        }
        Ok(Self {
            n: file.n,
            cutoff: file.cutoff,
            coeffs: file.coeffs,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesFile {
    n: usize,
    cutoff: usize,
    offset_num: usize,
    offset_den: usize,
    coeffs: Vec<u64>,
}

impl From<&CharacterSeries> for SeriesFile {
    fn from(s: &CharacterSeries) -> Self {
        Self {
            n: s.n,
            cutoff: s.cutoff,
            offset_num: s.n,
            offset_den: 2,
            coeffs: s.coeffs.clone(),
        }
    }
}

/// `binomial(top, k)` with overflow detection.
pub fn binomial(top: u64, k: u64) -> Option<u64> {
    let k = k.min(top.checked_sub(k)?);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((top - i) as u128)? / (i as u128 + 1);
    }
    u64::try_from(acc).ok()
}

/// Number of `a ∈ N^n` with `|a| = m`, by counting.
pub fn degeneracy_enumerated(n: usize, m: usize) -> u64 {
    MultiIndex::of_degree(n, m).len() as u64
}

/// `binomial(m + n − 1, n − 1)`.
pub fn degeneracy_closed_form(n: usize, m: usize) -> Option<u64> {
    binomial((m + n - 1) as u64, (n - 1) as u64)
}

/// Degeneracies up to level `max_level`: enumerated for `n ≤ 4`, closed form
/// beyond.
pub fn character_series(n: usize, max_level: usize) -> Result<CharacterSeries> {
    if n == 0 {
        return Err(Error::InvalidConfig(
            "dimension n must be at least 1".into(),
        ));
    }
    let coeffs = (0..=max_level)
        .map(|m| {
            if n <= ENUMERATION_MAX_DIM {
                Ok(degeneracy_enumerated(n, m))
            } else {
                degeneracy_closed_form(n, m).ok_or(Error::SeriesOverflow { level: m })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CharacterSeries {
        n,
        cutoff: max_level,
        coeffs,
    })
}

/// `q^{n/2}` on the principal branch, with `0^{n/2} = 0`.
fn principal_half_power(q: Complex64, n: usize) -> Complex64 {
    if q == Complex64::new(0.0, 0.0) {
        return q;
    }
    (q.ln() * (n as f64 / 2.0)).exp()
}

fn ensure_in_disk(q: Complex64) -> Result<()> {
    let modulus = q.norm();
    if modulus.is_nan() || modulus >= 1.0 {
        return Err(Error::QOutsideDisk { modulus });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizedCharacter {
    /// `q^{n/2} / (1 − q)^n`.
    pub closed: Complex64,
    /// `Σ_{m ≤ M} g_m q^{m + n/2}`.
    pub partial: Complex64,
}

impl RegularizedCharacter {
    pub fn abs_error(&self) -> f64 {
        (self.closed - self.partial).norm()
    }
}

pub fn regularized_character(
    q: Complex64,
    n: usize,
    max_level: usize,
) -> Result<RegularizedCharacter> {
    ensure_in_disk(q)?;
    let series = character_series(n, max_level)?;
    let closed = principal_half_power(q, n) / (Complex64::new(1.0, 0.0) - q).powu(n as u32);
    Ok(RegularizedCharacter {
        closed,
        partial: series.evaluate(q),
    })
}

/// Bound on `|closed − partial|`:
/// `|q|^{M+1+n/2} · binomial(M+n, n−1) · (1 − |q|)^{-n}`.
pub fn tail_bound(q_abs: f64, n: usize, max_level: usize) -> f64 {
    let binom =
        binomial((max_level + n) as u64, (n - 1) as u64).map_or(f64::INFINITY, |b| b as f64);
    q_abs.powf(max_level as f64 + 1.0 + n as f64 / 2.0) * binom * (1.0 - q_abs).powi(-(n as i32))
}

/// Trace of the truncated evolution operator on all `e_a` with `|a| ≤ M`,
/// evaluated at the complex time `t = i·Log q` so that `e^{-it} = q`.
pub fn direct_trace_character(
    q: Complex64,
    max_level: usize,
    cfg: &PhaseSpaceConfig,
) -> Result<Complex64> {
    ensure_in_disk(q)?;
    let n = cfg.n();
    if q == Complex64::new(0.0, 0.0) {
        return Ok(q);
    }
    let t = Complex64::new(0.0, 1.0) * q.ln();
    let mut trace = CompensatedSum::default();
    for a in MultiIndex::up_to(n, max_level) {
        let state = PolarizedState::basis(a.clone(), cfg, max_level)?;
        trace.add(evolve_complex(&state, t).get(&a));
    }
    Ok(trace.value())
}

/// Neumaier summation, applied to real and imaginary parts separately.
#[derive(Debug, Default)]
struct CompensatedSum {
    sum: Complex64,
    carry: Complex64,
}

impl CompensatedSum {
    fn add(&mut self, x: Complex64) {
        let (re, c_re) = two_sum(self.sum.re, x.re);
        let (im, c_im) = two_sum(self.sum.im, x.im);
        self.sum = Complex64::new(re, im);
        self.carry += Complex64::new(c_re, c_im);
    }

    fn value(&self) -> Complex64 {
        self.sum + self.carry
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = if a.abs() >= b.abs() {
        (a - s) + b
    } else {
        (b - s) + a
    };
    (s, err)
}
