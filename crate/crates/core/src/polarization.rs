//! Holomorphic polarization: states `φ(z)·√(dz₁∧⋯∧dzₙ)` expanded in the
//! normalized monomials `z^a / sqrt(a!·ħ^{|a|})`.
//!
//! The half-form is never stored. Its only effects are the `nħ/2` shift in
//! [`hamiltonian_apply`] and the `e^{-int/2}` factor in [`evolve`].

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::phase_space::{ComplexPoint, PhaseSpaceConfig, QuadratureGrid};

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizedState {
    cfg: PhaseSpaceConfig,
    cutoff: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl PolarizedState {
    pub fn zero(cfg: &PhaseSpaceConfig, cutoff: usize) -> Self {
        Self {
            cfg: *cfg,
            cutoff,
            coeffs: BTreeMap::new(),
        }
    }

    /// The normalized monomial state `e_a`.
    pub fn basis(a: MultiIndex, cfg: &PhaseSpaceConfig, cutoff: usize) -> Result<Self> {
        Self::from_entries(cfg, cutoff, [(a, Complex64::new(1.0, 0.0))])
    }

    /// The vacuum `e_(0,…,0)`.
    pub fn ground(cfg: &PhaseSpaceConfig, cutoff: usize) -> Self {
        Self::basis(MultiIndex::zero(cfg.n()), cfg, cutoff).expect("vacuum is within every cutoff")
    }

    pub fn from_entries<I>(cfg: &PhaseSpaceConfig, cutoff: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut coeffs = BTreeMap::new();
        for (a, c) in entries {
            cfg.ensure_dim(a.dim())?;
            if a.total() > cutoff {
                return Err(Error::CutoffExceeded {
                    degree: a.total(),
                    cutoff,
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::NonFinite);
            }
            *coeffs.entry(a).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(Self {
            cfg: *cfg,
            cutoff,
            coeffs,
        })
    }

    pub fn config(&self) -> &PhaseSpaceConfig {
        &self.cfg
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, a: &MultiIndex) -> Complex64 {
        self.coeffs.get(a).copied().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, Complex64)> {
        self.coeffs.iter().map(|(a, c)| (a, *c))
    }

    /// Applies a per-index multiplier, keeping the support.
    fn map_diagonal<F: Fn(&MultiIndex) -> Complex64>(&self, f: F) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(a, c)| (a.clone(), c * f(a)))
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .collect();
        Self {
            cfg: self.cfg,
            cutoff: self.cutoff,
            coeffs,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        self.map_diagonal(|_| factor)
    }

    /// `self − other` as a coefficient-wise maximum modulus.
    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, c) in &self.coeffs {
            worst = worst.max((c - other.get(a)).norm());
        }
        for (a, c) in &other.coeffs {
            if !self.coeffs.contains_key(a) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    /// The holomorphic profile `φ(z) = Σ φ_a z^a / sqrt(a!ħ^{|a|})`.
    pub fn profile(&self, z: &ComplexPoint) -> Complex64 {
        self.entries()
            .map(|(a, c)| c * a.fock_monomial(z, self.cfg.hbar()))
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StateFile::from(self))
            .expect("state serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: StateFile =
            serde_json::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let cfg = PhaseSpaceConfig::new(file.n, file.hbar)?;
        Self::from_entries(
            &cfg,
            file.cutoff,
            file.entries
                .into_iter()
                .map(|e| (MultiIndex::new(e.a), Complex64::new(e.re, e.im))),
        )
    }
}

/// `ħ(|a| + n/2)`.
pub fn spectrum(a: &MultiIndex, cfg: &PhaseSpaceConfig) -> f64 {
    cfg.hbar() * (a.total() as f64 + cfg.n() as f64 / 2.0)
}

/// `Ĥ = iħ·L_{ξ_H}` on polarized states.
///
/// On `z^a·σ` the vector field contributes `ħ|a|` and the half-form
/// `L_{ξ_H}σ = -(in/2)σ` contributes `nħ/2`.
pub fn hamiltonian_apply(s: &PolarizedState) -> PolarizedState {
    let cfg = s.cfg;
    s.map_diagonal(|a| Complex64::new(spectrum(a, &cfg), 0.0))
}

/// `e^{-itĤ/ħ}`: coefficient `a` picks up `e^{-i(|a| + n/2)t}`.
pub fn evolve(s: &PolarizedState, t: f64) -> PolarizedState {
    evolve_complex(s, Complex64::new(t, 0.0))
}

/// [`evolve`] at complex time. With `t = i·Log q` the phases become
/// `q^{|a| + n/2}` (principal branch).
pub fn evolve_complex(s: &PolarizedState, t: Complex64) -> PolarizedState {
    let half_n = s.cfg.n() as f64 / 2.0;
    let minus_i = Complex64::new(0.0, -1.0);
    s.map_diagonal(|a| (minus_i * (a.total() as f64 + half_n) * t).exp())
}

/// `(-1)^n`.
pub fn maslov_phase(n: usize) -> i32 {
    if n.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Phase picked up by the ground state after one classical period, read off
/// from [`evolve`].
pub fn ground_state_period_phase(cfg: &PhaseSpaceConfig) -> Complex64 {
    let ground = PolarizedState::ground(cfg, 0);
    let zero = MultiIndex::zero(cfg.n());
    evolve(&ground, 2.0 * PI).get(&zero) / ground.get(&zero)
}

/// `Σ_a conj(s1_a)·s2_a`.
pub fn inner_product(s1: &PolarizedState, s2: &PolarizedState) -> Result<Complex64> {
    if s1.cfg != s2.cfg {
        return Err(Error::ConfigMismatch(
            "states live on different phase spaces".into(),
        ));
    }
    Ok(s1.entries().map(|(a, c)| c.conj() * s2.get(a)).sum())
}

/// `∫ conj(φ₁)φ₂ e^{-|z|²/ħ} (πħ)^{-n} vol` on a grid.
pub fn inner_product_quadrature(
    s1: &PolarizedState,
    s2: &PolarizedState,
    grid: &QuadratureGrid,
) -> Result<Complex64> {
    if s1.cfg != s2.cfg || !grid.matches(&s1.cfg) {
        return Err(Error::ConfigMismatch(
            "states and grid must share n and hbar".into(),
        ));
    }
    let hbar = s1.cfg.hbar();
    let norm = (PI * hbar).powi(s1.cfg.n() as i32);
    Ok(
        grid.integrate(|z| s1.profile(z).conj() * s2.profile(z) * (-z.norm_sqr() / hbar).exp())
            / norm,
    )
}

/// Expands a full wave function `f(z)` (Gaussian included) in the polarized
/// basis: `φ_a = ∫ conj(z^a/√(a!ħ^{|a|})) f(z) e^{-|z|²/(2ħ)} (πħ)^{-n} vol`.
pub fn project_profile<F>(
    f: F,
    cfg: &PhaseSpaceConfig,
    cutoff: usize,
    grid: &QuadratureGrid,
) -> Result<PolarizedState>
where
    F: Fn(&ComplexPoint) -> Complex64,
{
    if !grid.matches(cfg) {
        return Err(Error::ConfigMismatch(
            "grid does not match configuration".into(),
        ));
    }
    let hbar = cfg.hbar();
    let norm = (PI * hbar).powi(cfg.n() as i32);
    let values: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|z| f(z) * (-z.norm_sqr() / (2.0 * hbar)).exp())
        .collect();
    let entries = MultiIndex::up_to(cfg.n(), cutoff).into_iter().map(|a| {
        let c: Complex64 = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .zip(&values)
            .map(|((z, w), v)| a.fock_monomial(z, hbar).conj() * v * *w)
            .sum();
        (a, c / norm)
    });
    PolarizedState::from_entries(cfg, cutoff, entries)
}

/// Central difference in `t` of `det(∂(R_t z)/∂z)` at `t = 0` for the flow
/// `R_t z = e^{-it}z`. The Jacobian is itself assembled by central
/// differences of the map, and the determinant by LU.
pub fn holomorphic_divergence_fd(n: usize, step: f64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::InvalidConfig(
            "dimension n must be at least 1".into(),
        ));
    }
    if !(step > 0.0 && step <= 1e-2) {
        return Err(Error::InvalidConfig(format!(
            "step must lie in (0, 1e-2], got {step}"
        )));
    }
    let flow = |t: f64, z: &[Complex64]| -> Vec<Complex64> {
        let phase = Complex64::from_polar(1.0, -t);
        z.iter().map(|c| c * phase).collect()
    };
    // The flow is linear, so the base point only needs to be generic.
    let base: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(0.3 + 0.1 * k as f64, -0.2))
        .collect();
    let jacobian_det = |t: f64| -> Complex64 {
        // Linear map: any finite increment is exact up to rounding.
        let dz = 0.5;
        let mut jac = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus[k] += dz;
            minus[k] -= dz;
            let (fp, fm) = (flow(t, &plus), flow(t, &minus));
            for j in 0..n {
                jac[(j, k)] = (fp[j] - fm[j]) / (2.0 * dz);
            }
        }
        jac.determinant()
    };
    Ok((jacobian_det(step) - jacobian_det(-step)) / (2.0 * step))
}

/// `e^{-|z|²/(2ħ)}`.
pub fn ground_state_profile(z: &ComplexPoint, cfg: &PhaseSpaceConfig) -> Complex64 {
    Complex64::new((-z.norm_sqr() / (2.0 * cfg.hbar())).exp(), 0.0)
}

/// Largest `|(∂/∂z̄_k + z_k/(2ħ)) f(z)|` over `k`, with `∂/∂z̄ = (∂_x + i∂_y)/2`
/// taken by central differences.
pub fn annihilation_residual_of<F>(
    f: F,
    z: &ComplexPoint,
    step: f64,
    cfg: &PhaseSpaceConfig,
) -> Result<f64>
where
    F: Fn(&ComplexPoint) -> Complex64,
{
    cfg.ensure_dim(z.dim())?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let value = f(z);
    let shifted = |k: usize, d: Complex64| {
        let mut c = z.coords().to_vec();
        c[k] += d;
        ComplexPoint::new(c)
    };
    let mut worst: f64 = 0.0;
    for k in 0..cfg.n() {
        let dx = (f(&shifted(k, Complex64::new(step, 0.0))?)
            - f(&shifted(k, Complex64::new(-step, 0.0))?))
            / (2.0 * step);
        let dy = (f(&shifted(k, Complex64::new(0.0, step))?)
            - f(&shifted(k, Complex64::new(0.0, -step))?))
            / (2.0 * step);
        let dbar = (dx + Complex64::new(0.0, 1.0) * dy) * 0.5;
        let residual = dbar + z[k] / (2.0 * cfg.hbar()) * value;
        worst = worst.max(residual.norm());
    }
    Ok(worst)
}

pub fn annihilation_residual(z: &ComplexPoint, step: f64, cfg: &PhaseSpaceConfig) -> Result<f64> {
    annihilation_residual_of(|w| ground_state_profile(w, cfg), z, step, cfg)
}

#[derive(Serialize, Deserialize)]
struct StateEntry {
    a: Vec<usize>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    n: usize,
    hbar: f64,
    cutoff: usize,
    entries: Vec<StateEntry>,
}

impl From<&PolarizedState> for StateFile {
    fn from(s: &PolarizedState) -> Self {
        Self {
            n: s.cfg.n(),
            hbar: s.cfg.hbar(),
            cutoff: s.cutoff,
            entries: s
                .entries()
                .map(|(a, c)| StateEntry {
                    a: a.entries().to_vec(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::build_quadrature;

    fn cfg(n: usize, hbar: f64) -> PhaseSpaceConfig {
        PhaseSpaceConfig::new(n, hbar).unwrap()
    }

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn pt(pairs: &[(f64, f64)]) -> ComplexPoint {
        ComplexPoint::from_pairs(pairs).unwrap()
    }

    #[test]
    fn hamiltonian_examples() {
        let c1 = cfg(1, 1.0);
        let g = PolarizedState::ground(&c1, 3);
        assert_eq!(hamiltonian_apply(&g), g.scale(Complex64::new(0.5, 0.0)));

        let c2 = cfg(2, 1.0);
        let s = PolarizedState::basis(mi(&[2, 1]), &c2, 3).unwrap();
        assert_eq!(
            hamiltonian_apply(&s).get(&mi(&[2, 1])),
            Complex64::new(4.0, 0.0)
        );

        assert!(hamiltonian_apply(&PolarizedState::zero(&c2, 3)).is_zero());
    }

    #[test]
    fn spectrum_examples() {
        assert_eq!(spectrum(&mi(&[0]), &cfg(1, 1.0)), 0.5);
        assert_eq!(spectrum(&mi(&[0, 0, 0]), &cfg(3, 1.0)), 1.5);
        assert_eq!(spectrum(&mi(&[5, 0]), &cfg(2, 2.0)), 12.0);
    }

    #[test]
    fn divergence_examples() {
        let d1 = holomorphic_divergence_fd(1, 1e-4).unwrap();
        assert!((d1 - Complex64::new(0.0, -1.0)).norm() < 1e-6);
        let d3 = holomorphic_divergence_fd(3, 1e-4).unwrap();
        assert!((d3 - Complex64::new(0.0, -3.0)).norm() < 1e-6);

        let target = Complex64::new(0.0, -2.0);
        let coarse = (holomorphic_divergence_fd(2, 1e-2).unwrap() - target).norm();
        let fine = (holomorphic_divergence_fd(2, 5e-3).unwrap() - target).norm();
        let ratio = coarse / fine;
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");

        assert!(holomorphic_divergence_fd(2, 0.1).is_err());
        assert!(holomorphic_divergence_fd(0, 1e-4).is_err());
    }

    #[test]
    fn ground_state_examples() {
        assert_eq!(
            ground_state_profile(&pt(&[(0.0, 0.0)]), &cfg(1, 1.0)).re,
            1.0
        );
        let v = ground_state_profile(&pt(&[(1.0, 0.0)]), &cfg(1, 1.0)).re;
        assert!((v - 0.60653065971).abs() < 1e-10);
        let v = ground_state_profile(&pt(&[(1.0, 0.0), (1.0, 0.0)]), &cfg(2, 1.0)).re;
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn annihilation_examples() {
        let c = cfg(1, 1.0);
        assert!(annihilation_residual(&pt(&[(0.0, 0.0)]), 1e-4, &c).unwrap() < 1e-8);
        assert!(annihilation_residual(&pt(&[(0.5, 0.3)]), 1e-4, &c).unwrap() < 1e-6);

        // ∂_{z̄} e^{-|z|²} = -z e^{-|z|²}, so the residual is |z|/2·e^{-|z|²}.
        let wrong = |w: &ComplexPoint| Complex64::new((-w.norm_sqr()).exp(), 0.0);
        let r = annihilation_residual_of(wrong, &pt(&[(1.0, 0.0)]), 1e-4, &c).unwrap();
        assert!((r - 0.5 * (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn evolve_examples() {
        let c1 = cfg(1, 1.0);
        let s = PolarizedState::from_entries(
            &c1,
            3,
            [
                (mi(&[0]), Complex64::new(0.3, 0.1)),
                (mi(&[2]), Complex64::new(-1.0, 0.5)),
            ],
        )
        .unwrap();
        assert_eq!(evolve(&s, 0.0), s);
        let g = PolarizedState::ground(&c1, 0);
        assert!(
            evolve(&g, 2.0 * PI).max_abs_difference(&g.scale(Complex64::new(-1.0, 0.0))) < 1e-12
        );

        let c2 = cfg(2, 1.0);
        let s2 = PolarizedState::from_entries(
            &c2,
            3,
            [
                (mi(&[1, 2]), Complex64::new(0.3, 0.1)),
                (mi(&[0, 1]), Complex64::new(2.0, 0.0)),
            ],
        )
        .unwrap();
        assert!(evolve(&s2, 2.0 * PI).max_abs_difference(&s2) < 1e-12);
    }

    #[test]
    fn maslov_examples() {
        assert_eq!(maslov_phase(1), -1);
        assert_eq!(maslov_phase(2), 1);
        assert_eq!(maslov_phase(4), 1);
        for n in 1..=4 {
            let phase = ground_state_period_phase(&cfg(n, 1.0));
            assert!(phase.im.abs() < 1e-12);
            assert!((phase.re - maslov_phase(n) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn inner_product_examples() {
        let c1 = cfg(1, 1.0);
        let e = |k: usize| PolarizedState::basis(mi(&[k]), &c1, 4).unwrap();
        assert_eq!(
            inner_product(&e(0), &e(0)).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(
            inner_product(&e(0), &e(1)).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        let grid = build_quadrature(&c1, 40).unwrap();
        let q = inner_product_quadrature(&e(2), &e(2), &grid).unwrap();
        assert!((q - Complex64::new(1.0, 0.0)).norm() < 1e-8);
        assert!(inner_product(&e(0), &PolarizedState::ground(&cfg(1, 2.0), 1)).is_err());
    }

    #[test]
    fn ground_state_projects_to_vacuum() {
        let c = cfg(1, 0.5);
        let grid = build_quadrature(&c, 20).unwrap();
        let proj = project_profile(|z| ground_state_profile(z, &c), &c, 4, &grid).unwrap();
        assert!(proj.max_abs_difference(&PolarizedState::ground(&c, 4)) < 1e-10);
    }

    #[test]
    fn json_round_trip() {
        let s = PolarizedState::from_entries(
            &cfg(2, 0.5),
            3,
            [(mi(&[1, 2]), Complex64::new(0.5, -0.25))],
        )
        .unwrap();
        let json = s.to_json();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["entries"][0]["a"], serde_json::json!([1, 2]));
        assert_eq!(PolarizedState::from_json(&json).unwrap(), s);
    }
}
