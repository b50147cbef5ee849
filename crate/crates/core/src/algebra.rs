//! The intrinsic convolution algebra of half-density kernels.
//!
//! An element at Fourier mode `m` is `e^{imt/ħ}·K(z, z')` with
//!
//! ```text
//! K(z, z') = Σ_{a,b} C_ab e_a(z) conj(e_b(z')) e^{-(|z|² + |z'|²)/(2ħ)},
//! e_a(z)   = (h·(πħ)^n)^{-1/2} · z^a / sqrt(a!·ħ^{|a|}).
//! ```
//!
//! With this normalization the junction integral `h·∫ K₁(z,w) K₂(w,z') vol(w)`
//! is exactly the matrix product `C₁·C₂`. [`convolve`] uses that identity;
//! [`convolve_quadrature`] evaluates the integral pointwise on a grid and
//! projects back onto the basis, so the two can be checked against each other.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::phase_space::{ComplexPoint, PhaseSpaceConfig, QuadratureGrid};

type Coeffs = BTreeMap<(MultiIndex, MultiIndex), Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    cfg: PhaseSpaceConfig,
    cutoff: usize,
    mode: i64,
    coeffs: Coeffs,
}

impl AlgebraElement {
    /// The empty element at the fundamental mode.
    pub fn zero(cfg: &PhaseSpaceConfig, cutoff: usize) -> Self {
        Self {
            cfg: *cfg,
            cutoff,
            mode: 1,
            coeffs: Coeffs::new(),
        }
    }

    /// Builds an element from `(a, b, C_ab)` triples. Repeated keys add up and
    /// exact zeros are dropped.
    pub fn from_entries<I>(
        cfg: &PhaseSpaceConfig,
        cutoff: usize,
        mode: i64,
        entries: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, MultiIndex, Complex64)>,
    {
        let mut coeffs = Coeffs::new();
        for (a, b, c) in entries {
            check_index(&a, cfg, cutoff)?;
            check_index(&b, cfg, cutoff)?;
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::NonFinite);
            }
            *coeffs.entry((a, b)).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(Self {
            cfg: *cfg,
            cutoff,
            mode,
            coeffs,
        })
    }

    /// `Σ_{|a| ≤ cutoff} E_aa`.
    pub fn identity(cfg: &PhaseSpaceConfig, cutoff: usize) -> Self {
        let coeffs = MultiIndex::up_to(cfg.n(), cutoff)
            .into_iter()
            .map(|a| ((a.clone(), a), Complex64::new(1.0, 0.0)))
            .collect();
        Self {
            cfg: *cfg,
            cutoff,
            mode: 1,
            coeffs,
        }
    }

    pub fn with_mode(mut self, mode: i64) -> Self {
        self.mode = mode;
        self
    }

    pub fn config(&self) -> &PhaseSpaceConfig {
        &self.cfg
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn mode(&self) -> i64 {
        self.mode
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, a: &MultiIndex, b: &MultiIndex) -> Complex64 {
        self.coeffs
            .get(&(a.clone(), b.clone()))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, &MultiIndex, Complex64)> {
        self.coeffs.iter().map(|((a, b), c)| (a, b, *c))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.values_mut().for_each(|c| *c *= factor);
        out.coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        ensure_compatible(self, other)?;
        let cutoff = self.cutoff.min(other.cutoff);
        let entries = self
            .entries()
            .chain(other.entries())
            .filter(|(a, b, _)| a.total() <= cutoff && b.total() <= cutoff)
            .map(|(a, b, c)| (a.clone(), b.clone(), c));
        Self::from_entries(&self.cfg, cutoff, self.mode, entries)
    }

    /// Largest entrywise modulus of `self − other` over the union of supports.
    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (key, c) in &self.coeffs {
            let d = other.coeffs.get(key).copied().unwrap_or_default();
            worst = worst.max((c - d).norm());
        }
        for (key, d) in &other.coeffs {
            if !self.coeffs.contains_key(key) {
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Kernel basis function `e_a(z)`.
    pub fn basis_function(a: &MultiIndex, z: &ComplexPoint, cfg: &PhaseSpaceConfig) -> Complex64 {
        a.fock_monomial(z, cfg.hbar()) * kernel_normalization(cfg)
    }

    /// The scalar kernel `K(z, z')`, Gaussian half-density legs included.
    pub fn kernel(&self, z: &ComplexPoint, z_prime: &ComplexPoint) -> Complex64 {
        let legs = gaussian_leg(z, &self.cfg) * gaussian_leg(z_prime, &self.cfg);
        let sum: Complex64 = self
            .entries()
            .map(|(a, b, c)| {
                c * Self::basis_function(a, z, &self.cfg)
                    * Self::basis_function(b, z_prime, &self.cfg).conj()
            })
            .sum();
        sum * legs
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ElementFile::from(self))
            .expect("element serialization is infallible")
    }

    /// The JSON file layout `{n, hbar, cutoff, mode, entries: [{a, b, re, im}]}`.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(ElementFile::from(self)).expect("element serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ElementFile =
            serde_json::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        file.try_into()
    }
}

/// `(h·(πħ)^n)^{-1/2}`.
fn kernel_normalization(cfg: &PhaseSpaceConfig) -> f64 {
    (cfg.h() * (PI * cfg.hbar()).powi(cfg.n() as i32)).powf(-0.5)
}

/// `e^{-|z|²/(2ħ)}`, the concrete form of one `√vol` leg.
fn gaussian_leg(z: &ComplexPoint, cfg: &PhaseSpaceConfig) -> f64 {
    (-z.norm_sqr() / (2.0 * cfg.hbar())).exp()
}

fn check_index(a: &MultiIndex, cfg: &PhaseSpaceConfig, cutoff: usize) -> Result<()> {
    cfg.ensure_dim(a.dim())?;
    if a.total() > cutoff {
        return Err(Error::CutoffExceeded {
            degree: a.total(),
            cutoff,
        });
    }
    Ok(())
}

fn ensure_compatible(a: &AlgebraElement, b: &AlgebraElement) -> Result<()> {
    if a.cfg != b.cfg {
        return Err(Error::ConfigMismatch(format!(
            "(n={}, hbar={}) vs (n={}, hbar={})",
            a.cfg.n(),
            a.cfg.hbar(),
            b.cfg.n(),
            b.cfg.hbar()
        )));
    }
    if a.mode != b.mode {
        return Err(Error::ModeMismatch {
            left: a.mode,
            right: b.mode,
        });
    }
    Ok(())
}

/// Single-coefficient element `E_ab` at mode 1.
pub fn matrix_unit(
    a: MultiIndex,
    b: MultiIndex,
    cfg: &PhaseSpaceConfig,
    cutoff: usize,
) -> Result<AlgebraElement> {
    AlgebraElement::from_entries(cfg, cutoff, 1, [(a, b, Complex64::new(1.0, 0.0))])
}

/// Convolution by Fock-matrix product `C = C_A·C_B`, truncated to the smaller
/// cutoff.
pub fn convolve(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    ensure_compatible(a, b)?;
    let cutoff = a.cutoff.min(b.cutoff);
    let mut rows: BTreeMap<&MultiIndex, Vec<(&MultiIndex, Complex64)>> = BTreeMap::new();
    for (k, d, c) in b.entries() {
        rows.entry(k).or_default().push((d, c));
    }
    let mut coeffs = Coeffs::new();
    for (i, k, ca) in a.entries() {
        if i.total() > cutoff {
            continue;
        }
        let Some(row) = rows.get(k) else { continue };
        for &(d, cb) in row {
            if d.total() > cutoff {
                continue;
            }
            *coeffs.entry((i.clone(), d.clone())).or_default() += ca * cb;
        }
    }
    coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
    Ok(AlgebraElement {
        cfg: a.cfg,
        cutoff,
        mode: a.mode,
        coeffs,
    })
}

/// Minimum grid order for [`convolve_quadrature`] at the given cutoff.
pub fn required_quadrature_order(cutoff: usize) -> usize {
    2 * cutoff + 4
}

/// Convolution by literal quadrature of `h·∫ K_A(z,w) K_B(w,z') vol(w)`,
/// followed by projection of the resulting kernel onto the Fock basis.
pub fn convolve_quadrature(
    a: &AlgebraElement,
    b: &AlgebraElement,
    grid: &QuadratureGrid,
) -> Result<AlgebraElement> {
    ensure_compatible(a, b)?;
    let cfg = a.cfg;
    if !grid.matches(&cfg) {
        return Err(Error::ConfigMismatch(format!(
            "grid built for (n={}, hbar={}), elements use (n={}, hbar={})",
            grid.n(),
            grid.hbar(),
            cfg.n(),
            cfg.hbar()
        )));
    }
    let required = required_quadrature_order(a.cutoff.max(b.cutoff));
    if grid.order() < required {
        return Err(Error::GridTooCoarse {
            order: grid.order(),
            required,
        });
    }
    let cutoff = a.cutoff.min(b.cutoff);
    if a.is_zero() || b.is_zero() {
        return Ok(AlgebraElement {
            cfg,
            cutoff,
            mode: a.mode,
            coeffs: Coeffs::new(),
        });
    }

    let h = cfg.h();
    let nodes = grid.nodes();
    let weights = grid.weights();
    let g = nodes.len();

    // Basis table E[p][i] = e_p(z_i)·e^{-|z_i|²/(2ħ)}.
    let basis = MultiIndex::up_to(cfg.n(), a.cutoff.max(b.cutoff));
    let position: BTreeMap<&MultiIndex, usize> =
        basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let table: Vec<Vec<Complex64>> = basis
        .iter()
        .map(|p| {
            nodes
                .iter()
                .map(|z| AlgebraElement::basis_function(p, z, &cfg) * gaussian_leg(z, &cfg))
                .collect()
        })
        .collect();
    let out_basis: Vec<usize> = (0..basis.len())
        .filter(|&p| basis[p].total() <= cutoff)
        .collect();

    // Row i of a kernel: K(z_i, w_j) = Σ_b (Σ_a C_ab E_a(z_i)) conj(E_b(w_j)).
    let kernel_row = |el: &AlgebraElement, i: usize, row: &mut [Complex64]| {
        let mut left = vec![Complex64::new(0.0, 0.0); basis.len()];
        for (p, q, c) in el.entries() {
            left[position[q]] += c * table[position[p]][i];
        }
        row.fill(Complex64::new(0.0, 0.0));
        for (q, lq) in left.iter().enumerate() {
            if *lq == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (r, e) in row.iter_mut().zip(&table[q]) {
                *r += lq * e.conj();
            }
        }
    };

    let mut row = vec![Complex64::new(0.0, 0.0); g];

    // Left projection: L[p][j] = Σ_i conj(E_p(z_i)) W_i K_A(z_i, w_j).
    let mut left_proj = vec![vec![Complex64::new(0.0, 0.0); g]; out_basis.len()];
    for i in 0..g {
        kernel_row(a, i, &mut row);
        for (lp, &p) in left_proj.iter_mut().zip(&out_basis) {
            let coef = table[p][i].conj() * weights[i];
            for (l, r) in lp.iter_mut().zip(&row) {
                *l += coef * r;
            }
        }
    }

    // Junction integral over w: M[p][k] = h Σ_j L[p][j] W_j K_B(w_j, z'_k).
    let mut junction = vec![vec![Complex64::new(0.0, 0.0); g]; out_basis.len()];
    for j in 0..g {
        kernel_row(b, j, &mut row);
        for (mp, lp) in junction.iter_mut().zip(&left_proj) {
            let coef = lp[j] * weights[j] * h;
            for (m, r) in mp.iter_mut().zip(&row) {
                *m += coef * r;
            }
        }
    }

    // Right projection with the h² normalization of the two legs.
    let mut coeffs = Coeffs::new();
    for (mp, &p) in junction.iter().zip(&out_basis) {
        for &q in &out_basis {
            let c: Complex64 = mp
                .iter()
                .zip(weights)
                .zip(&table[q])
                .map(|((m, w), e)| m * w * e)
                .sum::<Complex64>()
                * (h * h);
            if c != Complex64::new(0.0, 0.0) {
                coeffs.insert((basis[p].clone(), basis[q].clone()), c);
            }
        }
    }
    Ok(AlgebraElement {
        cfg,
        cutoff,
        mode: a.mode,
        coeffs,
    })
}

/// Groupoid involution `Ψ*(y) = conj(Ψ(y⁻¹))`: `C_ab ↦ conj(C_ba)`.
///
/// `y⁻¹` flips the sign of the action, and conjugation flips it back, so the
/// Fourier mode is unchanged.
pub fn adjoint(a: &AlgebraElement) -> AlgebraElement {
    let coeffs = a
        .coeffs
        .iter()
        .map(|((p, q), c)| ((q.clone(), p.clone()), c.conj()))
        .collect();
    AlgebraElement {
        cfg: a.cfg,
        cutoff: a.cutoff,
        mode: a.mode,
        coeffs,
    }
}

/// Diagonal sum `Σ_a C_aa`.
pub fn kernel_trace(a: &AlgebraElement) -> Complex64 {
    a.entries()
        .filter(|(p, q, _)| p == q)
        .map(|(_, _, c)| c)
        .sum()
}

/// `h·∫_X K(x, x) vol(x)` on a grid; equals [`kernel_trace`] when the grid
/// is fine enough.
pub fn kernel_trace_quadrature(a: &AlgebraElement, grid: &QuadratureGrid) -> Result<Complex64> {
    if !grid.matches(&a.cfg) {
        return Err(Error::ConfigMismatch(
            "grid does not match element configuration".into(),
        ));
    }
    Ok(grid.integrate(|x| a.kernel(x, x)) * a.cfg.h())
}

/// The fiber-integrated trace over one period of the action variable:
/// `h·kernel_trace` at mode 0, zero at every other mode.
pub fn fiber_integrated_trace(a: &AlgebraElement) -> Complex64 {
    if a.mode == 0 {
        kernel_trace(a) * a.cfg.h()
    } else {
        Complex64::new(0.0, 0.0)
    }
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    a: Vec<usize>,
    b: Vec<usize>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct ElementFile {
    n: usize,
    hbar: f64,
    cutoff: usize,
    mode: i64,
    entries: Vec<EntryRecord>,
}

impl From<&AlgebraElement> for ElementFile {
    fn from(el: &AlgebraElement) -> Self {
        Self {
            n: el.cfg.n(),
            hbar: el.cfg.hbar(),
            cutoff: el.cutoff,
            mode: el.mode,
            entries: el
                .entries()
                .map(|(a, b, c)| EntryRecord {
                    a: a.entries().to_vec(),
                    b: b.entries().to_vec(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

impl TryFrom<ElementFile> for AlgebraElement {
    type Error = Error;

    fn try_from(file: ElementFile) -> Result<Self> {
        let cfg = PhaseSpaceConfig::new(file.n, file.hbar)?;
        AlgebraElement::from_entries(
            &cfg,
            file.cutoff,
            file.mode,
            file.entries.into_iter().map(|e| {
                (
                    MultiIndex::new(e.a),
                    MultiIndex::new(e.b),
                    Complex64::new(e.re, e.im),
                )
            }),
        )
    }
}
