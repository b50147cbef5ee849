//! The flat phase space `X = C^n`.
//!
//! Real tangent vectors are encoded by their holomorphic components `u_k`;
//! the anti-holomorphic components are the conjugates. Under `z = x + iy` the
//! Liouville volume is plain Lebesgue measure on `R^{2n}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serde_complex;

/// Default cap on the number of quadrature nodes.
pub const DEFAULT_NODE_CAP: usize = 10_000_000;

/// Dimension, action unit and fiber period shared by every computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSpaceConfig {
    n: usize,
    hbar: f64,
    h: f64,
}

impl PhaseSpaceConfig {
    pub fn new(n: usize, hbar: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "dimension n must be at least 1".into(),
            ));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        Ok(Self {
            n,
            hbar,
            h: 2.0 * PI * hbar,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Fiber period `h = 2π·ħ`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub(crate) fn ensure_dim(&self, found: usize) -> Result<()> {
        if found != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found,
            });
        }
        Ok(())
    }
}

macro_rules! complex_vector {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(#[serde(with = "serde_complex")] Vec<Complex64>);

        impl $name {
            /// Fails on NaN or infinite entries.
            pub fn new(coords: Vec<Complex64>) -> Result<Self> {
                if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(Error::NonFinite);
                }
                Ok(Self(coords))
            }

            pub fn zeros(n: usize) -> Self {
                Self(vec![Complex64::new(0.0, 0.0); n])
            }

            pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
                Self::new(pairs.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn coords(&self) -> &[Complex64] {
                &self.0
            }

            pub fn norm_sqr(&self) -> f64 {
                self.0.iter().map(|c| c.norm_sqr()).sum()
            }

            /// Componentwise `e^{-is}` rotation.
            pub fn rotated(&self, s: f64) -> Self {
                let phase = Complex64::from_polar(1.0, -s);
                Self(self.0.iter().map(|c| c * phase).collect())
            }

            #[allow(dead_code)]
            pub(crate) fn from_raw(coords: Vec<Complex64>) -> Self {
                Self(coords)
            }
        }

        impl std::ops::Index<usize> for $name {
            type Output = Complex64;
            fn index(&self, k: usize) -> &Complex64 {
                &self.0[k]
            }
        }
    };
}

complex_vector!(
    /// A point `z = (z_1, …, z_n)` of `X`.
    ComplexPoint
);

complex_vector!(
    /// A real tangent vector, stored by its holomorphic components.
    TangentVector
);

impl ComplexPoint {
    pub fn distance(&self, other: &ComplexPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `z + s·u`.
    pub fn translated(&self, u: &TangentVector, s: f64) -> ComplexPoint {
        ComplexPoint(
            self.0
                .iter()
                .zip(u.coords())
                .map(|(z, d)| z + d * s)
                .collect(),
        )
    }
}

/// The complex value `(i/2) Σ (u_k conj(v_k) − v_k conj(u_k))` before
/// discarding its (vanishing) imaginary part.
pub fn symplectic_form_raw(
    u: &TangentVector,
    v: &TangentVector,
    cfg: &PhaseSpaceConfig,
) -> Result<Complex64> {
    cfg.ensure_dim(u.dim())?;
    cfg.ensure_dim(v.dim())?;
    let sum: Complex64 = u
        .coords()
        .iter()
        .zip(v.coords())
        .map(|(a, b)| a * b.conj() - b * a.conj())
        .sum();
    Ok(Complex64::new(0.0, 0.5) * sum)
}

/// `ω(u, v)` for `ω = (i/2) Σ dz_k ∧ dz̄_k`.
pub fn symplectic_form(
    u: &TangentVector,
    v: &TangentVector,
    cfg: &PhaseSpaceConfig,
) -> Result<f64> {
    Ok(symplectic_form_raw(u, v, cfg)?.re)
}

/// The complex value `(i/4) Σ (z_k conj(u_k) − conj(z_k) u_k)`, i.e.
/// `½ Σ (x_k dy_k − y_k dx_k)` applied to `u`. This sign makes `dα = ω`.
pub fn primitive_alpha_raw(
    z: &ComplexPoint,
    u: &TangentVector,
    cfg: &PhaseSpaceConfig,
) -> Result<Complex64> {
    cfg.ensure_dim(z.dim())?;
    cfg.ensure_dim(u.dim())?;
    let sum: Complex64 = z
        .coords()
        .iter()
        .zip(u.coords())
        .map(|(z, u)| z * u.conj() - z.conj() * u)
        .sum();
    Ok(Complex64::new(0.0, 0.25) * sum)
}

/// The rotation-invariant primitive `α` evaluated at `z` on `u`.
pub fn primitive_alpha(z: &ComplexPoint, u: &TangentVector, cfg: &PhaseSpaceConfig) -> Result<f64> {
    Ok(primitive_alpha_raw(z, u, cfg)?.re)
}

/// Central-difference evaluation of `dα(u, v)` at `z` using
/// `dα(u, v) = D_u[α(·)(v)] − D_v[α(·)(u)]` for constant vector fields.
pub fn exterior_derivative_check(
    z: &ComplexPoint,
    u: &TangentVector,
    v: &TangentVector,
    step: f64,
    cfg: &PhaseSpaceConfig,
) -> Result<f64> {
    cfg.ensure_dim(z.dim())?;
    cfg.ensure_dim(u.dim())?;
    cfg.ensure_dim(v.dim())?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let directional = |dir: &TangentVector, arg: &TangentVector| -> Result<f64> {
        let plus = primitive_alpha(&z.translated(dir, step), arg, cfg)?;
        let minus = primitive_alpha(&z.translated(dir, -step), arg, cfg)?;
        Ok((plus - minus) / (2.0 * step))
    };
    Ok(directional(u, v)? - directional(v, u)?)
}

/// Gauss-Hermite rule for the weight `e^{-x²}`, returning nodes together with
/// the *Lebesgue* weights `w_i·e^{x_i²}`, so that
/// `∫ f(x) dx ≈ Σ W_i f(x_i)` for `f = polynomial · e^{-x²}`.
///
/// The recurrence runs on Hermite functions (orthonormal polynomials times
/// `e^{-x²/2}`), which keeps the Lebesgue weights finite at large order.
pub fn gauss_hermite_lebesgue(order: usize) -> (Vec<f64>, Vec<f64>) {
    const MAX_ITER: usize = 100;
    let pim4 = PI.powf(-0.25);
    let nf = order as f64;
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    let mut z = 0.0;
    let m = order.div_ceil(2);
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..MAX_ITER {
            let (p_n, p_nm1) = hermite_functions(order, z, pim4);
            pp = (2.0 * nf).sqrt() * p_nm1;
            let dz = p_n / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        // Recompute the derivative at the converged root.
        let (_, p_nm1) = hermite_functions(order, z, pim4);
        if p_nm1 != 0.0 {
            pp = (2.0 * nf).sqrt() * p_nm1;
        }
        x[i] = z;
        x[order - 1 - i] = -z;
        let weight = 2.0 / (pp * pp);
        w[i] = weight;
        w[order - 1 - i] = weight;
    }
    if order % 2 == 1 {
        x[order / 2] = 0.0;
    }
    // Ascending order.
    x.reverse();
    w.reverse();
    (x, w)
}

/// Values of the orthonormal Hermite functions `ψ_N(x)` and `ψ_{N-1}(x)`.
fn hermite_functions(order: usize, x: f64, pim4: f64) -> (f64, f64) {
    let mut p1 = pim4 * (-0.5 * x * x).exp();
    let mut p2 = 0.0;
    for j in 1..=order {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = x * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}

/// Tensor-product Gauss-Hermite grid over `R^{2n}` adapted to `e^{-|z|²/ħ}`.
///
/// Weights are Lebesgue (Liouville) weights: the Gaussian stays inside the
/// integrand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    n: usize,
    hbar: f64,
    order: usize,
    nodes: Vec<ComplexPoint>,
    weights: Vec<f64>,
}

pub fn build_quadrature(cfg: &PhaseSpaceConfig, order: usize) -> Result<QuadratureGrid> {
    build_quadrature_with_cap(cfg, order, DEFAULT_NODE_CAP)
}

pub fn build_quadrature_with_cap(
    cfg: &PhaseSpaceConfig,
    order: usize,
    cap: usize,
) -> Result<QuadratureGrid> {
    if order < 2 {
        return Err(Error::InvalidConfig(format!(
            "quadrature order must be at least 2, got {order}"
        )));
    }
    let axes = 2 * cfg.n();
    let count = (order as u128)
        .checked_pow(axes as u32)
        .unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(Error::TooManyNodes { count, cap });
    }
    let count = count as usize;

    let scale = cfg.hbar().sqrt();
    let (xi, wi) = gauss_hermite_lebesgue(order);
    let x: Vec<f64> = xi.iter().map(|v| v * scale).collect();
    let w: Vec<f64> = wi.iter().map(|v| v * scale).collect();

    let mut nodes = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    let mut digits = vec![0usize; axes];
    for _ in 0..count {
        let coords = (0..cfg.n())
            .map(|k| Complex64::new(x[digits[2 * k]], x[digits[2 * k + 1]]))
            .collect();
        nodes.push(ComplexPoint::from_raw(coords));
        weights.push(digits.iter().map(|&d| w[d]).product());
        // Odometer increment, last axis fastest.
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < order {
                break;
            }
            *d = 0;
        }
    }
    Ok(QuadratureGrid {
        n: cfg.n(),
        hbar: cfg.hbar(),
        order,
        nodes,
        weights,
    })
}

impl QuadratureGrid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[ComplexPoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Whether the grid was built for this dimension and `ħ`.
    pub fn matches(&self, cfg: &PhaseSpaceConfig) -> bool {
        self.n == cfg.n() && self.hbar == cfg.hbar()
    }

    /// `∫_X f vol_ω`.
    pub fn integrate<F>(&self, f: F) -> Complex64
    where
        F: Fn(&ComplexPoint) -> Complex64,
    {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(z, &w)| f(z) * w)
            .sum()
    }

    pub fn integrate_real<F>(&self, f: F) -> f64
    where
        F: Fn(&ComplexPoint) -> f64,
    {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(z, &w)| f(z) * w)
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let grid: QuadratureGrid =
            serde_json::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let expected = (grid.order as u128).checked_pow(2 * grid.n as u32);
        if expected != Some(grid.nodes.len() as u128) || grid.weights.len() != grid.nodes.len() {
            return Err(Error::InvalidConfig(
                "grid node count does not equal order^(2n)".into(),
            ));
        }
        if grid.nodes.iter().any(|z| z.dim() != grid.n) {
            return Err(Error::DimensionMismatch {
                expected: grid.n,
                found: 0,
            });
        }
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tv(v: &[Complex64]) -> TangentVector {
        TangentVector::new(v.to_vec()).unwrap()
    }

    fn pt(v: &[Complex64]) -> ComplexPoint {
        ComplexPoint::new(v.to_vec()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(PhaseSpaceConfig::new(0, 1.0).is_err());
        assert!(PhaseSpaceConfig::new(1, 0.0).is_err());
        assert!(PhaseSpaceConfig::new(1, -1.0).is_err());
        let cfg = PhaseSpaceConfig::new(2, 0.5).unwrap();
        assert_eq!(cfg.h(), 2.0 * PI * 0.5);
    }

    #[test]
    fn rejects_non_finite_points() {
        assert_eq!(
            ComplexPoint::new(vec![c(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn symplectic_form_examples() {
        let one = PhaseSpaceConfig::new(1, 1.0).unwrap();
        let two = PhaseSpaceConfig::new(2, 1.0).unwrap();
        assert_eq!(
            symplectic_form(&tv(&[c(1.0, 0.0)]), &tv(&[c(0.0, 1.0)]), &one).unwrap(),
            1.0
        );
        assert_eq!(
            symplectic_form(&tv(&[c(1.0, 0.0)]), &tv(&[c(1.0, 0.0)]), &one).unwrap(),
            0.0
        );
        let u = tv(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let v = tv(&[c(0.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(symplectic_form(&u, &v, &two).unwrap(), 0.0);
        assert!(matches!(
            symplectic_form(&u, &tv(&[c(1.0, 0.0)]), &two),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn primitive_examples() {
        let cfg = PhaseSpaceConfig::new(1, 1.0).unwrap();
        let v = primitive_alpha(&pt(&[c(1.0, 0.0)]), &tv(&[c(0.0, 1.0)]), &cfg).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        let v = primitive_alpha(&pt(&[c(0.0, 0.0)]), &tv(&[c(3.0, -2.0)]), &cfg).unwrap();
        assert_eq!(v, 0.0);
        for theta in [0.3, 1.7] {
            let r = Complex64::from_polar(1.0, theta);
            let rotated = primitive_alpha(&pt(&[r]), &tv(&[c(0.0, 1.0) * r]), &cfg).unwrap();
            assert!((rotated - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn exterior_derivative_examples() {
        let one = PhaseSpaceConfig::new(1, 1.0).unwrap();
        let z = pt(&[c(0.7, 0.2)]);
        let d = exterior_derivative_check(&z, &tv(&[c(1.0, 0.0)]), &tv(&[c(0.0, 1.0)]), 1e-4, &one)
            .unwrap();
        assert!((d - 1.0).abs() < 1e-6);
        let u = tv(&[c(0.4, -1.1)]);
        assert_eq!(
            exterior_derivative_check(&z, &u, &u, 1e-4, &one).unwrap(),
            0.0
        );

        let two = PhaseSpaceConfig::new(2, 1.0).unwrap();
        let z = pt(&[c(0.3, -0.8), c(1.2, 0.5)]);
        let u = tv(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let v = tv(&[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(
            exterior_derivative_check(&z, &u, &v, 1e-4, &two)
                .unwrap()
                .abs()
                < 1e-6
        );
        assert!(exterior_derivative_check(&z, &u, &v, 0.0, &two).is_err());
    }

    #[test]
    fn gauss_hermite_low_orders() {
        // Order 2: nodes ±1/√2, Gauss weights √π/2.
        let (x, w) = gauss_hermite_lebesgue(2);
        let s = 0.5f64.sqrt();
        assert!((x[0] + s).abs() < 1e-14 && (x[1] - s).abs() < 1e-14);
        let expected = PI.sqrt() / 2.0 * (0.5f64).exp();
        assert!((w[0] - expected).abs() < 1e-13);
        // Order 3: nodes 0, ±√(3/2), Gauss weights 2√π/3, √π/6.
        let (x, w) = gauss_hermite_lebesgue(3);
        assert_eq!(x[1], 0.0);
        assert!((x[2] - 1.5f64.sqrt()).abs() < 1e-14);
        assert!((w[1] - 2.0 * PI.sqrt() / 3.0).abs() < 1e-13);
        assert!((w[2] - PI.sqrt() / 6.0 * 1.5f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn quadrature_gaussian_integrals() {
        let cfg = PhaseSpaceConfig::new(1, 1.0).unwrap();
        let grid = build_quadrature(&cfg, 20).unwrap();
        assert_eq!(grid.len(), 400);
        let g = grid.integrate_real(|z| (-z.norm_sqr()).exp());
        assert!((g - PI).abs() < 1e-8);
        let m = grid.integrate_real(|z| z.norm_sqr() * (-z.norm_sqr()).exp());
        assert!((m - PI).abs() < 1e-8);

        let cfg2 = PhaseSpaceConfig::new(2, 1.0).unwrap();
        let grid2 = build_quadrature(&cfg2, 12).unwrap();
        assert_eq!(grid2.len(), 12usize.pow(4));
        let g2 = grid2.integrate_real(|z| (-z.norm_sqr()).exp());
        assert!((g2 - PI * PI).abs() < 1e-6);
    }

    #[test]
    fn quadrature_scales_with_hbar() {
        for hbar in [0.25, 0.5, 3.0] {
            let cfg = PhaseSpaceConfig::new(1, hbar).unwrap();
            let grid = build_quadrature(&cfg, 20).unwrap();
            let g = grid.integrate_real(|z| (-z.norm_sqr() / hbar).exp());
            assert!((g / (PI * hbar) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn quadrature_rejects_bad_orders() {
        let cfg = PhaseSpaceConfig::new(3, 1.0).unwrap();
        assert!(matches!(
            build_quadrature(&cfg, 1),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            build_quadrature(&cfg, 20),
            Err(Error::TooManyNodes { .. })
        ));
        assert!(matches!(
            build_quadrature_with_cap(&cfg, 3, 100),
            Err(Error::TooManyNodes {
                count: 729,
                cap: 100
            })
        ));
    }

    #[test]
    fn grid_json_round_trip() {
        let cfg = PhaseSpaceConfig::new(1, 0.5).unwrap();
        let grid = build_quadrature(&cfg, 4).unwrap();
        let json = grid.to_json();
        assert!(json.contains("\"order\":4"));
        let back = QuadratureGrid::from_json(&json).unwrap();
        assert_eq!(back, grid);
        let mut value: serde_json::Value = serde_json::from_str(&json).unwrap();
        value["order"] = 5.into();
        assert!(QuadratureGrid::from_json(&value.to_string()).is_err());
    }
}
