//! Multi-indices `a ∈ N^n` labelling Fock monomials `z^a`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::phase_space::ComplexPoint;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        Self(entries)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// The unit multi-index with a single 1 in slot `k`.
    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = vec![0; n];
        v[k] = 1;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// Total degree `|a| = Σ a_k`.
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// `a! = Π a_k!` as a float.
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&k| (1..=k).map(|j| j as f64).product::<f64>())
            .product()
    }

    /// All multi-indices of length `n` and total degree exactly `degree`,
    /// in lexicographic order.
    pub fn of_degree(n: usize, degree: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(n);
        fill(n, degree, &mut current, &mut out);
        out
    }

    /// All multi-indices with `|a| ≤ cutoff`, graded by degree, lexicographic
    /// within a degree.
    pub fn up_to(n: usize, cutoff: usize) -> Vec<MultiIndex> {
        (0..=cutoff).flat_map(|m| Self::of_degree(n, m)).collect()
    }

    /// Normalized Fock monomial `z^a / sqrt(a!·ħ^{|a|})`, orthonormal for the
    /// probability measure `e^{-|z|²/ħ}(πħ)^{-n} vol`.
    pub fn fock_monomial(&self, z: &ComplexPoint, hbar: f64) -> Complex64 {
        let mono: Complex64 = self
            .0
            .iter()
            .zip(z.coords())
            .map(|(&k, zk)| zk.powu(k as u32))
            .product();
        mono / (self.factorial() * hbar.powi(self.total() as i32)).sqrt()
    }
}

fn fill(slots: usize, remaining: usize, current: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    if slots == 0 {
        return;
    }
    if slots == 1 {
        current.push(remaining);
        out.push(MultiIndex(current.clone()));
        current.pop();
        return;
    }
    for k in 0..=remaining {
        current.push(k);
        fill(slots - 1, remaining - k, current, out);
        current.pop();
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}
