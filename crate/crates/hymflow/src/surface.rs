//! Discretized flat-torus base manifold.
//!
//! The base is the square torus of side L sampled on an N x N grid with
//! spacing a = L/N, doubly periodic indexing, Euclidean area form, and
//! total volume V = L^2. Scalar fields integrate as a^2 * sum over sites;
//! endomorphism-valued two-forms are stored as per-plaquette phase-density
//! matrices F (the form equals F times the plaquette density), and the
//! Kahler contraction is
//!
//!   i Lambda (F . plaquette density) = F / a^2 .
//!
//! Sign and normalization are pinned operationally by the flux calibration:
//! a constant-flux background of total flux d must contract to the constant
//! mean curvature 2 pi d / V.

use crate::error::{Error, Result};
use crate::numerics::{r, CMat, Real, C};
use num_traits::Zero;

/// Square flat torus, N sites per side, side length L.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSurface<S: Real> {
    sites_per_side: usize,
    side_length: S,
    /// Complex dimension of the base; fixed to 1 by the lattice backend.
    pub complex_dim: u32,
}

impl<S: Real> LatticeSurface<S> {
    pub fn new(sites_per_side: usize, side_length: S) -> Result<Self> {
        if sites_per_side < 4 {
            return Err(Error::Validation(format!(
                "lattice needs N >= 4 sites per side, got N = {sites_per_side}"
            )));
        }
        if !(side_length > S::zero()) {
            return Err(Error::Validation("side length L must be positive".into()));
        }
        Ok(LatticeSurface { sites_per_side, side_length, complex_dim: 1 })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.sites_per_side
    }

    #[inline]
    pub fn side(&self) -> S {
        self.side_length
    }

    /// Total area V = L^2.
    #[inline]
    pub fn volume(&self) -> S {
        self.side_length * self.side_length
    }

    /// Lattice spacing a = L/N.
    #[inline]
    pub fn spacing(&self) -> S {
        self.side_length / r(self.sites_per_side as f64)
    }

    #[inline]
    pub fn site_count(&self) -> usize {
        self.sites_per_side * self.sites_per_side
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize) -> usize {
        let n = self.sites_per_side;
        (y % n) * n + (x % n)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        let n = self.sites_per_side;
        (idx % n, idx / n)
    }

    /// Neighbor site index shifted by (dx, dy), periodic.
    #[inline]
    pub fn shift(&self, idx: usize, dx: isize, dy: isize) -> usize {
        let n = self.sites_per_side as isize;
        let (x, y) = self.coords(idx);
        let xs = (x as isize + dx).rem_euclid(n) as usize;
        let ys = (y as isize + dy).rem_euclid(n) as usize;
        ys as usize * self.sites_per_side + xs
    }

    /// Integrate a complex scalar field against the volume form: a^2 sum f.
    pub fn integrate(&self, f: &[C<S>]) -> Result<C<S>> {
        if f.len() != self.site_count() {
            return Err(Error::Dimension(format!(
                "scalar field has {} entries, lattice has {} sites",
                f.len(),
                self.site_count()
            )));
        }
        let a2 = self.spacing() * self.spacing();
        let mut acc = C::zero();
        for &v in f {
            acc = acc + v;
        }
        Ok(acc.scale(a2))
    }

    pub fn integrate_re(&self, f: &[S]) -> Result<S> {
        if f.len() != self.site_count() {
            return Err(Error::Dimension(format!(
                "scalar field has {} entries, lattice has {} sites",
                f.len(),
                self.site_count()
            )));
        }
        let a2 = self.spacing() * self.spacing();
        let mut acc = S::zero();
        for &v in f {
            acc = acc + v;
        }
        Ok(acc * a2)
    }

    /// i Lambda on an endomorphism-valued two-form stored as per-plaquette
    /// phase-density matrices: divides by a^2.
    pub fn lambda_contract(&self, two_form: &MatrixField<S>) -> Result<MatrixField<S>> {
        if two_form.site_count() != self.site_count() {
            return Err(Error::Dimension(format!(
                "two-form has {} plaquettes, lattice has {}",
                two_form.site_count(),
                self.site_count()
            )));
        }
        let inv_a2 = S::one() / (self.spacing() * self.spacing());
        Ok(two_form.map(|m| m.scale_re(inv_a2)))
    }
}

/// Per-site field of square complex matrices of a fixed rank.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixField<S: Real> {
    rank: usize,
    sites: usize,
    data: Vec<CMat<S>>,
}

impl<S: Real> MatrixField<S> {
    pub fn constant(sites: usize, m: CMat<S>) -> Self {
        MatrixField { rank: m.dim(), sites, data: vec![m; sites] }
    }

    pub fn zeros(sites: usize, rank: usize) -> Self {
        Self::constant(sites, CMat::zeros(rank))
    }

    pub fn from_fn(sites: usize, rank: usize, mut f: impl FnMut(usize) -> CMat<S>) -> Self {
        let data: Vec<CMat<S>> = (0..sites).map(|s| f(s)).collect();
        debug_assert!(data.iter().all(|m| m.dim() == rank));
        MatrixField { rank, sites, data }
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    pub fn site_count(&self) -> usize {
        self.sites
    }

    #[inline]
    pub fn at(&self, idx: usize) -> &CMat<S> {
        &self.data[idx]
    }

    #[inline]
    pub fn at_mut(&mut self, idx: usize) -> &mut CMat<S> {
        &mut self.data[idx]
    }

    pub fn map(&self, f: impl Fn(&CMat<S>) -> CMat<S>) -> Self {
        MatrixField {
            rank: self.rank,
            sites: self.sites,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &CMat<S>> {
        self.data.iter()
    }

    /// Pointwise trace as a complex scalar field.
    pub fn trace_field(&self) -> Vec<C<S>> {
        self.data.iter().map(|m| m.trace()).collect()
    }

    pub fn sup_fro_norm(&self) -> S {
        let mut m = S::zero();
        for mat in &self.data {
            let v = mat.fro_norm();
            if v > m {
                m = v;
            }
        }
        m
    }
}
