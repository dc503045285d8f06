//! Bundle data: background holomorphic structure, Higgs fields, metrics,
//! and the catalog of exactly-analyzable examples.
//!
//! A degree-d line-bundle factor is realized as U(1) link variables with
//! constant plaquette phase 2 pi d / N^2 (flux gauge), one such factor per
//! diagonal block. Higgs fields are per-site matrices M (the dz-component
//! of phi) given in the flux gauge; catalog fields are covariantly constant
//! so holomorphy is exact. Metrics are per-site Hermitian positive-definite
//! matrices; hermiticity is re-established by symmetrization on every
//! construction and eigenvalues are kept above a configurable floor.

use crate::error::{Error, Result};
use crate::numerics::{c_re, hermitian_eig, r, CMat, Real, SplitMix64, C};
use crate::surface::{LatticeSurface, MatrixField};
use num_complex::Complex;
use num_traits::{One, Zero};

/// Lattice direction of a link.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    X,
    Y,
}

/// Background holomorphic structure: unitary link variables realizing a
/// split bundle with integer flux per diagonal block.
#[derive(Clone, Debug)]
pub struct BackgroundBundle<S: Real> {
    pub surface: LatticeSurface<S>,
    rank: usize,
    flux: Vec<i64>,
    links_x: MatrixField<S>,
    links_y: MatrixField<S>,
    /// Per-site flux density i^-1 Log(P_background) / a^2 (the background
    /// contribution to the mean curvature); gauge-covariant by construction.
    flux_density: MatrixField<S>,
    flux_density_scalar: bool,
    has_flux: bool,
}

/// Constant-flux background: every plaquette of block i carries phase
/// 2 pi d_i / N^2, so the total phase per block is exactly 2 pi d_i.
pub fn build_background<S: Real>(
    surface: LatticeSurface<S>,
    rank: usize,
    flux: &[i64],
) -> Result<BackgroundBundle<S>> {
    if rank == 0 {
        return Err(Error::Validation("bundle rank must be positive".into()));
    }
    if flux.len() != rank {
        return Err(Error::Validation(format!(
            "flux vector has {} entries for rank {rank}",
            flux.len()
        )));
    }
    let n = surface.n();
    let n2 = (n * n) as i64;
    for &d in flux {
        if n2 <= 2 * d.abs() {
            return Err(Error::Validation(format!(
                "flux {d} too large for N = {n}: need N^2 > 2|d| to keep plaquette \
                 phases on the principal branch"
            )));
        }
    }
    let two_pi = r::<S>(2.0 * std::f64::consts::PI);
    let phase0: Vec<S> = flux
        .iter()
        .map(|&d| two_pi * r(d as f64) / r(n2 as f64))
        .collect();
    let sites = surface.site_count();
    let links_x = MatrixField::from_fn(sites, rank, |idx| {
        let (_, y) = surface.coords(idx);
        CMat::from_fn(rank, |i, j| {
            if i == j {
                Complex::from_polar(S::one(), phase0[i] * r(y as f64))
            } else {
                C::zero()
            }
        })
    });
    let links_y = MatrixField::from_fn(sites, rank, |idx| {
        let (x, y) = surface.coords(idx);
        CMat::from_fn(rank, |i, j| {
            if i != j {
                C::zero()
            } else if y == n - 1 {
                Complex::from_polar(S::one(), -phase0[i] * r((n * x) as f64))
            } else {
                C::one()
            }
        })
    });
    BackgroundBundle::from_links(surface, rank, flux.to_vec(), links_x, links_y)
}

impl<S: Real> BackgroundBundle<S> {
    /// Assemble a background from explicit unitary links (used for the
    /// adjoint/endomorphism bundle). Links are validated for unitarity and
    /// the per-site flux density is extracted from the plaquette logs.
    pub fn from_links(
        surface: LatticeSurface<S>,
        rank: usize,
        flux: Vec<i64>,
        links_x: MatrixField<S>,
        links_y: MatrixField<S>,
    ) -> Result<Self> {
        let tol = r::<S>(1e-10);
        for field in [&links_x, &links_y] {
            if field.site_count() != surface.site_count() || field.rank() != rank {
                return Err(Error::Dimension("link field shape mismatch".into()));
            }
            for u in field.iter() {
                let dev = (&(&u.adjoint() * u) - &CMat::identity(rank)).fro_norm();
                if dev > tol {
                    return Err(Error::Validation("non-unitary link variable".into()));
                }
            }
        }
        let mut bundle = BackgroundBundle {
            surface,
            rank,
            flux,
            links_x,
            links_y,
            flux_density: MatrixField::zeros(surface.site_count(), rank),
            flux_density_scalar: true,
            has_flux: false,
        };
        let inv_a2 = S::one() / (surface.spacing() * surface.spacing());
        let minus_i = Complex::new(S::zero(), -S::one());
        let mut scalar = true;
        let mut sup = S::zero();
        let density = MatrixField::from_fn(surface.site_count(), rank, |idx| {
            let p = bundle.background_plaquette(idx);
            let lg = crate::numerics::logm_principal(&p).expect("background plaquette log");
            let f = lg.scale(minus_i).scale_re(inv_a2).hermitize();
            let tr = f.trace().scale(S::one() / r(rank as f64));
            let mut dev = f.clone();
            for i in 0..rank {
                dev[(i, i)] = dev[(i, i)] - tr;
            }
            if dev.fro_norm() > r::<S>(1e-9) * (S::one() + f.fro_norm()) {
                scalar = false;
            }
            let n = f.fro_norm();
            if n > sup {
                sup = n;
            }
            f
        });
        bundle.flux_density = density;
        bundle.flux_density_scalar = scalar;
        bundle.has_flux = sup > r(1e-10);
        Ok(bundle)
    }

    /// Background contribution to the mean curvature at a site.
    #[inline]
    pub fn flux_density_at(&self, idx: usize) -> &CMat<S> {
        self.flux_density.at(idx)
    }

    #[inline]
    pub fn has_flux(&self) -> bool {
        self.has_flux
    }

    /// Whether the flux density is a scalar matrix at every site (then the
    /// spectral dressing in the mean curvature is the identity).
    #[inline]
    pub fn flux_density_is_scalar(&self) -> bool {
        self.flux_density_scalar
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    pub fn flux(&self) -> &[i64] {
        &self.flux
    }

    pub fn total_flux(&self) -> i64 {
        self.flux.iter().sum()
    }

    #[inline]
    pub fn link(&self, idx: usize, dir: Dir) -> &CMat<S> {
        match dir {
            Dir::X => self.links_x.at(idx),
            Dir::Y => self.links_y.at(idx),
        }
    }

    /// Transport an endomorphism-valued matrix from site idx+dir to idx:
    /// U m U^dagger.
    pub fn transport_endo(&self, idx: usize, dir: Dir, m: &CMat<S>) -> CMat<S> {
        let u = self.link(idx, dir);
        &(u * m) * &u.adjoint()
    }

    /// Transport from site idx to idx+dir (backward transport of data at idx).
    pub fn transport_endo_bwd(&self, idx: usize, dir: Dir, m: &CMat<S>) -> CMat<S> {
        let u = self.link(idx, dir);
        &(&u.adjoint() * m) * u
    }

    #[inline]
    pub fn neighbor(&self, idx: usize, dir: Dir) -> usize {
        match dir {
            Dir::X => self.surface.shift(idx, 1, 0),
            Dir::Y => self.surface.shift(idx, 0, 1),
        }
    }

    #[inline]
    pub fn neighbor_bwd(&self, idx: usize, dir: Dir) -> usize {
        match dir {
            Dir::X => self.surface.shift(idx, -1, 0),
            Dir::Y => self.surface.shift(idx, 0, -1),
        }
    }

    /// Background plaquette holonomy at a site, traversed y-first (the
    /// orientation fixed by the flux calibration):
    /// P = U_y(s) U_x(s+y) U_y(s+x)^-1 U_x(s)^-1.
    pub fn background_plaquette(&self, idx: usize) -> CMat<S> {
        let sx = self.neighbor(idx, Dir::X);
        let sy = self.neighbor(idx, Dir::Y);
        let uy = self.link(idx, Dir::Y);
        let ux_up = self.link(sy, Dir::X);
        let uy_right = self.link(sx, Dir::Y);
        let ux = self.link(idx, Dir::X);
        &(&(uy * ux_up) * &uy_right.adjoint()) * &ux.adjoint()
    }

    /// Apply a constant unitary gauge transformation to every link:
    /// U -> g U g^dagger. Used by covariance property tests.
    pub fn gauge_transform(&self, g: &CMat<S>) -> Result<Self> {
        let gi = g.adjoint();
        let conj = |m: &CMat<S>| &(g * m) * &gi;
        BackgroundBundle::from_links(
            self.surface,
            self.rank,
            self.flux.clone(),
            self.links_x.map(conj),
            self.links_y.map(conj),
        )
    }
}

/// Result of the holomorphy/integrability check of a Higgs field.
#[derive(Clone, Copy, Debug)]
pub struct HiggsCheck<S: Real> {
    /// Sup norm of the covariant backward-difference dbar of phi.
    pub holomorphy_residual: S,
    /// Whether [phi, phi] vanishes identically (it always does pointwise;
    /// reported for completeness since the (2,0) target is zero on a curve).
    pub integrability_ok: bool,
}

/// Covariant dbar residual and pointwise integrability of a candidate
/// Higgs field (per-site dz-coefficients M).
pub fn verify_higgs<S: Real>(
    bundle: &BackgroundBundle<S>,
    phi: &MatrixField<S>,
) -> Result<HiggsCheck<S>> {
    if phi.site_count() != bundle.surface.site_count() || phi.rank() != bundle.rank() {
        return Err(Error::Dimension("Higgs field shape mismatch".into()));
    }
    let a = bundle.surface.spacing();
    let half = r::<S>(0.5);
    let mut sup = S::zero();
    let mut comm_sup = S::zero();
    for idx in 0..bundle.surface.site_count() {
        let m = phi.at(idx);
        // Backward covariant difference: compare with the neighbor at idx-mu
        // transported forward into the frame at idx.
        let bx = bundle.neighbor_bwd(idx, Dir::X);
        let by = bundle.neighbor_bwd(idx, Dir::Y);
        let tx = {
            let u = bundle.link(bx, Dir::X);
            &(&u.adjoint() * phi.at(bx)) * u
        };
        let ty = {
            let u = bundle.link(by, Dir::Y);
            &(&u.adjoint() * phi.at(by)) * u
        };
        let dx = (m - &tx).scale_re(S::one() / a);
        let dy = (m - &ty).scale_re(S::one() / a);
        // dbar coefficient: (grad_x + i grad_y)/2.
        let dbar = (&dx + &dy.scale(Complex::new(S::zero(), S::one()))).scale_re(half);
        let v = dbar.fro_norm();
        if v > sup {
            sup = v;
        }
        let c = CMat::commutator(m, m).fro_norm();
        if c > comm_sup {
            comm_sup = c;
        }
    }
    Ok(HiggsCheck {
        holomorphy_residual: sup,
        integrability_ok: comm_sup <= r(1e-14),
    })
}

/// Higgs field with its cached holomorphy residual.
#[derive(Clone, Debug)]
pub struct HiggsField<S: Real> {
    phi: MatrixField<S>,
    pub holomorphy_residual: S,
}

impl<S: Real> HiggsField<S> {
    /// Default holomorphy tolerance for catalog fields, which are
    /// covariantly constant and therefore exact.
    pub fn default_tol() -> S {
        r(1e-8)
    }

    pub fn new(bundle: &BackgroundBundle<S>, phi: MatrixField<S>, tol: S) -> Result<Self> {
        let check = verify_higgs(bundle, &phi)?;
        if check.holomorphy_residual > tol {
            return Err(Error::Validation(format!(
                "Higgs field is not holomorphic: residual {:e} exceeds tolerance {:e}",
                check.holomorphy_residual.to_f64().unwrap_or(f64::NAN),
                tol.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(HiggsField { phi, holomorphy_residual: check.holomorphy_residual })
    }

    pub fn zero(bundle: &BackgroundBundle<S>) -> Self {
        HiggsField {
            phi: MatrixField::zeros(bundle.surface.site_count(), bundle.rank()),
            holomorphy_residual: S::zero(),
        }
    }

    pub fn constant(bundle: &BackgroundBundle<S>, m: CMat<S>) -> Result<Self> {
        let phi = MatrixField::constant(bundle.surface.site_count(), m);
        Self::new(bundle, phi, Self::default_tol())
    }

    #[inline]
    pub fn field(&self) -> &MatrixField<S> {
        &self.phi
    }

    #[inline]
    pub fn at(&self, idx: usize) -> &CMat<S> {
        self.phi.at(idx)
    }

    pub fn is_zero(&self) -> bool {
        self.phi.sup_fro_norm() == S::zero()
    }

    pub fn gauge_transform(&self, bundle: &BackgroundBundle<S>, g: &CMat<S>) -> Result<Self> {
        let gi = g.adjoint();
        let phi = self.phi.map(|m| &(g * m) * &gi);
        Self::new(bundle, phi, r(1e-6))
    }
}

/// Hermitian positive-definite metric field (the flow unknown h).
#[derive(Clone, Debug)]
pub struct MetricField<S: Real> {
    h: MatrixField<S>,
    /// Smallest eigenvalue over all sites, cached at construction.
    pub min_eigenvalue: S,
    pub eig_floor: S,
}

impl<S: Real> MetricField<S> {
    pub fn default_floor() -> S {
        r(1e-10)
    }

    /// Symmetrize and validate positivity above the floor.
    pub fn new(field: MatrixField<S>, eig_floor: S) -> Result<Self> {
        let h = field.map(|m| m.hermitize());
        let mut min_eig = S::infinity();
        for m in h.iter() {
            let eig = hermitian_eig(m)?;
            if eig.min_eig() < min_eig {
                min_eig = eig.min_eig();
            }
        }
        if min_eig < eig_floor {
            return Err(Error::Conditioning(format!(
                "metric eigenvalue {:e} below floor {:e}",
                min_eig.to_f64().unwrap_or(f64::NAN),
                eig_floor.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(MetricField { h, min_eigenvalue: min_eig, eig_floor })
    }

    pub fn identity(surface: &LatticeSurface<S>, rank: usize) -> Self {
        MetricField {
            h: MatrixField::constant(surface.site_count(), CMat::identity(rank)),
            min_eigenvalue: S::one(),
            eig_floor: Self::default_floor(),
        }
    }

    /// exp of a Hermitian field: positive definite by construction.
    pub fn from_exp(field: &MatrixField<S>, eig_floor: S) -> Result<Self> {
        let h = MatrixField::from_fn(field.site_count(), field.rank(), |idx| {
            let eig = hermitian_eig(&field.at(idx).hermitize()).expect("hermitian eig");
            eig.apply(|x| c_re(x.exp()))
        });
        Self::new(h, eig_floor)
    }

    #[inline]
    pub fn field(&self) -> &MatrixField<S> {
        &self.h
    }

    #[inline]
    pub fn at(&self, idx: usize) -> &CMat<S> {
        self.h.at(idx)
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.h.rank()
    }

    #[inline]
    pub fn site_count(&self) -> usize {
        self.h.site_count()
    }

    pub fn hermiticity_defect(&self) -> S {
        let mut dev = S::zero();
        for m in self.h.iter() {
            let d = (m - &m.adjoint()).fro_norm();
            if d > dev {
                dev = d;
            }
        }
        dev
    }

    pub fn gauge_transform(&self, g: &CMat<S>) -> Result<Self> {
        // h pairs vectors, so h -> g^-dagger h g^-1; for unitary g that is
        // g h g^dagger.
        let gi = g.adjoint();
        Self::new(self.h.map(|m| &(g * m) * &gi), self.eig_floor)
    }
}

/// Deterministic smooth positive metric used for seeded initial data:
/// h = exp(A) with A a low-frequency Hermitian field drawn from splitmix64.
/// Seed 0 yields the identity metric.
pub fn seeded_positive_metric<S: Real>(
    surface: &LatticeSurface<S>,
    rank: usize,
    seed: u64,
    amplitude: S,
) -> Result<MetricField<S>> {
    const MODES: [(f64, f64); 6] =
        [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0), (2.0, 0.0), (0.0, 2.0)];
    seeded_metric_with_modes(surface, rank, seed, amplitude, &MODES)
}

/// Variant restricted to the softest Fourier modes (|m|^2 <= 2); used where
/// finite-difference error budgets require mild curvature of the flow.
pub fn seeded_smooth_metric<S: Real>(
    surface: &LatticeSurface<S>,
    rank: usize,
    seed: u64,
    amplitude: S,
) -> Result<MetricField<S>> {
    const MODES: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0)];
    seeded_metric_with_modes(surface, rank, seed, amplitude, &MODES)
}

fn seeded_metric_with_modes<S: Real>(
    surface: &LatticeSurface<S>,
    rank: usize,
    seed: u64,
    amplitude: S,
    modes: &[(f64, f64)],
) -> Result<MetricField<S>> {
    if seed == 0 {
        return Ok(MetricField::identity(surface, rank));
    }
    let mut rng = SplitMix64::new(seed);
    let coeffs: Vec<(CMat<S>, S)> = modes
        .iter()
        .map(|_| {
            let m = rng.hermitian::<S>(rank, amplitude);
            let th: S = rng.next_sym::<S>() * r(std::f64::consts::PI);
            (m, th)
        })
        .collect();
    let n = surface.n() as f64;
    let field = MatrixField::from_fn(surface.site_count(), rank, |idx| {
        let (x, y) = surface.coords(idx);
        let mut acc = CMat::zeros(rank);
        for ((mat, th), (mx, my)) in coeffs.iter().zip(modes.iter()) {
            let arg = r::<S>(2.0 * std::f64::consts::PI * (mx * x as f64 + my * y as f64) / n) + *th;
            acc = &acc + &mat.scale_re(arg.cos());
        }
        acc
    });
    MetricField::from_exp(&field, MetricField::default_floor())
}

/// Named example with its exact expected stability verdict.
#[derive(Clone, Debug)]
pub struct ExampleSpec<S: Real> {
    pub name: String,
    pub rank: usize,
    pub flux: Vec<i64>,
    /// Constant Higgs matrix M (phi = M dz in the flux gauge).
    pub higgs: CMat<S>,
    pub expected_verdict: crate::stability::VerdictClass,
    pub expected_destabilizer: Option<crate::stability::SubbundleDescriptor>,
}

impl<S: Real> ExampleSpec<S> {
    pub fn build(
        &self,
        surface: LatticeSurface<S>,
    ) -> Result<(BackgroundBundle<S>, HiggsField<S>)> {
        let bundle = build_background(surface, self.rank, &self.flux)?;
        let phi = HiggsField::constant(&bundle, self.higgs.clone())?;
        Ok((bundle, phi))
    }
}

/// Flat line bundle of degree d with zero Higgs field.
pub fn flat_line_example<S: Real>(d: i64) -> ExampleSpec<S> {
    use crate::stability::VerdictClass;
    ExampleSpec {
        name: format!("flat-line-{d}"),
        rank: 1,
        flux: vec![d],
        higgs: CMat::zeros(1),
        expected_verdict: VerdictClass::Polystable,
        expected_destabilizer: None,
    }
}

/// The four-example catalog exercised by every flow and stability test.
pub fn catalog<S: Real>() -> Vec<ExampleSpec<S>> {
    use crate::stability::{SubbundleDescriptor, SubbundleKind, VerdictClass};
    let nilpotent = CMat::from_rows_f64(&[
        vec![(0.0, 0.0), (1.0, 0.0)],
        vec![(0.0, 0.0), (0.0, 0.0)],
    ]);
    let diag = CMat::from_rows_f64(&[
        vec![(1.0, 0.0), (0.0, 0.0)],
        vec![(0.0, 0.0), (-1.0, 0.0)],
    ]);
    vec![
        flat_line_example(0),
        ExampleSpec {
            name: "nilpotent".into(),
            rank: 2,
            flux: vec![0, 0],
            higgs: nilpotent,
            expected_verdict: VerdictClass::StrictlySemistable,
            expected_destabilizer: Some(SubbundleDescriptor {
                kind: SubbundleKind::Eigenline,
                indices: vec![0, 1],
                eigenvector: Some(vec![(1.0, 0.0), (0.0, 0.0)]),
                degree: 0,
                rank: 1,
            }),
        },
        ExampleSpec {
            name: "split-unstable".into(),
            rank: 2,
            flux: vec![1, -1],
            higgs: CMat::zeros(2),
            expected_verdict: VerdictClass::Unstable,
            expected_destabilizer: Some(SubbundleDescriptor {
                kind: SubbundleKind::CoordinateBlock,
                indices: vec![0],
                eigenvector: None,
                degree: 1,
                rank: 1,
            }),
        },
        ExampleSpec {
            name: "diag-polystable".into(),
            rank: 2,
            flux: vec![0, 0],
            higgs: diag,
            expected_verdict: VerdictClass::Polystable,
            expected_destabilizer: None,
        },
    ]
}

/// Look up a catalog example by name; "flat-line-<d>" is parsed dynamically.
pub fn catalog_lookup<S: Real>(name: &str) -> Result<ExampleSpec<S>> {
    if let Some(rest) = name.strip_prefix("flat-line-") {
        if let Ok(d) = rest.parse::<i64>() {
            return Ok(flat_line_example(d));
        }
    }
    catalog::<S>()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Validation(format!("unknown catalog example '{name}'")))
}
