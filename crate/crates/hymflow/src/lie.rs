//! Reductive-group layer: Cartan involution, trace pairing, adjoint
//! representation, the Ad-image/complement splitting, induced metrics on
//! the endomorphism bundle, and approximate-HYM certificates at the
//! principal level.
//!
//! The pairing kappa is the matrix trace form tr(XY); on sl(m) it is
//! proportional to the Killing form (Killing = 2m * trace form), and the
//! positive norm attached to the Cartan involution iota(X) = -X^dag is
//! -tr(X iota(X)) = tr(X X^dag), the pointwise Frobenius norm.
//!
//! Principal-level statements are tested through the endomorphism bundle:
//! the background links, Higgs field, and metric of End(E) are the adjoint
//! images of the rank-m data, and a metric comes from a reduction exactly
//! when the mean curvature of End(E) lies in the image of ad. The numerical
//! surrogate is `reduction_residual`, the sup of the Ad-perp projection of
//! that mean curvature.

use crate::bundle::{BackgroundBundle, HiggsField, MetricField};
use crate::error::{Error, Result};
use crate::numerics::{r, CMat, Real, C};
use crate::surface::MatrixField;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupFamily {
    Gl,
    Sl,
}

/// Lie-algebra data of GL(m) or SL(m).
#[derive(Clone, Debug)]
pub struct ReductiveGroupData<S: Real> {
    pub family: GroupFamily,
    pub m: usize,
    pub algebra_dim: usize,
    /// Basis of the algebra as m x m matrices.
    pub basis: Vec<CMat<S>>,
    /// Gram matrix of kappa(X, Y) = tr(XY) on the basis.
    pub pairing: CMat<S>,
    /// ad(b_i) as algebra_dim x algebra_dim matrices in the basis.
    pub ad_matrices: Vec<CMat<S>>,
    /// Orthonormal (Hilbert-Schmidt) basis of span{ad(X)} in
    /// End(algebra); the Ad-perp projector subtracts this span.
    pub ad_image_orthobasis: Vec<CMat<S>>,
    /// Same span realized on gl(m) (m^2 x m^2 matrices in the elementary
    /// basis); used for the endomorphism-bundle residual.
    ad_image_orthobasis_gl: Vec<CMat<S>>,
    /// Basis of the center (empty for SL).
    pub center_basis: Vec<CMat<S>>,
}

/// Superoperator matrix of X -> A X B in the elementary basis E_ij,
/// index p = i*m + j.
pub fn conj_superop<S: Real>(a: &CMat<S>, b: &CMat<S>) -> CMat<S> {
    let m = a.dim();
    CMat::from_fn(m * m, |p, q| {
        let (i, j) = (p / m, p % m);
        let (k, l) = (q / m, q % m);
        a[(i, k)] * b[(l, j)]
    })
}

/// ad(K) acting on gl(m), as an m^2 x m^2 matrix.
pub fn ad_matrix_on_gl<S: Real>(k: &CMat<S>) -> CMat<S> {
    let id = CMat::identity(k.dim());
    &conj_superop(k, &id) - &conj_superop(&id, k)
}

fn gram_schmidt<S: Real>(candidates: &[CMat<S>]) -> Vec<CMat<S>> {
    let scale = candidates
        .iter()
        .map(|c| c.fro_norm())
        .fold(S::zero(), |a, b| a.max(b))
        .max(S::one());
    let mut basis: Vec<CMat<S>> = Vec::new();
    for raw in candidates {
        let mut v = raw.clone();
        // Two passes of re-orthogonalization keep the projector conditioned.
        for _ in 0..2 {
            for o in &basis {
                let cf = o.hs_dot(&v);
                v = &v - &o.scale(cf);
            }
        }
        let n = v.fro_norm();
        if n > r::<S>(1e-12) * scale {
            basis.push(v.scale_re(S::one() / n));
        }
    }
    basis
}

impl<S: Real> ReductiveGroupData<S> {
    pub fn new(family: GroupFamily, m: usize) -> Result<Self> {
        if m == 0 || (family == GroupFamily::Sl && m < 2) {
            return Err(Error::Validation("group rank too small".into()));
        }
        let mut basis: Vec<CMat<S>> = Vec::new();
        match family {
            GroupFamily::Gl => {
                for i in 0..m {
                    for j in 0..m {
                        basis.push(CMat::from_fn(m, |a, b| {
                            if a == i && b == j { C::new(S::one(), S::zero()) } else { C::zero() }
                        }));
                    }
                }
            }
            GroupFamily::Sl => {
                for i in 0..m {
                    for j in 0..m {
                        if i != j {
                            basis.push(CMat::from_fn(m, |a, b| {
                                if a == i && b == j {
                                    C::new(S::one(), S::zero())
                                } else {
                                    C::zero()
                                }
                            }));
                        }
                    }
                }
                for k in 0..m - 1 {
                    basis.push(CMat::from_fn(m, |a, b| {
                        if a != b {
                            C::zero()
                        } else if a == k {
                            C::new(S::one(), S::zero())
                        } else if a == k + 1 {
                            C::new(-S::one(), S::zero())
                        } else {
                            C::zero()
                        }
                    }));
                }
            }
        }
        let dim = basis.len();
        let pairing = CMat::from_fn(dim, |i, j| (&basis[i] * &basis[j]).trace());
        let data_no_ad = ReductiveGroupData {
            family,
            m,
            algebra_dim: dim,
            basis,
            pairing,
            ad_matrices: vec![],
            ad_image_orthobasis: vec![],
            ad_image_orthobasis_gl: vec![],
            center_basis: match family {
                GroupFamily::Gl => vec![CMat::identity(m)],
                GroupFamily::Sl => vec![],
            },
        };
        let ad_matrices: Vec<CMat<S>> = (0..dim)
            .map(|a| {
                CMat::from_fn(dim, |i, j| {
                    let br = CMat::commutator(&data_no_ad.basis[a], &data_no_ad.basis[j]);
                    data_no_ad.expand(&br).expect("bracket stays in the algebra")[i]
                })
            })
            .collect();
        let ad_image_orthobasis = gram_schmidt(&ad_matrices);
        let ad_gl: Vec<CMat<S>> =
            data_no_ad.basis.iter().map(ad_matrix_on_gl).collect();
        let ad_image_orthobasis_gl = gram_schmidt(&ad_gl);
        Ok(ReductiveGroupData { ad_matrices, ad_image_orthobasis, ad_image_orthobasis_gl, ..data_no_ad })
    }

    /// Coordinates of X in the algebra basis; error if X is outside the
    /// algebra (for SL: nonzero trace).
    pub fn expand(&self, x: &CMat<S>) -> Result<Vec<C<S>>> {
        if x.dim() != self.m {
            return Err(Error::Dimension("matrix size does not match the group".into()));
        }
        let tol = r::<S>(1e-10) * (S::one() + x.fro_norm());
        let mut coords = vec![C::zero(); self.algebra_dim];
        match self.family {
            GroupFamily::Gl => {
                for i in 0..self.m {
                    for j in 0..self.m {
                        coords[i * self.m + j] = x[(i, j)];
                    }
                }
            }
            GroupFamily::Sl => {
                if x.trace().norm() > tol {
                    return Err(Error::Validation(
                        "matrix has nonzero trace; not in sl(m)".into(),
                    ));
                }
                let mut idx = 0;
                for i in 0..self.m {
                    for j in 0..self.m {
                        if i != j {
                            coords[idx] = x[(i, j)];
                            idx += 1;
                        }
                    }
                }
                // Diagonal part in the H_k = E_kk - E_{k+1,k+1} basis:
                // alpha_k = sum_{i<=k} x_ii.
                let mut acc = C::zero();
                for k in 0..self.m - 1 {
                    acc = acc + x[(k, k)];
                    coords[idx] = acc;
                    idx += 1;
                }
            }
        }
        // Residual check.
        let mut rec = CMat::zeros(self.m);
        for (cf, b) in coords.iter().zip(self.basis.iter()) {
            rec = &rec + &b.scale(*cf);
        }
        if (&rec - x).fro_norm() > tol {
            return Err(Error::Validation("matrix is outside the Lie algebra".into()));
        }
        Ok(coords)
    }

    pub fn validate_member(&self, x: &CMat<S>) -> Result<()> {
        self.expand(x).map(|_| ())
    }
}

/// Cartan involution iota(X) = -X^dag; +1 eigenspace is the compact form.
pub fn cartan_involution<S: Real>(group: &ReductiveGroupData<S>, x: &CMat<S>) -> Result<CMat<S>> {
    group.validate_member(x)?;
    Ok(-&x.adjoint())
}

/// Which 1-form component an algebra-valued form coefficient multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormComponent {
    Dz,
    Dzbar,
}

impl FormComponent {
    pub fn conj(self) -> Self {
        match self {
            FormComponent::Dz => FormComponent::Dzbar,
            FormComponent::Dzbar => FormComponent::Dz,
        }
    }
}

/// Extension of iota to algebra-valued forms: iota(s (x) eta) =
/// -iota(s) (x) conj(eta). Applied to the Higgs term this produces the
/// metric adjoint, so D + phi + iota(phi) is the Hitchin-Simpson structure.
pub fn iota_on_forms<S: Real>(
    group: &ReductiveGroupData<S>,
    s: &CMat<S>,
    component: FormComponent,
) -> Result<(CMat<S>, FormComponent)> {
    group.validate_member(s)?;
    // -iota(s) = s^dag.
    Ok((s.adjoint(), component.conj()))
}

/// Positive pairing attached to the involution: -kappa(psi, iota(psi)).
pub fn cartan_pairing<S: Real>(psi: &CMat<S>) -> S {
    let iota = -&psi.adjoint();
    -(psi * &iota).trace().re
}

/// Norm of an algebra-valued section: max over sites of
/// sqrt(-kappa(psi, iota(psi))).
pub fn section_norm<S: Real>(
    group: &ReductiveGroupData<S>,
    field: &MatrixField<S>,
) -> Result<S> {
    let mut sup = S::zero();
    for psi in field.iter() {
        group.validate_member(psi)?;
        let p = cartan_pairing(psi);
        if p < -r::<S>(1e-12) {
            return Err(Error::Contract(
                "Cartan pairing returned a negative norm square".into(),
            ));
        }
        let v = p.max(S::zero()).sqrt();
        if v > sup {
            sup = v;
        }
    }
    Ok(sup)
}

/// Orthogonal projection onto the complement of span{ad(X)} inside
/// End(algebra): r(M) = M - Pi_ad(M).
pub fn ad_perp_projection<S: Real>(
    group: &ReductiveGroupData<S>,
    m: &CMat<S>,
) -> Result<CMat<S>> {
    if m.dim() != group.algebra_dim {
        return Err(Error::Dimension(format!(
            "expected a {0} x {0} algebra endomorphism",
            group.algebra_dim
        )));
    }
    let mut out = m.clone();
    for o in &group.ad_image_orthobasis {
        let cf = o.hs_dot(&out);
        out = &out - &o.scale(cf);
    }
    Ok(out)
}

fn ad_perp_on_gl<S: Real>(group: &ReductiveGroupData<S>, m: &CMat<S>) -> CMat<S> {
    let mut out = m.clone();
    for o in &group.ad_image_orthobasis_gl {
        let cf = o.hs_dot(&out);
        out = &out - &o.scale(cf);
    }
    out
}

/// Metric induced on End(E) by a rank-m metric h: the Gram matrix of
/// <A, B> = tr(h A h^-1 B^dag) in the elementary basis, which is the
/// superoperator X -> h X h^-1.
pub fn induced_endo_metric<S: Real>(h: &MetricField<S>) -> Result<MetricField<S>> {
    let m = h.rank();
    let field = MatrixField::from_fn(h.site_count(), m * m, |idx| {
        let eig = crate::numerics::hermitian_eig(h.at(idx)).expect("metric eig");
        let hinv = crate::numerics::pos_inv(&eig);
        conj_superop(h.at(idx), &hinv)
    });
    MetricField::new(field, h.eig_floor)
}

/// Background of the endomorphism bundle: Ad of the links, flux d_i - d_j.
pub fn adjoint_background<S: Real>(bundle: &BackgroundBundle<S>) -> Result<BackgroundBundle<S>> {
    let m = bundle.rank();
    let sites = bundle.surface.site_count();
    let mut flux = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            flux.push(bundle.flux()[i] - bundle.flux()[j]);
        }
    }
    let ad_links = |dir: crate::bundle::Dir| {
        MatrixField::from_fn(sites, m * m, |idx| {
            let u = bundle.link(idx, dir);
            conj_superop(u, &u.adjoint())
        })
    };
    BackgroundBundle::from_links(
        bundle.surface,
        m * m,
        flux,
        ad_links(crate::bundle::Dir::X),
        ad_links(crate::bundle::Dir::Y),
    )
}

/// Higgs field of the endomorphism bundle: ad(M) per site.
pub fn adjoint_higgs<S: Real>(
    end_bundle: &BackgroundBundle<S>,
    phi: &HiggsField<S>,
) -> Result<HiggsField<S>> {
    let m2 = end_bundle.rank();
    let field = MatrixField::from_fn(end_bundle.surface.site_count(), m2, |idx| {
        ad_matrix_on_gl(phi.at(idx))
    });
    HiggsField::new(end_bundle, field, r(1e-6))
}

/// Numerical residual of "the curvature lies in the image of Ad": the sup
/// over sites of the Hilbert-Schmidt norm of the Ad-perp projection of the
/// endomorphism-bundle mean curvature under the induced metric. Vanishes
/// (to rounding) exactly when the metric comes from a reduction.
pub fn reduction_residual<S: Real>(
    bundle: &BackgroundBundle<S>,
    h: &MetricField<S>,
    phi: &HiggsField<S>,
    group: &ReductiveGroupData<S>,
) -> Result<S> {
    if group.m != bundle.rank() {
        return Err(Error::Dimension("group rank does not match the bundle".into()));
    }
    let end_bundle = adjoint_background(bundle)?;
    let end_phi = adjoint_higgs(&end_bundle, phi)?;
    let end_h = induced_endo_metric(h)?;
    let k_end = crate::gauge::mean_curvature(&end_bundle, &end_h, &end_phi)?;
    let mut sup = S::zero();
    for idx in 0..end_bundle.surface.site_count() {
        let resid = ad_perp_on_gl(group, k_end.at(idx)).fro_norm();
        if resid > sup {
            sup = resid;
        }
    }
    Ok(sup)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AhymCertificate<S: Real> {
    pub holds: bool,
    pub norm: S,
    pub xi: S,
    pub margin: S,
}

/// Certificate |K - tau| < xi for an algebra-valued curvature field and a
/// central element tau. For SL the center is trivial and tau must vanish.
pub fn principal_ahym_certificate<S: Real>(
    group: &ReductiveGroupData<S>,
    k_field: &MatrixField<S>,
    tau: &CMat<S>,
    xi: S,
) -> Result<AhymCertificate<S>> {
    if tau.dim() != group.m {
        return Err(Error::Dimension("tau size does not match the group".into()));
    }
    // tau must lie in the span of the center basis.
    let mut resid = tau.clone();
    for b in &group.center_basis {
        let nb = b.fro_norm();
        let cf = b.hs_dot(&resid).scale(S::one() / (nb * nb));
        resid = &resid - &b.scale(cf);
    }
    if resid.fro_norm() > r::<S>(1e-10) * (S::one() + tau.fro_norm()) {
        return Err(Error::Validation(
            "tau is not an element of the center of the Lie algebra".into(),
        ));
    }
    let shifted = k_field.map(|m| m - tau);
    let norm = section_norm(group, &shifted)?;
    Ok(AhymCertificate { holds: norm < xi, norm, xi, margin: xi - norm })
}

/// Traceless part of a matrix (the sl-component).
pub fn traceless_part<S: Real>(m: &CMat<S>) -> CMat<S> {
    let n = m.dim();
    let tr = m.trace().scale(S::one() / r(n as f64));
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] = out[(i, i)] - tr;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{build_background, catalog, seeded_positive_metric};
    use crate::numerics::{det, hermitian_eig, SplitMix64};
    use crate::surface::LatticeSurface;

    fn sl2() -> ReductiveGroupData<f64> {
        ReductiveGroupData::new(GroupFamily::Sl, 2).unwrap()
    }

    fn gl2() -> ReductiveGroupData<f64> {
        ReductiveGroupData::new(GroupFamily::Gl, 2).unwrap()
    }

    #[test]
    fn algebra_dimensions() {
        assert_eq!(sl2().algebra_dim, 3);
        assert_eq!(gl2().algebra_dim, 4);
        assert_eq!(ReductiveGroupData::<f64>::new(GroupFamily::Sl, 3).unwrap().algebra_dim, 8);
        assert!(ReductiveGroupData::<f64>::new(GroupFamily::Sl, 1).is_err());
        assert!(sl2().center_basis.is_empty());
        assert_eq!(gl2().center_basis.len(), 1);
    }

    #[test]
    fn pairing_nondegenerate_and_ad_invariant() {
        for g in [sl2(), gl2(), ReductiveGroupData::new(GroupFamily::Sl, 3).unwrap()] {
            assert!(det(&g.pairing).norm() > 1e-10, "{:?}", g.family);
            // kappa([X,Y],Z) + kappa(Y,[X,Z]) = 0 on basis triples.
            let kappa = |a: &CMat<f64>, b: &CMat<f64>| (a * b).trace();
            for x in &g.basis {
                for y in &g.basis {
                    for z in &g.basis {
                        let lhs = kappa(&CMat::commutator(x, y), z)
                            + kappa(y, &CMat::commutator(x, z));
                        assert!(lhs.norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn cartan_involution_examples() {
        let g = sl2();
        // Anti-Hermitian: +1 eigenspace.
        let x = CMat::from_rows_f64(&[vec![(0.0, 1.0), (0.0, 0.0)], vec![(0.0, 0.0), (0.0, -1.0)]]);
        let ix = cartan_involution(&g, &x).unwrap();
        assert!((&ix - &x).fro_norm() < 1e-15);
        // Hermitian: -1 eigenspace.
        let x = CMat::from_rows_f64(&[vec![(1.0, 0.0), (0.0, 0.0)], vec![(0.0, 0.0), (-1.0, 0.0)]]);
        let ix = cartan_involution(&g, &x).unwrap();
        assert!((&ix + &x).fro_norm() < 1e-15);
        // Nilpotent: minus conjugate transpose.
        let x = CMat::from_rows_f64(&[vec![(0.0, 0.0), (1.0, 0.0)], vec![(0.0, 0.0), (0.0, 0.0)]]);
        let ix = cartan_involution(&g, &x).unwrap();
        let expect =
            CMat::from_rows_f64(&[vec![(0.0, 0.0), (0.0, 0.0)], vec![(-1.0, 0.0), (0.0, 0.0)]]);
        assert!((&ix - &expect).fro_norm() < 1e-15);
        // Involution property on random members.
        let mut rng = SplitMix64::new(2);
        for _ in 0..5 {
            let x = traceless_part(&rng.complex_matrix::<f64>(2, 1.0));
            let twice = cartan_involution(&g, &cartan_involution(&g, &x).unwrap()).unwrap();
            assert!((&twice - &x).fro_norm() < 1e-12);
        }
        // Outside the algebra: nonzero trace.
        let x = CMat::identity(2);
        assert!(cartan_involution(&g, &x).is_err());
    }

    #[test]
    fn iota_on_forms_examples() {
        let g = gl2();
        // Anti-Hermitian s: -s (x) dzbar.
        let s = CMat::from_rows_f64(&[vec![(0.0, 1.0), (0.0, 0.0)], vec![(0.0, 0.0), (0.0, 1.0)]]);
        let (m, comp) = iota_on_forms(&g, &s, FormComponent::Dz).unwrap();
        assert_eq!(comp, FormComponent::Dzbar);
        assert!((&m + &s).fro_norm() < 1e-15);
        // Hermitian s: +s (x) dzbar.
        let s = CMat::from_rows_f64(&[vec![(2.0, 0.0), (0.0, 0.0)], vec![(0.0, 0.0), (1.0, 0.0)]]);
        let (m, _) = iota_on_forms(&g, &s, FormComponent::Dz).unwrap();
        assert!((&m - &s).fro_norm() < 1e-15);
        // For h = Id the extension reproduces the metric adjoint of phi.
        let surface = LatticeSurface::new(8, 1.0).unwrap();
        for e in catalog::<f64>() {
            if e.rank != 2 {
                continue;
            }
            let (_b, phi) = e.build(surface).unwrap();
            let h = MetricField::identity(&surface, 2);
            let adj = crate::gauge::higgs_adjoint(phi.field(), &h).unwrap();
            let (m, comp) = iota_on_forms(&g, phi.at(0), FormComponent::Dz).unwrap();
            assert_eq!(comp, FormComponent::Dzbar);
            assert!((&m - adj.at(0)).fro_norm() < 1e-14, "example {}", e.name);
        }
    }

    #[test]
    fn section_norm_examples() {
        let g = sl2();
        let sites = 5;
        let zero = MatrixField::zeros(sites, 2);
        assert_eq!(section_norm(&g, &zero).unwrap(), 0.0);
        // psi = i diag(1,-1): norm sqrt(2).
        let psi = CMat::from_rows_f64(&[vec![(0.0, 1.0), (0.0, 0.0)], vec![(0.0, 0.0), (0.0, -1.0)]]);
        let f = MatrixField::constant(sites, psi);
        let v = section_norm(&g, &f).unwrap();
        assert!((v - 2.0_f64.sqrt()).abs() < 1e-14);
        // Homogeneity.
        let f3 = f.map(|m| m.scale_re(-3.0));
        let v3 = section_norm(&g, &f3).unwrap();
        assert!((v3 - 3.0 * v).abs() < 1e-13);
    }

    #[test]
    fn ad_perp_annihilates_ad_image() {
        let mut rng = SplitMix64::new(31);
        for g in [sl2(), gl2()] {
            for _ in 0..50 {
                let x = match g.family {
                    GroupFamily::Sl => traceless_part(&rng.complex_matrix::<f64>(2, 1.0)),
                    GroupFamily::Gl => rng.complex_matrix::<f64>(2, 1.0),
                };
                // ad(x) in the basis, from the structure data.
                let coords = g.expand(&x).unwrap();
                let mut adx = CMat::zeros(g.algebra_dim);
                for (cf, adb) in coords.iter().zip(g.ad_matrices.iter()) {
                    adx = &adx + &adb.scale(*cf);
                }
                let res = ad_perp_projection(&g, &adx).unwrap();
                assert!(res.fro_norm() <= 1e-12 * (1.0 + adx.fro_norm()));
            }
        }
    }

    #[test]
    fn ad_perp_idempotent_selfadjoint_and_identity_on_sl2() {
        let g = sl2();
        let mut rng = SplitMix64::new(77);
        for _ in 0..10 {
            let m = rng.complex_matrix::<f64>(3, 1.0);
            let r1 = ad_perp_projection(&g, &m).unwrap();
            let r2 = ad_perp_projection(&g, &r1).unwrap();
            assert!((&r2 - &r1).fro_norm() < 1e-12);
        }
        // Hilbert-Schmidt self-adjointness: <r(A), B> = <A, r(B)>.
        for _ in 0..10 {
            let a = rng.complex_matrix::<f64>(3, 1.0);
            let b = rng.complex_matrix::<f64>(3, 1.0);
            let ra = ad_perp_projection(&g, &a).unwrap();
            let rb = ad_perp_projection(&g, &b).unwrap();
            let lhs = ra.hs_dot(&b);
            let rhs = a.hs_dot(&rb);
            assert!((lhs - rhs).norm() < 1e-12);
        }
        // The identity on sl(2) is trace-orthogonal to every ad(X).
        let id3 = CMat::identity(3);
        let r_id = ad_perp_projection(&g, &id3).unwrap();
        assert!((&r_id - &id3).fro_norm() < 1e-10);
    }

    #[test]
    fn induced_metric_examples() {
        let surface = LatticeSurface::new(4, 1.0).unwrap();
        let h = MetricField::identity(&surface, 2);
        let ind = induced_endo_metric(&h).unwrap();
        assert!((ind.at(0) - &CMat::identity(4)).fro_norm() < 1e-14);

        let field = MatrixField::constant(
            16,
            CMat::from_rows_f64(&[vec![(2.0, 0.0), (0.0, 0.0)], vec![(0.0, 0.0), (1.0, 0.0)]]),
        );
        let h = MetricField::new(field, 1e-10).unwrap();
        let ind = induced_endo_metric(&h).unwrap();
        let expect = [1.0_f64, 2.0, 0.5, 1.0];
        for (i, e) in expect.iter().enumerate() {
            assert!((ind.at(3)[(i, i)].re - e).abs() < 1e-13);
        }

        // Unitary conjugation covariance: induced(g h g^dag) = Ad(g)-conjugate.
        let mut rng = SplitMix64::new(12);
        let h = seeded_positive_metric(&surface, 2, 5, 0.4).unwrap();
        let gen = rng.hermitian::<f64>(2, 1.0);
        let eig = hermitian_eig(&gen).unwrap();
        let g = crate::numerics::unitary_exp_i(&eig, 1.0);
        let h2 = h.gauge_transform(&g).unwrap();
        let ind1 = induced_endo_metric(&h).unwrap();
        let ind2 = induced_endo_metric(&h2).unwrap();
        let adg = conj_superop(&g, &g.adjoint());
        for idx in [0usize, 7] {
            let expect = &(&adg * ind1.at(idx)) * &adg.adjoint();
            assert!((ind2.at(idx) - &expect).fro_norm() < 1e-11);
        }
    }

    #[test]
    fn endo_mean_curvature_is_ad_of_rank_m_curvature() {
        // The commutator identity at a generic metric: the endomorphism
        // bundle mean curvature under the induced metric equals ad(K_h).
        let surface = LatticeSurface::new(6, 1.0).unwrap();
        for e in catalog::<f64>() {
            let (b, phi) = e.build(surface).unwrap();
            let h = seeded_positive_metric(&surface, e.rank, 23, 0.3).unwrap();
            let k = crate::gauge::mean_curvature(&b, &h, &phi).unwrap();
            let end_b = adjoint_background(&b).unwrap();
            let end_phi = adjoint_higgs(&end_b, &phi).unwrap();
            let end_h = induced_endo_metric(&h).unwrap();
            let k_end = crate::gauge::mean_curvature(&end_b, &end_h, &end_phi).unwrap();
            let mut worst = 0.0_f64;
            for idx in 0..surface.site_count() {
                let expect = ad_matrix_on_gl(k.at(idx));
                let dev = (k_end.at(idx) - &expect).fro_norm()
                    / (1.0 + expect.fro_norm());
                worst = worst.max(dev);
            }
            assert!(worst < 1e-6, "example {}: defect {worst}", e.name);
        }
    }

    #[test]
    fn reduction_residual_vanishes_for_induced_metrics() {
        let surface = LatticeSurface::new(6, 1.0).unwrap();
        // Flat case.
        let b = build_background(surface, 2, &[0, 0]).unwrap();
        let phi = crate::bundle::HiggsField::zero(&b);
        let h = MetricField::identity(&surface, 2);
        let g = sl2();
        let res = reduction_residual(&b, &h, &phi, &g).unwrap();
        assert!(res < 1e-10, "flat residual {res}");

        // Nilpotent example at the identity metric.
        let e = catalog::<f64>().into_iter().find(|e| e.name == "nilpotent").unwrap();
        let (b, phi) = e.build(surface).unwrap();
        let res = reduction_residual(&b, &h, &phi, &g).unwrap();
        assert!(res <= 1e-8, "nilpotent residual {res}");

        // And at a generic seeded metric.
        let h = seeded_positive_metric(&surface, 2, 9, 0.3).unwrap();
        let res = reduction_residual(&b, &h, &phi, &g).unwrap();
        assert!(res <= 1e-8, "generic residual {res}");
    }

    #[test]
    fn adjoint_transfer_bounds_deviation() {
        // If the rank-m deviation is delta, the endomorphism-bundle
        // deviation is at most 2 sqrt(algebra_dim) delta.
        let surface = LatticeSurface::new(6, 1.0).unwrap();
        for e in catalog::<f64>() {
            let (b, phi) = e.build(surface).unwrap();
            let h = seeded_positive_metric(&surface, e.rank, 37, 0.25).unwrap();
            let c = crate::gauge::hym_constant_for(&b);
            let k = crate::gauge::mean_curvature(&b, &h, &phi).unwrap();
            let dev = crate::gauge::deviation_norm_sup(&surface, &k, c, &h).unwrap();
            let end_b = adjoint_background(&b).unwrap();
            let end_phi = adjoint_higgs(&end_b, &phi).unwrap();
            let end_h = induced_endo_metric(&h).unwrap();
            let k_end = crate::gauge::mean_curvature(&end_b, &end_h, &end_phi).unwrap();
            // End bundle has degree zero, so its HYM constant vanishes.
            let dev_end =
                crate::gauge::deviation_norm_sup(&surface, &k_end, 0.0, &end_h).unwrap();
            let cbound = 2.0 * ((e.rank * e.rank) as f64).sqrt();
            assert!(
                dev_end <= cbound * dev + 1e-9,
                "example {}: {dev_end} vs bound {}",
                e.name,
                cbound * dev
            );
        }
    }

    #[test]
    fn certificate_examples() {
        let g = sl2();
        let sites = 4;
        // K = tau = 0: holds with margin xi.
        let zero = MatrixField::zeros(sites, 2);
        let tau = CMat::zeros(2);
        let cert = principal_ahym_certificate(&g, &zero, &tau, 0.5).unwrap();
        assert!(cert.holds);
        assert!((cert.margin - 0.5).abs() < 1e-15);

        // K = 0.01 i diag(1,-1), xi = 0.1: holds with margin 0.1 - 0.01 sqrt(2).
        let psi = CMat::from_rows_f64(&[
            vec![(0.0, 0.01), (0.0, 0.0)],
            vec![(0.0, 0.0), (0.0, -0.01)],
        ]);
        let f = MatrixField::constant(sites, psi);
        let cert = principal_ahym_certificate(&g, &f, &tau, 0.1).unwrap();
        assert!(cert.holds);
        assert!((cert.margin - 0.08585786437626905).abs() < 1e-12);
        // Same K with xi = 0.01: fails.
        let cert = principal_ahym_certificate(&g, &f, &tau, 0.01).unwrap();
        assert!(!cert.holds);

        // tau outside the center is rejected (SL has trivial center).
        let bad_tau = CMat::identity(2);
        assert!(principal_ahym_certificate(&g, &f, &bad_tau, 0.1).is_err());
        // For GL the identity is central and accepted.
        let g = gl2();
        let f_gl = MatrixField::constant(sites, CMat::identity(2).scale_re(0.3));
        let cert =
            principal_ahym_certificate(&g, &f_gl, &CMat::identity(2).scale_re(0.3), 0.05).unwrap();
        assert!(cert.holds);
        assert!((cert.norm - 0.0).abs() < 1e-14);
    }
}
