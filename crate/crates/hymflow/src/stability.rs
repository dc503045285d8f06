//! Algebraic semistability oracle for the example family, and reconciliation
//! of algebraic verdicts with flow outcomes.
//!
//! The family consists of split backgrounds (one U(1) flux per diagonal
//! block) with a constant Higgs matrix M that respects the flux blocks.
//! Invariant subbundle candidates are (a) coordinate subsets preserved by M
//! and (b) eigenlines of M inside equal-flux blocks; line subbundles of
//! degree below every block degree cannot destabilize and are pruned by this
//! enumeration. Slopes are exact rationals end to end, so ties (strict
//! semistability) are never decided by floating-point noise. Completeness
//! holds only within this family: blocks carry either an arbitrary matrix of
//! size at most 2 or a diagonal matrix of any size; anything else is
//! reported as unsupported.

use crate::bundle::ExampleSpec;
use crate::error::{Error, Result};
use crate::flow::{classify, Classification, FlowConfig, FlowTrace};
use crate::numerics::{Real, C};
use num_rational::Ratio;
use num_traits::Zero;
use serde::Serialize;

pub type Slope = Ratio<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictClass {
    Stable,
    StrictlySemistable,
    Polystable,
    Unstable,
}

impl VerdictClass {
    /// Stable, strictly semistable and polystable bundles are all semistable.
    pub fn is_semistable(self) -> bool {
        !matches!(self, VerdictClass::Unstable)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubbundleKind {
    CoordinateBlock,
    Eigenline,
}

/// Descriptor of a phi-invariant subbundle candidate.
#[derive(Clone, Debug, Serialize)]
pub struct SubbundleDescriptor {
    pub kind: SubbundleKind,
    /// Selected coordinate indices (coordinate blocks), or the indices of
    /// the flux block containing the eigenline.
    pub indices: Vec<usize>,
    /// Eigenvector components as (re, im) pairs, for eigenlines.
    pub eigenvector: Option<Vec<(f64, f64)>>,
    pub degree: i64,
    pub rank: usize,
}

impl SubbundleDescriptor {
    pub fn slope(&self) -> Slope {
        Ratio::new(self.degree, self.rank as i64)
    }

    /// Two descriptors denote the same subbundle if they span the same
    /// subspace (used to de-duplicate coordinate lines against eigenlines).
    fn same_line_as(&self, other: &SubbundleDescriptor) -> bool {
        if self.rank != 1 || other.rank != 1 {
            return false;
        }
        let va = self.line_vector();
        let vb = other.line_vector();
        match (va, vb) {
            (Some(a), Some(b)) => {
                let dot: C<f64> = a
                    .iter()
                    .zip(b.iter())
                    .map(|(x, y)| x.conj() * *y)
                    .fold(C::zero(), |acc, z| acc + z);
                let na: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                dot.norm() >= (1.0 - 1e-9) * na * nb
            }
            _ => false,
        }
    }

    fn line_vector(&self) -> Option<Vec<C<f64>>> {
        match self.kind {
            SubbundleKind::Eigenline => {
                let v = self.eigenvector.as_ref()?;
                let dim = *self.indices.iter().max()? + 1;
                let mut out = vec![C::zero(); dim];
                for (slot, &(re, im)) in self.indices.iter().zip(v.iter()) {
                    out[*slot] = C::new(re, im);
                }
                Some(out)
            }
            SubbundleKind::CoordinateBlock => {
                if self.indices.len() != 1 {
                    return None;
                }
                let dim = self.indices[0] + 1;
                let mut out = vec![C::zero(); dim];
                out[self.indices[0]] = C::new(1.0, 0.0);
                Some(out)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub class: VerdictClass,
    pub destabilizer: Option<SubbundleDescriptor>,
    pub slope_ambient: Slope,
    pub slope_witness: Option<Slope>,
}

/// Flux blocks: indices grouped by flux value, in order of first appearance.
fn flux_blocks(flux: &[i64]) -> Vec<(i64, Vec<usize>)> {
    let mut blocks: Vec<(i64, Vec<usize>)> = Vec::new();
    for (i, &d) in flux.iter().enumerate() {
        if let Some(b) = blocks.iter_mut().find(|(v, _)| *v == d) {
            b.1.push(i);
        } else {
            blocks.push((d, vec![i]));
        }
    }
    blocks
}

const ENTRY_TOL: f64 = 1e-12;

fn family_check<S: Real>(example: &ExampleSpec<S>) -> Result<()> {
    let m = &example.higgs;
    if m.dim() != example.rank || example.flux.len() != example.rank {
        return Err(Error::Dimension("example rank and matrix dimensions disagree".into()));
    }
    for i in 0..example.rank {
        for j in 0..example.rank {
            let mag = m[(i, j)].norm().to_f64().unwrap_or(f64::NAN);
            if mag > ENTRY_TOL && example.flux[i] != example.flux[j] {
                return Err(Error::Unsupported(format!(
                    "Higgs entry ({i},{j}) couples blocks of unequal flux; \
                     outside the catalog family"
                )));
            }
        }
    }
    Ok(())
}

fn entry_f64<S: Real>(m: &crate::numerics::CMat<S>, i: usize, j: usize) -> C<f64> {
    let z = m[(i, j)];
    C::new(z.re.to_f64().unwrap(), z.im.to_f64().unwrap())
}

/// Eigen-structure of a block of the Higgs matrix: eigenlines and whether
/// the block matrix is diagonalizable.
struct BlockEigen {
    /// Eigenvectors in block coordinates. Scalar and diagonal blocks leave
    /// this empty: their eigenlines are already coordinate lines.
    lines: Vec<Vec<C<f64>>>,
    diagonalizable: bool,
}

fn block_eigen<S: Real>(m: &crate::numerics::CMat<S>, idxs: &[usize]) -> Result<BlockEigen> {
    let k = idxs.len();
    let sub: Vec<Vec<C<f64>>> = (0..k)
        .map(|i| (0..k).map(|j| entry_f64(m, idxs[i], idxs[j])).collect())
        .collect();
    let is_diag = (0..k).all(|i| (0..k).all(|j| i == j || sub[i][j].norm() <= ENTRY_TOL));
    if k == 1 {
        return Ok(BlockEigen { lines: vec![], diagonalizable: true });
    }
    if is_diag {
        let first = sub[0][0];
        let scalar = (1..k).all(|i| (sub[i][i] - first).norm() <= ENTRY_TOL);
        if scalar {
            // Scalar blocks preserve every line; the coordinate subsets are
            // the canonical representatives.
            return Ok(BlockEigen { lines: vec![], diagonalizable: true });
        }
        // Diagonal non-scalar: the coordinate directions are eigenlines.
        let lines = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { C::new(1.0, 0.0) } else { C::zero() })
                    .collect()
            })
            .collect();
        return Ok(BlockEigen { lines, diagonalizable: true });
    }
    if k > 2 {
        return Err(Error::Unsupported(
            "non-diagonal Higgs blocks of size > 2 are outside the catalog family".into(),
        ));
    }
    // General 2x2 block: eigenvalues from the characteristic polynomial.
    let a = sub[0][0];
    let b = sub[0][1];
    let c = sub[1][0];
    let d = sub[1][1];
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det * 4.0).sqrt();
    let l1 = (tr + disc) * 0.5;
    let l2 = (tr - disc) * 0.5;
    let scale = [a, b, c, d].iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(1.0);
    let distinct = (l1 - l2).norm() > 1e-9 * scale;
    let eigvec = |l: C<f64>| -> Vec<C<f64>> {
        // Rows of (M - l): (a-l, b) and (c, d-l); the eigenvector is
        // orthogonal to the larger row.
        let r1 = ((a - l).norm_sqr() + b.norm_sqr()).sqrt();
        let r2 = (c.norm_sqr() + (d - l).norm_sqr()).sqrt();
        let v = if r1 >= r2 { vec![b, l - a] } else { vec![l - d, c] };
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if n <= 1e-14 * scale {
            vec![C::new(1.0, 0.0), C::zero()]
        } else {
            vec![v[0] / n, v[1] / n]
        }
    };
    let mut lines = vec![eigvec(l1)];
    if distinct {
        lines.push(eigvec(l2));
    }
    Ok(BlockEigen { lines, diagonalizable: distinct })
}

/// Enumerate phi-invariant subbundle candidates of a catalog-family example.
pub fn invariant_subbundles<S: Real>(example: &ExampleSpec<S>) -> Result<Vec<SubbundleDescriptor>> {
    family_check(example)?;
    let r = example.rank;
    let m = &example.higgs;
    let mut out: Vec<SubbundleDescriptor> = Vec::new();

    // (a) Coordinate subsets preserved by M: columns in S supported in S.
    for mask in 1..((1usize << r) - 1) {
        let set: Vec<usize> = (0..r).filter(|i| mask & (1 << i) != 0).collect();
        let invariant = set.iter().all(|&j| {
            (0..r).all(|i| set.contains(&i) || entry_f64(m, i, j).norm() <= ENTRY_TOL)
        });
        if invariant {
            out.push(SubbundleDescriptor {
                kind: SubbundleKind::CoordinateBlock,
                indices: set.clone(),
                eigenvector: None,
                degree: set.iter().map(|&i| example.flux[i]).sum(),
                rank: set.len(),
            });
        }
    }

    // (b) Eigenlines of M inside equal-flux blocks.
    for (d, idxs) in flux_blocks(&example.flux) {
        let be = block_eigen(m, &idxs)?;
        for v in be.lines {
            let desc = SubbundleDescriptor {
                kind: SubbundleKind::Eigenline,
                indices: idxs.clone(),
                eigenvector: Some(v.iter().map(|z| (z.re, z.im)).collect()),
                degree: d,
                rank: 1,
            };
            // An eigenline along a basis vector duplicates the coordinate
            // line; keep the eigenline representation.
            out.retain(|existing| !existing.same_line_as(&desc));
            out.push(desc);
        }
    }
    Ok(out)
}

/// Whether the example splits into phi-invariant stable line summands of
/// equal slope (the polystability criterion within the family).
fn splits_into_equal_slope_lines<S: Real>(example: &ExampleSpec<S>) -> Result<bool> {
    let blocks = flux_blocks(&example.flux);
    let first_flux = example.flux[0];
    if !example.flux.iter().all(|&d| d == first_flux) {
        return Ok(false);
    }
    for (_, idxs) in &blocks {
        let be = block_eigen(&example.higgs, idxs)?;
        if !be.diagonalizable {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Compare witness slopes against the ambient slope and classify.
pub fn verdict<S: Real>(example: &ExampleSpec<S>) -> Result<Verdict> {
    let subs = invariant_subbundles(example)?;
    let total_degree: i64 = example.flux.iter().sum();
    let mu = Ratio::new(total_degree, example.rank as i64);
    let best = subs
        .iter()
        .max_by_key(|s| s.slope())
        .cloned();
    let best_slope = best.as_ref().map(|s| s.slope());

    if let (Some(w), Some(ws)) = (&best, best_slope) {
        if ws > mu {
            return Ok(Verdict {
                class: VerdictClass::Unstable,
                destabilizer: Some(w.clone()),
                slope_ambient: mu,
                slope_witness: Some(ws),
            });
        }
    }
    if splits_into_equal_slope_lines(example)? {
        return Ok(Verdict {
            class: VerdictClass::Polystable,
            destabilizer: None,
            slope_ambient: mu,
            slope_witness: best_slope,
        });
    }
    if let (Some(w), Some(ws)) = (&best, best_slope) {
        if ws == mu {
            return Ok(Verdict {
                class: VerdictClass::StrictlySemistable,
                destabilizer: Some(w.clone()),
                slope_ambient: mu,
                slope_witness: Some(ws),
            });
        }
    }
    Ok(Verdict {
        class: VerdictClass::Stable,
        destabilizer: None,
        slope_ambient: mu,
        slope_witness: best_slope,
    })
}

/// Reconciliation of the algebraic verdict with the flow outcome.
#[derive(Clone, Debug, Serialize)]
pub struct ReconcileReport {
    pub example: String,
    pub pass: bool,
    pub verdict_class: VerdictClass,
    pub classification: Classification,
    pub detail: String,
}

/// PASS iff (semistable verdict <=> flow reached approximate HYM) and
/// (unstable verdict <=> flow diverges).
pub fn reconcile<S: Real>(
    example: &ExampleSpec<S>,
    trace: &FlowTrace<S>,
    config: &FlowConfig<S>,
) -> Result<ReconcileReport> {
    if trace.label != example.name {
        return Err(Error::Validation(format!(
            "trace is labeled '{}' but the example is '{}'",
            trace.label, example.name
        )));
    }
    let v = verdict(example)?;
    let cls = classify(trace, config)?;
    let semistable_ok = v.class.is_semistable() == matches!(cls, Classification::ApproxHymReached);
    let unstable_ok =
        (v.class == VerdictClass::Unstable) == matches!(cls, Classification::Diverging);
    let pass = semistable_ok && unstable_ok;
    let detail = format!(
        "verdict = {:?} (semistable = {}), classification = {:?}",
        v.class,
        v.class.is_semistable(),
        cls
    );
    Ok(ReconcileReport {
        example: example.name.clone(),
        pass,
        verdict_class: v.class,
        classification: cls,
        detail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{catalog, flat_line_example, ExampleSpec};
    use crate::numerics::CMat;

    fn by_name(name: &str) -> ExampleSpec<f64> {
        catalog::<f64>().into_iter().find(|e| e.name == name).unwrap()
    }

    #[test]
    fn nilpotent_has_exactly_one_invariant_line() {
        let subs = invariant_subbundles(&by_name("nilpotent")).unwrap();
        assert_eq!(subs.len(), 1, "{subs:?}");
        let line = &subs[0];
        assert_eq!(line.kind, SubbundleKind::Eigenline);
        assert_eq!(line.rank, 1);
        assert_eq!(line.degree, 0);
        let v = line.eigenvector.as_ref().unwrap();
        // span(e1)
        assert!(v[0].0.abs() > 0.99 && v[1].0.abs() < 1e-9 && v[1].1.abs() < 1e-9);
    }

    #[test]
    fn split_unstable_lists_both_blocks() {
        let subs = invariant_subbundles(&by_name("split-unstable")).unwrap();
        let degrees: Vec<i64> = subs.iter().map(|s| s.degree).collect();
        assert!(degrees.contains(&1));
        assert!(degrees.contains(&-1));
        assert!(subs.iter().all(|s| s.kind == SubbundleKind::CoordinateBlock));
    }

    #[test]
    fn diag_polystable_has_two_eigenlines() {
        let subs = invariant_subbundles(&by_name("diag-polystable")).unwrap();
        let lines: Vec<_> = subs.iter().filter(|s| s.rank == 1).collect();
        assert_eq!(lines.len(), 2, "{subs:?}");
        assert!(lines.iter().all(|l| l.degree == 0));
        assert!(lines.iter().all(|l| l.kind == SubbundleKind::Eigenline));
    }

    #[test]
    fn catalog_verdicts_match_expected() {
        for e in catalog::<f64>() {
            let v = verdict(&e).unwrap();
            assert_eq!(v.class, e.expected_verdict, "example {}", e.name);
            if let Some(expect) = &e.expected_destabilizer {
                let got = v.destabilizer.expect("destabilizer expected");
                assert_eq!(got.kind, expect.kind, "example {}", e.name);
                assert_eq!(got.degree, expect.degree);
                assert_eq!(got.rank, expect.rank);
            }
        }
    }

    #[test]
    fn verdict_invariants_hold() {
        let v = verdict(&by_name("split-unstable")).unwrap();
        assert!(v.slope_witness.unwrap() > v.slope_ambient);
        let v = verdict(&by_name("nilpotent")).unwrap();
        assert_eq!(v.slope_witness.unwrap(), v.slope_ambient);
    }

    #[test]
    fn flat_line_is_polystable_for_any_degree() {
        for d in [-2, 0, 5] {
            let v = verdict(&flat_line_example::<f64>(d)).unwrap();
            assert_eq!(v.class, VerdictClass::Polystable);
            assert_eq!(v.slope_ambient, Ratio::new(d, 1));
        }
    }

    #[test]
    fn flux_shift_preserves_verdict_class() {
        for base in catalog::<f64>() {
            let reference = verdict(&base).unwrap().class;
            for shift in -2..=2i64 {
                let mut e = base.clone();
                e.flux.iter_mut().for_each(|d| *d += shift);
                let v = verdict(&e).unwrap();
                assert_eq!(v.class, reference, "example {} shift {shift}", base.name);
                assert_eq!(
                    v.slope_ambient,
                    verdict(&base).unwrap().slope_ambient + Ratio::new(shift, 1)
                );
            }
        }
    }

    #[test]
    fn cross_block_higgs_is_unsupported() {
        let mut e = by_name("split-unstable");
        e.higgs = CMat::from_rows_f64(&[
            vec![(0.0, 0.0), (1.0, 0.0)],
            vec![(0.0, 0.0), (0.0, 0.0)],
        ]);
        assert!(matches!(invariant_subbundles(&e), Err(Error::Unsupported(_))));
    }
}
