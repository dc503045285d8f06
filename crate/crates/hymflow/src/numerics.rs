//! Small dense complex linear algebra over a generic real scalar.
//!
//! Everything in the lattice calculus happens on per-site matrices of rank
//! at most 9 (rank 3 bundles and their endomorphism bundles), so the kernels
//! here are written for tiny dense matrices with deterministic, allocation-light
//! loops rather than delegating to a BLAS-backed crate:
//!
//! - cyclic Jacobi eigensolver for complex Hermitian matrices,
//! - spectral calculus f(H) for positive matrices (sqrt, log, powers),
//! - principal matrix logarithm by inverse scaling-and-squaring with
//!   Denman-Beavers square roots (used on near-unitary plaquettes),
//! - partial-pivot LU inverse,
//! - Gauss-Legendre nodes/weights on [0, 1],
//! - splitmix64 for seeded deterministic test fields.

use crate::error::{Error, Result};
use num_complex::Complex;
use num_traits::{Float, FromPrimitive, One, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

/// Real scalar the whole crate is generic over: f32 or f64.
pub trait Real:
    Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}
impl Real for f32 {}
impl Real for f64 {}

pub type C<S> = Complex<S>;

/// Convert an f64 constant into the working scalar.
#[inline]
pub fn r<S: Real>(x: f64) -> S {
    S::from_f64(x).expect("constant representable in scalar type")
}

#[inline]
pub fn c_re<S: Real>(x: S) -> C<S> {
    Complex::new(x, S::zero())
}

/// Square complex matrix, row-major storage.
#[derive(Clone, PartialEq)]
pub struct CMat<S: Real> {
    n: usize,
    a: Vec<C<S>>,
}

impl<S: Real> Debug for CMat<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMat {}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                let z = self[(i, j)];
                write!(
                    f,
                    "({:+.4e},{:+.4e}) ",
                    z.re.to_f64().unwrap_or(f64::NAN),
                    z.im.to_f64().unwrap_or(f64::NAN)
                )?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<S: Real> std::ops::Index<(usize, usize)> for CMat<S> {
    type Output = C<S>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<S> {
        &self.a[i * self.n + j]
    }
}

impl<S: Real> std::ops::IndexMut<(usize, usize)> for CMat<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<S> {
        &mut self.a[i * self.n + j]
    }
}

impl<S: Real> CMat<S> {
    pub fn zeros(n: usize) -> Self {
        CMat { n, a: vec![C::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C<S>) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from rows of (re, im) pairs; used by tests and config parsing.
    pub fn from_rows_f64(rows: &[Vec<(f64, f64)>]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| Complex::new(r(rows[i][j].0), r(rows[i][j].1)))
    }

    pub fn diag(entries: &[C<S>]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(i, j)].conj())
    }

    pub fn trace(&self) -> C<S> {
        let mut t = C::zero();
        for i in 0..self.n {
            t = t + self[(i, i)];
        }
        t
    }

    pub fn scale(&self, z: C<S>) -> Self {
        CMat { n: self.n, a: self.a.iter().map(|&x| x * z).collect() }
    }

    pub fn scale_re(&self, s: S) -> Self {
        self.scale(c_re(s))
    }

    pub fn fro_norm(&self) -> S {
        let mut acc = S::zero();
        for z in &self.a {
            acc = acc + z.norm_sqr();
        }
        acc.sqrt()
    }

    /// Hilbert-Schmidt inner product tr(A† B).
    pub fn hs_dot(&self, other: &Self) -> C<S> {
        let mut acc = C::zero();
        for (x, y) in self.a.iter().zip(other.a.iter()) {
            acc = acc + x.conj() * *y;
        }
        acc
    }

    pub fn hermitize(&self) -> Self {
        Self::from_fn(self.n, |i, j| (self[(i, j)] + self[(j, i)].conj()).scale(r(0.5)))
    }

    pub fn is_hermitian(&self, tol: S) -> bool {
        let mut dev = S::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                if d > dev {
                    dev = d;
                }
            }
        }
        dev <= tol * (S::one() + self.fro_norm())
    }

    pub fn commutator(a: &Self, b: &Self) -> Self {
        &(a * b) - &(b * a)
    }

    /// Maximum entry modulus.
    pub fn max_abs(&self) -> S {
        let mut m = S::zero();
        for z in &self.a {
            let v = z.norm();
            if v > m {
                m = v;
            }
        }
        m
    }
}

impl<S: Real> Add for &CMat<S> {
    type Output = CMat<S>;
    fn add(self, rhs: &CMat<S>) -> CMat<S> {
        debug_assert_eq!(self.n, rhs.n);
        CMat {
            n: self.n,
            a: self.a.iter().zip(rhs.a.iter()).map(|(&x, &y)| x + y).collect(),
        }
    }
}

impl<S: Real> Sub for &CMat<S> {
    type Output = CMat<S>;
    fn sub(self, rhs: &CMat<S>) -> CMat<S> {
        debug_assert_eq!(self.n, rhs.n);
        CMat {
            n: self.n,
            a: self.a.iter().zip(rhs.a.iter()).map(|(&x, &y)| x - y).collect(),
        }
    }
}

impl<S: Real> Neg for &CMat<S> {
    type Output = CMat<S>;
    fn neg(self) -> CMat<S> {
        CMat { n: self.n, a: self.a.iter().map(|&x| -x).collect() }
    }
}

impl<S: Real> std::ops::AddAssign<&CMat<S>> for CMat<S> {
    fn add_assign(&mut self, rhs: &CMat<S>) {
        debug_assert_eq!(self.n, rhs.n);
        for (x, y) in self.a.iter_mut().zip(rhs.a.iter()) {
            *x = *x + *y;
        }
    }
}

impl<S: Real> std::ops::SubAssign<&CMat<S>> for CMat<S> {
    fn sub_assign(&mut self, rhs: &CMat<S>) {
        debug_assert_eq!(self.n, rhs.n);
        for (x, y) in self.a.iter_mut().zip(rhs.a.iter()) {
            *x = *x - *y;
        }
    }
}

impl<S: Real> Mul for &CMat<S> {
    type Output = CMat<S>;
    fn mul(self, rhs: &CMat<S>) -> CMat<S> {
        debug_assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + aik * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix: H = V diag(w) V†.
#[derive(Clone, Debug)]
pub struct HermEig<S: Real> {
    /// Eigenvalues, ascending.
    pub w: Vec<S>,
    /// Unitary matrix whose columns are eigenvectors.
    pub v: CMat<S>,
}

/// Cyclic Jacobi for complex Hermitian matrices. Deterministic sweep order.
pub fn hermitian_eig<S: Real>(h: &CMat<S>) -> Result<HermEig<S>> {
    let n = h.dim();
    let mut a = h.hermitize();
    let mut v = CMat::identity(n);
    if n == 1 {
        return Ok(HermEig { w: vec![a[(0, 0)].re], v });
    }
    let scale = a.fro_norm().max(S::min_positive_value());
    let tol = S::epsilon() * scale * r(1e-2);
    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut off = S::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= tol * r(1e-6) {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / c_re(mag);
                let tau = (aqq - app) / (r::<S>(2.0) * mag);
                let sgn = if tau >= S::zero() { S::one() } else { -S::one() };
                // Small root of t^2 - 2 tau t - 1 = 0 annihilates a[p][q].
                let t = -sgn / (tau.abs() + (S::one() + tau * tau).sqrt());
                let cth = S::one() / (S::one() + t * t).sqrt();
                let sth = t * cth;
                // Unitary rotation in the (p,q) plane:
                //   col p <- c*col p + s*conj(phase)*col q
                //   col q <- -s*phase*col p + c*col q
                let c = c_re(cth);
                let s_pq = phase.conj().scale(sth);
                let s_qp = phase.scale(sth);
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * s_pq;
                    a[(k, q)] = akq * c - akp * s_qp;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * s_pq.conj();
                    a[(q, k)] = aqk * c - apk * s_qp.conj();
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * s_pq;
                    v[(k, q)] = vkq * c - vkp * s_qp;
                }
                // Clean the annihilated pair against rounding drift.
                let fix = (a[(p, q)] + a[(q, p)].conj()).scale(r(0.5));
                a[(p, q)] = fix;
                a[(q, p)] = fix.conj();
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let w_raw: Vec<S> = (0..n).map(|i| a[(i, i)].re).collect();
    idx.sort_by(|&i, &j| w_raw[i].partial_cmp(&w_raw[j]).unwrap_or(std::cmp::Ordering::Equal));
    let w: Vec<S> = idx.iter().map(|&i| w_raw[i]).collect();
    let vs = CMat::from_fn(n, |i, j| v[(i, idx[j])]);
    Ok(HermEig { w, v: vs })
}

impl<S: Real> HermEig<S> {
    /// Reassemble V f(w) V†.
    pub fn apply(&self, f: impl Fn(S) -> C<S>) -> CMat<S> {
        let n = self.v.dim();
        let mut out = CMat::zeros(n);
        for k in 0..n {
            let fk = f(self.w[k]);
            if fk.is_zero() {
                continue;
            }
            for i in 0..n {
                let vik = self.v[(i, k)] * fk;
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + vik * self.v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn min_eig(&self) -> S {
        self.w[0]
    }
}

/// Spectral helpers on positive-definite Hermitian matrices.
pub fn pos_check<S: Real>(eig: &HermEig<S>, floor: S, what: &str) -> Result<()> {
    if eig.min_eig() <= floor {
        return Err(Error::Conditioning(format!(
            "{what}: eigenvalue {:e} at or below floor {:e}",
            eig.min_eig().to_f64().unwrap_or(f64::NAN),
            floor.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(())
}

pub fn pos_sqrt<S: Real>(eig: &HermEig<S>) -> CMat<S> {
    eig.apply(|x| c_re(x.max(S::zero()).sqrt()))
}

pub fn pos_inv_sqrt<S: Real>(eig: &HermEig<S>) -> CMat<S> {
    eig.apply(|x| c_re(S::one() / x.sqrt()))
}

pub fn pos_log<S: Real>(eig: &HermEig<S>) -> CMat<S> {
    eig.apply(|x| c_re(x.ln()))
}

pub fn pos_pow<S: Real>(eig: &HermEig<S>, p: S) -> CMat<S> {
    eig.apply(|x| c_re(x.powf(p)))
}

pub fn pos_inv<S: Real>(eig: &HermEig<S>) -> CMat<S> {
    eig.apply(|x| c_re(S::one() / x))
}

pub fn logdet_pos<S: Real>(eig: &HermEig<S>) -> S {
    let mut acc = S::zero();
    for &x in &eig.w {
        acc = acc + x.ln();
    }
    acc
}

/// exp(i t H) for Hermitian H (a unitary matrix).
pub fn unitary_exp_i<S: Real>(eig: &HermEig<S>, t: S) -> CMat<S> {
    eig.apply(|x| {
        let th = t * x;
        Complex::new(th.cos(), th.sin())
    })
}

/// Partial-pivot LU inverse for small matrices.
pub fn inverse<S: Real>(m: &CMat<S>) -> Result<CMat<S>> {
    let n = m.dim();
    let mut a = m.clone();
    let mut inv = CMat::identity(n);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[(col, col)].norm();
        for row in (col + 1)..n {
            let v = a[(row, col)].norm();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best <= S::min_positive_value() * r(1e6) {
            return Err(Error::Conditioning("singular matrix in LU inverse".into()));
        }
        if piv != col {
            for j in 0..n {
                let (x, y) = (a[(col, j)], a[(piv, j)]);
                a[(col, j)] = y;
                a[(piv, j)] = x;
                let (x, y) = (inv[(col, j)], inv[(piv, j)]);
                inv[(col, j)] = y;
                inv[(piv, j)] = x;
            }
        }
        let d = a[(col, col)];
        for j in 0..n {
            a[(col, j)] = a[(col, j)] / d;
            inv[(col, j)] = inv[(col, j)] / d;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[(row, col)];
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                let acj = a[(col, j)];
                let icj = inv[(col, j)];
                a[(row, j)] = a[(row, j)] - f * acj;
                inv[(row, j)] = inv[(row, j)] - f * icj;
            }
        }
    }
    Ok(inv)
}

/// Determinant by partial-pivot LU.
pub fn det<S: Real>(m: &CMat<S>) -> C<S> {
    let n = m.dim();
    let mut a = m.clone();
    let mut sign = C::one();
    for col in 0..n {
        let mut piv = col;
        let mut best = a[(col, col)].norm();
        for row in (col + 1)..n {
            let v = a[(row, col)].norm();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == S::zero() {
            return C::zero();
        }
        if piv != col {
            for j in 0..n {
                let (x, y) = (a[(col, j)], a[(piv, j)]);
                a[(col, j)] = y;
                a[(piv, j)] = x;
            }
            sign = -sign;
        }
        for row in (col + 1)..n {
            let f = a[(row, col)] / a[(col, col)];
            if f.is_zero() {
                continue;
            }
            for j in col..n {
                let acj = a[(col, j)];
                a[(row, j)] = a[(row, j)] - f * acj;
            }
        }
    }
    let mut d = sign;
    for i in 0..n {
        d = d * a[(i, i)];
    }
    d
}

/// Principal matrix square root by Denman-Beavers iteration.
/// Valid for matrices with no spectrum on the closed negative real axis.
pub fn sqrtm<S: Real>(m: &CMat<S>) -> Result<CMat<S>> {
    let n = m.dim();
    let mut y = m.clone();
    let mut z = CMat::identity(n);
    let tol = S::epsilon() * r::<S>(32.0) * (S::one() + m.fro_norm());
    for _ in 0..64 {
        let yi = inverse(&y)?;
        let zi = inverse(&z)?;
        let y_next = (&y + &zi).scale_re(r(0.5));
        let z_next = (&z + &yi).scale_re(r(0.5));
        let delta = (&y_next - &y).fro_norm();
        y = y_next;
        z = z_next;
        if delta <= tol {
            return Ok(y);
        }
    }
    Err(Error::Conditioning("Denman-Beavers square root did not converge".into()))
}

/// Principal matrix logarithm by inverse scaling-and-squaring.
/// Requires spectrum off the closed negative real axis; plaquette holonomies
/// used in this crate have eigenphases well inside (-pi, pi).
pub fn logm_principal<S: Real>(m: &CMat<S>) -> Result<CMat<S>> {
    let n = m.dim();
    let id = CMat::identity(n);
    let mut a = m.clone();
    let mut k = 0u32;
    loop {
        let e = (&a - &id).fro_norm();
        if e < r(0.25) {
            break;
        }
        if k >= 40 {
            return Err(Error::Conditioning("matrix log scaling did not converge".into()));
        }
        a = sqrtm(&a)?;
        k += 1;
    }
    let e = &a - &id;
    // log(I+E) = sum_{j>=1} (-1)^{j+1} E^j / j
    let mut term = e.clone();
    let mut acc = CMat::zeros(n);
    let tol = S::epsilon() * r::<S>(0.5);
    for j in 1..80 {
        let sign = if j % 2 == 1 { S::one() } else { -S::one() };
        let contrib = term.scale_re(sign / r(j as f64));
        acc = &acc + &contrib;
        if term.fro_norm() / r(j as f64) < tol {
            break;
        }
        term = &term * &e;
    }
    Ok(acc.scale_re(r((1u64 << k) as f64)))
}

/// Matrix exponential by scaling-and-squaring with a Taylor series core.
pub fn expm<S: Real>(m: &CMat<S>) -> CMat<S> {
    let n = m.dim();
    let norm = m.fro_norm();
    let mut k = 0u32;
    let mut scaled = m.clone();
    let half = r::<S>(0.5);
    let mut s = norm;
    while s > half && k < 40 {
        s = s * half;
        k += 1;
    }
    if k > 0 {
        scaled = scaled.scale_re(S::one() / r((1u64 << k) as f64));
    }
    let mut acc = CMat::identity(n);
    let mut term = CMat::identity(n);
    for j in 1..40 {
        term = (&term * &scaled).scale_re(S::one() / r(j as f64));
        acc = &acc + &term;
        if term.fro_norm() < S::epsilon() {
            break;
        }
    }
    for _ in 0..k {
        acc = &acc * &acc;
    }
    acc
}

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre_01<S: Real>(n: usize) -> (Vec<S>, Vec<S>) {
    assert!(n >= 1);
    let mut nodes = vec![S::zero(); n];
    let mut weights = vec![S::zero(); n];
    let nf = n as f64;
    for i in 0..n {
        // Initial guess (Chebyshev-like), then Newton on P_n.
        let mut x = r::<S>((std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos());
        let mut dp = S::zero();
        for _ in 0..100 {
            // Legendre recurrence at x on [-1, 1].
            let mut p0 = S::one();
            let mut p1 = x;
            for k in 2..=n {
                let kf = r::<S>(k as f64);
                let p2 = ((r::<S>(2.0 * k as f64 - 1.0)) * x * p1 - (kf - S::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = r::<S>(nf) * (x * p1 - p0) / (x * x - S::one());
            let dx = p1 / dp;
            x = x - dx;
            if dx.abs() < S::epsilon() * r(4.0) {
                break;
            }
        }
        let w = r::<S>(2.0) / ((S::one() - x * x) * dp * dp);
        // Map [-1,1] -> [0,1]; reverse order so nodes ascend.
        nodes[n - 1 - i] = (x + S::one()) * r(0.5);
        weights[n - 1 - i] = w * r(0.5);
    }
    (nodes, weights)
}

/// splitmix64: deterministic seeded stream for test/scenario fields.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1).
    pub fn next_sym<S: Real>(&mut self) -> S {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        r(2.0 * u - 1.0)
    }

    /// Random Hermitian matrix with entries of magnitude <= amp.
    pub fn hermitian<S: Real>(&mut self, n: usize, amp: S) -> CMat<S> {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            m[(i, i)] = c_re(self.next_sym::<S>() * amp);
            for j in (i + 1)..n {
                let z = Complex::new(self.next_sym::<S>() * amp, self.next_sym::<S>() * amp);
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    /// Random complex matrix with entries of magnitude <= amp.
    pub fn complex_matrix<S: Real>(&mut self, n: usize, amp: S) -> CMat<S> {
        CMat::from_fn(n, |_, _| {
            Complex::new(self.next_sym::<S>() * amp, self.next_sym::<S>() * amp)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn jacobi_diagonalizes_known_2x2() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let h = CMat::from_rows_f64(&[
            vec![(2.0, 0.0), (0.0, 1.0)],
            vec![(0.0, -1.0), (2.0, 0.0)],
        ]);
        let eig = hermitian_eig::<f64>(&h).unwrap();
        assert!(close(eig.w[0], 1.0, 1e-13));
        assert!(close(eig.w[1], 3.0, 1e-13));
        // Reconstruction.
        let rec = eig.apply(|x| c_re(x));
        assert!((&rec - &h).fro_norm() < 1e-12);
    }

    #[test]
    fn jacobi_reconstructs_random_hermitian() {
        let mut rng = SplitMix64::new(42);
        for n in 1..=9 {
            let h = rng.hermitian::<f64>(n, 1.0);
            let eig = hermitian_eig(&h).unwrap();
            let rec = eig.apply(c_re);
            assert!(
                (&rec - &h).fro_norm() < 1e-11 * (1.0 + h.fro_norm()),
                "n = {n}"
            );
            // Unitarity of V.
            let vtv = &eig.v.adjoint() * &eig.v;
            assert!((&vtv - &CMat::identity(n)).fro_norm() < 1e-12);
        }
    }

    #[test]
    fn spectral_calculus_roundtrips() {
        let mut rng = SplitMix64::new(7);
        let a = rng.hermitian::<f64>(3, 0.4);
        let ea = expm(&a); // positive definite
        let eig = hermitian_eig(&ea).unwrap();
        let back = pos_log(&eig);
        assert!((&back - &a).fro_norm() < 1e-10);
        let s = pos_sqrt(&eig);
        assert!((&(&s * &s) - &ea).fro_norm() < 1e-11);
        let si = pos_inv_sqrt(&eig);
        assert!((&(&s * &si) - &CMat::identity(3)).fro_norm() < 1e-11);
    }

    #[test]
    fn inverse_small_random() {
        let mut rng = SplitMix64::new(3);
        for n in 1..=6 {
            let m = &rng.complex_matrix::<f64>(n, 1.0) + &CMat::identity(n).scale_re(2.5);
            let mi = inverse(&m).unwrap();
            assert!((&(&m * &mi) - &CMat::identity(n)).fro_norm() < 1e-11);
        }
    }

    #[test]
    fn logm_inverts_expm() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..5 {
            let x = rng.complex_matrix::<f64>(3, 0.5);
            let ex = expm(&x);
            let lg = logm_principal(&ex).unwrap();
            let ex2 = expm(&lg);
            assert!((&ex2 - &ex).fro_norm() < 1e-11 * (1.0 + ex.fro_norm()));
        }
    }

    #[test]
    fn logm_on_unitary_phases() {
        // U = diag(e^{i 0.3}, e^{-i 1.2}): log should give the phases back.
        let u = CMat::diag(&[
            Complex::from_polar(1.0, 0.3),
            Complex::from_polar(1.0, -1.2),
        ]);
        let lg = logm_principal(&u).unwrap();
        assert!(close(lg[(0, 0)].im, 0.3, 1e-12));
        assert!(close(lg[(1, 1)].im, -1.2, 1e-12));
        assert!(lg[(0, 0)].re.abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre_01::<f64>(5);
        // Exact for degree <= 9 on [0,1]: integral of x^k is 1/(k+1).
        for k in 0..=9usize {
            let mut acc = 0.0;
            for (xi, wi) in x.iter().zip(w.iter()) {
                acc += wi * xi.powi(k as i32);
            }
            assert!(close(acc, 1.0 / (k as f64 + 1.0), 1e-13), "k = {k}");
        }
        let (x33, w33) = gauss_legendre_01::<f64>(33);
        assert_eq!(x33.len(), 33);
        let total: f64 = w33.iter().sum();
        assert!(close(total, 1.0, 1e-13));
        assert!(x33.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn splitmix_deterministic() {
        let mut a = SplitMix64::new(99);
        let mut b = SplitMix64::new(99);
        for _ in 0..10 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }
}
