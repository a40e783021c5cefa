//! Dense complex-matrix primitives and the factorizations the block-ZXZ
//! construction consumes: SVD, polar decomposition and the eigendecomposition
//! of unitary matrices.
//!
//! Both factorizations run on the Jacobi kernels in [`jacobi`]; the public
//! functions here own the contracts (ordering, reconstruction checks,
//! unit-modulus eigenvalues, orthonormal eigenvectors under degeneracy).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::{arg, cis, modulus, Real};

/// Dense complex matrix, column-major storage.
pub type CMatrix<T> = DMatrix<Complex<T>>;

mod jacobi;

/// Numerical tolerances applied by the factorization routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Bound on `||U^dagger U - I||_max` for inputs treated as unitary.
    pub unitarity: f64,
    /// Bound on the max-norm reconstruction residual of a factorization.
    pub factor: f64,
    /// Bound on the max-norm residual of a composite step (synthesis node,
    /// two-qubit template, demultiplexing).
    pub node: f64,
}

impl Tolerances {
    pub fn for_scalar<T: Real>() -> Self {
        Tolerances {
            unitarity: T::DEFAULT_TOL,
            factor: T::DEFAULT_TOL,
            node: T::DEFAULT_TOL * 100.0,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::for_scalar::<f64>()
    }
}

pub fn identity<T: Real>(dim: usize) -> CMatrix<T> {
    CMatrix::identity(dim, dim)
}

/// Builds a matrix from row-major `(re, im)` pairs.
pub fn from_rows<T: Real>(rows: usize, cols: usize, entries: &[(f64, f64)]) -> CMatrix<T> {
    assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
    CMatrix::from_fn(rows, cols, |i, j| {
        let (re, im) = entries[i * cols + j];
        Complex::new(T::lit(re), T::lit(im))
    })
}

pub fn diag<T: Real>(entries: &[Complex<T>]) -> CMatrix<T> {
    CMatrix::from_diagonal(&DVector::from_column_slice(entries))
}

/// Kronecker product `a ⊗ b`; `a` acts on the more significant index.
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

/// Block-diagonal `[a 0; 0 b]`.
pub fn direct_sum<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar + br, ac + bc);
    out.view_mut((0, 0), (ar, ac)).copy_from(a);
    out.view_mut((ar, ac), (br, bc)).copy_from(b);
    out
}

pub fn max_abs<T: Real>(m: &CMatrix<T>) -> f64 {
    m.iter().map(|z| modulus(*z).as_f64()).fold(0.0, f64::max)
}

pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| modulus(*x - *y).as_f64())
        .fold(0.0, f64::max)
}

/// `||m^dagger m - I||_max`, or infinity for non-square input.
pub fn unitarity_residual<T: Real>(m: &CMatrix<T>) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(&(m.adjoint() * m), &identity(m.nrows()))
}

pub fn is_unitary<T: Real>(m: &CMatrix<T>, tol: f64) -> bool {
    unitarity_residual(m) <= tol
}

/// Number of qubits `n` for a `2^n x 2^n` matrix.
pub fn qubit_count<T: Real>(m: &CMatrix<T>) -> Result<usize> {
    let (r, c) = m.shape();
    if r != c || r == 0 || !r.is_power_of_two() {
        return Err(Error::Structural(format!(
            "expected a square matrix of power-of-two dimension, got {r}x{c}"
        )));
    }
    Ok(r.trailing_zeros() as usize)
}

pub fn check_unitary<T: Real>(m: &CMatrix<T>, tol: f64, what: &str) -> Result<()> {
    check_finite(m)?;
    let r = unitarity_residual(m);
    if r > tol {
        return Err(Error::Precondition(format!(
            "{what} is not unitary (||U^dagger U - I||_max = {r:e})"
        )));
    }
    Ok(())
}

fn check_finite<T: Real>(m: &CMatrix<T>) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Precondition("matrix has non-finite entries".into()))
    }
}

/// `V * diag(sigma) * Wd`, with `sigma` sorted non-increasing.
#[derive(Clone, Debug)]
pub struct Svd<T: Real> {
    pub v: CMatrix<T>,
    pub sigma: DVector<T>,
    pub wd: CMatrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn reconstruct(&self) -> CMatrix<T> {
        let scaled = CMatrix::from_fn(self.v.nrows(), self.v.ncols(), |i, j| {
            self.v[(i, j)] * Complex::from(self.sigma[j])
        });
        scaled * &self.wd
    }
}

pub fn svd<T: Real>(m: &CMatrix<T>, tol: &Tolerances) -> Result<Svd<T>> {
    if !m.is_square() {
        return Err(Error::Precondition("svd expects a square matrix".into()));
    }
    check_finite(m)?;
    let (v, sigma, w) = jacobi::svd(m).ok_or(Error::Factorization {
        what: "svd",
        residual: f64::INFINITY,
    })?;
    let out = Svd {
        v,
        sigma: DVector::from_vec(sigma),
        wd: w.adjoint(),
    };
    let scale = max_abs(m).max(1.0);
    let residual = max_abs_diff(&out.reconstruct(), m) / scale;
    if residual > tol.factor {
        return Err(Error::Factorization {
            what: "svd",
            residual,
        });
    }
    Ok(out)
}

/// `m = s * uf` with `s` Hermitian positive semi-definite and `uf` unitary.
#[derive(Clone, Debug)]
pub struct Polar<T: Real> {
    pub s: CMatrix<T>,
    pub uf: CMatrix<T>,
}

pub fn polar<T: Real>(m: &CMatrix<T>, tol: &Tolerances) -> Result<Polar<T>> {
    let Svd { v, sigma, wd } = svd(m, tol)?;
    let scaled = CMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * Complex::from(sigma[j]));
    let s = scaled * v.adjoint();
    let uf = &v * wd;
    Ok(Polar { s, uf })
}

/// `u = v * diag(lambda) * v^dagger` with `v` unitary and `|lambda_i| = 1`.
#[derive(Clone, Debug)]
pub struct UnitaryEig<T: Real> {
    pub v: CMatrix<T>,
    pub lambda: Vec<Complex<T>>,
}

impl<T: Real> UnitaryEig<T> {
    pub fn reconstruct(&self) -> CMatrix<T> {
        let scaled = CMatrix::from_fn(self.v.nrows(), self.v.ncols(), |i, j| {
            self.v[(i, j)] * self.lambda[j]
        });
        scaled * self.v.adjoint()
    }
}

/// Eigendecomposition of a unitary matrix.
///
/// The eigenvectors come from the Hermitian part `(e^{-i t} U + e^{i t} U^dagger)/2`
/// for a fixed direction `t`. Distinct eigenvalues of `U` that are mirror
/// images across that direction collide in the Hermitian part, so each such
/// cluster is split again along the orthogonal direction. Only Jacobi
/// rotations are applied, which keeps `V` unitary under any degeneracy.
pub fn unitary_eig<T: Real>(u: &CMatrix<T>, tol: &Tolerances) -> Result<UnitaryEig<T>> {
    check_finite(u)?;
    check_unitary(u, tol.unitarity, "unitary_eig input")?;
    let mut best: Option<(f64, UnitaryEig<T>)> = None;
    for &direction in &EIG_DIRECTIONS {
        let Some(candidate) = eig_along(u, T::lit(direction)) else {
            continue;
        };
        let residual = max_abs_diff(&candidate.reconstruct(), u).max(unitarity_residual(&candidate.v));
        if residual <= tol.factor {
            return Ok(candidate);
        }
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, candidate));
        }
    }
    Err(Error::Factorization {
        what: "unitary eigendecomposition",
        residual: best.map_or(f64::INFINITY, |(r, _)| r),
    })
}

const EIG_DIRECTIONS: [f64; 3] = [0.577_215_664_901_532_9, 2.020_569_031_595_942_8, -1.202_056_903_159_594_3];

/// Gap below which neighbouring Hermitian-part eigenvalues are re-split.
const CLUSTER_GAP: f64 = 1e-4;

fn hermitian_part<T: Real>(u: &CMatrix<T>, direction: T) -> CMatrix<T> {
    let rot = cis(-direction);
    (u * rot + u.adjoint() * rot.conj()).unscale(T::lit(2.0))
}

fn eig_along<T: Real>(u: &CMatrix<T>, direction: T) -> Option<UnitaryEig<T>> {
    let n = u.nrows();
    let (h, mut v) = jacobi::hermitian_eig(&hermitian_part(u, direction))?;
    let t = v.adjoint() * u * &v;

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (h[end] - h[end - 1]).as_f64() < CLUSTER_GAP {
            end += 1;
        }
        if end - start > 1 {
            let k = end - start;
            let block = t.view((start, start), (k, k)).into_owned();
            let orth = direction + T::frac_pi_2();
            let (_, w) = jacobi::hermitian_eig(&hermitian_part(&block, orth))?;
            let cols = v.columns(start, k) * w;
            v.columns_mut(start, k).copy_from(&cols);
        }
        start = end;
    }

    let t = v.adjoint() * u * &v;
    let lambda = (0..n)
        .map(|i| {
            let z = t[(i, i)];
            let m = modulus(z);
            if m > T::zero() {
                z.unscale(m)
            } else {
                Complex::new(T::one(), T::zero())
            }
        })
        .collect();
    Some(UnitaryEig { v, lambda })
}

/// `e^{i arg(z)/2}` with `arg(z)` in `(-pi, pi]`.
pub fn principal_sqrt_phase<T: Real>(z: Complex<T>, tol: f64) -> Result<Complex<T>> {
    let r = modulus(z).as_f64();
    if !r.is_finite() || (r - 1.0).abs() > tol {
        return Err(Error::Precondition(format!(
            "expected a unit-modulus value, |z| = {r}"
        )));
    }
    Ok(cis(arg(z) / T::lit(2.0)))
}

/// Haar-distributed random unitary of dimension `dim`: QR of a complex
/// Ginibre matrix with the phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix<T> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut entries = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        entries.push(Complex::new(T::lit(re * scale), T::lit(im * scale)));
    }
    let g = CMatrix::from_row_slice(dim, dim, &entries);
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let m = modulus(d);
        let phase = if m > T::zero() {
            d.unscale(m)
        } else {
            Complex::new(T::one(), T::zero())
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}
