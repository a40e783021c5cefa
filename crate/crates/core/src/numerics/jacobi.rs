//! Jacobi kernels: one-sided (Hestenes) SVD and cyclic Hermitian
//! eigendecomposition. Every update is a plane rotation, so the accumulated
//! factors stay unitary to working precision regardless of how the spectrum
//! clusters.

use num_complex::Complex;

use super::CMatrix;
use crate::scalar::{arg, cis, modulus, Real};

const MAX_SWEEPS: usize = 80;

fn col_dot<T: Real>(m: &CMatrix<T>, p: usize, q: usize) -> Complex<T> {
    m.column(p)
        .iter()
        .zip(m.column(q).iter())
        .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * *b)
}

fn col_norm_sq<T: Real>(m: &CMatrix<T>, p: usize) -> T {
    m.column(p)
        .iter()
        .fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im)
}

/// Applies `[a_p a_q] <- [a_p a_q] * [[c, s e^{i phi}], [-s e^{-i phi}, c]]`.
fn rotate_cols<T: Real>(m: &mut CMatrix<T>, p: usize, q: usize, c: T, s: T, phase: Complex<T>) {
    let cc = Complex::from(c);
    let sp = phase.scale(s);
    let sm = phase.conj().scale(s);
    for i in 0..m.nrows() {
        let ap = m[(i, p)];
        let aq = m[(i, q)];
        m[(i, p)] = ap * cc - aq * sm;
        m[(i, q)] = ap * sp + aq * cc;
    }
}

/// Smallest-magnitude root of `t^2 + 2 zeta t - 1 = 0`.
fn jacobi_tangent<T: Real>(zeta: T) -> T {
    let one = T::one();
    let t = one / (zeta.abs() + (one + zeta * zeta).sqrt());
    if zeta < T::zero() {
        -t
    } else {
        t
    }
}

/// One-sided Jacobi SVD of a square matrix: returns `(u, sigma, v)` with
/// `m = u * diag(sigma) * v^dagger`, sigma sorted non-increasing.
pub(crate) fn svd<T: Real>(m: &CMatrix<T>) -> Option<(CMatrix<T>, Vec<T>, CMatrix<T>)> {
    let n = m.ncols();
    let mut a = m.clone();
    let mut v = CMatrix::<T>::identity(n, n);
    let eps = T::default_epsilon();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = col_norm_sq(&a, p);
                let beta = col_norm_sq(&a, q);
                let gamma = col_dot(&a, p, q);
                let g = modulus(gamma);
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (g + g);
                let t = jacobi_tangent(zeta);
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let phase = gamma.unscale(g);
                rotate_cols(&mut a, p, q, c, s, phase);
                rotate_cols(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }

    let mut order: Vec<(usize, T)> = (0..n).map(|j| (j, col_norm_sq(&a, j).sqrt())).collect();
    order.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap_or(std::cmp::Ordering::Equal));

    let sigma_max = order.first().map_or(T::zero(), |x| x.1);
    let floor = sigma_max * eps * T::lit(n as f64);
    let mut u = CMatrix::<T>::zeros(n, n);
    let mut vs = CMatrix::<T>::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (k, &(j, s)) in order.iter().enumerate() {
        vs.set_column(k, &v.column(j));
        if s > floor {
            u.set_column(k, &a.column(j).unscale(s));
            sigma.push(s);
        } else {
            sigma.push(if s > T::zero() { s } else { T::zero() });
        }
    }
    // Left vectors of tiny singular values are re-derived below; the rest get a
    // Gram-Schmidt pass in descending-sigma order, whose corrections scale
    // inversely with sigma and so never disturb the reconstruction.
    orthonormalize_columns(&mut u, |k| sigma[k] > floor);
    Some((u, sigma, vs))
}

/// Modified Gram-Schmidt over the columns of `u`; columns for which `keep`
/// is false (or that collapse) are replaced by completing the basis.
fn orthonormalize_columns<T: Real>(u: &mut CMatrix<T>, keep: impl Fn(usize) -> bool) {
    let n = u.ncols();
    let mut next_basis = 0;
    for k in 0..n {
        let mut attempt_keep = keep(k);
        loop {
            if !attempt_keep {
                if next_basis >= u.nrows() {
                    break;
                }
                let mut e = CMatrix::<T>::zeros(u.nrows(), 1);
                e[(next_basis, 0)] = Complex::new(T::one(), T::zero());
                next_basis += 1;
                u.set_column(k, &e.column(0));
            }
            for _ in 0..2 {
                for j in 0..k {
                    let proj = col_dot(u, j, k);
                    for i in 0..u.nrows() {
                        let uj = u[(i, j)];
                        u[(i, k)] -= uj * proj;
                    }
                }
            }
            let norm = col_norm_sq(u, k).sqrt();
            if norm > T::lit(0.5) || (attempt_keep && norm > T::default_epsilon().sqrt()) {
                for i in 0..u.nrows() {
                    u[(i, k)] = u[(i, k)].unscale(norm);
                }
                break;
            }
            attempt_keep = false;
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix: returns
/// `(values, vectors)` with eigenvalues ascending and `h = V diag(values) V^dagger`.
pub(crate) fn hermitian_eig<T: Real>(h: &CMatrix<T>) -> Option<(Vec<T>, CMatrix<T>)> {
    let n = h.nrows();
    let mut a = h.clone();
    // symmetrize away rounding in the input
    for i in 0..n {
        a[(i, i)] = Complex::from(a[(i, i)].re);
        for j in i + 1..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()).unscale(T::lit(2.0));
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let mut v = CMatrix::<T>::identity(n, n);
    let eps = T::default_epsilon();
    let frob = a.iter().fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im).sqrt();
    let tiny = eps * frob * T::lit(0.1);

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let g = modulus(b);
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if g <= tiny {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (g + g);
                let t = jacobi_tangent(zeta);
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                // J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] with b = |b| e^{i phi}
                let ph = cis(-arg(b));
                apply_similarity(&mut a, p, q, c, s, ph);
                rotate_pair(&mut v, p, q, c, s, ph);
                a[(p, q)] = Complex::new(T::zero(), T::zero());
                a[(q, p)] = Complex::new(T::zero(), T::zero());
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    let mut order: Vec<(usize, T)> = (0..n).map(|j| (j, a[(j, j)].re)).collect();
    order.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|x| x.1).collect();
    let mut vs = CMatrix::<T>::zeros(n, n);
    for (k, &(j, _)) in order.iter().enumerate() {
        vs.set_column(k, &v.column(j));
    }
    Some((values, vs))
}

/// Columns `p, q` of `m` multiplied by `J = [[c, s], [-s ph, c ph]]`.
fn rotate_pair<T: Real>(m: &mut CMatrix<T>, p: usize, q: usize, c: T, s: T, ph: Complex<T>) {
    for i in 0..m.nrows() {
        let xp = m[(i, p)];
        let xq = m[(i, q)];
        m[(i, p)] = xp.scale(c) - (xq * ph).scale(s);
        m[(i, q)] = xp.scale(s) + (xq * ph).scale(c);
    }
}

/// `a <- J^dagger a J`.
fn apply_similarity<T: Real>(a: &mut CMatrix<T>, p: usize, q: usize, c: T, s: T, ph: Complex<T>) {
    rotate_pair(a, p, q, c, s, ph);
    let n = a.ncols();
    for j in 0..n {
        let xp = a[(p, j)];
        let xq = a[(q, j)];
        // rows: J^dagger = [[c, -s conj(ph)], [s, c conj(ph)]]
        a[(p, j)] = xp.scale(c) - (xq * ph.conj()).scale(s);
        a[(q, j)] = xp.scale(s) + (xq * ph.conj()).scale(c);
    }
}
