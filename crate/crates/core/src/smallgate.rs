//! Base cases: ZYZ for one qubit, and two-qubit synthesis through the
//! canonical (KAK) form with a 3-CNOT template or a 2-CNOT template that
//! leaves a diagonal behind.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use crate::circuit::{circuit_to_unitary, Circuit, Gate};
use crate::error::{Error, Result};
use crate::numerics::{self, CMatrix, Tolerances};
use crate::scalar::{arg, cis, modulus, Real};

/// `U = e^{i phi} Rz(alpha) Ry(beta) Rz(gamma)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZyzAngles<T: Real> {
    pub phi: T,
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
}

impl<T: Real> ZyzAngles<T> {
    pub fn matrix(&self) -> CMatrix<T> {
        let rz = |t: T| Gate::Rz(0, t).local_matrix();
        (rz(self.alpha) * Gate::Ry(0, self.beta).local_matrix() * rz(self.gamma)) * cis(self.phi)
    }
}

pub fn zyz<T: Real>(u: &CMatrix<T>) -> Result<ZyzAngles<T>> {
    if u.shape() != (2, 2) {
        return Err(Error::Precondition(format!("zyz needs a 2x2 matrix, got {:?}", u.shape())));
    }
    let two = T::lit(2.0);
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let phi = arg(det) / two;
    let v = u * cis(-phi);
    let (s, co) = (modulus(v[(0, 1)]), modulus(v[(0, 0)]));
    let beta = two * s.atan2(co);
    let mut hs = arg(v[(1, 1)]);
    let mut hd = arg(-v[(1, 0)]);
    if s <= T::default_epsilon() {
        hd = hs;
    } else if co <= T::default_epsilon() {
        hs = hd;
    }
    Ok(ZyzAngles {
        phi,
        alpha: hs + hd,
        beta,
        gamma: hs - hd,
    })
}

/// Appends `Rz(gamma), Ry(beta), Rz(alpha)` on `q` and folds the phase in.
pub fn emit_zyz<T: Real>(circ: &mut Circuit<T>, q: usize, a: &ZyzAngles<T>) -> Result<()> {
    circ.push(Gate::Rz(q, a.gamma))?;
    circ.push(Gate::Ry(q, a.beta))?;
    circ.push(Gate::Rz(q, a.alpha))?;
    circ.mul_global_phase(cis(a.phi));
    Ok(())
}

/// ELEMENTARY two-qubit circuit; with `residual_diagonal = Some(d)` the
/// target is `C * diag(d)` (the diagonal acts first in time).
#[derive(Clone, Debug)]
pub struct TwoQubitSynth<T: Real> {
    pub circuit: Circuit<T>,
    pub residual_diagonal: Option<Vec<Complex<T>>>,
}

/// `U = g (A1 ⊗ B1) Can(a, b, c) (A2 ⊗ B2)` with
/// `Can(a, b, c) = exp(i (a XX + b YY + c ZZ))`.
#[derive(Clone, Debug)]
pub struct KakDecomposition<T: Real> {
    pub g: Complex<T>,
    pub a1: CMatrix<T>,
    pub b1: CMatrix<T>,
    pub a2: CMatrix<T>,
    pub b2: CMatrix<T>,
    pub a: T,
    pub b: T,
    pub c: T,
}

pub fn canonical_gate<T: Real>(a: T, b: T, cc: T) -> CMatrix<T> {
    // diagonal in the magic basis
    let mb = magic_basis::<T>();
    let th = [a - b + cc, a + b - cc, -a - b - cc, -a + b + cc];
    let d: Vec<Complex<T>> = th.iter().map(|t| cis(*t)).collect();
    &mb * numerics::diag(&d) * mb.adjoint()
}

fn magic_basis<T: Real>() -> CMatrix<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    numerics::from_rows(
        4,
        4,
        &[
            (s, 0.), (0., 0.), (0., 0.), (0., s),
            (0., 0.), (0., s), (s, 0.), (0., 0.),
            (0., 0.), (0., s), (-s, 0.), (0., 0.),
            (s, 0.), (0., 0.), (0., 0.), (0., -s),
        ],
    )
}

// Real-coefficient mixes of Re(m), Im(m) tried in turn.
const MIXES: [(f64, f64); 6] = [
    (0.8191520442889918, 0.5735764363510461),
    (0.2756373558169992, -0.9612616959383189),
    (-0.6293203910498375, 0.7771459614569709),
    (0.9975640502598242, 0.0697564737441253),
    (0.4694715627858908, 0.8829475928589269),
    (-0.1218693434051475, -0.9925461516413221),
];

/// `A ⊗ B` split of a Kronecker product, `det B = 1`.
fn kron_factor<T: Real>(k: &CMatrix<T>) -> (CMatrix<T>, CMatrix<T>) {
    let (mut r, mut col, mut best) = (0, 0, T::zero());
    for i in 0..4 {
        for j in 0..4 {
            let m = modulus(k[(i, j)]);
            if m > best {
                best = m;
                r = i;
                col = j;
            }
        }
    }
    let bm = k.view(((r / 2) * 2, (col / 2) * 2), (2, 2)).into_owned();
    let det = bm[(0, 0)] * bm[(1, 1)] - bm[(0, 1)] * bm[(1, 0)];
    let root = cis(arg(det) * T::lit(0.5)) * modulus(det).sqrt();
    let bm = bm / root;
    let pivot = bm[(r % 2, col % 2)];
    let am = CMatrix::from_fn(2, 2, |i, j| k[(2 * i + r % 2, 2 * j + col % 2)] / pivot);
    (am, bm)
}

/// Canonical decomposition. `paired` forces `c = 0`, which is only valid when
/// the spectrum of the magic-basis `m` is closed under conjugation.
pub fn kak_decompose<T: Real>(u: &CMatrix<T>, tol: &Tolerances, paired: bool) -> Result<KakDecomposition<T>> {
    if u.shape() != (4, 4) {
        return Err(Error::Precondition(format!("two-qubit synthesis needs 4x4, got {:?}", u.shape())));
    }
    numerics::check_unitary(u, tol.unitarity, "two-qubit input")?;
    let quarter = T::lit(0.25);
    let det = u.determinant();
    let g = cis(arg(det) * quarter) * modulus(det).powf(quarter);
    let mb = magic_basis::<T>();
    let up = mb.adjoint() * (u / g) * &mb;
    let m = up.transpose() * &up;

    let mut best: Option<(f64, DMatrix<T>, Vec<Complex<T>>)> = None;
    for (r0, r1) in MIXES {
        let s = DMatrix::from_fn(4, 4, |i, j| T::lit(r0) * m[(i, j)].re + T::lit(r1) * m[(i, j)].im);
        let p = SymmetricEigen::new(s).eigenvectors;
        let pc = p.map(Complex::from);
        let dm = pc.transpose() * &m * &pc;
        let mut off = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    off = off.max(modulus(dm[(i, j)]).as_f64());
                }
            }
        }
        let lam = (0..4).map(|i| dm[(i, i)]).collect();
        if best.as_ref().is_none_or(|b| off < b.0) {
            best = Some((off, p, lam));
        }
        if off <= tol.factor {
            break;
        }
    }
    let (off, p, mut lam) = best.expect("at least one mix is tried");
    if off > tol.node {
        return Err(Error::Factorization { what: "magic-basis diagonalization", residual: off });
    }
    let mut o2 = p.transpose();
    let half = T::lit(0.5);
    let mut th: Vec<T> = if paired {
        let rest = [1usize, 2, 3];
        let target = lam[0].conj();
        let j = *rest
            .iter()
            .min_by(|x, y| {
                modulus(lam[**x] - target)
                    .partial_cmp(&modulus(lam[**y] - target))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("three candidates");
        let others: Vec<usize> = rest.iter().copied().filter(|x| *x != j).collect();
        let order = [0, others[0], others[1], j];
        o2 = DMatrix::from_fn(4, 4, |i, k| o2[(order[i], k)]);
        lam = order.iter().map(|i| lam[*i]).collect();
        let t0 = arg(lam[0]) * half;
        let t1 = arg(lam[1]) * half;
        vec![t0, t1, -t1, -t0]
    } else {
        lam.iter().map(|l| arg(*l) * half).collect()
    };
    if o2.determinant() < T::zero() {
        for k in 0..4 {
            o2[(0, k)] = -o2[(0, k)];
        }
    }
    let o2c = o2.map(Complex::from);
    let dinv: Vec<Complex<T>> = th.iter().map(|t| cis(-*t)).collect();
    let mut o1c = &up * o2c.transpose() * numerics::diag(&dinv);
    let imag = o1c.iter().map(|z| z.im.abs().as_f64()).fold(0.0, f64::max);
    if imag > tol.node {
        return Err(Error::Factorization { what: "real orthogonal KAK factor", residual: imag });
    }
    let mut o1 = o1c.map(|z| z.re);
    if o1.determinant() < T::zero() {
        for k in 0..4 {
            o1[(k, 0)] = -o1[(k, 0)];
        }
        th[0] += T::pi();
    }
    o1c = o1.map(Complex::from);
    let a = (th[0] + th[1]) * half;
    let b = (th[1] + th[3]) * half;
    let cc = (th[0] + th[3]) * half;
    let k1 = &mb * o1c * mb.adjoint();
    let k2 = &mb * o2c * mb.adjoint();
    let (a1, b1) = kron_factor(&k1);
    let (a2, b2) = kron_factor(&k2);
    Ok(KakDecomposition { g, a1, b1, a2, b2, a, b, c: cc })
}

fn rz_m<T: Real>(t: f64) -> CMatrix<T> {
    Gate::Rz(0, T::lit(t)).local_matrix()
}

fn rx_m<T: Real>(t: f64) -> CMatrix<T> {
    Gate::Rx(0, T::lit(t)).local_matrix()
}

fn push_local<T: Real>(circ: &mut Circuit<T>, q: usize, m: &CMatrix<T>) -> Result<()> {
    emit_zyz(circ, q, &zyz(m)?)
}

/// Multiplies the circuit by the phase that best matches `target`, then
/// checks the max-norm residual.
fn fix_phase<T: Real>(circ: &mut Circuit<T>, target: &CMatrix<T>, tol: &Tolerances, what: &'static str) -> Result<()> {
    let cm = circuit_to_unitary(circ)?;
    let tr = (cm.adjoint() * target).trace();
    let r = modulus(tr);
    if r > T::zero() {
        let ph = tr / r;
        circ.mul_global_phase(ph);
        let residual = numerics::max_abs_diff(&(cm * ph), target);
        if residual <= tol.node {
            return Ok(());
        }
        return Err(Error::Synthesis { node: "2q".into(), what, residual });
    }
    Err(Error::Synthesis { node: "2q".into(), what, residual: f64::INFINITY })
}

/// Exactly three CNOTs.
pub fn kak3<T: Real>(u: &CMatrix<T>, tol: &Tolerances) -> Result<TwoQubitSynth<T>> {
    let k = kak_decompose(u, tol, false)?;
    let two = T::lit(2.0);
    let hp = T::frac_pi_2();
    let mut circ = Circuit::new(2);
    push_local(&mut circ, 0, &k.a2)?;
    push_local(&mut circ, 1, &(rz_m::<T>(-std::f64::consts::FRAC_PI_2) * &k.b2))?;
    circ.push(Gate::Cnot { control: 1, target: 0 })?;
    circ.push(Gate::Rz(0, -two * k.c - hp))?;
    circ.push(Gate::Ry(1, -two * k.a - hp))?;
    circ.push(Gate::Cnot { control: 0, target: 1 })?;
    circ.push(Gate::Ry(1, two * k.b + hp))?;
    circ.push(Gate::Cnot { control: 1, target: 0 })?;
    push_local(&mut circ, 0, &(&k.a1 * rz_m::<T>(std::f64::consts::FRAC_PI_2)))?;
    push_local(&mut circ, 1, &k.b1)?;
    circ.mul_global_phase(k.g * cis(-T::frac_pi_4()));
    fix_phase(&mut circ, u, tol, "3-CNOT reconstruction")?;
    Ok(TwoQubitSynth { circuit: circ, residual_diagonal: None })
}

/// Exactly two CNOTs; `u = C * diag(residual)`.
pub fn kak2_up_to_diagonal<T: Real>(u: &CMatrix<T>, tol: &Tolerances) -> Result<TwoQubitSynth<T>> {
    if u.shape() != (4, 4) {
        return Err(Error::Precondition(format!("two-qubit synthesis needs 4x4, got {:?}", u.shape())));
    }
    numerics::check_unitary(u, tol.unitarity, "two-qubit input")?;
    let quarter = T::lit(0.25);
    let det = u.determinant();
    let g = cis(arg(det) * quarter);
    let mb = magic_basis::<T>();
    let up = mb.adjoint() * (u / g) * &mb;
    let m = up.transpose() * &up;
    let w = (m[(0, 0)] + m[(3, 3)]) - (m[(1, 1)] + m[(2, 2)]).conj();
    let delta = if modulus(w).as_f64() > 1e-14 { -arg(w) * T::lit(0.5) } else { T::zero() };
    let signs = [1.0, -1.0, -1.0, 1.0];
    let dz: Vec<Complex<T>> = signs.iter().map(|s| cis(delta * T::lit(*s))).collect();
    let v = u * numerics::diag(&dz);
    let k = kak_decompose(&v, tol, true)?;
    if k.c.abs().as_f64() > tol.node {
        return Err(Error::Synthesis {
            node: "2q".into(),
            what: "diagonal-absorbed canonical form kept a ZZ component",
            residual: k.c.abs().as_f64(),
        });
    }
    let two = T::lit(2.0);
    let q = std::f64::consts::FRAC_PI_2;
    let mut circ = Circuit::new(2);
    push_local(&mut circ, 0, &(rx_m::<T>(-q) * &k.a2))?;
    push_local(&mut circ, 1, &(rx_m::<T>(-q) * &k.b2))?;
    circ.push(Gate::Cnot { control: 0, target: 1 })?;
    circ.push(Gate::Rx(0, two * k.a))?;
    circ.push(Gate::Rz(1, -two * k.b))?;
    circ.push(Gate::Cnot { control: 0, target: 1 })?;
    push_local(&mut circ, 0, &(&k.a1 * rx_m::<T>(q)))?;
    push_local(&mut circ, 1, &(&k.b1 * rx_m::<T>(q)))?;
    circ.mul_global_phase(k.g);
    fix_phase(&mut circ, &v, tol, "2-CNOT reconstruction")?;
    let residual = dz.iter().map(|z| z.conj()).collect();
    Ok(TwoQubitSynth { circuit: circ, residual_diagonal: Some(residual) })
}
