//! Uniformly controlled RZ on the top qubit of a block, decomposed into
//! alternating RZ and CNOT gates along a binary reflected Gray code.
//!
//! Angle system: `alpha = M theta`, `M_ij = (-1)^{popcount((i-1) & g(j-1))}` with
//! `g(x) = x ^ (x >> 1)` and control position 1 the most significant control.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::scalar::{arg, modulus, Real};

pub const MAX_SCHEDULE_K: usize = 16;
pub const MAX_MATRIX_K: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UcrVariant {
    /// `Rz(theta_1), CNOT_1, ..., Rz(theta_N), CNOT_N` in time order.
    Standard,
    /// Mirror image: `CNOT_N, Rz(theta_N), ..., CNOT_1, Rz(theta_1)`.
    Reversed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DropTerminal {
    Keep,
    /// Standard only: omit the final CNOT.
    DropLast,
    /// Reversed only: omit the leading CNOT.
    DropFirst,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UcrzSpec<T: Real> {
    pub target: usize,
    /// Control qubits, most significant first.
    pub controls: Vec<usize>,
    pub alphas: Vec<T>,
}

impl<T: Real> UcrzSpec<T> {
    pub fn new(target: usize, controls: Vec<usize>, alphas: Vec<T>) -> Result<Self> {
        let k = controls.len();
        if k == 0 || k > MAX_SCHEDULE_K {
            return Err(Error::Resource(format!("UCRZ with {k} controls is out of range 1..={MAX_SCHEDULE_K}")));
        }
        if alphas.len() != 1 << k {
            return Err(Error::Precondition(format!(
                "{k} controls need {} angles, got {}",
                1usize << k,
                alphas.len()
            )));
        }
        let mut all = controls.clone();
        all.push(target);
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition("UCRZ qubits must be distinct".into()));
        }
        Ok(UcrzSpec { target, controls, alphas })
    }

    pub fn k(&self) -> usize {
        self.controls.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraySchedule {
    pub k: usize,
    /// Control position (1-based, 1 = most significant) of each CNOT.
    pub controls_seq: Vec<usize>,
}

pub fn gray(x: usize) -> usize {
    x ^ (x >> 1)
}

/// `alpha_j = -2 arg(d_j)`.
pub fn alphas_from_diagonal<T: Real>(d: &[Complex<T>], unitarity_tol: f64) -> Result<Vec<T>> {
    d.iter()
        .map(|z| {
            let r = modulus(*z).as_f64();
            if (r - 1.0).abs() > unitarity_tol {
                return Err(Error::Precondition(format!("diagonal entry has modulus {r}")));
            }
            Ok(-T::lit(2.0) * arg(*z))
        })
        .collect()
}

pub fn gray_schedule(k: usize) -> Result<GraySchedule> {
    if k == 0 || k > MAX_SCHEDULE_K {
        return Err(Error::Resource(format!("schedule size k={k} out of range 1..={MAX_SCHEDULE_K}")));
    }
    let len = 1usize << k;
    let controls_seq = (0..len)
        .map(|l| {
            let diff = gray(l) ^ gray((l + 1) % len);
            // single differing bit; bit k-1 is position 1
            k - diff.trailing_zeros() as usize
        })
        .collect();
    Ok(GraySchedule { k, controls_seq })
}

pub fn mk_matrix(k: usize) -> Result<DMatrix<i32>> {
    if k == 0 || k > MAX_MATRIX_K {
        return Err(Error::Resource(format!("matrix size k={k} out of range 1..={MAX_MATRIX_K}")));
    }
    let n = 1usize << k;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if (i & gray(j)).count_ones() % 2 == 0 { 1 } else { -1 }
    }))
}

/// `theta = 2^-k M^T alpha`, via a Walsh-Hadamard transform.
pub fn solve_thetas<T: Real>(alphas: &[T]) -> Result<Vec<T>> {
    let n = alphas.len();
    if n < 2 || !n.is_power_of_two() || n > 1 << MAX_SCHEDULE_K {
        return Err(Error::Precondition(format!("angle list length {n} is not 2^k with 1 <= k <= {MAX_SCHEDULE_K}")));
    }
    let mut h = alphas.to_vec();
    let mut span = 1;
    while span < n {
        for block in (0..n).step_by(2 * span) {
            for i in block..block + span {
                let (a, b) = (h[i], h[i + span]);
                h[i] = a + b;
                h[i + span] = a - b;
            }
        }
        span *= 2;
    }
    let scale = T::one() / T::lit(n as f64);
    Ok((0..n).map(|l| h[gray(l)] * scale).collect())
}

/// Appends the decomposition to `circ`.
pub fn emit_ucrz<T: Real>(
    circ: &mut Circuit<T>,
    spec: &UcrzSpec<T>,
    variant: UcrVariant,
    drop: DropTerminal,
) -> Result<()> {
    match (variant, drop) {
        (UcrVariant::Standard, DropTerminal::DropFirst) | (UcrVariant::Reversed, DropTerminal::DropLast) => {
            return Err(Error::Precondition(format!("{drop:?} is not available for the {variant:?} variant")));
        }
        _ => {}
    }
    let sched = gray_schedule(spec.k())?;
    let thetas = solve_thetas(&spec.alphas)?;
    let n = thetas.len();
    let cnot = |l: usize| Gate::Cnot {
        control: spec.controls[sched.controls_seq[l] - 1],
        target: spec.target,
    };
    match variant {
        UcrVariant::Standard => {
            for l in 0..n {
                circ.push(Gate::Rz(spec.target, thetas[l]))?;
                if !(l == n - 1 && drop == DropTerminal::DropLast) {
                    circ.push(cnot(l))?;
                }
            }
        }
        UcrVariant::Reversed => {
            for l in (0..n).rev() {
                if !(l == n - 1 && drop == DropTerminal::DropFirst) {
                    circ.push(cnot(l))?;
                }
                circ.push(Gate::Rz(spec.target, thetas[l]))?;
            }
        }
    }
    Ok(())
}

/// Standalone circuit over qubits `0..=max(target, controls)`.
pub fn synthesize_ucrz<T: Real>(spec: &UcrzSpec<T>, variant: UcrVariant, drop: DropTerminal) -> Result<Circuit<T>> {
    let n = spec.controls.iter().copied().chain([spec.target]).max().unwrap_or(0) + 1;
    let mut c = Circuit::new(n);
    emit_ucrz(&mut c, spec, variant, drop)?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_to_unitary, gate_matrix};
    use crate::numerics::{self, max_abs_diff, CMatrix};
    use crate::scalar::cis;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rand_alphas(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
        (0..1 << k).map(|_| rng.random_range(-PI..PI)).collect()
    }

    // D ⊕ D^dagger built straight from the definition.
    fn oracle(alphas: &[f64]) -> CMatrix<f64> {
        let d: Vec<_> = alphas.iter().map(|a| cis(-a / 2.0)).collect();
        let dd: Vec<_> = d.iter().map(|z| z.conj()).collect();
        numerics::direct_sum(&numerics::diag(&d), &numerics::diag(&dd))
    }

    fn spec(alphas: Vec<f64>) -> UcrzSpec<f64> {
        let k = alphas.len().trailing_zeros() as usize;
        UcrzSpec::new(0, (1..=k).collect(), alphas).unwrap()
    }

    #[test]
    fn alphas_examples() {
        let one = Complex::new(1.0, 0.0);
        assert_eq!(alphas_from_diagonal(&[one, one], 1e-10).unwrap(), vec![0.0, 0.0]);
        let a = alphas_from_diagonal(&[cis(-PI / 4.0), cis(PI / 4.0)], 1e-10).unwrap();
        assert!((a[0] - PI / 2.0).abs() < 1e-15 && (a[1] + PI / 2.0).abs() < 1e-15);
        assert!(alphas_from_diagonal(&[Complex::new(0.5, 0.0)], 1e-10).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d: Vec<_> = (0..16).map(|_| cis(rng.random_range(-PI..PI))).collect();
        let a = alphas_from_diagonal(&d, 1e-10).unwrap();
        for (z, a) in d.iter().zip(&a) {
            assert!((cis(-a / 2.0) - z).norm() < 1e-12);
        }
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(gray_schedule(1).unwrap().controls_seq, vec![1, 1]);
        assert_eq!(gray_schedule(2).unwrap().controls_seq, vec![2, 1, 2, 1]);
        assert_eq!(gray_schedule(3).unwrap().controls_seq, vec![3, 2, 3, 1, 3, 2, 3, 1]);
        assert!(matches!(gray_schedule(0), Err(Error::Resource(_))));
        assert!(matches!(gray_schedule(17), Err(Error::Resource(_))));
    }

    #[test]
    fn schedule_parity() {
        for k in 1..=10 {
            let s = gray_schedule(k).unwrap().controls_seq;
            assert_eq!(s.len(), 1 << k);
            for p in 1..=k {
                assert_eq!(s.iter().filter(|x| **x == p).count() % 2, 0);
            }
            assert_eq!(s.iter().filter(|x| **x == 1).count(), 2);
            assert_eq!(*s.last().unwrap(), 1);
        }
    }

    #[test]
    fn mk_matrix_properties() {
        assert_eq!(mk_matrix(1).unwrap(), DMatrix::from_row_slice(2, 2, &[1, 1, 1, -1]));
        for k in 1..=6 {
            let m = mk_matrix(k).unwrap();
            assert!(m.iter().all(|x| *x == 1 || *x == -1));
            let n = 1 << k;
            assert_eq!(&m * m.transpose(), DMatrix::identity(n, n) * n as i32);
        }
        assert!(mk_matrix(13).is_err());
    }

    #[test]
    fn thetas_examples() {
        assert_eq!(solve_thetas(&[0.0; 8]).unwrap(), vec![0.0; 8]);
        let t = solve_thetas(&[PI / 2.0, -PI / 2.0]).unwrap();
        assert!(t[0].abs() < 1e-15 && (t[1] - PI / 2.0).abs() < 1e-15);
        assert!(solve_thetas(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn thetas_match_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in 1..=8 {
            let a = rand_alphas(&mut rng, k);
            let t = solve_thetas(&a).unwrap();
            let m = mk_matrix(k).unwrap().map(|x| x as f64);
            let mt = &m * nalgebra::DVector::from_vec(t);
            let res = mt.iter().zip(&a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(res <= 1e-10, "k={k} residual {res}");
        }
    }

    #[test]
    fn keep_realizes_block_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 1..=5 {
            for _ in 0..50 {
                let a = rand_alphas(&mut rng, k);
                let c = synthesize_ucrz(&spec(a.clone()), UcrVariant::Standard, DropTerminal::Keep).unwrap();
                assert!(max_abs_diff(&circuit_to_unitary(&c).unwrap(), &oracle(&a)) < 1e-10);
                assert_eq!(c.cnot_count().unwrap(), 1 << k);
                assert_eq!(c.one_qubit_count().unwrap(), 1 << k);
            }
        }
    }

    #[test]
    fn zero_angles_give_identity() {
        let c = synthesize_ucrz(&spec(vec![0.0; 4]), UcrVariant::Standard, DropTerminal::Keep).unwrap();
        assert!(max_abs_diff(&circuit_to_unitary(&c).unwrap(), &numerics::identity(8)) < 1e-12);
    }

    #[test]
    fn reversed_equals_standard() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for k in 1..=4 {
            for _ in 0..10 {
                let s = spec(rand_alphas(&mut rng, k));
                let a = circuit_to_unitary(&synthesize_ucrz(&s, UcrVariant::Standard, DropTerminal::Keep).unwrap()).unwrap();
                let b = circuit_to_unitary(&synthesize_ucrz(&s, UcrVariant::Reversed, DropTerminal::Keep).unwrap()).unwrap();
                assert!(max_abs_diff(&a, &b) < 1e-12);
            }
        }
    }

    #[test]
    fn dropped_variants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 1..=4 {
            let a = rand_alphas(&mut rng, k);
            let s = spec(a.clone());
            let term = gate_matrix(&Gate::Cnot { control: 1, target: 0 }, k + 1).unwrap();
            let last = synthesize_ucrz(&s, UcrVariant::Standard, DropTerminal::DropLast).unwrap();
            let first = synthesize_ucrz(&s, UcrVariant::Reversed, DropTerminal::DropFirst).unwrap();
            assert_eq!(last.cnot_count().unwrap(), (1 << k) - 1);
            assert_eq!(first.cnot_count().unwrap(), (1 << k) - 1);
            // time order: DropLast is "D⊕D† then undo the terminal CNOT"
            let ul = circuit_to_unitary(&last).unwrap();
            assert!(max_abs_diff(&ul, &(&term * oracle(&a))) < 1e-10);
            let uf = circuit_to_unitary(&first).unwrap();
            assert!(max_abs_diff(&uf, &(oracle(&a) * &term)) < 1e-10);
        }
    }

    #[test]
    fn bad_variant_combination() {
        let s = spec(vec![0.1, 0.2]);
        assert!(matches!(
            synthesize_ucrz(&s, UcrVariant::Standard, DropTerminal::DropFirst),
            Err(Error::Precondition(_))
        ));
        assert!(synthesize_ucrz(&s, UcrVariant::Reversed, DropTerminal::DropLast).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(UcrzSpec::new(0, vec![], vec![0.0]).is_err());
        assert!(UcrzSpec::new(0, vec![1], vec![0.0]).is_err());
        assert!(UcrzSpec::new(0, vec![0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn non_contiguous_qubits() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = rand_alphas(&mut rng, 2);
        let s = UcrzSpec::new(2, vec![0, 3], a.clone()).unwrap();
        let c = synthesize_ucrz(&s, UcrVariant::Standard, DropTerminal::Keep).unwrap();
        let g = Gate::UcrzFirst { qubits: vec![2, 0, 3], alphas: a };
        assert!(max_abs_diff(&circuit_to_unitary(&c).unwrap(), &gate_matrix(&g, 4).unwrap()) < 1e-10);
    }
}
