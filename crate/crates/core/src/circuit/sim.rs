//! Unitary reconstruction by applying gates column-wise with index arithmetic.

use num_complex::Complex;

use super::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::numerics::{self, CMatrix};
use crate::scalar::Real;

pub const DEFAULT_SIM_CAP: usize = 10;

/// `2^n x 2^n` embedding of `g` (identity on the other qubits).
pub fn gate_matrix<T: Real>(g: &Gate<T>, num_qubits: usize) -> Result<CMatrix<T>> {
    check_cap(num_qubits, DEFAULT_SIM_CAP)?;
    g.check_qubits(num_qubits)?;
    let mut m = numerics::identity(1 << num_qubits);
    apply_gate(&mut m, g, num_qubits)?;
    Ok(m)
}

pub fn circuit_to_unitary<T: Real>(c: &Circuit<T>) -> Result<CMatrix<T>> {
    circuit_to_unitary_capped(c, DEFAULT_SIM_CAP)
}

pub fn circuit_to_unitary_capped<T: Real>(c: &Circuit<T>, cap: usize) -> Result<CMatrix<T>> {
    let n = c.num_qubits();
    check_cap(n, cap)?;
    let mut m = numerics::identity(1 << n);
    for g in c.gates() {
        apply_gate(&mut m, g, n)?;
    }
    Ok(m * c.global_phase())
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::Resource(format!(
            "simulating {n} qubits exceeds the cap of {cap}"
        )));
    }
    Ok(())
}

/// Left-multiplies `m` (a `2^n`-row matrix) by the embedded gate in place.
pub fn apply_gate<T: Real>(m: &mut CMatrix<T>, g: &Gate<T>, num_qubits: usize) -> Result<()> {
    let dim = 1usize << num_qubits;
    if m.nrows() != dim {
        return Err(Error::Structural(format!(
            "state has {} rows, expected {dim}",
            m.nrows()
        )));
    }
    g.check_qubits(num_qubits)?;
    if let Gate::GlobalPhase(z) = g {
        *m *= *z;
        return Ok(());
    }
    let qs = g.qubits();
    let k = qs.len();
    let local = g.local_matrix();
    let ld = 1usize << k;
    if local.shape() != (ld, ld) {
        return Err(Error::Structural(format!(
            "{} matrix is {:?} for {k} qubits",
            g.kind().name(),
            local.shape()
        )));
    }

    // offsets[l]: row offset for local index l (first listed qubit is the top bit of l)
    let masks: Vec<usize> = qs.iter().map(|q| 1usize << (num_qubits - 1 - q)).collect();
    let offsets: Vec<usize> = (0..ld)
        .map(|l| {
            (0..k)
                .filter(|j| l >> (k - 1 - j) & 1 == 1)
                .map(|j| masks[j])
                .sum()
        })
        .collect();
    let all: usize = masks.iter().sum();
    let bases: Vec<usize> = (0..dim).filter(|b| b & all == 0).collect();

    let diagonal: Option<Vec<Complex<T>>> = match g {
        Gate::Z(_) | Gate::Rz(..) | Gate::Cz(..) | Gate::UcrzFirst { .. } | Gate::Diagonal { .. } => {
            Some((0..ld).map(|i| local[(i, i)]).collect())
        }
        _ => None,
    };

    let cols = m.ncols();
    let data = m.as_mut_slice();
    let mut buf = vec![Complex::new(T::zero(), T::zero()); ld];
    for col in 0..cols {
        let column = &mut data[col * dim..(col + 1) * dim];
        for &b in &bases {
            match &diagonal {
                Some(d) => {
                    for l in 0..ld {
                        column[b + offsets[l]] *= d[l];
                    }
                }
                None => {
                    for l in 0..ld {
                        buf[l] = column[b + offsets[l]];
                    }
                    for r in 0..ld {
                        let mut acc = Complex::new(T::zero(), T::zero());
                        for l in 0..ld {
                            acc += local[(r, l)] * buf[l];
                        }
                        column[b + offsets[r]] = acc;
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{haar_unitary, identity, kron, max_abs_diff, unitarity_residual};
    use crate::scalar::c;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn h() -> CMatrix<f64> {
        Gate::<f64>::H(0).local_matrix()
    }

    // Reference embedding built from explicit Kronecker products.
    fn kron_embed_1q(u: &CMatrix<f64>, q: usize, n: usize) -> CMatrix<f64> {
        (0..n).fold(identity(1), |acc, j| {
            kron(&acc, &if j == q { u.clone() } else { identity(2) })
        })
    }

    fn proj(bit: usize) -> CMatrix<f64> {
        let mut p = CMatrix::zeros(2, 2);
        p[(bit, bit)] = c(1., 0.);
        p
    }

    fn kron_cnot(ctrl: usize, targ: usize, n: usize) -> CMatrix<f64> {
        let x = numerics::from_rows(2, 2, &[(0., 0.), (1., 0.), (1., 0.), (0., 0.)]);
        let term = |on: bool| {
            (0..n).fold(identity(1), |acc, j| {
                let f = if j == ctrl {
                    proj(on as usize)
                } else if j == targ && on {
                    x.clone()
                } else {
                    identity(2)
                };
                kron(&acc, &f)
            })
        };
        term(false) + term(true)
    }

    #[test]
    fn rz_pi_example() {
        let m = gate_matrix(&Gate::Rz(0, std::f64::consts::PI), 1).unwrap();
        assert!(max_abs_diff(&m, &numerics::diag(&[c(0., -1.), c(0., 1.)])) < 1e-15);
    }

    #[test]
    fn cnot_matches_textbook() {
        let m = gate_matrix(&Gate::<f64>::Cnot { control: 0, target: 1 }, 2).unwrap();
        let e = numerics::from_rows(
            4,
            4,
            &[
                (1., 0.), (0., 0.), (0., 0.), (0., 0.),
                (0., 0.), (1., 0.), (0., 0.), (0., 0.),
                (0., 0.), (0., 0.), (0., 0.), (1., 0.),
                (0., 0.), (0., 0.), (1., 0.), (0., 0.),
            ],
        );
        assert_eq!(m, e);
    }

    #[test]
    fn h_on_second_qubit_is_kron() {
        let m = gate_matrix(&Gate::<f64>::H(1), 2).unwrap();
        assert!(max_abs_diff(&m, &kron(&identity(2), &h())) < 1e-15);
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::<f64>::new(2);
        assert_eq!(circuit_to_unitary(&c).unwrap(), identity(4));
    }

    #[test]
    fn bell_circuit_columns() {
        let mut c = Circuit::<f64>::new(2);
        c.push(Gate::H(0)).unwrap();
        c.push(Gate::Cnot { control: 0, target: 1 }).unwrap();
        let u = circuit_to_unitary(&c).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // |00> -> (|00>+|11>)/sqrt2, |01> -> (|01>+|10>)/sqrt2,
        // |10> -> (|00>-|11>)/sqrt2, |11> -> (|01>-|10>)/sqrt2
        let e = numerics::from_rows(
            4,
            4,
            &[
                (s, 0.), (0., 0.), (s, 0.), (0., 0.),
                (0., 0.), (s, 0.), (0., 0.), (s, 0.),
                (0., 0.), (s, 0.), (0., 0.), (-s, 0.),
                (s, 0.), (0., 0.), (-s, 0.), (0., 0.),
            ],
        );
        assert!(max_abs_diff(&u, &e) < 1e-15);
    }

    #[test]
    fn cz_is_symmetric() {
        for n in 2..5 {
            for a in 0..n {
                for b in 0..n {
                    if a != b {
                        let x = gate_matrix(&Gate::<f64>::Cz(a, b), n).unwrap();
                        let y = gate_matrix(&Gate::<f64>::Cz(b, a), n).unwrap();
                        assert_eq!(x, y);
                    }
                }
            }
        }
    }

    #[test]
    fn cnot_then_h_equals_h_then_cz() {
        let mut a = Circuit::<f64>::new(2);
        a.push(Gate::Cnot { control: 1, target: 0 }).unwrap();
        a.push(Gate::H(0)).unwrap();
        let mut b = Circuit::<f64>::new(2);
        b.push(Gate::H(0)).unwrap();
        b.push(Gate::Cz(0, 1)).unwrap();
        let d = max_abs_diff(&circuit_to_unitary(&a).unwrap(), &circuit_to_unitary(&b).unwrap());
        assert!(d < 1e-12);
    }

    #[test]
    fn embedding_matches_kron_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..5 {
            for q in 0..n {
                let u = haar_unitary::<f64, _>(2, &mut rng);
                let g = Gate::Generic1q { qubit: q, matrix: u.clone() };
                let d = max_abs_diff(&gate_matrix(&g, n).unwrap(), &kron_embed_1q(&u, q, n));
                assert!(d < 1e-14);
            }
            for a in 0..n {
                for b in 0..n {
                    if a != b {
                        let g = Gate::<f64>::Cnot { control: a, target: b };
                        assert_eq!(gate_matrix(&g, n).unwrap(), kron_cnot(a, b, n));
                    }
                }
            }
        }
    }

    #[test]
    fn block_on_reordered_qubits() {
        // A block on (2, 0) must equal SWAP-conjugated block on (0, 2).
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u = haar_unitary::<f64, _>(4, &mut rng);
        let g = Gate::GenericBlock { qubits: vec![2, 0], matrix: u.clone() };
        let m = gate_matrix(&g, 3).unwrap();
        for row in 0..8usize {
            for col in 0..8usize {
                let bit = |x: usize, q: usize| (x >> (2 - q)) & 1;
                let expect = if bit(row, 1) != bit(col, 1) {
                    c(0., 0.)
                } else {
                    u[(2 * bit(row, 2) + bit(row, 0), 2 * bit(col, 2) + bit(col, 0))]
                };
                assert!((m[(row, col)] - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn ucrz_first_is_block_diagonal_pair() {
        let alphas = vec![0.3, -1.2];
        let g = Gate::<f64>::UcrzFirst { qubits: vec![0, 1], alphas: alphas.clone() };
        let m = gate_matrix(&g, 2).unwrap();
        let d: Vec<_> = alphas.iter().map(|a| crate::scalar::cis(-a / 2.0)).collect();
        let e = numerics::diag(&[d[0], d[1], d[0].conj(), d[1].conj()]);
        assert!(max_abs_diff(&m, &e) < 1e-15);
    }

    #[test]
    fn cap_is_enforced() {
        let c = Circuit::<f64>::new(11);
        assert!(matches!(circuit_to_unitary(&c), Err(Error::Resource(_))));
        assert!(circuit_to_unitary_capped(&Circuit::<f64>::new(3), 2).is_err());
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate<f64>> {
        let q = 0..n;
        let pair = (0..n, 0..n).prop_filter("distinct", |(a, b)| a != b);
        prop_oneof![
            q.clone().prop_map(Gate::H),
            q.clone().prop_map(Gate::Z),
            (q.clone(), -10.0..10.0f64).prop_map(|(q, t)| Gate::Rx(q, t)),
            (q.clone(), -10.0..10.0f64).prop_map(|(q, t)| Gate::Ry(q, t)),
            (q, -10.0..10.0f64).prop_map(|(q, t)| Gate::Rz(q, t)),
            pair.clone().prop_map(|(a, b)| Gate::Cnot { control: a, target: b }),
            pair.prop_map(|(a, b)| Gate::Cz(a, b)),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn disjoint_gates_commute(t1 in -5.0..5.0f64, t2 in -5.0..5.0f64) {
            let g1 = Gate::Ry(0, t1);
            let g2 = Gate::Cnot { control: 2, target: 1 };
            let g3 = Gate::Rx(3, t2);
            for (a, b) in [(&g1, &g2), (&g2, &g3), (&g1, &g3)] {
                let x = gate_matrix(a, 4).unwrap();
                let y = gate_matrix(b, 4).unwrap();
                prop_assert!(max_abs_diff(&(&x * &y), &(&y * &x)) < 1e-12);
            }
        }

        #[test]
        fn random_circuits_are_unitary(gates in proptest::collection::vec(arb_gate(4), 0..200)) {
            let mut c = Circuit::new(4);
            for g in gates {
                c.push(g).unwrap();
            }
            let u = circuit_to_unitary(&c).unwrap();
            prop_assert!(unitarity_residual(&u) < 1e-9);
        }

        #[test]
        fn simulation_matches_product_of_embeddings(gates in proptest::collection::vec(arb_gate(3), 0..30)) {
            let mut c = Circuit::new(3);
            let mut expect = identity::<f64>(8);
            for g in gates {
                expect = gate_matrix(&g, 3).unwrap() * expect;
                c.push(g).unwrap();
            }
            prop_assert!(max_abs_diff(&circuit_to_unitary(&c).unwrap(), &expect) < 1e-12);
        }
    }

    #[test]
    fn deep_circuit_stays_unitary() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut c = Circuit::<f64>::new(3);
        for _ in 0..10_000 {
            let q = rng.random_range(0..3);
            let g = match rng.random_range(0..4) {
                0 => Gate::Rx(q, rng.random_range(-4.0..4.0)),
                1 => Gate::Ry(q, rng.random_range(-4.0..4.0)),
                2 => Gate::H(q),
                _ => Gate::Cnot { control: q, target: (q + 1) % 3 },
            };
            c.push(g).unwrap();
        }
        assert!(unitarity_residual(&circuit_to_unitary(&c).unwrap()) < 1e-9);
    }
}
