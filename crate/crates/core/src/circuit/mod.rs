//! Gate model and circuit container.
//!
//! Qubit 0 is the most significant bit of a basis index: for `n` qubits the
//! basis state `|q0 q1 ... q_{n-1}>` has index `sum_j q_j 2^{n-1-j}`. Gates are
//! stored in time order, so the circuit's matrix is
//! `global_phase * G_last * ... * G_first`.

mod emit;
mod sim;

pub use emit::{from_json, from_qasm, to_json, to_qasm};
pub use sim::{apply_gate, circuit_to_unitary, circuit_to_unitary_capped, gate_matrix, DEFAULT_SIM_CAP};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::{self, CMatrix};
use crate::scalar::{c, cis, modulus, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    Z,
    Rx,
    Ry,
    Rz,
    Cnot,
    Cz,
    Generic1q,
    GenericBlock,
    UcrzFirst,
    Multiplexor,
    Diagonal,
    GlobalPhase,
}

impl GateKind {
    pub const ALL: [GateKind; 13] = [
        GateKind::H,
        GateKind::Z,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Cnot,
        GateKind::Cz,
        GateKind::Generic1q,
        GateKind::GenericBlock,
        GateKind::UcrzFirst,
        GateKind::Multiplexor,
        GateKind::Diagonal,
        GateKind::GlobalPhase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::Z => "Z",
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Generic1q => "GENERIC_1Q",
            GateKind::GenericBlock => "GENERIC_BLOCK",
            GateKind::UcrzFirst => "UCRZ_FIRST",
            GateKind::Multiplexor => "MULTIPLEXOR",
            GateKind::Diagonal => "DIAGONAL",
            GateKind::GlobalPhase => "GLOBAL_PHASE",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Member of the elementary set `{H, Z, RX, RY, RZ, CNOT, CZ, GLOBAL_PHASE}`.
    pub fn is_elementary(self) -> bool {
        matches!(
            self,
            GateKind::H
                | GateKind::Z
                | GateKind::Rx
                | GateKind::Ry
                | GateKind::Rz
                | GateKind::Cnot
                | GateKind::Cz
                | GateKind::GlobalPhase
        )
    }
}

/// A gate acting on explicit qubits of a register.
///
/// Rotation conventions:
/// `RZ(t) = diag(e^{-it/2}, e^{it/2})`,
/// `RY(t) = [[cos t/2, sin t/2], [-sin t/2, cos t/2]]`,
/// `RX(t) = [[cos t/2, i sin t/2], [i sin t/2, cos t/2]]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate<T: Real> {
    H(usize),
    Z(usize),
    Rx(usize, T),
    Ry(usize, T),
    Rz(usize, T),
    Cnot { control: usize, target: usize },
    /// Symmetric in its two qubits.
    Cz(usize, usize),
    Generic1q { qubit: usize, matrix: CMatrix<T> },
    /// Arbitrary unitary on `qubits` (first listed = most significant).
    GenericBlock { qubits: Vec<usize>, matrix: CMatrix<T> },
    /// Uniformly controlled RZ with target `qubits[0]` and the remaining
    /// qubits as controls; realizes `D ⊕ D^dagger`, `D_j = e^{-i alpha_j / 2}`.
    UcrzFirst { qubits: Vec<usize>, alphas: Vec<T> },
    /// `U1 ⊕ U2` selected by `qubits[0]`; `matrix` is the full block-diagonal matrix.
    Multiplexor { qubits: Vec<usize>, matrix: CMatrix<T> },
    Diagonal { qubits: Vec<usize>, entries: Vec<Complex<T>> },
    GlobalPhase(Complex<T>),
}

impl<T: Real> Gate<T> {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::Z(_) => GateKind::Z,
            Gate::Rx(..) => GateKind::Rx,
            Gate::Ry(..) => GateKind::Ry,
            Gate::Rz(..) => GateKind::Rz,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Cz(..) => GateKind::Cz,
            Gate::Generic1q { .. } => GateKind::Generic1q,
            Gate::GenericBlock { .. } => GateKind::GenericBlock,
            Gate::UcrzFirst { .. } => GateKind::UcrzFirst,
            Gate::Multiplexor { .. } => GateKind::Multiplexor,
            Gate::Diagonal { .. } => GateKind::Diagonal,
            Gate::GlobalPhase(_) => GateKind::GlobalPhase,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::Z(q) | Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => vec![*q],
            Gate::Generic1q { qubit, .. } => vec![*qubit],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Cz(a, b) => vec![*a, *b],
            Gate::GenericBlock { qubits, .. }
            | Gate::UcrzFirst { qubits, .. }
            | Gate::Multiplexor { qubits, .. }
            | Gate::Diagonal { qubits, .. } => qubits.clone(),
            Gate::GlobalPhase(_) => Vec::new(),
        }
    }

    /// Counts toward the two-qubit (CNOT-equivalent) cost.
    pub fn is_entangling_elementary(&self) -> bool {
        matches!(self, Gate::Cnot { .. } | Gate::Cz(..))
    }

    /// Matrix over the gate's own qubits, first listed qubit most significant.
    pub fn local_matrix(&self) -> CMatrix<T> {
        let half = T::lit(0.5);
        match self {
            Gate::H(_) => {
                let s = T::one() / T::lit(2.0).sqrt();
                let v = Complex::from(s);
                CMatrix::from_row_slice(2, 2, &[v, v, v, -v])
            }
            Gate::Z(_) => numerics::diag(&[c(1., 0.), c(-1., 0.)]),
            Gate::Rz(_, t) => numerics::diag(&[cis(-*t * half), cis(*t * half)]),
            Gate::Ry(_, t) => {
                let (s, co) = ((*t * half).sin(), (*t * half).cos());
                CMatrix::from_row_slice(
                    2,
                    2,
                    &[Complex::from(co), Complex::from(s), Complex::from(-s), Complex::from(co)],
                )
            }
            Gate::Rx(_, t) => {
                let (s, co) = ((*t * half).sin(), (*t * half).cos());
                let is = Complex::new(T::zero(), s);
                CMatrix::from_row_slice(2, 2, &[Complex::from(co), is, is, Complex::from(co)])
            }
            Gate::Cnot { .. } => {
                let mut m = CMatrix::zeros(4, 4);
                let one = Complex::from(T::one());
                m[(0, 0)] = one;
                m[(1, 1)] = one;
                m[(2, 3)] = one;
                m[(3, 2)] = one;
                m
            }
            Gate::Cz(..) => numerics::diag(&[c(1., 0.), c(1., 0.), c(1., 0.), c(-1., 0.)]),
            Gate::Generic1q { matrix, .. }
            | Gate::GenericBlock { matrix, .. }
            | Gate::Multiplexor { matrix, .. } => matrix.clone(),
            Gate::UcrzFirst { alphas, .. } => {
                let d: Vec<Complex<T>> = alphas.iter().map(|a| cis(-*a * half)).collect();
                let dd: Vec<Complex<T>> = d.iter().map(|z| z.conj()).collect();
                numerics::diag(&[d, dd].concat())
            }
            Gate::Diagonal { entries, .. } => numerics::diag(entries),
            Gate::GlobalPhase(z) => CMatrix::from_element(1, 1, *z),
        }
    }

    /// Same gate with every qubit index passed through `map`.
    pub fn remap(&self, map: impl Fn(usize) -> usize) -> Gate<T> {
        let mapv = |qs: &[usize]| qs.iter().map(|q| map(*q)).collect::<Vec<_>>();
        match self {
            Gate::H(q) => Gate::H(map(*q)),
            Gate::Z(q) => Gate::Z(map(*q)),
            Gate::Rx(q, t) => Gate::Rx(map(*q), *t),
            Gate::Ry(q, t) => Gate::Ry(map(*q), *t),
            Gate::Rz(q, t) => Gate::Rz(map(*q), *t),
            Gate::Cnot { control, target } => Gate::Cnot {
                control: map(*control),
                target: map(*target),
            },
            Gate::Cz(a, b) => Gate::Cz(map(*a), map(*b)),
            Gate::Generic1q { qubit, matrix } => Gate::Generic1q {
                qubit: map(*qubit),
                matrix: matrix.clone(),
            },
            Gate::GenericBlock { qubits, matrix } => Gate::GenericBlock {
                qubits: mapv(qubits),
                matrix: matrix.clone(),
            },
            Gate::UcrzFirst { qubits, alphas } => Gate::UcrzFirst {
                qubits: mapv(qubits),
                alphas: alphas.clone(),
            },
            Gate::Multiplexor { qubits, matrix } => Gate::Multiplexor {
                qubits: mapv(qubits),
                matrix: matrix.clone(),
            },
            Gate::Diagonal { qubits, entries } => Gate::Diagonal {
                qubits: mapv(qubits),
                entries: entries.clone(),
            },
            Gate::GlobalPhase(z) => Gate::GlobalPhase(*z),
        }
    }

    /// Checks qubit indices against a register of `num_qubits`.
    pub fn check_qubits(&self, num_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for (i, q) in qs.iter().enumerate() {
            if *q >= num_qubits {
                return Err(Error::Structural(format!(
                    "{} gate uses qubit {q} outside a {num_qubits}-qubit register",
                    self.kind().name()
                )));
            }
            if qs[..i].contains(q) {
                return Err(Error::Structural(format!(
                    "{} gate repeats qubit {q}",
                    self.kind().name()
                )));
            }
        }
        Ok(())
    }

    /// Full well-formedness: qubits plus payload shape and unitarity.
    pub fn validate(&self, num_qubits: usize, unitarity_tol: f64) -> Result<()> {
        self.check_qubits(num_qubits)?;
        let name = self.kind().name();
        let k = self.qubits().len();
        let expect_dim = 1usize << k;
        match self {
            Gate::Generic1q { matrix, .. }
            | Gate::GenericBlock { matrix, .. }
            | Gate::Multiplexor { matrix, .. } => {
                if matrix.shape() != (expect_dim, expect_dim) {
                    return Err(Error::Structural(format!(
                        "{name} matrix is {:?}, expected {expect_dim}x{expect_dim}",
                        matrix.shape()
                    )));
                }
                numerics::check_unitary(matrix, unitarity_tol, name)?;
                if let Gate::Multiplexor { .. } = self {
                    if k < 1 {
                        return Err(Error::Structural("MULTIPLEXOR needs a control qubit".into()));
                    }
                    let h = expect_dim / 2;
                    let off = numerics::max_abs(&matrix.view((0, h), (h, h)).into_owned())
                        .max(numerics::max_abs(&matrix.view((h, 0), (h, h)).into_owned()));
                    if off > unitarity_tol {
                        return Err(Error::Structural("MULTIPLEXOR matrix is not block diagonal".into()));
                    }
                }
            }
            Gate::UcrzFirst { alphas, .. } => {
                if k < 2 || alphas.len() != expect_dim / 2 {
                    return Err(Error::Structural(format!(
                        "UCRZ_FIRST on {k} qubits needs {} angles, got {}",
                        expect_dim / 2,
                        alphas.len()
                    )));
                }
            }
            Gate::Diagonal { entries, .. } => {
                if entries.len() != expect_dim {
                    return Err(Error::Structural(format!(
                        "DIAGONAL on {k} qubits needs {expect_dim} entries, got {}",
                        entries.len()
                    )));
                }
                check_unit_modulus(entries, unitarity_tol, name)?;
            }
            Gate::GlobalPhase(z) => check_unit_modulus(&[*z], unitarity_tol, name)?,
            _ => {}
        }
        Ok(())
    }
}

fn check_unit_modulus<T: Real>(entries: &[Complex<T>], tol: f64, what: &str) -> Result<()> {
    for z in entries {
        let r = modulus(*z).as_f64();
        if (r - 1.0).abs() > tol {
            return Err(Error::Precondition(format!("{what} entry has modulus {r}")));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoweringLevel {
    /// Pseudo-gates (generic blocks, multiplexors, diagonals) allowed.
    Ir,
    /// Only `H, Z, RX, RY, RZ, CNOT, CZ, GLOBAL_PHASE`.
    Elementary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit<T: Real> {
    num_qubits: usize,
    gates: Vec<Gate<T>>,
    global_phase: Complex<T>,
}

impl<T: Real> Circuit<T> {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            gates: Vec::new(),
            global_phase: Complex::new(T::one(), T::zero()),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate<T>] {
        &self.gates
    }

    pub fn into_gates(self) -> Vec<Gate<T>> {
        self.gates
    }

    pub fn global_phase(&self) -> Complex<T> {
        self.global_phase
    }

    pub fn set_global_phase(&mut self, phase: Complex<T>) {
        self.global_phase = phase;
    }

    pub fn mul_global_phase(&mut self, phase: Complex<T>) {
        self.global_phase *= phase;
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate<T>) -> Result<()> {
        gate.check_qubits(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends `other` with its qubit `j` placed on `map[j]`, folding in its phase.
    pub fn append_mapped(&mut self, other: &Circuit<T>, map: &[usize]) -> Result<()> {
        if map.len() < other.num_qubits {
            return Err(Error::Structural(format!(
                "qubit map has {} entries for a {}-qubit circuit",
                map.len(),
                other.num_qubits
            )));
        }
        for g in &other.gates {
            self.push(g.remap(|q| map[q]))?;
        }
        self.global_phase *= other.global_phase;
        Ok(())
    }

    pub fn level(&self) -> LoweringLevel {
        if self.gates.iter().all(|g| g.kind().is_elementary()) {
            LoweringLevel::Elementary
        } else {
            LoweringLevel::Ir
        }
    }

    /// Validates every gate and the global phase.
    pub fn validate(&self, unitarity_tol: f64) -> Result<()> {
        if self.num_qubits == 0 {
            return Err(Error::Structural("circuit must have at least one qubit".into()));
        }
        check_unit_modulus(&[self.global_phase], unitarity_tol, "global phase")?;
        self.gates
            .iter()
            .try_for_each(|g| g.validate(self.num_qubits, unitarity_tol))
    }

    fn require_elementary(&self) -> Result<()> {
        match self.gates.iter().find(|g| !g.kind().is_elementary()) {
            Some(g) => Err(Error::Precondition(format!(
                "expected an elementary circuit, found {}",
                g.kind().name()
            ))),
            None => Ok(()),
        }
    }

    /// CNOT plus CZ gates; the circuit must be elementary.
    pub fn cnot_count(&self) -> Result<usize> {
        self.require_elementary()?;
        Ok(self.gates.iter().filter(|g| g.is_entangling_elementary()).count())
    }

    /// Single-qubit elementary gates (global phase excluded).
    pub fn one_qubit_count(&self) -> Result<usize> {
        self.require_elementary()?;
        Ok(self
            .gates
            .iter()
            .filter(|g| matches!(g.kind(), GateKind::H | GateKind::Z | GateKind::Rx | GateKind::Ry | GateKind::Rz))
            .count())
    }
}

/// Phase-invariant distance `sqrt(1 - |tr(U^dagger V)| / d)`.
///
/// Evaluated as `||U - e^{i phi} V||_F / sqrt(2d)` with `e^{i phi}` the phase of
/// `tr(V^dagger U)`, which is the same quantity for unitary inputs but does not
/// lose half the significant digits to cancellation near zero.
pub fn distance_up_to_phase<T: Real>(u: &CMatrix<T>, v: &CMatrix<T>) -> Result<f64> {
    if u.shape() != v.shape() || !u.is_square() {
        return Err(Error::Structural(format!(
            "distance needs equal square shapes, got {:?} and {:?}",
            u.shape(),
            v.shape()
        )));
    }
    numerics::qubit_count(u)?;
    let d = u.nrows();
    let mut tr = Complex::new(0.0f64, 0.0);
    for (a, b) in v.iter().zip(u.iter()) {
        let z = a.conj() * *b;
        tr += Complex::new(z.re.as_f64(), z.im.as_f64());
    }
    let phase = if tr.norm() > 0.0 { tr / tr.norm() } else { Complex::new(1.0, 0.0) };
    let mut sq = 0.0f64;
    for (a, b) in u.iter().zip(v.iter()) {
        let a = Complex::new(a.re.as_f64(), a.im.as_f64());
        let b = Complex::new(b.re.as_f64(), b.im.as_f64());
        sq += (a - phase * b).norm_sqr();
    }
    Ok((sq / (2.0 * d as f64)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{haar_unitary, identity, kron, max_abs_diff};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kind_names_round_trip() {
        for k in GateKind::ALL {
            assert_eq!(GateKind::from_name(k.name()), Some(k));
        }
        assert_eq!(GateKind::from_name("SWAP"), None);
    }

    #[test]
    fn push_rejects_bad_qubits() {
        let mut c = Circuit::<f64>::new(2);
        assert!(c.push(Gate::H(2)).is_err());
        assert!(c.push(Gate::Cnot { control: 1, target: 1 }).is_err());
        assert!(c.push(Gate::Cz(0, 1)).is_ok());
    }

    #[test]
    fn cnot_count_rules() {
        let mut c = Circuit::<f64>::new(2);
        c.push(Gate::Rz(0, 0.1)).unwrap();
        c.push(Gate::H(1)).unwrap();
        assert_eq!(c.cnot_count().unwrap(), 0);
        c.push(Gate::Cnot { control: 0, target: 1 }).unwrap();
        c.push(Gate::Cz(1, 0)).unwrap();
        assert_eq!(c.cnot_count().unwrap(), 2);
        assert_eq!(c.one_qubit_count().unwrap(), 2);
        c.push(Gate::GenericBlock {
            qubits: vec![0, 1],
            matrix: identity(4),
        })
        .unwrap();
        assert_eq!(c.level(), LoweringLevel::Ir);
        assert!(matches!(c.cnot_count(), Err(Error::Precondition(_))));
    }

    #[test]
    fn validate_catches_payload_errors() {
        let bad = Gate::<f64>::Generic1q {
            qubit: 0,
            matrix: numerics::diag(&[c(2., 0.), c(1., 0.)]),
        };
        assert!(bad.validate(1, 1e-10).is_err());
        let short = Gate::<f64>::UcrzFirst {
            qubits: vec![0, 1],
            alphas: vec![0.1],
        };
        assert!(short.validate(2, 1e-10).is_err());
        let mux = Gate::<f64>::Multiplexor {
            qubits: vec![0, 1],
            matrix: kron(&Gate::H(0).local_matrix(), &identity(2)),
        };
        assert!(mux.validate(2, 1e-10).is_err());
    }

    #[test]
    fn distance_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary::<f64, _>(4, &mut rng);
        assert!(distance_up_to_phase(&u, &u).unwrap() < 1e-15);
        let v = &u * cis(1.234);
        assert!(distance_up_to_phase(&u, &v).unwrap() < 1e-15);
        let z = Gate::<f64>::Z(0).local_matrix();
        let d = distance_up_to_phase(&identity(2), &z).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        assert!(distance_up_to_phase(&identity::<f64>(2), &identity(4)).is_err());
    }

    #[test]
    fn distance_matches_trace_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let u = haar_unitary::<f64, _>(8, &mut rng);
            let v = haar_unitary::<f64, _>(8, &mut rng);
            let tr = (u.adjoint() * &v).trace().norm();
            let direct = (1.0 - tr / 8.0).sqrt();
            let d = distance_up_to_phase(&u, &v).unwrap();
            assert!((d - direct).abs() < 1e-12);
            assert!((distance_up_to_phase(&v, &u).unwrap() - d).abs() < 1e-12);
        }
    }

    #[test]
    fn local_matrices_are_unitary() {
        let gates: Vec<Gate<f64>> = vec![
            Gate::H(0),
            Gate::Z(0),
            Gate::Rx(0, 0.3),
            Gate::Ry(0, -1.1),
            Gate::Rz(0, 2.2),
            Gate::Cnot { control: 0, target: 1 },
            Gate::Cz(0, 1),
            Gate::UcrzFirst {
                qubits: vec![0, 1],
                alphas: vec![0.2, 0.9],
            },
        ];
        for g in gates {
            assert!(numerics::unitarity_residual(&g.local_matrix()) < 1e-15, "{:?}", g.kind());
        }
        let rz = Gate::<f64>::Rz(0, std::f64::consts::PI).local_matrix();
        assert!(max_abs_diff(&rz, &numerics::diag(&[c(0., -1.), c(0., 1.)])) < 1e-15);
    }
}
