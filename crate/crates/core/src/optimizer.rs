//! Optimization levels, CNOT-count formulas, the central CZ merge and the
//! lowering passes that turn synthesis IR into elementary gates.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_rational::Ratio;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::numerics::{self, CMatrix, Tolerances};
use crate::scalar::Real;
use crate::smallgate::{emit_zyz, kak2_up_to_diagonal, kak3, zyz, TwoQubitSynth};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OptLevel {
    /// Recurse down to one-qubit leaves, no optimizations.
    L0,
    /// Two-qubit leaves through the 3-CNOT template.
    L1,
    /// L1 plus the central CZ merge.
    L2,
    /// L2 plus diagonal migration between two-qubit leaves.
    L3,
}

impl OptLevel {
    pub const ALL: [OptLevel; 4] = [OptLevel::L0, OptLevel::L1, OptLevel::L2, OptLevel::L3];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Option<Self> {
        Self::ALL.get(i as usize).copied()
    }
}

impl fmt::Display for OptLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.index())
    }
}

impl FromStr for OptLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s.strip_prefix(['L', 'l']).unwrap_or(s);
        digits
            .parse::<u8>()
            .ok()
            .and_then(Self::from_index)
            .ok_or_else(|| Error::Parse(format!("unknown optimization level {s:?}")))
    }
}

// ---- counts ----

pub const MAX_COUNT_QUBITS: u32 = 31;

fn pow(base: i128, e: u32) -> Ratio<i128> {
    Ratio::from_integer(base.pow(e))
}

fn r(num: i128, den: i128) -> Ratio<i128> {
    Ratio::new(num, den)
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 || n > MAX_COUNT_QUBITS {
        return Err(Error::Resource(format!("qubit count {n} out of range 1..={MAX_COUNT_QUBITS}")));
    }
    Ok(())
}

/// Closed-form CNOT count as an exact rational.
pub fn expected_count_exact(n: u32, level: OptLevel) -> Result<Ratio<i128>> {
    check_n(n)?;
    if n == 1 {
        return Ok(Ratio::from_integer(0));
    }
    let f4 = pow(4, n);
    let f2 = pow(2, n);
    let l1 = r(9, 16) * f4 - r(3, 2) * f2;
    Ok(match level {
        OptLevel::L0 => r(3, 4) * f4 - r(3, 2) * f2,
        OptLevel::L1 => l1,
        OptLevel::L2 => l1 - r(2, 3) * (pow(4, n - 2) - r(1, 1)),
        OptLevel::L3 => r(22, 48) * f4 - r(3, 2) * f2 + r(5, 3),
    })
}

pub fn expected_count(n: u32, level: OptLevel) -> Result<u64> {
    let v = expected_count_exact(n, level)?;
    if !v.is_integer() || v < Ratio::from_integer(0) {
        return Err(Error::Precondition(format!("count formula gave non-integer {v} at n={n}")));
    }
    Ok(v.to_integer() as u64)
}

/// `ceil((4^n - 3n - 1) / 4)`.
pub fn lower_bound(n: u32) -> Result<u64> {
    check_n(n)?;
    let v = (pow(4, n) - Ratio::from_integer(3 * n as i128 + 1)) / Ratio::from_integer(4);
    Ok(v.ceil().to_integer() as u64)
}

/// Optimized quantum Shannon decomposition, `(23/48)4^n - (3/2)2^n + 4/3`.
pub fn qsd_reference(n: u32) -> Result<u64> {
    check_n(n)?;
    if n == 1 {
        return Ok(0);
    }
    let v = r(23, 48) * pow(4, n) - r(3, 2) * pow(2, n) + r(4, 3);
    Ok(v.to_integer() as u64)
}

// ---- central merge ----

/// The multiplexor pair that replaces `V_C`, `I ⊕ B`, `W_A` and the two CZs.
#[derive(Clone, Debug)]
pub struct CentralMerge<T: Real> {
    pub b1: CMatrix<T>,
    pub b2: CMatrix<T>,
}

/// `B1 = W_A V_C`, `B2 = (Z⊗I) W_A B V_C (Z⊗I)` with Z on the top qubit of the block.
pub fn merge_central<T: Real>(v_c: &CMatrix<T>, w_a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CentralMerge<T>> {
    let dim = v_c.nrows();
    if dim < 4 || [v_c, w_a, b].iter().any(|m| m.shape() != (dim, dim)) {
        return Err(Error::Precondition(format!(
            "central merge needs equal square blocks of dimension >= 4, got {:?}, {:?}, {:?}",
            v_c.shape(),
            w_a.shape(),
            b.shape()
        )));
    }
    numerics::qubit_count(v_c)?;
    let b1 = w_a * v_c;
    let b2 = z_top_conjugate(&(w_a * b * v_c));
    Ok(CentralMerge { b1, b2 })
}

/// `(Z⊗I) M (Z⊗I)`: flips the sign of the off-diagonal quarter blocks.
fn z_top_conjugate<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let h = m.nrows() / 2;
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| if (i < h) == (j < h) { m[(i, j)] } else { -m[(i, j)] })
}

// ---- lowering ----

fn append_synth<T: Real>(out: &mut Circuit<T>, s: &TwoQubitSynth<T>, qubits: &[usize]) -> Result<()> {
    out.append_mapped(&s.circuit, qubits)
}

fn lower_gate<T: Real>(out: &mut Circuit<T>, g: &Gate<T>, tol: &Tolerances) -> Result<()> {
    match g {
        Gate::Generic1q { qubit, matrix } => emit_zyz(out, *qubit, &zyz(matrix)?),
        Gate::GenericBlock { qubits, matrix } if qubits.len() == 2 => append_synth(out, &kak3(matrix, tol)?, qubits),
        Gate::GenericBlock { qubits, matrix } if qubits.len() == 1 => {
            emit_zyz(out, qubits[0], &zyz(matrix)?)
        }
        Gate::GlobalPhase(z) => {
            out.mul_global_phase(*z);
            Ok(())
        }
        g if g.kind().is_elementary() => out.push(g.clone()),
        g => Err(Error::Lowering(g.kind().name().to_string())),
    }
}

/// Elementary circuit for `ir`; L3 runs diagonal migration, the other levels
/// lower every leaf independently.
pub fn lower<T: Real>(ir: &Circuit<T>, level: OptLevel, tol: &Tolerances) -> Result<Circuit<T>> {
    if level == OptLevel::L3 && ir.num_qubits() >= 2 {
        return migrate_diagonals(ir, tol);
    }
    let mut out = Circuit::new(ir.num_qubits());
    out.set_global_phase(ir.global_phase());
    for g in ir.gates() {
        lower_gate(&mut out, g, tol)?;
    }
    Ok(out)
}

/// Whether `g` commutes with every diagonal acting on qubits `>= n - 2`.
pub fn commutes_with_bottom_diagonal<T: Real>(g: &Gate<T>, n: usize) -> bool {
    let low = |q: usize| q + 2 >= n;
    match g {
        Gate::Z(_) | Gate::Rz(..) | Gate::Cz(..) | Gate::Diagonal { .. } | Gate::UcrzFirst { .. } | Gate::GlobalPhase(_) => true,
        Gate::H(q) | Gate::Rx(q, _) | Gate::Ry(q, _) => !low(*q),
        Gate::Generic1q { qubit, .. } => !low(*qubit),
        Gate::Cnot { target, .. } => !low(*target),
        Gate::Multiplexor { qubits, .. } => !qubits[1..].iter().any(|q| low(*q)),
        Gate::GenericBlock { qubits, .. } => !qubits.iter().any(|q| low(*q)),
    }
}

/// Lowers an IR circuit whose two-qubit leaves all sit on the bottom two
/// qubits. Leaves are visited from last to first in time: each is synthesized
/// with two CNOTs up to a diagonal, and that diagonal is pushed back through
/// the intervening gates into the previous leaf. The earliest leaf takes the
/// accumulated diagonal and uses the 3-CNOT template.
pub fn migrate_diagonals<T: Real>(ir: &Circuit<T>, tol: &Tolerances) -> Result<Circuit<T>> {
    let n = ir.num_qubits();
    if n < 2 {
        return Err(Error::Precondition("diagonal migration needs at least two qubits".into()));
    }
    let bottom = [n - 2, n - 1];
    let first_leaf = ir
        .gates()
        .iter()
        .position(|g| matches!(g, Gate::GenericBlock { .. }));
    let mut pending: Option<Vec<Complex<T>>> = None;
    let mut segments: Vec<Circuit<T>> = Vec::new();
    let mut phase = ir.global_phase();
    for (idx, g) in ir.gates().iter().enumerate().rev() {
        let mut seg = Circuit::new(n);
        match g {
            Gate::GenericBlock { qubits, matrix } => {
                if qubits.as_slice() != bottom {
                    return Err(Error::Structural(format!(
                        "two-qubit leaf on {qubits:?}, expected the bottom pair {bottom:?}"
                    )));
                }
                let m = match pending.take() {
                    Some(d) => numerics::diag(&d) * matrix,
                    None => matrix.clone(),
                };
                let s = if Some(idx) == first_leaf {
                    kak3(&m, tol)?
                } else {
                    kak2_up_to_diagonal(&m, tol)?
                };
                pending = s.residual_diagonal.clone();
                append_synth(&mut seg, &s, &bottom)?;
            }
            other => {
                if pending.is_some() && !commutes_with_bottom_diagonal(other, n) {
                    return Err(Error::Structural(format!(
                        "{} gate on {:?} blocks diagonal migration",
                        other.kind().name(),
                        other.qubits()
                    )));
                }
                lower_gate(&mut seg, other, tol)?;
            }
        }
        phase *= seg.global_phase();
        segments.push(seg);
    }
    debug_assert!(pending.is_none());
    let mut out = Circuit::new(n);
    out.set_global_phase(phase);
    let mut gates = Vec::new();
    for seg in segments.into_iter().rev() {
        gates.extend(seg.into_gates());
    }
    for g in gates {
        out.push(g)?;
    }
    Ok(out)
}
