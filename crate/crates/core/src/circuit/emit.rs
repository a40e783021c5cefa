//! Text formats: circuit JSON (lossless) and an OpenQASM 3 subset.
//!
//! JSON gate payloads: `params` holds the angle for RX/RY/RZ, the angle list
//! for UCRZ_FIRST and `[re, im]` for GLOBAL_PHASE; `matrix` holds the row-major
//! entries of GENERIC_1Q/GENERIC_BLOCK/MULTIPLEXOR and the diagonal entries of
//! DIAGONAL.
//!
//! In QASM the internal RX/RY carry the opposite angle sign from the OpenQASM
//! `rx`/`ry` gates, so their angles are negated on the way out and back in.

use std::fmt::Write as _;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::numerics::CMatrix;
use crate::scalar::{arg, cis, Real};

#[derive(Serialize, Deserialize)]
struct CircuitDoc {
    n: usize,
    global_phase: [f64; 2],
    gates: Vec<GateDoc>,
}

#[derive(Serialize, Deserialize)]
struct GateDoc {
    kind: String,
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<[f64; 2]>>,
}

fn pair<T: Real>(z: Complex<T>) -> [f64; 2] {
    [z.re.as_f64(), z.im.as_f64()]
}

fn unpair<T: Real>(p: [f64; 2]) -> Complex<T> {
    Complex::new(T::lit(p[0]), T::lit(p[1]))
}

fn matrix_entries<T: Real>(m: &CMatrix<T>) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push(pair(m[(r, c)]));
        }
    }
    out
}

fn gate_doc<T: Real>(g: &Gate<T>) -> GateDoc {
    let (params, matrix) = match g {
        Gate::Rx(_, t) | Gate::Ry(_, t) | Gate::Rz(_, t) => (Some(vec![t.as_f64()]), None),
        Gate::UcrzFirst { alphas, .. } => (Some(alphas.iter().map(|a| a.as_f64()).collect()), None),
        Gate::GlobalPhase(z) => (Some(pair(*z).to_vec()), None),
        Gate::Generic1q { matrix, .. }
        | Gate::GenericBlock { matrix, .. }
        | Gate::Multiplexor { matrix, .. } => (None, Some(matrix_entries(matrix))),
        Gate::Diagonal { entries, .. } => (None, Some(entries.iter().map(|z| pair(*z)).collect())),
        Gate::H(_) | Gate::Z(_) | Gate::Cnot { .. } | Gate::Cz(..) => (None, None),
    };
    GateDoc {
        kind: g.kind().name().to_string(),
        qubits: g.qubits(),
        params,
        matrix,
    }
}

pub fn to_json<T: Real>(c: &Circuit<T>) -> String {
    let doc = CircuitDoc {
        n: c.num_qubits(),
        global_phase: pair(c.global_phase()),
        gates: c.gates().iter().map(gate_doc).collect(),
    };
    serde_json::to_string(&doc).expect("circuit JSON serialization cannot fail")
}

fn parse_gate<T: Real>(doc: GateDoc) -> Result<Gate<T>> {
    let kind = GateKind::from_name(&doc.kind)
        .ok_or_else(|| Error::Parse(format!("unknown gate kind {:?}", doc.kind)))?;
    let qs = doc.qubits;
    let arity = |k: usize| -> Result<()> {
        if qs.len() != k {
            return Err(Error::Parse(format!("{} expects {k} qubits, got {}", doc.kind, qs.len())));
        }
        Ok(())
    };
    let params = |len: Option<usize>| -> Result<Vec<f64>> {
        let p = doc
            .params
            .clone()
            .ok_or_else(|| Error::Parse(format!("{} needs params", doc.kind)))?;
        match len {
            Some(l) if p.len() != l => Err(Error::Parse(format!(
                "{} expects {l} params, got {}",
                doc.kind,
                p.len()
            ))),
            _ => Ok(p),
        }
    };
    let entries = || -> Result<Vec<Complex<T>>> {
        doc.matrix
            .as_ref()
            .map(|m| m.iter().map(|p| unpair(*p)).collect())
            .ok_or_else(|| Error::Parse(format!("{} needs a matrix", doc.kind)))
    };
    let square = || -> Result<CMatrix<T>> {
        let e = entries()?;
        let d = 1usize << qs.len();
        if e.len() != d * d {
            return Err(Error::Parse(format!(
                "{} on {} qubits needs {} matrix entries, got {}",
                doc.kind,
                qs.len(),
                d * d,
                e.len()
            )));
        }
        Ok(CMatrix::from_row_slice(d, d, &e))
    };
    let angle = |p: Vec<f64>| T::lit(p[0]);
    Ok(match kind {
        GateKind::H => {
            arity(1)?;
            Gate::H(qs[0])
        }
        GateKind::Z => {
            arity(1)?;
            Gate::Z(qs[0])
        }
        GateKind::Rx => {
            arity(1)?;
            Gate::Rx(qs[0], angle(params(Some(1))?))
        }
        GateKind::Ry => {
            arity(1)?;
            Gate::Ry(qs[0], angle(params(Some(1))?))
        }
        GateKind::Rz => {
            arity(1)?;
            Gate::Rz(qs[0], angle(params(Some(1))?))
        }
        GateKind::Cnot => {
            arity(2)?;
            Gate::Cnot { control: qs[0], target: qs[1] }
        }
        GateKind::Cz => {
            arity(2)?;
            Gate::Cz(qs[0], qs[1])
        }
        GateKind::Generic1q => {
            arity(1)?;
            Gate::Generic1q { qubit: qs[0], matrix: square()? }
        }
        GateKind::GenericBlock => Gate::GenericBlock { matrix: square()?, qubits: qs },
        GateKind::Multiplexor => Gate::Multiplexor { matrix: square()?, qubits: qs },
        GateKind::UcrzFirst => Gate::UcrzFirst {
            alphas: params(None)?.into_iter().map(T::lit).collect(),
            qubits: qs,
        },
        GateKind::Diagonal => Gate::Diagonal { entries: entries()?, qubits: qs },
        GateKind::GlobalPhase => {
            arity(0)?;
            let p = params(Some(2))?;
            Gate::GlobalPhase(unpair([p[0], p[1]]))
        }
    })
}

/// Parses circuit JSON and validates every gate.
pub fn from_json<T: Real>(text: &str) -> Result<Circuit<T>> {
    let doc: CircuitDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("circuit JSON: {e}")))?;
    if doc.n == 0 {
        return Err(Error::Parse("circuit JSON: n must be positive".into()));
    }
    let mut c = Circuit::new(doc.n);
    c.set_global_phase(unpair(doc.global_phase));
    for g in doc.gates {
        c.push(parse_gate(g)?)?;
    }
    c.validate(T::DEFAULT_TOL.max(1e-8))?;
    Ok(c)
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// OpenQASM 3 text; the circuit must be elementary.
pub fn to_qasm<T: Real>(c: &Circuit<T>) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "OPENQASM 3.0;");
    let _ = writeln!(s, "qubit[{}] q;", c.num_qubits());
    let phase_line = |s: &mut String, z: Complex<T>| {
        let _ = writeln!(s, "gphase({});", fmt_f(arg(z).as_f64()));
    };
    let one = Complex::new(T::one(), T::zero());
    if c.global_phase() != one {
        phase_line(&mut s, c.global_phase());
    }
    for g in c.gates() {
        let _ = match g {
            Gate::H(q) => writeln!(s, "h q[{q}];"),
            Gate::Z(q) => writeln!(s, "z q[{q}];"),
            Gate::Rx(q, t) => writeln!(s, "rx({}) q[{q}];", fmt_f(-t.as_f64())),
            Gate::Ry(q, t) => writeln!(s, "ry({}) q[{q}];", fmt_f(-t.as_f64())),
            Gate::Rz(q, t) => writeln!(s, "rz({}) q[{q}];", fmt_f(t.as_f64())),
            Gate::Cnot { control, target } => writeln!(s, "cx q[{control}], q[{target}];"),
            Gate::Cz(a, b) => writeln!(s, "cz q[{a}], q[{b}];"),
            Gate::GlobalPhase(z) => {
                phase_line(&mut s, *z);
                Ok(())
            }
            other => return Err(Error::Lowering(other.kind().name().to_string())),
        };
    }
    Ok(s)
}

fn parse_qubit(tok: &str, n: usize) -> Result<usize> {
    let tok = tok.trim();
    let inner = tok
        .strip_prefix("q[")
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("bad qubit operand {tok:?}")))?;
    let q: usize = inner
        .parse()
        .map_err(|_| Error::Parse(format!("bad qubit index {inner:?}")))?;
    if q >= n {
        return Err(Error::Parse(format!("qubit {q} outside register of {n}")));
    }
    Ok(q)
}

/// Reads back the subset written by [`to_qasm`]. `gphase` lines fold into the
/// circuit's global phase.
pub fn from_qasm<T: Real>(text: &str) -> Result<Circuit<T>> {
    let mut lines = text
        .lines()
        .map(|l| l.split("//").next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    if lines.next() != Some("OPENQASM 3.0;") {
        return Err(Error::Parse("missing OPENQASM 3.0 header".into()));
    }
    let decl = lines.next().ok_or_else(|| Error::Parse("missing qubit declaration".into()))?;
    let n: usize = decl
        .strip_prefix("qubit[")
        .and_then(|t| t.strip_suffix("] q;"))
        .and_then(|t| t.parse().ok())
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Parse(format!("bad qubit declaration {decl:?}")))?;
    let mut c = Circuit::new(n);
    for line in lines {
        let body = line
            .strip_suffix(';')
            .ok_or_else(|| Error::Parse(format!("missing ';' in {line:?}")))?;
        let (head, operands) = match body.find(')') {
            Some(i) => (&body[..=i], body[i + 1..].trim()),
            None => body.split_once(' ').unwrap_or((body, "")),
        };
        let (name, angle) = match head.split_once('(') {
            Some((name, rest)) => {
                let v: f64 = rest
                    .strip_suffix(')')
                    .and_then(|a| a.trim().parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad angle in {line:?}")))?;
                (name.trim(), Some(v))
            }
            None => (head.trim(), None),
        };
        let ops: Vec<usize> = if operands.is_empty() {
            Vec::new()
        } else {
            operands
                .split(',')
                .map(|t| parse_qubit(t, n))
                .collect::<Result<_>>()?
        };
        let want = |k: usize, with_angle: bool| -> Result<()> {
            if ops.len() != k || angle.is_some() != with_angle {
                return Err(Error::Parse(format!("malformed {name} line {line:?}")));
            }
            Ok(())
        };
        let t = || T::lit(angle.unwrap_or(0.0));
        let g = match name {
            "h" => {
                want(1, false)?;
                Gate::H(ops[0])
            }
            "z" => {
                want(1, false)?;
                Gate::Z(ops[0])
            }
            "rx" => {
                want(1, true)?;
                Gate::Rx(ops[0], -t())
            }
            "ry" => {
                want(1, true)?;
                Gate::Ry(ops[0], -t())
            }
            "rz" => {
                want(1, true)?;
                Gate::Rz(ops[0], t())
            }
            "cx" => {
                want(2, false)?;
                Gate::Cnot { control: ops[0], target: ops[1] }
            }
            "cz" => {
                want(2, false)?;
                Gate::Cz(ops[0], ops[1])
            }
            "gphase" => {
                want(0, true)?;
                c.mul_global_phase(cis(t()));
                continue;
            }
            other => return Err(Error::Parse(format!("unsupported QASM statement {other:?}"))),
        };
        c.push(g)?;
    }
    Ok(c)
}
