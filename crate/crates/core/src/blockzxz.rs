//! Block-ZXZ factorization, demultiplexing and the recursive synthesis driver.
//!
//! A node factors `U = (A1 ⊕ A2)(H⊗I)(I ⊕ B)(H⊗I)(I ⊕ C)` with
//! `A1 = (S_X + i S_Y) U_X`, `C = (i U_Y^dagger U_X)^dagger`,
//! `A2 = U21 + U22 C^dagger` and `B = 2 A1^dagger X - I`, where
//! `X = S_X U_X` and `Y = S_Y U_Y` are polar decompositions of the top blocks.
//! Each multiplexor is then demultiplexed into two half-size unitaries around a
//! uniformly controlled RZ on the node's top qubit.

use num_complex::Complex;

use crate::circuit::{circuit_to_unitary, Circuit, Gate};
use crate::error::{Error, Result};
use crate::numerics::{self, CMatrix, Tolerances};
use crate::optimizer::{self, merge_central, OptLevel};
use crate::scalar::Real;
use crate::ucr::{alphas_from_diagonal, emit_ucrz, DropTerminal, UcrVariant, UcrzSpec};

/// Quarters of `U = [[X, Y], [U21, U22]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSplit<T: Real> {
    pub x: CMatrix<T>,
    pub y: CMatrix<T>,
    pub u21: CMatrix<T>,
    pub u22: CMatrix<T>,
}

impl<T: Real> BlockSplit<T> {
    pub fn reassemble(&self) -> CMatrix<T> {
        let h = self.x.nrows();
        let mut m = CMatrix::zeros(2 * h, 2 * h);
        m.view_mut((0, 0), (h, h)).copy_from(&self.x);
        m.view_mut((0, h), (h, h)).copy_from(&self.y);
        m.view_mut((h, 0), (h, h)).copy_from(&self.u21);
        m.view_mut((h, h), (h, h)).copy_from(&self.u22);
        m
    }
}

pub fn split_blocks<T: Real>(u: &CMatrix<T>) -> Result<BlockSplit<T>> {
    let n = numerics::qubit_count(u)?;
    if n < 2 {
        return Err(Error::Precondition("block split needs dimension >= 4".into()));
    }
    let h = u.nrows() / 2;
    let q = |r, c| u.view((r, c), (h, h)).into_owned();
    Ok(BlockSplit { x: q(0, 0), y: q(0, h), u21: q(h, 0), u22: q(h, h) })
}

#[derive(Clone, Debug)]
pub struct BlockZxzFactors<T: Real> {
    pub a1: CMatrix<T>,
    pub a2: CMatrix<T>,
    pub b: CMatrix<T>,
    pub c: CMatrix<T>,
    pub s_x: CMatrix<T>,
    pub u_x: CMatrix<T>,
    pub s_y: CMatrix<T>,
    pub u_y: CMatrix<T>,
    /// Max-norm residual of the node identity.
    pub residual: f64,
}

impl<T: Real> BlockZxzFactors<T> {
    pub fn product(&self) -> CMatrix<T> {
        zxz_product(&self.a1, &self.a2, &self.b, &self.c)
    }
}

fn hadamard_top<T: Real>(half: usize) -> CMatrix<T> {
    numerics::kron(&Gate::H(0).local_matrix(), &numerics::identity(half))
}

/// `(A1 ⊕ A2)(H⊗I)(I ⊕ B)(H⊗I)(I ⊕ C)`.
pub fn zxz_product<T: Real>(a1: &CMatrix<T>, a2: &CMatrix<T>, b: &CMatrix<T>, c: &CMatrix<T>) -> CMatrix<T> {
    let h = a1.nrows();
    let id = numerics::identity(h);
    let hh = hadamard_top::<T>(h);
    numerics::direct_sum(a1, a2) * &hh * numerics::direct_sum(&id, b) * &hh * numerics::direct_sum(&id, c)
}

pub fn compute_zxz_factors<T: Real>(u: &CMatrix<T>, tol: &Tolerances) -> Result<BlockZxzFactors<T>> {
    numerics::check_unitary(u, tol.unitarity, "block-ZXZ input")?;
    let sp = split_blocks(u)?;
    let px = numerics::polar(&sp.x, tol)?;
    let py = numerics::polar(&sp.y, tol)?;
    let i = Complex::new(T::zero(), T::one());
    let id = numerics::identity::<T>(sp.x.nrows());
    let a1 = (&px.s + &py.s * i) * &px.uf;
    let c_dag = py.uf.adjoint() * &px.uf * i;
    let a2 = &sp.u21 + &sp.u22 * &c_dag;
    let b = a1.adjoint() * &sp.x * Complex::from(T::lit(2.0)) - id;
    let c = c_dag.adjoint();
    let mut f = BlockZxzFactors {
        a1,
        a2,
        b,
        c,
        s_x: px.s,
        u_x: px.uf,
        s_y: py.s,
        u_y: py.uf,
        residual: 0.0,
    };
    f.residual = numerics::max_abs_diff(&f.product(), u);
    let worst_unitarity = [&f.a1, &f.a2, &f.b, &f.c]
        .iter()
        .map(|m| numerics::unitarity_residual(m))
        .fold(0.0, f64::max);
    if f.residual > tol.node || worst_unitarity > tol.node {
        return Err(Error::Synthesis {
            node: format!("{}-qubit block", numerics::qubit_count(u)?),
            what: "block-ZXZ reconstruction",
            residual: f.residual.max(worst_unitarity),
        });
    }
    Ok(f)
}

/// `U1 = V diag(d) W`, `U2 = V diag(conj d) W`.
#[derive(Clone, Debug)]
pub struct DemuxFactors<T: Real> {
    pub v: CMatrix<T>,
    pub w: CMatrix<T>,
    pub d: Vec<Complex<T>>,
}

impl<T: Real> DemuxFactors<T> {
    pub fn reconstruct(&self) -> (CMatrix<T>, CMatrix<T>) {
        let dc: Vec<Complex<T>> = self.d.iter().map(|z| z.conj()).collect();
        (
            &self.v * numerics::diag(&self.d) * &self.w,
            &self.v * numerics::diag(&dc) * &self.w,
        )
    }
}

pub fn demultiplex<T: Real>(u1: &CMatrix<T>, u2: &CMatrix<T>, tol: &Tolerances) -> Result<DemuxFactors<T>> {
    if u1.shape() != u2.shape() {
        return Err(Error::Precondition(format!(
            "demultiplex needs equal shapes, got {:?} and {:?}",
            u1.shape(),
            u2.shape()
        )));
    }
    numerics::check_unitary(u1, tol.unitarity, "demultiplex U1")?;
    numerics::check_unitary(u2, tol.unitarity, "demultiplex U2")?;
    let eig = numerics::unitary_eig(&(u1 * u2.adjoint()), tol)?;
    let d = eig
        .lambda
        .iter()
        .map(|l| numerics::principal_sqrt_phase(*l, tol.node))
        .collect::<Result<Vec<_>>>()?;
    let w = numerics::diag(&d) * eig.v.adjoint() * u2;
    let f = DemuxFactors { v: eig.v, w, d };
    let (r1, r2) = f.reconstruct();
    let residual = numerics::max_abs_diff(&r1, u1).max(numerics::max_abs_diff(&r2, u2));
    if residual > tol.node {
        return Err(Error::Factorization { what: "demultiplexing", residual });
    }
    Ok(f)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthesisConfig {
    pub opt_level: OptLevel,
    pub tolerances: Tolerances,
    /// End-to-end distance bound used by verification and reports.
    pub verify_tol: f64,
    /// Re-simulate every node against its input; `None` enables it for n <= 6.
    pub verify_each_node: Option<bool>,
    pub seed: Option<u64>,
}

impl SynthesisConfig {
    pub fn new(opt_level: OptLevel) -> Self {
        Self::for_scalar::<f64>(opt_level)
    }

    pub fn for_scalar<T: Real>(opt_level: OptLevel) -> Self {
        SynthesisConfig {
            opt_level,
            tolerances: Tolerances::for_scalar::<T>(),
            verify_tol: T::DEFAULT_TOL * 100.0,
            verify_each_node: None,
            seed: None,
        }
    }

    fn node_checks(&self, n: usize) -> bool {
        self.verify_each_node.unwrap_or(n <= 6)
    }

    fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        if [t.unitarity, t.factor, t.node, self.verify_tol].iter().any(|x| !(*x > 0.0)) {
            return Err(Error::Precondition("tolerances must be positive".into()));
        }
        Ok(())
    }
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self::new(OptLevel::L3)
    }
}

/// One step of a node's time-ordered layout, in node-local qubits (0 = top).
enum NodeItem<T: Real> {
    /// Unitary on local qubits `1..m`, synthesized recursively.
    Child(CMatrix<T>),
    Gates(Vec<Gate<T>>),
}

fn ucrz_gates<T: Real>(
    m: usize,
    d: &[Complex<T>],
    variant: UcrVariant,
    drop: DropTerminal,
    tol: &Tolerances,
) -> Result<NodeItem<T>> {
    let spec = UcrzSpec::new(0, (1..m).collect(), alphas_from_diagonal(d, tol.node)?)?;
    let mut c = Circuit::new(m);
    emit_ucrz(&mut c, &spec, variant, drop)?;
    Ok(NodeItem::Gates(c.into_gates()))
}

/// Plain layout: three demultiplexed multiplexors, `V_C` merged into `W_B` and
/// `V_B` into `W_A`.
fn plan_basic<T: Real>(m: usize, f: &BlockZxzFactors<T>, tol: &Tolerances) -> Result<Vec<NodeItem<T>>> {
    let id = numerics::identity(f.c.nrows());
    let dc = demultiplex(&id, &f.c, tol)?;
    let db = demultiplex(&id, &f.b, tol)?;
    let da = demultiplex(&f.a1, &f.a2, tol)?;
    let keep = |d: &[Complex<T>]| ucrz_gates(m, d, UcrVariant::Standard, DropTerminal::Keep, tol);
    Ok(vec![
        NodeItem::Child(dc.w.clone()),
        keep(&dc.d)?,
        NodeItem::Gates(vec![Gate::H(0)]),
        NodeItem::Child(&db.w * &dc.v),
        keep(&db.d)?,
        NodeItem::Child(&da.w * &db.v),
        NodeItem::Gates(vec![Gate::H(0)]),
        keep(&da.d)?,
        NodeItem::Child(da.v),
    ])
}

/// Layout with the two outer terminal CNOTs turned into CZs and absorbed into
/// a merged central multiplexor.
fn plan_merged<T: Real>(m: usize, f: &BlockZxzFactors<T>, tol: &Tolerances) -> Result<Vec<NodeItem<T>>> {
    let id = numerics::identity(f.c.nrows());
    let dc = demultiplex(&id, &f.c, tol)?;
    let da = demultiplex(&f.a1, &f.a2, tol)?;
    let mg = merge_central(&dc.v, &da.w, &f.b)?;
    let db = demultiplex(&mg.b1, &mg.b2, tol)?;
    Ok(vec![
        NodeItem::Child(dc.w.clone()),
        ucrz_gates(m, &dc.d, UcrVariant::Standard, DropTerminal::DropLast, tol)?,
        NodeItem::Gates(vec![Gate::H(0)]),
        NodeItem::Child(db.w),
        ucrz_gates(m, &db.d, UcrVariant::Standard, DropTerminal::Keep, tol)?,
        NodeItem::Child(db.v),
        NodeItem::Gates(vec![Gate::H(0)]),
        ucrz_gates(m, &da.d, UcrVariant::Reversed, DropTerminal::DropFirst, tol)?,
        NodeItem::Child(da.v),
    ])
}

fn leaf_gate<T: Real>(u: &CMatrix<T>, top: usize, m: usize) -> Gate<T> {
    if m == 1 {
        Gate::Generic1q { qubit: top, matrix: u.clone() }
    } else {
        Gate::GenericBlock { qubits: (top..top + m).collect(), matrix: u.clone() }
    }
}

struct Driver<'a> {
    cfg: &'a SynthesisConfig,
    check_nodes: bool,
}

impl Driver<'_> {
    fn block<T: Real>(&self, u: &CMatrix<T>, top: usize, out: &mut Circuit<T>, path: &str) -> Result<()> {
        let m = numerics::qubit_count(u)?;
        let level = self.cfg.opt_level;
        if m == 1 || (m == 2 && level != OptLevel::L0) {
            return out.push(leaf_gate(u, top, m));
        }
        let tol = &self.cfg.tolerances;
        let label = |e: Error| match e {
            Error::Factorization { what, residual } | Error::Synthesis { what, residual, .. } => {
                Error::Synthesis { node: path.to_string(), what, residual }
            }
            other => other,
        };
        let f = compute_zxz_factors(u, tol).map_err(label)?;
        let plan = if level >= OptLevel::L2 && m >= 3 {
            plan_merged(m, &f, tol)
        } else {
            plan_basic(m, &f, tol)
        }
        .map_err(label)?;
        if self.check_nodes {
            let mut local = Circuit::new(m);
            for item in &plan {
                match item {
                    NodeItem::Child(c) => local.push(leaf_gate(c, 1, m - 1))?,
                    NodeItem::Gates(gs) => gs.iter().try_for_each(|g| local.push(g.clone()))?,
                }
            }
            let residual = numerics::max_abs_diff(&circuit_to_unitary(&local)?, u);
            if residual > tol.node {
                return Err(Error::Synthesis { node: path.to_string(), what: "node layout", residual });
            }
        }
        let mut child = 0;
        for item in plan {
            match item {
                NodeItem::Child(c) => {
                    self.block(&c, top + 1, out, &format!("{path}.{child}"))?;
                    child += 1;
                }
                NodeItem::Gates(gs) => {
                    for g in gs {
                        out.push(g.remap(|q| q + top))?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Synthesis output before leaf lowering: UCRZ and Hadamard gates are already
/// elementary, leaves remain as `GENERIC_1Q` (L0) or `GENERIC_BLOCK` on the
/// bottom two qubits (L1 and above).
pub fn synthesize_ir<T: Real>(u: &CMatrix<T>, cfg: &SynthesisConfig) -> Result<Circuit<T>> {
    cfg.validate()?;
    let n = numerics::qubit_count(u)?;
    numerics::check_unitary(u, cfg.tolerances.unitarity, "synthesis input")?;
    let driver = Driver { cfg, check_nodes: cfg.node_checks(n) };
    let mut out = Circuit::new(n);
    driver.block(u, 0, &mut out, "root")?;
    Ok(out)
}

/// ELEMENTARY circuit realizing `u` exactly, global phase included.
pub fn synthesize<T: Real>(u: &CMatrix<T>, cfg: &SynthesisConfig) -> Result<Circuit<T>> {
    let ir = synthesize_ir(u, cfg)?;
    optimizer::lower(&ir, cfg.opt_level, &cfg.tolerances)
}
