//! Quantum sets as weighted direct sums of matrix algebras.
//!
//! The basis of `⊕ₖ M_{n_k}` is the matrix units `E^k_ij`, ordered by block and
//! then row-major, so `E^k_ij` sits at `off_k + i*n_k + j` with
//! `off_k = Σ_{l<k} n_l²`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{QsyncError, Result};
use crate::tensor::{c, residual, wires_dim, CMatrix, Morphism, Wire};

/// One entry `coef · e_out` of `m(e_left ⊗ e_right)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultEntry {
    pub out: usize,
    pub left: usize,
    pub right: usize,
    pub coef: f64,
}

pub struct QuantumSet {
    name: String,
    blocks: Vec<usize>,
    offsets: Vec<usize>,
    dim: usize,
    table: OnceLock<Vec<MultEntry>>,
}

impl PartialEq for QuantumSet {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.blocks == other.blocks
    }
}

impl fmt::Debug for QuantumSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuantumSet({} {:?})", self.name, self.blocks)
    }
}

impl QuantumSet {
    pub fn new(name: impl Into<String>, blocks: &[usize]) -> Result<Arc<Self>> {
        let name = name.into();
        if blocks.is_empty() {
            return Err(QsyncError::InvalidBlocks(format!("{name}: no blocks")));
        }
        if let Some(bad) = blocks.iter().find(|&&n| n == 0) {
            return Err(QsyncError::InvalidBlocks(format!(
                "{name}: block size {bad} in {blocks:?}"
            )));
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut dim = 0;
        for &n in blocks {
            offsets.push(dim);
            dim += n * n;
        }
        Ok(Arc::new(QuantumSet {
            name,
            blocks: blocks.to_vec(),
            offsets,
            dim,
            table: OnceLock::new(),
        }))
    }

    /// Classical set with `n` points.
    pub fn classical(name: impl Into<String>, n: usize) -> Result<Arc<Self>> {
        QuantumSet::new(name, &vec![1; n])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classical_dim(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_classical(&self) -> bool {
        self.blocks.iter().all(|&n| n == 1)
    }

    pub fn index(&self, k: usize, i: usize, j: usize) -> usize {
        self.offsets[k] + i * self.blocks[k] + j
    }

    /// `(k, i, j)` of a basis index.
    pub fn unit_of(&self, idx: usize) -> (usize, usize, usize) {
        let k = match self.offsets.binary_search(&idx) {
            Ok(k) => k,
            Err(k) => k - 1,
        };
        let n = self.blocks[k];
        let r = idx - self.offsets[k];
        (k, r / n, r % n)
    }

    /// Index of `E^k_ji` given the index of `E^k_ij`.
    pub fn transpose_index(&self, idx: usize) -> usize {
        let (k, i, j) = self.unit_of(idx);
        self.index(k, j, i)
    }

    /// Sparse multiplication table of `m`, before any opposite swap.
    pub fn mult_table(&self) -> &[MultEntry] {
        self.table.get_or_init(|| {
            let mut t = Vec::new();
            for (k, &n) in self.blocks.iter().enumerate() {
                let w = 1.0 / (n as f64).sqrt();
                for i in 0..n {
                    for j in 0..n {
                        for s in 0..n {
                            t.push(MultEntry {
                                out: self.index(k, i, s),
                                left: self.index(k, i, j),
                                right: self.index(k, j, s),
                                coef: w,
                            });
                        }
                    }
                }
            }
            t
        })
    }

    /// Coefficients of `u(1) = ⊕ₖ √n_k I`.
    pub fn unit_vector(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for (k, &n) in self.blocks.iter().enumerate() {
            for i in 0..n {
                v[self.index(k, i, i)] = (n as f64).sqrt();
            }
        }
        v
    }
}

pub fn wire(set: &Arc<QuantumSet>) -> Wire {
    Wire::QSet {
        set: set.clone(),
        op: false,
    }
}

pub fn op_wire(set: &Arc<QuantumSet>) -> Wire {
    Wire::QSet {
        set: set.clone(),
        op: true,
    }
}

fn require_qset(w: &Wire) -> Result<(&Arc<QuantumSet>, bool)> {
    w.qset().ok_or_else(|| {
        QsyncError::OppositeStructureMissing(format!("wire {w} carries no quantum set structure"))
    })
}

/// Multiplication table of a list of quantum-set wires with the product structure
/// `m = (m_1 ⊗ .. ⊗ m_n) ∘ shuffle`. Opposite wires swap their arguments.
pub fn product_table(wires: &[Wire]) -> Result<Vec<MultEntry>> {
    let mut acc = vec![MultEntry {
        out: 0,
        left: 0,
        right: 0,
        coef: 1.0,
    }];
    for w in wires {
        let (set, op) = require_qset(w)?;
        let d = set.dim();
        let table = set.mult_table();
        let mut next = Vec::with_capacity(acc.len() * table.len());
        for a in &acc {
            for e in table {
                let (l, r) = if op { (e.right, e.left) } else { (e.left, e.right) };
                next.push(MultEntry {
                    out: a.out * d + e.out,
                    left: a.left * d + l,
                    right: a.right * d + r,
                    coef: a.coef * e.coef,
                });
            }
        }
        acc = next;
    }
    Ok(acc)
}

/// The four structure maps of a quantum set or product of quantum sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructureMap {
    M,
    U,
    Delta,
    Eps,
}

/// Multiplication on a list of quantum-set wires: `L ⊗ L -> L`.
pub fn mult(wires: &[Wire]) -> Result<Morphism> {
    let table = product_table(wires)?;
    let d = wires_dim(wires);
    let mut mat = CMatrix::zeros(d, d * d);
    for e in &table {
        mat[(e.out, e.left * d + e.right)] += c(e.coef);
    }
    let mut dom = wires.to_vec();
    dom.extend(wires.iter().cloned());
    Morphism::new(dom, wires.to_vec(), mat)
}

pub fn unit(wires: &[Wire]) -> Result<Morphism> {
    let mut acc = Morphism::scalar(c(1.0));
    for w in wires {
        let (set, _) = require_qset(w)?;
        let v: Vec<_> = set.unit_vector().into_iter().map(c).collect();
        acc = acc.tensor(&Morphism::state(std::slice::from_ref(w), &v)?);
    }
    Ok(acc)
}

pub fn comult(wires: &[Wire]) -> Result<Morphism> {
    Ok(mult(wires)?.dagger())
}

pub fn counit(wires: &[Wire]) -> Result<Morphism> {
    Ok(unit(wires)?.dagger())
}

pub fn structural_map(set: &Arc<QuantumSet>, which: StructureMap, opposite: bool) -> Morphism {
    let w = [Wire::QSet {
        set: set.clone(),
        op: opposite,
    }];
    match which {
        StructureMap::M => mult(&w),
        StructureMap::U => unit(&w),
        StructureMap::Delta => comult(&w),
        StructureMap::Eps => counit(&w),
    }
    .expect("quantum set wire")
}

/// Swap of two thick wires `L ⊗ L' -> L' ⊗ L`.
pub fn swap_lists(left: &[Wire], right: &[Wire]) -> Morphism {
    let mut wires = left.to_vec();
    wires.extend(right.iter().cloned());
    let (a, b) = (left.len(), right.len());
    let perm: Vec<usize> = (a..a + b).chain(0..a).collect();
    Morphism::permutation(&wires, &perm).expect("valid permutation")
}

/// A multiplication and unit on a (thick) wire, with `Δ = m†` and `ε = u†`.
#[derive(Clone, Debug)]
pub struct FrobeniusStructure {
    pub wires: Vec<Wire>,
    pub m: Morphism,
    pub u: Morphism,
}

/// Per-axiom residuals.
#[derive(Clone, Debug, Default)]
pub struct AxiomReport {
    pub residuals: Vec<(String, f64)>,
}

impl AxiomReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|(n, _)| n == name).map(|(_, r)| *r)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.residuals.iter().all(|(_, r)| *r <= tol)
    }

    pub fn first_failure(&self, tol: f64) -> Option<(&str, f64)> {
        self.residuals
            .iter()
            .find(|(_, r)| *r > tol)
            .map(|(n, r)| (n.as_str(), *r))
    }

    pub fn worst(&self) -> f64 {
        self.residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }
}

impl FrobeniusStructure {
    pub fn of_wires(wires: &[Wire]) -> Result<Self> {
        Ok(FrobeniusStructure {
            wires: wires.to_vec(),
            m: mult(wires)?,
            u: unit(wires)?,
        })
    }

    pub fn of_set(set: &Arc<QuantumSet>, opposite: bool) -> Self {
        let w = Wire::QSet {
            set: set.clone(),
            op: opposite,
        };
        FrobeniusStructure::of_wires(&[w]).expect("quantum set wire")
    }

    pub fn delta(&self) -> Morphism {
        self.m.dagger()
    }

    pub fn eps(&self) -> Morphism {
        self.u.dagger()
    }

    /// Associativity, unitality, the Frobenius law, specialness and symmetry.
    pub fn check_axioms(&self) -> Result<AxiomReport> {
        let w = &self.wires;
        let n = w.len();
        let id = Morphism::identity(w);
        let m = &self.m;
        let delta = self.delta();
        let mut r = AxiomReport::default();

        let left_assoc = id.tensor(&id).tensor(&id).then_at(0, m)?.then_at(0, m)?;
        let right_assoc = id.tensor(&id).tensor(&id).then_at(n, m)?.then_at(0, m)?;
        r.residuals
            .push(("associativity".into(), residual(&left_assoc, &right_assoc)?));

        let lu = m.compose(&self.u.tensor(&id))?;
        let ru = m.compose(&id.tensor(&self.u))?;
        r.residuals.push((
            "unitality".into(),
            residual(&lu, &id)?.max(residual(&ru, &id)?),
        ));

        let middle = delta.compose(m)?;
        let left = id.tensor(m).compose(&delta.tensor(&id))?;
        let right = m.tensor(&id).compose(&id.tensor(&delta))?;
        r.residuals.push((
            "frobenius".into(),
            residual(&left, &middle)?.max(residual(&right, &middle)?),
        ));

        r.residuals
            .push(("special".into(), residual(&m.compose(&delta)?, &id)?));

        let em = self.eps().compose(m)?;
        let ems = em.compose(&swap_lists(w, w))?;
        r.residuals.push(("symmetric".into(), residual(&ems, &em)?));
        Ok(r)
    }
}

pub fn check_axioms(set: &Arc<QuantumSet>) -> AxiomReport {
    FrobeniusStructure::of_set(set, false)
        .check_axioms()
        .expect("structure maps are well typed")
}

/// Sharing `Δ ∘ m` on `X ⊗ Xᵒᵖ`.
pub fn share(set: &Arc<QuantumSet>) -> Morphism {
    share_wires(&[wire(set)]).expect("quantum set wire")
}

/// Sharing on a thick wire `L ⊗ Lᵒᵖ`, built from the multiplication of `L`.
pub fn share_wires(wires: &[Wire]) -> Result<Morphism> {
    let m = mult(wires)?;
    let s = m.dagger().compose(&m)?;
    let mut sig = wires.to_vec();
    sig.extend(wires.iter().map(Wire::dual));
    s.relabel(&sig, &sig)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dims {
    pub dim: usize,
    pub classical_dim: usize,
    pub classical_dim_diagram: f64,
}

/// Dimension, block count, and the trace of `m ∘ σ ∘ Δ`.
pub fn dims(set: &Arc<QuantumSet>, tol: f64) -> Result<Dims> {
    let w = [wire(set)];
    let m = mult(&w)?;
    let loop_map = m.compose(&swap_lists(&w, &w))?.compose(&m.dagger())?;
    let tr = loop_map.trace()?;
    let k = set.classical_dim();
    if (tr - c(k as f64)).norm() > tol {
        return Err(QsyncError::DiagramMismatch(format!(
            "Tr(m σ Δ) = {tr} but the set has {k} blocks"
        )));
    }
    Ok(Dims {
        dim: set.dim(),
        classical_dim: k,
        classical_dim_diagram: tr.re,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchurSign {
    Plus,
    Minus,
}

/// Weighted Schur-product algebra: `a ⊗ b ↦ ⊕ w_ℓ a_ℓ ∘ b_ℓ`, unit `⊕ w_ℓ⁻¹ J_ℓ`
/// with `w_ℓ = √m_ℓ` for `Plus` and `1/√m_ℓ` for `Minus`.
pub fn schur_cfa(set: &Arc<QuantumSet>, sign: SchurSign) -> FrobeniusStructure {
    let d = set.dim();
    let mut m = CMatrix::zeros(d, d * d);
    let mut u = CMatrix::zeros(d, 1);
    for p in 0..d {
        let (k, _, _) = set.unit_of(p);
        let root = (set.blocks()[k] as f64).sqrt();
        let w = match sign {
            SchurSign::Plus => root,
            SchurSign::Minus => 1.0 / root,
        };
        m[(p, p * d + p)] = c(w);
        u[(p, 0)] = c(1.0 / w);
    }
    let x = wire(set);
    FrobeniusStructure {
        wires: vec![x.clone()],
        m: Morphism::new(vec![x.clone(), x.clone()], vec![x.clone()], m).expect("shape"),
        u: Morphism::new(vec![], vec![x], u).expect("shape"),
    }
}

/// Named sets used by fixtures and the CLI.
#[derive(Default, Debug, Clone)]
pub struct SetRegistry {
    sets: HashMap<String, Arc<QuantumSet>>,
}

impl SetRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, set: Arc<QuantumSet>) {
        self.sets.insert(set.name().to_string(), set);
    }

    pub fn get(&self, name: &str) -> Option<&Arc<QuantumSet>> {
        self.sets.get(name)
    }
}
