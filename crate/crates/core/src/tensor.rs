//! Typed dense morphisms between tensor products of wires.
//!
//! Composite indices are Kronecker ordered with the leftmost wire most
//! significant. Scalars are morphisms with empty domain and codomain.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QsyncError, Result};
use crate::qset::QuantumSet;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const DEFAULT_TOL: f64 = 1e-9;

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// A single wire of a string diagram.
#[derive(Clone)]
pub enum Wire {
    /// A quantum set, or its opposite when `op` is set.
    QSet { set: Arc<QuantumSet>, op: bool },
    /// A plain Hilbert space or its dual.
    Space { dim: usize, dual: bool },
}

impl Wire {
    pub fn space(dim: usize) -> Self {
        Wire::Space { dim, dual: false }
    }

    pub fn dim(&self) -> usize {
        match self {
            Wire::QSet { set, .. } => set.dim(),
            Wire::Space { dim, .. } => *dim,
        }
    }

    /// Dual wire: toggles the opposite flag of a quantum set, or the dual flag of a space.
    pub fn dual(&self) -> Wire {
        match self {
            Wire::QSet { set, op } => Wire::QSet {
                set: set.clone(),
                op: !op,
            },
            Wire::Space { dim, dual } => Wire::Space {
                dim: *dim,
                dual: !dual,
            },
        }
    }

    pub fn is_qset(&self) -> bool {
        matches!(self, Wire::QSet { .. })
    }

    pub fn qset(&self) -> Option<(&Arc<QuantumSet>, bool)> {
        match self {
            Wire::QSet { set, op } => Some((set, *op)),
            Wire::Space { .. } => None,
        }
    }

    /// Index involution pairing a basis vector with its partner in the cup state.
    /// For quantum sets this is `E_ij <-> E_ji`; for spaces it is the identity.
    pub fn pairing(&self, i: usize) -> usize {
        match self {
            Wire::QSet { set, .. } => set.transpose_index(i),
            Wire::Space { .. } => i,
        }
    }

    /// Same underlying space and structure, ignoring the opposite/dual flag.
    pub fn same_carrier(&self, other: &Wire) -> bool {
        match (self, other) {
            (Wire::QSet { set: a, .. }, Wire::QSet { set: b, .. }) => a == b,
            (Wire::Space { dim: a, .. }, Wire::Space { dim: b, .. }) => a == b,
            _ => false,
        }
    }
}

impl PartialEq for Wire {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Wire::QSet { set: a, op: p }, Wire::QSet { set: b, op: q }) => p == q && a == b,
            (Wire::Space { dim: a, dual: p }, Wire::Space { dim: b, dual: q }) => a == b && p == q,
            _ => false,
        }
    }
}

impl fmt::Display for Wire {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Wire::QSet { set, op: false } => write!(f, "{}", set.name()),
            Wire::QSet { set, op: true } => write!(f, "{}^op", set.name()),
            Wire::Space { dim, dual: false } => write!(f, "C^{dim}"),
            Wire::Space { dim, dual: true } => write!(f, "(C^{dim})*"),
        }
    }
}

impl fmt::Debug for Wire {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn wires_dim(wires: &[Wire]) -> usize {
    wires.iter().map(Wire::dim).product()
}

pub fn dual_wires(wires: &[Wire]) -> Vec<Wire> {
    wires.iter().map(Wire::dual).collect()
}

/// Signature printer used in error messages.
pub fn signature(wires: &[Wire]) -> String {
    if wires.is_empty() {
        return "I".to_string();
    }
    wires
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" (x) ")
}

/// Apply the per-wire pairing involution to every index of a composite space.
pub(crate) fn pairing_permutation(wires: &[Wire]) -> Vec<usize> {
    let total = wires_dim(wires);
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; wires.len()];
    for _ in 0..total {
        let mut idx = 0;
        for (w, &d) in wires.iter().zip(&digits) {
            idx = idx * w.dim() + w.pairing(d);
        }
        out.push(idx);
        // increment mixed-radix counter, last wire fastest
        for k in (0..wires.len()).rev() {
            digits[k] += 1;
            if digits[k] < wires[k].dim() {
                break;
            }
            digits[k] = 0;
        }
    }
    out
}

/// A linear map between tensor products of wires.
#[derive(Clone)]
pub struct Morphism {
    dom: Vec<Wire>,
    cod: Vec<Wire>,
    matrix: CMatrix,
}

impl fmt::Debug for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Morphism({} -> {}, {}x{})",
            signature(&self.dom),
            signature(&self.cod),
            self.matrix.nrows(),
            self.matrix.ncols()
        )
    }
}

impl Morphism {
    pub fn new(dom: Vec<Wire>, cod: Vec<Wire>, matrix: CMatrix) -> Result<Self> {
        let (r, cdim) = (wires_dim(&cod), wires_dim(&dom));
        if matrix.nrows() != r || matrix.ncols() != cdim {
            return Err(QsyncError::DimMismatch(format!(
                "matrix is {}x{} but wires {} -> {} need {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                signature(&dom),
                signature(&cod),
                r,
                cdim
            )));
        }
        Ok(Morphism { dom, cod, matrix })
    }

    pub(crate) fn from_parts(dom: Vec<Wire>, cod: Vec<Wire>, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), wires_dim(&cod));
        debug_assert_eq!(matrix.ncols(), wires_dim(&dom));
        Morphism { dom, cod, matrix }
    }

    pub fn dom(&self) -> &[Wire] {
        &self.dom
    }

    pub fn cod(&self) -> &[Wire] {
        &self.cod
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn identity(wires: &[Wire]) -> Self {
        let d = wires_dim(wires);
        Morphism::from_parts(wires.to_vec(), wires.to_vec(), CMatrix::identity(d, d))
    }

    pub fn scalar(value: C64) -> Self {
        Morphism::from_parts(vec![], vec![], CMatrix::from_element(1, 1, value))
    }

    pub fn zero(dom: &[Wire], cod: &[Wire]) -> Self {
        Morphism::from_parts(
            dom.to_vec(),
            cod.to_vec(),
            CMatrix::zeros(wires_dim(cod), wires_dim(dom)),
        )
    }

    /// A state `I -> cod` from its coefficient vector.
    pub fn state(cod: &[Wire], coeffs: &[C64]) -> Result<Self> {
        let m = CMatrix::from_column_slice(coeffs.len(), 1, coeffs);
        Morphism::new(vec![], cod.to_vec(), m)
    }

    pub fn is_scalar(&self) -> bool {
        self.dom.is_empty() && self.cod.is_empty()
    }

    /// Same matrix, new wire labels of matching dimensions.
    pub fn relabel(&self, dom: &[Wire], cod: &[Wire]) -> Result<Self> {
        Morphism::new(dom.to_vec(), cod.to_vec(), self.matrix.clone())
    }

    /// `self` after `g`: the diagram with `g` stacked below `self`.
    pub fn compose(&self, g: &Morphism) -> Result<Morphism> {
        if self.dom != g.cod {
            return Err(QsyncError::mismatch(signature(&self.dom), signature(&g.cod)));
        }
        Ok(Morphism::from_parts(
            g.dom.clone(),
            self.cod.clone(),
            &self.matrix * &g.matrix,
        ))
    }

    /// Kronecker product, `self` on the left.
    pub fn tensor(&self, g: &Morphism) -> Morphism {
        let mut dom = self.dom.clone();
        dom.extend(g.dom.iter().cloned());
        let mut cod = self.cod.clone();
        cod.extend(g.cod.iter().cloned());
        Morphism::from_parts(dom, cod, self.matrix.kronecker(&g.matrix))
    }

    pub fn dagger(&self) -> Morphism {
        Morphism::from_parts(self.cod.clone(), self.dom.clone(), self.matrix.adjoint())
    }

    pub fn scale(&self, s: C64) -> Morphism {
        Morphism::from_parts(self.dom.clone(), self.cod.clone(), &self.matrix * s)
    }

    pub fn add(&self, other: &Morphism) -> Result<Morphism> {
        self.check_same_signature(other)?;
        Ok(Morphism::from_parts(
            self.dom.clone(),
            self.cod.clone(),
            &self.matrix + &other.matrix,
        ))
    }

    pub fn sub(&self, other: &Morphism) -> Result<Morphism> {
        self.add(&other.scale(c(-1.0)))
    }

    pub fn check_same_signature(&self, other: &Morphism) -> Result<()> {
        if self.dom != other.dom || self.cod != other.cod {
            return Err(QsyncError::mismatch(
                format!("{} -> {}", signature(&self.dom), signature(&self.cod)),
                format!("{} -> {}", signature(&other.dom), signature(&other.cod)),
            ));
        }
        Ok(())
    }

    /// `(id ⊗ f ⊗ id) ∘ self`, with `f` acting on the output wires starting at `pos`.
    ///
    /// Avoids materializing the Kronecker product with identities.
    pub fn then_at(&self, pos: usize, f: &Morphism) -> Result<Morphism> {
        let k = f.dom.len();
        if pos + k > self.cod.len() || self.cod[pos..pos + k] != f.dom[..] {
            let got = self.cod.get(pos..(pos + k).min(self.cod.len())).unwrap_or(&[]);
            return Err(QsyncError::mismatch(signature(got), signature(&f.dom)));
        }
        let left = wires_dim(&self.cod[..pos]);
        let right = wires_dim(&self.cod[pos + k..]);
        let matrix = apply_local(left, &f.matrix, right, &self.matrix);
        let mut cod = self.cod[..pos].to_vec();
        cod.extend(f.cod.iter().cloned());
        cod.extend(self.cod[pos + k..].iter().cloned());
        Ok(Morphism::from_parts(self.dom.clone(), cod, matrix))
    }

    /// `self ∘ (id ⊗ h ⊗ id)`, with `h` feeding the input wires starting at `pos`.
    pub fn before_at(&self, pos: usize, h: &Morphism) -> Result<Morphism> {
        Ok(self.dagger().then_at(pos, &h.dagger())?.dagger())
    }

    /// Reorder output wires: new output `i` is old output `perm[i]`.
    pub fn permute_cod(&self, perm: &[usize]) -> Result<Morphism> {
        let p = Morphism::permutation(&self.cod, perm)?;
        p.compose(self)
    }

    /// Reorder input wires: new input `i` is old input `perm[i]`.
    pub fn permute_dom(&self, perm: &[usize]) -> Result<Morphism> {
        let new_dom: Vec<Wire> = perm.iter().map(|&i| self.dom[i].clone()).collect();
        // P maps new_dom -> dom, i.e. the inverse permutation on new_dom.
        let mut inv = vec![0; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let p = Morphism::permutation(&new_dom, &inv)?;
        self.compose(&p)
    }

    /// Wire permutation `wires -> [wires[perm[0]], wires[perm[1]], ...]`.
    pub fn permutation(wires: &[Wire], perm: &[usize]) -> Result<Morphism> {
        let n = wires.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(QsyncError::DimMismatch(format!(
                "{perm:?} is not a permutation of {n} wires"
            )));
        }
        let out_wires: Vec<Wire> = perm.iter().map(|&i| wires[i].clone()).collect();
        let dims: Vec<usize> = wires.iter().map(Wire::dim).collect();
        let total = wires_dim(wires);
        // strides of the input layout
        let mut in_stride = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            in_stride[k] = in_stride[k + 1] * dims[k + 1];
        }
        let mut m = CMatrix::zeros(total, total);
        let mut digits = vec![0usize; n];
        for out_idx in 0..total {
            let in_idx: usize = (0..n).map(|k| digits[k] * in_stride[perm[k]]).sum();
            m[(out_idx, in_idx)] = c(1.0);
            for k in (0..n).rev() {
                digits[k] += 1;
                if digits[k] < dims[perm[k]] {
                    break;
                }
                digits[k] = 0;
            }
        }
        Ok(Morphism::from_parts(wires.to_vec(), out_wires, m))
    }

    /// Swap of two adjacent wires `a ⊗ b -> b ⊗ a`.
    pub fn swap(a: &Wire, b: &Wire) -> Morphism {
        Morphism::permutation(&[a.clone(), b.clone()], &[1, 0]).expect("valid permutation")
    }

    /// Cup state `I -> w ⊗ w*`. For a quantum set this is `Δ ∘ u`.
    pub fn cup(w: &Wire) -> Morphism {
        let d = w.dim();
        let mut v = CMatrix::zeros(d * d, 1);
        for x in 0..d {
            v[(x * d + w.pairing(x), 0)] = c(1.0);
        }
        Morphism::from_parts(vec![], vec![w.clone(), w.dual()], v)
    }

    /// Cap effect `w ⊗ w* -> I`, the dagger of the cup.
    pub fn cap(w: &Wire) -> Morphism {
        Morphism::cup(w).dagger()
    }

    /// Cup for a list of wires, `I -> L ⊗ L*`, grouped rather than nested.
    pub fn cup_list(wires: &[Wire]) -> Morphism {
        let n = wires.len();
        let mut acc = Morphism::scalar(c(1.0));
        for w in wires {
            acc = acc.tensor(&Morphism::cup(w));
        }
        // acc has outputs [w0, w0*, w1, w1*, ...]; regroup to [w0.., w0*..]
        let perm: Vec<usize> = (0..n).map(|i| 2 * i).chain((0..n).map(|i| 2 * i + 1)).collect();
        acc.permute_cod(&perm).expect("valid permutation")
    }

    pub fn cap_list(wires: &[Wire]) -> Morphism {
        Morphism::cup_list(wires).dagger()
    }

    /// Transpose `f*: cod* -> dom*`, dualizing each wire in place.
    pub fn transpose(&self) -> Morphism {
        let pd = pairing_permutation(&self.dom);
        let pc = pairing_permutation(&self.cod);
        let (r, cols) = (self.matrix.nrows(), self.matrix.ncols());
        let m = CMatrix::from_fn(cols, r, |y, b| self.matrix[(pc[b], pd[y])]);
        Morphism::from_parts(dual_wires(&self.cod), dual_wires(&self.dom), m)
    }

    /// Transpose computed by bending wires with cups and caps.
    pub fn transpose_by_bending(&self) -> Result<Morphism> {
        let dom_dual = dual_wires(&self.dom);
        let cod_dual = dual_wires(&self.cod);
        let nd = self.dom.len();
        // (cup_{D*} ⊗ id_{C*}) : C* -> D* ⊗ D ⊗ C*
        let start = Morphism::cup_list(&dom_dual).tensor(&Morphism::identity(&cod_dual));
        let mid = start.then_at(nd, self)?;
        mid.then_at(nd, &Morphism::cap_list(&self.cod))
    }

    /// Conjugate `f_* = (f†)*`: entrywise conjugation with every wire dualized.
    pub fn conjugate(&self) -> Morphism {
        let pd = pairing_permutation(&self.dom);
        let pc = pairing_permutation(&self.cod);
        let (r, cols) = (self.matrix.nrows(), self.matrix.ncols());
        let m = CMatrix::from_fn(r, cols, |b, y| self.matrix[(pc[b], pd[y])].conj());
        Morphism::from_parts(dual_wires(&self.dom), dual_wires(&self.cod), m)
    }

    pub fn close_scalar(&self) -> Result<C64> {
        if !self.is_scalar() {
            return Err(QsyncError::mismatch(
                format!("{} -> {}", signature(&self.dom), signature(&self.cod)),
                "I -> I",
            ));
        }
        Ok(self.matrix[(0, 0)])
    }

    /// Trace of an endomorphism.
    pub fn trace(&self) -> Result<C64> {
        if self.dom != self.cod {
            return Err(QsyncError::mismatch(signature(&self.dom), signature(&self.cod)));
        }
        Ok(self.matrix.trace())
    }
}

/// `(I_left ⊗ f ⊗ I_right) · g` without forming the Kronecker product.
pub(crate) fn apply_local(left: usize, f: &CMatrix, right: usize, g: &CMatrix) -> CMatrix {
    let (m, n) = (f.nrows(), f.ncols());
    let cols = g.ncols();
    debug_assert_eq!(g.nrows(), left * n * right);
    let mut out = CMatrix::zeros(left * m * right, cols);
    let mut buf = CMatrix::zeros(n, right * cols);
    for l in 0..left {
        for col in 0..cols {
            for j in 0..n {
                for r in 0..right {
                    buf[(j, r + right * col)] = g[(l * n * right + j * right + r, col)];
                }
            }
        }
        let prod = f * &buf;
        for col in 0..cols {
            for i in 0..m {
                for r in 0..right {
                    out[(l * m * right + i * right + r, col)] = prod[(i, r + right * col)];
                }
            }
        }
    }
    out
}

/// Largest singular value, estimated by power iteration on `a† a`.
pub fn operator_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let fro = a.norm();
    if fro == 0.0 {
        return 0.0;
    }
    let n = a.ncols();
    // deterministic, generic start vector
    let mut v = nalgebra::DVector::<C64>::from_fn(n, |i, _| C64::new(1.0 + (i as f64 * 0.7548776662).fract(), 0.3));
    v /= c(v.norm());
    let mut est = 0.0;
    for _ in 0..200 {
        let w = a * &v;
        let z = a.adjoint() * &w;
        let nz = z.norm();
        if nz == 0.0 {
            break;
        }
        let next = w.norm();
        v = z / c(nz);
        if (next - est).abs() <= 1e-13 * next.max(1.0) {
            est = next;
            break;
        }
        est = next;
    }
    est.max(fro / (n.min(a.nrows()) as f64).sqrt()).min(fro)
}

/// Max-entry distance after scaling by `1 / max(1, ||reference||_op)`.
pub fn matrix_residual(a: &CMatrix, reference: &CMatrix) -> f64 {
    if a.shape() != reference.shape() {
        return f64::INFINITY;
    }
    let scale = operator_norm(reference).max(1.0);
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(reference.iter()) {
        worst = worst.max((x - y).norm());
    }
    worst / scale
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Residual between two morphisms with identical signatures.
pub fn residual(f: &Morphism, g: &Morphism) -> Result<f64> {
    f.check_same_signature(g)?;
    Ok(matrix_residual(&f.matrix, &g.matrix))
}

pub fn approx_equal(f: &Morphism, g: &Morphism, tol: f64) -> Result<bool> {
    Ok(residual(f, g)? <= tol)
}

/// Matrix comparison that ignores wire labels (used under canonical identifications).
pub fn approx_equal_matrix(f: &Morphism, g: &Morphism, tol: f64) -> bool {
    matrix_residual(&f.matrix, &g.matrix) <= tol
}

/// Builder helper: tensor a list of morphisms left to right.
pub fn tensor_all(parts: &[Morphism]) -> Morphism {
    parts
        .iter()
        .fold(Morphism::scalar(c(1.0)), |acc, p| acc.tensor(p))
}
