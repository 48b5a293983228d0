//! Quantum functions, combined strategies and the correlations they realize.
//!
//! A quantum function `X →_H A` is a map `H ⊗ X -> A ⊗ H`; question and
//! answer sides may be thick wires.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{QsyncError, Result};
use crate::gamemaps::{game_report, opposite_halves, split_strategy, star_threaded};
use crate::qset::{comult, counit, share_wires, unit, wire, QuantumSet};
use crate::rng::Seed;
use crate::tensor::{
    c, pairing_permutation, residual, signature, wires_dim, CMatrix, Morphism, Wire, C64,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QFuncReport {
    pub comult: f64,
    pub counital: f64,
    pub self_conj: f64,
}

impl QFuncReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.comult <= tol && self.counital <= tol && self.self_conj <= tol
    }

    pub fn first_failure(&self, tol: f64) -> Option<(&'static str, f64)> {
        [
            ("comultiplicativity", self.comult),
            ("counitality", self.counital),
            ("self-conjugacy", self.self_conj),
        ]
        .into_iter()
        .find(|(_, r)| *r > tol)
    }

    pub fn worst(&self) -> f64 {
        self.comult.max(self.counital).max(self.self_conj)
    }
}

/// Residuals of the three quantum-function equations for `E: H ⊗ X -> A ⊗ H`.
pub fn qfunc_report(e: &Morphism) -> Result<QFuncReport> {
    let (h, x, a) = split_strategy(e)?;
    let na = a.len();
    let id_h = Morphism::identity(std::slice::from_ref(h));

    let lhs = e.then_at(0, &comult(a)?)?;
    let rhs = id_h
        .tensor(&comult(x)?)
        .then_at(0, e)?
        .then_at(na, e)?;
    let comult_r = residual(&lhs, &rhs)?;

    let lhs = e.then_at(0, &counit(a)?)?;
    let rhs = id_h.tensor(&counit(x)?);
    let counital = residual(&lhs, &rhs)?;

    let self_conj = self_conj_residual(e, h.dim(), x, a);
    Ok(QFuncReport {
        comult: comult_r,
        counital,
        self_conj,
    })
}

/// `E[(τa, h2), (h, τy)] = conj E[(a, h), (h2, y)]`: the bent map equals the dagger.
fn self_conj_residual(e: &Morphism, hd: usize, x: &[Wire], a: &[Wire]) -> f64 {
    let tx = pairing_permutation(x);
    let ta = pairing_permutation(a);
    let (dx, da) = (wires_dim(x), wires_dim(a));
    let m = e.matrix();
    let scale = crate::tensor::operator_norm(m).max(1.0);
    let mut worst: f64 = 0.0;
    for ai in 0..da {
        for h in 0..hd {
            for h2 in 0..hd {
                for y in 0..dx {
                    let bent = m[(ta[ai] * hd + h2, h * dx + tx[y])];
                    let dag = m[(ai * hd + h, h2 * dx + y)].conj();
                    worst = worst.max((bent - dag).norm());
                }
            }
        }
    }
    worst / scale
}

pub fn is_quantum_function(e: &Morphism, tol: f64) -> Result<bool> {
    Ok(qfunc_report(e)?.passes(tol))
}

/// A validated quantum function.
#[derive(Clone, Debug)]
pub struct QuantumFunction {
    map: Morphism,
}

impl QuantumFunction {
    pub fn new(map: Morphism, tol: f64) -> Result<Self> {
        let r = qfunc_report(&map)?;
        if let Some((name, res)) = r.first_failure(tol) {
            return Err(QsyncError::InvalidQuantumFunction(format!(
                "{name} residual {res:.3e}"
            )));
        }
        Ok(QuantumFunction { map })
    }

    /// Wraps a map already known to satisfy the equations.
    pub fn new_unchecked(map: Morphism) -> Result<Self> {
        split_strategy(&map)?;
        Ok(QuantumFunction { map })
    }

    pub fn map(&self) -> &Morphism {
        &self.map
    }

    pub fn resource(&self) -> &Wire {
        &self.map.dom()[0]
    }

    pub fn resource_dim(&self) -> usize {
        self.resource().dim()
    }

    pub fn questions(&self) -> &[Wire] {
        &self.map.dom()[1..]
    }

    pub fn answers(&self) -> &[Wire] {
        let c = self.map.cod();
        &c[..c.len() - 1]
    }

    pub fn report(&self) -> QFuncReport {
        qfunc_report(&self.map).expect("shape checked")
    }

    /// `E_*`: conjugate on every wire, a quantum function `Xᵒᵖ →_{H*} Aᵒᵖ`.
    pub fn conj(&self) -> QuantumFunction {
        QuantumFunction {
            map: self.map.conjugate(),
        }
    }

    /// The same map read on the opposite question and answer wires.
    pub fn opposite_partner(&self) -> Result<QuantumFunction> {
        let h = self.resource().clone();
        let mut dom = vec![h.clone()];
        dom.extend(self.questions().iter().map(Wire::dual));
        let mut cod: Vec<Wire> = self.answers().iter().map(Wire::dual).collect();
        cod.push(h);
        Ok(QuantumFunction {
            map: self.map.relabel(&dom, &cod)?,
        })
    }

    /// `E ⊗ id_K` on the enlarged resource `H ⊗ K`.
    pub fn extend_resource(&self, k: &Wire) -> Result<QuantumFunction> {
        let h = self.resource().clone();
        let nq = self.questions().len();
        let na = self.answers().len();
        let t = self.map.tensor(&Morphism::identity(std::slice::from_ref(k)));
        // dom [H, X.., K] -> [H, K, X..]
        let mut dom_perm = vec![0, nq + 1];
        dom_perm.extend(1..=nq);
        let t = t.permute_dom(&dom_perm)?;
        let big = Wire::space(h.dim() * k.dim());
        let mut dom = vec![big.clone()];
        dom.extend(self.questions().iter().cloned());
        let mut cod = self.answers().to_vec();
        cod.push(big);
        debug_assert_eq!(t.cod().len(), na + 2);
        QuantumFunction::new_unchecked(t.relabel(&dom, &cod)?)
    }

    /// `id_K ⊗ E` on the enlarged resource `K ⊗ H`.
    pub fn extend_resource_left(&self, k: &Wire) -> Result<QuantumFunction> {
        let h = self.resource().clone();
        let na = self.answers().len();
        let t = Morphism::identity(std::slice::from_ref(k)).tensor(&self.map);
        // cod [K, A.., H] -> [A.., K, H]
        let mut cod_perm: Vec<usize> = (1..=na).collect();
        cod_perm.extend([0, na + 1]);
        let t = t.permute_cod(&cod_perm)?;
        let big = Wire::space(k.dim() * h.dim());
        let mut dom = vec![big.clone()];
        dom.extend(self.questions().iter().cloned());
        let mut cod = self.answers().to_vec();
        cod.push(big);
        QuantumFunction::new_unchecked(t.relabel(&dom, &cod)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineKind {
    Commuting,
    Tensor,
    Deterministic,
}

#[derive(Clone, Debug)]
pub enum Provenance {
    Raw,
    Combined {
        kind: CombineKind,
        e: QuantumFunction,
        f: QuantumFunction,
    },
}

#[derive(Clone, Debug)]
pub struct CombinedStrategy {
    pub map: Morphism,
    pub provenance: Provenance,
}

impl CombinedStrategy {
    pub fn raw(map: Morphism) -> Result<Self> {
        split_strategy(&map)?;
        Ok(CombinedStrategy {
            map,
            provenance: Provenance::Raw,
        })
    }
}

/// `(id_A ⊗ F) ∘ (E ⊗ id_Y)` on a shared resource, without the commutation check.
pub fn commuting_product(e: &QuantumFunction, f: &QuantumFunction) -> Result<Morphism> {
    let na = e.answers().len();
    let id_y = Morphism::identity(f.questions());
    e.map.tensor(&id_y).then_at(na, &f.map)
}

/// `(σ ⊗ id_H)(id_B ⊗ E)(F ⊗ id_X)(id_H ⊗ σ)`, the other order of play.
fn commuting_product_swapped(e: &QuantumFunction, f: &QuantumFunction) -> Result<Morphism> {
    let h = e.resource().clone();
    let (x, y) = (e.questions(), f.questions());
    let (a, b) = (e.answers(), f.answers());
    let (nx, ny, na, nb) = (x.len(), y.len(), a.len(), b.len());
    let mut dom = vec![h];
    dom.extend(x.iter().cloned());
    dom.extend(y.iter().cloned());
    // [H, X, Y] -> [H, Y, X]
    let mut perm = vec![0];
    perm.extend(1 + nx..1 + nx + ny);
    perm.extend(1..1 + nx);
    let start = Morphism::permutation(&dom, &perm)?;
    let g = start.then_at(0, &f.map)?.then_at(nb, &e.map)?;
    // [B, A, H] -> [A, B, H]
    let mut cperm: Vec<usize> = (nb..nb + na).collect();
    cperm.extend(0..nb);
    cperm.push(na + nb);
    g.permute_cod(&cperm)
}

pub fn commutation_residual(e: &QuantumFunction, f: &QuantumFunction) -> Result<f64> {
    residual(&commuting_product(e, f)?, &commuting_product_swapped(e, f)?)
}

/// Separate resources combined into `H_E ⊗ H_F`.
fn tensor_product(e: &QuantumFunction, f: &QuantumFunction) -> Result<Morphism> {
    let (nx, ny) = (e.questions().len(), f.questions().len());
    let (na, nb) = (e.answers().len(), f.answers().len());
    let t = e.map.tensor(&f.map);
    // dom [HE, X.., HF, Y..] -> [HE, HF, X.., Y..]
    let mut dperm = vec![0, 1 + nx];
    dperm.extend(1..1 + nx);
    dperm.extend(2 + nx..2 + nx + ny);
    // cod [A.., HE, B.., HF] -> [A.., B.., HE, HF]
    let mut cperm: Vec<usize> = (0..na).collect();
    cperm.extend(na + 1..na + 1 + nb);
    cperm.extend([na, na + 1 + nb]);
    let t = t.permute_dom(&dperm)?.permute_cod(&cperm)?;
    let big = Wire::space(e.resource_dim() * f.resource_dim());
    let mut dom = vec![big.clone()];
    dom.extend(e.questions().iter().cloned());
    dom.extend(f.questions().iter().cloned());
    let mut cod = e.answers().to_vec();
    cod.extend(f.answers().iter().cloned());
    cod.push(big);
    t.relabel(&dom, &cod)
}

pub fn combine(
    kind: CombineKind,
    e: &QuantumFunction,
    f: &QuantumFunction,
    tol: f64,
) -> Result<CombinedStrategy> {
    let map = match kind {
        CombineKind::Commuting => {
            if e.resource() != f.resource() {
                return Err(QsyncError::DimMismatch(format!(
                    "resources {} and {} differ",
                    e.resource(),
                    f.resource()
                )));
            }
            let r = commutation_residual(e, f)?;
            if r > tol {
                return Err(QsyncError::CommutationFailure { residual: r });
            }
            commuting_product(e, f)?
        }
        CombineKind::Tensor => tensor_product(e, f)?,
        CombineKind::Deterministic => {
            if e.resource_dim() != 1 || f.resource_dim() != 1 {
                return Err(QsyncError::DimMismatch(format!(
                    "deterministic strategies need trivial resources, got {} and {}",
                    e.resource_dim(),
                    f.resource_dim()
                )));
            }
            tensor_product(e, f)?
        }
    };
    Ok(CombinedStrategy {
        map,
        provenance: Provenance::Combined {
            kind,
            e: e.clone(),
            f: f.clone(),
        },
    })
}

/// `(id ⊗ ⟨ψ|) ∘ φ ∘ (|ψ⟩ ⊗ id)`.
pub fn realize_correlation(phi: &Morphism, psi: &[C64], tol: f64) -> Result<Morphism> {
    let (h, _, r) = split_strategy(phi)?;
    if psi.len() != h.dim() {
        return Err(QsyncError::DimMismatch(format!(
            "state has {} entries, resource {} has dimension {}",
            psi.len(),
            h,
            h.dim()
        )));
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > tol {
        return Err(QsyncError::UnnormalizedState { norm });
    }
    let state = Morphism::state(std::slice::from_ref(h), psi)?;
    phi.before_at(0, &state)?.then_at(r.len(), &state.dagger())
}

/// Normalized cup state on `K ⊗ K*`, as a vector on a resource of dimension `d²`.
pub fn normalized_cup(d: usize) -> Vec<C64> {
    let s = 1.0 / (d as f64).sqrt();
    (0..d * d)
        .map(|i| if i / d == i % d { c(s) } else { c(0.0) })
        .collect()
}

pub fn perfect_strategy_residual(phi: &Morphism, lambda: &Morphism) -> Result<f64> {
    residual(&star_threaded(lambda, phi)?, phi)
}

pub fn is_perfect_strategy(phi: &Morphism, lambda: &Morphism, tol: f64) -> Result<bool> {
    let g = game_report(lambda)?;
    if !g.passes(tol) {
        return Err(QsyncError::NotAGame {
            residual: g.idempotent.max(g.self_conjugate),
        });
    }
    Ok(perfect_strategy_residual(phi, lambda)? <= tol)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrategySyncReport {
    pub synchronous: f64,
    pub flipped_synchronous: f64,
}

impl StrategySyncReport {
    pub fn synchronous(&self, tol: f64) -> bool {
        self.synchronous <= tol
    }
    pub fn bisynchronous(&self, tol: f64) -> bool {
        self.synchronous <= tol && self.flipped_synchronous <= tol
    }
}

fn strategy_sync_residual(phi: &Morphism) -> Result<f64> {
    let (_, q, r) = split_strategy(phi)?;
    let x = opposite_halves(q)?;
    let a = opposite_halves(r)?;
    let fed = phi.before_at(1, &share_wires(x)?)?;
    residual(&fed.then_at(0, &share_wires(a)?)?, &fed)
}

pub fn sync_strategy_status(phi: &Morphism) -> Result<StrategySyncReport> {
    Ok(StrategySyncReport {
        synchronous: strategy_sync_residual(phi)?,
        flipped_synchronous: strategy_sync_residual(&flip_strategy(phi)?)?,
    })
}

/// `φ̄: H* ⊗ A -> X ⊗ H*`, `φ̄[(x, h'), (h, a)] = conj φ[(a, h'), (h, x)]`.
pub fn flip_strategy(phi: &Morphism) -> Result<Morphism> {
    let (h, q, r) = split_strategy(phi)?;
    let hd = h.dim();
    let (dq, dr) = (wires_dim(q), wires_dim(r));
    let m = phi.matrix();
    let out = CMatrix::from_fn(dq * hd, hd * dr, |row, col| {
        let (x, h2) = (row / hd, row % hd);
        let (h1, a) = (col / dr, col % dr);
        m[(a * hd + h2, h1 * dq + x)].conj()
    });
    let hs = h.dual();
    let mut dom = vec![hs.clone()];
    dom.extend(r.iter().cloned());
    let mut cod = q.to_vec();
    cod.push(hs);
    Morphism::new(dom, cod, out)
}

pub fn is_bistrategy(phi: &Morphism, tol: f64) -> Result<bool> {
    is_quantum_function(&flip_strategy(phi)?, tol)
}

/// Flip of a combined strategy, rebuilt from the flipped players.
pub fn flip_combined(cs: &CombinedStrategy, tol: f64) -> Result<CombinedStrategy> {
    match &cs.provenance {
        Provenance::Raw => CombinedStrategy::raw(flip_strategy(&cs.map)?),
        Provenance::Combined { kind, e, f } => {
            let fe = QuantumFunction::new(flip_strategy(&e.map)?, tol)?;
            let ff = QuantumFunction::new(flip_strategy(&f.map)?, tol)?;
            combine(*kind, &fe, &ff, tol)
        }
    }
}

/// `(id_A ⊗ ε_B ⊗ id_H) ∘ φ ∘ (id_H ⊗ id_X ⊗ u_Y) / dim Y`.
pub fn extract_alice(phi: &Morphism) -> Result<Morphism> {
    let (_, q, r) = split_strategy(phi)?;
    let (x, y) = q.split_at(q.len() / 2);
    let (a, b) = r.split_at(r.len() / 2);
    let dy = wires_dim(y) as f64;
    let fed = phi.before_at(1 + x.len(), &unit(y)?)?;
    Ok(fed.then_at(a.len(), &counit(b)?)?.scale(c(1.0 / dy)))
}

/// Cauchy–Schwarz scalars for a pair `E: X →_H A`, `F: Xᵒᵖ →_H Aᵒᵖ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CsScalars {
    pub lhs: f64,
    pub rhs: f64,
    pub equality: bool,
    pub partner_residual: f64,
}

pub fn cs_scalars(
    e: &QuantumFunction,
    f: &QuantumFunction,
    psi: Option<&[C64]>,
    tol: f64,
) -> Result<CsScalars> {
    if e.resource_dim() != f.resource_dim() {
        return Err(QsyncError::DimMismatch(format!(
            "resource dimensions {} and {}",
            e.resource_dim(),
            f.resource_dim()
        )));
    }
    let x = e.questions().to_vec();
    let a = e.answers().to_vec();
    let want_fx: Vec<Wire> = x.iter().map(Wire::dual).collect();
    let want_fa: Vec<Wire> = a.iter().map(Wire::dual).collect();
    if f.questions() != want_fx || f.answers() != want_fa {
        return Err(QsyncError::mismatch(
            format!("{} -> {}", signature(f.questions()), signature(f.answers())),
            format!("{} -> {}", signature(&want_fx), signature(&want_fa)),
        ));
    }
    let (e, f, psi): (QuantumFunction, QuantumFunction, Vec<C64>) = match psi {
        Some(p) => {
            let norm = p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > tol {
                return Err(QsyncError::UnnormalizedState { norm });
            }
            (e.clone(), f.clone(), p.to_vec())
        }
        None => {
            let hs = e.resource().dual();
            (
                e.extend_resource(&hs)?,
                f.extend_resource(&hs)?,
                normalized_cup(e.resource_dim()),
            )
        }
    };
    let h = e.resource().clone();
    let state = Morphism::state(std::slice::from_ref(&h), &psi)?;
    let fv = state
        .tensor(&Morphism::cup_list(&x))
        .then_at(0, e.map())?;
    let gv = Morphism::cup_list(&a)
        .tensor(&state)
        .then_at(a.len(), &f.map().dagger())?;
    let fm = fv.matrix();
    let gm = gv.matrix();
    let inner = gm.dotc(fm);
    let lhs = inner.norm_sqr();
    let rhs = fm.norm_squared() * gm.norm_squared();
    let partner_residual = (fm - gm).norm() / fm.norm().max(1.0);
    Ok(CsScalars {
        lhs,
        rhs,
        equality: (lhs - rhs).abs() <= tol * rhs.max(1.0),
        partner_residual,
    })
}

fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column phases so the distribution is Haar
    let mut q = q;
    for j in 0..d {
        let z = r[(j, j)];
        let ph = if z.norm() > 0.0 { z / z.norm() } else { c(1.0) };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Quantum function from operators `ops[x][a]` on `H = C^d` for classical `X`, `A`.
pub fn from_operators(x: &Wire, a: &Wire, ops: &[Vec<CMatrix>]) -> Result<Morphism> {
    let (dx, da) = (x.dim(), a.dim());
    let d = ops
        .first()
        .and_then(|row| row.first())
        .map(|m| m.nrows())
        .ok_or_else(|| QsyncError::Malformed("empty operator family".into()))?;
    if ops.len() != dx || ops.iter().any(|row| row.len() != da) {
        return Err(QsyncError::DimMismatch(format!(
            "need {dx} x {da} operators"
        )));
    }
    let h = Wire::space(d);
    let m = CMatrix::from_fn(da * d, d * dx, |row, col| {
        let (ai, h2) = (row / d, row % d);
        let (h1, xi) = (col / dx, col % dx);
        ops[xi][ai][(h2, h1)]
    });
    Morphism::new(vec![h.clone(), x.clone()], vec![a.clone(), h], m)
}

/// `*`-homomorphism `E^k_ij ↦ U E^{π(k)}_ij U†` as a map `X -> A` with trivial resource.
fn block_isomorphism(
    x: &Arc<QuantumSet>,
    a: &Arc<QuantumSet>,
    perm: &[usize],
    unitaries: &[CMatrix],
) -> Result<Morphism> {
    let mut m = CMatrix::zeros(a.dim(), x.dim());
    for (k, &n) in x.blocks().iter().enumerate() {
        let l = perm[k];
        let u = &unitaries[k];
        for i in 0..n {
            for j in 0..n {
                // U E_ij U† = Σ_st U_si conj(U_tj) E_st
                for s in 0..n {
                    for t in 0..n {
                        m[(a.index(l, s, t), x.index(k, i, j))] = u[(s, i)] * u[(t, j)].conj();
                    }
                }
            }
        }
    }
    let h = Wire::space(1);
    Morphism::new(vec![h.clone(), wire(x)], vec![wire(a), h], m)
}

/// Kinds of generated quantum functions.
#[derive(Clone, Debug)]
pub enum GenKind {
    /// A uniformly random function between classical sets.
    DetFunction,
    /// Random projective measurements on `C^d`, one family per question.
    Pvm { resource_dim: usize },
    /// Block permutation with per-block unitary conjugation.
    QsetIsomorphism,
    /// Per resource basis vector, a different quantum-set isomorphism.
    ControlledIsomorphism { resource_dim: usize },
}

pub fn gen_quantum_function(
    kind: &GenKind,
    x: &Arc<QuantumSet>,
    a: &Arc<QuantumSet>,
    seed: Seed,
) -> Result<QuantumFunction> {
    let mut rng = seed.rng();
    let (xw, aw) = (wire(x), wire(a));
    let map = match kind {
        GenKind::DetFunction => {
            require_classical(x, a)?;
            let f: Vec<usize> = (0..x.dim()).map(|_| rng.random_range(0..a.dim())).collect();
            deterministic_function(x, a, &f)?
        }
        GenKind::Pvm { resource_dim } => {
            require_classical(x, a)?;
            let d = *resource_dim;
            let mut ops = Vec::with_capacity(x.dim());
            for _ in 0..x.dim() {
                let u = random_unitary(d, &mut rng);
                let mut groups = vec![CMatrix::zeros(d, d); a.dim()];
                let mut cols: Vec<usize> = (0..d).collect();
                cols.shuffle(&mut rng);
                for (slot, col) in cols.into_iter().enumerate() {
                    let ai = if slot < a.dim() { slot } else { rng.random_range(0..a.dim()) };
                    let v = u.column(col);
                    groups[ai] += v * v.adjoint();
                }
                ops.push(groups);
            }
            from_operators(&xw, &aw, &ops)?
        }
        GenKind::QsetIsomorphism => {
            let (perm, us) = random_block_iso(x, a, &mut rng)?;
            block_isomorphism(x, a, &perm, &us)?
        }
        GenKind::ControlledIsomorphism { resource_dim } => {
            let d = *resource_dim;
            let h = Wire::space(d);
            let mut m = CMatrix::zeros(a.dim() * d, d * x.dim());
            for hi in 0..d {
                let (perm, us) = random_block_iso(x, a, &mut rng)?;
                let iso = block_isomorphism(x, a, &perm, &us)?;
                for ai in 0..a.dim() {
                    for xi in 0..x.dim() {
                        m[(ai * d + hi, hi * x.dim() + xi)] = iso.matrix()[(ai, xi)];
                    }
                }
            }
            Morphism::new(vec![h.clone(), xw], vec![aw, h], m)?
        }
    };
    QuantumFunction::new(map, 1e-8)
}

fn require_classical(x: &QuantumSet, a: &QuantumSet) -> Result<()> {
    if !x.is_classical() || !a.is_classical() {
        return Err(QsyncError::Unsatisfiable(format!(
            "{x:?} -> {a:?}: this generator needs classical sets"
        )));
    }
    Ok(())
}

fn random_block_iso<R: Rng>(
    x: &QuantumSet,
    a: &QuantumSet,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<CMatrix>)> {
    let mut xs = x.blocks().to_vec();
    let mut as_ = a.blocks().to_vec();
    xs.sort_unstable();
    as_.sort_unstable();
    if xs != as_ {
        return Err(QsyncError::Unsatisfiable(format!(
            "block profiles {:?} and {:?} are not rearrangements of each other",
            x.blocks(),
            a.blocks()
        )));
    }
    let mut targets: Vec<usize> = (0..a.blocks().len()).collect();
    targets.shuffle(rng);
    let mut used = vec![false; targets.len()];
    let mut perm = Vec::with_capacity(x.blocks().len());
    for &n in x.blocks() {
        let l = *targets
            .iter()
            .find(|&&l| !used[l] && a.blocks()[l] == n)
            .expect("profiles match");
        used[l] = true;
        perm.push(l);
    }
    let us = x.blocks().iter().map(|&n| random_unitary(n, rng)).collect();
    Ok((perm, us))
}

/// Deterministic quantum function of a function `f: X -> A` between classical sets.
pub fn deterministic_function(
    x: &Arc<QuantumSet>,
    a: &Arc<QuantumSet>,
    f: &[usize],
) -> Result<Morphism> {
    if f.len() != x.dim() || f.iter().any(|&v| v >= a.dim()) {
        return Err(QsyncError::DimMismatch(format!(
            "function table {f:?} does not map {} points into {}",
            x.dim(),
            a.dim()
        )));
    }
    let h = Wire::space(1);
    let m = CMatrix::from_fn(a.dim(), x.dim(), |r, col| if f[col] == r { c(1.0) } else { c(0.0) });
    Morphism::new(vec![h.clone(), wire(x)], vec![wire(a), h], m)
}

/// Random normalized state.
pub fn random_state<R: Rng>(d: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..d)
        .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamemaps::{canonical_game, channel_props, is_synchronous, CanonicalGame};
    use crate::qset::op_wire;
    use crate::tensor::approx_equal;

    const TOL: f64 = 1e-9;

    fn set(blocks: &[usize]) -> Arc<QuantumSet> {
        QuantumSet::new("X", blocks).unwrap()
    }

    #[test]
    fn deterministic_is_cohomomorphism() {
        let x = QuantumSet::classical("X", 3).unwrap();
        let a = QuantumSet::classical("A", 2).unwrap();
        let e = deterministic_function(&x, &a, &[0, 1, 1]).unwrap();
        assert!(is_quantum_function(&e, TOL).unwrap());
    }

    #[test]
    fn pvm_passes_and_tampered_fails() {
        let x = QuantumSet::classical("X", 2).unwrap();
        let a = QuantumSet::classical("A", 3).unwrap();
        for d in 1..=3 {
            let e = gen_quantum_function(&GenKind::Pvm { resource_dim: d }, &x, &a, Seed(d as u64)).unwrap();
            assert!(e.report().passes(TOL));
        }
        let mut ops = vec![vec![CMatrix::zeros(2, 2); 2]; 2];
        for (xi, row) in ops.iter_mut().enumerate() {
            row[0][(0, 0)] = c(1.0);
            row[1][(1, 1)] = c(1.0);
            if xi == 1 {
                row[0][(0, 1)] = c(0.5);
            }
        }
        let x2 = QuantumSet::classical("X", 2).unwrap();
        let a2 = QuantumSet::classical("A", 2).unwrap();
        let e = from_operators(&wire(&x2), &wire(&a2), &ops).unwrap();
        let r = qfunc_report(&e).unwrap();
        assert!(r.self_conj > 0.1, "{r:?}");
    }

    #[test]
    fn self_conj_reduces_to_self_adjointness() {
        // classical sets: the residual is max |P - P†| over measurement operators
        let x = QuantumSet::classical("X", 1).unwrap();
        let a = QuantumSet::classical("A", 1).unwrap();
        let mut p = CMatrix::identity(2, 2);
        p[(0, 1)] = C64::new(0.0, 0.25);
        let e = from_operators(&wire(&x), &wire(&a), &[vec![p.clone()]]).unwrap();
        let r = qfunc_report(&e).unwrap();
        let direct = crate::tensor::max_abs(&(&p - p.adjoint()));
        let scale = crate::tensor::operator_norm(&p).max(1.0);
        assert!((r.self_conj - direct / scale).abs() < 1e-12);
    }

    #[test]
    fn isomorphisms_pass() {
        let x = set(&[2, 1]);
        let a = QuantumSet::new("A", &[1, 2]).unwrap();
        let e = gen_quantum_function(&GenKind::QsetIsomorphism, &x, &a, Seed(3)).unwrap();
        assert!(e.report().passes(TOL));
        let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: 2 }, &x, &a, Seed(3)).unwrap();
        assert!(e.report().passes(TOL));
        let bad = gen_quantum_function(&GenKind::QsetIsomorphism, &set(&[2]), &QuantumSet::classical("A", 3).unwrap(), Seed(0));
        assert!(matches!(bad, Err(QsyncError::Unsatisfiable(_))));
    }

    #[test]
    fn conj_qfunc_is_quantum_function() {
        let x = set(&[2, 1]);
        let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: 2 }, &x, &x, Seed(5)).unwrap();
        let ec = e.conj();
        assert_eq!(ec.questions(), &[op_wire(&x)][..]);
        assert!(ec.report().passes(TOL), "{:?}", ec.report());
        assert!(approx_equal(ec.conj().map(), e.map(), TOL).unwrap());
        let cx = QuantumSet::classical("X", 2).unwrap();
        let p = gen_quantum_function(&GenKind::Pvm { resource_dim: 2 }, &cx, &cx, Seed(1)).unwrap();
        assert!(p.conj().report().passes(TOL));
    }

    #[test]
    fn combine_kinds() {
        let x = QuantumSet::classical("X", 2).unwrap();
        let e = gen_quantum_function(&GenKind::Pvm { resource_dim: 2 }, &x, &x, Seed(1)).unwrap();
        let f = gen_quantum_function(&GenKind::Pvm { resource_dim: 2 }, &x, &x, Seed(2)).unwrap()
            .opposite_partner()
            .unwrap();
        let t = combine(CombineKind::Tensor, &e, &f, TOL).unwrap();
        assert!(is_quantum_function(&t.map, TOL).unwrap());
        // commuting via disjoint tensor factors equals the tensor combination
        let ec = e.extend_resource(&Wire::space(2)).unwrap();
        let fc = f.extend_resource_left(&Wire::space(2)).unwrap();
        let cm = combine(CombineKind::Commuting, &ec, &fc, TOL).unwrap();
        assert!(crate::tensor::approx_equal_matrix(&cm.map, &t.map, TOL));
        // non-commuting random PVMs on the same space
        let f2 = gen_quantum_function(&GenKind::Pvm { resource_dim: 2 }, &x, &x, Seed(9)).unwrap()
            .opposite_partner()
            .unwrap();
        assert!(matches!(
            combine(CombineKind::Commuting, &e, &f2, TOL),
            Err(QsyncError::CommutationFailure { .. })
        ));
        assert!(matches!(
            combine(CombineKind::Deterministic, &e, &f, TOL),
            Err(QsyncError::DimMismatch(_))
        ));
    }

    #[test]
    fn deterministic_product_function() {
        let x = QuantumSet::classical("X", 2).unwrap();
        let a = QuantumSet::classical("A", 3).unwrap();
        let e = QuantumFunction::new(deterministic_function(&x, &a, &[2, 0]).unwrap(), TOL).unwrap();
        let f = QuantumFunction::new(deterministic_function(&x, &a, &[1, 1]).unwrap(), TOL)
            .unwrap()
            .opposite_partner()
            .unwrap();
        let d = combine(CombineKind::Deterministic, &e, &f, TOL).unwrap();
        let p = realize_correlation(&d.map, &[c(1.0)], TOL).unwrap();
        for xi in 0..2 {
            for yi in 0..2 {
                let want = [2, 0][xi] * 3 + 1;
                for r in 0..9 {
                    let v = p.matrix()[(r, xi * 2 + yi)];
                    assert_eq!(v, if r == want { c(1.0) } else { c(0.0) });
                }
            }
        }
    }

    #[test]
    fn realized_correlations_are_channels() {
        let x = QuantumSet::classical("X", 2).unwrap();
        let e = gen_quantum_function(&GenKind::Pvm { resource_dim: 2 }, &x, &x, Seed(11)).unwrap();
        let f = gen_quantum_function(&GenKind::Pvm { resource_dim: 2 }, &x, &x, Seed(12))
            .unwrap()
            .opposite_partner()
            .unwrap();
        let t = combine(CombineKind::Tensor, &e, &f, TOL).unwrap();
        let psi = normalized_cup(2);
        let p = realize_correlation(&t.map, &psi, TOL).unwrap();
        assert!(channel_props(&p).unwrap().is_channel(TOL));
        // p(a,b|x,y) = <ψ| P_x^a ⊗ Q_y^b |ψ>
        let ops = |q: &QuantumFunction, xi: usize, ai: usize| -> CMatrix {
            CMatrix::from_fn(2, 2, |h2, h1| q.map().matrix()[(ai * 2 + h2, h1 * 2 + xi)])
        };
        let psi_v = nalgebra::DVector::from_vec(psi.clone());
        for xi in 0..2 {
            for yi in 0..2 {
                for ai in 0..2 {
                    for bi in 0..2 {
                        let op = ops(&e, xi, ai).kronecker(&ops(&f, yi, bi));
                        let want = psi_v.dotc(&(&op * &psi_v));
                        let got = p.matrix()[(ai * 2 + bi, xi * 2 + yi)];
                        assert!((want - got).norm() < TOL);
                    }
                }
            }
        }
        let bad: Vec<C64> = vec![c(1.0); 4];
        assert!(matches!(
            realize_correlation(&t.map, &bad, TOL),
            Err(QsyncError::UnnormalizedState { .. })
        ));
    }

    #[test]
    fn identity_strategy_is_perfect_for_identity_game() {
        let x = set(&[2]);
        let xx = [wire(&x), op_wire(&x)];
        let h = Wire::space(1);
        let mut dom = vec![h.clone()];
        dom.extend(xx.iter().cloned());
        let mut cod = xx.to_vec();
        cod.push(h);
        let phi = Morphism::identity(&dom).relabel(&dom, &cod).unwrap();
        let l = canonical_game(CanonicalGame::Identity, &[wire(&x)], &[]).unwrap();
        assert!(is_perfect_strategy(&phi, &l, TOL).unwrap());
        assert!(sync_strategy_status(&phi).unwrap().bisynchronous(TOL));
    }

    #[test]
    fn e_with_conjugate_realizes_synchronous() {
        let x = set(&[2, 1]);
        let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: 2 }, &x, &x, Seed(4)).unwrap();
        let t = combine(CombineKind::Tensor, &e, &e.conj(), TOL).unwrap();
        let p = realize_correlation(&t.map, &normalized_cup(2), TOL).unwrap();
        assert!(is_synchronous(&p, TOL).unwrap());
    }

    #[test]
    fn flip_of_bijection_and_non_injection() {
        let x = QuantumSet::classical("X", 3).unwrap();
        let e = deterministic_function(&x, &x, &[2, 0, 1]).unwrap();
        assert!(is_bistrategy(&e, TOL).unwrap());
        let a = QuantumSet::classical("A", 3).unwrap();
        let g = deterministic_function(&x, &a, &[0, 0, 1]).unwrap();
        let r = qfunc_report(&flip_strategy(&g).unwrap()).unwrap();
        assert!(r.counital > 0.1);
        let q = set(&[2]);
        let iso = gen_quantum_function(&GenKind::QsetIsomorphism, &q, &q, Seed(2)).unwrap();
        assert!(is_bistrategy(iso.map(), TOL).unwrap());
    }

    #[test]
    fn extraction_recovers_alice() {
        let x = QuantumSet::classical("X", 2).unwrap();
        let e = gen_quantum_function(&GenKind::Pvm { resource_dim: 2 }, &x, &x, Seed(1)).unwrap();
        let f = gen_quantum_function(&GenKind::Pvm { resource_dim: 2 }, &x, &x, Seed(2))
            .unwrap()
            .opposite_partner()
            .unwrap();
        let ec = e.extend_resource(&Wire::space(2)).unwrap();
        let fc = f.extend_resource_left(&Wire::space(2)).unwrap();
        let cm = combine(CombineKind::Commuting, &ec, &fc, TOL).unwrap();
        let got = extract_alice(&cm.map).unwrap();
        assert!(crate::tensor::approx_equal_matrix(&got, ec.map(), TOL));
    }

    #[test]
    fn cauchy_schwarz() {
        let x = set(&[2, 1]);
        let mut seed = Seed(1);
        for d in 1..=2 {
            seed = seed.index(d as u64);
            let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: d }, &x, &x, seed).unwrap();
            let f = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: d }, &x, &x, seed.split("f"))
                .unwrap()
                .opposite_partner()
                .unwrap();
            let psi = random_state(d, &mut seed.rng());
            let s = cs_scalars(&e, &f, Some(&psi), TOL).unwrap();
            assert!(s.lhs <= s.rhs + TOL);
            let partner = e.opposite_partner().unwrap();
            let s = cs_scalars(&e, &partner, Some(&psi), TOL).unwrap();
            assert!(s.equality && s.partner_residual <= TOL, "{s:?}");
            let s = cs_scalars(&e, &partner, None, TOL).unwrap();
            assert!(s.equality && s.partner_residual <= TOL, "{s:?}");
        }
    }
}
