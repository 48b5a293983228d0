//! Quantum graphs and the homomorphism and isomorphism games.

use std::sync::Arc;

use crate::error::{QsyncError, Result};
use crate::gamemaps::{commutes, is_bicorrelation, is_perfect, perfect_residual, star, sync_status};
use crate::qset::{counit, mult, op_wire, share, unit, wire, QuantumSet};
use crate::strategies::{
    combine, commuting_product, extract_alice, flip_strategy, is_perfect_strategy, normalized_cup, qfunc_report,
    realize_correlation, sync_strategy_status, CombineKind, CombinedStrategy, Provenance,
    QuantumFunction,
};
use crate::tensor::{c, matrix_residual, max_abs, residual, CMatrix, Morphism, Wire};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphReport {
    pub idempotent: f64,
    pub self_adjoint: f64,
    pub self_conjugate: f64,
    pub irreflexive_thin: f64,
    pub irreflexive_thick: f64,
}

impl GraphReport {
    pub fn valid(&self, tol: f64) -> bool {
        self.idempotent <= tol && self.self_adjoint <= tol && self.self_conjugate <= tol
    }
}

/// Residuals of the graph axioms and of both irreflexivity forms for `G: X -> X`.
pub fn graph_report(set: &Arc<QuantumSet>, g: &Morphism) -> Result<GraphReport> {
    let x = wire(set);
    let id = Morphism::identity(std::slice::from_ref(&x));
    if g.dom() != [x.clone()] || g.cod() != [x.clone()] {
        return Err(QsyncError::InvalidGraph(format!(
            "adjacency map must be {x} -> {x}, got {g:?}"
        )));
    }
    let idempotent = residual(&star(g, g)?, g)?;
    let self_adjoint = residual(&g.dagger(), g)?;
    let self_conjugate = matrix_residual(g.conjugate().matrix(), g.matrix());
    let m = mult(std::slice::from_ref(&x))?;
    let thin = m.compose(&g.tensor(&id))?.compose(&m.dagger())?;
    let irreflexive_thin = max_abs(thin.matrix());
    let state = state_of(&x, g)?;
    let irreflexive_thick = max_abs(share(set).compose(&state)?.matrix());
    Ok(GraphReport {
        idempotent,
        self_adjoint,
        self_conjugate,
        irreflexive_thin,
        irreflexive_thick,
    })
}

fn state_of(x: &Wire, g: &Morphism) -> Result<Morphism> {
    Morphism::cup(x).then_at(0, g)
}

#[derive(Clone, Debug)]
pub struct QuantumGraph {
    set: Arc<QuantumSet>,
    g: Morphism,
    irreflexive: bool,
}

impl QuantumGraph {
    pub fn new(set: Arc<QuantumSet>, g: Morphism, tol: f64) -> Result<Self> {
        let r = graph_report(&set, &g)?;
        if !r.valid(tol) {
            return Err(QsyncError::InvalidGraph(format!(
                "idempotent {:.3e}, self-adjoint {:.3e}, self-conjugate {:.3e}",
                r.idempotent, r.self_adjoint, r.self_conjugate
            )));
        }
        let thin = r.irreflexive_thin <= tol;
        let thick = r.irreflexive_thick <= tol;
        if thin != thick {
            return Err(QsyncError::DiagramMismatch(format!(
                "irreflexivity forms disagree: thin {:.3e}, thick {:.3e}",
                r.irreflexive_thin, r.irreflexive_thick
            )));
        }
        Ok(QuantumGraph {
            set,
            g,
            irreflexive: thin,
        })
    }

    /// Classical graph from a symmetric 0-1 adjacency matrix.
    pub fn classical(name: &str, adjacency: &[Vec<u8>], tol: f64) -> Result<Self> {
        let n = adjacency.len();
        for (i, row) in adjacency.iter().enumerate() {
            if row.len() != n {
                return Err(QsyncError::InvalidAdjacency(format!("row {i} has length {}", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(QsyncError::InvalidAdjacency(format!("entry ({i},{j}) = {v}")));
                }
                if adjacency[j][i] != v {
                    return Err(QsyncError::InvalidAdjacency(format!("not symmetric at ({i},{j})")));
                }
            }
        }
        let set = QuantumSet::classical(name, n)?;
        let x = wire(&set);
        let m = CMatrix::from_fn(n, n, |i, j| c(adjacency[i][j] as f64));
        QuantumGraph::new(set, Morphism::new(vec![x.clone()], vec![x], m)?, tol)
    }

    /// `u ∘ ε - id`.
    pub fn complete(set: Arc<QuantumSet>, tol: f64) -> Result<Self> {
        let w = [wire(&set)];
        let g = unit(&w)?.compose(&counit(&w)?)?.sub(&Morphism::identity(&w))?;
        QuantumGraph::new(set, g, tol)
    }

    pub fn reflexive_identity(set: Arc<QuantumSet>, tol: f64) -> Result<Self> {
        let g = Morphism::identity(&[wire(&set)]);
        QuantumGraph::new(set, g, tol)
    }

    pub fn set(&self) -> &Arc<QuantumSet> {
        &self.set
    }

    pub fn adjacency(&self) -> &Morphism {
        &self.g
    }

    pub fn is_irreflexive(&self) -> bool {
        self.irreflexive
    }

    pub fn wire(&self) -> Wire {
        wire(&self.set)
    }

    fn require_irreflexive(&self) -> Result<()> {
        if !self.irreflexive {
            let r = graph_report(&self.set, &self.g)?;
            return Err(QsyncError::NotIrreflexive {
                residual: r.irreflexive_thin,
            });
        }
        Ok(())
    }

    /// `|G⟩ = (G ⊗ id) ∘ cup` on `X ⊗ Xᵒᵖ`.
    pub fn graph_state(&self) -> Morphism {
        state_of(&self.wire(), &self.g).expect("well typed")
    }

    /// `v ↦ m(v ⊗ |G⟩)` on `X ⊗ Xᵒᵖ`.
    pub fn edge_projection(&self) -> Morphism {
        let xx = [self.wire(), op_wire(&self.set)];
        let m = mult(&xx).expect("quantum set wires");
        let right = Morphism::identity(&xx).tensor(&self.graph_state());
        m.compose(&right).expect("well typed")
    }
}

/// Cycle graph on `n` vertices.
pub fn cycle(n: usize) -> Vec<Vec<u8>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| u8::from((i + 1) % n == j || (j + 1) % n == i))
                .collect()
        })
        .collect()
}

/// Complete graph on `n` vertices.
pub fn complete_adjacency(n: usize) -> Vec<Vec<u8>> {
    (0..n)
        .map(|i| (0..n).map(|j| u8::from(i != j)).collect())
        .collect()
}

/// The five terms of the homomorphism game, in order
/// `|H⟩⟨G|`, `cup_A cap_X`, `(u⊗u)(ε⊗ε)`, `(u⊗u)⟨G|`, `(u⊗u) cap_X`.
pub fn hom_terms(g: &QuantumGraph, h: &QuantumGraph) -> Result<[Morphism; 5]> {
    let x = [g.wire()];
    let a = [h.wire()];
    let xx = [g.wire(), op_wire(g.set())];
    let aa = [h.wire(), op_wire(h.set())];
    let bra_g = g.graph_state().dagger();
    let uu = unit(&aa)?;
    let t1 = h.graph_state().compose(&bra_g)?;
    let t2 = Morphism::cup_list(&a).compose(&Morphism::cap_list(&x))?;
    let t3 = uu.compose(&counit(&xx)?)?;
    let t4 = uu.compose(&bra_g)?;
    let t5 = uu.compose(&Morphism::cap_list(&x))?;
    Ok([t1, t2, t3, t4, t5])
}

/// Signs of the five terms in the game.
pub const HOM_SIGNS: [f64; 5] = [1.0, 1.0, 1.0, -1.0, -1.0];

/// `star(T_i, T_j)` as a signed term: entry `[i][j] = (sign, k)` means `sign · T_k`,
/// with `k = None` for zero.
pub const HOM_TABLE: [[(f64, Option<usize>); 5]; 5] = [
    [(1.0, Some(0)), (0.0, None), (1.0, Some(0)), (-1.0, Some(0)), (0.0, None)],
    [(0.0, None), (1.0, Some(1)), (1.0, Some(1)), (0.0, None), (-1.0, Some(1))],
    [(1.0, Some(0)), (1.0, Some(1)), (1.0, Some(2)), (-1.0, Some(3)), (-1.0, Some(4))],
    [(-1.0, Some(0)), (0.0, None), (-1.0, Some(3)), (1.0, Some(3)), (0.0, None)],
    [(0.0, None), (-1.0, Some(1)), (-1.0, Some(4)), (0.0, None), (1.0, Some(4))],
];

pub fn hom_game(g: &QuantumGraph, h: &QuantumGraph) -> Result<Morphism> {
    g.require_irreflexive()?;
    h.require_irreflexive()?;
    let t = hom_terms(g, h)?;
    let mut acc = t[0].clone();
    for (term, sign) in t.iter().zip(HOM_SIGNS).skip(1) {
        acc = acc.add(&term.scale(c(sign)))?;
    }
    Ok(acc)
}

/// The unfair graph game `|H⟩⟨G|`: only edge questions are answered, and only by edges.
pub fn unfair_graph_game(g: &QuantumGraph, h: &QuantumGraph) -> Result<Morphism> {
    g.require_irreflexive()?;
    h.require_irreflexive()?;
    h.graph_state().compose(&g.graph_state().dagger())
}

/// Largest deviation between the tabulated products and the computed ones
/// (with the signs of the game folded in).
pub fn hom_table_residual(g: &QuantumGraph, h: &QuantumGraph) -> Result<f64> {
    let t = hom_terms(g, h)?;
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            let lhs = star(&t[i].scale(c(HOM_SIGNS[i])), &t[j].scale(c(HOM_SIGNS[j])))?;
            let (sign, k) = HOM_TABLE[i][j];
            let rhs = match k {
                Some(k) => t[k].scale(c(sign)),
                None => Morphism::zero(lhs.dom(), lhs.cod()),
            };
            worst = worst.max(residual(&lhs, &rhs)?);
        }
    }
    Ok(worst)
}

pub fn iso_game(g: &QuantumGraph, h: &QuantumGraph, tol: f64) -> Result<Morphism> {
    let gh = hom_game(g, h)?;
    let hg = hom_game(h, g)?.dagger();
    if !commutes(&gh, &hg, tol)? {
        let r = residual(&star(&gh, &hg)?, &star(&hg, &gh)?)?;
        return Err(QsyncError::CommutationFailure { residual: r });
    }
    star(&gh, &hg)
}

/// Residual of the homomorphism condition. With `E²` the map `E` played twice on the
/// shared resource (`(id_A ⊗ E) ∘ (E ⊗ id_X)`, the second copy read on opposite wires),
/// edges must go to edges: `(P_H ⊗ id) ∘ E² ∘ (id ⊗ P_G) = E² ∘ (id ⊗ P_G)`.
pub fn quantum_graph_hom_residual(e: &Morphism, g: &QuantumGraph, h: &QuantumGraph) -> Result<f64> {
    let ef = QuantumFunction::new_unchecked(e.clone())?;
    let twice = commuting_product(&ef, &ef.opposite_partner()?)?;
    let fed = twice.before_at(1, &g.edge_projection())?;
    residual(&fed.then_at(0, &h.edge_projection())?, &fed)
}

/// Residual of the intertwining `E ∘ (id_H ⊗ G) = (H ⊗ id_H) ∘ E`.
pub fn graph_intertwining_residual(e: &Morphism, g: &QuantumGraph, h: &QuantumGraph) -> Result<f64> {
    let lhs = e.before_at(1, g.adjacency())?;
    let rhs = e.then_at(0, h.adjacency())?;
    residual(&lhs, &rhs)
}

pub fn is_quantum_graph_hom(e: &Morphism, g: &QuantumGraph, h: &QuantumGraph, tol: f64) -> Result<bool> {
    let r = qfunc_report(e)?;
    if let Some((name, res)) = r.first_failure(tol) {
        return Err(QsyncError::InvalidQuantumFunction(format!("{name} residual {res:.3e}")));
    }
    Ok(quantum_graph_hom_residual(e, g, h)? <= tol)
}

/// Edges go to edges: `P_H ∘ P ∘ P_G = P ∘ P_G`.
pub fn hom_intertwining_residual(p: &Morphism, g: &QuantumGraph, h: &QuantumGraph) -> Result<f64> {
    let pg = p.compose(&g.edge_projection())?;
    residual(&h.edge_projection().compose(&pg)?, &pg)
}

/// `P ∘ P_G = P_H ∘ P`.
pub fn iso_intertwining_residual(p: &Morphism, g: &QuantumGraph, h: &QuantumGraph) -> Result<f64> {
    residual(&p.compose(&g.edge_projection())?, &h.edge_projection().compose(p)?)
}

/// Perfect correlation from a quantum graph homomorphism: `E ⊗ E_*` with the cup state.
pub fn hom_to_correlation(e: &QuantumFunction, g: &QuantumGraph, h: &QuantumGraph, tol: f64) -> Result<Morphism> {
    if !is_quantum_graph_hom(e.map(), g, h, tol)? {
        return Err(QsyncError::InvalidQuantumFunction(format!(
            "not a quantum graph homomorphism (residual {:.3e})",
            quantum_graph_hom_residual(e.map(), g, h)?
        )));
    }
    let phi = combine(CombineKind::Tensor, e, &e.conj(), tol)?;
    let p = realize_correlation(&phi.map, &normalized_cup(e.resource_dim()), tol)?;
    let lambda = hom_game(g, h)?;
    if !is_perfect(&p, &lambda, tol)? {
        return Err(QsyncError::ExtractionFailure(format!(
            "realized correlation is not perfect (residual {:.3e})",
            perfect_residual(&p, &lambda)?
        )));
    }
    Ok(p)
}

/// Quantum graph homomorphism carried by a perfect quantum-commuting strategy.
pub fn extract_hom(phi: &CombinedStrategy, g: &QuantumGraph, h: &QuantumGraph, tol: f64) -> Result<QuantumFunction> {
    match &phi.provenance {
        Provenance::Combined {
            kind: CombineKind::Commuting | CombineKind::Deterministic,
            ..
        }
        | Provenance::Raw => {}
        Provenance::Combined { kind, .. } => {
            return Err(QsyncError::ExtractionFailure(format!(
                "{kind:?} strategies are outside the proven scope"
            )))
        }
    }
    let lambda = hom_game(g, h)?;
    if !is_perfect_strategy(&phi.map, &lambda, tol)? {
        return Err(QsyncError::ExtractionFailure(format!(
            "strategy is not perfect (residual {:.3e})",
            crate::strategies::perfect_strategy_residual(&phi.map, &lambda)?
        )));
    }
    let s = sync_strategy_status(&phi.map)?;
    if !s.synchronous(tol) {
        return Err(QsyncError::ExtractionFailure(format!(
            "perfect strategy is not synchronous (residual {:.3e})",
            s.synchronous
        )));
    }
    let e = extract_alice(&phi.map)?;
    let r = qfunc_report(&e)?;
    if let Some((name, res)) = r.first_failure(tol) {
        return Err(QsyncError::ExtractionFailure(format!("{name} residual {res:.3e}")));
    }
    let gr = quantum_graph_hom_residual(&e, g, h)?;
    if gr > tol {
        return Err(QsyncError::ExtractionFailure(format!(
            "extracted map does not intertwine the graphs (residual {gr:.3e})"
        )));
    }
    QuantumFunction::new(e, tol)
}

/// Perfect bicorrelation for the isomorphism game from a quantum graph isomorphism.
pub fn iso_to_bicorrelation(e: &QuantumFunction, g: &QuantumGraph, h: &QuantumGraph, tol: f64) -> Result<Morphism> {
    let flipped = flip_strategy(e.map())?;
    let fr = qfunc_report(&flipped)?;
    if let Some((name, res)) = fr.first_failure(tol) {
        return Err(QsyncError::InvalidQuantumFunction(format!(
            "not a quantum bijection: flipped {name} residual {res:.3e}"
        )));
    }
    let gr = graph_intertwining_residual(e.map(), g, h)?;
    if gr > tol {
        return Err(QsyncError::InvalidQuantumFunction(format!(
            "map does not intertwine the graphs (residual {gr:.3e})"
        )));
    }
    let p = hom_to_correlation(e, g, h, tol)?;
    let lambda = iso_game(g, h, tol)?;
    if !is_perfect(&p, &lambda, tol)? || !is_bicorrelation(&p, tol)? {
        return Err(QsyncError::ExtractionFailure(format!(
            "not a perfect bicorrelation (residual {:.3e})",
            perfect_residual(&p, &lambda)?
        )));
    }
    Ok(p)
}

/// Quantum graph isomorphism carried by a perfect quantum-commuting bistrategy.
pub fn extract_iso(phi: &CombinedStrategy, g: &QuantumGraph, h: &QuantumGraph, tol: f64) -> Result<QuantumFunction> {
    let lambda = iso_game(g, h, tol)?;
    if !is_perfect_strategy(&phi.map, &lambda, tol)? {
        return Err(QsyncError::ExtractionFailure("strategy is not perfect for the isomorphism game".into()));
    }
    let fr = qfunc_report(&flip_strategy(&phi.map)?)?;
    if let Some((name, res)) = fr.first_failure(tol) {
        return Err(QsyncError::ExtractionFailure(format!("not a bistrategy: {name} residual {res:.3e}")));
    }
    let e = extract_alice(&phi.map)?;
    let e = QuantumFunction::new(e, tol).map_err(|err| QsyncError::ExtractionFailure(err.to_string()))?;
    let fe = qfunc_report(&flip_strategy(e.map())?)?;
    if let Some((name, res)) = fe.first_failure(tol) {
        return Err(QsyncError::ExtractionFailure(format!("extracted map is not a bijection: {name} residual {res:.3e}")));
    }
    let gr = graph_intertwining_residual(e.map(), g, h)?;
    if gr > tol {
        return Err(QsyncError::ExtractionFailure(format!("extracted map does not intertwine the graphs (residual {gr:.3e})")));
    }
    Ok(e)
}

/// Whether `sync_status` reports the map bisynchronous.
pub fn is_bisynchronous(f: &Morphism, tol: f64) -> Result<bool> {
    Ok(sync_status(f)?.bisynchronous(tol))
}
