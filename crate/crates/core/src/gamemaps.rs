//! Games, correlations and their properties.
//!
//! Maps act on thick wires: a question space `X ⊗ Y` is split into two equal
//! halves of the domain, and likewise for answers.

use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{QsyncError, Result};
use crate::qset::{comult, counit, product_table, schur_cfa, share_wires, unit, MultEntry, SchurSign};
use crate::tensor::{
    approx_equal, c, dual_wires, matrix_residual, residual, signature, wires_dim, CMatrix,
    Morphism, Wire, C64,
};

fn grouped(table: Vec<MultEntry>, n: usize) -> Vec<Vec<(usize, usize, f64)>> {
    let mut g = vec![Vec::new(); n];
    for e in table {
        g[e.out].push((e.left, e.right, e.coef));
    }
    g
}

/// Commuting product `m_cod ∘ (f ⊗ g) ∘ Δ_dom` with the product structures.
pub fn star(f: &Morphism, g: &Morphism) -> Result<Morphism> {
    f.check_same_signature(g)?;
    let rows = wires_dim(f.cod());
    let cols = wires_dim(f.dom());
    let tc = grouped(product_table(f.cod())?, rows);
    let td = grouped(product_table(f.dom())?, cols);
    let (fm, gm) = (f.matrix(), g.matrix());
    let mut out = CMatrix::zeros(rows, cols);
    for (r, cod_terms) in tc.iter().enumerate() {
        for (col, dom_terms) in td.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &(p, q, a) in cod_terms {
                for &(s, t, b) in dom_terms {
                    acc += fm[(p, s)] * gm[(q, t)] * (a * b);
                }
            }
            out[(r, col)] = acc;
        }
    }
    Morphism::new(f.dom().to_vec(), f.cod().to_vec(), out)
}

/// Commuting product with a resource wire threaded through `phi`:
/// `lambda: Q -> R`, `phi: H ⊗ Q -> R ⊗ H`.
pub fn star_threaded(lambda: &Morphism, phi: &Morphism) -> Result<Morphism> {
    let (h, q, r) = split_strategy(phi)?;
    if lambda.dom() != q || lambda.cod() != r {
        return Err(QsyncError::mismatch(
            format!("{} -> {}", signature(lambda.dom()), signature(lambda.cod())),
            format!("{} -> {}", signature(q), signature(r)),
        ));
    }
    let hd = h.dim();
    let (rows, cols) = (wires_dim(r), wires_dim(q));
    let tc = grouped(product_table(r)?, rows);
    let td = grouped(product_table(q)?, cols);
    let (lm, pm) = (lambda.matrix(), phi.matrix());
    let mut out = CMatrix::zeros(rows * hd, hd * cols);
    for (rr, cod_terms) in tc.iter().enumerate() {
        for (cc, dom_terms) in td.iter().enumerate() {
            for &(p, qq, a) in cod_terms {
                for &(s, t, b) in dom_terms {
                    let w = lm[(p, s)] * (a * b);
                    if w == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for h2 in 0..hd {
                        for h1 in 0..hd {
                            out[(rr * hd + h2, h1 * cols + cc)] += w * pm[(qq * hd + h2, h1 * cols + t)];
                        }
                    }
                }
            }
        }
    }
    Morphism::new(phi.dom().to_vec(), phi.cod().to_vec(), out)
}

/// Split `H ⊗ Q -> R ⊗ H` into its parts.
pub(crate) fn split_strategy(phi: &Morphism) -> Result<(&Wire, &[Wire], &[Wire])> {
    let (dom, cod) = (phi.dom(), phi.cod());
    if dom.is_empty() || cod.is_empty() || dom[0] != cod[cod.len() - 1] || dom[0].is_qset() {
        return Err(QsyncError::InvalidQuantumFunction(format!(
            "expected H (x) X -> A (x) H, got {} -> {}",
            signature(dom),
            signature(cod)
        )));
    }
    Ok((&dom[0], &dom[1..], &cod[..cod.len() - 1]))
}

pub fn commutes(f: &Morphism, g: &Morphism, tol: f64) -> Result<bool> {
    Ok(residual(&star(f, g)?, &star(g, f)?)? <= tol)
}

/// Split an even wire list into two halves.
pub(crate) fn halves(wires: &[Wire]) -> Result<(&[Wire], &[Wire])> {
    if wires.is_empty() || !wires.len().is_multiple_of(2) {
        return Err(QsyncError::OppositeStructureMissing(signature(wires)));
    }
    Ok(wires.split_at(wires.len() / 2))
}

/// Split and require the second half to be the dual of the first.
pub(crate) fn opposite_halves(wires: &[Wire]) -> Result<&[Wire]> {
    let (l, r) = halves(wires)?;
    if dual_wires(l) != r || !l.iter().all(Wire::is_qset) {
        return Err(QsyncError::OppositeStructureMissing(signature(wires)));
    }
    Ok(l)
}

/// Tensor product of games with wires crossed so each player keeps their own legs.
pub fn tensor_game(l1: &Morphism, l2: &Morphism) -> Result<Morphism> {
    let (x1, y1) = halves(l1.dom())?;
    let (x2, y2) = halves(l2.dom())?;
    let (a1, b1) = halves(l1.cod())?;
    let (a2, b2) = halves(l2.cod())?;
    let t = l1.tensor(l2);
    let (nx1, ny1, nx2, ny2) = (x1.len(), y1.len(), x2.len(), y2.len());
    // dom order [X1, Y1, X2, Y2] -> [X1, X2, Y1, Y2]
    let dom_perm: Vec<usize> = (0..nx1)
        .chain(nx1 + ny1..nx1 + ny1 + nx2)
        .chain(nx1..nx1 + ny1)
        .chain(nx1 + ny1 + nx2..nx1 + ny1 + nx2 + ny2)
        .collect();
    let (na1, nb1, na2, nb2) = (a1.len(), b1.len(), a2.len(), b2.len());
    let cod_perm: Vec<usize> = (0..na1)
        .chain(na1 + nb1..na1 + nb1 + na2)
        .chain(na1..na1 + nb1)
        .chain(na1 + nb1 + na2..na1 + nb1 + na2 + nb2)
        .collect();
    t.permute_dom(&dom_perm)?.permute_cod(&cod_perm)
}

/// Residuals of the two game equations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameReport {
    pub idempotent: f64,
    pub self_conjugate: f64,
}

impl GameReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.idempotent <= tol && self.self_conjugate <= tol
    }
}

/// `λ ⋆ λ = λ` and `λ_* = λ`, the conjugate read through `Xᵒᵖ ≅ X` wire by wire.
pub fn game_report(lambda: &Morphism) -> Result<GameReport> {
    let idempotent = residual(&star(lambda, lambda)?, lambda)?;
    let self_conjugate = matrix_residual(lambda.conjugate().matrix(), lambda.matrix());
    Ok(GameReport {
        idempotent,
        self_conjugate,
    })
}

pub fn is_game(lambda: &Morphism, tol: f64) -> Result<bool> {
    Ok(game_report(lambda)?.passes(tol))
}

fn require_game(lambda: &Morphism, tol: f64) -> Result<()> {
    let r = game_report(lambda)?;
    if !r.passes(tol) {
        return Err(QsyncError::NotAGame {
            residual: r.idempotent.max(r.self_conjugate),
        });
    }
    Ok(())
}

/// Embedding of one wire's basis into a full matrix algebra `M_N`, `N = Σ n_k`:
/// basis index -> (row, col). Opposite wires embed transposed.
fn embedding(w: &Wire) -> Result<(usize, Vec<(usize, usize)>)> {
    let (set, op) = w.qset().ok_or_else(|| {
        QsyncError::OppositeStructureMissing(format!("complete positivity needs quantum set wires, got {w}"))
    })?;
    let mut shift = Vec::with_capacity(set.blocks().len());
    let mut n = 0;
    for &b in set.blocks() {
        shift.push(n);
        n += b;
    }
    let map = (0..set.dim())
        .map(|p| {
            let (k, i, j) = set.unit_of(p);
            if op {
                (shift[k] + j, shift[k] + i)
            } else {
                (shift[k] + i, shift[k] + j)
            }
        })
        .collect();
    Ok((n, map))
}

fn list_embedding(wires: &[Wire]) -> Result<(usize, Vec<(usize, usize)>)> {
    let mut acc = (1usize, vec![(0usize, 0usize)]);
    for w in wires {
        let (n, e) = embedding(w)?;
        let mut next = Vec::with_capacity(acc.1.len() * e.len());
        for &(r0, c0) in &acc.1 {
            for &(r1, c1) in &e {
                next.push((r0 * n + r1, c0 * n + c1));
            }
        }
        acc = (acc.0 * n, next);
    }
    Ok(acc)
}

/// Choi matrix of `f` extended by pinching to the full matrix algebras.
pub fn choi_matrix(f: &Morphism) -> Result<CMatrix> {
    let (nd, ed) = list_embedding(f.dom())?;
    let (nc, ec) = list_embedding(f.cod())?;
    let mut ch = CMatrix::zeros(nd * nc, nd * nc);
    let m = f.matrix();
    for (p, &(a, b)) in ed.iter().enumerate() {
        for (q, &(r, s)) in ec.iter().enumerate() {
            let v = m[(q, p)];
            if v != C64::new(0.0, 0.0) {
                ch[(a * nc + r, b * nc + s)] += v;
            }
        }
    }
    Ok(ch)
}

/// Smallest Choi eigenvalue, or `-inf` when the Choi matrix is not Hermitian.
pub fn cp_residual(f: &Morphism) -> Result<f64> {
    let ch = choi_matrix(f)?;
    let herm = matrix_residual(&ch, &ch.adjoint());
    let eig = SymmetricEigen::new((&ch + ch.adjoint()) * c(0.5));
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    // residual: how far from positive semidefinite
    Ok(herm.max((-min).max(0.0)))
}

pub fn is_cp(f: &Morphism, tol: f64) -> Result<bool> {
    Ok(cp_residual(f)? <= tol)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelReport {
    pub cp: f64,
    pub counital: f64,
    pub unital: f64,
}

impl ChannelReport {
    pub fn is_channel(&self, tol: f64) -> bool {
        self.cp <= tol && self.counital <= tol
    }
    pub fn is_unital_channel(&self, tol: f64) -> bool {
        self.is_channel(tol) && self.unital <= tol
    }
}

pub fn channel_props(f: &Morphism) -> Result<ChannelReport> {
    let cp = cp_residual(f)?;
    let counital = residual(&counit(f.cod())?.compose(f)?, &counit(f.dom())?)?;
    let unital = residual(&f.compose(&unit(f.dom())?)?, &unit(f.cod())?)?;
    Ok(ChannelReport {
        cp,
        counital,
        unital,
    })
}

pub fn is_correlation(p: &Morphism, tol: f64) -> Result<bool> {
    Ok(channel_props(p)?.is_channel(tol))
}

pub fn is_bicorrelation(p: &Morphism, tol: f64) -> Result<bool> {
    Ok(is_correlation(p, tol)? && is_correlation(&p.dagger(), tol)?)
}

#[derive(Clone, Debug)]
pub struct Marginals {
    pub is_ns: bool,
    pub residual: f64,
    pub p_a: Morphism,
    pub p_b: Morphism,
}

/// Candidate marginals `(id ⊗ ε) ∘ P ∘ Δ` and the non-signalling test.
pub fn nonsignalling_marginals(p: &Morphism, tol: f64) -> Result<Marginals> {
    let (x, y) = halves(p.dom())?;
    let (a, b) = halves(p.cod())?;
    let eps_b = counit(b)?;
    let eps_a = counit(a)?;
    let left = p.then_at(a.len(), &eps_b)?; // X ⊗ Y -> A
    let right = p.then_at(0, &eps_a)?; // X ⊗ Y -> B
    let dx = comult(x)?;
    let mut xy = x.to_vec();
    xy.extend(y.iter().cloned());
    let p_a = left.compose(&dx.relabel(x, &xy)?)?;
    let mut xy_from_y = x.to_vec();
    xy_from_y.extend(y.iter().cloned());
    let dy = comult(y)?.relabel(y, &xy_from_y)?;
    let p_b = right.compose(&dy)?;
    let eps_y = counit(y)?;
    let eps_x = counit(x)?;
    let r1 = residual(&left, &p_a.tensor(&eps_y))?;
    let r2 = residual(&right, &eps_x.tensor(&p_b))?;
    let res = r1.max(r2);
    Ok(Marginals {
        is_ns: res <= tol,
        residual: res,
        p_a,
        p_b,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyncReport {
    pub synchronous: f64,
    pub cosynchronous: f64,
    pub preserves_sharing: f64,
}

impl SyncReport {
    pub fn synchronous(&self, tol: f64) -> bool {
        self.synchronous <= tol
    }
    pub fn cosynchronous(&self, tol: f64) -> bool {
        self.cosynchronous <= tol
    }
    pub fn bisynchronous(&self, tol: f64) -> bool {
        self.synchronous(tol) && self.cosynchronous(tol)
    }
    pub fn preserves_sharing(&self, tol: f64) -> bool {
        self.preserves_sharing <= tol
    }
}

fn sync_residual(f: &Morphism, sx: &Morphism, sa: &Morphism) -> Result<f64> {
    let fs = f.compose(sx)?;
    residual(&fs, &sa.compose(&fs)?)
}

pub fn sync_status(f: &Morphism) -> Result<SyncReport> {
    let x = opposite_halves(f.dom())?;
    let a = opposite_halves(f.cod())?;
    let sx = share_wires(x)?;
    let sa = share_wires(a)?;
    let synchronous = sync_residual(f, &sx, &sa)?;
    let cosynchronous = sync_residual(&f.dagger(), &sa, &sx)?;
    let preserves_sharing = residual(&f.compose(&sx)?, &sa.compose(f)?)?;
    Ok(SyncReport {
        synchronous,
        cosynchronous,
        preserves_sharing,
    })
}

pub fn is_synchronous(f: &Morphism, tol: f64) -> Result<bool> {
    Ok(sync_status(f)?.synchronous(tol))
}

/// Residual of `λ ⋆ P = P` (and the swapped order).
pub fn perfect_residual(p: &Morphism, lambda: &Morphism) -> Result<f64> {
    let a = residual(&star(lambda, p)?, p)?;
    let b = residual(&star(p, lambda)?, p)?;
    Ok(a.max(b))
}

pub fn is_perfect(p: &Morphism, lambda: &Morphism, tol: f64) -> Result<bool> {
    require_game(lambda, tol)?;
    Ok(perfect_residual(p, lambda)? <= tol)
}

/// `cap_A ∘ P ∘ cup_X`.
pub fn loopslide(p: &Morphism) -> Result<C64> {
    let x = opposite_halves(p.dom())?;
    let a = opposite_halves(p.cod())?;
    Morphism::cap_list(a)
        .compose(&p.compose(&Morphism::cup_list(x))?)?
        .close_scalar()
}

/// `f(cup_X)` next to `cup_A`.
pub fn concurrency_image(f: &Morphism) -> Result<(Morphism, Morphism)> {
    let x = opposite_halves(f.dom())?;
    let a = opposite_halves(f.cod())?;
    Ok((f.compose(&Morphism::cup_list(x))?, Morphism::cup_list(a)))
}

pub fn is_concurrent(f: &Morphism, tol: f64) -> Result<bool> {
    let (img, cup) = concurrency_image(f)?;
    approx_equal(&img, &cup, tol)
}

fn single_opposite_pair(p: &Morphism) -> Result<(&Wire, &Wire)> {
    let x = opposite_halves(p.dom())?;
    let a = opposite_halves(p.cod())?;
    if x.len() != 1 || a.len() != 1 {
        return Err(QsyncError::OppositeStructureMissing(format!(
            "expected X (x) X^op -> A (x) A^op, got {} -> {}",
            signature(p.dom()),
            signature(p.cod())
        )));
    }
    Ok((&x[0], &a[0]))
}

/// The weighted loop built from the two Schur-product algebras on each side.
pub fn bks_sync_scalar(p: &Morphism) -> Result<C64> {
    let (x, a) = single_opposite_pair(p)?;
    let weighted_cup = |w: &Wire| -> Result<Morphism> {
        let (set, _) = w.qset().expect("checked");
        let plus = schur_cfa(set, SchurSign::Plus);
        let minus = schur_cfa(set, SchurSign::Minus);
        minus
            .delta()
            .compose(&plus.u)?
            .relabel(&[], &[w.clone(), w.dual()])
    };
    let vx = weighted_cup(x)?;
    let va = weighted_cup(a)?;
    va.dagger().compose(&p.compose(&vx)?)?.close_scalar()
}

/// The same scalar as a direct weighted sum over matrix-unit coefficients.
pub fn bks_sync_sum(p: &Morphism) -> Result<C64> {
    let (x, a) = single_opposite_pair(p)?;
    let (xs, _) = x.qset().expect("checked");
    let (as_, _) = a.qset().expect("checked");
    let (dx, da) = (xs.dim(), as_.dim());
    let mut acc = C64::new(0.0, 0.0);
    for q in 0..dx {
        let (l, _, _) = xs.unit_of(q);
        let ml = xs.blocks()[l] as f64;
        for r in 0..da {
            let (k, _, _) = as_.unit_of(r);
            let nk = as_.blocks()[k] as f64;
            acc += p.matrix()[(r * da + r, q * dx + q)] / (nk * ml);
        }
    }
    Ok(acc)
}

/// Fairness of a game: no product question vector is sent to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fairness {
    Fair,
    Unfair,
    Unknown,
}

pub fn fairness(lambda: &Morphism, tol: f64, seed: u64) -> Result<Fairness> {
    let (x, y) = halves(lambda.dom())?;
    let (dx, dy) = (wires_dim(x), wires_dim(y));
    let m = lambda.matrix();
    let classical = lambda
        .dom()
        .iter()
        .all(|w| w.qset().is_some_and(|(s, _)| s.is_classical()));
    if classical {
        for col in 0..dx * dy {
            if m.column(col).iter().all(|v| v.norm() <= tol) {
                return Ok(Fairness::Unfair);
            }
        }
        return Ok(Fairness::Fair);
    }
    let svd = m.clone().svd(false, false);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if m.nrows() >= m.ncols() && smin > tol {
        return Ok(Fairness::Fair);
    }
    // alternating minimization of |λ(x ⊗ y)| over unit vectors
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = m.nrows();
    for _ in 0..16 {
        let mut yv = nalgebra::DVector::<C64>::from_fn(dy, |_, _| {
            C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        });
        yv /= c(yv.norm());
        let mut xv = nalgebra::DVector::<C64>::zeros(dx);
        let mut best = f64::INFINITY;
        for _ in 0..200 {
            // M_y[r, i] = Σ_j m[r, i*dy + j] y_j
            let my = CMatrix::from_fn(rows, dx, |r, i| (0..dy).map(|j| m[(r, i * dy + j)] * yv[j]).sum());
            xv = smallest_right_singular(&my);
            let mx = CMatrix::from_fn(rows, dy, |r, j| (0..dx).map(|i| m[(r, i * dy + j)] * xv[i]).sum());
            yv = smallest_right_singular(&mx);
            let val = (&mx * &yv).norm();
            if val <= tol {
                return Ok(Fairness::Unfair);
            }
            if best - val < 1e-14 {
                break;
            }
            best = val;
        }
        let _ = &xv;
    }
    Ok(Fairness::Unknown)
}

fn smallest_right_singular(a: &CMatrix) -> nalgebra::DVector<C64> {
    let gram = a.adjoint() * a;
    let eig = SymmetricEigen::new(gram);
    let (idx, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    eig.eigenvectors.column(idx).into_owned()
}

/// The canonical games on quantum sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CanonicalGame {
    Identity,
    Function,
    UnfairFunction,
}

/// Builds a canonical game on `X ⊗ Xᵒᵖ -> A ⊗ Aᵒᵖ` for thick wires `x`, `a`.
/// The identity game ignores `a`.
pub fn canonical_game(kind: CanonicalGame, x: &[Wire], a: &[Wire]) -> Result<Morphism> {
    let xx: Vec<Wire> = x.iter().cloned().chain(dual_wires(x)).collect();
    let aa: Vec<Wire> = a.iter().cloned().chain(dual_wires(a)).collect();
    let cup_cap = || -> Result<Morphism> { Morphism::cup_list(a).compose(&Morphism::cap_list(x)) };
    match kind {
        CanonicalGame::Identity => Ok(Morphism::identity(&xx)),
        CanonicalGame::UnfairFunction => cup_cap(),
        CanonicalGame::Function => {
            let uu = unit(&aa)?;
            let ee = counit(&xx)?;
            let t2 = uu.compose(&ee)?;
            let t3 = uu.compose(&Morphism::cap_list(x))?;
            cup_cap()?.add(&t2)?.sub(&t3)
        }
    }
}

/// A map between question and answer pairs with its validated flags.
#[derive(Clone, Debug)]
pub struct GameMap {
    pub map: Morphism,
    pub is_game: bool,
    pub is_correlation: bool,
    pub is_bicorrelation: bool,
}

impl GameMap {
    pub fn classify(map: Morphism, tol: f64) -> Result<Self> {
        let is_game = is_game(&map, tol)?;
        let is_correlation = is_correlation(&map, tol)?;
        let is_bicorrelation = is_correlation && self::is_correlation(&map.dagger(), tol)?;
        Ok(GameMap {
            map,
            is_game,
            is_correlation,
            is_bicorrelation,
        })
    }
}

/// Classical map from a table `p[a][b][x][y]` on classical sets, with opposite second legs.
pub fn classical_map(
    x: &Wire,
    a: &Wire,
    entry: impl Fn(usize, usize, usize, usize) -> f64,
) -> Result<Morphism> {
    let (nx, na) = (x.dim(), a.dim());
    let m = CMatrix::from_fn(na * na, nx * nx, |r, col| {
        c(entry(r / na, r % na, col / nx, col % nx))
    });
    Morphism::new(vec![x.clone(), x.dual()], vec![a.clone(), a.dual()], m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qset::{op_wire, share, wire, QuantumSet};

    const TOL: f64 = 1e-9;

    fn cl(n: usize) -> Wire {
        wire(&QuantumSet::classical("C", n).unwrap())
    }

    #[test]
    fn classical_star_is_schur_product() {
        let x = cl(2);
        let f = classical_map(&x, &x, |a, b, xx, y| (1 + a + 2 * b + 3 * xx + 5 * y) as f64).unwrap();
        let g = classical_map(&x, &x, |a, b, xx, y| (7 - a - b + xx * y) as f64).unwrap();
        let s = star(&f, &g).unwrap();
        let want = f.matrix().component_mul(g.matrix());
        assert!(crate::tensor::max_abs(&(s.matrix() - want)) < TOL);
    }

    #[test]
    fn identity_game_quantum() {
        let x = QuantumSet::new("X", &[2]).unwrap();
        let l = canonical_game(CanonicalGame::Identity, &[wire(&x)], &[]).unwrap();
        assert!(is_game(&l, TOL).unwrap());
        assert!(sync_status(&l).unwrap().bisynchronous(TOL));
    }

    #[test]
    fn share_is_game_only_classically() {
        let q = QuantumSet::new("X", &[2]).unwrap();
        assert!(!is_game(&share(&q), TOL).unwrap());
        let c3 = QuantumSet::classical("X", 3).unwrap();
        assert!(is_game(&share(&c3), TOL).unwrap());
        assert!(is_synchronous(&share(&q), TOL).unwrap());
    }

    #[test]
    fn function_game_classical_rule() {
        let x = cl(2);
        let l = canonical_game(CanonicalGame::Function, std::slice::from_ref(&x), std::slice::from_ref(&x)).unwrap();
        let want = classical_map(&x, &x, |a, b, xx, y| {
            if xx != y || a == b {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert!(approx_equal(&l, &want, TOL).unwrap());
        assert!(is_game(&l, TOL).unwrap());
        assert!(is_synchronous(&l, TOL).unwrap());
    }

    #[test]
    fn function_game_quantum_is_game() {
        let x = QuantumSet::new("X", &[2, 1]).unwrap();
        let a = QuantumSet::new("A", &[2]).unwrap();
        let l = canonical_game(CanonicalGame::Function, &[wire(&x)], &[wire(&a)]).unwrap();
        let r = game_report(&l).unwrap();
        assert!(r.passes(TOL), "{r:?}");
        assert!(is_synchronous(&l, TOL).unwrap());
        let id = canonical_game(CanonicalGame::Identity, &[wire(&x)], &[]).unwrap();
        let lx = canonical_game(CanonicalGame::Function, &[wire(&x)], &[wire(&x)]).unwrap();
        assert!(approx_equal(&star(&lx, &id).unwrap(), &id, TOL).unwrap());
    }

    #[test]
    fn unfair_function_game() {
        let x = QuantumSet::new("X", &[2]).unwrap();
        let a = QuantumSet::new("A", &[1, 1]).unwrap();
        let l = canonical_game(CanonicalGame::UnfairFunction, &[wire(&x)], &[wire(&a)]).unwrap();
        assert!(is_game(&l, TOL).unwrap());
        assert!(is_synchronous(&l, TOL).unwrap());
        assert!(!is_concurrent(&l, TOL).unwrap());
        let (img, cup) = concurrency_image(&l).unwrap();
        assert!(approx_equal(&img, &cup.scale(c(4.0)), TOL).unwrap());
        let ch = channel_props(&l).unwrap();
        assert!(ch.counital > 0.1);
    }

    #[test]
    fn cp_examples() {
        let x = cl(2);
        let neg = classical_map(&x, &x, |a, _, xx, _| if a == xx { 1.1 } else { -0.1 }).unwrap();
        assert!(!is_cp(&neg, TOL).unwrap());
        let uniform = classical_map(&x, &x, |_, _, _, _| 0.25).unwrap();
        assert!(is_cp(&uniform, TOL).unwrap());
        let q = QuantumSet::new("X", &[2]).unwrap();
        let id = Morphism::identity(&[wire(&q), op_wire(&q)]);
        let ch = channel_props(&id).unwrap();
        assert!(ch.is_unital_channel(TOL));
        // a non-CP map on a quantum set: the transpose E_ij -> E_ji
        let w = wire(&q);
        let t = Morphism::new(
            vec![w.clone()],
            vec![w.clone()],
            CMatrix::from_fn(4, 4, |r, col| if r == q.transpose_index(col) { c(1.0) } else { c(0.0) }),
        )
        .unwrap();
        assert!(!is_cp(&t, TOL).unwrap());
    }

    #[test]
    fn cp_maps_are_self_conjugate() {
        // a ↦ K a K† on M_2, written in the matrix-unit basis
        let q = QuantumSet::new("X", &[2]).unwrap();
        let w = wire(&q);
        let k = CMatrix::from_row_slice(2, 2, &[C64::new(0.3, 0.1), C64::new(-0.7, 0.2), C64::new(0.0, 0.5), C64::new(1.1, -0.4)]);
        let f = CMatrix::from_fn(4, 4, |r, col| {
            let (i, j) = (col / 2, col % 2);
            let (s, t) = (r / 2, r % 2);
            k[(s, i)] * k[(t, j)].conj()
        });
        let f = Morphism::new(vec![w.clone()], vec![w], f).unwrap();
        assert!(is_cp(&f, TOL).unwrap());
        assert!(matrix_residual(f.conjugate().matrix(), f.matrix()) < TOL);
    }

    #[test]
    fn sharing_is_cp_only_classically() {
        let q = QuantumSet::new("X", &[2]).unwrap();
        assert!(!is_cp(&share(&q), TOL).unwrap());
        assert!(matrix_residual(share(&q).conjugate().matrix(), share(&q).matrix()) > 0.1);
        let c2 = QuantumSet::classical("X", 2).unwrap();
        assert!(is_cp(&share(&c2), TOL).unwrap());
    }

    #[test]
    fn marginals_of_product() {
        let x = cl(2);
        let qa = [[0.3, 0.7], [0.6, 0.4]]; // qa[x][a]
        let qb = [[0.9, 0.1], [0.2, 0.8]];
        let p = classical_map(&x, &x, |a, b, xx, y| qa[xx][a] * qb[y][b]).unwrap();
        let m = nonsignalling_marginals(&p, TOL).unwrap();
        assert!(m.is_ns);
        for xx in 0..2 {
            for a in 0..2 {
                assert!((m.p_a.matrix()[(a, xx)].re - qa[xx][a]).abs() < TOL);
                assert!((m.p_b.matrix()[(a, xx)].re - qb[xx][a]).abs() < TOL);
            }
        }
        assert!(channel_props(&m.p_a).unwrap().is_channel(TOL));
        let sig = classical_map(&x, &x, |a, b, _, y| if a == y && b == 0 { 1.0 } else { 0.0 }).unwrap();
        assert!(!nonsignalling_marginals(&sig, TOL).unwrap().is_ns);
    }

    #[test]
    fn sync_classical_and_loopslide() {
        let x = cl(3);
        let p = classical_map(&x, &x, |a, b, xx, y| {
            if xx == y {
                if a == b && a == xx % 3 { 1.0 } else { 0.0 }
            } else {
                1.0 / 9.0
            }
        })
        .unwrap();
        assert!(sync_status(&p).unwrap().synchronous(TOL));
        assert!((loopslide(&p).unwrap() - c(3.0)).norm() < TOL);
        assert!((bks_sync_scalar(&p).unwrap() - c(3.0)).norm() < TOL);
        let s = share(&QuantumSet::classical("X", 3).unwrap());
        assert!((loopslide(&s).unwrap() - c(3.0)).norm() < TOL);
    }

    #[test]
    fn bks_routes_agree() {
        let x = QuantumSet::new("X", &[2, 1]).unwrap();
        let a = QuantumSet::new("A", &[1, 2]).unwrap();
        let xx = [wire(&x), op_wire(&x)];
        let aa = [wire(&a), op_wire(&a)];
        let m = CMatrix::from_fn(25, 25, |r, col| C64::new((r * 3 + col) as f64 * 0.01, (r as f64 - col as f64) * 0.02));
        let p = Morphism::new(xx.to_vec(), aa.to_vec(), m).unwrap();
        let d = bks_sync_scalar(&p).unwrap();
        let s = bks_sync_sum(&p).unwrap();
        assert!((d - s).norm() < TOL);
    }

    #[test]
    fn fairness_checks() {
        let x = cl(2);
        let l = canonical_game(CanonicalGame::UnfairFunction, std::slice::from_ref(&x), std::slice::from_ref(&x)).unwrap();
        assert_eq!(fairness(&l, TOL, 0).unwrap(), Fairness::Unfair);
        let f = canonical_game(CanonicalGame::Function, std::slice::from_ref(&x), std::slice::from_ref(&x)).unwrap();
        assert_eq!(fairness(&f, TOL, 0).unwrap(), Fairness::Fair);
        let q = QuantumSet::new("X", &[2]).unwrap();
        let id = canonical_game(CanonicalGame::Identity, &[wire(&q)], &[]).unwrap();
        assert_eq!(fairness(&id, TOL, 0).unwrap(), Fairness::Fair);
        let uf = canonical_game(CanonicalGame::UnfairFunction, &[wire(&q)], &[wire(&q)]).unwrap();
        assert_eq!(fairness(&uf, 1e-7, 0).unwrap(), Fairness::Unfair);
    }

    #[test]
    fn tensor_of_games() {
        let x = QuantumSet::new("X", &[2]).unwrap();
        let c2 = cl(2);
        let id1 = canonical_game(CanonicalGame::Identity, &[wire(&x)], &[]).unwrap();
        let f = canonical_game(CanonicalGame::Function, std::slice::from_ref(&c2), std::slice::from_ref(&c2)).unwrap();
        let t = tensor_game(&id1, &f).unwrap();
        assert_eq!(t.dom().len(), 4);
        assert!(is_game(&t, TOL).unwrap());
        let ii = tensor_game(&id1, &id1).unwrap();
        assert!(approx_equal(&ii, &Morphism::identity(ii.dom()), TOL).unwrap());
    }

    #[test]
    fn opposite_shape_required() {
        let x = cl(2);
        let p = Morphism::identity(&[x.clone(), x.clone()]);
        assert!(matches!(
            sync_status(&p),
            Err(QsyncError::OppositeStructureMissing(_))
        ));
    }
}
