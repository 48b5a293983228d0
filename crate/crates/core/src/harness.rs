//! Named, seeded property suites over a fixed grid of small instances.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QsyncError, Result};
use crate::gamemaps::{
    bks_sync_scalar, bks_sync_sum, canonical_game, channel_props, classical_map, commutes, concurrency_image,
    fairness, game_report, is_concurrent, is_cp, is_game, loopslide, nonsignalling_marginals, perfect_residual,
    star, sync_status, tensor_game, CanonicalGame, Fairness,
};
use crate::graphs::{
    complete_adjacency, cycle, extract_hom, extract_iso, hom_game, hom_intertwining_residual, hom_table_residual,
    hom_to_correlation, iso_game, iso_to_bicorrelation, unfair_graph_game, quantum_graph_hom_residual, QuantumGraph,
};
use crate::qset::{
    check_axioms, dims, mult, op_wire, schur_cfa, share, share_wires, unit, wire, QuantumSet, SchurSign,
};
use crate::rng::Seed;
use crate::strategies::{
    combine, cs_scalars, deterministic_function, extract_alice, flip_combined, flip_strategy, gen_quantum_function,
    is_bistrategy, normalized_cup, perfect_strategy_residual, qfunc_report, random_state, realize_correlation,
    sync_strategy_status, CombineKind, CombinedStrategy, GenKind, QuantumFunction,
};
use crate::tensor::{c, matrix_residual, max_abs, residual, Morphism, Wire, C64};

pub const SCHEMA_VERSION: u32 = 1;

/// Block profiles of the standard grid.
pub const PROFILES: [&[usize]; 7] = [&[1], &[1, 1], &[1, 1, 1], &[2], &[2, 1], &[3], &[2, 2]];

pub const RESOURCE_DIMS: [usize; 3] = [1, 2, 3];

pub fn profile_set(blocks: &[usize]) -> Arc<QuantumSet> {
    QuantumSet::new("X", blocks).expect("grid profiles are valid")
}

/// `K₂, K₃, C₄, C₅` and the quantum complete graph on `[2]`.
pub fn grid_graphs(tol: f64) -> Vec<QuantumGraph> {
    vec![
        QuantumGraph::classical("K2", &complete_adjacency(2), tol).expect("K2"),
        QuantumGraph::classical("K3", &complete_adjacency(3), tol).expect("K3"),
        QuantumGraph::classical("C4", &cycle(4), tol).expect("C4"),
        QuantumGraph::classical("C5", &cycle(5), tol).expect("C5"),
        quantum_complete(tol),
    ]
}

pub fn quantum_complete(tol: f64) -> QuantumGraph {
    QuantumGraph::complete(QuantumSet::new("Q2", &[2]).expect("[2]"), tol).expect("complete graph")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub desc: String,
    pub residuals: BTreeMap<String, f64>,
    /// Reported values that do not gate the verdict.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub info: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub schema_version: u32,
    pub suite: String,
    pub seed: u64,
    pub tol: f64,
    pub instances: Vec<InstanceResult>,
    pub pass: bool,
    pub wall_ms: f64,
}

impl SuiteResult {
    /// First failing check as `(instance, check, residual)`.
    pub fn first_failure(&self) -> Option<(String, String, f64)> {
        self.instances.iter().filter(|i| !i.pass).find_map(|i| {
            if let Some(err) = &i.error {
                return Some((i.desc.clone(), err.clone(), f64::INFINITY));
            }
            i.residuals
                .iter()
                .find(|(_, &r)| !(r <= self.tol))
                .map(|(k, &r)| (i.desc.clone(), k.clone(), r))
        })
    }

    pub fn check_count(&self) -> usize {
        self.instances.iter().map(|i| i.residuals.len()).sum()
    }
}

/// Accumulates the residuals of one instance. Boolean checks record 0 or 1.
#[derive(Default)]
pub struct Check {
    residuals: BTreeMap<String, f64>,
    info: BTreeMap<String, f64>,
}

impl Check {
    pub fn res(&mut self, name: impl Into<String>, r: f64) {
        let slot = self.residuals.entry(name.into()).or_insert(0.0);
        *slot = if r.is_nan() { f64::NAN } else { slot.max(r) };
    }

    pub fn holds(&mut self, name: impl Into<String>, ok: bool) {
        self.res(name, if ok { 0.0 } else { 1.0 });
    }

    pub fn info(&mut self, name: impl Into<String>, v: f64) {
        self.info.insert(name.into(), v);
    }
}

type JobFn = Box<dyn FnOnce(&mut Check) -> Result<()> + Send>;

struct Job {
    desc: String,
    run: JobFn,
}

fn job(desc: impl Into<String>, run: impl FnOnce(&mut Check) -> Result<()> + Send + 'static) -> Job {
    Job {
        desc: desc.into(),
        run: Box::new(run),
    }
}

fn run_jobs(jobs: Vec<Job>, tol: f64) -> Vec<InstanceResult> {
    jobs.into_par_iter()
        .map(|j| {
            let mut chk = Check::default();
            let outcome = (j.run)(&mut chk);
            let error = outcome.err().map(|e| e.to_string());
            let pass = error.is_none() && chk.residuals.values().all(|&r| r <= tol);
            InstanceResult {
                desc: j.desc,
                residuals: chk.residuals,
                info: chk.info,
                error,
                pass,
            }
        })
        .collect()
}

#[derive(Clone, Copy)]
pub struct Ctx {
    pub seed: Seed,
    pub tol: f64,
}

pub struct Suite {
    pub name: &'static str,
    pub about: &'static str,
    build: fn(Ctx) -> Vec<Job>,
}

pub fn suites() -> &'static [Suite] {
    SUITES
}

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.name).collect()
}

pub fn run_suite(name: &str, seed: u64, tol: f64) -> Result<SuiteResult> {
    let suite = SUITES
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| QsyncError::UnknownSuite(name.to_string()))?;
    let start = Instant::now();
    let ctx = Ctx {
        seed: Seed(seed).split(name),
        tol,
    };
    let instances = run_jobs((suite.build)(ctx), tol);
    let pass = instances.iter().all(|i| i.pass);
    Ok(SuiteResult {
        schema_version: SCHEMA_VERSION,
        suite: name.to_string(),
        seed,
        tol,
        instances,
        pass,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

pub fn run_all(seed: u64, tol: f64) -> Vec<SuiteResult> {
    SUITES
        .iter()
        .map(|s| run_suite(s.name, seed, tol).expect("registered suite"))
        .collect()
}

/// Labeled results and the suite that exercises each.
pub const LABELED_RESULTS: &[(&str, &str)] = &[
    ("Defn. quantum set", "qset-axioms"),
    ("Remark structure of quantum sets", "qset-axioms"),
    ("Defn. opposite set", "sharing"),
    ("Lemma properties of sharing", "sharing"),
    ("Defn. classical dimension", "dims"),
    ("Prop. classical dimension diagram", "dims"),
    ("Prop. classical iff sharing is a game", "classical-sharing-game"),
    ("Defn. quantum function", "quantum-functions"),
    ("Defn. game", "canonical-games"),
    ("Example identity and function games", "canonical-games"),
    ("Example unfair function game", "concurrent-counterexamples"),
    ("Defn. CP and correlation", "cp-channels"),
    ("Defn. realized by a combined strategy", "cp-channels"),
    ("Defn. non-signalling", "marginals"),
    ("Prop. marginals of correlations", "marginals"),
    ("Defn. tensor product of games", "products"),
    ("Defn. commuting product of games", "products"),
    ("Prop. perfect for a product", "products"),
    ("Defn. synchronous map", "sync-reduction"),
    ("Prop. synchronicity reduces classically", "sync-reduction"),
    ("Thm. perfect correlations are synchronous", "perf-sync"),
    ("Cor. perfect strategies are synchronous", "perf-sync"),
    ("Lemma loop", "loop-slide"),
    ("Lemma Cauchy-Schwarz", "cs-inequality"),
    ("Thm. Cauchy-Schwarz for quantum functions", "cs-inequality"),
    ("Thm. synchronous quantum commuting strategies", "sync-strategies"),
    ("Prop. bistrategy structure", "bistrategy-structure"),
    ("Thm. bisynchronous dimensions agree", "bisync-dims"),
    ("Cor. bisynchronous classical dimensions", "bisync-dims"),
    ("Defn. quantum graph", "hom-game"),
    ("Defn. quantum graph homomorphism game", "hom-game"),
    ("Table commuting products of the terms", "hom-table"),
    ("Thm. homomorphisms give perfect correlations", "hom-correspondence"),
    ("Thm. perfect strategies give homomorphisms", "hom-correspondence"),
    ("Defn. quantum graph isomorphism game", "iso-game"),
    ("Thm. isomorphisms give perfect bicorrelations", "iso-game"),
    ("Defn. concurrent", "concurrent-counterexamples"),
    ("Prop. bisynchronous maps are concurrent", "bisync-concurrent"),
    ("Weighted synchronicity criterion", "bks-classical"),
    ("Remark weighted Schur algebras", "schur-cfa"),
];

const SUITES: &[Suite] = &[
    Suite { name: "qset-axioms", about: "Frobenius axioms on every profile and its opposite", build: qset_axioms },
    Suite { name: "dims", about: "dimension and classical dimension", build: dims_suite },
    Suite { name: "sharing", about: "properties of sharing", build: sharing },
    Suite { name: "classical-sharing-game", about: "sharing is a game iff the set is classical", build: sharing_game },
    Suite { name: "quantum-functions", about: "generated quantum functions and their conjugates", build: quantum_functions },
    Suite { name: "canonical-games", about: "identity and function games", build: canonical_games },
    Suite { name: "cp-channels", about: "realized correlations are channels", build: cp_channels },
    Suite { name: "marginals", about: "non-signalling marginals", build: marginals },
    Suite { name: "products", about: "tensor and commuting products of games", build: products },
    Suite { name: "sync-reduction", about: "synchronicity against the entrywise test", build: sync_reduction },
    Suite { name: "perf-sync", about: "perfect correlations and strategies are synchronous", build: perf_sync },
    Suite { name: "loop-slide", about: "loop sliding gives dim X", build: loop_slide },
    Suite { name: "cs-inequality", about: "Cauchy-Schwarz for quantum functions", build: cs_inequality },
    Suite { name: "sync-strategies", about: "synchronous commuting strategies come from one function", build: sync_strategies },
    Suite { name: "bistrategy-structure", about: "flips stay in their class", build: bistrategy_structure },
    Suite { name: "bisync-dims", about: "bisynchronous maps preserve dimensions", build: bisync_dims },
    Suite { name: "hom-game", about: "homomorphism games on the graph grid", build: hom_game_suite },
    Suite { name: "hom-table", about: "commuting products of the game terms", build: hom_table },
    Suite { name: "hom-correspondence", about: "homomorphisms and perfect strategies", build: hom_correspondence },
    Suite { name: "iso-game", about: "isomorphism games", build: iso_game_suite },
    Suite { name: "concurrent-counterexamples", about: "games that are not concurrent", build: concurrent_counterexamples },
    Suite { name: "bisync-concurrent", about: "bisynchronous unital maps are concurrent", build: bisync_concurrent },
    Suite { name: "bks-classical", about: "weighted criterion equals loop sliding classically", build: bks_classical },
    Suite { name: "schur-cfa", about: "weighted Schur algebras", build: schur_suite },
];

// ---------- shared constructions ----------

/// The identity quantum function `H ⊗ X -> X ⊗ H`.
pub fn identity_qfunc(set: &Arc<QuantumSet>, d: usize) -> Result<QuantumFunction> {
    QuantumFunction::new_unchecked(Morphism::swap(&Wire::space(d), &wire(set)))
}

/// `E` against its own copy on the opposite wires, on one shared resource.
pub fn self_commuting(e: &QuantumFunction, tol: f64) -> Result<CombinedStrategy> {
    combine(CombineKind::Commuting, e, &e.opposite_partner()?, tol)
}

/// Deterministic strategy where both players answer with `f`.
pub fn deterministic_pair(x: &Arc<QuantumSet>, a: &Arc<QuantumSet>, f: &[usize], g: &[usize], tol: f64) -> Result<CombinedStrategy> {
    let e = QuantumFunction::new_unchecked(deterministic_function(x, a, f)?)?;
    let h = QuantumFunction::new_unchecked(deterministic_function(x, a, g)?)?.opposite_partner()?;
    combine(CombineKind::Deterministic, &e, &h, tol)
}

/// `E ⊗ E_*` realized on the normalized cup.
pub fn cup_correlation(e: &QuantumFunction, tol: f64) -> Result<Morphism> {
    let t = combine(CombineKind::Tensor, e, &e.conj(), tol)?;
    realize_correlation(&t.map, &normalized_cup(e.resource_dim()), tol)
}

/// All functions `{0..n} -> {0..m}` as value tables.
pub fn all_functions(n: usize, m: usize) -> Vec<Vec<usize>> {
    let total = m.pow(n as u32);
    (0..total)
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let v = k % m;
                    k /= m;
                    v
                })
                .collect()
        })
        .collect()
}

pub fn is_classical_hom(g: &[Vec<u8>], h: &[Vec<u8>], f: &[usize]) -> bool {
    (0..g.len()).all(|x| (0..g.len()).all(|y| g[x][y] == 0 || h[f[x]][f[y]] == 1))
}

fn adjacency_of(g: &QuantumGraph) -> Vec<Vec<u8>> {
    let m = g.adjacency().matrix();
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| u8::from(m[(i, j)].re > 0.5)).collect())
        .collect()
}

/// Random synchronous classical correlation: shared randomness over deterministic functions.
pub fn random_sync_classical(x: &Wire, a: &Wire, seed: Seed) -> Result<Morphism> {
    let mut rng = seed.rng();
    let (nx, na) = (x.dim(), a.dim());
    let k = rng.random_range(1..=4);
    let fs: Vec<Vec<usize>> = (0..k).map(|_| (0..nx).map(|_| rng.random_range(0..na)).collect()).collect();
    let mut w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    classical_map(x, a, |ai, bi, xi, yi| {
        fs.iter()
            .zip(&w)
            .map(|(f, wt)| if f[xi] == ai && f[yi] == bi { *wt } else { 0.0 })
            .sum()
    })
}

/// Mixes a correlation with uniform noise of weight `eta`.
pub fn perturb(p: &Morphism, eta: f64) -> Result<Morphism> {
    let na = p.cod()[0].dim();
    let u = 1.0 / (na * na) as f64;
    let m = p.matrix().map(|z| z * c(1.0 - eta) + c(eta * u));
    Morphism::new(p.dom().to_vec(), p.cod().to_vec(), m)
}

/// `max_{x, a≠b} p(a,b|x,x)` for a classical correlation.
pub fn entrywise_sync_defect(p: &Morphism) -> f64 {
    let (nx, na) = (p.dom()[0].dim(), p.cod()[0].dim());
    let mut worst: f64 = 0.0;
    for x in 0..nx {
        for a in 0..na {
            for b in 0..na {
                if a != b {
                    worst = worst.max(p.matrix()[(a * na + b, x * nx + x)].norm());
                }
            }
        }
    }
    worst
}

/// A game with a correlation that is perfect for it, and optionally a perfect strategy.
pub struct PerfectCase {
    pub desc: String,
    pub game: Morphism,
    pub correlation: Morphism,
    pub strategy: Option<Morphism>,
    pub question_dim: usize,
    pub classical: bool,
}

/// Perfect correlations and strategies for the identity game, function games,
/// `C₄ -> K₂`, `C₅ -> K₃` and the quantum complete graph on `[2]`.
pub fn perfect_cases(seed: Seed, tol: f64) -> Result<Vec<PerfectCase>> {
    let mut out = Vec::new();
    for blocks in PROFILES {
        let x = profile_set(blocks);
        let game = canonical_game(CanonicalGame::Identity, &[wire(&x)], &[])?;
        for d in RESOURCE_DIMS {
            let e = identity_qfunc(&x, d)?;
            let phi = self_commuting(&e, tol)?;
            out.push(PerfectCase {
                desc: format!("identity game {blocks:?}, resource {d}"),
                game: game.clone(),
                correlation: cup_correlation(&e, tol)?,
                strategy: Some(phi.map),
                question_dim: x.dim(),
                classical: x.is_classical(),
            });
        }
    }
    for (nx, na) in [(3, 2), (2, 3)] {
        let x = QuantumSet::classical("X", nx)?;
        let a = QuantumSet::classical("A", na)?;
        let game = canonical_game(CanonicalGame::Function, &[wire(&x)], &[wire(&a)])?;
        for i in 0..3 {
            let s = seed.split("det").index(i);
            let e = gen_quantum_function(&GenKind::DetFunction, &x, &a, s)?;
            out.push(PerfectCase {
                desc: format!("function game {nx}->{na}, deterministic #{i}"),
                game: game.clone(),
                correlation: cup_correlation(&e, tol)?,
                strategy: Some(self_commuting(&e, tol)?.map),
                question_dim: nx,
                classical: true,
            });
        }
        for d in RESOURCE_DIMS {
            let e = gen_quantum_function(&GenKind::Pvm { resource_dim: d }, &x, &a, seed.split("pvm").index(d as u64))?;
            out.push(PerfectCase {
                desc: format!("function game {nx}->{na}, PVM on C^{d}"),
                game: game.clone(),
                correlation: cup_correlation(&e, tol)?,
                strategy: None,
                question_dim: nx,
                classical: true,
            });
        }
    }
    for (xb, ab) in [(&[2usize][..], &[2usize][..]), (&[2, 1], &[1, 2])] {
        let x = QuantumSet::new("X", xb)?;
        let a = QuantumSet::new("A", ab)?;
        let game = canonical_game(CanonicalGame::Function, &[wire(&x)], &[wire(&a)])?;
        for d in RESOURCE_DIMS {
            let s = seed.split("ciso").index(d as u64);
            let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: d }, &x, &a, s)?;
            out.push(PerfectCase {
                desc: format!("function game {xb:?}->{ab:?}, controlled isomorphism on C^{d}"),
                game: game.clone(),
                correlation: cup_correlation(&e, tol)?,
                strategy: Some(self_commuting(&e, tol)?.map),
                question_dim: x.dim(),
                classical: false,
            });
        }
    }
    for (gn, g_adj, hn, h_adj) in [
        ("C4", cycle(4), "K2", complete_adjacency(2)),
        ("C5", cycle(5), "K3", complete_adjacency(3)),
    ] {
        let g = QuantumGraph::classical(gn, &g_adj, tol)?;
        let h = QuantumGraph::classical(hn, &h_adj, tol)?;
        let game = hom_game(&g, &h)?;
        for f in all_functions(g_adj.len(), h_adj.len()) {
            if !is_classical_hom(&g_adj, &h_adj, &f) {
                continue;
            }
            let e = QuantumFunction::new(deterministic_function(g.set(), h.set(), &f)?, tol)?;
            out.push(PerfectCase {
                desc: format!("hom game {gn}->{hn}, f = {f:?}"),
                game: game.clone(),
                correlation: hom_to_correlation(&e, &g, &h, tol)?,
                strategy: Some(self_commuting(&e, tol)?.map),
                question_dim: g_adj.len(),
                classical: true,
            });
        }
    }
    let q = quantum_complete(tol);
    let game = hom_game(&q, &q)?;
    for d in RESOURCE_DIMS {
        let s = seed.split("qgraph").index(d as u64);
        let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: d }, q.set(), q.set(), s)?;
        out.push(PerfectCase {
            desc: format!("hom game complete([2]), controlled isomorphism on C^{d}"),
            game: game.clone(),
            correlation: hom_to_correlation(&e, &q, &q, tol)?,
            strategy: Some(self_commuting(&e, tol)?.map),
            question_dim: q.set().dim(),
            classical: false,
        });
    }
    Ok(out)
}

// ---------- suites ----------

fn qset_axioms(_: Ctx) -> Vec<Job> {
    PROFILES
        .iter()
        .map(|&b| {
            job(format!("profile {b:?}"), move |chk| {
                let x = profile_set(b);
                for (name, r) in &check_axioms(&x).residuals {
                    chk.res(name.clone(), *r);
                }
                let op = crate::qset::FrobeniusStructure::of_set(&x, true).check_axioms()?;
                for (name, r) in &op.residuals {
                    chk.res(format!("op {name}"), *r);
                }
                Ok(())
            })
        })
        .collect()
}

fn dims_suite(ctx: Ctx) -> Vec<Job> {
    let mut jobs: Vec<Job> = PROFILES
        .iter()
        .map(|&b| {
            job(format!("profile {b:?}"), move |chk| {
                let x = profile_set(b);
                let d = dims(&x, ctx.tol)?;
                chk.res("trace m sigma delta - K", (d.classical_dim_diagram - b.len() as f64).abs());
                chk.holds("dim = sum n^2", d.dim == b.iter().map(|n| n * n).sum::<usize>());
                let all_one = b.iter().all(|&n| n == 1);
                chk.holds(
                    "classical_dim vs dim",
                    if all_one { d.classical_dim == d.dim } else { d.classical_dim < d.dim },
                );
                Ok(())
            })
        })
        .collect();
    jobs.push(job("dims [2,1]", move |chk| {
        let d = dims(&profile_set(&[2, 1]), ctx.tol)?;
        chk.holds("dim 5, classical_dim 2", d.dim == 5 && d.classical_dim == 2);
        Ok(())
    }));
    jobs
}

fn sharing(_: Ctx) -> Vec<Job> {
    PROFILES
        .iter()
        .map(|&b| {
            job(format!("profile {b:?}"), move |chk| {
                let x = profile_set(b);
                let (w, wo) = (wire(&x), op_wire(&x));
                let s = share(&x);
                chk.res("self-adjoint", residual(&s.dagger(), &s)?);
                chk.res("idempotent", residual(&s.compose(&s)?, &s)?);
                let uu = unit(&[w.clone(), wo.clone()])?;
                chk.res("shares unit to cup", residual(&s.compose(&uu)?, &Morphism::cup(&w))?);
                // the second leg of sharing carries the algebra of X, i.e. m_op with its inputs swapped
                let mo = mult(std::slice::from_ref(&w))?.relabel(&[wo.clone(), wo.clone()], std::slice::from_ref(&wo))?;
                let id_x = Morphism::identity(std::slice::from_ref(&w));
                let id_xo = Morphism::identity(std::slice::from_ref(&wo));
                let lhs = s.compose(&id_x.tensor(&mo))?;
                let rhs = id_x.tensor(&mo).compose(&s.tensor(&id_xo))?;
                chk.res("right-leg commutation", residual(&lhs, &rhs)?);
                let so = share_wires(std::slice::from_ref(&wo))?;
                chk.res("conjugate is opposite sharing", matrix_residual(s.conjugate().matrix(), so.matrix()));
                chk.holds("conjugate wires", s.conjugate().dom() == so.dom());
                Ok(())
            })
        })
        .collect()
}

fn sharing_game(ctx: Ctx) -> Vec<Job> {
    PROFILES
        .iter()
        .map(|&b| {
            job(format!("profile {b:?}"), move |chk| {
                let x = profile_set(b);
                chk.holds("game iff classical", is_game(&share(&x), ctx.tol)? == x.is_classical());
                Ok(())
            })
        })
        .collect()
}

fn quantum_functions(ctx: Ctx) -> Vec<Job> {
    let mut jobs = Vec::new();
    let pairs: [(&[usize], &[usize]); 4] = [(&[1, 1], &[1, 1, 1]), (&[1, 1, 1], &[1, 1]), (&[2], &[2]), (&[2, 1], &[1, 2])];
    for (i, (xb, ab)) in pairs.into_iter().enumerate() {
        let classical = xb.iter().chain(ab).all(|&n| n == 1);
        let mut kinds = vec![GenKind::ControlledIsomorphism { resource_dim: 1 }];
        if classical {
            kinds = vec![GenKind::DetFunction];
            kinds.extend(RESOURCE_DIMS.map(|d| GenKind::Pvm { resource_dim: d }));
        } else {
            kinds.push(GenKind::QsetIsomorphism);
            kinds.extend([2, 3].map(|d| GenKind::ControlledIsomorphism { resource_dim: d }));
        }
        for (j, kind) in kinds.into_iter().enumerate() {
            let seed = ctx.seed.index((i * 16 + j) as u64);
            jobs.push(job(format!("{kind:?} {xb:?}->{ab:?}"), move |chk| {
                let x = QuantumSet::new("X", xb)?;
                let a = QuantumSet::new("A", ab)?;
                let e = gen_quantum_function(&kind, &x, &a, seed)?;
                let r = e.report();
                chk.res("comultiplicative", r.comult);
                chk.res("counital", r.counital);
                chk.res("self-conjugate", r.self_conj);
                chk.res("conjugate is a quantum function", e.conj().report().worst());
                chk.res("opposite partner is a quantum function", e.opposite_partner()?.report().worst());
                let mut m = e.map().matrix().clone();
                m[(0, 0)] += C64::new(0.05, 0.02);
                let bad = Morphism::new(e.map().dom().to_vec(), e.map().cod().to_vec(), m)?;
                chk.holds("tampered map rejected", !qfunc_report(&bad)?.passes(ctx.tol));
                Ok(())
            }));
        }
    }
    jobs
}

fn canonical_games(ctx: Ctx) -> Vec<Job> {
    let mut jobs = Vec::new();
    for &b in &PROFILES {
        jobs.push(job(format!("identity game {b:?}"), move |chk| {
            let x = profile_set(b);
            let l = canonical_game(CanonicalGame::Identity, &[wire(&x)], &[])?;
            let r = game_report(&l)?;
            chk.res("idempotent", r.idempotent);
            chk.res("self-conjugate", r.self_conjugate);
            let s = sync_status(&l)?;
            chk.res("synchronous", s.synchronous);
            chk.res("cosynchronous", s.cosynchronous);
            chk.holds("fair", fairness(&l, ctx.tol, ctx.seed.0)? == Fairness::Fair);
            Ok(())
        }));
    }
    let pairs: [(&[usize], &[usize]); 4] = [(&[1, 1, 1], &[1, 1]), (&[2], &[1, 1]), (&[2, 1], &[2]), (&[1, 1], &[2, 1])];
    for (xb, ab) in pairs {
        jobs.push(job(format!("function game {xb:?}->{ab:?}"), move |chk| {
            let x = QuantumSet::new("X", xb)?;
            let a = QuantumSet::new("A", ab)?;
            let l = canonical_game(CanonicalGame::Function, &[wire(&x)], &[wire(&a)])?;
            let r = game_report(&l)?;
            chk.res("idempotent", r.idempotent);
            chk.res("self-conjugate", r.self_conjugate);
            chk.res("synchronous", sync_status(&l)?.synchronous);
            let u = canonical_game(CanonicalGame::UnfairFunction, &[wire(&x)], &[wire(&a)])?;
            let ru = game_report(&u)?;
            chk.res("unfair variant idempotent", ru.idempotent);
            chk.res("unfair variant self-conjugate", ru.self_conjugate);
            chk.holds("unfair variant not fair", fairness(&u, 1e-7, ctx.seed.0)? == Fairness::Unfair);
            Ok(())
        }));
    }
    jobs
}

fn cp_channels(ctx: Ctx) -> Vec<Job> {
    let mut jobs = Vec::new();
    for d in RESOURCE_DIMS {
        let seed = ctx.seed.index(d as u64);
        jobs.push(job(format!("PVM tensor strategy on C^{d} x C^{d}"), move |chk| {
            let x = QuantumSet::classical("X", 2)?;
            let a = QuantumSet::classical("A", 3)?;
            let e = gen_quantum_function(&GenKind::Pvm { resource_dim: d }, &x, &a, seed.split("e"))?;
            let f = gen_quantum_function(&GenKind::Pvm { resource_dim: d }, &x, &a, seed.split("f"))?.opposite_partner()?;
            let t = combine(CombineKind::Tensor, &e, &f, ctx.tol)?;
            let psi = random_state(d * d, &mut seed.split("psi").rng());
            let p = realize_correlation(&t.map, &psi, ctx.tol)?;
            let ch = channel_props(&p)?;
            chk.res("cp", ch.cp);
            chk.res("counital", ch.counital);
            Ok(())
        }));
        let seed = ctx.seed.split("quantum").index(d as u64);
        jobs.push(job(format!("controlled isomorphism [2,1] on C^{d}"), move |chk| {
            let x = QuantumSet::new("X", &[2, 1])?;
            let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: d }, &x, &x, seed)?;
            let p = cup_correlation(&e, ctx.tol)?;
            let ch = channel_props(&p)?;
            chk.res("cp", ch.cp);
            chk.res("counital", ch.counital);
            chk.res("unital", ch.unital);
            Ok(())
        }));
    }
    for &b in &PROFILES {
        jobs.push(job(format!("sharing {b:?}"), move |chk| {
            let x = profile_set(b);
            chk.holds("cp iff classical", is_cp(&share(&x), ctx.tol)? == x.is_classical());
            Ok(())
        }));
    }
    jobs
}

fn marginals(ctx: Ctx) -> Vec<Job> {
    let mut jobs = Vec::new();
    for d in RESOURCE_DIMS {
        for i in 0..3u64 {
            let seed = ctx.seed.index(d as u64 * 8 + i);
            jobs.push(job(format!("tensor strategy on C^{d}, sample {i}"), move |chk| {
                let x = QuantumSet::classical("X", 3)?;
                let a = QuantumSet::classical("A", 2)?;
                let e = gen_quantum_function(&GenKind::Pvm { resource_dim: d }, &x, &a, seed.split("e"))?;
                let f = gen_quantum_function(&GenKind::Pvm { resource_dim: d }, &x, &a, seed.split("f"))?.opposite_partner()?;
                let t = combine(CombineKind::Tensor, &e, &f, ctx.tol)?;
                let psi = random_state(d * d, &mut seed.split("psi").rng());
                let p = realize_correlation(&t.map, &psi, ctx.tol)?;
                let m = nonsignalling_marginals(&p, ctx.tol)?;
                chk.res("non-signalling", m.residual);
                let (ca, cb) = (channel_props(&m.p_a)?, channel_props(&m.p_b)?);
                chk.res("alice marginal cp", ca.cp);
                chk.res("alice marginal counital", ca.counital);
                chk.res("bob marginal cp", cb.cp);
                chk.res("bob marginal counital", cb.counital);
                Ok(())
            }));
        }
        let seed = ctx.seed.split("quantum").index(d as u64);
        jobs.push(job(format!("controlled isomorphism [2,1] on C^{d}"), move |chk| {
            let x = QuantumSet::new("X", &[2, 1])?;
            let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: d }, &x, &x, seed)?;
            let p = cup_correlation(&e, ctx.tol)?;
            let m = nonsignalling_marginals(&p, ctx.tol)?;
            chk.res("non-signalling", m.residual);
            chk.res("alice marginal counital", channel_props(&m.p_a)?.counital);
            Ok(())
        }));
    }
    jobs
}

fn products(ctx: Ctx) -> Vec<Job> {
    let mut jobs = Vec::new();
    jobs.push(job("tensor of identity [2] and function game 2->2", move |chk| {
        let q = profile_set(&[2]);
        let c2 = QuantumSet::classical("C", 2)?;
        let l1 = canonical_game(CanonicalGame::Identity, &[wire(&q)], &[])?;
        let l2 = canonical_game(CanonicalGame::Function, &[wire(&c2)], &[wire(&c2)])?;
        let r = game_report(&tensor_game(&l1, &l2)?)?;
        chk.res("idempotent", r.idempotent);
        chk.res("self-conjugate", r.self_conjugate);
        Ok(())
    }));
    for (gn, g_adj, hn, h_adj) in [
        ("C4", cycle(4), "K2", complete_adjacency(2)),
        ("C5", cycle(5), "K3", complete_adjacency(3)),
    ] {
        jobs.push(job(format!("hom game {gn}->{hn} with function game"), move |chk| {
            let g = QuantumGraph::classical(gn, &g_adj, ctx.tol)?;
            let h = QuantumGraph::classical(hn, &h_adj, ctx.tol)?;
            let l1 = hom_game(&g, &h)?;
            let l2 = canonical_game(CanonicalGame::Function, &[g.wire()], &[h.wire()])?;
            chk.holds("games commute", commutes(&l1, &l2, ctx.tol)?);
            let prod = star(&l1, &l2)?;
            let r = game_report(&prod)?;
            chk.res("product idempotent", r.idempotent);
            chk.res("product self-conjugate", r.self_conjugate);
            let f = all_functions(g_adj.len(), h_adj.len())
                .into_iter()
                .find(|f| is_classical_hom(&g_adj, &h_adj, f))
                .ok_or_else(|| QsyncError::Unsatisfiable("no homomorphism".into()))?;
            let e = QuantumFunction::new(deterministic_function(g.set(), h.set(), &f)?, ctx.tol)?;
            let p = cup_correlation(&e, ctx.tol)?;
            chk.res("perfect for first", perfect_residual(&p, &l1)?);
            chk.res("perfect for second", perfect_residual(&p, &l2)?);
            chk.res("perfect for product", perfect_residual(&p, &prod)?);
            Ok(())
        }));
    }
    jobs.push(job("quantum function game [2]->[2] with identity game", move |chk| {
        let q = profile_set(&[2]);
        let l1 = canonical_game(CanonicalGame::Function, &[wire(&q)], &[wire(&q)])?;
        let l2 = canonical_game(CanonicalGame::Identity, &[wire(&q)], &[])?;
        chk.holds("games commute", commutes(&l1, &l2, ctx.tol)?);
        let prod = star(&l1, &l2)?;
        chk.res("product idempotent", game_report(&prod)?.idempotent);
        let p = Morphism::identity(l2.dom());
        chk.res("identity perfect for product", perfect_residual(&p, &prod)?);
        Ok(())
    }));
    jobs
}

fn sync_reduction(ctx: Ctx) -> Vec<Job> {
    (0..100u64)
        .map(|i| {
            let seed = ctx.seed.index(i);
            let perturbed = i >= 50;
            job(format!("{} correlation #{i}", if perturbed { "perturbed" } else { "synchronous" }), move |chk| {
                let mut rng = seed.split("shape").rng();
                let x = wire(&QuantumSet::classical("X", rng.random_range(2..=3))?);
                let a = wire(&QuantumSet::classical("A", rng.random_range(2..=3))?);
                let mut p = random_sync_classical(&x, &a, seed)?;
                if perturbed {
                    p = perturb(&p, rng.random_range(0.05..0.5))?;
                }
                let diagram = sync_status(&p)?.synchronous(ctx.tol);
                let entrywise = entrywise_sync_defect(&p) <= ctx.tol;
                chk.holds("diagram agrees with entrywise test", diagram == entrywise);
                chk.holds("expected verdict", diagram != perturbed);
                Ok(())
            })
        })
        .collect()
}

fn perf_sync(ctx: Ctx) -> Vec<Job> {
    let cases = match perfect_cases(ctx.seed, ctx.tol) {
        Ok(c) => c,
        Err(e) => return vec![job("construct perfect cases", move |_| Err(e))],
    };
    cases
        .into_iter()
        .map(|case| {
            job(case.desc.clone(), move |chk| {
                let g = game_report(&case.game)?;
                chk.res("game", g.idempotent.max(g.self_conjugate));
                chk.res("correlation perfect", perfect_residual(&case.correlation, &case.game)?);
                chk.res("correlation synchronous", sync_status(&case.correlation)?.synchronous);
                if let Some(phi) = &case.strategy {
                    chk.res("strategy perfect", perfect_strategy_residual(phi, &case.game)?);
                    chk.res("strategy synchronous", sync_strategy_status(phi)?.synchronous);
                }
                Ok(())
            })
        })
        .collect()
}

fn loop_slide(ctx: Ctx) -> Vec<Job> {
    let cases = match perfect_cases(ctx.seed, ctx.tol) {
        Ok(c) => c,
        Err(e) => return vec![job("construct perfect cases", move |_| Err(e))],
    };
    cases
        .into_iter()
        .map(|case| {
            job(case.desc.clone(), move |chk| {
                let p = &case.correlation;
                let n = case.question_dim as f64;
                chk.res("loopslide - dim X", (loopslide(p)? - c(n)).norm());
                if case.classical {
                    let (nx, na) = (p.dom()[0].dim(), p.cod()[0].dim());
                    let diag: C64 = (0..nx)
                        .flat_map(|x| (0..na).map(move |a| (x, a)))
                        .map(|(x, a)| p.matrix()[(a * na + a, x * nx + x)])
                        .sum();
                    chk.res("sum p(a,a|x,x) - |X|", (diag - c(n)).norm());
                }
                Ok(())
            })
        })
        .collect()
}

fn cs_inequality(ctx: Ctx) -> Vec<Job> {
    let mut jobs = Vec::new();
    for d in RESOURCE_DIMS {
        for i in 0..50u64 {
            let seed = ctx.seed.split("random").index(d as u64 * 1000 + i);
            jobs.push(job(format!("random pair on C^{d} #{i}"), move |chk| {
                let x = QuantumSet::classical("X", 2)?;
                let a = QuantumSet::classical("A", 2)?;
                let e = gen_quantum_function(&GenKind::Pvm { resource_dim: d }, &x, &a, seed.split("e"))?;
                let f = gen_quantum_function(&GenKind::Pvm { resource_dim: d }, &x, &a, seed.split("f"))?.opposite_partner()?;
                let psi = random_state(d, &mut seed.split("psi").rng());
                let s = cs_scalars(&e, &f, Some(&psi), ctx.tol)?;
                chk.res("lhs - rhs", (s.lhs - s.rhs).max(0.0));
                chk.info("lhs", s.lhs);
                chk.info("rhs", s.rhs);
                Ok(())
            }));
        }
        let seed = ctx.seed.split("matched").index(d as u64);
        jobs.push(job(format!("matched pairs on C^{d}"), move |chk| {
            let x = QuantumSet::new("X", &[2, 1])?;
            let c3 = QuantumSet::classical("C", 3)?;
            let es = [
                gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: d }, &x, &x, seed)?,
                gen_quantum_function(&GenKind::Pvm { resource_dim: d }, &c3, &c3, seed.split("pvm"))?,
            ];
            for (k, e) in es.iter().enumerate() {
                let partner = e.opposite_partner()?;
                for psi in [None, Some(random_state(d, &mut seed.split("psi").index(k as u64).rng()))] {
                    let s = cs_scalars(e, &partner, psi.as_deref(), ctx.tol)?;
                    chk.res("equality", (s.lhs - s.rhs).abs() / s.rhs.max(1.0));
                    chk.res("partner residual", s.partner_residual);
                }
            }
            Ok(())
        }));
    }
    jobs
}

fn sync_strategies(ctx: Ctx) -> Vec<Job> {
    let mut jobs = Vec::new();
    for (xb, ab) in [(&[2usize][..], &[2usize][..]), (&[2, 1], &[1, 2]), (&[1, 1, 1], &[1, 1, 1])] {
        for d in RESOURCE_DIMS {
            let seed = ctx.seed.index(d as u64).split(&format!("{xb:?}"));
            jobs.push(job(format!("controlled isomorphism {xb:?}->{ab:?} on C^{d}"), move |chk| {
                let x = QuantumSet::new("X", xb)?;
                let a = QuantumSet::new("A", ab)?;
                let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: d }, &x, &a, seed)?;
                let phi = self_commuting(&e, ctx.tol)?;
                chk.res("strategy synchronous", sync_strategy_status(&phi.map)?.synchronous);
                let alice = QuantumFunction::new_unchecked(extract_alice(&phi.map)?)?;
                chk.res("alice is a quantum function", alice.report().worst());
                let rebuilt = self_commuting(&alice, ctx.tol)?;
                chk.res("rebuilt from alice", residual(&rebuilt.map, &phi.map)?);
                chk.res("correlation synchronous", sync_status(&cup_correlation(&e, ctx.tol)?)?.synchronous);
                Ok(())
            }));
        }
    }
    for d in RESOURCE_DIMS {
        let seed = ctx.seed.split("pvm").index(d as u64);
        jobs.push(job(format!("PVM with its conjugate on C^{d}"), move |chk| {
            let x = QuantumSet::classical("X", 3)?;
            let a = QuantumSet::classical("A", 2)?;
            let e = gen_quantum_function(&GenKind::Pvm { resource_dim: d }, &x, &a, seed)?;
            chk.res("correlation synchronous", sync_status(&cup_correlation(&e, ctx.tol)?)?.synchronous);
            Ok(())
        }));
    }
    jobs
}

fn bistrategy_structure(ctx: Ctx) -> Vec<Job> {
    let mut jobs = Vec::new();
    jobs.push(job("commuting: controlled isomorphism [2,1] on C^2", move |chk| {
        let x = QuantumSet::new("X", &[2, 1])?;
        let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: 2 }, &x, &x, ctx.seed.index(0))?;
        flip_class_check(chk, &self_commuting(&e, ctx.tol)?, ctx.tol)
    }));
    jobs.push(job("tensor: isomorphisms of [2] on C^2 and C^1", move |chk| {
        let x = QuantumSet::new("X", &[2])?;
        let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: 2 }, &x, &x, ctx.seed.index(1))?;
        let f = gen_quantum_function(&GenKind::QsetIsomorphism, &x, &x, ctx.seed.index(2))?.opposite_partner()?;
        flip_class_check(chk, &combine(CombineKind::Tensor, &e, &f, ctx.tol)?, ctx.tol)
    }));
    jobs.push(job("deterministic: permutations of 3 points", move |chk| {
        let x = QuantumSet::classical("X", 3)?;
        flip_class_check(chk, &deterministic_pair(&x, &x, &[2, 0, 1], &[1, 2, 0], ctx.tol)?, ctx.tol)
    }));
    jobs
}

fn flip_class_check(chk: &mut Check, cs: &CombinedStrategy, tol: f64) -> Result<()> {
    chk.holds("bistrategy", is_bistrategy(&cs.map, tol)?);
    let flipped = flip_combined(cs, tol)?;
    chk.res("flip is a quantum function", qfunc_report(&flipped.map)?.worst());
    chk.res("flip of players equals flip of strategy", matrix_residual(flipped.map.matrix(), flip_strategy(&cs.map)?.matrix()));
    Ok(())
}

fn bisync_dims(ctx: Ctx) -> Vec<Job> {
    let mut jobs = Vec::new();
    let pairs: [(&[usize], &[usize]); 4] = [(&[2, 1], &[1, 2]), (&[1, 1], &[1, 1]), (&[2], &[2]), (&[2, 2], &[2, 2])];
    for (xb, ab) in pairs {
        for d in RESOURCE_DIMS {
            let seed = ctx.seed.index(d as u64).split(&format!("{xb:?}"));
            jobs.push(job(format!("controlled isomorphism {xb:?}->{ab:?} on C^{d}"), move |chk| {
                let x = QuantumSet::new("X", xb)?;
                let a = QuantumSet::new("A", ab)?;
                let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: d }, &x, &a, seed)?;
                let p = cup_correlation(&e, ctx.tol)?;
                let ch = channel_props(&p)?;
                chk.res("bicorrelation", ch.cp.max(ch.counital).max(ch.unital));
                let s = sync_status(&p)?;
                chk.res("bisynchronous", s.synchronous.max(s.cosynchronous));
                chk.holds("dim X = dim A", x.dim() == a.dim());
                let phi = self_commuting(&e, ctx.tol)?;
                chk.holds("bistrategy", is_bistrategy(&phi.map, ctx.tol)?);
                chk.holds("classical dims agree", x.classical_dim() == a.classical_dim());
                Ok(())
            }));
        }
        let seed = ctx.seed.split("det").split(&format!("{xb:?}"));
        jobs.push(job(format!("deterministic {xb:?}->{ab:?}"), move |chk| {
            let x = QuantumSet::new("X", xb)?;
            let a = QuantumSet::new("A", ab)?;
            let e = gen_quantum_function(&GenKind::QsetIsomorphism, &x, &a, seed)?;
            let phi = self_commuting(&e, ctx.tol)?;
            let got = extract_alice(&phi.map)?;
            chk.res("extracts the isomorphism", residual(&got, e.map())?);
            chk.res("extracted map is bijective", qfunc_report(&flip_strategy(&got)?)?.worst());
            Ok(())
        }));
    }
    jobs.push(job("[2] -> [1,1,1] is unsatisfiable", move |chk| {
        let x = QuantumSet::new("X", &[2])?;
        let a = QuantumSet::new("A", &[1, 1, 1])?;
        let r = gen_quantum_function(&GenKind::QsetIsomorphism, &x, &a, ctx.seed);
        chk.holds("reported unsatisfiable", matches!(r, Err(QsyncError::Unsatisfiable(_))));
        Ok(())
    }));
    jobs
}

fn graph_pairs(tol: f64) -> Vec<(QuantumGraph, QuantumGraph)> {
    let gs = grid_graphs(tol);
    let mut out = Vec::new();
    for g in &gs {
        for h in &gs {
            out.push((g.clone(), h.clone()));
        }
    }
    out
}

fn graph_name(g: &QuantumGraph) -> String {
    if g.set().is_classical() {
        g.set().name().to_string()
    } else {
        format!("complete({:?})", g.set().blocks())
    }
}

fn hom_game_suite(ctx: Ctx) -> Vec<Job> {
    graph_pairs(ctx.tol)
        .into_iter()
        .map(|(g, h)| {
            job(format!("{} -> {}", graph_name(&g), graph_name(&h)), move |chk| {
                let l = hom_game(&g, &h)?;
                let r = game_report(&l)?;
                chk.res("idempotent", r.idempotent);
                chk.res("self-conjugate", r.self_conjugate);
                chk.res("synchronous", sync_status(&l)?.synchronous);
                if g.set().is_classical() && h.set().is_classical() {
                    let (ga, ha) = (adjacency_of(&g), adjacency_of(&h));
                    let want = classical_map(&g.wire(), &h.wire(), |a, b, x, y| {
                        let ok = if x == y {
                            a == b
                        } else if ga[x][y] == 1 {
                            ha[a][b] == 1
                        } else {
                            true
                        };
                        if ok { 1.0 } else { 0.0 }
                    })?;
                    chk.res("classical rule", max_abs(&(l.matrix() - want.matrix())));
                }
                Ok(())
            })
        })
        .collect()
}

fn hom_table(ctx: Ctx) -> Vec<Job> {
    graph_pairs(ctx.tol)
        .into_iter()
        .map(|(g, h)| {
            job(format!("{} -> {}", graph_name(&g), graph_name(&h)), move |chk| {
                chk.res("table", hom_table_residual(&g, &h)?);
                let t = crate::graphs::hom_terms(&g, &h)?;
                let mut sum = Morphism::zero(t[0].dom(), t[0].cod());
                for (term, s) in t.iter().zip(crate::graphs::HOM_SIGNS) {
                    sum = sum.add(&term.scale(c(s)))?;
                }
                chk.res("terms sum to the game", residual(&sum, &hom_game(&g, &h)?)?);
                Ok(())
            })
        })
        .collect()
}

/// Brute force over deterministic strategies `(f, g)` for a classical pair.
pub fn deterministic_hom_census(g: &QuantumGraph, h: &QuantumGraph, tol: f64) -> Result<HomCensus> {
    let (ga, ha) = (adjacency_of(g), adjacency_of(h));
    let lambda = hom_game(g, h)?;
    let funcs = all_functions(ga.len(), ha.len());
    let homs: Vec<Vec<usize>> = funcs.iter().filter(|f| is_classical_hom(&ga, &ha, f)).cloned().collect();
    let mut forward_worst: f64 = 0.0;
    for f in &homs {
        let e = QuantumFunction::new(deterministic_function(g.set(), h.set(), f)?, tol)?;
        let p = hom_to_correlation(&e, g, h, tol)?;
        forward_worst = forward_worst.max(perfect_residual(&p, &lambda)?);
        forward_worst = forward_worst.max(hom_intertwining_residual(&p, g, h)?);
    }
    let pairs: Vec<(usize, usize)> = (0..funcs.len()).flat_map(|i| (0..funcs.len()).map(move |j| (i, j))).collect();
    let perfect: Vec<(usize, usize)> = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let phi = deterministic_pair(g.set(), h.set(), &funcs[i], &funcs[j], tol).ok()?;
            (perfect_strategy_residual(&phi.map, &lambda).ok()? <= tol).then_some((i, j))
        })
        .collect();
    let mut extracted = Vec::new();
    let mut round_trip_worst: f64 = 0.0;
    for &(i, j) in &perfect {
        let phi = deterministic_pair(g.set(), h.set(), &funcs[i], &funcs[j], tol)?;
        let e = extract_hom(&phi, g, h, tol)?;
        let want = deterministic_function(g.set(), h.set(), &funcs[i])?;
        round_trip_worst = round_trip_worst.max(matrix_residual(e.map().matrix(), want.matrix()));
        round_trip_worst = round_trip_worst.max(quantum_graph_hom_residual(e.map(), g, h)?);
        extracted.push(funcs[i].clone());
    }
    Ok(HomCensus {
        functions: funcs.len(),
        homs,
        perfect_pairs: perfect,
        extracted,
        forward_worst,
        round_trip_worst,
    })
}

#[derive(Clone, Debug)]
pub struct HomCensus {
    pub functions: usize,
    pub homs: Vec<Vec<usize>>,
    pub perfect_pairs: Vec<(usize, usize)>,
    pub extracted: Vec<Vec<usize>>,
    pub forward_worst: f64,
    pub round_trip_worst: f64,
}

impl HomCensus {
    /// Perfect pairs are exactly `(f, f)` with `f` a homomorphism, and each extracts to `f`.
    pub fn consistent(&self) -> bool {
        let mut ex = self.extracted.clone();
        ex.sort();
        let mut homs = self.homs.clone();
        homs.sort();
        self.perfect_pairs.iter().all(|(i, j)| i == j) && ex == homs
    }
}

fn hom_correspondence(ctx: Ctx) -> Vec<Job> {
    let mut jobs = Vec::new();
    for (gn, g_adj, hn, h_adj) in [
        ("C4", cycle(4), "K2", complete_adjacency(2)),
        ("C5", cycle(5), "K3", complete_adjacency(3)),
        ("K3", complete_adjacency(3), "K2", complete_adjacency(2)),
    ] {
        jobs.push(job(format!("{gn} -> {hn} brute force"), move |chk| {
            let g = QuantumGraph::classical(gn, &g_adj, ctx.tol)?;
            let h = QuantumGraph::classical(hn, &h_adj, ctx.tol)?;
            let census = deterministic_hom_census(&g, &h, ctx.tol)?;
            chk.res("forward perfect", census.forward_worst);
            chk.res("round trip", census.round_trip_worst);
            chk.holds("perfect strategies are exactly the homomorphisms", census.consistent());
            chk.info("homomorphisms", census.homs.len() as f64);
            chk.info("strategies searched", (census.functions * census.functions) as f64);
            Ok(())
        }));
    }
    for d in RESOURCE_DIMS {
        let seed = ctx.seed.index(d as u64);
        jobs.push(job(format!("complete([2]) controlled isomorphism on C^{d}"), move |chk| {
            let q = quantum_complete(ctx.tol);
            let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: d }, q.set(), q.set(), seed)?;
            chk.res("quantum graph homomorphism", quantum_graph_hom_residual(e.map(), &q, &q)?);
            let p = hom_to_correlation(&e, &q, &q, ctx.tol)?;
            chk.res("perfect", perfect_residual(&p, &hom_game(&q, &q)?)?);
            chk.res("edges to edges", hom_intertwining_residual(&p, &q, &q)?);
            let phi = self_commuting(&e, ctx.tol)?;
            let back = extract_hom(&phi, &q, &q, ctx.tol)?;
            chk.res("round trip", residual(back.map(), e.map())?);
            Ok(())
        }));
    }
    jobs
}

/// Permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    all_functions(n, n)
        .into_iter()
        .filter(|f| {
            let mut seen = vec![false; n];
            f.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
        })
        .collect()
}

/// Bijections whose deterministic bistrategy is perfect for the isomorphism game of `(g, g)`.
pub fn perfect_bijections(g: &QuantumGraph, tol: f64) -> Result<Vec<Vec<usize>>> {
    let lambda = iso_game(g, g, tol)?;
    let mut out = Vec::new();
    for p in permutations(g.set().dim()) {
        let phi = deterministic_pair(g.set(), g.set(), &p, &p, tol)?;
        if is_bistrategy(&phi.map, tol)? && perfect_strategy_residual(&phi.map, &lambda)? <= tol {
            out.push(p);
        }
    }
    Ok(out)
}

fn iso_game_suite(ctx: Ctx) -> Vec<Job> {
    let mut jobs: Vec<Job> = grid_graphs(ctx.tol)
        .into_iter()
        .map(|g| {
            job(format!("{} with itself", graph_name(&g)), move |chk| {
                let gh = hom_game(&g, &g)?;
                let hg = hom_game(&g, &g)?.dagger();
                chk.res("order independence", residual(&star(&gh, &hg)?, &star(&hg, &gh)?)?);
                let l = iso_game(&g, &g, ctx.tol)?;
                let r = game_report(&l)?;
                chk.res("idempotent", r.idempotent);
                chk.res("self-conjugate", r.self_conjugate);
                let s = sync_status(&l)?;
                chk.res("bisynchronous", s.synchronous.max(s.cosynchronous));
                Ok(())
            })
        })
        .collect();
    jobs.push(job("C4 automorphisms by brute force", move |chk| {
        let g = QuantumGraph::classical("C4", &cycle(4), ctx.tol)?;
        let found = perfect_bijections(&g, ctx.tol)?;
        let adj = cycle(4);
        let autos: Vec<Vec<usize>> = permutations(4).into_iter().filter(|p| is_classical_hom(&adj, &adj, p)).collect();
        chk.holds("8 perfect bijections", found.len() == 8);
        chk.holds("perfect bijections are the automorphisms", found == autos);
        Ok(())
    }));
    for d in RESOURCE_DIMS {
        let seed = ctx.seed.index(d as u64);
        jobs.push(job(format!("complete([2]) controlled isomorphism on C^{d}"), move |chk| {
            let q = quantum_complete(ctx.tol);
            let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: d }, q.set(), q.set(), seed)?;
            let p = iso_to_bicorrelation(&e, &q, &q, ctx.tol)?;
            chk.res("perfect", perfect_residual(&p, &iso_game(&q, &q, ctx.tol)?)?);
            chk.res("intertwines", crate::graphs::iso_intertwining_residual(&p, &q, &q)?);
            let back = extract_iso(&self_commuting(&e, ctx.tol)?, &q, &q, ctx.tol)?;
            chk.res("round trip", residual(back.map(), e.map())?);
            Ok(())
        }));
    }
    jobs
}

fn concurrent_counterexamples(ctx: Ctx) -> Vec<Job> {
    let mut jobs = Vec::new();
    let pairs: [(&[usize], &[usize]); 3] = [(&[2], &[1, 1]), (&[1, 1, 1], &[1, 1]), (&[2, 1], &[2])];
    for (xb, ab) in pairs {
        jobs.push(job(format!("unfair function game {xb:?}->{ab:?}"), move |chk| {
            let x = QuantumSet::new("X", xb)?;
            let a = QuantumSet::new("A", ab)?;
            let l = canonical_game(CanonicalGame::UnfairFunction, &[wire(&x)], &[wire(&a)])?;
            let (img, cup) = concurrency_image(&l)?;
            chk.res("f(cup) = dim X cup", residual(&img, &cup.scale(c(x.dim() as f64)))?);
            chk.holds("not concurrent", !is_concurrent(&l, ctx.tol)?);
            Ok(())
        }));
    }
    for (gn, g_adj, hn, h_adj) in [
        ("K3", complete_adjacency(3), "K2", complete_adjacency(2)),
        ("C4", cycle(4), "K2", complete_adjacency(2)),
        ("C5", cycle(5), "K3", complete_adjacency(3)),
    ] {
        jobs.push(job(format!("unfair graph game {gn} -> {hn}"), move |chk| {
            let g = QuantumGraph::classical(gn, &g_adj, ctx.tol)?;
            let h = QuantumGraph::classical(hn, &h_adj, ctx.tol)?;
            let l = unfair_graph_game(&g, &h)?;
            let (img, _) = concurrency_image(&l)?;
            chk.res("f(cup) = 0", max_abs(img.matrix()));
            chk.holds("not concurrent", !is_concurrent(&l, ctx.tol)?);
            Ok(())
        }));
    }
    jobs.push(job("unfair graph game on complete([2])", move |chk| {
        let q = quantum_complete(ctx.tol);
        let (img, _) = concurrency_image(&unfair_graph_game(&q, &q)?)?;
        chk.res("f(cup) = 0", max_abs(img.matrix()));
        Ok(())
    }));
    jobs
}

fn bisync_concurrent(ctx: Ctx) -> Vec<Job> {
    let mut jobs = Vec::new();
    let pairs: [(&[usize], &[usize]); 4] = [(&[2, 1], &[1, 2]), (&[1, 1, 1], &[1, 1, 1]), (&[2], &[2]), (&[3], &[3])];
    for (xb, ab) in pairs {
        for d in RESOURCE_DIMS {
            let seed = ctx.seed.index(d as u64).split(&format!("{xb:?}"));
            jobs.push(job(format!("bicorrelation from {xb:?}->{ab:?} on C^{d}"), move |chk| {
                let x = QuantumSet::new("X", xb)?;
                let a = QuantumSet::new("A", ab)?;
                let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: d }, &x, &a, seed)?;
                let p = cup_correlation(&e, ctx.tol)?;
                let s = sync_status(&p)?;
                chk.res("bisynchronous", s.synchronous.max(s.cosynchronous));
                chk.res("unital", channel_props(&p)?.unital);
                let (img, cup) = concurrency_image(&p)?;
                chk.res("concurrent", residual(&img, &cup)?);
                Ok(())
            }));
        }
    }
    for &b in &PROFILES {
        jobs.push(job(format!("identity on {b:?}"), move |chk| {
            let x = profile_set(b);
            let id = Morphism::identity(&[wire(&x), op_wire(&x)]);
            let (img, cup) = concurrency_image(&id)?;
            chk.res("concurrent", residual(&img, &cup)?);
            Ok(())
        }));
    }
    jobs
}

fn bks_classical(ctx: Ctx) -> Vec<Job> {
    (0..20u64)
        .map(|i| {
            let seed = ctx.seed.index(i);
            job(format!("classical correlation #{i}"), move |chk| {
                let mut rng = seed.split("shape").rng();
                let x = wire(&QuantumSet::classical("X", rng.random_range(2..=4))?);
                let a = wire(&QuantumSet::classical("A", rng.random_range(2..=3))?);
                let mut p = random_sync_classical(&x, &a, seed)?;
                if i % 2 == 1 {
                    p = perturb(&p, rng.random_range(0.05..0.5))?;
                }
                let l = loopslide(&p)?;
                chk.res("weighted scalar = loopslide", (bks_sync_scalar(&p)? - l).norm());
                chk.res("diagram = direct sum", (bks_sync_scalar(&p)? - bks_sync_sum(&p)?).norm());
                Ok(())
            })
        })
        .collect()
}

fn schur_suite(_: Ctx) -> Vec<Job> {
    PROFILES
        .iter()
        .map(|&b| {
            job(format!("profile {b:?}"), move |chk| {
                let x = profile_set(b);
                for (sign, label) in [(SchurSign::Plus, "plus"), (SchurSign::Minus, "minus")] {
                    let r = schur_cfa(&x, sign).check_axioms()?;
                    for (name, v) in &r.residuals {
                        if name == "special" {
                            chk.info(format!("{label} special"), *v);
                        } else {
                            chk.res(format!("{label} {name}"), *v);
                        }
                    }
                }
                let plus_special = schur_cfa(&x, SchurSign::Plus).check_axioms()?.get("special").unwrap_or(0.0);
                let big_block = b.iter().any(|&n| n >= 2);
                chk.holds("plus special iff all blocks are 1", (plus_special <= 1e-9) != big_block);
                Ok(())
            })
        })
        .collect()
}

/// Printable summary table of suite results.
pub fn summary_table(results: &[SuiteResult]) -> String {
    let mut out = format!("{:<28} {:>9} {:>7} {:>12} {:>10}  {}\n", "suite", "instances", "checks", "worst", "ms", "verdict");
    for r in results {
        let worst = r
            .instances
            .iter()
            .flat_map(|i| i.residuals.values())
            .cloned()
            .fold(0.0f64, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) });
        out.push_str(&format!(
            "{:<28} {:>9} {:>7} {:>12.3e} {:>10.1}  {}\n",
            r.suite,
            r.instances.len(),
            r.check_count(),
            worst,
            r.wall_ms,
            if r.pass { "pass" } else { "FAIL" }
        ));
    }
    out
}
