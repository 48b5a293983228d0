//! Acceptance criteria 1 to 15. Every criterion prints one line and the test
//! fails if any criterion does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use qsync_core::gamemaps::{
    bks_sync_scalar, canonical_game, channel_props, classical_map, concurrency_image, game_report, is_concurrent,
    is_game, loopslide, perfect_residual, star, sync_status, CanonicalGame,
};
use qsync_core::graphs::{
    complete_adjacency, cycle, extract_hom, hom_game, hom_terms, hom_to_correlation, iso_game, unfair_graph_game,
    QuantumGraph, HOM_SIGNS,
};
use qsync_core::harness::{perfect_cases, quantum_complete};
use qsync_core::qset::{
    check_axioms, comult, dims, mult, op_wire, schur_cfa, share, share_wires, unit, wire, SchurSign,
};
use qsync_core::rng::Seed;
use qsync_core::strategies::{
    combine, cs_scalars, deterministic_function, extract_alice, flip_combined, flip_strategy, gen_quantum_function,
    is_bistrategy, is_quantum_function, normalized_cup, perfect_strategy_residual, qfunc_report, random_state,
    realize_correlation, sync_strategy_status, CombineKind, CombinedStrategy, GenKind, QuantumFunction,
};
use qsync_core::tensor::{c, matrix_residual, max_abs, residual, CMatrix};
use qsync_core::{Morphism, QsyncError, QuantumSet, Result, Wire};

const TOL: f64 = 1e-9;
const PROFILES: [&[usize]; 7] = [&[1], &[1, 1], &[1, 1, 1], &[2], &[2, 1], &[3], &[2, 2]];
const SEED: Seed = Seed(20240601);

#[derive(Default)]
struct Tally {
    checks: usize,
    worst: f64,
    failures: Vec<String>,
}

impl Tally {
    fn res(&mut self, label: impl AsRef<str>, r: f64) {
        self.checks += 1;
        if r.is_nan() || r > TOL {
            self.failures.push(format!("{} residual {r:.3e}", label.as_ref()));
        }
        self.worst = if r.is_nan() { f64::NAN } else { self.worst.max(r) };
    }

    fn ok(&mut self, label: impl AsRef<str>, holds: bool) {
        self.checks += 1;
        if !holds {
            self.failures.push(label.as_ref().to_string());
        }
    }
}

fn criterion(n: usize, title: &str, body: impl FnOnce(&mut Tally) -> Result<()>) -> Option<String> {
    let mut t = Tally::default();
    let outcome = catch_unwind(AssertUnwindSafe(|| body(&mut t)));
    match outcome {
        Ok(Ok(())) => {}
        Ok(Err(e)) => t.failures.push(format!("error: {e}")),
        Err(_) => t.failures.push("panicked".into()),
    }
    let verdict = if t.failures.is_empty() { "PASS" } else { "FAIL" };
    let mut line = format!("criterion {n:>2} {verdict}  {title:<38} {:>5} checks  worst {:.2e}", t.checks, t.worst);
    if let Some(first) = t.failures.first() {
        line.push_str(&format!("  ({} failing, first: {first})", t.failures.len()));
    }
    println!("{line}");
    (!t.failures.is_empty()).then(|| format!("criterion {n}: {title}"))
}

fn set(name: &str, blocks: &[usize]) -> Arc<QuantumSet> {
    QuantumSet::new(name, blocks).unwrap()
}

fn classical_graph(name: &str, adj: &[Vec<u8>]) -> QuantumGraph {
    QuantumGraph::classical(name, adj, TOL).unwrap()
}

fn grid_graphs() -> Vec<(String, QuantumGraph, Option<Vec<Vec<u8>>>)> {
    let mut out: Vec<_> = [("K2", complete_adjacency(2)), ("K3", complete_adjacency(3)), ("C4", cycle(4)), ("C5", cycle(5))]
        .into_iter()
        .map(|(n, a)| (n.to_string(), classical_graph(n, &a), Some(a)))
        .collect();
    out.push(("complete([2])".into(), quantum_complete(TOL), None));
    out
}

fn functions(n: usize, m: usize) -> Vec<Vec<usize>> {
    (0..m.pow(n as u32))
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

fn preserves_edges(g: &[Vec<u8>], h: &[Vec<u8>], f: &[usize]) -> bool {
    (0..g.len()).all(|x| (0..g.len()).all(|y| g[x][y] == 0 || h[f[x]][f[y]] == 1))
}

fn partner_pair(x: &Arc<QuantumSet>, a: &Arc<QuantumSet>, f: &[usize], g: &[usize]) -> Result<CombinedStrategy> {
    let e = QuantumFunction::new(deterministic_function(x, a, f)?, TOL)?;
    let h = QuantumFunction::new(deterministic_function(x, a, g)?, TOL)?.opposite_partner()?;
    combine(CombineKind::Deterministic, &e, &h, TOL)
}

fn cup_correlation(e: &QuantumFunction) -> Result<Morphism> {
    let t = combine(CombineKind::Tensor, e, &e.conj(), TOL)?;
    realize_correlation(&t.map, &normalized_cup(e.resource_dim()), TOL)
}

fn self_commuting(e: &QuantumFunction) -> Result<CombinedStrategy> {
    combine(CombineKind::Commuting, e, &e.opposite_partner()?, TOL)
}

/// Classical correlation from a table `p(a, b | x, y)`.
fn table_map(nx: usize, na: usize, p: impl Fn(usize, usize, usize, usize) -> f64) -> Result<Morphism> {
    let x = wire(&QuantumSet::classical("X", nx)?);
    let a = wire(&QuantumSet::classical("A", na)?);
    classical_map(&x, &a, p)
}

/// Shared-randomness mixture of deterministic strategies, optionally with uniform noise.
struct Mixture {
    nx: usize,
    na: usize,
    fs: Vec<Vec<usize>>,
    weights: Vec<f64>,
    noise: f64,
}

impl Mixture {
    fn sample(seed: Seed, noisy: bool) -> Self {
        let mut rng = seed.rng();
        let nx = rng.random_range(2..=4);
        let na = rng.random_range(2..=3);
        let k = rng.random_range(1..=4);
        let fs = (0..k).map(|_| (0..nx).map(|_| rng.random_range(0..na)).collect()).collect();
        let mut weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let noise = if noisy { rng.random_range(0.01..0.5) } else { 0.0 };
        Mixture { nx, na, fs, weights, noise }
    }

    fn p(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        let det: f64 = self
            .fs
            .iter()
            .zip(&self.weights)
            .map(|(f, w)| if f[x] == a && f[y] == b { *w } else { 0.0 })
            .sum();
        (1.0 - self.noise) * det + self.noise / (self.na * self.na) as f64
    }

    fn entrywise_synchronous(&self) -> bool {
        (0..self.nx).all(|x| (0..self.na).all(|a| (0..self.na).all(|b| a == b || self.p(a, b, x, x) == 0.0)))
    }

    fn map(&self) -> Result<Morphism> {
        table_map(self.nx, self.na, |a, b, x, y| self.p(a, b, x, y))
    }
}

fn c1_axioms(t: &mut Tally) -> Result<()> {
    for b in PROFILES {
        let x = set("X", b);
        let r = check_axioms(&x);
        for axiom in ["associativity", "unitality", "frobenius", "special", "symmetric"] {
            let v = r.get(axiom).ok_or_else(|| QsyncError::Malformed(format!("no {axiom} residual")))?;
            t.res(format!("{b:?} {axiom}"), v);
        }
        // specialness straight from the matrix: m m† = id
        let m = mult(&[wire(&x)])?.matrix().clone();
        t.res(format!("{b:?} m m^dagger"), max_abs(&(&m * m.adjoint() - CMatrix::identity(x.dim(), x.dim()))));
    }
    Ok(())
}

fn c2_dims(t: &mut Tally) -> Result<()> {
    let d = dims(&set("X", &[2, 1]), TOL)?;
    t.ok("dims([2,1]) = {5, 2}", d.dim == 5 && d.classical_dim == 2);
    for b in PROFILES {
        let x = set("X", b);
        let n = x.dim();
        let m = mult(&[wire(&x)])?.matrix().clone();
        let swap = CMatrix::from_fn(n * n, n * n, |r, col| c(f64::from(u8::from(r == (col % n) * n + col / n))));
        let tr = (&m * swap * m.adjoint()).trace();
        t.res(format!("{b:?} Tr(m sigma Delta) - blocks"), (tr - c(b.len() as f64)).norm());
        let d = dims(&x, TOL)?;
        let dim: usize = b.iter().map(|k| k * k).sum();
        t.ok(format!("{b:?} dim"), d.dim == dim);
        let all_one = b.iter().all(|&k| k == 1);
        t.ok(
            format!("{b:?} classical_dim vs dim"),
            if all_one { d.classical_dim == d.dim } else { d.classical_dim < d.dim },
        );
    }
    Ok(())
}

fn c3_sharing(t: &mut Tally) -> Result<()> {
    for b in PROFILES {
        let x = set("X", b);
        let (w, wo) = (wire(&x), op_wire(&x));
        let s = share(&x);
        t.res(format!("{b:?} self-adjoint"), residual(&s.dagger(), &s)?);
        t.res(format!("{b:?} idempotent"), residual(&s.compose(&s)?, &s)?);
        let uu = unit(&[w.clone(), wo.clone()])?;
        t.res(format!("{b:?} shared unit is the cup"), residual(&s.compose(&uu)?, &Morphism::cup(&w))?);
        // the second leg of sharing carries the algebra of X
        let mo = mult(std::slice::from_ref(&w))?.relabel(&[wo.clone(), wo.clone()], std::slice::from_ref(&wo))?;
        let id_x = Morphism::identity(std::slice::from_ref(&w));
        let lhs = s.compose(&id_x.tensor(&mo))?;
        let rhs = id_x.tensor(&mo).compose(&s.tensor(&Morphism::identity(std::slice::from_ref(&wo))))?;
        t.res(format!("{b:?} right-leg commutation"), residual(&lhs, &rhs)?);
        let so = share_wires(std::slice::from_ref(&wo))?;
        t.res(format!("{b:?} conjugate is opposite sharing"), matrix_residual(s.conjugate().matrix(), so.matrix()));
    }
    Ok(())
}

fn c4_sharing_game(t: &mut Tally) -> Result<()> {
    for b in PROFILES {
        let x = set("X", b);
        let classical = b.iter().all(|&k| k == 1);
        t.ok(format!("{b:?} is_game(share) = {classical}"), is_game(&share(&x), TOL)? == classical);
    }
    for b in [&[2usize][..], &[2, 1]] {
        t.ok(format!("{b:?} sharing is not a game"), !is_game(&share(&set("X", b)), TOL)?);
    }
    Ok(())
}

fn c5_sync_reduction(t: &mut Tally) -> Result<()> {
    let mut agreed = [0usize; 2];
    for i in 0..100u64 {
        let noisy = i >= 50;
        let mix = Mixture::sample(SEED.split("c5").index(i), noisy);
        let oracle = mix.entrywise_synchronous();
        t.ok(format!("#{i} oracle verdict"), oracle != noisy);
        let diagram = sync_status(&mix.map()?)?.synchronous(TOL);
        t.ok(format!("#{i} sync_status agrees with entrywise test"), diagram == oracle);
        agreed[usize::from(noisy)] += usize::from(diagram == oracle);
    }
    t.ok("50 + 50 agreements", agreed == [50, 50]);
    Ok(())
}

struct Perfect {
    desc: String,
    game: Morphism,
    correlation: Morphism,
    strategy: Option<Morphism>,
    question_dim: usize,
    classical: bool,
}

fn perfect_instances() -> Result<Vec<Perfect>> {
    let mut out: Vec<Perfect> = perfect_cases(SEED.split("perfect"), TOL)?
        .into_iter()
        .map(|p| Perfect {
            desc: p.desc,
            game: p.game,
            correlation: p.correlation,
            strategy: p.strategy,
            question_dim: p.question_dim,
            classical: p.classical,
        })
        .collect();
    // classical tables: identity on equal questions, shared functions for the function game
    for n in [2usize, 3] {
        let x = QuantumSet::classical("X", n)?;
        out.push(Perfect {
            desc: format!("identity game {n}, identity table"),
            game: canonical_game(CanonicalGame::Identity, &[wire(&x)], &[])?,
            correlation: classical_map(&wire(&x), &wire(&x), |a, b, x, y| f64::from(u8::from(a == x && b == y)))?,
            strategy: None,
            question_dim: n,
            classical: true,
        });
        for f in functions(n, 2) {
            let a = QuantumSet::classical("A", 2)?;
            out.push(Perfect {
                desc: format!("function game {n}->2, table of {f:?}"),
                game: canonical_game(CanonicalGame::Function, &[wire(&x)], &[wire(&a)])?,
                correlation: table_map(n, 2, |a, b, x, y| f64::from(u8::from(f[x] == a && f[y] == b)))?,
                strategy: None,
                question_dim: n,
                classical: true,
            });
        }
    }
    Ok(out)
}

fn c6_perf_sync(t: &mut Tally, cases: &[Perfect]) -> Result<()> {
    let kinds = ["identity game", "function game", "hom game C4->K2", "hom game C5->K3", "complete([2])"];
    for k in kinds {
        t.ok(format!("instances for {k}"), cases.iter().any(|p| p.desc.contains(k)));
    }
    for p in cases {
        t.ok(format!("{} game", p.desc), game_report(&p.game)?.passes(TOL));
        t.res(format!("{} correlation perfect", p.desc), perfect_residual(&p.correlation, &p.game)?);
        t.res(format!("{} correlation synchronous", p.desc), sync_status(&p.correlation)?.synchronous);
        if let Some(phi) = &p.strategy {
            t.res(format!("{} strategy perfect", p.desc), perfect_strategy_residual(phi, &p.game)?);
            t.res(format!("{} strategy synchronous", p.desc), sync_strategy_status(phi)?.synchronous);
        }
    }
    Ok(())
}

fn c7_loop_slide(t: &mut Tally, cases: &[Perfect]) -> Result<()> {
    for p in cases {
        let n = p.question_dim as f64;
        t.res(format!("{} loopslide - dim X", p.desc), (loopslide(&p.correlation)? - c(n)).norm());
        if p.classical {
            let (nx, na) = (p.correlation.dom()[0].dim(), p.correlation.cod()[0].dim());
            let m = p.correlation.matrix();
            let diag: f64 = (0..nx).flat_map(|x| (0..na).map(move |a| m[(a * na + a, x * nx + x)].re)).sum();
            t.res(format!("{} sum p(a,a|x,x) - |X|", p.desc), (diag - n).abs());
        }
    }
    Ok(())
}

fn c8_cauchy_schwarz(t: &mut Tally) -> Result<()> {
    let x = QuantumSet::classical("X", 2)?;
    let a = QuantumSet::classical("A", 2)?;
    for d in [1usize, 2, 3] {
        for i in 0..50u64 {
            let s = SEED.split("c8").index(d as u64 * 100 + i);
            let e = gen_quantum_function(&GenKind::Pvm { resource_dim: d }, &x, &a, s.split("e"))?;
            let f = gen_quantum_function(&GenKind::Pvm { resource_dim: d }, &x, &a, s.split("f"))?.opposite_partner()?;
            let psi = random_state(d, &mut s.split("psi").rng());
            let r = cs_scalars(&e, &f, Some(&psi), TOL)?;
            t.res(format!("d={d} #{i} lhs - rhs"), (r.lhs - r.rhs).max(0.0));
        }
        let q = set("Q", &[2, 1]);
        let matched = [
            gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: d }, &q, &q, SEED.index(d as u64))?,
            gen_quantum_function(&GenKind::Pvm { resource_dim: d }, &x, &a, SEED.split("m").index(d as u64))?,
        ];
        for (k, e) in matched.iter().enumerate() {
            let psi = random_state(d, &mut SEED.split("c8psi").index(k as u64).rng());
            let r = cs_scalars(e, &e.opposite_partner()?, Some(&psi), TOL)?;
            t.res(format!("d={d} matched #{k} equality"), (r.lhs - r.rhs).abs());
            t.ok(format!("d={d} matched #{k} equality flag"), r.equality);
            t.res(format!("d={d} matched #{k} partner residual"), r.partner_residual);
        }
    }
    Ok(())
}

fn c9_hom_game(t: &mut Tally) -> Result<()> {
    let graphs = grid_graphs();
    for (gn, g, ga) in &graphs {
        for (hn, h, ha) in &graphs {
            let pair = format!("{gn}->{hn}");
            let l = hom_game(g, h)?;
            t.ok(format!("{pair} is_game"), is_game(&l, TOL)?);
            t.ok(format!("{pair} synchronous"), sync_status(&l)?.synchronous(TOL));
            if let (Some(ga), Some(ha)) = (ga, ha) {
                let (nx, na) = (ga.len(), ha.len());
                let m = l.matrix();
                let mut exact = true;
                for (x, y, a, b) in (0..nx).flat_map(|x| (0..nx).flat_map(move |y| (0..na).flat_map(move |a| (0..na).map(move |b| (x, y, a, b))))) {
                    let want = if x == y {
                        a == b
                    } else if ga[x][y] == 1 {
                        ha[a][b] == 1
                    } else {
                        true
                    };
                    let got = m[(a * na + b, x * nx + y)];
                    let entry = if got.norm() < TOL { Some(false) } else if (got - c(1.0)).norm() < TOL { Some(true) } else { None };
                    exact &= entry == Some(want);
                }
                t.ok(format!("{pair} three-case formula"), exact);
            }
            let terms = hom_terms(g, h)?;
            let mut sum = Morphism::zero(l.dom(), l.cod());
            for (ti, si) in terms.iter().zip(HOM_SIGNS) {
                for (tj, sj) in terms.iter().zip(HOM_SIGNS) {
                    sum = sum.add(&star(ti, tj)?.scale(c(si * sj)))?;
                }
            }
            t.res(format!("{pair} 25-term expansion"), residual(&sum, &l)?);
        }
    }
    Ok(())
}

fn c10_hom_correspondence(t: &mut Tally) -> Result<()> {
    for (gn, ga, hn, ha, expected) in [("C4", cycle(4), "K2", complete_adjacency(2), 2usize), ("C5", cycle(5), "K3", complete_adjacency(3), 30)] {
        let (g, h) = (classical_graph(gn, &ga), classical_graph(hn, &ha));
        let lambda = hom_game(&g, &h)?;
        let fs = functions(ga.len(), ha.len());
        let homs: Vec<usize> = (0..fs.len()).filter(|&i| preserves_edges(&ga, &ha, &fs[i])).collect();
        t.ok(format!("{gn}->{hn} has {expected} homomorphisms"), homs.len() == expected);
        for &i in &homs {
            let e = QuantumFunction::new(deterministic_function(g.set(), h.set(), &fs[i])?, TOL)?;
            let p = hom_to_correlation(&e, &g, &h, TOL)?;
            t.res(format!("{gn}->{hn} {:?} forward perfect", fs[i]), perfect_residual(&p, &lambda)?);
        }
        let perfect: Vec<(usize, usize)> = (0..fs.len())
            .flat_map(|i| (0..fs.len()).map(move |j| (i, j)))
            .collect::<Vec<_>>()
            .into_par_iter()
            .filter(|&(i, j)| {
                let phi = partner_pair(g.set(), h.set(), &fs[i], &fs[j]).expect("deterministic pair");
                perfect_strategy_residual(&phi.map, &lambda).expect("typed") <= TOL
            })
            .collect();
        let diagonal: Vec<(usize, usize)> = homs.iter().map(|&i| (i, i)).collect();
        t.ok(format!("{gn}->{hn} perfect deterministic strategies are (f, f) for homomorphisms f"), perfect == diagonal);
        for &(i, j) in &perfect {
            let phi = partner_pair(g.set(), h.set(), &fs[i], &fs[j])?;
            let back = extract_hom(&phi, &g, &h, TOL)?;
            t.ok(format!("{gn}->{hn} {:?} extracts a quantum function", fs[i]), is_quantum_function(back.map(), TOL)?);
            let want = deterministic_function(g.set(), h.set(), &fs[i])?;
            t.res(format!("{gn}->{hn} {:?} round trip", fs[i]), matrix_residual(back.map().matrix(), want.matrix()));
        }
    }
    Ok(())
}

fn c11_iso_game(t: &mut Tally) -> Result<()> {
    for (name, g, _) in grid_graphs() {
        let gh = hom_game(&g, &g)?;
        let hg = hom_game(&g, &g)?.dagger();
        t.res(format!("{name} order independence"), residual(&star(&gh, &hg)?, &star(&hg, &gh)?)?);
        let l = iso_game(&g, &g, TOL)?;
        t.ok(format!("{name} is_game"), is_game(&l, TOL)?);
        t.ok(format!("{name} bisynchronous"), sync_status(&l)?.bisynchronous(TOL));
    }
    let adj = cycle(4);
    let g = classical_graph("C4", &adj);
    let lambda = iso_game(&g, &g, TOL)?;
    let bijections: Vec<Vec<usize>> = functions(4, 4)
        .into_iter()
        .filter(|p| (0..4).all(|v| p.contains(&v)))
        .collect();
    t.ok("24 bijections", bijections.len() == 24);
    let mut perfect = Vec::new();
    for p in &bijections {
        let phi = partner_pair(g.set(), g.set(), p, p)?;
        if is_bistrategy(&phi.map, TOL)? && perfect_strategy_residual(&phi.map, &lambda)? <= TOL {
            perfect.push(p.clone());
        }
    }
    let autos: Vec<Vec<usize>> = bijections
        .iter()
        .filter(|p| (0..4).all(|x| (0..4).all(|y| adj[x][y] == adj[p[x]][p[y]])))
        .cloned()
        .collect();
    t.ok("8 automorphisms", autos.len() == 8);
    t.ok("perfect bijections are exactly the automorphisms", perfect == autos);
    Ok(())
}

fn c12_bisync_dims(t: &mut Tally) -> Result<()> {
    let pairs: [(&[usize], &[usize]); 4] = [(&[2, 1], &[1, 2]), (&[1, 1], &[1, 1]), (&[2], &[2]), (&[2, 2], &[2, 2])];
    for (xb, ab) in pairs {
        let (x, a) = (set("X", xb), set("A", ab));
        let sq = |b: &[usize]| b.iter().map(|k| k * k).sum::<usize>();
        for d in [1usize, 2, 3] {
            let label = format!("{xb:?}->{ab:?} on C^{d}");
            let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: d }, &x, &a, SEED.split(&label))?;
            let p = cup_correlation(&e)?;
            let ch = channel_props(&p)?;
            let s = sync_status(&p)?;
            t.ok(format!("{label} bisynchronous bicorrelation"), ch.is_unital_channel(TOL) && s.bisynchronous(TOL));
            t.ok(format!("{label} dim X = dim A"), sq(xb) == sq(ab) && x.dim() == a.dim());
            let phi = self_commuting(&e)?;
            if is_bistrategy(&phi.map, TOL)? {
                t.ok(format!("{label} classical dims"), xb.len() == ab.len() && x.classical_dim() == a.classical_dim());
            } else {
                t.ok(format!("{label} is a bistrategy"), false);
            }
        }
        let e = gen_quantum_function(&GenKind::QsetIsomorphism, &x, &a, SEED.split("iso"))?;
        let phi = self_commuting(&e)?;
        let got = extract_alice(&phi.map)?;
        t.res(format!("{xb:?}->{ab:?} extracted isomorphism"), residual(&got, e.map())?);
        t.res(format!("{xb:?}->{ab:?} inverse is a quantum function"), qfunc_report(&flip_strategy(&got)?)?.worst());
    }
    let r = gen_quantum_function(&GenKind::QsetIsomorphism, &set("X", &[2]), &set("A", &[1, 1, 1]), SEED);
    t.ok("[2] -> [1,1,1] reported unsatisfiable", matches!(r, Err(QsyncError::Unsatisfiable(_))));
    Ok(())
}

fn cup_of(w: &Wire) -> Result<Morphism> {
    comult(std::slice::from_ref(w))?.compose(&unit(std::slice::from_ref(w))?)
}

fn c13_concurrency(t: &mut Tally) -> Result<()> {
    let pairs: [(&[usize], &[usize]); 4] = [(&[2], &[1, 1]), (&[1, 1, 1], &[1, 1]), (&[2, 1], &[2]), (&[3], &[1, 2])];
    for (xb, ab) in pairs {
        let (x, a) = (set("X", xb), set("A", ab));
        let l = canonical_game(CanonicalGame::UnfairFunction, &[wire(&x)], &[wire(&a)])?;
        let (img, _) = concurrency_image(&l)?;
        let want = cup_of(&wire(&a))?.scale(c(x.dim() as f64));
        t.res(format!("{xb:?}->{ab:?} f(cup) = dim X cup_A"), matrix_residual(img.matrix(), want.matrix()));
        t.ok(format!("{xb:?}->{ab:?} not concurrent"), !is_concurrent(&l, TOL)?);
    }
    for (gn, ga, hn, ha) in [("K3", complete_adjacency(3), "K2", complete_adjacency(2)), ("C5", cycle(5), "C4", cycle(4))] {
        let l = unfair_graph_game(&classical_graph(gn, &ga), &classical_graph(hn, &ha))?;
        let (img, _) = concurrency_image(&l)?;
        t.res(format!("{gn}->{hn} unfair graph f(cup) = 0"), max_abs(img.matrix()));
    }
    let q = quantum_complete(TOL);
    let (img, _) = concurrency_image(&unfair_graph_game(&q, &q)?)?;
    t.res("complete([2]) unfair graph f(cup) = 0", max_abs(img.matrix()));
    let pairs: [(&[usize], &[usize]); 4] = [(&[2, 1], &[1, 2]), (&[1, 1, 1], &[1, 1, 1]), (&[2], &[2]), (&[3], &[3])];
    for (xb, ab) in pairs {
        for d in [1usize, 2, 3] {
            let label = format!("{xb:?}->{ab:?} on C^{d}");
            let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: d }, &set("X", xb), &set("A", ab), SEED.split(&label))?;
            let p = cup_correlation(&e)?;
            t.ok(format!("{label} bisynchronous unital"), sync_status(&p)?.bisynchronous(TOL) && channel_props(&p)?.unital <= TOL);
            t.ok(format!("{label} concurrent"), is_concurrent(&p, TOL)?);
        }
    }
    Ok(())
}

fn c14_bks(t: &mut Tally) -> Result<()> {
    for i in 0..20u64 {
        let mix = Mixture::sample(SEED.split("c14").index(i), i % 2 == 1);
        let p = mix.map()?;
        t.res(format!("#{i} weighted scalar - loopslide"), (bks_sync_scalar(&p)? - loopslide(&p)?).norm());
    }
    for b in PROFILES {
        let x = set("X", b);
        let minus = schur_cfa(&x, SchurSign::Minus).check_axioms()?;
        t.res(format!("{b:?} sign- special"), minus.get("special").unwrap_or(f64::NAN));
        let plus = schur_cfa(&x, SchurSign::Plus).check_axioms()?.get("special").unwrap_or(f64::NAN);
        let big = b.iter().any(|&k| k >= 2);
        t.ok(format!("{b:?} sign+ special fails iff a block has size >= 2"), (plus > TOL) == big);
    }
    Ok(())
}

fn c15_bistrategies(t: &mut Tally) -> Result<()> {
    let q = set("X", &[2, 1]);
    let e = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: 2 }, &q, &q, SEED.index(1))?;
    let commuting = self_commuting(&e)?;
    let q2 = set("X", &[2]);
    let e2 = gen_quantum_function(&GenKind::ControlledIsomorphism { resource_dim: 2 }, &q2, &q2, SEED.index(2))?;
    let f2 = gen_quantum_function(&GenKind::QsetIsomorphism, &q2, &q2, SEED.index(3))?.opposite_partner()?;
    let tensor = combine(CombineKind::Tensor, &e2, &f2, TOL)?;
    let c3 = QuantumSet::classical("X", 3)?;
    let deterministic = partner_pair(&c3, &c3, &[2, 0, 1], &[1, 2, 0])?;
    for (name, cs) in [("commuting", commuting), ("tensor", tensor), ("deterministic", deterministic)] {
        t.ok(format!("{name} is a bistrategy"), is_bistrategy(&cs.map, TOL)?);
        // flip_combined rebuilds the flipped players with the same combiner and its checks
        let flipped = flip_combined(&cs, TOL)?;
        t.res(format!("{name} flipped players give the flipped strategy"), matrix_residual(flipped.map.matrix(), flip_strategy(&cs.map)?.matrix()));
        t.res(format!("{name} flip is a quantum function"), qfunc_report(&flipped.map)?.worst());
    }
    Ok(())
}

#[test]
fn acceptance_criteria() {
    let cases = perfect_instances().expect("perfect instances");
    let failed: Vec<String> = [
        criterion(1, "quantum set axioms", c1_axioms),
        criterion(2, "dimensions", c2_dims),
        criterion(3, "sharing lemma", c3_sharing),
        criterion(4, "classical iff sharing is a game", c4_sharing_game),
        criterion(5, "synchronicity reduction", c5_sync_reduction),
        criterion(6, "perfect implies synchronous", |t| c6_perf_sync(t, &cases)),
        criterion(7, "loop sliding", |t| c7_loop_slide(t, &cases)),
        criterion(8, "Cauchy-Schwarz", c8_cauchy_schwarz),
        criterion(9, "homomorphism game", c9_hom_game),
        criterion(10, "homomorphism correspondence", c10_hom_correspondence),
        criterion(11, "isomorphism game", c11_iso_game),
        criterion(12, "bisynchronous dimensions", c12_bisync_dims),
        criterion(13, "concurrency", c13_concurrency),
        criterion(14, "weighted criterion and Schur algebras", c14_bks),
        criterion(15, "bistrategy structure", c15_bistrategies),
    ]
    .into_iter()
    .flatten()
    .collect();
    assert!(failed.is_empty(), "failing criteria: {}", failed.join("; "));
}
