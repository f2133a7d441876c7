//! Acceptance run: one line per criterion, non-zero exit if any fails.
//!
//! Every check compares the library against a brute-force oracle written
//! here, independently of the code under test.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kripkekit::category::{cauchy_completion, find_equivalence, for_each_functor, FinCategory, FinFunctor};
use kripkekit::formula::{formulas_up_to_depth, random_formula, Formula};
use kripkekit::kripke::{interpret, kripke_sat, Evaluator, KripkeModel};
use kripkekit::lattice::{open_iff_exponential_check, FiniteLattice, UpsetLattice};
use kripkekit::modal::{is_bimodule_morphism, modal_open_routes, Bimodule};
use kripkekit::order::{enumerate_monotone_maps, Mask, MonotoneMap, Poset};
use kripkekit::presheaf::{
    count_nat_trans, coyoneda, currying_check, exponential, isomorphism, product, random_presheaf, yoneda_bijection,
    Presheaf,
};
use kripkekit::profunctor::{
    adjunction_check, box2, count_gamma_families, dia2, endoprof_bijection, interpret2d, support_mask,
    upset_presheaf, ProfMorphism, Profunctor, TwoDimModel,
};
use kripkekit::verify::{fixture_categories, fixture_profunctors, posets_up_to, run_suite, VerifyOptions};

const SEED: u64 = 42;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: kripkekit::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

// ---- oracles on posets -----------------------------------------------------

fn bit(m: Mask, i: usize) -> bool {
    m >> i & 1 == 1
}

fn oracle_upsets(p: &Poset) -> Vec<Mask> {
    let n = p.len();
    (0..1u64 << n)
        .filter(|&m| (0..n).all(|a| !bit(m, a) || (0..n).all(|b| !p.leq(a, b) || bit(m, b))))
        .collect()
}

fn relation(r: &Bimodule) -> Vec<Vec<bool>> {
    let n = r.source().len();
    (0..n).map(|w| (0..n).map(|v| r.related(w, v)).collect()).collect()
}

fn oracle_box(rel: &[Vec<bool>], t: Mask) -> Mask {
    (0..rel.len())
        .filter(|&w| (0..rel.len()).all(|v| !rel[w][v] || bit(t, v)))
        .fold(0, |m, w| m | 1 << w)
}

fn oracle_dia(rel: &[Vec<bool>], s: Mask) -> Mask {
    (0..rel.len())
        .filter(|&w| (0..rel.len()).any(|v| rel[v][w] && bit(s, v)))
        .fold(0, |m, w| m | 1 << w)
}

fn oracle_imp(p: &Poset, a: Mask, b: Mask) -> Mask {
    (0..p.len())
        .filter(|&w| (0..p.len()).all(|v| !p.leq(w, v) || !bit(a, v) || bit(b, v)))
        .fold(0, |m, w| m | 1 << w)
}

enum Node {
    Bottom,
    Top,
    Var(String),
    And(usize, usize),
    Or(usize, usize),
    Imp(usize, usize),
    Box(usize),
    Dia(usize),
}

/// Forcing, clause by clause, over a formula family flattened into a DAG
/// of distinct nodes in dependency order.
struct Oracle {
    nodes: Vec<Node>,
    roots: Vec<usize>,
}

impl Oracle {
    fn compile(formulas: &[Arc<Formula>]) -> Self {
        fn add(phi: &Formula, nodes: &mut Vec<Node>, seen: &mut HashMap<*const Formula, usize>) -> usize {
            if let Some(&i) = seen.get(&(phi as *const Formula)) {
                return i;
            }
            let mut go = |f: &Formula| add(f, nodes, seen);
            let node = match phi {
                Formula::Bottom => Node::Bottom,
                Formula::Top => Node::Top,
                Formula::Var(v) => Node::Var(v.clone()),
                Formula::And(a, b) => Node::And(go(a), go(b)),
                Formula::Or(a, b) => Node::Or(go(a), go(b)),
                Formula::Imp(a, b) => Node::Imp(go(a), go(b)),
                Formula::Box(a) => Node::Box(go(a)),
                Formula::DiaBlack(a) => Node::Dia(go(a)),
            };
            nodes.push(node);
            seen.insert(phi as *const Formula, nodes.len() - 1);
            nodes.len() - 1
        }
        let mut nodes = Vec::new();
        let mut seen = HashMap::new();
        let roots = formulas.iter().map(|f| add(f, &mut nodes, &mut seen)).collect();
        Oracle { nodes, roots }
    }

    /// Truth set of every root formula in `m`.
    fn run(&self, m: &KripkeModel) -> Vec<Mask> {
        let frame = m.frame();
        let n = frame.len();
        let rel = m.rel().map(relation).unwrap_or_default();
        let box_of: Vec<Mask> = rel.iter().map(|row| row.iter().enumerate().filter(|p| *p.1).fold(0, |a, (v, _)| a | 1 << v)).collect();
        let dia_of: Vec<Mask> = (0..rel.len()).map(|w| (0..n).filter(|&v| rel[v][w]).fold(0, |a, v| a | 1 << v)).collect();
        let up: Vec<Mask> = (0..n).map(|w| (0..n).filter(|&v| frame.leq(w, v)).fold(0, |a, v| a | 1 << v)).collect();
        let mut val: Vec<Mask> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v: Mask = match *node {
                Node::Bottom => 0,
                Node::Top => (1u64 << n) - 1,
                Node::Var(ref x) => m.valuation()[x],
                Node::And(a, b) => val[a] & val[b],
                Node::Or(a, b) => val[a] | val[b],
                Node::Imp(a, b) => {
                    let bad = val[a] & !val[b];
                    (0..n).filter(|&w| up[w] & bad == 0).fold(0, |acc, w| acc | 1 << w)
                }
                Node::Box(a) => (0..n).filter(|&w| box_of[w] & !val[a] == 0).fold(0, |acc, w| acc | 1 << w),
                Node::Dia(a) => (0..n).filter(|&w| dia_of[w] & val[a] != 0).fold(0, |acc, w| acc | 1 << w),
            };
            val.push(v);
        }
        self.roots.iter().map(|&r| val[r]).collect()
    }
}

fn valuations(p: &Poset) -> Vec<BTreeMap<String, Mask>> {
    let ups = oracle_upsets(p);
    let mut out = Vec::new();
    for &a in &ups {
        for &b in &ups {
            out.push(BTreeMap::from([("p".to_string(), a), ("q".to_string(), b)]));
        }
    }
    out
}

/// Library evaluator (both routes) against the oracle, on every formula.
fn theorem_model(m: &KripkeModel, formulas: &[Arc<Formula>], oracle: &Oracle, api_stride: usize) -> Result<usize, String> {
    let mut ev = Evaluator::new(m);
    let truth = oracle.run(m);
    for (i, phi) in formulas.iter().enumerate() {
        let got = ev.check(phi).map_err(|e| format!("{e} on {phi}"))?;
        let want = truth[i];
        ensure(got == want, || format!("`{phi}`: library {got:b}, oracle {want:b}"))?;
        if api_stride > 0 && i % api_stride == 0 {
            let up = lib(interpret(m, phi))?;
            for w in 0..m.frame().len() {
                let s = lib(kripke_sat(m, m.frame().name(w), phi))?;
                ensure(s == bit(want, w) && up.contains(w) == s, || format!("`{phi}` at world {w}"))?;
            }
        }
    }
    Ok(formulas.len() * m.frame().len())
}

// ---- criterion 1 -----------------------------------------------------------

fn theorem_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let vars = ["p", "q"];
    let depth2 = formulas_up_to_depth(&vars, 2);
    let depth1 = formulas_up_to_depth(&vars, 1);
    let mut checks = 0usize;
    let mut models = 0usize;
    let oracle2 = Oracle::compile(&depth2);

    let posets = posets_up_to(4);
    ensure(posets.len() == 1 + 2 + 5 + 16, || format!("{} posets of size 1..4", posets.len()))?;
    for w in &posets {
        let rels = [
            Bimodule::order(w.clone()),
            Bimodule::full(w.clone()),
            Bimodule::empty(w.clone()),
            Bimodule::random(w, 0.3, &mut rng),
        ];
        for r in &rels {
            for val in valuations(w) {
                let m = lib(KripkeModel::new(w.clone(), Some(r.clone()), val))?;
                checks += theorem_model(&m, &depth2, &oracle2, 997)?;
                models += 1;
            }
        }
    }

    for w in posets_up_to(3) {
        for r in lib(Bimodule::enumerate(&w, 6))? {
            for val in valuations(&w) {
                let mut formulas = depth1.clone();
                formulas.extend((0..12).map(|_| random_formula(&vars, 3, true, &mut rng)));
                let m = lib(KripkeModel::new(w.clone(), Some(r.clone()), val))?;
                checks += theorem_model(&m, &formulas, &Oracle::compile(&formulas), 0)?;
                models += 1;
            }
        }
    }

    for _ in 0..1000 {
        let n = rng.gen_range(1..=6);
        let w = Arc::new(Poset::random(n, 0.4, &mut rng));
        let r = Bimodule::random(&w, rng.gen_range(0.1..0.6), &mut rng);
        let ups = oracle_upsets(&w);
        let val = vars
            .iter()
            .map(|v| (v.to_string(), ups[rng.gen_range(0..ups.len())]))
            .collect();
        let mut formulas = depth1.clone();
        formulas.extend((0..200).map(|_| random_formula(&vars, 3, true, &mut rng)));
        let m = lib(KripkeModel::new(w, Some(r), val))?;
        checks += theorem_model(&m, &formulas, &Oracle::compile(&formulas), 50)?;
        models += 1;
    }
    Ok(format!("{models} models, {checks} (formula, world) checks; depth-2 exhaustive on |W|<=4"))
}

// ---- criterion 2 -----------------------------------------------------------

fn oracle_bimodule_count(p: &Poset) -> usize {
    let n = p.len();
    (0..1u64 << (n * n))
        .filter(|&m| {
            let rel = |w: usize, v: usize| bit(m, w * n + v);
            (0..n).all(|w| {
                (0..n).all(|v| {
                    !rel(w, v)
                        || (0..n).all(|w2| {
                            !p.leq(w2, w) || (0..n).all(|v2| !p.leq(v, v2) || rel(w2, v2))
                        })
                })
            })
        })
        .count()
}

fn galois() -> Check {
    let mut pairs = 0usize;
    let mut bimodules = 0usize;
    for w in posets_up_to(4) {
        let rels = lib(Bimodule::enumerate(&w, 6))?;
        let expected = oracle_bimodule_count(&w);
        ensure(rels.len() == expected, || format!("{} bimodules, oracle {expected}", rels.len()))?;
        let ups = oracle_upsets(&w);
        for r in &rels {
            let rel = relation(r);
            for &s in &ups {
                let ds = lib(r.dia_black(s))?;
                ensure(ds == oracle_dia(&rel, s), || "dia differs from oracle".into())?;
                for &t in &ups {
                    let bt = lib(r.boxed(t))?;
                    ensure(bt == oracle_box(&rel, t), || "box differs from oracle".into())?;
                    ensure((ds & !t == 0) == (s & !bt == 0), || format!("adjunction fails at S={s:b} T={t:b}"))?;
                    pairs += 1;
                }
            }
        }
        bimodules += rels.len();
    }
    Ok(format!("{bimodules} bimodules, {pairs} upper-set pairs"))
}

// ---- criterion 3 -----------------------------------------------------------

fn oracle_monotone_count(a: &Poset, b: &Poset) -> usize {
    let (n, m) = (a.len(), b.len());
    let mut count = 0;
    let mut f = vec![0usize; n];
    loop {
        if (0..n).all(|x| (0..n).all(|y| !a.leq(x, y) || b.leq(f[x], f[y]))) {
            count += 1;
        }
        let mut k = 0;
        loop {
            if k == n {
                return count;
            }
            f[k] += 1;
            if f[k] < m {
                break;
            }
            f[k] = 0;
            k += 1;
        }
    }
}

fn oracle_open(f: &MonotoneMap) -> bool {
    let (s, t) = (f.source(), f.target());
    (0..s.len()).all(|w| {
        (0..t.len())
            .filter(|&v| t.leq(f.apply(w), v))
            .all(|v| (0..s.len()).any(|w2| s.leq(w, w2) && f.apply(w2) == v))
    })
}

fn oracle_preimage(f: &MonotoneMap, m: Mask) -> Mask {
    (0..f.source().len())
        .filter(|&w| bit(m, f.apply(w)))
        .fold(0, |acc, w| acc | 1 << w)
}

fn open_map_lemma() -> Check {
    let posets = posets_up_to(3);
    let mut maps = 0;
    let mut open = 0;
    for a in &posets {
        for b in &posets {
            let fs = lib(enumerate_monotone_maps(a, b, 6))?;
            let expected = oracle_monotone_count(a, b);
            ensure(fs.len() == expected, || format!("{} monotone maps, oracle {expected}", fs.len()))?;
            let (ua, ub) = (oracle_upsets(a), oracle_upsets(b));
            for f in &fs {
                let v = lib(open_iff_exponential_check(f, 6))?;
                let exp = ub.iter().all(|&x| {
                    ub.iter().all(|&y| {
                        oracle_preimage(f, oracle_imp(b, x, y))
                            == oracle_imp(a, oracle_preimage(f, x), oracle_preimage(f, y))
                    })
                });
                let surj = (0..b.len()).all(|y| (0..a.len()).any(|x| f.apply(x) == y));
                let mut pre: Vec<Mask> = ub.iter().map(|&s| oracle_preimage(f, s)).collect();
                pre.sort_unstable();
                pre.dedup();
                let inj = pre.len() == ub.len();
                let o = oracle_open(f);
                ensure(v.open == o && v.preserves_exponentials == exp, || format!("routes: {v:?}, oracle open {o} exp {exp}"))?;
                ensure(v.surjective == surj && v.preimage_injective == inj, || format!("{v:?}"))?;
                ensure(o == exp && surj == inj, || format!("lemma fails on {:?}", f.image()))?;
                ensure(ua.iter().all(|&s| a.is_up_closed(s)), || "oracle up-sets".into())?;
                maps += 1;
                open += o as usize;
            }
        }
    }
    Ok(format!("{maps} monotone maps, {open} open; both routes agree on every map"))
}

// ---- criterion 4 -----------------------------------------------------------

fn oracle_lower(f: &MonotoneMap, s: Mask) -> Mask {
    let t = f.target();
    (0..t.len())
        .filter(|&v| (0..f.source().len()).any(|w| bit(s, w) && t.leq(f.apply(w), v)))
        .fold(0, |m, v| m | 1 << v)
}

fn modal_openness() -> Check {
    let posets = posets_up_to(3);
    let mut triples = 0;
    let mut open = 0;
    for a in &posets {
        let ra = lib(Bimodule::enumerate(a, 6))?;
        let ua = oracle_upsets(a);
        for b in &posets {
            let rb = lib(Bimodule::enumerate(b, 6))?;
            let ub = oracle_upsets(b);
            for f in lib(enumerate_monotone_maps(a, b, 6))? {
                for r in &ra {
                    let rel = relation(r);
                    for r2 in &rb {
                        let rel2 = relation(r2);
                        let morphism = (0..a.len())
                            .all(|w| (0..a.len()).all(|v| !rel[w][v] || rel2[f.apply(w)][f.apply(v)]));
                        ensure(lib(is_bimodule_morphism(&f, r, r2))? == morphism, || "bimodule morphism".into())?;
                        if !morphism {
                            continue;
                        }
                        let routes = lib(modal_open_routes(&f, r, r2, 6))?;
                        let direct = (0..a.len()).all(|w| {
                            (0..b.len()).filter(|&v| rel2[f.apply(w)][v]).all(|v| {
                                (0..a.len()).any(|w2| rel[w][w2] && b.leq(f.apply(w2), v))
                            })
                        });
                        let box_route = ub
                            .iter()
                            .all(|&t| oracle_box(&rel, oracle_preimage(&f, t)) == oracle_preimage(&f, oracle_box(&rel2, t)));
                        let dia_route = ua
                            .iter()
                            .all(|&s| oracle_lower(&f, oracle_dia(&rel, s)) == oracle_dia(&rel2, oracle_lower(&f, s)));
                        ensure(
                            routes.direct == direct && routes.box_route == box_route && routes.dia_route == dia_route,
                            || format!("library {routes:?}, oracle ({direct}, {box_route}, {dia_route})"),
                        )?;
                        ensure(direct == box_route && box_route == dia_route, || {
                            format!("characterizations differ: ({direct}, {box_route}, {dia_route}) on {:?}", f.image())
                        })?;
                        triples += 1;
                        open += direct as usize;
                    }
                }
            }
        }
    }
    Ok(format!("{triples} (f, R, R') triples, {open} modally open; three characterizations coincide"))
}

// ---- criterion 5 -----------------------------------------------------------

fn oracle_is_iso(p: &Poset, q: &Poset, f: &[usize]) -> bool {
    let n = p.len();
    let mut seen = vec![false; q.len()];
    n == q.len()
        && f.iter().all(|&y| y < n && !std::mem::replace(&mut seen[y], true))
        && (0..n).all(|a| (0..n).all(|b| p.leq(a, b) == q.leq(f[a], f[b])))
}

fn oracle_prime(l: &FiniteLattice, d: usize) -> bool {
    d != l.bottom()
        && (0..l.len()).all(|a| (0..l.len()).all(|b| !l.leq(d, l.join(a, b)) || l.leq(d, a) || l.leq(d, b)))
}

fn oracle_distributive(l: &FiniteLattice) -> bool {
    let n = l.len();
    (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| l.meet(a, l.join(b, c)) == l.join(l.meet(a, b), l.meet(a, c)))))
}

fn duality() -> Check {
    let posets = posets_up_to(5);
    ensure(posets.len() == 1 + 2 + 5 + 16 + 63, || format!("{} posets of size 1..5", posets.len()))?;
    for w in &posets {
        let up = lib(UpsetLattice::new(w.clone(), 6))?.to_finite_lattice();
        ensure(up.len() == oracle_upsets(w).len(), || "Up(W) size".into())?;
        let (primes, idx) = up.primes();
        let oracle: Vec<usize> = (0..up.len()).filter(|&d| oracle_prime(&up, d)).collect();
        ensure(idx == oracle, || format!("primes {idx:?}, oracle {oracle:?}"))?;
        let iso = w.isomorphism_to(&primes).ok_or("W and primes(Up W) are not isomorphic")?;
        ensure(oracle_is_iso(w, &primes, &iso), || "claimed isomorphism is not one".into())?;
        let rec = lib(up.reconstruct())?;
        lib(rec.verify(&up))?;
    }
    let fixtures = kripkekit::verify::lattice_fixtures();
    let mut accepted = 0;
    let mut rejected = Vec::new();
    for (name, l) in &fixtures {
        let algebraic = oracle_distributive(l);
        match l.reconstruct() {
            Ok(rec) => {
                ensure(algebraic, || format!("{name} reconstructed but not distributive"))?;
                lib(rec.verify(l))?;
                ensure(rec.upsets.len() == l.len(), || format!("{name}: size mismatch"))?;
                accepted += 1;
            }
            Err(kripkekit::Error::NotPrimeAlgebraic) => {
                ensure(!algebraic, || format!("{name} rejected but distributive"))?;
                rejected.push(name.clone());
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    ensure(rejected.iter().any(|n| n == "M3"), || "M3 was not rejected".into())?;
    ensure(matches!(FiniteLattice::m3().reconstruct(), Err(kripkekit::Error::NotPrimeAlgebraic)), || "M3".into())?;
    Ok(format!(
        "{} posets roundtrip with explicit isomorphisms; {accepted} lattices reconstructed, rejected {rejected:?}",
        posets.len()
    ))
}

// ---- presheaf corpora --------------------------------------------------------

/// Non-decreasing sequences of length `len` over `0..k`.
fn multisets(len: usize, k: usize) -> Vec<Vec<usize>> {
    if len == 0 {
        return vec![Vec::new()];
    }
    if k == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = vec![0; len];
    loop {
        out.push(cur.clone());
        let mut i = len;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] + 1 < k {
                let v = cur[i] + 1;
                cur[i..].iter_mut().for_each(|c| *c = v);
                break;
            }
        }
    }
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn build(base: &Arc<FinCategory>, sizes: &[usize], arrow: impl Fn(usize, usize) -> usize) -> Result<Presheaf, String> {
    let labels = sizes.iter().map(|&n| names(n)).collect();
    let act = (0..base.num_arrows())
        .map(|a| (0..sizes[base.src(a)]).map(|x| arrow(a, x)).collect())
        .collect();
    lib(Presheaf::new(base.clone(), labels, act))
}

/// At least one presheaf from every isomorphism class with at most `t`
/// elements, for the three fixture bases.
fn iso_corpus(name: &str, base: &Arc<FinCategory>, t: usize) -> Result<Vec<Presheaf>, String> {
    let mut out = Vec::new();
    match name {
        "2-chain" => {
            let f = base.hom(0, 1)[0];
            for b in 0..=t {
                for a in 0..=t - b {
                    for seq in multisets(a, b) {
                        out.push(build(base, &[a, b], |arr, x| if arr == f { seq[x] } else { x })?);
                    }
                }
            }
        }
        "parallel-pair" => {
            let (s, tt) = (base.object("s").map_err(|e| e.to_string())?, base.object("t").map_err(|e| e.to_string())?);
            let (f, g) = (base.hom(s, tt)[0], base.hom(s, tt)[1]);
            for b in 0..=t {
                for a in 0..=t - b {
                    for seq in multisets(a, b * b) {
                        let mut sizes = vec![0; 2];
                        sizes[s] = a;
                        sizes[tt] = b;
                        out.push(build(base, &sizes, |arr, x| {
                            if arr == f {
                                seq[x] / b
                            } else if arr == g {
                                seq[x] % b
                            } else {
                                x
                            }
                        })?);
                    }
                }
            }
        }
        _ => {
            // Karoubi envelope of an idempotent: a set with an idempotent
            // e, and the set of its fixed points.
            let star = (0..2).find(|&o| base.hom(o, o).len() == 2).ok_or("no idempotent object")?;
            let split = 1 - star;
            out.push(Presheaf::initial(base.clone()));
            for n in 1..=t {
                for k in 1..=n.min(t - n) {
                    for seq in multisets(n - k, k) {
                        let e = |x: usize| if x < k { x } else { seq[x - k] };
                        let mut sizes = vec![0; 2];
                        sizes[star] = n;
                        sizes[split] = k;
                        out.push(build(base, &sizes, |arr, x| {
                            let (src, dst) = (base.src(arr), base.dst(arr));
                            if base.is_identity(arr) {
                                x
                            } else if src == star && dst == star || src == star {
                                e(x)
                            } else {
                                x
                            }
                        })?);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Brute-force count of natural transformations, or `None` when the
/// search space exceeds `limit`.
fn oracle_nat_count(p: &Presheaf, q: &Presheaf, limit: f64) -> Option<usize> {
    let base = p.base();
    let cells: Vec<(usize, usize)> = (0..base.num_objects()).flat_map(|o| (0..p.size(o)).map(move |x| (o, x))).collect();
    let space: f64 = cells.iter().map(|&(o, _)| q.size(o) as f64).product();
    if space > limit {
        return None;
    }
    if cells.iter().any(|&(o, _)| q.size(o) == 0) {
        return Some(0);
    }
    let offset: Vec<usize> = (0..base.num_objects())
        .scan(0, |acc, o| {
            let here = *acc;
            *acc += p.size(o);
            Some(here)
        })
        .collect();
    let mut val = vec![0usize; cells.len()];
    let mut count = 0;
    loop {
        let natural = (0..base.num_arrows()).all(|a| {
            let (s, d) = (base.src(a), base.dst(a));
            (0..p.size(s)).all(|x| val[offset[d] + p.act(a, x)] == q.act(a, val[offset[s] + x]))
        });
        count += natural as usize;
        let mut k = 0;
        loop {
            if k == cells.len() {
                return Some(count);
            }
            val[k] += 1;
            if val[k] < q.size(cells[k].0) {
                break;
            }
            val[k] = 0;
            k += 1;
        }
    }
}

// ---- criterion 6 -----------------------------------------------------------

fn yoneda_and_currying() -> Check {
    let mut presheaves = 0;
    let mut oracle_counts = 0;
    for (name, base) in fixture_categories() {
        for p in iso_corpus(&name, &base, 10)? {
            for w in 0..base.num_objects() {
                let b = lib(yoneda_bijection(&p, w))?;
                ensure(b.transformations.len() == p.size(w), || format!("{name}: |Hom(y w, P)| != |P(w)|"))?;
                let mut seen = vec![false; p.size(w)];
                for &x in &b.to_element {
                    ensure(x < p.size(w) && !std::mem::replace(&mut seen[x], true), || "to_element not injective".into())?;
                }
                if p.total() <= 6 {
                    let y = Presheaf::yoneda(base.clone(), w);
                    let brute = oracle_nat_count(&y, &p, 1e6).ok_or("oracle limit")?;
                    ensure(brute == p.size(w), || format!("{name}: oracle {brute} vs |P(w)| {}", p.size(w)))?;
                    oracle_counts += 1;
                }
            }
            presheaves += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut triples = 0;
    let mut too_large = 0;
    for (name, base) in fixture_categories() {
        let small = iso_corpus(&name, &base, 3)?;
        let medium = iso_corpus(&name, &base, 5)?;
        let mut cases = Vec::new();
        for x in &small {
            for p in &small {
                for q in &small {
                    cases.push((x.clone(), p.clone(), q.clone()));
                }
            }
        }
        for _ in 0..1500 {
            let pick = |rng: &mut ChaCha8Rng| medium[rng.gen_range(0..medium.len())].clone();
            cases.push((pick(&mut rng), pick(&mut rng), pick(&mut rng)));
        }
        for (x, p, q) in cases {
            let e = match exponential(&p, &q) {
                Err(kripkekit::Error::SizeCapExceeded { .. }) => {
                    too_large += 1;
                    continue;
                }
                r => lib(r)?.presheaf,
            };
            let objects = 0..base.num_objects();
            let lhs: f64 = objects.clone().map(|o| (q.size(o) as f64).powi((x.size(o) * p.size(o)) as i32)).product();
            let rhs: f64 = objects.map(|o| (e.size(o) as f64).powi(x.size(o) as i32)).product();
            if lhs.max(rhs) > 2e5 {
                too_large += 1;
                continue;
            }
            let rep = match currying_check(&x, &p, &q) {
                Err(kripkekit::Error::SizeCapExceeded { .. }) => {
                    too_large += 1;
                    continue;
                }
                r => lib(r)?,
            };
            ensure(rep.holds(), || format!("{name}: currying fails: {rep:?}"))?;
            let xp = lib(product(&x, &p))?.presheaf;
            if let Some(brute) = oracle_nat_count(&xp, &q, 2e5) {
                ensure(brute == rep.uncurried, || format!("{name}: oracle {brute} vs {}", rep.uncurried))?;
                ensure(lib(count_nat_trans(&x, &e))? == brute, || "curried count".into())?;
                oracle_counts += 1;
            }
            triples += 1;
        }
    }
    Ok(format!(
        "{presheaves} presheaves (all iso classes, total <= 10), {triples} currying triples \
         ({too_large} skipped, hom-set bound above 2e5), {oracle_counts} brute-force counts"
    ))
}

// ---- criterion 7 -----------------------------------------------------------

fn natural_bijection(p: &Presheaf, q: &Presheaf, f: impl Fn(usize, usize) -> usize) -> bool {
    let base = p.base();
    let bijective = (0..base.num_objects()).all(|o| {
        let mut hit = vec![false; q.size(o)];
        p.size(o) == q.size(o) && (0..p.size(o)).all(|y| f(o, y) < q.size(o) && !std::mem::replace(&mut hit[f(o, y)], true))
    });
    bijective
        && (0..base.num_arrows())
            .all(|a| (0..p.size(base.src(a))).all(|y| f(base.dst(a), p.act(a, y)) == q.act(a, f(base.src(a), y))))
}

fn co_yoneda() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checked = 0;
    let mut largest = 0;
    for (name, base) in fixture_categories() {
        let bound = if name == "parallel-pair" { 10 } else { 12 };
        let mut corpus = iso_corpus(&name, &base, bound)?;
        for _ in 0..3000 {
            let p = random_presheaf(&base, rng.gen_range(1..=6), rng.gen_range(0..=8), &mut rng);
            if p.total() > bound && p.total() <= 12 {
                corpus.push(p);
            }
        }
        for p in &corpus {
            let cy = lib(coyoneda(p, 12))?;
            ensure(cy.is_iso(p), || format!("{name}: comparison is not invertible on {:?}", p.sizes()))?;
            ensure(natural_bijection(&cy.colimit, p, |o, y| cy.comparison.at(o, y)), || {
                format!("{name}: oracle rejects the comparison on {:?}", p.sizes())
            })?;
            largest = largest.max(p.total());
            checked += 1;
        }
    }
    Ok(format!("{checked} presheaves reconstructed, largest total {largest}"))
}

// ---- criterion 8 -----------------------------------------------------------

fn oracle_global_sections(p: &Presheaf) -> usize {
    oracle_nat_count(&Presheaf::terminal(p.base().clone()), p, 1e7).expect("small")
}

fn oracle_components(p: &Presheaf) -> usize {
    let base = p.base();
    let offset: Vec<usize> = (0..base.num_objects())
        .scan(0, |acc, o| {
            let here = *acc;
            *acc += p.size(o);
            Some(here)
        })
        .collect();
    let mut parent: Vec<usize> = (0..p.total()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    for a in 0..base.num_arrows() {
        for x in 0..p.size(base.src(a)) {
            let u = find(&mut parent, offset[base.src(a)] + x);
            let v = find(&mut parent, offset[base.dst(a)] + p.act(a, x));
            parent[u] = v;
        }
    }
    (0..p.total()).filter(|&x| find(&mut parent, x) == x).count()
}

fn bases_up_to_three() -> Vec<(String, Arc<FinCategory>)> {
    let mut out = vec![("point".to_string(), Arc::new(FinCategory::from_poset(&Poset::point())))];
    out.extend(fixture_categories());
    out.push(("3-chain".into(), Arc::new(FinCategory::from_poset(&Poset::chain(3)))));
    let vee = Poset::new(&["a", "b", "c"], &[("a", "b"), ("a", "c")]).expect("vee");
    out.push(("vee".into(), Arc::new(FinCategory::from_poset(&vee))));
    out
}

fn two_dim_adjunction() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut adjunctions = 0;
    let mut morphisms = 0;
    for (bname, base) in bases_up_to_three() {
        let corpus = kripkekit::verify::presheaf_corpus(&base, 5, 10, &mut rng);
        let profs = fixture_profunctors(&base, &mut rng);
        for (rname, r) in &profs {
            for p in &corpus {
                let b = lib(box2(r, p))?;
                let d = lib(dia2(r, p))?;
                for w in 0..base.num_objects() {
                    let (bs, ds) = (b.presheaf.size(w), d.presheaf.size(w));
                    let ok = match rname.as_str() {
                        "hom" => bs == p.size(w) && ds == p.size(w),
                        "terminal" => bs == oracle_global_sections(p) && ds == oracle_components(p),
                        "empty" => bs == 1 && ds == 0,
                        _ => true,
                    };
                    ensure(ok, || format!("{bname}/{rname}: box {bs}, dia {ds} at object {w}"))?;
                }
                if rname == "hom" {
                    ensure(lib(isomorphism(&b.presheaf, p))?.is_some(), || "box_Hom P not iso to P".into())?;
                    ensure(lib(isomorphism(&d.presheaf, p))?.is_some(), || "dia_Hom P not iso to P".into())?;
                }
                for q in &corpus {
                    let rep = lib(adjunction_check(r, p, q))?;
                    ensure(rep.holds(), || format!("{bname}/{rname}: {rep:?}"))?;
                    let dq = lib(dia2(r, p))?.presheaf;
                    let bq = lib(box2(r, q))?.presheaf;
                    if let (Some(l), Some(rr)) = (oracle_nat_count(&dq, q, 2e5), oracle_nat_count(p, &bq, 2e5)) {
                        ensure(l == rep.left && rr == rep.right && l == rr, || format!("{bname}/{rname}: oracle {l}/{rr}"))?;
                    }
                    adjunctions += 1;
                }
            }
        }
        let probes: Vec<Presheaf> = corpus.iter().filter(|p| p.total() <= 3).cloned().collect();
        let id = FinFunctor::identity(base.clone());
        for (rn, r) in &profs {
            for (sn, s) in &profs {
                let all = lib(ProfMorphism::enumerate(&id, r, s))?;
                let g = lib(count_gamma_families(&id, r, s))?;
                ensure(g.families == all.len() && g.roundtrip, || {
                    format!("{bname}: {rn}->{sn}: {} gamma families, {} alphas", g.families, all.len())
                })?;
                for m in &all {
                    let rep = lib(endoprof_bijection(m, &probes))?;
                    ensure(rep.holds(), || format!("{bname}: {rn}->{sn}: {rep:?}"))?;
                    morphisms += 1;
                }
            }
        }
    }
    Ok(format!("{adjunctions} adjunction checks, {morphisms} profunctor morphisms roundtrip"))
}

// ---- criterion 9 -----------------------------------------------------------

/// Formulas built from subterminal pieces by limits and exponentials only.
fn subterminal(phi: &Formula) -> bool {
    match phi {
        Formula::Or(..) | Formula::DiaBlack(_) => false,
        Formula::And(a, b) | Formula::Imp(a, b) => subterminal(a) && subterminal(b),
        Formula::Box(a) => subterminal(a),
        _ => true,
    }
}

fn degeneration() -> Check {
    let formulas = formulas_up_to_depth(&["p"], 2);
    let oracle = Oracle::compile(&formulas);
    let mut cases = 0;
    let mut checks = 0;
    for w in posets_up_to(3) {
        let base = Arc::new(FinCategory::from_poset(&w));
        let ups = oracle_upsets(&w);
        for r in lib(Bimodule::enumerate(&w, 6))? {
            let rel = relation(&r);
            let prof = lib(Profunctor::from_bimodule(base.clone(), &r))?;
            for &s in &ups {
                let p = lib(upset_presheaf(&base, s))?;
                let b = lib(box2(&prof, &p))?.presheaf;
                let d = lib(dia2(&prof, &p))?.presheaf;
                ensure(b.sizes().iter().all(|&n| n <= 1), || "box2 is not 0/1-valued".into())?;
                ensure(support_mask(&b) == oracle_box(&rel, s), || "box2 support differs".into())?;
                ensure(support_mask(&d) == oracle_dia(&rel, s), || "dia2 support differs".into())?;
                let val = BTreeMap::from([("p".to_string(), s)]);
                let km = lib(KripkeModel::new(w.clone(), Some(r.clone()), val))?;
                let tm = lib(TwoDimModel::from_kripke(&km))?;
                let truth = oracle.run(&km);
                let picked = (0..formulas.len()).filter(|&i| formulas[i].depth() < 2 || i % 20 == cases % 20);
                for (phi, &want) in picked.map(|i| (&formulas[i], &truth[i])) {
                    checks += 1;
                    let got = lib(interpret2d(&tm, phi))?;
                    if subterminal(phi) {
                        ensure(got.sizes().iter().all(|&n| n <= 1), || format!("`{phi}` is not 0/1-valued"))?;
                    }
                    ensure(support_mask(&got) == want, || format!("interpret2d differs on `{phi}`"))?;
                }
                cases += 1;
            }
        }
    }
    let opts = VerifyOptions {
        size_cap: 3,
        seed: SEED,
        count: 100,
    };
    let suite = lib(run_suite("degeneration", &opts))?;
    ensure(suite.all_passed(), || format!("{:?}", suite.counterexample))?;
    Ok(format!(
        "{cases} (frame, R, valuation) cases, {checks} formula checks (each depth-2 formula on 1/20 of the cases); suite {}/{} incl. relational openness = surjective t_alpha",
        suite.passed,
        suite.cases
    ))
}

// ---- criterion 10 ----------------------------------------------------------

fn oracle_cauchy_complete(c: &FinCategory) -> bool {
    let arrows = 0..c.num_arrows();
    arrows.clone().filter(|&e| c.src(e) == c.dst(e) && c.comp(e, e) == e).all(|e| {
        (0..c.num_arrows()).any(|r| {
            c.src(r) == c.src(e)
                && (0..c.num_arrows())
                    .any(|s| c.src(s) == c.dst(r) && c.dst(s) == c.src(e) && c.comp(s, r) == e && c.comp(r, s) == c.id(c.dst(r)))
        })
    })
}

fn karoubi() -> Check {
    let m = Arc::new(FinCategory::idempotent_monoid());
    let k = cauchy_completion(&m).category;
    ensure(k.num_objects() == 2 && k.num_arrows() == 5, || {
        format!("{} objects, {} arrows", k.num_objects(), k.num_arrows())
    })?;
    ensure(k.is_cauchy_complete() && oracle_cauchy_complete(&k), || "completion is not Cauchy-complete".into())?;
    ensure(!oracle_cauchy_complete(&m) && !m.is_cauchy_complete(), || "monoid misjudged".into())?;

    let mut fixtures: Vec<(String, Arc<FinCategory>)> = bases_up_to_three();
    fixtures.push(("idempotent-monoid".into(), m.clone()));
    fixtures.push(("empty".into(), Arc::new(FinCategory::empty())));
    for (name, c) in &fixtures {
        let once = cauchy_completion(c).category;
        let twice = cauchy_completion(&once).category;
        ensure(oracle_cauchy_complete(&once), || format!("{name}: completion not complete"))?;
        let eq = find_equivalence(&once, &twice, 200_000);
        ensure(eq.witness.is_some(), || format!("{name}: no equivalence within the search bound"))?;
        if oracle_cauchy_complete(c) {
            ensure(find_equivalence(c, &once, 200_000).witness.is_some(), || format!("{name}: not equivalent"))?;
        }
        let mut functors = 0;
        for_each_functor(c, &once, 1, |_| {
            functors += 1;
            true
        });
        ensure(functors > 0 || c.num_objects() == 0, || format!("{name}: no functor into completion"))?;
    }
    Ok(format!("envelope has 2 objects, 5 arrows; idempotent on {} fixtures", fixtures.len()))
}

struct Criterion {
    id: usize,
    name: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "theorem equivalence", budget: Duration::from_secs(60), run: theorem_equivalence },
        Criterion { id: 2, name: "galois connection", budget: Duration::from_secs(30), run: galois },
        Criterion { id: 3, name: "open-map lemma", budget: Duration::from_secs(60), run: open_map_lemma },
        Criterion { id: 4, name: "modal-openness lemma", budget: Duration::from_secs(60), run: modal_openness },
        Criterion { id: 5, name: "duality roundtrips", budget: Duration::from_secs(10), run: duality },
        Criterion { id: 6, name: "yoneda and currying", budget: Duration::from_secs(120), run: yoneda_and_currying },
        Criterion { id: 7, name: "co-yoneda", budget: Duration::from_secs(60), run: co_yoneda },
        Criterion { id: 8, name: "2d adjunction and bijection", budget: Duration::from_secs(180), run: two_dim_adjunction },
        Criterion { id: 9, name: "degeneration oracle", budget: Duration::from_secs(60), run: degeneration },
        Criterion { id: 10, name: "karoubi envelope", budget: Duration::from_secs(10), run: karoubi },
    ];
    let only: Vec<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = 0;
    for c in &criteria {
        if !only.is_empty() && !only.contains(&c.id) {
            continue;
        }
        let start = Instant::now();
        let result = (c.run)();
        let t = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if t <= c.budget => (true, d),
            Ok(d) => (false, format!("{d}; over budget")),
            Err(e) => (false, e),
        };
        failed += !ok as usize;
        println!(
            "criterion {:>2} [{}] {:<28} {:>7.2}s / {:>3}s  {}",
            c.id,
            if ok { "PASS" } else { "FAIL" },
            c.name,
            t.as_secs_f64(),
            c.budget.as_secs(),
            detail
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
