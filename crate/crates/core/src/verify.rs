//! Named verification suites. Each suite builds a deterministic list of
//! cases from the size cap and seed, checks them in parallel, and reports
//! in case order.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::category::{cauchy_completion, find_equivalence, for_each_functor, FinCategory, FinFunctor};
use crate::error::{Error, Result};
use crate::formula::{formulas_up_to_depth, random_formula, Formula};
use crate::kripke::{satisfying_worlds_upward_box, Evaluator, KripkeModel};
use crate::lattice::{open_iff_exponential_check, AdjointTriple, FiniteLattice, UpsetLattice};
use crate::modal::{is_bimodule_morphism, modal_open_routes, Bimodule};
use crate::order::{enumerate_monotone_maps, Mask, MonotoneMap, Poset};
use crate::presheaf::{
    coproduct, coyoneda, currying_check, enumerate_presheaves, isomorphism, kan_triple_check, lan, random_presheaf,
    yoneda_bijection, Presheaf,
};
use crate::profunctor::{
    adjunction_check, box2, count_gamma_families, dia2, endoprof_bijection, gamma_is_iso, interpret2d,
    is_modally_open2, poset_functor_between, prof_morphism_of_subsingletons, support_mask, t_alpha_domains, t_alpha_over, upset_presheaf, ProfMorphism, Profunctor,
    TwoDimModel,
};

pub const SUITES: &[&str] = &[
    "theorem-equiv",
    "galois",
    "open-lemma",
    "modal-open-lemma",
    "primes-duality",
    "raney",
    "yoneda",
    "curry",
    "coyoneda",
    "kan-triple",
    "adjunction-2d",
    "endoprof-bijection",
    "t-alpha-equiv",
    "degeneration",
    "lan-primes",
    "derived-rules",
];

/// Suites outside the default list, checking claims that are stated but
/// not relied on elsewhere.
pub const EXPERIMENTAL_SUITES: &[&str] = &["upward-box"];

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub size_cap: usize,
    pub seed: u64,
    /// Number of random cases, for suites that sample.
    pub count: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            size_cap: 3,
            seed: 42,
            count: 100,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub size_cap: usize,
    pub cases: usize,
    pub passed: usize,
    /// The first failing case in case order.
    pub counterexample: Option<Value>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.cases
    }
}

type Verdict = Result<Option<Value>>;

fn run_cases<T: Sync>(
    suite: &str,
    opts: &VerifyOptions,
    start: Instant,
    cases: Vec<T>,
    check: impl Fn(&T) -> Verdict + Sync,
) -> SuiteReport {
    let results: Vec<Option<Value>> = cases
        .par_iter()
        .map(|c| match check(c) {
            Ok(v) => v,
            Err(e) => Some(json!({ "error": e.to_string() })),
        })
        .collect();
    let passed = results.iter().filter(|r| r.is_none()).count();
    SuiteReport {
        suite: suite.to_string(),
        seed: opts.seed,
        size_cap: opts.size_cap,
        cases: results.len(),
        passed,
        counterexample: results.into_iter().flatten().next(),
        wall_time: start.elapsed(),
    }
}

pub fn run_suite(name: &str, opts: &VerifyOptions) -> Result<SuiteReport> {
    let start = Instant::now();
    let o = opts;
    Ok(match name {
        "theorem-equiv" => run_cases(name, o, start, theorem_cases(o), theorem_case),
        "galois" => run_cases(name, o, start, galois_cases(o)?, galois_case),
        "open-lemma" => run_cases(name, o, start, monotone_map_cases(o.size_cap.min(3))?, open_lemma_case),
        "modal-open-lemma" => run_cases(name, o, start, modal_open_cases(o)?, modal_open_case),
        "primes-duality" => run_cases(name, o, start, posets_up_to(o.size_cap.min(5)), primes_case),
        "raney" => run_cases(name, o, start, lattice_fixtures(), raney_case),
        "yoneda" => run_cases(name, o, start, corpus_cases(o, 10), yoneda_case),
        "curry" => run_cases(name, o, start, curry_cases(o), curry_case),
        "coyoneda" => run_cases(name, o, start, corpus_cases(o, 12), coyoneda_case),
        "kan-triple" => run_cases(name, o, start, kan_cases(o), kan_case),
        "adjunction-2d" => run_cases(name, o, start, adjunction_cases(o), adjunction_case),
        "endoprof-bijection" => run_cases(name, o, start, morphism_cases(o)?, endoprof_case),
        "t-alpha-equiv" => run_cases(name, o, start, morphism_cases(o)?, t_alpha_case),
        "degeneration" => run_cases(name, o, start, degeneration_cases(o)?, degeneration_case),
        "lan-primes" => run_cases(name, o, start, monotone_map_cases(o.size_cap.min(4))?, lan_primes_case),
        "derived-rules" => run_cases(name, o, start, theorem_cases(o), derived_rules_case),
        "upward-box" => run_cases(name, o, start, theorem_cases(o), upward_box_case),
        _ => return Err(Error::UnknownSuite(name.to_string())),
    })
}

fn poset_json(p: &Poset) -> Value {
    let covers: Vec<(String, String)> = p
        .covers()
        .into_iter()
        .map(|(a, b)| (p.name(a).to_string(), p.name(b).to_string()))
        .collect();
    json!({ "elements": p.names(), "covers": covers })
}

fn rel_json(r: &Bimodule) -> Value {
    let w = r.source();
    let pairs: Vec<(String, String)> = r
        .pairs()
        .into_iter()
        .map(|(a, b)| (w.name(a).to_string(), w.name(b).to_string()))
        .collect();
    json!(pairs)
}

fn mask_json(p: &Poset, m: Mask) -> Value {
    json!(p.mask_names(m))
}

fn map_json(f: &MonotoneMap) -> Value {
    let pairs: BTreeMap<String, String> = (0..f.source().len())
        .map(|i| (f.source().name(i).to_string(), f.target().name(f.apply(i)).to_string()))
        .collect();
    json!({ "source": poset_json(f.source()), "target": poset_json(f.target()), "map": pairs })
}

/// Every poset with at most `n` elements, one per isomorphism class.
pub fn posets_up_to(n: usize) -> Vec<Arc<Poset>> {
    (1..=n).flat_map(Poset::enumerate_up_to_iso).map(Arc::new).collect()
}

// ---- theorem-equiv -------------------------------------------------------

pub struct TheoremCase {
    pub model: KripkeModel,
    pub formulas: Vec<Arc<Formula>>,
}

fn valuations(frame: &Poset, vars: &[&str]) -> Vec<BTreeMap<String, Mask>> {
    let ups = frame.upset_masks_uncapped();
    let mut out = vec![BTreeMap::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|val| {
                ups.iter().map(move |&u| {
                    let mut val = val.clone();
                    val.insert(v.to_string(), u);
                    val
                })
            })
            .collect();
    }
    out
}

fn theorem_cases(o: &VerifyOptions) -> Vec<TheoremCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let vars = ["p", "q"];
    let shallow = formulas_up_to_depth(&vars, 1);
    let mut cases = Vec::new();
    for w in posets_up_to(o.size_cap.min(4)) {
        let rels = [
            Bimodule::order(w.clone()),
            Bimodule::full(w.clone()),
            Bimodule::empty(w.clone()),
            Bimodule::random(&w, 0.3, &mut rng),
        ];
        for r in rels {
            for val in valuations(&w, &vars) {
                let mut formulas = shallow.clone();
                formulas.extend((0..8).map(|_| random_formula(&vars, 3, true, &mut rng)));
                cases.push(TheoremCase {
                    model: KripkeModel::new(w.clone(), Some(r.clone()), val).expect("valid"),
                    formulas,
                });
            }
        }
    }
    for _ in 0..o.count {
        let n = rng.gen_range(1..=o.size_cap.clamp(1, 6));
        let w = Arc::new(Poset::random(n, 0.4, &mut rng));
        let r = Bimodule::random(&w, 0.3, &mut rng);
        let ups = w.upset_masks_uncapped();
        let val = vars
            .iter()
            .map(|v| (v.to_string(), ups[rng.gen_range(0..ups.len())]))
            .collect();
        let formulas = (0..40).map(|_| random_formula(&vars, 3, true, &mut rng)).collect();
        cases.push(TheoremCase {
            model: KripkeModel::new(w, Some(r), val).expect("valid"),
            formulas,
        });
    }
    cases
}

/// Clause-by-clause satisfaction against the `Up(W)` interpretation for
/// every formula of the case.
pub fn theorem_case(c: &TheoremCase) -> Verdict {
    let mut ev = Evaluator::new(&c.model);
    for phi in &c.formulas {
        if let Err(e) = ev.check(phi) {
            let frame = c.model.frame();
            let val: BTreeMap<&String, Value> = c.model.valuation().iter().map(|(k, &m)| (k, mask_json(frame, m))).collect();
            return Ok(Some(json!({
                "frame": poset_json(frame),
                "rel": c.model.rel().map(rel_json),
                "valuation": val,
                "formula": phi.to_string(),
                "witness": e.to_string(),
            })));
        }
    }
    Ok(None)
}

fn model_json(m: &KripkeModel) -> Value {
    let frame = m.frame();
    let val: BTreeMap<&String, Value> = m.valuation().iter().map(|(k, &v)| (k, mask_json(frame, v))).collect();
    json!({ "frame": poset_json(frame), "rel": m.rel().map(rel_json), "valuation": val })
}

// ---- derived-rules -------------------------------------------------------

/// Name, premises, conclusion.
pub type Rule = (&'static str, Vec<Arc<Formula>>, Arc<Formula>);

/// Rules derivable from the Galois connection.
pub fn derived_rules(phi: &Arc<Formula>, psi: &Arc<Formula>) -> Vec<Rule> {
    let top = Arc::new(Formula::Top);
    let bot = Arc::new(Formula::Bottom);
    let imp = |a: &Arc<Formula>, b: &Arc<Formula>| Formula::imp(a.clone(), b.clone());
    let iff = |a: Arc<Formula>, b: Arc<Formula>| Formula::and(imp(&a, &b), imp(&b, &a));
    let (bx, dia) = (Formula::boxed, Formula::dia);
    vec![
        ("adjunction-down", vec![imp(&dia(phi.clone()), psi)], imp(phi, &bx(psi.clone()))),
        ("adjunction-up", vec![imp(phi, &bx(psi.clone()))], imp(&dia(phi.clone()), psi)),
        ("box-monotone", vec![imp(phi, psi)], imp(&bx(phi.clone()), &bx(psi.clone()))),
        ("necessitation", vec![phi.clone()], bx(phi.clone())),
        ("box-top", vec![], bx(top)),
        ("dia-bottom", vec![dia(bot.clone())], bot),
        ("dia-monotone", vec![imp(phi, psi)], imp(&dia(phi.clone()), &dia(psi.clone()))),
        (
            "dia-join",
            vec![],
            iff(dia(Formula::or(phi.clone(), psi.clone())), Formula::or(dia(phi.clone()), dia(psi.clone()))),
        ),
        (
            "box-meet",
            vec![],
            iff(bx(Formula::and(phi.clone(), psi.clone())), Formula::and(bx(phi.clone()), bx(psi.clone()))),
        ),
    ]
}

/// Each rule preserves validity in the model, for consecutive pairs of the
/// case's formulas.
fn derived_rules_case(c: &TheoremCase) -> Verdict {
    let full = c.model.frame().full();
    let mut ev = Evaluator::new(&c.model);
    for pair in c.formulas.windows(2) {
        for (name, premises, conclusion) in derived_rules(&pair[0], &pair[1]) {
            let mut valid = |f: &Arc<Formula>| ev.check(f).map(|m| m == full);
            let holds = premises.iter().map(&mut valid).collect::<Result<Vec<_>>>()?;
            if holds.iter().all(|&h| h) && !valid(&conclusion)? {
                return Ok(Some(json!({
                    "model": model_json(&c.model),
                    "rule": name,
                    "phi": pair[0].to_string(),
                    "psi": pair[1].to_string(),
                })));
            }
        }
    }
    Ok(None)
}

// ---- upward-box ----------------------------------------------------------

/// The box clause quantifying over later worlds agrees with the plain one
/// on bimodules.
fn upward_box_case(c: &TheoremCase) -> Verdict {
    let mut ev = Evaluator::new(&c.model);
    for phi in &c.formulas {
        let plain = ev.satisfying_worlds(phi)?;
        let upward = satisfying_worlds_upward_box(&c.model, phi)?;
        if plain != upward {
            return Ok(Some(json!({
                "model": model_json(&c.model),
                "formula": phi.to_string(),
                "plain": mask_json(c.model.frame(), plain),
                "upward": mask_json(c.model.frame(), upward),
            })));
        }
    }
    Ok(None)
}

// ---- lan-primes ----------------------------------------------------------

/// `f_!` sends every prime of `Up(W)` to a prime of `Up(W')`.
fn lan_primes_case(f: &MonotoneMap) -> Verdict {
    let source = UpsetLattice::new(f.source().clone(), 6)?;
    let target = UpsetLattice::new(f.target().clone(), 6)?;
    let (ls, lt) = (source.to_finite_lattice(), target.to_finite_lattice());
    let triple = AdjointTriple::new(f.clone());
    for d in ls.prime_indices() {
        let s = source.elements()[d];
        let image = triple.lower(s);
        let k = target.position(image).ok_or_else(|| Error::Invalid("f_! left Up(W')".into()))?;
        if !lt.is_prime(k) {
            let t = f.target();
            return Ok(Some(json!({
                "map": map_json(f),
                "prime": mask_json(f.source(), s),
                "image": mask_json(t, image),
            })));
        }
    }
    Ok(None)
}

// ---- galois --------------------------------------------------------------

fn galois_cases(o: &VerifyOptions) -> Result<Vec<Bimodule>> {
    let mut out = Vec::new();
    for w in posets_up_to(o.size_cap.min(4)) {
        out.extend(Bimodule::enumerate(&w, 6)?);
    }
    Ok(out)
}

/// `dia S <= T` iff `S <= box T` for every pair of upper sets.
pub fn galois_case(r: &Bimodule) -> Verdict {
    let w = r.source();
    let ups = w.upset_masks_uncapped();
    for &s in &ups {
        let ds = r.dia_black(s)?;
        for &t in &ups {
            if (ds & !t == 0) != (s & !r.boxed(t)? == 0) {
                return Ok(Some(json!({
                    "frame": poset_json(w), "rel": rel_json(r), "S": mask_json(w, s), "T": mask_json(w, t)
                })));
            }
        }
    }
    Ok(None)
}

// ---- open-lemma ----------------------------------------------------------

/// Every monotone map between posets with at most `n` elements.
pub fn monotone_map_cases(n: usize) -> Result<Vec<MonotoneMap>> {
    let ps = posets_up_to(n);
    let mut out = Vec::new();
    for a in &ps {
        for b in &ps {
            out.extend(enumerate_monotone_maps(a, b, 6)?);
        }
    }
    Ok(out)
}

fn open_lemma_case(f: &MonotoneMap) -> Verdict {
    let v = open_iff_exponential_check(f, 6)?;
    Ok((!v.agrees()).then(|| json!({ "map": map_json(f), "verdict": v })))
}

// ---- modal-open-lemma ----------------------------------------------------

pub struct ModalOpenCase {
    pub map: MonotoneMap,
    pub source_rels: Arc<Vec<Bimodule>>,
    pub target_rel: Bimodule,
}

fn modal_open_cases(o: &VerifyOptions) -> Result<Vec<ModalOpenCase>> {
    let ps = posets_up_to(o.size_cap.min(3));
    let rels: Vec<Arc<Vec<Bimodule>>> = ps.iter().map(|p| Bimodule::enumerate(p, 6).map(Arc::new)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (i, a) in ps.iter().enumerate() {
        for (j, b) in ps.iter().enumerate() {
            for f in enumerate_monotone_maps(a, b, 6)? {
                for r2 in rels[j].iter() {
                    out.push(ModalOpenCase {
                        map: f.clone(),
                        source_rels: rels[i].clone(),
                        target_rel: r2.clone(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// The three characterizations agree for every source bimodule that `f`
/// carries into the target bimodule.
pub fn modal_open_case(c: &ModalOpenCase) -> Verdict {
    for r in c.source_rels.iter() {
        if !is_bimodule_morphism(&c.map, r, &c.target_rel)? {
            continue;
        }
        let routes = modal_open_routes(&c.map, r, &c.target_rel, 6)?;
        if !routes.agree() {
            return Ok(Some(json!({
                "map": map_json(&c.map), "R": rel_json(r), "R'": rel_json(&c.target_rel), "routes": routes
            })));
        }
    }
    Ok(None)
}

// ---- primes-duality / raney ----------------------------------------------

fn primes_case(w: &Arc<Poset>) -> Verdict {
    let lattice = UpsetLattice::new(w.clone(), 6)?.to_finite_lattice();
    let (primes, _) = lattice.primes();
    Ok(w.isomorphism_to(&primes).is_none().then(|| json!({ "frame": poset_json(w) })))
}

/// Upper-set lattices of small posets, Boolean algebras, and the two
/// standard non-distributive lattices.
pub fn lattice_fixtures() -> Vec<(String, FiniteLattice)> {
    let mut out = Vec::new();
    for w in posets_up_to(3) {
        let l = UpsetLattice::new(w.clone(), 6).expect("small").to_finite_lattice();
        out.push((format!("Up({})", poset_json(&w)), l));
    }
    for n in 1..=3 {
        out.push((format!("2^{n}"), FiniteLattice::boolean(n)));
    }
    for n in 1..=4 {
        out.push((format!("chain{n}"), FiniteLattice::from_poset(&Poset::chain(n)).expect("chains are lattices")));
    }
    out.push(("M3".into(), FiniteLattice::m3()));
    out.push(("N5".into(), FiniteLattice::n5()));
    out
}

/// Reconstruction succeeds exactly on the prime algebraic lattices and
/// then yields a verified isomorphism.
fn raney_case(case: &(String, FiniteLattice)) -> Verdict {
    let (name, l) = case;
    let algebraic = l.is_prime_algebraic();
    let ok = match l.reconstruct() {
        Ok(rec) => algebraic && rec.verify(l).is_ok(),
        Err(Error::NotPrimeAlgebraic) => !algebraic,
        Err(e) => return Err(e),
    };
    let rejected_as_expected = !(name == "M3" || name == "N5") || !algebraic;
    Ok((!(ok && rejected_as_expected)).then(|| json!({ "lattice": name, "prime_algebraic": algebraic })))
}

// ---- presheaf suites ------------------------------------------------------

/// The base categories used for presheaf checks: the 2-chain, the walking
/// parallel pair, and the completion of the idempotent monoid.
pub fn fixture_categories() -> Vec<(String, Arc<FinCategory>)> {
    let chain = Poset::new(&["a", "b"], &["a", "b"].windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>()).expect("chain");
    vec![
        ("2-chain".into(), Arc::new(FinCategory::from_poset(&chain))),
        ("parallel-pair".into(), Arc::new(FinCategory::walking_parallel_pair())),
        (
            "karoubi(idempotent)".into(),
            cauchy_completion(&Arc::new(FinCategory::idempotent_monoid())).category,
        ),
    ]
}

/// All presheaves with value sets of size at most 2 and at most
/// `max_total` elements, plus representables, their binary sums, and
/// seeded random quotients of sums of representables.
pub fn presheaf_corpus(base: &Arc<FinCategory>, max_total: usize, random: usize, rng: &mut ChaCha8Rng) -> Vec<Presheaf> {
    let mut out: Vec<Presheaf> = enumerate_presheaves(base, 2)
        .expect("small base")
        .into_iter()
        .filter(|p| p.total() <= max_total)
        .collect();
    let n = base.num_objects();
    let reps: Vec<Presheaf> = (0..n).map(|w| Presheaf::yoneda(base.clone(), w)).collect();
    for a in 0..n {
        out.push(reps[a].clone());
        for b in a..n {
            out.push(coproduct(&reps[a], &reps[b]).expect("same base").presheaf);
        }
    }
    out.push(Presheaf::terminal(base.clone()));
    out.push(Presheaf::initial(base.clone()));
    for _ in 0..random {
        let gens = rng.gen_range(1..=3);
        let merges = rng.gen_range(0..=4);
        out.push(random_presheaf(base, gens, merges, rng));
    }
    out.retain(|p| p.total() <= max_total);
    out
}

fn corpus_cases(o: &VerifyOptions, max_total: usize) -> Vec<Presheaf> {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    fixture_categories()
        .iter()
        .flat_map(|(_, c)| presheaf_corpus(c, max_total, o.count.min(50), &mut rng))
        .collect()
}

fn presheaf_json(p: &Presheaf) -> Value {
    json!({ "base": p.base().objects(), "presheaf": p.to_file() })
}

fn yoneda_case(p: &Presheaf) -> Verdict {
    for w in 0..p.base().num_objects() {
        let b = yoneda_bijection(p, w)?;
        if b.transformations.len() != p.size(w) {
            return Ok(Some(json!({ "presheaf": presheaf_json(p), "object": p.base().object_name(w) })));
        }
    }
    Ok(None)
}

fn curry_cases(o: &VerifyOptions) -> Vec<(Presheaf, Presheaf, Presheaf)> {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let mut out = Vec::new();
    for (_, c) in fixture_categories() {
        let corpus = presheaf_corpus(&c, 4, 10, &mut rng);
        for _ in 0..o.count.max(1) {
            let pick = |rng: &mut ChaCha8Rng| corpus[rng.gen_range(0..corpus.len())].clone();
            out.push((pick(&mut rng), pick(&mut rng), pick(&mut rng)));
        }
    }
    out
}

fn curry_case(t: &(Presheaf, Presheaf, Presheaf)) -> Verdict {
    let rep = currying_check(&t.0, &t.1, &t.2)?;
    Ok((!rep.holds()).then(|| {
        json!({ "X": presheaf_json(&t.0), "P": presheaf_json(&t.1), "Q": presheaf_json(&t.2), "report": rep })
    }))
}

fn coyoneda_case(p: &Presheaf) -> Verdict {
    let cy = coyoneda(p, 12)?;
    Ok((!cy.is_iso(p)).then(|| json!({ "presheaf": presheaf_json(p) })))
}

fn kan_cases(o: &VerifyOptions) -> Vec<(FinFunctor, Presheaf, Presheaf)> {
    let mut cats = fixture_categories();
    cats.insert(0, ("point".into(), Arc::new(FinCategory::from_poset(&Poset::point()))));
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let mut out = Vec::new();
    for (_, c) in &cats {
        for (_, d) in &cats {
            let mut functors = Vec::new();
            for_each_functor(c, d, 16, |f| {
                functors.push(f.clone());
                true
            });
            let pc = presheaf_corpus(c, 3, 2, &mut rng);
            let pd = presheaf_corpus(d, 3, 2, &mut rng);
            for f in functors {
                for _ in 0..4 {
                    let p = pc[rng.gen_range(0..pc.len())].clone();
                    let q = pd[rng.gen_range(0..pd.len())].clone();
                    out.push((f.clone(), p, q));
                }
            }
        }
    }
    out
}

/// Both adjunctions of the Kan triple, and `lan f (y c) = y (f c)`.
fn kan_case(t: &(FinFunctor, Presheaf, Presheaf)) -> Verdict {
    let (f, p, q) = t;
    let rep = kan_triple_check(f, p, q)?;
    let mut reps_ok = true;
    for c in 0..f.source().num_objects() {
        let l = lan(f, &Presheaf::yoneda(f.source().clone(), c))?;
        reps_ok &= isomorphism(&l.presheaf, &Presheaf::yoneda(f.target().clone(), f.on_object(c)))?.is_some();
    }
    Ok((!(rep.holds() && reps_ok)).then(|| {
        json!({
            "source": f.source().objects(), "target": f.target().objects(),
            "P": presheaf_json(p), "Q": presheaf_json(q), "report": rep, "representables": reps_ok
        })
    }))
}

/// Hom, terminal, empty, and one seeded random profunctor on `base`.
pub fn fixture_profunctors(base: &Arc<FinCategory>, rng: &mut ChaCha8Rng) -> Vec<(String, Profunctor)> {
    vec![
        ("hom".into(), Profunctor::hom(base.clone())),
        ("terminal".into(), Profunctor::terminal(base.clone())),
        ("empty".into(), Profunctor::empty(base.clone())),
        ("random".into(), random_profunctor(base, rng)),
    ]
}

/// A seeded profunctor that is neither empty nor terminal nor Hom, when
/// one is found within a few draws.
fn random_profunctor(base: &Arc<FinCategory>, rng: &mut ChaCha8Rng) -> Profunctor {
    let avoid = [
        Profunctor::hom(base.clone()),
        Profunctor::terminal(base.clone()),
        Profunctor::empty(base.clone()),
    ];
    let mut r = Profunctor::random(base.clone(), rng);
    for _ in 0..32 {
        let small = r.as_presheaf().total() <= 8;
        let fresh = avoid
            .iter()
            .all(|a| isomorphism(a.as_presheaf(), r.as_presheaf()).map_or(true, |i| i.is_none()));
        if small && fresh {
            break;
        }
        r = Profunctor::random(base.clone(), rng);
    }
    r
}

fn adjunction_cases(o: &VerifyOptions) -> Vec<(String, Profunctor, Presheaf, Presheaf)> {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let mut out = Vec::new();
    for (cname, c) in fixture_categories() {
        let corpus = presheaf_corpus(&c, 3, 4, &mut rng);
        for (rname, r) in fixture_profunctors(&c, &mut rng) {
            for _ in 0..o.count.clamp(1, 20) {
                let p = corpus[rng.gen_range(0..corpus.len())].clone();
                let q = corpus[rng.gen_range(0..corpus.len())].clone();
                out.push((format!("{cname}/{rname}"), r.clone(), p, q));
            }
        }
    }
    out
}

fn adjunction_case(t: &(String, Profunctor, Presheaf, Presheaf)) -> Verdict {
    let rep = adjunction_check(&t.1, &t.2, &t.3)?;
    Ok((!rep.holds()).then(|| {
        json!({ "profunctor": t.0, "P": presheaf_json(&t.2), "Q": presheaf_json(&t.3), "report": rep })
    }))
}

/// Every morphism `(id, alpha) : R -> S` between fixture profunctors on
/// each fixture base, with a small probe corpus.
fn morphism_cases(o: &VerifyOptions) -> Result<Vec<(String, ProfMorphism, Arc<Vec<Presheaf>>)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let mut out = Vec::new();
    for (cname, c) in fixture_categories() {
        let probes = Arc::new(presheaf_corpus(&c, 3, 2, &mut rng).into_iter().step_by(3).collect::<Vec<_>>());
        let profs = fixture_profunctors(&c, &mut rng);
        let f = FinFunctor::identity(c.clone());
        for (rn, r) in &profs {
            for (sn, s) in &profs {
                for (k, m) in ProfMorphism::enumerate(&f, r, s)?.into_iter().enumerate().take(64) {
                    out.push((format!("{cname}/{rn}->{sn}#{k}"), m, probes.clone()));
                }
            }
        }
    }
    Ok(out)
}

fn endoprof_case(t: &(String, ProfMorphism, Arc<Vec<Presheaf>>)) -> Verdict {
    let (name, m, probes) = t;
    let rep = endoprof_bijection(m, probes)?;
    // Independent count on the first morphism of each (R, S) pair only.
    let counted = if name.ends_with("#0") {
        let g = count_gamma_families(&m.f, &m.r, &m.s)?;
        let alphas = ProfMorphism::enumerate(&m.f, &m.r, &m.s)?.len();
        Some((g.families, alphas, g.roundtrip))
    } else {
        None
    };
    let count_ok = counted.map_or(true, |(g, a, rt)| g == a && rt);
    Ok((!(rep.holds() && count_ok)).then(|| json!({ "morphism": name, "report": rep, "counts": counted })))
}

fn t_alpha_case(t: &(String, ProfMorphism, Arc<Vec<Presheaf>>)) -> Verdict {
    let open = is_modally_open2(&t.1)?;
    let gamma_iso = gamma_is_iso(&t.1)?;
    Ok((open != gamma_iso).then(|| json!({ "morphism": t.0, "t_alpha_iso": open, "gamma_iso": gamma_iso })))
}

// ---- degeneration ----------------------------------------------------------

/// Data shared by every degeneration case over one frame.
pub struct DegenerationFrame {
    pub frame: Arc<Poset>,
    pub base: Arc<FinCategory>,
    pub rels: Vec<(Bimodule, Profunctor)>,
    pub maps: Vec<(MonotoneMap, FinFunctor)>,
}

impl DegenerationFrame {
    pub fn new(frame: Arc<Poset>) -> Result<Self> {
        let base = Arc::new(FinCategory::from_poset(&frame));
        let rels = Bimodule::enumerate(&frame, 6)?
            .into_iter()
            .map(|r| Ok((r.clone(), Profunctor::from_bimodule(base.clone(), &r)?)))
            .collect::<Result<_>>()?;
        let maps = enumerate_monotone_maps(&frame, &frame, 6)?
            .into_iter()
            .map(|f| {
                let func = poset_functor_between(&f, base.clone(), base.clone());
                (f, func)
            })
            .collect();
        Ok(DegenerationFrame { frame, base, rels, maps })
    }
}

pub struct DegenerationCase {
    pub data: Arc<DegenerationFrame>,
    pub rel: usize,
}

fn degeneration_cases(o: &VerifyOptions) -> Result<Vec<DegenerationCase>> {
    let mut out = Vec::new();
    for w in posets_up_to(o.size_cap.min(3)) {
        let data = Arc::new(DegenerationFrame::new(w)?);
        for rel in 0..data.rels.len() {
            out.push(DegenerationCase { data: data.clone(), rel });
        }
    }
    Ok(out)
}

/// On the poset category with subsingleton data: `box2`, `dia2` and
/// `interpret2d` have the supports predicted by the relational semantics,
/// and for every endomap relational modal openness is surjectivity of
/// `t_alpha`, which invertibility implies.
pub fn degeneration_case(c: &DegenerationCase) -> Verdict {
    let d = &*c.data;
    let (w, base) = (&d.frame, &d.base);
    let (rel, prof) = &d.rels[c.rel];
    let ups = w.upset_masks_uncapped();
    let fail = |what: &str, detail: Value| Ok(Some(json!({ "frame": poset_json(w), "rel": rel_json(rel), "check": what, "detail": detail })));
    for &s in &ups {
        let p = upset_presheaf(base, s)?;
        if support_mask(&box2(prof, &p)?.presheaf) != rel.boxed(s)? {
            return fail("box", mask_json(w, s));
        }
        if support_mask(&dia2(prof, &p)?.presheaf) != rel.dia_black(s)? {
            return fail("dia", mask_json(w, s));
        }
    }
    let formulas = formulas_up_to_depth(&["p"], 1);
    for &s in &ups {
        let mut val = BTreeMap::new();
        val.insert("p".to_string(), s);
        let km = KripkeModel::new(w.clone(), Some(rel.clone()), val)?;
        let tm = TwoDimModel::from_kripke(&km)?;
        let mut ev = Evaluator::new(&km);
        for phi in &formulas {
            if support_mask(&interpret2d(&tm, phi)?) != ev.satisfying_worlds(phi)? {
                return fail("interpret2d", json!({ "p": mask_json(w, s), "formula": phi.to_string() }));
            }
        }
    }
    for (f, func) in &d.maps {
        let lans = t_alpha_domains(func, prof)?;
        for (r2, prof2) in &d.rels {
            if let Some(m) = prof_morphism_of_subsingletons(f, rel, r2, func, prof, prof2)? {
                let expected = back_condition(f, rel, r2);
                let t = t_alpha_over(&m, lans.clone())?;
                if t.is_surjective() != expected || (t.is_iso() && !expected) {
                    return fail("modally-open", json!({ "map": map_json(f), "R'": rel_json(r2) }));
                }
            }
        }
    }
    Ok(None)
}

/// `f(w) R' v` implies some `w R w'` with `f(w') <= v`.
fn back_condition(f: &MonotoneMap, r: &Bimodule, r2: &Bimodule) -> bool {
    let n = f.source().len();
    (0..n).all(|w| {
        (0..f.target().len())
            .filter(|&v| r2.related(f.apply(w), v))
            .all(|v| (0..n).any(|w2| r.related(w, w2) && f.target().leq(f.apply(w2), v)))
    })
}

/// Completion is idempotent: the completion of a completion is equivalent
/// to it, found by bounded search.
pub fn completion_idempotent(c: &Arc<FinCategory>, limit: usize) -> bool {
    let once = cauchy_completion(c).category;
    let twice = cauchy_completion(&once).category;
    find_equivalence(&once, &twice, limit).witness.is_some()
}
