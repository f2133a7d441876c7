//! Endoprofunctors on a finite category and the two-dimensional modalities
//! they induce on presheaves.
//!
//! A profunctor `R(w, v)` is contravariant in `w` and covariant in `v`. It
//! is stored as a presheaf over `Op(C) x C`, so bifunctoriality and the
//! commuting of the two actions are ordinary functor laws there.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::category::{FinCategory, FinFunctor};
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::kripke::KripkeModel;
use crate::modal::{is_bimodule_morphism, Bimodule};
use crate::order::{Mask, MonotoneMap};
use crate::presheaf::{
    coproduct, exponential, hom_position, lan, nat_transformations, product, pushout,
    random_presheaf, restrict, restrict_map, yoneda_map, LeftKan, NatTrans, Presheaf, UnionFind,
};

/// `Op(C) x C`.
pub fn pairs_category(base: &FinCategory) -> Arc<FinCategory> {
    Arc::new(base.opposite().product(base))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profunctor {
    base: Arc<FinCategory>,
    data: Presheaf,
}

/// On-disk profunctor. Keys of `at` are `"[w,v]"`; `lact[h][v]` maps
/// `R(dst h, v) -> R(src h, v)`, `ract[k][w]` maps `R(w, src k) -> R(w, dst k)`.
/// Identity arrows may be omitted.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfunctorFile {
    pub at: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub lact: BTreeMap<String, BTreeMap<String, BTreeMap<String, String>>>,
    #[serde(default)]
    pub ract: BTreeMap<String, BTreeMap<String, BTreeMap<String, String>>>,
}

fn pair_key(c: &FinCategory, w: usize, v: usize) -> String {
    format!("[{},{}]", c.object_name(w), c.object_name(v))
}

fn parse_pair_key(c: &FinCategory, key: &str) -> Result<(usize, usize)> {
    let inner = key
        .trim()
        .strip_prefix('[')
        .and_then(|k| k.strip_suffix(']'))
        .ok_or_else(|| Error::Invalid(format!("profunctor key `{key}` is not of the form [w,v]")))?;
    let (w, v) = inner
        .split_once(',')
        .ok_or_else(|| Error::Invalid(format!("profunctor key `{key}` is not of the form [w,v]")))?;
    Ok((c.object(w.trim())?, c.object(v.trim())?))
}

impl Profunctor {
    /// Wraps a presheaf over `Op(C) x C`.
    pub fn from_presheaf(base: Arc<FinCategory>, data: Presheaf) -> Result<Self> {
        if **data.base() != *pairs_category(&base) {
            return Err(Error::BaseMismatch);
        }
        Ok(Profunctor { base, data })
    }

    /// Builds from separate left and right actions; validates
    /// bifunctoriality.
    pub fn new(
        base: Arc<FinCategory>,
        labels: Vec<Vec<Vec<String>>>,
        lact: impl Fn(usize, usize, usize) -> usize,
        ract: impl Fn(usize, usize, usize) -> usize,
    ) -> Result<Self> {
        let c = &*base;
        let (n, na) = (c.num_objects(), c.num_arrows());
        let pairs = pairs_category(c);
        let flat: Vec<Vec<String>> = (0..n * n).map(|i| labels[i / n][i % n].clone()).collect();
        let act = (0..na * na)
            .map(|i| {
                let (h, k) = (i / na, i % na);
                (0..flat[c.dst(h) * n + c.src(k)].len())
                    .map(|x| ract(k, c.src(h), lact(h, c.src(k), x)))
                    .collect()
            })
            .collect();
        let data = Presheaf::new(pairs, flat, act)?;
        Ok(Profunctor { base, data })
    }

    pub fn from_file(base: Arc<FinCategory>, file: &ProfunctorFile) -> Result<Self> {
        let c = &*base;
        let n = c.num_objects();
        let mut labels = vec![vec![Vec::new(); n]; n];
        for (key, ls) in &file.at {
            let (w, v) = parse_pair_key(c, key)?;
            labels[w][v] = ls.clone();
        }
        let lookup = |ls: &[String], x: &str| {
            ls.iter()
                .position(|l| l == x)
                .ok_or_else(|| Error::UnknownElement(x.to_string()))
        };
        let mut lt: Vec<Vec<Vec<usize>>> = (0..c.num_arrows())
            .map(|h| (0..n).map(|v| (0..labels[c.dst(h)][v].len()).collect()).collect())
            .collect();
        let mut rt: Vec<Vec<Vec<usize>>> = (0..c.num_arrows())
            .map(|k| (0..n).map(|w| (0..labels[w][c.src(k)].len()).collect()).collect())
            .collect();
        for h in 0..c.num_arrows() {
            if c.is_identity(h) {
                continue;
            }
            for v in 0..n {
                lt[h][v].fill(usize::MAX);
                rt[h][v].fill(usize::MAX);
            }
        }
        for (h, per) in &file.lact {
            let hi = c.arrow(h)?;
            for (v, table) in per {
                let vi = c.object(v)?;
                for (x, y) in table {
                    let xi = lookup(&labels[c.dst(hi)][vi], x)?;
                    lt[hi][vi][xi] = lookup(&labels[c.src(hi)][vi], y)?;
                }
            }
        }
        for (k, per) in &file.ract {
            let ki = c.arrow(k)?;
            for (w, table) in per {
                let wi = c.object(w)?;
                for (x, y) in table {
                    let xi = lookup(&labels[wi][c.src(ki)], x)?;
                    rt[ki][wi][xi] = lookup(&labels[wi][c.dst(ki)], y)?;
                }
            }
        }
        for a in 0..c.num_arrows() {
            for o in 0..n {
                if lt[a][o].contains(&usize::MAX) {
                    return Err(Error::FunctorLawViolation(format!(
                        "left action of {} at {} is incomplete",
                        c.arrow_name(a),
                        c.object_name(o)
                    )));
                }
                if rt[a][o].contains(&usize::MAX) {
                    return Err(Error::FunctorLawViolation(format!(
                        "right action of {} at {} is incomplete",
                        c.arrow_name(a),
                        c.object_name(o)
                    )));
                }
            }
        }
        Self::new(base.clone(), labels, |h, v, x| lt[h][v][x], |k, w, x| rt[k][w][x])
    }

    pub fn to_file(&self) -> ProfunctorFile {
        let c = &*self.base;
        let n = c.num_objects();
        let mut file = ProfunctorFile::default();
        for w in 0..n {
            for v in 0..n {
                file.at.insert(pair_key(c, w, v), self.labels(w, v).to_vec());
            }
        }
        for a in (0..c.num_arrows()).filter(|&a| !c.is_identity(a)) {
            let mut l = BTreeMap::new();
            let mut r = BTreeMap::new();
            for o in 0..n {
                let lt: BTreeMap<String, String> = (0..self.size(c.dst(a), o))
                    .map(|x| (self.label(c.dst(a), o, x).to_string(), self.label(c.src(a), o, self.lact(a, o, x)).to_string()))
                    .collect();
                let rt: BTreeMap<String, String> = (0..self.size(o, c.src(a)))
                    .map(|x| (self.label(o, c.src(a), x).to_string(), self.label(o, c.dst(a), self.ract(a, o, x)).to_string()))
                    .collect();
                if !lt.is_empty() {
                    l.insert(c.object_name(o).to_string(), lt);
                }
                if !rt.is_empty() {
                    r.insert(c.object_name(o).to_string(), rt);
                }
            }
            if !l.is_empty() {
                file.lact.insert(c.arrow_name(a).to_string(), l);
            }
            if !r.is_empty() {
                file.ract.insert(c.arrow_name(a).to_string(), r);
            }
        }
        file
    }

    pub fn base(&self) -> &Arc<FinCategory> {
        &self.base
    }

    /// The underlying presheaf on `Op(C) x C`.
    pub fn as_presheaf(&self) -> &Presheaf {
        &self.data
    }

    fn idx(&self, w: usize, v: usize) -> usize {
        w * self.base.num_objects() + v
    }

    pub fn size(&self, w: usize, v: usize) -> usize {
        self.data.size(self.idx(w, v))
    }

    pub fn labels(&self, w: usize, v: usize) -> &[String] {
        self.data.labels(self.idx(w, v))
    }

    pub fn label(&self, w: usize, v: usize, x: usize) -> &str {
        self.data.label(self.idx(w, v), x)
    }

    /// `h : u -> w` acting `R(w, v) -> R(u, v)`.
    pub fn lact(&self, h: usize, v: usize, x: usize) -> usize {
        let na = self.base.num_arrows();
        self.data.act(h * na + self.base.id(v), x)
    }

    /// `k : v -> v'` acting `R(w, v) -> R(w, v')`.
    pub fn ract(&self, k: usize, w: usize, x: usize) -> usize {
        let na = self.base.num_arrows();
        self.data.act(self.base.id(w) * na + k, x)
    }

    /// `R(h, -) : R(w, -) -> R(u, -)` for `h : u -> w`.
    pub fn lact_nat(&self, h: usize) -> NatTrans {
        let w = self.base.dst(h);
        NatTrans {
            components: (0..self.base.num_objects())
                .map(|v| (0..self.size(w, v)).map(|x| self.lact(h, v, x)).collect())
                .collect(),
        }
    }

    pub fn hom(base: Arc<FinCategory>) -> Self {
        let c = base.clone();
        let n = c.num_objects();
        let labels = (0..n)
            .map(|w| {
                (0..n)
                    .map(|v| c.hom(w, v).iter().map(|&a| c.arrow_name(a).to_string()).collect())
                    .collect()
            })
            .collect();
        Self::new(
            base,
            labels,
            |h, v, x| hom_position(&c, c.comp(c.hom(c.dst(h), v)[x], h)),
            |k, w, x| hom_position(&c, c.comp(k, c.hom(w, c.src(k))[x])),
        )
        .expect("Hom is a profunctor")
    }

    pub fn terminal(base: Arc<FinCategory>) -> Self {
        let n = base.num_objects();
        Self::new(base, vec![vec![vec!["*".to_string()]; n]; n], |_, _, _| 0, |_, _, _| 0).expect("terminal")
    }

    pub fn empty(base: Arc<FinCategory>) -> Self {
        let n = base.num_objects();
        Self::new(base, vec![vec![Vec::new(); n]; n], |_, _, _| 0, |_, _, _| 0).expect("empty")
    }

    /// The subsingleton profunctor of a bimodule over the poset category
    /// of its frame.
    pub fn from_bimodule(base: Arc<FinCategory>, r: &Bimodule) -> Result<Self> {
        if !r.is_endo() || base.num_objects() != r.source().len() {
            return Err(Error::BaseMismatch);
        }
        let n = base.num_objects();
        let labels = (0..n)
            .map(|w| {
                (0..n)
                    .map(|v| if r.related(w, v) { vec!["*".to_string()] } else { Vec::new() })
                    .collect()
            })
            .collect();
        Self::new(base, labels, |_, _, _| 0, |_, _, _| 0)
    }

    /// Pairs `(w, v)` with `R(w, v)` inhabited.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let n = self.base.num_objects();
        (0..n)
            .flat_map(|w| (0..n).map(move |v| (w, v)))
            .filter(|&(w, v)| self.size(w, v) > 0)
            .collect()
    }

    /// A quotient of a sum of random representables of `Op(C) x C`.
    pub fn random<R: rand::Rng>(base: Arc<FinCategory>, rng: &mut R) -> Self {
        let pairs = pairs_category(&base);
        let gens = rng.gen_range(1..=2);
        let merges = rng.gen_range(0..=3);
        let data = random_presheaf(&pairs, gens, merges, rng);
        Profunctor { base, data }
    }

    /// `lambda_R(w) = R(w, -)`.
    pub fn lambda(&self, w: usize) -> Result<Presheaf> {
        let c = &self.base;
        if w >= c.num_objects() {
            return Err(Error::UnknownObject(format!("#{w}")));
        }
        let labels = (0..c.num_objects()).map(|v| self.labels(w, v).to_vec()).collect();
        let act = (0..c.num_arrows())
            .map(|k| (0..self.size(w, c.src(k))).map(|x| self.ract(k, w, x)).collect())
            .collect();
        Ok(Presheaf::new_unchecked(c.clone(), labels, act))
    }
}

/// `(box_R P)(w) = Hom(R(w, -), P)`, keeping the enumerated
/// transformations behind each element.
#[derive(Clone, Debug)]
pub struct Box2 {
    pub presheaf: Presheaf,
    pub lambdas: Vec<Presheaf>,
    pub maps: Vec<Vec<NatTrans>>,
    index: Vec<HashMap<NatTrans, usize>>,
}

impl Box2 {
    pub fn element_index(&self, w: usize, t: &NatTrans) -> Option<usize> {
        self.index[w].get(t).copied()
    }
}

fn require_base(r: &Profunctor, p: &Presheaf) -> Result<()> {
    if Arc::ptr_eq(r.base(), p.base()) || **r.base() == **p.base() {
        Ok(())
    } else {
        Err(Error::BaseMismatch)
    }
}

pub fn box2(r: &Profunctor, p: &Presheaf) -> Result<Box2> {
    require_base(r, p)?;
    let c = r.base().clone();
    let n = c.num_objects();
    let lambdas: Vec<Presheaf> = (0..n).map(|w| r.lambda(w)).collect::<Result<_>>()?;
    let maps: Vec<Vec<NatTrans>> = (0..n).map(|w| nat_transformations(&lambdas[w], p)).collect::<Result<_>>()?;
    let index: Vec<HashMap<NatTrans, usize>> = maps
        .iter()
        .map(|ts| ts.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect())
        .collect();
    // f : w -> v sends alpha to alpha o R(f, -).
    let act = (0..c.num_arrows())
        .map(|f| {
            let (w, v) = (c.src(f), c.dst(f));
            let l = r.lact_nat(f);
            maps[w]
                .iter()
                .map(|alpha| index[v][&l.then(alpha)])
                .collect()
        })
        .collect();
    let labels = (0..n)
        .map(|w| maps[w].iter().map(|t| t.describe(&lambdas[w], p)).collect())
        .collect();
    Ok(Box2 {
        presheaf: Presheaf::new(c, labels, act)?,
        lambdas,
        maps,
        index,
    })
}

/// `box_R t : box_R P -> box_R Q` by postcomposition.
pub fn box2_map(src: &Box2, dst: &Box2, t: &NatTrans) -> NatTrans {
    NatTrans {
        components: src
            .maps
            .iter()
            .enumerate()
            .map(|(w, ts)| {
                ts.iter()
                    .map(|alpha| dst.element_index(w, &alpha.then(t)).expect("postcomposite is natural"))
                    .collect()
            })
            .collect(),
    }
}

/// `(dia_R P)(w) = coend^v P(v) x R(v, w)`, with the class of every
/// triple `(v, x, r)` recorded.
#[derive(Clone, Debug)]
pub struct Dia2 {
    pub presheaf: Presheaf,
    class: Vec<HashMap<(usize, usize, usize), usize>>,
}

impl Dia2 {
    pub fn class_of(&self, w: usize, v: usize, x: usize, r: usize) -> usize {
        self.class[w][&(v, x, r)]
    }
}

pub fn dia2(r: &Profunctor, p: &Presheaf) -> Result<Dia2> {
    require_base(r, p)?;
    let c = r.base().clone();
    let n = c.num_objects();
    let mut labels = Vec::with_capacity(n);
    let mut class = Vec::with_capacity(n);
    let mut reps_at = Vec::with_capacity(n);
    for w in 0..n {
        let mut triples = Vec::new();
        let mut idx = HashMap::new();
        for v in 0..n {
            for x in 0..p.size(v) {
                for y in 0..r.size(v, w) {
                    idx.insert((v, x, y), triples.len());
                    triples.push((v, x, y));
                }
            }
        }
        let mut uf = UnionFind::new(triples.len());
        // (u, x, R(h, w)(y)) ~ (v, h . x, y) for h : u -> v, y in R(v, w).
        for h in 0..c.num_arrows() {
            if c.is_identity(h) {
                continue;
            }
            let (u, v) = (c.src(h), c.dst(h));
            for x in 0..p.size(u) {
                for y in 0..r.size(v, w) {
                    uf.union(idx[&(u, x, r.lact(h, w, y))], idx[&(v, p.act(h, x), y)]);
                }
            }
        }
        let (cls, reps) = uf.classes();
        labels.push(
            reps.iter()
                .map(|&i| {
                    let (v, x, y) = triples[i];
                    format!("[{},{},{}]", c.object_name(v), p.label(v, x), r.label(v, w, y))
                })
                .collect::<Vec<_>>(),
        );
        class.push(triples.iter().enumerate().map(|(i, &t)| (t, cls[i])).collect::<HashMap<_, _>>());
        reps_at.push(reps.into_iter().map(|i| triples[i]).collect::<Vec<_>>());
    }
    let act = (0..c.num_arrows())
        .map(|k| {
            let (w, w2) = (c.src(k), c.dst(k));
            reps_at[w]
                .iter()
                .map(|&(v, x, y)| class[w2][&(v, x, r.ract(k, v, y))])
                .collect()
        })
        .collect();
    Ok(Dia2 {
        presheaf: Presheaf::new(c, labels, act)?,
        class,
    })
}

/// `dia_R t : dia_R P -> dia_R P'`, `[v, x, r] |-> [v, t x, r]`.
pub fn dia2_map(r: &Profunctor, p: &Presheaf, src: &Dia2, dst: &Dia2, t: &NatTrans) -> NatTrans {
    let n = r.base().num_objects();
    let mut components: Vec<Vec<usize>> = (0..n).map(|w| vec![usize::MAX; src.presheaf.size(w)]).collect();
    for (w, comp) in components.iter_mut().enumerate() {
        for v in 0..n {
            for x in 0..p.size(v) {
                for y in 0..r.size(v, w) {
                    comp[src.class_of(w, v, x, y)] = dst.class_of(w, v, t.at(v, x), y);
                }
            }
        }
    }
    NatTrans { components }
}

/// `eta : P -> box dia P`, `x |-> (y |-> [w, x, y])`.
pub fn unit(r: &Profunctor, p: &Presheaf, dp: &Dia2, bdp: &Box2) -> NatTrans {
    let n = r.base().num_objects();
    NatTrans {
        components: (0..n)
            .map(|w| {
                (0..p.size(w))
                    .map(|x| {
                        let alpha = NatTrans {
                            components: (0..n).map(|u| (0..r.size(w, u)).map(|y| dp.class_of(u, w, x, y)).collect()).collect(),
                        };
                        bdp.element_index(w, &alpha).expect("unit component is natural")
                    })
                    .collect()
            })
            .collect(),
    }
}

/// `epsilon : dia box Q -> Q`, `[v, alpha, y] |-> alpha(y)`.
pub fn counit(r: &Profunctor, bq: &Box2, dbq: &Dia2) -> NatTrans {
    let n = r.base().num_objects();
    let mut components: Vec<Vec<usize>> = (0..n).map(|u| vec![usize::MAX; dbq.presheaf.size(u)]).collect();
    for (u, comp) in components.iter_mut().enumerate() {
        for v in 0..n {
            for (a, alpha) in bq.maps[v].iter().enumerate() {
                for y in 0..r.size(v, u) {
                    comp[dbq.class_of(u, v, a, y)] = alpha.at(u, y);
                }
            }
        }
    }
    NatTrans { components }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjunctionReport {
    /// `|Hom(dia P, Q)|`.
    pub left: usize,
    /// `|Hom(P, box Q)|`.
    pub right: usize,
    /// Transposition is a bijection, inverse to its converse, and agrees
    /// with `phi |-> box(phi) o eta`.
    pub bijection: bool,
    pub triangles: bool,
}

impl AdjunctionReport {
    pub fn holds(&self) -> bool {
        self.left == self.right && self.bijection && self.triangles
    }
}

/// Checks `dia_R -| box_R` at `(P, Q)`: both Hom-sets are enumerated
/// independently and matched by explicit transposition.
pub fn adjunction_check(r: &Profunctor, p: &Presheaf, q: &Presheaf) -> Result<AdjunctionReport> {
    let n = r.base().num_objects();
    let dp = dia2(r, p)?;
    let bq = box2(r, q)?;
    let lhs = nat_transformations(&dp.presheaf, q)?;
    let rhs = nat_transformations(p, &bq.presheaf)?;
    let rhs_index: HashMap<&NatTrans, usize> = rhs.iter().enumerate().map(|(i, t)| (t, i)).collect();

    let transpose = |phi: &NatTrans| -> Option<NatTrans> {
        let components = (0..n)
            .map(|w| {
                (0..p.size(w))
                    .map(|x| {
                        let alpha = NatTrans {
                            components: (0..n)
                                .map(|u| (0..r.size(w, u)).map(|y| phi.at(u, dp.class_of(u, w, x, y))).collect())
                                .collect(),
                        };
                        bq.element_index(w, &alpha)
                    })
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>()?;
        Some(NatTrans { components })
    };
    let untranspose = |psi: &NatTrans| -> NatTrans {
        let mut components: Vec<Vec<usize>> = (0..n).map(|u| vec![usize::MAX; dp.presheaf.size(u)]).collect();
        for (u, comp) in components.iter_mut().enumerate() {
            for v in 0..n {
                for x in 0..p.size(v) {
                    let alpha = &bq.maps[v][psi.at(v, x)];
                    for y in 0..r.size(v, u) {
                        comp[dp.class_of(u, v, x, y)] = alpha.at(u, y);
                    }
                }
            }
        }
        NatTrans { components }
    };

    let bdp = box2(r, &dp.presheaf)?;
    let eta = unit(r, p, &dp, &bdp);
    eta.check(p, &bdp.presheaf)?;
    let mut bijection = lhs.len() == rhs.len();
    let mut hit = vec![false; rhs.len()];
    for phi in &lhs {
        let Some(psi) = transpose(phi) else {
            bijection = false;
            break;
        };
        let Some(&i) = rhs_index.get(&psi) else {
            bijection = false;
            break;
        };
        bijection &= !std::mem::replace(&mut hit[i], true);
        bijection &= untranspose(&psi) == *phi;
        bijection &= eta.then(&box2_map(&bdp, &bq, phi)) == psi;
    }
    for psi in &rhs {
        let phi = untranspose(psi);
        bijection &= phi.check(&dp.presheaf, q).is_ok() && transpose(&phi).as_ref() == Some(psi);
    }

    // box(eps_Q) o eta_{box Q} = id and eps_{dia P} o dia(eta_P) = id.
    let dbq = dia2(r, &bq.presheaf)?;
    let eps_q = counit(r, &bq, &dbq);
    eps_q.check(&dbq.presheaf, q)?;
    let bdbq = box2(r, &dbq.presheaf)?;
    let eta_bq = unit(r, &bq.presheaf, &dbq, &bdbq);
    let first = eta_bq.then(&box2_map(&bdbq, &bq, &eps_q)) == NatTrans::identity(&bq.presheaf);
    let dbdp = dia2(r, &bdp.presheaf)?;
    let eps_dp = counit(r, &bdp, &dbdp);
    let d_eta = dia2_map(r, p, &dp, &dbdp, &eta);
    let second = d_eta.then(&eps_dp) == NatTrans::identity(&dp.presheaf);

    Ok(AdjunctionReport {
        left: lhs.len(),
        right: rhs.len(),
        bijection,
        triangles: first && second,
    })
}

/// A cocontinuous endofunctor on presheaves, given by its values on
/// representables: `values[c]` is the image of `y c` and `maps[h]` is the
/// image of `y h : y v -> y u` for `h : u -> v`.
#[derive(Clone, Debug)]
pub struct RepresentableImage {
    pub base: Arc<FinCategory>,
    pub values: Vec<Presheaf>,
    pub maps: Vec<NatTrans>,
}

impl RepresentableImage {
    pub fn identity(base: Arc<FinCategory>) -> Self {
        let values = (0..base.num_objects()).map(|c| Presheaf::yoneda(base.clone(), c)).collect();
        let maps = (0..base.num_arrows()).map(|h| yoneda_map(&base, h)).collect();
        RepresentableImage { base, values, maps }
    }

    pub fn empty(base: Arc<FinCategory>) -> Self {
        let values: Vec<Presheaf> = (0..base.num_objects()).map(|_| Presheaf::initial(base.clone())).collect();
        let maps = (0..base.num_arrows())
            .map(|_| NatTrans {
                components: vec![Vec::new(); base.num_objects()],
            })
            .collect();
        RepresentableImage { base, values, maps }
    }

    /// `dia_R` restricted to representables.
    pub fn of_dia2(r: &Profunctor) -> Result<Self> {
        let base = r.base().clone();
        let reps: Vec<Presheaf> = (0..base.num_objects()).map(|c| Presheaf::yoneda(base.clone(), c)).collect();
        let dias: Vec<Dia2> = reps.iter().map(|y| dia2(r, y)).collect::<Result<_>>()?;
        let maps = (0..base.num_arrows())
            .map(|h| {
                let (u, v) = (base.src(h), base.dst(h));
                dia2_map(r, &reps[v], &dias[v], &dias[u], &yoneda_map(&base, h))
            })
            .collect();
        Ok(RepresentableImage {
            values: dias.into_iter().map(|d| d.presheaf).collect(),
            maps,
            base,
        })
    }
}

/// `R(c1, c2) = (dia y c1)(c2)`.
pub fn profunctor_from_adjunction(image: &RepresentableImage) -> Result<Profunctor> {
    let c = image.base.clone();
    let n = c.num_objects();
    for h in 0..c.num_arrows() {
        image.maps[h].check(&image.values[c.dst(h)], &image.values[c.src(h)])?;
    }
    let labels = (0..n)
        .map(|w| (0..n).map(|v| image.values[w].labels(v).to_vec()).collect())
        .collect();
    Profunctor::new(
        c.clone(),
        labels,
        |h, v, x| image.maps[h].at(v, x),
        |k, w, x| image.values[w].act(k, x),
    )
}

/// Are two profunctors on the same base isomorphic?
pub fn profunctors_isomorphic(r: &Profunctor, s: &Profunctor) -> Result<bool> {
    Ok(crate::presheaf::isomorphism(r.as_presheaf(), s.as_presheaf())?.is_some())
}

/// A functor `f : C -> C'` with `alpha : R(c, v) -> S(f c, f v)` natural
/// in both slots, stored as a transformation `R -> (f^op x f)^* S`.
#[derive(Clone, Debug)]
pub struct ProfMorphism {
    pub f: FinFunctor,
    pub r: Profunctor,
    pub s: Profunctor,
    pub alpha: NatTrans,
}

impl ProfMorphism {
    pub fn new(f: FinFunctor, r: Profunctor, s: Profunctor, alpha: NatTrans) -> Result<Self> {
        check_endpoints(&f, &r, &s)?;
        let pulled = restrict(&f.op_product(), s.as_presheaf())?;
        alpha.check(r.as_presheaf(), &pulled)?;
        Ok(ProfMorphism { f, r, s, alpha })
    }

    pub fn identity(r: &Profunctor) -> Self {
        let f = FinFunctor::identity(r.base().clone());
        ProfMorphism {
            f,
            alpha: NatTrans::identity(r.as_presheaf()),
            r: r.clone(),
            s: r.clone(),
        }
    }

    /// `alpha_{c, v}(x)`, an element of `S(f c, f v)`.
    pub fn apply(&self, c: usize, v: usize, x: usize) -> usize {
        self.alpha.at(c * self.r.base().num_objects() + v, x)
    }

    /// Every `alpha` making `(f, R, S)` a morphism.
    pub fn enumerate(f: &FinFunctor, r: &Profunctor, s: &Profunctor) -> Result<Vec<ProfMorphism>> {
        check_endpoints(f, r, s)?;
        let pulled = restrict(&f.op_product(), s.as_presheaf())?;
        Ok(nat_transformations(r.as_presheaf(), &pulled)?
            .into_iter()
            .map(|alpha| ProfMorphism {
                f: f.clone(),
                r: r.clone(),
                s: s.clone(),
                alpha,
            })
            .collect())
    }
}

fn check_endpoints(f: &FinFunctor, r: &Profunctor, s: &Profunctor) -> Result<()> {
    if **f.source() != **r.base() || **f.target() != **s.base() {
        return Err(Error::BaseMismatch);
    }
    Ok(())
}

/// The comparison `t_alpha` at each `c`: `lan_f R(c, -) -> S(f c, -)`,
/// `[w, x, k] |-> S(id, k)(alpha(x))`.
#[derive(Clone, Debug)]
pub struct TAlpha {
    pub domains: Vec<LeftKan>,
    pub codomains: Vec<Presheaf>,
    pub components: Vec<NatTrans>,
    /// Every triple in a coend class is sent to the same element.
    pub well_defined: bool,
}

impl TAlpha {
    pub fn is_iso(&self) -> bool {
        self.well_defined
            && self
                .components
                .iter()
                .zip(&self.codomains)
                .all(|(t, cod)| t.is_componentwise_bijective(cod))
    }

    /// Every component is onto. On subsingleton profunctors over a poset
    /// this is the relational back condition; invertibility additionally
    /// asks the witnesses of each coend to be connected.
    pub fn is_surjective(&self) -> bool {
        self.well_defined
            && self.components.iter().zip(&self.codomains).all(|(t, cod)| {
                t.components.iter().enumerate().all(|(v, comp)| {
                    let mut hit = vec![false; cod.size(v)];
                    comp.iter().for_each(|&y| hit[y] = true);
                    hit.into_iter().all(|h| h)
                })
            })
    }
}

pub fn t_alpha(m: &ProfMorphism) -> Result<TAlpha> {
    t_alpha_over(m, t_alpha_domains(&m.f, &m.r)?)
}

/// The domains `lan_f R(c, -)`, one per object `c`.
pub fn t_alpha_domains(f: &FinFunctor, r: &Profunctor) -> Result<Vec<LeftKan>> {
    (0..f.source().num_objects()).map(|c| lan(f, &r.lambda(c)?)).collect()
}

/// [`t_alpha`] with precomputed [`t_alpha_domains`].
pub fn t_alpha_over(m: &ProfMorphism, lans: Vec<LeftKan>) -> Result<TAlpha> {
    let (cc, dd) = (m.f.source().clone(), m.f.target().clone());
    let mut domains = Vec::new();
    let mut codomains = Vec::new();
    let mut components = Vec::new();
    let mut well_defined = true;
    for (c, lr) in lans.into_iter().enumerate().take(cc.num_objects()) {
        let fc = m.f.on_object(c);
        let cod = m.s.lambda(fc)?;
        let mut comp: Vec<Vec<usize>> = (0..dd.num_objects()).map(|v| vec![usize::MAX; lr.presheaf.size(v)]).collect();
        for (v, cv) in comp.iter_mut().enumerate() {
            for w in 0..cc.num_objects() {
                for x in 0..m.r.size(c, w) {
                    let ax = m.apply(c, w, x);
                    for &k in dd.hom(m.f.on_object(w), v) {
                        let cls = lr.class_of(v, w, x, k);
                        let val = m.s.ract(k, fc, ax);
                        if cv[cls] != usize::MAX && cv[cls] != val {
                            well_defined = false;
                        }
                        cv[cls] = val;
                    }
                }
            }
        }
        let t = NatTrans { components: comp };
        well_defined &= t.check(&lr.presheaf, &cod).is_ok();
        domains.push(lr);
        codomains.push(cod);
        components.push(t);
    }
    Ok(TAlpha {
        domains,
        codomains,
        components,
        well_defined,
    })
}

pub fn is_modally_open2(m: &ProfMorphism) -> Result<bool> {
    Ok(t_alpha(m)?.is_iso())
}

/// `gamma_P : f^* box_S P -> box_R f^* P`,
/// `beta |-> (x in R(c, w) |-> beta_{f w}(alpha x))`.
#[derive(Clone, Debug)]
pub struct Gamma {
    pub lhs: Presheaf,
    pub rhs: Presheaf,
    pub box_s: Box2,
    pub box_r: Box2,
    pub map: NatTrans,
}

impl Gamma {
    pub fn is_iso(&self) -> bool {
        self.map.is_componentwise_bijective(&self.rhs)
    }
}

pub fn gamma(m: &ProfMorphism, p: &Presheaf) -> Result<Gamma> {
    let cc = m.f.source();
    let box_s = box2(&m.s, p)?;
    let lhs = restrict(&m.f, &box_s.presheaf)?;
    let fp = restrict(&m.f, p)?;
    let box_r = box2(&m.r, &fp)?;
    let n = cc.num_objects();
    let mut components = Vec::with_capacity(n);
    for c in 0..n {
        let fc = m.f.on_object(c);
        let mut comp = Vec::with_capacity(box_s.maps[fc].len());
        for beta in &box_s.maps[fc] {
            let t = NatTrans {
                components: (0..n)
                    .map(|w| (0..m.r.size(c, w)).map(|x| beta.at(m.f.on_object(w), m.apply(c, w, x))).collect())
                    .collect(),
            };
            comp.push(
                box_r
                    .element_index(c, &t)
                    .ok_or_else(|| Error::NaturalityViolation("gamma component is not natural".into()))?,
            );
        }
        components.push(comp);
    }
    let map = NatTrans { components };
    map.check(&lhs, &box_r.presheaf)?;
    Ok(Gamma {
        rhs: box_r.presheaf.clone(),
        lhs,
        box_s,
        box_r,
        map,
    })
}

/// Recovers `alpha` from `gamma` at the representables `S(f c, -)`:
/// `alpha_{c, w} = gamma(id)_w`.
pub fn alpha_from_gamma(m_f: &FinFunctor, r: &Profunctor, at_representables: &[Gamma]) -> NatTrans {
    let n = m_f.source().num_objects();
    let mut components = vec![Vec::new(); n * n];
    for c in 0..n {
        let g = &at_representables[c];
        let fc = m_f.on_object(c);
        let id = NatTrans::identity(&g.box_s.lambdas[fc]);
        let beta = g.box_s.element_index(fc, &id).expect("identity is natural");
        let alpha_c = &g.box_r.maps[c][g.map.at(c, beta)];
        for w in 0..n {
            components[c * n + w] = (0..r.size(c, w)).map(|x| alpha_c.at(w, x)).collect();
        }
    }
    NatTrans { components }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EndoprofReport {
    pub presheaves_checked: usize,
    pub gamma_natural: bool,
    /// `alpha |-> gamma |-> alpha` is the identity.
    pub roundtrip: bool,
}

impl EndoprofReport {
    pub fn holds(&self) -> bool {
        self.gamma_natural && self.roundtrip
    }
}

/// Builds `gamma` at every presheaf of `corpus` (and at the
/// representables `S(f c, -)`), then recovers `alpha` from it.
pub fn endoprof_bijection(m: &ProfMorphism, corpus: &[Presheaf]) -> Result<EndoprofReport> {
    let mut natural = true;
    for p in corpus {
        match gamma(m, p) {
            Ok(_) => {}
            Err(Error::NaturalityViolation(_)) => natural = false,
            Err(e) => return Err(e),
        }
    }
    let at_reps: Vec<Gamma> = (0..m.f.source().num_objects())
        .map(|c| gamma(m, &m.s.lambda(m.f.on_object(c))?))
        .collect::<Result<_>>()?;
    let back = alpha_from_gamma(&m.f, &m.r, &at_reps);
    Ok(EndoprofReport {
        presheaves_checked: corpus.len() + at_reps.len(),
        gamma_natural: natural,
        roundtrip: back == m.alpha,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GammaCount {
    pub families: usize,
    /// Each family equals the `gamma` of the `alpha` recovered from it.
    pub roundtrip: bool,
}

/// Counts the families `gamma_{c, P} : Hom(S(f c, -), P) -> Hom(R(c, -), f^* P)`
/// for `P` ranging over the representables `A_d = S(f d, -)`, natural in
/// `P` (for every transformation between them) and in `c`. Each family is
/// mapped back to an `alpha` and compared with the `gamma` it induces.
pub fn count_gamma_families(f: &FinFunctor, r: &Profunctor, s: &Profunctor) -> Result<GammaCount> {
    check_endpoints(f, r, s)?;
    let cc = f.source().clone();
    let n = cc.num_objects();
    let a: Vec<Presheaf> = (0..n).map(|d| s.lambda(f.on_object(d))).collect::<Result<_>>()?;
    let fa: Vec<Presheaf> = a.iter().map(|p| restrict(f, p)).collect::<Result<_>>()?;
    let lam_r: Vec<Presheaf> = (0..n).map(|c| r.lambda(c)).collect::<Result<_>>()?;
    // dom[c][d] = Hom(A_c, A_d); cod[c][d] = Hom(R(c, -), f^* A_d).
    let mut dom = vec![Vec::new(); n];
    let mut cod = vec![Vec::new(); n];
    for c in 0..n {
        for d in 0..n {
            dom[c].push(nat_transformations(&a[c], &a[d])?);
            cod[c].push(nat_transformations(&lam_r[c], &fa[d])?);
        }
    }
    let index = |ts: &[NatTrans]| -> HashMap<NatTrans, usize> { ts.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect() };
    let dom_idx: Vec<Vec<HashMap<NatTrans, usize>>> = dom.iter().map(|row| row.iter().map(|ts| index(ts)).collect()).collect();
    let cod_idx: Vec<Vec<HashMap<NatTrans, usize>>> = cod.iter().map(|row| row.iter().map(|ts| index(ts)).collect()).collect();
    let mut offset = vec![vec![0; n]; n];
    let mut domains = Vec::new();
    for c in 0..n {
        for d in 0..n {
            offset[c][d] = domains.len();
            domains.extend(std::iter::repeat(cod[c][d].len()).take(dom[c][d].len()));
        }
    }
    let mut search = crate::search::ForcingSearch::new(domains);
    // Naturality in P.
    for d in 0..n {
        for d2 in 0..n {
            for t in &dom[d][d2] {
                let ft = restrict_map(f, t);
                for c in 0..n {
                    let map: Vec<usize> = cod[c][d].iter().map(|x| cod_idx[c][d2][&x.then(&ft)]).collect();
                    for (bi, beta) in dom[c][d].iter().enumerate() {
                        let target = dom_idx[c][d2][&beta.then(t)];
                        search.force(offset[c][d] + bi, offset[c][d2] + target, map.clone());
                    }
                }
            }
        }
    }
    // Naturality in c, for h : c' -> c.
    for h in 0..cc.num_arrows() {
        if cc.is_identity(h) {
            continue;
        }
        let (c1, c2) = (cc.src(h), cc.dst(h));
        let ls = s.lact_nat(f.on_arrow(h));
        let lr = r.lact_nat(h);
        for d in 0..n {
            let map: Vec<usize> = cod[c1][d].iter().map(|x| cod_idx[c2][d][&lr.then(x)]).collect();
            for (bi, beta) in dom[c1][d].iter().enumerate() {
                let target = dom_idx[c2][d][&ls.then(beta)];
                search.force(offset[c1][d] + bi, offset[c2][d] + target, map.clone());
            }
        }
    }
    let mut families = 0usize;
    let mut roundtrip = true;
    search.run(|assign| {
        families += 1;
        let mut components = vec![Vec::new(); n * n];
        for c in 0..n {
            let id = dom_idx[c][c][&NatTrans::identity(&a[c])];
            let alpha_c = &cod[c][c][assign[offset[c][c] + id]];
            for w in 0..n {
                components[c * n + w] = alpha_c.components[w].clone();
            }
        }
        let alpha = NatTrans { components };
        let Ok(m) = ProfMorphism::new(f.clone(), r.clone(), s.clone(), alpha) else {
            roundtrip = false;
            return true;
        };
        for c in 0..n {
            for d in 0..n {
                for (bi, beta) in dom[c][d].iter().enumerate() {
                    let t = NatTrans {
                        components: (0..n)
                            .map(|w| (0..r.size(c, w)).map(|x| beta.at(f.on_object(w), m.apply(c, w, x))).collect())
                            .collect(),
                    };
                    roundtrip &= cod_idx[c][d].get(&t) == Some(&assign[offset[c][d] + bi]);
                }
            }
        }
        true
    });
    Ok(GammaCount { families, roundtrip })
}

/// `gamma` is invertible at every presheaf of a family that detects
/// invertibility of `t_alpha`: the codomains `S(f c, -)`, the domains
/// `lan_f R(c, -)`, and the cokernel pairs of the components of `t_alpha`.
pub fn gamma_is_iso(m: &ProfMorphism) -> Result<bool> {
    let t = t_alpha(m)?;
    let mut family = Vec::new();
    for c in 0..t.components.len() {
        let dom = &t.domains[c].presheaf;
        let cod = &t.codomains[c];
        let (cok, _, _) = pushout(dom, cod, cod, &t.components[c], &t.components[c])?;
        family.push(cod.clone());
        family.push(dom.clone());
        family.push(cok);
    }
    for p in &family {
        if !gamma(m, p)?.is_iso() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The poset category functor of a monotone map.
pub fn poset_functor(f: &MonotoneMap) -> FinFunctor {
    let s = Arc::new(FinCategory::from_poset(f.source()));
    let t = Arc::new(FinCategory::from_poset(f.target()));
    poset_functor_between(f, s, t)
}

/// As [`poset_functor`], over already-built poset categories.
pub fn poset_functor_between(f: &MonotoneMap, s: Arc<FinCategory>, t: Arc<FinCategory>) -> FinFunctor {
    let obj: Vec<usize> = (0..s.num_objects()).map(|o| f.apply(o)).collect();
    let arr = (0..s.num_arrows())
        .map(|a| t.hom(obj[s.src(a)], obj[s.dst(a)])[0])
        .collect();
    FinFunctor::new(s, t, obj, arr).expect("monotone maps are functors")
}

/// The unique morphism of subsingleton profunctors over a bimodule
/// morphism, or `None` if `f` does not map `R` into `R'`.
pub fn prof_morphism_of_bimodules(f: &MonotoneMap, r: &Bimodule, r2: &Bimodule) -> Result<Option<ProfMorphism>> {
    if !is_bimodule_morphism(f, r, r2)? {
        return Ok(None);
    }
    let func = poset_functor(f);
    let pr = Profunctor::from_bimodule(func.source().clone(), r)?;
    let ps = Profunctor::from_bimodule(func.target().clone(), r2)?;
    let alpha = NatTrans {
        components: (0..pr.as_presheaf().base().num_objects())
            .map(|i| vec![0; pr.as_presheaf().size(i)])
            .collect(),
    };
    ProfMorphism::new(func, pr, ps, alpha).map(Some)
}

/// [`prof_morphism_of_bimodules`] with the functor and the subsingleton
/// profunctors supplied by the caller.
pub fn prof_morphism_of_subsingletons(
    f: &MonotoneMap,
    r: &Bimodule,
    r2: &Bimodule,
    func: &FinFunctor,
    pr: &Profunctor,
    ps: &Profunctor,
) -> Result<Option<ProfMorphism>> {
    if !is_bimodule_morphism(f, r, r2)? {
        return Ok(None);
    }
    check_endpoints(func, pr, ps)?;
    let alpha = NatTrans {
        components: (0..pr.as_presheaf().base().num_objects())
            .map(|i| vec![0; pr.as_presheaf().size(i)])
            .collect(),
    };
    Ok(Some(ProfMorphism {
        f: func.clone(),
        r: pr.clone(),
        s: ps.clone(),
        alpha,
    }))
}

/// A presheaf model of the modal language: a Cauchy-complete base, an
/// optional endoprofunctor, and a presheaf per variable.
#[derive(Clone, Debug)]
pub struct TwoDimModel {
    base: Arc<FinCategory>,
    rel: Option<Profunctor>,
    valuation: BTreeMap<String, Presheaf>,
}

impl TwoDimModel {
    pub fn new(base: Arc<FinCategory>, rel: Option<Profunctor>, valuation: BTreeMap<String, Presheaf>) -> Result<Self> {
        if !base.is_cauchy_complete() {
            return Err(Error::BaseNotCauchyComplete);
        }
        if let Some(r) = &rel {
            if **r.base() != *base {
                return Err(Error::BaseMismatch);
            }
        }
        for p in valuation.values() {
            if **p.base() != *base {
                return Err(Error::BaseMismatch);
            }
            p.check()?;
        }
        Ok(TwoDimModel { base, rel, valuation })
    }

    /// The 0/1 model over the poset category of a Kripke model.
    pub fn from_kripke(m: &KripkeModel) -> Result<Self> {
        let base = Arc::new(FinCategory::from_poset(m.frame()));
        let rel = m.rel().map(|r| Profunctor::from_bimodule(base.clone(), r)).transpose()?;
        let valuation = m
            .valuation()
            .iter()
            .map(|(k, &mask)| Ok((k.clone(), upset_presheaf(&base, mask)?)))
            .collect::<Result<_>>()?;
        Self::new(base, rel, valuation)
    }

    pub fn base(&self) -> &Arc<FinCategory> {
        &self.base
    }

    pub fn rel(&self) -> Option<&Profunctor> {
        self.rel.as_ref()
    }

    pub fn valuation(&self) -> &BTreeMap<String, Presheaf> {
        &self.valuation
    }
}

/// The subsingleton presheaf on a poset category supported on `mask`.
pub fn upset_presheaf(base: &Arc<FinCategory>, mask: Mask) -> Result<Presheaf> {
    let support: Vec<bool> = (0..base.num_objects()).map(|o| mask >> o & 1 == 1).collect();
    Presheaf::indicator(base.clone(), &support)
}

/// Objects where `p` is inhabited, as a mask.
pub fn support_mask(p: &Presheaf) -> Mask {
    p.support()
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .fold(0, |acc, (i, _)| acc | 1 << i)
}

/// The presheaf of proofs of `phi`.
pub fn interpret2d(m: &TwoDimModel, phi: &Formula) -> Result<Presheaf> {
    if let Some(v) = phi.vars().into_iter().find(|v| !m.valuation.contains_key(v)) {
        return Err(Error::UnknownVariable(v));
    }
    if phi.is_modal() && m.rel.is_none() {
        return Err(Error::NoAccessibilityRelation);
    }
    interp(m, phi)
}

fn interp(m: &TwoDimModel, phi: &Formula) -> Result<Presheaf> {
    Ok(match phi {
        Formula::Bottom => Presheaf::initial(m.base.clone()),
        Formula::Top => Presheaf::terminal(m.base.clone()),
        Formula::Var(p) => m.valuation[p].clone(),
        Formula::And(a, b) => product(&interp(m, a)?, &interp(m, b)?)?.presheaf,
        Formula::Or(a, b) => coproduct(&interp(m, a)?, &interp(m, b)?)?.presheaf,
        Formula::Imp(a, b) => exponential(&interp(m, a)?, &interp(m, b)?)?.presheaf,
        Formula::Box(a) => box2(m.rel.as_ref().expect("checked"), &interp(m, a)?)?.presheaf,
        Formula::DiaBlack(a) => dia2(m.rel.as_ref().expect("checked"), &interp(m, a)?)?.presheaf,
    })
}

/// The proofs of `phi` at world `w`, by label.
pub fn proofs(m: &TwoDimModel, phi: &Formula, w: &str) -> Result<Vec<String>> {
    let wi = m.base.object(w).map_err(|_| Error::UnknownWorld(w.to_string()))?;
    Ok(interpret2d(m, phi)?.labels(wi).to_vec())
}
