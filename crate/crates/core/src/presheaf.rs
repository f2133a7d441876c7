//! Covariant set-valued functors `C -> Set` on a finite category, natural
//! transformations between them, and the constructions of the presheaf
//! topos: (co)limits, exponentials, elements, Kan extensions.
//!
//! Value sets are index ranges `0..size`; string labels are kept alongside
//! for reporting only.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::category::{Arrow, FinCategory, FinFunctor};
use crate::error::{Error, Result};
use crate::search::ForcingSearch;

/// Upper bound on the number of transformations any single enumeration may
/// produce before it reports [`Error::SizeCapExceeded`].
pub const ENUM_LIMIT: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presheaf {
    base: Arc<FinCategory>,
    labels: Vec<Vec<String>>,
    /// `act[a][x]` is `a . x` for `x` in the value set at `src(a)`.
    act: Vec<Vec<usize>>,
}

/// On-disk presheaf. Identity arrows may be left out of `act`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresheafFile {
    pub at: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub act: BTreeMap<String, BTreeMap<String, String>>,
}

impl Presheaf {
    /// Validates sizes and the functor laws `id . x = x`,
    /// `(g o f) . x = g . (f . x)`.
    pub fn new(base: Arc<FinCategory>, labels: Vec<Vec<String>>, act: Vec<Vec<usize>>) -> Result<Self> {
        let p = Presheaf { base, labels, act };
        p.check()?;
        Ok(p)
    }

    pub(crate) fn new_unchecked(base: Arc<FinCategory>, labels: Vec<Vec<String>>, act: Vec<Vec<usize>>) -> Self {
        let p = Presheaf { base, labels, act };
        debug_assert!(p.check().is_ok(), "{:?}", p.check());
        p
    }

    pub fn check(&self) -> Result<()> {
        let c = &*self.base;
        if self.labels.len() != c.num_objects() || self.act.len() != c.num_arrows() {
            return Err(Error::FunctorLawViolation("value sets or actions missing".into()));
        }
        for a in 0..c.num_arrows() {
            let (s, d) = (c.src(a), c.dst(a));
            if self.act[a].len() != self.size(s) || self.act[a].iter().any(|&y| y >= self.size(d)) {
                return Err(Error::FunctorLawViolation(format!(
                    "action of {} is not a function between the value sets",
                    c.arrow_name(a)
                )));
            }
        }
        for o in 0..c.num_objects() {
            let id = c.id(o);
            if self.act[id].iter().enumerate().any(|(x, &y)| x != y) {
                return Err(Error::FunctorLawViolation(format!("{} does not act as identity", c.arrow_name(id))));
            }
        }
        for f in 0..c.num_arrows() {
            for g in c.arrows_from(c.dst(f)) {
                let gf = c.comp(g, f);
                for x in 0..self.size(c.src(f)) {
                    if self.act[gf][x] != self.act[g][self.act[f][x]] {
                        return Err(Error::FunctorLawViolation(format!(
                            "({} o {}) . {} differs from {} . ({} . {})",
                            c.arrow_name(g),
                            c.arrow_name(f),
                            self.labels[c.src(f)][x],
                            c.arrow_name(g),
                            c.arrow_name(f),
                            self.labels[c.src(f)][x]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_file(base: Arc<FinCategory>, file: &PresheafFile) -> Result<Self> {
        let c = &*base;
        let mut labels = vec![Vec::new(); c.num_objects()];
        for (o, ls) in &file.at {
            labels[c.object(o)?] = ls.clone();
        }
        let mut act: Vec<Vec<usize>> = (0..c.num_arrows())
            .map(|a| vec![usize::MAX; labels[c.src(a)].len()])
            .collect();
        for o in 0..c.num_objects() {
            act[c.id(o)] = (0..labels[o].len()).collect();
        }
        for (a, table) in &file.act {
            let ai = c.arrow(a)?;
            let (s, d) = (c.src(ai), c.dst(ai));
            for (x, y) in table {
                let xi = position(&labels[s], x)?;
                let yi = position(&labels[d], y)?;
                act[ai][xi] = yi;
            }
        }
        for a in 0..c.num_arrows() {
            if let Some(x) = act[a].iter().position(|&y| y == usize::MAX) {
                return Err(Error::FunctorLawViolation(format!(
                    "action of {} on {} is missing",
                    c.arrow_name(a),
                    labels[c.src(a)][x]
                )));
            }
        }
        Self::new(base, labels, act)
    }

    pub fn to_file(&self) -> PresheafFile {
        let c = &*self.base;
        let at = (0..c.num_objects())
            .map(|o| (c.object_name(o).to_string(), self.labels[o].clone()))
            .collect();
        let act = (0..c.num_arrows())
            .filter(|&a| !c.is_identity(a))
            .map(|a| {
                let table = self.act[a]
                    .iter()
                    .enumerate()
                    .map(|(x, &y)| (self.labels[c.src(a)][x].clone(), self.labels[c.dst(a)][y].clone()))
                    .collect();
                (c.arrow_name(a).to_string(), table)
            })
            .collect();
        PresheafFile { at, act }
    }

    pub fn base(&self) -> &Arc<FinCategory> {
        &self.base
    }

    pub fn size(&self, o: usize) -> usize {
        self.labels[o].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.labels.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.labels.iter().map(Vec::len).sum()
    }

    pub fn labels(&self, o: usize) -> &[String] {
        &self.labels[o]
    }

    pub fn label(&self, o: usize, x: usize) -> &str {
        &self.labels[o][x]
    }

    /// `a . x`.
    pub fn act(&self, a: usize, x: usize) -> usize {
        self.act[a][x]
    }

    pub fn same_base(&self, other: &Presheaf) -> bool {
        Arc::ptr_eq(&self.base, &other.base) || *self.base == *other.base
    }

    fn require_same_base(&self, other: &Presheaf) -> Result<()> {
        if self.same_base(other) {
            Ok(())
        } else {
            Err(Error::BaseMismatch)
        }
    }

    /// Objects where the presheaf is inhabited.
    pub fn support(&self) -> Vec<bool> {
        self.labels.iter().map(|l| !l.is_empty()).collect()
    }

    pub fn terminal(base: Arc<FinCategory>) -> Self {
        let labels = vec![vec!["*".to_string()]; base.num_objects()];
        let act = vec![vec![0]; base.num_arrows()];
        Presheaf { base, labels, act }
    }

    pub fn initial(base: Arc<FinCategory>) -> Self {
        let labels = vec![Vec::new(); base.num_objects()];
        let act = vec![Vec::new(); base.num_arrows()];
        Presheaf { base, labels, act }
    }

    /// A subsingleton presheaf inhabited exactly on `support`, which must be
    /// closed under the arrows of the base.
    pub fn indicator(base: Arc<FinCategory>, support: &[bool]) -> Result<Self> {
        let labels = support
            .iter()
            .map(|&s| if s { vec!["*".to_string()] } else { Vec::new() })
            .collect();
        let act = (0..base.num_arrows())
            .map(|a| if support[base.src(a)] { vec![0] } else { Vec::new() })
            .collect();
        Self::new(base, labels, act)
    }

    /// The representable `Hom(w, -)`, with elements labelled by arrow name.
    pub fn yoneda(base: Arc<FinCategory>, w: usize) -> Self {
        let c = &*base;
        let labels = (0..c.num_objects())
            .map(|u| c.hom(w, u).iter().map(|&g| c.arrow_name(g).to_string()).collect())
            .collect();
        let act = (0..c.num_arrows())
            .map(|a| {
                c.hom(w, c.src(a))
                    .iter()
                    .map(|&g| hom_position(c, c.comp(a, g)))
                    .collect()
            })
            .collect();
        Presheaf { base, labels, act }
    }
}

/// `y h : y v -> y u` for `h : u -> v`, by precomposition.
pub fn yoneda_map(c: &FinCategory, h: usize) -> NatTrans {
    let v = c.dst(h);
    NatTrans {
        components: (0..c.num_objects())
            .map(|o| c.hom(v, o).iter().map(|&g| hom_position(c, c.comp(g, h))).collect())
            .collect(),
    }
}

fn position(labels: &[String], x: &str) -> Result<usize> {
    labels
        .iter()
        .position(|l| l == x)
        .ok_or_else(|| Error::UnknownElement(x.to_string()))
}

/// Index of `a` within `hom(src a, dst a)`.
pub(crate) fn hom_position(c: &FinCategory, a: usize) -> usize {
    c.hom(c.src(a), c.dst(a))
        .iter()
        .position(|&b| b == a)
        .expect("arrow lies in its hom-set")
}

pub fn check_presheaf(p: &Presheaf) -> Result<()> {
    p.check()
}

/// A family of component functions `P(o) -> Q(o)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NatTrans {
    pub components: Vec<Vec<usize>>,
}

impl NatTrans {
    pub fn identity(p: &Presheaf) -> Self {
        NatTrans {
            components: p.sizes().into_iter().map(|n| (0..n).collect()).collect(),
        }
    }

    pub fn at(&self, o: usize, x: usize) -> usize {
        self.components[o][x]
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &NatTrans) -> NatTrans {
        NatTrans {
            components: self
                .components
                .iter()
                .zip(&next.components)
                .map(|(a, b)| a.iter().map(|&x| b[x]).collect())
                .collect(),
        }
    }

    pub fn is_componentwise_bijective(&self, codomain: &Presheaf) -> bool {
        self.components.iter().enumerate().all(|(o, comp)| {
            if comp.len() != codomain.size(o) {
                return false;
            }
            let mut hit = vec![false; comp.len()];
            comp.iter().all(|&y| !std::mem::replace(&mut hit[y], true))
        })
    }

    /// Checks every naturality square `Q(a)(alpha(x)) = alpha(P(a)(x))`.
    pub fn check(&self, p: &Presheaf, q: &Presheaf) -> Result<()> {
        p.require_same_base(q)?;
        let c = &**p.base();
        if self.components.len() != c.num_objects() {
            return Err(Error::NaturalityViolation("component missing".into()));
        }
        for o in 0..c.num_objects() {
            if self.components[o].len() != p.size(o) || self.components[o].iter().any(|&y| y >= q.size(o)) {
                return Err(Error::NaturalityViolation(format!("component at {} is not a function", c.object_name(o))));
            }
        }
        for a in 0..c.num_arrows() {
            for x in 0..p.size(c.src(a)) {
                if q.act(a, self.at(c.src(a), x)) != self.at(c.dst(a), p.act(a, x)) {
                    return Err(Error::NaturalityViolation(format!(
                        "square for {} fails at {}",
                        c.arrow_name(a),
                        p.label(c.src(a), x)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn describe(&self, p: &Presheaf, q: &Presheaf) -> String {
        let c = &**p.base();
        let parts: Vec<String> = (0..c.num_objects())
            .filter(|&o| p.size(o) > 0)
            .map(|o| {
                let maps: Vec<String> = (0..p.size(o))
                    .map(|x| format!("{}->{}", p.label(o, x), q.label(o, self.at(o, x))))
                    .collect();
                format!("{}:{}", c.object_name(o), maps.join(","))
            })
            .collect();
        format!("<{}>", parts.join(";"))
    }
}

/// Streams every natural transformation `p -> q`; returns `false` if
/// `visit` stopped the enumeration.
pub fn for_each_nat_trans(p: &Presheaf, q: &Presheaf, mut visit: impl FnMut(NatTrans) -> bool) -> Result<bool> {
    p.require_same_base(q)?;
    let c = &**p.base();
    let mut offset = Vec::with_capacity(c.num_objects());
    let mut domains = Vec::new();
    for o in 0..c.num_objects() {
        offset.push(domains.len());
        domains.extend(std::iter::repeat(q.size(o)).take(p.size(o)));
    }
    let mut search = ForcingSearch::new(domains);
    for a in 0..c.num_arrows() {
        if c.is_identity(a) {
            continue;
        }
        let (s, d) = (c.src(a), c.dst(a));
        for x in 0..p.size(s) {
            search.force(offset[s] + x, offset[d] + p.act(a, x), q.act[a].clone());
        }
    }
    Ok(search.run(|assign| {
        let components = (0..c.num_objects())
            .map(|o| assign[offset[o]..offset[o] + p.size(o)].to_vec())
            .collect();
        visit(NatTrans { components })
    }))
}

pub fn nat_transformations(p: &Presheaf, q: &Presheaf) -> Result<Vec<NatTrans>> {
    let mut out = Vec::new();
    let finished = for_each_nat_trans(p, q, |t| {
        out.push(t);
        out.len() <= ENUM_LIMIT
    })?;
    if !finished {
        return Err(Error::cap("natural transformations", out.len(), ENUM_LIMIT));
    }
    Ok(out)
}

pub fn count_nat_trans(p: &Presheaf, q: &Presheaf) -> Result<usize> {
    let mut n = 0usize;
    let finished = for_each_nat_trans(p, q, |_| {
        n += 1;
        n <= ENUM_LIMIT
    })?;
    if !finished {
        return Err(Error::cap("natural transformations", n, ENUM_LIMIT));
    }
    Ok(n)
}

/// A natural isomorphism `p -> q`, if there is one.
pub fn isomorphism(p: &Presheaf, q: &Presheaf) -> Result<Option<NatTrans>> {
    p.require_same_base(q)?;
    if p.sizes() != q.sizes() {
        return Ok(None);
    }
    let mut found = None;
    for_each_nat_trans(p, q, |t| {
        if t.is_componentwise_bijective(q) {
            found = Some(t);
            false
        } else {
            true
        }
    })?;
    Ok(found)
}

/// The two mutually inverse maps between `Hom(y w, P)` and `P(w)`.
#[derive(Clone, Debug)]
pub struct YonedaBijection {
    pub transformations: Vec<NatTrans>,
    /// `alpha |-> alpha_w(id_w)`.
    pub to_element: Vec<usize>,
    /// `x |-> (g |-> g . x)`, as an index into `transformations`.
    pub from_element: Vec<usize>,
}

pub fn yoneda_bijection(p: &Presheaf, w: usize) -> Result<YonedaBijection> {
    let c = p.base().clone();
    if w >= c.num_objects() {
        return Err(Error::UnknownObject(format!("#{w}")));
    }
    let yw = Presheaf::yoneda(c.clone(), w);
    let transformations = nat_transformations(&yw, p)?;
    let id_pos = hom_position(&c, c.id(w));
    let to_element: Vec<usize> = transformations.iter().map(|t| t.at(w, id_pos)).collect();
    let index: HashMap<&NatTrans, usize> = transformations.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut from_element = Vec::with_capacity(p.size(w));
    for x in 0..p.size(w) {
        let components = (0..c.num_objects())
            .map(|u| c.hom(w, u).iter().map(|&g| p.act(g, x)).collect())
            .collect();
        let t = NatTrans { components };
        let i = *index
            .get(&t)
            .ok_or_else(|| Error::Invalid("element does not induce a transformation".into()))?;
        from_element.push(i);
    }
    let inverse = from_element.iter().enumerate().all(|(x, &i)| to_element[i] == x)
        && to_element.iter().enumerate().all(|(i, &x)| from_element[x] == i);
    if !inverse {
        return Err(Error::Invalid("Yoneda maps are not mutually inverse".into()));
    }
    Ok(YonedaBijection {
        transformations,
        to_element,
        from_element,
    })
}

/// `P x Q` with projections; the pair `(x, y)` at `o` has index
/// `x * |Q(o)| + y`.
#[derive(Clone, Debug)]
pub struct Product {
    pub presheaf: Presheaf,
    pub fst: NatTrans,
    pub snd: NatTrans,
}

pub fn product(p: &Presheaf, q: &Presheaf) -> Result<Product> {
    p.require_same_base(q)?;
    let c = p.base().clone();
    let labels = (0..c.num_objects())
        .map(|o| {
            let mut out = Vec::with_capacity(p.size(o) * q.size(o));
            for x in p.labels(o) {
                for y in q.labels(o) {
                    out.push(format!("({x},{y})"));
                }
            }
            out
        })
        .collect();
    let act = (0..c.num_arrows())
        .map(|a| {
            let (s, d) = (c.src(a), c.dst(a));
            let mut out = Vec::with_capacity(p.size(s) * q.size(s));
            for x in 0..p.size(s) {
                for y in 0..q.size(s) {
                    out.push(p.act(a, x) * q.size(d) + q.act(a, y));
                }
            }
            out
        })
        .collect();
    let fst = NatTrans {
        components: (0..c.num_objects())
            .map(|o| (0..p.size(o) * q.size(o)).map(|i| i / q.size(o)).collect())
            .collect(),
    };
    let snd = NatTrans {
        components: (0..c.num_objects())
            .map(|o| (0..p.size(o) * q.size(o)).map(|i| i % q.size(o)).collect())
            .collect(),
    };
    Ok(Product {
        presheaf: Presheaf::new_unchecked(c, labels, act),
        fst,
        snd,
    })
}

/// `P x Q -> P' x Q'` induced by a pair of transformations.
pub fn product_map(src: &Product, dst: &Product, f: &NatTrans, g: &NatTrans) -> NatTrans {
    let components = (0..f.components.len())
        .map(|o| {
            let width = dst.snd.components[o].iter().max().map_or(1, |m| m + 1);
            (0..src.presheaf.size(o))
                .map(|i| f.at(o, src.fst.at(o, i)) * width + g.at(o, src.snd.at(o, i)))
                .collect()
        })
        .collect();
    NatTrans { components }
}

/// The coproduct of a family, with injections; element `x` of summand `k`
/// at `o` has index `offset[k][o] + x`.
#[derive(Clone, Debug)]
pub struct Coproduct {
    pub presheaf: Presheaf,
    pub injections: Vec<NatTrans>,
    pub offsets: Vec<Vec<usize>>,
}

pub fn coproduct_all(base: &Arc<FinCategory>, summands: &[&Presheaf]) -> Result<Coproduct> {
    for s in summands {
        if !(Arc::ptr_eq(s.base(), base) || **s.base() == **base) {
            return Err(Error::BaseMismatch);
        }
    }
    let c = &**base;
    let no = c.num_objects();
    let mut offsets = vec![vec![0; no]; summands.len()];
    let mut labels = vec![Vec::new(); no];
    for o in 0..no {
        for (k, s) in summands.iter().enumerate() {
            offsets[k][o] = labels[o].len();
            let tag = if summands.len() == 2 {
                if k == 0 { "inl".to_string() } else { "inr".to_string() }
            } else {
                format!("in{k}")
            };
            labels[o].extend(s.labels(o).iter().map(|x| format!("{tag}:{x}")));
        }
    }
    let act = (0..c.num_arrows())
        .map(|a| {
            let (sr, d) = (c.src(a), c.dst(a));
            let mut out = Vec::new();
            for (k, s) in summands.iter().enumerate() {
                out.extend((0..s.size(sr)).map(|x| offsets[k][d] + s.act(a, x)));
            }
            out
        })
        .collect();
    let injections = summands
        .iter()
        .enumerate()
        .map(|(k, s)| NatTrans {
            components: (0..no).map(|o| (0..s.size(o)).map(|x| offsets[k][o] + x).collect()).collect(),
        })
        .collect();
    Ok(Coproduct {
        presheaf: Presheaf::new_unchecked(base.clone(), labels, act),
        injections,
        offsets,
    })
}

pub fn coproduct(p: &Presheaf, q: &Presheaf) -> Result<Coproduct> {
    p.require_same_base(q)?;
    coproduct_all(p.base(), &[p, q])
}

/// The sub-presheaf of `P` where `alpha` and `beta` agree, with inclusion.
pub fn equalizer(p: &Presheaf, q: &Presheaf, alpha: &NatTrans, beta: &NatTrans) -> Result<(Presheaf, NatTrans)> {
    p.require_same_base(q)?;
    alpha.check(p, q)?;
    beta.check(p, q)?;
    let c = p.base().clone();
    let keep: Vec<Vec<usize>> = (0..c.num_objects())
        .map(|o| (0..p.size(o)).filter(|&x| alpha.at(o, x) == beta.at(o, x)).collect())
        .collect();
    let labels = keep
        .iter()
        .enumerate()
        .map(|(o, ks)| ks.iter().map(|&x| p.label(o, x).to_string()).collect())
        .collect();
    let act = (0..c.num_arrows())
        .map(|a| {
            keep[c.src(a)]
                .iter()
                .map(|&x| {
                    let y = p.act(a, x);
                    keep[c.dst(a)].binary_search(&y).expect("equalizer is closed under the action")
                })
                .collect()
        })
        .collect();
    Ok((Presheaf::new_unchecked(c, labels, act), NatTrans { components: keep }))
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    /// Keeps the smaller index as representative.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    /// Dense class numbers, ordered by least member.
    pub(crate) fn classes(&mut self) -> (Vec<usize>, Vec<usize>) {
        let n = self.parent.len();
        let mut class_of = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for x in 0..n {
            let r = self.find(x);
            if class_of[r] == usize::MAX {
                class_of[r] = reps.len();
                reps.push(r);
            }
            class_of[x] = class_of[r];
        }
        (class_of, reps)
    }
}

/// Quotient of `q` by the least congruence containing `pairs` (given per
/// object), together with the quotient map.
pub fn quotient(q: &Presheaf, pairs: &[(usize, usize, usize)]) -> (Presheaf, NatTrans) {
    let c = q.base().clone();
    let no = c.num_objects();
    let mut uf: Vec<UnionFind> = (0..no).map(|o| UnionFind::new(q.size(o))).collect();
    let mut pending: Vec<(usize, usize, usize)> = pairs.to_vec();
    while let Some((o, x, y)) = pending.pop() {
        if uf[o].union(x, y) {
            for a in c.arrows_from(o) {
                if !c.is_identity(a) {
                    pending.push((c.dst(a), q.act(a, x), q.act(a, y)));
                }
            }
        }
    }
    let mut class_of = Vec::with_capacity(no);
    let mut labels = Vec::with_capacity(no);
    for (o, u) in uf.iter_mut().enumerate() {
        let (cls, reps) = u.classes();
        labels.push(reps.iter().map(|&r| format!("[{}]", q.label(o, r))).collect::<Vec<_>>());
        class_of.push(cls);
    }
    let act = (0..c.num_arrows())
        .map(|a| {
            let (s, d) = (c.src(a), c.dst(a));
            let n = labels[s].len();
            let mut out = vec![0; n];
            for x in 0..q.size(s) {
                out[class_of[s][x]] = class_of[d][q.act(a, x)];
            }
            out
        })
        .collect();
    (
        Presheaf::new_unchecked(c, labels, act),
        NatTrans { components: class_of },
    )
}

/// Quotient of `Q` identifying `alpha(x)` with `beta(x)`.
pub fn coequalizer(p: &Presheaf, q: &Presheaf, alpha: &NatTrans, beta: &NatTrans) -> Result<(Presheaf, NatTrans)> {
    p.require_same_base(q)?;
    alpha.check(p, q)?;
    beta.check(p, q)?;
    let pairs: Vec<(usize, usize, usize)> = (0..p.base().num_objects())
        .flat_map(|o| (0..p.size(o)).map(move |x| (o, alpha.at(o, x), beta.at(o, x))))
        .collect();
    Ok(quotient(q, &pairs))
}

/// The pushout of `f : A -> B` and `g : A -> C`, with its two legs.
pub fn pushout(a: &Presheaf, b: &Presheaf, c: &Presheaf, f: &NatTrans, g: &NatTrans) -> Result<(Presheaf, NatTrans, NatTrans)> {
    let sum = coproduct(b, c)?;
    let (quot, q) = coequalizer(a, &sum.presheaf, &f.then(&sum.injections[0]), &g.then(&sum.injections[1]))?;
    let left = sum.injections[0].then(&q);
    let right = sum.injections[1].then(&q);
    Ok((quot, left, right))
}

/// `P => Q` with `(P => Q)(w) = Hom(P x y w, Q)`, keeping the enumerated
/// transformations so that elements can be applied.
#[derive(Clone, Debug)]
pub struct Exponential {
    pub presheaf: Presheaf,
    /// `P x y w` for each `w`.
    pub domains: Vec<Product>,
    /// `maps[w][i]` is the transformation behind element `i` at `w`.
    pub maps: Vec<Vec<NatTrans>>,
    index: Vec<HashMap<NatTrans, usize>>,
}

impl Exponential {
    pub fn element_index(&self, w: usize, t: &NatTrans) -> Option<usize> {
        self.index[w].get(t).copied()
    }

    /// Applies element `theta` at `w` to `x` in `P(w)`: `theta_w(x, id_w)`.
    pub fn eval(&self, w: usize, theta: usize, x: usize) -> usize {
        let c = self.presheaf.base();
        let yw_size = c.hom(w, w).len();
        let id = hom_position(c, c.id(w));
        self.maps[w][theta].at(w, x * yw_size + id)
    }
}

pub fn exponential(p: &Presheaf, q: &Presheaf) -> Result<Exponential> {
    p.require_same_base(q)?;
    let c = p.base().clone();
    let no = c.num_objects();
    let mut domains = Vec::with_capacity(no);
    let mut maps = Vec::with_capacity(no);
    let mut index = Vec::with_capacity(no);
    for w in 0..no {
        let yw = Presheaf::yoneda(c.clone(), w);
        let dom = product(p, &yw)?;
        let ts = nat_transformations(&dom.presheaf, q)?;
        index.push(ts.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect::<HashMap<_, _>>());
        maps.push(ts);
        domains.push(dom);
    }
    let mut act = Vec::with_capacity(c.num_arrows());
    for a in 0..c.num_arrows() {
        let (w, v) = (c.src(a), c.dst(a));
        let mut table = Vec::with_capacity(maps[w].len());
        for theta in &maps[w] {
            // theta'_u(x, g) = theta_u(x, g o a) for g : v -> u.
            let components = (0..no)
                .map(|u| {
                    let hv = c.hom(v, u);
                    let hw_len = c.hom(w, u).len();
                    let mut comp = Vec::with_capacity(p.size(u) * hv.len());
                    for x in 0..p.size(u) {
                        for &g in hv {
                            let ga = hom_position(&c, c.comp(g, a));
                            comp.push(theta.at(u, x * hw_len + ga));
                        }
                    }
                    comp
                })
                .collect();
            let t = NatTrans { components };
            table.push(index[v][&t]);
        }
        act.push(table);
    }
    let labels = (0..no)
        .map(|w| maps[w].iter().map(|t| t.describe(&domains[w].presheaf, q)).collect())
        .collect();
    Ok(Exponential {
        presheaf: Presheaf::new_unchecked(c, labels, act),
        domains,
        maps,
        index,
    })
}

/// `phi : X x P -> Q` to its transpose `X -> (P => Q)`.
pub fn curry(x: &Presheaf, p: &Presheaf, exp: &Exponential, phi: &NatTrans) -> NatTrans {
    let c = x.base();
    let no = c.num_objects();
    let components = (0..no)
        .map(|w| {
            (0..x.size(w))
                .map(|xi| {
                    // theta_u(p, g) = phi_u(g . x, p)
                    let comps = (0..no)
                        .map(|u| {
                            let hw = c.hom(w, u);
                            let mut comp = Vec::with_capacity(p.size(u) * hw.len());
                            for pi in 0..p.size(u) {
                                for &g in hw {
                                    let gx = x.act(g, xi);
                                    comp.push(phi.at(u, gx * p.size(u) + pi));
                                }
                            }
                            comp
                        })
                        .collect();
                    exp.element_index(w, &NatTrans { components: comps })
                        .expect("transpose is natural")
                })
                .collect()
        })
        .collect();
    NatTrans { components }
}

/// `psi : X -> (P => Q)` to `X x P -> Q`.
pub fn uncurry(x: &Presheaf, p: &Presheaf, exp: &Exponential, psi: &NatTrans) -> NatTrans {
    let no = x.base().num_objects();
    let components = (0..no)
        .map(|u| {
            let mut comp = Vec::with_capacity(x.size(u) * p.size(u));
            for xi in 0..x.size(u) {
                for pi in 0..p.size(u) {
                    comp.push(exp.eval(u, psi.at(u, xi), pi));
                }
            }
            comp
        })
        .collect();
    NatTrans { components }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CurryReport {
    pub uncurried: usize,
    pub curried: usize,
    pub roundtrips: bool,
}

impl CurryReport {
    pub fn holds(&self) -> bool {
        self.uncurried == self.curried && self.roundtrips
    }
}

/// Enumerates `Hom(X x P, Q)` and `Hom(X, P => Q)` independently and checks
/// that currying and uncurrying are mutually inverse between them.
pub fn currying_check(x: &Presheaf, p: &Presheaf, q: &Presheaf) -> Result<CurryReport> {
    let exp = exponential(p, q)?;
    let xp = product(x, p)?;
    let lhs = nat_transformations(&xp.presheaf, q)?;
    let rhs = nat_transformations(x, &exp.presheaf)?;
    let mut roundtrips = true;
    for phi in &lhs {
        let psi = curry(x, p, &exp, phi);
        roundtrips &= psi.check(x, &exp.presheaf).is_ok() && uncurry(x, p, &exp, &psi) == *phi;
    }
    for psi in &rhs {
        let phi = uncurry(x, p, &exp, psi);
        roundtrips &= phi.check(&xp.presheaf, q).is_ok() && curry(x, p, &exp, &phi) == *psi;
    }
    Ok(CurryReport {
        uncurried: lhs.len(),
        curried: rhs.len(),
        roundtrips,
    })
}

/// The category of elements `el(P)` with the projection data: object `k`
/// is the pair `objects[k] = (w, x)`.
#[derive(Clone, Debug)]
pub struct ElementsCategory {
    pub category: Arc<FinCategory>,
    pub objects: Vec<(usize, usize)>,
    /// Base arrow underlying each arrow of `el(P)`.
    pub arrows: Vec<usize>,
}

pub fn elements(p: &Presheaf) -> ElementsCategory {
    let c = &**p.base();
    let mut objects = Vec::new();
    let mut obj_index = HashMap::new();
    for w in 0..c.num_objects() {
        for x in 0..p.size(w) {
            obj_index.insert((w, x), objects.len());
            objects.push((w, x));
        }
    }
    let mut arrows = Vec::new();
    let mut under = Vec::new();
    let mut arr_index = HashMap::new();
    for a in 0..c.num_arrows() {
        for x in 0..p.size(c.src(a)) {
            arr_index.insert((a, x), arrows.len());
            arrows.push(Arrow {
                name: format!("{}@{}", c.arrow_name(a), p.label(c.src(a), x)),
                src: obj_index[&(c.src(a), x)],
                dst: obj_index[&(c.dst(a), p.act(a, x))],
            });
            under.push(a);
        }
    }
    let identity = objects.iter().map(|&(w, x)| arr_index[&(c.id(w), x)]).collect();
    let mut entries = Vec::new();
    for (&(f, x), &fi) in &arr_index {
        let fx = p.act(f, x);
        for g in c.arrows_from(c.dst(f)) {
            entries.push((arr_index[&(g, fx)], fi, arr_index[&(c.comp(g, f), x)]));
        }
    }
    entries.sort_unstable();
    let names = objects
        .iter()
        .map(|&(w, x)| format!("{}:{}", c.object_name(w), p.label(w, x)))
        .collect();
    let category = FinCategory::build(names, arrows, identity, &entries).expect("el(P) is a category");
    ElementsCategory {
        category: Arc::new(category),
        objects,
        arrows: under,
    }
}

/// The colimit of representables over `el(P)` and its comparison to `P`.
#[derive(Clone, Debug)]
pub struct CoYoneda {
    pub colimit: Presheaf,
    pub comparison: NatTrans,
}

impl CoYoneda {
    pub fn is_iso(&self, p: &Presheaf) -> bool {
        self.comparison.is_componentwise_bijective(p)
    }
}

/// Glues one copy of `y w` per element `(w, x)` of `P` along the arrows of
/// `el(P)` (coproduct, then coequalizer) and maps the result back to `P`.
pub fn coyoneda(p: &Presheaf, cap: usize) -> Result<CoYoneda> {
    if p.total() > cap {
        return Err(Error::cap("presheaf elements", p.total(), cap));
    }
    let base = p.base().clone();
    let c = &*base;
    let el = elements(p);
    let reps: Vec<Presheaf> = (0..c.num_objects()).map(|w| Presheaf::yoneda(base.clone(), w)).collect();
    let objs: Vec<&Presheaf> = el.objects.iter().map(|&(w, _)| &reps[w]).collect();
    let sum = coproduct_all(&base, &objs)?;
    let arrow_summands: Vec<&Presheaf> = (0..el.category.num_arrows())
        .map(|k| &reps[c.dst(el.arrows[k])])
        .collect();
    let rel = coproduct_all(&base, &arrow_summands)?;
    // For an el-arrow f : (w,x) -> (w',x') and g : w' -> u, one leg sends g
    // to (w,x, g o f), the other to (w',x', g).
    let no = c.num_objects();
    let mut leg1 = vec![Vec::new(); no];
    let mut leg2 = vec![Vec::new(); no];
    for (k, &f) in el.arrows.iter().enumerate() {
        let (src_k, dst_k) = (el.category.src(k), el.category.dst(k));
        let w2 = c.dst(f);
        for u in 0..no {
            for &g in c.hom(w2, u) {
                let gf = c.comp(g, f);
                leg1[u].push(sum.offsets[src_k][u] + hom_position(c, gf));
                leg2[u].push(sum.offsets[dst_k][u] + hom_position(c, g));
            }
        }
    }
    let leg1 = NatTrans { components: leg1 };
    let leg2 = NatTrans { components: leg2 };
    let (colimit, quot) = coequalizer(&rel.presheaf, &sum.presheaf, &leg1, &leg2)?;
    // (w,x, g) |-> g . x, then descend along the quotient.
    let mut comparison: Vec<Vec<usize>> = (0..no).map(|u| vec![usize::MAX; colimit.size(u)]).collect();
    for (k, &(w, x)) in el.objects.iter().enumerate() {
        for u in 0..no {
            for (gi, &g) in c.hom(w, u).iter().enumerate() {
                let cls = quot.at(u, sum.offsets[k][u] + gi);
                let val = p.act(g, x);
                if comparison[u][cls] != usize::MAX && comparison[u][cls] != val {
                    return Err(Error::Invalid("comparison map is not well defined on the colimit".into()));
                }
                comparison[u][cls] = val;
            }
        }
    }
    let comparison = NatTrans { components: comparison };
    comparison.check(&colimit, p)?;
    Ok(CoYoneda { colimit, comparison })
}

/// Tininess, decided as representability: over a Cauchy-complete base the
/// tiny presheaves are exactly those isomorphic to some `y w`.
pub fn is_tiny(x: &Presheaf) -> Result<bool> {
    let base = x.base();
    if !base.is_cauchy_complete() {
        return Err(Error::BaseNotCauchyComplete);
    }
    for w in 0..base.num_objects() {
        if isomorphism(x, &Presheaf::yoneda(base.clone(), w))?.is_some() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Does `Hom(X, -)` send `P + Q` to `Hom(X,P) + Hom(X,Q)` and the initial
/// presheaf to the empty set?
pub fn hom_preserves_coproduct(x: &Presheaf, p: &Presheaf, q: &Presheaf) -> Result<bool> {
    let sum = coproduct(p, q)?;
    let lhs = count_nat_trans(x, &sum.presheaf)?;
    let rhs = count_nat_trans(x, p)? + count_nat_trans(x, q)?;
    let empty = count_nat_trans(x, &Presheaf::initial(x.base().clone()))?;
    Ok(lhs == rhs && empty == 0)
}

/// `f^* P = P o f`.
pub fn restrict(f: &FinFunctor, p: &Presheaf) -> Result<Presheaf> {
    if !(Arc::ptr_eq(f.target(), p.base()) || **f.target() == **p.base()) {
        return Err(Error::BaseMismatch);
    }
    let c = f.source().clone();
    let labels = (0..c.num_objects())
        .map(|o| p.labels(f.on_object(o)).to_vec())
        .collect();
    let act = (0..c.num_arrows()).map(|a| p.act[f.on_arrow(a)].clone()).collect();
    Ok(Presheaf::new_unchecked(c, labels, act))
}

pub fn restrict_map(f: &FinFunctor, t: &NatTrans) -> NatTrans {
    NatTrans {
        components: (0..f.source().num_objects())
            .map(|o| t.components[f.on_object(o)].clone())
            .collect(),
    }
}

/// Left Kan extension along `f`, with the class of each triple
/// `(c, x, k : f c -> d)` recorded.
#[derive(Clone, Debug)]
pub struct LeftKan {
    pub presheaf: Presheaf,
    /// `class[d][(c, x, k)]` is the element of `lan P (d)` containing it.
    class: Vec<HashMap<(usize, usize, usize), usize>>,
}

impl LeftKan {
    pub fn class_of(&self, d: usize, c: usize, x: usize, k: usize) -> usize {
        self.class[d][&(c, x, k)]
    }
}

pub fn lan(f: &FinFunctor, p: &Presheaf) -> Result<LeftKan> {
    if !(Arc::ptr_eq(f.source(), p.base()) || **f.source() == **p.base()) {
        return Err(Error::BaseMismatch);
    }
    let (cc, dd) = (&**f.source(), f.target().clone());
    let nd = dd.num_objects();
    let mut labels = Vec::with_capacity(nd);
    let mut class = Vec::with_capacity(nd);
    let mut triples_at = Vec::with_capacity(nd);
    for d in 0..nd {
        let mut triples = Vec::new();
        let mut idx = HashMap::new();
        for c in 0..cc.num_objects() {
            for x in 0..p.size(c) {
                for &k in dd.hom(f.on_object(c), d) {
                    idx.insert((c, x, k), triples.len());
                    triples.push((c, x, k));
                }
            }
        }
        let mut uf = UnionFind::new(triples.len());
        // (c, x, k o f(h)) ~ (c', h . x, k) for h : c -> c', k : f c' -> d.
        for h in 0..cc.num_arrows() {
            if cc.is_identity(h) {
                continue;
            }
            let (c0, c1) = (cc.src(h), cc.dst(h));
            for x in 0..p.size(c0) {
                for &k in dd.hom(f.on_object(c1), d) {
                    let kfh = dd.comp(k, f.on_arrow(h));
                    uf.union(idx[&(c0, x, kfh)], idx[&(c1, p.act(h, x), k)]);
                }
            }
        }
        let (cls, reps) = uf.classes();
        labels.push(
            reps.iter()
                .map(|&r| {
                    let (c, x, k) = triples[r];
                    format!("[{},{},{}]", cc.object_name(c), p.label(c, x), dd.arrow_name(k))
                })
                .collect::<Vec<_>>(),
        );
        class.push(triples.iter().enumerate().map(|(i, &t)| (t, cls[i])).collect::<HashMap<_, _>>());
        triples_at.push((triples, reps));
    }
    let act = (0..dd.num_arrows())
        .map(|a| {
            let (d0, d1) = (dd.src(a), dd.dst(a));
            let (triples, reps) = &triples_at[d0];
            reps.iter()
                .map(|&r| {
                    let (c, x, k) = triples[r];
                    class[d1][&(c, x, dd.comp(a, k))]
                })
                .collect()
        })
        .collect();
    Ok(LeftKan {
        presheaf: Presheaf::new_unchecked(dd, labels, act),
        class,
    })
}

/// `lan(t) : lan P -> lan P'` for `t : P -> P'`.
pub fn lan_map(f: &FinFunctor, src: &LeftKan, dst: &LeftKan, t: &NatTrans) -> NatTrans {
    let (cc, dd) = (&**f.source(), &**f.target());
    let mut components: Vec<Vec<usize>> = (0..dd.num_objects()).map(|d| vec![usize::MAX; src.presheaf.size(d)]).collect();
    for d in 0..dd.num_objects() {
        for c in 0..cc.num_objects() {
            for x in 0..t.components[c].len() {
                for &k in dd.hom(f.on_object(c), d) {
                    components[d][src.class_of(d, c, x, k)] = dst.class_of(d, c, t.at(c, x), k);
                }
            }
        }
    }
    NatTrans { components }
}

/// Right Kan extension: `ran P (d) = Hom(f^* y d, P)`.
#[derive(Clone, Debug)]
pub struct RightKan {
    pub presheaf: Presheaf,
    /// `f^* y d` for each `d`.
    pub domains: Vec<Presheaf>,
    pub maps: Vec<Vec<NatTrans>>,
    index: Vec<HashMap<NatTrans, usize>>,
}

impl RightKan {
    pub fn element_index(&self, d: usize, t: &NatTrans) -> Option<usize> {
        self.index[d].get(t).copied()
    }
}

pub fn ran(f: &FinFunctor, p: &Presheaf) -> Result<RightKan> {
    if !(Arc::ptr_eq(f.source(), p.base()) || **f.source() == **p.base()) {
        return Err(Error::BaseMismatch);
    }
    let (cc, dd) = (f.source().clone(), f.target().clone());
    let mut domains = Vec::new();
    let mut maps = Vec::new();
    let mut index = Vec::new();
    for d in 0..dd.num_objects() {
        let yd = restrict(f, &Presheaf::yoneda(dd.clone(), d))?;
        let ts = nat_transformations(&yd, p)?;
        index.push(ts.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect::<HashMap<_, _>>());
        maps.push(ts);
        domains.push(yd);
    }
    let act = (0..dd.num_arrows())
        .map(|a| {
            let (d0, d1) = (dd.src(a), dd.dst(a));
            maps[d0]
                .iter()
                .map(|theta| {
                    // theta'_c(g : d1 -> f c) = theta_c(g o a)
                    let components = (0..cc.num_objects())
                        .map(|c| {
                            dd.hom(d1, f.on_object(c))
                                .iter()
                                .map(|&g| theta.at(c, hom_position(&dd, dd.comp(g, a))))
                                .collect()
                        })
                        .collect();
                    index[d1][&NatTrans { components }]
                })
                .collect()
        })
        .collect();
    let labels = (0..dd.num_objects())
        .map(|d| maps[d].iter().map(|t| t.describe(&domains[d], p)).collect())
        .collect();
    Ok(RightKan {
        presheaf: Presheaf::new_unchecked(dd, labels, act),
        domains,
        maps,
        index,
    })
}

/// Hom-set counts and triangle identities for `lan -| f^* -| ran` at the
/// pair `(P over C, Q over D)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KanTripleReport {
    pub lan_hom: (usize, usize),
    pub ran_hom: (usize, usize),
    pub lan_triangles: bool,
    pub ran_triangles: bool,
}

impl KanTripleReport {
    pub fn holds(&self) -> bool {
        self.lan_hom.0 == self.lan_hom.1 && self.ran_hom.0 == self.ran_hom.1 && self.lan_triangles && self.ran_triangles
    }
}

pub fn kan_triple_check(f: &FinFunctor, p: &Presheaf, q: &Presheaf) -> Result<KanTripleReport> {
    let (cc, dd) = (&**f.source(), &**f.target());
    let lp = lan(f, p)?;
    let rq = restrict(f, q)?;
    let rp = ran(f, p)?;
    let lan_hom = (count_nat_trans(&lp.presheaf, q)?, count_nat_trans(p, &rq)?);
    let ran_hom = (count_nat_trans(&rq, p)?, count_nat_trans(q, &rp.presheaf)?);

    // lan -| f^*: unit x |-> [c, x, id], counit [c, y, k] |-> k . y.
    let res_lp = restrict(f, &lp.presheaf)?;
    let eta_p = NatTrans {
        components: (0..cc.num_objects())
            .map(|c| (0..p.size(c)).map(|x| lp.class_of(f.on_object(c), c, x, dd.id(f.on_object(c)))).collect())
            .collect(),
    };
    eta_p.check(p, &res_lp)?;
    let l_res_lp = lan(f, &res_lp)?;
    let counit = |l: &LeftKan, target: &Presheaf| -> NatTrans {
        let mut comps: Vec<Vec<usize>> = (0..dd.num_objects()).map(|d| vec![usize::MAX; l.presheaf.size(d)]).collect();
        for d in 0..dd.num_objects() {
            for c in 0..cc.num_objects() {
                for y in 0..target.size(f.on_object(c)) {
                    for &k in dd.hom(f.on_object(c), d) {
                        comps[d][l.class_of(d, c, y, k)] = target.act(k, y);
                    }
                }
            }
        }
        NatTrans { components: comps }
    };
    let eps_lp = counit(&l_res_lp, &lp.presheaf);
    eps_lp.check(&l_res_lp.presheaf, &lp.presheaf)?;
    let first = lan_map(f, &lp, &l_res_lp, &eta_p).then(&eps_lp) == NatTrans::identity(&lp.presheaf);
    let lrq = lan(f, &rq)?;
    let eps_q = counit(&lrq, q);
    eps_q.check(&lrq.presheaf, q)?;
    let eta_rq = NatTrans {
        components: (0..cc.num_objects())
            .map(|c| (0..rq.size(c)).map(|y| lrq.class_of(f.on_object(c), c, y, dd.id(f.on_object(c)))).collect())
            .collect(),
    };
    let second = eta_rq.then(&restrict_map(f, &eps_q)) == NatTrans::identity(&rq);

    // f^* -| ran: unit y |-> (g |-> g . y), counit theta |-> theta_c(id).
    let ran_unit = |target: &Presheaf, r: &RightKan| -> NatTrans {
        NatTrans {
            components: (0..dd.num_objects())
                .map(|d| {
                    (0..target.size(d))
                        .map(|y| {
                            let components = (0..cc.num_objects())
                                .map(|c| dd.hom(d, f.on_object(c)).iter().map(|&g| target.act(g, y)).collect())
                                .collect();
                            r.element_index(d, &NatTrans { components }).expect("unit lands in ran")
                        })
                        .collect()
                })
                .collect(),
        }
    };
    let ran_counit = |r: &RightKan| -> NatTrans {
        NatTrans {
            components: (0..cc.num_objects())
                .map(|c| {
                    let fc = f.on_object(c);
                    let id = hom_position(dd, dd.id(fc));
                    r.maps[fc].iter().map(|theta| theta.at(c, id)).collect()
                })
                .collect(),
        }
    };
    let r_rq = ran(f, &rq)?;
    let eta_q = ran_unit(q, &r_rq);
    eta_q.check(q, &r_rq.presheaf)?;
    let eps_rq = ran_counit(&r_rq);
    let third = restrict_map(f, &eta_q).then(&eps_rq) == NatTrans::identity(&rq);
    let res_rp = restrict(f, &rp.presheaf)?;
    let r_res_rp = ran(f, &res_rp)?;
    let eta_rp = ran_unit(&rp.presheaf, &r_res_rp);
    let eps_p = ran_counit(&rp);
    eps_p.check(&res_rp, p)?;
    // ran(eps_p) : ran f^* ran P -> ran P, by postcomposition.
    let ran_eps = NatTrans {
        components: (0..dd.num_objects())
            .map(|d| {
                r_res_rp.maps[d]
                    .iter()
                    .map(|theta| rp.element_index(d, &theta.then(&eps_p)).expect("postcomposite is natural"))
                    .collect()
            })
            .collect(),
    };
    let fourth = eta_rp.then(&ran_eps) == NatTrans::identity(&rp.presheaf);
    Ok(KanTripleReport {
        lan_hom,
        ran_hom,
        lan_triangles: first && second,
        ran_triangles: third && fourth,
    })
}

/// Verdict of the bounded openness check for a functor.
#[derive(Clone, Debug, Serialize)]
pub struct OpenFunctorVerdict {
    pub open: bool,
    /// A `true` verdict only covers presheaves up to this component size.
    pub family_cap: usize,
    pub pairs_checked: usize,
    /// Object names and element labels of a failing `(P, Q)`.
    pub witness: Option<(PresheafFile, PresheafFile)>,
}

/// Checks that `f^*(P => Q) -> f^*P => f^*Q` is invertible for every pair
/// of presheaves over the target whose value sets have at most
/// `family_cap` elements.
pub fn is_open_functor(f: &FinFunctor, family_cap: usize) -> Result<OpenFunctorVerdict> {
    let family = enumerate_presheaves(f.target(), family_cap)?;
    let mut checked = 0;
    for p in &family {
        for q in &family {
            checked += 1;
            if !exponential_comparison_is_iso(f, p, q)? {
                return Ok(OpenFunctorVerdict {
                    open: false,
                    family_cap,
                    pairs_checked: checked,
                    witness: Some((p.to_file(), q.to_file())),
                });
            }
        }
    }
    Ok(OpenFunctorVerdict {
        open: true,
        family_cap,
        pairs_checked: checked,
        witness: None,
    })
}

/// The canonical comparison `theta |-> ((x, h) |-> theta(x, f h))`.
pub fn exponential_comparison_is_iso(f: &FinFunctor, p: &Presheaf, q: &Presheaf) -> Result<bool> {
    let (cc, dd) = (&**f.source(), &**f.target());
    let e = exponential(p, q)?;
    let fp = restrict(f, p)?;
    let fq = restrict(f, q)?;
    let e2 = exponential(&fp, &fq)?;
    for c in 0..cc.num_objects() {
        let fc = f.on_object(c);
        if e.maps[fc].len() != e2.maps[c].len() {
            return Ok(false);
        }
        let mut hit = vec![false; e2.maps[c].len()];
        for theta in &e.maps[fc] {
            let components = (0..cc.num_objects())
                .map(|c2| {
                    let fc2 = f.on_object(c2);
                    let hd_len = dd.hom(fc, fc2).len();
                    let hc = cc.hom(c, c2);
                    let mut comp = Vec::with_capacity(fp.size(c2) * hc.len());
                    for x in 0..fp.size(c2) {
                        for &h in hc {
                            comp.push(theta.at(fc2, x * hd_len + hom_position(dd, f.on_arrow(h))));
                        }
                    }
                    comp
                })
                .collect();
            let Some(i) = e2.element_index(c, &NatTrans { components }) else {
                return Ok(false);
            };
            if std::mem::replace(&mut hit[i], true) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Every presheaf on `base` whose value sets have at most `max` elements.
pub fn enumerate_presheaves(base: &Arc<FinCategory>, max: usize) -> Result<Vec<Presheaf>> {
    let c = &**base;
    let no = c.num_objects();
    if no > 6 || max > 4 {
        return Err(Error::cap("presheaf family", no.max(max), 4));
    }
    let mut out = Vec::new();
    let mut sizes = vec![0; no];
    loop {
        enumerate_actions(base, &sizes, &mut out);
        if out.len() > ENUM_LIMIT {
            return Err(Error::cap("presheaf family", out.len(), ENUM_LIMIT));
        }
        let mut k = 0;
        loop {
            if k == no {
                return Ok(out);
            }
            sizes[k] += 1;
            if sizes[k] <= max {
                break;
            }
            sizes[k] = 0;
            k += 1;
        }
    }
}

fn enumerate_actions(base: &Arc<FinCategory>, sizes: &[usize], out: &mut Vec<Presheaf>) {
    let c = &**base;
    let labels: Vec<Vec<String>> = sizes.iter().map(|&n| (0..n).map(|i| i.to_string()).collect()).collect();
    let mut act: Vec<Vec<usize>> = (0..c.num_arrows()).map(|a| vec![usize::MAX; sizes[c.src(a)]]).collect();
    for o in 0..c.num_objects() {
        act[c.id(o)] = (0..sizes[o]).collect();
    }
    // Flatten the unknown table cells, arrow by arrow.
    let cells: Vec<(usize, usize)> = (0..c.num_arrows())
        .filter(|&a| !c.is_identity(a))
        .flat_map(|a| (0..sizes[c.src(a)]).map(move |x| (a, x)))
        .collect();
    fn go(
        c: &FinCategory,
        base: &Arc<FinCategory>,
        sizes: &[usize],
        labels: &[Vec<String>],
        cells: &[(usize, usize)],
        k: usize,
        act: &mut Vec<Vec<usize>>,
        out: &mut Vec<Presheaf>,
    ) {
        if k == cells.len() {
            let p = Presheaf {
                base: base.clone(),
                labels: labels.to_vec(),
                act: act.clone(),
            };
            if p.check().is_ok() {
                out.push(p);
            }
            return;
        }
        let (a, x) = cells[k];
        for y in 0..sizes[c.dst(a)] {
            act[a][x] = y;
            // Prune on composites whose three cells are all known.
            let ok = (0..c.num_arrows()).all(|f| {
                c.arrows_from(c.dst(f)).all(|g| {
                    let gf = c.comp(g, f);
                    (0..sizes[c.src(f)]).all(|x0| {
                        let fx = act[f][x0];
                        if fx == usize::MAX {
                            return true;
                        }
                        let (l, r) = (act[gf][x0], act[g][fx]);
                        l == usize::MAX || r == usize::MAX || l == r
                    })
                })
            });
            if ok {
                go(c, base, sizes, labels, cells, k + 1, act, out);
            }
        }
        act[a][x] = usize::MAX;
    }
    go(c, base, sizes, &labels, &cells, 0, &mut act, out);
}

/// A random presheaf: a coproduct of random representables, quotiented by
/// a few random identifications.
pub fn random_presheaf<R: rand::Rng>(base: &Arc<FinCategory>, generators: usize, merges: usize, rng: &mut R) -> Presheaf {
    let no = base.num_objects();
    if no == 0 {
        return Presheaf::initial(base.clone());
    }
    let reps: Vec<Presheaf> = (0..generators)
        .map(|_| Presheaf::yoneda(base.clone(), rng.gen_range(0..no)))
        .collect();
    let refs: Vec<&Presheaf> = reps.iter().collect();
    let sum = coproduct_all(base, &refs).expect("same base").presheaf;
    let mut pairs = Vec::new();
    for _ in 0..merges {
        let o = rng.gen_range(0..no);
        if sum.size(o) >= 2 {
            pairs.push((o, rng.gen_range(0..sum.size(o)), rng.gen_range(0..sum.size(o))));
        }
    }
    quotient(&sum, &pairs).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::Poset;

    fn pp() -> Arc<FinCategory> {
        Arc::new(FinCategory::walking_parallel_pair())
    }

    fn chain2() -> Arc<FinCategory> {
        Arc::new(FinCategory::from_poset(&Poset::new(&["a", "b"], &[("a", "b")]).unwrap()))
    }

    #[test]
    fn representable_is_valid() {
        let c = pp();
        let ys = Presheaf::yoneda(c.clone(), 0);
        assert_eq!(ys.sizes(), vec![1, 2]);
        ys.check().unwrap();
        Presheaf::terminal(c).check().unwrap();
    }

    #[test]
    fn broken_composition_is_reported() {
        let c = Arc::new(FinCategory::from_poset(&Poset::chain(3)));
        // Two elements everywhere; w0<w1 and w1<w2 swap, w0<w2 is identity.
        let labels = vec![vec!["0".to_string(), "1".to_string()]; 3];
        let mut act = Vec::new();
        for a in 0..c.num_arrows() {
            let name = c.arrow_name(a);
            act.push(if name == "w0<w1" || name == "w1<w2" { vec![1, 0] } else if name == "w0<w2" { vec![1, 0] } else { vec![0, 1] });
        }
        let e = Presheaf::new(c, labels, act).unwrap_err();
        assert!(matches!(e, Error::FunctorLawViolation(_)));
    }

    #[test]
    fn yoneda_counts() {
        let c = pp();
        let (s, t) = (0, 1);
        let ys = Presheaf::yoneda(c.clone(), s);
        let yt = Presheaf::yoneda(c.clone(), t);
        assert_eq!(count_nat_trans(&ys, &ys).unwrap(), 1);
        assert_eq!(count_nat_trans(&ys, &yt).unwrap(), 0);
        let p = Presheaf::from_file(
            c.clone(),
            &serde_json::from_str(r#"{"at":{"s":["x"],"t":["u","v"]},"act":{"f":{"x":"u"},"g":{"x":"v"}}}"#).unwrap(),
        )
        .unwrap();
        assert_eq!(count_nat_trans(&ys, &p).unwrap(), 1);
        let b = yoneda_bijection(&p, s).unwrap();
        assert_eq!(b.to_element, vec![0]);
    }

    #[test]
    fn product_and_coproduct_cardinalities() {
        let c = pp();
        let ys = Presheaf::yoneda(c.clone(), 0);
        let t = Presheaf::terminal(c.clone());
        let pr = product(&ys, &t).unwrap();
        assert!(isomorphism(&pr.presheaf, &ys).unwrap().is_some());
        let yt = Presheaf::yoneda(c.clone(), 1);
        let co = coproduct(&ys, &yt).unwrap();
        assert_eq!(co.presheaf.sizes(), vec![1, 3]);
    }

    #[test]
    fn coequalizer_of_parallel_actions() {
        // Constant presheaves on the parallel pair with value sets {0,1,2}
        // and maps f = id, g = cycle: the quotient identifies everything.
        let c = pp();
        let three = vec!["0".to_string(), "1".to_string(), "2".to_string()];
        let k = Presheaf::new(c.clone(), vec![three.clone(), three.clone()], vec![vec![0, 1, 2]; 4]).unwrap();
        let id = NatTrans::identity(&k);
        let cyc = NatTrans { components: vec![vec![1, 2, 0], vec![1, 2, 0]] };
        let (q, _) = coequalizer(&k, &k, &id, &cyc).unwrap();
        assert_eq!(q.sizes(), vec![1, 1]);
        let swap01 = NatTrans { components: vec![vec![1, 0, 2], vec![1, 0, 2]] };
        let (q, _) = coequalizer(&k, &k, &id, &swap01).unwrap();
        assert_eq!(q.sizes(), vec![2, 2]);
    }

    #[test]
    fn exponential_of_terminals() {
        let c = chain2();
        let t = Presheaf::terminal(c);
        let e = exponential(&t, &t).unwrap();
        assert_eq!(e.presheaf.sizes(), vec![1, 1]);
    }

    #[test]
    fn coyoneda_examples() {
        let c = chain2();
        let ya = Presheaf::yoneda(c.clone(), 0);
        let cy = coyoneda(&ya, 12).unwrap();
        assert!(cy.is_iso(&ya));
        let t = Presheaf::terminal(c.clone());
        assert!(coyoneda(&t, 12).unwrap().is_iso(&t));
        let e = Presheaf::initial(c);
        let cy = coyoneda(&e, 12).unwrap();
        assert_eq!(cy.colimit.total(), 0);
    }

    #[test]
    fn tininess() {
        let c = pp();
        let ys = Presheaf::yoneda(c.clone(), 0);
        let yt = Presheaf::yoneda(c.clone(), 1);
        assert!(is_tiny(&ys).unwrap());
        let sum = coproduct(&ys, &yt).unwrap().presheaf;
        assert!(!is_tiny(&sum).unwrap());
        assert!(!is_tiny(&Presheaf::initial(c)).unwrap());
        let m = Arc::new(FinCategory::idempotent_monoid());
        assert_eq!(is_tiny(&Presheaf::terminal(m)), Err(Error::BaseNotCauchyComplete));
    }

    #[test]
    fn kan_extensions_along_point_inclusion() {
        let d = chain2();
        let pt = Arc::new(FinCategory::from_poset(&Poset::point()));
        let f = FinFunctor::new(pt.clone(), d.clone(), vec![0], vec![d.id(0)]).unwrap();
        let x = Presheaf::terminal(pt);
        let l = lan(&f, &x).unwrap();
        assert!(isomorphism(&l.presheaf, &Presheaf::yoneda(d.clone(), 0)).unwrap().is_some());
        let r = ran(&f, &x).unwrap();
        assert_eq!(r.presheaf.size(1), 1);
        let id = FinFunctor::identity(d.clone());
        let p = Presheaf::yoneda(d, 0);
        assert_eq!(restrict(&id, &p).unwrap(), p);
    }

    #[test]
    fn presheaf_family_counts() {
        // Presheaves on the 2-chain with sets of size <= 1: (0,0),(0,1),(1,1).
        assert_eq!(enumerate_presheaves(&chain2(), 1).unwrap().len(), 3);
        // Sizes <= 2: sum over (m, n) of n^m = 3 + 3 + 5.
        assert_eq!(enumerate_presheaves(&chain2(), 2).unwrap().len(), 11);
    }
}
