//! Finite categories presented by explicit composition tables, functors
//! between them, and idempotent analysis.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::Poset;

const NONE: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arrow {
    pub name: String,
    pub src: usize,
    pub dst: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FinCategory {
    objects: Vec<String>,
    arrows: Vec<Arrow>,
    identity: Vec<usize>,
    /// `compose[g * arrows + f]` is `g o f`, or `NONE` when not composable.
    compose: Vec<usize>,
    /// `hom[a * objects + b]` lists the arrows `a -> b`.
    hom: Vec<Vec<usize>>,
}

/// On-disk presentation of a category.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryFile {
    pub objects: Vec<String>,
    pub arrows: Vec<ArrowFile>,
    pub id: BTreeMap<String, String>,
    #[serde(default)]
    pub compose: Vec<(String, String, String)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowFile {
    pub name: String,
    pub src: String,
    pub dst: String,
}

impl FinCategory {
    /// Builds and validates a category. Composites with an identity may be
    /// omitted; every other composable pair needs exactly one entry.
    pub fn from_file(file: &CategoryFile) -> Result<Self> {
        let obj_index: HashMap<&str, usize> = file
            .objects
            .iter()
            .enumerate()
            .map(|(i, o)| (o.as_str(), i))
            .collect();
        if obj_index.len() != file.objects.len() {
            return Err(Error::Invalid("duplicate object name".into()));
        }
        let obj = |name: &str| obj_index.get(name).copied().ok_or_else(|| Error::UnknownObject(name.to_string()));
        let mut arrows = Vec::with_capacity(file.arrows.len());
        let mut arrow_index = HashMap::new();
        for a in &file.arrows {
            if arrow_index.insert(a.name.clone(), arrows.len()).is_some() {
                return Err(Error::Invalid(format!("duplicate arrow name `{}`", a.name)));
            }
            arrows.push(Arrow {
                name: a.name.clone(),
                src: obj(&a.src)?,
                dst: obj(&a.dst)?,
            });
        }
        let arr = |name: &str| arrow_index.get(name).copied().ok_or_else(|| Error::UnknownArrow(name.to_string()));
        let mut identity = vec![NONE; file.objects.len()];
        for (o, a) in &file.id {
            let (oi, ai) = (obj(o)?, arr(a)?);
            if arrows[ai].src != oi || arrows[ai].dst != oi {
                return Err(Error::IdentityViolation(a.clone()));
            }
            identity[oi] = ai;
        }
        if let Some(o) = identity.iter().position(|&i| i == NONE) {
            return Err(Error::Invalid(format!("object `{}` has no identity", file.objects[o])));
        }
        let entries = file
            .compose
            .iter()
            .map(|(g, f, gf)| Ok((arr(g)?, arr(f)?, arr(gf)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::build(file.objects.clone(), arrows, identity, &entries)
    }

    pub(crate) fn build(
        objects: Vec<String>,
        arrows: Vec<Arrow>,
        identity: Vec<usize>,
        entries: &[(usize, usize, usize)],
    ) -> Result<Self> {
        let na = arrows.len();
        let mut compose = vec![NONE; na * na];
        for &(g, f, gf) in entries {
            let name = |i: usize| arrows[i].name.clone();
            if arrows[f].dst != arrows[g].src
                || arrows[gf].src != arrows[f].src
                || arrows[gf].dst != arrows[g].dst
            {
                return Err(Error::Invalid(format!(
                    "composite entry {} o {} = {} has mismatched endpoints",
                    name(g),
                    name(f),
                    name(gf)
                )));
            }
            let slot = &mut compose[g * na + f];
            if *slot != NONE && *slot != gf {
                return Err(Error::MissingComposite(name(g), name(f)));
            }
            *slot = gf;
        }
        for (f, a) in arrows.iter().enumerate() {
            for slot in [identity[a.dst] * na + f, f * na + identity[a.src]] {
                if compose[slot] == NONE {
                    compose[slot] = f;
                } else if compose[slot] != f {
                    return Err(Error::IdentityViolation(a.name.clone()));
                }
            }
        }
        for g in 0..na {
            for f in 0..na {
                let composable = arrows[f].dst == arrows[g].src;
                let defined = compose[g * na + f] != NONE;
                if composable && !defined {
                    return Err(Error::MissingComposite(arrows[g].name.clone(), arrows[f].name.clone()));
                }
            }
        }
        let no = objects.len();
        let mut hom = vec![Vec::new(); no * no];
        for (i, a) in arrows.iter().enumerate() {
            hom[a.src * no + a.dst].push(i);
        }
        let c = FinCategory {
            objects,
            arrows,
            identity,
            compose,
            hom,
        };
        c.check_associativity()?;
        Ok(c)
    }

    fn check_associativity(&self) -> Result<()> {
        for f in 0..self.arrows.len() {
            for g in self.arrows_from(self.arrows[f].dst) {
                let gf = self.comp(g, f);
                for h in self.arrows_from(self.arrows[g].dst) {
                    if self.comp(h, gf) != self.comp(self.comp(h, g), f) {
                        return Err(Error::AssociativityViolation(
                            self.arrows[h].name.clone(),
                            self.arrows[g].name.clone(),
                            self.arrows[f].name.clone(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> CategoryFile {
        let mut compose = Vec::new();
        for g in 0..self.arrows.len() {
            for f in self.arrows_into(self.arrows[g].src) {
                if self.is_identity(g) || self.is_identity(f) {
                    continue;
                }
                compose.push((
                    self.arrows[g].name.clone(),
                    self.arrows[f].name.clone(),
                    self.arrows[self.comp(g, f)].name.clone(),
                ));
            }
        }
        CategoryFile {
            objects: self.objects.clone(),
            arrows: self
                .arrows
                .iter()
                .map(|a| ArrowFile {
                    name: a.name.clone(),
                    src: self.objects[a.src].clone(),
                    dst: self.objects[a.dst].clone(),
                })
                .collect(),
            id: self
                .identity
                .iter()
                .enumerate()
                .map(|(o, &a)| (self.objects[o].clone(), self.arrows[a].name.clone()))
                .collect(),
            compose,
        }
    }

    /// The category with one arrow `a -> b` whenever `a <= b`.
    pub fn from_poset(p: &Poset) -> Self {
        let mut arrows = Vec::new();
        let mut index = HashMap::new();
        let mut identity = vec![NONE; p.len()];
        for (a, b) in p.leq_pairs() {
            let name = if a == b {
                identity[a] = arrows.len();
                format!("id_{}", p.name(a))
            } else {
                format!("{}<{}", p.name(a), p.name(b))
            };
            index.insert((a, b), arrows.len());
            arrows.push(Arrow { name, src: a, dst: b });
        }
        let mut entries = Vec::new();
        for (&(a, b), &f) in &index {
            for c in 0..p.len() {
                if let Some(&g) = index.get(&(b, c)) {
                    entries.push((g, f, index[&(a, c)]));
                }
            }
        }
        entries.sort_unstable();
        Self::build(p.names().to_vec(), arrows, identity, &entries).expect("posets are categories")
    }

    /// Objects `s, t` and two parallel arrows `f, g : s -> t`.
    pub fn walking_parallel_pair() -> Self {
        let arrows = vec![
            Arrow { name: "id_s".into(), src: 0, dst: 0 },
            Arrow { name: "id_t".into(), src: 1, dst: 1 },
            Arrow { name: "f".into(), src: 0, dst: 1 },
            Arrow { name: "g".into(), src: 0, dst: 1 },
        ];
        Self::build(vec!["s".into(), "t".into()], arrows, vec![0, 1], &[]).expect("parallel pair")
    }

    /// One object with arrows `id` and `e`, where `e o e = e`.
    pub fn idempotent_monoid() -> Self {
        let arrows = vec![
            Arrow { name: "id".into(), src: 0, dst: 0 },
            Arrow { name: "e".into(), src: 0, dst: 0 },
        ];
        Self::build(vec!["*".into()], arrows, vec![0], &[(1, 1, 1)]).expect("idempotent monoid")
    }

    pub fn empty() -> Self {
        Self::build(Vec::new(), Vec::new(), Vec::new(), &[]).expect("empty category")
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn object_name(&self, o: usize) -> &str {
        &self.objects[o]
    }

    pub fn object(&self, name: &str) -> Result<usize> {
        self.objects
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| Error::UnknownObject(name.to_string()))
    }

    pub fn arrow(&self, name: &str) -> Result<usize> {
        self.arrows
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownArrow(name.to_string()))
    }

    pub fn arrow_info(&self, a: usize) -> &Arrow {
        &self.arrows[a]
    }

    pub fn arrow_name(&self, a: usize) -> &str {
        &self.arrows[a].name
    }

    pub fn src(&self, a: usize) -> usize {
        self.arrows[a].src
    }

    pub fn dst(&self, a: usize) -> usize {
        self.arrows[a].dst
    }

    pub fn id(&self, o: usize) -> usize {
        self.identity[o]
    }

    pub fn is_identity(&self, a: usize) -> bool {
        self.identity[self.arrows[a].src] == a
    }

    /// `g o f`; panics unless `dst(f) = src(g)`.
    pub fn comp(&self, g: usize, f: usize) -> usize {
        let r = self.compose[g * self.arrows.len() + f];
        assert!(r != NONE, "arrows are not composable");
        r
    }

    pub fn hom(&self, a: usize, b: usize) -> &[usize] {
        &self.hom[a * self.objects.len() + b]
    }

    pub fn arrows_from(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.arrows.len()).filter(move |&f| self.arrows[f].src == a)
    }

    pub fn arrows_into(&self, b: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.arrows.len()).filter(move |&f| self.arrows[f].dst == b)
    }

    pub fn opposite(&self) -> Self {
        let arrows = self
            .arrows
            .iter()
            .map(|a| Arrow {
                name: a.name.clone(),
                src: a.dst,
                dst: a.src,
            })
            .collect();
        let na = self.arrows.len();
        let mut compose = vec![NONE; na * na];
        for g in 0..na {
            for f in 0..na {
                // In the opposite, g o f is f o g of the original.
                let r = self.compose[f * na + g];
                compose[g * na + f] = r;
            }
        }
        let no = self.objects.len();
        let mut hom = vec![Vec::new(); no * no];
        for a in 0..no {
            for b in 0..no {
                hom[a * no + b] = self.hom[b * no + a].clone();
            }
        }
        FinCategory {
            objects: self.objects.clone(),
            arrows,
            identity: self.identity.clone(),
            compose,
            hom,
        }
    }

    /// `self x other`; object `(a, b)` has index `a * |other| + b`, arrow
    /// `(f, g)` has index `f * |other arrows| + g`.
    pub fn product(&self, other: &FinCategory) -> Self {
        let (no, mo) = (self.num_objects(), other.num_objects());
        let (na, ma) = (self.num_arrows(), other.num_arrows());
        let objects = (0..no * mo)
            .map(|i| format!("({},{})", self.objects[i / mo], other.objects[i % mo]))
            .collect();
        let arrows = (0..na * ma)
            .map(|i| {
                let (f, g) = (&self.arrows[i / ma], &other.arrows[i % ma]);
                Arrow {
                    name: format!("({},{})", f.name, g.name),
                    src: f.src * mo + g.src,
                    dst: f.dst * mo + g.dst,
                }
            })
            .collect::<Vec<_>>();
        let identity = (0..no * mo)
            .map(|i| self.identity[i / mo] * ma + other.identity[i % mo])
            .collect();
        let n = na * ma;
        let mut compose = vec![NONE; n * n];
        for g in 0..n {
            for f in 0..n {
                let a = self.compose[(g / ma) * na + f / ma];
                let b = other.compose[(g % ma) * ma + f % ma];
                if a != NONE && b != NONE {
                    compose[g * n + f] = a * ma + b;
                }
            }
        }
        let mut hom = vec![Vec::new(); no * mo * no * mo];
        for (i, a) in arrows.iter().enumerate() {
            hom[a.src * no * mo + a.dst].push(i);
        }
        FinCategory {
            objects,
            arrows,
            identity,
            compose,
            hom,
        }
    }

    /// Arrows `e : w -> w` with `e o e = e`, identities included.
    pub fn idempotents(&self) -> Vec<usize> {
        (0..self.arrows.len())
            .filter(|&e| self.src(e) == self.dst(e) && self.comp(e, e) == e)
            .collect()
    }

    /// A splitting `(r, s)` of `e`: `s o r = e` and `r o s = id`.
    pub fn splitting(&self, e: usize) -> Option<(usize, usize)> {
        let w = self.src(e);
        for v in 0..self.objects.len() {
            for &r in self.hom(w, v) {
                for &s in self.hom(v, w) {
                    if self.comp(s, r) == e && self.comp(r, s) == self.id(v) {
                        return Some((r, s));
                    }
                }
            }
        }
        None
    }

    pub fn is_cauchy_complete(&self) -> bool {
        self.idempotents().into_iter().all(|e| self.splitting(e).is_some())
    }

    pub fn is_spacelike(&self) -> bool {
        self.idempotents().into_iter().all(|e| self.is_identity(e))
    }

    /// Every section-retraction pair is an isomorphism.
    pub fn hemelaer(&self) -> bool {
        for w in 0..self.objects.len() {
            for v in 0..self.objects.len() {
                for &s in self.hom(w, v) {
                    for &r in self.hom(v, w) {
                        if self.comp(r, s) == self.id(w) && self.comp(s, r) != self.id(v) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Is `a` an isomorphism?
    pub fn inverse(&self, a: usize) -> Option<usize> {
        self.hom(self.dst(a), self.src(a))
            .iter()
            .copied()
            .find(|&b| self.comp(b, a) == self.id(self.src(a)) && self.comp(a, b) == self.id(self.dst(a)))
    }
}

/// A functor between finite categories, validated at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinFunctor {
    source: Arc<FinCategory>,
    target: Arc<FinCategory>,
    obj: Vec<usize>,
    arr: Vec<usize>,
}

impl FinFunctor {
    pub fn new(source: Arc<FinCategory>, target: Arc<FinCategory>, obj: Vec<usize>, arr: Vec<usize>) -> Result<Self> {
        let f = FinFunctor {
            source,
            target,
            obj,
            arr,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn from_names(
        source: Arc<FinCategory>,
        target: Arc<FinCategory>,
        objects: &[(&str, &str)],
        arrows: &[(&str, &str)],
    ) -> Result<Self> {
        let mut obj = vec![NONE; source.num_objects()];
        for (a, b) in objects {
            obj[source.object(a)?] = target.object(b)?;
        }
        let mut arr = vec![NONE; source.num_arrows()];
        for o in 0..source.num_objects() {
            if obj[o] != NONE {
                arr[source.id(o)] = target.id(obj[o]);
            }
        }
        for (a, b) in arrows {
            arr[source.arrow(a)?] = target.arrow(b)?;
        }
        Self::new(source, target, obj, arr)
    }

    fn validate(&self) -> Result<()> {
        let (s, t) = (&*self.source, &*self.target);
        if self.obj.len() != s.num_objects() || self.arr.len() != s.num_arrows() {
            return Err(Error::FunctorLawViolation("assignment is not total".into()));
        }
        if self.obj.iter().chain(&self.arr).any(|&x| x == NONE)
            || self.obj.iter().any(|&o| o >= t.num_objects())
            || self.arr.iter().any(|&a| a >= t.num_arrows())
        {
            return Err(Error::FunctorLawViolation("assignment is not total".into()));
        }
        for a in 0..s.num_arrows() {
            let fa = self.arr[a];
            if t.src(fa) != self.obj[s.src(a)] || t.dst(fa) != self.obj[s.dst(a)] {
                return Err(Error::FunctorLawViolation(format!("{} changes endpoints", s.arrow_name(a))));
            }
        }
        for o in 0..s.num_objects() {
            if self.arr[s.id(o)] != t.id(self.obj[o]) {
                return Err(Error::FunctorLawViolation(format!("identity of {} not preserved", s.object_name(o))));
            }
        }
        for f in 0..s.num_arrows() {
            for g in s.arrows_from(s.dst(f)) {
                if self.arr[s.comp(g, f)] != t.comp(self.arr[g], self.arr[f]) {
                    return Err(Error::FunctorLawViolation(format!(
                        "{} o {} not preserved",
                        s.arrow_name(g),
                        s.arrow_name(f)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn identity(c: Arc<FinCategory>) -> Self {
        FinFunctor {
            obj: (0..c.num_objects()).collect(),
            arr: (0..c.num_arrows()).collect(),
            source: c.clone(),
            target: c,
        }
    }

    pub fn source(&self) -> &Arc<FinCategory> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FinCategory> {
        &self.target
    }

    pub fn on_object(&self, o: usize) -> usize {
        self.obj[o]
    }

    pub fn on_arrow(&self, a: usize) -> usize {
        self.arr[a]
    }

    pub fn then(&self, g: &FinFunctor) -> Result<FinFunctor> {
        if *self.target != *g.source {
            return Err(Error::BaseMismatch);
        }
        FinFunctor::new(
            self.source.clone(),
            g.target.clone(),
            self.obj.iter().map(|&o| g.obj[o]).collect(),
            self.arr.iter().map(|&a| g.arr[a]).collect(),
        )
    }

    /// `f^op x f : Op(C) x C -> Op(D) x D`, on the products built by
    /// `opposite().product(..)`.
    pub fn op_product(&self) -> FinFunctor {
        let (s, t) = (&*self.source, &*self.target);
        let (sm, tm) = (s.num_objects(), t.num_objects());
        let (sa, ta) = (s.num_arrows(), t.num_arrows());
        let obj = (0..sm * sm).map(|i| self.obj[i / sm] * tm + self.obj[i % sm]).collect();
        let arr = (0..sa * sa).map(|i| self.arr[i / sa] * ta + self.arr[i % sa]).collect();
        FinFunctor {
            source: Arc::new(s.opposite().product(s)),
            target: Arc::new(t.opposite().product(t)),
            obj,
            arr,
        }
    }

    pub fn is_faithful(&self) -> bool {
        let s = &*self.source;
        (0..s.num_objects()).all(|a| {
            (0..s.num_objects()).all(|b| {
                let mut seen: Vec<usize> = s.hom(a, b).iter().map(|&f| self.arr[f]).collect();
                seen.sort_unstable();
                seen.windows(2).all(|w| w[0] != w[1])
            })
        })
    }

    pub fn is_full(&self) -> bool {
        let (s, t) = (&*self.source, &*self.target);
        (0..s.num_objects()).all(|a| {
            (0..s.num_objects()).all(|b| {
                t.hom(self.obj[a], self.obj[b])
                    .iter()
                    .all(|g| s.hom(a, b).iter().any(|&f| self.arr[f] == *g))
            })
        })
    }

    /// Every target object is a retract of some image object.
    pub fn is_retractionally_surjective(&self) -> bool {
        let t = &*self.target;
        (0..t.num_objects()).all(|d| {
            self.obj.iter().any(|&fc| {
                t.hom(d, fc)
                    .iter()
                    .any(|&s| t.hom(fc, d).iter().any(|&r| t.comp(r, s) == t.id(d)))
            })
        })
    }

    pub fn is_essentially_surjective(&self) -> bool {
        let t = &*self.target;
        (0..t.num_objects()).all(|d| {
            self.obj
                .iter()
                .any(|&fc| t.hom(d, fc).iter().any(|&a| t.inverse(a).is_some()))
        })
    }
}

/// Visits every functor `source -> target`, stopping early when `visit`
/// returns `false` or after `limit` functors. Returns how many were visited.
pub fn for_each_functor(
    source: &Arc<FinCategory>,
    target: &Arc<FinCategory>,
    limit: usize,
    mut visit: impl FnMut(&FinFunctor) -> bool,
) -> usize {
    let (s, t) = (&**source, &**target);
    let mut obj = vec![NONE; s.num_objects()];
    let mut count = 0;
    let mut stop = false;
    assign_objects(s, t, 0, &mut obj, &mut |obj| {
        let mut arr = vec![NONE; s.num_arrows()];
        for o in 0..s.num_objects() {
            arr[s.id(o)] = t.id(obj[o]);
        }
        let order: Vec<usize> = (0..s.num_arrows()).filter(|&a| !s.is_identity(a)).collect();
        assign_arrows(s, t, obj, &order, 0, &mut arr, &mut |arr| {
            if stop || count >= limit {
                stop = true;
                return;
            }
            count += 1;
            let f = FinFunctor {
                source: source.clone(),
                target: target.clone(),
                obj: obj.to_vec(),
                arr: arr.to_vec(),
            };
            if !visit(&f) {
                stop = true;
            }
        });
        !stop
    });
    count
}

fn assign_objects(
    s: &FinCategory,
    t: &FinCategory,
    k: usize,
    obj: &mut Vec<usize>,
    leaf: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if k == obj.len() {
        return leaf(obj);
    }
    for d in 0..t.num_objects() {
        // Hom-sets must be inhabited in the target where they are in the source.
        let ok = (0..k).all(|j| {
            (s.hom(j, k).is_empty() || !t.hom(obj[j], d).is_empty())
                && (s.hom(k, j).is_empty() || !t.hom(d, obj[j]).is_empty())
        });
        if ok {
            obj[k] = d;
            if !assign_objects(s, t, k + 1, obj, leaf) {
                return false;
            }
        }
    }
    obj[k] = NONE;
    true
}

fn assign_arrows(
    s: &FinCategory,
    t: &FinCategory,
    obj: &[usize],
    order: &[usize],
    k: usize,
    arr: &mut Vec<usize>,
    leaf: &mut dyn FnMut(&[usize]),
) {
    if k == order.len() {
        leaf(arr);
        return;
    }
    let a = order[k];
    for &cand in t.hom(obj[s.src(a)], obj[s.dst(a)]) {
        arr[a] = cand;
        let consistent = (0..s.num_arrows()).all(|f| {
            if arr[f] == NONE {
                return true;
            }
            s.arrows_from(s.dst(f)).all(|g| {
                let gf = s.comp(g, f);
                arr[g] == NONE || arr[gf] == NONE || arr[gf] == t.comp(arr[g], arr[f])
            })
        });
        if consistent {
            assign_arrows(s, t, obj, order, k + 1, arr, leaf);
        }
    }
    arr[a] = NONE;
}

/// Result of the bounded search for an equivalence.
#[derive(Clone, Debug)]
pub struct EquivalenceSearch {
    pub witness: Option<FinFunctor>,
    pub candidates_examined: usize,
    /// `true` when the whole functor space was searched.
    pub exhaustive: bool,
}

/// Looks for a full, faithful, retractionally surjective functor.
pub fn find_equivalence(c: &Arc<FinCategory>, d: &Arc<FinCategory>, limit: usize) -> EquivalenceSearch {
    let mut witness = None;
    let count = for_each_functor(c, d, limit, |f| {
        if f.is_full() && f.is_faithful() && f.is_retractionally_surjective() {
            witness = Some(f.clone());
            false
        } else {
            true
        }
    });
    EquivalenceSearch {
        exhaustive: witness.is_none() && count < limit,
        witness,
        candidates_examined: count,
    }
}

/// The idempotent completion together with the embedding `w |-> id_w`.
#[derive(Clone, Debug)]
pub struct Completion {
    pub category: Arc<FinCategory>,
    pub embedding: FinFunctor,
}

/// Karoubi envelope: objects are idempotents, arrows `p -> q` are the `a`
/// with `q o a o p = a`.
pub fn cauchy_completion(c: &Arc<FinCategory>) -> Completion {
    let idem = c.idempotents();
    let obj_name = |e: usize| {
        if c.is_identity(e) {
            c.object_name(c.src(e)).to_string()
        } else {
            format!("[{}]", c.arrow_name(e))
        }
    };
    let objects: Vec<String> = idem.iter().map(|&e| obj_name(e)).collect();
    let mut arrows = Vec::new();
    let mut key = HashMap::new();
    for (pi, &p) in idem.iter().enumerate() {
        for (qi, &q) in idem.iter().enumerate() {
            for &a in c.hom(c.src(p), c.src(q)) {
                if c.comp(q, c.comp(a, p)) != a {
                    continue;
                }
                let name = if c.is_identity(p) && c.is_identity(q) {
                    c.arrow_name(a).to_string()
                } else {
                    format!("{}:{}->{}", c.arrow_name(a), objects[pi], objects[qi])
                };
                key.insert((pi, qi, a), arrows.len());
                arrows.push(Arrow { name, src: pi, dst: qi });
            }
        }
    }
    let identity: Vec<usize> = idem.iter().enumerate().map(|(pi, &p)| key[&(pi, pi, p)]).collect();
    let mut entries = Vec::new();
    for (&(pi, qi, a), &f) in &key {
        for ri in 0..idem.len() {
            for &b in c.hom(c.src(idem[qi]), c.src(idem[ri])) {
                if let Some(&g) = key.get(&(qi, ri, b)) {
                    entries.push((g, f, key[&(pi, ri, c.comp(b, a))]));
                }
            }
        }
    }
    entries.sort_unstable();
    let category = Arc::new(FinCategory::build(objects, arrows, identity, &entries).expect("Karoubi envelope is a category"));
    let pos = |e: usize| idem.iter().position(|&x| x == e).expect("identities are idempotent");
    let obj: Vec<usize> = (0..c.num_objects()).map(|o| pos(c.id(o))).collect();
    let arr: Vec<usize> = (0..c.num_arrows())
        .map(|a| key[&(obj[c.src(a)], obj[c.dst(a)], a)])
        .collect();
    let embedding = FinFunctor::new(c.clone(), category.clone(), obj, arr).expect("embedding is a functor");
    Completion { category, embedding }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(json: &str) -> CategoryFile {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn parallel_pair_from_file() {
        let c = FinCategory::from_file(&file(
            r#"{"objects":["s","t"],
                "arrows":[{"name":"1s","src":"s","dst":"s"},{"name":"1t","src":"t","dst":"t"},
                          {"name":"f","src":"s","dst":"t"},{"name":"g","src":"s","dst":"t"}],
                "id":{"s":"1s","t":"1t"}}"#,
        ))
        .unwrap();
        assert_eq!(c.num_arrows(), 4);
    }

    #[test]
    fn conflicting_composites_rejected() {
        let e = FinCategory::from_file(&file(
            r#"{"objects":["*"],
                "arrows":[{"name":"id","src":"*","dst":"*"},{"name":"e","src":"*","dst":"*"}],
                "id":{"*":"id"},
                "compose":[["e","e","id"],["e","e","e"]]}"#,
        ))
        .unwrap_err();
        assert!(matches!(e, Error::MissingComposite(..)));
    }

    #[test]
    fn missing_composite_rejected() {
        let e = FinCategory::from_file(&file(
            r#"{"objects":["*"],
                "arrows":[{"name":"id","src":"*","dst":"*"},{"name":"e","src":"*","dst":"*"}],
                "id":{"*":"id"}}"#,
        ))
        .unwrap_err();
        assert_eq!(e, Error::MissingComposite("e".into(), "e".into()));
    }

    #[test]
    fn associativity_witness() {
        // a o a = b, b o a = a, a o b = b breaks (a o a) o a = a o (a o a).
        let e = FinCategory::from_file(&file(
            r#"{"objects":["*"],
                "arrows":[{"name":"id","src":"*","dst":"*"},{"name":"a","src":"*","dst":"*"},{"name":"b","src":"*","dst":"*"}],
                "id":{"*":"id"},
                "compose":[["a","a","b"],["b","a","a"],["a","b","b"],["b","b","b"]]}"#,
        ))
        .unwrap_err();
        assert!(matches!(e, Error::AssociativityViolation(..)));
    }

    #[test]
    fn file_roundtrip() {
        let c = cauchy_completion(&Arc::new(FinCategory::idempotent_monoid())).category;
        let back = FinCategory::from_file(&c.to_file()).unwrap();
        assert_eq!(*c, back);
    }

    #[test]
    fn opposite_examples() {
        let c = FinCategory::walking_parallel_pair();
        let op = c.opposite();
        let f = op.arrow("f").unwrap();
        assert_eq!((op.src(f), op.dst(f)), (1, 0));
        assert_eq!(op.opposite(), c);
        let m = FinCategory::idempotent_monoid();
        assert_eq!(m.opposite(), m);
    }

    #[test]
    fn idempotents_and_completeness() {
        let pp = FinCategory::walking_parallel_pair();
        assert_eq!(pp.idempotents().len(), 2);
        assert!(pp.is_cauchy_complete() && pp.is_spacelike() && pp.hemelaer());
        let m = FinCategory::idempotent_monoid();
        assert!(!m.is_cauchy_complete() && !m.is_spacelike());
        let pos = FinCategory::from_poset(&Poset::chain(3));
        assert!(pos.is_cauchy_complete());
    }

    #[test]
    fn karoubi_of_idempotent_monoid() {
        let m = Arc::new(FinCategory::idempotent_monoid());
        let k = cauchy_completion(&m);
        assert_eq!(k.category.num_objects(), 2);
        assert_eq!(k.category.num_arrows(), 5);
        assert!(k.category.is_cauchy_complete());
        assert!(!k.category.hemelaer());
        assert!(!k.category.is_spacelike());
        assert!(k.embedding.is_full() && k.embedding.is_faithful());
        assert!(k.embedding.is_retractionally_surjective());
        assert!(!k.embedding.is_essentially_surjective());
        assert_eq!(cauchy_completion(&Arc::new(FinCategory::empty())).category.num_objects(), 0);
    }

    #[test]
    fn retractional_surjectivity_of_inclusion() {
        let pp = Arc::new(FinCategory::walking_parallel_pair());
        let point = Arc::new(FinCategory::from_poset(&Poset::point()));
        let incl = FinFunctor::new(point, pp.clone(), vec![0], vec![pp.id(0)]).unwrap();
        assert!(!incl.is_retractionally_surjective());
        assert!(FinFunctor::identity(pp).is_retractionally_surjective());
    }

    #[test]
    fn functor_enumeration_counts() {
        // Functors 2-chain -> 2-chain are the 3 monotone maps.
        let c = Arc::new(FinCategory::from_poset(&Poset::chain(2)));
        assert_eq!(for_each_functor(&c, &c, usize::MAX, |_| true), 3);
        // Monoid endomorphisms of {id, e}: e |-> id or e |-> e.
        let m = Arc::new(FinCategory::idempotent_monoid());
        assert_eq!(for_each_functor(&m, &m, usize::MAX, |_| true), 2);
    }

    #[test]
    fn completion_is_idempotent_up_to_equivalence() {
        let m = Arc::new(FinCategory::idempotent_monoid());
        let k = cauchy_completion(&m).category;
        let kk = cauchy_completion(&k).category;
        assert!(find_equivalence(&k, &kk, 100_000).witness.is_some());
        assert!(find_equivalence(&kk, &k, 100_000).witness.is_some());
    }
}
