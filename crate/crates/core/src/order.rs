//! Finite posets, monotone maps and upper sets.
//!
//! Elements are addressed by index; the string names given at construction
//! fix that order and are only used for lookups and reporting. Subsets of a
//! poset are `u64` bitmasks, so carriers hold at most 64 elements.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Mask = u64;

/// Default cap on carrier sizes for the exhaustive enumerators.
pub const DEFAULT_SIZE_CAP: usize = 6;

pub(crate) fn bits(mask: Mask) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

pub(crate) fn full_mask(n: usize) -> Mask {
    if n >= 64 {
        !0
    } else {
        (1u64 << n) - 1
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poset {
    names: Vec<String>,
    /// `up[i]` has bit `j` set iff `i <= j`.
    up: Vec<Mask>,
    down: Vec<Mask>,
}

impl fmt::Debug for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let covers: Vec<_> = self
            .covers()
            .into_iter()
            .map(|(a, b)| format!("{}<{}", self.names[a], self.names[b]))
            .collect();
        write!(f, "Poset{{{:?}; {}}}", self.names, covers.join(", "))
    }
}

impl Poset {
    /// Builds the reflexive-transitive closure of `covers` over `elements`.
    pub fn new<S: AsRef<str>>(elements: &[S], covers: &[(S, S)]) -> Result<Self> {
        let names: Vec<String> = elements.iter().map(|s| s.as_ref().to_string()).collect();
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::DuplicateElement(n.clone()));
            }
        }
        let mut pairs = Vec::with_capacity(covers.len());
        for (a, b) in covers {
            let ia = *index
                .get(a.as_ref())
                .ok_or_else(|| Error::UnknownElement(a.as_ref().to_string()))?;
            let ib = *index
                .get(b.as_ref())
                .ok_or_else(|| Error::UnknownElement(b.as_ref().to_string()))?;
            pairs.push((ia, ib));
        }
        Self::from_pairs(names, &pairs)
    }

    /// Closure of index pairs; the workhorse behind [`Poset::new`].
    pub fn from_pairs(names: Vec<String>, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = names.len();
        if n > 64 {
            return Err(Error::TooManyElements(n));
        }
        let mut up: Vec<Mask> = (0..n).map(|i| 1u64 << i).collect();
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::UnknownElement(format!("#{}", a.max(b))));
            }
            up[a] |= 1 << b;
        }
        // Warshall on bit rows.
        for k in 0..n {
            for i in 0..n {
                if up[i] >> k & 1 == 1 {
                    up[i] |= up[k];
                }
            }
        }
        for i in 0..n {
            for j in bits(up[i]) {
                if j != i && up[j] >> i & 1 == 1 {
                    return Err(Error::AntisymmetryViolation(
                        names[i].clone(),
                        names[j].clone(),
                    ));
                }
            }
        }
        Ok(Self::from_up_rows(names, up))
    }

    fn from_up_rows(names: Vec<String>, up: Vec<Mask>) -> Self {
        let n = names.len();
        let mut down = vec![0; n];
        for i in 0..n {
            for j in bits(up[i]) {
                down[j] |= 1 << i;
            }
        }
        Poset { names, up, down }
    }

    pub fn discrete(n: usize) -> Self {
        let names = (0..n).map(|i| format!("w{i}")).collect();
        Self::from_pairs(names, &[]).expect("discrete poset")
    }

    /// The chain `w0 <= w1 <= ...`.
    pub fn chain(n: usize) -> Self {
        let names = (0..n).map(|i| format!("w{i}")).collect();
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_pairs(names, &pairs).expect("chain")
    }

    /// The two-point chain `0 <= 1`.
    pub fn two() -> Self {
        Self::new(&["0", "1"], &[("0", "1")]).expect("two")
    }

    pub fn point() -> Self {
        Self::new(&["*"], &[]).expect("point")
    }

    pub fn with_names(&self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.len() {
            return Err(Error::Invalid("name count differs from carrier size".into()));
        }
        Ok(Self::from_up_rows(names, self.up.clone()))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.up[a] >> b & 1 == 1
    }

    /// Mask of `{v | a <= v}`.
    pub fn up(&self, a: usize) -> Mask {
        self.up[a]
    }

    /// Mask of `{v | v <= a}`.
    pub fn down(&self, a: usize) -> Mask {
        self.down[a]
    }

    pub fn full(&self) -> Mask {
        full_mask(self.len())
    }

    /// All pairs `(a, b)` with `a <= b`, reflexive ones included.
    pub fn leq_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|a| bits(self.up[a]).map(move |b| (a, b)))
            .collect()
    }

    /// The Hasse diagram: pairs `a < b` with nothing strictly in between.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            let strict = self.up[a] & !(1 << a);
            for b in bits(strict) {
                let between = strict & self.down[b] & !(1 << b);
                if between == 0 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn opposite(&self) -> Self {
        Poset {
            names: self.names.clone(),
            up: self.down.clone(),
            down: self.up.clone(),
        }
    }

    /// `Op(self) x other`, with elements named `(a,b)` in row-major order.
    pub fn op_product(&self, other: &Poset) -> Result<Self> {
        let (n, m) = (self.len(), other.len());
        if n * m > 64 {
            return Err(Error::TooManyElements(n * m));
        }
        let mut names = Vec::with_capacity(n * m);
        let mut up = Vec::with_capacity(n * m);
        for a in 0..n {
            for b in 0..m {
                names.push(format!("({},{})", self.names[a], other.names[b]));
                let mut row = 0;
                for a2 in bits(self.down[a]) {
                    for b2 in bits(other.up[b]) {
                        row |= 1 << (a2 * m + b2);
                    }
                }
                up.push(row);
            }
        }
        Ok(Self::from_up_rows(names, up))
    }

    pub fn is_up_closed(&self, mask: Mask) -> bool {
        mask & !self.full() == 0 && bits(mask).all(|i| self.up[i] & !mask == 0)
    }

    /// Least upper set containing `mask`.
    pub fn up_closure(&self, mask: Mask) -> Mask {
        bits(mask).fold(0, |acc, i| acc | self.up[i])
    }

    pub fn principal_upset(&self, name: &str) -> Result<UpperSet> {
        Ok(UpperSet(self.up[self.index(name)?]))
    }

    pub fn upper_set<S: AsRef<str>>(&self, members: &[S]) -> Result<UpperSet> {
        let mut mask = 0;
        for m in members {
            mask |= 1 << self.index(m.as_ref())?;
        }
        if !self.is_up_closed(mask) {
            return Err(Error::Invalid(format!(
                "{{{}}} is not up-closed",
                self.mask_names(mask).join(",")
            )));
        }
        Ok(UpperSet(mask))
    }

    pub fn mask_names(&self, mask: Mask) -> Vec<String> {
        bits(mask).map(|i| self.names[i].clone()).collect()
    }

    /// Elements ordered so that every element precedes everything above it.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| (self.down[i].count_ones(), i));
        order
    }

    /// Finds an order isomorphism `self -> other`, returned as an index map.
    pub fn isomorphism_to(&self, other: &Poset) -> Option<Vec<usize>> {
        if self.len() != other.len() {
            return None;
        }
        let n = self.len();
        let order = self.linear_extension();
        let mut assign = vec![usize::MAX; n];
        let mut used = 0u64;
        fn go(
            a: &Poset,
            b: &Poset,
            order: &[usize],
            k: usize,
            assign: &mut Vec<usize>,
            used: &mut u64,
        ) -> bool {
            if k == order.len() {
                return true;
            }
            let i = order[k];
            for j in 0..b.len() {
                if *used >> j & 1 == 1 {
                    continue;
                }
                let ok = order[..k]
                    .iter()
                    .all(|&p| a.leq(p, i) == b.leq(assign[p], j) && a.leq(i, p) == b.leq(j, assign[p]));
                if ok {
                    assign[i] = j;
                    *used |= 1 << j;
                    if go(a, b, order, k + 1, assign, used) {
                        return true;
                    }
                    *used &= !(1 << j);
                }
            }
            false
        }
        if go(self, other, &order, 0, &mut assign, &mut used) {
            Some(assign)
        } else {
            None
        }
    }

    /// Enumerates every upper set, in a deterministic order.
    pub fn upper_sets(&self, cap: usize) -> Result<Vec<UpperSet>> {
        Ok(self.upset_masks(cap)?.into_iter().map(UpperSet).collect())
    }

    pub(crate) fn upset_masks(&self, cap: usize) -> Result<Vec<Mask>> {
        if self.len() > cap {
            return Err(Error::cap("poset", self.len(), cap));
        }
        Ok(self.upset_masks_uncapped())
    }

    /// Backtracks from the top so that only up-closed sets are visited.
    pub(crate) fn upset_masks_uncapped(&self) -> Vec<Mask> {
        let mut order = self.linear_extension();
        order.reverse();
        let mut out = Vec::new();
        fn go(p: &Poset, order: &[usize], k: usize, cur: Mask, out: &mut Vec<Mask>) {
            if k == order.len() {
                out.push(cur);
                return;
            }
            let i = order[k];
            go(p, order, k + 1, cur, out);
            let strict_up = p.up[i] & !(1 << i);
            if strict_up & !cur == 0 {
                go(p, order, k + 1, cur | 1 << i, out);
            }
        }
        go(self, &order, 0, 0, &mut out);
        out.sort_unstable_by_key(|m| (m.count_ones(), *m));
        out
    }

    /// All posets on `n` elements up to isomorphism, named `w0..`.
    pub fn enumerate_up_to_iso(n: usize) -> Vec<Poset> {
        assert!(n <= 7, "poset enumeration is exponential");
        // Naturally labelled posets: each new element gets a down-closed set
        // of predecessors among the earlier ones.
        let mut rows: Vec<Vec<Mask>> = vec![Vec::new()];
        for k in 0..n {
            let mut next = Vec::new();
            for down in &rows {
                let p = Self::from_down_rows(down.clone());
                for d in p.downset_masks() {
                    let mut nd = down.clone();
                    nd.push(d | 1 << k);
                    next.push(nd);
                }
            }
            rows = next;
        }
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for down in rows {
            let p = Self::from_down_rows(down);
            if seen.insert(p.canonical_code()) {
                out.push(p);
            }
        }
        out
    }

    fn from_down_rows(down: Vec<Mask>) -> Self {
        let n = down.len();
        let mut up = vec![0; n];
        for (i, &d) in down.iter().enumerate() {
            for j in bits(d) {
                up[j] |= 1 << i;
            }
        }
        let names = (0..n).map(|i| format!("w{i}")).collect();
        Poset { names, up, down }
    }

    fn downset_masks(&self) -> Vec<Mask> {
        self.opposite().upset_masks_uncapped()
    }

    /// Lexicographically least adjacency code over all relabellings.
    fn canonical_code(&self) -> Vec<u64> {
        let n = self.len();
        let mut best: Option<Vec<u64>> = None;
        let mut perm: Vec<usize> = (0..n).collect();
        permute(&mut perm, 0, &mut |p| {
            let code: Vec<u64> = (0..n)
                .map(|i| {
                    let mut row = 0;
                    for j in 0..n {
                        if self.leq(p[i], p[j]) {
                            row |= 1 << j;
                        }
                    }
                    row
                })
                .collect();
            if best.as_ref().map_or(true, |b| code < *b) {
                best = Some(code);
            }
        });
        best.unwrap_or_default()
    }

    /// A random poset on `n` elements: random forward edges, then closure.
    pub fn random<R: rand::Rng>(n: usize, density: f64, rng: &mut R) -> Self {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(density) {
                    pairs.push((i, j));
                }
            }
        }
        let names = (0..n).map(|i| format!("w{i}")).collect();
        Self::from_pairs(names, &pairs).expect("forward edges are acyclic")
    }
}

fn permute(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

/// An up-closed subset, stored as a bitmask over its poset's indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UpperSet(pub Mask);

impl UpperSet {
    pub fn contains(&self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn is_subset(&self, other: &UpperSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn members(&self) -> impl Iterator<Item = usize> {
        bits(self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneMap {
    source: Arc<Poset>,
    target: Arc<Poset>,
    image: Vec<usize>,
}

impl MonotoneMap {
    pub fn new(source: Arc<Poset>, target: Arc<Poset>, image: Vec<usize>) -> Result<Self> {
        if image.len() != source.len() {
            return Err(Error::NotMonotone("assignment is not total".into()));
        }
        if let Some(&bad) = image.iter().find(|&&j| j >= target.len()) {
            return Err(Error::UnknownElement(format!("#{bad}")));
        }
        for (a, b) in source.leq_pairs() {
            if !target.leq(image[a], image[b]) {
                return Err(Error::NotMonotone(format!(
                    "{} <= {} but {} is not <= {}",
                    source.name(a),
                    source.name(b),
                    target.name(image[a]),
                    target.name(image[b])
                )));
            }
        }
        Ok(MonotoneMap {
            source,
            target,
            image,
        })
    }

    pub fn from_names(source: Arc<Poset>, target: Arc<Poset>, assignment: &[(&str, &str)]) -> Result<Self> {
        let mut image = vec![usize::MAX; source.len()];
        for (a, b) in assignment {
            image[source.index(a)?] = target.index(b)?;
        }
        if let Some(i) = image.iter().position(|&j| j == usize::MAX) {
            return Err(Error::NotMonotone(format!("{} is unassigned", source.name(i))));
        }
        Self::new(source, target, image)
    }

    pub fn identity(p: Arc<Poset>) -> Self {
        let image = (0..p.len()).collect();
        MonotoneMap {
            source: p.clone(),
            target: p,
            image,
        }
    }

    pub fn constant(source: Arc<Poset>, target: Arc<Poset>, at: usize) -> Result<Self> {
        let image = vec![at; source.len()];
        Self::new(source, target, image)
    }

    pub fn source(&self) -> &Arc<Poset> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Poset> {
        &self.target
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn image_mask(&self, mask: Mask) -> Mask {
        bits(mask).fold(0, |acc, i| acc | 1 << self.image[i])
    }

    pub fn compose(&self, after: &MonotoneMap) -> Result<MonotoneMap> {
        if *self.target != *after.source {
            return Err(Error::BaseMismatch);
        }
        let image = self.image.iter().map(|&i| after.image[i]).collect();
        Ok(MonotoneMap {
            source: self.source.clone(),
            target: after.target.clone(),
            image,
        })
    }

    /// Back-lifting: whenever `f(w) <= v'` some `w' >= w` has `f(w') = v'`.
    pub fn is_open(&self) -> bool {
        (0..self.source.len()).all(|w| {
            let reached = self.image_mask(self.source.up(w));
            self.target.up(self.image[w]) & !reached == 0
        })
    }

    pub fn is_surjective(&self) -> bool {
        self.image_mask(self.source.full()) == self.target.full()
    }
}

/// Every monotone map `source -> target`, in lexicographic order of images.
pub fn enumerate_monotone_maps(
    source: &Arc<Poset>,
    target: &Arc<Poset>,
    cap: usize,
) -> Result<Vec<MonotoneMap>> {
    for p in [source, target] {
        if p.len() > cap {
            return Err(Error::cap("poset", p.len(), cap));
        }
    }
    let n = source.len();
    let mut out = Vec::new();
    let mut image = vec![0; n];
    fn go(
        s: &Poset,
        t: &Poset,
        k: usize,
        image: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if k == s.len() {
            visit(image);
            return;
        }
        for j in 0..t.len() {
            let ok = (0..k).all(|i| {
                (!s.leq(i, k) || t.leq(image[i], j)) && (!s.leq(k, i) || t.leq(j, image[i]))
            });
            if ok {
                image[k] = j;
                go(s, t, k + 1, image, visit);
            }
        }
    }
    go(source, target, 0, &mut image, &mut |img| {
        out.push(MonotoneMap {
            source: source.clone(),
            target: target.clone(),
            image: img.to_vec(),
        })
    });
    Ok(out)
}
