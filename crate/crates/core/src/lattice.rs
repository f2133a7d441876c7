//! The Heyting algebra of upper sets, abstract finite lattices, prime
//! elements and the order-level Kan extensions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::{bits, full_mask, Mask, MonotoneMap, Poset, UpperSet};

/// `Up(W)`: every upper set of a poset, ordered by inclusion.
#[derive(Clone, Debug)]
pub struct UpsetLattice {
    base: Arc<Poset>,
    elements: Vec<Mask>,
}

impl UpsetLattice {
    pub fn new(base: Arc<Poset>, cap: usize) -> Result<Self> {
        let elements = base.upset_masks(cap)?;
        Ok(UpsetLattice { base, elements })
    }

    pub fn base(&self) -> &Arc<Poset> {
        &self.base
    }

    pub fn elements(&self) -> &[Mask] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn top(&self) -> UpperSet {
        UpperSet(self.base.full())
    }

    pub fn bottom(&self) -> UpperSet {
        UpperSet(0)
    }

    fn check(&self, s: UpperSet) -> Result<()> {
        if self.base.is_up_closed(s.0) {
            Ok(())
        } else {
            Err(Error::BaseMismatch)
        }
    }

    pub fn meet(&self, x: UpperSet, y: UpperSet) -> Result<UpperSet> {
        self.check(x)?;
        self.check(y)?;
        Ok(UpperSet(x.0 & y.0))
    }

    pub fn join(&self, x: UpperSet, y: UpperSet) -> Result<UpperSet> {
        self.check(x)?;
        self.check(y)?;
        Ok(UpperSet(x.0 | y.0))
    }

    /// `{w | for all v >= w, v in X implies v in Y}`.
    pub fn imp(&self, x: UpperSet, y: UpperSet) -> Result<UpperSet> {
        self.check(x)?;
        self.check(y)?;
        Ok(UpperSet(heyting_imp(&self.base, x.0, y.0)))
    }

    /// Index of an upper set within [`UpsetLattice::elements`].
    pub fn position(&self, s: Mask) -> Option<usize> {
        self.elements.iter().position(|&e| e == s)
    }

    pub fn to_finite_lattice(&self) -> FiniteLattice {
        let names = self
            .elements
            .iter()
            .map(|&m| format!("{{{}}}", self.base.mask_names(m).join(",")))
            .collect();
        FiniteLattice::from_leq(names, |a, b| {
            self.elements[a] & !self.elements[b] == 0
        })
        .expect("upper sets form a lattice")
    }
}

pub(crate) fn heyting_imp(base: &Poset, x: Mask, y: Mask) -> Mask {
    (0..base.len())
        .filter(|&w| base.up(w) & x & !y == 0)
        .fold(0, |acc, w| acc | 1 << w)
}

/// A finite lattice given by its order, with meet and join tables derived
/// and validated at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteLattice {
    names: Vec<String>,
    /// `above[a]` has bit `b` set iff `a <= b`.
    above: Vec<Mask>,
    meet: Vec<Vec<usize>>,
    join: Vec<Vec<usize>>,
    bottom: usize,
    top: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeFile {
    pub elements: Vec<String>,
    /// Pairs `[a, b]` meaning `a <= b`; closed reflexively and transitively.
    pub leq: Vec<(String, String)>,
}

impl FiniteLattice {
    pub fn from_leq(names: Vec<String>, leq: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let n = names.len();
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if leq(a, b) {
                    pairs.push((a, b));
                }
            }
        }
        let p = Poset::from_pairs(names, &pairs).map_err(|e| Error::InvalidLattice(e.to_string()))?;
        Self::from_poset(&p)
    }

    pub fn from_file(file: &LatticeFile) -> Result<Self> {
        let covers: Vec<(&str, &str)> = file.leq.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let names: Vec<&str> = file.elements.iter().map(String::as_str).collect();
        let p = Poset::new(&names, &covers)?;
        Self::from_poset(&p)
    }

    /// Fails unless every pair has a least upper and greatest lower bound.
    pub fn from_poset(p: &Poset) -> Result<Self> {
        let n = p.len();
        if n == 0 {
            return Err(Error::InvalidLattice("a lattice needs a bottom and a top".into()));
        }
        let above: Vec<Mask> = (0..n).map(|a| p.up(a)).collect();
        let below: Vec<Mask> = (0..n).map(|a| p.down(a)).collect();
        let least = |set: Mask| bits(set).find(|&c| set & !above[c] == 0);
        let greatest = |set: Mask| bits(set).find(|&c| set & !below[c] == 0);
        let mut meet = vec![vec![0; n]; n];
        let mut join = vec![vec![0; n]; n];
        for a in 0..n {
            for b in 0..n {
                join[a][b] = least(above[a] & above[b]).ok_or_else(|| {
                    Error::InvalidLattice(format!("{} and {} have no join", p.name(a), p.name(b)))
                })?;
                meet[a][b] = greatest(below[a] & below[b]).ok_or_else(|| {
                    Error::InvalidLattice(format!("{} and {} have no meet", p.name(a), p.name(b)))
                })?;
            }
        }
        let bottom = least(full_mask(n)).ok_or_else(|| Error::InvalidLattice("no bottom".into()))?;
        let top = greatest(full_mask(n)).ok_or_else(|| Error::InvalidLattice("no top".into()))?;
        Ok(FiniteLattice {
            names: p.names().to_vec(),
            above,
            meet,
            join,
            bottom,
            top,
        })
    }

    /// The diamond `M3`: bottom, three incomparable atoms, top.
    pub fn m3() -> Self {
        let p = Poset::new(
            &["0", "x", "y", "z", "1"],
            &[("0", "x"), ("0", "y"), ("0", "z"), ("x", "1"), ("y", "1"), ("z", "1")],
        )
        .expect("m3");
        Self::from_poset(&p).expect("m3 is a lattice")
    }

    /// The pentagon `N5`.
    pub fn n5() -> Self {
        let p = Poset::new(
            &["0", "a", "b", "c", "1"],
            &[("0", "a"), ("a", "b"), ("b", "1"), ("0", "c"), ("c", "1")],
        )
        .expect("n5");
        Self::from_poset(&p).expect("n5 is a lattice")
    }

    /// The Boolean algebra of subsets of an `n`-element set.
    pub fn boolean(n: usize) -> Self {
        let size = 1usize << n;
        let names = (0..size).map(|s| format!("s{s:0n$b}")).collect();
        Self::from_leq(names, |a, b| a & !b == 0).expect("powerset lattice")
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

    pub fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.above[a] >> b & 1 == 1
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a][b]
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a][b]
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn join_of(&self, set: impl IntoIterator<Item = usize>) -> usize {
        set.into_iter().fold(self.bottom, |acc, x| self.join[acc][x])
    }

    pub fn meet_of(&self, set: impl IntoIterator<Item = usize>) -> usize {
        set.into_iter().fold(self.top, |acc, x| self.meet[acc][x])
    }

    /// `d` is prime iff `d` lies below no join of elements that are each
    /// not above `d`; the largest such family decides it.
    pub fn is_prime(&self, d: usize) -> bool {
        let not_above = (0..self.len()).filter(|&x| !self.leq(d, x));
        !self.leq(d, self.join_of(not_above))
    }

    pub fn is_prime_checked(&self, d: usize) -> Result<bool> {
        if d >= self.len() {
            return Err(Error::UnknownElement(format!("#{d}")));
        }
        Ok(self.is_prime(d))
    }

    pub fn prime_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&d| self.is_prime(d)).collect()
    }

    /// The primes, ordered by the reverse of the lattice order.
    pub fn primes(&self) -> (Poset, Vec<usize>) {
        let idx = self.prime_indices();
        let names = idx.iter().map(|&i| self.names[i].clone()).collect();
        let mut pairs = Vec::new();
        for (a, &pa) in idx.iter().enumerate() {
            for (b, &pb) in idx.iter().enumerate() {
                if self.leq(pb, pa) {
                    pairs.push((a, b));
                }
            }
        }
        let p = Poset::from_pairs(names, &pairs).expect("sub-order of a lattice");
        (p, idx)
    }

    pub fn is_prime_algebraic(&self) -> bool {
        let primes = self.prime_indices();
        (0..self.len()).all(|d| {
            let below = primes.iter().copied().filter(|&p| self.leq(p, d));
            self.join_of(below) == d
        })
    }

    /// Rebuilds the lattice as `Up(primes)` with an explicit isomorphism.
    pub fn reconstruct(&self) -> Result<Reconstruction> {
        if !self.is_prime_algebraic() {
            return Err(Error::NotPrimeAlgebraic);
        }
        let (poset, primes) = self.primes();
        let upsets = UpsetLattice {
            elements: poset.upset_masks_uncapped(),
            base: Arc::new(poset),
        };
        let iso: Vec<Mask> = (0..self.len())
            .map(|d| {
                primes
                    .iter()
                    .enumerate()
                    .filter(|&(_, &p)| self.leq(p, d))
                    .fold(0, |acc, (k, _)| acc | 1 << k)
            })
            .collect();
        let r = Reconstruction { upsets, iso };
        r.verify(self)?;
        Ok(r)
    }
}

/// The output of [`FiniteLattice::reconstruct`]: element `d` of the lattice
/// corresponds to the upper set `iso[d]` of primes below it.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub upsets: UpsetLattice,
    pub iso: Vec<Mask>,
}

impl Reconstruction {
    /// Bijectivity onto `Up(primes)` and order preservation both ways.
    pub fn verify(&self, lattice: &FiniteLattice) -> Result<()> {
        let base = self.upsets.base();
        let mut hit = vec![false; self.upsets.len()];
        for (d, &s) in self.iso.iter().enumerate() {
            if !base.is_up_closed(s) {
                return Err(Error::Invalid(format!("image of {} is not up-closed", lattice.names[d])));
            }
            let k = self
                .upsets
                .position(s)
                .ok_or_else(|| Error::Invalid("image outside Up(primes)".into()))?;
            if std::mem::replace(&mut hit[k], true) {
                return Err(Error::Invalid("reconstruction map is not injective".into()));
            }
        }
        if hit.iter().any(|h| !h) {
            return Err(Error::Invalid("reconstruction map is not surjective".into()));
        }
        for a in 0..lattice.len() {
            for b in 0..lattice.len() {
                let sub = self.iso[a] & !self.iso[b] == 0;
                if lattice.leq(a, b) != sub {
                    return Err(Error::Invalid(format!(
                        "order not reflected between {} and {}",
                        lattice.names[a], lattice.names[b]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `S' |-> f^{-1}(S')`.
pub fn preimage(f: &MonotoneMap, s: Mask) -> Mask {
    (0..f.source().len())
        .filter(|&w| s >> f.apply(w) & 1 == 1)
        .fold(0, |acc, w| acc | 1 << w)
}

/// `f_! -| f^* -| f_*` between `Up(W)` and `Up(W')`.
#[derive(Clone, Debug)]
pub struct AdjointTriple {
    map: MonotoneMap,
}

impl AdjointTriple {
    pub fn new(map: MonotoneMap) -> Self {
        AdjointTriple { map }
    }

    pub fn map(&self) -> &MonotoneMap {
        &self.map
    }

    /// `f_!`: up-closure of the direct image.
    pub fn lower(&self, s: Mask) -> Mask {
        self.map.target().up_closure(self.map.image_mask(s))
    }

    /// `f^*`.
    pub fn middle(&self, t: Mask) -> Mask {
        preimage(&self.map, t)
    }

    /// `f_*`: `{v' | f^{-1}(up v') is contained in S}`.
    pub fn upper(&self, s: Mask) -> Mask {
        let t = self.map.target();
        (0..t.len())
            .filter(|&v| preimage(&self.map, t.up(v)) & !s == 0)
            .fold(0, |acc, v| acc | 1 << v)
    }

    /// Checks both adjunctions pointwise over every pair of upper sets.
    pub fn verify(&self, cap: usize) -> Result<()> {
        let src = self.map.source().upset_masks(cap)?;
        let tgt = self.map.target().upset_masks(cap)?;
        for &s in &src {
            for &t in &tgt {
                let sub = |a: Mask, b: Mask| a & !b == 0;
                if sub(self.lower(s), t) != sub(s, self.middle(t)) {
                    return Err(Error::Invalid("f_! is not left adjoint to f^*".into()));
                }
                if sub(self.middle(t), s) != sub(t, self.upper(s)) {
                    return Err(Error::Invalid("f_* is not right adjoint to f^*".into()));
                }
            }
        }
        Ok(())
    }
}

/// The join-preserving extension of a monotone `Op(W) -> L` along `up`,
/// together with its right adjoint.
#[derive(Clone, Debug)]
pub struct UpsetExtension<'a> {
    base: Arc<Poset>,
    lattice: &'a FiniteLattice,
    values: Vec<usize>,
}

pub fn lan_along_upset<'a>(
    base: Arc<Poset>,
    lattice: &'a FiniteLattice,
    values: Vec<usize>,
) -> Result<UpsetExtension<'a>> {
    if values.len() != base.len() || values.iter().any(|&v| v >= lattice.len()) {
        return Err(Error::Invalid("extension data must assign a lattice element per world".into()));
    }
    for (w, v) in base.leq_pairs() {
        if !lattice.leq(values[v], values[w]) {
            return Err(Error::NotMonotone(format!(
                "{} <= {} but f({}) is not below f({})",
                base.name(w),
                base.name(v),
                base.name(v),
                base.name(w)
            )));
        }
    }
    Ok(UpsetExtension {
        base,
        lattice,
        values,
    })
}

impl UpsetExtension<'_> {
    /// `S |-> join of f(w) over w in S`.
    pub fn apply(&self, s: Mask) -> usize {
        self.lattice.join_of(bits(s).map(|w| self.values[w]))
    }

    /// `d |-> {w | f(w) <= d}`.
    pub fn nerve(&self, d: usize) -> Mask {
        (0..self.base.len())
            .filter(|&w| self.lattice.leq(self.values[w], d))
            .fold(0, |acc, w| acc | 1 << w)
    }

    pub fn is_adjunction(&self) -> bool {
        self.base.upset_masks_uncapped().into_iter().all(|s| {
            (0..self.lattice.len()).all(|d| self.lattice.leq(self.apply(s), d) == (s & !self.nerve(d) == 0))
        })
    }
}

/// Both routes of the lemma relating open (resp. surjective) maps to
/// preimages that preserve implication (resp. are injective).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OpenLemmaVerdict {
    pub open: bool,
    pub preserves_exponentials: bool,
    pub surjective: bool,
    pub preimage_injective: bool,
}

impl OpenLemmaVerdict {
    pub fn agrees(&self) -> bool {
        self.open == self.preserves_exponentials && self.surjective == self.preimage_injective
    }
}

pub fn open_iff_exponential_check(f: &MonotoneMap, cap: usize) -> Result<OpenLemmaVerdict> {
    let src = f.source();
    let tgt = f.target();
    let ups = tgt.upset_masks(cap)?;
    src.upset_masks(cap)?;
    let preserves_exponentials = ups.iter().all(|&x| {
        ups.iter().all(|&y| {
            preimage(f, heyting_imp(tgt, x, y)) == heyting_imp(src, preimage(f, x), preimage(f, y))
        })
    });
    let mut images: Vec<Mask> = ups.iter().map(|&s| preimage(f, s)).collect();
    images.sort_unstable();
    images.dedup();
    Ok(OpenLemmaVerdict {
        open: f.is_open(),
        preserves_exponentials,
        surjective: f.is_surjective(),
        preimage_injective: images.len() == ups.len(),
    })
}
