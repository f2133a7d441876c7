//! Bimodules on posets and the modalities they induce on upper sets.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{preimage, AdjointTriple};
use crate::order::{bits, Mask, MonotoneMap, Poset};

/// A relation `R` from `W1` to `W2` with `w' <= w R v <= v'` implying `w' R v'`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bimodule {
    source: Arc<Poset>,
    target: Arc<Poset>,
    /// `rel[w]` is the mask of `v` with `w R v`.
    rel: Vec<Mask>,
}

impl Bimodule {
    /// Validates the bimodule law; the relation is taken as given.
    pub fn new(source: Arc<Poset>, target: Arc<Poset>, pairs: &[(usize, usize)]) -> Result<Self> {
        let rel = Self::rows(&source, &target, pairs)?;
        let b = Bimodule { source, target, rel };
        b.validate()?;
        Ok(b)
    }

    /// The least bimodule containing `pairs`.
    pub fn closure_of(source: Arc<Poset>, target: Arc<Poset>, pairs: &[(usize, usize)]) -> Result<Self> {
        let raw = Self::rows(&source, &target, pairs)?;
        let rel = (0..source.len())
            .map(|w| target.up_closure(bits(source.up(w)).fold(0, |acc, u| acc | raw[u])))
            .collect();
        Ok(Bimodule { source, target, rel })
    }

    pub fn from_names(
        source: Arc<Poset>,
        target: Arc<Poset>,
        pairs: &[(&str, &str)],
        close: bool,
    ) -> Result<Self> {
        let idx = pairs
            .iter()
            .map(|(a, b)| Ok((source.index(a)?, target.index(b)?)))
            .collect::<Result<Vec<_>>>()?;
        if close {
            Self::closure_of(source, target, &idx)
        } else {
            Self::new(source, target, &idx)
        }
    }

    fn rows(source: &Poset, target: &Poset, pairs: &[(usize, usize)]) -> Result<Vec<Mask>> {
        let mut rel = vec![0; source.len()];
        for &(w, v) in pairs {
            if w >= source.len() {
                return Err(Error::UnknownElement(format!("#{w}")));
            }
            if v >= target.len() {
                return Err(Error::UnknownElement(format!("#{v}")));
            }
            rel[w] |= 1 << v;
        }
        Ok(rel)
    }

    fn validate(&self) -> Result<()> {
        for w in 0..self.source.len() {
            for v in bits(self.rel[w]) {
                for w_lo in bits(self.source.down(w)) {
                    for v_hi in bits(self.target.up(v)) {
                        if self.rel[w_lo] >> v_hi & 1 == 0 {
                            return Err(Error::BimoduleLawViolation {
                                w_lo: self.source.name(w_lo).into(),
                                w: self.source.name(w).into(),
                                v: self.target.name(v).into(),
                                v_hi: self.target.name(v_hi).into(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The order relation itself.
    pub fn order(w: Arc<Poset>) -> Self {
        let rel = (0..w.len()).map(|i| w.up(i)).collect();
        Bimodule {
            source: w.clone(),
            target: w,
            rel,
        }
    }

    pub fn full(w: Arc<Poset>) -> Self {
        let rel = vec![w.full(); w.len()];
        Bimodule {
            source: w.clone(),
            target: w,
            rel,
        }
    }

    pub fn empty(w: Arc<Poset>) -> Self {
        let rel = vec![0; w.len()];
        Bimodule {
            source: w.clone(),
            target: w,
            rel,
        }
    }

    pub fn source(&self) -> &Arc<Poset> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Poset> {
        &self.target
    }

    pub fn related(&self, w: usize, v: usize) -> bool {
        self.rel[w] >> v & 1 == 1
    }

    /// `{v | w R v}`.
    pub fn successors(&self, w: usize) -> Mask {
        self.rel[w]
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.source.len())
            .flat_map(|w| bits(self.rel[w]).map(move |v| (w, v)))
            .collect()
    }

    pub fn is_endo(&self) -> bool {
        Arc::ptr_eq(&self.source, &self.target) || self.source == self.target
    }

    pub fn is_subrelation(&self, other: &Bimodule) -> bool {
        self.rel.iter().zip(&other.rel).all(|(a, b)| a & !b == 0)
    }

    fn check_operand(&self, s: Mask) -> Result<()> {
        if !self.is_endo() || !self.source.is_up_closed(s) {
            return Err(Error::BaseMismatch);
        }
        Ok(())
    }

    /// `{w | exists v in S with v R w}`.
    pub fn dia_black(&self, s: Mask) -> Result<Mask> {
        self.check_operand(s)?;
        Ok(self.dia_raw(s))
    }

    /// `{w | every v with w R v lies in S}`.
    pub fn boxed(&self, s: Mask) -> Result<Mask> {
        self.check_operand(s)?;
        Ok(self.box_raw(s))
    }

    pub(crate) fn dia_raw(&self, s: Mask) -> Mask {
        bits(s).fold(0, |acc, v| acc | self.rel[v])
    }

    pub(crate) fn box_raw(&self, s: Mask) -> Mask {
        (0..self.source.len())
            .filter(|&w| self.rel[w] & !s == 0)
            .fold(0, |acc, w| acc | 1 << w)
    }

    /// Every bimodule on `w`: exactly the upper sets of `Op(W) x W`.
    pub fn enumerate(w: &Arc<Poset>, cap: usize) -> Result<Vec<Bimodule>> {
        if w.len() > cap {
            return Err(Error::cap("poset", w.len(), cap));
        }
        let n = w.len();
        let product = w.op_product(w)?;
        Ok(product
            .upset_masks_uncapped()
            .into_iter()
            .map(|m| {
                let rel = (0..n).map(|a| (m >> (a * n)) & crate::order::full_mask(n)).collect();
                Bimodule {
                    source: w.clone(),
                    target: w.clone(),
                    rel,
                }
            })
            .collect())
    }

    pub fn random<R: rand::Rng>(w: &Arc<Poset>, density: f64, rng: &mut R) -> Self {
        let n = w.len();
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if rng.gen_bool(density) {
                    pairs.push((a, b));
                }
            }
        }
        Self::closure_of(w.clone(), w.clone(), &pairs).expect("indices in range")
    }
}

/// Reads off the bimodule of a join-preserving endomap of `Up(W)`:
/// `w R v` iff `v` lies in `dia(up w)`.
pub fn bimodule_from_adjunction(
    base: Arc<Poset>,
    cap: usize,
    dia: impl Fn(Mask) -> Mask,
) -> Result<Bimodule> {
    let ups = base.upset_masks(cap)?;
    for &s in &ups {
        if !base.is_up_closed(dia(s)) {
            return Err(Error::Invalid("map leaves the upper sets".into()));
        }
    }
    if dia(0) != 0 {
        return Err(Error::NotJoinPreserving("empty set is not sent to empty set".into()));
    }
    for &s in &ups {
        for &t in &ups {
            if dia(s | t) != dia(s) | dia(t) {
                return Err(Error::NotJoinPreserving(format!(
                    "{{{}}} and {{{}}}",
                    base.mask_names(s).join(","),
                    base.mask_names(t).join(",")
                )));
            }
        }
    }
    let rel = (0..base.len()).map(|w| dia(base.up(w))).collect();
    let b = Bimodule {
        source: base.clone(),
        target: base,
        rel,
    };
    b.validate()?;
    Ok(b)
}

/// Does `f` carry `R` into `R'`?
pub fn is_bimodule_morphism(f: &MonotoneMap, r: &Bimodule, r2: &Bimodule) -> Result<bool> {
    check_endo_pair(f, r, r2)?;
    Ok((0..r.source.len()).all(|w| {
        let fw = f.apply(w);
        bits(r.rel[w]).all(|v| r2.related(fw, f.apply(v)))
    }))
}

/// The lemma-side characterization: `f^* box_{R'} T` is contained in
/// `box_R f^* T` for every upper set `T`.
pub fn bimodule_morphism_via_box(f: &MonotoneMap, r: &Bimodule, r2: &Bimodule, cap: usize) -> Result<bool> {
    check_endo_pair(f, r, r2)?;
    let ups = f.target().upset_masks(cap)?;
    f.source().upset_masks(cap)?;
    Ok(ups
        .iter()
        .all(|&t| preimage(f, r2.box_raw(t)) & !r.box_raw(preimage(f, t)) == 0))
}

fn check_endo_pair(f: &MonotoneMap, r: &Bimodule, r2: &Bimodule) -> Result<()> {
    let same = |a: &Arc<Poset>, b: &Arc<Poset>| Arc::ptr_eq(a, b) || **a == **b;
    if !r.is_endo() || !r2.is_endo() || !same(f.source(), &r.source) || !same(f.target(), &r2.source) {
        return Err(Error::BaseMismatch);
    }
    Ok(())
}

/// The three characterizations of modal openness, computed separately.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModalOpenRoutes {
    /// `f(w) R' v` implies some `w R w'` with `f(w') <= v`.
    pub direct: bool,
    /// `box_R f^* = f^* box_{R'}`.
    pub box_route: bool,
    /// `f_! dia_R = dia_{R'} f_!`.
    pub dia_route: bool,
}

impl ModalOpenRoutes {
    pub fn agree(&self) -> bool {
        self.direct == self.box_route && self.box_route == self.dia_route
    }
}

pub fn modal_open_routes(f: &MonotoneMap, r: &Bimodule, r2: &Bimodule, cap: usize) -> Result<ModalOpenRoutes> {
    if !is_bimodule_morphism(f, r, r2)? {
        let (w, v) = r
            .pairs()
            .into_iter()
            .find(|&(w, v)| !r2.related(f.apply(w), f.apply(v)))
            .expect("a violating pair exists");
        return Err(Error::NotABimoduleMorphism(
            r.source.name(w).into(),
            r.source.name(v).into(),
        ));
    }
    let src = f.source();
    let tgt = f.target();
    let direct = (0..src.len()).all(|w| {
        bits(r2.successors(f.apply(w))).all(|v| {
            bits(r.successors(w)).any(|w2| tgt.leq(f.apply(w2), v))
        })
    });
    let tgt_ups = tgt.upset_masks(cap)?;
    let src_ups = src.upset_masks(cap)?;
    let box_route = tgt_ups
        .iter()
        .all(|&t| r.box_raw(preimage(f, t)) == preimage(f, r2.box_raw(t)));
    let triple = AdjointTriple::new(f.clone());
    let dia_route = src_ups
        .iter()
        .all(|&s| triple.lower(r.dia_raw(s)) == r2.dia_raw(triple.lower(s)));
    Ok(ModalOpenRoutes {
        direct,
        box_route,
        dia_route,
    })
}

/// Modal openness, after checking that all three routes coincide.
pub fn is_modally_open(f: &MonotoneMap, r: &Bimodule, r2: &Bimodule, cap: usize) -> Result<bool> {
    let routes = modal_open_routes(f, r, r2, cap)?;
    if !routes.agree() {
        return Err(Error::Invalid(format!("modal openness routes disagree: {routes:?}")));
    }
    Ok(routes.direct)
}
