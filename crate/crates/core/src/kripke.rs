//! One-dimensional semantics: Kripke satisfaction and the upper-set algebra
//! interpretation, plus the checks that relate them.

use std::collections::{BTreeMap, HashMap};
use std::hash::{BuildHasherDefault, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::lattice::heyting_imp;
use crate::modal::Bimodule;
use crate::order::{bits, Mask, Poset, UpperSet};

#[derive(Clone, Debug)]
pub struct KripkeModel {
    frame: Arc<Poset>,
    rel: Option<Bimodule>,
    valuation: BTreeMap<String, Mask>,
}

impl KripkeModel {
    pub fn new(frame: Arc<Poset>, rel: Option<Bimodule>, valuation: BTreeMap<String, Mask>) -> Result<Self> {
        if let Some(r) = &rel {
            if !r.is_endo() || **r.source() != *frame {
                return Err(Error::BaseMismatch);
            }
        }
        for (var, &m) in &valuation {
            if !frame.is_up_closed(m) {
                return Err(Error::Invalid(format!("valuation of `{var}` is not up-closed")));
            }
        }
        Ok(KripkeModel { frame, rel, valuation })
    }

    pub fn frame(&self) -> &Arc<Poset> {
        &self.frame
    }

    pub fn rel(&self) -> Option<&Bimodule> {
        self.rel.as_ref()
    }

    pub fn valuation(&self) -> &BTreeMap<String, Mask> {
        &self.valuation
    }

    fn check_formula(&self, phi: &Formula) -> Result<()> {
        if let Some(v) = phi.find_var(&|v| self.valuation.contains_key(v)) {
            return Err(Error::UnknownVariable(v.to_string()));
        }
        if phi.is_modal() && self.rel.is_none() {
            return Err(Error::NoAccessibilityRelation);
        }
        Ok(())
    }
}

#[derive(Default)]
struct AddrHasher(u64);

impl Hasher for AddrHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 ^ b as u64).wrapping_mul(0x100_0000_01b3);
        }
    }

    fn write_usize(&mut self, n: usize) {
        self.0 = (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }
}

type Memo = HashMap<*const Formula, Mask, BuildHasherDefault<AddrHasher>>;

/// Evaluates formulas against one model by both routes, memoising every
/// subformula by address so that formula families sharing subterms are
/// cheap. The clause route decides each world separately from the truth
/// sets of the immediate subformulas; the algebra route composes the
/// operations of `Up(W)`.
pub struct Evaluator<'m> {
    model: &'m KripkeModel,
    clauses: Memo,
    algebra: Memo,
    keep: Vec<Arc<Formula>>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m KripkeModel) -> Self {
        Evaluator {
            model,
            clauses: Memo::default(),
            algebra: Memo::default(),
            keep: Vec::new(),
        }
    }

    pub fn satisfying_worlds(&mut self, phi: &Arc<Formula>) -> Result<Mask> {
        if let Some(&m) = self.clauses.get(&Arc::as_ptr(phi)) {
            return Ok(m);
        }
        self.model.check_formula(phi)?;
        self.keep.push(phi.clone());
        Ok(self.sat(phi))
    }

    pub fn interpret(&mut self, phi: &Arc<Formula>) -> Result<Mask> {
        if let Some(&m) = self.algebra.get(&Arc::as_ptr(phi)) {
            return Ok(m);
        }
        self.model.check_formula(phi)?;
        self.keep.push(phi.clone());
        Ok(self.alg(phi))
    }

    /// Both routes, with the first disagreeing world as the error.
    pub fn check(&mut self, phi: &Arc<Formula>) -> Result<Mask> {
        let by_clauses = self.satisfying_worlds(phi)?;
        let by_algebra = self.interpret(phi)?;
        if by_clauses != by_algebra {
            let w = (by_clauses ^ by_algebra).trailing_zeros() as usize;
            return Err(Error::EquivalenceFailure {
                world: self.model.frame.name(w).to_string(),
                formula: phi.to_string(),
            });
        }
        Ok(by_clauses)
    }

    fn sat(&mut self, phi: &Formula) -> Mask {
        let key = phi as *const Formula;
        if let Some(&m) = self.clauses.get(&key) {
            return m;
        }
        let m = self.model;
        let frame = &m.frame;
        let worlds = 0..frame.len();
        let holds = |s: Mask, w: usize| s >> w & 1 == 1;
        let out = match phi {
            Formula::Bottom => 0,
            Formula::Top => frame.full(),
            Formula::Var(p) => m.valuation[p],
            Formula::And(a, b) => {
                let (sa, sb) = (self.sat(a), self.sat(b));
                worlds.filter(|&w| holds(sa, w) && holds(sb, w)).fold(0, |acc, w| acc | 1 << w)
            }
            Formula::Or(a, b) => {
                let (sa, sb) = (self.sat(a), self.sat(b));
                worlds.filter(|&w| holds(sa, w) || holds(sb, w)).fold(0, |acc, w| acc | 1 << w)
            }
            Formula::Imp(a, b) => {
                let (sa, sb) = (self.sat(a), self.sat(b));
                worlds
                    .filter(|&w| (0..frame.len()).filter(|&v| frame.leq(w, v)).all(|v| !holds(sa, v) || holds(sb, v)))
                    .fold(0, |acc, w| acc | 1 << w)
            }
            Formula::Box(a) => {
                let sa = self.sat(a);
                let r = m.rel.as_ref().expect("checked");
                worlds
                    .filter(|&w| (0..frame.len()).filter(|&v| r.related(w, v)).all(|v| holds(sa, v)))
                    .fold(0, |acc, w| acc | 1 << w)
            }
            Formula::DiaBlack(a) => {
                let sa = self.sat(a);
                let r = m.rel.as_ref().expect("checked");
                worlds
                    .filter(|&w| (0..frame.len()).filter(|&v| r.related(v, w)).any(|v| holds(sa, v)))
                    .fold(0, |acc, w| acc | 1 << w)
            }
        };
        self.clauses.insert(key, out);
        out
    }

    fn alg(&mut self, phi: &Formula) -> Mask {
        let key = phi as *const Formula;
        if let Some(&m) = self.algebra.get(&key) {
            return m;
        }
        let m = self.model;
        let out = match phi {
            Formula::Bottom => 0,
            Formula::Top => m.frame.full(),
            Formula::Var(p) => m.valuation[p],
            Formula::And(a, b) => self.alg(a) & self.alg(b),
            Formula::Or(a, b) => self.alg(a) | self.alg(b),
            Formula::Imp(a, b) => {
                let (x, y) = (self.alg(a), self.alg(b));
                heyting_imp(&m.frame, x, y)
            }
            Formula::Box(a) => {
                let x = self.alg(a);
                m.rel.as_ref().expect("checked").box_raw(x)
            }
            Formula::DiaBlack(a) => {
                let x = self.alg(a);
                m.rel.as_ref().expect("checked").dia_raw(x)
            }
        };
        self.algebra.insert(key, out);
        out
    }
}

pub fn kripke_sat(model: &KripkeModel, world: &str, phi: &Formula) -> Result<bool> {
    let w = model
        .frame
        .index(world)
        .map_err(|_| Error::UnknownWorld(world.to_string()))?;
    Ok(satisfying_worlds(model, phi)? >> w & 1 == 1)
}

/// The set of worlds satisfying `phi`, computed clause by clause.
pub fn satisfying_worlds(model: &KripkeModel, phi: &Formula) -> Result<Mask> {
    model.check_formula(phi)?;
    Ok(Evaluator::new(model).sat(phi))
}

/// Compositional evaluation in `Up(W)`.
pub fn interpret(model: &KripkeModel, phi: &Formula) -> Result<UpperSet> {
    model.check_formula(phi)?;
    Ok(UpperSet(Evaluator::new(model).alg(phi)))
}

/// Satisfaction with the box clause that also quantifies over later
/// worlds: `w |= box phi` iff for all `w' >= w` and all `v` with `w' R v`,
/// `v |= phi`. Other clauses are the usual ones.
pub fn satisfying_worlds_upward_box(model: &KripkeModel, phi: &Formula) -> Result<Mask> {
    model.check_formula(phi)?;
    fn go(m: &KripkeModel, phi: &Formula) -> Mask {
        let frame = &m.frame;
        let n = frame.len();
        let select = |keep: &dyn Fn(usize) -> bool| (0..n).filter(|&w| keep(w)).fold(0, |acc, w| acc | 1 << w);
        match phi {
            Formula::Box(a) => {
                let sa = go(m, a);
                let r = m.rel.as_ref().expect("checked");
                select(&|w| {
                    (0..n)
                        .filter(|&w2| frame.leq(w, w2))
                        .all(|w2| (0..n).all(|v| !r.related(w2, v) || sa >> v & 1 == 1))
                })
            }
            Formula::And(a, b) => go(m, a) & go(m, b),
            Formula::Or(a, b) => go(m, a) | go(m, b),
            Formula::Imp(a, b) => heyting_imp(frame, go(m, a), go(m, b)),
            Formula::DiaBlack(a) => {
                let sa = go(m, a);
                let r = m.rel.as_ref().expect("checked");
                select(&|w| (0..n).any(|v| r.related(v, w) && sa >> v & 1 == 1))
            }
            Formula::Bottom => 0,
            Formula::Top => frame.full(),
            Formula::Var(p) => m.valuation[p],
        }
    }
    Ok(go(model, phi))
}

/// Asserts that satisfaction and interpretation agree at every world.
pub fn theorem_equiv_check(model: &KripkeModel, phi: &Formula) -> Result<bool> {
    let by_clauses = satisfying_worlds(model, phi)?;
    let by_algebra = interpret(model, phi)?.0;
    if by_clauses != by_algebra {
        let w = (by_clauses ^ by_algebra).trailing_zeros() as usize;
        return Err(Error::EquivalenceFailure {
            world: model.frame.name(w).to_string(),
            formula: phi.to_string(),
        });
    }
    Ok(true)
}

/// Iterates over all valuations of `vars` by upper sets of `frame`.
pub fn for_each_valuation(
    frame: &Poset,
    vars: &[String],
    cap: usize,
    mut visit: impl FnMut(&BTreeMap<String, Mask>) -> bool,
) -> Result<bool> {
    let ups = frame.upset_masks(cap)?;
    if vars.len() > cap {
        return Err(Error::cap("variables", vars.len(), cap));
    }
    let mut idx = vec![0usize; vars.len()];
    loop {
        let val: BTreeMap<String, Mask> = vars.iter().cloned().zip(idx.iter().map(|&i| ups[i])).collect();
        if !visit(&val) {
            return Ok(false);
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(true);
            }
            idx[k] += 1;
            if idx[k] < ups.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// `phi` holds at every world under every valuation of its variables.
pub fn frame_valid(frame: &Arc<Poset>, rel: Option<&Bimodule>, phi: &Formula, cap: usize) -> Result<bool> {
    if frame.len() > cap {
        return Err(Error::cap("frame", frame.len(), cap));
    }
    if phi.is_modal() && rel.is_none() {
        return Err(Error::NoAccessibilityRelation);
    }
    let vars: Vec<String> = phi.vars().into_iter().collect();
    let full = frame.full();
    let mut failure = None;
    let ok = for_each_valuation(frame, &vars, cap, |val| {
        let m = KripkeModel {
            frame: frame.clone(),
            rel: rel.cloned(),
            valuation: val.clone(),
        };
        match satisfying_worlds(&m, phi) {
            Ok(s) => s == full,
            Err(e) => {
                failure = Some(e);
                false
            }
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(ok),
    }
}

/// Names of the worlds in `mask`.
pub fn world_names(frame: &Poset, mask: Mask) -> Vec<String> {
    bits(mask).map(|i| frame.name(i).to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn chain_model(rel: Option<Bimodule>) -> KripkeModel {
        let c = Arc::new(Poset::new(&["a", "b"], &[("a", "b")]).unwrap());
        let mut v = BTreeMap::new();
        v.insert("p".to_string(), 0b10);
        KripkeModel::new(c, rel, v).unwrap()
    }

    #[test]
    fn excluded_middle_fails_at_bottom() {
        let m = chain_model(None);
        let phi = parse_formula("p | (p -> false)").unwrap();
        assert!(!kripke_sat(&m, "a", &phi).unwrap());
        assert!(kripke_sat(&m, "b", &phi).unwrap());
        assert_eq!(interpret(&m, &phi).unwrap(), UpperSet(0b10));
    }

    #[test]
    fn box_true_everywhere() {
        let c = Arc::new(Poset::chain(3));
        for r in [Bimodule::full(c.clone()), Bimodule::empty(c.clone()), Bimodule::order(c.clone())] {
            let m = KripkeModel::new(c.clone(), Some(r), BTreeMap::new()).unwrap();
            let phi = parse_formula("box true").unwrap();
            for w in c.names() {
                assert!(kripke_sat(&m, w, &phi).unwrap());
            }
        }
    }

    #[test]
    fn dia_with_full_relation() {
        let c = Arc::new(Poset::new(&["a", "b"], &[("a", "b")]).unwrap());
        let m = chain_model(Some(Bimodule::full(c)));
        let phi = parse_formula("dia p").unwrap();
        assert!(kripke_sat(&m, "a", &phi).unwrap());
        assert_eq!(interpret(&m, &phi).unwrap(), UpperSet(0b11));
        assert_eq!(interpret(&m, &parse_formula("true").unwrap()).unwrap(), UpperSet(0b11));
        assert_eq!(interpret(&m, &parse_formula("false").unwrap()).unwrap(), UpperSet(0));
    }

    #[test]
    fn error_paths() {
        let m = chain_model(None);
        let p = parse_formula("p").unwrap();
        assert_eq!(kripke_sat(&m, "z", &p), Err(Error::UnknownWorld("z".into())));
        let q = parse_formula("q").unwrap();
        assert_eq!(kripke_sat(&m, "a", &q), Err(Error::UnknownVariable("q".into())));
        let bp = parse_formula("box p").unwrap();
        assert_eq!(kripke_sat(&m, "a", &bp), Err(Error::NoAccessibilityRelation));
        assert_eq!(interpret(&m, &bp), Err(Error::NoAccessibilityRelation));
    }

    #[test]
    fn frame_validity_examples() {
        let lem = parse_formula("p | (p -> false)").unwrap();
        let id = parse_formula("p -> p").unwrap();
        for w in [Poset::chain(3), Poset::discrete(3), Poset::new(&["x", "y", "z"], &[("x", "z"), ("y", "z")]).unwrap()] {
            assert!(frame_valid(&Arc::new(w), None, &id, 6).unwrap());
        }
        let c = Arc::new(Poset::chain(2));
        assert!(!frame_valid(&c, None, &lem, 6).unwrap());
        assert!(frame_valid(&Arc::new(Poset::discrete(3)), None, &lem, 6).unwrap());
    }

    #[test]
    fn theorem_on_small_case() {
        let c = Arc::new(Poset::new(&["a", "b"], &[("a", "b")]).unwrap());
        let m = chain_model(Some(Bimodule::full(c)));
        for s in ["dia p -> box p", "box (p | ~p)", "dia (p & ~p)", "(dia p -> q) -> p"] {
            let phi = parse_formula(s).unwrap();
            let mut m2 = m.valuation().clone();
            m2.insert("q".into(), 0);
            let m2 = KripkeModel::new(m.frame().clone(), m.rel().cloned(), m2).unwrap();
            assert!(theorem_equiv_check(&m2, &phi).unwrap());
        }
    }
}
