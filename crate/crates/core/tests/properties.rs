use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kripkekit::category::{cauchy_completion, FinCategory};
use kripkekit::formula::{parse_formula, random_formula};
use kripkekit::io::PosetFile;
use kripkekit::lattice::UpsetLattice;
use kripkekit::modal::Bimodule;
use kripkekit::order::{Poset, UpperSet};
use kripkekit::presheaf::{coyoneda, random_presheaf, yoneda_bijection, Presheaf};
use kripkekit::verify::fixture_categories;

fn poset(seed: u64, n: usize) -> Arc<Poset> {
    Arc::new(Poset::random(n, 0.4, &mut ChaCha8Rng::seed_from_u64(seed)))
}

fn upsets(p: &Poset) -> Vec<UpperSet> {
    p.upper_sets(6).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn formulas_reparse_to_themselves(seed in any::<u64>(), depth in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = random_formula(&["p", "q", "r"], depth, true, &mut rng);
        let back = parse_formula(&phi.to_string()).unwrap();
        prop_assert_eq!(&*back, &*phi);
    }

    #[test]
    fn heyting_residuation(seed in any::<u64>(), n in 1usize..6, picks in prop::array::uniform3(any::<prop::sample::Index>())) {
        let p = poset(seed, n);
        let up = upsets(&p);
        let [a, b, c] = picks.map(|i| *i.get(&up));
        let l = UpsetLattice::new(p, 6).unwrap();
        let lhs = l.meet(c, a).unwrap().0 & !b.0 == 0;
        let rhs = c.0 & !l.imp(a, b).unwrap().0 == 0;
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn box_and_dia_are_adjoint(seed in any::<u64>(), n in 1usize..6, density in 0.0f64..1.0, s in any::<prop::sample::Index>(), t in any::<prop::sample::Index>()) {
        let p = poset(seed, n);
        let r = Bimodule::random(&p, density, &mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let up = upsets(&p);
        let (s, t) = (s.get(&up).0, t.get(&up).0);
        let dia = r.dia_black(s).unwrap();
        let bx = r.boxed(t).unwrap();
        prop_assert!(p.is_up_closed(dia) && p.is_up_closed(bx));
        prop_assert_eq!(dia & !t == 0, s & !bx == 0);
    }

    #[test]
    fn up_sets_determine_the_poset(seed in any::<u64>(), n in 1usize..6) {
        let p = poset(seed, n);
        let l = UpsetLattice::new(p.clone(), 6).unwrap().to_finite_lattice();
        let rec = l.reconstruct().unwrap();
        prop_assert!(p.isomorphism_to(rec.upsets.base()).is_some());
    }

    #[test]
    fn poset_files_roundtrip(seed in any::<u64>(), n in 1usize..7) {
        let p = poset(seed, n);
        let back = PosetFile::of(&p).build().unwrap();
        prop_assert_eq!(&back, &*p);
    }

    #[test]
    fn representables_and_colimits(seed in any::<u64>(), which in 0usize..3, gens in 1usize..4, merges in 0usize..5) {
        let (_, base) = fixture_categories().swap_remove(which);
        let p = random_presheaf(&base, gens, merges, &mut ChaCha8Rng::seed_from_u64(seed));
        for w in 0..base.num_objects() {
            prop_assert_eq!(yoneda_bijection(&p, w).unwrap().transformations.len(), p.size(w));
        }
        prop_assert!(coyoneda(&p, 64).unwrap().is_iso(&p));
        let back = Presheaf::from_file(base.clone(), &p.to_file()).unwrap();
        prop_assert_eq!(back, p);
    }
}

#[test]
fn completion_of_a_poset_adds_nothing() {
    for n in 1..5 {
        let c = Arc::new(FinCategory::from_poset(&Poset::chain(n)));
        let k = cauchy_completion(&c).category;
        assert_eq!((k.num_objects(), k.num_arrows()), (c.num_objects(), c.num_arrows()));
    }
}

#[test]
fn category_files_roundtrip() {
    for (_, c) in fixture_categories() {
        let back = FinCategory::from_file(&c.to_file()).unwrap();
        assert_eq!(back, *c);
    }
}
