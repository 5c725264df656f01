use jetidf_core::cdiff::{adjoint, apply_op, compose, green_witness, linearization, ModElem};
use jetidf_core::derivations::KappaField;
use jetidf_core::sample::{random_cstar_parity, random_element, random_module, random_op, SampleBounds};
use jetidf_core::BundleConfig;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn bounds() -> SampleBounds {
    SampleBounds { max_jet: 1, max_degree: 2, max_terms: 2, max_gens: 1, use_base: true }
}

fn config(rng: &mut StdRng) -> BundleConfig {
    BundleConfig::new(rng.gen_range(1..=2), rng.gen_range(1..=2), rng.gen_range(1..=2)).unwrap()
}

fn parity(rng: &mut StdRng, cfg: BundleConfig) -> bool {
    cfg.k > 1 && rng.gen_bool(0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn adjoint_is_involutive(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = config(&mut rng);
        let (p, q) = (random_module(&mut rng, cfg), random_module(&mut rng, cfg));
        let odd = parity(&mut rng, cfg);
        let op = random_op(&mut rng, cfg, &bounds(), &p, &q, odd, 3);
        prop_assert_eq!(adjoint(&adjoint(&op)), op);
    }

    #[test]
    fn composition_matches_application(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = config(&mut rng);
        let b = bounds();
        let (p, q, r) = (random_module(&mut rng, cfg), random_module(&mut rng, cfg), random_module(&mut rng, cfg));
        let (oa, ob, oe) = (parity(&mut rng, cfg), parity(&mut rng, cfg), parity(&mut rng, cfg));
        let a = random_op(&mut rng, cfg, &b, &p, &q, oa, 2);
        let bo = random_op(&mut rng, cfg, &b, &q, &r, ob, 2);
        let e = random_element(&mut rng, cfg, &b, &p, oe);
        let ba = compose(&bo, &a).unwrap();
        prop_assert_eq!(apply_op(&ba, &e).unwrap(), apply_op(&bo, &apply_op(&a, &e).unwrap()).unwrap());
        // adjoint reverses composition with the Koszul sign of the factors
        let lhs = adjoint(&ba);
        let rhs = compose(&adjoint(&a), &adjoint(&bo)).unwrap();
        prop_assert_eq!(lhs, if oa && ob { rhs.neg() } else { rhs });
        let c = random_op(&mut rng, cfg, &b, &r, &p, false, 1);
        prop_assert_eq!(compose(&c, &ba).unwrap(), compose(&compose(&c, &bo).unwrap(), &a).unwrap());
    }

    #[test]
    fn green_formula_holds(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = config(&mut rng);
        let b = bounds();
        let (p, q) = (random_module(&mut rng, cfg), random_module(&mut rng, cfg));
        let odd = parity(&mut rng, cfg);
        let op = random_op(&mut rng, cfg, &b, &p, &q, odd, 3);
        let (pp, pq) = (parity(&mut rng, cfg), parity(&mut rng, cfg));
        let e = random_element(&mut rng, cfg, &b, &p, pp);
        let psi = random_element(&mut rng, cfg, &b, &q.adjoint(), pq);
        let w = green_witness(&op, &psi, &e).unwrap();
        prop_assert!(w.verify(), "lhs {} rhs {}", w.lhs, w.rhs);
    }

    #[test]
    fn linearization_is_signed_prolongation(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = config(&mut rng);
        let b = bounds();
        let desc = random_module(&mut rng, cfg);
        let px = parity(&mut rng, cfg);
        let xi: ModElem = random_element(&mut rng, cfg, &b, &desc, px);
        let pc = parity(&mut rng, cfg);
        let mut chi = KappaField::zero(cfg);
        for s in cfg.lower_slot_sets() {
            for j in 1..=cfg.m {
                chi.set(j, s, random_cstar_parity(&mut rng, cfg, &b, pc ^ s.parity())).unwrap();
            }
        }
        let l = linearization(&xi).unwrap();
        let got = apply_op(&l, &ModElem::from_field(&chi)).unwrap();
        let expect = xi.map(|c| chi.act(c)).signed(px && pc);
        prop_assert_eq!(got, expect);
    }
}
