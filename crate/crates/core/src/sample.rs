//! Seeded random generation of forms, fields and operators for property
//! suites and the `selfcheck` command.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::coeff::{Atom, Poly, Q};
use crate::config::{BundleConfig, MultiIndex, SlotSet};
use crate::form::{FormExpr, Generator};

/// Size bounds for random objects.
#[derive(Clone, Copy, Debug)]
pub struct SampleBounds {
    pub max_jet: u32,
    pub max_degree: u32,
    pub max_terms: usize,
    pub max_gens: usize,
    /// Include base coordinates `x^mu` in coefficients.
    pub use_base: bool,
}

impl Default for SampleBounds {
    fn default() -> Self {
        SampleBounds { max_jet: 2, max_degree: 2, max_terms: 3, max_gens: 2, use_base: true }
    }
}

fn small_rational<R: Rng>(rng: &mut R) -> Q {
    let num = rng.gen_range(-3i64..=3);
    let num = if num == 0 { 1 } else { num };
    let den = *[1i64, 1, 1, 2, 3].choose(rng).unwrap();
    Q::new(num.into(), den.into())
}

pub fn random_multi_index<R: Rng>(rng: &mut R, n: usize, max_order: u32) -> MultiIndex {
    let all = MultiIndex::all_up_to(n, max_order);
    all.choose(rng).unwrap().clone()
}

fn random_atom<R: Rng>(rng: &mut R, cfg: BundleConfig, b: &SampleBounds) -> Atom {
    if b.use_base && rng.gen_bool(0.2) {
        Atom::x(rng.gen_range(1..=cfg.n))
    } else {
        Atom::u(rng.gen_range(1..=cfg.m), random_multi_index(rng, cfg.n, b.max_jet))
    }
}

/// Random polynomial coefficient.
pub fn random_poly<R: Rng>(rng: &mut R, cfg: BundleConfig, b: &SampleBounds) -> Poly {
    let mut p = Poly::zero();
    for _ in 0..rng.gen_range(1..=b.max_terms) {
        let deg = rng.gen_range(0..=b.max_degree);
        let mut t = Poly::constant(small_rational(rng));
        for _ in 0..deg {
            t = &t * &Poly::atom(random_atom(rng, cfg, b));
        }
        p = &p + &t;
    }
    p
}

fn random_slots<R: Rng>(rng: &mut R, allowed: SlotSet) -> SlotSet {
    loop {
        let s = SlotSet(rng.gen::<u8>() & allowed.0);
        if !s.is_empty() {
            return s;
        }
    }
}

fn all_slots(k: usize) -> SlotSet {
    SlotSet(((1u16 << k) - 1) as u8)
}

pub fn lower_slots(k: usize) -> SlotSet {
    SlotSet(((1u16 << (k - 1)) - 1) as u8)
}

pub fn random_generator<R: Rng>(
    rng: &mut R,
    cfg: BundleConfig,
    b: &SampleBounds,
    allowed: SlotSet,
    vertical_only: bool,
) -> Generator {
    let s = random_slots(rng, allowed);
    if vertical_only || rng.gen_bool(0.5) {
        Generator::vertical(s, rng.gen_range(1..=cfg.m), random_multi_index(rng, cfg.n, b.max_jet))
    } else {
        Generator::horizontal(s, rng.gen_range(1..=cfg.n))
    }
}

fn random_with<R: Rng>(
    rng: &mut R,
    cfg: BundleConfig,
    b: &SampleBounds,
    allowed: SlotSet,
    vertical_only: bool,
) -> FormExpr {
    let mut out = FormExpr::zero(cfg);
    for _ in 0..rng.gen_range(1..=b.max_terms) {
        let mut t = FormExpr::from_poly(cfg, random_poly(rng, cfg, b));
        if !allowed.is_empty() {
            for _ in 0..rng.gen_range(0..=b.max_gens) {
                let g = random_generator(rng, cfg, b, allowed, vertical_only);
                t = &t * &FormExpr::gen_unchecked(cfg, g);
            }
        }
        out = &out + &t;
    }
    out
}

/// Random element of `Lambda_k`.
pub fn random_form<R: Rng>(rng: &mut R, cfg: BundleConfig, b: &SampleBounds) -> FormExpr {
    random_with(rng, cfg, b, all_slots(cfg.k), false)
}

/// Random element of `C*Lambda_{k-1}`.
pub fn random_cstar<R: Rng>(rng: &mut R, cfg: BundleConfig, b: &SampleBounds) -> FormExpr {
    random_with(rng, cfg, b, lower_slots(cfg.k), true)
}

/// Random homogeneous element of `C*Lambda_{k-1}` of the requested parity
/// (zero if none was produced after a few draws).
pub fn random_cstar_parity<R: Rng>(
    rng: &mut R,
    cfg: BundleConfig,
    b: &SampleBounds,
    odd: bool,
) -> FormExpr {
    if cfg.k == 1 && odd {
        return FormExpr::zero(cfg);
    }
    for _ in 0..16 {
        let f = random_cstar(rng, cfg, b);
        let (e, o) = f.parity_parts();
        let pick = if odd { o } else { e };
        if !pick.is_zero() {
            return pick;
        }
    }
    FormExpr::zero(cfg)
}

/// Random top horizontal form `A d_k x^1 ... d_k x^n` with `A` in `C*Lambda_{k-1}`.
pub fn random_lagrangian<R: Rng>(rng: &mut R, cfg: BundleConfig, b: &SampleBounds) -> FormExpr {
    let a = random_cstar(rng, cfg, b);
    &a * &crate::secondary::volume(cfg)
}

/// Random graded basis of rank 1 or 2.
pub fn random_module<R: Rng>(rng: &mut R, cfg: BundleConfig) -> crate::cdiff::ModuleDesc {
    let rank = rng.gen_range(1..=2);
    let parities = (0..rank).map(|_| cfg.k > 1 && rng.gen_bool(0.5)).collect();
    crate::cdiff::ModuleDesc::new("P", parities)
}

/// Random homogeneous element of a module.
pub fn random_element<R: Rng>(
    rng: &mut R,
    cfg: BundleConfig,
    b: &SampleBounds,
    desc: &crate::cdiff::ModuleDesc,
    odd: bool,
) -> crate::cdiff::ModElem {
    let comps = (0..desc.rank())
        .map(|i| random_cstar_parity(rng, cfg, b, odd ^ desc.parity(i)))
        .collect();
    crate::cdiff::ModElem::new(cfg, desc.clone(), comps).unwrap()
}

/// Random homogeneous operator of the given parity and order.
pub fn random_op<R: Rng>(
    rng: &mut R,
    cfg: BundleConfig,
    b: &SampleBounds,
    source: &crate::cdiff::ModuleDesc,
    target: &crate::cdiff::ModuleDesc,
    odd: bool,
    max_order: u32,
) -> crate::cdiff::CDiffOp {
    let mut op = crate::cdiff::CDiffOp::zero(cfg, source.clone(), target.clone());
    for beta in 0..target.rank() {
        for alpha in 0..source.rank() {
            for _ in 0..rng.gen_range(0..=2) {
                let sigma = random_multi_index(rng, cfg.n, max_order);
                let par = odd ^ source.parity(alpha) ^ target.parity(beta);
                let a = random_cstar_parity(rng, cfg, b, par);
                op.add_entry(beta, alpha, sigma, a).unwrap();
            }
        }
    }
    op
}
