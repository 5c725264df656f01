//! The multiple bicomplex on `Lambda_k`: the differentials `d_m^v`, `d_m^h`,
//! `d_m = d_m^v + d_m^h`, the slot involutions `kappa_{1m}`, total
//! derivatives, the Cartan/horizontal splitting and subalgebra membership.
//!
//! Every `d_m` is an odd derivation. On generators:
//!
//! * `d_m^v x = 0`, `d_m^h x^mu = d_m x^mu`;
//! * `d_m^v u^j_sigma = d^v_m u^j_sigma`, `d_m^h u^j_sigma = sum_mu u^j_{sigma+1_mu} d_m x^mu`;
//! * `d_m` applied to `d_S(...)` with `m` not in `S` moves into sorted
//!   position past the `#{s in S : s < m}` odd differentials before it, and
//!   vanishes when `m` is in `S`, except
//! * `d_m^h (d^v_S u^j_sigma) = (-1)^{|S|} sum_mu (d^v_S u^j_{sigma+1_mu}) d_m x^mu`,
//!   obtained by anticommuting `d_m^h` to the right and using that every
//!   vertical differential kills horizontal generators.

use crate::coeff::Poly;
use crate::config::{BundleConfig, JetCoordinate, MultiIndex, SlotSet};
use crate::error::{AlgebraError, Result};
use crate::form::{FormExpr, Generator, Monomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SlotKind {
    Vertical,
    Horizontal,
    Full,
}

fn gen_form(cfg: BundleConfig, g: Generator) -> FormExpr {
    FormExpr::gen_unchecked(cfg, g)
}

/// `d_m^v f` for a coefficient.
pub(crate) fn dv_coeff(cfg: BundleConfig, m: usize, f: &Poly) -> FormExpr {
    let mut out = FormExpr::zero(cfg);
    for dep in f.dependencies() {
        if let JetCoordinate::Fiber(j, sigma) = &dep {
            let d = f.partial(&dep);
            if !d.is_zero() {
                let g = Generator::vertical(SlotSet::single(m), *j, sigma.clone());
                out = &out + &gen_form(cfg, g).mul_poly(&d);
            }
        }
    }
    out
}

/// `d_m^h f = sum_mu D_mu(f) d_m x^mu` for a coefficient.
pub(crate) fn dh_coeff(cfg: BundleConfig, m: usize, f: &Poly) -> FormExpr {
    let mut out = FormExpr::zero(cfg);
    for mu in 1..=cfg.n {
        let d = f.total_derivative(mu, cfg.n);
        if !d.is_zero() {
            let g = Generator::horizontal(SlotSet::single(m), mu);
            out = &out + &gen_form(cfg, g).mul_poly(&d);
        }
    }
    out
}

fn dv_gen(cfg: BundleConfig, m: usize, g: &Generator) -> FormExpr {
    match g {
        Generator::Horizontal { .. } => FormExpr::zero(cfg),
        Generator::Vertical { s, .. } => {
            if s.contains(m) {
                FormExpr::zero(cfg)
            } else {
                gen_form(cfg, g.with_slots(s.with(m))).signed(s.count_below(m) % 2 == 1)
            }
        }
    }
}

fn dh_gen(cfg: BundleConfig, m: usize, g: &Generator) -> FormExpr {
    match g {
        Generator::Horizontal { s, .. } => {
            if s.contains(m) {
                FormExpr::zero(cfg)
            } else {
                gen_form(cfg, g.with_slots(s.with(m))).signed(s.count_below(m) % 2 == 1)
            }
        }
        Generator::Vertical { s, j, sigma } => {
            let mut out = FormExpr::zero(cfg);
            for mu in 1..=cfg.n {
                let v = gen_form(cfg, Generator::vertical(*s, *j, sigma.bump(mu)));
                let h = gen_form(cfg, Generator::horizontal(SlotSet::single(m), mu));
                out = &out + &(&v * &h);
            }
            out.signed(s.parity())
        }
    }
}

/// `d_m^v`, `d_m^h` or `d_m` applied to a form.
pub fn differential(m: usize, kind: SlotKind, w: &FormExpr) -> Result<FormExpr> {
    let cfg = w.config();
    cfg.check_slot(m)?;
    Ok(match kind {
        SlotKind::Vertical => {
            w.apply_derivation(true, &|c| dv_coeff(cfg, m, c), &|g| dv_gen(cfg, m, g))
        }
        SlotKind::Horizontal => {
            w.apply_derivation(true, &|c| dh_coeff(cfg, m, c), &|g| dh_gen(cfg, m, g))
        }
        SlotKind::Full => {
            &differential(m, SlotKind::Vertical, w)? + &differential(m, SlotKind::Horizontal, w)?
        }
    })
}

/// Shorthand for `d_m^h` when the slot is known to be valid.
pub(crate) fn dv(m: usize, w: &FormExpr) -> FormExpr {
    differential(m, SlotKind::Vertical, w).expect("slot checked by caller")
}

fn swap_slot(s: usize, m: usize) -> usize {
    if s == 1 {
        m
    } else if s == m {
        1
    } else {
        s
    }
}

/// Image of a generator under `kappa_{1m}`: the slot sequence is relabelled
/// and re-sorted, with the sign of the sorting permutation.
fn kappa_gen(cfg: BundleConfig, m: usize, g: &Generator) -> FormExpr {
    let seq: Vec<usize> = g.slots().iter().map(|s| swap_slot(s, m)).collect();
    let mut inversions = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    gen_form(cfg, g.with_slots(SlotSet::from_slots(&seq))).signed(inversions % 2 == 1)
}

/// The involution `kappa_{1m}` exchanging slots 1 and `m`.
pub fn kappa(m: usize, w: &FormExpr) -> Result<FormExpr> {
    let cfg = w.config();
    cfg.check_slot(m)?;
    if m == 1 {
        return Ok(w.clone());
    }
    Ok(w.substitute_generators(&|g| kappa_gen(cfg, m, g)))
}

/// `d_K^v = d_{k_1}^v o ... o d_{k_s}^v` with `k_1 < ... < k_s`, applied
/// right to left; `d_\emptyset^v = id`.
pub fn d_kv(slots: SlotSet, w: &FormExpr) -> Result<FormExpr> {
    let cfg = w.config();
    cfg.check_slots(slots)?;
    let mut acc = w.clone();
    let ks: Vec<usize> = slots.iter().collect();
    for &m in ks.iter().rev() {
        acc = dv(m, &acc);
    }
    Ok(acc)
}

/// `D_mu` extended as an even derivation: `D_mu(d^v_S u_sigma) = d^v_S u_{sigma + 1_mu}`,
/// horizontal generators are constant.
pub(crate) fn total_derivative_mu(mu: usize, w: &FormExpr) -> FormExpr {
    let cfg = w.config();
    w.apply_derivation(
        false,
        &|c| FormExpr::from_poly(cfg, c.total_derivative(mu, cfg.n)),
        &|g| match g {
            Generator::Vertical { s, j, sigma } => {
                gen_form(cfg, Generator::vertical(*s, *j, sigma.bump(mu)))
            }
            Generator::Horizontal { .. } => FormExpr::zero(cfg),
        },
    )
}

/// `D_sigma` without the domain check (horizontal generators are treated
/// as constants of a horizontal module).
pub(crate) fn total_derivative_unchecked(sigma: &MultiIndex, w: &FormExpr) -> FormExpr {
    let mut acc = w.clone();
    for (i, &e) in sigma.entries().iter().enumerate() {
        for _ in 0..e {
            acc = total_derivative_mu(i + 1, &acc);
        }
    }
    acc
}

/// `D_sigma = D_1^{sigma_1} o ... o D_n^{sigma_n}` on `C*Lambda_{k-1}` or on coefficients.
pub fn total_derivative(sigma: &MultiIndex, w: &FormExpr) -> Result<FormExpr> {
    if sigma.arity() != w.config().n {
        return Err(AlgebraError::Shape(format!(
            "multi-index arity {} with n={}",
            sigma.arity(),
            w.config().n
        )));
    }
    if !classify(w).in_cstar {
        return Err(AlgebraError::Domain(
            "total derivative needs an element of C*Lambda_{k-1}".into(),
        ));
    }
    Ok(total_derivative_unchecked(sigma, w))
}

/// Generators of a term that carry slot `k`.
fn slot_k_factors(m: &Monomial, k: usize) -> Vec<(&Generator, u32)> {
    m.factors()
        .iter()
        .filter(|(g, _)| g.slots().contains(k))
        .map(|(g, e)| (g, *e))
        .collect()
}

/// Splits a form of slot-`k` degree one into its Cartan and horizontal parts.
pub fn split1(w: &FormExpr) -> Result<(FormExpr, FormExpr)> {
    let k = w.config().k;
    for (m, _) in w.terms() {
        let f = slot_k_factors(m, k);
        if f.len() != 1 || f[0].1 != 1 {
            return Err(AlgebraError::Domain(format!(
                "split1 needs slot-{k} degree exactly 1"
            )));
        }
    }
    let c = w.filter_terms(|m| slot_k_factors(m, k)[0].0.is_vertical());
    let h = w.filter_terms(|m| !slot_k_factors(m, k)[0].0.is_vertical());
    Ok((c, h))
}

/// Projection onto the multi-degree `(0, ..., 0, n)` component.
pub fn nu(w: &FormExpr) -> FormExpr {
    let cfg = w.config();
    let mut deg = vec![0; cfg.k];
    deg[cfg.k - 1] = cfg.n as i32;
    w.component(&deg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Classification {
    pub in_cstar: bool,
    pub in_ccirc: bool,
    pub in_hlambda: bool,
}

/// Syntactic subalgebra membership on the canonical form.
pub fn classify(w: &FormExpr) -> Classification {
    let cfg = w.config();
    let lower = SlotSet((1u16 << (cfg.k - 1)) as u8 - 1);
    let mut cls = Classification { in_cstar: true, in_ccirc: true, in_hlambda: true };
    for (m, c) in w.terms() {
        for (g, _) in m.factors() {
            match g {
                Generator::Vertical { s, sigma, .. } => {
                    cls.in_hlambda = false;
                    if !s.is_subset_of(lower) {
                        cls.in_cstar = false;
                    }
                    if !sigma.is_zero() {
                        cls.in_ccirc = false;
                    }
                }
                Generator::Horizontal { .. } => {
                    cls.in_cstar = false;
                }
            }
        }
        if c.jet_order() > 0 {
            cls.in_ccirc = false;
        }
    }
    cls.in_ccirc &= cls.in_cstar;
    cls
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{q_frac, Atom};

    fn cfg(n: usize, m: usize, k: usize) -> BundleConfig {
        BundleConfig::new(n, m, k).unwrap()
    }

    fn ucoord(c: BundleConfig, j: usize, s: &[u32]) -> FormExpr {
        FormExpr::from_poly(c, Poly::atom(Atom::u(j, MultiIndex::new(s.to_vec()))))
    }

    fn hx(c: BundleConfig, slots: &[usize], mu: usize) -> FormExpr {
        FormExpr::generator(c, Generator::horizontal(SlotSet::from_slots(slots), mu)).unwrap()
    }

    fn vu(c: BundleConfig, slots: &[usize], j: usize, s: &[u32]) -> FormExpr {
        FormExpr::generator(
            c,
            Generator::vertical(SlotSet::from_slots(slots), j, MultiIndex::new(s.to_vec())),
        )
        .unwrap()
    }

    #[test]
    fn vertical_of_u_is_cartan_generator() {
        let c = cfg(1, 1, 1);
        let u = ucoord(c, 1, &[0]);
        assert_eq!(differential(1, SlotKind::Vertical, &u).unwrap(), vu(c, &[1], 1, &[0]));
    }

    #[test]
    fn horizontal_of_u() {
        let c = cfg(1, 1, 1);
        let u = ucoord(c, 1, &[0]);
        let expect = &ucoord(c, 1, &[1]) * &hx(c, &[1], 1);
        assert_eq!(differential(1, SlotKind::Horizontal, &u).unwrap(), expect);
    }

    #[test]
    fn differentials_of_dx_anticommute() {
        let c = cfg(1, 1, 2);
        let a = differential(2, SlotKind::Full, &hx(c, &[1], 1)).unwrap();
        let b = differential(1, SlotKind::Full, &hx(c, &[2], 1)).unwrap();
        assert_eq!(a, -&b);
        assert_eq!(b, hx(c, &[1, 2], 1));
    }

    #[test]
    fn kappa_examples() {
        let c = cfg(1, 1, 2);
        assert_eq!(kappa(2, &hx(c, &[1], 1)).unwrap(), hx(c, &[2], 1));
        let w = &vu(c, &[1], 1, &[0]) * &vu(c, &[2], 1, &[0]);
        assert_eq!(kappa(2, &w).unwrap(), -&w);
        assert!(kappa(3, &w).is_err());
    }

    #[test]
    fn dkv_examples() {
        let c = cfg(1, 1, 2);
        let u = ucoord(c, 1, &[0]);
        assert_eq!(d_kv(SlotSet::EMPTY, &u).unwrap(), u);
        assert_eq!(d_kv(SlotSet::from_slots(&[1, 2]), &u).unwrap(), vu(c, &[1, 2], 1, &[0]));
        let w = d_kv(SlotSet::single(1), &u).unwrap();
        assert!(d_kv(SlotSet::single(1), &w).unwrap().is_zero());
    }

    #[test]
    fn total_derivative_examples() {
        let c = cfg(1, 1, 2);
        let s1 = MultiIndex::new(vec![1]);
        assert_eq!(total_derivative(&s1, &ucoord(c, 1, &[0])).unwrap(), ucoord(c, 1, &[1]));
        assert_eq!(
            total_derivative(&s1, &vu(c, &[1], 1, &[2])).unwrap(),
            vu(c, &[1], 1, &[3])
        );
        let x = FormExpr::from_poly(c, Poly::atom(Atom::x(1)));
        assert!(total_derivative(&MultiIndex::new(vec![2]), &x).unwrap().is_zero());
        assert!(total_derivative(&s1, &hx(c, &[1], 1)).is_err());
    }

    #[test]
    fn split_of_dk_u() {
        let c = cfg(1, 1, 1);
        let du = differential(1, SlotKind::Full, &ucoord(c, 1, &[0])).unwrap();
        let (cp, hp) = split1(&du).unwrap();
        assert_eq!(cp, vu(c, &[1], 1, &[0]));
        assert_eq!(hp, &ucoord(c, 1, &[1]) * &hx(c, &[1], 1));
        let (c2, h2) = split1(&hx(c, &[1], 1)).unwrap();
        assert!(c2.is_zero());
        assert_eq!(h2, hx(c, &[1], 1));
        assert!(split1(&ucoord(c, 1, &[0])).is_err());
    }

    #[test]
    fn nu_projects_top_component() {
        let c = cfg(1, 1, 2);
        let top = &ucoord(c, 1, &[0]) * &hx(c, &[2], 1);
        let low = ucoord(c, 1, &[0]);
        assert_eq!(nu(&(&top + &low)), top);
        assert!(nu(&vu(c, &[1], 1, &[0])).is_zero());
    }

    #[test]
    fn classify_examples() {
        let c = cfg(2, 2, 2);
        let w = &ucoord(c, 1, &[1, 0]) * &vu(c, &[1], 2, &[0, 0]);
        let cl = classify(&w);
        assert!(cl.in_cstar && !cl.in_ccirc);
        let w2 = &ucoord(c, 1, &[0, 0]) * &vu(c, &[1], 1, &[0, 0]);
        assert!(classify(&w2).in_ccirc);
        let dx = hx(c, &[1], 1);
        let cl = classify(&dx);
        assert!(!cl.in_cstar && cl.in_hlambda);
        let half = FormExpr::from_poly(c, Poly::constant(q_frac(1, 2)));
        assert!(classify(&half).in_ccirc);
    }
}
