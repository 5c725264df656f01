//! Vertical and C-derivations of `Lambda_{k-1}`, the module of generating
//! fields `Lambda_{k-1} kappa` and evolutionary prolongation.
//!
//! A generating field `chi = sum chi^j_K V_j^K` stores only its `sigma = 0`
//! coordinates; the evolutionary derivation `E_chi` is reconstructed on
//! demand by `E_chi(d^v_K u^j_sigma) = D_sigma chi^j_K`. Its parity is
//! `|chi^j_K| + |K|`, the same for every component of a homogeneous field.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::calculus::{classify, dv, total_derivative_mu, total_derivative_unchecked};
use crate::coeff::{Poly, Q};
use crate::config::{BundleConfig, JetCoordinate, MultiIndex, SlotSet};
use crate::error::{AlgebraError, Result};
use crate::form::{FormExpr, Generator};

/// Index `(j, K)` of the local basis `V_j^K` of `Lambda_{k-1} kappa`.
pub type FieldIndex = (usize, SlotSet);

/// Basis `V_j^K` in module order: `K` by bitmask, then `j`.
pub fn kappa_basis(cfg: BundleConfig) -> Vec<FieldIndex> {
    cfg.lower_slot_sets()
        .into_iter()
        .flat_map(|s| (1..=cfg.m).map(move |j| (j, s)))
        .collect()
}

/// Element of `Lambda_{k-1} kappa` with components in `C*Lambda_{k-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KappaField {
    config: BundleConfig,
    comps: BTreeMap<FieldIndex, FormExpr>,
}

impl KappaField {
    pub fn zero(config: BundleConfig) -> Self {
        KappaField { config, comps: BTreeMap::new() }
    }

    /// Field with the given components; every component must lie in
    /// `C*Lambda_{k-1}` and every `K` in `{1, ..., k-1}`.
    pub fn from_components(
        config: BundleConfig,
        comps: impl IntoIterator<Item = (FieldIndex, FormExpr)>,
    ) -> Result<Self> {
        let mut f = KappaField::zero(config);
        for ((j, s), v) in comps {
            f.set(j, s, v)?;
        }
        Ok(f)
    }

    /// Single-component field `value * V_j^{emptyset}`.
    pub fn scalar(config: BundleConfig, j: usize, value: FormExpr) -> Result<Self> {
        KappaField::from_components(config, [((j, SlotSet::EMPTY), value)])
    }

    pub fn set(&mut self, j: usize, s: SlotSet, value: FormExpr) -> Result<()> {
        let cfg = self.config;
        if j == 0 || j > cfg.m {
            return Err(AlgebraError::CoordinateOutOfRange(format!("V{j} with m={}", cfg.m)));
        }
        if s.contains(cfg.k) || s.iter().any(|x| x > cfg.k) {
            return Err(AlgebraError::Domain(format!(
                "field index K={s} not inside {{1..{}}}",
                cfg.k - 1
            )));
        }
        if value.config() != cfg {
            return Err(AlgebraError::MixedConfig(value.config().to_string(), cfg.to_string()));
        }
        if !classify(&value).in_cstar {
            return Err(AlgebraError::Domain(
                "field component outside C*Lambda_{k-1}".into(),
            ));
        }
        if value.is_zero() {
            self.comps.remove(&(j, s));
        } else {
            self.comps.insert((j, s), value);
        }
        Ok(())
    }

    pub fn config(&self) -> BundleConfig {
        self.config
    }

    pub fn get(&self, j: usize, s: SlotSet) -> FormExpr {
        self.comps.get(&(j, s)).cloned().unwrap_or_else(|| FormExpr::zero(self.config))
    }

    pub fn components(&self) -> impl Iterator<Item = (&FieldIndex, &FormExpr)> {
        self.comps.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Total parity `|chi^j_K| + |K|`, if homogeneous.
    pub fn parity(&self) -> Option<bool> {
        let mut out: Option<bool> = None;
        for ((_, s), v) in &self.comps {
            let p = v.parity()? ^ s.parity();
            match out {
                None => out = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        Some(out.unwrap_or(false))
    }

    /// `(even part, odd part)` by total parity.
    pub fn parity_parts(&self) -> (KappaField, KappaField) {
        let mut even = KappaField::zero(self.config);
        let mut odd = KappaField::zero(self.config);
        for (&(j, s), v) in &self.comps {
            let (e, o) = v.parity_parts();
            let (to_even, to_odd) = if s.parity() { (o, e) } else { (e, o) };
            if !to_even.is_zero() {
                even.comps.insert((j, s), to_even);
            }
            if !to_odd.is_zero() {
                odd.comps.insert((j, s), to_odd);
            }
        }
        (even, odd)
    }

    pub fn map(&self, f: impl Fn(&FormExpr) -> FormExpr) -> KappaField {
        let mut out = KappaField::zero(self.config);
        for (&k, v) in &self.comps {
            let w = f(v);
            if !w.is_zero() {
                out.comps.insert(k, w);
            }
        }
        out
    }

    pub fn scale(&self, c: &Q) -> KappaField {
        self.map(|v| v.scale(c))
    }

    pub fn signed(&self, odd: bool) -> KappaField {
        if odd {
            -self
        } else {
            self.clone()
        }
    }

    /// `D_sigma chi^j_K`, the value of `E_chi` on `d^v_K u^j_sigma`.
    pub fn prolonged(&self, j: usize, s: SlotSet, sigma: &MultiIndex) -> FormExpr {
        match self.comps.get(&(j, s)) {
            Some(v) => total_derivative_unchecked(sigma, v),
            None => FormExpr::zero(self.config),
        }
    }

    /// `E_chi(omega)`; generators outside `Lambda_{k-1}` (horizontal ones and
    /// those carrying slot `k`) are treated as a constant frame.
    pub fn act(&self, w: &FormExpr) -> FormExpr {
        let (even, odd) = self.parity_parts();
        let mut out = FormExpr::zero(w.config());
        for (part, parity) in [(even, false), (odd, true)] {
            if part.is_zero() {
                continue;
            }
            out = &out + &part.act_homogeneous(parity, w);
        }
        out
    }

    fn act_homogeneous(&self, parity: bool, w: &FormExpr) -> FormExpr {
        let cfg = self.config;
        let k = cfg.k;
        w.apply_derivation(
            parity,
            &|c: &Poly| {
                let mut acc = FormExpr::zero(cfg);
                for dep in c.dependencies() {
                    if let JetCoordinate::Fiber(j, sigma) = &dep {
                        let d = c.partial(&dep);
                        if !d.is_zero() {
                            let val = self.prolonged(*j, SlotSet::EMPTY, sigma);
                            acc = &acc + &val.mul_poly(&d);
                        }
                    }
                }
                acc
            },
            &|g: &Generator| match g {
                Generator::Vertical { s, j, sigma } if !s.contains(k) => {
                    self.prolonged(*j, *s, sigma)
                }
                _ => FormExpr::zero(cfg),
            },
        )
    }

    /// Highest jet order among the components.
    pub fn jet_order(&self) -> u32 {
        self.comps.values().map(|v| v.jet_order()).max().unwrap_or(0)
    }
}

impl Add for &KappaField {
    type Output = KappaField;
    fn add(self, rhs: &KappaField) -> KappaField {
        assert_eq!(self.config, rhs.config);
        let mut out = self.clone();
        for (&k, v) in &rhs.comps {
            let s = &out.get(k.0, k.1) + v;
            if s.is_zero() {
                out.comps.remove(&k);
            } else {
                out.comps.insert(k, s);
            }
        }
        out
    }
}

impl Sub for &KappaField {
    type Output = KappaField;
    fn sub(self, rhs: &KappaField) -> KappaField {
        self + &(-rhs)
    }
}

impl Neg for &KappaField {
    type Output = KappaField;
    fn neg(self) -> KappaField {
        self.map(|v| -v)
    }
}

impl fmt::Display for KappaField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .comps
            .iter()
            .map(|((j, s), v)| format!("V{j}{s}: {v}"))
            .collect();
        write!(f, "[{}]", parts.join("; "))
    }
}

/// Key of a vertical derivation value: `(j, sigma, K)`; `K = emptyset`
/// stands for the coordinate `u^j_sigma` itself.
pub type VerticalKey = (usize, MultiIndex, SlotSet);

/// A homogeneous derivation of `Lambda_{k-1}` that vanishes on base
/// coordinates and horizontal generators, given by its values on fiber
/// coordinates and vertical generators up to a jet-order bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerticalDerivation {
    config: BundleConfig,
    parity: bool,
    /// Forms of jet order above this bound are outside the known domain.
    max_order: u32,
    values: BTreeMap<VerticalKey, FormExpr>,
}

impl VerticalDerivation {
    pub fn new(config: BundleConfig, parity: bool, max_order: u32) -> Self {
        VerticalDerivation { config, parity, max_order, values: BTreeMap::new() }
    }

    pub fn set(&mut self, key: VerticalKey, value: FormExpr) -> Result<()> {
        let (j, sigma, s) = &key;
        self.config.check_coordinate(&JetCoordinate::Fiber(*j, sigma.clone()))?;
        if s.contains(self.config.k) {
            return Err(AlgebraError::Domain("vertical derivations act on Lambda_{k-1}".into()));
        }
        if let Some(p) = value.parity() {
            if !value.is_zero() && p != self.parity ^ s.parity() {
                return Err(AlgebraError::Domain("value parity inconsistent with derivation".into()));
            }
        }
        if value.is_zero() {
            self.values.remove(&key);
        } else {
            self.values.insert(key, value);
        }
        Ok(())
    }

    pub fn parity(&self) -> bool {
        self.parity
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn value(&self, key: &VerticalKey) -> FormExpr {
        self.values.get(key).cloned().unwrap_or_else(|| FormExpr::zero(self.config))
    }

    pub fn values(&self) -> impl Iterator<Item = (&VerticalKey, &FormExpr)> {
        self.values.iter()
    }

    /// The dual basis derivation `V_j^{sigma,K}`: value 1 on
    /// `d^v_K u^j_sigma` (on `u^j_sigma` when `K` is empty), 0 elsewhere.
    pub fn dual_basis(config: BundleConfig, j: usize, sigma: MultiIndex, s: SlotSet) -> Result<Self> {
        let mut d = VerticalDerivation::new(config, s.parity(), u32::MAX);
        d.set((j, sigma, s), FormExpr::one(config))?;
        Ok(d)
    }

    pub fn apply(&self, w: &FormExpr) -> Result<FormExpr> {
        if w.jet_order() > self.max_order {
            return Err(AlgebraError::Domain(format!(
                "jet order {} beyond the derivation's table (<= {})",
                w.jet_order(),
                self.max_order
            )));
        }
        let cfg = self.config;
        let k = cfg.k;
        Ok(w.apply_derivation(
            self.parity,
            &|c: &Poly| {
                let mut acc = FormExpr::zero(cfg);
                for dep in c.dependencies() {
                    if let JetCoordinate::Fiber(j, sigma) = &dep {
                        let val = self.value(&(*j, sigma.clone(), SlotSet::EMPTY));
                        if !val.is_zero() {
                            acc = &acc + &val.mul_poly(&c.partial(&dep));
                        }
                    }
                }
                acc
            },
            &|g: &Generator| match g {
                Generator::Vertical { s, j, sigma } if !s.contains(k) => {
                    self.value(&(*j, sigma.clone(), *s))
                }
                _ => FormExpr::zero(cfg),
            },
        ))
    }
}

/// A vertical derivation obtained by prolongation of a generating field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvolutionaryDerivation {
    pub derivation: VerticalDerivation,
}

/// `E_chi` tabulated up to jet order `max_order`. The field must be
/// homogeneous.
pub fn prolong(chi: &KappaField, max_order: u32) -> Result<EvolutionaryDerivation> {
    let cfg = chi.config();
    let parity = chi
        .parity()
        .ok_or_else(|| AlgebraError::Domain("prolong needs a homogeneous field".into()))?;
    let mut d = VerticalDerivation::new(cfg, parity, max_order);
    for (&(j, s), _) in chi.components() {
        for sigma in MultiIndex::all_up_to(cfg.n, max_order) {
            d.set((j, sigma.clone(), s), chi.prolonged(j, s, &sigma))?;
        }
    }
    Ok(EvolutionaryDerivation { derivation: d })
}

/// Reads back the generating field of a vertical derivation, after
/// checking on its whole table that it commutes with total derivatives,
/// i.e. `E(d^v_K u_sigma) = D_sigma E(d^v_K u)`.
pub fn restrict(e: &VerticalDerivation) -> Result<KappaField> {
    let cfg = e.config;
    let zero = MultiIndex::zero(cfg.n);
    for ((j, sigma, s), v) in e.values() {
        let base = e.value(&(*j, zero.clone(), *s));
        if total_derivative_unchecked(sigma, &base) != *v {
            return Err(AlgebraError::NotEvolutionary(format!(
                "value on d^v_{s} u{j}_{sigma:?} is not D_sigma of the base value"
            )));
        }
    }
    let mut chi = KappaField::zero(cfg);
    for (j, s) in kappa_basis(cfg) {
        chi.set(j, s, e.value(&(j, zero.clone(), s)))?;
    }
    Ok(chi)
}

/// C-derivation `D_mu^K`: for `K = emptyset` the total derivative `D_mu`;
/// otherwise the left partial derivative along `d_K x^mu`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CDerivation {
    pub config: BundleConfig,
    pub mu: usize,
    pub slots: SlotSet,
}

impl CDerivation {
    pub fn apply(&self, w: &FormExpr) -> FormExpr {
        if self.slots.is_empty() {
            return total_derivative_mu(self.mu, w);
        }
        let cfg = self.config;
        let target = Generator::horizontal(self.slots, self.mu);
        w.apply_derivation(
            self.slots.parity(),
            &|_| FormExpr::zero(cfg),
            &|g| if *g == target { FormExpr::one(cfg) } else { FormExpr::zero(cfg) },
        )
    }
}

pub enum Derivation<'a> {
    Vertical(&'a VerticalDerivation),
    C(&'a CDerivation),
}

/// Applies a derivation through the graded Leibniz rule.
pub fn apply_derivation(x: Derivation<'_>, w: &FormExpr) -> Result<FormExpr> {
    match x {
        Derivation::Vertical(v) => v.apply(w),
        Derivation::C(c) => Ok(c.apply(w)),
    }
}

/// Graded bracket `{chi_1, chi_2}`: the generating field of the graded
/// commutator `E_1 E_2 - (-1)^{|1||2|} E_2 E_1`, read off on `d^v_K u^j`.
pub fn bracket(a: &KappaField, b: &KappaField) -> KappaField {
    let cfg = a.config();
    let (ae, ao) = a.parity_parts();
    let (be, bo) = b.parity_parts();
    let mut out = KappaField::zero(cfg);
    for (x, px) in [(&ae, false), (&ao, true)] {
        for (y, py) in [(&be, false), (&bo, true)] {
            if x.is_zero() || y.is_zero() {
                continue;
            }
            let part = y.map(|v| x.act(v));
            let back = x.map(|v| y.act(v));
            out = &(&out + &part) - &back.signed(px && py);
        }
    }
    out
}

/// `U_m = d_m^v` restricted to `C_o Lambda_{k-1}`: components `d_m^v(d^v_K u^j)`.
pub fn u_field(cfg: BundleConfig, m: usize) -> Result<KappaField> {
    if m == 0 || m >= cfg.k {
        return Err(AlgebraError::SlotOutOfRange { slot: m, k: cfg.k - 1 });
    }
    let mut chi = KappaField::zero(cfg);
    for (j, s) in kappa_basis(cfg) {
        let base = if s.is_empty() {
            FormExpr::from_poly(cfg, Poly::coord(JetCoordinate::Fiber(j, MultiIndex::zero(cfg.n))))
        } else {
            FormExpr::gen_unchecked(cfg, Generator::vertical(s, j, MultiIndex::zero(cfg.n)))
        };
        chi.set(j, s, dv(m, &base))?;
    }
    Ok(chi)
}

/// An element `sum omega_i (x) xi0_i` of a horizontal module
/// `C*Lambda_{k-1} (x)_{C^infty(M)} P_0`, with `P_0` realized by forms with
/// base-only coefficients and horizontal generators.
#[derive(Clone, Debug)]
pub struct HorizontalElement {
    pub parts: Vec<(FormExpr, FormExpr)>,
}

impl HorizontalElement {
    pub fn flatten(&self, cfg: BundleConfig) -> FormExpr {
        self.parts
            .iter()
            .fold(FormExpr::zero(cfg), |acc, (w, x)| &acc + &(w * x))
    }
}

/// `E_chi xi = sum E_chi(omega_i) (x) xi0_i`.
pub fn act_horizontal(chi: &KappaField, xi: &HorizontalElement) -> Result<FormExpr> {
    let cfg = chi.config();
    let mut out = FormExpr::zero(cfg);
    for (w, x) in &xi.parts {
        if !classify(w).in_cstar {
            return Err(AlgebraError::Domain("horizontal factor outside C*Lambda_{k-1}".into()));
        }
        let base_ok = x
            .terms()
            .all(|(m, c)| c.is_base_only() && m.factors().iter().all(|(g, _)| !g.is_vertical()));
        if !base_ok {
            return Err(AlgebraError::Domain("P_0 part is not a base-manifold form".into()));
        }
        out = &out + &(&chi.act(w) * x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{q, Atom};

    fn cfg(n: usize, m: usize, k: usize) -> BundleConfig {
        BundleConfig::new(n, m, k).unwrap()
    }

    fn u(c: BundleConfig, s: &[u32]) -> FormExpr {
        FormExpr::from_poly(c, Poly::atom(Atom::u(1, MultiIndex::new(s.to_vec()))))
    }

    #[test]
    fn prolong_translation_field() {
        let c = cfg(1, 1, 1);
        let chi = KappaField::scalar(c, 1, u(c, &[1])).unwrap();
        let e = prolong(&chi, 3).unwrap();
        for o in 0..=3u32 {
            let v = e.derivation.value(&(1, MultiIndex::new(vec![o]), SlotSet::EMPTY));
            assert_eq!(v, u(c, &[o + 1]));
        }
    }

    #[test]
    fn prolong_constant_and_square() {
        let c = cfg(1, 1, 1);
        let one = KappaField::scalar(c, 1, FormExpr::one(c)).unwrap();
        let e = prolong(&one, 2).unwrap();
        assert_eq!(e.derivation.value(&(1, MultiIndex::zero(1), SlotSet::EMPTY)), FormExpr::one(c));
        assert!(e.derivation.value(&(1, MultiIndex::new(vec![1]), SlotSet::EMPTY)).is_zero());
        let sq = KappaField::scalar(c, 1, &u(c, &[0]) * &u(c, &[0])).unwrap();
        let e = prolong(&sq, 2).unwrap();
        let expect = &(&u(c, &[0]) * &u(c, &[2])).scale_int(2) + &(&u(c, &[1]) * &u(c, &[1])).scale_int(2);
        assert_eq!(e.derivation.value(&(1, MultiIndex::new(vec![2]), SlotSet::EMPTY)), expect);
    }

    #[test]
    fn restrict_rejects_non_evolutionary() {
        let c = cfg(1, 1, 1);
        let mut d = VerticalDerivation::new(c, false, 1);
        d.set((1, MultiIndex::zero(1), SlotSet::EMPTY), u(c, &[0])).unwrap();
        d.set((1, MultiIndex::new(vec![1]), SlotSet::EMPTY), u(c, &[0])).unwrap();
        assert!(matches!(restrict(&d), Err(AlgebraError::NotEvolutionary(_))));
        assert!(restrict(&VerticalDerivation::new(c, false, 2)).unwrap().is_zero());
    }

    #[test]
    fn dual_basis_normalization() {
        let c = cfg(1, 1, 2);
        let s = SlotSet::single(1);
        let sig = MultiIndex::new(vec![2]);
        let v = VerticalDerivation::dual_basis(c, 1, sig.clone(), s).unwrap();
        let g = FormExpr::generator(c, Generator::vertical(s, 1, sig)).unwrap();
        assert_eq!(v.apply(&g).unwrap(), FormExpr::one(c));
        let v0 = VerticalDerivation::dual_basis(c, 1, MultiIndex::zero(1), SlotSet::EMPTY).unwrap();
        let x = FormExpr::from_poly(c, Poly::atom(Atom::x(1)));
        assert!(v0.apply(&x).unwrap().is_zero());
    }

    #[test]
    fn leibniz_on_even_square() {
        let c = cfg(1, 1, 1);
        let w = &u(c, &[0]) + &u(c, &[1]);
        let chi = KappaField::scalar(c, 1, u(c, &[2])).unwrap();
        let lhs = chi.act(&(&w * &w));
        let rhs = (&w * &chi.act(&w)).scale(&q(2));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn bracket_of_translation_and_scaling_vanishes() {
        let c = cfg(1, 1, 1);
        let a = KappaField::scalar(c, 1, u(c, &[1])).unwrap();
        let b = KappaField::scalar(c, 1, u(c, &[0])).unwrap();
        assert!(bracket(&a, &b).is_zero());
        assert!(bracket(&a, &a).is_zero());
    }

    #[test]
    fn u_field_matches_vertical_differential() {
        let c = cfg(1, 1, 2);
        let um = u_field(c, 1).unwrap();
        let theta = FormExpr::generator(c, Generator::vertical(SlotSet::single(1), 1, MultiIndex::zero(1))).unwrap();
        assert_eq!(um.get(1, SlotSet::EMPTY), theta);
        assert!(um.get(1, SlotSet::single(1)).is_zero());
        assert!(u_field(c, 2).is_err());
        assert!(bracket(&um, &um).is_zero());
        let w = &(&u(c, &[1]) * &u(c, &[0])) * &theta;
        assert_eq!(um.act(&w), dv(1, &w));
    }

    #[test]
    fn act_horizontal_top_form() {
        let c = cfg(1, 1, 2);
        let vol = FormExpr::generator(c, Generator::horizontal(SlotSet::single(2), 1)).unwrap();
        let a = &u(c, &[0]) * &u(c, &[1]);
        let chi = KappaField::scalar(c, 1, u(c, &[2])).unwrap();
        let xi = HorizontalElement { parts: vec![(a.clone(), vol.clone())] };
        assert_eq!(act_horizontal(&chi, &xi).unwrap(), &chi.act(&a) * &vol);
        let one = HorizontalElement { parts: vec![(FormExpr::one(c), vol.clone())] };
        assert!(act_horizontal(&chi, &one).unwrap().is_zero());
        // (f w) (x) xi0 and w (x) (f xi0) agree for base functions f
        let f = FormExpr::from_poly(c, Poly::atom(Atom::x(1)));
        let lhs = HorizontalElement { parts: vec![(&f * &a, vol.clone())] };
        let rhs = HorizontalElement { parts: vec![(a.clone(), &f * &vol)] };
        assert_eq!(act_horizontal(&chi, &lhs).unwrap(), act_horizontal(&chi, &rhs).unwrap());
    }
}
