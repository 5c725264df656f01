//! Canonical iterated differential forms.
//!
//! A [`FormExpr`] is a finite sum of `coefficient * monomial` terms where a
//! monomial is a strictly increasing list of generators with exponents.
//! Generators are `d_S x^mu` (horizontal) and `d^v_S u^j_sigma` (vertical,
//! iterated Cartan forms), with parity `|S| mod 2`. Reordering two adjacent
//! generators costs the Koszul sign of their parities.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::coeff::{fmt_coordinate, q, Poly, Q};
use crate::config::{BundleConfig, MultiIndex, SlotSet};
use crate::error::{AlgebraError, Result};

/// A free generator of `Lambda_k` over the coefficient ring.
///
/// `Vertical { s, j, sigma }` is `d^v_{s_1} ... d^v_{s_r} u^j_sigma` with
/// `s_1 < ... < s_r`, applied right to left as written. `Horizontal { s, mu }`
/// is `d_{s_1} ... d_{s_r} x^mu`. Variant order and field order give the
/// fixed generator order: vertical before horizontal, then `S` as an
/// integer, then `(j, sigma)` or `mu`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    Vertical { s: SlotSet, j: usize, sigma: MultiIndex },
    Horizontal { s: SlotSet, mu: usize },
}

impl Generator {
    pub fn vertical(s: SlotSet, j: usize, sigma: MultiIndex) -> Self {
        Generator::Vertical { s, j, sigma }
    }

    pub fn horizontal(s: SlotSet, mu: usize) -> Self {
        Generator::Horizontal { s, mu }
    }

    pub fn slots(&self) -> SlotSet {
        match self {
            Generator::Vertical { s, .. } | Generator::Horizontal { s, .. } => *s,
        }
    }

    /// `|S| mod 2`.
    pub fn parity(&self) -> bool {
        self.slots().parity()
    }

    pub fn is_vertical(&self) -> bool {
        matches!(self, Generator::Vertical { .. })
    }

    pub fn with_slots(&self, s: SlotSet) -> Self {
        match self {
            Generator::Vertical { j, sigma, .. } => Generator::vertical(s, *j, sigma.clone()),
            Generator::Horizontal { mu, .. } => Generator::horizontal(s, *mu),
        }
    }

    pub fn jet_order(&self) -> u32 {
        match self {
            Generator::Vertical { sigma, .. } => sigma.order(),
            Generator::Horizontal { .. } => 0,
        }
    }

    pub fn validate(&self, cfg: &BundleConfig) -> Result<()> {
        let s = self.slots();
        if s.is_empty() {
            return Err(AlgebraError::Domain("generator with empty slot set".into()));
        }
        cfg.check_slots(s)?;
        match self {
            Generator::Vertical { j, sigma, .. } => cfg.check_coordinate(
                &crate::config::JetCoordinate::Fiber(*j, sigma.clone()),
            ),
            Generator::Horizontal { mu, .. } => {
                cfg.check_coordinate(&crate::config::JetCoordinate::Base(*mu))
            }
        }
    }
}

impl fmt::Display for Generator {
    /// Nested differential notation: `dv[1](dv[2](u1_(1)))`, `d[1](x2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (op, inner) = match self {
            Generator::Vertical { j, sigma, .. } => (
                "dv",
                fmt_coordinate(&crate::config::JetCoordinate::Fiber(*j, sigma.clone())),
            ),
            Generator::Horizontal { mu, .. } => ("d", format!("x{mu}")),
        };
        let slots: Vec<usize> = self.slots().iter().collect();
        let mut s = inner;
        for slot in slots.iter().rev() {
            s = format!("{op}[{slot}]({s})");
        }
        write!(f, "{s}")
    }
}

/// Strictly increasing generator list with positive exponents; odd
/// generators always have exponent one.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<(Generator, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn single(g: Generator) -> Self {
        Monomial(vec![(g, 1)])
    }

    /// Caller guarantees the factors are sorted and valid.
    pub(crate) fn from_sorted(factors: Vec<(Generator, u32)>) -> Self {
        Monomial(factors)
    }

    pub fn factors(&self) -> &[(Generator, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parity(&self) -> bool {
        self.0.iter().filter(|(g, e)| g.parity() && e % 2 == 1).count() % 2 == 1
    }

    pub fn multidegree(&self, k: usize) -> Vec<i32> {
        let mut d = vec![0; k];
        for (g, e) in &self.0 {
            for s in g.slots().iter() {
                if s <= k {
                    d[s - 1] += *e as i32;
                }
            }
        }
        d
    }

    /// Product `self * other` brought to canonical order. Returns `None`
    /// when an odd generator would be squared, otherwise the monomial and
    /// whether the reordering sign is negative.
    pub fn wedge(&self, other: &Monomial) -> Option<(Monomial, bool)> {
        let a = &self.0;
        let b = &other.0;
        // odd_suffix[i] = number of odd factors in a[i..]
        let mut odd_suffix = vec![0usize; a.len() + 1];
        for i in (0..a.len()).rev() {
            odd_suffix[i] = odd_suffix[i + 1] + a[i].0.parity() as usize;
        }
        let mut out = Vec::with_capacity(a.len() + b.len());
        let mut neg = false;
        let (mut i, mut j) = (0, 0);
        while j < b.len() {
            if i < a.len() && a[i].0 < b[j].0 {
                out.push(a[i].clone());
                i += 1;
                continue;
            }
            let (g, e) = &b[j];
            if i < a.len() && a[i].0 == *g {
                if g.parity() {
                    return None;
                }
                out.push((g.clone(), a[i].1 + e));
                i += 1;
            } else {
                if g.parity() && odd_suffix[i] % 2 == 1 {
                    neg = !neg;
                }
                out.push((g.clone(), *e));
            }
            j += 1;
        }
        out.extend_from_slice(&a[i..]);
        Some((Monomial(out), neg))
    }

    pub fn jet_order(&self) -> u32 {
        self.0.iter().map(|(g, _)| g.jet_order()).max().unwrap_or(0)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(g, e)| if *e == 1 { g.to_string() } else { format!("{g}^{e}") })
            .collect();
        write!(f, "{}", parts.join(" ^ "))
    }
}

/// Canonical element of `Lambda_k`: no two terms share a monomial and every
/// stored coefficient is nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormExpr {
    config: BundleConfig,
    terms: BTreeMap<Monomial, Poly>,
}

impl FormExpr {
    pub fn zero(config: BundleConfig) -> Self {
        FormExpr { config, terms: BTreeMap::new() }
    }

    pub fn one(config: BundleConfig) -> Self {
        FormExpr::from_poly(config, Poly::one())
    }

    pub fn from_poly(config: BundleConfig, c: Poly) -> Self {
        FormExpr::term(config, c, Monomial::one())
    }

    pub fn constant(config: BundleConfig, c: Q) -> Self {
        FormExpr::from_poly(config, Poly::constant(c))
    }

    pub fn term(config: BundleConfig, c: Poly, m: Monomial) -> Self {
        let mut f = FormExpr::zero(config);
        f.add_term(m, c);
        f
    }

    /// A single generator, validated against the configuration.
    pub fn generator(config: BundleConfig, g: Generator) -> Result<Self> {
        g.validate(&config)?;
        Ok(FormExpr::gen_unchecked(config, g))
    }

    pub(crate) fn gen_unchecked(config: BundleConfig, g: Generator) -> Self {
        FormExpr::term(config, Poly::one(), Monomial::single(g))
    }

    pub fn config(&self) -> BundleConfig {
        self.config
    }

    /// Reinterprets the same terms under another configuration with the
    /// same `n` and `m` (used for slot-preserving promotion `k -> k + 1`).
    pub fn with_config(&self, config: BundleConfig) -> Result<Self> {
        if config.n != self.config.n || config.m != self.config.m {
            return Err(AlgebraError::MixedConfig(
                self.config.to_string(),
                config.to_string(),
            ));
        }
        for m in self.terms.keys() {
            for (g, _) in m.factors() {
                config.check_slots(g.slots())?;
            }
        }
        Ok(FormExpr { config, terms: self.terms.clone() })
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Poly)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient if the form has no generator factors.
    pub fn as_poly(&self) -> Option<Poly> {
        match self.terms.len() {
            0 => Some(Poly::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn coefficient_of(&self, m: &Monomial) -> Poly {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, m: Monomial, c: Poly) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = &*e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn assert_same(&self, other: &FormExpr) {
        assert_eq!(
            self.config, other.config,
            "operands built against different bundle configurations"
        );
    }

    pub fn scale(&self, c: &Q) -> FormExpr {
        if c.is_zero() {
            return FormExpr::zero(self.config);
        }
        FormExpr {
            config: self.config,
            terms: self.terms.iter().map(|(m, p)| (m.clone(), p.scale(c))).collect(),
        }
    }

    pub fn scale_int(&self, c: i64) -> FormExpr {
        self.scale(&q(c))
    }

    /// `(-1)^odd * self`.
    pub fn signed(&self, odd: bool) -> FormExpr {
        if odd {
            -self
        } else {
            self.clone()
        }
    }

    pub fn mul_poly(&self, c: &Poly) -> FormExpr {
        let mut out = FormExpr::zero(self.config);
        for (m, p) in &self.terms {
            out.add_term(m.clone(), p * c);
        }
        out
    }

    /// Applies a coefficient map termwise (the map must be additive).
    pub fn map_coefficients(&self, f: impl Fn(&Poly) -> Poly) -> FormExpr {
        let mut out = FormExpr::zero(self.config);
        for (m, p) in &self.terms {
            out.add_term(m.clone(), f(p));
        }
        out
    }

    /// Keeps the terms whose monomial satisfies the predicate.
    pub fn filter_terms(&self, keep: impl Fn(&Monomial) -> bool) -> FormExpr {
        FormExpr {
            config: self.config,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, p)| (m.clone(), p.clone()))
                .collect(),
        }
    }

    /// Total parity of a homogeneous form; `None` for mixed parity, `Some(false)` for zero.
    pub fn parity(&self) -> Option<bool> {
        let mut it = self.terms.keys().map(|m| m.parity());
        match it.next() {
            None => Some(false),
            Some(p) => it.all(|q| q == p).then_some(p),
        }
    }

    /// `(even part, odd part)`.
    pub fn parity_parts(&self) -> (FormExpr, FormExpr) {
        (
            self.filter_terms(|m| !m.parity()),
            self.filter_terms(|m| m.parity()),
        )
    }

    /// Homogeneous multi-degree components in increasing degree order.
    pub fn components(&self) -> Vec<(Vec<i32>, FormExpr)> {
        let mut parts: BTreeMap<Vec<i32>, FormExpr> = BTreeMap::new();
        for (m, p) in &self.terms {
            parts
                .entry(m.multidegree(self.config.k))
                .or_insert_with(|| FormExpr::zero(self.config))
                .add_term(m.clone(), p.clone());
        }
        parts.into_iter().collect()
    }

    /// The component of the given multi-degree.
    pub fn component(&self, degree: &[i32]) -> FormExpr {
        let k = self.config.k;
        self.filter_terms(|m| m.multidegree(k) == degree)
    }

    pub fn jet_order(&self) -> u32 {
        self.terms
            .iter()
            .map(|(m, p)| m.jet_order().max(p.jet_order()))
            .max()
            .unwrap_or(0)
    }

    /// Product in canonical form, refusing operands of different bundles.
    pub fn try_wedge(&self, other: &FormExpr) -> Result<FormExpr> {
        if self.config != other.config {
            return Err(AlgebraError::MixedConfig(
                self.config.to_string(),
                other.config.to_string(),
            ));
        }
        Ok(self.wedge_unchecked(other))
    }

    fn wedge_unchecked(&self, other: &FormExpr) -> FormExpr {
        let mut out = FormExpr::zero(self.config);
        for (ma, pa) in &self.terms {
            for (mb, pb) in &other.terms {
                if let Some((m, neg)) = ma.wedge(mb) {
                    let c = pa * pb;
                    out.add_term(m, if neg { -&c } else { c });
                }
            }
        }
        out
    }

    /// Applies a graded derivation of the given parity, specified by its
    /// values on coefficients and on generators, through the Leibniz rule
    /// `X(ab) = X(a) b + (-1)^{|X||a|} a X(b)`.
    pub fn apply_derivation(
        &self,
        parity: bool,
        on_coeff: &dyn Fn(&Poly) -> FormExpr,
        on_gen: &dyn Fn(&Generator) -> FormExpr,
    ) -> FormExpr {
        let cfg = self.config;
        let mut out = FormExpr::zero(cfg);
        for (m, c) in &self.terms {
            let mono = FormExpr::term(cfg, Poly::one(), m.clone());
            let dc = on_coeff(c);
            if !dc.is_zero() {
                out = &out + &(&dc * &mono);
            }
            let factors = m.factors();
            let mut prefix_parity = false;
            for (i, (g, e)) in factors.iter().enumerate() {
                let dg = on_gen(g);
                if !dg.is_zero() {
                    let prefix = Monomial(factors[..i].to_vec());
                    let suffix = Monomial(factors[i + 1..].to_vec());
                    let mut mid = FormExpr::term(cfg, c.clone(), prefix);
                    if *e > 1 {
                        let lower = Monomial(vec![(g.clone(), e - 1)]);
                        mid = &mid * &FormExpr::term(cfg, Poly::int(*e as i64), lower);
                    }
                    let piece = &(&mid * &dg) * &FormExpr::term(cfg, Poly::one(), suffix);
                    out = &out + &piece.signed(parity && prefix_parity);
                }
                if g.parity() && e % 2 == 1 {
                    prefix_parity = !prefix_parity;
                }
            }
        }
        out
    }

    /// Image under a generator substitution that is an algebra map (each
    /// generator replaced by a form of the same parity, factors multiplied
    /// in their original order). Coefficients are kept.
    pub fn substitute_generators(&self, f: &dyn Fn(&Generator) -> FormExpr) -> FormExpr {
        let cfg = self.config;
        let mut out = FormExpr::zero(cfg);
        for (m, c) in &self.terms {
            let mut acc = FormExpr::from_poly(cfg, c.clone());
            for (g, e) in m.factors() {
                let img = f(g);
                for _ in 0..*e {
                    acc = &acc * &img;
                }
            }
            out = &out + &acc;
        }
        out
    }
}

impl Add for &FormExpr {
    type Output = FormExpr;
    fn add(self, rhs: &FormExpr) -> FormExpr {
        self.assert_same(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &FormExpr {
    type Output = FormExpr;
    fn sub(self, rhs: &FormExpr) -> FormExpr {
        self.assert_same(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Neg for &FormExpr {
    type Output = FormExpr;
    fn neg(self) -> FormExpr {
        FormExpr {
            config: self.config,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul for &FormExpr {
    type Output = FormExpr;
    /// Graded-commutative product. Panics on mixed configurations; use
    /// [`wedge`] for a checked product.
    fn mul(self, rhs: &FormExpr) -> FormExpr {
        self.assert_same(rhs);
        self.wedge_unchecked(rhs)
    }
}

/// Checked graded-commutative product.
pub fn wedge(a: &FormExpr, b: &FormExpr) -> Result<FormExpr> {
    a.try_wedge(b)
}

/// Homogeneous components of a form, see [`FormExpr::components`].
pub fn components(a: &FormExpr) -> Vec<(Vec<i32>, FormExpr)> {
    a.components()
}

/// Unnormalized expression tree, as produced by a parser or by hand.
#[derive(Clone, Debug)]
pub enum RawExpr {
    Coeff(Poly),
    Gen(Generator),
    Form(FormExpr),
    Scale(Q, Box<RawExpr>),
    Sum(Vec<RawExpr>),
    /// Ordered product; factors keep their written order.
    Product(Vec<RawExpr>),
}

/// Brings a raw tree to canonical form against one configuration.
pub fn normalize(raw: &RawExpr, cfg: BundleConfig) -> Result<FormExpr> {
    Ok(match raw {
        RawExpr::Coeff(p) => {
            for c in p.dependencies() {
                cfg.check_coordinate(&c)?;
            }
            FormExpr::from_poly(cfg, p.clone())
        }
        RawExpr::Gen(g) => FormExpr::generator(cfg, g.clone())?,
        RawExpr::Form(f) => {
            if f.config() != cfg {
                return Err(AlgebraError::MixedConfig(
                    f.config().to_string(),
                    cfg.to_string(),
                ));
            }
            f.clone()
        }
        RawExpr::Scale(c, e) => normalize(e, cfg)?.scale(c),
        RawExpr::Sum(parts) => {
            let mut acc = FormExpr::zero(cfg);
            for p in parts {
                acc = &acc + &normalize(p, cfg)?;
            }
            acc
        }
        RawExpr::Product(parts) => {
            let mut acc = FormExpr::one(cfg);
            for p in parts {
                acc = &acc * &normalize(p, cfg)?;
            }
            acc
        }
    })
}

impl fmt::Display for FormExpr {
    /// Plain canonical text; the cli crate owns the full grammar-aware printer.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                if m.is_one() {
                    format!("({c})")
                } else if c.as_constant().is_some_and(|v| v.is_one()) {
                    m.to_string()
                } else {
                    format!("({c}) * {m}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
