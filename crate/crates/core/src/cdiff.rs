//! C-differential operators between horizontal modules over
//! `C*Lambda_{k-1}`, their adjoints, universal linearizations and
//! multi-operators.
//!
//! A horizontal module is free on a finite graded basis `e_alpha`. An
//! operator has entries `a^sigma_{beta alpha}` and acts by
//!
//! `q^beta = sum (-1)^{|p||alpha| + |q||beta|} a^sigma_{beta alpha} D_sigma p^alpha`,
//!
//! so that composition is the plain matrix product of scalar operators. The
//! adjoint module of `P` carries the same basis with the `dual` flag
//! toggled, and pairs with `P` into densities (coefficients of the slot-`k`
//! volume) by `<c, e> = sum (-1)^{|alpha||e| + dual(P)|alpha|} c_alpha e^alpha`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::calculus::{classify, differential, total_derivative_mu, total_derivative_unchecked, SlotKind};
use crate::coeff::{Poly, Q};
use crate::config::{BundleConfig, JetCoordinate, MultiIndex, SlotSet};
use crate::derivations::{kappa_basis, KappaField, VerticalDerivation};
use crate::error::{AlgebraError, Result};
use crate::form::{FormExpr, Generator};

/// Graded basis of a horizontal module.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModuleDesc {
    pub label: String,
    pub parities: Vec<bool>,
    pub dual: bool,
}

impl ModuleDesc {
    pub fn new(label: &str, parities: Vec<bool>) -> Self {
        ModuleDesc { label: label.to_string(), parities, dual: false }
    }

    /// Rank-one module on a basis element of the given parity.
    pub fn scalar(parity: bool) -> Self {
        ModuleDesc::new("F", vec![parity])
    }

    /// `Lambda_{k-1} kappa` on the basis `V_j^K`, parity `|K|`.
    pub fn kappa(cfg: BundleConfig) -> Self {
        ModuleDesc::new("kappa", kappa_basis(cfg).iter().map(|(_, s)| s.parity()).collect())
    }

    /// Top horizontal forms `A d_k x^1 ... d_k x^n`, basis parity `n`.
    pub fn top(cfg: BundleConfig) -> Self {
        ModuleDesc::new("B", vec![cfg.n % 2 == 1])
    }

    pub fn rank(&self) -> usize {
        self.parities.len()
    }

    pub fn parity(&self, i: usize) -> bool {
        self.parities[i]
    }

    pub fn adjoint(&self) -> Self {
        ModuleDesc { dual: !self.dual, ..self.clone() }
    }
}

impl fmt::Display for ModuleDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}(rank {})", self.label, if self.dual { "^" } else { "" }, self.rank())
    }
}

/// Element of a horizontal module, or a covector when the module is dual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModElem {
    pub config: BundleConfig,
    pub desc: ModuleDesc,
    pub comps: Vec<FormExpr>,
}

pub type Covector = ModElem;

impl ModElem {
    pub fn zero(config: BundleConfig, desc: ModuleDesc) -> Self {
        let comps = vec![FormExpr::zero(config); desc.rank()];
        ModElem { config, desc, comps }
    }

    pub fn new(config: BundleConfig, desc: ModuleDesc, comps: Vec<FormExpr>) -> Result<Self> {
        if comps.len() != desc.rank() {
            return Err(AlgebraError::Shape(format!(
                "{} components for a module of rank {}",
                comps.len(),
                desc.rank()
            )));
        }
        if let Some(c) = comps.iter().find(|c| c.config() != config) {
            return Err(AlgebraError::MixedConfig(c.config().to_string(), config.to_string()));
        }
        Ok(ModElem { config, desc, comps })
    }

    /// Element with one component, on a rank-one module.
    pub fn single(config: BundleConfig, desc: ModuleDesc, value: FormExpr) -> Result<Self> {
        ModElem::new(config, desc, vec![value])
    }

    /// The field as an element of `Lambda_{k-1} kappa`.
    pub fn from_field(chi: &KappaField) -> Self {
        let cfg = chi.config();
        let comps = kappa_basis(cfg).into_iter().map(|(j, s)| chi.get(j, s)).collect();
        ModElem { config: cfg, desc: ModuleDesc::kappa(cfg), comps }
    }

    /// Reads a `kappa`-shaped element (or covector) back as a field.
    pub fn to_field(&self) -> Result<KappaField> {
        if self.desc.label != "kappa" {
            return Err(AlgebraError::Shape(format!("{} is not the kappa module", self.desc)));
        }
        KappaField::from_components(self.config, kappa_basis(self.config).into_iter().zip(self.comps.iter().cloned()))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Total parity `|p^alpha| + |alpha|`, if homogeneous.
    pub fn parity(&self) -> Option<bool> {
        let mut out = None;
        for (i, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let p = c.parity()? ^ self.desc.parity(i);
            match out {
                None => out = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        Some(out.unwrap_or(false))
    }

    pub fn parity_parts(&self) -> (ModElem, ModElem) {
        let mut even = ModElem::zero(self.config, self.desc.clone());
        let mut odd = even.clone();
        for (i, c) in self.comps.iter().enumerate() {
            let (e, o) = c.parity_parts();
            if self.desc.parity(i) {
                even.comps[i] = o;
                odd.comps[i] = e;
            } else {
                even.comps[i] = e;
                odd.comps[i] = o;
            }
        }
        (even, odd)
    }

    pub fn map(&self, f: impl Fn(&FormExpr) -> FormExpr) -> ModElem {
        ModElem { comps: self.comps.iter().map(f).collect(), ..self.clone() }
    }

    pub fn add(&self, other: &ModElem) -> Result<ModElem> {
        same_shape(&self.desc, &other.desc)?;
        Ok(ModElem {
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &ModElem) -> Result<ModElem> {
        self.add(&other.map(|c| -c))
    }

    pub fn scale(&self, c: &Q) -> ModElem {
        self.map(|v| v.scale(c))
    }

    pub fn signed(&self, odd: bool) -> ModElem {
        if odd {
            self.map(|c| -c)
        } else {
            self.clone()
        }
    }

    pub fn jet_order(&self) -> u32 {
        self.comps.iter().map(|c| c.jet_order()).max().unwrap_or(0)
    }
}

impl fmt::Display for ModElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.comps.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join("; "))
    }
}

fn same_shape(a: &ModuleDesc, b: &ModuleDesc) -> Result<()> {
    if a != b {
        return Err(AlgebraError::Shape(format!("module {a} does not match {b}")));
    }
    Ok(())
}

fn parity_split(f: &FormExpr) -> impl Iterator<Item = (FormExpr, bool)> {
    let (e, o) = f.parity_parts();
    [(e, false), (o, true)].into_iter().filter(|(x, _)| !x.is_zero())
}

/// `<c, e>`: pairing of a covector on `P` with an element of `P`.
pub fn pair(c: &Covector, e: &ModElem) -> Result<FormExpr> {
    if c.desc != e.desc.adjoint() {
        return Err(AlgebraError::Shape(format!("cannot pair {} with {}", c.desc, e.desc)));
    }
    let (ee, eo) = e.parity_parts();
    let mut out = FormExpr::zero(e.config);
    for (part, pe) in [(ee, false), (eo, true)] {
        for (i, v) in part.comps.iter().enumerate() {
            let a = e.desc.parity(i);
            if v.is_zero() || c.comps[i].is_zero() {
                continue;
            }
            let sign = a && (pe ^ e.desc.dual);
            out = &out + &(&c.comps[i] * v).signed(sign);
        }
    }
    Ok(out)
}

/// Scalar operator `sum_sigma a_sigma D_sigma`.
pub type Entry = BTreeMap<MultiIndex, FormExpr>;

/// C-differential operator `P -> Q` with entries indexed `(beta, alpha)`
/// (target row, source column).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CDiffOp {
    pub config: BundleConfig,
    pub source: ModuleDesc,
    pub target: ModuleDesc,
    entries: BTreeMap<(usize, usize), Entry>,
}

impl CDiffOp {
    pub fn zero(config: BundleConfig, source: ModuleDesc, target: ModuleDesc) -> Self {
        CDiffOp { config, source, target, entries: BTreeMap::new() }
    }

    pub fn identity(config: BundleConfig, desc: ModuleDesc) -> Self {
        let mut op = CDiffOp::zero(config, desc.clone(), desc.clone());
        for i in 0..desc.rank() {
            op.add_entry(i, i, MultiIndex::zero(config.n), FormExpr::one(config)).unwrap();
        }
        op
    }

    /// Rank-one operator `sum a_sigma D_sigma` on `F` (even basis).
    pub fn scalar(config: BundleConfig, terms: impl IntoIterator<Item = (MultiIndex, FormExpr)>) -> Result<Self> {
        let d = ModuleDesc::scalar(false);
        let mut op = CDiffOp::zero(config, d.clone(), d);
        for (s, a) in terms {
            op.add_entry(0, 0, s, a)?;
        }
        Ok(op)
    }

    /// Adds `a D_sigma` to the entry `(beta, alpha)`.
    pub fn add_entry(&mut self, beta: usize, alpha: usize, sigma: MultiIndex, a: FormExpr) -> Result<()> {
        if beta >= self.target.rank() || alpha >= self.source.rank() {
            return Err(AlgebraError::Shape(format!(
                "entry ({beta},{alpha}) outside a {}x{} operator",
                self.target.rank(),
                self.source.rank()
            )));
        }
        if sigma.arity() != self.config.n {
            return Err(AlgebraError::Shape(format!("D{sigma:?} needs {} entries", self.config.n)));
        }
        if a.config() != self.config {
            return Err(AlgebraError::MixedConfig(a.config().to_string(), self.config.to_string()));
        }
        if !classify(&a).in_cstar {
            return Err(AlgebraError::Domain("operator entries must lie in C*Lambda_{k-1}".into()));
        }
        let row = self.entries.entry((beta, alpha)).or_default();
        let v = match row.get(&sigma) {
            Some(old) => old + &a,
            None => a,
        };
        if v.is_zero() {
            row.remove(&sigma);
        } else {
            row.insert(sigma, v);
        }
        if row.is_empty() {
            self.entries.remove(&(beta, alpha));
        }
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &Entry)> {
        self.entries.iter()
    }

    pub fn entry(&self, beta: usize, alpha: usize) -> Option<&Entry> {
        self.entries.get(&(beta, alpha))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Highest `|sigma|` with a nonzero coefficient.
    pub fn order(&self) -> u32 {
        self.entries
            .values()
            .flat_map(|e| e.keys().map(|s| s.order()))
            .max()
            .unwrap_or(0)
    }

    /// `|a| + |alpha| + |beta|`, if the same for every term.
    pub fn parity(&self) -> Option<bool> {
        let mut out = None;
        for (&(b, a), e) in &self.entries {
            for v in e.values() {
                let p = v.parity()? ^ self.source.parity(a) ^ self.target.parity(b);
                match out {
                    None => out = Some(p),
                    Some(q) if q != p => return None,
                    _ => {}
                }
            }
        }
        Some(out.unwrap_or(false))
    }

    pub fn parity_parts(&self) -> (CDiffOp, CDiffOp) {
        let mut even = CDiffOp::zero(self.config, self.source.clone(), self.target.clone());
        let mut odd = even.clone();
        for (&(b, a), e) in &self.entries {
            let shift = self.source.parity(a) ^ self.target.parity(b);
            for (s, v) in e {
                for (part, p) in parity_split(v) {
                    let dest = if p ^ shift { &mut odd } else { &mut even };
                    dest.add_entry(b, a, s.clone(), part).unwrap();
                }
            }
        }
        (even, odd)
    }

    pub fn add(&self, other: &CDiffOp) -> Result<CDiffOp> {
        same_shape(&self.source, &other.source)?;
        same_shape(&self.target, &other.target)?;
        let mut out = self.clone();
        for (&(b, a), e) in &other.entries {
            for (s, v) in e {
                out.add_entry(b, a, s.clone(), v.clone())?;
            }
        }
        Ok(out)
    }

    pub fn map_entries(&self, f: impl Fn(&FormExpr) -> FormExpr) -> CDiffOp {
        let mut out = CDiffOp::zero(self.config, self.source.clone(), self.target.clone());
        for (&(b, a), e) in &self.entries {
            for (s, v) in e {
                out.add_entry(b, a, s.clone(), f(v)).unwrap();
            }
        }
        out
    }

    pub fn neg(&self) -> CDiffOp {
        self.map_entries(|v| -v)
    }

    pub fn scale(&self, c: &Q) -> CDiffOp {
        self.map_entries(|v| v.scale(c))
    }
}

impl fmt::Display for CDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (&(b, a), e) in &self.entries {
            for (s, v) in e.iter().rev() {
                let idx: Vec<String> = s.entries().iter().map(|x| x.to_string()).collect();
                parts.push(format!("[{},{}] D({}): {}", b + 1, a + 1, idx.join(","), v));
            }
        }
        write!(f, "<{}>", parts.join("; "))
    }
}

/// `box(p)` under the module sign convention.
pub fn apply_op(op: &CDiffOp, p: &ModElem) -> Result<ModElem> {
    same_shape(&op.source, &p.desc)?;
    if p.config != op.config {
        return Err(AlgebraError::MixedConfig(p.config.to_string(), op.config.to_string()));
    }
    let mut out = ModElem::zero(op.config, op.target.clone());
    let (pe, po) = p.parity_parts();
    for (part, pp) in [(pe, false), (po, true)] {
        for (&(b, a), e) in &op.entries {
            let pa = &part.comps[a];
            if pa.is_zero() {
                continue;
            }
            let par_a = op.source.parity(a);
            let par_b = op.target.parity(b);
            for (sigma, coef) in e {
                let dp = total_derivative_unchecked(sigma, pa);
                if dp.is_zero() {
                    continue;
                }
                for (c, cp) in parity_split(coef) {
                    let q_par = pp ^ cp ^ par_a ^ par_b;
                    let sign = (pp && par_a) ^ (q_par && par_b);
                    out.comps[b] = &out.comps[b] + &(&c * &dp).signed(sign);
                }
            }
        }
    }
    Ok(out)
}

/// Applies an operator on `Lambda_{k-1} kappa` to a field.
pub fn apply_to_field(op: &CDiffOp, chi: &KappaField) -> Result<ModElem> {
    apply_op(op, &ModElem::from_field(chi))
}

/// `b D_tau` composed with `a D_sigma`, expanded by Leibniz.
fn compose_terms(tau: &MultiIndex, b: &FormExpr, sigma: &MultiIndex, a: &FormExpr, out: &mut Entry) {
    for rho in tau.sub_indices() {
        let da = total_derivative_unchecked(&rho, a);
        if da.is_zero() {
            continue;
        }
        let c = Q::from_integer(tau.binomial(&rho).into());
        let rest = tau.checked_sub(&rho).unwrap().add(sigma);
        let v = (b * &da).scale(&c);
        let slot = out.entry(rest).or_insert_with(|| FormExpr::zero(a.config()));
        *slot = &*slot + &v;
    }
}

/// `outer o inner`.
pub fn compose(outer: &CDiffOp, inner: &CDiffOp) -> Result<CDiffOp> {
    same_shape(&inner.target, &outer.source)?;
    let mut out = CDiffOp::zero(inner.config, inner.source.clone(), outer.target.clone());
    for (&(g, b1), eb) in &outer.entries {
        for (&(b2, a), ea) in &inner.entries {
            if b1 != b2 {
                continue;
            }
            let mut acc = Entry::new();
            for (tau, bv) in eb {
                for (sigma, av) in ea {
                    compose_terms(tau, bv, sigma, av, &mut acc);
                }
            }
            for (s, v) in acc {
                out.add_entry(g, a, s, v)?;
            }
        }
    }
    Ok(out)
}

/// Adjoint `Q^ -> P^` of an operator `P -> Q`, by integration by parts:
/// `<psi, box p> = (-1)^{|psi||box|} <adjoint(box) psi, p>` up to a total divergence.
pub fn adjoint(op: &CDiffOp) -> CDiffOp {
    let dp = op.source.dual;
    let dq = op.target.dual;
    let mut out = CDiffOp::zero(op.config, op.target.adjoint(), op.source.adjoint());
    for (&(b, a), e) in &op.entries {
        let pa = op.source.parity(a);
        let pb = op.target.parity(b);
        for (sigma, coef) in e {
            for (c, cp) in parity_split(coef) {
                let op_par = cp ^ pa ^ pb;
                let base = (sigma.order() % 2 == 1)
                    ^ (op_par && (pa ^ pb))
                    ^ (pa && pb)
                    ^ (!dq && pb)
                    ^ (dp && pa);
                for tau in sigma.sub_indices() {
                    let rest = sigma.checked_sub(&tau).unwrap();
                    let d = total_derivative_unchecked(&rest, &c);
                    if d.is_zero() {
                        continue;
                    }
                    let k = Q::from_integer(sigma.binomial(&rest).into());
                    out.add_entry(a, b, tau, d.scale(&k).signed(base)).unwrap();
                }
            }
        }
    }
    out
}

/// Total-divergence certificate for one instance of the Green formula.
#[derive(Clone, Debug)]
pub struct GreenWitness {
    /// `<psi, box p>`.
    pub lhs: FormExpr,
    /// `(-1)^{|psi||box|} <adjoint(box) psi, p>`.
    pub rhs: FormExpr,
    /// Components of the current: `lhs - rhs = sum_mu D_mu eta^mu`.
    pub eta: Vec<FormExpr>,
    /// `rho = sum_mu (-1)^{|eta^mu| + mu - 1} eta^mu d_k x^1 .. ^mu .. d_k x^n`.
    pub rho: FormExpr,
}

impl GreenWitness {
    /// Checks `d_k^h rho = (lhs - rhs) d_k x^1 ... d_k x^n`.
    pub fn verify(&self) -> bool {
        let cfg = self.lhs.config();
        let Ok(d) = differential(cfg.k, SlotKind::Horizontal, &self.rho) else {
            return false;
        };
        let div = self
            .eta
            .iter()
            .enumerate()
            .fold(FormExpr::zero(cfg), |acc, (i, e)| &acc + &total_derivative_mu(i + 1, e));
        d == &(&self.lhs - &self.rhs) * &crate::secondary::volume(cfg) && div == &self.lhs - &self.rhs
    }
}

fn integrate_by_parts(f: FormExpr, sigma: &MultiIndex, g: &FormExpr, eta: &mut [FormExpr]) -> FormExpr {
    let Some(mu) = sigma.entries().iter().position(|&e| e > 0) else {
        return &f * g;
    };
    let rest = sigma.checked_sub(&MultiIndex::unit(sigma.arity(), mu + 1)).unwrap();
    eta[mu] = &eta[mu] + &(&f * &total_derivative_unchecked(&rest, g));
    integrate_by_parts(-&total_derivative_mu(mu + 1, &f), &rest, g, eta)
}

/// Builds the Green witness for `op` on a homogeneous covector `psi` of the
/// target and an element `p` of the source.
pub fn green_witness(op: &CDiffOp, psi: &Covector, p: &ModElem) -> Result<GreenWitness> {
    let cfg = op.config;
    if psi.desc != op.target.adjoint() {
        return Err(AlgebraError::Shape(format!("covector on {} for target {}", psi.desc, op.target)));
    }
    let psi_par = psi
        .parity()
        .ok_or_else(|| AlgebraError::Domain("Green witness needs a homogeneous covector".into()))?;
    let lhs = pair(psi, &apply_op(op, p)?)?;
    let (oe, oo) = op.parity_parts();
    let mut rhs = FormExpr::zero(cfg);
    for (part, opp) in [(oe, false), (oo, true)] {
        let v = pair(&apply_op(&adjoint(&part), psi)?, p)?;
        rhs = &rhs + &v.signed(psi_par && opp);
    }
    // expand lhs as sum f D_sigma p^alpha and move every D_sigma off p
    let mut eta = vec![FormExpr::zero(cfg); cfg.n];
    let mut reduced = FormExpr::zero(cfg);
    let (pe, po) = p.parity_parts();
    let dq = op.target.dual;
    for (part, pp) in [(pe, false), (po, true)] {
        for (&(b, a), e) in &op.entries {
            let pa = op.source.parity(a);
            let pb = op.target.parity(b);
            let g = &part.comps[a];
            if g.is_zero() || psi.comps[b].is_zero() {
                continue;
            }
            for (sigma, coef) in e {
                for (c, cp) in parity_split(coef) {
                    let q_par = pp ^ cp ^ pa ^ pb;
                    let sign = (pp && pa) ^ (q_par && pb) ^ (pb && (q_par ^ dq));
                    let f = (&psi.comps[b] * &c).signed(sign);
                    reduced = &reduced + &integrate_by_parts(f, sigma, g, &mut eta);
                }
            }
        }
    }
    debug_assert_eq!(reduced, rhs);
    let mut rho = FormExpr::zero(cfg);
    let s = SlotSet::single(cfg.k);
    for (i, e) in eta.iter().enumerate() {
        let omega = (1..=cfg.n).filter(|&nu| nu != i + 1).fold(FormExpr::one(cfg), |acc, nu| {
            &acc * &FormExpr::gen_unchecked(cfg, Generator::horizontal(s, nu))
        });
        for (part, ep) in parity_split(e) {
            rho = &rho + &(&part * &omega).signed(ep ^ (i % 2 == 1));
        }
    }
    Ok(GreenWitness { lhs, rhs, eta, rho })
}

/// Universal linearization `l_xi(chi) = (-1)^{|xi||chi|} E_chi xi` of a
/// homogeneous element with components in `C*Lambda_{k-1}`, as an
/// operator `Lambda_{k-1} kappa -> P`.
pub fn linearization(xi: &ModElem) -> Result<CDiffOp> {
    let cfg = xi.config;
    for c in &xi.comps {
        if !classify(c).in_cstar {
            return Err(AlgebraError::Domain("linearization needs C*Lambda_{k-1} components".into()));
        }
    }
    let xi_par = xi
        .parity()
        .ok_or_else(|| AlgebraError::Domain("linearization needs a homogeneous element".into()))?;
    let basis = kappa_basis(cfg);
    let source = ModuleDesc::kappa(cfg);
    let mut op = CDiffOp::zero(cfg, source.clone(), xi.desc.clone());
    for (b, comp) in xi.comps.iter().enumerate() {
        if comp.is_zero() {
            continue;
        }
        let pb = xi.desc.parity(b);
        for sigma in MultiIndex::all_up_to(cfg.n, comp.jet_order()) {
            for (a, &(j, s)) in basis.iter().enumerate() {
                let pa = source.parity(a);
                let v = VerticalDerivation::dual_basis(cfg, j, sigma.clone(), s)?.apply(comp)?;
                if v.is_zero() {
                    continue;
                }
                let sign = (pa && xi_par) ^ (pa && pb) ^ pa ^ (xi_par && pb);
                op.add_entry(b, a, sigma.clone(), v.signed(sign))?;
            }
        }
    }
    Ok(op)
}

/// Probe field `(x^tau / tau!) V_j^K`.
pub fn probe_field(cfg: BundleConfig, j: usize, s: SlotSet, tau: &MultiIndex) -> KappaField {
    let mut chi = KappaField::zero(cfg);
    chi.set(j, s, FormExpr::from_poly(cfg, monomial_x(tau))).unwrap();
    chi
}

/// `x^tau / tau!`.
fn monomial_x(tau: &MultiIndex) -> Poly {
    let mut p = Poly::constant(Q::new(1.into(), tau.factorial().into()));
    for (i, &e) in tau.entries().iter().enumerate() {
        p = &p * &Poly::coord(JetCoordinate::Base(i + 1)).pow(e);
    }
    p
}

/// Reconstructs a C-differential operator `Lambda_{k-1} kappa -> target`
/// from its values on probe fields, assuming order at most `order` and
/// checking that bound one order higher.
pub fn extract_operator(
    cfg: BundleConfig,
    target: &ModuleDesc,
    order: u32,
    f: &dyn Fn(&KappaField) -> Result<ModElem>,
) -> Result<CDiffOp> {
    let source = ModuleDesc::kappa(cfg);
    let mut op = CDiffOp::zero(cfg, source.clone(), target.clone());
    for (a, &(j, s)) in kappa_basis(cfg).iter().enumerate() {
        let pa = source.parity(a);
        let mut found: BTreeMap<MultiIndex, Vec<FormExpr>> = BTreeMap::new();
        for tau in MultiIndex::all_up_to(cfg.n, order + 1) {
            let val = f(&probe_field(cfg, j, s, &tau))?;
            same_shape(&val.desc, target)?;
            let mut row = Vec::with_capacity(target.rank());
            for (b, g) in val.comps.iter().enumerate() {
                let pb = target.parity(b);
                let mut unsigned = FormExpr::zero(cfg);
                for (part, pp) in parity_split(g) {
                    unsigned = &unsigned + &part.signed(pa ^ ((pp ^ pb) && pb));
                }
                for (sigma, prev) in &found {
                    if let Some(rest) = tau.checked_sub(sigma) {
                        unsigned = &unsigned - &prev[b].mul_poly(&monomial_x(&rest));
                    }
                }
                row.push(unsigned);
            }
            if tau.order() > order {
                if row.iter().any(|r| !r.is_zero()) {
                    return Err(AlgebraError::OrderBound(order));
                }
                continue;
            }
            for (b, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    op.add_entry(b, a, tau.clone(), v.clone())?;
                }
            }
            found.insert(tau, row);
        }
    }
    Ok(op)
}

/// Slack allowed above a declared order before giving up.
pub const ORDER_SLACK: u32 = 6;

/// `extract_operator` starting at `order` and raising the bound up to
/// `ORDER_SLACK` times.
pub fn extract_operator_adaptive(
    cfg: BundleConfig,
    target: &ModuleDesc,
    order: u32,
    f: &dyn Fn(&KappaField) -> Result<ModElem>,
) -> Result<CDiffOp> {
    let mut r = order;
    loop {
        match extract_operator(cfg, target, r, f) {
            Err(AlgebraError::OrderBound(_)) if r < order + ORDER_SLACK => r += 1,
            other => return other,
        }
    }
}

/// The covector `c` with `<c, chi> = f(chi)` modulo total divergences, for
/// a C-differential density-valued functional `f` of expected order `order`.
pub fn covector_from_functional(
    cfg: BundleConfig,
    order: u32,
    f: &dyn Fn(&KappaField) -> Result<FormExpr>,
) -> Result<Covector> {
    let scalar = ModuleDesc::scalar(false);
    let op = extract_operator_adaptive(cfg, &scalar, order, &|chi| {
        ModElem::single(cfg, scalar.clone(), f(chi)?)
    })?;
    apply_op(&adjoint(&op), &ModElem::single(cfg, scalar.adjoint(), FormExpr::one(cfg))?)
}

type MultiEval = dyn Fn(&[KappaField]) -> Result<Covector> + Send + Sync;

/// Alternating multi-C-differential operator of `arity - 1` field
/// arguments with covector values: a representative of a degree-`arity`
/// element. The last argument enters through `extract_operator`.
#[derive(Clone)]
pub struct MultiCDiffOp {
    pub config: BundleConfig,
    pub arity: usize,
    /// `|Theta|`: the full evaluation has parity `|Theta| + sum |chi_i|`.
    pub parity: bool,
    /// Expected differential order in each argument; `freeze` raises it
    /// when the probes demand.
    pub order: u32,
    eval: Arc<MultiEval>,
}

impl fmt::Debug for MultiCDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiCDiffOp(arity {}, order <= {})", self.arity, self.order)
    }
}

impl MultiCDiffOp {
    pub fn new(
        config: BundleConfig,
        arity: usize,
        parity: bool,
        order: u32,
        eval: impl Fn(&[KappaField]) -> Result<Covector> + Send + Sync + 'static,
    ) -> Self {
        MultiCDiffOp { config, arity, parity, order, eval: Arc::new(eval) }
    }

    /// Degree-one element given by a covector on `Lambda_{k-1} kappa`.
    pub fn from_covector(cov: Covector) -> Result<Self> {
        if cov.desc != ModuleDesc::kappa(cov.config).adjoint() {
            return Err(AlgebraError::Shape(format!("{} is not a covector on kappa", cov.desc)));
        }
        let order = cov.jet_order();
        let parity = cov
            .parity()
            .ok_or_else(|| AlgebraError::Domain("covector must be homogeneous".into()))?;
        Ok(MultiCDiffOp::new(cov.config, 1, parity, order, move |_| Ok(cov.clone())))
    }

    /// Degree-two element given by an operator `Lambda_{k-1} kappa -> kappa^`.
    pub fn from_operator(op: CDiffOp) -> Result<Self> {
        let cfg = op.config;
        if op.source != ModuleDesc::kappa(cfg) || op.target != ModuleDesc::kappa(cfg).adjoint() {
            return Err(AlgebraError::Shape("operator must map kappa to its adjoint".into()));
        }
        let order = op.order();
        let parity = op
            .parity()
            .ok_or_else(|| AlgebraError::Domain("operator must be homogeneous".into()))?;
        Ok(MultiCDiffOp::new(cfg, 2, parity, order, move |args| apply_to_field(&op, &args[0])))
    }

    pub fn eval(&self, args: &[KappaField]) -> Result<Covector> {
        if args.len() + 1 != self.arity {
            return Err(AlgebraError::Shape(format!(
                "{} arguments for an operator of degree {}",
                args.len(),
                self.arity
            )));
        }
        if let Some(a) = args.iter().find(|a| a.config() != self.config) {
            return Err(AlgebraError::MixedConfig(a.config().to_string(), self.config.to_string()));
        }
        (self.eval)(args)
    }

    /// Full evaluation `<Theta(chi_1, ..., chi_{p-1}), chi_p>`.
    pub fn evaluate(&self, args: &[KappaField]) -> Result<FormExpr> {
        let (last, first) = args
            .split_last()
            .ok_or_else(|| AlgebraError::Shape("no arguments".into()))?;
        pair(&self.eval(first)?, &ModElem::from_field(last))
    }

    /// The operator in the last argument with the others frozen.
    pub fn freeze(&self, first: &[KappaField]) -> Result<CDiffOp> {
        if first.len() + 2 != self.arity {
            return Err(AlgebraError::Shape(format!(
                "freezing {} arguments of a degree-{} operator",
                first.len(),
                self.arity
            )));
        }
        let target = ModuleDesc::kappa(self.config).adjoint();
        let first = first.to_vec();
        extract_operator_adaptive(self.config, &target, self.order, &|chi| {
            let mut args = first.clone();
            args.push(chi.clone());
            self.eval(&args)
        })
    }
}

/// Probe fields up to the given order, one per basis element and `tau`.
pub fn probe_fields(cfg: BundleConfig, order: u32) -> Vec<KappaField> {
    let mut out = Vec::new();
    for (j, s) in kappa_basis(cfg) {
        for tau in MultiIndex::all_up_to(cfg.n, order) {
            out.push(probe_field(cfg, j, s, &tau));
        }
    }
    out
}

/// Membership in `L_p`: every operator obtained by freezing all but the
/// last argument at probe fields is skew-adjoint. Vacuous in degree one.
pub fn in_lp(theta: &MultiCDiffOp) -> Result<bool> {
    if theta.arity <= 1 {
        return Ok(true);
    }
    let probes = probe_fields(theta.config, theta.order + 1);
    let mut tuples: Vec<Vec<KappaField>> = vec![Vec::new()];
    for _ in 0..theta.arity - 2 {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                probes.iter().map(move |p| {
                    let mut t = t.clone();
                    t.push(p.clone());
                    t
                })
            })
            .collect();
    }
    for t in tuples {
        let op = theta.freeze(&t)?;
        if !adjoint(&op).add(&op)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Element `omega (x) dx^1 ... dx^n` of `Lambda_{k-1}B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BElement {
    pub omega: FormExpr,
}

impl BElement {
    pub fn new(omega: FormExpr) -> Result<Self> {
        if !classify(&omega).in_cstar {
            return Err(AlgebraError::Domain("B-element coefficient outside C*Lambda_{k-1}".into()));
        }
        Ok(BElement { omega })
    }

    /// Reads `A d_k x^1 ... d_k x^n` back; fails on anything else.
    pub fn from_top_form(w: &FormExpr) -> Result<Self> {
        let cfg = w.config();
        let vol = crate::secondary::volume(cfg);
        let vm = vol.terms().next().map(|(m, _)| m.clone()).unwrap();
        let mut omega = FormExpr::zero(cfg);
        for (m, c) in w.terms() {
            let rest: Vec<_> = m
                .factors()
                .iter()
                .filter(|(g, _)| !vm.factors().iter().any(|(h, _)| h == g))
                .cloned()
                .collect();
            if rest.len() + vm.factors().len() != m.factors().len() {
                return Err(AlgebraError::Domain("not a multiple of the slot-k volume".into()));
            }
            let rest = crate::form::Monomial::from_sorted(rest);
            let neg = rest.wedge(&vm).map(|(_, neg)| neg).unwrap_or(false);
            let a = FormExpr::term(cfg, c.clone(), rest);
            omega = &omega + &a.signed(neg);
        }
        if &omega * &vol != *w {
            return Err(AlgebraError::Domain("not a multiple of the slot-k volume".into()));
        }
        BElement::new(omega)
    }

    /// As the rank-one module element with basis parity `n`.
    pub fn to_module(&self) -> ModElem {
        let cfg = self.omega.config();
        ModElem { config: cfg, desc: ModuleDesc::top(cfg), comps: vec![self.omega.clone()] }
    }
}

/// `omega (x) dx^1 ... dx^n |-> omega d_k x^1 ... d_k x^n`.
pub fn embed_b(b: &BElement) -> FormExpr {
    &b.omega * &crate::secondary::volume(b.omega.config())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{q, Atom};

    fn c1() -> BundleConfig {
        BundleConfig::new(1, 1, 1).unwrap()
    }

    fn u(c: BundleConfig, s: u32) -> FormExpr {
        FormExpr::from_poly(c, Poly::atom(Atom::u(1, MultiIndex::new(vec![s]))))
    }

    fn d(s: u32) -> MultiIndex {
        MultiIndex::new(vec![s])
    }

    fn scalar_elem(c: BundleConfig, v: FormExpr) -> ModElem {
        ModElem::single(c, ModuleDesc::scalar(false), v).unwrap()
    }

    #[test]
    fn apply_examples() {
        let c = c1();
        let d1 = CDiffOp::scalar(c, [(d(1), FormExpr::one(c))]).unwrap();
        assert_eq!(apply_op(&d1, &scalar_elem(c, u(c, 0))).unwrap().comps[0], u(c, 1));
        let op = CDiffOp::scalar(c, [(d(1), u(c, 0)), (d(0), u(c, 1))]).unwrap();
        let r = apply_op(&op, &scalar_elem(c, &u(c, 0) * &u(c, 0))).unwrap();
        assert_eq!(r.comps[0], (&(&u(c, 0) * &u(c, 0)) * &u(c, 1)).scale_int(3));
    }

    #[test]
    fn compose_examples() {
        let c = c1();
        let d1 = CDiffOp::scalar(c, [(d(1), FormExpr::one(c))]).unwrap();
        let mu = CDiffOp::scalar(c, [(d(0), u(c, 0))]).unwrap();
        let expect = CDiffOp::scalar(c, [(d(1), u(c, 0)), (d(0), u(c, 1))]).unwrap();
        assert_eq!(compose(&d1, &mu).unwrap(), expect);
        let id = CDiffOp::identity(c, ModuleDesc::scalar(false));
        assert_eq!(compose(&id, &expect).unwrap(), expect);
    }

    #[test]
    fn adjoint_examples() {
        let c = c1();
        let d1 = CDiffOp::scalar(c, [(d(1), FormExpr::one(c))]).unwrap();
        let a = adjoint(&d1);
        assert_eq!(a.entry(0, 0), d1.neg().entry(0, 0));
        let mu = CDiffOp::scalar(c, [(d(0), u(c, 2))]).unwrap();
        assert_eq!(adjoint(&mu).entry(0, 0), mu.entry(0, 0));
        let op = CDiffOp::scalar(c, [(d(1), u(c, 0))]).unwrap();
        let expect = CDiffOp::scalar(c, [(d(1), -&u(c, 0)), (d(0), -&u(c, 1))]).unwrap();
        assert_eq!(adjoint(&op).entry(0, 0), expect.entry(0, 0));
        assert_eq!(adjoint(&adjoint(&op)), op);
    }

    #[test]
    fn green_witness_scalar() {
        let c = c1();
        let op = CDiffOp::scalar(c, [(d(2), u(c, 0)), (d(1), u(c, 1))]).unwrap();
        let psi = ModElem::single(c, ModuleDesc::scalar(false).adjoint(), u(c, 3)).unwrap();
        let w = green_witness(&op, &psi, &scalar_elem(c, &u(c, 0) * &u(c, 1))).unwrap();
        assert!(w.verify());
    }

    #[test]
    fn linearization_examples() {
        let c = c1();
        let top = ModuleDesc::scalar(false);
        let xi = ModElem::single(c, top.clone(), &u(c, 0) * &u(c, 1)).unwrap();
        let l = linearization(&xi).unwrap();
        assert_eq!(l.entry(0, 0).unwrap().get(&d(0)), Some(&u(c, 1)));
        assert_eq!(l.entry(0, 0).unwrap().get(&d(1)), Some(&u(c, 0)));
        let l2 = linearization(&ModElem::single(c, top.clone(), u(c, 2)).unwrap()).unwrap();
        assert_eq!(l2.entry(0, 0).unwrap().len(), 1);
        assert_eq!(l2.entry(0, 0).unwrap().get(&d(2)), Some(&FormExpr::one(c)));
        let x = FormExpr::from_poly(c, Poly::atom(Atom::x(1)));
        assert!(linearization(&ModElem::single(c, top, x).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn linearization_matches_prolongation_k2() {
        let c = BundleConfig::new(1, 1, 2).unwrap();
        let th = FormExpr::generator(c, Generator::vertical(SlotSet::single(1), 1, d(1))).unwrap();
        let xi = ModElem::single(c, ModuleDesc::top(c), &(&u(c, 0) * &u(c, 2)) * &th).unwrap();
        let mut chi = KappaField::zero(c);
        chi.set(1, SlotSet::EMPTY, th.clone()).unwrap();
        chi.set(1, SlotSet::single(1), &u(c, 1) * &u(c, 1)).unwrap();
        let l = linearization(&xi).unwrap();
        let got = apply_to_field(&l, &chi).unwrap();
        let sign = xi.parity().unwrap() && chi.parity().unwrap();
        assert_eq!(got.comps[0], chi.act(&xi.comps[0]).signed(sign));
    }

    #[test]
    fn extraction_and_lp() {
        let c = c1();
        let k = ModuleDesc::kappa(c);
        let mut d1 = CDiffOp::zero(c, k.clone(), k.adjoint());
        d1.add_entry(0, 0, d(1), FormExpr::one(c)).unwrap();
        let th = MultiCDiffOp::from_operator(d1.clone()).unwrap();
        assert_eq!(th.freeze(&[]).unwrap(), d1);
        assert!(in_lp(&th).unwrap());
        let mut id = CDiffOp::zero(c, k.clone(), k.adjoint());
        id.add_entry(0, 0, d(0), FormExpr::one(c)).unwrap();
        assert!(!in_lp(&MultiCDiffOp::from_operator(id).unwrap()).unwrap());
        let cov = ModElem::single(c, k.adjoint(), u(c, 2)).unwrap();
        assert!(in_lp(&MultiCDiffOp::from_covector(cov).unwrap()).unwrap());
        let f = |chi: &KappaField| apply_to_field(&d1, chi);
        let target = k.adjoint();
        assert!(matches!(extract_operator(c, &target, 0, &f), Err(AlgebraError::OrderBound(0))));
        assert_eq!(extract_operator_adaptive(c, &target, 0, &f).unwrap(), d1);
    }

    #[test]
    fn embed_examples() {
        let c = BundleConfig::new(2, 1, 2).unwrap();
        let vol = crate::secondary::volume(c);
        assert_eq!(embed_b(&BElement::new(FormExpr::one(c)).unwrap()), vol);
        let th = FormExpr::generator(c, Generator::vertical(SlotSet::single(1), 1, MultiIndex::new(vec![1, 0]))).unwrap();
        let u0 = FormExpr::from_poly(c, Poly::atom(Atom::u(1, MultiIndex::zero(2))));
        let b = BElement::new(&th.scale(&q(3)) * &u0).unwrap();
        let e = embed_b(&b);
        assert!(differential(2, SlotKind::Horizontal, &e).unwrap().is_zero());
        assert_eq!(BElement::from_top_form(&e).unwrap(), b);
    }
}
