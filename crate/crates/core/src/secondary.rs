//! Secondary differential forms: the horizontal cohomology representatives,
//! their differential, Euler operator, Lie derivative and insertion, and
//! secondary covariant tensors.
//!
//! A secondary `p`-form with `p >= 1` is a `MultiCDiffOp` of arity `p`: its
//! first `p - 1` arguments produce a covector on `Lambda_{k-1} kappa`, and
//! pairing with the last argument gives the density of the value. Values
//! are taken modulo total divergences, which is what makes the covector
//! canonical.

use crate::calculus::{nu, total_derivative_unchecked};
use crate::cdiff::{
    adjoint, apply_op, covector_from_functional, embed_b, in_lp, linearization, BElement,
    CDiffOp, Covector, ModElem, ModuleDesc, MultiCDiffOp,
};
use crate::coeff::Q;
use crate::config::{BundleConfig, MultiIndex, SlotSet};
use crate::derivations::{bracket, kappa_basis, KappaField, VerticalDerivation};
use crate::error::{AlgebraError, Result};
use crate::form::{FormExpr, Generator};

/// Slot-`k` horizontal volume `d_k x^1 ... d_k x^n`.
pub fn volume(cfg: BundleConfig) -> FormExpr {
    let s = SlotSet::single(cfg.k);
    (1..=cfg.n).fold(FormExpr::one(cfg), |acc, mu| {
        &acc * &FormExpr::gen_unchecked(cfg, Generator::horizontal(s, mu))
    })
}

/// A secondary form: a horizontal class representative in degree zero, a
/// multi-operator otherwise.
#[derive(Clone, Debug)]
pub enum SecondaryForm {
    Class(FormExpr),
    Multi(MultiCDiffOp),
}

impl SecondaryForm {
    pub fn arity(&self) -> usize {
        match self {
            SecondaryForm::Class(_) => 0,
            SecondaryForm::Multi(t) => t.arity,
        }
    }
}

/// `u(Omega)`: the `(0, ..., 0, n)` component of `Omega` read as an element
/// of `Lambda_{k-1}B`.
pub fn u_element(w: &FormExpr) -> Result<BElement> {
    BElement::from_top_form(&nu(w))
}

fn homogeneous_fields(chi: &KappaField) -> Vec<(KappaField, bool)> {
    let (e, o) = chi.parity_parts();
    [(e, false), (o, true)].into_iter().filter(|(f, _)| !f.is_zero()).collect()
}

/// Expands `f` multilinearly over the homogeneous parts of every argument.
fn multilinear<T>(
    args: &[KappaField],
    zero: T,
    add: &dyn Fn(T, T) -> Result<T>,
    f: &dyn Fn(&[KappaField], &[bool]) -> Result<T>,
) -> Result<T>
where
    T: Clone,
{
    let mut combos: Vec<(Vec<KappaField>, Vec<bool>)> = vec![(Vec::new(), Vec::new())];
    for a in args {
        let parts = homogeneous_fields(a);
        let mut next = Vec::new();
        for (fs, ps) in &combos {
            for (part, p) in &parts {
                let mut fs = fs.clone();
                let mut ps = ps.clone();
                fs.push(part.clone());
                ps.push(*p);
                next.push((fs, ps));
            }
        }
        combos = next;
    }
    let mut acc = zero;
    for (fs, ps) in combos {
        acc = add(acc, f(&fs, &ps)?)?;
    }
    Ok(acc)
}

fn kappa_cov_zero(cfg: BundleConfig) -> Covector {
    ModElem::zero(cfg, ModuleDesc::kappa(cfg).adjoint())
}

fn add_cov(a: Covector, b: Covector) -> Result<Covector> {
    a.add(&b)
}

fn add_form(a: FormExpr, b: FormExpr) -> Result<FormExpr> {
    Ok(&a + &b)
}

fn top_coefficient(omega: &FormExpr) -> Result<FormExpr> {
    BElement::from_top_form(omega)
        .map(|b| b.omega)
        .map_err(|_| AlgebraError::Domain("expected A d_k x^1 ... d_k x^n with A in C*Lambda_{k-1}".into()))
}

/// `sum_sigma (-1)^{|sigma|} D_sigma V_j^{sigma,K}(A)`.
fn variational_derivative(a: &FormExpr, j: usize, s: SlotSet) -> Result<FormExpr> {
    let cfg = a.config();
    let mut out = FormExpr::zero(cfg);
    for sigma in MultiIndex::all_up_to(cfg.n, a.jet_order()) {
        let v = VerticalDerivation::dual_basis(cfg, j, sigma.clone(), s)?.apply(a)?;
        if !v.is_zero() {
            out = &out + &total_derivative_unchecked(&sigma, &v).signed(sigma.order() % 2 == 1);
        }
    }
    Ok(out)
}

/// The generalized Euler operator: the covector of `Omega = A d_k x^1 ... d_k x^n`,
/// with components `(-1)^{|K|(|A|+1)} sum (-1)^{|sigma|} D_sigma V_j^{sigma,K}(A)`.
pub fn euler(omega: &FormExpr) -> Result<Covector> {
    let a = top_coefficient(omega)?;
    let cfg = a.config();
    let mut comps = Vec::new();
    for (j, s) in kappa_basis(cfg) {
        let (ae, ao) = a.parity_parts();
        let mut c = FormExpr::zero(cfg);
        for (part, pa) in [(ae, false), (ao, true)] {
            if !part.is_zero() {
                c = &c + &variational_derivative(&part, j, s)?.signed(s.parity() && !pa);
            }
        }
        comps.push(c);
    }
    ModElem::new(cfg, ModuleDesc::kappa(cfg).adjoint(), comps)
}

/// The local display of the Euler operator evaluated on `chi`:
/// `sum (-1)^{|sigma| + |chi||Omega|} chi_L^j D_sigma V_j^{sigma,L}(A)`.
pub fn euler_display(omega: &FormExpr, chi: &KappaField) -> Result<FormExpr> {
    let a = top_coefficient(omega)?;
    let cfg = a.config();
    let n_odd = cfg.n % 2 == 1;
    let mut out = FormExpr::zero(cfg);
    let (ae, ao) = a.parity_parts();
    for (part, pa) in [(ae, false), (ao, true)] {
        if part.is_zero() {
            continue;
        }
        for (c, pc) in homogeneous_fields(chi) {
            for (&(j, s), v) in c.components() {
                let t = variational_derivative(&part, j, s)?;
                out = &out + &(v * &t).signed(pc && (pa ^ n_odd));
            }
        }
    }
    Ok(out)
}

/// The Euler operator through the adjoint of the universal linearization,
/// `adjoint(l_Omega)` applied to the unit of the adjoint of `Lambda_{k-1}B`.
pub fn euler_via_linearization(omega: &FormExpr) -> Result<Covector> {
    let cfg = omega.config();
    let b = BElement::from_top_form(omega)?;
    let mut out = kappa_cov_zero(cfg);
    let (ae, ao) = b.omega.parity_parts();
    for part in [ae, ao] {
        if part.is_zero() {
            continue;
        }
        let l = linearization(&BElement::new(part)?.to_module())?;
        let unit = ModElem::single(cfg, ModuleDesc::top(cfg).adjoint(), FormExpr::one(cfg))?;
        out = out.add(&apply_op(&adjoint(&l), &unit)?)?;
    }
    Ok(out)
}

/// The secondary one-form given by the Euler operator.
pub fn euler_form(omega: &FormExpr) -> Result<MultiCDiffOp> {
    MultiCDiffOp::from_covector(euler(omega)?)
}

fn xor(ps: &[bool]) -> bool {
    ps.iter().fold(false, |a, &b| a ^ b)
}

fn without(v: &[KappaField], skip: &[usize]) -> Vec<KappaField> {
    v.iter()
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .map(|(_, x)| x.clone())
        .collect()
}

fn d1_eval(theta: &MultiCDiffOp, chis: &[KappaField], par: &[bool]) -> Result<Covector> {
    let cfg = theta.config;
    let p = chis.len();
    let tp = theta.parity;
    let a = |i: usize| par[i] && (tp ^ xor(&par[..i]));
    let b = |i: usize| par[i] && xor(&par[i + 1..]);
    let c = |i: usize, j: usize| a(i) ^ a(j) ^ (tp && (par[i] ^ par[j])) ^ (par[i] && par[j]);
    let mut out = kappa_cov_zero(cfg);
    // indices below are 0-based, so (-1)^{i+1} for 1-based i becomes (-1)^i
    for i in 0..p {
        let val = theta.eval(&without(chis, &[i]))?;
        let t = val.map(|x| chis[i].act(x)).signed(a(i) ^ (i % 2 == 1));
        out = out.add(&t)?;
    }
    for i in 0..p {
        for j in i + 1..p {
            let mut args = vec![bracket(&chis[i], &chis[j])];
            args.extend(without(chis, &[i, j]));
            let t = theta.eval(&args)?.signed(c(i, j) ^ ((i + j) % 2 == 1));
            out = out.add(&t)?;
        }
    }
    let inv_p = Q::new(1.into(), (p as i64).into());
    for i in 0..p {
        let val = theta.eval(&without(chis, &[i]))?;
        let xi = ModElem::from_field(&chis[i]);
        let mut t = kappa_cov_zero(cfg);
        if p > 1 {
            let lx = apply_op(&adjoint(&linearization(&xi)?), &val)?;
            t = t.add(&lx.scale(&Q::from_integer(((p - 1) as i64).into())).signed(a(i)))?;
        }
        let lv = apply_op(&adjoint(&linearization(&val)?), &xi)?;
        t = t.sub(&lv.signed(b(i)))?;
        out = out.add(&t.scale(&inv_p).signed(i % 2 == 1))?;
    }
    Ok(out)
}

/// The differential `L_p -> L_{p+1}`, `p >= 1`.
pub fn d1(theta: &MultiCDiffOp) -> Result<MultiCDiffOp> {
    if theta.arity == 0 {
        return Err(AlgebraError::Domain("degree-zero classes go through euler".into()));
    }
    if !in_lp(theta)? {
        return Err(AlgebraError::Domain(format!("operator is not in L_{}", theta.arity)));
    }
    let th = theta.clone();
    let cfg = theta.config;
    Ok(MultiCDiffOp::new(cfg, theta.arity + 1, theta.parity, theta.order, move |args| {
        multilinear(args, kappa_cov_zero(cfg), &add_cov, &|fs, ps| d1_eval(&th, fs, ps))
    }))
}

/// Full evaluation of a secondary form of arity >= 1 as a density.
pub fn evaluate(theta: &MultiCDiffOp, args: &[KappaField]) -> Result<FormExpr> {
    theta.evaluate(args)
}

fn lie_full(chi: &KappaField, pc: bool, theta: &MultiCDiffOp, chis: &[KappaField], par: &[bool]) -> Result<FormExpr> {
    let mut out = chi.act(&theta.evaluate(chis)?);
    for i in 0..chis.len() {
        let mut args = chis.to_vec();
        args[i] = bracket(chi, &chis[i]);
        let sign = pc && (xor(&par[..i]) ^ theta.parity);
        out = &out - &theta.evaluate(&args)?.signed(sign);
    }
    Ok(out)
}

/// The Lie derivative `L_chi` on secondary `p`-forms, `p >= 1`.
pub fn lie(chi: &KappaField, theta: &MultiCDiffOp) -> Result<MultiCDiffOp> {
    if theta.arity == 0 {
        return Err(AlgebraError::Domain("Lie derivative of degree-zero classes is not provided".into()));
    }
    let cfg = theta.config;
    let parts = homogeneous_fields(chi);
    let mut acc: Option<MultiCDiffOp> = None;
    for (part, pc) in parts {
        let th = theta.clone();
        let order = theta.order + part.jet_order();
        let op = MultiCDiffOp::new(cfg, theta.arity, theta.parity ^ pc, order, move |first| {
            let th = th.clone();
            let part = part.clone();
            let first = first.to_vec();
            covector_from_functional(cfg, order, &|last| {
                let mut args = first.clone();
                args.push(last.clone());
                multilinear(&args, FormExpr::zero(cfg), &add_form, &|fs, ps| lie_full(&part, pc, &th, fs, ps))
            })
        });
        acc = Some(match acc {
            None => op,
            Some(prev) => sum_forms(&prev, &op)?,
        });
    }
    Ok(acc.unwrap_or_else(|| zero_form(cfg, theta.arity, theta.parity)))
}

/// The zero secondary form of the given arity.
pub fn zero_form(cfg: BundleConfig, arity: usize, parity: bool) -> MultiCDiffOp {
    MultiCDiffOp::new(cfg, arity, parity, 0, move |_| Ok(kappa_cov_zero(cfg)))
}

/// Sum of two secondary forms of the same arity.
pub fn sum_forms(a: &MultiCDiffOp, b: &MultiCDiffOp) -> Result<MultiCDiffOp> {
    if a.arity != b.arity || a.config != b.config {
        return Err(AlgebraError::Shape("forms of different degree or bundle".into()));
    }
    let (x, y) = (a.clone(), b.clone());
    let parity = a.parity;
    Ok(MultiCDiffOp::new(a.config, a.arity, parity, a.order.max(b.order), move |args| {
        x.eval(args)?.add(&y.eval(args)?)
    }))
}

/// Insertion `i_chi`: for `p = 1` the class `(-1)^{|chi||Theta|} [Theta(chi)]`
/// embedded in `ker d_k^h`; for `p >= 2` the form with `chi` in front.
pub fn insert(chi: &KappaField, theta: &MultiCDiffOp) -> Result<SecondaryForm> {
    let cfg = theta.config;
    match theta.arity {
        0 => Err(AlgebraError::Domain("nothing to insert into a degree-zero class".into())),
        1 => {
            let mut a = FormExpr::zero(cfg);
            for (part, pc) in homogeneous_fields(chi) {
                a = &a + &theta.evaluate(&[part])?.signed(pc && theta.parity);
            }
            Ok(SecondaryForm::Class(embed_b(&BElement::new(a)?)))
        }
        _ => {
            let th = theta.clone();
            let chi = chi.clone();
            let parity = theta.parity ^ chi.parity().unwrap_or(false);
            Ok(SecondaryForm::Multi(MultiCDiffOp::new(cfg, theta.arity - 1, parity, theta.order, move |args| {
                let mut acc = kappa_cov_zero(cfg);
                for (part, pc) in homogeneous_fields(&chi) {
                    let mut full = vec![part];
                    full.extend(args.iter().cloned());
                    acc = acc.add(&th.eval(&full)?.signed(pc && th.parity))?;
                }
                Ok(acc)
            })))
        }
    }
}

/// Number of slot-`k` vertical generators in a term.
fn slot_k_vertical_degree(m: &crate::form::Monomial, k: usize) -> u32 {
    m.factors()
        .iter()
        .filter(|(g, _)| g.is_vertical() && g.slots().contains(k))
        .map(|(_, e)| *e)
        .sum()
}

/// The contraction `i_{E_chi}` into slot-`k` Cartan generators:
/// `d^v_{K+k} u^j_sigma |-> (-1)^{|K|} D_sigma chi^j_K`, a derivation of
/// parity `|chi| + 1`.
pub fn contract(chi: &KappaField, w: &FormExpr) -> FormExpr {
    let cfg = w.config();
    let k = cfg.k;
    let mut out = FormExpr::zero(cfg);
    for (part, pc) in homogeneous_fields(chi) {
        let v = w.apply_derivation(
            !pc,
            &|_| FormExpr::zero(cfg),
            &|g| match g {
                Generator::Vertical { s, j, sigma } if s.contains(k) => {
                    let lower = s.without(k);
                    part.prolonged(*j, lower, sigma).signed(lower.parity())
                }
                _ => FormExpr::zero(cfg),
            },
        );
        out = &out + &v;
    }
    out
}

/// `(-1)^{|omega| sum|chi_i| + p(p-1)/2} i_{chi_1} ... i_{chi_p} omega` for
/// homogeneous `omega` and fields.
pub fn contract_all(chis: &[KappaField], w: &FormExpr) -> Result<FormExpr> {
    let cfg = w.config();
    let p = chis.len();
    let mut out = FormExpr::zero(cfg);
    for (part, pw) in [w.parity_parts().0, w.parity_parts().1].into_iter().zip([false, true]) {
        if part.is_zero() {
            continue;
        }
        let r = multilinear(chis, FormExpr::zero(cfg), &add_form, &|fs, ps| {
            let mut v = part.clone();
            for c in fs.iter().rev() {
                v = contract(c, &v);
            }
            let sign = (pw && xor(ps)) ^ ((p * p.saturating_sub(1) / 2) % 2 == 1);
            Ok(v.signed(sign))
        })?;
        out = &out + &r;
    }
    Ok(out)
}

/// The identification of classes of slot-`k` vertical degree `p` and top
/// horizontal degree with secondary `p`-forms.
pub fn eta(p: usize, w: &FormExpr) -> Result<SecondaryForm> {
    let cfg = w.config();
    let k = cfg.k;
    for (m, _) in w.terms() {
        if slot_k_vertical_degree(m, k) != p as u32 {
            return Err(AlgebraError::Domain(format!("expected slot-{k} vertical degree {p}")));
        }
    }
    if p == 0 {
        return Ok(SecondaryForm::Class(w.filter_terms(|m| m.factors().iter().all(|(g, _)| !g.is_vertical() || !g.slots().contains(k)))));
    }
    let parity = w
        .parity()
        .ok_or_else(|| AlgebraError::Domain("eta needs a homogeneous form".into()))?
        ^ (p % 2 == 1)
        ^ (cfg.n % 2 == 1);
    let w = w.clone();
    let order = w.jet_order();
    Ok(SecondaryForm::Multi(MultiCDiffOp::new(cfg, p, parity, order, move |first| {
        let w = w.clone();
        let first = first.to_vec();
        covector_from_functional(cfg, order, &|last| {
            let mut args = first.clone();
            args.push(last.clone());
            top_coefficient(&contract_all(&args, &w)?)
        })
    })))
}

/// Result of the variational-integrability test for a covector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HelmholtzReport {
    /// The linearization equals its adjoint.
    pub self_adjoint: bool,
    /// `d1` of the covector vanishes.
    pub d1_vanishes: bool,
}

impl HelmholtzReport {
    pub fn verdict(&self) -> &'static str {
        if self.self_adjoint {
            "self-adjoint: variational"
        } else {
            "not self-adjoint: not variational"
        }
    }
}

pub fn helmholtz(f: &Covector) -> Result<HelmholtzReport> {
    let l = linearization(f)?;
    let self_adjoint = adjoint(&l) == l;
    let d = d1(&MultiCDiffOp::from_covector(f.clone())?)?;
    let d1_vanishes = d.freeze(&[])?.is_zero();
    Ok(HelmholtzReport { self_adjoint, d1_vanishes })
}

/// `p_{k-1}`: keeps the multidegree-zero part of the `K = emptyset`
/// components, as a field over the first-level bundle.
pub fn project_kappa(chi: &KappaField) -> Result<KappaField> {
    let cfg = chi.config();
    let base = BundleConfig::new(cfg.n, cfg.m, 1)?;
    let mut out = KappaField::zero(base);
    for j in 1..=cfg.m {
        let v = chi.get(j, SlotSet::EMPTY).component(&vec![0; cfg.k]);
        let poly = v.as_poly().unwrap_or_default();
        out.set(j, SlotSet::EMPTY, FormExpr::from_poly(base, poly))?;
    }
    Ok(out)
}

/// `i_k(omega_1, ..., omega_{k-1}, psi)`: the covector with components
/// `omega_1 kappa_12(omega_2) ... kappa_{1,k-1}(omega_{k-1}) psi_j` on
/// `V_j` and zero on `V_j^K`, `K` nonempty. The `omega_i` are slot-1 Cartan
/// one-forms and `psi` has function components.
pub fn tensor_embed(cfg: BundleConfig, omegas: &[FormExpr], psi: &[FormExpr]) -> Result<Covector> {
    if omegas.len() + 1 != cfg.k {
        return Err(AlgebraError::Shape(format!("{} one-forms for k={}", omegas.len(), cfg.k)));
    }
    if psi.len() != cfg.m {
        return Err(AlgebraError::Shape(format!("covector of rank {} for m={}", psi.len(), cfg.m)));
    }
    let mut w = FormExpr::one(cfg);
    for (i, om) in omegas.iter().enumerate() {
        let om = om.with_config(cfg)?;
        let one_slot = om.terms().all(|(m, c)| {
            c.jet_order() < u32::MAX
                && m.factors().len() == 1
                && m.factors()[0].1 == 1
                && m.factors()[0].0.is_vertical()
                && m.factors()[0].0.slots() == SlotSet::single(1)
        });
        if !one_slot {
            return Err(AlgebraError::Domain("tensor factors must be slot-1 Cartan one-forms".into()));
        }
        w = &w * &crate::calculus::kappa(i + 1, &om)?;
    }
    let mut comps = Vec::new();
    for (j, s) in kappa_basis(cfg) {
        if s.is_empty() {
            let f = psi[j - 1].with_config(cfg)?;
            if f.as_poly().is_none() {
                return Err(AlgebraError::Domain("psi components must be functions".into()));
            }
            comps.push(&w * &f);
        } else {
            comps.push(FormExpr::zero(cfg));
        }
    }
    ModElem::new(cfg, ModuleDesc::kappa(cfg).adjoint(), comps)
}

/// The density-valued operator `chi |-> <c, chi>` of a covector.
pub fn covector_functional(c: &Covector) -> Result<CDiffOp> {
    let cfg = c.config;
    let kappa = ModuleDesc::kappa(cfg);
    if c.desc != kappa.adjoint() {
        return Err(AlgebraError::Shape(format!("{} is not a covector on kappa", c.desc)));
    }
    let mut op = CDiffOp::zero(cfg, kappa, ModuleDesc::scalar(false));
    for (a, v) in c.comps.iter().enumerate() {
        if !v.is_zero() {
            op.add_entry(0, a, MultiIndex::zero(cfg.n), v.clone())?;
        }
    }
    Ok(op)
}

/// Membership of a density-valued operator on `Lambda_{k-1} kappa` in the
/// image of `tensor_embed`: order zero, blind to `K != emptyset`, and every
/// coefficient an `F`-combination of products with exactly one generator
/// `d^v_i u_sigma` in each slot `i < k`.
pub fn is_secondary_tensor(op: &CDiffOp) -> bool {
    let cfg = op.config;
    if op.source != ModuleDesc::kappa(cfg) || op.target.rank() != 1 {
        return false;
    }
    let basis = kappa_basis(cfg);
    for (&(_, a), e) in op.entries() {
        if !basis[a].1.is_empty() {
            return false;
        }
        for (sigma, v) in e {
            if !sigma.is_zero() {
                return false;
            }
            for (m, _) in v.terms() {
                let mut seen = SlotSet::EMPTY;
                for (g, exp) in m.factors() {
                    let s = g.slots();
                    if !g.is_vertical() || *exp != 1 || s.len() != 1 || seen.contains(s.iter().next().unwrap()) {
                        return false;
                    }
                    seen = seen.with(s.iter().next().unwrap());
                }
                if seen.len() + 1 != cfg.k {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{differential, SlotKind};
    use crate::coeff::{q, Atom, Poly};

    fn c1() -> BundleConfig {
        BundleConfig::new(1, 1, 1).unwrap()
    }

    fn u(c: BundleConfig, s: u32) -> FormExpr {
        FormExpr::from_poly(c, Poly::atom(Atom::u(1, MultiIndex::new(vec![s]))))
    }

    fn cov(c: BundleConfig, v: FormExpr) -> Covector {
        ModElem::new(c, ModuleDesc::kappa(c).adjoint(), vec![v]).unwrap()
    }

    #[test]
    fn classical_euler_lagrange() {
        let c = c1();
        let vol = volume(c);
        let l = &(&u(c, 1) * &u(c, 1)).scale(&q_half()) * &vol;
        assert_eq!(euler(&l).unwrap().comps[0], -&u(c, 2));
        assert_eq!(euler_via_linearization(&l).unwrap(), euler(&l).unwrap());
        let div = &(&u(c, 0) * &u(c, 1)) * &vol;
        assert!(euler(&div).unwrap().is_zero());
    }

    fn q_half() -> Q {
        Q::new(1.into(), 2.into())
    }

    #[test]
    fn euler_rejects_non_top_forms() {
        let c = BundleConfig::new(2, 1, 1).unwrap();
        let one = FormExpr::generator(c, Generator::horizontal(SlotSet::single(1), 1)).unwrap();
        assert!(euler(&one).is_err());
    }

    #[test]
    fn helmholtz_family() {
        let c = c1();
        let rep = |f: FormExpr| helmholtz(&cov(c, f)).unwrap();
        let cube = &(&u(c, 0) * &u(c, 0)) * &u(c, 0);
        for f in [u(c, 2), &u(c, 2) + &cube, u(c, 4)] {
            let r = rep(f);
            assert!(r.self_adjoint && r.d1_vanishes);
        }
        for f in [&u(c, 0) * &u(c, 1), u(c, 1)] {
            let r = rep(f);
            assert!(!r.self_adjoint && !r.d1_vanishes);
        }
    }

    #[test]
    fn u_element_examples() {
        let c = BundleConfig::new(2, 1, 2).unwrap();
        assert_eq!(u_element(&volume(c)).unwrap().omega, FormExpr::one(c));
        let low = FormExpr::generator(c, Generator::horizontal(SlotSet::single(2), 1)).unwrap();
        assert!(u_element(&low).unwrap().omega.is_zero());
        let e = embed_b(&u_element(&volume(c)).unwrap());
        assert!(differential(2, SlotKind::Horizontal, &e).unwrap().is_zero());
    }

    #[test]
    fn project_examples() {
        let c = BundleConfig::new(1, 1, 2).unwrap();
        let th = FormExpr::generator(c, Generator::vertical(SlotSet::single(1), 1, MultiIndex::zero(1))).unwrap();
        let mut chi = KappaField::zero(c);
        chi.set(1, SlotSet::EMPTY, &u(c, 0) + &(&th * &th.clone()).scale(&q(1))).unwrap();
        chi.set(1, SlotSet::single(1), u(c, 1)).unwrap();
        let p = project_kappa(&chi).unwrap();
        assert_eq!(p.get(1, SlotSet::EMPTY), u(p.config(), 0));
        let mut only_k = KappaField::zero(c);
        only_k.set(1, SlotSet::single(1), u(c, 3)).unwrap();
        assert!(project_kappa(&only_k).unwrap().is_zero());
    }

    #[test]
    fn tensor_examples() {
        let c = BundleConfig::new(1, 1, 2).unwrap();
        let th = FormExpr::generator(c, Generator::vertical(SlotSet::single(1), 1, MultiIndex::zero(1))).unwrap();
        let t = tensor_embed(c, &[th.clone()], &[u(c, 1)]).unwrap();
        assert_eq!(t.comps[0], &th * &u(c, 1));
        assert!(t.comps[1].is_zero());
        assert!(is_secondary_tensor(&covector_functional(&t).unwrap()));
        let z = tensor_embed(c, &[FormExpr::zero(c)], &[u(c, 1)]).unwrap();
        assert!(z.is_zero());
        let base = tensor_embed(c1(), &[], &[u(c1(), 2)]).unwrap();
        assert_eq!(base, cov(c1(), u(c1(), 2)));
        // dependence on D_1 chi fails
        let mut bad = covector_functional(&t).unwrap();
        bad.add_entry(0, 0, MultiIndex::new(vec![1]), th.clone()).unwrap();
        assert!(!is_secondary_tensor(&bad));
    }

    #[test]
    fn insertion_of_euler() {
        let c = c1();
        let l = &(&u(c, 1) * &u(c, 1)).scale(&q_half()) * &volume(c);
        let th = euler_form(&l).unwrap();
        let chi = KappaField::scalar(c, 1, u(c, 1)).unwrap();
        let SecondaryForm::Class(w) = insert(&chi, &th).unwrap() else { panic!() };
        assert_eq!(w, &(-&(&u(c, 2) * &u(c, 1))) * &volume(c));
        let SecondaryForm::Class(z) = insert(&KappaField::zero(c), &th).unwrap() else { panic!() };
        assert!(z.is_zero());
    }

    #[test]
    fn eta_single_contraction() {
        let c = BundleConfig::new(1, 1, 1).unwrap();
        let th = FormExpr::generator(c, Generator::vertical(SlotSet::single(1), 1, MultiIndex::zero(1))).unwrap();
        let w = &th * &volume(c);
        let SecondaryForm::Multi(t) = eta(1, &w).unwrap() else { panic!() };
        let chi = KappaField::scalar(c, 1, u(c, 2)).unwrap();
        let v = t.evaluate(&[chi]).unwrap();
        assert!(v == u(c, 2) || v == -&u(c, 2));
        assert!(eta(1, &volume(c)).is_err());
        let SecondaryForm::Class(h) = eta(0, &volume(c)).unwrap() else { panic!() };
        assert_eq!(h, volume(c));
    }
}
