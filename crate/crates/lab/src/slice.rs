//! Truncation bounds and basis enumeration of graded slices of `Lambda_k`.

use std::collections::BTreeSet;

use jetidf_core::coeff::PolyMonomial;
use jetidf_core::{Atom, BundleConfig, FormExpr, Generator, JetCoordinate, MultiIndex, Monomial, Poly, SlotSet};
use serde::Serialize;

use crate::error::{LabError, Result};

/// Largest slice the lab will enumerate.
pub const MAX_SLICE: usize = 250_000;

/// Bounds selecting a finite-dimensional slice of `Lambda_k`.
///
/// `base_degree = 0` selects the x-free (translation invariant) subalgebra;
/// it is preserved by every operator and never enlarged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruncationSpec {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    /// Max jet order `r` of fiber coordinates and vertical generators.
    pub max_jet: u32,
    /// Max polynomial degree `d` in fiber coordinates.
    pub fiber_degree: u32,
    /// Max total degree in base coordinates.
    pub base_degree: u32,
    /// Max order `s` of C-differential operators (operator slices only).
    pub op_order: u32,
    /// Inclusive multidegree window.
    pub window: Option<(Vec<i32>, Vec<i32>)>,
}

impl TruncationSpec {
    pub fn new(cfg: BundleConfig, max_jet: u32, fiber_degree: u32, base_degree: u32) -> Self {
        TruncationSpec {
            n: cfg.n,
            m: cfg.m,
            k: cfg.k,
            max_jet,
            fiber_degree,
            base_degree,
            op_order: 1,
            window: None,
        }
    }

    pub fn with_op_order(mut self, s: u32) -> Self {
        self.op_order = s;
        self
    }

    pub fn with_window(mut self, lo: Vec<i32>, hi: Vec<i32>) -> Self {
        self.window = Some((lo, hi));
        self
    }

    pub fn config(&self) -> Result<BundleConfig> {
        Ok(BundleConfig::new(self.n, self.m, self.k)?)
    }

    /// One enlargement step: `r+1`, `s+1`, and base degree `+1` unless x-free.
    pub fn enlarged(&self) -> Self {
        TruncationSpec {
            max_jet: self.max_jet + 1,
            op_order: self.op_order + 1,
            base_degree: if self.base_degree == 0 { 0 } else { self.base_degree + 1 },
            ..self.clone()
        }
    }

    pub fn with_jet(&self, r: u32) -> Self {
        TruncationSpec { max_jet: r, ..self.clone() }
    }

    pub fn in_window(&self, grade: &[i32]) -> bool {
        if grade.iter().any(|&g| g < 0) {
            return false;
        }
        match &self.window {
            None => true,
            Some((lo, hi)) => grade
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(g, (l, h))| l <= g && g <= h),
        }
    }

    /// Short human-readable bounds, carried by every report.
    pub fn bounds(&self) -> String {
        let mut s = format!(
            "n={} m={} k={} jet<={} fiber-degree<={} x-degree<={} op-order<={}",
            self.n, self.m, self.k, self.max_jet, self.fiber_degree, self.base_degree, self.op_order
        );
        if let Some((lo, hi)) = &self.window {
            s.push_str(&format!(" window={lo:?}..{hi:?}"));
        }
        s
    }

    /// True if the coefficient monomial fits the bounds.
    pub fn admits_coefficient(&self, pm: &PolyMonomial) -> bool {
        let (mut xd, mut ud) = (0u32, 0u32);
        for (a, e) in pm {
            match a {
                Atom::Coord(JetCoordinate::Base(_)) => xd += e,
                Atom::Coord(JetCoordinate::Fiber(_, s)) => {
                    if s.order() > self.max_jet {
                        return false;
                    }
                    ud += e;
                }
                Atom::Func(..) => return false,
            }
        }
        xd <= self.base_degree && ud <= self.fiber_degree
    }

    /// True if every generator of the monomial fits the jet bound.
    pub fn admits_monomial(&self, m: &Monomial) -> bool {
        m.factors().iter().all(|(g, _)| g.jet_order() <= self.max_jet)
    }
}

/// Basis element: a generator monomial times a coefficient monomial.
pub type SliceKey = (Monomial, PolyMonomial);

/// Ordered basis of a truncated slice, sorted by key with no duplicates.
#[derive(Clone, Debug)]
pub struct SliceBasis {
    pub spec: TruncationSpec,
    pub grade: Vec<i32>,
    pub keys: Vec<SliceKey>,
}

impl SliceBasis {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn element(&self, i: usize) -> Result<FormExpr> {
        let (m, pm) = &self.keys[i];
        Ok(FormExpr::term(
            self.spec.config()?,
            poly_of(pm),
            m.clone(),
        ))
    }

    pub fn index_of(&self, key: &SliceKey) -> Option<usize> {
        self.keys.binary_search(key).ok()
    }
}

pub(crate) fn poly_of(pm: &PolyMonomial) -> Poly {
    Poly::from_terms([(pm.clone(), jetidf_core::coeff::q(1))])
}

/// Coefficient monomials admitted by the spec, sorted.
pub fn coefficient_monomials(spec: &TruncationSpec) -> Vec<PolyMonomial> {
    let mut atoms_x: Vec<Atom> = (1..=spec.n).map(Atom::x).collect();
    atoms_x.sort();
    let mut atoms_u: Vec<Atom> = Vec::new();
    for j in 1..=spec.m {
        for s in MultiIndex::all_up_to(spec.n, spec.max_jet) {
            atoms_u.push(Atom::u(j, s));
        }
    }
    atoms_u.sort();
    let xs = power_products(&atoms_x, spec.base_degree);
    let us = power_products(&atoms_u, spec.fiber_degree);
    let mut out = BTreeSet::new();
    for a in &xs {
        for b in &us {
            let mut pm: PolyMonomial = a.iter().chain(b.iter()).cloned().collect();
            pm.sort();
            out.insert(pm);
        }
    }
    out.into_iter().collect()
}

/// All power products of `atoms` of total degree at most `deg`.
fn power_products(atoms: &[Atom], deg: u32) -> Vec<PolyMonomial> {
    fn rec(atoms: &[Atom], i: usize, left: u32, cur: &mut PolyMonomial, out: &mut Vec<PolyMonomial>) {
        if i == atoms.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            if e > 0 {
                cur.push((atoms[i].clone(), e));
            }
            rec(atoms, i + 1, left - e, cur, out);
            if e > 0 {
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(atoms, 0, deg, &mut Vec::new(), &mut out);
    out
}

/// Generators of `Lambda_k` fitting the jet bound whose slot set lies under `grade`.
fn generators(spec: &TruncationSpec, grade: &[i32]) -> Vec<Generator> {
    let mut out = Vec::new();
    for mask in 1u16..(1u16 << spec.k) {
        let s = SlotSet(mask as u8);
        if s.iter().any(|i| grade[i - 1] < 1) {
            continue;
        }
        for j in 1..=spec.m {
            for sigma in MultiIndex::all_up_to(spec.n, spec.max_jet) {
                out.push(Generator::vertical(s, j, sigma));
            }
        }
        for mu in 1..=spec.n {
            out.push(Generator::horizontal(s, mu));
        }
    }
    out.sort();
    out
}

/// Generator monomials of exactly the given multidegree.
pub fn generator_monomials(spec: &TruncationSpec, grade: &[i32]) -> Vec<Monomial> {
    let gens = generators(spec, grade);
    let mut out = Vec::new();
    fn rec(
        gens: &[Generator],
        i: usize,
        left: &mut Vec<i32>,
        cur: &mut Vec<(Generator, u32)>,
        out: &mut Vec<Monomial>,
    ) {
        if left.iter().all(|&x| x == 0) {
            let mut m = Monomial::one();
            for (g, e) in cur.iter() {
                for _ in 0..*e {
                    let (p, neg) = m.wedge(&Monomial::single(g.clone())).expect("sorted product");
                    debug_assert!(!neg);
                    m = p;
                }
            }
            out.push(m);
            return;
        }
        if i == gens.len() {
            return;
        }
        let g = &gens[i];
        let slots: Vec<usize> = g.slots().iter().collect();
        let room = slots.iter().map(|&s| left[s - 1]).min().unwrap_or(0).max(0) as u32;
        let cap = if g.parity() { room.min(1) } else { room };
        for e in (0..=cap).rev() {
            if e > 0 {
                for &s in &slots {
                    left[s - 1] -= e as i32;
                }
                cur.push((g.clone(), e));
            }
            rec(gens, i + 1, left, cur, out);
            if e > 0 {
                cur.pop();
                for &s in &slots {
                    left[s - 1] += e as i32;
                }
            }
        }
    }
    rec(&gens, 0, &mut grade.to_vec(), &mut Vec::new(), &mut out);
    out
}

/// Complete enumeration of the slice of the given multidegree.
pub fn basis(spec: &TruncationSpec, grade: &[i32]) -> Result<SliceBasis> {
    spec.config()?;
    if grade.len() != spec.k {
        return Err(LabError::Spec(format!(
            "grade of length {} with k={}",
            grade.len(),
            spec.k
        )));
    }
    if !spec.in_window(grade) {
        return Ok(SliceBasis {
            spec: spec.clone(),
            grade: grade.to_vec(),
            keys: Vec::new(),
        });
    }
    let monos = generator_monomials(spec, grade);
    let coeffs = coefficient_monomials(spec);
    let size = monos.len().saturating_mul(coeffs.len());
    if size > MAX_SLICE {
        return Err(LabError::Unbounded(format!(
            "slice of size {size} exceeds {MAX_SLICE} ({})",
            spec.bounds()
        )));
    }
    let mut keys: Vec<SliceKey> = Vec::with_capacity(size);
    for m in &monos {
        for c in &coeffs {
            keys.push((m.clone(), c.clone()));
        }
    }
    keys.sort();
    keys.dedup();
    Ok(SliceBasis {
        spec: spec.clone(),
        grade: grade.to_vec(),
        keys,
    })
}

/// Coordinates of a form as `(key, value)` pairs.
pub fn coordinates(w: &FormExpr) -> Vec<(SliceKey, jetidf_core::Q)> {
    let mut out = Vec::new();
    for (m, c) in w.terms() {
        for (pm, v) in c.terms() {
            out.push(((m.clone(), pm.clone()), v.clone()));
        }
    }
    out
}
