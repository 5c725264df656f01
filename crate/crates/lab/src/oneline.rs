//! Horizontal-form-valued C-differential operators of vertical degree one
//! and the map `w`, together with the sampler that looks for `w`-preimages
//! of `w`-closed operators.
//!
//! An element of degree `q` is `sum a D_sigma chi_alpha dx^I` with
//! `alpha` running over the generating fields, `|I| = q`, `|sigma| <= s`
//! and `a` in a slice of `C*Lambda_{k-1}`. The map is
//! `(w op)_{alpha, J} = - sum_{nu in J} eps(nu, J - nu) D_nu o op_{alpha, J - nu}`;
//! per-block Koszul signs from the coefficient parity are constant on
//! invariant blocks and are dropped, which leaves kernels, images and
//! preimage existence unchanged.

use std::collections::BTreeMap;
use std::fmt;

use jetidf_core::calculus::total_derivative;
use jetidf_core::derivations::kappa_basis;
use jetidf_core::{FormExpr, MultiIndex, Q};
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::Result;
use crate::linalg::{SparseMatrix, SparseVec};
use crate::ops::MAX_ENLARGEMENTS;
use crate::report::Report;
use crate::slice::{basis, coordinates, poly_of, SliceKey, TruncationSpec};

/// `(field index, sorted I, sigma, coefficient key)`.
pub type OpKey = (usize, Vec<usize>, MultiIndex, SliceKey);

/// Sparse operator element over [`OpKey`]s.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct OpElement {
    pub terms: BTreeMap<OpKey, Q>,
}

impl OpElement {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_scaled(&mut self, key: OpKey, c: Q) {
        let e = self.terms.entry(key.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &OpElement) -> OpElement {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_scaled(k.clone(), v.clone());
        }
        out
    }
}

impl fmt::Display for OpElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((a, i, s, (m, pm)), c)| {
                let coef = poly_of(pm).scale(c);
                let form = if m.is_one() { String::new() } else { format!("*{m:?}") };
                format!("[{}; I={:?}] ({coef}){form} D{:?}", a + 1, i, s.entries())
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn subsets(n: usize, q: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, q: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == q {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            cur.push(i);
            rec(i + 1, n, q, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, q, &mut Vec::new(), &mut out);
    out
}

/// Basis of degree-`q` operators: coefficients in the `C*Lambda_{k-1}` part
/// (vertical generators only) of the slice of grade `(lower, 0)`.
pub fn op_basis(spec: &TruncationSpec, lower: &[i32], q: usize) -> Result<Vec<OpKey>> {
    let cfg = spec.config()?;
    if q > spec.n {
        return Ok(Vec::new());
    }
    let mut grade = lower.to_vec();
    grade.push(0);
    let mut coeffs = basis(spec, &grade)?;
    coeffs.keys.retain(|(m, _)| m.factors().iter().all(|(g, _)| g.is_vertical()));
    let mut out = Vec::new();
    for a in 0..kappa_basis(cfg).len() {
        for i in subsets(spec.n, q) {
            for s in MultiIndex::all_up_to(spec.n, spec.op_order) {
                for c in &coeffs.keys {
                    out.push((a, i.clone(), s.clone(), c.clone()));
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// `w` applied to one basis operator.
pub fn w_basis(spec: &TruncationSpec, key: &OpKey) -> Result<OpElement> {
    let cfg = spec.config()?;
    let (a, i, s, (m, pm)) = key;
    let coef = FormExpr::term(cfg, poly_of(pm), m.clone());
    let mut out = OpElement::default();
    for nu in 1..=spec.n {
        if i.contains(&nu) {
            continue;
        }
        let below = i.iter().filter(|&&x| x < nu).count();
        let sign = if below % 2 == 0 { -Q::one() } else { Q::one() };
        let mut j = i.clone();
        j.push(nu);
        j.sort();
        let da = total_derivative(&MultiIndex::unit(spec.n, nu), &coef)?;
        for (ck, v) in coordinates(&da) {
            out.add_scaled((*a, j.clone(), s.clone(), ck), &sign * &v);
        }
        out.add_scaled((*a, j.clone(), s.bump(nu), (m.clone(), pm.clone())), sign.clone());
    }
    Ok(out)
}

pub fn apply_w(spec: &TruncationSpec, e: &OpElement) -> Result<OpElement> {
    let mut out = OpElement::default();
    for (k, c) in &e.terms {
        for (k2, v) in w_basis(spec, k)?.terms {
            out.add_scaled(k2, c * &v);
        }
    }
    Ok(out)
}

/// Matrix of `w` on the degree-`q` operator slice; rows are indexed by
/// the image keys (plus any `extra` keys), sorted.
pub struct WMatrix {
    pub source: Vec<OpKey>,
    pub rows: Vec<OpKey>,
    pub matrix: SparseMatrix,
}

impl WMatrix {
    pub fn new(spec: &TruncationSpec, lower: &[i32], q: usize, extra: &OpElement) -> Result<Self> {
        let source = op_basis(spec, lower, q)?;
        let images = source
            .iter()
            .map(|k| w_basis(spec, k))
            .collect::<Result<Vec<_>>>()?;
        let mut rows: Vec<OpKey> = images
            .iter()
            .flat_map(|e| e.terms.keys().cloned())
            .chain(extra.terms.keys().cloned())
            .collect();
        rows.sort();
        rows.dedup();
        let cols = images.iter().map(|e| to_vec(&rows, e)).collect();
        Ok(WMatrix {
            matrix: SparseMatrix::new(rows.len(), cols),
            source,
            rows,
        })
    }

    pub fn element(&self, x: &SparseVec) -> OpElement {
        OpElement {
            terms: x.iter().map(|(i, c)| (self.source[*i].clone(), c.clone())).collect(),
        }
    }
}

fn to_vec(rows: &[OpKey], e: &OpElement) -> SparseVec {
    e.terms
        .iter()
        .map(|(k, v)| (rows.binary_search(k).expect("row present"), v.clone()))
        .collect()
}

/// One sampled closed operator and the outcome of its preimage search.
#[derive(Clone, Debug)]
pub struct Sample {
    pub closed: OpElement,
    pub witness: Option<OpElement>,
    pub enlargements: usize,
}

/// Samples of `w`-closed degree-`q` operators with their preimage searches.
#[derive(Clone, Debug)]
pub struct OneLineRun {
    pub spec: TruncationSpec,
    pub q: usize,
    pub slice_dim: usize,
    pub closed_dim: usize,
    pub samples: Vec<Sample>,
}

impl OneLineRun {
    pub fn all_found(&self) -> bool {
        self.samples.iter().all(|s| s.witness.is_some())
    }

    pub fn report(&self) -> Report {
        let found = self.samples.iter().filter(|s| s.witness.is_some()).count();
        let max_enl = self.samples.iter().map(|s| s.enlargements).max().unwrap_or(0);
        let verdict = if self.all_found() {
            format!(
                "every sampled closed operator of degree {} is w-exact within bounds ({}) after at most {max_enl} enlargement(s); evidence on a truncated slice, not a proof",
                self.q,
                self.spec.bounds()
            )
        } else {
            format!(
                "{} of {} sampled closed operators have no preimage within bounds ({}) after {MAX_ENLARGEMENTS} enlargements",
                self.samples.len() - found,
                self.samples.len(),
                self.spec.bounds()
            )
        };
        Report::new(
            &format!("w at p=1 q={}", self.q),
            &self.spec,
            [
                ("slice", self.slice_dim),
                ("closed", self.closed_dim),
                ("samples", self.samples.len()),
                ("found", found),
                ("max_enlargements", max_enl),
            ],
            self.samples
                .iter()
                .filter_map(|s| s.witness.as_ref().map(|w| w.to_string()))
                .collect(),
            verdict,
        )
    }
}

/// Searches for `eta` of degree `q - 1` with `w(eta) = target`, enlarging
/// the bounds up to [`MAX_ENLARGEMENTS`] times.
pub fn w_preimage(
    spec: &TruncationSpec,
    lower: &[i32],
    q: usize,
    target: &OpElement,
) -> Result<(Option<OpElement>, usize)> {
    if q == 0 {
        return Ok((target.is_zero().then(OpElement::default), 0));
    }
    let mut sp = spec.clone();
    for step in 0..=MAX_ENLARGEMENTS {
        if step > 0 {
            sp = sp.enlarged();
        }
        let wm = WMatrix::new(&sp, lower, q - 1, target)?;
        if let Some(x) = wm.matrix.echelon().solve(&to_vec(&wm.rows, target)) {
            let eta = wm.element(&x);
            debug_assert_eq!(&apply_w(&sp, &eta)?, target);
            return Ok((Some(eta), step));
        }
    }
    Ok((None, MAX_ENLARGEMENTS))
}

/// Draws `count` random closed operators of degree `q` from the kernel of
/// `w` on the slice (random integer combinations of up to three kernel
/// vectors) and searches each for a preimage.
pub fn one_line_samples(
    spec: &TruncationSpec,
    lower: &[i32],
    q: usize,
    count: usize,
    rng: &mut impl Rng,
) -> Result<OneLineRun> {
    let wm = WMatrix::new(spec, lower, q, &OpElement::default())?;
    let ech = wm.matrix.echelon();
    let kernel = ech.kernel();
    let mut samples = Vec::new();
    for _ in 0..count {
        let mut x = SparseVec::new();
        if !kernel.is_empty() {
            for _ in 0..3 {
                let v = &kernel[rng.gen_range(0..kernel.len())];
                let mut c = rng.gen_range(-3i64..=3);
                if c == 0 {
                    c = 1;
                }
                let c = Q::from_integer(c.into());
                for (i, y) in v {
                    let e = x.entry(*i).or_insert_with(Q::zero);
                    *e += &c * y;
                    if e.is_zero() {
                        x.remove(i);
                    }
                }
            }
        }
        let closed = wm.element(&x);
        debug_assert!(apply_w(spec, &closed)?.is_zero());
        let (witness, enlargements) = w_preimage(spec, lower, q, &closed)?;
        samples.push(Sample { closed, witness, enlargements });
    }
    Ok(OneLineRun {
        spec: spec.clone(),
        q,
        slice_dim: wm.source.len(),
        closed_dim: kernel.len(),
        samples,
    })
}
