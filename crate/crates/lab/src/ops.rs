//! Matrices of the form-level operators, preimage search and cohomology
//! dimensions over truncated slices.

use std::fmt;

use jetidf_core::calculus::total_derivative;
use jetidf_core::secondary::euler;
use jetidf_core::{differential, FormExpr, MultiIndex, SlotKind, Q};

use crate::linalg::{SparseMatrix, SparseVec};
use crate::report::Report;
use crate::slice::{basis, coordinates, SliceBasis, TruncationSpec};
use crate::error::{LabError, Result};

/// Most enlargement steps tried by [`solve_preimage`].
pub const MAX_ENLARGEMENTS: usize = 2;

/// A linear operator on forms, with its target-slice rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormMap {
    /// `d_slot^v`, `d_slot^h` or `d_slot`: raises the slot degree by one;
    /// the horizontal and full parts raise the jet order by one.
    Differential { slot: usize, kind: SlotKind },
    /// `D_mu` on `C*Lambda_{k-1}`: raises the jet order by one.
    TotalDerivative { mu: usize },
    /// Euler operator on `A d_k x^1 ... d_k x^n`: target components have
    /// jet order up to twice the source and slot-`k` degree zero.
    Euler,
}

impl fmt::Display for FormMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormMap::Differential { slot, kind } => {
                let t = match kind {
                    SlotKind::Vertical => "^v",
                    SlotKind::Horizontal => "^h",
                    SlotKind::Full => "",
                };
                write!(f, "d_{slot}{t}")
            }
            FormMap::TotalDerivative { mu } => write!(f, "D_{mu}"),
            FormMap::Euler => write!(f, "euler"),
        }
    }
}

impl FormMap {
    /// Bounds of the slice that contains every image of `spec`.
    pub fn target_spec(&self, spec: &TruncationSpec) -> TruncationSpec {
        match self {
            FormMap::Differential { kind: SlotKind::Vertical, .. } => spec.clone(),
            FormMap::Differential { .. } | FormMap::TotalDerivative { .. } => {
                spec.with_jet(spec.max_jet + 1)
            }
            FormMap::Euler => spec.with_jet(2 * spec.max_jet),
        }
    }

    /// Grades of the target parts (one per output component).
    pub fn target_grades(&self, spec: &TruncationSpec, grade: &[i32]) -> Result<Vec<Vec<i32>>> {
        match self {
            FormMap::Differential { slot, .. } => {
                spec.config()?.check_slot(*slot)?;
                let mut g = grade.to_vec();
                g[slot - 1] += 1;
                Ok(vec![g])
            }
            FormMap::TotalDerivative { mu } => {
                if *mu == 0 || *mu > spec.n {
                    return Err(LabError::Spec(format!("D_{mu} with n={}", spec.n)));
                }
                Ok(vec![grade.to_vec()])
            }
            FormMap::Euler => {
                let cfg = spec.config()?;
                Ok(jetidf_core::derivations::kappa_basis(cfg)
                    .into_iter()
                    .map(|(_, s)| {
                        let mut g = grade.to_vec();
                        g[spec.k - 1] = 0;
                        for i in s.iter() {
                            g[i - 1] -= 1;
                        }
                        g
                    })
                    .collect())
            }
        }
    }

    /// The image as a list of components.
    pub fn apply(&self, w: &FormExpr) -> Result<Vec<FormExpr>> {
        Ok(match self {
            FormMap::Differential { slot, kind } => vec![differential(*slot, *kind, w)?],
            FormMap::TotalDerivative { mu } => {
                vec![total_derivative(&MultiIndex::unit(w.config().n, *mu), w)?]
            }
            FormMap::Euler => euler(w)?.comps,
        })
    }
}

/// A target made of one slice per output component.
#[derive(Clone, Debug)]
pub struct TargetBasis {
    pub parts: Vec<SliceBasis>,
}

impl TargetBasis {
    pub fn len(&self) -> usize {
        self.parts.iter().map(|p| p.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn offset(&self, part: usize) -> usize {
        self.parts[..part].iter().map(|p| p.len()).sum()
    }

    /// Coordinates of a list of components; `Err` names the first escaping term.
    pub fn coordinates(&self, comps: &[FormExpr]) -> std::result::Result<SparseVec, String> {
        let mut v = SparseVec::new();
        for (i, c) in comps.iter().enumerate() {
            let off = self.offset(i);
            for (key, x) in coordinates(c) {
                match self.parts[i].index_of(&key) {
                    Some(r) => {
                        v.insert(off + r, x);
                    }
                    None => {
                        return Err(format!(
                            "{} in component {}",
                            FormExpr::term(c.config(), crate::slice::poly_of(&key.1), key.0),
                            i + 1
                        ))
                    }
                }
            }
        }
        Ok(v)
    }

    /// Components of a coordinate vector.
    pub fn element(&self, v: &SparseVec) -> Result<Vec<FormExpr>> {
        let mut out = Vec::new();
        let mut off = 0;
        for p in &self.parts {
            let cfg = p.spec.config()?;
            let mut acc = FormExpr::zero(cfg);
            for (i, x) in v.range(off..off + p.len()) {
                acc = &acc + &p.element(i - off)?.scale(x);
            }
            out.push(acc);
            off += p.len();
        }
        Ok(out)
    }
}

/// Matrix of an operator from a source slice into its target slices.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub map: FormMap,
    pub source: SliceBasis,
    pub target: TargetBasis,
    pub matrix: SparseMatrix,
}

/// Column `i` holds the coordinates of `map(basis_i)` in `target`.
pub fn matrix_between(map: FormMap, source: &SliceBasis, target: &TargetBasis) -> Result<OperatorMatrix> {
    let mut cols = Vec::with_capacity(source.len());
    for i in 0..source.len() {
        let e = source.element(i)?;
        let img = map.apply(&e).map_err(|err| LabError::Spec(format!("{map} on {e}: {err}")))?;
        let v = target
            .coordinates(&img)
            .map_err(|t| LabError::Escapes(format!("{map} maps basis element {} to {t}", i + 1)))?;
        cols.push(v);
    }
    Ok(OperatorMatrix {
        map,
        source: source.clone(),
        target: target.clone(),
        matrix: SparseMatrix::new(target.len(), cols),
    })
}

/// The matrix of `map` on the slice of `spec` at `grade`, into the target
/// slice given by the operator's enlargement rule.
pub fn operator_matrix(map: FormMap, spec: &TruncationSpec, grade: &[i32]) -> Result<OperatorMatrix> {
    let mut source = basis(spec, grade)?;
    if map == FormMap::Euler {
        let k = spec.k;
        source.keys.retain(|(m, _)| {
            m.factors().iter().all(|(g, _)| {
                if g.is_vertical() {
                    !g.slots().contains(k)
                } else {
                    g.slots() == jetidf_core::SlotSet::single(k)
                }
            })
        });
    }
    let tspec = map.target_spec(spec);
    let parts = map
        .target_grades(spec, grade)?
        .iter()
        .map(|g| basis(&tspec, g))
        .collect::<Result<Vec<_>>>()?;
    matrix_between(map, &source, &TargetBasis { parts })
}

/// Outcome of a preimage search.
#[derive(Clone, Debug)]
pub struct Preimage {
    /// `Some(eta)` with `map(eta) = target` exactly.
    pub witness: Option<FormExpr>,
    /// Enlargement steps used (or tried, when no witness was found).
    pub enlargements: usize,
    /// Bounds of the last slice searched.
    pub spec: TruncationSpec,
    pub source_dim: usize,
    pub rank: usize,
}

impl Preimage {
    pub fn report(&self, map: FormMap) -> Report {
        let bounds = self.spec.bounds();
        let verdict = match &self.witness {
            Some(_) => format!(
                "preimage found within bounds ({bounds}) after {} enlargement(s)",
                self.enlargements
            ),
            None => format!(
                "no preimage within bounds ({bounds}); evidence on a truncated slice, not a proof of nonexactness"
            ),
        };
        Report::new(
            &format!("solve_preimage {map}"),
            &self.spec,
            [
                ("source", self.source_dim),
                ("rank", self.rank),
                ("enlargements", self.enlargements),
            ],
            self.witness.iter().map(|w| w.to_string()).collect(),
            verdict,
        )
    }
}

/// Searches the slice at `grade` for `eta` with `map(eta) = target`,
/// enlarging the bounds up to [`MAX_ENLARGEMENTS`] times.
pub fn solve_preimage(
    map: FormMap,
    target: &[FormExpr],
    spec: &TruncationSpec,
    grade: &[i32],
) -> Result<Preimage> {
    let mut sp = spec.clone();
    let mut last = None;
    for step in 0..=MAX_ENLARGEMENTS {
        if step > 0 {
            sp = sp.enlarged();
        }
        let om = operator_matrix(map, &sp, grade)?;
        let echelon = om.matrix.echelon();
        let found = match om.target.coordinates(target) {
            Ok(b) => echelon.solve(&b),
            Err(_) => None,
        };
        if let Some(x) = found {
            let mut eta = FormExpr::zero(sp.config()?);
            for (i, c) in &x {
                eta = &eta + &om.source.element(*i)?.scale(c);
            }
            debug_assert_eq!(map.apply(&eta)?, target.to_vec());
            return Ok(Preimage {
                witness: Some(eta),
                enlargements: step,
                spec: sp,
                source_dim: om.source.len(),
                rank: echelon.rank(),
            });
        }
        last = Some((om.source.len(), echelon.rank()));
    }
    let (source_dim, rank) = last.unwrap_or((0, 0));
    Ok(Preimage {
        witness: None,
        enlargements: MAX_ENLARGEMENTS,
        spec: sp,
        source_dim,
        rank,
    })
}

/// The grade a map must start from to land in `grade`.
fn source_grade(map: FormMap, grade: &[i32]) -> Result<Vec<i32>> {
    match map {
        FormMap::Differential { slot, .. } => {
            let mut g = grade.to_vec();
            if slot == 0 || slot > g.len() {
                return Err(LabError::Spec(format!("slot {slot} out of range")));
            }
            g[slot - 1] -= 1;
            Ok(g)
        }
        FormMap::TotalDerivative { .. } => Ok(grade.to_vec()),
        FormMap::Euler => Err(LabError::Spec("euler cannot be an incoming map".into())),
    }
}

/// Dimensions of the cohomology of `l_in`, `l_out` at one slice.
#[derive(Clone, Debug)]
pub struct Cohomology {
    pub spec: TruncationSpec,
    pub grade: Vec<i32>,
    pub slice_dim: usize,
    pub kernel_dim: usize,
    pub image_dim: usize,
    pub incoming: Option<FormMap>,
    pub outgoing: Option<FormMap>,
}

impl Cohomology {
    pub fn dim(&self) -> usize {
        self.kernel_dim - self.image_dim
    }

    pub fn report(&self) -> Report {
        let name = |m: &Option<FormMap>| m.map(|m| m.to_string()).unwrap_or_else(|| "0".into());
        Report::new(
            &format!("cohomology {} / {}", name(&self.outgoing), name(&self.incoming)),
            &self.spec,
            [
                ("slice", self.slice_dim),
                ("kernel", self.kernel_dim),
                ("image", self.image_dim),
                ("cohomology", self.dim()),
            ],
            Vec::new(),
            format!(
                "dimension {} at grade {:?} within bounds ({}); images entering from outside the slice are cut off, so this is evidence on a truncated slice",
                self.dim(),
                self.grade,
                self.spec.bounds()
            ),
        )
    }
}

/// `dim ker l_out - dim (im l_in restricted to the slice)` on the slice of
/// `spec` at `grade`. The incoming map is taken from the slice one step
/// down with the base degree raised by one (unless x-free); `l_out o l_in = 0`
/// is checked on that slice.
pub fn cohomology_dim(
    l_in: Option<FormMap>,
    l_out: Option<FormMap>,
    spec: &TruncationSpec,
    grade: &[i32],
) -> Result<Cohomology> {
    let slice = basis(spec, grade)?;
    let kernel_dim = match l_out {
        Some(map) => slice.len() - operator_matrix(map, spec, grade)?.matrix.rank(),
        None => slice.len(),
    };
    let image_dim = match l_in {
        None => 0,
        Some(map) => {
            let g0 = source_grade(map, grade)?;
            let in_spec = if spec.base_degree > 0 {
                TruncationSpec { base_degree: spec.base_degree + 1, ..spec.clone() }
            } else {
                spec.clone()
            };
            let om = operator_matrix(map, &in_spec, &g0)?;
            if let Some(out) = l_out {
                for i in 0..om.source.len() {
                    let e = om.source.element(i)?;
                    for c in map.apply(&e)? {
                        if out.apply(&c)?.iter().any(|x| !x.is_zero()) {
                            return Err(LabError::NotComplex(format!(
                                "{out} o {map} is nonzero on {e}"
                            )));
                        }
                    }
                }
            }
            // dim(im ∩ S) = rank(M) + |S| - rank([M | I_S])
            let part = &om.target.parts[0];
            let mut cols = om.matrix.cols.clone();
            for key in &slice.keys {
                let r = part.index_of(key).ok_or_else(|| {
                    LabError::Spec("slice is not contained in the incoming target".into())
                })?;
                cols.push(SparseVec::from([(r, Q::from_integer(1.into()))]));
            }
            let joint = SparseMatrix::new(om.matrix.rows, cols).rank();
            om.matrix.rank() + slice.len() - joint
        }
    };
    debug_assert!(image_dim <= kernel_dim);
    Ok(Cohomology {
        spec: spec.clone(),
        grade: grade.to_vec(),
        slice_dim: slice.len(),
        kernel_dim,
        image_dim,
        incoming: l_in,
        outgoing: l_out,
    })
}
