//! Sparse exact linear algebra over `Q`.
//!
//! Matrices are stored by column. Elimination brings columns to echelon form
//! by leading row, keeps track of how each pivot column was combined from the
//! original columns, and works on connected blocks (columns linked by a
//! shared row) independently.

use std::collections::{BTreeMap, HashMap};

use jetidf_core::Q;
use num_traits::{One, Zero};

/// Sparse vector: index to nonzero value.
pub type SparseVec = BTreeMap<usize, Q>;

fn axpy(y: &mut SparseVec, a: &Q, x: &SparseVec) {
    for (i, v) in x {
        let e = y.entry(*i).or_insert_with(Q::zero);
        *e += a * v;
        if e.is_zero() {
            y.remove(i);
        }
    }
}

/// Column-major sparse matrix with a fixed row count.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: Vec<SparseVec>) -> Self {
        debug_assert!(cols.iter().all(|c| c.keys().all(|&r| r < rows)));
        SparseMatrix { rows, cols }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> Q {
        self.cols[c].get(&r).cloned().unwrap_or_else(Q::zero)
    }

    pub fn apply(&self, x: &SparseVec) -> SparseVec {
        let mut y = SparseVec::new();
        for (c, v) in x {
            axpy(&mut y, v, &self.cols[*c]);
        }
        y
    }

    /// `self * other`; `other.rows` must equal `self.ncols()`.
    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(other.rows, self.ncols(), "shape mismatch");
        SparseMatrix::new(self.rows, other.cols.iter().map(|c| self.apply(c)).collect())
    }

    /// Column indices grouped into blocks that share no row.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let n = self.cols.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut owner: HashMap<usize, usize> = HashMap::new();
        for (c, col) in self.cols.iter().enumerate() {
            for r in col.keys() {
                match owner.get(r) {
                    Some(&o) => {
                        let (a, b) = (find(&mut parent, o), find(&mut parent, c));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                    None => {
                        owner.insert(*r, c);
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for c in 0..n {
            let root = find(&mut parent, c);
            groups.entry(root).or_default().push(c);
        }
        groups.into_values().collect()
    }

    pub fn echelon(&self) -> Echelon {
        Echelon::new(self)
    }

    pub fn rank(&self) -> usize {
        self.echelon().rank()
    }
}

/// `dim ker(out) - rank(inc)` for a complex `out o inc = 0`; `None` if the
/// pair is not a complex or the shapes do not chain.
pub fn homology_dim(inc: &SparseMatrix, out: &SparseMatrix) -> Option<usize> {
    if inc.rows != out.ncols() || out.mul(inc).nnz() != 0 {
        return None;
    }
    Some(out.ncols() - out.rank() - inc.rank())
}

#[derive(Clone, Debug)]
struct Pivot {
    vec: SparseVec,
    combo: SparseVec,
}

/// Column echelon form of a matrix, with kernel and solver.
#[derive(Clone, Debug)]
pub struct Echelon {
    pivots: HashMap<usize, Pivot>,
    kernel: Vec<SparseVec>,
    blocks: usize,
}

impl Echelon {
    pub fn new(m: &SparseMatrix) -> Self {
        let mut pivots: HashMap<usize, Pivot> = HashMap::new();
        let mut kernel = Vec::new();
        let blocks = m.blocks();
        for block in &blocks {
            for &c in block {
                let mut v = m.cols[c].clone();
                let mut combo = SparseVec::from([(c, Q::one())]);
                reduce(&pivots, &mut v, &mut combo);
                match v.iter().next().map(|(r, x)| (*r, x.clone())) {
                    None => kernel.push(combo),
                    Some((r, lead)) => {
                        let inv = lead.recip();
                        for x in v.values_mut() {
                            *x *= &inv;
                        }
                        for x in combo.values_mut() {
                            *x *= &inv;
                        }
                        pivots.insert(r, Pivot { vec: v, combo });
                    }
                }
            }
        }
        Echelon {
            pivots,
            kernel,
            blocks: blocks.len(),
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks
    }

    /// A basis of the kernel, in terms of the original columns.
    pub fn kernel(&self) -> &[SparseVec] {
        &self.kernel
    }

    /// Some `x` with `M x = b`, if one exists.
    pub fn solve(&self, b: &SparseVec) -> Option<SparseVec> {
        let mut v = b.clone();
        let mut combo = SparseVec::new();
        reduce(&self.pivots, &mut v, &mut combo);
        if !v.is_empty() {
            return None;
        }
        // reduce subtracted the combination, so negate
        Some(combo.into_iter().map(|(i, x)| (i, -x)).collect())
    }
}

/// Clears the leading entries of `v` that sit on pivot rows, mirroring each
/// step in `combo`.
fn reduce(pivots: &HashMap<usize, Pivot>, v: &mut SparseVec, combo: &mut SparseVec) {
    let mut from = 0usize;
    loop {
        let next = v
            .range(from..)
            .find(|(r, _)| pivots.contains_key(r))
            .map(|(r, x)| (*r, x.clone()));
        let Some((r, x)) = next else { break };
        let p = &pivots[&r];
        let a = -x;
        axpy(v, &a, &p.vec);
        axpy(combo, &a, &p.combo);
        from = r + 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use jetidf_core::coeff::q;

    fn col(entries: &[(usize, i64)]) -> SparseVec {
        entries.iter().map(|&(r, v)| (r, q(v))).collect()
    }

    #[test]
    fn rank_kernel_and_solve() {
        // columns: e0+e1, e1+e2, e0-e2 (dependent), e3
        let m = SparseMatrix::new(
            4,
            vec![
                col(&[(0, 1), (1, 1)]),
                col(&[(1, 1), (2, 1)]),
                col(&[(0, 1), (2, -1)]),
                col(&[(3, 2)]),
            ],
        );
        let e = m.echelon();
        assert_eq!(e.rank(), 3);
        assert_eq!(e.kernel().len(), 1);
        assert!(m.apply(&e.kernel()[0]).is_empty());
        assert_eq!(e.num_blocks(), 2);
        let b = col(&[(0, 2), (2, -2), (3, 4)]);
        let x = e.solve(&b).unwrap();
        assert_eq!(m.apply(&x), b);
        assert!(e.solve(&col(&[(0, 1)])).is_none());
    }

    #[test]
    fn product_matches_composition() {
        let a = SparseMatrix::new(2, vec![col(&[(0, 1)]), col(&[(0, 1), (1, 3)])]);
        let b = SparseMatrix::new(2, vec![col(&[(1, 2)]), col(&[(0, -1)])]);
        let ab = a.mul(&b);
        let x = col(&[(0, 5), (1, 7)]);
        assert_eq!(ab.apply(&x), a.apply(&b.apply(&x)));
    }
}
