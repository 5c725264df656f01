//! Index types shared by every layer: bundle dimensions, multi-indices,
//! slot sets and jet coordinates.

use std::fmt;

use crate::error::{AlgebraError, Result};

/// Largest iteration depth supported by the slot bitmask.
pub const MAX_SLOTS: usize = 8;

/// Dimensions of the trivial bundle `R^{n+m} -> R^n` and the iteration depth `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BundleConfig {
    pub n: usize,
    pub m: usize,
    pub k: usize,
}

impl BundleConfig {
    pub fn new(n: usize, m: usize, k: usize) -> Result<Self> {
        if n == 0 || m == 0 || k == 0 {
            return Err(AlgebraError::InvalidConfig(format!(
                "n, m, k must be positive (got n={n}, m={m}, k={k})"
            )));
        }
        if k > MAX_SLOTS {
            return Err(AlgebraError::InvalidConfig(format!(
                "k={k} exceeds the supported maximum {MAX_SLOTS}"
            )));
        }
        Ok(BundleConfig { n, m, k })
    }

    /// The same bundle one iteration level up (`k -> k + 1`).
    pub fn promoted(&self) -> Self {
        BundleConfig { k: self.k + 1, ..*self }
    }

    pub fn check_slot(&self, slot: usize) -> Result<()> {
        if slot == 0 || slot > self.k {
            return Err(AlgebraError::SlotOutOfRange { slot, k: self.k });
        }
        Ok(())
    }

    pub fn check_slots(&self, s: SlotSet) -> Result<()> {
        match s.iter().find(|&i| i > self.k) {
            Some(slot) => Err(AlgebraError::SlotOutOfRange { slot, k: self.k }),
            None => Ok(()),
        }
    }

    pub fn check_coordinate(&self, c: &JetCoordinate) -> Result<()> {
        match c {
            JetCoordinate::Base(mu) if *mu == 0 || *mu > self.n => Err(
                AlgebraError::CoordinateOutOfRange(format!("x{mu} with n={}", self.n)),
            ),
            JetCoordinate::Fiber(j, _) if *j == 0 || *j > self.m => Err(
                AlgebraError::CoordinateOutOfRange(format!("u{j} with m={}", self.m)),
            ),
            JetCoordinate::Fiber(_, s) if s.arity() != self.n => Err(
                AlgebraError::CoordinateOutOfRange(format!(
                    "multi-index of arity {} with n={}",
                    s.arity(),
                    self.n
                )),
            ),
            _ => Ok(()),
        }
    }

    /// All subsets of `{1, ..., k-1}` in increasing bitmask order.
    pub fn lower_slot_sets(&self) -> Vec<SlotSet> {
        (0u16..(1u16 << (self.k - 1)))
            .map(|b| SlotSet(b as u8))
            .collect()
    }
}

impl fmt::Display for BundleConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} m={} k={}", self.n, self.m, self.k)
    }
}

/// Multi-index `sigma = (sigma_1, ..., sigma_n)` of nonnegative integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    /// The unit multi-index `1_mu` (1-based `mu`).
    pub fn unit(n: usize, mu: usize) -> Self {
        let mut v = vec![0; n];
        v[mu - 1] = 1;
        MultiIndex(v)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// `sigma + 1_mu`.
    pub fn bump(&self, mu: usize) -> Self {
        let mut v = self.0.clone();
        v[mu - 1] += 1;
        MultiIndex(v)
    }

    pub fn add(&self, other: &MultiIndex) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other` when `other <= self` componentwise.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<Self> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    /// Product of binomial coefficients `prod_i C(self_i, sub_i)`.
    pub fn binomial(&self, sub: &MultiIndex) -> u64 {
        self.0
            .iter()
            .zip(&sub.0)
            .map(|(&a, &b)| binom(a as u64, b as u64))
            .product()
    }

    /// `prod_i sigma_i!`.
    pub fn factorial(&self) -> u64 {
        self.0
            .iter()
            .map(|&a| (1..=a as u64).product::<u64>())
            .product()
    }

    /// Every `tau <= self` componentwise, in increasing total order.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex(Vec::new())];
        for &e in &self.0 {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..=e).map(move |i| {
                        let mut v = p.0.clone();
                        v.push(i);
                        MultiIndex(v)
                    })
                })
                .collect();
        }
        out.sort_by_key(|s| (s.order(), s.clone()));
        out
    }

    /// All multi-indices of arity `n` with order at most `max_order`,
    /// sorted by order then lexicographically.
    pub fn all_up_to(n: usize, max_order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if i == cur.len() {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for e in 0..=left {
                cur[i] = e;
                rec(i + 1, left - e, cur, out);
            }
            cur[i] = 0;
        }
        rec(0, max_order, &mut cur, &mut out);
        out.sort_by_key(|s| (s.order(), s.clone()));
        out
    }
}

pub(crate) fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// A subset of the de Rham slots `{1, ..., k}` stored as a bitmask
/// (bit `i - 1` for slot `i`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlotSet(pub u8);

impl SlotSet {
    pub const EMPTY: SlotSet = SlotSet(0);

    pub fn single(slot: usize) -> Self {
        SlotSet(1 << (slot - 1))
    }

    pub fn from_slots(slots: &[usize]) -> Self {
        SlotSet(slots.iter().fold(0u8, |acc, &s| acc | (1 << (s - 1))))
    }

    pub fn contains(self, slot: usize) -> bool {
        slot >= 1 && self.0 & (1 << (slot - 1)) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Parity `|S| mod 2` (true = odd).
    pub fn parity(self) -> bool {
        self.len() % 2 == 1
    }

    pub fn with(self, slot: usize) -> Self {
        SlotSet(self.0 | (1 << (slot - 1)))
    }

    pub fn without(self, slot: usize) -> Self {
        SlotSet(self.0 & !(1 << (slot - 1)))
    }

    pub fn is_subset_of(self, other: SlotSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Slots in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (1..=MAX_SLOTS).filter(move |&i| self.contains(i))
    }

    /// Number of members strictly below `slot`.
    pub fn count_below(self, slot: usize) -> usize {
        self.iter().filter(|&s| s < slot).count()
    }

    /// Indicator vector in `Z^k`.
    pub fn indicator(self, k: usize) -> Vec<i32> {
        (1..=k).map(|i| self.contains(i) as i32).collect()
    }
}

impl fmt::Display for SlotSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.iter().map(|s| s.to_string()).collect();
        write!(f, "{{{}}}", v.join(","))
    }
}

/// A coordinate of the jet space: base `x^mu` or fiber `u^j_sigma` (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum JetCoordinate {
    Base(usize),
    Fiber(usize, MultiIndex),
}

impl JetCoordinate {
    pub fn u(j: usize, sigma: MultiIndex) -> Self {
        JetCoordinate::Fiber(j, sigma)
    }

    pub fn jet_order(&self) -> u32 {
        match self {
            JetCoordinate::Base(_) => 0,
            JetCoordinate::Fiber(_, s) => s.order(),
        }
    }

    pub fn is_fiber(&self) -> bool {
        matches!(self, JetCoordinate::Fiber(..))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_enumeration() {
        let all = MultiIndex::all_up_to(2, 2);
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], MultiIndex::zero(2));
        let s = MultiIndex::new(vec![2, 1]);
        assert_eq!(s.sub_indices().len(), 6);
        assert_eq!(s.binomial(&MultiIndex::new(vec![1, 1])), 2);
        assert_eq!(s.factorial(), 2);
    }

    #[test]
    fn slot_sets() {
        let s = SlotSet::from_slots(&[1, 3]);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(s.count_below(3), 1);
        assert!(!s.parity());
        assert_eq!(s.with(2).len(), 3);
        assert_eq!(s.indicator(3), vec![1, 0, 1]);
    }

    #[test]
    fn config_validation() {
        assert!(BundleConfig::new(0, 1, 1).is_err());
        let c = BundleConfig::new(1, 1, 2).unwrap();
        assert!(c.check_slot(3).is_err());
        assert_eq!(c.lower_slot_sets().len(), 2);
    }
}
