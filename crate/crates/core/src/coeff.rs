//! The coefficient ring: polynomials with exact rational coefficients in
//! jet coordinates and in registered opaque smooth functions.
//!
//! An opaque function `f(x, u, ...)` is registered once with the finite list
//! of jet coordinates it depends on. Partial derivatives of an opaque
//! function are new atoms carrying the sorted list of differentiation
//! variables, so `d/du d/dx f` and `d/dx d/du f` coincide.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::config::{JetCoordinate, MultiIndex};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Handle to a registered opaque function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FuncId(pub usize);

#[derive(Clone, Debug)]
pub struct FuncInfo {
    pub name: String,
    pub deps: Vec<JetCoordinate>,
}

fn registry() -> &'static RwLock<Vec<FuncInfo>> {
    static REG: OnceLock<RwLock<Vec<FuncInfo>>> = OnceLock::new();
    REG.get_or_init(|| RwLock::new(Vec::new()))
}

/// Registers (or looks up) an opaque function by name and dependency list.
/// Appending is serialized by the registry lock; lookups take a read lock.
pub fn register_function(name: &str, deps: &[JetCoordinate]) -> FuncId {
    let mut deps = deps.to_vec();
    deps.sort();
    deps.dedup();
    {
        let reg = registry().read().expect("function registry poisoned");
        if let Some(i) = reg.iter().position(|f| f.name == name && f.deps == deps) {
            return FuncId(i);
        }
    }
    let mut reg = registry().write().expect("function registry poisoned");
    if let Some(i) = reg.iter().position(|f| f.name == name && f.deps == deps) {
        return FuncId(i);
    }
    reg.push(FuncInfo { name: name.to_string(), deps });
    FuncId(reg.len() - 1)
}

pub fn function_info(id: FuncId) -> FuncInfo {
    registry().read().expect("function registry poisoned")[id.0].clone()
}

/// A polynomial variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Coord(JetCoordinate),
    /// Opaque function with its formal partial derivatives (sorted).
    Func(FuncId, Vec<JetCoordinate>),
}

impl Atom {
    pub fn x(mu: usize) -> Self {
        Atom::Coord(JetCoordinate::Base(mu))
    }

    pub fn u(j: usize, sigma: MultiIndex) -> Self {
        Atom::Coord(JetCoordinate::Fiber(j, sigma))
    }

    /// Jet coordinates this atom may depend on.
    pub fn dependencies(&self) -> Vec<JetCoordinate> {
        match self {
            Atom::Coord(c) => vec![c.clone()],
            Atom::Func(id, _) => function_info(*id).deps,
        }
    }

    fn partial(&self, v: &JetCoordinate) -> Option<Atom> {
        match self {
            Atom::Coord(_) => None,
            Atom::Func(id, ds) => {
                if function_info(*id).deps.contains(v) {
                    let mut ds = ds.clone();
                    ds.push(v.clone());
                    ds.sort();
                    Some(Atom::Func(*id, ds))
                } else {
                    None
                }
            }
        }
    }
}

/// Power product of atoms, sorted, with positive exponents.
pub type PolyMonomial = Vec<(Atom, u32)>;

fn mono_mul(a: &PolyMonomial, b: &PolyMonomial) -> PolyMonomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0.clone(), a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Exact polynomial over `Q` in [`Atom`]s. Zero terms are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    terms: BTreeMap<PolyMonomial, Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn int(c: i64) -> Self {
        Poly::constant(q(c))
    }

    pub fn atom(a: Atom) -> Self {
        let mut p = Poly::zero();
        p.terms.insert(vec![(a, 1)], Q::one());
        p
    }

    pub fn coord(c: JetCoordinate) -> Self {
        Poly::atom(Atom::Coord(c))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (PolyMonomial, Q)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PolyMonomial, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value if this polynomial is constant.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: PolyMonomial, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::one(), |acc, _| &acc * self)
    }

    /// Atoms occurring in the polynomial.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut v: Vec<Atom> = self
            .terms
            .keys()
            .flat_map(|m| m.iter().map(|(a, _)| a.clone()))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    /// Jet coordinates the polynomial may depend on (through atoms or
    /// opaque-function dependency lists).
    pub fn dependencies(&self) -> Vec<JetCoordinate> {
        let mut v: Vec<JetCoordinate> =
            self.atoms().iter().flat_map(|a| a.dependencies()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Highest jet order among the dependencies.
    pub fn jet_order(&self) -> u32 {
        self.dependencies()
            .iter()
            .map(|c| c.jet_order())
            .max()
            .unwrap_or(0)
    }

    /// Exact partial derivative with respect to a jet coordinate.
    pub fn partial(&self, v: &JetCoordinate) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (i, (a, e)) in m.iter().enumerate() {
                let factor: Poly = match a {
                    Atom::Coord(cv) if cv == v => Poly::one(),
                    Atom::Coord(_) => continue,
                    Atom::Func(..) => match a.partial(v) {
                        Some(da) => Poly::atom(da),
                        None => continue,
                    },
                };
                let mut rest = m.clone();
                if *e == 1 {
                    rest.remove(i);
                } else {
                    rest[i].1 -= 1;
                }
                let coef = c * q(*e as i64);
                for (fm, fc) in factor.terms {
                    out.add_term(mono_mul(&rest, &fm), &coef * fc);
                }
            }
        }
        out
    }

    /// Total derivative `D_mu = d/dx^mu + sum u^j_{sigma + 1_mu} d/du^j_sigma`.
    pub fn total_derivative(&self, mu: usize, n: usize) -> Poly {
        let mut out = self.partial(&JetCoordinate::Base(mu));
        for dep in self.dependencies() {
            if let JetCoordinate::Fiber(j, s) = &dep {
                let d = self.partial(&dep);
                if !d.is_zero() {
                    let next = Poly::coord(JetCoordinate::Fiber(*j, s.bump(mu)));
                    out = &out + &(&d * &next);
                }
            }
        }
        debug_assert!(mu >= 1 && mu <= n);
        out
    }

    /// Substitutes polynomials for coordinate atoms (opaque functions are
    /// left untouched).
    pub fn substitute(&self, f: &dyn Fn(&JetCoordinate) -> Option<Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut acc = Poly::constant(c.clone());
            for (a, e) in m {
                let base = match a {
                    Atom::Coord(cv) => f(cv).unwrap_or_else(|| Poly::atom(a.clone())),
                    _ => Poly::atom(a.clone()),
                };
                acc = &acc * &base.pow(*e);
            }
            out = &out + &acc;
        }
        out
    }

    /// Total degree in fiber coordinates (opaque functions count as degree 0).
    pub fn fiber_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| {
                m.iter()
                    .filter(|(a, _)| matches!(a, Atom::Coord(JetCoordinate::Fiber(..))))
                    .map(|(_, e)| e)
                    .sum()
            })
            .max()
            .unwrap_or(0)
    }

    /// True if the polynomial only mentions base coordinates.
    pub fn is_base_only(&self) -> bool {
        self.dependencies().iter().all(|c| !c.is_fiber())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(mono_mul(ma, mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

pub fn fmt_rational(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn fmt_coordinate(c: &JetCoordinate) -> String {
    match c {
        JetCoordinate::Base(mu) => format!("x{mu}"),
        JetCoordinate::Fiber(j, s) if s.is_zero() => format!("u{j}"),
        JetCoordinate::Fiber(j, s) => {
            let e: Vec<String> = s.entries().iter().map(|v| v.to_string()).collect();
            format!("u{j}_({})", e.join(","))
        }
    }
}

pub fn fmt_atom(a: &Atom) -> String {
    match a {
        Atom::Coord(c) => fmt_coordinate(c),
        Atom::Func(id, ds) => {
            let info = function_info(*id);
            let deps: Vec<String> = info.deps.iter().map(fmt_coordinate).collect();
            let mut s = format!("${}({})", info.name, deps.join(","));
            if !ds.is_empty() {
                let d: Vec<String> = ds.iter().map(fmt_coordinate).collect();
                s.push_str(&format!("_{{{}}}", d.join(",")));
            }
            s
        }
    }
}

fn fmt_poly_monomial(m: &PolyMonomial) -> String {
    m.iter()
        .map(|(a, e)| {
            if *e == 1 {
                fmt_atom(a)
            } else {
                format!("{}^{}", fmt_atom(a), e)
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

impl fmt::Display for Poly {
    /// Canonical text: terms in descending monomial order, `" + "`/`" - "`
    /// separators, coefficient first (`1/2*u1^2`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            if m.is_empty() {
                write!(f, "{}", fmt_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{}", fmt_poly_monomial(m))?;
            } else {
                write!(f, "{}*{}", fmt_rational(&abs), fmt_poly_monomial(m))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(s: &[u32]) -> Poly {
        Poly::atom(Atom::u(1, MultiIndex::new(s.to_vec())))
    }

    #[test]
    fn partial_of_half_square() {
        let p = u(&[1]).pow(2).scale(&q_frac(1, 2));
        let d = p.partial(&JetCoordinate::u(1, MultiIndex::new(vec![1])));
        assert_eq!(d, u(&[1]));
        let x = Poly::atom(Atom::x(1));
        assert!(x.partial(&JetCoordinate::u(1, MultiIndex::zero(1))).is_zero());
    }

    #[test]
    fn opaque_partials_commute() {
        let xc = JetCoordinate::Base(1);
        let uc = JetCoordinate::u(1, MultiIndex::zero(1));
        let f = register_function("f_coeff_test", &[xc.clone(), uc.clone()]);
        let p = Poly::atom(Atom::Func(f, vec![]));
        let a = p.partial(&xc).partial(&uc);
        let b = p.partial(&uc).partial(&xc);
        assert_eq!(a, b);
        assert!(!a.is_zero());
        let other = JetCoordinate::u(1, MultiIndex::new(vec![1]));
        assert!(p.partial(&other).is_zero());
    }

    #[test]
    fn total_derivative_of_u_is_u1() {
        assert_eq!(u(&[0]).total_derivative(1, 1), u(&[1]));
        assert!(Poly::atom(Atom::x(2)).total_derivative(1, 2).is_zero());
        // D(u^2) = 2 u u_1
        let d = u(&[0]).pow(2).total_derivative(1, 1);
        assert_eq!(d, (&u(&[0]) * &u(&[1])).scale(&q(2)));
    }

    #[test]
    fn display_is_canonical() {
        let p = &u(&[1]).pow(2).scale(&q_frac(1, 2)) - &Poly::int(3);
        assert_eq!(p.to_string(), "1/2*u1_(1)^2 - 3");
    }
}
