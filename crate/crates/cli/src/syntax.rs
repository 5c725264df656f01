//! Lexer and recursive-descent parser for forms, generating fields,
//! covectors and C-differential operators.
//!
//! ```text
//! form   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor (('*'|'^') factor)*
//! factor := rational | coord | func | diff | '(' form ')' | '-' factor
//!           with an optional power suffix '^' int
//! diff   := ('d'|'dv'|'dh'|'kappa') '[' int ']' '(' form ')'
//!         | 'D' '(' int (',' int)* ')' '(' form ')'
//! coord  := 'x' int | 'u' int ['_' '(' int (',' int)* ')']
//! func   := '$' name '(' coord (',' coord)* ')' ['_' '{' coord (',' coord)* '}']
//! field  := '[' [label ':' form (';' label ':' form)*] ']'  with label 'V' int ['{' ints '}']
//! cov    := '[' form (';' form)* ']' | form
//! op     := '<' [entry (';' entry)*] '>'  with entry '[' int ',' int ']' 'D' '(' ints ')' ':' form
//! ```

use std::fmt;

use jetidf_core::calculus::total_derivative;
use jetidf_core::cdiff::{CDiffOp, ModElem, ModuleDesc};
use jetidf_core::coeff::{register_function, Atom};
use jetidf_core::derivations::{kappa_basis, KappaField};
use jetidf_core::{
    differential, kappa, BundleConfig, FormExpr, JetCoordinate, MultiIndex, Poly, SlotKind, SlotSet, Q,
};
use num_bigint::BigInt;

/// A syntax or range error at a 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

pub type PResult<T> = std::result::Result<T, ParseError>;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Word(String),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(v) => write!(f, "'{v}'"),
            Tok::Word(w) => write!(f, "'{w}'"),
            Tok::Sym(c) => write!(f, "'{c}'"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> PResult<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Int(s.parse().unwrap()), line: l0, col: c0 });
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphabetic() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Word(s), line: l0, col: c0 });
        } else if "()[]{}<>,;:+-*/^_$".contains(c) {
            i += 1;
            col += 1;
            out.push(Token { tok: Tok::Sym(c), line: l0, col: c0 });
        } else {
            return Err(ParseError { line: l0, col: c0, msg: format!("unexpected character '{c}'") });
        }
    }
    out.push(Token { tok: Tok::End, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    cfg: BundleConfig,
}

impl Parser {
    fn new(src: &str, cfg: BundleConfig) -> PResult<Self> {
        Ok(Parser { toks: lex(src)?, pos: 0, cfg })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        &self.toks[(self.pos + ahead).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn err_at<T>(&self, at: (usize, usize), msg: impl Into<String>) -> PResult<T> {
        Err(ParseError { line: at.0, col: at.1, msg: msg.into() })
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        self.err_at(self.here(), msg)
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, c: char) -> bool {
        *self.peek() == Tok::Sym(c)
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.is_sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> PResult<()> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.err(format!("expected '{c}', found {}", self.peek()))
        }
    }

    fn expect_end(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::End => Ok(()),
            t => self.err(format!("unexpected {t} after end of expression")),
        }
    }

    fn int(&mut self) -> PResult<BigInt> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.next();
                Ok(v)
            }
            t => self.err(format!("expected an integer, found {t}")),
        }
    }

    fn small(&mut self) -> PResult<usize> {
        let at = self.here();
        let v = self.int()?;
        usize::try_from(&v).ok().filter(|&x| x <= u32::MAX as usize).map_or_else(
            || self.err_at(at, format!("index {v} is too large")),
            Ok,
        )
    }

    fn int_list(&mut self) -> PResult<Vec<usize>> {
        let mut v = vec![self.small()?];
        while self.eat_sym(',') {
            v.push(self.small()?);
        }
        Ok(v)
    }

    fn slot(&mut self) -> PResult<usize> {
        let at = self.here();
        let s = self.small()?;
        if s == 0 || s > self.cfg.k {
            return self.err_at(at, format!("slot {s} exceeds k={}", self.cfg.k));
        }
        Ok(s)
    }

    fn multi_index(&mut self) -> PResult<MultiIndex> {
        let at = self.here();
        let v = self.int_list()?;
        if v.len() != self.cfg.n {
            return self.err_at(at, format!("multi-index of arity {} with n={}", v.len(), self.cfg.n));
        }
        Ok(MultiIndex::new(v.into_iter().map(|x| x as u32).collect()))
    }

    fn coordinate(&mut self) -> PResult<JetCoordinate> {
        let at = self.here();
        match self.next() {
            Tok::Word(w) if w == "x" => {
                let at_i = self.here();
                let mu = self.small()?;
                if mu == 0 || mu > self.cfg.n {
                    return self.err_at(at_i, format!("x{mu} out of range for n={}", self.cfg.n));
                }
                Ok(JetCoordinate::Base(mu))
            }
            Tok::Word(w) if w == "u" => {
                let at_j = self.here();
                let j = self.small()?;
                if j == 0 || j > self.cfg.m {
                    return self.err_at(at_j, format!("u{j} out of range for m={}", self.cfg.m));
                }
                let sigma = if self.is_sym('_') && *self.peek_at(1) == Tok::Sym('(') {
                    self.next();
                    self.next();
                    let s = self.multi_index()?;
                    self.expect_sym(')')?;
                    s
                } else {
                    MultiIndex::zero(self.cfg.n)
                };
                Ok(JetCoordinate::Fiber(j, sigma))
            }
            t => self.err_at(at, format!("expected a coordinate, found {t}")),
        }
    }

    fn coordinate_list(&mut self, close: char) -> PResult<Vec<JetCoordinate>> {
        let mut v = vec![self.coordinate()?];
        while self.eat_sym(',') {
            v.push(self.coordinate()?);
        }
        self.expect_sym(close)?;
        Ok(v)
    }

    fn form(&mut self) -> PResult<FormExpr> {
        let mut acc = FormExpr::zero(self.cfg);
        let mut neg = false;
        if self.eat_sym('-') {
            neg = true;
        } else {
            self.eat_sym('+');
        }
        loop {
            let t = self.term()?;
            acc = &acc + &t.signed(neg);
            if self.eat_sym('+') {
                neg = false;
            } else if self.eat_sym('-') {
                neg = true;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> PResult<FormExpr> {
        let mut acc = self.powered()?;
        while self.is_sym('*') || self.is_sym('^') {
            self.next();
            let f = self.powered()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn powered(&mut self) -> PResult<FormExpr> {
        let base = self.factor()?;
        if self.is_sym('^') && matches!(self.peek_at(1), Tok::Int(_)) {
            self.next();
            let at = self.here();
            let e = self.small()?;
            if e > 64 {
                return self.err_at(at, format!("exponent {e} is too large"));
            }
            let mut acc = FormExpr::one(self.cfg);
            for _ in 0..e {
                acc = &acc * &base;
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn factor(&mut self) -> PResult<FormExpr> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Int(_) => {
                let num = self.int()?;
                let den = if self.is_sym('/') {
                    self.next();
                    let at_d = self.here();
                    let d = self.int()?;
                    if d == BigInt::from(0) {
                        return self.err_at(at_d, "division by zero");
                    }
                    d
                } else {
                    BigInt::from(1)
                };
                Ok(FormExpr::constant(self.cfg, Q::new(num, den)))
            }
            Tok::Sym('(') => {
                self.next();
                let f = self.form()?;
                self.expect_sym(')')?;
                Ok(f)
            }
            Tok::Sym('-') => {
                self.next();
                Ok(-&self.factor()?)
            }
            Tok::Sym('$') => {
                self.next();
                let name = match self.next() {
                    Tok::Word(w) => w,
                    t => return self.err(format!("expected a function name, found {t}")),
                };
                self.expect_sym('(')?;
                let deps = self.coordinate_list(')')?;
                let id = register_function(&name, &deps);
                let mut ds = Vec::new();
                if self.is_sym('_') && *self.peek_at(1) == Tok::Sym('{') {
                    self.next();
                    self.next();
                    let at_d = self.here();
                    ds = self.coordinate_list('}')?;
                    if let Some(c) = ds.iter().find(|c| !deps.contains(c)) {
                        return self.err_at(at_d, format!("${name} does not depend on {}", jetidf_core::coeff::fmt_coordinate(c)));
                    }
                    ds.sort();
                }
                Ok(FormExpr::from_poly(self.cfg, Poly::atom(Atom::Func(id, ds))))
            }
            Tok::Word(w) => match w.as_str() {
                "x" | "u" => {
                    let c = self.coordinate()?;
                    Ok(FormExpr::from_poly(self.cfg, Poly::coord(c)))
                }
                "d" | "dv" | "dh" | "kappa" => {
                    self.next();
                    self.expect_sym('[')?;
                    let s = self.slot()?;
                    self.expect_sym(']')?;
                    self.expect_sym('(')?;
                    let inner = self.form()?;
                    self.expect_sym(')')?;
                    let r = match w.as_str() {
                        "d" => differential(s, SlotKind::Full, &inner),
                        "dv" => differential(s, SlotKind::Vertical, &inner),
                        "dh" => differential(s, SlotKind::Horizontal, &inner),
                        _ => kappa(s, &inner),
                    };
                    r.or_else(|e| self.err_at(at, e.to_string()))
                }
                "D" => {
                    self.next();
                    self.expect_sym('(')?;
                    let sigma = self.multi_index()?;
                    self.expect_sym(')')?;
                    self.expect_sym('(')?;
                    let inner = self.form()?;
                    self.expect_sym(')')?;
                    total_derivative(&sigma, &inner).or_else(|e| self.err_at(at, e.to_string()))
                }
                _ => self.err(format!("unknown name '{w}'")),
            },
            t => self.err(format!("expected a factor, found {t}")),
        }
    }

    fn field_label(&mut self) -> PResult<(usize, SlotSet)> {
        let at = self.here();
        match self.next() {
            Tok::Word(w) if w == "V" => {}
            t => return self.err_at(at, format!("expected a field label 'V', found {t}")),
        }
        let at_j = self.here();
        let j = self.small()?;
        if j == 0 || j > self.cfg.m {
            return self.err_at(at_j, format!("V{j} out of range for m={}", self.cfg.m));
        }
        let mut s = SlotSet::EMPTY;
        if self.eat_sym('{') {
            if !self.eat_sym('}') {
                loop {
                    let at_s = self.here();
                    let slot = self.small()?;
                    if slot == 0 || slot >= self.cfg.k {
                        return self.err_at(at_s, format!("field slot {slot} must lie below k={}", self.cfg.k));
                    }
                    s = s.with(slot);
                    if !self.eat_sym(',') {
                        break;
                    }
                }
                self.expect_sym('}')?;
            }
        }
        Ok((j, s))
    }

    fn field(&mut self) -> PResult<KappaField> {
        let mut chi = KappaField::zero(self.cfg);
        if !self.is_sym('[') {
            // bare form: only for a rank-one module
            let at = self.here();
            let basis = kappa_basis(self.cfg);
            if basis.len() != 1 {
                return self.err(format!("a field of rank {} needs '[V1: ...; ...]'", basis.len()));
            }
            let v = self.form()?;
            chi.set(1, SlotSet::EMPTY, v).or_else(|e| self.err_at(at, e.to_string()))?;
            return Ok(chi);
        }
        self.next();
        if self.eat_sym(']') {
            return Ok(chi);
        }
        loop {
            let at = self.here();
            let (j, s) = self.field_label()?;
            self.expect_sym(':')?;
            let v = self.form()?;
            let v = &chi.get(j, s) + &v;
            chi.set(j, s, v).or_else(|e| self.err_at(at, e.to_string()))?;
            if !self.eat_sym(';') {
                break;
            }
        }
        self.expect_sym(']')?;
        Ok(chi)
    }

    fn element(&mut self, desc: &ModuleDesc) -> PResult<ModElem> {
        let at = self.here();
        let comps = if self.eat_sym('[') {
            let mut v = vec![self.form()?];
            while self.eat_sym(';') {
                v.push(self.form()?);
            }
            self.expect_sym(']')?;
            v
        } else {
            vec![self.form()?]
        };
        if comps.len() != desc.rank() {
            return self.err_at(at, format!("{} components for a module of rank {}", comps.len(), desc.rank()));
        }
        ModElem::new(self.cfg, desc.clone(), comps).or_else(|e| self.err_at(at, e.to_string()))
    }

    fn operator(&mut self, source: &ModuleDesc, target: &ModuleDesc) -> PResult<CDiffOp> {
        let mut op = CDiffOp::zero(self.cfg, source.clone(), target.clone());
        self.expect_sym('<')?;
        if self.eat_sym('>') {
            return Ok(op);
        }
        loop {
            let at = self.here();
            self.expect_sym('[')?;
            let b = self.small()?;
            self.expect_sym(',')?;
            let a = self.small()?;
            self.expect_sym(']')?;
            if b == 0 || b > target.rank() || a == 0 || a > source.rank() {
                return self.err_at(at, format!(
                    "entry [{b},{a}] outside a {}x{} operator",
                    target.rank(),
                    source.rank()
                ));
            }
            match self.next() {
                Tok::Word(w) if w == "D" => {}
                t => return self.err(format!("expected 'D', found {t}")),
            }
            self.expect_sym('(')?;
            let sigma = self.multi_index()?;
            self.expect_sym(')')?;
            self.expect_sym(':')?;
            let v = self.form()?;
            op.add_entry(b - 1, a - 1, sigma, v).or_else(|e| self.err_at(at, e.to_string()))?;
            if !self.eat_sym(';') {
                break;
            }
        }
        self.expect_sym('>')?;
        Ok(op)
    }
}

pub fn parse_form(src: &str, cfg: BundleConfig) -> PResult<FormExpr> {
    let mut p = Parser::new(src, cfg)?;
    let f = p.form()?;
    p.expect_end()?;
    Ok(f)
}

pub fn parse_field(src: &str, cfg: BundleConfig) -> PResult<KappaField> {
    let mut p = Parser::new(src, cfg)?;
    let f = p.field()?;
    p.expect_end()?;
    Ok(f)
}

/// Element of `desc`: `[c_1; ...; c_r]`, or a bare form when the rank is one.
pub fn parse_element(src: &str, cfg: BundleConfig, desc: &ModuleDesc) -> PResult<ModElem> {
    let mut p = Parser::new(src, cfg)?;
    let e = p.element(desc)?;
    p.expect_end()?;
    Ok(e)
}

pub fn parse_operator(src: &str, cfg: BundleConfig, source: &ModuleDesc, target: &ModuleDesc) -> PResult<CDiffOp> {
    let mut p = Parser::new(src, cfg)?;
    let op = p.operator(source, target)?;
    p.expect_end()?;
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use jetidf_core::Generator;

    fn cfg(n: usize, m: usize, k: usize) -> BundleConfig {
        BundleConfig::new(n, m, k).unwrap()
    }

    #[test]
    fn cartan_generator() {
        let c = cfg(1, 1, 1);
        let f = parse_form("dv[1](u1)", c).unwrap();
        let g = FormExpr::generator(c, Generator::vertical(SlotSet::single(1), 1, MultiIndex::zero(1))).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn power_and_wedge() {
        let c = cfg(2, 1, 1);
        let f = parse_form("1/2 * u1_(2,0)^2 * d[1](x1) ^ d[1](x2)", c).unwrap();
        assert_eq!(f.num_terms(), 1);
        let (m, p) = f.terms().next().unwrap();
        assert_eq!(m.factors().len(), 2);
        assert_eq!(p.to_string(), "1/2*u1_(2,0)^2");
        // wedge and product normalize identically
        assert_eq!(f, parse_form("1/2*u1_(2,0)*u1_(2,0)*d[1](x1)*d[1](x2)", c).unwrap());
        assert_eq!(-&f, parse_form("1/2 * u1_(2,0)^2 * d[1](x2) ^ d[1](x1)", c).unwrap());
    }

    #[test]
    fn slot_range_error() {
        let e = parse_form("dv[3](u1)", cfg(1, 1, 2)).unwrap_err();
        assert_eq!(e.msg, "slot 3 exceeds k=2");
        assert_eq!((e.line, e.col), (1, 4));
    }

    #[test]
    fn errors_carry_positions() {
        let c = cfg(1, 1, 1);
        let e = parse_form("x1 +\n  u2", c).unwrap_err();
        assert_eq!((e.line, e.col), (2, 4));
        assert!(e.msg.contains("m=1"));
        let e = parse_form("x1 + )", c).unwrap_err();
        assert_eq!((e.line, e.col), (1, 6));
        assert!(parse_form("u1_(1,2)", c).is_err());
        assert!(parse_form("1/0", c).is_err());
        assert!(parse_form("x1 x1", c).is_err());
    }

    #[test]
    fn fields_and_operators() {
        let c = cfg(1, 1, 2);
        let chi = parse_field("[V1: u1_(1); V1{1}: dv[1](u1)]", c).unwrap();
        assert_eq!(chi.components().count(), 2);
        assert!(parse_field("[V1{2}: u1]", c).is_err());
        let k = ModuleDesc::kappa(c);
        let op = parse_operator("<[1,1] D(2): u1; [2,2] D(0): 1>", c, &k, &k.adjoint()).unwrap();
        assert_eq!(op.order(), 2);
        assert!(parse_operator("<[3,1] D(0): 1>", c, &k, &k.adjoint()).is_err());
        let one = cfg(1, 1, 1);
        assert!(parse_field("u1_(2)", one).is_ok());
        assert!(parse_field("u1", c).is_err());
    }
}
