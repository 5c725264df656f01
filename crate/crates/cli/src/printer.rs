//! Canonical text, LaTeX and JSON output.
//!
//! Text output re-parses to the same object: terms follow the generator
//! monomial order, then the coefficient monomials in descending order.

use jetidf_core::cdiff::{CDiffOp, ModElem};
use jetidf_core::coeff::{fmt_rational, function_info, Atom, PolyMonomial};
use jetidf_core::derivations::KappaField;
use jetidf_core::{BundleConfig, FormExpr, Generator, JetCoordinate, Monomial, Poly, Q};
use num_traits::{One, Signed};
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Deserialize, serde::Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Latex,
    Json,
}

/// A term split into sign, absolute coefficient, atoms and generators.
struct Flat<'a> {
    neg: bool,
    coef: Q,
    atoms: &'a PolyMonomial,
    gens: &'a Monomial,
}

fn flatten(f: &FormExpr) -> Vec<Flat<'_>> {
    let mut out = Vec::new();
    for (m, p) in f.terms() {
        let mut ts: Vec<_> = p.terms().collect();
        ts.reverse();
        for (pm, c) in ts {
            out.push(Flat { neg: c.is_negative(), coef: c.abs(), atoms: pm, gens: m });
        }
    }
    out
}

fn join_terms(parts: Vec<(bool, String)>) -> String {
    if parts.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (neg, body)) in parts.into_iter().enumerate() {
        match (i, neg) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        s.push_str(&body);
    }
    s
}

// ---- text ----

pub fn coordinate_text(c: &JetCoordinate) -> String {
    jetidf_core::coeff::fmt_coordinate(c)
}

fn atom_text(a: &Atom) -> String {
    jetidf_core::coeff::fmt_atom(a)
}

fn generator_text(g: &Generator) -> String {
    g.to_string()
}

fn flat_text(t: &Flat<'_>) -> String {
    let mut scalar: Vec<String> = Vec::new();
    if !t.coef.is_one() || (t.atoms.is_empty() && t.gens.is_one()) {
        scalar.push(fmt_rational(&t.coef));
    }
    for (a, e) in t.atoms {
        scalar.push(if *e == 1 { atom_text(a) } else { format!("{}^{e}", atom_text(a)) });
    }
    let gens: Vec<String> = t
        .gens
        .factors()
        .iter()
        .map(|(g, e)| if *e == 1 { generator_text(g) } else { format!("{}^{e}", generator_text(g)) })
        .collect();
    match (scalar.is_empty(), gens.is_empty()) {
        (false, true) => scalar.join("*"),
        (true, false) => gens.join(" ^ "),
        _ => format!("{} * {}", scalar.join("*"), gens.join(" ^ ")),
    }
}

pub fn form_text(f: &FormExpr) -> String {
    join_terms(flatten(f).iter().map(|t| (t.neg, flat_text(t))).collect())
}

pub fn poly_text(p: &Poly, cfg: BundleConfig) -> String {
    form_text(&FormExpr::from_poly(cfg, p.clone()))
}

fn field_label(j: usize, s: jetidf_core::SlotSet) -> String {
    if s.is_empty() {
        format!("V{j}")
    } else {
        let v: Vec<String> = s.iter().map(|x| x.to_string()).collect();
        format!("V{j}{{{}}}", v.join(","))
    }
}

pub fn field_text(chi: &KappaField) -> String {
    let parts: Vec<String> = chi
        .components()
        .filter(|(_, v)| !v.is_zero())
        .map(|((j, s), v)| format!("{}: {}", field_label(*j, *s), form_text(v)))
        .collect();
    format!("[{}]", parts.join("; "))
}

pub fn element_text(e: &ModElem) -> String {
    if e.comps.len() == 1 {
        return form_text(&e.comps[0]);
    }
    let parts: Vec<String> = e.comps.iter().map(form_text).collect();
    format!("[{}]", parts.join("; "))
}

fn sigma_text(s: &jetidf_core::MultiIndex) -> String {
    s.entries().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn operator_text(op: &CDiffOp) -> String {
    let mut parts = Vec::new();
    for (&(b, a), e) in op.entries() {
        for (s, v) in e {
            parts.push(format!("[{},{}] D({}): {}", b + 1, a + 1, sigma_text(s), form_text(v)));
        }
    }
    format!("<{}>", parts.join("; "))
}

// ---- latex ----

fn coordinate_latex(c: &JetCoordinate) -> String {
    match c {
        JetCoordinate::Base(mu) => format!("x^{{{mu}}}"),
        JetCoordinate::Fiber(j, s) if s.is_zero() => format!("u^{{{j}}}"),
        JetCoordinate::Fiber(j, s) => format!("u^{{{j}}}_{{{}}}", sigma_text(s)),
    }
}

fn atom_latex(a: &Atom) -> String {
    match a {
        Atom::Coord(c) => coordinate_latex(c),
        Atom::Func(id, ds) => {
            let info = function_info(*id);
            let deps: Vec<String> = info.deps.iter().map(coordinate_latex).collect();
            let sub = if ds.is_empty() {
                String::new()
            } else {
                let d: Vec<String> = ds.iter().map(coordinate_latex).collect();
                format!("_{{{}}}", d.join(" "))
            };
            format!("\\mathrm{{{}}}{sub}({})", info.name, deps.join(", "))
        }
    }
}

fn generator_latex(g: &Generator) -> String {
    let slots: Vec<usize> = g.slots().iter().collect();
    let (op, inner) = match g {
        Generator::Vertical { j, sigma, .. } => ("d^{v}", coordinate_latex(&JetCoordinate::Fiber(*j, sigma.clone()))),
        Generator::Horizontal { mu, .. } => ("d", coordinate_latex(&JetCoordinate::Base(*mu))),
    };
    let ds: Vec<String> = slots.iter().map(|s| format!("{op}_{{{s}}}")).collect();
    format!("{} {inner}", ds.join(" "))
}

fn rational_latex(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom())
    }
}

fn flat_latex(t: &Flat<'_>) -> String {
    let mut parts: Vec<String> = Vec::new();
    if !t.coef.is_one() || (t.atoms.is_empty() && t.gens.is_one()) {
        parts.push(rational_latex(&t.coef));
    }
    for (a, e) in t.atoms {
        parts.push(if *e == 1 {
            atom_latex(a)
        } else {
            format!("\\left({}\\right)^{{{e}}}", atom_latex(a))
        });
    }
    let gens: Vec<String> = t
        .gens
        .factors()
        .iter()
        .map(|(g, e)| {
            if *e == 1 {
                generator_latex(g)
            } else {
                format!("\\left({}\\right)^{{{e}}}", generator_latex(g))
            }
        })
        .collect();
    if !gens.is_empty() {
        parts.push(gens.join(" \\wedge "));
    }
    parts.join(" \\, ")
}

pub fn form_latex(f: &FormExpr) -> String {
    join_terms(flatten(f).iter().map(|t| (t.neg, flat_latex(t))).collect())
}

pub fn field_latex(chi: &KappaField) -> String {
    let rows: Vec<String> = chi
        .components()
        .filter(|(_, v)| !v.is_zero())
        .map(|((j, s), v)| {
            let sup = if s.is_empty() { String::new() } else { format!("^{{{}}}", s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("")) };
            format!("V_{{{j}}}{sup} &: {}", form_latex(v))
        })
        .collect();
    format!("\\begin{{aligned}}\n{}\n\\end{{aligned}}", rows.join(" \\\\\n"))
}

pub fn element_latex(e: &ModElem) -> String {
    if e.comps.len() == 1 {
        return form_latex(&e.comps[0]);
    }
    let rows: Vec<String> = e.comps.iter().map(form_latex).collect();
    format!("\\begin{{pmatrix}}\n{}\n\\end{{pmatrix}}", rows.join(" \\\\\n"))
}

pub fn operator_latex(op: &CDiffOp) -> String {
    let mut rows = Vec::new();
    for (&(b, a), e) in op.entries() {
        let terms: Vec<String> = e
            .iter()
            .map(|(s, v)| format!("\\left({}\\right) D_{{{}}}", form_latex(v), sigma_text(s)))
            .collect();
        rows.push(format!("[{},{}] &: {}", b + 1, a + 1, terms.join(" + ")));
    }
    if rows.is_empty() {
        return "0".into();
    }
    format!("\\begin{{aligned}}\n{}\n\\end{{aligned}}", rows.join(" \\\\\n"))
}

/// Wraps a math body in a document that compiles on its own.
pub fn latex_document(body: &str) -> String {
    format!(
        "\\documentclass{{article}}\n\\usepackage{{amsmath}}\n\\begin{{document}}\n\\[\n{body}\n\\]\n\\end{{document}}\n"
    )
}

// ---- json ----

pub fn config_json(cfg: BundleConfig) -> Value {
    json!({ "n": cfg.n, "m": cfg.m, "k": cfg.k })
}

/// `{"config": ..., "terms": [{"coeff": poly, "gens": [[generator, exponent], ...]}]}`.
pub fn form_json(f: &FormExpr) -> Value {
    let cfg = f.config();
    let terms: Vec<Value> = f
        .terms()
        .map(|(m, p)| {
            let gens: Vec<Value> = m.factors().iter().map(|(g, e)| json!([generator_text(g), e])).collect();
            json!({ "coeff": poly_text(p, cfg), "gens": gens })
        })
        .collect();
    json!({ "config": config_json(cfg), "terms": terms })
}

/// Reads back the output of [`form_json`].
pub fn form_from_json(v: &Value) -> Result<FormExpr, String> {
    let c = &v["config"];
    let get = |k: &str| c[k].as_u64().map(|x| x as usize).ok_or_else(|| format!("config.{k} missing"));
    let cfg = BundleConfig::new(get("n")?, get("m")?, get("k")?).map_err(|e| e.to_string())?;
    let mut acc = FormExpr::zero(cfg);
    for t in v["terms"].as_array().ok_or("terms missing")? {
        let coeff = t["coeff"].as_str().ok_or("coeff missing")?;
        let mut f = crate::syntax::parse_form(coeff, cfg).map_err(|e| e.to_string())?;
        for g in t["gens"].as_array().ok_or("gens missing")? {
            let text = g[0].as_str().ok_or("generator missing")?;
            let e = g[1].as_u64().ok_or("exponent missing")?;
            let gf = crate::syntax::parse_form(text, cfg).map_err(|e| e.to_string())?;
            for _ in 0..e {
                f = &f * &gf;
            }
        }
        acc = &acc + &f;
    }
    Ok(acc)
}

pub fn field_json(chi: &KappaField) -> Value {
    let comps: Vec<Value> = chi
        .components()
        .filter(|(_, v)| !v.is_zero())
        .map(|((j, s), v)| json!({ "label": field_label(*j, *s), "value": form_json(v) }))
        .collect();
    json!({ "config": config_json(chi.config()), "components": comps })
}

pub fn element_json(e: &ModElem) -> Value {
    json!({
        "config": config_json(e.config),
        "module": e.desc.to_string(),
        "components": e.comps.iter().map(form_json).collect::<Vec<_>>(),
    })
}

pub fn operator_json(op: &CDiffOp) -> Value {
    let mut entries = Vec::new();
    for (&(b, a), e) in op.entries() {
        for (s, v) in e {
            entries.push(json!({ "row": b + 1, "col": a + 1, "sigma": s.entries(), "coeff": form_json(v) }));
        }
    }
    json!({
        "config": config_json(op.config),
        "source": op.source.to_string(),
        "target": op.target.to_string(),
        "entries": entries,
    })
}
