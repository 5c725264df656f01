//! Golden corpus reader shared by the golden test and the acceptance target.

use std::fs;
use std::path::PathBuf;

use jetidf::commands::run;
use jetidf::printer::{element_text, field_text, form_from_json, form_json, form_text, operator_text};
use jetidf::syntax::{parse_element, parse_field, parse_form, parse_operator};
use jetidf_core::cdiff::ModuleDesc;
use jetidf_core::BundleConfig;

pub fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut files: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect()
}

fn field<'a>(text: &'a str, key: &str) -> Result<&'a str, String> {
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.strip_prefix(' ').unwrap_or(v)))
        .ok_or_else(|| format!("missing {key}"))
}

fn module(name: &str, cfg: BundleConfig) -> Result<ModuleDesc, String> {
    match name {
        "kappa" => Ok(ModuleDesc::kappa(cfg)),
        "kappa^" => Ok(ModuleDesc::kappa(cfg).adjoint()),
        "F" => Ok(ModuleDesc::scalar(false)),
        other => Err(format!("module {other}")),
    }
}

/// Parses and re-prints an object file.
fn reprint(text: &str) -> Result<String, String> {
    let dims: Vec<usize> = field(text, "config:")?.split_whitespace().map(|x| x.parse().unwrap()).collect();
    let cfg = BundleConfig::new(dims[0], dims[1], dims[2]).map_err(|e| e.to_string())?;
    let src = field(text, "canonical:")?;
    let kind: Vec<&str> = field(text, "kind:")?.split_whitespace().collect();
    let e = |e: jetidf::syntax::ParseError| e.to_string();
    Ok(match kind[..] {
        ["form"] => {
            let f = parse_form(src, cfg).map_err(e)?;
            if form_from_json(&form_json(&f))? != f {
                return Err("json round trip".into());
            }
            form_text(&f)
        }
        ["field"] => field_text(&parse_field(src, cfg).map_err(e)?),
        ["element", m] => element_text(&parse_element(src, cfg, &module(m, cfg)?).map_err(e)?),
        ["operator", s, t] => operator_text(&parse_operator(src, cfg, &module(s, cfg)?, &module(t, cfg)?).map_err(e)?),
        _ => return Err(format!("kind {kind:?}")),
    })
}

fn command(text: &str) -> (Vec<String>, String) {
    let (head, expected) = text.split_once("---\n").unwrap_or((text, ""));
    let mut args = vec!["jetidf".to_string()];
    args.extend(head.lines().filter_map(|l| l.strip_prefix("arg: ").map(str::to_string)));
    (args, expected.to_string())
}

/// Checks one corpus file: objects re-print to their canonical text,
/// commands reproduce their recorded output twice over.
pub fn check(text: &str) -> Result<(), String> {
    if text.starts_with("kind: command") {
        let (args, expected) = command(text);
        let first = run(&args);
        if first.code != 0 {
            return Err(format!("exit {}: {}", first.code, first.stderr));
        }
        if first.stdout != expected {
            return Err(format!("got\n{}", first.stdout));
        }
        if run(&args) != first {
            return Err("output not reproducible".into());
        }
    } else {
        let printed = reprint(text)?;
        if printed != field(text, "canonical:")? {
            return Err(format!("re-printed as {printed}"));
        }
    }
    Ok(())
}
