use jetidf::commands::{run, EXIT_DOMAIN, EXIT_USAGE};

fn jet(args: &[&str]) -> jetidf::commands::Outcome {
    run(std::iter::once("jetidf").chain(args.iter().copied()))
}

#[test]
fn documented_examples() {
    let el = jet(&["el", "1/2*u1_(1)^2"]);
    assert_eq!((el.stdout.as_str(), el.code), ("-u1_(2)\n", 0));
    assert_eq!(jet(&["helmholtz", "u1_(2)"]).stdout, "self-adjoint: variational\n");
    let quick = jet(&["selfcheck", "--quick"]);
    assert_eq!(quick.code, 0, "{}", quick.stdout);
    assert!(quick.stdout.ends_with("all suites passed\n"));
}

#[test]
fn exit_codes() {
    let slot = jet(&["--k", "2", "normalize", "dv[3](u1)"]);
    assert_eq!(slot.code, EXIT_USAGE);
    assert!(slot.stderr.contains("1:4: slot 3 exceeds k=2"), "{}", slot.stderr);
    assert_eq!(jet(&["normalize", "u2"]).code, EXIT_USAGE);
    assert_eq!(jet(&["normalize", "u1 +"]).code, EXIT_USAGE);
    assert_eq!(jet(&["--n", "0", "normalize", "1"]).code, EXIT_USAGE);
    assert_eq!(jet(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(jet(&["--k", "2", "d", "--slot", "3", "u1"]).code, EXIT_USAGE);
    // not a top form
    assert_eq!(jet(&["--n", "2", "el", "d[1](x1)"]).code, EXIT_DOMAIN);
    // degree-zero class has no Lie derivative here
    assert_eq!(jet(&["d1", "--kind", "operator", "<[1,1] D(1): 1>"]).code, EXIT_USAGE);
    assert_eq!(jet(&["--help"]).code, 0);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = std::env::temp_dir().join(format!("jetidf-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("session.toml");
    std::fs::write(&p, "n = 2\nk = 2\nformat = \"json\"\nmax-jet = 1\n").unwrap();
    let path = p.to_str().unwrap();
    let out = jet(&["--config", path, "normalize", "u1_(1,0)"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["config"]["n"], 2);
    assert_eq!(v["config"]["k"], 2);
    let text = jet(&["--config", path, "--format", "text", "--n", "1", "normalize", "u1_(1)"]);
    assert_eq!(text.stdout, "u1_(1)\n");
    std::fs::write(&p, "colour = 3\n").unwrap();
    assert_eq!(jet(&["--config", path, "normalize", "1"]).code, EXIT_USAGE);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn latex_output_is_a_document() {
    let out = jet(&["--format", "latex", "--n", "2", "normalize", "1/2*u1_(2,0)^2 * d[1](x1) ^ d[1](x2)"]);
    assert!(out.stdout.starts_with("\\documentclass{article}"));
    assert!(out.stdout.contains("\\begin{document}") && out.stdout.trim_end().ends_with("\\end{document}"));
    let rep = jet(&["--format", "latex", "cohomology", "--grade", "1", "--incoming", "dh"]);
    assert!(rep.stdout.contains("d\\_1\\^{}h"), "{}", rep.stdout);
}

#[test]
fn secondary_commands() {
    // scaling doubles the Euler covector of u_1^2/2; translation is a symmetry
    let lie = jet(&["lie", "[V1: u1]", "-u1_(2)"]);
    assert_eq!(lie.stdout, "-2*u1_(2)\n");
    assert_eq!(jet(&["lie", "[V1: u1_(1)]", "-u1_(2)"]).stdout, "0\n");
    let ins = jet(&["insert", "[V1: 1]", "-u1_(2)"]);
    assert_eq!(ins.code, 0, "{}", ins.stderr);
    let tc = jet(&["--k", "2", "tensor-check", "<[1,1] D(1): dv[1](u1)>"]);
    assert_eq!(tc.stdout, "secondary tensor: no\n");
    let one = jet(&["--n", "2", "--k", "2", "--seed", "4", "cohomology", "--one-line", "--samples", "3"]);
    assert!(one.stdout.contains("w-exact within bounds"), "{}", one.stdout);
    assert_eq!(one, jet(&["--n", "2", "--k", "2", "--seed", "4", "cohomology", "--one-line", "--samples", "3"]));
}
