//! Randomized and oracle suites shared by `selfcheck` and the acceptance
//! target. Every suite is seeded and exact; a failure records the offending
//! input.

use jetidf_core::calculus::{total_derivative, SlotKind};
use jetidf_core::cdiff::{adjoint, apply_op, compose, green_witness, pair, ModElem, ModuleDesc, MultiCDiffOp};
use jetidf_core::coeff::{Atom, Poly};
use jetidf_core::derivations::{prolong, restrict, KappaField};
use jetidf_core::form::wedge;
use jetidf_core::sample::{
    random_cstar, random_cstar_parity, random_element, random_form, random_lagrangian, random_module, random_op,
    random_poly, SampleBounds,
};
use jetidf_core::secondary::{
    covector_functional, d1, euler, euler_display, euler_via_linearization, helmholtz, is_secondary_tensor,
    tensor_embed, volume,
};
use jetidf_core::{classify, differential, kappa, BundleConfig, FormExpr, Generator, MultiIndex, SlotSet};
use jetidf_lab::oneline::one_line_samples;
use jetidf_lab::{cohomology_dim, FormMap, TruncationSpec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub samples: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        SuiteResult { name: name.to_string(), samples: 0, failures: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.samples > 0
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.samples += 1;
        if !ok && self.failures.len() < 5 {
            self.failures.push(what());
        } else if !ok {
            self.failures.push(String::new());
        }
    }

    fn error(&mut self, e: impl std::fmt::Display) {
        self.samples += 1;
        self.failures.push(format!("error: {e}"));
    }

    pub fn line(&self) -> String {
        let status = if self.passed() { "ok" } else { "FAILED" };
        format!("{:<24} {:>5} samples  {} failures  {status}", self.name, self.samples, self.failures.len())
    }
}

const KINDS: [SlotKind; 3] = [SlotKind::Vertical, SlotKind::Horizontal, SlotKind::Full];

fn cfg(n: usize, m: usize, k: usize) -> BundleConfig {
    BundleConfig::new(n, m, k).expect("valid config")
}

fn small_config(rng: &mut StdRng) -> BundleConfig {
    cfg(rng.gen_range(1..=2), rng.gen_range(1..=2), rng.gen_range(1..=2))
}

fn odd_coin(rng: &mut StdRng, c: BundleConfig) -> bool {
    c.k > 1 && rng.gen_bool(0.5)
}

fn homogeneous(w: &FormExpr) -> (FormExpr, bool) {
    let (e, o) = w.parity_parts();
    if o.is_zero() {
        (e, false)
    } else {
        (o, true)
    }
}

fn field(rng: &mut StdRng, c: BundleConfig, b: &SampleBounds, odd: bool) -> KappaField {
    let mut chi = KappaField::zero(c);
    for s in c.lower_slot_sets() {
        for j in 1..=c.m {
            chi.set(j, s, random_cstar_parity(rng, c, b, odd ^ s.parity())).expect("homogeneous component");
        }
    }
    chi
}

fn u(c: BundleConfig, j: usize, sigma: &[u32]) -> FormExpr {
    FormExpr::from_poly(c, Poly::atom(Atom::u(j, MultiIndex::new(sigma.to_vec()))))
}

/// Differentials square to zero and anticommute, `kappa` is an involution
/// intertwining slot 1 with slot `m`, and the wedge product is graded
/// commutative. Forms are drawn over every configuration with
/// `n, m <= 2`, `k <= 3`.
pub fn axioms(count: usize, seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("axioms");
    let b = SampleBounds { max_jet: 3, max_degree: 3, max_terms: 3, max_gens: 2, use_base: true };
    let mut rng = StdRng::seed_from_u64(seed);
    let configs: Vec<_> = (1..=2).flat_map(|n| (1..=2).flat_map(move |m| (1..=3).map(move |k| cfg(n, m, k)))).collect();
    for i in 0..count {
        let c = configs[i % configs.len()];
        let w = random_form(&mut rng, c, &b);
        let d = |m, kind, w: &FormExpr| differential(m, kind, w).expect("slot in range");
        let mut ok = true;
        for m in 1..=c.k {
            for a in KINDS {
                let dw = d(m, a, &w);
                ok &= d(m, a, &dw).is_zero();
                for l in 1..=c.k {
                    for bk in KINDS {
                        ok &= (&d(m, a, &d(l, bk, &w)) + &d(l, bk, &dw)).is_zero();
                    }
                }
            }
            let kw = kappa(m, &w).expect("slot in range");
            ok &= kappa(m, &kw).expect("slot in range") == w;
            for kind in [SlotKind::Vertical, SlotKind::Horizontal] {
                ok &= kappa(m, &d(1, kind, &w)).expect("slot in range") == d(m, kind, &kw);
            }
        }
        let (x, px) = homogeneous(&w);
        let (y, py) = homogeneous(&random_form(&mut rng, c, &b));
        ok &= wedge(&x, &y).expect("same config") == wedge(&y, &x).expect("same config").signed(px && py);
        r.check(ok, || format!("{c}: {w}"));
    }
    r
}

/// `restrict o prolong = id`, `prolong o restrict = id`, and evolutionary
/// derivations commute with total derivatives.
pub fn prolongation(count: usize, seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("prolongation");
    let b = SampleBounds { max_jet: 2, max_degree: 2, max_terms: 3, max_gens: 2, use_base: true };
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..count {
        let c = cfg(rng.gen_range(1..=2), rng.gen_range(1..=2), rng.gen_range(1..=3));
        let odd = odd_coin(&mut rng, c);
        let chi = field(&mut rng, c, &b, odd);
        let mut run = || -> jetidf_core::Result<bool> {
            let e = prolong(&chi, 3)?;
            let back = restrict(&e.derivation)?;
            let mut ok = back == chi && prolong(&back, 3)? == e;
            let w = random_cstar(&mut rng, c, &b);
            for mu in 1..=c.n {
                let unit = MultiIndex::unit(c.n, mu);
                ok &= chi.act(&total_derivative(&unit, &w)?) == total_derivative(&unit, &chi.act(&w))?;
            }
            ok &= classify(&chi.act(&w)).in_cstar;
            Ok(ok)
        };
        match run() {
            Ok(ok) => r.check(ok, || format!("{c}: {chi:?}")),
            Err(e) => r.error(e),
        }
    }
    r
}

/// Euler-Lagrange oracles at `k = 1`: the free particle, the wave equation
/// and `count` total divergences.
pub fn classical_el(count: usize, seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("euler-lagrange");
    let half = jetidf_core::Q::new(1.into(), 2.into());
    let c1 = cfg(1, 1, 1);
    let l = (&u(c1, 1, &[1]) * &u(c1, 1, &[1])).scale(&half);
    match euler(&(&l * &volume(c1))) {
        Ok(e) => r.check(e.comps[0] == -&u(c1, 1, &[2]), || format!("free particle gave {}", e.comps[0])),
        Err(e) => r.error(e),
    }
    // x1 = space, x2 = time
    let c2 = cfg(2, 1, 1);
    let (ux, ut) = (u(c2, 1, &[1, 0]), u(c2, 1, &[0, 1]));
    let wave = (&(&ut * &ut) - &(&ux * &ux)).scale(&half);
    let box_u = &u(c2, 1, &[0, 2]) - &u(c2, 1, &[2, 0]);
    match euler(&(&wave * &volume(c2))) {
        Ok(e) => {
            let v = &e.comps[0];
            r.check(*v == box_u || *v == -&box_u, || format!("wave equation gave {v}"))
        }
        Err(e) => r.error(e),
    }
    let b = SampleBounds { max_jet: 2, max_degree: 3, max_terms: 3, max_gens: 0, use_base: true };
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..count {
        let c = cfg(1, rng.gen_range(1..=2), 1);
        let f = FormExpr::from_poly(c, random_poly(&mut rng, c, &b));
        let run = || -> jetidf_core::Result<ModElem> {
            let div = total_derivative(&MultiIndex::unit(1, 1), &f)?;
            euler(&(&div * &volume(c)))
        };
        match run() {
            Ok(e) => r.check(e.is_zero(), || format!("D_x({f}) gave {e:?}")),
            Err(e) => r.error(e),
        }
    }
    r
}

fn op_bounds() -> SampleBounds {
    SampleBounds { max_jet: 1, max_degree: 2, max_terms: 2, max_gens: 1, use_base: true }
}

/// Adjoint involution and reversal on `count` operators of order <= 3,
/// and the Green identity on `green` pairs.
pub fn adjoints(count: usize, green: usize, seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("adjoint");
    let b = op_bounds();
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..count {
        let c = small_config(&mut rng);
        let (p, q, s) = (random_module(&mut rng, c), random_module(&mut rng, c), random_module(&mut rng, c));
        let (oa, ob) = (odd_coin(&mut rng, c), odd_coin(&mut rng, c));
        let a = random_op(&mut rng, c, &b, &p, &q, oa, 3);
        let bo = random_op(&mut rng, c, &b, &q, &s, ob, 2);
        let pe = odd_coin(&mut rng, c);
        let e = random_element(&mut rng, c, &b, &p, pe);
        let run = || -> jetidf_core::Result<bool> {
            let ba = compose(&bo, &a)?;
            let applied = apply_op(&ba, &e)? == apply_op(&bo, &apply_op(&a, &e)?)?;
            let rhs = compose(&adjoint(&a), &adjoint(&bo))?;
            let rhs = if oa && ob { rhs.neg() } else { rhs };
            Ok(applied && adjoint(&adjoint(&a)) == a && adjoint(&ba) == rhs)
        };
        match run() {
            Ok(ok) => r.check(ok, || format!("{c}: {a:?}")),
            Err(e) => r.error(e),
        }
    }
    for _ in 0..green {
        let c = small_config(&mut rng);
        let (p, q) = (random_module(&mut rng, c), random_module(&mut rng, c));
        let odd = odd_coin(&mut rng, c);
        let op = random_op(&mut rng, c, &b, &p, &q, odd, 3);
        let (pp, pq) = (odd_coin(&mut rng, c), odd_coin(&mut rng, c));
        let e = random_element(&mut rng, c, &b, &p, pp);
        let psi = random_element(&mut rng, c, &b, &q.adjoint(), pq);
        match green_witness(&op, &psi, &e) {
            Ok(w) => r.check(w.verify(), || format!("{c}: lhs {} rhs {}", w.lhs, w.rhs)),
            Err(e) => r.error(e),
        }
    }
    r
}

/// Self-adjointness of the linearization against vanishing of `d1`, on
/// two variational and two non-variational sources.
pub fn helmholtz_family() -> SuiteResult {
    let mut r = SuiteResult::new("helmholtz");
    let c = cfg(1, 1, 1);
    let u0 = u(c, 1, &[0]);
    let cube = &(&u0 * &u0) * &u0;
    let cases = [
        (u(c, 1, &[2]), true),
        (&u(c, 1, &[2]) + &cube, true),
        (&u0 * &u(c, 1, &[1]), false),
        (u(c, 1, &[1]), false),
    ];
    for (f, expect) in cases {
        let cov = ModElem::new(c, ModuleDesc::kappa(c).adjoint(), vec![f.clone()]);
        match cov.and_then(|cov| helmholtz(&cov)) {
            Ok(rep) => r.check(rep.self_adjoint == expect && rep.d1_vanishes == expect, || {
                format!("{f}: self-adjoint {} d1 vanishes {}", rep.self_adjoint, rep.d1_vanishes)
            }),
            Err(e) => r.error(e),
        }
    }
    r
}

/// `d1 o euler = 0`, `d1 o d1 = 0` and agreement of the two Euler routes,
/// with `k <= 2` and jet order <= 2.
pub fn secondary_complex(count: usize, seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("secondary-complex");
    let wide = SampleBounds { max_jet: 2, max_degree: 2, max_terms: 2, max_gens: 1, use_base: false };
    let narrow = SampleBounds { max_jet: 1, ..wide };
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..count {
        let c = small_config(&mut rng);
        let l = homogeneous(&random_lagrangian(&mut rng, c, &wide)).0;
        let odd = odd_coin(&mut rng, c);
        let chi = field(&mut rng, c, &wide, odd);
        let run = |rng: &mut StdRng| -> jetidf_core::Result<Vec<&'static str>> {
            let mut bad = Vec::new();
            let e = euler(&l)?;
            if euler_via_linearization(&l)? != e {
                bad.push("routes");
            }
            let sign = odd && c.n % 2 == 1;
            if euler_display(&l, &chi)? != pair(&e, &ModElem::from_field(&chi))?.signed(sign) {
                bad.push("display");
            }
            if !d1(&MultiCDiffOp::from_covector(e)?)?.freeze(&[])?.is_zero() {
                bad.push("d1 euler");
            }
            let odd1 = odd_coin(rng, c);
            let desc = ModuleDesc::kappa(c).adjoint();
            let comps = desc.parities.iter().map(|&p| random_cstar_parity(rng, c, &narrow, odd1 ^ p)).collect();
            let th = MultiCDiffOp::from_covector(ModElem::new(c, desc, comps)?)?;
            let o2 = odd_coin(rng, c);
            let probe = field(rng, c, &narrow, o2);
            if !d1(&d1(&th)?)?.freeze(&[probe])?.is_zero() {
                bad.push("d1 d1");
            }
            Ok(bad)
        };
        match run(&mut rng) {
            Ok(bad) => r.check(bad.is_empty(), || format!("{c}: {} on {l}", bad.join(", "))),
            Err(e) => r.error(e),
        }
    }
    r
}

/// Closed operators at `p = 1`, `q = n - 1` admit `w`-preimages after at
/// most two enlargements. `per_config` samples per configuration.
pub fn one_line(per_config: usize, seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("one-line");
    let mut rng = StdRng::seed_from_u64(seed);
    let configs: [(usize, usize, usize, Vec<i32>); 6] = [
        (1, 1, 1, vec![]),
        (2, 1, 1, vec![]),
        (2, 2, 1, vec![]),
        (2, 1, 2, vec![0]),
        (2, 1, 2, vec![1]),
        (2, 2, 2, vec![0]),
    ];
    for (n, m, k, lower) in configs {
        let sp = TruncationSpec::new(cfg(n, m, k), 1, 1, 0).with_op_order(1);
        match one_line_samples(&sp, &lower, n - 1, per_config, &mut rng) {
            Ok(run) => {
                for s in &run.samples {
                    r.check(s.witness.is_some() && s.enlargements <= 2, || {
                        format!("n={n} m={m} k={k}: {}", run.report().verdict)
                    });
                }
            }
            Err(e) => r.error(e),
        }
    }
    r
}

/// Zeroth cohomology of `d_k` on the function slice is the constants.
pub fn zeroth_cohomology() -> SuiteResult {
    let mut r = SuiteResult::new("zeroth-cohomology");
    for n in 1..=2 {
        for m in 1..=2 {
            for k in 1..=2 {
                let sp = TruncationSpec::new(cfg(n, m, k), 1, 2, 1);
                let out = FormMap::Differential { slot: k, kind: SlotKind::Full };
                match cohomology_dim(None, Some(out), &sp, &vec![0; k]) {
                    Ok(h) => r.check(h.dim() == 1, || format!("n={n} m={m} k={k}: dim {}", h.dim())),
                    Err(e) => r.error(e),
                }
            }
        }
    }
    r
}

/// Images of the tensor embedding pass the secondary-tensor test; the same
/// functionals with an added derivative, a dependence on a `K != emptyset`
/// component, or a repeated slot fail it.
pub fn tensors(count: usize, seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("secondary-tensor");
    let b = SampleBounds { max_jet: 1, max_degree: 2, max_terms: 2, max_gens: 1, use_base: true };
    let mut rng = StdRng::seed_from_u64(seed);
    let draw = |rng: &mut StdRng| -> jetidf_core::Result<(BundleConfig, FormExpr, jetidf_core::cdiff::CDiffOp)> {
        loop {
            let c = cfg(rng.gen_range(1..=2), rng.gen_range(1..=2), rng.gen_range(1..=3));
            let mut slot_form = FormExpr::one(c);
            let mut omegas = Vec::new();
            for i in 1..c.k {
                let g = Generator::vertical(SlotSet::single(1), rng.gen_range(1..=c.m), MultiIndex::zero(c.n));
                let om = FormExpr::generator(c, g)?.mul_poly(&random_poly(rng, c, &b));
                slot_form = &slot_form * &kappa(i, &om)?;
                omegas.push(om);
            }
            let psi: Vec<_> = (0..c.m).map(|_| FormExpr::from_poly(c, random_poly(rng, c, &b))).collect();
            let op = covector_functional(&tensor_embed(c, &omegas, &psi)?)?;
            if !op.is_zero() {
                return Ok((c, slot_form, op));
            }
        }
    };
    for _ in 0..count {
        match draw(&mut rng) {
            Ok((c, _, op)) => r.check(is_secondary_tensor(&op), || format!("{c}: image rejected {op:?}")),
            Err(e) => r.error(e),
        }
    }
    for _ in 0..count {
        let run = |rng: &mut StdRng| -> jetidf_core::Result<(String, bool)> {
            let (c, w, mut op) = draw(rng)?;
            let f = loop {
                let f = random_poly(rng, c, &b);
                if !f.is_zero() {
                    break f;
                }
            };
            let kind = rng.gen_range(0..if c.k > 1 { 3 } else { 1 });
            let basis = jetidf_core::derivations::kappa_basis(c);
            let plain: Vec<_> = (0..basis.len()).filter(|&a| basis[a].1.is_empty()).collect();
            let a = plain[rng.gen_range(0..plain.len())];
            match kind {
                0 => {
                    let sigma = loop {
                        let s = jetidf_core::sample::random_multi_index(rng, c.n, 2);
                        if !s.is_zero() {
                            break s;
                        }
                    };
                    op.add_entry(0, a, sigma, w.mul_poly(&f))?;
                }
                1 => {
                    let lifted: Vec<_> = (0..basis.len()).filter(|&a| !basis[a].1.is_empty()).collect();
                    let a = lifted[rng.gen_range(0..lifted.len())];
                    op.add_entry(0, a, MultiIndex::zero(c.n), w.mul_poly(&f))?;
                }
                _ => {
                    let extra = loop {
                        let g = Generator::vertical(
                            SlotSet::single(rng.gen_range(1..c.k)),
                            rng.gen_range(1..=c.m),
                            jetidf_core::sample::random_multi_index(rng, c.n, 1),
                        );
                        let e = &w * &FormExpr::generator(c, g)?;
                        if !e.is_zero() {
                            break e;
                        }
                    };
                    op.add_entry(0, a, MultiIndex::zero(c.n), extra.mul_poly(&f))?;
                }
            }
            Ok((format!("{c} perturbation {kind}"), is_secondary_tensor(&op)))
        };
        match run(&mut rng) {
            Ok((what, passes)) => r.check(!passes, || format!("{what} accepted")),
            Err(e) => r.error(e),
        }
    }
    r
}

/// Sample sizes for the suites.
#[derive(Clone, Copy, Debug)]
pub struct Sizes {
    pub axioms: usize,
    pub prolongation: usize,
    pub divergences: usize,
    pub adjoint: usize,
    pub green: usize,
    pub complex: usize,
    pub one_line: usize,
    pub tensors: usize,
}

impl Sizes {
    pub const FULL: Sizes = Sizes {
        axioms: 200,
        prolongation: 100,
        divergences: 20,
        adjoint: 100,
        green: 50,
        complex: 50,
        one_line: 10,
        tensors: 50,
    };
    pub const QUICK: Sizes = Sizes {
        axioms: 24,
        prolongation: 12,
        divergences: 5,
        adjoint: 12,
        green: 6,
        complex: 6,
        one_line: 2,
        tensors: 8,
    };
}

/// All suites in a fixed order, each seeded from `seed`.
pub fn run_all(sizes: Sizes, seed: u64) -> Vec<SuiteResult> {
    vec![
        axioms(sizes.axioms, seed),
        prolongation(sizes.prolongation, seed.wrapping_add(1)),
        classical_el(sizes.divergences, seed.wrapping_add(2)),
        adjoints(sizes.adjoint, sizes.green, seed.wrapping_add(3)),
        helmholtz_family(),
        secondary_complex(sizes.complex, seed.wrapping_add(4)),
        one_line(sizes.one_line, seed.wrapping_add(5)),
        zeroth_cohomology(),
        tensors(sizes.tensors, seed.wrapping_add(6)),
    ]
}
