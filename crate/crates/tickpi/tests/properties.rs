//! Randomized property suites for the structural, index, semantic, and typing
//! layers, complementing the acceptance criteria with the documented
//! invariants of each module.

mod common;

use std::collections::BTreeMap;
use std::time::Duration;

use common::{congruent_variant, drain, load_program, nat_list, runtime, Gen, TypedGen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tickpi::index::{
    entails, eval_index, Constraint, EntailConfig, Entailment, IndexEnv,
    IndexExpr, Rel, Valuation,
};
use tickpi::iotypes::{check_process_simple, subtype_simple, SimpleCtx, SimpleType};
use tickpi::parse::parse_process;
use tickpi::program::{check_program, Mode};
use tickpi::sem::{
    run, tick_positions, time_step, zero_redexes, CostMode, Policy,
};
use tickpi::spantypes::{
    advance_type, forget, subtype_sized, synthesize_span, Checker, SizedType,
};
use tickpi::syntax::{
    alpha_normalize, canonicalize, congruent, substitute, Expr, Process,
};
use tickpi::worktypes::{strip_time, synthesize_work};

const CORPUS: &[&str] = &[
    "race.pi",
    "mergesort.pi",
    "mergesort_comm.pi",
    "merge_alt.pi",
    "empty.pi",
];

// ---------------------------------------------------------------------------
// Structural layer
// ---------------------------------------------------------------------------

#[test]
fn canonical_reassembly_is_congruent() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..300 {
        let p = Gen::new().process(&mut rng, 4);
        let reassembled = canonicalize(&p).into_process();
        assert!(
            congruent(&p, &reassembled),
            "canonical reassembly must stay congruent: {p}"
        );
    }
}

#[test]
fn congruence_is_an_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let p = Gen::new().process(&mut rng, 4);
        let q = congruent_variant(&p, &mut rng);
        let r = congruent_variant(&q, &mut rng);
        assert!(congruent(&p, &p), "reflexive");
        assert!(congruent(&p, &q) && congruent(&q, &p), "symmetric");
        assert!(congruent(&p, &q) && congruent(&q, &r) && congruent(&p, &r), "transitive");
    }
}

#[test]
fn congruent_processes_have_matching_canonical_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let p = Gen::new().process(&mut rng, 4);
        let q = congruent_variant(&p, &mut rng);
        let a = canonicalize(&p);
        let b = canonicalize(&q);
        let mut ra = a.restricted.clone();
        let mut rb = b.restricted.clone();
        ra.sort();
        rb.sort();
        assert_eq!(ra, rb, "restricted-name multisets must agree");
        assert_eq!(a.tops.len(), b.tops.len(), "top multisets must agree in size");
    }
}

#[test]
fn erasure_commutes_with_congruence() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let p = Gen::new().process(&mut rng, 4);
        let q = congruent_variant(&p, &mut rng);
        assert!(
            congruent(&p.erase_ticks(), &q.erase_ticks()),
            "erasing ticks must preserve congruence"
        );
    }
}

#[test]
fn substitution_avoids_capture() {
    // new x in d<y>  with  y := x  must rename the binder, not capture.
    let p = Process::nu("x", Process::output("d", vec![Expr::var("y")]));
    let map: BTreeMap<String, Expr> = [("y".to_string(), Expr::var("x"))].into();
    let s = substitute(&p, &map).expect("substitution succeeds");
    assert!(
        s.free_names().contains("x"),
        "the substituted x must stay free: {s}"
    );

    // Random sweep: substituting a fresh free name for some free channel never
    // loses it to a binder.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let p = Gen::new().process(&mut rng, 4);
        let free = p.free_names();
        let Some(target) = free.iter().next().cloned() else {
            continue;
        };
        let map: BTreeMap<String, Expr> =
            [(target, Expr::var("fresh_outside"))].into();
        let s = substitute(&p, &map).expect("substitution succeeds");
        assert!(
            s.free_names().contains("fresh_outside"),
            "the actual must remain free after substitution"
        );
    }
}

#[test]
fn pretty_printed_processes_reparse() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..300 {
        let p = Gen::new().process(&mut rng, 4);
        let q = parse_process(&p.to_string()).expect("pretty output reparses");
        assert_eq!(
            alpha_normalize(&p),
            alpha_normalize(&q),
            "round trip must preserve structure: {p}"
        );
    }
    for file in CORPUS {
        let prog = load_program(file);
        for def in &prog.defs {
            let body = &def.body;
            let q = parse_process(&body.to_string()).expect("corpus body reparses");
            assert_eq!(alpha_normalize(body), alpha_normalize(&q), "{file}/{}", def.name);
        }
        let q = parse_process(&prog.main.body.to_string()).expect("corpus main reparses");
        assert_eq!(alpha_normalize(&prog.main.body), alpha_normalize(&q), "{file}/main");
    }
}

// ---------------------------------------------------------------------------
// Index layer
// ---------------------------------------------------------------------------

fn random_index(rng: &mut ChaCha8Rng, vars: &[&str], depth: usize) -> IndexExpr {
    if depth == 0 {
        return if rng.gen() {
            IndexExpr::var(vars[rng.gen_range(0..vars.len())])
        } else {
            IndexExpr::lit(rng.gen_range(0..5))
        };
    }
    match rng.gen_range(0..6) {
        0 => IndexExpr::add(
            random_index(rng, vars, depth - 1),
            random_index(rng, vars, depth - 1),
        ),
        1 => IndexExpr::mul(
            random_index(rng, vars, depth - 1),
            random_index(rng, vars, depth - 1),
        ),
        2 => tickpi::index::fold_monus(
            random_index(rng, vars, depth - 1),
            random_index(rng, vars, depth - 1),
        ),
        3 => tickpi::index::fold_max(
            random_index(rng, vars, depth - 1),
            random_index(rng, vars, depth - 1),
        ),
        4 => IndexExpr::pow2(random_index(rng, vars, 0)),
        _ => random_index(rng, vars, 0),
    }
}

fn random_constraint(rng: &mut ChaCha8Rng, vars: &[&str]) -> Constraint {
    let rel = match rng.gen_range(0..3) {
        0 => Rel::Le,
        1 => Rel::Lt,
        _ => Rel::Eq,
    };
    Constraint {
        lhs: random_index(rng, vars, 2),
        rel,
        rhs: random_index(rng, vars, 2),
    }
}

fn random_valuation(rng: &mut ChaCha8Rng, vars: &[&str], bound: u64) -> Valuation {
    vars.iter()
        .map(|v| (v.to_string(), rng.gen_range(0..=bound)))
        .collect()
}

#[test]
fn monus_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let vars = ["i", "j", "k"];
    let env = IndexEnv::with_vars(vars);
    for _ in 0..500 {
        let a = random_index(&mut rng, &vars, 2);
        let b = random_index(&mut rng, &vars, 2);
        let rho = random_valuation(&mut rng, &vars, 6);
        let va = eval_index(&a, &rho, &env).unwrap();
        let vb = eval_index(&b, &rho, &env).unwrap();
        let self_minus = tickpi::index::fold_monus(a.clone(), a.clone());
        assert_eq!(eval_index(&self_minus, &rho, &env).unwrap(), 0, "I - I = 0");
        let back = IndexExpr::add(tickpi::index::fold_monus(a.clone(), b.clone()), b.clone());
        let vmon = eval_index(&back, &rho, &env).unwrap();
        assert!(vmon >= va, "(I - J) + J >= I");
        if vb <= va {
            assert_eq!(vmon, va, "(I - J) + J = I when J <= I");
        }
    }
}

/// A small proof budget for randomized query storms; hard instances fall to
/// Unknown, which every property here tolerates.
fn quick_cfg() -> EntailConfig {
    EntailConfig {
        prove_cap: 10_000,
        split_depth: 4,
        ..EntailConfig::default()
    }
}

#[test]
fn entailment_weakening() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let vars = ["i", "j", "k"];
    let cfg = quick_cfg();
    let mut exercised = 0;
    for _ in 0..400 {
        let mut env = IndexEnv::with_vars(vars);
        if rng.gen() {
            env.assume(random_constraint(&mut rng, &vars));
        }
        let goal = random_constraint(&mut rng, &vars);
        if !matches!(entails(&env, &goal, &cfg), Entailment::Valid) {
            continue;
        }
        exercised += 1;
        let mut wider = env.clone();
        wider.assume(random_constraint(&mut rng, &vars));
        assert!(
            !matches!(entails(&wider, &goal, &cfg), Entailment::Refuted(_)),
            "a valid entailment cannot be refuted under extra hypotheses: {goal}"
        );
    }
    assert!(exercised > 30, "weakening sweep must exercise Valid verdicts");
}

#[test]
fn entailment_strengthening() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let vars = ["i", "j", "k"];
    let cfg = quick_cfg();
    let mut exercised = 0;
    for _ in 0..400 {
        let mut env = IndexEnv::with_vars(vars);
        if rng.gen() {
            env.assume(random_constraint(&mut rng, &vars));
        }
        let c = random_constraint(&mut rng, &vars);
        if !matches!(entails(&env, &c, &cfg), Entailment::Valid) {
            continue;
        }
        let strengthened = env.extended(&[], &[c]);
        let c2 = random_constraint(&mut rng, &vars);
        if !matches!(entails(&strengthened, &c2, &cfg), Entailment::Valid) {
            continue;
        }
        exercised += 1;
        assert!(
            !matches!(entails(&env, &c2, &cfg), Entailment::Refuted(_)),
            "cutting a valid hypothesis cannot flip validity to refutation: {c2}"
        );
    }
    assert!(exercised > 10, "strengthening sweep must exercise Valid chains");
}

// ---------------------------------------------------------------------------
// Semantics layer
// ---------------------------------------------------------------------------

#[test]
fn time_step_fires_exactly_the_top_ticks() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..300 {
        let p = Gen::new().process(&mut rng, 4);
        let drained = drain(&p);
        let cf = canonicalize(&drained);
        let ticks = tick_positions(&cf).len() as u64;
        let (next, fired) = time_step(&cf);
        assert_eq!(fired, ticks, "one global step strips every ready tick");
        if ticks == 0 {
            assert!(congruent(&next, &cf.clone().into_process()), "no ticks, no change");
        }
    }
}

#[test]
fn terminated_span_runs_end_in_normal_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let p = Gen::new().process(&mut rng, 4);
        let report = run(&p, CostMode::Span, Policy::Deterministic, 10_000).unwrap();
        if !report.terminated {
            continue;
        }
        let q = parse_process(&report.final_process).expect("final state reparses");
        let cf = canonicalize(&q);
        assert!(zero_redexes(&cf).is_empty(), "final state has no redexes");
        assert!(tick_positions(&cf).is_empty(), "final state has no ready ticks");
    }
}

#[test]
fn exhaustive_maxima_are_monotone_in_the_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut compared = 0;
    for _ in 0..150 {
        let p = Gen::new().process(&mut rng, 3);
        let small = run(&p, CostMode::Work, Policy::Exhaustive(50), 10_000).unwrap();
        let large = run(&p, CostMode::Work, Policy::Exhaustive(500), 10_000).unwrap();
        if let (Some(a), Some(b)) = (small.max_work, large.max_work) {
            compared += 1;
            assert!(b >= a, "a larger schedule budget cannot lower the maximum");
        }
    }
    assert!(compared > 30, "monotonicity sweep must compare real reports");
}

#[test]
fn random_policy_costs_stay_within_exhaustive_envelope() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for seed in 0..100u64 {
        let p = Gen::new().process(&mut rng, 3);
        let ex = run(&p, CostMode::Span, Policy::Exhaustive(2_000), 10_000).unwrap();
        let (Some(lo), Some(hi)) = (ex.min_span, ex.max_span) else {
            continue;
        };
        let r = run(&p, CostMode::Span, Policy::Random(seed), 10_000).unwrap();
        if r.terminated {
            let s = r.span.unwrap();
            assert!(lo <= s && s <= hi, "random schedule span {s} outside [{lo}, {hi}]");
        }
    }
}

// ---------------------------------------------------------------------------
// Typing layers
// ---------------------------------------------------------------------------

fn empty_checker() -> Checker {
    Checker::new(IndexEnv::with_vars([] as [&str; 0]))
}

#[test]
fn simple_subtyping_is_a_preorder() {
    let mut types = vec![
        SimpleType::Nat,
        SimpleType::Bool,
        SimpleType::List(Box::new(SimpleType::Nat)),
    ];
    for base in types.clone() {
        types.push(SimpleType::Ch(vec![base.clone()]));
        types.push(SimpleType::In(vec![base.clone()]));
        types.push(SimpleType::Out(vec![base]));
    }
    types.push(SimpleType::Ch(vec![]));
    for t in &types {
        assert!(subtype_simple(t, t), "reflexivity at {t:?}");
    }
    for a in &types {
        for b in &types {
            for c in &types {
                if subtype_simple(a, b) && subtype_simple(b, c) {
                    assert!(subtype_simple(a, c), "transitivity {a:?} <= {b:?} <= {c:?}");
                }
            }
        }
    }
}

#[test]
fn span_typing_implies_simple_typing() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let ck = empty_checker();
    for _ in 0..200 {
        let mut gen = TypedGen::new();
        let p = gen.process(&mut rng);
        let ctx: BTreeMap<String, SizedType> = gen.ctx.iter().cloned().collect();
        if synthesize_span(&ck, &ctx, &p).is_err() {
            continue;
        }
        let simple: SimpleCtx = ctx.iter().map(|(k, v)| (k.clone(), forget(v))).collect();
        check_process_simple(&simple, &p)
            .expect("span-typed processes are simply typed after forgetting sizes");
    }
}

#[test]
fn advance_preserves_subtyping() {
    let ck = empty_checker();
    let lit = IndexExpr::lit;
    // t <= u pairs: widen value bounds, shrink channel capability.
    let pairs = vec![
        (
            SizedType::nat(lit(2), lit(3)),
            SizedType::nat(lit(1), lit(5)),
        ),
        (
            SizedType::list(lit(0), lit(2), SizedType::nat(lit(0), lit(4))),
            SizedType::list(lit(0), lit(3), SizedType::nat(lit(0), lit(6))),
        ),
        (
            SizedType::Ch {
                time: lit(3),
                args: vec![SizedType::nat(lit(0), lit(4))],
            },
            SizedType::In {
                time: lit(3),
                args: vec![SizedType::nat(lit(0), lit(4))],
            },
        ),
        (
            SizedType::Ch {
                time: lit(5),
                args: vec![],
            },
            SizedType::Out {
                time: lit(5),
                args: vec![],
            },
        ),
    ];
    for (t, u) in pairs {
        subtype_sized(&ck, &t, &u).expect("pair is in the subtype relation");
        for i in 0..6u64 {
            let shift = lit(i);
            if let Some(au) = advance_type(&ck, &u, &shift) {
                let at = advance_type(&ck, &t, &shift)
                    .expect("the smaller type advances whenever the larger does");
                subtype_sized(&ck, &at, &au)
                    .expect("advancing time preserves the subtype relation");
            }
        }
    }
}

#[test]
fn widening_declared_bounds_preserves_acceptance() {
    for (file, modes) in [
        ("race.pi", &[Mode::Span][..]),
        ("mergesort.pi", &[Mode::Span, Mode::Work][..]),
        ("empty.pi", &[Mode::Span, Mode::Work][..]),
    ] {
        for &mode in modes {
            let mut prog = load_program(file);
            let widen = |b: &mut Option<IndexExpr>| {
                if let Some(k) = b.take() {
                    *b = Some(IndexExpr::add(k, IndexExpr::lit(7)));
                }
            };
            match mode {
                Mode::Span => widen(&mut prog.main.span_bound),
                Mode::Work => widen(&mut prog.main.work_bound),
                Mode::Io => {}
            }
            let items = check_program(&prog, mode, EntailConfig::default());
            assert!(
                items.iter().all(|i| i.ok()),
                "{file}: widening the main bound must not break {mode:?} checking"
            );
        }
    }
}

#[test]
fn work_synthesis_bounds_span_synthesis() {
    // Span counts merged ticks once, work counts each; on the generated
    // fragment both synthesize, and the work bound dominates pointwise.
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let env = IndexEnv::with_vars([] as [&str; 0]);
    let ck = Checker::new(env.clone());
    for _ in 0..200 {
        let mut gen = TypedGen::new();
        let p = gen.process(&mut rng);
        let ctx: BTreeMap<String, SizedType> = gen.ctx.iter().cloned().collect();
        let Ok(span_k) = synthesize_span(&ck, &ctx, &p) else {
            continue;
        };
        let wctx: BTreeMap<String, _> =
            ctx.iter().map(|(k, v)| (k.clone(), strip_time(v))).collect();
        let Ok(work_k) = synthesize_work(&ck, &wctx, &p) else {
            continue;
        };
        let rho = Valuation::new();
        let vs = eval_index(&span_k, &rho, &env).unwrap();
        let vw = eval_index(&work_k, &rho, &env).unwrap();
        assert!(vs <= vw, "span bound {vs} must not exceed work bound {vw} on {p}");
    }
}

#[test]
fn measured_span_never_exceeds_measured_work() {
    for (file, binds) in [
        ("race.pi", vec![]),
        ("empty.pi", vec![]),
        ("mergesort.pi", vec![("l", nat_list(&[2, 1]))]),
        (
            "merge_alt.pi",
            vec![("l1", nat_list(&[1, 3])), ("l2", nat_list(&[2, 4]))],
        ),
        ("mergesort_comm.pi", vec![("l", nat_list(&[3, 1]))]),
    ] {
        let prog = load_program(file);
        let p = runtime(&prog, &binds);
        let s = run(&p, CostMode::Span, Policy::Deterministic, 100_000).unwrap();
        let w = run(&p, CostMode::Work, Policy::Deterministic, 100_000).unwrap();
        assert!(s.terminated && w.terminated, "{file} terminates");
        assert!(
            s.span.unwrap() <= w.work.unwrap(),
            "{file}: span {} exceeds work {}",
            s.span.unwrap(),
            w.work.unwrap()
        );
    }
}

#[test]
fn typed_normal_forms_have_the_documented_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let ck = empty_checker();
    for _ in 0..200 {
        let mut gen = TypedGen::new();
        let p = gen.process(&mut rng);
        let ctx: BTreeMap<String, SizedType> = gen.ctx.iter().cloned().collect();
        if synthesize_span(&ck, &ctx, &p).is_err() {
            continue;
        }
        let report = run(&p, CostMode::Span, Policy::Deterministic, 10_000).unwrap();
        if !report.terminated {
            continue;
        }
        let q = parse_process(&report.final_process).unwrap();
        let cf = canonicalize(&q);
        let mut in_names = Vec::new();
        let mut out_names = Vec::new();
        for top in &cf.tops {
            match top {
                Process::If { .. } => panic!("typed normal forms contain no conditionals"),
                Process::MatchNat { .. } | Process::MatchList { .. } => {
                    panic!("typed normal forms contain no stuck matches")
                }
                Process::Input { chan, .. } => in_names.push(chan.clone()),
                Process::Output { chan, .. } => out_names.push(chan.clone()),
                _ => {}
            }
        }
        for n in &in_names {
            assert!(
                !out_names.contains(n),
                "an input and an output on {n} would still be a redex"
            );
        }
    }
}

#[test]
fn span_runs_respect_a_time_budget() {
    // Guard for the whole randomized layer: every generated process used
    // above drains within the budget, so suites cannot silently loop.
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let p = Gen::new().process(&mut rng, 4);
        let _ = run(&p, CostMode::Span, Policy::Deterministic, 10_000).unwrap();
    }
    assert!(
        start.elapsed() < Duration::from_secs(30),
        "randomized semantics layer exceeded its soft budget"
    );
}
