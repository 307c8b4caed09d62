//! Shared helpers for the integration suites: corpus loading, random
//! process generators, and a bounded zero-cost reachability search.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tickpi::index::IndexExpr;
use tickpi::parse::parse_program;
use tickpi::program::ProgramFile;
use tickpi::spantypes::SizedType;
use tickpi::syntax::{alpha_normalize, canonical_process, canonicalize, Expr, Process};

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(name)
}

pub fn load_program(name: &str) -> ProgramFile {
    let src = std::fs::read_to_string(corpus_path(name))
        .unwrap_or_else(|e| panic!("reading {name}: {e}"));
    parse_program(&src).unwrap_or_else(|e| panic!("parsing {name}: {e}"))
}

pub fn nat_list(values: &[u64]) -> Expr {
    Expr::list(values.iter().map(|v| Expr::nat(*v)).collect())
}

/// Bind `main`'s base parameters and assemble the runnable process.
pub fn runtime(prog: &ProgramFile, binds: &[(&str, Expr)]) -> Process {
    let map: BTreeMap<String, Expr> = binds
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect();
    tickpi::program::build_runtime(prog, &map).expect("building runtime process")
}

// ---------------------------------------------------------------------------
// Random untyped processes: closed, terminating (servers never call servers).
// ---------------------------------------------------------------------------

pub struct Gen {
    counter: usize,
}

impl Gen {
    pub fn new() -> Self {
        Gen { counter: 0 }
    }

    fn fresh(&mut self, base: &str) -> String {
        self.counter += 1;
        format!("{base}{}", self.counter)
    }

    fn value(&mut self, rng: &mut ChaCha8Rng) -> Expr {
        match rng.gen_range(0..4) {
            0 => Expr::nat(rng.gen_range(0..4)),
            1 => nat_list(&(0..rng.gen_range(0..3)).map(|_| rng.gen_range(0..4)).collect::<Vec<_>>()),
            2 => Expr::True,
            _ => Expr::False,
        }
    }

    /// A closed process using ticks, communication, matches, and one-shot
    /// servers; it always terminates because nothing recurses.
    pub fn process(&mut self, rng: &mut ChaCha8Rng, depth: usize) -> Process {
        if depth == 0 {
            return Process::Nil;
        }
        match rng.gen_range(0..8) {
            0 => Process::Nil,
            1 => Process::tick(self.process(rng, depth - 1)),
            2 => Process::par(self.process(rng, depth - 1), self.process(rng, depth - 1)),
            3 => {
                // new a in (tick^t. a<v> | a(x). P)
                let a = self.fresh("a");
                let v = self.value(rng);
                let mut out = Process::output(&*a, vec![v]);
                for _ in 0..rng.gen_range(0..3) {
                    out = Process::tick(out);
                }
                let body = self.process(rng, depth - 1);
                Process::nu(&*a, Process::par(out, Process::input(&*a, vec!["x"], body)))
            }
            4 => {
                // new s in (!s(x).P | s<v>): a server called exactly once.
                let s = self.fresh("s");
                let body = self.process(rng, depth - 1);
                let serv = Process::Serv {
                    chan: s.clone(),
                    params: vec!["x".into()],
                    body: Box::new(body),
                };
                let call = Process::output(&*s, vec![self.value(rng)]);
                Process::nu(&*s, Process::par(serv, call))
            }
            5 => Process::MatchNat {
                scrutinee: Expr::nat(rng.gen_range(0..3)),
                zero: Box::new(self.process(rng, depth - 1)),
                succ_bind: self.fresh("p"),
                succ: Box::new(self.process(rng, depth - 1)),
            },
            6 => {
                let items: Vec<u64> = (0..rng.gen_range(0..3)).map(|_| rng.gen_range(0..4)).collect();
                Process::MatchList {
                    scrutinee: nat_list(&items),
                    nil: Box::new(self.process(rng, depth - 1)),
                    head_bind: self.fresh("h"),
                    tail_bind: self.fresh("t"),
                    cons: Box::new(self.process(rng, depth - 1)),
                }
            }
            _ => Process::If {
                cond: if rng.gen() { Expr::True } else { Expr::False },
                then_branch: Box::new(self.process(rng, depth - 1)),
                else_branch: Box::new(self.process(rng, depth - 1)),
            },
        }
    }
}

/// A structurally different but congruent variant: swap parallel branches,
/// pad with inert components, rename bound names.
pub fn congruent_variant(p: &Process, rng: &mut ChaCha8Rng) -> Process {
    shuffle(p, rng)
}

fn shuffle(p: &Process, rng: &mut ChaCha8Rng) -> Process {
    match p {
        Process::Par(a, b) => {
            let (x, y) = (shuffle(a, rng), shuffle(b, rng));
            let core = if rng.gen() {
                Process::par(y, x)
            } else {
                Process::par(x, y)
            };
            if rng.gen_ratio(1, 3) {
                Process::par(core, Process::Nil)
            } else {
                core
            }
        }
        Process::Nu { name, annot, body } => Process::Nu {
            name: name.clone(),
            annot: annot.clone(),
            body: Box::new(shuffle(body, rng)),
        },
        Process::Tick(b) => Process::tick(shuffle(b, rng)),
        other => other.clone(),
    }
}

// ---------------------------------------------------------------------------
// Typed open processes for the subject-reduction suite.
// ---------------------------------------------------------------------------

/// A closed-under-context process together with the span context typing its
/// free channels. Every channel is used exactly once as input and once as
/// output; the output is guarded by exactly as many ticks as the channel's
/// declared time, so the process type-checks by construction.
pub struct TypedGen {
    counter: usize,
    pub ctx: Vec<(String, SizedType)>,
}

impl TypedGen {
    pub fn new() -> Self {
        TypedGen {
            counter: 0,
            ctx: Vec::new(),
        }
    }

    pub fn process(&mut self, rng: &mut ChaCha8Rng) -> Process {
        let n = rng.gen_range(1..4);
        let mut components = Vec::new();
        for _ in 0..n {
            components.push(self.component(rng, 2));
        }
        let mut out = components.pop().unwrap();
        for c in components {
            out = Process::par(c, out);
        }
        out
    }

    fn component(&mut self, rng: &mut ChaCha8Rng, depth: usize) -> Process {
        if depth == 0 {
            return self.leaf(rng);
        }
        match rng.gen_range(0..5) {
            0 => self.leaf(rng),
            1 => {
                // A fresh free channel with both endpoints in this component.
                self.counter += 1;
                let a = format!("c{}", self.counter);
                let t = rng.gen_range(0..3u64);
                self.ctx.push((
                    a.clone(),
                    SizedType::Ch {
                        time: IndexExpr::lit(t),
                        args: vec![SizedType::nat(IndexExpr::lit(0), IndexExpr::lit(5))],
                    },
                ));
                let mut out = Process::output(&*a, vec![Expr::nat(rng.gen_range(0..6))]);
                for _ in 0..t {
                    out = Process::tick(out);
                }
                let body = self.inner(rng, depth - 1);
                Process::par(out, Process::input(&*a, vec!["x"], body))
            }
            2 => Process::MatchNat {
                scrutinee: Expr::nat(rng.gen_range(0..3)),
                zero: Box::new(self.component(rng, depth - 1)),
                succ_bind: "p".into(),
                succ: Box::new(self.component(rng, depth - 1)),
            },
            3 => Process::If {
                cond: if rng.gen() { Expr::True } else { Expr::False },
                then_branch: Box::new(self.component(rng, depth - 1)),
                else_branch: Box::new(self.component(rng, depth - 1)),
            },
            _ => Process::par(self.component(rng, depth - 1), self.leaf(rng)),
        }
    }

    /// Bodies under an input may only use ticks and local control flow: the
    /// input's time advance would invalidate promises of outer channels.
    fn inner(&mut self, rng: &mut ChaCha8Rng, depth: usize) -> Process {
        if depth == 0 {
            return self.leaf(rng);
        }
        match rng.gen_range(0..3) {
            0 => self.leaf(rng),
            1 => Process::MatchNat {
                scrutinee: Expr::var("x"),
                zero: Box::new(self.inner(rng, depth - 1)),
                succ_bind: "q".into(),
                succ: Box::new(self.inner(rng, depth - 1)),
            },
            _ => Process::tick(self.inner(rng, depth - 1)),
        }
    }

    fn leaf(&mut self, rng: &mut ChaCha8Rng) -> Process {
        let mut p = Process::Nil;
        for _ in 0..rng.gen_range(0..3) {
            p = Process::tick(p);
        }
        p
    }
}

/// Apply zero-cost reductions in deterministic priority order until none
/// remain. Panics if the budget is exceeded.
pub fn drain(p: &Process) -> Process {
    let mut cur = p.clone();
    for _ in 0..100_000 {
        let cf = canonicalize(&cur);
        let redexes = tickpi::sem::zero_redexes(&cf);
        let Some(r) = redexes.first() else {
            return cur;
        };
        cur = tickpi::sem::apply_redex(&cf, *r).expect("zero-cost step");
    }
    panic!("zero-cost drain did not terminate");
}

// ---------------------------------------------------------------------------
// Bounded exploration of zero-cost reduction.
// ---------------------------------------------------------------------------

/// All zero-cost normal forms reachable from `p` without crossing a tick,
/// up to `budget` distinct states. Returns canonical representatives.
pub fn zero_normal_forms(p: &Process, budget: usize) -> Vec<Process> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![p.clone()];
    let mut normals = Vec::new();
    while let Some(cur) = stack.pop() {
        if seen.len() >= budget {
            break;
        }
        let key = alpha_normalize(&canonical_process(&cur)).to_string();
        if !seen.insert(key) {
            continue;
        }
        let cf = canonicalize(&cur);
        let redexes = tickpi::sem::zero_redexes(&cf);
        if redexes.is_empty() {
            normals.push(canonical_process(&cur));
            continue;
        }
        for r in redexes {
            stack.push(tickpi::sem::apply_redex(&cf, r).expect("zero-cost step"));
        }
    }
    normals
}
