//! Executable semantics. Processes run against one of two cost models:
//!
//! * **span**: maximal parallelism. All available zero-cost steps fire,
//!   then one global time step removes a tick from every ready `tick`
//!   prefix at once. Span is the number of time steps.
//! * **work**: interleaving. Each `tick` fires on its own and costs one
//!   unit; zero-cost steps are free. Work is the number of ticks fired.
//!
//! Both models operate on canonical forms: the process is kept as a
//! restricted multiset of guarded subprocesses, and a step rewrites that
//! multiset.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::syntax::{
    alpha_normalize, canonicalize, substitute, CanonicalForm, Expr, Process, SubstError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostMode {
    Span,
    Work,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Always fire the first available step, in a fixed priority order.
    Deterministic,
    /// Pick uniformly among available steps, seeded for reproducibility.
    Random(u64),
    /// Explore every schedule, visiting at most this many distinct states.
    Exhaustive(usize),
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "deterministic" {
            return Ok(Policy::Deterministic);
        }
        if let Some(seed) = s.strip_prefix("random:") {
            return seed
                .parse()
                .map(Policy::Random)
                .map_err(|_| format!("invalid random seed `{seed}`"));
        }
        if let Some(n) = s.strip_prefix("exhaustive:") {
            return n
                .parse()
                .map(Policy::Exhaustive)
                .map_err(|_| format!("invalid state budget `{n}`"));
        }
        Err(format!(
            "unknown policy `{s}`; expected deterministic, random:SEED, or exhaustive:N"
        ))
    }
}

#[derive(Debug, Error)]
pub enum SemError {
    #[error("substitution failed: {0}")]
    Subst(#[from] SubstError),
    #[error("communication on `{chan}` sends {sent} values to {expected} binders")]
    Arity {
        chan: String,
        sent: usize,
        expected: usize,
    },
}

/// A zero-cost reduction inside a canonical form, identified by positions in
/// the `tops` multiset. Enumeration order doubles as the deterministic
/// scheduling priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Redex {
    CommServer { serv: usize, out: usize },
    CommChannel { inp: usize, out: usize },
    MatchNat(usize),
    MatchList(usize),
    If(usize),
}

/// Every zero-cost redex of a canonical form, in priority order: server
/// communications, then channel communications, then matches, then
/// conditionals, leftmost first within each class.
pub fn zero_redexes(cf: &CanonicalForm) -> Vec<Redex> {
    let mut out = Vec::new();
    for (i, t) in cf.tops.iter().enumerate() {
        if let Process::Serv { chan, .. } = t {
            for (j, u) in cf.tops.iter().enumerate() {
                if let Process::Output { chan: c2, .. } = u {
                    if c2 == chan {
                        out.push(Redex::CommServer { serv: i, out: j });
                    }
                }
            }
        }
    }
    for (i, t) in cf.tops.iter().enumerate() {
        if let Process::Input { chan, .. } = t {
            for (j, u) in cf.tops.iter().enumerate() {
                if let Process::Output { chan: c2, .. } = u {
                    if c2 == chan {
                        out.push(Redex::CommChannel { inp: i, out: j });
                    }
                }
            }
        }
    }
    for (i, t) in cf.tops.iter().enumerate() {
        if let Process::MatchNat { scrutinee, .. } = t {
            if matches!(scrutinee, Expr::Zero | Expr::Succ(_)) {
                out.push(Redex::MatchNat(i));
            }
        }
    }
    for (i, t) in cf.tops.iter().enumerate() {
        if let Process::MatchList { scrutinee, .. } = t {
            if matches!(scrutinee, Expr::Nil | Expr::Cons(..)) {
                out.push(Redex::MatchList(i));
            }
        }
    }
    for (i, t) in cf.tops.iter().enumerate() {
        if let Process::If { cond, .. } = t {
            if matches!(cond, Expr::True | Expr::False) {
                out.push(Redex::If(i));
            }
        }
    }
    out
}

/// Positions of tops that are ready ticks.
pub fn tick_positions(cf: &CanonicalForm) -> Vec<usize> {
    cf.tops
        .iter()
        .enumerate()
        .filter(|(_, t)| matches!(t, Process::Tick(_)))
        .map(|(i, _)| i)
        .collect()
}

fn bind(params: &[String], args: &[Expr], chan: &str) -> Result<BTreeMap<String, Expr>, SemError> {
    if params.len() != args.len() {
        return Err(SemError::Arity {
            chan: chan.to_string(),
            sent: args.len(),
            expected: params.len(),
        });
    }
    Ok(params.iter().cloned().zip(args.iter().cloned()).collect())
}

fn rebuild(cf: &CanonicalForm, remove: &[usize], add: Vec<Process>) -> Process {
    let tops: Vec<Process> = cf
        .tops
        .iter()
        .enumerate()
        .filter(|(i, _)| !remove.contains(i))
        .map(|(_, t)| t.clone())
        .chain(add)
        .collect();
    CanonicalForm {
        restricted: cf.restricted.clone(),
        tops,
    }
    .into_process()
}

/// Fire one zero-cost redex, returning the (uncanonicalised) successor.
pub fn apply_redex(cf: &CanonicalForm, r: Redex) -> Result<Process, SemError> {
    match r {
        Redex::CommServer { serv, out } => {
            let (Process::Serv { chan, params, body }, Process::Output { args, .. }) =
                (&cf.tops[serv], &cf.tops[out])
            else {
                panic!("stale redex");
            };
            let copy = substitute(body, &bind(params, args, chan)?)?;
            Ok(rebuild(cf, &[out], vec![copy]))
        }
        Redex::CommChannel { inp, out } => {
            let (Process::Input { chan, params, body }, Process::Output { args, .. }) =
                (&cf.tops[inp], &cf.tops[out])
            else {
                panic!("stale redex");
            };
            let cont = substitute(body, &bind(params, args, chan)?)?;
            Ok(rebuild(cf, &[inp, out], vec![cont]))
        }
        Redex::MatchNat(i) => {
            let Process::MatchNat {
                scrutinee,
                zero,
                succ_bind,
                succ,
            } = &cf.tops[i]
            else {
                panic!("stale redex");
            };
            let cont = match scrutinee {
                Expr::Zero => (**zero).clone(),
                Expr::Succ(inner) => {
                    let map = [(succ_bind.clone(), (**inner).clone())].into_iter().collect();
                    substitute(succ, &map)?
                }
                _ => panic!("stale redex"),
            };
            Ok(rebuild(cf, &[i], vec![cont]))
        }
        Redex::MatchList(i) => {
            let Process::MatchList {
                scrutinee,
                nil,
                head_bind,
                tail_bind,
                cons,
            } = &cf.tops[i]
            else {
                panic!("stale redex");
            };
            let cont = match scrutinee {
                Expr::Nil => (**nil).clone(),
                Expr::Cons(h, t) => {
                    let map = [
                        (head_bind.clone(), (**h).clone()),
                        (tail_bind.clone(), (**t).clone()),
                    ]
                    .into_iter()
                    .collect();
                    substitute(cons, &map)?
                }
                _ => panic!("stale redex"),
            };
            Ok(rebuild(cf, &[i], vec![cont]))
        }
        Redex::If(i) => {
            let Process::If {
                cond,
                then_branch,
                else_branch,
            } = &cf.tops[i]
            else {
                panic!("stale redex");
            };
            let cont = match cond {
                Expr::True => (**then_branch).clone(),
                Expr::False => (**else_branch).clone(),
                _ => panic!("stale redex"),
            };
            Ok(rebuild(cf, &[i], vec![cont]))
        }
    }
}

/// The global time step: remove one tick from every ready `tick` prefix.
/// Returns the successor and how many ticks fired. Only meaningful when no
/// zero-cost redex remains.
pub fn time_step(cf: &CanonicalForm) -> (Process, u64) {
    let mut fired = 0;
    let tops: Vec<Process> = cf
        .tops
        .iter()
        .map(|t| match t {
            Process::Tick(q) => {
                fired += 1;
                (**q).clone()
            }
            other => other.clone(),
        })
        .collect();
    (
        CanonicalForm {
            restricted: cf.restricted.clone(),
            tops,
        }
        .into_process(),
        fired,
    )
}

/// Remove the tick at one position only (the interleaving model's tick step).
pub fn single_tick(cf: &CanonicalForm, pos: usize) -> Process {
    let Process::Tick(q) = &cf.tops[pos] else {
        panic!("no tick at position {pos}");
    };
    rebuild(cf, &[pos], vec![(**q).clone()])
}

/// All one-step successors under the interleaving (work) semantics. Tick
/// steps are paired with cost 1, communications and branches with cost 0.
pub fn work_successors(p: &Process) -> Result<Vec<(Process, u64)>, SemError> {
    let cf = canonicalize(p);
    let mut out = Vec::new();
    for r in zero_redexes(&cf) {
        out.push((apply_redex(&cf, r)?, 0));
    }
    for pos in tick_positions(&cf) {
        out.push((single_tick(&cf, pos), 1));
    }
    Ok(out)
}

/// No zero-cost redex and no ready tick: the process cannot move.
pub fn is_normal(p: &Process) -> bool {
    let cf = canonicalize(p);
    zero_redexes(&cf).is_empty() && tick_positions(&cf).is_empty()
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    #[serde(rename = "final")]
    pub final_process: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub work: Option<u64>,
    pub zero_cost_steps: u64,
    pub terminated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedules_explored: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_span: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_span: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_work: Option<u64>,
}

/// Run a process to completion (or until the step budget runs out) under the
/// chosen cost model and scheduling policy.
pub fn run(
    p: &Process,
    mode: CostMode,
    policy: Policy,
    max_steps: u64,
) -> Result<RunReport, SemError> {
    match policy {
        Policy::Exhaustive(states) => run_exhaustive(p, mode, states, max_steps),
        Policy::Deterministic => run_scheduled(p, mode, max_steps, None),
        Policy::Random(seed) => {
            run_scheduled(p, mode, max_steps, Some(ChaCha8Rng::seed_from_u64(seed)))
        }
    }
}

fn run_scheduled(
    p: &Process,
    mode: CostMode,
    max_steps: u64,
    mut rng: Option<ChaCha8Rng>,
) -> Result<RunReport, SemError> {
    let mut cur = p.clone();
    let mut span = 0u64;
    let mut work = 0u64;
    let mut zero = 0u64;
    let mut steps = 0u64;
    let terminated = loop {
        if steps >= max_steps {
            break false;
        }
        let cf = canonicalize(&cur);
        let redexes = zero_redexes(&cf);
        if !redexes.is_empty() {
            let pick = match &mut rng {
                Some(r) => redexes[r.gen_range(0..redexes.len())],
                None => redexes[0],
            };
            cur = apply_redex(&cf, pick)?;
            zero += 1;
        } else {
            let ticks = tick_positions(&cf);
            if ticks.is_empty() {
                break true;
            }
            match mode {
                CostMode::Span => {
                    let (next, fired) = time_step(&cf);
                    cur = next;
                    span += 1;
                    work += fired;
                }
                CostMode::Work => {
                    let pos = match &mut rng {
                        Some(r) => ticks[r.gen_range(0..ticks.len())],
                        None => ticks[0],
                    };
                    cur = single_tick(&cf, pos);
                    work += 1;
                }
            }
        }
        steps += 1;
    };
    Ok(RunReport {
        final_process: crate::syntax::canonical_process(&cur).to_string(),
        span: (mode == CostMode::Span).then_some(span),
        work: Some(work),
        zero_cost_steps: zero,
        terminated,
        schedules_explored: None,
        min_span: None,
        max_span: None,
        max_work: None,
    })
}

struct Explorer {
    mode: CostMode,
    state_budget: usize,
    depth_budget: u64,
    memo: HashMap<Process, (u64, u64)>,
    visiting: HashSet<Process>,
    states: usize,
    /// Total `explore` calls, including memoised ones. Each call normalises
    /// its argument, so this is what actually bounds the running time.
    calls: usize,
    exhausted: bool,
}

impl Explorer {
    // Returns (min cost, max cost) over all schedules from `p`, where cost is
    // span or work depending on mode. Cycles and blown budgets set
    // `exhausted` and return zeros, which the caller reports as
    // non-termination.
    fn explore(&mut self, p: &Process, depth: u64) -> Result<(u64, u64), SemError> {
        if self.exhausted {
            return Ok((0, 0));
        }
        self.calls += 1;
        if self.calls > self.state_budget {
            self.exhausted = true;
            return Ok((0, 0));
        }
        let cf = canonicalize(p);
        let key = alpha_normalize(&cf.clone().into_process());
        if let Some(&cached) = self.memo.get(&key) {
            return Ok(cached);
        }
        if self.visiting.contains(&key) || depth >= self.depth_budget {
            self.exhausted = true;
            return Ok((0, 0));
        }
        self.states += 1;
        if self.states > self.state_budget {
            self.exhausted = true;
            return Ok((0, 0));
        }
        self.visiting.insert(key.clone());
        let mut succs: Vec<(Process, u64)> = Vec::new();
        let redexes = zero_redexes(&cf);
        match self.mode {
            CostMode::Span => {
                if redexes.is_empty() {
                    if !tick_positions(&cf).is_empty() {
                        let (next, _) = time_step(&cf);
                        succs.push((next, 1));
                    }
                } else {
                    for r in redexes {
                        succs.push((apply_redex(&cf, r)?, 0));
                    }
                }
            }
            CostMode::Work => {
                for r in redexes {
                    succs.push((apply_redex(&cf, r)?, 0));
                }
                for pos in tick_positions(&cf) {
                    succs.push((single_tick(&cf, pos), 1));
                }
            }
        }
        let result = if succs.is_empty() {
            (0, 0)
        } else {
            let mut lo = u64::MAX;
            let mut hi = 0;
            for (next, cost) in succs {
                let (a, b) = self.explore(&next, depth + 1)?;
                lo = lo.min(a + cost);
                hi = hi.max(b + cost);
            }
            (lo, hi)
        };
        self.visiting.remove(&key);
        self.memo.insert(key, result);
        Ok(result)
    }
}

fn run_exhaustive(
    p: &Process,
    mode: CostMode,
    state_budget: usize,
    max_steps: u64,
) -> Result<RunReport, SemError> {
    let mut ex = Explorer {
        mode,
        state_budget,
        depth_budget: max_steps,
        memo: HashMap::new(),
        visiting: HashSet::new(),
        states: 0,
        calls: 0,
        exhausted: false,
    };
    let (lo, hi) = ex.explore(p, 0)?;
    // Also produce a concrete final state from the deterministic schedule.
    let det = run_scheduled(p, mode, max_steps, None)?;
    let ok = !ex.exhausted && det.terminated;
    Ok(RunReport {
        final_process: det.final_process,
        span: det.span,
        work: det.work,
        zero_cost_steps: det.zero_cost_steps,
        terminated: ok,
        schedules_explored: Some(ex.states as u64),
        min_span: (ok && mode == CostMode::Span).then_some(lo),
        max_span: (ok && mode == CostMode::Span).then_some(hi),
        max_work: (ok && mode == CostMode::Work).then_some(hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Process as P;

    fn race() -> Process {
        // a().tick.0 | a<> | tick.0  — span 1, work 2.
        P::par(
            P::input("a", vec![], P::tick(P::Nil)),
            P::par(P::output("a", vec![]), P::tick(P::Nil)),
        )
    }

    #[test]
    fn race_has_span_one() {
        let r = run(&race(), CostMode::Span, Policy::Deterministic, 1000).unwrap();
        assert!(r.terminated);
        assert_eq!(r.span, Some(1));
        assert_eq!(r.work, Some(2));
    }

    #[test]
    fn race_has_work_two_under_all_schedules() {
        let r = run(&race(), CostMode::Work, Policy::Exhaustive(1000), 1000).unwrap();
        assert!(r.terminated);
        assert_eq!(r.max_work, Some(2));
        for seed in 0..5 {
            let r = run(&race(), CostMode::Work, Policy::Random(seed), 1000).unwrap();
            assert_eq!(r.work, Some(2));
        }
    }

    #[test]
    fn sequencing_through_channels_increases_span() {
        // tick.b<> | b().tick.0 : the second tick waits for the first.
        let p = P::par(
            P::tick(P::output("b", vec![])),
            P::input("b", vec![], P::tick(P::Nil)),
        );
        let r = run(&p, CostMode::Span, Policy::Deterministic, 1000).unwrap();
        assert_eq!(r.span, Some(2));
        assert_eq!(r.work, Some(2));
    }

    #[test]
    fn server_replicates() {
        // !f(x).tick.0 | f<1> | f<2> : two calls, work 2, span 1.
        let serv = P::Serv {
            chan: "f".into(),
            params: vec!["x".into()],
            body: Box::new(P::tick(P::Nil)),
        };
        let p = P::par(
            serv,
            P::par(
                P::output("f", vec![Expr::nat(1)]),
                P::output("f", vec![Expr::nat(2)]),
            ),
        );
        let r = run(&p, CostMode::Span, Policy::Deterministic, 1000).unwrap();
        assert_eq!(r.span, Some(1));
        assert_eq!(r.work, Some(2));
    }

    #[test]
    fn match_reduces_for_free() {
        let p = P::MatchNat {
            scrutinee: Expr::nat(2),
            zero: Box::new(P::tick(P::Nil)),
            succ_bind: "x".into(),
            succ: Box::new(P::Nil),
        };
        let r = run(&p, CostMode::Span, Policy::Deterministic, 1000).unwrap();
        assert_eq!(r.span, Some(0));
        assert_eq!(r.zero_cost_steps, 1);
    }

    #[test]
    fn budget_exhaustion_reported() {
        let loopy = P::par(
            P::Serv {
                chan: "f".into(),
                params: vec![],
                body: Box::new(P::output("f", vec![])),
            },
            P::output("f", vec![]),
        );
        let r = run(&loopy, CostMode::Work, Policy::Deterministic, 50).unwrap();
        assert!(!r.terminated);
    }

    #[test]
    fn exhaustive_min_max_span_differ_when_racing() {
        // a().tick.tick.0 | a().0 | a<> : one receiver gets the message.
        let p = P::par(
            P::input("a", vec![], P::tick(P::tick(P::Nil))),
            P::par(P::input("a", vec![], P::Nil), P::output("a", vec![])),
        );
        let r = run(&p, CostMode::Span, Policy::Exhaustive(10_000), 1000).unwrap();
        assert!(r.terminated);
        assert_eq!(r.min_span, Some(0));
        assert_eq!(r.max_span, Some(2));
    }
}
