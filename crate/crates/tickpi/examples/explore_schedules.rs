//! Explore every schedule of a racy process and report the cost envelope.
//!
//! Two clients race for a single server slot; which one wins changes how the
//! ticks line up, so the span differs across schedules. Exhaustive
//! exploration reports the full min/max range, which the deterministic
//! policy alone cannot see.

use tickpi::parse::parse_process;
use tickpi::sem::{run, CostMode, Policy};

fn main() {
    let p = parse_process(
        "a(x). match x { 0 => tick.0; s(y) => tick.tick.0 } | a<0> | a<s(0)>",
    )
    .unwrap();
    println!("process: {p}\n");

    let det = run(&p, CostMode::Span, Policy::Deterministic, 1_000).unwrap();
    println!("deterministic schedule: span {}", det.span.unwrap());

    for seed in 0..4 {
        let r = run(&p, CostMode::Span, Policy::Random(seed), 1_000).unwrap();
        println!("random seed {seed}:          span {}", r.span.unwrap());
    }

    let ex = run(&p, CostMode::Span, Policy::Exhaustive(1_000), 1_000).unwrap();
    println!(
        "exhaustive ({} states):  span {}..{}",
        ex.schedules_explored.unwrap(),
        ex.min_span.unwrap(),
        ex.max_span.unwrap()
    );

    let work = run(&p, CostMode::Work, Policy::Exhaustive(1_000), 1_000).unwrap();
    println!("max work across schedules: {}", work.max_work.unwrap());
}
