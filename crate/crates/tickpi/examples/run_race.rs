//! Execute the classic race under both cost models.
//!
//! The process `a().tick.0 | a<> | tick.0` carries two ticks, but under the
//! tick-last strategy both become ready at the same instant, so the span is 1
//! while the work is 2.

use tickpi::parse::parse_process;
use tickpi::sem::{run, CostMode, Policy};

fn main() {
    let p = parse_process("a().tick.0 | a<> | tick.0").unwrap();
    println!("process: {p}\n");

    for mode in [CostMode::Span, CostMode::Work] {
        let report = run(&p, mode, Policy::Deterministic, 1_000).unwrap();
        let cost = report.span.or(report.work).unwrap();
        println!(
            "{mode:?}: cost {cost}, {} zero-cost steps, final `{}`",
            report.zero_cost_steps, report.final_process
        );
    }
}
