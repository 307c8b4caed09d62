//! Query the index-constraint entailment engine directly.
//!
//! With no arguments, runs a tour of representative queries. Otherwise the
//! first argument is the goal constraint and any further arguments are
//! hypotheses, e.g.:
//!
//! ```text
//! cargo run --example entailment -- "i + 1 <= pow2(i)" "1 <= i"
//! ```

use tickpi::index::{entails_default, IndexEnv};
use tickpi::parse::parse_constraint;

fn query(env: &IndexEnv, hyps: &[&str], goal: &str) {
    let mut env = env.clone();
    for h in hyps {
        env.assume(parse_constraint(h).expect("hypothesis parses"));
    }
    let c = parse_constraint(goal).expect("goal parses");
    let started = std::time::Instant::now();
    let verdict = entails_default(&env, &c);
    println!(
        "{:60} under {:?}\n  => {verdict:?}  ({:.1?})",
        goal,
        hyps,
        started.elapsed()
    );
}

fn main() {
    let mut env = IndexEnv::default();
    for v in ["i", "j", "k", "n"] {
        env.declare_var(v);
    }

    let args: Vec<String> = std::env::args().skip(1).collect();
    if !args.is_empty() {
        let hyps: Vec<&str> = args[1..].iter().map(String::as_str).collect();
        query(&env, &hyps, &args[0]);
        return;
    }

    // Linear arithmetic over naturals.
    query(&env, &[], "i + j <= 2 * (i + j)");
    // Truncated subtraction needs a case split on i <= 1.
    query(&env, &[], "i - 1 + 1 <= i + 1");
    // Exponentials: pow2 grows faster than any line the engine can refute.
    query(&env, &["1 <= i"], "i + 1 <= pow2(i)");
    // The mergesort span recurrence at the heart of the corpus.
    query(
        &env,
        &["1 <= i"],
        "pow2(i) + pow2(i - 1 + 1) <= pow2(i + 1)",
    );
    // A false claim comes back with a concrete counterexample valuation.
    query(&env, &[], "pow2(i) <= i * i + 1");
    // Hypotheses can make an otherwise refutable goal valid.
    query(&env, &["j <= i"], "j - i <= 0");
}
