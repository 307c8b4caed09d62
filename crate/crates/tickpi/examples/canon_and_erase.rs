//! Structural tools: canonical forms and tick erasure.
//!
//! Canonicalization hoists every `new` binder to the front and flattens the
//! parallel composition into a sorted multiset of guarded processes; erasure
//! strips every `tick`, recovering the un-instrumented program.

use tickpi::parse::parse_process;
use tickpi::syntax::{canonical_process, congruent};

fn main() {
    let p = parse_process("(b<> | 0) | new a in (tick.a(x).0 | (a<0> | 0))").unwrap();
    println!("source:    {p}");

    let canon = canonical_process(&p);
    println!("canonical: {canon}");
    assert!(congruent(&p, &canon), "canonicalization preserves congruence");

    let erased = p.erase_ticks();
    println!("erased:    {erased}");

    // Canonicalization is idempotent.
    let again = canonical_process(&canon);
    assert_eq!(canon, again);
    println!("\ncanonical form is stable under a second pass");
}
