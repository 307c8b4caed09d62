//! Statically verify the declared cost bounds of the mergesort program.
//!
//! The corpus file declares a span bound of `pow2(i + 1)` comparison ticks
//! and a work bound of `i * pow2(i)` for sorting a list of length `pow2(i)`;
//! this example checks both, plus the plain input/output discipline.

use std::path::PathBuf;

use tickpi::index::EntailConfig;
use tickpi::parse::parse_program;
use tickpi::program::{check_program, Mode};

fn main() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus/mergesort.pi");
    let prog = parse_program(&std::fs::read_to_string(&path).unwrap()).unwrap();

    for mode in [Mode::Io, Mode::Span, Mode::Work] {
        println!("--- {mode:?} ---");
        for item in check_program(&prog, mode, EntailConfig::default()) {
            match &item.result {
                Ok(detail) => println!("ok   {}: {detail}", item.name),
                Err(e) => println!("FAIL {}: {}", item.name, e.message),
            }
        }
    }
}
