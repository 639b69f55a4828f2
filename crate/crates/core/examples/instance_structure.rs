//! Builds the reference 9216-qubit instance and prints its structural checks.
//!
//! cargo run --release --example instance_structure

use qldpc_apm::code::{build, psi, validate, CodeSpec};
use qldpc_apm::girth::girth;

fn main() {
    let spec = CodeSpec::reference();
    let pair = build(&spec);
    let report = validate(&pair, &spec);
    println!("{report}");
    for r in 0..spec.half() {
        println!("Psi_{r} weight = {}", psi(&spec, r).weight());
    }
    println!("girth = {:?}", girth(&spec));
    println!("all checks pass: {}", report.all_pass());
}
