//! Enumerates the elementary (a,2) trapping sets of both sides and checks
//! each entry against the raw adjacency.
//!
//! cargo run --release --example trapping_sets

use qldpc_apm::code::{CodeSpec, Side};
use qldpc_apm::ets::{build_full_library, count, verify_library, Pattern};

fn main() {
    let spec = CodeSpec::reference();
    let library = build_full_library(&spec, &Pattern::ALL);
    for pattern in Pattern::ALL {
        println!(
            "{pattern}: X {}, Z {}",
            count(&library, Side::X, pattern),
            count(&library, Side::Z, pattern)
        );
    }
    match verify_library(&spec, &library) {
        Ok(()) => println!("{} entries verified", library.len()),
        Err(e) => println!("verification failed: {e}"),
    }
    if let Some(e) = library.first() {
        println!(
            "first entry: {} {} V = {:?}, odd checks {:?}",
            e.side, e.pattern, e.variables, e.odd
        );
    }
}
