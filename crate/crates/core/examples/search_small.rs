//! Randomized search for a small code with one forced non-commuting pair,
//! followed by validation of the result.
//!
//! cargo run --release --example search_small -- [seed]

use qldpc_apm::code::{build, validate};
use qldpc_apm::girth::girth;
use qldpc_apm::search::{construct, CommutationTable, SearchConfig};

fn main() {
    let seed = std::env::args().nth(1).map_or(11, |s| s.parse().expect("seed"));
    let table = CommutationTable::from_active(&[0, 1], 4, &[(0, 2)]).unwrap();
    let cfg = SearchConfig::new(60, 2, 8, 6, table, seed);
    let out = match construct(&cfg) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("search failed: {e}");
            std::process::exit(1);
        }
    };
    for (k, (f, g)) in out.spec.f().iter().zip(out.spec.g()).enumerate() {
        println!("f_{k} = {f}, g_{k} = {g}");
    }
    print!("{}", out.log);
    let report = validate(&build(&out.spec), &out.spec);
    println!("n = {}, k = {}, girth = {:?}", report.n, report.k, girth(&out.spec));
    println!("validation passes: {}", report.all_pass());
}
