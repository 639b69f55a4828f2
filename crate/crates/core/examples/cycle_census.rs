//! Counts 4-, 6- and 8-cycles of both Tanner graphs and reports the girth.
//!
//! cargo run --release --example cycle_census

use qldpc_apm::code::CodeSpec;
use qldpc_apm::girth::{census, girth};

fn main() {
    let spec = CodeSpec::reference();
    print!("{}", census(&spec, &[4, 6, 8]));
    println!("girth = {:?}", girth(&spec));
}
