//! Upper bound on the minimum distance from lifts of the latent kernel, with
//! an exhaustive scan over combinations of up to three coset generators.
//!
//! cargo run --release --example latent_distance

use qldpc_apm::code::{build, CodeSpec};
use qldpc_apm::latdist::{latent_distance, LatentContext};

fn main() {
    let spec = CodeSpec::reference();
    let pair = build(&spec);
    let ctx = LatentContext::new(&spec, &pair);
    let report = latent_distance(&ctx, 192, 3);
    print!("{report}");
}
