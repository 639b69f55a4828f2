//! Population-dynamics BP threshold of the (3,12)-regular ensemble.
//!
//! cargo run --release --example density_evolution -- [joint|binary|bsc] [N]

use qldpc_apm::deval::{threshold, DeConfig, DeModel};

fn main() {
    let mut args = std::env::args().skip(1);
    let model = match args.next().as_deref() {
        Some("binary") => DeModel::Binary,
        Some("bsc") => DeModel::Bsc,
        _ => DeModel::Joint,
    };
    let population = args.next().map_or(100_000, |s| s.parse().expect("population size"));
    let cfg = DeConfig {
        model,
        population,
        bracket: if model == DeModel::Bsc {
            [0.01, 0.06]
        } else {
            [0.03, 0.08]
        },
        ..DeConfig::default()
    };
    let t = std::time::Instant::now();
    match threshold(&cfg) {
        Ok(r) => println!("{r}\n({:?})", t.elapsed()),
        Err(e) => eprintln!("{e}"),
    }
}
