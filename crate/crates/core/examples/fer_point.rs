//! Monte Carlo FER of the reference instance at one or more depolarizing
//! probabilities.
//!
//! cargo run --release --example fer_point -- [binary] 0.08 0.07

use qldpc_apm::code::{build, CodeSpec};
use qldpc_apm::decoder::{Classifier, Decoder, DecoderConfig};
use qldpc_apm::simulator::{hashing_bound, run_point, write_csv, StopRule};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let binary = args.iter().any(|a| a == "binary");
    let ps: Vec<f64> = args
        .iter()
        .filter(|a| *a != "binary")
        .map(|a| a.parse().expect("probability"))
        .collect();
    let ps = if ps.is_empty() { vec![0.08, 0.07] } else { ps };
    let spec = CodeSpec::reference();
    let pair = build(&spec);
    let decoder = Decoder::new(
        &pair,
        if binary {
            DecoderConfig::binary()
        } else {
            DecoderConfig::default()
        },
    );
    let classifier = Classifier::new(&pair);
    let stop = StopRule {
        min_error_events: 50,
        max_frames: 200,
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut points = Vec::new();
    for &p in &ps {
        let t = std::time::Instant::now();
        let pt = run_point(&decoder, &classifier, p, stop, 1, workers);
        eprintln!(
            "p={p}: {} frames, {} events, {:?} (exact {}, degenerate {}, logical {}, detected {}), hashing rate {:.4}",
            pt.frames,
            pt.events,
            t.elapsed(),
            pt.statuses.exact,
            pt.statuses.degenerate,
            pt.statuses.logical,
            pt.statuses.detected,
            hashing_bound(p),
        );
        points.push(pt);
    }
    print!("{}", write_csv(&points));
}
