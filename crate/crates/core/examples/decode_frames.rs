//! Decodes a few random depolarizing frames and planted trapping-set errors,
//! printing the per-frame outcome.
//!
//! cargo run --release --example decode_frames -- [p] [frames]

use qldpc_apm::code::{build, CodeSpec, Side};
use qldpc_apm::decoder::{Classifier, Decoder, DecoderConfig};
use qldpc_apm::ets::{build_full_library, Pattern};
use qldpc_apm::gf2::BinVector;
use qldpc_apm::simulator::{frame_rng, sample_frame};

fn main() {
    let mut args = std::env::args().skip(1);
    let p: f64 = args.next().map_or(0.03, |s| s.parse().expect("p"));
    let frames: u64 = args.next().map_or(5, |s| s.parse().expect("frames"));
    let spec = CodeSpec::reference();
    let pair = build(&spec);
    let library = build_full_library(&spec, &Pattern::ALL);
    let decoder = Decoder::new(&pair, DecoderConfig::default()).with_library(library.clone());
    let classifier = Classifier::new(&pair);

    for frame in 0..frames {
        let mut rng = frame_rng(7, frame);
        let e = sample_frame(p, spec.n(), &mut rng);
        let (sx, sz) = decoder.syndromes(&e.x, &e.z);
        let out = decoder.decode_frame(&sx, &sz, p);
        let status = classifier.classify(&e.x, &e.z, &out);
        println!(
            "frame {frame}: weight {}, {} iterations, {} post-processing steps, {status:?}",
            e.weight(),
            out.iterations_used,
            out.pp_actions.len()
        );
    }

    // An X error on the variables of a trapping set seen by H_Z.
    let entry = library.iter().find(|e| e.side == Side::Z).expect("Z-side entry");
    let x = BinVector::from_support(spec.n(), &entry.variables);
    let z = BinVector::zeros(spec.n());
    let (sx, sz) = decoder.syndromes(&x, &z);
    let out = decoder.decode_frame(&sx, &sz, 0.01);
    println!(
        "planted {} on {:?}: {:?}, actions {:?}",
        entry.pattern,
        entry.variables,
        classifier.classify(&x, &z, &out),
        out.pp_actions.iter().map(|a| a.method).collect::<Vec<_>>()
    );
}
