//! Depolarizing-channel Monte Carlo: frame sampling, FER points with Wilson
//! intervals, and CSV output.
//!
//! Frame `i` of a run with master seed `s` draws from Xoshiro256++ seeded with
//! `SHA-256(le64(s) || le64(i))` (label [`FRAME_RNG`]), so results do not depend
//! on scheduling or worker count.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::code::Side;
use crate::decoder::{Classifier, Decoder, Status};
use crate::gf2::BinVector;

/// Versioned name of the per-frame generator derivation.
pub const FRAME_RNG: &str = "frame-rng-v1";

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Frames decoded between stop-rule checks.
const BATCH: u64 = 256;

/// Pauli error on `n` qubits: qubit `q` carries I, X, Y, Z as
/// `(x_q, z_q)` = (0,0), (1,0), (1,1), (0,1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameError {
    pub x: BinVector,
    pub z: BinVector,
}

impl FrameError {
    pub fn weight(&self) -> usize {
        let mut both = self.x.clone();
        for q in self.z.support() {
            both.set(q, true);
        }
        both.weight()
    }
}

/// Generator for frame `frame` of a run seeded with `master`.
pub fn frame_rng(master: u64, frame: u64) -> Xoshiro256PlusPlus {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(frame.to_le_bytes());
    Xoshiro256PlusPlus::from_seed(h.finalize().into())
}

/// I.i.d. depolarizing noise: each of X, Y, Z with probability `p/3`.
pub fn sample_frame<R: Rng + ?Sized>(p: f64, n: usize, rng: &mut R) -> FrameError {
    let mut x = BinVector::zeros(n);
    let mut z = BinVector::zeros(n);
    for q in 0..n {
        let u: f64 = rng.random();
        if u < p {
            match ((3.0 * u / p) as usize).min(2) {
                0 => x.set(q, true),
                1 => {
                    x.set(q, true);
                    z.set(q, true);
                }
                _ => z.set(q, true),
            }
        }
    }
    FrameError { x, z }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let ph = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (ph + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (ph * (1.0 - ph) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Depolarizing hashing rate `1 - H2(p) - p log2 3`.
pub fn hashing_bound(p: f64) -> f64 {
    1.0 - h2(p) - p * 3f64.log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopRule {
    pub min_error_events: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_error_events: 50,
            max_frames: 10_000_000,
        }
    }
}

/// Frames per decoding status.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StatusCounts {
    pub exact: u64,
    pub degenerate: u64,
    pub logical: u64,
    pub detected: u64,
}

impl StatusCounts {
    pub fn add(&mut self, s: Status) {
        match s {
            Status::ConvergedExact => self.exact += 1,
            Status::ConvergedDegenerate => self.degenerate += 1,
            Status::LogicalFailure => self.logical += 1,
            Status::DetectedFailure => self.detected += 1,
        }
    }

    pub fn errors(&self) -> u64 {
        self.logical + self.detected
    }

    pub fn total(&self) -> u64 {
        self.exact + self.degenerate + self.logical + self.detected
    }
}

/// One row of the FER table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FerPoint {
    pub p: f64,
    pub frames: u64,
    pub events: u64,
    pub fer: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub config_digest: String,
    #[serde(skip)]
    pub statuses: StatusCounts,
}

impl FerPoint {
    pub fn new(p: f64, statuses: StatusCounts, seed: u64, config_digest: String) -> Self {
        let frames = statuses.total();
        let events = statuses.errors();
        let (ci_low, ci_high) = wilson(events, frames, Z95);
        Self {
            p,
            frames,
            events,
            fer: if frames == 0 {
                0.0
            } else {
                events as f64 / frames as f64
            },
            ci_low,
            ci_high,
            seed,
            config_digest,
            statuses,
        }
    }
}

/// Decode one sampled frame and classify it.
pub fn simulate_frame(decoder: &Decoder, classifier: &Classifier, p: f64, seed: u64, frame: u64) -> Status {
    let n = decoder.graph(Side::X).num_vars();
    let e = sample_frame(p, n, &mut frame_rng(seed, frame));
    let (sx, sz) = decoder.syndromes(&e.x, &e.z);
    let out = decoder.decode_frame(&sx, &sz, p);
    classifier.classify(&e.x, &e.z, &out)
}

/// Simulate frames `0, 1, 2, ...` until `stop` is met. The stopping frame is
/// the first one at which either limit is reached, in frame order.
pub fn run_point(
    decoder: &Decoder,
    classifier: &Classifier,
    p: f64,
    stop: StopRule,
    seed: u64,
    workers: usize,
) -> FerPoint {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    let mut counts = StatusCounts::default();
    let mut next = 0u64;
    'outer: while next < stop.max_frames {
        let end = (next + BATCH).min(stop.max_frames);
        let statuses: Vec<Status> = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map(|i| simulate_frame(decoder, classifier, p, seed, i))
                .collect()
        });
        for s in statuses {
            counts.add(s);
            if counts.errors() >= stop.min_error_events {
                break 'outer;
            }
        }
        next = end;
    }
    log::info!("p={p} frames={} events={}", counts.total(), counts.errors());
    FerPoint::new(p, counts, seed, decoder.cfg.digest())
}

pub const CSV_HEADER: &str = "p,frames,events,fer,ci_low,ci_high,seed,config_digest";

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("missing or unexpected header")]
    Header,
    #[error("line {line}: {msg}")]
    Row { line: usize, msg: String },
}

pub fn csv_row(pt: &FerPoint) -> String {
    format!(
        "{},{},{},{:e},{:e},{:e},{},{}",
        pt.p, pt.frames, pt.events, pt.fer, pt.ci_low, pt.ci_high, pt.seed, pt.config_digest
    )
}

pub fn write_csv(points: &[FerPoint]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for pt in points {
        let _ = writeln!(s, "{}", csv_row(pt));
    }
    s
}

pub fn read_csv(text: &str) -> Result<Vec<FerPoint>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(CsvError::Header),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| CsvError::Row { line: i + 1, msg };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(err(format!("expected 8 fields, got {}", f.len())));
        }
        let num = |k: usize| f[k].parse::<f64>().map_err(|e| err(format!("field {k}: {e}")));
        let int = |k: usize| f[k].parse::<u64>().map_err(|e| err(format!("field {k}: {e}")));
        let mut pt = FerPoint {
            p: num(0)?,
            frames: int(1)?,
            events: int(2)?,
            fer: num(3)?,
            ci_low: num(4)?,
            ci_high: num(5)?,
            seed: int(6)?,
            config_digest: f[7].to_string(),
            statuses: StatusCounts::default(),
        };
        if pt.events > pt.frames {
            return Err(err("events exceed frames".into()));
        }
        pt.statuses.detected = pt.events;
        pt.statuses.exact = pt.frames - pt.events;
        out.push(pt);
    }
    Ok(out)
}
