//! Population-dynamics density evolution for regular (J, L) ensembles under
//! the all-zero (error-translated) formulation.
//!
//! Three message models are provided: a plain BSC, the binary marginal of the
//! depolarizing channel (flip probability 2p/3 per component), and joint
//! depolarizing messages where the X and Z components of a qubit exchange
//! their beliefs at the variable node, as for a random non-orthogonal pair of
//! (J, L)-regular check matrices.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeModel {
    /// Binary symmetric channel with flip probability `p`.
    Bsc,
    /// One component of depolarizing noise `p`: BSC(2p/3).
    Binary,
    /// Both components of depolarizing noise `p`, coupled at the qubit.
    Joint,
}

impl fmt::Display for DeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeModel::Bsc => "bsc",
            DeModel::Binary => "binary",
            DeModel::Joint => "joint",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeConfig {
    pub j: usize,
    pub l: usize,
    pub model: DeModel,
    pub population: usize,
    pub iterations: usize,
    pub epsilon: f64,
    pub clip: f64,
    pub bracket: [f64; 2],
    pub resolution: f64,
    pub seed: u64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            j: 3,
            l: 12,
            model: DeModel::Joint,
            population: 100_000,
            iterations: 500,
            epsilon: 1e-5,
            clip: 40.0,
            bracket: [0.03, 0.08],
            resolution: 5e-4,
            seed: 1,
        }
    }
}

impl DeConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serialises")
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DeError {
    #[error("bracket [{lo}, {hi}] does not separate convergence from failure ({behaviour} at both ends)")]
    Bracket { lo: f64, hi: f64, behaviour: &'static str },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Variable-to-check message samples. `z` is empty except for the joint model.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub iteration: usize,
}

/// Qubit error probabilities indexed by `2 * x + z`.
fn pauli_probs(p: f64) -> [f64; 4] {
    [1.0 - p, p / 3.0, p / 3.0, p / 3.0]
}

fn chunk_rng(seed: u64, iteration: usize, stream: u64, chunk: usize) -> Xoshiro256PlusPlus {
    let mut h = Sha256::new();
    h.update(b"de-rng-v1");
    h.update(seed.to_le_bytes());
    h.update((iteration as u64).to_le_bytes());
    h.update(stream.to_le_bytes());
    h.update((chunk as u64).to_le_bytes());
    Xoshiro256PlusPlus::from_seed(h.finalize().into())
}

fn bsc_llr<R: Rng>(q: f64, clip: f64, rng: &mut R) -> f64 {
    let l = ((1.0 - q) / q).ln().min(clip);
    if rng.random::<f64>() < q {
        -l
    } else {
        l
    }
}

fn flip_probability(model: DeModel, p: f64) -> f64 {
    match model {
        DeModel::Bsc => p,
        DeModel::Binary | DeModel::Joint => 2.0 * p / 3.0,
    }
}

/// Channel-only population (iteration 0).
pub fn initial_population(cfg: &DeConfig, p: f64) -> Population {
    let q = flip_probability(cfg.model, p);
    let fill = |stream: u64| -> Vec<f64> {
        let mut v = vec![0.0; cfg.population];
        v.par_chunks_mut(CHUNK).enumerate().for_each(|(c, out)| {
            let mut rng = chunk_rng(cfg.seed, 0, stream, c);
            for m in out {
                *m = bsc_llr(q, cfg.clip, &mut rng);
            }
        });
        v
    };
    Population {
        x: fill(0),
        z: if cfg.model == DeModel::Joint {
            fill(1)
        } else {
            Vec::new()
        },
        iteration: 0,
    }
}

fn check_message<R: Rng>(pop: &[f64], deg: usize, clip: f64, rng: &mut R) -> f64 {
    let mut prod = 1.0;
    for _ in 0..deg {
        prod *= (pop[rng.random_range(0..pop.len())] * 0.5).tanh();
    }
    let lim = 1.0 - 1e-16;
    (2.0 * prod.clamp(-lim, lim).atanh()).clamp(-clip, clip)
}

/// LLR of one component given the other's total belief `other`, relative to
/// the sampled qubit error `e` (all-zero formulation).
fn joint_channel(probs: &[f64; 4], e: usize, own_is_x: bool, other: f64, clip: f64) -> f64 {
    // w(a, b) = P(error (a, b) ⊕ e), with a the own component
    let w = |a: usize, b: usize| {
        let (x, z) = if own_is_x { (a, b) } else { (b, a) };
        probs[(2 * x + z) ^ e]
    };
    let r = (-other).exp();
    let num = w(0, 0) + w(0, 1) * r;
    let den = w(1, 0) + w(1, 1) * r;
    (num / den).ln().clamp(-clip, clip)
}

/// One round: check messages from `L-1` samples, then variable messages from
/// the channel and `J-1` check messages.
pub fn de_iterate(pop: &Population, cfg: &DeConfig, p: f64) -> Population {
    let it = pop.iteration + 1;
    let (j, l, clip, seed) = (cfg.j, cfg.l, cfg.clip, cfg.seed);
    let checks = |src: &[f64], stream: u64| -> Vec<f64> {
        let mut out = vec![0.0; src.len()];
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, o)| {
            let mut rng = chunk_rng(seed, it, stream, c);
            for m in o {
                *m = check_message(src, l - 1, clip, &mut rng);
            }
        });
        out
    };
    match cfg.model {
        DeModel::Bsc | DeModel::Binary => {
            let q = flip_probability(cfg.model, p);
            let cx = checks(&pop.x, 0);
            let mut x = vec![0.0; pop.x.len()];
            x.par_chunks_mut(CHUNK).enumerate().for_each(|(c, o)| {
                let mut rng = chunk_rng(seed, it, 2, c);
                for m in o {
                    let mut s = bsc_llr(q, clip, &mut rng);
                    for _ in 0..j - 1 {
                        s += cx[rng.random_range(0..cx.len())];
                    }
                    *m = s.clamp(-clip, clip);
                }
            });
            Population {
                x,
                z: Vec::new(),
                iteration: it,
            }
        }
        DeModel::Joint => {
            let probs = pauli_probs(p);
            let cx = checks(&pop.x, 0);
            let cz = checks(&pop.z, 1);
            let var = |own: &[f64], other: &[f64], own_is_x: bool, stream: u64| -> Vec<f64> {
                let mut out = vec![0.0; own.len()];
                out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, o)| {
                    let mut rng = chunk_rng(seed, it, stream, c);
                    for m in o {
                        let e = sample_pauli(&probs, &mut rng);
                        let mut ext = 0.0;
                        for _ in 0..j - 1 {
                            ext += own[rng.random_range(0..own.len())];
                        }
                        let mut tot = 0.0;
                        for _ in 0..j {
                            tot += other[rng.random_range(0..other.len())];
                        }
                        *m = (ext + joint_channel(&probs, e, own_is_x, tot, clip)).clamp(-clip, clip);
                    }
                });
                out
            };
            Population {
                x: var(&cx, &cz, true, 2),
                z: var(&cz, &cx, false, 3),
                iteration: it,
            }
        }
    }
}

fn sample_pauli<R: Rng>(probs: &[f64; 4], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &pk) in probs.iter().enumerate() {
        acc += pk;
        if u < acc {
            return k;
        }
    }
    3
}

/// Fraction of negative messages (ties count half), worst component.
pub fn error_proxy(pop: &Population) -> f64 {
    let frac = |v: &[f64]| {
        if v.is_empty() {
            return 0.0;
        }
        let s: f64 = v
            .iter()
            .map(|&m| {
                if m < 0.0 {
                    1.0
                } else if m == 0.0 {
                    0.5
                } else {
                    0.0
                }
            })
            .sum();
        s / v.len() as f64
    };
    frac(&pop.x).max(frac(&pop.z))
}

/// Error proxy per iteration for one channel parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub p: f64,
    pub proxy: Vec<f64>,
    pub converged: bool,
}

impl Trajectory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,error_proxy\n");
        for (i, e) in self.proxy.iter().enumerate() {
            s.push_str(&format!("{i},{e:e}\n"));
        }
        s
    }
}

/// Run up to `cfg.iterations` rounds; converged when the proxy drops below
/// `cfg.epsilon`.
pub fn run(cfg: &DeConfig, p: f64) -> Trajectory {
    let mut pop = initial_population(cfg, p);
    let mut proxy = vec![error_proxy(&pop)];
    let mut converged = proxy[0] < cfg.epsilon;
    while !converged && pop.iteration < cfg.iterations {
        pop = de_iterate(&pop, cfg, p);
        let e = error_proxy(&pop);
        proxy.push(e);
        converged = e < cfg.epsilon;
    }
    Trajectory { p, proxy, converged }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub p_star: f64,
    /// Bracket after each bisection step, starting with the input bracket.
    pub history: Vec<[f64; 2]>,
    pub model: DeModel,
    pub j: usize,
    pub l: usize,
    pub population: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl fmt::Display for ThresholdReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "({}, {}) {} model, N = {}, T = {}, seed {}",
            self.j, self.l, self.model, self.population, self.iterations, self.seed
        )?;
        for (i, [lo, hi]) in self.history.iter().enumerate() {
            writeln!(f, "  step {i:2}: [{lo:.6}, {hi:.6}]")?;
        }
        write!(f, "threshold p* = {:.5}", self.p_star)
    }
}

/// Bisection on convergence between the bracket ends.
pub fn threshold(cfg: &DeConfig) -> Result<ThresholdReport, DeError> {
    let [mut lo, mut hi] = cfg.bracket;
    if cfg.j < 2 || cfg.l < 2 || cfg.population == 0 || lo.is_nan() || hi.is_nan() || lo >= hi || cfg.resolution <= 0.0
    {
        return Err(DeError::Config(format!(
            "need J, L >= 2, N > 0, lo < hi and positive resolution (got J={}, L={}, N={}, [{lo}, {hi}])",
            cfg.j, cfg.l, cfg.population
        )));
    }
    let c_lo = run(cfg, lo).converged;
    let c_hi = run(cfg, hi).converged;
    if c_lo == c_hi {
        return Err(DeError::Bracket {
            lo,
            hi,
            behaviour: if c_lo { "convergence" } else { "failure" },
        });
    }
    if !c_lo {
        return Err(DeError::Bracket {
            lo,
            hi,
            behaviour: "failure below, convergence above",
        });
    }
    let mut history = vec![[lo, hi]];
    while hi - lo > cfg.resolution {
        let mid = 0.5 * (lo + hi);
        if run(cfg, mid).converged {
            lo = mid;
        } else {
            hi = mid;
        }
        history.push([lo, hi]);
        log::debug!("bracket [{lo}, {hi}]");
    }
    Ok(ThresholdReport {
        p_star: 0.5 * (lo + hi),
        history,
        model: cfg.model,
        j: cfg.j,
        l: cfg.l,
        population: cfg.population,
        iterations: cfg.iterations,
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(model: DeModel, j: usize, l: usize) -> DeConfig {
        DeConfig {
            j,
            l,
            model,
            population: 20_000,
            iterations: 200,
            ..DeConfig::default()
        }
    }

    #[test]
    fn zero_noise_saturates() {
        for model in [DeModel::Bsc, DeModel::Binary, DeModel::Joint] {
            let cfg = small(model, 3, 12);
            let pop = initial_population(&cfg, 0.0);
            assert!(pop.x.iter().all(|&m| m == cfg.clip));
            let next = de_iterate(&pop, &cfg, 0.0);
            assert!(next.x.iter().chain(&next.z).all(|&m| m == cfg.clip));
            assert_eq!(error_proxy(&next), 0.0);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = small(DeModel::Joint, 3, 12);
        let a = de_iterate(&initial_population(&cfg, 0.05), &cfg, 0.05);
        let b = de_iterate(&initial_population(&cfg, 0.05), &cfg, 0.05);
        assert_eq!(a, b);
        let other = DeConfig { seed: 2, ..cfg.clone() };
        assert_ne!(a, de_iterate(&initial_population(&other, 0.05), &other, 0.05));
    }

    #[test]
    fn joint_channel_reduces_to_marginal_without_other_information() {
        let probs = pauli_probs(0.06);
        let q: f64 = 0.04;
        let marginal = ((1.0 - q) / q).ln();
        assert!((joint_channel(&probs, 0, true, 0.0, 40.0) - marginal).abs() < 1e-12);
        assert!((joint_channel(&probs, 2, true, 0.0, 40.0) + marginal).abs() < 1e-12);
        // Knowing the other component is clean makes this one more reliable.
        assert!(joint_channel(&probs, 0, true, 30.0, 40.0) > marginal);
    }

    #[test]
    fn symmetry_condition_holds_empirically() {
        // For a symmetric density, E[exp(-m)] = 1.
        let cfg = small(DeModel::Binary, 3, 12);
        let mut pop = initial_population(&cfg, 0.07);
        for _ in 0..3 {
            pop = de_iterate(&pop, &cfg, 0.07);
        }
        let mean: f64 = pop.x.iter().map(|&m| (-m).exp()).sum::<f64>() / pop.x.len() as f64;
        assert!((mean - 1.0).abs() < 0.1, "{mean}");
    }

    #[test]
    fn below_and_above_threshold() {
        let cfg = small(DeModel::Binary, 3, 12);
        let t = run(&cfg, 0.03);
        assert!(t.converged);
        assert!(*t.proxy.last().unwrap() < 1e-4);
        let t = run(&cfg, 0.08);
        assert!(!t.converged);
        assert!(*t.proxy.last().unwrap() > 1e-2);
        for w in t.proxy.windows(2).skip(1) {
            assert!(w[1] <= w[0] + 0.01);
        }
    }

    #[test]
    fn degenerate_bracket_is_rejected() {
        let cfg = DeConfig {
            bracket: [0.0, 0.001],
            ..small(DeModel::Binary, 3, 12)
        };
        assert!(matches!(threshold(&cfg), Err(DeError::Bracket { .. })));
        let cfg = DeConfig {
            bracket: [0.05, 0.01],
            ..small(DeModel::Binary, 3, 12)
        };
        assert!(matches!(threshold(&cfg), Err(DeError::Config(_))));
    }

    #[test]
    fn classical_three_six_control() {
        let cfg = DeConfig {
            bracket: [0.06, 0.11],
            resolution: 2e-3,
            ..small(DeModel::Bsc, 3, 6)
        };
        let r = threshold(&cfg).unwrap();
        assert!((r.p_star - 0.084).abs() < 0.004, "{r}");
    }

    #[test]
    fn config_round_trip() {
        let cfg = DeConfig::default();
        assert_eq!(DeConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        assert!(DeConfig::from_toml("model = \"quaternary\"").is_err());
    }
}
