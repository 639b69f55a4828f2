//! Syndrome belief propagation over the X and Z error components, either
//! independently or with per-qubit coupling, with stall detection and local
//! post-processing (trapping-set lookup, flip history, reliability-ordered
//! solve).
//!
//! An X error is seen by the Z checks, so the X component is decoded on `H_Z`
//! and the Z component on `H_X`. The decoder's `Side` always names the error
//! component; [`check_side`] gives the matrix it is decoded on.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::code::{CssPair, Side};
use crate::ets::{index_by_odd_pair, OddPairIndex, TrappingSetEntry};
use crate::gf2::{Adjacency, BinMatrix, BinVector, RowSpace, Solution};

/// Magnitude bound on every LLR the decoder stores.
pub const LLR_CLIP: f64 = 40.0;
const TANH_CLIP: f64 = 1.0 - 1e-15;

/// Parity-check side used to decode an error component.
pub fn check_side(error: Side) -> Side {
    error.other()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PpMethod {
    Ets,
    Fhd,
    Osd,
}

impl fmt::Display for PpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PpMethod::Ets => "ets",
            PpMethod::Fhd => "fhd",
            PpMethod::Osd => "osd",
        })
    }
}

/// Whether the two error components are decoded independently or with
/// their beliefs coupled at each qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BpMode {
    Binary,
    #[default]
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderConfig {
    pub bp_mode: BpMode,
    pub max_iter: usize,
    /// Iterations with an unchanged unsatisfied count that count as a stall.
    pub stall_window: usize,
    /// Window over which periodic unsatisfied counts count as a stall.
    pub oscillation_window: usize,
    pub max_period: usize,
    pub pp_trigger_max_unsat: usize,
    pub weight_threshold: usize,
    #[serde(rename = "K_max")]
    pub k_max: usize,
    pub flip_cap: usize,
    pub pp_order: Vec<PpMethod>,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            bp_mode: BpMode::Joint,
            max_iter: 100,
            stall_window: 10,
            oscillation_window: 12,
            max_period: 4,
            pp_trigger_max_unsat: 20,
            weight_threshold: 20,
            k_max: 64,
            flip_cap: 128,
            pp_order: vec![PpMethod::Ets, PpMethod::Fhd, PpMethod::Osd],
        }
    }
}

impl DecoderConfig {
    /// Plain BP, no post-processing.
    pub fn bp_only() -> Self {
        Self {
            pp_order: Vec::new(),
            ..Self::default()
        }
    }

    /// Default settings with the two components decoded independently.
    pub fn binary() -> Self {
        Self {
            bp_mode: BpMode::Binary,
            ..Self::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serialises")
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_toml().as_bytes());
        hash[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Tanner graph of one check matrix with edges stored check-major.
#[derive(Debug, Clone)]
pub struct SideGraph {
    pub error_side: Side,
    pub adj: Adjacency,
    check_start: Vec<usize>,
    edge_var: Vec<u32>,
    var_edges: Vec<Vec<u32>>,
}

impl SideGraph {
    pub fn new(error_side: Side, h: &BinMatrix) -> Self {
        let adj = Adjacency::from_matrix(h);
        let mut check_start = Vec::with_capacity(adj.num_checks() + 1);
        let mut edge_var = Vec::with_capacity(adj.num_edges());
        let mut var_edges = vec![Vec::new(); adj.num_vars()];
        check_start.push(0);
        for vars in &adj.check_vars {
            for &v in vars {
                var_edges[v as usize].push(edge_var.len() as u32);
                edge_var.push(v);
            }
            check_start.push(edge_var.len());
        }
        Self {
            error_side,
            adj,
            check_start,
            edge_var,
            var_edges,
        }
    }

    pub fn num_checks(&self) -> usize {
        self.adj.num_checks()
    }

    pub fn num_vars(&self) -> usize {
        self.adj.num_vars()
    }

    /// `s ⊕ H e`.
    pub fn residual(&self, syndrome: &BinVector, estimate: &BinVector) -> BinVector {
        syndrome.xor(&self.adj.syndrome(estimate))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    Converged,
    Stalled,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct BpState {
    pub side: Side,
    pub syndrome: BinVector,
    pub llr_prior: Vec<f64>,
    /// Check-to-variable messages, check-major edge order.
    pub c2v: Vec<f64>,
    /// Variable-to-check messages, check-major edge order.
    pub v2c: Vec<f64>,
    pub posterior: Vec<f64>,
    pub hard_decision: BinVector,
    /// Variables whose hard decision changed at least once.
    pub flip_set: BTreeSet<usize>,
    pub unsat_count: usize,
    /// Unsatisfied count after each iteration, starting at iteration 0.
    pub unsat_history: Vec<usize>,
    pub iteration: usize,
    pub stop: StopReason,
}

/// Stall test on the unsatisfied-count history.
pub fn is_stalled(history: &[usize], cfg: &DecoderConfig) -> bool {
    let n = history.len();
    let w = cfg.stall_window;
    if w > 0 && n > w && history[n - w - 1..].iter().all(|&u| u == history[n - 1]) {
        return true;
    }
    let w = cfg.oscillation_window;
    if w == 0 || n < w {
        return false;
    }
    let win = &history[n - w..];
    (2..=cfg.max_period.min(w / 2)).any(|d| (d..w).all(|k| win[k] == win[k - d]))
}

/// Flip probability of one binary component under depolarizing noise `p`.
pub fn marginal_flip(p: f64) -> f64 {
    2.0 * p / 3.0
}

fn prior_llr(q: f64) -> f64 {
    ((1.0 - q) / q).ln().clamp(-LLR_CLIP, LLR_CLIP)
}

/// Message state of one Tanner graph during decoding.
struct Run<'a> {
    graph: &'a SideGraph,
    signs: Vec<f64>,
    st: BpState,
    fwd: Vec<f64>,
    /// Lowest-unsat iterate so far: count, hard decision, posterior.
    best: Option<(usize, BinVector, Vec<f64>)>,
}

impl<'a> Run<'a> {
    fn new(graph: &'a SideGraph, syndrome: &BinVector, prior: f64) -> Self {
        assert_eq!(syndrome.len(), graph.num_checks(), "syndrome length");
        let n = graph.num_vars();
        let w = syndrome.weight();
        Self {
            graph,
            signs: (0..graph.num_checks())
                .map(|c| if syndrome.get(c) { -1.0 } else { 1.0 })
                .collect(),
            st: BpState {
                side: graph.error_side,
                syndrome: syndrome.clone(),
                llr_prior: vec![prior; n],
                c2v: vec![0.0; graph.edge_var.len()],
                v2c: vec![prior; graph.edge_var.len()],
                posterior: vec![prior; n],
                hard_decision: BinVector::zeros(n),
                flip_set: BTreeSet::new(),
                unsat_count: w,
                unsat_history: vec![w],
                iteration: 0,
                stop: if w == 0 {
                    StopReason::Converged
                } else {
                    StopReason::MaxIter
                },
            },
            fwd: Vec::new(),
            best: Some((w, BinVector::zeros(n), vec![prior; n])),
        }
    }

    fn check_pass(&mut self) {
        let g = self.graph;
        let st = &mut self.st;
        for c in 0..g.num_checks() {
            let (lo, hi) = (g.check_start[c], g.check_start[c + 1]);
            self.fwd.clear();
            let mut acc = 1.0;
            for e in lo..hi {
                self.fwd.push(acc);
                acc *= (st.v2c[e] * 0.5).tanh();
            }
            let mut back = 1.0;
            for k in (0..hi - lo).rev() {
                let e = lo + k;
                let prod = (self.signs[c] * self.fwd[k] * back).clamp(-TANH_CLIP, TANH_CLIP);
                st.c2v[e] = (2.0 * prod.atanh()).clamp(-LLR_CLIP, LLR_CLIP);
                back *= (st.v2c[e] * 0.5).tanh();
            }
        }
    }

    /// Sum of check-to-variable messages into `v`.
    fn incoming(&self, v: usize) -> f64 {
        self.graph.var_edges[v].iter().map(|&e| self.st.c2v[e as usize]).sum()
    }

    fn var_pass(&mut self) {
        let g = self.graph;
        let st = &mut self.st;
        for v in 0..g.num_vars() {
            let edges = &g.var_edges[v];
            let total = st.llr_prior[v] + edges.iter().map(|&e| st.c2v[e as usize]).sum::<f64>();
            st.posterior[v] = total;
            for &e in edges {
                st.v2c[e as usize] = (total - st.c2v[e as usize]).clamp(-LLR_CLIP, LLR_CLIP);
            }
            let bit = total < 0.0;
            if bit != st.hard_decision.get(v) {
                st.hard_decision.set(v, bit);
                st.flip_set.insert(v);
            }
        }
    }

    fn record(&mut self, t: usize) -> usize {
        let g = self.graph;
        let st = &mut self.st;
        let unsat = (0..g.num_checks())
            .filter(|&c| {
                let mut par = st.syndrome.get(c);
                for &v in &g.edge_var[g.check_start[c]..g.check_start[c + 1]] {
                    par ^= st.hard_decision.get(v as usize);
                }
                par
            })
            .count();
        st.unsat_count = unsat;
        st.unsat_history.push(unsat);
        st.iteration = t;
        if self.best.as_ref().is_none_or(|b| unsat < b.0) {
            self.best = Some((unsat, st.hard_decision.clone(), st.posterior.clone()));
        }
        unsat
    }

    /// Falls back to the lowest-unsat iterate so that slow oscillations end
    /// on their best hard decision.
    fn finish(mut self, stop: StopReason) -> BpState {
        self.st.stop = stop;
        if stop != StopReason::Converged {
            if let Some((unsat, hard, post)) = self.best.take() {
                if unsat < self.st.unsat_count {
                    self.st.unsat_count = unsat;
                    self.st.hard_decision = hard;
                    self.st.posterior = post;
                }
            }
        }
        self.st
    }
}

/// Flooding sum-product decoding of `syndrome` on `graph`.
pub fn bp_decode(graph: &SideGraph, syndrome: &BinVector, p: f64, cfg: &DecoderConfig) -> BpState {
    let mut run = Run::new(graph, syndrome, prior_llr(marginal_flip(p)));
    if run.st.unsat_count == 0 {
        return run.st;
    }
    for t in 1..=cfg.max_iter {
        run.check_pass();
        run.var_pass();
        if run.record(t) == 0 {
            return run.finish(StopReason::Converged);
        }
        if is_stalled(&run.st.unsat_history, cfg) {
            return run.finish(StopReason::Stalled);
        }
    }
    run.finish(StopReason::MaxIter)
}

/// Channel LLR of one component of a qubit given the total belief `other`
/// (an LLR) about its other component, under depolarizing noise `p`.
pub fn coupled_prior(p: f64, other: f64) -> f64 {
    let (w00, w_one) = (1.0 - p, p / 3.0);
    let r = (-other.clamp(-LLR_CLIP, LLR_CLIP)).exp();
    // P(own = 0) = w00 + w01 r, P(own = 1) = w10 + w11 r, with w01 = w10 = w11
    ((w00 + w_one * r) / (w_one + w_one * r))
        .ln()
        .clamp(-LLR_CLIP, LLR_CLIP)
}

/// Sum-product decoding of both components together: each qubit's X and Z
/// beliefs enter the other component's channel term every iteration. Stall
/// and convergence use the combined unsatisfied count.
pub fn bp_decode_joint(
    gx: &SideGraph,
    gz: &SideGraph,
    s_x: &BinVector,
    s_z: &BinVector,
    p: f64,
    cfg: &DecoderConfig,
) -> (BpState, BpState) {
    let prior = prior_llr(marginal_flip(p));
    let mut rx = Run::new(gx, s_x, prior);
    let mut rz = Run::new(gz, s_z, prior);
    let mut combined = vec![rx.st.unsat_count + rz.st.unsat_count];
    if combined[0] == 0 {
        return (rx.st, rz.st);
    }
    let n = gx.num_vars();
    let mut stop = StopReason::MaxIter;
    for t in 1..=cfg.max_iter {
        rx.check_pass();
        rz.check_pass();
        for v in 0..n {
            let (ix, iz) = (rx.incoming(v), rz.incoming(v));
            rx.st.llr_prior[v] = coupled_prior(p, iz);
            rz.st.llr_prior[v] = coupled_prior(p, ix);
        }
        rx.var_pass();
        rz.var_pass();
        let u = rx.record(t) + rz.record(t);
        combined.push(u);
        if u == 0 {
            stop = StopReason::Converged;
            break;
        }
        if is_stalled(&combined, cfg) {
            stop = StopReason::Stalled;
            break;
        }
    }
    let side_stop = |r: &Run| {
        if r.st.unsat_count == 0 {
            StopReason::Converged
        } else {
            stop
        }
    };
    let (sx, sz) = (side_stop(&rx), side_stop(&rz));
    (rx.finish(sx), rz.finish(sz))
}

/// Residual syndrome of a BP state against the pair's matrix for its side.
pub fn residual(pair: &CssPair, state: &BpState) -> BinVector {
    let h = pair.active(check_side(state.side));
    let he = h.mul_vec(&state.hard_decision).expect("state matches pair");
    state.syndrome.xor(&he)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    NotLocal,
    Inconsistent,
    NonUnique,
    Overweight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalSolve {
    /// Full-length correction supported inside the candidate set.
    Accept(BinVector),
    Reject(RejectReason),
}

enum Restricted {
    NotLocal,
    Inconsistent,
    Unique(BinVector),
    Multiple,
}

fn solve_restricted(adj: &Adjacency, r: &BinVector, support: &[usize]) -> Restricted {
    let checks = adj.check_neighbourhood(support);
    let mut inside = 0;
    for c in r.support() {
        if checks.binary_search(&c).is_err() {
            return Restricted::NotLocal;
        }
        inside += 1;
    }
    if inside == 0 {
        return Restricted::Unique(BinVector::zeros(adj.num_vars()));
    }
    let mut sub = BinMatrix::zeros(checks.len(), support.len());
    for (j, &v) in support.iter().enumerate() {
        for &c in &adj.var_checks[v] {
            let i = checks
                .binary_search(&(c as usize))
                .expect("neighbourhood covers column");
            sub.flip(i, j);
        }
    }
    let rhs = BinVector::from_support(
        checks.len(),
        &checks
            .iter()
            .enumerate()
            .filter(|(_, &c)| r.get(c))
            .map(|(i, _)| i)
            .collect::<Vec<_>>(),
    );
    match sub.solve(&rhs).expect("dimensions agree") {
        Solution::Inconsistent => Restricted::Inconsistent,
        Solution::Multiple { .. } => Restricted::Multiple,
        Solution::Unique(d) => {
            let mut full = BinVector::zeros(adj.num_vars());
            for j in d.support() {
                full.set(support[j], true);
            }
            Restricted::Unique(full)
        }
    }
}

/// Solve `H[N(E), E] δ = r[N(E)]` and accept only a unique, light solution
/// when `r` vanishes outside `N(E)`.
pub fn local_solve(adj: &Adjacency, r: &BinVector, support: &[usize], max_weight: usize) -> LocalSolve {
    let mut support = support.to_vec();
    support.sort_unstable();
    support.dedup();
    match solve_restricted(adj, r, &support) {
        Restricted::NotLocal => LocalSolve::Reject(RejectReason::NotLocal),
        Restricted::Inconsistent => LocalSolve::Reject(RejectReason::Inconsistent),
        Restricted::Multiple => LocalSolve::Reject(RejectReason::NonUnique),
        Restricted::Unique(d) if d.weight() > max_weight => LocalSolve::Reject(RejectReason::Overweight),
        Restricted::Unique(d) => LocalSolve::Accept(d),
    }
}

/// One post-processing attempt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PpAction {
    pub side: Side,
    pub method: PpMethod,
    pub support_size: usize,
    pub accepted: bool,
    pub reason: Option<RejectReason>,
}

/// Result of one post-processing method: the correction if any, and what was tried.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PpResult {
    pub correction: Option<BinVector>,
    pub support_size: usize,
    pub reason: Option<RejectReason>,
}

impl PpResult {
    fn from_solve(s: LocalSolve, support_size: usize) -> Self {
        match s {
            LocalSolve::Accept(d) => Self {
                correction: Some(d),
                support_size,
                reason: None,
            },
            LocalSolve::Reject(r) => Self {
                correction: None,
                support_size,
                reason: Some(r),
            },
        }
    }

    fn skipped(support_size: usize, reason: Option<RejectReason>) -> Self {
        Self {
            correction: None,
            support_size,
            reason,
        }
    }
}

/// Trapping-set lookup on a residual with exactly two unsatisfied checks.
pub fn pp_ets(
    graph: &SideGraph,
    r: &BinVector,
    library: &[TrappingSetEntry],
    index: &OddPairIndex,
    max_weight: usize,
) -> PpResult {
    let unsat = r.support();
    if unsat.len() != 2 {
        return PpResult::skipped(0, None);
    }
    let mut last = PpResult::skipped(0, None);
    for &i in index.get(check_side(graph.error_side), unsat[0], unsat[1]) {
        let vars = &library[i].variables;
        last = PpResult::from_solve(local_solve(&graph.adj, r, vars, max_weight), vars.len());
        if last.correction.is_some() {
            break;
        }
    }
    last
}

/// Local solve on the flip history.
pub fn pp_fhd(graph: &SideGraph, state: &BpState, r: &BinVector, cfg: &DecoderConfig) -> PpResult {
    let size = state.flip_set.len();
    if size == 0 {
        return PpResult::skipped(0, None);
    }
    if size > cfg.flip_cap {
        return PpResult::skipped(size, Some(RejectReason::Overweight));
    }
    let support: Vec<usize> = state.flip_set.iter().copied().collect();
    PpResult::from_solve(local_solve(&graph.adj, r, &support, cfg.weight_threshold), size)
}

/// Variables sorted by posterior reliability, least reliable first.
pub fn reliability_order(posterior: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..posterior.len()).collect();
    order.sort_by(|&a, &b| posterior[a].abs().total_cmp(&posterior[b].abs()).then(a.cmp(&b)));
    order
}

/// Local solve on the least reliable variables: smallest solvable prefix,
/// then the largest prefix that still has a unique solution.
pub fn pp_osd(graph: &SideGraph, state: &BpState, r: &BinVector, cfg: &DecoderConfig) -> PpResult {
    let order = reliability_order(&state.posterior);
    let k_max = cfg.k_max.min(order.len());
    if k_max == 0 {
        return PpResult::skipped(0, None);
    }
    let solve = |k: usize| solve_restricted(&graph.adj, r, &order[..k]);
    let solvable = |k: usize| matches!(solve(k), Restricted::Unique(_) | Restricted::Multiple);
    if !solvable(k_max) {
        let reason = match solve(k_max) {
            Restricted::NotLocal => RejectReason::NotLocal,
            _ => RejectReason::Inconsistent,
        };
        return PpResult::skipped(k_max, Some(reason));
    }
    let (mut lo, mut hi) = (1, k_max);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if solvable(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let k_min = lo;
    if !matches!(solve(k_min), Restricted::Unique(_)) {
        return PpResult::skipped(k_min, Some(RejectReason::NonUnique));
    }
    let (mut lo, mut hi) = (k_min, k_max);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if matches!(solve(mid), Restricted::Unique(_)) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    PpResult::from_solve(local_solve(&graph.adj, r, &order[..lo], cfg.weight_threshold), lo)
}

/// Decoding result for one error component.
#[derive(Debug, Clone)]
pub struct SideOutcome {
    pub estimate: BinVector,
    pub iterations: usize,
    pub stop: StopReason,
    /// Unsatisfied checks left after BP and post-processing.
    pub residual_weight: usize,
    pub pp_actions: Vec<PpAction>,
}

#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    pub estimate_x: BinVector,
    pub estimate_z: BinVector,
    pub iterations_used: usize,
    pub pp_actions: Vec<PpAction>,
    pub x: SideOutcome,
    pub z: SideOutcome,
}

impl DecodeOutcome {
    /// Both residual syndromes are zero.
    pub fn syndromes_cleared(&self) -> bool {
        self.x.residual_weight == 0 && self.z.residual_weight == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    ConvergedExact,
    ConvergedDegenerate,
    LogicalFailure,
    DetectedFailure,
}

impl Status {
    /// Counted as a frame error.
    pub fn is_error(self) -> bool {
        matches!(self, Status::LogicalFailure | Status::DetectedFailure)
    }
}

/// Decoder for a fixed pair, shareable across threads.
#[derive(Debug, Clone)]
pub struct Decoder {
    pub cfg: DecoderConfig,
    graphs: [SideGraph; 2],
    library: Vec<TrappingSetEntry>,
    index: OddPairIndex,
}

fn slot(side: Side) -> usize {
    match side {
        Side::X => 0,
        Side::Z => 1,
    }
}

impl Decoder {
    pub fn new(pair: &CssPair, cfg: DecoderConfig) -> Self {
        Self {
            cfg,
            graphs: [
                SideGraph::new(Side::X, pair.active(check_side(Side::X))),
                SideGraph::new(Side::Z, pair.active(check_side(Side::Z))),
            ],
            library: Vec::new(),
            index: OddPairIndex::default(),
        }
    }

    /// Attach a trapping-set library; entries are matched by their check side.
    pub fn with_library(mut self, library: Vec<TrappingSetEntry>) -> Self {
        self.index = index_by_odd_pair(&library);
        self.library = library;
        self
    }

    pub fn library(&self) -> &[TrappingSetEntry] {
        &self.library
    }

    pub fn graph(&self, side: Side) -> &SideGraph {
        &self.graphs[slot(side)]
    }

    pub fn bp(&self, side: Side, syndrome: &BinVector, p: f64) -> BpState {
        bp_decode(self.graph(side), syndrome, p, &self.cfg)
    }

    /// BP on one component followed by post-processing when triggered.
    pub fn decode_side(&self, side: Side, syndrome: &BinVector, p: f64) -> SideOutcome {
        self.post_process(&self.bp(side, syndrome, p))
    }

    /// Apply the post-processing chain to a finished BP state.
    pub fn post_process(&self, state: &BpState) -> SideOutcome {
        let side = state.side;
        let syndrome = &state.syndrome;
        let graph = self.graph(side);
        let mut estimate = state.hard_decision.clone();
        let mut r = graph.residual(syndrome, &estimate);
        let mut actions = Vec::new();
        let unsat = r.weight();
        if unsat > 0 && unsat <= self.cfg.pp_trigger_max_unsat {
            for &method in &self.cfg.pp_order {
                let res = match method {
                    PpMethod::Ets if unsat == 2 && !self.library.is_empty() => {
                        pp_ets(graph, &r, &self.library, &self.index, self.cfg.weight_threshold)
                    }
                    PpMethod::Ets => continue,
                    PpMethod::Fhd => pp_fhd(graph, state, &r, &self.cfg),
                    PpMethod::Osd => pp_osd(graph, state, &r, &self.cfg),
                };
                let accepted = res.correction.is_some();
                actions.push(PpAction {
                    side,
                    method,
                    support_size: res.support_size,
                    accepted,
                    reason: res.reason,
                });
                if let Some(d) = res.correction {
                    estimate.xor_assign(&d);
                    r = graph.residual(syndrome, &estimate);
                    if r.is_zero() {
                        break;
                    }
                }
            }
        }
        SideOutcome {
            estimate,
            iterations: state.iteration,
            stop: state.stop,
            residual_weight: r.weight(),
            pp_actions: actions,
        }
    }

    /// Decode both components of a frame from its syndromes
    /// (`s_x = H_Z x`, `s_z = H_X z`).
    pub fn decode_frame(&self, s_x: &BinVector, s_z: &BinVector, p: f64) -> DecodeOutcome {
        let (x, z) = match self.cfg.bp_mode {
            BpMode::Binary => (self.decode_side(Side::X, s_x, p), self.decode_side(Side::Z, s_z, p)),
            BpMode::Joint => {
                let (sx, sz) = bp_decode_joint(self.graph(Side::X), self.graph(Side::Z), s_x, s_z, p, &self.cfg);
                (self.post_process(&sx), self.post_process(&sz))
            }
        };
        let mut pp_actions = x.pp_actions.clone();
        pp_actions.extend(z.pp_actions.iter().cloned());
        DecodeOutcome {
            estimate_x: x.estimate.clone(),
            estimate_z: z.estimate.clone(),
            iterations_used: x.iterations.max(z.iterations),
            pp_actions,
            x,
            z,
        }
    }

    /// Syndromes of an error frame: `(H_Z x, H_X z)`.
    pub fn syndromes(&self, x: &BinVector, z: &BinVector) -> (BinVector, BinVector) {
        (self.graph(Side::X).adj.syndrome(x), self.graph(Side::Z).adj.syndrome(z))
    }
}

/// Ground-truth classification of decoded frames.
#[derive(Debug)]
pub struct Classifier {
    hx: BinMatrix,
    hz: BinMatrix,
    hz_adj: Adjacency,
    hx_adj: Adjacency,
    row_x: OnceLock<RowSpace>,
    row_z: OnceLock<RowSpace>,
}

impl Classifier {
    pub fn new(pair: &CssPair) -> Self {
        Self {
            hx_adj: Adjacency::from_matrix(&pair.hx),
            hz_adj: Adjacency::from_matrix(&pair.hz),
            hx: pair.hx.clone(),
            hz: pair.hz.clone(),
            row_x: OnceLock::new(),
            row_z: OnceLock::new(),
        }
    }

    /// Residual errors `true ⊕ estimate` are checked against the opposing
    /// checks, then against the same-side stabilizer row spaces.
    pub fn success_check(
        &self,
        true_x: &BinVector,
        true_z: &BinVector,
        estimate_x: &BinVector,
        estimate_z: &BinVector,
    ) -> Status {
        let rx = true_x.xor(estimate_x);
        let rz = true_z.xor(estimate_z);
        if !self.hz_adj.syndrome(&rx).is_zero() || !self.hx_adj.syndrome(&rz).is_zero() {
            return Status::DetectedFailure;
        }
        if rx.is_zero() && rz.is_zero() {
            return Status::ConvergedExact;
        }
        let x_ok = rx.is_zero() || self.row_x.get_or_init(|| RowSpace::new(&self.hx)).contains(&rx);
        let z_ok = rz.is_zero() || self.row_z.get_or_init(|| RowSpace::new(&self.hz)).contains(&rz);
        if x_ok && z_ok {
            Status::ConvergedDegenerate
        } else {
            Status::LogicalFailure
        }
    }

    pub fn classify(&self, true_x: &BinVector, true_z: &BinVector, outcome: &DecodeOutcome) -> Status {
        self.success_check(true_x, true_z, &outcome.estimate_x, &outcome.estimate_z)
    }
}
