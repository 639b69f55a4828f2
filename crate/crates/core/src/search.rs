//! Backtracking construction of affine families with a prescribed
//! commutation table and a girth target.
//!
//! Slots are filled in the interleaved order `f0, g0, f1, g1, ..`. Each
//! candidate draws a unit multiplier and then an offset from the solution
//! set of the linear congruences imposed by the already placed partners.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use thiserror::Error;

use crate::affine::{commutation_residue, gcd, mod_inverse, AffinePerm};
use crate::code::{build, delta_set, gamma_set, validate, CodeSpec, Side};
use crate::girth::count_lifted_cycles;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("invalid commutation table: {0}")]
    Table(String),
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Blocked(String),
    #[error("search exhausted after {backtracks} backtracks")]
    Exhausted { backtracks: usize },
    #[error("fixed assignment rejected: {0}")]
    FixedRejected(String),
}

/// Which `(f_i, g_j)` pairs must commute and which must not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommutationTable {
    half: usize,
    required_commute: BTreeSet<(usize, usize)>,
    required_noncommute: BTreeSet<(usize, usize)>,
}

impl CommutationTable {
    pub fn new(
        half: usize,
        required_commute: BTreeSet<(usize, usize)>,
        required_noncommute: BTreeSet<(usize, usize)>,
    ) -> Result<Self, SearchError> {
        if required_noncommute.is_empty() {
            return Err(SearchError::Table("at least one non-commuting pair is required".into()));
        }
        for &(i, j) in required_commute.iter().chain(&required_noncommute) {
            if i >= half || j >= half {
                return Err(SearchError::Table(format!("pair ({i},{j}) out of range")));
            }
        }
        if let Some(p) = required_commute.intersection(&required_noncommute).next() {
            return Err(SearchError::Table(format!("pair {p:?} is both required and forbidden")));
        }
        Ok(Self {
            half,
            required_commute,
            required_noncommute,
        })
    }

    /// Exactly the pairs of Gamma must commute; the listed pairs must not.
    pub fn from_active(active: &[usize], half: usize, noncommute: &[(usize, usize)]) -> Result<Self, SearchError> {
        let gamma = gamma_set(&delta_set(active, half), half);
        Self::new(half, gamma, noncommute.iter().copied().collect())
    }

    /// Every pair commutes except the listed ones (the pattern of the
    /// reference instance when `noncommute = [(0,3), (1,2)]`).
    pub fn all_but(half: usize, noncommute: &[(usize, usize)]) -> Result<Self, SearchError> {
        let non: BTreeSet<_> = noncommute.iter().copied().collect();
        let all = (0..half)
            .flat_map(|i| (0..half).map(move |j| (i, j)))
            .filter(|p| !non.contains(p))
            .collect();
        Self::new(half, all, non)
    }

    pub fn half(&self) -> usize {
        self.half
    }

    pub fn required_commute(&self) -> &BTreeSet<(usize, usize)> {
        &self.required_commute
    }

    pub fn required_noncommute(&self) -> &BTreeSet<(usize, usize)> {
        &self.required_noncommute
    }

    /// Checks that Gamma is covered and that no forbidden pair lies in it.
    pub fn check_against(&self, active: &[usize]) -> Result<(), SearchError> {
        let gamma = gamma_set(&delta_set(active, self.half), self.half);
        if let Some(p) = self.required_noncommute.iter().find(|p| gamma.contains(p)) {
            return Err(SearchError::Table(format!(
                "non-commuting pair {p:?} lies in Gamma, which would break active orthogonality"
            )));
        }
        if let Some(p) = gamma.iter().find(|p| !self.required_commute.contains(p)) {
            return Err(SearchError::Table(format!(
                "pair {p:?} of Gamma is not required to commute"
            )));
        }
        Ok(())
    }

    /// Finds `(i, i', j, j')` with `f_i` commuting with `g_j` but not `g_j'`
    /// and `f_i'` doing the opposite.
    pub fn mixed_pattern(&self) -> Option<(usize, usize, usize, usize)> {
        let c = &self.required_commute;
        let n = &self.required_noncommute;
        for &(i, j) in c {
            for &(i2, j2) in c {
                if i != i2 && j != j2 && n.contains(&(i, j2)) && n.contains(&(i2, j)) {
                    return Some((i, i2, j, j2));
                }
            }
        }
        None
    }
}

/// `Some(q)` if `p = q^e` for a prime `q` and `e >= 1`.
pub fn prime_power_base(p: u64) -> Option<u64> {
    if p < 2 {
        return None;
    }
    let q = (2..)
        .take_while(|d: &u64| d * d <= p)
        .find(|d| p.is_multiple_of(*d))
        .unwrap_or(p);
    let mut rest = p;
    while rest.is_multiple_of(q) {
        rest /= q;
    }
    (rest == 1).then_some(q)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Obstruction {
    Ok,
    Blocked(String),
}

pub fn check_prime_power_obstruction(p: u64, table: &CommutationTable) -> Obstruction {
    match (prime_power_base(p), table.mixed_pattern()) {
        (Some(q), Some((i, i2, j, j2))) => Obstruction::Blocked(format!(
            "P = {p} is a power of {q}; no affine maps realise f_{i} commuting with g_{j} but not g_{j2} \
             while f_{i2} commutes with g_{j2} but not g_{j}"
        )),
        _ => Obstruction::Ok,
    }
}

/// Replay of a known assignment instead of searching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedAssignment {
    pub f: Vec<AffinePerm>,
    pub g: Vec<AffinePerm>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub p: u64,
    pub j: usize,
    pub l: usize,
    pub active: Option<Vec<usize>>,
    pub girth_target: usize,
    pub table: CommutationTable,
    pub max_backtracks: usize,
    pub trials_init: usize,
    pub trials_min: usize,
    pub trials_max: usize,
    pub seed: u64,
    pub fixed: Option<FixedAssignment>,
}

impl SearchConfig {
    /// Defaults for everything except the code shape and the table.
    pub fn new(p: u64, j: usize, l: usize, girth_target: usize, table: CommutationTable, seed: u64) -> Self {
        Self {
            p,
            j,
            l,
            active: None,
            girth_target,
            table,
            max_backtracks: 2000,
            trials_init: 64,
            trials_min: 8,
            trials_max: 256,
            seed,
            fixed: None,
        }
    }

    /// The reference instance as a fixed assignment.
    pub fn reference_replay() -> Self {
        let t = CodeSpec::reference();
        let table = CommutationTable::all_but(6, &[(0, 3), (1, 2)]).expect("valid table");
        let mut cfg = Self::new(768, 3, 12, 8, table, 0);
        cfg.fixed = Some(FixedAssignment {
            f: t.f().to_vec(),
            g: t.g().to_vec(),
        });
        cfg
    }

    fn active_set(&self) -> Vec<usize> {
        self.active.clone().unwrap_or_else(|| (0..self.j).collect())
    }

    fn check(&self) -> Result<(), SearchError> {
        let half = self.l / 2;
        if !self.l.is_multiple_of(2) || self.j == 0 || self.j >= half {
            return Err(SearchError::Config(format!("bad shape J={}, L={}", self.j, self.l)));
        }
        if self.girth_target < 6 || self.girth_target > 10 || !self.girth_target.is_multiple_of(2) {
            return Err(SearchError::Config(format!(
                "girth target must be 6, 8 or 10, got {}",
                self.girth_target
            )));
        }
        if self.table.half != half {
            return Err(SearchError::Config("table size differs from L/2".into()));
        }
        if self.trials_min == 0 || self.trials_min > self.trials_max {
            return Err(SearchError::Config("need 0 < trials_min <= trials_max".into()));
        }
        self.table.check_against(&self.active_set())
    }
}

/// Per-slot attempt statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SlotStats {
    pub attempts: u64,
    pub successes: u64,
}

/// Upper-confidence trial budgets, one per slot.
pub fn allocate_trials(stats: &[SlotStats], init: usize, min: usize, max: usize) -> Vec<usize> {
    let total: u64 = stats.iter().map(|s| s.attempts).sum();
    if total == 0 {
        return vec![init.clamp(min, max); stats.len()];
    }
    let score = |s: &SlotStats| {
        if s.attempts == 0 {
            f64::INFINITY
        } else {
            let n = s.attempts as f64;
            s.successes as f64 / n + (2.0 * (total as f64).ln() / n).sqrt()
        }
    };
    let scores: Vec<f64> = stats.iter().map(score).collect();
    let top = scores.iter().copied().filter(|s| s.is_finite()).fold(0.0, f64::max);
    scores
        .iter()
        .map(|&s| {
            if !s.is_finite() || top <= 0.0 {
                init.clamp(min, max)
            } else {
                ((init as f64 * s / top).round() as usize).clamp(min, max)
            }
        })
        .collect()
}

/// Slot `k` holds `f_{k/2}` when `k` is even and `g_{k/2}` when odd.
fn slot_perm(placed: &[AffinePerm], is_f: bool, idx: usize) -> Option<AffinePerm> {
    placed.get(2 * idx + usize::from(!is_f)).copied()
}

/// `x ≡ r (mod m)`, with `m | P`.
type Progression = (u64, u64);

fn solve_linear(alpha: u64, beta: u64, p: u64) -> Option<Progression> {
    let g = gcd(alpha % p, p);
    if !beta.is_multiple_of(g) {
        return None;
    }
    let m = p / g;
    let inv = mod_inverse((alpha / g) % m, m)?;
    Some(((beta / g) % m * inv % m, m))
}

fn merge(a: Progression, b: Progression) -> Option<Progression> {
    let (r1, m1) = a;
    let (r2, m2) = b;
    let g = gcd(m1, m2);
    let diff = (r2 as i128 - r1 as i128).rem_euclid(m2 as i128) as u64;
    if !diff.is_multiple_of(g) {
        return None;
    }
    let m2g = m2 / g;
    let t = (diff / g) as u128 * mod_inverse((m1 / g) % m2g, m2g)? as u128 % m2g as u128;
    let lcm = m1 / g * m2;
    Some(((r1 as u128 + m1 as u128 * t) as u64 % lcm, lcm))
}

/// Linear congruence `alpha * offset ≡ beta (mod P)` that makes a candidate
/// with multiplier `a` commute with `partner`. The commutation condition is
/// symmetric in the roles, so the same form serves both families.
fn commute_congruence(a: u64, partner: &AffinePerm) -> (u64, u64) {
    let p = partner.modulus();
    ((partner.a() + p - 1) % p, partner.b() * ((a + p - 1) % p) % p)
}

/// Candidate for `slot` given the placed prefix, or `None` when no offset
/// works for any of the multipliers tried.
pub fn propose_candidate<R: Rng>(
    slot: usize,
    placed: &[AffinePerm],
    table: &CommutationTable,
    p: u64,
    rng: &mut R,
) -> Option<AffinePerm> {
    let units: Vec<u64> = (1..p.max(2)).filter(|&a| gcd(a, p) == 1).collect();
    let (is_f, idx) = (slot.is_multiple_of(2), slot / 2);
    let pair = |k: usize| if is_f { (idx, k) } else { (k, idx) };
    let partners: Vec<(usize, AffinePerm)> = (0..table.half)
        .filter_map(|k| slot_perm(placed, !is_f, k).map(|q| (k, q)))
        .collect();
    let mut order = units.clone();
    // redraw the multiplier until the offset system is solvable
    for t in 0..order.len() {
        let pick = rng.random_range(t..order.len());
        order.swap(t, pick);
        let a = order[t];
        let mut prog: Option<Progression> = Some((0, 1));
        for (k, q) in &partners {
            if table.required_commute.contains(&pair(*k)) {
                let (alpha, beta) = commute_congruence(a, q);
                prog = prog.and_then(|pr| solve_linear(alpha, beta, p).and_then(|s| merge(pr, s)));
            }
        }
        let Some((r, m)) = prog else { continue };
        let forbidden: Vec<&AffinePerm> = partners
            .iter()
            .filter(|(k, _)| table.required_noncommute.contains(&pair(*k)))
            .map(|(_, q)| q)
            .collect();
        let offsets: Vec<u64> = (0..p / m)
            .map(|s| r + s * m)
            .filter(|&b| {
                let cand = AffinePerm::new(a, b, p).expect("unit multiplier");
                forbidden.iter().all(|q| {
                    let res = if is_f {
                        commutation_residue(&cand, q)
                    } else {
                        commutation_residue(q, &cand)
                    };
                    res != 0
                })
            })
            .collect();
        if offsets.is_empty() {
            continue;
        }
        let b = offsets[rng.random_range(0..offsets.len())];
        return Some(AffinePerm::new(a, b, p).expect("unit multiplier"));
    }
    None
}

/// A cycle shape on the active grid with the slots it depends on.
struct WalkShape {
    rows: Vec<usize>,
    cols: Vec<usize>,
    side: Side,
    slots: u64,
}

fn walk_shapes(cfg: &SearchConfig, max_len: usize) -> Vec<WalkShape> {
    let active = cfg.active_set();
    let h = cfg.l / 2;
    let slot_of = |side: Side, r: usize, c: usize| -> usize {
        let (right, cc) = (c >= h, c % h);
        let idx = match side {
            Side::X => (cc + h - r) % h,
            Side::Z => (r + h - cc) % h,
        };
        let is_f = (side == Side::X) != right;
        2 * idx + usize::from(!is_f)
    };
    let mut out = Vec::new();
    for m in (2..=max_len / 2).take_while(|&m| 2 * m <= max_len) {
        let row_seqs = proper_cycles(m, active.len());
        let col_seqs = proper_cycles(m, cfg.l);
        for side in Side::BOTH {
            for rows in &row_seqs {
                let rows: Vec<usize> = rows.iter().map(|&r| active[r]).collect();
                for cols in &col_seqs {
                    let mut slots = 0u64;
                    for t in 0..m {
                        slots |= 1 << slot_of(side, rows[t], cols[t]);
                        slots |= 1 << slot_of(side, rows[t], cols[(t + 1) % m]);
                    }
                    out.push(WalkShape {
                        rows: rows.clone(),
                        cols: cols.clone(),
                        side,
                        slots,
                    });
                }
            }
        }
    }
    out
}

fn proper_cycles(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; m];
    fn rec(t: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if t == m {
            if cur[m - 1] != cur[0] {
                out.push(cur.clone());
            }
            return;
        }
        for c in 0..k {
            if t == 0 || cur[t - 1] != c {
                cur[t] = c;
                rec(t + 1, m, k, cur, out);
            }
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

fn block_perm(placed: &[AffinePerm], side: Side, h: usize, r: usize, c: usize) -> AffinePerm {
    let (right, cc) = (c >= h, c % h);
    match side {
        Side::X => {
            let idx = (cc + h - r) % h;
            slot_perm(placed, !right, idx).expect("slot placed")
        }
        Side::Z => {
            let idx = (r + h - cc) % h;
            slot_perm(placed, right, idx).expect("slot placed").invert()
        }
    }
}

/// True if some fully placed walk of length below the target through the
/// newest slot closes up in the lift.
fn has_short_cycle(shapes: &[WalkShape], placed: &[AffinePerm], h: usize) -> bool {
    let have: u64 = if placed.len() >= 64 {
        u64::MAX
    } else {
        (1u64 << placed.len()) - 1
    };
    let newest = 1u64 << (placed.len() - 1);
    let p = placed[0].modulus();
    shapes
        .iter()
        .filter(|w| w.slots & newest != 0 && w.slots & !have == 0)
        .any(|w| {
            let m = w.rows.len();
            let mut acc = AffinePerm::identity(p);
            for t in 0..m {
                let (r, c0, c1) = (w.rows[t], w.cols[t], w.cols[(t + 1) % m]);
                acc = acc
                    .compose(&block_perm(placed, w.side, h, r, c0))
                    .expect("shared modulus");
                acc = acc
                    .compose(&block_perm(placed, w.side, h, r, c1).invert())
                    .expect("shared modulus");
            }
            acc.fixed_point_count() > 0
        })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchLog {
    pub slots: Vec<SlotStats>,
    pub backtracks: usize,
    pub completions_rejected: usize,
}

impl fmt::Display for SearchLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "backtracks = {}", self.backtracks)?;
        writeln!(f, "completions_rejected = {}", self.completions_rejected)?;
        for (k, s) in self.slots.iter().enumerate() {
            let name = if k % 2 == 0 { "f" } else { "g" };
            writeln!(
                f,
                "slot {k} ({name}{}): attempts = {}, accepted = {}",
                k / 2,
                s.attempts,
                s.successes
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub spec: CodeSpec,
    pub log: SearchLog,
}

/// Full check of a completed assignment against the configuration.
pub fn check_assignment(cfg: &SearchConfig, spec: &CodeSpec) -> Result<(), String> {
    for &(i, j) in &cfg.table.required_commute {
        if !spec.f()[i].commutes(&spec.g()[j]).map_err(|e| e.to_string())? {
            return Err(format!("f_{i} and g_{j} must commute"));
        }
    }
    for &(i, j) in &cfg.table.required_noncommute {
        if spec.f()[i].commutes(&spec.g()[j]).map_err(|e| e.to_string())? {
            return Err(format!("f_{i} and g_{j} must not commute"));
        }
    }
    let report = validate(&build(spec), spec);
    if !report.all_pass() {
        return Err(report.failures().join("; "));
    }
    for length in (4..cfg.girth_target).step_by(2) {
        for side in Side::BOTH {
            let n = count_lifted_cycles(spec, length, side);
            if n > 0 {
                return Err(format!("{n} cycles of length {length} on side {side}"));
            }
        }
    }
    Ok(())
}

pub fn construct(cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    cfg.check()?;
    if let Obstruction::Blocked(reason) = check_prime_power_obstruction(cfg.p, &cfg.table) {
        return Err(SearchError::Blocked(reason));
    }
    let half = cfg.l / 2;
    let nslots = 2 * half;
    let mut log = SearchLog {
        slots: vec![SlotStats::default(); nslots],
        backtracks: 0,
        completions_rejected: 0,
    };
    let make_spec = |f: Vec<AffinePerm>, g: Vec<AffinePerm>| {
        CodeSpec::new(cfg.p, cfg.j, cfg.l, cfg.active.clone(), f, g).map_err(|e| e.to_string())
    };

    if let Some(fixed) = &cfg.fixed {
        let spec = make_spec(fixed.f.clone(), fixed.g.clone()).map_err(SearchError::FixedRejected)?;
        check_assignment(cfg, &spec).map_err(SearchError::FixedRejected)?;
        return Ok(SearchOutcome { spec, log });
    }

    let shapes = walk_shapes(cfg, cfg.girth_target - 2);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(cfg.seed);
    let mut placed: Vec<AffinePerm> = Vec::with_capacity(nslots);
    let mut last_fail: Option<(usize, usize)> = None;

    loop {
        if placed.len() == nslots {
            let f = (0..half).map(|i| placed[2 * i]).collect();
            let g = (0..half).map(|i| placed[2 * i + 1]).collect();
            let spec = make_spec(f, g).map_err(SearchError::Config)?;
            match check_assignment(cfg, &spec) {
                Ok(()) => return Ok(SearchOutcome { spec, log }),
                Err(reason) => {
                    log::debug!("completed assignment rejected: {reason}");
                    log.completions_rejected += 1;
                    log.backtracks += 1;
                    if log.backtracks > cfg.max_backtracks {
                        return Err(SearchError::Exhausted {
                            backtracks: log.backtracks,
                        });
                    }
                    placed.pop();
                    continue;
                }
            }
        }
        let slot = placed.len();
        let budget = allocate_trials(&log.slots, cfg.trials_init, cfg.trials_min, cfg.trials_max)[slot];
        let mut accepted = false;
        for _ in 0..budget {
            log.slots[slot].attempts += 1;
            let Some(cand) = propose_candidate(slot, &placed, &cfg.table, cfg.p, &mut rng) else {
                break;
            };
            placed.push(cand);
            if has_short_cycle(&shapes, &placed, half) {
                placed.pop();
                continue;
            }
            log.slots[slot].successes += 1;
            accepted = true;
            break;
        }
        if accepted {
            continue;
        }
        log.backtracks += 1;
        if log.backtracks > cfg.max_backtracks {
            return Err(SearchError::Exhausted {
                backtracks: log.backtracks,
            });
        }
        // one slot back, two after the third consecutive failure at this
        // depth, and one more for every further failure
        let streak = match last_fail {
            Some((depth, n)) if depth == slot => n + 1,
            _ => 1,
        };
        let remove = if streak < 3 { 1 } else { streak - 1 };
        last_fail = Some((slot, streak));
        let keep = placed.len().saturating_sub(remove);
        placed.truncate(keep);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::tests::ap;
    use crate::gf2::{BinMatrix, Block};
    use crate::girth::brute_force_cycle_count;
    use proptest::prelude::*;
    use rand::Rng;

    fn instance_table() -> CommutationTable {
        CommutationTable::all_but(6, &[(0, 3), (1, 2)]).unwrap()
    }

    fn small_cfg(seed: u64) -> SearchConfig {
        let table = CommutationTable::from_active(&[0, 1], 4, &[(0, 2)]).unwrap();
        SearchConfig::new(60, 2, 8, 6, table, seed)
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power_base(256), Some(2));
        assert_eq!(prime_power_base(243), Some(3));
        assert_eq!(prime_power_base(13), Some(13));
        assert_eq!(prime_power_base(768), None);
        assert_eq!(prime_power_base(60), None);
        assert_eq!(prime_power_base(1), None);
    }

    #[test]
    fn obstruction_examples() {
        let t = instance_table();
        assert_eq!(check_prime_power_obstruction(768, &t), Obstruction::Ok);
        assert!(matches!(
            check_prime_power_obstruction(256, &t),
            Obstruction::Blocked(_)
        ));
        let one = CommutationTable::all_but(6, &[(0, 3)]).unwrap();
        assert_eq!(check_prime_power_obstruction(256, &one), Obstruction::Ok);
        let relaxed = CommutationTable::from_active(&[0, 1, 2], 6, &[(0, 3)]).unwrap();
        assert_eq!(check_prime_power_obstruction(768, &relaxed), Obstruction::Ok);
    }

    #[test]
    fn table_invariants() {
        assert!(CommutationTable::from_active(&[0, 1, 2], 6, &[(0, 1)]).is_err());
        let inside_gamma = CommutationTable::new(6, BTreeSet::new(), [(0, 1)].into()).unwrap();
        let cfg = SearchConfig::new(60, 3, 12, 8, inside_gamma, 0);
        assert!(matches!(construct(&cfg), Err(SearchError::Table(_))));
        assert!(CommutationTable::new(6, [(0, 3)].into(), [(0, 3)].into()).is_err());
        assert!(CommutationTable::new(6, BTreeSet::new(), BTreeSet::new()).is_err());
        assert!(instance_table().check_against(&[0, 1, 2]).is_ok());
    }

    #[test]
    fn congruence_helpers() {
        // 4x ≡ 8 mod 12 -> x ≡ 2 mod 3
        assert_eq!(solve_linear(4, 8, 12), Some((2, 3)));
        assert_eq!(solve_linear(4, 6, 12), None);
        assert_eq!(solve_linear(0, 0, 12), Some((0, 1)));
        assert_eq!(merge((2, 3), (1, 4)), Some((5, 12)));
        assert_eq!(merge((1, 2), (0, 4)), None);
        for p in [12u64, 60, 64] {
            for alpha in 0..p {
                for beta in 0..p {
                    let brute: Vec<u64> = (0..p).filter(|x| alpha * x % p == beta).collect();
                    match solve_linear(alpha, beta, p) {
                        None => assert!(brute.is_empty()),
                        Some((r, m)) => {
                            let prog: Vec<u64> = (0..p).filter(|x| x % m == r).collect();
                            assert_eq!(prog, brute);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn candidates_respect_congruences() {
        let t = CodeSpec::reference();
        let table = instance_table();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
        // place f0, g0, f1, g1, f2, g2, f3 from the instance, then propose g3
        let placed: Vec<AffinePerm> = (0..7)
            .map(|k| if k % 2 == 0 { t.f()[k / 2] } else { t.g()[k / 2] })
            .collect();
        for _ in 0..50 {
            let g3 = propose_candidate(7, &placed, &table, 768, &mut rng).unwrap();
            assert!(!t.f()[0].commutes(&g3).unwrap());
            for i in 1..4 {
                assert!(t.f()[i].commutes(&g3).unwrap());
            }
        }
        let first = propose_candidate(0, &[], &table, 768, &mut rng).unwrap();
        assert_eq!(gcd(first.a(), 768), 1);
    }

    #[test]
    fn commute_congruence_matches_residue() {
        let p = 60;
        for (a, c) in [(7u64, 11u64), (1, 13), (31, 1), (49, 59)] {
            let partner_g = ap(c, 17, p);
            let (alpha, beta) = commute_congruence(a, &partner_g);
            for b in 0..p {
                let f = ap(a, b, p);
                assert_eq!(alpha * b % p == beta, commutation_residue(&f, &partner_g) == 0);
            }
            let partner_f = ap(a, 23, p);
            let (alpha, beta) = commute_congruence(c, &partner_f);
            for d in 0..p {
                let g = ap(c, d, p);
                assert_eq!(alpha * d % p == beta, commutation_residue(&partner_f, &g) == 0);
            }
        }
    }

    #[test]
    fn bandit_budgets() {
        let none = vec![SlotStats::default(); 4];
        assert_eq!(allocate_trials(&none, 64, 8, 256), vec![64; 4]);
        let stats = vec![
            SlotStats {
                attempts: 100,
                successes: 0,
            },
            SlotStats {
                attempts: 100,
                successes: 50,
            },
        ];
        let b = allocate_trials(&stats, 64, 8, 256);
        assert!(b[1] >= b[0]);
        assert_eq!(b[1], 64);
        let b2 = allocate_trials(&stats, 64, 8, 256);
        assert_eq!(b, b2);
        for x in allocate_trials(&stats, 1000, 8, 256) {
            assert!((8..=256).contains(&x));
        }
    }

    #[test]
    fn reference_replay_validates() {
        let out = construct(&SearchConfig::reference_replay()).unwrap();
        assert_eq!(out.spec, CodeSpec::reference());
    }

    #[test]
    fn fixed_assignment_violating_table_is_rejected() {
        let mut cfg = SearchConfig::reference_replay();
        let mut fixed = cfg.fixed.clone().unwrap();
        fixed.g[3] = fixed.g[2];
        cfg.fixed = Some(fixed);
        assert!(matches!(construct(&cfg), Err(SearchError::FixedRejected(_))));
    }

    #[test]
    fn blocked_prime_power() {
        let mut cfg = SearchConfig::reference_replay();
        cfg.p = 256;
        cfg.fixed = None;
        assert!(matches!(construct(&cfg), Err(SearchError::Blocked(_))));
    }

    #[test]
    fn small_search_succeeds_and_is_deterministic() {
        let cfg = small_cfg(11);
        let a = match construct(&cfg) {
            Ok(a) => a,
            Err(e) => panic!("{e}"),
        };
        let b = construct(&cfg).unwrap();
        assert_eq!(a.spec, b.spec);
        assert_eq!(a.log, b.log);
        check_assignment(&cfg, &a.spec).unwrap();
        assert!(crate::girth::girth(&a.spec).unwrap() >= 6);
        let report = validate(&build(&a.spec), &a.spec);
        assert!(report.all_pass(), "{report}");
    }

    #[test]
    fn tiny_budget_exhausts() {
        let mut cfg = small_cfg(3);
        cfg.max_backtracks = 0;
        cfg.girth_target = 10;
        cfg.trials_init = 1;
        cfg.trials_min = 1;
        cfg.trials_max = 1;
        assert!(matches!(construct(&cfg), Err(SearchError::Exhausted { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        /// Pruning agrees with brute force on the graph of placed blocks.
        #[test]
        fn pruning_is_sound(seed in any::<u64>(), nplaced in 2usize..=8, p in prop::sample::select(vec![6u64, 8, 9, 10])) {
            let table = CommutationTable::from_active(&[0, 1], 4, &[(0, 2)]).unwrap();
            let mut cfg = SearchConfig::new(p, 2, 8, 8, table, seed);
            cfg.active = None;
            let shapes = walk_shapes(&cfg, 6);
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
            let units: Vec<u64> = (1..p).filter(|&a| gcd(a, p) == 1).collect();
            let placed: Vec<AffinePerm> = (0..nplaced)
                .map(|_| ap(units[rng.random_range(0..units.len())], rng.random_range(0..p), p))
                .collect();
            // brute force on graphs containing only placed blocks
            let h = 4;
            let mut brute = false;
            for side in Side::BOTH {
                let grid: Vec<Vec<Block>> = (0..2).map(|r| (0..8).map(|c| {
                    let (right, cc) = (c >= h, c % h);
                    let (is_f, idx) = match side {
                        Side::X => (!right, (cc + h - r) % h),
                        Side::Z => (right, (r + h - cc) % h),
                    };
                    match slot_perm(&placed, is_f, idx) {
                        None => Block::Zero,
                        Some(q) if side == Side::X => Block::Perm(q),
                        Some(q) => Block::Transposed(q),
                    }
                }).collect()).collect();
                let m = BinMatrix::from_perm_blocks(&grid, p as usize).unwrap();
                brute |= [4, 6].iter().any(|&l| brute_force_cycle_count(&m, l) > 0);
            }
            // incremental pruning replays every prefix
            let incremental = (1..=nplaced).any(|k| has_short_cycle(&shapes, &placed[..k], h));
            prop_assert_eq!(incremental, brute);
        }
    }
}
