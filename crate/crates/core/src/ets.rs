//! Elementary trapping sets with two odd checks, grown from the 8-cycle
//! census.
//!
//! For an elementary set every induced check has degree 1 or 2, so the set
//! is described by its variable graph: vertices are the variables, edges
//! are the degree-2 checks. The three patterns are
//!
//! * `(6,2)`: `K_{3,3}` minus one edge;
//! * `(12,2)`: a ladder of five squares (`2 x 6` grid) closed by one edge
//!   from a corner at one end to a corner at the other end, either crossing
//!   (one rail to the other) or along a rail;
//! * `(8,2)`: a `(6,2)` whose two odd checks are bridged by a
//!   variable-check-variable path, i.e. `K_{3,3}` with one edge subdivided
//!   twice.
//!
//! Candidates are produced by pattern-specific walks over 8-cycles and every
//! candidate is accepted only after an independent check of elementarity,
//! `b = 2`, and graph isomorphism with the pattern.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::{CodeSpec, Side};
use crate::gf2::Adjacency;
use crate::girth::{enumerate_cycles, Cycle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pattern {
    #[serde(rename = "(6,2)")]
    Six,
    #[serde(rename = "(12,2)")]
    Twelve,
    #[serde(rename = "(8,2)-path4")]
    EightPath,
}

impl Pattern {
    pub const ALL: [Pattern; 3] = [Pattern::Six, Pattern::Twelve, Pattern::EightPath];

    pub fn size(self) -> usize {
        match self {
            Pattern::Six => 6,
            Pattern::Twelve => 12,
            Pattern::EightPath => 8,
        }
    }

    /// Number of degree-2 checks.
    pub fn even_checks(self) -> usize {
        match self {
            Pattern::Six => 8,
            Pattern::Twelve => 17,
            Pattern::EightPath => 11,
        }
    }

    /// Variable graphs accepted for the pattern. The `(12,2)` ladder may be
    /// closed by a crossing corner edge or by an edge along one rail.
    pub fn graphs(self) -> Vec<Vec<(usize, usize)>> {
        match self {
            Pattern::Twelve => {
                let crossing = self.graph();
                let mut along = crossing.clone();
                along.pop();
                along.push((0, 5));
                vec![crossing, along]
            }
            _ => vec![self.graph()],
        }
    }

    /// Edge list of the reference variable graph.
    pub fn graph(self) -> Vec<(usize, usize)> {
        match self {
            // parts {0,1,2} and {3,4,5}, edge 0-3 removed
            Pattern::Six => k33_edges().into_iter().filter(|&e| e != (0, 3)).collect(),
            Pattern::Twelve => {
                // top row 0..6, bottom row 6..12
                let mut e = Vec::new();
                for i in 0..6 {
                    e.push((i, i + 6));
                }
                for i in 0..5 {
                    e.push((i, i + 1));
                    e.push((i + 6, i + 7));
                }
                e.push((0, 11));
                e
            }
            Pattern::EightPath => {
                let mut e: Vec<_> = k33_edges().into_iter().filter(|&e| e != (0, 3)).collect();
                e.extend([(0, 6), (6, 7), (7, 3)]);
                e
            }
        }
    }
}

fn k33_edges() -> Vec<(usize, usize)> {
    (0..3).flat_map(|a| (3..6).map(move |b| (a, b))).collect()
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pattern::Six => "(6,2)",
            Pattern::Twelve => "(12,2)",
            Pattern::EightPath => "(8,2)-path4",
        })
    }
}

impl FromStr for Pattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "(6,2)" | "6" => Ok(Pattern::Six),
            "(12,2)" | "12" => Ok(Pattern::Twelve),
            "(8,2)-path4" | "(8,2)" | "8" => Ok(Pattern::EightPath),
            _ => Err(format!("unknown pattern {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrappingSetEntry {
    pub side: Side,
    pub pattern: Pattern,
    #[serde(rename = "V")]
    pub variables: Vec<usize>,
    /// Sorted odd-check pair.
    pub odd: [usize; 2],
}

#[derive(Debug, Error)]
pub enum EtsError {
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("entry {0} fails verification: {1}")]
    Invalid(usize, String),
}

/// Induced structure of a variable set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Induced {
    /// Check -> neighbours inside the set.
    pub checks: BTreeMap<usize, Vec<usize>>,
}

impl Induced {
    pub fn new(adj: &Adjacency, vars: &[usize]) -> Self {
        let mut checks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &v in vars {
            for &c in &adj.var_checks[v] {
                checks.entry(c as usize).or_default().push(v);
            }
        }
        Self { checks }
    }

    pub fn is_elementary(&self) -> bool {
        self.checks.values().all(|n| n.len() <= 2)
    }

    pub fn odd_checks(&self) -> Vec<usize> {
        self.checks
            .iter()
            .filter(|(_, n)| n.len() % 2 == 1)
            .map(|(&c, _)| c)
            .collect()
    }

    pub fn even_checks(&self) -> usize {
        self.checks.values().filter(|n| n.len() % 2 == 0).count()
    }

    /// Edges of the variable graph (degree-2 checks), relabelled to
    /// positions in `vars`.
    pub fn variable_graph(&self, vars: &[usize]) -> Vec<(usize, usize)> {
        let pos: HashMap<usize, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        self.checks
            .values()
            .filter(|n| n.len() == 2)
            .map(|n| (pos[&n[0]], pos[&n[1]]))
            .collect()
    }
}

/// Backtracking isomorphism test for small simple graphs given as edge
/// lists on `n` vertices.
pub fn isomorphic(n: usize, a: &[(usize, usize)], b: &[(usize, usize)]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let adj = |edges: &[(usize, usize)]| -> Option<Vec<u64>> {
        let mut m = vec![0u64; n];
        for &(u, v) in edges {
            if u == v || u >= n || v >= n || m[u] >> v & 1 == 1 {
                return None;
            }
            m[u] |= 1 << v;
            m[v] |= 1 << u;
        }
        Some(m)
    };
    let (Some(ga), Some(gb)) = (adj(a), adj(b)) else {
        return false;
    };
    let deg = |g: &[u64]| g.iter().map(|r| r.count_ones()).collect::<Vec<_>>();
    let (da, db) = (deg(&ga), deg(&gb));
    let mut sa = da.clone();
    let mut sb = db.clone();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return false;
    }
    fn extend(i: usize, map: &mut Vec<usize>, used: &mut u64, ga: &[u64], gb: &[u64], da: &[u32], db: &[u32]) -> bool {
        if i == ga.len() {
            return true;
        }
        for t in 0..gb.len() {
            if *used >> t & 1 == 1 || da[i] != db[t] {
                continue;
            }
            let consistent = (0..i).all(|k| (ga[i] >> k & 1) == (gb[t] >> map[k] & 1));
            if consistent {
                map.push(t);
                *used |= 1 << t;
                if extend(i + 1, map, used, ga, gb, da, db) {
                    return true;
                }
                map.pop();
                *used &= !(1 << t);
            }
        }
        false
    }
    extend(0, &mut Vec::with_capacity(n), &mut 0, &ga, &gb, &da, &db)
}

/// Checks `vars` directly against the Tanner graph: elementary, exactly two
/// odd checks, pattern tallies, and isomorphism with the pattern graph.
/// Returns the sorted odd pair.
pub fn classify(adj: &Adjacency, vars: &[usize], pattern: Pattern) -> Result<[usize; 2], String> {
    if vars.len() != pattern.size() {
        return Err(format!("expected {} variables, got {}", pattern.size(), vars.len()));
    }
    let induced = Induced::new(adj, vars);
    if !induced.is_elementary() {
        return Err("some check has degree above 2".into());
    }
    let odd = induced.odd_checks();
    if odd.len() != 2 {
        return Err(format!("{} odd checks", odd.len()));
    }
    if induced.even_checks() != pattern.even_checks() {
        return Err(format!("{} even checks", induced.even_checks()));
    }
    let g = induced.variable_graph(vars);
    if !pattern.graphs().iter().any(|p| isomorphic(vars.len(), &g, p)) {
        return Err(format!("variable graph is not the {pattern} pattern"));
    }
    Ok([odd[0], odd[1]])
}

fn make_entry(adj: &Adjacency, side: Side, pattern: Pattern, vars: &BTreeSet<usize>) -> Option<TrappingSetEntry> {
    let v: Vec<usize> = vars.iter().copied().collect();
    classify(adj, &v, pattern).ok().map(|odd| TrappingSetEntry {
        side,
        pattern,
        variables: v,
        odd,
    })
}

/// Edge of a cycle: a check with its two cycle neighbours (sorted).
type CycleEdge = (usize, usize, usize);

fn cycle_edges(c: &Cycle) -> Vec<CycleEdge> {
    let m = c.vars.len();
    (0..m)
        .map(|t| {
            let (u, v) = (c.vars[t], c.vars[(t + 1) % m]);
            (c.checks[t], u.min(v), u.max(v))
        })
        .collect()
}

fn edge_index(cycles: &[Cycle]) -> HashMap<CycleEdge, Vec<usize>> {
    let mut idx: HashMap<CycleEdge, Vec<usize>> = HashMap::new();
    for (i, c) in cycles.iter().enumerate() {
        for e in cycle_edges(c) {
            idx.entry(e).or_default().push(i);
        }
    }
    idx
}

fn six_two(
    adj: &Adjacency,
    side: Side,
    cycles: &[Cycle],
    idx: &HashMap<CycleEdge, Vec<usize>>,
) -> Vec<TrappingSetEntry> {
    let candidates: HashSet<BTreeSet<usize>> = idx
        .par_iter()
        .flat_map_iter(|(_, ids)| {
            let mut out = Vec::new();
            for (a, &i) in ids.iter().enumerate() {
                for &j in &ids[a + 1..] {
                    let u: BTreeSet<usize> = cycles[i].vars.iter().chain(&cycles[j].vars).copied().collect();
                    if u.len() == 6 {
                        out.push(u);
                    }
                }
            }
            out
        })
        .collect();
    candidates
        .into_par_iter()
        .filter_map(|v| make_entry(adj, side, Pattern::Six, &v))
        .collect()
}

fn twelve_candidates(cycles: &[Cycle], idx: &HashMap<CycleEdge, Vec<usize>>) -> HashSet<BTreeSet<usize>> {
    // squares sharing exactly one edge and no other variable
    let neighbours: Vec<Vec<usize>> = cycles
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let mut out = BTreeSet::new();
            for e in cycle_edges(c) {
                for &j in &idx[&e] {
                    let shared = cycles[j].vars.iter().filter(|v| c.vars.contains(v)).count();
                    if j != i && shared == 2 {
                        out.insert(j);
                    }
                }
            }
            out.into_iter().collect()
        })
        .collect();

    fn chain(
        cycles: &[Cycle],
        neighbours: &[Vec<usize>],
        path: &mut Vec<usize>,
        vars: &mut BTreeSet<usize>,
        out: &mut Vec<BTreeSet<usize>>,
    ) {
        if path.len() == 5 {
            out.push(vars.clone());
            return;
        }
        let last = *path.last().expect("non-empty chain");
        let prev = path.len().checked_sub(2).map(|k| path[k]);
        for &next in &neighbours[last] {
            if path.contains(&next) {
                continue;
            }
            // the shared rung must not touch the previous square
            if let Some(pr) = prev {
                if cycles[next].vars.iter().any(|v| cycles[pr].vars.contains(v)) {
                    continue;
                }
            }
            let fresh: Vec<usize> = cycles[next]
                .vars
                .iter()
                .copied()
                .filter(|v| !vars.contains(v))
                .collect();
            if fresh.len() != 2 {
                continue;
            }
            path.push(next);
            vars.extend(&fresh);
            chain(cycles, neighbours, path, vars, out);
            for v in &fresh {
                vars.remove(v);
            }
            path.pop();
        }
    }

    (0..cycles.len())
        .into_par_iter()
        .flat_map_iter(|start| {
            let mut out = Vec::new();
            let mut vars: BTreeSet<usize> = cycles[start].vars.iter().copied().collect();
            chain(cycles, &neighbours, &mut vec![start], &mut vars, &mut out);
            out
        })
        .collect()
}

fn twelve_two(
    adj: &Adjacency,
    side: Side,
    cycles: &[Cycle],
    idx: &HashMap<CycleEdge, Vec<usize>>,
) -> Vec<TrappingSetEntry> {
    let candidates = twelve_candidates(cycles, idx);
    candidates
        .into_par_iter()
        .filter_map(|v| make_entry(adj, side, Pattern::Twelve, &v))
        .collect()
}

fn eight_two(adj: &Adjacency, side: Side, six: &[TrappingSetEntry]) -> Vec<TrappingSetEntry> {
    let candidates: HashSet<BTreeSet<usize>> = six
        .par_iter()
        .flat_map_iter(|e| {
            let inside: BTreeSet<usize> = e.variables.iter().copied().collect();
            let outside = |c: usize| -> Vec<usize> {
                adj.check_vars[c]
                    .iter()
                    .map(|&v| v as usize)
                    .filter(|v| !inside.contains(v))
                    .collect()
            };
            let (a, b) = (outside(e.odd[0]), outside(e.odd[1]));
            let mut out = Vec::new();
            for &x in &a {
                for &y in &b {
                    let shares_check = x != y && adj.var_checks[x].iter().any(|c| adj.var_checks[y].contains(c));
                    if shares_check {
                        let mut v = inside.clone();
                        v.insert(x);
                        v.insert(y);
                        out.push(v);
                    }
                }
            }
            out
        })
        .collect();
    candidates
        .into_par_iter()
        .filter_map(|v| make_entry(adj, side, Pattern::EightPath, &v))
        .collect()
}

/// Library for one side of a code. The `(8,2)` pattern is grown from the
/// `(6,2)` entries, which are computed even if not requested.
pub fn build_library(spec: &CodeSpec, side: Side, patterns: &[Pattern]) -> Vec<TrappingSetEntry> {
    let adj = Adjacency::from_matrix(&spec.active_matrix(side));
    let cycles = enumerate_cycles(spec, 8, side);
    let idx = edge_index(&cycles);
    let want = |p: Pattern| patterns.contains(&p);
    let six = if want(Pattern::Six) || want(Pattern::EightPath) {
        six_two(&adj, side, &cycles, &idx)
    } else {
        Vec::new()
    };
    let mut out = Vec::new();
    if want(Pattern::EightPath) {
        out.extend(eight_two(&adj, side, &six));
    }
    if want(Pattern::Twelve) {
        out.extend(twelve_two(&adj, side, &cycles, &idx));
    }
    if want(Pattern::Six) {
        out.extend(six);
    }
    out.sort_unstable();
    out.dedup_by(|a, b| a.side == b.side && a.variables == b.variables);
    out
}

/// Both sides, all requested patterns.
pub fn build_full_library(spec: &CodeSpec, patterns: &[Pattern]) -> Vec<TrappingSetEntry> {
    let mut out: Vec<_> = Side::BOTH
        .iter()
        .flat_map(|&s| build_library(spec, s, patterns))
        .collect();
    out.sort_unstable();
    out
}

pub fn count(library: &[TrappingSetEntry], side: Side, pattern: Pattern) -> usize {
    library
        .iter()
        .filter(|e| e.side == side && e.pattern == pattern)
        .count()
}

/// Re-checks every entry against the Tanner graphs of `spec`.
pub fn verify_library(spec: &CodeSpec, library: &[TrappingSetEntry]) -> Result<(), EtsError> {
    let adj: HashMap<Side, Adjacency> = Side::BOTH
        .iter()
        .map(|&s| (s, Adjacency::from_matrix(&spec.active_matrix(s))))
        .collect();
    let mut seen = HashSet::new();
    for (i, e) in library.iter().enumerate() {
        let odd = classify(&adj[&e.side], &e.variables, e.pattern).map_err(|m| EtsError::Invalid(i, m))?;
        if odd != e.odd {
            return Err(EtsError::Invalid(i, "stored odd pair differs".into()));
        }
        if !seen.insert((e.side, e.variables.clone())) {
            return Err(EtsError::Invalid(i, "duplicate variable set".into()));
        }
    }
    Ok(())
}

/// Entries grouped by side and unordered odd-check pair.
#[derive(Debug, Clone, Default)]
pub struct OddPairIndex {
    map: HashMap<(Side, [usize; 2]), Vec<usize>>,
}

impl OddPairIndex {
    pub fn get(&self, side: Side, c0: usize, c1: usize) -> &[usize] {
        self.map
            .get(&(side, [c0.min(c1), c0.max(c1)]))
            .map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

pub fn index_by_odd_pair(library: &[TrappingSetEntry]) -> OddPairIndex {
    let mut map: HashMap<(Side, [usize; 2]), Vec<usize>> = HashMap::new();
    for (i, e) in library.iter().enumerate() {
        map.entry((e.side, e.odd)).or_default().push(i);
    }
    OddPairIndex { map }
}

pub fn write_library(library: &[TrappingSetEntry]) -> String {
    library
        .iter()
        .map(|e| serde_json::to_string(e).expect("entries always serialise") + "\n")
        .collect()
}

pub fn read_library(text: &str) -> Result<Vec<TrappingSetEntry>, EtsError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| serde_json::from_str(l).map_err(|source| EtsError::Parse { line: i + 1, source }))
        .collect()
}


#[cfg(test)]
mod instance_tests {
    use super::*;

    #[test]
    fn reference_library_counts() {
        let spec = CodeSpec::reference();
        let lib = build_full_library(&spec, &Pattern::ALL);
        let got: Vec<usize> = Side::BOTH
            .iter()
            .flat_map(|&s| Pattern::ALL.map(|p| count(&lib, s, p)))
            .collect();
        verify_library(&spec, &lib).unwrap();
        // exhaustive: every union of five chained 8-cycles with b = 2
        assert_eq!(got, vec![48, 64, 48, 16, 0, 0]);
        let six: Vec<&TrappingSetEntry> = lib.iter().filter(|e| e.pattern == Pattern::Six).collect();
        for e in lib.iter().filter(|e| e.pattern == Pattern::EightPath) {
            assert!(six
                .iter()
                .any(|s| s.side == e.side && s.variables.iter().all(|v| e.variables.contains(v))));
        }
        let idx = index_by_odd_pair(&lib);
        for (i, e) in lib.iter().enumerate() {
            assert!(idx.get(e.side, e.odd[1], e.odd[0]).contains(&i));
        }
    }
}
