//! Short cycles in the active Tanner graphs.
//!
//! A block walk visits positions `p1, .., p2m` of the active block grid,
//! with `p1, p2` sharing a row, `p2, p3` sharing a column, and so on. Its
//! cycle word is `B(p1) B(p2)^-1 B(p3) .. B(p2m)^-1`; the fixed points of the
//! reduced word are exactly the variables in block column of `p1` from which
//! the lifted walk closes up.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::affine::{AffinePerm, Exponent, PermWord};
use crate::code::{CodeSpec, Side};
use crate::gf2::{Adjacency, BinMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WalkError {
    #[error("a block walk needs an even length of at least 4, got {0}")]
    Length(usize),
    #[error("positions {0} and {1} do not share a {2}")]
    NotAdjacent(usize, usize, &'static str),
    #[error("walk backtracks at position {0}")]
    Backtrack(usize),
    #[error("block ({0}, {1}) is outside the active grid")]
    OutOfRange(usize, usize),
}

/// A closed non-backtracking walk on the block grid. Rows are parent block
/// row indices; columns lie in `0..L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockWalk {
    positions: Vec<(usize, usize)>,
}

impl BlockWalk {
    pub fn new(positions: Vec<(usize, usize)>) -> Result<Self, WalkError> {
        let len = positions.len();
        if len < 4 || !len.is_multiple_of(2) {
            return Err(WalkError::Length(len));
        }
        for t in 0..len {
            let (a, b) = (positions[t], positions[(t + 1) % len]);
            let (shared, kind) = if t % 2 == 0 {
                (a.0 == b.0 && a.1 != b.1, "row")
            } else {
                (a.1 == b.1 && a.0 != b.0, "column")
            };
            if !shared {
                return Err(WalkError::NotAdjacent(t, (t + 1) % len, kind));
            }
        }
        // position t+1 may not undo position t-1
        for t in 0..len {
            if positions[(t + len - 1) % len] == positions[(t + 1) % len] {
                return Err(WalkError::Backtrack(t));
            }
        }
        Ok(Self { positions })
    }

    /// Builds the walk through rows `r_1..r_m` and columns `c_1..c_m`:
    /// `(r1,c1), (r1,c2), (r2,c2), (r2,c3), .., (rm,c1)`.
    pub fn from_rows_cols(rows: &[usize], cols: &[usize]) -> Result<Self, WalkError> {
        let m = rows.len();
        if cols.len() != m {
            return Err(WalkError::Length(2 * m.min(cols.len())));
        }
        let mut positions = Vec::with_capacity(2 * m);
        for t in 0..m {
            positions.push((rows[t], cols[t]));
            positions.push((rows[t], cols[(t + 1) % m]));
        }
        Self::new(positions)
    }

    pub fn positions(&self) -> &[(usize, usize)] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

pub fn cycle_word(walk: &BlockWalk, spec: &CodeSpec, side: Side) -> Result<PermWord, WalkError> {
    let factors = walk
        .positions
        .iter()
        .enumerate()
        .map(|(t, &(r, c))| {
            if !spec.active().contains(&r) || c >= spec.l() {
                return Err(WalkError::OutOfRange(r, c));
            }
            let exp = if t % 2 == 0 { Exponent::Plus } else { Exponent::Minus };
            Ok((spec.block_map(side, r, c), exp))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PermWord::new(factors).expect("blocks share the lift size"))
}

/// Block maps of the active grid with their inverses, indexed by
/// `[active row index][column]`.
struct BlockTable {
    maps: Vec<Vec<AffinePerm>>,
    inverses: Vec<Vec<AffinePerm>>,
}

impl BlockTable {
    fn new(spec: &CodeSpec, side: Side) -> Self {
        let maps: Vec<Vec<AffinePerm>> = spec
            .active()
            .iter()
            .map(|&r| (0..spec.l()).map(|c| spec.block_map(side, r, c)).collect())
            .collect();
        let inverses = maps
            .iter()
            .map(|row| row.iter().map(AffinePerm::invert).collect())
            .collect();
        Self { maps, inverses }
    }
}

/// Proper colourings of a cycle of length `m` with `k` colours, i.e. all
/// cyclic sequences with distinct neighbours.
fn cyclic_sequences(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            if cur[m - 1] != cur[0] {
                out.push(cur.clone());
            }
            return;
        }
        for c in 0..k {
            if cur.last() != Some(&c) {
                cur.push(c);
                rec(m, k, cur, out);
                cur.pop();
            }
        }
    }
    if m >= 2 && k >= 2 {
        rec(m, k, &mut cur, &mut out);
    }
    out
}

/// Number of lifted closed walks over the given row/column sequences that
/// visit `2m` distinct nodes.
fn simple_lifts(table: &BlockTable, rows: &[usize], cols: &[usize], p: u64) -> u64 {
    let m = rows.len();
    // reduced cycle word, accumulated as composite of B(p1) B(p2)^-1 ..
    let mut w = AffinePerm::identity(p);
    for t in 0..m {
        let (r, c0, c1) = (rows[t], cols[t], cols[(t + 1) % m]);
        w = w.compose(&table.maps[r][c0]).expect("shared modulus");
        w = w.compose(&table.inverses[r][c1]).expect("shared modulus");
    }
    if w.fixed_point_count() == 0 {
        return 0;
    }
    let mut count = 0;
    let mut checks = Vec::with_capacity(m);
    let mut vars = Vec::with_capacity(m);
    for y0 in w.fixed_points() {
        checks.clear();
        vars.clear();
        let mut y = y0;
        for t in 0..m {
            let (r, c0, c1) = (rows[t], cols[t], cols[(t + 1) % m]);
            vars.push((c0, y));
            let x = table.inverses[r][c0].apply(y);
            checks.push((r, x));
            y = table.maps[r][c1].apply(x);
        }
        debug_assert_eq!(y, y0);
        let distinct = |v: &Vec<(usize, u64)>| (0..v.len()).all(|i| (i + 1..v.len()).all(|j| v[i] != v[j]));
        if distinct(&checks) && distinct(&vars) {
            count += 1;
        }
    }
    count
}

/// Exact number of simple cycles of `length` in the active Tanner graph of
/// `side`. Every simple lifted cycle arises from `length` rooted, oriented
/// block walks, one per starting variable and direction.
pub fn count_lifted_cycles(spec: &CodeSpec, length: usize, side: Side) -> u64 {
    assert!(
        length >= 4 && length.is_multiple_of(2),
        "cycle length must be even and >= 4"
    );
    let m = length / 2;
    let table = BlockTable::new(spec, side);
    let p = spec.p();
    let row_seqs = cyclic_sequences(m, spec.j());
    let col_seqs = cyclic_sequences(m, spec.l());
    let total: u64 = row_seqs
        .par_iter()
        .map(|rows| {
            col_seqs
                .par_iter()
                .map(|cols| simple_lifts(&table, rows, cols, p))
                .sum::<u64>()
        })
        .sum();
    debug_assert_eq!(total % length as u64, 0);
    total / length as u64
}

/// An explicit simple cycle: variables and checks in traversal order,
/// `vars[t] - checks[t] - vars[t+1]`. Indices are global within the active
/// matrix (variable `col * P + y`, check `row_position * P + x`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cycle {
    pub vars: Vec<usize>,
    pub checks: Vec<usize>,
}

/// Every simple cycle of `length` in the active Tanner graph of `side`,
/// each listed once (rooted at its smallest variable, orientation fixed by
/// the smaller neighbour).
pub fn enumerate_cycles(spec: &CodeSpec, length: usize, side: Side) -> Vec<Cycle> {
    assert!(
        length >= 4 && length.is_multiple_of(2),
        "cycle length must be even and >= 4"
    );
    let m = length / 2;
    let table = BlockTable::new(spec, side);
    let p = spec.p();
    let pz = spec.lift();
    let row_seqs = cyclic_sequences(m, spec.j());
    let col_seqs = cyclic_sequences(m, spec.l());
    let mut out: Vec<Cycle> = row_seqs
        .par_iter()
        .flat_map_iter(|rows| col_seqs.iter().map(move |cols| (rows, cols)))
        .flat_map_iter(|(rows, cols)| {
            let mut w = AffinePerm::identity(p);
            for t in 0..m {
                let (r, c0, c1) = (rows[t], cols[t], cols[(t + 1) % m]);
                w = w.compose(&table.maps[r][c0]).expect("shared modulus");
                w = w.compose(&table.inverses[r][c1]).expect("shared modulus");
            }
            let mut found = Vec::new();
            if w.fixed_point_count() == 0 {
                return found;
            }
            for y0 in w.fixed_points() {
                let mut vars = Vec::with_capacity(m);
                let mut checks = Vec::with_capacity(m);
                let mut y = y0;
                for t in 0..m {
                    let (r, c0, c1) = (rows[t], cols[t], cols[(t + 1) % m]);
                    vars.push(c0 * pz + y as usize);
                    let x = table.inverses[r][c0].apply(y);
                    checks.push(r * pz + x as usize);
                    y = table.maps[r][c1].apply(x);
                }
                let distinct = |v: &Vec<usize>| (0..v.len()).all(|i| (i + 1..v.len()).all(|j| v[i] != v[j]));
                if !(vars.iter().all(|&v| v >= vars[0]) && distinct(&vars) && distinct(&checks)) {
                    continue;
                }
                let rev_vars: Vec<usize> = std::iter::once(vars[0])
                    .chain(vars[1..].iter().rev().copied())
                    .collect();
                let rev_checks: Vec<usize> = checks.iter().rev().copied().collect();
                if (&vars, &checks) < (&rev_vars, &rev_checks) {
                    found.push(Cycle { vars, checks });
                }
            }
            found
        })
        .collect();
    out.sort_unstable_by(|a, b| (&a.vars, &a.checks).cmp(&(&b.vars, &b.checks)));
    out
}

/// `half * |Delta ∩ (Delta+1) ∩ (Delta+2)|`.
pub fn block_8cycle_count(delta: &BTreeSet<usize>, half: usize) -> usize {
    (0..half)
        .filter(|&r| (0..3).all(|c| delta.contains(&((r + half - c) % half))))
        .count()
        * half
}

/// Length of the shortest cycle in the Tanner graph of `h`, or `None` if it
/// is a forest.
pub fn bfs_girth(h: &BinMatrix) -> Option<usize> {
    let adj = Adjacency::from_matrix(h);
    let nv = adj.num_vars();
    let nc = adj.num_checks();
    // node ids: variables 0..nv, checks nv..nv+nc
    let neighbours = |u: usize| -> &[u32] {
        if u < nv {
            &adj.var_checks[u]
        } else {
            &adj.check_vars[u - nv]
        }
    };
    let node = |u: usize, v: usize| if u < nv { nv + v } else { v };
    (0..nv)
        .into_par_iter()
        .filter_map(|root| {
            let mut dist = vec![u32::MAX; nv + nc];
            let mut parent = vec![usize::MAX; nv + nc];
            let mut queue = VecDeque::new();
            dist[root] = 0;
            queue.push_back(root);
            let mut best: Option<usize> = None;
            while let Some(u) = queue.pop_front() {
                if let Some(b) = best {
                    if 2 * dist[u] as usize + 1 >= b {
                        break;
                    }
                }
                for &raw in neighbours(u) {
                    let v = node(u, raw as usize);
                    if dist[v] == u32::MAX {
                        dist[v] = dist[u] + 1;
                        parent[v] = u;
                        queue.push_back(v);
                    } else if parent[u] != v {
                        let len = (dist[u] + dist[v] + 1) as usize;
                        best = Some(best.map_or(len, |b| b.min(len)));
                    }
                }
            }
            best
        })
        .min()
}

/// Girth of one side: cycle counts for lengths 4, 6, 8 first, then a
/// breadth-first search of the explicit graph.
pub fn side_girth(spec: &CodeSpec, side: Side) -> Option<usize> {
    for length in [4, 6, 8] {
        if count_lifted_cycles(spec, length, side) > 0 {
            return Some(length);
        }
    }
    bfs_girth(&spec.active_matrix(side))
}

/// `min` over both sides; `None` means neither graph has a cycle.
pub fn girth(spec: &CodeSpec) -> Option<usize> {
    Side::BOTH.iter().filter_map(|&s| side_girth(spec, s)).min()
}

/// Brute-force count of simple cycles of `length` in the Tanner graph of
/// `h`: every cycle is rooted at its smallest variable and counted in both
/// directions.
pub fn brute_force_cycle_count(h: &BinMatrix, length: usize) -> u64 {
    let adj = Adjacency::from_matrix(h);
    let nv = adj.num_vars();
    let m = length / 2;
    fn extend(
        adj: &Adjacency,
        root: usize,
        var: usize,
        depth: usize,
        m: usize,
        used_v: &mut Vec<usize>,
        used_c: &mut Vec<usize>,
    ) -> u64 {
        let mut total = 0;
        for &c in &adj.var_checks[var] {
            let c = c as usize;
            if used_c.contains(&c) {
                continue;
            }
            used_c.push(c);
            for &v in &adj.check_vars[c] {
                let v = v as usize;
                if v == var {
                    continue;
                }
                if depth + 1 == m {
                    total += (v == root) as u64;
                } else if v > root && !used_v.contains(&v) {
                    used_v.push(v);
                    total += extend(adj, root, v, depth + 1, m, used_v, used_c);
                    used_v.pop();
                }
            }
            used_c.pop();
        }
        total
    }
    let oriented: u64 = (0..nv)
        .into_par_iter()
        .map(|root| extend(&adj, root, root, 0, m, &mut vec![root], &mut Vec::new()))
        .sum();
    oriented / 2
}

/// One line of the cycle census.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRow {
    pub length: usize,
    pub side: Side,
    /// Block-level count where a closed formula exists (length 8).
    pub block_count: Option<usize>,
    pub lifted: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleCensus {
    pub rows: Vec<CensusRow>,
}

pub fn census(spec: &CodeSpec, lengths: &[usize]) -> CycleCensus {
    let mut rows = Vec::new();
    for &length in lengths {
        for side in Side::BOTH {
            let block_count =
                (length == 8 && spec.is_standard_active()).then(|| block_8cycle_count(&spec.delta(), spec.half()));
            rows.push(CensusRow {
                length,
                side,
                block_count,
                lifted: count_lifted_cycles(spec, length, side),
            });
        }
    }
    CycleCensus { rows }
}

impl fmt::Display for CycleCensus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>6}  {:>4}  {:>11}  {:>10}",
            "length", "side", "block-level", "lifted"
        )?;
        for r in &self.rows {
            let block = r.block_count.map_or("-".to_string(), |b| b.to_string());
            writeln!(f, "{:>6}  {:>4}  {:>11}  {:>10}", r.length, r.side, block, r.lifted)?;
        }
        Ok(())
    }
}


#[cfg(test)]
mod instance_tests {
    use super::*;

    #[test]
    fn reference_cycle_counts() {
        let spec = CodeSpec::reference();
        for side in Side::BOTH {
            assert_eq!(count_lifted_cycles(&spec, 4, side), 0);
            assert_eq!(count_lifted_cycles(&spec, 6, side), 0);
        }
        let x = count_lifted_cycles(&spec, 8, Side::X);
        let z = count_lifted_cycles(&spec, 8, Side::Z);
        assert_eq!((x, z), (60_512, 54_656));
        assert_eq!(girth(&spec), Some(8));
    }
}
