//! Block-circulant parent matrices built from two families of affine
//! permutations, their active/latent split, and the structural checks that
//! tie commutation patterns to orthogonality.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine::AffinePerm;
use crate::gf2::{BinMatrix, Block};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("L must be even and positive, got {0}")]
    OddL(usize),
    #[error("need 1 <= J < L/2, got J={j}, L={l}")]
    BadJ { j: usize, l: usize },
    #[error("expected {expected} {which} permutations, got {got}")]
    FamilySize {
        which: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("all permutations must act on Z_{0}")]
    Modulus(u64),
    #[error("active set must hold {j} distinct indices below {half}")]
    ActiveSet { j: usize, half: usize },
}

/// Which parity-check matrix (and hence which Tanner graph) is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    X,
    Z,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::X, Side::Z];

    pub fn other(self) -> Side {
        match self {
            Side::X => Side::Z,
            Side::Z => Side::X,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::X => "X",
            Side::Z => "Z",
        })
    }
}

/// Complete description of a code instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSpec {
    p: u64,
    j: usize,
    l: usize,
    active: Vec<usize>,
    f: Vec<AffinePerm>,
    g: Vec<AffinePerm>,
}

impl CodeSpec {
    /// `active = None` selects the standard choice `{0, .., J-1}`.
    pub fn new(
        p: u64,
        j: usize,
        l: usize,
        active: Option<Vec<usize>>,
        f: Vec<AffinePerm>,
        g: Vec<AffinePerm>,
    ) -> Result<Self, SpecError> {
        if l == 0 || !l.is_multiple_of(2) {
            return Err(SpecError::OddL(l));
        }
        let half = l / 2;
        if j == 0 || j >= half {
            return Err(SpecError::BadJ { j, l });
        }
        for (which, fam) in [("f", &f), ("g", &g)] {
            if fam.len() != half {
                return Err(SpecError::FamilySize {
                    which,
                    expected: half,
                    got: fam.len(),
                });
            }
        }
        if f.iter().chain(&g).any(|a| a.modulus() != p) {
            return Err(SpecError::Modulus(p));
        }
        let active = active.unwrap_or_else(|| (0..j).collect());
        let distinct: BTreeSet<usize> = active.iter().copied().collect();
        if active.len() != j || distinct.len() != j || active.iter().any(|&i| i >= half) {
            return Err(SpecError::ActiveSet { j, half });
        }
        Ok(Self { p, j, l, active, f, g })
    }

    /// The reference `P = 768, J = 3, L = 12` instance.
    pub fn reference() -> Self {
        const F: [(u64, u64); 6] = [(763, 435), (679, 69), (397, 330), (61, 18), (697, 612), (373, 246)];
        const G: [(u64, u64); 6] = [(289, 496), (257, 640), (625, 200), (41, 524), (193, 672), (449, 672)];
        let mk = |t: &[(u64, u64)]| {
            t.iter()
                .map(|&(a, b)| AffinePerm::new(a, b, 768).expect("table entries are units"))
                .collect()
        };
        Self::new(768, 3, 12, None, mk(&F), mk(&G)).expect("instance is well formed")
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn lift(&self) -> usize {
        self.p as usize
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn half(&self) -> usize {
        self.l / 2
    }

    pub fn n(&self) -> usize {
        self.l * self.lift()
    }

    pub fn f(&self) -> &[AffinePerm] {
        &self.f
    }

    pub fn g(&self) -> &[AffinePerm] {
        &self.g
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_standard_active(&self) -> bool {
        self.active.iter().copied().eq(0..self.j)
    }

    pub fn latent(&self) -> Vec<usize> {
        (0..self.half()).filter(|i| !self.active.contains(i)).collect()
    }

    pub fn delta(&self) -> BTreeSet<usize> {
        delta_set(&self.active, self.half())
    }

    /// The parent block at block row `i` (in `0..L/2`) and block column
    /// `col` (in `0..L`), as a grid cell.
    pub fn parent_block(&self, side: Side, i: usize, col: usize) -> Block {
        let h = self.half();
        let (right, jj) = (col >= h, col % h);
        match side {
            Side::X => {
                let idx = (jj + h - i % h) % h;
                Block::Perm(if right { self.g[idx] } else { self.f[idx] })
            }
            Side::Z => {
                let idx = (i % h + h - jj) % h;
                Block::Transposed(if right { self.f[idx] } else { self.g[idx] })
            }
        }
    }

    /// The map realised by a parent block: check `x` of block row `i` is
    /// joined to variable `map(x)` of block column `col`.
    pub fn block_map(&self, side: Side, i: usize, col: usize) -> AffinePerm {
        self.parent_block(side, i, col)
            .map()
            .expect("parent blocks are never zero")
    }

    fn grid(&self, side: Side, rows: &[usize]) -> Vec<Vec<Block>> {
        rows.iter()
            .map(|&i| (0..self.l).map(|c| self.parent_block(side, i, c)).collect())
            .collect()
    }

    pub fn matrix(&self, side: Side, block_rows: &[usize]) -> BinMatrix {
        BinMatrix::from_perm_blocks(&self.grid(side, block_rows), self.lift())
            .expect("spec invariants guarantee a consistent grid")
    }

    pub fn parent_matrix(&self, side: Side) -> BinMatrix {
        let rows: Vec<usize> = (0..self.half()).collect();
        self.matrix(side, &rows)
    }

    pub fn active_matrix(&self, side: Side) -> BinMatrix {
        self.matrix(side, &self.active)
    }

    pub fn latent_matrix(&self, side: Side) -> BinMatrix {
        self.matrix(side, &self.latent())
    }
}

/// `{(k - i) mod half : i, k in S}`.
pub fn delta_set(active: &[usize], half: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for &i in active {
        for &k in active {
            out.insert((k % half + half - i % half) % half);
        }
    }
    out
}

/// Index pairs `(i, j)` of `(f_i, g_j)` whose commutation is required, i.e.
/// `(i + j) mod half` lies in `delta`.
pub fn gamma_set(delta: &BTreeSet<usize>, half: usize) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for &r in delta {
        for u in 0..half {
            out.insert((u, (r + half - u) % half));
        }
    }
    out
}

/// Interaction matrix `sum_u F_u G_{r-u} + G_{r-u} F_u`, assembled by
/// scattering the composite permutations.
pub fn psi(spec: &CodeSpec, r: usize) -> BinMatrix {
    let h = spec.half();
    let p = spec.lift();
    let mut m = BinMatrix::zeros(p, p);
    for u in 0..h {
        let f = spec.f[u];
        let g = spec.g[(r + h - u) % h];
        // F G is the matrix of g∘f, G F the matrix of f∘g.
        let fg = g.compose(&f).expect("shared modulus");
        let gf = f.compose(&g).expect("shared modulus");
        for x in 0..p {
            m.flip(x, fg.apply(x as u64) as usize);
            m.flip(x, gf.apply(x as u64) as usize);
        }
    }
    m
}

/// Active and latent parity-check matrices with the derived code parameters.
#[derive(Debug, Clone)]
pub struct CssPair {
    pub hx: BinMatrix,
    pub hz: BinMatrix,
    pub hx_latent: BinMatrix,
    pub hz_latent: BinMatrix,
    pub n: usize,
    pub rank_x: usize,
    pub rank_z: usize,
    pub k: usize,
}

impl CssPair {
    pub fn active(&self, side: Side) -> &BinMatrix {
        match side {
            Side::X => &self.hx,
            Side::Z => &self.hz,
        }
    }

    pub fn latent(&self, side: Side) -> &BinMatrix {
        match side {
            Side::X => &self.hx_latent,
            Side::Z => &self.hz_latent,
        }
    }
}

pub fn build(spec: &CodeSpec) -> CssPair {
    let (hx, hz) = rayon::join(|| spec.active_matrix(Side::X), || spec.active_matrix(Side::Z));
    let (rank_x, rank_z) = rayon::join(|| hx.rank(), || hz.rank());
    let n = spec.n();
    CssPair {
        hx_latent: spec.latent_matrix(Side::X),
        hz_latent: spec.latent_matrix(Side::Z),
        hx,
        hz,
        n,
        rank_x,
        rank_z,
        k: n - rank_x - rank_z,
    }
}

/// Outcome of the structural checks on a built pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub k: usize,
    pub rank_x: usize,
    pub rank_z: usize,
    pub delta: Vec<usize>,
    /// `H_X H_Z^T = 0`.
    pub active_orthogonal: bool,
    /// Residues `r` with `Psi_r != 0`.
    pub psi_nonzero: Vec<usize>,
    /// Pairs `(i, j, r)` in Gamma that fail to commute.
    pub gamma_violations: Vec<(usize, usize, usize)>,
    pub psi_zero_on_delta: bool,
    pub psi_nonzero_outside_delta: bool,
    /// `H_Z Ht_X^T != 0`.
    pub latent_nonorthogonal_x: bool,
    /// `H_X Ht_Z^T != 0`.
    pub latent_nonorthogonal_z: bool,
    /// `L >= 4J` (necessary for latent non-orthogonality with the standard active set).
    pub l_at_least_4j: bool,
    /// `Delta_S` is a proper subset of `Z_{L/2}`.
    pub latent_feasible: bool,
    pub regular: bool,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.active_orthogonal
            && self.psi_zero_on_delta
            && self.psi_nonzero_outside_delta
            && self.latent_nonorthogonal_x
            && self.latent_nonorthogonal_z
            && self.latent_feasible
            && self.regular
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                out.push(msg)
            }
        };
        check(
            self.active_orthogonal,
            format!(
                "active orthogonality: H_X H_Z^T != 0; non-commuting (i,j,r): {:?}",
                self.gamma_violations
            ),
        );
        check(self.psi_zero_on_delta, "Psi_r != 0 for some r in Delta".into());
        check(
            self.psi_nonzero_outside_delta,
            "every Psi_r outside Delta vanishes".into(),
        );
        check(
            self.latent_nonorthogonal_x,
            "latent non-orthogonality: H_Z Ht_X^T = 0".into(),
        );
        check(
            self.latent_nonorthogonal_z,
            "latent non-orthogonality: H_X Ht_Z^T = 0".into(),
        );
        check(
            self.latent_feasible,
            format!("Delta covers all residues (L >= 4J: {})", self.l_at_least_4j),
        );
        check(self.regular, "row/column weights are not (L, J)".into());
        out
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |b: bool| if b { "pass" } else { "FAIL" };
        writeln!(
            f,
            "n = {}, k = {}, rank(H_X) = {}, rank(H_Z) = {}",
            self.n, self.k, self.rank_x, self.rank_z
        )?;
        writeln!(f, "Delta = {:?}", self.delta)?;
        writeln!(f, "nonzero Psi_r at r = {:?}", self.psi_nonzero)?;
        writeln!(f, "active orthogonality        {}", mark(self.active_orthogonal))?;
        if !self.gamma_violations.is_empty() {
            writeln!(f, "  non-commuting pairs in Gamma (i,j,r): {:?}", self.gamma_violations)?;
        }
        writeln!(f, "Psi_r = 0 on Delta          {}", mark(self.psi_zero_on_delta))?;
        writeln!(
            f,
            "Psi_r != 0 outside Delta    {}",
            mark(self.psi_nonzero_outside_delta)
        )?;
        writeln!(f, "H_Z Ht_X^T != 0             {}", mark(self.latent_nonorthogonal_x))?;
        writeln!(f, "H_X Ht_Z^T != 0             {}", mark(self.latent_nonorthogonal_z))?;
        writeln!(f, "L >= 4J                     {}", mark(self.l_at_least_4j))?;
        writeln!(f, "Delta != Z_(L/2)            {}", mark(self.latent_feasible))?;
        write!(f, "regularity                  {}", mark(self.regular))
    }
}

pub fn validate(pair: &CssPair, spec: &CodeSpec) -> ValidationReport {
    let h = spec.half();
    let delta = spec.delta();
    let psi_nonzero: Vec<usize> = (0..h).filter(|&r| !psi(spec, r).is_zero()).collect();
    let gamma_violations = gamma_set(&delta, h)
        .into_iter()
        .filter(|&(i, j)| !spec.f[i].commutes(&spec.g[j]).expect("shared modulus"))
        .map(|(i, j)| (i, j, (i + j) % h))
        .collect();

    let product_is_zero = |a: &BinMatrix, b: &BinMatrix| a.mul(&b.transpose()).expect("column counts agree").is_zero();
    let active_orthogonal = product_is_zero(&pair.hx, &pair.hz);
    let latent_nonorthogonal_x = !product_is_zero(&pair.hz, &pair.hx_latent);
    let latent_nonorthogonal_z = !product_is_zero(&pair.hx, &pair.hz_latent);

    let regular = [&pair.hx, &pair.hz]
        .iter()
        .all(|m| m.row_weights().iter().all(|&w| w == spec.l()) && m.col_weights().iter().all(|&w| w == spec.j()));

    ValidationReport {
        n: pair.n,
        k: pair.k,
        rank_x: pair.rank_x,
        rank_z: pair.rank_z,
        psi_zero_on_delta: psi_nonzero.iter().all(|r| !delta.contains(r)),
        psi_nonzero_outside_delta: psi_nonzero.iter().any(|r| !delta.contains(r)),
        delta: delta.iter().copied().collect(),
        psi_nonzero,
        gamma_violations,
        active_orthogonal,
        latent_nonorthogonal_x,
        latent_nonorthogonal_z,
        l_at_least_4j: spec.l() >= 4 * spec.j(),
        latent_feasible: delta.len() < h,
        regular,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn ap(a: u64, b: u64, p: u64) -> AffinePerm {
        AffinePerm::new(a, b, p).unwrap()
    }

    /// A spec whose f and g families all commute (pure shifts).
    pub(crate) fn commuting_spec(p: u64, j: usize, l: usize) -> CodeSpec {
        let h = l / 2;
        let f = (0..h).map(|i| ap(1, (3 * i as u64 + 1) % p, p)).collect();
        let g = (0..h).map(|i| ap(1, (7 * i as u64 * i as u64 + 2) % p, p)).collect();
        CodeSpec::new(p, j, l, None, f, g).unwrap()
    }

    /// Dense product oracle for `Psi_r`.
    fn psi_dense(spec: &CodeSpec, r: usize) -> BinMatrix {
        let h = spec.half();
        let mut acc = BinMatrix::zeros(spec.lift(), spec.lift());
        for u in 0..h {
            let fm = BinMatrix::from_perm(&spec.f()[u]);
            let gm = BinMatrix::from_perm(&spec.g()[(r + h - u) % h]);
            for term in [fm.mul(&gm).unwrap(), gm.mul(&fm).unwrap()] {
                for x in 0..spec.lift() {
                    for y in term.row_support(x) {
                        acc.flip(x, y);
                    }
                }
            }
        }
        acc
    }

    #[test]
    fn delta_examples() {
        let set = |v: &[usize]| v.iter().copied().collect::<BTreeSet<_>>();
        assert_eq!(delta_set(&[0, 1, 2], 6), set(&[0, 1, 2, 4, 5]));
        assert_eq!(delta_set(&[0, 2, 4], 6), set(&[0, 2, 4]));
        assert_eq!(delta_set(&[0], 9), set(&[0]));
    }

    #[test]
    fn delta_covers_everything_below_4j() {
        for half in 2..=12 {
            for j in 1..half {
                let d = delta_set(&(0..j).collect::<Vec<_>>(), half);
                if 2 * half < 4 * j {
                    assert_eq!(d.len(), half, "half={half} j={j}");
                }
            }
        }
    }

    #[test]
    fn gamma_examples() {
        let delta: BTreeSet<usize> = [0, 1, 2, 4, 5].into_iter().collect();
        let gamma = gamma_set(&delta, 6);
        let excluded = [(0, 3), (1, 2), (2, 1), (3, 0), (4, 5), (5, 4)];
        assert_eq!(gamma.len(), 30);
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(gamma.contains(&(i, j)), !excluded.contains(&(i, j)));
            }
        }
        assert!(gamma_set(&BTreeSet::new(), 6).is_empty());
        let zero: BTreeSet<usize> = [0].into_iter().collect();
        assert_eq!(gamma_set(&zero, 2), [(0, 0), (1, 1)].into_iter().collect());
    }

    #[test]
    fn spec_rejects_bad_shapes() {
        let f = vec![ap(1, 0, 5); 3];
        assert_eq!(
            CodeSpec::new(5, 1, 5, None, f.clone(), f.clone()),
            Err(SpecError::OddL(5))
        );
        assert!(matches!(
            CodeSpec::new(5, 3, 6, None, f.clone(), f.clone()),
            Err(SpecError::BadJ { .. })
        ));
        assert!(matches!(
            CodeSpec::new(5, 1, 6, Some(vec![4]), f.clone(), f.clone()),
            Err(SpecError::ActiveSet { .. })
        ));
        assert!(matches!(
            CodeSpec::new(5, 1, 6, None, f[..2].to_vec(), f.clone()),
            Err(SpecError::FamilySize { .. })
        ));
        assert_eq!(CodeSpec::new(7, 1, 6, None, f.clone(), f), Err(SpecError::Modulus(7)));
    }

    #[test]
    fn psi_matches_dense_and_parent_product() {
        // small random non-commuting spec
        let p = 12;
        let units = [1u64, 5, 7, 11];
        let f: Vec<_> = (0..4).map(|i| ap(units[i % 4], (5 * i as u64 + 3) % p, p)).collect();
        let g: Vec<_> = (0..4)
            .map(|i| ap(units[(i + 1) % 4], (7 * i as u64 + 1) % p, p))
            .collect();
        let spec = CodeSpec::new(p, 1, 8, None, f, g).unwrap();
        let hx = spec.parent_matrix(Side::X);
        let hz = spec.parent_matrix(Side::Z);
        let prod = hx.mul(&hz.transpose()).unwrap();
        let pz = spec.lift();
        for r in 0..4 {
            assert_eq!(psi(&spec, r), psi_dense(&spec, r), "r={r}");
        }
        for i in 0..4 {
            for k in 0..4 {
                assert_eq!(prod.block(i * pz, k * pz, pz, pz), psi(&spec, (k + 4 - i) % 4));
            }
        }
    }

    #[test]
    fn commuting_family_is_parent_orthogonal() {
        let spec = commuting_spec(16, 3, 12);
        for r in 0..6 {
            assert!(psi(&spec, r).is_zero());
        }
        let pair = build(&spec);
        let report = validate(&pair, &spec);
        assert!(report.active_orthogonal);
        assert!(!report.latent_nonorthogonal_x);
        assert!(!report.latent_nonorthogonal_z);
        assert!(!report.all_pass());
        assert!(spec
            .parent_matrix(Side::X)
            .mul(&spec.parent_matrix(Side::Z).transpose())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn block_circulant_rotation() {
        let spec = commuting_spec(8, 3, 12);
        let hx = spec.active_matrix(Side::X);
        let p = 8;
        for x in 0..p {
            let r0 = hx.row_support(x);
            let r1 = hx.row_support(p + x);
            let rotated: Vec<usize> = {
                let mut v: Vec<usize> = r0
                    .iter()
                    .map(|&c| {
                        let (blk, off) = (c / p, c % p);
                        let half = blk / 6;
                        (half * 6 + (blk % 6 + 1) % 6) * p + off
                    })
                    .collect();
                v.sort_unstable();
                v
            };
            assert_eq!(r1, rotated);
        }
    }

    #[test]
    fn small_l_flags_infeasibility() {
        // J = 3, L = 10 < 4J: Delta is all of Z_5
        let spec = commuting_spec(10, 3, 10);
        let report = validate(&build(&spec), &spec);
        assert!(report.active_orthogonal);
        assert!(!report.l_at_least_4j);
        assert!(!report.latent_feasible);
    }

    #[test]
    fn broken_gamma_pair_is_reported() {
        let t = CodeSpec::reference();
        let mut f = t.f().to_vec();
        f[2] = ap(f[2].a(), f[2].b() + 1, 768);
        let spec = CodeSpec::new(768, 3, 12, None, f, t.g().to_vec()).unwrap();
        let report = validate(&build(&spec), &spec);
        assert!(!report.active_orthogonal);
        assert!(!report.gamma_violations.is_empty());
        assert!(report
            .gamma_violations
            .iter()
            .all(|&(i, j, r)| i == 2 && (i + j) % 6 == r && r != 3));
        assert!(!report.psi_zero_on_delta);
    }
}

#[cfg(test)]
mod instance_tests {
    use super::*;

    #[test]
    fn reference_parameters() {
        let spec = CodeSpec::reference();
        let pair = build(&spec);
        let report = validate(&pair, &spec);
        assert_eq!(
            (report.n, report.rank_x, report.rank_z, report.k),
            (9216, 2302, 2302, 4612)
        );
        assert_eq!(report.delta, vec![0, 1, 2, 4, 5]);
        assert_eq!(report.psi_nonzero, vec![3]);
        assert!(report.all_pass(), "{report}");
        let p3 = psi(&spec, 3);
        assert_eq!(p3.rank(), 576);
    }
}
