//! Latent-based distance bounds.
//!
//! A coefficient vector `u` over the latent rows of one side lifts to
//! `x = u^T Ht`, which satisfies the opposing active checks exactly when `u`
//! lies in the kernel of the opposing product (`H_Z Ht_X^T` for X). Lifts
//! outside the row space of the same-side active matrix are logical
//! operators, so their weights bound the distance from above.
//!
//! When every block preserves the cosets `{t, t+s, t+2s, ..}` of a stride
//! `s`, kernel generators can be taken as coset indicators and all weights
//! can be computed on vectors compressed to one bit per coset.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::affine::AffinePerm;
use crate::code::{CodeSpec, CssPair, Side};
use crate::gf2::{BinMatrix, BinVector, RowSpace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatDistError {
    #[error("coefficient vector has length {got}, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("coefficient vector is outside the latent kernel")]
    NotInKernel,
}

/// A latent lift with its classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatentWitness {
    pub side: Side,
    pub coeff: BinVector,
    pub lift: BinVector,
    pub weight: usize,
    pub logical: bool,
}

/// True if every `f_i`, `g_j` maps each coset `t + sZ` of `Z_P` onto a
/// coset.
pub fn verify_block_preservation(spec: &CodeSpec, stride: usize) -> bool {
    let p = spec.lift();
    if stride == 0 || !p.is_multiple_of(stride) {
        return false;
    }
    let preserves = |f: &AffinePerm| {
        (0..stride).all(|t| {
            let r = f.apply(t as u64) as usize % stride;
            (t..p).step_by(stride).all(|x| f.apply(x as u64) as usize % stride == r)
        })
    };
    spec.f().iter().chain(spec.g()).all(preserves)
}

/// Per-side matrices and row spaces, built once.
pub struct LatentContext<'a> {
    spec: &'a CodeSpec,
    pair: &'a CssPair,
    product: [BinMatrix; 2],
    row_space: [RowSpace; 2],
}

fn slot(side: Side) -> usize {
    match side {
        Side::X => 0,
        Side::Z => 1,
    }
}

impl<'a> LatentContext<'a> {
    pub fn new(spec: &'a CodeSpec, pair: &'a CssPair) -> Self {
        let product = |side: Side| {
            pair.active(side.other())
                .mul(&pair.latent(side).transpose())
                .expect("column counts agree")
        };
        let ((px, pz), (rx, rz)) = rayon::join(
            || (product(Side::X), product(Side::Z)),
            || {
                rayon::join(
                    || RowSpace::new(pair.active(Side::X)),
                    || RowSpace::new(pair.active(Side::Z)),
                )
            },
        );
        Self {
            spec,
            pair,
            product: [px, pz],
            row_space: [rx, rz],
        }
    }

    pub fn spec(&self) -> &CodeSpec {
        self.spec
    }

    /// `H_Z Ht_X^T` for X, `H_X Ht_Z^T` for Z.
    pub fn opposing_product(&self, side: Side) -> &BinMatrix {
        &self.product[slot(side)]
    }

    pub fn coeff_len(&self, side: Side) -> usize {
        self.pair.latent(side).rows()
    }

    pub fn kernel_dim(&self, side: Side) -> usize {
        let m = self.opposing_product(side);
        m.cols() - m.rank()
    }

    pub fn lift(&self, side: Side, coeff: &BinVector) -> Result<LatentWitness, LatDistError> {
        let n = self.coeff_len(side);
        if coeff.len() != n {
            return Err(LatDistError::Length {
                expected: n,
                got: coeff.len(),
            });
        }
        let check = self.opposing_product(side).mul_vec(coeff).expect("length checked");
        if !check.is_zero() {
            return Err(LatDistError::NotInKernel);
        }
        let lift = self.pair.latent(side).left_mul_vec(coeff).expect("length checked");
        let logical = !self.row_space[slot(side)].contains(&lift);
        Ok(LatentWitness {
            side,
            coeff: coeff.clone(),
            weight: lift.weight(),
            lift,
            logical,
        })
    }

    /// Indicator of coset `t` (mod `stride`) in latent block row `block`.
    pub fn coset_generator(&self, side: Side, block: usize, t: usize, stride: usize) -> BinVector {
        let p = self.spec.lift();
        let support: Vec<usize> = (t..p).step_by(stride).map(|x| block * p + x).collect();
        BinVector::from_support(self.coeff_len(side), &support)
    }

    /// Coset generators of the latent kernel if they exist for this stride
    /// and span it; `None` otherwise.
    pub fn coset_kernel(&self, side: Side, stride: usize) -> Option<Vec<BinVector>> {
        let p = self.spec.lift();
        if stride == 0 || !p.is_multiple_of(stride) {
            return None;
        }
        let blocks = self.coeff_len(side) / p;
        let gens: Vec<BinVector> = (0..blocks)
            .flat_map(|b| (0..stride).map(move |t| (b, t)))
            .map(|(b, t)| self.coset_generator(side, b, t, stride))
            .collect();
        let m = self.opposing_product(side);
        let all_in = gens.par_iter().all(|g| m.mul_vec(g).expect("length").is_zero());
        // disjoint supports make them independent
        (all_in && gens.len() == self.kernel_dim(side)).then_some(gens)
    }

    /// Basis of the latent kernel: coset generators when available,
    /// otherwise an elimination basis.
    pub fn latent_kernel(&self, side: Side, stride: usize) -> Vec<BinVector> {
        self.coset_kernel(side, stride)
            .unwrap_or_else(|| self.opposing_product(side).nullspace())
    }

    /// Compresses a lift to one bit per coset of each column block, if the
    /// lift is a union of whole cosets.
    pub fn compress(&self, lift: &BinVector, stride: usize) -> Option<BinVector> {
        let p = self.spec.lift();
        let blocks = lift.len() / p;
        let mut out = BinVector::zeros(blocks * stride);
        for c in lift.support() {
            let (blk, x) = (c / p, c % p);
            if x < stride {
                out.set(blk * stride + x, true);
            }
            if !lift.get(blk * p + (x + stride) % p) {
                return None;
            }
        }
        Some(out)
    }
}

/// Result of a compressed combination scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComboScan {
    pub side: Side,
    pub stride: usize,
    pub generators: usize,
    pub max_combo: usize,
    /// Minimum lifted weight over combinations with a nonzero lift.
    pub min_weight: Option<usize>,
    pub combinations: u64,
    pub zero_lifts: u64,
    pub exhaustive: bool,
    /// Lifted weight histogram of single generators.
    pub single_weights: BTreeMap<usize, usize>,
}

/// Minimum lifted weight over all nonzero combinations of at most
/// `max_combo` (<= 3) coset generators, computed in the compressed space.
/// `None` if the coset structure is unavailable.
pub fn compressed_min_weight(ctx: &LatentContext, side: Side, stride: usize, max_combo: usize) -> Option<ComboScan> {
    if !verify_block_preservation(ctx.spec, stride) {
        return None;
    }
    let gens = ctx.coset_kernel(side, stride)?;
    let scale = ctx.spec.lift() / stride;
    let compressed: Vec<BinVector> = gens
        .par_iter()
        .map(|g| {
            let lift = ctx.pair.latent(side).left_mul_vec(g).expect("length");
            ctx.compress(&lift, stride)
        })
        .collect::<Option<Vec<_>>>()?;
    let words: Vec<&[u64]> = compressed.iter().map(|v| v.words()).collect();
    let n = words.len();
    let mut single_weights = BTreeMap::new();
    for v in &compressed {
        *single_weights.entry(scale * v.weight()).or_insert(0) += 1;
    }

    let order = max_combo.min(3);
    let popxor = |a: &[u64], b: &[u64]| -> Vec<u64> { a.iter().zip(b).map(|(x, y)| x ^ y).collect() };
    let weight = |v: &[u64]| v.iter().map(|w| w.count_ones() as usize).sum::<usize>();
    // (min nonzero weight, combinations, zero lifts)
    type Acc = (usize, u64, u64);
    let fold = |acc: Acc, w: usize| -> Acc {
        if w == 0 {
            (acc.0, acc.1 + 1, acc.2 + 1)
        } else {
            (acc.0.min(w), acc.1 + 1, acc.2)
        }
    };
    let merge = |a: Acc, b: Acc| (a.0.min(b.0), a.1 + b.1, a.2 + b.2);
    let empty: Acc = (usize::MAX, 0, 0);

    let result = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = empty;
            if order >= 1 {
                acc = fold(acc, weight(words[i]));
            }
            if order >= 2 {
                for j in i + 1..n {
                    let ij = popxor(words[i], words[j]);
                    acc = fold(acc, weight(&ij));
                    if order >= 3 {
                        for k in &words[j + 1..] {
                            let w: usize = ij
                                .iter()
                                .zip(k.iter())
                                .map(|(x, y)| (x ^ y).count_ones() as usize)
                                .sum();
                            acc = fold(acc, w);
                        }
                    }
                }
            }
            acc
        })
        .reduce(|| empty, merge);

    Some(ComboScan {
        side,
        stride,
        generators: n,
        max_combo: order,
        min_weight: (result.0 != usize::MAX).then(|| scale * result.0),
        combinations: result.1,
        zero_lifts: result.2,
        exhaustive: order == max_combo,
        single_weights,
    })
}

/// Distance bounds for one side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideDistance {
    pub side: Side,
    pub kernel_dim: usize,
    /// Weight of the lightest logical witness found.
    pub upper: Option<usize>,
    pub witness: Option<LatentWitness>,
    /// Certified minimum over combinations up to the stated order.
    pub scan: Option<ComboScan>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceReport {
    pub x: SideDistance,
    pub z: SideDistance,
}

impl DistanceReport {
    /// `d_min <= min(upper_X, upper_Z)`; never an equality claim.
    pub fn dmin_upper(&self) -> Option<usize> {
        match (self.x.upper, self.z.upper) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Upper bounds from the lightest logical basis lift on each side, plus a
/// compressed scan up to `max_combo` generators when the coset structure
/// exists.
pub fn latent_distance(ctx: &LatentContext, stride: usize, max_combo: usize) -> DistanceReport {
    let side_report = |side: Side| {
        let basis = ctx.latent_kernel(side, stride);
        let witness = basis
            .par_iter()
            .filter_map(|u| ctx.lift(side, u).ok())
            .filter(|w| w.logical)
            .min_by_key(|w| (w.weight, w.coeff.support()));
        let scan = if max_combo == 0 {
            None
        } else {
            compressed_min_weight(ctx, side, stride, max_combo)
        };
        SideDistance {
            side,
            kernel_dim: ctx.kernel_dim(side),
            upper: witness.as_ref().map(|w| w.weight),
            witness,
            scan,
        }
    };
    let (x, z) = rayon::join(|| side_report(Side::X), || side_report(Side::Z));
    DistanceReport { x, z }
}

impl fmt::Display for DistanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in [&self.x, &self.z] {
            let upper = s.upper.map_or("none found".to_string(), |u| u.to_string());
            writeln!(
                f,
                "side {}: kernel dim {}, latent distance <= {}",
                s.side, s.kernel_dim, upper
            )?;
            match &s.scan {
                Some(scan) => {
                    let min = scan.min_weight.map_or("-".to_string(), |w| w.to_string());
                    writeln!(
                        f,
                        "  combinations of <= {} generators (stride {}, {} generators, {} combinations, exhaustive): min lifted weight {}",
                        scan.max_combo, scan.stride, scan.generators, scan.combinations, min
                    )?;
                    writeln!(f, "  single-generator weight histogram {:?}", scan.single_weights)?;
                }
                None => writeln!(f, "  lower bound: none certified")?,
            }
        }
        match self.dmin_upper() {
            Some(d) => write!(f, "d_min <= {d}"),
            None => write!(f, "no latent logical operator found"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::build;
    use crate::code::tests::{ap, commuting_spec};

    #[test]
    fn block_preservation_examples() {
        let f = ap(1, 1, 8);
        assert!((0..2).all(|t| {
            let img: Vec<u64> = (t..8).step_by(2).map(|x| f.apply(x)).collect();
            img.iter().all(|y| y % 2 == img[0] % 2)
        }));
        let spec = commuting_spec(12, 1, 4);
        assert!(verify_block_preservation(&spec, 3));
        assert!(!verify_block_preservation(&spec, 5));
        assert!(verify_block_preservation(&CodeSpec::reference(), 192));
    }

    #[test]
    fn parent_orthogonal_rows_are_logical() {
        let spec = commuting_spec(16, 3, 12);
        let pair = build(&spec);
        let ctx = LatentContext::new(&spec, &pair);
        for side in Side::BOTH {
            assert!(ctx.opposing_product(side).is_zero());
            assert_eq!(ctx.kernel_dim(side), ctx.coeff_len(side));
        }
        let report = latent_distance(&ctx, 4, 0);
        assert!(report.dmin_upper().unwrap() <= 12);
        assert!(report.x.scan.is_none());
        let w = report.x.witness.unwrap();
        assert!(pair.hz.mul_vec(&w.lift).unwrap().is_zero());
        assert_eq!(w.logical, !pair.hx.in_row_space(&w.lift).unwrap());
    }

    #[test]
    fn zero_and_out_of_kernel_coefficients() {
        let spec = CodeSpec::reference();
        let pair = build(&spec);
        let ctx = LatentContext::new(&spec, &pair);
        let zero = ctx.lift(Side::X, &BinVector::zeros(2304)).unwrap();
        assert_eq!(zero.weight, 0);
        assert!(!zero.logical);
        let e0 = BinVector::from_support(2304, &[0]);
        assert_eq!(ctx.lift(Side::X, &e0), Err(LatDistError::NotInKernel));
        assert!(matches!(
            ctx.lift(Side::X, &BinVector::zeros(5)),
            Err(LatDistError::Length { .. })
        ));
    }
}

#[cfg(test)]
mod instance_tests {
    use super::*;
    use crate::code::{build, psi};

    #[test]
    fn reference_latent_structure() {
        let spec = CodeSpec::reference();
        let pair = build(&spec);
        let ctx = LatentContext::new(&spec, &pair);
        let p3 = psi(&spec, 3);
        assert_eq!(p3.rank() + p3.nullspace().len(), 768);
        assert_eq!(p3.nullspace().len(), 192);
        for side in Side::BOTH {
            assert_eq!(ctx.kernel_dim(side), 576);
            let gens = ctx.coset_kernel(side, 192).expect("coset generators span the kernel");
            assert_eq!(gens.len(), 576);
            for g in gens.iter().step_by(37) {
                let w = ctx.lift(side, g).unwrap();
                assert_eq!(w.weight, 48);
                assert!(w.logical);
                assert!(pair.active(side.other()).mul_vec(&w.lift).unwrap().is_zero());
                let c = ctx.compress(&w.lift, 192).unwrap();
                assert_eq!(4 * c.weight(), w.weight);
            }
        }
        let scan = compressed_min_weight(&ctx, Side::X, 192, 2).unwrap();
        assert_eq!(scan.combinations, 576 + 576 * 575 / 2);
        assert!(scan.min_weight.unwrap() >= 48);
        assert_eq!(scan.single_weights, [(48, 576)].into_iter().collect());
    }
}
