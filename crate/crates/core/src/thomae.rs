//! Even theta characteristics as subsets of branch points, and the initial
//! data of the AGM built from them.
//!
//! For I ∈ F_2^g the set T_I ⊂ {1..2g} is the unique subset whose η-matrices
//! sum to (0; I). S_I is T_I, padded with 2g+1 when |T_I| is odd, and the
//! characteristic's branch-point split is S_I ∘ U against its complement in
//! {1..2g+1}, with U = {1, 3, …, 2g+1}. The point ∞ never enters either
//! product.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use crate::agm::MeanVector;
use crate::bits::{check_genus, BitIndex};
use crate::error::{Error, Result};
use crate::hyperelliptic::{normalized_tau, period_matrices, BranchPoints};
use crate::theta::{theta_vector, DEFAULT_THETA_ABS_TOL};

/// Products over more than this many branch points are accumulated as sums of logs.
const DIRECT_PRODUCT_MAX_POINTS: usize = 7;

/// η_j ∈ M(2, g, F_2), rows packed like `BitIndex` (column 1 is the most significant bit).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EtaMatrix {
    pub j: usize,
    pub genus: usize,
    pub top: u32,
    pub bottom: u32,
}

impl EtaMatrix {
    /// η_j for 1 ≤ j ≤ 2g+1. The top row is e_{⌈j/2⌉} (zero for j = 2g+1);
    /// the bottom row has ⌈j/2⌉ − 1 leading ones for odd j and ⌈j/2⌉ for even j.
    pub fn new(genus: usize, j: usize) -> Result<Self> {
        check_genus(genus)?;
        if !(1..=2 * genus + 1).contains(&j) {
            return Err(Error::Dimension(format!("η_{j} undefined for genus {genus}")));
        }
        let col = j.div_ceil(2);
        let top = if col <= genus { 1u32 << (genus - col) } else { 0 };
        let ones = if j % 2 == 1 { col - 1 } else { col };
        let bottom = leading_ones(genus, ones.min(genus));
        Ok(Self {
            j,
            genus,
            top,
            bottom,
        })
    }
}

fn leading_ones(genus: usize, count: usize) -> u32 {
    if count == 0 {
        0
    } else {
        ((1u32 << count) - 1) << (genus - count)
    }
}

/// T_I = ∪_{i : I_i = 1} {2i − 1, 2i}.
///
/// The top rows of η_{2i−1} and η_{2i} are both e_i, so a subset with zero
/// top-row sum must contain both or neither of each pair; and η_{2i−1} + η_{2i}
/// = (0; e_i), which makes the union above the unique solution.
pub fn t_set(index: BitIndex) -> BTreeSet<usize> {
    (1..=index.genus())
        .filter(|&i| index.bit(i) == 1)
        .flat_map(|i| [2 * i - 1, 2 * i])
        .collect()
}

/// Σ_{j ∈ set} η_j as (top, bottom).
pub fn eta_sum(genus: usize, set: &BTreeSet<usize>) -> Result<(u32, u32)> {
    let mut top = 0;
    let mut bottom = 0;
    for &j in set {
        let eta = EtaMatrix::new(genus, j)?;
        top ^= eta.top;
        bottom ^= eta.bottom;
    }
    Ok((top, bottom))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThomaePartition {
    pub index: BitIndex,
    pub t_set: BTreeSet<usize>,
    pub s_set: BTreeSet<usize>,
    /// S_I ∘ U
    pub sxu: BTreeSet<usize>,
    /// {1..2g+1} \ (S_I ∘ U)
    pub complement: BTreeSet<usize>,
}

pub fn partition(index: BitIndex) -> ThomaePartition {
    let g = index.genus();
    let t = t_set(index);
    let mut s = t.clone();
    if t.len() % 2 == 1 {
        s.insert(2 * g + 1);
    }
    let u: BTreeSet<usize> = (1..=2 * g + 1).step_by(2).collect();
    let sxu: BTreeSet<usize> = s.symmetric_difference(&u).copied().collect();
    let complement = (1..=2 * g + 1).filter(|k| !sxu.contains(k)).collect();
    ThomaePartition {
        index,
        t_set: t,
        s_set: s,
        sxu,
        complement,
    }
}

/// Π_{i<j ∈ set} (p_j − p_i).
fn pair_product(p: &BranchPoints, set: &BTreeSet<usize>, use_logs: bool) -> f64 {
    let idx: Vec<usize> = set.iter().copied().collect();
    let mut prod = 1.0;
    let mut log_sum = 0.0;
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let d = p.get(j) - p.get(i);
            if use_logs {
                log_sum += d.ln();
            } else {
                prod *= d;
            }
        }
    }
    if use_logs {
        log_sum.exp()
    } else {
        prod
    }
}

/// a_I² = Π_{i<j ∈ S_I∘U}(p_j − p_i) · Π_{i<j ∉ S_I∘U}(p_j − p_i).
pub fn squared_initial_entry(p: &BranchPoints, index: BitIndex) -> Result<f64> {
    if index.genus() != p.genus() {
        return Err(Error::Dimension(format!(
            "characteristic of genus {} for branch points of genus {}",
            index.genus(),
            p.genus()
        )));
    }
    let part = partition(index);
    let use_logs = p.points().len() > DIRECT_PRODUCT_MAX_POINTS;
    Ok(pair_product(p, &part.sxu, use_logs) * pair_product(p, &part.complement, use_logs))
}

/// The AGM initial data a_I = √(a_I²).
pub fn initial_data(p: &BranchPoints) -> Result<MeanVector> {
    let values = BitIndex::all(p.genus())?
        .map(|i| squared_initial_entry(p, i).map(f64::sqrt))
        .collect::<Result<Vec<_>>>()?;
    MeanVector::new(p.genus(), values)
}

/// Per-characteristic comparison of (2π)^{2g} θ_I(τ)⁴ / det(A)² with a_I².
#[derive(Debug, Clone, PartialEq)]
pub struct ThomaeComparison {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub residual: f64,
}

pub fn thomae_comparison(p: &BranchPoints, rel_tol: f64) -> Result<ThomaeComparison> {
    let pp = period_matrices(p, rel_tol)?;
    let tau = normalized_tau(&pp)?;
    let theta = theta_vector(&tau, DEFAULT_THETA_ABS_TOL)?;
    let g = p.genus() as i32;
    let factor = (2.0 * PI).powi(2 * g) / (pp.det_a() * pp.det_a());
    let lhs: Vec<f64> = theta.values().iter().map(|z| factor * z.re.powi(4)).collect();
    let rhs = BitIndex::all(p.genus())?
        .map(|i| squared_initial_entry(p, i))
        .collect::<Result<Vec<_>>>()?;
    let residual = lhs
        .iter()
        .zip(&rhs)
        .map(|(l, r)| ((l - r) / r).abs())
        .fold(0.0, f64::max);
    Ok(ThomaeComparison { lhs, rhs, residual })
}

/// max_I relative error of Thomae's formula on the period pipeline.
pub fn thomae_residual(p: &BranchPoints, rel_tol: f64) -> Result<f64> {
    Ok(thomae_comparison(p, rel_tol)?.residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    fn idx(s: &str) -> BitIndex {
        s.parse().unwrap()
    }

    #[test]
    fn eta_rows_match_printed_pattern() {
        // genus 3: η_3 = (010; 100), η_4 = (010; 110), η_6 = (001; 111)
        let e3 = EtaMatrix::new(3, 3).unwrap();
        assert_eq!((e3.top, e3.bottom), (0b010, 0b100));
        let e4 = EtaMatrix::new(3, 4).unwrap();
        assert_eq!((e4.top, e4.bottom), (0b010, 0b110));
        let e6 = EtaMatrix::new(3, 6).unwrap();
        assert_eq!((e6.top, e6.bottom), (0b001, 0b111));
        let e1 = EtaMatrix::new(3, 1).unwrap();
        assert_eq!((e1.top, e1.bottom), (0b100, 0b000));
        let e7 = EtaMatrix::new(3, 7).unwrap();
        assert_eq!((e7.top, e7.bottom), (0, 0b111));
        assert!(EtaMatrix::new(3, 8).is_err());
    }

    #[test]
    fn t_set_examples() {
        assert_eq!(t_set(idx("01")), set(&[3, 4]));
        assert_eq!(t_set(idx("00")), set(&[]));
        assert_eq!(t_set(idx("11")), set(&[1, 2, 3, 4]));
        assert_eq!(eta_sum(2, &set(&[3, 4])).unwrap(), (0, 0b01));
    }

    #[test]
    fn partition_examples() {
        let p = partition(idx("00"));
        assert_eq!(p.sxu, set(&[1, 3, 5]));
        assert_eq!(p.complement, set(&[2, 4]));
        let p = partition(idx("01"));
        assert_eq!(p.sxu, set(&[1, 4, 5]));
        assert_eq!(p.complement, set(&[2, 3]));
        let p = partition(idx("0"));
        assert_eq!(p.sxu, set(&[1, 3]));
        assert_eq!(p.complement, set(&[2]));
    }

    #[test]
    fn partition_sizes() {
        for g in 1..=5 {
            for i in BitIndex::all(g).unwrap() {
                let part = partition(i);
                assert_eq!(part.t_set.len() % 2, 0);
                assert_eq!(part.sxu.len(), g + 1);
                assert_eq!(part.complement.len(), g);
                let union: BTreeSet<usize> = part.sxu.union(&part.complement).copied().collect();
                assert_eq!(union, (1..=2 * g + 1).collect());
            }
        }
    }

    #[test]
    fn initial_data_examples() {
        let p = BranchPoints::new(vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let a = initial_data(&p).unwrap();
        assert!((a.values()[0] - 32f64.sqrt()).abs() < 1e-14);
        let p = BranchPoints::new(vec![0.5, 1.25, 3.0]).unwrap();
        let a = initial_data(&p).unwrap();
        assert!((a.values()[0] - 2.5f64.sqrt()).abs() < 1e-15);
        assert!((a.values()[1] - 1.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn genus_two_matches_printed_ratio_products() {
        let p = BranchPoints::new(vec![-0.3, 0.4, 1.9, 2.2, 5.1]).unwrap();
        let q = |k: usize| p.get(k);
        let printed = [
            (q(3) - q(1)) * (q(5) - q(1)) * (q(5) - q(3)) * (q(4) - q(2)),
            (q(4) - q(1)) * (q(5) - q(1)) * (q(5) - q(4)) * (q(3) - q(2)),
            (q(3) - q(2)) * (q(5) - q(2)) * (q(5) - q(3)) * (q(4) - q(1)),
            (q(4) - q(2)) * (q(5) - q(2)) * (q(5) - q(4)) * (q(3) - q(1)),
        ];
        for (i, expect) in BitIndex::all(2).unwrap().zip(printed) {
            let got = squared_initial_entry(&p, i).unwrap();
            assert!((got - expect).abs() < 1e-13 * expect);
        }
    }

    #[test]
    fn log_products_agree_with_direct_products() {
        let p = BranchPoints::new(vec![0.0, 0.5, 1.1, 2.0, 3.3, 4.1, 5.0, 6.4, 7.7]).unwrap();
        for i in BitIndex::all(4).unwrap() {
            let part = partition(i);
            let direct = pair_product(&p, &part.sxu, false) * pair_product(&p, &part.complement, false);
            let logs = squared_initial_entry(&p, i).unwrap();
            assert!((direct - logs).abs() < 1e-13 * direct);
        }
    }

    #[test]
    fn thomae_small_cases() {
        let p = BranchPoints::new(vec![0.0, 1.0, 2.0]).unwrap();
        assert!(thomae_residual(&p, 1e-10).unwrap() < 1e-8);
        let p = BranchPoints::new(vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let r = thomae_residual(&p, 1e-10).unwrap();
        assert!(r < 1e-8);
        let shifted = thomae_residual(&p.shifted(2.75).unwrap(), 1e-10).unwrap();
        assert!(shifted < 1e-8);
    }
}
