//! Period matrices of the real hyperelliptic curve y² = (x − p_1)…(x − p_{2g+1}).
//!
//! Everything is assembled from the real integrals
//!
//! ```text
//! T_i^(j) = ∫_{p_i}^{p_{i+1}} x^{j−1} dx / √(Π_{k≤i}(x − p_k) Π_{k>i}(p_k − x)),   1 ≤ i ≤ 2g, 1 ≤ j ≤ g
//! ```
//!
//! through A_ij = (−1)^i·2·T_{2i−1}^(j) and B_ij = 2i·Σ_{k=i}^{g} (−1)^k·T_{2k}^(j).
//! The B-cycles are oriented so that τ = BA^{-1} lies in the Siegel upper half
//! space (Im τ positive definite).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bits::MAX_GENUS;
use crate::error::{Error, Result};
use crate::json::FromJson;
use crate::quadrature::singular_interval;
use crate::theta::Tau;

pub const DEFAULT_PERIOD_REL_TOL: f64 = 1e-10;

/// Strictly increasing real branch points p_1 < … < p_{2g+1}; ∞ is the last
/// branch point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPoints {
    points: Vec<f64>,
}

impl BranchPoints {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        let n = points.len();
        if n < 3 || n % 2 == 0 {
            return Err(Error::Dimension(format!(
                "need 2g+1 >= 3 branch points, got {n}"
            )));
        }
        if (n - 1) / 2 > MAX_GENUS {
            return Err(Error::Dimension(format!("genus {} exceeds {MAX_GENUS}", (n - 1) / 2)));
        }
        if let Some(bad) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::Domain(format!("branch point {bad} is not finite")));
        }
        for w in points.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::Ordering(format!(
                    "branch points must be strictly increasing ({} >= {})",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn genus(&self) -> usize {
        (self.points.len() - 1) / 2
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// p_k for 1-based k.
    pub fn get(&self, k: usize) -> f64 {
        self.points[k - 1]
    }

    pub fn min_gap(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn shifted(&self, s: f64) -> Result<Self> {
        Self::new(self.points.iter().map(|p| p + s).collect())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.points.iter().map(|p| p * c).collect())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchPointsRepr {
    pub points: Vec<f64>,
}

impl FromJson for BranchPoints {
    type Repr = BranchPointsRepr;

    fn from_repr(repr: BranchPointsRepr) -> Result<Self> {
        BranchPoints::new(repr.points)
    }
}

impl<'de> Deserialize<'de> for BranchPoints {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        BranchPoints::from_repr(BranchPointsRepr::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if !(rel_tol > 0.0 && rel_tol <= 1e-6) {
        return Err(Error::Domain(format!(
            "rel_tol must lie in (0, 1e-6], got {rel_tol}"
        )));
    }
    Ok(())
}

/// T_i^(j). Positive whenever p_1 ≥ 0 (or j = 1); for negative branch
/// points and even j − 1 the weight x^{j−1} may change sign.
pub fn t_integral(i: usize, j: usize, p: &BranchPoints, rel_tol: f64) -> Result<f64> {
    check_rel_tol(rel_tol)?;
    let g = p.genus();
    if !(1..=2 * g).contains(&i) || !(1..=g).contains(&j) {
        return Err(Error::Dimension(format!(
            "T_{i}^({j}) out of range for genus {g}"
        )));
    }
    let pts = p.points();
    let outside: Vec<f64> = pts
        .iter()
        .enumerate()
        .filter(|(k, _)| *k + 1 != i && *k + 1 != i + 1)
        .map(|(_, &q)| q)
        .collect();
    let power = (j - 1) as i32;
    let est = singular_interval(pts[i - 1], pts[i], &outside, |x| x.powi(power), rel_tol)?;
    Ok(est.value)
}

/// The matrices A (real) and B = i·b_imag, together with the T table.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodPair {
    genus: usize,
    /// t[i-1][j-1] = T_i^(j)
    t: Vec<Vec<f64>>,
    a: DMatrix<f64>,
    b_imag: DMatrix<f64>,
    det_a: f64,
}

impl PeriodPair {
    /// Assembles A and B from a table with 2g rows and g columns.
    pub fn from_table(t: Vec<Vec<f64>>) -> Result<Self> {
        let g = t.first().map_or(0, Vec::len);
        if g == 0 || t.len() != 2 * g || t.iter().any(|row| row.len() != g) {
            return Err(Error::Dimension("T table must have 2g rows of length g".into()));
        }
        let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
        let a = DMatrix::from_fn(g, g, |r, c| {
            let i = r + 1;
            sign(i) * 2.0 * t[2 * i - 2][c]
        });
        let b_imag = DMatrix::from_fn(g, g, |r, c| {
            let i = r + 1;
            2.0 * (i..=g).map(|k| sign(k) * t[2 * k - 1][c]).sum::<f64>()
        });
        let det_a = a.clone().lu().determinant();
        if !(det_a != 0.0 && det_a.is_finite()) {
            return Err(Error::LinearAlgebra(format!("det A = {det_a}")));
        }
        Ok(Self {
            genus: g,
            t,
            a,
            b_imag,
            det_a,
        })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    /// T_i^(j) for 1-based indices.
    pub fn t(&self, i: usize, j: usize) -> f64 {
        self.t[i - 1][j - 1]
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.t
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Imaginary parts of B (B is purely imaginary).
    pub fn b_imag(&self) -> &DMatrix<f64> {
        &self.b_imag
    }

    pub fn det_a(&self) -> f64 {
        self.det_a
    }

    pub fn abs_det_a(&self) -> f64 {
        self.det_a.abs()
    }

    /// (−1)^{g(g+1)/2}·det A, positive for real increasing branch points.
    pub fn signed_det_a(&self) -> f64 {
        let g = self.genus;
        if (g * (g + 1) / 2) % 2 == 0 {
            self.det_a
        } else {
            -self.det_a
        }
    }
}

pub fn period_matrices(p: &BranchPoints, rel_tol: f64) -> Result<PeriodPair> {
    check_rel_tol(rel_tol)?;
    let g = p.genus();
    let mut table = vec![vec![0.0; g]; 2 * g];
    for (i, row) in table.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = t_integral(i + 1, j + 1, p, rel_tol)?;
        }
    }
    PeriodPair::from_table(table)
}

/// τ = BA^{-1}.
pub fn normalized_tau(pp: &PeriodPair) -> Result<Tau> {
    let inverse = pp
        .a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::LinearAlgebra("period matrix A is singular".into()))?;
    let tau_imag = &pp.b_imag * inverse;
    Tau::new(tau_imag.map(|v| Complex64::new(0.0, v)))
}
