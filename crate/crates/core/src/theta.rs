//! Theta constants with characteristics in the second slot,
//!
//! ```text
//! θ_I(τ) = Σ_{n ∈ Z^g} exp(πi·n τ nᵗ + πi·n·Iᵗ)
//! ```
//!
//! evaluated as a truncated lattice sum over the box ‖n‖_∞ ≤ N. The radius N
//! comes from a union bound on the shells ‖n‖_∞ = m using the smallest
//! eigenvalue λ of Im τ, so the omitted tail is below the requested absolute
//! tolerance.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::agm::pair_sum;
use crate::bits::{check_genus, BitIndex};
use crate::error::{Error, Result};
use crate::json::FromJson;

pub const DEFAULT_THETA_ABS_TOL: f64 = 1e-14;

/// Relative tolerance for the symmetry and pure-imaginary checks on τ.
pub const TAU_STRUCTURE_TOL: f64 = 1e-10;

/// A symmetric complex g×g matrix with positive-definite imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct Tau {
    entries: DMatrix<Complex64>,
    imag: DMatrix<f64>,
    min_eigenvalue: f64,
    purely_imaginary: bool,
}

impl Tau {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let g = entries.nrows();
        if entries.ncols() != g {
            return Err(Error::Dimension(format!(
                "tau must be square, got {}x{}",
                g,
                entries.ncols()
            )));
        }
        check_genus(g)?;
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("tau has non-finite entries".into()));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let asym = symmetry_defect(&entries);
        if asym > TAU_STRUCTURE_TOL * scale {
            return Err(Error::Domain(format!(
                "tau is not symmetric (max |τ - τᵗ| = {asym:e})"
            )));
        }
        let imag = DMatrix::from_fn(g, g, |i, j| 0.5 * (entries[(i, j)].im + entries[(j, i)].im));
        let min_eigenvalue = SymmetricEigen::new(imag.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if !(min_eigenvalue > 0.0) {
            return Err(Error::Domain(format!(
                "imaginary part of tau is not positive definite (smallest eigenvalue {min_eigenvalue:e})"
            )));
        }
        let real_max = entries.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        Ok(Self {
            purely_imaginary: real_max <= TAU_STRUCTURE_TOL * scale,
            entries,
            imag,
            min_eigenvalue,
        })
    }

    /// τ = i·M for a real symmetric positive-definite M.
    pub fn from_imaginary(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|v| Complex64::new(0.0, v)))
    }

    pub fn genus(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Symmetrized imaginary part.
    pub fn imaginary_part(&self) -> &DMatrix<f64> {
        &self.imag
    }

    pub fn min_imaginary_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn is_purely_imaginary(&self) -> bool {
        self.purely_imaginary
    }

    /// max |τ_ij − τ_ji|.
    pub fn symmetry_defect(&self) -> f64 {
        symmetry_defect(&self.entries)
    }

    /// max |Re τ_ij|.
    pub fn real_part_max(&self) -> f64 {
        self.entries.iter().map(|z| z.re.abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.entries.map(|z| z * c))
    }
}

fn symmetry_defect(m: &DMatrix<Complex64>) -> f64 {
    let g = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..g {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauRepr {
    pub genus: usize,
    /// Row-major (re, im) pairs.
    pub entries: Vec<[f64; 2]>,
}

impl Serialize for Tau {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let g = self.genus();
        let mut entries = Vec::with_capacity(g * g);
        for i in 0..g {
            for j in 0..g {
                let z = self.entries[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        TauRepr { genus: g, entries }.serialize(serializer)
    }
}

impl FromJson for Tau {
    type Repr = TauRepr;

    fn from_repr(repr: TauRepr) -> Result<Self> {
        let g = repr.genus;
        check_genus(g)?;
        if repr.entries.len() != g * g {
            return Err(Error::Dimension(format!(
                "genus {g} needs {} entries, got {}",
                g * g,
                repr.entries.len()
            )));
        }
        let m = DMatrix::from_fn(g, g, |i, j| {
            let [re, im] = repr.entries[i * g + j];
            Complex64::new(re, im)
        });
        Tau::new(m)
    }
}

impl<'de> Deserialize<'de> for Tau {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        Tau::from_repr(TauRepr::deserialize(deserializer)?).map_err(D::Error::custom)
    }
}

/// The 2^g theta constants of one τ, in packed index order.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaVector {
    genus: usize,
    values: Vec<Complex64>,
}

impl ThetaVector {
    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, index: BitIndex) -> Complex64 {
        assert_eq!(index.genus(), self.genus, "index genus mismatch");
        self.values[index.packed()]
    }

    /// Real parts, for the purely imaginary case.
    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    /// F_I(θ) for every I.
    pub fn quadratic_forms(&self) -> Vec<Complex64> {
        let scale = 1.0 / self.values.len() as f64;
        (0..self.values.len())
            .map(|i| pair_sum(i, &self.values) * scale)
            .collect()
    }
}

impl Serialize for ThetaVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            genus: usize,
            values: BTreeMap<String, [f64; 2]>,
        }
        let values = BitIndex::all(self.genus)
            .map_err(serde::ser::Error::custom)?
            .map(|i| {
                let z = self.values[i.packed()];
                (i.to_string(), [z.re, z.im])
            })
            .collect();
        Repr {
            genus: self.genus,
            values,
        }
        .serialize(serializer)
    }
}

/// Smallest N ≥ 1 with 2^g (2N+3)^{g−1} exp(−πλ(N−1)²) < abs_tol.
pub fn truncation_radius(genus: usize, lambda_min: f64, abs_tol: f64) -> usize {
    assert!(lambda_min > 0.0 && abs_tol > 0.0);
    let g = genus as f64;
    let log_tol = abs_tol.ln();
    let mut n = 1usize;
    loop {
        let nf = n as f64;
        let log_bound = g * 2f64.ln() + (g - 1.0) * (2.0 * nf + 3.0).ln()
            - PI * lambda_min * (nf - 1.0) * (nf - 1.0);
        if log_bound < log_tol {
            return n;
        }
        n += 1;
    }
}

fn check_abs_tol(abs_tol: f64) -> Result<()> {
    if !(abs_tol > 0.0 && abs_tol <= 1e-6) {
        return Err(Error::Domain(format!(
            "abs_tol must lie in (0, 1e-6], got {abs_tol}"
        )));
    }
    Ok(())
}

#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Sums the lattice over ‖n‖_∞ ≤ radius for the requested packed characteristics.
fn lattice_sum(tau: &Tau, radius: usize, characteristics: &[usize]) -> Vec<Complex64> {
    let g = tau.genus();
    let r = radius as i64;
    let mut re = vec![CompensatedSum::default(); characteristics.len()];
    let mut im = vec![CompensatedSum::default(); characteristics.len()];
    let mut n = vec![-r; g];
    let imag = &tau.imag;
    let entries = &tau.entries;
    loop {
        // odd components of n, packed with n_1 as the most significant bit
        let mut odd = 0usize;
        for (k, &nk) in n.iter().enumerate() {
            if nk.rem_euclid(2) == 1 {
                odd |= 1 << (g - 1 - k);
            }
        }
        let term = if tau.purely_imaginary {
            let mut q = 0.0;
            for i in 0..g {
                let ni = n[i] as f64;
                q += imag[(i, i)] * ni * ni;
                for j in 0..i {
                    q += 2.0 * imag[(i, j)] * ni * n[j] as f64;
                }
            }
            Complex64::new((-PI * q).exp(), 0.0)
        } else {
            let mut q = Complex64::new(0.0, 0.0);
            for i in 0..g {
                for j in 0..g {
                    q += entries[(i, j)] * (n[i] * n[j]) as f64;
                }
            }
            (Complex64::i() * PI * q).exp()
        };
        for (slot, &chi) in characteristics.iter().enumerate() {
            let sign = if (odd & chi).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            re[slot].add(sign * term.re);
            if !tau.purely_imaginary {
                im[slot].add(sign * term.im);
            }
        }

        // odometer over the box
        let mut k = g;
        loop {
            if k == 0 {
                return re
                    .iter()
                    .zip(&im)
                    .map(|(a, b)| Complex64::new(a.value(), b.value()))
                    .collect();
            }
            k -= 1;
            if n[k] < r {
                n[k] += 1;
                break;
            }
            n[k] = -r;
        }
    }
}

/// All theta constants summed over a fixed box radius (no tolerance logic).
pub fn theta_vector_with_radius(tau: &Tau, radius: usize) -> ThetaVector {
    let chars: Vec<usize> = (0..1usize << tau.genus()).collect();
    ThetaVector {
        genus: tau.genus(),
        values: lattice_sum(tau, radius, &chars),
    }
}

pub fn theta_vector(tau: &Tau, abs_tol: f64) -> Result<ThetaVector> {
    check_abs_tol(abs_tol)?;
    let radius = truncation_radius(tau.genus(), tau.min_eigenvalue, abs_tol);
    Ok(theta_vector_with_radius(tau, radius))
}

pub fn theta_constant(index: BitIndex, tau: &Tau, abs_tol: f64) -> Result<Complex64> {
    check_abs_tol(abs_tol)?;
    if index.genus() != tau.genus() {
        return Err(Error::Dimension(format!(
            "characteristic of genus {} for tau of genus {}",
            index.genus(),
            tau.genus()
        )));
    }
    let radius = truncation_radius(tau.genus(), tau.min_eigenvalue, abs_tol);
    Ok(lattice_sum(tau, radius, &[index.packed()])[0])
}

/// max_I |θ_I(2τ)² − F_I(θ(τ))|.
pub fn duplication_residual(tau: &Tau, abs_tol: f64) -> Result<f64> {
    let base = theta_vector(tau, abs_tol)?;
    let doubled = theta_vector(&tau.scaled(2.0)?, abs_tol)?;
    Ok(doubled
        .values
        .iter()
        .zip(base.quadratic_forms())
        .map(|(t2, f)| (t2 * t2 - f).norm())
        .fold(0.0, f64::max))
}
