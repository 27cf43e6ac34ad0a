//! The generalized arithmetic-geometric mean over 2^g terms.
//!
//! One step replaces a positive vector `a` by `(F_I(√a))_I`, where
//!
//! ```text
//! F_I(u) = 2^{-g} Σ_{P ∈ F_2^g} u_{I+P} u_P
//! ```
//!
//! For g = 1 this is the classical pair (arithmetic mean, geometric mean).
//! All entries converge quadratically to a common limit μ_g(a).

use std::collections::BTreeMap;
use std::ops::{Add, Mul};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::{check_genus, BitIndex};
use crate::error::{Error, Result};
use crate::json::FromJson;

pub const DEFAULT_AGM_REL_TOL: f64 = 1e-13;
pub const MAX_AGM_ITERATIONS: usize = 64;

/// A vector of 2^g strictly positive reals indexed by F_2^g.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanVector {
    genus: usize,
    values: Vec<f64>,
}

impl MeanVector {
    /// `values` is in packed index order (a_0..0, a_0..01, ...).
    pub fn new(genus: usize, values: Vec<f64>) -> Result<Self> {
        check_genus(genus)?;
        if values.len() != 1 << genus {
            return Err(Error::Dimension(format!(
                "genus {genus} needs {} values, got {}",
                1usize << genus,
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::Domain(format!(
                "mean entry {} is {v}, expected a finite positive number",
                BitIndex::new(genus, i as u32)?
            )));
        }
        Ok(Self { genus, values })
    }

    pub fn constant(genus: usize, c: f64) -> Result<Self> {
        check_genus(genus)?;
        Self::new(genus, vec![c; 1 << genus])
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: BitIndex) -> f64 {
        assert_eq!(index.genus(), self.genus, "index genus mismatch");
        self.values[index.packed()]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// (max − min) / max.
    pub fn relative_spread(&self) -> f64 {
        let max = self.max();
        (max - self.min()) / max
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.genus, self.values.iter().map(|v| v * c).collect())
    }

    /// The vector (a_{I+J})_I.
    pub fn translated(&self, shift: BitIndex) -> Result<Self> {
        if shift.genus() != self.genus {
            return Err(Error::Dimension("translation genus mismatch".into()));
        }
        let j = shift.packed();
        Ok(Self {
            genus: self.genus,
            values: (0..self.values.len()).map(|i| self.values[i ^ j]).collect(),
        })
    }
}

/// Wire shape: entries keyed by bit strings, e.g. `{"00": 1.0, "01": …}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanVectorRepr {
    pub genus: usize,
    pub values: BTreeMap<String, f64>,
}

impl Serialize for MeanVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let values = BitIndex::all(self.genus)
            .map_err(serde::ser::Error::custom)?
            .map(|i| (i.to_string(), self.values[i.packed()]))
            .collect();
        MeanVectorRepr {
            genus: self.genus,
            values,
        }
        .serialize(serializer)
    }
}

impl FromJson for MeanVector {
    type Repr = MeanVectorRepr;

    fn from_repr(repr: MeanVectorRepr) -> Result<Self> {
        check_genus(repr.genus)?;
        let mut values = vec![f64::NAN; 1 << repr.genus];
        for (key, v) in &repr.values {
            let idx: BitIndex = key.parse()?;
            if idx.genus() != repr.genus {
                return Err(Error::Dimension(format!(
                    "key {key:?} has length {} but genus is {}",
                    idx.genus(),
                    repr.genus
                )));
            }
            values[idx.packed()] = *v;
        }
        if repr.values.len() != values.len() {
            return Err(Error::Dimension(format!(
                "expected {} entries, got {}",
                values.len(),
                repr.values.len()
            )));
        }
        MeanVector::new(repr.genus, values)
    }
}

impl<'de> Deserialize<'de> for MeanVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        MeanVector::from_repr(MeanVectorRepr::deserialize(deserializer)?).map_err(D::Error::custom)
    }
}

/// Diagnostic record of an AGM run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgmTrace {
    pub iterates: Vec<MeanVector>,
    pub spreads: Vec<f64>,
    pub limit: f64,
}

impl AgmTrace {
    /// Number of AGM steps performed.
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }
}

/// Σ_P u_{I+P} u_P over packed indices, without the 2^{-g} factor.
pub(crate) fn pair_sum<T>(index: usize, u: &[T]) -> T
where
    T: Copy + Add<Output = T> + Mul<Output = T>,
{
    let mut acc = u[index] * u[0];
    for p in 1..u.len() {
        acc = acc + u[index ^ p] * u[p];
    }
    acc
}

/// F_I(u).
pub fn quadratic_form(index: BitIndex, u: &MeanVector) -> Result<f64> {
    if index.genus() != u.genus {
        return Err(Error::Dimension(format!(
            "index of genus {} applied to a vector of genus {}",
            index.genus(),
            u.genus
        )));
    }
    Ok(pair_sum(index.packed(), &u.values) / u.values.len() as f64)
}

pub fn agm_step(a: &MeanVector) -> Result<MeanVector> {
    let roots: Vec<f64> = a.values.iter().map(|v| v.sqrt()).collect();
    let scale = 1.0 / roots.len() as f64;
    let next = (0..roots.len())
        .map(|i| pair_sum(i, &roots) * scale)
        .collect();
    MeanVector::new(a.genus, next)
}

/// Iterates until the relative spread drops below `rel_tol`, takes one more
/// step, and reports the I = 0 entry of that last iterate.
pub fn agm_limit(a: &MeanVector, rel_tol: f64) -> Result<AgmTrace> {
    if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
        return Err(Error::Domain(format!(
            "rel_tol must lie in (0, 1e-3], got {rel_tol}"
        )));
    }
    let mut current = a.clone();
    let mut iterates = vec![current.clone()];
    let mut spreads = vec![current.relative_spread()];

    if spreads[0] == 0.0 {
        return Ok(AgmTrace {
            limit: current.values[0],
            iterates,
            spreads,
        });
    }

    let mut converged = spreads[0] < rel_tol;
    while iterates.len() <= MAX_AGM_ITERATIONS {
        let spread = *spreads.last().unwrap();
        if !spread.is_finite() {
            break;
        }
        current = agm_step(&current)?;
        iterates.push(current.clone());
        spreads.push(current.relative_spread());
        if converged {
            return Ok(AgmTrace {
                limit: current.values[0],
                iterates,
                spreads,
            });
        }
        converged = *spreads.last().unwrap() < rel_tol;
    }
    Err(Error::Convergence {
        iterations: iterates.len() - 1,
        spread: *spreads.last().unwrap(),
    })
}

/// μ_g(a) with the default tolerance.
pub fn mean(a: &MeanVector) -> Result<f64> {
    Ok(agm_limit(a, DEFAULT_AGM_REL_TOL)?.limit)
}
