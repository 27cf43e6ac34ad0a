//! Genus 2 in closed form: from a quadruple (a_00, a_01, a_10, a_11) with
//! a_00 > a_10 > a_11 > a_01 and a_00 a_01 > a_10 a_11 to branch points
//! 0 = p_1 < … < p_5 whose Thomae data is proportional to a, and from there
//! to μ_2(a) through a single period determinant.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::agm::MeanVector;
use crate::error::{Error, Result};
use crate::hyperelliptic::{period_matrices, BranchPoints};
use crate::json::FromJson;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Genus2Quadruple {
    pub a00: f64,
    pub a01: f64,
    pub a10: f64,
    pub a11: f64,
}

impl Genus2Quadruple {
    pub fn new(a00: f64, a01: f64, a10: f64, a11: f64) -> Result<Self> {
        let q = Self { a00, a01, a10, a11 };
        q.validate()?;
        Ok(q)
    }

    fn validate(&self) -> Result<()> {
        let Self { a00, a01, a10, a11 } = *self;
        for (name, v) in [("a_00", a00), ("a_01", a01), ("a_10", a10), ("a_11", a11)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        for (holds, text) in [
            (a00 > a10, "a_00 > a_10"),
            (a10 > a11, "a_10 > a_11"),
            (a11 > a01, "a_11 > a_01"),
            (a00 * a01 > a10 * a11, "a_00·a_01 > a_10·a_11"),
        ] {
            if !holds {
                return Err(Error::Domain(format!(
                    "quadruple ({a00}, {a01}, {a10}, {a11}) violates {text}"
                )));
            }
        }
        Ok(())
    }

    /// Packed order 00, 01, 10, 11.
    pub fn from_mean_vector(a: &MeanVector) -> Result<Self> {
        if a.genus() != 2 {
            return Err(Error::Dimension(format!(
                "genus-2 quadruple needs a genus-2 mean vector, got genus {}",
                a.genus()
            )));
        }
        let v = a.values();
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_mean_vector(&self) -> MeanVector {
        MeanVector::new(2, self.values().to_vec()).expect("validated quadruple is positive")
    }

    pub fn values(&self) -> [f64; 4] {
        [self.a00, self.a01, self.a10, self.a11]
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(c * self.a00, c * self.a01, c * self.a10, c * self.a11)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Genus2QuadrupleRepr {
    pub a00: f64,
    pub a01: f64,
    pub a10: f64,
    pub a11: f64,
}

impl FromJson for Genus2Quadruple {
    type Repr = Genus2QuadrupleRepr;

    fn from_repr(r: Genus2QuadrupleRepr) -> Result<Self> {
        Self::new(r.a00, r.a01, r.a10, r.a11)
    }
}

impl<'de> Deserialize<'de> for Genus2Quadruple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Self::from_repr(Genus2QuadrupleRepr::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Genus2Moduli {
    pub k1: f64,
    pub k2: f64,
    pub l1: f64,
    pub l2: f64,
}

// (1 + l²)/(1 − l²) = s/k solved for l ∈ [0, 1)
fn l_from(s: f64, k: f64) -> f64 {
    ((s - k) / (s + k)).sqrt()
}

pub fn moduli_from_means(a: &Genus2Quadruple) -> Result<Genus2Moduli> {
    a.validate()?;
    let Genus2Quadruple { a00, a01, a10, a11 } = *a;
    let k1 = ((a00 + a01).powi(2) - (a10 + a11).powi(2)).sqrt();
    let k2 = ((a00 - a01).powi(2) - (a10 - a11).powi(2)).sqrt();
    let l1 = l_from(a00 + a01, k1);
    let l2 = l_from(a00 - a01, k2);
    let m = Genus2Moduli { k1, k2, l1, l2 };
    if !(k1 > k2 && k2 > 0.0) {
        return Err(Error::Ordering(format!("expected k_1 > k_2 > 0, got {m:?}")));
    }
    if !(0.0 < l2 && l2 < l1 && l1 < 1.0) {
        return Err(Error::Ordering(format!("expected 0 < l_2 < l_1 < 1, got {m:?}")));
    }
    Ok(m)
}

impl Genus2Moduli {
    /// Largest relative defect among the four identities tying the moduli to a.
    pub fn identity_residual(&self, a: &Genus2Quadruple) -> f64 {
        let Self { k1, k2, l1, l2 } = *self;
        let checks = [
            ((1.0 + l1 * l1) / (1.0 - l1 * l1) * k1, a.a00 + a.a01),
            (2.0 * l1 / (1.0 - l1 * l1) * k1, a.a10 + a.a11),
            ((1.0 + l2 * l2) / (1.0 - l2 * l2) * k2, a.a00 - a.a01),
            (2.0 * l2 / (1.0 - l2 * l2) * k2, a.a10 - a.a11),
        ];
        checks
            .iter()
            .map(|(lhs, rhs)| (lhs - rhs).abs() / rhs.abs())
            .fold(0.0, f64::max)
    }
}

/// (p_1, …, p_5) with p_1 = 0. Homogeneous of degree 0 in a.
pub fn branch_point_values(a: &Genus2Quadruple) -> Result<[f64; 5]> {
    let Genus2Moduli { k1, k2, l1, l2 } = moduli_from_means(a)?;
    let d1 = 1.0 - l1 * l1;
    let d2 = 1.0 - l2 * l2;
    let p2 = 1.0 / (d2 * d1);
    let common = 2.0 * (l1 * l2 + 1.0) / (d1 * d2 * (1.0 - l1 * l2));
    let p3 = common * a.a00 / (k1 + k2);
    let p4 = common * a.a01 / (k1 - k2);
    let p5 = 4.0 * a.a00 * a.a01 / ((k1 - k2) * (k1 + k2) * d2 * d1);
    Ok([0.0, p2, p3, p4, p5])
}

pub fn branch_points_from_means(a: &Genus2Quadruple) -> Result<BranchPoints> {
    let p = branch_point_values(a)?;
    if p.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Ordering(format!(
            "derived branch points {p:?} are not strictly increasing"
        )));
    }
    BranchPoints::new(p.to_vec())
}

/// The four products of differences proportional to a_00², a_01², a_10², a_11².
pub fn ratio_products(p: &BranchPoints) -> Result<[f64; 4]> {
    if p.genus() != 2 {
        return Err(Error::Dimension(format!(
            "ratio products need five branch points, got {}",
            p.points().len()
        )));
    }
    let q = |k: usize| p.get(k);
    Ok([
        (q(3) - q(1)) * (q(5) - q(1)) * (q(5) - q(3)) * (q(4) - q(2)),
        (q(4) - q(1)) * (q(5) - q(1)) * (q(5) - q(4)) * (q(3) - q(2)),
        (q(3) - q(2)) * (q(5) - q(2)) * (q(5) - q(3)) * (q(4) - q(1)),
        (q(4) - q(2)) * (q(5) - q(2)) * (q(5) - q(4)) * (q(3) - q(1)),
    ])
}

/// max_I |(a_I²/a_00²) / (R_I/R_00) − 1|.
pub fn ratio_residual(a: &Genus2Quadruple, p: &BranchPoints) -> Result<f64> {
    let r = ratio_products(p)?;
    let v = a.values();
    Ok((1..4)
        .map(|i| ((v[i] / v[0]).powi(2) / (r[i] / r[0]) - 1.0).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormLimit {
    pub abs_det_a: f64,
    /// 4π² a_00 / (|det A| √((p_3−p_1)(p_5−p_1)(p_5−p_3)(p_4−p_2)))
    pub det_form: f64,
    /// the same quantity written through the moduli
    pub expanded_form: f64,
}

/// The expanded radical form without the 4π²/|det A| prefactor.
pub fn expanded_factor(a: &Genus2Quadruple, m: &Genus2Moduli) -> f64 {
    let Genus2Quadruple { a00, a01, a10, a11 } = *a;
    let Genus2Moduli { l1, l2, .. } = *m;
    let radicand = (a00 * a01 - a10 * a11).powi(3) * (1.0 - l1 * l2).powi(3)
        / (a00 * a01 * a10 * a11 * (l1 * l1 - l2 * l2) * (1.0 + l1 * l2));
    (1.0 - l1 * l1).powi(2) * (1.0 - l2 * l2).powi(2) * radicand.sqrt()
}

pub fn closed_form_limit(a: &Genus2Quadruple, rel_tol: f64) -> Result<ClosedFormLimit> {
    let m = moduli_from_means(a)?;
    let p = branch_points_from_means(a)?;
    let abs_det_a = period_matrices(&p, rel_tol)?.abs_det_a();
    let prefactor = 4.0 * PI * PI / abs_det_a;
    let r00 = ratio_products(&p)?[0];
    Ok(ClosedFormLimit {
        abs_det_a,
        det_form: prefactor * a.a00 / r00.sqrt(),
        expanded_form: prefactor * expanded_factor(a, &m),
    })
}
