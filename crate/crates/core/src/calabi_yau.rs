//! The period ∫_γ ω_X of the double cover η² = Π l_i(ξ) of affine g-space,
//! branched along the hyperplanes dual to the Veronese images of the p_i:
//!
//! ```text
//! l_i(ξ) = ξ_1 − p_i ξ_2 + p_i² ξ_3 − … + (−1)^{g−1} p_i^{g−1} ξ_g + (−1)^g p_i^g
//! ```
//!
//! The chain γ lies over the polytope Δ cut out by (−1)^{i−1} l_{2i−1} ≥ 0 and
//! (−1)^i l_{2i} ≥ 0, with both sheets contributing, so ∫_γ ω_X = 2 ∫_Δ dξ/√|Π l_i|.
//!
//! Δ is integrated as an iterated integral, innermost over ξ_1. Every l_i has
//! ξ_1-coefficient 1, so a ξ_1-slice is an interval bounded by two of the roots
//! c_i = ξ_1 − l_i and the inner integral is exactly the endpoint-singular
//! kernel used for the hyperelliptic periods. Outer levels are split at the
//! projections of the slice polytope's vertices and integrated with tanh-sinh.

use nalgebra::{DMatrix, DVector};

use crate::agm::{agm_limit, DEFAULT_AGM_REL_TOL};
use crate::error::{Error, Result};
use crate::hyperelliptic::{period_matrices, BranchPoints};
use crate::quadrature::{singular_interval, tanh_sinh};
use crate::thomae::initial_data;

/// Default tolerance for the experimental g = 3 recursion.
pub const EXPERIMENTAL_REL_TOL: f64 = 1e-3;
const TANH_SINH_MAX_LEVEL: usize = 8;
const VERTEX_FEASIBILITY_TOL: f64 = 1e-9;
const SLIVER_ULPS: f64 = 1024.0;

#[derive(Debug, Clone, PartialEq)]
pub struct VeroneseForms {
    genus: usize,
    /// coefficients[i][k] multiplies ξ_{k+1} in l_{i+1}
    coefficients: Vec<Vec<f64>>,
    constants: Vec<f64>,
}

impl VeroneseForms {
    pub fn new(p: &BranchPoints) -> Self {
        let g = p.genus();
        let mut coefficients = Vec::with_capacity(2 * g + 1);
        let mut constants = Vec::with_capacity(2 * g + 1);
        for &pi in p.points() {
            let mut row = Vec::with_capacity(g);
            let mut power = 1.0;
            for _ in 0..g {
                row.push(power);
                power *= -pi;
            }
            coefficients.push(row);
            constants.push(power);
        }
        Self {
            genus: g,
            coefficients,
            constants,
        }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn len(&self) -> usize {
        self.constants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constants.is_empty()
    }

    /// l_i(ξ) for 1-based i.
    pub fn eval(&self, i: usize, xi: &[f64]) -> f64 {
        self.coefficients[i - 1]
            .iter()
            .zip(xi)
            .map(|(c, x)| c * x)
            .sum::<f64>()
            + self.constants[i - 1]
    }

    /// The sign ε_i with Δ = {ε_i l_i ≥ 0 for all i}.
    pub fn sign(&self, i: usize) -> f64 {
        let half = i.div_ceil(2);
        let exponent = if i % 2 == 1 { half - 1 } else { half };
        if exponent % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Π ε_i l_i(ξ), positive on the interior of Δ.
    pub fn radicand(&self, xi: &[f64]) -> f64 {
        (1..=self.len()).map(|i| self.sign(i) * self.eval(i, xi)).product()
    }

    /// ξ_k = e_{g+1−k}(x_1, …, x_g), under which l_i(ξ) = Π_k (x_k − p_i).
    pub fn veronese(x: &[f64]) -> Vec<f64> {
        let g = x.len();
        // elementary symmetric polynomials e_0..e_g
        let mut e = vec![0.0; g + 1];
        e[0] = 1.0;
        for &xk in x {
            for m in (1..=g).rev() {
                e[m] += e[m - 1] * xk;
            }
        }
        (1..=g).map(|k| e[g + 1 - k]).collect()
    }
}

pub fn delta_contains(xi: &[f64], forms: &VeroneseForms) -> Result<bool> {
    if xi.len() != forms.genus {
        return Err(Error::Dimension(format!(
            "point of dimension {} for forms of genus {}",
            xi.len(),
            forms.genus
        )));
    }
    Ok((1..=forms.len()).all(|i| forms.sign(i) * forms.eval(i, xi) >= 0.0))
}

struct Slicer<'a> {
    forms: &'a VeroneseForms,
    rel_tol: f64,
}

impl Slicer<'_> {
    /// Offsets b_i of every form once ξ_{k+1..g} are fixed to `fixed`.
    fn offsets(&self, k: usize, fixed: &[f64]) -> Vec<f64> {
        (0..self.forms.len())
            .map(|i| {
                let row = &self.forms.coefficients[i];
                self.forms.constants[i]
                    + fixed.iter().enumerate().map(|(m, x)| row[k + m] * x).sum::<f64>()
            })
            .collect()
    }

    /// ∫ over the slice of Δ in (ξ_1, …, ξ_k) with ξ_{k+1..g} = fixed.
    fn integrate(&self, k: usize, fixed: &[f64], rel_tol: f64) -> Result<f64> {
        let offsets = self.offsets(k, fixed);
        if k == 1 {
            return self.innermost(&offsets, rel_tol);
        }
        let breaks = self.vertex_projections(k, &offsets)?;
        if breaks.len() < 2 {
            // a slice taken at the very rim of the outer range has no area
            if k < self.forms.genus {
                return Ok(0.0);
            }
            return Err(Error::Domain(format!(
                "polytope is degenerate ({} distinct vertex projections)",
                breaks.len()
            )));
        }
        let inner_tol = (0.1 * rel_tol).max(1e-14);
        let mut total = 0.0;
        let mut point = Vec::with_capacity(fixed.len() + 1);
        for w in breaks.windows(2) {
            let est = tanh_sinh(w[0], w[1], rel_tol, TANH_SINH_MAX_LEVEL, |xk| {
                point.clear();
                point.push(xk);
                point.extend_from_slice(fixed);
                self.integrate(k - 1, &point, inner_tol)
            })?;
            total += est.value;
        }
        Ok(total)
    }

    /// ∫ dξ_1 / √|Π(ξ_1 − c_i)| over {ε_i(ξ_1 − c_i) ≥ 0}, c_i = −b_i.
    fn innermost(&self, offsets: &[f64], rel_tol: f64) -> Result<f64> {
        let mut lo = (f64::NEG_INFINITY, usize::MAX);
        let mut hi = (f64::INFINITY, usize::MAX);
        for (i, b) in offsets.iter().enumerate() {
            let c = -b;
            if self.forms.sign(i + 1) > 0.0 {
                if c > lo.0 {
                    lo = (c, i);
                }
            } else if c < hi.0 {
                hi = (c, i);
            }
        }
        if !(lo.0 < hi.0) || lo.1 == usize::MAX || hi.1 == usize::MAX {
            return Ok(0.0);
        }
        let outside: Vec<f64> = offsets
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != lo.1 && *i != hi.1)
            .map(|(_, b)| -b)
            .collect();
        // A root landing on an endpoint only happens for slices rounded onto a
        // breakpoint of the outer level, where tanh-sinh weights are negligible.
        if outside.iter().any(|&q| q == lo.0 || q == hi.0) {
            return Ok(0.0);
        }
        let width = hi.0 - lo.0;
        if width <= SLIVER_ULPS * f64::EPSILON * lo.0.abs().max(hi.0.abs()) {
            // too few representable points for quadrature: ∫ dx/√((x−lo)(hi−x)) = π
            let mid = 0.5 * (lo.0 + hi.0);
            let rest: f64 = outside.iter().map(|q| (mid - q).abs().max(width)).product();
            return Ok(std::f64::consts::PI / rest.sqrt());
        }
        Ok(singular_interval(lo.0, hi.0, &outside, |_| 1.0, rel_tol)?.value)
    }

    /// Sorted distinct ξ_k-coordinates of the vertices of the slice polytope
    /// {ε_i (Σ_{m≤k} coef_im ξ_m + b_i) ≥ 0}.
    fn vertex_projections(&self, k: usize, offsets: &[f64]) -> Result<Vec<f64>> {
        let n = self.forms.len();
        let mut coords = Vec::new();
        for subset in k_subsets(n, k) {
            let a = DMatrix::from_fn(k, k, |r, c| self.forms.coefficients[subset[r]][c]);
            let rhs = DVector::from_fn(k, |r, _| -offsets[subset[r]]);
            let Some(v) = a.lu().solve(&rhs) else { continue };
            if v.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let feasible = (0..n).all(|i| {
                let row = &self.forms.coefficients[i];
                let mut val = offsets[i];
                let mut scale = offsets[i].abs();
                for m in 0..k {
                    val += row[m] * v[m];
                    scale += (row[m] * v[m]).abs();
                }
                self.forms.sign(i + 1) * val >= -VERTEX_FEASIBILITY_TOL * scale.max(1.0)
            });
            if feasible {
                coords.push(v[k - 1]);
            }
        }
        coords.sort_by(f64::total_cmp);
        let span = coords.last().copied().unwrap_or(0.0) - coords.first().copied().unwrap_or(0.0);
        let merge = 1e-12 * span.max(coords.iter().fold(0.0f64, |m, c| m.max(c.abs())));
        coords.dedup_by(|b, a| (*b - *a).abs() <= merge);
        Ok(coords)
    }
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

/// ∫_Δ dξ / √|Π l_i(ξ)| by iterated quadrature.
pub fn delta_integral(p: &BranchPoints, rel_tol: f64) -> Result<f64> {
    let forms = VeroneseForms::new(p);
    let slicer = Slicer {
        forms: &forms,
        rel_tol,
    };
    slicer.integrate(forms.genus, &[], slicer.rel_tol)
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
        return Err(Error::Domain(format!(
            "rel_tol must lie in (0, 1e-3], got {rel_tol}"
        )));
    }
    Ok(())
}

/// ∫_γ ω_X = 2 ∫_Δ for g ∈ {1, 2}.
pub fn cy_period(p: &BranchPoints, rel_tol: f64) -> Result<f64> {
    cy_period_with(p, rel_tol, false)
}

/// As [`cy_period`]; `experimental` additionally enables g = 3.
pub fn cy_period_with(p: &BranchPoints, rel_tol: f64, experimental: bool) -> Result<f64> {
    check_rel_tol(rel_tol)?;
    let g = p.genus();
    match g {
        1 | 2 => {}
        3 if experimental => {}
        3 => {
            return Err(Error::UnsupportedGenus {
                genus: g,
                reason: "genus 3 Calabi-Yau periods are experimental and must be enabled explicitly".into(),
            })
        }
        _ => {
            return Err(Error::UnsupportedGenus {
                genus: g,
                reason: "Calabi-Yau periods are implemented for g <= 3".into(),
            })
        }
    }
    Ok(2.0 * delta_integral(p, rel_tol)?)
}

/// The pieces of the consistency chain μ_g·∫_γω_X = 2π^g and 2^{g−1}∫_γω_X = |det A|.
#[derive(Debug, Clone, PartialEq)]
pub struct CyComparison {
    pub genus: usize,
    pub cy_period: f64,
    pub abs_det_a: f64,
    pub mean: f64,
    /// |2^{g−1}∫_γω_X − |det A|| / |det A|
    pub pushforward_residual: f64,
    /// |μ_g(a)·∫_γω_X − 2π^g| / 2π^g
    pub mean_residual: f64,
}

pub fn cy_comparison(p: &BranchPoints, rel_tol: f64, experimental: bool) -> Result<CyComparison> {
    let period = cy_period_with(p, rel_tol, experimental)?;
    let g = p.genus();
    let abs_det_a = period_matrices(p, rel_tol.min(1e-10))?.abs_det_a();
    let mean = agm_limit(&initial_data(p)?, DEFAULT_AGM_REL_TOL)?.limit;
    let scale = 2f64.powi(g as i32 - 1);
    let target = 2.0 * std::f64::consts::PI.powi(g as i32);
    Ok(CyComparison {
        genus: g,
        cy_period: period,
        abs_det_a,
        mean,
        pushforward_residual: (scale * period - abs_det_a).abs() / abs_det_a,
        mean_residual: (mean * period - target).abs() / target,
    })
}

pub fn pushforward_residual(p: &BranchPoints, rel_tol: f64) -> Result<f64> {
    Ok(cy_comparison(p, rel_tol, false)?.pushforward_residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperelliptic::t_integral;

    fn bp(points: &[f64]) -> BranchPoints {
        BranchPoints::new(points.to_vec()).unwrap()
    }

    #[test]
    fn forms_factor_on_the_veronese_image() {
        let p = bp(&[0.0, 1.0, 2.5, 3.0, 4.5]);
        let forms = VeroneseForms::new(&p);
        for x in [[0.3, 2.7], [-1.0, 5.5], [1.2, 1.2]] {
            let xi = VeroneseForms::veronese(&x);
            assert_eq!(xi, vec![x[0] * x[1], x[0] + x[1]]);
            for (i, &pi) in p.points().iter().enumerate() {
                let expect = (x[0] - pi) * (x[1] - pi);
                assert!((forms.eval(i + 1, &xi) - expect).abs() < 1e-12);
            }
        }
        let p3 = bp(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let forms = VeroneseForms::new(&p3);
        let x = [0.4, 2.2, 5.1];
        let xi = VeroneseForms::veronese(&x);
        for (i, &pi) in p3.points().iter().enumerate() {
            let expect: f64 = x.iter().map(|xk| xk - pi).product();
            assert!((forms.eval(i + 1, &xi) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn signs_follow_the_alternating_pattern() {
        let forms = VeroneseForms::new(&bp(&[0.0, 1.0, 2.0, 3.0, 4.0]));
        let signs: Vec<f64> = (1..=5).map(|i| forms.sign(i)).collect();
        assert_eq!(signs, [1.0, -1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn genus_one_delta_is_first_gap() {
        let p = bp(&[-0.5, 1.0, 2.0]);
        let forms = VeroneseForms::new(&p);
        assert!(delta_contains(&[-0.5], &forms).unwrap());
        assert!(delta_contains(&[0.2], &forms).unwrap());
        assert!(delta_contains(&[1.0], &forms).unwrap());
        assert!(!delta_contains(&[1.5], &forms).unwrap());
        assert!(!delta_contains(&[-0.6], &forms).unwrap());
        assert!(delta_contains(&[0.0, 0.0], &forms).is_err());
    }

    #[test]
    fn genus_two_membership_through_veronese() {
        let p = bp(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let forms = VeroneseForms::new(&p);
        assert!(delta_contains(&VeroneseForms::veronese(&[0.5, 2.5]), &forms).unwrap());
        assert!(!delta_contains(&VeroneseForms::veronese(&[1.5, 2.5]), &forms).unwrap());
        assert!(!delta_contains(&[100.0, -50.0], &forms).unwrap());
    }

    #[test]
    fn genus_one_period_is_twice_first_t_integral() {
        let p = bp(&[0.0, 1.0, 2.0]);
        let period = cy_period(&p, 1e-12).unwrap();
        let t1 = t_integral(1, 1, &p, 1e-12).unwrap();
        assert!((period - 2.0 * t1).abs() < 1e-12 * period);
    }

    #[test]
    fn genus_two_vertices_are_box_corners() {
        let p = bp(&[0.0, 1.0, 2.5, 3.0, 4.5]);
        let forms = VeroneseForms::new(&p);
        let slicer = Slicer {
            forms: &forms,
            rel_tol: 1e-10,
        };
        let breaks = slicer.vertex_projections(2, &slicer.offsets(2, &[])).unwrap();
        // ξ_2 = x_1 + x_2 at the corners of [p1,p2] × [p3,p4]
        assert_eq!(breaks.len(), 4);
        for (b, e) in breaks.iter().zip([2.5, 3.0, 3.5, 4.0]) {
            assert!((b - e).abs() < 1e-12);
        }
    }

    #[test]
    fn genus_two_kummer_identity() {
        let p = bp(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let cmp = cy_comparison(&p, 1e-10, false).unwrap();
        assert!(cmp.pushforward_residual < 1e-9, "{cmp:?}");
        assert!(cmp.mean_residual < 1e-9, "{cmp:?}");
    }

    #[test]
    fn translation_invariance() {
        let p = bp(&[0.0, 0.8, 2.1, 3.5, 4.2]);
        let a = cy_period(&p, 1e-10).unwrap();
        let b = cy_period(&p.shifted(-1.3).unwrap(), 1e-10).unwrap();
        assert!((a - b).abs() < 1e-9 * a);
    }

    #[test]
    fn genus_three_requires_opt_in() {
        let p = bp(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(cy_period(&p, 1e-8).unwrap_err().code(), "unsupported_genus");
        let p4 = bp(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        assert_eq!(cy_period_with(&p4, 1e-3, true).unwrap_err().code(), "unsupported_genus");
    }

    #[test]
    fn genus_three_experimental_matches_periods() {
        let p = bp(&[0.0, 0.7, 1.9, 3.2, 3.6, 5.5, 7.1]);
        let cmp = cy_comparison(&p, EXPERIMENTAL_REL_TOL, true).unwrap();
        assert!(cmp.pushforward_residual < EXPERIMENTAL_REL_TOL, "{cmp:?}");
        // symmetric spacing makes several slice vertices coincide
        let q = bp(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let cmp = cy_comparison(&q, EXPERIMENTAL_REL_TOL, true).unwrap();
        assert!(cmp.mean_residual < EXPERIMENTAL_REL_TOL, "{cmp:?}");
    }
}
