//! Quadrature for integrands with inverse-square-root endpoint singularities.
//!
//! The workhorse is [`singular_interval`], which integrates
//!
//! ```text
//! ∫_lo^hi w(x) dx / √((x − lo)(hi − x) Π_q |x − q|)
//! ```
//!
//! for roots q outside [lo, hi]. The endpoint factor is cancelled exactly by
//! x = m + r·sinθ, leaving an analytic integrand on [−π/2, π/2] that
//! Gauss-Legendre handles with geometric convergence. When an outside root
//! sits close to an endpoint the sin-mapped integrand develops a nearby
//! complex singularity, so the interval is split at its midpoint and each half
//! is mapped with x = e ± δ·sinh²u, which cancels both the endpoint and the
//! nearest outside root.
//!
//! [`tanh_sinh`] is used for outer integrals of nested cubature, whose
//! integrands have integrable log-type singularities at panel ends.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 32;
pub const MAX_NODES: usize = 4096;
const SCHEDULE_LEN: usize = 8; // 32, 64, ..., 4096

/// Ratio (distance to nearest outside root) / (half-width) below which the
/// split sinh mapping replaces the sin substitution.
const NEAR_ROOT_RATIO: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    /// |last − previous| of the refinement sequence.
    pub error: f64,
    /// Node count of the finest rule used (per piece).
    pub nodes: usize,
}

/// An n-point Gauss-Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        self.integrate_with_magnitude(a, b, f).0
    }

    /// (∫f, ∫|f|) with the same nodes.
    pub fn integrate_with_magnitude<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> (f64, f64) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        let mut abs_sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = w * f(mid + half * x);
            sum += v;
            abs_sum += v.abs();
        }
        (sum * half, abs_sum * half.abs())
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached rule from the doubling schedule 32, 64, ..., 4096.
pub fn schedule_rule(level: usize) -> &'static GaussLegendre {
    static RULES: [OnceLock<GaussLegendre>; SCHEDULE_LEN] = [const { OnceLock::new() }; SCHEDULE_LEN];
    RULES[level].get_or_init(|| GaussLegendre::new(MIN_NODES << level))
}

/// Runs `eval` on the doubling schedule until two successive estimates agree
/// to `rel_tol`. `eval` returns the integral and the integral of the absolute
/// integrand; the latter sets the scale for integrands that change sign.
pub fn gauss_legendre_doubling<F>(rel_tol: f64, mut eval: F) -> Result<QuadEstimate>
where
    F: FnMut(&GaussLegendre) -> (f64, f64),
{
    let mut previous = eval(schedule_rule(0)).0;
    let mut last = previous;
    for level in 1..SCHEDULE_LEN {
        let rule = schedule_rule(level);
        let (value, magnitude) = eval(rule);
        last = value;
        if !last.is_finite() {
            break;
        }
        let error = (last - previous).abs();
        if error <= rel_tol * magnitude {
            return Ok(QuadEstimate {
                value: last,
                error,
                nodes: rule.len(),
            });
        }
        if level + 1 < SCHEDULE_LEN {
            previous = last;
        }
    }
    Err(Error::Quadrature {
        nodes: MAX_NODES,
        previous,
        last,
    })
}

/// ∫_lo^hi w(x) dx / √((x − lo)(hi − x) Π_q |x − q|) for roots q outside (lo, hi).
pub fn singular_interval<W>(
    lo: f64,
    hi: f64,
    outside: &[f64],
    weight: W,
    rel_tol: f64,
) -> Result<QuadEstimate>
where
    W: Fn(f64) -> f64,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!("invalid interval [{lo}, {hi}]")));
    }
    let mut below: Option<(usize, f64)> = None;
    let mut above: Option<(usize, f64)> = None;
    for (k, &q) in outside.iter().enumerate() {
        if q <= lo {
            let d = lo - q;
            if below.is_none_or(|(_, best)| d < best) {
                below = Some((k, d));
            }
        } else if q >= hi {
            let d = q - hi;
            if above.is_none_or(|(_, best)| d < best) {
                above = Some((k, d));
            }
        } else {
            return Err(Error::Domain(format!(
                "root {q} lies inside the integration interval [{lo}, {hi}]"
            )));
        }
    }
    for (_, d) in below.iter().chain(above.iter()) {
        if *d <= 0.0 {
            return Err(Error::Domain(format!(
                "an outside root coincides with an endpoint of [{lo}, {hi}]"
            )));
        }
    }

    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let nearest = below
        .map(|b| b.1)
        .into_iter()
        .chain(above.map(|a| a.1))
        .fold(f64::INFINITY, f64::min);

    // Π |x − q| with x = base + disp, formed as (base − q) + disp so that
    // roots clustered near an endpoint keep their relative precision.
    let outside_product = |base: f64, disp: f64, skip: Option<usize>| -> f64 {
        let mut prod = 1.0;
        for (k, &q) in outside.iter().enumerate() {
            if Some(k) != skip {
                prod *= ((base - q) + disp).abs();
            }
        }
        prod
    };

    if nearest >= NEAR_ROOT_RATIO * half {
        return gauss_legendre_doubling(rel_tol, |rule| {
            rule.integrate_with_magnitude(-FRAC_PI_2, FRAC_PI_2, |theta| {
                let x = mid + half * theta.sin();
                weight(x) / outside_product(mid, half * theta.sin(), None).sqrt()
            })
        });
    }

    // Split at the midpoint; map each half from its singular endpoint.
    gauss_legendre_doubling(rel_tol, |rule| {
        let mut total = (0.0, 0.0);
        for (endpoint, dir, near) in [(lo, 1.0, below), (hi, -1.0, above)] {
            let piece = match near {
                Some((k, delta)) => {
                    let u_max = (half / delta).sqrt().asinh();
                    rule.integrate_with_magnitude(0.0, u_max, |u| {
                        let s = u.sinh();
                        let x = endpoint + dir * delta * s * s;
                        let rest = (2.0 * half - delta * s * s) * outside_product(endpoint, dir * delta * s * s, Some(k));
                        2.0 * weight(x) / rest.sqrt()
                    })
                }
                None => rule.integrate_with_magnitude(0.0, half.sqrt(), |t| {
                    let x = endpoint + dir * t * t;
                    let rest = (2.0 * half - t * t) * outside_product(endpoint, dir * t * t, None);
                    2.0 * weight(x) / rest.sqrt()
                }),
            };
            total.0 += piece.0;
            total.1 += piece.1;
        }
        total
    })
}

/// Tanh-sinh (double exponential) quadrature on [a, b]. The integrand is never
/// evaluated at the endpoints, so integrable endpoint singularities are fine.
pub fn tanh_sinh<F>(a: f64, b: f64, rel_tol: f64, max_level: usize, mut f: F) -> Result<QuadEstimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a < b) {
        return Err(Error::Domain(format!("invalid interval [{a}, {b}]")));
    }
    const T_MAX: f64 = 3.2;
    let width = b - a;
    let scale = a.abs().max(b.abs());

    // Node at parameter t: distance from the nearer endpoint and weight.
    let mut term = |t: f64| -> Result<f64> {
        let s = FRAC_PI_2 * t.sinh();
        let cosh_s = s.cosh();
        let weight = FRAC_PI_2 * t.cosh() / (cosh_s * cosh_s);
        // distance to the nearer endpoint, computed without cancellation
        let d = width / (1.0 + (2.0 * s.abs()).exp());
        if d <= 4.0 * f64::EPSILON * scale || d == 0.0 {
            return Ok(0.0);
        }
        let x = if t >= 0.0 { b - d } else { a + d };
        Ok(0.5 * width * weight * f(x)?)
    };

    let mut h = 0.5;
    let mut sum = term(0.0)?;
    let mut k = 1;
    while k as f64 * h <= T_MAX {
        let t = k as f64 * h;
        sum += term(t)? + term(-t)?;
        k += 1;
    }
    let mut estimate = h * sum;
    let mut evaluations = 2 * k - 1;
    for _level in 1..=max_level {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= T_MAX {
            let t = k as f64 * h;
            sum += term(t)? + term(-t)?;
            k += 2;
        }
        evaluations += k - 1;
        let next = h * sum;
        let error = (next - estimate).abs();
        if !next.is_finite() {
            return Err(Error::Quadrature {
                nodes: evaluations,
                previous: estimate,
                last: next,
            });
        }
        if error <= rel_tol * next.abs() {
            return Ok(QuadEstimate {
                value: next,
                error,
                nodes: evaluations,
            });
        }
        estimate = next;
    }
    Err(Error::Quadrature {
        nodes: evaluations,
        previous: estimate,
        last: h * sum,
    })
}
