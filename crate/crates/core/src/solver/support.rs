//! Dual polynomial construction and root-based support localization.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::sdp::trig_poly;
use crate::error::{Error, Result};
use crate::linalg::{poly_eval, poly_roots};

/// Root filtering parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportOptions {
    /// Roots with `||z| - 1| > eps_circle` are discarded.
    pub eps_circle: f64,
    /// Roots closer than `eps_dup · ω0` in angle are one location.
    pub eps_dup: f64,
}

impl Default for SupportOptions {
    fn default() -> Self {
        Self {
            eps_circle: 1e-4,
            eps_dup: 1e-3,
        }
    }
}

/// A recovered location with `|p(e^{j ω0 t})|` at the cluster representative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportPoint {
    pub t: f64,
    pub residual: f64,
}

/// Ascending coefficients of `z^{2fc} (1 - |q(z)|²)` with
/// `q(z) = Σ_k u_k z^k`, i.e. `δ_k - Σ_i u_{i+k} conj(u_i)` for
/// `k = -2fc..=2fc`. On the unit circle its modulus equals `1 - |q|²`, so the
/// support of the measure appears as double roots there.
pub fn build_dual_polynomial(u: &[Complex64]) -> Vec<Complex64> {
    let n = u.len();
    if n == 0 {
        return vec![Complex64::new(1.0, 0.0)];
    }
    let shift = n as i64 - 1;
    (-shift..=shift)
        .map(|k| {
            let r: Complex64 = (0..n as i64)
                .filter(|&i| (0..n as i64).contains(&(i + k)))
                .map(|i| u[(i + k) as usize] * u[i as usize].conj())
                .sum();
            if k == 0 {
                Complex64::new(1.0, 0.0) - r
            } else {
                -r
            }
        })
        .collect()
}

/// Roots of `p` on the unit circle mapped to `t = arg(z)/ω0 ∈ [0, τ)`.
///
/// Roots within `eps_dup · ω0` of each other (circularly) are merged into
/// one location whose angle is the circular mean of the members, weighted by
/// the inverse of their distance from the circle (floored at 1e-8, the
/// accuracy to which a double root can be resolved). At most `max(1, deg/2)`
/// locations are admissible since support points are double roots.
pub fn extract_support(
    p_coeffs: &[Complex64],
    omega0: f64,
    tau: f64,
    opts: &SupportOptions,
) -> Result<Vec<SupportPoint>> {
    let degree = p_coeffs.len().saturating_sub(1);
    let roots = poly_roots(p_coeffs)?;
    let mut on_circle: Vec<(f64, f64)> = roots
        .iter()
        .filter(|z| (z.norm() - 1.0).abs() <= opts.eps_circle)
        .map(|z| (z.arg().rem_euclid(TAU), (z.norm() - 1.0).abs()))
        .collect();
    if on_circle.is_empty() {
        return Ok(Vec::new());
    }
    on_circle.sort_by(|x, y| x.0.total_cmp(&y.0));

    let gap = opts.eps_dup * omega0;
    let mut clusters: Vec<Vec<(f64, f64)>> = Vec::new();
    for &root in &on_circle {
        match clusters.last_mut() {
            Some(last) if root.0 - last.last().unwrap().0 <= gap => last.push(root),
            _ => clusters.push(vec![root]),
        }
    }
    if clusters.len() > 1 {
        let first = clusters[0][0].0;
        let last = clusters.last().unwrap().last().unwrap().0;
        if first + TAU - last <= gap {
            let tail = clusters.pop().unwrap();
            clusters[0].extend(tail);
        }
    }

    let max = (degree / 2).max(1);
    if clusters.len() > max {
        return Err(Error::TooManyLocations {
            found: clusters.len(),
            max,
        });
    }
    let mut points: Vec<SupportPoint> = clusters
        .iter()
        .map(|members| {
            let mean: Complex64 = members
                .iter()
                .map(|&(theta, dist)| Complex64::from_polar(1.0 / dist.max(1e-8), theta))
                .sum();
            let theta = mean.arg().rem_euclid(TAU);
            SupportPoint {
                t: wrap(theta / omega0, tau),
                residual: poly_eval(p_coeffs, Complex64::from_polar(1.0, theta)).norm(),
            }
        })
        .collect();
    points.sort_by(|x, y| x.t.total_cmp(&y.t));
    Ok(points)
}

/// Maps `t` into `[0, τ)`.
pub(crate) fn wrap(t: f64, tau: f64) -> f64 {
    let w = t.rem_euclid(tau);
    if w >= tau {
        0.0
    } else {
        w
    }
}

/// Newton refinement of a location to the nearby critical point of `|q(t)|²`.
///
/// Roots of `1 - |q|²` are double, so the companion eigenvalues only pin them
/// to about the square root of machine precision; the critical point is a
/// simple root of the derivative and converges quadratically. Steps larger
/// than `max_step` or towards a minimum are rejected and the input returned.
pub fn polish_location(u: &[Complex64], omega0: f64, tau: f64, t0: f64, max_step: f64) -> f64 {
    let fc = (u.len() - 1) / 2;
    let mut t = t0;
    for _ in 0..30 {
        let (q, dq, ddq) = trig_poly(u, fc, omega0, t);
        let grad = 2.0 * (q.conj() * dq).re;
        let curv = 2.0 * (dq.norm_sqr() + (q.conj() * ddq).re);
        if curv >= 0.0 {
            return t0;
        }
        let step = grad / curv;
        t -= step;
        if (t - t0).abs() > max_step {
            return t0;
        }
        if step.abs() <= 1e-15 * tau {
            break;
        }
    }
    wrap(t, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn linear_polynomial_root_at_one() {
        let pts = extract_support(&[c(1., 0.), c(-1., 0.)], 2.0 * PI, 1.0, &SupportOptions::default())
            .unwrap();
        assert_eq!(pts.len(), 1);
        assert!(pts[0].t.abs() < 1e-12);
        assert!(pts[0].residual < 1e-12);
    }

    #[test]
    fn constant_polynomial_has_no_support() {
        let pts = extract_support(&[c(1., 0.)], 2.0 * PI, 1.0, &SupportOptions::default()).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn off_circle_roots_are_dropped() {
        // Roots at 2 and 0.5.
        let p = [c(1., 0.), c(-2.5, 0.), c(1., 0.)];
        let pts = extract_support(&p, 2.0 * PI, 1.0, &SupportOptions::default()).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn double_root_is_one_location() {
        // (z - i)² = z² - 2iz - 1.
        let p = [c(-1., 0.), c(0., -2.), c(1., 0.)];
        let pts = extract_support(&p, 2.0 * PI, 1.0, &SupportOptions::default()).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].t - 0.25).abs() < 1e-9);
    }

    #[test]
    fn clusters_merge_across_zero_angle() {
        let a = 1e-5;
        let roots = [Complex64::from_polar(1.0, a), Complex64::from_polar(1.0, -a)];
        // (z - r0)(z - r1)
        let p = [roots[0] * roots[1], -(roots[0] + roots[1]), c(1., 0.)];
        let pts = extract_support(&p, 2.0 * PI, 1.0, &SupportOptions::default()).unwrap();
        assert_eq!(pts.len(), 1);
        let d = pts[0].t.min(1.0 - pts[0].t);
        assert!(d < 1e-8, "{}", pts[0].t);
    }

    #[test]
    fn too_many_locations_is_an_error() {
        // z³ - 1 has three unit roots but admits only one double root.
        let p = [c(-1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)];
        let err = extract_support(&p, 2.0 * PI, 1.0, &SupportOptions::default()).unwrap_err();
        assert!(matches!(err, Error::TooManyLocations { found: 3, max: 1 }));
    }

    #[test]
    fn dual_polynomial_of_unit_coefficient() {
        // u = e_0 (the m = 0 entry): |q| ≡ 1 so p vanishes identically.
        let p = build_dual_polynomial(&[c(0., 0.), c(1., 0.), c(0., 0.)]);
        assert_eq!(p.len(), 5);
        assert!(p.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn fejer_dual_polynomial_has_double_root() {
        // q(t) = (1 + cos(2πt))/2 peaks only at t = 0.
        let u = [c(0.25, 0.), c(0.5, 0.), c(0.25, 0.)];
        let p = build_dual_polynomial(&u);
        let pts = extract_support(&p, 2.0 * PI, 1.0, &SupportOptions::default()).unwrap();
        assert_eq!(pts.len(), 1);
        let t = polish_location(&u, 2.0 * PI, 1.0, pts[0].t, 0.01);
        assert!(t.min(1.0 - t) < 1e-12, "{t}");
    }

    proptest! {
        #[test]
        fn dual_polynomial_matches_one_minus_modulus(
            re in prop::collection::vec(-1.0f64..1.0, 5),
            im in prop::collection::vec(-1.0f64..1.0, 5),
            theta in 0.0f64..TAU,
        ) {
            let u: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| c(a, b)).collect();
            let p = build_dual_polynomial(&u);
            let z = Complex64::from_polar(1.0, theta);
            let shifted = poly_eval(&p, z) * z.powi(-4);
            let q = trig_poly(&u, 2, 1.0, theta).0;
            prop_assert!((shifted - c(1.0 - q.norm_sqr(), 0.0)).norm() < 1e-12);
        }

        #[test]
        fn locations_lie_in_period(theta in 0.0f64..TAU, tau in 0.1f64..10.0) {
            let r = Complex64::from_polar(1.0, theta);
            let p = [r * r, -(r + r), c(1., 0.)];
            let w0 = TAU / tau;
            let pts = extract_support(&p, w0, tau, &SupportOptions::default()).unwrap();
            prop_assert_eq!(pts.len(), 1);
            prop_assert!(pts[0].t >= 0.0 && pts[0].t < tau);
        }
    }
}
