//! Second-order vacuum response to a static magnetic field.
//!
//! With `w = u(1−u)q²`, `μⱼ = √(mⱼ² + w)` and `Xⱼ = β μⱼ`:
//!
//! * `M⁰(q) = −(2/π) ∫₀¹ Σⱼ cⱼ log(mⱼ² + w) u(1−u) du`,
//! * `Mᵀ(q,β) = −(8/π) ∫₀¹∫₀^∞ Σⱼ cⱼ n_F(Xⱼ cosh t) dt u(1−u) du` with the
//!   Fermi occupation `n_F(X) = 1/(1+e^{X})`,
//! * `G(q,β)` and its thermal part `Gᵀ(q,β)`, whose average over the
//!   inverse temperature reproduces `(q²/8π)(M⁰ + Mᵀ)`,
//! * the Uehling function `U(q)`, the `Λ → ∞` limit of `M⁰(0) − M⁰(q)`.
//!
//! Every integrand depends on `u` only through `u(1−u)`, so `u`-integrals
//! are taken over `[0, ½]` and doubled.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{
    try_integrate_finite, try_integrate_from, HalfLineMap, IntegralResult, NestedTracker,
    QuadratureConfig,
};
use crate::scheme::PauliVillarsScheme;
use crate::special::{alternating_sum_direct, bessel_k, theta2_sprime_with, SeriesPolicy};

/// One row of a response table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponsePoint {
    pub q: f64,
    pub m0_value: f64,
    pub mt_value: f64,
    pub total: f64,
    pub err: f64,
    pub converged: bool,
}

/// A radially symmetric spectral density `q ↦ |B̂(q)|²` supported on
/// `[0, q_max]`.
pub struct RadialSpectrum {
    profile: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    q_max: f64,
}

impl RadialSpectrum {
    pub fn new<F>(profile: F, q_max: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(q_max > 0.0 && q_max.is_finite()) {
            return Err(Error::domain(format!("q_max must be positive and finite, got {q_max}")));
        }
        Ok(Self {
            profile: Box::new(profile),
            q_max,
        })
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn eval(&self, q: f64) -> f64 {
        (self.profile)(q)
    }
}

impl std::fmt::Debug for RadialSpectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialSpectrum").field("q_max", &self.q_max).finish_non_exhaustive()
    }
}

fn check_q(q: f64, strict: bool) -> Result<()> {
    let ok = if strict { q > 0.0 } else { q >= 0.0 };
    if ok && q.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "momentum must be {} and finite, got {q}",
            if strict { "positive" } else { "nonnegative" }
        )))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && !beta.is_nan() {
        Ok(())
    } else {
        Err(Error::domain(format!("beta must be positive, got {beta}")))
    }
}

/// `2 ∫₀^{½} g(u(1−u)) u(1−u) du`.
fn u_average<F>(mut g: F, cfg: &QuadratureConfig) -> Result<IntegralResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let r = try_integrate_finite(
        |u| {
            let p = u * (1.0 - u);
            Ok(g(p)? * p)
        },
        0.0,
        0.5,
        cfg,
    )?;
    Ok(r.scaled(2.0))
}

/// Zero-temperature response `M⁰(q)`.
pub fn m0_response(q: f64, scheme: &PauliVillarsScheme, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    check_q(q, false)?;
    let q2 = q * q;
    let r = u_average(|p| Ok(scheme.log_sum(p * q2)), cfg)?;
    Ok(r.scaled(-2.0 / PI))
}

/// `M⁰(0) = 2 log Λ / 3π`.
pub fn m0_at_zero(scheme: &PauliVillarsScheme) -> f64 {
    2.0 * scheme.log_lambda() / (3.0 * PI)
}

/// Fermi occupation `1/(1 + e^{X})` for `X ≥ 0`, the thermal kernel of `Mᵀ`.
pub fn fermi_occupation(x: f64) -> f64 {
    if !x.is_finite() {
        return 0.0;
    }
    let e = (-x).exp();
    e / (1.0 + e)
}

/// `h(Y) = e^{−Y}(1 + e^{−Y} − Y)/(1 + e^{−Y})²`, the derivative of
/// `Y/(1 + e^{Y})` and the kernel of `Gᵀ` after resumming the Bessel series.
/// Its value at `Y = 0` is `½`.
pub fn thermal_kernel_h(y: f64) -> f64 {
    if !y.is_finite() {
        return 0.0;
    }
    let e = (-y).exp();
    let d = 1.0 + e;
    e * (1.0 + e - y) / (d * d)
}

fn mu(scheme: &PauliVillarsScheme, j: usize, w: f64) -> f64 {
    let m = scheme.masses()[j];
    (m * m + w).sqrt()
}

/// Thermal response `Mᵀ(q,β)`; exactly zero for `β = +∞`.
pub fn mt_response(
    q: f64,
    beta: f64,
    scheme: &PauliVillarsScheme,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    check_q(q, false)?;
    check_beta(beta)?;
    if beta.is_infinite() {
        return Ok(IntegralResult::exact(0.0));
    }
    let q2 = q * q;
    let c = scheme.coeffs();
    let inner_cfg = cfg.inner();
    let tracker = NestedTracker::new();
    let outer = try_integrate_from(
        |t| {
            let ch = t.cosh();
            let r = u_average(
                |p| {
                    let w = p * q2;
                    Ok((0..3)
                        .map(|j| c[j] * fermi_occupation(beta * mu(scheme, j, w) * ch))
                        .sum())
                },
                &inner_cfg,
            )?;
            Ok(tracker.record(&r))
        },
        0.0,
        HalfLineMap::Logarithmic { center: 1.0 },
        cfg,
    )?;
    Ok(tracker.finish(outer).scaled(-8.0 / PI))
}

/// Bound `|Mᵀ(q,β)| ≤ K β^{−1/2}` with `K = Σⱼ |cⱼ| · 32 / (3√(π mⱼ))`.
pub fn mt_bound(scheme: &PauliVillarsScheme, beta: f64) -> f64 {
    mt_bound_constant(scheme) / beta.sqrt()
}

pub fn mt_bound_constant(scheme: &PauliVillarsScheme) -> f64 {
    let c = scheme.coeffs();
    let m = scheme.masses();
    (0..3)
        .map(|j| c[j].abs() * 32.0 / (3.0 * (PI * m[j]).sqrt()))
        .sum()
}

/// `M⁰`, `Mᵀ` and their sum at one momentum.
pub fn response_point(
    q: f64,
    beta: f64,
    scheme: &PauliVillarsScheme,
    cfg: &QuadratureConfig,
) -> Result<ResponsePoint> {
    let m0 = m0_response(q, scheme, cfg)?;
    let mt = mt_response(q, beta, scheme, cfg)?;
    Ok(ResponsePoint {
        q,
        m0_value: m0.value,
        mt_value: mt.value,
        total: m0.value + mt.value,
        err: m0.error_estimate + mt.error_estimate,
        converged: m0.converged && mt.converged,
    })
}

/// `G(q,β) = −(q²/βπ^{3/2}) ∫₀¹∫₀^∞ Σⱼ cⱼ θ₂′(s) s^{1/2} e^{−s(mⱼ²+w)} ds u(1−u) du`.
pub fn g_total(q: f64, beta: f64, scheme: &PauliVillarsScheme, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    g_total_with(q, beta, scheme, cfg, &SeriesPolicy::default())
}

pub fn g_total_with(
    q: f64,
    beta: f64,
    scheme: &PauliVillarsScheme,
    cfg: &QuadratureConfig,
    policy: &SeriesPolicy,
) -> Result<IntegralResult> {
    check_q(q, true)?;
    check_beta(beta)?;
    if beta.is_infinite() {
        return Err(Error::domain("G(q, β) needs a finite β"));
    }
    policy.validate()?;
    let q2 = q * q;
    let inner_cfg = cfg.inner();
    let tracker = NestedTracker::new();
    // e^{−s w} factors out of the j-sum, leaving Σⱼ cⱼ e^{−s mⱼ²}
    let outer = try_integrate_from(
        |s| {
            let es = scheme.exp_sum(s);
            if es == 0.0 {
                return Ok(0.0);
            }
            let d = theta2_sprime_with(s, beta, policy);
            if d == 0.0 {
                return Ok(0.0);
            }
            let r = u_average(|p| Ok((-s * p * q2).exp()), &inner_cfg)?;
            Ok(d * s.sqrt() * es * tracker.record(&r))
        },
        0.0,
        HalfLineMap::Logarithmic {
            center: beta * beta / (4.0 * PI * PI),
        },
        cfg,
    )?;
    Ok(tracker.finish(outer).scaled(-q2 / (beta * PI.powf(1.5))))
}

/// Thermal part `Gᵀ(q,β)` from the alternating series of Bessel functions
/// `(q²/π²) Σ_{n≥1} (−1)ⁿ ∫₀¹ Σⱼ cⱼ [K₀(nXⱼ) − nXⱼ K₁(nXⱼ)] u(1−u) du`.
pub fn gt_bessel(q: f64, beta: f64, scheme: &PauliVillarsScheme, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    gt_bessel_with(q, beta, scheme, cfg, &SeriesPolicy::default())
}

pub fn gt_bessel_with(
    q: f64,
    beta: f64,
    scheme: &PauliVillarsScheme,
    cfg: &QuadratureConfig,
    policy: &SeriesPolicy,
) -> Result<IntegralResult> {
    check_q(q, true)?;
    check_beta(beta)?;
    if beta.is_infinite() {
        return Ok(IntegralResult::exact(0.0));
    }
    policy.validate()?;
    let q2 = q * q;
    let c = scheme.coeffs();
    let tracker = NestedTracker::new();
    let sum = alternating_sum_direct(
        |n| {
            let nb = n as f64 * beta;
            let r = u_average(
                |p| {
                    let w = p * q2;
                    let mut acc = 0.0;
                    for j in 0..3 {
                        let x = nb * mu(scheme, j, w);
                        acc += c[j] * (bessel_k(0, x)? - x * bessel_k(1, x)?);
                    }
                    Ok(acc)
                },
                cfg,
            )?;
            Ok(tracker.record(&r))
        },
        policy,
    )?;
    Ok(tracker.finish(IntegralResult::exact(sum)).scaled(q2 / (PI * PI)))
}

/// Thermal part `Gᵀ(q,β)` as the double integral
/// `−(q²/π²) ∫₀¹∫₀^∞ Σⱼ cⱼ h(Xⱼ cosh t) dt u(1−u) du`, see
/// [`thermal_kernel_h`].
pub fn gt_coshint(q: f64, beta: f64, scheme: &PauliVillarsScheme, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    check_q(q, true)?;
    check_beta(beta)?;
    if beta.is_infinite() {
        return Ok(IntegralResult::exact(0.0));
    }
    let q2 = q * q;
    let c = scheme.coeffs();
    let inner_cfg = cfg.inner();
    let tracker = NestedTracker::new();
    let outer = try_integrate_from(
        |t| {
            let ch = t.cosh();
            if beta * scheme.lightest_mass() * ch > 800.0 {
                return Ok(0.0);
            }
            let r = u_average(
                |p| {
                    let w = p * q2;
                    Ok((0..3)
                        .map(|j| c[j] * thermal_kernel_h(beta * mu(scheme, j, w) * ch))
                        .sum())
                },
                &inner_cfg,
            )?;
            Ok(tracker.record(&r))
        },
        0.0,
        HalfLineMap::Logarithmic { center: 1.0 },
        cfg,
    )?;
    Ok(tracker.finish(outer).scaled(-q2 / (PI * PI)))
}

/// Uehling function `U(q) = (q²/4π) ∫₀¹ (z² − z⁴/3)/(1 + q²(1−z²)/4) dz`.
pub fn uehling(q: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    check_q(q, false)?;
    if q == 0.0 {
        return Ok(IntegralResult::exact(0.0));
    }
    let q2 = q * q;
    let r = try_integrate_finite(
        |z| {
            let z2 = z * z;
            Ok(z2 * (1.0 - z2 / 3.0) / (1.0 + 0.25 * q2 * (1.0 - z2)))
        },
        0.0,
        1.0,
        cfg,
    )?;
    Ok(r.scaled(q2 / (4.0 * PI)))
}

/// Quadratic form `(1/8π) ∫ (M⁰ + Mᵀ)(|q|) |B̂(q)|² d³q` for a radial
/// spectral density.
pub fn fpv2(
    spectrum: &RadialSpectrum,
    beta: f64,
    scheme: &PauliVillarsScheme,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    check_beta(beta)?;
    let inner_cfg = cfg.inner();
    let tracker = NestedTracker::new();
    let outer = try_integrate_finite(
        |q| {
            let prof = spectrum.eval(q);
            if prof == 0.0 {
                return Ok(0.0);
            }
            if !prof.is_finite() || prof < 0.0 {
                return Err(Error::domain(format!("spectral density must be finite and ≥ 0, got {prof} at q = {q}")));
            }
            let m0 = m0_response(q, scheme, &inner_cfg)?;
            let mt = mt_response(q, beta, scheme, &inner_cfg)?;
            let m = tracker.record(&m0.plus(mt));
            Ok(m * prof * q * q)
        },
        0.0,
        spectrum.q_max(),
        cfg,
    )?;
    // (1/8π)·4π = ½
    Ok(tracker.finish(outer).scaled(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::make_scheme;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn m0_at_origin() {
        let s = make_scheme(1.0, 2.0, 3.0).unwrap();
        let v = m0_response(0.0, &s, &cfg()).unwrap().value;
        assert!(rel(v, 0.095_464_979_136_404_455) < 1e-12);
        assert!(rel(m0_at_zero(&s), v) < 1e-12);
    }

    #[test]
    fn m0_decreases_and_decays() {
        let s = make_scheme(1.0, 2.0, 3.0).unwrap();
        let m00 = m0_at_zero(&s);
        let m1 = m0_response(1.0, &s, &cfg()).unwrap().value;
        let m3 = m0_response(1e3, &s, &cfg()).unwrap().value;
        let m4 = m0_response(1e4, &s, &cfg()).unwrap().value;
        assert!(0.0 < m1 && m1 < m00);
        assert!(m4 > 0.0 && m4 < m3 && m3 < 1e-3 * m00);
    }

    #[test]
    fn occupation_limits() {
        assert_eq!(fermi_occupation(0.0), 0.5);
        assert_eq!(fermi_occupation(f64::INFINITY), 0.0);
        assert!(rel(fermi_occupation(40.0), (-40f64).exp()) < 1e-15);
    }

    #[test]
    fn h_is_derivative_of_y_times_occupation() {
        for y in [0.2, 1.0, 3.0, 10.0] {
            let d = 1e-5;
            let f = |x: f64| x * fermi_occupation(x);
            let fd = (f(y + d) - f(y - d)) / (2.0 * d);
            assert!((fd - thermal_kernel_h(y)).abs() < 1e-9, "{y}");
        }
        assert_eq!(thermal_kernel_h(0.0), 0.5);
    }

    #[test]
    fn h_resums_the_bessel_integrands() {
        // Σ_{n≥1} (−1)ⁿ (1 − nY) e^{−nY} = −h(Y)
        for y in [0.5_f64, 2.0, 6.0] {
            let s: f64 = (1..200)
                .map(|n| {
                    let nf = n as f64;
                    let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
                    sign * (1.0 - nf * y) * (-nf * y).exp()
                })
                .sum();
            assert!((s + thermal_kernel_h(y)).abs() < 1e-14, "{y}");
        }
    }

    #[test]
    fn mt_bound_constant_value() {
        let s = make_scheme(1.0, 2.0, 3.0).unwrap();
        let k = (32.0 / (3.0 * PI.sqrt())) * (1.0 + 1.6 / 2f64.sqrt() + 0.6 / 3f64.sqrt());
        assert!(rel(mt_bound(&s, 1.0), k) < 1e-14);
        assert!(rel(mt_bound(&s, 4.0), 0.5 * k) < 1e-14);
    }

    #[test]
    fn mt_vanishes_at_zero_temperature() {
        let s = make_scheme(1.0, 2.0, 3.0).unwrap();
        assert_eq!(mt_response(1.0, f64::INFINITY, &s, &cfg()).unwrap().value, 0.0);
    }

    #[test]
    fn mt_finite_at_zero_momentum() {
        let s = make_scheme(1.0, 2.0, 3.0).unwrap();
        let r = mt_response(0.0, 1.0, &s, &cfg()).unwrap();
        assert!(r.converged && r.value.is_finite());
        assert!(r.value.abs() <= mt_bound(&s, 1.0));
    }

    #[test]
    fn uehling_values() {
        assert_eq!(uehling(0.0, &cfg()).unwrap().value, 0.0);
        assert!(rel(uehling(1.0, &cfg()).unwrap().value, 0.019_235_320_902_829_404) < 1e-12);
        let a = uehling(2.0, &cfg()).unwrap().value;
        let b = uehling(3.0, &cfg()).unwrap().value;
        assert!(b > a);
    }

    #[test]
    fn gt_representations_agree() {
        let s = make_scheme(1.0, 2.0, 3.0).unwrap();
        let a = gt_bessel(1.0, 1.0, &s, &cfg()).unwrap().value;
        let b = gt_coshint(1.0, 1.0, &s, &cfg()).unwrap().value;
        assert!(rel(a, b) < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn g_total_reduces_to_vacuum_part_at_low_temperature() {
        let s = make_scheme(1.0, 2.0, 3.0).unwrap();
        let g = g_total(1.0, 50.0, &s, &cfg()).unwrap().value;
        let m0 = m0_response(1.0, &s, &cfg()).unwrap().value;
        assert!(g >= 0.0);
        assert!(rel(g, m0 / (8.0 * PI)) < 1e-4, "{g}");
    }

    #[test]
    fn rejects_bad_arguments() {
        let s = make_scheme(1.0, 2.0, 3.0).unwrap();
        assert!(m0_response(-1.0, &s, &cfg()).is_err());
        assert!(mt_response(1.0, 0.0, &s, &cfg()).is_err());
        assert!(gt_bessel(0.0, 1.0, &s, &cfg()).is_err());
        assert!(RadialSpectrum::new(|_| 1.0, 0.0).is_err());
    }

    #[test]
    fn fpv2_is_linear_in_the_profile() {
        let s = make_scheme(1.0, 2.0, 3.0).unwrap();
        let zero = RadialSpectrum::new(|_| 0.0, 3.0).unwrap();
        assert_eq!(fpv2(&zero, 1.0, &s, &cfg()).unwrap().value, 0.0);
        let one = RadialSpectrum::new(|q| (-q * q).exp(), 5.0).unwrap();
        let two = RadialSpectrum::new(|q| 2.0 * (-q * q).exp(), 5.0).unwrap();
        let a = fpv2(&one, 1.0, &s, &cfg()).unwrap().value;
        let b = fpv2(&two, 1.0, &s, &cfg()).unwrap().value;
        assert!(a > 0.0);
        assert!(rel(b, 2.0 * a) < 1e-12);
    }
}
