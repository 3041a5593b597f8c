//! Euler-Heisenberg energy densities of a constant magnetic field `a = |B|`.
//!
//! * `f⁰(a, m) = (1/8π²) ∫₀^∞ e^{−sm²} (sa coth(sa) − 1 − (sa)²/3) ds/s³`, the
//!   unregularized single-mass density with its charge counterterm,
//! * `f⁰_PV(a) = (1/8π²) ∫₀^∞ Σⱼ cⱼ e^{−smⱼ²} (sa coth(sa) − 1) ds/s³`,
//! * `fᵀ_PV(a,β) = (1/4π²) ∫₀^∞ Σⱼ cⱼ e^{−smⱼ²} (sa coth(sa) − 1)
//!   Σ_{n≥1} (−1)ⁿ e^{−β²n²/4s} ds/s³`.
//!
//! Densities are free-energy densities, so the thermal vacuum part is
//! negative: for a massless fermion at `a = 0` it is `−7π²T⁴/180`.
//! Densities depend on `|a|` only; negative input is folded.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{try_integrate_finite, try_integrate_from, HalfLineMap, IntegralResult, QuadratureConfig};
use crate::scheme::PauliVillarsScheme;
use crate::special::{
    alternating_sum_cvz, alternating_sum_direct, bessel_k, coth_m1, coth_m1_subtracted,
    thermal_alternating_sum, SeriesPolicy,
};

// Below this proper time the integrands are O(s) and s³ would underflow.
const S_FLOOR: f64 = 1e-90;

/// Energy density at one field strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPoint {
    pub a: f64,
    /// `f64::INFINITY` for zero temperature.
    pub beta: f64,
    pub f0: f64,
    pub ft: f64,
    pub total: f64,
    pub err: f64,
    pub converged: bool,
}

fn check_field(a: f64) -> Result<f64> {
    if a.is_finite() {
        Ok(a.abs())
    } else {
        Err(Error::domain(format!("field strength must be finite, got {a}")))
    }
}

/// True when `a` lies beyond the heaviest regulator scale `m₂²`, where
/// values are computed but fall outside the bounded-field regime.
pub fn is_extrapolated(a: f64, scheme: &PauliVillarsScheme) -> bool {
    let m2 = scheme.heaviest_mass();
    a.abs() > m2 * m2
}

/// Unregularized single-mass density, never positive.
pub fn f0_single(a: f64, m: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    let a = check_field(a)?;
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::domain(format!("mass must be positive, got {m}")));
    }
    if a == 0.0 {
        return Ok(IntegralResult::exact(0.0));
    }
    let m2 = m * m;
    let r = try_integrate_from(
        |s| {
            let e = (-s * m2).exp();
            if e == 0.0 || s < S_FLOOR {
                return Ok(0.0);
            }
            Ok(e * coth_m1_subtracted(s * a) / (s * s * s))
        },
        0.0,
        HalfLineMap::Logarithmic { center: 1.0 / m2 },
        cfg,
    )?;
    Ok(r.scaled(1.0 / (8.0 * PI * PI)))
}

/// Pauli-Villars regularized zero-temperature density.
pub fn f0_pv(a: f64, scheme: &PauliVillarsScheme, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    let a = check_field(a)?;
    if a == 0.0 {
        return Ok(IntegralResult::exact(0.0));
    }
    let center = 1.0 / (scheme.lightest_mass() * scheme.heaviest_mass());
    let r = try_integrate_from(
        |s| {
            let es = scheme.exp_sum(s);
            if es == 0.0 || s < S_FLOOR {
                return Ok(0.0);
            }
            Ok(es * coth_m1(s * a) / (s * s * s))
        },
        0.0,
        HalfLineMap::Logarithmic { center },
        cfg,
    )?;
    Ok(r.scaled(1.0 / (8.0 * PI * PI)))
}

/// Thermal correction `fᵀ_PV(a,β)`; zero for `β = +∞`.
pub fn ft_pv(a: f64, beta: f64, scheme: &PauliVillarsScheme, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    ft_pv_with(a, beta, scheme, cfg, &SeriesPolicy::default())
}

pub fn ft_pv_with(
    a: f64,
    beta: f64,
    scheme: &PauliVillarsScheme,
    cfg: &QuadratureConfig,
    policy: &SeriesPolicy,
) -> Result<IntegralResult> {
    let a = check_field(a)?;
    if !(beta > 0.0) {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    policy.validate()?;
    if a == 0.0 || beta.is_infinite() {
        return Ok(IntegralResult::exact(0.0));
    }
    let mut integrand = |s: f64| -> Result<f64> {
        if s < S_FLOOR {
            return Ok(0.0);
        }
        let es = scheme.exp_sum(s);
        if es == 0.0 {
            return Ok(0.0);
        }
        let t = thermal_alternating_sum(s, beta, policy);
        Ok(es * coth_m1(s * a) * t / (s * s * s))
    };
    // below β²/4 the thermal factor e^{−β²/4s} dominates, above it the mass
    let split = 0.25 * beta * beta;
    let low = try_integrate_finite(&mut integrand, 0.0, split, cfg)?;
    let m0 = scheme.lightest_mass();
    let high = try_integrate_from(&mut integrand, split, HalfLineMap::Logarithmic { center: 1.0 / (m0 * m0) }, cfg)?;
    Ok(low.plus(high).scaled(1.0 / (4.0 * PI * PI)))
}

/// Field-free thermal density of a single fermion of mass `m`,
/// `(1/4π²) ∫₀^∞ e^{−sm²} Σ_{n≥1} (−1)ⁿ e^{−β²n²/4s} ds/s³`.
///
/// For `m > 0` this is `(2m²/π²β²) Σₙ (−1)ⁿ K₂(mβn)/n²`; for `m = 0` it is
/// `−7π²/(180β⁴)`.
pub fn ft_vacuum_single(beta: f64, m: f64, policy: &SeriesPolicy) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!("beta must be positive and finite, got {beta}")));
    }
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::domain(format!("mass must be nonnegative, got {m}")));
    }
    if m == 0.0 {
        return Ok(-7.0 * PI * PI / (180.0 * beta.powi(4)));
    }
    let x = m * beta;
    let term = |n: usize| -> Result<f64> {
        let nf = n as f64;
        Ok(bessel_k(2, x * nf)? / (nf * nf))
    };
    // K₂(xn)/n² is a Laplace transform in n, so CVZ applies
    let sum = if policy.accelerate {
        alternating_sum_cvz(term, policy.accel_terms)?
    } else {
        alternating_sum_direct(term, policy)?
    };
    Ok(2.0 * m * m / (PI * PI * beta * beta) * sum)
}

/// `f⁰_PV(a) + fᵀ_PV(a,β)`; pass `f64::INFINITY` for zero temperature.
pub fn total_density(a: f64, beta: f64, scheme: &PauliVillarsScheme, cfg: &QuadratureConfig) -> Result<DensityPoint> {
    let f0 = f0_pv(a, scheme, cfg)?;
    let ft = ft_pv(a, beta, scheme, cfg)?;
    Ok(DensityPoint {
        a: a.abs(),
        beta,
        f0: f0.value,
        ft: ft.value,
        total: f0.value + ft.value,
        err: f0.error_estimate + ft.error_estimate,
        converged: f0.converged && ft.converged,
    })
}
