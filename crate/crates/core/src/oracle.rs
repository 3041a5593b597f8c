//! Slow, independent evaluators for cross-checks.
//!
//! Nothing here uses the adaptive engine in [`crate::quadrature`] for its
//! own integrals: fixed-grid composite Simpson is the only rule, and the
//! Bessel functions are recomputed on fixed grids.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureConfig;
use crate::response::{gt_bessel, gt_coshint, m0_response, mt_response, uehling};
use crate::scheme::{make_scheme, PauliVillarsScheme};
use crate::special::{
    bessel_k, fermi_dirac_integral, fermi_dirac_quadrature, theta2_direct, theta2_poisson, theta2_sprime,
    SeriesPolicy,
};

/// Fermionic Matsubara frequency `ω(k,β) = (2k−1)π/β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatsubaraIndex {
    pub k: i64,
    pub beta: f64,
}

impl MatsubaraIndex {
    pub fn new(k: i64, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain(format!("beta must be positive and finite, got {beta}")));
        }
        Ok(Self { k, beta })
    }

    pub fn omega(&self) -> f64 {
        (2 * self.k - 1) as f64 * PI / self.beta
    }

    /// The index with opposite frequency, `1 − k`.
    pub fn mirror(&self) -> Self {
        Self {
            k: 1 - self.k,
            beta: self.beta,
        }
    }
}

/// Symmetric partial sum of `x tanh x = Σ_k 4x²/((2k−1)²π² + 4x²)` over
/// `|2k−1| ≤ 2K−1`.
pub fn tanh_partial_sum(x: f64, terms: usize) -> Result<f64> {
    if terms == 0 {
        return Err(Error::InvalidConfig("need at least one term".into()));
    }
    let x2 = 4.0 * x * x;
    let mut sum = 0.0;
    // smallest terms first
    for j in (1..=terms).rev() {
        let o = (2 * j - 1) as f64 * PI;
        sum += x2 / (o * o + x2);
    }
    Ok(2.0 * sum)
}

/// Composite Simpson rule with `n` (even) subintervals.
pub fn reference_quadrature<F>(mut f: F, a: f64, b: f64, n: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if n < 2 || n % 2 == 1 {
        return Err(Error::InvalidConfig(format!("Simpson needs an even n ≥ 2, got {n}")));
    }
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    Ok(s * h / 3.0)
}

/// Fallible Simpson, for integrands that call other oracles.
fn try_simpson<F>(mut f: F, a: f64, b: f64, n: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut err = None;
    let v = reference_quadrature(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        n,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// `K_ν(x)` for `ν ∈ {0,1,2}` by Simpson on the Sommerfeld integral,
/// truncated where the integrand has dropped below `e^{−45}` of its peak.
pub fn reference_bessel_k(nu: u32, x: f64) -> Result<f64> {
    if nu > 2 || !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("reference K_ν needs ν ≤ 2 and x > 0, got ν={nu}, x={x}")));
    }
    let nuf = nu as f64;
    let mut t_max: f64 = 1.0;
    while x * (t_max.cosh() - 1.0) - nuf * t_max < 45.0 {
        t_max += 0.5;
    }
    let v = reference_quadrature(
        |t| {
            let sh = (0.5 * t).sinh();
            (-2.0 * x * sh * sh).exp() * (nuf * t).cosh()
        },
        0.0,
        t_max,
        4000,
    )?;
    Ok(v * (-x).exp())
}

/// `2θ₂` summed over `n ∈ [−N, N]` with no truncation policy.
pub fn theta2_bruteforce(s: f64, beta: f64, n: i64) -> f64 {
    let x = 4.0 * PI * PI * s / (beta * beta);
    (-n..=n).map(|k| (-x * (k as f64 - 0.5).powi(2)).exp()).sum()
}

/// Lower end of the range where the Bessel series is used for `Gᵀ` in
/// [`mt_oracle`]; below it the series needs too many terms.
const BESSEL_FROM_BETA_M: f64 = 0.25;

/// `Mᵀ(q,β) = (8π/q²)(1/β) ∫₀^β Gᵀ(q,b) db` by Simpson in `b`.
///
/// `Gᵀ` comes from the Bessel series for `b·m₀ ≥ ¼` and from the resummed
/// double integral below, where `b = b_c v⁴` tames the endpoint.
pub fn mt_oracle(q: f64, beta: f64, scheme: &PauliVillarsScheme, cfg: &QuadratureConfig) -> Result<f64> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::domain(format!("the oracle divides by q², need q > 0, got {q}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!("beta must be positive and finite, got {beta}")));
    }
    let bc = (BESSEL_FROM_BETA_M / scheme.lightest_mass()).min(beta);
    let low = try_simpson(
        |v| {
            if v == 0.0 {
                return Ok(0.0);
            }
            let b = bc * v.powi(4);
            Ok(4.0 * bc * v.powi(3) * gt_coshint(q, b, scheme, cfg)?.value)
        },
        0.0,
        1.0,
        128,
    )?;
    let high = if beta > bc {
        try_simpson(|b| Ok(gt_bessel(q, b, scheme, cfg)?.value), bc, beta, 64)?
    } else {
        0.0
    };
    Ok(8.0 * PI / (q * q) * (low + high) / beta)
}

/// `fᵀ_PV(a,β)` from closed Bessel forms.
///
/// With `sa coth(sa) − 1 = sa − 1 + 2sa Σ_{k≥1} e^{−2ksa}` every term of
/// the proper-time integral is `∫ s^{ν−1} e^{−γs−α/s} ds = 2(α/γ)^{ν/2}
/// K_ν(2√(αγ))` with `ν ∈ {−1, −2}`, `α = β²n²/4`, `γ = mⱼ² + 2ka`.
pub fn ft_pv_bessel_oracle(a: f64, beta: f64, scheme: &PauliVillarsScheme) -> Result<f64> {
    let a = a.abs();
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!("beta must be positive and finite, got {beta}")));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    let c = scheme.coeffs();
    let m = scheme.masses();
    // ∫ s^{−2} e^{−γs−α/s} ds = 2√(γ/α) K₁(2√(αγ)),  ∫ s^{−3} … = 2(γ/α) K₂(…)
    let k_int = |nu: u32, alpha: f64, gamma: f64| -> Result<f64> {
        let z = 2.0 * (alpha * gamma).sqrt();
        Ok(2.0 * (gamma / alpha).powf(0.5 * nu as f64) * reference_bessel_k(nu, z)?)
    };
    let mut total = 0.0;
    for n in 1.. {
        let alpha = 0.25 * beta * beta * (n * n) as f64;
        let mut term = 0.0;
        for j in 0..3 {
            let g = m[j] * m[j];
            let mut t = a * k_int(1, alpha, g)? - k_int(2, alpha, g)?;
            for k in 1.. {
                let piece = 2.0 * a * k_int(1, alpha, g + 2.0 * k as f64 * a)?;
                t += piece;
                if piece.abs() <= 1e-17 * t.abs() {
                    break;
                }
            }
            term += c[j] * t;
        }
        total += if n % 2 == 1 { -term } else { term };
        if term.abs() <= 1e-17 * total.abs() || n > 10_000 {
            break;
        }
    }
    Ok(total / (4.0 * PI * PI))
}

/// One line of the self-test report.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheck {
    pub name: &'static str,
    pub value: f64,
    pub oracle: f64,
    pub rel_diff: f64,
    pub tolerance: f64,
}

impl SelfCheck {
    fn new(name: &'static str, value: f64, oracle: f64, tolerance: f64) -> Self {
        let rel_diff = if oracle == 0.0 {
            value.abs()
        } else {
            ((value - oracle) / oracle).abs()
        };
        Self {
            name,
            value,
            oracle,
            rel_diff,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.rel_diff <= self.tolerance
    }
}

/// Runs every identity check against its oracle.
pub fn selftest(cfg: &QuadratureConfig) -> Result<Vec<SelfCheck>> {
    let s = make_scheme(1.0, 2.0, 3.0)?;
    let mut out = Vec::new();

    let (r0, r2) = s.sum_rule_residuals();
    out.push(SelfCheck::new("sum_rule_c", r0, 0.0, 1e-12));
    out.push(SelfCheck::new("sum_rule_cm2", r2, 0.0, 1e-12));
    out.push(SelfCheck::new("lambda_1_2_3", s.lambda(), 1.568_105_363_366_231_4, 1e-12));

    let beta = 1.0;
    let sx = beta * beta / (4.0 * PI);
    let brute = theta2_bruteforce(sx, beta, 60);
    out.push(SelfCheck::new("theta2_direct", theta2_direct(sx, beta), brute, 1e-13));
    out.push(SelfCheck::new("theta2_poisson", theta2_poisson(sx, beta), brute, 1e-10));
    let h = 1e-5 * sx;
    let fd = (theta2_bruteforce(sx + h, beta, 60) - theta2_bruteforce(sx - h, beta, 60)) / (2.0 * h);
    out.push(SelfCheck::new("theta2_sprime", theta2_sprime(sx, beta), fd, 1e-6));

    for (name, nu) in [("bessel_k0", 0), ("bessel_k1", 1), ("bessel_k2", 2)] {
        out.push(SelfCheck::new(name, bessel_k(nu, 1.0)?, reference_bessel_k(nu, 1.0)?, 1e-10));
    }

    for (name, n) in [("fermi_dirac_1", 1), ("fermi_dirac_2", 2), ("fermi_dirac_3", 3)] {
        out.push(SelfCheck::new(name, fermi_dirac_quadrature(n, cfg)?, fermi_dirac_integral(n)?, 1e-10));
    }

    out.push(SelfCheck::new("tanh_partial_sum", tanh_partial_sum(1.0, 100_000)?, 1f64.tanh(), 1e-5));

    let m0 = m0_response(0.0, &s, cfg)?.value;
    out.push(SelfCheck::new("m0_origin", m0, 2.0 * s.log_lambda() / (3.0 * PI), 1e-8));

    let u_ref = reference_quadrature(|z| z * z * (1.0 - z * z / 3.0) / (1.0 + 0.25 * (1.0 - z * z)), 0.0, 1.0, 200)?
        / (4.0 * PI);
    out.push(SelfCheck::new("uehling_1", uehling(1.0, cfg)?.value, u_ref, 1e-9));

    let gb = gt_bessel(1.0, 1.0, &s, cfg)?.value;
    let gc = gt_coshint(1.0, 1.0, &s, cfg)?.value;
    out.push(SelfCheck::new("gt_bessel_vs_coshint", gb, gc, 1e-6));

    let mt = mt_response(1.0, 1.0, &s, cfg)?.value;
    out.push(SelfCheck::new("mt_vs_oracle", mt, mt_oracle(1.0, 1.0, &s, cfg)?, 1e-6));

    let ft = crate::lagrangian::ft_pv(1.0, 1.0, &s, cfg)?.value;
    out.push(SelfCheck::new("ft_pv_vs_bessel", ft, ft_pv_bessel_oracle(1.0, 1.0, &s)?, 1e-6));

    let pol = SeriesPolicy::default();
    out.push(SelfCheck::new(
        "ft_vacuum_massless",
        crate::lagrangian::ft_vacuum_single(1.0, 1e-3, &pol)?,
        -7.0 * PI * PI / 180.0,
        1e-3,
    ));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matsubara_frequencies_are_antisymmetric() {
        for k in -3..5 {
            let w = MatsubaraIndex::new(k, 2.0).unwrap();
            assert_eq!(w.omega(), -w.mirror().omega());
            assert_ne!(w.omega(), 0.0);
        }
        assert!(MatsubaraIndex::new(1, 0.0).is_err());
    }

    #[test]
    fn tanh_sum_tail() {
        assert_eq!(tanh_partial_sum(0.0, 10).unwrap(), 0.0);
        let exact = 1f64.tanh();
        let e1 = (tanh_partial_sum(1.0, 10_000).unwrap() - exact).abs();
        let e2 = (tanh_partial_sum(1.0, 20_000).unwrap() - exact).abs();
        assert!(e1 <= 2.0 / (PI * PI * 10_000.0));
        assert!(e2 < e1);
    }

    #[test]
    fn simpson_rule() {
        assert!((reference_quadrature(|x| x * x, 0.0, 1.0, 2).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        assert!((reference_quadrature(f64::sin, 0.0, PI, 64).unwrap() - 2.0).abs() < 1e-6);
        assert!(reference_quadrature(|x| x, 0.0, 1.0, 3).is_err());
    }

    #[test]
    fn reference_bessel_values() {
        assert!((reference_bessel_k(0, 1.0).unwrap() - 0.421_024_438_240_708_33).abs() < 1e-13);
        assert!((reference_bessel_k(1, 1.0).unwrap() - 0.601_907_230_197_234_57).abs() < 1e-13);
        assert!(reference_bessel_k(0, 0.0).is_err());
    }

    #[test]
    fn mt_oracle_needs_momentum() {
        let s = make_scheme(1.0, 2.0, 3.0).unwrap();
        assert!(matches!(
            mt_oracle(0.0, 1.0, &s, &QuadratureConfig::default()),
            Err(Error::Domain(_))
        ));
    }
}
