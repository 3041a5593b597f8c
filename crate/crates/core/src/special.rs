//! Cancellation-safe special functions.
//!
//! * the proper-time kernels `x coth x − 1` and `x coth x − 1 − x²/3`,
//! * the Jacobi function `θ₂(0, 4πis/β²) = Σₙ e^{−(4π²s/β²)(n−½)²}` in its
//!   direct and Poisson-resummed forms, and its `s`-derivative,
//! * the thermal alternating sum `Σ_{n≥1} (−1)ⁿ e^{−β²n²/4s}`,
//! * modified Bessel functions `K₀, K₁, K₂` from the Sommerfeld integral,
//! * the Fermi-Dirac moments `∫₀^∞ x^{2n−1}/(eˣ+1) dx`,
//! * plain and accelerated alternating series.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{try_integrate_finite, try_integrate_from, HalfLineMap, QuadratureConfig};

/// Truncation and representation-switch thresholds for the series used in
/// this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPolicy {
    /// Stop once `|term| ≤ term_tol·|partial sum| + abs_floor`.
    pub term_tol: f64,
    pub abs_floor: f64,
    pub n_max: usize,
    /// Switch on the modular parameter `4π²s/β²`: direct sums at or above
    /// it, Poisson-resummed forms below.
    pub theta_switch: f64,
    /// Use Cohen-Villegas-Zagier acceleration for slowly decaying
    /// alternating series instead of summing them to `n_max`.
    pub accelerate: bool,
    pub accel_terms: usize,
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        Self {
            term_tol: 1e-16,
            abs_floor: 1e-300,
            n_max: 1_000_000,
            theta_switch: 1.0,
            accelerate: true,
            accel_terms: 40,
        }
    }
}

impl SeriesPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.term_tol > 0.0) || self.n_max < 1 || !(self.theta_switch > 0.0) || self.accel_terms < 2 {
            return Err(Error::InvalidConfig(format!("invalid series policy {self:?}")));
        }
        Ok(())
    }

    fn done(&self, term: f64, sum: f64) -> bool {
        term.abs() <= self.term_tol * sum.abs() + self.abs_floor
    }
}

// 2^{2k} B_{2k} / (2k)!, k = 1..19: Taylor coefficients of x coth x.
#[allow(clippy::excessive_precision)]
const XCOTH_COEFFS: [f64; 19] = [
    3.33333333333333314830e-01,
    -2.22222222222222230703e-02,
    2.11640211640211654484e-03,
    -2.11640211640211649063e-04,
    2.13777991555769345910e-05,
    -2.16440428080639722292e-06,
    2.19259478518737778460e-07,
    -2.22146087899796780939e-08,
    2.25078465168089944408e-09,
    -2.28051512045921833861e-10,
    2.31064325990026241594e-11,
    -2.34117068198248822227e-12,
    2.37210174002336530238e-13,
    -2.40344153333077046413e-14,
    2.43519540291833673306e-15,
    -2.46736880451720747773e-16,
    2.49996727712208099442e-17,
    -2.53299643574063490559e-18,
    2.56646197028262876928e-19,
];

/// Crossover between the short Taylor series and the stable evaluation of
/// `x coth x − 1`.
pub const COTH_SERIES_CUTOFF: f64 = 1e-2;

/// Σ_{k ≥ from} XCOTH_COEFFS[k-1] x^{2k}, Horner in x².
fn xcoth_tail(x: f64, from: usize) -> f64 {
    let y = x * x;
    let mut acc = 0.0;
    for k in (from..=XCOTH_COEFFS.len()).rev() {
        acc = acc * y + XCOTH_COEFFS[k - 1];
    }
    acc * y.powi(from as i32)
}

/// `x·coth(x) − 1` for `x ≥ 0`; negative input is folded to `|x|`.
///
/// Three-term Taylor series below [`COTH_SERIES_CUTOFF`], the full
/// Bernoulli series up to `x < 1`, and `x/tanh(x) − 1` beyond.
pub fn coth_m1(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        0.0
    } else if x < COTH_SERIES_CUTOFF {
        let y = x * x;
        y * (1.0 / 3.0 - y * (1.0 / 45.0 - y * 2.0 / 945.0))
    } else if x < 1.0 {
        xcoth_tail(x, 1)
    } else {
        x / x.tanh() - 1.0
    }
}

/// `x·coth(x) − 1 − x²/3`, the kernel of the unregularized density. It is
/// `−x⁴/45 + O(x⁶)` near zero and never positive.
pub fn coth_m1_subtracted(x: f64) -> f64 {
    let x = x.abs();
    if x < 1.0 {
        xcoth_tail(x, 2)
    } else {
        x / x.tanh() - 1.0 - x * x / 3.0
    }
}

/// Modular parameter `4π²s/β²`.
#[inline]
pub fn modular_parameter(s: f64, beta: f64) -> f64 {
    4.0 * PI * PI * s / (beta * beta)
}

/// `θ₂` from the direct sum `2 Σ_{n≥1} e^{−x(n−½)²}`, `x = 4π²s/β²`.
pub fn theta2_direct(s: f64, beta: f64) -> f64 {
    theta2_direct_with(s, beta, &SeriesPolicy::default())
}

pub fn theta2_direct_with(s: f64, beta: f64, policy: &SeriesPolicy) -> f64 {
    let x = modular_parameter(s, beta);
    let mut sum = 0.0;
    for n in 1..=policy.n_max {
        let h = n as f64 - 0.5;
        let term = (-x * h * h).exp();
        sum += term;
        if policy.done(term, sum) {
            break;
        }
    }
    2.0 * sum
}

/// `θ₂` from the Poisson-resummed form
/// `(πs)^{−1/2}(β/2)[1 + 2 Σ_{n≥1} (−1)ⁿ e^{−β²n²/4s}]`.
pub fn theta2_poisson(s: f64, beta: f64) -> f64 {
    theta2_poisson_with(s, beta, &SeriesPolicy::default())
}

pub fn theta2_poisson_with(s: f64, beta: f64, policy: &SeriesPolicy) -> f64 {
    let alpha = beta * beta / (4.0 * s);
    let bracket = 1.0 + 2.0 * gaussian_alternating_direct(alpha, policy);
    0.5 * beta * bracket / (PI * s).sqrt()
}

/// `θ₂` choosing the representation that converges fastest.
pub fn theta2(s: f64, beta: f64, policy: &SeriesPolicy) -> f64 {
    if modular_parameter(s, beta) >= policy.theta_switch {
        theta2_direct_with(s, beta, policy)
    } else {
        theta2_poisson_with(s, beta, policy)
    }
}

/// `d/ds θ₂(0, 4πis/β²)`, never positive.
///
/// Termwise derivative of the direct sum above the switch; below it, the
/// termwise derivative of the Poisson-resummed sum, which needs far fewer
/// terms there.
pub fn theta2_sprime(s: f64, beta: f64) -> f64 {
    theta2_sprime_with(s, beta, &SeriesPolicy::default())
}

pub fn theta2_sprime_with(s: f64, beta: f64, policy: &SeriesPolicy) -> f64 {
    let x = modular_parameter(s, beta);
    if x >= policy.theta_switch {
        let k = 4.0 * PI * PI / (beta * beta);
        let mut sum = 0.0;
        for n in 1..=policy.n_max {
            let h = n as f64 - 0.5;
            let term = h * h * (-x * h * h).exp();
            sum += term;
            if policy.done(term, sum) {
                break;
            }
        }
        -2.0 * k * sum
    } else {
        // d/ds [s^{-1/2} e^{-a/s}] = s^{-1/2} e^{-a/s} (a/s² − 1/(2s))
        let mut sum = 0.0;
        let lead = -0.5 / s;
        for n in 1..=policy.n_max {
            let a = beta * beta * (n * n) as f64 / 4.0;
            let e = (-a / s).exp();
            let term = if n % 2 == 1 { -e } else { e } * (a / (s * s) - 0.5 / s);
            sum += term;
            if e <= policy.term_tol * lead.abs() + policy.abs_floor {
                break;
            }
        }
        0.5 * beta / (PI * s).sqrt() * (lead + 2.0 * sum)
    }
}

/// `Σ_{n≥1} (−1)ⁿ e^{−αn²}` summed termwise.
fn gaussian_alternating_direct(alpha: f64, policy: &SeriesPolicy) -> f64 {
    let mut sum = 0.0;
    for n in 1..=policy.n_max {
        let e = (-alpha * (n * n) as f64).exp();
        sum += if n % 2 == 1 { -e } else { e };
        if e <= policy.term_tol * sum.abs() + policy.abs_floor {
            break;
        }
    }
    sum
}

/// The thermal sum `Σ_{n≥1} (−1)ⁿ e^{−β²n²/4s}`.
///
/// Summed directly while `β²/4s ≥ theta_switch`; for larger `s` the terms
/// decay slowly and the sum is taken from the direct θ₂ series through
/// `1 + 2Σ = θ₂·(2/β)·√(πs)`.
pub fn thermal_alternating_sum(s: f64, beta: f64, policy: &SeriesPolicy) -> f64 {
    let alpha = beta * beta / (4.0 * s);
    if alpha >= policy.theta_switch {
        gaussian_alternating_direct(alpha, policy)
    } else {
        let t = theta2_direct_with(s, beta, policy) * 2.0 * (PI * s).sqrt() / beta;
        0.5 * (t - 1.0)
    }
}

/// Termwise sum of `Σ_{n≥1} (−1)ⁿ aₙ` with the policy's stopping rule.
pub fn alternating_sum_direct<F>(mut term: F, policy: &SeriesPolicy) -> Result<f64>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut sum = 0.0;
    let mut last = f64::NAN;
    for n in 1..=policy.n_max {
        let a = term(n)?;
        let signed = if n % 2 == 1 { -a } else { a };
        sum += signed;
        last = a;
        if policy.done(a, sum) {
            return Ok(sum);
        }
    }
    Err(Error::SeriesTruncation {
        terms: policy.n_max,
        last_term: last,
    })
}

/// Cohen-Villegas-Zagier acceleration of `Σ_{n≥1} (−1)ⁿ aₙ` using the first
/// `terms` values of `aₙ`. For moment sequences `aₙ = ∫₀¹ tⁿ dμ(t)` the
/// relative error is below `2·(3+√8)^{−terms}`.
pub fn alternating_sum_cvz<F>(mut term: F, terms: usize) -> Result<f64>
where
    F: FnMut(usize) -> Result<f64>,
{
    let n = terms as f64;
    let d0 = (3.0 + 8f64.sqrt()).powf(n);
    let d = 0.5 * (d0 + 1.0 / d0);
    let mut b = -1.0;
    let mut c = -d;
    let mut s = 0.0;
    for k in 0..terms {
        c = b - c;
        s += c * term(k + 1)?;
        let kf = k as f64;
        b *= (kf + n) * (kf - n) / ((kf + 0.5) * (kf + 1.0));
    }
    // CVZ sums Σ_{k≥0} (−1)^k a_{k+1} = −Σ_{n≥1} (−1)ⁿ aₙ
    Ok(-s / d)
}

fn bessel_quad_config() -> QuadratureConfig {
    QuadratureConfig {
        rel_tol: 1e-13,
        abs_tol: 0.0,
        points_per_panel: 21,
        ..QuadratureConfig::default()
    }
}

/// `e^{x} K_ν(x)` from `∫₀^∞ e^{−x(cosh t − 1)} cosh(νt) dt`.
///
/// The integrand falls off double-exponentially, so the range is cut
/// where its logarithm has dropped by [`BESSEL_TAIL_LOG`].
pub fn bessel_k_scaled(nu: u32, x: f64) -> Result<f64> {
    if nu > 2 {
        return Err(Error::domain(format!("bessel_k supports ν ∈ {{0,1,2}}, got {nu}")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("bessel_k needs x > 0, got {x}")));
    }
    if nu == 2 {
        let k0 = bessel_k_scaled(0, x)?;
        let k1 = bessel_k_scaled(1, x)?;
        return Ok(k0 + 2.0 * k1 / x);
    }
    let nuf = nu as f64;
    let t_max = bessel_cutoff(nuf, x);
    let r = try_integrate_finite(
        |t| {
            let sh = (0.5 * t).sinh();
            let damp = -2.0 * x * sh * sh;
            Ok(if nu == 0 {
                damp.exp()
            } else {
                0.5 * ((damp + nuf * t).exp() + (damp - nuf * t).exp())
            })
        },
        0.0,
        t_max,
        &bessel_quad_config(),
    )?;
    Ok(r.value)
}

/// Log-drop of the Sommerfeld integrand at the truncation point; `e^{−40}`
/// is below double-precision resolution relative to the peak.
const BESSEL_TAIL_LOG: f64 = 40.0;

/// Smallest `t` with `x(cosh t − 1) − νt ≥ BESSEL_TAIL_LOG`, by Newton's
/// method from the right.
fn bessel_cutoff(nu: f64, x: f64) -> f64 {
    let g = |t: f64| x * (t.cosh() - 1.0) - nu * t - BESSEL_TAIL_LOG;
    // start beyond the root: cosh t ≥ e^t/2
    let mut t = ((2.0 * (BESSEL_TAIL_LOG + x) / x).ln() + 1.0).max(1.0);
    for _ in 0..60 {
        let step = g(t) / (x * t.sinh() - nu);
        t -= step;
        if step.abs() < 1e-12 * t {
            break;
        }
    }
    t.max(1e-3)
}

/// Modified Bessel function of the second kind `K_ν(x)`, `ν ∈ {0, 1, 2}`,
/// with `K₂ = K₀ + 2K₁/x`.
pub fn bessel_k(nu: u32, x: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, x)? * (-x).exp())
}

/// Bernoulli numbers `B₂, B₄, …, B₁₂`.
const BERNOULLI_EVEN: [f64; 6] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
];

fn check_fd_order(n: u32) -> Result<()> {
    if (1..=6).contains(&n) {
        Ok(())
    } else {
        Err(Error::domain(format!("Fermi-Dirac moment order must be in 1..=6, got {n}")))
    }
}

/// `∫₀^∞ x^{2n−1}/(eˣ+1) dx = (1 − 2^{1−2n})(2π)^{2n}|B_{2n}|/(4n)`.
pub fn fermi_dirac_integral(n: u32) -> Result<f64> {
    check_fd_order(n)?;
    let nf = n as f64;
    let b = BERNOULLI_EVEN[n as usize - 1].abs();
    Ok((1.0 - 2f64.powf(1.0 - 2.0 * nf)) * (2.0 * PI).powi(2 * n as i32) * b / (4.0 * nf))
}

/// Numerical twin of [`fermi_dirac_integral`].
pub fn fermi_dirac_quadrature(n: u32, cfg: &QuadratureConfig) -> Result<f64> {
    check_fd_order(n)?;
    let p = 2 * n as i32 - 1;
    let r = try_integrate_from(
        |x| {
            let e = (-x).exp();
            Ok(x.powi(p) * e / (1.0 + e))
        },
        0.0,
        HalfLineMap::Rational { scale: 2.0 * n as f64 },
        cfg,
    )?;
    Ok(r.value)
}
