//! Pauli-Villars mass/coefficient schemes with two auxiliary fields.
//!
//! A scheme holds three masses `m0 < m1 < m2` (natural units, `m0` is the
//! physical fermion mass) and coefficients `c0 = 1, c1 < 0, c2 > 0` fixed by
//! the sum rules `Σ cⱼ = 0` and `Σ cⱼ mⱼ² = 0`. The derived averaged
//! ultraviolet cutoff is `log Λ² = -Σ cⱼ log mⱼ²`.

use crate::error::{Error, Result};

/// Below this value of `s·m₂²` the sum `Σ cⱼ e^{-s mⱼ²}` is taken from the
/// cached moment expansion instead of being summed termwise.
pub const MOMENT_SWITCH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliVillarsScheme {
    masses: [f64; 3],
    coeffs: [f64; 3],
    lambda: f64,
    moment4: f64,
    moment6: f64,
    moment8: f64,
}

impl PauliVillarsScheme {
    /// Builds the scheme from the closed-form coefficients.
    pub fn new(m0: f64, m1: f64, m2: f64) -> Result<Self> {
        if !(m0.is_finite() && m1.is_finite() && m2.is_finite()) {
            return Err(Error::DegenerateMasses(format!(
                "masses must be finite, got ({m0}, {m1}, {m2})"
            )));
        }
        if !(m0 > 0.0 && m0 < m1 && m1 < m2) {
            return Err(Error::DegenerateMasses(format!(
                "need 0 < m0 < m1 < m2, got ({m0}, {m1}, {m2})"
            )));
        }
        let (s0, s1, s2) = (m0 * m0, m1 * m1, m2 * m2);
        let denom = s2 - s1;
        if denom <= 0.0 || s1 <= s0 {
            return Err(Error::DegenerateMasses(format!(
                "squared masses coincide in floating point: ({m0}, {m1}, {m2})"
            )));
        }
        let c1 = (s0 - s2) / denom;
        let c2 = (s1 - s0) / denom;
        let coeffs = [1.0, c1, c2];
        let masses = [m0, m1, m2];
        let sq = [s0, s1, s2];

        // Σcⱼ = 0 lets the logs be taken relative to m0, so Λ is exactly
        // independent of the overall mass scale.
        let log_ratio = -(c1 * (m1 / m0).ln() + c2 * (m2 / m0).ln());
        let moment = |p: i32| (0..3).map(|j| coeffs[j] * sq[j].powi(p)).sum::<f64>();

        Ok(Self {
            masses,
            coeffs,
            lambda: log_ratio.exp(),
            moment4: moment(2),
            moment6: moment(3),
            moment8: moment(4),
        })
    }

    pub fn masses(&self) -> [f64; 3] {
        self.masses
    }

    pub fn coeffs(&self) -> [f64; 3] {
        self.coeffs
    }

    /// The averaged ultraviolet cutoff Λ.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn log_lambda(&self) -> f64 {
        self.lambda.ln()
    }

    /// `Σ cⱼ mⱼ⁴`
    pub fn moment4(&self) -> f64 {
        self.moment4
    }

    /// `Σ cⱼ mⱼ⁶`
    pub fn moment6(&self) -> f64 {
        self.moment6
    }

    /// `Σ cⱼ mⱼ⁸`
    pub fn moment8(&self) -> f64 {
        self.moment8
    }

    pub fn lightest_mass(&self) -> f64 {
        self.masses[0]
    }

    pub fn heaviest_mass(&self) -> f64 {
        self.masses[2]
    }

    /// Relative residuals of the two sum rules, `(|Σc| / Σ|c|, |Σcm²| / Σ|c|m²)`.
    pub fn sum_rule_residuals(&self) -> (f64, f64) {
        let c = self.coeffs;
        let m = self.masses;
        let s: f64 = c.iter().sum();
        let s_abs: f64 = c.iter().map(|x| x.abs()).sum();
        let t: f64 = (0..3).map(|j| c[j] * m[j] * m[j]).sum();
        let t_abs: f64 = (0..3).map(|j| (c[j] * m[j] * m[j]).abs()).sum();
        (s.abs() / s_abs, t.abs() / t_abs)
    }

    /// `Σ cⱼ e^{-s mⱼ²}` for `s ≥ 0`, free of the cancellation at small `s`.
    ///
    /// Below `s·m₂² < MOMENT_SWITCH` the moment series
    /// `s²/2·M4 − s³/6·M6 + s⁴/24·M8` is used. Up to `s·m₂² < 1` the sum
    /// rules let us subtract `1 − s mⱼ²` from each exponential, which keeps
    /// roughly three more digits than the plain sum near the switch.
    pub fn exp_sum(&self, s: f64) -> f64 {
        let x2 = s * self.masses[2] * self.masses[2];
        if x2 < MOMENT_SWITCH {
            self.exp_sum_moments(s)
        } else if x2 < 1.0 {
            self.exp_sum_direct(s)
        } else {
            (0..3)
                .map(|j| self.coeffs[j] * (-s * self.masses[j] * self.masses[j]).exp())
                .sum()
        }
    }

    pub(crate) fn exp_sum_moments(&self, s: f64) -> f64 {
        let s2 = s * s;
        s2 * (0.5 * self.moment4 - s * self.moment6 / 6.0 + s2 * self.moment8 / 24.0)
    }

    pub(crate) fn exp_sum_direct(&self, s: f64) -> f64 {
        (0..3)
            .map(|j| {
                let x = s * self.masses[j] * self.masses[j];
                self.coeffs[j] * (x + (-x).exp_m1())
            })
            .sum()
    }

    /// `Σ cⱼ log(mⱼ² + w)` for `w ≥ 0`, written so that the large-`w`
    /// cancellation (the result decays like `w⁻²`) is resolved analytically.
    pub fn log_sum(&self, w: f64) -> f64 {
        let m = self.masses;
        let c = self.coeffs;
        if w <= m[0] * m[0] {
            return (0..3).map(|j| c[j] * (m[j] * m[j] + w).ln()).sum();
        }
        // Σc log w = 0 and Σc m²/w = 0, so only log1p(y) - y survives.
        (0..3)
            .map(|j| {
                let y = m[j] * m[j] / w;
                c[j] * log1p_minus_x(y)
            })
            .sum()
    }
}

/// `ln(1 + y) − y` without cancellation for small `y`.
fn log1p_minus_x(y: f64) -> f64 {
    if y.abs() < 1e-2 {
        // -y²/2 + y³/3 - y⁴/4 + ...
        let mut term = -y * y / 2.0;
        let mut sum = term;
        for k in 3..12 {
            term *= -y * (k as f64 - 1.0) / k as f64;
            sum += term;
        }
        sum
    } else {
        y.ln_1p() - y
    }
}

/// The averaged ultraviolet cutoff of a scheme.
pub fn averaged_cutoff(scheme: &PauliVillarsScheme) -> f64 {
    scheme.lambda()
}

/// Convenience constructor matching the library-level operation name.
pub fn make_scheme(m0: f64, m1: f64, m2: f64) -> Result<PauliVillarsScheme> {
    PauliVillarsScheme::new(m0, m1, m2)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Solves the 2x2 system `c1 + c2 = -1`, `c1 m1² + c2 m2² = -m0²` by
    /// Cramer's rule, independently of the closed forms.
    fn linear_system_oracle(m: [f64; 3]) -> [f64; 3] {
        let (a, b) = (m[1] * m[1], m[2] * m[2]);
        let det = b - a;
        let c1 = (-b + m[0] * m[0]) / det;
        let c2 = (-m[0] * m[0] + a) / det;
        [1.0, c1, c2]
    }

    #[test]
    fn coefficients_for_one_two_three() {
        let s = make_scheme(1.0, 2.0, 3.0).unwrap();
        let oracle = linear_system_oracle([1.0, 2.0, 3.0]);
        for (c, o) in s.coeffs().iter().zip(oracle) {
            assert!((c - o).abs() < 1e-15);
        }
        assert!((s.coeffs()[1] + 1.6).abs() < 1e-15);
        assert!((s.coeffs()[2] - 0.6).abs() < 1e-15);
        assert_eq!(s.moment4(), 24.0);
    }

    #[test]
    fn coefficients_for_wide_scheme() {
        let s = make_scheme(1.0, 10.0, 100.0).unwrap();
        assert!((s.coeffs()[1] + 9999.0 / 9900.0).abs() < 1e-15);
        assert!((s.coeffs()[2] - 99.0 / 9900.0).abs() < 1e-17);
        let (r0, r2) = s.sum_rule_residuals();
        assert!(r0 <= 1e-12 && r2 <= 1e-12);
    }

    #[test]
    fn degenerate_masses_rejected() {
        assert!(matches!(
            make_scheme(1.0, 2.0, 2.0),
            Err(Error::DegenerateMasses(_))
        ));
        assert!(make_scheme(2.0, 1.0, 3.0).is_err());
        assert!(make_scheme(0.0, 1.0, 3.0).is_err());
        assert!(make_scheme(1.0, 2.0, f64::NAN).is_err());
    }

    #[test]
    fn cutoff_reference_values() {
        // 50-digit reference evaluations of -Σ c log m².
        let l = averaged_cutoff(&make_scheme(1.0, 2.0, 3.0).unwrap());
        assert!((l - 1.568_105_363_366_231_4).abs() < 1e-14);
        let l = averaged_cutoff(&make_scheme(1.0, 10.0, 100.0).unwrap());
        assert!((l - 9.772_372_209_558_107).abs() < 1e-12);
    }

    #[test]
    fn cutoff_scale_invariant() {
        let base = make_scheme(1.0, 2.0, 3.0).unwrap().lambda();
        for t in [0.5, 7.0] {
            let l = make_scheme(t, 2.0 * t, 3.0 * t).unwrap().lambda();
            assert!(((l - base) / base).abs() <= 1e-12, "t={t}");
        }
    }

    #[test]
    fn exp_sum_branches_agree_at_switch() {
        let s = make_scheme(1.0, 2.0, 3.0).unwrap();
        let at = MOMENT_SWITCH / 9.0;
        let a = s.exp_sum_moments(at);
        let b = s.exp_sum_direct(at);
        assert!(((a - b) / a).abs() < 1e-10, "{a} vs {b}");
        // 40-digit reference at s = 1/9000
        let golden = 1.480_713_529_902_021_7e-7;
        assert!(((a - golden) / golden).abs() < 1e-10, "{a}");
        assert!(((b - golden) / golden).abs() < 1e-10, "{b}");
    }

    #[test]
    fn log_sum_matches_naive_in_overlap() {
        let s = make_scheme(1.0, 2.0, 3.0).unwrap();
        for w in [1.5, 3.0, 10.0] {
            let naive: f64 = (0..3)
                .map(|j| s.coeffs()[j] * (s.masses()[j].powi(2) + w).ln())
                .sum();
            let v = s.log_sum(w);
            assert!((v - naive).abs() < 1e-13 * naive.abs().max(1e-3), "{w}");
        }
        // large w: -M4/(2 w²)
        let w = 1e6;
        let v = s.log_sum(w);
        let lead = -24.0 / (2.0 * w * w);
        assert!(((v - lead) / lead).abs() < 1e-4);
    }
}
