//! Adaptive Gauss-Kronrod integration on finite intervals and half-lines.
//!
//! Every integral in the crate goes through [`try_integrate_finite`]. Panels
//! are bisected globally in order of decreasing error estimate until the sum
//! of the estimates falls below `max(rel_tol·|value|, abs_tol)`. Hitting
//! `max_depth` or `max_panels` is reported through
//! [`IntegralResult::converged`] rather than as an error.
//!
//! Half-line integrals `∫ₐ^∞` are mapped onto `(0, 1)` either rationally,
//! `s = a + scale·t/(1−t)`, or logarithmically around a centre `c`,
//! `s = a + c·e^{±t/(1−t)}`. The logarithmic map is meant for integrands
//! spanning many decades, such as proper-time kernels.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections of the initial interval.
    pub max_depth: u32,
    /// Kronrod points per panel: 15 or 21.
    pub points_per_panel: usize,
    /// Hard cap on the number of panels per integral.
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_depth: 50,
            points_per_panel: 15,
            max_panels: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol >= 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "abs_tol must be nonnegative, got {}",
                self.abs_tol
            )));
        }
        if self.max_depth < 1 {
            return Err(Error::InvalidConfig("max_depth must be at least 1".into()));
        }
        if self.points_per_panel != 15 && self.points_per_panel != 21 {
            return Err(Error::InvalidConfig(format!(
                "points_per_panel must be 15 or 21, got {}",
                self.points_per_panel
            )));
        }
        if self.max_panels < 1 {
            return Err(Error::InvalidConfig("max_panels must be at least 1".into()));
        }
        Ok(())
    }

    /// Configuration for an integral nested inside another one.
    pub fn inner(&self) -> Self {
        Self {
            rel_tol: (self.rel_tol * 0.1).max(1e-14),
            abs_tol: self.abs_tol * 0.1,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels_used: usize,
    pub converged: bool,
}

impl IntegralResult {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error_estimate: 0.0,
            panels_used: 0,
            converged: true,
        }
    }

    pub fn scaled(self, k: f64) -> Self {
        Self {
            value: self.value * k,
            error_estimate: self.error_estimate * k.abs(),
            ..self
        }
    }

    pub fn plus(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            panels_used: self.panels_used + other.panels_used,
            converged: self.converged && other.converged,
        }
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            if self.error_estimate == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.error_estimate / self.value.abs()
        }
    }
}

/// How a half-line `[a, ∞)` is mapped onto `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HalfLineMap {
    /// `s = a + scale·t/(1−t)`.
    Rational { scale: f64 },
    /// `s = a + center·e^{±t/(1−t)}`, both branches folded onto `(0, 1)`.
    Logarithmic { center: f64 },
}

impl Default for HalfLineMap {
    fn default() -> Self {
        HalfLineMap::Rational { scale: 1.0 }
    }
}

struct Rule {
    xgk: &'static [f64],
    wgk: &'static [f64],
    wg: &'static [f64],
}

#[allow(clippy::excessive_precision)]
const GK15: Rule = Rule {
    xgk: &[
        0.991_455_371_120_812_639_206_854_697_526_329,
        0.949_107_912_342_758_524_526_189_684_047_851,
        0.864_864_423_359_769_072_789_712_788_640_926,
        0.741_531_185_599_394_439_863_864_773_280_788,
        0.586_087_235_467_691_130_294_144_838_258_730,
        0.405_845_151_377_397_166_906_606_412_076_961,
        0.207_784_955_007_898_467_600_689_403_773_245,
        0.0,
    ],
    wgk: &[
        0.022_935_322_010_529_224_963_732_008_058_970,
        0.063_092_092_629_978_553_290_700_663_189_204,
        0.104_790_010_322_250_183_839_876_322_541_518,
        0.140_653_259_715_525_918_745_189_590_510_238,
        0.169_004_726_639_267_902_826_583_426_598_550,
        0.190_350_578_064_785_409_913_256_402_421_014,
        0.204_432_940_075_298_892_414_161_999_234_649,
        0.209_482_141_084_727_828_012_999_174_891_714,
    ],
    // Gauss weights at xgk[1], xgk[3], xgk[5], xgk[7].
    wg: &[
        0.129_484_966_168_869_693_270_611_432_679_082,
        0.279_705_391_489_276_667_901_467_771_423_780,
        0.381_830_050_505_118_944_950_369_775_488_975,
        0.417_959_183_673_469_387_755_102_040_816_327,
    ],
};

#[allow(clippy::excessive_precision)]
const GK21: Rule = Rule {
    xgk: &[
        0.995_657_163_025_808_080_735_527_280_689_003,
        0.973_906_528_517_171_720_077_964_012_084_452,
        0.930_157_491_355_708_226_001_207_180_059_508,
        0.865_063_366_688_984_510_732_096_688_423_493,
        0.780_817_726_586_416_897_063_717_578_345_042,
        0.679_409_568_299_024_406_234_327_365_114_874,
        0.562_757_134_668_604_683_339_000_099_272_694,
        0.433_395_394_129_247_190_799_265_943_165_784,
        0.294_392_862_701_460_198_131_126_603_103_866,
        0.148_874_338_981_631_210_884_826_001_129_720,
        0.0,
    ],
    wgk: &[
        0.011_694_638_867_371_874_278_064_396_062_192,
        0.032_558_162_307_964_727_478_818_972_459_390,
        0.054_755_896_574_351_996_031_381_300_244_580,
        0.075_039_674_810_919_952_767_043_140_916_190,
        0.093_125_454_583_697_605_535_065_465_083_366,
        0.109_387_158_802_297_641_899_210_590_325_805,
        0.123_491_976_262_065_851_077_958_109_831_074,
        0.134_709_217_311_473_325_928_054_001_771_707,
        0.142_775_938_577_060_080_797_094_273_138_717,
        0.147_739_104_901_338_491_374_841_515_972_068,
        0.149_445_554_002_916_905_664_936_468_389_821,
    ],
    // Gauss weights at xgk[1], xgk[3], ..., xgk[9]; the centre is not a Gauss node.
    wg: &[
        0.066_671_344_308_688_137_593_568_809_893_332,
        0.149_451_349_150_580_593_145_776_339_657_697,
        0.219_086_362_515_982_043_995_534_934_228_163,
        0.269_266_719_309_996_355_091_226_921_569_469,
        0.295_524_224_714_752_870_173_892_994_651_338,
    ],
};

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn eval<F>(f: &mut F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let v = f(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteEvaluation { at: x, value: v })
    }
}

fn kronrod_panel<F>(f: &mut F, rule: &Rule, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let n = rule.xgk.len();
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = eval(f, center)?;

    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    let mut res_k = f_center * rule.wgk[n - 1];
    let mut res_g = if n % 2 == 0 {
        f_center * rule.wg[rule.wg.len() - 1]
    } else {
        0.0
    };
    let mut res_abs = res_k.abs();

    for j in 0..n - 1 {
        let dx = half * rule.xgk[j];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += rule.wgk[j] * (f1 + f2);
        res_abs += rule.wgk[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += rule.wg[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = rule.wgk[n - 1] * (f_center - mean).abs();
    for j in 0..n - 1 {
        res_asc += rule.wgk[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

/// Integrates a fallible integrand over `[a, b]`.
pub fn try_integrate_finite<F>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!(
            "finite integration limits required, got [{a}, {b}]"
        )));
    }
    if a > b {
        return Err(Error::domain(format!("need a <= b, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(IntegralResult::exact(0.0));
    }
    let rule = if cfg.points_per_panel == 21 {
        &GK21
    } else {
        &GK15
    };

    let (value, error) = kronrod_panel(&mut f, rule, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a,
        b,
        value,
        error,
        depth: 0,
    });
    let mut frozen: Vec<Panel> = Vec::new();
    let mut total_value = value;
    let mut total_error = error;
    let mut panels = 1usize;
    let mut converged = false;

    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total_value.abs());
        if total_error <= tol {
            converged = true;
            break;
        }
        if panels >= cfg.max_panels {
            break;
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        let too_narrow = (worst.b - worst.a) <= 100.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE);
        if worst.depth >= cfg.max_depth || too_narrow {
            frozen.push(worst);
            continue;
        }
        let (v1, e1) = kronrod_panel(&mut f, rule, worst.a, mid)?;
        let (v2, e2) = kronrod_panel(&mut f, rule, mid, worst.b)?;
        total_value += v1 + v2 - worst.value;
        total_error += e1 + e2 - worst.error;
        panels += 1;
        for (lo, hi, v, e) in [(worst.a, mid, v1, e1), (mid, worst.b, v2, e2)] {
            heap.push(Panel {
                a: lo,
                b: hi,
                value: v,
                error: e,
                depth: worst.depth + 1,
            });
        }
    }

    // Resum in interval order so the result does not depend on heap history.
    let mut all: Vec<Panel> = heap.into_vec();
    all.extend(frozen);
    all.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value: f64 = all.iter().map(|p| p.value).sum();
    let error_estimate: f64 = all.iter().map(|p| p.error).sum();
    if converged {
        converged = error_estimate <= cfg.abs_tol.max(cfg.rel_tol * value.abs());
    }
    Ok(IntegralResult {
        value,
        error_estimate,
        panels_used: panels,
        converged,
    })
}

/// Integrates `f` over `[a, b]`.
pub fn integrate_finite<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<IntegralResult>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_finite(|x| Ok(f(x)), a, b, cfg)
}

/// Integrates a fallible integrand over `[a, ∞)`.
pub fn try_integrate_from<F>(
    mut f: F,
    a: f64,
    map: HalfLineMap,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !a.is_finite() {
        return Err(Error::domain(format!("finite lower limit required, got {a}")));
    }
    match map {
        HalfLineMap::Rational { scale } => {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::InvalidConfig(format!("map scale must be positive, got {scale}")));
            }
            try_integrate_finite(
                |t| {
                    let one_minus = 1.0 - t;
                    let r = scale * t / one_minus;
                    let s = a + r;
                    if !s.is_finite() {
                        return Ok(0.0);
                    }
                    let jac = scale / (one_minus * one_minus);
                    let v = f(s)?;
                    Ok(if v == 0.0 { 0.0 } else { v * jac })
                },
                0.0,
                1.0,
                cfg,
            )
        }
        HalfLineMap::Logarithmic { center } => {
            if !(center > 0.0 && center.is_finite()) {
                return Err(Error::InvalidConfig(format!("map centre must be positive, got {center}")));
            }
            try_integrate_finite(
                |t| {
                    let one_minus = 1.0 - t;
                    let tau = t / one_minus;
                    let dtau = 1.0 / (one_minus * one_minus);
                    let mut acc = 0.0;
                    let up = center * tau.exp();
                    if up.is_finite() && (a + up).is_finite() {
                        let v = f(a + up)?;
                        if v != 0.0 {
                            acc += v * up * dtau;
                        }
                    }
                    let down = center * (-tau).exp();
                    if down > 0.0 {
                        let v = f(a + down)?;
                        if v != 0.0 {
                            acc += v * down * dtau;
                        }
                    }
                    Ok(acc)
                },
                0.0,
                1.0,
                cfg,
            )
        }
    }
}

/// Integrates `f` over `(0, ∞)` with the given half-line map.
pub fn integrate_semiinf_mapped<F>(mut f: F, map: HalfLineMap, cfg: &QuadratureConfig) -> Result<IntegralResult>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_from(|s| Ok(f(s)), 0.0, map, cfg)
}

/// Integrates `f` over `(0, ∞)` with `s = t/(1−t)`.
pub fn integrate_semiinf<F>(f: F, cfg: &QuadratureConfig) -> Result<IntegralResult>
where
    F: FnMut(f64) -> f64,
{
    integrate_semiinf_mapped(f, HalfLineMap::default(), cfg)
}

/// Integrates `f` over `(0, ∞)` with the logarithmic substitution `s = eᵘ`,
/// for integrands with exponential tails spread over many decades.
pub fn integrate_semiinf_exp_tail<F>(f: F, cfg: &QuadratureConfig) -> Result<IntegralResult>
where
    F: FnMut(f64) -> f64,
{
    integrate_semiinf_mapped(f, HalfLineMap::Logarithmic { center: 1.0 }, cfg)
}

/// Collects convergence information from integrals evaluated inside the
/// integrand of an outer integral.
#[derive(Debug, Default)]
pub(crate) struct NestedTracker {
    max_rel_err: Cell<f64>,
    all_converged: Cell<bool>,
    panels: Cell<usize>,
    seen: Cell<bool>,
}

impl NestedTracker {
    pub(crate) fn new() -> Self {
        Self {
            all_converged: Cell::new(true),
            ..Default::default()
        }
    }

    pub(crate) fn record(&self, r: &IntegralResult) -> f64 {
        self.seen.set(true);
        if r.value != 0.0 {
            self.max_rel_err
                .set(self.max_rel_err.get().max(r.error_estimate / r.value.abs()));
        }
        if !r.converged {
            self.all_converged.set(false);
        }
        self.panels.set(self.panels.get() + r.panels_used);
        r.value
    }

    pub(crate) fn finish(&self, outer: IntegralResult) -> IntegralResult {
        if !self.seen.get() {
            return outer;
        }
        IntegralResult {
            value: outer.value,
            error_estimate: outer.error_estimate + outer.value.abs() * self.max_rel_err.get(),
            panels_used: outer.panels_used + self.panels.get(),
            converged: outer.converged && self.all_converged.get(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn polynomial_and_constant() {
        let r = integrate_finite(|x| x * x, 0.0, 1.0, &cfg()).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.converged);
        let r = integrate_finite(|_| 1.0, 0.0, 1.0, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sine_over_half_period() {
        let r = integrate_finite(f64::sin, 0.0, PI, &cfg()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn gk21_rule() {
        let c = QuadratureConfig {
            points_per_panel: 21,
            ..cfg()
        };
        let r = integrate_finite(|x| x.exp(), 0.0, 1.0, &c).unwrap();
        assert!((r.value - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn half_line_battery() {
        for map in [
            HalfLineMap::Rational { scale: 1.0 },
            HalfLineMap::Logarithmic { center: 1.0 },
        ] {
            let r = integrate_semiinf_mapped(|s| (-s).exp(), map, &cfg()).unwrap();
            assert!((r.value - 1.0).abs() < 1e-12, "{map:?}");
            let r = integrate_semiinf_mapped(|s| (-s * s).exp(), map, &cfg()).unwrap();
            assert!((r.value - PI.sqrt() / 2.0).abs() < 1e-12, "{map:?}");
            let r = integrate_semiinf_mapped(|s| s * (-s).exp(), map, &cfg()).unwrap();
            assert!((r.value - 1.0).abs() < 1e-12, "{map:?}");
        }
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀^∞ e^{-s}/√s ds = √π
        let r = integrate_semiinf_exp_tail(|s| (-s).exp() / s.sqrt(), &cfg()).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn shifted_half_line() {
        let r = try_integrate_from(|s| Ok((-s).exp()), 2.0, HalfLineMap::Rational { scale: 1.0 }, &cfg())
            .unwrap();
        assert!((r.value - (-2f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn non_finite_is_an_error() {
        let r = integrate_finite(|x| 1.0 / (x - 0.5), 0.0, 1.0, &cfg());
        // 0.5 is the centre node of the first panel
        assert!(matches!(r, Err(Error::NonFiniteEvaluation { .. })));
    }

    #[test]
    fn depth_limit_reports_non_convergence() {
        let c = QuadratureConfig {
            max_depth: 1,
            rel_tol: 1e-14,
            abs_tol: 0.0,
            ..cfg()
        };
        let r = integrate_finite(|x| x.abs().sqrt(), -1.0, 1.0, &c).unwrap();
        assert!(!r.converged);
        assert!(r.value.is_finite());
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = cfg();
        c.rel_tol = 0.0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.points_per_panel = 7;
        assert!(integrate_finite(|x| x, 0.0, 1.0, &c).is_err());
    }

    #[test]
    fn reversed_limits_rejected() {
        assert!(integrate_finite(|x| x, 1.0, 0.0, &cfg()).is_err());
        assert_eq!(integrate_finite(|x| x, 1.0, 1.0, &cfg()).unwrap().value, 0.0);
    }
}
