//! Sampled magnetic fields on uniform grids and their local-density energy
//! `∫ f(|B(x)|) dx`, evaluated as a cell-centre Riemann sum.
//!
//! Grid files are CSV with the header `x,y,z,Bx,By,Bz` and one row per
//! cell in row-major order (`z` fastest).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lagrangian::{is_extrapolated, total_density};
use crate::quadrature::QuadratureConfig;
use crate::scheme::PauliVillarsScheme;

pub const CSV_HEADER: &str = "x,y,z,Bx,By,Bz";

/// Relative tolerance on grid coordinates.
const COORD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    origin: [f64; 3],
    spacing: f64,
    dims: [usize; 3],
    values: Vec<[f64; 3]>,
}

impl FieldGrid {
    pub fn new(origin: [f64; 3], spacing: f64, dims: [usize; 3], values: Vec<[f64; 3]>) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::domain(format!("grid spacing must be positive, got {spacing}")));
        }
        if dims.contains(&0) {
            return Err(Error::domain(format!("grid dimensions must be positive, got {dims:?}")));
        }
        let expected = dims[0] * dims[1] * dims[2];
        if values.len() != expected {
            return Err(Error::IncompleteGrid {
                expected,
                found: values.len(),
            });
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain("field values must be finite"));
        }
        Ok(Self {
            origin,
            spacing,
            dims,
            values,
        })
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Volume `N·h³` assigned to the cells.
    pub fn volume(&self) -> f64 {
        self.len() as f64 * self.spacing.powi(3)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        self.values[self.index(i, j, k)]
    }

    pub fn position(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let h = self.spacing;
        [
            self.origin[0] + i as f64 * h,
            self.origin[1] + j as f64 * h,
            self.origin[2] + k as f64 * h,
        ]
    }

    /// Largest `|B|` over cells on the grid boundary, a measure of how much
    /// of the field the box truncates.
    pub fn max_boundary_field(&self) -> f64 {
        let [nx, ny, nz] = self.dims;
        let mut max = 0.0f64;
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    let edge = i == 0 || j == 0 || k == 0 || i + 1 == nx || j + 1 == ny || k + 1 == nz;
                    if edge {
                        max = max.max(norm(self.get(i, j, k)));
                    }
                }
            }
        }
        max
    }

    /// Tricubic (4-point Lagrange per axis) interpolation at `p`, clamped
    /// to the grid box. Axes with fewer than 4 cells fall back to linear.
    pub fn interpolate(&self, p: [f64; 3]) -> [f64; 3] {
        let mut start = [0usize; 3];
        let mut weights = [[0.0f64; 4]; 3];
        let mut width = [0usize; 3];
        for ax in 0..3 {
            let n = self.dims[ax];
            let t = ((p[ax] - self.origin[ax]) / self.spacing).clamp(0.0, (n - 1) as f64);
            if n == 1 {
                width[ax] = 1;
                weights[ax][0] = 1.0;
            } else if n < 4 {
                let i = (t.floor() as usize).min(n - 2);
                let f = t - i as f64;
                start[ax] = i;
                width[ax] = 2;
                weights[ax][0] = 1.0 - f;
                weights[ax][1] = f;
            } else {
                let i = (t.floor() as usize).clamp(1, n - 3) - 1;
                let x = t - i as f64;
                start[ax] = i;
                width[ax] = 4;
                for (m, w) in weights[ax].iter_mut().enumerate() {
                    let mut l = 1.0;
                    for q in 0..4 {
                        if q != m {
                            l *= (x - q as f64) / (m as f64 - q as f64);
                        }
                    }
                    *w = l;
                }
            }
        }
        let mut out = [0.0; 3];
        for a in 0..width[0] {
            for b in 0..width[1] {
                let wab = weights[0][a] * weights[1][b];
                for c in 0..width[2] {
                    let w = wab * weights[2][c];
                    let v = self.get(start[0] + a, start[1] + b, start[2] + c);
                    for d in 0..3 {
                        out[d] += w * v[d];
                    }
                }
            }
        }
        out
    }
}

/// `|B|`, symmetric in the first two components so that quarter turns
/// about `z` reproduce it bit for bit.
#[inline]
fn norm(b: [f64; 3]) -> f64 {
    ((b[0] * b[0] + b[1] * b[1]) + b[2] * b[2]).sqrt()
}

fn parse_row(line: &str, lineno: usize) -> Result<[f64; 6]> {
    let mut out = [0.0; 6];
    let mut n = 0;
    for field in line.split(',') {
        if n == 6 {
            return Err(Error::Parse {
                line: lineno,
                message: "more than 6 columns".into(),
            });
        }
        out[n] = field.trim().parse::<f64>().map_err(|e| Error::Parse {
            line: lineno,
            message: format!("column {}: {e}", n + 1),
        })?;
        if !out[n].is_finite() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("column {} is not finite", n + 1),
            });
        }
        n += 1;
    }
    if n != 6 {
        return Err(Error::Parse {
            line: lineno,
            message: format!("expected 6 columns, found {n}"),
        });
    }
    Ok(out)
}

/// Distinct coordinate values along one axis, merged within the
/// coordinate tolerance.
fn axis_levels(mut xs: Vec<f64>, scale: f64) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for x in xs {
        match out.last() {
            Some(&l) if (x - l).abs() <= COORD_TOL * scale => {}
            _ => out.push(x),
        }
    }
    out
}

/// Parses a grid from CSV text.
pub fn parse_field(text: &str) -> Result<FieldGrid> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == CSV_HEADER => {}
        Some((_, h)) => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `{CSV_HEADER}`, found `{h}`"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty file".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        rows.push(parse_row(line, i + 1)?);
    }
    if rows.is_empty() {
        return Err(Error::IncompleteGrid { expected: 1, found: 0 });
    }

    let extent = rows
        .iter()
        .flat_map(|r| r[..3].iter().map(|x| x.abs()))
        .fold(0.0f64, f64::max)
        .max(1.0);
    let levels: Vec<Vec<f64>> = (0..3)
        .map(|ax| axis_levels(rows.iter().map(|r| r[ax]).collect(), extent))
        .collect();
    let dims = [levels[0].len(), levels[1].len(), levels[2].len()];

    let mut spacing = None;
    for (ax, lv) in levels.iter().enumerate() {
        for w in lv.windows(2) {
            let d = w[1] - w[0];
            match spacing {
                None => spacing = Some(d),
                Some(h) => {
                    if ((d - h) / h).abs() > COORD_TOL.max(COORD_TOL * extent / h) {
                        return Err(Error::NonUniformGrid(format!(
                            "axis {} step {d} differs from spacing {h}",
                            ["x", "y", "z"][ax]
                        )));
                    }
                }
            }
        }
    }
    let h = spacing.ok_or_else(|| Error::NonUniformGrid("a single cell has no spacing".into()))?;

    let expected = dims[0] * dims[1] * dims[2];
    if rows.len() != expected {
        return Err(Error::IncompleteGrid {
            expected,
            found: rows.len(),
        });
    }
    let origin = [levels[0][0], levels[1][0], levels[2][0]];
    let tol = COORD_TOL * extent.max(h);
    let mut values = Vec::with_capacity(expected);
    for (r, row) in rows.iter().enumerate() {
        let idx = [r / (dims[1] * dims[2]), (r / dims[2]) % dims[1], r % dims[2]];
        for ax in 0..3 {
            let want = origin[ax] + idx[ax] as f64 * h;
            if (row[ax] - want).abs() > tol {
                return Err(Error::Parse {
                    line: r + 2,
                    message: format!(
                        "row out of order: {} = {} where {want} was expected (z varies fastest)",
                        ["x", "y", "z"][ax],
                        row[ax]
                    ),
                });
            }
        }
        values.push([row[3], row[4], row[5]]);
    }
    FieldGrid::new(origin, h, dims, values)
}

/// Reads a grid file.
pub fn load_field(path: impl AsRef<Path>) -> Result<FieldGrid> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_field(&text)
}

/// Serializes a grid in the file format read by [`load_field`].
pub fn field_to_csv(grid: &FieldGrid) -> String {
    let mut s = String::with_capacity(64 * grid.len());
    s.push_str(CSV_HEADER);
    s.push('\n');
    let [nx, ny, nz] = grid.dims();
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let p = grid.position(i, j, k);
                let b = grid.get(i, j, k);
                let _ = writeln!(s, "{:e},{:e},{:e},{:e},{:e},{:e}", p[0], p[1], p[2], b[0], b[1], b[2]);
            }
        }
    }
    s
}

/// Largest central-difference divergence over interior cells.
pub fn divergence_check(grid: &FieldGrid) -> Result<f64> {
    let [nx, ny, nz] = grid.dims();
    if nx < 3 || ny < 3 || nz < 3 {
        return Err(Error::GridTooSmall(grid.dims()));
    }
    let inv = 0.5 / grid.spacing();
    let mut max = 0.0f64;
    for i in 1..nx - 1 {
        for j in 1..ny - 1 {
            for k in 1..nz - 1 {
                let d = (grid.get(i + 1, j, k)[0] - grid.get(i - 1, j, k)[0])
                    + (grid.get(i, j + 1, k)[1] - grid.get(i, j - 1, k)[1])
                    + (grid.get(i, j, k + 1)[2] - grid.get(i, j, k - 1)[2]);
                max = max.max((d * inv).abs());
            }
        }
    }
    Ok(max)
}

/// Analytic divergence-free test fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestField {
    /// `B ≡ b`.
    Constant { b: [f64; 3] },
    /// `B = curl(ψ ẑ)` with `ψ = A e^{−r²/2σ²}`, `A` chosen so that the
    /// largest `|B|` equals `peak`. Field lines are circles about the `z`
    /// axis.
    GaussianLoop { peak: f64, sigma: f64 },
}

impl TestField {
    pub fn gaussian_loop() -> Self {
        TestField::GaussianLoop { peak: 0.1, sigma: 1.0 }
    }

    pub fn eval(&self, p: [f64; 3]) -> [f64; 3] {
        match *self {
            TestField::Constant { b } => b,
            TestField::GaussianLoop { peak, sigma } => {
                let s2 = sigma * sigma;
                // max of |∇ψ| is A/(σ√e), reached at ρ = σ, z = 0
                let amp = peak * sigma * std::f64::consts::E.sqrt();
                let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                let g = -amp * (-0.5 * r2 / s2).exp() / s2;
                // (∂yψ, −∂xψ, 0)
                [g * p[1], -g * p[0], 0.0]
            }
        }
    }
}

/// Samples a test field on a grid centred on the origin.
pub fn make_test_field(kind: &TestField, dims: [usize; 3], spacing: f64) -> Result<FieldGrid> {
    match *kind {
        TestField::Constant { b } => {
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain("constant field must be finite"));
            }
        }
        TestField::GaussianLoop { peak, sigma } => {
            if !(peak.is_finite() && sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::domain(format!(
                    "gaussian loop needs finite peak and sigma > 0, got peak={peak}, sigma={sigma}"
                )));
            }
        }
    }
    if !(spacing > 0.0 && spacing.is_finite()) || dims.contains(&0) {
        return Err(Error::domain(format!("bad grid: dims {dims:?}, spacing {spacing}")));
    }
    let origin = dims.map(|n| -0.5 * (n - 1) as f64 * spacing);
    let mut values = Vec::with_capacity(dims.iter().product());
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            for k in 0..dims[2] {
                let p = [
                    origin[0] + i as f64 * spacing,
                    origin[1] + j as f64 * spacing,
                    origin[2] + k as f64 * spacing,
                ];
                values.push(kind.eval(p));
            }
        }
    }
    FieldGrid::new(origin, spacing, dims, values)
}

/// The grid rotated by a quarter turn about `z`: `B′(x) = R B(R⁻¹x)`.
pub fn rotate_quarter_z(grid: &FieldGrid) -> FieldGrid {
    let [nx, ny, nz] = grid.dims();
    let h = grid.spacing();
    let o = grid.origin();
    let origin = [-(o[1] + (ny - 1) as f64 * h), o[0], o[2]];
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..ny {
        for j in 0..nx {
            for k in 0..nz {
                let b = grid.get(j, ny - 1 - i, k);
                values.push([-b[1], b[0], b[2]]);
            }
        }
    }
    FieldGrid {
        origin,
        spacing: h,
        dims: [ny, nx, nz],
        values,
    }
}

/// The field `x ↦ B(εx)` sampled at the original spacing over the scaled
/// box, by tricubic interpolation.
pub fn resample(grid: &FieldGrid, epsilon: f64) -> Result<FieldGrid> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let h = grid.spacing();
    let o = grid.origin();
    let dims = grid.dims().map(|n| ((n - 1) as f64 / epsilon + 1e-9).floor() as usize + 1);
    if dims.iter().any(|&n| n < 3) {
        return Err(Error::Resample(format!(
            "epsilon = {epsilon} leaves {dims:?} cells, need at least 3 per axis"
        )));
    }
    let origin = o.map(|x| x / epsilon);
    let mut values = Vec::with_capacity(dims.iter().product());
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            for k in 0..dims[2] {
                let p = [
                    epsilon * (origin[0] + i as f64 * h),
                    epsilon * (origin[1] + j as f64 * h),
                    epsilon * (origin[2] + k as f64 * h),
                ];
                values.push(grid.interpolate(p));
            }
        }
    }
    FieldGrid::new(origin, h, dims, values)
}

/// Result of a local-density energy sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalEnergy {
    pub energy: f64,
    /// Cells with `|B| > m₂²`.
    pub cells_clipped: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub energy: f64,
    pub epsilon: f64,
    /// `ε⁻³ · energy`
    pub scaled_energy: f64,
    /// Energy of the resampled field `B(εx)`, which should match
    /// `scaled_energy` up to discretization error.
    pub resampled_energy: f64,
    pub cells_clipped: usize,
    pub converged: bool,
}

impl EnergyReport {
    /// Relative mismatch between the resampled and the scaled energy.
    pub fn resampling_mismatch(&self) -> f64 {
        if self.scaled_energy == 0.0 {
            self.resampled_energy.abs()
        } else {
            ((self.resampled_energy - self.scaled_energy) / self.scaled_energy).abs()
        }
    }
}

/// Neumaier-compensated sum, in iteration order.
fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// `Σ_cells (f⁰_PV + fᵀ_PV)(|B|) h³`.
///
/// Densities are evaluated once per distinct `|B|` in parallel on the
/// current rayon pool; the sum runs in cell order, so the result does not
/// depend on the thread count.
pub fn local_energy(
    grid: &FieldGrid,
    beta: f64,
    scheme: &PauliVillarsScheme,
    cfg: &QuadratureConfig,
) -> Result<LocalEnergy> {
    let norms: Vec<f64> = grid.values().iter().map(|&b| norm(b)).collect();
    let mut distinct: Vec<f64> = norms.iter().copied().filter(|&a| a != 0.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let dens: Vec<(f64, bool)> = distinct
        .par_iter()
        .map(|&a| total_density(a, beta, scheme, cfg).map(|p| (p.total, p.converged)))
        .collect::<Result<_>>()?;
    let table: HashMap<u64, f64> = distinct.iter().zip(&dens).map(|(a, d)| (a.to_bits(), d.0)).collect();
    let converged = dens.iter().all(|d| d.1);
    let cells_clipped = norms.iter().filter(|&&a| is_extrapolated(a, scheme)).count();
    let sum = compensated_sum(norms.iter().map(|&a| if a == 0.0 { 0.0 } else { table[&a.to_bits()] }));
    Ok(LocalEnergy {
        energy: sum * grid.spacing().powi(3),
        cells_clipped,
        converged,
    })
}

/// Local-density prediction `ε⁻³ ∫ f(|B|) dx` for the scaled configuration
/// `B(εx)`, together with a direct evaluation on the resampled grid.
pub fn scaled_energy(
    grid: &FieldGrid,
    epsilon: f64,
    beta: f64,
    scheme: &PauliVillarsScheme,
    cfg: &QuadratureConfig,
) -> Result<EnergyReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let base = local_energy(grid, beta, scheme, cfg)?;
    let scaled = base.energy / epsilon.powi(3);
    let (resampled_energy, conv) = if epsilon == 1.0 {
        (base.energy, true)
    } else {
        let r = local_energy(&resample(grid, epsilon)?, beta, scheme, cfg)?;
        (r.energy, r.converged)
    };
    Ok(EnergyReport {
        energy: base.energy,
        epsilon,
        scaled_energy: scaled,
        resampled_energy,
        cells_clipped: base.cells_clipped,
        converged: base.converged && conv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::make_scheme;

    fn small_csv(skip: Option<usize>, bad_x: bool) -> String {
        let mut s = String::from("x,y,z,Bx,By,Bz\n");
        let mut n = 0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    if Some(n) != skip {
                        let x = if bad_x && i == 1 { 1.5 } else { i as f64 };
                        s += &format!("{x},{j},{k},0,0,1\n");
                    }
                    n += 1;
                }
            }
        }
        s
    }

    #[test]
    fn parses_constant_cube() {
        let g = parse_field(&small_csv(None, false)).unwrap();
        assert_eq!(g.dims(), [2, 2, 2]);
        assert_eq!(g.spacing(), 1.0);
        assert!(g.values().iter().all(|v| *v == [0.0, 0.0, 1.0]));
    }

    #[test]
    fn missing_row_is_incomplete() {
        let e = parse_field(&small_csv(Some(3), false)).unwrap_err();
        assert!(matches!(e, Error::IncompleteGrid { expected: 8, found: 7 }), "{e}");
    }

    #[test]
    fn irregular_axis_is_nonuniform() {
        let mut s = String::from("x,y,z,Bx,By,Bz\n");
        for x in [0.0, 1.0, 2.5] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    s += &format!("{x},{y},{z},0,0,1\n");
                }
            }
        }
        assert!(matches!(parse_field(&s), Err(Error::NonUniformGrid(_))));
    }

    #[test]
    fn malformed_rows_rejected() {
        assert!(matches!(parse_field("x,y,z\n"), Err(Error::Parse { line: 1, .. })));
        let s = "x,y,z,Bx,By,Bz\n0,0,0,1,2\n";
        assert!(matches!(parse_field(s), Err(Error::Parse { line: 2, .. })));
        let s = "x,y,z,Bx,By,Bz\n0,0,0,1,2,abc\n";
        assert!(matches!(parse_field(s), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn csv_round_trip() {
        let g = make_test_field(&TestField::gaussian_loop(), [4, 5, 6], 0.5).unwrap();
        let back = parse_field(&field_to_csv(&g)).unwrap();
        assert_eq!(back.dims(), g.dims());
        assert!((back.spacing() - 0.5).abs() < 1e-12);
        for (a, b) in back.values().iter().zip(g.values()) {
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() <= 1e-15 * b[c].abs().max(1e-300));
            }
        }
    }

    #[test]
    fn divergence_of_simple_fields() {
        let g = make_test_field(&TestField::Constant { b: [0.0, 0.0, 1.0] }, [8, 8, 8], 0.5).unwrap();
        assert_eq!(divergence_check(&g).unwrap(), 0.0);
        let mut vals = Vec::new();
        for i in 0..4 {
            for _ in 0..4 {
                for _ in 0..4 {
                    vals.push([i as f64 * 0.3, 0.0, 0.0]);
                }
            }
        }
        let g = FieldGrid::new([0.0; 3], 0.3, [4, 4, 4], vals).unwrap();
        assert!((divergence_check(&g).unwrap() - 1.0).abs() < 1e-12);
        let g = FieldGrid::new([0.0; 3], 1.0, [2, 3, 3], vec![[0.0; 3]; 18]).unwrap();
        assert!(matches!(divergence_check(&g), Err(Error::GridTooSmall(_))));
    }

    #[test]
    fn loop_field_peak_and_zero_amplitude() {
        let f = TestField::gaussian_loop();
        let b = f.eval([1.0, 0.0, 0.0]);
        assert!((norm(b) - 0.1).abs() < 1e-15);
        let z = make_test_field(&TestField::GaussianLoop { peak: 0.0, sigma: 1.0 }, [4, 4, 4], 1.0).unwrap();
        assert!(z.values().iter().flatten().all(|&v| v == 0.0));
        assert!(make_test_field(&TestField::GaussianLoop { peak: 1.0, sigma: 0.0 }, [4, 4, 4], 1.0).is_err());
    }

    #[test]
    fn quarter_turn_maps_positions() {
        let f = TestField::GaussianLoop { peak: 0.3, sigma: 0.7 };
        let g = make_test_field(&f, [5, 7, 3], 0.4).unwrap();
        let r = rotate_quarter_z(&g);
        // the loop is axially symmetric, so the rotated grid samples the same field
        let [nx, ny, nz] = r.dims();
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    let want = f.eval(r.position(i, j, k));
                    let got = r.get(i, j, k);
                    for c in 0..3 {
                        assert!((want[c] - got[c]).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn interpolation_is_exact_on_cubics() {
        let f = |p: [f64; 3]| p[0].powi(3) - 2.0 * p[1] * p[1] * p[2] + p[2];
        let mut vals = Vec::new();
        for i in 0..6 {
            for j in 0..5 {
                for k in 0..4 {
                    let v = f([i as f64 * 0.5, j as f64 * 0.5, k as f64 * 0.5]);
                    vals.push([v, 0.0, 0.0]);
                }
            }
        }
        let g = FieldGrid::new([0.0; 3], 0.5, [6, 5, 4], vals).unwrap();
        for p in [[0.3, 0.7, 1.1], [2.4, 1.9, 0.05], [1.25, 0.25, 1.5]] {
            assert!((g.interpolate(p)[0] - f(p)).abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn resample_rejects_collapse() {
        let g = make_test_field(&TestField::gaussian_loop(), [8, 8, 8], 0.5).unwrap();
        assert!(matches!(resample(&g, 4.0), Err(Error::Resample(_))));
        let r = resample(&g, 0.5).unwrap();
        assert_eq!(r.dims(), [15, 15, 15]);
    }

    #[test]
    fn constant_field_energy() {
        let s = make_scheme(1.0, 2.0, 3.0).unwrap();
        let cfg = QuadratureConfig::default();
        let g = make_test_field(&TestField::Constant { b: [0.3, 0.4, 0.0] }, [6, 6, 6], 0.5).unwrap();
        let e = local_energy(&g, 1.0, &s, &cfg).unwrap();
        let d = total_density(0.5, 1.0, &s, &cfg).unwrap().total;
        assert!(((e.energy - g.volume() * d) / (g.volume() * d)).abs() < 1e-12);
        assert_eq!(e.cells_clipped, 0);
        let rep = scaled_energy(&g, 1.0, 1.0, &s, &cfg).unwrap();
        assert_eq!(rep.scaled_energy, rep.energy);
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let s = make_scheme(1.0, 2.0, 3.0).unwrap();
        let g = make_test_field(&TestField::Constant { b: [0.0; 3] }, [3, 3, 3], 1.0).unwrap();
        let e = local_energy(&g, 1.0, &s, &QuadratureConfig::default()).unwrap();
        assert_eq!(e.energy, 0.0);
    }
}
