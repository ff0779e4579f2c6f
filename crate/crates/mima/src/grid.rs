//! Periodic grid, real/spectral field carriers, and exact spectral calculus.
//!
//! Conventions (fixed for the whole crate):
//! - The domain is the L-periodic box `[0,L]^3`, sampled on a uniform
//!   `nz x ny x nx` collocation grid; arrays are `[z][y][x]` row-major.
//! - Wavenumbers are `k = 2*pi*m/L` with integer index
//!   `m in {-n/2+1, ..., n/2}`; the unmatched Nyquist mode `m = n/2` is
//!   treated as having zero derivative.
//! - Forward transforms are normalized by `1/(nx*ny*nz)` so the zero mode
//!   equals the field mean, and Parseval reads
//!   `sum f^2 * dV = L^3 * sum |f_hat|^2`.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * PI;

/// Uniform periodic grid on `[0,L]^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub l: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl GridSpec {
    pub fn new(l: f64, nx: usize, ny: usize, nz: usize) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidParameter(format!("box side L must be positive, got {l}")));
        }
        for (name, n) in [("nx", nx), ("ny", ny), ("nz", nz)] {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be an even integer >= 4, got {n}"
                )));
            }
        }
        Ok(GridSpec { l, nx, ny, nz })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.l / self.nx as f64
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        self.l / self.ny as f64
    }

    #[inline]
    pub fn dz(&self) -> f64 {
        self.l / self.nz as f64
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.dx() * self.dy() * self.dz()
    }

    #[inline]
    pub fn cell_area_h(&self) -> f64 {
        self.dx() * self.dy()
    }

    #[inline]
    pub fn idx(&self, iz: usize, iy: usize, ix: usize) -> usize {
        (iz * self.ny + iy) * self.nx + ix
    }

    #[inline]
    pub fn x(&self, ix: usize) -> f64 {
        ix as f64 * self.dx()
    }

    #[inline]
    pub fn y(&self, iy: usize) -> f64 {
        iy as f64 * self.dy()
    }

    #[inline]
    pub fn z(&self, iz: usize) -> f64 {
        iz as f64 * self.dz()
    }

    /// Signed integer mode index for FFT bin `i` of an axis with `n` points:
    /// `0, 1, ..., n/2, -n/2+1, ..., -1`.
    #[inline]
    pub fn mode_index(n: usize, i: usize) -> i64 {
        if i <= n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Physical wavenumber `2*pi*m/L` for FFT bin `i` along an axis with `n` points.
    #[inline]
    pub fn wavenumber(&self, n: usize, i: usize) -> f64 {
        TWO_PI * Self::mode_index(n, i) as f64 / self.l
    }
}

/// Real-valued periodic field on a [`GridSpec`], `[z][y][x]` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        ScalarField { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        ScalarField { grid, values: vec![c; grid.len()] }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "value buffer has {} entries, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    /// Sample `f(x, y, z)` at the collocation points.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64, f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for iz in 0..grid.nz {
            let z = grid.z(iz);
            for iy in 0..grid.ny {
                let y = grid.y(iy);
                for ix in 0..grid.nx {
                    values.push(f(grid.x(ix), y, z));
                }
            }
        }
        ScalarField { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, iz: usize, iy: usize, ix: usize) -> f64 {
        self.values[self.grid.idx(iz, iy, ix)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, a: f64) -> ScalarField {
        ScalarField { grid: self.grid, values: self.values.iter().map(|v| a * v).collect() }
    }

    /// `self + a * other`; panics on grid mismatch (programmer error in
    /// internal arithmetic; public operations validate grids up front).
    pub fn add_scaled(&self, a: f64, other: &ScalarField) -> ScalarField {
        assert_eq!(self.grid, other.grid, "field arithmetic requires identical grids");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x + a * y)
            .collect();
        ScalarField { grid: self.grid, values }
    }

    pub fn zip_map(&self, other: &ScalarField, mut f: impl FnMut(f64, f64) -> f64) -> ScalarField {
        assert_eq!(self.grid, other.grid, "field arithmetic requires identical grids");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| f(x, y))
            .collect();
        ScalarField { grid: self.grid, values }
    }
}

/// Complex Fourier coefficients of a real field, same `[z][y][x]` layout as
/// the physical array, bin `i` on each axis carrying mode index
/// `GridSpec::mode_index(n, i)`. Normalized so bin `(0,0,0)` is the mean.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex<f64>>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField { grid, coeffs: vec![Complex::new(0.0, 0.0); grid.len()] }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex<f64>] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex<f64>] {
        &mut self.coeffs
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        SpectralField { grid: self.grid, coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    pub fn add_scaled(&self, a: f64, other: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, other.grid, "field arithmetic requires identical grids");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| x + y * a)
            .collect();
        SpectralField { grid: self.grid, coeffs }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm_sqr())).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn rustfft::Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(n)
        } else {
            p.plan_fft_inverse(n)
        }
    })
}

/// In-place 3D FFT over the `[z][y][x]` complex buffer. Unnormalized.
fn fft3_in_place(data: &mut [Complex<f64>], grid: &GridSpec, forward: bool) {
    let (nx, ny, nz) = (grid.nx, grid.ny, grid.nz);

    // x-axis: pencils are contiguous chunks.
    let fx = plan(nx, forward);
    fx.process(data);

    // y-axis: gather strided pencils.
    let fy = plan(ny, forward);
    let mut pencil = vec![Complex::new(0.0, 0.0); ny];
    for iz in 0..nz {
        let base = iz * ny * nx;
        for ix in 0..nx {
            for iy in 0..ny {
                pencil[iy] = data[base + iy * nx + ix];
            }
            fy.process(&mut pencil);
            for iy in 0..ny {
                data[base + iy * nx + ix] = pencil[iy];
            }
        }
    }

    // z-axis.
    let fz = plan(nz, forward);
    let mut pencil = vec![Complex::new(0.0, 0.0); nz];
    let plane = ny * nx;
    for iy in 0..ny {
        for ix in 0..nx {
            let base = iy * nx + ix;
            for iz in 0..nz {
                pencil[iz] = data[base + iz * plane];
            }
            fz.process(&mut pencil);
            for iz in 0..nz {
                data[base + iz * plane] = pencil[iz];
            }
        }
    }
}

/// Discrete Fourier coefficients of the trigonometric interpolant of `f`.
pub fn transform_forward(f: &ScalarField) -> SpectralField {
    let grid = *f.grid();
    let mut data: Vec<Complex<f64>> = f.values().iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft3_in_place(&mut data, &grid, true);
    let scale = 1.0 / grid.len() as f64;
    for c in &mut data {
        *c *= scale;
    }
    SpectralField { grid, coeffs: data }
}

/// Inverse transform; imaginary residue of the complex inverse is discarded.
pub fn transform_inverse(f: &SpectralField) -> ScalarField {
    let grid = *f.grid();
    let mut data = f.coeffs.clone();
    fft3_in_place(&mut data, &grid, false);
    ScalarField { grid, values: data.iter().map(|c| c.re).collect() }
}

/// Forward-transform two real fields with one complex FFT (`a + i b` packing).
pub fn forward_pair(a: &ScalarField, b: &ScalarField) -> (SpectralField, SpectralField) {
    assert_eq!(a.grid, b.grid, "field arithmetic requires identical grids");
    let grid = a.grid;
    let mut data: Vec<Complex<f64>> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| Complex::new(x, y))
        .collect();
    fft3_in_place(&mut data, &grid, true);
    let scale = 1.0 / grid.len() as f64;

    let (nx, ny, nz) = (grid.nx, grid.ny, grid.nz);
    let mut ca = vec![Complex::new(0.0, 0.0); grid.len()];
    let mut cb = vec![Complex::new(0.0, 0.0); grid.len()];
    for iz in 0..nz {
        let jz = (nz - iz) % nz;
        for iy in 0..ny {
            let jy = (ny - iy) % ny;
            for ix in 0..nx {
                let jx = (nx - ix) % nx;
                let c = data[grid.idx(iz, iy, ix)];
                let cr = data[grid.idx(jz, jy, jx)].conj();
                ca[grid.idx(iz, iy, ix)] = (c + cr) * (0.5 * scale);
                cb[grid.idx(iz, iy, ix)] = (c - cr) * Complex::new(0.0, -0.5 * scale);
            }
        }
    }
    (SpectralField { grid, coeffs: ca }, SpectralField { grid, coeffs: cb })
}

/// Inverse-transform two conjugate-symmetric spectra with one complex FFT.
pub fn inverse_pair(a: &SpectralField, b: &SpectralField) -> (ScalarField, ScalarField) {
    assert_eq!(a.grid, b.grid, "field arithmetic requires identical grids");
    let grid = a.grid;
    let mut data: Vec<Complex<f64>> = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(x, y)| x + y * Complex::new(0.0, 1.0))
        .collect();
    fft3_in_place(&mut data, &grid, false);
    let va = data.iter().map(|c| c.re).collect();
    let vb = data.iter().map(|c| c.im).collect();
    (ScalarField { grid, values: va }, ScalarField { grid, values: vb })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Coefficient-wise multiplication by `i*k_axis`; Nyquist derivative zeroed.
pub fn spectral_derivative(f: &SpectralField, axis: Axis) -> SpectralField {
    let grid = *f.grid();
    let mut out = f.clone();
    let (nx, ny, nz) = (grid.nx, grid.ny, grid.nz);
    let n_axis = match axis {
        Axis::X => nx,
        Axis::Y => ny,
        Axis::Z => nz,
    };
    // k factor per bin, with the Nyquist bin forced to zero.
    let kfac: Vec<f64> = (0..n_axis)
        .map(|i| {
            if i == n_axis / 2 {
                0.0
            } else {
                grid.wavenumber(n_axis, i)
            }
        })
        .collect();
    for iz in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                let k = match axis {
                    Axis::X => kfac[ix],
                    Axis::Y => kfac[iy],
                    Axis::Z => kfac[iz],
                };
                let c = &mut out.coeffs[grid.idx(iz, iy, ix)];
                *c = Complex::new(-c.im * k, c.re * k);
            }
        }
    }
    out
}

#[inline]
fn keep_23(n: usize, i: usize) -> bool {
    (GridSpec::mode_index(n, i).unsigned_abs() as f64) <= n as f64 / 3.0
}

/// Two-thirds rule: zero every mode with `|m| > n/3` on any of the three axes.
pub fn dealias_23(f: &SpectralField) -> SpectralField {
    let grid = *f.grid();
    let mut out = f.clone();
    dealias_23_in_place(&mut out);
    let _ = grid;
    out
}

pub(crate) fn dealias_23_in_place(f: &mut SpectralField) {
    let grid = *f.grid();
    let (nx, ny, nz) = (grid.nx, grid.ny, grid.nz);
    let kx: Vec<bool> = (0..nx).map(|i| keep_23(nx, i)).collect();
    let ky: Vec<bool> = (0..ny).map(|i| keep_23(ny, i)).collect();
    let kz: Vec<bool> = (0..nz).map(|i| keep_23(nz, i)).collect();
    for iz in 0..nz {
        let zk = kz[iz];
        for iy in 0..ny {
            let yk = ky[iy];
            let row = (iz * ny + iy) * nx;
            for ix in 0..nx {
                if !(zk && yk && kx[ix]) {
                    f.coeffs[row + ix] = Complex::new(0.0, 0.0);
                }
            }
        }
    }
}

/// Compensated (Neumaier) sum; keeps the rounding error independent of the
/// number of terms so slice means of mean-free data stay at the ulp level.
fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Per-slice horizontal average: entry `j = mean over (x,y) of f[j][y][x]`.
pub fn horizontal_slice_mean(f: &ScalarField) -> Vec<f64> {
    let grid = *f.grid();
    let inv = 1.0 / (grid.nx * grid.ny) as f64;
    let plane = grid.nx * grid.ny;
    (0..grid.nz)
        .map(|iz| compensated_sum(&f.values[iz * plane..(iz + 1) * plane]) * inv)
        .collect()
}

/// Subtract the horizontal slice mean from every slice. Means already at the
/// roundoff floor are left untouched, which makes the projection exactly
/// idempotent: applying it twice returns the first output bit for bit.
pub fn remove_horizontal_slice_mean(f: &ScalarField) -> ScalarField {
    let grid = *f.grid();
    let means = horizontal_slice_mean(f);
    let mut out = f.clone();
    let plane = grid.nx * grid.ny;
    for iz in 0..grid.nz {
        let m = means[iz];
        let slice = &mut out.values[iz * plane..(iz + 1) * plane];
        let scale = slice.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if m.abs() <= 16.0 * f64::EPSILON * scale {
            continue;
        }
        for v in slice {
            *v -= m;
        }
    }
    out
}

/// Broadcast a z-profile over the horizontal plane.
pub fn broadcast_profile(grid: GridSpec, profile: &[f64]) -> Result<ScalarField> {
    if profile.len() != grid.nz {
        return Err(Error::GridMismatch(format!(
            "profile has {} entries, grid has nz = {}",
            profile.len(),
            grid.nz
        )));
    }
    let mut out = ScalarField::zeros(grid);
    let plane = grid.nx * grid.ny;
    for iz in 0..grid.nz {
        let v = profile[iz];
        for x in &mut out.values[iz * plane..(iz + 1) * plane] {
            *x = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> GridSpec {
        GridSpec::new(1.0, 16, 12, 8).unwrap()
    }

    /// Seeded random field band-limited to `|m| <= cutoff` (Nyquist-free).
    pub(crate) fn random_bandlimited(grid: GridSpec, cutoff: usize, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = ScalarField::from_values(
            grid,
            (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let mut hat = transform_forward(&raw);
        for iz in 0..grid.nz {
            for iy in 0..grid.ny {
                for ix in 0..grid.nx {
                    let keep = GridSpec::mode_index(grid.nx, ix).unsigned_abs() as usize <= cutoff
                        && GridSpec::mode_index(grid.ny, iy).unsigned_abs() as usize <= cutoff
                        && GridSpec::mode_index(grid.nz, iz).unsigned_abs() as usize <= cutoff;
                    if !keep {
                        hat.coeffs_mut()[grid.idx(iz, iy, ix)] = Complex::new(0.0, 0.0);
                    }
                }
            }
        }
        transform_inverse(&hat)
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(1.0, 16, 16, 16).is_ok());
        assert!(GridSpec::new(0.0, 16, 16, 16).is_err());
        assert!(GridSpec::new(1.0, 2, 16, 16).is_err());
        assert!(GridSpec::new(1.0, 15, 16, 16).is_err());
    }

    #[test]
    fn constant_field_transforms_to_zero_mode() {
        let f = ScalarField::constant(grid(), 3.25);
        let hat = transform_forward(&f);
        assert!((hat.coeffs()[0].re - 3.25).abs() < 1e-14);
        assert!(hat.coeffs()[0].im.abs() < 1e-14);
        let rest: f64 = hat.coeffs()[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(rest < 1e-14);
    }

    #[test]
    fn single_harmonic_has_two_modes() {
        let g = grid();
        let f = ScalarField::from_fn(g, |x, _, _| (TWO_PI * x / g.l).sin());
        let hat = transform_forward(&f);
        let mut nonzero = 0;
        for iz in 0..g.nz {
            for iy in 0..g.ny {
                for ix in 0..g.nx {
                    let c = hat.coeffs()[g.idx(iz, iy, ix)];
                    if c.norm() > 1e-12 {
                        nonzero += 1;
                        assert_eq!(iz, 0);
                        assert_eq!(iy, 0);
                        assert!(ix == 1 || ix == g.nx - 1);
                        assert!((c.norm() - 0.5).abs() < 1e-13);
                    }
                }
            }
        }
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn round_trip_identity() {
        let f = random_bandlimited(grid(), 4, 42);
        let back = transform_inverse(&transform_forward(&f));
        let scale = f.max_abs().max(1e-300);
        let err = f
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err / scale < 1e-13, "round-trip error {err}");
    }

    #[test]
    fn parseval() {
        let g = grid();
        let f = random_bandlimited(g, 5, 7);
        let phys: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * g.cell_volume();
        let hat = transform_forward(&f);
        let spec: f64 = g.l.powi(3) * hat.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>();
        assert!((phys - spec).abs() / phys < 1e-12);
    }

    #[test]
    fn pair_transforms_match_single() {
        let g = grid();
        let a = random_bandlimited(g, 5, 1);
        let b = random_bandlimited(g, 5, 2);
        let (ah, bh) = forward_pair(&a, &b);
        let ah1 = transform_forward(&a);
        let bh1 = transform_forward(&b);
        let da = ah
            .coeffs()
            .iter()
            .zip(ah1.coeffs())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        let db = bh
            .coeffs()
            .iter()
            .zip(bh1.coeffs())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(da < 1e-13 && db < 1e-13);

        let (a2, b2) = inverse_pair(&ah, &bh);
        let ea = a.values().iter().zip(a2.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let eb = b.values().iter().zip(b2.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(ea < 1e-13 && eb < 1e-13);
    }

    #[test]
    fn derivative_of_sine_is_scaled_cosine() {
        let g = GridSpec::new(2.5, 32, 8, 8).unwrap();
        let f = ScalarField::from_fn(g, |x, _, _| (TWO_PI * x / g.l).sin());
        let d = transform_inverse(&spectral_derivative(&transform_forward(&f), Axis::X));
        let expect = ScalarField::from_fn(g, |x, _, _| TWO_PI / g.l * (TWO_PI * x / g.l).cos());
        let err = d
            .values()
            .iter()
            .zip(expect.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12, "derivative error {err}");
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let f = ScalarField::constant(grid(), 5.0);
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let d = transform_inverse(&spectral_derivative(&transform_forward(&f), axis));
            assert!(d.max_abs() < 1e-13);
        }
    }

    #[test]
    fn derivatives_commute() {
        let f = random_bandlimited(grid(), 4, 11);
        let hat = transform_forward(&f);
        let dxy = spectral_derivative(&spectral_derivative(&hat, Axis::X), Axis::Y);
        let dyx = spectral_derivative(&spectral_derivative(&hat, Axis::Y), Axis::X);
        let err = dxy
            .coeffs()
            .iter()
            .zip(dyx.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn dealias_keeps_low_modes_and_kills_nyquist_band() {
        let g = grid();
        // All-low-mode field is untouched.
        let f = random_bandlimited(g, g.nx.min(g.ny).min(g.nz) / 3, 3);
        let hat = transform_forward(&f);
        let filtered = dealias_23(&hat);
        // Retained modes are untouched bitwise; the filtered band held only
        // round-trip dust from the band-limited construction.
        let err = hat
            .coeffs()
            .iter()
            .zip(filtered.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-15, "dust beyond the band: {err}");

        // A pure mode just under Nyquist is removed entirely.
        let hi = ScalarField::from_fn(g, |x, _, _| {
            (TWO_PI * (g.nx as f64 / 2.0 - 1.0) * x / g.l).cos()
        });
        let filtered = dealias_23(&transform_forward(&hi));
        assert!(filtered.max_abs() < 1e-13);
    }

    #[test]
    fn dealias_is_idempotent() {
        let f = random_bandlimited(grid(), 7, 9);
        let hat = transform_forward(&f);
        let once = dealias_23(&hat);
        let twice = dealias_23(&once);
        assert_eq!(
            once.coeffs()
                .iter()
                .zip(twice.coeffs())
                .all(|(a, b)| a.re == b.re && a.im == b.im),
            true
        );
    }

    #[test]
    fn slice_mean_examples() {
        let g = grid();
        let c = ScalarField::constant(g, 2.5);
        assert!(horizontal_slice_mean(&c).iter().all(|m| (m - 2.5).abs() < 1e-14));

        let f = ScalarField::from_fn(g, |x, _, z| (TWO_PI * x / g.l).sin() * (1.0 + z));
        assert!(horizontal_slice_mean(&f).iter().all(|m| m.abs() < 1e-14));

        let profile: Vec<f64> = (0..g.nz).map(|i| (i as f64).sin()).collect();
        let b = broadcast_profile(g, &profile).unwrap();
        let got = horizontal_slice_mean(&b);
        assert!(profile.iter().zip(&got).all(|(p, q)| (p - q).abs() < 1e-14));
    }

    #[test]
    fn remove_slice_mean_is_projection() {
        let g = grid();
        let f = {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            ScalarField::from_values(g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .unwrap()
        };
        let p = remove_horizontal_slice_mean(&f);
        assert!(horizontal_slice_mean(&p).iter().all(|m| m.abs() < 1e-14));
        // Idempotent to the bit.
        let pp = remove_horizontal_slice_mean(&p);
        assert!(p.values().iter().zip(pp.values()).all(|(a, b)| a == b));
        // Mean + remainder reconstructs the input to the ulp level.
        let means = horizontal_slice_mean(&f);
        let back = p.add_scaled(1.0, &broadcast_profile(g, &means).unwrap());
        let err = f
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 4.0 * f64::EPSILON * f.max_abs(), "reconstruction error {err}");

        let c = ScalarField::constant(g, 4.0);
        assert!(remove_horizontal_slice_mean(&c).max_abs() < 1e-14);
    }

    #[test]
    fn operations_are_linear() {
        let g = grid();
        let a = random_bandlimited(g, 4, 21);
        let b = random_bandlimited(g, 4, 22);
        let combo = a.scaled(2.0).add_scaled(-3.0, &b);
        let lhs = transform_forward(&combo);
        let rhs = transform_forward(&a).scaled(2.0).add_scaled(-3.0, &transform_forward(&b));
        let err = lhs
            .coeffs()
            .iter()
            .zip(rhs.coeffs())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-13);
    }
}
