//! Slice-wise recovery of the horizontal velocity from the vertical
//! vorticity, and the elliptic-estimate diagnostics that come with it.
//!
//! Each z-slice is treated independently: the slice mean of the vorticity is
//! projected out (a constant-per-slice vorticity has no periodic stream
//! function), the horizontal Poisson equation `lap_h psi = omega'` is solved
//! in spectral space with the zero mode of `psi` pinned to zero, and
//! `u = -d psi/dy`, `v = d psi/dx`. The recovered velocity has zero slice
//! means and is divergence-free by construction. Nyquist columns follow the
//! zero-derivative convention, so the curl round trip is exact (to roundoff)
//! on Nyquist-free input.

use rustfft::num_complex::Complex;

use crate::analysis::{slice_lp_norm, slice_w1p_norm_vec2, VelocityGradient};
use crate::error::{Error, Result};
use crate::grid::{
    forward_pair, inverse_pair, remove_horizontal_slice_mean, spectral_derivative,
    transform_forward, transform_inverse, Axis, GridSpec, ScalarField, SpectralField,
};

/// Horizontal velocity pair recovered from vorticity.
#[derive(Debug, Clone)]
pub struct VelocityField {
    pub u: ScalarField,
    pub v: ScalarField,
}

impl VelocityField {
    pub fn zeros(grid: GridSpec) -> Self {
        VelocityField { u: ScalarField::zeros(grid), v: ScalarField::zeros(grid) }
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }

    pub fn max_speed(&self) -> f64 {
        self.u.max_abs().max(self.v.max_abs())
    }
}

/// Spectral inversion: `u_hat = i k_y omega_hat / |k_h|^2`,
/// `v_hat = -i k_x omega_hat / |k_h|^2`, zero on the `k_h = 0` column.
pub(crate) fn invert_vorticity_spectral(
    omega_hat: &SpectralField,
) -> (SpectralField, SpectralField) {
    let grid = *omega_hat.grid();
    let (nx, ny, nz) = (grid.nx, grid.ny, grid.nz);
    // Derivative-convention wavenumbers: Nyquist zeroed.
    let kx: Vec<f64> = (0..nx)
        .map(|i| if i == nx / 2 { 0.0 } else { grid.wavenumber(nx, i) })
        .collect();
    let ky: Vec<f64> = (0..ny)
        .map(|i| if i == ny / 2 { 0.0 } else { grid.wavenumber(ny, i) })
        .collect();
    let mut u_hat = SpectralField::zeros(grid);
    let mut v_hat = SpectralField::zeros(grid);
    for iz in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                if ix == 0 && iy == 0 {
                    continue;
                }
                let kh2 = kx[ix] * kx[ix] + ky[iy] * ky[iy];
                if kh2 == 0.0 {
                    continue;
                }
                let idx = grid.idx(iz, iy, ix);
                let w = omega_hat.coeffs()[idx];
                u_hat.coeffs_mut()[idx] = Complex::new(0.0, ky[iy] / kh2) * w;
                v_hat.coeffs_mut()[idx] = Complex::new(0.0, -kx[ix] / kh2) * w;
            }
        }
    }
    (u_hat, v_hat)
}

/// Velocity from vorticity by the slice-wise periodic inversion. Total on
/// finite fields: the slice-mean part of `omega` carries no periodic velocity
/// and is projected out.
pub fn velocity_from_vorticity(omega: &ScalarField) -> VelocityField {
    let omega_hat = transform_forward(omega);
    let (u_hat, v_hat) = invert_vorticity_spectral(&omega_hat);
    let (u, v) = inverse_pair(&u_hat, &v_hat);
    VelocityField { u, v }
}

/// `d v/dx - d u/dy` via spectral derivatives.
pub fn curl_h(vel: &VelocityField) -> ScalarField {
    let (u_hat, v_hat) = forward_pair(&vel.u, &vel.v);
    let curl_hat = spectral_derivative(&v_hat, Axis::X)
        .add_scaled(-1.0, &spectral_derivative(&u_hat, Axis::Y));
    transform_inverse(&curl_hat)
}

/// Maximum over z-slices of `||u(z)||_{W^{1,p}} / (p ||omega'(z)||_{L^p})`,
/// a measurement of the elliptic estimate's constant. The denominator uses
/// the slice-mean-free vorticity (the part the velocity actually sees);
/// slices where it vanishes are skipped.
pub fn elliptic_ratio_report(omega: &ScalarField, p: f64) -> Result<f64> {
    if !(2.0..=64.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "elliptic ratio needs p in [2, 64], got {p}"
        )));
    }
    let omega_free = remove_horizontal_slice_mean(omega);
    let vel = velocity_from_vorticity(omega);
    let grads = VelocityGradient::of(&vel);
    let mut best: Option<f64> = None;
    for iz in 0..omega.grid().nz {
        let denom = p * slice_lp_norm(&omega_free, iz, p);
        if denom == 0.0 {
            continue;
        }
        let num = slice_w1p_norm_vec2(&grads, iz, p);
        let r = num / denom;
        best = Some(best.map_or(r, |b: f64| b.max(r)));
    }
    best.ok_or(Error::ZeroField { context: "elliptic ratio" })
}

/// Maximum over slices of the relative deviation in the L^2 identity
/// `||omega'(z)||_2 = ||grad_h u(z)||_2` (componentwise gradient norm).
/// Returns 0 when the mean-free vorticity vanishes identically.
pub fn plancherel_identity_check(omega: &ScalarField) -> f64 {
    let omega_free = remove_horizontal_slice_mean(omega);
    let vel = velocity_from_vorticity(omega);
    let grads = VelocityGradient::of(&vel);
    let g = omega.grid();
    let mut worst = 0.0f64;
    for iz in 0..g.nz {
        let lhs = slice_lp_norm(&omega_free, iz, 2.0);
        if lhs == 0.0 {
            continue;
        }
        let da = g.cell_area_h();
        let plane = g.nx * g.ny;
        let r = iz * plane..(iz + 1) * plane;
        let sum: f64 = grads.ux.values()[r.clone()]
            .iter()
            .zip(&grads.uy.values()[r.clone()])
            .zip(grads.vx.values()[r.clone()].iter().zip(&grads.vy.values()[r]))
            .map(|((a, b), (c, d))| a * a + b * b + c * c + d * d)
            .sum();
        let rhs = (sum * da).sqrt();
        worst = worst.max((lhs - rhs).abs() / lhs);
    }
    worst
}

/// Max spectral divergence relative to the velocity scale; zero for zero fields.
pub fn relative_divergence(vel: &VelocityField) -> f64 {
    let (u_hat, v_hat) = forward_pair(&vel.u, &vel.v);
    let div_hat = spectral_derivative(&u_hat, Axis::X)
        .add_scaled(1.0, &spectral_derivative(&v_hat, Axis::Y));
    let div = transform_inverse(&div_hat);
    let scale = vel.max_speed();
    if scale == 0.0 {
        return 0.0;
    }
    // Normalize by a velocity gradient scale: |u| * 2 pi / L.
    div.max_abs() / (scale * crate::grid::TWO_PI / vel.grid().l)
}
