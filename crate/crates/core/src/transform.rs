//! Real/spectral transforms, Galerkin projection, and alias-free products.
//!
//! `to_grid` evaluates `u(x) = sum_j coeff(j) e^{i j.x}` on a uniform grid;
//! `from_grid` inverts it and truncates to the retained cube, which is the
//! projection `P_N` of the Galerkin scheme. Pointwise powers are computed on
//! a grid oversampled by `(k+1)/2` so the projected result is alias-free.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{GridField, SpectralField};
use crate::lattice::Lattice;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan_forward(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

fn plan_inverse(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Smallest 7-smooth integer >= `min`; these sizes keep the FFT fast.
pub fn good_fft_size(min: usize) -> usize {
    fn smooth(mut v: usize) -> bool {
        for p in [2usize, 3, 5, 7] {
            while v.is_multiple_of(p) {
                v /= p;
            }
        }
        v == 1
    }
    let mut v = min.max(1);
    while !smooth(v) {
        v += 1;
    }
    v
}

/// In-place FFT along every axis of a row-major hypercube buffer.
fn fft_all_axes(data: &mut [Complex64], dim: usize, m: usize, inverse: bool) {
    let fft = if inverse { plan_inverse(m) } else { plan_forward(m) };
    let total = data.len();
    debug_assert_eq!(total, m.pow(dim as u32));
    let mut scratch = vec![Complex64::ZERO; fft.get_inplace_scratch_len()];
    let mut line = vec![Complex64::ZERO; m];
    for axis in 0..dim {
        // stride between consecutive entries along `axis`
        let stride = m.pow((dim - 1 - axis) as u32);
        let lines = total / m;
        for l in 0..lines {
            let outer = l / stride;
            let inner = l % stride;
            let base = outer * stride * m + inner;
            if stride == 1 {
                let chunk = &mut data[base..base + m];
                fft.process_with_scratch(chunk, &mut scratch);
            } else {
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, slot) in line.iter().enumerate() {
                    data[base + i * stride] = *slot;
                }
            }
        }
    }
}

/// Wraps a signed mode index into the FFT bin for a grid of `m` points.
fn wrap_bin(j: i64, m: usize) -> usize {
    j.rem_euclid(m as i64) as usize
}

fn scatter_to_bins(field: &SpectralField, m: usize) -> Vec<Complex64> {
    let lat = field.lattice();
    let dim = lat.dim();
    let mut buf = vec![Complex64::ZERO; m.pow(dim as u32)];
    let mut j = vec![0i64; dim];
    for flat in 0..lat.num_modes() {
        lat.mode_of(flat, &mut j);
        let mut bin = 0usize;
        for &c in &j {
            bin = bin * m + wrap_bin(c, m);
        }
        buf[bin] = field.coeffs()[flat];
    }
    buf
}

fn gather_from_bins(buf: &[Complex64], lattice: &Lattice, m: usize) -> SpectralField {
    let dim = lattice.dim();
    let mut out = SpectralField::zero(lattice.clone());
    let mut j = vec![0i64; dim];
    let scale = 1.0 / (buf.len() as f64);
    for flat in 0..lattice.num_modes() {
        lattice.mode_of(flat, &mut j);
        let mut bin = 0usize;
        for &c in &j {
            bin = bin * m + wrap_bin(c, m);
        }
        out.coeffs_mut()[flat] = buf[bin] * scale;
    }
    out
}

/// Internal variant of [`to_grid`] with an explicit minimum grid size.
pub(crate) fn to_grid_with_min_points(field: &SpectralField, min_points: usize) -> Result<GridField> {
    field.require_real()?;
    let lat = field.lattice();
    let needed = lat.modes_per_axis();
    let m = good_fft_size(min_points.max(needed));
    let mut buf = scatter_to_bins(field, m);
    fft_all_axes(&mut buf, lat.dim(), m, true);

    let max_abs = buf.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let max_imag = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if max_abs > 0.0 && max_imag > 1e-10 * max_abs {
        return Err(Error::SymmetryViolation {
            max_dev: max_imag,
            tol: 1e-10 * max_abs,
        });
    }
    let values = buf.iter().map(|c| c.re).collect();
    GridField::new(lat.clone(), m, values)
}

/// Samples the Fourier series on a uniform grid of at least
/// `oversample * (2N+1)` points per axis, rounded up to a fast FFT size.
pub fn to_grid(field: &SpectralField, oversample: f64) -> Result<GridField> {
    if !(oversample > 0.0) {
        return Err(Error::InvalidParameter(
            "oversample factor must be positive".into(),
        ));
    }
    let min_points = (oversample * field.lattice().modes_per_axis() as f64).ceil() as usize;
    to_grid_with_min_points(field, min_points)
}

/// Discrete transform of grid samples truncated to the retained cube of
/// `lattice`; this is the Galerkin projection `P_N` of band-unlimited data.
pub fn from_grid(grid: &GridField, lattice: &Lattice) -> Result<SpectralField> {
    let m = grid.points_per_axis();
    let needed = lattice.modes_per_axis();
    if m < needed {
        return Err(Error::Undersampled {
            grid: m,
            max_mode: lattice.max_mode(),
            needed,
        });
    }
    if grid.lattice().dim() != lattice.dim() {
        return Err(Error::InvalidParameter(
            "grid and target lattice dimensions differ".into(),
        ));
    }
    let mut buf: Vec<Complex64> = grid
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft_all_axes(&mut buf, lattice.dim(), m, false);
    let mut out = gather_from_bins(&buf, lattice, m);
    // The input is real by construction, so the exact transform is
    // Hermitian; averaging the mirror pair removes FFT round-off asymmetry.
    let mut j = vec![0i64; lattice.dim()];
    let mut neg = vec![0i64; lattice.dim()];
    for flat in 0..lattice.num_modes() {
        lattice.mode_of(flat, &mut j);
        for (a, b) in neg.iter_mut().zip(&j) {
            *a = -b;
        }
        let mirror = lattice.flat_index(&neg).expect("cube is symmetric");
        if mirror < flat {
            continue;
        }
        let avg = 0.5 * (out.coeffs()[flat] + out.coeffs()[mirror].conj());
        out.coeffs_mut()[flat] = avg;
        out.coeffs_mut()[mirror] = avg.conj();
    }
    Ok(out)
}

/// Alias-free power of band-limited data, projected onto `target`: the grid
/// must separate product modes up to `k * N_src` from the retained cube of
/// the target, i.e. `M >= k*N_src + N_target + 1`.
pub fn dealiased_power_to(field: &SpectralField, k: u32, target: &Lattice) -> Result<SpectralField> {
    if k == 0 {
        return Err(Error::InvalidParameter("power k must be >= 1".into()));
    }
    if target.dim() != field.lattice().dim() {
        return Err(Error::InvalidParameter(
            "power target lattice has a different dimension".into(),
        ));
    }
    if k == 1 && target == field.lattice() {
        field.require_real()?;
        return Ok(field.clone());
    }
    let min_points = k as usize * field.lattice().max_mode() + target.max_mode() + 1;
    let mut grid = to_grid_with_min_points(field, min_points)?;
    for v in grid.values_mut() {
        *v = v.powi(k as i32);
    }
    from_grid(&grid, target)
}

/// Spectral coefficients of the pointwise power `u^k` on the field's own
/// lattice, alias-free: evaluated on a grid oversampled by `(k+1)/2`, then
/// projected back to the retained cube.
pub fn dealiased_power(field: &SpectralField, k: u32) -> Result<SpectralField> {
    dealiased_power_to(field, k, field.lattice())
}

/// Alias-free projected product of two real fields (possibly on different
/// cubes), projected onto `target`.
pub fn dealiased_product_to(
    a: &SpectralField,
    b: &SpectralField,
    target: &Lattice,
) -> Result<SpectralField> {
    if a.lattice().dim() != b.lattice().dim() || a.lattice().dim() != target.dim() {
        return Err(Error::InvalidParameter(
            "product factors and target have mismatched dimensions".into(),
        ));
    }
    let min_points =
        a.lattice().max_mode() + b.lattice().max_mode() + target.max_mode() + 1;
    let m = good_fft_size(min_points.max(a.lattice().modes_per_axis()).max(b.lattice().modes_per_axis()));
    let ga = to_grid_with_min_points(a, m)?;
    let gb = to_grid_with_min_points(b, m)?;
    debug_assert_eq!(ga.points_per_axis(), gb.points_per_axis());
    let mut values = ga.values().to_vec();
    for (v, w) in values.iter_mut().zip(gb.values()) {
        *v *= w;
    }
    let grid = GridField::new(target.clone(), ga.points_per_axis(), values)?;
    from_grid(&grid, target)
}

/// Alias-free projected product on the factors' common lattice.
pub fn dealiased_product(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    if a.lattice() != b.lattice() {
        return Err(Error::InvalidParameter(
            "product factors live on different lattices".into(),
        ));
    }
    dealiased_product_to(a, b, a.lattice())
}

/// Exact mean of `u^k` over the torus, `(2pi)^{-n} int u^k dx`, computed on
/// a grid fine enough that no alias lands on mode zero.
pub fn mean_power(field: &SpectralField, k: u32) -> Result<f64> {
    let min_points = k.max(1) as usize * field.lattice().max_mode() + 1;
    let mut grid = to_grid_with_min_points(field, min_points)?;
    for v in grid.values_mut() {
        *v = v.powi(k.max(1) as i32);
    }
    Ok(grid.mean())
}
