//! Squared-SNR scoring: Σ_s p(s)·f(c − s)²/(2σ²) for every candidate c.
//!
//! Because f depends only on the displacement, the whole score map is one
//! linear convolution of the belief with the kernel, done here as a
//! zero-padded 2D FFT on the shared offset lattice.

use std::sync::{Arc, Mutex};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{ScoreMap, Tier};
use crate::belief::SourcePosterior;
use crate::error::{Error, Result};
use crate::field::{concentration, squared_snr_kernel, GridSpec, OffsetLattice, PlumeParams, Point, SnrKernel};

/// Posterior-expected squared SNR at one candidate, in bits.
pub fn snr_score_bruteforce(post: &SourcePosterior, candidate: Point, params: &PlumeParams) -> f64 {
    let grid = post.grid();
    let s2 = 2.0 * params.noise_sigma * params.noise_sigma;
    let nats: f64 = post
        .log_probs()
        .iter()
        .enumerate()
        .filter(|(_, lp)| **lp > f64::NEG_INFINITY)
        .map(|(idx, lp)| {
            let f = concentration(candidate, grid.source_center(idx), params);
            lp.exp() * f * f / s2
        })
        .sum();
    nats / std::f64::consts::LN_2
}

/// Brute-force score map over every measurement cell; O(A·B·I·J).
pub fn snr_score_map_bruteforce(post: &SourcePosterior, params: &PlumeParams) -> ScoreMap {
    let grid = *post.grid();
    let values = (0..grid.measurement_len())
        .map(|c| snr_score_bruteforce(post, grid.measurement_center(c), params))
        .collect();
    ScoreMap::new(&grid, values, Tier::SnrFft)
}

/// Precomputed FFT plans and kernel spectrum for one grid.
pub struct SnrConvolver {
    grid: GridSpec,
    lattice: OffsetLattice,
    lo_x: i64,
    lo_y: i64,
    nx: usize,
    ny: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    /// Kernel spectrum, column-major (y fastest).
    kernel_hat: Vec<Complex<f64>>,
    /// Reused between calls; a busy workspace falls back to a fresh one.
    work: Mutex<Workspace>,
}

#[derive(Default)]
struct Workspace {
    a: Vec<Complex<f64>>,
    b: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl Workspace {
    fn prepare(&mut self, len: usize, scratch: usize) {
        self.a.clear();
        self.a.resize(len, Complex::new(0.0, 0.0));
        self.b.resize(len, Complex::new(0.0, 0.0));
        self.scratch.resize(scratch, Complex::new(0.0, 0.0));
    }
}

impl std::fmt::Debug for SnrConvolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SnrConvolver")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .finish_non_exhaustive()
    }
}

impl SnrConvolver {
    pub fn from_params(params: &PlumeParams, grid: &GridSpec) -> Result<Self> {
        Self::new(&squared_snr_kernel(params, grid)?, grid)
    }

    pub fn new(kernel: &SnrKernel, grid: &GridSpec) -> Result<Self> {
        let lattice = OffsetLattice::for_grid(grid)?;
        if kernel.lattice != lattice {
            return Err(Error::KernelGridMismatch(
                "kernel was tabulated for a different lattice".into(),
            ));
        }
        let (need_lo_x, need_hi_x) = lattice.x.offset_range();
        let (need_lo_y, need_hi_y) = lattice.y.offset_range();
        if kernel.lo_x > need_lo_x
            || kernel.hi_x() < need_hi_x
            || kernel.lo_y > need_lo_y
            || kernel.hi_y() < need_hi_y
        {
            return Err(Error::KernelGridMismatch(format!(
                "kernel covers x [{}, {}], y [{}, {}]; grid needs x [{need_lo_x}, {need_hi_x}], y [{need_lo_y}, {need_hi_y}]",
                kernel.lo_x,
                kernel.hi_x(),
                kernel.lo_y,
                kernel.hi_y()
            )));
        }
        let kw = (need_hi_x - need_lo_x + 1) as usize;
        let kh = (need_hi_y - need_lo_y + 1) as usize;
        // Outputs only need offsets in [lo, hi] to stay distinct mod n, so
        // the circular length can be the offset span itself.
        let nx = kw.next_power_of_two();
        let ny = kh.next_power_of_two();

        let mut planner = FftPlanner::new();
        let mut conv = Self {
            grid: *grid,
            lattice,
            lo_x: need_lo_x,
            lo_y: need_lo_y,
            nx,
            ny,
            row_fwd: planner.plan_fft_forward(nx),
            row_inv: planner.plan_fft_inverse(nx),
            col_fwd: planner.plan_fft_forward(ny),
            col_inv: planner.plan_fft_inverse(ny),
            kernel_hat: Vec::new(),
            work: Mutex::new(Workspace::default()),
        };
        let mut ws = Workspace::default();
        ws.prepare(nx * ny, conv.scratch_len());
        for (cy, oy) in (need_lo_y..=need_hi_y).enumerate() {
            for (cx, ox) in (need_lo_x..=need_hi_x).enumerate() {
                ws.a[cy * nx + cx].re = kernel.get(ox, oy).expect("coverage checked above");
            }
        }
        conv.forward(&mut ws, kh);
        conv.kernel_hat = std::mem::take(&mut ws.b);
        Ok(conv)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Padded transform size (x, y).
    pub fn padded_dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    fn scratch_len(&self) -> usize {
        [&self.row_fwd, &self.row_inv, &self.col_fwd, &self.col_inv]
            .iter()
            .map(|f| f.get_inplace_scratch_len())
            .max()
            .unwrap_or(0)
    }

    /// Row-major `ws.a` with only the first `rows` rows nonzero; leaves the
    /// column-major spectrum in `ws.b`.
    fn forward(&self, ws: &mut Workspace, rows: usize) {
        let (nx, ny) = (self.nx, self.ny);
        self.row_fwd.process_with_scratch(&mut ws.a[..rows * nx], &mut ws.scratch);
        transpose_into(&ws.a, &mut ws.b, nx, ny);
        self.col_fwd.process_with_scratch(&mut ws.b, &mut ws.scratch);
    }

    /// Score map (bits) of the belief.
    pub fn score_map(&self, post: &SourcePosterior) -> Result<ScoreMap> {
        if post.grid() != &self.grid {
            return Err(Error::KernelGridMismatch(
                "belief grid differs from the convolver grid".into(),
            ));
        }
        let mut fresh = Workspace::default();
        let mut guard = self.work.try_lock().ok();
        let ws = match guard.as_deref_mut() {
            Some(ws) => ws,
            None => &mut fresh,
        };
        let (nx, ny) = (self.nx, self.ny);
        ws.prepare(nx * ny, self.scratch_len());
        let lx = &self.lattice.x;
        let ly = &self.lattice.y;
        let src_xs: Vec<i64> = lx.src_positions().collect();
        for (j, py) in ly.src_positions().enumerate() {
            let row = py as usize * nx;
            for (i, &px) in src_xs.iter().enumerate() {
                let lp = post.log_probs()[j * lx.src_len + i];
                ws.a[row + px as usize].re = lp.exp();
            }
        }
        self.forward(ws, ly.src_span());
        for (a, k) in ws.b.iter_mut().zip(&self.kernel_hat) {
            *a *= k;
        }
        self.col_inv.process_with_scratch(&mut ws.b, &mut ws.scratch);
        transpose_into(&ws.b, &mut ws.a, ny, nx);

        // Only rows holding measurement centers are needed.
        let meas_ys: Vec<i64> = ly.meas_positions().collect();
        let meas_xs: Vec<i64> = lx.meas_positions().collect();
        for &my in &meas_ys {
            let r = wrap(my - self.lo_y, ny) * nx;
            self.row_inv.process_with_scratch(&mut ws.a[r..r + nx], &mut ws.scratch);
        }
        let scale = 1.0 / (nx * ny) as f64 / std::f64::consts::LN_2;
        let mut values = Vec::with_capacity(meas_xs.len() * meas_ys.len());
        for &my in &meas_ys {
            let r = wrap(my - self.lo_y, ny) * nx;
            for &mx in &meas_xs {
                let v = ws.a[r + wrap(mx - self.lo_x, nx)].re * scale;
                values.push(v.max(0.0));
            }
        }
        Ok(ScoreMap::new(&self.grid, values, Tier::SnrFft))
    }
}

fn wrap(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}

fn transpose_into(src: &[Complex<f64>], dst: &mut [Complex<f64>], width: usize, height: usize) {
    const TILE: usize = 8;
    for r0 in (0..height).step_by(TILE) {
        for c0 in (0..width).step_by(TILE) {
            for r in r0..(r0 + TILE).min(height) {
                for c in c0..(c0 + TILE).min(width) {
                    dst[c * height + r] = src[r * width + c];
                }
            }
        }
    }
}

/// One-shot FFT score map: builds the plans, convolves once.
pub fn snr_score_map_fft(post: &SourcePosterior, kernel: &SnrKernel, grid: &GridSpec) -> Result<ScoreMap> {
    SnrConvolver::new(kernel, grid)?.score_map(post)
}
