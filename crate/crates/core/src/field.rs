//! World geometry and the deterministic plume concentration model.
//!
//! Two grids share one rectangular world: the measurement grid (`a_cells` by
//! `b_cells`, where agents may sample) and the source-hypothesis grid
//! (`i_cells` by `j_cells`, where the belief lives). Both are indexed
//! row-major with x varying fastest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist2(self, other: Point) -> f64 {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }
}

/// A true (or hypothesised) source position in world units.
pub type SourceLocation = Point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Measurement cells along x.
    pub a_cells: usize,
    /// Measurement cells along y.
    pub b_cells: usize,
    /// Source-hypothesis cells along x.
    pub i_cells: usize,
    /// Source-hypothesis cells along y.
    pub j_cells: usize,
}

impl GridSpec {
    /// A square-celled world where both grids share the same resolution.
    pub fn uniform(width: f64, height: f64, nx: usize, ny: usize) -> Self {
        Self {
            x_min: 0.0,
            x_max: width,
            y_min: 0.0,
            y_max: height,
            a_cells: nx,
            b_cells: ny,
            i_cells: nx,
            j_cells: ny,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::config("grid bounds must be finite"));
        }
        if self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::config(format!(
                "grid bounds are empty: x [{}, {}], y [{}, {}]",
                self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        if self.a_cells == 0 || self.b_cells == 0 || self.i_cells == 0 || self.j_cells == 0 {
            return Err(Error::config("all grid cell counts must be >= 1"));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point {
        Point::new(
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn clamp(&self, p: Point) -> Point {
        Point::new(
            p.x.clamp(self.x_min, self.x_max),
            p.y.clamp(self.y_min, self.y_max),
        )
    }

    pub fn measurement_len(&self) -> usize {
        self.a_cells * self.b_cells
    }

    pub fn source_len(&self) -> usize {
        self.i_cells * self.j_cells
    }

    pub fn measurement_center(&self, idx: usize) -> Point {
        cell_center(self, self.a_cells, self.b_cells, idx)
    }

    pub fn source_center(&self, idx: usize) -> Point {
        cell_center(self, self.i_cells, self.j_cells, idx)
    }

    /// Measurement cell containing `p` (points on the far boundary map to the last cell).
    pub fn measurement_cell_of(&self, p: Point) -> usize {
        cell_of(self, self.a_cells, self.b_cells, p)
    }

    pub fn source_cell_of(&self, p: Point) -> usize {
        cell_of(self, self.i_cells, self.j_cells, p)
    }
}

fn cell_center(grid: &GridSpec, nx: usize, ny: usize, idx: usize) -> Point {
    debug_assert!(idx < nx * ny);
    let (col, row) = (idx % nx, idx / nx);
    let wx = grid.width() / nx as f64;
    let wy = grid.height() / ny as f64;
    Point::new(
        grid.x_min + (col as f64 + 0.5) * wx,
        grid.y_min + (row as f64 + 0.5) * wy,
    )
}

fn cell_of(grid: &GridSpec, nx: usize, ny: usize, p: Point) -> usize {
    let fx = (p.x - grid.x_min) / grid.width() * nx as f64;
    let fy = (p.y - grid.y_min) / grid.height() * ny as f64;
    let col = (fx.floor().max(0.0) as usize).min(nx - 1);
    let row = (fy.floor().max(0.0) as usize).min(ny - 1);
    row * nx + col
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlumeKind {
    /// Q·exp(−r²/2ℓ²) around the source.
    IsotropicBlob,
    /// Wind-advected plume with linearly growing crosswind spread; zero upwind.
    AdvectedPlume,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlumeParams {
    pub kind: PlumeKind,
    /// Peak (normalized) concentration Q.
    pub strength: f64,
    /// Blob length scale ℓ.
    pub length_scale: f64,
    /// Wind velocity; for the advected model only its direction matters.
    pub wind: Point,
    /// Crosswind spread at the source.
    pub sigma0: f64,
    /// Growth of the crosswind spread per unit downwind distance.
    pub spread_rate: f64,
    /// Measurement noise standard deviation σ.
    pub noise_sigma: f64,
}

impl Default for PlumeParams {
    fn default() -> Self {
        Self {
            kind: PlumeKind::IsotropicBlob,
            strength: 1.0,
            length_scale: 1.0,
            wind: Point::new(1.0, 0.0),
            sigma0: 0.5,
            spread_rate: 0.1,
            noise_sigma: 0.1,
        }
    }
}

impl PlumeParams {
    pub fn blob(strength: f64, length_scale: f64, noise_sigma: f64) -> Self {
        Self {
            kind: PlumeKind::IsotropicBlob,
            strength,
            length_scale,
            noise_sigma,
            ..Self::default()
        }
    }

    pub fn advected(strength: f64, wind: Point, sigma0: f64, spread_rate: f64, noise_sigma: f64) -> Self {
        Self {
            kind: PlumeKind::AdvectedPlume,
            strength,
            wind,
            sigma0,
            spread_rate,
            noise_sigma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::config(format!("plume: {what}")))
            }
        };
        check(self.noise_sigma > 0.0 && self.noise_sigma.is_finite(), "noise_sigma must be > 0")?;
        check(self.strength > 0.0 && self.strength <= 1.0, "strength must lie in (0, 1]")?;
        match self.kind {
            PlumeKind::IsotropicBlob => {
                check(self.length_scale > 0.0 && self.length_scale.is_finite(), "length_scale must be > 0")
            }
            PlumeKind::AdvectedPlume => {
                check(self.sigma0 > 0.0 && self.sigma0.is_finite(), "sigma0 must be > 0")?;
                check(self.spread_rate >= 0.0 && self.spread_rate.is_finite(), "spread_rate must be >= 0")?;
                check(self.wind.x.is_finite() && self.wind.y.is_finite(), "wind must be finite")
            }
        }
    }

    /// Unit wind direction; calm air is treated as wind along +x.
    fn wind_dir(&self) -> (f64, f64) {
        let speed = self.wind.x.hypot(self.wind.y);
        if speed > 0.0 {
            (self.wind.x / speed, self.wind.y / speed)
        } else {
            (1.0, 0.0)
        }
    }

    /// Mean concentration at displacement (dx, dy) = measurement − source.
    pub fn at_offset(&self, dx: f64, dy: f64) -> f64 {
        match self.kind {
            PlumeKind::IsotropicBlob => {
                let l2 = self.length_scale * self.length_scale;
                self.strength * (-(dx * dx + dy * dy) / (2.0 * l2)).exp()
            }
            PlumeKind::AdvectedPlume => {
                let (c, s) = self.wind_dir();
                let down = dx * c + dy * s;
                if down <= 0.0 {
                    return 0.0;
                }
                let cross = dy * c - dx * s;
                let spread = self.sigma0 + self.spread_rate * down;
                self.strength * (self.sigma0 / spread)
                    * (-(cross * cross) / (2.0 * spread * spread)).exp()
            }
        }
    }

    /// Weak-signal KL of N(f, σ²) against N(0, σ²) at the given displacement, in nats.
    pub fn squared_snr_at_offset(&self, dx: f64, dy: f64) -> f64 {
        let f = self.at_offset(dx, dy);
        f * f / (2.0 * self.noise_sigma * self.noise_sigma)
    }
}

/// Mean concentration f at `loc` for a source at `source`.
pub fn concentration(loc: Point, source: SourceLocation, params: &PlumeParams) -> f64 {
    params.at_offset(loc.x - source.x, loc.y - source.y)
}

/// Fraction of measurement cells where f/σ exceeds `threshold` for the given source.
pub fn snr_area_fraction(params: &PlumeParams, grid: &GridSpec, source: SourceLocation, threshold: f64) -> f64 {
    let hits = (0..grid.measurement_len())
        .filter(|&idx| {
            concentration(grid.measurement_center(idx), source, params) / params.noise_sigma > threshold
        })
        .count();
    hits as f64 / grid.measurement_len() as f64
}

/// One axis of the integer lattice on which every measurement and source cell
/// center sits. Positions are in lattice units; `step` converts to world units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisLattice {
    pub step: f64,
    pub meas_origin: i64,
    pub meas_stride: i64,
    pub meas_len: usize,
    pub src_origin: i64,
    pub src_stride: i64,
    pub src_len: usize,
}

// Refuse lattices that would blow up the FFT for nearly-coprime resolutions.
const MAX_LATTICE_BLOWUP: i64 = 8;

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl AxisLattice {
    fn new(extent: f64, meas_len: usize, src_len: usize) -> Result<Self> {
        let (m, s) = (meas_len as i64, src_len as i64);
        let lcm = m / gcd(m, s) * s;
        // Half-cell units: centers are odd multiples of lcm/len.
        let (first_m, first_s) = (lcm / m, lcm / s);
        let (stride_m, stride_s) = (2 * first_m, 2 * first_s);
        let g = gcd(gcd(stride_m, stride_s), first_m - first_s);
        let origin = first_m.min(first_s);
        let lattice = Self {
            step: extent / (2 * lcm) as f64 * g as f64,
            meas_origin: (first_m - origin) / g,
            meas_stride: stride_m / g,
            meas_len,
            src_origin: (first_s - origin) / g,
            src_stride: stride_s / g,
            src_len,
        };
        if lattice.span() > MAX_LATTICE_BLOWUP * m.max(s) {
            return Err(Error::config(format!(
                "measurement ({meas_len}) and source ({src_len}) resolutions are not commensurate enough for the offset lattice"
            )));
        }
        Ok(lattice)
    }

    fn meas_pos(&self, k: usize) -> i64 {
        self.meas_origin + self.meas_stride * k as i64
    }

    fn src_pos(&self, k: usize) -> i64 {
        self.src_origin + self.src_stride * k as i64
    }

    /// Number of lattice sites spanned by either grid.
    pub fn span(&self) -> i64 {
        self.meas_pos(self.meas_len - 1).max(self.src_pos(self.src_len - 1)) + 1
    }

    pub fn src_span(&self) -> usize {
        (self.src_pos(self.src_len - 1) + 1) as usize
    }

    /// Smallest and largest measurement − source offset.
    pub fn offset_range(&self) -> (i64, i64) {
        let lo = self.meas_pos(0) - self.src_pos(self.src_len - 1);
        let hi = self.meas_pos(self.meas_len - 1) - self.src_pos(0);
        (lo, hi)
    }

    pub fn meas_positions(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.meas_len).map(|k| self.meas_pos(k))
    }

    pub fn src_positions(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.src_len).map(|k| self.src_pos(k))
    }
}

/// Common lattice for both axes of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetLattice {
    pub x: AxisLattice,
    pub y: AxisLattice,
}

impl OffsetLattice {
    pub fn for_grid(grid: &GridSpec) -> Result<Self> {
        grid.validate()?;
        Ok(Self {
            x: AxisLattice::new(grid.width(), grid.a_cells, grid.i_cells)?,
            y: AxisLattice::new(grid.height(), grid.b_cells, grid.j_cells)?,
        })
    }
}

/// The squared-SNR kernel k(d) = f(d)²/(2σ²) tabulated on every
/// measurement − source offset of a grid's lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrKernel {
    pub lattice: OffsetLattice,
    /// Lowest tabulated offset per axis, in lattice units.
    pub lo_x: i64,
    pub lo_y: i64,
    pub width: usize,
    pub height: usize,
    /// Row-major (x fastest), `width * height` entries.
    pub values: Vec<f64>,
}

impl SnrKernel {
    /// Kernel value at lattice offset (dx, dy), or `None` outside the table.
    pub fn get(&self, dx: i64, dy: i64) -> Option<f64> {
        let cx = dx - self.lo_x;
        let cy = dy - self.lo_y;
        if cx < 0 || cy < 0 || cx as usize >= self.width || cy as usize >= self.height {
            return None;
        }
        Some(self.values[cy as usize * self.width + cx as usize])
    }

    /// World-space displacement of a lattice offset.
    pub fn offset_world(&self, dx: i64, dy: i64) -> (f64, f64) {
        (dx as f64 * self.lattice.x.step, dy as f64 * self.lattice.y.step)
    }

    pub fn hi_x(&self) -> i64 {
        self.lo_x + self.width as i64 - 1
    }

    pub fn hi_y(&self) -> i64 {
        self.lo_y + self.height as i64 - 1
    }

    /// Build from an arbitrary offset function; used for synthetic kernels in tests.
    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let lattice = OffsetLattice::for_grid(grid)?;
        let (lo_x, hi_x) = lattice.x.offset_range();
        let (lo_y, hi_y) = lattice.y.offset_range();
        let width = (hi_x - lo_x + 1) as usize;
        let height = (hi_y - lo_y + 1) as usize;
        let mut values = Vec::with_capacity(width * height);
        for oy in lo_y..=hi_y {
            for ox in lo_x..=hi_x {
                values.push(f(ox as f64 * lattice.x.step, oy as f64 * lattice.y.step));
            }
        }
        Ok(Self { lattice, lo_x, lo_y, width, height, values })
    }
}

/// Tabulate f²/(2σ²) over every offset between a measurement center and a
/// source center of `grid`.
pub fn squared_snr_kernel(params: &PlumeParams, grid: &GridSpec) -> Result<SnrKernel> {
    SnrKernel::from_fn(grid, |dx, dy| params.squared_snr_at_offset(dx, dy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn blob_peak_and_unit_offset() {
        let p = PlumeParams::blob(1.0, 1.0, 0.1);
        let s = Point::new(3.0, 4.0);
        assert_eq!(concentration(s, s, &p), 1.0);
        let v = concentration(Point::new(4.0, 4.0), s, &p);
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        assert!((v - 0.60653).abs() < 1e-5);
    }

    #[test]
    fn advected_is_zero_upwind_and_on_the_source() {
        let p = PlumeParams::advected(1.0, Point::new(2.0, 0.0), 0.5, 0.2, 0.1);
        let s = Point::new(5.0, 5.0);
        assert_eq!(concentration(s, s, &p), 0.0);
        assert_eq!(concentration(Point::new(4.0, 5.0), s, &p), 0.0);
        assert_eq!(concentration(Point::new(4.0, 9.0), s, &p), 0.0);
        assert!(concentration(Point::new(6.0, 5.0), s, &p) > 0.0);
    }

    #[test]
    fn advected_follows_rotated_wind() {
        let along_x = PlumeParams::advected(1.0, Point::new(1.0, 0.0), 0.5, 0.2, 0.1);
        let along_y = PlumeParams::advected(1.0, Point::new(0.0, 3.0), 0.5, 0.2, 0.1);
        let a = along_x.at_offset(2.0, 0.3);
        let b = along_y.at_offset(-0.3, 2.0);
        assert!((a - b).abs() < 1e-15);
        assert_eq!(along_y.at_offset(0.0, -1.0), 0.0);
    }

    #[test]
    fn advected_peak_tends_to_strength() {
        let p = PlumeParams::advected(0.8, Point::new(1.0, 0.0), 0.5, 0.2, 0.1);
        let near = p.at_offset(1e-9, 0.0);
        assert!((near - 0.8).abs() < 1e-8);
        assert!(p.at_offset(1.0, 0.0) < near);
    }

    #[test]
    fn grid_index_round_trip() {
        let g = GridSpec {
            x_min: -2.0,
            x_max: 6.0,
            y_min: 1.0,
            y_max: 4.0,
            a_cells: 8,
            b_cells: 3,
            i_cells: 4,
            j_cells: 6,
        };
        for idx in 0..g.measurement_len() {
            assert_eq!(g.measurement_cell_of(g.measurement_center(idx)), idx);
        }
        for idx in 0..g.source_len() {
            assert_eq!(g.source_cell_of(g.source_center(idx)), idx);
        }
        assert_eq!(g.measurement_center(0), Point::new(-1.5, 1.5));
        assert_eq!(g.measurement_center(9), Point::new(-0.5, 2.5));
        assert_eq!(g.measurement_cell_of(Point::new(6.0, 4.0)), g.measurement_len() - 1);
    }

    #[test]
    fn invalid_grid_and_params_rejected() {
        let mut g = GridSpec::uniform(1.0, 1.0, 2, 2);
        g.x_max = g.x_min;
        assert!(g.validate().is_err());
        let mut g = GridSpec::uniform(1.0, 1.0, 2, 2);
        g.j_cells = 0;
        assert!(g.validate().is_err());
        assert!(PlumeParams::blob(1.0, 1.0, 0.0).validate().is_err());
        assert!(PlumeParams::blob(1.5, 1.0, 0.1).validate().is_err());
        assert!(PlumeParams::blob(1.0, -1.0, 0.1).validate().is_err());
        let mut adv = PlumeParams::advected(1.0, Point::new(1.0, 0.0), 0.5, 0.1, 0.1);
        assert!(adv.validate().is_ok());
        adv.spread_rate = -0.1;
        assert!(adv.validate().is_err());
    }

    #[test]
    fn snr_area_fraction_zero_for_huge_noise() {
        let g = GridSpec::uniform(16.0, 16.0, 16, 16);
        let p = PlumeParams::blob(1.0, 2.0, 1.0);
        assert_eq!(snr_area_fraction(&p, &g, g.center(), 1.0), 0.0);
        let p = PlumeParams::blob(1.0, 2.0, 5.0);
        assert_eq!(snr_area_fraction(&p, &g, g.center(), 0.2), 0.0);
    }

    #[test]
    fn snr_area_fraction_matches_disc_area() {
        // f = σ exactly on the circle of radius ℓ when σ = exp(−1/2).
        let ell = 3.0;
        let p = PlumeParams::blob(1.0, ell, (-0.5f64).exp());
        let g = GridSpec::uniform(40.0, 40.0, 800, 800);
        let frac = snr_area_fraction(&p, &g, g.center(), 1.0);
        let expected = std::f64::consts::PI * ell * ell / g.area();
        assert!((frac - expected).abs() / expected < 5e-3, "{frac} vs {expected}");
    }

    #[test]
    fn kernel_values() {
        let g = GridSpec::uniform(4.0, 4.0, 4, 4);
        let p = PlumeParams::blob(1.0, 1.0, 1.0);
        let k = squared_snr_kernel(&p, &g).unwrap();
        assert_eq!(k.get(0, 0), Some(0.5));
        let v = k.get(1, 0).unwrap();
        assert!((v - (-1.0f64).exp() / 2.0).abs() < 1e-15);
        assert!((v - 0.18394).abs() < 1e-5);
        assert_eq!((k.width, k.height), (7, 7));
        assert_eq!(k.get(4, 0), None);

        let adv = PlumeParams::advected(1.0, Point::new(1.0, 0.0), 0.5, 0.1, 0.2);
        let k = squared_snr_kernel(&adv, &g).unwrap();
        assert_eq!(k.get(-2, 1), Some(0.0));
        assert_eq!(k.get(0, 0), Some(0.0));
    }

    #[test]
    fn kernel_sigma_equal_to_strength_peaks_at_half() {
        let g = GridSpec::uniform(8.0, 8.0, 8, 8);
        let p = PlumeParams::blob(0.7, 1.3, 0.7);
        let k = squared_snr_kernel(&p, &g).unwrap();
        assert!((k.get(0, 0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mixed_resolution_lattice_places_every_center() {
        let g = GridSpec {
            x_min: 0.0,
            x_max: 12.0,
            y_min: 0.0,
            y_max: 6.0,
            a_cells: 6,
            b_cells: 3,
            i_cells: 4,
            j_cells: 6,
        };
        let lat = OffsetLattice::for_grid(&g).unwrap();
        let xs_m: Vec<i64> = lat.x.meas_positions().collect();
        let xs_s: Vec<i64> = lat.x.src_positions().collect();
        for (a, pm) in xs_m.iter().enumerate() {
            for (i, ps) in xs_s.iter().enumerate() {
                let world = g.measurement_center(a).x - g.source_center(i).x;
                assert!((world - (pm - ps) as f64 * lat.x.step).abs() < 1e-12);
            }
        }
        let ys_m: Vec<i64> = lat.y.meas_positions().collect();
        let ys_s: Vec<i64> = lat.y.src_positions().collect();
        for (b, pm) in ys_m.iter().enumerate() {
            for (j, ps) in ys_s.iter().enumerate() {
                let world = g.measurement_center(b * g.a_cells).y - g.source_center(j * g.i_cells).y;
                assert!((world - (pm - ps) as f64 * lat.y.step).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn incommensurate_grids_refused() {
        let mut g = GridSpec::uniform(1.0, 1.0, 97, 4);
        g.i_cells = 89;
        assert!(OffsetLattice::for_grid(&g).is_err());
    }

    #[test]
    fn blob_normalization_on_fine_grid() {
        let g = GridSpec::uniform(10.0, 10.0, 200, 200);
        let p = PlumeParams::blob(0.9, 0.7, 0.1);
        let source = g.source_center(g.source_cell_of(Point::new(3.3, 6.1)));
        let max = (0..g.measurement_len())
            .map(|i| concentration(g.measurement_center(i), source, &p))
            .fold(f64::MIN, f64::max);
        assert!((max - 0.9).abs() < 1e-12);
    }

    fn any_params() -> impl Strategy<Value = PlumeParams> {
        prop_oneof![
            (0.1f64..1.0, 0.2f64..4.0, 0.05f64..1.0).prop_map(|(q, l, s)| PlumeParams::blob(q, l, s)),
            (0.1f64..1.0, -2.0f64..2.0, -2.0f64..2.0, 0.1f64..2.0, 0.0f64..0.5, 0.05f64..1.0)
                .prop_map(|(q, ux, uy, s0, a, s)| PlumeParams::advected(q, Point::new(ux, uy), s0, a, s)),
        ]
    }

    // Dyadic coordinates keep p − s exact, so the shifted evaluation follows the same path.
    fn dyadic() -> impl Strategy<Value = f64> {
        (-4096i32..4096).prop_map(|k| k as f64 / 64.0)
    }

    proptest! {
        #[test]
        fn translation_invariance(params in any_params(), px in dyadic(), py in dyadic(),
                                  sx in dyadic(), sy in dyadic(), tx in dyadic(), ty in dyadic()) {
            let a = concentration(Point::new(px, py), Point::new(sx, sy), &params);
            let b = concentration(Point::new(px + tx, py + ty), Point::new(sx + tx, sy + ty), &params);
            prop_assert_eq!(a, b);
            prop_assert!((0.0..=params.strength).contains(&a));
        }

        #[test]
        fn kernel_matches_concentration(params in any_params(), n in 2usize..10, m in 2usize..10) {
            let g = GridSpec::uniform(n as f64 * 0.75, m as f64 * 1.25, n, m);
            let k = squared_snr_kernel(&params, &g).unwrap();
            let s2 = 2.0 * params.noise_sigma * params.noise_sigma;
            for dy in k.lo_y..=k.hi_y() {
                for dx in k.lo_x..=k.hi_x() {
                    let (wx, wy) = k.offset_world(dx, dy);
                    let f = concentration(Point::new(wx, wy), Point::default(), &params);
                    let v = k.get(dx, dy).unwrap();
                    prop_assert!((v - f * f / s2).abs() <= 1e-15 * v.abs().max(1.0));
                    prop_assert!(v >= 0.0 && v.is_finite());
                }
            }
        }
    }
}
