//! Parallel regime maps over a rectangle of limit-map parameters.

use rayon::prelude::*;

use crate::geometry::{PlanarMap, Point2, Rect};
use crate::limit::{HenonParams, LimitFamily, ProductHenonParams};
use crate::orbit::{find_fixed_points_with, Classification, FixedPointRecord, SolverOptions};
use crate::{Error, Result};

/// Environment variable overriding the worker count (`0` = all cores).
pub const THREADS_ENV: &str = "REVMIX_THREADS";
/// Code of a cell whose map could not be built or solved.
pub const FAILURE_CODE: u32 = 9999;
/// Per-class counts saturate at this value inside the code.
pub const COUNT_CAP: usize = 4;
const MIN_GRID: usize = 16;

/// One cell of a regime map. `abscissa` is `c̃` (or `M2`), `ordinate` is `M̃` (or `M1`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeCell {
    pub ix: usize,
    pub iy: usize,
    pub abscissa: f64,
    pub ordinate: f64,
    pub regime_code: u32,
}

/// Counts that make up a regime code.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RegimeCounts {
    pub sinks: usize,
    pub sources: usize,
    pub saddles: usize,
    pub elliptic: usize,
    pub marginal: usize,
    /// Orbits of least period 2.
    pub period_two: usize,
}

impl RegimeCounts {
    pub fn from_records(period_one: &[FixedPointRecord], period_two: &[FixedPointRecord]) -> Self {
        let count = |c: Classification| period_one.iter().filter(|r| r.classification == c).count();
        Self {
            sinks: count(Classification::Sink),
            sources: count(Classification::Source),
            saddles: count(Classification::Saddle),
            elliptic: count(Classification::Elliptic),
            marginal: count(Classification::Marginal),
            period_two: period_two.len(),
        }
    }

    /// `sinks + 5·sources + 25·saddles + 125·elliptic + 625·marginal + 3125·[period-2 present]`,
    /// each count capped at [`COUNT_CAP`].
    pub fn code(&self) -> u32 {
        let c = |n: usize| n.min(COUNT_CAP) as u32;
        c(self.sinks)
            + 5 * c(self.sources)
            + 25 * c(self.saddles)
            + 125 * c(self.elliptic)
            + 625 * c(self.marginal)
            + 3125 * u32::from(self.period_two > 0)
    }

    /// Inverse of [`RegimeCounts::code`] (period-2 count becomes 0 or 1).
    pub fn decode(code: u32) -> Option<Self> {
        if code >= 6250 {
            return None;
        }
        let digit = |i: u32| (code / 5u32.pow(i) % 5) as usize;
        Some(Self {
            sinks: digit(0),
            sources: digit(1),
            saddles: digit(2),
            elliptic: digit(3),
            marginal: digit(4),
            period_two: (code / 3125) as usize,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeOptions {
    /// Seeds cover `[−seed_half, seed_half]²`.
    pub seed_half: f64,
    /// Seeds per axis.
    pub seed_grid: usize,
    /// Worker threads; `0` uses every core.
    pub threads: usize,
    pub solver: SolverOptions,
}

impl Default for RegimeOptions {
    fn default() -> Self {
        Self { seed_half: 4.0, seed_grid: 16, threads: 0, solver: SolverOptions::default() }
    }
}

/// Worker count from [`THREADS_ENV`], `0` when unset.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a non-negative integer, got '{v}'"))),
        Err(_) => Ok(0),
    }
}

/// Run `f` on a dedicated pool of `threads` workers (`0` = all cores).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Limit map of `family` at `(abscissa, ordinate)`.
pub fn family_map(family: LimitFamily, abscissa: f64, ordinate: f64) -> Result<Box<dyn PlanarMap>> {
    Ok(match family {
        LimitFamily::Henon => Box::new(HenonParams::new(ordinate, abscissa)),
        LimitFamily::ProductH => Box::new(ProductHenonParams::new(abscissa, ordinate)?),
    })
}

/// Period-1 and period-2 inventory of one parameter point.
pub fn regime_counts(family: LimitFamily, abscissa: f64, ordinate: f64, opts: &RegimeOptions) -> Result<RegimeCounts> {
    let map = family_map(family, abscissa, ordinate)?;
    let seeds = Rect::square(opts.seed_half).grid(opts.seed_grid);
    let one = find_fixed_points_with(map.as_ref(), &seeds, 1, &opts.solver)?;
    let two = find_fixed_points_with(map.as_ref(), &seeds, 2, &opts.solver)?;
    Ok(RegimeCounts::from_records(&one, &two))
}

/// Parameter value of grid index `i` out of `n` on `[lo, hi]`, endpoints included.
pub fn grid_coord(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    lo + (hi - lo) * i as f64 / (n - 1) as f64
}

/// Regime codes on an `nx × ny` grid spanning `window` (x: abscissa, y:
/// ordinate), row-major by `iy`. A cell that fails gets [`FAILURE_CODE`].
pub fn regime_map(
    family: LimitFamily,
    window: Rect,
    grid: (usize, usize),
    opts: &RegimeOptions,
) -> Result<Vec<RegimeCell>> {
    let (nx, ny) = grid;
    if nx < MIN_GRID || ny < MIN_GRID {
        return Err(Error::InvalidParameter(format!("regime grid {nx}×{ny} below {MIN_GRID}×{MIN_GRID}")));
    }
    if !(window.width() > 0.0 && window.height() > 0.0) {
        return Err(Error::InvalidParameter("empty sweep window".into()));
    }
    if opts.seed_grid < 3 {
        return Err(Error::InvalidParameter(format!("seed grid {} below 3", opts.seed_grid)));
    }
    with_threads(opts.threads, || {
        (0..nx * ny)
            .into_par_iter()
            .map(|i| {
                let (ix, iy) = (i % nx, i / nx);
                let p = Point2::new(grid_coord(window.x0, window.x1, ix, nx), grid_coord(window.y0, window.y1, iy, ny));
                let regime_code = regime_counts(family, p.x, p.y, opts).map_or(FAILURE_CODE, |c| c.code());
                RegimeCell { ix, iy, abscissa: p.x, ordinate: p.y, regime_code }
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_round_trip() {
        let c = RegimeCounts { sinks: 1, sources: 0, saddles: 2, elliptic: 1, marginal: 0, period_two: 3 };
        let code = c.code();
        assert_eq!(code, 1 + 50 + 125 + 3125);
        assert_eq!(RegimeCounts::decode(code), Some(RegimeCounts { period_two: 1, ..c }));
        assert_eq!(RegimeCounts::decode(FAILURE_CODE), None);
    }

    #[test]
    fn counts_saturate() {
        let c = RegimeCounts { saddles: 9, ..Default::default() };
        assert_eq!(c.code(), 100);
    }

    #[test]
    fn product_cell_elliptic_and_saddle() {
        let c = regime_counts(LimitFamily::ProductH, -1.0, -0.5, &RegimeOptions::default()).unwrap();
        assert_eq!((c.elliptic, c.saddles, c.sinks, c.sources, c.marginal), (1, 1, 0, 0, 0));
    }

    #[test]
    fn henon_below_fold_is_empty() {
        let c = regime_counts(LimitFamily::Henon, -0.5, -1.0, &RegimeOptions::default()).unwrap();
        assert_eq!(c, RegimeCounts::default());
    }

    #[test]
    fn zero_ctilde_cell_fails_without_aborting() {
        let opts = RegimeOptions::default();
        let cells = regime_map(LimitFamily::ProductH, Rect::new(-1.0, 1.0, -1.0, 1.0), (17, 16), &opts).unwrap();
        assert_eq!(cells.len(), 17 * 16);
        assert!(cells.iter().filter(|c| c.ix == 8).all(|c| c.regime_code == FAILURE_CODE));
        assert!(cells.iter().filter(|c| c.ix != 8).all(|c| c.regime_code != FAILURE_CODE));
        assert!(cells.iter().enumerate().all(|(i, c)| c.ix == i % 17 && c.iy == i / 17));
    }

    #[test]
    fn small_grid_rejected() {
        let r = regime_map(LimitFamily::Henon, Rect::square(1.0), (8, 16), &RegimeOptions::default());
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }
}
