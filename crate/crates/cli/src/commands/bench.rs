use std::time::{Duration, Instant};

use plumeseek_core::planner::{snr_score_map_bruteforce, SnrConvolver};
use plumeseek_core::report::{line_plot_svg, read_numeric_csv, Series, PALETTE};
use plumeseek_core::rng::mix;
use plumeseek_core::{GridSpec, PlumeParams, SourcePosterior};
use serde::{Deserialize, Serialize};

use crate::output::{ensure_writable, write};
use crate::{CliError, CliResult, Common};

pub const BENCH_CSV_FILE: &str = "bench.csv";
pub const BENCH_FIGURE_FILE: &str = "bench.svg";

/// Largest FFT-tier growth allowed when the grid side doubles.
pub const MAX_FFT_GROWTH: f64 = 4.5;
/// Smallest direct-sum growth expected when the grid side doubles.
pub const MIN_BRUTE_GROWTH: f64 = 10.0;
/// Sides below this are dominated by fixed overheads and are not checked.
pub const GROWTH_CHECK_MIN_SIDE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub size: usize,
    pub fft_ms: f64,
    pub brute_ms: f64,
}

/// Deterministic strictly positive posterior on `grid`.
pub fn bench_posterior(grid: &GridSpec, seed: u64) -> SourcePosterior {
    let w: Vec<f64> = (0..grid.source_len())
        .map(|k| 1e-3 + (mix(seed, k as u64) >> 11) as f64 / (1u64 << 53) as f64)
        .collect();
    SourcePosterior::from_weights(grid, &w).expect("positive weights")
}

/// Fastest of repeated runs, repeating for at least `budget` and `min_reps` times.
fn min_time(mut f: impl FnMut(), min_reps: usize, budget: Duration) -> Duration {
    let start = Instant::now();
    let mut best = Duration::MAX;
    let mut reps = 0;
    while reps < min_reps || start.elapsed() < budget {
        let t = Instant::now();
        f();
        best = best.min(t.elapsed());
        reps += 1;
    }
    best
}

/// Times both scorers on an n×n world with unit cells.
pub fn time_size(plume: &PlumeParams, n: usize, seed: u64) -> CliResult<BenchRow> {
    let grid = GridSpec::uniform(n as f64, n as f64, n, n);
    let post = bench_posterior(&grid, seed);
    let conv = SnrConvolver::from_params(plume, &grid)?;
    let mut err = None;
    let fft = min_time(
        || {
            if let Err(e) = conv.score_map(&post) {
                err = Some(e);
            }
        },
        25,
        Duration::from_millis(600),
    );
    if let Some(e) = err {
        return Err(e.into());
    }
    let brute = min_time(
        || {
            std::hint::black_box(snr_score_map_bruteforce(&post, plume));
        },
        3,
        Duration::from_millis(100),
    );
    Ok(BenchRow { size: n, fft_ms: fft.as_secs_f64() * 1e3, brute_ms: brute.as_secs_f64() * 1e3 })
}

/// Growth violations between rows whose side doubles.
pub fn growth_violations(rows: &[BenchRow]) -> Vec<String> {
    let mut out = Vec::new();
    for a in rows {
        for b in rows.iter().filter(|b| b.size == 2 * a.size && a.size >= GROWTH_CHECK_MIN_SIDE) {
            let fft = b.fft_ms / a.fft_ms;
            let brute = b.brute_ms / a.brute_ms;
            if fft > MAX_FFT_GROWTH {
                out.push(format!("FFT time grew {fft:.2}x from {0}x{0} to {1}x{1} (limit {MAX_FFT_GROWTH})", a.size, b.size));
            }
            if brute < MIN_BRUTE_GROWTH {
                out.push(format!("direct time grew only {brute:.2}x from {0}x{0} to {1}x{1} (expected >= {MIN_BRUTE_GROWTH})", a.size, b.size));
            }
        }
    }
    out
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("size,fft_ms,brute_ms\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.size, r.fft_ms, r.brute_ms));
    }
    s
}

pub fn read_bench_csv(text: &str) -> CliResult<Vec<BenchRow>> {
    let (header, rows) = read_numeric_csv(text)?;
    if header != ["size", "fft_ms", "brute_ms"] {
        return Err(CliError::Runtime(format!("unexpected bench header {header:?}")));
    }
    Ok(rows.iter().map(|r| BenchRow { size: r[0] as usize, fft_ms: r[1], brute_ms: r[2] }).collect())
}

pub fn bench_figure(rows: &[BenchRow]) -> String {
    let lg = |v: f64| v.max(1e-9).log10();
    let fft = rows.iter().map(|r| (lg((r.size * r.size) as f64), lg(r.fft_ms))).collect();
    let brute = rows.iter().map(|r| (lg((r.size * r.size) as f64), lg(r.brute_ms))).collect();
    line_plot_svg(
        "Score map time",
        "log10 measurement cells",
        "log10 ms",
        &[Series::new("fft", PALETTE[0], fft), Series::new("direct", PALETTE[1], brute)],
    )
}

pub fn bench(args: &Common) -> CliResult<Vec<BenchRow>> {
    let cfg = args.resolve()?;
    let out = cfg.output_dir.clone();
    ensure_writable(&[out.join(BENCH_CSV_FILE), out.join(BENCH_FIGURE_FILE)], args.force)?;
    let mut sizes = cfg.bench_sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let seed = cfg.seeds.first().copied().unwrap_or(0);
    let rows = sizes
        .iter()
        .map(|&n| {
            let row = time_size(&cfg.plume, n, seed)?;
            log::info!("{n}x{n}: fft {:.3} ms, direct {:.3} ms", row.fft_ms, row.brute_ms);
            Ok(row)
        })
        .collect::<CliResult<Vec<_>>>()?;
    write(&out.join(BENCH_CSV_FILE), bench_csv(&rows))?;
    write(&out.join(BENCH_FIGURE_FILE), bench_figure(&rows))?;
    let bad = growth_violations(&rows);
    if !bad.is_empty() {
        return Err(CliError::Runtime(bad.join("; ")));
    }
    Ok(rows)
}
