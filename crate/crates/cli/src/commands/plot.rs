use plumeseek_core::report::ig_series_from_episode_csv;
use plumeseek_core::MotionPolicy;

use super::bench::{bench_figure, read_bench_csv, BENCH_CSV_FILE, BENCH_FIGURE_FILE};
use super::simulate::{ig_figure, IG_FIGURE_FILE};
use super::train::{reward_figure, REWARD_FIGURE_FILE};
use crate::output::{numbered_csvs, write};
use crate::{CliError, CliResult, Common};

/// Rebuilds every figure whose CSV inputs exist under `--out` (or the config's output directory).
pub fn plot(args: &Common) -> CliResult<()> {
    let out = match (&args.out, &args.config) {
        (Some(o), _) => o.clone(),
        (None, Some(_)) => args.resolve()?.output_dir,
        (None, None) => return Err(CliError::Usage("plot needs --out or --config".into())),
    };
    if !out.is_dir() {
        return Err(CliError::Usage(format!("{} is not a directory", out.display())));
    }
    let mut made = 0;
    let mut curves = Vec::new();
    for p in MotionPolicy::ALL {
        let files = numbered_csvs(&out.join(p.as_str()), "episode_");
        if files.is_empty() {
            continue;
        }
        let mut per_seed = Vec::new();
        for (_, path) in files {
            let text = std::fs::read_to_string(&path)?;
            let series = ig_series_from_episode_csv(&text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
            per_seed.push(series.into_iter().map(|(_, ig)| ig).collect());
        }
        curves.push((p, per_seed));
    }
    if !curves.is_empty() {
        write(&out.join(IG_FIGURE_FILE), ig_figure(&curves))?;
        made += 1;
    }
    if let Some(svg) = reward_figure(&out)? {
        write(&out.join(REWARD_FIGURE_FILE), svg)?;
        made += 1;
    }
    let bench_csv = out.join(BENCH_CSV_FILE);
    if bench_csv.exists() {
        let rows = read_bench_csv(&std::fs::read_to_string(&bench_csv)?)?;
        write(&out.join(BENCH_FIGURE_FILE), bench_figure(&rows))?;
        made += 1;
    }
    if made == 0 {
        return Err(CliError::Usage(format!("no plottable CSVs found in {}", out.display())));
    }
    Ok(())
}
