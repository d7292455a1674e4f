//! Two nearby starting points, two fates: sustained oscillation with high
//! cooperation, or collapse to universal defection.
//!
//! ```text
//! cargo run --example bistability [OUT_DIR]
//! ```

use std::path::PathBuf;

use media_egt::io::{read_time_series_csv, write_text, write_trajectory_csv};
use media_egt::render::timeseries_svg;
use media_egt::replicator::{classify_outcome, integrate, IntegratorConfig};
use media_egt::{GameParams, PopulationState};

fn main() -> media_egt::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out".into()));
    let p = GameParams::oscillation();
    let cfg = IntegratorConfig::default();

    for y0 in [0.50, 0.45] {
        let traj = integrate(&PopulationState::uniform(y0), &p, &cfg)?;
        let outcome = classify_outcome(&traj, &p, &cfg)?;
        println!(
            "y0 = {y0:.2}: {:<18} time-averaged eta {:.3}",
            outcome.kind.as_str(),
            outcome.time_averaged_eta
        );

        let csv = out.join(format!("bistability_y{:02}.csv", (y0 * 100.0).round()));
        write_trajectory_csv(&csv, &traj)?;
        let svg = csv.with_extension("svg");
        write_text(&svg, &timeseries_svg(&read_time_series_csv(&csv)?)?)?;
        println!("  {} and {}", csv.display(), svg.display());
    }
    Ok(())
}
