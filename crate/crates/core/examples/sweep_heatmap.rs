//! Average cooperation over the (c_i, c_c) plane, written as CSV and SVG.
//!
//! ```text
//! cargo run --release --example sweep_heatmap [OUT_DIR]
//! ```

use std::path::PathBuf;

use media_egt::io::{read_sweep_csv, write_sweep_csv, write_text};
use media_egt::render::{heatmap_svg, ColorScale};
use media_egt::replicator::IntegratorConfig;
use media_egt::sweep::{run_sweep, Axis, Engine, SweepSpec};
use media_egt::{GameParams, ParamName};

fn main() -> media_egt::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out".into()));
    let spec = SweepSpec {
        axis_x: Axis::new(ParamName::CI, 0.0, 0.5, 11),
        axis_y: Axis::new(ParamName::CC, 0.0, 0.5, 11),
        base: GameParams::default(),
        engine: Engine::replicator(IntegratorConfig {
            horizon: 2000.0,
            ..IntegratorConfig::default()
        }),
    };
    let result = run_sweep(&spec)?;

    // Rows from high c_c down, so the printout reads like the picture.
    for iy in (0..result.y_steps).rev() {
        let row: Vec<String> = (0..result.x_steps)
            .map(|ix| format!("{:.2}", result.cell(ix, iy).eta_mean))
            .collect();
        println!("c_c={:.2} | {}", spec.axis_y.value(iy), row.join(" "));
    }

    let csv = out.join("sweep_ci_cc.csv");
    write_sweep_csv(&csv, &result)?;
    let svg = csv.with_extension("svg");
    write_text(&svg, &heatmap_svg(&read_sweep_csv(&csv)?, ColorScale::Viridis)?)?;
    println!("{} and {}", csv.display(), svg.display());
    Ok(())
}
