//! A single finite-population run showing the cycle between good media,
//! safe creators, naive users and exploitation.
//!
//! ```text
//! cargo run --release --example abm_cycles [OUT_DIR] [SEED]
//! ```

use std::path::PathBuf;

use media_egt::abm::{run_abm, AbmConfig};
use media_egt::io::{read_time_series_csv, write_abm_csv, write_text};
use media_egt::render::timeseries_svg;
use media_egt::GameParams;

fn main() -> media_egt::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out".into()));
    let seed = args.next().map_or(0, |s| s.parse().expect("seed must be an integer"));

    let cfg = AbmConfig {
        generations: 2000,
        seed,
        ..AbmConfig::with_sizes(200, 100)
    };
    let ts = run_abm(&GameParams::default(), &cfg, None)?;

    for r in ts.records.iter().step_by(100) {
        let [alld, bmedia, gmedia, allc] = r.user_counts;
        println!(
            "gen {:>5}  AllD {alld:>3} BMedia {bmedia:>3} GMedia {gmedia:>3} AllC {allc:>3}  safe {:>3}  eta {:.2}",
            r.generation, r.creator_counts[1], r.eta
        );
    }
    println!("mean eta after burn-in {:.3}", ts.mean_eta_after(cfg.burn_in_generations()));

    let csv = out.join("abm_cycles.csv");
    write_abm_csv(&csv, &ts)?;
    write_text(&csv.with_extension("svg"), &timeseries_svg(&read_time_series_csv(&csv)?)?)?;
    Ok(())
}
