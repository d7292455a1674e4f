//! Share of starting states that end in universal defection.
//!
//! The default grid step 0.1 finishes in seconds; 0.04 takes a few minutes
//! on one core.
//!
//! ```text
//! cargo run --release --example basin_census [GRID_STEP]
//! ```

use media_egt::cli::census_integrator;
use media_egt::replicator::{basin_census, OutcomeKind};
use media_egt::GameParams;

fn main() -> media_egt::Result<()> {
    let grid_step: f64 = match std::env::args().nth(1) {
        Some(s) => s.parse().expect("grid step must be a number"),
        None => 0.1,
    };
    let census = basin_census(&GameParams::default(), grid_step, &census_integrator())?;

    let count = |k: OutcomeKind| {
        census
            .entries
            .iter()
            .filter(|e| e.outcome.is_some_and(|(o, _)| o == k))
            .count()
    };
    println!("grid step {grid_step}: {} starting states", census.total_states);
    for k in [OutcomeKind::ConvergedDefection, OutcomeKind::ConvergedOther, OutcomeKind::Oscillating] {
        println!("  {:<18} {}", k.as_str(), count(k));
    }
    println!("defection fraction {:.4}", census.defection_fraction);
    println!("mean eta           {:.4}", census.mean_eta);
    Ok(())
}
