//! Replicator dynamics against the agent-based model on a small grid.

use media_egt::abm::AbmConfig;
use media_egt::replicator::IntegratorConfig;
use media_egt::sweep::{compare_engines, run_sweep, Axis, Engine, SweepSpec};
use media_egt::{GameParams, ParamName};

fn main() -> media_egt::Result<()> {
    let spec = |engine| SweepSpec {
        axis_x: Axis::new(ParamName::CI, 0.0, 0.5, 5),
        axis_y: Axis::new(ParamName::CC, 0.0, 0.5, 5),
        base: GameParams::default(),
        engine,
    };
    let rep = run_sweep(&spec(Engine::replicator(IntegratorConfig::default())))?;
    let abm = run_sweep(&spec(Engine::Abm {
        config: AbmConfig {
            replicates: 10,
            ..AbmConfig::default()
        },
    }))?;

    println!("{:>5} {:>5} {:>10} {:>10}", "c_i", "c_c", "replicator", "abm");
    for (r, a) in rep.cells.iter().zip(&abm.cells) {
        println!(
            "{:>5.3} {:>5.3} {:>10.3} {:>6.3}±{:.3}",
            r.x_value, r.y_value, r.eta_mean, a.eta_mean, a.eta_std
        );
    }
    let cmp = compare_engines(&abm, &rep)?;
    println!("mean |difference| {:.3}, max {:.3}", cmp.mean, cmp.max);
    Ok(())
}
