//! Finite populations started in universal defection do not stay there:
//! mutation seeds cooperators and good media pulls the system out.

use media_egt::abm::{run_replicates, AbmConfig, AgentPopulations};
use media_egt::{CreatorStrategy, GameParams, ParamName, UserStrategy};

fn main() -> media_egt::Result<()> {
    let p = GameParams::default().with(ParamName::CI, 0.05);
    let cfg = AbmConfig {
        generations: 1000,
        replicates: 20,
        ..AbmConfig::with_sizes(100, 50)
    };
    let start = AgentPopulations::homogeneous(
        UserStrategy::AllD,
        CreatorStrategy::Unsafe,
        cfg.n_users,
        cfg.n_creators,
    );

    let runs = run_replicates(&p, &cfg, Some(&start))?;
    for (r, ts) in runs.iter().enumerate() {
        let first = ts.records.iter().find(|g| g.eta > 0.5).map(|g| g.generation);
        println!(
            "replicate {r:>2}: first eta > 0.5 at {:>5}  final-200 mean eta {:.3}",
            first.map_or("never".to_string(), |g| g.to_string()),
            ts.mean_eta_last(200)
        );
    }
    Ok(())
}
