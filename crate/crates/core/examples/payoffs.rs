//! Payoff table, expected payoffs and the average cooperation ratio.
//!
//! ```text
//! cargo run --example payoffs
//! ```

use media_egt::payoff::{avg_cooperation, expected_creator_payoffs, expected_user_payoffs, payoff_pair};
use media_egt::{CreatorStrategy, GameParams, PopulationState, UserStrategy};

fn main() {
    let p = GameParams::default();
    println!("{p:?}\n");

    println!("{:<8} {:<8} {:>8} {:>8}", "creator", "user", "user", "creator");
    for c in [CreatorStrategy::Unsafe, CreatorStrategy::Safe] {
        for u in UserStrategy::ALL {
            let pair = payoff_pair(c, u, &p);
            println!(
                "{:<8} {:<8} {:>8.3} {:>8.3}",
                format!("{c:?}"),
                u.name(),
                pair.user_payoff,
                pair.creator_payoff
            );
        }
    }

    println!();
    for y in [0.0, 0.5, 1.0] {
        let s = PopulationState::uniform(y);
        let users = expected_user_payoffs(&s, &p);
        let [pi_d, pi_c] = expected_creator_payoffs(&s, &p);
        println!(
            "y = {y:.1}: users {users:.3?}  creators D {pi_d:.3} C {pi_c:.3}  eta {:.3}",
            avg_cooperation(&s, &p)
        );
    }
}
