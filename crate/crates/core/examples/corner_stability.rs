//! Jacobian spectra at the eight pure-strategy corners.
//!
//! With positive safety costs only universal defection is stable; making
//! safety cheaper than unsafety (c_c < 0) hands stability to full cooperation.

use media_egt::equilibria::corner_census_with;
use media_egt::io::format_equilibria_table;
use media_egt::replicator::ReplicatorForm;
use media_egt::{GameParams, ParamName};

fn main() {
    let defaults = GameParams::default();
    println!("defaults, standard linearisation");
    print!("{}", format_equilibria_table(&corner_census_with(&defaults, ReplicatorForm::Standard)));

    println!("\nc_c = -0.05");
    let cheap_safety = defaults.with(ParamName::CC, -0.05);
    print!("{}", format_equilibria_table(&corner_census_with(&cheap_safety, ReplicatorForm::Standard)));

    // The (1 - x) prefactors put a zero eigenvalue on most corners.
    println!("\ndefaults, literal linearisation");
    print!("{}", format_equilibria_table(&corner_census_with(&defaults, ReplicatorForm::Literal)));
}
