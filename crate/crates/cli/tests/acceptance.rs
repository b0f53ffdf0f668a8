//! Runs every acceptance criterion and prints one line per criterion.
//!
//! `EASTLAB_ACCEPT_ONLY=1,2,13` restricts the run; `EASTLAB_SEED` changes
//! the master seed. A failure listed in `KNOWN_UNATTAINABLE` is reported
//! but does not fail the target; any other failure does.

use eastlab_cli::acceptance::{run_selected, NAMES};

fn main() {
    let ids: Vec<usize> = match std::env::var("EASTLAB_ACCEPT_ONLY") {
        Ok(list) if !list.trim().is_empty() => list
            .split(',')
            .map(|s| s.trim().parse().expect("criterion number"))
            .collect(),
        _ => (1..=NAMES.len()).collect(),
    };
    let seed = std::env::var("EASTLAB_SEED")
        .ok()
        .map(|s| s.parse().expect("seed"))
        .unwrap_or(1);
    println!("acceptance suite, seed {seed}");
    let outcomes = run_selected(&ids, seed, |o| println!("{}", o.line()));
    let mut fatal = 0;
    for o in outcomes.iter().filter(|o| !o.passed) {
        match o.known_unattainable() {
            Some(why) => println!("criterion {:>2} is a known failure: {why}", o.id),
            None => fatal += 1,
        }
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!(
        "{passed} of {} criteria passed, {} failed ({fatal} unexpected)",
        outcomes.len(),
        outcomes.len() - passed
    );
    if fatal > 0 {
        std::process::exit(1);
    }
}
