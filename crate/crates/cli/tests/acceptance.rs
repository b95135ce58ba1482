//! Acceptance criteria, one line per criterion on stdout.

use naifs_pressure_cli::acceptance;
use naifs_pressure_cli::exec::Workers;

fn main() {
    let exec = Workers::from_env().expect("worker count");
    let results = acceptance::run_all(&exec, |c| println!("{c}"));
    let failed: Vec<usize> = results.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
