//! Runs the six acceptance criteria from the wasm demo crate and prints one PASS/FAIL
//! line for each. Arguments select criteria by number; `ACCEPTANCE_VERBOSE=1` prints all notes.

use twisted_blocks::acceptance;

fn main() {
    let wanted: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let verbose = std::env::var("ACCEPTANCE_VERBOSE").is_ok_and(|v| v == "1");
    let runs: [fn() -> acceptance::Criterion; 6] = [
        acceptance::criterion1,
        acceptance::criterion2,
        acceptance::criterion3,
        acceptance::criterion4,
        acceptance::criterion5,
        acceptance::criterion6,
    ];
    let mut failed = 0;
    for (i, run) in runs.iter().enumerate() {
        if !wanted.is_empty() && !wanted.contains(&(i as u8 + 1)) {
            continue;
        }
        let c = run();
        println!("{}", c.line());
        if verbose || !c.ok() {
            for n in &c.notes {
                println!("    {n}");
            }
        }
        if !c.ok() {
            failed += 1;
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
