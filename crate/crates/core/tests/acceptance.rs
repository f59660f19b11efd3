use std::process::ExitCode;

use dioph::suite::run_criterion;

const SEED: u64 = 0x5eed_2024;

fn main() -> ExitCode {
    let seed = std::env::var("DIOPH_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(SEED);
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for id in 1..=8 {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let r = run_criterion(id, seed);
        println!("{}", r.line());
        if !r.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
