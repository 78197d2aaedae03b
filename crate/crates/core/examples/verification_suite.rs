//! Runs the built-in verification suites and prints one JSON line each.
//!
//! `cargo run --release --example verification_suite [SEED]`

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let reports = klwishart::verify::run_named("all", seed).expect("all is a known suite");
    for r in &reports {
        println!("{}", r.to_json_line());
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    eprintln!("{} suites, {failed} failed", reports.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
