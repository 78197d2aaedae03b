//! The `fit` pipeline as a library call: CSV text in, JSON report out.

use klwishart::cli::{cmd_fit, FitConfig, MeanModeArg};

fn main() {
    let dir = std::env::temp_dir().join("klwishart-fit-example");
    std::fs::create_dir_all(&dir).unwrap();
    let data = dir.join("obs.csv");
    std::fs::write(&data, "a b\n1.0 0.2\n1.4 -0.1\n0.7 0.5\n1.1 0.0\n0.9 0.3\n").unwrap();

    let cfg = FitConfig {
        data_path: data,
        mean_mode: MeanModeArg::Unknown,
        known_mu: None,
        prior_mean: Some(vec![1.0, 0.0]),
        alpha: 2.0,
        mode_cov_source: Some("identity".into()),
        output: None,
        seed: None,
    };
    match cmd_fit(&cfg, &mut std::io::stderr()) {
        Ok(report) => print!("{}", klwishart::io::to_json_pretty(&report)),
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.code);
        }
    }
}
