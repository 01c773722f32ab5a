//! One line per acceptance criterion; exits nonzero if any fails.
//!
//! Criteria 1 to 8 run in process. Criterion 9 runs the `qwalk` binary
//! twice on the same config with different worker counts and compares the
//! CSV bodies byte for byte.

use std::path::Path;
use std::process::Command;

use qwalk::verify::{self, Verdict, DETERMINISM_CONFIG};

fn run_binary(config: &Path, out: &Path, threads: usize) -> bool {
    Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(["--threads", &threads.to_string(), "run"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn determinism() -> Verdict {
    let started = std::time::Instant::now();
    let dir = tempfile::tempdir().expect("temp dir");
    let config = dir.path().join("config.toml");
    std::fs::write(&config, DETERMINISM_CONFIG).expect("config written");
    let (a, b) = (dir.path().join("one"), dir.path().join("four"));
    let ran = run_binary(&config, &a, 1) && run_binary(&config, &b, 4);
    let (passed, detail) = match (ran, verify::csv_bodies(&a), verify::csv_bodies(&b)) {
        (true, Ok(x), Ok(y)) => {
            let same = x == y && !x.is_empty();
            (
                same,
                format!(
                    "{} CSV files from `qwalk run` at 1 and 4 threads, byte-identical: {same}",
                    x.len()
                ),
            )
        }
        _ => (false, "a run failed".to_string()),
    };
    Verdict {
        id: 9,
        name: verify::name(9),
        passed,
        detail,
        seconds: started.elapsed().as_secs_f64(),
    }
}

fn main() {
    let mut failed = 0;
    for id in 1..=8 {
        let v = verify::criterion(id);
        println!("{v}");
        failed += usize::from(!v.passed);
    }
    let v = determinism();
    println!("{v}");
    failed += usize::from(!v.passed);
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
