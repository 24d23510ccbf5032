//! Reference outputs checked into the repository, regenerated on demand.

use std::fs;
use std::path::Path;

use clap::Parser;

use crate::commands::{run, CliError};
use crate::Cli;

pub struct GoldenResult {
    pub file: String,
    pub matches: bool,
}

/// File name and command-line arguments of every golden output.
pub fn cases() -> Vec<(String, Vec<String>)> {
    let sqrt_01 = 0.1f64.sqrt().to_string();
    let mut cases: Vec<(String, Vec<String>)> = Vec::new();
    let mut add = |file: &str, args: &[&str]| {
        cases.push((
            file.to_string(),
            args.iter().map(|a| a.to_string()).collect(),
        ));
    };
    for (file, state) in [
        ("wigner_0.json", "0"),
        ("wigner_1.json", "1"),
        ("wigner_plus.json", "+"),
        ("wigner_minus.json", "-"),
        ("wigner_i.json", "i"),
        ("wigner_minus_i.json", "-i"),
        ("wigner_00+01.json", "00+01"),
        ("wigner_00+11.json", "00+11"),
        ("wigner_00+01+10+11.json", "00+01+10+11"),
    ] {
        add(file, &["wigner", &format!("--state={state}")]);
    }
    add(
        "wigner_povm_i.json",
        &["wigner", "--povm", "y", "--outcome", "i"],
    );
    add(
        "smooth_x0_yi.json",
        &["smooth", "--state", "0", "--povm", "y", "--outcome", "i"],
    );
    add(
        "smooth_x0_identity.json",
        &["smooth", "--state", "0", "--povm", "identity"],
    );
    add(
        "aav_strong_signal.json",
        &[
            "aav",
            "--dt",
            "0.1",
            "--dz",
            &sqrt_01,
            "--xi",
            "+",
            "--mode",
            "first-order",
        ],
    );
    add(
        "aav_dz0.json",
        &[
            "aav",
            "--dt",
            "0.1",
            "--dz",
            "0",
            "--xi",
            "+",
            "--mode",
            "first-order",
        ],
    );
    add(
        "aav_exact.json",
        &[
            "aav", "--dt", "0.1", "--dz", &sqrt_01, "--xi", "+", "--mode", "exact",
        ],
    );
    add(
        "aav_sweep.csv",
        &[
            "aav",
            "--dt",
            "0.1",
            "--dz-grid",
            "-0.1:0.1:41",
            "--mode",
            "first-order",
            "--format",
            "csv",
        ],
    );
    add("stabilizers_1.json", &["stabilizers", "--n-qubits", "1"]);
    add("stabilizers_2.json", &["stabilizers", "--n-qubits", "2"]);
    add(
        "histories.json",
        &["histories", "--psi", "0", "--basis", "x", "--final", "i"],
    );
    cases
}

pub fn generate(args: &[String]) -> Result<String, CliError> {
    let argv = std::iter::once("qsmooth".to_string()).chain(args.iter().cloned());
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(run(&cli)?.text)
}

pub fn write_all(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for (file, args) in cases() {
        let path = dir.join(&file);
        fs::write(&path, generate(&args)?)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

pub fn compare_all(dir: &Path) -> Result<Vec<GoldenResult>, CliError> {
    cases()
        .into_iter()
        .map(|(file, args)| {
            let expected = fs::read_to_string(dir.join(&file)).ok();
            let matches = expected.is_some_and(|e| e == generate(&args).unwrap_or_default());
            Ok(GoldenResult { file, matches })
        })
        .collect()
}
