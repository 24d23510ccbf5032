use std::fmt;
use std::fs;
use std::path::Path;

use qsmooth::aav::{self, ExpansionMode, WeakMeasurementParams, Xi};
use qsmooth::format::{self, Input};
use qsmooth::qops::{DensityOperator, PovmElement, PovmSet};
use qsmooth::smoothing::{propagate, smooth, SmoothingResult, Trajectory};
use qsmooth::wigner::{povm_to_wigner, state_to_wigner, WignerTable};
use qsmooth::{named, stabilizer, verify};
use serde_json::{json, Value};

use crate::{Cli, Command, Format, Kind, Mode, PovmSource, StateSource};

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_INCOMPATIBLE: u8 = 3;
pub const EXIT_INVARIANT: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Core(qsmooth::Error),
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_incompatible_outcome() => EXIT_INCOMPATIBLE,
            _ => EXIT_VALIDATION,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<qsmooth::Error> for CliError {
    fn from(e: qsmooth::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Rendered command output plus the exit status to report.
pub struct Output {
    pub text: String,
    pub status: u8,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, status: 0 }
    }
}

pub fn emit(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are serializable");
    s.push('\n');
    s
}

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn table_csv(t: &WignerTable) -> String {
    let n = t.n_qubits();
    let header: Vec<String> = if n == 1 {
        vec!["q".into(), "p".into(), "w".into()]
    } else {
        (1..=n)
            .map(|k| format!("q{k}"))
            .chain((1..=n).map(|k| format!("p{k}")))
            .chain(["w".into()])
            .collect()
    };
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_text(
        &header,
        t.iter().map(|(pt, w)| {
            pt.coords()
                .iter()
                .map(|c| c.to_string())
                .chain([num(w)])
                .collect()
        }),
    )
}

fn density_from(source: &StateSource) -> CliResult<DensityOperator> {
    match (&source.state, &source.file) {
        (Some(name), _) => Ok(named::parse_state(name)?.density()),
        (None, Some(path)) => match format::parse_input(&read(path)?)? {
            Input::State(s) => Ok(s.density()),
            Input::Operator(m) => Ok(DensityOperator::new(m)?),
        },
        (None, None) => Err(CliError::Usage(
            "one of --state or --file is required".into(),
        )),
    }
}

fn povm_from(source: &PovmSource, n_qubits: usize) -> CliResult<Option<PovmSet>> {
    match (&source.povm, &source.povm_file) {
        (Some(name), _) => Ok(Some(named::parse_povm(name, n_qubits)?)),
        (None, Some(path)) => Ok(Some(format::parse_povm(&read(path)?)?)),
        (None, None) => Ok(None),
    }
}

fn n_qubits_of(dim: usize) -> CliResult<usize> {
    match dim {
        2 => Ok(1),
        4 => Ok(2),
        d => Err(qsmooth::Error::UnsupportedDimension(d).into()),
    }
}

fn outcome_of(source: &PovmSource, povm: &PovmSet) -> CliResult<String> {
    match &source.outcome {
        Some(o) => Ok(o.clone()),
        None if povm.elements().len() == 1 => Ok(povm.elements()[0].label().to_string()),
        None => Err(CliError::Usage(
            "--outcome is required for this measurement".into(),
        )),
    }
}

pub fn run(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Wigner {
            source,
            povm,
            kind,
            n_qubits,
        } => wigner(cli.format, source, povm, *kind, *n_qubits),
        Command::Smooth {
            source,
            povm,
            steps,
            at,
        } => smooth_cmd(cli.format, source, povm, steps, *at),
        Command::Aav {
            dt,
            dz,
            dz_grid,
            xi,
            mode,
            psi,
        } => aav_cmd(cli.format, *dt, *dz, dz_grid.as_deref(), xi, *mode, psi),
        Command::Stabilizers { n_qubits } => stabilizers(cli.format, *n_qubits),
        Command::Histories {
            psi,
            basis,
            final_state,
        } => histories(cli.format, psi, *basis, final_state),
        Command::Verify {
            seed,
            golden,
            bless,
        } => verify_cmd(cli.format, *seed, golden.as_deref(), *bless),
    }
}

fn render_table(format: Format, t: &WignerTable) -> Output {
    Output::ok(match format {
        Format::Json => json_text(&format::table(t)),
        Format::Csv => table_csv(t),
    })
}

fn wigner(
    format: Format,
    source: &StateSource,
    povm: &PovmSource,
    kind: Kind,
    n_qubits: usize,
) -> CliResult<Output> {
    if let Some(set) = povm_from(povm, n_qubits)? {
        let label = outcome_of(povm, &set)?;
        return Ok(render_table(format, &povm_to_wigner(set.element(&label)?)?));
    }
    let table = match (kind, &source.file, &source.state) {
        (Kind::Povm, Some(path), None) => match format::parse_input(&read(path)?)? {
            Input::State(s) => povm_to_wigner(&PovmElement::projector("e", &s))?,
            Input::Operator(m) => povm_to_wigner(&PovmElement::new("e", m)?)?,
        },
        _ => state_to_wigner(&density_from(source)?)?,
    };
    Ok(render_table(format, &table))
}

fn smoothing_output(format: Format, r: &SmoothingResult) -> Output {
    Output::ok(match format {
        Format::Json => json_text(&format::smoothing(r)),
        Format::Csv => table_csv(&r.posterior),
    })
}

fn smooth_cmd(
    format: Format,
    source: &StateSource,
    povm: &PovmSource,
    steps: &str,
    at: usize,
) -> CliResult<Output> {
    let rho = density_from(source)?;
    let n = n_qubits_of(rho.dim())?;
    let set = povm_from(povm, n)?
        .ok_or_else(|| CliError::Usage("one of --povm or --povm-file is required".into()))?;
    let outcome = outcome_of(povm, &set)?;
    let traj = Trajectory::new(rho, named::parse_steps(steps, n)?, set, outcome)?;
    let (w1, w2) = propagate(&traj, at)?;
    Ok(smoothing_output(format, &smooth(&w1, &w2)?))
}

fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Usage(format!("--dz-grid expects lo:hi:n, got '{spec}'"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    match n {
        0 => Err(bad()),
        1 => Ok(vec![lo]),
        _ => Ok((0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()),
    }
}

fn aav_cmd(
    format: Format,
    dt: f64,
    dz: Option<f64>,
    grid: Option<&str>,
    xi: &str,
    mode: Mode,
    psi: &str,
) -> CliResult<Output> {
    let xi = Xi::parse(xi)?;
    let psi = named::parse_state(psi)?;
    let mode = match mode {
        Mode::Exact => ExpansionMode::Exact,
        Mode::FirstOrder => ExpansionMode::FirstOrder,
    };
    let dzs = match (dz, grid) {
        (Some(dz), _) => vec![dz],
        (None, Some(g)) => parse_grid(g)?,
        (None, None) => {
            return Err(CliError::Usage(
                "one of --dz or --dz-grid is required".into(),
            ))
        }
    };
    let reports = dzs
        .iter()
        .map(|&dz| aav::run_aav(&psi, &WeakMeasurementParams::new(dt, dz)?, xi, mode))
        .collect::<qsmooth::Result<Vec<_>>>()?;
    let text = match format {
        Format::Json if grid.is_none() => json_text(&format::aav_report(&reports[0])),
        Format::Json => json_text(&Value::Array(
            reports.iter().map(format::aav_report).collect(),
        )),
        Format::Csv => csv_text(
            &["dz", "q_bar", "q_map", "min_posterior"],
            reports.iter().map(|r| {
                let min = r.smooth_t1.posterior.min().min(r.smooth_t2.posterior.min());
                vec![
                    num(r.params.delta_z()),
                    num(r.q_bar),
                    r.q_map.as_str().to_string(),
                    num(min),
                ]
            }),
        ),
    };
    Ok(Output::ok(text))
}

fn stabilizers(format: Format, n_qubits: usize) -> CliResult<Output> {
    let c = stabilizer::census(n_qubits)?;
    Ok(Output::ok(match format {
        Format::Json => json_text(&format::census(&c)),
        Format::Csv => csv_text(
            &["index", "wigner_min", "nonnegative"],
            c.entries
                .iter()
                .enumerate()
                .map(|(i, e)| vec![i.to_string(), num(e.wigner_min), e.nonnegative.to_string()]),
        ),
    }))
}

/// Tolerance on the real part of the off-diagonal entries.
pub const WEAK_CONSISTENCY_TOL: f64 = 1e-10;

fn histories(format: Format, psi: &str, basis: char, final_state: &str) -> CliResult<Output> {
    let psi = named::parse_state(psi)?;
    let phi = named::parse_state(final_state)?;
    let (p0, p1) = named::projector_pair(basis)?;
    let c = aav::coherence_functional(&psi, (&p0, &p1), &phi)?;
    let consistent = aav::weak_consistency(&c, WEAK_CONSISTENCY_TOL);
    Ok(Output::ok(match format {
        Format::Json => json_text(&format::coherence(&c, consistent)),
        Format::Csv => csv_text(
            &["p", "p_prime", "re", "im"],
            (0..2).flat_map(|p| {
                let c = &c;
                (0..2).map(move |q| {
                    let z = c.get(p, q);
                    vec![p.to_string(), q.to_string(), num(z.re), num(z.im)]
                })
            }),
        ),
    }))
}

fn verify_cmd(format: Format, seed: u64, golden: Option<&Path>, bless: bool) -> CliResult<Output> {
    let checks = verify::run_all(seed)?;
    let golden_results = match golden {
        Some(dir) if bless => {
            crate::golden::write_all(dir)?;
            Vec::new()
        }
        Some(dir) => crate::golden::compare_all(dir)?,
        None => Vec::new(),
    };
    let passed = checks.iter().all(|c| c.passed) && golden_results.iter().all(|g| g.matches);
    let text = match format {
        Format::Json => json_text(&json!({
            "seed": seed,
            "passed": passed,
            "checks": checks.iter().map(|c| json!({
                "name": c.name,
                "passed": c.passed,
                "observed": c.observed,
                "tolerance": c.tolerance,
                "bound": if c.upper_bound { "max" } else { "min" },
            })).collect::<Vec<_>>(),
            "golden": golden_results.iter().map(|g| json!({
                "file": g.file,
                "matches": g.matches,
            })).collect::<Vec<_>>(),
        })),
        Format::Csv => csv_text(
            &["check", "passed", "observed", "tolerance"],
            checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.to_string(),
                        c.passed.to_string(),
                        num(c.observed),
                        num(c.tolerance),
                    ]
                })
                .chain(golden_results.iter().map(|g| {
                    vec![
                        format!("golden {}", g.file),
                        g.matches.to_string(),
                        String::new(),
                        String::new(),
                    ]
                })),
        ),
    };
    Ok(Output {
        text,
        status: if passed { 0 } else { EXIT_INVARIANT },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("-1:1:3").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(parse_grid("0.5:2:1").unwrap(), vec![0.5]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a:1:2").is_err());
    }

    #[test]
    fn csv_numbers_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.324555320336759, 1e-300] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
