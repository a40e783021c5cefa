//! Command-line front end. [`run`] takes the argument list and output streams
//! and returns the process exit code: 0 success, 1 input error, 2
//! verification failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::blockzxz::{synthesize, SynthesisConfig};
use crate::circuit::{circuit_to_unitary, distance_up_to_phase, from_json, to_json, to_qasm};
use crate::error::{Error, Result};
use crate::numerics::{self, haar_unitary, CMatrix};
use crate::optimizer::{expected_count, lower_bound, OptLevel};
use crate::report::make_report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "zxzsynth", version, about = "Block-ZXZ unitary synthesis into CNOT + single-qubit gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Qasm,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a circuit from a matrix file or a seeded Haar-random unitary.
    Synth {
        /// Matrix file: first line d, then d rows of "re im" pairs.
        matrix: Option<PathBuf>,
        /// Use a Haar-random unitary on this many qubits instead of a file.
        #[arg(long, value_name = "N", conflicts_with = "matrix")]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "3", value_parser = parse_level)]
        level: OptLevel,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
        /// Write the circuit here instead of stdout.
        #[arg(long)]
        out_file: Option<PathBuf>,
        /// Simulate the circuit and fail with exit code 2 if it is off.
        #[arg(long)]
        verify: bool,
        /// Append a JSON report line to this file.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Skip the unitarity check when loading the matrix file.
        #[arg(long)]
        no_check: bool,
        /// Distance bound for --verify.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Distance between a circuit JSON file and a matrix file.
    Verify {
        circuit: PathBuf,
        matrix: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Expected CNOT counts for n = 1..=N.
    Count {
        #[arg(long, default_value = "3", value_parser = parse_level)]
        level: OptLevel,
        #[arg(long)]
        n: u32,
    },
}

fn parse_level(s: &str) -> std::result::Result<OptLevel, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses the matrix file format.
pub fn parse_matrix_file(text: &str) -> Result<CMatrix<f64>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let d: usize = first
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad dimension line {first:?}")))?;
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::Parse(format!("dimension {d} is not a power of two")));
    }
    let mut m = CMatrix::zeros(d, d);
    for r in 0..d {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {d} rows, found {r}")))?;
        let vals = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {t:?} in row {r}"))))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != 2 * d {
            return Err(Error::Parse(format!("row {r} has {} numbers, expected {}", vals.len(), 2 * d)));
        }
        for c in 0..d {
            m[(r, c)] = Complex::new(vals[2 * c], vals[2 * c + 1]);
        }
    }
    if lines.next().is_some() {
        return Err(Error::Parse(format!("more than {d} rows")));
    }
    Ok(m)
}

/// Writes `m` in the matrix file format with round-trip-exact floats.
pub fn format_matrix_file(m: &CMatrix<f64>) -> String {
    let mut s = format!("{}\n", m.nrows());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|c| format!("{:.16e} {:.16e}", m[(r, c)].re, m[(r, c)].im))
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_matrix(path: &Path, check: bool) -> Result<CMatrix<f64>> {
    let m = parse_matrix_file(&read(path)?)?;
    if check {
        numerics::check_unitary(&m, SynthesisConfig::default().tolerances.unitarity, "matrix file")?;
    }
    Ok(m)
}

enum Outcome {
    Ok,
    VerifyFailed,
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    match cli.command {
        Command::Synth { matrix, random, seed, level, out: fmt, out_file, verify, report, no_check, tol } => {
            let u = match (matrix, random) {
                (Some(p), None) => load_matrix(&p, !no_check)?,
                (None, Some(n)) if (1..=16).contains(&n) => {
                    haar_unitary::<f64, _>(1 << n, &mut ChaCha8Rng::seed_from_u64(seed))
                }
                (None, Some(n)) => return Err(Error::Precondition(format!("--random {n} is out of range 1..=16"))),
                _ => return Err(Error::Precondition("give a matrix file or --random N".into())),
            };
            let mut cfg = SynthesisConfig::new(level);
            cfg.verify_tol = tol;
            cfg.seed = random.map(|_| seed);
            let t = Instant::now();
            let circ = synthesize(&u, &cfg)?;
            let elapsed = t.elapsed();
            let text = match fmt {
                OutFormat::Json => to_json(&circ) + "\n",
                OutFormat::Qasm => to_qasm(&circ)?,
            };
            match out_file {
                Some(p) => fs::write(&p, text)?,
                None => out.write_all(text.as_bytes())?,
            }
            if !verify && report.is_none() {
                return Ok(Outcome::Ok);
            }
            let rep = make_report(&u, &circ, &cfg, elapsed)?;
            let line = rep.to_json_line();
            match &report {
                Some(p) => {
                    let mut f = fs::OpenOptions::new().create(true).append(true).open(p)?;
                    writeln!(f, "{line}")?;
                }
                None => writeln!(err, "{line}")?,
            }
            if verify && !rep.passes(tol) {
                writeln!(err, "verification failed: cnots {} (expected {}), distance {:?}", rep.cnot_measured, rep.cnot_expected, rep.reconstruction_distance)?;
                return Ok(Outcome::VerifyFailed);
            }
            Ok(Outcome::Ok)
        }
        Command::Verify { circuit, matrix, tol } => {
            let c = from_json::<f64>(&read(&circuit)?)?;
            let u = load_matrix(&matrix, false)?;
            if u.nrows() != 1 << c.num_qubits() {
                return Err(Error::Structural(format!(
                    "circuit has {} qubits but the matrix is {}x{}",
                    c.num_qubits(),
                    u.nrows(),
                    u.ncols()
                )));
            }
            let d = distance_up_to_phase(&u, &circuit_to_unitary(&c)?)?;
            writeln!(out, "{}", serde_json::json!({ "distance": d }))?;
            Ok(if d <= tol { Outcome::Ok } else { Outcome::VerifyFailed })
        }
        Command::Count { level, n } => {
            writeln!(out, "n\tlevel\tcnots\tlower_bound")?;
            for k in 1..=n {
                writeln!(out, "{k}\t{level}\t{}\t{}", expected_count(k, level)?, lower_bound(k)?)?;
            }
            Ok(Outcome::Ok)
        }
    }
}

pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(Outcome::Ok) => EXIT_OK,
        Ok(Outcome::VerifyFailed) => EXIT_VERIFY,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::identity;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("zxzsynth").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn matrix_file_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = haar_unitary::<f64, _>(4, &mut rng);
        assert_eq!(parse_matrix_file(&format_matrix_file(&u)).unwrap(), u);
    }

    #[test]
    fn matrix_file_errors() {
        assert!(parse_matrix_file("").is_err());
        assert!(parse_matrix_file("3\n1 0 0 0 0 0\n0 0 1 0 0 0\n0 0 0 0 1 0\n").is_err());
        assert!(parse_matrix_file("2\n1 0 0 0\n").is_err());
        assert!(parse_matrix_file("2\n1 0 0\n0 0 1 0\n").is_err());
        assert!(parse_matrix_file("2\n1 0 x 0\n0 0 1 0\n").is_err());
        assert_eq!(parse_matrix_file("2\n1 0 0 0\n0 0 1 0\n").unwrap(), identity(2));
    }

    #[test]
    fn count_table() {
        let (code, out, _) = call(&["count", "--level", "3", "--n", "6"]);
        assert_eq!(code, 0);
        let last = out.lines().last().unwrap();
        assert_eq!(last, "6\tL3\t1783\t1020");
    }

    #[test]
    fn unknown_flag_is_input_error() {
        assert_eq!(call(&["synth", "--frobnicate"]).0, EXIT_INPUT);
        assert_eq!(call(&["count", "--level", "7", "--n", "2"]).0, EXIT_INPUT);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }
}
