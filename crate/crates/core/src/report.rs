//! Per-run synthesis report, serialized as one JSON object per line.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::blockzxz::SynthesisConfig;
use crate::circuit::{circuit_to_unitary, distance_up_to_phase, Circuit, DEFAULT_SIM_CAP};
use crate::error::{Error, Result};
use crate::numerics::{self, CMatrix};
use crate::optimizer::expected_count;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub n: usize,
    #[serde(rename = "level")]
    pub opt_level: u8,
    #[serde(rename = "cnots")]
    pub cnot_measured: u64,
    #[serde(rename = "expected")]
    pub cnot_expected: u64,
    #[serde(rename = "oneq")]
    pub one_qubit_gate_count: u64,
    /// `None` when the register is too large to simulate.
    #[serde(rename = "distance")]
    pub reconstruction_distance: Option<f64>,
    #[serde(rename = "ms")]
    pub wall_time_ms: f64,
    pub seed: Option<u64>,
}

impl SynthesisReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| Error::Parse(format!("report JSON: {e}")))
    }

    /// Counts match and, when measured, the distance is within `verify_tol`.
    pub fn passes(&self, verify_tol: f64) -> bool {
        self.cnot_measured == self.cnot_expected
            && self.reconstruction_distance.is_none_or(|d| d <= verify_tol)
    }
}

/// Builds the report for `circuit = synthesize(u, cfg)`; `elapsed` is the
/// caller-measured synthesis time.
pub fn make_report<T: Real>(
    u: &CMatrix<T>,
    circuit: &Circuit<T>,
    cfg: &SynthesisConfig,
    elapsed: Duration,
) -> Result<SynthesisReport> {
    let n = numerics::qubit_count(u)?;
    let reconstruction_distance = if n <= DEFAULT_SIM_CAP {
        Some(distance_up_to_phase(u, &circuit_to_unitary(circuit)?)?)
    } else {
        None
    };
    Ok(SynthesisReport {
        n,
        opt_level: cfg.opt_level.index(),
        cnot_measured: circuit.cnot_count()? as u64,
        cnot_expected: expected_count(n as u32, cfg.opt_level)?,
        one_qubit_gate_count: circuit.one_qubit_count()? as u64,
        reconstruction_distance,
        wall_time_ms: elapsed.as_secs_f64() * 1e3,
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockzxz::synthesize;
    use crate::numerics::{haar_unitary, identity};
    use crate::optimizer::OptLevel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn report_for(n: usize, level: OptLevel, seed: u64) -> SynthesisReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = haar_unitary::<f64, _>(1 << n, &mut rng);
        let mut cfg = SynthesisConfig::new(level);
        cfg.seed = Some(seed);
        let t = std::time::Instant::now();
        let c = synthesize(&u, &cfg).unwrap();
        make_report(&u, &c, &cfg, t.elapsed()).unwrap()
    }

    #[test]
    fn expected_values() {
        let r = report_for(3, OptLevel::L3, 1);
        assert_eq!((r.cnot_expected, r.cnot_measured), (19, 19));
        assert!(r.passes(1e-8));
        assert_eq!(r.seed, Some(1));
        assert_eq!(report_for(5, OptLevel::L3, 2).cnot_expected, 423);
        assert_eq!(report_for(1, OptLevel::L3, 3).cnot_expected, 0);
    }

    #[test]
    fn json_round_trip_and_keys() {
        let r = report_for(2, OptLevel::L1, 4);
        let line = r.to_json_line();
        assert!(!line.contains('\n'));
        assert_eq!(SynthesisReport::from_json_line(&line).unwrap(), r);
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["cnots", "distance", "expected", "level", "ms", "n", "oneq", "seed"]);
    }

    #[test]
    fn rejects_ir_circuits() {
        let mut c = Circuit::<f64>::new(1);
        c.push(crate::circuit::Gate::Generic1q { qubit: 0, matrix: identity(2) }).unwrap();
        let cfg = SynthesisConfig::default();
        assert!(make_report(&identity(2), &c, &cfg, Duration::ZERO).is_err());
    }
}
