//! Verification reports and their associative merge.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Outcome of checking one claim over one or more trials.
///
/// A *margin* is signed so that non-negative means the inequality holds; a
/// check is a violation when its margin falls below `-slack` (or is NaN).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim: String,
    pub trials: u64,
    pub violations: u64,
    #[serde(with = "nonfinite")]
    pub worst_margin: f64,
    pub near_zero_count: u64,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    /// Worst margin per sub-check.
    #[serde(with = "nonfinite_map")]
    pub breakdown: BTreeMap<String, f64>,
    /// Event counts (violations per sub-check, diagnostics that fired).
    pub counters: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl VerificationReport {
    pub fn new(claim: impl Into<String>) -> Self {
        VerificationReport {
            claim: claim.into(),
            trials: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            near_zero_count: 0,
            seed: None,
            config: serde_json::Value::Null,
            breakdown: BTreeMap::new(),
            counters: BTreeMap::new(),
            timestamp: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// Records `margin` under `key`; returns whether it is within `slack`.
    pub fn observe(&mut self, key: &str, margin: f64, slack: f64) -> bool {
        let effective = if margin.is_nan() {
            f64::NEG_INFINITY
        } else {
            margin
        };
        self.worst_margin = self.worst_margin.min(effective);
        let slot = self
            .breakdown
            .entry(key.to_string())
            .or_insert(f64::INFINITY);
        *slot = slot.min(effective);
        let holds = margin >= -slack;
        if !holds {
            self.violations += 1;
            self.count(&format!("violations.{key}"));
        }
        holds
    }

    /// Records a failed condition that has no numeric margin.
    pub fn flag_violation(&mut self, key: &str) {
        self.violations += 1;
        self.count(&format!("violations.{key}"));
    }

    pub fn count(&mut self, key: &str) {
        *self.counters.entry(key.to_string()).or_insert(0) += 1;
    }

    pub fn mark_near_zero(&mut self) {
        self.near_zero_count += 1;
    }

    /// Folds `other` into `self`. The operation is associative and
    /// commutative, so sweep results do not depend on scheduling.
    pub fn merge(mut self, other: VerificationReport) -> VerificationReport {
        self.trials += other.trials;
        self.violations += other.violations;
        self.worst_margin = self.worst_margin.min(other.worst_margin);
        self.near_zero_count += other.near_zero_count;
        for (k, v) in other.breakdown {
            let slot = self.breakdown.entry(k).or_insert(f64::INFINITY);
            *slot = slot.min(v);
        }
        for (k, v) in other.counters {
            *self.counters.entry(k).or_insert(0) += v;
        }
        self
    }

    /// Canonical JSON with the timestamp removed, for replay comparisons.
    pub fn to_json_without_timestamp(&self) -> String {
        let mut copy = self.clone();
        copy.timestamp = None;
        serde_json::to_string_pretty(&copy).expect("report serializes")
    }
}

/// JSON has no infinities; they travel as the strings "inf", "-inf", "nan".
mod nonfinite {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub(super) enum Repr {
        Num(f64),
        Text(String),
    }

    pub(super) fn to_repr(v: f64) -> Repr {
        if v.is_finite() {
            Repr::Num(v)
        } else if v.is_nan() {
            Repr::Text("nan".into())
        } else if v > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Text("-inf".into())
        }
    }

    pub(super) fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Text(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("invalid float {other:?}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }
}

mod nonfinite_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::nonfinite::{from_repr, to_repr, Repr};

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        m.iter()
            .map(|(k, v)| (k.clone(), to_repr(*v)))
            .collect::<BTreeMap<_, _>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        BTreeMap::<String, Repr>::deserialize(d)?
            .into_iter()
            .map(|(k, r)| from_repr(r).map(|v| (k, v)))
            .collect()
    }
}
