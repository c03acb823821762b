//! Line-delimited class-group records.
//!
//! One JSON object per line; blank lines and lines starting with `#` are
//! ignored. Keys:
//!
//! - `p`: odd prime (required)
//! - `n`: layer index, `n ≥ 0` (required)
//! - `inv`: invariant factors of the p-class group, each `p^k` with
//!   `k ≥ 1`, non-increasing; `[]` is the trivial group (required)
//! - `flags`: object with booleans `p_nonsplit`, `cm_field`,
//!   `A_k_nontrivial`, `A_kplus_trivial`, `no_p_roots_of_unity` (optional;
//!   a missing flag counts as not asserted)
//! - `label`: string naming the field tower (optional, default `""`)
//!
//! Other keys are ignored with a warning.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_nonsplit: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cm_field: Option<bool>,
    #[serde(default, rename = "A_k_nontrivial", skip_serializing_if = "Option::is_none")]
    pub a_k_nontrivial: Option<bool>,
    #[serde(default, rename = "A_kplus_trivial", skip_serializing_if = "Option::is_none")]
    pub a_kplus_trivial: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_p_roots_of_unity: Option<bool>,
    #[serde(flatten, skip_serializing)]
    pub extra: BTreeMap<String, Value>,
}

impl Flags {
    pub fn all() -> Self {
        Flags {
            p_nonsplit: Some(true),
            cm_field: Some(true),
            a_k_nontrivial: Some(true),
            a_kplus_trivial: Some(true),
            no_p_roots_of_unity: Some(true),
            extra: BTreeMap::new(),
        }
    }

    /// Every hypothesis flag present and true.
    pub fn all_hold(&self) -> bool {
        [
            self.p_nonsplit,
            self.cm_field,
            self.a_k_nontrivial,
            self.a_kplus_trivial,
            self.no_p_roots_of_unity,
        ]
        .iter()
        .all(|f| *f == Some(true))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassGroupRecord {
    pub p: u64,
    pub n: u32,
    pub inv: Vec<u64>,
    #[serde(default)]
    pub flags: Flags,
    #[serde(default)]
    pub label: String,
    #[serde(flatten, skip_serializing)]
    pub extra: BTreeMap<String, Value>,
}

impl ClassGroupRecord {
    /// Parses and validates one line; returns the record and the unknown
    /// keys it carried.
    pub fn parse_line(line: &str) -> Result<(Self, Vec<String>), String> {
        let rec: ClassGroupRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if rec.p < 3 || !anticyc_core::padic::is_prime(&rec.p.into()) {
            return Err(format!("p = {} is not an odd prime", rec.p));
        }
        rec.exponents()?;
        let mut unknown: Vec<String> = rec.extra.keys().cloned().collect();
        unknown.extend(rec.flags.extra.keys().map(|k| format!("flags.{k}")));
        Ok((rec, unknown))
    }

    /// Exponents `k` of the invariant factors `p^k`.
    pub fn exponents(&self) -> Result<Vec<u32>, String> {
        let mut out = Vec::with_capacity(self.inv.len());
        for &f in &self.inv {
            let mut v = f;
            let mut k = 0;
            while v > 1 && v % self.p == 0 {
                v /= self.p;
                k += 1;
            }
            if v != 1 || k == 0 {
                return Err(format!("invariant {f} is not a positive power of {}", self.p));
            }
            out.push(k);
        }
        if out.windows(2).any(|w| w[0] < w[1]) {
            return Err(format!("invariants {:?} are not non-increasing", self.inv));
        }
        Ok(out)
    }

    /// `log_p #A`.
    pub fn size_exponent(&self) -> u64 {
        self.exponents().map(|e| e.iter().map(|&k| k as u64).sum()).unwrap_or(0)
    }

    pub fn is_cyclic(&self) -> bool {
        self.inv.len() <= 1
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}
