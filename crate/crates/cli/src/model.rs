//! JSON model files for `audit-parity`.
//!
//! ```json
//! {"p": 3, "precision": 4, "zeta": -1, "d": 2,
//!  "m": [[4, 0], [0, 61]], "d_matrix": [[0, 1], [1, 0]]}
//! ```
//!
//! `zeta` is an integer or `{"teichmuller": a}`; `precision` falls back to
//! the global `--precision`; `d_matrix` is optional.

use anticyc_core::iwasawa::GammaModel;
use anticyc_core::linalg::PadicMatrix;
use anticyc_core::{PadicExponent, PadicRing};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZetaSpec {
    Integer(i64),
    Teichmuller { teichmuller: i64 },
}

impl ZetaSpec {
    /// `-1`, any integer, or `teich:a`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(a) = s.strip_prefix("teich:") {
            return a
                .parse()
                .map(|teichmuller| ZetaSpec::Teichmuller { teichmuller })
                .map_err(|_| format!("bad Teichmüller residue {a:?}"));
        }
        s.parse()
            .map(ZetaSpec::Integer)
            .map_err(|_| format!("bad ζ {s:?}: expected an integer or teich:<a>"))
    }

    pub fn resolve(&self, ring: &PadicRing) -> Result<PadicExponent, String> {
        match *self {
            ZetaSpec::Integer(n) => Ok(PadicExponent::from(n)),
            ZetaSpec::Teichmuller { teichmuller } => ring
                .teichmuller(teichmuller)
                .map(PadicExponent::Padic)
                .map_err(|e| e.to_string()),
        }
    }

    /// The exponent together with its order as a root of unity.
    pub fn resolve_with_order(&self, ring: &PadicRing) -> Result<(PadicExponent, u32), String> {
        let zeta = self.resolve(ring)?;
        match zeta.root_of_unity_order(ring).map_err(|e| e.to_string())? {
            Some(d) if d > 1 => Ok((zeta, d)),
            _ => Err(format!("ζ = {zeta} is not a non-trivial root of unity of order dividing p - 1")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    pub zeta: ZetaSpec,
    pub d: u32,
    pub m: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_matrix: Option<Vec<Vec<i64>>>,
}

fn to_rows(m: &PadicMatrix) -> Vec<Vec<i64>> {
    m.rows()
        .iter()
        .map(|r| r.iter().map(|v| v.to_i64().expect("entry fits in i64")).collect())
        .collect()
}

impl ModelFile {
    pub fn from_model(model: &GammaModel, zeta: ZetaSpec) -> Self {
        let ring = model.m().ring();
        ModelFile {
            p: ring.p_u64().expect("small prime"),
            precision: Some(ring.precision()),
            zeta,
            d: model.d(),
            m: to_rows(model.m()),
            d_matrix: model.d_matrix().map(to_rows),
        }
    }

    pub fn precision_or(&self, default: u32) -> u32 {
        self.precision.unwrap_or(default)
    }

    /// Builds and validates the model; every failure is a model-invariant
    /// or input error.
    pub fn to_model(&self, default_precision: u32) -> Result<GammaModel, String> {
        let ring = PadicRing::new(self.p, self.precision_or(default_precision)).map_err(|e| e.to_string())?;
        let zeta = self.zeta.resolve(&ring)?;
        let m = PadicMatrix::from_rows(&ring, &self.m).map_err(|e| format!("m: {e}"))?;
        let dm = match &self.d_matrix {
            Some(rows) => Some(PadicMatrix::from_rows(&ring, rows).map_err(|e| format!("d_matrix: {e}"))?),
            None => None,
        };
        GammaModel::new(m, dm, zeta, self.d).map_err(|e| e.to_string())
    }
}
