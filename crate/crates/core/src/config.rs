//! JSON run configuration: problem block, integration policy and per-command parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::StopPolicy;
use crate::manifolds::{ManifoldKind, TraceOptions};
use crate::problem::{NonlinearitySpec, ProblemSpec, WeightFamily, WeightSpec};

/// Weight profile `h`; `params` is `[h0]` for `const` and `[h0, h_inf, r_c, m]` for
/// `rational`, where `h(r) = (h0 + h_inf s^m) / (1 + s^m)` and `s = r / r_c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    #[serde(rename = "type")]
    pub kind: WeightType,
    pub params: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightType {
    Const,
    Rational,
}

/// Problem block. With `Q` present `f(u) = u|u|^(q-2) (1 - |u|^(Q-q))` and `d± = 1`;
/// without it `f(u) = u|u|^(q-2)`, which is accepted in oracle mode only.
/// `k(r) = r^delta h(r)`; `varpi` defaults to `min(varpi_K, alpha_l / 2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub n: u32,
    pub p: f64,
    pub q: f64,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub big_q: Option<f64>,
    #[serde(default)]
    pub delta: f64,
    pub h: WeightConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varpi: Option<f64>,
    #[serde(default)]
    pub oracle_mode: bool,
}

impl ProblemConfig {
    pub fn config_a() -> Self {
        ProblemConfig {
            n: 3,
            p: 2.0,
            q: 7.0,
            big_q: Some(9.0),
            delta: 0.0,
            h: WeightConfig {
                kind: WeightType::Const,
                params: vec![1.0],
            },
            varpi: None,
            oracle_mode: false,
        }
    }

    pub fn oracle_b() -> Self {
        ProblemConfig {
            n: 4,
            p: 2.0,
            q: 4.0,
            big_q: None,
            delta: 0.0,
            h: WeightConfig {
                kind: WeightType::Const,
                params: vec![1.0],
            },
            varpi: None,
            oracle_mode: true,
        }
    }

    /// Builds the unvalidated problem; `Problem::new` performs the hypothesis checks.
    pub fn to_spec(&self) -> Result<ProblemSpec> {
        let nonlinearity = match self.big_q {
            Some(big_q) => NonlinearitySpec::double_power(self.q, big_q),
            None => NonlinearitySpec::pure_power(self.q),
        };
        let h = match (self.h.kind, self.h.params.as_slice()) {
            (WeightType::Const, &[h0]) => WeightFamily::Const { h0 },
            (WeightType::Rational, &[h0, h_inf, r_c, m]) => {
                WeightFamily::Rational { h0, h_inf, r_c, m }
            }
            (kind, params) => {
                return Err(Error::InvalidArgument(format!(
                    "weight {kind:?} expects {} parameters, got {}",
                    if kind == WeightType::Const { 1 } else { 4 },
                    params.len()
                )))
            }
        };
        Ok(ProblemSpec {
            n: self.n,
            p: self.p,
            nonlinearity,
            weight: WeightSpec {
                delta: self.delta,
                h,
                varpi: self.varpi,
            },
            oracle_mode: self.oracle_mode,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShootParams {
    pub d: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SequenceParams {
    pub k_max: usize,
    /// Absolute bracket width; `null` means `1e-12 · min(d+, d-)`.
    pub tol_d: Option<f64>,
}

impl Default for SequenceParams {
    fn default() -> Self {
        SequenceParams {
            k_max: 2,
            tol_d: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManifoldParams {
    pub kind: ManifoldKind,
    pub tau: f64,
    /// Parameter range; `null` picks `[1e-3 d±, (1 - 1e-3) d±]` for unstable and `[1e-3, 1e4]`
    /// for stable slices.
    pub param_min: Option<f64>,
    pub param_max: Option<f64>,
    pub count: usize,
    /// Highest winding index searched for intersections of unstable slices.
    pub k_max: usize,
}

impl Default for ManifoldParams {
    fn default() -> Self {
        ManifoldParams {
            kind: ManifoldKind::UnstablePlus,
            tau: 2.0,
            param_min: None,
            param_max: None,
            count: 300,
            k_max: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PortraitParams {
    /// `xmin:xmax:nx,ymin:ymax:ny`.
    pub grid: String,
    /// Log-radius at which the field is frozen.
    pub t: f64,
}

impl Default for PortraitParams {
    fn default() -> Self {
        PortraitParams {
            grid: "-1.5:1.5:31,-1.5:1.5:31".into(),
            t: 0.0,
        }
    }
}

/// Everything a CLI run reads from its configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub policy: StopPolicy,
    pub trace: TraceOptions,
    pub shoot: ShootParams,
    pub sequence: SequenceParams,
    pub manifold: ManifoldParams,
    pub portrait: PortraitParams,
    /// Concurrent shots; 0 uses every core.
    pub jobs: usize,
    pub output_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: ProblemConfig::config_a(),
            policy: StopPolicy::default(),
            trace: TraceOptions::default(),
            shoot: ShootParams::default(),
            sequence: SequenceParams::default(),
            manifold: ManifoldParams::default(),
            portrait: PortraitParams::default(),
            jobs: 0,
            output_dir: "radshoot-out".into(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }
}
