//! Problem data for `Δp u + k(|x|) f(u) = 0`: the nonlinearity `f(u) = u|u|^(q-2) b(u)`,
//! the weight `k(r) = h(r) r^δ`, and the exponents of the log-radius transformation.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Clause, Error, Result};
use crate::fowler::TruncatedNonlinearity;
use crate::num::{adaptive_simpson, spow};

/// Re-entrant scalar function handle.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const B_ZERO_TOL_BUILTIN: f64 = 1e-12;
const B_ZERO_TOL_CUSTOM: f64 = 1e-9;
const SAMPLE_R_MIN: f64 = 1e-8;
const SAMPLE_R_MAX: f64 = 1e8;
const ORACLE_CRITICAL_TOL: f64 = 1e-12;

#[derive(Clone)]
pub enum NonlinearityFamily {
    /// `f(u) = u|u|^(q-2) - u|u|^(Q-2)`, `b(u) = 1 - |u|^(Q-q)`, `d± = 1`.
    DoublePower { big_q: f64 },
    /// `f(u) = u|u|^(q-2)`; untruncated, oracle mode only.
    PurePower,
    /// User supplied `b`.
    Custom { b: ScalarFn },
}

impl fmt::Debug for NonlinearityFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonlinearityFamily::DoublePower { big_q } => write!(f, "DoublePower {{ Q: {big_q} }}"),
            NonlinearityFamily::PurePower => f.write_str("PurePower"),
            NonlinearityFamily::Custom { .. } => f.write_str("Custom"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NonlinearitySpec {
    pub q: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    pub family: NonlinearityFamily,
}

impl NonlinearitySpec {
    pub fn double_power(q: f64, big_q: f64) -> Self {
        NonlinearitySpec {
            q,
            d_plus: 1.0,
            d_minus: 1.0,
            family: NonlinearityFamily::DoublePower { big_q },
        }
    }

    pub fn pure_power(q: f64) -> Self {
        NonlinearitySpec {
            q,
            d_plus: f64::INFINITY,
            d_minus: f64::INFINITY,
            family: NonlinearityFamily::PurePower,
        }
    }

    pub fn custom(
        q: f64,
        d_plus: f64,
        d_minus: f64,
        b: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        NonlinearitySpec {
            q,
            d_plus,
            d_minus,
            family: NonlinearityFamily::Custom { b: Arc::new(b) },
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self.family, NonlinearityFamily::Custom { .. })
    }

    #[inline]
    pub fn b(&self, u: f64) -> f64 {
        match &self.family {
            NonlinearityFamily::DoublePower { big_q } => 1.0 - u.abs().powf(big_q - self.q),
            NonlinearityFamily::PurePower => 1.0,
            NonlinearityFamily::Custom { b } => b(u),
        }
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        spow(u, self.q - 1.0) * self.b(u)
    }

    pub fn df(&self, u: f64) -> f64 {
        let q = self.q;
        match &self.family {
            NonlinearityFamily::DoublePower { big_q } => {
                (q - 1.0) * u.abs().powf(q - 2.0) - (big_q - 1.0) * u.abs().powf(big_q - 2.0)
            }
            NonlinearityFamily::PurePower => (q - 1.0) * u.abs().powf(q - 2.0),
            NonlinearityFamily::Custom { b } => {
                let h = 1e-6 * u.abs().max(1.0);
                let db = (b(u + h) - b(u - h)) / (2.0 * h);
                (q - 1.0) * u.abs().powf(q - 2.0) * b(u) + spow(u, q - 1.0) * db
            }
        }
    }

    /// `F(u) / |u|^q` with `F(u) = ∫₀ᵘ f`, for `u` in `[-d-, d+]`; equals `b(0)/q` at 0.
    pub fn primitive_ratio(&self, u: f64) -> Result<f64> {
        let q = self.q;
        match &self.family {
            NonlinearityFamily::DoublePower { big_q } => {
                Ok(1.0 / q - u.abs().powf(big_q - q) / big_q)
            }
            NonlinearityFamily::PurePower => Ok(1.0 / q),
            NonlinearityFamily::Custom { b } => {
                // F(u) = |u|^q ∫₀¹ s^(q-1) b(u s) ds
                adaptive_simpson(|s| s.powf(q - 1.0) * b(u * s), 0.0, 1.0, 1e-12)
            }
        }
    }

    pub fn primitive(&self, u: f64) -> Result<f64> {
        Ok(u.abs().powf(self.q) * self.primitive_ratio(u)?)
    }
}

#[derive(Clone)]
pub enum WeightFamily {
    /// `h ≡ h0`.
    Const { h0: f64 },
    /// `h(r) = (h0 + h_inf s^m) / (1 + s^m)` with `s = r / r_c`.
    Rational {
        h0: f64,
        h_inf: f64,
        r_c: f64,
        m: f64,
    },
    /// User supplied `h` with its declared limits and the (K) decay rate.
    Custom {
        h: ScalarFn,
        h0: f64,
        h_inf: f64,
        varpi_k: f64,
    },
}

impl fmt::Debug for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFamily::Const { h0 } => write!(f, "Const {{ h0: {h0} }}"),
            WeightFamily::Rational { h0, h_inf, r_c, m } => write!(
                f,
                "Rational {{ h0: {h0}, h_inf: {h_inf}, r_c: {r_c}, m: {m} }}"
            ),
            WeightFamily::Custom { h0, h_inf, .. } => {
                write!(f, "Custom {{ h0: {h0}, h_inf: {h_inf} }}")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct WeightSpec {
    pub delta: f64,
    pub h: WeightFamily,
    /// Decay-rate constant; `None` selects `min(varpi_K, alpha_l / 2)`.
    pub varpi: Option<f64>,
}

impl WeightSpec {
    pub fn constant(h0: f64, delta: f64) -> Self {
        WeightSpec {
            delta,
            h: WeightFamily::Const { h0 },
            varpi: None,
        }
    }

    #[inline]
    pub fn h(&self, r: f64) -> f64 {
        match &self.h {
            WeightFamily::Const { h0 } => *h0,
            WeightFamily::Rational { h0, h_inf, r_c, m } => {
                let s = (r / r_c).powf(*m);
                if s.is_infinite() {
                    *h_inf
                } else {
                    (h0 + h_inf * s) / (1.0 + s)
                }
            }
            WeightFamily::Custom { h, .. } => h(r),
        }
    }

    pub fn dh(&self, r: f64) -> f64 {
        match &self.h {
            WeightFamily::Const { .. } => 0.0,
            WeightFamily::Rational { h0, h_inf, r_c, m } => {
                let s = (r / r_c).powf(*m);
                if s.is_infinite() {
                    return 0.0;
                }
                (h_inf - h0) * m * s / (r * (1.0 + s) * (1.0 + s))
            }
            WeightFamily::Custom { h, .. } => {
                let step = 1e-6 * r;
                (h(r + step) - h(r - step)) / (2.0 * step)
            }
        }
    }

    pub fn h0(&self) -> f64 {
        match &self.h {
            WeightFamily::Const { h0 } => *h0,
            WeightFamily::Rational { h0, .. } | WeightFamily::Custom { h0, .. } => *h0,
        }
    }

    pub fn h_inf(&self) -> f64 {
        match &self.h {
            WeightFamily::Const { h0 } => *h0,
            WeightFamily::Rational { h_inf, .. } | WeightFamily::Custom { h_inf, .. } => *h_inf,
        }
    }

    /// Decay rate for which `h'(r) r^(1+varpi) -> 0` is guaranteed by the family.
    pub fn varpi_k(&self) -> f64 {
        match &self.h {
            WeightFamily::Const { .. } => f64::INFINITY,
            WeightFamily::Rational { m, .. } => 0.5 * m,
            WeightFamily::Custom { varpi_k, .. } => *varpi_k,
        }
    }

    /// `k(r) = h(r) r^δ`.
    #[inline]
    pub fn k(&self, r: f64) -> f64 {
        self.h(r) * r.powf(self.delta)
    }
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub n: u32,
    pub p: f64,
    pub nonlinearity: NonlinearitySpec,
    pub weight: WeightSpec,
    /// Admits `l = p*` and untruncated pure powers; the Theorem-1 pipeline refuses such problems.
    pub oracle_mode: bool,
}

impl ProblemSpec {
    /// `n = 3, p = 2, f(u) = u|u|^5 (1 - u^2)`, `h ≡ 1`, `δ = 0`.
    pub fn config_a() -> Self {
        ProblemSpec {
            n: 3,
            p: 2.0,
            nonlinearity: NonlinearitySpec::double_power(7.0, 9.0),
            weight: WeightSpec::constant(1.0, 0.0),
            oracle_mode: false,
        }
    }

    /// Critical oracle: `n = 4, p = 2, f = u^3`, `h ≡ 1`, `δ = 0`.
    pub fn oracle_b() -> Self {
        ProblemSpec {
            n: 4,
            p: 2.0,
            nonlinearity: NonlinearitySpec::pure_power(4.0),
            weight: WeightSpec::constant(1.0, 0.0),
            oracle_mode: true,
        }
    }

    /// Index `l = p (q + δ) / (p + δ)`.
    pub fn index(&self) -> f64 {
        let (p, q, d) = (self.p, self.nonlinearity.q, self.weight.delta);
        p * (q + d) / (p + d)
    }

    /// Whether the truncated nonlinearity is in force.
    pub fn truncated(&self) -> bool {
        self.nonlinearity.d_plus.is_finite() && self.nonlinearity.d_minus.is_finite()
    }
}

/// Exponents attached to a transformation index `l`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentSet {
    pub n: f64,
    pub p: f64,
    pub l: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub p_serrin: f64,
    pub p_sobolev: f64,
    /// `(n - p) / (p - 1)`: decay rate of `u` for fast-decay solutions.
    pub fast_decay_rate: f64,
    /// `(n - 1) / (p - 1)`: decay rate of `u'`.
    pub fast_decay_slope_rate: f64,
}

impl ExponentSet {
    /// Exponents for an arbitrary index `l > p`; no hypothesis checks.
    pub fn for_index(n: f64, p: f64, l: f64) -> Self {
        let alpha = p / (l - p);
        let beta = (alpha + 1.0) * (p - 1.0);
        ExponentSet {
            n,
            p,
            l,
            alpha,
            beta,
            gamma: beta - (n - 1.0),
            p_serrin: p * (n - 1.0) / (n - p),
            p_sobolev: n * p / (n - p),
            fast_decay_rate: (n - p) / (p - 1.0),
            fast_decay_slope_rate: (n - 1.0) / (p - 1.0),
        }
    }

    /// `1/(p-1)`, the exponent of the momentum term in the field.
    #[inline]
    pub fn momentum_exponent(&self) -> f64 {
        1.0 / (self.p - 1.0)
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::spec(Clause::NonFinite, format!("{name} = {v}")))
    }
}

fn validate_nonlinearity(spec: &ProblemSpec) -> Result<()> {
    let nl = &spec.nonlinearity;
    if nl.q <= 2.0 {
        return Err(Error::spec(Clause::GrowthExponent, format!("q = {}", nl.q)));
    }
    match &nl.family {
        NonlinearityFamily::DoublePower { big_q } => {
            check_finite("Q", *big_q)?;
            if *big_q <= nl.q {
                return Err(Error::spec(
                    Clause::SecondExponent,
                    format!("Q = {big_q} <= q = {}", nl.q),
                ));
            }
        }
        NonlinearityFamily::PurePower => {
            if !spec.oracle_mode {
                return Err(Error::spec(
                    Clause::PurePowerOutsideOracle,
                    "b ≡ 1 never vanishes",
                ));
            }
            return Ok(());
        }
        NonlinearityFamily::Custom { .. } => {}
    }
    let (dp, dm) = (nl.d_plus, nl.d_minus);
    if !(dp.is_finite() && dm.is_finite() && dp > 0.0 && dm > 0.0) {
        return Err(Error::spec(
            Clause::PositivityBounds,
            format!("d+ = {dp}, d- = {dm}"),
        ));
    }
    const SAMPLES: usize = 400;
    for i in 1..SAMPLES {
        let u = -dm + (dp + dm) * i as f64 / SAMPLES as f64;
        let b = nl.b(u);
        if !(b > 0.0) {
            return Err(Error::spec(Clause::BNotPositive, format!("b({u}) = {b}")));
        }
    }
    let tol = if nl.is_builtin() {
        B_ZERO_TOL_BUILTIN
    } else {
        B_ZERO_TOL_CUSTOM
    };
    let (bp, bm) = (nl.b(dp), nl.b(-dm));
    if bp.abs() > tol || bm.abs() > tol {
        return Err(Error::spec(
            Clause::BNotVanishing,
            format!("b(d+) = {bp}, b(-d-) = {bm}"),
        ));
    }
    Ok(())
}

fn validate_weight(spec: &ProblemSpec) -> Result<()> {
    let w = &spec.weight;
    if w.delta <= -spec.p {
        return Err(Error::spec(
            Clause::WeightExponent,
            format!("delta = {} <= -p = {}", w.delta, -spec.p),
        ));
    }
    let (h0, hinf) = (w.h0(), w.h_inf());
    if !(h0.is_finite() && hinf.is_finite() && h0 > 0.0 && hinf > 0.0) {
        return Err(Error::spec(
            Clause::WeightLimits,
            format!("h0 = {h0}, h_inf = {hinf}"),
        ));
    }
    if let WeightFamily::Rational { r_c, m, .. } = &w.h {
        if !(*r_c > 0.0 && r_c.is_finite()) {
            return Err(Error::spec(
                Clause::WeightNotPositive,
                format!("r_c = {r_c}"),
            ));
        }
        if !(*m > 0.0 && m.is_finite()) {
            return Err(Error::spec(
                Clause::WeightDerivativeAtInfinity,
                format!("m = {m} gives no decay of h'"),
            ));
        }
    }
    let grid = crate::num::logspace(SAMPLE_R_MIN, SAMPLE_R_MAX, 161);
    for &r in &grid {
        let h = w.h(r);
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::spec(
                Clause::WeightNotPositive,
                format!("h({r}) = {h}"),
            ));
        }
    }
    // Declared limits must match the sampled ends.
    let (hl, hr) = (w.h(SAMPLE_R_MIN), w.h(SAMPLE_R_MAX));
    if (hl - h0).abs() > 1e-3 * h0 || (hr - hinf).abs() > 1e-3 * hinf {
        return Err(Error::spec(
            Clause::WeightLimits,
            format!("h(1e-8) = {hl} vs h0 = {h0}; h(1e8) = {hr} vs h_inf = {hinf}"),
        ));
    }
    // limsup h'(r) r < inf near 0: sampled values must stay bounded and not grow.
    let small: Vec<f64> = grid
        .iter()
        .filter(|&&r| r <= 1e-2)
        .map(|&r| (w.dh(r) * r).abs())
        .collect();
    if small.iter().any(|v| !v.is_finite() || *v > 1e6)
        || small[0] > 10.0 * small[small.len() / 2] + 1e-6
    {
        return Err(Error::spec(
            Clause::WeightDerivativeAtZero,
            "h'(r) r grows as r -> 0",
        ));
    }
    let vk = w.varpi_k();
    if !(vk > 0.0) {
        return Err(Error::spec(
            Clause::WeightDerivativeAtInfinity,
            format!("varpi_K = {vk}"),
        ));
    }
    let probe = if vk.is_finite() { vk } else { 1.0 };
    let tail: Vec<f64> = grid
        .iter()
        .filter(|&&r| r >= 1e4)
        .map(|&r| (w.dh(r) * r.powf(1.0 + probe)).abs())
        .collect();
    let last = *tail.last().unwrap();
    if !last.is_finite() || last > 1e-6 * (1.0 + tail[0]) && last >= tail[0] {
        return Err(Error::spec(
            Clause::WeightDerivativeAtInfinity,
            format!("h'(r) r^(1+varpi) = {last} at r = 1e8"),
        ));
    }
    Ok(())
}

/// Validates the spec and returns its exponents.
pub fn derive_exponents(spec: &ProblemSpec) -> Result<ExponentSet> {
    check_finite("p", spec.p)?;
    check_finite("q", spec.nonlinearity.q)?;
    check_finite("delta", spec.weight.delta)?;
    if spec.n < 2 {
        return Err(Error::spec(
            Clause::DimensionTooSmall,
            format!("n = {}", spec.n),
        ));
    }
    let p = spec.p;
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::spec(Clause::PowerOutOfRange, format!("p = {p}")));
    }
    let n = spec.n as f64;
    if n <= p {
        return Err(Error::spec(
            Clause::DimensionNotAbovePower,
            format!("n = {n}, p = {p}"),
        ));
    }
    validate_nonlinearity(spec)?;
    validate_weight(spec)?;
    let l = spec.index();
    let exps = ExponentSet::for_index(n, p, l);
    let crit = exps.p_sobolev;
    if spec.oracle_mode {
        if (l - crit).abs() > ORACLE_CRITICAL_TOL * crit {
            return Err(Error::spec(
                Clause::OracleNotCritical,
                format!("l = {l}, p* = {crit}"),
            ));
        }
    } else if l <= crit {
        return Err(Error::spec(
            Clause::NotSupercritical,
            format!("l = {l} <= p* = {crit}"),
        ));
    }
    Ok(exps)
}

fn effective_varpi(spec: &ProblemSpec, exps: &ExponentSet) -> Result<f64> {
    match spec.weight.varpi {
        Some(v) => {
            if !(v > 0.0 && v < exps.alpha) {
                return Err(Error::spec(
                    Clause::DecayRate,
                    format!("varpi = {v}, alpha_l = {}", exps.alpha),
                ));
            }
            Ok(v)
        }
        None => Ok(spec.weight.varpi_k().min(0.5 * exps.alpha)),
    }
}

/// Selects `P+` or `P-`, or the positive or negative branch of an object.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(v: f64) -> Sign {
        if v < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn dist(&self, x: f64, y: f64) -> f64 {
        (self.x - x).hypot(self.y - y)
    }
}

/// Nontrivial equilibria of the limiting autonomous system.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CriticalPoints {
    pub plus: PlanePoint,
    pub minus: PlanePoint,
    /// Polar angle of `P+`, in `(-π/2, 0)`.
    pub phi_plus: f64,
    /// `phi_plus - π`.
    pub phi_minus: f64,
    pub rho_plus: f64,
    pub rho_minus: f64,
}

impl CriticalPoints {
    pub fn point(&self, s: Sign) -> PlanePoint {
        match s {
            Sign::Plus => self.plus,
            Sign::Minus => self.minus,
        }
    }
}

/// `P±` of `ẋ = αx + y|y|^((2-p)/(p-1))`, `ẏ = γy - h_inf b(0) x|x|^(q-2)`.
pub fn critical_points(spec: &ProblemSpec, exps: &ExponentSet) -> Result<CriticalPoints> {
    let c = spec.weight.h_inf() * spec.nonlinearity.b(0.0);
    if !(c > 0.0) {
        return Err(Error::DegenerateLimit(c));
    }
    let (p, q) = (spec.p, spec.nonlinearity.q);
    let px = (exps.alpha.powf(p - 1.0) * exps.gamma.abs() / c).powf(1.0 / (q - p));
    let py = -(exps.alpha * px).powf(p - 1.0);
    let rho = px.hypot(py);
    let phi_plus = py.atan2(px);
    Ok(CriticalPoints {
        plus: PlanePoint { x: px, y: py },
        minus: PlanePoint { x: -px, y: -py },
        phi_plus,
        phi_minus: phi_plus - PI,
        rho_plus: rho,
        rho_minus: rho,
    })
}

/// A validated problem with everything derived from it.
#[derive(Clone, Debug)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub exps: ExponentSet,
    pub varpi: f64,
    pub critical: CriticalPoints,
    pub truncation: Option<TruncatedNonlinearity>,
}

impl Problem {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        let exps = derive_exponents(&spec)?;
        let varpi = effective_varpi(&spec, &exps)?;
        let critical = critical_points(&spec, &exps)?;
        let truncation = spec
            .truncated()
            .then(|| TruncatedNonlinearity::new(spec.nonlinearity.clone()));
        Ok(Problem {
            spec,
            exps,
            varpi,
            critical,
            truncation,
        })
    }

    /// Truncated `f̄`, or `f` when no truncation applies.
    #[inline]
    pub fn f_bar(&self, u: f64) -> f64 {
        match &self.truncation {
            Some(t) => t.f(u),
            None => self.spec.nonlinearity.f(u),
        }
    }

    pub fn d_plus(&self) -> f64 {
        self.spec.nonlinearity.d_plus
    }

    pub fn d_minus(&self) -> f64 {
        self.spec.nonlinearity.d_minus
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn config_a_exponents() {
        let e = derive_exponents(&ProblemSpec::config_a()).unwrap();
        assert_relative_eq!(e.l, 7.0, epsilon = 1e-15);
        assert_relative_eq!(e.alpha, 0.4, epsilon = 1e-15);
        assert_relative_eq!(e.beta, 1.4, epsilon = 1e-15);
        assert_relative_eq!(e.gamma, -0.6, epsilon = 1e-15);
        assert_relative_eq!(e.p_serrin, 4.0, epsilon = 1e-15);
        assert_relative_eq!(e.p_sobolev, 6.0, epsilon = 1e-15);
    }

    #[test]
    fn critical_oracle_exponents() {
        let e = derive_exponents(&ProblemSpec::oracle_b()).unwrap();
        assert_eq!(e.l, 4.0);
        assert_eq!(e.alpha, 1.0);
        assert_eq!(e.beta, 2.0);
        assert_eq!(e.gamma, -1.0);
        assert_eq!(e.alpha + e.gamma, 0.0);
    }

    #[test]
    fn subcritical_index_is_rejected() {
        let mut s = ProblemSpec::config_a();
        s.nonlinearity = NonlinearitySpec::double_power(5.0, 9.0);
        s.weight.delta = 1.0;
        assert_relative_eq!(s.index(), 4.0, epsilon = 1e-15);
        let err = derive_exponents(&s).unwrap_err();
        assert_eq!(err.clause(), Some(Clause::NotSupercritical));
    }

    #[test]
    fn oracle_mode_refuses_noncritical() {
        let mut s = ProblemSpec::oracle_b();
        s.nonlinearity = NonlinearitySpec::pure_power(5.0);
        assert_eq!(
            derive_exponents(&s).unwrap_err().clause(),
            Some(Clause::OracleNotCritical)
        );
    }

    #[test]
    fn critical_points_config_a() {
        let s = ProblemSpec::config_a();
        let e = derive_exponents(&s).unwrap();
        let cp = critical_points(&s, &e).unwrap();
        // independent root of |x|^5 = α|γ| = 0.24
        let root = crate::num::brent(|x| x.powi(5) - 0.24, 0.1, 2.0, 1e-15).unwrap();
        assert_relative_eq!(cp.plus.x, root, max_relative = 1e-13);
        assert_relative_eq!(cp.plus.x, 0.751696, epsilon = 1e-6);
        assert_relative_eq!(cp.plus.y, -0.300679, epsilon = 1e-6);
        assert_eq!(cp.minus.x, -cp.plus.x);
        assert_eq!(cp.minus.y, -cp.plus.y);
        assert!(cp.phi_plus > -PI / 2.0 && cp.phi_plus < 0.0);
        assert_relative_eq!(cp.phi_minus, cp.phi_plus - PI);
    }

    #[test]
    fn critical_points_oracle_b() {
        let s = ProblemSpec::oracle_b();
        let e = derive_exponents(&s).unwrap();
        let cp = critical_points(&s, &e).unwrap();
        assert_relative_eq!(cp.plus.x, 1.0, epsilon = 1e-15);
        assert_relative_eq!(cp.plus.y, -1.0, epsilon = 1e-15);
        let residual = cp.plus.x.powi(3) - cp.plus.x;
        assert!(residual.abs() < 1e-15);
    }

    #[test]
    fn varpi_default_and_bounds() {
        let pb = Problem::new(ProblemSpec::config_a()).unwrap();
        assert_relative_eq!(pb.varpi, 0.2, epsilon = 1e-15);
        let mut s = ProblemSpec::config_a();
        s.weight.varpi = Some(0.5);
        assert_eq!(
            Problem::new(s).unwrap_err().clause(),
            Some(Clause::DecayRate)
        );
    }

    #[test]
    fn rational_weight_passes_sampling() {
        let mut s = ProblemSpec::config_a();
        s.weight.h = WeightFamily::Rational {
            h0: 1.0,
            h_inf: 2.0,
            r_c: 1.0,
            m: 2.0,
        };
        let pb = Problem::new(s).unwrap();
        assert_relative_eq!(pb.varpi, 0.2, epsilon = 1e-15);
        assert_relative_eq!(pb.spec.weight.h(1.0), 1.5);
    }

    #[test]
    fn custom_b_without_zero_is_rejected() {
        let mut s = ProblemSpec::config_a();
        s.nonlinearity = NonlinearitySpec::custom(7.0, 1.0, 1.0, |u| 1.1 - u * u);
        assert_eq!(
            derive_exponents(&s).unwrap_err().clause(),
            Some(Clause::BNotVanishing)
        );
    }

    #[test]
    fn custom_primitive_matches_closed_form() {
        let c = NonlinearitySpec::custom(7.0, 1.0, 1.0, |u| 1.0 - u * u);
        let d = NonlinearitySpec::double_power(7.0, 9.0);
        for &u in &[-0.9, -0.3, 1e-3, 0.5, 1.0] {
            let a = c.primitive(u).unwrap();
            let b = d.primitive(u).unwrap();
            assert!((a - b).abs() < 1e-12, "{u}: {a} vs {b}");
        }
    }
}
