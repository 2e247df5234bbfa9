//! Log-radius transformation `x = u r^α`, `y = u'|u'|^(p-2) r^β`, `r = e^t`, the
//! transformed nonlinearity `g_l`, its primitive `G_l`, and the energy functions.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::num::spow;
use crate::problem::{ExponentSet, NonlinearitySpec, Problem};

/// Point `(x, y)` of the planar system at log-radius `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl PhaseState {
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        PhaseState { t, x, y }
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn angle(&self) -> f64 {
        self.y.atan2(self.x)
    }
}

/// `(r, u(r), u'(r))` of the radial equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialState {
    pub r: f64,
    pub u: f64,
    pub du: f64,
}

pub fn to_fowler(s: RadialState, exps: &ExponentSet) -> PhaseState {
    PhaseState {
        t: s.r.ln(),
        x: s.u * s.r.powf(exps.alpha),
        y: spow(s.du, exps.p - 1.0) * s.r.powf(exps.beta),
    }
}

pub fn from_fowler(ps: PhaseState, exps: &ExponentSet) -> RadialState {
    let r = ps.t.exp();
    RadialState {
        r,
        u: ps.x * (-exps.alpha * ps.t).exp(),
        du: spow(ps.y * (-exps.beta * ps.t).exp(), exps.momentum_exponent()),
    }
}

/// Re-expresses a state of index `from` in the variables of index `to`.
pub fn rescale(ps: PhaseState, from: &ExponentSet, to: &ExponentSet) -> PhaseState {
    to_fowler(from_fowler(ps, from), to)
}

/// `σ ↦ slope σ (1 - σ/w)²` on `[0, w]`, zero beyond.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Bridge {
    pub slope: f64,
    pub width: f64,
}

impl Bridge {
    fn new(slope: f64, f_max: f64) -> Self {
        let slope = slope.min(0.0);
        // peak of |slope| σ (1-σ/w)² is |slope| w 4/27
        let width = if slope == 0.0 {
            1.0
        } else {
            (27.0 * f_max / (4.0 * slope.abs())).min(1.0)
        };
        Bridge { slope, width }
    }

    #[inline]
    fn value(&self, s: f64) -> f64 {
        if s >= self.width {
            0.0
        } else {
            let a = 1.0 - s / self.width;
            self.slope * s * a * a
        }
    }

    #[inline]
    fn derivative(&self, s: f64) -> f64 {
        if s >= self.width {
            0.0
        } else {
            let w = self.width;
            self.slope * (1.0 - s / w) * (1.0 - 3.0 * s / w)
        }
    }

    fn integral(&self, s: f64) -> f64 {
        let w = self.width;
        let s = s.min(w);
        self.slope * (s * s / 2.0 - 2.0 * s.powi(3) / (3.0 * w) + s.powi(4) / (4.0 * w * w))
    }
}

/// `f̄`: equal to `f` on `[-d-, d+]`, a non-positive (resp. non-negative) C¹ bridge on
/// `(d+, d+ + 1)` (resp. `(-d- - 1, -d-)`), zero outside.
#[derive(Clone, Debug)]
pub struct TruncatedNonlinearity {
    pub base: NonlinearitySpec,
    pub plus: Bridge,
    pub minus: Bridge,
    /// `max |f|` on `[-d-, d+]`.
    pub f_max: f64,
}

impl TruncatedNonlinearity {
    pub fn new(base: NonlinearitySpec) -> Self {
        let (dp, dm) = (base.d_plus, base.d_minus);
        const N: usize = 20_000;
        let f_max = (0..=N)
            .map(|i| base.f(-dm + (dp + dm) * i as f64 / N as f64).abs())
            .fold(0.0, f64::max);
        // the minus bridge is written in σ = -d- - u, so its slope in σ is f'(-d-)
        let plus = Bridge::new(base.df(dp), f_max);
        let minus = Bridge::new(base.df(-dm), f_max);
        TruncatedNonlinearity {
            base,
            plus,
            minus,
            f_max,
        }
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        let (dp, dm) = (self.base.d_plus, self.base.d_minus);
        if u > dp {
            self.plus.value(u - dp)
        } else if u < -dm {
            -self.minus.value(-dm - u)
        } else {
            self.base.f(u)
        }
    }

    pub fn df(&self, u: f64) -> f64 {
        let (dp, dm) = (self.base.d_plus, self.base.d_minus);
        if u > dp {
            self.plus.derivative(u - dp)
        } else if u < -dm {
            self.minus.derivative(-dm - u)
        } else {
            self.base.df(u)
        }
    }

    /// `f̄(u) / (u|u|^(q-2))`.
    #[inline]
    pub fn b_bar(&self, u: f64) -> f64 {
        let (dp, dm) = (self.base.d_plus, self.base.d_minus);
        if u > dp || u < -dm {
            self.f(u) / spow(u, self.base.q - 1.0)
        } else {
            self.base.b(u)
        }
    }

    pub fn primitive(&self, u: f64) -> Result<f64> {
        let (dp, dm) = (self.base.d_plus, self.base.d_minus);
        if u > dp {
            Ok(self.base.primitive(dp)? + self.plus.integral(u - dp))
        } else if u < -dm {
            Ok(self.base.primitive(-dm)? + self.minus.integral(-dm - u))
        } else {
            self.base.primitive(u)
        }
    }

    /// `F̄(u) / |u|^q`.
    pub fn primitive_ratio(&self, u: f64) -> Result<f64> {
        let (dp, dm) = (self.base.d_plus, self.base.d_minus);
        if u > dp || u < -dm {
            Ok(self.primitive(u)? / u.abs().powf(self.base.q))
        } else {
            self.base.primitive_ratio(u)
        }
    }

    /// Largest one-sided value or slope jump over the four junctions.
    pub fn junction_mismatch(&self) -> f64 {
        let (dp, dm) = (self.base.d_plus, self.base.d_minus);
        let (wp, wm) = (self.plus.width, self.minus.width);
        let jumps = [
            (self.base.f(dp) - self.plus.value(0.0)).abs(),
            (self.base.df(dp) - self.plus.derivative(0.0)).abs(),
            self.plus.value(wp).abs() + self.plus.derivative(wp).abs(),
            (self.base.f(-dm) + self.minus.value(0.0)).abs(),
            (self.base.df(-dm) - self.minus.derivative(0.0)).abs(),
            self.minus.value(wm).abs() + self.minus.derivative(wm).abs(),
        ];
        jumps.into_iter().fold(0.0, f64::max)
    }
}

/// Value of `g_l` and of its x-primitive `G_l`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GValue {
    pub g: f64,
    pub big_g: f64,
}

fn b_bar(pb: &Problem, u: f64, truncated: bool) -> f64 {
    match (&pb.truncation, truncated) {
        (Some(t), true) => t.b_bar(u),
        _ => pb.spec.nonlinearity.b(u),
    }
}

fn primitive_ratio(pb: &Problem, u: f64, truncated: bool) -> Result<f64> {
    match (&pb.truncation, truncated) {
        (Some(t), true) => t.primitive_ratio(u),
        _ => pb.spec.nonlinearity.primitive_ratio(u),
    }
}

/// `g_l(x,t) = k(e^t) f̄(x e^{-α t}) e^{α(l-1)t}` and `G_l(x,t) = ∫₀ˣ g_l`, for any index `l`.
///
/// Both are written as `h(e^t) x|x|^(q-2) b̄(u) e^{c t}` (resp. `h |x|^q F̄(u)/|u|^q e^{c' t}`)
/// so that no exponential overflows for large `|t|`; `c = c' = 0` at the natural index.
pub fn g_eval(x: f64, t: f64, pb: &Problem, exps: &ExponentSet, truncated: bool) -> Result<GValue> {
    let (p, q, delta) = (exps.p, pb.spec.nonlinearity.q, pb.spec.weight.delta);
    let a = exps.alpha;
    let u = x * (-a * t).exp();
    let h = pb.spec.weight.h(t.exp());
    let cg = delta + a * (exps.l - q);
    let cbig = delta + p - a * (q - p);
    let g = h * spow(x, q - 1.0) * b_bar(pb, u, truncated) * (cg * t).exp();
    let big_g = h * x.abs().powf(q) * primitive_ratio(pb, u, truncated)? * (cbig * t).exp();
    Ok(GValue { g, big_g })
}

impl Problem {
    /// `g_l(x,t)` at the natural index, with the problem's truncation.
    #[inline]
    pub fn g(&self, x: f64, t: f64) -> f64 {
        let q = self.spec.nonlinearity.q;
        let u = x * (-self.exps.alpha * t).exp();
        let h = match &self.spec.weight.h {
            crate::problem::WeightFamily::Const { h0 } => *h0,
            _ => self.spec.weight.h(t.exp()),
        };
        let b = match &self.truncation {
            Some(tr) => tr.b_bar(u),
            None => self.spec.nonlinearity.b(u),
        };
        h * spow(x, q - 1.0) * b
    }

    /// `G_l(x,t)` at the natural index, with the problem's truncation.
    pub fn big_g(&self, x: f64, t: f64) -> Result<f64> {
        Ok(g_eval(x, t, self, &self.exps, self.truncation.is_some())?.big_g)
    }
}

/// `H_l` and the Pohozaev value `H_l e^{-(α+γ)t}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Energy {
    pub h_l: f64,
    pub pohozaev: f64,
}

/// `H_l(x,y,t) = (n-p)/p xy + (p-1)/p |y|^(p/(p-1)) + G_l(x,t)` at an arbitrary index.
pub fn hamiltonian_at(ps: PhaseState, pb: &Problem, exps: &ExponentSet) -> Result<f64> {
    let (n, p) = (exps.n, exps.p);
    let big_g = g_eval(ps.x, ps.t, pb, exps, pb.truncation.is_some())?.big_g;
    Ok((n - p) / p * ps.x * ps.y + (p - 1.0) / p * ps.y.abs().powf(p / (p - 1.0)) + big_g)
}

pub fn energy(ps: PhaseState, pb: &Problem) -> Result<Energy> {
    let e = &pb.exps;
    let h_l = hamiltonian_at(ps, pb, e)?;
    Ok(Energy {
        h_l,
        pohozaev: h_l * (-(e.alpha + e.gamma) * ps.t).exp(),
    })
}

/// `𝒫(u,u',r) = rⁿ [ (n-p)/p u u'|u'|^(p-2)/r + (p-1)/p |u'|^p + k(r) F̄(u) ]`.
pub fn pohozaev_radial(s: RadialState, pb: &Problem) -> Result<f64> {
    let n = pb.exps.n;
    let p = pb.spec.p;
    let big_f = match &pb.truncation {
        Some(t) => t.primitive(s.u)?,
        None => pb.spec.nonlinearity.primitive(s.u)?,
    };
    let k = pb.spec.weight.k(s.r);
    Ok(s.r.powf(n)
        * ((n - p) / p * s.u * spow(s.du, p - 1.0) / s.r
            + (p - 1.0) / p * s.du.abs().powf(p)
            + k * big_f))
}

/// `𝒢_l(x) = G_l(x,t) / (x|x|^(p-1))`.
pub fn curly_g(x: f64, t: f64, pb: &Problem, truncated: bool) -> Result<f64> {
    let big_g = g_eval(x, t, pb, &pb.exps, truncated)?.big_g;
    Ok(big_g / spow(x, pb.spec.p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemSpec;
    use approx::assert_relative_eq;

    fn config_a() -> Problem {
        Problem::new(ProblemSpec::config_a()).unwrap()
    }

    #[test]
    fn fowler_images_at_unit_radius() {
        let e2 = ExponentSet::for_index(3.0, 2.0, 7.0);
        let ps = to_fowler(
            RadialState {
                r: 1.0,
                u: 2.0,
                du: -4.0,
            },
            &e2,
        );
        assert_eq!((ps.t, ps.x, ps.y), (0.0, 2.0, -4.0));
        let e15 = ExponentSet::for_index(3.0, 1.5, 7.0);
        let ps = to_fowler(
            RadialState {
                r: 1.0,
                u: 2.0,
                du: -4.0,
            },
            &e15,
        );
        assert_eq!(ps.x, 2.0);
        assert_relative_eq!(ps.y, -2.0, epsilon = 1e-15);
    }

    #[test]
    fn round_trip_at_e() {
        let pb = config_a();
        let s = RadialState {
            r: std::f64::consts::E,
            u: 0.3,
            du: -0.07,
        };
        let back = from_fowler(to_fowler(s, &pb.exps), &pb.exps);
        assert_relative_eq!(back.r, s.r, max_relative = 1e-14);
        assert_relative_eq!(back.u, s.u, max_relative = 1e-14);
        assert_relative_eq!(back.du, s.du, max_relative = 1e-14);
    }

    #[test]
    fn g_examples_config_a() {
        let pb = config_a();
        let v = g_eval(0.5, 0.0, &pb, &pb.exps, true).unwrap();
        assert_relative_eq!(v.g, 0.01171875, max_relative = 1e-14);
        let v = g_eval(2.5, 0.0, &pb, &pb.exps, true).unwrap();
        assert_eq!(v.g, 0.0);
        let v = g_eval(1.0, 0.0, &pb, &pb.exps, false).unwrap();
        let quad =
            crate::num::adaptive_simpson(|s| s.powi(6) - s.powi(8), 0.0, 1.0, 1e-14).unwrap();
        assert_relative_eq!(v.big_g, 2.0 / 63.0, max_relative = 1e-14);
        assert_relative_eq!(v.big_g, quad, max_relative = 1e-11);
    }

    #[test]
    fn natural_g_matches_general_route() {
        let pb = config_a();
        for &(x, t) in &[(0.3, -2.0), (1.7, 1.0), (-4.0, 3.0), (0.05, 8.0)] {
            let a = pb.g(x, t);
            let b = g_eval(x, t, &pb, &pb.exps, true).unwrap().g;
            assert_relative_eq!(a, b, max_relative = 1e-13);
        }
    }

    #[test]
    fn truncation_shape() {
        let pb = config_a();
        let tr = pb.truncation.as_ref().unwrap();
        assert!(tr.junction_mismatch() <= 1e-10);
        for i in 0..=1000 {
            let s = i as f64 / 1000.0;
            assert!(tr.f(1.0 + s) <= 0.0);
            assert!(tr.f(-1.0 - s) >= 0.0);
            assert!(tr.f(1.0 + s).abs() <= tr.f_max * (1.0 + 1e-12));
        }
        assert_eq!(tr.f(2.0), 0.0);
        assert_eq!(tr.f(-2.5), 0.0);
        assert_eq!(tr.f(0.5), pb.spec.nonlinearity.f(0.5));
        // one-sided second-order differences agree at d+
        let h = 1e-5;
        let fl = (3.0 * tr.f(1.0) - 4.0 * tr.f(1.0 - h) + tr.f(1.0 - 2.0 * h)) / (2.0 * h);
        let fr = (-3.0 * tr.f(1.0) + 4.0 * tr.f(1.0 + h) - tr.f(1.0 + 2.0 * h)) / (2.0 * h);
        assert!((fl - fr).abs() < 1e-6, "{fl} {fr}");
    }

    #[test]
    fn truncated_primitive_matches_quadrature() {
        let pb = config_a();
        let tr = pb.truncation.as_ref().unwrap();
        for &u in &[1.05, 1.2, 1.9, 2.5, -1.1, -2.2] {
            let quad = crate::num::adaptive_simpson(|s| tr.f(s), 0.0, u, 1e-13).unwrap();
            assert!((tr.primitive(u).unwrap() - quad).abs() < 1e-10, "{u}");
        }
    }

    #[test]
    fn energy_examples() {
        let pb = config_a();
        let h = energy(PhaseState::new(0.0, 1.0, -1.0), &pb).unwrap();
        assert_relative_eq!(h.h_l, 2.0 / 63.0, max_relative = 1e-13);
        for &t in &[-3.0, 0.0, 5.0] {
            let e = energy(PhaseState::new(t, 0.0, 0.0), &pb).unwrap();
            assert_eq!(e.h_l, 0.0);
        }
        let ob = Problem::new(ProblemSpec::oracle_b()).unwrap();
        let s2 = 2f64.sqrt();
        let e = energy(PhaseState::new(0.0, s2, -s2), &ob).unwrap();
        assert!(e.h_l.abs() < 1e-15);
        let e = energy(PhaseState::new(0.0, 1.0, -1.0), &ob).unwrap();
        assert_relative_eq!(e.h_l, -0.25, epsilon = 1e-15);
    }

    #[test]
    fn rescale_examples() {
        let pb = config_a();
        let e7 = pb.exps;
        let e6 = ExponentSet::for_index(3.0, 2.0, 6.0);
        let ps = PhaseState::new(1.0, 1.0, -0.5);
        let r = rescale(ps, &e7, &e6);
        assert_relative_eq!(r.x, 0.1f64.exp(), max_relative = 1e-14);
        let id = rescale(PhaseState::new(0.0, 0.7, -0.2), &e7, &e6);
        assert_relative_eq!(id.x, 0.7, max_relative = 1e-15);
        assert_relative_eq!(id.y, -0.2, max_relative = 1e-15);
        let back = rescale(r, &e6, &e7);
        assert_relative_eq!(back.x, ps.x, max_relative = 1e-14);
        assert_relative_eq!(back.y, ps.y, max_relative = 1e-14);
    }

    #[test]
    fn pohozaev_three_routes_agree() {
        let pb = config_a();
        let star = ExponentSet::for_index(3.0, 2.0, pb.exps.p_sobolev);
        let s = RadialState {
            r: 2.3,
            u: 0.41,
            du: -0.12,
        };
        let ps = to_fowler(s, &pb.exps);
        let direct = pohozaev_radial(s, &pb).unwrap();
        let via_l = energy(ps, &pb).unwrap().pohozaev;
        let via_star = hamiltonian_at(rescale(ps, &pb.exps, &star), &pb, &star).unwrap();
        assert_relative_eq!(direct, via_l, max_relative = 1e-12);
        assert_relative_eq!(direct, via_star, max_relative = 1e-12);
    }

    #[test]
    fn curly_g_is_increasing_for_limit_profiles() {
        let pb = config_a();
        // once d+ e^{-αt} < sqrt(45/49) the double-power 𝒢_l is increasing on (0, d+]
        for &t in &[1.0, 5.0, 10.0] {
            let mut prev = f64::NEG_INFINITY;
            for i in 1..=400 {
                let x = i as f64 / 400.0;
                let v = curly_g(x, t, &pb, false).unwrap();
                assert!(v >= prev - 1e-15, "t={t} x={x}");
                prev = v;
            }
        }
        let ob = Problem::new(ProblemSpec::oracle_b()).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=400 {
            let v = curly_g(i as f64 / 100.0, 0.0, &ob, false).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }
}
