//! Regular and fast-decay seeds, shot classification with zero counting, and the
//! threshold sequences `A_k`, `A*_k`, `B_k`, `B*_k`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fowler::{from_fowler, to_fowler, PhaseState, RadialState};
use crate::integrator::{integrate, Direction, EventKind, StopPolicy, Termination, Trajectory};
use crate::num::spow;
use crate::problem::{ExponentSet, Problem, Sign};

/// Default seed radius for regular solutions.
pub const DEFAULT_R0: f64 = 1e-3;
const RICHARDSON_TOL: f64 = 1e-8;
const RICHARDSON_HALVINGS: usize = 3;
/// Relative threshold on `|y|` for a zero to count as nondegenerate.
const NONDEGENERATE_REL: f64 = 1e-9;

/// Seed of the regular solution `u(0) = d`, `u'(0) = 0` at radius `r0`, with the
/// leading correction of `u` included.
pub fn init_regular(d: f64, r0: f64, pb: &Problem) -> Result<PhaseState> {
    if !(d.is_finite() && d != 0.0) {
        return Err(Error::InvalidArgument(format!(
            "regular seed needs d != 0, got {d}"
        )));
    }
    if !(r0 > 0.0 && r0 <= 1e-3) {
        return Err(Error::InvalidArgument(format!(
            "seed radius must lie in (0, 1e-3], got {r0}"
        )));
    }
    let e = &pb.exps;
    let n = e.n;
    let delta = pb.spec.weight.delta;
    let p = e.p;
    let h0 = pb.spec.weight.h0();
    let fd = pb.f_bar(d);
    // r^{n-1} φ(u') = -∫ s^{n-1} h0 s^δ f(d) ds
    let phi = -h0 * fd * r0.powf(1.0 + delta) / (n + delta);
    let du = spow(phi, 1.0 / (p - 1.0));
    let ex = (1.0 + delta) / (p - 1.0);
    let u = d + du * r0 / (ex + 1.0);
    Ok(to_fowler(RadialState { r: r0, u, du }, e))
}

/// Seed of the fast-decay solution with `u r^((n-p)/(p-1)) → limit`, placed at log-radius `t_seed`.
pub fn init_fast_decay(limit: f64, t_seed: f64, exps: &ExponentSet) -> PhaseState {
    let m = exps.fast_decay_rate;
    PhaseState {
        t: t_seed,
        x: limit * ((exps.alpha - m) * t_seed).exp(),
        y: -limit.signum() * (m * limit.abs()).powf(exps.p - 1.0) * (exps.gamma * t_seed).exp(),
    }
}

/// Angle of the stable direction at the origin for positive `x`, in `[-π/2, 0)`.
pub fn stable_direction_angle(exps: &ExponentSet) -> f64 {
    if exps.p < 2.0 {
        -0.5 * PI
    } else {
        -(exps.alpha - exps.gamma).atan()
    }
}

/// Reason a shot could not be assigned a decay class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Unresolved {
    /// The horizon ran out before a capture.
    Timeout,
    /// `u ≡ d±`: neither fast nor slow decay.
    ConstantSolution,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ShotClass {
    FastDecay { limit: f64 },
    SlowDecay { target: Sign },
    Escaped,
    Undetermined(Unresolved),
}

impl ShotClass {
    pub fn label(&self) -> String {
        match self {
            ShotClass::FastDecay { limit } => format!("FastDecay L={limit:.6e}"),
            ShotClass::SlowDecay { target: Sign::Plus } => "SlowDecay P+".into(),
            ShotClass::SlowDecay {
                target: Sign::Minus,
            } => "SlowDecay P-".into(),
            ShotClass::Escaped => "Escaped".into(),
            ShotClass::Undetermined(Unresolved::Timeout) => "Undetermined (timeout)".into(),
            ShotClass::Undetermined(Unresolved::ConstantSolution) => {
                "Undetermined (constant solution)".into()
            }
        }
    }

    fn key(&self) -> u8 {
        match self {
            ShotClass::FastDecay { .. } => 0,
            ShotClass::SlowDecay { target: Sign::Plus } => 1,
            ShotClass::SlowDecay {
                target: Sign::Minus,
            } => 2,
            ShotClass::Escaped => 3,
            ShotClass::Undetermined(_) => 4,
        }
    }
}

/// Classified shot.
#[derive(Clone, Debug, Serialize)]
pub struct ShotOutcome {
    pub d: f64,
    pub class: ShotClass,
    pub zeros: usize,
    /// Zeros implied by the unwrapped angle.
    pub angle_zeros: usize,
    /// `θ(end) - θ(start)` with the start lifted to its asymptotic angle.
    pub total_angle: f64,
    /// Log-radius at which the integration stopped.
    pub t_end: f64,
    #[serde(skip)]
    pub trajectory: Trajectory,
}

impl ShotOutcome {
    /// `(class, zeros)` signature; fast-decay limits are ignored.
    pub fn signature(&self) -> (u8, usize) {
        (self.class.key(), self.zeros)
    }

    pub fn summary(&self) -> String {
        format!(
            "d={:.12e} {} zeros={} angle={:.6}",
            self.d,
            self.class.label(),
            self.zeros,
            self.total_angle
        )
    }

    /// Radial profile `(r, u, u')` at every accepted step.
    pub fn profile(&self, exps: &ExponentSet) -> Vec<RadialState> {
        self.trajectory
            .samples
            .iter()
            .map(|&s| from_fowler(s, exps))
            .collect()
    }
}

/// Number of lines `θ = -π/2 - jπ`, `j ≥ 0`, lying strictly above `total_angle`.
pub fn lines_crossed(total_angle: f64) -> usize {
    if total_angle >= -0.5 * PI {
        0
    } else {
        ((-total_angle - 0.5 * PI) / PI).floor() as usize + 1
    }
}

/// Classifies a terminated forward trajectory of a regular solution starting at height `d`.
pub fn classify_and_count(d: f64, mut traj: Trajectory, pb: &Problem) -> Result<ShotOutcome> {
    let base = if d > 0.0 { 0.0 } else { -PI };
    traj.relift(base);
    let last = traj.last();
    let exps = &pb.exps;
    let class = match traj.termination {
        Termination::Event(EventKind::OriginCapture) => {
            let rs = from_fowler(last, exps);
            ShotClass::FastDecay {
                limit: rs.u * rs.r.powf(exps.fast_decay_rate),
            }
        }
        Termination::Event(EventKind::PCapture(s)) => ShotClass::SlowDecay { target: s },
        Termination::Event(EventKind::StripExit) => ShotClass::Escaped,
        _ => ShotClass::Undetermined(Unresolved::Timeout),
    };
    let eps_nd = NONDEGENERATE_REL * traj.max_rho();
    let zeros = traj
        .events_of(EventKind::YAxisCrossing)
        .filter(|e| e.y.abs() > eps_nd)
        .count();
    let total_angle = traj.theta.last().copied().unwrap_or(base) - base;
    let angle_zeros = match class {
        ShotClass::FastDecay { .. } => ((-total_angle - 0.5 * PI) / PI).round().max(0.0) as usize,
        _ => lines_crossed(total_angle),
    };
    // each zero sweeps π; a gap of a full half-turn means the lift is broken
    let expected = match class {
        ShotClass::FastDecay { .. } => -(zeros as f64) * PI + stable_direction_angle(exps),
        _ => -(zeros as f64) * PI - 0.5 * PI,
    };
    let tolerance = match class {
        ShotClass::FastDecay { .. } => PI,
        _ => 1.5 * PI,
    };
    if (total_angle - expected).abs() >= tolerance {
        return Err(Error::InconsistentAngle {
            zeros,
            angle: total_angle,
        });
    }
    Ok(ShotOutcome {
        d,
        class,
        zeros,
        angle_zeros,
        total_angle,
        t_end: last.t,
        trajectory: traj,
    })
}

/// Seeds the regular solution, checks the seed by Richardson halving, integrates forward and classifies.
pub fn shoot(d: f64, pb: &Problem, policy: &StopPolicy) -> Result<ShotOutcome> {
    let limit = if d > 0.0 { pb.d_plus() } else { pb.d_minus() };
    if !(d != 0.0 && d.abs() <= limit) {
        return Err(Error::InvalidArgument(format!(
            "shot height must satisfy 0 < |d| <= {limit}, got {d}"
        )));
    }
    let r0 = seed_radius(d, pb, policy)?;
    let start = init_regular(d, r0, pb)?;
    let traj = integrate(start, Direction::Forward, pb, policy)?;
    if pb.f_bar(d) == 0.0 {
        let t_end = traj.last().t;
        let mut traj = traj;
        traj.relift(if d > 0.0 { 0.0 } else { -PI });
        return Ok(ShotOutcome {
            d,
            class: ShotClass::Undetermined(Unresolved::ConstantSolution),
            zeros: 0,
            angle_zeros: 0,
            total_angle: 0.0,
            t_end,
            trajectory: traj,
        });
    }
    classify_and_count(d, traj, pb)
}

/// Largest admissible seed radius: the seed at `r0` must agree with the seed at `r0/2`
/// carried forward to `log r0`.
pub fn seed_radius(d: f64, pb: &Problem, policy: &StopPolicy) -> Result<f64> {
    let mut r0 = DEFAULT_R0;
    let mut diff = f64::INFINITY;
    let check = StopPolicy {
        rtol: policy.rtol.min(1e-12),
        atol: policy.atol.min(1e-14),
        ..StopPolicy::until(0.0)
    };
    for _ in 0..=RICHARDSON_HALVINGS {
        let coarse = init_regular(d, r0, pb)?;
        let fine = init_regular(d, 0.5 * r0, pb)?;
        let carried = integrate(
            fine,
            Direction::Forward,
            pb,
            &StopPolicy {
                t_end: Some(coarse.t),
                ..check.clone()
            },
        )?
        .last();
        diff = (carried.x - coarse.x).hypot(carried.y - coarse.y);
        if diff < RICHARDSON_TOL {
            return Ok(r0);
        }
        r0 *= 0.5;
    }
    Err(Error::BadSeed { r0, diff })
}

/// Default bracket width for threshold bisection, relative to `d±`.
pub const DEFAULT_TOL_REL: f64 = 1e-12;
const BASE_GRID: usize = 200;
const MAX_BISECTIONS: usize = 60;
const SUBDIVIDE_ROUNDS: usize = 6;
const SUBDIVIDE_POINTS: usize = 15;
const WITNESS_CANDIDATES: usize = 8;
const BISECTION_SPAN: f64 = 300.0;

/// Outcome of one scan shot without its trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Probe {
    magnitude: f64,
    class: ShotClass,
    zeros: usize,
}

impl Probe {
    fn signature(&self) -> (u8, usize) {
        (self.class.key(), self.zeros)
    }

    fn is_slow(&self) -> bool {
        matches!(self.class, ShotClass::SlowDecay { .. })
    }
}

/// Final bisection interval around a change of the `(class, zeros)` signature.
#[derive(Clone, Debug, Serialize)]
pub struct Bracket {
    pub side: Sign,
    /// Lower and upper height magnitudes.
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
    pub zeros_lo: usize,
    pub zeros_hi: usize,
    pub class_lo: ShotClass,
    pub class_hi: ShotClass,
    pub bisections: usize,
    /// False when a third signature appeared inside the interval.
    pub resolved: bool,
}

impl Bracket {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    fn joins(&self, a: usize, b: usize) -> bool {
        self.resolved && (self.zeros_lo, self.zeros_hi) == (a, b)
            || self.resolved && (self.zeros_lo, self.zeros_hi) == (b, a)
    }
}

/// Fast-decay candidate reported for a threshold.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub side: Sign,
    pub k: usize,
    /// Signed initial height.
    pub d: f64,
    pub class: ShotClass,
    pub zeros: usize,
    pub total_angle: f64,
    pub t_end: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    /// Set by callers that export the witness trajectory.
    pub trajectory_file: Option<String>,
}

/// Thresholds on both sides of zero. Heights of the negative side are reported as magnitudes.
#[derive(Clone, Debug, Serialize)]
pub struct SequenceReport {
    pub k_max: usize,
    pub tol_d: f64,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    /// `A*_0 = 0`; for `k ≥ 1` a lower bound of the true value.
    #[serde(rename = "A_star")]
    pub a_star: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    #[serde(rename = "B_star")]
    pub b_star: Vec<f64>,
    /// Whether `A*_k = A_{k-1}` (no intermediate transition).
    pub a_star_simple: Vec<bool>,
    pub b_star_simple: Vec<bool>,
    pub brackets: Vec<Bracket>,
    pub witnesses: Vec<Witness>,
    pub shots: usize,
    #[serde(skip)]
    pub witness_shots: Vec<ShotOutcome>,
}

struct SideResult {
    thresholds: Vec<f64>,
    stars: Vec<f64>,
    simple: Vec<bool>,
    brackets: Vec<Bracket>,
    witnesses: Vec<Witness>,
    witness_shots: Vec<ShotOutcome>,
    shots: usize,
}

/// Locates `A_0 < … < A_kmax` and `B_0 < … < B_kmax` with their `A*_k`, `B*_k`.
pub fn find_sequences(
    pb: &Problem,
    k_max: usize,
    tol_d: Option<f64>,
    policy: &StopPolicy,
    par: &crate::parallel::Parallelism,
) -> Result<SequenceReport> {
    let e = &pb.exps;
    if pb.spec.oracle_mode || !(e.l > e.p_sobolev) {
        return Err(Error::spec(
            crate::error::Clause::NotSupercritical,
            format!(
                "threshold sequences need l > p*, got l = {} and p* = {}",
                e.l, e.p_sobolev
            ),
        ));
    }
    let tol = tol_d.unwrap_or(DEFAULT_TOL_REL * pb.d_plus().min(pb.d_minus()));
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bracket width must be positive, got {tol}"
        )));
    }
    let plus = side_sequence(Sign::Plus, pb, k_max, tol, policy, par)?;
    let minus = side_sequence(Sign::Minus, pb, k_max, tol, policy, par)?;
    let mut brackets = plus.brackets;
    brackets.extend(minus.brackets);
    let mut witnesses = plus.witnesses;
    witnesses.extend(minus.witnesses);
    let mut witness_shots = plus.witness_shots;
    witness_shots.extend(minus.witness_shots);
    Ok(SequenceReport {
        k_max,
        tol_d: tol,
        a: plus.thresholds,
        a_star: plus.stars,
        b: minus.thresholds,
        b_star: minus.stars,
        a_star_simple: plus.simple,
        b_star_simple: minus.simple,
        brackets,
        witnesses,
        shots: plus.shots + minus.shots,
        witness_shots,
    })
}

fn scan(
    side: Sign,
    magnitudes: &[f64],
    pb: &Problem,
    policy: &StopPolicy,
    par: &crate::parallel::Parallelism,
) -> Result<Vec<Probe>> {
    par.map(magnitudes, |&m| {
        shoot(side.factor() * m, pb, policy).map(|o| Probe {
            magnitude: m,
            class: o.class,
            zeros: o.zeros,
        })
    })
    .into_iter()
    .collect()
}

fn merge(probes: &mut Vec<Probe>, extra: Vec<Probe>) {
    probes.extend(extra);
    probes.sort_by(|a, b| a.magnitude.total_cmp(&b.magnitude));
    probes.dedup_by(|a, b| a.magnitude == b.magnitude);
}

/// Adjacent signatures differ by exactly one zero between two slow-decay classes.
fn adjacent(a: &Probe, b: &Probe) -> bool {
    a.is_slow() && b.is_slow() && a.zeros.abs_diff(b.zeros) == 1
}

fn side_sequence(
    side: Sign,
    pb: &Problem,
    k_max: usize,
    tol: f64,
    policy: &StopPolicy,
    par: &crate::parallel::Parallelism,
) -> Result<SideResult> {
    let dmax = match side {
        Sign::Plus => pb.d_plus(),
        Sign::Minus => pb.d_minus(),
    };
    // origin capture off: each shot reports the side of the stable manifold it lies on
    let scan_policy = StopPolicy {
        origin_capture: false,
        forward_span: policy.forward_span.max(BISECTION_SPAN),
        t_end: None,
        ..policy.clone()
    };
    let grid = crate::num::logspace(1e-4 * dmax, dmax * 10f64.powf(-0.02), BASE_GRID);
    let mut shots = grid.len();
    let mut probes = scan(side, &grid, pb, &scan_policy, par)?;

    // heights accumulate towards d±: extend geometrically until k_max + 1 zeros appear
    let mut gap_hi = 1.0 - 10f64.powf(-0.02);
    let mut gap_lo = 1e-3;
    while probes.iter().map(|p| p.zeros).max().unwrap_or(0) <= k_max && gap_hi > 1e-11 {
        let tail: Vec<f64> = crate::num::logspace(gap_hi, gap_lo, 41)
            .into_iter()
            .skip(1)
            .map(|g| dmax * (1.0 - g))
            .collect();
        shots += tail.len();
        merge(&mut probes, scan(side, &tail, pb, &scan_policy, par)?);
        gap_hi = gap_lo;
        gap_lo *= 1e-2;
    }

    // split intervals that hide more than one transition
    for _ in 0..SUBDIVIDE_ROUNDS {
        let mut extra = Vec::new();
        for w in probes.windows(2) {
            if w[0].signature() != w[1].signature() && !adjacent(&w[0], &w[1]) {
                let (a, b) = (w[0].magnitude, w[1].magnitude);
                if b - a > tol {
                    extra.extend(
                        (1..=SUBDIVIDE_POINTS)
                            .map(|i| a + (b - a) * i as f64 / (SUBDIVIDE_POINTS + 1) as f64),
                    );
                }
            }
        }
        if extra.is_empty() {
            break;
        }
        shots += extra.len();
        merge(&mut probes, scan(side, &extra, pb, &scan_policy, par)?);
    }

    let pairs: Vec<(Probe, Probe)> = probes
        .windows(2)
        .filter(|w| w[0].signature() != w[1].signature())
        .map(|w| (w[0], w[1]))
        .collect();
    let bisected: Vec<Result<(Bracket, usize)>> = par.map(&pairs, |(lo, hi)| {
        bisect(side, *lo, *hi, tol, pb, &scan_policy)
    });
    let mut brackets = Vec::with_capacity(bisected.len());
    for b in bisected {
        let (br, n) = b?;
        shots += n;
        brackets.push(br);
    }

    let mut thresholds = Vec::new();
    let mut bracket_of = Vec::new();
    for k in 0..=k_max {
        let floor = thresholds.last().copied().unwrap_or(0.0);
        let found = brackets
            .iter()
            .position(|b| b.resolved && b.zeros_lo == k && b.zeros_hi == k + 1 && b.mid() > floor);
        let Some(i) = found else {
            return Err(Error::UnresolvedBracket(k));
        };
        thresholds.push(brackets[i].mid());
        bracket_of.push(i);
    }

    let mut stars = vec![0.0];
    let mut simple = vec![true];
    for k in 1..=k_max {
        let ak = thresholds[k];
        let last = brackets
            .iter()
            .enumerate()
            .filter(|(_, b)| b.joins(k - 1, k) && b.mid() < ak)
            .map(|(i, _)| i)
            .next_back();
        match last {
            Some(i) if i == bracket_of[k - 1] => {
                stars.push(thresholds[k - 1]);
                simple.push(true);
            }
            Some(i) => {
                stars.push(brackets[i].mid());
                simple.push(false);
            }
            None => {
                stars.push(thresholds[k - 1]);
                simple.push(true);
            }
        }
    }

    let mut witnesses = Vec::new();
    let mut witness_shots = Vec::new();
    for (k, &i) in bracket_of.iter().enumerate() {
        let br = &brackets[i];
        let (w, n) = witness(side, k, br, pb, policy)?;
        shots += n;
        witnesses.push(Witness {
            side,
            k,
            d: w.d,
            class: w.class,
            zeros: w.zeros,
            total_angle: w.total_angle,
            t_end: w.t_end,
            bracket_lo: br.lo,
            bracket_hi: br.hi,
            trajectory_file: None,
        });
        witness_shots.push(w);
    }

    Ok(SideResult {
        thresholds,
        stars,
        simple,
        brackets,
        witnesses,
        witness_shots,
        shots,
    })
}

fn bisect(
    side: Sign,
    lo: Probe,
    hi: Probe,
    tol: f64,
    pb: &Problem,
    policy: &StopPolicy,
) -> Result<(Bracket, usize)> {
    let (mut a, mut b) = (lo.magnitude, hi.magnitude);
    let mut n = 0;
    let mut resolved = true;
    while b - a > tol && n < MAX_BISECTIONS {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let o = shoot(side.factor() * m, pb, policy)?;
        n += 1;
        let sig = (o.class.key(), o.zeros);
        if sig == lo.signature() {
            a = m;
        } else if sig == hi.signature() {
            b = m;
        } else {
            resolved = false;
            break;
        }
    }
    Ok((
        Bracket {
            side,
            lo: a,
            hi: b,
            width: b - a,
            zeros_lo: lo.zeros,
            zeros_hi: hi.zeros,
            class_lo: lo.class,
            class_hi: hi.class,
            bisections: n,
            resolved,
        },
        n,
    ))
}

/// Among the bracket midpoint and nearby heights, the fast-decay shot with `k` zeros that
/// runs longest; falls back to the midpoint shot.
fn witness(
    side: Sign,
    k: usize,
    br: &Bracket,
    pb: &Problem,
    policy: &StopPolicy,
) -> Result<(ShotOutcome, usize)> {
    let mid = br.mid();
    let mut best: Option<ShotOutcome> = None;
    let mut fallback: Option<ShotOutcome> = None;
    let mut n = 0;
    for j in 0..WITNESS_CANDIDATES {
        // midpoint first, then points spreading out inside and just beyond the bracket
        let offset = if j == 0 {
            0.0
        } else {
            let sgn = if j % 2 == 1 { -1.0 } else { 1.0 };
            sgn * br.width * 0.25 * (1 << ((j - 1) / 2)) as f64
        };
        let m = mid + offset;
        if m <= 0.0 {
            continue;
        }
        let o = shoot(side.factor() * m, pb, policy)?;
        n += 1;
        let is_witness = matches!(o.class, ShotClass::FastDecay { .. }) && o.zeros == k;
        if is_witness && best.as_ref().is_none_or(|b| o.t_end > b.t_end) {
            best = Some(o);
        } else if fallback.is_none() {
            fallback = Some(o);
        }
    }
    let w = best.or(fallback).ok_or(Error::UnresolvedBracket(k))?;
    Ok((w, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemSpec;
    use approx::assert_relative_eq;

    #[test]
    fn regular_seed_values() {
        let pb = Problem::new(ProblemSpec::config_a()).unwrap();
        let s = init_regular(0.5, 1e-3, &pb).unwrap();
        assert_relative_eq!(s.x, 0.5 * 10f64.powf(-1.2), max_relative = 1e-7);
        assert_relative_eq!(s.x, 0.0315479, epsilon = 1e-7);
        assert_relative_eq!(
            s.y,
            -(0.01171875 / 3.0) * 1e-3f64.powf(2.4),
            max_relative = 1e-12
        );
        assert_relative_eq!(s.y, -2.4647e-10, max_relative = 1e-4);
    }

    #[test]
    fn regular_seed_signs() {
        let pb = Problem::new(ProblemSpec::config_a()).unwrap();
        assert!(init_regular(-0.3, 1e-3, &pb).unwrap().y > 0.0);
        assert_eq!(init_regular(1.0, 1e-3, &pb).unwrap().y, 0.0);
        assert!(init_regular(0.0, 1e-3, &pb).is_err());
    }

    #[test]
    fn fast_decay_seed_values() {
        let e = Problem::new(ProblemSpec::config_a()).unwrap().exps;
        let s = init_fast_decay(1.0, 10.0, &e);
        assert_relative_eq!(s.x, (-6.0f64).exp(), max_relative = 1e-13);
        assert_relative_eq!(s.y, -(-6.0f64).exp(), max_relative = 1e-13);
        let m = init_fast_decay(-1.0, 10.0, &e);
        assert_eq!((m.x, m.y), (-s.x, -s.y));
    }

    #[test]
    fn line_count() {
        assert_eq!(lines_crossed(-0.3), 0);
        assert_eq!(lines_crossed(-1.6), 1);
        assert_eq!(lines_crossed(-PI - 0.3), 1);
        assert_eq!(lines_crossed(-1.5 * PI - 0.01), 2);
    }

    #[test]
    fn stable_direction_for_laplacian() {
        let e = Problem::new(ProblemSpec::config_a()).unwrap().exps;
        assert_relative_eq!(stable_direction_angle(&e), -PI / 4.0, epsilon = 1e-15);
    }
}
