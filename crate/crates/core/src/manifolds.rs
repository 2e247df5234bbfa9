//! Slices of the unstable and stable manifolds at a fixed log-radius, their polar
//! lifts, intersections between them, and the strip invariance checks.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fowler::PhaseState;
use crate::integrator::{integrate, Direction, StopPolicy, Trajectory};
use crate::num::{lift_near, wrap_pi};
use crate::parallel::Parallelism;
use crate::problem::{Problem, Sign};
use crate::shooting::{init_fast_decay, init_regular, seed_radius, stable_direction_angle};

const NEWTON_MAX_ITER: usize = 40;
const NEWTON_REL_STEP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ManifoldKind {
    UnstablePlus,
    UnstableMinus,
    StablePlus,
    StableMinus,
}

impl ManifoldKind {
    /// Angle the lifted slice starts from as the parameter tends to zero.
    pub fn base_angle(self) -> f64 {
        match self {
            ManifoldKind::UnstablePlus => 0.0,
            ManifoldKind::UnstableMinus => -PI,
            ManifoldKind::StablePlus => -0.5 * PI,
            ManifoldKind::StableMinus => -1.5 * PI,
        }
    }

    pub fn is_stable(self) -> bool {
        matches!(self, ManifoldKind::StablePlus | ManifoldKind::StableMinus)
    }

    pub fn sign(self) -> Sign {
        match self {
            ManifoldKind::UnstablePlus | ManifoldKind::StablePlus => Sign::Plus,
            ManifoldKind::UnstableMinus | ManifoldKind::StableMinus => Sign::Minus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ManifoldKind::UnstablePlus => "unstable-plus",
            ManifoldKind::UnstableMinus => "unstable-minus",
            ManifoldKind::StablePlus => "stable-plus",
            ManifoldKind::StableMinus => "stable-minus",
        }
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ManifoldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unstable-plus" | "u+" => Ok(ManifoldKind::UnstablePlus),
            "unstable-minus" | "u-" => Ok(ManifoldKind::UnstableMinus),
            "stable-plus" | "s+" => Ok(ManifoldKind::StablePlus),
            "stable-minus" | "s-" => Ok(ManifoldKind::StableMinus),
            other => Err(Error::InvalidArgument(format!(
                "unknown manifold kind '{other}'"
            ))),
        }
    }
}

/// Tracing parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TraceOptions {
    /// Stable seeds are placed at `tau + seed_offset`.
    pub seed_offset: f64,
    pub max_refinements: usize,
    /// Largest polar-angle jump tolerated between neighbouring parameters.
    pub max_angle_gap: f64,
    /// Re-trace stable slices from `tau + seed_offset + 10` and report the largest gap.
    pub estimate_seed_error: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            seed_offset: 30.0,
            max_refinements: 12,
            max_angle_gap: 0.25 * PI,
            estimate_seed_error: false,
        }
    }
}

/// One slice, sampled on a positive, increasing parameter grid.
#[derive(Clone, Debug, Serialize)]
pub struct ManifoldCurve {
    pub kind: ManifoldKind,
    pub tau: f64,
    /// Magnitudes of `d` (unstable) or `L` (stable); the sign comes from `kind`.
    pub params: Vec<f64>,
    pub points: Vec<PhaseState>,
    /// Polar angle lifted continuously along the parameter from the base angle.
    pub theta: Vec<f64>,
    pub rho: Vec<f64>,
    pub refinements: usize,
    pub seed_error: Option<f64>,
}

impl ManifoldCurve {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// CSV with columns `param,t,x,y,theta,rho`; parameters carry the slice sign.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "param,t,x,y,theta,rho")?;
        let s = self.kind.sign().factor();
        for i in 0..self.len() {
            let p = &self.points[i];
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e},{:e}",
                s * self.params[i],
                p.t,
                p.x,
                p.y,
                self.theta[i],
                self.rho[i]
            )?;
        }
        Ok(())
    }

    /// Smallest distance from `(x, y)` to the slice polyline.
    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        let pts = &self.points;
        if pts.len() == 1 {
            return (pts[0].x - x).hypot(pts[0].y - y);
        }
        pts.windows(2)
            .map(|w| segment_distance(x, y, w[0].x, w[0].y, w[1].x, w[1].y))
            .fold(f64::INFINITY, f64::min)
    }
}

fn segment_distance(px: f64, py: f64, ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let s = if len2 == 0.0 {
        0.0
    } else {
        (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0)
    };
    (px - ax - s * dx).hypot(py - ay - s * dy)
}

/// Point of the slice `kind` at `tau` for parameter magnitude `param`.
pub fn slice_point(
    kind: ManifoldKind,
    param: f64,
    tau: f64,
    pb: &Problem,
    policy: &StopPolicy,
    seed_offset: f64,
) -> Result<PhaseState> {
    let until = StopPolicy {
        rtol: policy.rtol,
        atol: policy.atol,
        max_steps: policy.max_steps,
        ..StopPolicy::until(tau)
    };
    let signed = kind.sign().factor() * param;
    if kind.is_stable() {
        let seed = init_fast_decay(signed, tau + seed_offset, &pb.exps);
        Ok(integrate(seed, Direction::Backward, pb, &until)?.last())
    } else {
        let r0 = seed_radius(signed, pb, policy)?;
        if tau <= r0.ln() {
            return init_regular(signed, tau.exp(), pb);
        }
        let seed = init_regular(signed, r0, pb)?;
        Ok(integrate(seed, Direction::Forward, pb, &until)?.last())
    }
}

/// Traces a slice on `params` (positive magnitudes), refining wherever the polar angle jumps
/// by more than `opts.max_angle_gap` between neighbours.
pub fn trace_manifold(
    kind: ManifoldKind,
    tau: f64,
    params: &[f64],
    pb: &Problem,
    policy: &StopPolicy,
    opts: &TraceOptions,
    par: &Parallelism,
) -> Result<ManifoldCurve> {
    if params.is_empty() {
        return Err(Error::InvalidArgument("empty parameter grid".into()));
    }
    if !tau.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "slice log-radius must be finite, got {tau}"
        )));
    }
    let limit = match kind {
        ManifoldKind::UnstablePlus => pb.d_plus(),
        ManifoldKind::UnstableMinus => pb.d_minus(),
        _ => f64::INFINITY,
    };
    let mut grid: Vec<f64> = params.to_vec();
    if let Some(bad) = grid.iter().find(|&&p| !(p > 0.0 && p <= limit)) {
        return Err(Error::InvalidArgument(format!(
            "{kind} parameters must lie in (0, {limit}], got {bad}"
        )));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let eval = |ps: &[f64]| -> Result<Vec<PhaseState>> {
        par.map(ps, |&p| {
            slice_point(kind, p, tau, pb, policy, opts.seed_offset)
        })
        .into_iter()
        .collect()
    };
    let mut points = eval(&grid)?;
    let mut refinements = 0;
    loop {
        let gaps: Vec<usize> = (1..grid.len())
            .filter(|&i| {
                let (a, b) = (points[i - 1], points[i]);
                wrap_pi(b.angle() - a.angle()).abs() > opts.max_angle_gap
            })
            .collect();
        if gaps.is_empty() {
            break;
        }
        if refinements == opts.max_refinements {
            return Err(Error::GridTooCoarse);
        }
        refinements += 1;
        let mids: Vec<f64> = gaps
            .iter()
            .map(|&i| 0.5 * (grid[i - 1] + grid[i]))
            .collect();
        let new_pts = eval(&mids)?;
        let mut merged: Vec<(f64, PhaseState)> = grid.into_iter().zip(points).collect();
        merged.extend(mids.into_iter().zip(new_pts));
        merged.sort_by(|a, b| a.0.total_cmp(&b.0));
        merged.dedup_by(|a, b| a.0 == b.0);
        (grid, points) = merged.into_iter().unzip();
    }

    let mut theta = Vec::with_capacity(points.len());
    let mut prev = kind.base_angle();
    for p in &points {
        let th = if p.x == 0.0 && p.y == 0.0 {
            prev
        } else {
            lift_near(p.angle(), prev)
        };
        theta.push(th);
        prev = th;
    }
    let rho = points.iter().map(|p| p.rho()).collect();

    let seed_error = if kind.is_stable() && opts.estimate_seed_error {
        let far: Vec<PhaseState> = par
            .map(&grid, |&p| {
                slice_point(kind, p, tau, pb, policy, opts.seed_offset + 10.0)
            })
            .into_iter()
            .collect::<Result<_>>()?;
        Some(
            points
                .iter()
                .zip(&far)
                .map(|(a, b)| (a.x - b.x).hypot(a.y - b.y))
                .fold(0.0, f64::max),
        )
    } else {
        None
    };

    Ok(ManifoldCurve {
        kind,
        tau,
        params: grid,
        points,
        theta,
        rho,
        refinements,
        seed_error,
    })
}

/// Crossing of an unstable slice with a translated stable slice.
#[derive(Clone, Debug, Serialize)]
pub struct IntersectionRecord {
    /// Number of zeros of the corresponding fast-decay solution.
    pub k: usize,
    pub unstable: ManifoldKind,
    pub stable: ManifoldKind,
    /// Translation `-2π·shift` applied to the stable slice angle.
    pub shift: usize,
    pub point: PhaseState,
    /// Signed initial height.
    pub d_at: f64,
    /// Signed fast-decay limit.
    pub l_at: f64,
    pub residual: f64,
    pub newton_iterations: usize,
}

/// Stable branch and translation meeting the unstable slice `u` at solutions with `k` zeros.
pub fn target_branch(u: ManifoldKind, k: usize, pb: &Problem) -> (ManifoldKind, usize) {
    let start = u.base_angle();
    // a solution with k zeros ends on the stable direction of the quadrant reached after k half-turns
    let final_sign = u.sign().factor() * if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let psi = stable_direction_angle(&pb.exps);
    let (branch, lifted) = if final_sign > 0.0 {
        (ManifoldKind::StablePlus, psi)
    } else {
        (ManifoldKind::StableMinus, psi - PI)
    };
    let arrival = start - k as f64 * PI + psi;
    let shift = ((lifted - arrival) / (2.0 * PI)).round() as usize;
    (branch, shift)
}

/// First crossings in the unstable parameter of `unstable` with the translated stable slices
/// `E_k`, `k = 0..=k_max`, refined by Newton's method on `(d, L)`.
pub fn intersect(
    unstable: &ManifoldCurve,
    stables: &[&ManifoldCurve],
    k_max: usize,
    pb: &Problem,
    policy: &StopPolicy,
    opts: &TraceOptions,
) -> Result<Vec<IntersectionRecord>> {
    if unstable.kind.is_stable() {
        return Err(Error::InvalidArgument(
            "first curve must be an unstable slice".into(),
        ));
    }
    let mut out = Vec::new();
    for k in 0..=k_max {
        let (branch, shift) = target_branch(unstable.kind, k, pb);
        let stable = stables
            .iter()
            .find(|c| c.kind == branch)
            .ok_or(Error::NoCrossing(k))?;
        if (stable.tau - unstable.tau).abs() > 1e-12 * (1.0 + unstable.tau.abs()) {
            return Err(Error::InvalidArgument(format!(
                "slices at different log-radii {} and {}",
                unstable.tau, stable.tau
            )));
        }
        let offset = -2.0 * PI * shift as f64;
        let guess = first_polar_crossing(unstable, stable, offset).ok_or(Error::NoCrossing(k))?;
        let rec = refine(unstable, stable, guess, pb, policy, opts)?;
        out.push(IntersectionRecord {
            k,
            unstable: unstable.kind,
            stable: branch,
            shift,
            ..rec
        });
    }
    Ok(out)
}

/// `(d, L)` at the first crossing, by segment intersection in the `(θ, ρ)` strip.
fn first_polar_crossing(u: &ManifoldCurve, s: &ManifoldCurve, offset: f64) -> Option<(f64, f64)> {
    for i in 1..u.len() {
        let (a0, a1) = ((u.theta[i - 1], u.rho[i - 1]), (u.theta[i], u.rho[i]));
        let (tmin, tmax) = (a0.0.min(a1.0), a0.0.max(a1.0));
        let mut best: Option<(f64, f64, f64)> = None;
        for j in 1..s.len() {
            let b0 = (s.theta[j - 1] + offset, s.rho[j - 1]);
            let b1 = (s.theta[j] + offset, s.rho[j]);
            if b0.0.max(b1.0) < tmin || b0.0.min(b1.0) > tmax {
                continue;
            }
            if let Some((sa, sb)) = segment_hit(a0, a1, b0, b1) {
                if best.is_none_or(|b| sa < b.0) {
                    let d = u.params[i - 1] + sa * (u.params[i] - u.params[i - 1]);
                    let l = s.params[j - 1] + sb * (s.params[j] - s.params[j - 1]);
                    best = Some((sa, d, l));
                }
            }
        }
        if let Some((_, d, l)) = best {
            return Some((d, l));
        }
    }
    None
}

fn segment_hit(
    a0: (f64, f64),
    a1: (f64, f64),
    b0: (f64, f64),
    b1: (f64, f64),
) -> Option<(f64, f64)> {
    let r = (a1.0 - a0.0, a1.1 - a0.1);
    let q = (b1.0 - b0.0, b1.1 - b0.1);
    let den = r.0 * q.1 - r.1 * q.0;
    if den == 0.0 {
        return None;
    }
    let w = (b0.0 - a0.0, b0.1 - a0.1);
    let sa = (w.0 * q.1 - w.1 * q.0) / den;
    let sb = (w.0 * r.1 - w.1 * r.0) / den;
    ((0.0..=1.0).contains(&sa) && (0.0..=1.0).contains(&sb)).then_some((sa, sb))
}

fn refine(
    u: &ManifoldCurve,
    s: &ManifoldCurve,
    (d0, l0): (f64, f64),
    pb: &Problem,
    policy: &StopPolicy,
    opts: &TraceOptions,
) -> Result<IntersectionRecord> {
    let tau = u.tau;
    let dmax = match u.kind {
        ManifoldKind::UnstablePlus => pb.d_plus(),
        _ => pb.d_minus(),
    };
    let pu = |d: f64| slice_point(u.kind, d, tau, pb, policy, opts.seed_offset);
    let ps = |l: f64| slice_point(s.kind, l, tau, pb, policy, opts.seed_offset);
    let resid = |a: &PhaseState, b: &PhaseState| [a.x - b.x, a.y - b.y];
    let (mut d, mut l) = (d0, l0);
    let (mut a, mut b) = (pu(d)?, ps(l)?);
    let mut f = resid(&a, &b);
    let mut norm = f[0].hypot(f[1]);
    let mut iters = 0;
    while iters < NEWTON_MAX_ITER {
        iters += 1;
        let hd = NEWTON_REL_STEP * d;
        let hl = NEWTON_REL_STEP * l;
        let ad = pu((d + hd).min(dmax))?;
        let bl = ps(l + hl)?;
        let hd_eff = (d + hd).min(dmax) - d;
        let j = [
            [(ad.x - a.x) / hd_eff, -(bl.x - b.x) / hl],
            [(ad.y - a.y) / hd_eff, -(bl.y - b.y) / hl],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let sd = -(j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let sl = -(-j[1][0] * f[0] + j[0][0] * f[1]) / det;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let (dn, ln) = (d + lambda * sd, l + lambda * sl);
            if dn > 0.0 && dn <= dmax && ln > 0.0 {
                let (an, bn) = (pu(dn)?, ps(ln)?);
                let fn_ = resid(&an, &bn);
                let nn = fn_[0].hypot(fn_[1]);
                if nn < norm {
                    (d, l, a, b, f, norm) = (dn, ln, an, bn, fn_, nn);
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        let tiny = (lambda * sd).abs() <= 4.0 * f64::EPSILON * d
            && (lambda * sl).abs() <= 4.0 * f64::EPSILON * l;
        if !accepted || tiny {
            break;
        }
    }
    Ok(IntersectionRecord {
        k: 0,
        unstable: u.kind,
        stable: s.kind,
        shift: 0,
        point: PhaseState::new(tau, 0.5 * (a.x + b.x), 0.5 * (a.y + b.y)),
        d_at: u.kind.sign().factor() * d,
        l_at: s.kind.sign().factor() * l,
        residual: norm,
        newton_iterations: iters,
    })
}

/// Outcome of the strip invariance checks on one trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub samples: usize,
    /// Samples strictly inside `(-d-, d+)`.
    pub inside: usize,
    /// Samples in the forward-invariant quadrant of either shifted frame.
    pub forward_quadrant: usize,
    /// Samples in the backward-invariant quadrant of either shifted frame.
    pub backward_quadrant: usize,
}

/// Checks the invariant quadrants of the shifted frames `ξ = x ∓ d± e^{αt}` and that the
/// samples inside the strip `-d- < u < d+` form one contiguous run.
pub fn invariance_check(traj: &Trajectory, pb: &Problem) -> Result<InvarianceReport> {
    let alpha = pb.exps.alpha;
    let (dp, dm) = (pb.d_plus(), pb.d_minus());
    let forward = traj.direction == Direction::Forward;
    let n = traj.samples.len();
    // orient samples in increasing t
    let ordered: Vec<PhaseState> = if forward {
        traj.samples.clone()
    } else {
        traj.samples.iter().rev().copied().collect()
    };

    // frame +: ξ = x - d+ e^{αt}, y; frame -: mirrored so that the same quadrant rules apply
    let frames = |s: &PhaseState| {
        let e = (alpha * s.t).exp();
        [(s.x - dp * e, s.y), (-s.x - dm * e, -s.y)]
    };
    let tol = |s: &PhaseState| 1e-9 * (1.0 + s.x.abs().max(s.y.abs()));

    let mut fq = 0;
    let mut bq = 0;
    for side in 0..2 {
        let mut in_q1_since: Option<f64> = None;
        let mut outside_q2_at: Option<f64> = None;
        for s in &ordered {
            let (xi, y) = frames(s)[side];
            let eps = tol(s);
            if let Some(t0) = in_q1_since {
                if xi < -eps || y < -eps {
                    return Err(Error::ViolationFound {
                        t: s.t,
                        what: format!("left the forward-invariant quadrant entered at t = {t0}"),
                    });
                }
            } else if xi > eps && y > eps {
                in_q1_since = Some(s.t);
            }
            if in_q1_since.is_some() {
                fq += 1;
            }
            if xi > eps && y < -eps {
                bq += 1;
                if let Some(t0) = outside_q2_at {
                    return Err(Error::ViolationFound {
                        t: s.t,
                        what: format!(
                            "entered the backward-invariant quadrant after being outside at t = {t0}"
                        ),
                    });
                }
            } else if outside_q2_at.is_none() && (xi < -eps || y > eps) {
                outside_q2_at = Some(s.t);
            }
        }
    }

    let mut inside = 0;
    let mut state = 0u8; // 0: not yet inside, 1: inside run, 2: left after a run
    let mut left_at = 0.0;
    for s in &ordered {
        let e = (alpha * s.t).exp();
        let u = s.x / e;
        let eps = tol(s) / e;
        let is_in = u < dp - eps && u > -dm + eps;
        let is_out = u > dp + eps || u < -dm - eps;
        if is_in {
            inside += 1;
            if state == 2 {
                return Err(Error::ViolationFound {
                    t: s.t,
                    what: format!("re-entered the strip after leaving it at t = {left_at}"),
                });
            }
            state = 1;
        } else if is_out && state == 1 {
            state = 2;
            left_at = s.t;
        }
    }

    Ok(InvarianceReport {
        samples: n,
        inside,
        forward_quadrant: fq,
        backward_quadrant: bq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemSpec;

    fn config_a() -> Problem {
        Problem::new(ProblemSpec::config_a()).unwrap()
    }

    #[test]
    fn branch_selection() {
        let pb = config_a();
        assert_eq!(
            target_branch(ManifoldKind::UnstablePlus, 0, &pb),
            (ManifoldKind::StablePlus, 0)
        );
        assert_eq!(
            target_branch(ManifoldKind::UnstablePlus, 1, &pb),
            (ManifoldKind::StableMinus, 0)
        );
        assert_eq!(
            target_branch(ManifoldKind::UnstablePlus, 2, &pb),
            (ManifoldKind::StablePlus, 1)
        );
        assert_eq!(
            target_branch(ManifoldKind::UnstableMinus, 0, &pb),
            (ManifoldKind::StableMinus, 0)
        );
        assert_eq!(
            target_branch(ManifoldKind::UnstableMinus, 1, &pb),
            (ManifoldKind::StablePlus, 1)
        );
    }

    #[test]
    fn kind_round_trip() {
        for k in [
            ManifoldKind::UnstablePlus,
            ManifoldKind::UnstableMinus,
            ManifoldKind::StablePlus,
            ManifoldKind::StableMinus,
        ] {
            assert_eq!(k.name().parse::<ManifoldKind>().unwrap(), k);
        }
        assert!("sideways".parse::<ManifoldKind>().is_err());
    }

    #[test]
    fn constant_solution_is_on_the_boundary() {
        let pb = config_a();
        let tr = integrate(
            PhaseState::new(0.0, 1.0, 0.0),
            Direction::Forward,
            &pb,
            &StopPolicy::until(5.0),
        )
        .unwrap();
        let rep = invariance_check(&tr, &pb).unwrap();
        assert_eq!(rep.inside, 0);
    }

    #[test]
    fn shifted_quadrant_is_kept() {
        let pb = config_a();
        // u = 1.2 > d+ with u' > 0: ξ > 0 and y > 0
        let tr = integrate(
            PhaseState::new(0.0, 1.2, 0.05),
            Direction::Forward,
            &pb,
            &StopPolicy::until(3.0),
        )
        .unwrap();
        let rep = invariance_check(&tr, &pb).unwrap();
        assert!(rep.forward_quadrant > 0);
        let alpha = pb.exps.alpha;
        let xi: Vec<f64> = tr
            .samples
            .iter()
            .map(|s| s.x - (alpha * s.t).exp())
            .collect();
        assert!(xi.windows(2).all(|w| w[1] > w[0]));
    }
}
