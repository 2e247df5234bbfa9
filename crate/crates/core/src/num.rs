//! Small numerical helpers shared across modules.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Signed power `sign(v) |v|^e`, exactly zero at `v = 0`.
#[inline]
pub fn spow(v: f64, e: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else if e == 1.0 {
        v
    } else {
        v.signum() * v.abs().powf(e)
    }
}

/// Wraps an angle difference into `(-pi, pi]`.
#[inline]
pub fn wrap_pi(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Returns the representative of `angle` (mod 2 pi) closest to `target`.
#[inline]
pub fn lift_near(angle: f64, target: f64) -> f64 {
    target + wrap_pi(angle - target)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 48).ok_or(Error::QuadratureFailure { a, b })
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return None;
    }
    if delta.abs() <= 15.0 * tol {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Some(l + r)
}

/// Root of `f` on a sign-changing bracket, by Brent's method.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> Option<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Some(b)
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_power_is_odd_and_exact_at_zero() {
        assert_eq!(spow(0.0, 0.3), 0.0);
        assert_eq!(spow(-4.0, 0.5), -2.0);
        assert_eq!(spow(4.0, 0.5), 2.0);
        assert_eq!(spow(-3.0, 1.0), -3.0);
    }

    #[test]
    fn lift_picks_nearest_branch() {
        let a = lift_near(3.0, -PI);
        assert!((a - (3.0 - 2.0 * PI)).abs() < 1e-15);
        assert!((lift_near(-0.2, 0.0) + 0.2).abs() < 1e-15);
    }

    #[test]
    fn simpson_integrates_polynomials() {
        let v = adaptive_simpson(|s| s.powi(6) - s.powi(8), 0.0, 1.0, 1e-13).unwrap();
        assert!((v - 2.0 / 63.0).abs() < 1e-12);
    }

    #[test]
    fn brent_finds_fifth_root() {
        let r = brent(|x| x.powi(5) - 0.24, 0.0, 1.0, 1e-15).unwrap();
        assert!((r.powi(5) - 0.24).abs() < 1e-14);
    }
}
