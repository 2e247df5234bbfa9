//! Phase-plane data: sampled vector field, isoclines and critical points.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use radshoot::fowler::hamiltonian_at;
use radshoot::integrator::vector_field;
use radshoot::num::spow;
use radshoot::{PhaseState, Problem};
use serde::Serialize;

/// Rectangular grid `xmin:xmax:nx,ymin:ymax:ny`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub x: (f64, f64, usize),
    pub y: (f64, f64, usize),
}

fn axis(spec: &str) -> anyhow::Result<(f64, f64, usize)> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        bail!("axis '{spec}' is not lo:hi:n");
    };
    let lo: f64 = lo
        .trim()
        .parse()
        .with_context(|| format!("axis '{spec}'"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .with_context(|| format!("axis '{spec}'"))?;
    let n: usize = n.trim().parse().with_context(|| format!("axis '{spec}'"))?;
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) || n < 2 {
        bail!("axis '{spec}' needs lo < hi and at least 2 points");
    }
    Ok((lo, hi, n))
}

fn linspace((lo, hi, n): (f64, f64, usize)) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

impl Grid {
    pub fn parse(spec: &str) -> anyhow::Result<Self> {
        let (xs, ys) = spec
            .split_once(',')
            .ok_or_else(|| anyhow!("grid '{spec}' is not xmin:xmax:nx,ymin:ymax:ny"))?;
        Ok(Grid {
            x: axis(xs)?,
            y: axis(ys)?,
        })
    }
}

#[derive(Serialize)]
struct Equilibrium {
    name: &'static str,
    x: f64,
    y: f64,
    /// Eigenvalues of the limiting autonomous system as `[re, im]`.
    eigenvalues: [[f64; 2]; 2],
}

#[derive(Serialize)]
struct CriticalReport {
    t: f64,
    alpha: f64,
    gamma: f64,
    equilibria: Vec<Equilibrium>,
}

/// Jacobian eigenvalues of `ẋ = αx + y|y|^((2-p)/(p-1))`, `ẏ = γy - c x|x|^(q-2)`.
fn eigenvalues(pb: &Problem, x: f64, y: f64) -> [[f64; 2]; 2] {
    let e = &pb.exps;
    let (p, q) = (e.p, pb.spec.nonlinearity.q);
    let c = pb.spec.weight.h_inf() * pb.spec.nonlinearity.b(0.0);
    let a11 = e.alpha;
    let a12 = y.abs().powf((2.0 - p) / (p - 1.0)) / (p - 1.0);
    let a21 = -c * (q - 1.0) * x.abs().powf(q - 2.0);
    let a22 = e.gamma;
    let half_tr = 0.5 * (a11 + a22);
    let disc = half_tr * half_tr - (a11 * a22 - a12 * a21);
    if disc >= 0.0 {
        let s = disc.sqrt();
        [[half_tr + s, 0.0], [half_tr - s, 0.0]]
    } else {
        let s = (-disc).sqrt();
        [[half_tr, s], [half_tr, -s]]
    }
}

/// Writes `portrait_field.csv`, `portrait_isoclines.csv` and `portrait_critical.json`.
pub fn write_portrait(pb: &Problem, grid: &Grid, t: f64, out: &Path) -> anyhow::Result<String> {
    let mut field = String::from("x,y,dx,dy,H\n");
    for x in linspace(grid.x) {
        for y in linspace(grid.y) {
            let [dx, dy] = vector_field(pb, t, x, y);
            let h = hamiltonian_at(PhaseState::new(t, x, y), pb, &pb.exps)?;
            field.push_str(&format!("{x:e},{y:e},{dx:e},{dy:e},{h:e}\n"));
        }
    }
    fs::write(out.join("portrait_field.csv"), field)?;

    let e = &pb.exps;
    let (ylo, yhi, _) = grid.y;
    let fine = (grid.x.0, grid.x.1, 8 * grid.x.2);
    let mut iso = fs::File::create(out.join("portrait_isoclines.csv"))?;
    writeln!(iso, "curve,x,y")?;
    for x in linspace(fine) {
        // ẋ = 0
        let y = -spow(e.alpha * x, e.p - 1.0);
        if (ylo..=yhi).contains(&y) {
            writeln!(iso, "dx0,{x:e},{y:e}")?;
        }
    }
    for x in linspace(fine) {
        // ẏ = 0
        let y = pb.g(x, t) / e.gamma;
        if (ylo..=yhi).contains(&y) {
            writeln!(iso, "dy0,{x:e},{y:e}")?;
        }
    }

    let cp = &pb.critical;
    let equilibria = vec![
        Equilibrium {
            name: "O",
            x: 0.0,
            y: 0.0,
            eigenvalues: eigenvalues(pb, 0.0, 0.0),
        },
        Equilibrium {
            name: "P+",
            x: cp.plus.x,
            y: cp.plus.y,
            eigenvalues: eigenvalues(pb, cp.plus.x, cp.plus.y),
        },
        Equilibrium {
            name: "P-",
            x: cp.minus.x,
            y: cp.minus.y,
            eigenvalues: eigenvalues(pb, cp.minus.x, cp.minus.y),
        },
    ];
    let report = CriticalReport {
        t,
        alpha: e.alpha,
        gamma: e.gamma,
        equilibria,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    fs::write(out.join("portrait_critical.json"), text)?;
    Ok(format!(
        "portrait {}x{} at t={t} P+=({:.7}, {:.7})",
        grid.x.2, grid.y.2, cp.plus.x, cp.plus.y
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use radshoot::ProblemSpec;

    #[test]
    fn grid_parsing() {
        let g = Grid::parse("-1:1:5,-2:0.5:3").unwrap();
        assert_eq!(g.x, (-1.0, 1.0, 5));
        assert_eq!(g.y, (-2.0, 0.5, 3));
        assert!(Grid::parse("1:0:5,0:1:2").is_err());
        assert!(Grid::parse("0:1:5").is_err());
        assert!(Grid::parse("0:1,0:1:3").is_err());
    }

    #[test]
    fn origin_is_a_saddle_and_p_plus_attracts() {
        let pb = Problem::new(ProblemSpec::config_a()).unwrap();
        let o = eigenvalues(&pb, 0.0, 0.0);
        assert!((o[0][0] - 0.4).abs() < 1e-14 && (o[1][0] + 0.6).abs() < 1e-14);
        let cp = pb.critical.plus;
        let ev = eigenvalues(&pb, cp.x, cp.y);
        // trace -0.2, determinant -0.24 + 6 * 0.24 = 1.2: stable focus
        let im = (1.2f64 - 0.01).sqrt();
        assert!((ev[0][0] + 0.1).abs() < 1e-12 && (ev[1][0] + 0.1).abs() < 1e-12);
        assert!((ev[0][1] - im).abs() < 1e-9 && (ev[1][1] + im).abs() < 1e-9);
    }
}
