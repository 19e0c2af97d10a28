use std::io::Write;

use vdl_core::barenblatt::BarenblattProfile;
use vdl_core::GasModel;

use crate::error::{CliError, CliResult};

/// Rows `t,x,rho,u,m` on a uniform grid of `points` nodes for every time.
/// The default range is `1.1` times the largest support radius.
pub fn cmd_barenblatt<W: Write>(
    gamma: f64,
    mass: f64,
    times: &[f64],
    range: Option<(f64, f64)>,
    points: usize,
    mut out: W,
) -> CliResult<()> {
    let profile = BarenblattProfile::new(GasModel::new(gamma)?, mass)?;
    if times.is_empty() || times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(CliError::Usage(
            "times must be finite and nonnegative".into(),
        ));
    }
    if points < 2 {
        return Err(CliError::Usage("need at least 2 points".into()));
    }
    let (lo, hi) = match range {
        Some((a, b)) if b > a => (a, b),
        Some((a, b)) => return Err(CliError::Usage(format!("empty range [{a}, {b}]"))),
        None => {
            let r = times
                .iter()
                .map(|&t| profile.support_radius(t))
                .fold(0.0, f64::max);
            (-1.1 * r, 1.1 * r)
        }
    };
    let io = |e| CliError::io("<output>", e);
    writeln!(out, "t,x,rho,u,m").map_err(io)?;
    for &t in times {
        for i in 0..points {
            let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            let s = profile.sample(x, t);
            writeln!(out, "{:e},{:e},{:e},{:e},{:e}", s.t, s.x, s.rho, s.u, s.m).map_err(io)?;
        }
    }
    Ok(())
}
