//! Fixed points of `ẇ = −εw + α² sin θ`, `θ̇ = w` on the cylinder.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedPointKind {
    Saddle,
    StableNode,
    StableSpiral,
    /// Non-isolated: a whole circle of equilibria.
    Degenerate,
}

impl fmt::Display for FixedPointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FixedPointKind::Saddle => "saddle",
            FixedPointKind::StableNode => "stable_node",
            FixedPointKind::StableSpiral => "stable_spiral",
            FixedPointKind::Degenerate => "degenerate",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPoint {
    pub w: f64,
    pub theta: f64,
    pub eigenvalues: [Complex64; 2],
    pub kind: FixedPointKind,
}

/// Equilibria with their linearisation.
///
/// For `α = 0` every point of `w = 0` is an equilibrium; a single
/// representative at `θ = 0` flagged degenerate is returned.
pub fn counterexample_fixed_points(eps: f64, alpha: f64) -> Result<Vec<FixedPoint>> {
    if !(eps > 0.0) {
        return Err(Error::ParameterRange { name: "eps".into(), detail: "must be positive".into() });
    }
    if !(alpha >= 0.0 && alpha <= eps) {
        return Err(Error::ParameterRange { name: "alpha".into(), detail: "need 0 <= alpha <= eps".into() });
    }
    if alpha == 0.0 {
        let ev = [Complex64::new(-eps, 0.0), Complex64::new(0.0, 0.0)];
        return Ok(vec![FixedPoint { w: 0.0, theta: 0.0, eigenvalues: ev, kind: FixedPointKind::Degenerate }]);
    }
    let a2 = alpha * alpha;
    // w = 0 and sin θ = 0 on [0, 2π)
    Ok([0.0, PI]
        .iter()
        .map(|&theta| {
            // Jacobian [[−ε, α² cos θ], [1, 0]]
            let (j11, j12, j21, j22) = (-eps, a2 * theta.cos().round(), 1.0, 0.0);
            let tr = j11 + j22;
            let det = j11 * j22 - j12 * j21;
            let disc = Complex64::new(tr * tr - 4.0 * det, 0.0).sqrt();
            let l1 = (Complex64::new(tr, 0.0) + disc) / 2.0;
            let l2 = (Complex64::new(tr, 0.0) - disc) / 2.0;
            let kind = if det < 0.0 {
                FixedPointKind::Saddle
            } else if tr * tr - 4.0 * det < 0.0 {
                FixedPointKind::StableSpiral
            } else {
                FixedPointKind::StableNode
            };
            FixedPoint { w: 0.0, theta, eigenvalues: [l1, l2], kind }
        })
        .collect())
}
