//! Closed-form limit of the community magnetizations, drift diagnostics,
//! horizon selection, and trajectory-vs-limit deviation.
//!
//! When the reveal fraction is `eta`, the limiting magnetization of the
//! first community is `1 + (eta - 1) e^{-t}` and the second community
//! mirrors it. The linear drift `(a - alpha) v_k z_k + (b - alpha) v_j z_j`
//! (with `j` the other community) predicts which way each community's
//! magnetization moves at zero temperature, and its zero lines split the
//! `(z1, z2)` square into regions used for hyperparameter diagnostics.

use crate::glauber::Trajectory;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeanFieldError {
    #[error("reveal fraction must lie in (0, 1], got {0}")]
    RevealFraction(f64),
    #[error("target error must be positive, got {0}")]
    TargetError(f64),
    #[error("drift parameters need finite a > b > 0 and positive community fractions")]
    DriftParams,
    #[error("trajectory and sample grid lengths disagree")]
    GridMismatch,
}

/// Limit curve of the two community magnetizations for reveal fraction
/// `eta`: the first component relaxes exponentially from `eta` to `1` at
/// unit rate and the second is its exact mirror.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeanFieldCurve {
    eta: f64,
}

impl MeanFieldCurve {
    pub fn new(eta: f64) -> Result<Self, MeanFieldError> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(MeanFieldError::RevealFraction(eta));
        }
        Ok(Self { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `(z1, z2)` at time `t >= 0`; `z2` is the exact negation of `z1`.
    pub fn value(&self, t: f64) -> (f64, f64) {
        let z1 = 1.0 + (self.eta - 1.0) * (-t).exp();
        (z1, -z1)
    }
}

/// Convenience for a single evaluation of the limit curve.
pub fn z_infinity(eta: f64, t: f64) -> Result<(f64, f64), MeanFieldError> {
    Ok(MeanFieldCurve::new(eta)?.value(t))
}

/// Smallest horizon that brings the limit curve's residual classification
/// error below `eps`: `log(2 (1 - eta) / eps)`, clamped at zero when the
/// initial state already satisfies the target. At the returned time,
/// `(1 - eta) e^{-t} = eps / 2` (when positive).
pub fn t_end_for_error(eta: f64, eps: f64) -> Result<f64, MeanFieldError> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(MeanFieldError::RevealFraction(eta));
    }
    if !(eps > 0.0) {
        return Err(MeanFieldError::TargetError(eps));
    }
    let ratio = 2.0 * (1.0 - eta) / eps;
    Ok(if ratio <= 1.0 { 0.0 } else { ratio.ln() })
}

/// Parameters of the linear drift field on the magnetization square:
/// edge-density factors `a > b > 0`, penalty weight `alpha`, and relative
/// community sizes `v1, v2 > 0`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DriftParams {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub v1: f64,
    pub v2: f64,
}

impl DriftParams {
    pub fn new(a: f64, b: f64, alpha: f64, v1: f64, v2: f64) -> Result<Self, MeanFieldError> {
        let finite = a.is_finite() && b.is_finite() && alpha.is_finite();
        if !finite || !(a > b && b > 0.0) || !(v1 > 0.0 && v2 > 0.0) {
            return Err(MeanFieldError::DriftParams);
        }
        Ok(Self {
            a,
            b,
            alpha,
            v1,
            v2,
        })
    }

    /// Drift of community `k` (1 or 2) at magnetization pair `z`.
    pub fn drift(&self, z: (f64, f64), k: u8) -> f64 {
        let (own, other, z_own, z_other) = match k {
            1 => (self.v1, self.v2, z.0, z.1),
            2 => (self.v2, self.v1, z.1, z.0),
            _ => panic!("community index must be 1 or 2, got {k}"),
        };
        (self.a - self.alpha) * own * z_own + (self.b - self.alpha) * other * z_other
    }

    pub fn regime(&self) -> AlphaRegime {
        let mid = (self.a + self.b) / 2.0;
        if self.alpha < self.b {
            AlphaRegime::BelowInter
        } else if self.alpha < mid {
            AlphaRegime::InterToMidpoint
        } else if self.alpha < self.a {
            AlphaRegime::MidpointToIntra
        } else {
            AlphaRegime::AboveIntra
        }
    }
}

/// Position of the penalty weight relative to the edge-density factors,
/// which determines the geometry of the drift field's zero lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaRegime {
    /// `alpha < b`
    BelowInter,
    /// `b <= alpha < (a + b) / 2`
    InterToMidpoint,
    /// `(a + b) / 2 <= alpha < a`
    MidpointToIntra,
    /// `a <= alpha`
    AboveIntra,
}

impl std::fmt::Display for AlphaRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AlphaRegime::BelowInter => "alpha < b",
            AlphaRegime::InterToMidpoint => "b <= alpha < (a+b)/2",
            AlphaRegime::MidpointToIntra => "(a+b)/2 <= alpha < a",
            AlphaRegime::AboveIntra => "a <= alpha",
        };
        f.write_str(s)
    }
}

/// Drift signs at one grid point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FieldPoint {
    pub z1: f64,
    pub z2: f64,
    pub sign1: i8,
    pub sign2: i8,
}

/// Sign field of the two drifts over a grid, with the slopes of the two
/// zero lines (`None` for a vertical line) and the regime classification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionField {
    pub points: Vec<FieldPoint>,
    pub slope_line1: Option<f64>,
    pub slope_line2: Option<f64>,
    pub regime: AlphaRegime,
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Evaluates the drift signs on `grid` and reports the zero-line slopes.
///
/// The line where community 1's drift vanishes is
/// `z2 = -(a - alpha) v1 / ((b - alpha) v2) * z1` (vertical when
/// `alpha = b`), and symmetrically for community 2.
pub fn direction_field(grid: &[(f64, f64)], p: &DriftParams) -> DirectionField {
    let points = grid
        .iter()
        .map(|&(z1, z2)| FieldPoint {
            z1,
            z2,
            sign1: sign_of(p.drift((z1, z2), 1)),
            sign2: sign_of(p.drift((z1, z2), 2)),
        })
        .collect();
    let slope = |num: f64, den: f64| {
        if den == 0.0 {
            None
        } else {
            Some(-num / den)
        }
    };
    DirectionField {
        points,
        slope_line1: slope((p.a - p.alpha) * p.v1, (p.b - p.alpha) * p.v2),
        slope_line2: slope((p.b - p.alpha) * p.v1, (p.a - p.alpha) * p.v2),
        regime: p.regime(),
    }
}

/// `k x k` grid of magnetization pairs covering `[-1, 1]^2` row by row.
pub fn square_grid(k: usize) -> Vec<(f64, f64)> {
    let coord = |i: usize| {
        if k <= 1 {
            0.0
        } else {
            -1.0 + 2.0 * i as f64 / (k - 1) as f64
        }
    };
    let mut grid = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            grid.push((coord(j), coord(i)));
        }
    }
    grid
}

/// Pointwise and worst-case distance between a sampled trajectory and the
/// limit curve for the same reveal fraction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Deviation {
    pub times: Vec<f64>,
    pub dev1: Vec<f64>,
    pub dev2: Vec<f64>,
    /// Largest of all per-sample deviations in either community.
    pub sup: f64,
}

/// Compares a trajectory's samples against the limit curve started from
/// `eta`, returning per-time distances and their supremum over the grid.
pub fn deviation(traj: &Trajectory, eta: f64) -> Result<Deviation, MeanFieldError> {
    let curve = MeanFieldCurve::new(eta)?;
    if traj.times.len() != traj.z1.len() || traj.times.len() != traj.z2.len() {
        return Err(MeanFieldError::GridMismatch);
    }
    let mut dev1 = Vec::with_capacity(traj.times.len());
    let mut dev2 = Vec::with_capacity(traj.times.len());
    let mut sup = 0.0f64;
    for (i, &t) in traj.times.iter().enumerate() {
        let (l1, l2) = curve.value(t);
        let d1 = (traj.z1[i] - l1).abs();
        let d2 = (traj.z2[i] - l2).abs();
        sup = sup.max(d1).max(d2);
        dev1.push(d1);
        dev2.push(d2);
    }
    Ok(Deviation {
        times: traj.times.clone(),
        dev1,
        dev2,
        sup,
    })
}

/// Fixed-step fourth-order Runge-Kutta integrator for small systems; used
/// to cross-check closed-form solutions in tests.
pub fn rk4<F>(f: F, y0: &[f64], t0: f64, t1: f64, steps: usize) -> Vec<f64>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    assert!(steps > 0 && t1 >= t0);
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.to_vec();
    let mut t = t0;
    let combine = |y: &[f64], k: &[f64], w: f64| -> Vec<f64> {
        y.iter().zip(k).map(|(yi, ki)| yi + w * ki).collect()
    };
    for _ in 0..steps {
        let k1 = f(t, &y);
        let k2 = f(t + h / 2.0, &combine(&y, &k1, h / 2.0));
        let k3 = f(t + h / 2.0, &combine(&y, &k2, h / 2.0));
        let k4 = f(t + h, &combine(&y, &k3, h));
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;
    }
    y
}
