//! Meromorphic quadratic differentials `Q(z) dz²` with prescribed zeros and
//! poles, and the horizontal line field they induce.
//!
//! `Q(z) = c² ∏ (z − p)^{n_p}` where `n_p = 2` at growth points and `2σ` at
//! marked points. Only the argument of `Q` matters for trajectories, so every
//! evaluation runs in log space: `arg Q(z) = 2 arg c + Σ n_p arg(z − p)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::divisor::{Domain, SymmetricDivisor, DISTINCT_TOL};
use crate::error::{Error, Result};
use crate::loewner::LoewnerState;

/// Direction-field evaluation is refused this close to a singularity.
pub const PROXIMITY_RADIUS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Growth,
    Marked,
}

/// One factor `(z − point)^order` of `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factor {
    pub point: Complex64,
    pub order: i32,
    pub kind: FactorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadDifferential {
    pub domain: Domain,
    pub factors: Vec<Factor>,
    /// Unimodular constant `c`; `Q` carries `c²`.
    pub phase: Complex64,
}

/// Local structure of `Q` at one of its factors.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularityInfo {
    pub point: Complex64,
    pub order: i32,
    pub kind: FactorKind,
    /// Separatrix directions at a zero (`order + 2` of them), or the
    /// directions along which trajectories run into a pole of order ≥ 3
    /// (`|order| − 2` of them, measured from the pole). Sorted in `[0, 2π)`.
    pub separatrix_angles: Vec<f64>,
}

fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

impl QuadDifferential {
    /// Builds the differential of a divisor whose charges are all half-integers,
    /// with the phase fixed so that the first boundary arc is horizontal.
    pub fn build(divisor: &SymmetricDivisor) -> Result<Self> {
        let report = divisor.validate();
        if !report.is_admissible() {
            return Err(Error::InvalidDivisor(report.to_string()));
        }
        let mut factors = Vec::with_capacity(divisor.growth.len() + divisor.marked.len());
        for g in &divisor.growth {
            let point = g
                .finite()
                .ok_or_else(|| Error::InvalidDivisor("growth point at infinity".into()))?;
            factors.push(Factor {
                point,
                order: 2,
                kind: FactorKind::Growth,
            });
        }
        for (p, charge) in &divisor.marked {
            let order = charge
                .twice()
                .ok_or(Error::UnsupportedCharge(charge.value()))?;
            if let (Some(point), true) = (p.finite(), order != 0) {
                factors.push(Factor {
                    point,
                    order: order as i32,
                    kind: FactorKind::Marked,
                });
            }
        }
        Self::normalized(divisor.domain, factors)
    }

    /// A differential with the given factors and its boundary-horizontal phase.
    pub fn normalized(domain: Domain, factors: Vec<Factor>) -> Result<Self> {
        let mut qd = QuadDifferential {
            domain,
            factors,
            phase: Complex64::new(1.0, 0.0),
        };
        qd.phase = qd.normalize_phase(0)?;
        Ok(qd)
    }

    /// Order at ∞ forced by the degree identity `Σ orders = −4`.
    pub fn infinity_order(&self) -> i32 {
        -4 - self.factors.iter().map(|f| f.order).sum::<i32>()
    }

    /// Singular factors lying on the domain boundary, sorted along it.
    fn boundary_points(&self) -> Vec<Complex64> {
        let mut pts: Vec<Complex64> = self
            .factors
            .iter()
            .map(|f| f.point)
            .filter(|p| self.domain.on_boundary(&(*p).into()))
            .collect();
        match self.domain {
            Domain::HalfPlane => pts.sort_by(|a, b| a.re.total_cmp(&b.re)),
            Domain::Disk => pts.sort_by(|a, b| wrap_angle(a.arg()).total_cmp(&wrap_angle(b.arg()))),
        }
        pts
    }

    /// Midpoint of boundary arc `arc` and the unit tangent there. Arcs are
    /// counted from the first boundary singularity in increasing position
    /// (half-plane) or angle (disk); the last arc wraps around.
    pub fn reference_point(&self, arc: usize) -> (Complex64, Complex64) {
        let pts = self.boundary_points();
        match self.domain {
            Domain::HalfPlane => {
                let x = match pts.len() {
                    0 => 0.0,
                    m => {
                        let k = arc % m;
                        if k + 1 < m {
                            0.5 * (pts[k].re + pts[k + 1].re)
                        } else {
                            pts[m - 1].re + 1.0
                        }
                    }
                };
                (Complex64::new(x, 0.0), Complex64::new(1.0, 0.0))
            }
            Domain::Disk => {
                let theta = match pts.len() {
                    0 => 0.0,
                    m => {
                        let k = arc % m;
                        let a = wrap_angle(pts[k].arg());
                        let b = if k + 1 < m {
                            wrap_angle(pts[k + 1].arg())
                        } else {
                            wrap_angle(pts[0].arg()) + TAU
                        };
                        0.5 * (a + b)
                    }
                };
                let w = Complex64::from_polar(1.0, theta);
                (w, Complex64::i() * w)
            }
        }
    }

    /// `arg Q(z)` including the current phase.
    pub fn arg_q(&self, z: Complex64) -> f64 {
        2.0 * self.phase.arg()
            + self
                .factors
                .iter()
                .map(|f| f.order as f64 * (z - f.point).arg())
                .sum::<f64>()
    }

    /// Correction `c` such that `c²·Q·τ²` is real and positive at the middle
    /// of boundary arc `arc`. Returns `±1` when `Q` is already normalized.
    pub fn normalize_phase(&self, arc: usize) -> Result<Complex64> {
        let (w, tau) = self.reference_point(arc);
        if self
            .factors
            .iter()
            .any(|f| (w - f.point).norm() <= PROXIMITY_RADIUS)
        {
            return Err(Error::InvalidReference(w));
        }
        // Reduce to (−π, π] so that an already positive Q gives exactly 1.
        let arg = self.arg_q(w) + 2.0 * tau.arg();
        let arg = PI - (PI - arg).rem_euclid(TAU);
        Ok(Complex64::from_polar(1.0, -0.5 * arg))
    }

    /// Distance to the nearest factor point and that factor's index.
    pub fn nearest_singularity(&self, z: Complex64) -> Option<(usize, f64)> {
        self.factors
            .iter()
            .enumerate()
            .map(|(k, f)| (k, (z - f.point).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// `∏ (z − p)^{n_p/2}` with principal-branch powers, without the phase.
    pub fn sqrt_product(&self, z: Complex64) -> Complex64 {
        let log: Complex64 = self
            .factors
            .iter()
            .map(|f| 0.5 * f.order as f64 * (z - f.point).ln())
            .sum();
        log.exp()
    }

    /// Horizontal unit direction at `z`, with the sign picked against `prev`.
    /// No proximity check.
    pub(crate) fn line_direction(&self, z: Complex64, prev: Option<Complex64>) -> Complex64 {
        let theta = self.phase.arg()
            + self
                .factors
                .iter()
                .map(|f| 0.5 * f.order as f64 * (z - f.point).arg())
                .sum::<f64>();
        let u = Complex64::from_polar(1.0, -theta);
        let flip = match prev {
            Some(p) => (u * p.conj()).re < 0.0,
            None => u.im < 0.0 || (u.im == 0.0 && u.re < 0.0),
        };
        if flip {
            -u
        } else {
            u
        }
    }

    /// The unit vector `u` with `Q(z) u² > 0`. Of the two choices, the one
    /// making a non-negative inner product with `prev`, or with argument in
    /// `[0, π)` when there is no previous direction.
    pub fn direction_field(&self, z: Complex64, prev: Option<Complex64>) -> Result<Complex64> {
        if let Some((k, d)) = self.nearest_singularity(z) {
            if d <= PROXIMITY_RADIUS {
                return Err(Error::TooCloseToSingularity {
                    point: z,
                    singularity: self.factors[k].point,
                    radius: PROXIMITY_RADIUS,
                });
            }
        }
        Ok(self.line_direction(z, prev))
    }

    /// `arg` of the leading coefficient `a` in `c²Q(z) ≈ a (z − p)^n` at
    /// factor `k`.
    fn leading_arg(&self, k: usize) -> f64 {
        let p = self.factors[k].point;
        2.0 * self.phase.arg()
            + self
                .factors
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, f)| f.order as f64 * (p - f.point).arg())
                .sum::<f64>()
    }

    /// Local structure at every factor.
    pub fn classify_singularities(&self) -> Vec<SingularityInfo> {
        (0..self.factors.len())
            .map(|k| {
                let f = self.factors[k];
                let arg_a = self.leading_arg(k);
                let mut angles: Vec<f64> = if f.order >= 1 {
                    let n = f.order as f64;
                    (0..f.order + 2)
                        .map(|j| wrap_angle((TAU * j as f64 - arg_a) / (n + 2.0)))
                        .collect()
                } else if f.order <= -3 {
                    let m = -f.order - 2;
                    (0..m)
                        .map(|j| wrap_angle((arg_a + TAU * j as f64) / m as f64))
                        .collect()
                } else {
                    Vec::new()
                };
                angles.sort_by(f64::total_cmp);
                SingularityInfo {
                    point: f.point,
                    order: f.order,
                    kind: f.kind,
                    separatrix_angles: angles,
                }
            })
            .collect()
    }

    /// The differential carried to time `t` by the Loewner flow: same orders,
    /// factor points replaced by the evolved growth and marked points.
    pub fn pullback(&self, state: &LoewnerState) -> Result<QuadDifferential> {
        if self.domain != Domain::HalfPlane {
            return Err(Error::InvalidParameter(
                "pullback needs a half-plane differential".into(),
            ));
        }
        let growth = self.factors.iter().filter(|f| f.kind == FactorKind::Growth).count();
        let marked = self.factors.len() - growth;
        if growth != state.x.len() || marked != state.q.len() {
            return Err(Error::InvalidParameter(format!(
                "state has {} driving and {} marked points, differential has {growth} and {marked}",
                state.x.len(),
                state.q.len()
            )));
        }
        let mut xs = state.x.iter();
        let mut qs = state.q.iter();
        let factors: Vec<Factor> = self
            .factors
            .iter()
            .map(|f| {
                let point = match f.kind {
                    FactorKind::Growth => Complex64::new(*xs.next().unwrap(), 0.0),
                    FactorKind::Marked => qs.next().unwrap().0,
                };
                Factor { point, ..*f }
            })
            .collect();
        for (i, a) in factors.iter().enumerate() {
            for b in &factors[i + 1..] {
                if (a.point - b.point).norm() <= DISTINCT_TOL {
                    return Err(Error::Degenerate(format!(
                        "evolved points {} and {} collide at t = {}",
                        a.point, b.point, state.t
                    )));
                }
            }
        }
        Self::normalized(Domain::HalfPlane, factors)
    }

    /// Whether the factor multiset is closed under the domain reflection.
    pub fn is_reflection_symmetric(&self, tol: f64) -> bool {
        self.factors.iter().all(|f| {
            let mirror = crate::divisor::SpherePoint::Finite(f.point).reflect(self.domain);
            match mirror.finite() {
                Some(m) => self
                    .factors
                    .iter()
                    .any(|g| g.order == f.order && (g.point - m).norm() <= tol * m.norm().max(1.0)),
                // 0 in the disk mirrors ∞, which carries the induced order.
                None => self.infinity_order() == f.order,
            }
        })
    }
}

/// Angle between two line directions, in `[0, π/2]`.
pub fn line_angle(a: Complex64, b: Complex64) -> f64 {
    let d = (a * b.conj()).arg().abs();
    d.min(PI - d)
}
