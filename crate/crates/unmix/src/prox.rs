//! Closed-form proximal and projection operators used in the u-updates.
//!
//! The pure functions are the specification of record; the `_in_place`
//! variants exist for the solver hot loops.

use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::scalar::Real;

/// Closed Euclidean ball `{z : ‖z − center‖₂ ≤ radius}`.
#[derive(Debug, Clone, Copy)]
pub struct Ball<'a, T> {
    center: &'a DenseVector<T>,
    radius: T,
}

impl<'a, T: Real> Ball<'a, T> {
    pub fn new(center: &'a DenseVector<T>, radius: T) -> Result<Self> {
        if !(radius >= T::zero()) || !radius.is_finite() {
            return Err(Error::NegativeDelta);
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &DenseVector<T> {
        self.center
    }

    pub fn radius(&self) -> T {
        self.radius
    }
}

fn check_tau<T: Real>(tau: T) -> Result<()> {
    if !(tau >= T::zero()) || !tau.is_finite() {
        return Err(Error::NegativeThreshold);
    }
    Ok(())
}

/// Componentwise `sign(vᵢ)·max(|vᵢ|−τ, 0)`.
pub fn soft_threshold<T: Real>(v: &DenseVector<T>, tau: T) -> Result<DenseVector<T>> {
    check_tau(tau)?;
    let mut out = v.clone();
    soft_threshold_in_place(out.as_mut_slice(), tau);
    Ok(out)
}

pub fn soft_threshold_in_place<T: Real>(v: &mut [T], tau: T) {
    for x in v {
        let mag = x.abs() - tau;
        *x = if mag > T::zero() {
            mag * x.signum()
        } else {
            T::zero()
        };
    }
}

/// Soft threshold followed by projection onto the first orthant:
/// componentwise `max(0, vᵢ − τ)`.
pub fn soft_threshold_nonneg<T: Real>(v: &DenseVector<T>, tau: T) -> Result<DenseVector<T>> {
    check_tau(tau)?;
    let mut out = v.clone();
    soft_threshold_nonneg_in_place(out.as_mut_slice(), tau);
    Ok(out)
}

pub fn soft_threshold_nonneg_in_place<T: Real>(v: &mut [T], tau: T) {
    for x in v {
        *x = (*x - tau).max(T::zero());
    }
}

/// Projection onto a Euclidean ball. `v` is returned unchanged when already
/// inside; otherwise it is pulled radially to the boundary. A degenerate
/// ball (radius 0, v at the center) returns the center.
pub fn project_ball<T: Real>(v: &DenseVector<T>, ball: &Ball<'_, T>) -> Result<DenseVector<T>> {
    if v.len() != ball.center.len() {
        return Err(Error::DimensionMismatch {
            context: "project_ball",
            expected: ball.center.len(),
            got: v.len(),
        });
    }
    let mut out = v.clone();
    project_ball_in_place(&mut out, ball);
    Ok(out)
}

pub fn project_ball_in_place<T: Real>(v: &mut DenseVector<T>, ball: &Ball<'_, T>) {
    let dist = v.dist2(ball.center);
    // The slack makes the projection exactly idempotent: a point just
    // placed on the boundary re-enters through the inside branch. The
    // absolute term covers radii below the rounding floor of points stored
    // near an off-origin center.
    let slack = ball.radius * crate::scalar::lit(1e-14)
        + T::epsilon() * crate::scalar::lit::<T>(32.0) * (ball.radius + ball.center.norm2());
    if dist <= ball.radius + slack {
        return;
    }
    let scale = ball.radius / dist;
    for (out, c) in v.as_mut_slice().iter_mut().zip(ball.center.iter()) {
        *out = *c + (*out - *c) * scale;
    }
}
