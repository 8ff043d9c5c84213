//! Single-qubit resynthesis into the `rz`/`sx` basis.

use super::{Angle, Op};
use crate::gate::GateKind;
use crate::matrix::CMatrix;
use std::f64::consts::{FRAC_PI_2, PI};

const ANGLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EulerError {
    #[error("matrix is not a 2x2 unitary")]
    NotUnitary,
}

/// ZYZ angles `(theta, phi, lambda)` with `u ≅ Rz(phi)·Ry(theta)·Rz(lambda)`.
fn zyz_angles(u: &CMatrix) -> (f64, f64, f64) {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let coeff = det.sqrt().inv();
    let v00 = u[(0, 0)] * coeff;
    let v10 = u[(1, 0)] * coeff;
    let v11 = u[(1, 1)] * coeff;
    let theta = 2.0 * v10.norm().atan2(v00.norm());
    let sum_half = v11.arg();
    let diff_half = v10.arg();
    (theta, sum_half + diff_half, sum_half - diff_half)
}

fn near(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(2.0 * PI);
    d < ANGLE_TOL || 2.0 * PI - d < ANGLE_TOL
}

fn push_rz(ops: &mut Vec<Op>, theta: f64) {
    let a = Angle::from_radians(theta);
    if !a.is_zero() {
        ops.push(Op::Rz(a));
    }
}

/// Rewrites a 2x2 unitary as `rz · sx · rz · sx · rz` (circuit order), using
/// the shortest template: no `sx` for diagonal gates, one when the Y-rotation
/// is a quarter turn, two otherwise. Zero rotations are dropped.
pub fn euler_1q(u: &CMatrix) -> Result<Vec<Op>, EulerError> {
    if u.dim() != 2 || !u.is_unitary(1e-10) {
        return Err(EulerError::NotUnitary);
    }
    let (theta, phi, lambda) = zyz_angles(u);
    let mut ops = Vec::with_capacity(5);
    if near(theta, 0.0) {
        push_rz(&mut ops, phi + lambda);
    } else if near(theta, FRAC_PI_2) {
        push_rz(&mut ops, lambda - FRAC_PI_2);
        ops.push(Op::Gate(GateKind::Sx));
        push_rz(&mut ops, phi + FRAC_PI_2);
    } else {
        push_rz(&mut ops, lambda);
        ops.push(Op::Gate(GateKind::Sx));
        push_rz(&mut ops, theta + PI);
        ops.push(Op::Gate(GateKind::Sx));
        push_rz(&mut ops, phi + PI);
    }
    Ok(ops)
}
