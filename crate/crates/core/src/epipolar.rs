//! Constraint-line prediction for points beyond the basis seven.
//!
//! Given an eighth point's frame-1 image Z' and a focal solution, the point's
//! frame-2 image must lie on the line through F1'' and the transferred
//! image of the intersection of ray F1-Z with plane PQR. The frame-1 images
//! of the coplanar quadruple {P, Q, R, B} are {P', Q', R', A'} — B sits on
//! ray F1-A, so it shares A's first image — which is what makes the transfer
//! possible without knowing any 3D geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::focal::FocalSolution;
use crate::frame::LabeledFrame;
use crate::geometry::{line_through, point_line_distance, Line2, Point2};
use crate::transfer::{dq_coordinates, transfer_point, PlanarBasis};

/// Which auxiliary quadruple anchored the transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransferBasis {
    /// {P,Q,R,B} seen as {P',Q',R',A'} / {P'',Q'',R'',B''}.
    AuxiliaryB,
    /// {P,Q,R,D} seen as {P',Q',R',C'} / {P'',Q'',R'',D''}; fallback.
    AuxiliaryD,
}

/// The line in frame 2 on which the eighth point's image must lie.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedLine {
    pub line: Line2,
    /// Transferred image of the ray's intersection with plane PQR.
    pub via: Point2,
    /// F1''.
    pub anchor: Point2,
    pub basis_used: TransferBasis,
}

/// Predicts the frame-2 constraint line for a point with frame-1 image
/// `z_prime`.
pub fn predict_line(
    z_prime: Point2,
    frame1: &LabeledFrame,
    frame2: &LabeledFrame,
    solution: &FocalSolution,
) -> Result<PredictedLine> {
    predict_from_basis(z_prime, &frame1.basis()?, &frame2.basis()?, solution)
}

/// Same as [`predict_line`] for basis points already in role order
/// R, Q, P, A, C, E, G.
pub fn predict_from_basis(
    z_prime: Point2,
    basis1: &[Point2; 7],
    basis2: &[Point2; 7],
    solution: &FocalSolution,
) -> Result<PredictedLine> {
    if !solution.f1pp.is_finite() {
        return Err(Error::InvalidSolution);
    }
    let (r1, q1, p1) = (basis1[0], basis1[1], basis1[2]);
    let (r2, q2, p2) = (basis2[0], basis2[1], basis2[2]);

    let attempt = |fourth1: Point2, fourth2: Point2, tag: TransferBasis| -> Result<PredictedLine> {
        let source = PlanarBasis::new(p1, q1, r1, fourth1)?;
        let target = PlanarBasis::new(p2, q2, r2, fourth2)?;
        let coords = dq_coordinates(z_prime, &source)?;
        let via = transfer_point(coords, &target)?;
        let line = line_through(solution.f1pp, via).map_err(|_| {
            Error::DegenerateConfiguration("predicted point coincides with F1''".into())
        })?;
        Ok(PredictedLine {
            line,
            via,
            anchor: solution.f1pp,
            basis_used: tag,
        })
    };

    // A' (image of B) is the deterministic first choice; fall back to the
    // C'/D'' quadruple when it degenerates or lands on F1''.
    match attempt(basis1[3], solution.aux_b, TransferBasis::AuxiliaryB) {
        Ok(pl) => Ok(pl),
        Err(_) => attempt(basis1[4], solution.aux_d, TransferBasis::AuxiliaryD),
    }
}

/// Distance of an observed frame-2 position from the predicted line.
pub fn line_residual(z_double_prime: Point2, predicted: &PredictedLine) -> f64 {
    point_line_distance(z_double_prime, predicted.line)
}
