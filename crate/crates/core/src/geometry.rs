//! Kresling segment geometry and fold kinematics.
//!
//! A segment is two regular n-gons of circumradius `R` joined by 2n
//! congruent triangles with edges `s` (polygon side), `b` (panel side) and
//! `d` (valley diagonal). The fold angle `alpha` is the relative rotation of
//! the top polygon; `s` and `d` stay rigid while `b` and the height `h`
//! follow it. Panel thickness is accounted for through the minimum bent
//! height `h0`, which lifts the classical lengths to the generalized ones.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative slack used when checking that a fold angle is inside its stops.
const ANGLE_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs at least 3 sides, got {0}")]
    TooFewSides(u32),
    #[error("at least one segment is required, got {0}")]
    NoSegments(u32),
    #[error("angle ratio must satisfy 0 < lambda <= 1, got {0}")]
    LambdaOutOfRange(f64),
    #[error("monostable configuration: lambda = {0} must exceed 0.5")]
    Monostable(f64),
    #[error("outer radius must be positive, got {0} mm")]
    NonPositiveRadius(f64),
    #[error("minimum bent height must be non-negative, got {0} mm")]
    NegativeBentHeight(f64),
    #[error("fold angle {alpha} rad outside [{min}, {max}]")]
    FoldAngleOutOfRange { alpha: f64, min: f64, max: f64 },
    #[error("edges ({0}, {1}, {2}) violate the triangle inequality")]
    DegenerateTriangle(f64, f64, f64),
}

/// Independent parameters of a Kresling cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KreslingParams {
    /// Polygon side count `n`.
    pub sides: u32,
    /// Segment count `m`.
    pub segments: u32,
    /// Angle ratio `lambda`.
    pub lambda: f64,
    /// Outer radius `R`, mm.
    pub radius_mm: f64,
    /// Minimum bent (folded) segment height `h0`, mm.
    pub h0_mm: f64,
}

impl KreslingParams {
    pub fn new(
        sides: u32,
        segments: u32,
        lambda: f64,
        radius_mm: f64,
        h0_mm: f64,
    ) -> Result<Self, GeometryError> {
        let params = Self {
            sides,
            segments,
            lambda,
            radius_mm,
            h0_mm,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds the parameters from cave-style bounds: `R = D/2`, `h0 = H0/m`.
    pub fn from_bounds(
        sides: u32,
        segments: u32,
        lambda: f64,
        diameter_mm: f64,
        folded_height_mm: f64,
    ) -> Result<Self, GeometryError> {
        if segments == 0 {
            return Err(GeometryError::NoSegments(0));
        }
        Self::new(
            sides,
            segments,
            lambda,
            diameter_mm / 2.0,
            folded_height_mm / f64::from(segments),
        )
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.sides < 3 {
            return Err(GeometryError::TooFewSides(self.sides));
        }
        if self.segments < 1 {
            return Err(GeometryError::NoSegments(self.segments));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(GeometryError::LambdaOutOfRange(self.lambda));
        }
        if !(self.radius_mm > 0.0) || !self.radius_mm.is_finite() {
            return Err(GeometryError::NonPositiveRadius(self.radius_mm));
        }
        if !(self.h0_mm >= 0.0) || !self.h0_mm.is_finite() {
            return Err(GeometryError::NegativeBentHeight(self.h0_mm));
        }
        Ok(())
    }

    pub fn is_bistable(&self) -> bool {
        self.lambda > 0.5
    }

    /// Number of polygon vertices over the whole stack, `n (m + 1)`.
    pub fn vertex_count(&self) -> usize {
        self.sides as usize * (self.segments as usize + 1)
    }
}

/// Whether [`derive_segment`] should refuse monostable ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Any,
    RequireBistable,
}

/// Per-segment derived quantities. Lengths in mm, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentGeometry {
    pub phi: f64,
    pub gamma: f64,
    pub side: f64,
    pub classic_side: f64,
    pub classic_diagonal: f64,
    pub side_g: f64,
    pub diagonal_g: f64,
    pub theta_g: f64,
    pub alpha_folded: f64,
    pub alpha_deployed: f64,
    /// `lambda == 1`: the segment deploys into an untwisted prism.
    pub untwisted: bool,
}

impl SegmentGeometry {
    /// Area of one regular n-gon cap, mm^2.
    pub fn cap_area(&self, sides: u32) -> f64 {
        f64::from(sides) * self.side * self.side / (4.0 * self.phi.tan())
    }

    /// Area of one wall triangle with edges `(s, b_g, d_g)`, mm^2.
    pub fn wall_triangle_area(&self) -> Result<f64, GeometryError> {
        heron_area(self.side, self.side_g, self.diagonal_g)
    }
}

pub fn derive_segment(
    params: &KreslingParams,
    stability: Stability,
) -> Result<SegmentGeometry, GeometryError> {
    params.validate()?;
    if stability == Stability::RequireBistable && !params.is_bistable() {
        return Err(GeometryError::Monostable(params.lambda));
    }
    let n = f64::from(params.sides);
    let r = params.radius_mm;
    let h0 = params.h0_mm;
    let lambda = params.lambda;

    let phi = PI / n;
    let gamma = FRAC_PI_2 - phi;
    let side = 2.0 * r * phi.sin();
    let classic_diagonal = 2.0 * r * (gamma - lambda * gamma).cos();
    let classic_side = (side * side + classic_diagonal * classic_diagonal
        - 2.0 * side * classic_diagonal * (lambda * gamma).cos())
    .max(0.0)
    .sqrt();
    let side_g = classic_side.hypot(h0);
    let diagonal_g = classic_diagonal.hypot(h0);
    let cos_theta =
        (side * side + diagonal_g * diagonal_g - side_g * side_g) / (2.0 * side * diagonal_g);
    let theta_g = cos_theta.clamp(-1.0, 1.0).acos();

    Ok(SegmentGeometry {
        phi,
        gamma,
        side,
        classic_side,
        classic_diagonal,
        side_g,
        diagonal_g,
        theta_g,
        alpha_folded: 2.0 * lambda * gamma,
        alpha_deployed: 2.0 * (1.0 - lambda) * gamma,
        untwisted: lambda == 1.0,
    })
}

/// Kinematic state of a segment at fold angle `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldState {
    pub alpha: f64,
    pub height: f64,
    pub side_b: f64,
    pub strain: f64,
    pub normalized_energy: f64,
}

/// Segment height `h(alpha)` with the folded stop as reference. Returns
/// `None` when the radicand is negative (past the deployed stop).
pub fn segment_height(geom: &SegmentGeometry, params: &KreslingParams, alpha: f64) -> Option<f64> {
    let r = params.radius_mm;
    let h0 = params.h0_mm;
    let two_phi = 2.0 * geom.phi;
    let radicand =
        h0 * h0 + 2.0 * r * r * ((alpha + two_phi).cos() - (geom.alpha_folded + two_phi).cos());
    (radicand >= 0.0).then(|| radicand.sqrt())
}

pub fn fold_state(
    geom: &SegmentGeometry,
    params: &KreslingParams,
    alpha: f64,
) -> Result<FoldState, GeometryError> {
    let lo = geom.alpha_deployed.min(geom.alpha_folded);
    let hi = geom.alpha_deployed.max(geom.alpha_folded);
    let slack = ANGLE_SLACK * hi.abs().max(1.0);
    let out_of_range = || GeometryError::FoldAngleOutOfRange {
        alpha,
        min: lo,
        max: hi,
    };
    if !alpha.is_finite() || alpha < lo - slack || alpha > hi + slack {
        return Err(out_of_range());
    }
    let alpha = alpha.clamp(lo, hi);
    let height = segment_height(geom, params, alpha).ok_or_else(out_of_range)?;
    let r = params.radius_mm;
    let side_b = (2.0 * r * r * (1.0 - alpha.cos()) + height * height).sqrt();
    let strain = side_b / geom.side_g - 1.0;
    Ok(FoldState {
        alpha,
        height,
        side_b,
        strain,
        normalized_energy: 0.5 * strain * strain,
    })
}

pub fn heron_area(a: f64, b: f64, c: f64) -> Result<f64, GeometryError> {
    let p = 0.5 * (a + b + c);
    let product = p * (p - a) * (p - b) * (p - c);
    if !(a > 0.0 && b > 0.0 && c > 0.0) || p - a < 0.0 || p - b < 0.0 || p - c < 0.0 {
        return Err(GeometryError::DegenerateTriangle(a, b, c));
    }
    Ok(product.max(0.0).sqrt())
}
