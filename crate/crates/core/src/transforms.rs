//! Relation-specific actions in the Poincare ball: block-diagonal Givens
//! rotations and reflections, the two-way tangent-space attention, and the
//! Mobius translation that follows them.

use crate::error::{Error, Result};
use crate::geometry::{
    self, exp_map_zero, log_map_zero, mobius_add, PoincarePoint, TangentVector,
};
use crate::model::{ModelVariant, RelationParams};
use crate::numeric::{softmax, softplus};

/// One angle per 2x2 block; length is `N/2` for embedding dimension `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GivensAngles {
    angles: Vec<f64>,
}

impl GivensAngles {
    pub fn new(angles: Vec<f64>) -> Self {
        Self { angles }
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// The relation's attention vector in the tangent space at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionVector {
    coords: Vec<f64>,
}

impl AttentionVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(
                "attention vector entries must be finite".into(),
            ));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

fn check_block_count(x_len: usize, angle_len: usize, context: &'static str) -> Result<()> {
    if x_len % 2 != 0 || angle_len != x_len / 2 {
        return Err(Error::DimensionMismatch {
            context,
            left: x_len,
            right: angle_len,
        });
    }
    Ok(())
}

/// `G+(theta)` applied blockwise: rotation of each consecutive coordinate pair.
pub(crate) fn givens_rotate_raw(x: &[f64], angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    for (j, &theta) in angles.iter().enumerate() {
        let (s, c) = theta.sin_cos();
        let (a, b) = (x[2 * j], x[2 * j + 1]);
        out.push(a * c - b * s);
        out.push(a * s + b * c);
    }
    out
}

/// `G-(phi)` applied blockwise: reflection of each consecutive coordinate pair.
pub(crate) fn givens_reflect_raw(x: &[f64], angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    for (j, &phi) in angles.iter().enumerate() {
        let (s, c) = phi.sin_cos();
        let (a, b) = (x[2 * j], x[2 * j + 1]);
        out.push(a * c + b * s);
        out.push(a * s - b * c);
    }
    out
}

/// Block-diagonal Givens rotation; preserves the Euclidean norm.
pub fn givens_rotate(x: &[f64], theta: &GivensAngles) -> Result<Vec<f64>> {
    check_block_count(x.len(), theta.len(), "givens_rotate")?;
    Ok(givens_rotate_raw(x, &theta.angles))
}

/// Block-diagonal Givens reflection; an involution that preserves the norm.
pub fn givens_reflect(x: &[f64], phi: &GivensAngles) -> Result<Vec<f64>> {
    check_block_count(x.len(), phi.len(), "givens_reflect")?;
    Ok(givens_reflect_raw(x, &phi.angles))
}

/// Softmax-weighted combination of two ball points, performed in the tangent
/// space at the origin: weights come from the inner products of `a` with the
/// log-mapped points, and the weighted average is mapped back with exp.
pub fn hyperbolic_attention(
    q_rot: &PoincarePoint,
    q_ref: &PoincarePoint,
    a: &AttentionVector,
) -> Result<PoincarePoint> {
    if q_rot.dim() != q_ref.dim() || q_rot.dim() != a.coords.len() {
        return Err(Error::DimensionMismatch {
            context: "hyperbolic_attention",
            left: q_rot.dim(),
            right: a.coords.len(),
        });
    }
    if q_rot.curvature() != q_ref.curvature() {
        return Err(Error::Domain(
            "hyperbolic_attention: points have different curvatures".into(),
        ));
    }
    let u = log_map_zero(q_rot);
    let v = log_map_zero(q_ref);
    let logits = [
        geometry::dot(&a.coords, u.coords()),
        geometry::dot(&a.coords, v.coords()),
    ];
    let w = softmax(&logits);
    let mid: Vec<f64> = u
        .coords()
        .iter()
        .zip(v.coords())
        .map(|(ui, vi)| w[0] * ui + w[1] * vi)
        .collect();
    exp_map_zero(&TangentVector::new(mid)?, q_rot.curvature())
}

/// Applies the relation's geometric action for the given model variant and
/// Mobius-adds the relation translation (stored in tangent space, lifted with
/// the relation curvature).
pub fn apply_relation(
    h: &PoincarePoint,
    rel: &RelationParams,
    variant: ModelVariant,
) -> Result<PoincarePoint> {
    let c = softplus(rel.raw_curvature);
    if h.curvature() != c {
        return Err(Error::Domain(format!(
            "apply_relation: point curvature {} does not match relation curvature {c}",
            h.curvature()
        )));
    }
    let transformed = match variant {
        ModelVariant::RotH | ModelVariant::FftRotH => {
            PoincarePoint::new(givens_rotate(h.coords(), &rel.rotation_angles)?, c)?
        }
        ModelVariant::RefH | ModelVariant::FftRefH => {
            PoincarePoint::new(givens_reflect(h.coords(), &rel.reflection_angles)?, c)?
        }
        ModelVariant::AttH | ModelVariant::FftAttH => {
            let rot = PoincarePoint::new(givens_rotate(h.coords(), &rel.rotation_angles)?, c)?;
            let refl = PoincarePoint::new(givens_reflect(h.coords(), &rel.reflection_angles)?, c)?;
            hyperbolic_attention(&rot, &refl, &rel.attention)?
        }
    };
    let translation = exp_map_zero(&TangentVector::new(rel.translation.clone())?, c)?;
    mobius_add(&transformed, &translation)
}
