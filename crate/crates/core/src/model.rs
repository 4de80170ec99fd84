//! Parameter store and the end-to-end query pipeline: lift the head entity
//! into the relation's Poincare ball, apply the relation transform, and score
//! against the tail either in the real ball or (for the FFT variants) in the
//! complex unit ball after the orthonormal DFT bridge.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{
    bergman_distance, exp_map_zero, poincare_distance, ComplexBallPoint, PoincarePoint,
    TangentVector, BALL_EPS,
};
use crate::grad::{self, Curvature, NodeId, ParamSlot, Tape};
use crate::numeric::softplus;
use crate::spectral::{dft_forward, RealSignal};
use crate::transforms::{apply_relation, AttentionVector, GivensAngles};

/// The six model variants: three relation transforms, each scored either in
/// the real ball or in the complex ball behind the DFT bridge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelVariant {
    RefH,
    RotH,
    AttH,
    FftRefH,
    FftRotH,
    FftAttH,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 6] = [
        ModelVariant::RefH,
        ModelVariant::RotH,
        ModelVariant::AttH,
        ModelVariant::FftRefH,
        ModelVariant::FftRotH,
        ModelVariant::FftAttH,
    ];

    pub fn is_fft(self) -> bool {
        matches!(
            self,
            ModelVariant::FftRefH | ModelVariant::FftRotH | ModelVariant::FftAttH
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::RefH => "RefH",
            ModelVariant::RotH => "RotH",
            ModelVariant::AttH => "AttH",
            ModelVariant::FftRefH => "FFTRefH",
            ModelVariant::FftRotH => "FFTRotH",
            ModelVariant::FftAttH => "FFTAttH",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            ModelVariant::RefH => 0,
            ModelVariant::RotH => 1,
            ModelVariant::AttH => 2,
            ModelVariant::FftRefH => 3,
            ModelVariant::FftRotH => 4,
            ModelVariant::FftAttH => 5,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.code() == code)
            .ok_or_else(|| Error::Checkpoint(format!("unknown model variant code {code}")))
    }
}

impl std::fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown model variant '{s}' (expected one of RefH, RotH, AttH, FFTRefH, FFTRotH, FFTAttH)"
                ))
            })
    }
}

/// Model shape and initialization settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub variant: ModelVariant,
    /// Real embedding dimension `N` (even; power of two for FFT variants).
    pub dim: usize,
    pub init_scale: f64,
    pub seed: u64,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim % 2 != 0 {
            return Err(Error::Config(format!(
                "embedding dimension must be even and positive, got {}",
                self.dim
            )));
        }
        if self.variant.is_fft() && !self.dim.is_power_of_two() {
            return Err(Error::Config(format!(
                "FFT variants need a power-of-two dimension, got {}",
                self.dim
            )));
        }
        if self.init_scale < 0.0 || !self.init_scale.is_finite() {
            return Err(Error::Config(format!(
                "init_scale must be a nonnegative finite real, got {}",
                self.init_scale
            )));
        }
        Ok(())
    }

    /// Complex ball dimension `n = N/2 + 1` used by the FFT variants.
    pub fn complex_dim(&self) -> usize {
        self.dim / 2 + 1
    }
}

/// Per-relation parameters. The translation is stored in the tangent space
/// at the origin and lifted with the relation curvature at query time; the
/// curvature itself is `softplus(raw_curvature)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationParams {
    pub rotation_angles: GivensAngles,
    pub reflection_angles: GivensAngles,
    pub translation: Vec<f64>,
    pub attention: AttentionVector,
    pub raw_curvature: f64,
}

impl RelationParams {
    pub fn curvature(&self) -> f64 {
        softplus(self.raw_curvature)
    }
}

// Tensor indices of the parameter store; they double as gradient buffer
// indices for the tape.
pub const T_ENTITY_EMBED: usize = 0;
pub const T_ENTITY_BIAS: usize = 1;
pub const T_REL_ROT: usize = 2;
pub const T_REL_REF: usize = 3;
pub const T_REL_TRANS: usize = 4;
pub const T_REL_ATT: usize = 5;
pub const T_REL_CURV: usize = 6;
pub const TENSOR_COUNT: usize = 7;

pub const TENSOR_NAMES: [&str; TENSOR_COUNT] = [
    "entity.embedding",
    "entity.bias",
    "relation.rot",
    "relation.ref",
    "relation.trans",
    "relation.att",
    "relation.raw_c",
];

/// All trainable tensors, stored flat per class.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub n_entities: usize,
    /// Relation count including the inverse relations.
    pub n_relations: usize,
    tensors: [Vec<f64>; TENSOR_COUNT],
}

impl ModelParams {
    /// Fresh parameters: entity embeddings `N(0, init_scale)`, biases zero,
    /// angles uniform in `(-pi, pi)`, translations zero, attention vectors
    /// `N(0, 1e-3)`, raw curvatures zero. Deterministic for a fixed seed.
    pub fn init(n_entities: usize, n_relations: usize, config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        if n_entities == 0 || n_relations == 0 {
            return Err(Error::Config(
                "entity and relation vocabularies must be nonempty".into(),
            ));
        }
        let dim = config.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let embed_dist = Normal::new(0.0, config.init_scale)
            .map_err(|e| Error::Config(format!("bad init_scale: {e}")))?;
        let att_dist = Normal::new(0.0, 1e-3).expect("fixed std");

        let entity_embed: Vec<f64> = (0..n_entities * dim)
            .map(|_| embed_dist.sample(&mut rng))
            .collect();
        let entity_bias = vec![0.0; n_entities];
        let rel_rot: Vec<f64> = (0..n_relations * dim / 2)
            .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        let rel_ref: Vec<f64> = (0..n_relations * dim / 2)
            .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        let rel_trans = vec![0.0; n_relations * dim];
        let rel_att: Vec<f64> = (0..n_relations * dim)
            .map(|_| att_dist.sample(&mut rng))
            .collect();
        let rel_curv = vec![0.0; n_relations];

        Ok(Self {
            config: config.clone(),
            n_entities,
            n_relations,
            tensors: [
                entity_embed,
                entity_bias,
                rel_rot,
                rel_ref,
                rel_trans,
                rel_att,
                rel_curv,
            ],
        })
    }

    pub fn from_tensors(
        config: ModelConfig,
        n_entities: usize,
        n_relations: usize,
        tensors: [Vec<f64>; TENSOR_COUNT],
    ) -> Result<Self> {
        config.validate()?;
        let dim = config.dim;
        let expected = [
            n_entities * dim,
            n_entities,
            n_relations * dim / 2,
            n_relations * dim / 2,
            n_relations * dim,
            n_relations * dim,
            n_relations,
        ];
        for (i, (t, e)) in tensors.iter().zip(expected).enumerate() {
            if t.len() != e {
                return Err(Error::Checkpoint(format!(
                    "tensor {} has {} elements, expected {e}",
                    TENSOR_NAMES[i],
                    t.len()
                )));
            }
        }
        Ok(Self {
            config,
            n_entities,
            n_relations,
            tensors,
        })
    }

    pub fn tensor(&self, idx: usize) -> &[f64] {
        &self.tensors[idx]
    }

    pub fn tensor_mut(&mut self, idx: usize) -> &mut Vec<f64> {
        &mut self.tensors[idx]
    }

    /// Gradient buffers with the same shapes as the tensors, zero-filled.
    pub fn grad_buffers(&self) -> Vec<Vec<f64>> {
        self.tensors.iter().map(|t| vec![0.0; t.len()]).collect()
    }

    fn check_entity(&self, id: u32) -> Result<()> {
        if (id as usize) < self.n_entities {
            Ok(())
        } else {
            Err(Error::Vocab(format!("entity id {id} out of range")))
        }
    }

    fn check_relation(&self, id: u32) -> Result<()> {
        if (id as usize) < self.n_relations {
            Ok(())
        } else {
            Err(Error::Vocab(format!("relation id {id} out of range")))
        }
    }

    pub fn entity_embedding(&self, id: u32) -> &[f64] {
        let dim = self.config.dim;
        &self.tensors[T_ENTITY_EMBED][id as usize * dim..(id as usize + 1) * dim]
    }

    pub fn entity_bias(&self, id: u32) -> f64 {
        self.tensors[T_ENTITY_BIAS][id as usize]
    }

    pub fn relation(&self, id: u32) -> Result<RelationParams> {
        self.check_relation(id)?;
        let dim = self.config.dim;
        let half = dim / 2;
        let i = id as usize;
        Ok(RelationParams {
            rotation_angles: GivensAngles::new(
                self.tensors[T_REL_ROT][i * half..(i + 1) * half].to_vec(),
            ),
            reflection_angles: GivensAngles::new(
                self.tensors[T_REL_REF][i * half..(i + 1) * half].to_vec(),
            ),
            translation: self.tensors[T_REL_TRANS][i * dim..(i + 1) * dim].to_vec(),
            attention: AttentionVector::new(
                self.tensors[T_REL_ATT][i * dim..(i + 1) * dim].to_vec(),
            )?,
            raw_curvature: self.tensors[T_REL_CURV][i],
        })
    }

    pub fn relation_curvature(&self, id: u32) -> f64 {
        softplus(self.tensors[T_REL_CURV][id as usize])
    }
}

/// The point a query or tail is scored at: the real ball for the base
/// variants, the complex unit ball for the FFT variants.
#[derive(Debug, Clone)]
pub enum ScoringPoint {
    Real(PoincarePoint),
    Complex(ComplexBallPoint),
}

/// Packs a real ball point into the complex unit ball: orthonormal DFT,
/// scaled by `sqrt(c)` so the packed norm lands strictly inside the unit
/// ball, then clamped.
pub fn to_complex_ball(p: &PoincarePoint) -> Result<ComplexBallPoint> {
    let spectrum = dft_forward(&RealSignal::new(p.coords().to_vec())?);
    let sc = p.curvature().sqrt();
    let coords: Vec<Complex64> = spectrum.values().iter().map(|z| z * sc).collect();
    Ok(ComplexBallPoint::new(coords))
}

/// Lifts an entity embedding into the curvature-`c` ball.
fn lift_entity(params: &ModelParams, id: u32, c: f64) -> Result<PoincarePoint> {
    exp_map_zero(
        &TangentVector::new(params.entity_embedding(id).to_vec())?,
        c,
    )
}

/// The real-side query embedding shared by a variant and its FFT counterpart.
pub fn query_tilde(params: &ModelParams, head: u32, rel: u32) -> Result<PoincarePoint> {
    params.check_entity(head)?;
    let relation = params.relation(rel)?;
    let c = relation.curvature();
    let h_tilde = lift_entity(params, head, c)?;
    apply_relation(&h_tilde, &relation, params.config.variant)
}

/// Full query embedding in the variant's scoring space.
pub fn query_embed(params: &ModelParams, head: u32, rel: u32) -> Result<ScoringPoint> {
    let q_tilde = query_tilde(params, head, rel)?;
    if params.config.variant.is_fft() {
        Ok(ScoringPoint::Complex(to_complex_ball(&q_tilde)?))
    } else {
        Ok(ScoringPoint::Real(q_tilde))
    }
}

/// Lifts a tail entity into the scoring space of a query with curvature `c`.
pub fn lift_tail(params: &ModelParams, tail: u32, c: f64) -> Result<ScoringPoint> {
    params.check_entity(tail)?;
    let t_tilde = lift_entity(params, tail, c)?;
    if params.config.variant.is_fft() {
        Ok(ScoringPoint::Complex(to_complex_ball(&t_tilde)?))
    } else {
        Ok(ScoringPoint::Real(t_tilde))
    }
}

/// Distance term between a query point and a lifted tail point.
pub fn scoring_distance(q: &ScoringPoint, t: &ScoringPoint) -> Result<f64> {
    match (q, t) {
        (ScoringPoint::Real(a), ScoringPoint::Real(b)) => poincare_distance(a, b),
        (ScoringPoint::Complex(a), ScoringPoint::Complex(b)) => bergman_distance(a, b),
        _ => Err(Error::Domain(
            "query and tail live in different scoring spaces".into(),
        )),
    }
}

/// Likelihood score `-d(q, t)^2 + b_h + b_t`.
pub fn score(params: &ModelParams, head: u32, rel: u32, tail: u32) -> Result<f64> {
    let q = query_embed(params, head, rel)?;
    let c = params.relation_curvature(rel);
    let t = lift_tail(params, tail, c)?;
    let d = scoring_distance(&q, &t)?;
    Ok(-d * d + params.entity_bias(head) + params.entity_bias(tail))
}

// ---------------------------------------------------------------------------
// Taped pipeline
// ---------------------------------------------------------------------------

/// A query recorded on a tape; tails are scored against it one at a time so
/// the head-side subgraph is shared across candidates.
pub struct TapedQuery {
    curv: Curvature,
    q: NodeId,
    head_bias: NodeId,
    is_fft: bool,
    dim: usize,
}

impl TapedQuery {
    pub fn build(tape: &mut Tape, params: &ModelParams, head: u32, rel: u32) -> Result<Self> {
        params.check_entity(head)?;
        params.check_relation(rel)?;
        let dim = params.config.dim;
        let half = dim / 2;
        let r = rel as usize;
        let variant = params.config.variant;

        let raw_c = tape.param(
            ParamSlot {
                tensor: T_REL_CURV,
                offset: r,
            },
            &params.tensor(T_REL_CURV)[r..r + 1],
        );
        let curv = Curvature::from_raw(tape, raw_c);

        let embed = tape.param(
            ParamSlot {
                tensor: T_ENTITY_EMBED,
                offset: head as usize * dim,
            },
            params.entity_embedding(head),
        );
        let h_tilde = grad::exp_map_zero(tape, embed, curv);

        let transformed = match variant {
            ModelVariant::RotH | ModelVariant::FftRotH => {
                let angles = tape.param(
                    ParamSlot {
                        tensor: T_REL_ROT,
                        offset: r * half,
                    },
                    &params.tensor(T_REL_ROT)[r * half..(r + 1) * half],
                );
                tape.givens_rotate(h_tilde, angles)
            }
            ModelVariant::RefH | ModelVariant::FftRefH => {
                let angles = tape.param(
                    ParamSlot {
                        tensor: T_REL_REF,
                        offset: r * half,
                    },
                    &params.tensor(T_REL_REF)[r * half..(r + 1) * half],
                );
                tape.givens_reflect(h_tilde, angles)
            }
            ModelVariant::AttH | ModelVariant::FftAttH => {
                let rot_angles = tape.param(
                    ParamSlot {
                        tensor: T_REL_ROT,
                        offset: r * half,
                    },
                    &params.tensor(T_REL_ROT)[r * half..(r + 1) * half],
                );
                let ref_angles = tape.param(
                    ParamSlot {
                        tensor: T_REL_REF,
                        offset: r * half,
                    },
                    &params.tensor(T_REL_REF)[r * half..(r + 1) * half],
                );
                let att = tape.param(
                    ParamSlot {
                        tensor: T_REL_ATT,
                        offset: r * dim,
                    },
                    &params.tensor(T_REL_ATT)[r * dim..(r + 1) * dim],
                );
                let rot = tape.givens_rotate(h_tilde, rot_angles);
                let refl = tape.givens_reflect(h_tilde, ref_angles);
                // Tangent-space softmax attention between the two branches.
                let u = grad::log_map_zero(tape, rot, curv);
                let v = grad::log_map_zero(tape, refl, curv);
                let lu = tape.dot(att, u);
                let lv = tape.dot(att, v);
                let logits = tape.stack(vec![lu, lv]);
                let weights = tape.softmax(logits);
                let wu = tape.index(weights, 0);
                let wv = tape.index(weights, 1);
                let us = tape.mul(u, wu);
                let vs = tape.mul(v, wv);
                let mid = tape.add(us, vs);
                grad::exp_map_zero(tape, mid, curv)
            }
        };

        let trans = tape.param(
            ParamSlot {
                tensor: T_REL_TRANS,
                offset: r * dim,
            },
            &params.tensor(T_REL_TRANS)[r * dim..(r + 1) * dim],
        );
        let translation = grad::exp_map_zero(tape, trans, curv);
        let q_tilde = grad::mobius_add(tape, transformed, translation, curv);

        let q = if variant.is_fft() {
            let spec = tape.dft_packed(q_tilde);
            let scaled = tape.mul(spec, curv.sqrt_c);
            tape.clamp_norm(scaled, 1.0 - BALL_EPS)
        } else {
            q_tilde
        };

        let head_bias = tape.param(
            ParamSlot {
                tensor: T_ENTITY_BIAS,
                offset: head as usize,
            },
            &params.tensor(T_ENTITY_BIAS)[head as usize..head as usize + 1],
        );

        Ok(Self {
            curv,
            q,
            head_bias,
            is_fft: variant.is_fft(),
            dim,
        })
    }

    /// Records the score of one candidate tail against this query.
    pub fn score_tail(&self, tape: &mut Tape, params: &ModelParams, tail: u32) -> Result<NodeId> {
        params.check_entity(tail)?;
        let dim = self.dim;
        let embed = tape.param(
            ParamSlot {
                tensor: T_ENTITY_EMBED,
                offset: tail as usize * dim,
            },
            params.entity_embedding(tail),
        );
        let t_tilde = grad::exp_map_zero(tape, embed, self.curv);
        let d = if self.is_fft {
            let spec = tape.dft_packed(t_tilde);
            let scaled = tape.mul(spec, self.curv.sqrt_c);
            let t = tape.clamp_norm(scaled, 1.0 - BALL_EPS);
            grad::bergman_distance(tape, self.q, t)
        } else {
            grad::poincare_distance(tape, self.q, t_tilde, self.curv)
        };
        let d2 = tape.mul(d, d);
        let neg_d2 = tape.scale_const(d2, -1.0);
        let tail_bias = tape.param(
            ParamSlot {
                tensor: T_ENTITY_BIAS,
                offset: tail as usize,
            },
            &params.tensor(T_ENTITY_BIAS)[tail as usize..tail as usize + 1],
        );
        let with_head = tape.add(neg_d2, self.head_bias);
        Ok(tape.add(with_head, tail_bias))
    }
}

/// Taped score of a single triple; the value matches [`score`] and the tape
/// yields gradients for every parameter on the path.
pub fn taped_score(
    tape: &mut Tape,
    params: &ModelParams,
    head: u32,
    rel: u32,
    tail: u32,
) -> Result<NodeId> {
    let query = TapedQuery::build(tape, params, head, rel)?;
    query.score_tail(tape, params, tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry;
    use rand::Rng;

    fn config(variant: ModelVariant, dim: usize) -> ModelConfig {
        ModelConfig {
            variant,
            dim,
            init_scale: 1e-3,
            seed: 42,
        }
    }

    /// Parameters in general position for gradient and parity checks.
    fn random_params(variant: ModelVariant, dim: usize, seed: u64) -> ModelParams {
        let mut params = ModelParams::init(4, 3, &config(variant, dim)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in [T_ENTITY_EMBED, T_REL_TRANS, T_REL_ATT] {
            for v in params.tensor_mut(t).iter_mut() {
                *v = rng.random_range(-0.5..0.5);
            }
        }
        for v in params.tensor_mut(T_ENTITY_BIAS).iter_mut() {
            *v = rng.random_range(-0.1..0.1);
        }
        for v in params.tensor_mut(T_REL_CURV).iter_mut() {
            *v = rng.random_range(-2.0..2.0);
        }
        params
    }

    #[test]
    fn init_is_deterministic_for_a_seed() {
        let cfg = config(ModelVariant::FftRotH, 8);
        let a = ModelParams::init(10, 4, &cfg).unwrap();
        let b = ModelParams::init(10, 4, &cfg).unwrap();
        for t in 0..TENSOR_COUNT {
            assert_eq!(a.tensor(t), b.tensor(t), "tensor {t} differs");
        }
    }

    #[test]
    fn init_zero_scale_puts_embeddings_at_origin() {
        let cfg = ModelConfig {
            init_scale: 0.0,
            ..config(ModelVariant::RotH, 4)
        };
        let p = ModelParams::init(5, 2, &cfg).unwrap();
        assert!(p.tensor(T_ENTITY_EMBED).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn init_rejects_empty_vocab_and_bad_dims() {
        assert!(ModelParams::init(0, 2, &config(ModelVariant::RotH, 4)).is_err());
        assert!(ModelParams::init(3, 0, &config(ModelVariant::RotH, 4)).is_err());
        assert!(config(ModelVariant::RotH, 5).validate().is_err());
        assert!(config(ModelVariant::FftRotH, 6).validate().is_err());
        assert!(config(ModelVariant::RotH, 6).validate().is_ok());
    }

    #[test]
    fn initial_raw_curvature_gives_softplus_zero() {
        let p = ModelParams::init(3, 2, &config(ModelVariant::RotH, 4)).unwrap();
        let c = p.relation_curvature(0);
        assert!((c - 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn identity_relation_collapses_the_chain() {
        // All angles and translations zero: q is the DFT of the lifted head.
        let mut params = ModelParams::init(3, 2, &config(ModelVariant::FftRotH, 4)).unwrap();
        for t in [T_REL_ROT, T_REL_REF, T_REL_TRANS] {
            params.tensor_mut(t).fill(0.0);
        }
        let q = query_embed(&params, 1, 0).unwrap();
        let c = params.relation_curvature(0);
        let lifted = lift_entity(&params, 1, c).unwrap();
        let expected = to_complex_ball(&lifted).unwrap();
        match q {
            ScoringPoint::Complex(z) => {
                for (a, b) in z.coords().iter().zip(expected.coords()) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
            ScoringPoint::Real(_) => panic!("FFT variant must score in the complex ball"),
        }
    }

    #[test]
    fn zero_embedding_maps_to_complex_origin() {
        let mut params = ModelParams::init(3, 2, &config(ModelVariant::FftRotH, 4)).unwrap();
        for t in [T_ENTITY_EMBED, T_REL_ROT, T_REL_REF, T_REL_TRANS] {
            params.tensor_mut(t).fill(0.0);
        }
        match query_embed(&params, 0, 0).unwrap() {
            ScoringPoint::Complex(z) => {
                assert!(z.norm_sq() < 1e-24);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn real_side_intermediate_is_shared_with_fft_counterpart() {
        for (base, fft) in [
            (ModelVariant::RotH, ModelVariant::FftRotH),
            (ModelVariant::RefH, ModelVariant::FftRefH),
            (ModelVariant::AttH, ModelVariant::FftAttH),
        ] {
            let params_base = random_params(base, 8, 99);
            let mut params_fft = params_base.clone();
            params_fft.config.variant = fft;
            let a = query_tilde(&params_base, 2, 1).unwrap();
            let b = query_tilde(&params_fft, 2, 1).unwrap();
            assert_eq!(a.coords(), b.coords());
        }
    }

    #[test]
    fn score_is_zero_when_query_hits_tail_with_zero_bias() {
        // Identity relation, head == tail, zero biases: q~ equals the lifted
        // tail, so the distance term vanishes.
        let mut params = ModelParams::init(3, 2, &config(ModelVariant::RotH, 4)).unwrap();
        for t in [T_REL_ROT, T_REL_REF, T_REL_TRANS, T_ENTITY_BIAS] {
            params.tensor_mut(t).fill(0.0);
        }
        let s = score(&params, 1, 0, 1).unwrap();
        assert!(s.abs() < 1e-12, "score = {s}");
    }

    #[test]
    fn bias_shift_moves_score_by_delta() {
        let mut params = random_params(ModelVariant::FftAttH, 8, 3);
        let before = score(&params, 0, 1, 2).unwrap();
        let delta = 0.37;
        params.tensor_mut(T_ENTITY_BIAS)[2] += delta;
        let after = score(&params, 0, 1, 2).unwrap();
        assert!((after - before - delta).abs() < 1e-12);
    }

    #[test]
    fn score_is_invariant_under_entity_relabeling() {
        let params = random_params(ModelVariant::FftRotH, 8, 17);
        // Swap entities 0 and 3 everywhere.
        let mut permuted = params.clone();
        let dim = 8;
        for k in 0..dim {
            permuted.tensor_mut(T_ENTITY_EMBED).swap(k, 3 * dim + k);
        }
        permuted.tensor_mut(T_ENTITY_BIAS).swap(0, 3);
        let a = score(&params, 0, 1, 3).unwrap();
        let b = score(&permuted, 3, 1, 0).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn scoring_points_stay_inside_their_balls() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for variant in ModelVariant::ALL {
            for draw in 0..20 {
                let params = random_params(variant, 8, draw + 1000);
                let h = rng.random_range(0..4u32);
                let r = rng.random_range(0..3u32);
                let c = params.relation_curvature(r);
                match query_embed(&params, h, r).unwrap() {
                    ScoringPoint::Real(p) => {
                        assert!(geometry::norm_sq(p.coords()) < 1.0 / c);
                    }
                    ScoringPoint::Complex(z) => {
                        assert!(z.norm_sq() < 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn taped_score_matches_pure_score() {
        for variant in ModelVariant::ALL {
            for seed in 0..10 {
                let params = random_params(variant, 8, seed + 500);
                let (h, r, t) = (seed as u32 % 4, seed as u32 % 3, (seed as u32 + 1) % 4);
                let pure = score(&params, h, r, t).unwrap();
                let mut tape = Tape::new();
                let node = taped_score(&mut tape, &params, h, r, t).unwrap();
                let taped = tape.scalar(node);
                assert!(
                    (pure - taped).abs() < 1e-9,
                    "{variant}: pure {pure} vs taped {taped}"
                );
            }
        }
    }

    #[test]
    fn unknown_ids_are_rejected() {
        let params = ModelParams::init(3, 2, &config(ModelVariant::RotH, 4)).unwrap();
        assert!(score(&params, 5, 0, 1).is_err());
        assert!(score(&params, 0, 7, 1).is_err());
        assert!(score(&params, 0, 0, 9).is_err());
    }

    #[test]
    fn initial_scores_stay_near_the_all_origin_score() {
        // Monte-Carlo bound frozen from the init distribution: with
        // init_scale 1e-3 every lifted point is within ~2e-3 of the origin,
        // so |score| stays below 1e-3 with a wide margin.
        let params = ModelParams::init(50, 6, &config(ModelVariant::FftRotH, 8)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut acc = 0.0;
        for _ in 0..1000 {
            let h = rng.random_range(0..50u32);
            let r = rng.random_range(0..6u32);
            let t = rng.random_range(0..50u32);
            acc += score(&params, h, r, t).unwrap().abs();
        }
        let mean = acc / 1000.0;
        assert!(mean < 1e-3, "mean |score| = {mean}");
    }
}
