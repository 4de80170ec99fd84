//! Full cross-entropy training with uniform negative sampling, Adam and
//! Adagrad optimizers, early stopping on validation MRR, and checkpointing.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::checkpoint;
use crate::data::{negative_sample, Dataset, Triple};
use crate::error::{Error, Result};
use crate::eval::{evaluate, Split};
use crate::grad::{NodeId, Tape};
use crate::model::{ModelConfig, ModelParams, TapedQuery, TENSOR_NAMES};
use crate::numeric::logsumexp;
use crate::parallel::{parallel_map, worker_count};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Adam,
    Adagrad,
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adam" => Ok(OptimizerKind::Adam),
            "adagrad" => Ok(OptimizerKind::Adagrad),
            other => Err(Error::Config(format!(
                "unknown optimizer '{other}' (expected adam or adagrad)"
            ))),
        }
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::Adagrad => "adagrad",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub batch_size: usize,
    pub neg_samples: usize,
    pub learning_rate: f64,
    pub double_negative: bool,
    pub max_epochs: usize,
    pub patience: usize,
    pub valid_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerKind::Adam,
            batch_size: 500,
            neg_samples: 100,
            learning_rate: 1e-3,
            double_negative: false,
            max_epochs: 500,
            patience: 10,
            valid_every: 5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0
            || self.neg_samples == 0
            || self.valid_every == 0
            || self.patience == 0
        {
            return Err(Error::Config(
                "batch size, negative samples, valid-every, and patience must be >= 1".into(),
            ));
        }
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// One cross-entropy term: the true tail ranked against sampled negatives.
#[derive(Debug, Clone)]
pub struct LossTerm {
    pub head: u32,
    pub rel: u32,
    pub tail: u32,
    pub negatives: Vec<u32>,
}

/// Records one term's loss `logsumexp(scores) - score(true)` where the
/// candidate set is the true tail followed by the negatives. Negatives drawn
/// with replacement repeat entities; each distinct tail is scored once and
/// its node reused for every occurrence.
pub fn term_loss(tape: &mut Tape, params: &ModelParams, term: &LossTerm) -> Result<NodeId> {
    let query = TapedQuery::build(tape, params, term.head, term.rel)?;
    let s_true = query.score_tail(tape, params, term.tail)?;
    let mut seen: HashMap<u32, NodeId> = HashMap::with_capacity(term.negatives.len() + 1);
    seen.insert(term.tail, s_true);
    let mut candidates = Vec::with_capacity(term.negatives.len() + 1);
    candidates.push(s_true);
    for &neg in &term.negatives {
        let node = match seen.get(&neg) {
            Some(&n) => n,
            None => {
                let n = query.score_tail(tape, params, neg)?;
                seen.insert(neg, n);
                n
            }
        };
        candidates.push(node);
    }
    let stacked = tape.stack(candidates);
    let lse = tape.logsumexp(stacked);
    Ok(tape.sub(lse, s_true))
}

/// Mean cross-entropy over a batch of terms, recorded on one tape.
pub fn step_loss(tape: &mut Tape, params: &ModelParams, terms: &[LossTerm]) -> Result<NodeId> {
    if terms.is_empty() {
        return Err(Error::Config("step_loss needs a nonempty batch".into()));
    }
    let losses: Vec<NodeId> = terms
        .iter()
        .map(|t| term_loss(tape, params, t))
        .collect::<Result<_>>()?;
    let stacked = tape.stack(losses);
    let total = tape.sum(stacked);
    Ok(tape.scale_const(total, 1.0 / terms.len() as f64))
}

/// Plain-value counterpart of [`step_loss`]; the finite-difference oracle
/// differentiates this function.
pub fn loss_value(params: &ModelParams, terms: &[LossTerm]) -> Result<f64> {
    if terms.is_empty() {
        return Err(Error::Config("loss_value needs a nonempty batch".into()));
    }
    let mut total = 0.0;
    for term in terms {
        let s_true = crate::model::score(params, term.head, term.rel, term.tail)?;
        let mut scores = vec![s_true];
        for &neg in &term.negatives {
            scores.push(crate::model::score(params, term.head, term.rel, neg)?);
        }
        total += logsumexp(&scores) - s_true;
    }
    Ok(total / terms.len() as f64)
}

/// Adam (beta1 0.9, beta2 0.999, eps 1e-8, bias-corrected) or Adagrad
/// (accumulator from zero, eps 1e-10 inside the square root). State persists
/// across steps; gradient buffers are zeroed after each application.
pub struct Optimizer {
    kind: OptimizerKind,
    learning_rate: f64,
    step_count: u64,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const ADAGRAD_EPS: f64 = 1e-10;

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64, params: &ModelParams) -> Self {
        Self {
            kind,
            learning_rate,
            step_count: 0,
            first_moment: params.grad_buffers(),
            second_moment: params.grad_buffers(),
        }
    }

    /// Applies one update and zeroes the gradient buffers. A NaN anywhere in
    /// the gradients aborts with the offending tensor's name.
    pub fn step(&mut self, params: &mut ModelParams, grads: &mut [Vec<f64>]) -> Result<()> {
        for (idx, g) in grads.iter().enumerate() {
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::Gradient(format!(
                    "non-finite gradient in tensor '{}'",
                    TENSOR_NAMES[idx]
                )));
            }
        }
        self.step_count += 1;
        let lr = self.learning_rate;
        match self.kind {
            OptimizerKind::Adam => {
                let bc1 = 1.0 - ADAM_BETA1.powi(self.step_count as i32);
                let bc2 = 1.0 - ADAM_BETA2.powi(self.step_count as i32);
                for (idx, g) in grads.iter_mut().enumerate() {
                    let m = &mut self.first_moment[idx];
                    let v = &mut self.second_moment[idx];
                    let p = params.tensor_mut(idx);
                    for k in 0..g.len() {
                        m[k] = ADAM_BETA1 * m[k] + (1.0 - ADAM_BETA1) * g[k];
                        v[k] = ADAM_BETA2 * v[k] + (1.0 - ADAM_BETA2) * g[k] * g[k];
                        let m_hat = m[k] / bc1;
                        let v_hat = v[k] / bc2;
                        p[k] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                        g[k] = 0.0;
                    }
                }
            }
            OptimizerKind::Adagrad => {
                for (idx, g) in grads.iter_mut().enumerate() {
                    let acc = &mut self.second_moment[idx];
                    let p = params.tensor_mut(idx);
                    for k in 0..g.len() {
                        acc[k] += g[k] * g[k];
                        p[k] -= lr * g[k] / (acc[k] + ADAGRAD_EPS).sqrt();
                        g[k] = 0.0;
                    }
                }
            }
        }
        Ok(())
    }

    #[cfg(test)]
    fn moments(&self, tensor: usize) -> (&[f64], &[f64]) {
        (&self.first_moment[tensor], &self.second_moment[tensor])
    }
}

/// Builds the loss terms of one batch; negatives are drawn up front from the
/// single run RNG so results do not depend on worker scheduling. With
/// `double_negative`, each triple also contributes its inverse query with an
/// independently drawn negative set.
fn build_terms(
    batch: &[Triple],
    dataset: &Dataset,
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<LossTerm>> {
    let n = dataset.n_entities();
    let mut terms = Vec::with_capacity(batch.len() * if config.double_negative { 2 } else { 1 });
    for t in batch {
        terms.push(LossTerm {
            head: t.head,
            rel: t.rel,
            tail: t.tail,
            negatives: negative_sample(config.neg_samples, n, rng)?,
        });
        if config.double_negative {
            terms.push(LossTerm {
                head: t.tail,
                rel: dataset.inverse_relation(t.rel),
                tail: t.head,
                negatives: negative_sample(config.neg_samples, n, rng)?,
            });
        }
    }
    Ok(terms)
}

/// Gradient of the mean batch loss, accumulated across workers in a fixed
/// order; returns the batch loss value.
fn batch_gradients(
    params: &ModelParams,
    terms: &[LossTerm],
    grads: &mut [Vec<f64>],
) -> Result<f64> {
    let workers = worker_count().min(terms.len()).max(1);
    let chunk = terms.len().div_ceil(workers);
    let inv_n = 1.0 / terms.len() as f64;
    let partials: Vec<Result<(Vec<Vec<f64>>, f64)>> = parallel_map(workers, workers, |w| {
        let start = w * chunk;
        let end = ((w + 1) * chunk).min(terms.len());
        let mut buf = params.grad_buffers();
        let mut loss_acc = 0.0;
        let mut tape = Tape::new();
        for term in &terms[start..end] {
            tape.reset();
            let raw = term_loss(&mut tape, params, term)?;
            let scaled = tape.scale_const(raw, inv_n);
            loss_acc += tape.scalar(scaled);
            tape.backward(scaled, &mut buf)?;
        }
        Ok((buf, loss_acc))
    });

    let mut loss = 0.0;
    for part in partials {
        let (buf, part_loss) = part?;
        loss += part_loss;
        for (dst, src) in grads.iter_mut().zip(buf) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }
    Ok(loss)
}

/// One epoch's history line.
#[derive(Debug, Clone)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_mrr: Option<f64>,
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub best_checkpoint: PathBuf,
    pub best_valid_mrr: f64,
    pub history: Vec<EpochRecord>,
}

/// Writes the metric history as tab-separated (epoch, train_loss, valid_MRR)
/// lines; epochs without a validation pass carry `-`.
pub fn write_history(path: &Path, history: &[EpochRecord]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "epoch\ttrain_loss\tvalid_mrr")?;
    for rec in history {
        let mrr = rec
            .valid_mrr
            .map(|m| format!("{m:.6}"))
            .unwrap_or_else(|| "-".to_string());
        writeln!(f, "{}\t{:.6}\t{}", rec.epoch, rec.train_loss, mrr)?;
    }
    Ok(())
}

/// Full training loop: shuffled batches, optimizer updates, periodic
/// filtered validation MRR, best-checkpoint retention, and early stopping
/// after `patience` validations without improvement.
pub fn train(
    dataset: &Dataset,
    model_config: &ModelConfig,
    config: &TrainConfig,
    out_dir: &Path,
) -> Result<TrainOutcome> {
    model_config.validate()?;
    config.validate()?;
    fs::create_dir_all(out_dir)?;

    let mut params = ModelParams::init(
        dataset.n_entities(),
        dataset.n_relations(),
        model_config,
    )?;
    let best_path = out_dir.join("best.ckpt");
    // Also probes writability before any training work happens.
    checkpoint::save(
        &best_path,
        &params,
        dataset.entities.hash(),
        dataset.relations.hash(),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(model_config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut optimizer = Optimizer::new(config.optimizer, config.learning_rate, &params);
    let mut grads = params.grad_buffers();
    let mut history = Vec::new();
    let mut best_mrr = f64::NEG_INFINITY;
    let mut stale_validations = 0;
    let mut triples = dataset.train.clone();

    for epoch in 1..=config.max_epochs {
        triples.shuffle(&mut rng);
        let mut loss_weighted = 0.0;
        let mut term_count = 0usize;
        for batch in triples.chunks(config.batch_size) {
            let terms = build_terms(batch, dataset, config, &mut rng)?;
            let batch_loss = batch_gradients(&params, &terms, &mut grads)?;
            optimizer.step(&mut params, &mut grads)?;
            loss_weighted += batch_loss * terms.len() as f64;
            term_count += terms.len();
        }
        let train_loss = loss_weighted / term_count as f64;

        let mut valid_mrr = None;
        if epoch % config.valid_every == 0 {
            let mrr = evaluate(&params, dataset, Split::Valid)?.metrics.mrr;
            valid_mrr = Some(mrr);
            if mrr > best_mrr {
                best_mrr = mrr;
                stale_validations = 0;
                checkpoint::save(
                    &best_path,
                    &params,
                    dataset.entities.hash(),
                    dataset.relations.hash(),
                )?;
            } else {
                stale_validations += 1;
            }
        }
        history.push(EpochRecord {
            epoch,
            train_loss,
            valid_mrr,
        });
        if stale_validations >= config.patience {
            break;
        }
    }

    write_history(&out_dir.join("history.tsv"), &history)?;
    Ok(TrainOutcome {
        best_checkpoint: best_path,
        best_valid_mrr: best_mrr,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelVariant, T_ENTITY_BIAS, T_ENTITY_EMBED, T_REL_CURV, T_REL_TRANS};
    use rand::Rng;

    fn toy_dataset() -> Dataset {
        let raw = |triples: &[(&str, &str, &str)]| {
            triples
                .iter()
                .map(|(h, r, t)| (h.to_string(), r.to_string(), t.to_string()))
                .collect()
        };
        Dataset::from_raw(
            raw(&[
                ("a", "r", "b"),
                ("b", "r", "c"),
                ("c", "r", "d"),
                ("a", "r", "c"),
                ("b", "r", "d"),
            ]),
            raw(&[("a", "r", "d")]),
            raw(&[("d", "r", "a")]),
        )
        .unwrap()
    }

    fn model_config(seed: u64) -> ModelConfig {
        ModelConfig {
            variant: ModelVariant::FftRotH,
            dim: 4,
            init_scale: 1e-3,
            seed,
        }
    }

    fn randomized_params(seed: u64) -> ModelParams {
        let mut params = ModelParams::init(5, 4, &model_config(seed)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in [T_ENTITY_EMBED, T_REL_TRANS] {
            for v in params.tensor_mut(t).iter_mut() {
                *v = rng.random_range(-0.4..0.4);
            }
        }
        for v in params.tensor_mut(T_REL_CURV).iter_mut() {
            *v = rng.random_range(-1.5..1.5);
        }
        params
    }

    #[test]
    fn saturated_positive_drives_loss_to_zero() {
        let mut params = randomized_params(1);
        // One negative whose bias is hugely negative: its score vanishes from
        // the softmax and the loss saturates at the positive.
        params.tensor_mut(T_ENTITY_BIAS)[3] = -1e6;
        let term = LossTerm {
            head: 0,
            rel: 0,
            tail: 1,
            negatives: vec![3],
        };
        let loss = loss_value(&params, std::slice::from_ref(&term)).unwrap();
        assert!(loss.abs() < 1e-12, "loss = {loss}");

        let mut tape = Tape::new();
        let node = step_loss(&mut tape, &params, &[term]).unwrap();
        assert!(tape.scalar(node).abs() < 1e-12);
    }

    #[test]
    fn equal_scores_give_ln_two() {
        // The same entity as positive and negative scores identically.
        let params = randomized_params(2);
        let term = LossTerm {
            head: 0,
            rel: 1,
            tail: 2,
            negatives: vec![2],
        };
        let loss = loss_value(&params, &[term]).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn per_term_loss_is_nonnegative() {
        let params = randomized_params(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let term = LossTerm {
                head: rng.random_range(0..5),
                rel: rng.random_range(0..4),
                tail: rng.random_range(0..5),
                negatives: (0..4).map(|_| rng.random_range(0..5)).collect(),
            };
            assert!(loss_value(&params, &[term]).unwrap() >= 0.0);
        }
    }

    #[test]
    fn taped_loss_matches_plain_loss() {
        let params = randomized_params(4);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let terms: Vec<LossTerm> = (0..6)
            .map(|_| LossTerm {
                head: rng.random_range(0..5),
                rel: rng.random_range(0..4),
                tail: rng.random_range(0..5),
                negatives: (0..3).map(|_| rng.random_range(0..5)).collect(),
            })
            .collect();
        let plain = loss_value(&params, &terms).unwrap();
        let mut tape = Tape::new();
        let node = step_loss(&mut tape, &params, &terms).unwrap();
        assert!((plain - tape.scalar(node)).abs() < 1e-9);
    }

    #[test]
    fn empty_batch_is_rejected() {
        let params = randomized_params(5);
        let mut tape = Tape::new();
        assert!(step_loss(&mut tape, &params, &[]).is_err());
    }

    #[test]
    fn adam_zero_gradient_keeps_params_and_decays_moments() {
        let mut params = randomized_params(6);
        let mut opt = Optimizer::new(OptimizerKind::Adam, 0.01, &params);
        let mut grads = params.grad_buffers();
        grads[T_ENTITY_BIAS][0] = 2.0;
        opt.step(&mut params, &mut grads).unwrap();
        let (m1, v1) = opt.moments(T_ENTITY_BIAS);
        let (m1, v1) = (m1[0], v1[0]);
        assert!(m1 != 0.0 && v1 != 0.0);

        let before = params.tensor(T_ENTITY_EMBED).to_vec();
        opt.step(&mut params, &mut grads).unwrap();
        // Zero gradient: embeddings untouched, moments decayed by the betas.
        assert_eq!(params.tensor(T_ENTITY_EMBED), &before[..]);
        let (m2, v2) = opt.moments(T_ENTITY_BIAS);
        assert!((m2[0] - ADAM_BETA1 * m1).abs() < 1e-15);
        assert!((v2[0] - ADAM_BETA2 * v1).abs() < 1e-18);
    }

    #[test]
    fn adam_first_step_is_signed_learning_rate() {
        let mut params = randomized_params(7);
        let mut opt = Optimizer::new(OptimizerKind::Adam, 1e-3, &params);
        let mut grads = params.grad_buffers();
        grads[T_ENTITY_BIAS][0] = 0.7;
        grads[T_ENTITY_BIAS][1] = -2.5;
        let before = params.tensor(T_ENTITY_BIAS).to_vec();
        opt.step(&mut params, &mut grads).unwrap();
        let after = params.tensor(T_ENTITY_BIAS);
        assert!((after[0] - (before[0] - 1e-3)).abs() < 1e-9);
        assert!((after[1] - (before[1] + 1e-3)).abs() < 1e-9);
        // Buffers zeroed after the step.
        assert!(grads[T_ENTITY_BIAS].iter().all(|&g| g == 0.0));
    }

    #[test]
    fn adagrad_matches_closed_form_for_constant_gradient() {
        let mut params = randomized_params(8);
        let start = params.tensor(T_ENTITY_BIAS)[0];
        let lr = 0.1;
        let g = 0.8;
        let mut opt = Optimizer::new(OptimizerKind::Adagrad, lr, &params);
        let steps = 7;
        for _ in 0..steps {
            let mut grads = params.grad_buffers();
            grads[T_ENTITY_BIAS][0] = g;
            opt.step(&mut params, &mut grads).unwrap();
        }
        let expected: f64 = (1..=steps)
            .map(|s| lr * g / (s as f64 * g * g + ADAGRAD_EPS).sqrt())
            .sum();
        let got = start - params.tensor(T_ENTITY_BIAS)[0];
        assert!((got - expected).abs() < 1e-12, "got {got}, expected {expected}");
    }

    #[test]
    fn nan_gradient_aborts_with_tensor_name() {
        let mut params = randomized_params(9);
        let mut opt = Optimizer::new(OptimizerKind::Adam, 1e-3, &params);
        let mut grads = params.grad_buffers();
        grads[T_REL_TRANS][0] = f64::NAN;
        match opt.step(&mut params, &mut grads) {
            Err(Error::Gradient(msg)) => assert!(msg.contains("relation.trans")),
            other => panic!("expected gradient error, got {other:?}"),
        }
    }

    #[test]
    fn small_step_does_not_increase_batch_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for draw in 0..100 {
            let mut params = randomized_params(100 + draw);
            let terms: Vec<LossTerm> = (0..3)
                .map(|_| LossTerm {
                    head: rng.random_range(0..5),
                    rel: rng.random_range(0..4),
                    tail: rng.random_range(0..5),
                    negatives: (0..4).map(|_| rng.random_range(0..5)).collect(),
                })
                .collect();
            let before = loss_value(&params, &terms).unwrap();
            let mut grads = params.grad_buffers();
            batch_gradients(&params, &terms, &mut grads).unwrap();
            let mut opt = Optimizer::new(OptimizerKind::Adam, 1e-4, &params);
            opt.step(&mut params, &mut grads).unwrap();
            let after = loss_value(&params, &terms).unwrap();
            assert!(
                after <= before + 1e-9,
                "draw {draw}: loss rose from {before} to {after}"
            );
        }
    }

    #[test]
    fn zero_epochs_returns_initialized_checkpoint_and_empty_history() {
        let ds = toy_dataset();
        let dir = tempfile::tempdir().unwrap();
        let cfg = TrainConfig {
            max_epochs: 0,
            ..TrainConfig::default()
        };
        let outcome = train(&ds, &model_config(3), &cfg, dir.path()).unwrap();
        assert!(outcome.history.is_empty());
        let ckpt = checkpoint::load(&outcome.best_checkpoint).unwrap();
        let fresh =
            ModelParams::init(ds.n_entities(), ds.n_relations(), &model_config(3)).unwrap();
        assert_eq!(ckpt.params.tensor(T_ENTITY_EMBED), fresh.tensor(T_ENTITY_EMBED));
    }

    #[test]
    fn training_is_deterministic_for_a_seed() {
        let _guard = crate::parallel::TEST_ENV_LOCK
            .lock()
            .unwrap_or_else(|e| e.into_inner());
        let ds = toy_dataset();
        let cfg = TrainConfig {
            batch_size: 4,
            neg_samples: 3,
            max_epochs: 6,
            valid_every: 2,
            ..TrainConfig::default()
        };
        let run = |dir: &Path| {
            std::env::set_var("HKGE_THREADS", "1");
            let out = train(&ds, &model_config(11), &cfg, dir).unwrap();
            std::env::remove_var("HKGE_THREADS");
            out
        };
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let a = run(d1.path());
        let b = run(d2.path());
        let losses_a: Vec<f64> = a.history.iter().map(|h| h.train_loss).collect();
        let losses_b: Vec<f64> = b.history.iter().map(|h| h.train_loss).collect();
        assert_eq!(losses_a, losses_b);
        let ca = std::fs::read(&a.best_checkpoint).unwrap();
        let cb = std::fs::read(&b.best_checkpoint).unwrap();
        assert_eq!(ca, cb);
    }

    #[test]
    fn history_file_has_expected_shape() {
        let ds = toy_dataset();
        let dir = tempfile::tempdir().unwrap();
        let cfg = TrainConfig {
            batch_size: 8,
            neg_samples: 2,
            max_epochs: 4,
            valid_every: 2,
            ..TrainConfig::default()
        };
        train(&ds, &model_config(5), &cfg, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("history.tsv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5); // header + 4 epochs
        assert!(lines[1].ends_with("\t-"));
        assert!(!lines[2].ends_with("\t-"));
    }
}
