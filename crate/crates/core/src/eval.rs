//! Filtered link-prediction evaluation: MRR and Hits@{1,3,10}, overall and
//! per relation. Every test triple is ranked in both directions (tail query
//! under the relation, head query under its inverse) against all entities,
//! with known-true candidates removed and pessimistic tie-breaking.

use std::collections::HashSet;

use crate::data::{Dataset, Triple};
use crate::error::Result;
use crate::model::{lift_tail, query_embed, scoring_distance, ModelParams, ScoringPoint};
use crate::parallel::{parallel_map, worker_count};

/// One ranked query.
#[derive(Debug, Clone)]
pub struct RankResult {
    pub triple: Triple,
    /// Filtered rank, >= 1.
    pub rank: usize,
    /// True when this ranking answered the head query under the inverse id.
    pub inverse_query: bool,
}

/// Aggregate metrics over a set of rankings.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub mrr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
    pub n_rankings: usize,
}

/// Per-relation diagnostics row in the shape of the relation table:
/// hierarchy score, test triple count, and Hits@10 over both directions.
#[derive(Debug, Clone)]
pub struct RelationRow {
    pub relation: String,
    pub khs: f64,
    pub test_count: usize,
    pub hits10: f64,
}

/// Which split to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Valid,
    Test,
}

/// Rank of the true tail among all candidates: 1 plus the number of
/// unfiltered candidates scoring strictly higher, plus the number of exact
/// ties (ties count against the true tail).
pub fn rank_from_scores(scores: &[f64], true_tail: u32, filtered: Option<&HashSet<u32>>) -> usize {
    let s_true = scores[true_tail as usize];
    let mut greater = 0;
    let mut ties = 0;
    for (cand, &s) in scores.iter().enumerate() {
        let cand = cand as u32;
        if cand == true_tail {
            continue;
        }
        if let Some(f) = filtered {
            if f.contains(&cand) {
                continue;
            }
        }
        if s > s_true {
            greater += 1;
        } else if s == s_true {
            ties += 1;
        }
    }
    1 + greater + ties
}

pub fn metrics_from_ranks(ranks: impl Iterator<Item = usize> + Clone) -> Metrics {
    let n = ranks.clone().count();
    let mut mrr = 0.0;
    let mut hits = [0usize; 3];
    for r in ranks {
        mrr += 1.0 / r as f64;
        for (slot, bound) in hits.iter_mut().zip([1, 3, 10]) {
            if r <= bound {
                *slot += 1;
            }
        }
    }
    let frac = |h: usize| if n == 0 { 0.0 } else { h as f64 / n as f64 };
    Metrics {
        mrr: if n == 0 { 0.0 } else { mrr / n as f64 },
        hits1: frac(hits[0]),
        hits3: frac(hits[1]),
        hits10: frac(hits[2]),
        n_rankings: n,
    }
}

struct Query {
    head: u32,
    rel: u32,
    true_tail: u32,
    triple: Triple,
    inverse: bool,
}

/// Evaluation output: the overall metrics plus the raw rankings for
/// per-relation tables.
pub struct EvalOutcome {
    pub metrics: Metrics,
    pub ranks: Vec<RankResult>,
}

/// Ranks a scored query against the per-relation tail table.
fn rank_query(
    params: &ModelParams,
    dataset: &Dataset,
    tails: &[ScoringPoint],
    biases: &[f64],
    q: &Query,
) -> Result<usize> {
    let query_point = query_embed(params, q.head, q.rel)?;
    let b_h = params.entity_bias(q.head);
    let mut scores = Vec::with_capacity(tails.len());
    for (t, b_t) in tails.iter().zip(biases) {
        let d = scoring_distance(&query_point, t)?;
        scores.push(-d * d + b_h + b_t);
    }
    Ok(rank_from_scores(
        &scores,
        q.true_tail,
        dataset.filter_tails(q.head, q.rel),
    ))
}

/// Filtered evaluation of a split, both directions per triple.
pub fn evaluate(params: &ModelParams, dataset: &Dataset, split: Split) -> Result<EvalOutcome> {
    let triples = match split {
        Split::Valid => &dataset.valid,
        Split::Test => &dataset.test,
    };
    evaluate_triples(params, dataset, triples)
}

pub fn evaluate_triples(
    params: &ModelParams,
    dataset: &Dataset,
    triples: &[Triple],
) -> Result<EvalOutcome> {
    let mut queries = Vec::with_capacity(2 * triples.len());
    for t in triples {
        queries.push(Query {
            head: t.head,
            rel: t.rel,
            true_tail: t.tail,
            triple: *t,
            inverse: false,
        });
        queries.push(Query {
            head: t.tail,
            rel: dataset.inverse_relation(t.rel),
            true_tail: t.head,
            triple: *t,
            inverse: true,
        });
    }

    // Group queries by relation so the lifted tail table is built once per
    // relation (the lift depends on the relation curvature).
    let mut rel_ids: Vec<u32> = queries.iter().map(|q| q.rel).collect();
    rel_ids.sort_unstable();
    rel_ids.dedup();

    let workers = worker_count();
    let n_entities = params.n_entities;
    let mut ranks: Vec<Option<usize>> = vec![None; queries.len()];
    let biases: Vec<f64> = (0..n_entities as u32).map(|e| params.entity_bias(e)).collect();

    for rel in rel_ids {
        let c = params.relation_curvature(rel);
        let tails: Vec<ScoringPoint> = {
            let lifted = parallel_map(n_entities, workers, |e| lift_tail(params, e as u32, c));
            lifted.into_iter().collect::<Result<Vec<_>>>()?
        };
        let group: Vec<usize> = (0..queries.len()).filter(|&i| queries[i].rel == rel).collect();
        let group_ranks = parallel_map(group.len(), workers, |k| {
            rank_query(params, dataset, &tails, &biases, &queries[group[k]])
        });
        for (k, r) in group.into_iter().zip(group_ranks) {
            ranks[k] = Some(r?);
        }
    }

    let rank_results: Vec<RankResult> = queries
        .into_iter()
        .zip(&ranks)
        .map(|(q, r)| RankResult {
            triple: q.triple,
            rank: r.expect("every query ranked"),
            inverse_query: q.inverse,
        })
        .collect();
    let metrics = metrics_from_ranks(rank_results.iter().map(|r| r.rank));
    Ok(EvalOutcome {
        metrics,
        ranks: rank_results,
    })
}

/// Per-relation table over base relations: hierarchy score, test triple
/// count, and Hits@10 pooled over both query directions.
pub fn per_relation_table(dataset: &Dataset, ranks: &[RankResult]) -> Result<Vec<RelationRow>> {
    let mut rows = Vec::new();
    for rel in 0..dataset.n_base_relations as u32 {
        let in_rel: Vec<&RankResult> = ranks.iter().filter(|r| r.triple.rel == rel).collect();
        if in_rel.is_empty() {
            continue;
        }
        let hits10 =
            in_rel.iter().filter(|r| r.rank <= 10).count() as f64 / in_rel.len() as f64;
        let edges = dataset.relation_edges(rel);
        let khs = crate::data::khs_score(&edges)?;
        rows.push(RelationRow {
            relation: dataset.relations.name(rel).to_string(),
            khs,
            // Count of test triples for this relation (each ranked twice).
            test_count: in_rel.len() / 2,
            hits10,
        });
    }
    Ok(rows)
}
