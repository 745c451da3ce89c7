//! Minimum-SDC configuration search over predicted counts.
//!
//! All methods rank configurations by predicted SDC count, then by fewer
//! enabled assertions, then by the lexicographically smallest bit string.

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::campaign::CampaignResult;
use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::predict::{PredictedCounts, Predictor, EXHAUSTIVE_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exhaustive,
    Greedy,
    Ga,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub best: Configuration,
    pub best_counts: PredictedCounts,
    /// Distinct configurations whose counts were computed.
    pub evaluations: u64,
    pub method: Method,
    /// Best SDC count after each iteration (greedy step or GA generation).
    pub trace: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub method: Method,
    pub best_config: String,
    pub counts: PredictedCounts,
    pub evaluations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SearchOutcome {
    pub fn report(&self, seed: Option<u64>) -> SearchReport {
        SearchReport {
            method: self.method,
            best_config: self.best.to_string(),
            counts: self.best_counts,
            evaluations: self.evaluations,
            seed,
        }
    }
}

fn rank(a: (&Configuration, &PredictedCounts), b: (&Configuration, &PredictedCounts)) -> Ordering {
    a.1.sdc.cmp(&b.1.sdc).then(a.0.enabled_count().cmp(&b.0.enabled_count())).then_with(|| a.0.cmp(b.0))
}

/// Memoizing fitness function.
struct Evaluator {
    predictor: Predictor,
    cache: HashMap<Configuration, PredictedCounts>,
}

impl Evaluator {
    fn new(campaign: &CampaignResult) -> Self {
        Evaluator { predictor: Predictor::new(campaign), cache: HashMap::new() }
    }

    fn eval(&mut self, c: &Configuration) -> PredictedCounts {
        if let Some(&counts) = self.cache.get(c) {
            return counts;
        }
        let counts = self.predictor.predict(c).expect("search only builds full-length configurations");
        self.cache.insert(c.clone(), counts);
        counts
    }

    fn evaluations(&self) -> u64 {
        self.cache.len() as u64
    }
}

/// Global minimum over all `2^N` configurations.
pub fn exhaustive(campaign: &CampaignResult) -> Result<SearchOutcome> {
    exhaustive_up_to(campaign, EXHAUSTIVE_LIMIT)
}

pub fn exhaustive_up_to(campaign: &CampaignResult, limit: usize) -> Result<SearchOutcome> {
    let n = campaign.n_assertions();
    if n > limit {
        return Err(Error::TooManyAssertions { n, limit });
    }
    let predictor = Predictor::new(campaign);
    let mut best: Option<(Configuration, PredictedCounts)> = None;
    let mut evaluations = 0;
    for c in Configuration::enumerate(n) {
        let counts = predictor.predict(&c)?;
        evaluations += 1;
        let better = match &best {
            None => true,
            Some((bc, bk)) => rank((&c, &counts), (bc, bk)) == Ordering::Less,
        };
        if better {
            best = Some((c, counts));
        }
    }
    let (best, best_counts) = best.expect("at least one configuration exists");
    Ok(SearchOutcome { best, best_counts, evaluations, method: Method::Exhaustive, trace: None })
}

/// Single-bit-flip descent from the all-enabled configuration; each move
/// takes the flip with the largest strict SDC reduction.
pub fn greedy(campaign: &CampaignResult) -> SearchOutcome {
    let n = campaign.n_assertions();
    let mut ev = Evaluator::new(campaign);
    let mut current = Configuration::all_enabled(n);
    let mut current_counts = ev.eval(&current);
    let mut trace = vec![current_counts.sdc];
    loop {
        let mut step: Option<(Configuration, PredictedCounts)> = None;
        for i in 0..n {
            let candidate = current.toggled(i);
            let counts = ev.eval(&candidate);
            let improves = counts.sdc < current_counts.sdc
                && match &step {
                    None => true,
                    Some((sc, sk)) => rank((&candidate, &counts), (sc, sk)) == Ordering::Less,
                };
            if improves {
                step = Some((candidate, counts));
            }
        }
        match step {
            Some((c, counts)) => {
                current = c;
                current_counts = counts;
                trace.push(counts.sdc);
            }
            None => break,
        }
    }
    SearchOutcome {
        best: current,
        best_counts: current_counts,
        evaluations: ev.evaluations(),
        method: Method::Greedy,
        trace: Some(trace),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    /// Per-bit mutation probability; `None` means `1/N`.
    pub mutation_rate: Option<f64>,
    pub crossover_rate: f64,
    pub seed: u64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams { population: 32, generations: 100, mutation_rate: None, crossover_rate: 0.9, seed: 1 }
    }
}

/// Generational GA over assertion bitmasks: binary tournaments, uniform
/// crossover, per-bit mutation and a single elite. The all-enabled and
/// all-disabled genomes are part of the initial population.
pub fn ga(campaign: &CampaignResult, params: &GaParams) -> Result<SearchOutcome> {
    let n = campaign.n_assertions();
    let mutation_rate = params.mutation_rate.unwrap_or(if n == 0 { 0.0 } else { 1.0 / n as f64 });
    if params.population < 2 {
        return Err(Error::InvalidParam(format!("population must be at least 2, got {}", params.population)));
    }
    for (name, p) in [("mutation_rate", mutation_rate), ("crossover_rate", params.crossover_rate)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParam(format!("{name} must lie in [0, 1], got {p}")));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut ev = Evaluator::new(campaign);

    let mut population = vec![Configuration::all_enabled(n), Configuration::all_disabled(n)];
    while population.len() < params.population {
        population.push(Configuration::new((0..n).map(|_| rng.gen_bool(0.5)).collect()));
    }
    population.truncate(params.population);

    let mut scored: Vec<(Configuration, PredictedCounts)> = population
        .into_iter()
        .map(|c| {
            let k = ev.eval(&c);
            (c, k)
        })
        .collect();
    let fittest = |scored: &[(Configuration, PredictedCounts)]| -> (Configuration, PredictedCounts) {
        scored.iter().min_by(|a, b| rank((&a.0, &a.1), (&b.0, &b.1))).cloned().expect("population is non-empty")
    };
    let mut best = fittest(&scored);
    let mut trace = vec![best.1.sdc];

    for _ in 0..params.generations {
        let elite = fittest(&scored);
        let mut next = vec![elite];
        while next.len() < params.population {
            let a = tournament(&scored, &mut rng);
            let b = tournament(&scored, &mut rng);
            let mut child: Vec<bool> = if rng.gen_bool(params.crossover_rate) {
                a.bits().iter().zip(b.bits()).map(|(&x, &y)| if rng.gen_bool(0.5) { x } else { y }).collect()
            } else {
                a.bits().to_vec()
            };
            for bit in child.iter_mut() {
                if rng.gen_bool(mutation_rate) {
                    *bit = !*bit;
                }
            }
            let child = Configuration::new(child);
            let counts = ev.eval(&child);
            next.push((child, counts));
        }
        scored = next;
        let gen_best = fittest(&scored);
        if rank((&gen_best.0, &gen_best.1), (&best.0, &best.1)) == Ordering::Less {
            best = gen_best;
        }
        trace.push(best.1.sdc);
    }

    Ok(SearchOutcome {
        best: best.0,
        best_counts: best.1,
        evaluations: ev.evaluations(),
        method: Method::Ga,
        trace: Some(trace),
    })
}

fn tournament<'a>(scored: &'a [(Configuration, PredictedCounts)], rng: &mut ChaCha8Rng) -> &'a Configuration {
    let a = &scored[rng.gen_range(0..scored.len())];
    let b = &scored[rng.gen_range(0..scored.len())];
    if rank((&b.0, &b.1), (&a.0, &a.1)) == Ordering::Less {
        &b.0
    } else {
        &a.0
    }
}
