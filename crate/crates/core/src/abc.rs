//! Artificial Bee Colony optimizer over box-bounded real vectors.
//!
//! The search keeps `food_number` candidate solutions ("food sources").
//! Every cycle runs three phases:
//!
//! 1. employed bees: each source proposes one neighbour and keeps the
//!    better of the two (greedy selection, ties go to the neighbour);
//! 2. onlooker bees: `food_number` sources are drawn by roulette wheel on
//!    their fitness and each drawn source proposes a neighbour the same way;
//! 3. scout bee: the most exhausted source, if its trial counter exceeds
//!    `limit`, is replaced by a fresh uniform random solution.
//!
//! The best objective seen so far is memorized after every cycle. The
//! objective is minimized; fitness `1/(1+f)` (or `1+|f|` for negative `f`)
//! is only used for selection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::RandomSource;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbcError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("fitness is undefined for non-finite objective value {0}")]
    Domain(f64),
    #[error("objective returned {value} at position {position:?}")]
    NonFiniteObjective { value: f64, position: Vec<f64> },
}

/// Per-dimension search box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, AbcError> {
        if lower.is_empty() {
            return Err(AbcError::Config("bounds need at least one dimension".into()));
        }
        if lower.len() != upper.len() {
            return Err(AbcError::Config(format!(
                "lower has {} dimensions but upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(AbcError::Config(format!(
                    "dimension {j}: need finite lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same `[lower, upper]` interval in every one of `dimension` axes.
    pub fn uniform(dimension: usize, lower: f64, upper: f64) -> Result<Self, AbcError> {
        Self::new(vec![lower; dimension], vec![upper; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// Maps fractions in `[0, 1)` to `x_j = lower_j + u_j * (upper_j - lower_j)`.
    pub fn point_at(&self, fractions: &[f64]) -> Vec<f64> {
        debug_assert_eq!(fractions.len(), self.dimension());
        fractions
            .iter()
            .enumerate()
            .map(|(j, u)| self.lower[j] + u * (self.upper[j] - self.lower[j]))
            .collect()
    }

    fn clamp(&self, j: usize, v: f64) -> f64 {
        v.clamp(self.lower[j], self.upper[j])
    }
}

/// How many coordinates a neighbour search changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// One uniformly chosen coordinate (canonical ABC).
    #[default]
    SingleDimension,
    /// Every coordinate, each with its own `phi`, same partner.
    AllDimensions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoodSource {
    pub position: Vec<f64>,
    pub objective: f64,
    pub fitness: f64,
    pub trials: usize,
}

impl FoodSource {
    pub fn new(position: Vec<f64>, objective: f64) -> Result<Self, AbcError> {
        let fitness = fitness(objective)?;
        Ok(Self {
            position,
            objective,
            fitness,
            trials: 0,
        })
    }

    /// Greedy replacement in place. Returns true if the candidate was adopted.
    /// `objective` must be finite.
    pub fn offer(&mut self, position: Vec<f64>, objective: f64) -> bool {
        let candidate_fitness = fitness_of_finite(objective);
        if candidate_fitness >= self.fitness {
            self.position = position;
            self.objective = objective;
            self.fitness = candidate_fitness;
            self.trials = 0;
            true
        } else {
            self.trials += 1;
            false
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcConfig {
    /// Employed plus onlooker bees. Must be even; half of it is the number
    /// of food sources.
    pub colony_size: usize,
    pub bounds: Bounds,
    /// Abandonment threshold. `None` means `food_number * dimension`.
    pub limit: Option<usize>,
    /// Maximum cycle number.
    pub mcn: usize,
    pub seed: u64,
    pub perturbation: Perturbation,
}

impl AbcConfig {
    pub const DEFAULT_COLONY_SIZE: usize = 50;

    pub fn new(bounds: Bounds, mcn: usize, seed: u64) -> Self {
        Self {
            colony_size: Self::DEFAULT_COLONY_SIZE,
            bounds,
            limit: None,
            mcn,
            seed,
            perturbation: Perturbation::default(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.bounds.dimension()
    }

    pub fn food_number(&self) -> usize {
        self.colony_size / 2
    }

    pub fn limit(&self) -> usize {
        self.limit
            .unwrap_or(self.food_number() * self.dimension())
    }

    /// Nominal objective function evaluations, `MCN * FoodNumber`.
    pub fn ofe_nominal(&self) -> u64 {
        self.mcn as u64 * self.food_number() as u64
    }

    pub fn validate(&self) -> Result<(), AbcError> {
        if self.colony_size == 0 || !self.colony_size.is_multiple_of(2) {
            return Err(AbcError::Config(format!(
                "colony_size must be a positive even number, got {}",
                self.colony_size
            )));
        }
        if self.food_number() < 2 {
            return Err(AbcError::Config(
                "at least 2 food sources are needed for a neighbour search".into(),
            ));
        }
        if self.mcn == 0 {
            return Err(AbcError::Config("mcn must be at least 1".into()));
        }
        if self.limit() == 0 {
            return Err(AbcError::Config("limit must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CyclePoint {
    pub cycle: usize,
    pub best_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcResult {
    pub best_position: Vec<f64>,
    pub best_objective: f64,
    pub history: Vec<CyclePoint>,
    pub objective_evaluations: u64,
    pub ofe_nominal: u64,
    pub scouts_replaced: u64,
}

/// Uniform random point in the box.
pub fn random_solution(bounds: &Bounds, rng: &mut RandomSource) -> Vec<f64> {
    let fractions: Vec<f64> = (0..bounds.dimension()).map(|_| rng.unit()).collect();
    bounds.point_at(&fractions)
}

/// Nectar of a food source with objective value `f`.
pub fn fitness(objective: f64) -> Result<f64, AbcError> {
    if objective.is_finite() {
        Ok(fitness_of_finite(objective))
    } else {
        Err(AbcError::Domain(objective))
    }
}

fn fitness_of_finite(f: f64) -> f64 {
    if f >= 0.0 {
        1.0 / (1.0 + f)
    } else {
        1.0 + f.abs()
    }
}

/// `x_ij + phi * (x_ij - x_kj)`, clamped into `[lo, hi]`.
pub fn neighbour_component(x_ij: f64, x_kj: f64, phi: f64, lo: f64, hi: f64) -> f64 {
    (x_ij + phi * (x_ij - x_kj)).clamp(lo, hi)
}

/// Neighbour of source `i` using a random partner `k != i`.
pub fn produce_candidate(
    sources: &[FoodSource],
    i: usize,
    rng: &mut RandomSource,
    bounds: &Bounds,
    perturbation: Perturbation,
) -> Result<Vec<f64>, AbcError> {
    if sources.len() < 2 {
        return Err(AbcError::Config(format!(
            "neighbour search needs at least 2 food sources, got {}",
            sources.len()
        )));
    }
    if i >= sources.len() {
        return Err(AbcError::Config(format!(
            "source index {i} out of range for {} sources",
            sources.len()
        )));
    }
    let current = &sources[i].position;
    let mut candidate = current.clone();
    match perturbation {
        Perturbation::SingleDimension => {
            let j = rng.index(bounds.dimension());
            let k = rng.index_except(sources.len(), i);
            let phi = rng.phi();
            candidate[j] = neighbour_component(
                current[j],
                sources[k].position[j],
                phi,
                bounds.lower[j],
                bounds.upper[j],
            );
        }
        Perturbation::AllDimensions => {
            let k = rng.index_except(sources.len(), i);
            for (j, slot) in candidate.iter_mut().enumerate() {
                let phi = rng.phi();
                *slot = current[j] + phi * (current[j] - sources[k].position[j]);
                *slot = bounds.clamp(j, *slot);
            }
        }
    }
    Ok(candidate)
}

/// Keeps the candidate if its fitness is at least the current fitness.
pub fn greedy_select(
    mut current: FoodSource,
    candidate_position: Vec<f64>,
    candidate_objective: f64,
) -> FoodSource {
    current.offer(candidate_position, candidate_objective);
    current
}

/// Fitness-proportional probabilities `p_i = fit_i / sum(fit)`.
pub fn selection_probabilities(sources: &[FoodSource]) -> Result<Vec<f64>, AbcError> {
    if sources.is_empty() {
        return Err(AbcError::Config("no food sources to select from".into()));
    }
    let total: f64 = sources.iter().map(|s| s.fitness).sum();
    Ok(sources.iter().map(|s| s.fitness / total).collect())
}

/// Roulette wheel by cumulative-sum inversion of one uniform draw `u` in `[0, 1)`.
pub fn roulette_pick(probabilities: &[f64], u: f64) -> usize {
    let mut cumulative = 0.0;
    for (i, p) in probabilities.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return i;
        }
    }
    // Rounding can leave the total a hair below 1.
    probabilities.len() - 1
}

struct Colony<'a, F> {
    config: &'a AbcConfig,
    objective: F,
    rng: RandomSource,
    evaluations: u64,
}

impl<F: FnMut(&[f64]) -> f64> Colony<'_, F> {
    fn evaluate(&mut self, x: &[f64]) -> Result<f64, AbcError> {
        self.evaluations += 1;
        let value = (self.objective)(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(AbcError::NonFiniteObjective {
                value,
                position: x.to_vec(),
            })
        }
    }

    fn scouted_source(&mut self) -> Result<FoodSource, AbcError> {
        let position = random_solution(&self.config.bounds, &mut self.rng);
        let objective = self.evaluate(&position)?;
        FoodSource::new(position, objective)
    }

    fn search_near(&mut self, sources: &mut [FoodSource], i: usize) -> Result<(), AbcError> {
        let candidate = produce_candidate(
            sources,
            i,
            &mut self.rng,
            &self.config.bounds,
            self.config.perturbation,
        )?;
        let objective = self.evaluate(&candidate)?;
        sources[i].offer(candidate, objective);
        Ok(())
    }
}

/// Index of the source with the most consecutive failures; lowest index on ties.
fn most_exhausted(sources: &[FoodSource]) -> usize {
    let mut best = 0;
    for (i, s) in sources.iter().enumerate() {
        if s.trials > sources[best].trials {
            best = i;
        }
    }
    best
}

fn memorize_best(sources: &[FoodSource], best_position: &mut Vec<f64>, best_objective: &mut f64) {
    for s in sources {
        if s.objective < *best_objective {
            *best_objective = s.objective;
            best_position.clone_from(&s.position);
        }
    }
}

/// Minimizes `objective` over `config.bounds`.
///
/// Sequential and deterministic: the same config (seed included) and a
/// pure objective give a bit-identical result.
pub fn run<F>(config: &AbcConfig, objective: F) -> Result<AbcResult, AbcError>
where
    F: FnMut(&[f64]) -> f64,
{
    config.validate()?;
    let food_number = config.food_number();
    let limit = config.limit();
    let mut colony = Colony {
        config,
        objective,
        rng: RandomSource::new(config.seed),
        evaluations: 0,
    };

    let mut sources = Vec::with_capacity(food_number);
    for _ in 0..food_number {
        sources.push(colony.scouted_source()?);
    }
    let mut best_objective = f64::INFINITY;
    let mut best_position = Vec::new();
    memorize_best(&sources, &mut best_position, &mut best_objective);

    let mut history = Vec::with_capacity(config.mcn);
    let mut scouts_replaced = 0u64;
    for cycle in 1..=config.mcn {
        for i in 0..food_number {
            colony.search_near(&mut sources, i)?;
        }

        let probabilities = selection_probabilities(&sources)?;
        for _ in 0..food_number {
            let u = colony.rng.unit();
            let i = roulette_pick(&probabilities, u);
            colony.search_near(&mut sources, i)?;
        }

        let worn = most_exhausted(&sources);
        if sources[worn].trials > limit {
            sources[worn] = colony.scouted_source()?;
            scouts_replaced += 1;
        }

        memorize_best(&sources, &mut best_position, &mut best_objective);
        history.push(CyclePoint {
            cycle,
            best_objective,
        });
    }

    Ok(AbcResult {
        best_position,
        best_objective,
        history,
        objective_evaluations: colony.evaluations,
        ofe_nominal: config.ofe_nominal(),
        scouts_replaced,
    })
}
