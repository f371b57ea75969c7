//! Steady-state optimizers: the standard haploid EA, the haploid-diploid EA
//! (HDEA) and the control that samples a temporary haploid pool of size 2P.
//!
//! All three create and evaluate exactly one offspring per generation and
//! insert it over the current worst member.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genetics::{
    binary_tournament, draw_gamete, meiosis, one_point_crossover, point_mutate, Diploid,
    Population,
};
use crate::nk_model::{Genome, Landscape};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "EA")]
    Ea,
    #[serde(rename = "HDEA")]
    Hdea,
    #[serde(rename = "H2P")]
    H2p,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Ea, Algorithm::Hdea, Algorithm::H2p];

    /// Stable numeric id used in seed derivation.
    pub fn id(self) -> u64 {
        match self {
            Algorithm::Ea => 1,
            Algorithm::Hdea => 2,
            Algorithm::H2p => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ea => "EA",
            Algorithm::Hdea => "HDEA",
            Algorithm::H2p => "H2P",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EA" => Ok(Algorithm::Ea),
            "HDEA" => Ok(Algorithm::Hdea),
            "H2P" => Ok(Algorithm::H2p),
            _ => Err(Error::InvalidParameter(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// Landscape wrapper that counts fitness evaluations.
#[derive(Debug)]
pub struct Evaluator<'a> {
    landscape: &'a Landscape,
    count: u64,
}

impl<'a> Evaluator<'a> {
    pub fn new(landscape: &'a Landscape) -> Self {
        Evaluator {
            landscape,
            count: 0,
        }
    }

    pub fn landscape(&self) -> &'a Landscape {
        self.landscape
    }

    pub fn evaluate(&mut self, g: &Genome) -> Result<f64> {
        let f = self.landscape.evaluate(g)?;
        self.count += 1;
        Ok(f)
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

/// Temporary diploid population: diploid `i` pairs member `i` with a
/// uniformly drawn partner `partners[i] != i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiploidPool {
    pub partners: Vec<usize>,
    pub fitnesses: Vec<f64>,
}

impl DiploidPool {
    pub fn build<R: Rng + ?Sized>(pop: &Population, rng: &mut R) -> Self {
        let p = pop.len();
        let f = pop.fitnesses();
        let partners: Vec<usize> = (0..p)
            .map(|i| {
                let j = rng.gen_range(0..p - 1);
                if j >= i {
                    j + 1
                } else {
                    j
                }
            })
            .collect();
        let fitnesses = partners
            .iter()
            .enumerate()
            .map(|(i, &j)| (f[i] + f[j]) / 2.0)
            .collect();
        DiploidPool {
            partners,
            fitnesses,
        }
    }

    pub fn diploid(&self, pop: &Population, anchor: usize) -> Result<Diploid> {
        let partner = self.partners[anchor];
        Diploid::new(
            pop.members()[anchor].clone(),
            pop.fitnesses()[anchor],
            pop.members()[partner].clone(),
            pop.fitnesses()[partner],
        )
    }
}

fn crossover_child<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Result<Genome> {
    let (c1, c2) = one_point_crossover(a, b, rng)?;
    Ok(if rng.gen_bool(0.5) { c1 } else { c2 })
}

/// One generation of the standard EA: two binary tournaments over haploid
/// fitnesses, one-point crossover, one child kept, single-point mutation,
/// one evaluation, replace-worst. Returns the replaced slot.
pub fn ea_step<R: Rng + ?Sized>(
    pop: &mut Population,
    eval: &mut Evaluator<'_>,
    rng: &mut R,
) -> Result<usize> {
    let a = binary_tournament(pop.fitnesses(), rng)?;
    let b = binary_tournament(pop.fitnesses(), rng)?;
    let child = crossover_child(&pop.members()[a], &pop.members()[b], rng)?;
    let child = point_mutate(&child, rng);
    let f = eval.evaluate(&child)?;
    Ok(pop.replace_worst(child, f))
}

/// Offspring of one HDEA generation before mutation, together with the two
/// parent diploids it came from.
pub(crate) fn hdea_offspring<R: Rng + ?Sized>(
    pop: &Population,
    rng: &mut R,
) -> Result<(Genome, [Diploid; 2], DiploidPool)> {
    let pool = DiploidPool::build(pop, rng);
    let first = pool.diploid(pop, binary_tournament(&pool.fitnesses, rng)?)?;
    let second = pool.diploid(pop, binary_tournament(&pool.fitnesses, rng)?)?;
    let g1 = draw_gamete(meiosis(&first, rng)?, rng);
    let g2 = draw_gamete(meiosis(&second, rng)?, rng);
    let child = if rng.gen_bool(0.5) { g1 } else { g2 };
    Ok((child, [first, second], pool))
}

/// One HDEA generation. Diploids pair each member with a random other
/// member and take the mean of their cached fitnesses, so only the offspring
/// is evaluated. Two diploid parents are picked by binary tournament, each
/// undergoes meiosis and contributes one gamete, and one of the two gametes
/// is mutated, evaluated and inserted over the worst haploid.
pub fn hdea_step<R: Rng + ?Sized>(
    pop: &mut Population,
    eval: &mut Evaluator<'_>,
    rng: &mut R,
) -> Result<usize> {
    let (child, _, _) = hdea_offspring(pop, rng)?;
    let child = point_mutate(&child, rng);
    let f = eval.evaluate(&child)?;
    Ok(pop.replace_worst(child, f))
}

/// Pool of `2P` member indices: every member once, then `P` uniform picks
/// with replacement.
pub fn h2p_pool<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<usize> {
    (0..p).chain((0..p).map(|_| rng.gen_range(0..p))).collect()
}

/// One generation of the 2P-haploid control: as [`ea_step`], but parents are
/// chosen by tournament over a temporary pool of size 2P with unaveraged
/// haploid fitnesses.
pub fn h2p_step<R: Rng + ?Sized>(
    pop: &mut Population,
    eval: &mut Evaluator<'_>,
    rng: &mut R,
) -> Result<usize> {
    let pool = h2p_pool(pop.len(), rng);
    let fits: Vec<f64> = pool.iter().map(|&i| pop.fitnesses()[i]).collect();
    let a = pool[binary_tournament(&fits, rng)?];
    let b = pool[binary_tournament(&fits, rng)?];
    let child = crossover_child(&pop.members()[a], &pop.members()[b], rng)?;
    let child = point_mutate(&child, rng);
    let f = eval.evaluate(&child)?;
    Ok(pop.replace_worst(child, f))
}

pub fn step<R: Rng + ?Sized>(
    algorithm: Algorithm,
    pop: &mut Population,
    eval: &mut Evaluator<'_>,
    rng: &mut R,
) -> Result<usize> {
    match algorithm {
        Algorithm::Ea => ea_step(pop, eval, rng),
        Algorithm::Hdea => hdea_step(pop, eval, rng),
        Algorithm::H2p => h2p_step(pop, eval, rng),
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig<'a> {
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub generations: u64,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub landscape: &'a Landscape,
}

impl RunConfig<'_> {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::Config(format!("p must be at least 2, got {}", self.p)));
        }
        if self.n < 2 {
            return Err(Error::Config(format!(
                "n must be at least 2 for crossover, got {}",
                self.n
            )));
        }
        if self.landscape.n() != self.n || self.landscape.k() != self.k {
            return Err(Error::Config(format!(
                "landscape is n={} k={}, config says n={} k={}",
                self.landscape.n(),
                self.landscape.k(),
                self.n,
                self.k
            )));
        }
        Ok(())
    }

    /// Seed of the variation stream. The initial population is drawn from
    /// `seed` alone, so every algorithm starts from the same population.
    pub fn variation_seed(&self) -> u64 {
        seed::mix(&[self.seed, self.algorithm.id()])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    /// Best population fitness after initialization (index 0) and after each
    /// generation.
    pub best_history: Vec<f64>,
    pub final_best: f64,
    pub final_mean: f64,
    pub final_population: Vec<Genome>,
    pub evaluations: u64,
}

pub fn initial_population(cfg: &RunConfig<'_>, eval: &mut Evaluator<'_>) -> Result<Population> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let members: Vec<Genome> = (0..cfg.p)
        .map(|_| crate::genetics::random_genome(cfg.n, &mut rng))
        .collect();
    let fitnesses = members
        .iter()
        .map(|m| eval.evaluate(m))
        .collect::<Result<Vec<_>>>()?;
    Population::new(members, fitnesses)
}

pub fn run(cfg: &RunConfig<'_>) -> Result<RunRecord> {
    cfg.validate()?;
    let mut eval = Evaluator::new(cfg.landscape);
    let mut pop = initial_population(cfg, &mut eval)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.variation_seed());
    let mut best_history = Vec::with_capacity(cfg.generations as usize + 1);
    best_history.push(pop.best());
    for _ in 0..cfg.generations {
        step(cfg.algorithm, &mut pop, &mut eval, &mut rng)?;
        best_history.push(pop.best());
    }
    Ok(RunRecord {
        final_best: *best_history.last().expect("history is never empty"),
        final_mean: pop.mean(),
        best_history,
        evaluations: eval.count(),
        final_population: pop.into_members(),
    })
}
