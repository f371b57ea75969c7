//! Variation, selection and replacement operators on binary genomes, plus
//! the two-step meiosis used by the haploid-diploid algorithm.

use rand::Rng;

use crate::error::{Error, Result};
use crate::nk_model::{Genome, Landscape};

/// A steady-state population of haploid genomes with cached fitnesses.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    members: Vec<Genome>,
    fitnesses: Vec<f64>,
}

impl Population {
    pub fn new(members: Vec<Genome>, fitnesses: Vec<f64>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "population needs at least 2 members, got {}",
                members.len()
            )));
        }
        if members.len() != fitnesses.len() {
            return Err(Error::InvalidParameter(format!(
                "{} members but {} fitnesses",
                members.len(),
                fitnesses.len()
            )));
        }
        let n = members[0].len();
        if let Some(m) = members.iter().find(|m| m.len() != n) {
            return Err(Error::InvalidGenome {
                expected: n,
                actual: m.len(),
            });
        }
        Ok(Population { members, fitnesses })
    }

    /// Evaluates each member once against `ls`.
    pub fn evaluated(members: Vec<Genome>, ls: &Landscape) -> Result<Self> {
        let fitnesses = members
            .iter()
            .map(|m| ls.evaluate(m))
            .collect::<Result<Vec<_>>>()?;
        Population::new(members, fitnesses)
    }

    pub fn random<R: Rng + ?Sized>(ls: &Landscape, p: usize, rng: &mut R) -> Result<Self> {
        let members = (0..p).map(|_| random_genome(ls.n(), rng)).collect();
        Population::evaluated(members, ls)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn genome_len(&self) -> usize {
        self.members[0].len()
    }

    pub fn members(&self) -> &[Genome] {
        &self.members
    }

    pub fn fitnesses(&self) -> &[f64] {
        &self.fitnesses
    }

    pub fn into_members(self) -> Vec<Genome> {
        self.members
    }

    pub fn best(&self) -> f64 {
        self.fitnesses.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.fitnesses.iter().sum::<f64>() / self.fitnesses.len() as f64
    }

    /// Index of the lowest cached fitness, ties to the lowest index.
    pub fn worst_index(&self) -> usize {
        let mut worst = 0;
        for (i, &f) in self.fitnesses.iter().enumerate().skip(1) {
            if f < self.fitnesses[worst] {
                worst = i;
            }
        }
        worst
    }

    /// Replaces the worst member with `child` whether or not the child is
    /// better. Returns the replaced slot.
    pub fn replace_worst(&mut self, child: Genome, child_fitness: f64) -> usize {
        let slot = self.worst_index();
        self.members[slot] = child;
        self.fitnesses[slot] = child_fitness;
        slot
    }
}

/// A pair of haploids whose fitness is the mean of their cached fitnesses.
#[derive(Debug, Clone, PartialEq)]
pub struct Diploid {
    first: Genome,
    second: Genome,
    fitness: f64,
}

impl Diploid {
    pub fn new(first: Genome, first_fitness: f64, second: Genome, second_fitness: f64) -> Result<Self> {
        if first.len() != second.len() {
            return Err(Error::InvalidGenome {
                expected: first.len(),
                actual: second.len(),
            });
        }
        Ok(Diploid {
            first,
            second,
            fitness: (first_fitness + second_fitness) / 2.0,
        })
    }

    pub fn first(&self) -> &Genome {
        &self.first
    }

    pub fn second(&self) -> &Genome {
        &self.second
    }

    pub fn fitness(&self) -> f64 {
        self.fitness
    }
}

pub fn random_genome<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Genome {
    Genome::from_bits_unchecked((0..n).map(|_| rng.gen_range(0..2u8)).collect())
}

fn check_pair(a: &Genome, b: &Genome) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "crossover parents differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "crossover needs genomes of length >= 2, got {}",
            a.len()
        )));
    }
    Ok(())
}

/// Crossover at a fixed cut: `(a[..cut] + b[cut..], b[..cut] + a[cut..])`.
pub fn one_point_crossover_at(a: &Genome, b: &Genome, cut: usize) -> Result<(Genome, Genome)> {
    check_pair(a, b)?;
    if cut == 0 || cut >= a.len() {
        return Err(Error::InvalidParameter(format!(
            "cut {cut} outside 1..{}",
            a.len()
        )));
    }
    let (a, b) = (a.bits(), b.bits());
    let c1 = a[..cut].iter().chain(&b[cut..]).copied().collect();
    let c2 = b[..cut].iter().chain(&a[cut..]).copied().collect();
    Ok((Genome::from_bits_unchecked(c1), Genome::from_bits_unchecked(c2)))
}

/// One-point crossover with the cut uniform on `1..n`.
pub fn one_point_crossover<R: Rng + ?Sized>(
    a: &Genome,
    b: &Genome,
    rng: &mut R,
) -> Result<(Genome, Genome)> {
    check_pair(a, b)?;
    let cut = rng.gen_range(1..a.len());
    one_point_crossover_at(a, b, cut)
}

/// Copy of `g` with exactly one uniformly chosen locus flipped.
pub fn point_mutate<R: Rng + ?Sized>(g: &Genome, rng: &mut R) -> Genome {
    let mut out = g.clone();
    out.flip(rng.gen_range(0..g.len()));
    out
}

/// Two distinct uniform candidates; the fitter wins, exact ties are settled
/// by a fair coin.
pub fn binary_tournament<R: Rng + ?Sized>(fitnesses: &[f64], rng: &mut R) -> Result<usize> {
    let len = fitnesses.len();
    if len < 2 {
        return Err(Error::InvalidParameter(format!(
            "binary tournament needs at least 2 entries, got {len}"
        )));
    }
    let a = rng.gen_range(0..len);
    let mut b = rng.gen_range(0..len - 1);
    if b >= a {
        b += 1;
    }
    Ok(if fitnesses[a] > fitnesses[b] {
        a
    } else if fitnesses[b] > fitnesses[a] {
        b
    } else if rng.gen_bool(0.5) {
        a
    } else {
        b
    })
}

/// Gametes of a diploid at a fixed cut: both parental copies followed by
/// the two complementary recombinants.
pub fn meiosis_at(d: &Diploid, cut: usize) -> Result<[Genome; 4]> {
    let (r1, r2) = one_point_crossover_at(&d.first, &d.second, cut)?;
    Ok([d.first.clone(), d.second.clone(), r1, r2])
}

/// Two-step meiosis: each genome is replicated and one copy of each is
/// recombined, giving `[first, second, recombinant1, recombinant2]`.
pub fn meiosis<R: Rng + ?Sized>(d: &Diploid, rng: &mut R) -> Result<[Genome; 4]> {
    let (r1, r2) = one_point_crossover(&d.first, &d.second, rng)?;
    Ok([d.first.clone(), d.second.clone(), r1, r2])
}

pub fn draw_gamete<R: Rng + ?Sized>(gametes: [Genome; 4], rng: &mut R) -> Genome {
    let [a, b, c, d] = gametes;
    match rng.gen_range(0..4) {
        0 => a,
        1 => b,
        2 => c,
        _ => d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g(s: &str) -> Genome {
        s.parse().unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn pop(fits: &[f64]) -> Population {
        let members = (0..fits.len())
            .map(|i| Genome::from_bits(vec![i as u8 & 1, (i >> 1) as u8 & 1]).unwrap())
            .collect();
        Population::new(members, fits.to_vec()).unwrap()
    }

    #[test]
    fn random_genome_shape_and_determinism() {
        let a = random_genome(50, &mut rng(3));
        assert_eq!(a.len(), 50);
        assert!(a.bits().iter().all(|&b| b <= 1));
        assert_eq!(a, random_genome(50, &mut rng(3)));
    }

    #[test]
    fn random_genome_locus_frequencies() {
        // 10,000 draws: sd of a locus frequency is 0.005, so 0.02 is a 4-sigma
        // band; with 100 loci the chance of any false alarm is below 1%.
        let mut r = rng(11);
        let mut ones = vec![0u32; 100];
        for _ in 0..10_000 {
            for (c, &b) in ones.iter_mut().zip(random_genome(100, &mut r).bits()) {
                *c += b as u32;
            }
        }
        for c in ones {
            let f = c as f64 / 10_000.0;
            assert!((f - 0.5).abs() <= 0.02, "locus frequency {f}");
        }
    }

    #[test]
    fn crossover_examples() {
        let (c1, c2) = one_point_crossover_at(&g("0000"), &g("1111"), 2).unwrap();
        assert_eq!((c1, c2), (g("0011"), g("1100")));
        let a = g("0110");
        let (c1, c2) = one_point_crossover(&a, &a, &mut rng(1)).unwrap();
        assert_eq!(c1, a);
        assert_eq!(c2, a);
    }

    #[test]
    fn crossover_errors() {
        assert!(one_point_crossover(&g("01"), &g("011"), &mut rng(1)).is_err());
        assert!(one_point_crossover(&g("0"), &g("1"), &mut rng(1)).is_err());
        assert!(one_point_crossover_at(&g("0000"), &g("1111"), 4).is_err());
    }

    #[test]
    fn crossover_cut_is_uniform_over_interior() {
        let a = g("00000");
        let b = g("11111");
        let mut seen = [0u32; 5];
        let mut r = rng(2);
        for _ in 0..4000 {
            let (c1, _) = one_point_crossover(&a, &b, &mut r).unwrap();
            let cut = c1.bits().iter().position(|&x| x == 1).unwrap();
            seen[cut] += 1;
        }
        assert_eq!(seen[0], 0);
        for &count in &seen[1..] {
            assert!((900..1100).contains(&count), "{seen:?}");
        }
    }

    #[test]
    fn mutation_examples() {
        let mut h = g("000");
        h.flip(1);
        assert_eq!(h, g("010"));
        h.flip(1);
        assert_eq!(h, g("000"));
        let orig = g("10110");
        let m = point_mutate(&orig, &mut rng(4));
        assert_eq!(orig, g("10110"));
        assert_eq!(orig.hamming(&m), 1);
    }

    #[test]
    fn tournament_dominance_and_forced_pair() {
        let mut r = rng(5);
        for _ in 0..100 {
            assert_eq!(binary_tournament(&[0.1, 0.9], &mut r).unwrap(), 1);
        }
        assert!(binary_tournament(&[0.3], &mut r).is_err());
        assert!(binary_tournament(&[], &mut r).is_err());
    }

    #[test]
    fn tournament_ties_are_uniform() {
        // chi-square with 4 degrees of freedom; 18.47 is the 0.999 quantile
        let mut r = rng(6);
        let mut counts = [0f64; 5];
        for _ in 0..10_000 {
            counts[binary_tournament(&[0.5; 5], &mut r).unwrap()] += 1.0;
        }
        let chi2: f64 = counts.iter().map(|c| (c - 2000.0).powi(2) / 2000.0).sum();
        assert!(chi2 < 18.47, "chi2 = {chi2}, counts {counts:?}");
    }

    #[test]
    fn replace_worst_examples() {
        let mut p = pop(&[0.3, 0.1, 0.5]);
        assert_eq!(p.replace_worst(g("11"), 0.2), 1);
        assert_eq!(p.fitnesses(), &[0.3, 0.2, 0.5]);

        let mut p = pop(&[0.3, 0.1, 0.5]);
        assert_eq!(p.replace_worst(g("11"), 0.05), 1);
        assert_eq!(p.fitnesses(), &[0.3, 0.05, 0.5]);

        let mut p = pop(&[0.1, 0.1, 0.5]);
        assert_eq!(p.replace_worst(g("11"), 0.9), 0);
        assert_eq!(p.members()[0], g("11"));
    }

    #[test]
    fn population_validation() {
        assert!(Population::new(vec![g("01")], vec![0.1]).is_err());
        assert!(Population::new(vec![g("01"), g("10")], vec![0.1]).is_err());
        assert!(Population::new(vec![g("01"), g("101")], vec![0.1, 0.2]).is_err());
    }

    #[test]
    fn diploid_fitness_is_mean() {
        let d = Diploid::new(g("00"), 0.25, g("11"), 0.75).unwrap();
        assert_eq!(d.fitness(), 0.5);
        assert!(Diploid::new(g("00"), 0.0, g("1"), 0.0).is_err());
    }

    #[test]
    fn meiosis_examples() {
        let d = Diploid::new(g("0000"), 0.0, g("1111"), 0.0).unwrap();
        assert_eq!(
            meiosis_at(&d, 3).unwrap(),
            [g("0000"), g("1111"), g("0001"), g("1110")]
        );
        let same = Diploid::new(g("0101"), 0.0, g("0101"), 0.0).unwrap();
        for gamete in meiosis(&same, &mut rng(7)).unwrap() {
            assert_eq!(gamete, g("0101"));
        }
    }

    #[test]
    fn gamete_draws_are_uniform() {
        let gametes = [g("00"), g("01"), g("10"), g("11")];
        let mut r = rng(8);
        let mut counts = [0u32; 4];
        for _ in 0..10_000 {
            let pick = draw_gamete(gametes.clone(), &mut r);
            counts[gametes.iter().position(|x| *x == pick).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 10_000.0 - 0.25).abs() <= 0.02, "{counts:?}");
        }
        let a = draw_gamete(gametes.clone(), &mut rng(9));
        assert_eq!(a, draw_gamete(gametes, &mut rng(9)));
        assert_eq!(draw_gamete([g("1"), g("1"), g("1"), g("1")], &mut r), g("1"));
    }
}
