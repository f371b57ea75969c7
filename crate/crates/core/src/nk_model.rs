//! NK fitness landscapes.
//!
//! Each of the `n` genes contributes a value looked up from its own table of
//! `2^(k+1)` uniform random entries. The lookup index is built from the
//! gene's own allele (most significant bit) followed by the alleles of its
//! `k` epistatic links in stored order. Total fitness is the mean of the
//! `n` contributions.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest epistasis degree accepted by [`Landscape::generate`]. Tables grow
/// as `n * 2^(k+1)` entries.
pub const MAX_K: usize = 24;

/// Largest genome length [`brute_force_optimum`] will enumerate.
pub const MAX_BRUTE_FORCE_N: usize = 24;

/// A fixed-length binary string.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genome(Vec<u8>);

impl Genome {
    pub fn zeros(n: usize) -> Self {
        Genome(vec![0; n])
    }

    /// Builds a genome from alleles, rejecting anything other than 0 or 1.
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::InvalidParameter(format!(
                "allele {} at locus {pos} is not binary",
                bits[pos]
            )));
        }
        Ok(Genome(bits))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, locus: usize) -> u8 {
        self.0[locus]
    }

    pub fn flip(&mut self, locus: usize) {
        self.0[locus] ^= 1;
    }

    pub fn hamming(&self, other: &Genome) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    pub(crate) fn from_bits_unchecked(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Genome(bits)
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Genome({self})")
    }
}

impl FromStr for Genome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidParameter(format!(
                    "invalid allele character {other:?}"
                ))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Genome)
    }
}

/// An immutable NK landscape.
#[derive(Clone, PartialEq)]
pub struct Landscape {
    n: usize,
    k: usize,
    seed: u64,
    // n * k, row-major
    links: Vec<usize>,
    // n * 2^(k+1), row-major
    tables: Vec<f64>,
}

impl fmt::Debug for Landscape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Landscape")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

fn check_dimensions(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if k >= n {
        return Err(Error::InvalidParameter(format!(
            "k must be below n (got n={n}, k={k})"
        )));
    }
    if k > MAX_K {
        return Err(Error::Capacity(format!(
            "k={k} exceeds the supported maximum of {MAX_K}"
        )));
    }
    Ok(())
}

impl Landscape {
    /// Generates a landscape. Links are drawn without replacement from the
    /// other `n - 1` genes; table entries are uniform on `[0, 1)`.
    pub fn generate(n: usize, k: usize, seed: u64) -> Result<Self> {
        check_dimensions(n, k)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let width = 1usize << (k + 1);
        let mut links = Vec::with_capacity(n * k);
        let mut tables = Vec::with_capacity(n * width);
        for gene in 0..n {
            for other in index::sample(&mut rng, n - 1, k).into_iter() {
                links.push(if other >= gene { other + 1 } else { other });
            }
            tables.extend((0..width).map(|_| rng.gen::<f64>()));
        }
        Ok(Landscape {
            n,
            k,
            seed,
            links,
            tables,
        })
    }

    /// Assembles a landscape from explicit links and tables, checking every
    /// invariant.
    pub fn from_parts(
        n: usize,
        k: usize,
        seed: u64,
        links: Vec<Vec<usize>>,
        tables: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_dimensions(n, k)?;
        if links.len() != n || tables.len() != n {
            return Err(Error::InvalidParameter(format!(
                "expected {n} link rows and {n} table rows, got {} and {}",
                links.len(),
                tables.len()
            )));
        }
        for (gene, row) in links.iter().enumerate() {
            validate_links(n, k, gene, row).map_err(Error::InvalidParameter)?;
        }
        for row in &tables {
            validate_table(k, row).map_err(Error::InvalidParameter)?;
        }
        Ok(Landscape {
            n,
            k,
            seed,
            links: links.into_iter().flatten().collect(),
            tables: tables.into_iter().flatten().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn table_width(&self) -> usize {
        1 << (self.k + 1)
    }

    pub fn links(&self, gene: usize) -> &[usize] {
        &self.links[gene * self.k..(gene + 1) * self.k]
    }

    pub fn table(&self, gene: usize) -> &[f64] {
        let w = self.table_width();
        &self.tables[gene * w..(gene + 1) * w]
    }

    /// Table index for `gene` under `genome`: own allele first, then links.
    pub fn table_index(&self, gene: usize, genome: &Genome) -> usize {
        let bits = genome.bits();
        self.links(gene)
            .iter()
            .fold(bits[gene] as usize, |idx, &l| (idx << 1) | bits[l] as usize)
    }

    pub fn contribution(&self, gene: usize, genome: &Genome) -> f64 {
        self.table(gene)[self.table_index(gene, genome)]
    }

    /// Mean per-gene contribution, in `[0, 1)`.
    pub fn evaluate(&self, genome: &Genome) -> Result<f64> {
        if genome.len() != self.n {
            return Err(Error::InvalidGenome {
                expected: self.n,
                actual: genome.len(),
            });
        }
        Ok(self.evaluate_unchecked(genome))
    }

    pub(crate) fn evaluate_unchecked(&self, genome: &Genome) -> f64 {
        let sum: f64 = (0..self.n).map(|i| self.contribution(i, genome)).sum();
        sum / self.n as f64
    }

    /// Writes the line-oriented text form: a `NK <n> <k> <seed>` header, then
    /// per gene one line of link indices and one line of table entries.
    pub fn save<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "NK {} {} {}", self.n, self.k, self.seed)?;
        for gene in 0..self.n {
            let links: Vec<String> = self.links(gene).iter().map(|l| l.to_string()).collect();
            writeln!(out, "{}", links.join(" "))?;
            let mut first = true;
            for v in self.table(gene) {
                if !first {
                    out.write_all(b" ")?;
                }
                first = false;
                // 17 significant digits round-trip every f64 exactly
                write!(out, "{v:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.save(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("landscape text is ASCII")
    }

    /// Parses the text form written by [`Landscape::save`]. Errors carry the
    /// 1-based line number of the offending line.
    pub fn load(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let header = lines.first().ok_or_else(|| Error::parse(1, "missing header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "NK" {
            return Err(Error::parse(1, "expected header `NK <n> <k> <seed>`"));
        }
        let n: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(1, format!("bad n {:?}", fields[1])))?;
        let k: usize = fields[2]
            .parse()
            .map_err(|_| Error::parse(1, format!("bad k {:?}", fields[2])))?;
        let seed: u64 = fields[3]
            .parse()
            .map_err(|_| Error::parse(1, format!("bad seed {:?}", fields[3])))?;
        check_dimensions(n, k).map_err(|e| Error::parse(1, e.to_string()))?;

        let expected_lines = 1 + 2 * n;
        if lines.len() > expected_lines {
            return Err(Error::parse(
                expected_lines + 1,
                format!("unexpected content after {expected_lines} lines"),
            ));
        }

        let width = 1usize << (k + 1);
        let mut links = Vec::with_capacity(n * k);
        let mut tables = Vec::with_capacity(n * width);
        for gene in 0..n {
            let link_line_no = 2 + 2 * gene;
            let table_line_no = link_line_no + 1;
            let link_line = lines
                .get(link_line_no - 1)
                .ok_or_else(|| Error::parse(link_line_no, "truncated: missing link line"))?;
            let row = link_line
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(link_line_no, format!("bad link index: {e}")))?;
            validate_links(n, k, gene, &row).map_err(|m| Error::parse(link_line_no, m))?;
            links.extend(row);

            let table_line = lines
                .get(table_line_no - 1)
                .ok_or_else(|| Error::parse(table_line_no, "truncated: missing table line"))?;
            let row = table_line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(table_line_no, format!("bad table entry: {e}")))?;
            validate_table(k, &row).map_err(|m| Error::parse(table_line_no, m))?;
            tables.extend(row);
        }
        Ok(Landscape {
            n,
            k,
            seed,
            links,
            tables,
        })
    }
}

fn validate_links(n: usize, k: usize, gene: usize, row: &[usize]) -> Result<(), String> {
    if row.len() != k {
        return Err(format!("gene {gene}: expected {k} links, got {}", row.len()));
    }
    for (pos, &l) in row.iter().enumerate() {
        if l >= n {
            return Err(format!("gene {gene}: link {l} out of range"));
        }
        if l == gene {
            return Err(format!("gene {gene}: links to itself"));
        }
        if row[..pos].contains(&l) {
            return Err(format!("gene {gene}: duplicate link {l}"));
        }
    }
    Ok(())
}

fn validate_table(k: usize, row: &[f64]) -> Result<(), String> {
    let width = 1usize << (k + 1);
    if row.len() != width {
        return Err(format!("expected {width} table entries, got {}", row.len()));
    }
    if let Some(v) = row.iter().find(|v| !(0.0..1.0).contains(*v)) {
        return Err(format!("table entry {v} outside [0, 1)"));
    }
    Ok(())
}

/// Exhaustively finds the global optimum. Ties go to the lexicographically
/// smallest genome.
pub fn brute_force_optimum(ls: &Landscape) -> Result<(Genome, f64)> {
    let n = ls.n();
    if n > MAX_BRUTE_FORCE_N {
        return Err(Error::Capacity(format!(
            "brute force limited to n <= {MAX_BRUTE_FORCE_N}, got n={n}"
        )));
    }
    let mut genome = Genome::zeros(n);
    let mut best = genome.clone();
    let mut best_fitness = ls.evaluate_unchecked(&genome);
    // Counting with locus 0 as the most significant bit visits genomes in
    // lexicographic order, so a strict comparison keeps the smallest maximizer.
    for code in 1u64..(1u64 << n) {
        for (locus, bit) in genome.0.iter_mut().enumerate() {
            *bit = ((code >> (n - 1 - locus)) & 1) as u8;
        }
        let f = ls.evaluate_unchecked(&genome);
        if f > best_fitness {
            best_fitness = f;
            best.0.copy_from_slice(&genome.0);
        }
    }
    Ok((best, best_fitness))
}

/// Optimum of a `k = 0` landscape: each gene independently takes its better
/// allele.
pub fn separable_optimum(ls: &Landscape) -> Result<(Genome, f64)> {
    if ls.k() != 0 {
        return Err(Error::InvalidParameter(format!(
            "separable optimum requires k=0, got k={}",
            ls.k()
        )));
    }
    let mut bits = Vec::with_capacity(ls.n());
    let mut sum = 0.0;
    for gene in 0..ls.n() {
        let t = ls.table(gene);
        let allele = u8::from(t[1] > t[0]);
        bits.push(allele);
        sum += t[allele as usize];
    }
    Ok((Genome(bits), sum / ls.n() as f64))
}
