//! Finite Markov shifts: words, cylinders, periodic orbits, Birkhoff sums
//! and variations of locally constant potentials.
//!
//! Symbols are `0..alphabet_size`. Periodic words are read cyclically, so a
//! depth-k context at position i is `w[i], w[i+1 mod n], ..., w[i+k-1 mod n]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// A finite alphabet with a 0/1 transition matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteShift {
    size: usize,
    allowed: Vec<bool>,
}

impl FiniteShift {
    /// Builds a shift from rows of 0/1 entries. Row `i`, column `j` is 1
    /// iff `j` may follow `i`.
    pub fn new(transitions: &[Vec<u8>]) -> Result<Self> {
        let size = transitions.len();
        if size == 0 {
            return domain("alphabet must contain at least one symbol");
        }
        let mut allowed = Vec::with_capacity(size * size);
        for (i, row) in transitions.iter().enumerate() {
            if row.len() != size {
                return domain(format!("row {i} has {} entries, expected {size}", row.len()));
            }
            for &x in row {
                match x {
                    0 => allowed.push(false),
                    1 => allowed.push(true),
                    other => return domain(format!("transition entry {other} is not 0 or 1")),
                }
            }
        }
        let shift = FiniteShift { size, allowed };
        for i in 0..size {
            if !(0..size).any(|j| shift.allows(i, j)) {
                return domain(format!("row {i} is all zeros"));
            }
            if !(0..size).any(|j| shift.allows(j, i)) {
                return domain(format!("column {i} is all zeros"));
            }
        }
        Ok(shift)
    }

    /// Full shift on `m` symbols.
    pub fn full(m: usize) -> Result<Self> {
        Self::new(&vec![vec![1; m]; m])
    }

    /// Golden-mean shift: two symbols, the word `11` forbidden.
    pub fn golden_mean() -> Self {
        Self::new(&[vec![1, 1], vec![1, 0]]).expect("valid matrix")
    }

    /// Renewal shift truncated to the symbols `0..size`:
    /// `0 -> 0`, `0 -> n` and `n -> n-1`.
    pub fn renewal(size: usize) -> Result<Self> {
        let mut t = vec![vec![0u8; size]; size];
        if size == 0 {
            return domain("renewal shift needs at least one symbol");
        }
        t[0][0] = 1;
        for n in 1..size {
            t[0][n] = 1;
            t[n][n - 1] = 1;
        }
        Self::new(&t)
    }

    /// Disjoint union of full shifts with the given alphabet sizes, symbols
    /// numbered consecutively (`[2, 2]` gives `{0,1} ⊔ {2,3}`).
    pub fn disjoint_full(sizes: &[usize]) -> Result<Self> {
        let total: usize = sizes.iter().sum();
        let mut t = vec![vec![0u8; total]; total];
        let mut start = 0;
        for &m in sizes {
            for i in start..start + m {
                for j in start..start + m {
                    t[i][j] = 1;
                }
            }
            start += m;
        }
        Self::new(&t)
    }

    pub fn alphabet_size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn allows(&self, from: usize, to: usize) -> bool {
        self.allowed[from * self.size + to]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.size)
            .map(|i| (0..self.size).map(|j| self.allows(i, j) as u8).collect())
            .collect()
    }

    /// Restriction to a subset of symbols, relabelled `0..subset.len()`.
    /// Fails if the restricted matrix has an empty row or column.
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        let rows: Vec<Vec<u8>> = subset
            .iter()
            .map(|&i| subset.iter().map(|&j| self.allows(i, j) as u8).collect())
            .collect();
        Self::new(&rows)
    }

    fn check_symbol(&self, s: usize) -> Result<()> {
        if s >= self.size {
            return domain(format!("symbol {s} outside alphabet of size {}", self.size));
        }
        Ok(())
    }

    /// All admissible words of length `k`, in lexicographic order.
    pub fn admissible_words(&self, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        if k == 0 {
            out.push(Vec::new());
            return out;
        }
        let mut word = Vec::with_capacity(k);
        self.extend_words(&mut word, k, &mut out);
        out
    }

    fn extend_words(&self, word: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if word.len() == k {
            out.push(word.clone());
            return;
        }
        for s in 0..self.size {
            if word.last().is_none_or(|&p| self.allows(p, s)) {
                word.push(s);
                self.extend_words(word, k, out);
                word.pop();
            }
        }
    }
}

/// True iff every adjacent pair of `word` is an allowed transition.
pub fn is_admissible(word: &[usize], shift: &FiniteShift) -> Result<bool> {
    for &s in word {
        shift.check_symbol(s)?;
    }
    Ok(word.windows(2).all(|w| shift.allows(w[0], w[1])))
}

fn is_cyclically_admissible(word: &[usize], shift: &FiniteShift) -> bool {
    let n = word.len();
    (0..n).all(|i| shift.allows(word[i], word[(i + 1) % n]))
}

/// Outcome of the mixing test by Boolean matrix powers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingVerdict {
    /// Smallest `N` with every entry of the N-th Boolean power positive.
    Mixing(usize),
    NotMixingUpTo(usize),
}

/// Smallest `N <= n_max` such that the N-th Boolean power of the transition
/// matrix is entrywise positive.
pub fn is_topologically_mixing(shift: &FiniteShift, n_max: usize) -> MixingVerdict {
    let m = shift.size;
    let base: Vec<bool> = shift.allowed.clone();
    let mut power = base.clone();
    for n in 1..=n_max {
        if power.iter().all(|&b| b) {
            return MixingVerdict::Mixing(n);
        }
        let mut next = vec![false; m * m];
        for i in 0..m {
            for k in 0..m {
                if power[i * m + k] {
                    for j in 0..m {
                        if base[k * m + j] {
                            next[i * m + j] = true;
                        }
                    }
                }
            }
        }
        if next == power {
            // The powers have stabilized without becoming positive.
            return MixingVerdict::NotMixingUpTo(n_max);
        }
        power = next;
    }
    MixingVerdict::NotMixingUpTo(n_max)
}

/// Admissible cyclic words of length `n` (the last symbol may be followed by
/// the first), optionally starting with `first_symbol`, in lexicographic order.
pub fn enumerate_periodic_words(
    shift: &FiniteShift,
    n: usize,
    first_symbol: Option<usize>,
) -> Result<Vec<Vec<usize>>> {
    if n == 0 {
        return domain("period must be at least 1");
    }
    if let Some(s) = first_symbol {
        shift.check_symbol(s)?;
    }
    let starts: Vec<usize> = match first_symbol {
        Some(s) => vec![s],
        None => (0..shift.size).collect(),
    };
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(n);
    for s in starts {
        word.clear();
        word.push(s);
        cyclic_dfs(shift, &mut word, n, &mut out);
    }
    Ok(out)
}

fn cyclic_dfs(shift: &FiniteShift, word: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
    let last = *word.last().expect("non-empty");
    if word.len() == n {
        if shift.allows(last, word[0]) {
            out.push(word.clone());
        }
        return;
    }
    for s in 0..shift.size {
        if shift.allows(last, s) {
            word.push(s);
            cyclic_dfs(shift, word, n, out);
            word.pop();
        }
    }
}

/// A potential depending on the first `depth` symbols of a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocallyConstantPotential {
    depth: usize,
    values: BTreeMap<Vec<usize>, f64>,
}

impl LocallyConstantPotential {
    /// Builds the potential by evaluating `f` on every admissible word of
    /// length `depth`.
    pub fn from_fn(shift: &FiniteShift, depth: usize, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        if depth == 0 {
            return domain("potential depth must be positive");
        }
        let values: BTreeMap<Vec<usize>, f64> = shift
            .admissible_words(depth)
            .into_iter()
            .map(|w| {
                let v = f(&w);
                (w, v)
            })
            .collect();
        Self::check_finite(&values)?;
        Ok(LocallyConstantPotential { depth, values })
    }

    /// Builds the potential from explicit values, which must cover exactly
    /// the admissible words of length `depth`.
    pub fn from_values(
        shift: &FiniteShift,
        depth: usize,
        values: BTreeMap<Vec<usize>, f64>,
    ) -> Result<Self> {
        if depth == 0 {
            return domain("potential depth must be positive");
        }
        let words = shift.admissible_words(depth);
        if words.len() != values.len() {
            return domain(format!(
                "potential has {} values but the shift has {} admissible words of length {depth}",
                values.len(),
                words.len()
            ));
        }
        for w in &words {
            if !values.contains_key(w) {
                return domain(format!("no potential value for admissible word {w:?}"));
            }
        }
        Self::check_finite(&values)?;
        Ok(LocallyConstantPotential { depth, values })
    }

    /// Depth-1 potential from one value per symbol.
    pub fn from_symbol_values(shift: &FiniteShift, values: &[f64]) -> Result<Self> {
        if values.len() != shift.alphabet_size() {
            return domain("need one value per symbol");
        }
        Self::from_fn(shift, 1, |w| values[w[0]])
    }

    pub fn zero(shift: &FiniteShift) -> Self {
        Self::from_fn(shift, 1, |_| 0.0).expect("zero potential is valid")
    }

    fn check_finite(values: &BTreeMap<Vec<usize>, f64>) -> Result<()> {
        match values.iter().find(|(_, v)| !v.is_finite()) {
            Some((w, v)) => domain(format!("potential value {v} on {w:?} is not finite")),
            None => Ok(()),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Value on the cylinder given by an admissible `depth`-word.
    pub fn value(&self, context: &[usize]) -> Option<f64> {
        self.values.get(context).copied()
    }

    pub fn values(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.values
    }

    /// `t * self`.
    pub fn scaled(&self, t: f64) -> Self {
        LocallyConstantPotential {
            depth: self.depth,
            values: self.values.iter().map(|(w, v)| (w.clone(), t * v)).collect(),
        }
    }
}

/// `S_n φ` at the periodic point whose period is the cyclic word.
pub fn birkhoff_sum(
    potential: &LocallyConstantPotential,
    shift: &FiniteShift,
    cyclic_word: &[usize],
) -> Result<f64> {
    let n = cyclic_word.len();
    if n == 0 {
        return domain("empty word");
    }
    for &s in cyclic_word {
        shift.check_symbol(s)?;
    }
    if !is_cyclically_admissible(cyclic_word, shift) {
        return Err(Error::Domain(format!("word {cyclic_word:?} is not cyclically admissible")));
    }
    let k = potential.depth;
    let mut context = vec![0usize; k];
    let mut sum = 0.0;
    for i in 0..n {
        for (j, c) in context.iter_mut().enumerate() {
            *c = cyclic_word[(i + j) % n];
        }
        sum += potential
            .value(&context)
            .ok_or_else(|| Error::Domain(format!("no value for context {context:?}")))?;
    }
    Ok(sum)
}

/// `V_n(φ)`: largest oscillation of φ over an n-cylinder.
pub fn variation(potential: &LocallyConstantPotential, shift: &FiniteShift, n: usize) -> Result<f64> {
    if n == 0 {
        return domain("variation index must be at least 1");
    }
    if n >= potential.depth {
        return Ok(0.0);
    }
    // Group depth-k words by their first n symbols.
    let mut spread: BTreeMap<&[usize], (f64, f64)> = BTreeMap::new();
    for (w, &v) in &potential.values {
        debug_assert!(is_admissible(w, shift).unwrap_or(false));
        let e = spread.entry(&w[..n]).or_insert((v, v));
        e.0 = e.0.min(v);
        e.1 = e.1.max(v);
    }
    Ok(spread.values().map(|(lo, hi)| hi - lo).fold(0.0, f64::max))
}

/// `V_n` of a potential on the one-sided 2-shift taking the value `a(k)` on
/// points with exactly `k` leading zeros and 0 at `0^∞`. Only the levels
/// `k < horizon` are inspected; the sequence is assumed to tend to 0.
pub fn sequence_variation(a: impl Fn(usize) -> f64, n: usize, horizon: usize) -> f64 {
    // Cylinders containing a 1 among their first n symbols are level sets.
    // The cylinder 0^n meets every level k >= n and the fixed point.
    let (lo, hi) = (n..horizon.max(n)).map(&a).fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi - lo
}
