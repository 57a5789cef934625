//! Ruelle–Perron–Frobenius data for locally constant potentials on finite
//! Markov shifts.
//!
//! The transfer operator of a depth-k potential acts on functions of the
//! first k symbols, so it is a nonnegative matrix indexed by admissible
//! k-words. Its Perron root is `exp(P)`, the right eigenvector is the
//! eigenfunction `h`, the left eigenvector the conformal weights `m`, and
//! `h·m` (normalized) the equilibrium weights of the k-cylinders.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::curve::{PressureCurve, RecurrenceClass, Slope};
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::symbolic::{FiniteShift, LocallyConstantPotential};

/// Iteration cap for power iteration.
pub const MAX_ITERATIONS: usize = 1_000_000;
/// Default Perron-root tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Sparse nonnegative matrix on admissible k-cylinders.
/// `entry(C → C') = exp(φ(C'))` when `C'` can follow `C` under the shift.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    states: Vec<Vec<usize>>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransferMatrix {
    pub fn states(&self) -> &[Vec<usize>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().find(|(c, _)| *c == j).map_or(0.0, |(_, v)| *v)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut d = vec![vec![0.0; n]; n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                d[i][j] = v;
            }
        }
        d
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(j, a)| a * v[j]).sum();
        }
    }

    fn apply_transpose(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                out[j] += v[i] * a;
            }
        }
    }

    /// Trace of the n-th power (dense; intended for small matrices).
    pub fn trace_of_power(&self, n: usize) -> f64 {
        let d = self.to_dense();
        let m = d.len();
        let mut p = d.clone();
        for _ in 1..n {
            let mut q = vec![vec![0.0; m]; m];
            for i in 0..m {
                for k in 0..m {
                    let pik = p[i][k];
                    if pik != 0.0 {
                        for j in 0..m {
                            q[i][j] += pik * d[k][j];
                        }
                    }
                }
            }
            p = q;
        }
        (0..m).map(|i| p[i][i]).sum()
    }

    fn graph(&self) -> Vec<Vec<usize>> {
        self.rows.iter().map(|r| r.iter().filter(|(_, v)| *v > 0.0).map(|(j, _)| *j).collect()).collect()
    }
}

/// Transfer matrix of `potential` on the k-block presentation of `shift`.
pub fn build_transfer_matrix(shift: &FiniteShift, potential: &LocallyConstantPotential) -> Result<TransferMatrix> {
    let k = potential.depth();
    let states = shift.admissible_words(k);
    if states.is_empty() {
        return domain("no admissible cylinders at the potential's depth");
    }
    let index: BTreeMap<&[usize], usize> = states.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
    // States grouped by their first k-1 symbols.
    let mut by_prefix: BTreeMap<&[usize], Vec<usize>> = BTreeMap::new();
    for (i, w) in states.iter().enumerate() {
        by_prefix.entry(&w[..k - 1]).or_default().push(i);
    }
    let mut rows = Vec::with_capacity(states.len());
    for c in &states {
        let tail = &c[1..];
        let last = c[k - 1];
        let mut row = Vec::new();
        if let Some(cands) = by_prefix.get(tail) {
            for &j in cands {
                let next = &states[j];
                if shift.allows(last, next[k - 1]) {
                    let v = potential.value(next).expect("state is admissible");
                    row.push((j, v.exp()));
                }
            }
        }
        rows.push(row);
    }
    debug_assert_eq!(index.len(), states.len());
    Ok(TransferMatrix { states, rows })
}

/// Perron data of a transfer matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpfSolution {
    /// `log` of the Perron root (nats).
    pub pressure: f64,
    /// Collatz–Wielandt enclosure of the Perron root.
    pub eigenvalue_bounds: (f64, f64),
    /// Right eigenvector, sup-normalized.
    pub h: Vec<f64>,
    /// Left eigenvector, summing to 1.
    pub m: Vec<f64>,
    /// Equilibrium weights of the states, `h_i m_i` normalized.
    pub mu: Vec<f64>,
    /// max of the two sup-norm eigen-residuals.
    pub residual: f64,
    pub iterations: usize,
}

fn strongly_connected(graph: &[Vec<usize>]) -> Vec<Vec<usize>> {
    // Kosaraju, iterative.
    let n = graph.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut stack = vec![(s, 0usize)];
        seen[s] = true;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < graph[v].len() {
                let w = graph[v][*i];
                *i += 1;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }
    let mut rev = vec![Vec::new(); n];
    for (v, adj) in graph.iter().enumerate() {
        for &w in adj {
            rev[w].push(v);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut comps = Vec::new();
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in &rev[v] {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps.sort();
    comps
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of an irreducible graph: gcd of `level(u) + 1 - level(v)` over
/// edges, with BFS levels from vertex 0.
fn period(graph: &[Vec<usize>]) -> usize {
    let n = graph.len();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for &w in &graph[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let mut g = 0;
    for (u, adj) in graph.iter().enumerate() {
        for &v in adj {
            let d = (level[u] + 1) as isize - level[v] as isize;
            g = gcd(g, d.unsigned_abs());
        }
    }
    g
}

/// Irreducibility and aperiodicity of the matrix's support graph.
pub fn check_mixing(matrix: &TransferMatrix) -> Result<()> {
    let graph = matrix.graph();
    let comps = strongly_connected(&graph);
    if comps.len() != 1 {
        return Err(Error::NotMixing(format!("{} strongly connected components", comps.len())));
    }
    let p = period(&graph);
    if p != 1 {
        return Err(Error::NotMixing(format!("irreducible with period {p}")));
    }
    Ok(())
}

/// Perron data by power iteration on `T` and its transpose, with
/// sup-norm renormalization. Requires a mixing (primitive) matrix.
pub fn solve_rpf(matrix: &TransferMatrix, tol: f64) -> Result<RpfSolution> {
    check_mixing(matrix)?;
    perron(matrix, tol, 0.0)
}

/// Power iteration on `T + shift·I`; a positive shift makes any
/// irreducible matrix primitive without changing its eigenvectors.
fn perron(matrix: &TransferMatrix, tol: f64, shift: f64) -> Result<RpfSolution> {
    let n = matrix.len();
    let mut h = vec![1.0; n];
    let mut th = vec![0.0; n];
    let mut iterations = 0;
    let (mut lo, mut hi);
    loop {
        matrix.apply(&h, &mut th);
        th.iter_mut().zip(&h).for_each(|(t, x)| *t += shift * x);
        lo = f64::INFINITY;
        hi = 0.0f64;
        for (t, x) in th.iter().zip(&h) {
            let r = t / x;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        iterations += 1;
        let norm = th.iter().cloned().fold(0.0, f64::max);
        if !(norm > 0.0) || !norm.is_finite() {
            return domain("transfer matrix has a vanishing or infinite orbit");
        }
        for (x, t) in h.iter_mut().zip(&th) {
            *x = t / norm;
        }
        if hi - lo <= tol * hi {
            break;
        }
        if iterations >= MAX_ITERATIONS {
            return Err(Error::NoConvergence { iterations, residual: hi - lo });
        }
    }
    let lambda = 0.5 * (lo + hi);

    let mut m = vec![1.0 / n as f64; n];
    let mut mt = vec![0.0; n];
    let mut m_iter = 0;
    loop {
        matrix.apply_transpose(&m, &mut mt);
        mt.iter_mut().zip(&m).for_each(|(t, x)| *t += shift * x);
        let sum: f64 = mt.iter().sum();
        let mut diff = 0.0f64;
        for (x, t) in m.iter_mut().zip(&mt) {
            let nx = t / sum;
            diff = diff.max((nx - *x).abs());
            *x = nx;
        }
        m_iter += 1;
        if diff <= tol * 1e-2 || m_iter >= MAX_ITERATIONS {
            break;
        }
    }

    // Residuals against the unshifted matrix.
    let perron_root = lambda - shift;
    matrix.apply(&h, &mut th);
    let rh = th.iter().zip(&h).map(|(t, x)| (t - perron_root * x).abs()).fold(0.0, f64::max);
    matrix.apply_transpose(&m, &mut mt);
    let rm = mt.iter().zip(&m).map(|(t, x)| (t - perron_root * x).abs()).fold(0.0, f64::max);
    let residual = rh.max(rm);
    if residual > tol.max(1e-14) * perron_root.max(1.0) * 1e3 {
        return Err(Error::NoConvergence { iterations: iterations.max(m_iter), residual });
    }

    let mut mu: Vec<f64> = h.iter().zip(&m).map(|(a, b)| a * b).collect();
    let total: f64 = mu.iter().sum();
    mu.iter_mut().for_each(|x| *x /= total);
    Ok(RpfSolution {
        pressure: perron_root.ln(),
        eigenvalue_bounds: (lo - shift, hi - shift),
        h,
        m,
        mu,
        residual,
        iterations: iterations.max(m_iter),
    })
}

impl RpfSolution {
    /// Transition probabilities of the equilibrium Markov chain,
    /// `P(i → j) = T_ij h_j / (λ h_i)`.
    pub fn markov_chain(&self, matrix: &TransferMatrix) -> Vec<Vec<(usize, f64)>> {
        let lambda = self.pressure.exp();
        matrix
            .rows()
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().map(|&(j, a)| (j, a * self.h[j] / (lambda * self.h[i]))).collect())
            .collect()
    }

    /// Entropy of the equilibrium measure as a Markov chain on the states.
    pub fn entropy(&self, matrix: &TransferMatrix) -> f64 {
        self.markov_chain(matrix)
            .iter()
            .zip(&self.mu)
            .map(|(row, pi)| -pi * row.iter().filter(|(_, p)| *p > 0.0).map(|(_, p)| p * p.ln()).sum::<f64>())
            .sum()
    }

    /// `∫ ψ dμ` for a potential of the same depth.
    pub fn integral(&self, matrix: &TransferMatrix, potential: &LocallyConstantPotential) -> f64 {
        matrix
            .states()
            .iter()
            .zip(&self.mu)
            .map(|(s, w)| w * potential.value(s).expect("state has a value"))
            .sum()
    }

    /// Equilibrium mass of the cylinder `[word]` (any length).
    pub fn cylinder_mass(&self, matrix: &TransferMatrix, word: &[usize]) -> f64 {
        let k = matrix.states()[0].len();
        if word.len() <= k {
            return matrix
                .states()
                .iter()
                .zip(&self.mu)
                .filter(|(s, _)| s.starts_with(word))
                .map(|(_, w)| *w)
                .sum();
        }
        let index = |w: &[usize]| matrix.states().iter().position(|s| s == w);
        let Some(mut cur) = index(&word[..k]) else { return 0.0 };
        let chain = self.markov_chain(matrix);
        let mut mass = self.mu[cur];
        for start in 1..=word.len() - k {
            let Some(next) = index(&word[start..start + k]) else { return 0.0 };
            mass *= chain[cur].iter().find(|(j, _)| *j == next).map_or(0.0, |(_, p)| *p);
            cur = next;
        }
        mass
    }
}

/// Pressure of `t·potential` on a grid; one RPF solve per point.
pub fn pressure_curve_finite(
    shift: &FiniteShift,
    potential: &LocallyConstantPotential,
    t_grid: &[f64],
    tol: f64,
    exec: Exec,
) -> Result<PressureCurve> {
    let points: Vec<Result<(f64, f64)>> = exec.map(t_grid, |&t| {
        let scaled = potential.scaled(t);
        let matrix = build_transfer_matrix(shift, &scaled)?;
        let sol = solve_rpf(&matrix, tol)?;
        Ok((sol.pressure, sol.integral(&matrix, potential)))
    });
    let mut curve = PressureCurve::new(t_grid.to_vec());
    for (i, pt) in points.into_iter().enumerate() {
        let (p, dp) = pt?;
        curve.p_values[i] = p;
        curve.classes[i] = RecurrenceClass::PositiveRecurrent;
        curve.derivatives[i] = Slope::exact(dp);
    }
    if !curve.is_convex(1e-9) {
        return domain("pressure curve failed the convexity check");
    }
    Ok(curve)
}

/// `max(r, 1/r)` over all cylinders of length `n <= n_max`, where
/// `r = μ(C) / exp(S_nφ(x) - nP)` and `x` ranges over the cylinder (through
/// every admissible extension by `depth-1` symbols).
pub fn gibbs_constant_check(
    solution: &RpfSolution,
    shift: &FiniteShift,
    potential: &LocallyConstantPotential,
    n_max: usize,
) -> Result<f64> {
    let matrix = build_transfer_matrix(shift, potential)?;
    let k = potential.depth();
    let mut worst = 1.0f64;
    for n in 1..=n_max {
        for w in shift.admissible_words(n + k - 1) {
            let s: f64 = (0..n).map(|i| potential.value(&w[i..i + k]).expect("admissible")).sum();
            let mass = solution.cylinder_mass(&matrix, &w[..n]);
            let r = mass / (s - n as f64 * solution.pressure).exp();
            worst = worst.max(r).max(1.0 / r);
        }
    }
    Ok(worst)
}

/// One irreducible piece of a non-mixing shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    /// Symbols of the original alphabet in this component.
    pub symbols: Vec<usize>,
    pub period: usize,
    pub pressure: f64,
    pub solution: RpfSolution,
}

/// Components of a shift and the pressure of the whole (their maximum).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub components: Vec<Component>,
    pub pressure: f64,
    /// Indices of components attaining the maximum (within 1e-9).
    /// More than one means several equilibrium states.
    pub maximizers: Vec<usize>,
}

impl Decomposition {
    pub fn non_unique(&self) -> bool {
        self.maximizers.len() > 1
    }
}

/// Splits the shift into irreducible components (strongly connected sets of
/// symbols carrying a cycle) and solves each one. The pressure of the
/// whole is the maximum over components.
pub fn decompose_components(
    shift: &FiniteShift,
    potential: &LocallyConstantPotential,
    tol: f64,
) -> Result<Decomposition> {
    let m = shift.alphabet_size();
    let graph: Vec<Vec<usize>> = (0..m).map(|i| (0..m).filter(|&j| shift.allows(i, j)).collect()).collect();
    let mut components = Vec::new();
    for symbols in strongly_connected(&graph) {
        let has_cycle = symbols.len() > 1 || shift.allows(symbols[0], symbols[0]);
        if !has_cycle {
            continue;
        }
        let sub = shift.restrict(&symbols)?;
        let relabel: BTreeMap<usize, usize> = symbols.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let values: BTreeMap<Vec<usize>, f64> = potential
            .values()
            .iter()
            .filter(|(w, _)| w.iter().all(|s| relabel.contains_key(s)))
            .map(|(w, v)| (w.iter().map(|s| relabel[s]).collect(), *v))
            .collect();
        let sub_pot = LocallyConstantPotential::from_values(&sub, potential.depth(), values)?;
        let matrix = build_transfer_matrix(&sub, &sub_pot)?;
        let p = period(&matrix.graph());
        let solution = if p == 1 { perron(&matrix, tol, 0.0)? } else { perron(&matrix, tol, 1.0)? };
        components.push(Component { symbols, period: p, pressure: solution.pressure, solution });
    }
    if components.is_empty() {
        return domain("shift has no recurrent component");
    }
    let pressure = components.iter().map(|c| c.pressure).fold(f64::NEG_INFINITY, f64::max);
    let maximizers = components
        .iter()
        .enumerate()
        .filter(|(_, c)| c.pressure >= pressure - 1e-9)
        .map(|(i, _)| i)
        .collect();
    Ok(Decomposition { components, pressure, maximizers })
}

/// Pressure curve of a possibly non-mixing shift through the component rule.
pub fn pressure_curve_components(
    shift: &FiniteShift,
    potential: &LocallyConstantPotential,
    t_grid: &[f64],
    tol: f64,
    exec: Exec,
) -> Result<(PressureCurve, Vec<Decomposition>)> {
    let decs: Vec<Result<Decomposition>> = exec.map(t_grid, |&t| decompose_components(shift, &potential.scaled(t), tol));
    let decs: Vec<Decomposition> = decs.into_iter().collect::<Result<_>>()?;
    let mut curve = PressureCurve::new(t_grid.to_vec());
    for (i, d) in decs.iter().enumerate() {
        curve.p_values[i] = d.pressure;
        curve.classes[i] = RecurrenceClass::PositiveRecurrent;
        // One-sided slopes differ where several components tie; report the
        // derivative only when the maximizer is unique.
        curve.derivatives[i] = if d.non_unique() {
            Slope::Undefined
        } else {
            let c = &d.components[d.maximizers[0]];
            let sub = shift.restrict(&c.symbols)?;
            let relabel: BTreeMap<usize, usize> = c.symbols.iter().enumerate().map(|(i, &s)| (s, i)).collect();
            let values: BTreeMap<Vec<usize>, f64> = potential
                .values()
                .iter()
                .filter(|(w, _)| w.iter().all(|s| relabel.contains_key(s)))
                .map(|(w, v)| (w.iter().map(|s| relabel[s]).collect(), *v))
                .collect();
            let sub_pot = LocallyConstantPotential::from_values(&sub, potential.depth(), values)?;
            let matrix = build_transfer_matrix(&sub, &sub_pot)?;
            Slope::exact(c.solution.integral(&matrix, &sub_pot))
        };
    }
    Ok((curve, decs))
}
