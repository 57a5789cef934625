//! Sequence families `(a_n)` and their prefix sums `s_n = a_0 + ... + a_{n-1}`.
//!
//! A sequence is an explicit head `a_0..a_{K-1}` followed by a closed-form
//! tail: `a_n = γ log((n+σ)/(n+σ+1))` (σ = 0 for the grid family, σ = 1 for
//! the Hofbauer family) or `a_n = 0`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::renewal::{Multiplicity, RenewalModel, TailForm};
use crate::series::Interval;

const LN2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// One loop per level, floor pressure 0.
    Hofbauer,
    /// `2^{n-1}` loops per level, floor pressure `log 2`.
    Grid,
}

impl Family {
    fn sigma(self) -> f64 {
        match self {
            Family::Hofbauer => 1.0,
            Family::Grid => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TailSpec {
    Log { gamma: f64 },
    /// `a_n = 0` beyond the head (so `Σ a_k` is finite).
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    pub family: Family,
    pub tail: TailSpec,
    /// Overrides for `a_0, a_1, ...`.
    #[serde(default)]
    pub head: Vec<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    /// Target for `Σ_n e^{s_n}`.
    #[serde(default)]
    pub normalization_target: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizedSequence {
    pub family: Family,
    pub tail: TailSpec,
    /// `a_0..a_{K-1}`, `K >= 2`.
    pub head: Vec<f64>,
    /// Shift added to `a_1` by normalization.
    pub shift: f64,
    /// Perturbation `(δ, δ')` applied to `(a_0, a_1)`.
    pub perturbation: Option<(f64, f64)>,
    /// Enclosure of `Σ e^{s_n}` after normalization.
    pub total: Option<Interval>,
}

/// `a_n = γ log(n/(n+1))` for `n >= n_cut`; the head below `n_cut` is
/// zero. Returns `a_0..a_{len-1}`.
pub fn build_tail(gamma: f64, n_cut: usize, len: usize) -> Result<Vec<f64>> {
    if !(gamma > 1.0) {
        return domain(format!("gamma must exceed 1, got {gamma}"));
    }
    if n_cut == 0 {
        return domain("tail cut must be at least 1");
    }
    Ok((0..len).map(|n| if n >= n_cut { gamma * (n as f64 / (n as f64 + 1.0)).ln() } else { 0.0 }).collect())
}

/// `a_k = b` for `0 <= k < k_len`.
pub fn hofbauer_head(b: f64, k_len: usize) -> Vec<f64> {
    vec![b; k_len]
}

impl RealizedSequence {
    fn sigma(&self) -> f64 {
        self.family.sigma()
    }

    /// Tail value `a_n` (closed form), ignoring the head.
    fn tail_a(&self, n: usize) -> f64 {
        match self.tail {
            TailSpec::Log { gamma } => {
                let y = n as f64 + self.sigma();
                gamma * (y / (y + 1.0)).ln()
            }
            TailSpec::Zero => 0.0,
        }
    }

    pub fn a(&self, n: usize) -> f64 {
        if n < self.head.len() {
            self.head[n]
        } else {
            self.tail_a(n)
        }
    }

    fn head_sum(&self) -> f64 {
        self.head.iter().sum()
    }

    /// `s_n` for `n >= 1`; closed form beyond the head.
    pub fn s(&self, n: usize) -> f64 {
        assert!(n >= 1);
        let k = self.head.len();
        if n <= k {
            return self.head[..n].iter().sum();
        }
        let base = self.head_sum();
        match self.tail {
            TailSpec::Log { gamma } => base + gamma * ((k as f64 + self.sigma()) / (n as f64 + self.sigma())).ln(),
            TailSpec::Zero => base,
        }
    }

    /// Tail form valid for `n > K`.
    pub fn tail_form(&self) -> TailForm {
        let k = self.head.len() as f64;
        match self.tail {
            TailSpec::Log { gamma } => TailForm {
                rate: 0.0,
                b: gamma,
                kappa: self.head_sum() + gamma * (k + self.sigma()).ln(),
                sigma: self.sigma(),
            },
            TailSpec::Zero => TailForm { rate: 0.0, b: 0.0, kappa: self.head_sum(), sigma: 0.0 },
        }
    }

    /// `κ = lim (s_n + γ log n)` (or `lim s_n` for a zero tail).
    pub fn kappa(&self) -> f64 {
        self.tail_form().kappa
    }

    /// Largest gap between accumulated and closed-form prefix sums on
    /// `(K, K + window]`.
    pub fn envelope_residual(&self, window: usize) -> f64 {
        let k = self.head.len();
        let mut acc = self.head_sum();
        let mut worst = 0.0f64;
        for n in k + 1..=k + window {
            acc += self.a(n - 1);
            worst = worst.max((acc - self.s(n)).abs());
        }
        worst
    }

    pub fn table_csv(&self, n_max: usize) -> String {
        let mut out = String::from("n,a_n,s_n\n");
        for n in 1..=n_max {
            writeln!(out, "{},{:.16e},{:.16e}", n, self.a(n), self.s(n)).expect("write to string");
        }
        out
    }

    /// `Σ e^{s_n}` as a certified enclosure.
    pub fn exp_sum(&self) -> Interval {
        let model = self.unit_model();
        Interval::from_sum(&model.certified_g(1.0, 0.0))
    }

    fn unit_model(&self) -> RenewalModel {
        let head: Vec<f64> = (1..=self.head.len()).map(|n| self.s(n)).collect();
        RenewalModel::new(Multiplicity::one(), head, self.tail_form(), 0.0, 0.0).expect("finite sequence")
    }

    /// Adds `u` to `a_0`, shifting every `s_n` by `u`.
    pub fn shift_a0(&self, u: f64) -> RealizedSequence {
        let mut out = self.clone();
        out.head[0] += u;
        out.total = self.total.map(|iv| iv.scale(u.exp()));
        out
    }
}

/// Builds the sequence described by `spec` (head, tail, optional
/// normalization and perturbation).
pub fn realize(spec: &SequenceSpec) -> Result<RealizedSequence> {
    if let TailSpec::Log { gamma } = spec.tail {
        if !(gamma > 1.0) {
            return domain(format!("gamma must exceed 1, got {gamma}"));
        }
    }
    if spec.head.iter().any(|a| !a.is_finite()) {
        return domain("head values must be finite");
    }
    let mut seq = RealizedSequence {
        family: spec.family,
        tail: spec.tail,
        head: Vec::new(),
        shift: 0.0,
        perturbation: None,
        total: None,
    };
    let k = spec.head.len().max(2);
    seq.head = (0..k)
        .map(|n| match spec.head.get(n) {
            Some(&a) => a,
            None if n == 0 => 0.0,
            None => seq.tail_a(n),
        })
        .collect();
    if let Some(target) = spec.normalization_target {
        seq = normalize(&seq, target)?;
    }
    if let Some(delta) = spec.delta {
        seq = dfu_perturb(&seq, delta)?;
    }
    Ok(seq)
}

/// Shifts `a_1` by the constant `c` that makes `Σ e^{s_n} = target`:
/// `c = log(target - e^{s_1}) - log Σ_{n>=2} e^{s_n}`.
pub fn normalize(seq: &RealizedSequence, target: f64) -> Result<RealizedSequence> {
    if !(target > 0.0) {
        return domain("normalization target must be positive");
    }
    let total = seq.exp_sum();
    if total.hi == f64::INFINITY {
        return domain("Σ e^{s_n} diverges; normalization needs a summable tail");
    }
    let first = seq.s(1).exp();
    let rest = Interval { lo: total.lo - first, hi: total.hi - first };
    let room = target - first;
    if !(room > 0.0) || !(rest.mid() > 0.0) {
        return domain(format!(
            "target {target} unreachable by shifting a_1: e^(s_1) = {first} already meets it; adjust the head"
        ));
    }
    let c = room.ln() - rest.mid().ln();
    let mut out = seq.clone();
    out.head[1] += c;
    out.shift += c;
    let check = out.exp_sum();
    if !(check.lo >= target - 1e-12 && check.hi <= target + 1e-12) {
        return Err(Error::Indeterminate { what: "normalized Σ e^{s_n}".into(), lower: check.lo, upper: check.hi });
    }
    out.total = Some(check);
    Ok(out)
}

/// `δ' = log(2 - e^δ) - δ`, the solution of `e^δ/2 + e^{δ+δ'}/2 = 1`.
pub fn delta_prime(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < LN2) {
        return domain(format!("delta must lie in (0, log 2), got {delta}"));
    }
    Ok((2.0 - delta.exp()).ln() - delta)
}

/// `a_0 ← δ`, `a_1 ← a_1 + δ'` on a grid sequence with `a_0 = 0` and
/// `Σ_{n>=2} e^{s_n} = 1`. The total `Σ e^{s_n} = 2` is preserved.
pub fn dfu_perturb(seq: &RealizedSequence, delta: f64) -> Result<RealizedSequence> {
    let dp = delta_prime(delta)?;
    if seq.family != Family::Grid {
        return domain("the perturbation applies to grid sequences");
    }
    if seq.head[0] != 0.0 {
        return domain("the perturbation expects a_0 = 0");
    }
    let before = seq.exp_sum();
    if !(before.lo >= 2.0 - 1e-12 && before.hi <= 2.0 + 1e-12) {
        return domain("the perturbation expects Σ e^{s_n} = 2 (normalize first)");
    }
    if !(2.0 * delta + dp < 0.0) {
        return Err(Error::Domain(format!("2δ + δ' = {} is not negative", 2.0 * delta + dp)));
    }
    let mut out = seq.clone();
    out.head[0] = delta;
    out.head[1] += dp;
    out.perturbation = Some((delta, dp));
    let after = out.exp_sum();
    if !(after.lo >= 2.0 - 1e-12 && after.hi <= 2.0 + 1e-12) {
        return Err(Error::Indeterminate { what: "perturbed Σ e^{s_n}".into(), lower: after.lo, upper: after.hi });
    }
    out.total = Some(after);
    Ok(out)
}

/// Renewal model of the sequence: `m_n = 2^{n-1}`, floor `log 2` for the
/// grid family; `m_n = 1`, floor 0 for the Hofbauer family.
pub fn realize_model(seq: &RealizedSequence) -> Result<RenewalModel> {
    let head: Vec<f64> = (1..=seq.head.len()).map(|n| seq.s(n)).collect();
    let residual = seq.envelope_residual(crate::renewal::ENVELOPE_WINDOW);
    let scale = 1.0 + seq.head.iter().map(|a| a.abs()).sum::<f64>() + seq.kappa().abs();
    if residual > 1e-11 * scale {
        return Err(Error::EnvelopeInvalid { n: seq.head.len() + 1, residual, eps_bar: 1e-11 * scale });
    }
    let (mult, floor) = match seq.family {
        Family::Grid => (Multiplicity::binary(), LN2),
        Family::Hofbauer => (Multiplicity::one(), 0.0),
    };
    RenewalModel::new(mult, head, seq.tail_form(), floor, 0.0)
}
