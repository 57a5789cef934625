//! Renewal-type models: first-return loops of length `n` with multiplicity
//! `m_n` and induced value `s_n`.
//!
//! Everything is driven by the induced series
//! `G(t, p) = Σ_n m_n exp(t s_n - n p)`, evaluated with certified enclosures.
//! The pressure is `p_B(t)` where `G(t, p_B(t)) <= 1` and otherwise the root
//! of `G(t, ·) = 1` above `p_B(t)`.

use serde::{Deserialize, Serialize};

use crate::curve::{PressureCurve, RecurrenceClass, Slope, Smoothness, Transition, TransitionKind};
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::series::{certified_tail, CertifiedSum, Interval, PaddedSum, PowerExpTerm, SumOptions};

/// Enclosures are compared with 1 up to this slack.
pub const SLACK: f64 = 1e-12;
/// Envelope validation window length.
pub const ENVELOPE_WINDOW: usize = 1000;

/// `log m_n = rate·n + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multiplicity {
    pub rate: f64,
    pub offset: f64,
}

impl Multiplicity {
    /// `m_n = 1`.
    pub fn one() -> Self {
        Multiplicity { rate: 0.0, offset: 0.0 }
    }

    /// `m_n = 2^{n-1}`.
    pub fn binary() -> Self {
        Multiplicity { rate: std::f64::consts::LN_2, offset: -std::f64::consts::LN_2 }
    }

    pub fn log_m(&self, n: usize) -> f64 {
        self.rate * n as f64 + self.offset
    }
}

/// `s_n = rate·n - b·ln(n + σ) + κ` beyond the explicit head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailForm {
    pub rate: f64,
    pub b: f64,
    pub kappa: f64,
    pub sigma: f64,
}

impl TailForm {
    pub fn eval(&self, n: usize) -> f64 {
        let n = n as f64;
        let log_part = if self.b == 0.0 { 0.0 } else { self.b * (n + self.sigma).ln() };
        self.rate * n - log_part + self.kappa
    }
}

/// Numerical tolerances for the engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Bisection width for pressure roots and transition points.
    pub root_tol: f64,
    /// Target enclosure width for series (relative to `max(1, value)`).
    pub sum_tol: f64,
    pub max_bisections: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { root_tol: 1e-10, sum_tol: 1e-13, max_bisections: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalModel {
    multiplicity: Multiplicity,
    /// `s_1, ..., s_H`.
    head: Vec<f64>,
    tail: TailForm,
    /// `|s_n - tail(n)| <= eps_bar` for `n > H`.
    eps_bar: f64,
    bad_entropy: f64,
    bad_value: f64,
    bonus: f64,
    tol: Tolerances,
}

/// The three series an evaluation can produce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sums {
    /// `Σ w_n`.
    pub g: CertifiedSum,
    /// `Σ n w_n`.
    pub h: CertifiedSum,
    /// `Σ s_n w_n`; `None` when `h` diverges.
    pub num: Option<Interval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureSolution {
    pub t: f64,
    pub p: f64,
    pub p_lower: f64,
    pub p_upper: f64,
    pub p_bad: f64,
    /// `G(t, p_B(t))`.
    pub g_at_bad: CertifiedSum,
    /// `G(t, p)`.
    pub g_at_p: CertifiedSum,
    pub iterations: usize,
}

impl PressureSolution {
    pub fn on_floor(&self) -> bool {
        self.p == self.p_bad
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: RecurrenceClass,
    pub solution: PressureSolution,
    /// `Σ n w_n` at `(t, p(t))`; divergent for null recurrence.
    pub h: CertifiedSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bound {
    At { lower: f64, upper: f64 },
    /// The flat set reaches the end of the search bracket.
    Beyond,
}

impl Bound {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Bound::At { lower, upper } => Some(0.5 * (lower + upper)),
            Bound::Beyond => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatInterval {
    pub left: Bound,
    pub right: Bound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub left: Option<Smoothness>,
    pub right: Option<Smoothness>,
    /// Both endpoints exist and carry the same verdict.
    pub endpoints_agree: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomReport {
    pub p: f64,
    /// `m_n exp(t s_n - n p)` for the first levels.
    pub level_masses: Vec<f64>,
    pub total: CertifiedSum,
    /// `1 - total`, clamped at 0.
    pub atom: Interval,
    /// Mass of the first preimage of the atom, `atom·exp(t s_1 - p)`.
    pub preimage_mass: Interval,
    pub dissipative: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// `-log G(t, p(t))`, clamped at 0.
    pub u0: Interval,
    pub class: RecurrenceClass,
}

impl Witness {
    pub fn positive(&self) -> bool {
        self.u0.lo > SLACK
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumWeights {
    pub p: f64,
    /// `w_n = m_n exp(t s_n - n p)`.
    pub raw: Vec<f64>,
    /// `w_n / G`.
    pub normalized: Vec<f64>,
    /// `w_n / (m_n G)`, the weight of one level-n cylinder.
    pub per_cylinder: Vec<f64>,
    pub total: CertifiedSum,
    /// `∫τ = Σ n w_n / G`; `None` when infinite.
    pub mean_return_time: Option<Interval>,
    /// `∫Φ = Σ s_n w_n / G`; `None` when the return time is infinite.
    pub integral_phi: Option<Interval>,
    /// `∫(tΦ - pτ)` is finite; false means it is `-∞`.
    pub integral_psi_finite: bool,
}

impl RenewalModel {
    /// Model with an exact tail beyond `head`.
    pub fn new(multiplicity: Multiplicity, head: Vec<f64>, tail: TailForm, bad_entropy: f64, bad_value: f64) -> Result<Self> {
        if head.iter().any(|s| !s.is_finite()) {
            return domain("induced values must be finite");
        }
        if tail.b != 0.0 && tail.sigma < 0.0 {
            return domain("tail offset must be nonnegative");
        }
        for v in [multiplicity.rate, multiplicity.offset, tail.rate, tail.b, tail.kappa, tail.sigma, bad_entropy, bad_value] {
            if !v.is_finite() {
                return domain("model parameters must be finite");
            }
        }
        Ok(RenewalModel {
            multiplicity,
            head,
            tail,
            eps_bar: 0.0,
            bad_entropy,
            bad_value,
            bonus: 0.0,
            tol: Tolerances::default(),
        })
    }

    /// Model from explicit samples `s_1..s_N`, with `tail` trusted beyond
    /// `N` up to `eps_bar`. The envelope is checked on `[n0, n0 + 1000]`
    /// intersected with the sampled range.
    pub fn from_samples(
        multiplicity: Multiplicity,
        samples: Vec<f64>,
        tail: TailForm,
        n0: usize,
        eps_bar: f64,
        bad_entropy: f64,
        bad_value: f64,
    ) -> Result<Self> {
        if n0 == 0 || n0 > samples.len() {
            return domain("envelope start must lie in the sampled range");
        }
        for n in n0..=(n0 + ENVELOPE_WINDOW).min(samples.len()) {
            let residual = (samples[n - 1] - tail.eval(n)).abs();
            if !(residual <= eps_bar) {
                return Err(Error::EnvelopeInvalid { n, residual, eps_bar });
            }
        }
        let mut model = Self::new(multiplicity, samples, tail, bad_entropy, bad_value)?;
        model.eps_bar = eps_bar;
        Ok(model)
    }

    /// `s_n = -c·n` with `m_n = 1` (floor 0) or `m_n = 2^{n-1}` (floor log 2).
    pub fn geometric(binary: bool, c: f64) -> Result<Self> {
        let (mult, floor) = if binary { (Multiplicity::binary(), std::f64::consts::LN_2) } else { (Multiplicity::one(), 0.0) };
        Self::new(mult, Vec::new(), TailForm { rate: -c, b: 0.0, kappa: 0.0, sigma: 0.0 }, floor, 0.0)
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    /// Adds `u` to the potential on the base cylinder, once per return, so
    /// `G` gains the factor `e^u`.
    pub fn with_base_bonus(&self, u: f64) -> Self {
        let mut m = self.clone();
        m.bonus += u;
        m
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    pub fn multiplicity(&self) -> Multiplicity {
        self.multiplicity
    }

    pub fn head(&self) -> &[f64] {
        &self.head
    }

    pub fn tail(&self) -> TailForm {
        self.tail
    }

    pub fn eps_bar(&self) -> f64 {
        self.eps_bar
    }

    pub fn bonus(&self) -> f64 {
        self.bonus
    }

    /// `s_n` (nominal beyond the head).
    pub fn s(&self, n: usize) -> f64 {
        assert!(n >= 1);
        if n <= self.head.len() {
            self.head[n - 1]
        } else {
            self.tail.eval(n)
        }
    }

    pub fn log_m(&self, n: usize) -> f64 {
        self.multiplicity.log_m(n)
    }

    /// `p_B(t)`.
    pub fn bad_pressure(&self, t: f64) -> f64 {
        self.bad_entropy + t * self.bad_value
    }

    /// `log w_n = log m_n + t s_n + u - n p`, `u` the base bonus.
    pub fn log_weight(&self, n: usize, t: f64, p: f64) -> f64 {
        self.log_m(n) + t * self.s(n) + self.bonus - n as f64 * p
    }

    fn sum_opts(&self) -> SumOptions {
        SumOptions { tol: self.tol.sum_tol, ..SumOptions::default() }
    }

    fn tail_term(&self, t: f64, p: f64, extra_a: f64, j: u8) -> PowerExpTerm {
        PowerExpTerm {
            log_c: self.multiplicity.offset + t * self.tail.kappa + self.bonus,
            rho: self.multiplicity.rate + t * self.tail.rate - p,
            a: -t * self.tail.b + extra_a,
            j,
            sigma: self.tail.sigma,
        }
    }

    /// `Σ_{n>H} f_n y^{extra_a} (ln y)^j` with `y = n + σ`.
    fn tail_series(&self, t: f64, p: f64, extra_a: f64, j: u8) -> CertifiedSum {
        let term = self.tail_term(t, p, extra_a, j);
        let start = self.head.len() + 1;
        if j == 0 {
            return certified_tail(&term, start, self.sum_opts());
        }
        // The log factor needs y > e; sum the first few terms directly.
        let mut explicit = PaddedSum::new();
        let mut n = start;
        while n as f64 + self.tail.sigma <= 3.0 {
            explicit.add(term.term(n), term.term(n).abs() * 64.0 * f64::EPSILON);
            n += 1;
        }
        let rest = certified_tail(&term, n, self.sum_opts());
        if rest.is_divergent() {
            return rest;
        }
        let iv = Interval::from_sum(&explicit.certified()).add(Interval::from_sum(&rest));
        CertifiedSum { lower: iv.lo.max(0.0), upper: iv.hi, ..rest }
    }

    fn eps_factor(&self, t: f64) -> (f64, f64) {
        let e = t.abs() * self.eps_bar;
        ((-e).exp(), e.exp())
    }

    /// Certified `G(t, p)`.
    pub fn certified_g(&self, t: f64, p: f64) -> CertifiedSum {
        let mut head = PaddedSum::new();
        for n in 1..=self.head.len() {
            let (x, scale) = self.head_exponent(n, t, p);
            head.add_exp(x, scale);
        }
        let (lo, hi) = self.eps_factor(t);
        let tail = self.tail_series(t, p, 0.0, 0).scaled(lo, hi);
        head.certified().plus(&tail)
    }

    fn head_exponent(&self, n: usize, t: f64, p: f64) -> (f64, f64) {
        let x = self.log_weight(n, t, p);
        let scale = self.log_m(n).abs() + (t * self.s(n)).abs() + self.bonus.abs() + (n as f64 * p).abs();
        (x, scale)
    }

    /// `G`, `Σ n w_n` and `Σ s_n w_n` at `(t, p)`.
    pub fn sums(&self, t: f64, p: f64) -> Sums {
        let mut g = PaddedSum::new();
        let mut h = PaddedSum::new();
        let mut num = PaddedSum::new();
        for n in 1..=self.head.len() {
            let (x, scale) = self.head_exponent(n, t, p);
            let w = x.exp();
            let err = w * f64::EPSILON * (4.0 + scale);
            g.add(w, err);
            h.add(n as f64 * w, n as f64 * err * 2.0);
            let s = self.s(n);
            num.add(s * w, (s * err).abs() * 2.0 + (s * w).abs() * f64::EPSILON * 2.0);
        }
        let (flo, fhi) = self.eps_factor(t);
        let sig = self.tail.sigma;
        let t0 = self.tail_series(t, p, 0.0, 0).scaled(flo, fhi);
        let g_total = g.certified().plus(&t0);

        let t1 = self.tail_series(t, p, 1.0, 0).scaled(flo, fhi);
        let h_tail = if t1.is_divergent() {
            CertifiedSum::divergent(t1.n_terms)
        } else {
            // Σ n f = Σ y f - σ Σ f
            let iv = Interval::from_sum(&t1).add(Interval::from_sum(&t0).scale(-sig));
            CertifiedSum { lower: iv.lo.max(0.0), upper: iv.hi, n_terms: t1.n_terms, tail_method: t1.tail_method }
        };
        let h_total = h.certified().plus(&h_tail);

        let num_total = if h_total.is_divergent() {
            None
        } else {
            let tf = self.tail;
            let mut tail_num = Interval::from_sum(&t1)
                .add(Interval::from_sum(&t0).scale(-sig))
                .scale(tf.rate)
                .add(Interval::from_sum(&t0).scale(tf.kappa));
            if tf.b != 0.0 {
                let tl = self.tail_series(t, p, 0.0, 1).scaled(flo, fhi);
                tail_num = tail_num.add(Interval::from_sum(&tl).scale(-tf.b));
                if self.eps_bar > 0.0 {
                    let mag = Interval::from_sum(&h_tail).scale(tf.rate.abs()).hi
                        + tl.upper * tf.b.abs()
                        + t0.upper * tf.kappa.abs();
                    let widen = mag * (fhi - 1.0) + self.eps_bar * fhi * t0.upper;
                    tail_num = tail_num.add(Interval { lo: -widen, hi: widen });
                }
            } else if self.eps_bar > 0.0 {
                let mag = h_tail.upper * tf.rate.abs() + t0.upper * tf.kappa.abs();
                let widen = mag * (fhi - 1.0) + self.eps_bar * fhi * t0.upper;
                tail_num = tail_num.add(Interval { lo: -widen, hi: widen });
            }
            Some(num.enclosure().add(tail_num))
        };
        Sums { g: g_total, h: h_total, num: num_total }
    }

    /// Pressure `p(t)` with its bracketing enclosures.
    pub fn solve_pressure(&self, t: f64) -> Result<PressureSolution> {
        let p_bad = self.bad_pressure(t);
        let g_bad = self.certified_g(t, p_bad);
        if g_bad.upper <= 1.0 + SLACK {
            return Ok(PressureSolution { t, p: p_bad, p_lower: p_bad, p_upper: p_bad, p_bad, g_at_bad: g_bad, g_at_p: g_bad, iterations: 0 });
        }
        if g_bad.lower <= 1.0 + SLACK {
            return Err(Error::Indeterminate { what: format!("G(t, p_B) at t = {t}"), lower: g_bad.lower, upper: g_bad.upper });
        }
        let mut lo = p_bad;
        let mut step = 1.0;
        let mut hi = p_bad + step;
        let mut g_hi = self.certified_g(t, hi);
        while g_hi.lower > 1.0 {
            lo = hi;
            step *= 2.0;
            hi = p_bad + step;
            if step > 1e12 {
                return Err(Error::RootFinding(format!("no upper bracket for the pressure at t = {t}")));
            }
            g_hi = self.certified_g(t, hi);
        }
        let mut iterations = 0;
        let mut g_mid = g_hi;
        let mut mid = hi;
        while hi - lo > self.tol.root_tol && iterations < self.tol.max_bisections {
            mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            g_mid = self.certified_g(t, mid);
            iterations += 1;
            if g_mid.lower > 1.0 {
                lo = mid;
            } else if g_mid.upper < 1.0 {
                hi = mid;
            } else {
                break;
            }
        }
        let p = if g_mid.contains(1.0) { mid } else { 0.5 * (lo + hi) };
        let g_lo = self.certified_g(t, lo);
        let g_hi = self.certified_g(t, hi);
        if g_lo.upper < g_hi.lower {
            return Err(Error::RootFinding(format!("G not decreasing in p at t = {t}")));
        }
        let g_at_p = if p == mid { g_mid } else { self.certified_g(t, p) };
        Ok(PressureSolution { t, p, p_lower: lo, p_upper: hi, p_bad, g_at_bad: g_bad, g_at_p, iterations })
    }

    pub fn classify(&self, t: f64) -> Result<Classification> {
        let solution = self.solve_pressure(t)?;
        if solution.on_floor() && solution.g_at_bad.upper < 1.0 - SLACK {
            let h = self.sums(t, solution.p).h;
            return Ok(Classification { class: RecurrenceClass::Transient, solution, h });
        }
        if solution.on_floor() && solution.g_at_bad.lower < 1.0 - SLACK {
            return Err(Error::Indeterminate {
                what: format!("G(t, p_B) against 1 at t = {t}"),
                lower: solution.g_at_bad.lower,
                upper: solution.g_at_bad.upper,
            });
        }
        let h = self.sums(t, solution.p).h;
        let class = if h.is_divergent() { RecurrenceClass::NullRecurrent } else { RecurrenceClass::PositiveRecurrent };
        Ok(Classification { class, solution, h })
    }

    /// `p'(t)` by the return-time formula `Σ s_n w_n / Σ n w_n`.
    pub fn pressure_derivative(&self, t: f64) -> Result<Slope> {
        let c = self.classify(t)?;
        Ok(self.slope_from(&c))
    }

    fn slope_from(&self, c: &Classification) -> Slope {
        if c.class == RecurrenceClass::Transient {
            return Slope::exact(self.bad_value);
        }
        let sums = self.sums(c.solution.t, c.solution.p);
        match sums.num {
            None => Slope::ZeroLimit,
            Some(num) => {
                let q = num.div_positive(Interval::from_sum(&sums.h));
                Slope::Finite { lower: q.lo, upper: q.hi }
            }
        }
    }

    fn flat_state(&self, t: f64) -> FlatState {
        let g = self.certified_g(t, self.bad_pressure(t));
        if g.upper <= 1.0 + SLACK {
            FlatState::Flat
        } else if g.lower > 1.0 + SLACK {
            FlatState::Analytic
        } else {
            FlatState::Boundary
        }
    }

    /// Flat set `{t : G(t, p_B(t)) <= 1}` inside `bracket`; an interval since
    /// `t ↦ G(t, p_B(t))` is log-convex.
    pub fn locate_flat_interval(&self, bracket: (f64, f64), tol: f64) -> Option<FlatInterval> {
        const SAMPLES: usize = 65;
        let (a, b) = bracket;
        let ts: Vec<f64> = (0..SAMPLES).map(|i| a + (b - a) * i as f64 / (SAMPLES - 1) as f64).collect();
        let states: Vec<FlatState> = ts.iter().map(|&t| self.flat_state(t)).collect();
        let first = states.iter().position(|s| *s != FlatState::Analytic)?;
        let last = states.iter().rposition(|s| *s != FlatState::Analytic)?;
        let left = if first == 0 {
            Bound::Beyond
        } else {
            self.bisect_boundary(ts[first - 1], ts[first], tol, true)
        };
        let right = if last == SAMPLES - 1 {
            Bound::Beyond
        } else {
            self.bisect_boundary(ts[last], ts[last + 1], tol, false)
        };
        Some(FlatInterval { left, right })
    }

    /// Bisection between an analytic and a flat point. `rising` means the
    /// flat side is on the right.
    fn bisect_boundary(&self, a: f64, b: f64, tol: f64, rising: bool) -> Bound {
        let (mut analytic, mut flat) = if rising { (a, b) } else { (b, a) };
        if self.flat_state(flat) == FlatState::Boundary {
            return Bound::At { lower: flat, upper: flat };
        }
        for _ in 0..self.tol.max_bisections {
            if (flat - analytic).abs() <= tol {
                break;
            }
            let mid = 0.5 * (analytic + flat);
            match self.flat_state(mid) {
                FlatState::Flat => flat = mid,
                FlatState::Analytic => analytic = mid,
                FlatState::Boundary => return Bound::At { lower: mid, upper: mid },
            }
        }
        Bound::At { lower: analytic.min(flat), upper: analytic.max(flat) }
    }

    /// First-order iff `Σ n w_n` at `(t*, p_B(t*))` is finite.
    pub fn smoothness_at_transition(&self, t_star: f64) -> Smoothness {
        if self.sums(t_star, self.bad_pressure(t_star)).h.is_divergent() {
            Smoothness::C1
        } else {
            Smoothness::FirstOrder
        }
    }

    pub fn smoothness_report(&self, flat: &FlatInterval) -> SmoothnessReport {
        let left = flat.left.value().map(|t| self.smoothness_at_transition(t));
        let right = flat.right.value().map(|t| self.smoothness_at_transition(t));
        let endpoints_agree = match (left, right) {
            (Some(l), Some(r)) => Some(l == r),
            _ => None,
        };
        SmoothnessReport { left, right, endpoints_agree }
    }

    /// Level masses of the conformal measure and the mass left on the bad set.
    pub fn conformal_atom_masses(&self, t: f64, levels: usize) -> Result<AtomReport> {
        let sol = self.solve_pressure(t)?;
        let p = sol.p;
        let level_masses = (1..=levels).map(|n| self.log_weight(n, t, p).exp()).collect();
        let total = sol.g_at_p;
        let atom = Interval { lo: (1.0 - total.upper).max(0.0), hi: (1.0 - total.lower).max(0.0) };
        let dissipative = atom.lo > 1e-9;
        if !dissipative && atom.hi > 1e-8 {
            return Err(Error::Indeterminate { what: format!("atom mass at t = {t}"), lower: atom.lo, upper: atom.hi });
        }
        let factor = (t * self.s(1) - p).exp();
        let preimage_mass = atom.scale(factor);
        Ok(AtomReport { p, level_masses, total, atom, preimage_mass, dissipative })
    }

    /// `u0 = -log G(t, p(t))`: the largest bonus on the base cylinder that
    /// leaves the pressure unchanged.
    pub fn cyr_sarig_witness(&self, t: f64) -> Result<Witness> {
        let c = self.classify(t)?;
        let g = c.solution.g_at_p;
        let u0 = if c.class == RecurrenceClass::Transient {
            Interval { lo: (-g.upper.ln()).max(0.0), hi: (-g.lower.ln()).max(0.0) }
        } else {
            Interval::point(0.0)
        };
        Ok(Witness { u0, class: c.class })
    }

    /// Pressure change caused by a base bonus `u`.
    pub fn bonus_pressure_shift(&self, t: f64, u: f64) -> Result<f64> {
        let p0 = self.solve_pressure(t)?.p;
        let p1 = self.with_base_bonus(u).solve_pressure(t)?.p;
        Ok(p1 - p0)
    }

    pub fn induced_equilibrium_weights(&self, t: f64, levels: usize) -> Result<EquilibriumWeights> {
        let c = self.classify(t)?;
        if c.class == RecurrenceClass::Transient {
            return domain(format!("no induced equilibrium state at transient t = {t}"));
        }
        let p = c.solution.p;
        let sums = self.sums(t, p);
        let gmid = sums.g.mid();
        let raw: Vec<f64> = (1..=levels).map(|n| self.log_weight(n, t, p).exp()).collect();
        let normalized = raw.iter().map(|w| w / gmid).collect();
        let per_cylinder = raw.iter().enumerate().map(|(i, w)| w / (self.log_m(i + 1).exp() * gmid)).collect();
        let g_iv = Interval::from_sum(&sums.g);
        let mean_return_time = (!sums.h.is_divergent()).then(|| Interval::from_sum(&sums.h).div_positive(g_iv));
        let integral_phi = sums.num.map(|n| n.div_positive(g_iv));
        let integral_psi_finite = mean_return_time.is_some() || p == 0.0;
        Ok(EquilibriumWeights { p, raw, normalized, per_cylinder, total: sums.g, mean_return_time, integral_phi, integral_psi_finite })
    }

    /// `λ_n = e^{-np} Z_n` for `n = 0..=n_max`, where `Z_n` sums over
    /// period-n points starting at the base; renewal recursion
    /// `λ_n = Σ_{l=1}^{n} w_l λ_{n-l}`, `λ_0 = 1`.
    pub fn renewal_lambda(&self, t: f64, p: f64, n_max: usize) -> Vec<f64> {
        let w: Vec<f64> = (1..=n_max).map(|l| self.log_weight(l, t, p).exp()).collect();
        let mut lam = vec![0.0; n_max + 1];
        lam[0] = 1.0;
        for n in 1..=n_max {
            lam[n] = (1..=n).map(|l| w[l - 1] * lam[n - l]).sum();
        }
        lam
    }

    /// Classification, pressure and derivative at each grid point, plus the
    /// flat-interval transitions inside the grid's range.
    pub fn pressure_curve(&self, t_grid: &[f64], exec: Exec) -> Result<PressureCurve> {
        let points: Vec<Result<(Classification, Slope)>> = exec.map(t_grid, |&t| {
            let c = self.classify(t)?;
            let slope = self.slope_from(&c);
            Ok((c, slope))
        });
        let mut curve = PressureCurve::new(t_grid.to_vec());
        for (i, pt) in points.into_iter().enumerate() {
            let (c, slope) = pt?;
            curve.p_values[i] = c.solution.p;
            curve.classes[i] = c.class;
            curve.derivatives[i] = slope;
            curve.g_values[i] = Some((c.solution.g_at_p.lower, c.solution.g_at_p.upper));
            curve.enclosure_widths[i] = c.solution.p_upper - c.solution.p_lower;
        }
        if t_grid.len() >= 2 {
            let bracket = (t_grid[0], t_grid[t_grid.len() - 1]);
            if let Some(flat) = self.locate_flat_interval(bracket, self.tol.root_tol) {
                for (bound, kind) in [(flat.left, TransitionKind::OnsetOfFlat), (flat.right, TransitionKind::EndOfFlat)] {
                    if let Bound::At { lower, upper } = bound {
                        let smoothness = self.smoothness_at_transition(0.5 * (lower + upper));
                        curve.transitions.push(Transition { t_lower: lower, t_upper: upper, kind, smoothness });
                    }
                }
            }
        }
        Ok(curve)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FlatState {
    Flat,
    Analytic,
    Boundary,
}
