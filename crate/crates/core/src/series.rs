//! Certified summation of positive series of the form
//! `Σ_{n≥N} exp(c + ρ n) (n+σ)^a (ln(n+σ))^j`.
//!
//! A finite head is summed explicitly with compensated summation and a
//! rounding pad; the rest is enclosed either by an exact geometric formula
//! or by the integral test for convex decreasing summands:
//! `∫_M^∞ f + f(M)/2 ≤ Σ_{k≥0} f(M+k) ≤ ∫_{M-1/2}^∞ f`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// How the part of the series beyond the explicit terms was enclosed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailMethod {
    Geometric,
    IntegralTest,
    /// Nothing beyond the explicit terms.
    Zero,
    /// The series diverges; both bounds are `+∞`.
    Divergent,
}

/// An enclosure `[lower, upper]` of a series value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedSum {
    pub lower: f64,
    pub upper: f64,
    pub n_terms: usize,
    pub tail_method: TailMethod,
}

impl CertifiedSum {
    pub fn zero() -> Self {
        CertifiedSum { lower: 0.0, upper: 0.0, n_terms: 0, tail_method: TailMethod::Zero }
    }

    pub fn divergent(n_terms: usize) -> Self {
        CertifiedSum { lower: f64::INFINITY, upper: f64::INFINITY, n_terms, tail_method: TailMethod::Divergent }
    }

    pub fn is_divergent(&self) -> bool {
        self.upper == f64::INFINITY
    }

    pub fn mid(&self) -> f64 {
        if self.is_divergent() {
            f64::INFINITY
        } else {
            0.5 * (self.lower + self.upper)
        }
    }

    pub fn width(&self) -> f64 {
        if self.is_divergent() {
            0.0
        } else {
            self.upper - self.lower
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Sum of two enclosures; the tail method of the later one is kept.
    pub fn plus(&self, other: &CertifiedSum) -> CertifiedSum {
        if self.is_divergent() || other.is_divergent() {
            return CertifiedSum::divergent(self.n_terms + other.n_terms);
        }
        CertifiedSum {
            lower: down(self.lower + other.lower),
            upper: up(self.upper + other.upper),
            n_terms: self.n_terms + other.n_terms,
            tail_method: if other.tail_method == TailMethod::Zero { self.tail_method } else { other.tail_method },
        }
    }

    /// Multiplies by a nonnegative factor enclosure `[lo, hi]`.
    pub fn scaled(&self, lo: f64, hi: f64) -> CertifiedSum {
        debug_assert!(0.0 <= lo && lo <= hi);
        if self.is_divergent() {
            return *self;
        }
        CertifiedSum { lower: down(self.lower * lo), upper: up(self.upper * hi), ..*self }
    }
}

/// Signed interval used to combine enclosures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn from_sum(s: &CertifiedSum) -> Self {
        Interval { lo: s.lower, hi: s.upper }
    }

    pub fn add(self, o: Interval) -> Interval {
        Interval { lo: down(self.lo + o.lo), hi: up(self.hi + o.hi) }
    }

    pub fn scale(self, k: f64) -> Interval {
        if k == 0.0 {
            return Interval::point(0.0);
        }
        let (a, b) = (self.lo * k, self.hi * k);
        Interval { lo: down(a.min(b)), hi: up(a.max(b)) }
    }

    /// Quotient by an interval of positive numbers.
    pub fn div_positive(self, d: Interval) -> Interval {
        debug_assert!(d.lo > 0.0);
        let c = [self.lo / d.lo, self.lo / d.hi, self.hi / d.lo, self.hi / d.hi];
        Interval {
            lo: down(c.iter().cloned().fold(f64::INFINITY, f64::min)),
            hi: up(c.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
        }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

const EPS: f64 = f64::EPSILON;

fn up(x: f64) -> f64 {
    if x.is_finite() {
        x + x.abs() * EPS + f64::MIN_POSITIVE
    } else {
        x
    }
}

fn down(x: f64) -> f64 {
    if x.is_finite() {
        x - x.abs() * EPS - f64::MIN_POSITIVE
    } else {
        x
    }
}

/// Neumaier-compensated accumulator of `exp(x)` terms with a per-term
/// rounding pad proportional to `|x|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PaddedSum {
    sum: f64,
    comp: f64,
    pad: f64,
    count: usize,
}

impl PaddedSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `exp(x)`; `scale` bounds the magnitudes that were summed to form `x`.
    pub fn add_exp(&mut self, x: f64, scale: f64) {
        let v = x.exp();
        self.add(v, v * EPS * (4.0 + scale));
    }

    /// Adds a value with a known absolute error bound.
    pub fn add(&mut self, v: f64, err: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
        self.pad += err;
        self.count += 1;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn enclosure(&self) -> Interval {
        let v = self.value();
        let err = self.pad + 4.0 * EPS * v.abs();
        Interval { lo: v - err, hi: v + err }
    }

    pub fn certified(&self) -> CertifiedSum {
        let e = self.enclosure();
        CertifiedSum { lower: e.lo.max(0.0), upper: e.hi, n_terms: self.count, tail_method: TailMethod::Zero }
    }
}

/// Summand `exp(log_c + ρ n) (n+σ)^a (ln(n+σ))^j`, `j ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerExpTerm {
    pub log_c: f64,
    pub rho: f64,
    pub a: f64,
    pub j: u8,
    pub sigma: f64,
}

impl PowerExpTerm {
    fn exponent(&self, n: f64) -> (f64, f64) {
        let y = n + self.sigma;
        let mut x = self.log_c + self.rho * n + self.a * y.ln();
        let mut scale = self.log_c.abs() + (self.rho * n).abs() + (self.a * y.ln()).abs();
        if self.j == 1 {
            x += y.ln().ln();
            scale += y.ln().ln().abs() + 2.0;
        }
        (x, scale)
    }

    pub fn term(&self, n: usize) -> f64 {
        self.exponent(n as f64).0.exp()
    }

    /// `d/dy log f` and `f''/f` at `y = n + σ`.
    fn log_derivatives(&self, y: f64) -> (f64, f64) {
        let ly = y.ln();
        let (mut g1, mut g2) = (self.a / y + self.rho, -self.a / (y * y));
        if self.j == 1 {
            g1 += 1.0 / (y * ly);
            g2 -= (ly + 1.0) / (y * ly).powi(2);
        }
        (g1, g2 + g1 * g1)
    }

    fn convex_decreasing_at(&self, y: f64) -> bool {
        let (d1, d2) = self.log_derivatives(y);
        d1 < 0.0 && d2 > 0.0
    }

    fn converges(&self) -> bool {
        self.rho < 0.0 || (self.rho == 0.0 && self.a < -1.0)
    }
}

/// Options for [`certified_tail`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumOptions {
    /// Target width relative to `max(1, value)`.
    pub tol: f64,
    /// Cap on explicitly summed terms.
    pub max_explicit: usize,
}

impl Default for SumOptions {
    fn default() -> Self {
        SumOptions { tol: 1e-13, max_explicit: 1 << 22 }
    }
}

/// Enclosure of `Σ_{n ≥ n_start} term(n)`.
pub fn certified_tail(term: &PowerExpTerm, n_start: usize, opts: SumOptions) -> CertifiedSum {
    if term.log_c == f64::NEG_INFINITY {
        return CertifiedSum::zero();
    }
    if !term.converges() {
        return CertifiedSum::divergent(0);
    }
    assert!(term.j == 0 || n_start as f64 + term.sigma > std::f64::consts::E, "log factor needs n+σ > e");
    assert!(n_start as f64 + term.sigma > 0.0, "n+σ must be positive");

    if term.j == 0 && (term.a == 0.0 || term.a == 1.0) {
        return geometric_tail(term, n_start);
    }

    // First M with f convex and decreasing on [M+σ-1/2, ∞).
    let mut m = n_start;
    let mut step = 1usize;
    while !convex_decreasing_beyond(term, m as f64 + term.sigma - 0.5) {
        m = n_start + step;
        step *= 2;
        if step > opts.max_explicit {
            return CertifiedSum::divergent(0);
        }
    }

    let mut head = PaddedSum::new();
    let mut next = n_start;
    loop {
        while next < m {
            let (x, s) = term.exponent(next as f64);
            head.add_exp(x, s);
            next += 1;
        }
        let y0 = m as f64 + term.sigma;
        let f0 = term.exponent(m as f64).0.exp();
        let lo_int = integral(term, y0);
        let hi_int = integral(term, y0 - 0.5);
        let h = head.enclosure();
        let lower = down(h.lo + lo_int.0 + 0.5 * f0 * (1.0 - 4.0 * EPS));
        let upper = up(h.hi + hi_int.1);
        let width = upper - lower;
        let done = width <= opts.tol * lower.max(1.0) || m - n_start >= opts.max_explicit;
        if done {
            return CertifiedSum { lower: lower.max(0.0), upper, n_terms: head.len(), tail_method: TailMethod::IntegralTest };
        }
        m = n_start + 2 * (m - n_start).max(16);
    }
}

fn convex_decreasing_beyond(term: &PowerExpTerm, y: f64) -> bool {
    if y <= 1.0 && term.j == 1 {
        return false;
    }
    if y <= 0.0 {
        return false;
    }
    // The sign conditions are rational in (y, ln y); sample geometrically.
    let mut z = y;
    for _ in 0..64 {
        if !term.convex_decreasing_at(z) {
            return false;
        }
        z *= 1.5;
    }
    true
}

/// Exact sums for `a ∈ {0, 1}`, `j = 0`.
fn geometric_tail(term: &PowerExpTerm, n_start: usize) -> CertifiedSum {
    let n = n_start as f64;
    let r = term.rho;
    let one_minus = -r.exp_m1();
    let lead = (term.log_c + r * n).exp();
    let value = if term.a == 0.0 {
        lead / one_minus
    } else {
        // Σ_{k≥0} (n+k+σ) e^{rk} = (n+σ)/(1-e^r) + e^r/(1-e^r)^2
        lead * ((n + term.sigma) / one_minus + r.exp() / (one_minus * one_minus))
    };
    let scale = term.log_c.abs() + (r * n).abs() + 8.0;
    let err = value * EPS * (8.0 + scale);
    CertifiedSum { lower: (value - err).max(0.0), upper: value + err, n_terms: 0, tail_method: TailMethod::Geometric }
}

/// Enclosure of `∫_L^∞ exp(log_c + ρ(y-σ)) y^a (ln y)^j dy`.
fn integral(term: &PowerExpTerm, l: f64) -> (f64, f64) {
    let k = term.log_c - term.rho * term.sigma;
    let (a, r) = (term.a, term.rho);
    let ln_l = l.ln();
    let closed = if r == 0.0 {
        let e = -(a + 1.0);
        let base = (k + (a + 1.0) * ln_l).exp();
        Some(if term.j == 0 { base / e } else { base * (ln_l / e + 1.0 / (e * e)) })
    } else if term.j == 0 && a == 0.0 {
        Some((k + r * l).exp() / -r)
    } else if term.j == 0 && a == 1.0 {
        Some((k + r * l).exp() * (l / -r + 1.0 / (r * r)))
    } else {
        None
    };
    if let Some(v) = closed {
        let err = v * EPS * (32.0 + k.abs() + (r * l).abs() + (a * ln_l).abs());
        return ((v - err).max(0.0), v + err);
    }
    let v = quadrature(term, k, l);
    let err = v * 1e-13;
    ((v - err).max(0.0), v + err)
}

/// `∫_0^∞ g(w) dw` with `y = L e^w`, composite Gauss–Legendre on panels.
fn quadrature(term: &PowerExpTerm, k: f64, l: f64) -> f64 {
    let (nodes, weights) = gauss_legendre_16();
    let ln_l = l.ln();
    let log_g = |w: f64| {
        let mut x = k + term.rho * l * w.exp() + (term.a + 1.0) * (ln_l + w);
        if term.j == 1 {
            x += (ln_l + w).ln();
        }
        x
    };
    let dlog_g = |w: f64| {
        let mut d = term.rho * l * w.exp() + term.a + 1.0;
        if term.j == 1 {
            d += 1.0 / (ln_l + w);
        }
        d
    };
    // log g is concave in w, so once it decreases the remainder past w is
    // at most g(w)/|d log g(w)|. Panels shrink where log g moves quickly.
    let mut acc = PaddedSum::new();
    let mut w0 = 0.0;
    for _ in 0..100_000 {
        let h_full = (2.0 / dlog_g(w0).abs().max(1e-300)).min(0.5);
        let w1 = w0 + h_full;
        let (c, h) = (0.5 * (w0 + w1), 0.5 * h_full);
        let mut panel = 0.0;
        for (x, wt) in nodes.iter().zip(weights) {
            panel += wt * log_g(c + h * x).exp();
        }
        acc.add(panel * h, 0.0);
        w0 = w1;
        let d = dlog_g(w0);
        if d < 0.0 && log_g(w0).exp() / -d < 1e-17 * acc.value() {
            break;
        }
    }
    acc.value()
}

/// Nodes and weights on `[-1, 1]`.
fn gauss_legendre_16() -> &'static ([f64; 16], [f64; 16]) {
    static GL: OnceLock<([f64; 16], [f64; 16])> = OnceLock::new();
    GL.get_or_init(|| {
        const N: usize = 16;
        let mut x = [0.0; N];
        let mut w = [0.0; N];
        for i in 0..N {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=N {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = N as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    let (mut q0, mut q1) = (1.0, z);
                    for k in 2..=N {
                        let q2 = ((2 * k - 1) as f64 * z * q1 - (k - 1) as f64 * q0) / k as f64;
                        q0 = q1;
                        q1 = q2;
                    }
                    let dq = N as f64 * (z * q1 - q0) / (z * z - 1.0);
                    x[i] = z;
                    w[i] = 2.0 / ((1.0 - z * z) * dq * dq);
                    break;
                }
            }
        }
        (x, w)
    })
}
