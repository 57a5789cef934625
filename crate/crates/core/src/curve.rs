//! Pressure curves and the per-point verdicts attached to them.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecurrenceClass {
    PositiveRecurrent,
    NullRecurrent,
    Transient,
}

impl RecurrenceClass {
    pub fn short(self) -> &'static str {
        match self {
            RecurrenceClass::PositiveRecurrent => "PR",
            RecurrenceClass::NullRecurrent => "NR",
            RecurrenceClass::Transient => "T",
        }
    }
}

/// A derivative value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Slope {
    /// Enclosure `[lower, upper]`.
    Finite { lower: f64, upper: f64 },
    /// The mean return time diverges; the derivative tends to 0.
    ZeroLimit,
    /// One-sided derivatives differ (several maximizing components).
    Undefined,
}

impl Slope {
    pub fn exact(v: f64) -> Self {
        Slope::Finite { lower: v, upper: v }
    }

    /// Midpoint of the enclosure; `ZeroLimit` maps to 0.
    pub fn value(&self) -> Option<f64> {
        match *self {
            Slope::Finite { lower, upper } => Some(0.5 * (lower + upper)),
            Slope::ZeroLimit => Some(0.0),
            Slope::Undefined => None,
        }
    }

    pub fn width(&self) -> f64 {
        match *self {
            Slope::Finite { lower, upper } => upper - lower,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionKind {
    OnsetOfFlat,
    EndOfFlat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    C1,
    FirstOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Enclosure of the transition point.
    pub t_lower: f64,
    pub t_upper: f64,
    pub kind: TransitionKind,
    pub smoothness: Smoothness,
}

impl Transition {
    pub fn t(&self) -> f64 {
        0.5 * (self.t_lower + self.t_upper)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureCurve {
    pub t_grid: Vec<f64>,
    pub p_values: Vec<f64>,
    pub classes: Vec<RecurrenceClass>,
    pub derivatives: Vec<Slope>,
    /// Enclosure of the induced series at `(t, p(t))`, when one exists.
    pub g_values: Vec<Option<(f64, f64)>>,
    /// Width of the pressure enclosure at each point.
    pub enclosure_widths: Vec<f64>,
    pub transitions: Vec<Transition>,
}

impl PressureCurve {
    pub fn new(t_grid: Vec<f64>) -> Self {
        let n = t_grid.len();
        PressureCurve {
            t_grid,
            p_values: vec![f64::NAN; n],
            classes: vec![RecurrenceClass::PositiveRecurrent; n],
            derivatives: vec![Slope::Undefined; n],
            g_values: vec![None; n],
            enclosure_widths: vec![0.0; n],
            transitions: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    /// Second divided differences are all `>= -tol` (non-uniform grids allowed).
    pub fn is_convex(&self, tol: f64) -> bool {
        second_differences(&self.t_grid, &self.p_values).iter().all(|d| *d >= -tol)
    }
}

/// Second differences normalized to a unit-spacing scale:
/// `p[i+1] - p[i] - (p[i] - p[i-1]) * (t[i+1]-t[i])/(t[i]-t[i-1])`.
pub fn second_differences(t: &[f64], p: &[f64]) -> Vec<f64> {
    (1..t.len().saturating_sub(1))
        .map(|i| {
            let r = (t[i + 1] - t[i]) / (t[i] - t[i - 1]);
            (p[i + 1] - p[i]) - (p[i] - p[i - 1]) * r
        })
        .collect()
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convexity_check() {
        let t = linspace(-1.0, 1.0, 21);
        let mut c = PressureCurve::new(t.clone());
        c.p_values = t.iter().map(|x| x * x).collect();
        assert!(c.is_convex(1e-12));
        c.p_values = t.iter().map(|x| -x * x).collect();
        assert!(!c.is_convex(1e-9));
        c.p_values = t.iter().map(|x| f64::max(-x, -2.0 * x)).collect();
        assert!(c.is_convex(1e-12));
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, 2.0, 5);
        assert_eq!(g, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(linspace(3.0, 4.0, 1), vec![3.0]);
    }
}
