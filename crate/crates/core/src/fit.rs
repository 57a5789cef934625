//! Small fitting utilities: linear least squares, Aitken extrapolation and
//! a two-line fit for locating a kink.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub coef: Vec<f64>,
    /// Standard errors of the coefficients.
    pub se: Vec<f64>,
    /// Residual sum of squares.
    pub rss: f64,
    pub max_abs_residual: f64,
}

/// Least squares for `y ≈ Σ_j coef_j x_j` via the normal equations.
/// `rows[i]` holds the regressors of observation `i`.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<LinearFit> {
    let n = rows.len();
    let k = rows.first().map_or(0, |r| r.len());
    if n != y.len() || n <= k || k == 0 {
        return domain("least squares needs more observations than regressors");
    }
    // Column scaling keeps the normal matrix well conditioned.
    let scale: Vec<f64> = (0..k)
        .map(|j| rows.iter().map(|r| r[j].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE))
        .collect();
    let mut a = vec![vec![0.0; k + 1]; k];
    for (r, yi) in rows.iter().zip(y) {
        for i in 0..k {
            let xi = r[i] / scale[i];
            for j in 0..k {
                a[i][j] += xi * r[j] / scale[j];
            }
            a[i][k] += xi * yi;
        }
    }
    let inv = invert(&a.iter().map(|row| row[..k].to_vec()).collect::<Vec<_>>())?;
    let beta_scaled: Vec<f64> = (0..k).map(|i| (0..k).map(|j| inv[i][j] * a[j][k]).sum()).collect();
    let coef: Vec<f64> = beta_scaled.iter().zip(&scale).map(|(b, s)| b / s).collect();
    let residuals: Vec<f64> = rows
        .iter()
        .zip(y)
        .map(|(r, yi)| yi - r.iter().zip(&coef).map(|(x, c)| x * c).sum::<f64>())
        .collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let sigma2 = rss / (n - k) as f64;
    let se = (0..k).map(|i| (sigma2 * inv[i][i]).max(0.0).sqrt() / scale[i]).collect();
    let max_abs_residual = residuals.iter().map(|e| e.abs()).fold(0.0, f64::max);
    Ok(LinearFit { coef, se, rss, max_abs_residual })
}

fn invert(m: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let k = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..k).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).expect("nonempty");
        if a[p][c].abs() < 1e-300 {
            return domain("singular normal equations");
        }
        a.swap(c, p);
        let d = a[c][c];
        a[c].iter_mut().for_each(|x| *x /= d);
        for r in 0..k {
            if r != c {
                let f = a[r][c];
                if f != 0.0 {
                    for j in 0..2 * k {
                        a[r][j] -= f * a[c][j];
                    }
                }
            }
        }
    }
    Ok(a.into_iter().map(|r| r[k..].to_vec()).collect())
}

/// Aitken Δ² applied to the last three terms; returns the last term when
/// the second difference vanishes.
pub fn aitken_last(seq: &[f64]) -> Option<f64> {
    if seq.len() < 3 {
        return seq.last().copied();
    }
    let n = seq.len();
    let (x0, x1, x2) = (seq[n - 3], seq[n - 2], seq[n - 1]);
    let d2 = x2 - 2.0 * x1 + x0;
    if d2.abs() <= 1e-14 * (x0.abs() + x1.abs() + x2.abs()).max(1e-300) {
        return Some(x2);
    }
    Some(x2 - (x2 - x1).powi(2) / d2)
}

/// Two lines fitted to `(t, p)` on either side of every admissible split;
/// the split with the smallest total residual wins and the kink is the
/// intersection of its lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinkFit {
    pub kink: f64,
    pub left_slope: f64,
    pub right_slope: f64,
    pub rss: f64,
}

pub fn two_slope_fit(t: &[f64], p: &[f64]) -> Result<KinkFit> {
    let n = t.len();
    if n < 6 || p.len() != n {
        return domain("two-slope fit needs at least six points");
    }
    let line = |lo: usize, hi: usize| -> (f64, f64, f64) {
        let m = (hi - lo) as f64;
        let (st, sp) = (t[lo..hi].iter().sum::<f64>(), p[lo..hi].iter().sum::<f64>());
        let (mt, mp) = (st / m, sp / m);
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for i in lo..hi {
            sxx += (t[i] - mt).powi(2);
            sxy += (t[i] - mt) * (p[i] - mp);
        }
        let slope = sxy / sxx;
        let icpt = mp - slope * mt;
        let rss = (lo..hi).map(|i| (p[i] - icpt - slope * t[i]).powi(2)).sum();
        (slope, icpt, rss)
    };
    let mut best: Option<KinkFit> = None;
    for split in 3..=n - 3 {
        let (s1, c1, r1) = line(0, split);
        let (s2, c2, r2) = line(split, n);
        if s1 == s2 {
            continue;
        }
        let kink = (c2 - c1) / (s1 - s2);
        let fit = KinkFit { kink, left_slope: s1, right_slope: s2, rss: r1 + r2 };
        if best.is_none_or(|b| fit.rss < b.rss) {
            best = Some(fit);
        }
    }
    best.map_or_else(|| domain("no split gives distinct slopes"), Ok)
}
