//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p thermoform-core --test acceptance`. Tolerances and
//! runtime budgets are pinned below. Sub-checks listed in `KNOWN_FAILURES`
//! still print FAIL; the process exits non-zero only if some other check
//! fails or a listed one unexpectedly passes.

use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use thermoform_core::curve::{linspace, RecurrenceClass, Slope};
use thermoform_core::interval::{
    chebyshev_pressure_exact, gurevich_from_points, hofbauer_doubling_model, kink_from_estimates, mp_induced_model,
    sarig_series_diagnostic, zn_sum, Base, IntervalMap,
};
use thermoform_core::renewal::{Bound, RenewalModel};
use thermoform_core::rpf::{build_transfer_matrix, decompose_components, solve_rpf};
use thermoform_core::sequences::{hofbauer_head, realize, realize_model, Family, RealizedSequence, SequenceSpec, TailSpec};
use thermoform_core::symbolic::{FiniteShift, LocallyConstantPotential};
use thermoform_core::{Exec, Result};

const RPF_FULL_TOL: f64 = 1e-12;
const RPF_BERNOULLI_TOL: f64 = 1e-10;
const COMPONENT_TOL: f64 = 1e-10;
const GEOMETRIC_TOL: f64 = 1e-9;
const KINK_TOL: f64 = 1e-6;
const FLAT_MIN_WIDTH: f64 = 1e-3;
const FIRST_ORDER_SLOPE: f64 = -0.01;
const ATOM_TOL: f64 = 1e-8;
const BONUS_FLAT_TOL: f64 = 1e-8;
const BONUS_RISE_MIN: f64 = 1e-6;
const CHEB_RAW_TOL: f64 = 0.2;
const CHEB_AITKEN_TOL: f64 = 0.05;
const CHEB_KINK_TOL: f64 = 0.05;
const MP_P1_TOL: f64 = 0.05;
const MP_ZERO_TOL: f64 = 0.02;
const MP_MONOTONE_SLACK: f64 = 1e-12;
const BASE_RATE_MAX: f64 = -0.01;
const CROSS_TOL: f64 = 1e-4;
const CROSS_MONOTONE_SLACK: f64 = 1e-12;

/// Sub-checks expected to fail, by criterion and label prefix. For gamma =
/// 1.5 the right end of the flat interval lies where `Σ n w_n` converges,
/// so the two ends get different verdicts.
const KNOWN_FAILURES: &[(u32, &str)] = &[(5, "gamma 1.5: flat")];

struct Outcome {
    checks: Vec<(String, bool)>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { checks: Vec::new() }
    }

    fn check(&mut self, label: impl Into<String>, ok: bool) {
        self.checks.push((label.into(), ok));
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|(_, ok)| !ok).map(|(l, _)| l.as_str()).collect()
    }
}

fn criterion_1() -> Result<Outcome> {
    let mut out = Outcome::new();
    let full = FiniteShift::full(2)?;
    let m = build_transfer_matrix(&full, &LocallyConstantPotential::zero(&full))?;
    let p = solve_rpf(&m, 1e-14)?.pressure;
    out.check(format!("P(0) = {p:.15}, |P - log 2| <= {RPF_FULL_TOL:e}"), (p - LN_2).abs() <= RPF_FULL_TOL);
    for q in [0.3f64, 0.5, 0.9] {
        let pot = LocallyConstantPotential::from_symbol_values(&full, &[q.ln(), (1.0 - q).ln()])?;
        let m = build_transfer_matrix(&full, &pot)?;
        let sol = solve_rpf(&m, 1e-14)?;
        out.check(format!("Bernoulli {q}: |P| = {:.1e}", sol.pressure.abs()), sol.pressure.abs() <= RPF_BERNOULLI_TOL);
        let mut worst = 0.0f64;
        for len in 1..=6 {
            for w in full.admissible_words(len) {
                let product: f64 = w.iter().map(|&s| if s == 0 { q } else { 1.0 - q }).product();
                worst = worst.max((sol.cylinder_mass(&m, &w) - product).abs());
            }
        }
        out.check(format!("Bernoulli {q}: cylinder error {worst:.1e}"), worst <= RPF_BERNOULLI_TOL);
    }
    Ok(out)
}

fn criterion_2() -> Result<Outcome> {
    let mut out = Outcome::new();
    let split = FiniteShift::disjoint_full(&[2, 2])?;
    let psi = LocallyConstantPotential::from_symbol_values(&split, &[-1.0, -1.0, -2.0, -2.0])?;
    let mut worst = 0.0f64;
    for t in linspace(-2.0, 2.0, 11) {
        let d = decompose_components(&split, &psi.scaled(t), 1e-14)?;
        worst = worst.max((d.pressure - (f64::max(-t, -2.0 * t) + LN_2)).abs());
        if t == 0.0 {
            out.check(format!("t = 0: {} maximizing components", d.maximizers.len()), d.maximizers.len() == 2);
        } else if d.non_unique() {
            out.check(format!("t = {t}: spurious tie"), false);
        }
    }
    out.check(format!("max |p - max(-t, -2t) - log 2| = {worst:.1e}"), worst <= COMPONENT_TOL);
    Ok(out)
}

fn kink_of(model: &RenewalModel) -> Option<f64> {
    match model.locate_flat_interval((0.0, 3.0), 1e-12)?.left {
        Bound::At { lower, upper } => Some(0.5 * (lower + upper)),
        Bound::Beyond => None,
    }
}

fn criterion_3() -> Result<Outcome> {
    let mut out = Outcome::new();
    let c = 1.0;
    let cases: [(bool, fn(f64) -> f64, f64); 2] = [
        (false, |tc| f64::max(0.0, LN_2 - tc), LN_2),
        (true, |tc| f64::max(LN_2, 3f64.ln() - tc), 3f64.ln() - LN_2),
    ];
    for (binary, exact, kink) in cases {
        let name = if binary { "m_n = 2^(n-1)" } else { "m_n = 1" };
        let model = RenewalModel::geometric(binary, c)?;
        let grid = linspace(0.0, 3.0, 101);
        let ps: Vec<Result<f64>> = Exec::default().map(&grid, |&t| model.solve_pressure(t).map(|s| s.p));
        let mut worst = 0.0f64;
        for (t, p) in grid.iter().zip(ps) {
            worst = worst.max((p? - exact(t * c)).abs());
        }
        out.check(format!("{name}: max pressure error {worst:.1e}"), worst <= GEOMETRIC_TOL);
        match kink_of(&model) {
            Some(k) => out.check(format!("{name}: kink {k:.12} vs {kink:.12}"), (k - kink).abs() <= KINK_TOL),
            None => out.check(format!("{name}: kink not found"), false),
        }
    }
    Ok(out)
}

fn hofbauer(tail: TailSpec, head: Vec<f64>, target: Option<f64>) -> Result<RealizedSequence> {
    realize(&SequenceSpec { family: Family::Hofbauer, tail, head, delta: None, normalization_target: target })
}

/// The five rows: `(label, sequence, expected class, Σ e^{s_n} vs 1,
/// Σ (n+1) e^{s_n} finite)`.
fn figure_rows() -> Result<Vec<(&'static str, RealizedSequence, RecurrenceClass)>> {
    use RecurrenceClass::*;
    let zero_tail = RealizedSequence {
        family: Family::Hofbauer,
        tail: TailSpec::Zero,
        head: vec![0.0, -1.0, -0.5],
        shift: 0.0,
        perturbation: None,
        total: None,
    };
    Ok(vec![
        ("sum > 1, sum a_k finite", zero_tail, PositiveRecurrent),
        ("sum > 1, sum a_k infinite", hofbauer(TailSpec::Log { gamma: 3.0 }, vec![], Some(1.5))?, PositiveRecurrent),
        ("sum = 1, sum (n+1)e^s finite", hofbauer(TailSpec::Log { gamma: 3.0 }, vec![-LN_2], Some(1.0))?, PositiveRecurrent),
        ("sum = 1, sum (n+1)e^s infinite", hofbauer(TailSpec::Log { gamma: 1.5 }, vec![-LN_2], Some(1.0))?, NullRecurrent),
        ("sum < 1", hofbauer(TailSpec::Log { gamma: 3.0 }, vec![-LN_2], Some(1.0))?.shift_a0(-LN_2), Transient),
    ])
}

fn criterion_4() -> Result<Outcome> {
    let mut out = Outcome::new();
    for (label, seq, expected) in figure_rows()? {
        let model = realize_model(&seq)?;
        let total = seq.exp_sum();
        let first_moment = model.sums(1.0, 0.0).h;
        let semantics = match expected {
            RecurrenceClass::PositiveRecurrent if total.lo > 1.0 => true,
            RecurrenceClass::PositiveRecurrent => {
                (total.lo - 1.0).abs() < 1e-12 && (total.hi - 1.0).abs() < 1e-12 && !first_moment.is_divergent()
            }
            RecurrenceClass::NullRecurrent => {
                (total.lo - 1.0).abs() < 1e-12 && (total.hi - 1.0).abs() < 1e-12 && first_moment.is_divergent()
            }
            RecurrenceClass::Transient => total.hi < 1.0,
        };
        let c = model.classify(1.0)?;
        let g = c.solution.g_at_p;
        let certified = g.lower <= g.upper && (g.upper - g.lower) <= 1e-9 * g.upper.max(1.0);
        out.check(
            format!(
                "{label}: sum in [{:.12}, {:.12}], class {} (expected {}), G width {:.1e}",
                total.lo,
                total.hi,
                c.class.short(),
                expected.short(),
                g.upper - g.lower
            ),
            semantics && c.class == expected && certified,
        );
    }
    Ok(out)
}

fn grid_model(gamma: f64) -> Result<RenewalModel> {
    let seq = realize(&SequenceSpec {
        family: Family::Grid,
        tail: TailSpec::Log { gamma },
        head: vec![],
        delta: Some(0.2),
        normalization_target: Some(2.0),
    })?;
    realize_model(&seq)
}

fn slope_at(model: &RenewalModel, t: f64) -> Result<f64> {
    Ok(match model.pressure_derivative(t)? {
        Slope::Finite { lower, upper } => 0.5 * (lower + upper),
        Slope::ZeroLimit => 0.0,
        Slope::Undefined => f64::NAN,
    })
}

fn criterion_5() -> Result<Outcome> {
    use RecurrenceClass::*;
    let mut out = Outcome::new();

    let m3 = grid_model(3.0)?;
    let flat = m3.locate_flat_interval((0.5, 10.0), 1e-10);
    match flat.and_then(|f| Some((f.left.value()?, f.right.value()?, f))) {
        Some((t0, t1, f)) => {
            out.check(format!("gamma 3: flat [{t0:.6}, {t1:.6}]"), (t0 - 1.0).abs() < 1e-6 && t1 > 1.0 + FLAT_MIN_WIDTH);
            let d = slope_at(&m3, 1.0 - 1e-3)?;
            out.check(format!("gamma 3: Dp(1 - 1e-3) = {d:.6}"), d <= FIRST_ORDER_SLOPE);
            let ts = [0.5, 0.5 * (1.0 + t1), t1 + 0.5];
            let classes = ts.iter().map(|&t| m3.classify(t).map(|c| c.class)).collect::<Result<Vec<_>>>()?;
            let names: Vec<&str> = classes.iter().map(|c| c.short()).collect();
            out.check(
                format!("gamma 3: classes {}", names.join(" -> ")),
                classes == [PositiveRecurrent, Transient, PositiveRecurrent],
            );
            let r = m3.smoothness_report(&f);
            out.check(format!("gamma 3: end verdicts {:?} / {:?}", r.left, r.right), r.endpoints_agree == Some(true));
        }
        None => out.check("gamma 3: flat interval with two ends", false),
    }

    let m15 = grid_model(1.5)?;
    let hs = [1e-1, 1e-2, 1e-3, 1e-4];
    let ds = hs.iter().map(|&h| slope_at(&m15, 1.0 - h)).collect::<Result<Vec<_>>>()?;
    let decreasing = ds.windows(2).all(|w| w[1].abs() < w[0].abs()) && ds[3].abs() < 0.01;
    out.check(format!("gamma 1.5: Dp(1 - h) = {:.2e} {:.2e} {:.2e} {:.2e}", ds[0], ds[1], ds[2], ds[3]), decreasing);
    let c1 = m15.classify(1.0)?.class;
    out.check(format!("gamma 1.5: class at 1 = {}", c1.short()), c1 == NullRecurrent);
    match m15.locate_flat_interval((0.5, 10.0), 1e-10) {
        Some(f) => {
            let r = m15.smoothness_report(&f);
            out.check(
                format!(
                    "gamma 1.5: flat [{:.6}, {:.6}], end verdicts {:?} / {:?}",
                    f.left.value().unwrap_or(f64::NAN),
                    f.right.value().unwrap_or(f64::NAN),
                    r.left,
                    r.right
                ),
                r.endpoints_agree == Some(true),
            );
        }
        None => out.check("gamma 1.5: flat interval", false),
    }
    Ok(out)
}

fn criterion_6() -> Result<Outcome> {
    let mut out = Outcome::new();
    let seq = hofbauer(TailSpec::Log { gamma: 3.0 }, vec![-LN_2], Some(1.0))?.shift_a0(-LN_2);
    let total = seq.exp_sum();
    out.check(
        format!("sum e^s in [{:.12}, {:.12}]", total.lo, total.hi),
        (total.lo - 0.5).abs() <= ATOM_TOL && (total.hi - 0.5).abs() <= ATOM_TOL,
    );
    let model = realize_model(&seq)?;
    let rep = model.conformal_atom_masses(1.0, 10)?;
    out.check(
        format!("atom in [{:.12}, {:.12}]", rep.atom.lo, rep.atom.hi),
        rep.dissipative && (rep.atom.lo - 0.5).abs() <= ATOM_TOL && (rep.atom.hi - 0.5).abs() <= ATOM_TOL,
    );
    let expected = rep.atom.mid() * seq.a(0).exp();
    out.check(
        format!("preimage {:.12} vs atom * e^(a_0) = {expected:.12}", rep.preimage_mass.mid()),
        (rep.preimage_mass.mid() - expected).abs() <= ATOM_TOL,
    );
    Ok(out)
}

fn criterion_7() -> Result<Outcome> {
    let mut out = Outcome::new();
    let mut models: Vec<(String, RenewalModel, Vec<f64>)> = vec![
        ("geometric m_n = 1".into(), RenewalModel::geometric(false, 1.0)?, linspace(0.05, 2.95, 30)),
        ("geometric m_n = 2^(n-1)".into(), RenewalModel::geometric(true, 1.0)?, linspace(0.05, 2.95, 30)),
        ("grid gamma 3".into(), grid_model(3.0)?, linspace(0.55, 4.45, 27)),
        ("grid gamma 1.5".into(), grid_model(1.5)?, linspace(0.55, 4.45, 27)),
    ];
    for (label, seq, _) in figure_rows()? {
        models.push((format!("row '{label}'"), realize_model(&seq)?, vec![1.0]));
    }
    let mut mismatches = Vec::new();
    let (mut n_points, mut n_transient, mut worst_flat, mut least_rise) = (0, 0, 0.0f64, f64::INFINITY);
    for (label, model, grid) in &models {
        let rows: Vec<Result<(f64, bool, bool, f64, f64)>> = Exec::default().map(grid, |&t| {
            let w = model.cyr_sarig_witness(t)?;
            let transient = w.class == RecurrenceClass::Transient;
            let (mut flat, mut rise) = (0.0, f64::INFINITY);
            if transient {
                let u0 = w.u0.mid();
                flat = model.bonus_pressure_shift(t, 0.5 * u0)?.abs();
                rise = model.bonus_pressure_shift(t, 2.0 * u0)?;
            }
            Ok((t, w.positive(), transient, flat, rise))
        });
        for row in rows {
            let (t, positive, transient, flat, rise) = row?;
            n_points += 1;
            if positive != transient {
                mismatches.push(format!("{label} at t = {t}"));
            }
            if transient {
                n_transient += 1;
                worst_flat = worst_flat.max(flat);
                least_rise = least_rise.min(rise);
            }
        }
    }
    out.check(
        format!("u0 > 0 iff transient at {n_points} points ({n_transient} transient), mismatches {mismatches:?}"),
        mismatches.is_empty() && n_transient > 0,
    );
    out.check(format!("u0/2 bonus: max |dp| = {worst_flat:.1e}"), worst_flat <= BONUS_FLAT_TOL);
    out.check(format!("2 u0 bonus: min dp = {least_rise:.2e}"), least_rise >= BONUS_RISE_MIN);
    Ok(out)
}

fn criterion_8() -> Result<Outcome> {
    let mut out = Outcome::new();
    let map = IntervalMap::Chebyshev;
    let exec = Exec::default();
    let points = (1..=14).map(|n| map.periodic_points(n, exec)).collect::<Result<Vec<_>>>()?;
    for t in [-2.0, 0.5, 2.0] {
        let e = gurevich_from_points(&points, t, Base::Whole);
        let exact = chebyshev_pressure_exact(t);
        let raw = *e.raw.last().expect("14 terms");
        out.check(
            format!("t = {t}: raw {raw:.6}, Aitken {:.6}, exact {exact:.6}", e.extrapolated),
            (raw - exact).abs() <= CHEB_RAW_TOL && (e.extrapolated - exact).abs() <= CHEB_AITKEN_TOL,
        );
    }
    let grid = linspace(-3.0, 1.0, 41);
    let estimates: Vec<_> = grid.iter().map(|&t| gurevich_from_points(&points, t, Base::Whole)).collect();
    let kink = kink_from_estimates(&grid, &estimates)?;
    out.check(
        format!("kink at {:.4} (slopes {:.4}, {:.4})", kink.kink, kink.left_slope, kink.right_slope),
        (kink.kink + 1.0).abs() <= CHEB_KINK_TOL,
    );
    Ok(out)
}

fn criterion_9() -> Result<Outcome> {
    let mut out = Outcome::new();
    let ind = mp_induced_model(0.5, 200)?;
    let model = &ind.model;
    let grid = linspace(0.0, 1.5, 31);
    let ps = Exec::default()
        .map(&grid, |&t| model.solve_pressure(t).map(|s| s.p))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let p1 = model.solve_pressure(1.0)?.p;
    out.check(format!("p(1) = {p1:.2e} (fitted B = {:.4})", ind.fitted_b), p1.abs() <= MP_P1_TOL);
    let monotone = ps.windows(2).all(|w| w[1] <= w[0] + MP_MONOTONE_SLACK);
    out.check(format!("p non-increasing on [0, 1.5], p(0) = {:.6}", ps[0]), monotone);
    for t in [1.2, 1.5] {
        let p = model.solve_pressure(t)?.p;
        out.check(format!("p({t}) = {p:.2e}"), p.abs() <= MP_ZERO_TOL);
    }
    Ok(out)
}

fn criterion_10() -> Result<Outcome> {
    let mut out = Outcome::new();
    let seq = hofbauer(TailSpec::Log { gamma: 3.0 }, hofbauer_head(-2.0 * LN_2, 20), None)?;
    let class = hofbauer_doubling_model(&seq)?.classify(1.0)?.class;
    out.check(format!("induced class {}", class.short()), class == RecurrenceClass::Transient);
    let map = IntervalMap::DoublingGrid { seq };
    let exec = Exec::default();
    let left = Base::Interval { lo: 0.0, hi: 0.5 };
    let right = Base::Interval { lo: 0.5, hi: 1.0 };
    let mut min_left = f64::INFINITY;
    for n in 1..=20 {
        min_left = min_left.min(zn_sum(&map, 1.0, n, left, exec)?.0);
    }
    out.check(format!("min Z_n on [0, 1/2) = {min_left:.6}"), min_left >= 1.0);
    let d = sarig_series_diagnostic(&map, 1.0, 0.0, 20, right, exec)?;
    out.check(format!("rate on [1/2, 1) = {:.4} +- {:.1e}", d.rate, d.rate_se), d.rate <= BASE_RATE_MAX);
    Ok(out)
}

fn criterion_11() -> Result<Outcome> {
    let mut out = Outcome::new();
    let model = RenewalModel::geometric(false, 0.5)?;
    let t = 1.0;
    let root = model.solve_pressure(t)?.p;
    let depths = [1, 2, 4, 8, 16, 32, 64, 128, 256, 400];
    let mut ps = Vec::new();
    for &n in &depths {
        let shift = FiniteShift::renewal(n)?;
        // Entering loop j from 0 commits to a return after j + 1 steps.
        let pot = LocallyConstantPotential::from_fn(&shift, 2, |w| {
            if w[0] == 0 {
                t * model.s(w[1] + 1) + model.log_m(w[1] + 1)
            } else {
                0.0
            }
        })?;
        let m = build_transfer_matrix(&shift, &pot)?;
        ps.push(solve_rpf(&m, 1e-14)?.pressure);
    }
    let last = *ps.last().expect("depths");
    out.check(format!("depth 400: RPF {last:.12} vs root {root:.12}"), (last - root).abs() <= CROSS_TOL);
    let monotone = ps.windows(2).all(|w| w[1] >= w[0] - CROSS_MONOTONE_SLACK);
    out.check(format!("monotone in depth: {:?}", ps.iter().map(|p| format!("{p:.6}")).collect::<Vec<_>>()), monotone);
    Ok(out)
}

type Criterion = (u32, &'static str, fn() -> Result<Outcome>, Duration);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "RPF exactness", criterion_1, Duration::from_secs(1)),
        (2, "non-mixing components", criterion_2, Duration::from_secs(1)),
        (3, "closed-form renewal oracles", criterion_3, Duration::from_secs(5)),
        (4, "Hofbauer table rows", criterion_4, Duration::from_secs(10)),
        (5, "grid theorem cases", criterion_5, Duration::from_secs(60)),
        (6, "dissipativity witness", criterion_6, Duration::from_secs(5)),
        (7, "bonus witness", criterion_7, Duration::from_secs(10)),
        (8, "Chebyshev", criterion_8, Duration::from_secs(60)),
        (9, "Manneville-Pomeau properties", criterion_9, Duration::from_secs(120)),
        (10, "base-set pathology", criterion_10, Duration::from_secs(30)),
        (11, "cross-route consistency", criterion_11, Duration::from_secs(60)),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run, budget) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (passed, over_budget, failing, details) = match result {
            Ok(out) => {
                let failing: Vec<String> = out.failures().into_iter().map(String::from).collect();
                let mut lines: Vec<String> =
                    out.checks.iter().map(|(l, ok)| format!("    [{}] {l}", if *ok { "ok" } else { "x" })).collect();
                let mut passed = out.passed();
                if elapsed > budget {
                    passed = false;
                    lines.push(format!("    [x] runtime {elapsed:.2?} over budget {budget:?}"));
                }
                (passed, elapsed > budget, failing, lines)
            }
            Err(e) => (false, false, vec![format!("error: {e}")], vec![format!("    error: {e}")]),
        };
        println!("{} criterion {id:>2} {name} ({elapsed:.2?})", if passed { "PASS" } else { "FAIL" });
        for l in details {
            println!("{l}");
        }
        let known: Vec<&str> = KNOWN_FAILURES.iter().filter(|(k, _)| *k == id).map(|(_, p)| *p).collect();
        let matches_known = failing.len() == known.len()
            && known.iter().all(|p| failing.iter().any(|f| f.starts_with(p)))
            && !over_budget;
        if !matches_known {
            unexpected.push(id);
        } else if !known.is_empty() {
            println!("    known failure, see notes: {:?}", known);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected outcomes for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
