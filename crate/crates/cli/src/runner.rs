//! Executes a validated configuration and assembles the output files.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use thermoform_core::curve::{linspace, PressureCurve, Slope, Smoothness, TransitionKind};
use thermoform_core::fit::two_slope_fit;
use thermoform_core::interval::{
    gurevich_from_points, hofbauer_doubling_model, mp_induced_model, renewal_series_diagnostic, sarig_diagnostic,
    zn_from_points, Base, IntervalMap, PeriodicPoints,
};
use thermoform_core::renewal::{Bound, RenewalModel, Tolerances};
use thermoform_core::rpf::{build_transfer_matrix, decompose_components, pressure_curve_components, solve_rpf, DEFAULT_TOL};
use thermoform_core::sequences::{realize, realize_model, Family, RealizedSequence};
use thermoform_core::symbolic::{FiniteShift, LocallyConstantPotential};
use thermoform_core::{Error, Exec};

use crate::config::{
    FiniteShiftConfig, GeometricConfig, IntervalConfig, IntervalKind, ModelConfig, MultiplicityConfig, RenewalConfig,
    RunConfig,
};

/// Lower-bound slack for emitted pressures.
const FLOOR_SLACK: f64 = 1e-12;
const CONVEXITY_TOL: f64 = 1e-9;
/// Periodic-orbit estimates are only accurate to their extrapolation error.
const ESTIMATE_CONVEXITY_TOL: f64 = 1e-2;
const DEFAULT_PERIOD_CAP: usize = 14;
const DEFAULT_MP_LEVELS: usize = 200;

#[derive(Debug)]
pub enum RunError {
    Validation(String),
    Indeterminate(String),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io(_) => 1,
            RunError::Validation(_) => 2,
            RunError::Indeterminate(_) => 3,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Validation(m) => write!(f, "validation error: {m}"),
            RunError::Indeterminate(m) => write!(f, "numerical indeterminacy: {m}"),
            RunError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Indeterminate { .. } | Error::NoConvergence { .. } | Error::RootFinding(_) => {
                RunError::Indeterminate(e.to_string())
            }
            Error::Domain(_) | Error::NotMixing(_) | Error::EnvelopeInvalid { .. } => RunError::Validation(e.to_string()),
        }
    }
}

type Res<T> = std::result::Result<T, RunError>;

fn invalid<T>(msg: impl Into<String>) -> Res<T> {
    Err(RunError::Validation(msg.into()))
}

/// Files of one run, keyed by name, plus the lines echoed to stdout.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: BTreeMap<String, String>,
    pub summary: Vec<String>,
}

pub struct Options {
    pub root_tol: Option<f64>,
    pub gnuplot: bool,
    pub exec: Exec,
}

enum Built {
    Finite { shift: FiniteShift, potential: LocallyConstantPotential },
    Renewal { model: RenewalModel, sequence: Option<RealizedSequence> },
    Interval { map: IntervalMap, induced: Option<RenewalModel> },
}

fn tolerances(cfg: &RunConfig, opts: &Options) -> Res<Tolerances> {
    let mut tol = Tolerances::default();
    if let Some(t) = cfg.tolerances {
        if let Some(r) = t.root_tol {
            tol.root_tol = r;
        }
        if let Some(s) = t.sum_tol {
            tol.sum_tol = s;
        }
    }
    if let Some(r) = opts.root_tol {
        tol.root_tol = r;
    }
    if !(tol.root_tol > 0.0 && tol.root_tol < 1.0) || !(tol.sum_tol > 0.0 && tol.sum_tol < 1.0) {
        return invalid("tolerances must lie in (0, 1)");
    }
    Ok(tol)
}

fn build_finite(cfg: &FiniteShiftConfig) -> Res<Built> {
    if cfg.transitions.len() != cfg.alphabet {
        return invalid(format!("transitions has {} rows, alphabet is {}", cfg.transitions.len(), cfg.alphabet));
    }
    let shift = FiniteShift::new(&cfg.transitions)?;
    let values = cfg.potential.values.iter().map(|e| (e.word.clone(), e.value)).collect();
    let potential = LocallyConstantPotential::from_values(&shift, cfg.potential.depth, values)?;
    Ok(Built::Finite { shift, potential })
}

fn build_sequence(cfg: &RenewalConfig) -> Res<RealizedSequence> {
    let mut seq = realize(&cfg.sequence_spec())?;
    if let Some(u) = cfg.a0_shift {
        if !u.is_finite() {
            return invalid("a0_shift must be finite");
        }
        seq = seq.shift_a0(u);
    }
    Ok(seq)
}

fn build_geometric(cfg: &GeometricConfig) -> Res<Built> {
    let model = RenewalModel::geometric(matches!(cfg.multiplicity, MultiplicityConfig::Binary), cfg.c)?;
    Ok(Built::Renewal { model, sequence: None })
}

fn build_interval(cfg: &IntervalConfig) -> Res<Built> {
    let refuse = |field: &str| invalid(format!("field '{field}' does not apply to interval kind {:?}", cfg.kind));
    match cfg.kind {
        IntervalKind::Chebyshev => {
            if cfg.alpha.is_some() {
                return refuse("alpha");
            }
            if cfg.sequence.is_some() {
                return refuse("sequence");
            }
            Ok(Built::Interval { map: IntervalMap::Chebyshev, induced: None })
        }
        IntervalKind::MannevillePomeau => {
            if cfg.sequence.is_some() {
                return refuse("sequence");
            }
            let Some(alpha) = cfg.alpha else { return invalid("manneville_pomeau needs 'alpha'") };
            let map = IntervalMap::manneville_pomeau(alpha)?;
            let induced = mp_induced_model(alpha, cfg.levels.unwrap_or(DEFAULT_MP_LEVELS))?;
            Ok(Built::Interval { map, induced: Some(induced.model) })
        }
        IntervalKind::DoublingGrid => {
            if cfg.alpha.is_some() {
                return refuse("alpha");
            }
            let Some(seq_cfg) = &cfg.sequence else { return invalid("doubling_grid needs 'sequence'") };
            let seq = build_sequence(seq_cfg)?;
            if seq.family != Family::Hofbauer {
                return invalid("doubling_grid uses a hofbauer-family sequence");
            }
            let induced = hofbauer_doubling_model(&seq)?;
            Ok(Built::Interval { map: IntervalMap::DoublingGrid { seq }, induced: Some(induced) })
        }
    }
}

fn build(cfg: &RunConfig, tol: Tolerances) -> Res<Built> {
    let built = match &cfg.model {
        ModelConfig::FiniteShift(f) => build_finite(f)?,
        ModelConfig::Renewal(r) => {
            let sequence = build_sequence(r)?;
            Built::Renewal { model: realize_model(&sequence)?, sequence: Some(sequence) }
        }
        ModelConfig::Geometric(g) => build_geometric(g)?,
        ModelConfig::Interval(i) => build_interval(i)?,
    };
    Ok(match built {
        Built::Renewal { model, sequence } => Built::Renewal { model: model.with_tolerances(tol), sequence },
        Built::Interval { map, induced } => Built::Interval { map, induced: induced.map(|m| m.with_tolerances(tol)) },
        other => other,
    })
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

fn slope_json(s: &Slope) -> Value {
    match *s {
        Slope::Finite { lower, upper } => json!({ "kind": "finite", "lower": lower, "upper": upper }),
        Slope::ZeroLimit => json!({ "kind": "zero_limit" }),
        Slope::Undefined => json!({ "kind": "undefined" }),
    }
}

fn grid(t_min: f64, t_max: f64, steps: usize) -> Res<Vec<f64>> {
    if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) || steps < 2 {
        return invalid("pressure_curve needs finite t_min < t_max and steps >= 2");
    }
    Ok(linspace(t_min, t_max, steps))
}

#[derive(Serialize)]
struct TransitionRecord {
    t_lower: f64,
    t_upper: f64,
    kind: &'static str,
    smoothness: Option<&'static str>,
    detail: Value,
}

fn smoothness_name(s: Smoothness) -> &'static str {
    match s {
        Smoothness::C1 => "C1",
        Smoothness::FirstOrder => "first_order",
    }
}

struct Run<'a> {
    cfg: &'a RunConfig,
    opts: &'a Options,
    built: Built,
    art: Artifacts,
    outputs: serde_json::Map<String, Value>,
    warnings: Vec<String>,
    transitions: Vec<TransitionRecord>,
    flat: Option<Value>,
}

pub fn execute(cfg: &RunConfig, opts: &Options) -> Res<(Artifacts, Value)> {
    let tol = tolerances(cfg, opts)?;
    let built = build(cfg, tol)?;
    let mut run = Run {
        cfg,
        opts,
        built,
        art: Artifacts::default(),
        outputs: serde_json::Map::new(),
        warnings: Vec::new(),
        transitions: Vec::new(),
        flat: None,
    };
    let task = &cfg.task;
    let any = task.pressure_curve.is_some()
        || task.classify.is_some()
        || task.transitions.is_some()
        || task.atoms.is_some()
        || task.zn.is_some()
        || task.witness.is_some();
    if !any {
        return invalid("task lists no work");
    }
    if let Some(c) = &task.pressure_curve {
        run.pressure_curve(c.t_min, c.t_max, c.steps, c.n_max)?;
    }
    if let Some(c) = &task.classify {
        run.classify(c.t)?;
    }
    if let Some(c) = &task.transitions {
        run.transitions_task(c.bracket)?;
    }
    if let Some(c) = &task.atoms {
        run.atoms(c.t, c.levels)?;
    }
    if let Some(c) = &task.witness {
        run.witness(c.t)?;
    }
    if let Some(c) = &task.zn {
        run.zn(c.t, c.n_max, &c.bases, c.p)?;
    }
    let transitions = json!({ "flat_interval": run.flat, "transitions": run.transitions });
    run.art.files.insert("transitions.json".into(), pretty(&transitions));
    let report = json!({
        "label": cfg.label,
        "description": cfg.description,
        "inputs": cfg,
        "tolerances": { "root_tol": tol.root_tol, "sum_tol": tol.sum_tol },
        "outputs": Value::Object(run.outputs),
        "warnings": run.warnings,
    });
    Ok((run.art, report))
}

pub fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value") + "\n"
}

impl Run<'_> {
    fn renewal(&self) -> Option<&RenewalModel> {
        match &self.built {
            Built::Renewal { model, .. } => Some(model),
            Built::Interval { induced: Some(m), .. } => Some(m),
            _ => None,
        }
    }

    fn require_renewal(&self, task: &str) -> Res<&RenewalModel> {
        self.renewal().ok_or_else(|| RunError::Validation(format!("task '{task}' needs a renewal or induced model")))
    }

    fn write_curve(&mut self, rows: Vec<[String; 6]>, title: &str) {
        let mut csv = String::from("t,p,class,Dp,G,enclosure_width\n");
        for r in rows {
            csv.push_str(&r.join(","));
            csv.push('\n');
        }
        self.art.files.insert("curve.csv".into(), csv);
        if self.opts.gnuplot {
            let script = format!(
                "set datafile separator ','\nset key off\nset xlabel 't'\nset ylabel 'p(t)'\nset title '{title}'\nplot 'curve.csv' using 1:2 skip 1 with linespoints\n"
            );
            self.art.files.insert("curve.gp".into(), script);
        }
    }

    fn pressure_curve(&mut self, t_min: f64, t_max: f64, steps: usize, n_max: Option<usize>) -> Res<()> {
        let ts = grid(t_min, t_max, steps)?;
        let curve = self.compute_curve(&ts, n_max)?;
        let title = self.cfg.label.clone().unwrap_or_else(|| "pressure".into());
        self.write_curve(curve.rows, &title);
        self.transitions.extend(curve.transitions);
        self.warnings.extend(curve.warnings);
        self.art.summary.extend(curve.summary);
        self.outputs.insert("pressure_curve".into(), curve.output);
        Ok(())
    }

    fn compute_curve(&self, ts: &[f64], n_max: Option<usize>) -> Res<CurveOutput> {
        let exec = self.opts.exec;
        let mut out = CurveOutput::default();
        match &self.built {
            Built::Finite { shift, potential } => {
                let (curve, decs) = pressure_curve_components(shift, potential, ts, DEFAULT_TOL, exec)?;
                check_curve(&curve, CONVEXITY_TOL, None)?;
                out.rows = (0..ts.len())
                    .map(|i| {
                        let d = &decs[i];
                        let width = d
                            .maximizers
                            .iter()
                            .map(|&k| {
                                let (lo, hi) = d.components[k].solution.eigenvalue_bounds;
                                hi.ln() - lo.ln()
                            })
                            .fold(0.0, f64::max);
                        [fmt(ts[i]), fmt(curve.p_values[i]), "PR".into(), opt(curve.derivatives[i].value()), String::new(), fmt(width)]
                    })
                    .collect();
                out.transitions = component_switches(shift, potential, ts, &decs)?;
                let ties = decs.iter().filter(|d| d.non_unique()).count();
                out.summary.push(format!("curve: {} points, {} with several maximizing components", ts.len(), ties));
                out.output = json!({ "points": ts.len(), "tied_points": ties, "component_transitions": out.transitions.len() });
            }
            Built::Renewal { model, .. } | Built::Interval { induced: Some(model), .. } => {
                let curve = model.pressure_curve(ts, exec)?;
                check_curve(&curve, CONVEXITY_TOL, Some(model))?;
                out.rows = (0..ts.len())
                    .map(|i| {
                        let g = curve.g_values[i].map(|(lo, hi)| 0.5 * (lo + hi));
                        [
                            fmt(ts[i]),
                            fmt(curve.p_values[i]),
                            curve.classes[i].short().into(),
                            opt(curve.derivatives[i].value()),
                            opt(g),
                            fmt(curve.enclosure_widths[i]),
                        ]
                    })
                    .collect();
                out.transitions = curve
                    .transitions
                    .iter()
                    .map(|tr| TransitionRecord {
                        t_lower: tr.t_lower,
                        t_upper: tr.t_upper,
                        kind: match tr.kind {
                            TransitionKind::OnsetOfFlat => "onset_of_flat",
                            TransitionKind::EndOfFlat => "end_of_flat",
                        },
                        smoothness: Some(smoothness_name(tr.smoothness)),
                        detail: Value::Null,
                    })
                    .collect();
                let counts = ["PR", "NR", "T"].map(|c| curve.classes.iter().filter(|k| k.short() == c).count());
                out.summary.push(format!("curve: {} points, PR {} / NR {} / T {}", ts.len(), counts[0], counts[1], counts[2]));
                out.output = json!({
                    "points": ts.len(),
                    "positive_recurrent": counts[0],
                    "null_recurrent": counts[1],
                    "transient": counts[2],
                    "transitions_in_grid": curve.transitions.len(),
                });
            }
            Built::Interval { map, induced: None } => {
                let n_max = n_max.unwrap_or(DEFAULT_PERIOD_CAP);
                let points = periodic_points(map, n_max, exec)?;
                let est: Vec<_> = exec.map(ts, |&t| gurevich_from_points(&points, t, Base::Whole));
                let mut curve = PressureCurve::new(ts.to_vec());
                curve.p_values = est.iter().map(|e| e.extrapolated).collect();
                check_curve(&curve, ESTIMATE_CONVEXITY_TOL, None)?;
                out.rows = (0..ts.len())
                    .map(|i| [fmt(ts[i]), fmt(est[i].extrapolated), String::new(), String::new(), String::new(), fmt(est[i].spread)])
                    .collect();
                let skipped = est.first().map_or(0, |e| e.skipped);
                if skipped > 0 {
                    out.warnings.push(format!("{skipped} periodic cells skipped (boundary or parabolic points)"));
                }
                if ts.len() >= 6 {
                    let kink = two_slope_fit(ts, &curve.p_values)?;
                    let h = ts[1] - ts[0];
                    out.transitions.push(TransitionRecord {
                        t_lower: kink.kink - h,
                        t_upper: kink.kink + h,
                        kind: "kink",
                        smoothness: Some("first_order"),
                        detail: json!({ "kink": kink.kink, "left_slope": kink.left_slope, "right_slope": kink.right_slope, "rss": kink.rss }),
                    });
                    out.summary.push(format!("kink at t = {:.4}", kink.kink));
                }
                out.output = json!({ "points": ts.len(), "period_cap": n_max, "method": "aitken_extrapolated_periodic_orbit_sums" });
            }
        }
        Ok(out)
    }

    fn classify(&mut self, t: f64) -> Res<()> {
        if let Built::Finite { shift, potential } = &self.built {
            let d = decompose_components(shift, &potential.scaled(t), DEFAULT_TOL)?;
            let comps: Vec<Value> = d
                .components
                .iter()
                .map(|c| json!({ "symbols": c.symbols, "period": c.period, "pressure": c.pressure, "eigenvalue_bounds": c.solution.eigenvalue_bounds }))
                .collect();
            self.art.summary.push(format!("t = {t}: P = {:.12}, {} maximizing component(s)", d.pressure, d.maximizers.len()));
            self.outputs.insert(
                "classify".into(),
                json!({ "t": t, "pressure": d.pressure, "components": comps, "maximizers": d.maximizers, "unique_equilibrium": !d.non_unique() }),
            );
            return Ok(());
        }
        let model = self.require_renewal("classify")?;
        let c = model.classify(t)?;
        let slope = model.pressure_derivative(t)?;
        let line = format!("t = {t}: p = {:.12}, class {}", c.solution.p, c.class.short());
        let mut out = json!({
            "t": t,
            "class": c.class.short(),
            "p": c.solution.p,
            "p_enclosure": [c.solution.p_lower, c.solution.p_upper],
            "p_bad": c.solution.p_bad,
            "on_floor": c.solution.on_floor(),
            "g_at_p": [c.solution.g_at_p.lower, c.solution.g_at_p.upper],
            "g_at_floor": [c.solution.g_at_bad.lower, c.solution.g_at_bad.upper],
            "return_time_sum": if c.h.is_divergent() { Value::String("divergent".into()) } else { json!([c.h.lower, c.h.upper]) },
            "derivative": slope_json(&slope),
            "bisections": c.solution.iterations,
        });
        if let (Built::Renewal { sequence: Some(seq), .. }, Some(obj)) = (&self.built, out.as_object_mut()) {
            let total = seq.exp_sum();
            obj.insert("exp_sum".into(), if total.hi.is_infinite() { Value::String("divergent".into()) } else { json!([total.lo, total.hi]) });
        }
        self.art.summary.push(line);
        self.outputs.insert("classify".into(), out);
        Ok(())
    }

    fn transitions_task(&mut self, bracket: [f64; 2]) -> Res<()> {
        if !(bracket[0] < bracket[1]) {
            return invalid("transitions bracket must be increasing");
        }
        let model = self.require_renewal("transitions")?;
        let tol = model.tolerances().root_tol;
        let flat = model.locate_flat_interval((bracket[0], bracket[1]), tol);
        let value = match flat {
            None => json!({ "found": false }),
            Some(f) => {
                let rep = model.smoothness_report(&f);
                let bound = |b: Bound| match b {
                    Bound::At { lower, upper } => json!({ "lower": lower, "upper": upper }),
                    Bound::Beyond => Value::String("beyond_bracket".into()),
                };
                let s = |x: Option<Smoothness>| x.map(smoothness_name);
                self.art.summary.push(format!(
                    "flat interval [{}, {}]",
                    f.left.value().map_or("beyond".into(), |v| format!("{v:.10}")),
                    f.right.value().map_or("beyond".into(), |v| format!("{v:.10}"))
                ));
                if rep.endpoints_agree == Some(false) {
                    self.warnings.push("smoothness verdicts differ at the two ends of the flat interval".into());
                }
                json!({
                    "found": true,
                    "left": bound(f.left),
                    "right": bound(f.right),
                    "left_smoothness": s(rep.left),
                    "right_smoothness": s(rep.right),
                    "endpoints_agree": rep.endpoints_agree,
                })
            }
        };
        self.flat = Some(value.clone());
        self.outputs.insert("transitions".into(), value);
        Ok(())
    }

    fn atoms(&mut self, t: f64, levels: usize) -> Res<()> {
        let model = self.require_renewal("atoms")?;
        let rep = model.conformal_atom_masses(t, levels)?;
        self.art.summary.push(format!("t = {t}: atom mass [{:.12}, {:.12}]", rep.atom.lo, rep.atom.hi));
        self.outputs.insert(
            "atoms".into(),
            json!({
                "t": t,
                "p": rep.p,
                "level_masses": rep.level_masses,
                "total": [rep.total.lower, rep.total.upper],
                "atom": [rep.atom.lo, rep.atom.hi],
                "preimage_mass": [rep.preimage_mass.lo, rep.preimage_mass.hi],
                "dissipative": rep.dissipative,
            }),
        );
        Ok(())
    }

    fn witness(&mut self, t: f64) -> Res<()> {
        let model = self.require_renewal("witness")?;
        let w = model.cyr_sarig_witness(t)?;
        let mut out = json!({ "t": t, "class": w.class.short(), "u0": [w.u0.lo, w.u0.hi], "positive": w.positive() });
        if w.positive() {
            let u0 = w.u0.mid();
            let half = model.bonus_pressure_shift(t, 0.5 * u0)?;
            let double = model.bonus_pressure_shift(t, 2.0 * u0)?;
            out["pressure_shift_half_u0"] = json!(half);
            out["pressure_shift_double_u0"] = json!(double);
        }
        self.art.summary.push(format!("t = {t}: u0 in [{:.6e}, {:.6e}]", w.u0.lo, w.u0.hi));
        self.outputs.insert("witness".into(), out);
        Ok(())
    }

    fn zn(&mut self, t: f64, n_max: usize, bases: &[[f64; 2]], p: Option<f64>) -> Res<()> {
        if n_max < 1 {
            return invalid("zn needs n_max >= 1");
        }
        let exec = self.opts.exec;
        let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
        let mut diagnostics = Vec::new();
        match &self.built {
            Built::Finite { shift, potential } => {
                if !bases.is_empty() {
                    return invalid("bases apply to interval models");
                }
                let m = build_transfer_matrix(shift, &potential.scaled(t))?;
                let z = exec.map_range(n_max, |i| m.trace_of_power(i + 1));
                let p_used = match p {
                    Some(p) => p,
                    None => match solve_rpf(&m, DEFAULT_TOL) {
                        Ok(sol) => sol.pressure,
                        Err(_) => decompose_components(shift, &potential.scaled(t), DEFAULT_TOL)?.pressure,
                    },
                };
                diagnostics.push(json!({ "base": "whole", "p": p_used }));
                columns.push(("Z_whole".into(), z));
            }
            Built::Renewal { model, .. } => {
                if !bases.is_empty() {
                    return invalid("bases apply to interval models");
                }
                let p_used = match p {
                    Some(p) => p,
                    None => model.solve_pressure(t)?.p,
                };
                let z = model.renewal_lambda(t, 0.0, n_max)[1..].to_vec();
                let d = renewal_series_diagnostic(model, t, p_used, n_max)?;
                diagnostics.push(json!({ "base": "return_set", "p": p_used, "diagnostic": d_json(&d) }));
                columns.push(("Z_return_set".into(), z));
            }
            Built::Interval { map, induced } => {
                if n_max > 24 {
                    return invalid("zn on interval maps supports n_max <= 24");
                }
                let points = periodic_points(map, n_max, exec)?;
                let p_used = match (p, induced) {
                    (Some(p), _) => p,
                    (None, Some(m)) => m.solve_pressure(t)?.p,
                    (None, None) => gurevich_from_points(&points, t, Base::Whole).extrapolated,
                };
                let mut list: Vec<(String, Base)> = Vec::new();
                if bases.is_empty() {
                    list.push(("whole".into(), Base::Whole));
                }
                for b in bases {
                    if !(b[0] < b[1]) {
                        return invalid(format!("base [{}, {}) is empty", b[0], b[1]));
                    }
                    list.push((format!("[{},{})", b[0], b[1]), Base::Interval { lo: b[0], hi: b[1] }));
                }
                for (name, base) in list {
                    let z: Vec<f64> = points.iter().map(|pp| zn_from_points(pp, t, base)).collect();
                    let lambdas: Vec<f64> = z.iter().enumerate().map(|(i, zi)| zi * (-((i + 1) as f64) * p_used).exp()).collect();
                    let diag = if n_max >= 8 { Some(d_json(&sarig_diagnostic(&lambdas)?)) } else { None };
                    if let Some(d) = &diag {
                        self.art.summary.push(format!("base {name}: verdict {}, rate {:.4}", d["verdict"].as_str().unwrap_or("?"), d["rate"].as_f64().unwrap_or(f64::NAN)));
                    }
                    diagnostics.push(json!({ "base": name, "p": p_used, "min_z": z.iter().cloned().fold(f64::INFINITY, f64::min), "diagnostic": diag }));
                    columns.push((format!("Z_{name}"), z));
                }
                let skipped: usize = points.iter().map(|pp| pp.skipped).sum();
                if skipped > 0 {
                    self.warnings.push(format!("{skipped} periodic cells skipped (boundary or parabolic points)"));
                }
            }
        }
        for d in &diagnostics {
            if d["diagnostic"]["verdict"] == "inconclusive" {
                self.warnings.push(format!("series diagnostic inconclusive on base {}", d["base"]));
            }
        }
        let mut csv = String::from("n");
        for (name, _) in &columns {
            let _ = write!(csv, ",{}", name.replace(',', ";"));
        }
        csv.push('\n');
        for n in 0..n_max {
            let _ = write!(csv, "{}", n + 1);
            for (_, z) in &columns {
                let _ = write!(csv, ",{}", fmt(z[n]));
            }
            csv.push('\n');
        }
        self.art.files.insert("zn.csv".into(), csv);
        self.outputs.insert("zn".into(), json!({ "t": t, "n_max": n_max, "bases": diagnostics }));
        Ok(())
    }
}

fn check_curve(curve: &PressureCurve, tol: f64, floor: Option<&RenewalModel>) -> Res<()> {
    if let Some(m) = floor {
        for (t, p) in curve.t_grid.iter().zip(&curve.p_values) {
            if *p < m.bad_pressure(*t) - FLOOR_SLACK {
                return Err(RunError::Indeterminate(format!("p({t}) = {p} lies below the floor")));
            }
        }
    }
    if !curve.is_convex(tol) {
        return Err(RunError::Indeterminate("pressure curve failed the convexity check".into()));
    }
    Ok(())
}

#[derive(Default)]
struct CurveOutput {
    rows: Vec<[String; 6]>,
    transitions: Vec<TransitionRecord>,
    warnings: Vec<String>,
    summary: Vec<String>,
    output: Value,
}

fn d_json(d: &thermoform_core::interval::SarigDiagnostic) -> Value {
    json!({
        "verdict": d.verdict,
        "rate": d.rate,
        "rate_se": d.rate_se,
        "exponent": d.exponent,
        "exponent_se": d.exponent_se,
    })
}

fn periodic_points(map: &IntervalMap, n_max: usize, exec: Exec) -> Res<Vec<PeriodicPoints>> {
    if !(1..=24).contains(&n_max) {
        return invalid("period cap must lie in 1..=24");
    }
    Ok((1..=n_max).map(|n| map.periodic_points(n, exec)).collect::<thermoform_core::Result<Vec<_>>>()?)
}

/// Grid intervals where the maximizing component changes, refined by
/// bisection on the sign of the pressure difference of the two components.
fn component_switches(
    shift: &FiniteShift,
    potential: &LocallyConstantPotential,
    ts: &[f64],
    decs: &[thermoform_core::rpf::Decomposition],
) -> Res<Vec<TransitionRecord>> {
    let mut out = Vec::new();
    let leader = |i: usize| decs[i].maximizers.first().copied();
    let mut i = 0;
    while i + 1 < ts.len() {
        let (a, b) = (leader(i), leader(i + 1));
        if decs[i].non_unique() || decs[i + 1].non_unique() || a == b {
            if decs[i].non_unique() && (i == 0 || !decs[i - 1].non_unique()) {
                out.push(TransitionRecord {
                    t_lower: ts[i],
                    t_upper: ts[i],
                    kind: "component_tie",
                    smoothness: Some("first_order"),
                    detail: json!({ "maximizers": decs[i].maximizers }),
                });
            }
            i += 1;
            continue;
        }
        let (a, b) = (a.expect("component"), b.expect("component"));
        let gap = |t: f64| -> Res<f64> {
            let d = decompose_components(shift, &potential.scaled(t), DEFAULT_TOL)?;
            Ok(d.components[a].pressure - d.components[b].pressure)
        };
        let (mut lo, mut hi) = (ts[i], ts[i + 1]);
        let s_lo = gap(lo)?;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if gap(mid)?.signum() == s_lo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * (1.0 + lo.abs()) {
                break;
            }
        }
        out.push(TransitionRecord {
            t_lower: lo,
            t_upper: hi,
            kind: "component_switch",
            smoothness: Some("first_order"),
            detail: json!({ "from_component": a, "to_component": b }),
        });
        i += 1;
    }
    Ok(out)
}
