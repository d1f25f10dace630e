use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use persuasion_core::curve::{emit_indirect_utility_curve, CurveRow};
use persuasion_core::genericity::genericity_trial;
use persuasion_core::geometry::all_regions;
use persuasion_core::instance_file::{load_instance, to_toml_string, LoadedInstance};
use persuasion_core::model::{indirect_sender_value, policy_value};
use persuasion_core::robustness::{
    adjust_to_type, classify, classify_in_box, loss_bound, search_robust_policy, AdjustmentResult, Criterion,
    RobustnessReport, SearchResult,
};
use persuasion_core::solver::solve_optimal;
use persuasion_core::{fixtures, CornerMode, Error, PersuasionInstance, ReceiverType, Result, SignalPolicy, UtilityBox};
use serde::Serialize;

use crate::format::{belief, machine, sig, Csv};
use crate::{Cli, Command, CornerArg, CriterionArg, OutputFormat, OUTPUT_DIR_ENV};

pub fn dispatch(cli: &Cli) -> Result<String> {
    let fmt = cli.output;
    match &cli.command {
        Command::Solve { instance } => solve(&load(instance, None, cli)?, fmt),
        Command::Classify { instance, delta } => classify_cmd(&load(instance, *delta, cli)?, fmt),
        Command::Regret {
            instance,
            delta,
            criterion,
            samples,
            seed,
        } => regret(&load(instance, *delta, cli)?, *criterion, *samples, *seed, fmt),
        Command::Adjust {
            instance,
            target,
            delta,
            action,
            corner,
        } => {
            let loaded = load(instance, *delta, cli)?;
            let target = match (target, action) {
                (Some(path), _) => {
                    let t = load_instance(path)?;
                    Target::File(path.display().to_string(), t.instance.reference_type())
                }
                (None, Some(a)) => {
                    let bx = loaded.utility_box.as_ref().expect("--action requires --delta");
                    let mode = match corner {
                        CornerArg::Inf => CornerMode::Inf,
                        CornerArg::Sup => CornerMode::Sup,
                    };
                    Target::Corner(*a, mode, bx.corner_type(*a, mode)?)
                }
                (None, None) => return Err(Error::InvalidInput("adjust needs --target, or --delta with --action".into())),
            };
            adjust(&loaded, target, fmt)
        }
        Command::Generic {
            states,
            actions,
            trials,
            seed,
        } => generic(*states, *actions, *trials, *seed, fmt),
        Command::Inspect {
            instance,
            resolution,
            curve,
        } => inspect(instance, &load(instance, None, cli)?, *resolution, *curve, fmt),
        Command::Example { name, delta, write } => example(name, *delta, *write, cli, fmt),
    }
}

fn builtin(name: &str, delta: Option<f64>) -> Result<Option<LoadedInstance>> {
    let (instance, utility_box) = match (name, delta) {
        ("example1", None) => (fixtures::example1(), None),
        ("example2", None) => (fixtures::example2(), None),
        ("example1", Some(d)) => {
            let bx = fixtures::example1_box(d)?;
            (bx.reference.clone(), Some(bx))
        }
        ("example2", Some(d)) => {
            let bx = fixtures::example2_box(d)?;
            (bx.reference.clone(), Some(bx))
        }
        _ => return Ok(None),
    };
    Ok(Some(LoadedInstance { instance, utility_box }))
}

/// A built-in example name or an instance file. `delta` replaces any box in
/// the file with a uniform one (built-in examples use their own boxes).
fn load(source: &str, delta: Option<f64>, cli: &Cli) -> Result<LoadedInstance> {
    let mut loaded = match builtin(source, delta)? {
        Some(l) => l,
        None => {
            let mut l = load_instance(Path::new(source))?;
            if let Some(d) = delta {
                l.utility_box = Some(UtilityBox::uniform_width(l.instance.clone(), d)?);
            }
            l
        }
    };
    apply_tie(&mut loaded, cli)?;
    Ok(loaded)
}

fn apply_tie(loaded: &mut LoadedInstance, cli: &Cli) -> Result<()> {
    if let Some(tie) = cli.tol_tie {
        if !(tie > 0.0 && tie.is_finite()) {
            return Err(Error::InvalidInput(format!("--tol-tie must be positive, got {tie}")));
        }
        loaded.instance.tol.tie = tie;
        if let Some(bx) = &mut loaded.utility_box {
            bx.reference.tol.tie = tie;
        }
    }
    Ok(())
}

fn output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

fn write_file(name: &str, contents: &str) -> Result<PathBuf> {
    let dir = output_dir();
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

#[derive(Serialize)]
struct PosteriorRow {
    weight: f64,
    posterior: Vec<f64>,
    action: usize,
    action_label: String,
    sender_value: f64,
}

fn posterior_rows(inst: &PersuasionInstance, theta: &ReceiverType, policy: &SignalPolicy) -> Result<Vec<PosteriorRow>> {
    policy
        .supports
        .iter()
        .map(|(w, b)| {
            let (value, action) = indirect_sender_value(inst, theta, b)?;
            Ok(PosteriorRow {
                weight: *w,
                posterior: b.probs().to_vec(),
                action,
                action_label: inst.action_labels[action].clone(),
                sender_value: value,
            })
        })
        .collect()
}

fn policy_text(s: &mut String, inst: &PersuasionInstance, rows: &[PosteriorRow]) {
    for r in rows {
        let b = persuasion_core::Belief::new(r.posterior.clone()).expect("posterior from a valid policy");
        let _ = writeln!(
            s,
            "  weight {:<12} posterior {}  -> {} (sender value {})",
            sig(r.weight),
            belief(&b, &inst.state_labels),
            r.action_label,
            sig(r.sender_value)
        );
    }
}

fn policy_csv(inst: &PersuasionInstance, rows: &[PosteriorRow]) -> String {
    let mut header = vec!["weight".to_string()];
    header.extend(inst.state_labels.iter().map(|s| format!("p_{s}")));
    header.extend(["action".into(), "sender_value".into()]);
    let mut csv = Csv::new(header);
    for r in rows {
        let mut row = vec![sig(r.weight)];
        row.extend(r.posterior.iter().map(|p| sig(*p)));
        row.extend([r.action_label.clone(), sig(r.sender_value)]);
        csv.row(row);
    }
    csv.finish()
}

fn solve(loaded: &LoadedInstance, fmt: OutputFormat) -> Result<String> {
    let inst = &loaded.instance;
    let theta = inst.reference_type();
    let sol = solve_optimal(inst, &theta)?;
    let rows = posterior_rows(inst, &theta, &sol.policy)?;
    match fmt {
        OutputFormat::Machine => {
            #[derive(Serialize)]
            struct Body<'a> {
                states: &'a [String],
                actions: &'a [String],
                value: f64,
                policy: &'a [PosteriorRow],
                basic_optima: usize,
                extreme_points: usize,
            }
            machine(
                "solve",
                Body {
                    states: &inst.state_labels,
                    actions: &inst.action_labels,
                    value: sol.value,
                    policy: &rows,
                    basic_optima: sol.all_basic_optima.len(),
                    extreme_points: sol.pool.len(),
                },
            )
        }
        OutputFormat::Csv => Ok(policy_csv(inst, &rows)),
        OutputFormat::Text => {
            let mut s = format!("optimal value: {}\npolicy:\n", sig(sol.value));
            policy_text(&mut s, inst, &rows);
            let _ = writeln!(
                s,
                "basic optima: {}, extreme points pooled: {}",
                sol.all_basic_optima.len(),
                sol.pool.len()
            );
            Ok(s)
        }
    }
}

fn classify_cmd(loaded: &LoadedInstance, fmt: OutputFormat) -> Result<String> {
    let inst = &loaded.instance;
    let report: RobustnessReport = match &loaded.utility_box {
        Some(bx) => classify_in_box(bx)?,
        None => classify(inst)?,
    };
    let theta = inst.reference_type();
    let rows = posterior_rows(inst, &theta, &report.witness_policy)?;
    let is_fragile = |p: &[f64]| {
        report
            .fragile_posteriors
            .iter()
            .find(|f| f.belief.probs().iter().zip(p).all(|(a, b)| (a - b).abs() <= inst.tol.dedup))
    };
    match fmt {
        OutputFormat::Machine => {
            #[derive(Serialize)]
            struct Body<'a> {
                states: &'a [String],
                actions: &'a [String],
                report: &'a RobustnessReport,
            }
            machine(
                "classify",
                Body {
                    states: &inst.state_labels,
                    actions: &inst.action_labels,
                    report: &report,
                },
            )
        }
        OutputFormat::Csv => {
            let mut header = vec!["weight".to_string()];
            header.extend(inst.state_labels.iter().map(|s| format!("p_{s}")));
            header.extend(["action".into(), "fragile".into(), "inferior_action".into()]);
            let mut csv = Csv::new(header);
            for r in &rows {
                let f = is_fragile(&r.posterior);
                let mut row = vec![sig(r.weight)];
                row.extend(r.posterior.iter().map(|p| sig(*p)));
                row.push(r.action_label.clone());
                row.push(f.is_some().to_string());
                row.push(
                    f.and_then(|f| f.inferior_action)
                        .map_or_else(String::new, |a| inst.action_labels[a].clone()),
                );
                csv.row(row);
            }
            Ok(csv.finish())
        }
        OutputFormat::Text => {
            let mut s = format!("verdict: {}\n", report.verdict);
            let _ = writeln!(s, "optimal value: {}", sig(report.optimal_value));
            let _ = writeln!(s, "pseudo value: {}", sig(report.pseudo_value));
            let _ = writeln!(s, "gap constant: {}", sig(report.gap_constant));
            s.push_str("witness policy:\n");
            policy_text(&mut s, inst, &rows);
            for f in &report.fragile_posteriors {
                let _ = write!(
                    s,
                    "fragile posterior {} induces {}",
                    belief(&f.belief, &inst.state_labels),
                    inst.action_labels[f.induced_action]
                );
                if let Some(a) = f.inferior_action {
                    let _ = write!(s, ", can be displaced by {}", inst.action_labels[a]);
                }
                s.push('\n');
            }
            if let (Some(t), Some(gap)) = (&report.witness_type, report.witness_gap) {
                let _ = writeln!(s, "witness type (value loss {}):", sig(gap));
                for (a, row) in t.receiver_u.rows().iter().enumerate() {
                    let cells: Vec<String> = row.iter().map(|x| sig(*x)).collect();
                    let _ = writeln!(s, "  {}: [{}]", inst.action_labels[a], cells.join(", "));
                }
            } else if loaded.utility_box.is_some() && report.witness_type.is_none() && report.gap_constant > 0.0 {
                s.push_str("no witness type: the box leaves no room inside [0, 1]\n");
            }
            if report.basic_only {
                s.push_str("note: only basic optimal policies were examined\n");
            }
            Ok(s)
        }
    }
}

fn regret(loaded: &LoadedInstance, which: CriterionArg, samples: usize, seed: u64, fmt: OutputFormat) -> Result<String> {
    let bx = loaded
        .utility_box
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("regret needs a utility box: pass --delta or add [box] to the file".into()))?;
    let inst = &loaded.instance;
    let criteria: &[(Criterion, &str)] = match which {
        CriterionArg::Maxmin => &[(Criterion::MaxMin, "maxmin")],
        CriterionArg::Minregret => &[(Criterion::MinRegret, "minregret")],
        CriterionArg::Both => &[(Criterion::MinRegret, "minregret"), (Criterion::MaxMin, "maxmin")],
    };
    let results: Vec<(&str, SearchResult)> = criteria
        .iter()
        .map(|(c, name)| search_robust_policy(bx, *c, samples, seed).map(|r| (*name, r)))
        .collect::<Result<_>>()?;
    match fmt {
        OutputFormat::Machine => {
            #[derive(Serialize)]
            struct Entry<'a> {
                criterion: &'a str,
                #[serde(flatten)]
                result: &'a SearchResult,
            }
            #[derive(Serialize)]
            struct Body<'a> {
                states: &'a [String],
                actions: &'a [String],
                samples: usize,
                seed: u64,
                results: Vec<Entry<'a>>,
            }
            machine(
                "regret",
                Body {
                    states: &inst.state_labels,
                    actions: &inst.action_labels,
                    samples,
                    seed,
                    results: results.iter().map(|(c, r)| Entry { criterion: c, result: r }).collect(),
                },
            )
        }
        OutputFormat::Csv => {
            let mut csv = Csv::new(["criterion", "type", "opt_value", "policy_value", "shortfall"]);
            for (c, r) in &results {
                for (k, t) in r.evaluation.per_type.iter().enumerate() {
                    csv.row([
                        c.to_string(),
                        k.to_string(),
                        sig(t.opt_value),
                        sig(t.policy_value),
                        sig(t.opt_value - t.policy_value),
                    ]);
                }
            }
            Ok(csv.finish())
        }
        OutputFormat::Text => {
            let mut s = String::new();
            let theta = inst.reference_type();
            for (c, r) in &results {
                let _ = writeln!(
                    s,
                    "{c}: score {} over {} types, {} candidates",
                    sig(r.score),
                    r.types,
                    r.candidates
                );
                let _ = writeln!(
                    s,
                    "  worst-case value {}, worst-case regret {}",
                    sig(r.evaluation.min_utility),
                    sig(r.evaluation.regret)
                );
                if let Some(b) = r.adjustment_bound {
                    let _ = writeln!(s, "  adjustment loss bound {}", sig(b));
                }
                policy_text(&mut s, inst, &posterior_rows(inst, &theta, &r.policy)?);
            }
            Ok(s)
        }
    }
}

enum Target {
    File(String, ReceiverType),
    Corner(usize, CornerMode, ReceiverType),
}

fn adjust(loaded: &LoadedInstance, target: Target, fmt: OutputFormat) -> Result<String> {
    let inst = &loaded.instance;
    let source = inst.reference_type();
    let (label, theta) = match &target {
        Target::File(path, t) => (format!("file {path}"), t),
        Target::Corner(a, mode, t) => (
            format!("{} corner of {}", if *mode == CornerMode::Inf { "inf" } else { "sup" }, inst.action_labels[*a]),
            t,
        ),
    };
    if theta.n_actions() != inst.n_actions() || theta.n_states() != inst.n_states() {
        return Err(Error::InvalidInput(format!(
            "target type is {}x{}, instance is {}x{}",
            theta.n_actions(),
            theta.n_states(),
            inst.n_actions(),
            inst.n_states()
        )));
    }
    let sol = solve_optimal(inst, &source)?;
    let (res, gamma) = adjust_to_type(inst, &sol.policy, &source, theta)?;
    let after = policy_value(inst, theta, &res.policy)?;
    let bound = loss_bound(gamma, &inst.prior)?;
    match fmt {
        OutputFormat::Machine => {
            #[derive(Serialize)]
            struct Body<'a> {
                states: &'a [String],
                actions: &'a [String],
                target: &'a str,
                source_value: f64,
                adjusted_value: f64,
                gamma: f64,
                loss_bound: f64,
                adjustment: &'a AdjustmentResult,
            }
            machine(
                "adjust",
                Body {
                    states: &inst.state_labels,
                    actions: &inst.action_labels,
                    target: &label,
                    source_value: sol.value,
                    adjusted_value: after,
                    gamma,
                    loss_bound: bound,
                    adjustment: &res,
                },
            )
        }
        OutputFormat::Csv => Ok(policy_csv(inst, &posterior_rows(inst, theta, &res.policy)?)),
        OutputFormat::Text => {
            let mut s = format!("target: {label}\n");
            let _ = writeln!(s, "source value: {}", sig(sol.value));
            let _ = writeln!(s, "adjusted value at target: {}", sig(after));
            let _ = writeln!(s, "displacement gamma: {}, loss bound {}", sig(gamma), sig(bound));
            if res.correction_weight > 0.0 {
                let _ = writeln!(
                    s,
                    "correction posterior {} with weight {}",
                    belief(&res.correction_posterior, &inst.state_labels),
                    sig(res.correction_weight)
                );
            }
            s.push_str("adjusted policy:\n");
            policy_text(&mut s, inst, &posterior_rows(inst, theta, &res.policy)?);
            Ok(s)
        }
    }
}

fn generic(n: usize, m: usize, trials: usize, seed: u64, fmt: OutputFormat) -> Result<String> {
    let out = genericity_trial(n, m, trials, seed)?;
    match fmt {
        OutputFormat::Machine => machine("generic", &out),
        OutputFormat::Csv => {
            let mut csv = Csv::new(["trial", "stability", "unique_reply", "classifier", "failing_action"]);
            for r in &out.records {
                csv.row([
                    r.trial.to_string(),
                    r.stability.to_string(),
                    r.unique_reply.to_string(),
                    r.classifier.to_string(),
                    r.failing_action.map_or_else(String::new, |a| a.to_string()),
                ]);
            }
            Ok(csv.finish())
        }
        OutputFormat::Text => {
            let frac = |k: usize| sig(k as f64 / trials as f64);
            let mut s = format!("N = {n}, M = {m}, {trials} trials, seed {seed}\n");
            let _ = writeln!(s, "stability passed: {} ({})", out.pass_stability, frac(out.pass_stability));
            let _ = writeln!(s, "unique-best-reply passed: {} ({})", out.pass_unique_reply, frac(out.pass_unique_reply));
            let _ = writeln!(s, "classified ROBUST: {} ({})", out.pass_classifier, frac(out.pass_classifier));
            let mismatches = out.records.iter().filter(|r| r.stability != r.unique_reply).count();
            let _ = writeln!(s, "trials where the two stability checks disagree: {mismatches}");
            Ok(s)
        }
    }
}

fn curve_csv(rows: &[CurveRow], inst: &PersuasionInstance) -> String {
    let mut csv = Csv::new(["p", "value", "action", "breakpoint"]);
    for r in rows {
        csv.row([sig(r.p), sig(r.value), inst.action_labels[r.action].clone(), r.breakpoint.to_string()]);
    }
    csv.finish()
}

fn inspect(source: &str, loaded: &LoadedInstance, resolution: usize, write_curve: bool, fmt: OutputFormat) -> Result<String> {
    let inst = &loaded.instance;
    let theta = inst.reference_type();
    let regions = all_regions(&theta, &inst.tol);
    // Asking for the curve explicitly on more than two states is an error.
    let curve = if inst.n_states() == 2 || write_curve || fmt == OutputFormat::Csv {
        Some(emit_indirect_utility_curve(inst, resolution)?)
    } else {
        None
    };
    let written = match (&curve, write_curve) {
        (Some(rows), true) => {
            let stem = Path::new(source).file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned());
            Some(write_file(&format!("{stem}_curve.csv"), &curve_csv(rows, inst))?)
        }
        _ => None,
    };
    match fmt {
        OutputFormat::Machine => {
            #[derive(Serialize)]
            struct Region {
                action: usize,
                label: String,
                dimension: i32,
                vertices: Vec<Vec<f64>>,
                normals: Vec<Vec<f64>>,
                offsets: Vec<f64>,
            }
            #[derive(Serialize)]
            struct Body<'a> {
                states: &'a [String],
                actions: &'a [String],
                regions: Vec<Region>,
                #[serde(skip_serializing_if = "Option::is_none")]
                curve: Option<&'a [CurveRow]>,
                #[serde(skip_serializing_if = "Option::is_none")]
                curve_file: Option<String>,
            }
            let regions = regions
                .iter()
                .map(|r| Region {
                    action: r.owner_action,
                    label: inst.action_labels[r.owner_action].clone(),
                    dimension: r.dimension(),
                    vertices: r.vertices().iter().map(|v| v.probs().to_vec()).collect(),
                    normals: r.system.normals.clone(),
                    offsets: r.system.offsets.clone(),
                })
                .collect();
            machine(
                "inspect",
                Body {
                    states: &inst.state_labels,
                    actions: &inst.action_labels,
                    regions,
                    curve: curve.as_deref(),
                    curve_file: written.map(|p| p.display().to_string()),
                },
            )
        }
        OutputFormat::Csv => Ok(curve_csv(curve.as_deref().unwrap_or_default(), inst)),
        OutputFormat::Text => {
            let mut s = String::new();
            for r in &regions {
                s.push_str(&r.describe(&inst.action_labels));
            }
            if let Some(rows) = &curve {
                let breaks: Vec<String> = rows.iter().filter(|r| r.breakpoint).map(|r| sig(r.p)).collect();
                let _ = writeln!(s, "value curve: {} points, breakpoints [{}]", rows.len(), breaks.join(", "));
            }
            if let Some(p) = written {
                let _ = writeln!(s, "curve written to {}", p.display());
            }
            Ok(s)
        }
    }
}

fn example(name: &str, delta: Option<f64>, write: bool, cli: &Cli, fmt: OutputFormat) -> Result<String> {
    let mut loaded = builtin(name, delta)?
        .ok_or_else(|| Error::InvalidInput(format!("unknown example `{name}`; expected example1 or example2")))?;
    apply_tie(&mut loaded, cli)?;
    let text = to_toml_string(&loaded.instance, loaded.utility_box.as_ref())?;
    let written = if write { Some(write_file(&format!("{name}.toml"), &text)?) } else { None };
    match fmt {
        OutputFormat::Machine => {
            #[derive(Serialize)]
            struct Body<'a> {
                name: &'a str,
                instance: &'a str,
                #[serde(skip_serializing_if = "Option::is_none")]
                file: Option<String>,
            }
            machine(
                "example",
                Body {
                    name,
                    instance: &text,
                    file: written.map(|p| p.display().to_string()),
                },
            )
        }
        OutputFormat::Csv => {
            let inst = &loaded.instance;
            let mut header = vec!["matrix".to_string(), "action".to_string()];
            header.extend(inst.state_labels.iter().cloned());
            let mut csv = Csv::new(header);
            for (m, mat) in [("receiver_u", &inst.receiver_u), ("sender_v", &inst.sender_v)] {
                for (a, row) in mat.rows().iter().enumerate() {
                    let mut r = vec![m.to_string(), inst.action_labels[a].clone()];
                    r.extend(row.iter().map(|x| sig(*x)));
                    csv.row(r);
                }
            }
            Ok(csv.finish())
        }
        OutputFormat::Text => Ok(match written {
            Some(p) => format!("wrote {}\n", p.display()),
            None => text,
        }),
    }
}
