use std::path::Path;

use minplus::baselines::{nnmf, svd_truncate, to_dense};
use minplus::factorization::{
    actual_waypoint_search, nonsym_factorize, nonsym_factorize_from, sym_factorize_with_starts,
    FactorPair, GeneralFactorConfig, SymFactorConfig,
};
use minplus::regression::{chebyshev_regression, newton_directed_line_search, LineSearchConfig};
use minplus::tropical::{frobenius_norm, kleene_star};
use minplus::TropicalMatrix;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::io::{dense_csv, load_input, read_matrix, read_text, read_vector, write_text, Input};
use crate::report::{float, floats, rows, RunReport};
use crate::{
    AssignArgs, BaselineArgs, BaselineMethod, Cli, CurveArgs, CurveMethod, FactorArgs, FactorMode,
    MinplusOptions, Norm, RegressArgs, SpdArgs, Target,
};

fn write_output(cli: &Cli, report: &mut RunReport, name: &str, text: &str) -> CliResult<()> {
    let path = cli.out_dir.join(name);
    write_text(&path, text)?;
    report.outputs.push(path);
    Ok(())
}

fn labels_detail(labels: &[String]) -> Value {
    Value::Array(
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| json!({ "index": i + 1, "label": l }))
            .collect(),
    )
}

fn load(cli: &Cli, path: &Path, report: &mut RunReport) -> CliResult<Input> {
    report.param("input", path);
    report.param("format", format!("{:?}", cli.format).to_lowercase());
    report.param("directed", cli.directed);
    load_input(path, cli.format, cli.directed)
}

/// Distances for graph inputs; matrix inputs are taken as given.
fn distances(input: &Input) -> CliResult<TropicalMatrix> {
    match input.graph {
        Some(_) => Ok(kleene_star(&input.matrix)?),
        None => Ok(input.matrix.clone()),
    }
}

fn relative(residual: f64, norm: f64) -> f64 {
    if norm > 0.0 {
        residual / norm
    } else {
        residual
    }
}

pub fn spd(cli: &Cli, args: &SpdArgs, report: &mut RunReport) -> CliResult<()> {
    let input = load(cli, &args.input, report)?;
    let d = kleene_star(&input.matrix)?;
    write_output(cli, report, &args.out, &d.to_csv())?;
    report.detail("nodes", labels_detail(&input.labels));
    report.detail("finite", d.is_finite());
    Ok(())
}

pub fn regress(cli: &Cli, args: &RegressArgs, report: &mut RunReport) -> CliResult<()> {
    report.param("matrix", &args.matrix);
    report.param("rhs", &args.rhs);
    report.param("norm", if args.norm == Norm::Inf { "inf" } else { "2" });
    report.param("x0", &args.x0);
    report.param("max_iter", args.max_iter);
    report.param("tol", args.tol);
    let a = read_matrix(&args.matrix)?;
    let y = read_vector(&args.rhs)?;
    let outcome = match args.norm {
        Norm::Inf => {
            if args.x0 != "auto" {
                return Err(CliError::Usage("--x0 only applies to --norm 2".into()));
            }
            chebyshev_regression(&a, &y)?
        }
        Norm::Two => {
            let cfg = LineSearchConfig {
                max_iter: args.max_iter,
                tol: args.tol,
            };
            let x0 = if args.x0 == "auto" {
                chebyshev_regression(&a, &y)?.solution
            } else {
                read_vector(Path::new(&args.x0))?
            };
            newton_directed_line_search(&a, &y, &x0, &cfg)?
        }
    };
    let record = json!({
        "solution": floats(&outcome.solution),
        "residual_norm": float(outcome.residual_norm),
        "norm_kind": outcome.norm_kind,
        "iterations": outcome.iterations,
        "converged": outcome.converged,
        "residual_trace": floats(&outcome.residual_trace),
    });
    write_output(cli, report, &args.out, &(serde_json::to_string_pretty(&record).unwrap() + "\n"))?;
    report.residual("residual_norm", outcome.residual_norm);
    report.detail("outcome", record);
    Ok(())
}

fn echo_options(report: &mut RunReport, opts: &MinplusOptions, restarts: usize) {
    report.param("t", opts.t);
    report.param("mu", opts.mu);
    report.param("restarts", restarts);
    report.param("max_iter", opts.max_iter);
    report.param("gauss_seidel", opts.gauss_seidel);
}

fn sym_config(cli: &Cli, opts: &MinplusOptions, rank: usize) -> SymFactorConfig {
    let mut cfg = SymFactorConfig::new(rank);
    cfg.jacobi_steps = opts.t;
    cfg.mu = opts.mu;
    cfg.max_iter = opts.max_iter;
    cfg.restarts = opts.restarts.unwrap_or(100);
    cfg.seed = cli.seed;
    cfg
}

fn general_config(cli: &Cli, opts: &MinplusOptions, rank: usize) -> GeneralFactorConfig {
    let mut cfg = GeneralFactorConfig::new(rank);
    cfg.max_iter = opts.max_iter;
    cfg.restarts = opts.restarts.unwrap_or(10);
    cfg.seed = cli.seed;
    cfg.gauss_seidel = opts.gauss_seidel;
    cfg
}

fn check_rank(rank: usize, limit: usize) -> CliResult<()> {
    if rank == 0 || rank > limit {
        return Err(CliError::Usage(format!("--rank must lie in 1..={limit}, got {rank}")));
    }
    Ok(())
}

fn stem(name: &str) -> &str {
    name.strip_suffix(".json").unwrap_or(name)
}

pub fn factor(cli: &Cli, args: &FactorArgs, report: &mut RunReport) -> CliResult<()> {
    let input = load(cli, &args.input, report)?;
    let d = distances(&input)?;
    check_rank(args.rank, d.rows().min(d.cols()))?;
    report.param("rank", args.rank);
    report.param("mode", format!("{:?}", args.mode).to_lowercase());

    let mut waypoints = None;
    let pair = match args.mode {
        FactorMode::Sym => {
            let cfg = sym_config(cli, &args.options, args.rank);
            echo_options(report, &args.options, cfg.restarts);
            sym_factorize_with_starts(&d, &cfg, &[])?
        }
        FactorMode::General => {
            let cfg = general_config(cli, &args.options, args.rank);
            echo_options(report, &args.options, cfg.restarts);
            nonsym_factorize(&d, &cfg)?
        }
        FactorMode::Actual => {
            if !d.is_square() {
                return Err(CliError::Usage("--mode actual needs a square distance matrix".into()));
            }
            report.param("cap", args.cap);
            let (w, pair) = actual_waypoint_search(&d, args.rank, args.cap, cli.seed)?;
            waypoints = Some(w.iter().map(|k| k + 1).collect::<Vec<_>>());
            pair
        }
    };
    let norm = frobenius_norm(&d)?;
    let rel = relative(pair.residual, norm);

    let mut record = json!({
        "mode": format!("{:?}", args.mode).to_lowercase(),
        "rank": args.rank,
        "labels": input.labels,
        "residual": float(pair.residual),
        "relative_residual": float(rel),
        "restarts_used": pair.restarts_used,
        "left": rows(&pair.left),
        "right": rows(&pair.right),
        "iteration_trace": floats(&pair.iteration_trace),
    });
    if let Some(w) = &waypoints {
        record["waypoints"] = json!(w);
        report.detail("waypoints", w);
    }
    write_output(cli, report, &args.out, &(serde_json::to_string_pretty(&record).unwrap() + "\n"))?;
    let base = stem(&args.out);
    write_output(cli, report, &format!("{base}_left.csv"), &pair.left.to_csv())?;
    write_output(cli, report, &format!("{base}_right.csv"), &pair.right.to_csv())?;
    report.residual("residual", pair.residual);
    report.residual("relative_residual", rel);
    report.detail("nodes", labels_detail(&input.labels));
    Ok(())
}

/// The classical matrix a baseline approximates.
fn baseline_target(input: &Input, target: Target) -> CliResult<TropicalMatrix> {
    match target {
        Target::Distance => distances(input),
        Target::Adjacency => match &input.graph {
            Some(g) => Ok(TropicalMatrix::from_rows(&g.adjacency())?),
            None => Err(CliError::Usage("--target adjacency needs a graph input".into())),
        },
    }
}

fn default_target(method_is_nnmf: bool) -> Target {
    if method_is_nnmf {
        Target::Adjacency
    } else {
        Target::Distance
    }
}

pub fn baseline(cli: &Cli, args: &BaselineArgs, report: &mut RunReport) -> CliResult<()> {
    let input = load(cli, &args.input, report)?;
    let target = args.target.unwrap_or(default_target(args.method == BaselineMethod::Nnmf));
    let m = to_dense(&baseline_target(&input, target)?)?;
    let (n, d) = m.dim();
    check_rank(args.rank, n.min(d))?;
    report.param("method", format!("{:?}", args.method).to_lowercase());
    report.param("target", format!("{target:?}").to_lowercase());
    report.param("rank", args.rank);
    let rel = match args.method {
        BaselineMethod::Svd => {
            let (approx, rel) = svd_truncate(&m, args.rank)?;
            write_output(cli, report, &format!("{}_approx.csv", args.out), &dense_csv(n, d, approx.iter().copied()))?;
            rel
        }
        BaselineMethod::Nnmf => {
            report.param("iters", args.iters);
            let out = nnmf(&m, args.rank, args.iters, cli.seed)?;
            let approx = out.w.dot(&out.h);
            write_output(cli, report, &format!("{}_approx.csv", args.out), &dense_csv(n, d, approx.iter().copied()))?;
            write_output(cli, report, &format!("{}_w.csv", args.out), &dense_csv(n, args.rank, out.w.iter().copied()))?;
            write_output(cli, report, &format!("{}_h.csv", args.out), &dense_csv(args.rank, d, out.h.iter().copied()))?;
            let norm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
            relative(out.residual(), norm)
        }
    };
    report.residual("relative_residual", rel);
    report.detail("nodes", labels_detail(&input.labels));
    Ok(())
}

/// Largest finite entry magnitude of `left ⊗ right`, used to pad factors so
/// the extra rank leaves the product unchanged.
fn pad_value(pair: &FactorPair) -> f64 {
    let p = pair.product();
    p.as_slice().iter().fold(0.0f64, |acc, v| acc.max(v.abs())) / 2.0 + 1.0
}

fn pad_columns(m: &TropicalMatrix, value: f64) -> TropicalMatrix {
    let rows: Vec<Vec<f64>> = (0..m.rows())
        .map(|i| {
            let mut r = m.row(i).to_vec();
            r.push(value);
            r
        })
        .collect();
    TropicalMatrix::from_rows(&rows).expect("rows share a length")
}

pub fn residual_curve(cli: &Cli, args: &CurveArgs, report: &mut RunReport) -> CliResult<()> {
    let input = load(cli, &args.input, report)?;
    let is_nnmf = args.method == CurveMethod::Nnmf;
    let target = args.target.unwrap_or(default_target(is_nnmf));
    let m = baseline_target(&input, target)?;
    let full = m.rows().min(m.cols());
    let max_rank = args.max_rank.unwrap_or(full);
    check_rank(max_rank, full)?;
    report.param("method", format!("{:?}", args.method).to_lowercase());
    report.param("target", format!("{target:?}").to_lowercase());
    report.param("max_rank", max_rank);

    let norm = frobenius_norm(&m)?;
    let mut curve = Vec::with_capacity(max_rank);
    match args.method {
        CurveMethod::MinplusSym => {
            let restarts = args.options.restarts.unwrap_or(100);
            echo_options(report, &args.options, restarts);
            let mut prev: Option<FactorPair> = None;
            for rank in 1..=max_rank {
                let cfg = sym_config(cli, &args.options, rank);
                let starts: Vec<TropicalMatrix> = prev
                    .iter()
                    .map(|p| pad_columns(&p.left, pad_value(p)))
                    .collect();
                let pair = sym_factorize_with_starts(&m, &cfg, &starts)?;
                curve.push(relative(pair.residual, norm));
                prev = Some(pair);
            }
        }
        CurveMethod::MinplusGeneral => {
            let restarts = args.options.restarts.unwrap_or(10);
            echo_options(report, &args.options, restarts);
            let mut prev: Option<FactorPair> = None;
            for rank in 1..=max_rank {
                let cfg = general_config(cli, &args.options, rank);
                let mut pair = nonsym_factorize(&m, &cfg)?;
                if let Some(p) = &prev {
                    let c = pad_value(p);
                    let left = pad_columns(&p.left, c);
                    let right = pad_columns(&p.right.transpose(), c).transpose();
                    let warm = nonsym_factorize_from(&m, left, Some(right), &cfg)?;
                    if warm.residual < pair.residual {
                        pair = warm;
                    }
                }
                curve.push(relative(pair.residual, norm));
                prev = Some(pair);
            }
        }
        CurveMethod::Svd => {
            let dense = to_dense(&m)?;
            for rank in 1..=max_rank {
                curve.push(svd_truncate(&dense, rank)?.1);
            }
        }
        CurveMethod::Nnmf => {
            report.param("iters", args.iters);
            let dense = to_dense(&m)?;
            for rank in 1..=max_rank {
                curve.push(relative(nnmf(&dense, rank, args.iters, cli.seed)?.residual(), norm));
            }
        }
    }
    let mut csv = String::from("rank,relative_residual\n");
    for (k, r) in curve.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", k + 1, r));
    }
    write_output(cli, report, &args.out, &csv)?;
    report.detail("curve", floats(&curve));
    if let Some(&last) = curve.last() {
        report.residual("relative_residual_at_max_rank", last);
    }
    Ok(())
}

/// Factor rows and labels from a `factor` JSON file or a plain CSV.
fn read_factor(path: &Path) -> CliResult<(TropicalMatrix, Vec<String>)> {
    let text = read_text(path)?;
    let context = path.display().to_string();
    if let Ok(value) = serde_json::from_str::<Value>(&text) {
        let left = value
            .get("left")
            .and_then(Value::as_array)
            .ok_or_else(|| CliError::Data(format!("{context}: missing \"left\" factor")))?;
        let parsed: Option<Vec<Vec<f64>>> = left
            .iter()
            .map(|row| row.as_array().and_then(|r| r.iter().map(Value::as_f64).collect()))
            .collect();
        let parsed = parsed.ok_or_else(|| CliError::Data(format!("{context}: factor entries must be numbers")))?;
        let f = TropicalMatrix::from_rows(&parsed).map_err(|e| CliError::data(&context, e))?;
        let labels = match value.get("labels").and_then(Value::as_array) {
            Some(ls) => ls.iter().map(|l| l.as_str().unwrap_or_default().to_string()).collect(),
            None => (1..=f.rows()).map(|i| i.to_string()).collect(),
        };
        return Ok((f, labels));
    }
    let f = TropicalMatrix::from_csv(&text).map_err(|e| CliError::data(&context, e))?;
    let labels = (1..=f.rows()).map(|i| i.to_string()).collect();
    Ok((f, labels))
}

pub fn assign(cli: &Cli, args: &AssignArgs, report: &mut RunReport) -> CliResult<()> {
    report.param("factors", &args.factors);
    let (f, labels) = read_factor(&args.factors)?;
    if labels.len() != f.rows() {
        return Err(CliError::Data("label count does not match the factor rows".into()));
    }
    let m = f.cols();
    let mut csv = String::from("index,label,neighborhood");
    for k in 1..=m {
        csv.push_str(&format!(",recip_{k}"));
    }
    csv.push_str(",sentinel\n");
    let mut assigned = Vec::with_capacity(f.rows());
    let mut flagged = Vec::new();
    for (i, label) in labels.iter().enumerate() {
        let row = f.row(i);
        let best = (0..m).fold(0, |b, k| if row[k] < row[b] { k } else { b });
        assigned.push(best + 1);
        let mut sentinel = false;
        let recips: Vec<String> = row
            .iter()
            .map(|&v| {
                if v <= 0.0 {
                    sentinel = true;
                    "inf".to_string()
                } else {
                    (1.0 / v).to_string()
                }
            })
            .collect();
        if sentinel {
            flagged.push(i + 1);
        }
        csv.push_str(&format!("{},{},{},{},{}\n", i + 1, label, best + 1, recips.join(","), u8::from(sentinel)));
    }
    write_output(cli, report, &args.out, &csv)?;
    report.detail("assignments", &assigned);
    report.detail("sentinel_nodes", &flagged);
    Ok(())
}

