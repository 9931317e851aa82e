use khinchin::asymptotics::{clt_trace, hayman_estimate};
use khinchin::corpus::{self, DEFAULT_CORPUS};
use khinchin::diagnostics::{clan_diagnose_with, gap_stats, order_estimate_with, ClanConfig, GridSpec};
use khinchin::dsl::{compile, parse, CompileConfig};
use khinchin::family::KhinchinFamily;
use khinchin::gf::builtins::exact_to_f64;
use khinchin::gf::{ClassKStatus, Radius};
use khinchin::par::{self, Execution};
use khinchin::sampler::sample;
use khinchin::verify::{all_passed, run_suite, CheckKind, Precision, VerifyConfig, Witness};
use serde_json::{json, Value};

use crate::output::{num, opt, render, Table};
use crate::{Command, Common, ExecArg, PrecisionArg, Report};

use std::io::Write;

type Res<T> = Result<T, String>;

fn err(e: khinchin::Error) -> String {
    e.to_string()
}

/// Bare built-in names such as `partition` are accepted without parentheses.
fn normalise(src: &str) -> String {
    let s = src.trim();
    if s != "z" && !s.is_empty() && s.chars().all(|c| c.is_ascii_lowercase() || c == '_') {
        format!("{s}()")
    } else {
        s.to_string()
    }
}

fn parse_radius(s: &str) -> Res<Radius> {
    match s.trim() {
        "inf" => Ok(Radius::Infinite),
        x => match x.parse::<f64>() {
            Ok(r) if r > 0.0 && r.is_finite() => Ok(Radius::Finite(r)),
            _ => Err(format!("invalid radius '{s}'")),
        },
    }
}

fn load(src: &str, c: &Common) -> Res<KhinchinFamily> {
    let e = parse(&normalise(src)).map_err(|e| e.to_string())?;
    let cfg = CompileConfig {
        order: c.n_trunc,
        radius: c.radius.as_deref().map(parse_radius).transpose()?,
        ..CompileConfig::default()
    };
    let g = compile(&e, &cfg).map_err(err)?.genfunction;
    KhinchinFamily::new(g).map_err(err)
}

fn family(c: &Common) -> Res<(String, KhinchinFamily)> {
    let src = c.f.as_deref().ok_or("--f is required for this command")?;
    Ok((src.to_string(), load(src, c)?))
}

fn exec(c: &Common) -> Execution {
    match c.exec {
        ExecArg::Parallel => Execution::Parallel,
        ExecArg::Sequential => Execution::Sequential,
    }
}

fn grid_points(c: &Common, fam: &KhinchinFamily) -> Res<(GridSpec, Vec<f64>)> {
    let g = GridSpec::parse(&c.grid).map_err(err)?;
    let pts = g.points(fam.radius()).map_err(err)?;
    Ok((g, pts))
}

fn validate(c: &Common) -> Res<()> {
    if c.n_trunc == 0 {
        return Err("--n-trunc must be positive".into());
    }
    if let Some(t) = c.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err("--tol must be positive".into());
        }
    }
    Ok(())
}

fn config_echo(c: &Common, extra: Value) -> Value {
    let mut v = serde_json::to_value(c).expect("config serializes");
    if let (Value::Object(o), Value::Object(e)) = (&mut v, extra) {
        o.extend(e);
    }
    v
}

pub fn run(cmd: Command) -> Res<u8> {
    let (common, report) = match cmd {
        Command::Describe(c) => {
            let r = describe(&c)?;
            (c, r)
        }
        Command::Stats(c) => {
            let r = stats(&c)?;
            (c, r)
        }
        Command::Clan(c) => {
            let r = clan(&c)?;
            (c, r)
        }
        Command::Order { common, p } => {
            let r = order(&common, p)?;
            (common, r)
        }
        Command::Verify { common, suite } => {
            let r = verify(&common, &suite)?;
            (common, r)
        }
        Command::Estimate { common, n } => {
            let r = estimate(&common, &n)?;
            (common, r)
        }
        Command::Sample { common, t, count } => {
            let r = sample_cmd(&common, t, count)?;
            (common, r)
        }
        Command::Clt(c) => {
            let r = clt(&c)?;
            (c, r)
        }
    };
    let status = report.status;
    let text = render(report, common.format, common.precision == PrecisionArg::High)?;
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(format!("cannot write output: {e}")),
                _ => {}
            }
        }
    }
    Ok(status)
}

fn describe(c: &Common) -> Res<Report> {
    validate(c)?;
    let (src, fam) = family(c)?;
    let f = &fam.f;
    let (in_k, class_k) = match &f.class_k {
        ClassKStatus::VerifiedUpTo(n) => (Value::Bool(true), format!("verified up to n = {n}")),
        ClassKStatus::Violated { index, reason } => (Value::Bool(false), format!("violated at n = {index}: {reason}")),
        ClassKStatus::Unknown => (Value::Null, "not checked".to_string()),
    };
    let n_max = f.oracle.known_up_to().map_or(c.n_trunc as u64, |k| k.min(c.n_trunc as u64));
    let gaps = gap_stats(f, n_max, None).map_err(err)?;
    let (coeffs, coeff_text): (Vec<f64>, Vec<String>) = (0..10u64.min(n_max + 1))
        .map(|n| match f.oracle.exact(n) {
            Some(q) => (exact_to_f64(&q), q.to_string()),
            None => (f.coeff(n), num(f.coeff(n))),
        })
        .unzip();
    let mf = fam.classify_mf();
    let results = json!([{
        "function": src,
        "name": f.name,
        "in_class_k": in_k,
        "class_k": class_k,
        "radius": f.radius.to_string(),
        "mf": mf.to_string(),
        "mf_basis": f.mf_basis,
        "gap_observed": gaps.gap_observed,
        "gapbar_observed": gaps.gapbar_observed,
        "gbar_observed": gaps.gbar_observed,
        "gap_window": gaps.window,
        "gap_n_max": n_max,
        "coefficients": coeffs,
        "warnings": fam.warnings,
    }]);
    let mut table = Table::new(&["key", "value"]);
    for (k, v) in [
        ("function", src.clone()),
        ("in_class_k", in_k.to_string()),
        ("class_k", class_k),
        ("radius", f.radius.to_string()),
        ("mf", mf.to_string()),
        ("gap_observed", gaps.gap_observed.to_string()),
        ("gapbar_observed", gaps.gapbar_observed.to_string()),
        ("gbar_observed", num(gaps.gbar_observed)),
        ("coefficients", coeff_text.join(" ")),
    ] {
        table.push(vec![k.to_string(), v]);
    }
    Ok(Report { command: "describe", config: config_echo(c, json!({})), results, table, status: 0 })
}

fn stats(c: &Common) -> Res<Report> {
    validate(c)?;
    let (src, fam) = family(c)?;
    let (_, pts) = grid_points(c, &fam)?;
    let rows = par::map(exec(c), &pts, |&t| fam.stats(t));
    let mut table = Table::new(&["t", "ln_f", "mean", "var", "sigma_over_m", "l_f", "quotient", "error"]);
    let mut results = Vec::new();
    for (t, r) in pts.iter().zip(rows) {
        match r {
            Ok(s) => {
                table.push(vec![
                    num(*t),
                    num(s.log_f),
                    num(s.mean),
                    num(s.var),
                    num(s.ratio),
                    num(s.l_f),
                    num(s.second_moment_quotient),
                    String::new(),
                ]);
                results.push(serde_json::to_value(s).unwrap());
            }
            Err(e) => {
                let mut row = vec![num(*t)];
                row.extend(std::iter::repeat_n(String::new(), 6));
                row.push(e.to_string());
                table.push(row);
                results.push(json!({ "t": t, "error": e.to_string() }));
            }
        }
    }
    Ok(Report {
        command: "stats",
        config: config_echo(c, json!({ "function": src })),
        results: Value::Array(results),
        table,
        status: 0,
    })
}

fn clan(c: &Common) -> Res<Report> {
    validate(c)?;
    let (src, fam) = family(c)?;
    let grid = GridSpec::parse(&c.grid).map_err(err)?;
    let v = clan_diagnose_with(&fam, &grid, &ClanConfig { exec: exec(c), ..ClanConfig::default() }).map_err(err)?;
    let mut table = Table::new(&[
        "t",
        "sigma_over_m",
        "l_f",
        "quotient",
        "mean_ratio",
        "log_quotient",
        "mgf",
        "r_minus_t_times_m",
        "verdict",
    ]);
    let verdict = v.verdict.to_string();
    for i in 0..v.grid.len() {
        let pick = |s: &Option<Vec<Option<f64>>>| s.as_ref().and_then(|s| s[i]);
        table.push(vec![
            num(v.grid[i]),
            num(v.ratio_series[i]),
            num(v.l_series[i]),
            num(v.second_moment_quotient[i]),
            opt(v.mean_ratio_series[i]),
            opt(pick(&v.log_quotient_series)),
            opt(pick(&v.mgf_series)),
            opt(v.rm_series.as_ref().map(|s| s[i])),
            verdict.clone(),
        ]);
    }
    let mut obj = serde_json::to_value(&v).unwrap();
    obj["function"] = json!(src);
    Ok(Report { command: "clan", config: config_echo(c, json!({})), results: json!([obj]), table, status: 0 })
}

fn order(c: &Common, p: f64) -> Res<Report> {
    validate(c)?;
    if !(p > 0.0) {
        return Err("--p must be positive".into());
    }
    let (src, fam) = family(c)?;
    let grid = GridSpec::parse(&c.grid).map_err(err)?;
    let o = order_estimate_with(&fam, &grid, p, exec(c)).map_err(err)?;
    let mut table = Table::new(&["trace", "x", "value"]);
    for (t, v) in &o.loglog_trace {
        table.push(vec!["loglog".into(), num(*t), num(*v)]);
    }
    for (t, v) in &o.moment_trace {
        table.push(vec!["moment".into(), num(*t), num(*v)]);
    }
    for (n, v) in &o.hadamard_trace {
        table.push(vec!["hadamard".into(), n.to_string(), num(*v)]);
    }
    for (k, v) in [
        ("var_over_mean_min", o.var_over_mean_min),
        ("var_over_mean_max", o.var_over_mean_max),
        ("var_over_mean_final", o.var_over_mean_final),
    ] {
        table.push(vec![k.into(), String::new(), num(v)]);
    }
    let mut obj = serde_json::to_value(&o).unwrap();
    obj["function"] = json!(src);
    Ok(Report { command: "order", config: config_echo(c, json!({ "p": p })), results: json!([obj]), table, status: 0 })
}

fn witness_text(w: &std::collections::BTreeMap<String, Witness>) -> String {
    w.iter()
        .map(|(k, v)| match v {
            Witness::Num(x) => format!("{k}={}", num(*x)),
            Witness::Exact(s) => format!("{k}={s}"),
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn verify(c: &Common, suite: &str) -> Res<Report> {
    validate(c)?;
    let checks = CheckKind::parse_list(suite).map_err(err)?;
    let corpus = match &c.f {
        Some(src) => vec![(src.clone(), load(src, c)?)],
        None => corpus::load(&DEFAULT_CORPUS).map_err(err)?,
    };
    let cfg = VerifyConfig {
        precision: match c.precision {
            PrecisionArg::Standard => Precision::Standard,
            PrecisionArg::High => Precision::High,
        },
        inequality_tol: c.tol,
        exec: exec(c),
        ..VerifyConfig::default()
    };
    let reports = run_suite(&corpus, &checks, &cfg);
    let mut table = Table::new(&["check", "subject", "outcome", "passed", "tolerance", "witness", "note"]);
    for r in &reports {
        table.push(vec![
            r.check_name.clone(),
            r.subject.clone(),
            serde_json::to_value(r.outcome).unwrap().as_str().unwrap().to_string(),
            r.passed.to_string(),
            num(r.tolerance_used),
            witness_text(&r.witness),
            r.note.clone().unwrap_or_default(),
        ]);
    }
    let status = if all_passed(&reports) { 0 } else { 1 };
    let names: Vec<&str> = checks.iter().map(|k| k.name()).collect();
    Ok(Report {
        command: "verify",
        config: config_echo(c, json!({ "suite": suite, "checks": names, "corpus": corpus.iter().map(|x| &x.0).collect::<Vec<_>>() })),
        results: serde_json::to_value(&reports).unwrap(),
        table,
        status,
    })
}

fn estimate(c: &Common, ns: &[u64]) -> Res<Report> {
    validate(c)?;
    let (src, fam) = family(c)?;
    let mut table =
        Table::new(&["n", "t_n", "log_estimate", "log_exact", "exact_source", "ratio", "clt_deviation", "caveat"]);
    let mut results = Vec::new();
    for &n in ns {
        let e = hayman_estimate(&fam, n).map_err(err)?;
        table.push(vec![
            n.to_string(),
            num(e.t_n),
            num(e.log_estimate),
            opt(e.log_exact),
            e.exact_source.map(|s| serde_json::to_value(s).unwrap().as_str().unwrap().to_string()).unwrap_or_default(),
            opt(e.ratio),
            opt(e.clt_deviation),
            e.caveat.clone().unwrap_or_default(),
        ]);
        results.push(serde_json::to_value(&e).unwrap());
    }
    Ok(Report {
        command: "estimate",
        config: config_echo(c, json!({ "function": src, "n": ns })),
        results: Value::Array(results),
        table,
        status: 0,
    })
}

fn sample_cmd(c: &Common, t: f64, count: usize) -> Res<Report> {
    validate(c)?;
    if count == 0 {
        return Err(khinchin::Error::EmptyBatch.to_string());
    }
    let (src, fam) = family(c)?;
    let b = sample(&fam, t, count, c.seed).map_err(err)?;
    let mut table = Table::new(&["x"]);
    for x in &b.samples {
        table.push(vec![x.to_string()]);
    }
    Ok(Report {
        command: "sample",
        config: config_echo(c, json!({ "function": src, "t": t, "count": count })),
        results: json!([b]),
        table,
        status: 0,
    })
}

fn clt(c: &Common) -> Res<Report> {
    validate(c)?;
    let (src, fam) = family(c)?;
    let grid = GridSpec::parse(&c.grid).map_err(err)?;
    let (devs, trimmed) = clt_trace(&fam, &grid, exec(c)).map_err(err)?;
    let mut table = Table::new(&["t", "mean", "sigma", "deviation", "argmax", "stride", "mass_outside", "rounding_floor"]);
    for d in &devs {
        table.push(vec![
            num(d.t),
            num(d.mean),
            num(d.sigma),
            num(d.deviation),
            d.argmax.to_string(),
            d.stride.to_string(),
            opt(d.mass_outside),
            num(d.rounding_floor),
        ]);
    }
    let trimmed: Vec<Value> = trimmed.iter().map(|(t, e)| json!({ "t": t, "error": e })).collect();
    Ok(Report {
        command: "clt",
        config: config_echo(c, json!({ "function": src })),
        results: json!([{ "function": src, "points": devs, "trimmed": trimmed }]),
        table,
        status: 0,
    })
}
