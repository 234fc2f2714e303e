use hardy_core::optimizer::{
    best_constant_general, best_constant_p2, Certification, OptimizeOptions as CoreOptions,
    OptimizeResult,
};
use hardy_core::paths::edge_usage_census;
use hardy_core::testfns::{
    one_minus_vn_lhs_bound, radial_lhs, shell_tail_lower, un_energy_exact, un_lhs_bound,
    un_rhs_bound, vn_energy_bound, vn_energy_exact, vn_lhs_bound, FamilyKind, LowerBound,
    TestFamily,
};
use hardy_core::verify::{
    complement_lhs, complement_truncation, lenient_f64, optimality_probe, parameter_grid,
    run_campaign, CampaignConfig, CellSummary, ProbeConfig,
};
use hardy_core::{theorem_constant, ConstantReport, HardyParams};
use serde::{Deserialize, Serialize};

use crate::output::{opt, params_csv, render, Format, Header, Table, PARAMS_CSV};
use crate::{
    CensusArgs, Failure, Method, OptimizeArgs, OptimizeOptions, Outcome, ParamArgs, ProbeArgs,
    SweepArgs, SweepMode, TestfnArgs, VerifyArgs,
};

/// Every valid combination of the parameter lists. When none is valid the
/// first combination's validation error is reported.
pub fn cells(a: &ParamArgs) -> Result<Vec<HardyParams>, Failure> {
    let mut grid = parameter_grid(&a.regime, &a.lattice, &a.d, &a.p, &a.s, &a.eps);
    if grid.is_empty() {
        let mut first = HardyParams::new(a.regime[0], a.d[0], a.p[0])
            .on(a.lattice[0])
            .with_eps(a.eps[0]);
        first.s = a.s.first().copied();
        first.delta = a.delta;
        first.k = a.k;
        first.validate()?;
        return Err(Failure::Config("no valid parameter combination".into()));
    }
    for cell in &mut grid {
        cell.delta = a.delta;
        cell.k = a.k;
        cell.validate()?;
    }
    Ok(grid)
}

/// A cell's constant, or why it could not be assembled.
#[derive(Serialize, Deserialize)]
pub struct ConstantRow {
    pub params: HardyParams,
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ConstantReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn constants(a: &ParamArgs, format: Format) -> Result<Outcome, Failure> {
    let cells = cells(a)?;
    let mut rows = Vec::with_capacity(cells.len());
    for p in &cells {
        rows.push(match theorem_constant(p) {
            Ok(report) => ConstantRow { params: *p, report: Some(report), error: None },
            Err(e) => match Failure::from(e) {
                Failure::Numeric(m) => ConstantRow { params: *p, report: None, error: Some(m) },
                other => return Err(other),
            },
        });
    }
    #[derive(Serialize)]
    struct Config<'a> {
        cells: &'a [HardyParams],
    }
    let header = Header::new("constants", format, &Config { cells: &cells });
    let csv_row = |r: &ConstantRow| match &r.report {
        Some(rep) => {
            let mut p = r.params;
            p.k = Some(rep.k);
            format!("{},{},{},", params_csv(&p), rep.s_used, rep.value)
        }
        None => format!(
            "{},,,\"{}\"",
            params_csv(&r.params),
            r.error.as_deref().unwrap_or_default().replace('"', "'")
        ),
    };
    let bytes = render(
        &header,
        &Table {
            rows: &rows,
            csv_header: &format!("{PARAMS_CSV},s_used,value,error"),
            csv_row: &csv_row,
        },
    );
    if rows.len() == 1 {
        if let Some(m) = &rows[0].error {
            return Err(Failure::Numeric(m.clone()));
        }
    }
    let mut outcome = Outcome::new(bytes, true);
    outcome.numeric_errors = rows.iter().any(|r| r.error.is_some());
    Ok(outcome)
}

const SUMMARY_CSV: &str = "t,K,max_ratio,constant,trials,violations,errors";

fn summary_csv(c: &CellSummary) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        c.t, c.k, c.max_ratio, c.constant, c.trials, c.violations, c.errors
    )
}

pub fn verify(a: &VerifyArgs, format: Format) -> Result<Outcome, Failure> {
    let mut cfg = CampaignConfig::new(cells(&a.params)?, a.opts.trials, a.n, a.opts.seed);
    cfg.margin = a.opts.margin;
    if !a.opts.profiles.is_empty() {
        cfg.profiles = a.opts.profiles.clone();
    }
    let report = run_campaign(&cfg)?;
    let header = Header::new("verify", format, &cfg);
    let bytes = match format {
        Format::Jsonl => render(
            &header,
            &Table {
                rows: &report.records,
                csv_header: "",
                csv_row: &|_| String::new(),
            },
        ),
        Format::Json | Format::Csv => render(
            &header,
            &Table {
                rows: &report.cells,
                csv_header: &format!("{PARAMS_CSV},{SUMMARY_CSV}"),
                csv_row: &|c: &CellSummary| format!("{},{}", params_csv(&c.params), summary_csv(c)),
            },
        ),
    };
    eprintln!(
        "cells={} records={} violations={} errors={}",
        report.cells.len(),
        report.records.len(),
        report.violations.len(),
        report.errors.len()
    );
    Ok(Outcome::new(bytes, report.is_clean()))
}

pub fn probe(a: &ProbeArgs, format: Format) -> Result<Outcome, Failure> {
    let cfg = ProbeConfig {
        family: a.family,
        d: a.d,
        p: a.p,
        t: a.t,
        n_list: a.n.clone(),
    };
    let result = optimality_probe(&cfg)?;
    let header = Header::new("probe", format, &cfg);
    let bytes = match format {
        Format::Json => render(
            &header,
            &Table {
                rows: std::slice::from_ref(&result),
                csv_header: "",
                csv_row: &|_| String::new(),
            },
        ),
        Format::Jsonl | Format::Csv => render(
            &header,
            &Table {
                rows: &result.points,
                csv_header: "n,lhs,rhs,ratio",
                csv_row: &|p| format!("{},{},{},{}", p.n, p.lhs, p.rhs, p.ratio),
            },
        ),
    };
    eprintln!("slope={} verdict={:?}", result.fit.slope, result.verdict);
    Ok(Outcome::new(bytes, true))
}

fn core_options(o: &OptimizeOptions, n: u64) -> CoreOptions {
    let mut c = CoreOptions::new(n);
    c.margin = o.margin;
    c.tol = o.tol;
    c.max_iter = o.max_iter;
    c.restarts = o.restarts;
    c.seed = o.seed;
    c
}

fn optimize_cell(
    params: &HardyParams,
    n: u64,
    o: &OptimizeOptions,
) -> Result<(OptimizeResult, f64), Failure> {
    let opts = core_options(o, n);
    let use_p2 = match o.method {
        Method::Auto => params.p == 2.0,
        Method::P2 => true,
        Method::General => false,
    };
    let result = if use_p2 {
        best_constant_p2(params, &opts)?
    } else {
        best_constant_general(params, &opts)?
    };
    let constant = theorem_constant(params)?.value;
    Ok((result, constant))
}

#[derive(Serialize, Deserialize)]
pub struct OptimizeRow {
    #[serde(flatten)]
    pub result: OptimizeResult,
    pub constant: f64,
}

#[derive(Serialize)]
struct OptimizeConfig<'a> {
    cells: &'a [HardyParams],
    #[serde(rename = "N")]
    n: &'a [u64],
    options: &'a OptimizeOptions,
}

fn certification(c: Certification) -> &'static str {
    match c {
        Certification::Estimate => "ESTIMATE",
        Certification::LowerBoundOnly => "LOWER_BOUND_ONLY",
    }
}

pub fn optimize(a: &OptimizeArgs, format: Format) -> Result<Outcome, Failure> {
    let cells = cells(&a.params)?;
    if a.witness.is_some() && cells.len() != 1 {
        return Err(Failure::Config("--witness needs a single parameter cell".into()));
    }
    let rows = cells
        .iter()
        .map(|p| optimize_cell(p, a.n, &a.opts).map(|(result, constant)| OptimizeRow { result, constant }))
        .collect::<Result<Vec<_>, Failure>>()?;
    if let Some(path) = &a.witness {
        let mut buf = Vec::new();
        rows[0].result.write_witness_csv(&mut buf)?;
        std::fs::write(path, buf)?;
    }
    let header = Header::new(
        "optimize",
        format,
        &OptimizeConfig {
            cells: &cells,
            n: &[a.n],
            options: &a.opts,
        },
    );
    let csv_row = |r: &OptimizeRow| {
        let x = &r.result;
        format!(
            "{},{},{},{},{},{},{},{}",
            params_csv(&x.params),
            x.n,
            x.margin,
            x.estimate,
            r.constant,
            x.iterations,
            x.converged,
            certification(x.certification)
        )
    };
    let bytes = render(
        &header,
        &Table {
            rows: &rows,
            csv_header: &format!(
                "{PARAMS_CSV},N,margin,estimate,constant,iterations,converged,certification"
            ),
            csv_row: &csv_row,
        },
    );
    Ok(Outcome::new(bytes, true))
}

#[derive(Serialize, Deserialize)]
pub struct SweepRow {
    pub params: HardyParams,
    #[serde(rename = "N")]
    pub n: u64,
    pub estimate: f64,
    pub constant: f64,
    pub iterations: usize,
    pub converged: bool,
    pub certification: Certification,
}

#[derive(Serialize, Deserialize)]
pub struct SweepVerifyRow {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(flatten)]
    pub summary: CellSummary,
}

pub fn sweep(a: &SweepArgs, format: Format) -> Result<Outcome, Failure> {
    let cells = cells(&a.params)?;
    match a.mode {
        SweepMode::Optimize => {
            let mut rows = Vec::new();
            for p in &cells {
                for &n in &a.n {
                    let (r, constant) = optimize_cell(p, n, &a.optimize)?;
                    rows.push(SweepRow {
                        params: *p,
                        n,
                        estimate: r.estimate,
                        constant,
                        iterations: r.iterations,
                        converged: r.converged,
                        certification: r.certification,
                    });
                }
            }
            let header = Header::new(
                "sweep",
                format,
                &OptimizeConfig {
                    cells: &cells,
                    n: &a.n,
                    options: &a.optimize,
                },
            );
            let csv_row = |r: &SweepRow| {
                format!(
                    "{},{},{},{},{},{},{}",
                    params_csv(&r.params),
                    r.n,
                    r.estimate,
                    r.constant,
                    r.iterations,
                    r.converged,
                    certification(r.certification)
                )
            };
            let bytes = render(
                &header,
                &Table {
                    rows: &rows,
                    csv_header: &format!(
                        "{PARAMS_CSV},N,estimate,constant,iterations,converged,certification"
                    ),
                    csv_row: &csv_row,
                },
            );
            Ok(Outcome::new(bytes, true))
        }
        SweepMode::Verify => {
            let mut configs = Vec::new();
            let mut rows = Vec::new();
            let mut clean = true;
            for &n in &a.n {
                let mut cfg = CampaignConfig::new(cells.clone(), a.trials, n, a.optimize.seed);
                cfg.margin = a.optimize.margin;
                if !a.profiles.is_empty() {
                    cfg.profiles = a.profiles.clone();
                }
                let report = run_campaign(&cfg)?;
                clean &= report.is_clean();
                rows.extend(report.cells.into_iter().map(|summary| SweepVerifyRow { n, summary }));
                configs.push(cfg);
            }
            let header = Header::new("sweep", format, &configs);
            let csv_row = |r: &SweepVerifyRow| {
                format!("{},{},{}", params_csv(&r.summary.params), r.n, summary_csv(&r.summary))
            };
            let bytes = render(
                &header,
                &Table {
                    rows: &rows,
                    csv_header: &format!("{PARAMS_CSV},N,{SUMMARY_CSV}"),
                    csv_row: &csv_row,
                },
            );
            Ok(Outcome::new(bytes, clean))
        }
    }
}

pub fn census(a: &CensusArgs, format: Format) -> Result<Outcome, Failure> {
    let report = edge_usage_census(a.n, a.k, a.d, a.shift)?;
    #[derive(Serialize)]
    struct Config {
        n: u32,
        k: u32,
        d: usize,
        shift: String,
    }
    let header = Header::new(
        "census",
        format,
        &Config {
            n: a.n,
            k: a.k,
            d: a.d,
            shift: a.shift.to_string(),
        },
    );
    let bytes = match format {
        Format::Json | Format::Jsonl => render(
            &header,
            &Table {
                rows: std::slice::from_ref(&report),
                csv_header: "",
                csv_row: &|_| String::new(),
            },
        ),
        Format::Csv => {
            let mut out = render::<()>(
                &header,
                &Table {
                    rows: &[],
                    csv_header: "",
                    csv_row: &|_| String::new(),
                },
            );
            // replace the empty table header line by the edge table
            out.pop();
            report.write_csv(&mut out)?;
            out
        }
    };
    eprintln!(
        "max_count={} bound={} stray_vertices={}",
        report.max_count, report.bound, report.stray_vertices
    );
    Ok(Outcome::new(bytes, report.within_bounds()))
}

/// One exact functional value against one of its bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestfnRow {
    pub family: FamilyKind,
    pub d: usize,
    pub t: f64,
    pub p: f64,
    pub n: u64,
    /// `lhs` (the weighted sum) or `energy`.
    pub quantity: String,
    /// `lower` or `upper`: the side the bound sits on.
    pub relation: String,
    #[serde(with = "lenient_f64")]
    pub bound: f64,
    pub exact: f64,
    /// `None` when the bound is infinite and no finite value can check it.
    pub holds: Option<bool>,
}

const TESTFN_TOL: f64 = 1e-9;

fn row(a: &TestfnArgs, n: u64, quantity: &str, lower: bool, bound: f64, exact: f64) -> TestfnRow {
    let holds = if bound.is_infinite() {
        None
    } else if lower {
        Some(exact >= bound - TESTFN_TOL * bound.abs())
    } else {
        Some(exact <= bound + TESTFN_TOL * bound.abs())
    };
    TestfnRow {
        family: a.family,
        d: a.d,
        t: a.t,
        p: a.p,
        n,
        quantity: quantity.into(),
        relation: if lower { "lower" } else { "upper" }.into(),
        bound,
        exact,
        holds,
    }
}

pub fn testfn(a: &TestfnArgs, format: Format) -> Result<Outcome, Failure> {
    let (d, t, p) = (a.d, a.t, a.p);
    let mut rows = Vec::new();
    for &n in &a.n {
        let fam = TestFamily::new(a.family, n, d)?;
        match a.family {
            FamilyKind::IndicatorUn => {
                rows.push(row(a, n, "lhs", true, un_lhs_bound(d, t, n), radial_lhs(&fam, t, p, n)));
                rows.push(row(a, n, "energy", false, un_rhs_bound(d, p, n), un_energy_exact(d, n)));
            }
            FamilyKind::TentVn => {
                rows.push(row(a, n, "lhs", true, vn_lhs_bound(d, t, p, n)?, radial_lhs(&fam, t, p, n)));
                rows.push(row(a, n, "energy", false, vn_energy_bound(d, p, n), vn_energy_exact(d, p, n)));
            }
            FamilyKind::ComplementOneMinusVn => {
                let bound = match one_minus_vn_lhs_bound(d, t, p, n)? {
                    LowerBound::Finite(v) => v,
                    LowerBound::Infinite => f64::INFINITY,
                };
                // truncated sum plus a lower bound for the tail
                let mut exact = complement_lhs(d, p, t, n)?;
                if t > d as f64 {
                    exact += shell_tail_lower(d, t, complement_truncation(n));
                }
                rows.push(row(a, n, "lhs", true, bound, exact));
                rows.push(row(a, n, "energy", false, vn_energy_bound(d, p, n), vn_energy_exact(d, p, n)));
            }
        }
    }
    #[derive(Serialize)]
    struct Config<'a> {
        family: FamilyKind,
        d: usize,
        t: f64,
        p: f64,
        n: &'a [u64],
    }
    let header = Header::new(
        "testfn",
        format,
        &Config {
            family: a.family,
            d,
            t,
            p,
            n: &a.n,
        },
    );
    let csv_row = |r: &TestfnRow| {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            r.family, r.d, r.t, r.p, r.n, r.quantity, r.relation, r.bound, r.exact, opt(r.holds)
        )
    };
    let bytes = render(
        &header,
        &Table {
            rows: &rows,
            csv_header: "family,d,t,p,n,quantity,relation,bound,exact,holds",
            csv_row: &csv_row,
        },
    );
    let clean = rows.iter().all(|r| r.holds != Some(false));
    Ok(Outcome::new(bytes, clean))
}
