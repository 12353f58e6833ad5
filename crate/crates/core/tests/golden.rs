//! Kernel evaluators against the high-precision oracle values in
//! `tests/data/golden.csv` (see `scripts/oracle_golden.py`).

use fujita_core::solver::choose_domain;
use fujita_core::{InitialDatum, KernelEvaluator, ProblemParams};

struct Row {
    quantity: String,
    p: Option<f64>,
    x: Option<f64>,
    t: Option<f64>,
    value: f64,
    tol: f64,
}

fn parse_opt(s: &str) -> Option<f64> {
    match s {
        "" => None,
        "1/3" => Some(1.0 / 3.0),
        v => Some(v.parse().unwrap()),
    }
}

fn rows() -> Vec<Row> {
    let text = include_str!("data/golden.csv");
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            Row {
                quantity: f[0].to_string(),
                p: parse_opt(f[1]),
                x: parse_opt(f[2]),
                t: parse_opt(f[3]),
                value: f[4].parse().unwrap(),
                tol: f[5].parse().unwrap(),
            }
        })
        .collect()
}

fn evaluator(p: f64) -> KernelEvaluator {
    KernelEvaluator::with_defaults(InitialDatum::tent(), ProblemParams::new(p).unwrap()).unwrap()
}

#[test]
fn every_golden_value_matches() {
    let rows = rows();
    assert!(rows.len() > 30);
    for row in &rows {
        let ev = evaluator(row.p.unwrap_or(0.5));
        let got = match row.quantity.as_str() {
            "D" => ev.heat(row.x.unwrap(), row.t.unwrap()).unwrap(),
            "Dx" => ev.heat_dx(row.x.unwrap(), row.t.unwrap()).unwrap(),
            "Delta" => ev.delta(row.x.unwrap()),
            "E" => ev.excess(row.x.unwrap()),
            "I" => ev.excess_mass(),
            "W" => ev.linearized(row.x.unwrap(), row.t.unwrap()).unwrap(),
            "cbar_minus" => ev.cbar_constants(1e-9).unwrap().minus,
            "cbar_plus" => ev.cbar_constants(1e-9).unwrap().plus,
            "choose_domain" => choose_domain(1.0, row.t.unwrap(), 1e-12).unwrap(),
            other => panic!("unknown golden quantity {other}"),
        };
        let err = (got - row.value).abs();
        println!(
            "{:<14} p={:?} x={:?} t={:?}: {got:.17e} (err {err:.2e}, tol {:.0e})",
            row.quantity, row.p, row.x, row.t, row.tol
        );
        assert!(
            err <= row.tol,
            "{} at p={:?} x={:?} t={:?}: {got} vs {}",
            row.quantity,
            row.p,
            row.x,
            row.t,
            row.value
        );
    }
}

#[test]
fn quadrature_route_matches_golden_heat() {
    let ev = evaluator(0.5);
    for row in rows()
        .iter()
        .filter(|r| r.quantity == "D" || r.quantity == "Dx")
    {
        let (x, t) = (row.x.unwrap(), row.t.unwrap());
        let got = if row.quantity == "D" {
            ev.heat_quadrature(x, t).unwrap()
        } else {
            ev.heat_dx_quadrature(x, t).unwrap()
        };
        assert!(
            (got - row.value).abs() <= 1e-13,
            "{} at ({x}, {t}): {got} vs {}",
            row.quantity,
            row.value
        );
    }
}
