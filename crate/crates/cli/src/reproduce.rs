use serde_json::{json, Value};
use thickset_core::ballsys::{hex_uniformity_constant, yavicoli_thickness, BallSystem};
use thickset_core::cantor::{certified_thickness, IfsSet1D, ThicknessTag};
use thickset_core::patterns1d::hausdorff_lower_bound;
use thickset_core::patterns_nd::{lambda_window, threshold, Mode};
use thickset_core::scalar::{
    exact_string, format_decimal, int, parse_exact, rat, Exact, Interval, DEFAULT_PRECISION,
};
use thickset_core::Result;

use crate::output::{Artifact, Status, Table};
use crate::TableArg;

struct Row {
    quantity: String,
    computed: Interval,
    target: Exact,
    target_label: String,
    tolerance: Exact,
    tolerance_label: String,
}

impl Row {
    fn new(quantity: &str, computed: Interval, target: Exact, tolerance: Exact) -> Self {
        Row {
            quantity: quantity.to_string(),
            computed,
            target_label: exact_string(&target),
            target,
            tolerance_label: exact_string(&tolerance),
            tolerance,
        }
    }

    /// Target given as a decimal literal, shown as written.
    fn decimal(quantity: &str, computed: Interval, target: &str, tolerance: &str) -> Self {
        Row {
            target_label: target.to_string(),
            tolerance_label: tolerance.to_string(),
            ..Row::new(quantity, computed, dec(target), dec(tolerance))
        }
    }

    /// The enclosure must come within `tolerance` of the target.
    fn pass(&self) -> bool {
        let widened = Interval::new(
            self.computed.lo() - &self.tolerance,
            self.computed.hi() + &self.tolerance,
        )
        .expect("widening keeps order");
        widened.contains(&self.target) && (self.tolerance > int(0) || self.computed.is_point())
    }

    fn shown(&self) -> String {
        if self.computed.is_point() {
            let x = self.computed.lo();
            if x.is_integer() {
                exact_string(x)
            } else {
                format!("{} ≈ {}", exact_string(x), format_decimal(x, 8))
            }
        } else {
            self.computed.describe(10)
        }
    }
}

fn dec(s: &str) -> Exact {
    parse_exact(s).expect("literal parses")
}

fn system_rows() -> Result<Vec<Row>> {
    let grid = BallSystem::grid_ifs(10, rat(19, 200), rat(1, 100), 0)?;
    let r = rat(1, 5);
    let tau = yavicoli_thickness(&grid)?.lower_bound;
    let thr = threshold(None, &Interval::from_rat(1, 2), &r, Mode::Standard)?;
    let window = lambda_window(&grid, &r, Mode::Standard)?;
    let hex = BallSystem::hex_packing(int(1))?;
    let hex_p = BallSystem::hex_packing(rat(99_999, 100_000))?;
    Ok(vec![
        Row::decimal("grid thickness lower bound", tau, "8.5975", "0"),
        Row::new("grid threshold at λ = 1/2", thr, rat(10, 3), int(0)),
        Row::decimal(
            "grid λ-window lower end",
            window.lower,
            "0.27938814",
            "1e-6",
        ),
        Row::decimal(
            "hex thickness, γ = 1",
            yavicoli_thickness(&hex)?.lower_bound,
            "7.25137",
            "1e-3",
        ),
        Row::decimal(
            "hex thickness, γ = 0.99999",
            yavicoli_thickness(&hex_p)?.lower_bound,
            "7.25077",
            "1e-3",
        ),
        Row::decimal(
            "hex uniformity constant",
            hex_uniformity_constant(DEFAULT_PRECISION),
            "0.26243",
            "1e-4",
        ),
    ])
}

fn set_rows() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let mut push = |name: String, set: IfsSet1D, target: Exact| -> Result<()> {
        let rep = certified_thickness(&set)?;
        debug_assert_eq!(rep.tag, ThicknessTag::Stabilized);
        rows.push(Row::new(&name, Interval::point(rep.value), target, int(0)));
        Ok(())
    };
    for (n, d) in [(1, 5), (1, 4), (1, 3), (2, 5)] {
        let eps = rat(n, d);
        let target = (int(1) - &eps) / (&eps * int(2));
        push(
            format!("middle_cantor({n}/{d}) thickness"),
            IfsSet1D::middle_cantor(&eps)?,
            target,
        )?;
    }
    push(
        "off_center(3/10) thickness".into(),
        IfsSet1D::off_center(&rat(3, 10))?,
        int(1),
    )?;
    let dim = hausdorff_lower_bound(&Interval::point(int(1)), DEFAULT_PRECISION)?;
    rows.push(Row::decimal(
        "dimension bound at τ = 1",
        dim,
        "0.630929753571457",
        "1e-9",
    ));
    Ok(rows)
}

pub fn run(table: TableArg) -> Result<Artifact> {
    let (name, rows) = match table {
        TableArg::Systems => ("systems", system_rows()?),
        TableArg::Sets => ("sets", set_rows()?),
        TableArg::All => {
            let mut r = set_rows()?;
            r.extend(system_rows()?);
            ("all", r)
        }
    };
    let result: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "quantity": r.quantity,
                "computed": r.computed,
                "target": r.target_label,
                "tolerance": r.tolerance_label,
                "pass": r.pass(),
            })
        })
        .collect();
    let mut art = Artifact::new("reproduce", json!({ "table": name }), &result);
    art.table = Table::new(&["quantity", "computed", "target", "tolerance", "pass"]);
    let mut failed = 0;
    for r in &rows {
        let pass = r.pass();
        failed += usize::from(!pass);
        let mark = if pass { "pass" } else { "FAIL" };
        art.line(format!(
            "{mark}  {:<30} {} (target {}, tolerance {})",
            r.quantity,
            r.shown(),
            r.target_label,
            r.tolerance_label
        ));
        art.table.push([
            r.quantity.clone(),
            r.shown(),
            r.target_label.clone(),
            r.tolerance_label.clone(),
            pass.to_string(),
        ]);
        art.verdict(format!("{}: {mark}", r.quantity));
    }
    if failed > 0 {
        art.status = Status::HypothesisFailure;
    }
    Ok(art)
}
