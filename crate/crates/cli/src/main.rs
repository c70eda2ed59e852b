mod input;
mod output;
mod plot;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thickset_core::ballsys::{
    gap_lemma_rd_check, hex_uniformity_constant, yavicoli_thickness, BallSystem, Generator,
};
use thickset_core::cantor::{
    certified_thickness, cover, newhouse_thickness, IfsSet1D, ThicknessTag,
};
use thickset_core::patterns1d::{
    find_3ap, find_convex_combo, gap_lemma_check_1d, hausdorff_lower_bound, kap_search,
    ConfigurationWitness1D, KapVerdict,
};
use thickset_core::patterns_nd::{find_convex_combo_nd, find_triangle_nd, Mode, WitnessNd};
use thickset_core::product2d::find_triangle_in_product;
use thickset_core::report::Verdict;
use thickset_core::scalar::{
    exact_string, int, parse_exact, rat, Exact, Interval, DEFAULT_PRECISION,
};
use thickset_core::Error;

use input::{parse_set, parse_system, parse_triangle};
use output::{emit, sha256_hex, Artifact, Format, RunManifest, Status, Table};

/// Thick Cantor sets, systems of balls and the patterns they must contain.
#[derive(Parser, Debug)]
#[command(name = "thickset", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the artifact here (plus a `.manifest.json` next to it) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Cover or refinement depth; each command has its own default.
    #[arg(long, global = true)]
    depth: Option<u32>,
    /// Bits used for irrational inputs such as √3.
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION)]
    precision_bits: u32,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Standard)]
    mode: ModeArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Standard,
    Appendix,
}

impl ModeArg {
    fn core(self) -> Mode {
        match self {
            ModeArg::Standard => Mode::Standard,
            ModeArg::Appendix => Mode::Appendix,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ModeArg::Standard => "standard",
            ModeArg::Appendix => "appendix",
        }
    }
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Target {
    /// `middle_cantor:EPS`, `off_center:A`, or a JSON description (inline or file).
    #[arg(long)]
    set: Option<String>,
    /// `grid:N,RHO,D[,SEED]`, `hex[:GAMMA]`, or a JSON description.
    #[arg(long)]
    system: Option<String>,
}

enum Loaded {
    Set(IfsSet1D),
    System(BallSystem),
}

impl Target {
    fn load(&self, seed: u64) -> Result<Loaded, Error> {
        match (&self.set, &self.system) {
            (Some(s), _) => Ok(Loaded::Set(parse_set(s)?)),
            (_, Some(s)) => Ok(Loaded::System(parse_system(s, seed)?)),
            _ => Err(Error::invalid("give --set or --system")),
        }
    }

    fn describe(&self) -> Value {
        match (&self.set, &self.system) {
            (Some(s), _) => json!({ "set": s }),
            (_, Some(s)) => json!({ "system": s }),
            _ => Value::Null,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cover intervals of a set or the balls of one level of a system.
    Construct {
        #[command(flatten)]
        target: Target,
    },
    /// Newhouse thickness of a set, or a lower bound on the thickness of a system.
    Thickness {
        #[command(flatten)]
        target: Target,
    },
    /// Three-term arithmetic progression witness.
    FindAp {
        #[command(flatten)]
        target: Target,
        /// Uniform-density constant for systems; defaults to the builder's analytic value.
        #[arg(long)]
        r: Option<String>,
    },
    /// Convex-combination witness for weight λ.
    FindCombo {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        r: Option<String>,
    },
    /// Similar copy of a triangle in `C × C` (for a set) or in a planar system.
    FindTriangle {
        #[command(flatten)]
        target: Target,
        /// `equilateral`, `right`, or `x1,y1;x2,y2;x3,y3`.
        #[arg(long, default_value = "equilateral")]
        triangle: String,
        #[arg(long)]
        r: Option<String>,
    },
    /// Branch-and-prune search for k-term arithmetic progressions.
    SearchKap {
        #[arg(long)]
        set: String,
        #[arg(long)]
        k: usize,
    },
    /// Checks the hypotheses of the gap lemma for two sets or two systems.
    CertifyGapLemma {
        #[command(flatten)]
        target: Target,
        #[arg(long, conflicts_with = "other_system")]
        other_set: Option<String>,
        #[arg(long)]
        other_system: Option<String>,
        #[arg(long)]
        r: Option<String>,
    },
    /// Recomputes the reference numbers and compares them with their targets.
    Reproduce {
        #[arg(long, value_enum, default_value_t = TableArg::Systems)]
        table: TableArg,
    },
    /// SVG of a set, a system, or a saved witness.
    Plot {
        #[arg(long, conflicts_with_all = ["system", "witness"])]
        set: Option<String>,
        #[arg(long, conflicts_with = "witness")]
        system: Option<String>,
        /// JSON artifact written by a find-* command.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableArg {
    /// Ball-system numbers: grid and hexagonal builders.
    #[value(name = "section6", alias = "systems")]
    Systems,
    /// Thickness values of the one-dimensional families.
    Sets,
    All,
}

struct Ctx {
    depth: Option<u32>,
    bits: u32,
    seed: u64,
    mode: ModeArg,
}

fn exact_arg(s: &str) -> Result<Exact, Error> {
    parse_exact(s)
}

/// Smallest uniform-density constant the builder certifies analytically.
fn default_r(sys: &BallSystem, given: &Option<String>) -> Result<Exact, Error> {
    if let Some(r) = given {
        return exact_arg(r);
    }
    match sys.generator() {
        Generator::GridIfs { rho, d, .. } => Ok(rho * int(2) + d),
        Generator::HexPacking { .. } => {
            let hi = hex_uniformity_constant(DEFAULT_PRECISION).hi().clone();
            let step = rat(1, 100_000);
            Ok((hi / &step).ceil() * step)
        }
        Generator::ExplicitTree { .. } => Err(Error::invalid("explicit systems need --r")),
    }
}

fn iv_cells(iv: &Interval) -> [String; 3] {
    [
        exact_string(iv.lo()),
        exact_string(iv.hi()),
        iv.describe(12),
    ]
}

fn witness_1d(art: &mut Artifact, w: &ConfigurationWitness1D) {
    art.line(format!(
        "a = {}, c = {}, b = {}",
        w.a().describe(12),
        w.c().describe(12),
        w.b().describe(12)
    ));
    art.line(format!(
        "residual ≤ {} ({})",
        exact_string(&w.residual),
        w.convention
    ));
    if let Some(p) = &w.exact_points {
        let s: Vec<String> = p.iter().map(exact_string).collect();
        art.line(format!("exact points: {}", s.join(", ")));
    }
    art.table = Table::new(&["role", "lo", "hi", "approx", "status"]);
    for p in &w.points {
        let [lo, hi, ap] = iv_cells(&p.enclosure);
        art.table
            .push([p.role.clone(), lo, hi, ap, format!("{:?}", p.status)]);
    }
}

fn witness_nd(art: &mut Artifact, w: &WitnessNd) {
    for p in &w.points {
        let c: Vec<String> = p
            .ball
            .center
            .iter()
            .map(|x| Interval::point(x.clone()).describe(10))
            .collect();
        art.line(format!(
            "{} = ({}) ± {:.3e} at word {:?}",
            p.role,
            c.join(", "),
            thickset_core::scalar::to_f64(&p.ball.radius),
            p.word
        ));
    }
    art.line(format!(
        "residual ≤ {} ({})",
        w.residual.describe(10),
        w.convention
    ));
    if let Some(d) = w.ratio_deviation() {
        art.line(format!(
            "side-ratio deviation at centers {}",
            d.describe(10)
        ));
    }
    for c in &w.hypotheses.checks {
        art.verdict(format!("{}: {:?}", c.name, c.result));
    }
    let dim = w.points.first().map_or(0, |p| p.ball.center.len());
    let mut header = vec!["role".to_string(), "word".to_string()];
    header.extend((0..dim).map(|i| format!("center_{i}")));
    header.push("radius".into());
    art.table = Table {
        header,
        rows: Vec::new(),
    };
    for p in &w.points {
        let mut row = vec![
            p.role.clone(),
            p.word
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join("."),
        ];
        row.extend(p.ball.center.iter().map(exact_string));
        row.push(exact_string(&p.ball.radius));
        art.table.rows.push(row);
    }
}

fn run(cmd: &Command, ctx: &Ctx) -> Result<Artifact, Error> {
    match cmd {
        Command::Construct { target } => construct(target, ctx),
        Command::Thickness { target } => thickness(target, ctx),
        Command::FindAp { target, r } => combo(target, "find-ap", None, r, ctx),
        Command::FindCombo { target, lambda, r } => {
            combo(target, "find-combo", Some(exact_arg(lambda)?), r, ctx)
        }
        Command::FindTriangle {
            target,
            triangle,
            r,
        } => find_triangle(target, triangle, r, ctx),
        Command::SearchKap { set, k } => search_kap(set, *k, ctx),
        Command::CertifyGapLemma {
            target,
            other_set,
            other_system,
            r,
        } => certify(target, other_set, other_system, r, ctx),
        Command::Reproduce { table } => reproduce::run(*table),
        Command::Plot {
            set,
            system,
            witness,
        } => plot_cmd(set, system, witness, ctx),
    }
}

fn construct(target: &Target, ctx: &Ctx) -> Result<Artifact, Error> {
    let mut input = target.describe();
    match target.load(ctx.seed)? {
        Loaded::Set(set) => {
            let depth = ctx.depth.unwrap_or(3);
            if depth > 20 {
                return Err(Error::invalid("construct is limited to depth 20 for sets"));
            }
            input["depth"] = json!(depth);
            let cov = cover(&set, depth);
            let mut art = Artifact::new(
                "construct",
                input,
                json!({ "set": set, "depth": depth, "intervals": cov.intervals }),
            );
            art.line(format!(
                "{} intervals at depth {}, total length {}",
                cov.intervals.len(),
                depth,
                exact_string(&cov.total_length())
            ));
            art.table = Table::new(&["depth", "index", "lo", "hi"]);
            for (i, iv) in cov.intervals.iter().enumerate() {
                art.table.push([
                    depth.to_string(),
                    i.to_string(),
                    exact_string(iv.lo()),
                    exact_string(iv.hi()),
                ]);
            }
            Ok(art)
        }
        Loaded::System(sys) => {
            let depth = ctx.depth.unwrap_or(1);
            let k = sys.branch_count(&sys.root_node()).max(1) as f64;
            if k.powi(depth as i32) > 1e6 {
                return Err(Error::invalid(format!(
                    "level {depth} would hold more than a million balls"
                )));
            }
            input["depth"] = json!(depth);
            sys.validate(depth.min(2))?;
            let nodes = sys.level(depth);
            let mut art = Artifact::new(
                "construct",
                input,
                json!({
                    "generator": sys.generator(),
                    "norm": sys.norm(),
                    "depth": depth,
                    "designated": sys.designated(),
                    "nodes": nodes,
                }),
            );
            art.line(format!(
                "{} {} balls at depth {}, designated pair {:?}",
                nodes.len(),
                sys.norm().name(),
                depth,
                sys.designated()
            ));
            let dim = sys.dim();
            let mut header = vec!["word".to_string()];
            header.extend((0..dim).map(|i| format!("center_{i}")));
            header.push("radius".into());
            art.table = Table {
                header,
                rows: Vec::new(),
            };
            for n in &nodes {
                let mut row = vec![n
                    .word
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(".")];
                row.extend(n.ball.center.iter().map(exact_string));
                row.push(exact_string(&n.ball.radius));
                art.table.rows.push(row);
            }
            Ok(art)
        }
    }
}

fn thickness(target: &Target, ctx: &Ctx) -> Result<Artifact, Error> {
    let input = target.describe();
    match target.load(ctx.seed)? {
        Loaded::Set(set) => {
            let rep = match ctx.depth {
                Some(d) => newhouse_thickness(&set, d)?,
                None => match certified_thickness(&set) {
                    Ok(r) => r,
                    Err(_) => newhouse_thickness(
                        &set,
                        thickset_core::cantor::default_thickness_depth(&set),
                    )?,
                },
            };
            let dim = if rep.value > int(0) {
                Some(hausdorff_lower_bound(&rep.enclosure(), ctx.bits)?)
            } else {
                None
            };
            let mut art = Artifact::new(
                "thickness",
                input,
                json!({ "thickness": rep, "hausdorff_lower_bound": dim }),
            );
            art.line(format!("{} ({:?})", exact_string(&rep.value), rep.tag));
            if let Some(d) = &dim {
                art.line(format!("Hausdorff dimension ≥ {}", d.describe(10)));
            }
            art.verdict(format!("{:?}", rep.tag));
            art.table = Table::new(&["quantity", "value", "approx"]);
            art.table.push([
                "thickness".to_string(),
                exact_string(&rep.value),
                Interval::point(rep.value.clone()).describe(12),
            ]);
            art.table
                .push(["tag".to_string(), format!("{:?}", rep.tag), String::new()]);
            if let Some(d) = &dim {
                art.table.push([
                    "hausdorff_lower_bound".to_string(),
                    d.to_string(),
                    d.describe(12),
                ]);
            }
            if rep.tag == ThicknessTag::Truncated {
                art.status = Status::Undecided;
            }
            Ok(art)
        }
        Loaded::System(sys) => {
            let rep = yavicoli_thickness(&sys)?;
            let lb = &rep.lower_bound;
            let shown = if lb.is_point() {
                format!("{} = {}", exact_string(lb.lo()), lb.describe(8))
            } else {
                lb.describe(8)
            };
            let mut art = Artifact::new("thickness", input, &rep);
            art.line(format!("≥ {} ({:?})", shown, rep.tail_certificate));
            art.table = Table::new(&["word", "h_upper", "ratio_lower"]);
            for b in &rep.h_bounds {
                art.table.push([
                    format!("{:?}", b.word),
                    b.h_upper.describe(12),
                    b.ratio_lower.describe(12),
                ]);
            }
            Ok(art)
        }
    }
}

fn combo(
    target: &Target,
    name: &'static str,
    lambda: Option<Exact>,
    r: &Option<String>,
    ctx: &Ctx,
) -> Result<Artifact, Error> {
    let mut input = target.describe();
    let lam = lambda.clone().unwrap_or_else(|| rat(1, 2));
    input["lambda"] = json!(exact_string(&lam));
    match target.load(ctx.seed)? {
        Loaded::Set(set) => {
            let depth = ctx.depth.unwrap_or(20);
            input["depth"] = json!(depth);
            let w = match lambda {
                None => find_3ap(&set, depth)?,
                Some(l) => find_convex_combo(&set, &l, depth)?,
            };
            let mut art = Artifact::new(name, input, &w);
            witness_1d(&mut art, &w);
            Ok(art)
        }
        Loaded::System(sys) => {
            let depth = ctx.depth.unwrap_or(6);
            let r = default_r(&sys, r)?;
            input["depth"] = json!(depth);
            input["r"] = json!(exact_string(&r));
            input["mode"] = json!(ctx.mode.name());
            input["seed"] = json!(ctx.seed);
            let w = find_convex_combo_nd(&sys, &lam, &r, depth, ctx.mode.core(), ctx.seed)?;
            let mut art = Artifact::new(name, input, &w);
            witness_nd(&mut art, &w);
            Ok(art)
        }
    }
}

fn find_triangle(
    target: &Target,
    triangle: &str,
    r: &Option<String>,
    ctx: &Ctx,
) -> Result<Artifact, Error> {
    let t = parse_triangle(triangle, ctx.bits)?;
    let mut input = target.describe();
    input["triangle"] = json!(triangle);
    match target.load(ctx.seed)? {
        Loaded::Set(set) => {
            let depth = ctx.depth.unwrap_or(20);
            input["depth"] = json!(depth);
            let w = find_triangle_in_product(&set, &t, depth)?;
            let mut art = Artifact::new("find-triangle", input, &w);
            for (name, v) in ["x", "y", "z"].iter().zip(&w.vertices) {
                art.line(format!(
                    "{name} = ({}, {})",
                    v[0].describe(12),
                    v[1].describe(12)
                ));
            }
            art.line(format!(
                "side-ratio residual ≤ {:.3e}",
                thickset_core::scalar::to_f64(w.residual.hi())
            ));
            art.table = Table::new(&["vertex", "x_lo", "x_hi", "y_lo", "y_hi"]);
            for (name, v) in ["x", "y", "z"].iter().zip(&w.vertices) {
                art.table.push([
                    name.to_string(),
                    exact_string(v[0].lo()),
                    exact_string(v[0].hi()),
                    exact_string(v[1].lo()),
                    exact_string(v[1].hi()),
                ]);
            }
            Ok(art)
        }
        Loaded::System(sys) => {
            let depth = ctx.depth.unwrap_or(5);
            let r = default_r(&sys, r)?;
            input["depth"] = json!(depth);
            input["r"] = json!(exact_string(&r));
            input["mode"] = json!(ctx.mode.name());
            input["seed"] = json!(ctx.seed);
            let w = find_triangle_nd(&sys, &t, &r, depth, ctx.mode.core(), ctx.seed)?;
            let mut art = Artifact::new("find-triangle", input, &w);
            witness_nd(&mut art, &w);
            Ok(art)
        }
    }
}

fn search_kap(spec: &str, k: usize, ctx: &Ctx) -> Result<Artifact, Error> {
    let set = parse_set(spec)?;
    let depth = ctx.depth.unwrap_or(10);
    let cert = kap_search(&set, k, depth)?;
    let input = json!({ "set": spec, "k": k, "depth": depth });
    let mut art = Artifact::new("search-kap", input, &cert);
    art.table = Table::new(&["field", "value"]);
    match &cert.verdict {
        KapVerdict::Feasible {
            x_mid,
            y_mid,
            exact_points,
            ..
        } => {
            art.line(format!(
                "Feasible: start {}, step {}",
                Interval::point(x_mid.clone()).describe(12),
                Interval::point(y_mid.clone()).describe(12)
            ));
            if let Some(p) = exact_points {
                let s: Vec<String> = p.iter().map(exact_string).collect();
                art.line(format!("exact progression: {}", s.join(", ")));
            }
            art.table.push(["verdict", "Feasible"]);
            art.table.push(["x_mid".to_string(), exact_string(x_mid)]);
            art.table.push(["y_mid".to_string(), exact_string(y_mid)]);
            art.verdict("Feasible");
        }
        KapVerdict::InfeasibleAtDepth(d) => {
            art.line(format!("InfeasibleAtDepth({d})"));
            art.table
                .push(["verdict".to_string(), format!("InfeasibleAtDepth({d})")]);
            art.verdict(format!("InfeasibleAtDepth({d})"));
        }
        KapVerdict::Unknown(why) => {
            art.line(format!("Unknown: {why}"));
            art.table
                .push(["verdict".to_string(), format!("Unknown: {why}")]);
            art.status = Status::Undecided;
            art.verdict("Unknown");
        }
    }
    art.line(format!("explored {} nodes", cert.explored_nodes));
    art.table.push([
        "explored_nodes".to_string(),
        cert.explored_nodes.to_string(),
    ]);
    Ok(art)
}

fn verdict_status(v: &Verdict) -> Status {
    match v {
        Verdict::HypothesesHold => Status::Verdict,
        Verdict::Fail(_) => Status::HypothesisFailure,
        Verdict::Unknown(_) => Status::Undecided,
    }
}

fn certify(
    target: &Target,
    other_set: &Option<String>,
    other_system: &Option<String>,
    r: &Option<String>,
    ctx: &Ctx,
) -> Result<Artifact, Error> {
    let mut input = target.describe();
    match (target.load(ctx.seed)?, other_set, other_system) {
        (Loaded::Set(a), Some(spec), None) => {
            let b = parse_set(spec)?;
            let depth = ctx.depth.unwrap_or(8);
            input["other_set"] = json!(spec);
            input["depth"] = json!(depth);
            let rep = gap_lemma_check_1d(&a, &b, depth);
            let mut art = Artifact::new("certify-gap-lemma", input, &rep);
            art.line(format!("{:?}", rep.verdict));
            art.line(format!(
                "hulls meet: {}, interwoven: {:?}, thickness product {}",
                rep.hull_intersect,
                rep.interwoven,
                rep.thickness_product.describe(8)
            ));
            art.table = Table::new(&["check", "result", "detail"]);
            art.table.push([
                "hull_intersect".to_string(),
                rep.hull_intersect.to_string(),
                String::new(),
            ]);
            art.table.push([
                "interwoven".to_string(),
                format!("{:?}", rep.interwoven),
                String::new(),
            ]);
            art.table.push([
                "thickness_product".to_string(),
                format!("{:?}", rep.thickness_product.ge(&Interval::point(int(1)))),
                rep.thickness_product.describe(12),
            ]);
            art.status = verdict_status(&rep.verdict);
            art.verdict(format!("{:?}", rep.verdict));
            Ok(art)
        }
        (Loaded::System(a), None, Some(spec)) => {
            let b = parse_system(spec, ctx.seed)?;
            let depth = ctx.depth.unwrap_or(3);
            let r = match r {
                Some(r) => exact_arg(r)?,
                None => default_r(&a, &None)?.max(default_r(&b, &None)?),
            };
            input["other_system"] = json!(spec);
            input["depth"] = json!(depth);
            input["r"] = json!(exact_string(&r));
            let rep = gap_lemma_rd_check(&a, &b, &r, depth)?;
            let verdict = rep.verdict();
            let mut art = Artifact::new(
                "certify-gap-lemma",
                input,
                json!({ "report": rep, "verdict": verdict }),
            );
            art.line(format!("{verdict:?}"));
            art.table = Table::new(&["check", "result", "detail"]);
            for c in &rep.checks {
                art.line(format!("  {}: {:?} ({})", c.name, c.result, c.detail));
                art.table
                    .push([c.name.clone(), format!("{:?}", c.result), c.detail.clone()]);
            }
            art.status = verdict_status(&verdict);
            art.verdict(format!("{verdict:?}"));
            Ok(art)
        }
        _ => Err(Error::invalid(
            "pair --set with --other-set, or --system with --other-system",
        )),
    }
}

fn read_interval(v: &Value) -> Option<Interval> {
    let lo = parse_exact(v.get("lo")?.as_str()?).ok()?;
    let hi = parse_exact(v.get("hi")?.as_str()?).ok()?;
    Interval::new(lo, hi).ok()
}

fn read_center(v: &Value) -> Option<(f64, f64)> {
    let c = v.get("ball")?.get("center")?.as_array()?;
    let x = parse_exact(c.first()?.as_str()?).ok()?;
    let y = parse_exact(c.get(1)?.as_str()?).ok()?;
    Some((
        thickset_core::scalar::to_f64(&x),
        thickset_core::scalar::to_f64(&y),
    ))
}

fn plot_cmd(
    set: &Option<String>,
    system: &Option<String>,
    witness: &Option<PathBuf>,
    ctx: &Ctx,
) -> Result<Artifact, Error> {
    let (svg, input) = if let Some(path) = witness {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        let doc: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("malformed witness JSON: {e}")))?;
        let result = doc.get("result").cloned().unwrap_or(Value::Null);
        let source = doc.get("input").cloned().unwrap_or(Value::Null);
        let spec_set = source.get("set").and_then(Value::as_str);
        let spec_sys = source.get("system").and_then(Value::as_str);
        let points = result.get("points").and_then(Value::as_array);
        let vertices = result.get("vertices").and_then(Value::as_array);
        let svg = match (spec_set, spec_sys) {
            (Some(s), _) if vertices.is_some() => {
                let pts: Vec<(f64, f64)> = vertices
                    .into_iter()
                    .flatten()
                    .filter_map(|v| {
                        let x = read_interval(v.get(0)?)?;
                        let y = read_interval(v.get(1)?)?;
                        Some((x.to_f64_mid(), y.to_f64_mid()))
                    })
                    .collect();
                if pts.is_empty() {
                    return Err(Error::invalid("witness has no points"));
                }
                plot::product_boxes(&parse_set(s)?, ctx.depth.unwrap_or(3), &pts)
            }
            (Some(s), _) => {
                let marks: Vec<Interval> = points
                    .into_iter()
                    .flatten()
                    .filter_map(|p| read_interval(p.get("enclosure")?))
                    .collect();
                if marks.is_empty() {
                    return Err(Error::invalid("witness has no points"));
                }
                plot::set_bars(&parse_set(s)?, ctx.depth.unwrap_or(3), &marks)
            }
            (None, Some(s)) => {
                let pts: Vec<(f64, f64)> = points
                    .into_iter()
                    .flatten()
                    .filter_map(read_center)
                    .collect();
                if pts.is_empty() {
                    return Err(Error::invalid("witness has no points"));
                }
                let sys = parse_system(
                    s,
                    source
                        .get("seed")
                        .and_then(Value::as_u64)
                        .unwrap_or(ctx.seed),
                )?;
                plot::system_balls(&sys, ctx.depth.unwrap_or(1), &pts)
            }
            _ => {
                return Err(Error::invalid(
                    "unsupported artifact: no set or system recorded",
                ))
            }
        };
        (svg, json!({ "witness": path.display().to_string() }))
    } else if let Some(s) = set {
        let depth = ctx.depth.unwrap_or(2);
        (
            plot::set_bars(&parse_set(s)?, depth, &[]),
            json!({ "set": s, "depth": depth }),
        )
    } else if let Some(s) = system {
        let depth = ctx.depth.unwrap_or(1);
        if depth > 3 {
            return Err(Error::invalid("plot draws system levels up to depth 3"));
        }
        (
            plot::system_balls(&parse_system(s, ctx.seed)?, depth, &[]),
            json!({ "system": s, "depth": depth }),
        )
    } else {
        return Err(Error::invalid("plot needs --set, --system or --witness"));
    };
    let mut art = Artifact::new("plot", input, json!({ "bytes": svg.len() }));
    art.line(format!("SVG, {} bytes", svg.len()));
    art.svg = Some(svg);
    Ok(art)
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Hypothesis(_) => 2,
        Error::Unknown(_) | Error::Budget(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let ctx = Ctx {
        depth: cli.depth,
        bits: cli.precision_bits.clamp(32, 4096),
        seed: cli.seed,
        mode: cli.mode,
    };
    let start = Instant::now();
    let art = match run(&cli.command, &ctx) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("thickset: {e}");
            return ExitCode::from(error_code(&e));
        }
    };
    let format = if matches!(cli.command, Command::Plot { .. }) && cli.format == Format::Text {
        Format::Svg
    } else {
        cli.format
    };
    let text = match art.render(format) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("thickset: {msg}");
            return ExitCode::from(1);
        }
    };
    let input_sha = sha256_hex(
        format!(
            "{}\n{}",
            art.command,
            serde_json::to_string(&art.input).expect("valid JSON")
        )
        .as_bytes(),
    );
    let written = emit(&text, cli.out.as_deref(), |out_sha| {
        serde_json::to_value(RunManifest {
            schema: input::SCHEMA,
            command: art.command,
            input_sha256: input_sha,
            output_sha256: out_sha,
            seed: ctx.seed,
            depth: art
                .input
                .get("depth")
                .and_then(Value::as_u64)
                .map(|d| d as u32)
                .or(ctx.depth),
            precision_bits: ctx.bits,
            mode: ctx.mode.name(),
            wall_time_ms: start.elapsed().as_millis(),
            verdicts: &art.verdicts,
        })
        .expect("manifest serializes")
    });
    if let Err(e) = written {
        eprintln!("thickset: cannot write output: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(art.status.code() as u8)
}
