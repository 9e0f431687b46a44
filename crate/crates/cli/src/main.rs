//! `unlock`: reproduce the constants, run the verifications, sweep the δ-process,
//! certify rigidity and export geometry.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use unlock_core::balls::{
    fcc_config, hcp_config, icosahedron_directions, kissing_count_at_max, max_common_radius, verify_unlock,
    BallCluster, BallMove, MoveKind, Verdict,
};
use unlock_core::cex::{geometric_grid, probe_analytic_paths, probe_beak, random_paths, ProbeVerdict};
use unlock_core::cylinders::{
    c6_config, common_radius, contact_graph, is_pure_geodetic, o6_config, CylinderConfig, Rational,
};
use unlock_core::geom3::{Solid, TangentLine};
use unlock_core::io::{
    balls_mesh, config_to_json, cylinders_mesh, load_config, sig12, write_string, ConfigFile, Loaded,
};
use unlock_core::platonic_sweep::{find_t0, id_zeros, maximize, radius_curve, zeros_of, DualPair};
use unlock_core::rigidity::rigidity_report;
use unlock_core::unlockd3::{find_cm, gamma_curve, geodetic_scan, r_m};
use unlock_core::Radius;

const PRIOR_RECORD_RADIUS: f64 = 1.049659;
const GEODETIC_QMAX: i64 = 1000;
const GEODETIC_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "unlock", version, about = "Kissing balls and cylinders around the unit sphere")]
struct Cli {
    /// Seed for every stochastic search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recompute the headline constants and compare with their reference values.
    Constants,
    /// Ball clusters.
    Balls {
        #[command(subcommand)]
        action: BallsAction,
    },
    /// Cylinder configurations.
    Cyl {
        #[command(subcommand)]
        action: CylAction,
    },
    /// The δ-process over a dual pair of Platonic solids.
    Sweep(SweepArgs),
    /// Second-order rigidity certificate.
    Rigidity {
        #[command(flatten)]
        source: CylSource,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probes of the C∞ counterexample.
    Cex {
        #[command(subcommand)]
        action: CexAction,
    },
    /// Write a configuration as OBJ mesh or JSON document.
    Export {
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        builtin: Option<Builtin>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "obj")]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum BallsAction {
    /// Sample an unlocking move and check that the clusters separate.
    Verify {
        #[arg(long, value_parser = parse_move)]
        cluster: MoveKind,
        #[arg(long, default_value_t = 0.3)]
        tmax: f64,
        #[arg(long, default_value_t = 256)]
        steps: usize,
    },
    /// Largest common radius of balls centred on the vertex directions of a solid.
    Blowup {
        #[arg(long, value_enum, default_value = "icosahedron")]
        solid: SolidArg,
    },
}

#[derive(Subcommand)]
enum CylAction {
    /// Common radius, contact graph and pure-geodetic angle scan.
    Radius {
        #[command(flatten)]
        source: CylSource,
    },
    /// Trace the optimal curve of the D3 family and locate the record point.
    Gamma {
        #[arg(long, default_value_t = 64)]
        phi_steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct SweepArgs {
    #[command(subcommand)]
    action: Option<SweepAction>,
    #[arg(long, value_parser = parse_pair)]
    pair: Option<DualPair>,
    #[arg(long, default_value_t = 512)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SweepAction {
    /// Maximizer of r(δ).
    Maximize {
        #[arg(long, value_parser = parse_pair)]
        pair: DualPair,
    },
    /// Interior zeros of r(δ) and the intersection pattern at each.
    Zeros {
        #[arg(long, value_parser = parse_pair, default_value = "id")]
        pair: DualPair,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CexAction {
    /// Check random analytic paths and the beak spine.
    Probe {
        #[arg(long, default_value_t = 100)]
        paths: usize,
        #[arg(long, default_value_t = 4)]
        degree: usize,
    },
}

#[derive(Args)]
struct CylSource {
    #[arg(long, value_enum, conflicts_with = "input", required_unless_present = "input")]
    builtin: Option<CylBuiltin>,
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CylBuiltin {
    C6,
    O6,
    Cm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    C6,
    O6,
    Cm,
    Fcc,
    Hcp,
    Icosahedron,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Obj,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolidArg {
    Tetrahedron,
    Cube,
    Octahedron,
    Icosahedron,
    Dodecahedron,
}

impl From<SolidArg> for Solid {
    fn from(s: SolidArg) -> Solid {
        match s {
            SolidArg::Tetrahedron => Solid::Tetrahedron,
            SolidArg::Cube => Solid::Cube,
            SolidArg::Octahedron => Solid::Octahedron,
            SolidArg::Icosahedron => Solid::Icosahedron,
            SolidArg::Dodecahedron => Solid::Dodecahedron,
        }
    }
}

fn parse_move(s: &str) -> Result<MoveKind, String> {
    s.parse()
}

fn parse_pair(s: &str) -> Result<DualPair, String> {
    s.parse().map_err(|e: unlock_core::platonic_sweep::SweepError| e.to_string())
}

type Failure = Box<dyn std::error::Error>;

/// What a command printed, plus whether its verification passed.
#[derive(Serialize)]
struct RunReport {
    command: String,
    seed: u64,
    inputs: Value,
    values: Value,
    verdict: Option<String>,
    wall_clock_s: f64,
    #[serde(skip)]
    passed: bool,
}

fn report(inputs: Value, values: Value, verdict: Option<(&str, bool)>) -> RunReport {
    RunReport {
        command: String::new(),
        seed: 0,
        inputs,
        values,
        verdict: verdict.map(|v| v.0.to_string()),
        wall_clock_s: 0.0,
        passed: verdict.is_none_or(|v| v.1),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let start = Instant::now();
    let echo: Vec<String> = std::env::args().skip(1).collect();
    match run(&cli) {
        Ok(mut r) => {
            r.command = echo.join(" ");
            r.seed = cli.seed;
            r.wall_clock_s = start.elapsed().as_secs_f64();
            println!("{}", serde_json::to_string_pretty(&r).expect("serializable report"));
            if r.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<RunReport, Failure> {
    match &cli.command {
        Command::Constants => cmd_constants(),
        Command::Balls { action: BallsAction::Verify { cluster, tmax, steps } } => {
            cmd_verify_balls(*cluster, *tmax, *steps)
        }
        Command::Balls { action: BallsAction::Blowup { solid } } => cmd_blowup((*solid).into()),
        Command::Cyl { action: CylAction::Radius { source } } => cmd_radius(source),
        Command::Cyl { action: CylAction::Gamma { phi_steps, out } } => cmd_gamma(*phi_steps, out.as_deref()),
        Command::Sweep(args) => match &args.action {
            Some(SweepAction::Maximize { pair }) => cmd_maximize(*pair),
            Some(SweepAction::Zeros { pair, out }) => cmd_zeros(*pair, out.as_deref()),
            None => {
                let pair = args.pair.ok_or("sweep needs --pair tt|oc|id")?;
                cmd_sweep(pair, args.samples, args.out.as_deref())
            }
        },
        Command::Rigidity { source, out } => cmd_rigidity(source, out.as_deref(), cli.seed),
        Command::Cex { action: CexAction::Probe { paths, degree } } => cmd_cex(*paths, *degree, cli.seed),
        Command::Export { builtin, input, format, out } => cmd_export(*builtin, input.as_deref(), *format, out),
    }
}

fn row(name: &str, computed: f64, target: f64, tol: f64) -> (Value, bool) {
    let dev = (computed - target).abs();
    let ok = dev < tol;
    (
        json!({ "quantity": name, "computed": computed, "target": target, "deviation": dev, "tolerance": tol, "ok": ok }),
        ok,
    )
}

fn cmd_constants() -> Result<RunReport, Failure> {
    let blowup = max_common_radius(&icosahedron_directions())?.as_f64();
    let cm = find_cm()?;
    let (tt_d, tt_r) = maximize(DualPair::TT);
    let (oc_d, oc_r) = maximize(DualPair::OC);
    let (id_d, id_r) = maximize(DualPair::ID);
    let t0 = find_t0()?;
    let oc_d_exact = (3.0_f64.powf(0.25) / 2.0_f64.sqrt()).atan();
    let oc_r_exact = (3.0_f64.sqrt() - 1.0) / (1.0 + 2.0 * 2.0_f64.sqrt() - 3.0_f64.sqrt());
    let rows = [
        row("icosahedral blow-up radius", blowup, 1.10851, 1e-5),
        row("r_m", cm.radius, r_m(), 1e-9),
        row("r_m - 1.049659 (must be > 0)", cm.radius - PRIOR_RECORD_RADIUS, 0.0, f64::INFINITY),
        row("TT delta*", tt_d, FRAC_PI_4, 1e-8),
        row("TT r*", tt_r, 1.0, 1e-8),
        row("OC delta*", oc_d, oc_d_exact, 1e-8),
        row("OC r*", oc_r, oc_r_exact, 1e-8),
        row("ID delta*", id_d, 0.694707, 1e-5),
        row("ID r*", id_r, 0.115558, 1e-5),
        row("t0", t0, 0.694356, 1e-6),
        row("tan^2(ID delta*) - t0", id_d.tan().powi(2) - t0, 0.0, 1e-6),
    ];
    let ok = rows.iter().all(|r| r.1) && cm.radius > PRIOR_RECORD_RADIUS;
    for (v, _) in &rows {
        eprintln!(
            "{:<32} {:>20} target {:>20} |Δ| {:.2e}",
            v["quantity"].as_str().unwrap_or(""),
            sig12(v["computed"].as_f64().unwrap_or(f64::NAN)),
            sig12(v["target"].as_f64().unwrap_or(f64::NAN)),
            v["deviation"].as_f64().unwrap_or(f64::NAN)
        );
    }
    let values = json!({ "rows": rows.iter().map(|r| r.0.clone()).collect::<Vec<_>>(), "cm": cm });
    Ok(report(json!({}), values, Some((if ok { "PASS" } else { "FAIL" }, ok))))
}

fn cmd_verify_balls(kind: MoveKind, t_max: f64, steps: usize) -> Result<RunReport, Failure> {
    if !(t_max > 0.0) || steps == 0 {
        return Err("--tmax must be positive and --steps at least 1".into());
    }
    let r = verify_unlock(BallMove::new(kind), t_max, steps);
    let min_gap = r.samples.iter().map(|s| s.gap).fold(f64::INFINITY, f64::min);
    let pass = r.verdict == Verdict::Pass;
    let values = json!({ "min_gap": min_gap, "first_failure": r.first_failure, "samples": r.samples.len() });
    Ok(report(
        json!({ "cluster": kind, "tmax": t_max, "steps": steps }),
        values,
        Some((if pass { "PASS" } else { "FAIL" }, pass)),
    ))
}

fn cmd_blowup(solid: Solid) -> Result<RunReport, Failure> {
    let dirs = solid.vertices();
    let r = max_common_radius(&dirs)?;
    let kisses = kissing_count_at_max(&dirs)?;
    Ok(report(json!({ "solid": solid }), json!({ "radius": r.finite(), "kissing_pairs": kisses }), None))
}

fn load_cylinders(source: &CylSource) -> Result<(String, CylinderConfig), Failure> {
    match (source.builtin, &source.input) {
        (Some(CylBuiltin::C6), _) => Ok(("c6".into(), c6_config())),
        (Some(CylBuiltin::O6), _) => Ok(("o6".into(), o6_config())),
        (Some(CylBuiltin::Cm), _) => Ok(("cm".into(), find_cm()?.config())),
        (None, Some(p)) => match load_config(p)? {
            Loaded::Cylinders(c) => Ok((p.display().to_string(), c)),
            Loaded::Balls(_) => Err(format!("{} holds a ball cluster, expected cylinders", p.display()).into()),
        },
        (None, None) => Err("give --builtin or --input".into()),
    }
}

fn distinct(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    xs
}

fn geodetic_set(angles: Vec<f64>) -> Vec<Value> {
    distinct(angles)
        .into_iter()
        .map(|a| {
            let r: Option<Rational> = is_pure_geodetic(a, GEODETIC_QMAX, GEODETIC_TOL);
            json!({ "angle": a, "sin2": a.sin().powi(2), "rational": r.map(|r| r.to_string()) })
        })
        .collect()
}

/// Heading of the generatrix measured from local north at its tangent point.
fn heading(g: &TangentLine) -> Option<f64> {
    let u = g.tangent_point().get();
    let north = unlock_core::geom3::Vec3::new(-u.x * u.z, -u.y * u.z, 1.0 - u.z * u.z);
    let n = north.norm();
    if n < 1e-9 {
        return None;
    }
    let north = north / n;
    let east = north.cross(u);
    let t = g.direction().get();
    Some(t.dot(east).atan2(t.dot(north)).abs())
}

fn cmd_radius(source: &CylSource) -> Result<RunReport, Failure> {
    let (name, c) = load_cylinders(source)?;
    let r = common_radius(&c);
    let graph = contact_graph(&c, 1e-9);
    let pts: Vec<_> = c.lines().iter().map(|g| g.tangent_point()).collect();
    let colat = pts.iter().map(|u| u.get().z.clamp(-1.0, 1.0).acos()).collect();
    let mut pair_angles = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            pair_angles.push(pts[i].dot(pts[j]).clamp(-1.0, 1.0).acos());
        }
    }
    let headings = c.lines().iter().filter_map(heading).collect();
    let mut values = json!({
        "radius": match r { Radius::Finite(x) => json!(x), Radius::Unbounded => json!("unbounded") },
        "contacts": graph.pairs,
        "degrees": graph.degrees(),
        "geodetic": {
            "tangent_point_colatitudes": geodetic_set(colat),
            "tangent_point_distances": geodetic_set(pair_angles),
            "direction_headings": geodetic_set(headings),
        }
    });
    if matches!(source.builtin, Some(CylBuiltin::Cm)) {
        let cm = find_cm()?;
        values["parameters"] = json!(cm.params);
        values["parameter_scan"] = json!(geodetic_scan(cm.params, GEODETIC_QMAX, GEODETIC_TOL));
    }
    Ok(report(json!({ "config": name }), values, None))
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|&x| sig12(x)))?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_gamma(steps: usize, out: Option<&Path>) -> Result<RunReport, Failure> {
    if steps < 2 {
        return Err("--phi-steps must be at least 2".into());
    }
    let curve = gamma_curve(steps)?;
    if let Some(p) = out {
        write_csv(
            p,
            &["phi", "kappa", "delta", "r"],
            curve.iter().map(|g| vec![g.phi, g.kappa_star, g.delta_star, g.r_star]),
        )?;
    }
    let cm = find_cm()?;
    let grid_best = curve.iter().max_by(|a, b| a.r_star.total_cmp(&b.r_star)).map(|g| json!(g));
    let dev = (cm.radius - r_m()).abs();
    let values = json!({ "grid_best": grid_best, "cm": cm, "target": r_m(), "deviation": dev });
    let ok = dev < 1e-9;
    Ok(report(
        json!({ "phi_steps": steps, "out": out.map(|p| p.display().to_string()) }),
        values,
        Some((if ok { "PASS" } else { "FAIL" }, ok)),
    ))
}

fn cmd_sweep(pair: DualPair, samples: usize, out: Option<&Path>) -> Result<RunReport, Failure> {
    if samples < 2 {
        return Err("--samples must be at least 2".into());
    }
    let curve = radius_curve(pair, samples);
    if let Some(p) = out {
        write_csv(p, &["delta", "r"], curve.samples.iter().map(|&(d, r)| vec![d, r]))?;
    }
    let (d, r) = curve.max();
    Ok(report(
        json!({ "pair": pair, "samples": samples, "out": out.map(|p| p.display().to_string()) }),
        json!({ "grid_max": { "delta": d, "r": r } }),
        None,
    ))
}

fn cmd_maximize(pair: DualPair) -> Result<RunReport, Failure> {
    let (d, r) = maximize(pair);
    Ok(report(
        json!({ "pair": pair }),
        json!({ "delta_star": d, "r_star": r, "tan2_delta_star": d.tan().powi(2) }),
        None,
    ))
}

fn cmd_zeros(pair: DualPair, out: Option<&Path>) -> Result<RunReport, Failure> {
    let zeros = if pair == DualPair::ID { id_zeros(1e-9) } else { zeros_of(pair, 1e-9) };
    let doc = json!({ "zeros": zeros });
    if let Some(p) = out {
        write_string(p, &serde_json::to_string_pretty(&doc)?)?;
    }
    Ok(report(json!({ "pair": pair }), doc, None))
}

fn cmd_rigidity(source: &CylSource, out: Option<&Path>, seed: u64) -> Result<RunReport, Failure> {
    let (name, c) = load_cylinders(source)?;
    let rep = rigidity_report(&c, seed)?;
    if let Some(p) = out {
        write_string(p, &serde_json::to_string_pretty(&rep)?)?;
    }
    let values = json!({
        "verdict": rep.verdict().to_string(),
        "reason": rep.certificate.reason,
        "generatrix_verdict": rep.generatrix.verdict.to_string(),
        "active_pairs": rep.certificate.active_pairs.len(),
        "dependencies": rep.certificate.dependencies.len(),
        "dim_e": rep.certificate.dim_e,
    });
    Ok(report(json!({ "config": name, "out": out.map(|p| p.display().to_string()) }), values, None))
}

fn cmd_cex(n: usize, degree: usize, seed: u64) -> Result<RunReport, Failure> {
    if degree == 0 {
        return Err("--degree must be at least 1".into());
    }
    let paths = random_paths(n, degree, seed);
    let probes = probe_analytic_paths(&paths, &geometric_grid(1e-6, 1.0, 400));
    let x_grid: Vec<f64> = geometric_grid(1e-5, 0.5, 60).into_iter().rev().collect();
    let beak = probe_beak(&x_grid);
    let min_u = probes.paths.iter().map(|p| p.verified_u).fold(f64::INFINITY, f64::min);
    let pass = probes.verdict == ProbeVerdict::Pass && beak.verdict == ProbeVerdict::Pass && beak.negative_near_origin;
    let values = json!({
        "paths_verdict": probes.verdict,
        "min_verified_u": min_u,
        "beak_verdict": beak.verdict,
        "min_positive_distance": beak.min_positive_distance,
    });
    Ok(report(json!({ "paths": n, "degree": degree }), values, Some((if pass { "PASS" } else { "FAIL" }, pass))))
}

fn cmd_export(
    builtin: Option<Builtin>,
    input: Option<&Path>,
    format: Format,
    out: &Path,
) -> Result<RunReport, Failure> {
    let loaded = match (builtin, input) {
        (Some(Builtin::C6), _) => Loaded::Cylinders(c6_config()),
        (Some(Builtin::O6), _) => Loaded::Cylinders(o6_config()),
        (Some(Builtin::Cm), _) => Loaded::Cylinders(find_cm()?.config()),
        (Some(Builtin::Fcc), _) => Loaded::Balls(fcc_config()),
        (Some(Builtin::Hcp), _) => Loaded::Balls(hcp_config()),
        (Some(Builtin::Icosahedron), _) => {
            let dirs = icosahedron_directions();
            let r = max_common_radius(&dirs)?.as_f64();
            Loaded::Balls(BallCluster::new(dirs, r)?)
        }
        (None, Some(p)) => load_config(p)?,
        (None, None) => return Err("give --builtin or --input".into()),
    };
    let text = match (&loaded, format) {
        (Loaded::Cylinders(c), Format::Json) => config_to_json(&ConfigFile::from_cylinders(c)),
        (Loaded::Balls(b), Format::Json) => config_to_json(&ConfigFile::from_balls(b)),
        (Loaded::Cylinders(c), Format::Obj) => {
            let r = common_radius(c).finite().ok_or("unbounded radius: no cylinders to draw")?;
            cylinders_mesh(c, r).to_obj()
        }
        (Loaded::Balls(b), Format::Obj) => balls_mesh(b).to_obj(),
    };
    write_string(out, &text)?;
    let (kind, n) = match &loaded {
        Loaded::Cylinders(c) => ("cylinders", c.len()),
        Loaded::Balls(b) => ("balls", b.len()),
    };
    Ok(report(
        json!({ "out": out.display().to_string(), "format": match format { Format::Obj => "obj", Format::Json => "json" } }),
        json!({ "kind": kind, "bodies": n }),
        None,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn headings_of_c6_are_zero() {
        for g in c6_config().lines() {
            assert!(heading(g).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn distinct_merges_near_duplicates() {
        assert_eq!(distinct(vec![0.3, 0.1, 0.1 + 1e-12, 0.2]), vec![0.1, 0.2, 0.3]);
    }
}
