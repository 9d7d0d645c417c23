use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use kresling_airship::energy::{energy_curve, speed_grid, summarize};
use kresling_airship::geometry::{derive_segment, fold_state, Stability};
use kresling_airship::mass::{bill_of_materials, cut_plan, evaluate_design, exoskeleton_cuts, write_bom_csv};
use kresling_airship::mesh::{build_mesh, enclosed_volume};
use kresling_airship::par::Execution;
use kresling_airship::pattern::{unfold, write_svg, PatternOptions, SvgStyle};
use kresling_airship::sim::run_scenario;
use kresling_airship::sweep::run_sweep_with;
use serde::Serialize;

use crate::config::{ProjectConfig, Provenance};
use crate::error::CliError;

fn write_file(dir: &Path, name: &str, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| CliError::io(&path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, prov: &Provenance, result: &T) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        provenance: &'a Provenance,
        result: &'a T,
    }
    let text = serde_json::to_string_pretty(&Doc { provenance: prov, result })
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    write_file(dir, name, |w| writeln!(w, "{text}"))
}

fn prepare(cfg: &ProjectConfig, command: &str) -> Result<Provenance, CliError> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
    Provenance::new(command, cfg)
}

pub fn eval(cfg: &ProjectConfig, require_feasible: bool) -> Result<(), CliError> {
    let d = &cfg.design;
    let e = evaluate_design(d, d.sides, d.segments, d.lambda)?;
    let prov = prepare(cfg, "eval")?;
    let name = format!("eval_n{}_m{}_l{}.json", e.params.sides, e.params.segments, e.params.lambda);
    write_json(&cfg.output_dir, &name, &prov, &e)?;

    let f = e.mass.fractions();
    println!("configuration      n = {}, m = {}, lambda = {}", e.params.sides, e.params.segments, e.params.lambda);
    println!("deployed height    {:.1} mm (bound {:.0} mm)", e.deployed_height_mm, d.unfolded_height_mm);
    println!("volume             {:.4} m3 deployed, {:.5} m3 folded", e.volume_deployed_m3, e.volume_folded_m3);
    println!("tube length        {:.0} mm", e.tube_length_mm);
    println!("envelope surface   {:.3} m2", e.envelope_surface_m2);
    println!("lift               {:.1} g", e.lift_g);
    println!("total mass         {:.1} g (calibration {:+.2} g)", e.mass.total_g, e.mass.calibration_g);
    println!(
        "fractions          envelope {:.1}%, exoskeleton {:.1}%, mechatronics {:.1}%, battery {:.1}%",
        f.envelope * 100.0,
        f.exoskeleton * 100.0,
        f.mechatronics * 100.0,
        f.battery * 100.0
    );
    println!("extra payload      {:.1} g", e.extra_payload_g);
    println!("feasible           {}", e.feasible);
    if require_feasible && !e.feasible {
        return Err(CliError::Infeasible(format!("extra payload {:.1} g", e.extra_payload_g)));
    }
    Ok(())
}

pub fn sweep(cfg: &ProjectConfig, workers: usize, require_feasible: bool) -> Result<(), CliError> {
    let prov = prepare(cfg, "sweep")?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let result = pool.install(|| run_sweep_with(&cfg.design, &cfg.sweep, Execution::Parallel))?;
    let header = prov.lines();
    write_file(&cfg.output_dir, "sweep.csv", |w| result.write_csv(w, &header))?;
    write_file(&cfg.output_dir, "sweep_feasibility.csv", |w| result.write_feasibility_map(w, &header))?;
    let summary = result.summary();
    write_json(&cfg.output_dir, "sweep_summary.json", &prov, &summary)?;

    println!("evaluated {} configurations, {} feasible", summary.evaluated, summary.feasible);
    for r in summary.ranking.iter().take(5) {
        println!(
            "  (n {}, m {}) x{} lambda [{}, {}] best payload {:.1} g",
            r.n, r.m, r.count, r.lambda_min, r.lambda_max, r.best_payload_g
        );
    }
    if require_feasible && summary.feasible == 0 {
        return Err(CliError::Infeasible("no feasible configuration".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct MeshReport {
    alpha_deg: f64,
    height_mm: f64,
    volume_m3: f64,
    vertices: usize,
    triangles: usize,
}

pub fn pattern(cfg: &ProjectConfig, alpha_deg: Option<f64>) -> Result<(), CliError> {
    let d = &cfg.design;
    let params = d.kresling(d.sides, d.segments, d.lambda)?;
    let geom = derive_segment(&params, Stability::Any)?;
    let prov = prepare(cfg, "pattern")?;
    let header = prov.lines();

    let pattern = unfold(&params, &PatternOptions::from(d))?;
    write_file(&cfg.output_dir, "pattern.svg", |w| {
        write_svg(&pattern, &SvgStyle::default(), w, &header)
    })?;

    let states = match alpha_deg {
        Some(a) => vec![("mesh.obj", a.to_radians())],
        None => vec![
            ("mesh_deployed.obj", geom.alpha_deployed),
            ("mesh_folded.obj", geom.alpha_folded),
        ],
    };
    let mut reports = Vec::new();
    for (name, alpha) in states {
        let state = fold_state(&geom, &params, alpha)?;
        let mesh = build_mesh(&params, alpha)?;
        let volume = enclosed_volume(&mesh)?;
        write_file(&cfg.output_dir, name, |w| mesh.write_obj(w, &header))?;
        println!(
            "alpha {:.3} deg: height {:.1} mm, volume {:.5} m3",
            alpha.to_degrees(),
            f64::from(params.segments) * state.height,
            volume
        );
        reports.push(MeshReport {
            alpha_deg: alpha.to_degrees(),
            height_mm: f64::from(params.segments) * state.height,
            volume_m3: volume,
            vertices: mesh.vertices.len(),
            triangles: mesh.triangles.len(),
        });
    }
    if let [dep, fold] = reports.as_slice() {
        println!("expansion ratio {:.2}", dep.volume_m3 / fold.volume_m3);
    }
    println!(
        "pattern: {} panels, {} creases, strip length {:.1} mm, sheet {:.1} x {:.1} mm",
        pattern.panels.len(),
        pattern.creases.len(),
        pattern.strip_length_mm,
        pattern.width_mm,
        pattern.height_mm
    );
    write_json(&cfg.output_dir, "pattern_summary.json", &prov, &reports)
}

pub fn bom(cfg: &ProjectConfig) -> Result<(), CliError> {
    let d = &cfg.design;
    let e = evaluate_design(d, d.sides, d.segments, d.lambda)?;
    let geom = derive_segment(&e.params, Stability::Any)?;
    let prov = prepare(cfg, "bom")?;
    let header = prov.lines();
    let lines = bill_of_materials(d, &e);
    write_file(&cfg.output_dir, "bom.csv", |w| write_bom_csv(w, &header, &lines))?;
    let plan = cut_plan(&exoskeleton_cuts(&geom, e.params.sides, e.params.segments), d.raw_tube_length_mm)?;
    write_file(&cfg.output_dir, "cut_plan.txt", |w| plan.write_text(w, &header))?;
    println!(
        "tube length {:.0} mm, {} stock bars of {:.0} mm, waste {:.0} mm",
        e.tube_length_mm,
        plan.bars.len(),
        plan.stock_mm,
        plan.total_waste_mm()
    );
    println!("total mass {:.1} g", e.mass.total_g);
    Ok(())
}

pub fn energy(cfg: &ProjectConfig) -> Result<(), CliError> {
    let g = &cfg.energy_grid;
    let grid = speed_grid(g.start_m_s, g.stop_m_s, g.step_m_s);
    let curve = energy_curve(&grid, &cfg.power, Execution::Parallel)?;
    let summary = summarize(&curve, &cfg.power)?;
    let prov = prepare(cfg, "energy")?;
    write_file(&cfg.output_dir, "energy_curve.csv", |w| curve.write_csv(w, &prov.lines()))?;
    write_json(&cfg.output_dir, "energy_summary.json", &prov, &summary)?;
    match (summary.min_feasible_speed_m_s, summary.duration_at_min_speed_min) {
        (Some(v), Some(t)) => println!("minimum feasible speed {v:.4} m/s, duration {t:.1} min"),
        _ => println!("no feasible cruise speed on the grid"),
    }
    if let (Some(v), Some(e)) = (summary.optimum_speed_m_s, summary.optimum_energy_wh) {
        println!("least energy {e:.2} Wh at {v:.3} m/s");
    }
    Ok(())
}

pub fn simulate(cfg: &ProjectConfig, stride: usize) -> Result<(), CliError> {
    let log = run_scenario(&cfg.scenario, &cfg.plant, &cfg.controller, &cfg.power)?;
    let prov = prepare(cfg, "simulate")?;
    let header = prov.lines();
    write_file(&cfg.output_dir, "trajectory.csv", |w| log.write_trajectory_csv(w, &header, stride))?;
    write_file(&cfg.output_dir, "forces.csv", |w| log.write_force_csv(w, &header))?;
    write_json(&cfg.output_dir, "sim_summary.json", &prov, &log.summary)?;
    for m in &log.summary.phases {
        println!(
            "phase {} {}: target {:.3}, final {:.4}, steady error {:.2e}, cruise {}",
            m.phase,
            m.axis,
            m.target,
            m.final_position,
            m.steady_state_error,
            m.cruise_speed.map_or("-".to_owned(), |v| format!("{v:.4} m/s"))
        );
    }
    println!("energy {:.3} Wh", log.summary.total_energy_wh);
    Ok(())
}

pub fn init_config(path: &Path, force: bool) -> Result<(), CliError> {
    if path.exists() && !force {
        return Err(CliError::Usage(format!("{} exists; pass --force to overwrite", path.display())));
    }
    let text = ProjectConfig::default().to_toml()?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}
