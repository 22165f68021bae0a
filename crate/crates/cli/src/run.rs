//! The four subcommands. Each builds its tables in memory first (so tests can
//! inspect them) and then writes them under the configured output directory.

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use qwsearch::search::{default_gamma_window, TimeCeiling};
use qwsearch::spectral::laplacian_spectrum;
use qwsearch::{
    cartesian_power, complete_graph, critical_points, interior_measure_profile, kolmogorov_measure,
    overlaps_direct, path_graph, Criterion, Error, Evolver, GammaCriticalPoints, GammaGrid,
    Graph64, Green64, GreenFunction, Laplacian, Laplacian64, OptimizeSettings, Optimum64,
    Overlaps64, SearchHamiltonian,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Figure, GraphSpec};
use crate::error::CliError;
use crate::output::{col, write_file, Cell, DataTable};

/// Tolerance for re-deriving a reported value along an independent route.
pub const CROSS_CHECK_TOL: f64 = 1e-8;

/// A graph, its Laplacian and the Green function at the target, built once.
pub struct Instance {
    pub spec: GraphSpec,
    pub target: usize,
    pub graph: Graph64,
    pub laplacian: Laplacian64,
    pub green: Green64,
}

impl Instance {
    pub fn build(spec: GraphSpec, target: usize) -> Result<Self, CliError> {
        let ctx = format!("building {spec:?}");
        let (graph, laplacian) = match spec {
            GraphSpec::PathPower { p, d } => {
                let pw = cartesian_power(&path_graph(p).map_err(CliError::core(&ctx))?, d)
                    .map_err(CliError::core(&ctx))?;
                (pw.graph, pw.laplacian)
            }
            GraphSpec::Complete { n } => {
                let g = complete_graph(n).map_err(CliError::core(&ctx))?;
                let lap = Laplacian::new(&g).map_err(CliError::core(&ctx))?;
                (g, lap)
            }
        };
        let green = GreenFunction::new(&laplacian, target).map_err(CliError::core(&ctx))?;
        Ok(Instance {
            spec,
            target,
            graph,
            laplacian,
            green,
        })
    }

    pub fn hamiltonian(&self, gamma: f64) -> Result<SearchHamiltonian<'_, f64>, CliError> {
        SearchHamiltonian::new(&self.laplacian, gamma, self.target)
            .map_err(CliError::core(format!("H at gamma = {gamma}")))
    }

    /// `√(μ(w)/vol)` from the closed-form measure rather than the solver's.
    pub fn sqrt_mu_over_vol_formula(&self) -> f64 {
        match self.spec {
            GraphSpec::PathPower { p, d } => {
                let inner = 1.0 / (1.0 - p);
                let mu_w: f64 = self
                    .graph
                    .coordinates(self.target)
                    .iter()
                    .map(|&x| if x == 0 || x == 3 { 1.0 } else { inner })
                    .product();
                (mu_w / (2.0 + 2.0 * inner).powi(d as i32)).sqrt()
            }
            GraphSpec::Complete { n } => (1.0 / n as f64).sqrt(),
        }
    }
}

fn check(what: &str, reported: f64, fresh: f64, tol: f64) -> Result<(), CliError> {
    if (reported - fresh).abs() <= tol * reported.abs().max(1.0) {
        Ok(())
    } else {
        Err(CliError::CrossCheck {
            what: what.to_string(),
            detail: format!("reported {reported:e}, recomputed {fresh:e}"),
        })
    }
}

/// Tables and loose files produced by a run.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub tables: Vec<(DataTable, bool)>,
    pub files: Vec<(String, String)>,
    pub diagnostics: Vec<String>,
}

impl RunOutput {
    pub fn table(&self, name: &str) -> Option<&DataTable> {
        self.tables.iter().map(|(t, _)| t).find(|t| t.name == name)
    }

    pub fn write(&self, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
        let mut written = Vec::new();
        for (t, schema) in &self.tables {
            written.extend(t.write(&cfg.out_dir, cfg.format, *schema)?);
        }
        for (name, contents) in &self.files {
            written.push(write_file(&cfg.out_dir, name, contents)?);
        }
        Ok(written)
    }
}

fn scan_critical(
    cfg: &ExperimentConfig,
    inst: &Instance,
) -> Result<GammaCriticalPoints<f64>, CliError> {
    let (lo, hi, points) = cfg.critical;
    let grid = GammaGrid::new(lo, hi, points).map_err(CliError::core("critical coupling grid"))?;
    critical_points(&inst.green, &grid).map_err(CliError::core("critical coupling scan"))
}

fn optimize_settings(cfg: &ExperimentConfig) -> OptimizeSettings<f64> {
    let d = OptimizeSettings::default();
    OptimizeSettings {
        gamma_range: cfg.sweep.gamma_range,
        gamma_points: cfg.sweep.gamma_points.unwrap_or(d.gamma_points),
        t_points: cfg.sweep.t_points.unwrap_or(d.t_points),
        ..d
    }
}

fn gamma_window(cfg: &ExperimentConfig, inst: &Instance) -> Result<(f64, f64), CliError> {
    match cfg.sweep.gamma_range {
        Some(r) => Ok(r),
        None => default_gamma_window(&inst.green).map_err(CliError::core("default gamma window")),
    }
}

/// A critical coupling re-derived from a dense eigendecomposition.
fn verify_root(inst: &Instance, which: Criterion, gamma: f64) -> Result<(), CliError> {
    let h = inst.hamiltonian(gamma)?;
    let direct = overlaps_direct(&h).map_err(CliError::core(format!(
        "overlaps at gamma_{}",
        which.name()
    )))?;
    let what = format!("gamma_{} = {gamma}", which.name());
    check(&what, 0.0, which.eval(&direct), CROSS_CHECK_TOL)?;
    let green = inst
        .green
        .secular(gamma)
        .low_overlaps()
        .map_err(CliError::core(format!(
            "secular overlaps at gamma_{}",
            which.name()
        )))?;
    check(&what, 0.0, green.max_abs_diff(&direct), CROSS_CHECK_TOL)
}

/// The optimum plus `E_0`, `E_1` at `γ_opt` from a dense eigensolve, with the
/// success probability at `t_opt` re-evaluated along that route.
pub struct VerifiedOptimum {
    pub optimum: Optimum64,
    pub e0: f64,
    pub e1: f64,
}

fn optimize_verified(cfg: &ExperimentConfig, inst: &Instance) -> Result<VerifiedOptimum, CliError> {
    let optimum = qwsearch::optimize_search(&inst.green, &optimize_settings(cfg))
        .map_err(CliError::core("optimizing (t, gamma)"))?;
    let h = inst.hamiltonian(optimum.gamma_opt)?;
    let ev = Evolver::new(&h).map_err(CliError::core("dense spectrum at gamma_opt"))?;
    let energies = &ev.spectrum().eigenvalues;
    let (e0, e1) = (energies[0], energies[1]);
    let secular = inst.green.secular(optimum.gamma_opt);
    check("E0 at gamma_opt", e0, secular.roots[0], CROSS_CHECK_TOL)?;
    check(
        "E1 at gamma_opt",
        e1,
        secular.energies()[1],
        CROSS_CHECK_TOL,
    )?;
    check(
        "pi(t_opt)",
        optimum.pi_max,
        ev.success(optimum.t_opt),
        CROSS_CHECK_TOL,
    )?;
    Ok(VerifiedOptimum { optimum, e0, e1 })
}

/// One line of the combined critical-coupling / optimum table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub p: f64,
    pub gamma_s: Option<f64>,
    pub gamma_w: Option<f64>,
    pub gamma_e: Option<f64>,
    pub gamma_opt: f64,
    pub e0: f64,
    pub e1: f64,
    pub sqrt_mu_over_vol: f64,
    pub t_opt: f64,
    pub half_pi_sqrt_vol: f64,
}

impl TableRow {
    pub fn columns() -> Vec<crate::output::Column> {
        vec![
            col("p", "path transition probability"),
            col("gamma_s", "smallest gamma with |<s,psi0>|^2 = |<s,psi1>|^2; empty if none in the scanned range"),
            col("gamma_w", "smallest gamma with |<e_w,psi0>|^2 = |<e_w,psi1>|^2; empty if none in the scanned range"),
            col("gamma_E", "smallest gamma with E0 = -E1; empty if none in the scanned range"),
            col("gamma_opt", "coupling maximizing the success probability"),
            col("E0", "ground energy of H at gamma_opt"),
            col("E1", "first excited energy of H at gamma_opt"),
            col("sqrt_mu_over_vol", "sqrt(mu(w)/vol(G))"),
            col("t_opt", "earliest time of the maximal success probability at gamma_opt"),
            col("half_pi_sqrt_vol", "(pi/2) sqrt(vol(G)/mu(w))"),
        ]
    }

    pub fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Num(self.p),
            Cell::opt(self.gamma_s),
            Cell::opt(self.gamma_w),
            Cell::opt(self.gamma_e),
            Cell::Num(self.gamma_opt),
            Cell::Num(self.e0),
            Cell::Num(self.e1),
            Cell::Num(self.sqrt_mu_over_vol),
            Cell::Num(self.t_opt),
            Cell::Num(self.half_pi_sqrt_vol),
        ]
    }
}

/// Computes one row; every reported value is re-derived independently.
pub fn table_row(
    cfg: &ExperimentConfig,
    p: f64,
    diagnostics: &mut Vec<String>,
) -> Result<(TableRow, Optimum64), CliError> {
    let inst = Instance::build(cfg.graph.with_p(p), cfg.target.index())?;
    let crit = scan_critical(cfg, &inst)?;
    for which in Criterion::ALL {
        match crit.get(which) {
            Some(g) => verify_root(&inst, which, g)?,
            None => diagnostics.push(format!(
                "p = {p}: no sign change for gamma_{} in [{}, {}]; cell left empty",
                which.name(),
                cfg.critical.0,
                cfg.critical.1
            )),
        }
    }
    if let (Some(s), Some(e), Some(w)) = (crit.gamma_s, crit.gamma_e, crit.gamma_w) {
        if !(s <= e + 1e-6 && e <= w + 1e-6) {
            diagnostics.push(format!(
                "p = {p}: ordering gamma_s <= gamma_E <= gamma_w violated ({s}, {e}, {w})"
            ));
        }
    }

    let v = optimize_verified(cfg, &inst)?;
    if v.optimum.truncated {
        diagnostics.push(format!(
            "p = {p}: time window truncated to {:.6e} < vol(G) = {:.6e}",
            v.optimum.t_ceiling,
            inst.green.volume()
        ));
    }

    let root = inst.green.mu_over_vol().sqrt();
    check(
        "sqrt_mu_over_vol",
        root,
        inst.sqrt_mu_over_vol_formula(),
        1e-12,
    )?;
    let row = TableRow {
        p,
        gamma_s: crit.gamma_s,
        gamma_w: crit.gamma_w,
        gamma_e: crit.gamma_e,
        gamma_opt: v.optimum.gamma_opt,
        e0: v.e0,
        e1: v.e1,
        sqrt_mu_over_vol: root,
        t_opt: v.optimum.t_opt,
        half_pi_sqrt_vol: FRAC_PI_2 / root,
    };
    Ok((row, v.optimum))
}

pub fn run_tables(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let ps = cfg.table_ps();
    if ps.is_empty() {
        return Err(CliError::config(
            "tables.p",
            "tables need the path-power family",
        ));
    }
    let mut out = RunOutput::default();
    let mut table = DataTable::new("tables", TableRow::columns());
    let mut pi_max = Vec::new();
    for p in ps {
        let (row, opt) = table_row(cfg, p, &mut out.diagnostics)?;
        table.push(row.cells());
        pi_max.push(opt.pi_max);
    }
    if let GraphSpec::PathPower { d, .. } = cfg.graph {
        table.meta("d", d);
    }
    table.meta("target", cfg.target.index());
    table.meta(
        "critical_scan",
        json!([cfg.critical.0, cfg.critical.1, cfg.critical.2]),
    );
    table.meta("pi_max", pi_max);
    out.tables.push((table, true));
    Ok(out)
}

pub fn run_optimize(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let inst = Instance::build(cfg.graph, cfg.target.index())?;
    let v = optimize_verified(cfg, &inst)?;
    let o = &v.optimum;
    let mut out = RunOutput::default();
    if o.truncated {
        out.diagnostics.push(format!(
            "time window truncated to {:.6e} < vol(G) = {:.6e}",
            o.t_ceiling,
            inst.green.volume()
        ));
    }
    let mut t = DataTable::new(
        "optimum",
        vec![
            col("gamma_opt", "coupling maximizing the success probability"),
            col("t_opt", "earliest time of the maximum"),
            col("pi_max", "maximal success probability"),
            col("E0", "ground energy at gamma_opt"),
            col("E1", "first excited energy at gamma_opt"),
            col("gamma_min", "lower end of the coarse coupling grid"),
            col("gamma_max", "upper end of the coarse coupling grid"),
            col("gamma_points", "coarse coupling grid size"),
            col("t_points", "time grid size per coupling"),
            col("t_ceiling", "time window used at gamma_opt"),
            col("truncated", "whether t_ceiling < vol(G)"),
        ],
    );
    t.push(vec![
        Cell::Num(o.gamma_opt),
        Cell::Num(o.t_opt),
        Cell::Num(o.pi_max),
        Cell::Num(v.e0),
        Cell::Num(v.e1),
        Cell::Num(o.gamma_range.0),
        Cell::Num(o.gamma_range.1),
        Cell::Int(o.gamma_points as u64),
        Cell::Int(o.t_points as u64),
        Cell::Num(o.t_ceiling),
        Cell::Bool(o.truncated),
    ]);
    t.meta("graph", inst.graph.family().to_string());
    t.meta("target", inst.target);
    t.meta("volume", inst.green.volume());
    out.tables.push((t, true));
    Ok(out)
}

pub fn run_spectrum(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let inst = Instance::build(cfg.graph, cfg.target.index())?;
    let mut out = RunOutput::default();

    let lap_spec =
        laplacian_spectrum(&inst.laplacian).map_err(CliError::core("Laplacian spectrum"))?;
    let mut lap = DataTable::new(
        "laplacian_spectrum",
        vec![
            col("index", "ascending eigenvalue index"),
            col("eigenvalue", "eigenvalue of the Laplacian"),
        ],
    );
    for (i, &e) in lap_spec.eigenvalues.iter().enumerate() {
        lap.push(vec![Cell::Int(i as u64), Cell::Num(e)]);
    }
    out.tables.push((lap, false));

    let crit = scan_critical(cfg, &inst)?;
    let gammas = if cfg.spectrum_gammas.is_empty() {
        crit.gamma_e.into_iter().collect()
    } else {
        cfg.spectrum_gammas.clone()
    };
    let spectra: Vec<Result<Vec<f64>, CliError>> = gammas
        .par_iter()
        .map(|&g| {
            let h = inst.hamiltonian(g)?;
            Ok(h.spectrum()
                .map_err(CliError::core(format!("spectrum of H at gamma = {g}")))?
                .eigenvalues)
        })
        .collect();
    let mut ham = DataTable::new(
        "hamiltonian_spectrum",
        vec![
            col("gamma", "coupling"),
            col("index", "ascending eigenvalue index"),
            col("energy", "eigenvalue of H"),
        ],
    );
    for (&g, energies) in gammas.iter().zip(spectra) {
        for (i, e) in energies?.into_iter().enumerate() {
            ham.push(vec![Cell::Num(g), Cell::Int(i as u64), Cell::Num(e)]);
        }
    }
    out.tables.push((ham, false));

    let mu = inst.laplacian.measure();
    let values = mu.values();
    let profile = interior_measure_profile(&inst.graph, mu);
    let summary = json!({
        "graph": inst.graph.family().to_string(),
        "vertices": inst.graph.len(),
        "target": inst.target,
        "volume": mu.volume(),
        "mu_target": mu.at(inst.target),
        "measure_min": values.iter().copied().fold(f64::INFINITY, f64::min),
        "measure_max": values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "interior": {
            "vertices": profile.interior_vertices,
            "measure_min": finite_or_null(profile.min),
            "measure_max": finite_or_null(profile.max),
            "measure_constant": profile.measure_constant,
            "uniform_transitions": profile.uniform_transitions,
        },
        "homogeneous": profile.homogeneous,
        "gamma_s": crit.gamma_s,
        "gamma_w": crit.gamma_w,
        "gamma_E": crit.gamma_e,
    });
    let mut text = serde_json::to_string_pretty(&summary).expect("serializable");
    text.push('\n');
    out.files.push(("summary.json".to_string(), text));
    Ok(out)
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect()
}

fn overlaps_at(inst: &Instance, gamma: f64) -> Option<Overlaps64> {
    match inst.green.secular(gamma).low_overlaps() {
        Ok(ov) => Some(ov),
        // a state invisible to the target sits between E0 and E1: fall back
        // to the dense eigenvectors
        Err(Error::EigenvalueOnSpectrum { .. }) => {
            overlaps_direct(&inst.hamiltonian(gamma).ok()?).ok()
        }
        Err(_) => None,
    }
}

fn figure_overlaps(
    cfg: &ExperimentConfig,
    inst: &Instance,
    crit: &GammaCriticalPoints<f64>,
) -> Result<DataTable, CliError> {
    let (lo, hi) = gamma_window(cfg, inst)?;
    let points = cfg.sweep.gamma_points.unwrap_or(200);
    let gammas = grid(lo, hi, points);
    let rows: Vec<Option<Overlaps64>> = gammas.par_iter().map(|&g| overlaps_at(inst, g)).collect();
    let mut t = DataTable::new(
        "figure_overlaps",
        vec![
            col("gamma", "coupling"),
            col("s_psi0", "|<s,psi0>|^2"),
            col("s_psi1", "|<s,psi1>|^2"),
            col("ew_psi0", "|<e_w,psi0>|^2"),
            col("ew_psi1", "|<e_w,psi1>|^2"),
        ],
    );
    for (&g, ov) in gammas.iter().zip(rows) {
        let cells = match ov {
            Some(o) => vec![
                Cell::Num(o.s_psi0),
                Cell::Num(o.s_psi1),
                Cell::Num(o.ew_psi0),
                Cell::Num(o.ew_psi1),
            ],
            None => vec![Cell::Empty; 4],
        };
        t.push([vec![Cell::Num(g)], cells].concat());
    }
    t.meta("gamma_s", crit.gamma_s);
    t.meta("gamma_w", crit.gamma_w);
    t.meta("gamma_E", crit.gamma_e);
    Ok(t)
}

fn figure_contour(
    cfg: &ExperimentConfig,
    inst: &Instance,
    crit: &GammaCriticalPoints<f64>,
) -> Result<DataTable, CliError> {
    let (lo, hi) = gamma_window(cfg, inst)?;
    let gammas = grid(lo, hi, cfg.figures.contour_gamma_points);
    let centre = crit.gamma_e.unwrap_or(0.5 * (lo + hi));
    let sec = inst.green.secular(centre);
    let energies = sec.energies();
    let t_max = TimeCeiling::default().at(inst.green.volume(), energies[0], energies[1]);
    let times = grid(0.0, t_max, cfg.figures.contour_t_points);
    let series: Vec<Vec<f64>> = gammas
        .par_iter()
        .map(|&g| inst.green.secular(g).success_series(&times))
        .collect();
    let mut t = DataTable::new(
        "figure_contour",
        vec![
            col("t", "time"),
            col("gamma", "coupling"),
            col("pi", "success probability"),
        ],
    );
    for (&g, pis) in gammas.iter().zip(series) {
        for (&time, pi) in times.iter().zip(pis) {
            t.push(vec![Cell::Num(time), Cell::Num(g), Cell::Num(pi)]);
        }
    }
    t.meta("t_max", t_max);
    t.meta("order", "gamma-major, time varies fastest");
    Ok(t)
}

fn figure_timeseries(cfg: &ExperimentConfig, inst: &Instance) -> Result<DataTable, CliError> {
    let v = optimize_verified(cfg, inst)?;
    let o = &v.optimum;
    let points = cfg.sweep.t_points.unwrap_or(4000);
    let times = grid(0.0, o.t_ceiling, points);
    let pis = inst.green.secular(o.gamma_opt).success_series(&times);
    let mut t = DataTable::new(
        "figure_timeseries",
        vec![
            col("t", "time"),
            col("pi", "success probability at gamma_opt"),
        ],
    );
    for (&time, pi) in times.iter().zip(pis) {
        t.push(vec![Cell::Num(time), Cell::Num(pi)]);
    }
    t.meta("gamma_opt", o.gamma_opt);
    t.meta("t_opt", o.t_opt);
    t.meta("pi_max", o.pi_max);
    t.meta("E0", v.e0);
    t.meta("E1", v.e1);
    t.meta("t_ceiling", o.t_ceiling);
    t.meta("truncated", o.truncated);
    Ok(t)
}

fn figure_volume(cfg: &ExperimentConfig, d: usize) -> Result<DataTable, CliError> {
    let (lo, hi, points) = cfg.figures.volume_p;
    let mut t = DataTable::new(
        "figure_volume",
        vec![
            col("p", "path transition probability"),
            col("sqrt_vol", "sqrt(vol(G_d))"),
        ],
    );
    for p in grid(lo, hi, points) {
        let ctx = format!("measure at p = {p}");
        let mu = kolmogorov_measure(&path_graph(p).map_err(CliError::core(&ctx))?)
            .map_err(CliError::core(&ctx))?;
        let sqrt_vol = mu.volume().powi(d as i32).sqrt();
        check(
            &ctx,
            sqrt_vol,
            (2.0 + 2.0 / (1.0 - p)).powf(d as f64 / 2.0),
            1e-12,
        )?;
        t.push(vec![Cell::Num(p), Cell::Num(sqrt_vol)]);
    }
    t.meta("d", d);
    Ok(t)
}

pub fn run_figures(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let mut out = RunOutput::default();
    let needs_instance = cfg.figures.which.iter().any(|f| *f != Figure::Volume);
    let inst = if needs_instance {
        Some(Instance::build(cfg.graph, cfg.target.index())?)
    } else {
        None
    };
    let crit = match &inst {
        Some(i)
            if cfg
                .figures
                .which
                .iter()
                .any(|f| matches!(f, Figure::Overlaps | Figure::Contour)) =>
        {
            Some(scan_critical(cfg, i)?)
        }
        _ => None,
    };
    for &fig in &cfg.figures.which {
        let table = match (fig, &inst, &crit) {
            (Figure::Overlaps, Some(i), Some(c)) => figure_overlaps(cfg, i, c)?,
            (Figure::Contour, Some(i), Some(c)) => figure_contour(cfg, i, c)?,
            (Figure::Timeseries, Some(i), _) => figure_timeseries(cfg, i)?,
            (Figure::Volume, _, _) => match cfg.graph {
                GraphSpec::PathPower { d, .. } => figure_volume(cfg, d)?,
                GraphSpec::Complete { .. } => {
                    out.diagnostics
                        .push("volume figure skipped: needs the path-power family".to_string());
                    continue;
                }
            },
            _ => unreachable!("instance built for every non-volume figure"),
        };
        out.tables.push((table, true));
    }
    Ok(out)
}
