//! Experiment configuration: a TOML file whose keys mirror the dotted names
//! used in diagnostics (`graph.p`, `sweep.gamma_min`, ...).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub graph: RawGraph,
    #[serde(default)]
    pub target: RawTarget,
    #[serde(default)]
    pub sweep: RawSweep,
    #[serde(default)]
    pub critical: RawCritical,
    #[serde(default)]
    pub spectrum: RawSpectrum,
    #[serde(default)]
    pub tables: RawTables,
    #[serde(default)]
    pub figures: RawFigures,
    #[serde(default)]
    pub output: RawOutput,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGraph {
    pub family: Option<String>,
    pub p: Option<f64>,
    pub d: Option<i64>,
    #[serde(rename = "N")]
    pub n: Option<i64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RawVertex {
    Index(i64),
    Name(String),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTarget {
    pub vertex: Option<RawVertex>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub gamma_points: Option<i64>,
    pub t_points: Option<i64>,
}

/// Scan used to bracket the critical couplings.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCritical {
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub gamma_points: Option<i64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpectrum {
    pub gammas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTables {
    pub p: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFigures {
    pub which: Option<Vec<String>>,
    pub contour_gamma_points: Option<i64>,
    pub contour_t_points: Option<i64>,
    pub volume_p_min: Option<f64>,
    pub volume_p_max: Option<f64>,
    pub volume_p_points: Option<i64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub format: Option<String>,
    pub path: Option<PathBuf>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config("config", e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphSpec {
    /// `d`-fold normalized Cartesian power of the four-vertex path.
    PathPower {
        p: f64,
        d: usize,
    },
    Complete {
        n: usize,
    },
}

impl GraphSpec {
    pub fn vertices(&self) -> usize {
        match *self {
            GraphSpec::PathPower { d, .. } => 4usize.pow(d as u32),
            GraphSpec::Complete { n } => n,
        }
    }

    pub fn with_p(&self, p: f64) -> GraphSpec {
        match *self {
            GraphSpec::PathPower { d, .. } => GraphSpec::PathPower { p, d },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetSpec {
    /// The all-zeros lattice vertex, index 0.
    Corner,
    Index(usize),
}

impl TargetSpec {
    pub fn index(self) -> usize {
        match self {
            TargetSpec::Corner => 0,
            TargetSpec::Index(i) => i,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Figure {
    Overlaps,
    Contour,
    Timeseries,
    Volume,
}

impl Figure {
    pub const ALL: [Figure; 4] = [
        Figure::Overlaps,
        Figure::Contour,
        Figure::Timeseries,
        Figure::Volume,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Overlaps => "overlaps",
            Figure::Contour => "contour",
            Figure::Timeseries => "timeseries",
            Figure::Volume => "volume",
        }
    }
}

/// Sweep settings; `None` means "use the operation's default".
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepSpec {
    pub gamma_range: Option<(f64, f64)>,
    pub gamma_points: Option<usize>,
    pub t_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureSpec {
    pub which: Vec<Figure>,
    pub contour_gamma_points: usize,
    pub contour_t_points: usize,
    pub volume_p: (f64, f64, usize),
}

/// A fully validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub target: TargetSpec,
    pub sweep: SweepSpec,
    /// `(gamma_min, gamma_max, points)` of the critical-coupling scan.
    pub critical: (f64, f64, usize),
    pub spectrum_gammas: Vec<f64>,
    pub tables_p: Vec<f64>,
    pub figures: FigureSpec,
    pub format: OutputFormat,
    pub out_dir: PathBuf,
}

pub const DEFAULT_D: usize = 5;
/// Largest lattice dimension under the core crate's vertex cap (4^9 < 10^6).
pub const MAX_D: usize = 9;

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub gamma_points: Option<i64>,
    pub t_points: Option<i64>,
}

impl RawConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(out) = &o.out {
            self.output.path = Some(out.clone());
        }
        self.sweep.gamma_min = o.gamma_min.or(self.sweep.gamma_min);
        self.sweep.gamma_max = o.gamma_max.or(self.sweep.gamma_max);
        self.sweep.gamma_points = o.gamma_points.or(self.sweep.gamma_points);
        self.sweep.t_points = o.t_points.or(self.sweep.t_points);
    }
}

fn count(key: &str, v: Option<i64>, min: i64, default: usize) -> Result<usize, CliError> {
    match v {
        None => Ok(default),
        Some(x) if x >= min => Ok(x as usize),
        Some(x) => Err(CliError::config(
            key,
            format!("{x} is below the minimum {min}"),
        )),
    }
}

fn optional_count(key: &str, v: Option<i64>, min: i64) -> Result<Option<usize>, CliError> {
    v.map(|_| count(key, v, min, 0)).transpose()
}

fn probability(key: &str, p: f64) -> Result<f64, CliError> {
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(CliError::config(
            key,
            format!("{p} is not in the open interval (0, 1)"),
        ))
    }
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, CliError> {
        let family = raw.graph.family.as_deref().unwrap_or("path-power");
        let tables_p = match &raw.tables.p {
            Some(list) if list.is_empty() => {
                return Err(CliError::config("tables.p", "list is empty"))
            }
            Some(list) => list
                .iter()
                .map(|&p| probability("tables.p", p))
                .collect::<Result<Vec<_>, _>>()?,
            None => vec![],
        };
        let graph = match family {
            "path-power" => {
                if raw.graph.n.is_some() {
                    return Err(CliError::config(
                        "graph.N",
                        "only valid for the complete family",
                    ));
                }
                let p = match raw.graph.p {
                    Some(p) => probability("graph.p", p)?,
                    None => match tables_p.first() {
                        Some(&p) => p,
                        None => {
                            return Err(CliError::config(
                                "graph.p",
                                "required for the path-power family",
                            ))
                        }
                    },
                };
                let d = count("graph.d", raw.graph.d, 1, DEFAULT_D)?;
                if d > MAX_D {
                    return Err(CliError::config(
                        "graph.d",
                        format!("{d} exceeds {MAX_D} (4^d vertex cap)"),
                    ));
                }
                GraphSpec::PathPower { p, d }
            }
            "complete" => {
                if raw.graph.p.is_some() {
                    return Err(CliError::config(
                        "graph.p",
                        "only valid for the path-power family",
                    ));
                }
                if raw.graph.d.is_some() {
                    return Err(CliError::config(
                        "graph.d",
                        "only valid for the path-power family",
                    ));
                }
                let n = match raw.graph.n {
                    Some(n) => count("graph.N", Some(n), 2, 0)?,
                    None => {
                        return Err(CliError::config(
                            "graph.N",
                            "required for the complete family",
                        ))
                    }
                };
                if n > qwsearch::graph::DEFAULT_VERTEX_CAP {
                    return Err(CliError::config(
                        "graph.N",
                        format!("{n} exceeds the vertex cap"),
                    ));
                }
                GraphSpec::Complete { n }
            }
            other => {
                return Err(CliError::config(
                    "graph.family",
                    format!("unknown family {other:?}; expected \"path-power\" or \"complete\""),
                ))
            }
        };
        if !tables_p.is_empty() && !matches!(graph, GraphSpec::PathPower { .. }) {
            return Err(CliError::config(
                "tables.p",
                "tables need the path-power family",
            ));
        }

        let target = match &raw.target.vertex {
            None => TargetSpec::Corner,
            Some(RawVertex::Name(s)) if s == "corner" => TargetSpec::Corner,
            Some(RawVertex::Name(s)) => {
                return Err(CliError::config(
                    "target.vertex",
                    format!("{s:?} is neither an index nor \"corner\""),
                ))
            }
            Some(RawVertex::Index(i)) if *i >= 0 && (*i as u64) < graph.vertices() as u64 => {
                TargetSpec::Index(*i as usize)
            }
            Some(RawVertex::Index(i)) => {
                return Err(CliError::config(
                    "target.vertex",
                    format!("{i} is outside 0..{}", graph.vertices()),
                ))
            }
        };

        let gamma_range = match (raw.sweep.gamma_min, raw.sweep.gamma_max) {
            (None, None) => None,
            (Some(_), None) => {
                return Err(CliError::config(
                    "sweep.gamma_max",
                    "required when sweep.gamma_min is set",
                ))
            }
            (None, Some(_)) => {
                return Err(CliError::config(
                    "sweep.gamma_min",
                    "required when sweep.gamma_max is set",
                ))
            }
            (Some(lo), Some(hi)) => {
                if !(lo > 0.0 && lo.is_finite()) {
                    return Err(CliError::config(
                        "sweep.gamma_min",
                        format!("{lo} must be positive"),
                    ));
                }
                if !(hi > lo && hi.is_finite()) {
                    return Err(CliError::config(
                        "sweep.gamma_max",
                        format!("{hi} must exceed sweep.gamma_min = {lo}"),
                    ));
                }
                Some((lo, hi))
            }
        };
        let sweep = SweepSpec {
            gamma_range,
            gamma_points: optional_count("sweep.gamma_points", raw.sweep.gamma_points, 2)?,
            t_points: optional_count("sweep.t_points", raw.sweep.t_points, 3)?,
        };

        let c = &raw.critical;
        let (clo, chi) = (c.gamma_min.unwrap_or(0.05), c.gamma_max.unwrap_or(3.0));
        if !(clo > 0.0 && clo.is_finite()) {
            return Err(CliError::config(
                "critical.gamma_min",
                format!("{clo} must be positive"),
            ));
        }
        if !(chi > clo && chi.is_finite()) {
            return Err(CliError::config(
                "critical.gamma_max",
                format!("{chi} must exceed critical.gamma_min = {clo}"),
            ));
        }
        let critical = (
            clo,
            chi,
            count("critical.gamma_points", c.gamma_points, 2, 600)?,
        );

        let spectrum_gammas = raw.spectrum.gammas.clone().unwrap_or_default();
        if let Some(g) = spectrum_gammas
            .iter()
            .find(|g| !(**g > 0.0 && g.is_finite()))
        {
            return Err(CliError::config(
                "spectrum.gammas",
                format!("{g} must be positive"),
            ));
        }

        let f = &raw.figures;
        let which = match &f.which {
            None => Figure::ALL.to_vec(),
            Some(names) => {
                let mut out = Vec::new();
                for name in names {
                    let fig = Figure::ALL
                        .into_iter()
                        .find(|fig| fig.name() == name)
                        .ok_or_else(|| {
                            CliError::config("figures.which", format!("unknown figure {name:?}"))
                        })?;
                    if !out.contains(&fig) {
                        out.push(fig);
                    }
                }
                out.sort();
                out
            }
        };
        if which.contains(&Figure::Volume)
            && f.which.is_some()
            && !matches!(graph, GraphSpec::PathPower { .. })
        {
            return Err(CliError::config(
                "figures.which",
                "the volume figure needs the path-power family",
            ));
        }
        let (vlo, vhi) = (
            f.volume_p_min.unwrap_or(0.05),
            f.volume_p_max.unwrap_or(0.95),
        );
        probability("figures.volume_p_min", vlo)?;
        probability("figures.volume_p_max", vhi)?;
        if vhi <= vlo {
            return Err(CliError::config(
                "figures.volume_p_max",
                "must exceed figures.volume_p_min",
            ));
        }
        let figures = FigureSpec {
            which,
            contour_gamma_points: count(
                "figures.contour_gamma_points",
                f.contour_gamma_points,
                2,
                41,
            )?,
            contour_t_points: count("figures.contour_t_points", f.contour_t_points, 2, 201)?,
            volume_p: (
                vlo,
                vhi,
                count("figures.volume_p_points", f.volume_p_points, 2, 19)?,
            ),
        };

        let format = match raw.output.format.as_deref().unwrap_or("csv") {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => {
                return Err(CliError::config(
                    "output.format",
                    format!("{other:?} is not \"csv\" or \"json\""),
                ))
            }
        };
        let out_dir = raw
            .output
            .path
            .clone()
            .unwrap_or_else(|| PathBuf::from("out"));

        Ok(ExperimentConfig {
            graph,
            target,
            sweep,
            critical,
            spectrum_gammas,
            tables_p,
            figures,
            format,
            out_dir,
        })
    }

    /// The p values for `tables`: `tables.p`, else `graph.p`.
    pub fn table_ps(&self) -> Vec<f64> {
        match (self.tables_p.is_empty(), self.graph) {
            (false, _) => self.tables_p.clone(),
            (true, GraphSpec::PathPower { p, .. }) => vec![p],
            (true, GraphSpec::Complete { .. }) => vec![],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn validate(text: &str) -> Result<ExperimentConfig, CliError> {
        ExperimentConfig::from_raw(&RawConfig::parse(text)?)
    }

    fn key_of(text: &str) -> String {
        match validate(text) {
            Err(CliError::Config { key, .. }) => key,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_path_power() {
        let cfg = validate("[graph]\np = 0.5\n").unwrap();
        assert_eq!(cfg.graph, GraphSpec::PathPower { p: 0.5, d: 5 });
        assert_eq!(cfg.target, TargetSpec::Corner);
        assert_eq!(cfg.format, OutputFormat::Csv);
        assert_eq!(cfg.figures.which, Figure::ALL.to_vec());
        assert_eq!(cfg.table_ps(), vec![0.5]);
    }

    #[test]
    fn complete_with_index_target() {
        let cfg = validate("[graph]\nfamily = \"complete\"\nN = 16\n[target]\nvertex = 3\n[output]\nformat = \"json\"\n").unwrap();
        assert_eq!(cfg.graph, GraphSpec::Complete { n: 16 });
        assert_eq!(cfg.target, TargetSpec::Index(3));
        assert_eq!(cfg.format, OutputFormat::Json);
    }

    #[test]
    fn errors_name_their_key() {
        assert_eq!(key_of("[graph]\np = 1.2\n"), "graph.p");
        assert_eq!(key_of("[graph]\np = 0.5\nd = 0\n"), "graph.d");
        assert_eq!(key_of("[graph]\np = 0.5\nd = 12\n"), "graph.d");
        assert_eq!(key_of("[graph]\nfamily = \"cycle\"\n"), "graph.family");
        assert_eq!(key_of("[graph]\nfamily = \"complete\"\n"), "graph.N");
        assert_eq!(key_of("[graph]\nfamily = \"complete\"\nN = 1\n"), "graph.N");
        assert_eq!(
            key_of("[graph]\nfamily = \"complete\"\nN = 4\np = 0.5\n"),
            "graph.p"
        );
        assert_eq!(
            key_of("[graph]\np = 0.5\nd = 1\n[target]\nvertex = 4\n"),
            "target.vertex"
        );
        assert_eq!(
            key_of("[graph]\np = 0.5\n[target]\nvertex = \"centre\"\n"),
            "target.vertex"
        );
        assert_eq!(
            key_of("[graph]\np = 0.5\n[sweep]\ngamma_min = 0.5\n"),
            "sweep.gamma_max"
        );
        assert_eq!(
            key_of("[graph]\np = 0.5\n[sweep]\ngamma_min = 2.0\ngamma_max = 1.0\n"),
            "sweep.gamma_max"
        );
        assert_eq!(
            key_of("[graph]\np = 0.5\n[sweep]\ngamma_min = -1.0\ngamma_max = 1.0\n"),
            "sweep.gamma_min"
        );
        assert_eq!(
            key_of("[graph]\np = 0.5\n[sweep]\ngamma_points = 1\n"),
            "sweep.gamma_points"
        );
        assert_eq!(
            key_of("[graph]\np = 0.5\n[sweep]\nt_points = 2\n"),
            "sweep.t_points"
        );
        assert_eq!(
            key_of("[graph]\np = 0.5\n[output]\nformat = \"xml\"\n"),
            "output.format"
        );
        assert_eq!(
            key_of("[graph]\np = 0.5\n[tables]\np = [0.5, 1.5]\n"),
            "tables.p"
        );
        assert_eq!(
            key_of("[graph]\np = 0.5\n[figures]\nwhich = [\"heatmap\"]\n"),
            "figures.which"
        );
        assert_eq!(
            key_of("[graph]\np = 0.5\n[critical]\ngamma_max = 0.01\n"),
            "critical.gamma_max"
        );
        assert_eq!(
            key_of("[graph]\np = 0.5\n[spectrum]\ngammas = [0.0]\n"),
            "spectrum.gammas"
        );
        assert_eq!(key_of("[graph]\np = 0.5\nq = 3\n"), "config");
        assert_eq!(key_of("[graph]\np = \"half\"\n"), "config");
    }

    #[test]
    fn tables_supply_p() {
        let cfg = validate("[tables]\np = [0.91, 0.5]\n").unwrap();
        assert_eq!(cfg.table_ps(), vec![0.91, 0.5]);
        assert_eq!(cfg.graph, GraphSpec::PathPower { p: 0.91, d: 5 });
    }

    #[test]
    fn overrides_take_precedence() {
        let mut raw = RawConfig::parse(
            "[graph]\np = 0.5\n[sweep]\ngamma_min = 1.0\ngamma_max = 2.0\n[output]\npath = \"a\"\n",
        )
        .unwrap();
        raw.apply(&Overrides {
            out: Some("b".into()),
            gamma_min: Some(1.5),
            t_points: Some(10),
            ..Default::default()
        });
        let cfg = ExperimentConfig::from_raw(&raw).unwrap();
        assert_eq!(cfg.out_dir, PathBuf::from("b"));
        assert_eq!(cfg.sweep.gamma_range, Some((1.5, 2.0)));
        assert_eq!(cfg.sweep.t_points, Some(10));
    }

    #[test]
    fn figure_selection_is_ordered_and_deduplicated() {
        let cfg = validate(
            "[graph]\np = 0.5\n[figures]\nwhich = [\"volume\", \"overlaps\", \"volume\"]\n",
        )
        .unwrap();
        assert_eq!(cfg.figures.which, vec![Figure::Overlaps, Figure::Volume]);
    }
}
