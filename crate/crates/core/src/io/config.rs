//! Run configuration: a sectioned `key = value` file (TOML syntax) with the
//! sections `grid`, `obstacle`, `kernel`, `reaction`, `time`, `initial` and
//! `output`. Unknown keys are rejected. Every error names a line.
//!
//! ```toml
//! [grid]
//! halfwidth = 10.0
//! n_cells = 128
//! farfield = 1.0
//!
//! [obstacle]
//! shape = "disk"
//! center = [0.0, 0.0]
//! radius = 1.0
//!
//! [kernel]
//! family = "regularized"
//! s = 0.5
//! delta = 0.01
//!
//! [reaction]
//! kind = "cubic"
//! theta = 0.1
//!
//! [time]
//! t_end = 280.0
//! dt = "auto"
//! snapshots = [0, 40, 80, 120, 160, 200, 240, 280]
//!
//! [initial]
//! kind = "heaviside"
//! direction = [1.0, 0.0]
//! offset = -5.0
//! ```
//!
//! File references (`obstacle.file`, `kernel.table`, `reaction.table`,
//! `initial.file`) are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::pgm::raster_from_pgm;
use super::tables::{read_field_csv, read_radial_table, read_reaction_table};
use crate::error::{Error, Result};
use crate::evolution::{
    InitialCondition, SimConfig, TimeStep, DEFAULT_SNAPSHOTS, DEFAULT_STEADY_TOL,
};
use crate::geometry::{Obstacle, Point};
use crate::grid::Grid2D;
use crate::kernel::{make_kernel, KernelFamily, KernelSpec};
use crate::reaction::{cubic_bistable, BistableSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub halfwidth: f64,
    pub n_cells: usize,
    #[serde(default = "one")]
    pub farfield: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSection {
    /// `none`, `disk`, `ellipse`, `polygon` or `raster`.
    pub shape: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semi_axes: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Point>>,
    /// Graymap for `raster`; nonzero pixels are obstacle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    /// Half-width of the square the raster covers; defaults to the grid's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfwidth: Option<f64>,
    /// Certifies a raster as convex; the claim is checked against its hull.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convex: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    /// `regularized`, `singular` or `table`.
    #[serde(default = "regularized")]
    pub family: String,
    #[serde(default = "half")]
    pub s: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "one")]
    pub c_norm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
    /// Rescale a table to unit mass.
    #[serde(default)]
    pub normalize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            family: regularized(),
            s: half(),
            delta: default_delta(),
            c_norm: one(),
            table: None,
            normalize: false,
            cutoff: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionSection {
    /// `cubic` or `tabulated`.
    #[serde(default = "cubic")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DtSetting {
    Fixed(f64),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    #[serde(default = "auto")]
    pub dt: DtSetting,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<Vec<f64>>,
    #[serde(default = "default_steady_tol")]
    pub steady_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// `heaviside`, `constant` or `custom`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    /// Field CSV for `custom`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "snapshot_prefix")]
    pub prefix: String,
    #[serde(default = "yes")]
    pub pgm: bool,
    #[serde(default = "yes")]
    pub csv: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            prefix: snapshot_prefix(),
            pgm: true,
            csv: true,
        }
    }
}

/// The file as written, with defaults filled in. Serializes back to the same
/// schema, which makes it the config echo of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub grid: GridSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstacle: Option<ObstacleSection>,
    #[serde(default)]
    pub kernel: KernelSection,
    pub reaction: ReactionSection,
    pub time: TimeSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn default_delta() -> f64 {
    0.01
}
fn default_steady_tol() -> f64 {
    DEFAULT_STEADY_TOL
}
fn regularized() -> String {
    "regularized".into()
}
fn cubic() -> String {
    "cubic".into()
}
fn auto() -> DtSetting {
    DtSetting::Named("auto".into())
}
fn snapshot_prefix() -> String {
    "snapshot".into()
}
fn yes() -> bool {
    true
}

/// A parsed and validated run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub file: ConfigFile,
    pub sim: SimConfig,
}

/// 1-based line of byte `offset`.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]`, else of the section header, else 1.
fn locate(text: &str, section: &str, key: &str) -> usize {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return i + 1;
                }
            }
        }
    }
    header.unwrap_or(1)
}

struct Anchor<'a> {
    text: &'a str,
    section: &'static str,
}

impl Anchor<'_> {
    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        Error::Config {
            line: locate(self.text, self.section, key),
            section: self.section.into(),
            key: key.into(),
            message: message.into(),
        }
    }

    /// Re-anchors a library error, using its parameter name as the key when
    /// that name is a key of this section.
    fn wrap(&self, fallback: &str, err: Error) -> Error {
        match err {
            Error::InvalidParameter { name, reason } => {
                let key = if locate_exact(self.text, self.section, name) {
                    name
                } else {
                    fallback
                };
                self.err(key, format!("{name}: {reason}"))
            }
            other => self.err(fallback, other.to_string()),
        }
    }

    fn require<T: Copy>(&self, value: Option<T>, key: &str) -> Result<T> {
        value.ok_or_else(|| self.err(key, "required key is missing"))
    }
}

fn locate_exact(text: &str, section: &str, key: &str) -> bool {
    let mut current = "";
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim();
            continue;
        }
        if current == section && line.split_once('=').is_some_and(|(k, _)| k.trim() == key) {
            return true;
        }
    }
    false
}

fn read_text(base: Option<&Path>, name: &str) -> std::result::Result<String, String> {
    let path = resolve(base, name)?;
    std::fs::read_to_string(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn resolve(base: Option<&Path>, name: &str) -> std::result::Result<PathBuf, String> {
    let base = base.ok_or_else(|| format!("file reference `{name}` needs a config on disk"))?;
    Ok(base.join(name))
}

/// Parses `text`; relative file references resolve against `base`.
pub fn parse_config(text: &str, base: Option<&Path>) -> Result<RunConfig> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(1, |s| line_of(text, s.start));
        let message = e.message().to_string();
        let (section, key) = table_path(text, line);
        Error::Config {
            line,
            section,
            key,
            message,
        }
    })?;
    let sim = build(&file, text, base)?;
    Ok(RunConfig { file, sim })
}

/// Section and key at `line`, for syntax errors.
fn table_path(text: &str, line: usize) -> (String, String) {
    let mut section = String::new();
    let mut key = String::new();
    for (i, raw) in text.lines().enumerate().take(line) {
        let l = raw.split('#').next().unwrap_or("").trim();
        if let Some(name) = l.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            key.clear();
        } else if i + 1 == line {
            key = l.split_once('=').map_or("", |(k, _)| k.trim()).to_string();
        }
    }
    (section, key)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, path.parent())
}

fn build(file: &ConfigFile, text: &str, base: Option<&Path>) -> Result<SimConfig> {
    let grid = Anchor {
        text,
        section: "grid",
    };
    let g = &file.grid;
    Grid2D::new(g.halfwidth, g.n_cells).map_err(|e| grid.wrap("halfwidth", e))?;
    if !(0.0..=1.0).contains(&g.farfield) {
        return Err(grid.err("farfield", "must lie in [0, 1]"));
    }

    let obstacle = match &file.obstacle {
        None => None,
        Some(o) => build_obstacle(o, g.halfwidth, text, base)?,
    };
    let kernel = build_kernel(&file.kernel, text, base)?;
    let reaction = build_reaction(&file.reaction, text, base)?;

    let time = Anchor {
        text,
        section: "time",
    };
    let t = &file.time;
    if !(t.t_end > 0.0) || !t.t_end.is_finite() {
        return Err(time.err("t_end", "must be positive"));
    }
    let dt = match &t.dt {
        DtSetting::Named(s) if s == "auto" => TimeStep::Auto,
        DtSetting::Named(s) => {
            return Err(time.err("dt", format!("expected \"auto\" or a number, got \"{s}\"")))
        }
        DtSetting::Fixed(v) if *v > 0.0 && v.is_finite() => TimeStep::Fixed(*v),
        DtSetting::Fixed(v) => return Err(time.err("dt", format!("{v} must be positive"))),
    };
    let snapshot_times = match &t.snapshots {
        Some(s) => s.clone(),
        None => DEFAULT_SNAPSHOTS
            .iter()
            .copied()
            .filter(|&x| x <= t.t_end)
            .collect(),
    };

    let initial = build_initial(&file.initial, g, obstacle.as_ref(), text, base)?;

    let sim = SimConfig {
        box_halfwidth: g.halfwidth,
        n_cells: g.n_cells,
        farfield: g.farfield,
        obstacle,
        kernel,
        reaction,
        t_end: t.t_end,
        snapshot_times,
        dt,
        steady_tol: t.steady_tol,
        initial,
    };
    sim.validate().map_err(|e| match e {
        Error::InvalidParameter { name, reason } => {
            let key = match name {
                "snapshot_times" => "snapshots",
                other => other,
            };
            time.err(key, format!("{name}: {reason}"))
        }
        other => other,
    })?;
    sim.build_grid().map_err(|e| {
        Anchor {
            text,
            section: "obstacle",
        }
        .wrap("shape", e)
    })?;
    Ok(sim)
}

fn build_obstacle(
    o: &ObstacleSection,
    grid_halfwidth: f64,
    text: &str,
    base: Option<&Path>,
) -> Result<Option<Obstacle>> {
    let a = Anchor {
        text,
        section: "obstacle",
    };
    let ob = match o.shape.as_str() {
        "none" => return Ok(None),
        "disk" => {
            let center = o.center.unwrap_or([0.0, 0.0]);
            let radius = a.require(o.radius, "radius")?;
            Obstacle::disk(center, radius).map_err(|e| a.wrap("radius", e))?
        }
        "ellipse" => {
            let center = o.center.unwrap_or([0.0, 0.0]);
            let axes = a.require(o.semi_axes, "semi_axes")?;
            Obstacle::ellipse(center, axes).map_err(|e| a.wrap("semi_axes", e))?
        }
        "polygon" => {
            let vertices = o
                .vertices
                .clone()
                .ok_or_else(|| a.err("vertices", "required key is missing"))?;
            Obstacle::polygon(vertices).map_err(|e| a.wrap("vertices", e))?
        }
        "raster" => {
            let name = o
                .file
                .as_deref()
                .ok_or_else(|| a.err("file", "required key is missing"))?;
            let path = resolve(base, name).map_err(|m| a.err("file", m))?;
            let bytes = std::fs::read(&path)
                .map_err(|e| a.err("file", format!("cannot read {}: {e}", path.display())))?;
            let halfwidth = o.halfwidth.unwrap_or(grid_halfwidth);
            let mask =
                raster_from_pgm(&bytes, halfwidth).map_err(|e| a.err("file", e.to_string()))?;
            let ob = Obstacle::raster(mask);
            if o.convex == Some(true) {
                ob.certify_convex()
            } else {
                ob
            }
        }
        other => {
            return Err(a.err(
                "shape",
                format!(
                    "unknown shape \"{other}\" (expected none, disk, ellipse, polygon or raster)"
                ),
            ))
        }
    };
    Ok(Some(ob))
}

fn build_kernel(k: &KernelSection, text: &str, base: Option<&Path>) -> Result<KernelSpec> {
    let a = Anchor {
        text,
        section: "kernel",
    };
    let spec = match k.family.as_str() {
        "regularized" => make_kernel(
            KernelFamily::RegularizedFractional,
            k.s,
            2,
            k.delta,
            k.c_norm,
        )
        .map_err(|e| a.wrap("family", e))?,
        "singular" => make_kernel(KernelFamily::SingularFractional, k.s, 2, 0.0, k.c_norm)
            .map_err(|e| a.wrap("family", e))?,
        "table" => {
            let name = k
                .table
                .as_deref()
                .ok_or_else(|| a.err("table", "required key is missing"))?;
            let body = read_text(base, name).map_err(|m| a.err("table", m))?;
            let table =
                read_radial_table(&body).map_err(|e| a.err("table", format!("{name}: {e}")))?;
            let spec =
                KernelSpec::radial_table(2, table, k.c_norm).map_err(|e| a.wrap("table", e))?;
            if k.normalize {
                spec.normalized_to_unit_mass()
                    .map_err(|e| a.wrap("normalize", e))?
            } else {
                spec
            }
        }
        other => {
            return Err(a.err(
                "family",
                format!("unknown family \"{other}\" (expected regularized, singular or table)"),
            ))
        }
    };
    match k.cutoff {
        Some(r) => spec.with_cutoff(r).map_err(|e| a.wrap("cutoff", e)),
        None => Ok(spec),
    }
}

fn build_reaction(r: &ReactionSection, text: &str, base: Option<&Path>) -> Result<BistableSpec> {
    let a = Anchor {
        text,
        section: "reaction",
    };
    match r.kind.as_str() {
        "cubic" => {
            let theta = a.require(r.theta, "theta")?;
            cubic_bistable(theta).map_err(|e| a.wrap("theta", e))
        }
        "tabulated" => {
            let name = r
                .table
                .as_deref()
                .ok_or_else(|| a.err("table", "required key is missing"))?;
            let body = read_text(base, name).map_err(|m| a.err("table", m))?;
            let table =
                read_reaction_table(&body).map_err(|e| a.err("table", format!("{name}: {e}")))?;
            BistableSpec::tabulated(table).map_err(|e| a.wrap("table", e))
        }
        other => Err(a.err(
            "kind",
            format!("unknown kind \"{other}\" (expected cubic or tabulated)"),
        )),
    }
}

fn build_initial(
    i: &InitialSection,
    g: &GridSection,
    obstacle: Option<&Obstacle>,
    text: &str,
    base: Option<&Path>,
) -> Result<InitialCondition> {
    let a = Anchor {
        text,
        section: "initial",
    };
    let unit = |v: f64, key: &str| {
        if (0.0..=1.0).contains(&v) {
            Ok(v)
        } else {
            Err(a.err(key, format!("{v} is outside [0, 1]")))
        }
    };
    match i.kind.as_str() {
        "heaviside" => {
            let direction = i.direction.unwrap_or([1.0, 0.0]);
            if !(direction[0].hypot(direction[1]) > 0.0) {
                return Err(a.err("direction", "must be a nonzero vector"));
            }
            Ok(InitialCondition::HeavisideHalfPlane {
                direction,
                offset: a.require(i.offset, "offset")?,
            })
        }
        "constant" => Ok(InitialCondition::Constant(unit(
            a.require(i.value, "value")?,
            "value",
        )?)),
        "custom" => {
            let name = i
                .file
                .as_deref()
                .ok_or_else(|| a.err("file", "required key is missing"))?;
            let body = read_text(base, name).map_err(|m| a.err("file", m))?;
            let grid = match obstacle {
                Some(o) => Grid2D::with_obstacle(g.halfwidth, g.n_cells, o),
                None => Grid2D::new(g.halfwidth, g.n_cells),
            }
            .map_err(|e| a.err("file", e.to_string()))?;
            let field = read_field_csv(&body, &std::sync::Arc::new(grid), g.farfield)
                .map_err(|e| a.err("file", format!("{name}: {e}")))?;
            Ok(InitialCondition::Custom(field.values().to_vec()))
        }
        other => Err(a.err(
            "kind",
            format!("unknown kind \"{other}\" (expected heaviside, constant or custom)"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[grid]
halfwidth = 10.0
n_cells = 64
farfield = 1.0

[obstacle]
shape = "disk"
radius = 1.0

[kernel]
s = 0.5
delta = 0.01

[reaction]
theta = 0.1

[time]
t_end = 280.0

[initial]
kind = "heaviside"
offset = -5.0
"#;

    fn line_of_err(text: &str) -> (usize, String, String) {
        match parse_config(text, None) {
            Err(Error::Config {
                line, section, key, ..
            }) => (line, section, key),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn base_config_resolves_defaults() {
        let run = parse_config(BASE, None).unwrap();
        assert_eq!(run.sim.snapshot_times, DEFAULT_SNAPSHOTS.to_vec());
        assert_eq!(run.sim.dt, TimeStep::Auto);
        assert_eq!(run.file.kernel.c_norm, 1.0);
        assert_eq!(run.file.output.prefix, "snapshot");
        // The echo parses back to the same file.
        let echo = toml::to_string(&run.file).unwrap();
        assert_eq!(parse_config(&echo, None).unwrap().file, run.file);
    }

    #[test]
    fn out_of_range_order_names_the_key() {
        let text = BASE.replace("s = 0.5", "s = 1.5");
        let (line, section, key) = line_of_err(&text);
        assert_eq!((section.as_str(), key.as_str()), ("kernel", "s"));
        assert_eq!(text.lines().nth(line - 1).unwrap().trim(), "s = 1.5");
    }

    #[test]
    fn snapshot_past_end_is_rejected() {
        let text = BASE.replace("t_end = 280.0", "t_end = 280.0\nsnapshots = [0, 300]");
        let (line, section, key) = line_of_err(&text);
        assert_eq!((section.as_str(), key.as_str()), ("time", "snapshots"));
        assert!(text.lines().nth(line - 1).unwrap().starts_with("snapshots"));
    }

    #[test]
    fn unknown_key_and_syntax_errors_have_lines() {
        let text = BASE.replace("delta = 0.01", "delta = 0.01\nsigma = 2");
        let (line, section, _) = line_of_err(&text);
        assert_eq!(section, "kernel");
        assert!(line > 1);
        let (line, _, _) = line_of_err("[grid]\nhalfwidth = = 3\n");
        assert_eq!(line, 2);
    }

    #[test]
    fn file_references_need_a_base() {
        let text = BASE.replace("shape = \"disk\"", "shape = \"raster\"\nfile = \"c.pgm\"");
        let (_, section, key) = line_of_err(&text);
        assert_eq!((section.as_str(), key.as_str()), ("obstacle", "file"));
    }
}
