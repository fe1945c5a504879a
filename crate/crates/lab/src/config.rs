//! Experiment configuration: a TOML file with one section per figure, overridden by flags.

use std::fmt;
use std::path::{Path, PathBuf};

use irtr_core::{ModeCutoff, QuadratureSpec};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{LabError, LabResult};
use crate::grid::{check_grid, parse_range};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_N_RANDOM: usize = 10_000;
pub const DEFAULT_FRONTIER_SAMPLES: usize = 512;
pub const DEFAULT_OUTPUT_DIR: &str = "irtr-out";
pub const FIG1_GRID: &str = "0.05:8:0.05";
pub const FIG2_GRID: &str = "0.05:8:0.05";
pub const FIG3_PANELS: [f64; 8] = [0.2, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0];
pub const FIG4_GRID: &str = "0:5:0.05";
pub const FIG4_THETA2: f64 = 0.1;
pub const FIG5_THETA2: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Custom,
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Custom => "custom",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementKind {
    Direct,
    Spade,
    Random,
}

impl MeasurementKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MeasurementKind::Direct => "direct",
            MeasurementKind::Spade => "spade",
            MeasurementKind::Random => "random",
        }
    }
}

/// `"adaptive"` or a fixed number of Hermite-Gaussian modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CutoffSetting {
    Fixed(usize),
    Named(AdaptiveTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdaptiveTag {
    Adaptive,
}

impl CutoffSetting {
    pub fn mode_cutoff(&self) -> ModeCutoff {
        match self {
            CutoffSetting::Fixed(n) => ModeCutoff::Fixed(*n),
            CutoffSetting::Named(AdaptiveTag::Adaptive) => ModeCutoff::Adaptive,
        }
    }
}

/// Quadrature controls; keys missing from the file keep their defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadSettings {
    pub truncation_radius: f64,
    pub panel_count: usize,
    pub nodes_per_panel: usize,
    pub abs_tolerance: f64,
}

impl Default for QuadSettings {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        Self {
            truncation_radius: q.truncation_radius,
            panel_count: q.panel_count,
            nodes_per_panel: q.nodes_per_panel,
            abs_tolerance: q.abs_tolerance,
        }
    }
}

impl From<QuadSettings> for QuadratureSpec {
    fn from(q: QuadSettings) -> Self {
        QuadratureSpec {
            truncation_radius: q.truncation_radius,
            panel_count: q.panel_count,
            nodes_per_panel: q.nodes_per_panel,
            abs_tolerance: q.abs_tolerance,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GridSpec {
    Range(String),
    List(Vec<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    sigma: Option<Spanned<f64>>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    n_random: Option<Spanned<usize>>,
    mode_cutoff: Option<CutoffSetting>,
    frontier_samples: Option<Spanned<usize>>,
    quadrature: Option<Spanned<QuadSettings>>,
    fig1: Option<SweepSection>,
    fig2: Option<SweepSection>,
    fig3: Option<Fig3Section>,
    fig4: Option<Fig4Section>,
    fig5: Option<Fig5Section>,
    custom: Option<CustomSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    theta2_grid: Option<Spanned<GridSpec>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Fig3Section {
    panels: Option<Spanned<GridSpec>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Fig4Section {
    theta2: Option<Spanned<f64>>,
    theta1_grid: Option<Spanned<GridSpec>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Fig5Section {
    theta2: Option<Spanned<f64>>,
    theta1: Option<Spanned<f64>>,
    n_random: Option<Spanned<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomSection {
    theta1_grid: Option<Spanned<GridSpec>>,
    theta2_grid: Option<Spanned<GridSpec>>,
    measurements: Option<Spanned<Vec<MeasurementKind>>>,
    n_random: Option<Spanned<usize>>,
    psf_file: Option<Spanned<PathBuf>>,
}

/// Command-line values; any that are set win over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub sigma: Option<f64>,
    pub out: Option<PathBuf>,
    pub n_random: Option<usize>,
    pub grid: Option<String>,
}

/// Fully resolved settings for one run; echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub figure_id: FigureId,
    pub sigma: f64,
    /// θ₁/σ values.
    pub theta1_grid: Vec<f64>,
    /// θ₂/σ values (the panel list for fig3).
    pub theta2_grid: Vec<f64>,
    pub n_random: usize,
    pub seed: u64,
    pub mode_cutoff: CutoffSetting,
    pub output_dir: PathBuf,
    pub quad: QuadSettings,
    pub frontier_samples: usize,
    pub measurements: Vec<MeasurementKind>,
    pub psf_file: Option<PathBuf>,
}

/// Maps a byte offset into `text` to a 1-based line number.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line<T>(&self, s: &Spanned<T>) -> Option<usize> {
        Some(line_of(self.text, s.span().start))
    }

    fn grid(&self, field: &str, spec: &Spanned<GridSpec>) -> LabResult<Vec<f64>> {
        let values = match spec.get_ref() {
            GridSpec::Range(text) => parse_range(text),
            GridSpec::List(values) => Ok(values.clone()),
        };
        values
            .and_then(|v| check_grid(&v).map(|_| v))
            .map_err(|m| LabError::config(field, self.line(spec), m))
    }
}

fn default_grid(text: &str) -> Vec<f64> {
    parse_range(text).expect("built-in grid is well formed")
}

fn parse_file(text: &str) -> LabResult<FileConfig> {
    toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start));
        LabError::config("config", line, e.message().trim().to_string())
    })
}

impl ExperimentConfig {
    /// Reads `overrides.config` if given and resolves every setting for `figure`.
    pub fn load(figure: FigureId, overrides: &Overrides) -> LabResult<Self> {
        match &overrides.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    LabError::config(
                        "--config",
                        None,
                        format!("cannot read {}: {e}", path.display()),
                    )
                })?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                Self::from_toml(figure, &text, &base, overrides)
            }
            None => Self::from_toml(figure, "", Path::new(""), overrides),
        }
    }

    /// Resolves from config text; relative `psf_file` paths are taken relative to `base`.
    pub fn from_toml(figure: FigureId, text: &str, base: &Path, ov: &Overrides) -> LabResult<Self> {
        let file = parse_file(text)?;
        let src = Source { text };

        let sigma = match (ov.sigma, &file.sigma) {
            (Some(s), _) => (s, None),
            (None, Some(s)) => (*s.get_ref(), src.line(s)),
            (None, None) => (1.0, None),
        };
        if !(sigma.0.is_finite() && sigma.0 > 0.0) {
            return Err(LabError::config(
                "sigma",
                sigma.1,
                format!("must be positive, got {}", sigma.0),
            ));
        }

        let quad = match &file.quadrature {
            Some(q) => {
                let settings = *q.get_ref();
                QuadratureSpec::from(settings)
                    .validate()
                    .map_err(|e| LabError::config("quadrature", src.line(q), e.to_string()))?;
                settings
            }
            None => QuadSettings::default(),
        };

        let frontier_samples = match &file.frontier_samples {
            Some(n) if *n.get_ref() < 2 => {
                return Err(LabError::config(
                    "frontier_samples",
                    src.line(n),
                    "need at least 2",
                ));
            }
            Some(n) => *n.get_ref(),
            None => DEFAULT_FRONTIER_SAMPLES,
        };

        let mut n_random = file.n_random.as_ref().map(|n| (*n.get_ref(), src.line(n)));
        let grid_flag = |field: &str| -> LabResult<Option<Vec<f64>>> {
            ov.grid
                .as_deref()
                .map(|g| {
                    parse_range(g)
                        .and_then(|v| check_grid(&v).map(|_| v))
                        .map_err(|m| LabError::config(format!("--grid ({field})"), None, m))
                })
                .transpose()
        };
        let pick = |flag: Option<Vec<f64>>,
                    field: &str,
                    spec: Option<&Spanned<GridSpec>>,
                    default: &str| {
            match (flag, spec) {
                (Some(v), _) => Ok(v),
                (None, Some(s)) => src.grid(field, s),
                (None, None) => Ok(default_grid(default)),
            }
        };

        let mut theta1_grid = vec![0.0];
        let theta2_grid;
        let mut measurements = Vec::new();
        let mut psf_file = None;
        match figure {
            FigureId::Fig1 | FigureId::Fig2 => {
                let section = if figure == FigureId::Fig1 {
                    &file.fig1
                } else {
                    &file.fig2
                };
                let spec = section.as_ref().and_then(|s| s.theta2_grid.as_ref());
                let field = format!("{figure}.theta2_grid");
                let default = if figure == FigureId::Fig1 {
                    FIG1_GRID
                } else {
                    FIG2_GRID
                };
                theta2_grid = pick(grid_flag(&field)?, &field, spec, default)?;
            }
            FigureId::Fig3 => {
                let spec = file.fig3.as_ref().and_then(|s| s.panels.as_ref());
                theta2_grid = match (grid_flag("fig3.panels")?, spec) {
                    (Some(v), _) => v,
                    (None, Some(s)) => src.grid("fig3.panels", s)?,
                    (None, None) => FIG3_PANELS.to_vec(),
                };
            }
            FigureId::Fig4 => {
                let section = file.fig4.unwrap_or_default();
                theta2_grid = vec![section
                    .theta2
                    .as_ref()
                    .map_or(FIG4_THETA2, |t| *t.get_ref())];
                let line = section.theta2.as_ref().and_then(|t| src.line(t));
                check_separation("fig4.theta2", line, theta2_grid[0])?;
                theta1_grid = pick(
                    grid_flag("fig4.theta1_grid")?,
                    "fig4.theta1_grid",
                    section.theta1_grid.as_ref(),
                    FIG4_GRID,
                )?;
            }
            FigureId::Fig5 => {
                if ov.grid.is_some() {
                    return Err(LabError::config(
                        "--grid",
                        None,
                        "fig5 samples a single geometry and takes no grid",
                    ));
                }
                let section = file.fig5.unwrap_or_default();
                theta2_grid = vec![section
                    .theta2
                    .as_ref()
                    .map_or(FIG5_THETA2, |t| *t.get_ref())];
                let line = section.theta2.as_ref().and_then(|t| src.line(t));
                check_separation("fig5.theta2", line, theta2_grid[0])?;
                if let Some(t) = &section.theta1 {
                    if !t.get_ref().is_finite() {
                        return Err(LabError::config(
                            "fig5.theta1",
                            src.line(t),
                            "must be finite",
                        ));
                    }
                    theta1_grid = vec![*t.get_ref()];
                }
                if let Some(n) = &section.n_random {
                    n_random = Some((*n.get_ref(), src.line(n)));
                }
            }
            FigureId::Custom => {
                let section = file.custom.unwrap_or_default();
                theta2_grid = match (grid_flag("custom.theta2_grid")?, &section.theta2_grid) {
                    (Some(v), _) => v,
                    (None, Some(s)) => src.grid("custom.theta2_grid", s)?,
                    (None, None) => {
                        return Err(LabError::config(
                            "custom.theta2_grid",
                            None,
                            "custom runs need an explicit grid",
                        ))
                    }
                };
                theta1_grid = match &section.theta1_grid {
                    Some(s) => src.grid("custom.theta1_grid", s)?,
                    None => {
                        return Err(LabError::config(
                            "custom.theta1_grid",
                            None,
                            "custom runs need an explicit grid",
                        ))
                    }
                };
                let Some(m) = &section.measurements else {
                    return Err(LabError::config(
                        "custom.measurements",
                        None,
                        "select at least one of direct, spade, random",
                    ));
                };
                for &kind in m.get_ref() {
                    if !measurements.contains(&kind) {
                        measurements.push(kind);
                    }
                }
                if measurements.is_empty() {
                    return Err(LabError::config(
                        "custom.measurements",
                        src.line(m),
                        "select at least one of direct, spade, random",
                    ));
                }
                if let Some(n) = &section.n_random {
                    n_random = Some((*n.get_ref(), src.line(n)));
                }
                if let Some(p) = &section.psf_file {
                    if measurements.contains(&MeasurementKind::Spade) {
                        return Err(LabError::config(
                            "custom.psf_file",
                            src.line(p),
                            "SPADE is defined for the Gaussian PSF only; drop `spade` or the psf file",
                        ));
                    }
                    psf_file = Some(base.join(p.get_ref()));
                }
            }
        }
        if matches!(
            figure,
            FigureId::Fig1 | FigureId::Fig2 | FigureId::Fig3 | FigureId::Custom
        ) {
            for &t in &theta2_grid {
                check_separation(&format!("{figure} theta2 grid"), None, t)?;
            }
        }

        let n_random = match (ov.n_random, n_random) {
            (Some(n), _) => (n, None),
            (None, Some(n)) => n,
            (None, None) => (DEFAULT_N_RANDOM, None),
        };
        if n_random.0 == 0 {
            return Err(LabError::config(
                "n_random",
                n_random.1,
                "must be at least 1",
            ));
        }

        Ok(Self {
            figure_id: figure,
            sigma: sigma.0,
            theta1_grid,
            theta2_grid,
            n_random: n_random.0,
            seed: ov.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            mode_cutoff: file
                .mode_cutoff
                .unwrap_or(CutoffSetting::Named(AdaptiveTag::Adaptive)),
            output_dir: ov
                .out
                .clone()
                .or(file.output_dir)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            quad,
            frontier_samples,
            measurements,
            psf_file,
        })
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        self.quad.into()
    }
}

fn check_separation(field: &str, line: Option<usize>, t: f64) -> LabResult<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(LabError::config(
            field,
            line,
            format!("separations must be positive, got {t}"),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(figure: FigureId, text: &str, ov: &Overrides) -> LabResult<ExperimentConfig> {
        ExperimentConfig::from_toml(figure, text, Path::new("/cfg"), ov)
    }

    fn config_line(err: LabError) -> (String, Option<usize>) {
        match err {
            LabError::Config { field, line, .. } => (field, line),
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn defaults() {
        let ov = Overrides::default();
        let c = resolve(FigureId::Fig1, "", &ov).unwrap();
        assert_eq!(c.theta2_grid.len(), 160);
        assert_eq!((c.sigma, c.seed, c.n_random), (1.0, 0, 10_000));
        assert_eq!(c.output_dir, PathBuf::from("irtr-out"));
        let c = resolve(FigureId::Fig3, "", &ov).unwrap();
        assert_eq!(c.theta2_grid, FIG3_PANELS.to_vec());
        assert_eq!((c.theta2_grid[3], c.theta2_grid[7]), (2.0, 8.0));
        let c = resolve(FigureId::Fig4, "", &ov).unwrap();
        assert_eq!(c.theta2_grid, vec![0.1]);
        assert_eq!(c.theta1_grid.len(), 101);
        let c = resolve(FigureId::Fig5, "", &ov).unwrap();
        assert_eq!(
            (c.theta1_grid.clone(), c.theta2_grid.clone()),
            (vec![0.0], vec![0.1])
        );
        assert_eq!(c.frontier_samples, 512);
        assert_eq!(c.mode_cutoff.mode_cutoff(), ModeCutoff::Adaptive);
    }

    #[test]
    fn file_values_and_flag_precedence() {
        let text = r#"
sigma = 2.0
seed = 9
n_random = 50
mode_cutoff = 40

[fig2]
theta2_grid = "0.5:1.5:0.5"

[fig5]
n_random = 70
"#;
        let c = resolve(FigureId::Fig2, text, &Overrides::default()).unwrap();
        assert_eq!((c.sigma, c.seed, c.n_random), (2.0, 9, 50));
        assert_eq!(c.theta2_grid, vec![0.5, 1.0, 1.5]);
        assert_eq!(c.mode_cutoff.mode_cutoff(), ModeCutoff::Fixed(40));
        assert_eq!(
            resolve(FigureId::Fig5, text, &Overrides::default())
                .unwrap()
                .n_random,
            70
        );

        let ov = Overrides {
            seed: Some(1),
            sigma: Some(0.5),
            n_random: Some(3),
            grid: Some("1:2:1".into()),
            out: Some("elsewhere".into()),
            ..Default::default()
        };
        let c = resolve(FigureId::Fig2, text, &ov).unwrap();
        assert_eq!((c.sigma, c.seed, c.n_random), (0.5, 1, 3));
        assert_eq!(c.theta2_grid, vec![1.0, 2.0]);
        assert_eq!(c.output_dir, PathBuf::from("elsewhere"));
    }

    #[test]
    fn partial_quadrature_section() {
        let c = resolve(
            FigureId::Fig1,
            "[quadrature]\nabs_tolerance = 1e-9\n",
            &Overrides::default(),
        )
        .unwrap();
        assert_eq!(c.quad.abs_tolerance, 1e-9);
        assert_eq!(
            c.quad.nodes_per_panel,
            QuadSettings::default().nodes_per_panel
        );
        let bad = "seed = 2\n[quadrature]\ntruncation_radius = 3.0\n";
        let (field, line) =
            config_line(resolve(FigureId::Fig1, bad, &Overrides::default()).unwrap_err());
        assert_eq!((field.as_str(), line), ("quadrature", Some(2)));
    }

    #[test]
    fn grid_lists_are_accepted() {
        let text = "[fig3]\npanels = [0.3, 2.0, 7.5]\n";
        let c = resolve(FigureId::Fig3, text, &Overrides::default()).unwrap();
        assert_eq!(c.theta2_grid, vec![0.3, 2.0, 7.5]);
    }

    #[test]
    fn diagnostics_name_field_and_line() {
        let text = "sigma = 1.0\n\n[fig4]\ntheta1_grid = [0.0, 1.0, 0.5]\n";
        assert_eq!(
            config_line(resolve(FigureId::Fig4, text, &Overrides::default()).unwrap_err()),
            ("fig4.theta1_grid".to_string(), Some(4))
        );
        let text = "sigma = -1.0\n";
        assert_eq!(
            config_line(resolve(FigureId::Fig1, text, &Overrides::default()).unwrap_err()),
            ("sigma".to_string(), Some(1))
        );
        let text = "seed = 1\n[fig1]\ntheta2_grid = \"0:1:0.1\"\n";
        let (field, _) =
            config_line(resolve(FigureId::Fig1, text, &Overrides::default()).unwrap_err());
        assert_eq!(field, "fig1 theta2 grid");
        let text = "seed = 1\nsigmaa = 2\n";
        let (_, line) =
            config_line(resolve(FigureId::Fig1, text, &Overrides::default()).unwrap_err());
        assert_eq!(line, Some(2));
        let text = "n_random = 0\n";
        let (field, line) =
            config_line(resolve(FigureId::Fig5, text, &Overrides::default()).unwrap_err());
        assert_eq!((field.as_str(), line), ("n_random", Some(1)));
    }

    #[test]
    fn custom_requires_explicit_selection() {
        let ov = Overrides::default();
        assert!(resolve(FigureId::Custom, "", &ov).is_err());
        let text = "[custom]\ntheta1_grid = [0.0]\ntheta2_grid = \"0.5:1:0.5\"\nmeasurements = [\"direct\", \"random\", \"direct\"]\nn_random = 4\npsf_file = \"psf.txt\"\n";
        let c = resolve(FigureId::Custom, text, &ov).unwrap();
        assert_eq!(
            c.measurements,
            vec![MeasurementKind::Direct, MeasurementKind::Random]
        );
        assert_eq!(c.n_random, 4);
        assert_eq!(c.psf_file, Some(PathBuf::from("/cfg/psf.txt")));
        let spade = text.replace("\"random\"", "\"spade\"");
        let (field, line) = config_line(resolve(FigureId::Custom, &spade, &ov).unwrap_err());
        assert_eq!((field.as_str(), line), ("custom.psf_file", Some(6)));
        let unknown = text.replace("\"random\"", "\"heterodyne\"");
        assert!(resolve(FigureId::Custom, &unknown, &ov).is_err());
    }

    #[test]
    fn fig5_rejects_grid_flag() {
        let ov = Overrides {
            grid: Some("0:1:0.5".into()),
            ..Default::default()
        };
        assert!(resolve(FigureId::Fig5, "", &ov).is_err());
        let bad = Overrides {
            grid: Some("1:0:0.5".into()),
            ..Default::default()
        };
        assert!(resolve(FigureId::Fig4, "", &bad).is_err());
    }
}
