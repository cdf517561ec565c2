//! Command runner behind the `spacecurve` binary.
//!
//! Every command computes its artifacts in memory first; files are written
//! afterwards, one at a time, in a fixed order.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolute::{
    evolute_flattening_asymptotics, evolute_jet, evolute_twisting_series, evolute_vertex_series, CoefficientReport,
};
use crate::features::{default_samples, scan_features, FeatureKind, MIN_SAMPLES};
use crate::geometry::Vec3;
use crate::io::{render_svg, write_feature_csv, write_json, write_loci_csv, write_polyline_csv, LabeledPolyline};
use crate::model::{load_spec, FamilySlice, Model, ParametricCurve, ParametricFamily};
use crate::strata::{
    frs_genericity, stratum_values, tangent_cone_against, trace_bifurcation, GenericityReport, JetCoefficients,
    Stratum, StratumLocus, StratumValues, TangentCone, DEFAULT_GRID, LOCUS_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Evolute,
    Bifurcation,
    Strata,
    Jet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            _ => Err(format!("unknown format `{s}`, expected csv, json or svg")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        })
    }
}

/// Feature kinds that have an evolute local-model report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFeature {
    Flattening,
    Vertex,
    Twisting,
}

impl FromStr for ReportFeature {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "flattening" => Ok(Self::Flattening),
            "vertex" => Ok(Self::Vertex),
            "twisting" => Ok(Self::Twisting),
            _ => Err(format!("unknown feature `{s}`, expected flattening, vertex or twisting")),
        }
    }
}

impl ReportFeature {
    fn kind(self) -> FeatureKind {
        match self {
            Self::Flattening => FeatureKind::Flattening,
            Self::Vertex => FeatureKind::Vertex,
            Self::Twisting => FeatureKind::Twisting,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub input: PathBuf,
    pub range: Option<(f64, f64)>,
    pub samples: Option<usize>,
    /// Residual bound: feature residuals for `analyze`, relative locus
    /// residuals for `bifurcation`.
    pub tol: Option<f64>,
    pub degree: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub feature: Option<ReportFeature>,
    pub stratum: Option<Stratum>,
    pub grid: Option<usize>,
    /// Parameter for `strata` and `jet`, and the feature location for `evolute`.
    pub at: Option<f64>,
    /// Family parameter selecting the curve `γ_s`.
    pub s: Option<[f64; 2]>,
}

impl RunConfig {
    pub fn new(command: Command, input: impl Into<PathBuf>) -> Self {
        Self {
            command,
            input: input.into(),
            range: None,
            samples: None,
            tol: None,
            degree: None,
            out: None,
            format: Format::Csv,
            feature: None,
            stratum: None,
            grid: None,
            at: None,
            s: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(n) = self.samples {
            if n < MIN_SAMPLES {
                return Err(Error::Schema(format!("--samples must be at least {MIN_SAMPLES}, got {n}")));
            }
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Schema(format!("--tol must be positive, got {t}")));
            }
        }
        if let Some((lo, hi)) = self.range {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Schema(format!("--range needs LO < HI, got {lo}:{hi}")));
            }
        }
        if let Some(g) = self.grid {
            if g < 4 {
                return Err(Error::Schema(format!("--grid must be at least 4, got {g}")));
            }
        }
        Ok(())
    }
}

/// Text or file produced by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    /// `None` for standard output.
    pub path: Option<PathBuf>,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOutcome {
    pub artifacts: Vec<Artifact>,
    /// Diagnostics for the error stream.
    pub messages: Vec<String>,
}

impl RunOutcome {
    pub fn stdout(&self) -> String {
        self.artifacts
            .iter()
            .filter(|a| a.path.is_none())
            .map(|a| a.contents.as_str())
            .collect()
    }
}

/// Runs the command and writes its files; standard-output artifacts are left
/// to the caller.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let outcome = compute(config)?;
    for a in &outcome.artifacts {
        if let Some(p) = &a.path {
            std::fs::write(p, &a.contents).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        }
    }
    Ok(outcome)
}

/// Runs the command without touching the file system beyond reading the input.
pub fn compute(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let text = std::fs::read_to_string(&config.input)
        .map_err(|e| Error::Io(format!("{}: {e}", config.input.display())))?;
    let model = load_spec(&text)?;
    match config.command {
        Command::Analyze => analyze(config, &model),
        Command::Evolute => evolute(config, &model),
        Command::Bifurcation => bifurcation(config, &model),
        Command::Strata => strata(config, &model),
        Command::Jet => jet(config, &model),
    }
}

fn with_curve<T>(config: &RunConfig, model: &Model, f: impl FnOnce(&dyn ParametricCurve) -> Result<T>) -> Result<T> {
    match model {
        Model::Curve(c) => {
            if config.s.is_some() {
                return Err(Error::Schema("--s applies to families only".into()));
            }
            f(c)
        }
        Model::Family(fam) => f(&FamilySlice {
            family: fam,
            s: config.s.unwrap_or([0.0; 2]),
        }),
    }
}

fn text<F: FnOnce(&mut Vec<u8>) -> Result<()>>(f: F) -> Result<String> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

fn single(config: &RunConfig, contents: String) -> Artifact {
    Artifact {
        path: config.out.clone(),
        contents,
    }
}

fn no_svg(command: &str) -> Error {
    Error::Schema(format!("`{command}` has no svg output; use csv or json"))
}

fn analyze(config: &RunConfig, model: &Model) -> Result<RunOutcome> {
    with_curve(config, model, |curve| {
        let range = config.range.unwrap_or_else(|| curve.domain());
        let samples = config.samples.unwrap_or_else(|| default_samples(range));
        let mut scan = scan_features(curve, range, samples)?;
        let mut messages = Vec::new();
        if let Some(tol) = config.tol {
            let before = scan.features.len();
            scan.features
                .retain(|f| f.kind == FeatureKind::Degenerate || f.residual <= tol);
            if scan.features.len() < before {
                messages.push(format!("dropped {} features with residual above {tol:e}", before - scan.features.len()));
            }
        }
        for irr in &scan.irregular {
            messages.push(format!("no Frenet frame on [{}, {}]: {}", irr.lo, irr.hi, irr.error));
        }
        let contents = match config.format {
            Format::Csv => text(|b| write_feature_csv(b, &scan))?,
            Format::Json => text(|b| write_json(b, &scan))?,
            Format::Svg => return Err(no_svg("analyze")),
        };
        Ok(RunOutcome {
            artifacts: vec![single(config, contents)],
            messages,
        })
    })
}

#[derive(Debug, Serialize)]
struct EvolutePoint {
    t: f64,
    x: f64,
    y: f64,
    z: f64,
}

#[derive(Debug, Serialize)]
struct EvoluteOutput<'a> {
    polyline: Vec<EvolutePoint>,
    report: Option<&'a CoefficientReport>,
}

fn local_report(curve: &dyn ParametricCurve, kind: ReportFeature, t0: f64) -> Result<CoefficientReport> {
    match kind {
        ReportFeature::Flattening => evolute_flattening_asymptotics(&curve, t0),
        ReportFeature::Vertex => evolute_vertex_series(&curve, t0),
        ReportFeature::Twisting => evolute_twisting_series(&curve, t0),
    }
}

fn evolute(config: &RunConfig, model: &Model) -> Result<RunOutcome> {
    with_curve(config, model, |curve| {
        let range = config.range.unwrap_or_else(|| curve.domain());
        let samples = config.samples.unwrap_or_else(|| default_samples(range));
        let mut messages = Vec::new();
        let mut points: Vec<(f64, Vec3)> = Vec::with_capacity(samples + 1);
        let mut first_error = None;
        let mut skipped = 0usize;
        for i in 0..=samples {
            let t = range.0 + (range.1 - range.0) * i as f64 / samples as f64;
            match evolute_jet(&curve, t, 0) {
                Ok(j) if j.value().iter().all(|v| v.is_finite()) => points.push((t, j.value())),
                Ok(_) => skipped += 1,
                Err(e) => {
                    skipped += 1;
                    first_error.get_or_insert(e);
                }
            }
        }
        if points.is_empty() {
            return Err(first_error.unwrap_or(Error::EmptyPlot));
        }
        if skipped > 0 {
            messages.push(format!("evolute undefined at {skipped} of {} samples", samples + 1));
        }
        let report = match config.feature {
            None => None,
            Some(kind) => {
                let t0 = match config.at {
                    Some(t) => t,
                    None => {
                        let scan = scan_features(curve, range, samples)?;
                        let found = scan.of_kind(kind.kind()).next().map(|f| f.t);
                        found.ok_or_else(|| {
                            Error::Schema(format!("no {} in [{}, {}]", kind.kind().name(), range.0, range.1))
                        })?
                    }
                };
                Some(local_report(curve, kind, t0)?)
            }
        };
        let mut artifacts = Vec::new();
        match config.format {
            Format::Csv => {
                artifacts.push(single(config, text(|b| write_polyline_csv(b, &points))?));
                if let Some(r) = &report {
                    artifacts.push(Artifact {
                        path: config.out.as_ref().map(|p| sibling(p, "report.json")),
                        contents: text(|b| write_json(b, r))?,
                    });
                }
            }
            Format::Json => {
                let out = EvoluteOutput {
                    polyline: points
                        .iter()
                        .map(|(t, p)| EvolutePoint { t: *t, x: p.x, y: p.y, z: p.z })
                        .collect(),
                    report: report.as_ref(),
                };
                artifacts.push(single(config, text(|b| write_json(b, &out))?));
            }
            Format::Svg => {
                let mut lines = vec![LabeledPolyline::new(
                    "evolute",
                    points.iter().map(|(_, p)| [p.x, p.y]).collect(),
                )];
                let curve_xy: Vec<[f64; 2]> = points
                    .iter()
                    .filter_map(|(t, _)| curve.position(*t).ok().map(|p| [p.x, p.y]))
                    .collect();
                lines.push(LabeledPolyline::new("curve", curve_xy));
                artifacts.push(single(config, render_svg(&lines, None)?));
            }
        }
        Ok(RunOutcome { artifacts, messages })
    })
}

/// `path` with its extension replaced by `ext`.
fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

#[derive(Debug, Serialize)]
pub struct LocusSummary {
    pub stratum: Stratum,
    pub points: usize,
    pub tangent_direction: Option<[f64; 2]>,
    pub max_relative_residual: f64,
    pub nearest_to_origin: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct BifurcationReport {
    pub genericity: GenericityReport,
    pub loci: Vec<LocusSummary>,
    /// Tangent cones with contact data against the `F` tangent line.
    pub cones: BTreeMap<String, TangentCone>,
    pub cone_errors: BTreeMap<String, String>,
}

fn bifurcation(config: &RunConfig, model: &Model) -> Result<RunOutcome> {
    let Model::Family(family) = model else {
        return Err(Error::Schema("`bifurcation` needs a family input".into()));
    };
    let grid = config.grid.unwrap_or(DEFAULT_GRID);
    let s_box = family.s_box();
    let bound = config.tol.unwrap_or(LOCUS_TOL);
    let strata: Vec<Stratum> = match config.stratum {
        Some(s) => vec![s],
        None => Stratum::ALL.to_vec(),
    };
    let mut messages = Vec::new();
    let mut loci: Vec<StratumLocus> = Vec::new();
    for st in &strata {
        let mut l = trace_bifurcation(family, *st, s_box, grid)?;
        let keep: Vec<bool> = l
            .residuals
            .iter()
            .zip(&l.scales)
            .map(|(r, s)| r.abs() <= bound * s.max(f64::MIN_POSITIVE))
            .collect();
        let dropped = keep.iter().filter(|k| !**k).count();
        if dropped > 0 {
            messages.push(format!("{}: dropped {dropped} points above residual bound {bound:e}", st.name()));
            retain_mask(&mut l.polyline, &keep);
            retain_mask(&mut l.residuals, &keep);
            retain_mask(&mut l.scales, &keep);
            retain_mask(&mut l.t_star, &keep);
        }
        loci.push(l);
    }
    let genericity = frs_genericity(family)?;
    if !genericity.generic {
        messages.push(format!("family is not FRS-generic: {}", genericity.failures.join("; ")));
    }

    let reference = match loci.iter().find(|l| l.stratum == Stratum::F) {
        Some(f) => Some(f.clone()),
        None if config.stratum.is_some() => Some(trace_bifurcation(family, Stratum::F, s_box, grid)?),
        None => None,
    };
    let mut cones = BTreeMap::new();
    let mut cone_errors = BTreeMap::new();
    if let Some(f) = reference {
        match f.tangent_direction {
            Some(dir) => {
                for l in loci.iter().filter(|l| l.stratum != Stratum::C) {
                    match tangent_cone_against(l, dir) {
                        Ok(c) => {
                            cones.insert(l.stratum.name().to_string(), c);
                        }
                        Err(e) => {
                            cone_errors.insert(l.stratum.name().to_string(), e.to_string());
                        }
                    }
                }
            }
            None => {
                cone_errors.insert("F".into(), "F locus has no tangent at the origin".into());
            }
        }
    }
    let report = BifurcationReport {
        genericity,
        loci: loci
            .iter()
            .map(|l| LocusSummary {
                stratum: l.stratum,
                points: l.polyline.len(),
                tangent_direction: l.tangent_direction,
                max_relative_residual: l.max_relative_residual(),
                nearest_to_origin: l.nearest_to_origin(),
            })
            .collect(),
        cones,
        cone_errors,
    };

    let lines: Vec<LabeledPolyline> = loci.iter().map(LabeledPolyline::from).collect();
    let csv = text(|b| write_loci_csv(b, &loci))?;
    let json = text(|b| write_json(b, &report))?;
    let svg = render_svg(&lines, None);
    let artifacts = match &config.out {
        Some(p) => {
            let mut v = vec![
                Artifact {
                    path: Some(sibling(p, "csv")),
                    contents: csv,
                },
                Artifact {
                    path: Some(sibling(p, "json")),
                    contents: json,
                },
            ];
            match svg {
                Ok(s) => v.push(Artifact {
                    path: Some(sibling(p, "svg")),
                    contents: s,
                }),
                Err(e) => messages.push(format!("no diagram: {e}")),
            }
            v
        }
        None => vec![Artifact {
            path: None,
            contents: match config.format {
                Format::Csv => csv,
                Format::Json => json,
                Format::Svg => svg?,
            },
        }],
    };
    Ok(RunOutcome { artifacts, messages })
}

fn retain_mask<T>(v: &mut Vec<T>, keep: &[bool]) {
    let mut i = 0;
    v.retain(|_| {
        i += 1;
        keep[i - 1]
    });
}

#[derive(Debug, Serialize)]
struct StrataOutput {
    t: f64,
    s: Option<[f64; 2]>,
    coefficients: JetCoefficients,
    values: StratumValues,
}

fn strata(config: &RunConfig, model: &Model) -> Result<RunOutcome> {
    let t = config
        .at
        .ok_or_else(|| Error::Schema("`strata` needs --at T".into()))?;
    let degree = config.degree.unwrap_or(4).max(4);
    let coefficients = with_curve(config, model, |c| JetCoefficients::from_jets(&c.jets(t, degree)?))?;
    let values = stratum_values(&coefficients);
    let out = StrataOutput {
        t,
        s: config.s,
        coefficients,
        values,
    };
    let contents = match config.format {
        Format::Json => text(|b| write_json(b, &out))?,
        Format::Csv => {
            let v = &out.values;
            let mut rows: Vec<(&str, f64)> = vec![
                ("c_residual_a1", v.c_residual[0]),
                ("c_residual_b1", v.c_residual[1]),
                ("c_residual_c1", v.c_residual[2]),
                ("f_value", v.f_value),
                ("xi1", v.xi[0]),
                ("xi2", v.xi[1]),
                ("xi3", v.xi[2]),
                ("v_linear_part", v.v_linear_part),
                ("t_dot", v.t_components[0]),
                ("t_f", v.t_components[1]),
                ("t_quadric_squared", v.t_components[2]),
                ("t_leading", v.t_leading),
            ];
            rows.insert(0, ("t", t));
            text(|b| crate::io::write_named_values_csv(b, &rows))?
        }
        Format::Svg => return Err(no_svg("strata")),
    };
    Ok(RunOutcome {
        artifacts: vec![single(config, contents)],
        messages: Vec::new(),
    })
}

#[derive(Debug, Serialize)]
struct JetOutput {
    t: f64,
    degree: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
}

fn jet(config: &RunConfig, model: &Model) -> Result<RunOutcome> {
    let t = config.at.ok_or_else(|| Error::Schema("`jet` needs --at T".into()))?;
    let degree = config.degree.unwrap_or(crate::jet::DEFAULT_DEGREE);
    let j = with_curve(config, model, |c| c.jets(t, degree))?;
    let out = JetOutput {
        t,
        degree,
        x: j.0[0].coeffs().to_vec(),
        y: j.0[1].coeffs().to_vec(),
        z: j.0[2].coeffs().to_vec(),
    };
    let contents = match config.format {
        Format::Json => text(|b| write_json(b, &out))?,
        Format::Csv => text(|b| crate::io::write_jet_csv(b, &[&out.x, &out.y, &out.z]))?,
        Format::Svg => return Err(no_svg("jet")),
    };
    Ok(RunOutcome {
        artifacts: vec![single(config, contents)],
        messages: Vec::new(),
    })
}
