//! End-to-end batch run: index and disaster metrics, integration orders,
//! then per model a lag search, ARDL fit, bounds test, error-correction
//! form and diagnostics.
//!
//! Models share only the read-only analysis frame, so they run in parallel
//! and dropping one leaves the others' numbers unchanged.

mod config;
mod fixture;
mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    default_models, BoundsOptions, DataPaths, DisasterOptions, ModelConfig, OutputOptions, PipelineConfig,
    UnitRootStage, DEFAULT_CONTROLS, DISASTER_SERIES, ENV_OUT_DIR, ENV_SEED,
};
pub use fixture::{
    fixture_config, generate_fixture, Fixture, FIXTURE_CONFIG, FIXTURE_EVENTS, FIXTURE_INDICATORS, FIXTURE_LEN,
    FIXTURE_MACRO, FIXTURE_RHO, FIXTURE_SEED, FIXTURE_START,
};
pub use report::{
    fmt3, format_table, render_json, render_report, render_text, slug, stars_for_level, stars_for_p, ReportFormat,
    STAR_NOTE,
};

use crate::ardl::{bounds_test, ecm, fit_ardl, select_lags, ArdlSpec, BoundsResult, Estimate};
use crate::diagnostics::{run_diagnostics, DiagnosticsReport};
use crate::error::{Error, Precondition, Result};
use crate::index::{
    build_index, disaster_metric, events_by_year, load_disaster_events, standardize, DisasterEvent, DisasterType,
    IndexModel,
};
use crate::stats::Descriptives;
use crate::timeseries::{align, load_csv, Frame, Series};
use crate::unitroot::{unit_root_battery, DeterministicSpec, IntegrationOrder, UnitRootBattery};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSummary {
    pub model: IndexModel,
    pub series: Series,
}

/// Unit-root batteries for one variable under both deterministic specs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRootRow {
    pub variable: String,
    pub intercept: UnitRootBattery,
    pub trend_and_intercept: UnitRootBattery,
    /// Order from the configured classification spec.
    pub order: IntegrationOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub name: String,
    pub spec: ArdlSpec,
    /// First and last year of the effective sample.
    pub sample: (i32, i32),
    pub nobs: usize,
    pub r2: f64,
    pub bounds: BoundsResult,
    pub short_run: Vec<Estimate>,
    pub ect: Estimate,
    pub long_run: Vec<Estimate>,
    pub constant: Estimate,
    pub ect_in_range: bool,
    /// Levels-fit diagnostics; stability paths are labelled by year.
    pub diagnostics: DiagnosticsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub seed: u64,
    pub strict: bool,
    pub sample: (i32, i32),
    pub index: IndexSummary,
    pub descriptives: Vec<Descriptives>,
    pub unit_roots: Vec<UnitRootRow>,
    pub models: Vec<ModelReport>,
    pub warnings: Vec<String>,
}

impl ReportBundle {
    pub fn model(&self, name: &str) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.name == name)
    }
}

/// Index, disaster series and macro columns on the common year range.
#[derive(Debug, Clone)]
pub struct AnalysisData {
    pub index: IndexSummary,
    pub frame: Frame,
}

fn disaster_filter(name: &str) -> Option<DisasterType> {
    match name {
        "QUAKE" => Some(DisasterType::Quake),
        "STORM" => Some(DisasterType::Storm),
        "FLOOD" => Some(DisasterType::Flood),
        _ => None,
    }
}

/// Builds the analysis frame from already-loaded inputs.
pub fn prepare_data(
    config: &PipelineConfig,
    indicators: &Frame,
    macro_data: &Frame,
    events: &[DisasterEvent],
) -> Result<AnalysisData> {
    let joined = align(&[indicators.clone(), macro_data.clone()]).map_err(|e| e.at_stage(None, "align"))?;
    let (model, series) = build_index(&joined, &config.index).map_err(|e| e.at_stage(None, "index"))?;

    let opts = &config.disasters;
    let denominator = joined
        .column(opts.denominator())
        .map_err(|e| e.at_stage(None, "disasters"))?;
    let mut columns = vec![series.clone()];
    for name in DISASTER_SERIES {
        let grouped = events_by_year(
            events,
            disaster_filter(name),
            opts.metric,
            joined.start_year(),
            joined.nrows(),
        );
        let build = || -> Result<Series> {
            let raw = disaster_metric(opts.metric, &grouped, denominator)?.renamed(name);
            if opts.standardize {
                standardize(&raw)
            } else {
                Ok(raw)
            }
        };
        columns.push(build().map_err(|e| e.at_stage(Some(name), "disasters"))?);
    }
    let skip: Vec<&str> = config.index.indicators.iter().map(String::as_str).collect();
    for c in joined.columns() {
        if !skip.contains(&c.name()) {
            columns.push(c.clone());
        }
    }
    let frame = Frame::new(columns).map_err(|e| e.at_stage(None, "disasters"))?;
    Ok(AnalysisData {
        index: IndexSummary { model, series },
        frame,
    })
}

/// Dependents first, then regressors, each in order of first appearance.
pub fn model_variables(config: &PipelineConfig) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut add = |v: &str| {
        if !out.iter().any(|o| o == v) {
            out.push(v.to_owned());
        }
    };
    for m in &config.models {
        add(m.dependent(&config.index.name));
    }
    for m in &config.models {
        for r in &m.regressors {
            add(r);
        }
    }
    out
}

/// Loads the configured files and runs every stage.
pub fn run_pipeline(config: &PipelineConfig) -> Result<ReportBundle> {
    config.validate()?;
    let d = &config.data;
    let load = |path| load_csv(path, &d.year_column).map_err(|e| e.at_stage(None, "load"));
    let indicators = load(&d.indicators)?;
    let macro_data = load(&d.macro_data)?;
    let events = load_disaster_events(&d.events).map_err(|e| e.at_stage(None, "load"))?;
    run_on_data(config, &indicators, &macro_data, &events)
}

/// [`run_pipeline`] on in-memory inputs.
pub fn run_on_data(
    config: &PipelineConfig,
    indicators: &Frame,
    macro_data: &Frame,
    events: &[DisasterEvent],
) -> Result<ReportBundle> {
    config.validate()?;
    let data = prepare_data(config, indicators, macro_data, events)?;
    let frame = &data.frame;
    let variables = model_variables(config);
    for v in &variables {
        frame.column(v).map_err(|e| e.at_stage(None, "resolve"))?;
    }

    let descriptives = variables
        .iter()
        .map(|v| Descriptives::of(v.clone(), frame.column(v).expect("resolved").values()))
        .collect();

    let unit_roots = variables
        .par_iter()
        .map(|v| unit_root_row(frame.column(v).expect("resolved"), config))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage(None, "unit_root"))?;

    let mut warnings = Vec::new();
    if let Some(row) = unit_roots.iter().find(|r| r.order == IntegrationOrder::I2Plus) {
        return Err(
            Error::PreconditionViolated(Precondition::I2Variable(row.variable.clone())).at_stage(None, "unit_root"),
        );
    }
    for m in &config.models {
        let dep = m.dependent(&config.index.name);
        let row = unit_roots
            .iter()
            .find(|r| r.variable == dep)
            .expect("every variable tested");
        if row.order == IntegrationOrder::I0 {
            if config.output.strict {
                return Err(
                    Error::PreconditionViolated(Precondition::DependentNotI1(dep.to_owned()))
                        .at_stage(Some(&m.name), "unit_root"),
                );
            }
            let w = format!("{}: dependent variable {dep} is I(0) in levels", m.name);
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
    }

    let models = config
        .models
        .par_iter()
        .map(|m| run_model(frame, m, config))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    Ok(ReportBundle {
        seed: config.output.seed,
        strict: config.output.strict,
        sample: frame.year_range(),
        index: data.index,
        descriptives,
        unit_roots,
        models,
        warnings,
    })
}

fn unit_root_row(s: &Series, config: &PipelineConfig) -> Result<UnitRootRow> {
    let o = &config.unit_root.options;
    let intercept = unit_root_battery(s, DeterministicSpec::Intercept, o)?;
    let trend_and_intercept = unit_root_battery(s, DeterministicSpec::TrendAndIntercept, o)?;
    let order = match config.unit_root.classify_spec {
        DeterministicSpec::Intercept => intercept.order,
        DeterministicSpec::TrendAndIntercept => trend_and_intercept.order,
    };
    Ok(UnitRootRow {
        variable: s.name().to_owned(),
        intercept,
        trend_and_intercept,
        order,
    })
}

/// One model's estimation chain on the shared analysis frame.
pub fn run_model(frame: &Frame, model: &ModelConfig, config: &PipelineConfig) -> Result<ModelReport> {
    let name = Some(model.name.as_str());
    let dep = model.dependent(&config.index.name);
    let spec = select_lags(frame, dep, &model.regressors, &config.lags)
        .map_err(|e| e.at_stage(name, "lag_search"))?
        .with_case(config.bounds.case);
    let fit = fit_ardl(&spec, frame).map_err(|e| e.at_stage(name, "fit"))?;
    let bounds = bounds_test(&fit, frame).map_err(|e| e.at_stage(name, "bounds"))?;
    let ec = ecm(&fit, frame).map_err(|e| e.at_stage(name, "ecm"))?;

    let mut diagnostics = run_diagnostics(&fit.fit, &fit.fit.response, &fit.design, &config.diagnostics)
        .map_err(|e| e.at_stage(name, "diagnostics"))?;
    let first = i64::from(fit.sample.0);
    let years = |t: &[i64]| t.iter().map(|i| first + i - 1).collect::<Vec<_>>();
    let cusum_years = years(&diagnostics.cusum.t);
    let cusumsq_years = years(&diagnostics.cusumsq.t);
    diagnostics.cusum = diagnostics.cusum.with_time_labels(cusum_years)?;
    diagnostics.cusumsq = diagnostics.cusumsq.with_time_labels(cusumsq_years)?;

    Ok(ModelReport {
        name: model.name.clone(),
        sample: fit.sample,
        nobs: fit.fit.nobs,
        r2: fit.fit.r2,
        spec: fit.spec,
        bounds,
        short_run: ec.short_run,
        ect: ec.ect,
        long_run: ec.long_run,
        constant: ec.constant,
        ect_in_range: ec.ect_in_range,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ardl::BoundsDecision;
    use crate::sim::{i2_process, replication_rng};

    fn fixture() -> (PipelineConfig, Fixture) {
        (fixture_config(FIXTURE_SEED), generate_fixture(FIXTURE_SEED).unwrap())
    }

    fn run(config: &PipelineConfig, f: &Fixture) -> Result<ReportBundle> {
        run_on_data(config, &f.indicators, &f.macro_data, &f.events)
    }

    #[test]
    fn fixture_run_completes_with_every_model() {
        let (config, f) = fixture();
        let b = run(&config, &f).unwrap();
        assert_eq!(b.models.len(), 4);
        assert_eq!(b.sample, (FIXTURE_START, FIXTURE_START + FIXTURE_LEN as i32 - 1));
        assert_eq!(b.descriptives.len(), 12);
        assert_eq!(b.unit_roots.len(), 12);
        for m in &b.models {
            assert_eq!(m.bounds.k, 8);
            assert!(m.ect.estimate < 0.0, "{}: ECT {}", m.name, m.ect.estimate);
            assert!(m.ect.pvalue < 0.05, "{}: ECT p {}", m.name, m.ect.pvalue);
            assert!(
                matches!(m.bounds.decision, BoundsDecision::Cointegrated(_)),
                "{}: {:?}",
                m.name,
                m.bounds
            );
            let years = &m.diagnostics.cusum.t;
            assert_eq!(*years.last().unwrap(), i64::from(m.sample.1));
        }
        let fsi = &b.descriptives[0];
        assert!(fsi.mean.abs() < 1e-8 && (fsi.sd - 1.0).abs() < 1e-8);
    }

    #[test]
    fn missing_file_names_the_path() {
        let mut config = fixture_config(1);
        config.data.macro_data = "/definitely/missing/macro.csv".into();
        config.data.indicators = std::env::temp_dir().join("nope-indicators-7f3a.csv");
        let err = run_pipeline(&config).unwrap_err();
        match err.root() {
            Error::FileNotFound(p) => assert_eq!(p, &config.data.indicators),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn doubly_integrated_dependent_is_rejected() {
        let (mut config, mut f) = fixture();
        let mut rng = replication_rng(77, 0);
        let y2 = i2_process(&mut rng, FIXTURE_LEN);
        f.macro_data
            .push(Series::new("Y2", FIXTURE_START, y2).unwrap())
            .unwrap();
        config.models.truncate(1);
        config.models[0].dependent = Some("Y2".into());
        let err = run(&config, &f).unwrap_err();
        assert!(err.is_precondition());
        assert!(matches!(
            err.root(),
            Error::PreconditionViolated(Precondition::I2Variable(v)) if v == "Y2"
        ));
    }

    #[test]
    fn stationary_dependent_warns_unless_strict() {
        let (mut config, mut f) = fixture();
        let mut rng = replication_rng(5, 0);
        let w = crate::sim::white_noise(&mut rng, FIXTURE_LEN);
        f.macro_data.push(Series::new("W", FIXTURE_START, w).unwrap()).unwrap();
        config.models.truncate(1);
        config.models[0].dependent = Some("W".into());
        let b = run(&config, &f).unwrap();
        assert!(b.warnings[0].contains("W is I(0)"));
        config.output.strict = true;
        let err = run(&config, &f).unwrap_err();
        assert!(matches!(
            err.root(),
            Error::PreconditionViolated(Precondition::DependentNotI1(_))
        ));
    }

    #[test]
    fn unknown_regressor_is_a_resolve_error() {
        let (mut config, f) = fixture();
        config.models[2].regressors.push("NOPE".into());
        let err = run(&config, &f).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: "resolve", .. }));
        assert!(matches!(err.root(), Error::MissingColumn(c) if c == "NOPE"));
    }

    #[test]
    fn models_are_independent() {
        let (config, f) = fixture();
        let full = run(&config, &f).unwrap();
        let mut reduced = config.clone();
        reduced.models.remove(1);
        let part = run(&reduced, &f).unwrap();
        assert_eq!(part.models.len(), 3);
        for m in &part.models {
            assert_eq!(Some(m), full.model(&m.name));
        }
    }

    #[test]
    fn deterministic_end_to_end() {
        let (config, f) = fixture();
        let a = run(&config, &f).unwrap();
        let b = run(&config, &f).unwrap();
        assert_eq!(render_json(&a), render_json(&b));
        assert_eq!(render_text(&a), render_text(&b));
        assert_eq!(generate_fixture(3).unwrap(), generate_fixture(3).unwrap());
        assert_ne!(generate_fixture(3).unwrap(), generate_fixture(4).unwrap());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let (config, f) = fixture();
        let b = run(&config, &f).unwrap();
        let back: ReportBundle = serde_json::from_str(&render_json(&b)).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn fixture_files_reload_to_the_same_bundle() {
        let (_, f) = fixture();
        let dir = tempfile::tempdir().unwrap();
        f.write(dir.path(), FIXTURE_SEED).unwrap();
        let config = PipelineConfig::load(dir.path().join(FIXTURE_CONFIG)).unwrap();
        assert_eq!(config.output.dir, dir.path().join("out"));
        let from_files = run_pipeline(&config).unwrap();
        let in_memory = run(&config, &f).unwrap();
        assert_eq!(render_json(&from_files), render_json(&in_memory));
    }
}
