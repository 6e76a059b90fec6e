use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use pdexplain::emit::{
    render_match_plot, render_matrix, render_pd2d, render_pdp_overlay, Pd2dMode, Plot, PlotKind,
    PlotSpec,
};
use pdexplain::{
    fit_forest, fit_linear, load_csv, load_model, save_model, write_reports_csv, BackgroundSet,
    ColumnRole, CsvOptions, DataTable, Explainer, FeatureSubset, ForestParams, LinearSimulation,
    Model, PdEngine, PdResult, PipePredictor, Predictor,
};
use serde_json::json;

use crate::settings::{FitKind, PlotChoice, Settings};
use crate::CliError;

/// Everything a command produced, for the run manifest.
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub details: serde_json::Value,
}

pub fn simulate(s: &Settings) -> Result<Outcome, CliError> {
    let sim = LinearSimulation {
        n: s.n.unwrap_or(1000),
        a: s.a.unwrap_or(5.0),
        b: s.b.unwrap_or(3.0),
        noise_sd: s.noise_sd.unwrap_or(1.0),
        seed: s.seed(),
    };
    let out = s.require_out()?;
    let table = sim.generate()?;
    let mut w = BufWriter::new(File::create(out)?);
    writeln!(
        w,
        "# seed={} n={} a={} b={} noise_sd={}",
        sim.seed, sim.n, sim.a, sim.b, sim.noise_sd
    )?;
    table.write_csv(&mut w)?;
    w.flush()?;
    println!("wrote {} rows to {}", sim.n, out.display());
    Ok(Outcome {
        outputs: vec![out.to_path_buf()],
        details: json!({ "n": sim.n, "a": sim.a, "b": sim.b, "noise_sd": sim.noise_sd }),
    })
}

fn read_data(s: &Settings) -> Result<DataTable, CliError> {
    let roles: HashMap<String, ColumnRole> = s
        .categorical
        .iter()
        .map(|c| (c.clone(), ColumnRole::Categorical))
        .collect();
    let options = CsvOptions {
        roles,
        drop_incomplete: s.drop_incomplete.unwrap_or(false),
    };
    let ingested = load_csv(s.require_data()?, &options)?;
    if ingested.dropped_rows > 0 {
        eprintln!("dropped {} incomplete rows", ingested.dropped_rows);
    }
    Ok(ingested.table)
}

fn forest_params(s: &Settings) -> ForestParams {
    let defaults = ForestParams::default();
    ForestParams {
        trees: s.trees.unwrap_or(defaults.trees),
        m_try: s.m_try,
        max_depth: s.max_depth,
        min_leaf: s.min_leaf.unwrap_or(defaults.min_leaf),
        bootstrap: s.bootstrap.unwrap_or(true),
        seed: s.seed(),
    }
}

fn fit_model(s: &Settings, kind: FitKind, data: &DataTable) -> Result<Model, CliError> {
    let target = s
        .target
        .as_deref()
        .ok_or_else(|| CliError::Usage("fitting needs --target".into()))?;
    Ok(match kind {
        FitKind::Linear => fit_linear(data, target)?.into(),
        FitKind::Forest => fit_forest(data, target, &forest_params(s))?.into(),
    })
}

pub fn fit(s: &Settings) -> Result<Outcome, CliError> {
    let out = s.require_out()?;
    let data = read_data(s)?;
    let kind = s.fit.unwrap_or(FitKind::Forest);
    let model = fit_model(s, kind, &data)?;
    save_model(&model, out)?;
    match &model {
        Model::Linear(m) => println!(
            "linear model: intercept {} coefficients {:?}",
            m.intercept(),
            m.coefficients()
        ),
        Model::Forest(f) => println!("forest of {} trees", f.trees().len()),
    }
    println!("saved to {}", out.display());
    Ok(Outcome {
        outputs: vec![out.to_path_buf()],
        details: json!({ "model_kind": model.kind() }),
    })
}

/// The model to explain together with the data table in its column order.
struct Loaded {
    model: Box<dyn Predictor>,
    table: DataTable,
    source: serde_json::Value,
}

fn load_source(s: &Settings) -> Result<Loaded, CliError> {
    let given = [s.model.is_some(), s.pipe_cmd.is_some(), s.fit.is_some()];
    match given.iter().filter(|g| **g).count() {
        0 => {
            return Err(CliError::Usage(
                "one of --model, --pipe-cmd or --fit is required".into(),
            ))
        }
        1 => {}
        _ => {
            return Err(CliError::Usage(
                "--model, --pipe-cmd and --fit are mutually exclusive".into(),
            ))
        }
    }
    let data = read_data(s)?;
    let features = match s.target.as_deref() {
        Some(t) if data.schema().index_of(t).is_some() => data.without(t)?,
        Some(t) if s.fit.is_some() => {
            return Err(CliError::Core(pdexplain::Error::Schema(format!(
                "target column `{t}` not in data"
            ))))
        }
        _ => data.clone(),
    };

    if let Some(path) = &s.model {
        let model = load_model(path)?;
        let table = features.conform_to(model.features())?;
        let kind = model.kind();
        return Ok(Loaded {
            model: Box::new(model),
            table,
            source: json!({ "model": path, "model_kind": kind }),
        });
    }
    if let Some(cmd) = &s.pipe_cmd {
        let mut pipe = PipePredictor::new(cmd.clone(), features.schema().clone());
        if let Some(b) = s.pipe_batch {
            pipe = pipe.with_batch_size(b);
        }
        if let Some(t) = s.pipe_timeout_secs {
            if !t.is_finite() || t <= 0.0 {
                return Err(CliError::Usage(
                    "--pipe-timeout-secs must be positive".into(),
                ));
            }
            pipe = pipe.with_timeout(Duration::from_secs_f64(t));
        }
        return Ok(Loaded {
            model: Box::new(pipe),
            table: features,
            source: json!({ "pipe_cmd": cmd }),
        });
    }
    let kind = s.fit.expect("one source is set");
    let model = fit_model(s, kind, &data)?;
    let table = features.conform_to(model.features())?;
    Ok(Loaded {
        source: json!({ "fit": kind, "model_kind": model.kind() }),
        model: Box::new(model),
        table,
    })
}

fn resolve_subsets(s: &Settings, table: &DataTable) -> Result<Vec<FeatureSubset>, CliError> {
    s.subsets()?
        .iter()
        .map(|names| FeatureSubset::by_names(table.schema(), names).map_err(CliError::from))
        .collect()
}

fn out_dir(s: &Settings) -> Result<&Path, CliError> {
    let dir = s.require_out()?;
    fs::create_dir_all(dir)?;
    Ok(dir)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("outputs serialize");
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn explain(s: &Settings) -> Result<Outcome, CliError> {
    let dir = out_dir(s)?;
    let loaded = load_source(s)?;
    let background = BackgroundSet::capped(&loaded.table, s.background, s.seed())?;
    let explainer = Explainer::new(loaded.model.as_ref(), background, PdEngine::default())?;
    let subsets = resolve_subsets(s, &loaded.table)?;
    let reports = if subsets.is_empty() {
        explainer.singleton_table()?
    } else {
        explainer.upsilon_table(&subsets)?
    };

    println!("{:<24} {:>10}", "subset", "upsilon");
    for r in &reports {
        println!("{:<24} {:>10.4}", r.label(), r.upsilon);
    }
    let csv = dir.join("upsilon.csv");
    write_reports_csv(&reports, BufWriter::new(File::create(&csv)?))?;
    let json_path = dir.join("upsilon.json");
    write_json(&json_path, &reports)?;
    Ok(Outcome {
        outputs: vec![csv, json_path],
        details: json!({
            "source": loaded.source,
            "background_size": explainer.background().size(),
        }),
    })
}

pub fn select(s: &Settings) -> Result<Outcome, CliError> {
    let dir = out_dir(s)?;
    let loaded = load_source(s)?;
    let background = BackgroundSet::capped(&loaded.table, s.background, s.seed())?;
    let explainer = Explainer::new(loaded.model.as_ref(), background, PdEngine::default())?;
    let trace = explainer.forward_select(s.max_steps, s.min_gain.unwrap_or(0.0))?;

    println!("{:>4} {:<20} {:>10}", "step", "variable", "upsilon");
    for step in &trace.steps {
        println!(
            "{:>4} {:<20} {:>10.4}",
            step.step, step.variable, step.upsilon
        );
    }
    let csv = dir.join("selection.csv");
    let mut w = BufWriter::new(File::create(&csv)?);
    trace.write_csv(&mut w)?;
    w.flush()?;
    let json_path = dir.join("selection.json");
    write_json(&json_path, &trace)?;
    Ok(Outcome {
        outputs: vec![csv, json_path],
        details: json!({
            "source": loaded.source,
            "background_size": trace.background_size,
        }),
    })
}

fn stem(kind: PlotKind, names: &[&str]) -> String {
    let joined: String = names
        .join("-")
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{}_{joined}", kind.file_stem())
}

fn provenance(background: &BackgroundSet<'_>) -> String {
    let seed = background
        .seed()
        .map_or_else(|| "none".into(), |s| s.to_string());
    format!("# background_size={} seed={seed}\n", background.size())
}

fn spec_for(kind: PlotKind, s: &Settings) -> PlotSpec {
    let mut spec = PlotSpec::new(kind);
    if let Some(w) = s.width {
        spec.width = w;
    }
    if let Some(h) = s.height {
        spec.height = h;
    }
    spec
}

pub fn pdp(s: &Settings) -> Result<Outcome, CliError> {
    let dir = out_dir(s)?;
    let loaded = load_source(s)?;
    let table = &loaded.table;
    let model = loaded.model.as_ref();
    let subsets = resolve_subsets(s, table)?;
    if subsets.is_empty() {
        return Err(CliError::Usage("pdp needs at least one --subset".into()));
    }
    let background = BackgroundSet::capped(table, s.background, s.seed())?;
    let engine = PdEngine::default();
    let grid = [s.grid.unwrap_or(50)];
    let predictions = model.predict(table.matrix())?;

    let mut outputs = Vec::new();
    for subset in &subsets {
        let names = subset.names(table.schema());
        let choice = s.plot.unwrap_or(match subset.len() {
            1 => PlotChoice::Overlay,
            2 => PlotChoice::Pd2d,
            _ => PlotChoice::Match,
        });
        let plot: Plot = match choice {
            PlotChoice::Overlay => {
                if subset.len() != 1 {
                    return Err(CliError::Usage(format!(
                        "overlay plots take one column, got `{}`",
                        names.join(",")
                    )));
                }
                let curve = engine.pd_grid(model, &background, subset, &grid)?;
                let x = table.column(subset.indices()[0]);
                render_pdp_overlay(&spec_for(PlotKind::PdpOverlay, s), &curve, &predictions, &x)?
            }
            PlotChoice::Match => {
                let pd = engine.pd_at_observations(model, &background, subset)?;
                render_match_plot(&spec_for(PlotKind::MatchPlot, s), &predictions, &pd.values)?
            }
            PlotChoice::Pd2d | PlotChoice::Residual => {
                let surface = engine.pd_at_observations(model, &background, subset)?;
                let (kind, mode) = if choice == PlotChoice::Pd2d {
                    (PlotKind::Pd2dScatter, Pd2dMode::Pd)
                } else {
                    (PlotKind::ResidualScatter, Pd2dMode::Residual)
                };
                render_pd2d(&spec_for(kind, s), &surface, mode, Some(&predictions))?
            }
            PlotChoice::Matrix => {
                let idx = subset.indices();
                let mut surfaces: Vec<PdResult> = Vec::new();
                for (a, &i) in idx.iter().enumerate() {
                    for &j in &idx[a + 1..] {
                        let pair = FeatureSubset::new(vec![i, j], table.ncols())?;
                        surfaces.push(engine.pd_at_observations(model, &background, &pair)?);
                    }
                }
                let curves = idx
                    .iter()
                    .map(|&j| engine.pd_grid(model, &background, &FeatureSubset::single(j), &grid))
                    .collect::<pdexplain::Result<Vec<_>>>()?;
                render_matrix(&spec_for(PlotKind::Matrix, s), &names, &surfaces, &curves)?
            }
        };
        let plot = Plot {
            data: provenance(&background) + &plot.data,
            ..plot
        };
        let (svg, data) = plot.write(dir, &stem(plot.kind, &names))?;
        println!("wrote {}", svg.display());
        outputs.push(svg);
        outputs.push(data);
    }
    Ok(Outcome {
        outputs,
        details: json!({
            "source": loaded.source,
            "background_size": background.size(),
        }),
    })
}
