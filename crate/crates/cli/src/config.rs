//! Run configuration files.
//!
//! A config is a TOML document. Every dimensioned value is a string holding a
//! number and a unit (`"1e6 /s"`, `"10 meV"`, `"1 us"`); bare numbers are only
//! accepted for dimensionless keys. Unknown keys are errors. The grammar is
//! documented in `docs/config.md`.

use std::path::PathBuf;

use cnt_coherence::analytics::SusceptibilityMode;
use cnt_coherence::presets::{gaussian_peak_for_area, preset_rates, GAMMA_CB_SLOW};
use cnt_coherence::pulse::PulseEnvelope;
use cnt_coherence::rates::RateSet;
use cnt_coherence::scenario::{
    PulseSettings, ScenarioName, ScenarioSpec, SolverSettings, Spacing, Sweep, SweepParameter,
};
use cnt_coherence::scheme::{DriveField, Rabi, SchemeKind, SchemeParams};
use cnt_coherence::units::{
    parse_lifetime, parse_quantity, parse_rate_or_lifetime, rabi_from_intensity, ConversionMode, Dimension,
    QuantityError,
};
use thiserror::Error;
use toml::de::{DeTable, DeValue};
use toml::Spanned;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    At { line: usize, message: String },
}

type Result<T> = std::result::Result<T, ConfigError>;

/// What a config asks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Scenario(ScenarioName),
    Steady,
    Evolve,
}

impl Selection {
    pub fn label(self) -> &'static str {
        match self {
            Selection::Scenario(n) => n.name(),
            Selection::Steady => "steady",
            Selection::Evolve => "evolve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn extension(self) -> &'static str {
        self.name()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputSettings {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Settings that only scenario runs read.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSettings {
    pub drive_level: Option<f64>,
    pub sweep: Sweep,
    pub density_cm3: f64,
    pub susceptibility_mode: SusceptibilityMode,
    pub pulse: PulseSettings,
}

/// Time window of a raw `evolve` run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveWindow {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub initial_state: String,
}

impl Default for EvolveWindow {
    fn default() -> Self {
        EvolveWindow {
            start: 0.0,
            stop: 1e-9,
            points: 101,
            initial_state: "b".to_string(),
        }
    }
}

/// A fully resolved configuration; every default has been filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub selection: Selection,
    pub scheme: SchemeKind,
    pub scheme_params: SchemeParams,
    pub rates: RateSet,
    pub fields: Vec<DriveField>,
    pub conversion: ConversionMode,
    pub scenario: Option<ScenarioSettings>,
    pub solver: SolverSettings,
    pub evolve: Option<EvolveWindow>,
    pub output: OutputSettings,
}

/// A parsed config plus the keys that were filled from defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: RunConfig,
    pub defaulted: Vec<String>,
}

impl RunConfig {
    /// The stock configuration for `selection`.
    pub fn defaults(selection: Selection) -> Self {
        match selection {
            Selection::Scenario(name) => {
                let p = ScenarioSpec::preset(name);
                RunConfig {
                    selection,
                    scheme: p.scheme,
                    scheme_params: p.scheme_params,
                    rates: p.rates,
                    fields: p.fields,
                    conversion: p.conversion,
                    scenario: Some(ScenarioSettings {
                        drive_level: p.drive_level,
                        sweep: p.sweep,
                        density_cm3: p.density_cm3,
                        susceptibility_mode: p.susceptibility_mode,
                        pulse: p.pulse,
                    }),
                    solver: p.solver,
                    evolve: None,
                    output: OutputSettings::default(),
                }
            }
            Selection::Steady | Selection::Evolve => {
                let kind = SchemeKind::Lambda;
                RunConfig {
                    selection,
                    scheme: kind,
                    scheme_params: SchemeParams::default(),
                    rates: preset_rates(kind, GAMMA_CB_SLOW),
                    fields: vec![DriveField::off(); kind.topology().len()],
                    conversion: ConversionMode::PaperFit,
                    scenario: None,
                    solver: SolverSettings::default(),
                    evolve: (selection == Selection::Evolve).then(EvolveWindow::default),
                    output: OutputSettings::default(),
                }
            }
        }
    }

    /// The scenario specification, for scenario selections.
    pub fn scenario_spec(&self) -> Option<ScenarioSpec> {
        let (Selection::Scenario(name), Some(s)) = (self.selection, &self.scenario) else {
            return None;
        };
        Some(ScenarioSpec {
            scenario: name,
            scheme: self.scheme,
            scheme_params: self.scheme_params,
            rates: self.rates.clone(),
            fields: self.fields.clone(),
            drive_level: s.drive_level,
            sweep: s.sweep,
            density_cm3: s.density_cm3,
            susceptibility_mode: s.susceptibility_mode,
            conversion: self.conversion,
            pulse: s.pulse,
            solver: self.solver,
        })
    }

    /// Serializes every setting explicitly, in canonical units.
    pub fn to_toml(&self) -> String {
        use toml::{Table, Value};
        let q = |x: f64, dim: Dimension| Value::String(format!("{x:e} {}", dim.canonical_unit()));
        let s = |x: &str| Value::String(x.to_string());
        let mut doc = Table::new();

        let mut run = Table::new();
        match self.selection {
            Selection::Scenario(n) => run.insert("scenario".into(), s(n.name())),
            Selection::Steady => run.insert("solver".into(), s("steady")),
            Selection::Evolve => run.insert("solver".into(), s("evolve")),
        };
        run.insert("conversion".into(), s(self.conversion.name()));
        if let Some(sc) = &self.scenario {
            run.insert(
                "drive_level".into(),
                sc.drive_level.map_or_else(|| s("off"), Value::Float),
            );
            run.insert("density".into(), q(sc.density_cm3, Dimension::Density));
            run.insert(
                "susceptibility".into(),
                s(match sc.susceptibility_mode {
                    SusceptibilityMode::Analytic => "analytic",
                    SusceptibilityMode::Numeric => "numeric",
                }),
            );
        }
        doc.insert("run".into(), Value::Table(run));

        let mut scheme = Table::new();
        scheme.insert("kind".into(), s(self.scheme.name()));
        let p = &self.scheme_params;
        scheme.insert(
            "bright_dark_splitting".into(),
            q(p.bright_dark_splitting_ev, Dimension::Energy),
        );
        scheme.insert("optical_gap".into(), q(p.optical_gap_ev, Dimension::Energy));
        scheme.insert("upper_level".into(), q(p.upper_level_ev, Dimension::Energy));
        doc.insert("scheme".into(), Value::Table(scheme));

        let fields = self
            .fields
            .iter()
            .map(|f| {
                let mut t = Table::new();
                match &f.rabi {
                    Rabi::Constant(r) => {
                        t.insert("rabi".into(), q(*r, Dimension::AngularFrequency));
                    }
                    Rabi::Pulse(PulseEnvelope::Gaussian { center, fwhm, peak }) => {
                        let mut pt = Table::new();
                        pt.insert("center".into(), q(*center, Dimension::Time));
                        pt.insert("fwhm".into(), q(*fwhm, Dimension::Time));
                        pt.insert("peak".into(), q(*peak, Dimension::AngularFrequency));
                        t.insert("pulse".into(), Value::Table(pt));
                    }
                    Rabi::Pulse(other) => unreachable!("configs only build Gaussian pulses, got {other:?}"),
                }
                t.insert("detuning".into(), q(f.detuning, Dimension::AngularFrequency));
                t.insert("phase".into(), q(f.phase, Dimension::Angle));
                Value::Table(t)
            })
            .collect();
        doc.insert("fields".into(), Value::Array(fields));

        let mut rates = Table::new();
        rates.insert("dipole".into(), q(self.rates.dipole_ea, Dimension::Dipole));
        for c in &self.rates.coherences {
            rates.insert(format!("gamma_{}{}", c.i, c.j), q(c.gamma, Dimension::Rate));
        }
        let decays = self
            .rates
            .decays
            .iter()
            .map(|d| {
                let mut t = Table::new();
                t.insert("from".into(), s(&d.from));
                t.insert("to".into(), s(&d.to));
                t.insert("rate".into(), q(d.rate, Dimension::Rate));
                Value::Table(t)
            })
            .collect();
        rates.insert("decay".into(), Value::Array(decays));
        doc.insert("rates".into(), Value::Table(rates));

        if let Some(sc) = &self.scenario {
            let dim = parameter_dimension(sc.sweep.parameter);
            let mut sw = Table::new();
            sw.insert("parameter".into(), s(sc.sweep.parameter.name()));
            sw.insert("start".into(), q(sc.sweep.start, dim));
            sw.insert("stop".into(), q(sc.sweep.stop, dim));
            sw.insert("points".into(), Value::Integer(sc.sweep.points as i64));
            match sc.sweep.spacing {
                Spacing::Linear => sw.insert("spacing".into(), s("linear")),
                Spacing::Geometric => sw.insert("spacing".into(), s("geometric")),
                Spacing::Sinh { scale } => {
                    sw.insert("sinh_scale".into(), q(scale, dim));
                    sw.insert("spacing".into(), s("sinh"))
                }
            };
            doc.insert("sweep".into(), Value::Table(sw));

            let mut pulse = Table::new();
            pulse.insert("fwhm".into(), q(sc.pulse.fwhm, Dimension::Time));
            pulse.insert("area".into(), q(sc.pulse.area, Dimension::Angle));
            doc.insert("pulse".into(), Value::Table(pulse));
        }

        let mut solver = Table::new();
        solver.insert("evolve_tol".into(), Value::Float(self.solver.evolve_tol));
        solver.insert("max_steps".into(), Value::Integer(self.solver.max_steps as i64));
        solver.insert("output_points".into(), Value::Integer(self.solver.output_points as i64));
        solver.insert("parallel".into(), Value::Boolean(self.solver.parallel));
        doc.insert("solver".into(), Value::Table(solver));

        if let Some(ev) = &self.evolve {
            let mut t = Table::new();
            t.insert("start".into(), q(ev.start, Dimension::Time));
            t.insert("stop".into(), q(ev.stop, Dimension::Time));
            t.insert("points".into(), Value::Integer(ev.points as i64));
            t.insert("initial_state".into(), s(&ev.initial_state));
            doc.insert("evolve".into(), Value::Table(t));
        }

        let mut out = Table::new();
        if let Some(p) = &self.output.path {
            out.insert("path".into(), s(&p.to_string_lossy()));
        }
        if let Some(f) = self.output.format {
            out.insert("format".into(), s(f.name()));
        }
        if !out.is_empty() {
            doc.insert("output".into(), Value::Table(out));
        }
        toml::to_string(&doc).expect("a table of strings and numbers always serializes")
    }
}

fn parameter_dimension(p: SweepParameter) -> Dimension {
    match p {
        SweepParameter::GammaCb => Dimension::Rate,
        SweepParameter::Delay => Dimension::Time,
        _ => Dimension::AngularFrequency,
    }
}

/// Parses a config that must name its own scenario or solver.
pub fn parse_config(text: &str) -> Result<Resolved> {
    parse_config_for(text, None)
}

/// Parses a config for a run whose selection may also come from the command
/// line. A selection in the file must agree with `selection`.
pub fn parse_config_for(text: &str, selection: Option<Selection>) -> Result<Resolved> {
    let ctx = Ctx { text };
    let root = DeTable::parse(text).map_err(|e| ctx.at(e.span().map_or(0, |s| s.start), e.message().trim()))?;
    let root = Section {
        name: "top level".to_string(),
        table: root.get_ref(),
        pos: 0,
    };
    root.check_keys(
        &ctx,
        &[
            "run", "scheme", "fields", "rates", "sweep", "pulse", "solver", "evolve", "output",
        ],
        |_| false,
    )?;
    let mut defaulted = Vec::new();

    let run = root.section(&ctx, "run")?;
    let selection = resolve_selection(&ctx, run.as_ref(), selection, &mut defaulted)?;
    let mut cfg = RunConfig::defaults(selection);
    let is_scenario = matches!(selection, Selection::Scenario(_));

    let scheme = root.section(&ctx, "scheme")?;
    if let Some(sec) = &scheme {
        sec.check_keys(
            &ctx,
            &["kind", "bright_dark_splitting", "optical_gap", "upper_level"],
            |_| false,
        )?;
        if let Some((kind, pos)) = sec.string(&ctx, "kind")? {
            cfg.scheme = parse_choice(&ctx, pos, "scheme kind", kind, &SchemeKind::ALL.map(|k| (k.name(), k)))?;
            if !is_scenario {
                cfg.rates = preset_rates(cfg.scheme, GAMMA_CB_SLOW);
                cfg.fields = vec![DriveField::off(); cfg.scheme.topology().len()];
            }
        }
        let p = &mut cfg.scheme_params;
        sec.quantity_into(
            &ctx,
            "bright_dark_splitting",
            Dimension::Energy,
            &mut p.bright_dark_splitting_ev,
            &mut defaulted,
        )?;
        sec.quantity_into(
            &ctx,
            "optical_gap",
            Dimension::Energy,
            &mut p.optical_gap_ev,
            &mut defaulted,
        )?;
        sec.quantity_into(
            &ctx,
            "upper_level",
            Dimension::Energy,
            &mut p.upper_level_ev,
            &mut defaulted,
        )?;
    } else {
        defaulted.push("scheme".into());
    }
    let labels = &["a", "b", "c", "d"][..cfg.scheme.state_count()];

    match root.section(&ctx, "rates")? {
        Some(sec) => parse_rates(&ctx, &sec, labels, &mut cfg.rates, &mut defaulted)?,
        None => defaulted.push("rates".into()),
    }

    if let Some(run) = &run {
        let mut allowed = vec!["scenario", "solver", "conversion"];
        if is_scenario {
            allowed.extend(["drive_level", "density", "susceptibility"]);
        }
        run.check_keys(&ctx, &allowed, |_| false)?;
        match run.string(&ctx, "conversion")? {
            Some((c, pos)) => {
                cfg.conversion = parse_choice(
                    &ctx,
                    pos,
                    "conversion",
                    c,
                    &[
                        ("paper_fit", ConversionMode::PaperFit),
                        (
                            "physical",
                            ConversionMode::Physical {
                                dipole_ea: cfg.rates.dipole_ea,
                            },
                        ),
                    ],
                )?
            }
            None => defaulted.push("run.conversion".into()),
        }
    } else {
        defaulted.push("run.conversion".into());
    }

    match root.get("fields") {
        Some(v) => cfg.fields = parse_fields(&ctx, v, cfg.scheme, cfg.conversion)?,
        None => defaulted.push("fields".into()),
    }

    if let (Some(sc), true) = (cfg.scenario.as_mut(), is_scenario) {
        if let Some(run) = &run {
            match run.get("drive_level") {
                Some(v) if matches!(v.get_ref(), DeValue::String(s) if s.as_ref() == "off") => sc.drive_level = None,
                Some(_) => sc.drive_level = run.number(&ctx, "drive_level")?,
                None => defaulted.push("run.drive_level".into()),
            }
            run.quantity_into(&ctx, "density", Dimension::Density, &mut sc.density_cm3, &mut defaulted)?;
            match run.string(&ctx, "susceptibility")? {
                Some((m, pos)) => {
                    sc.susceptibility_mode = parse_choice(
                        &ctx,
                        pos,
                        "susceptibility",
                        m,
                        &[
                            ("numeric", SusceptibilityMode::Numeric),
                            ("analytic", SusceptibilityMode::Analytic),
                        ],
                    )?
                }
                None => defaulted.push("run.susceptibility".into()),
            }
        }
        match root.section(&ctx, "sweep")? {
            Some(sec) => parse_sweep(&ctx, &sec, &mut sc.sweep, &mut defaulted)?,
            None => defaulted.push("sweep".into()),
        }
        match root.section(&ctx, "pulse")? {
            Some(sec) => {
                sec.check_keys(&ctx, &["fwhm", "area"], |_| false)?;
                sec.quantity_into(&ctx, "fwhm", Dimension::Time, &mut sc.pulse.fwhm, &mut defaulted)?;
                sec.quantity_into(&ctx, "area", Dimension::Angle, &mut sc.pulse.area, &mut defaulted)?;
            }
            None => defaulted.push("pulse".into()),
        }
    } else {
        for name in ["sweep", "pulse"] {
            if let Some(v) = root.get(name) {
                return Err(ctx.at(
                    v.span().start,
                    format!("section [{name}] only applies to scenario runs"),
                ));
            }
        }
    }

    match root.section(&ctx, "solver")? {
        Some(sec) => {
            sec.check_keys(&ctx, &["evolve_tol", "max_steps", "output_points", "parallel"], |_| {
                false
            })?;
            let s = &mut cfg.solver;
            match sec.number(&ctx, "evolve_tol")? {
                Some(t) => s.evolve_tol = t,
                None => defaulted.push("solver.evolve_tol".into()),
            }
            sec.integer_into(&ctx, "max_steps", &mut s.max_steps, &mut defaulted)?;
            sec.integer_into(&ctx, "output_points", &mut s.output_points, &mut defaulted)?;
            match sec.boolean(&ctx, "parallel")? {
                Some(b) => s.parallel = b,
                None => defaulted.push("solver.parallel".into()),
            }
        }
        None => defaulted.push("solver".into()),
    }

    match (root.section(&ctx, "evolve")?, cfg.evolve.as_mut()) {
        (Some(sec), Some(ev)) => {
            sec.check_keys(&ctx, &["start", "stop", "points", "initial_state"], |_| false)?;
            sec.quantity_into(&ctx, "start", Dimension::Time, &mut ev.start, &mut defaulted)?;
            sec.quantity_into(&ctx, "stop", Dimension::Time, &mut ev.stop, &mut defaulted)?;
            sec.integer_into(&ctx, "points", &mut ev.points, &mut defaulted)?;
            match sec.string(&ctx, "initial_state")? {
                Some((s, pos)) => {
                    if !labels.contains(&s) {
                        return Err(ctx.at(
                            pos,
                            format!("unknown state '{s}' (expected one of {})", labels.join(", ")),
                        ));
                    }
                    ev.initial_state = s.to_string();
                }
                None => defaulted.push("evolve.initial_state".into()),
            }
            if !(ev.stop > ev.start) || ev.points < 2 {
                return Err(ctx.at(sec.pos, "[evolve] needs stop > start and at least 2 points"));
            }
        }
        (Some(sec), None) => return Err(ctx.at(sec.pos, "section [evolve] only applies to evolve runs")),
        (None, Some(_)) => defaulted.push("evolve".into()),
        (None, None) => {}
    }

    if let Some(sec) = root.section(&ctx, "output")? {
        sec.check_keys(&ctx, &["path", "format"], |_| false)?;
        if let Some((p, _)) = sec.string(&ctx, "path")? {
            cfg.output.path = Some(PathBuf::from(p));
        }
        if let Some((f, pos)) = sec.string(&ctx, "format")? {
            cfg.output.format = Some(parse_choice(
                &ctx,
                pos,
                "format",
                f,
                &[("csv", Format::Csv), ("json", Format::Json)],
            )?);
        }
    }

    validate(&ctx, &cfg)?;
    Ok(Resolved { config: cfg, defaulted })
}

fn resolve_selection(
    ctx: &Ctx,
    run: Option<&Section>,
    requested: Option<Selection>,
    defaulted: &mut Vec<String>,
) -> Result<Selection> {
    let scenario = run.map(|r| r.string(ctx, "scenario")).transpose()?.flatten();
    let solver = run.map(|r| r.string(ctx, "solver")).transpose()?.flatten();
    let from_file = match (scenario, solver) {
        (Some(_), Some((_, pos))) => return Err(ctx.at(pos, "[run] sets both 'scenario' and 'solver'; choose one")),
        (Some((name, pos)), None) => Some((
            Selection::Scenario(parse_choice(
                ctx,
                pos,
                "scenario",
                name,
                &ScenarioName::ALL.map(|n| (n.name(), n)),
            )?),
            pos,
        )),
        (None, Some((name, pos))) => Some((
            parse_choice(
                ctx,
                pos,
                "solver",
                name,
                &[("steady", Selection::Steady), ("evolve", Selection::Evolve)],
            )?,
            pos,
        )),
        (None, None) => None,
    };
    match (from_file, requested) {
        (Some((f, pos)), Some(r)) if f != r => Err(ctx.at(
            pos,
            format!("config is for '{}' but '{}' was requested", f.label(), r.label()),
        )),
        (Some((f, _)), _) => Ok(f),
        (None, Some(r)) => {
            defaulted.push("run.selection".into());
            Ok(r)
        }
        (None, None) => Err(ctx.at(run.map_or(0, |r| r.pos), "missing key 'scenario' or 'solver' in [run]")),
    }
}

fn parse_rates(
    ctx: &Ctx,
    sec: &Section,
    labels: &[&str],
    rates: &mut RateSet,
    defaulted: &mut Vec<String>,
) -> Result<()> {
    let pair = |key: &str| -> Option<(String, String)> {
        let rest = key.strip_prefix("gamma_")?;
        let mut it = rest.chars();
        let (i, j) = (it.next()?.to_string(), it.next()?.to_string());
        (it.next().is_none() && i != j && labels.contains(&i.as_str()) && labels.contains(&j.as_str()))
            .then_some((i, j))
    };
    sec.check_keys(ctx, &["dipole", "decay"], |k| pair(k).is_some())?;
    sec.quantity_into(ctx, "dipole", Dimension::Dipole, &mut rates.dipole_ea, defaulted)?;
    for (key, _) in sec.table.iter() {
        if let Some((i, j)) = pair(key.get_ref()) {
            let gamma = sec.rate(ctx, key.get_ref())?.expect("key is present");
            rates.set_coherence(&i, &j, gamma);
        }
    }
    if let Some(v) = sec.get("decay") {
        for (n, block) in tables_in(ctx, v, "[[rates.decay]]")?.into_iter().enumerate() {
            let b = Section {
                name: format!("[[rates.decay]] #{}", n + 1),
                ..block
            };
            b.check_keys(ctx, &["from", "to", "rate", "lifetime"], |_| false)?;
            let label = |key: &str| -> Result<String> {
                let (s, pos) = b
                    .string(ctx, key)?
                    .ok_or_else(|| ctx.at(b.pos, format!("missing key '{key}' in {}", b.name)))?;
                if !labels.contains(&s) {
                    return Err(ctx.at(pos, format!("unknown state '{s}' in {}", b.name)));
                }
                Ok(s.to_string())
            };
            let (from, to) = (label("from")?, label("to")?);
            let rate = match (b.get("rate"), b.get("lifetime")) {
                (Some(_), Some(v)) => {
                    return Err(ctx.at(
                        v.span().start,
                        format!("both 'rate' and 'lifetime' given in {}", b.name),
                    ));
                }
                (Some(_), None) => b.rate(ctx, "rate")?.expect("present"),
                (None, Some(v)) => {
                    let text = b.string(ctx, "lifetime")?.expect("present").0;
                    parse_lifetime(text).map_err(|e| ctx.quantity_error(v.span().start, "lifetime", &b.name, e))?
                }
                (None, None) => return Err(ctx.at(b.pos, format!("{} needs 'rate' or 'lifetime'", b.name))),
            };
            rates.set_decay(&from, &to, rate);
        }
    }
    Ok(())
}

fn parse_fields(
    ctx: &Ctx,
    v: &Spanned<DeValue>,
    kind: SchemeKind,
    conversion: ConversionMode,
) -> Result<Vec<DriveField>> {
    let blocks = tables_in(ctx, v, "[[fields]]")?;
    let slots = kind.topology().len();
    if blocks.len() != slots {
        return Err(ctx.at(
            v.span().start,
            format!(
                "the {kind} scheme has {slots} transition slots but {} [[fields]] blocks were given",
                blocks.len()
            ),
        ));
    }
    let mut fields = Vec::with_capacity(slots);
    for (n, block) in blocks.into_iter().enumerate() {
        let b = Section {
            name: format!("[[fields]] #{}", n + 1),
            ..block
        };
        b.check_keys(ctx, &["rabi", "intensity", "detuning", "phase", "pulse"], |_| false)?;
        let given: Vec<&str> = ["rabi", "intensity", "pulse"]
            .into_iter()
            .filter(|k| b.get(k).is_some())
            .collect();
        if given.len() > 1 {
            let pos = b.get(given[1]).expect("present").span().start;
            return Err(ctx.at(
                pos,
                format!("{} sets both '{}' and '{}'; choose one", b.name, given[0], given[1]),
            ));
        }
        let rabi = if let Some(r) = b.quantity(ctx, "rabi", Dimension::AngularFrequency)? {
            Rabi::Constant(r)
        } else if let Some(p) = b.quantity(ctx, "intensity", Dimension::Intensity)? {
            let pos = b.get("intensity").expect("present").span().start;
            Rabi::Constant(rabi_from_intensity(p, conversion).map_err(|e| ctx.at(pos, e.to_string()))?)
        } else if let Some(pt) = b.section(ctx, "pulse")? {
            let pt = Section {
                name: format!("{} pulse", b.name),
                ..pt
            };
            pt.check_keys(ctx, &["center", "fwhm", "peak", "area"], |_| false)?;
            let need = |key: &str, dim| {
                pt.quantity(ctx, key, dim)?
                    .ok_or_else(|| ctx.at(pt.pos, format!("missing key '{key}' in {}", pt.name)))
            };
            let (center, fwhm) = (need("center", Dimension::Time)?, need("fwhm", Dimension::Time)?);
            let peak = match (
                pt.quantity(ctx, "peak", Dimension::AngularFrequency)?,
                pt.quantity(ctx, "area", Dimension::Angle)?,
            ) {
                (Some(_), Some(_)) => return Err(ctx.at(pt.pos, format!("{} sets both 'peak' and 'area'", pt.name))),
                (Some(p), None) => p,
                (None, Some(a)) => gaussian_peak_for_area(a, fwhm),
                (None, None) => return Err(ctx.at(pt.pos, format!("{} needs 'peak' or 'area'", pt.name))),
            };
            Rabi::Pulse(PulseEnvelope::gaussian(center, fwhm, peak))
        } else {
            Rabi::Constant(0.0)
        };
        fields.push(DriveField {
            detuning: b.quantity(ctx, "detuning", Dimension::AngularFrequency)?.unwrap_or(0.0),
            rabi,
            phase: b.quantity(ctx, "phase", Dimension::Angle)?.unwrap_or(0.0),
        });
    }
    Ok(fields)
}

fn parse_sweep(ctx: &Ctx, sec: &Section, sweep: &mut Sweep, defaulted: &mut Vec<String>) -> Result<()> {
    sec.check_keys(
        ctx,
        &["parameter", "start", "stop", "points", "spacing", "sinh_scale"],
        |_| false,
    )?;
    if let Some((p, pos)) = sec.string(ctx, "parameter")? {
        let p = parse_choice(
            ctx,
            pos,
            "sweep parameter",
            p,
            &SweepParameter::ALL.map(|x| (x.name(), x)),
        )?;
        if p != sweep.parameter {
            for key in ["start", "stop"] {
                if sec.get(key).is_none() {
                    return Err(ctx.at(pos, format!("changing the sweep parameter requires '{key}' in [sweep]")));
                }
            }
        }
        sweep.parameter = p;
    } else {
        defaulted.push("sweep.parameter".into());
    }
    let dim = parameter_dimension(sweep.parameter);
    let value = |key: &str| -> Result<Option<f64>> {
        if dim == Dimension::Rate {
            sec.rate(ctx, key)
        } else {
            sec.quantity(ctx, key, dim)
        }
    };
    match value("start")? {
        Some(x) => sweep.start = x,
        None => defaulted.push("sweep.start".into()),
    }
    match value("stop")? {
        Some(x) => sweep.stop = x,
        None => defaulted.push("sweep.stop".into()),
    }
    sec.integer_into(ctx, "points", &mut sweep.points, defaulted)?;
    let scale = value("sinh_scale")?;
    match sec.string(ctx, "spacing")? {
        Some((s, pos)) => {
            let kind = parse_choice(ctx, pos, "spacing", s, &[("linear", 0), ("geometric", 1), ("sinh", 2)])?;
            sweep.spacing = match kind {
                0 => Spacing::Linear,
                1 => Spacing::Geometric,
                _ => match (scale, sweep.spacing) {
                    (Some(scale), _) => Spacing::Sinh { scale },
                    (None, Spacing::Sinh { scale }) => Spacing::Sinh { scale },
                    (None, _) => return Err(ctx.at(pos, "sinh spacing requires 'sinh_scale' in [sweep]")),
                },
            };
        }
        None => {
            defaulted.push("sweep.spacing".into());
            if let (Some(scale), Spacing::Sinh { .. }) = (scale, sweep.spacing) {
                sweep.spacing = Spacing::Sinh { scale };
            }
        }
    }
    if scale.is_some() && !matches!(sweep.spacing, Spacing::Sinh { .. }) {
        let pos = sec.get("sinh_scale").expect("present").span().start;
        return Err(ctx.at(pos, "'sinh_scale' only applies to sinh spacing"));
    }
    sweep.validate().map_err(|e| ctx.at(sec.pos, e.to_string()))
}

fn validate(ctx: &Ctx, cfg: &RunConfig) -> Result<()> {
    let fail = |e: cnt_coherence::error::Error| ctx.at(0, format!("invalid configuration: {e}"));
    if let Some(spec) = cfg.scenario_spec() {
        return spec.validate().map_err(fail);
    }
    cfg.rates.validate().map_err(fail)?;
    for (k, f) in cfg.fields.iter().enumerate() {
        f.validate(k + 1).map_err(fail)?;
    }
    if !(cfg.solver.evolve_tol > 0.0) || cfg.solver.max_steps == 0 {
        return Err(ctx.at(
            0,
            "invalid configuration: [solver] needs evolve_tol > 0 and max_steps > 0",
        ));
    }
    Ok(())
}

fn parse_choice<T: Copy>(ctx: &Ctx, pos: usize, what: &str, value: &str, options: &[(&str, T)]) -> Result<T> {
    options
        .iter()
        .find(|(n, _)| *n == value)
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            ctx.at(
                pos,
                format!("unknown {what} '{value}' (expected one of: {})", names.join(", ")),
            )
        })
}

fn tables_in<'a, 'i>(ctx: &Ctx, v: &'a Spanned<DeValue<'i>>, what: &str) -> Result<Vec<Section<'a, 'i>>> {
    let DeValue::Array(items) = v.get_ref() else {
        return Err(ctx.at(v.span().start, format!("{what} must be an array of tables")));
    };
    items
        .iter()
        .map(|item| match item.get_ref() {
            DeValue::Table(t) => Ok(Section {
                name: what.to_string(),
                table: t,
                pos: item.span().start,
            }),
            _ => Err(ctx.at(item.span().start, format!("{what} entries must be tables"))),
        })
        .collect()
}

struct Ctx<'t> {
    text: &'t str,
}

impl Ctx<'_> {
    fn line(&self, pos: usize) -> usize {
        let end = pos.min(self.text.len());
        self.text.as_bytes()[..end].iter().filter(|&&b| b == b'\n').count() + 1
    }

    fn at(&self, pos: usize, message: impl Into<String>) -> ConfigError {
        ConfigError::At {
            line: self.line(pos),
            message: message.into(),
        }
    }

    fn quantity_error(&self, pos: usize, key: &str, section: &str, e: QuantityError) -> ConfigError {
        let message = match e {
            QuantityError::MissingUnit { example } => {
                format!("missing unit for '{key}' in {section} (write e.g. \"{example}\")")
            }
            other => format!("'{key}' in {section}: {other}"),
        };
        self.at(pos, message)
    }
}

struct Section<'a, 'i> {
    name: String,
    table: &'a DeTable<'i>,
    pos: usize,
}

impl<'a, 'i> Section<'a, 'i> {
    fn get(&self, key: &str) -> Option<&'a Spanned<DeValue<'i>>> {
        self.table
            .iter()
            .find(|(k, _)| k.get_ref().as_ref() == key)
            .map(|(_, v)| v)
    }

    fn check_keys(&self, ctx: &Ctx, allowed: &[&str], also: impl Fn(&str) -> bool) -> Result<()> {
        for (k, _) in self.table.iter() {
            let key: &str = k.get_ref();
            if !allowed.contains(&key) && !also(key) {
                return Err(ctx.at(k.span().start, format!("unknown key '{key}' in {}", self.name)));
            }
        }
        Ok(())
    }

    fn section(&self, ctx: &Ctx, key: &str) -> Result<Option<Section<'a, 'i>>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => match v.get_ref() {
                DeValue::Table(t) => Ok(Some(Section {
                    name: format!("[{key}]"),
                    table: t,
                    pos: v.span().start,
                })),
                _ => Err(ctx.at(v.span().start, format!("'{key}' in {} must be a table", self.name))),
            },
        }
    }

    fn string(&self, ctx: &Ctx, key: &str) -> Result<Option<(&'a str, usize)>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => match v.get_ref() {
                DeValue::String(s) => Ok(Some((s.as_ref(), v.span().start))),
                _ => Err(ctx.at(v.span().start, format!("'{key}' in {} must be a string", self.name))),
            },
        }
    }

    /// A dimensioned value, converted to the canonical unit of `dim`.
    fn quantity(&self, ctx: &Ctx, key: &str, dim: Dimension) -> Result<Option<f64>> {
        self.with_text(ctx, key, |t| parse_quantity(t, dim), dim.canonical_unit())
    }

    /// A rate written either as a rate or as a lifetime.
    fn rate(&self, ctx: &Ctx, key: &str) -> Result<Option<f64>> {
        self.with_text(ctx, key, parse_rate_or_lifetime, "/s")
    }

    fn with_text(
        &self,
        ctx: &Ctx,
        key: &str,
        parse: impl Fn(&str) -> std::result::Result<f64, QuantityError>,
        unit: &str,
    ) -> Result<Option<f64>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let pos = v.span().start;
        match v.get_ref() {
            DeValue::String(s) => parse(s)
                .map(Some)
                .map_err(|e| ctx.quantity_error(pos, key, &self.name, e)),
            DeValue::Integer(_) | DeValue::Float(_) => Err(ctx.at(
                pos,
                format!("missing unit for '{key}' in {} (write e.g. \"1 {unit}\")", self.name),
            )),
            _ => Err(ctx.at(
                pos,
                format!("'{key}' in {} must be a quoted number with a unit", self.name),
            )),
        }
    }

    fn quantity_into(
        &self,
        ctx: &Ctx,
        key: &str,
        dim: Dimension,
        slot: &mut f64,
        defaulted: &mut Vec<String>,
    ) -> Result<()> {
        match self.quantity(ctx, key, dim)? {
            Some(x) => *slot = x,
            None => defaulted.push(format!("{}.{key}", self.name.trim_matches(['[', ']']))),
        }
        Ok(())
    }

    /// A dimensionless number.
    fn number(&self, ctx: &Ctx, key: &str) -> Result<Option<f64>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let pos = v.span().start;
        let raw = match v.get_ref() {
            DeValue::Float(f) => f.as_str().replace('_', ""),
            DeValue::Integer(i) if i.radix() == 10 => i.as_str().replace('_', ""),
            _ => return Err(ctx.at(pos, format!("'{key}' in {} must be a number", self.name))),
        };
        match raw.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Some(x)),
            _ => Err(ctx.at(pos, format!("malformed number '{raw}' for '{key}' in {}", self.name))),
        }
    }

    fn integer(&self, ctx: &Ctx, key: &str) -> Result<Option<usize>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let pos = v.span().start;
        match v.get_ref() {
            DeValue::Integer(i) => usize::from_str_radix(&i.as_str().replace('_', ""), i.radix())
                .map(Some)
                .map_err(|_| ctx.at(pos, format!("'{key}' in {} must be a non-negative integer", self.name))),
            _ => Err(ctx.at(pos, format!("'{key}' in {} must be an integer", self.name))),
        }
    }

    fn integer_into(&self, ctx: &Ctx, key: &str, slot: &mut usize, defaulted: &mut Vec<String>) -> Result<()> {
        match self.integer(ctx, key)? {
            Some(x) => *slot = x,
            None => defaulted.push(format!("{}.{key}", self.name.trim_matches(['[', ']']))),
        }
        Ok(())
    }

    fn boolean(&self, ctx: &Ctx, key: &str) -> Result<Option<bool>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        match v.get_ref() {
            DeValue::Boolean(b) => Ok(Some(*b)),
            _ => Err(ctx.at(
                v.span().start,
                format!("'{key}' in {} must be true or false", self.name),
            )),
        }
    }
}
