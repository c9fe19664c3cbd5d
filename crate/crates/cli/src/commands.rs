use std::fs;
use std::path::Path;

use anyhow::anyhow;
use continua::cantor::{build_conjugacy, build_f_star, check_p_eps, densify_to_p_eps, explode_fixed_point};
use continua::continuum::{build_g_star, build_y, YHomeo, YModel, YPoint};
use continua::par::Execution;
use continua::rational::format_rational;
use continua::shadowing::{
    estimate_shadowing_modulus_with, generate_pseudo_orbit, generate_y_pseudo_orbit, global_shadowing_delta_with,
    shadow_on_model, shadowing_set, validate_global_delta, CertificateConfig, ModulusConfig, PseudoOrbit, Window,
};
use continua::svg::{model_picture, phase_diagram};
use continua::{Error, PlHomeo, Rational};
use log::info;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::{Cli, Command, Format, System};

pub const SATISFIED: u8 = 0;
pub const UNSATISFIED: u8 = 1;
pub const INPUT_ERROR: u8 = 2;
pub const CERTIFICATION_FAILURE: u8 = 3;

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

type Outcome = Result<u8, Failure>;

fn input(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: INPUT_ERROR,
        error: error.into(),
    }
}

/// Exit code for a library error: certificate refusals are certification
/// failures, everything else is bad input.
fn classify(e: Error) -> Failure {
    let code = match e {
        Error::NoInwardStub { .. } | Error::NoAdmissibleDelta { .. } | Error::CoverFailure(_) => CERTIFICATION_FAILURE,
        _ => INPUT_ERROR,
    };
    Failure { code, error: e.into() }
}

/// What `build-y` writes: the model and the arc-preserving map on it.
#[derive(Serialize, Deserialize)]
struct ModelBundle {
    segments: u32,
    depth: Option<u32>,
    model: YModel,
    map: YHomeo,
}

enum Loaded {
    Map(PlHomeo),
    Model(ModelBundle),
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(anyhow!("{}: {e}", path.display())))
}

fn load_map(path: &Path) -> Result<PlHomeo, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| input(anyhow!("{}: {e}", path.display())))
}

fn load_bundle(path: &Path) -> Result<ModelBundle, Failure> {
    let b: ModelBundle = serde_json::from_str(&read(path)?).map_err(|e| input(anyhow!("{}: {e}", path.display())))?;
    b.map.validate(&b.model).map_err(classify)?;
    Ok(b)
}

fn load(system: &System) -> Result<Loaded, Failure> {
    match (&system.map, &system.model) {
        (Some(p), _) => load_map(p).map(Loaded::Map),
        (_, Some(p)) => load_bundle(p).map(Loaded::Model),
        _ => Err(input(anyhow!("one of --map or --model is required"))),
    }
}

fn format(cli: &Cli, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
    let f = cli.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(input(anyhow!(
            "format {f:?} is not available here (accepted: {allowed:?})"
        )))
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| input(anyhow!("{}: {e}", path.display())))?;
            info!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::BuildFstar { depth } => {
            let f = build_f_star(*depth);
            let text = match format(cli, Format::Json, &[Format::Json, Format::Svg])? {
                Format::Svg => phase_diagram(&f),
                _ => to_json(&f),
            };
            emit(cli, &text)?;
            Ok(SATISFIED)
        }
        Command::CheckPeps { map, epsilon } => {
            format(cli, Format::Json, &[Format::Json])?;
            let f = load_map(map)?;
            match check_p_eps(&f, epsilon).map_err(classify)? {
                Some(w) => {
                    emit(cli, &to_json(&w))?;
                    Ok(SATISFIED)
                }
                None => {
                    emit(cli, "None\n")?;
                    Ok(UNSATISFIED)
                }
            }
        }
        Command::Conjugate { map, depth } => {
            format(cli, Format::Json, &[Format::Json])?;
            let g = load_map(map)?;
            match build_conjugacy(&g, *depth) {
                Ok(report) => {
                    info!("residual {}", format_rational(&report.residual));
                    emit(cli, &to_json(&report))?;
                    Ok(SATISFIED)
                }
                Err(e @ Error::InsufficientIntervals { .. }) => {
                    eprintln!("{e}");
                    Ok(UNSATISFIED)
                }
                Err(e) => Err(classify(e)),
            }
        }
        Command::Explode {
            map,
            point,
            radius,
            orientation,
            densify,
        } => {
            let fmt = format(cli, Format::Json, &[Format::Json, Format::Svg])?;
            let f = load_map(map)?;
            let g = match (densify, point, radius) {
                (Some(eps), _, _) => densify_to_p_eps(&f, eps),
                (None, Some(p), Some(r)) => explode_fixed_point(&f, p, r, (*orientation).into()),
                _ => return Err(input(anyhow!("--point and --radius are required without --densify"))),
            }
            .map_err(classify)?;
            let text = match fmt {
                Format::Svg => phase_diagram(&g),
                _ => to_json(&g),
            };
            emit(cli, &text)?;
            Ok(SATISFIED)
        }
        Command::Orbit {
            system,
            delta,
            start,
            arc,
            forward,
            back,
        } => {
            format(cli, Format::Csv, &[Format::Csv])?;
            let window = Window {
                back: *back,
                forward: *forward,
            };
            let text = match load(system)? {
                Loaded::Map(f) => generate_pseudo_orbit(&f, delta, window, start, cli.seed)
                    .map_err(classify)?
                    .to_csv(),
                Loaded::Model(b) => {
                    if *arc >= b.model.arcs.len() {
                        return Err(input(anyhow!(
                            "arc {arc} does not exist (model has {})",
                            b.model.arcs.len()
                        )));
                    }
                    let x0 = YPoint::new(*arc, start.clone());
                    generate_y_pseudo_orbit(&b.model, &b.map, delta, window, &x0, cli.seed)
                        .map_err(classify)?
                        .to_csv()
                }
            };
            emit(cli, &text)?;
            Ok(SATISFIED)
        }
        Command::Shadow { system, orbit, epsilon } => {
            format(cli, Format::Json, &[Format::Json])?;
            let text = read(orbit)?;
            match load(system)? {
                Loaded::Map(f) => {
                    let o = PseudoOrbit::<Rational>::from_csv(&text).map_err(classify)?;
                    let set = shadowing_set(&f, &o, epsilon);
                    emit(cli, &to_json(&set))?;
                    Ok(if set.is_empty() { UNSATISFIED } else { SATISFIED })
                }
                Loaded::Model(b) => {
                    let o = PseudoOrbit::<YPoint>::from_csv(&text).map_err(classify)?;
                    if let Some(p) = o.points.iter().find(|p| p.arc >= b.model.arcs.len()) {
                        return Err(input(anyhow!("orbit point on unknown arc {}", p.arc)));
                    }
                    let witness = shadow_on_model(&b.model, &b.map, &o, epsilon);
                    emit(
                        cli,
                        &to_json(&json!({ "epsilon": format_rational(epsilon), "witness": witness })),
                    )?;
                    Ok(if witness.is_some() { SATISFIED } else { UNSATISFIED })
                }
            }
        }
        Command::Modulus {
            map,
            epsilon,
            trials,
            window,
        } => {
            format(cli, Format::Json, &[Format::Json])?;
            let f = load_map(map)?;
            let cfg = ModulusConfig {
                window: Window::forward(*window),
                ..ModulusConfig::default()
            };
            let m = estimate_shadowing_modulus_with(&f, epsilon, *trials, cli.seed, &cfg).map_err(classify)?;
            emit(
                cli,
                &to_json(&json!({
                    "epsilon": format_rational(epsilon),
                    "modulus": format_rational(&m),
                    "trials": trials,
                    "window": window,
                    "seed": cli.seed,
                })),
            )?;
            Ok(SATISFIED)
        }
        Command::BuildY { segments, depth } => {
            let fmt = format(cli, Format::Json, &[Format::Json, Format::Svg])?;
            let model = build_y(*segments).map_err(classify)?;
            let map = build_g_star(&model, *depth);
            let text = match fmt {
                Format::Svg => model_picture(&model, Some(&map)),
                _ => to_json(&ModelBundle {
                    segments: *segments,
                    depth: Some(*depth),
                    model,
                    map,
                }),
            };
            emit(cli, &text)?;
            Ok(SATISFIED)
        }
        Command::Certify {
            model,
            segments,
            depth,
            epsilon,
            trials,
            window,
        } => {
            format(cli, Format::Json, &[Format::Json])?;
            let bundle = match model {
                Some(p) => load_bundle(p)?,
                None => {
                    let model = build_y(*segments).map_err(classify)?;
                    let map = build_g_star(&model, *depth);
                    ModelBundle {
                        segments: *segments,
                        depth: Some(*depth),
                        model,
                        map,
                    }
                }
            };
            certify(cli, &bundle, epsilon, *trials, Window::forward(*window))
        }
        Command::Render { system } => {
            format(cli, Format::Svg, &[Format::Svg])?;
            let text = match load(system)? {
                Loaded::Map(f) => phase_diagram(&f),
                Loaded::Model(b) => model_picture(&b.model, Some(&b.map)),
            };
            emit(cli, &text)?;
            Ok(SATISFIED)
        }
    }
}

fn certify(cli: &Cli, b: &ModelBundle, epsilon: &Rational, trials: usize, window: Window) -> Outcome {
    let cfg = CertificateConfig {
        seed: cli.seed,
        ..CertificateConfig::default()
    };
    info!(
        "certifying {} arcs at eps {}",
        b.model.arcs.len(),
        format_rational(epsilon)
    );
    let global = match global_shadowing_delta_with(&b.model, &b.map, epsilon, &cfg) {
        Ok(g) => g,
        Err(e) => {
            let failure = classify(e);
            if failure.code == CERTIFICATION_FAILURE {
                emit(
                    cli,
                    &to_json(&json!({
                        "segments": b.segments,
                        "depth": b.depth,
                        "epsilon": format_rational(epsilon),
                        "error": failure.error.to_string(),
                    })),
                )?;
            }
            return Err(failure);
        }
    };
    info!(
        "global delta {}; sampling {trials} orbits",
        format_rational(&global.delta)
    );
    let validation = validate_global_delta(
        &b.model,
        &b.map,
        &global.delta,
        epsilon,
        trials,
        window,
        cli.seed,
        Execution::default(),
    );
    let passed = validation.passed();
    emit(
        cli,
        &to_json(&json!({
            "segments": b.segments,
            "depth": b.depth,
            "epsilon": format_rational(epsilon),
            "seed": cli.seed,
            "window": window,
            "global": global,
            "validation": validation,
        })),
    )?;
    if passed {
        Ok(SATISFIED)
    } else {
        eprintln!(
            "{} of {trials} sampled orbits were not shadowed",
            validation.failures.len()
        );
        Ok(UNSATISFIED)
    }
}
