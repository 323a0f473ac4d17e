use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::{rows, CliError, Options, Outcome, Output, Scenario, ValidationError, EXIT_OK, EXIT_VALIDATION};
use crate::error::Result;
use crate::flows::{
    closed_form_flow, dirac_flow, integrate_rk4_sampled, step_times, AsymptoticSystem, CsvColumns,
    DiracSystem, OscillatorSystem, Trajectory,
};
use crate::hamiltonian::{hh_field, oscillator_field, ScalarExpression};
use crate::invariants::{conservation_report, hopf_check};
use crate::structures::{
    assemble_block_structure, block_orientations, canonical_reduction,
    canonical_reduction_blockwise, dual_commutation_check, verify_quaternionic, Orientation,
    STRUCTURE_TOL,
};
use crate::symmetry::{closure_check, detect_oscillator, samples_on_radii, solve_invariance, split_components};

const DRIFT_TOL: f64 = 1e-10;
const CLOSURE_TOL: f64 = 1e-10;

type CmdResult = std::result::Result<Outcome, CliError>;

pub(super) fn verify(sc: &Scenario, opts: &Options) -> CmdResult {
    let tol = opts.tol.unwrap_or(STRUCTURE_TOL);
    let s = sc.structure()?;
    let report = verify_quaternionic(&s, tol);
    let block_diagonal = s.is_block_diagonal(tol);
    let orientations = if report.ok && block_diagonal {
        block_orientations(&s).ok()
    } else {
        None
    };
    let value = json!({
        "dim": s.dim(),
        "quaternionic": report,
        "block_diagonal": block_diagonal,
        "orientations": orientations,
        "signature_matches": orientations.as_deref() == Some(sc.signature.as_slice()),
        "dual_commutation": dual_commutation_check(tol),
    });
    let mut out = Outcome::single("verify", Output::Report(value));
    if !report.ok {
        out.code = EXIT_VALIDATION;
    }
    Ok(out)
}

pub(super) fn reduce(sc: &Scenario, opts: &Options) -> CmdResult {
    let s = sc.structure()?;
    let (r, signature) = if s.dim() == 4 {
        let (r, o) = canonical_reduction(&s)?;
        (r, vec![o])
    } else {
        canonical_reduction_blockwise(&s)?
    };
    let target = assemble_block_structure(&signature)?;
    let reduced = s.conjugate(&r)?;
    let residual = (0..3)
        .map(|a| (reduced.l(a) - target.l(a)).amax())
        .fold(0.0, f64::max);
    let tol = opts.tol.unwrap_or(1e-10);
    let value = json!({
        "rotation": rows(&r),
        "determinant": r.determinant(),
        "signature": signature,
        "residual": residual,
        "ok": residual <= tol,
    });
    Ok(Outcome::single("reduce", Output::Report(value)))
}

/// `(t_end, dt, stride)` with command-line overrides.
fn time_grid(sc: &Scenario, opts: &Options) -> std::result::Result<(f64, f64, usize), ValidationError> {
    let t = sc.time.as_ref();
    let t_end = opts
        .t_end
        .or(t.map(|t| t.t_end))
        .ok_or_else(|| ValidationError::new("time", "required (or pass --t-end and --dt)"))?;
    let dt = opts
        .dt
        .or(t.map(|t| t.dt))
        .ok_or_else(|| ValidationError::new("time.dt", "required (or pass --dt)"))?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(ValidationError::new("time.t_end", "must be positive"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(ValidationError::new("time.dt", "must be positive"));
    }
    Ok((t_end, dt, t.map(|t| t.sample_stride).unwrap_or(1)))
}

fn sample_times(t_end: f64, dt: f64, stride: usize) -> Result<Vec<f64>> {
    let grid = step_times(t_end, dt)?;
    let last = grid.len() - 1;
    Ok(grid
        .into_iter()
        .enumerate()
        .filter(|(i, _)| i % stride == 0 || *i == last)
        .map(|(_, t)| t)
        .collect())
}

fn initial_conditions(sc: &Scenario) -> std::result::Result<Vec<DVector<f64>>, ValidationError> {
    if sc.initial_conditions.is_empty() {
        return Err(ValidationError::new("initial_conditions", "at least one is required"));
    }
    Ok(sc
        .initial_conditions
        .iter()
        .map(|x| DVector::from_column_slice(x))
        .collect())
}

/// The closed-form system of a scenario's profile.
enum Exact {
    Oscillator(OscillatorSystem),
    Dirac(DiracSystem),
}

impl Exact {
    fn flow(&self, x0: &DVector<f64>, times: &[f64]) -> Result<Trajectory> {
        match self {
            Exact::Oscillator(s) => closed_form_flow(s, x0, times),
            Exact::Dirac(s) => dirac_flow(s, x0, times),
        }
    }
}

fn exact_system(sc: &Scenario) -> std::result::Result<Exact, CliError> {
    let profile = sc
        .profile()?
        .ok_or_else(|| ValidationError::new("profile", "required for this command"))?;
    if sc.f0()?.is_some() {
        return Err(ValidationError::new(
            "profile.f0",
            "a damped system has no closed-form flow; use `simulate`",
        )
        .into());
    }
    match profile.hatted() {
        Some(h) => Ok(Exact::Dirac(DiracSystem::new(profile.c().clone(), h.clone())?)),
        None => Ok(Exact::Oscillator(OscillatorSystem::new(sc.structure()?, profile)?)),
    }
}

/// Whether the R^4 quadratic invariants apply: one standard positive block.
fn quadratic_invariants_apply(sc: &Scenario) -> bool {
    let plain = sc
        .profile
        .as_ref()
        .is_some_and(|p| p.c_hat.is_none() && p.f0.is_none());
    sc.n == 1 && sc.structure.is_none() && sc.signature == [Orientation::Positive] && plain
}

fn columns(sc: &Scenario, x0: &DVector<f64>) -> std::result::Result<CsvColumns, CliError> {
    let q_coefficients = if quadratic_invariants_apply(sc) {
        let p = sc.profile()?.expect("checked above");
        Some(p.coefficients(&crate::invariants::block_radii(x0.as_slice())))
    } else {
        None
    };
    Ok(CsvColumns {
        radii: true,
        q_coefficients,
    })
}

fn with_invariants(sc: &Scenario, name: &str, trajs: Vec<(Trajectory, CsvColumns)>) -> Outcome {
    let mut outputs = Vec::new();
    if sc.outputs.iter().any(|o| o == "invariants") {
        let reports = trajs
            .iter()
            .enumerate()
            .map(|(i, (t, c))| invariant_entry(i, t, c.q_coefficients, None))
            .collect();
        outputs.push((format!("{name}_invariants"), Output::Report(json!({ "trajectories": Value::Array(reports) }))));
    }
    if sc.outputs.is_empty() || sc.outputs.iter().any(|o| o == "trajectories") {
        outputs.insert(0, (name.to_string(), Output::Trajectories(trajs)));
    }
    Outcome {
        outputs,
        code: EXIT_OK,
    }
}

fn check_outputs(sc: &Scenario) -> std::result::Result<(), ValidationError> {
    for (i, o) in sc.outputs.iter().enumerate() {
        if o != "trajectories" && o != "invariants" {
            return Err(ValidationError::new(
                format!("outputs[{i}]"),
                format!("unknown output `{o}`; expected `trajectories` or `invariants`"),
            ));
        }
    }
    Ok(())
}

pub(super) fn flow(sc: &Scenario, opts: &Options) -> CmdResult {
    check_outputs(sc)?;
    let sys = exact_system(sc)?;
    let (t_end, dt, stride) = time_grid(sc, opts)?;
    let times = sample_times(t_end, dt, stride)?;
    let ics = initial_conditions(sc)?;
    let trajs = ics
        .par_iter()
        .map(|x0| sys.flow(x0, &times))
        .collect::<Result<Vec<_>>>()?;
    let trajs = trajs
        .into_iter()
        .zip(&ics)
        .map(|(t, x0)| Ok((t, columns(sc, x0)?)))
        .collect::<std::result::Result<Vec<_>, CliError>>()?;
    Ok(with_invariants(sc, "flow", trajs))
}

type Field = Box<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

fn simulation_field(sc: &Scenario) -> std::result::Result<Field, CliError> {
    match (sc.profile()?, sc.hamiltonians()?) {
        (Some(_), Some(_)) | (None, None) => Err(ValidationError::new(
            "profile",
            "`simulate` needs exactly one of `profile` and `hamiltonians`",
        )
        .into()),
        (None, Some(h)) => {
            let s = sc.structure()?;
            Ok(Box::new(move |x: &DVector<f64>| {
                hh_field(&h, &s, x.as_slice()).expect("dimensions validated")
            }))
        }
        (Some(p), None) => {
            if let Some(f0) = sc.f0()? {
                let zero = || ScalarExpression::zero(4);
                let c_hat = match p.hatted() {
                    Some(h) => h.clone(),
                    None => [zero()?, zero()?, zero()?],
                };
                let sys = AsymptoticSystem::new(f0, p.c().clone(), c_hat)?;
                return Ok(Box::new(move |x: &DVector<f64>| sys.velocity(x)));
            }
            match exact_system(sc)? {
                Exact::Dirac(d) => Ok(Box::new(move |x: &DVector<f64>| d.velocity(x))),
                Exact::Oscillator(o) => Ok(Box::new(move |x: &DVector<f64>| {
                    oscillator_field(o.profile(), o.structure(), x.as_slice()).expect("dimensions validated")
                })),
            }
        }
    }
}

pub(super) fn simulate(sc: &Scenario, opts: &Options) -> CmdResult {
    check_outputs(sc)?;
    let field = simulation_field(sc)?;
    let (t_end, dt, stride) = time_grid(sc, opts)?;
    let ics = initial_conditions(sc)?;
    let trajs = ics
        .par_iter()
        .map(|x0| integrate_rk4_sampled(&field, x0, t_end, dt, stride))
        .collect::<Result<Vec<_>>>()?;
    let trajs = trajs
        .into_iter()
        .zip(&ics)
        .map(|(t, x0)| {
            let mut cols = columns(sc, x0)?;
            if sc.hamiltonians.is_some() {
                cols.q_coefficients = None;
            }
            Ok((t, cols))
        })
        .collect::<std::result::Result<Vec<_>, CliError>>()?;
    Ok(with_invariants(sc, "simulate", trajs))
}

fn invariant_entry(index: usize, traj: &Trajectory, c: Option<[f64; 3]>, hopf: Option<f64>) -> Value {
    let reports = conservation_report(traj, c);
    let mut map = Map::new();
    let mut worst: f64 = 0.0;
    for r in &reports {
        worst = worst.max(r.max_drift);
        map.insert(
            r.name.clone(),
            json!({ "initial": r.initial(), "max_drift": r.max_drift }),
        );
    }
    json!({
        "index": index,
        "method": traj.method(),
        "invariants": map,
        "max_drift": worst,
        "hopf_residual": hopf,
    })
}

pub(super) fn invariants(sc: &Scenario, opts: &Options) -> CmdResult {
    let tol = opts.tol.unwrap_or(DRIFT_TOL);
    let (t_end, dt, stride) = time_grid(sc, opts)?;
    let ics = initial_conditions(sc)?;
    let entries: Vec<Value> = if sc.hamiltonians.is_some() && sc.profile.is_none() {
        let field = simulation_field(sc)?;
        ics.par_iter()
            .enumerate()
            .map(|(i, x0)| {
                let t = integrate_rk4_sampled(&field, x0, t_end, dt, stride)?;
                Ok(invariant_entry(i, &t, None, None))
            })
            .collect::<Result<_>>()?
    } else {
        let sys = exact_system(sc)?;
        let times = sample_times(t_end, dt, stride)?;
        let cols: Vec<CsvColumns> = ics.iter().map(|x0| columns(sc, x0)).collect::<std::result::Result<_, _>>()?;
        ics.par_iter()
            .zip(cols.par_iter())
            .enumerate()
            .map(|(i, (x0, c))| {
                let t = sys.flow(x0, &times)?;
                let hopf = match &sys {
                    Exact::Oscillator(o) => Some(hopf_check(&t, o)?),
                    Exact::Dirac(_) => None,
                };
                Ok(invariant_entry(i, &t, c.q_coefficients, hopf))
            })
            .collect::<Result<_>>()?
    };
    let worst = entries
        .iter()
        .filter_map(|e| e["max_drift"].as_f64())
        .fold(0.0, f64::max);
    let value = json!({
        "tolerance": tol,
        "max_drift": worst,
        "ok": worst <= tol,
        "trajectories": entries,
    });
    Ok(Outcome::single("invariants", Output::Report(value)))
}

fn frozen_coefficients(sc: &Scenario) -> std::result::Result<(Vec<f64>, [f64; 3]), CliError> {
    let profile = sc
        .profile()?
        .ok_or_else(|| ValidationError::new("profile", "required for this command"))?;
    let rho = sc.symmetry.rho.clone().unwrap_or_else(|| vec![1.0; sc.n]);
    let c = profile.coefficients(&rho);
    Ok((rho, c))
}

pub(super) fn symmetry(sc: &Scenario, opts: &Options) -> CmdResult {
    let tol = opts.tol.unwrap_or(CLOSURE_TOL);
    let s = sc.structure()?;
    let (rho, c) = frozen_coefficients(sc)?;
    let basis = solve_invariance(&s, &c)?;
    let split = split_components(&basis)?;
    let closure = closure_check(&basis, tol)?;
    let sv = basis.singular_values.clone();
    let value = json!({
        "n": sc.n,
        "rho": rho,
        "c": c,
        "dimension": basis.len(),
        "expected_dimension": 1 + sc.n * (2 * sc.n + 1),
        "commutant_dimension": split.commutant.len(),
        "rotation_generator": {
            "x": rows(&split.rotation_generator.x),
            "j": rows(&split.rotation_generator.j),
        },
        "closure_residual": closure.max_residual,
        "rotation_commutation": closure.rotation_commutation,
        "singular_value_gap": sv.as_ref().map(|s| s.gap),
        "largest_null_singular_value": sv.as_ref().map(|s| s.largest_null),
        "smallest_kept_singular_value": sv.as_ref().map(|s| s.smallest_kept),
    });
    Ok(Outcome::single("symmetry", Output::Report(value)))
}

pub(super) fn detect(sc: &Scenario, opts: &Options) -> CmdResult {
    let s = sc.structure()?;
    let field: Field = match sc.vector_field()? {
        Some(components) => Box::new(move |x: &DVector<f64>| {
            DVector::from_iterator(components.len(), components.iter().map(|e| e.eval(x.as_slice())))
        }),
        None => {
            if sc.profile.is_none() {
                return Err(ValidationError::new("field", "give `field` or `profile`").into());
            }
            simulation_field(sc)?
        }
    };
    let radii = sc
        .detect
        .radii
        .clone()
        .unwrap_or_else(|| [0.5, 1.0, 2.0].iter().map(|r| vec![*r; sc.n]).collect());
    let per = sc.detect.samples_per_radius.unwrap_or(4).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let samples = samples_on_radii(&mut rng, &radii, per)?;
    let report = detect_oscillator(&field, &s, &samples)?;
    let value = serde_json::to_value(&report).expect("report serializes");
    Ok(Outcome::single("detect", Output::Report(value)))
}
