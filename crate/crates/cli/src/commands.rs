//! Implementations of the subcommands: parse the declared input kind,
//! call the library, and render JSON or CSV with full-precision floats.

use std::io::Read;
use std::path::PathBuf;
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use orbint::{
    angles_from_rotation, angles_from_unit_vector, builtin_integrands, compare_methods,
    hilbert_density, integrand_by_name, integrate_ambient_mc, integrate_domain_w,
    integrate_orbit_u, orthogonal_group_volume, rotation_from_angles, sphere_volume,
    stiefel_volume, vector_from_angles, DecayClass, EulerAngles, GramMatrix, IntegralEstimate,
    McConfig, Method, RotationMatrix, VectorTuple, WScheme, WSchemeChoice,
};

use crate::output::{csv_f64, to_json_line};
use crate::{
    AppError, DensityArgs, EulerArgs, EulerKind, Format, IntegrateArgs, IoArgs, LiftArgs,
    MethodArg, ReduceArgs, VerifyArgs, VolumesArgs,
};

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn read_input(io: &IoArgs) -> Result<String, AppError> {
    match &io.input {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| AppError::Io(format!("reading {}: {e}", path.display()))),
        None => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| AppError::Io(format!("reading standard input: {e}")))?;
            Ok(text)
        }
    }
}

fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, AppError> {
    serde_json::from_str(text).map_err(|e| AppError::Usage(format!("malformed {what} JSON: {e}")))
}

fn write_output(target: &Option<PathBuf>, content: &str) -> Result<(), AppError> {
    match target {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| AppError::Io(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// The orbit-space subcommands only make sense when the invariants are
/// algebraically independent, which happens exactly for 1 <= k <= m.
fn require_coregular(k: usize, m: usize) -> Result<(), AppError> {
    if k >= 1 && k <= m {
        Ok(())
    } else {
        Err(AppError::Usage(format!(
            "this operation lives on the orbit space and requires the coregularity \
             bound 1 <= k <= m; got k={k}, m={m}"
        )))
    }
}

fn check_matches(flag: Option<usize>, actual: usize, what: &str) -> Result<(), AppError> {
    match flag {
        Some(expected) if expected != actual => Err(AppError::Usage(format!(
            "--{what} {expected} does not match the input's {what}={actual}"
        ))),
        _ => Ok(()),
    }
}

fn elapsed_ms(start: Instant) -> u64 {
    u64::try_from(start.elapsed().as_millis()).unwrap_or(u64::MAX)
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

pub(crate) fn density(a: DensityArgs) -> Result<(), AppError> {
    if let Some(k) = a.k {
        require_coregular(k, a.m)?;
    }
    let g: GramMatrix = parse_json(&read_input(&a.io)?, "Gram matrix")?;
    check_matches(a.k, g.k(), "k")?;
    require_coregular(g.k(), a.m)?;
    let d = hilbert_density(&g, a.m, a.tol)?;
    let out = json!({
        "k": g.k(),
        "m": a.m,
        "value": d.value,
        "log_value": d.log_value,
        "singular": d.singular,
    });
    write_output(&a.io.output, &to_json_line(&out))
}

pub(crate) fn volumes(a: VolumesArgs) -> Result<(), AppError> {
    if a.m < 1 {
        return Err(AppError::Usage("need m >= 1".into()));
    }
    if let Some(k) = a.k {
        require_coregular(k, a.m)?;
    }
    let spheres: Vec<f64> = (0..a.m).map(sphere_volume).collect();
    let group = orthogonal_group_volume(a.m);
    let frames = match a.k {
        Some(k) => Some(stiefel_volume(a.m, k)?),
        None => None,
    };
    let rendered = match a.format {
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("m".into(), a.m.into());
            if let Some(k) = a.k {
                obj.insert("k".into(), k.into());
            }
            obj.insert(
                "sphere_volumes".into(),
                spheres.iter().copied().map(Value::from).collect::<Vec<_>>().into(),
            );
            obj.insert("orthogonal_group_volume".into(), group.into());
            if let Some(f) = frames {
                obj.insert("stiefel_volume".into(), f.into());
            }
            to_json_line(&Value::Object(obj))
        }
        Format::Csv => {
            let mut out = String::from("quantity,value\n");
            for (j, v) in spheres.iter().enumerate() {
                out.push_str(&format!("sphere_volume_{j},{}\n", csv_f64(*v)));
            }
            out.push_str(&format!("orthogonal_group_volume,{}\n", csv_f64(group)));
            if let Some(f) = frames {
                out.push_str(&format!("stiefel_volume,{}\n", csv_f64(f)));
            }
            out
        }
    };
    write_output(&a.output, &rendered)
}

pub(crate) fn reduce(a: ReduceArgs) -> Result<(), AppError> {
    let v: VectorTuple = parse_json(&read_input(&a.io)?, "vector tuple")?;
    check_matches(a.k, v.k(), "k")?;
    check_matches(a.m, v.m(), "m")?;
    require_coregular(v.k(), v.m())?;
    let r = orbint::reduce(&v)?;
    let out = json!({
        "w": serde_json::to_value(&r.w).expect("factor serializes"),
        "schedule": serde_json::to_value(&r.schedule).expect("schedule serializes"),
        "rotation": serde_json::to_value(&r.rotation).expect("rotation serializes"),
    });
    write_output(&a.io.output, &to_json_line(&out))
}

pub(crate) fn lift(a: LiftArgs) -> Result<(), AppError> {
    let g: GramMatrix = parse_json(&read_input(&a.io)?, "Gram matrix")?;
    check_matches(a.k, g.k(), "k")?;
    require_coregular(g.k(), a.m)?;
    let v = orbint::lift(&g, a.m, a.tol)?;
    write_output(&a.io.output, &to_json_line(&v))
}

pub(crate) fn euler(a: EulerArgs) -> Result<(), AppError> {
    let text = read_input(&a.io)?;
    let angles: EulerAngles = match a.from {
        EulerKind::Angles => parse_json(&text, "angle tuple")?,
        EulerKind::Vector => {
            let v: Vec<f64> = parse_json(&text, "vector")?;
            angles_from_unit_vector(&v)?
        }
        EulerKind::Matrix => {
            let mat: RotationMatrix = parse_json(&text, "rotation matrix")?;
            angles_from_rotation(&mat)?
        }
    };
    check_matches(a.m, angles.m(), "m")?;
    let rendered = match a.to {
        // Angle input passes through as given; recovered angles are
        // canonical already, and angles-to-angles canonicalizes.
        EulerKind::Angles => {
            let out = match a.from {
                EulerKind::Angles => angles.canonicalized(),
                _ => angles,
            };
            to_json_line(&out)
        }
        EulerKind::Vector => to_json_line(&vector_from_angles(&angles)),
        EulerKind::Matrix => to_json_line(&rotation_from_angles(&angles)),
    };
    write_output(&a.io.output, &rendered)
}

pub(crate) fn integrate(a: IntegrateArgs) -> Result<(), AppError> {
    if a.k < 1 || a.m < 1 {
        return Err(AppError::Usage(format!(
            "need k >= 1 and m >= 1; got k={}, m={}",
            a.k, a.m
        )));
    }
    if matches!(a.method, MethodArg::DomainW | MethodArg::OrbitU) {
        require_coregular(a.k, a.m)?;
    }
    let g = integrand_by_name(&a.integrand)?;
    let scheme = WScheme {
        choice: WSchemeChoice::Auto,
        nodes_per_dim: a.nodes,
        mc: McConfig {
            samples: a.samples,
            seed: a.seed,
            chunk_size: a.chunk,
        },
        jacobian_log2_offset: 0,
    };
    let start = Instant::now();
    let rendered = match a.method {
        MethodArg::Ambient => {
            single_estimate(integrate_ambient_mc(&g, a.k, a.m, &scheme.mc)?, start)
        }
        MethodArg::DomainW => single_estimate(integrate_domain_w(&g, a.k, a.m, &scheme)?, start),
        MethodArg::OrbitU => single_estimate(integrate_orbit_u(&g, a.k, a.m, &scheme)?, start),
        MethodArg::All => {
            let report = compare_methods(&g, a.k, a.m, &scheme)?;
            let mut value = serde_json::to_value(&report).expect("report serializes");
            value
                .as_object_mut()
                .expect("report is an object")
                .insert("elapsed_ms".into(), elapsed_ms(start).into());
            to_json_line(&value)
        }
    };
    write_output(&a.output, &rendered)
}

fn single_estimate(estimate: IntegralEstimate, start: Instant) -> String {
    to_json_line(&json!({
        "value": estimate.value,
        "std_error": estimate.std_error,
        "method": estimate.method,
        "samples": estimate.samples_or_nodes,
        "elapsed_ms": elapsed_ms(start),
    }))
}

// ---------------------------------------------------------------------------
// Verification table
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct VerifyRow {
    integrand: String,
    k: usize,
    m: usize,
    method: Method,
    value: f64,
    std_error: f64,
    z_max: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    rows: Vec<VerifyRow>,
    pass: bool,
}

pub(crate) fn verify(a: VerifyArgs) -> Result<(), AppError> {
    let mut rows = Vec::new();
    let mut seed = a.seed;
    for g in builtin_integrands() {
        let pairs: Vec<(usize, usize)> = match g.decay() {
            DecayClass::Gaussian => (1..=4usize)
                .flat_map(|m| (1..=m).map(move |k| (k, m)))
                .filter(|&(k, _)| k >= g.min_k())
                .collect(),
            // Indicator mass in high dimension is too small for useful
            // Monte Carlo rows; keep the compact cases low-dimensional.
            DecayClass::Compact { .. } => vec![(1, 2), (1, 3), (2, 2)],
        };
        for (k, m) in pairs {
            let scheme = WScheme {
                choice: WSchemeChoice::Auto,
                nodes_per_dim: a.nodes,
                mc: McConfig {
                    samples: a.samples,
                    seed,
                    chunk_size: a.chunk,
                },
                jacobian_log2_offset: if a.inject_fault { -2 * k as i32 } else { 0 },
            };
            // Each table cell draws from its own seed block so adding
            // rows never reshuffles earlier ones.
            seed = seed.wrapping_add(16);
            let report = compare_methods(&g, k, m, &scheme)?;
            for estimate in &report.estimates {
                rows.push(VerifyRow {
                    integrand: report.integrand.clone(),
                    k,
                    m,
                    method: estimate.method,
                    value: estimate.value,
                    std_error: estimate.std_error,
                    z_max: report.z_max_for(estimate.method),
                    pass: report.passes_for(estimate.method),
                });
            }
        }
    }
    let failing = rows.iter().filter(|r| !r.pass).count();
    let rendered = match a.format {
        Format::Json => to_json_line(&VerifyReport {
            pass: failing == 0,
            rows,
        }),
        Format::Csv => {
            let mut out = String::from("integrand,k,m,method,value,std_error,z_max,pass\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.integrand,
                    r.k,
                    r.m,
                    r.method,
                    csv_f64(r.value),
                    csv_f64(r.std_error),
                    csv_f64(r.z_max),
                    r.pass
                ));
            }
            out
        }
    };
    write_output(&a.output, &rendered)?;
    if failing > 0 {
        return Err(AppError::VerifyFailed {
            failing_rows: failing,
        });
    }
    Ok(())
}
