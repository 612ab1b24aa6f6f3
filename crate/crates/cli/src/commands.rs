use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use entwit::formats::{
    resolve_sources, DiScenario, NoiseSpec, SourceSpec, SteerScenario, WitnessChoice, WitnessFile,
};
use entwit::linalg::Operator;
use entwit::objects::TomographicBasis;
use entwit::sampling::Seed;
use entwit::separability::{
    all_cuts, classify_measurement, DecompositionSearch, SeparabilityOptions,
};
use entwit::star::{
    builtin_functional, di_detect, functional_e, local_model_correlations, random_local_model,
    DiOptions, SeesawBudget,
};
use entwit::steering::{
    functional_s, functional_s_per_b, quantum_correlations, quantum_value_closed_form,
    random_sohs_model, sohs_correlations, steering_witness, visibility_threshold,
};
use entwit::witness::search::{term_search, SearchOptions};
use entwit::witness::{
    builtin_wbm, builtin_wbm_prime, min_over_product_states, witness_from_element,
};
use entwit::{Measurement64, Status, Tolerances64, Witness64};

use crate::args::{Builtin, Command, OnOff, Oracle};
use crate::error::CliError;

pub struct Context {
    pub seed: u64,
    pub tol: Tolerances64,
    pub restarts: Option<usize>,
    pub basis: Option<String>,
    pub per_b: Option<OnOff>,
}

pub struct Outcome {
    pub text: String,
    pub outputs: Value,
    pub exit: i32,
    pub digest: Option<String>,
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<(T, String), CliError> {
    let bytes = read(path)?;
    let value = serde_json::from_slice(&bytes).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok((value, crate::record::digest(&bytes)))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("records serialize")
}

fn bases_for(id: &str, dims: &[usize]) -> Result<Vec<TomographicBasis<f64>>, CliError> {
    Ok(dims
        .iter()
        .map(|&d| TomographicBasis::by_id(id, d))
        .collect::<Result<Vec<_>, _>>()?)
}

fn builtin(b: Builtin) -> Witness64 {
    match b {
        Builtin::Wbm => builtin_wbm(),
        Builtin::WbmPrime => builtin_wbm_prime(),
    }
}

fn grid(points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![1.0],
        n => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn run(cmd: &Command, ctx: &Context) -> Result<Outcome, CliError> {
    match cmd {
        Command::Classify { measurement } => classify(measurement, ctx),
        Command::Witness {
            measurement,
            element,
            builtin,
            emit,
        } => witness(
            measurement.as_deref(),
            *element,
            *builtin,
            emit.as_deref(),
            ctx,
        ),
        Command::Steer {
            scenario,
            sweep,
            csv,
            sohs_samples,
        } => steer(scenario, *sweep, csv.as_deref(), *sohs_samples, ctx),
        Command::Di {
            scenario,
            sweep,
            csv,
            allow_non_rank_one,
            local_samples,
        } => di(
            scenario,
            *sweep,
            csv.as_deref(),
            *allow_non_rank_one,
            *local_samples,
            ctx,
        ),
        Command::Oracle { which } => oracle(which, ctx),
    }
}

fn classify(path: &Path, ctx: &Context) -> Result<Outcome, CliError> {
    let (m, digest): (Measurement64, _) = load(path)?;
    let opts = SeparabilityOptions {
        tolerances: ctx.tol,
        search: Some(DecompositionSearch {
            restarts: ctx.restarts.unwrap_or(16),
            seed: Seed::new(ctx.seed),
            ..Default::default()
        }),
    };
    let v = classify_measurement(&m, &opts)?;
    let n = m.len();
    let mut text = match v.verdict {
        Status::Entangled => format!("entangled ({}/{n} elements)", v.count(Status::Entangled)),
        Status::Separable => "separable".to_string(),
        Status::Undetermined => format!(
            "undetermined ({}/{n} elements)",
            v.count(Status::Undetermined)
        ),
    };
    text.push('\n');
    for (b, e) in v.per_element.iter().enumerate() {
        let _ = writeln!(text, "element {b}: {}", e.status);
    }
    Ok(Outcome {
        text,
        outputs: json!({
            "measurement": m.name(),
            "verdict": v.verdict,
            "entangled": v.count(Status::Entangled),
            "separable": v.count(Status::Separable),
            "undetermined": v.count(Status::Undetermined),
            "per_element": to_value(&v.per_element),
        }),
        exit: if v.verdict == Status::Undetermined {
            3
        } else {
            0
        },
        digest: Some(digest),
    })
}

fn beta_table(w: &Witness64) -> String {
    let mut s = String::new();
    if let Some(beta) = w.beta() {
        let header: Vec<String> = (1..=beta.shape.len()).map(|k| format!("i{k}")).collect();
        let _ = writeln!(s, "{},beta", header.join(","));
        let mut idx = vec![0; beta.shape.len()];
        for (flat, v) in beta.values.iter().enumerate() {
            let mut rem = flat;
            for k in (0..beta.shape.len()).rev() {
                idx[k] = rem % beta.shape[k];
                rem /= beta.shape[k];
            }
            let cols: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
            let _ = writeln!(s, "{},{v:.12}", cols.join(","));
        }
    }
    s
}

fn witness(
    measurement: Option<&Path>,
    element: Option<usize>,
    which: Option<Builtin>,
    emit: Option<&Path>,
    ctx: &Context,
) -> Result<Outcome, CliError> {
    let basis_id = ctx.basis.clone().unwrap_or_else(|| "standard".into());
    let (w, summary, digest) = match (which, measurement) {
        (Some(b), _) => {
            let bases = bases_for(&basis_id, &[2, 2])?;
            let refs: Vec<_> = bases.iter().collect();
            let w = builtin(b).with_beta(&refs)?;
            let name = match b {
                Builtin::Wbm => "W_BM",
                Builtin::WbmPrime => "W'_BM",
            };
            let s = format!(
                "{name}: {} correlation terms",
                w.correlation_count().unwrap_or(0)
            );
            (w, s, None)
        }
        (None, Some(path)) => {
            let (m, digest): (Measurement64, _) = load(path)?;
            let (b, cut, w) = match element {
                Some(k) => {
                    let e = m.effect(k)?;
                    let mut best: Option<(Vec<usize>, f64)> = None;
                    for cut in all_cuts(e.n_factors()) {
                        let min = e
                            .partial_transpose_on(&cut)?
                            .min_eigenvalue(ctx.tol.hermitian)?;
                        if best.as_ref().is_none_or(|(_, v)| min < *v) {
                            best = Some((cut, min));
                        }
                    }
                    let (cut, _) =
                        best.ok_or_else(|| CliError::Usage("element has a single factor".into()))?;
                    let w = witness_from_element(e, &cut, &ctx.tol)?;
                    (k, cut, w)
                }
                None => entwit::witness::witness_for_measurement(&m, &ctx.tol)?,
            };
            let bases = bases_for(&basis_id, m.dims())?;
            let refs: Vec<_> = bases.iter().collect();
            let w = w.with_beta(&refs)?;
            let tr = w.operator().trace_inner_re(m.effect(b)?)?;
            let s = format!("witness for element {b} (cut {cut:?}): Tr(W E_{b}) = {tr:.12}");
            (w, s, Some(digest))
        }
        (None, None) => {
            return Err(CliError::Usage(
                "give a measurement file or --builtin".into(),
            ));
        }
    };
    let residual = w.beta().map(|b| b.residual).unwrap_or(0.0);
    let file = WitnessFile {
        scale: w.scale()?,
        witness: w,
        tolerances: ctx.tol,
    };
    if let Some(p) = emit {
        crate::record::write_json(p, &file)?;
    }
    let text = format!(
        "{summary}\nbeta residual: {residual:.3e}\nscale: {:.12}\n{}",
        file.scale,
        beta_table(&file.witness)
    );
    Ok(Outcome {
        text,
        outputs: json!({ "witness": to_value(&file), "beta_residual": residual }),
        exit: 0,
        digest,
    })
}

fn sources_noise(
    spec: &SourceSpec,
    dims: &[usize],
    v: f64,
) -> Result<Vec<Operator<f64>>, CliError> {
    Ok(resolve_sources(spec, dims, Some(&NoiseSpec::Uniform(v)))?)
}

fn write_csv(rows: &str, csv: Option<&Path>, text: &mut String) -> Result<(), CliError> {
    match csv {
        Some(p) => std::fs::write(p, rows).map_err(|source| CliError::Io {
            path: PathBuf::from(p),
            source,
        }),
        None => {
            text.push_str(rows);
            Ok(())
        }
    }
}

fn steer(
    path: &Path,
    sweep: Option<usize>,
    csv: Option<&Path>,
    sohs_samples: usize,
    ctx: &Context,
) -> Result<Outcome, CliError> {
    let (sc, digest): (SteerScenario, _) = load(path)?;
    let bob = &sc.bob_measurement;
    let basis_id = ctx.basis.clone().unwrap_or_else(|| sc.basis_id.clone());
    let sources = resolve_sources(&sc.sources, bob.dims(), sc.noise.as_ref())?;
    let outer: Vec<usize> = sources.iter().map(|s| s.dims()[0]).collect();
    let bases = bases_for(&basis_id, &outer)?;
    let refs: Vec<_> = bases.iter().collect();
    let w = match sc.witness {
        WitnessChoice::Auto => steering_witness(bob, &refs, &ctx.tol)?.1,
        WitnessChoice::Wbm => builtin_wbm().with_beta(&refs)?,
        WitnessChoice::WbmPrime => builtin_wbm_prime().with_beta(&refs)?,
    };
    let beta = w.beta().expect("β attached");
    let table = quantum_correlations(bob, &sources, &refs, &ctx.tol)?;
    table.check(1e-9)?;
    let (s, arg) = functional_s(&table, beta)?;
    let per_b = functional_s_per_b(&table, beta)?;
    let clean = matches!(sc.sources, SourceSpec::Named(_)) && sc.noise.is_none();
    let closed = if clean {
        Some(quantum_value_closed_form(bob, &w)?.0)
    } else {
        None
    };
    let mut rng = Seed::new(ctx.seed).with_stream(1).rng();
    let mut sohs_max = f64::NEG_INFINITY;
    for _ in 0..sohs_samples {
        let model = random_sohs_model(&outer, 4, bob.len(), &mut rng)?;
        let t = sohs_correlations(&model, &refs, &ctx.tol)?;
        sohs_max = sohs_max.max(functional_s(&t, beta)?.0);
    }
    let mut text = format!("S = {s:.12} at b = {arg}\n");
    if let Some(c) = closed {
        let _ = writeln!(text, "closed form: {c:.12}");
    }
    if sohs_samples > 0 {
        let _ = writeln!(
            text,
            "SOHS sanity: max S over {sohs_samples} models = {sohs_max:.3e}"
        );
    }
    let points = sweep.or(sc.sweep.map(|s| s.points)).unwrap_or(0);
    let mut rows = Vec::new();
    let mut threshold = None;
    if points > 0 {
        let base = resolve_sources(&sc.sources, bob.dims(), None)?;
        threshold = visibility_threshold(bob, &base, &refs, beta, &ctx.tol)?;
        let mut out = String::from("visibility,S,argmax_b\n");
        for v in grid(points) {
            let t = quantum_correlations(
                bob,
                &sources_noise(&sc.sources, bob.dims(), v)?,
                &refs,
                &ctx.tol,
            )?;
            let (sv, b) = functional_s(&t, beta)?;
            let _ = writeln!(out, "{v:.6},{sv:.12},{b}");
            rows.push(json!({ "visibility": v, "S": sv, "argmax_b": b }));
        }
        match threshold {
            Some(t) => {
                let _ = writeln!(text, "threshold visibility: {t:.9}");
            }
            None => text.push_str("threshold visibility: none (S <= 0 at v = 1)\n"),
        }
        write_csv(&out, csv, &mut text)?;
    }
    Ok(Outcome {
        text,
        outputs: json!({
            "table": to_value(&table),
            "S_value": s,
            "argmax_b": arg,
            "per_b": per_b,
            "beta_id": basis_id,
            "closed_form": closed,
            "sohs_samples": sohs_samples,
            "sohs_max": if sohs_samples > 0 { Some(sohs_max) } else { None },
            "sweep": rows,
            "threshold_visibility": threshold,
        }),
        exit: 0,
        digest: Some(digest),
    })
}

fn di(
    path: &Path,
    sweep: Option<usize>,
    csv: Option<&Path>,
    allow: bool,
    local_samples: usize,
    ctx: &Context,
) -> Result<Outcome, CliError> {
    let (sc, digest): (DiScenario, _) = load(path)?;
    let f = sc.bell_functional.resolve()?;
    let bob = &sc.bob_measurement;
    let sources = resolve_sources(&sc.sources, bob.dims(), sc.noise.as_ref())?;
    let per_b = match ctx.per_b {
        Some(OnOff::On) => true,
        Some(OnOff::Off) => false,
        None => sc.per_b_settings.unwrap_or(true),
    };
    let budget = SeesawBudget {
        restarts: ctx.restarts.or(sc.optimizer.restarts).unwrap_or(200),
        max_iters: sc.optimizer.max_iters.unwrap_or(500),
        seed: ctx.seed,
        ..Default::default()
    };
    let opts = DiOptions {
        budget,
        per_b_settings: per_b,
        allow_non_rank_one: allow || sc.allow_non_rank_one,
    };
    let report = di_detect(bob, &f, Some(&sources), &opts, &ctx.tol)?;
    let mut text = format!(
        "E = {:.9} at b = {} ({}; {} settings)\n",
        report.value,
        report.argmax_b,
        report.verdict,
        if per_b { "per-b" } else { "shared" }
    );
    for r in &report.per_b {
        let _ = writeln!(
            text,
            "b = {}: p(b) = {:.6}, Bell value {:.9}, E_b = {:.9}",
            r.b, r.p_b, r.bell_value, r.e_value
        );
    }
    let mut rng = Seed::new(ctx.seed).with_stream(2).rng();
    let mut local_max = f64::NEG_INFINITY;
    for _ in 0..local_samples {
        let m = random_local_model(f.inputs(), f.outputs(), bob.len(), 4, &mut rng);
        let t = local_model_correlations(&m, 1e-9)?;
        local_max = local_max.max(functional_e(&t, &f)?.0);
    }
    if local_samples > 0 {
        let _ = writeln!(
            text,
            "local sanity: max E over {local_samples} models = {local_max:.3e}"
        );
    }
    let points = sweep.unwrap_or(0);
    let mut rows = Vec::new();
    if points > 0 {
        let mut out = String::from("visibility,E,argmax_b\n");
        for v in grid(points) {
            let r = di_detect(
                bob,
                &f,
                Some(&sources_noise(&sc.sources, bob.dims(), v)?),
                &opts,
                &ctx.tol,
            )?;
            let _ = writeln!(out, "{v:.6},{:.12},{}", r.value, r.argmax_b);
            rows.push(json!({ "visibility": v, "E": r.value, "argmax_b": r.argmax_b }));
        }
        write_csv(&out, csv, &mut text)?;
    }
    Ok(Outcome {
        text,
        outputs: json!({
            "report": to_value(&report),
            "local_samples": local_samples,
            "local_max": if local_samples > 0 { Some(local_max) } else { None },
            "sweep": rows,
        }),
        exit: 0,
        digest: Some(digest),
    })
}

fn oracle(which: &Oracle, ctx: &Context) -> Result<Outcome, CliError> {
    match which {
        Oracle::Lhv { functional } => {
            let p = Path::new(functional);
            let (f, digest) = if p.exists() {
                let (spec, d): (entwit::formats::FunctionalSpec, _) = load(p)?;
                (spec.resolve()?, Some(d))
            } else {
                (builtin_functional(functional)?, None)
            };
            let sol = f.lhv_solution();
            Ok(Outcome {
                text: format!(
                    "{}: LHV bound {} (strategy {:?})\n",
                    f.name(),
                    sol.bound,
                    sol.strategy
                ),
                outputs: json!({ "functional": f.name(), "lhv_bound": sol.bound, "strategy": sol.strategy }),
                exit: 0,
                digest,
            })
        }
        Oracle::ProductMin {
            witness,
            builtin: b,
        } => {
            let (w, digest) = match (witness, b) {
                (_, Some(b)) => (builtin(*b), None),
                (Some(p), None) => {
                    let (file, d): (WitnessFile, _) = load(p)?;
                    (file.witness, Some(d))
                }
                (None, None) => {
                    return Err(CliError::Usage("give a witness file or --builtin".into()))
                }
            };
            let restarts = ctx.restarts.unwrap_or(1000);
            let r = min_over_product_states(&w, restarts, Seed::new(ctx.seed))?;
            Ok(Outcome {
                text: format!(
                    "min over product states ({restarts} restarts): {:.12}\n",
                    r.value
                ),
                outputs: json!({ "value": r.value, "restarts": restarts, "states": to_value(&r.states) }),
                exit: 0,
                digest,
            })
        }
        Oracle::TermSearch {
            measurement,
            max_terms,
            starts,
            steps,
        } => {
            let (m, digest): (Measurement64, _) = load(measurement)?;
            let opts = SearchOptions {
                max_terms: *max_terms,
                starts: *starts,
                steps: *steps,
                verify_restarts: ctx.restarts.unwrap_or(200),
                seed: ctx.seed,
                ..Default::default()
            };
            let report = term_search(&m, &opts)?;
            let mut text = String::from("terms,margin,quantum_max,product_max,detecting\n");
            for r in &report.rows {
                let _ = writeln!(
                    text,
                    "{},{:.9},{:.9},{:.9},{}",
                    r.terms, r.margin, r.quantum_max, r.product_max, r.detecting
                );
            }
            match report.min_detecting_terms {
                Some(k) => {
                    let _ = writeln!(text, "fewest detecting terms found: {k}");
                }
                None => text.push_str("no detecting candidate found\n"),
            }
            Ok(Outcome {
                text,
                outputs: to_value(&report),
                exit: 0,
                digest: Some(digest),
            })
        }
    }
}
