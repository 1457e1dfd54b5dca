use affine_kms::acceptance::{run_all, run_one, SuiteConfig, CRITERION_COUNT};
use affine_kms::algebra::{projection_e_f, Monomial, TermRecord};
use affine_kms::arith::{gcd, EULER_GAMMA};
use affine_kms::asymptotics::{
    delta_estimate, dickman, dickman_mass, mertens_product, psi_count, smooth_harmonic_sum, wiener_sum, FourierData,
};
use affine_kms::measures::{
    check_subconformal, decompose, extremal_measure, pushforward, t_beta, t_beta_exact_root, AtomicMeasure,
    MeasureDocument, SubconformalVerdict,
};
use affine_kms::states::{
    apply_kappa, eval_element, eval_state, kms_residual, limit_beta1, qz_coherence, reconstruct_check,
    superposition_check, Argument, Evaluation, StateSpec,
};
use affine_kms::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::output::{Cx, Report};
use crate::parse;
use crate::{Command, Failure, Options};

fn required<T: Copy>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("{flag} is required")))
}

fn pool(opts: &Options) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs as usize)
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start {} workers: {e}", opts.jobs)))
}

#[derive(Serialize)]
struct AtomRow {
    num: u64,
    den: u64,
    weight: f64,
}

fn measure_report(doc: &impl Serialize, nu: &AtomicMeasure) -> Result<Report, Failure> {
    let rows: Vec<AtomRow> = nu
        .iter()
        .map(|(z, weight)| AtomRow {
            num: z.num(),
            den: z.den(),
            weight,
        })
        .collect();
    Report::with_table(doc, &rows)
}

#[derive(Serialize)]
struct EvalDoc<'a, A: Serialize> {
    spec: &'a StateSpec,
    #[serde(flatten)]
    argument: A,
    value: Cx,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail_bound: Option<f64>,
}

#[derive(Serialize)]
struct MonomialArg {
    monomial: Monomial,
}

#[derive(Serialize)]
struct ElementArg {
    element: Vec<TermRecord>,
}

fn eval_doc<A: Serialize>(spec: &StateSpec, argument: A, e: Evaluation) -> Result<Report, Failure> {
    Report::single(&EvalDoc {
        spec,
        argument,
        value: e.value.into(),
        tail_bound: e.tail_bound,
    })
}

pub fn run(command: &Command, opts: &Options) -> Result<Report, Failure> {
    match command {
        Command::EvalState {
            state,
            monomial,
            qz,
            element,
        } => {
            let spec = parse::state(state, opts)?;
            if let Some(m) = monomial {
                let x = parse::monomial(m)?;
                eval_doc(&spec, MonomialArg { monomial: x }, eval_state(&spec, x)?)
            } else if let Some(q) = qz {
                let x = parse::qz_monomial(q)?;
                let value = eval_state(&spec, Argument::Qz(x))?;
                eval_doc(&spec, json!({ "monomial": x }), value)
            } else {
                let path = element
                    .as_deref()
                    .ok_or_else(|| Failure::Usage("no argument given".into()))?;
                let x = parse::read_element(path)?;
                let value = eval_element(&spec, &x)?;
                eval_doc(
                    &spec,
                    ElementArg {
                        element: x.to_records(),
                    },
                    value,
                )
            }
        }
        Command::KmsCheck {
            state,
            samples,
            max_index,
            max_power,
        } => kms_check(
            &parse::state(state, opts)?,
            *samples,
            *max_index,
            *max_power as i64,
            opts,
        ),
        Command::Decompose { measure } => {
            let beta = required(opts.beta, "--beta")?;
            let nu = parse::read_measure(measure)?;
            match decompose(&nu, beta, opts.tol) {
                Ok(d) => {
                    #[derive(Serialize)]
                    struct Row {
                        n: u64,
                        lambda: f64,
                    }
                    let rows: Vec<Row> = d.coefficients.iter().map(|(&n, &lambda)| Row { n, lambda }).collect();
                    let doc = json!({
                        "beta": d.beta,
                        "coefficients": rows,
                        "total": d.total,
                        "reconstruction_error": d.reconstruction_error,
                    });
                    let error = d.reconstruction_error;
                    Ok(
                        Report::with_table(&doc, &rows)?.violated_if(error > opts.tol.max(1e-9), || {
                            format!("reconstruction deviates by {error:e}")
                        }),
                    )
                }
                Err(Error::NotSubconformal { n, value }) => {
                    let doc = json!({ "beta": beta, "subconformal": false, "n": n, "lambda": value });
                    Ok(Report::single(&doc)?.violated_if(true, || {
                        format!("not subconformal at beta = {beta}: lambda_{n} = {value:e} < 0")
                    }))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::CheckSubconformal { measure } => {
            let beta = required(opts.beta, "--beta")?;
            let nu = parse::read_measure(measure)?;
            let verdict = check_subconformal(&nu, beta, opts.prime_bound, opts.tol)?;
            let message = match &verdict {
                SubconformalVerdict::Fail(w) => Some(format!(
                    "A_(beta,F) nu has weight {:e} at {} for F = {:?}",
                    w.value, w.atom, w.primes
                )),
                SubconformalVerdict::Pass { .. } => None,
            };
            let doc = json!({ "beta": beta, "prime_bound": opts.prime_bound, "result": verdict });
            Ok(Report::single(&doc)?.violated_if(message.is_some(), || message.unwrap_or_default()))
        }
        Command::ExtremalMeasure => {
            let n = required(opts.n, "--n")?;
            let beta = required(opts.beta, "--beta")?;
            let nu = extremal_measure(n, beta)?;
            let doc = MeasureDocument::with_level(&nu, opts.level.unwrap_or(n))?;
            measure_report(&doc, &nu)
        }
        Command::Pushforward { measure, k } => {
            let nu = pushforward(&parse::read_measure(measure)?, *k)?;
            measure_report(&MeasureDocument::from_measure(&nu)?, &nu)
        }
        Command::TBeta { measure, root } => {
            let beta = required(opts.beta, "--beta")?;
            match (measure, root) {
                (Some(path), _) => {
                    let t = t_beta(&parse::read_measure(path)?, beta, opts.truncation)?;
                    let doc = json!({
                        "beta": beta,
                        "truncation": opts.truncation,
                        "measure": MeasureDocument::from_measure(&t.measure)?,
                        "tail_mass": t.tail_mass,
                        "tail_bound": t.tail_bound,
                    });
                    measure_report(&doc, &t.measure)
                }
                (None, Some(z)) => {
                    let nu = t_beta_exact_root(parse::root(z)?, beta)?;
                    let doc = json!({ "beta": beta, "measure": MeasureDocument::from_measure(&nu)? });
                    measure_report(&doc, &nu)
                }
                (None, None) => Err(Failure::Usage("give --measure or --root".into())),
            }
        }
        Command::LimitBeta1 { root, j_max } => {
            let betas: Vec<f64> = (1..=*j_max as i32).map(|j| 1.0 + 10f64.powi(-j)).collect();
            #[derive(Serialize)]
            struct Row {
                beta: f64,
                tv_distance: f64,
            }
            let rows: Vec<Row> = limit_beta1(parse::root(root)?, &betas)?
                .into_iter()
                .map(|(beta, tv_distance)| Row { beta, tv_distance })
                .collect();
            let decreasing = rows.windows(2).all(|w| w[1].tv_distance < w[0].tv_distance);
            let doc = json!({ "root": root, "rows": rows, "strictly_decreasing": decreasing });
            Ok(Report::with_table(&doc, &rows)?
                .violated_if(!decreasing, || "distances are not strictly decreasing".into()))
        }
        Command::SuperpositionCheck => {
            let n = required(opts.n, "--n")?;
            let beta = required(opts.beta, "--beta")?;
            let s = superposition_check(n, beta, opts.truncation)?;
            let doc = json!({ "n": n, "beta": beta, "truncation": opts.truncation, "result": s });
            Ok(
                Report::single(&doc)?.violated_if(s.max_deviation > s.tail_bound + opts.tol, || {
                    format!("deviation {:e} exceeds tail bound {:e}", s.max_deviation, s.tail_bound)
                }),
            )
        }
        Command::Kappa { b, monomial } => {
            let x = parse::monomial(monomial)?;
            let image = apply_kappa(*b, x)?;
            let Some(n) = opts.n else {
                return Report::single(&json!({ "b": b, "monomial": x, "image": image }));
            };
            let beta = required(opts.beta, "--beta with --n")?;
            let reduced = n / gcd(n, *b);
            let lhs = eval_state(&StateSpec::FiniteN { n, beta }, image)?.value;
            let rhs = eval_state(&StateSpec::FiniteN { n: reduced, beta }, x)?.value;
            let gap = (lhs - rhs).norm();
            let doc = json!({
                "b": b,
                "monomial": x,
                "image": image,
                "n": n,
                "reduced_n": reduced,
                "beta": beta,
                "lhs": Cx::from(lhs),
                "rhs": Cx::from(rhs),
                "gap": gap,
            });
            Ok(Report::single(&doc)?.violated_if(gap > opts.tol, || format!("symmetry gap {gap:e}")))
        }
        Command::QuotientEval { monomial, zeta } => {
            let n = required(opts.n, "--n")?;
            let beta = required(opts.beta, "--beta")?;
            let spec = match zeta {
                Some(z) => StateSpec::QuotientChar {
                    n,
                    zeta: parse::root(z)?,
                    beta,
                    truncation: opts.truncation,
                },
                None => StateSpec::Quotient {
                    n,
                    m: required(opts.subgroup, "--subgroup")?,
                    beta,
                },
            };
            spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let x = parse::monomial(monomial)?;
            eval_doc(&spec, MonomialArg { monomial: x }, eval_state(&spec, x)?)
        }
        Command::QzCoherence { qz } => {
            let level = required(opts.level, "--level")?;
            let m = required(opts.subgroup, "--subgroup")?;
            let n = required(opts.n, "--n")?;
            let beta = required(opts.beta, "--beta")?;
            let x = parse::qz_monomial(qz)?;
            let c = qz_coherence(level, m, beta, n, x)?;
            let gap = (c.lhs - c.rhs).abs();
            let doc = json!({
                "level": level,
                "subgroup": m,
                "n": n,
                "beta": beta,
                "monomial": x,
                "result": c,
                "gap": gap,
            });
            Ok(Report::single(&doc)?.violated_if(gap > opts.tol, || format!("coherence gap {gap:e}")))
        }
        Command::Reconstruct { state, primes, k } => {
            let spec = parse::state(state, opts)?;
            let set = parse::primes(primes)?;
            let r = reconstruct_check(&spec, &set, *k, opts.truncation)?;
            let gap = (r.lhs - r.rhs).abs();
            let doc = json!({
                "spec": spec,
                "primes": set.primes(),
                "k": k,
                "truncation": opts.truncation,
                "result": r,
                "gap": gap,
            });
            Ok(Report::single(&doc)?.violated_if(gap > r.tail_bound + opts.tol, || {
                format!("gap {gap:e} exceeds tail bound {:e}", r.tail_bound)
            }))
        }
        Command::EFMass { state, primes } => {
            let spec = parse::state(state, opts)?;
            let set = parse::primes(primes)?;
            let beta = spec.beta();
            let value = eval_element(&spec, &projection_e_f(&set)?)?;
            let expected: f64 = set.primes().iter().map(|&p| 1.0 - (p as f64).powf(-beta)).product();
            let deviation = (value.value - num_complex::Complex64::new(expected, 0.0)).norm();
            let doc = json!({
                "spec": spec,
                "primes": set.primes(),
                "value": Cx::from(value.value),
                "expected": expected,
                "deviation": deviation,
            });
            Ok(Report::single(&doc)?.violated_if(deviation > opts.tol, || format!("e_F mass off by {deviation:e}")))
        }
        Command::PsiCount { x, y } => Report::single(&json!({ "x": x, "y": y, "count": psi_count(*x, *y)? })),
        Command::Dickman { u, h } => Report::single(&json!({ "u": u, "h": h, "rho": dickman(*u, *h)? })),
        Command::DickmanMass { u_max, h } => {
            let mass = dickman_mass(*u_max, *h)?;
            let target = EULER_GAMMA.exp();
            Report::single(&json!({
                "u_max": u_max,
                "h": h,
                "mass": mass,
                "target": target,
                "deviation": (mass - target).abs(),
            }))
        }
        Command::Mertens { x } => {
            let rows =
                pool(opts)?.install(|| x.par_iter().map(|&x| mertens_product(x)).collect::<Result<Vec<_>, _>>())?;
            Report::with_table(&rows, &rows)
        }
        Command::SmoothSum { sequence, n_max } => {
            let seq = parse::sequence(sequence)?;
            if *n_max < 3 {
                return Err(Failure::Usage("--n-max must be at least 3".into()));
            }
            let rows = pool(opts)?.install(|| {
                (3..=*n_max)
                    .into_par_iter()
                    .map(|n| smooth_harmonic_sum(n, &seq, opts.truncation))
                    .collect::<Result<Vec<_>, _>>()
            })?;
            Report::with_table(&rows, &rows)
        }
        Command::WienerSum {
            fourier,
            measure,
            exclude,
            ell,
            k,
            n_max,
        } => {
            let data = match (fourier, measure) {
                (Some(path), _) => parse::fourier_file(path)?,
                (None, Some(path)) => FourierData::Atomic(parse::read_measure(path)?),
                (None, None) => return Err(Failure::Usage("give --fourier or --measure".into())),
            };
            data.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let excluded = parse::primes(exclude)?;
            if *n_max < 3 {
                return Err(Failure::Usage("--n-max must be at least 3".into()));
            }
            #[derive(Serialize)]
            struct Row {
                n_primes: usize,
                re: f64,
                im: f64,
                abs: f64,
                euler_factor: f64,
                terms: usize,
            }
            let rows = pool(opts)?.install(|| {
                (3..=*n_max)
                    .into_par_iter()
                    .map(|n| {
                        let w = wiener_sum(&data, n, &excluded, *ell, *k, opts.truncation)?;
                        Ok(Row {
                            n_primes: n,
                            re: w.value.re,
                            im: w.value.im,
                            abs: w.value.norm(),
                            euler_factor: w.euler_factor,
                            terms: w.terms,
                        })
                    })
                    .collect::<Result<Vec<_>, Error>>()
            })?;
            Report::with_table(&rows, &rows)
        }
        Command::DeltaEstimate { u, x } => Report::single(&delta_estimate(*u, *x)?),
        Command::SelfTest {
            criterion,
            corrupt_two_level,
            timings,
        } => {
            let config = SuiteConfig {
                seed: opts.seed,
                corrupt_two_level: *corrupt_two_level,
            };
            let reports = match criterion {
                Some(id) => vec![run_one(*id, &config).ok_or_else(|| {
                    Failure::Usage(format!("criterion must be 1 through {CRITERION_COUNT}, got {id}"))
                })?],
                None => run_all(&config),
            };
            let rows: Vec<serde_json::Value> = reports
                .iter()
                .map(|r| {
                    let mut row = json!({
                        "id": r.id,
                        "name": r.name,
                        "passed": r.passed,
                        "property_held": r.property_held,
                        "within_budget": r.seconds < r.budget_seconds,
                        "budget_seconds": r.budget_seconds,
                        "detail": r.detail,
                    });
                    if *timings {
                        row["seconds"] = json!(r.seconds);
                    }
                    row
                })
                .collect();
            let failed: Vec<u8> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
            let doc = json!({
                "seed": opts.seed,
                "passed": reports.len() - failed.len(),
                "failed": failed.len(),
                "criteria": rows,
            });
            Ok(Report::with_table(&doc, &rows)?.violated_if(!failed.is_empty(), || {
                let lines: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.line()).collect();
                format!("{} criteria failed:\n{}", failed.len(), lines.join("\n"))
            }))
        }
    }
}

fn kms_check(
    spec: &StateSpec,
    samples: usize,
    max_index: u64,
    max_power: i64,
    opts: &Options,
) -> Result<Report, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut draw = || Monomial {
        a: rng.gen_range(1..=max_index),
        k: rng.gen_range(-max_power..=max_power),
        b: rng.gen_range(1..=max_index),
    };
    let pairs: Vec<(Monomial, Monomial)> = (0..samples).map(|_| (draw(), draw())).collect();
    let residuals = pool(opts)?.install(|| {
        pairs
            .par_iter()
            .map(|&(x, y)| kms_residual(spec, x, y))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let worst = residuals
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &r)| match best {
            Some((_, b)) if b >= r => best,
            _ => Some((i, r)),
        });
    let max_residual = worst.map_or(0.0, |(_, r)| r);
    let mut doc = json!({
        "spec": spec,
        "seed": opts.seed,
        "samples": samples,
        "max_residual": max_residual,
    });
    if let Some((i, r)) = worst {
        doc["worst_pair"] = json!({ "x": pairs[i].0, "y": pairs[i].1, "residual": r });
    }
    Ok(Report::single(&doc)?.violated_if(max_residual > opts.tol, || {
        let (i, _) = worst.expect("a positive residual has a witness");
        format!("residual {max_residual:e} at x = {}, y = {}", pairs[i].0, pairs[i].1)
    }))
}
