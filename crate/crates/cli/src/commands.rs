use std::collections::BTreeMap;
use std::path::Path;

use cfnet::growth::{abel_taylor, m_inf_bound, network_bound};
use cfnet::io::{parse_coeff, SeriesJson};
use cfnet::network::io_map;
use cfnet::ode::OdeOptions;
use cfnet::reldeg::{complete_reldeg, genericity_sample, predict_io_reldeg, relative_degree, Designated, PairReport, PredictionReport, RelDegReport, RelDegStatus};
use cfnet::sim::{io_map_error_order, simulate_maximal_ode, simulate_picard, validate_io_map, Grid, Trajectory, ValidationReport, PICARD_MAX_ITER, PICARD_TOL};
use cfnet::{NodeSource, Rational, Scalar, Word};
use serde_json::{json, Value};

use crate::output::*;
use crate::{schema as schemas, Common, Format, NetArg};

fn status_name(s: RelDegStatus) -> Value {
    serde_json::to_value(s).expect("status")
}

fn measured_json(r: &RelDegReport) -> Value {
    json!({
        "status": status_name(r.status),
        "degree": r.degree,
        "leading": r.leading.as_ref().map(|l| l.to_string()),
        "exact_to": r.truncation,
    })
}

fn one_based_map(m: &BTreeMap<usize, usize>) -> Value {
    let obj: serde_json::Map<String, Value> = m.iter().map(|(k, v)| ((k + 1).to_string(), json!(v))).collect();
    Value::Object(obj)
}

fn prediction_json(p: &PredictionReport) -> Value {
    let accumulated = p.accumulated.as_ref();
    let incoming: serde_json::Map<String, Value> = accumulated
        .map(|a| {
            a.incoming
                .iter()
                .map(|(node, preds)| {
                    let list: Vec<Value> = preds.iter().map(|&(from, r)| json!({"from": from + 1, "accumulated": r})).collect();
                    ((node + 1).to_string(), Value::Array(list))
                })
                .collect()
        })
        .unwrap_or_default();
    let repeated: Vec<Value> = p
        .details
        .iter()
        .filter(|d| !d.repeated_sums.is_empty())
        .map(|d| {
            json!({
                "node": d.node + 1,
                "sums": d.repeated_sums.iter().map(|(r, s)| json!({"accumulated": r, "leading_sum": s})).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "predicted": p.predicted,
        "condition": serde_json::to_value(p.condition).expect("condition"),
        "certified": p.certified(),
        "node_degrees": one_based_map(&p.node_degrees),
        "accumulated": accumulated.map(|a| one_based_map(&a.values)),
        "incoming": incoming,
        "repeated_sums": repeated,
    })
}

pub fn iomap(net: &NetArg, from: usize, to: usize, degree: usize, common: &Common) -> Outcome {
    require_json(common, "iomap")?;
    let input = read_net(&net.net)?;
    let (i, j) = (node_index(&input.net, from, "from")?, node_index(&input.net, to, "to")?);
    let d = io_map(&input.net, i, j, degree)?;
    let params = json!({"from": from, "to": to, "degree": degree});
    let result = serde_json::to_value(SeriesJson::from(&d)).expect("series");
    emit_json(common, &envelope("iomap", Some(&input.sha256), params, result))
}

fn pair_json(pair: &PairReport) -> Value {
    let mut doc = json!({
        "from": pair.source + 1,
        "to": pair.sink + 1,
        "measured": pair.measured.degree,
        "measurement": measured_json(&pair.measured),
        "consistent": pair.consistent(),
    });
    if let Some(p) = &pair.prediction {
        let obj = doc.as_object_mut().unwrap();
        for (k, v) in prediction_json(p).as_object().unwrap() {
            obj.insert(k.clone(), v.clone());
        }
    }
    doc
}

fn certified(pair: &PairReport) -> bool {
    pair.measured.is_defined() && pair.prediction.as_ref().is_some_and(|p| p.certified()) && pair.consistent()
}

pub fn reldeg(net: &NetArg, pair: Option<(usize, usize)>, degree: usize, require_certified: bool, common: &Common) -> Outcome {
    require_json(common, "reldeg")?;
    let input = read_net(&net.net)?;
    let (result, ok) = match pair {
        Some((from, to)) => {
            let (i, j) = (node_index(&input.net, from, "from")?, node_index(&input.net, to, "to")?);
            let measured = relative_degree(&io_map(&input.net, i, j, degree)?)?;
            let prediction = predict_io_reldeg(&input.net, i, j, degree)?;
            let report = PairReport { source: i, sink: j, measured, prediction: Some(prediction) };
            (pair_json(&report), certified(&report))
        }
        None => {
            let all = complete_reldeg(&input.net, degree)?;
            let pairs: Vec<&PairReport> = all.iter().flatten().collect();
            let ok = pairs.iter().all(|p| certified(p));
            (json!({ "pairs": pairs.iter().map(|p| pair_json(p)).collect::<Vec<_>>() }), ok)
        }
    };
    let params = json!({"from": pair.map(|p| p.0), "to": pair.map(|p| p.1), "degree": degree, "require_certified": require_certified});
    let doc = envelope("reldeg", Some(&input.sha256), params, result);
    if require_certified && !ok {
        let mut failure = doc;
        failure["error"] = json!({
            "kind": "uncertified",
            "message": "relative degree is not both measured and certified by a sufficient condition",
        });
        return Err(Failure::Domain(failure));
    }
    emit_json(common, &doc)
}

fn positive(text: &str, flag: &str) -> Outcome<Rational> {
    parse_coeff(text).map_err(|_| Failure::Usage(format!("--{flag}: not a number: {text:?}")))
}

pub fn bounds(net: Option<&Path>, m: Option<usize>, k: Option<String>, big_m: Option<String>, common: &Common) -> Outcome {
    require_json(common, "bounds")?;
    let (bound, hash, params) = match net {
        Some(path) => {
            let input = read_net(path)?;
            (network_bound(&input.net)?, Some(input.sha256), json!({}))
        }
        None => {
            let (m, k, big_m) = (m.unwrap(), k.unwrap(), big_m.unwrap());
            let kv = positive(&k, "K")?;
            let mv = positive(&big_m, "M")?;
            let bound = m_inf_bound(kv.to_f64(), mv.to_f64(), m)?;
            (bound, None, json!({"m": m, "K": k, "M": big_m}))
        }
    };
    let result = serde_json::to_value(&bound).expect("bound");
    emit_json(common, &envelope("bounds", hash.as_deref(), params, result))
}

pub fn abel(m: usize, k: &str, big_m: &str, n: usize, common: &Common) -> Outcome {
    let seq = abel_taylor(m, &positive(k, "K")?, &positive(big_m, "M")?, n)?;
    let params = json!({"m": m, "K": k, "M": big_m, "n": n});
    match format_of(common, Format::Csv) {
        Format::Csv => {
            let mut text = csv_header("abel", None, &params);
            text.push_str("n,a_n,Mhat_n\n");
            for (i, a) in seq.a.iter().enumerate() {
                let mhat = if i == 0 { String::new() } else { format!("{:.12}", seq.mhat[i]) };
                text.push_str(&format!("{i},{a},{mhat}\n"));
            }
            emit(common, &text)
        }
        Format::Json => {
            let result = json!({
                "a": seq.a.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                "z": seq.z.iter().map(|z| z.to_string()).collect::<Vec<_>>(),
                "Mhat": seq.mhat.iter().map(|v| if v.is_finite() { json!(v) } else { Value::Null }).collect::<Vec<_>>(),
            });
            emit_json(common, &envelope("abel", None, params, result))
        }
    }
}

fn trajectory_meta(tr: &Trajectory) -> Value {
    json!({
        "escape_time": tr.escape_time,
        "node_escape_times": tr.node_escape,
        "threshold": tr.method.threshold,
        "integrator": tr.method.integrator,
        "method": tr.method,
    })
}

pub fn simulate(net: &NetArg, t0: f64, horizon: f64, steps: usize, input_value: f64, common: &Common) -> Outcome {
    let input = read_net(&net.net)?;
    let grid = Grid::new(t0, horizon, steps)?;
    let m = input.net.node_count();
    let v = vec![vec![input_value; grid.len()]; m];
    let all_maximal = input.net.nodes().iter().all(|n| matches!(n, NodeSource::Maximal(_)));
    let tr = if all_maximal {
        simulate_maximal_ode(&input.net, &v, &grid, &OdeOptions::default())?
    } else {
        simulate_picard(&input.net, &v, &grid, PICARD_TOL, PICARD_MAX_ITER)?
    };
    let params = json!({"t0": t0, "T": horizon, "steps": steps, "input": input_value});
    match format_of(common, Format::Csv) {
        Format::Csv => {
            let mut text = csv_header("simulate", Some(&input.sha256), &params);
            text.push_str(&tr.to_csv());
            emit(common, &text)?;
            if let Some(out) = &common.out {
                let sidecar = envelope("simulate", Some(&input.sha256), params, trajectory_meta(&tr));
                let side = Common { out: Some(out.with_extension("json")), format: None };
                emit_json(&side, &sidecar)?;
            }
            Ok(())
        }
        Format::Json => {
            let mut result = trajectory_meta(&tr);
            result["times"] = json!(tr.times);
            result["outputs"] = json!(tr.outputs);
            emit_json(common, &envelope("simulate", Some(&input.sha256), params, result))
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn montecarlo(
    net: &NetArg,
    seed: u64,
    samples: usize,
    degree: usize,
    designated: Option<(usize, usize, String)>,
    bins: usize,
    jobs: usize,
    common: &Common,
) -> Outcome {
    let input = read_net(&net.net)?;
    let pattern: Vec<Vec<bool>> = input.net.weights().iter().map(|row| row.iter().map(|w| *w != Rational::from_integer(0.into())).collect()).collect();
    let designated = match &designated {
        Some((from, to, word)) => Some(Designated {
            source: node_index(&input.net, *from, "from")?,
            sink: node_index(&input.net, *to, "to")?,
            word: Word::parse(word, 1)?,
        }),
        None => None,
    };
    if jobs == 0 || bins == 0 {
        return Err(Failure::Usage("--jobs and --bins must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start {jobs} workers: {e}")))?;
    let stats = pool.install(|| genericity_sample(&pattern, input.net.nodes(), samples, seed, degree, designated.as_ref()))?;
    let params = json!({
        "seed": seed,
        "samples": samples,
        "degree": degree,
        "designated": designated.as_ref().map(|d| json!({"from": d.source + 1, "to": d.sink + 1, "word": d.word.to_string()})),
        "bins": bins,
    });
    let histogram = designated.as_ref().map(|_| stats.histogram(bins));
    match format_of(common, Format::Json) {
        Format::Csv => {
            let Some(h) = histogram else {
                return Err(Failure::Usage("CSV output is the histogram; pass --from, --to and --word".into()));
            };
            let mut text = csv_header("montecarlo", Some(&input.sha256), &params);
            text.push_str(&h.to_csv());
            emit(common, &text)
        }
        Format::Json => {
            let pairs: Vec<Value> = stats
                .pairs
                .iter()
                .map(|p| {
                    json!({
                        "from": p.source + 1,
                        "to": p.sink + 1,
                        "has_path": p.has_path,
                        "defined": p.defined.iter().map(|(r, n)| (r.to_string(), json!(n))).collect::<serde_json::Map<_, _>>(),
                        "undefined": p.undefined,
                        "undetermined": p.undetermined,
                    })
                })
                .collect();
            let mut result = json!({
                "pairs": pairs,
                "exact_rechecks": stats.exact_rechecks,
                "undefined_connected_pairs": stats.undefined_connected_pairs(),
            });
            if let Some(h) = histogram {
                let values = &stats.designated;
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                result["designated"] = json!({
                    "mean": mean,
                    "min": values.iter().cloned().fold(f64::INFINITY, f64::min),
                    "max": values.iter().cloned().fold(0.0, f64::max),
                    "histogram": {"edges": h.edges, "counts": h.counts},
                });
            }
            emit_json(common, &envelope("montecarlo", Some(&input.sha256), params, result))
        }
    }
}

fn validation_json(r: &ValidationReport) -> Value {
    json!({
        "from": r.source + 1,
        "to": r.sink + 1,
        "degree": r.degree,
        "T": r.horizon,
        "max_error": r.max_error,
        "expected_order": r.expected_order,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn validate(
    net: &NetArg,
    from: usize,
    to: usize,
    degree: usize,
    horizon: f64,
    steps: usize,
    input_value: f64,
    order: bool,
    common: &Common,
) -> Outcome {
    require_json(common, "validate")?;
    let input = read_net(&net.net)?;
    let (i, j) = (node_index(&input.net, from, "from")?, node_index(&input.net, to, "to")?);
    let params = json!({"from": from, "to": to, "degree": degree, "T": horizon, "steps": steps, "input": input_value, "order": order});
    let result = if order {
        let rep = io_map_error_order(&input.net, i, j, degree, |_| input_value, 0.0, horizon, steps)?;
        json!({
            "coarse": validation_json(&rep.coarse),
            "fine": validation_json(&rep.fine),
            "observed_order": rep.observed_order,
            "expected_order": rep.expected_order,
        })
    } else {
        let grid = Grid::new(0.0, horizon, steps)?;
        validation_json(&validate_io_map(&input.net, i, j, degree, &vec![input_value; grid.len()], &grid)?)
    };
    emit_json(common, &envelope("validate", Some(&input.sha256), params, result))
}

pub fn schema(command: &str) -> Outcome {
    let mut text = serde_json::to_string_pretty(&schemas::schema(command)).expect("schema");
    text.push('\n');
    print!("{text}");
    Ok(())
}
