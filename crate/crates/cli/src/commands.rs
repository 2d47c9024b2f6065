//! Command implementations. Every command reads its input file, stamps the
//! report with a content digest, and writes JSON (or CSV for the tabular
//! outputs) either to stdout or to `--out`.

use std::fs;

use num_complex::Complex64;
use rand::SeedableRng;
use sha2::{Digest, Sha256};
use serde_json::json;

use bratteli_spectra::eigen::eigen_decompose;
use bratteli_spectra::forms::{q_limit, ObservableFn};
use bratteli_spectra::graph::{parse_graph_file, BratteliGraph, GraphError, PathWord};
use bratteli_spectra::metric::{
    connes_distance, geodesic_oracle, telescoping_lipschitz_check, MetricError,
};
use bratteli_spectra::numberfield::{pisot_analyze, FieldElement, FieldError};
use bratteli_spectra::report::{csv_table, format_float, Report};
use bratteli_spectra::sample;
use bratteli_spectra::spectral::heat::{
    heat_trace_direct, heat_trace_expansion, log_log_slope, tensor_heat_trace,
};
use bratteli_spectra::spectral::state::{spectral_measure, state_cesaro};
use bratteli_spectra::spectral::zeta::{poles_and_residues, zeta_closed, zeta_series};
use bratteli_spectra::spectral::{Spectra, SpectralError};
use bratteli_spectra::tiling::{
    dirichlet_parameters, horizontal_geometry, laplacian_eigenvalue, omega_triple, q_lg_numeric,
    q_tr_numeric, FormSide, Substitution1D, SubstitutionRules, TestFn1D, TilingError,
};
use bratteli_spectra::EigenError;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Domain(String),
    Structural(String),
    Tolerance(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation: {m}"),
            CliError::Domain(m) => write!(f, "domain: {m}"),
            CliError::Structural(m) => write!(f, "structural: {m}"),
            CliError::Tolerance(m) => write!(f, "tolerance: {m}"),
            CliError::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Structural(_) => 4,
            CliError::Tolerance(_) => 5,
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<EigenError> for CliError {
    fn from(e: EigenError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<TilingError> for CliError {
    fn from(e: TilingError) -> Self {
        match e {
            TilingError::NotPisot => CliError::Domain(e.to_string()),
            TilingError::Field(FieldError::IrrationalityViolation(_))
            | TilingError::Field(FieldError::NotPisot) => CliError::Domain(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::DisconnectedH(_, _) => CliError::Structural(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn read_input(path: &str) -> Result<(String, String), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    Ok((text, digest))
}

fn load_graph(path: &str) -> Result<(BratteliGraph, String), CliError> {
    let (text, digest) = read_input(path)?;
    Ok((parse_graph_file(&text)?, digest))
}

fn load_rules(path: &str) -> Result<(Substitution1D, String), CliError> {
    let (text, digest) = read_input(path)?;
    let rules: SubstitutionRules =
        serde_json::from_str(&text).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok((Substitution1D::build(&rules)?, digest))
}

fn emit(text: &str, out: Option<&str>) -> Result<(), CliError> {
    match out {
        None => {
            if text.ends_with('\n') {
                print!("{text}");
            } else {
                println!("{text}");
            }
            Ok(())
        }
        Some(path) => fs::write(path, text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn complex_json(z: Complex64) -> serde_json::Value {
    json!({ "re": z.re, "im": z.im })
}

/// Worker cap honoring BRATTELI_SPECTRA_THREADS (default: single-threaded).
fn thread_cap() -> usize {
    std::env::var("BRATTELI_SPECTRA_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
        .min(64)
}

/// Index-ordered parallel map over a grid; results are deterministic for any
/// worker count because items are independent and joined in order.
fn parallel_map<T: Send, F: Fn(usize) -> T + Sync>(count: usize, f: F) -> Vec<T> {
    let workers = thread_cap().min(count.max(1));
    if workers <= 1 {
        return (0..count).map(f).collect();
    }
    let mut slots: Vec<Option<T>> = (0..count).map(|_| None).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots_ref = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let value = f(i);
                slots_ref.lock().unwrap()[i] = Some(value);
            });
        }
    });
    slots.into_iter().map(|s| s.expect("computed")).collect()
}

// ---------------------------------------------------------------------------

pub fn analyze(spec: &str, kmax: i64, out: Option<&str>) -> Result<(), CliError> {
    let (g, digest) = load_graph(spec)?;
    let mut report = Report::new("analyze", digest);
    let ed = eigen_decompose(&g.graph_matrix())?;
    let primitivity = g.is_primitive();

    let mut results = json!({
        "primitive": primitivity.primitive,
        "primitivity_witness": primitivity.witness,
        "rho": g.rho,
        "perron_eigenvalue": ed.pf,
        "right_vector": ed.r_vec,
        "left_vector": ed.l_vec,
        "eigenvalues": ed.eigenvalues.iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
        "multiplicities": ed.multiplicities,
        "diagonalizable": ed.diagonalizable,
        "spectral_dimension": ed.pf.ln() / -g.rho.ln(),
        "connected_horizontal": g.check_connectivity(),
    });

    if let Some(j0) = ed.unit_eigenvalue_index() {
        report.warnings.push(format!(
            "unit eigenvalue present: the heat trace carries a logarithmic term with \
             coefficient c_j0 = {:.12}",
            match Spectra::analyze(&g) {
                Ok(ref s) => s.coeffs.c[j0].re,
                Err(_) => f64::NAN,
            }
        ));
    }
    match Spectra::analyze(&g) {
        Ok(s) => {
            let zeta = poles_and_residues(&s, kmax)?;
            results["zeta_period"] = json!(zeta.period);
            results["poles"] = json!(zeta
                .poles
                .iter()
                .map(|p| json!({
                    "location": complex_json(p.location),
                    "residue": complex_json(p.residue),
                    "numeric_check": p.numeric_check,
                }))
                .collect::<Vec<_>>());
            for w in zeta.warnings {
                report.warnings.push(w);
            }
            // measure table to depth 3
            let mut table = Vec::new();
            for depth in 1..=3usize {
                for gamma in g.enumerate_paths(depth) {
                    let names: Vec<&str> =
                        gamma.iter().map(|&e| g.edges[e].name.as_str()).collect();
                    let mu = spectral_measure(&s, &PathWord::tau_extended(gamma.clone()));
                    table.push(json!({ "word": names, "measure": mu }));
                }
            }
            results["measure_table"] = json!(table);
        }
        Err(SpectralError::Eigen(EigenError::NotDiagonalizable)) => {
            report.warnings.push(
                "graph matrix is not diagonalizable: closed zeta/heat forms unavailable, \
                 direct numeric series only"
                    .to_string(),
            );
        }
        Err(e) => return Err(e.into()),
    }

    report.results = results;
    emit(&report.to_json(), out)
}

pub fn zeta(spec: &str, re: f64, im: f64, levels: usize, out: Option<&str>) -> Result<(), CliError> {
    let (g, digest) = load_graph(spec)?;
    let s = Spectra::analyze(&g)?;
    let z = Complex64::new(re, im);
    let closed = zeta_closed(&s, z)?;
    let series = if re > s.spectral_dimension() {
        let (value, tail) = zeta_series(&s, z, levels)?;
        json!({ "value": complex_json(value), "tail_bound": tail, "levels": levels })
    } else {
        json!(null)
    };
    let mut report = Report::new("zeta", digest);
    report.results = json!({
        "z": complex_json(z),
        "closed_form": complex_json(closed),
        "series": series,
        "spectral_dimension": s.spectral_dimension(),
    });
    emit(&report.to_json(), out)
}

pub fn heat(
    spec: &str,
    t_min: f64,
    t_max: f64,
    points: usize,
    eps: f64,
    kmax: usize,
    format: &str,
    out: Option<&str>,
) -> Result<(), CliError> {
    if !(t_min > 0.0 && t_max > t_min && points >= 2) {
        return Err(CliError::Validation(
            "need 0 < t_min < t_max and at least two grid points".into(),
        ));
    }
    let (g, digest) = load_graph(spec)?;
    let s = Spectra::analyze(&g)?;
    let s0 = s.spectral_dimension();
    let rows: Vec<(f64, f64, f64)> = parallel_map(points, |i| {
        let f = i as f64 / (points - 1) as f64;
        let t = t_min * (t_max / t_min).powf(f);
        let direct = heat_trace_direct(&s, t, eps);
        let expansion = heat_trace_expansion(&s, t, kmax).unwrap_or(f64::NAN);
        (t, direct, expansion)
    });
    if format == "csv" {
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|&(t, d, e)| {
                vec![
                    format_float(t),
                    format_float(d),
                    format_float(e),
                    format_float(d - e),
                    format_float(d * t.powf(s0 / 2.0)),
                ]
            })
            .collect();
        emit(
            &csv_table(&["t", "direct", "expansion", "residual", "scaled_band"], &table),
            out,
        )
    } else {
        let mut report = Report::new("heat", digest);
        report.results = json!({
            "spectral_dimension": s0,
            "period": s.heat_period(),
            "rows": rows.iter().map(|&(t, d, e)| json!({
                "t": t, "direct": d, "expansion": e, "residual": d - e,
            })).collect::<Vec<_>>(),
        });
        emit(&report.to_json(), out)
    }
}

pub fn measure(spec: &str, depth: usize, levels: usize, out: Option<&str>) -> Result<(), CliError> {
    let (g, digest) = load_graph(spec)?;
    let s = Spectra::analyze(&g)?;
    let mut table = Vec::new();
    for d in 1..=depth.min(5) {
        for gamma in g.enumerate_paths(d) {
            let names: Vec<&str> = gamma.iter().map(|&e| g.edges[e].name.as_str()).collect();
            let mu = spectral_measure(&s, &PathWord::tau_extended(gamma.clone()));
            let cesaro = if d <= 3 {
                let obs = ObservableFn::indicator(gamma.clone());
                let rep = state_cesaro(&s, &obs, levels)?;
                json!({ "value": rep.final_value.re, "converged": rep.converged })
            } else {
                json!(null)
            };
            table.push(json!({ "word": names, "measure": mu, "cesaro": cesaro }));
        }
    }
    let mut report = Report::new("measure", digest);
    report.results = json!({ "depth": depth, "levels": levels, "table": table });
    emit(&report.to_json(), out)
}

pub fn distance(
    spec: &str,
    pairs_path: &str,
    depth: usize,
    oracle: bool,
    format: &str,
    out: Option<&str>,
) -> Result<(), CliError> {
    let (g, digest) = load_graph(spec)?;
    let (pairs_text, pairs_digest) = read_input(pairs_path)?;
    #[derive(serde::Deserialize)]
    struct PairSpec {
        x: Vec<String>,
        y: Vec<String>,
    }
    let pairs: Vec<PairSpec> =
        serde_json::from_str(&pairs_text).map_err(|e| CliError::Validation(e.to_string()))?;
    let to_word = |names: &[String]| -> Result<PathWord, CliError> {
        let mut edges = Vec::new();
        for n in names {
            edges.push(
                g.edge_index(n)
                    .ok_or_else(|| CliError::Validation(format!("unknown edge {n}")))?,
            );
        }
        Ok(PathWord::tau_extended(edges))
    };

    let mut rows = Vec::new();
    for p in &pairs {
        let x = to_word(&p.x)?;
        let y = to_word(&p.y)?;
        let d = connes_distance(&g, &x, &y, depth)?;
        let oracle_value = if oracle {
            let o = geodesic_oracle(&g, &x, &y, depth)?;
            if (d.value - o).abs() > d.tail_bound + 1e-9 {
                return Err(CliError::Tolerance(format!(
                    "oracle mismatch beyond the tail bound: closed {} vs oracle {o}",
                    d.value
                )));
            }
            Some(o)
        } else {
            None
        };
        rows.push((p.x.join("."), p.y.join("."), d, oracle_value));
    }

    if format == "csv" {
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|(x, y, d, o)| {
                vec![
                    x.clone(),
                    y.clone(),
                    format_float(d.value),
                    format_float(d.tail_bound),
                    d.n_xy.to_string(),
                    d.c_xy.to_string(),
                    o.map(format_float).unwrap_or_default(),
                ]
            })
            .collect();
        emit(
            &csv_table(&["x", "y", "distance", "tail_bound", "n_xy", "c_xy", "oracle"], &table),
            out,
        )
    } else {
        let mut report = Report::new("distance", digest);
        report.results = json!({
            "pairs_digest": pairs_digest,
            "depth": depth,
            "rows": rows.iter().map(|(x, y, d, o)| json!({
                "x": x, "y": y, "distance": d.value, "tail_bound": d.tail_bound,
                "n_xy": d.n_xy, "c_xy": d.c_xy, "oracle": o,
            })).collect::<Vec<_>>(),
        });
        emit(&report.to_json(), out)
    }
}

pub fn form(
    spec: &str,
    trig: Option<i64>,
    cylinder: Option<&str>,
    levels: usize,
    format: &str,
    out: Option<&str>,
) -> Result<(), CliError> {
    let (g, digest) = load_graph(spec)?;
    let obs = match (trig, cylinder) {
        (Some(k), None) => ObservableFn::circle_mode(k),
        (None, Some(names)) => {
            let mut edges = Vec::new();
            for n in names.split(',') {
                edges.push(
                    g.edge_index(n.trim())
                        .ok_or_else(|| CliError::Validation(format!("unknown edge {n}")))?,
                );
            }
            ObservableFn::indicator(edges)
        }
        _ => {
            return Err(CliError::Validation(
                "pass exactly one of --trig or --cylinder".into(),
            ))
        }
    };
    let report_data = q_limit(&g, &obs, &obs, levels.clamp(3, 22))
        .map_err(|e| CliError::Validation(e.to_string()))?;
    if format == "csv" {
        let table: Vec<Vec<String>> = report_data
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| vec![(i + 1).to_string(), format_float(v.re), format_float(v.im)])
            .collect();
        emit(&csv_table(&["n", "q_n_re", "q_n_im"], &table), out)
    } else {
        let mut report = Report::new("form", digest);
        report.results = json!({
            "values": report_data.values.iter().map(|v| complex_json(*v)).collect::<Vec<_>>(),
            "limit": complex_json(report_data.limit),
            "converged": report_data.converged,
            "cauchy": report_data.cauchy,
        });
        if !report_data.converged {
            report.warnings.push("q_n sequence did not converge".to_string());
        }
        emit(&report.to_json(), out)
    }
}

pub fn telescope(
    spec: &str,
    p: usize,
    samples: usize,
    seed: u64,
    depth: usize,
    out: Option<&str>,
) -> Result<(), CliError> {
    if p < 1 {
        return Err(CliError::Validation("p must be at least 1".into()));
    }
    let (g, digest) = load_graph(spec)?;
    let t = g.telescope(p)?;
    let s0 = Spectra::analyze(&g)?.spectral_dimension();
    let s0p = Spectra::analyze(&t)?.spectral_dimension();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<_> = (0..samples)
        .map(|_| sample::random_pair(&g, depth, &mut rng))
        .collect();
    let lip = telescoping_lipschitz_check(&g, p, &pairs, depth)?;
    let mut report = Report::new("telescope", digest);
    report.results = json!({
        "p": p,
        "edges": t.edge_count(),
        "rho": t.rho,
        "spectral_dimension": s0,
        "telescoped_dimension": s0p,
        "dimension_deviation": (s0 - s0p).abs(),
        "lipschitz": {
            "observed_low": lip.observed_low,
            "observed_high": lip.observed_high,
            "bound_low": lip.bound_low,
            "bound_high": lip.bound_high,
            "all_pass": lip.all_pass,
            "samples": lip.samples,
            "seed": seed,
        },
    });
    if !lip.all_pass {
        return Err(CliError::Tolerance(
            "telescoping Lipschitz sandwich violated on samples".into(),
        ));
    }
    emit(&report.to_json(), out)
}

pub fn pisot(
    rules: &str,
    kmax: i64,
    betas: &[String],
    format: &str,
    out: Option<&str>,
) -> Result<(), CliError> {
    let (sub, digest) = load_rules(rules)?;
    let params = dirichlet_parameters(&sub, kmax)?;
    let geo = horizontal_geometry(&sub)?;

    // beta list: parsed coefficients, or the power basis by default
    let mut beta_elems = Vec::new();
    if betas.is_empty() {
        for i in 0..sub.field.degree {
            let mut coeffs = vec!["0".to_string(); sub.field.degree];
            coeffs[i] = "1".to_string();
            beta_elems.push((
                coeffs.join(","),
                FieldElement::from_coeff_strings(&sub.field, &coeffs).unwrap(),
            ));
        }
    } else {
        for text in betas {
            let coeffs: Vec<String> = text.split(',').map(|s| s.trim().to_string()).collect();
            let elem = FieldElement::from_coeff_strings(&sub.field, &coeffs)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            beta_elems.push((text.clone(), elem));
        }
    }

    let mut table = Vec::new();
    for (label, beta) in &beta_elems {
        let tr = laplacian_eigenvalue(&sub, &geo, beta, FormSide::Transversal)?;
        let lg = laplacian_eigenvalue(&sub, &geo, beta, FormSide::Longitudinal)?;
        table.push((label.clone(), tr, lg));
    }

    if format == "csv" {
        let rows: Vec<Vec<String>> = table
            .iter()
            .map(|(b, tr, lg)| vec![format!("\"{b}\""), format_float(*tr), format_float(*lg)])
            .collect();
        return emit(&csv_table(&["beta", "delta_tr", "delta_lg"], &rows), out);
    }

    let pd = pisot_analyze(&sub.field);
    let consistency = {
        let beta = sub
            .theta
            .mul(&geo.returns[0].vector.inverse().map_err(TilingError::Field)?);
        let q = q_tr_numeric(&sub, &geo, &beta, params.rho_tr, 20..=40)?;
        json!({
            "window": [20, 40],
            "window_average": q.window_average,
            "closed_form": q.closed_form,
            "relative_deviation": q.relative_deviation,
        })
    };
    let mut report = Report::new("pisot", digest);
    report.results = json!({
        "theta": sub.theta_value(),
        "minimal_polynomial": sub.field.min_poly.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "rho_tr": params.rho_tr,
        "rho_lg": params.rho_lg,
        "unimodular": pd.unimodular,
        "subleading_count": pd.l_count,
        "phases": pd.phases,
        "nonresonance": {
            "kmax": kmax,
            "vacuous": params.vacuous,
            "checks": params.resonance.iter().map(|((i, j), c)| json!({
                "pair": [i, j],
                "resonant_at": c.resonant_at,
                "min_gap": c.min_gap,
            })).collect::<Vec<_>>(),
        },
        "return_vectors": geo.returns.iter().map(|r| json!({
            "pair": r.pair,
            "meeting_depth": r.meeting_depth,
            "value": r.vector.to_real(),
        })).collect::<Vec<_>>(),
        "microtile_vectors": geo.microtiles.iter().map(|m| json!({
            "pair": m.pair,
            "value": m.vector.to_real(),
        })).collect::<Vec<_>>(),
        "c_tr": geo.c_tr.to_real(),
        "c_lg": geo.c_lg.to_real(),
        "eigenvalue_table": table.iter().map(|(b, tr, lg)| json!({
            "beta": b, "delta_tr": tr, "delta_lg": lg,
        })).collect::<Vec<_>>(),
        "transversal_consistency": consistency,
    });
    emit(&report.to_json(), out)
}

pub fn omega(rules: &str, kmax: i64, out: Option<&str>) -> Result<(), CliError> {
    let (sub, digest) = load_rules(rules)?;
    let params = dirichlet_parameters(&sub, 10_000)?;
    let omega = omega_triple(&sub, params.rho_tr, params.rho_lg)?;

    let mut samples = Vec::new();
    for i in 0..32 {
        let t = 1e-9 * (1e5_f64).powf(i as f64 / 31.0);
        let (product, _) = tensor_heat_trace(&omega.transversal, &omega.longitudinal, t, 1e-12);
        samples.push((t, product));
    }
    let slope_dimension = -2.0 * log_log_slope(&samples);
    let (product, double_sum) =
        tensor_heat_trace(&omega.transversal, &omega.longitudinal, 1e-5, 1e-13);
    let residues = omega.residues(&sub, kmax)?;

    // a quick longitudinal-form consistency number for the report
    let geo = horizontal_geometry(&sub)?;
    let f = TestFn1D::linear(1.0, 0.0);
    let qlg = q_lg_numeric(&sub, &geo, 0, &f, &f, params.rho_lg, 10)?;

    let mut report = Report::new("omega", digest);
    report.results = json!({
        "rho_tr": params.rho_tr,
        "rho_lg": params.rho_lg,
        "s_tr": omega.s_tr,
        "s_lg": omega.s_lg,
        "s0": omega.s0,
        "slope_fit_dimension": slope_dimension,
        "slope_fit_deviation": (slope_dimension - omega.s0).abs(),
        "multiplicativity_relative_error": (product - double_sum).abs() / product,
        "residues": residues,
        "residues_positive": residues.iter().all(|&r| r > 0.0),
        "q_lg_consistency": {
            "enumerated": qlg.enumerated,
            "closed_form": qlg.closed_form,
            "relative_deviation": qlg.relative_deviation,
        },
    });
    emit(&report.to_json(), out)
}
