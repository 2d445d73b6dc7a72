//! Exit criteria. One PASS/FAIL line each; the process fails if any does.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use qherm_cli::fit::fit_order;
use qherm_core::gaugeem::{
    dipole_identity_residual, function_of_X, gauge_covariance_residual, phase_transform,
    transition_element, transition_rate, PictureStates, PolyFn, PositionFn, PulseSpec,
    TransitionRoute,
};
use qherm_core::models::{
    cubic_H, cubic_XP_series, cubic_first_order_states, cubic_first_order_states_undivided,
    cubic_h_polynomial, cubic_h_series, cubic_system, swanson_H, swanson_metric, swanson_system,
    CubicSpec, MetricCase, SwansonSpec,
};
use qherm_core::nhqcore::{
    eta_inner, observable_from, probability_density, quasi_hermiticity_residual, to_hermitian,
    PositionGrid,
};
use qherm_core::opalg::{
    build_xp, eig_general, eig_hermitian, general_expm, interior_norm, BasisSpec, I,
};
use qherm_core::pertoracle::{rs_energy2, PerturbationProblem};
use qherm_core::StateVector;

type Outcome = Result<(bool, String), String>;

const CASES: [MetricCase; 2] = [MetricCase::PositionQ, MetricCase::MomentumQ];
const G_LIST: [f64; 3] = [0.04, 0.02, 0.01];

fn basis(n: usize) -> BasisSpec {
    BasisSpec::new(n, 8).unwrap()
}

fn swanson(eps: f64, case: MetricCase) -> SwansonSpec {
    SwansonSpec::new(1.0, eps, 1.0, case).unwrap()
}

fn e(err: impl std::fmt::Display) -> String {
    err.to_string()
}

fn spectrum_reality() -> Outcome {
    let b = basis(64);
    let eig =
        eig_general(&swanson_H(&swanson(0.4, MetricCase::PositionQ), b).map_err(e)?).map_err(e)?;
    let low = &eig[..20];
    let imag = low.iter().map(|p| p.value.im.abs()).fold(0.0, f64::max);
    let level = low
        .iter()
        .enumerate()
        .map(|(n, p)| (p.value.re - (n as f64 + 0.5)).abs())
        .fold(0.0, f64::max);
    let mut spread = 0.0f64;
    for case in CASES {
        let sys = swanson_system(&swanson(0.4, case), b).map_err(e)?;
        let h = eig_hermitian(&sys.small_h).map_err(e)?;
        let big = eig_general(&sys.big_h).map_err(e)?;
        for n in 0..20 {
            spread = spread.max((h.values[n] - low[n].value.re).abs());
            spread = spread.max((big[n].value.re - low[n].value.re).abs());
        }
    }
    Ok((
        imag < 1e-9 && level < 1e-8 && spread < 1e-9,
        format!("max|Im E| {imag:.2e} < 1e-9, max|E-(n+1/2)| {level:.2e} < 1e-8, case spread {spread:.2e} < 1e-9"),
    ))
}

fn exact_quasi_hermiticity() -> Outcome {
    let b = basis(64);
    let mut parts = Vec::new();
    let mut ok = true;
    for case in CASES {
        let s = swanson(0.4, case);
        let r = quasi_hermiticity_residual(
            &swanson_H(&s, b).map_err(e)?,
            &swanson_metric(&s, b).map_err(e)?,
            8,
        )
        .map_err(e)?;
        ok &= r < 1e-10;
        parts.push(format!("case {} {r:.2e}", case.label()));
    }
    Ok((ok, format!("{} < 1e-10", parts.join(", "))))
}

fn rate_01(eps: f64, case: MetricCase) -> Result<f64, String> {
    let sys = swanson_system(&swanson(eps, case), basis(64)).map_err(e)?;
    let states = PictureStates::new(&sys).map_err(e)?;
    let pulse = PulseSpec::new(1.0, 1.0, 0.5).map_err(e)?;
    Ok(
        transition_rate(&states, 1, 0, 1.0, &pulse, TransitionRoute::Hermitian)
            .map_err(e)?
            .rate,
    )
}

fn metric_dependent_rates() -> Outcome {
    let mut worst = 0.0f64;
    for eps in [0.2, 0.4, 0.6, 0.8] {
        let ratio = rate_01(eps, MetricCase::PositionQ)? / rate_01(eps, MetricCase::MomentumQ)?;
        worst = worst.max((ratio - (1.0 - eps * eps)).abs());
    }
    let r1 = rate_01(0.6, MetricCase::PositionQ)?;
    let r2 = rate_01(0.6, MetricCase::MomentumQ)?;
    let abs = (r1 - PI).abs().max((r2 - PI / 0.64).abs());
    Ok((
        worst < 1e-8 && abs < 1e-8,
        format!("ratio vs 1-eps^2 {worst:.2e} < 1e-8; eps=0.6 rates {r1:.9} {r2:.9} vs pi, pi/0.64 ({abs:.2e} < 1e-8)"),
    ))
}

fn route_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    for case in CASES {
        let sys = swanson_system(&swanson(0.4, case), basis(64)).map_err(e)?;
        let states = PictureStates::new(&sys).map_err(e)?;
        for i in 0..=5 {
            for j in 0..=5 {
                if i == j {
                    continue;
                }
                let a =
                    transition_element(&states, i, j, TransitionRoute::NonHermitian).map_err(e)?;
                let b = transition_element(&states, i, j, TransitionRoute::Hermitian).map_err(e)?;
                worst = worst.max((a - b).norm());
            }
        }
    }
    Ok((
        worst < 1e-8,
        format!("max |H route - h route| over i,j<=5 {worst:.2e} < 1e-8"),
    ))
}

fn dipole_max(states: &PictureStates) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for i in 0..=5 {
        for j in 0..=5 {
            if i != j {
                worst = worst.max(dipole_identity_residual(states, i, j).map_err(e)?);
            }
        }
    }
    Ok(worst)
}

fn dipole_identity() -> Outcome {
    let mut osc = 0.0f64;
    for case in CASES {
        let sys = swanson_system(&swanson(0.4, case), basis(64)).map_err(e)?;
        osc = osc.max(dipole_max(&PictureStates::new(&sys).map_err(e)?)?);
    }
    let sys = cubic_system(&CubicSpec { g: 0.05 }, basis(64)).map_err(e)?;
    let cubic = dipole_max(&PictureStates::new(&sys).map_err(e)?)?;
    Ok((
        osc < 1e-8 && cubic < 1e-6,
        format!("oscillator {osc:.2e} < 1e-8, cubic g=0.05 {cubic:.2e} < 1e-6"),
    ))
}

fn cubic_series_orders() -> Outcome {
    let b = basis(64);
    let (x, p) = build_xp(b, 1.0, 1.0).map_err(e)?;
    let mut series = vec![Vec::new(); 5];
    for g in G_LIST {
        let c = CubicSpec { g };
        let h = cubic_H(&c, b).map_err(e)?;
        let pair = cubic_XP_series(&c, b).map_err(e)?;
        let m = &pair.metric;
        let vals = [
            quasi_hermiticity_residual(&h, m, 8).map_err(e)?,
            interior_norm(&(&pair.x - &observable_from(&x, m)), 8).map_err(e)?,
            interior_norm(&(&pair.p - &observable_from(&p, m)), 8).map_err(e)?,
            interior_norm(
                &(&cubic_h_series(&c, b).map_err(e)? - &to_hermitian(&h, m)),
                8,
            )
            .map_err(e)?,
            interior_norm(
                &(&h - &cubic_h_polynomial(&c).evaluate(&pair.x, &pair.p)),
                8,
            )
            .map_err(e)?,
        ];
        for (k, v) in vals.into_iter().enumerate() {
            series[k].push(v);
        }
    }
    let orders: Vec<f64> = series
        .iter()
        .map(|s| fit_order(&G_LIST, s))
        .collect::<Result<_, _>>()
        .map_err(e)?;
    let labels = ["qh", "X", "P", "h2", "H=h2(X,P)"];
    let text: Vec<String> = labels
        .iter()
        .zip(&orders)
        .map(|(l, o)| format!("{l} {o:.3}"))
        .collect();
    Ok((
        orders.iter().all(|&o| o >= 2.7),
        format!("orders {} >= 2.7", text.join(", ")),
    ))
}

fn oracle_shift(b: BasisSpec) -> Result<f64, String> {
    let (x, _) = build_xp(b, 1.0, 1.0).map_err(e)?;
    Ok(
        rs_energy2(&PerturbationProblem::oscillator(x.powi(3).scale(I), 0))
            .map_err(e)?
            .second_order,
    )
}

fn ground_energy_oracle() -> Outcome {
    let b = basis(64);
    let shift = oracle_shift(b)?;
    let g = 0.05;
    let f0 = StateVector::fock(b, 0);
    let h2 = cubic_h_series(&CubicSpec { g }, b).map_err(e)?;
    let offset = (f0.dot(&h2.apply(&f0)).re - 0.5 - g * g * shift).abs();
    let mut gaps = Vec::new();
    for g in G_LIST {
        let eig = eig_general(&cubic_H(&CubicSpec { g }, b).map_err(e)?).map_err(e)?;
        gaps.push((eig[0].value.re - 0.5 - g * g * shift).abs());
    }
    let order = fit_order(&G_LIST, &gaps).map_err(e)?;
    Ok((
        offset < 1e-10 && order >= 3.5,
        format!("<0|h2|0> offset {offset:.2e} < 1e-10, E0 remainder order {order:.3} >= 3.5"),
    ))
}

fn deficit(a: &StateVector, b: &StateVector) -> f64 {
    (1.0 - a.normalized().dot(&b.normalized()).norm_sqr())
        .max(0.0)
        .sqrt()
}

fn first_order_states() -> Outcome {
    let b = basis(64);
    let mut parts = Vec::new();
    let mut ok = true;
    for level in 0..3 {
        let mut with = Vec::new();
        let mut without = Vec::new();
        for g in G_LIST {
            let c = CubicSpec { g };
            let exact = &eig_general(&cubic_H(&c, b).map_err(e)?).map_err(e)?[level].vector;
            with.push(deficit(
                &cubic_first_order_states(&c, b, level).map_err(e)?,
                exact,
            ));
            without.push(deficit(
                &cubic_first_order_states_undivided(&c, b, level).map_err(e)?,
                exact,
            ));
        }
        let o = fit_order(&G_LIST, &with).map_err(e)?;
        let u = fit_order(&G_LIST, &without).map_err(e)?;
        ok &= o >= 1.7 && u < 1.7;
        parts.push(format!("n={level} {o:.3} (undivided {u:.3})"));
    }
    Ok((
        ok,
        format!(
            "deficit orders {} >= 1.7, undivided form < 1.7",
            parts.join(", ")
        ),
    ))
}

fn gauge_covariance() -> Outcome {
    let sys = swanson_system(&swanson(0.4, MetricCase::MomentumQ), basis(64)).map_err(e)?;
    let alpha = PolyFn::real(&[0.0, 0.0, 0.1]).map_err(e)?;
    let a = PolyFn::real(&[0.0, 0.3]).map_err(e)?;
    let r = gauge_covariance_residual(&alpha, &a, 1.0, &sys.pair, 8).map_err(e)?;
    Ok((r < 1e-8, format!("case ii residual {r:.2e} < 1e-8")))
}

fn probability_invariance() -> Outcome {
    let alpha = PolyFn::real(&[0.0, 0.0, 0.1]).map_err(e)?;
    let grid = PositionGrid::uniform(-6.0, 6.0, 0.05).map_err(e)?;
    let (mut prob, mut dens) = (0.0f64, 0.0f64);
    for case in CASES {
        let sys = swanson_system(&swanson(0.4, case), basis(128)).map_err(e)?;
        let states = PictureStates::new(&sys).map_err(e)?;
        let m = sys.metric();
        for psi in &states.psi[..6] {
            let moved = phase_transform(psi, &alpha, 1.0, &sys.pair).map_err(e)?;
            prob = prob.max((eta_inner(&moved, &moved, m).re - eta_inner(psi, psi, m).re).abs());
            let before = probability_density(psi, m, &grid, 1.0, 1.0).map_err(e)?;
            let after = probability_density(&moved, m, &grid, 1.0, 1.0).map_err(e)?;
            dens = before
                .iter()
                .zip(&after)
                .map(|(u, v)| (u - v).abs())
                .fold(dens, f64::max);
        }
    }
    Ok((
        prob < 1e-10 && dens < 1e-8,
        format!("N=128 levels 0..5 both cases: eta-norm drift {prob:.2e} < 1e-10, density drift {dens:.2e} < 1e-8"),
    ))
}

fn plane_wave_similarity() -> Outcome {
    let sys = swanson_system(&swanson(0.4, MetricCase::MomentumQ), basis(64)).map_err(e)?;
    let k = 0.5;
    let via_similarity =
        function_of_X(&PositionFn::PlaneWave { k }, sys.metric(), &sys.x, &sys.p).map_err(e)?;
    let direct = general_expm(&sys.pair.x.scale(I * k)).map_err(e)?;
    let r = interior_norm(&(&via_similarity - &direct), 8).map_err(e)?;
    Ok((r < 1e-8, format!("k=0.5 case ii {r:.2e} < 1e-8")))
}

fn cli_end_to_end() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut names: Vec<_> = std::fs::read_dir(&dir)
        .map_err(e)?
        .filter_map(|d| d.ok().map(|d| d.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    names.sort();
    let mut failing = Vec::new();
    for path in &names {
        let text = std::fs::read_to_string(path).map_err(e)?;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(e)?;
        let task = v["task"]
            .as_str()
            .ok_or("example config without task")?
            .to_string();
        let out = Command::new(env!("CARGO_BIN_EXE_qherm"))
            .args([task.as_str(), "--config", path.to_str().unwrap(), "--quiet"])
            .output()
            .map_err(e)?;
        if out.status.code() != Some(0) {
            let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
            let why = String::from_utf8_lossy(&out.stderr)
                .trim()
                .replace('\n', "; ");
            failing.push(format!("{stem} exit {:?} ({why})", out.status.code()));
        }
    }
    // a single breach must exit 3 and name the check
    let breach = Command::new(env!("CARGO_BIN_EXE_qherm"))
        .args([
            "gauge-check",
            "--config",
            dir.join("gauge_check_swanson.json").to_str().unwrap(),
            "--param",
            "params.metric_case=ii",
            "--param",
            "task_params.levels=[1]",
            "--quiet",
        ])
        .output()
        .map_err(e)?;
    let named = String::from_utf8_lossy(&breach.stderr).contains("density_drift[case=ii,level=1]");
    let breach_ok = breach.status.code() == Some(3) && named;
    let detail = if failing.is_empty() {
        format!("{} example configs exit 0", names.len())
    } else {
        format!(
            "{}/{} example configs fail: {}",
            failing.len(),
            names.len(),
            failing.join(" | ")
        )
    };
    Ok((
        failing.is_empty() && breach_ok,
        format!(
            "{detail}; injected breach exit {:?}, named {named}",
            breach.status.code()
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("swanson spectrum real and equally spaced", spectrum_reality),
        (
            "exact quasi-hermiticity of both metrics",
            exact_quasi_hermiticity,
        ),
        ("metric-dependent transition rates", metric_dependent_rates),
        ("H and h routes agree", route_equivalence),
        ("dipole identity", dipole_identity),
        ("cubic series orders", cubic_series_orders),
        ("second-order ground energy vs oracle", ground_energy_oracle),
        (
            "first-order states need energy denominators",
            first_order_states,
        ),
        ("gauge covariance", gauge_covariance),
        ("probability and density invariance", probability_invariance),
        ("plane wave similarity", plane_wave_similarity),
        ("cli end to end", cli_end_to_end),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = check().unwrap_or_else(|err| (false, format!("error: {err}")));
        println!(
            "{} {:>2} {name}: {detail}",
            if pass { "PASS" } else { "FAIL" },
            k + 1
        );
        failed += usize::from(!pass);
    }
    println!(
        "acceptance: {}/{} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
