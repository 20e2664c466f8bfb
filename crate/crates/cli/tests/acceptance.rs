//! Acceptance checks. Each test prints one `PASS`/`FAIL` line naming the
//! criterion it covers, then asserts it. Tolerances and time budgets are fixed.

use std::time::{Duration, Instant};

use cnt_coherence::analytics::{
    dark_bright_with_phases, lambda_interaction, probe_coherence_rotating_frame, ComplexLinewidths, Populations,
};
use cnt_coherence::density::DensityMatrix;
use cnt_coherence::integrate::{evolve, linear_grid, EvolveOptions};
use cnt_coherence::liouvillian::{cw_liouvillian, cw_steady_state, steady_state};
use cnt_coherence::presets::{gaussian_peak_for_area, preset_rates, stirap_pulse_pair, GAMMA_CB_SLOW, GAMMA_OPTICAL};
use cnt_coherence::scenario::{run_scenario, ScanTable, ScenarioName, ScenarioSpec};
use cnt_coherence::scheme::{build_scheme, DriveField, LevelScheme, Rabi, SchemeKind, SchemeParams, A, B, C};
use cnt_coherence::stirap::{stirap_run, StirapOptions};
use cnt_coherence_cli::cli_run;
use num_complex::Complex64;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, TestRunner};

fn report(criterion: u32, what: &str, pass: bool, detail: String) {
    println!(
        "criterion {criterion:>2} {}: {what}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} ({what}) failed: {detail}");
}

fn run_cli(args: &[&str]) -> (i32, String, Duration) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv: Vec<&str> = std::iter::once("cnt-coherence").chain(args.iter().copied()).collect();
    let t = Instant::now();
    let code = cli_run(argv, &mut out, &mut err);
    let elapsed = t.elapsed();
    (code, String::from_utf8(out).unwrap(), elapsed)
}

fn lambda() -> LevelScheme {
    build_scheme(SchemeKind::Lambda, &SchemeParams::default()).unwrap()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn value_at(t: &ScanTable, column: &str, x: f64) -> f64 {
    let k = t
        .parameter_values()
        .iter()
        .position(|v| *v == x)
        .expect("grid point present");
    t.column(column).unwrap()[k]
}

#[test]
fn criterion_01_intensity_fit_conversion() {
    run_cli(&["convert", "intensity", "1"]);
    let (code, out, elapsed) = run_cli(&["convert", "intensity", "1"]);
    let pass = code == 0 && out.trim() == "Ω = 5e9 rad/s" && elapsed < Duration::from_millis(1);
    report(
        1,
        "1 W/cm2 gives 5e9 rad/s under the fit",
        pass,
        format!("output '{}', {elapsed:?}", out.trim()),
    );
}

#[test]
fn criterion_02_pulse_intensity() {
    let (code, out, _) = run_cli(&[
        "convert",
        "pulse",
        "--energy",
        "1 uJ",
        "--duration",
        "1 ps",
        "--area",
        "1 cm2",
    ]);
    let pass = code == 0 && out.trim() == "I = 1e6 W/cm²";
    report(
        2,
        "1 uJ in 1 ps over 1 cm2 is 1e6 W/cm2",
        pass,
        format!("output '{}'", out.trim()),
    );
}

#[test]
fn criterion_03_threshold_map() {
    let t = run_scenario(&ScenarioSpec::preset(ScenarioName::ThresholdMap)).unwrap();
    let rabi = t.column("rabi_threshold").unwrap();
    let (first, last) = (rabi[0], rabi[rabi.len() - 1]);
    let want = ((1e6f64 * 1e12).sqrt(), (1e12f64 / 30e-9).sqrt());
    let rel = |a: f64, b: f64| (a - b).abs() / b;
    let fit = t.column("intensity_paper_fit").unwrap();
    let (lo, hi) = (fit[0], fit[fit.len() - 1]);
    let (q_lo, q_hi) = (
        t.reference("quoted_intensity_low"),
        t.reference("quoted_intensity_high"),
    );
    let within = |x: f64, q: f64| x >= q / 20.0 && x <= q * 20.0;
    let pass = rel(first, want.0) <= 1e-12
        && rel(last, want.1) <= 1e-12
        && (5.77e9..5.78e9).contains(&last)
        && q_lo == Some(0.2)
        && q_hi == Some(20.0)
        && within(lo, 0.2)
        && within(hi, 20.0)
        && rel(lo, 0.2) > 1e-2
        && rel(hi, 20.0) > 1e-2;
    report(
        3,
        "threshold endpoints and intensity window",
        pass,
        format!("Ω_th {first:e}..{last:e} rad/s, fitted P_th {lo:.4e}..{hi:.4e} W/cm2 vs quoted 0.2..20"),
    );
}

#[test]
fn criterion_04_probe_formula_vs_engine() {
    // Literal setting: probe at 1e-2 γ_ab, drive 0.1x to 10x threshold, γ_cb = 1 us⁻¹.
    let s = lambda();
    let rates = preset_rates(SchemeKind::Lambda, GAMMA_CB_SLOW);
    let th = (GAMMA_CB_SLOW * GAMMA_OPTICAL).sqrt();
    let probe = 1e-2 * GAMMA_OPTICAL;
    let lw = ComplexLinewidths::new(GAMMA_OPTICAL, GAMMA_OPTICAL, GAMMA_CB_SLOW, 0.0, 0.0);
    let n = 21;
    let (errors, elapsed) = timed(|| {
        (0..n)
            .map(|k| {
                let drive = th * 10f64.powf(-1.0 + 2.0 * k as f64 / (n - 1) as f64);
                let fields = [DriveField::cw(probe, 0.0), DriveField::cw(drive, 0.0)];
                let rho = cw_steady_state(&s, &fields, &rates).unwrap();
                let pop = Populations {
                    a: rho.population(A),
                    b: rho.population(B),
                    c: rho.population(C),
                };
                let formula = probe_coherence_rotating_frame(&pop, &lw, drive, probe).unwrap();
                let numeric = rho.coherence(A, B);
                (formula - numeric).norm() / numeric.norm()
            })
            .collect::<Vec<f64>>()
    });
    let worst = errors.iter().cloned().fold(0.0, f64::max);
    let pass = worst < 1e-2 && elapsed < Duration::from_secs(10);
    report(
        4,
        "probe coherence formula vs numerical steady state",
        pass,
        format!("{n} points, worst relative difference {worst:.3e}, {elapsed:?}"),
    );
}

fn contrast_table(level: f64) -> (ScanTable, Duration) {
    let mut spec = ScenarioSpec::preset(ScenarioName::CptScan);
    spec.drive_level = Some(level);
    timed(|| run_scenario(&spec).unwrap())
}

#[test]
fn criterion_05_cpt_dip() {
    let (above, elapsed) = contrast_table(10.0);
    let n_a = above.column("excited_population").unwrap();
    let centre = value_at(&above, "excited_population", 0.0);
    let wings = n_a[0].min(n_a[n_a.len() - 1]);
    let suppression = wings / centre;
    let (below, _) = contrast_table(0.1);
    let m = below.column("excited_population").unwrap();
    let wing = 0.5 * (m[0] + m[m.len() - 1]);
    let contrast = 1.0 - value_at(&below, "excited_population", 0.0) / wing;
    let pass = above.rows.len() == 201 && suppression > 10.0 && contrast < 0.1 && elapsed < Duration::from_secs(30);
    report(
        5,
        "dark-state dip in the excited population",
        pass,
        format!("suppression {suppression:.1} at 10x, contrast {contrast:.3e} at 0.1x, 201 points in {elapsed:?}"),
    );
}

fn random_pairs() -> Vec<(f64, f64, f64, f64, f64)> {
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        rng_seed: proptest::test_runner::RngSeed::Fixed(7),
        ..Config::default()
    });
    let strategy = (9.0f64..11.0, 9.0f64..11.0, -3.0f64..3.0, -3.0f64..3.0, -1e12f64..1e12);
    (0..1000)
        .map(|_| {
            let (l1, l2, p1, p2, d) = strategy.new_tree(&mut runner).unwrap().current();
            (10f64.powf(l1), 10f64.powf(l2), p1, p2, d)
        })
        .collect()
}

fn dark_case(s: &LevelScheme, (o1, o2, p1, p2, delta): (f64, f64, f64, f64, f64)) -> (f64, f64, DensityMatrix) {
    let v = lambda_interaction(o1, o2, p1, p2);
    let dark = dark_bright_with_phases(o1, o2, p1, p2).unwrap().dark_ket();
    let vd: f64 = (0..3)
        .map(|i| (0..3).map(|j| v[(i, j)] * dark[j]).sum::<Complex64>().norm_sqr())
        .sum::<f64>()
        .sqrt();
    let rho = cw_steady_state(
        s,
        &[
            DriveField::cw(o1, delta).with_phase(p1),
            DriveField::cw(o2, delta).with_phase(p2),
        ],
        &preset_rates(SchemeKind::Lambda, 0.0),
    )
    .unwrap();
    (vd / v.norm(), rho.population(A), rho)
}

#[test]
fn criterion_06_dark_state() {
    let s = lambda();
    let cases = random_pairs();
    let (results, elapsed) = timed(|| cases.iter().map(|&c| dark_case(&s, c)).collect::<Vec<_>>());
    let worst_v = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_a = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let pass = worst_v < 1e-12 && worst_a < 1e-9 && elapsed < Duration::from_secs(10);
    report(
        6,
        "dark vector annihilated and excited state empty at γ_cb = 0",
        pass,
        format!("1000 pairs, max |V·dark|/|V| {worst_v:.2e}, max ρ_aa {worst_a:.2e}, {elapsed:?}"),
    );
}

#[test]
fn criterion_07_transparency() {
    let t = run_scenario(&ScenarioSpec::preset(ScenarioName::EitScan)).unwrap();
    let on = value_at(&t, "im_chi_on", 0.0);
    let off = value_at(&t, "im_chi_off", 0.0);
    let ng = value_at(&t, "group_index_on", 0.0);
    let pass = on < 1e-2 * off && ng > 10.0;
    report(
        7,
        "line-centre absorption suppressed and slow group velocity",
        pass,
        format!("Im χ on/off = {:.3e}, n_g = {ng:.1}", on / off),
    );
}

#[test]
fn criterion_08_population_transfer() {
    let (t, elapsed) = timed(|| run_scenario(&ScenarioSpec::preset(ScenarioName::StirapDelayScan)).unwrap());
    let delays = t.parameter_values();
    let eff = t.column("efficiency").unwrap();
    let n = delays.len();
    let best = (0..n).filter(|&k| delays[k] > 0.0).map(|k| eff[k]).fold(0.0, f64::max);
    let ordered = (0..n / 2).all(|k| delays[k] == -delays[n - 1 - k] && eff[n - 1 - k] > eff[k]);
    let pass = best > 0.9 && ordered && elapsed < Duration::from_secs(60);
    report(
        8,
        "counterintuitive order transfers and beats intuitive order",
        pass,
        format!(
            "best efficiency {best:.4}, counterintuitive wins at all {} delays: {ordered}, {elapsed:?}",
            n / 2
        ),
    );
}

fn assert_physical(states: &[DensityMatrix], label: &str, worst: &mut (f64, f64, f64)) -> bool {
    let mut ok = true;
    for st in states {
        let c = st.check();
        worst.0 = worst.0.max(c.trace_error);
        worst.1 = worst.1.max(c.hermitian_deviation);
        worst.2 = worst.2.min(c.min_eigenvalue);
        if !(c.trace_error <= 1e-9 && c.hermitian_deviation <= 1e-10 && c.min_eigenvalue >= -1e-9) {
            println!("  {label}: {c:?}");
            ok = false;
        }
    }
    ok
}

fn cw_fields(kind: SchemeKind) -> Vec<DriveField> {
    let f = [
        DriveField::cw(3e11, 2e11),
        DriveField::cw(4e11, 1e11),
        DriveField::cw(2e11, -1e11),
        DriveField::off(),
    ];
    f[..kind.topology().len()].to_vec()
}

#[test]
fn criterion_09_conservation() {
    let s = lambda();
    let mut worst = (0.0, 0.0, 0.0);
    let mut ok = true;

    // Probe-formula scan.
    let rates = preset_rates(SchemeKind::Lambda, GAMMA_CB_SLOW);
    let th = (GAMMA_CB_SLOW * GAMMA_OPTICAL).sqrt();
    let states: Vec<DensityMatrix> = (0..21)
        .map(|k| {
            let drive = th * 10f64.powf(-1.0 + 0.1 * k as f64);
            cw_steady_state(&s, &[DriveField::cw(1e10, 0.0), DriveField::cw(drive, 0.0)], &rates).unwrap()
        })
        .collect();
    ok &= assert_physical(&states, "probe formula scan", &mut worst);

    // Dark-state scans at both drive levels.
    for level in [10.0, 0.1] {
        let spec = ScenarioSpec::preset(ScenarioName::CptScan);
        let w = level * th / 2f64.sqrt();
        let states: Vec<DensityMatrix> = spec
            .sweep
            .grid()
            .unwrap()
            .iter()
            .map(|x| cw_steady_state(&s, &[DriveField::cw(w, *x), DriveField::cw(w, 0.0)], &spec.rates).unwrap())
            .collect();
        ok &= assert_physical(&states, "dip scan", &mut worst);
    }

    // Random dark-state fields.
    let states: Vec<DensityMatrix> = random_pairs().into_iter().map(|c| dark_case(&s, c).2).collect();
    ok &= assert_physical(&states, "dark-state fields", &mut worst);

    // Transparency scan, drive on and off.
    let spec = ScenarioSpec::preset(ScenarioName::EitScan);
    let probe = match spec.fields[0].rabi {
        Rabi::Constant(r) => r,
        _ => unreachable!(),
    };
    for drive in [spec.drive_level.unwrap() * th, 0.0] {
        let states: Vec<DensityMatrix> = spec
            .sweep
            .grid()
            .unwrap()
            .iter()
            .map(|x| {
                cw_steady_state(
                    &s,
                    &[DriveField::cw(probe, *x), DriveField::cw(drive, 0.0)],
                    &spec.rates,
                )
                .unwrap()
            })
            .collect();
        ok &= assert_physical(&states, "transparency scan", &mut worst);
    }

    // Every reported state of every transfer run.
    let spec = ScenarioSpec::preset(ScenarioName::StirapDelayScan);
    let peak = gaussian_peak_for_area(spec.pulse.area, spec.pulse.fwhm);
    for delay in spec.sweep.grid().unwrap() {
        let (stokes, pump) = stirap_pulse_pair(spec.pulse.fwhm, peak, delay);
        let r = stirap_run(&s, &stokes, &pump, &spec.rates, &StirapOptions::default()).unwrap();
        ok &= assert_physical(&r.trajectory.states, "transfer", &mut worst);
    }

    // Stationary state against long-time evolution on every scheme.
    let mut worst_distance = 0.0f64;
    for kind in SchemeKind::ALL {
        let sc = build_scheme(kind, &SchemeParams::default()).unwrap();
        let rates = preset_rates(kind, 1e9);
        let l = cw_liouvillian(&sc, &cw_fields(kind), &rates).unwrap();
        let rho_ss = steady_state(&l).unwrap();
        let t_end = 40.0 / l.slowest_relaxation_rate().unwrap();
        let traj = evolve(
            &DensityMatrix::basis(sc.dim(), 1),
            &l,
            &linear_grid(0.0, t_end, 11),
            &EvolveOptions::default(),
        )
        .unwrap();
        ok &= assert_physical(&traj.states, "relaxation", &mut worst);
        worst_distance = worst_distance.max(traj.last().distance(&rho_ss));
    }
    let pass = ok && worst_distance < 1e-6;
    report(
        9,
        "trace, Hermiticity and positivity of every state; steady state vs long-time evolution",
        pass,
        format!(
            "max trace error {:.1e}, max Hermiticity deviation {:.1e}, min eigenvalue {:.1e}, max distance {worst_distance:.1e}",
            worst.0, worst.1, worst.2
        ),
    );
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut same = Vec::new();
    for name in ScenarioName::ALL {
        let bytes: Vec<Vec<u8>> = (0..2)
            .map(|k| {
                let path = dir.path().join(format!("{name}-{k}.csv"));
                let (code, _, _) = run_cli(&["--quiet", "scenario", name.name(), "--out", path.to_str().unwrap()]);
                assert_eq!(code, 0, "{name}");
                std::fs::read(&path).unwrap()
            })
            .collect();
        same.push((name, bytes[0] == bytes[1]));
    }
    let pass = same.iter().all(|(_, s)| *s);
    report(
        10,
        "repeated scenario runs give byte-identical CSV",
        pass,
        same.iter()
            .map(|(n, s)| format!("{n}: {}", if *s { "identical" } else { "differs" }))
            .collect::<Vec<_>>()
            .join(", "),
    );
}
