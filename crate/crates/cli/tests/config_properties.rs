use cnt_coherence::scenario::ScenarioName;
use cnt_coherence_cli::config::{parse_config, RunConfig, Selection};
use proptest::prelude::*;

const KEYS: &[&str] = &[
    "[run]",
    "[rates]",
    "[sweep]",
    "[[fields]]",
    "[[rates.decay]]",
    "[solver]",
    "[evolve]",
    "scenario",
    "solver",
    "gamma_cb",
    "gamma_ab",
    "points",
    "start",
    "rabi",
    "lifetime",
    "rate",
    "from",
    "to",
    "=",
    "\"",
    "\n",
    " ",
    "1e6 /s",
    "1 us",
    "\"cpt_scan\"",
    "\"steady\"",
    "true",
    "12",
    "-3.5",
    "[",
    "]",
    "{",
    "}",
    ",",
    "#",
];

fn fragments() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(KEYS), 0..40).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    /// Every input either resolves or yields a located diagnostic.
    #[test]
    fn parsing_is_total(text in fragments()) {
        match parse_config(&text) {
            Ok(r) => prop_assert_eq!(parse_config(&r.config.to_toml()).unwrap().config, r.config),
            Err(e) => prop_assert!(e.to_string().starts_with("line "), "{}", e),
        }
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,200}") {
        let _ = parse_config(&text);
    }

    #[test]
    fn numeric_settings_round_trip(
        gamma_cb in 1e3f64..1e10,
        points in 3usize..400,
        start in -1e12f64..-1.0,
        level in prop::option::of(0.01f64..100.0),
        tol in 1e-12f64..1e-6,
    ) {
        let mut c = RunConfig::defaults(Selection::Scenario(ScenarioName::CptScan));
        c.rates.set_coherence("c", "b", gamma_cb);
        c.rates.set_decay("c", "b", gamma_cb);
        let sc = c.scenario.as_mut().unwrap();
        sc.sweep.points = points;
        sc.sweep.start = start;
        sc.sweep.stop = -start;
        sc.drive_level = level;
        c.solver.evolve_tol = tol;
        prop_assert_eq!(parse_config(&c.to_toml()).unwrap().config, c);
    }
}
