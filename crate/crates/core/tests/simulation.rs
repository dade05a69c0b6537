use latdec::cvp::Inner;
use latdec::lattice::{family_generator, minimum_distance};
use latdec::sim::{db_to_linear, run_simulation, simulate_error_rate, LatticeSource, SimulationConfig, StopRule};
use latdec::vr::pe_union_bound;
use latdec::LatticeFamily;

#[test]
fn e8_rate_sits_between_a_tenth_of_the_bound_and_the_bound() {
    let g = family_generator(LatticeFamily::E, 8).unwrap();
    let d = minimum_distance(&g).unwrap();
    let stop = StopRule { max_errors: 300, max_trials: 2_000_000 };
    for db in [4.0, 4.5] {
        let delta = db_to_linear(db);
        let ub = pe_union_bound(&g, delta, 2.0 * d * d).unwrap();
        assert!(ub <= 1e-2);
        let row = simulate_error_rate(&g, Some(LatticeFamily::E), Inner::Sphere, delta, stop, 3).unwrap();
        assert!(row.rate <= ub && row.rate >= ub / 10.0, "{db} dB: rate {} bound {ub}", row.rate);
    }
}

#[test]
fn rates_fall_with_vnr_and_mld_is_best() {
    let config = SimulationConfig {
        source: LatticeSource::Family { family: LatticeFamily::D, n: 4 },
        decoders: vec![Inner::Sphere, Inner::Zf, Inner::Corner, Inner::Hld],
        deltas: [0.0, 2.0, 4.0].iter().map(|&db| db_to_linear(db)).collect(),
        stop: StopRule { max_errors: 200, max_trials: 100_000 },
        seed: 9,
    };
    let rep = run_simulation(&config).unwrap();
    for dec in ["sphere", "zf", "corner", "hld"] {
        let rates: Vec<(f64, f64)> =
            config.deltas.iter().map(|&d| rep.row(dec, d).map(|r| (r.ci_lo, r.ci_hi)).unwrap()).collect();
        for w in rates.windows(2) {
            assert!(w[1].0 <= w[0].1, "{dec} not decreasing: {rates:?}");
        }
    }
    for &d in &config.deltas {
        let mld = rep.row("sphere", d).unwrap();
        for dec in ["zf", "corner", "hld"] {
            assert!(mld.ci_lo <= rep.row(dec, d).unwrap().ci_hi, "{dec} beats MLD at {d}");
        }
    }
}

#[test]
fn identical_configs_give_identical_bytes() {
    let config = SimulationConfig {
        source: LatticeSource::Family { family: LatticeFamily::A, n: 3 },
        decoders: vec![Inner::Sphere, Inner::Folding],
        deltas: vec![db_to_linear(3.0)],
        stop: StopRule { max_errors: 50, max_trials: 20_000 },
        seed: 77,
    };
    let dump = |c: &SimulationConfig| {
        let rep = run_simulation(c).unwrap();
        let mut csv = Vec::new();
        rep.write_csv(&mut csv).unwrap();
        (csv, serde_json::to_string(&rep).unwrap())
    };
    assert_eq!(dump(&config), dump(&config));
}
