//! Property tests of structural invariants: count conservation, marginal /
//! transition round trips, CSV round trips, and independence of RNG streams.

use proptest::prelude::*;
use sirmc::csv::{read_count_path, write_count_path};
use sirmc::rng::RngStream;
use sirmc::sir::{
    default_init, marginals_from_transitions, simulate, transitions_from_marginals,
};
use sirmc::ModelParams;

fn path_strategy() -> impl Strategy<Value = (f64, f64, u64, u64, u32, u64)> {
    (
        0.01f64..0.5,
        0.01f64..0.5,
        500u64..20_000,
        1u64..200,
        1u32..80,
        any::<u64>(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn conservation_and_monotonicity((a, c, n, i0, horizon, seed) in path_strategy()) {
        prop_assume!(i0 < n);
        let params = ModelParams::new(a, c, n).unwrap();
        let path = simulate(&params, &default_init(n, i0), horizon, RngStream::new(seed, 0))
            .unwrap();
        path.validate(n).unwrap();
        // susceptibles only fall, recovered only rise
        for w in path.states.windows(2) {
            prop_assert!(w[1].n1 <= w[0].n1);
            prop_assert!(w[1].n3 >= w[0].n3);
            prop_assert_eq!(w[1].total(), n);
        }
    }

    #[test]
    fn transition_marginal_round_trip((a, c, n, i0, horizon, seed) in path_strategy()) {
        prop_assume!(i0 < n);
        let params = ModelParams::new(a, c, n).unwrap();
        let path = simulate(&params, &default_init(n, i0), horizon, RngStream::new(seed, 1))
            .unwrap();
        let recovered = transitions_from_marginals(&path.states).unwrap();
        prop_assert_eq!(&recovered, &path.transitions);
        let states = marginals_from_transitions(&path.states[0], &path.transitions).unwrap();
        prop_assert_eq!(&states, &path.states);
    }

    #[test]
    fn csv_round_trip((a, c, n, i0, horizon, seed) in path_strategy()) {
        prop_assume!(i0 < n);
        let params = ModelParams::new(a, c, n).unwrap();
        let path = simulate(&params, &default_init(n, i0), horizon, RngStream::new(seed, 2))
            .unwrap();
        let text = write_count_path(&path);
        prop_assert_eq!(read_count_path(&text).unwrap(), path);
    }
}

#[test]
fn distinct_streams_are_uncorrelated() {
    // raw uniform draws from neighbouring streams of the same seed should
    // show no linear association
    use rand::Rng;
    let draws = 20_000usize;
    let mut rng_a = RngStream::new(12345, 0).rng();
    let mut rng_b = RngStream::new(12345, 1).rng();
    let xs: Vec<f64> = (0..draws).map(|_| rng_a.gen::<f64>()).collect();
    let ys: Vec<f64> = (0..draws).map(|_| rng_b.gen::<f64>()).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&xs), mean(&ys));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    let rho = sxy / (sxx * syy).sqrt();
    // 4 standard errors under independence
    assert!(rho.abs() < 4.0 / (draws as f64).sqrt(), "rho {rho}");
}

#[test]
fn substreams_do_not_collide_with_base_streams() {
    let base = RngStream::new(7, 0);
    let mut seen = std::collections::HashSet::new();
    for salt in 0..1000u64 {
        assert!(seen.insert(base.substream(salt)), "substream collision at salt {salt}");
    }
    for stream in 0..1000u64 {
        assert!(
            seen.insert(RngStream::new(7, stream + 1)),
            "stream {} collides with a substream",
            stream + 1
        );
    }
}
