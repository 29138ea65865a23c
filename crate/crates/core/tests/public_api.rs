use telemax::max_law::{
    max_cdf, max_cdf_minus_unconditional, max_cdf_plus_unconditional, max_pdf, minus_plus_cdf_gap,
    zero_mass_unconditional,
};
use telemax::simulate::{MonteCarlo, PathLaw};
use telemax::{Conditioning, InitialVelocity, MaxQuery, MotionParams, SeriesConfig, TelemaxError};

fn reference() -> MotionParams {
    MotionParams::new(2.0, 1.0, 1.0).unwrap()
}

// Reference values computed in 50-digit arithmetic from the Poisson mixture
// of the conditional polynomials.
#[test]
fn frozen_unconditional_values() {
    let cfg = SeriesConfig::default();
    let p = reference();
    let cases = [
        (
            max_cdf_plus_unconditional(&p, 1.0, 1.0, &cfg).unwrap(),
            0.310_148_342_411_939_58,
        ),
        (
            max_cdf_minus_unconditional(&p, 1.0, 0.5, &cfg).unwrap(),
            0.7057392124954249,
        ),
        (zero_mass_unconditional(&p, 1.0, &cfg).unwrap(), 0.5664457425682441),
        (
            zero_mass_unconditional(&MotionParams::symmetric(1.0, 1.0).unwrap(), 1.0, &cfg).unwrap(),
            0.6736700229433489,
        ),
    ];
    for (got, want) in cases {
        assert!((got.value - want).abs() < 1e-14, "{got:?} vs {want}");
        assert!(got.abs_error_bound <= cfg.tail_tolerance);
    }
}

#[test]
fn dispatch_through_queries() {
    let p = reference();
    let cfg = SeriesConfig::default();
    let q = MaxQuery {
        t: 1.0,
        beta: 1.0,
        v0: InitialVelocity::Plus,
        cond: Conditioning::GivenCount(2),
    };
    assert!((max_cdf(&p, &q, &cfg).unwrap().value - 5.0 / 12.0).abs() < 1e-15);
    assert!(max_pdf(&p, &q).unwrap().value > 0.0);
    let unc = MaxQuery {
        cond: Conditioning::Unconditional,
        ..q
    };
    assert!(matches!(max_pdf(&p, &unc), Err(TelemaxError::Domain(_))));
    let outside = MaxQuery { beta: 2.5, ..q };
    assert!(matches!(max_cdf(&p, &outside, &cfg), Err(TelemaxError::Domain(_))));
}

#[test]
fn gap_is_difference_of_laws() {
    let cfg = SeriesConfig::default();
    let p = MotionParams::new(1.0, 1.5, 2.0).unwrap();
    for i in 0..=10 {
        let b = f64::from(i) / 10.0;
        let g = minus_plus_cdf_gap(&p, 1.0, b, &cfg).unwrap().value;
        let d = max_cdf_minus_unconditional(&p, 1.0, b, &cfg).unwrap().value
            - max_cdf_plus_unconditional(&p, 1.0, b, &cfg).unwrap().value;
        assert!((g - d).abs() < 2e-15);
        assert!(g > 0.0);
    }
}

#[test]
fn serde_round_trips() {
    let q = MaxQuery {
        t: 1.5,
        beta: 0.25,
        v0: InitialVelocity::Minus,
        cond: Conditioning::GivenCount(7),
    };
    let back: MaxQuery = serde_json::from_str(&serde_json::to_string(&q).unwrap()).unwrap();
    assert_eq!(back, q);
    let mc = MonteCarlo {
        params: reference(),
        t: 1.0,
        v0: InitialVelocity::Plus,
        law: PathLaw::EpdRate {
            alpha: 2.0,
            epsilon: 1e-9,
        },
        seed: 9,
    };
    let back: MonteCarlo = serde_json::from_str(&serde_json::to_string(&mc).unwrap()).unwrap();
    assert_eq!(back, mc);
    assert_eq!(back.paths(3).unwrap(), mc.paths(3).unwrap());
}

#[test]
fn deserialization_enforces_invariants() {
    let bad = r#"{"c1":-1.0,"c2":1.0,"lambda":0.0}"#;
    assert!(serde_json::from_str::<MotionParams>(bad).is_err());
    let good: MotionParams = serde_json::from_str(r#"{"c1":2.0,"c2":1.0,"lambda":0.5}"#).unwrap();
    assert_eq!(good, MotionParams::new(2.0, 1.0, 0.5).unwrap());
}
