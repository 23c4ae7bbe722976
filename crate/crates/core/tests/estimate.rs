use irrspec::aliasfree::{theoretical_sampled_covariance, Band};
use irrspec::estimate::{
    beutler_coefficients, beutler_grid, beutler_plugin_distribution, compound_covariance_view,
    empirical_covariance_sequence, masry_estimate, EstimatorConfig, FrequencyGrid, RaisedCosine, BEUTLER_RIDGE,
};
use irrspec::simulate::{simulate_path, SampledPath, SynthesisMethod};
use irrspec::spectra::covariance_from_psd;
use irrspec::{SamplingScheme, Seed, SpectrumModel};
use std::f64::consts::PI;

fn ensemble(model: &SpectrumModel<f64>, scheme: &SamplingScheme<f64>, runs: u64, n: usize, master: u64) -> Vec<SampledPath<f64>> {
    (0..runs)
        .map(|r| simulate_path(model, scheme, n, Seed::new(master).run(r), SynthesisMethod::Exact).unwrap())
        .collect()
}

#[test]
fn estimate_is_even_shift_invariant_and_quadratic() {
    let m = SpectrumModel::Simulation;
    let s = SamplingScheme::shifted_exponential(1.0, 1.0).unwrap();
    let p = simulate_path(&m, &s, 300, Seed::new(31), SynthesisMethod::Exact).unwrap();
    let grid = FrequencyGrid::linspace(-2.0 * PI, 2.0 * PI, 257).unwrap();
    let cfg = EstimatorConfig::new(RaisedCosine, 0.02, s.beta(), grid).unwrap();
    let est = masry_estimate(&p, &cfg).unwrap();
    let n = est.len();
    for j in 0..n {
        assert!((est[j] - est[n - 1 - j]).abs() <= 1e-12 * (1.0 + est[j].abs()));
    }
    let mut shifted = p.clone();
    // A power of two keeps the shifted spacings bit-exact.
    shifted.times.iter_mut().for_each(|t| *t += 1024.0);
    let est_shift = masry_estimate(&shifted, &cfg).unwrap();
    for (a, b) in est.iter().zip(&est_shift) {
        assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
    }
    let mut scaled = p.clone();
    scaled.values.iter_mut().for_each(|x| *x *= 3.0);
    let est_scaled = masry_estimate(&scaled, &cfg).unwrap();
    for (a, b) in est.iter().zip(&est_scaled) {
        assert!((9.0 * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }
}

#[test]
fn class_a_sampled_covariance_vanishes_beyond_lag_zero() {
    let m = SpectrumModel::parse("triangle:a=1").unwrap();
    let s = SamplingScheme::shifted_exponential(1.0, 1.0).unwrap();
    let paths = ensemble(&m, &s, 50, 200, 32);
    let seq = empirical_covariance_sequence(&paths, 10).unwrap();
    assert!((seq.values[0] - 1.0).abs() <= 3.0 * seq.standard_errors[0]);
    for n in 1..=10 {
        assert!(seq.values[n].abs() <= 3.0 * seq.standard_errors[n], "lag {n}: {}", seq.values[n]);
    }
}

#[test]
fn deterministic_lag_one_matches_covariance() {
    let m = SpectrumModel::Simulation;
    let s = SamplingScheme::deterministic(1.0).unwrap();
    let paths = ensemble(&m, &s, 100, 200, 33);
    let seq = empirical_covariance_sequence(&paths, 2).unwrap();
    let c1 = covariance_from_psd(&m, 1.0).unwrap();
    assert!((seq.values[1] - c1).abs() <= 3.0 * seq.standard_errors[1]);
    assert!((seq.values[0] - 4.0).abs() <= 3.0 * seq.standard_errors[0]);
}

#[test]
fn compound_views_of_aliasing_pair_coincide() {
    let a = SpectrumModel::<f64>::parse("triangle:a=1").unwrap();
    let b = SpectrumModel::<f64>::parse("triangle:a=0.5").unwrap();
    for s in [
        SamplingScheme::shifted_exponential(1.0, 1.0).unwrap(),
        SamplingScheme::shifted_gamma(1.0, 2.0, 0.5).unwrap(),
        SamplingScheme::theorem4(1.0).unwrap(),
        SamplingScheme::deterministic(2.0).unwrap(),
    ] {
        let va = compound_covariance_view(&a, &s).unwrap();
        let vb = compound_covariance_view(&b, &s).unwrap();
        assert_eq!(va.atom_at_zero, vb.atom_at_zero);
        match (&va.part, &vb.part) {
            (irrspec::estimate::CompoundPart::Density { values: x, .. }, irrspec::estimate::CompoundPart::Density { values: y, .. }) => {
                assert_eq!(x.len(), y.len());
                assert!(x.iter().zip(y).all(|(p, q)| (p - q).abs() <= 1e-15), "{s}");
            }
            (irrspec::estimate::CompoundPart::Atoms(x), irrspec::estimate::CompoundPart::Atoms(y)) => {
                assert_eq!(x.len(), y.len());
                assert!(x.iter().zip(y).all(|(p, q)| p.0 == q.0 && (p.1 - q.1).abs() <= 1e-15), "{s}");
            }
            _ => panic!("mismatched parts"),
        }
    }
}

#[test]
fn beutler_residual_decreases_for_two_point_scheme() {
    let s = SamplingScheme::theorem4(1.0).unwrap();
    let band = Band::symmetric(1.1, 1.0).unwrap();
    let grid = beutler_grid(band, 0.0, 512).unwrap();
    let res: Vec<f64> = [4, 8, 16, 32]
        .iter()
        .map(|&n| beutler_coefficients(&s, band, 0.0, n, &grid, BEUTLER_RIDGE).unwrap().rms_residual)
        .collect();
    println!("two-point residuals {res:?}");
    assert!(res.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn beutler_residual_plateaus_for_deterministic_scheme() {
    let s = SamplingScheme::deterministic(1.0).unwrap();
    let band = Band::symmetric(1.0, 1.0).unwrap();
    let grid = beutler_grid(band, 0.0, 512).unwrap();
    let res: Vec<f64> = [4, 8, 16, 32]
        .iter()
        .map(|&n| beutler_coefficients(&s, band, 0.0, n, &grid, BEUTLER_RIDGE).unwrap().rms_residual)
        .collect();
    println!("deterministic residuals {res:?}");
    // On the circle the best fit by e^{ikλ}, k ≥ 1, keeps the mean 1/2 and
    // the negative-frequency half of the indicator's Fourier series:
    // residual² → 1/2 - Σ_{k odd} 1/(π²k²) = 3/8.
    let limit = 0.375f64.sqrt();
    assert!(res.iter().all(|&r| r > limit - 1e-3));
    assert!(res[3] - limit < 0.005, "{} vs {limit}", res[3]);
}

#[test]
fn plugin_recovers_variance_over_full_band() {
    let m = SpectrumModel::Simulation;
    // d = 0.25 puts the whole density support inside [-1.1π/d, 1.1π/d].
    let s = SamplingScheme::theorem4(0.25).unwrap();
    let band = Band::symmetric(1.1, 0.25).unwrap();
    let grid = beutler_grid(band, band.hi, 512).unwrap();
    let fit = beutler_coefficients(&s, band, band.hi, 16, &grid, BEUTLER_RIDGE).unwrap();
    let r: Vec<f64> = (1..=16).map(|k| theoretical_sampled_covariance(&m, &s, k).unwrap()).collect();
    let phi = beutler_plugin_distribution(&r, &fit.coefficients).unwrap();
    let bound = fit.error_bound(&m);
    println!("plug-in {phi}, bound {bound}, residual {}", fit.rms_residual);
    assert!((phi - 4.0).abs() <= bound, "{phi} vs 4 ± {bound}");
}

#[test]
fn poisson_ensemble_tracks_peak() {
    let m = SpectrumModel::Simulation;
    let s = SamplingScheme::poisson(1.0).unwrap();
    let grid = FrequencyGrid::from_values(vec![3.0 * PI / 4.0, 7.0 * PI / 4.0]).unwrap();
    let cfg = EstimatorConfig::new(RaisedCosine, 1.0 / 50.0, 1.0, grid).unwrap();
    let runs = 40;
    let mut mean = [0.0; 2];
    for p in ensemble(&m, &s, runs, 1000, 34) {
        let e = masry_estimate(&p, &cfg).unwrap();
        mean[0] += e[0] / runs as f64;
        mean[1] += e[1] / runs as f64;
    }
    for (k, &l) in [3.0 * PI / 4.0, 7.0 * PI / 4.0].iter().enumerate() {
        let truth = m.psd(l);
        assert!((mean[k] - truth).abs() <= 0.25 * truth, "λ={l}: {} vs {truth}", mean[k]);
    }
}
