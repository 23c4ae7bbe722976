use std::sync::OnceLock;

use irrspec::estimate::raised_cosine_kernel;
use irrspec::harness::{
    in_peak_region, in_valley_region, mse_report, run_sweep, write_sweep_report, ExperimentConfig, ExperimentReport,
    SweepPoint,
};
use irrspec::SpectrumModel;

fn small(sweep: &[(f64, f64)], runs: usize, n: usize) -> ExperimentConfig<f64> {
    let mut cfg = ExperimentConfig::d_sweep();
    cfg.sweep = sweep.iter().map(|&(d, theta)| SweepPoint { d, theta }).collect();
    cfg.runs = runs;
    cfg.n = n;
    cfg
}

/// Exact mean of the estimator at `lambda` for spacing `d + Exp(mean θ)`:
/// `(1/πβn) Σ_m (n - m) E[C(S_m) w(b S_m) cos(λ S_m)]`, with `S_m` equal to
/// `m d` plus a Gamma(m, θ) variable.
fn expected_estimate(model: &SpectrumModel<f64>, d: f64, theta: f64, n: usize, b: f64, lambda: f64) -> f64 {
    let beta = 1.0 / (d + theta);
    let reach = 1.0 / b;
    let g = |s: f64| model.covariance(s) * raised_cosine_kernel(b * s) * (lambda * s).cos();
    let mut total = 0.0;
    let mut ln_fact = 0.0; // ln (m - 1)!
    for m in 1..n {
        if m > 1 {
            ln_fact += ((m - 1) as f64).ln();
        }
        let shift = m as f64 * d;
        if shift >= reach {
            break;
        }
        if m as f64 * theta > 3.0 * reach {
            break;
        }
        let e = if theta == 0.0 {
            g(shift)
        } else {
            let span = reach - shift;
            let panels = 4000;
            let h = span / panels as f64;
            let dens = |x: f64| {
                if x <= 0.0 {
                    return if m == 1 { 1.0 / theta } else { 0.0 };
                }
                ((m - 1) as f64 * x.ln() - x / theta - ln_fact - m as f64 * theta.ln()).exp()
            };
            // Simpson's rule.
            let mut s = 0.0;
            for j in 0..=panels {
                let x = j as f64 * h;
                let w = if j == 0 || j == panels { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
                s += w * dens(x) * g(shift + x);
            }
            s * h / 3.0
        };
        total += (n - m) as f64 * e;
    }
    total / (std::f64::consts::PI * beta * n as f64)
}

struct Shared {
    report: ExperimentReport<f64>,
}

/// d = 1 with θ = 1 and θ = 20, 40 runs of n = 1000.
fn shared() -> &'static Shared {
    static CELL: OnceLock<Shared> = OnceLock::new();
    CELL.get_or_init(|| Shared {
        report: run_sweep(&small(&[(1.0, 1.0), (1.0, 20.0)], 40, 1000)).unwrap(),
    })
}

#[test]
fn identical_seed_reproduces_csv_bitwise() {
    let cfg = small(&[(0.0, 1.0), (2.0, 1.0)], 1, 300);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fa = write_sweep_report(&run_sweep(&cfg).unwrap(), a.path(), "d-sweep").unwrap();
    let fb = write_sweep_report(&run_sweep(&cfg).unwrap(), b.path(), "d-sweep").unwrap();
    assert_eq!(fa.len(), 3);
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
    }
    let mut other = cfg.clone();
    other.master_seed = 2;
    let c = tempfile::tempdir().unwrap();
    let fc = write_sweep_report(&run_sweep(&other).unwrap(), c.path(), "d-sweep").unwrap();
    assert_ne!(std::fs::read(&fa[0]).unwrap(), std::fs::read(&fc[0]).unwrap());
}

#[test]
fn csv_files_carry_provenance() {
    let cfg = small(&[(1.0, 1.0)], 2, 100);
    let dir = tempfile::tempdir().unwrap();
    for f in write_sweep_report(&run_sweep(&cfg).unwrap(), dir.path(), "d-sweep").unwrap() {
        let text = std::fs::read_to_string(&f).unwrap();
        let header: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
        assert!(header.iter().any(|l| l.starts_with("# config-sha256: ")));
        assert!(header.iter().any(|l| l.starts_with("# convention: ")));
        assert!(header.iter().any(|l| l.starts_with("# synthesis: ")));
        assert!(header.contains(&"# config: runs=2"));
        assert!(!text.contains("elapsed"));
    }
}

#[test]
fn report_shape() {
    let r = run_sweep(&small(&[(0.0, 1.0), (1.0, 1.0), (8.0, 1.0)], 5, 1000)).unwrap();
    assert_eq!(r.points.len(), 3);
    for p in &r.points {
        assert_eq!(p.curves.len(), 5);
        assert!(p.curves.iter().all(|c| c.len() == r.grid.len()));
        assert!(p.summary.as_ref().unwrap().mse.iter().all(|&m| m >= 0.0));
        assert!(p.error.is_none());
    }
}

#[test]
fn doubling_runs_keeps_means() {
    let a = run_sweep(&small(&[(1.0, 1.0)], 10, 300)).unwrap();
    let b = run_sweep(&small(&[(1.0, 1.0)], 20, 300)).unwrap();
    let (sa, sb) = (a.points[0].summary.as_ref().unwrap(), b.points[0].summary.as_ref().unwrap());
    for j in 0..a.grid.len() {
        let se = (sa.variance[j] / 9.0 + sb.variance[j] / 19.0).sqrt();
        assert!((sa.mean[j] - sb.mean[j]).abs() <= 3.0 * se + 1e-12, "λ={}", a.grid[j]);
    }
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(run_sweep(&small(&[(1.0, 1.0)], 0, 100)).is_err());
    assert!(run_sweep(&small(&[(1.0, 1.0)], 1, 1)).is_err());
    assert!(run_sweep(&small(&[], 1, 100)).is_err());
    assert!(run_sweep(&small(&[(-1.0, 1.0)], 1, 100)).is_err());
}

#[test]
fn ensemble_mean_matches_exact_expectation() {
    let s = shared();
    let model = &s.report.config.model;
    for p in &s.report.points {
        let summary = p.summary.as_ref().unwrap();
        let runs = p.curves.len() as f64;
        let mut worst = 0.0f64;
        for (j, &l) in s.report.grid.iter().enumerate().step_by(16) {
            let truth = expected_estimate(model, p.point.d, p.point.theta, 1000, 1.0 / 50.0, l);
            let se = (summary.variance[j] / (runs - 1.0)).sqrt();
            let z = (summary.mean[j] - truth).abs() / se;
            worst = worst.max(z);
        }
        println!("θ={}: worst |z| = {worst:.2}", p.point.theta);
        assert!(worst < 4.5);
    }
}

#[test]
fn large_theta_inflates_peak_variance() {
    let s = shared();
    let var = |k: usize| {
        let sm = s.report.points[k].summary.as_ref().unwrap();
        let v: Vec<f64> = s
            .report
            .grid
            .iter()
            .zip(&sm.variance)
            .filter(|(&l, _)| in_peak_region(l))
            .map(|(_, &v)| v)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let ratio = var(1) / var(0);
    println!("peak variance θ=20 / θ=1 = {ratio:.2}");
    assert!(ratio > 1.0);
}

#[test]
fn consistent_case_valleys_below_peaks() {
    let r = run_sweep(&small(&[(0.0, 1.0)], 100, 1000)).unwrap();
    let p = &r.points[0];
    let peak = p.peak_mse(&r.grid).unwrap();
    let valley = p.valley_mse(&r.grid).unwrap();
    assert!(valley < peak, "{valley} vs {peak}");
}

#[test]
fn shared_truth_column() {
    let s = shared();
    let m = SpectrumModel::<f64>::Simulation;
    for (&l, &t) in s.report.grid.iter().zip(&s.report.truth) {
        assert_eq!(t, m.psd(l));
    }
    assert!(s.report.grid.iter().any(|&l| in_valley_region(l)));
    let r = mse_report(&s.report.points[0].curves, &s.report.truth).unwrap();
    assert_eq!(&r, s.report.points[0].summary.as_ref().unwrap());
}

