//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed; exits non-zero
//! when any criterion fails.

use std::time::Instant;

use fwm_core::bloch::{self, CoherenceState, FieldSample, SystemParams};
use fwm_core::experiment::{run_single, run_sweep, FigureId, SweepMode};
use fwm_core::fitting::{fit, FitBounds, FitOptions, FixedParams, PulseSet, TraceModel};
use fwm_core::harris_hau::{self, HarrisHauInputs, PHI_DRIVE_SCAN, TIGHT_FOCUS_CROSS_SECTION_RATIO};
use fwm_core::propagator::{self, FieldEnvelope, PropagationGrid};
use fwm_core::pulse::{Coupling, PulseSpec};
use fwm_core::steady::{steady_state, SteadyStateInputs};
use fwm_core::trace::Trace;
use fwm_core::units::{self, PhysicalConstants};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<(bool, String), String>;

const FIG2: SystemParams = SystemParams {
    omega_c: 0.32,
    delta: 13.0,
    gamma21: 9e-4,
    gamma31: 1.25,
    gamma41: 1.25,
    alpha: 42.0,
};

fn consts() -> PhysicalConstants {
    PhysicalConstants::rubidium_d2()
}

fn fig2_pulses(omega_d: f64) -> (PulseSpec, PulseSpec) {
    let c = consts();
    let us = |x| c.us_to_gamma_units(x);
    (
        PulseSpec::square(0.01, us(0.5), us(50.0), us(0.5)),
        PulseSpec::square(omega_d, us(0.5), us(70.0), us(0.5)),
    )
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn criterion_1() -> Outcome {
    let s = steady_state(&SteadyStateInputs {
        omega_c: 0.32,
        omega_d: 0.32,
        delta: 13.0,
        gamma31: 1.25,
        alpha: 42.0,
    })
    .map_err(e)?;
    let pass = (s.signal_efficiency - 0.592).abs() <= 1e-3 && (s.probe_transmission - 0.248).abs() <= 1e-3;
    Ok((
        pass,
        format!("signal {:.6} (0.592±1e-3), probe {:.6} (0.248±1e-3)", s.signal_efficiency, s.probe_transmission),
    ))
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for rabi in [0.1, 0.32, 0.7] {
        let s = steady_state(&SteadyStateInputs {
            omega_c: rabi,
            omega_d: rabi,
            delta: 0.0,
            gamma31: 1.25,
            alpha: 42.0,
        })
        .map_err(e)?;
        worst = worst
            .max((s.probe_transmission - 0.25).abs())
            .max((s.signal_efficiency - 0.25).abs());
    }
    Ok((worst <= 1e-6, format!("max |T - 0.25| = {worst:.2e} over Ω ∈ {{0.1, 0.32, 0.7}} (≤1e-6)")))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    for _ in 0..10 {
        let params = SystemParams {
            omega_c: rng.random_range(0.2..0.7),
            delta: rng.random_range(0.0..20.0),
            gamma21: 0.0,
            gamma31: 1.25,
            gamma41: 1.25,
            alpha: rng.random_range(1.0..100.0),
        };
        let omega_d = rng.random_range(0.05..0.7);
        let t_d = units::eit_delay_gamma_units(params.alpha, params.gamma31, params.omega_c).map_err(e)?;
        let t_p = (8.0 * t_d).max(2000.0);
        let probe = PulseSpec::square(0.01, 20.0, t_p, 10.0);
        let driving = PulseSpec::square(omega_d, 10.0, t_p + 4.0 * t_d + 100.0, 10.0);
        let dt = 0.1f64.min(0.8 * bloch::max_stable_dt(&params, params.omega_c, omega_d));
        let grid = PropagationGrid {
            n_z: (params.alpha.ceil() as usize).max(50),
            dt,
            t_max: None,
        };
        let r = propagator::propagate(&probe, &Coupling::Constant, &driving, &params, &grid).map_err(e)?;
        let (p, s) = r.plateau_transmissions.ok_or("no plateau")?;
        let a = steady_state(&SteadyStateInputs {
            omega_c: params.omega_c,
            omega_d,
            delta: params.delta,
            gamma31: params.gamma31,
            alpha: params.alpha,
        })
        .map_err(e)?;
        let dev = (p - a.probe_transmission).abs().max((s - a.signal_efficiency).abs());
        if dev > worst {
            worst = dev;
            detail = format!(
                "α={:.1} Δ={:.2} Ωc={:.3} Ωd={:.3}: pde ({p:.4}, {s:.4}) vs analytic ({:.4}, {:.4})",
                params.alpha, params.delta, params.omega_c, omega_d, a.probe_transmission, a.signal_efficiency
            );
        }
    }
    Ok((worst <= 0.01, format!("10 draws, max deviation {worst:.2e} (≤0.01); worst at {detail}")))
}

fn fig2_efficiency(omega_d: f64, gamma21: f64, alpha: f64, delta: f64) -> Result<f64, String> {
    let (probe, driving) = fig2_pulses(omega_d);
    let params = SystemParams {
        gamma21,
        alpha,
        delta,
        ..FIG2
    };
    let r = propagator::propagate(&probe, &Coupling::Constant, &driving, &params, &PropagationGrid::default())
        .map_err(e)?;
    Ok(r.conversion_efficiency)
}

fn criterion_4() -> Outcome {
    let eff = fig2_efficiency(0.35, 9e-4, 42.0, 13.0)?;
    Ok(((eff - 0.42).abs() <= 0.04, format!("efficiency {eff:.4} (0.42±0.04)")))
}

fn criterion_5() -> Outcome {
    let run = run_single(&FigureId::Fig3b.config().map_err(e)?).map_err(e)?;
    let eff = run.result.conversion_efficiency;
    Ok(((eff - 0.13).abs() <= 0.03, format!("efficiency {eff:.4} (0.13±0.03)")))
}

fn criterion_6() -> Outcome {
    let eff = fig2_efficiency(0.35, 6e-4, 36.0, 9.0)?;
    Ok(((eff - 0.52).abs() <= 0.04, format!("efficiency {eff:.4} at Δ=9Γ (0.52±0.04)")))
}

fn criterion_7() -> Outcome {
    let config = FigureId::Fig5.config().map_err(e)?;
    let mut pass = true;
    let mut detail = Vec::new();
    for (series, cfg) in config.expand_series() {
        let records = run_sweep(&cfg, SweepMode::Analytic, false).map_err(e)?;
        let best = records
            .iter()
            .filter(|r| (60.0..=110.0).contains(&r.value))
            .max_by(|a, b| a.signal_efficiency.total_cmp(&b.signal_efficiency))
            .ok_or("no sweep points in [60, 110]")?;
        pass &= best.signal_efficiency >= 0.95;
        let gamma31 = series.map(|s| s.1).unwrap_or(cfg.params.gamma31);
        detail.push(format!("γ31={gamma31}: peak {:.4} at Δ={}Γ", best.signal_efficiency, best.value));
    }
    Ok((pass, format!("{} (≥0.95 in [60Γ, 110Γ])", detail.join("; "))))
}

fn criterion_8() -> Outcome {
    let c = consts();
    let t_d = c.gamma_units_to_us(units::eit_delay_gamma_units(42.0, 1.25, 0.32).map_err(e)?);
    let eta = harris_hau::delay_ratio(t_d, 50.0).map_err(e)?;
    let r = harris_hau::loss_parameter(42.0, 13.0, 1.25).map_err(e)?;
    let zeta = harris_hau::zeta(&HarrisHauInputs {
        n_drive_photons: 60.0,
        cross_section_ratio: TIGHT_FOCUS_CROSS_SECTION_RATIO,
        phi: PHI_DRIVE_SCAN,
        eta,
        r,
    })
    .map_err(e)?;
    let pass = (eta - 0.27).abs() <= 0.01 && (r - 0.048).abs() <= 0.001 && (zeta - 0.060).abs() <= 0.001;
    Ok((pass, format!("η={eta:.4} r={r:.5} ζ={zeta:.5} (0.27±0.01, 0.048±0.001, 0.060±0.001)")))
}

fn criterion_9() -> Outcome {
    let c = consts();
    let i_weak = units::rabi_to_intensity(0.074, &c).map_err(e)?;
    let i_strong = units::rabi_to_intensity(0.35, &c).map_err(e)?;
    let photons = units::photons_per_atomic_cross_section(0.080, 70e-6, &c).map_err(e)?;
    let pass = (i_weak / 0.080 - 1.0).abs() <= 0.05 && (i_strong / 1.8 - 1.0).abs() <= 0.05 && (55.0..=70.0).contains(&photons);
    Ok((
        pass,
        format!(
            "I(0.074Γ)={:.1} μW/cm² (80±5%), I(0.35Γ)={i_strong:.4} mW/cm² (1.8±5%), N={photons:.2} ([55, 70])",
            i_weak * 1e3
        ),
    ))
}

fn linearity() -> Result<(bool, String), String> {
    let (probe, driving) = fig2_pulses(0.35);
    let grid = PropagationGrid {
        n_z: 30,
        dt: 0.1,
        t_max: None,
    };
    let t_max = propagator::resolve_t_max(&probe, &Coupling::Constant, &driving, &FIG2, &grid).map_err(e)?;
    let n = (t_max / grid.dt).ceil() as usize + 1;
    let base: Vec<Complex64> = (0..n).map(|k| Complex64::new(probe.amplitude(k as f64 * grid.dt), 0.0)).collect();
    let scale = Complex64::new(0.7, -1.3);
    let run = |samples: Vec<Complex64>| {
        propagator::propagate_envelope(
            FieldEnvelope {
                t0: 0.0,
                dt: grid.dt,
                samples,
            },
            &probe,
            &Coupling::Constant,
            &driving,
            &FIG2,
            &grid,
        )
    };
    let a = run(base.clone()).map_err(e)?;
    let b = run(base.iter().map(|z| z * scale).collect()).map_err(e)?;
    let mut worst: f64 = 0.0;
    for (x, y) in [(&a.probe_out, &b.probe_out), (&a.signal_out, &b.signal_out)] {
        let peak = x.samples.iter().map(|z| (z * scale).norm()).fold(0.0, f64::max);
        let dev = x.samples.iter().zip(&y.samples).map(|(p, q)| (p * scale - q).norm()).fold(0.0, f64::max);
        worst = worst.max(dev / peak);
    }
    Ok((worst <= 1e-10, format!("linearity {worst:.1e} (≤1e-10)")))
}

fn passivity() -> Result<(bool, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let gamma31 = rng.random_range(0.5..1.5);
        let params = SystemParams {
            omega_c: rng.random_range(0.3..0.7),
            delta: rng.random_range(-20.0..20.0),
            gamma21: rng.random_range(0.0..2e-3),
            gamma31,
            gamma41: gamma31,
            alpha: rng.random_range(0.0..40.0),
        };
        let omega_d = rng.random_range(0.0..0.7);
        let t_p = rng.random_range(30.0..200.0);
        let probe = PulseSpec::square(0.01, 10.0, t_p, rng.random_range(0.0..t_p / 4.0));
        let driving = PulseSpec::square(omega_d, 5.0, t_p + rng.random_range(0.0..400.0), rng.random_range(0.0..7.0));
        let grid = PropagationGrid {
            n_z: ((params.alpha / 2.0).ceil() as usize).max(24),
            dt: 0.1f64.min(0.9 * bloch::max_stable_dt(&params, params.omega_c, omega_d)),
            t_max: None,
        };
        let r = propagator::propagate(&probe, &Coupling::Constant, &driving, &params, &grid).map_err(e)?;
        worst = worst.max(r.energy_transmission_probe + r.conversion_efficiency);
    }
    Ok((worst <= 1.0 + 1e-3, format!("passivity max T+η {worst:.5} over 100 draws (≤1+1e-3)")))
}

fn grid_halving() -> Result<(bool, String), String> {
    let (probe, driving) = fig2_pulses(0.35);
    let coarse = PropagationGrid::default();
    let fine = coarse.scaled(2.0).map_err(e)?;
    let a = propagator::propagate(&probe, &Coupling::Constant, &driving, &FIG2, &coarse).map_err(e)?;
    let b = propagator::propagate(&probe, &Coupling::Constant, &driving, &FIG2, &fine).map_err(e)?;
    let change = (a.conversion_efficiency - b.conversion_efficiency)
        .abs()
        .max((a.energy_transmission_probe - b.energy_transmission_probe).abs());
    Ok((change < 0.005, format!("grid halving change {change:.1e} (<0.005)")))
}

fn damping() -> Result<(bool, String), String> {
    let params = SystemParams {
        omega_c: 0.0,
        delta: 3.0,
        gamma21: 0.2,
        gamma31: 1.25,
        gamma41: 1.0,
        alpha: 0.0,
    };
    let quiet = FieldSample::default();
    let start = CoherenceState::new(Complex64::new(0.3, -0.1), Complex64::new(0.2, 0.4), Complex64::new(-0.5, 0.25));
    let dt = 1e-3;
    let mut state = start;
    let steps = 2000;
    for _ in 0..steps {
        state = bloch::step(&state, &quiet, &quiet, &params, dt).map_err(e)?;
    }
    let t = steps as f64 * dt;
    let exact = CoherenceState::new(
        start.rho31 * (-params.gamma31 / 2.0 * t).exp(),
        start.rho41 * (Complex64::new(-params.gamma41 / 2.0, params.delta) * t).exp(),
        start.rho21 * (-params.gamma21 / 2.0 * t).exp(),
    );
    let dev = (state - exact).max_norm();
    Ok((dev <= 1e-9, format!("free decay error {dev:.1e} (≤1e-9)")))
}

fn criterion_10() -> Outcome {
    let parts = [linearity()?, passivity()?, grid_halving()?, damping()?];
    let pass = parts.iter().all(|p| p.0);
    Ok((pass, parts.map(|p| p.1).join("; ")))
}

fn criterion_11() -> Outcome {
    let c = consts();
    let (probe, driving) = fig2_pulses(0.35);
    let grid = PropagationGrid {
        n_z: 24,
        dt: 0.1,
        t_max: None,
    };
    let fixed = FixedParams {
        omega_c: FIG2.omega_c,
        delta: FIG2.delta,
        gamma31: FIG2.gamma31,
        gamma41: FIG2.gamma41,
        alpha: FIG2.alpha,
    };
    let model = TraceModel::new(
        fixed,
        PulseSet {
            probe,
            coupling: Coupling::Constant,
            driving,
        },
        grid,
        c,
    )
    .map_err(e)?;
    let truth = propagator::propagate(&probe, &Coupling::Constant, &driving, &FIG2, &grid).map_err(e)?;
    let clean = Trace::from_result(&truth, &c, 100);
    let bounds = FitBounds {
        omega_d: (0.1, 0.8),
        gamma21: (1e-4, 1e-2),
    };
    let options = FitOptions::default();
    let noiseless = fit(&clean, &model, &bounds, &options).map_err(e)?;
    let err_d = (noiseless.omega_d_hat / 0.35 - 1.0).abs();
    let err_g = (noiseless.gamma21_hat / 9e-4 - 1.0).abs();

    let noise = Normal::new(0.0, 0.02).map_err(e)?;
    let mut worst_d: f64 = 0.0;
    let mut worst_g: f64 = 0.0;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(1100 + seed);
        let mut noisy = clean.clone();
        for p in noisy.probe_power.iter_mut().chain(noisy.signal_power.iter_mut()) {
            *p = (*p + noise.sample(&mut rng)).max(0.0);
        }
        let r = fit(&noisy, &model, &bounds, &options).map_err(e)?;
        worst_d = worst_d.max((r.omega_d_hat / 0.35 - 1.0).abs());
        worst_g = worst_g.max((r.gamma21_hat / 9e-4 - 1.0).abs());
    }
    let pass = err_d <= 0.01 && err_g <= 0.05 && worst_d <= 0.02;
    Ok((
        pass,
        format!(
            "noiseless Ωd err {:.2e} (≤1%), γ21 err {:.2e} (≤5%); 2% noise, 20 seeds: max Ωd err {:.2}% (≤2%), max γ21 err {:.1}% (info)",
            err_d,
            err_g,
            100.0 * worst_d,
            100.0 * worst_g
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("closed-form oracle", criterion_1),
        ("resonant optimum", criterion_2),
        ("PDE vs analytic plateau", criterion_3),
        ("Fig. 2 point", criterion_4),
        ("Fig. 3(b) point", criterion_5),
        ("Fig. 4 optimum", criterion_6),
        ("Fig. 5 regime", criterion_7),
        ("Harris-Hau chain", criterion_8),
        ("unit conversions", criterion_9),
        ("property suite", criterion_10),
        ("fit round trip", criterion_11),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let id = format!("criterion {}", k + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.ends_with(&format!(" {f}"))) {
            continue;
        }
        let started = Instant::now();
        let (status, detail) = match f() {
            Ok((true, d)) => ("PASS", d),
            Ok((false, d)) => ("FAIL", d),
            Err(err) => ("FAIL", format!("error: {err}")),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("{id} [{name}]: {status} - {detail} ({:.1} s)", started.elapsed().as_secs_f64());
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
