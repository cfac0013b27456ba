use std::f64::consts::PI;

use nvsim_core::dressed_analytics::{phonon_rabi, total_splitting, PolaronParams};
use nvsim_core::experiments::presets::{self, Preset};
use nvsim_core::experiments::{
    dressed_map, extract_peaks, fit_drive_params, linspace, locate_peak, rabi_flopping, rabi_period, FitBounds,
    FitOptions, OpticalPulse,
};
use nvsim_core::floquet::sideband_heights;
use nvsim_core::lindblad::{dt_max, ple_point, ple_spectrum, PleSetup};
use nvsim_core::{DriveParams, OpticalParams, PulseSequence, StaticStrain};

fn setup(p: &Preset, sequence: PulseSequence) -> PleSetup {
    PleSetup::spin0(p.strain, p.drive, p.optics).with_sequence(sequence)
}

fn quick() -> PulseSequence {
    PulseSequence { ring_up: 1.0, collect: 30.0, dt: None }
}

#[test]
fn undriven_nv1_lines_and_width() {
    let p = presets::nv1();
    let s = PleSetup::spin0(p.strain, DriveParams::undriven(p.drive.omega_m), p.optics)
        .with_sequence(PulseSequence::short());
    let det = linspace(-7.0, 7.0, 141);
    let pl = ple_spectrum(&det, &s, 0).unwrap();
    let peaks = extract_peaks(&det, &pl, 0.05).unwrap();
    assert_eq!(peaks.len(), 2, "{peaks:?}");
    assert!((peaks[0].position + 5.3).abs() < 0.05);
    assert!((peaks[1].position - 5.3).abs() < 0.05);

    let top = locate_peak(|d| ple_point(d, &s), 5.0, 5.6, 1e-6).unwrap();
    let half = |side: f64| {
        let (mut a, mut b) = (top.position, top.position + side);
        for _ in 0..40 {
            let m = 0.5 * (a + b);
            if ple_point(m, &s).unwrap() > 0.5 * top.height {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let fwhm = half(1.0) - half(-1.0);
    let want = p.optics.gamma * (1.0 + p.optics.s0()).sqrt();
    assert!((fwhm - want).abs() < 0.05 * want, "{fwhm} vs {want}");
}

#[test]
fn dark_laser_gives_zero_spectrum() {
    let p = presets::nv1();
    let optics = OpticalParams { omega: 0.0, ..p.optics };
    let s = PleSetup::spin0(p.strain, p.drive, optics).with_sequence(quick());
    let pl = ple_spectrum(&linspace(-6.0, 6.0, 7), &s, 0).unwrap();
    assert!(pl.iter().all(|&v| v == 0.0));
}

#[test]
fn halving_step_is_converged() {
    let p = presets::nv1();
    let mut s = setup(&p, quick());
    for d in [5.3, 5.3 + p.drive.omega_m, -2.0] {
        let bound = s.step(d);
        s.sequence.dt = Some(bound);
        let a = ple_point(d, &s).unwrap();
        s.sequence.dt = Some(0.5 * bound);
        let b = ple_point(d, &s).unwrap();
        assert!((a - b).abs() < 1e-5 * b.abs(), "Δ={d}: {a} vs {b}");
    }
}

/// Flipping Δ and V_E1 together is undone by negating the generator and
/// shifting the drive by half a period.
#[test]
fn detuning_strain_reflection() {
    let p = presets::nv1();
    let s = setup(&p, quick());
    let mirrored = PleSetup {
        strain: StaticStrain { v_e1: -p.strain.v_e1, ..p.strain },
        drive: DriveParams { phase: PI, ..p.drive },
        ..s.clone()
    };
    for d in [-6.1, -0.7, 2.3, 5.3] {
        let a = ple_point(d, &s).unwrap();
        let b = ple_point(-d, &mirrored).unwrap();
        assert!((a - b).abs() < 1e-6 * a.abs().max(1e-3), "Δ={d}: {a} vs {b}");
    }
}

#[test]
fn zero_scaling_row_is_undriven() {
    let p = presets::nv3();
    let s = setup(&p, quick());
    let det = linspace(-3.0, 3.0, 9);
    let map = dressed_map(&det, &[0.0, 1.0], &s, 0).unwrap();
    let bare = PleSetup { drive: DriveParams::undriven(p.drive.omega_m), ..s };
    assert_eq!(map.pl[0], ple_spectrum(&det, &bare, 0).unwrap());
    assert_ne!(map.pl[1], map.pl[0]);
}

#[test]
fn strong_a1_drive_reaches_ninth_order() {
    let w = sideband_heights(13.0, presets::OMEGA_NV14, 22.0, 14).unwrap();
    let top = w.saturated_heights.iter().cloned().fold(0.0, f64::max);
    for n in [-9, 9] {
        assert!(w.height(n).unwrap() >= 0.1 * top);
    }
    // J_n² stays above 1e−3 one order past the modulation index 9.39.
    let reach = (0..=14).filter(|&n| w.weights[14 + n] > 1e-3).max().unwrap();
    assert!(reach >= 9, "{reach}");
}

#[test]
fn nv2_two_phonon_term_dominates_at_its_peak() {
    let nv2 = presets::nv2();
    let base = PolaronParams::from_strain(&nv2.strain, &nv2.drive).unwrap();
    let (e1, _) = (1..=600)
        .map(|k| {
            let e = k as f64 * 0.005;
            (e, phonon_rabi(1, &base.with_e1(e)).unwrap().abs())
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let b = total_splitting(&base.with_e1(e1), 8).unwrap();
    let s2 = b.contribution(2).unwrap();
    assert!((b.total - s2.sqrt()).abs() < 0.1 * s2.sqrt(), "E1={e1}: {} vs {}", b.total, s2.sqrt());
}

#[test]
fn nv5_low_orders_carry_the_splitting() {
    let nv5 = presets::nv5();
    let base = PolaronParams::from_strain(&nv5.strain, &nv5.drive).unwrap();
    // Beyond ℰ1 ≈ 1.9 GHz the weakly detuned 7-phonon order takes over at
    // this mixing angle.
    for k in 1..19 {
        let e1 = k as f64 * 0.1;
        let b = total_splitting(&base.with_e1(e1), 8).unwrap();
        assert!(b.low_order_fraction(3) > 0.8, "E1={e1}: {}", b.low_order_fraction(3));
    }
}

#[test]
fn undriven_rabi_keeps_orbitals_apart() {
    let r = presets::nv2_rabi();
    let p = PolaronParams::from_strain(&r.strain, &DriveParams::undriven(r.drive.omega_m)).unwrap();
    let pulse = OpticalPulse { omega: r.optics.omega, duration: None };
    let trace = rabi_flopping(&p, &r.optics, &pulse, 10.0, 500).unwrap();
    // Off-resonant excitation of the lower eigenstate during the pulse.
    let theta = p.theta.0;
    let g = 0.5 * r.optics.omega * (theta.cos() - theta.sin()).abs();
    let detuning = 2.0 * p.delta_x;
    let leak = 4.0 * g * g / (4.0 * g * g + detuning * detuning);
    let after: Vec<f64> = trace
        .p_y
        .iter()
        .zip(&trace.times)
        .filter(|(_, &t)| t >= trace.pulse_end)
        .map(|(y, _)| *y)
        .collect();
    assert!(after.iter().all(|&y| y < leak + 1e-3), "{leak}");
    // Only radiative decay afterwards.
    assert!(after.windows(2).all(|w| w[1] <= w[0] + 1e-9));
}

#[test]
fn strong_resonant_drive_flops_within_nanoseconds() {
    let r = presets::nv2_rabi();
    let p = PolaronParams::from_strain(&r.strain, &DriveParams { amp_e1: 2.0, ..r.drive }).unwrap();
    let pulse = OpticalPulse { omega: r.optics.omega, duration: None };
    let trace = rabi_flopping(&p, &r.optics, &pulse, 30.0, 3000).unwrap();
    let period = rabi_period(&trace).unwrap();
    assert!(period <= 2.0, "{period}");
}

#[test]
fn drive_ratio_round_trip() {
    for p in [presets::nv1(), presets::nv2(), presets::nv3()] {
        let truth = p.drive;
        let s = setup(&p, PulseSequence { ring_up: 1.0, collect: 20.0, dt: None });
        let reach = p.strain.delta_x() + truth.amp_a1.abs() + 1.0;
        let det = linspace(-reach, reach, (2.0 * reach / 0.12).ceil() as usize + 1);
        let target = dressed_map(&det, &[0.6, 1.0], &s, 0).unwrap();
        let start = (0.85 * truth.amp_a1, 0.85 * truth.amp_e1);
        let fit = fit_drive_params(&target, &s, start, &FitBounds::default(), &FitOptions::default()).unwrap();
        let ratio = fit.amp_e1 / fit.amp_a1;
        assert!((ratio + 0.4).abs() < 0.05, "{}: ratio {ratio} from {fit:?}", p.name);
    }
}

#[test]
fn step_bound_tracks_fastest_rate() {
    let p = presets::nv1();
    let s = setup(&p, quick());
    let bound = dt_max(s.model, &s.strain, &s.drive, &s.optics, &s.levels);
    assert_eq!(bound, 1.0 / (50.0 * 13.0));
    assert_eq!(s.step(0.0), 0.5 * bound);
}
