//! Exercises the exported C symbols from Rust: round-trips against the
//! underlying library, error and null paths, message retrieval, and the
//! generated header.

use std::f64::consts::{PI, TAU};
use std::ffi::CStr;
use std::os::raw::c_char;
use std::ptr;

use bicav::params::PhysicalParams;
use bicav::sensing;
use bicav::spectrum::eigenvalues_closed_form;
use bicav::steadystate::solve_intensity;
use bicav_capi::*;

const GAMMA: f64 = TAU * 1.0e8;

fn reference(delta: f64, phi: f64, g_hz: f64) -> PhysicalParams {
    PhysicalParams {
        gamma: GAMMA,
        kappa1: 0.002 * GAMMA,
        kappa2: 0.002 * GAMMA,
        delta,
        phi,
        omega_m: TAU * 1.0e4,
        gamma_m: TAU * 1.0e4,
        g: TAU * g_hz,
        p_in: 8.06e-3,
        lambda_d: 1.55e-6,
    }
}

fn handle(p: &PhysicalParams) -> *mut BicavParams {
    let mut h = ptr::null_mut();
    let st = unsafe {
        bicav_params_new(
            p.gamma, p.kappa1, p.kappa2, p.delta, p.phi, p.omega_m, p.gamma_m, p.g, p.p_in,
            p.lambda_d, &mut h,
        )
    };
    assert_eq!(st, BicavStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error_string() -> String {
    let needed = unsafe { bicav_last_error(ptr::null_mut(), 0) };
    let mut buf = vec![0 as c_char; needed];
    unsafe { bicav_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf
        .iter()
        .take_while(|&&b| b != 0)
        .map(|&b| b as u8)
        .collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn version_matches_the_crate_metadata() {
    let v = unsafe { CStr::from_ptr(bicav_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn eigenvalues_round_trip_bit_for_bit() {
    let p = reference(0.3 * GAMMA, -0.01 * PI, 1.0);
    let h = handle(&p);
    let mut plus = BicavComplex { re: 0.0, im: 0.0 };
    let mut minus = BicavComplex { re: 0.0, im: 0.0 };
    let st = unsafe { bicav_eigenvalues(h, &mut plus, &mut minus) };
    assert_eq!(st, BicavStatus::Ok);
    let s = eigenvalues_closed_form(p.delta, p.kappa1, p.gamma, p.phi).unwrap();
    assert_eq!((plus.re, plus.im), (s.lambda_plus.re, s.lambda_plus.im));
    assert_eq!((minus.re, minus.im), (s.lambda_minus.re, s.lambda_minus.im));
    unsafe { bicav_params_free(h) };
}

#[test]
fn steady_states_round_trip_on_a_three_root_point() {
    let p = reference(0.0, -0.008 * PI, 3.0);
    let h = handle(&p);
    let mut betas = [0.0; 3];
    let mut stable = [false; 3];
    let mut count = 0usize;
    let st = unsafe { bicav_steady_states(h, betas.as_mut_ptr(), stable.as_mut_ptr(), &mut count) };
    assert_eq!(st, BicavStatus::Ok);
    let states = solve_intensity(&p).unwrap();
    assert_eq!(count, 3);
    assert_eq!(states.len(), 3);
    for i in 0..3 {
        assert_eq!(betas[i], states[i].beta);
        assert_eq!(stable[i], states[i].stable);
    }
    assert_eq!(stable, [true, false, true]);
    unsafe { bicav_params_free(h) };
}

#[test]
fn sensitivity_round_trip_reports_the_split_region() {
    // Inside the fold window of the larger coupling only.
    let p = reference(0.0, -0.01 * PI, 1.0);
    let h = handle(&p);
    let (g1, g2) = (TAU * 1.0, TAU * 3.0);
    let mut eta = 0.0;
    let mut region = BicavRegion::None;
    let st = unsafe { bicav_sensitivity(h, g1, g2, &mut eta, &mut region) };
    assert_eq!(st, BicavStatus::Ok);
    let s = sensing::sensitivity(&p, g1, g2).unwrap();
    assert_eq!(eta, s.eta);
    assert_eq!(region, BicavRegion::II);
    unsafe { bicav_params_free(h) };
}

#[test]
fn settle_from_vacuum_lands_on_the_lowest_branch() {
    let p = reference(0.0, 0.0, 1.0);
    let h = handle(&p);
    let mut beta = 0.0;
    let st = unsafe { bicav_settle_from_vacuum(h, 0.0, 0.0, &mut beta) };
    assert_eq!(st, BicavStatus::Ok);
    let states = solve_intensity(&p).unwrap();
    assert!(
        (beta - states[0].beta).abs() <= 1e-4 * states[0].beta,
        "settled β = {beta:e} vs lowest branch {:e}",
        states[0].beta
    );
    unsafe { bicav_params_free(h) };
}

#[test]
fn invalid_rates_are_rejected_with_a_message() {
    let mut h = ptr::null_mut();
    let st = unsafe {
        bicav_params_new(
            -1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0e-3, 1.55e-6, &mut h,
        )
    };
    assert_eq!(st, BicavStatus::Domain);
    assert!(h.is_null());
    let msg = last_error_string();
    assert!(!msg.is_empty());
    // A successful call clears the thread's message.
    let p = reference(0.0, 0.0, 1.0);
    let h = handle(&p);
    assert_eq!(unsafe { bicav_last_error(ptr::null_mut(), 0) }, 1);
    unsafe { bicav_params_free(h) };
}

#[test]
fn unequal_decay_rates_make_eigenvalues_unsupported() {
    let p = PhysicalParams {
        kappa2: 0.004 * GAMMA,
        ..reference(0.0, 0.0, 1.0)
    };
    let h = handle(&p);
    let mut plus = BicavComplex { re: 0.0, im: 0.0 };
    let mut minus = plus;
    let st = unsafe { bicav_eigenvalues(h, &mut plus, &mut minus) };
    assert_eq!(st, BicavStatus::Unsupported);
    unsafe { bicav_params_free(h) };
}

#[test]
fn null_pointers_are_reported_not_dereferenced() {
    let mut plus = BicavComplex { re: 0.0, im: 0.0 };
    let mut minus = plus;
    let st = unsafe { bicav_eigenvalues(ptr::null(), &mut plus, &mut minus) };
    assert_eq!(st, BicavStatus::NullPointer);
    let st = unsafe {
        bicav_params_new(
            1.0,
            0.0,
            0.0,
            0.0,
            0.0,
            1.0,
            1.0,
            1.0,
            1.0e-3,
            1.55e-6,
            ptr::null_mut(),
        )
    };
    assert_eq!(st, BicavStatus::NullPointer);
    let p = reference(0.0, 0.0, 1.0);
    let h = handle(&p);
    let st = unsafe { bicav_eigenvalues(h, ptr::null_mut(), &mut minus) };
    assert_eq!(st, BicavStatus::NullPointer);
    unsafe { bicav_params_free(h) };
}

#[test]
fn long_messages_are_truncated_with_a_terminator() {
    let mut h = ptr::null_mut();
    unsafe {
        bicav_params_new(
            f64::NAN,
            1.0,
            1.0,
            0.0,
            0.0,
            1.0,
            1.0,
            1.0,
            1.0e-3,
            1.55e-6,
            &mut h,
        )
    };
    let needed = unsafe { bicav_last_error(ptr::null_mut(), 0) };
    assert!(needed > 8);
    let mut buf = [0x7f as c_char; 8];
    let ret = unsafe { bicav_last_error(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(ret, needed);
    assert_eq!(buf[7], 0);
    let full = last_error_string();
    let prefix: String = full.chars().take_while(|c| c.is_ascii()).take(7).collect();
    let got: String = buf[..7].iter().map(|&b| b as u8 as char).collect();
    assert!(full.starts_with(&prefix));
    assert_eq!(got, prefix);
}

#[test]
fn operating_point_update_matches_a_fresh_handle() {
    let p = reference(0.0, 0.0, 1.0);
    let h = handle(&p);
    let st = unsafe { bicav_params_set_operating_point(h, 0.1 * GAMMA, -0.02 * PI) };
    assert_eq!(st, BicavStatus::Ok);
    let mut plus = BicavComplex { re: 0.0, im: 0.0 };
    let mut minus = plus;
    assert_eq!(
        unsafe { bicav_eigenvalues(h, &mut plus, &mut minus) },
        BicavStatus::Ok
    );
    let s = eigenvalues_closed_form(0.1 * GAMMA, p.kappa1, p.gamma, -0.02 * PI).unwrap();
    assert_eq!(plus.re, s.lambda_plus.re);
    // A rejected update leaves the stored point untouched.
    let st = unsafe { bicav_params_set_operating_point(h, f64::NAN, 0.0) };
    assert_eq!(st, BicavStatus::Domain);
    let mut plus2 = BicavComplex { re: 0.0, im: 0.0 };
    let mut minus2 = plus2;
    assert_eq!(
        unsafe { bicav_eigenvalues(h, &mut plus2, &mut minus2) },
        BicavStatus::Ok
    );
    assert_eq!(plus2, plus);
    unsafe { bicav_params_free(h) };
}

#[test]
fn generated_header_declares_the_interface() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/bicav.h");
    let text = std::fs::read_to_string(header).expect("build script writes include/bicav.h");
    for needle in [
        "BICAV_H",
        "BicavStatus",
        "BicavRegion",
        "BicavComplex",
        "bicav_params_new",
        "bicav_params_free",
        "bicav_eigenvalues",
        "bicav_steady_states",
        "bicav_sensitivity",
        "bicav_settle_from_vacuum",
        "bicav_last_error",
        "bicav_version",
    ] {
        assert!(text.contains(needle), "header is missing {needle}");
    }
}
