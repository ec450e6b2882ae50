//! Browser bindings for the tripod model. Each export returns a JSON string;
//! the plain `*_json` functions behind them run natively for tests.

use serde_json::{json, Value};
use tripod::dressed::{eigensystem, interaction_hamiltonian};
use tripod::gate::{absorption_scan, fig2_range};
use tripod::susceptibility::{linear_cores, lineshape_cores};
use tripod::{complex_detunings, AtomParams, FieldParams, Transcription, C64};
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 20_000;

fn grid(from: f64, to: f64, count: usize) -> Result<Vec<f64>, String> {
    if !(from.is_finite() && to.is_finite()) {
        return Err("range ends must be finite".into());
    }
    if count == 0 || count > MAX_POINTS {
        return Err(format!("point count must be in 1..={MAX_POINTS}"));
    }
    if count == 1 {
        return Ok(vec![from]);
    }
    Ok((0..count).map(|k| from + (to - from) * k as f64 / (count - 1) as f64).collect())
}

fn form(corrected: bool) -> Transcription {
    if corrected {
        Transcription::Corrected
    } else {
        Transcription::Printed
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Normalized probe absorption against ground-state dephasing γ_d ∈ [0, 0.1γ]
/// at δ_j = 0 and Ω_P = Ω_T = γ.
pub fn fig2_json(points: usize, omega_pump: f64) -> Result<String, String> {
    if points == 0 || points > MAX_POINTS {
        return Err(format!("point count must be in 1..={MAX_POINTS}"));
    }
    let fields = FieldParams::new(1.0, 1.0, omega_pump);
    fields.validate().map_err(|e| e.to_string())?;
    let rows = absorption_scan(&fig2_range(points), &AtomParams::resonant(0.0), &fields).map_err(|e| e.to_string())?;
    let (g, a): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    Ok(json!({ "gamma_d": g, "absorption": a }).to_string())
}

/// Probe and trigger lineshape cores against δ₁. Points where a core is
/// singular come back as null.
#[allow(clippy::too_many_arguments)]
pub fn susceptibility_json(
    delta2: f64,
    delta3: f64,
    gamma_d: f64,
    omega_pump: f64,
    from: f64,
    to: f64,
    count: usize,
    corrected: bool,
) -> Result<String, String> {
    let xs = grid(from, to, count)?;
    AtomParams::new(from, delta2, delta3, gamma_d).validate().map_err(|e| e.to_string())?;
    let mut cols: [Vec<Value>; 8] = Default::default();
    for &d1 in &xs {
        let atom = AtomParams::new(d1, delta2, delta3, gamma_d);
        let nan = C64::new(f64::NAN, f64::NAN);
        let (lp, lt) = linear_cores(&complex_detunings(&atom), omega_pump, form(corrected)).unwrap_or((nan, nan));
        let (cp, ct) = lineshape_cores(&atom, omega_pump, form(corrected)).map_or((nan, nan), |c| (c.cub_p, c.cub_t));
        let vals = [lp.re, lp.im, lt.re, lt.im, cp.re, cp.im, ct.re, ct.im];
        for (col, v) in cols.iter_mut().zip(vals) {
            col.push(finite_or_null(v));
        }
    }
    let [a, b, c, d, e, f, g, h] = cols;
    Ok(json!({
        "delta1": xs,
        "chi1_p": { "re": a, "im": b },
        "chi1_t": { "re": c, "im": d },
        "chi3_p": { "re": e, "im": f },
        "chi3_t": { "re": g, "im": h },
    })
    .to_string())
}

/// Dressed-state energies (ascending) against pump Rabi frequency, with the
/// ground-state weight of each state.
#[allow(clippy::too_many_arguments)]
pub fn dressed_json(
    omega_p: f64,
    omega_t: f64,
    delta1: f64,
    delta2: f64,
    delta3: f64,
    from: f64,
    to: f64,
    count: usize,
) -> Result<String, String> {
    let xs = grid(from, to, count)?;
    let atom = AtomParams::new(delta1, delta2, delta3, 0.0);
    atom.validate().map_err(|e| e.to_string())?;
    let mut energies = Vec::with_capacity(xs.len());
    let mut excited = Vec::with_capacity(xs.len());
    for &o in &xs {
        let fields = FieldParams::new(omega_p, omega_t, o);
        fields.validate().map_err(|e| e.to_string())?;
        let states = eigensystem(&interaction_hamiltonian(&fields, &atom)).map_err(|e| e.to_string())?;
        energies.push(states.iter().map(|s| s.energy).collect::<Vec<_>>());
        excited.push(states.iter().map(|s| s.amplitudes[0].norm_sqr()).collect::<Vec<_>>());
    }
    Ok(json!({ "omega_pump": xs, "energies": energies, "excited_weight": excited }).to_string())
}

#[wasm_bindgen]
pub fn fig2(points: usize, omega_pump: f64) -> Result<String, JsError> {
    fig2_json(points, omega_pump).map_err(|e| JsError::new(&e))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn susceptibility(
    delta2: f64,
    delta3: f64,
    gamma_d: f64,
    omega_pump: f64,
    from: f64,
    to: f64,
    count: usize,
    corrected: bool,
) -> Result<String, JsError> {
    susceptibility_json(delta2, delta3, gamma_d, omega_pump, from, to, count, corrected).map_err(|e| JsError::new(&e))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn dressed(
    omega_p: f64,
    omega_t: f64,
    delta1: f64,
    delta2: f64,
    delta3: f64,
    from: f64,
    to: f64,
    count: usize,
) -> Result<String, JsError> {
    dressed_json(omega_p, omega_t, delta1, delta2, delta3, from, to, count).map_err(|e| JsError::new(&e))
}
