//! CSV writers for traces, FLC surfaces and sweep summaries.

use std::io::{self, Write};

use hesm_core::sim::{flags, Trace};

pub const TRACE_HEADER: [&str; 11] = [
    "t_s", "v_bus_V", "i_L_A", "i_batt_A", "i_uc_A", "zeta_A", "soc", "v_uc_V", "i_limit_A", "ctrl_state", "flags",
];

pub const SURFACE_HEADER: [&str; 3] = ["v_bus_V", "i_hesm_A", "i_limit_A"];

/// Shortest decimal form of `v` rounded to 9 significant digits. Plain
/// notation for exponents -5..=8, scientific otherwise, trailing zeros
/// dropped, negative zero written as `0`.
pub fn sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-5..=8).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn csv_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

pub fn write_trace<W: Write>(out: W, trace: &Trace) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER).map_err(csv_io)?;
    let mut flag_buf = String::new();
    for s in &trace.samples {
        flag_buf.clear();
        for (k, label) in flags::labels(s.flags).enumerate() {
            if k > 0 {
                flag_buf.push('|');
            }
            flag_buf.push_str(label);
        }
        let nums = [s.t, s.v_bus, s.i_l, s.i_batt, s.i_uc, s.zeta, s.soc, s.v_uc, s.i_limit].map(sig9);
        w.write_record(nums.iter().map(String::as_str).chain([s.ctrl_state.as_str(), flag_buf.as_str()]))
            .map_err(csv_io)?;
    }
    w.flush()
}

pub fn write_surface<W: Write>(out: W, rows: &[[f64; 3]]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SURFACE_HEADER).map_err(csv_io)?;
    for r in rows {
        w.write_record(r.map(sig9)).map_err(csv_io)?;
    }
    w.flush()
}

/// Writes a header then string rows.
pub fn write_rows<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_io)?;
    for r in rows {
        w.write_record(r).map_err(csv_io)?;
    }
    w.flush()
}
