//! Plain CSV output. Numbers use Rust's shortest round-trip formatting, so
//! parsing a field gives back the exact `f64`.

use std::fmt::Write as _;

use metaepi::stability::{ScanPoint, Verdict};
use metaepi::State;

pub const TRAJECTORY_HEADER: &str = "t,S1,I1,S2,I2";

pub fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn trajectory_row(t: f64, x: &State) -> String {
    format!("{},{},{},{},{}", num(t), num(x.s1), num(x.i1), num(x.s2), num(x.i2))
}

pub fn scan_header(parameter: &str) -> String {
    format!("{parameter},S1,I1,S2,I2,a1,a0,k,h,max_re,verdict,gap")
}

/// Gap rows keep the parameter value, leave the numeric fields empty and set `gap = 1`.
pub fn scan_row(p: &ScanPoint, verdict: Option<Verdict>) -> String {
    let mut row = num(p.value);
    let comps = p.equilibrium.map(|x| x.to_array().map(Some)).unwrap_or([None; 4]);
    for v in comps.into_iter().chain([p.a1, p.a0, p.k, p.h, p.max_real_part]) {
        let _ = write!(row, ",{}", opt(v));
    }
    let verdict = verdict.map(|v| format!("{v:?}")).unwrap_or_default();
    let _ = write!(row, ",{verdict},{}", u8::from(p.gap.is_some()));
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 1.5, 0.1, 1.0 / 3.0, 1e-300, 6.02e23, -2.5e-9] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(1.5), "1.5");
    }

    #[test]
    fn gap_row_layout() {
        let p = ScanPoint {
            value: 2.0,
            equilibrium: None,
            a1: None,
            a0: None,
            k: None,
            h: None,
            max_real_part: None,
            max_complex_real_part: None,
            gap: Some("lost".into()),
        };
        assert_eq!(scan_row(&p, None), "2.0,,,,,,,,,,,1");
        assert_eq!(
            scan_header("B").split(',').count(),
            scan_row(&p, None).split(',').count()
        );
    }
}
