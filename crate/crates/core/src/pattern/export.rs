use std::io::Write;

use super::PointPattern;
use crate::error::Result;

/// CSV with columns `n1[,n2],x[,y[,z]]`. Floats use the shortest decimal
/// that round-trips to the same `f64`.
pub fn write_pattern_csv<W: Write>(pattern: &PointPattern, mut out: W) -> Result<()> {
    let d = pattern.dim_label();
    let s = pattern.dim_space();
    let mut header: Vec<&str> = ["n1", "n2"][..d].to_vec();
    header.extend_from_slice(&["x", "y", "z"][..s]);
    writeln!(out, "{}", header.join(","))?;
    for (n, p) in pattern.iter() {
        let mut row: Vec<String> = n[..d].iter().map(|v| v.to_string()).collect();
        row.extend(p[..s].iter().map(|v| format!("{v:?}")));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{generate, Frequency, PatternSpec, Window};

    #[test]
    fn csv_roundtrips_floats() {
        let spec = PatternSpec::example_i(Frequency::from_f64(0.3819).unwrap(), 0.4).with_omega(&[0.1]);
        let pat = generate(&spec, Window::line(-3, 3)).unwrap();
        let mut buf = Vec::new();
        write_pattern_csv(&pat, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("n1,x"));
        for ((_, p), line) in pat.iter().zip(lines) {
            let x: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(x.to_bits(), p[0].to_bits());
        }
    }

    #[test]
    fn two_dimensional_header() {
        let a = Frequency::ratio(1, 3).unwrap();
        let spec = PatternSpec::example_iv(a, a, 0.1, 0.2, 0.2);
        let pat = generate(&spec, Window::rect((0, 1), (0, 1))).unwrap();
        let mut buf = Vec::new();
        write_pattern_csv(&pat, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("n1,n2,x,y,z\n"));
    }
}
