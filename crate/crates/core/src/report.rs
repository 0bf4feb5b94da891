//! Number formatting shared by every CSV writer, so that output is stable
//! byte-for-byte across runs and platforms.

/// Fixed-point with at least two and at most six decimals: `0.25`,
/// `1.75`, `0.60`, `2.00`.
pub fn fixed(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let mut s = format!("{x:.6}");
    let dot = s.find('.').expect("fixed format has a point");
    while s.len() > dot + 3 && s.ends_with('0') {
        s.pop();
    }
    if s.starts_with("-0.") && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s.remove(0);
    }
    s
}

/// Shortest round-trip scientific notation, for probabilities that span
/// many decades.
pub fn scientific(x: f64) -> String {
    format!("{x:e}")
}
