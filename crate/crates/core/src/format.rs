/// Significant digits in every printed real.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// A real rounded to 12 significant digits, without trailing zeros.
///
/// Plain notation is used for magnitudes in `[1e-5, 1e12)`, scientific
/// otherwise; the output depends only on the value.
pub fn decimal(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..12).contains(&exp) {
        return format!("{}e{}", trim(mantissa), exp);
    }
    let places = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
    let rounded: f64 = sci.parse().expect("round trip");
    trim(&format!("{:.*}", places, rounded)).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
