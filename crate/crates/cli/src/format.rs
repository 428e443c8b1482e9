//! Number formatting for CSV cells.

/// Formats `x` with 17 significant digits, which round-trips every finite
/// `f64`. Plain decimal notation is used for exponents in `-5..17`,
/// scientific notation otherwise.
pub fn sig17(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        return sci;
    }
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else {
        let point = point as usize;
        format!("{}.{}", &digits[..point], &digits[point..])
    };
    let body = body.trim_end_matches('0').trim_end_matches('.');
    format!("{sign}{body}")
}

/// Display rounding used when matching a published spreadsheet table: round
/// to 15 significant digits first, then to two decimals.
pub fn display_2dp(x: f64) -> String {
    let fifteen: f64 = format!("{x:.14e}").parse().expect("valid float");
    format!("{fifteen:.2}")
}

/// Short label for a parameter value in headers and file names.
pub fn label(x: f64) -> String {
    format!("{x}")
}

/// Compact label for principals in file names (`1e3`, `2.5e6`).
pub fn file_label(x: f64) -> String {
    format!("{x:e}")
}
