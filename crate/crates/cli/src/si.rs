//! Numbers with SI suffixes: `253.2n`, `2p`, `22.05k`, `1M`.

fn exponent(suffix: char) -> Option<&'static str> {
    Some(match suffix {
        'f' => "e-15",
        'p' => "e-12",
        'n' => "e-9",
        'u' | 'µ' | 'μ' => "e-6",
        'm' => "e-3",
        'k' => "e3",
        'M' => "e6",
        'G' => "e9",
        _ => return None,
    })
}

/// Parses a finite number with an optional SI suffix. The suffix is applied
/// as a decimal exponent, so `253.2n` is exactly the double nearest 253.2e-9.
pub fn parse(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let err = || format!("`{text}` is not a number (SI suffixes f p n u µ m k M G are accepted)");
    let last = t.chars().last().ok_or_else(err)?;
    let literal = match exponent(last) {
        Some(exp) => {
            let mantissa = &t[..t.len() - last.len_utf8()];
            if mantissa.is_empty() || mantissa.contains(['e', 'E']) {
                return Err(err());
            }
            format!("{mantissa}{exp}")
        }
        None => t.to_owned(),
    };
    if literal.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E') {
        return Err(err());
    }
    let v: f64 = literal.parse().map_err(|_| err())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(err())
    }
}

/// Like [`parse`], but rejects values that are not strictly positive.
pub fn parse_positive(text: &str) -> Result<f64, String> {
    let v = parse(text)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("`{text}` must be positive"))
    }
}
