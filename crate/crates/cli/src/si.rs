//! Numbers with optional SI prefixes: `3.83G`, `1.7u`, `20n`, `-10`, `inf`.

pub fn parse_si(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let bad = || format!("'{text}' is not a number (SI prefixes f p n u m k M G T allowed)");
    let value = match t.parse::<f64>() {
        Ok(v) => v,
        Err(_) => {
            let c = t.chars().last().ok_or_else(bad)?;
            let exp = prefix_exponent(c).ok_or_else(bad)?;
            let body = &t[..t.len() - c.len_utf8()];
            if body.is_empty() || body.ends_with(['e', 'E']) {
                return Err(bad());
            }
            if body.contains(['e', 'E']) {
                body.parse::<f64>().map_err(|_| bad())? * 10f64.powi(exp)
            } else {
                // Decimal exponent keeps "50u" identical to the literal 50e-6.
                format!("{body}e{exp}").parse::<f64>().map_err(|_| bad())?
            }
        }
    };
    if value.is_nan() {
        return Err(bad());
    }
    Ok(value)
}

fn prefix_exponent(c: char) -> Option<i32> {
    Some(match c {
        'f' => -15,
        'p' => -12,
        'n' => -9,
        'u' | 'µ' => -6,
        'm' => -3,
        'k' | 'K' => 3,
        'M' => 6,
        'G' => 9,
        'T' => 12,
        _ => return None,
    })
}

/// Comma-separated list of SI numbers; an empty string is an empty list.
pub fn parse_si_list(text: &str) -> Result<Vec<f64>, String> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(parse_si).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes() {
        assert_eq!(parse_si("3.83G").unwrap(), 3.83e9);
        assert_eq!(parse_si("1.7u").unwrap(), 1.7e-6);
        assert_eq!(parse_si("50u").unwrap(), 50e-6);
        assert_eq!(parse_si("6.8µ").unwrap(), 6.8e-6);
        assert_eq!(parse_si("20n").unwrap(), 20e-9);
        assert_eq!(parse_si("5m").unwrap(), 5e-3);
        assert_eq!(parse_si("5M").unwrap(), 5e6);
        assert_eq!(parse_si("-10").unwrap(), -10.0);
        assert_eq!(parse_si("1e-3").unwrap(), 1e-3);
        assert_eq!(parse_si("2.5e3k").unwrap(), 2.5e6);
        assert_eq!(parse_si("-inf").unwrap(), f64::NEG_INFINITY);
        assert!(parse_si("abc").is_err());
        assert!(parse_si("G").is_err());
        assert!(parse_si("").is_err());
        assert!(parse_si("nan").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_si_list("-10,-10").unwrap(), vec![-10.0, -10.0]);
        assert_eq!(parse_si_list("30k, 70k").unwrap(), vec![30e3, 70e3]);
        assert!(parse_si_list("").unwrap().is_empty());
        assert!(parse_si_list("1,,2").is_err());
    }
}
