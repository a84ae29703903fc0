//! Human-readable number formatting: six significant digits.

use num_complex::Complex64;

/// `x` with six significant digits, `%g` style.
pub fn sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&exp) {
        return sig_sci(x);
    }
    let decimals = (5 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new digit (999999.5 -> 1000000).
    if s.trim_start_matches('-').split('.').next().map_or(0, str::len) > 6 {
        return sig_sci(x);
    }
    trim_zeros(&s).to_owned()
}

fn sig_sci(x: f64) -> String {
    let s = format!("{x:.5e}");
    let (mantissa, e) = s.split_once('e').expect("exponent present");
    format!("{}e{e}", trim_zeros(mantissa))
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn sig_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), sig)
}

pub fn sig_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        sig(z.re)
    } else if z.re == 0.0 {
        format!("{}i", sig(z.im))
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{}{sign}{}i", sig(z.re), sig(z.im.abs()))
    }
}

/// Left-aligned `label  value` rows.
pub fn table(rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig((2.0f64 / 3.0).sqrt()), "0.816497");
        assert_eq!(sig(2.0 / 3.0), "0.666667");
        assert_eq!(sig(0.5), "0.5");
        assert_eq!(sig(2f64.sqrt()), "1.41421");
        assert_eq!(sig(123456.7), "123457");
        assert_eq!(sig(999999.7), "1e6");
        assert_eq!(sig(1.5e-7), "1.5e-7");
        assert_eq!(sig(-0.25), "-0.25");
        assert_eq!(sig(0.0), "0");
    }

    #[test]
    fn complex_values() {
        assert_eq!(sig_complex(Complex64::new(0.5, -0.5)), "0.5-0.5i");
        assert_eq!(sig_complex(Complex64::new(0.0, 2.0)), "2i");
        assert_eq!(sig_complex(Complex64::new(3.0, 0.0)), "3");
    }
}
