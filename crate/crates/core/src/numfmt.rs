//! Stable float formatting for reports.

/// C-style `%.{sig}g` formatting.
pub fn format_g(x: f64, sig: usize) -> String {
    let sig = sig.max(1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to 12 significant digits so serialized output is bit-stable.
pub fn round12(x: f64) -> f64 {
    let r: f64 = format_g(x, 12).parse().expect("format_g output parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Exact rational `num/den` reduced, as text.
pub fn rational(num: u128, den: u128) -> String {
    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    if num == 0 {
        return "0".into();
    }
    let g = gcd(num, den);
    let (n, d) = (num / g, den / g);
    if d == 1 {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(format_g(0.5, 12), "0.5");
        assert_eq!(format_g(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_g(2.0f64.ln(), 12), "0.69314718056");
        assert_eq!(format_g(1e-7, 12), "1e-07");
        assert_eq!(format_g(123456789012345.0, 12), "1.23456789012e+14");
        assert_eq!(format_g(-0.25, 12), "-0.25");
        assert_eq!(format_g(100.0, 12), "100");
    }

    #[test]
    fn rationals_reduce() {
        assert_eq!(rational(252, 1024), "63/256");
        assert_eq!(rational(4, 4), "1");
        assert_eq!(rational(0, 7), "0");
    }
}
