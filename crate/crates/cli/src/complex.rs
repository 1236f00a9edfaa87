//! Complex literals: `a`, `bi`, `a+bi`, `a-bi`, with optional leading sign
//! and plain decimal reals (no exponents, no spaces).

use std::sync::OnceLock;

use regex::Regex;
use tomobell_core::Complex;

const REAL: &str = r"(?:\d+\.?\d*|\.\d+)";

fn pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let re = format!(
            r"^(?:(?P<re>[+-]?{REAL})(?P<im>[+-]{REAL})i|(?P<only_im>[+-]?{REAL})i|(?P<only_re>[+-]?{REAL}))$"
        );
        Regex::new(&re).expect("valid complex literal pattern")
    })
}

pub fn parse_complex(s: &str) -> Result<Complex, String> {
    let caps = pattern()
        .captures(s)
        .ok_or_else(|| format!("malformed complex literal '{s}' (expected a, bi, a+bi or a-bi)"))?;
    let num = |name: &str| -> f64 {
        caps.name(name).map_or(0.0, |m| m.as_str().parse().expect("regex admits only decimals"))
    };
    Ok(match (caps.name("re"), caps.name("only_im")) {
        (Some(_), _) => Complex::new(num("re"), num("im")),
        (None, Some(_)) => Complex::new(0.0, num("only_im")),
        (None, None) => Complex::new(num("only_re"), 0.0),
    })
}

/// `a+bi` with the shortest round-trip representation of each part.
pub fn format_complex(z: Complex) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{sign}{}i", z.re, z.im.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_the_grammar() {
        let c = Complex::new;
        for (s, want) in [
            ("1", c(1.0, 0.0)),
            ("-0.5", c(-0.5, 0.0)),
            ("+2.", c(2.0, 0.0)),
            (".25i", c(0.0, 0.25)),
            ("-0.12i", c(0.0, -0.12)),
            ("1+2i", c(1.0, 2.0)),
            ("-1.5-0.25i", c(-1.5, -0.25)),
            ("0+0i", c(0.0, 0.0)),
        ] {
            assert_eq!(parse_complex(s), Ok(want), "{s}");
        }
    }

    #[test]
    fn rejects_malformed_literals() {
        for s in ["", "1+i2", "i", "1+i", "1 + 2i", "1e3", "2i+1", "1+2j", "--1", "1.2.3", "nan"] {
            assert!(parse_complex(s).is_err(), "{s}");
        }
    }

    #[test]
    fn format_round_trips() {
        for z in [Complex::new(0.1, -0.3), Complex::new(-2.0, 0.0), Complex::new(1e-7, 5.5)] {
            let s = format_complex(z);
            assert_eq!(parse_complex(&s), Ok(z), "{s}");
        }
    }
}
