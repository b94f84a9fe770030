//! Text form of arm specifications.
//!
//! An arm is a `;`-separated list of elements in traversal order:
//!
//! ```text
//! crystal(ANGLE, DELAY)   birefringent crystal; DELAY in µm, or with a
//!                         `lambda` suffix in wavelengths at 780 nm
//! hwp(ANGLE)              half-wave plate
//! phase(ANGLE)            global phase e^{iθ}·I
//! unitary(r00, i00, r01, i01, r10, i10, r11, i11)
//! ```
//!
//! An empty string or `identity` is the empty arm. Angles are radians unless
//! suffixed with `deg`; an explicit `rad` suffix is also accepted.

use mzi_core::linalg::ComplexMatrix;
use mzi_core::optics::{wavelengths_to_um, ArmElement, ArmSpec, CrystalSpec};
use num_complex::Complex64;

/// Parses `22.5deg`, `0.3927rad` or a bare number (radians).
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let (number, scale) = if let Some(n) = t.strip_suffix("deg") {
        (n, std::f64::consts::PI / 180.0)
    } else if let Some(n) = t.strip_suffix("rad") {
        (n, 1.0)
    } else {
        (t, 1.0)
    };
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse angle '{text}' (use e.g. 0.39, 0.39rad or 22.5deg)"))?;
    let radians = value * scale;
    if !radians.is_finite() {
        return Err(format!("angle '{text}' is not finite"));
    }
    Ok(radians)
}

fn parse_delay(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let (number, in_lambda) = if let Some(n) = t.strip_suffix("lambda") {
        (n, true)
    } else if let Some(n) = t.strip_suffix("um") {
        (n, false)
    } else {
        (t, false)
    };
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse delay '{text}'"))?;
    Ok(if in_lambda { wavelengths_to_um(value) } else { value })
}

fn parse_element(text: &str) -> Result<ArmElement, String> {
    let t = text.trim();
    let open = t.find('(').ok_or_else(|| format!("element '{t}' is missing '('"))?;
    let inner = t[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| format!("element '{t}' is missing ')'"))?;
    let args: Vec<&str> = inner.split(',').map(str::trim).collect();
    let name = t[..open].trim().to_ascii_lowercase();
    let expect = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("{name} takes {n} argument(s), got {}", args.len()))
        }
    };
    let element = match name.as_str() {
        "crystal" => {
            expect(2)?;
            let spec = CrystalSpec::new(parse_angle(args[0])?, parse_delay(args[1])?).map_err(|e| e.to_string())?;
            ArmElement::Crystal(spec)
        }
        "hwp" => {
            expect(1)?;
            ArmElement::waveplate(parse_angle(args[0])?)
        }
        "phase" => {
            expect(1)?;
            ArmElement::phase(parse_angle(args[0])?)
        }
        "unitary" => {
            expect(8)?;
            let parts = args
                .iter()
                .map(|a| a.parse::<f64>().map_err(|_| format!("cannot parse matrix entry '{a}'")))
                .collect::<Result<Vec<_>, _>>()?;
            let entries = parts.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
            ArmElement::RawUnitary(ComplexMatrix::new(2, 2, entries).map_err(|e| e.to_string())?)
        }
        other => return Err(format!("unknown arm element '{other}'")),
    };
    element.validate().map_err(|e| e.to_string())?;
    Ok(element)
}

pub fn parse_elements(text: &str) -> Result<Vec<ArmElement>, String> {
    let t = text.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("identity") {
        return Ok(Vec::new());
    }
    t.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_element)
        .collect()
}

pub fn parse_arm(text: &str) -> Result<ArmSpec, String> {
    parse_elements(text).map(ArmSpec::new)
}
