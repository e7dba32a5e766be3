//! Unit-suffixed quantities from the command line. Everything past this
//! module is SI.

use dimer::physics::DEBYE;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// C·m
    Dipole,
    /// m
    Length,
    /// s
    Time,
    /// s⁻¹
    Rate,
    /// V/m
    Field,
}

impl Quantity {
    fn suffixes(self) -> &'static [(&'static str, f64)] {
        // Longest first, so `ms` is tried before `s` and `nm` before `m`.
        match self {
            Quantity::Dipole => &[("C·m", 1.0), ("C*m", 1.0), ("Cm", 1.0), ("D", DEBYE)],
            Quantity::Length => {
                &[("nm", 1e-9), ("pm", 1e-12), ("um", 1e-6), ("μm", 1e-6), ("µm", 1e-6), ("mm", 1e-3), ("m", 1.0)]
            }
            Quantity::Time => &[
                ("fs", 1e-15),
                ("ps", 1e-12),
                ("ns", 1e-9),
                ("us", 1e-6),
                ("μs", 1e-6),
                ("µs", 1e-6),
                ("ms", 1e-3),
                ("s", 1.0),
            ],
            Quantity::Rate => &[("rad/s", 1.0), ("s^-1", 1.0), ("s-1", 1.0), ("1/s", 1.0), ("/s", 1.0)],
            Quantity::Field => &[("MV/m", 1e6), ("kV/m", 1e3), ("V/cm", 1e2), ("V/m", 1.0)],
        }
    }

    fn unit(self) -> &'static str {
        match self {
            Quantity::Dipole => "D or C·m",
            Quantity::Length => "nm, pm, um, mm or m",
            Quantity::Time => "fs, ps, ns, us, ms or s",
            Quantity::Rate => "s^-1",
            Quantity::Field => "V/m, kV/m, MV/m or V/cm",
        }
    }
}

/// Parses `1.46D`, `10nm`, `0.01 ns`, `4e9`, ... into SI. A bare number is
/// taken as already SI.
pub fn parse(text: &str, q: Quantity) -> Result<f64, CliError> {
    let s = text.trim();
    let bad = || CliError::Usage(format!("cannot parse `{text}` as a quantity in {}", q.unit()));
    let mut candidates = q.suffixes().iter().filter(|(suffix, _)| s.ends_with(suffix));
    let value = match candidates.next() {
        Some((suffix, factor)) => {
            let number = s[..s.len() - suffix.len()].trim_end();
            number.parse::<f64>().map_err(|_| bad())? * factor
        }
        None => s.parse::<f64>().map_err(|_| bad())?,
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}
