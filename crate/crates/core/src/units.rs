//! Serde helpers for physical quantities.
//!
//! Each field accepts either a bare number (SI) or a string with a unit
//! suffix, e.g. `"1.075 mm"`, `"24 nrad"`, `"400 uW"`. Values are always
//! serialized back as plain SI numbers.

use serde::de::{self, Deserializer, Visitor};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Angle,
    Time,
    Power,
    Frequency,
    Voltage,
    /// V·√s, the electronic-noise density.
    NoiseDensity,
}

impl Dimension {
    /// Decimal exponent of the unit.
    fn exponent(self, suffix: &str) -> Option<i32> {
        use Dimension::*;
        let s = match (self, suffix) {
            (_, "") => 0,
            (Length, "m") => 0,
            (Length, "cm") => -2,
            (Length, "mm") => -3,
            (Length, "um" | "μm" | "µm") => -6,
            (Length, "nm") => -9,
            (Length, "pm") => -12,
            (Angle, "rad") => 0,
            (Angle, "mrad") => -3,
            (Angle, "urad" | "μrad" | "µrad") => -6,
            (Angle, "nrad") => -9,
            (Time, "s") => 0,
            (Time, "ms") => -3,
            (Time, "us" | "μs" | "µs") => -6,
            (Time, "ns") => -9,
            (Power, "W") => 0,
            (Power, "mW") => -3,
            (Power, "uW" | "μW" | "µW") => -6,
            (Power, "nW") => -9,
            (Frequency, "Hz") => 0,
            (Frequency, "kHz") => 3,
            (Voltage, "V") => 0,
            (Voltage, "mV") => -3,
            (Voltage, "uV" | "μV" | "µV") => -6,
            (NoiseDensity, "V*sqrt(s)" | "V√s") => 0,
            _ => return None,
        };
        Some(s)
    }
}

/// Parses `"<number> <suffix>"` (space optional) into SI.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let text = text.trim();
    let split = text
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || c == '+'
                || c == '-'
                || ((c == 'e' || c == 'E')
                    && i > 0
                    && text[i + 1..].starts_with(|n: char| n.is_ascii_digit() || n == '-' || n == '+')))
        })
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    let (num, suffix) = text.split_at(split);
    let bad = || format!("`{text}` is not a number with an optional unit");
    let num = num.trim();
    num.parse::<f64>().map_err(|_| bad())?;
    let exp = dim
        .exponent(suffix.trim())
        .ok_or_else(|| format!("unknown {dim:?} unit `{}` in `{text}`", suffix.trim()))?;
    // Shift the decimal exponent in text so the result is correctly rounded.
    let (mantissa, own) = match num.find(['e', 'E']) {
        Some(i) => (&num[..i], num[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (num, 0),
    };
    format!("{mantissa}e{}", own + exp).parse().map_err(|_| bad())
}

struct QuantityVisitor(Dimension);

impl Visitor<'_> for QuantityVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a number or a string with a {:?} unit", self.0)
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        parse_quantity(v, self.0).map_err(E::custom)
    }
}

fn quantity<'de, D: Deserializer<'de>>(d: D, dim: Dimension) -> Result<f64, D::Error> {
    d.deserialize_any(QuantityVisitor(dim))
}

macro_rules! unit_module {
    ($name:ident, $dim:expr) => {
        pub mod $name {
            use serde::{Deserialize, Deserializer, Serializer};

            pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_f64(*v)
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
                super::quantity(d, $dim)
            }

            pub mod option {
                use super::*;

                pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
                    match v {
                        Some(x) => s.serialize_some(x),
                        None => s.serialize_none(),
                    }
                }

                pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
                    #[derive(Deserialize)]
                    struct Wrap(#[serde(deserialize_with = "super::deserialize")] f64);
                    Option::<Wrap>::deserialize(d).map(|o| o.map(|w| w.0))
                }
            }

            pub mod vec {
                use super::*;
                use serde::ser::SerializeSeq;

                pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
                    let mut seq = s.serialize_seq(Some(v.len()))?;
                    for x in v {
                        seq.serialize_element(x)?;
                    }
                    seq.end()
                }

                pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
                    #[derive(Deserialize)]
                    struct Wrap(#[serde(deserialize_with = "super::deserialize")] f64);
                    Vec::<Wrap>::deserialize(d).map(|v| v.into_iter().map(|w| w.0).collect())
                }
            }
        }
    };
}

unit_module!(length, super::Dimension::Length);
unit_module!(angle, super::Dimension::Angle);
unit_module!(time, super::Dimension::Time);
unit_module!(power, super::Dimension::Power);
unit_module!(frequency, super::Dimension::Frequency);
unit_module!(voltage, super::Dimension::Voltage);
unit_module!(noise_density, super::Dimension::NoiseDensity);
