//! Text config format for network specifications.
//!
//! The format is TOML with a fixed schema:
//!
//! ```toml
//! dimension = 1                      # 1 or 2
//! ring_normalization = "unit_mass"   # optional: "unit_mass" | "unit_weight"
//! notes = "free text"                # optional
//!
//! [component.u]
//! transport = { diffusion = 0.05 }
//!
//! [component.v]
//! transport = "none"                 # the default when omitted
//!
//! [[interaction]]
//! source = "u"
//! target = "v"
//! gain = 4.0
//! range = { ring = 3.0 }             # optional, "local" by default
//! ```
//!
//! Component order is the declaration order. Unknown keys are rejected.

use std::fmt;
use std::ops::Range;

use indexmap::IndexMap;
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::Deserialize;
use toml::Spanned;

use super::{
    validate, Component, Dimension, InteractionEntry, InteractionRange, NetworkSpec, RingNormalization,
    SampledTransform, TransportTerm,
};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    dimension: Option<Spanned<i64>>,
    ring_normalization: Option<Spanned<String>>,
    #[serde(default)]
    notes: String,
    #[serde(default)]
    component: IndexMap<String, RawComponent>,
    #[serde(default)]
    interaction: Vec<RawInteraction>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    transport: Option<Spanned<RawTransport>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInteraction {
    source: Spanned<String>,
    target: Spanned<String>,
    gain: Spanned<f64>,
    range: Option<Spanned<RawRange>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCustomKernel {
    s: Vec<f64>,
    value: Vec<f64>,
}

enum RawTransport {
    None,
    Diffusion(f64),
    Custom(RawCustomKernel),
}

enum RawRange {
    Local,
    Ring(f64),
}

impl<'de> Deserialize<'de> for RawTransport {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RawTransport;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"none\", { diffusion = <float> } or { custom_kernel = { s = [...], value = [...] } }")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<RawTransport, E> {
                match v {
                    "none" => Ok(RawTransport::None),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<RawTransport, A::Error> {
                let key: String = map
                    .next_key()?
                    .ok_or_else(|| de::Error::custom("empty transport table"))?;
                let out = match key.as_str() {
                    "diffusion" => RawTransport::Diffusion(map.next_value()?),
                    "custom_kernel" => RawTransport::Custom(map.next_value()?),
                    other => return Err(de::Error::unknown_field(other, &["diffusion", "custom_kernel"])),
                };
                if let Some(extra) = map.next_key::<String>()? {
                    return Err(de::Error::custom(format!("unexpected second transport key `{extra}`")));
                }
                Ok(out)
            }
        }
        deserializer.deserialize_any(V)
    }
}

impl<'de> Deserialize<'de> for RawRange {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RawRange;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"local\" or { ring = <float> }")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<RawRange, E> {
                match v {
                    "local" => Ok(RawRange::Local),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<RawRange, A::Error> {
                let key: String = map.next_key()?.ok_or_else(|| de::Error::custom("empty range table"))?;
                if key != "ring" {
                    return Err(de::Error::unknown_field(&key, &["ring"]));
                }
                let l: f64 = map.next_value()?;
                if let Some(extra) = map.next_key::<String>()? {
                    return Err(de::Error::custom(format!("unexpected second range key `{extra}`")));
                }
                Ok(RawRange::Ring(l))
            }
        }
        deserializer.deserialize_any(V)
    }
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(offset, |p| offset - p - 1) + 1;
    (line, column)
}

fn located(text: &str, span: &Range<usize>, message: impl Into<String>) -> Error {
    let (line, column) = line_col(text, span.start);
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Parses and validates a network config document.
pub fn parse_network(text: &str) -> Result<NetworkSpec> {
    let raw: RawDoc = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        Error::Syntax {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })?;

    let dimension = match &raw.dimension {
        None => Dimension::One,
        Some(d) => usize::try_from(*d.get_ref())
            .ok()
            .and_then(Dimension::from_usize)
            .ok_or_else(|| located(text, &d.span(), "dimension must be 1 or 2"))?,
    };
    let ring_normalization = match &raw.ring_normalization {
        None => RingNormalization::UnitMass,
        Some(r) => match r.get_ref().as_str() {
            "unit_mass" => RingNormalization::UnitMass,
            "unit_weight" => RingNormalization::UnitWeight,
            other => {
                return Err(located(
                    text,
                    &r.span(),
                    format!("unknown ring normalization `{other}` (expected unit_mass or unit_weight)"),
                ))
            }
        },
    };

    // Spans for each validation location, so semantic errors can point into
    // the document.
    let mut spans: Vec<(String, Range<usize>)> = Vec::new();

    let mut components = Vec::with_capacity(raw.component.len());
    for (name, c) in raw.component {
        let transport = match c.transport {
            None => TransportTerm::None,
            Some(t) => {
                spans.push((format!("component.{name}"), t.span()));
                match t.into_inner() {
                    RawTransport::None => TransportTerm::None,
                    RawTransport::Diffusion(d) => TransportTerm::Diffusion(d),
                    RawTransport::Custom(k) => TransportTerm::CustomKernel(SampledTransform {
                        wavenumbers: k.s,
                        values: k.value,
                    }),
                }
            }
        };
        components.push(Component { name, transport });
    }

    let mut interactions = Vec::with_capacity(raw.interaction.len());
    for (k, i) in raw.interaction.into_iter().enumerate() {
        let loc = format!("interaction[{k}]");
        // Prefer pointing at the offending field.
        let known = |n: &str| components.iter().any(|c: &Component| c.name == n);
        let span = if !known(i.source.get_ref()) {
            i.source.span()
        } else if !known(i.target.get_ref()) {
            i.target.span()
        } else if let Some(r) = &i.range {
            r.span()
        } else {
            i.gain.span()
        };
        spans.push((loc, span));
        interactions.push(InteractionEntry {
            source: i.source.into_inner(),
            target: i.target.into_inner(),
            gain: i.gain.into_inner(),
            range: match i.range.map(Spanned::into_inner) {
                None | Some(RawRange::Local) => InteractionRange::Local,
                Some(RawRange::Ring(l)) => InteractionRange::Ring(l),
            },
        });
    }

    let spec = NetworkSpec {
        components,
        interactions,
        dimension,
        ring_normalization,
        notes: raw.notes,
    };

    let mut report = validate(&spec);
    if !report.is_ok() {
        for (loc, _) in report.errors.iter_mut() {
            let prefix = loc.split('.').take(2).collect::<Vec<_>>().join(".");
            if let Some((_, span)) = spans.iter().find(|(l, _)| *l == *loc || *l == prefix) {
                let (line, column) = line_col(text, span.start);
                *loc = format!("{loc} (line {line}, column {column})");
            }
        }
        return Err(Error::InvalidSpec(report));
    }
    Ok(spec)
}

fn quote(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn key(name: &str) -> String {
    let bare = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if bare {
        name.to_string()
    } else {
        quote(name)
    }
}

fn float(v: f64) -> String {
    // Debug formatting is the shortest representation that round-trips and
    // always carries a '.' or exponent, so TOML reads it back as a float.
    let s = format!("{v:?}");
    match s.as_str() {
        "NaN" => "nan".into(),
        "inf" => "inf".into(),
        "-inf" => "-inf".into(),
        _ => s,
    }
}

fn float_list(vs: &[f64]) -> String {
    let items: Vec<String> = vs.iter().map(|v| float(*v)).collect();
    format!("[{}]", items.join(", "))
}

/// Serializes `spec` to the config format. Parsing the output yields a spec
/// equal to `spec`.
pub fn to_config_string(spec: &NetworkSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("dimension = {}\n", spec.dimension.as_usize()));
    out.push_str(&format!(
        "ring_normalization = {}\n",
        quote(spec.ring_normalization.as_str())
    ));
    if !spec.notes.is_empty() {
        out.push_str(&format!("notes = {}\n", quote(&spec.notes)));
    }
    for c in &spec.components {
        out.push_str(&format!("\n[component.{}]\n", key(&c.name)));
        let t = match &c.transport {
            TransportTerm::None => "\"none\"".to_string(),
            TransportTerm::Diffusion(d) => format!("{{ diffusion = {} }}", float(*d)),
            TransportTerm::CustomKernel(k) => format!(
                "{{ custom_kernel = {{ s = {}, value = {} }} }}",
                float_list(&k.wavenumbers),
                float_list(&k.values)
            ),
        };
        out.push_str(&format!("transport = {t}\n"));
    }
    for e in &spec.interactions {
        out.push_str("\n[[interaction]]\n");
        out.push_str(&format!("source = {}\n", quote(&e.source)));
        out.push_str(&format!("target = {}\n", quote(&e.target)));
        out.push_str(&format!("gain = {}\n", float(e.gain)));
        if let InteractionRange::Ring(l) = e.range {
            out.push_str(&format!("range = {{ ring = {} }}\n", float(l)));
        }
    }
    out
}
