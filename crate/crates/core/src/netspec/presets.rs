use super::{Component, Dimension, InteractionEntry, InteractionRange, NetworkSpec, RingNormalization, TransportTerm};
use crate::error::{Error, Result};

pub const PRESET_NAMES: &[&str] = &[
    "activator_inhibitor",
    "three_node",
    "pigment",
    "pigment_rescaled",
    "pigment_k1_zero",
    "proneural",
    "proneural_salt_pepper",
];

fn component(name: &str, d: f64) -> Component {
    Component {
        name: name.into(),
        transport: if d == 0.0 {
            TransportTerm::None
        } else {
            TransportTerm::Diffusion(d)
        },
    }
}

fn local(source: &str, target: &str, gain: f64) -> InteractionEntry {
    InteractionEntry {
        source: source.into(),
        target: target.into(),
        gain,
        range: InteractionRange::Local,
    }
}

fn ring(source: &str, target: &str, gain: f64, l: f64) -> InteractionEntry {
    InteractionEntry {
        source: source.into(),
        target: target.into(),
        gain,
        range: InteractionRange::Ring(l),
    }
}

/// Returns the named built-in network.
pub fn builtin_preset(name: &str) -> Result<NetworkSpec> {
    match name {
        "activator_inhibitor" => Ok(activator_inhibitor()),
        "three_node" => Ok(three_node()),
        "pigment" => Ok(pigment(&PIGMENT)),
        "pigment_rescaled" => Ok(pigment(&PIGMENT_RESCALED)),
        "pigment_k1_zero" => Ok(pigment(&PigmentParams {
            k1: 0.0,
            ..PIGMENT_RESCALED
        })),
        "proneural" => Ok(proneural(1.0)),
        "proneural_salt_pepper" => Ok(proneural(0.1)),
        other => Err(Error::UnknownPreset(other.into())),
    }
}

fn activator_inhibitor() -> NetworkSpec {
    let (c1, c2, c3, c4) = (1.0, 1.0, 4.0, 3.0);
    NetworkSpec {
        components: vec![component("u", 0.05), component("v", 3.0)],
        interactions: vec![
            local("u", "u", c1),
            local("v", "u", -c2),
            local("u", "v", c3),
            local("v", "v", -c4),
        ],
        dimension: Dimension::One,
        ring_normalization: RingNormalization::UnitMass,
        notes: "activator u with slow diffusion, inhibitor v with fast diffusion".into(),
    }
}

fn three_node() -> NetworkSpec {
    let d = 0.02;
    let (k2, k3, k4, k6, k7, k9) = (0.5, 1.0, 1.0, 1.0, 1.0, 1.0);
    NetworkSpec {
        components: vec![component("u", 0.0), component("v", d), component("w", d)],
        interactions: vec![
            local("v", "u", k2),
            local("u", "v", k3),
            local("v", "v", -k4),
            local("w", "v", -k6),
            local("u", "w", k7),
            local("w", "w", -k9),
        ],
        dimension: Dimension::One,
        ring_normalization: RingNormalization::UnitMass,
        notes: "immobile u; v and w diffuse at the same rate".into(),
    }
}

struct PigmentParams {
    l: f64,
    d: f64,
    k1: f64,
    k2: f64,
    k3: f64,
    k4: f64,
    k5: f64,
    k6: f64,
}

const PIGMENT: PigmentParams = PigmentParams {
    l: 3.0,
    d: 0.02,
    k1: 0.055 * 0.016,
    k2: 0.05,
    k3: 0.04,
    k4: 0.055 * 0.03,
    k5: 0.02,
    k6: 0.025,
};

const PIGMENT_RESCALED: PigmentParams = PigmentParams {
    l: 3.0,
    d: 0.2,
    k1: 5.5 * 0.016,
    k2: 5.0,
    k3: 4.0,
    k4: 5.5 * 0.03,
    k5: 3.0,
    k6: 3.0,
};

fn pigment(p: &PigmentParams) -> NetworkSpec {
    let mut interactions = Vec::new();
    if p.k1 != 0.0 {
        interactions.push(ring("u", "u", -p.k1, p.l));
    }
    interactions.extend([
        local("u", "u", -p.k5),
        local("v", "u", -p.k3),
        ring("v", "u", p.k4, p.l),
        local("u", "v", -p.k2),
        local("v", "v", -p.k6),
    ]);
    NetworkSpec {
        components: vec![component("u", p.d), component("v", p.d)],
        interactions,
        dimension: Dimension::Two,
        ring_normalization: RingNormalization::UnitWeight,
        notes: "two pigment cell types with contact-range couplings at distance l".into(),
    }
}

fn proneural(a_e: f64) -> NetworkSpec {
    let l = 1.0;
    let (d_e, k_e, k_n, d_c, k_d, a_d, e_a) = (1.0, 1.0, 2.0, 0.1, 1.5, 1.0, 10.0);
    let d_t = 0.5 / (2.0 * std::f64::consts::PI * l);
    NetworkSpec {
        components: vec![
            component("E", d_e),
            component("N", 0.0),
            component("D", 0.0),
            component("A_s", 0.0),
        ],
        interactions: vec![
            local("E", "E", -k_e),
            local("A_s", "E", a_e),
            local("N", "N", -k_n),
            ring("D", "N", d_t, l),
            local("D", "N", -d_c),
            local("D", "D", -k_d),
            local("A_s", "D", a_d),
            local("E", "A_s", e_a),
            local("N", "A_s", -e_a),
        ],
        dimension: Dimension::Two,
        ring_normalization: RingNormalization::UnitWeight,
        notes: "EGF, Notch, Delta and AS-C levels; Delta acts on Notch in neighbouring cells".into(),
    }
}
