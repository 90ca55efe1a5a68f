//! Parameter sets of the published figures.
//!
//! `fig2`: coherent n̄ = 1, `fig3`: coherent n̄ = 10, `fig4`: thermal n̄ = 1,
//! `fig5`: thermal n̄ = 10. Panels: `a` Δ = 0, χ = 0; `b` Δ = 0, χ = 0.9;
//! `c` Δ = 0.3, χ = 0; `d` Δ = 0.3, χ = 0.9. Always λ = 1, γ = 0.1.
//!
//! The figure captions give Δ = 0.3 while the surrounding text mentions 0.03;
//! the `-prose` variants of panels `c` and `d` use 0.03 and are not part of the
//! blessed set.

use crate::config::{ConfigLayer, FieldChoice, StarkSpec};

pub const PROSE_DETUNING: f64 = 0.03;

fn figure(fig: u8) -> Option<(FieldChoice, f64)> {
    match fig {
        2 => Some((FieldChoice::Coherent, 1.0)),
        3 => Some((FieldChoice::Coherent, 10.0)),
        4 => Some((FieldChoice::Thermal, 1.0)),
        5 => Some((FieldChoice::Thermal, 10.0)),
        _ => None,
    }
}

fn panel(p: char) -> Option<(f64, f64)> {
    match p {
        'a' => Some((0.0, 0.0)),
        'b' => Some((0.0, 0.9)),
        'c' => Some((0.3, 0.0)),
        'd' => Some((0.3, 0.9)),
        _ => None,
    }
}

/// The 16 blessed presets, `fig2a` .. `fig5d`.
pub fn names() -> Vec<String> {
    (2..=5)
        .flat_map(|f| ['a', 'b', 'c', 'd'].map(move |p| format!("fig{f}{p}")))
        .collect()
}

/// Prose-detuning variants, `fig2c-prose` .. `fig5d-prose`.
pub fn prose_names() -> Vec<String> {
    (2..=5)
        .flat_map(|f| ['c', 'd'].map(move |p| format!("fig{f}{p}-prose")))
        .collect()
}

pub fn layer(name: &str) -> Option<ConfigLayer> {
    let (base, prose) = match name.strip_suffix("-prose") {
        Some(b) => (b, true),
        None => (name, false),
    };
    let rest = base.strip_prefix("fig")?;
    let mut chars = rest.chars();
    let fig = chars.next()?.to_digit(10)? as u8;
    let p = chars.next()?;
    if chars.next().is_some() {
        return None;
    }
    let (field, nbar) = figure(fig)?;
    let (mut delta, chi) = panel(p)?;
    if prose {
        if delta == 0.0 {
            return None;
        }
        delta = PROSE_DETUNING;
    }
    Some(ConfigLayer {
        field: Some(field),
        nbar: Some(nbar),
        delta: Some(delta),
        stark: Some(StarkSpec::Chi(chi)),
        lambda: Some(1.0),
        gamma: Some(0.1),
        ..ConfigLayer::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_resolve() {
        assert_eq!(names().len(), 16);
        for name in names().iter().chain(&prose_names()) {
            let cfg = layer(name).unwrap().resolve().unwrap();
            assert_eq!(cfg.params.lambda_c, 1.0);
            assert_eq!(cfg.params.gamma, 0.1);
        }
        let d = layer("fig5d").unwrap().resolve().unwrap();
        assert_eq!((d.field, d.dist.nbar(), d.chi), (FieldChoice::Thermal, 10.0, 0.9));
        assert!((d.params.delta - 0.3).abs() < 1e-15);
        let prose = layer("fig3d-prose").unwrap().resolve().unwrap();
        assert!((prose.params.delta - PROSE_DETUNING).abs() < 1e-15);
        for bad in ["fig1a", "fig2e", "fig2a-prose", "fig2", "fig2ab", "foo"] {
            assert!(layer(bad).is_none(), "{bad}");
        }
    }
}
