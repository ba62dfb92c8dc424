//! Built-in sweep recipes `fig2` to `fig5`.

pub const NAMES: [&str; 4] = ["fig2", "fig3", "fig4", "fig5"];

/// TOML text of a named recipe.
pub fn recipe(name: &str) -> Option<&'static str> {
    match name {
        "fig2" => Some(include_str!("../recipes/fig2.toml")),
        "fig3" => Some(include_str!("../recipes/fig3.toml")),
        "fig4" => Some(include_str!("../recipes/fig4.toml")),
        "fig5" => Some(include_str!("../recipes/fig5.toml")),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use ris_pnc::sim::{PhaseMode, SweepAxis};

    #[test]
    fn every_recipe_parses() {
        for name in NAMES {
            let cfg = parse_config(recipe(name).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.name, name);
        }
        assert!(recipe("fig6").is_none());
    }

    #[test]
    fn recipe_shapes() {
        let fig3 = parse_config(recipe("fig3").unwrap()).unwrap();
        assert_eq!(fig3.series.len(), 5);
        let ls: Vec<usize> = fig3.series.iter().map(|s| s.scenario.ris_elements).collect();
        assert_eq!(ls, vec![1, 4, 16, 64, 256]);
        assert!(fig3.series.iter().all(|s| s.scenario.modulation == 16));
        assert_eq!(fig3.sweep_axis, SweepAxis::PMaxDbm);

        let fig4 = parse_config(recipe("fig4").unwrap()).unwrap();
        assert!(fig4
            .series
            .iter()
            .all(|s| s.scenario.phase_mode == PhaseMode::Random && s.scenario.ris_elements == 16));

        let fig5 = parse_config(recipe("fig5").unwrap()).unwrap();
        assert_eq!(fig5.series.len(), 4);
        assert_eq!(fig5.sweep_axis, SweepAxis::CeeDb);
        let cal = fig5.calibrate.unwrap();
        assert_eq!((cal.target_ber, cal.at), (1e-4, -110.0));
    }
}
