//! Scenario files shipped inside the binary.

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use semistatic::scenario::{load_scenario, Scenario};

pub const BUNDLED: &[(&str, &str)] = &[
    ("binomial", include_str!("../../../scenarios/binomial.json")),
    ("trinomial", include_str!("../../../scenarios/trinomial.json")),
    ("trinomial_calibrated", include_str!("../../../scenarios/trinomial_calibrated.json")),
    ("glued_two_vol", include_str!("../../../scenarios/glued_two_vol.json")),
    ("jump_counterexample", include_str!("../../../scenarios/jump_counterexample.json")),
    ("informed_arbitrage", include_str!("../../../scenarios/informed_arbitrage.json")),
    ("initial_enlargement", include_str!("../../../scenarios/initial_enlargement.json")),
];

/// A readable file wins over a bundled name; `scenarios/trinomial.json` also
/// resolves to the bundled copy when run outside the repository.
pub fn resolve(arg: &str) -> Result<Scenario> {
    let path = Path::new(arg);
    let text = if path.is_file() {
        std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))?
    } else {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
        BUNDLED
            .iter()
            .find(|(n, _)| *n == stem)
            .map(|(_, t)| t.to_string())
            .ok_or_else(|| {
                let names: Vec<&str> = BUNDLED.iter().map(|b| b.0).collect();
                anyhow!("no file or bundled scenario `{arg}` (bundled: {})", names.join(", "))
            })?
    };
    load_scenario(&text).with_context(|| format!("scenario {arg}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_scenario_loads() {
        for (name, _) in BUNDLED {
            let s = resolve(name).unwrap();
            assert_eq!(&s.name, name);
        }
    }
}
