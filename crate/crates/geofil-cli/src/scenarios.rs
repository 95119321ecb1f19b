//! Named start conditions for the catalog entries, so commands can be run
//! without spelling out a full config.

use geofil::catalog::CatalogEntry;

use crate::config::StateSpec;
use crate::Failure;

/// A named initial condition with its time span.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub state: StateSpec,
    pub tspan: [f64; 2],
}

/// Scenarios defined for an entry. Every entry has `reference`; the wave
/// entry adds `impulse-crossing`, which starts ahead of the front and
/// crosses it mid-run.
pub fn available(entry: &CatalogEntry) -> Vec<Scenario> {
    let z0 = entry.reference_state();
    let (t0, t1) = entry.reference_tspan();
    let mut all = vec![Scenario {
        name: "reference",
        state: StateSpec { x: z0.x, v: z0.v },
        tspan: [t0, t1],
    }];
    if entry.name() == "rosen" {
        all.push(Scenario {
            name: "impulse-crossing",
            state: StateSpec {
                x: vec![-0.5, 0.0, 0.0, 0.0],
                v: vec![1.0, 0.2, 0.4, 0.3],
            },
            tspan: [0.0, 1.2],
        });
    }
    all
}

/// Look up a scenario by name, listing the alternatives on failure.
pub fn resolve(entry: &CatalogEntry, name: &str) -> Result<Scenario, Failure> {
    let mut all = available(entry);
    match all.iter().position(|s| s.name == name) {
        Some(i) => Ok(all.swap_remove(i)),
        None => {
            let names: Vec<&str> = all.iter().map(|s| s.name).collect();
            Err(Failure::Validation(format!(
                "unknown scenario `{name}` for {}; available: {}",
                entry.name(),
                names.join(", ")
            )))
        }
    }
}
