//! Independent references: Mie series for circular cylinders and adaptive
//! quadrature of the boundary integrals.

mod adaptive;
mod mie;

pub use adaptive::{adaptive_integral, adaptive_panel_integral, PanelIntegrand};
pub use mie::{mie_fields, mie_rcs, MieSolution};
