//! Random operator families: a disorder law, an interaction and a finite volume.

use serde::{Deserialize, Serialize};

use crate::disorder::{sample_potential, DisorderSpec, InteractionSpec, PotentialSample};
use crate::error::Result;
use crate::geometry::{Segment, SubSquare};
use crate::operators::{build_h1, build_h2, build_h2_ni, HamiltonianMatrix, Statistics};

/// Finite volume on which an operator is restricted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Volume {
    /// Single-particle operator on a segment.
    Segment { window: Segment },
    /// Interacting two-particle operator on a half-plane window.
    Square { square: SubSquare },
    /// Non-interacting two-particle operator on `a × b`.
    Product { a: Segment, b: Segment },
}

impl Volume {
    /// Segment carrying every potential value the operator depends on.
    pub fn potential_window(&self) -> Segment {
        match self {
            Volume::Segment { window } => *window,
            Volume::Square { square } => square.potential_hull(),
            Volume::Product { a, b } => a.hull(b),
        }
    }
}

impl From<Segment> for Volume {
    fn from(window: Segment) -> Self {
        Volume::Segment { window }
    }
}

impl From<SubSquare> for Volume {
    fn from(square: SubSquare) -> Self {
        Volume::Square { square }
    }
}

/// Everything needed to draw a random operator on any volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct System {
    pub disorder: DisorderSpec,
    pub interaction: InteractionSpec,
    pub statistics: Statistics,
}

impl System {
    pub fn new(disorder: DisorderSpec, interaction: InteractionSpec, statistics: Statistics) -> Self {
        Self { disorder, interaction, statistics }
    }

    /// Single-particle or non-interacting use: no interaction, fermionic.
    pub fn free_of_interaction(disorder: DisorderSpec) -> Self {
        Self::new(disorder, InteractionSpec::none(), Statistics::Fermionic)
    }

    pub fn validate(&self) -> Result<()> {
        self.disorder.validate()?;
        self.interaction.validate()
    }

    pub fn sample(&self, volume: &Volume, replicate: u64) -> PotentialSample {
        sample_potential(&self.disorder, volume.potential_window(), replicate)
    }

    pub fn hamiltonian(&self, volume: &Volume, v: &PotentialSample) -> Result<HamiltonianMatrix> {
        let g = self.disorder.g;
        match volume {
            Volume::Segment { window } => build_h1(*window, v, g),
            Volume::Square { square } => build_h2(square, v, &self.interaction, g, self.statistics),
            Volume::Product { a, b } => build_h2_ni(*a, *b, v, g),
        }
    }

    /// Operator of replicate `replicate`.
    pub fn draw(&self, volume: &Volume, replicate: u64) -> Result<HamiltonianMatrix> {
        self.hamiltonian(volume, &self.sample(volume, replicate))
    }
}
