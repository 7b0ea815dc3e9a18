pub mod cluster;
pub mod extract;
pub mod fit;
pub mod predict;
pub mod report;
pub mod simulate;
pub mod synth;

use clap::ValueEnum;
use driftlane::trajectory::LaneOrientation;
use driftlane::Convention;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Density,
    Mass,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Density => Convention::Density,
            ConventionArg::Mass => Convention::Mass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrientationArg {
    /// Higher lane numbers lie to the right.
    IncreasingRight,
    /// Higher lane numbers lie to the left.
    IncreasingLeft,
}

impl From<OrientationArg> for LaneOrientation {
    fn from(o: OrientationArg) -> Self {
        match o {
            OrientationArg::IncreasingRight => LaneOrientation::IncreasingRight,
            OrientationArg::IncreasingLeft => LaneOrientation::IncreasingLeft,
        }
    }
}
