//! Named constraint families of the deployment model.
//!
//! Model rows are named `<tag>[<indices>]` so that a violation reported by
//! [`crate::ilp::check`] maps back to its family, and plan validation reports
//! the same tags.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    SumOfGamma,
    GammaWithinSegment,
    MaxSensors,
    FfdManagesGamma,
    SensorCount,
    GatewayIsFfd,
    NoSelfParent,
    ParentIsAncestor,
    ParentOneWay,
    ParentCount,
    SelfAncestor,
    AncestorsAreFfds,
    AncestorOneWay,
    GatewaySelf,
    GatewayInstalled,
    GatewayOneWay,
    GatewayIsAncestor,
    GatewayCount,
    AncestorsUp,
    GatewayInherited,
    /// Ancestors of a parent are ancestors of the child.
    AncestorsDown,
    /// A gateway has no ancestor but itself.
    RootAncestors,
    HopCount,
    HopMax,
    TrafficLoad,
    PacketRate,
    Objective,
}

impl Family {
    pub const ALL: [Family; 27] = [
        Family::SumOfGamma,
        Family::GammaWithinSegment,
        Family::MaxSensors,
        Family::FfdManagesGamma,
        Family::SensorCount,
        Family::GatewayIsFfd,
        Family::NoSelfParent,
        Family::ParentIsAncestor,
        Family::ParentOneWay,
        Family::ParentCount,
        Family::SelfAncestor,
        Family::AncestorsAreFfds,
        Family::AncestorOneWay,
        Family::GatewaySelf,
        Family::GatewayInstalled,
        Family::GatewayOneWay,
        Family::GatewayIsAncestor,
        Family::GatewayCount,
        Family::AncestorsUp,
        Family::GatewayInherited,
        Family::AncestorsDown,
        Family::RootAncestors,
        Family::HopCount,
        Family::HopMax,
        Family::TrafficLoad,
        Family::PacketRate,
        Family::Objective,
    ];

    /// Short identifier used in row names and reports.
    pub fn tag(self) -> &'static str {
        match self {
            Family::SumOfGamma => "sumofgamma",
            Family::GammaWithinSegment => "gamma-dij",
            Family::MaxSensors => "maxsensor-ffd",
            Family::FfdManagesGamma => "xi-gammaij-dmax",
            Family::SensorCount => "kij",
            Family::GatewayIsFfd => "gwFromFFD",
            Family::NoSelfParent => "parent-node-bii",
            Family::ParentIsAncestor => "parent-node-bij",
            Family::ParentOneWay => "sum-bij",
            Family::ParentCount => "parent-node-bij-sum",
            Family::SelfAncestor => "ancestor-node-aii",
            Family::AncestorsAreFfds => "ancestor-node-aij-xi-xj",
            Family::AncestorOneWay => "ancestor-node-aij",
            Family::GatewaySelf => "gateway-node-gii",
            Family::GatewayInstalled => "gateway-node-gij-yj",
            Family::GatewayOneWay => "gateway-node-gij",
            Family::GatewayIsAncestor => "gateway-node-gij-aij",
            Family::GatewayCount => "gateway-node-gij-sum",
            Family::AncestorsUp => "multihop-bna",
            Family::GatewayInherited => "multihop-ang",
            Family::AncestorsDown => "ancestor-closure",
            Family::RootAncestors => "root-ancestors",
            Family::HopCount => "hop_count",
            Family::HopMax => "hop_max",
            Family::TrafficLoad => "trafficload",
            Family::PacketRate => "packet-rate",
            Family::Objective => "objective",
        }
    }

    /// Whether the family is one of the published model equations, as
    /// opposed to a consistency check added by this crate.
    pub fn is_model_equation(self) -> bool {
        !matches!(
            self,
            Family::AncestorsDown | Family::RootAncestors | Family::PacketRate | Family::Objective
        )
    }

    /// Report label: `eq:<tag>` for model equations, the bare tag otherwise.
    pub fn label(self) -> String {
        if self.is_model_equation() {
            format!("eq:{}", self.tag())
        } else {
            self.tag().to_string()
        }
    }

    /// Family of a row named `<tag>[...]`.
    pub fn of_row(name: &str) -> Option<Family> {
        let tag = name.split('[').next()?;
        Family::ALL.into_iter().find(|f| f.tag() == tag)
    }

    pub fn row(self, idx: &[usize]) -> String {
        let parts: Vec<String> = idx.iter().map(usize::to_string).collect();
        format!("{}[{}]", self.tag(), parts.join(","))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(Family::of_row(&f.row(&[3, 4])), Some(f));
        }
        assert_eq!(Family::ParentOneWay.label(), "eq:sum-bij");
        assert_eq!(Family::AncestorsDown.label(), "ancestor-closure");
    }
}
