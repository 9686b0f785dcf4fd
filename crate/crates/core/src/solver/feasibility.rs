use serde::{Deserialize, Serialize};

use crate::domain::{fixed_point_set, DomainAction, PlanarDomain};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::symgroup::{find_invariant_rotation_plane, ElementRef, PlaneRotationCertificate, PlaneSearch, SpaceAction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointVerdict {
    pub point: C64,
    pub order: usize,
    pub generator: ElementRef,
    pub search: PlaneSearch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub fixed_points: Vec<FixedPointVerdict>,
    pub feasible: bool,
}

impl FeasibilityReport {
    pub fn certificates(&self) -> Vec<&PlaneRotationCertificate> {
        self.fixed_points.iter().filter_map(|v| v.search.certificate()).collect()
    }

    /// One line per infeasible fixed point.
    pub fn evidence(&self) -> Vec<String> {
        self.fixed_points
            .iter()
            .filter_map(|v| match &v.search {
                PlaneSearch::Infeasible(e) => Some(format!("fixed point {}: {}", v.point, e.describe())),
                PlaneSearch::Certificate(_) => None,
            })
            .collect()
    }
}

/// Stabiliser condition at every fixed point: the stabiliser generator must
/// rotate some 2-plane by the same angle it rotates the domain.
pub fn feasibility_check(domain: &PlanarDomain, dact: &DomainAction, sact: &SpaceAction) -> Result<FeasibilityReport> {
    if !dact.group().same_shape(sact.group()) {
        return Err(Error::InvalidInput("domain and space actions use different groups".into()));
    }
    let mut fixed_points = Vec::new();
    for rec in fixed_point_set(domain, dact) {
        let search = find_invariant_rotation_plane(sact, &rec.generator, rec.order)?;
        fixed_points.push(FixedPointVerdict { point: rec.point, order: rec.order, generator: rec.generator, search });
    }
    let feasible = fixed_points.iter().all(|v| v.search.is_feasible());
    Ok(FeasibilityReport { fixed_points, feasible })
}
