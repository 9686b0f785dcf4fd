//! Seeded sample points on planar domains.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{DomainKind, PlanarDomain};
use crate::linalg::C64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bounding square half-width used for sampling an unbounded domain.
fn extent(domain: &PlanarDomain) -> f64 {
    let far = domain.punctures().iter().map(|p| p.norm()).fold(0.0, f64::max);
    (1.5 * far).max(2.0)
}

/// Axis-aligned box `(lower-left, upper-right)` covering the sampled region.
pub fn bounding_box(domain: &PlanarDomain) -> (C64, C64) {
    match domain.kind() {
        DomainKind::Plane | DomainKind::PuncturedPlane => {
            let e = extent(domain);
            (C64::new(-e, -e), C64::new(e, e))
        }
        DomainKind::Disk { radius: r } | DomainKind::Annulus { r_out: r, .. } => (C64::new(-r, -r), C64::new(r, r)),
        DomainKind::Strip { lo, hi } => {
            let e = extent(domain);
            (C64::new(-e, lo), C64::new(e, hi))
        }
    }
}

/// `n × n` lattice on the bounding box, keeping points at distance ≥ `margin`
/// from the boundary, the punctures and every point of `avoid`.
pub fn grid_points(domain: &PlanarDomain, n: usize, margin: f64, avoid: &[C64]) -> Vec<C64> {
    let (lo, hi) = bounding_box(domain);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            // cell centres, so the lattice never lands on the symmetry centre by accident
            let x = lo.re + (hi.re - lo.re) * (i as f64 + 0.5) / n as f64;
            let y = lo.im + (hi.im - lo.im) * (j as f64 + 0.5) / n as f64;
            let z = C64::new(x, y);
            if domain.boundary_distance(z) >= margin
                && domain.puncture_distance(z) >= margin
                && avoid.iter().all(|a| (a - z).norm() >= margin)
            {
                out.push(z);
            }
        }
    }
    out
}

/// `n` points of the domain, each at distance ≥ `margin` from punctures and the boundary.
pub fn sample_domain(domain: &PlanarDomain, n: usize, seed: u64, margin: f64) -> Vec<C64> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n && attempts < 1000 * n.max(1) {
        attempts += 1;
        let z = match domain.kind() {
            DomainKind::Plane | DomainKind::PuncturedPlane => {
                let e = extent(domain);
                C64::new(r.gen_range(-e..e), r.gen_range(-e..e))
            }
            DomainKind::Disk { radius } => {
                C64::from_polar(radius * r.gen_range(0.0f64..1.0).sqrt(), r.gen_range(0.0..std::f64::consts::TAU))
            }
            DomainKind::Annulus { r_in, r_out } => {
                C64::from_polar(r.gen_range(r_in..r_out), r.gen_range(0.0..std::f64::consts::TAU))
            }
            DomainKind::Strip { lo, hi } => {
                let e = extent(domain);
                C64::new(r.gen_range(-e..e), r.gen_range(lo..hi))
            }
        };
        if domain.boundary_distance(z) >= margin && domain.puncture_distance(z) >= margin {
            out.push(z);
        }
    }
    out
}
