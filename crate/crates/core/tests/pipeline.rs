use std::f64::consts::PI;

use equimin::domain::build_path_system;
use equimin::linalg::{c, cmax_abs, C64};
use equimin::periods::PeriodTarget;
use equimin::solver::{build_period_spray_for, feasibility_check, newton_correct, NewtonConfig};
use equimin::surface::{diagnose, export_mesh, mesh_export, DiagnosticsOptions, GridSpec, ImmersionField, MeshGrid};
use equimin::wdata::{gallery, WeierstrassData};

fn quick() -> DiagnosticsOptions {
    DiagnosticsOptions {
        equivariance_samples: 300,
        nullity_grid_n: 40,
        grid_n: 10,
        curvature_cells: [32, 8],
        ..DiagnosticsOptions::default()
    }
}

#[test]
fn data_survives_a_json_round_trip() {
    for d in [gallery::catenoid(4).unwrap(), gallery::enneper(3).unwrap(), gallery::helicoid(PI).unwrap()] {
        let text = serde_json::to_string(&d).unwrap();
        let back: WeierstrassData = serde_json::from_str(&text).unwrap();
        let back = back.rebuild().unwrap();
        for z in [c(0.4, 0.3), c(-1.2, 0.7), c(0.1, -2.0)] {
            assert!(cmax_abs(&(back.form_at(z) - d.form_at(z))) <= 1e-15);
        }
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}

#[test]
fn perturbed_solve_then_diagnose_then_export() {
    let d = gallery::enneper(2).unwrap();
    let paths = build_path_system(&d.domain, &d.domain_action, d.basepoint).unwrap();
    let target = PeriodTarget::standard(&d, &paths).unwrap();
    let spray = build_period_spray_for(&d, &paths, &target).unwrap();
    let t0: Vec<C64> = (0..spray.len()).map(|s| C64::from_polar(0.05, s as f64)).collect();
    let out = newton_correct(&spray.with_params(t0), &target, &NewtonConfig::default()).unwrap();
    assert!(out.trace.iterations >= 1);
    assert!(out.residuals.max() <= 1e-10);

    let field = ImmersionField::new(out.data, paths, 1e-12).unwrap();
    let feas = feasibility_check(&d.domain, &d.domain_action, &d.space_action).unwrap();
    let report = diagnose(&field, &target, &feas, &quick()).unwrap();
    assert!(report.passed, "{:?}", report.failures());
    assert!(report.nondegeneracy.nondegenerate);
    assert_eq!(report.fixed_points.len(), 1);

    let grid = MeshGrid::new(
        GridSpec::Polar { center: c(0.0, 0.0), r_min: 0.0, r_max: 1.2, angle0: 0.0, angle1: 2.0 * PI, log_radial: false },
        16,
        24,
    )
    .unwrap();
    let mesh = mesh_export(&field, &grid).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = export_mesh(&mesh, &dir.path().join("out"), "enneper").unwrap();
    assert_eq!(files.len(), 3);
    assert!(files.iter().all(|f| f.bytes > 0 && f.sha256.len() == 64));
}
