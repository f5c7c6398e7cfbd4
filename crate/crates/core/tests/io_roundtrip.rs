use homogenlab::analysis::{ConvergenceReport, ConvergenceRow, InequalityRatios};
use homogenlab::grid::{BoxDomain, GridSpec, MacField, ScalarField};
use homogenlab::io::{
    read_manifest, read_report_csv, read_vtk, row_values, write_cell_vector_vtk, write_mac_component_vtk,
    write_manifest, write_report_csv, write_scalar_vtk, Manifest, VtkLocation, CSV_HEADER,
};
use proptest::prelude::*;

fn grid() -> GridSpec {
    GridSpec::new(BoxDomain::new([0.0, -1.0, 0.5], [1.0, 1.0, 2.0]).unwrap(), [4, 5, 6]).unwrap()
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        -1e3..1e3f64,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

fn row(eps: f64, vals: &[f64]) -> ConvergenceRow {
    ConvergenceRow {
        eps,
        r_eps: vals[0],
        n: 64,
        err_theta_l2: vals[1],
        err_u_l2: vals[2],
        gaps: vec![vals[3], vals[4], vals[5]],
        ratios: InequalityRatios {
            outer_average: vals[6],
            ball_average: vals[7],
            average_gap: vals[8],
            measure_norm: f64::NAN,
        },
        picard_iters: 7,
        seconds: vals[9],
        energy: 0.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scalar_vtk_is_exact(vals in prop::collection::vec(finite(), 120)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.vtk");
        let f = ScalarField::from_values(grid(), vals).unwrap();
        write_scalar_vtk(&path, "theta", &f).unwrap();
        let back = read_vtk(&path).unwrap();
        prop_assert_eq!(back.location, VtkLocation::Cell);
        prop_assert_eq!(back.dims, [5, 6, 7]);
        let g = back.to_scalar_field(grid()).unwrap();
        for (a, b) in f.values.iter().zip(&g.values) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn csv_is_exact(vals in prop::collection::vec(finite(), 20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut rep = ConvergenceReport::default();
        rep.push(row(0.5, &vals[..10]));
        rep.push(row(0.25, &vals[10..]));
        write_report_csv(&path, &rep).unwrap();
        let back = read_report_csv(&path).unwrap();
        prop_assert_eq!(back.len(), 2);
        for (r, b) in rep.rows.iter().zip(&back) {
            for (x, y) in row_values(r).iter().zip(b) {
                prop_assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
            }
        }
    }
}

#[test]
fn mac_component_lattice() {
    let g = grid();
    let u = MacField::from_fn(g, |axis, x| (axis as f64 + 1.0) * x[0] - x[2] / 3.0);
    let dir = tempfile::tempdir().unwrap();
    for axis in 0..3 {
        let path = dir.path().join(format!("u{axis}.vtk"));
        write_mac_component_vtk(&path, "u", &u, axis).unwrap();
        let back = read_vtk(&path).unwrap();
        assert_eq!(back.location, VtkLocation::Point);
        assert_eq!(back.dims, g.face_dims(axis));
        assert_eq!(back.values, u.comps[axis]);
        // first point sits on the first face centre
        let fc = g.face_center(axis, [0, 0, 0]);
        for d in 0..3 {
            assert!((back.origin[d] - fc[d]).abs() < 1e-15);
        }
    }
}

#[test]
fn cell_vectors_average_faces() {
    let g = grid();
    let u = MacField::from_fn(g, |axis, x| if axis == 2 { x[2] } else { 0.0 });
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.vtk");
    write_cell_vector_vtk(&path, "u", &u).unwrap();
    let back = read_vtk(&path).unwrap();
    assert_eq!(back.components, 3);
    assert_eq!(back.values.len(), 3 * g.cell_count());
    for c in 0..g.cell_count() {
        let z = g.cell_center(g.coords(c))[2];
        assert!((back.values[3 * c + 2] - z).abs() < 1e-14);
        assert_eq!(back.values[3 * c], 0.0);
    }
}

#[test]
fn vtk_rejects_bad_names_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = ScalarField::zeros(grid());
    assert!(write_scalar_vtk(&dir.path().join("a.vtk"), "two words", &f).is_err());
    let bad = dir.path().join("bad.vtk");
    std::fs::write(&bad, "# vtk DataFile Version 3.0\nx\nBINARY\n").unwrap();
    assert!(read_vtk(&bad).is_err());
}

#[test]
fn csv_header_is_frozen() {
    assert_eq!(
        CSV_HEADER.join(","),
        "eps,r_eps,n,err_theta_L2,err_u_L2,gap_phi1,gap_phi2,gap_phi3,ratio17,ratio18,ratio19,ratio_p24,picard_iters,seconds"
    );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_report_csv(&path, &ConvergenceReport::default()).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, format!("{}\r\n", CSV_HEADER.join(",")));
    std::fs::write(&path, "eps,n\r\n1,2\r\n").unwrap();
    assert!(read_report_csv(&path).is_err());
}

#[test]
fn manifest_sorted_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("manifest.txt");
    let mut m = Manifest::new();
    m.insert("physics.gamma".into(), "2".into());
    m.insert("grid.n".into(), "32".into());
    m.insert("a".into(), "x=y".into());
    write_manifest(&path, &m).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, "a=x=y\ngrid.n=32\nphysics.gamma=2\n");
    assert_eq!(read_manifest(&path).unwrap(), m);
    m.insert("bad=key".into(), "1".into());
    assert!(write_manifest(&path, &m).is_err());
}
