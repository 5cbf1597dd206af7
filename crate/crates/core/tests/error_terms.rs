use zlab_core::divisor::DivisorTable;
use zlab_core::error_terms::{compute_all, required_divisor_limit, ErrorTermGrid, Field, DEFAULT_QUADRATURE_TOL};
use zlab_core::quad::GridLayout;
use zlab_core::zeta::{build_zeta_grid_on, EvalConfig, ZetaGrid};

fn build(t_max: f64, c_step: f64, table: &DivisorTable) -> (ZetaGrid, ErrorTermGrid) {
    let layout = GridLayout::build(t_max, c_step).unwrap();
    let z = build_zeta_grid_on(layout, &EvalConfig::default()).unwrap();
    let g = compute_all(&z, table, DEFAULT_QUADRATURE_TOL).unwrap();
    (z, g)
}

#[test]
fn halving_the_step_moves_values_by_less_than_a_thousandth() {
    let t_max = 1.0e4;
    let table = DivisorTable::build(required_divisor_limit(t_max)).unwrap();
    let (z1, g1) = build(t_max, 0.5, &table);
    let (z2, g2) = build(t_max, 0.25, &table);
    assert!(g2.t_values().len() > g1.t_values().len() * 3 / 2);
    assert!(g1.e_at(&z1, 1e3).unwrap().abs() <= 30.0);
    for t in (0..=200).map(|k| 3.0 + k as f64 * 49.97) {
        let e1 = g1.e_at(&z1, t).unwrap();
        let e2 = g2.e_at(&z2, t).unwrap();
        assert!((e1 - e2).abs() <= 1e-3, "E({t}): {e1} vs {e2}");
        for field in [Field::R, Field::E1] {
            let a = g1.value_at(field, t).unwrap();
            let b = g2.value_at(field, t).unwrap();
            assert!((a - b).abs() <= 1e-3, "{field:?}({t}): {a} vs {b}");
        }
    }
}

#[test]
fn anchors_hold_on_a_real_grid() {
    let table = DivisorTable::build(required_divisor_limit(500.0)).unwrap();
    let (_, g) = build(500.0, 0.5, &table);
    let t = g.t_values();
    assert_eq!(t[0], 0.0);
    assert_eq!(g.e()[0], 0.0);
    assert_eq!(g.r().unwrap()[0], 0.0);
    let two = t.iter().position(|&x| x == 2.0).expect("t = 2 is a node");
    assert_eq!(g.e1().unwrap()[two], 0.0);
    assert!(t.windows(2).all(|w| w[0] < w[1]));
}
