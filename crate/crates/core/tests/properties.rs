use num_complex::Complex64;
use proptest::prelude::*;
use qwalk::grid::{Domain, GridSpec, GridWavefunction};
use qwalk::lattice::LatticeState;
use qwalk::limits::{cf_distance, ks_distance, levy_distance, Measure, ZetaGrid};
use qwalk::plancherel::plancherel_step;
use qwalk::EmpiricalMeasure;

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn measure() -> impl Strategy<Value = Measure> {
    prop::collection::vec((-3.0..3.0f64, 0.01..1.0f64), 1..12).prop_map(|atoms| {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let points = atoms.iter().map(|a| [a.0, 0.0]).collect();
        let weights = atoms.iter().map(|a| a.1 / total).collect();
        Measure::Empirical(EmpiricalMeasure::new(1, points, weights).unwrap())
    })
}

fn grid(v: Vec<Complex64>) -> GridWavefunction {
    GridWavefunction::from_values(GridSpec::new(1, 8, 16, 1).unwrap(), Domain::Position, v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lattice_steps_preserve_the_norm(h in complex_vec(6), t in complex_vec(6), steps in 1usize..30) {
        prop_assume!(h.iter().chain(&t).any(|a| a.norm() > 1e-3));
        let s = LatticeState::normalized(-3, h, t).unwrap().evolve(steps);
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plancherel_step_is_linear_and_unitary(a in complex_vec(128), b in complex_vec(128), c in (-2.0..2.0f64, -2.0..2.0f64)) {
        let c = Complex64::new(c.0, c.1);
        let (ga, gb) = (grid(a.clone()), grid(b.clone()));
        let sum = grid(a.iter().zip(&b).map(|(x, y)| c * x + y).collect());
        let (sa, sb) = (plancherel_step(&ga).unwrap().state, plancherel_step(&gb).unwrap().state);
        let ss = plancherel_step(&sum).unwrap().state;
        for i in 0..128 {
            let expected = c * sa.values()[i] + sb.values()[i];
            prop_assert!((ss.values()[i] - expected).norm() < 1e-12);
        }
        prop_assert!((sa.norm_sqr() - ga.norm_sqr()).abs() < 1e-12 * ga.norm_sqr().max(1.0));
    }

    #[test]
    fn distances_are_pseudometrics(a in measure(), b in measure(), c in measure()) {
        let z = ZetaGrid::new(6.0, 65).unwrap();
        type D = Box<dyn Fn(&Measure, &Measure) -> f64>;
        let ds: [(&str, D); 3] = [
            ("cf", Box::new(move |x, y| cf_distance(x, y, &z).unwrap())),
            ("ks", Box::new(|x, y| ks_distance(x, y).unwrap())),
            ("levy", Box::new(|x, y| levy_distance(x, y).unwrap())),
        ];
        for (name, d) in ds.iter() {
            prop_assert!(d(&a, &a).abs() < 1e-12, "{name} self");
            prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-9, "{name} symmetry");
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9, "{name} triangle");
        }
    }
}
