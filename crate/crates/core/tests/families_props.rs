use std::sync::Arc;

use produal::bfs::{factorization_split, lebesgue, PiProductSpace, RationalExponent};
use produal::freelip::{biform_norm, molecule_norm, FiniteMetricSpace, LipschitzBiForm, Molecule};
use produal::optlab::lp::{solve_lp, LpProblem, Relation, Sense};
use produal::picalc::PiOptions;
use produal::vecmeas::VectorMeasure;
use produal::{Exponent, FiniteMeasure, NormedSpace};
use proptest::prelude::*;

fn ell(n: usize, p: f64) -> Arc<NormedSpace> {
    Arc::new(NormedSpace::lp(n, p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn single_split_is_optimal(f in prop::collection::vec(-2.0f64..2.0, 4), pi in 0usize..3) {
        let p = ["3/2", "2", "4"][pi];
        let mu = FiniteMeasure::new(vec![1.0, 0.5, 2.0, 0.25]).unwrap();
        let pe = RationalExponent::parse(p).unwrap();
        let space = PiProductSpace::new(Arc::new(lebesgue(&mu, pe).unwrap()), Arc::new(lebesgue(&mu, pe.conjugate()).unwrap())).unwrap();
        let b = space.product_norm(&f, &PiOptions::default()).unwrap();
        let l1 = lebesgue(&mu, RationalExponent::parse("1").unwrap()).unwrap();
        let (_, _, cost) = factorization_split(&l1, [1.5, 2.0, 4.0][pi], &f).unwrap();
        prop_assert!(b.upper <= cost + 1e-10 * (1.0 + cost));
        prop_assert!(b.lower >= cost - 1e-6);
    }

    #[test]
    fn product_norm_is_monotone(h in prop::collection::vec(-2.0f64..2.0, 3), t in prop::collection::vec(0.0f64..1.0, 3)) {
        let mu = FiniteMeasure::new(vec![1.0, 2.0, 0.5]).unwrap();
        let space = PiProductSpace::new(Arc::new(lebesgue(&mu, RationalExponent::parse("3").unwrap()).unwrap()), Arc::new(lebesgue(&mu, RationalExponent::parse("4").unwrap()).unwrap())).unwrap();
        let small: Vec<f64> = h.iter().zip(&t).map(|(a, s)| a * s).collect();
        let (bs, bh) = (space.product_norm(&small, &PiOptions::default()).unwrap(), space.product_norm(&h, &PiOptions::default()).unwrap());
        prop_assert!(bs.lower <= bh.upper + 1e-9);
    }

    #[test]
    fn elementary_molecules_attain_distance(n in 2usize..8, seed in 0u64..1000) {
        let a = FiniteMetricSpace::random(n, seed).unwrap();
        for i in 0..n {
            for j in 0..n {
                let v = molecule_norm(&a, &Molecule::elementary(n, i, j)).unwrap().value;
                prop_assert!((v - a.d(i, j)).abs() <= 1e-12 * (1.0 + a.d(i, j)));
            }
        }
    }

    #[test]
    fn biform_ascent_below_enumeration(na in 2usize..5, nd in 2usize..5, seed in 0u64..1000) {
        let (a, d) = (FiniteMetricSpace::random(na, seed).unwrap(), FiniteMetricSpace::random(nd, seed + 1).unwrap());
        let t = LipschitzBiForm::random(na, nd, seed + 2);
        let (b, alt) = biform_norm(&t, &a, &d, seed).unwrap();
        prop_assert!(alt <= b.upper + 1e-9);
        prop_assert!((alt - b.upper).abs() <= 1e-9 * (1.0 + b.upper));
    }

    #[test]
    fn semivariation_monotone_subadditive(seed in 0u64..1000) {
        let m = VectorMeasure::random(5, ell(2, 2.0), seed).unwrap();
        let sv = |s: &[usize]| m.semivariation(s).unwrap().value;
        prop_assert_eq!(sv(&[]), 0.0);
        prop_assert!(sv(&[0, 1]) <= sv(&[0, 1, 3]) + 1e-12);
        prop_assert!(sv(&[0, 1, 2, 3, 4]) <= sv(&[0, 1]) + sv(&[2, 3, 4]) + 1e-12);
    }

    #[test]
    fn lp_m_norm_axioms_and_holder(f in prop::collection::vec(-2.0f64..2.0, 4), g in prop::collection::vec(-2.0f64..2.0, 4), a in -3.0f64..3.0, seed in 0u64..100) {
        let m = VectorMeasure::random(4, ell(2, 1.0), seed).unwrap();
        let p = Exponent::Finite(3.0);
        let n = |v: &[f64], e: Exponent| m.lp_m_norm(e, v).unwrap().value;
        let (nf, ng) = (n(&f, p), n(&g, p));
        let af: Vec<f64> = f.iter().map(|v| a * v).collect();
        prop_assert!((n(&af, p) - a.abs() * nf).abs() <= 1e-10 * (1.0 + nf * a.abs()));
        let fg: Vec<f64> = f.iter().zip(&g).map(|(x, y)| x + y).collect();
        prop_assert!(n(&fg, p) <= nf + ng + 1e-10);
        let halved: Vec<f64> = f.iter().map(|v| 0.5 * v).collect();
        prop_assert!(n(&halved, p) <= nf + 1e-10);
        let prod: Vec<f64> = f.iter().zip(&g).map(|(x, y)| x * y).collect();
        prop_assert!(n(&prod, Exponent::Finite(1.0)) <= nf * n(&g, p.conjugate()) + 1e-9);
    }

    #[test]
    fn rn_derivative_is_feasible(z in prop::collection::vec(-2.0f64..2.0, 2), seed in 0u64..100) {
        let m = VectorMeasure::random(4, ell(2, 2.0), seed).unwrap();
        let ryb = m.choose_rybakov(8, seed).unwrap();
        let h = m.rn_derivative(&ryb, &z).unwrap();
        let kn = m.kothe_l1_norm(&ryb, &h).unwrap();
        let zn = m.value_space().dual_norm(&z).unwrap().value;
        prop_assert!(kn.lower <= zn + 1e-9 * (1.0 + zn));
    }

    #[test]
    fn lp_certificates(c in prop::collection::vec(0.1f64..3.0, 4), rows in prop::collection::vec(prop::collection::vec(-1.0f64..2.0, 4), 3), b in prop::collection::vec(0.5f64..3.0, 3)) {
        let mut lp = LpProblem::new(Sense::Minimize, c);
        for (r, rhs) in rows.into_iter().zip(b) {
            let mut r = r;
            r[0] = r[0].abs() + 0.5;
            lp.push(r, Relation::Ge, rhs);
        }
        let s = solve_lp(&lp).unwrap();
        prop_assert!(s.gap <= 1e-9 * (1.0 + s.value.abs()));
        prop_assert!(s.slackness_residual <= 1e-9);
    }
}
