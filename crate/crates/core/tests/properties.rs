use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::strategy::ValueTree;

use riesz_core::adfamily::{ad_set, intersection_bound, letters_for, BranchSeed};
use riesz_core::concrete::{
    eval_cantor, eval_circle, grid_coefficients, pl_extend, tv_norm, CircleGrid,
};
use riesz_core::dissociate::{
    enumerate_words, is_dissociate, lacunary_letters, rademacher_letters, word_count,
    word_count_bound, word_intersection_check, DissociateOutcome, IntersectionOutcome, Letter,
};
use riesz_core::dualgroup::{Coord, DualGroup};
use riesz_core::riesz::{
    coefficient, convolve, multiply, partial_transform, transform_power, RieszSpec,
};
use riesz_core::spectrum::{
    default_z0, disc_lemma_check, gamma_avoidance, natural_spectrum, witness_pair, WitnessParams,
};

fn groups() -> Vec<DualGroup> {
    [
        "Z",
        "Z^3",
        "sumZ2",
        "sumZ(3)",
        "sumZ(4)",
        "ZxsumZ2",
        "Z^2xsumZ(5)",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect()
}

fn arb_element(
    g: &DualGroup,
) -> impl Strategy<Value = riesz_core::dualgroup::GroupElement> + use<'_> {
    let factors = g.factors().len();
    prop::collection::vec((0..factors, 0u64..6, -40i64..40), 0..5).prop_map(move |entries| {
        let coords = entries.into_iter().map(|(f, i, v)| {
            let index = match g.factors()[f] {
                riesz_core::dualgroup::Factor::Integer => 0,
                riesz_core::dualgroup::Factor::Lattice(d) => i % d as u64,
                _ => i,
            };
            (Coord { factor: f, index }, BigInt::from(v))
        });
        g.element(coords).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms(gi in 0usize..7, seed in any::<u64>()) {
        let gs = groups();
        let g = &gs[gi];
        let mut runner = proptest::test_runner::TestRunner::new_with_rng(
            Default::default(),
            proptest::test_runner::TestRng::from_seed(
                proptest::test_runner::RngAlgorithm::ChaCha,
                &{
                    let mut b = [0u8; 32];
                    b[..8].copy_from_slice(&seed.to_le_bytes());
                    b
                },
            ),
        );
        let strat = (arb_element(g), arb_element(g), arb_element(g));
        let (x, y, z) = strat.new_tree(&mut runner).unwrap().current();
        let xy = g.combine(&x, &y).unwrap();
        prop_assert_eq!(g.combine(&xy, &z).unwrap(), g.combine(&x, &g.combine(&y, &z).unwrap()).unwrap());
        prop_assert_eq!(&xy, &g.combine(&y, &x).unwrap());
        prop_assert_eq!(g.combine(&x, &g.identity()).unwrap(), x.clone());
        prop_assert!(g.combine(&x, &g.invert(&x).unwrap()).unwrap().is_identity());
        // canonical forms are fixed points of canonicalization
        prop_assert!(g.check(&x).is_ok());
        prop_assert_eq!(g.element(x.coords().iter().cloned()).unwrap(), x.clone());
        prop_assert_eq!(g.parse_element(&g.display(&x)).unwrap(), x);
    }
}

#[test]
fn involution_iff_self_combination_is_identity() {
    for g in groups() {
        let factors = g.factors().len();
        for f in 0..factors {
            for index in 0..2u64 {
                let index = match g.factors()[f] {
                    riesz_core::dualgroup::Factor::Integer => 0,
                    _ => index,
                };
                for v in -6i64..=6 {
                    let x = g
                        .element([(Coord { factor: f, index }, BigInt::from(v))])
                        .unwrap();
                    if x.is_identity() {
                        continue;
                    }
                    let expected = g.combine(&x, &x).unwrap().is_identity();
                    assert_eq!(g.is_involution(&x).unwrap(), expected, "{g} {x:?}");
                }
            }
        }
    }
}

#[test]
fn subsets_of_dissociate_sets_are_dissociate() {
    let (g, ls) = lacunary_letters(3, 6).unwrap();
    assert_eq!(
        is_dissociate(&g, &ls, 6).unwrap(),
        DissociateOutcome::Verified
    );
    for mask in 1u32..(1 << 6) {
        let sub: Vec<Letter> = (0..6)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| ls[i].clone())
            .collect();
        assert_eq!(
            is_dissociate(&g, &sub, 6).unwrap(),
            DissociateOutcome::Verified
        );
    }
}

#[test]
fn word_set_sizes_and_soundness() {
    let (g, ls) = lacunary_letters(3, 7).unwrap();
    for l in 1..=7 {
        let ws = enumerate_words(&g, &ls, l).unwrap();
        assert_eq!(ws.len() as u128, word_count_bound(7, l));
        for (el, w) in ws.entries() {
            assert_eq!(&w.evaluate(&g, &ls), el);
        }
    }
    let (s, rs) = rademacher_letters(6).unwrap();
    let ws = enumerate_words(&s, &rs, 4).unwrap();
    assert_eq!(ws.len() as u128, word_count(6, 0, 4));
    assert!((ws.len() as u128) < word_count_bound(6, 4));

    let m: DualGroup = "ZxsumZ2".parse().unwrap();
    let mixed = vec![
        Letter::new(&m, m.parse_element("(5; 0)").unwrap()).unwrap(),
        Letter::new(&m, m.parse_element("(0; e1)").unwrap()).unwrap(),
        Letter::new(&m, m.parse_element("(17; e2)").unwrap()).unwrap(),
    ];
    let ws = enumerate_words(&m, &mixed, 3).unwrap();
    assert_eq!(ws.len() as u128, word_count(1, 2, 3));
    for (el, w) in ws.entries() {
        assert_eq!(&w.evaluate(&m, &mixed), el);
    }
}

fn seed_bits(bits: u16) -> BranchSeed {
    let prefix: String = (0..16)
        .map(|i| if bits >> (15 - i) & 1 == 1 { '1' } else { '0' })
        .collect();
    BranchSeed::periodic(&prefix, "0").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn almost_disjointness(a in any::<u16>(), b in any::<u16>(), n in 1usize..20) {
        prop_assume!(a != b);
        let (sa, sb) = (seed_bits(a), seed_bits(b));
        let bound = intersection_bound(&sa, &sb, 64).unwrap();
        let x = ad_set(&sa, n).unwrap();
        let y = ad_set(&sb, n).unwrap();
        let common = x.codes.iter().filter(|c| y.codes.contains(c)).count();
        prop_assert!(common <= bound);
        if n >= bound {
            prop_assert_eq!(common, bound);
        }
        let bigger = ad_set(&sa, n + 1).unwrap();
        prop_assert!(x.codes.iter().all(|c| bigger.codes.contains(c)));
    }

    #[test]
    fn lemma_equality_on_ad_pairs(a in any::<u16>(), b in any::<u16>(), level in 1usize..=3) {
        prop_assume!(a != b);
        let (g, master) = lacunary_letters(3, 40).unwrap();
        let fa = letters_for(&master, &ad_set(&seed_bits(a), 4).unwrap()).unwrap();
        let fb = letters_for(&master, &ad_set(&seed_bits(b), 4).unwrap()).unwrap();
        let out = word_intersection_check(&g, &fa.letters, &fb.letters, level).unwrap();
        prop_assert!(matches!(out, IntersectionOutcome::Equal { .. }), "{:?}", out);
    }
}

fn zspec(vals: &[i64], coeffs: &[f64]) -> RieszSpec {
    let g = DualGroup::integers();
    let ls = vals
        .iter()
        .map(|&v| Letter::new(&g, g.integer(v).unwrap()).unwrap())
        .collect();
    let cs = coeffs.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    RieszSpec::new(g, ls, cs, vals.len()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn identity_coefficient_and_hermitian_symmetry(
        coeffs in prop::collection::vec(-0.5f64..=0.5, 4)
    ) {
        let spec = zspec(&[3, 9, 27, 81], &coeffs);
        let g = spec.group().clone();
        prop_assert_eq!(coefficient(&spec, &g.identity(), 4).value(), Complex64::new(1.0, 0.0));
        let t = spec.truncated_transform(4).unwrap();
        for (el, v) in t.values() {
            prop_assert_eq!(v.im, 0.0);
            prop_assert_eq!(t.get(&g.invert(el).unwrap()), *v);
        }
    }

    #[test]
    fn product_of_partial_products(
        coeffs in prop::collection::vec((-0.5f64..=0.5, -0.5f64..=0.5), 4)
    ) {
        let g = DualGroup::integers();
        let ls: Vec<Letter> = [3i64, 9, 27, 81]
            .iter()
            .map(|&v| Letter::new(&g, g.integer(v).unwrap()).unwrap())
            .collect();
        let cs: Vec<Complex64> = coeffs
            .iter()
            .map(|&(re, im)| {
                let z = Complex64::new(re, im);
                if z.norm() > 0.5 { z * (0.499 / z.norm()) } else { z }
            })
            .collect();
        let spec = RieszSpec::new(g, ls, cs, 4).unwrap();
        let whole = partial_transform(&spec, &[0, 1, 2, 3], 4).unwrap();
        let left = partial_transform(&spec, &[0, 2], 4).unwrap();
        let right = partial_transform(&spec, &[1, 3], 4).unwrap();
        let prod = multiply(&left, &right).unwrap();
        prop_assert_eq!(prod.len(), whole.len());
        for (el, v) in whole.values() {
            prop_assert!((prod.get(el) - v).norm() < 1e-15);
        }
    }

    #[test]
    fn power_consistency(a in 0.0f64..=0.5, n in 1u32..6) {
        let spec = zspec(&[3, 9, 27], &[a, a / 2.0, a / 3.0]);
        let pow = transform_power(&spec, n).unwrap();
        let ws = enumerate_words(spec.group(), spec.letters(), 3).unwrap();
        for (el, _) in ws.entries() {
            let base = coefficient(&spec, el, 3).value();
            let got = coefficient(&pow, el, 3).value();
            prop_assert!((got - base.powu(n)).norm() <= 1e-15);
        }
    }

    #[test]
    fn circle_densities_match_coefficients(coeffs in prop::collection::vec(-0.5f64..=0.5, 3)) {
        let spec = zspec(&[3, 9, 27], &coeffs);
        let d = eval_circle(&spec, &[0, 1, 2], CircleGrid::new(256).unwrap()).unwrap();
        prop_assert!(d.min() >= -1e-9);
        prop_assert!((tv_norm(&d) - 1.0).abs() < 1e-9);
        let grid = grid_coefficients(&d);
        let t = partial_transform(&spec, &[0, 1, 2], 3).unwrap();
        for (el, v) in t.values() {
            let f = el.as_i64().unwrap();
            let got = grid.get(&f).copied().unwrap_or_default();
            prop_assert!((got - v).norm() < 1e-9);
        }
        for (f, v) in &grid {
            let el = spec.group().integer(*f).unwrap();
            prop_assert!((t.get(&el) - v).norm() < 1e-9);
        }
    }

    #[test]
    fn cantor_mass_and_positivity(coeffs in prop::collection::vec(-0.999f64..0.999, 10), n in 1u32..=5) {
        let (g, ls) = rademacher_letters(10).unwrap();
        let cs = coeffs.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        let spec = RieszSpec::new(g, ls, cs, 1).unwrap();
        let d = eval_cantor(&spec, 10, n, 24).unwrap();
        prop_assert!(d.min() >= -1e-9);
        prop_assert!((tv_norm(&d) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pl_restriction_is_identity(vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9)) {
        let knots: Vec<(i64, Complex64)> = vals
            .iter()
            .enumerate()
            .map(|(i, &(re, im))| (i as i64 - 4, Complex64::new(re, im)))
            .collect();
        let e = pl_extend(4, knots.clone()).unwrap();
        for (j, v) in knots {
            prop_assert_eq!(e.eval(j as f64), v);
        }
    }

    #[test]
    fn disc_lemma_holds_with_bound(
        (rx, px, ry, py) in (0.0f64..0.1, 0.0f64..std::f64::consts::TAU, 0.0f64..0.1, 0.0f64..std::f64::consts::TAU)
    ) {
        let z0 = default_z0();
        let x = z0 + Complex64::from_polar(rx, px);
        let y = z0 + Complex64::from_polar(ry, py);
        prop_assume!(x.norm() <= 1.0 && y.norm() <= 1.0);
        prop_assume!((x - z0).norm() < 0.1 && (y - z0).norm() < 0.1);
        let lhs = (x * y - z0 * z0).norm();
        prop_assert!(lhs <= x.norm() * (y - z0).norm() + z0.norm() * (x - z0).norm() + 1e-15);
        prop_assert!(disc_lemma_check(x, y, z0, 0.1).unwrap());
    }

    #[test]
    fn real_transforms_avoid_z0(vals in prop::collection::vec(-1.0f64..=1.0, 1..20), r in 0.01f64..0.7) {
        let g = DualGroup::integers();
        let map = vals
            .iter()
            .enumerate()
            .map(|(i, &v)| (g.integer(i as i64).unwrap(), Complex64::new(v, 0.0)))
            .collect();
        let t = riesz_core::SparseTransform::from_map(g, map, riesz_core::Support::Exact);
        let d = gamma_avoidance(&t, default_z0()).unwrap();
        prop_assert!(d >= std::f64::consts::FRAC_1_SQRT_2 - 1e-12);
        prop_assert!(d > r);
    }
}

#[test]
fn convolution_support_is_intersection_for_default_family() {
    let (g, master) = lacunary_letters(3, 40).unwrap();
    let seeds = [
        "prefix=0,period=1",
        "prefix=01,period=0",
        "prefix=011,period=01",
    ];
    for (i, a) in seeds.iter().enumerate() {
        for b in &seeds[i + 1..] {
            let fa = letters_for(&master, &ad_set(&a.parse().unwrap(), 4).unwrap()).unwrap();
            let fb = letters_for(&master, &ad_set(&b.parse().unwrap(), 4).unwrap()).unwrap();
            let ta = RieszSpec::default_family(g.clone(), fa.letters, fa.index, 3)
                .unwrap()
                .truncated_transform(3)
                .unwrap();
            let tb = RieszSpec::default_family(g.clone(), fb.letters, fb.index, 3)
                .unwrap()
                .truncated_transform(3)
                .unwrap();
            let prod = convolve(&ta, &tb).unwrap();
            let sa: BTreeSet<_> = ta.values().keys().cloned().collect();
            let sb: BTreeSet<_> = tb.values().keys().cloned().collect();
            let both: BTreeSet<_> = sa.intersection(&sb).cloned().collect();
            let got: BTreeSet<_> = prod.values().keys().cloned().collect();
            assert_eq!(got, both);
            let est = natural_spectrum(&prod);
            assert!(est.points.iter().all(|p| p.im == 0.0 && p.re.abs() <= 1.0));
        }
    }
}

#[test]
fn witness_certification_is_monotone_in_level() {
    let (g, master) = lacunary_letters(3, 40).unwrap();
    let a: BranchSeed = "prefix=011,period=0".parse().unwrap();
    let b: BranchSeed = "prefix=0111,period=01".parse().unwrap();
    let params = WitnessParams {
        samples: 200,
        ..Default::default()
    };
    let mut prev_size = 0;
    for level in 1..=5 {
        let rep = witness_pair(&a, &b, &g, &master, level, &params).unwrap();
        assert!(
            rep.conclusion.is_certified(),
            "level {level}: {:?}",
            rep.conclusion
        );
        assert!(rep.product_support_size >= prev_size);
        prev_size = rep.product_support_size;
        let again = witness_pair(&a, &b, &g, &master, level, &params).unwrap();
        assert_eq!(
            serde_json::to_string(&rep).unwrap(),
            serde_json::to_string(&again).unwrap()
        );
    }
    assert_eq!(prev_size, 27);
}
