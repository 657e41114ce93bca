use lopstokes::lopatinski::{assemble, identity_check};
use lopstokes::resolvent::{assemble_profiles, BoundaryData};
use lopstokes::symbol::char_roots;
use lopstokes::transform::{round_trip_error, TangentialGrid, Transformer};
use lopstokes::{FluidParams, SpectralPoint, Tolerances, C64};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = SpectralPoint> {
    (-3.0f64..3.0, -2.8f64..2.8, -2.0f64..2.0, 0.0f64..std::f64::consts::TAU).prop_map(|(lm, arg, la, th)| {
        let a = 10f64.powf(la);
        SpectralPoint::new(C64::from_polar(10f64.powf(lm), arg), &[a * th.cos(), a * th.sin()]).unwrap()
    })
}

fn c(v: (f64, f64)) -> C64 {
    C64::new(v.0, v.1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn roots_square_back(sp in point()) {
        let p = FluidParams::reference();
        let r = char_roots(&p, &sp).unwrap();
        let a2 = sp.a() * sp.a();
        for (root, k) in [
            (r.a_plus, p.rho_plus() / (p.mu_plus() + p.nu_plus())),
            (r.b_plus, p.rho_plus() / p.mu_plus()),
            (r.b_minus, p.rho_minus() / p.mu_minus()),
        ] {
            let rhs = sp.lambda * k + a2;
            prop_assert!(root.re > 0.0);
            prop_assert!((root * root - rhs).norm() <= 1e-12 * (rhs.norm() + a2));
        }
    }

    #[test]
    fn determinant_identities_hold(sp in point(), s in 0.01f64..100.0) {
        let p = FluidParams::reference();
        let tol = Tolerances::default();
        let rep = identity_check(&p, &[sp], &[s], &tol).unwrap();
        prop_assert!(rep.passed(&tol), "{rep:?}");
    }

    #[test]
    fn solution_is_linear_in_data(
        sp in point(),
        h1 in prop::array::uniform2((-1.0f64..1.0, -1.0f64..1.0)),
        h2 in prop::array::uniform2((-1.0f64..1.0, -1.0f64..1.0)),
        z in (-1.0f64..1.0, -1.0f64..1.0),
        alpha in (-2.0f64..2.0, -2.0f64..2.0),
        x in 0.0f64..1.0,
    ) {
        let p = FluidParams::reference();
        prop_assume!(assemble(&p, &sp).unwrap().det.norm() > 0.0);
        let (h1, h2, alpha) = (h1.map(c).to_vec(), h2.map(c).to_vec(), c(alpha));
        let sum: Vec<C64> = h1.iter().zip(&h2).map(|(a, b)| alpha * a + b).collect();
        let s1 = assemble_profiles(&p, &sp, &BoundaryData::explicit(h1, c(z))).unwrap();
        let s2 = assemble_profiles(&p, &sp, &BoundaryData::explicit(h2, C64::new(0.0, 0.0))).unwrap();
        let s = assemble_profiles(&p, &sp, &BoundaryData::explicit(sum, alpha * c(z))).unwrap();
        for depth in [x, -x] {
            let (u, u1, u2) = (s.velocity(depth), s1.velocity(depth), s2.velocity(depth));
            let scale = u1.iter().chain(&u2).map(|v| v.norm()).fold(1e-300, f64::max) * (1.0 + alpha.norm());
            for j in 0..u.len() {
                prop_assert!((u[j] - alpha * u1[j] - u2[j]).norm() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn fft_round_trip(
        shape in (4usize..8, 0usize..3),
        seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64),
        lx in 0.5f64..20.0,
    ) {
        let mut dims = vec![1 << shape.0];
        if shape.1 > 0 {
            dims.push(1 << (shape.1 + 3));
        }
        let boxes = vec![lx; dims.len()];
        let g = TangentialGrid::new(boxes, dims).unwrap();
        let f: Vec<C64> = (0..g.len()).map(|i| c(seed[i % seed.len()]) * (1.0 + i as f64).sqrt()).collect();
        let t = Transformer::new(&g).unwrap();
        prop_assert!(round_trip_error(&t, &f) < 1e-13);
    }
}
