use amac_core::infocore::{Distribution, DmcChannel, ProductInput, SenderSet};
use amac_core::regions::{contains, dominant_face_contains, polytope, vertex, Ordering, RateVector};
use amac_core::simkernel::DelaySystem;
use proptest::prelude::*;

fn law(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, len).prop_map(|v| {
        let t: f64 = v.iter().sum::<f64>() + 1e-9;
        let mut p: Vec<f64> = v.iter().map(|x| (x + 1e-9 / v.len() as f64) / t).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        p
    })
}

/// Three binary senders, ternary output.
fn instance() -> impl Strategy<Value = (DmcChannel, ProductInput)> {
    (prop::collection::vec(law(3), 8), prop::collection::vec(law(2), 3)).prop_map(|(rows, inputs)| {
        let w = DmcChannel::new(vec![2, 2, 2], 3, rows.concat()).unwrap();
        let p = ProductInput::new(inputs.into_iter().map(|q| Distribution::new(q).unwrap()).collect());
        (w, p)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounds_form_a_polymatroid((w, p) in instance()) {
        let poly = polytope(&w, &p).unwrap();
        prop_assert!(poly.is_polymatroid(1e-9));
        let b = |s: SenderSet| poly.bounds()[s.index()];
        for s in SenderSet::all_nonempty(3) {
            for t in SenderSet::all_nonempty(3) {
                if s.is_subset_of(t) {
                    prop_assert!(b(s) <= b(t) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn every_vertex_is_on_the_dominant_face((w, p) in instance()) {
        let poly = polytope(&w, &p).unwrap();
        for o in Ordering::all(3) {
            let v = vertex(&poly, &o).unwrap();
            prop_assert!(dominant_face_contains(&poly, &v, 1e-9).unwrap());
        }
    }

    #[test]
    fn shrinking_a_member_keeps_it_inside((w, p) in instance(), lam in 0.0f64..1.0, c in 0.0f64..1.0) {
        let poly = polytope(&w, &p).unwrap();
        let a = vertex(&poly, &Ordering::new(vec![0, 1, 2]).unwrap()).unwrap();
        let b = vertex(&poly, &Ordering::new(vec![2, 1, 0]).unwrap()).unwrap();
        let r = RateVector::combine(&[a, b], &[lam, 1.0 - lam]);
        prop_assert!(contains(&poly, &r.scaled(c), 1e-9).unwrap());
        let total = SenderSet::full(3);
        let out = r.scaled(1.0 + 1e-3 + c);
        prop_assert!(poly.bounds()[total.index()] < 1e-6 || !contains(&poly, &out, 1e-9).unwrap());
    }
}

#[test]
fn lattice_support_is_the_stride_grid() {
    let ds = DelaySystem::Lattice { stride: vec![3], phase: vec![1] };
    let support = ds.support(10).unwrap();
    let delays: Vec<usize> = support.iter().map(|(d, _)| d[0]).collect();
    assert_eq!(delays, vec![1, 4, 7]);
    assert!(support.iter().all(|(_, q)| (q - 1.0 / 3.0).abs() < 1e-12));
}

#[test]
fn even_delays_use_only_even_shifts() {
    let ds = DelaySystem::EvenDelays;
    let support = ds.support(6).unwrap();
    assert_eq!(support.len(), 9);
    assert!(support.iter().all(|(d, _)| d.iter().all(|x| x % 2 == 0)));
}
