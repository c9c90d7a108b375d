use amac_core::channels;
use amac_core::converse::*;
use amac_core::infocore::{Distribution, SenderSet};
use amac_core::simkernel::*;

fn plain(n: usize, rates: &[f64], laws: &[Distribution], seed: u64) -> CodebookSystem {
    let spec = CodebookSpec {
        n,
        rates: rates.to_vec(),
        schedules: laws.iter().cloned().map(SymbolSchedule::single).collect(),
    };
    generate_codebooks(&spec, seed, Storage::Auto).unwrap()
}

fn log2(x: f64) -> f64 {
    if x > 0.0 {
        x.log2()
    } else {
        0.0
    }
}

/// I(X_S; Y | X_{S^c}) for a 2-sender product law by direct summation.
fn cmi2(w: &amac_core::DmcChannel, p1: &[f64], p2: &[f64], s: SenderSet) -> f64 {
    let ny = w.output_size();
    let mut total = 0.0;
    for x1 in 0..p1.len() {
        for x2 in 0..p2.len() {
            let px = p1[x1] * p2[x2];
            if px == 0.0 {
                continue;
            }
            for y in 0..ny {
                let wy = w.prob(&[x1, x2], y);
                if wy == 0.0 {
                    continue;
                }
                // law of y given the conditioning senders only
                let cond = match (s.contains(0), s.contains(1)) {
                    (true, true) => (0..p1.len())
                        .flat_map(|a| (0..p2.len()).map(move |b| (a, b)))
                        .map(|(a, b)| p1[a] * p2[b] * w.prob(&[a, b], y))
                        .sum::<f64>(),
                    (true, false) => (0..p1.len()).map(|a| p1[a] * w.prob(&[a, x2], y)).sum(),
                    (false, true) => (0..p2.len()).map(|b| p2[b] * w.prob(&[x1, b], y)).sum(),
                    _ => unreachable!(),
                };
                total += px * wy * (log2(wy) - log2(cond));
            }
        }
    }
    total
}

fn marginals(book: &Codebook) -> Vec<Vec<f64>> {
    let c = book.size.exact.unwrap();
    let mut m = vec![vec![0.0; book.schedule.alphabet()]; book.n];
    for i in 0..c {
        for (pos, x) in book.codeword(i).into_iter().enumerate() {
            m[pos][x as usize] += 1.0 / c as f64;
        }
    }
    m
}

#[test]
fn deterministic_codewords_carry_nothing() {
    let w = channels::example4();
    let pm = Distribution::point_mass(2, 1);
    let cb = plain(16, &[0.25, 0.25], &[pm.clone(), pm], 3);
    let rep = empirical_bound_report(&w, &cb, &DelaySystem::TotallyAsync { senders: 2 }, None).unwrap();
    for v in &rep.values {
        assert!(v.value.abs() < 1e-12);
    }
}

#[test]
fn iid_codebooks_track_the_analytic_bound() {
    let w = channels::example4();
    let u = Distribution::uniform(2);
    let cb = plain(200, &[0.06, 0.06], &[u.clone(), u], 5);
    let rep = empirical_bound_report(&w, &cb, &DelaySystem::TotallyAsync { senders: 2 }, None).unwrap();
    assert!(rep.exact);
    let v = rep.value(SenderSet::full(2)).unwrap();
    assert!((v - 0.704434).abs() < 0.02, "v = {v}");
    // bounded and monotone
    let a = rep.value(SenderSet::singleton(0)).unwrap();
    let b = rep.value(SenderSet::singleton(1)).unwrap();
    assert!(a <= v + 1e-9 && b <= v + 1e-9);
    assert!(v <= 1.0 + 2.0 + 1e-9);

    let bsc = channels::bsc(0.1).unwrap();
    let cb1 = plain(200, &[0.06], &[Distribution::uniform(2)], 6);
    let v1 = empirical_bound(&bsc, &cb1, &DelaySystem::Fixed { delays: vec![0] }, SenderSet::singleton(0)).unwrap();
    assert!((v1 - 0.531004).abs() < 0.02, "v1 = {v1}");
}

#[test]
fn relative_form_matches_and_splits_even_odd() {
    let w = channels::example4();
    let n = 20;
    let u = Distribution::uniform(2);
    let b = Distribution::bernoulli(0.8).unwrap();
    let cb = plain(n, &[0.3, 0.2], &[u.clone(), b.clone()], 2);
    let ds = DelaySystem::TotallyAsync { senders: 2 };
    let rel = relative_delay_law(&ds, n).unwrap();
    for s in SenderSet::all_nonempty(2) {
        let a = empirical_bound(&w, &cb, &ds, s).unwrap();
        let c = relative_delay_bound(&w, &cb, &rel, s).unwrap();
        assert!((a - c).abs() < 1e-9);
        // dropping the delay from the conditioning can only increase the bound
        assert!(a <= delay_marginalized_bound(&w, &cb, &ds, s).unwrap() + 1e-9);
    }
    assert!(position_independence_tv(&cb, &ds).unwrap() < 1e-12);

    // interleaved codes with even relative delays: average of an even and an odd term
    let half = n / 2;
    let even = Codebook::new(half, 0.4, SymbolSchedule::single(u.clone()), 7, codebook_tag(0, 0)).unwrap();
    let odd = Codebook::new(half, 0.2, SymbolSchedule::single(b.clone()), 7, codebook_tag(0, 1)).unwrap();
    let even2 = Codebook::new(half, 0.3, SymbolSchedule::single(b), 7, codebook_tag(1, 0)).unwrap();
    let odd2 = Codebook::new(half, 0.5, SymbolSchedule::single(u), 7, codebook_tag(1, 1)).unwrap();
    let (me, mo, me2, mo2) = (marginals(&even), marginals(&odd), marginals(&even2), marginals(&odd2));
    let cbi = CodebookSystem::new(
        vec![SenderCode::Interleaved { even, odd }, SenderCode::Interleaved { even: even2, odd: odd2 }],
        7,
        Storage::Auto,
    )
    .unwrap();
    let rel = uniform_relative_law(n, (0..n).step_by(2));
    for s in SenderSet::all_nonempty(2) {
        let v = relative_delay_bound(&w, &cbi, &rel, s).unwrap();
        let mut terms = [0.0; 2];
        for (r, term) in terms.iter_mut().enumerate() {
            for q in 0..half {
                for e in 0..half {
                    let (m1, m2) = if r == 0 { (&me, &me2) } else { (&mo, &mo2) };
                    *term += cmi2(&w, &m1[q], &m2[(q + half - e) % half], s) / (half * half) as f64;
                }
            }
        }
        assert!((v - 0.5 * (terms[0] + terms[1])).abs() < 1e-9);
    }

    // no relative delay: synchronized per-position average
    let zero = uniform_relative_law(n, [0]);
    let ma = marginals(cb.codes[0].codebooks()[0]);
    let mb = marginals(cb.codes[1].codebooks()[0]);
    let s = SenderSet::full(2);
    let direct: f64 = (0..n).map(|q| cmi2(&w, &ma[q], &mb[q], s)).sum::<f64>() / n as f64;
    assert!((relative_delay_bound(&w, &cb, &zero, s).unwrap() - direct).abs() < 1e-9);
}
