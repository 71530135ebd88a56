use fairmpc::mpc::{
    format_transcript, reconstruct, share, ExecMode, PartyId, Session, SessionConfig, SharedVec,
};
use fairmpc::{Error, FixedCodec, RingElement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn codec() -> FixedCodec {
    FixedCodec::default()
}

fn enc(x: f64) -> RingElement {
    codec().encode(x).unwrap()
}

fn dec(v: &SharedVec) -> Vec<f64> {
    v.reconstruct().unwrap().into_iter().map(|r| codec().decode(r)).collect()
}

fn ints(v: &SharedVec) -> Vec<u64> {
    v.reconstruct().unwrap().into_iter().map(|r| r.0).collect()
}

fn shared(xs: &[f64], rng: &mut ChaCha8Rng) -> SharedVec {
    let enc: Vec<_> = xs.iter().map(|&x| enc(x)).collect();
    SharedVec::share(&enc, rng)
}

#[test]
fn local_ops_send_nothing() {
    let mut s = Session::new(SessionConfig::seeded(1));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = SharedVec::share(&[RingElement(2)], &mut rng);
    let b = SharedVec::share(&[RingElement(3)], &mut rng);
    assert_eq!(ints(&a.add(&b)), vec![5]);

    let x = shared(&[1.5], &mut rng);
    assert_eq!(x.mul_const(2).reconstruct().unwrap(), vec![enc(3.0)]);

    let mut acc = a.clone();
    for _ in 0..100 {
        acc = acc.add(&b).add_const(RingElement(1)).mul_const(1);
    }
    assert_eq!(ints(&acc), vec![2 + 100 * 4]);
    assert_eq!(s.stats().bytes, 0);
    assert_eq!(s.stats().rounds, 0);
    // the session saw nothing
    let _ = s.publish(&SharedVec::zeros(0), "noop");
}

#[test]
fn pi_mul_examples() {
    let mut s = Session::new(SessionConfig::seeded(2));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let six = share(RingElement(6), &mut rng);
    let seven = share(RingElement(7), &mut rng);
    let p = s.pi_mul(&six, &seven, false).unwrap();
    assert_eq!(reconstruct(&p).unwrap(), RingElement(42));
    assert_eq!(s.stats().bytes * 8, 3 * 64);
    assert_eq!(s.stats().rounds, 1);

    let two = share(enc(2.0), &mut rng);
    let three = share(enc(3.0), &mut rng);
    let p = s.pi_mul(&two, &three, true).unwrap();
    let got = reconstruct(&p).unwrap();
    let oracle = codec().clear_fixed_mul(enc(2.0), enc(3.0)).unwrap();
    assert!((got.as_signed() - oracle.as_signed()).abs() <= 1);
    assert_eq!(got, enc(6.0));
}

#[test]
fn pi_mul_matches_clear_oracle() {
    let mut s = Session::new(SessionConfig::seeded(3));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs: Vec<f64> = (0..500).map(|_| rng.gen_range(-1500.0..1500.0)).collect();
    let ys: Vec<f64> = (0..500).map(|_| rng.gen_range(-1500.0..1500.0)).collect();
    let p = s.mul(&shared(&xs, &mut rng), &shared(&ys, &mut rng), true).unwrap();
    let got = p.reconstruct().unwrap();
    for k in 0..xs.len() {
        let oracle = codec().clear_fixed_mul(enc(xs[k]), enc(ys[k])).unwrap();
        assert!((got[k].as_signed() - oracle.as_signed()).abs() <= 1);
    }
}

#[test]
fn pi_gte_examples_and_oracle() {
    let mut s = Session::new(SessionConfig::seeded(4));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let five = share(enc(5.0), &mut rng);
    let three = share(enc(3.0), &mut rng);
    assert_eq!(reconstruct(&s.pi_gte(&five, &three).unwrap()).unwrap(), RingElement(1));
    assert_eq!(reconstruct(&s.pi_gte(&three, &five).unwrap()).unwrap(), RingElement(0));
    let three_b = share(enc(3.0), &mut rng);
    assert_eq!(reconstruct(&s.pi_gte(&three, &three_b).unwrap()).unwrap(), RingElement(1));

    let bound = 1i64 << 61;
    let xs: Vec<i64> = (0..2000).map(|_| rng.gen_range(-bound..bound)).collect();
    let ys: Vec<i64> = (0..2000)
        .map(|i| if i % 10 == 0 { xs[i] } else { rng.gen_range(-bound..bound) })
        .collect();
    let a = SharedVec::share(&xs.iter().map(|&x| RingElement::from_signed(x)).collect::<Vec<_>>(), &mut rng);
    let b = SharedVec::share(&ys.iter().map(|&x| RingElement::from_signed(x)).collect::<Vec<_>>(), &mut rng);
    let got = ints(&s.gte(&a, &b).unwrap());
    for k in 0..xs.len() {
        assert_eq!(got[k], u64::from(xs[k] >= ys[k]));
    }
}

#[test]
fn pi_eq_examples_and_oracle() {
    let mut s = Session::new(SessionConfig::seeded(5));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = share(enc(2.5), &mut rng);
    let b = share(enc(2.5), &mut rng);
    let c = share(enc(2.5) + RingElement(1), &mut rng);
    assert_eq!(reconstruct(&s.pi_eq(&a, &b).unwrap()).unwrap(), RingElement(1));
    assert_eq!(reconstruct(&s.pi_eq(&a, &c).unwrap()).unwrap(), RingElement(0));

    let xs: Vec<u64> = (0..1000).map(|_| rng.gen_range(0..8)).collect();
    let ys: Vec<u64> = (0..1000).map(|_| rng.gen_range(0..8)).collect();
    let mut xs_full = xs.clone();
    let mut ys_full = ys.clone();
    xs_full.extend([u64::MAX, 1 << 63, 0]);
    ys_full.extend([u64::MAX, 0, 1 << 63]);
    let to = |v: &[u64]| v.iter().map(|&x| RingElement(x)).collect::<Vec<_>>();
    let got = ints(&s.eq(&SharedVec::share(&to(&xs_full), &mut rng), &SharedVec::share(&to(&ys_full), &mut rng)).unwrap());
    for k in 0..xs_full.len() {
        assert_eq!(got[k], u64::from(xs_full[k] == ys_full[k]));
    }
}

#[test]
fn pi_div_examples() {
    let mut s = Session::new(SessionConfig::seeded(6));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let q = dec(&s.div(&shared(&[6.0, 1.0, 8.0], &mut rng), &shared(&[2.0, 3.0, 8.0], &mut rng)).unwrap());
    let tol = 2f64.powi(-10);
    assert!((q[0] - 3.0).abs() / 3.0 <= tol, "{}", q[0]);
    assert!((q[1] - 1.0 / 3.0).abs() / (1.0 / 3.0) <= tol, "{}", q[1]);
    assert!((q[2] - 1.0).abs() <= tol, "{}", q[2]);
}

#[test]
fn pi_div_matches_rational_oracle() {
    let mut s = Session::new(SessionConfig::seeded(7));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 400;
    let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5000.0..5000.0)).collect();
    let ys: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..5000.0)).collect();
    let q = dec(&s.div(&shared(&xs, &mut rng), &shared(&ys, &mut rng)).unwrap());
    for k in 0..n {
        // compare against the quotient of the encoded operands
        let exact = codec().decode(enc(xs[k])) / codec().decode(enc(ys[k]));
        let rel = (q[k] - exact).abs() / exact.abs().max(2f64.powi(-9));
        assert!(rel <= 2f64.powi(-10), "{} / {} = {} got {}", xs[k], ys[k], exact, q[k]);
    }
}

#[test]
fn pi_div_rejects_non_positive_divisor_in_validation_mode() {
    let mut s = Session::new(SessionConfig {
        validate: true,
        ..SessionConfig::seeded(8)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = share(enc(1.0), &mut rng);
    let zero = share(enc(0.0), &mut rng);
    let neg = share(enc(-2.0), &mut rng);
    assert!(matches!(s.pi_div(&a, &zero), Err(Error::Undefined(_))));
    assert!(matches!(s.pi_div(&a, &neg), Err(Error::Undefined(_))));

    // without validation the protocol completes obliviously
    let mut quiet = Session::new(SessionConfig::seeded(8));
    assert!(quiet.pi_div(&a, &zero).is_ok());
}

#[test]
fn pi_ln_examples() {
    let mut s = Session::new(SessionConfig::seeded(9));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let out = dec(&s.ln(&shared(&[1.0, std::f64::consts::E, 0.25], &mut rng)).unwrap());
    let tol = 2f64.powi(-8);
    assert!(out[0].abs() <= tol, "{}", out[0]);
    assert!((out[1] - 1.0).abs() <= tol, "{}", out[1]);
    assert!((out[2] + 1.386294).abs() <= tol, "{}", out[2]);
}

#[test]
fn pi_ln_matches_oracle_across_domain() {
    let mut s = Session::new(SessionConfig::seeded(10));
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut xs: Vec<f64> = (0..400).map(|_| 2f64.powf(rng.gen_range(-19.0..41.0))).collect();
    xs.extend([codec().ulp(), 0.5, 0.999_999, 1.0 + codec().ulp(), 2f64.powi(41)]);
    let out = dec(&s.ln(&shared(&xs, &mut rng)).unwrap());
    for k in 0..xs.len() {
        let exact = codec().decode(enc(xs[k])).ln();
        assert!((out[k] - exact).abs() <= 2f64.powi(-8), "ln({}) = {exact}, got {}", xs[k], out[k]);
    }
}

#[test]
fn pi_ln_domain_error_in_validation_mode() {
    let mut s = Session::new(SessionConfig {
        validate: true,
        ..SessionConfig::seeded(11)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    assert!(matches!(s.pi_ln(&share(enc(0.0), &mut rng)), Err(Error::Undefined(_))));
    assert!(matches!(s.pi_ln(&share(enc(-1.0), &mut rng)), Err(Error::Undefined(_))));
}

#[test]
fn gr_random_range_and_mean() {
    let mut s = Session::new(SessionConfig::seeded(12));
    let u = dec(&s.gr_random(-0.5, 0.5, 100_000).unwrap());
    assert!(u.iter().all(|&x| (-0.5..0.5).contains(&x)));
    let mean = u.iter().sum::<f64>() / u.len() as f64;
    assert!(mean.abs() <= 0.005, "mean {mean}");
    assert_eq!(s.stats().rounds, 2);
}

#[test]
fn gr_random_general_interval() {
    let mut s = Session::new(SessionConfig::seeded(13));
    let u = dec(&s.gr_random(2.0, 2.75, 20_000).unwrap());
    assert!(u.iter().all(|&x| (2.0..2.75).contains(&x)));
    let mean = u.iter().sum::<f64>() / u.len() as f64;
    assert!((mean - 2.375).abs() < 0.01);
    assert!(s.gr_random(1.0, 1.0, 1).is_err());
}

#[test]
fn gr_random_resists_one_fixed_party() {
    for party in PartyId::ALL {
        let mut s = Session::new(SessionConfig::seeded(14));
        s.set_random_bits_override(Some((party, 0)));
        let u = dec(&s.gr_random(-0.5, 0.5, 20_000).unwrap());
        // chi-square over 16 equal-width bins
        let mut bins = [0f64; 16];
        for x in &u {
            bins[((x + 0.5) * 16.0) as usize] += 1.0;
        }
        let expected = u.len() as f64 / 16.0;
        let chi2: f64 = bins.iter().map(|c| (c - expected).powi(2) / expected).sum();
        assert!(chi2 < 37.7, "party {party}: chi2 {chi2}");
    }
}

fn laplace_cdf(x: f64, b: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / b).exp()
    } else {
        1.0 - 0.5 * (-x / b).exp()
    }
}

fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn pi_lap_distribution() {
    let mut s = Session::new(SessionConfig::seeded(15));
    let mut x = dec(&s.lap(1.0, 10_000).unwrap());
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    assert!(mean.abs() <= 0.05, "mean {mean}");
    let ks = ks_distance(&mut x, |v| laplace_cdf(v, 1.0));
    assert!(ks <= 0.02, "ks {ks}");
}

#[test]
fn pi_lap_scale_ratio() {
    let mut s = Session::new(SessionConfig::seeded(16));
    let mad = |v: Vec<f64>| v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64;
    let small = mad(dec(&s.lap(0.5, 10_000).unwrap()));
    let large = mad(dec(&s.lap(2.0, 10_000).unwrap()));
    let ratio = large / small;
    assert!((ratio - 4.0).abs() <= 0.4, "ratio {ratio}");
    assert!(s.lap(0.0, 1).is_err());
}

#[test]
fn lap_direct_decomposition() {
    let mut s = Session::new(SessionConfig::seeded(17));
    s.lap(1.0, 10).unwrap();
    let c = s.counts();
    assert_eq!(c.direct_of("lap"), 10);
    assert_eq!(c.direct_of("gr_random"), 10);
    assert_eq!(c.direct_of("gte"), 10);
    assert_eq!(c.direct_of("mul"), 20);
    assert_eq!(c.direct_of("ln"), 10);
}

#[test]
fn sessions_are_deterministic_across_exec_modes() {
    let run = |mode: ExecMode| {
        let mut s = Session::new(SessionConfig {
            mode,
            record_transcript: true,
            ..SessionConfig::seeded(18)
        });
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let a = shared(&[3.0, 7.5], &mut rng);
        let b = shared(&[2.0, 0.5], &mut rng);
        let q = s.div(&a, &b).unwrap();
        let n = s.lap(1.0, 3).unwrap();
        let out = s.publish(&SharedVec::concat(&[&q, &n]), "out").unwrap();
        (out, s.stats().clone(), format_transcript(s.transcript().unwrap()))
    };
    let a = run(ExecMode::Lockstep);
    let b = run(ExecMode::Lockstep);
    let c = run(ExecMode::Threaded);
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert!(!a.2.is_empty());
}

#[test]
fn comm_bytes_equal_transcript_sum() {
    let mut s = Session::new(SessionConfig {
        record_transcript: true,
        ..SessionConfig::seeded(19)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let a = shared(&[1.0, 2.0, 3.0], &mut rng);
    s.mul(&a, &a, true).unwrap();
    s.gte(&a, &a).unwrap();
    s.ln(&a).unwrap();
    let sum: u64 = s.transcript().unwrap().iter().map(|e| e.bytes).sum();
    assert_eq!(sum, s.stats().bytes);
    let last_round = s.transcript().unwrap().last().unwrap().round;
    assert_eq!(last_round + 1, s.stats().rounds);
    assert_eq!(s.audit().total(), 0);
    assert_eq!(s.pending_messages(), 0);
}
