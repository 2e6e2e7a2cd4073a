//! Exhaustive check of the emulated operators on small formats against exact
//! rational arithmetic rounded once.

use permfilter::fp::{q_add, q_div, q_mul, q_sub, FpFormat, RoundingMode};

/// All values of `fmt` as integers `n` with value `n * 2^(emin - m)`.
fn enumerate(fmt: &FpFormat) -> Vec<i128> {
    let m = fmt.mant_bits as i32;
    let emin = fmt.min_exponent();
    let emax = fmt.max_exponent();
    let mut out = vec![0i128];
    if !fmt.flush_denormals {
        for k in 1..(1i128 << m) {
            out.push(k);
            out.push(-k);
        }
    }
    for e in emin..=emax {
        for k in 0..(1i128 << m) {
            let n = ((1i128 << m) + k) << (e - emin);
            out.push(n);
            out.push(-n);
        }
    }
    out
}

fn pow2(k: i32) -> f64 {
    2f64.powi(k)
}

/// Rounds `num / den * 2^scale` (den > 0) into `fmt` using integer arithmetic only.
fn round_rational(num: i128, den: i128, scale: i32, fmt: &FpFormat) -> f64 {
    assert!(den > 0);
    if num == 0 {
        return 0.0;
    }
    let neg = num < 0;
    let mag = num.abs();
    let m = fmt.mant_bits as i32;
    let emin = fmt.min_exponent();
    // Compare mag * 2^scale against den * 2^e.
    let ge_pow2 = |e: i32| -> bool {
        let sh = scale - e;
        if sh >= 0 {
            (mag << sh) >= den
        } else {
            mag >= (den << -sh)
        }
    };
    let bitlen = |v: i128| 128 - v.leading_zeros() as i32;
    let mut e = bitlen(mag) - bitlen(den) + scale - 1;
    while ge_pow2(e + 1) {
        e += 1;
    }
    assert!(ge_pow2(e), "exponent search window too small");
    let sign = if neg { -1.0 } else { 1.0 };
    if fmt.flush_denormals && e < emin {
        return 0.0 * sign;
    }
    let qe = e.max(emin) - m;
    let sh = scale - qe;
    let (n, d) = if sh >= 0 {
        (mag << sh, den)
    } else {
        (mag, den << -sh)
    };
    let mut k = n / d;
    let rem = n % d;
    match fmt.rounding {
        RoundingMode::Nearest => {
            if 2 * rem > d || (2 * rem == d && k % 2 == 1) {
                k += 1;
            }
        }
        RoundingMode::Truncate => {}
    }
    let mut v = k as f64 * pow2(qe);
    if fmt.flush_denormals && v != 0.0 && v < fmt.min_normal() {
        v = 0.0;
    }
    sign * v.min(fmt.max_finite())
}

fn check_format(fmt: FpFormat) {
    let values = enumerate(&fmt);
    let lsb = fmt.min_exponent() - fmt.mant_bits as i32;
    let to_f64 = |n: i128| n as f64 * pow2(lsb);
    let mut checked = 0usize;
    for &na in &values {
        let a = to_f64(na);
        assert!(
            fmt.is_representable(a),
            "{fmt}: {a} should be representable"
        );
        for &nb in &values {
            let b = to_f64(nb);
            let add = round_rational(na + nb, 1, lsb, &fmt);
            assert_eq!(q_add(a, b, &fmt), add, "{fmt} {a} + {b}");
            let sub = round_rational(na - nb, 1, lsb, &fmt);
            assert_eq!(q_sub(a, b, &fmt), sub, "{fmt} {a} - {b}");
            let mul = round_rational(na * nb, 1, 2 * lsb, &fmt);
            assert_eq!(q_mul(a, b, &fmt), mul, "{fmt} {a} * {b}");
            if nb != 0 {
                let (num, den) = if nb < 0 { (-na, -nb) } else { (na, nb) };
                let div = round_rational(num, den, 0, &fmt);
                assert_eq!(q_div(a, b, &fmt).unwrap(), div, "{fmt} {a} / {b}");
            }
            checked += 1;
        }
    }
    assert_eq!(checked, values.len() * values.len());
}

#[test]
fn single_rounding_nearest_flush() {
    for (e, m) in [(2, 1), (3, 2), (3, 3), (4, 4)] {
        check_format(FpFormat::new(e, m).unwrap());
    }
}

#[test]
fn single_rounding_nearest_with_denormals() {
    for (e, m) in [(2, 2), (3, 3), (4, 4)] {
        check_format(FpFormat::new(e, m).unwrap().with_denormals(true));
    }
}

#[test]
fn single_rounding_truncate() {
    for (e, m) in [(3, 2), (3, 4)] {
        let fmt = FpFormat::new(e, m)
            .unwrap()
            .with_rounding(RoundingMode::Truncate);
        check_format(fmt);
        check_format(fmt.with_denormals(true));
    }
}

#[test]
fn quantize_matches_oracle_on_random_doubles() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let formats = [
        FpFormat::FP24,
        FpFormat::HALF,
        FpFormat::new(6, 10).unwrap().with_denormals(true),
        FpFormat::new(8, 23)
            .unwrap()
            .with_rounding(RoundingMode::Truncate),
    ];
    for _ in 0..20_000 {
        let mant: i64 = rng.gen_range(1..(1i64 << 53));
        let exp: i32 = rng.gen_range(-100..20);
        let x = mant as f64 * pow2(exp - 52) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        for fmt in &formats {
            let expected = round_rational((mant as i128) * x.signum() as i128, 1, exp - 52, fmt);
            assert_eq!(fmt.quantize(x).unwrap(), expected, "{fmt} {x:e}");
        }
    }
}
