use csifb::analog_feedback::{mean_error_full, MmseInterpolator};
use csifb::analytic_bounds::{bound_analog, bound_rvq, bound_tdq_limit, LimitDomain};
use csifb::linalg::{hermitian_eigen, CMatrix, TapDft};
use csifb::quantizers::rvq::RvqCodebook;
use csifb::quantizers::rwf::{round_to_even_bits, rwf_by_distortion, rwf_by_rate};
use csifb::quantizers::suq::suq_quantize;
use csifb::rng::substream;
use csifb::zfbf_rates::zf_beams;
use csifb::ChannelStats;
use num_complex::Complex64;
use proptest::prelude::*;

fn c64() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn dip() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01..1.0f64, 1..8).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn psd(n: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(c64(), n * n).prop_map(move |v| {
        let a = CMatrix::from_vec(n, n, v);
        &a * a.adjoint()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(taps in prop::collection::vec(c64(), 1..6), log_n in 3u32..7) {
        let n = 1usize << log_n;
        let dft = TapDft::new(n, taps.len());
        let mut out = vec![Complex64::default(); n];
        dft.synthesize(&taps, &mut out);
        let e_freq: f64 = out.iter().map(|z| z.norm_sqr()).sum();
        let e_time: f64 = taps.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((e_freq - n as f64 * e_time).abs() <= 1e-9 * e_freq.max(1.0));
    }

    #[test]
    fn frequency_correlation_symmetry(p in dip(), d in -40i64..40) {
        let n = 16;
        let stats = ChannelStats::from_dip(&p, n).unwrap();
        let c = stats.freq_correlation(d);
        prop_assert!((c - stats.freq_correlation(d + n as i64)).norm() < 1e-12);
        prop_assert!((c - stats.freq_correlation(-d).conj()).norm() < 1e-12);
        prop_assert!(c.norm() <= 1.0 + 1e-12);
        prop_assert!((stats.freq_correlation(0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn frequency_covariance_is_psd_with_flat_diagonal(p in dip()) {
        let stats = ChannelStats::from_dip(&p, 16).unwrap();
        let cov = stats.freq_covariance();
        let (vals, _) = hermitian_eigen(&cov);
        prop_assert!(vals.iter().all(|&v| v > -1e-9));
        for i in 0..16 {
            prop_assert!((cov[(i, i)].re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tap_and_full_mmse_agree(p in dip(), log_j in 0u32..5, log_rho in -2.0..4.0f64) {
        let stats = ChannelStats::from_dip(&p, 16).unwrap();
        let j = 1usize << log_j;
        let rho = 10f64.powf(log_rho);
        let a = MmseInterpolator::with_rho(&stats, j, rho).unwrap().mean_error();
        let b = mean_error_full(&stats, j, rho).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * b.max(1e-12), "{a} vs {b}");
    }

    #[test]
    fn rwf_round_trip(vars in prop::collection::vec(0.01..2.0f64, 1..8), frac in 0.01..0.99f64) {
        let total: f64 = vars.iter().sum();
        let d = frac * total;
        let a = rwf_by_distortion(&vars, d).unwrap();
        prop_assert!((a.total_distortion() - d).abs() <= 1e-9 * d);
        let b = rwf_by_rate(&vars, a.total_bits()).unwrap();
        prop_assert!((b.total_distortion() - d).abs() <= 1e-8 * d);
    }

    #[test]
    fn rwf_distortion_is_decreasing_and_convex(vars in prop::collection::vec(0.01..2.0f64, 1..8), r in 0.0..20.0f64, h in 0.05..2.0f64) {
        let d = |x: f64| rwf_by_rate(&vars, x).unwrap().total_distortion();
        let (lo, mid, hi) = (d(r), d(r + h), d(r + 2.0 * h));
        prop_assert!(mid <= lo + 1e-12 && hi <= mid + 1e-12);
        prop_assert!(mid <= 0.5 * (lo + hi) + 1e-12);
    }

    #[test]
    fn even_rounding_respects_budget(bits in prop::collection::vec(0.0..12.0f64, 1..8), budget in 0u32..40) {
        let out = round_to_even_bits(&bits, budget);
        prop_assert_eq!(out.len(), bits.len());
        prop_assert!(out.iter().all(|b| b % 2 == 0));
        prop_assert!(out.iter().sum::<u32>() <= budget);
    }

    #[test]
    fn rvq_ignores_scale_and_phase(h in prop::collection::vec(c64(), 3), s in 0.1..10.0f64, phi in 0.0..std::f64::consts::TAU, seed in 0u64..1000) {
        prop_assume!(h.iter().any(|z| z.norm() > 1e-3));
        let cb = RvqCodebook::random(3, 6, &mut substream(seed, &[])).unwrap();
        let g: Vec<Complex64> = h.iter().map(|z| z * Complex64::from_polar(s, phi)).collect();
        prop_assert_eq!(cb.quantize(&h).unwrap().0, cb.quantize(&g).unwrap().0);
    }

    #[test]
    fn suq_is_odd(re in -5.0..5.0f64, im in -5.0..5.0f64, step in 0.05..2.0f64, log_q in 1u32..6) {
        let q = 1u64 << log_q;
        let x = Complex64::new(re, im);
        // Thresholds sit at multiples of the step for even level counts.
        prop_assume!((re / step).fract().abs() > 1e-9 && (im / step).fract().abs() > 1e-9);
        let a = suq_quantize(x, step, q);
        let b = suq_quantize(-x, step, q);
        prop_assert!((a + b).norm() < 1e-12);
        let top = (q as f64 - 1.0) / 2.0 * step;
        prop_assert!(a.re.abs() <= top + 1e-12 && a.im.abs() <= top + 1e-12);
    }

    #[test]
    fn zero_forcing_nulls_other_users(v in prop::collection::vec(c64(), 12)) {
        let a = CMatrix::from_vec(3, 4, v);
        if let Some(w) = zf_beams(&a) {
            for k in 0..3 {
                prop_assert!((w.column(k).norm() - 1.0).abs() < 1e-9);
                for j in 0..3 {
                    if j != k {
                        let leak = (a.row(j) * w.column(k))[(0, 0)].norm();
                        prop_assert!(leak < 1e-8 * a.row(j).norm().max(1.0), "leak {leak}");
                    }
                }
            }
        }
    }

    #[test]
    fn bounds_grow_with_snr(p in dip(), s in 0.0..30.0f64, ds in 0.1..10.0f64, log_j in 0u32..5) {
        let stats = ChannelStats::from_dip(&p, 16).unwrap();
        let j = 1usize << log_j;
        let (lo, hi) = (10f64.powf(s / 10.0), 10f64.powf((s + ds) / 10.0));
        prop_assert!(bound_analog(&stats, j, 1.0, lo, 4).unwrap() <= bound_analog(&stats, j, 1.0, hi, 4).unwrap() + 1e-12);
        prop_assert!(bound_rvq(&stats, j, 6.0, lo, 4).unwrap() <= bound_rvq(&stats, j, 6.0, hi, 4).unwrap() + 1e-12);
        prop_assert!(bound_tdq_limit(16, 0.1, lo, 4, LimitDomain::TimeTaps) <= bound_tdq_limit(16, 0.1, hi, 4, LimitDomain::TimeTaps));
    }

    #[test]
    fn analog_bound_falls_with_bandwidth(p in dip(), log_j in 0u32..5, beta in 1.0..4.0f64) {
        let stats = ChannelStats::from_dip(&p, 16).unwrap();
        let j = 1usize << log_j;
        prop_assert!(bound_analog(&stats, j, 2.0 * beta, 10.0, 4).unwrap() <= bound_analog(&stats, j, beta, 10.0, 4).unwrap() + 1e-12);
    }

    #[test]
    fn trace_inequality(a in psd(4), b in psd(4)) {
        let tr = (&a * &b).trace().re;
        let (la, _) = hermitian_eigen(&a);
        let (lb, _) = hermitian_eigen(&b);
        let bound: f64 = la.iter().zip(&lb).map(|(x, y)| x * y).sum();
        prop_assert!(tr <= bound * (1.0 + 1e-9) + 1e-9);
    }
}
