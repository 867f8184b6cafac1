//! Quick invariant checks on small sizes.

use csifb::analog_feedback::{mean_error_full, MmseInterpolator};
use csifb::analytic_bounds::{bound_analog, bound_suq, gap_from_error};
use csifb::quantizers::greedy_bit_alloc;
use csifb::quantizers::rvq::RvqCodebook;
use csifb::quantizers::rwf::{rwf_by_distortion, rwf_by_rate};
use csifb::quantizers::suq::design_suq;
use csifb::rng::substream;
use csifb::schemes::PerfectCsit;
use csifb::special::exp_expint_e1;
use csifb::zfbf_rates::mc_rates;
use csifb::ChannelStats;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

pub fn run(seed: u64) -> csifb::Result<Vec<Check>> {
    let dip = [0.5, 0.24, 0.17, 0.06, 0.03];
    let stats = ChannelStats::from_dip(&dip, 16)?;
    let mut out = Vec::new();

    let fc = stats.freq_covariance();
    let diag_ok = (0..16).all(|n| (fc[(n, n)].re - 1.0).abs() < 1e-12);
    out.push(check(
        "freq-covariance-diagonal",
        diag_ok,
        "Σ_H[n,n] = 1".into(),
    ));

    let interp = MmseInterpolator::with_rho(&stats, 8, 10.0)?;
    let full = mean_error_full(&stats, 8, 10.0)?;
    let rel = (interp.mean_error() - full).abs() / full;
    out.push(check(
        "mmse-tap-vs-full",
        rel < 1e-9,
        format!("relative difference {rel:.2e}"),
    ));

    let gap = gap_from_error(10.0, 4, interp.mean_error());
    let bound = bound_analog(&stats, 8, 1.0, 10.0, 4)?;
    out.push(check(
        "analog-bound-dominates",
        gap <= bound + 1e-12,
        format!("gap {gap:.6} <= bound {bound:.6}"),
    ));

    let a = rwf_by_distortion(&dip, 0.2)?;
    let b = rwf_by_rate(&dip, a.total_bits())?;
    let rt = (b.total_distortion() - 0.2).abs();
    out.push(check(
        "rwf-round-trip",
        rt < 1e-9,
        format!("|D(R(D)) - D| = {rt:.2e}"),
    ));

    let d = design_suq(1.0, 2)?;
    let want = 1.0 - 2.0 / std::f64::consts::PI;
    out.push(check(
        "suq-one-bit",
        (d.distortion - want).abs() < 1e-8,
        format!("D = {:.10}", d.distortion),
    ));

    let g = greedy_bit_alloc(&dip, &[1.0; 5], 12, 2)?;
    out.push(check(
        "greedy-budget",
        g.total_bits() <= 12.0 && bound_suq(&g, 10.0, 4) > 0.0,
        format!("{} bits used", g.total_bits()),
    ));

    let mut rng = substream(seed, &[0]);
    let cb = RvqCodebook::random(2, 4, &mut rng)?;
    let norms_ok = (0..cb.len()).all(|i| {
        let n: f64 = cb.codeword(i).iter().map(|c| c.norm_sqr()).sum();
        (n - 1.0).abs() < 1e-12
    });
    out.push(check(
        "rvq-unit-codewords",
        norms_ok,
        format!("{} codewords", cb.len()),
    ));

    let est = mc_rates(&stats, &PerfectCsit, &[10.0], 4, 4, 400, seed)?.remove(0);
    let want = exp_expint_e1(0.4);
    let z = (est.genie_upper_nats - want).abs() / est.genie_stderr.max(1e-12);
    out.push(check(
        "perfect-csit-rate",
        z < 4.0,
        format!(
            "MC {:.4} vs {:.4} nats ({z:.1} standard errors)",
            est.genie_upper_nats, want
        ),
    ));
    Ok(out)
}
