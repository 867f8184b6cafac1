//! Grid sweeps over schemes, budgets and SNRs.

use crate::config::{db_to_linear, Allocation, ExperimentConfig, Scheme};
use csifb::analog_feedback::MmseInterpolator;
use csifb::analytic_bounds::{
    analog_budget_choice, bound_analog_spectrum, bound_rvq, bound_rvq_budget, bound_suq,
    budget_to_bits, gap_from_error, nats_to_bits, sum_rate_lower, tdq_limit_gap_for_rate,
    AnalogSpectrum, BudgetKind, FeedbackBudget,
};
use csifb::quantizers::rwf::{round_to_even_bits, weighted_rwf_by_rate};
use csifb::quantizers::suq::suq_allocation;
use csifb::quantizers::tdq::coefficient_stats;
use csifb::quantizers::{greedy_bit_alloc, BitAllocation, Domain, TdqQuantizer};
use csifb::rng::derive_seed;
use csifb::schemes::{AnalogCsit, RvqCsit, TdqCsit};
use csifb::zfbf_rates::{mc_rates, perfect_csit_rate, CsitSource};
use csifb::ChannelStats;
use rayon::prelude::*;

/// Which parts of a cell to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mode {
    pub analytic: bool,
    pub monte_carlo: bool,
}

impl Mode {
    pub const BOUNDS: Mode = Mode {
        analytic: true,
        monte_carlo: false,
    };
    pub const SIMULATE: Mode = Mode {
        analytic: false,
        monte_carlo: true,
    };
    pub const SWEEP: Mode = Mode {
        analytic: true,
        monte_carlo: true,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Zero feedback: no CSIT, so no simulation.
    NoFeedback,
    /// RVQ would need more bits per subcarrier than the codebook cap.
    RvqBitsOverCap,
    /// The scheme needs a channel model the preset does not have.
    Unsupported,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NoFeedback => "no-feedback",
            Status::RvqBitsOverCap => "rvq-bits-over-cap",
            Status::Unsupported => "unsupported",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Status::Ok,
            Status::NoFeedback,
            Status::RvqBitsOverCap,
            Status::Unsupported,
        ]
        .into_iter()
        .find(|x| x.as_str() == s)
    }
}

/// One output row. Rates are sum rates in bits per channel use per
/// subcarrier; gaps are per user.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub scheme: Scheme,
    pub alpha_fb: f64,
    pub snr_db: f64,
    pub j: Option<usize>,
    pub b_tot_bits: Option<f64>,
    pub rate_lower_bits: Option<f64>,
    pub rate_genie_upper_bits: Option<f64>,
    pub analytic_gap_bits: Option<f64>,
    pub rate_csit_bits: f64,
    pub n_trials: usize,
    /// Standard error of `mc_gap_bits`.
    pub stderr_bits: Option<f64>,
    pub seed: u64,
    pub mc_gap_bits: Option<f64>,
    pub status: Status,
}

/// Everything a cell needs besides its coordinates.
struct Context<'a> {
    cfg: &'a ExperimentConfig,
    stats: ChannelStats,
    n_trials: usize,
}

/// Runs every (scheme, α_fb, SNR) cell. Output order is scheme (in config
/// order), then α_fb, then SNR, independent of the thread count.
pub fn run_sweep(cfg: &ExperimentConfig, mode: Mode) -> anyhow::Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let ctx = Context {
        cfg,
        stats: cfg.channel.build(cfg.n)?,
        n_trials: cfg.n_trials,
    };
    let mut cells = Vec::new();
    for &scheme in &cfg.schemes {
        for (ai, &alpha) in cfg.alpha_fb_grid.iter().enumerate() {
            for (si, &snr_db) in cfg.snr_db_grid.iter().enumerate() {
                let seed = derive_seed(cfg.master_seed, &[scheme.index(), ai as u64, si as u64]);
                cells.push((scheme, alpha, snr_db, seed));
            }
        }
    }
    cells
        .par_iter()
        .map(|&(scheme, alpha, snr_db, seed)| {
            let rec = evaluate_cell(&ctx, scheme, alpha, snr_db, seed, mode)?;
            log::info!(
                "{} alpha={} snr={}dB status={}",
                scheme.name(),
                alpha,
                snr_db,
                rec.status.as_str()
            );
            Ok(rec)
        })
        .collect()
}

/// Feedback realized for one cell: the CSIT generator plus what the
/// analytic side knows about it.
struct Plan {
    j: Option<usize>,
    b_tot_bits: Option<f64>,
    gap_nats: f64,
    source: Option<Box<dyn CsitSource>>,
    status: Status,
}

fn evaluate_cell(
    ctx: &Context,
    scheme: Scheme,
    alpha: f64,
    snr_db: f64,
    seed: u64,
    mode: Mode,
) -> anyhow::Result<SweepRecord> {
    let cfg = ctx.cfg;
    let (m, k) = (cfg.m, cfg.k);
    let snr = db_to_linear(snr_db);
    let s2 = ctx.stats.sigma_h_total();
    let csit_rate = perfect_csit_rate(snr, m, s2);
    let plan = plan_cell(ctx, scheme, alpha, snr)?;

    let mut rec = SweepRecord {
        scheme,
        alpha_fb: alpha,
        snr_db,
        j: plan.j,
        b_tot_bits: plan.b_tot_bits,
        rate_lower_bits: None,
        rate_genie_upper_bits: None,
        analytic_gap_bits: None,
        rate_csit_bits: nats_to_bits(k as f64 * csit_rate),
        n_trials: 0,
        stderr_bits: None,
        seed,
        mc_gap_bits: None,
        status: plan.status,
    };
    if plan.status == Status::Unsupported {
        return Ok(rec);
    }
    if mode.analytic {
        rec.analytic_gap_bits = Some(nats_to_bits(plan.gap_nats));
        rec.rate_lower_bits = Some(nats_to_bits(sum_rate_lower(s2, snr, m, k, plan.gap_nats)));
    }
    if mode.monte_carlo {
        if let Some(src) = plan.source.as_deref() {
            let est = mc_rates(&ctx.stats, src, &[snr], m, k, ctx.n_trials, seed)?.remove(0);
            if est.degenerate_fraction > 0.0 {
                log::warn!(
                    "{} alpha={} snr={}dB: {:.3}% degenerate subcarriers",
                    scheme.name(),
                    alpha,
                    snr_db,
                    100.0 * est.degenerate_fraction
                );
            }
            rec.n_trials = est.n_trials;
            rec.rate_genie_upper_bits = Some(nats_to_bits(k as f64 * est.genie_upper_nats));
            rec.mc_gap_bits = Some(nats_to_bits(est.gap_nats));
            rec.stderr_bits = Some(nats_to_bits(est.stderr));
            if !mode.analytic {
                rec.rate_lower_bits = Some(nats_to_bits(k as f64 * est.lower_nats.max(0.0)));
            }
        }
    }
    Ok(rec)
}

fn plan_cell(ctx: &Context, scheme: Scheme, alpha: f64, snr: f64) -> anyhow::Result<Plan> {
    let cfg = ctx.cfg;
    let stats = &ctx.stats;
    let m = cfg.m;
    let no_feedback = |b_tot_bits: Option<f64>| Plan {
        j: None,
        b_tot_bits,
        gap_nats: gap_from_error(snr, m, stats.sigma_h_total()),
        source: None,
        status: Status::NoFeedback,
    };
    match scheme {
        Scheme::Analog => {
            if alpha < 1.0 {
                return Ok(no_feedback(None));
            }
            let choice = analog_budget_choice(stats, alpha, snr, m, &cfg.analog_j_grid())?;
            let snr_fb = cfg.analog.snr_fb_db.map_or(snr, db_to_linear);
            let interp = MmseInterpolator::with_rho(stats, choice.j, choice.beta * snr_fb)?;
            // The bound uses the downlink SNR as the feedback SNR; recompute
            // it when they differ.
            let gap = if cfg.analog.snr_fb_db.is_some() {
                analog_gap_with_rho(stats, choice.j, choice.beta * snr_fb, snr, m)?
            } else {
                choice.gap
            };
            Ok(Plan {
                j: Some(choice.j),
                b_tot_bits: None,
                gap_nats: gap,
                source: Some(Box::new(AnalogCsit { interp })),
                status: Status::Ok,
            })
        }
        Scheme::Rvq => {
            let b_tot = budget_to_bits(&FeedbackBudget::new(alpha, m, snr, BudgetKind::Rvq)?)?;
            let choice = bound_rvq_budget(stats, alpha, snr, m, &cfg.rvq_j_grid())?;
            let bits = (b_tot / choice.best_j as f64 + 1e-9).floor();
            let over = bits > cfg.rvq.b_cap as f64;
            // J comes from the budgeted bound; the reported gap is the bound
            // for the integer codebook size actually simulated.
            let gap = if over {
                choice.gap
            } else {
                bound_rvq(stats, choice.best_j, bits, snr, m)?
            };
            Ok(Plan {
                j: Some(choice.best_j),
                b_tot_bits: Some(b_tot),
                gap_nats: gap,
                source: (!over).then(|| {
                    Box::new(RvqCsit {
                        j: choice.best_j,
                        bits: bits as u32,
                        cap: cfg.rvq.b_cap,
                    }) as Box<dyn CsitSource>
                }),
                status: if over {
                    Status::RvqBitsOverCap
                } else {
                    Status::Ok
                },
            })
        }
        Scheme::TdqLimit => {
            let b_tot = digital_bits(alpha, m, snr)?;
            let rate = b_tot / m as f64;
            let (vars, weights) = coefficient_stats(stats, Domain::TimeTaps)?;
            let gap = tdq_limit_gap_for_rate(&vars, &weights, rate, snr, m)?;
            if b_tot == 0.0 {
                return Ok(no_feedback(Some(0.0)));
            }
            let alloc = weighted_rwf_by_rate(&vars, &weights, rate)?;
            let quantizer = TdqQuantizer::new(stats, Domain::TimeTaps, alloc)?;
            Ok(Plan {
                j: None,
                b_tot_bits: Some(b_tot),
                gap_nats: gap,
                source: Some(Box::new(TdqCsit { quantizer })),
                status: Status::Ok,
            })
        }
        Scheme::TdqSuqRwf => digital_plan(stats, Domain::TimeTaps, Allocation::Rwf, alpha, snr, m),
        Scheme::TdqSuqGreedy => {
            digital_plan(stats, Domain::TimeTaps, Allocation::Greedy, alpha, snr, m)
        }
        Scheme::KlSuq => digital_plan(
            stats,
            Domain::KlCoeffs,
            cfg.kl_suq.allocation,
            alpha,
            snr,
            m,
        ),
        Scheme::PhysTq => {
            if stats.physical().is_none() {
                return Ok(Plan {
                    j: None,
                    b_tot_bits: None,
                    gap_nats: f64::NAN,
                    source: None,
                    status: Status::Unsupported,
                });
            }
            digital_plan(
                stats,
                Domain::PhysPaths,
                cfg.phys_tq.allocation,
                alpha,
                snr,
                m,
            )
        }
    }
}

fn digital_bits(alpha: f64, m: usize, snr: f64) -> anyhow::Result<f64> {
    Ok(budget_to_bits(&FeedbackBudget::new(
        alpha,
        m,
        snr,
        BudgetKind::Digital,
    )?)?)
}

/// Integer bit allocation per antenna for scalar quantization in `domain`.
pub fn suq_plan_allocation(
    stats: &ChannelStats,
    domain: Domain,
    allocation: Allocation,
    bits_per_antenna: u32,
) -> csifb::Result<BitAllocation> {
    let (vars, weights) = coefficient_stats(stats, domain)?;
    match allocation {
        Allocation::Rwf => {
            let real = weighted_rwf_by_rate(&vars, &weights, bits_per_antenna as f64)?;
            let bits = round_to_even_bits(&real.bits, bits_per_antenna);
            suq_allocation(&vars, &weights, &bits)
        }
        Allocation::Greedy => greedy_bit_alloc(&vars, &weights, bits_per_antenna, 2),
    }
}

fn digital_plan(
    stats: &ChannelStats,
    domain: Domain,
    allocation: Allocation,
    alpha: f64,
    snr: f64,
    m: usize,
) -> anyhow::Result<Plan> {
    let b_tot = digital_bits(alpha, m, snr)?;
    let per_antenna = (b_tot / m as f64 + 1e-9).floor() as u32;
    let alloc = suq_plan_allocation(stats, domain, allocation, per_antenna)?;
    let gap = bound_suq(&alloc, snr, m);
    if alloc.total_bits() == 0.0 {
        return Ok(Plan {
            j: None,
            b_tot_bits: Some(b_tot),
            gap_nats: gap,
            source: None,
            status: Status::NoFeedback,
        });
    }
    let quantizer = TdqQuantizer::new(stats, domain, alloc)?;
    Ok(Plan {
        j: None,
        b_tot_bits: Some(b_tot),
        gap_nats: gap,
        source: Some(Box::new(TdqCsit { quantizer })),
        status: Status::Ok,
    })
}

/// Analog bound with an explicit feedback SNR `rho = β snr_fb`, which may
/// differ from the downlink SNR.
fn analog_gap_with_rho(
    stats: &ChannelStats,
    j: usize,
    rho: f64,
    snr: f64,
    m: usize,
) -> anyhow::Result<f64> {
    let sp = AnalogSpectrum::new(stats, j)?;
    Ok(bound_analog_spectrum(
        &sp,
        stats.n_subcarriers(),
        rho / snr,
        snr,
        m,
    ))
}
