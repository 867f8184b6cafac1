//! Greedy integer bit allocation for scalar uniform quantizers.

use super::suq::{design_suq, suq_allocation, MAX_SUQ_BITS};
use super::BitAllocation;
use crate::error::{Error, Result};

/// Hands out `step` bits at a time to the coefficient whose weighted
/// distortion `w_l D_l` drops the most, until fewer than `step` bits remain
/// or no grant helps. Ties go to the lowest index.
pub fn greedy_bit_alloc(
    vars: &[f64],
    weights: &[f64],
    b_tot: u32,
    step: u32,
) -> Result<BitAllocation> {
    if vars.len() != weights.len() {
        return Err(Error::Dimension(
            "weights and variances differ in length".into(),
        ));
    }
    if step == 0 || !step.is_multiple_of(2) {
        return Err(Error::OutOfRange(format!(
            "grant size {step} must be even and positive"
        )));
    }
    let mut bits = vec![0u32; vars.len()];
    let mut dist: Vec<f64> = vars.to_vec();
    let mut left = b_tot;
    while left >= step {
        let mut best: Option<(usize, f64, f64)> = None;
        for l in 0..vars.len() {
            let next = bits[l] + step;
            if next > MAX_SUQ_BITS {
                continue;
            }
            let d = design_suq(vars[l], next)?.distortion;
            let gain = weights[l] * (dist[l] - d);
            if best.is_none_or(|(_, g, _)| gain > g) {
                best = Some((l, gain, d));
            }
        }
        match best {
            Some((l, gain, d)) if gain > 0.0 => {
                bits[l] += step;
                dist[l] = d;
                left -= step;
            }
            _ => break,
        }
    }
    suq_allocation(vars, weights, &bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIP: [f64; 5] = [0.5, 0.24, 0.17, 0.06, 0.03];

    #[test]
    fn zero_budget() {
        let a = greedy_bit_alloc(&DIP, &[1.0; 5], 0, 2).unwrap();
        assert!(a.bits.iter().all(|&b| b == 0.0));
        assert!((a.total_distortion() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_inputs_split_evenly() {
        let a = greedy_bit_alloc(&[0.2; 4], &[1.0; 4], 8, 2).unwrap();
        assert_eq!(a.bits, vec![2.0; 4]);
        let b = greedy_bit_alloc(&[0.2; 4], &[1.0; 4], 6, 2).unwrap();
        assert_eq!(b.bits, vec![2.0, 2.0, 2.0, 0.0]);
    }

    #[test]
    fn respects_budget_and_parity() {
        let a = greedy_bit_alloc(&DIP, &[1.0; 5], 21, 2).unwrap();
        assert_eq!(a.total_bits(), 20.0);
        assert!(greedy_bit_alloc(&DIP, &[1.0; 5], 20, 3).is_err());
        assert!(greedy_bit_alloc(&DIP, &[1.0; 4], 20, 2).is_err());
    }

    #[test]
    fn zero_variance_gets_nothing() {
        let a = greedy_bit_alloc(&[1.0, 0.0], &[1.0, 1.0], 400, 2).unwrap();
        assert_eq!(a.bits[1], 0.0);
        assert_eq!(a.bits[0], MAX_SUQ_BITS as f64);
    }
}
