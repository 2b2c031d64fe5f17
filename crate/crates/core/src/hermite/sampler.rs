use alloc::vec::Vec;

use rand::Rng;

use crate::error::Error;
use crate::poisson::sample_poisson;
use crate::sample::BivariateSample;

use super::{poisson_decomposition, BHParams, PACKETS};

/// Draw `n` iid pairs from the distribution.
///
/// Each pair is `sum (j, k) * N_jk` over the Poisson packets. Per pair the
/// packets are visited in [`PACKETS`] order and one Poisson variate is
/// drawn for every packet with a positive rate, so the generator stream is
/// consumed identically on every platform. Fails when the parameters have
/// a negative packet rate.
pub fn sample_bhd<R: Rng + ?Sized>(p: &BHParams, n: usize, rng: &mut R) -> Result<BivariateSample, Error> {
    let d = poisson_decomposition(p).require_representable()?;
    let packets: Vec<((u8, u8), f64)> = PACKETS
        .iter()
        .copied()
        .zip(d.coefficients().iter().copied())
        .filter(|&(_, c)| c > 0.0)
        .collect();
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let (mut x, mut y) = (0u64, 0u64);
        for &((j, k), rate) in &packets {
            let m = sample_poisson(rng, rate);
            x += j as u64 * m;
            y += k as u64 * m;
        }
        pairs.push((x as u32, y as u32));
    }
    BivariateSample::new(pairs)
}
