//! Bulk request sampling.

use super::{Catalog, RateSchedule};
use crate::rng;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

/// Streams `(flow, union item index)` pairs from a catalog, following the
/// static mixing probabilities or a cyclic [`RateSchedule`].
///
/// A sampler owns one RNG stream; independent streams (other seeds or
/// stream ids) are independent, so sweeps parallelize without sharing.
pub struct RequestSampler<'a> {
    catalog: &'a Catalog,
    schedule: Option<&'a RateSchedule>,
    rng: ChaCha12Rng,
    nu_cum: Vec<f64>,
    segment: usize,
    left_in_segment: u64,
}

impl<'a> RequestSampler<'a> {
    pub fn new(
        catalog: &'a Catalog,
        schedule: Option<&'a RateSchedule>,
        seed: u64,
        stream: u64,
    ) -> crate::Result<Self> {
        if let Some(sch) = schedule {
            sch.validate(catalog.n_flows())?;
        }
        let mut sampler = RequestSampler {
            catalog,
            schedule,
            rng: rng::stream_rng(seed, rng::STREAM_REQUESTS.wrapping_add(stream)),
            nu_cum: Vec::new(),
            segment: 0,
            left_in_segment: u64::MAX,
        };
        match schedule {
            Some(sch) => {
                sampler.left_in_segment = sch.segments[0].0;
                sampler.set_nus(&sch.segments[0].1.clone());
            }
            None => {
                let nus = catalog.nus();
                sampler.set_nus(&nus);
            }
        }
        Ok(sampler)
    }

    fn set_nus(&mut self, nus: &[f64]) {
        self.nu_cum.clear();
        let mut acc = 0.0;
        for &nu in nus {
            acc += nu;
            self.nu_cum.push(acc);
        }
    }

    /// Mixing probabilities in effect for the next request.
    pub fn current_nus(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.nu_cum
            .iter()
            .map(|&c| {
                let nu = c - prev;
                prev = c;
                nu
            })
            .collect()
    }

    #[inline]
    pub fn next_request(&mut self) -> (u16, u32) {
        if let Some(sch) = self.schedule {
            if self.left_in_segment == 0 {
                self.segment = (self.segment + 1) % sch.segments.len();
                let (len, nus) = &sch.segments[self.segment];
                self.left_in_segment = *len;
                let nus = nus.clone();
                self.set_nus(&nus);
            }
            self.left_in_segment -= 1;
        }
        let u: f64 = self.rng.gen();
        let mut flow = self.nu_cum.len() - 1;
        for (k, &c) in self.nu_cum.iter().enumerate() {
            if u < c {
                flow = k;
                break;
            }
        }
        let v: f64 = self.rng.gen();
        (flow as u16, self.catalog.sample_flow_item(flow, v))
    }
}
