//! The inversive generator x -> a/x + b on Z_{p^e}, its companion linear
//! recurrence, and exact orbit measurement.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::ring::{Modulus, RingElem};

/// Generator parameters (a, b) over a fixed modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    m: Modulus,
    a: RingElem,
    b: RingElem,
}

/// Exact pre-period and period of an orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodInfo {
    pub pre_period: u64,
    pub period: u64,
}

impl Params {
    pub fn new(m: Modulus, a: u64, b: u64) -> Params {
        Params { m, a: m.elem(a), b: m.elem(b) }
    }

    pub fn modulus(&self) -> &Modulus {
        &self.m
    }

    pub fn a(&self) -> RingElem {
        self.a
    }

    pub fn b(&self) -> RingElem {
        self.b
    }

    /// One step: a * x^-1 + b on units, b on the rest.
    pub fn step(&self, x: RingElem) -> RingElem {
        match self.m.inverse(x) {
            Ok(inv) => self.m.add(self.m.mul(self.a, inv), self.b),
            Err(_) => self.b,
        }
    }

    /// x0, f(x0), f(f(x0)), ...
    pub fn orbit_iter(&self, x0: RingElem) -> impl Iterator<Item = RingElem> + '_ {
        std::iter::successors(Some(x0), move |&x| Some(self.step(x)))
    }

    pub fn orbit(&self, x0: RingElem, n: usize) -> Vec<RingElem> {
        self.orbit_iter(x0).take(n).collect()
    }

    /// The companion recurrence y_{n+2} = b*y_{n+1} + a*y_n seeded with
    /// (y0, y1) = (1, x0); while its terms stay units, x_n = y_{n+1} / y_n.
    pub fn companion_iter(&self, x0: RingElem) -> impl Iterator<Item = RingElem> + '_ {
        let mut state = (self.m.one(), x0);
        std::iter::from_fn(move || {
            let out = state.0;
            state = (state.1, self.m.add(self.m.mul(self.b, state.1), self.m.mul(self.a, state.0)));
            Some(out)
        })
    }

    pub fn companion(&self, x0: RingElem, n: usize) -> Vec<RingElem> {
        self.companion_iter(x0).take(n).collect()
    }

    /// Walks the orbit with a first-visit map, so memory is proportional to
    /// pre-period + period.
    pub fn measure_period(&self, x0: RingElem) -> PeriodInfo {
        let mut first_seen = HashMap::new();
        let mut x = x0;
        for n in 0u64.. {
            match first_seen.entry(x.value()) {
                std::collections::hash_map::Entry::Occupied(hit) => {
                    let start = *hit.get();
                    return PeriodInfo { pre_period: start, period: n - start };
                }
                std::collections::hash_map::Entry::Vacant(slot) => {
                    slot.insert(n);
                }
            }
            x = self.step(x);
        }
        unreachable!()
    }
}
