use crate::error::{Error, Result};

/// Controls the escalation ladder for certified decisions.
///
/// Every certified comparison, floor, or sign query starts at `initial_bits`
/// and, while the enclosures are too wide to decide, multiplies the working
/// precision by `escalation_num / escalation_den` (rounding up) until it
/// exceeds `max_bits`.  Running out of the ladder turns the last
/// "not separated" failure into `PrecisionExhausted`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub initial_bits: u32,
    pub escalation_num: u32,
    pub escalation_den: u32,
    pub max_bits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            initial_bits: 256,
            escalation_num: 2,
            escalation_den: 1,
            max_bits: 1 << 20,
        }
    }
}

impl PrecisionPolicy {
    pub fn new(initial_bits: u32, escalation_num: u32, escalation_den: u32, max_bits: u32) -> Result<Self> {
        if initial_bits < 8 {
            return Err(Error::ConfigInvalid("initial precision must be at least 8 bits".into()));
        }
        if escalation_den == 0 || escalation_num <= escalation_den {
            return Err(Error::ConfigInvalid(
                "escalation factor must be a ratio strictly greater than 1".into(),
            ));
        }
        if max_bits < initial_bits {
            return Err(Error::ConfigInvalid("maximum precision below initial precision".into()));
        }
        Ok(PrecisionPolicy { initial_bits, escalation_num, escalation_den, max_bits })
    }

    /// Same ladder but starting no lower than `bits`.
    pub fn starting_at(&self, bits: u32) -> Self {
        PrecisionPolicy {
            initial_bits: self.initial_bits.max(bits),
            max_bits: self.max_bits.max(bits),
            ..self.clone()
        }
    }

    /// The precisions the ladder will visit, in order.
    pub fn precisions(&self) -> impl Iterator<Item = u32> + '_ {
        let mut next = Some(self.initial_bits.min(self.max_bits));
        std::iter::from_fn(move || {
            let cur = next?;
            let stepped = (cur as u64 * self.escalation_num as u64).div_ceil(self.escalation_den as u64);
            let stepped = stepped.min(u32::MAX as u64) as u32;
            next = if cur >= self.max_bits {
                None
            } else {
                Some(stepped.min(self.max_bits))
            };
            Some(cur)
        })
    }

    /// Run `f` at each precision of the ladder until it either succeeds or
    /// fails with a non-retryable error.  A final retryable failure is
    /// converted into `PrecisionExhausted` carrying the failing context.
    pub fn run<T>(&self, mut f: impl FnMut(u32) -> Result<T>) -> Result<T> {
        let mut last_bits = self.initial_bits;
        let mut last_context = String::new();
        for bits in self.precisions() {
            last_bits = bits;
            match f(bits) {
                Ok(v) => return Ok(v),
                Err(Error::NotSeparated { context }) => last_context = context,
                Err(e) => return Err(e),
            }
        }
        Err(Error::PrecisionExhausted { bits: last_bits, context: last_context })
    }
}
