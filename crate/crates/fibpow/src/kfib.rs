//! Exact arithmetic for the order-k Fibonacci recurrence
//! F_n = F_{n-1} + ... + F_{n-k}, with the usual seeding
//! F_{-(k-2)} = ... = F_0 = 0 and F_1 = 1.
//!
//! Everything here is integer-exact.  The sliding window keeps the last k
//! terms plus their running sum, so advancing one index costs one addition
//! and one subtraction regardless of k; that is what makes order-242 windows
//! and million-long residue streams affordable.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// First index at which the order-k sequence is defined.
pub fn first_index(k: u64) -> i64 {
    -(k as i64 - 2)
}

fn check_order(k: u64) -> Result<()> {
    if k < 2 {
        Err(Error::Domain(format!("sequence order k = {k} below 2")))
    } else {
        Ok(())
    }
}

/// Sliding window of k consecutive terms with their running sum.
#[derive(Clone, Debug)]
pub struct KFibWindow {
    k: u64,
    /// Index of `values.front()`; the window covers
    /// `start_index ..= start_index + k - 1`.
    start_index: i64,
    values: VecDeque<BigInt>,
    running_sum: BigInt,
}

impl KFibWindow {
    /// Window over the seed terms, ending at index 1.
    pub fn new(k: u64) -> Result<Self> {
        check_order(k)?;
        let mut values: VecDeque<BigInt> = (0..k - 1).map(|_| BigInt::zero()).collect();
        values.push_back(BigInt::one());
        Ok(KFibWindow {
            k,
            start_index: first_index(k),
            values,
            running_sum: BigInt::one(),
        })
    }

    pub fn order(&self) -> u64 {
        self.k
    }

    /// Index of the newest term in the window.
    pub fn last_index(&self) -> i64 {
        self.start_index + self.k as i64 - 1
    }

    /// Newest term.
    pub fn last(&self) -> &BigInt {
        self.values.back().expect("window never empty")
    }

    /// Term at absolute index `n`, if the window currently covers it.
    pub fn get(&self, n: i64) -> Option<&BigInt> {
        let off = n - self.start_index;
        if (0..self.k as i64).contains(&off) {
            self.values.get(off as usize)
        } else {
            None
        }
    }

    /// Slide one step: append F_{last+1} = sum of the window, drop the
    /// oldest term.
    pub fn step(&mut self) {
        let next = self.running_sum.clone();
        let oldest = self.values.pop_front().expect("window never empty");
        self.running_sum += &next;
        self.running_sum -= oldest;
        self.values.push_back(next);
        self.start_index += 1;
    }

    /// Slide until the newest term has index `n` (which must not be behind
    /// the window).
    pub fn advance_to(&mut self, n: i64) -> Result<()> {
        if n < self.last_index() && self.get(n).is_none() {
            return Err(Error::Domain(format!(
                "window at {} cannot move backwards to {}",
                self.last_index(),
                n
            )));
        }
        while self.last_index() < n {
            self.step();
        }
        Ok(())
    }
}

/// F_n for the order-k sequence, exact.
pub fn kfib_at(k: u64, n: i64) -> Result<BigInt> {
    check_order(k)?;
    let first = first_index(k);
    if n < first {
        return Err(Error::IndexBelowDefinition { k, n, first });
    }
    let mut w = KFibWindow::new(k)?;
    if n <= 1 {
        return Ok(w.get(n).cloned().expect("seed window covers n <= 1"));
    }
    w.advance_to(n)?;
    Ok(w.last().clone())
}

/// Window of k consecutive residues mod a machine-word modulus.
///
/// All intermediate sums go through u128, so any modulus below 2^63 is safe
/// (the running sum stays below modulus * (k+1) < 2^71 < u128 range, and is
/// reduced every step).
#[derive(Clone, Debug)]
pub struct KFibModWindow {
    k: u64,
    modulus: u64,
    start_index: i64,
    values: VecDeque<u64>,
    running_sum: u64,
}

impl KFibModWindow {
    pub fn new(k: u64, modulus: u64) -> Result<Self> {
        check_order(k)?;
        if modulus < 2 {
            return Err(Error::Domain(format!("modulus {modulus} below 2")));
        }
        if modulus >= 1 << 63 {
            return Err(Error::Domain(format!("modulus {modulus} too large for word arithmetic")));
        }
        let mut values: VecDeque<u64> = (0..k - 1).map(|_| 0).collect();
        values.push_back(1 % modulus);
        Ok(KFibModWindow {
            k,
            modulus,
            start_index: first_index(k),
            values,
            running_sum: 1 % modulus,
        })
    }

    pub fn last_index(&self) -> i64 {
        self.start_index + self.k as i64 - 1
    }

    pub fn last(&self) -> u64 {
        *self.values.back().expect("window never empty")
    }

    pub fn get(&self, n: i64) -> Option<u64> {
        let off = n - self.start_index;
        if (0..self.k as i64).contains(&off) {
            self.values.get(off as usize).copied()
        } else {
            None
        }
    }

    pub fn step(&mut self) {
        let m = self.modulus as u128;
        let next = self.running_sum;
        let oldest = self.values.pop_front().expect("window never empty");
        let sum = (self.running_sum as u128 + next as u128 + m - oldest as u128) % m;
        self.running_sum = sum as u64;
        self.values.push_back(next);
        self.start_index += 1;
    }

    pub fn advance_to(&mut self, n: i64) -> Result<()> {
        if n < self.last_index() && self.get(n).is_none() {
            return Err(Error::Domain(format!(
                "residue window at {} cannot move backwards to {}",
                self.last_index(),
                n
            )));
        }
        while self.last_index() < n {
            self.step();
        }
        Ok(())
    }
}

/// F_n mod `modulus`, using word arithmetic only.
pub fn kfib_mod(k: u64, n: i64, modulus: u64) -> Result<u64> {
    let first = first_index(k);
    if k >= 2 && n < first {
        return Err(Error::IndexBelowDefinition { k, n, first });
    }
    let mut w = KFibModWindow::new(k, modulus)?;
    if n <= 1 {
        return Ok(w.get(n).expect("seed window covers n <= 1"));
    }
    w.advance_to(n)?;
    Ok(w.last())
}

/// Exact check that 7 F_{m-1} <= 3 F_{m+1}, i.e. the two-apart neighbour
/// ratio F_{m+1}/F_{m-1} is at least 7/3.
pub fn ratio_check(k: u64, m: i64) -> Result<bool> {
    if k < 3 || m < 3 {
        return Err(Error::Domain(format!(
            "ratio comparison needs k >= 3 and m >= 3, got k = {k}, m = {m}"
        )));
    }
    let mut w = KFibWindow::new(k)?;
    w.advance_to(m + 1)?;
    let f_next = w.last().clone();
    let f_prev = w.get(m - 1).cloned().expect("window of order >= 3 covers m-1");
    Ok(f_prev * 7u32 <= f_next * 3u32)
}
