use std::ops::{Add, Mul};

use crate::error::ModelFault;
use crate::machine::{CostReport, Operand, VecMask, VecReg};

pub const DEFAULT_MAX_VL: usize = 256;
pub const DEFAULT_LANES: usize = 8;

type Fault<T> = Result<T, ModelFault>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    #[inline]
    fn eval<E: PartialOrd>(self, a: E, b: E) -> bool {
        match self {
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
        }
    }
}

/// Integer ALU operations on index registers. Arithmetic wraps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexOp {
    Add,
    Sub,
    Mul,
    And,
    Shr,
}

impl IndexOp {
    #[inline]
    fn eval(self, a: usize, b: usize) -> usize {
        match self {
            IndexOp::Add => a.wrapping_add(b),
            IndexOp::Sub => a.wrapping_sub(b),
            IndexOp::Mul => a.wrapping_mul(b),
            IndexOp::And => a & b,
            IndexOp::Shr => a.checked_shr(b as u32).unwrap_or(0),
        }
    }
}

/// Single-threaded vector execution context.
///
/// Every instruction runs at the VL last set by [`set_vl`](Self::set_vl).
/// Register and mask operands must have exactly that length. At VL 0 every
/// instruction is a no-op and is not counted.
#[derive(Debug, Clone)]
pub struct VecEngine {
    max_vl: usize,
    lanes: usize,
    vl: usize,
    counters: CostReport,
    lane_cycles: u64,
}

impl Default for VecEngine {
    fn default() -> Self {
        VecEngine::new(DEFAULT_MAX_VL, DEFAULT_LANES)
    }
}

impl VecEngine {
    /// # Panics
    ///
    /// If `max_vl` or `lanes` is zero.
    pub fn new(max_vl: usize, lanes: usize) -> Self {
        assert!(max_vl >= 1, "max_vl must be at least 1");
        assert!(lanes >= 1, "lanes must be at least 1");
        VecEngine {
            max_vl,
            lanes,
            vl: 0,
            counters: CostReport::default(),
            lane_cycles: 0,
        }
    }

    pub fn max_vl(&self) -> usize {
        self.max_vl
    }

    pub fn lanes(&self) -> usize {
        self.lanes
    }

    pub fn vl(&self) -> usize {
        self.vl
    }

    pub fn report(&self) -> &CostReport {
        &self.counters
    }

    /// Issue-slot estimate: each instruction occupies `ceil(VL / lanes)`
    /// cycles of the vector pipeline.
    pub fn lane_cycles(&self) -> u64 {
        self.lane_cycles
    }

    pub fn reset_counters(&mut self) {
        self.counters = CostReport::default();
        self.lane_cycles = 0;
    }

    /// Request `n` elements; returns the granted VL, `min(n, max_vl)`.
    pub fn set_vl(&mut self, n: usize) -> usize {
        self.vl = n.min(self.max_vl);
        self.vl
    }

    /// One trip of a kernel's main loop.
    #[inline]
    pub fn count_iteration(&mut self) {
        self.counters.loop_iterations += 1;
    }

    #[inline]
    fn account(&mut self, active: usize) {
        let c = &mut self.counters;
        c.vector_instructions += 1;
        c.lane_slots_total += self.vl as u64;
        c.lane_slots_active += active as u64;
        self.lane_cycles += self.vl.div_ceil(self.lanes) as u64;
    }

    fn account_indexed(&mut self, indices: &VecReg<usize>, mask: &VecMask) -> usize {
        let mut active = 0;
        let mut lo = usize::MAX;
        let mut hi = 0;
        for (&idx, &m) in indices.as_slice().iter().zip(mask.as_slice()) {
            if m {
                active += 1;
                lo = lo.min(idx);
                hi = hi.max(idx);
            }
        }
        self.account(active);
        self.counters.gather_scatter_ops += 1;
        if active > 0 {
            let range = (hi - lo) as u64;
            self.counters.max_index_range = self.counters.max_index_range.max(range);
        }
        active
    }

    #[inline]
    fn check_len(&self, len: usize) -> Fault<()> {
        if len != self.vl {
            return Err(ModelFault::LengthMismatch {
                expected: self.vl,
                found: len,
            });
        }
        Ok(())
    }

    fn check_operand<E: Copy>(&self, op: &Operand<'_, E>) -> Fault<()> {
        match op.reg_len() {
            Some(len) => self.check_len(len),
            None => Ok(()),
        }
    }

    fn check_indices(&self, base_len: usize, indices: &VecReg<usize>, mask: &VecMask) -> Fault<()> {
        self.check_len(indices.len())?;
        self.check_len(mask.len())?;
        for (lane, (&idx, &m)) in indices.as_slice().iter().zip(mask.as_slice()).enumerate() {
            if m && idx >= base_len {
                return Err(ModelFault::OutOfBounds {
                    lane,
                    index: idx,
                    len: base_len,
                });
            }
        }
        Ok(())
    }

    /// Contiguous load of `VL` elements starting at `offset`.
    pub fn load<E: Copy>(&mut self, base: &[E], offset: usize) -> Fault<VecReg<E>> {
        if self.vl == 0 {
            return Ok(VecReg::from_vec(Vec::new()));
        }
        let end = offset + self.vl;
        if end > base.len() {
            return Err(ModelFault::OutOfBounds {
                lane: base.len().saturating_sub(offset),
                index: end - 1,
                len: base.len(),
            });
        }
        self.account(self.vl);
        Ok(VecReg::from_vec(base[offset..end].to_vec()))
    }

    /// Contiguous store of a full register at `offset`.
    pub fn store<E: Copy>(&mut self, src: &VecReg<E>, base: &mut [E], offset: usize) -> Fault<()> {
        if self.vl == 0 {
            return Ok(());
        }
        self.check_len(src.len())?;
        let end = offset + self.vl;
        if end > base.len() {
            return Err(ModelFault::OutOfBounds {
                lane: base.len().saturating_sub(offset),
                index: end - 1,
                len: base.len(),
            });
        }
        self.account(self.vl);
        base[offset..end].copy_from_slice(src.as_slice());
        Ok(())
    }

    /// Indexed load. Masked lanes read nothing and yield `E::default()`.
    pub fn gather<E: Copy + Default>(
        &mut self,
        base: &[E],
        indices: &VecReg<usize>,
        mask: &VecMask,
    ) -> Fault<VecReg<E>> {
        if self.vl == 0 {
            return Ok(VecReg::from_vec(Vec::new()));
        }
        self.check_indices(base.len(), indices, mask)?;
        self.account_indexed(indices, mask);
        let out = indices
            .as_slice()
            .iter()
            .zip(mask.as_slice())
            .map(|(&idx, &m)| if m { base[idx] } else { E::default() })
            .collect();
        Ok(VecReg::from_vec(out))
    }

    /// Indexed store. Unmasked lanes must target distinct indices.
    pub fn scatter<E: Copy>(
        &mut self,
        base: &mut [E],
        indices: &VecReg<usize>,
        values: &VecReg<E>,
        mask: &VecMask,
    ) -> Fault<()> {
        if self.vl == 0 {
            return Ok(());
        }
        self.check_indices(base.len(), indices, mask)?;
        self.check_len(values.len())?;
        check_distinct(indices, mask)?;
        self.account_indexed(indices, mask);
        for ((&idx, &v), &m) in indices
            .as_slice()
            .iter()
            .zip(values.as_slice())
            .zip(mask.as_slice())
        {
            if m {
                base[idx] = v;
            }
        }
        Ok(())
    }

    /// `acc + a·b` on unmasked lanes, `acc` elsewhere.
    pub fn fma<T>(
        &mut self,
        acc: &VecReg<T>,
        a: &VecReg<T>,
        b: Operand<'_, T>,
        mask: &VecMask,
    ) -> Fault<VecReg<T>>
    where
        T: Copy + Add<Output = T> + Mul<Output = T>,
    {
        if self.vl == 0 {
            return Ok(VecReg::from_vec(Vec::new()));
        }
        self.check_len(acc.len())?;
        self.check_len(a.len())?;
        self.check_len(mask.len())?;
        self.check_operand(&b)?;
        self.account(mask.count_ones());
        self.counters.elements_processed += self.vl as u64;
        let out = (0..self.vl)
            .map(|i| {
                if mask.get(i) {
                    acc.lane(i) + a.lane(i) * b.at(i)
                } else {
                    acc.lane(i)
                }
            })
            .collect();
        Ok(VecReg::from_vec(out))
    }

    /// `a·b` on unmasked lanes, `a` elsewhere.
    pub fn mul<T>(&mut self, a: &VecReg<T>, b: Operand<'_, T>, mask: &VecMask) -> Fault<VecReg<T>>
    where
        T: Copy + Mul<Output = T>,
    {
        if self.vl == 0 {
            return Ok(VecReg::from_vec(Vec::new()));
        }
        self.check_len(a.len())?;
        self.check_len(mask.len())?;
        self.check_operand(&b)?;
        self.account(mask.count_ones());
        self.counters.elements_processed += self.vl as u64;
        let out = (0..self.vl)
            .map(|i| if mask.get(i) { a.lane(i) * b.at(i) } else { a.lane(i) })
            .collect();
        Ok(VecReg::from_vec(out))
    }

    /// `a + b` on unmasked lanes, `a` elsewhere. Not counted as processed
    /// elements.
    pub fn add<T>(&mut self, a: &VecReg<T>, b: Operand<'_, T>, mask: &VecMask) -> Fault<VecReg<T>>
    where
        T: Copy + Add<Output = T>,
    {
        if self.vl == 0 {
            return Ok(VecReg::from_vec(Vec::new()));
        }
        self.check_len(a.len())?;
        self.check_len(mask.len())?;
        self.check_operand(&b)?;
        self.account(mask.count_ones());
        let out = (0..self.vl)
            .map(|i| if mask.get(i) { a.lane(i) + b.at(i) } else { a.lane(i) })
            .collect();
        Ok(VecReg::from_vec(out))
    }

    /// Splat a scalar into every lane.
    pub fn broadcast<E: Copy>(&mut self, value: E) -> VecReg<E> {
        if self.vl > 0 {
            self.account(self.vl);
        }
        VecReg::from_vec(vec![value; self.vl])
    }

    /// `0, 1, …, VL-1`.
    pub fn iota(&mut self) -> VecReg<usize> {
        if self.vl > 0 {
            self.account(self.vl);
        }
        VecReg::from_vec((0..self.vl).collect())
    }

    /// Lane select: `src` where `mask`, `dst` elsewhere.
    pub fn merge<E: Copy>(
        &mut self,
        dst: &VecReg<E>,
        src: Operand<'_, E>,
        mask: &VecMask,
    ) -> Fault<VecReg<E>> {
        if self.vl == 0 {
            return Ok(VecReg::from_vec(Vec::new()));
        }
        self.check_len(dst.len())?;
        self.check_len(mask.len())?;
        self.check_operand(&src)?;
        self.account(self.vl);
        let out = (0..self.vl)
            .map(|i| if mask.get(i) { src.at(i) } else { dst.lane(i) })
            .collect();
        Ok(VecReg::from_vec(out))
    }

    /// Integer ALU op on unmasked lanes; masked lanes keep `a`.
    pub fn index_op(
        &mut self,
        a: &VecReg<usize>,
        op: IndexOp,
        b: Operand<'_, usize>,
        mask: &VecMask,
    ) -> Fault<VecReg<usize>> {
        if self.vl == 0 {
            return Ok(VecReg::from_vec(Vec::new()));
        }
        self.check_len(a.len())?;
        self.check_len(mask.len())?;
        self.check_operand(&b)?;
        self.account(mask.count_ones());
        let out = (0..self.vl)
            .map(|i| if mask.get(i) { op.eval(a.lane(i), b.at(i)) } else { a.lane(i) })
            .collect();
        Ok(VecReg::from_vec(out))
    }

    /// `mask[i] && (a[i] cmp b[i])`.
    pub fn compare<E: Copy + PartialOrd>(
        &mut self,
        a: &VecReg<E>,
        cmp: Cmp,
        b: Operand<'_, E>,
        mask: &VecMask,
    ) -> Fault<VecMask> {
        if self.vl == 0 {
            return Ok(VecMask::none(0));
        }
        self.check_len(a.len())?;
        self.check_len(mask.len())?;
        self.check_operand(&b)?;
        self.account(mask.count_ones());
        let out = (0..self.vl)
            .map(|i| mask.get(i) && cmp.eval(a.lane(i), b.at(i)))
            .collect();
        Ok(VecMask::from_vec(out))
    }

    fn mask_binary(&mut self, a: &VecMask, b: &VecMask, f: impl Fn(bool, bool) -> bool) -> Fault<VecMask> {
        if self.vl == 0 {
            return Ok(VecMask::none(0));
        }
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        self.account(self.vl);
        Ok(VecMask::from_vec(
            a.as_slice().iter().zip(b.as_slice()).map(|(&x, &y)| f(x, y)).collect(),
        ))
    }

    pub fn mask_and(&mut self, a: &VecMask, b: &VecMask) -> Fault<VecMask> {
        self.mask_binary(a, b, |x, y| x && y)
    }

    pub fn mask_or(&mut self, a: &VecMask, b: &VecMask) -> Fault<VecMask> {
        self.mask_binary(a, b, |x, y| x || y)
    }

    /// `a && !b`.
    pub fn mask_andnot(&mut self, a: &VecMask, b: &VecMask) -> Fault<VecMask> {
        self.mask_binary(a, b, |x, y| x && !y)
    }

    /// Population count of a mask (one reduction instruction).
    pub fn mask_popcount(&mut self, m: &VecMask) -> Fault<usize> {
        if self.vl == 0 {
            return Ok(0);
        }
        self.check_len(m.len())?;
        self.account(self.vl);
        Ok(m.count_ones())
    }

    /// True if any lane is set.
    pub fn mask_any(&mut self, m: &VecMask) -> Fault<bool> {
        Ok(self.mask_popcount(m)? > 0)
    }

    /// Pack the unmasked lanes of `src` and store them contiguously from
    /// `at`. Counts as a compress plus a store.
    pub fn compress_store<E: Copy>(
        &mut self,
        src: &VecReg<E>,
        mask: &VecMask,
        dest: &mut [E],
        at: usize,
    ) -> Fault<usize> {
        if self.vl == 0 {
            return Ok(0);
        }
        self.check_len(src.len())?;
        self.check_len(mask.len())?;
        let n = mask.count_ones();
        let available = dest.len().saturating_sub(at);
        if n > available {
            return Err(ModelFault::Capacity {
                needed: n,
                available,
            });
        }
        self.account(n);
        self.account(n);
        let packed = src
            .as_slice()
            .iter()
            .zip(mask.as_slice())
            .filter_map(|(&v, &m)| m.then_some(v));
        for (slot, v) in dest[at..at + n].iter_mut().zip(packed) {
            *slot = v;
        }
        Ok(n)
    }

    /// [`compress_store`](Self::compress_store) of a (value, index) register
    /// pair into two parallel destinations. Counted as a compress plus a
    /// store.
    #[allow(clippy::too_many_arguments)]
    pub fn compress_store_pair<T: Copy>(
        &mut self,
        values: &VecReg<T>,
        indices: &VecReg<usize>,
        mask: &VecMask,
        dest_values: &mut [T],
        dest_indices: &mut [usize],
        at: usize,
    ) -> Fault<usize> {
        if self.vl == 0 {
            return Ok(0);
        }
        self.check_len(values.len())?;
        self.check_len(indices.len())?;
        self.check_len(mask.len())?;
        let n = mask.count_ones();
        let available = dest_values.len().min(dest_indices.len()).saturating_sub(at);
        if n > available {
            return Err(ModelFault::Capacity {
                needed: n,
                available,
            });
        }
        self.account(n);
        self.account(n);
        let mut pos = at;
        for i in 0..self.vl {
            if mask.get(i) {
                dest_values[pos] = values.lane(i);
                dest_indices[pos] = indices.lane(i);
                pos += 1;
            }
        }
        Ok(n)
    }

    /// Exclusive prefix sum starting from `carry`; returns the scanned
    /// register and the running total after the last lane.
    pub fn scan_exclusive(&mut self, a: &VecReg<usize>, carry: usize) -> Fault<(VecReg<usize>, usize)> {
        if self.vl == 0 {
            return Ok((VecReg::from_vec(Vec::new()), carry));
        }
        self.check_len(a.len())?;
        self.account(self.vl);
        let mut acc = carry;
        let out = a
            .as_slice()
            .iter()
            .map(|&x| {
                let before = acc;
                acc += x;
                before
            })
            .collect();
        Ok((VecReg::from_vec(out), acc))
    }
}

fn check_distinct(indices: &VecReg<usize>, mask: &VecMask) -> Fault<()> {
    let mut prev: Option<usize> = None;
    let mut ascending = true;
    for (&idx, &m) in indices.as_slice().iter().zip(mask.as_slice()) {
        if m {
            if prev.is_some_and(|p| p >= idx) {
                ascending = false;
                break;
            }
            prev = Some(idx);
        }
    }
    if ascending {
        return Ok(());
    }
    let mut live: Vec<usize> = indices
        .as_slice()
        .iter()
        .zip(mask.as_slice())
        .filter_map(|(&i, &m)| m.then_some(i))
        .collect();
    live.sort_unstable();
    match live.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(ModelFault::DuplicateScatterIndex { index: w[0] }),
        None => Ok(()),
    }
}
