/// Contents of one vector register; its length is the VL it was produced at.
#[derive(Debug, Clone, PartialEq)]
pub struct VecReg<E>(Vec<E>);

impl<E: Copy> VecReg<E> {
    pub fn from_vec(v: Vec<E>) -> Self {
        VecReg(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Scalar read of one lane.
    #[inline]
    pub fn lane(&self, i: usize) -> E {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[E] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<E> {
        self.0
    }
}

/// Per-lane predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VecMask(Vec<bool>);

impl VecMask {
    pub fn full(vl: usize) -> Self {
        VecMask(vec![true; vl])
    }

    pub fn none(vl: usize) -> Self {
        VecMask(vec![false; vl])
    }

    pub fn from_vec(bits: Vec<bool>) -> Self {
        VecMask(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
}

/// Second operand of a binary instruction: a register or a broadcast scalar.
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a, E> {
    Reg(&'a VecReg<E>),
    Scalar(E),
}

impl<E: Copy> Operand<'_, E> {
    #[inline]
    pub(crate) fn at(&self, i: usize) -> E {
        match self {
            Operand::Reg(r) => r.0[i],
            Operand::Scalar(s) => *s,
        }
    }

    pub(crate) fn reg_len(&self) -> Option<usize> {
        match self {
            Operand::Reg(r) => Some(r.len()),
            Operand::Scalar(_) => None,
        }
    }
}

impl<'a, E> From<&'a VecReg<E>> for Operand<'a, E> {
    fn from(r: &'a VecReg<E>) -> Self {
        Operand::Reg(r)
    }
}
