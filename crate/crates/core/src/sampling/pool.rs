use crate::element::Element;
use crate::scalar::Scalar;

/// Candidates a sampler draws from, in a canonical order.
///
/// Indices passed to [`take`](CandidatePool::take) and masks passed to
/// [`retain_mask`](CandidatePool::retain_mask) refer to the order returned by
/// [`candidates`](CandidatePool::candidates).
pub trait CandidatePool<T: Scalar> {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn candidates(&self) -> Vec<&Element<T>>;

    /// Drops every candidate whose flag is false.
    fn retain_mask(&mut self, keep: &[bool]);

    /// Removes the candidates at `indices` and returns them in that order.
    fn take(&mut self, indices: &[usize]) -> Vec<Element<T>>;

    /// A drawn element whose own gain failed the sampling test.
    fn reject_examined(&mut self, elements: Vec<Element<T>>) {
        drop(elements);
    }

    /// Drawn elements that were never individually tested.
    fn reject_unexamined(&mut self, elements: Vec<Element<T>>);
}

/// Single-machine buffer.
///
/// A rejected single sample is dropped: its gain is at most `(1−ε)τ` against
/// the unchanged picks, so the next filter would drop it anyway. Unexamined
/// ladder leftovers go back to the end of the buffer.
#[derive(Clone, Debug, Default)]
pub struct VecPool<T> {
    items: Vec<Element<T>>,
}

impl<T: Scalar> VecPool<T> {
    pub fn new(items: Vec<Element<T>>) -> Self {
        VecPool { items }
    }

    pub fn items(&self) -> &[Element<T>] {
        &self.items
    }

    pub fn into_items(self) -> Vec<Element<T>> {
        self.items
    }
}

pub(crate) fn take_preserving_order<T: Clone>(items: &mut Vec<T>, indices: &[usize]) -> Vec<T> {
    let taken: Vec<T> = indices.iter().map(|&i| items[i].clone()).collect();
    let mut drop_mask = vec![false; items.len()];
    for &i in indices {
        drop_mask[i] = true;
    }
    let mut pos = 0;
    items.retain(|_| {
        let keep = !drop_mask[pos];
        pos += 1;
        keep
    });
    taken
}

pub(crate) fn retain_by_mask<T>(items: &mut Vec<T>, keep: &[bool]) {
    debug_assert_eq!(items.len(), keep.len());
    let mut pos = 0;
    items.retain(|_| {
        let k = keep[pos];
        pos += 1;
        k
    });
}

impl<T: Scalar> CandidatePool<T> for VecPool<T> {
    fn len(&self) -> usize {
        self.items.len()
    }

    fn candidates(&self) -> Vec<&Element<T>> {
        self.items.iter().collect()
    }

    fn retain_mask(&mut self, keep: &[bool]) {
        retain_by_mask(&mut self.items, keep);
    }

    fn take(&mut self, indices: &[usize]) -> Vec<Element<T>> {
        take_preserving_order(&mut self.items, indices)
    }

    fn reject_unexamined(&mut self, elements: Vec<Element<T>>) {
        self.items.extend(elements);
    }
}
