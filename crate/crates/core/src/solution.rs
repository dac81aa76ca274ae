use crate::element::Element;
use crate::scalar::Scalar;

/// A selected set together with its objective value.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution<T> {
    pub members: Vec<Element<T>>,
    pub value: T,
}

impl<T: Scalar> Solution<T> {
    pub fn empty() -> Self {
        Solution {
            members: Vec::new(),
            value: T::zero(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn ids(&self) -> Vec<u64> {
        self.members.iter().map(|e| e.id).collect()
    }
}
