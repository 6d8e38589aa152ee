use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values for a subset of the variables plus a frozen flag per variable.
/// A frozen variable is never set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartialAssignment {
    values: Vec<Option<u64>>,
    frozen: Vec<bool>,
}

impl PartialAssignment {
    pub fn new(num_vars: usize) -> Self {
        PartialAssignment {
            values: vec![None; num_vars],
            frozen: vec![false; num_vars],
        }
    }

    pub fn from_values(values: Vec<u64>) -> Self {
        let n = values.len();
        PartialAssignment {
            values: values.into_iter().map(Some).collect(),
            frozen: vec![false; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, v: usize) -> Option<u64> {
        self.values[v]
    }

    pub fn is_frozen(&self, v: usize) -> bool {
        self.frozen[v]
    }

    /// Sets a non-frozen variable.
    pub fn set(&mut self, v: usize, x: u64) -> Result<()> {
        if self.frozen[v] {
            return Err(Error::Invariant(format!("attempt to set frozen variable {v}")));
        }
        self.values[v] = Some(x);
        Ok(())
    }

    /// Sets a variable, releasing it first if frozen.
    pub fn assign(&mut self, v: usize, x: u64) {
        self.frozen[v] = false;
        self.values[v] = Some(x);
    }

    pub fn unset(&mut self, v: usize) {
        self.values[v] = None;
    }

    /// Clears both the value and the frozen flag.
    pub fn release(&mut self, v: usize) {
        self.values[v] = None;
        self.frozen[v] = false;
    }

    /// Freezes an unset variable; a set one is left untouched.
    pub fn freeze(&mut self, v: usize) -> bool {
        if self.values[v].is_some() || self.frozen[v] {
            return false;
        }
        self.frozen[v] = true;
        true
    }

    pub fn frozen_count(&self) -> usize {
        self.frozen.iter().filter(|&&f| f).count()
    }

    pub fn unset_vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, x)| x.is_none())
            .map(|(i, _)| i)
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// The full value vector, or the first unset variable as an error.
    pub fn complete_values(&self) -> Result<Vec<u64>> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, x)| x.ok_or(Error::IncompleteAssignment(i)))
            .collect()
    }

    pub fn invariant_holds(&self) -> bool {
        self.values
            .iter()
            .zip(&self.frozen)
            .all(|(x, &f)| !(f && x.is_some()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn freeze_discipline() {
        let mut pa = PartialAssignment::new(3);
        pa.set(0, 1).unwrap();
        assert!(!pa.freeze(0));
        assert!(pa.freeze(1));
        assert!(pa.set(1, 0).is_err());
        assert!(pa.invariant_holds());
        pa.assign(1, 0);
        assert!(!pa.is_frozen(1));
        assert!(matches!(pa.complete_values(), Err(Error::IncompleteAssignment(2))));
        pa.set(2, 1).unwrap();
        assert_eq!(pa.complete_values().unwrap(), vec![1, 0, 1]);
    }
}
