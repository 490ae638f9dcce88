//! Dense identifiers and fixed-width bitsets over them.
//!
//! Models are limited to [`MAX_ELEMENTS`] states and [`MAX_ELEMENTS`] events so
//! that every set is a single `u128`. The layered powerset constructions are
//! doubly exponential in the state count, so larger models are out of reach for
//! synthesis anyway.

use std::fmt;

/// Upper bound on the number of states and on the number of events.
pub const MAX_ELEMENTS: usize = 128;

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
        pub struct $name(pub u8);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

dense_id!(
    /// Index of a plant state, in document order.
    StateId
);
dense_id!(
    /// Index of an event, in document order.
    EventId
);

macro_rules! bitset {
    ($(#[$meta:meta])* $name:ident, $id:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
        pub struct $name(u128);

        impl $name {
            pub const EMPTY: $name = $name(0);

            #[inline]
            pub fn from_bits(bits: u128) -> Self {
                $name(bits)
            }

            #[inline]
            pub fn bits(self) -> u128 {
                self.0
            }

            #[inline]
            pub fn singleton(id: $id) -> Self {
                $name(1u128 << id.0)
            }

            /// The set `{0, 1, ..., n-1}`.
            pub fn full(n: usize) -> Self {
                debug_assert!(n <= MAX_ELEMENTS);
                if n == MAX_ELEMENTS {
                    $name(u128::MAX)
                } else {
                    $name((1u128 << n) - 1)
                }
            }

            #[inline]
            pub fn insert(&mut self, id: $id) -> bool {
                let before = self.0;
                self.0 |= 1u128 << id.0;
                before != self.0
            }

            #[inline]
            pub fn remove(&mut self, id: $id) {
                self.0 &= !(1u128 << id.0);
            }

            #[inline]
            pub fn contains(self, id: $id) -> bool {
                self.0 >> id.0 & 1 == 1
            }

            #[inline]
            pub fn is_empty(self) -> bool {
                self.0 == 0
            }

            #[inline]
            pub fn len(self) -> usize {
                self.0.count_ones() as usize
            }

            #[inline]
            pub fn union(self, other: Self) -> Self {
                $name(self.0 | other.0)
            }

            #[inline]
            pub fn intersection(self, other: Self) -> Self {
                $name(self.0 & other.0)
            }

            #[inline]
            pub fn difference(self, other: Self) -> Self {
                $name(self.0 & !other.0)
            }

            #[inline]
            pub fn is_subset(self, other: Self) -> bool {
                self.0 & !other.0 == 0
            }

            /// Members in ascending (canonical) order.
            pub fn iter(self) -> impl Iterator<Item = $id> {
                let mut bits = self.0;
                std::iter::from_fn(move || {
                    if bits == 0 {
                        None
                    } else {
                        let i = bits.trailing_zeros();
                        bits &= bits - 1;
                        Some($id(i as u8))
                    }
                })
            }
        }

        impl FromIterator<$id> for $name {
            fn from_iter<I: IntoIterator<Item = $id>>(iter: I) -> Self {
                let mut set = $name::EMPTY;
                for id in iter {
                    set.insert(id);
                }
                set
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.debug_set().entries(self.iter().map(|i| i.0)).finish()
            }
        }
    };
}

bitset!(
    /// A set of plant states (a state estimate).
    StateSet,
    StateId
);
bitset!(
    /// A set of events.
    EventSet,
    EventId
);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iteration_is_ascending() {
        let s: StateSet = [StateId(5), StateId(1), StateId(127), StateId(0)]
            .into_iter()
            .collect();
        let v: Vec<u8> = s.iter().map(|x| x.0).collect();
        assert_eq!(v, vec![0, 1, 5, 127]);
        assert_eq!(s.len(), 4);
    }

    #[test]
    fn full_and_subset() {
        assert_eq!(EventSet::full(0), EventSet::EMPTY);
        assert_eq!(EventSet::full(128).len(), 128);
        let a = EventSet::full(3);
        let b = EventSet::singleton(EventId(1));
        assert!(b.is_subset(a));
        assert!(!a.is_subset(b));
        assert_eq!(a.difference(b).len(), 2);
    }
}
