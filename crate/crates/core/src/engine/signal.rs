// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use crate::netlist::Drive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LogicValue {
    Zero,
    One,
    X,
}

impl LogicValue {
    pub fn from_bool(b: bool) -> Self {
        if b {
            LogicValue::One
        } else {
            LogicValue::Zero
        }
    }

    pub fn is_known(self) -> bool {
        self != LogicValue::X
    }

    pub fn as_char(self) -> char {
        match self {
            LogicValue::Zero => '0',
            LogicValue::One => '1',
            LogicValue::X => 'x',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(LogicValue::Zero),
            '1' => Some(LogicValue::One),
            'x' | 'X' => Some(LogicValue::X),
            _ => None,
        }
    }

    /// True for a Zero<->One change; anything involving X is not a toggle.
    pub fn is_full_swing(self, next: LogicValue) -> bool {
        self.is_known() && next.is_known() && self != next
    }
}

impl std::ops::Not for LogicValue {
    type Output = Self;

    fn not(self) -> Self {
        match self {
            LogicValue::Zero => LogicValue::One,
            LogicValue::One => LogicValue::Zero,
            LogicValue::X => LogicValue::X,
        }
    }
}

impl fmt::Display for LogicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Drive strength, ordered `Stored < Weak < Strong`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strength {
    Stored,
    Weak,
    Strong,
}

impl From<Drive> for Strength {
    fn from(d: Drive) -> Self {
        match d {
            Drive::Strong => Strength::Strong,
            Drive::Weak => Strength::Weak,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignalState {
    pub value: LogicValue,
    pub strength: Strength,
}

impl SignalState {
    pub const fn new(value: LogicValue, strength: Strength) -> Self {
        SignalState { value, strength }
    }

    pub const fn strong(value: LogicValue) -> Self {
        SignalState::new(value, Strength::Strong)
    }

    pub const fn stored(value: LogicValue) -> Self {
        SignalState::new(value, Strength::Stored)
    }

    /// Join two contending signals: the stronger wins; equal strengths with
    /// different values give X at that strength.
    pub fn resolve(self, other: SignalState) -> SignalState {
        match self.strength.cmp(&other.strength) {
            std::cmp::Ordering::Greater => self,
            std::cmp::Ordering::Less => other,
            std::cmp::Ordering::Equal if self.value == other.value => self,
            std::cmp::Ordering::Equal => SignalState::new(LogicValue::X, self.strength),
        }
    }

    /// Signal seen on the far side of a conducting device of the given drive.
    pub fn through(self, drive: Drive) -> SignalState {
        SignalState::new(self.value, self.strength.min(Strength::from(drive)))
    }
}

impl fmt::Display for SignalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {:?})", self.value, self.strength)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn any_state() -> impl Strategy<Value = SignalState> {
        (0u8..3, 0u8..3).prop_map(|(v, s)| {
            let value = [LogicValue::Zero, LogicValue::One, LogicValue::X][v as usize];
            let strength = [Strength::Stored, Strength::Weak, Strength::Strong][s as usize];
            SignalState::new(value, strength)
        })
    }

    proptest! {
        #[test]
        fn resolve_is_commutative(a in any_state(), b in any_state()) {
            prop_assert_eq!(a.resolve(b), b.resolve(a));
        }

        #[test]
        fn resolve_is_associative(a in any_state(), b in any_state(), c in any_state()) {
            prop_assert_eq!(a.resolve(b).resolve(c), a.resolve(b.resolve(c)));
        }

        #[test]
        fn resolve_is_idempotent(a in any_state()) {
            prop_assert_eq!(a.resolve(a), a);
        }
    }

    #[test]
    fn strength_order() {
        assert!(Strength::Strong > Strength::Weak);
        assert!(Strength::Weak > Strength::Stored);
        let strong0 = SignalState::strong(LogicValue::Zero);
        let weak1 = SignalState::new(LogicValue::One, Strength::Weak);
        assert_eq!(strong0.resolve(weak1), strong0);
        assert_eq!(
            strong0.resolve(SignalState::strong(LogicValue::One)),
            SignalState::strong(LogicValue::X)
        );
    }

    #[test]
    fn weak_device_degrades() {
        let s = SignalState::strong(LogicValue::One);
        assert_eq!(s.through(Drive::Weak).strength, Strength::Weak);
        assert_eq!(s.through(Drive::Strong), s);
        let stored = SignalState::stored(LogicValue::One);
        assert_eq!(stored.through(Drive::Strong), stored);
    }
}
