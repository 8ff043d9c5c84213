//! The closed gate vocabulary and its unitaries.
//!
//! Two-qubit matrices use a big-endian operand convention: operand 0 is the
//! most significant bit of the local 2-qubit basis index, and for controlled
//! gates operand 0 is the control.

use crate::matrix::{c, CMatrix, I, ONE, ZERO};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    T,
    Id,
    Sxdg,
    Sdg,
    Sx,
    Tdg,
    Cx,
    Cy,
    Cz,
    Swap,
    Dcx,
    Iswap,
    Csdg,
    Ecr,
    Ch,
    Cs,
    Csx,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown gate kind `{0}`")]
pub struct UnknownGate(pub String);

impl GateKind {
    /// Vocabulary order; `index()` is the position in this array.
    pub const ALL: [GateKind; 22] = [
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::T,
        GateKind::Id,
        GateKind::Sxdg,
        GateKind::Sdg,
        GateKind::Sx,
        GateKind::Tdg,
        GateKind::Cx,
        GateKind::Cy,
        GateKind::Cz,
        GateKind::Swap,
        GateKind::Dcx,
        GateKind::Iswap,
        GateKind::Csdg,
        GateKind::Ecr,
        GateKind::Ch,
        GateKind::Cs,
        GateKind::Csx,
    ];

    pub const COUNT: usize = 22;

    pub fn one_qubit() -> &'static [GateKind] {
        &Self::ALL[..11]
    }

    pub fn two_qubit() -> &'static [GateKind] {
        &Self::ALL[11..]
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(idx: usize) -> Option<GateKind> {
        Self::ALL.get(idx).copied()
    }

    #[inline]
    pub fn arity(self) -> usize {
        if self.index() < 11 {
            1
        } else {
            2
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::T => "t",
            GateKind::Id => "id",
            GateKind::Sxdg => "sxdg",
            GateKind::Sdg => "sdg",
            GateKind::Sx => "sx",
            GateKind::Tdg => "tdg",
            GateKind::Cx => "cx",
            GateKind::Cy => "cy",
            GateKind::Cz => "cz",
            GateKind::Swap => "swap",
            GateKind::Dcx => "dcx",
            GateKind::Iswap => "iswap",
            GateKind::Csdg => "csdg",
            GateKind::Ecr => "ecr",
            GateKind::Ch => "ch",
            GateKind::Cs => "cs",
            GateKind::Csx => "csx",
        }
    }

    /// The defining unitary, 2x2 for 1-qubit kinds and 4x4 otherwise.
    pub fn unitary(self) -> CMatrix {
        let h = FRAC_1_SQRT_2;
        match self {
            GateKind::X => CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
            GateKind::Y => CMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]]),
            GateKind::Z => CMatrix::diagonal(&[ONE, -ONE]),
            GateKind::H => CMatrix::from_real_rows(&[&[h, h], &[h, -h]]),
            GateKind::S => CMatrix::diagonal(&[ONE, I]),
            GateKind::Sdg => CMatrix::diagonal(&[ONE, -I]),
            GateKind::T => CMatrix::diagonal(&[ONE, c(h, h)]),
            GateKind::Tdg => CMatrix::diagonal(&[ONE, c(h, -h)]),
            GateKind::Id => CMatrix::identity(2),
            GateKind::Sx => sx(),
            GateKind::Sxdg => sx().dagger(),
            GateKind::Cx => CMatrix::controlled(&GateKind::X.unitary()),
            GateKind::Cy => CMatrix::controlled(&GateKind::Y.unitary()),
            GateKind::Cz => CMatrix::controlled(&GateKind::Z.unitary()),
            GateKind::Ch => CMatrix::controlled(&GateKind::H.unitary()),
            GateKind::Cs => CMatrix::controlled(&GateKind::S.unitary()),
            GateKind::Csdg => CMatrix::controlled(&GateKind::Sdg.unitary()),
            GateKind::Csx => CMatrix::controlled(&sx()),
            GateKind::Swap => CMatrix::from_real_rows(&[
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 0.0, 1.0, 0.0],
                &[0.0, 1.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 1.0],
            ]),
            // cx(0,1) followed by cx(1,0): |ab> -> |b, a^b>
            GateKind::Dcx => CMatrix::from_real_rows(&[
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 0.0, 1.0, 0.0],
                &[0.0, 0.0, 0.0, 1.0],
                &[0.0, 1.0, 0.0, 0.0],
            ]),
            GateKind::Iswap => CMatrix::from_rows(&[
                &[ONE, ZERO, ZERO, ZERO],
                &[ZERO, ZERO, I, ZERO],
                &[ZERO, I, ZERO, ZERO],
                &[ZERO, ZERO, ZERO, ONE],
            ]),
            // (X⊗I - Y⊗X)/√2
            GateKind::Ecr => {
                let r = c(h, 0.0);
                let ih = c(0.0, h);
                CMatrix::from_rows(&[
                    &[ZERO, ZERO, r, ih],
                    &[ZERO, ZERO, ih, r],
                    &[r, -ih, ZERO, ZERO],
                    &[-ih, r, ZERO, ZERO],
                ])
            }
        }
    }

    /// The kind whose unitary is the inverse of this one, when it is in the
    /// vocabulary. `dcx` is excluded: its inverse is `dcx` with swapped operands.
    pub fn inverse(self) -> Option<GateKind> {
        use GateKind::*;
        Some(match self {
            X | Y | Z | H | Id | Cx | Cy | Cz | Ch | Swap => self,
            S => Sdg,
            Sdg => S,
            T => Tdg,
            Tdg => T,
            Sx => Sxdg,
            Sxdg => Sx,
            Cs => Csdg,
            Csdg => Cs,
            Dcx | Iswap | Ecr | Csx => return None,
        })
    }

    /// True when exchanging the two operands leaves the unitary unchanged.
    pub fn is_symmetric(self) -> bool {
        matches!(
            self,
            GateKind::Cz | GateKind::Swap | GateKind::Cs | GateKind::Csdg | GateKind::Iswap
        )
    }
}

fn sx() -> CMatrix {
    let p = c(0.5, 0.5);
    let m = c(0.5, -0.5);
    CMatrix::from_rows(&[&[p, m], &[m, p]])
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = UnknownGate;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownGate(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocabulary_is_closed_and_ordered() {
        assert_eq!(GateKind::ALL.len(), GateKind::COUNT);
        for (i, k) in GateKind::ALL.iter().enumerate() {
            assert_eq!(k.index(), i);
            assert_eq!(GateKind::from_index(i), Some(*k));
            assert_eq!(k.name().parse::<GateKind>().unwrap(), *k);
        }
        assert!("rx".parse::<GateKind>().is_err());
        assert_eq!(GateKind::one_qubit().len(), 11);
        assert!(GateKind::two_qubit().iter().all(|k| k.arity() == 2));
    }

    #[test]
    fn pauli_and_phase_matrices() {
        let x = GateKind::X.unitary();
        assert_eq!(x[(0, 1)], ONE);
        assert_eq!(x[(1, 0)], ONE);
        assert_eq!(x[(0, 0)], ZERO);
        let z = GateKind::Z.unitary();
        assert_eq!(z[(1, 1)], -ONE);
        let s = GateKind::S.unitary();
        assert_eq!(s[(1, 1)], I);
        assert_eq!(GateKind::Id.unitary(), CMatrix::identity(2));
    }

    #[test]
    fn inverse_table_is_correct() {
        for k in GateKind::ALL {
            if let Some(inv) = k.inverse() {
                let p = &k.unitary() * &inv.unitary();
                assert!(p.max_abs_diff(&CMatrix::identity(p.dim())) < 1e-12, "{k}");
            }
        }
    }

    #[test]
    fn serde_uses_lowercase_names() {
        let s = serde_json::to_string(&GateKind::Sxdg).unwrap();
        assert_eq!(s, "\"sxdg\"");
        let k: GateKind = serde_json::from_str("\"csx\"").unwrap();
        assert_eq!(k, GateKind::Csx);
    }
}
