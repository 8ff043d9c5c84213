use crate::circuit::GateApplication;
use crate::gate::GateKind;

/// Expansion of a two-qubit kind over `cx` plus vocabulary 1-qubit gates,
/// on local operands `0` and `1`. Every entry uses at most three `cx`.
pub fn decompose_2q(kind: GateKind) -> Vec<GateApplication> {
    use GateKind::*;
    let g = |k: GateKind, q: &[usize]| GateApplication::new(k, q);
    let cx01 = || g(Cx, &[0, 1]);
    let cx10 = || g(Cx, &[1, 0]);
    match kind {
        Cx => vec![cx01()],
        Cz => vec![g(H, &[1]), cx01(), g(H, &[1])],
        Cy => vec![g(Sdg, &[1]), cx01(), g(S, &[1])],
        Swap => vec![cx01(), cx10(), cx01()],
        Dcx => vec![cx01(), cx10()],
        Iswap => vec![
            g(S, &[0]),
            g(S, &[1]),
            g(H, &[0]),
            cx01(),
            cx10(),
            g(H, &[1]),
        ],
        Ch => vec![
            g(S, &[1]),
            g(H, &[1]),
            g(T, &[1]),
            cx01(),
            g(Tdg, &[1]),
            g(H, &[1]),
            g(Sdg, &[1]),
        ],
        Cs => vec![g(T, &[0]), cx01(), g(Tdg, &[1]), cx01(), g(T, &[1])],
        Csdg => vec![g(Tdg, &[0]), cx01(), g(T, &[1]), cx01(), g(Tdg, &[1])],
        Csx => vec![
            g(H, &[1]),
            g(T, &[0]),
            cx01(),
            g(Tdg, &[1]),
            cx01(),
            g(T, &[1]),
            g(H, &[1]),
        ],
        Ecr => vec![g(X, &[0]), cx01(), g(Sdg, &[0]), g(Sxdg, &[1])],
        X | Y | Z | H | S | T | Id | Sxdg | Sdg | Sx | Tdg => {
            panic!("decompose_2q called with 1-qubit kind {kind}")
        }
    }
}
