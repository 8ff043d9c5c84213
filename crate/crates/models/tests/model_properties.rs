use qcgen_core::dag::NODE_TYPE_COUNT;
use qcgen_core::{circuit_to_dag, dag_to_circuit, random_circuit, CircuitDag, GateKind, NodeKind, QuantumCircuit};
use qcgen_models::latent::standard_normal;
use qcgen_models::{check_gradients, DecodeMode, Model, ModelConfig, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn circuit(n: usize, gates: &[(GateKind, &[usize])]) -> QuantumCircuit {
    let mut c = QuantumCircuit::empty(n).unwrap();
    for (k, q) in gates {
        c.push(*k, q).unwrap();
    }
    c
}

fn small(variant: Variant, seed: u64) -> Model {
    Model::new(variant, ModelConfig::small(8, 4), seed).unwrap()
}

#[test]
fn encodings_have_latent_shape_and_are_deterministic() {
    let empty = circuit_to_dag(&QuantumCircuit::empty(2).unwrap());
    for v in Variant::ALL {
        let m = small(v, 1);
        let (mu, lv) = m.encode(&empty).unwrap();
        assert_eq!((mu.len(), lv.len()), (4, 4));
        assert!(mu.iter().chain(&lv).all(|x| x.is_finite()));
        let dag = circuit_to_dag(&random_circuit(4, 20, 3));
        assert_eq!(m.encode(&dag).unwrap(), m.encode(&dag).unwrap());
    }
}

#[test]
fn reordering_independent_gates_does_not_change_the_encoding() {
    let a = circuit(3, &[(GateKind::H, &[0]), (GateKind::Y, &[2]), (GateKind::Cx, &[0, 1]), (GateKind::T, &[2])]);
    let b = circuit(3, &[(GateKind::Y, &[2]), (GateKind::T, &[2]), (GateKind::H, &[0]), (GateKind::Cx, &[0, 1])]);
    let (da, db) = (circuit_to_dag(&a), circuit_to_dag(&b));
    assert_ne!(da.nodes(), db.nodes());
    for v in Variant::ALL {
        let m = small(v, 7);
        assert_eq!(m.encode(&da).unwrap(), m.encode(&db).unwrap(), "{v}");
    }
}

#[test]
fn gcn_rounds_matter_on_chains_but_not_on_bare_wires() {
    let chain = circuit_to_dag(&circuit(
        1,
        &[(GateKind::H, &[0]), (GateKind::T, &[0]), (GateKind::X, &[0]), (GateKind::S, &[0])],
    ));
    let bare = circuit_to_dag(&QuantumCircuit::empty(2).unwrap());
    let with_rounds = |r: usize| {
        let cfg = ModelConfig {
            gcn_rounds: r,
            ..ModelConfig::small(8, 4)
        };
        Model::new(Variant::Gcn, cfg, 5).unwrap()
    };
    let (m1, m3) = (with_rounds(1), with_rounds(3));
    assert_eq!(m1.params(), m3.params());
    assert_ne!(m1.encode(&chain).unwrap(), m3.encode(&chain).unwrap());
    assert_eq!(m1.encode(&bare).unwrap(), m3.encode(&bare).unwrap());

    // with no rounds, End sees only its predecessors' types
    let m0 = with_rounds(0);
    let long = circuit_to_dag(&circuit(1, &[(GateKind::H, &[0]), (GateKind::T, &[0]), (GateKind::S, &[0])]));
    let short = circuit_to_dag(&circuit(1, &[(GateKind::X, &[0]), (GateKind::S, &[0])]));
    assert_eq!(m0.encode(&long).unwrap(), m0.encode(&short).unwrap());
    assert_ne!(m1.encode(&long).unwrap(), m1.encode(&short).unwrap());
}

#[test]
fn deepgmg_sees_operand_order() {
    let ab = circuit_to_dag(&circuit(2, &[(GateKind::Cx, &[0, 1])]));
    let ba = circuit_to_dag(&circuit(2, &[(GateKind::Cx, &[1, 0])]));
    let m = small(Variant::DeepGmg, 2);
    assert_ne!(m.encode(&ab).unwrap(), m.encode(&ba).unwrap());
}

fn assert_valid(dag: &CircuitDag, n: usize, budget: usize) {
    let nodes = dag.nodes();
    assert_eq!(nodes[0], NodeKind::Start);
    assert_eq!(*nodes.last().unwrap(), NodeKind::End);
    assert_eq!(dag.out_edges(0).count(), n);
    assert_eq!(dag.in_edges(nodes.len() - 1).count(), n);
    assert!(dag.gate_count() <= budget);
    for (i, k) in nodes.iter().enumerate() {
        if let NodeKind::Gate(g) = k {
            assert!(n >= 2 || g.arity() == 1);
            assert_eq!(dag.in_edges(i).count(), g.arity());
            assert_eq!(dag.out_edges(i).count(), g.arity());
        }
    }
    // re-validate from raw parts, independent of how the decoder built it
    CircuitDag::from_parts(nodes.to_vec(), dag.edges().to_vec()).unwrap();
    let c = dag_to_circuit(dag);
    assert_eq!(c.num_qubits(), n);
    assert_eq!(c.len(), dag.gate_count());
}

#[test]
fn decoder_is_total_over_sizes_budgets_and_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut count = 0;
    for seed in 0..6u64 {
        let variant = Variant::ALL[seed as usize % 3];
        let m = Model::new(variant, ModelConfig::small(12, 6), seed).unwrap();
        for n in [1usize, 2, 4, 6] {
            for budget in [0usize, 16, 32] {
                for mode in [DecodeMode::Greedy, DecodeMode::Sample] {
                    for _ in 0..3 {
                        let z: Vec<f64> = standard_normal(6, &mut rng).iter().map(|x| 3.0 * x).collect();
                        let dag = m.decode(&z, n, budget, mode, &mut rng).unwrap();
                        assert_valid(&dag, n, budget);
                        count += 1;
                    }
                }
            }
        }
    }
    assert_eq!(count, 6 * 4 * 3 * 2 * 3);
}

#[test]
fn zero_budget_wires_start_to_end() {
    let m = small(Variant::Gru, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let dag = m.decode(&[0.5; 4], 3, 0, DecodeMode::Sample, &mut rng).unwrap();
    assert_eq!(dag.nodes().len(), 2);
    assert!(dag.edges().iter().all(|e| e.src == 0 && e.dst == 1 && e.src_port == e.dst_port));
}

#[test]
fn oversized_registers_are_rejected() {
    let m = small(Variant::Gcn, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(m.decode(&[0.0; 4], 13, 4, DecodeMode::Greedy, &mut rng).is_err());
    assert!(m.decode(&[0.0; 4], 0, 4, DecodeMode::Greedy, &mut rng).is_err());
}

/// With the add-node and edge heads zeroed, every choice is uniform over the
/// unmasked options, so the loss is a sum of logs of option counts.
#[test]
fn uniform_heads_give_closed_form_loss() {
    let mut m = small(Variant::Gru, 3);
    for name in ["dec.add_w2", "dec.add_b2", "dec.edge_v"] {
        let id = m.params().id(name).unwrap();
        m.params_mut().data_mut(id).fill(0.0);
    }
    let loss = |m: &Model, c: &QuantumCircuit| {
        let mut tape = m.tape();
        let z = tape.constant(vec![0.1; 4]);
        let l = m.structural_loss_on(&mut tape, z, &circuit_to_dag(c)).unwrap();
        tape.scalar(l)
    };
    let gates_and_end = (NODE_TYPE_COUNT - 1) as f64;
    assert!((loss(&m, &QuantumCircuit::empty(2).unwrap()) - gates_and_end.ln()).abs() < 1e-12);
    assert!((loss(&m, &QuantumCircuit::empty(1).unwrap()) - 12f64.ln()).abs() < 1e-12);
    let cx = circuit(3, &[(GateKind::Cx, &[2, 0])]);
    let want = 2.0 * gates_and_end.ln() + 3f64.ln() + 2f64.ln();
    assert!((loss(&m, &cx) - want).abs() < 1e-12);
    let x = circuit(3, &[(GateKind::X, &[1]), (GateKind::Z, &[1])]);
    let want = 3.0 * gates_and_end.ln() + 2.0 * 3f64.ln();
    assert!((loss(&m, &x) - want).abs() < 1e-12);
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..6u64 {
        let variant = Variant::ALL[i as usize % 3];
        let mut m = Model::new(variant, ModelConfig::small(8, 3), 100 + i).unwrap();
        let dag = circuit_to_dag(&random_circuit(2 + i as usize % 2, 4, i));
        let eps = standard_normal(3, &mut rng);
        let r = check_gradients(&mut m, &dag, &eps, 1.0, 1e-5, 1e-3).unwrap();
        assert!(r.max_rel_err < 1e-4, "{variant}: {:?}", r.worst);
    }
}
